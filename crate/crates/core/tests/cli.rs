use std::process::{Command, Output};

fn oblivion(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oblivion"))
        .args(args)
        .env_remove("NO_COLOR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn shipped(stem: &str) -> String {
    format!("{}/scenarios/{stem}.scn", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn three_boxes_table_shows_the_weak_values() {
    let o = oblivion(&["run", "three_boxes"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("scenario=three_boxes seed=42\n"));
    for row in [
        "P1    1.000000   0.000000",
        "P2    1.000000   0.000000",
        "P3    -1.000000  0.000000",
    ] {
        assert!(text.contains(row), "missing `{row}` in\n{text}");
    }
    assert!(
        !text.contains('\u{1b}'),
        "no styling when stdout is not a terminal"
    );
}

#[test]
fn oblivion_csv_lists_schmidt_ranks() {
    let o = oblivion(&["run", "oblivion", "--format", "csv"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let ranks: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("epoch,"))
        .map(|l| l.split(',').nth(2).unwrap())
        .collect();
    assert_eq!(ranks, ["1", "2", "1"]);
    assert!(text.contains("kind,epoch,schmidt_rank,description\n"));
    assert!(!text.contains("kind,name,re,im"), "no weak values, so no section");
}

#[test]
fn hardy_sweep_has_one_row_per_g() {
    let o = oblivion(&["run", "hardy", "--g-sweep", "0.01:0.2:8", "--format", "csv"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| l.starts_with("sweep,NO_NO,"))
        .map(|l| l.split(',').skip(2).map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 8);
    assert!((rows[0][0] - 0.01).abs() < 1e-12 && (rows[7][0] - 0.2).abs() < 1e-12);
    assert!((rows[0][2] + 1.0).abs() < 1e-3);
    assert!(rows
        .windows(2)
        .all(|w| (w[0][2] + 1.0).abs() <= (w[1][2] + 1.0).abs()));
}

#[test]
fn jsonl_records_are_well_formed() {
    let o = oblivion(&["run", "three_boxes", "--format", "jsonl"]);
    let text = stdout(&o);
    let records: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(records.iter().all(|r| r.as_object().unwrap().len() == 5));
    let p3 = records
        .iter()
        .find(|r| r["name"] == "P3" && r["kind"] == "weak_value")
        .unwrap();
    assert_eq!(p3["re"].as_f64(), Some(-1.0));
    assert_eq!(p3["im"].as_f64(), Some(0.0));
    assert_eq!(records[0]["kind"], "header");
}

#[test]
fn output_is_byte_deterministic() {
    for format in ["table", "csv", "jsonl"] {
        let args = [
            "run",
            "four_mirror",
            "--trials",
            "300",
            "--seed",
            "9",
            "--format",
            format,
        ];
        assert_eq!(oblivion(&args).stdout, oblivion(&args).stdout, "{format}");
    }
}

#[test]
fn seed_changes_statistics_but_not_exact_fields() {
    let run = |seed: &str| {
        stdout(&oblivion(&[
            "run",
            "four_mirror",
            "--trials",
            "400",
            "--seed",
            seed,
            "--format",
            "csv",
        ]))
    };
    let (a, b) = (run("1"), run("2"));
    let exact = |t: &str| -> Vec<String> {
        t.lines()
            .filter(|l| !l.starts_with('#') && !l.starts_with("trial_stat,"))
            .map(str::to_owned)
            .collect()
    };
    assert_eq!(exact(&a), exact(&b));
    let stats = |t: &str| {
        t.lines()
            .filter(|l| l.starts_with("trial_stat,"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_ne!(stats(&a), stats(&b));
    assert!(a.starts_with("# scenario=four_mirror seed=1 trials=400\n"));
}

#[test]
fn out_path_receives_the_results() {
    let dir = std::env::temp_dir().join(format!("oblivion-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("hardy.csv");
    let o = oblivion(&["run", "hardy", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert_eq!(written, stdout(&oblivion(&["run", "hardy", "--format", "csv"])));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn scn_files_run_like_builtins() {
    let from_file = stdout(&oblivion(&["run", &shipped("three_boxes"), "--format", "csv"]));
    let builtin = stdout(&oblivion(&["run", "three_boxes", "--format", "csv"]));
    let weak = |t: &str| {
        t.lines()
            .filter(|l| l.starts_with("weak_value,"))
            .map(str::to_owned)
            .collect::<Vec<_>>()
    };
    assert_eq!(weak(&from_file), weak(&builtin));
    let sweep = oblivion(&[
        "run",
        &shipped("hardy"),
        "--g-sweep",
        "0.05:0.1:3",
        "--observable",
        "NO_NO",
        "--format",
        "csv",
    ]);
    assert!(
        sweep.status.success(),
        "{}",
        String::from_utf8_lossy(&sweep.stderr)
    );
    assert_eq!(
        stdout(&sweep)
            .lines()
            .filter(|l| l.starts_with("sweep,NO_NO,"))
            .count(),
        3
    );
}

#[test]
fn list_names_every_builtin() {
    for args in [&["--list"][..], &["list"][..]] {
        let o = oblivion(args);
        assert!(o.status.success());
        let text = stdout(&o);
        for id in oblivion::scenarios::SCENARIO_IDS {
            assert!(text.lines().any(|l| l.starts_with(id)), "{id}");
        }
        assert!(text.contains("reproduces:"));
    }
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["run"][..],
        &["run", "nope"],
        &["run", "three_boxes", "--trials", "0"],
        &["run", "hardy", "--g-sweep", "0:0.2:8"],
        &["run", "hardy", "--g-sweep", "0.1:0.2"],
        &["run", "hardy", "--format", "xml"],
        &["run", "oblivion", "--g-sweep", "0.01:0.2:8"],
        &["run", "hardy", "--option", "recombine_two"],
        &["run", "hardy", "--g-sweep", "0.01:0.2:2", "--observable", "P9"],
        &["frobnicate"],
    ] {
        let o = oblivion(args);
        assert_eq!(
            o.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}

#[test]
fn diagnostics_exit_3_with_positions() {
    let dir = std::env::temp_dir().join(format!("oblivion-diag-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.scn");
    std::fs::write(&path, "FACTORS\nbox 1 2\n").unwrap();
    let o = oblivion(&["run", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr).into_owned();
    assert!(
        err.contains(&format!("{}:2:5: syntax error", path.display())),
        "{err}"
    );

    std::fs::write(
        &path,
        "FACTORS\nbox: 1 2\n\nINITIAL\n1 : 1\n\nPOSTSELECT\n2 : 1\n",
    )
    .unwrap();
    let o = oblivion(&["run", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains(":7:1:"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn io_failures_exit_4() {
    let missing = std::env::temp_dir().join("oblivion-no-such-dir/x.scn");
    assert_eq!(
        oblivion(&["run", missing.to_str().unwrap()]).status.code(),
        Some(4)
    );
    let unwritable = std::env::temp_dir().join("oblivion-no-such-dir/out.csv");
    let o = oblivion(&["run", "three_boxes", "--out", unwritable.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn check_runs_selected_criteria() {
    let o = oblivion(&["check", "--criterion", "4", "--criterion", "9"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("PASS 4."));
    assert!(lines[1].starts_with("PASS 9."));
    assert_eq!(lines[2], "2 of 2 criteria passed");
}
