use num_complex::Complex64;
use oblivion::acceptance::fuzz_parser;
use oblivion::dsl::{self, DslError, BUILTIN_SOURCES};
use oblivion::pointer::CouplingStrength;
use oblivion::scenarios::{self, RecombineOption, ScenarioResult};
use oblivion::Error;

fn from_source(stem: &str, name: &str) -> ScenarioResult {
    let src = dsl::builtin_source(stem).unwrap();
    let spec = dsl::parse(src).unwrap_or_else(|d| panic!("{stem}:\n{d}"));
    assert!(spec.warnings.is_empty(), "{stem}: {:?}", spec.warnings);
    dsl::evaluate(&spec, name).unwrap_or_else(|e| panic!("{stem}: {e}"))
}

#[test]
fn shipped_descriptions_match_the_builders() {
    let g = CouplingStrength::new(0.05).unwrap();
    let cases: Vec<(&str, ScenarioResult)> = vec![
        ("oblivion", scenarios::run_oblivion().unwrap()),
        ("elastic_collision", scenarios::run_elastic_collision().unwrap()),
        ("three_boxes", scenarios::run_three_boxes().unwrap()),
        ("hardy", scenarios::run_hardy().unwrap()),
        ("four_mirror", scenarios::run_four_mirror(10, 1).unwrap()),
        (
            "three_path_photon",
            scenarios::run_three_path_photon(RecombineOption::RecombineAll, g).unwrap(),
        ),
        (
            "three_path_photon_recombine_two",
            scenarios::run_three_path_photon(RecombineOption::RecombineTwo, g).unwrap(),
        ),
    ];
    assert_eq!(cases.len(), BUILTIN_SOURCES.len());
    for (stem, built) in cases {
        let parsed = from_source(stem, &built.scenario);
        parsed.validate().unwrap();
        if let Err(e) = built.compare_exact(&parsed, 1e-12) {
            panic!("{stem}: {e}");
        }
    }
}

#[test]
fn render_round_trips() {
    for (stem, src) in BUILTIN_SOURCES {
        let spec = dsl::parse(src).unwrap();
        let text = dsl::render(&spec);
        let again = dsl::parse(&text).unwrap_or_else(|d| panic!("{stem}:\n{d}\n{text}"));
        assert_eq!(spec, again, "{stem}");
        assert_eq!(dsl::render(&again), text, "{stem}");
    }
}

#[test]
fn expressions_round_trip_through_render() {
    let src = "FACTORS\nf: a b\ng: x y\n\nINITIAL\na x : 1\n\nOBSERVABLES\n\
        A = 2 * ([f=a] + [g=y]) * [f=b]\n\
        B = -(I - [f=a g=x,y]) / 4\n\
        C = (1 + 2*i) * [f=a] - -3 * ([g=x] * [g=y])\n\
        D = 0.5\n\
        E = [f=a] * (2 * [f=b]) * I\n";
    let spec = dsl::parse(src).unwrap();
    let text = dsl::render(&spec);
    assert_eq!(dsl::parse(&text).unwrap(), spec, "{text}");
}

#[test]
fn sugar_amplitudes_equal_the_literal_value() {
    let a =
        dsl::parse("FACTORS\nbox: 1 2 3\nINITIAL\n1 : 1/sqrt(3)\n2 : 1/sqrt(3)\n3 : 1/sqrt(3)\n").unwrap();
    let b = dsl::parse(
        "FACTORS\nbox: 1 2 3\nINITIAL\n1 : 0.5773502691896258,0\n2 : 0.5773502691896258,0\n3 : 0.5773502691896258\n",
    )
    .unwrap();
    assert_eq!(a, b);
    assert_eq!(
        a.initial.terms[0].amplitude,
        Complex64::new(1.0 / 3f64.sqrt(), 0.0)
    );
}

#[test]
fn unnormalized_initial_state_is_renormalized_with_a_warning() {
    let spec = dsl::parse("FACTORS\nbox: 1 2\nINITIAL\n1 : 1\n2 : 1\n").unwrap();
    assert_eq!(spec.warnings.len(), 1);
    assert_eq!(spec.warnings[0].pos.line, 3);
    let n: f64 = spec.initial.terms.iter().map(|t| t.amplitude.norm_sqr()).sum();
    assert!((n - 1.0).abs() < 1e-15);
}

#[test]
fn missing_factors_is_a_validation_error() {
    let d = dsl::parse("INITIAL\n").unwrap_err();
    assert!(d
        .errors()
        .iter()
        .any(|e| matches!(e, DslError::Validation { message, .. } if message.contains("no factors"))));
    let d = dsl::parse("").unwrap_err();
    assert!(d.to_string().contains("no factors"));
}

#[test]
fn syntax_errors_carry_positions_and_expectations() {
    let d = dsl::parse("FACTORS\nbox 1 2\nINITIAL\n1 : 1 +\nGATES\nt3 beamsplitter box: 1 2\n").unwrap_err();
    let errs = d.errors();
    assert_eq!(errs.len(), 3, "{d}");
    let lines: Vec<usize> = errs.iter().map(|e| e.pos().line).collect();
    assert_eq!(lines, [2, 4, 6]);
    match &errs[0] {
        DslError::Syntax { pos, expected, found } => {
            assert_eq!(pos.col, 5);
            assert_eq!(expected, &["`:`"]);
            assert_eq!(found, "`1`");
        }
        other => panic!("{other:?}"),
    }
    assert!(d
        .to_string()
        .starts_with("2:5: syntax error: expected `:`, found `1`"));
    assert!(d.to_string().contains("`t3`"));
}

#[test]
fn validation_catches_bad_references() {
    let cases = [
        ("FACTORS\nbox: 1 2\nINITIAL\n3 : 1\n", "unknown label"),
        ("FACTORS\nbox: 1 2\nINITIAL\n1 2 : 1\n", "one per factor"),
        ("FACTORS\nbox: 1 1\nINITIAL\n1 : 1\n", "appears twice"),
        ("FACTORS\nbox: 1 2\nINITIAL\n1 : 0\n", "cannot be normalized"),
        ("FACTORS\nbox: 1 2\nINITIAL\n1 : 1\nGATES\nt1 custom_unitary box: 1; 1 | 1; -1\n", "not unitary"),
        ("FACTORS\nbox: 1 2\nINITIAL\n1 : 1\nGATES\nt1 custom_unitary box: 1\n", "rows"),
        ("FACTORS\nbox: 1 2\nINITIAL\n1 : 1\nGATES\nt2 beamsplitter box: 1 2\nt1 beamsplitter box: 1 2\n", "follows"),
        ("FACTORS\nbox: 1 2\nINITIAL\n1 : 1\nGATES\nt1 projector_select P: box=1\nOBSERVABLES\nP = [box=1]\n", "already used"),
        ("FACTORS\nbox: 1 2\nINITIAL\n1 : 1\nOBSERVABLES\nP @t2 = [box=1]\n", "no state is recorded"),
        ("FACTORS\nbox: 1 2\nINITIAL\n1 : 1\nOBSERVABLES\nP = [cat=1]\n", "unknown factor"),
        ("FACTORS\nbox: 1 2\nINITIAL\n1 : 1\nGATES\nt0 swap_map box=1 <-> box=1\n", "identical"),
        ("FACTORS\na: 1 2 3 4 5 6 7 8\nb: 1 2 3 4 5 6 7 8\nc: 1 2 3 4 5 6 7 8\nd: 1 2\nd2: 1 2\nINITIAL\n1 1 1 1 1 : 1\n", "exceeds"),
    ];
    for (src, needle) in cases {
        let d = dsl::parse(src).expect_err(src);
        assert!(d.to_string().contains(needle), "{src}\n{d}");
    }
}

#[test]
fn orthogonal_postselection_reports_its_position() {
    let src = "FACTORS\nbox: 1 2 3\n\nINITIAL\n1 : 1\n\nPOSTSELECT\n2 : 1\n";
    let spec = dsl::parse(src).unwrap();
    match dsl::evaluate(&spec, "t") {
        Err(DslError::Eval {
            pos,
            source: Error::OrthogonalSelection { .. },
        }) => {
            assert_eq!(pos.line, 7)
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn invalid_utf8_is_a_diagnostic() {
    let d = dsl::parse_bytes(b"FACTORS\nbox: 1 \xff 2\n").unwrap_err();
    assert_eq!(d.errors()[0].pos().line, 2);
    assert_eq!(d.errors()[0].pos().col, 8);
    assert!(dsl::parse_bytes(&vec![b' '; dsl::MAX_INPUT_BYTES + 1]).is_err());
}

#[test]
fn fuzzed_inputs_never_panic() {
    let report = fuzz_parser(100_000, 7);
    let shown: Vec<_> = report
        .failures
        .iter()
        .take(3)
        .map(|f| String::from_utf8_lossy(f).into_owned())
        .collect();
    assert!(
        report.failures.is_empty(),
        "{} failures, first: {shown:?}",
        report.failures.len()
    );
    assert!(report.accepted > 1000, "only {} inputs parsed", report.accepted);
}
