//! Canonical render output pinned byte for byte. Regenerate with
//! `OBLIVION_BLESS=1 cargo test --test golden`.

use std::path::PathBuf;

use oblivion::dsl::{self, BUILTIN_SOURCES};

fn golden_path(stem: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(format!("{stem}.scn"))
}

#[test]
fn canonical_render_matches_golden_files() {
    let bless = std::env::var_os("OBLIVION_BLESS").is_some();
    for (stem, src) in BUILTIN_SOURCES {
        let rendered = dsl::render(&dsl::parse(src).unwrap());
        let path = golden_path(stem);
        if bless {
            std::fs::write(&path, &rendered).unwrap();
        }
        let golden = std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(rendered.as_bytes(), golden.as_slice(), "{stem}");
    }
}

#[test]
fn golden_files_are_fixed_points() {
    for (stem, _) in BUILTIN_SOURCES {
        let golden = std::fs::read_to_string(golden_path(stem)).unwrap();
        let spec = dsl::parse(&golden).unwrap();
        assert!(spec.warnings.is_empty(), "{stem}");
        assert_eq!(dsl::render(&spec), golden, "{stem}");
    }
}
