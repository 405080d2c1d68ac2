//! The `.scn` scenario description format.
//!
//! A file is a sequence of sections, each opened by a header line:
//!
//! ```text
//! FACTORS                 # name: label label ...
//! box: 1 2 3
//!
//! INITIAL                 # labels (one per factor) : amplitude
//! 1 : 1/sqrt(3)
//! 2 : 1/sqrt(3)
//! 3 : 1/sqrt(3)
//!
//! GATES                   # epoch kind ...
//! t1 projector_select quiet: box=1,2
//!
//! POSTSELECT              # same form as INITIAL
//! 1 : 1
//!
//! OBSERVABLES             # name [@epoch] = operator expression
//! P1 @t0 = [box=1]
//! ```
//!
//! Amplitudes are complex expressions (`1/sqrt(2)`, `-i/2`, `exp(i*pi/4)`)
//! or a `re,im` pair. Gate kinds:
//!
//! * `beamsplitter f: a b [-> c d] [phase_in=x] [phase_out=y]`
//! * `swap_map f=l g=m <-> f=l' g=m'`
//! * `projector_select NAME: f=l1,l2 g=m`
//! * `custom_unitary f g: u00; u01 | u10; u11` (rows split by `|`)
//!
//! Observables combine projectors `[f=l1,l2 g=m]`, the identity `I`,
//! scalars, `+`, `-`, `*` and parentheses.

mod eval;
mod expr;
mod parse;
mod render;

use std::fmt;

use num_complex::Complex64;

pub use eval::{evaluate, weak_fixture};
pub use expr::{Expr, Selection};
pub use parse::{parse, parse_bytes, MAX_DEPTH, MAX_DIMENSION, MAX_INPUT_BYTES};
pub use render::render;

use crate::scenarios::Epoch;

/// 1-based line and column of a construct in the source text.
///
/// Positions never take part in equality, so specs parsed from differently
/// formatted text compare equal when their content does.
#[derive(Debug, Clone, Copy, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl PartialEq for Pos {
    fn eq(&self, _: &Pos) -> bool {
        true
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorDecl {
    pub name: String,
    pub labels: Vec<String>,
    pub pos: Pos,
}

/// One basis state (a label per factor) with its amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub labels: Vec<String>,
    pub amplitude: Complex64,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateDecl {
    pub terms: Vec<Term>,
    /// Position of the section header.
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    BeamSplitter {
        factor: String,
        modes: [String; 2],
        to: Option<[String; 2]>,
        phase_in: f64,
        phase_out: f64,
    },
    SwapMap {
        left: Vec<(String, String)>,
        right: Vec<(String, String)>,
    },
    ProjectorSelect {
        name: String,
        selections: Vec<Selection>,
    },
    CustomUnitary {
        factors: Vec<String>,
        rows: Vec<Vec<Complex64>>,
    },
}

impl GateKind {
    pub fn keyword(&self) -> &'static str {
        match self {
            GateKind::BeamSplitter { .. } => "beamsplitter",
            GateKind::SwapMap { .. } => "swap_map",
            GateKind::ProjectorSelect { .. } => "projector_select",
            GateKind::CustomUnitary { .. } => "custom_unitary",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub epoch: Epoch,
    pub kind: GateKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservableDecl {
    pub name: String,
    /// Epoch whose state the observable is evaluated on; the last recorded
    /// epoch when absent.
    pub epoch: Option<Epoch>,
    pub expr: Expr,
    pub pos: Pos,
}

/// Non-fatal remark produced while parsing.
#[derive(Debug, Clone, PartialEq)]
pub struct Warning {
    pub pos: Pos,
    pub message: String,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: warning: {}", self.pos, self.message)
    }
}

/// A validated scenario description.
#[derive(Debug, Clone)]
pub struct ScenarioSpec {
    pub factors: Vec<FactorDecl>,
    pub initial: StateDecl,
    pub gates: Vec<Gate>,
    pub postselect: Option<StateDecl>,
    pub observables: Vec<ObservableDecl>,
    pub warnings: Vec<Warning>,
}

impl PartialEq for ScenarioSpec {
    fn eq(&self, other: &ScenarioSpec) -> bool {
        self.factors == other.factors
            && self.initial == other.initial
            && self.gates == other.gates
            && self.postselect == other.postselect
            && self.observables == other.observables
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DslError {
    Syntax {
        pos: Pos,
        expected: Vec<String>,
        found: String,
    },
    Validation {
        pos: Pos,
        message: String,
    },
    Eval {
        pos: Pos,
        source: crate::Error,
    },
}

impl DslError {
    pub fn pos(&self) -> Pos {
        match self {
            DslError::Syntax { pos, .. } | DslError::Validation { pos, .. } | DslError::Eval { pos, .. } => {
                *pos
            }
        }
    }

    pub(crate) fn syntax(pos: Pos, expected: &[&str], found: impl Into<String>) -> Self {
        DslError::Syntax {
            pos,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: found.into(),
        }
    }

    pub(crate) fn validation(pos: Pos, message: impl Into<String>) -> Self {
        DslError::Validation {
            pos,
            message: message.into(),
        }
    }
}

impl fmt::Display for DslError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DslError::Syntax { pos, expected, found } => {
                write!(f, "{pos}: syntax error: expected ")?;
                match expected.len() {
                    0 => write!(f, "something else")?,
                    1 => write!(f, "{}", expected[0])?,
                    _ => write!(f, "one of {}", expected.join(", "))?,
                }
                write!(f, ", found {found}")
            }
            DslError::Validation { pos, message } => write!(f, "{pos}: validation error: {message}"),
            DslError::Eval { pos, source } => write!(f, "{pos}: evaluation error: {source}"),
        }
    }
}

impl std::error::Error for DslError {}

/// Every error found in one input, in source order.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics(pub Vec<DslError>);

impl Diagnostics {
    pub fn errors(&self) -> &[DslError] {
        &self.0
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for Diagnostics {}

impl From<DslError> for Diagnostics {
    fn from(e: DslError) -> Self {
        Diagnostics(vec![e])
    }
}

/// Shipped description of each built-in scenario, keyed by file stem.
pub const BUILTIN_SOURCES: [(&str, &str); 7] = [
    ("four_mirror", include_str!("../../scenarios/four_mirror.scn")),
    ("oblivion", include_str!("../../scenarios/oblivion.scn")),
    (
        "elastic_collision",
        include_str!("../../scenarios/elastic_collision.scn"),
    ),
    ("three_boxes", include_str!("../../scenarios/three_boxes.scn")),
    ("hardy", include_str!("../../scenarios/hardy.scn")),
    (
        "three_path_photon",
        include_str!("../../scenarios/three_path_photon.scn"),
    ),
    (
        "three_path_photon_recombine_two",
        include_str!("../../scenarios/three_path_photon_recombine_two.scn"),
    ),
];

pub fn builtin_source(stem: &str) -> Option<&'static str> {
    BUILTIN_SOURCES.iter().find(|(s, _)| *s == stem).map(|(_, t)| *t)
}
