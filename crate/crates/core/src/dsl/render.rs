use std::fmt::Write;

use num_complex::Complex64;

use super::expr::{Expr, Selection};
use super::{GateKind, ScenarioSpec, StateDecl};

/// Folds `-0` to `0`; the two compare equal, so round trips are unaffected.
fn unsigned_zero(c: Complex64) -> Complex64 {
    Complex64::new(c.re + 0.0, c.im + 0.0)
}

fn amplitude(c: Complex64) -> String {
    let c = unsigned_zero(c);
    format!("{},{}", c.re, c.im)
}

fn scalar(c: Complex64) -> String {
    let c = unsigned_zero(c);
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.im.is_sign_negative() {
        format!("({}-{}*i)", c.re, -c.im)
    } else {
        format!("({}+{}*i)", c.re, c.im)
    }
}

fn selections(sels: &[Selection]) -> String {
    sels.iter()
        .map(|s| format!("{}={}", s.factor, s.labels.join(",")))
        .collect::<Vec<_>>()
        .join(" ")
}

fn is_atom(e: &Expr) -> bool {
    matches!(e, Expr::Identity | Expr::Projector(_))
}

fn wrap(e: &Expr, parens: bool) -> String {
    if parens {
        format!("({})", expr(e))
    } else {
        expr(e)
    }
}

pub(crate) fn expr(e: &Expr) -> String {
    match e {
        Expr::Identity => "I".into(),
        Expr::Projector(s) => format!("[{}]", selections(s)),
        Expr::Scaled(c, inner) => format!("{} * {}", scalar(*c), wrap(inner, !is_atom(inner))),
        Expr::Sum(a, b) | Expr::Difference(a, b) => {
            let op = if matches!(e, Expr::Sum(..)) { "+" } else { "-" };
            let right = matches!(**b, Expr::Sum(..) | Expr::Difference(..));
            format!("{} {op} {}", expr(a), wrap(b, right))
        }
        Expr::Product(a, b) => {
            let left = matches!(**a, Expr::Sum(..) | Expr::Difference(..));
            format!("{} * {}", wrap(a, left), wrap(b, !is_atom(b)))
        }
    }
}

fn state(out: &mut String, header: &str, s: &StateDecl) {
    let _ = writeln!(out, "\n{header}");
    for t in &s.terms {
        let _ = writeln!(out, "{} : {}", t.labels.join(" "), amplitude(t.amplitude));
    }
}

/// Canonical text of a description. Parsing the output gives back an equal
/// spec, and rendering that spec gives back the same text.
pub fn render(spec: &ScenarioSpec) -> String {
    let mut out = String::from("FACTORS\n");
    for f in &spec.factors {
        let _ = writeln!(out, "{}: {}", f.name, f.labels.join(" "));
    }
    state(&mut out, "INITIAL", &spec.initial);
    if !spec.gates.is_empty() {
        out.push_str("\nGATES\n");
        for g in &spec.gates {
            let body = match &g.kind {
                GateKind::BeamSplitter {
                    factor,
                    modes,
                    to,
                    phase_in,
                    phase_out,
                } => {
                    let to = to
                        .as_ref()
                        .map(|t| format!(" -> {} {}", t[0], t[1]))
                        .unwrap_or_default();
                    format!(
                        "{factor}: {} {}{to} phase_in={} phase_out={}",
                        modes[0],
                        modes[1],
                        phase_in + 0.0,
                        phase_out + 0.0
                    )
                }
                GateKind::SwapMap { left, right } => {
                    let side = |s: &[(String, String)]| {
                        s.iter()
                            .map(|(f, l)| format!("{f}={l}"))
                            .collect::<Vec<_>>()
                            .join(" ")
                    };
                    format!("{} <-> {}", side(left), side(right))
                }
                GateKind::ProjectorSelect { name, selections: s } => {
                    format!("{name}: {}", selections(s))
                }
                GateKind::CustomUnitary { factors, rows } => {
                    let rows: Vec<String> = rows
                        .iter()
                        .map(|r| r.iter().map(|c| amplitude(*c)).collect::<Vec<_>>().join("; "))
                        .collect();
                    format!("{}: {}", factors.join(" "), rows.join(" | "))
                }
            };
            let _ = writeln!(out, "{} {} {body}", g.epoch, g.kind.keyword());
        }
    }
    if let Some(p) = &spec.postselect {
        state(&mut out, "POSTSELECT", p);
    }
    if !spec.observables.is_empty() {
        out.push_str("\nOBSERVABLES\n");
        for o in &spec.observables {
            let at = o.epoch.map(|e| format!(" @{e}")).unwrap_or_default();
            let _ = writeln!(out, "{}{at} = {}", o.name, expr(&o.expr));
        }
    }
    out
}
