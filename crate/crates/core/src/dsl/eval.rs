use nalgebra::DMatrix;
use num_complex::Complex64;

use super::expr::Expr;
use super::{DslError, GateKind, Pos, ScenarioSpec, StateDecl};
use crate::error::Result;
use crate::hilbert::{mode_transfer, tuned_splitter, Factor, Ket, Operator, Space};
use crate::scenarios::{Epoch, ScenarioResult, WeakFixture};
use crate::tsvf::{post_select, TwoStateVector};

enum Step {
    Unitary(Operator),
    Select(String, Operator),
}

fn at(pos: Pos) -> impl Fn(crate::Error) -> DslError {
    move |source| DslError::Eval { pos, source }
}

fn ket(space: &Space, s: &StateDecl) -> Result<Ket> {
    let terms: Vec<(&[String], Complex64)> = s
        .terms
        .iter()
        .map(|t| (t.labels.as_slice(), t.amplitude))
        .collect();
    Ket::from_terms(space.clone(), &terms)?.normalized()
}

fn step(space: &Space, kind: &GateKind) -> Result<Step> {
    Ok(match kind {
        GateKind::BeamSplitter {
            factor,
            modes,
            to,
            phase_in,
            phase_out,
        } => {
            let f = space.factor(factor)?;
            let idx =
                |m: &[String; 2]| -> Result<[usize; 2]> { Ok([f.index_of(&m[0])?, f.index_of(&m[1])?]) };
            let from = idx(modes)?;
            let to = to.as_ref().map(idx).transpose()?.unwrap_or(from);
            let local = mode_transfer(f.dim(), from, to, &tuned_splitter(*phase_in, *phase_out))?;
            Step::Unitary(Operator::on_factors(space.clone(), &[factor], &local)?)
        }
        GateKind::SwapMap { left, right } => Step::Unitary(Operator::swap_map(space.clone(), left, right)?),
        GateKind::ProjectorSelect { name, selections } => {
            let sel: Vec<(&str, &[String])> = selections
                .iter()
                .map(|s| (s.factor.as_str(), s.labels.as_slice()))
                .collect();
            Step::Select(name.clone(), Operator::projector(space.clone(), &sel)?)
        }
        GateKind::CustomUnitary { factors, rows } => {
            let n = rows.len();
            let local = DMatrix::from_fn(n, n, |r, c| rows[r][c]);
            Step::Unitary(Operator::on_factors(space.clone(), factors, &local)?)
        }
    })
}

pub(crate) fn operator(space: &Space, e: &Expr) -> Result<Operator> {
    Ok(match e {
        Expr::Identity => Operator::identity(space.clone()),
        Expr::Projector(sels) => {
            let sel: Vec<(&str, &[String])> = sels
                .iter()
                .map(|s| (s.factor.as_str(), s.labels.as_slice()))
                .collect();
            Operator::projector(space.clone(), &sel)?
        }
        Expr::Scaled(c, inner) => operator(space, inner)?.scaled(*c),
        Expr::Sum(a, b) => operator(space, a)?.try_add(&operator(space, b)?)?,
        Expr::Difference(a, b) => operator(space, a)?.try_sub(&operator(space, b)?)?,
        Expr::Product(a, b) => operator(space, a)?.compose(&operator(space, b)?)?,
    })
}

/// Observables evaluated at one epoch, with the states on either side.
struct Group {
    pos: Pos,
    pre: Ket,
    back: Option<Ket>,
    ops: Vec<Operator>,
}

/// Runs a description: gates epoch by epoch, Born selections as they come,
/// the final post-selection, then the observables.
pub fn evaluate(spec: &ScenarioSpec, scenario: &str) -> std::result::Result<ScenarioResult, DslError> {
    run(spec, scenario).map(|(r, _)| r)
}

/// Two-state vector around the epoch of `observable` (the first declared
/// observable when `None`), for pointer sweeps. Needs a POSTSELECT section.
pub fn weak_fixture(
    spec: &ScenarioSpec,
    observable: Option<&str>,
) -> std::result::Result<(WeakFixture, String), DslError> {
    let (_, groups) = run(spec, "fixture")?;
    let wanted = |o: &Operator| observable.is_none_or(|n| o.name() == Some(n));
    let Some((group, op)) = groups
        .iter()
        .find_map(|g| g.ops.iter().find(|o| wanted(o)).map(|o| (g, o)))
    else {
        let msg = match observable {
            Some(n) => format!("no observable named `{n}`"),
            None => "the description declares no observables".to_owned(),
        };
        return Err(at(spec.initial.pos)(crate::Error::InvalidArgument(msg)));
    };
    let Some(back) = &group.back else {
        return Err(at(group.pos)(crate::Error::InvalidArgument(
            "a weak-value sweep needs a POSTSELECT section".into(),
        )));
    };
    let tsv = TwoStateVector::new(group.pre.clone(), back.clone()).map_err(at(group.pos))?;
    let name = op.name().unwrap_or_default().to_owned();
    Ok((
        WeakFixture {
            tsv,
            observables: group.ops.clone(),
        },
        name,
    ))
}

fn run(spec: &ScenarioSpec, scenario: &str) -> std::result::Result<(ScenarioResult, Vec<Group>), DslError> {
    let first = spec.factors.first().map_or(spec.initial.pos, |f| f.pos);
    let factors = spec
        .factors
        .iter()
        .map(|f| Factor::new(f.name.clone(), &f.labels).map_err(at(f.pos)))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let space = Space::new(factors).map_err(at(first))?;
    let mut state = ket(&space, &spec.initial).map_err(at(spec.initial.pos))?;

    let mut r = ScenarioResult::new(scenario);
    let mut cumulative = 1.0;
    // steps of each epoch, for carrying the post-selection back
    let mut history: Vec<(Epoch, Vec<Step>)> = Vec::new();
    for epoch in Epoch::ALL {
        let gates: Vec<_> = spec.gates.iter().filter(|g| g.epoch == epoch).collect();
        if epoch != Epoch::T0 && gates.is_empty() {
            continue;
        }
        let mut steps = Vec::new();
        let mut what = Vec::new();
        for g in gates {
            let s = step(&space, &g.kind).map_err(at(g.pos))?;
            match &s {
                Step::Unitary(u) => {
                    what.push(g.kind.keyword().to_owned());
                    state = u.apply(&state).map_err(at(g.pos))?;
                }
                Step::Select(name, p) => {
                    what.push(name.clone());
                    let (prob, collapsed) = post_select(&state, p).map_err(at(g.pos))?;
                    cumulative *= prob;
                    r.record_selection(name, prob, cumulative);
                    state = collapsed;
                }
            }
            steps.push(s);
        }
        let description = if what.is_empty() {
            "initial state".to_owned()
        } else {
            what.join(", ")
        };
        r.describe_epoch(epoch, &description);
        r.record_state(epoch, &state).map_err(at(spec.initial.pos))?;
        history.push((epoch, steps));
    }

    let post = match &spec.postselect {
        Some(p) => {
            let k = ket(&space, p).map_err(at(p.pos))?;
            r.record_postselection(&state, &k, cumulative)
                .map_err(at(p.pos))?;
            Some(k)
        }
        None => None,
    };

    let last = history.last().map_or(Epoch::T0, |(e, _)| *e);
    let mut groups = Vec::new();
    for (epoch, _) in &history {
        let decls: Vec<_> = spec
            .observables
            .iter()
            .filter(|o| o.epoch.unwrap_or(last) == *epoch)
            .collect();
        let Some(head) = decls.first() else { continue };
        let pre = r.state(*epoch).expect("recorded above").clone();
        let back = match &post {
            Some(k) => {
                let mut b = k.clone();
                for (_, steps) in history.iter().rev().take_while(|(e, _)| e > epoch) {
                    for s in steps.iter().rev() {
                        b = match s {
                            Step::Unitary(u) => u.adjoint().apply(&b),
                            Step::Select(_, p) => p.apply(&b),
                        }
                        .map_err(at(head.pos))?;
                    }
                }
                Some(b.normalized().map_err(at(head.pos))?)
            }
            None => None,
        };
        let ops = decls
            .iter()
            .map(|o| {
                Ok(operator(&space, &o.expr)
                    .map_err(at(o.pos))?
                    .named(o.name.clone()))
            })
            .collect::<std::result::Result<Vec<_>, DslError>>()?;
        let refs: Vec<&Operator> = ops.iter().collect();
        r.record_observables(&pre, back.as_ref(), &refs)
            .map_err(at(head.pos))?;
        groups.push(Group {
            pos: head.pos,
            pre,
            back,
            ops,
        });
    }
    Ok((r, groups))
}
