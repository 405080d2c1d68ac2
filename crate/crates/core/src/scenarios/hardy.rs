//! Two interferometers sharing the overlapping arm O. Each particle factor
//! carries its two arms (O, NO) and its two output detectors (C, D).
//!
//! Both splitters are tuned so that `(O + NO)/√2` leaves through C and
//! `(O − NO)/√2` through D: the recombiner takes arm 0 to `(C + D)/√2` and
//! arm 1 to `(C − D)/√2`.

use super::result::{Epoch, ScenarioResult};
use super::WeakFixture;
use crate::error::Result;
use crate::hilbert::{mode_transfer, recombiner, source_splitter, Factor, Ket, Operator, Space};
use crate::tsvf::{post_select, TwoStateVector};

pub(crate) fn space() -> Space {
    Space::new(vec![
        Factor::new("electron", &["O-", "NO-", "C-", "D-"]).expect("static labels"),
        Factor::new("positron", &["O+", "NO+", "C+", "D+"]).expect("static labels"),
        Factor::new("annihilation", &["none", "gamma"]).expect("static labels"),
    ])
    .expect("static factors")
}

struct Run {
    t0: Ket,
    no_annihilation: f64,
    t1: Ket,
    t2: Ket,
    /// Detection state evolved back to t1.
    post_t1: Ket,
    post: Ket,
}

fn simulate() -> Result<Run> {
    let space = space();
    let split = mode_transfer(4, [0, 1], [0, 1], &source_splitter())?;
    let both = |m| -> Result<[Operator; 2]> {
        Ok([
            Operator::on_factors(space.clone(), &["electron"], m)?,
            Operator::on_factors(space.clone(), &["positron"], m)?,
        ])
    };
    let apply = |ops: &[Operator; 2], k: &Ket| ops[1].apply(&ops[0].apply(k)?);
    let apply_back = |ops: &[Operator; 2], k: &Ket| ops[0].adjoint().apply(&ops[1].adjoint().apply(k)?);
    let t0 = apply(&both(&split)?, &Ket::basis(space.clone(), &["O-", "O+", "none"])?)?;
    let meet = Operator::swap_map(
        space.clone(),
        &[("electron", "O-"), ("positron", "O+"), ("annihilation", "none")],
        &[("electron", "O-"), ("positron", "O+"), ("annihilation", "gamma")],
    )?;
    let silent = Operator::basis_projector(space.clone(), "annihilation", "none")?;
    let (no_annihilation, t1) = post_select(&meet.apply(&t0)?, &silent)?;
    let out = both(&mode_transfer(4, [0, 1], [2, 3], &recombiner())?)?;
    let t2 = apply(&out, &t1)?;
    let post = Ket::basis(space.clone(), &["D-", "D+", "none"])?;
    let post_t1 = apply_back(&out, &post)?;
    Ok(Run {
        t0,
        no_annihilation,
        t1,
        t2,
        post_t1,
        post,
    })
}

fn observables(space: &Space) -> Result<Vec<Operator>> {
    let pair = |e: &str, p: &str, name: &str| -> Result<Operator> {
        Ok(
            Operator::projector(space.clone(), &[("electron", &[e][..]), ("positron", &[p][..])])?
                .named(name),
        )
    };
    Ok(vec![
        pair("O-", "O+", "OO")?,
        pair("NO-", "O+", "NO_O")?,
        pair("O-", "NO+", "O_NO")?,
        pair("NO-", "NO+", "NO_NO")?,
        Operator::basis_projector(space.clone(), "electron", "NO-")?.named("NO_minus"),
        Operator::basis_projector(space.clone(), "positron", "NO+")?.named("NO_plus"),
    ])
}

/// Two-state vector between the no-annihilation check and the D⁻D⁺
/// detection, with the pair and single-particle projectors.
pub fn hardy_fixture() -> Result<WeakFixture> {
    let run = simulate()?;
    Ok(WeakFixture {
        tsv: TwoStateVector::new(run.t1, run.post_t1)?,
        observables: observables(&space())?,
    })
}

pub fn run_hardy() -> Result<ScenarioResult> {
    let run = simulate()?;
    let mut r = ScenarioResult::new("hardy");
    r.describe_epoch(Epoch::T0, "electron and positron split into O and NO arms");
    r.describe_epoch(Epoch::T1, "no annihilation on the shared arm");
    r.describe_epoch(Epoch::T2, "both interferometers recombined onto C and D");
    r.record_state(Epoch::T0, &run.t0)?;
    r.record_selection("no_annihilation", run.no_annihilation, run.no_annihilation);
    r.record_state(Epoch::T1, &run.t1)?;
    r.record_state(Epoch::T2, &run.t2)?;
    r.record_postselection(&run.t2, &run.post, run.no_annihilation)?;
    let obs = observables(&space())?;
    let refs: Vec<&Operator> = obs.iter().collect();
    r.record_observables(&run.t1, Some(&run.post_t1.normalized()?), &refs)?;
    Ok(r)
}
