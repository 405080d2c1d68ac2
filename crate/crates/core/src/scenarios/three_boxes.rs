use num_complex::Complex64;

use super::result::{Epoch, ScenarioResult};
use super::WeakFixture;
use crate::error::Result;
use crate::hilbert::{Ket, Operator, Space};
use crate::tsvf::TwoStateVector;

pub(crate) fn space() -> Space {
    Space::single("box", &["1", "2", "3"]).expect("static labels")
}

fn real_ket(amps: [f64; 3]) -> Result<Ket> {
    Ket::from_amplitudes(space(), amps.iter().map(|&a| Complex64::new(a, 0.0)).collect())?.normalized()
}

/// Pre-selection `(1,1,1)/√3`, post-selection `(1,1,−1)/√3` and the box
/// projectors `P1..P3` plus their sum.
pub fn three_boxes_fixture() -> Result<WeakFixture> {
    let tsv = TwoStateVector::new(real_ket([1.0, 1.0, 1.0])?, real_ket([1.0, 1.0, -1.0])?)?;
    let p: Vec<Operator> = ["1", "2", "3"]
        .iter()
        .map(|b| Ok(Operator::basis_projector(space(), "box", b)?.named(format!("P{b}"))))
        .collect::<Result<_>>()?;
    let sum = p[0].try_add(&p[1])?.try_add(&p[2])?.named("sum");
    let mut observables = p;
    observables.push(sum);
    Ok(WeakFixture { tsv, observables })
}

pub fn run_three_boxes() -> Result<ScenarioResult> {
    let f = three_boxes_fixture()?;
    let mut r = ScenarioResult::new("three_boxes");
    r.describe_epoch(Epoch::T0, "particle prepared over three boxes");
    r.record_state(Epoch::T0, f.tsv.pre())?;
    r.record_postselection(f.tsv.pre(), f.tsv.post(), 1.0)?;
    let obs: Vec<&Operator> = f.observables.iter().collect();
    r.record_observables(f.tsv.pre(), Some(f.tsv.post()), &obs)?;
    Ok(r)
}
