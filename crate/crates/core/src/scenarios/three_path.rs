//! A photon split 1/3 : 2/3, the 2/3 beam split again, one weak pointer
//! per third, then either all three beams interfered and post-selected or
//! only the two split thirds recombined before strong detection.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::result::{Epoch, ScenarioResult};
use super::WeakFixture;
use crate::error::{Error, Result};
use crate::hilbert::{mode_transfer, recombiner, source_splitter, Ket, Operator, Space};
use crate::pointer::{multi_pointer_means, CouplingStrength, PointerWavefunction};
use crate::tsvf::TwoStateVector;

pub const DEFAULT_G: f64 = 0.05;

const PATHS: [&str; 3] = ["p1", "p2", "p3"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecombineOption {
    /// Interfere all three beams and keep the port `(p1 + p2 − p3)/√3`.
    RecombineAll,
    /// Merge p1 and p2 back into one beam and detect each beam strongly.
    RecombineTwo,
}

impl RecombineOption {
    pub fn as_str(&self) -> &'static str {
        match self {
            RecombineOption::RecombineAll => "recombine_all",
            RecombineOption::RecombineTwo => "recombine_two",
        }
    }
}

impl fmt::Display for RecombineOption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RecombineOption {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "recombine_all" | "all" | "a" => Ok(RecombineOption::RecombineAll),
            "recombine_two" | "two" | "b" => Ok(RecombineOption::RecombineTwo),
            other => Err(Error::InvalidArgument(format!(
                "unknown option `{other}` (expected recombine_all or recombine_two)"
            ))),
        }
    }
}

pub(crate) fn space() -> Space {
    Space::single("path", &PATHS).expect("static labels")
}

fn real(rows: &[[f64; 3]; 3]) -> DMatrix<Complex64> {
    DMatrix::from_fn(3, 3, |r, c| Complex64::new(rows[r][c], 0.0))
}

/// Sends the source (p3) to `√(2/3)|p1⟩ + √(1/3)|p3⟩`.
pub(crate) fn first_split() -> DMatrix<Complex64> {
    let (a, b) = ((1.0f64 / 3.0).sqrt(), (2.0f64 / 3.0).sqrt());
    real(&[[a, 0.0, b], [0.0, 1.0, 0.0], [-b, 0.0, a]])
}

/// Rows are the output ports; the first keeps `(p1 + p2 − p3)/√3`.
pub(crate) fn three_way_recombiner() -> DMatrix<Complex64> {
    let (s3, s2, s6) = (3f64.sqrt(), 2f64.sqrt(), 6f64.sqrt());
    real(&[
        [1.0 / s3, 1.0 / s3, -1.0 / s3],
        [1.0 / s2, -1.0 / s2, 0.0],
        [1.0 / s6, 1.0 / s6, 2.0 / s6],
    ])
}

fn prepared() -> Result<Ket> {
    let space = space();
    let split = Operator::from_matrix(space.clone(), first_split())?;
    let second = Operator::on_factors(
        space.clone(),
        &["path"],
        &mode_transfer(3, [0, 1], [0, 1], &source_splitter())?,
    )?;
    second.compose(&split)?.apply(&Ket::basis(space, &["p3"])?)
}

fn projectors() -> Result<Vec<Operator>> {
    PATHS
        .iter()
        .enumerate()
        .map(|(i, p)| Ok(Operator::basis_projector(space(), "path", p)?.named(format!("P{}", i + 1))))
        .collect()
}

/// Conditioned pointer shifts for pre-state `pre` and backward-evolved
/// outcome `post`, under key `prefix`.
fn record_pointers(
    r: &mut ScenarioResult,
    prefix: &str,
    pre: &Ket,
    post: &Ket,
    g: CouplingStrength,
) -> Result<Vec<f64>> {
    let a: Vec<Complex64> = pre
        .amplitudes()
        .iter()
        .zip(post.amplitudes().iter())
        .map(|(i, f)| f.conj() * i)
        .collect();
    let means = multi_pointer_means(&a, &PointerWavefunction::default_weak(), g)?;
    for (k, m) in means.iter().enumerate() {
        r.trial_stats.insert(format!("{prefix}P{}.shift", k + 1), *m);
        if g.value() > 0.0 {
            r.trial_stats
                .insert(format!("{prefix}P{}.shift_over_g", k + 1), m / g.value());
        }
    }
    Ok(means)
}

/// Split photon with the all-beams post-selection carried back to the
/// pointers, and the per-beam projectors.
pub fn three_path_fixture() -> Result<WeakFixture> {
    let mix = Operator::from_matrix(space(), three_way_recombiner())?;
    let post = mix.adjoint().apply(&Ket::basis(space(), &["p1"])?)?;
    Ok(WeakFixture {
        tsv: TwoStateVector::new(prepared()?, post)?,
        observables: projectors()?,
    })
}

pub fn run_three_path_photon(option: RecombineOption, g: CouplingStrength) -> Result<ScenarioResult> {
    let space = space();
    let mut r = ScenarioResult::new("three_path_photon");
    r.trial_stats.insert("g".into(), g.value());
    r.describe_epoch(Epoch::T0, "photon split into three equal beams");
    r.describe_epoch(Epoch::T1, "one weak pointer per beam while delayed");
    let pre = prepared()?;
    r.record_state(Epoch::T0, &pre)?;
    match option {
        RecombineOption::RecombineAll => {
            r.describe_epoch(Epoch::T2, "all three beams interfered");
            let mix = Operator::from_matrix(space.clone(), three_way_recombiner())?;
            let out = mix.apply(&pre)?;
            r.record_state(Epoch::T2, &out)?;
            let port = Ket::basis(space.clone(), &["p1"])?;
            r.record_postselection(&out, &port, 1.0)?;
            let post = mix.adjoint().apply(&port)?;
            let p = projectors()?;
            let refs: Vec<&Operator> = p.iter().collect();
            r.record_observables(&pre, Some(&post), &refs)?;
            record_pointers(&mut r, "", &pre, &post, g)?;
        }
        RecombineOption::RecombineTwo => {
            r.describe_epoch(Epoch::T2, "the two split thirds merged back");
            let merge = Operator::on_factors(
                space.clone(),
                &["path"],
                &mode_transfer(3, [0, 1], [0, 1], &recombiner())?,
            )?;
            let out = merge.apply(&pre)?;
            r.record_state(Epoch::T2, &out)?;
            let beams = [("beam_12", "p1"), ("dark", "p2"), ("beam_3", "p3")];
            let ops: Vec<Operator> = beams
                .iter()
                .map(|(n, p)| Ok(Operator::basis_projector(space.clone(), "path", p)?.named(*n)))
                .collect::<Result<_>>()?;
            let refs: Vec<&Operator> = ops.iter().collect();
            r.record_observables(&out, None, &refs)?;
            for (name, port) in [("beam_12", "p1"), ("beam_3", "p3")] {
                let post = merge.adjoint().apply(&Ket::basis(space.clone(), &[port])?)?;
                let m = record_pointers(&mut r, &format!("{name}."), &pre, &post, g)?;
                if g.value() > 0.0 {
                    r.trial_stats
                        .insert(format!("{name}.side_12.shift_over_g"), (m[0] + m[1]) / g.value());
                    r.trial_stats
                        .insert(format!("{name}.side_3.shift_over_g"), m[2] / g.value());
                }
            }
        }
    }
    Ok(r)
}
