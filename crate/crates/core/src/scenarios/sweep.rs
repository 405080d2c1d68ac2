//! Coupling-strength sweeps of the post-selected pointer mean.

use std::str::FromStr;

use super::result::SweepPoint;
use super::WeakFixture;
use crate::error::{Error, Result};
use crate::hilbert::Operator;
use crate::pointer::{couple, pointer_mean, CouplingStrength, PointerWavefunction};

/// `min:max:steps[:log]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GSweep {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
    pub log: bool,
}

impl GSweep {
    pub fn new(min: f64, max: f64, steps: usize, log: bool) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "sweep needs finite g_min > 0, got {min}"
            )));
        }
        if max < min {
            return Err(Error::InvalidArgument(format!(
                "sweep g_max {max} is below g_min {min}"
            )));
        }
        if steps == 0 {
            return Err(Error::InvalidArgument("sweep needs at least one step".into()));
        }
        Ok(GSweep { min, max, steps, log })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                let t = i as f64 / last;
                if self.log {
                    (self.min.ln() + t * (self.max.ln() - self.min.ln())).exp()
                } else {
                    self.min + t * (self.max - self.min)
                }
            })
            .collect()
    }
}

impl FromStr for GSweep {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::InvalidArgument(format!("expected min:max:steps[:log], got `{s}`"));
        if !(3..=4).contains(&parts.len()) {
            return Err(bad());
        }
        let min: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let max: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let steps: usize = parts[2].trim().parse().map_err(|_| bad())?;
        let log = match parts.get(3).map(|p| p.trim()) {
            None | Some("lin") => false,
            Some("log") => true,
            Some(_) => return Err(bad()),
        };
        GSweep::new(min, max, steps, log)
    }
}

pub fn parse_sweep(s: &str) -> Result<GSweep> {
    s.parse()
}

/// Pointer mean over `sweep` for one observable of `fixture`, with the
/// default weak pointer.
pub fn weak_sweep(fixture: &WeakFixture, observable: &str, sweep: &GSweep) -> Result<Vec<SweepPoint>> {
    let op = fixture
        .observable(observable)
        .ok_or_else(|| Error::InvalidArgument(format!("no observable named `{observable}`")))?;
    let ptr = PointerWavefunction::default_weak();
    let post = Operator::outer(fixture.tsv.post(), fixture.tsv.post())?;
    let w = fixture.tsv.weak_value(op)?.value.re;
    sweep
        .values()
        .into_iter()
        .map(|g| {
            let joint = couple(fixture.tsv.pre(), op, &ptr, CouplingStrength::new(g)?)?;
            let mean = pointer_mean(&joint, &post)?;
            Ok(SweepPoint {
                g,
                observable: observable.to_owned(),
                mean,
                shift_over_g: mean / g,
                weak_value: w,
            })
        })
        .collect()
}

/// Fixture and default observable used for `--g-sweep` on a built-in id.
pub fn sweep_fixture(id: &str) -> Option<Result<(WeakFixture, &'static str)>> {
    Some(match id {
        "three_boxes" => super::three_boxes_fixture().map(|f| (f, "P3")),
        "hardy" => super::hardy_fixture().map(|f| (f, "NO_NO")),
        "three_path_photon" => super::three_path::three_path_fixture().map(|f| (f, "P3")),
        _ => return None,
    })
}
