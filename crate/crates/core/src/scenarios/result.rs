use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use super::first_factor_rank;
use crate::error::{Error, Result};
use crate::hilbert::{Ket, Operator};
use crate::tsvf::{TwoStateVector, OVERLAP_EPS, PROJECTOR_TOL};

/// Time markers partitioning an experiment; strictly ordered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Epoch {
    T0,
    T1,
    T2,
    Final,
}

impl Epoch {
    pub const ALL: [Epoch; 4] = [Epoch::T0, Epoch::T1, Epoch::T2, Epoch::Final];

    pub fn as_str(&self) -> &'static str {
        match self {
            Epoch::T0 => "t0",
            Epoch::T1 => "t1",
            Epoch::T2 => "t2",
            Epoch::Final => "final",
        }
    }
}

impl fmt::Display for Epoch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Epoch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "t0" => Ok(Epoch::T0),
            "t1" => Ok(Epoch::T1),
            "t2" => Ok(Epoch::T2),
            "final" => Ok(Epoch::Final),
            other => Err(Error::InvalidArgument(format!("unknown epoch `{other}`"))),
        }
    }
}

/// An epoch with a human description of what happens by then.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleEpoch {
    pub label: Epoch,
    pub description: String,
}

/// One point of a coupling-strength sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub g: f64,
    pub observable: String,
    pub mean: f64,
    pub shift_over_g: f64,
    pub weak_value: f64,
}

/// Typed outputs of a scenario run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScenarioResult {
    pub scenario: String,
    pub schedule: Vec<ScheduleEpoch>,
    pub states_by_epoch: BTreeMap<Epoch, Ket>,
    pub probabilities: BTreeMap<String, f64>,
    pub weak_values: BTreeMap<String, Complex64>,
    pub schmidt_ranks: BTreeMap<Epoch, usize>,
    /// Keys of `probabilities` that together exhaust the outcomes.
    pub outcome_sets: Vec<Vec<String>>,
    /// Monte Carlo and pointer-readout statistics; empty when none.
    pub trial_stats: BTreeMap<String, f64>,
    pub sweep: Vec<SweepPoint>,
}

pub(crate) const COMPLEMENT: &str = ".complement";
pub(crate) const CUMULATIVE: &str = ".cumulative";
pub(crate) const POSTSELECT: &str = "postselect";

impl ScenarioResult {
    pub fn new(scenario: impl Into<String>) -> Self {
        ScenarioResult {
            scenario: scenario.into(),
            ..Default::default()
        }
    }

    pub(crate) fn describe_epoch(&mut self, label: Epoch, description: &str) {
        self.schedule.push(ScheduleEpoch {
            label,
            description: description.to_owned(),
        });
    }

    /// Stores the state of an epoch and its first-factor Schmidt rank.
    pub(crate) fn record_state(&mut self, epoch: Epoch, k: &Ket) -> Result<()> {
        if let Some(rank) = first_factor_rank(k)? {
            self.schmidt_ranks.insert(epoch, rank);
        }
        self.states_by_epoch.insert(epoch, k.clone());
        Ok(())
    }

    /// Records a Born selection `name` with its complement and the joint
    /// probability of the whole selection history.
    pub(crate) fn record_selection(&mut self, name: &str, probability: f64, cumulative: f64) {
        let complement = format!("{name}{COMPLEMENT}");
        self.probabilities.insert(name.to_owned(), probability);
        self.probabilities.insert(complement.clone(), 1.0 - probability);
        self.probabilities
            .insert(format!("{name}{CUMULATIVE}"), cumulative);
        self.outcome_sets.push(vec![name.to_owned(), complement]);
    }

    /// Records the post-selection onto `post` from the final `state`.
    /// `prior` is the joint probability of every earlier selection.
    pub(crate) fn record_postselection(&mut self, state: &Ket, post: &Ket, prior: f64) -> Result<()> {
        let overlap = post.inner(state)?;
        if overlap.norm() <= OVERLAP_EPS {
            return Err(Error::OrthogonalSelection {
                overlap: overlap.norm(),
            });
        }
        let p = overlap.norm_sqr();
        self.record_selection(POSTSELECT, p, prior * p);
        Ok(())
    }

    /// Weak values (when a post-selected state is given) and Born
    /// probabilities of projector observables, all evaluated at one epoch.
    ///
    /// Projectors that are pairwise orthogonal and resolve `pre` are
    /// grouped, in declaration order, into outcome sets.
    pub(crate) fn record_observables(
        &mut self,
        pre: &Ket,
        post: Option<&Ket>,
        observables: &[&Operator],
    ) -> Result<()> {
        let tsv = post
            .map(|p| TwoStateVector::new(pre.clone(), p.clone()))
            .transpose()?;
        let mut group: Vec<&Operator> = Vec::new();
        for op in observables {
            let name = op.name().unwrap_or("A").to_owned();
            if let Some(tsv) = &tsv {
                self.weak_values.insert(name.clone(), tsv.weak_value(op)?.value);
            }
            if !op.is_projector(PROJECTOR_TOL) {
                continue;
            }
            let projected = op.apply(pre)?;
            self.probabilities.insert(name, projected.norm().powi(2));
            let mut orthogonal = true;
            for g in &group {
                orthogonal &= g.product_magnitude(op)? <= PROJECTOR_TOL;
            }
            if !orthogonal {
                group.clear();
            }
            group.push(op);
            let mut covered = Ket::zero(pre.space().clone());
            for g in &group {
                let part = g.apply(pre)?;
                covered = Ket::from_vector(pre.space().clone(), covered.amplitudes() + part.amplitudes());
            }
            if covered.max_abs_diff(pre) <= PROJECTOR_TOL {
                self.outcome_sets.push(
                    group
                        .drain(..)
                        .map(|g| g.name().unwrap_or("A").to_owned())
                        .collect(),
                );
            }
        }
        Ok(())
    }

    pub fn state(&self, epoch: Epoch) -> Option<&Ket> {
        self.states_by_epoch.get(&epoch)
    }

    pub fn probability(&self, name: &str) -> Option<f64> {
        self.probabilities.get(name).copied()
    }

    pub fn weak_value(&self, name: &str) -> Option<Complex64> {
        self.weak_values.get(name).copied()
    }

    /// Checks probabilities lie in [0, 1] and each outcome set sums to 1.
    pub fn validate(&self) -> std::result::Result<(), String> {
        for (k, p) in &self.probabilities {
            if !(-1e-12..=1.0 + 1e-12).contains(p) {
                return Err(format!("probability {k} = {p} outside [0, 1]"));
            }
        }
        for set in &self.outcome_sets {
            let mut total = 0.0;
            for k in set {
                total += self
                    .probabilities
                    .get(k)
                    .ok_or_else(|| format!("outcome {k} has no probability"))?;
            }
            if (total - 1.0).abs() > 1e-10 {
                return Err(format!("outcome set {set:?} sums to {total}"));
            }
        }
        Ok(())
    }

    /// Compares every exactly computed field (states, probabilities, weak
    /// values, Schmidt ranks, outcome sets) within `tol`. Trial statistics
    /// and sweeps are not compared.
    pub fn compare_exact(&self, other: &ScenarioResult, tol: f64) -> std::result::Result<(), String> {
        let keys = |a: Vec<String>, b: Vec<String>, what: &str| {
            if a != b {
                Err(format!("{what} keys differ: {a:?} vs {b:?}"))
            } else {
                Ok(())
            }
        };
        keys(
            self.states_by_epoch.keys().map(|e| e.to_string()).collect(),
            other.states_by_epoch.keys().map(|e| e.to_string()).collect(),
            "state",
        )?;
        for (e, k) in &self.states_by_epoch {
            let o = &other.states_by_epoch[e];
            if k.space() != o.space() {
                return Err(format!(
                    "state spaces differ at {e}: {} vs {}",
                    k.space(),
                    o.space()
                ));
            }
            let d = k.max_abs_diff(o);
            if d > tol {
                return Err(format!("states differ at {e} by {d:e}"));
            }
        }
        keys(
            self.probabilities.keys().cloned().collect(),
            other.probabilities.keys().cloned().collect(),
            "probability",
        )?;
        for (k, p) in &self.probabilities {
            let d = (p - other.probabilities[k]).abs();
            if d > tol {
                return Err(format!("probability {k} differs by {d:e}"));
            }
        }
        keys(
            self.weak_values.keys().cloned().collect(),
            other.weak_values.keys().cloned().collect(),
            "weak value",
        )?;
        for (k, w) in &self.weak_values {
            let d = (w - other.weak_values[k]).norm();
            if d > tol {
                return Err(format!("weak value {k} differs by {d:e}"));
            }
        }
        if self.schmidt_ranks != other.schmidt_ranks {
            return Err(format!(
                "Schmidt ranks differ: {:?} vs {:?}",
                self.schmidt_ranks, other.schmidt_ranks
            ));
        }
        let norm_sets = |s: &[Vec<String>]| {
            let mut v: Vec<Vec<String>> = s
                .iter()
                .map(|x| {
                    let mut x = x.clone();
                    x.sort();
                    x
                })
                .collect();
            v.sort();
            v
        };
        if norm_sets(&self.outcome_sets) != norm_sets(&other.outcome_sets) {
            return Err(format!(
                "outcome sets differ: {:?} vs {:?}",
                self.outcome_sets, other.outcome_sets
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epochs_are_ordered_and_parse() {
        assert!(Epoch::T0 < Epoch::T1 && Epoch::T1 < Epoch::T2 && Epoch::T2 < Epoch::Final);
        for e in Epoch::ALL {
            assert_eq!(e.as_str().parse::<Epoch>().unwrap(), e);
        }
        assert!("t3".parse::<Epoch>().is_err());
    }

    #[test]
    fn selection_records_a_complete_pair() {
        let mut r = ScenarioResult::new("x");
        r.record_selection("quiet", 0.75, 0.75);
        assert_eq!(r.probability("quiet.complement"), Some(0.25));
        assert!(r.validate().is_ok());
        r.probabilities.insert("quiet.complement".into(), 0.3);
        assert!(r.validate().is_err());
    }

    #[test]
    fn out_of_range_probability_fails_validation() {
        let mut r = ScenarioResult::new("x");
        r.probabilities.insert("p".into(), 1.5);
        assert!(r.validate().is_err());
    }
}
