//! Built-in experiments, each returning a [`ScenarioResult`].
//!
//! Exact parts (states, Born probabilities, weak values, Schmidt ranks) are
//! computed directly on the state vectors. Monte Carlo statistics and
//! pointer readouts go to `trial_stats`.

mod elastic;
mod four_mirror;
mod hardy;
mod oblivion;
mod result;
mod sweep;
mod three_boxes;
mod three_path;

pub use elastic::{elastic_collision_branches, run_elastic_collision, CollisionBranches};
pub use four_mirror::{
    four_mirror_stats, run_four_mirror, run_four_mirror_with, FourMirrorConfig, FourMirrorStats,
};
pub use hardy::{hardy_fixture, run_hardy};
pub use oblivion::{run_oblivion, time_reversal_at, time_reversal_check};
pub use result::{Epoch, ScenarioResult, ScheduleEpoch, SweepPoint};
pub use sweep::{parse_sweep, sweep_fixture, weak_sweep, GSweep};
pub use three_boxes::{run_three_boxes, three_boxes_fixture};
pub use three_path::{run_three_path_photon, three_path_fixture, RecombineOption, DEFAULT_G};

use crate::error::Result;
use crate::hilbert::{schmidt_rank, Bipartition, Ket, Operator, SCHMIDT_TOL};
use crate::tsvf::TwoStateVector;

/// A two-state vector with the named operators whose weak values a
/// scenario reports.
#[derive(Debug, Clone)]
pub struct WeakFixture {
    pub tsv: TwoStateVector,
    pub observables: Vec<Operator>,
}

impl WeakFixture {
    pub fn observable(&self, name: &str) -> Option<&Operator> {
        self.observables.iter().find(|o| o.name() == Some(name))
    }
}

/// Stable identifiers of the built-in scenarios.
pub const SCENARIO_IDS: [&str; 6] = [
    "four_mirror",
    "oblivion",
    "elastic_collision",
    "three_boxes",
    "hardy",
    "three_path_photon",
];

/// One-line description and the result it reproduces, per scenario id.
pub fn describe(id: &str) -> Option<(&'static str, &'static str)> {
    Some(match id {
        "four_mirror" => (
            "single photon bouncing through a beam splitter between four mirrors",
            "silent detector banishes the photon; a second silence makes it click",
        ),
        "oblivion" => (
            "electron-positron paths with annihilation detectors at t1 and t2",
            "states entangle then disentangle; positron fails to return, electron does",
        ),
        "elastic_collision" => (
            "two atoms colliding at either of two intersections",
            "critical-interval state; no-collision branch restores A1's superposition",
        ),
        "three_boxes" => (
            "particle pre-selected in three boxes, post-selected with box 3 inverted",
            "weak values (1, 1, -1) summing to one particle",
        ),
        "hardy" => (
            "overlapping electron and positron interferometers",
            "pair weak values (0, 1, 1, -1) with cancelling single-particle marginals",
        ),
        "three_path_photon" => (
            "photon split into three thirds with weak pointers on each path",
            "recombine all: (1, 1, -1) pointer shifts; recombine two: 0/1 totals",
        ),
        _ => return None,
    })
}

/// Runs a built-in scenario with default parameters.
pub fn run_builtin(id: &str, trials: usize, seed: u64) -> Option<Result<ScenarioResult>> {
    Some(match id {
        "four_mirror" => run_four_mirror(trials, seed),
        "oblivion" => run_oblivion(),
        "elastic_collision" => run_elastic_collision(),
        "three_boxes" => run_three_boxes(),
        "hardy" => run_hardy(),
        "three_path_photon" => run_three_path_photon(
            RecombineOption::RecombineAll,
            crate::pointer::CouplingStrength::new(DEFAULT_G).expect("valid default"),
        ),
        _ => return None,
    })
}

/// Schmidt rank across the first factor, if the space has more than one.
pub(crate) fn first_factor_rank(k: &Ket) -> Result<Option<usize>> {
    if k.space().factors().len() < 2 {
        return Ok(None);
    }
    let cut = Bipartition::first_factor(k.space())?;
    Ok(Some(schmidt_rank(k, &cut, SCHMIDT_TOL)?.0))
}
