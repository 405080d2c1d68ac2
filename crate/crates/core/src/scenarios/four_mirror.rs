//! One photon bouncing between four mirrors around a beam splitter.
//!
//! Photon modes are the four arms Lu, Ld, Ru, Rd. Crossing the splitter
//! from the left arms to the right ones is `u = (1/√2)[[1, 1], [1, −1]]`
//! and the way back is `u†`, so a full round trip is the identity: a photon
//! leaving Ld always returns to Ld. A mirror turned detector is probed each
//! time the photon could reach it.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::result::{Epoch, ScenarioResult};
use crate::error::{Error, Result};
use crate::hilbert::{mode_transfer, recombiner, Factor, Ket, Operator, Space};
use crate::tsvf::post_select;

const LU: usize = 0;
const LD: usize = 1;
const RU: usize = 2;

pub(crate) fn space() -> Space {
    Space::new(vec![
        Factor::new("photon", &["Lu", "Ld", "Ru", "Rd"]).expect("static labels"),
        Factor::new("Lu_det", &["READY", "CLICK"]).expect("static labels"),
        Factor::new("Ru_det", &["READY", "CLICK"]).expect("static labels"),
    ])
    .expect("static factors")
}

/// Half a round trip: left arms to right arms and back.
pub(crate) fn half_trip() -> DMatrix<Complex64> {
    mode_transfer(4, [LU, LD], [RU, RU + 1], &recombiner()).expect("valid modes")
}

fn probe(space: &Space, arm: &str, det: &str) -> Result<Operator> {
    Operator::swap_map(
        space.clone(),
        &[("photon", arm), (det, "READY")],
        &[("photon", arm), (det, "CLICK")],
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct FourMirrorConfig {
    pub trials: usize,
    pub seed: u64,
    /// Round trips with only Lu armed after its first silence.
    pub lu_only_round_trips: usize,
    /// Round trips with both detectors armed after both were silent.
    pub double_silence_round_trips: usize,
}

impl FourMirrorConfig {
    pub fn new(trials: usize, seed: u64) -> Self {
        FourMirrorConfig {
            trials,
            seed,
            lu_only_round_trips: 100,
            double_silence_round_trips: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Detector {
    Lu,
    Ru,
}

/// What happened to one photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Trial {
    first_silent: bool,
    lu_only_clicks: usize,
    /// Ru silent on its first probe.
    second_silent: bool,
    /// Detector that caught the photon after the double silence, and the
    /// round trip (1-based) in which it did.
    caught: Option<(Detector, usize)>,
    lu_probes: usize,
    lu_clicks: usize,
}

/// Born-rule probe of one arm: clicks with `|a_arm|²`, otherwise the arm is
/// removed and the state renormalized.
fn probe_arm<R: Rng>(psi: &mut [Complex64; 4], arm: usize, rng: &mut R) -> bool {
    let p = psi[arm].norm_sqr();
    if rng.gen::<f64>() < p {
        return true;
    }
    psi[arm] = Complex64::new(0.0, 0.0);
    let n = (1.0 - p).sqrt();
    psi.iter_mut().for_each(|a| *a /= n);
    false
}

fn step(h: &DMatrix<Complex64>, psi: &mut [Complex64; 4]) {
    let mut out = [Complex64::new(0.0, 0.0); 4];
    for (r, o) in out.iter_mut().enumerate() {
        for (c, a) in psi.iter().enumerate() {
            *o += h[(r, c)] * a;
        }
    }
    *psi = out;
}

fn run_trial(cfg: &FourMirrorConfig, h: &DMatrix<Complex64>, index: usize) -> Trial {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut psi = [
        Complex64::new(s, 0.0),
        Complex64::new(s, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
    ];
    let mut t = Trial {
        first_silent: false,
        lu_only_clicks: 0,
        second_silent: false,
        caught: None,
        lu_probes: 0,
        lu_clicks: 0,
    };
    if probe_arm(&mut psi, LU, &mut rng) {
        return t;
    }
    t.first_silent = true;
    for _ in 0..cfg.lu_only_round_trips {
        step(h, &mut psi);
        step(h, &mut psi);
        if probe_arm(&mut psi, LU, &mut rng) {
            t.lu_only_clicks += 1;
            return t;
        }
    }
    step(h, &mut psi);
    if probe_arm(&mut psi, RU, &mut rng) {
        return t;
    }
    t.second_silent = true;
    for k in 1..=cfg.double_silence_round_trips {
        step(h, &mut psi);
        t.lu_probes += 1;
        if probe_arm(&mut psi, LU, &mut rng) {
            t.lu_clicks += 1;
            t.caught = Some((Detector::Lu, k));
            return t;
        }
        step(h, &mut psi);
        if probe_arm(&mut psi, RU, &mut rng) {
            t.caught = Some((Detector::Ru, k));
            return t;
        }
    }
    t
}

/// Monte Carlo summary over all trials.
#[derive(Debug, Clone, PartialEq)]
pub struct FourMirrorStats {
    pub trials: usize,
    pub first_probe_silent_fraction: f64,
    pub lu_only_clicks: usize,
    pub second_probe_silent_fraction: f64,
    pub double_silence_trials: usize,
    /// Entry `k − 1`: share of double-silence photons not taken by Ru that
    /// Lu caught within `k` round trips.
    pub lu_click_fraction: Vec<f64>,
    /// Share of all double-silence photons that Lu caught.
    pub lu_click_fraction_unconditional: f64,
    pub lu_click_per_probe: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn four_mirror_stats(cfg: &FourMirrorConfig) -> Result<FourMirrorStats> {
    if cfg.trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    let h = half_trip();
    let trials: Vec<Trial> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| run_trial(cfg, &h, i))
        .collect();
    let first = trials.iter().filter(|t| t.first_silent).count();
    let double = trials.iter().filter(|t| t.second_silent).count();
    let horizon = cfg.double_silence_round_trips;
    let lu_click_fraction = (1..=horizon)
        .map(|k| {
            let within = |d| {
                trials
                    .iter()
                    .filter(|t| matches!(t.caught, Some((x, j)) if x == d && j <= k))
                    .count()
            };
            ratio(within(Detector::Lu), double - within(Detector::Ru))
        })
        .collect();
    let lu_total = trials
        .iter()
        .filter(|t| matches!(t.caught, Some((Detector::Lu, _))))
        .count();
    Ok(FourMirrorStats {
        trials: cfg.trials,
        first_probe_silent_fraction: ratio(first, cfg.trials),
        lu_only_clicks: trials.iter().map(|t| t.lu_only_clicks).sum(),
        second_probe_silent_fraction: ratio(double, first),
        double_silence_trials: double,
        lu_click_fraction,
        lu_click_fraction_unconditional: ratio(lu_total, double),
        lu_click_per_probe: ratio(
            trials.iter().map(|t| t.lu_clicks).sum(),
            trials.iter().map(|t| t.lu_probes).sum(),
        ),
    })
}

/// Exact states and probabilities of the probe sequence: Lu silent, half
/// trip, Ru silent, half trip.
fn exact(r: &mut ScenarioResult) -> Result<()> {
    let space = space();
    let h = Operator::on_factors(space.clone(), &["photon"], &half_trip())?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let t0 = Ket::from_terms(
        space.clone(),
        &[
            (&["Lu", "READY", "READY"][..], Complex64::new(s, 0.0)),
            (&["Ld", "READY", "READY"][..], Complex64::new(s, 0.0)),
        ],
    )?;
    r.record_state(Epoch::T0, &t0)?;

    let lu_ready = Operator::basis_projector(space.clone(), "Lu_det", "READY")?;
    let (p1, t1) = post_select(&probe(&space, "Lu", "Lu_det")?.apply(&t0)?, &lu_ready)?;
    r.record_selection("lu_silent", p1, p1);
    r.record_state(Epoch::T1, &t1)?;

    let ru_ready = Operator::basis_projector(space.clone(), "Ru_det", "READY")?;
    let moved = probe(&space, "Ru", "Ru_det")?.apply(&h.apply(&t1)?)?;
    let (p2, t2) = post_select(&moved, &ru_ready)?;
    r.record_selection("ru_silent", p2, p1 * p2);
    r.record_state(Epoch::T2, &t2)?;

    let fin = h.apply(&t2)?;
    r.record_state(Epoch::Final, &fin)?;

    let lu = |name: &str| -> Result<Operator> {
        Ok(Operator::basis_projector(space.clone(), "photon", "Lu")?.named(name))
    };
    r.record_observables(&t1, None, &[&lu("Lu_t1")?])?;
    r.record_observables(&fin, None, &[&lu("Lu_final")?])?;
    Ok(())
}

pub fn run_four_mirror(trials: usize, seed: u64) -> Result<ScenarioResult> {
    run_four_mirror_with(&FourMirrorConfig::new(trials, seed))
}

pub fn run_four_mirror_with(cfg: &FourMirrorConfig) -> Result<ScenarioResult> {
    let stats = four_mirror_stats(cfg)?;
    let mut r = ScenarioResult::new("four_mirror");
    r.describe_epoch(Epoch::T0, "photon on the left arms");
    r.describe_epoch(Epoch::T1, "Lu detector silent");
    r.describe_epoch(Epoch::T2, "half trip, Ru detector silent");
    r.describe_epoch(Epoch::Final, "half trip back to the left arms");
    exact(&mut r)?;
    let ts = &mut r.trial_stats;
    ts.insert("trials".into(), stats.trials as f64);
    ts.insert(
        "first_probe_silent_fraction".into(),
        stats.first_probe_silent_fraction,
    );
    ts.insert("lu_only_round_trips".into(), cfg.lu_only_round_trips as f64);
    ts.insert("lu_only_clicks".into(), stats.lu_only_clicks as f64);
    ts.insert(
        "second_probe_silent_fraction".into(),
        stats.second_probe_silent_fraction,
    );
    ts.insert("double_silence_trials".into(), stats.double_silence_trials as f64);
    let width = cfg.double_silence_round_trips.to_string().len();
    for (i, f) in stats.lu_click_fraction.iter().enumerate() {
        ts.insert(format!("lu_click_fraction.k{:0width$}", i + 1), *f);
    }
    ts.insert(
        "lu_click_fraction_unconditional".into(),
        stats.lu_click_fraction_unconditional,
    );
    ts.insert("lu_click_per_probe".into(), stats.lu_click_per_probe);
    Ok(r)
}
