//! Von Neumann measurement with a discretized Gaussian pointer.
//!
//! A system observable `A = Σ λ P_λ` is coupled impulsively to a pointer on
//! a uniform 1D grid: each eigenbranch `P_λ|ψ⟩` drags the pointer by `g·λ`.
//! Small `g` relative to the pointer width gives weak measurements whose
//! post-selected mean shift approaches `g·Re⟨A⟩_w`; large `g` separates the
//! branches and reproduces a projective measurement. Repeating weak
//! couplings with sampled readouts drives the system to an eigenstate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hilbert::{Factor, Ket, Operator, Space};

pub const DEFAULT_BINS: usize = 401;
pub const DEFAULT_SPACING: f64 = 0.05;
pub const DEFAULT_SIGMA: f64 = 1.0;

/// Largest `‖A − A†‖_max` accepted for an observable.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Eigenvalues closer than this share one spectral projector.
const EIGEN_GROUP_TOL: f64 = 1e-9;

/// Fractional bin offsets closer than this to an integer are snapped.
const SNAP_TOL: f64 = 1e-9;

pub const POINTER_FACTOR: &str = "pointer";

/// Uniform grid centered on zero with an odd number of bins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointerGrid {
    bins: usize,
    spacing: f64,
}

impl PointerGrid {
    pub fn new(bins: usize, spacing: f64) -> Result<Self> {
        if bins.is_multiple_of(2) || bins < 3 {
            return Err(Error::InvalidArgument(format!(
                "pointer grid needs an odd number of bins >= 3, got {bins}"
            )));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "pointer spacing must be positive, got {spacing}"
            )));
        }
        Ok(PointerGrid { bins, spacing })
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn center(&self) -> usize {
        self.bins / 2
    }

    pub fn position(&self, i: usize) -> f64 {
        (i as f64 - self.center() as f64) * self.spacing
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.bins).map(|i| self.position(i)).collect()
    }

    pub fn half_extent(&self) -> f64 {
        self.center() as f64 * self.spacing
    }

    fn factor(&self) -> Factor {
        let labels: Vec<String> = (0..self.bins).map(|i| format!("x{i}")).collect();
        Factor::new(POINTER_FACTOR, &labels).expect("generated labels are unique")
    }
}

/// Pointer wavefunction sampled on a grid, normalized as `Σ|ψ|²·Δx = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointerWavefunction {
    grid: PointerGrid,
    sigma: f64,
    amplitudes: Vec<Complex64>,
}

impl PointerWavefunction {
    /// Real Gaussian `ψ(x) ∝ exp(−x²/4σ²)`, so `|ψ|²` has standard deviation σ.
    pub fn gaussian(grid: PointerGrid, sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "pointer width must be positive, got {sigma}"
            )));
        }
        let raw: Vec<f64> = grid
            .positions()
            .iter()
            .map(|x| (-x * x / (4.0 * sigma * sigma)).exp())
            .collect();
        let norm = (raw.iter().map(|a| a * a).sum::<f64>() * grid.spacing).sqrt();
        let amplitudes = raw.iter().map(|a| Complex64::new(a / norm, 0.0)).collect();
        Ok(PointerWavefunction {
            grid,
            sigma,
            amplitudes,
        })
    }

    /// 401 bins, Δx = 0.05, σ = 1.
    pub fn default_weak() -> Self {
        let grid = PointerGrid::new(DEFAULT_BINS, DEFAULT_SPACING).expect("valid default grid");
        PointerWavefunction::gaussian(grid, DEFAULT_SIGMA).expect("valid default width")
    }

    pub fn grid(&self) -> PointerGrid {
        self.grid
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// `Σ|ψ|²·Δx`.
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.spacing
    }

    pub fn mean(&self) -> f64 {
        mean_of(&self.grid, self.amplitudes.iter().map(|a| a.norm_sqr()))
    }

    /// `ψ(x − shift)` sampled on the grid, rescaled to the original norm.
    /// The profile is the analytic Gaussian, so fractional-bin shifts carry
    /// no interpolation error.
    pub fn translated(&self, shift: f64) -> Result<Vec<Complex64>> {
        let half = self.grid.half_extent();
        if !shift.is_finite() || shift.abs() > half {
            return Err(Error::ShiftOutOfGrid {
                shift,
                half_extent: half,
            });
        }
        let mut offset = shift / self.grid.spacing;
        if (offset - offset.round()).abs() < SNAP_TOL {
            offset = offset.round();
        }
        let s = offset * self.grid.spacing;
        let w = 4.0 * self.sigma * self.sigma;
        let raw: Vec<f64> = self
            .grid
            .positions()
            .iter()
            .map(|x| (-(x - s) * (x - s) / w).exp())
            .collect();
        let got = raw.iter().map(|a| a * a).sum::<f64>() * self.grid.spacing;
        if got <= 0.0 {
            return Err(Error::ShiftOutOfGrid {
                shift,
                half_extent: half,
            });
        }
        let rescale = (self.norm_sqr() / got).sqrt();
        Ok(raw
            .into_iter()
            .map(|a| Complex64::new(a * rescale, 0.0))
            .collect())
    }
}

fn mean_of(grid: &PointerGrid, weights: impl Iterator<Item = f64>) -> f64 {
    let (mut total, mut moment) = (0.0, 0.0);
    for (i, w) in weights.enumerate() {
        total += w;
        moment += w * grid.position(i);
    }
    moment / total
}

/// Dimensionless pointer shift per unit eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct CouplingStrength(f64);

impl CouplingStrength {
    pub fn new(g: f64) -> Result<Self> {
        if !(g.is_finite() && g >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "coupling strength must be finite and >= 0, got {g}"
            )));
        }
        Ok(CouplingStrength(g))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// Eigenvalues of a Hermitian observable and their spectral projectors.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub projectors: Vec<Operator>,
}

impl Spectrum {
    pub fn of(observable: &Operator) -> Result<Self> {
        observable.require_hermitian(HERMITIAN_TOL)?;
        let space = observable.space().clone();
        let d = observable.dim();
        let m = observable.matrix();

        let mut pairs: Vec<(f64, DVector<Complex64>)> = if observable.is_diagonal() {
            (0..d)
                .map(|i| {
                    let mut v = DVector::zeros(d);
                    v[i] = Complex64::new(1.0, 0.0);
                    (m[(i, i)].re, v)
                })
                .collect()
        } else {
            let hermitian = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
            let eig = hermitian.symmetric_eigen();
            (0..d)
                .map(|i| (eig.eigenvalues[i], eig.eigenvectors.column(i).into_owned()))
                .collect()
        };
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut eigenvalues: Vec<f64> = Vec::new();
        let mut groups: Vec<DMatrix<Complex64>> = Vec::new();
        let mut members: Vec<usize> = Vec::new();
        for (lambda, v) in pairs {
            let outer = &v * v.adjoint();
            match eigenvalues.last() {
                Some(last) if (lambda - last).abs() <= EIGEN_GROUP_TOL => {
                    let k = groups.len() - 1;
                    groups[k] += outer;
                    // running mean keeps grouped eigenvalues symmetric
                    members[k] += 1;
                    let n = members[k] as f64;
                    eigenvalues[k] += (lambda - eigenvalues[k]) / n;
                }
                _ => {
                    eigenvalues.push(lambda);
                    groups.push(outer);
                    members.push(1);
                }
            }
        }
        let projectors = groups
            .into_iter()
            .map(|g| Operator::from_matrix(space.clone(), g))
            .collect::<Result<Vec<_>>>()?;
        Ok(Spectrum {
            eigenvalues,
            projectors,
        })
    }

    /// `‖P_λ|ψ⟩‖²` for each eigenvalue.
    pub fn branch_weights(&self, k: &Ket) -> Result<Vec<f64>> {
        self.projectors
            .iter()
            .map(|p| Ok(p.apply(k)?.norm().powi(2)))
            .collect()
    }

    /// Index of the eigenvalue carrying the largest weight.
    pub fn dominant_branch(&self, k: &Ket) -> Result<usize> {
        let w = self.branch_weights(k)?;
        Ok(w.iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0))
    }

    fn max_abs_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max)
    }

    fn shifted_pointers(
        &self,
        ptr: &PointerWavefunction,
        g: CouplingStrength,
    ) -> Result<Vec<Vec<Complex64>>> {
        let half = ptr.grid().half_extent();
        let shift = g.value() * self.max_abs_eigenvalue();
        if shift > half {
            return Err(Error::ShiftOutOfGrid {
                shift,
                half_extent: half,
            });
        }
        self.eigenvalues
            .iter()
            .map(|l| ptr.translated(g.value() * l))
            .collect()
    }
}

/// System ⊗ pointer state produced by [`couple`].
#[derive(Debug, Clone)]
pub struct CoupledState {
    joint: Ket,
    system_space: Space,
    grid: PointerGrid,
}

impl CoupledState {
    /// Joint ket over `system ⊗ pointer`, unit ℓ² norm.
    pub fn joint(&self) -> &Ket {
        &self.joint
    }

    pub fn system_space(&self) -> &Space {
        &self.system_space
    }

    pub fn grid(&self) -> PointerGrid {
        self.grid
    }

    /// Amplitudes as a `system_dim × bins` matrix.
    fn as_matrix(&self) -> DMatrix<Complex64> {
        let s = self.system_space.dim();
        let n = self.grid.bins();
        // amplitudes are row-major (system index major), nalgebra is column-major
        DMatrix::from_row_slice(s, n, self.joint.amplitudes().as_slice())
    }

    /// Pointer position distribution after applying `post_projector` to the
    /// system, unnormalized: its sum is the post-selection probability.
    pub fn conditioned_distribution(&self, post_projector: &Operator) -> Result<Vec<f64>> {
        if post_projector.space() != &self.system_space {
            return Err(Error::SpaceMismatch(format!(
                "{} vs {}",
                post_projector.space(),
                self.system_space
            )));
        }
        let m = post_projector.matrix() * self.as_matrix();
        Ok((0..self.grid.bins())
            .map(|i| m.column(i).iter().map(|a| a.norm_sqr()).sum())
            .collect())
    }
}

/// Impulsive coupling `Σ_λ P_λ|ψ⟩ ⊗ T_{gλ}|ptr⟩`.
pub fn couple(
    system: &Ket,
    observable: &Operator,
    ptr: &PointerWavefunction,
    g: CouplingStrength,
) -> Result<CoupledState> {
    if observable.space() != system.space() {
        return Err(Error::SpaceMismatch(format!(
            "{} vs {}",
            observable.space(),
            system.space()
        )));
    }
    let spectrum = Spectrum::of(observable)?;
    let shifted = spectrum.shifted_pointers(ptr, g)?;
    let grid = ptr.grid();
    let space = system.space().concat(&Space::new(vec![grid.factor()])?)?;
    let sqrt_dx = grid.spacing().sqrt();
    let n = grid.bins();
    let mut amps = vec![Complex64::new(0.0, 0.0); system.dim() * n];
    for (p, phi) in spectrum.projectors.iter().zip(&shifted) {
        let branch = p.apply(system)?;
        for (s, b) in branch.amplitudes().iter().enumerate() {
            if *b == Complex64::new(0.0, 0.0) {
                continue;
            }
            let row = &mut amps[s * n..(s + 1) * n];
            for (slot, f) in row.iter_mut().zip(phi) {
                *slot += b * f * sqrt_dx;
            }
        }
    }
    Ok(CoupledState {
        joint: Ket::from_amplitudes(space, amps)?,
        system_space: system.space().clone(),
        grid,
    })
}

/// Mean pointer position conditioned on `post_projector` acting on the system.
pub fn pointer_mean(joint: &CoupledState, post_projector: &Operator) -> Result<f64> {
    let dist = joint.conditioned_distribution(post_projector)?;
    let probability: f64 = dist.iter().sum();
    if probability <= 1e-12 {
        return Err(Error::ZeroProbabilityBranch { probability });
    }
    Ok(mean_of(&joint.grid, dist.into_iter()))
}

/// Projective measurement of `observable` with a seeded RNG.
pub fn strong_measure(system: &Ket, observable: &Operator, rng_seed: u64) -> Result<(f64, Ket)> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    strong_measure_with(system, observable, &mut rng)
}

pub fn strong_measure_with<R: Rng + ?Sized>(
    system: &Ket,
    observable: &Operator,
    rng: &mut R,
) -> Result<(f64, Ket)> {
    let spectrum = Spectrum::of(observable)?;
    let weights = spectrum.branch_weights(system)?;
    let k = sample_index(&weights, rng).ok_or(Error::ZeroProbabilityBranch { probability: 0.0 })?;
    let collapsed = spectrum.projectors[k].apply(system)?.normalized()?;
    Ok((spectrum.eigenvalues[k], collapsed))
}

/// Inverse-CDF sampling over unnormalized weights.
fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return None;
    }
    let u = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last = None;
    for (i, w) in weights.iter().enumerate() {
        if *w <= 0.0 {
            continue;
        }
        acc += w;
        last = Some(i);
        if u < acc {
            return Some(i);
        }
    }
    last
}

/// Pointer readouts of a weak-measurement sequence and the final system state.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub readouts: Vec<f64>,
    pub final_state: Ket,
}

/// Repeated weak measurement with the default pointer.
pub fn weak_sequence(
    system: &Ket,
    observable: &Operator,
    g: CouplingStrength,
    steps: usize,
    rng_seed: u64,
) -> Result<Trajectory> {
    WeakMeter::new(observable, &PointerWavefunction::default_weak(), g)?.run(system, steps, rng_seed)
}

/// Precomputed Kraus data for repeated couplings of one observable.
///
/// One step couples a fresh pointer, samples a readout bin from the joint
/// distribution, and projects the pointer onto it: the system branch `λ` is
/// rescaled by `T_{gλ}ψ(x)` at the sampled `x`.
#[derive(Debug, Clone)]
pub struct WeakMeter {
    spectrum: Spectrum,
    shifted: Vec<Vec<Complex64>>,
    grid: PointerGrid,
}

impl WeakMeter {
    pub fn new(observable: &Operator, ptr: &PointerWavefunction, g: CouplingStrength) -> Result<Self> {
        let spectrum = Spectrum::of(observable)?;
        let shifted = spectrum.shifted_pointers(ptr, g)?;
        Ok(WeakMeter {
            spectrum,
            shifted,
            grid: ptr.grid(),
        })
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn run(&self, system: &Ket, steps: usize, rng_seed: u64) -> Result<Trajectory> {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        self.run_with(system, steps, &mut rng)
    }

    pub fn run_with<R: Rng + ?Sized>(&self, system: &Ket, steps: usize, rng: &mut R) -> Result<Trajectory> {
        if steps == 0 {
            return Err(Error::InvalidArgument(
                "weak sequence needs at least one step".into(),
            ));
        }
        system.require_normalized()?;
        // branch vectors P_λ|ψ⟩; each step only rescales them
        let branches: Vec<Ket> = self
            .spectrum
            .projectors
            .iter()
            .map(|p| p.apply(system))
            .collect::<Result<_>>()?;
        let mut coeff: Vec<Complex64> = vec![Complex64::new(1.0, 0.0); branches.len()];
        let mut weight: Vec<f64> = branches.iter().map(|b| b.norm().powi(2)).collect();
        let mut density = vec![0.0; self.grid.bins()];
        let mut readouts = Vec::with_capacity(steps);
        for _ in 0..steps {
            density.iter_mut().for_each(|d| *d = 0.0);
            for (w, phi) in weight.iter().zip(&self.shifted) {
                if *w == 0.0 {
                    continue;
                }
                for (d, f) in density.iter_mut().zip(phi) {
                    *d += w * f.norm_sqr();
                }
            }
            let bin = sample_index(&density, rng).ok_or(Error::ZeroProbabilityBranch { probability: 0.0 })?;
            readouts.push(self.grid.position(bin));
            for ((c, w), phi) in coeff.iter_mut().zip(weight.iter_mut()).zip(&self.shifted) {
                *c *= phi[bin];
                *w *= phi[bin].norm_sqr();
            }
            let total: f64 = weight.iter().sum();
            if total.is_nan() || total <= 0.0 {
                return Err(Error::ZeroProbabilityBranch { probability: total });
            }
            let scale = total.sqrt();
            coeff.iter_mut().for_each(|c| *c /= scale);
            weight.iter_mut().for_each(|w| *w /= total);
        }
        let mut amps = DVector::zeros(system.dim());
        for (b, c) in branches.iter().zip(&coeff) {
            amps += b.amplitudes() * *c;
        }
        let final_state =
            Ket::from_amplitudes(system.space().clone(), amps.iter().copied().collect())?.normalized()?;
        Ok(Trajectory {
            readouts,
            final_state,
        })
    }
}

/// Conditioned mean of each of several pointers, pointer `k` coupled with
/// strength `g` to the `k`-th of a set of orthogonal projectors.
///
/// `branch_amplitudes[k] = ⟨ψf|P_k|ψi⟩`. After post-selection the pointers
/// are left in `Σ_k a_k Φ_k`, where `Φ_k` has pointer `k` shifted by `g` and
/// the others untouched, so every mean follows from four grid overlaps.
pub fn multi_pointer_means(
    branch_amplitudes: &[Complex64],
    ptr: &PointerWavefunction,
    g: CouplingStrength,
) -> Result<Vec<f64>> {
    let grid = ptr.grid();
    let dx = grid.spacing();
    let phi = ptr.amplitudes();
    let psi = ptr.translated(g.value())?;
    let x = grid.positions();
    let mut eps = Complex64::new(0.0, 0.0);
    let mut cross = Complex64::new(0.0, 0.0);
    let (mut m0, mut m1) = (0.0, 0.0);
    for i in 0..grid.bins() {
        eps += phi[i].conj() * psi[i] * dx;
        cross += psi[i].conj() * phi[i] * x[i] * dx;
        m0 += phi[i].norm_sqr() * x[i] * dx;
        m1 += psi[i].norm_sqr() * x[i] * dx;
    }
    let n = branch_amplitudes.len();
    let a = branch_amplitudes;
    let mut norm = Complex64::new(0.0, 0.0);
    for k in 0..n {
        for l in 0..n {
            let o = if k == l {
                Complex64::new(1.0, 0.0)
            } else {
                eps.conj() * eps
            };
            norm += a[k].conj() * a[l] * o;
        }
    }
    if norm.re <= 1e-12 {
        return Err(Error::ZeroProbabilityBranch { probability: norm.re });
    }
    Ok((0..n)
        .map(|j| {
            let mut num = Complex64::new(0.0, 0.0);
            for k in 0..n {
                for l in 0..n {
                    let term = match (k == l, j == k, j == l) {
                        (true, true, _) => Complex64::new(m1, 0.0),
                        (true, false, _) => Complex64::new(m0, 0.0),
                        (false, true, _) => cross * eps,
                        (false, _, true) => eps.conj() * cross.conj(),
                        (false, false, false) => eps.conj() * eps * m0,
                    };
                    num += a[k].conj() * a[l] * term;
                }
            }
            (num / norm).re
        })
        .collect())
}


#[cfg(test)]
mod multi_pointer_tests {
    use super::*;

    /// Explicit product of three pointer grids, post-selected amplitudes
    /// summed term by term.
    fn brute_force(a: &[Complex64; 3], ptr: &PointerWavefunction, g: f64) -> [f64; 3] {
        let grid = ptr.grid();
        let n = grid.bins();
        let phi = ptr.amplitudes();
        let psi = ptr.translated(g).unwrap();
        let mut joint = vec![Complex64::new(0.0, 0.0); n * n * n];
        for (k, ak) in a.iter().enumerate() {
            for i0 in 0..n {
                for i1 in 0..n {
                    for i2 in 0..n {
                        let idx = [i0, i1, i2];
                        let mut amp = *ak;
                        for (slot, &i) in idx.iter().enumerate() {
                            amp *= if slot == k { psi[i] } else { phi[i] };
                        }
                        joint[(i0 * n + i1) * n + i2] += amp;
                    }
                }
            }
        }
        let mut out = [0.0; 3];
        let total: f64 = joint.iter().map(|c| c.norm_sqr()).sum();
        for (slot, o) in out.iter_mut().enumerate() {
            let mut m = 0.0;
            for (flat, c) in joint.iter().enumerate() {
                let i = [flat / (n * n), (flat / n) % n, flat % n][slot];
                m += c.norm_sqr() * grid.position(i);
            }
            *o = m / total;
        }
        out
    }

    #[test]
    fn closed_form_matches_the_explicit_product() {
        let grid = PointerGrid::new(31, 0.3).unwrap();
        let ptr = PointerWavefunction::gaussian(grid, 1.0).unwrap();
        let a = [
            Complex64::new(1.0 / 3.0, 0.0),
            Complex64::new(1.0 / 3.0, 0.1),
            Complex64::new(-1.0 / 3.0, 0.0),
        ];
        for g in [0.0, 0.17, 0.9, 2.0] {
            let got = multi_pointer_means(&a, &ptr, CouplingStrength::new(g).unwrap()).unwrap();
            let want = brute_force(&a, &ptr, g);
            for j in 0..3 {
                assert!(
                    (got[j] - want[j]).abs() < 1e-12,
                    "g={g} j={j}: {} vs {}",
                    got[j],
                    want[j]
                );
            }
        }
    }

    #[test]
    fn three_box_pattern_in_the_weak_limit() {
        let ptr = PointerWavefunction::default_weak();
        let third = Complex64::new(1.0 / 3.0, 0.0);
        let a = [third, third, -third];
        let g = 0.05;
        let m = multi_pointer_means(&a, &ptr, CouplingStrength::new(g).unwrap()).unwrap();
        for (got, w) in m.iter().zip([1.0, 1.0, -1.0]) {
            assert!((got / g - w).abs() < 0.05, "{got}");
        }
        let zero = multi_pointer_means(&a, &ptr, CouplingStrength::new(0.0).unwrap()).unwrap();
        assert!(zero.iter().all(|m| m.abs() < 1e-12));
        assert!(matches!(
            multi_pointer_means(
                &[Complex64::new(0.0, 0.0); 3],
                &ptr,
                CouplingStrength::new(g).unwrap()
            ),
            Err(Error::ZeroProbabilityBranch { .. })
        ));
    }
}
