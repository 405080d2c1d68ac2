//! Two-mode optical elements.
//!
//! Every splitter is the symmetric 50/50 unitary `(1/√2)[[1, i], [i, 1]]`
//! dressed with input/output phase plates. Scenario builders pick the
//! plates so that their arm states carry real, equal amplitudes.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Symmetric 50/50 beam splitter `(1/√2)[[1, i], [i, 1]]`.
pub fn beam_splitter() -> DMatrix<Complex64> {
    let r = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let t = Complex64::new(0.0, FRAC_1_SQRT_2);
    DMatrix::from_row_slice(2, 2, &[r, t, t, r])
}

/// `diag(1, e^{iφ})`.
pub fn phase_shift(phi: f64) -> DMatrix<Complex64> {
    let mut m = DMatrix::identity(2, 2);
    m[(1, 1)] = Complex64::from_polar(1.0, phi);
    m
}

/// `diag(1, e^{iφ_out}) · BS · diag(1, e^{iφ_in})`.
pub fn tuned_splitter(phase_in: f64, phase_out: f64) -> DMatrix<Complex64> {
    phase_shift(phase_out) * beam_splitter() * phase_shift(phase_in)
}

/// Splitter sending the source port (mode 0) to `(|0⟩ + |1⟩)/√2`.
pub fn source_splitter() -> DMatrix<Complex64> {
    tuned_splitter(0.0, -FRAC_PI_2)
}

/// Recombiner sending `(|0⟩ + |1⟩)/√2` to mode 0 and `(|0⟩ − |1⟩)/√2` to mode 1.
pub fn recombiner() -> DMatrix<Complex64> {
    tuned_splitter(-FRAC_PI_2, -FRAC_PI_2)
}

/// Embeds a 2×2 unitary into a factor of dimension `dim`.
///
/// With `from == to` the modes are mixed in place. Otherwise `u` carries
/// modes `from` onto modes `to` and `u†` carries them back, which keeps the
/// whole map unitary (the return leg of a retro-reflecting arm).
pub fn mode_transfer(
    dim: usize,
    from: [usize; 2],
    to: [usize; 2],
    u: &DMatrix<Complex64>,
) -> Result<DMatrix<Complex64>> {
    if u.nrows() != 2 || u.ncols() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: u.nrows().max(u.ncols()),
        });
    }
    let mut modes = from.to_vec();
    if from != to {
        modes.extend_from_slice(&to);
    }
    for (i, m) in modes.iter().enumerate() {
        if *m >= dim {
            return Err(Error::InvalidArgument(format!(
                "mode {m} out of range for a {dim}-mode factor"
            )));
        }
        if modes[..i].contains(m) {
            return Err(Error::InvalidArgument(format!("mode {m} used twice")));
        }
    }
    let mut m = DMatrix::identity(dim, dim);
    if from == to {
        for r in 0..2 {
            for c in 0..2 {
                m[(from[r], from[c])] = u[(r, c)];
            }
        }
        return Ok(m);
    }
    for &k in from.iter().chain(to.iter()) {
        m[(k, k)] = Complex64::new(0.0, 0.0);
    }
    for r in 0..2 {
        for c in 0..2 {
            m[(to[r], from[c])] = u[(r, c)];
            m[(from[c], to[r])] = u[(r, c)].conj();
        }
    }
    Ok(m)
}
