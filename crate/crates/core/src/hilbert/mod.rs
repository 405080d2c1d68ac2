//! Finite-dimensional Hilbert spaces built from labeled factors.
//!
//! A [`Space`] is an ordered list of [`Factor`]s (paths, detectors, pointer
//! bins, ...). Basis states of the product are addressed in row-major order:
//! the first factor is the most significant digit.

mod gates;
mod operator;
mod schmidt;

pub use gates::{beam_splitter, mode_transfer, phase_shift, recombiner, source_splitter, tuned_splitter};
pub use operator::Operator;
pub use schmidt::{schmidt_decompose, schmidt_rank, Bipartition, SchmidtDecomposition};

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default singular-value cutoff for Schmidt ranks.
pub const SCHMIDT_TOL: f64 = 1e-8;

/// Tolerance for the unit-norm invariant of a normalized ket.
pub const NORM_TOL: f64 = 1e-10;

/// Largest dense space the simulator will allocate.
pub const MAX_DIMENSION: usize = 1 << 16;

/// One tensor factor: a name and its ordered basis labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Factor {
    name: String,
    labels: Vec<String>,
}

impl Factor {
    pub fn new<S: Into<String>, L: AsRef<str>>(name: S, labels: &[L]) -> Result<Self> {
        let name = name.into();
        if labels.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "factor `{name}` has no basis labels"
            )));
        }
        let labels: Vec<String> = labels.iter().map(|l| l.as_ref().to_owned()).collect();
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::Duplicate {
                    kind: "label",
                    name: format!("{name}.{l}"),
                });
            }
        }
        Ok(Factor { name, labels })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel {
                factor: self.name.clone(),
                label: label.to_owned(),
            })
    }
}

/// Ordered product of factors. Cheap to clone.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Space {
    factors: Arc<[Factor]>,
}

impl Space {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidArgument("space has no factors".into()));
        }
        let mut dim: usize = 1;
        for (i, f) in factors.iter().enumerate() {
            if factors[..i].iter().any(|g| g.name == f.name) {
                return Err(Error::Duplicate {
                    kind: "factor",
                    name: f.name.clone(),
                });
            }
            dim = dim
                .checked_mul(f.dim())
                .filter(|d| *d <= MAX_DIMENSION)
                .ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "space dimension exceeds the dense limit of {MAX_DIMENSION}"
                    ))
                })?;
        }
        Ok(Space {
            factors: factors.into(),
        })
    }

    /// Single-factor space.
    pub fn single<L: AsRef<str>>(name: &str, labels: &[L]) -> Result<Self> {
        Space::new(vec![Factor::new(name, labels)?])
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(Factor::dim).product()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(Factor::dim).collect()
    }

    pub fn factor_index(&self, name: &str) -> Result<usize> {
        self.factors
            .iter()
            .position(|f| f.name == name)
            .ok_or_else(|| Error::UnknownFactor(name.to_owned()))
    }

    pub fn factor(&self, name: &str) -> Result<&Factor> {
        Ok(&self.factors[self.factor_index(name)?])
    }

    /// Product space `self ⊗ other`; factor names must be disjoint.
    pub fn concat(&self, other: &Space) -> Result<Space> {
        let mut factors = self.factors.to_vec();
        factors.extend(other.factors.iter().cloned());
        Space::new(factors)
    }

    /// Row-major strides of each factor.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.factors.len()];
        for i in (0..self.factors.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.factors[i + 1].dim();
        }
        strides
    }

    /// Per-factor digits of a flat basis index.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut digits = vec![0; self.factors.len()];
        for (i, f) in self.factors.iter().enumerate().rev() {
            digits[i] = index % f.dim();
            index /= f.dim();
        }
        digits
    }

    pub fn index_of_digits(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(self.factors.iter())
            .fold(0, |acc, (d, f)| acc * f.dim() + d)
    }

    /// Flat index of the basis state given one label per factor.
    pub fn index_of_labels<L: AsRef<str>>(&self, labels: &[L]) -> Result<usize> {
        if labels.len() != self.factors.len() {
            return Err(Error::DimensionMismatch {
                expected: self.factors.len(),
                found: labels.len(),
            });
        }
        let digits = labels
            .iter()
            .zip(self.factors.iter())
            .map(|(l, f)| f.index_of(l.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.index_of_digits(&digits))
    }

    /// Comma-joined labels of a basis state, e.g. `1',2'',READY,READY`.
    pub fn basis_label(&self, index: usize) -> String {
        self.digits(index)
            .iter()
            .zip(self.factors.iter())
            .map(|(d, f)| f.labels[*d].as_str())
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|x| format!("{}[{}]", x.name, x.dim()))
            .collect();
        write!(f, "{}", parts.join(" ⊗ "))
    }
}

/// Dense amplitude vector over a labeled product space.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    space: Space,
    amps: DVector<Complex64>,
}

impl Ket {
    /// Wraps raw amplitudes. No normalization is applied or checked.
    pub fn from_amplitudes(space: Space, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: amps.len(),
            });
        }
        Ok(Ket {
            space,
            amps: DVector::from_vec(amps),
        })
    }

    pub(crate) fn from_vector(space: Space, amps: DVector<Complex64>) -> Self {
        debug_assert_eq!(space.dim(), amps.len());
        Ket { space, amps }
    }

    pub fn zero(space: Space) -> Self {
        let d = space.dim();
        Ket {
            space,
            amps: DVector::zeros(d),
        }
    }

    /// Basis ket with one label per factor.
    pub fn basis<L: AsRef<str>>(space: Space, labels: &[L]) -> Result<Self> {
        let idx = space.index_of_labels(labels)?;
        let mut k = Ket::zero(space);
        k.amps[idx] = Complex64::new(1.0, 0.0);
        Ok(k)
    }

    /// Superposition `Σ c |labels⟩`; repeated label tuples accumulate.
    pub fn from_terms<L: AsRef<str>>(space: Space, terms: &[(&[L], Complex64)]) -> Result<Self> {
        let mut k = Ket::zero(space);
        for (labels, c) in terms {
            let idx = k.space.index_of_labels(labels)?;
            k.amps[idx] += *c;
        }
        Ok(k)
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amps
    }

    pub fn amplitude<L: AsRef<str>>(&self, labels: &[L]) -> Result<Complex64> {
        Ok(self.amps[self.space.index_of_labels(labels)?])
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= NORM_TOL
    }

    pub(crate) fn require_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::NotNormalized { norm: self.norm() })
        }
    }

    /// Copy rescaled to unit norm.
    pub fn normalized(&self) -> Result<Ket> {
        let n = self.norm();
        if n <= f64::EPSILON {
            return Err(Error::ZeroProbabilityBranch { probability: n * n });
        }
        Ok(self.scaled(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, c: Complex64) -> Ket {
        Ket {
            space: self.space.clone(),
            amps: &self.amps * c,
        }
    }

    /// `⟨self|ket⟩`, conjugate-linear in `self`.
    pub fn inner(&self, ket: &Ket) -> Result<Complex64> {
        self.require_same_space(ket)?;
        Ok(self.amps.dotc(&ket.amps))
    }

    /// Kronecker product `self ⊗ other` over the concatenated space.
    pub fn tensor(&self, other: &Ket) -> Result<Ket> {
        let space = self.space.concat(&other.space)?;
        let amps = self.amps.kronecker(&other.amps);
        Ok(Ket { space, amps })
    }

    /// Reduced density matrix of one factor (partial trace over the rest).
    pub fn reduced_density(&self, factor: usize) -> Result<DMatrix<Complex64>> {
        let n = self.space.factors().len();
        if factor >= n {
            return Err(Error::InvalidArgument(format!(
                "factor index {factor} out of range"
            )));
        }
        let d = self.space.factors()[factor].dim();
        let stride = self.space.strides()[factor];
        let mut rho = DMatrix::zeros(d, d);
        for (idx, a) in self.amps.iter().enumerate() {
            if *a == Complex64::new(0.0, 0.0) {
                continue;
            }
            let digit = (idx / stride) % d;
            let base = idx - digit * stride;
            for other in 0..d {
                let b = self.amps[base + other * stride];
                rho[(digit, other)] += a * b.conj();
            }
        }
        Ok(rho)
    }

    /// Elementwise comparison over identical spaces.
    pub fn approx_eq(&self, other: &Ket, tol: f64) -> bool {
        self.space == other.space && self.max_abs_diff(other) <= tol
    }

    pub fn max_abs_diff(&self, other: &Ket) -> f64 {
        if self.amps.len() != other.amps.len() {
            return f64::INFINITY;
        }
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Nonzero amplitudes (above `tol`) with their basis labels.
    pub fn terms(&self, tol: f64) -> Vec<(String, Complex64)> {
        self.amps
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > tol)
            .map(|(i, a)| (self.space.basis_label(i), *a))
            .collect()
    }

    pub(crate) fn require_same_space(&self, other: &Ket) -> Result<()> {
        if self.amps.len() != other.amps.len() {
            return Err(Error::DimensionMismatch {
                expected: self.amps.len(),
                found: other.amps.len(),
            });
        }
        if self.space != other.space {
            return Err(Error::SpaceMismatch(format!("{} vs {}", self.space, other.space)));
        }
        Ok(())
    }
}

impl fmt::Display for Ket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.terms(1e-12);
        if terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = terms
            .iter()
            .map(|(l, a)| format!("({:.6}{:+.6}i)|{}⟩", a.re, a.im, l))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}
