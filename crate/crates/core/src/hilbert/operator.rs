use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{Ket, Space};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense operator acting on the kets of one [`Space`].
#[derive(Debug, Clone)]
pub struct Operator {
    space: Space,
    matrix: DMatrix<Complex64>,
    name: Option<String>,
}

impl Operator {
    pub fn from_matrix(space: Space, matrix: DMatrix<Complex64>) -> Result<Self> {
        let d = space.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: if matrix.nrows() != d {
                    matrix.nrows()
                } else {
                    matrix.ncols()
                },
            });
        }
        Ok(Operator {
            space,
            matrix,
            name: None,
        })
    }

    pub fn identity(space: Space) -> Self {
        let d = space.dim();
        Operator {
            space,
            matrix: DMatrix::identity(d, d),
            name: None,
        }
    }

    pub fn zero(space: Space) -> Self {
        let d = space.dim();
        Operator {
            space,
            matrix: DMatrix::zeros(d, d),
            name: None,
        }
    }

    /// `|ket⟩⟨bra|`.
    pub fn outer(ket: &Ket, bra: &Ket) -> Result<Self> {
        ket.require_same_space(bra)?;
        let matrix = ket.amplitudes() * bra.amplitudes().adjoint();
        Ok(Operator {
            space: ket.space().clone(),
            matrix,
            name: None,
        })
    }

    /// Projector onto the basis states whose factor `f` carries one of the
    /// listed labels, for every `(f, labels)` pair; identity on other factors.
    pub fn projector<F: AsRef<str>, L: AsRef<str>>(space: Space, selections: &[(F, &[L])]) -> Result<Self> {
        let mut allowed: Vec<Option<Vec<bool>>> = vec![None; space.factors().len()];
        for (factor, labels) in selections {
            let fi = space.factor_index(factor.as_ref())?;
            let f = &space.factors()[fi];
            let mut mask = vec![false; f.dim()];
            for l in labels.iter() {
                mask[f.index_of(l.as_ref())?] = true;
            }
            // repeated selections on one factor intersect
            allowed[fi] = Some(match allowed[fi].take() {
                Some(prev) => prev.iter().zip(&mask).map(|(a, b)| *a && *b).collect(),
                None => mask,
            });
        }
        let d = space.dim();
        let mut matrix = DMatrix::zeros(d, d);
        for i in 0..d {
            let keep = space
                .digits(i)
                .iter()
                .zip(&allowed)
                .all(|(digit, mask)| mask.as_ref().is_none_or(|m| m[*digit]));
            if keep {
                matrix[(i, i)] = ONE;
            }
        }
        Ok(Operator {
            space,
            matrix,
            name: None,
        })
    }

    /// Projector onto a single label of one factor.
    pub fn basis_projector(space: Space, factor: &str, label: &str) -> Result<Self> {
        Operator::projector(space, &[(factor, &[label][..])])
    }

    /// Embeds `local` acting on the product of `targets` (in the listed order)
    /// and the identity elsewhere.
    pub fn on_factors<F: AsRef<str>>(
        space: Space,
        targets: &[F],
        local: &DMatrix<Complex64>,
    ) -> Result<Self> {
        let idx = targets
            .iter()
            .map(|t| space.factor_index(t.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        for (i, t) in idx.iter().enumerate() {
            if idx[..i].contains(t) {
                return Err(Error::Duplicate {
                    kind: "target factor",
                    name: space.factors()[*t].name().to_owned(),
                });
            }
        }
        let dims = space.dims();
        let local_dim: usize = idx.iter().map(|&i| dims[i]).product();
        if local.nrows() != local_dim || local.ncols() != local_dim {
            return Err(Error::DimensionMismatch {
                expected: local_dim,
                found: local.nrows().max(local.ncols()),
            });
        }
        let d = space.dim();
        let mut matrix = DMatrix::zeros(d, d);
        for col in 0..d {
            let mut digits = space.digits(col);
            let local_col = idx.iter().fold(0, |acc, &i| acc * dims[i] + digits[i]);
            for local_row in 0..local_dim {
                let v = local[(local_row, local_col)];
                if v == ZERO {
                    continue;
                }
                let mut rem = local_row;
                for &i in idx.iter().rev() {
                    digits[i] = rem % dims[i];
                    rem /= dims[i];
                }
                matrix[(space.index_of_digits(&digits), col)] += v;
            }
        }
        Ok(Operator {
            space,
            matrix,
            name: None,
        })
    }

    /// Permutation exchanging the basis states that match `left` with the
    /// corresponding states matching `right`. Both patterns must assign the
    /// same set of factors; all other factors are spectators.
    pub fn swap_map<F: AsRef<str>, L: AsRef<str>>(
        space: Space,
        left: &[(F, L)],
        right: &[(F, L)],
    ) -> Result<Self> {
        let resolve = |pattern: &[(F, L)]| -> Result<Vec<(usize, usize)>> {
            let mut out = Vec::with_capacity(pattern.len());
            for (f, l) in pattern {
                let fi = space.factor_index(f.as_ref())?;
                if out.iter().any(|(g, _)| *g == fi) {
                    return Err(Error::Duplicate {
                        kind: "target factor",
                        name: f.as_ref().to_owned(),
                    });
                }
                out.push((fi, space.factors()[fi].index_of(l.as_ref())?));
            }
            out.sort_unstable();
            Ok(out)
        };
        let l = resolve(left)?;
        let r = resolve(right)?;
        if l.len() != r.len() || l.iter().zip(&r).any(|(a, b)| a.0 != b.0) {
            return Err(Error::InvalidArgument(
                "swap_map sides must assign the same factors".into(),
            ));
        }
        if l == r {
            return Err(Error::InvalidArgument("swap_map sides are identical".into()));
        }
        let d = space.dim();
        let mut matrix = DMatrix::zeros(d, d);
        for col in 0..d {
            let mut digits = space.digits(col);
            let matches = |p: &[(usize, usize)], dg: &[usize]| p.iter().all(|(f, v)| dg[*f] == *v);
            let target = if matches(&l, &digits) {
                r.iter().for_each(|(f, v)| digits[*f] = *v);
                space.index_of_digits(&digits)
            } else if matches(&r, &digits) {
                l.iter().for_each(|(f, v)| digits[*f] = *v);
                space.index_of_digits(&digits)
            } else {
                col
            };
            matrix[(target, col)] = ONE;
        }
        Ok(Operator {
            space,
            matrix,
            name: None,
        })
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn apply(&self, k: &Ket) -> Result<Ket> {
        self.require_space(k.space())?;
        Ok(Ket::from_vector(
            self.space.clone(),
            &self.matrix * k.amplitudes(),
        ))
    }

    /// `⟨k|A|k⟩`.
    pub fn expectation(&self, k: &Ket) -> Result<Complex64> {
        k.inner(&self.apply(k)?)
    }

    /// `self · other` (other acts first).
    pub fn compose(&self, other: &Operator) -> Result<Operator> {
        self.require_space(&other.space)?;
        Ok(Operator {
            space: self.space.clone(),
            matrix: &self.matrix * &other.matrix,
            name: None,
        })
    }

    pub fn try_add(&self, other: &Operator) -> Result<Operator> {
        self.require_space(&other.space)?;
        Ok(Operator {
            space: self.space.clone(),
            matrix: &self.matrix + &other.matrix,
            name: None,
        })
    }

    pub fn try_sub(&self, other: &Operator) -> Result<Operator> {
        self.try_add(&other.scaled(Complex64::new(-1.0, 0.0)))
    }

    pub fn scaled(&self, c: Complex64) -> Operator {
        Operator {
            space: self.space.clone(),
            matrix: &self.matrix * c,
            name: None,
        }
    }

    pub fn adjoint(&self) -> Operator {
        Operator {
            space: self.space.clone(),
            matrix: self.matrix.adjoint(),
            name: None,
        }
    }

    /// `self ⊗ other` over the concatenated space.
    pub fn kron(&self, other: &Operator) -> Result<Operator> {
        Ok(Operator {
            space: self.space.concat(&other.space)?,
            matrix: self.matrix.kronecker(&other.matrix),
            name: None,
        })
    }

    /// `max |A - A†|` over entries.
    pub fn hermiticity_deviation(&self) -> f64 {
        max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    /// `max |U†U - I|` over entries.
    pub fn unitarity_deviation(&self) -> f64 {
        let d = self.dim();
        max_abs(&(self.matrix.adjoint() * &self.matrix - DMatrix::<Complex64>::identity(d, d)))
    }

    /// `max(|P² - P|, |P - P†|)` over entries.
    pub fn projector_deviation(&self) -> f64 {
        if let Some(d) = self.diagonal() {
            return d
                .iter()
                .map(|x| (x * x - x).norm().max((x - x.conj()).norm()))
                .fold(0.0, f64::max);
        }
        max_abs(&(&self.matrix * &self.matrix - &self.matrix)).max(self.hermiticity_deviation())
    }

    /// Diagonal entries when every off-diagonal entry is exactly zero.
    fn diagonal(&self) -> Option<Vec<Complex64>> {
        let m = &self.matrix;
        let off = (0..m.ncols()).any(|c| (0..m.nrows()).any(|r| r != c && m[(r, c)] != ZERO));
        (!off).then(|| m.diagonal().iter().copied().collect())
    }

    /// `max |AB|` over entries.
    pub fn product_magnitude(&self, other: &Operator) -> Result<f64> {
        self.require_space(&other.space)?;
        if let (Some(a), Some(b)) = (self.diagonal(), other.diagonal()) {
            return Ok(a.iter().zip(&b).map(|(x, y)| (x * y).norm()).fold(0.0, f64::max));
        }
        Ok(max_abs(&(&self.matrix * &other.matrix)))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }

    pub fn is_projector(&self, tol: f64) -> bool {
        self.projector_deviation() <= tol
    }

    pub fn require_hermitian(&self, tol: f64) -> Result<()> {
        let deviation = self.hermiticity_deviation();
        if deviation > tol {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(())
    }

    pub fn require_unitary(&self, tol: f64) -> Result<()> {
        let deviation = self.unitarity_deviation();
        if deviation > tol {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(())
    }

    pub fn require_projector(&self, tol: f64) -> Result<()> {
        let deviation = self.projector_deviation();
        if deviation > tol {
            return Err(Error::NotProjector { deviation });
        }
        Ok(())
    }

    /// True when every off-diagonal entry is exactly zero.
    pub fn is_diagonal(&self) -> bool {
        let d = self.dim();
        (0..d).all(|c| (0..d).all(|r| r == c || self.matrix[(r, c)] == ZERO))
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        max_abs(&(&self.matrix - &other.matrix))
    }

    fn require_space(&self, space: &Space) -> Result<()> {
        if self.dim() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: space.dim(),
            });
        }
        if &self.space != space {
            return Err(Error::SpaceMismatch(format!("{} vs {}", self.space, space)));
        }
        Ok(())
    }
}

pub(crate) fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl Add for &Operator {
    type Output = Operator;

    /// Panics on mismatched spaces; use [`Operator::try_add`] otherwise.
    fn add(self, rhs: &Operator) -> Operator {
        self.try_add(rhs).expect("operator spaces differ")
    }
}

impl Sub for &Operator {
    type Output = Operator;

    fn sub(self, rhs: &Operator) -> Operator {
        self.try_sub(rhs).expect("operator spaces differ")
    }
}

impl Mul for &Operator {
    type Output = Operator;

    fn mul(self, rhs: &Operator) -> Operator {
        self.compose(rhs).expect("operator spaces differ")
    }
}

impl Mul<&Operator> for Complex64 {
    type Output = Operator;

    fn mul(self, rhs: &Operator) -> Operator {
        rhs.scaled(self)
    }
}
