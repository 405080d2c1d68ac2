use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{Ket, Space};
use crate::error::{Error, Result};

/// Split of a space's factors into two complementary groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartition {
    left: Vec<usize>,
    right: Vec<usize>,
}

impl Bipartition {
    /// `left` factor indices versus everything else.
    pub fn new(space: &Space, left: &[usize]) -> Result<Self> {
        let n = space.factors().len();
        let mut l = left.to_vec();
        l.sort_unstable();
        l.dedup();
        if l.len() != left.len() {
            return Err(Error::InvalidBipartition("repeated factor index".into()));
        }
        if let Some(bad) = l.iter().find(|&&i| i >= n) {
            return Err(Error::InvalidBipartition(format!(
                "factor index {bad} out of range"
            )));
        }
        let right: Vec<usize> = (0..n).filter(|i| !l.contains(i)).collect();
        if l.is_empty() || right.is_empty() {
            return Err(Error::InvalidBipartition(
                "both sides of the cut need at least one factor".into(),
            ));
        }
        Ok(Bipartition { left: l, right })
    }

    pub fn by_names<N: AsRef<str>>(space: &Space, left: &[N]) -> Result<Self> {
        let idx = left
            .iter()
            .map(|n| {
                space
                    .factor_index(n.as_ref())
                    .map_err(|e| Error::InvalidBipartition(e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Bipartition::new(space, &idx)
    }

    /// First factor versus the rest.
    pub fn first_factor(space: &Space) -> Result<Self> {
        Bipartition::new(space, &[0])
    }

    pub fn left(&self) -> &[usize] {
        &self.left
    }

    pub fn right(&self) -> &[usize] {
        &self.right
    }
}

/// Schmidt coefficients (descending) with their left/right vectors.
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    pub coefficients: Vec<f64>,
    pub left_vectors: Vec<DVector<Complex64>>,
    pub right_vectors: Vec<DVector<Complex64>>,
}

impl SchmidtDecomposition {
    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }
}

/// Reshapes the amplitudes into a `d_left × d_right` matrix.
fn amplitude_matrix(k: &Ket, cut: &Bipartition) -> Result<DMatrix<Complex64>> {
    let space = k.space();
    let n = space.factors().len();
    if cut.left.iter().chain(&cut.right).any(|&i| i >= n) || cut.left.len() + cut.right.len() != n {
        return Err(Error::InvalidBipartition(
            "cut does not match the ket's factors".into(),
        ));
    }
    let dims = space.dims();
    let dl: usize = cut.left.iter().map(|&i| dims[i]).product();
    let dr: usize = cut.right.iter().map(|&i| dims[i]).product();
    let mut m = DMatrix::zeros(dl, dr);
    for (idx, amp) in k.amplitudes().iter().enumerate() {
        let digits = space.digits(idx);
        let row = cut.left.iter().fold(0, |acc, &i| acc * dims[i] + digits[i]);
        let col = cut.right.iter().fold(0, |acc, &i| acc * dims[i] + digits[i]);
        m[(row, col)] = *amp;
    }
    Ok(m)
}

/// Schmidt decomposition keeping singular values above `tol`.
pub fn schmidt_decompose(k: &Ket, cut: &Bipartition, tol: f64) -> Result<SchmidtDecomposition> {
    k.require_normalized()?;
    let m = amplitude_matrix(k, cut)?;
    let svd = m.svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut out = SchmidtDecomposition {
        coefficients: Vec::new(),
        left_vectors: Vec::new(),
        right_vectors: Vec::new(),
    };
    for i in order {
        let s = svd.singular_values[i];
        if s <= tol {
            break;
        }
        out.coefficients.push(s);
        out.left_vectors.push(u.column(i).into_owned());
        out.right_vectors.push(v_t.row(i).transpose());
    }
    Ok(out)
}

/// Number of Schmidt coefficients above `tol`, with the coefficients.
pub fn schmidt_rank(k: &Ket, cut: &Bipartition, tol: f64) -> Result<(usize, Vec<f64>)> {
    let d = schmidt_decompose(k, cut, tol)?;
    Ok((d.rank(), d.coefficients))
}
