//! Two-state vectors, post-selection and weak values.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{Ket, Operator, Space};

/// Overlaps at or below this magnitude leave the weak value undefined.
pub const OVERLAP_EPS: f64 = 1e-10;

/// Branch probabilities below this are treated as impossible.
pub const MIN_BRANCH_PROBABILITY: f64 = 1e-14;

/// Deviation allowed when validating projectors and completeness.
pub const PROJECTOR_TOL: f64 = 1e-10;

/// Pre-selected state evolving forward and post-selected state evolving
/// backward. The post-selection is stored as a ket and conjugated on use.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoStateVector {
    pre: Ket,
    post: Ket,
}

impl TwoStateVector {
    pub fn new(pre: Ket, post: Ket) -> Result<Self> {
        pre.require_normalized()?;
        post.require_normalized()?;
        pre.require_same_space(&post)?;
        Ok(TwoStateVector { pre, post })
    }

    pub fn pre(&self) -> &Ket {
        &self.pre
    }

    pub fn post(&self) -> &Ket {
        &self.post
    }

    pub fn space(&self) -> &Space {
        self.pre.space()
    }

    /// `⟨ψf|ψi⟩`.
    pub fn overlap(&self) -> Complex64 {
        self.post
            .inner(&self.pre)
            .expect("spaces checked at construction")
    }

    /// `|⟨ψf|ψi⟩|²`, the chance that the post-selection succeeds.
    pub fn postselection_probability(&self) -> f64 {
        self.overlap().norm_sqr()
    }

    pub fn weak_value(&self, a: &Operator) -> Result<WeakValue> {
        self.weak_value_with_eps(a, OVERLAP_EPS)
    }

    /// `⟨ψf|A|ψi⟩ / ⟨ψf|ψi⟩`.
    pub fn weak_value_with_eps(&self, a: &Operator, eps: f64) -> Result<WeakValue> {
        let overlap = self.overlap();
        if overlap.norm() <= eps {
            return Err(Error::OrthogonalSelection {
                overlap: overlap.norm(),
            });
        }
        let numerator = self.post.inner(&a.apply(&self.pre)?)?;
        Ok(WeakValue {
            value: numerator / overlap,
            operator_tag: a.name().unwrap_or("A").to_owned(),
        })
    }
}

/// Complex weak value of a tagged operator.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakValue {
    pub value: Complex64,
    pub operator_tag: String,
}

impl WeakValue {
    pub fn re(&self) -> f64 {
        self.value.re
    }

    pub fn im(&self) -> f64 {
        self.value.im
    }
}

impl fmt::Display for WeakValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "<{}>_w = {:.6}{:+.6}i",
            self.operator_tag, self.value.re, self.value.im
        )
    }
}

pub fn weak_value(tsv: &TwoStateVector, a: &Operator) -> Result<WeakValue> {
    tsv.weak_value(a)
}

/// Born-rule projection: returns `‖P|ψ⟩‖²` and the renormalized branch.
pub fn post_select(state: &Ket, outcome_projector: &Operator) -> Result<(f64, Ket)> {
    state.require_normalized()?;
    outcome_projector.require_projector(PROJECTOR_TOL)?;
    let projected = outcome_projector.apply(state)?;
    let probability = projected.norm().powi(2);
    if probability < MIN_BRANCH_PROBABILITY {
        return Err(Error::ZeroProbabilityBranch { probability });
    }
    let collapsed = projected.scaled(Complex64::new(1.0 / probability.sqrt(), 0.0));
    Ok((probability, collapsed))
}

/// Checks `Σ P = I` to [`PROJECTOR_TOL`].
pub fn require_complete(projectors: &[Operator]) -> Result<()> {
    let first = projectors
        .first()
        .ok_or(Error::IncompleteSet { deviation: 1.0 })?;
    let mut sum = Operator::zero(first.space().clone());
    for p in projectors {
        sum = sum.try_add(p)?;
    }
    let deviation = sum.max_abs_diff(&Operator::identity(first.space().clone()));
    if deviation > PROJECTOR_TOL {
        return Err(Error::IncompleteSet { deviation });
    }
    Ok(())
}

/// `Σᵢ ⟨Pᵢ⟩_w` over a complete projector set.
pub fn projector_weak_value_sum(tsv: &TwoStateVector, projectors: &[Operator]) -> Result<Complex64> {
    require_complete(projectors)?;
    projectors
        .iter()
        .map(|p| tsv.weak_value(p).map(|w| w.value))
        .sum()
}
