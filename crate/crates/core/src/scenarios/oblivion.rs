//! Electron and positron split into two paths each, with annihilation
//! possible where the paths cross at t1 (1'', 2') and t2 (1', 2').

use super::result::{Epoch, ScenarioResult};
use crate::error::{Error, Result};
use crate::hilbert::source_splitter;
use crate::hilbert::{Factor, Ket, Operator, Space};
use crate::tsvf::post_select;

pub(crate) fn space() -> Space {
    Space::new(vec![
        Factor::new("electron", &["1'", "1''"]).expect("static labels"),
        Factor::new("positron", &["2'", "2''"]).expect("static labels"),
        Factor::new("D1", &["READY", "CLICK"]).expect("static labels"),
        Factor::new("D2", &["READY", "CLICK"]).expect("static labels"),
    ])
    .expect("static factors")
}

/// Annihilation of the pair on `(e, p)` flips detector `det` to CLICK.
fn annihilation(space: &Space, e: &str, p: &str, det: &str) -> Result<Operator> {
    Operator::swap_map(
        space.clone(),
        &[("electron", e), ("positron", p), (det, "READY")],
        &[("electron", e), ("positron", p), (det, "CLICK")],
    )
}

pub fn run_oblivion() -> Result<ScenarioResult> {
    let space = space();
    let mut r = ScenarioResult::new("oblivion");
    r.describe_epoch(Epoch::T0, "both particles split by their magnets");
    r.describe_epoch(Epoch::T1, "no annihilation on (1'', 2')");
    r.describe_epoch(Epoch::T2, "no annihilation on (1', 2')");

    let s = source_splitter();
    let split = Operator::on_factors(space.clone(), &["electron"], &s)?.compose(&Operator::on_factors(
        space.clone(),
        &["positron"],
        &s,
    )?)?;
    let source = Ket::basis(space.clone(), &["1'", "2'", "READY", "READY"])?;
    let t0 = split.apply(&source)?;
    r.record_state(Epoch::T0, &t0)?;

    let silent1 = Operator::basis_projector(space.clone(), "D1", "READY")?;
    let evolved = annihilation(&space, "1''", "2'", "D1")?.apply(&t0)?;
    let (p1, t1) = post_select(&evolved, &silent1)?;
    r.record_selection("no_click_t1", p1, p1);
    r.record_state(Epoch::T1, &t1)?;

    let silent2 = Operator::basis_projector(space.clone(), "D2", "READY")?;
    let evolved = annihilation(&space, "1'", "2'", "D2")?.apply(&t1)?;
    let (p2, t2) = post_select(&evolved, &silent2)?;
    r.record_selection("no_click_t2", p2, p1 * p2);
    r.record_state(Epoch::T2, &t2)?;
    Ok(r)
}

/// Probability that a particle sent back through its splitter reaches the
/// source port, for the state recorded at `epoch`. Returns
/// `(electron, positron)`.
pub fn time_reversal_at(result: &ScenarioResult, epoch: Epoch) -> Result<(f64, f64)> {
    let k = result
        .state(epoch)
        .ok_or_else(|| Error::InvalidArgument(format!("no state recorded at {epoch}")))?;
    let back = source_splitter().adjoint();
    let ret = |factor: &str| -> Result<f64> {
        let fi = k.space().factor_index(factor)?;
        let rho = k.reduced_density(fi)?;
        if rho.nrows() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: rho.nrows(),
            });
        }
        Ok((&back * rho * back.adjoint())[(0, 0)].re)
    };
    Ok((ret("electron")?, ret("positron")?))
}

/// [`time_reversal_at`] on the last recorded state.
pub fn time_reversal_check(result: &ScenarioResult) -> Result<(f64, f64)> {
    let last = *result
        .states_by_epoch
        .keys()
        .next_back()
        .ok_or_else(|| Error::InvalidArgument("result has no states".into()))?;
    time_reversal_at(result, last)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    const R: [&str; 2] = ["READY", "READY"];

    fn literal(terms: &[(&str, &str, f64)]) -> Ket {
        let labels: Vec<Vec<&str>> = terms.iter().map(|(e, p, _)| vec![*e, *p, R[0], R[1]]).collect();
        let t: Vec<(&[&str], Complex64)> = labels
            .iter()
            .zip(terms)
            .map(|(l, (_, _, a))| (l.as_slice(), c(*a)))
            .collect();
        Ket::from_terms(space(), &t).unwrap()
    }

    #[test]
    fn states_follow_the_three_stages() {
        let r = run_oblivion().unwrap();
        let h = 0.5;
        let t0 = literal(&[
            ("1'", "2'", h),
            ("1'", "2''", h),
            ("1''", "2'", h),
            ("1''", "2''", h),
        ]);
        let s3 = 1.0 / 3f64.sqrt();
        let t1 = literal(&[("1'", "2''", s3), ("1''", "2''", s3), ("1'", "2'", s3)]);
        let s2 = 1.0 / 2f64.sqrt();
        let t2 = literal(&[("1'", "2''", s2), ("1''", "2''", s2)]);
        assert!(r.state(Epoch::T0).unwrap().max_abs_diff(&t0) < 1e-12);
        assert!(r.state(Epoch::T1).unwrap().max_abs_diff(&t1) < 1e-12);
        assert!(r.state(Epoch::T2).unwrap().max_abs_diff(&t2) < 1e-12);
    }

    #[test]
    fn ranks_and_probabilities() {
        let r = run_oblivion().unwrap();
        let ranks: Vec<usize> = r.schmidt_ranks.values().copied().collect();
        assert_eq!(ranks, vec![1, 2, 1]);
        assert!((r.probability("no_click_t1.complement").unwrap() - 0.25).abs() < 1e-12);
        assert!((r.probability("no_click_t2.complement").unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!((r.probability("no_click_t2.cumulative").unwrap() - 0.5).abs() < 1e-12);
        r.validate().unwrap();
    }

    #[test]
    fn time_reversal_returns() {
        let r = run_oblivion().unwrap();
        let (e, p) = time_reversal_check(&r).unwrap();
        assert!((e - 1.0).abs() < 1e-10);
        assert!((p - 0.5).abs() < 1e-10);
        let (e0, p0) = time_reversal_at(&r, Epoch::T0).unwrap();
        assert!((e0 - 1.0).abs() < 1e-10 && (p0 - 1.0).abs() < 1e-10);
        assert!(time_reversal_at(&r, Epoch::Final).is_err());
    }
}
