//! Two atoms that collide instead of annihilating. A1's two paths each
//! cross A2's path 2'; a collision diverts both atoms to the outgoing
//! paths 1''' / 1'''' and 2'''.

use super::result::{Epoch, ScenarioResult};
use crate::error::Result;
use crate::hilbert::{mode_transfer, source_splitter};
use crate::hilbert::{Factor, Ket, Operator, Space};
use crate::tsvf::post_select;

const A1: [&str; 4] = ["1'", "1''", "1'''", "1''''"];
const A2: [&str; 4] = ["2'", "2''", "2'''", "2''''"];

pub(crate) fn space() -> Space {
    Space::new(vec![
        Factor::new("A1", &A1).expect("static labels"),
        Factor::new("A2", &A2).expect("static labels"),
    ])
    .expect("static factors")
}

fn collision(space: &Space, a1_in: &str, a1_out: &str) -> Result<Operator> {
    Operator::swap_map(
        space.clone(),
        &[("A1", a1_in), ("A2", "2'")],
        &[("A1", a1_out), ("A2", "2'''")],
    )
}

/// Projector onto "no atom found on any collision path".
fn no_collision(space: &Space) -> Result<Operator> {
    Operator::projector(space.clone(), &[("A1", &A1[..2]), ("A2", &A2[..2])])
}

/// The two ways the end-of-interval detection can come out.
#[derive(Debug, Clone)]
pub struct CollisionBranches {
    pub critical_interval: Ket,
    pub no_collision_probability: f64,
    pub no_collision: Ket,
    pub collision_probability: f64,
    pub collision: Ket,
}

fn critical_interval(space: &Space) -> Result<(Ket, Ket, Ket)> {
    let s = mode_transfer(4, [0, 1], [0, 1], &source_splitter())?;
    let split = Operator::on_factors(space.clone(), &["A1"], &s)?.compose(&Operator::on_factors(
        space.clone(),
        &["A2"],
        &s,
    )?)?;
    let t0 = split.apply(&Ket::basis(space.clone(), &["1'", "2'"])?)?;
    let t1 = collision(space, "1''", "1'''")?.apply(&t0)?;
    let t2 = collision(space, "1'", "1''''")?.apply(&t1)?;
    Ok((t0, t1, t2))
}

pub fn elastic_collision_branches() -> Result<CollisionBranches> {
    let space = space();
    let (_, _, ci) = critical_interval(&space)?;
    let quiet = no_collision(&space)?;
    let (p, no_collision) = post_select(&ci, &quiet)?;
    let hit = Operator::identity(space.clone()).try_sub(&quiet)?;
    let (q, collision) = post_select(&ci, &hit)?;
    Ok(CollisionBranches {
        critical_interval: ci,
        no_collision_probability: p,
        no_collision,
        collision_probability: q,
        collision,
    })
}

pub fn run_elastic_collision() -> Result<ScenarioResult> {
    let space = space();
    let mut r = ScenarioResult::new("elastic_collision");
    r.describe_epoch(Epoch::T0, "both atoms split");
    r.describe_epoch(Epoch::T1, "possible collision on (1'', 2')");
    r.describe_epoch(Epoch::T2, "possible collision on (1', 2'): critical interval");
    r.describe_epoch(Epoch::Final, "detectors on the collision paths stay silent");
    let (t0, t1, t2) = critical_interval(&space)?;
    r.record_state(Epoch::T0, &t0)?;
    r.record_state(Epoch::T1, &t1)?;
    r.record_state(Epoch::T2, &t2)?;
    let (p, fin) = post_select(&t2, &no_collision(&space)?)?;
    r.record_selection("no_collision", p, p);
    r.record_state(Epoch::Final, &fin)?;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{schmidt_rank, Bipartition};
    use num_complex::Complex64;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn critical_interval_has_four_half_branches() {
        let b = elastic_collision_branches().unwrap();
        let expected = Ket::from_terms(
            space(),
            &[
                (&["1'''", "2'''"][..], c(0.5)),
                (&["1''''", "2'''"][..], c(0.5)),
                (&["1'", "2''"][..], c(0.5)),
                (&["1''", "2''"][..], c(0.5)),
            ],
        )
        .unwrap();
        assert!(b.critical_interval.max_abs_diff(&expected) < 1e-12);
        assert!((b.no_collision_probability - 0.5).abs() < 1e-12);
        assert!((b.collision_probability - 0.5).abs() < 1e-12);
    }

    #[test]
    fn silent_detectors_restore_a1() {
        let b = elastic_collision_branches().unwrap();
        let s = 1.0 / 2f64.sqrt();
        let restored = Ket::from_terms(
            space(),
            &[(&["1'", "2''"][..], c(s)), (&["1''", "2''"][..], c(s))],
        )
        .unwrap();
        assert!(b.no_collision.max_abs_diff(&restored) < 1e-12);
        let cut = Bipartition::first_factor(&space()).unwrap();
        assert_eq!(schmidt_rank(&b.no_collision, &cut, 1e-8).unwrap().0, 1);
        let exchanged = Ket::from_terms(
            space(),
            &[(&["1'''", "2'''"][..], c(s)), (&["1''''", "2'''"][..], c(s))],
        )
        .unwrap();
        assert!(b.collision.max_abs_diff(&exchanged) < 1e-12);
    }

    #[test]
    fn ranks_over_the_schedule() {
        let r = run_elastic_collision().unwrap();
        let ranks: Vec<usize> = r.schmidt_ranks.values().copied().collect();
        assert_eq!(ranks, vec![1, 3, 2, 1]);
        r.validate().unwrap();
    }
}
