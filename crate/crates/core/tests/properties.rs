use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use oblivion::acceptance::{random_hermitian, random_ket, random_projector_set, random_unitary};
use oblivion::dsl;
use oblivion::hilbert::{
    mode_transfer, schmidt_decompose, schmidt_rank, tuned_splitter, Bipartition, Factor, Ket, Operator, Space,
};
use oblivion::pointer::{couple, weak_sequence, CouplingStrength, PointerWavefunction};
use oblivion::scenarios::{self, RecombineOption};
use oblivion::tsvf::{post_select, TwoStateVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn space_of(dims: &[usize]) -> Space {
    let factors = dims
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let labels: Vec<String> = (0..*d).map(|j| format!("s{j}")).collect();
            Factor::new(format!("f{i}"), &labels).unwrap()
        })
        .collect();
    Space::new(factors).unwrap()
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn dims() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(2usize..4, 1..4)
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn library_gates_preserve_norm(dims in prop::collection::vec(2usize..6, 1..3), seed: u64, a in -7.0..7.0f64, b in -7.0..7.0f64) {
        let space = space_of(&dims);
        let mut r = rng(seed);
        let k = random_ket(&mut r, &space).unwrap();
        let d = dims[0];
        let to = if d >= 4 { [2, 3] } else { [0, 1] };
        let local = mode_transfer(d, [0, 1], to, &tuned_splitter(a, b)).unwrap();
        let gates = [
            Operator::on_factors(space.clone(), &["f0"], &local).unwrap(),
            Operator::swap_map(space.clone(), &[("f0", "s0")], &[("f0", "s1")]).unwrap(),
            Operator::from_matrix(space.clone(), random_unitary(&mut r, space.dim())).unwrap(),
        ];
        for u in &gates {
            prop_assert!(u.is_unitary(1e-12));
            prop_assert!((u.apply(&k).unwrap().norm() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn basis_projectors_resolve_the_identity(dims in dims()) {
        let space = space_of(&dims);
        for f in space.factors() {
            let mut total = Operator::zero(space.clone());
            for l in f.labels() {
                total = total.try_add(&Operator::basis_projector(space.clone(), f.name(), l).unwrap()).unwrap();
            }
            prop_assert!(total.max_abs_diff(&Operator::identity(space.clone())) <= 1e-12);
        }
    }

    #[test]
    fn product_states_have_schmidt_rank_one(a in 2usize..5, b in 2usize..5, seed: u64) {
        let mut r = rng(seed);
        let left = random_ket(&mut r, &space_of(&[a])).unwrap();
        let right = random_ket(&mut r, &Space::single("g", &(0..b).map(|j| j.to_string()).collect::<Vec<_>>()).unwrap()).unwrap();
        let joint = left.tensor(&right).unwrap();
        let cut = Bipartition::first_factor(joint.space()).unwrap();
        let dec = schmidt_decompose(&joint, &cut, 1e-8).unwrap();
        prop_assert_eq!(dec.rank(), 1);
        // rebuild the product from the single Schmidt pair
        let c = dec.coefficients[0];
        let (u, v) = (&dec.left_vectors[0], &dec.right_vectors[0]);
        let rebuilt: Vec<Complex64> = (0..a).flat_map(|i| (0..b).map(move |j| u[i] * v[j] * c)).collect();
        let rebuilt = Ket::from_amplitudes(joint.space().clone(), rebuilt).unwrap();
        prop_assert!(rebuilt.max_abs_diff(&joint) <= 1e-10);
    }

    #[test]
    fn entangled_states_are_not_rank_one(a in 2usize..4, seed: u64, t in 0.1..1.4f64) {
        let space = space_of(&[a, a]);
        let mut r = rng(seed);
        let u = random_unitary(&mut r, a);
        // cos t |00⟩ + sin t |11⟩ with a local unitary on the first factor
        let mut amps = vec![Complex64::new(0.0, 0.0); a * a];
        amps[0] = Complex64::new(t.cos(), 0.0);
        amps[a + 1] = Complex64::new(t.sin(), 0.0);
        let k = Ket::from_amplitudes(space.clone(), amps).unwrap();
        let k = Operator::on_factors(space.clone(), &["f0"], &u).unwrap().apply(&k).unwrap();
        let (rank, coeffs) = schmidt_rank(&k, &Bipartition::first_factor(&space).unwrap(), 1e-8).unwrap();
        prop_assert_eq!(rank, 2);
        prop_assert!((coeffs[0] - t.cos().abs().max(t.sin().abs())).abs() <= 1e-10);
    }

    #[test]
    fn tensor_is_associative(seed: u64) {
        let mut r = rng(seed);
        let ks: Vec<Ket> = (0..3)
            .map(|i| random_ket(&mut r, &Space::single(&format!("f{i}"), &["a", "b"]).unwrap()).unwrap())
            .collect();
        let left = ks[0].tensor(&ks[1]).unwrap().tensor(&ks[2]).unwrap();
        let right = ks[0].tensor(&ks[1].tensor(&ks[2]).unwrap()).unwrap();
        prop_assert_eq!(left.space(), right.space());
        prop_assert!(left.max_abs_diff(&right) <= 1e-14);
    }

    #[test]
    fn weak_values_are_linear(dims in dims(), seed: u64, x in -3.0..3.0f64, y in -3.0..3.0f64) {
        let space = space_of(&dims);
        let mut r = rng(seed);
        let (pre, post) = (random_ket(&mut r, &space).unwrap(), random_ket(&mut r, &space).unwrap());
        prop_assume!(post.inner(&pre).unwrap().norm() > 0.1);
        let tsv = TwoStateVector::new(pre, post).unwrap();
        let (a, b) = (random_hermitian(&mut r, &space).unwrap(), random_hermitian(&mut r, &space).unwrap());
        let combo = a.scaled(Complex64::new(x, 0.0)).try_add(&b.scaled(Complex64::new(y, 0.0))).unwrap();
        let lhs = tsv.weak_value(&combo).unwrap().value;
        let rhs = tsv.weak_value(&a).unwrap().value * x + tsv.weak_value(&b).unwrap().value * y;
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + rhs.norm()));
    }

    #[test]
    fn eigenstates_give_their_eigenvalue_exactly(n in 2usize..6, k in 0usize..6, vals in prop::collection::vec(-5i32..5, 6)) {
        let k = k % n;
        let space = space_of(&[n]);
        let diag = DMatrix::from_fn(n, n, |r, c| if r == c { Complex64::new(vals[r] as f64 * 0.25, 0.0) } else { Complex64::new(0.0, 0.0) });
        let a = Operator::from_matrix(space.clone(), diag).unwrap();
        let e = Ket::basis(space.clone(), &[format!("s{k}")]).unwrap();
        let tsv = TwoStateVector::new(e.clone(), e).unwrap();
        prop_assert_eq!(tsv.weak_value(&a).unwrap().value, Complex64::new(vals[k] as f64 * 0.25, 0.0));
    }

    #[test]
    fn complete_sets_have_unit_total(dims in dims(), seed: u64, parts in 2usize..8) {
        let space = space_of(&dims);
        let mut r = rng(seed);
        let state = random_ket(&mut r, &space).unwrap();
        let set = random_projector_set(&mut r, &space, parts).unwrap();
        let total: f64 = set
            .iter()
            .map(|p| match post_select(&state, p) {
                Ok((prob, collapsed)) => {
                    assert!((collapsed.norm() - 1.0).abs() < 1e-12);
                    prob
                }
                Err(_) => 0.0,
            })
            .sum();
        prop_assert!((total - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn coupling_preserves_norm(seed: u64, g in 0.0..3.0f64) {
        let space = space_of(&[3]);
        let mut r = rng(seed);
        let k = random_ket(&mut r, &space).unwrap();
        let a = random_hermitian(&mut r, &space).unwrap();
        let joint = couple(&k, &a, &PointerWavefunction::default_weak(), CouplingStrength::new(g).unwrap()).unwrap();
        prop_assert!((joint.joint().norm() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn four_mirror_outcome_sets_are_complete(seed: u64) {
        let r = scenarios::run_four_mirror(50, seed).unwrap();
        prop_assert!(r.validate().is_ok());
    }
}

proptest! {
    #![proptest_config(config(8))]

    #[test]
    fn equal_seeds_give_identical_trajectories(seed: u64, steps in 1usize..40) {
        let space = space_of(&[3]);
        let k = random_ket(&mut rng(seed), &space).unwrap();
        let a = random_hermitian(&mut rng(seed ^ 1), &space).unwrap();
        let g = CouplingStrength::new(0.3).unwrap();
        let (t1, t2) = (weak_sequence(&k, &a, g, steps, seed).unwrap(), weak_sequence(&k, &a, g, steps, seed).unwrap());
        prop_assert_eq!(t1.readouts, t2.readouts);
        prop_assert_eq!(t1.final_state.amplitudes(), t2.final_state.amplitudes());
    }
}

#[test]
fn builtin_outcome_sets_are_complete() {
    let g = CouplingStrength::new(scenarios::DEFAULT_G).unwrap();
    let mut runs = vec![
        scenarios::run_oblivion().unwrap(),
        scenarios::run_elastic_collision().unwrap(),
        scenarios::run_three_boxes().unwrap(),
        scenarios::run_hardy().unwrap(),
    ];
    for option in [RecombineOption::RecombineAll, RecombineOption::RecombineTwo] {
        runs.push(scenarios::run_three_path_photon(option, g).unwrap());
    }
    for r in runs {
        assert!(!r.outcome_sets.is_empty(), "{}", r.scenario);
        r.validate().unwrap_or_else(|e| panic!("{}: {e}", r.scenario));
    }
}

#[test]
fn oblivion_reversal_is_seed_free() {
    let a = scenarios::time_reversal_check(&scenarios::run_oblivion().unwrap()).unwrap();
    let b = scenarios::time_reversal_check(&scenarios::run_oblivion().unwrap()).unwrap();
    assert_eq!(a, b);
}

fn amplitude() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("1".to_owned()),
        Just("-i".to_owned()),
        Just("1/sqrt(2)".to_owned()),
        Just("exp(i*pi/3)".to_owned()),
        Just("(1 - 2*i)/3".to_owned()),
        (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| format!("{re},{im}")),
    ]
}

fn scalar() -> impl Strategy<Value = String> {
    prop_oneof![
        amplitude().prop_filter("pairs only appear in states", |a| !a.contains(',')),
        (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| format!("{re} + {im}*i")),
    ]
}

/// Three factors `f0`, `f1`, `f2` with labels `a0 a1 a2' b_3`.
const LABELS: [&str; 4] = ["a0", "a1", "a2'", "b_3"];

fn basis_term() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(&LABELS[..]), 3).prop_map(|v| v.join(" "))
}

fn state() -> impl Strategy<Value = String> {
    // the first term always carries weight, so the norm is never zero
    prop::collection::btree_map(basis_term(), amplitude(), 1..5).prop_map(|terms| {
        terms
            .into_iter()
            .enumerate()
            .map(|(i, (labels, amp))| format!("{labels} : {}", if i == 0 { "1".to_owned() } else { amp }))
            .collect::<Vec<_>>()
            .join("\n")
    })
}

fn selection() -> impl Strategy<Value = String> {
    (0usize..3, prop::sample::subsequence(&LABELS[..], 1..3))
        .prop_map(|(f, labels)| format!("f{f}={}", labels.join(",")))
}

fn gate() -> impl Strategy<Value = String> {
    prop_oneof![
        (0usize..3, -3.0..3.0f64, any::<bool>()).prop_map(|(f, p, to)| {
            let target = if to { " -> a2' b_3" } else { "" };
            format!("beamsplitter f{f}: a0 a1{target} phase_in={p} phase_out=-pi/2")
        }),
        (0usize..3).prop_map(|f| format!("swap_map f{f}=a0 <-> f{f}=a2'")),
        selection().prop_map(|s| format!("projector_select NAME: {s}")),
        (0usize..3, -3.0..3.0f64).prop_map(|(f, p)| {
            format!("custom_unitary f{f}: exp(i*{p}); 0; 0; 0 | 0; 1; 0; 0 | 0; 0; 1; 0 | 0; 0; 0; 1")
        }),
    ]
}

fn operator() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("I".to_owned()),
        prop::sample::subsequence(vec![0usize, 1, 2], 1..3)
            .prop_flat_map(|fs| {
                fs.into_iter()
                    .map(|f| {
                        prop::sample::subsequence(&LABELS[..], 1..3)
                            .prop_map(move |l| format!("f{f}={}", l.join(",")))
                    })
                    .collect::<Vec<_>>()
            })
            .prop_map(|s| format!("[{}]", s.join(" "))),
    ];
    leaf.prop_recursive(4, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a} + {b}")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) - ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) * ({b})")),
            (scalar(), inner).prop_map(|(c, a)| format!("({c}) * ({a})")),
        ]
    })
}

prop_compose! {
    fn description()(
        initial in state(),
        gates in prop::collection::vec((0usize..4, gate()), 0..5),
        post in prop::option::of(state()),
        observables in prop::collection::vec((prop::option::of(0usize..4), operator()), 0..4),
    ) -> String {
        let epochs = ["t0", "t1", "t2", "final"];
        let mut text = String::from("# generated\nFACTORS\n");
        for f in 0..3 {
            text.push_str(&format!("f{f}: {}\n", LABELS.join(" ")));
        }
        text.push_str(&format!("INITIAL\n{initial}\n"));
        let mut gates = gates;
        gates.sort_by_key(|g| g.0);
        if !gates.is_empty() {
            text.push_str("GATES\n");
            for (i, (e, g)) in gates.iter().enumerate() {
                text.push_str(&format!("{} {}\n", epochs[*e], g.replace("NAME", &format!("sel{i}"))));
            }
        }
        if let Some(p) = post {
            text.push_str(&format!("POSTSELECT\n{p}\n"));
        }
        let recorded: Vec<usize> = std::iter::once(0).chain(gates.iter().map(|g| g.0)).collect();
        if !observables.is_empty() {
            text.push_str("OBSERVABLES\n");
            for (i, (e, op)) in observables.iter().enumerate() {
                let at = e.filter(|e| recorded.contains(e)).map(|e| format!(" @{}", epochs[e])).unwrap_or_default();
                text.push_str(&format!("obs{i}{at} = {op}\n"));
            }
        }
        text
    }
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn generated_descriptions_round_trip(text in description()) {
        let spec = dsl::parse(&text).map_err(|d| TestCaseError::fail(format!("{d}\n{text}")))?;
        let rendered = dsl::render(&spec);
        let again = dsl::parse(&rendered).map_err(|d| TestCaseError::fail(format!("{d}\n{rendered}")))?;
        prop_assert_eq!(&again, &spec);
        prop_assert_eq!(dsl::render(&again), rendered);
        let first = dsl::evaluate(&spec, "generated");
        let second = dsl::evaluate(&again, "generated");
        match (first, second) {
            (Ok(a), Ok(b)) => prop_assert!(a.compare_exact(&b, 0.0).is_ok()),
            // render moves lines, so only the message after the position must agree
            (Err(a), Err(b)) => {
                let strip = |e: dsl::DslError| e.to_string().split_once(": ").map(|(_, m)| m.to_owned());
                prop_assert_eq!(strip(a), strip(b));
            }
            (a, b) => prop_assert!(false, "{:?} vs {:?}", a.is_ok(), b.is_ok()),
        }
    }
}
