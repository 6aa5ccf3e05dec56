use formalism_core::formalisms::*;
use formalism_core::random::*;
use formalism_core::tensor::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::FRAC_1_SQRT_2;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn layout(label: &str, d: usize) -> SpaceLayout {
    SpaceLayout::single(label, d).unwrap()
}

fn max_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).iter().map(|x| x.norm()).fold(0.0, f64::max)
}

fn mem_for(owner: &str, m: &ProjectiveMeasurement) -> ObserverMemory {
    ObserverMemory::for_outcomes(owner, owner, &m.labels()).unwrap()
}

// ---- tensor examples ----

#[test]
fn tensor_examples() {
    let q = layout("A", 2);
    let zero = StateVector::basis(q.clone(), 0).unwrap();
    let zz = zero.tensor(&StateVector::basis(layout("B", 2), 0).unwrap()).unwrap();
    assert_eq!(zz.amplitude(0), c(1.0));
    let plus = StateVector::new(q, vec![c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)]).unwrap();
    let one = StateVector::basis(layout("B", 2), 1).unwrap();
    let v = tensor_product(&plus, &one).unwrap();
    let want = [0.0, FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2];
    for (a, w) in v.amplitudes().iter().zip(want) {
        assert!((a - c(w)).norm() < 1e-15);
    }
    let i2 = LinearMap::identity(layout("A", 2));
    let i3 = LinearMap::identity(layout("B", 3));
    assert_eq!(tensor_product(&i2, &i3).unwrap().matrix(), &DMatrix::<C64>::identity(6, 6));
    assert!(matches!(
        tensor_product(&plus, &plus),
        Err(formalism_core::Error::LabelCollision(_))
    ));
}

#[test]
fn embed_examples() {
    let so = SpaceLayout::new([("S", 2), ("O", 2)]).unwrap();
    let flip = LinearMap::operator(layout("S", 2), DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]))
        .unwrap();
    let e = embed_on_factors(&flip, &["S"], &so).unwrap();
    let out = e.apply(&Ket::basis(so.clone(), 0).unwrap()).unwrap();
    assert_eq!(out, Ket::basis(so.clone(), 2).unwrap());
    let p1 = LinearMap::projector(&Ket::basis(layout("O", 2), 1).unwrap());
    let bell = Ket::new(so.clone(), vec![c(FRAC_1_SQRT_2), c(0.0), c(0.0), c(FRAC_1_SQRT_2)]).unwrap();
    let out = embed_on_factors(&p1, &["O"], &so).unwrap().apply(&bell).unwrap();
    for (a, w) in out.amplitudes().iter().zip([0.0, 0.0, 0.0, FRAC_1_SQRT_2]) {
        assert!((a - c(w)).norm() < 1e-15);
    }
    let id = embed_on_factors(&LinearMap::identity(layout("O", 2)), &["O"], &so).unwrap();
    assert_eq!(id.matrix(), &DMatrix::<C64>::identity(4, 4));
    assert!(embed_on_factors(&flip, &["X"], &so).is_err());
}

#[test]
fn inner_product_and_gram_examples() {
    let q = layout("A", 2);
    let zero = Ket::basis(q.clone(), 0).unwrap();
    let one = Ket::basis(q.clone(), 1).unwrap();
    let plus = Ket::new(q, vec![c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)]).unwrap();
    assert_eq!(inner_product(&zero, &zero).unwrap(), c(1.0));
    assert_eq!(inner_product(&zero, &one).unwrap(), c(0.0));
    assert!((inner_product(&plus, &zero).unwrap() - c(FRAC_1_SQRT_2)).norm() < 1e-15);
    let g = gram_matrix(&[zero.clone(), plus]).unwrap();
    assert!((g[(0, 1)] - c(FRAC_1_SQRT_2)).norm() < 1e-15);
    assert!((g[(1, 1)] - c(1.0)).norm() < 1e-15);
    let empty: [Ket; 0] = [];
    assert_eq!(gram_matrix(&empty).unwrap().shape(), (0, 0));
    assert!(inner_product(&zero, &Ket::basis(layout("B", 2), 0).unwrap()).is_err());
}

#[test]
fn isometry_check_examples() {
    let id = LinearMap::identity(layout("A", 3));
    let r = check_isometry(&id, 1e-12);
    assert!(r.is_isometry && r.max_deviation == 0.0);
    let mut m = DMatrix::<C64>::identity(3, 3);
    m.column_mut(1).scale_mut(2.0);
    assert!(!check_isometry(&LinearMap::operator(layout("A", 3), m).unwrap(), 1e-10).is_isometry);
    let z3 = ProjectiveMeasurement::computational("S", &["0", "1", "2"]).unwrap();
    let v = measurement_isometry(&z3, &mem_for("O", &z3)).unwrap();
    assert!(check_isometry(v.map(), 1e-14).is_isometry);
    let narrow = LinearMap::new(layout("A", 3), layout("B", 2), DMatrix::zeros(2, 3)).unwrap();
    let r = check_isometry(&narrow, 1e-10);
    assert!(!r.is_isometry && r.reason.is_some());
}

// ---- tensor properties ----

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tensor_of_states_is_normalized(seed: u64, da in 1usize..=5, db in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_state(&mut rng, &layout("A", da));
        let b = random_state(&mut rng, &layout("B", db));
        prop_assert!((a.tensor(&b).unwrap().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partial_trace_of_product(seed: u64, da in 1usize..=4, db in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ra = random_density(&mut rng, &layout("A", da), da);
        let rb = random_density(&mut rng, &layout("B", db), 1 + db / 2);
        let red = partial_trace(&ra.tensor(&rb).unwrap(), &["A"]).unwrap();
        prop_assert!(max_diff(red.matrix(), ra.matrix()) < 1e-10);
        prop_assert!((red.trace() - c(1.0)).norm() < 1e-12);
    }

    #[test]
    fn embed_on_all_factors_is_identity_embedding(seed: u64, da in 1usize..=3, db in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = SpaceLayout::new([("A", da), ("B", db)]).unwrap();
        let u = random_unitary(&mut rng, &l);
        let e = embed_on_factors(&u, &["A", "B"], &l).unwrap();
        prop_assert_eq!(e.matrix(), u.matrix());
    }

    #[test]
    fn isometries_preserve_norms(seed: u64, d in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = layout("S", d);
        let m = random_projective(&mut rng, &l).unwrap();
        let v = measurement_isometry(&m, &mem_for("O", &m)).unwrap();
        for _ in 0..100 {
            let amps: Vec<C64> = (0..d).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let x = Ket::new(l.clone(), amps).unwrap();
            let y = v.map().apply(&x).unwrap();
            prop_assert!((y.norm() - x.norm()).abs() < 1e-10);
        }
    }

    #[test]
    fn gram_is_hermitian_with_unit_diagonal(seed: u64, d in 1usize..=5, n in 0usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = layout("S", d);
        let vs: Vec<StateVector> = (0..n).map(|_| random_state(&mut rng, &l)).collect();
        let g = gram_matrix(&vs).unwrap();
        prop_assert!(max_diff(&g, &g.adjoint()) < 1e-12);
        for i in 0..n {
            prop_assert!((g[(i, i)] - c(1.0)).norm() < 1e-12);
        }
    }
}

// ---- brute-force oracles, independent of the library's tensor code ----

/// `p(b|a) = |<b|a>|^2` for two rank-one measurements on one system, from
/// the amplitudes directly.
fn oracle_sequential(psi: &[C64], first: &[Vec<C64>], second: &[Vec<C64>]) -> Vec<Option<Vec<f64>>> {
    let dot = |a: &[C64], b: &[C64]| a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<C64>();
    first
        .iter()
        .map(|a| {
            let pa = dot(a, psi).norm_sqr();
            if pa <= 1e-14 {
                return None;
            }
            let w: Vec<f64> = second.iter().map(|b| dot(b, a).norm_sqr() * pa).collect();
            let t: f64 = w.iter().sum();
            Some(w.iter().map(|x| x / t).collect())
        })
        .collect()
}

fn vectors(m: &ProjectiveMeasurement) -> Vec<Vec<C64>> {
    m.outcomes().iter().map(|o| o.vector.amplitudes().iter().copied().collect()).collect()
}

#[test]
fn standard_conditional_matches_sequential_oracle_on_qutrits() {
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    let l = layout("S", 3);
    for _ in 0..50 {
        let psi = random_state(&mut rng, &l);
        let m1 = random_projective(&mut rng, &l).unwrap();
        let m2 = random_projective(&mut rng, &l).unwrap();
        let t = standard_conditional(&psi, &m1, &m2).unwrap();
        let amps: Vec<C64> = psi.amplitudes().iter().copied().collect();
        let oracle = oracle_sequential(&amps, &vectors(&m1), &vectors(&m2));
        for (r, row) in oracle.iter().enumerate() {
            let row = row.as_ref().unwrap();
            for (col, want) in row.iter().enumerate() {
                assert!((t.entries()[r][col] - want).abs() < 1e-12);
            }
        }
    }
}

/// Relative-state conditional for the friend scenario from the closed
/// expression `q(a, b) = sum_s |b[s, a]|^2 |<b|psi>|^2` with
/// `psi = (|00> + |11>)/sqrt(2)` over (spin, friend memory).
fn oracle_friend_relative(alpha: f64, beta: f64) -> [[f64; 2]; 2] {
    let b1 = [alpha, 0.0, 0.0, beta];
    let b2 = [beta, 0.0, 0.0, -alpha];
    let psi = [FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2];
    let overlap = |b: &[f64; 4]| b.iter().zip(psi).map(|(x, y)| x * y).sum::<f64>().powi(2);
    let mut out = [[0.0; 2]; 2];
    for a in 0..2 {
        let q: Vec<f64> = [b1, b2]
            .iter()
            .map(|b| (0..2).map(|s| b[s * 2 + a].powi(2)).sum::<f64>() * overlap(b))
            .collect();
        let t: f64 = q.iter().sum();
        out[a] = [q[0] / t, q[1] / t];
    }
    out
}

fn friend_setup(alpha: f64, beta: f64) -> (StateVector, ProjectiveMeasurement, ObserverMemory, ProjectiveMeasurement) {
    let phi = StateVector::new(layout("S", 2), vec![c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)]).unwrap();
    let z = ProjectiveMeasurement::computational("S", &["u", "d"]).unwrap();
    let mem = mem_for("F", &z);
    let joint = SpaceLayout::new([("S", 2), ("F", 2)]).unwrap();
    let w = ProjectiveMeasurement::new(vec![
        ("b1", StateVector::new(joint.clone(), vec![c(alpha), c(0.0), c(0.0), c(beta)]).unwrap()),
        ("b2", StateVector::new(joint, vec![c(beta), c(0.0), c(0.0), c(-alpha)]).unwrap()),
    ])
    .unwrap()
    .completed()
    .unwrap();
    (phi, z, mem, w)
}

#[test]
fn friend_relative_table_matches_oracle() {
    for x in [0.1, 0.25, 0.5, 0.75, 0.9] {
        let (a, b) = (f64::sqrt(x), f64::sqrt(1.0 - x));
        let (phi, z, mem, w) = friend_setup(a, b);
        let total = apply_relative_measurement(&phi, &z, &mem).unwrap();
        let wmem = mem_for("W", &w);
        let total = apply_relative_measurement(&total, &w, &wmem).unwrap();
        let t = relative_conditional_table(&total, &mem, &wmem).unwrap();
        let oracle = oracle_friend_relative(a, b);
        for (r, row) in ["u", "d"].iter().enumerate() {
            for (k, col) in ["b1", "b2"].iter().enumerate() {
                assert!((t.get(row, col).unwrap() - oracle[r][k]).abs() < 1e-12);
            }
        }
        let collapse = subjective_collapse_conditional(&phi, &z, &mem, &w).unwrap();
        assert!((collapse.get("u", "b1").unwrap() - x).abs() < 1e-12);
        assert!((collapse.get("d", "b1").unwrap() - (1.0 - x)).abs() < 1e-12);
    }
    // Frozen from an independent numpy evaluation of the same expression.
    let o = oracle_friend_relative(0.75f64.sqrt(), 0.5);
    let gap = [(o[0][0] - 0.75).abs(), (o[0][1] - 0.25).abs(), (o[1][0] - 0.25).abs(), (o[1][1] - 0.75).abs()]
        .into_iter()
        .fold(0.0, f64::max);
    assert!((gap - 0.5727809555928179).abs() < 1e-12);
}

// ---- formalism properties ----

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn postulate_one_consistency(seed: u64, d in 2usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = layout("S", d);
        let psi = random_state(&mut rng, &l);
        let m = random_projective(&mut rng, &l).unwrap();
        let mem = mem_for("O", &m);
        let total = apply_relative_measurement(&psi, &m, &mem).unwrap();
        for a in m.labels() {
            let q = relative_outcome_probability(&total, &mem, &a).unwrap();
            prop_assert!((q - born_probability(&psi, &m, &a).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn delta_property(seed: u64, d in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = layout("S", d);
        let psi = random_state(&mut rng, &l);
        let m = random_projective(&mut rng, &l).unwrap();
        let mem = mem_for("O", &m);
        let total = apply_relative_measurement(&psi, &m, &mem).unwrap();
        for a in m.labels() {
            for a2 in m.labels() {
                let q = relative_joint_probability(&total, &[
                    FactorProjection::new(["S"], m.vector(&a2).unwrap().as_ket().clone()),
                    FactorProjection::new(["O"], mem.pointer(&a).unwrap().as_ket().clone()),
                ]).unwrap();
                let want = if a == a2 { born_probability(&psi, &m, &a).unwrap() } else { 0.0 };
                prop_assert!((q - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn same_level_equivalence(seed: u64, d in 2usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = layout("S", d);
        let psi = random_state(&mut rng, &l);
        let m1 = random_projective(&mut rng, &l).unwrap();
        let m2 = random_projective(&mut rng, &l).unwrap();
        let (o1, o2) = (mem_for("O1", &m1), mem_for("O2", &m2));
        let total = apply_relative_measurement(&psi, &m1, &o1).unwrap();
        let total = apply_relative_measurement(&total, &m2, &o2).unwrap();
        let rel = relative_conditional_table(&total, &o1, &o2).unwrap();
        let std = standard_conditional(&psi, &m1, &m2).unwrap();
        prop_assert!(rel.max_abs_diff(&std).unwrap().0 <= 1e-10);
    }

    #[test]
    fn product_basis_agreement(seed: u64, d in 2usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = layout("S", d);
        let psi = random_state(&mut rng, &l);
        let m = random_projective(&mut rng, &l).unwrap();
        let mem = mem_for("F", &m);
        let joint = l.concat(mem.layout()).unwrap();
        let mut basis = Vec::new();
        for a in m.outcomes() {
            for (p, ptr) in mem.pointers() {
                let v = a.vector.tensor(ptr).unwrap().with_layout(joint.clone()).unwrap();
                basis.push((format!("{}{}", a.label, p), v));
            }
        }
        let sup = ProjectiveMeasurement::new(basis).unwrap();
        prop_assert!(product_basis_condition(&sup, &m, &mem, 1e-10).unwrap());
        let wmem = mem_for("W", &sup);
        let total = apply_relative_measurement(&psi, &m, &mem).unwrap();
        let total = apply_relative_measurement(&total, &sup, &wmem).unwrap();
        let rel = relative_conditional_table(&total, &mem, &wmem).unwrap();
        let col = subjective_collapse_conditional(&psi, &m, &mem, &sup).unwrap();
        prop_assert!(rel.max_abs_diff(&col).unwrap().0 <= 1e-10);
    }

    #[test]
    fn kraus_dilation_equivalence(seed: u64, d in 1usize..=4, n in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = layout("S", d);
        let k = random_kraus(&mut rng, &l, n).unwrap();
        let labels: Vec<String> = k.labels();
        let mem = ObserverMemory::for_outcomes("O", "O", &labels).unwrap();
        let dil = kraus_dilation(&k, "X", &mem).unwrap();
        prop_assert!(check_isometry(dil.unitary(), 1e-10).is_isometry);
        let rho = random_density(&mut rng, &l, d);
        let total = dil.apply(&rho).unwrap();
        for a in &labels {
            let q = relative_outcome_probability(&total, &mem, a).unwrap();
            prop_assert!((q - kraus_probability(&rho, &k, a).unwrap()).abs() <= 1e-10);
        }
    }

    #[test]
    fn kraus_update_has_unit_trace(seed: u64, d in 1usize..=4, n in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = layout("S", d);
        let k = random_kraus(&mut rng, &l, n).unwrap();
        let rho = random_density(&mut rng, &l, d);
        for a in k.labels() {
            if kraus_probability(&rho, &k, &a).unwrap() > 1e-12 {
                let after = kraus_update(&rho, &k, &a).unwrap();
                prop_assert!((after.trace() - c(1.0)).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn section_six_register_map_is_extendable() {
    let l = SpaceLayout::new([("S", 2), ("F", 2), ("R", 2)]).unwrap();
    let k = |digits: &[usize]| StateVector::from_digits(l.clone(), digits).unwrap();
    let verdict = partial_map_isometry_check(&[(k(&[0, 0, 0]), k(&[0, 0, 1])), (k(&[1, 1, 0]), k(&[1, 1, 1]))]).unwrap();
    assert!(verdict.extendable);
    assert_eq!(verdict.max_deviation, 0.0);
}
