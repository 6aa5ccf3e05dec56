use formalism_core::formalisms::ProjectiveMeasurement;
use formalism_core::random::{random_projective, random_state};
use formalism_core::scenarios::*;
use formalism_core::tensor::{SpaceLayout, StateVector, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

// Independent numpy computation of the relative-state table at alpha^2 = 3/4.
const GAP_THREE_QUARTERS: f64 = 0.5727809555928179;

fn table_of(r: &QueryResult) -> &formalism_core::formalisms::ProbabilityTable {
    match &r.value {
        QueryValue::Table(t) => t,
        other => panic!("expected a table, got {other:?}"),
    }
}

fn by_name<'a>(rs: &'a [QueryResult], name: &str) -> &'a QueryResult {
    rs.iter().find(|r| r.title == name).unwrap()
}

#[test]
fn symmetric_wigner_friend() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let rs = run_scenario(&wigner_friend(h, h).unwrap()).unwrap();
    for r in &rs {
        assert_eq!(r.passed(), Some(true), "{}: {:?}", r.title, r.comparison);
    }
    let collapse = table_of(by_name(&rs, "update_rule"));
    assert!((collapse.get("u", "b1").unwrap() - 0.5).abs() < 1e-12);
    let relative = table_of(by_name(&rs, "relative_state"));
    assert!((relative.get("u", "b1").unwrap() - 1.0).abs() < 1e-12);
    assert!(relative.get("d", "b2").unwrap().abs() < 1e-12);
}

#[test]
fn collapse_table_matches_closed_form_everywhere() {
    for x in default_alpha_grid() {
        let (a, b) = (x.sqrt(), (1.0 - x).sqrt());
        let rs = run_scenario(&wigner_friend(a, b).unwrap()).unwrap();
        let t = table_of(by_name(&rs, "update_rule"));
        assert!((t.get("u", "b1").unwrap() - x).abs() < 1e-12);
        assert!((t.get("u", "b2").unwrap() - (1.0 - x)).abs() < 1e-12);
        assert!((t.get("d", "b1").unwrap() - (1.0 - x)).abs() < 1e-12);
        assert!((t.get("d", "b2").unwrap() - x).abs() < 1e-12);
        assert_eq!(by_name(&rs, "update_rule").passed(), Some(true));
    }
}

#[test]
fn aligned_basis_gives_identity() {
    let rs = run_scenario(&wigner_friend(1.0, 0.0).unwrap()).unwrap();
    for name in ["update_rule", "relative_state"] {
        let t = table_of(by_name(&rs, name));
        assert!((t.get("u", "b1").unwrap() - 1.0).abs() < 1e-12);
        assert!((t.get("d", "b2").unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn invalid_amplitudes() {
    assert!(wigner_friend(0.5, 0.5).is_err());
}

#[test]
fn inequivalence_gap_values() {
    let report = inequivalence_report(&[0.0, 0.25, 0.5, 0.75, 1.0]).unwrap();
    let gaps: Vec<f64> = report.iter().map(|p| p.gap).collect();
    assert!(gaps[0] < 1e-10);
    assert!((gaps[1] - GAP_THREE_QUARTERS).abs() < 1e-12);
    assert!((gaps[2] - 0.5).abs() < 1e-12);
    assert!((gaps[3] - GAP_THREE_QUARTERS).abs() < 1e-12);
    assert!(gaps[4] < 1e-10);
    assert!(report[3].gap > 0.1);
    assert!(inequivalence_report(&[1.5]).is_err());
    assert!(inequivalence_report(&[-0.1]).is_err());
}

#[test]
fn closed_form_disagrees_off_symmetry() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let sym = closed_form_relative_table(h, h).unwrap();
    assert!((sym[0][0] - 1.0).abs() < 1e-12 && sym[0][1].abs() < 1e-12);
    let (a, b) = (0.75f64.sqrt(), 0.25f64.sqrt());
    let cf = closed_form_relative_table(a, b).unwrap();
    let computed = &inequivalence_report(&[0.75]).unwrap()[0].relative;
    let d = (cf[0][0] - computed.get("u", "b1").unwrap()).abs();
    assert!(d > 1e-3);
    assert!((cf[0][0] + cf[0][1] - 1.0).abs() > 1e-3);
    assert!(closed_form_relative_table(1.0, 0.0).is_none());
}

#[test]
fn extended_wigner_friend_values() {
    let rs = run_scenario(&extended_wigner_friend().unwrap()).unwrap();
    for r in &rs {
        assert_eq!(r.passed(), Some(true), "{}: {:?}", r.title, r.comparison);
    }
}

#[test]
fn recorded_prediction() {
    let rs = run_scenario(&extended_wigner_friend_recorded().unwrap()).unwrap();
    for r in &rs {
        assert_eq!(r.passed(), Some(true), "{}: {:?}", r.title, r.comparison);
    }
}

#[test]
fn shared_record_changes_nothing() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let rs = run_scenario(&wigner_friend_shared_record(h, h).unwrap()).unwrap();
    let a = table_of(by_name(&rs, "relative_state"));
    let b = table_of(by_name(&rs, "recorded"));
    assert!(a.max_abs_diff(b).unwrap().0 < 1e-12);
}

#[test]
fn appendix_b_values() {
    let tables = appendix_b_tables().unwrap();
    let expect: [(&str, [f64; 4]); 4] = [
        ("F1", [1.0 / 12.0, 5.0 / 12.0, 1.0 / 12.0, 5.0 / 12.0]),
        ("F2", [1.0 / 12.0, 1.0 / 12.0, 5.0 / 12.0, 5.0 / 12.0]),
        ("A", [0.25, 0.25, 0.05, 0.45]),
        ("W", [1.0 / 12.0, 1.0 / 12.0, 1.0 / 12.0, 0.75]),
    ];
    for (agent, values) in expect {
        let t = &tables.iter().find(|t| t.agent == agent).unwrap().table;
        for (got, want) in t.flatten().iter().zip(values) {
            assert!((got - want).abs() < 1e-12, "{agent}: {:?}", t.flatten());
        }
        assert!((t.total() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn appendix_b_w_equals_joint_query() {
    let tables = appendix_b_tables().unwrap();
    let w = &tables.iter().find(|t| t.agent == "W").unwrap().table;
    let rs = run_scenario(&extended_wigner_friend().unwrap()).unwrap();
    let joint = table_of(by_name(&rs, "joint_aw")).restrict(&["o", "f"], &["o", "f"]).unwrap();
    assert_eq!(w, &joint);
}

#[test]
fn marginal_over_w() {
    let rs = run_scenario(&extended_wigner_friend().unwrap()).unwrap();
    let t = table_of(by_name(&rs, "joint_aw"));
    let o: f64 = t.row_labels().iter().map(|r| t.get(r, "o").unwrap()).sum();
    let f: f64 = t.row_labels().iter().map(|r| t.get(r, "f").unwrap()).sum();
    assert!((o - 1.0 / 6.0).abs() < 1e-12);
    assert!((f - 5.0 / 6.0).abs() < 1e-12);
}

#[test]
fn relative_runs_stay_normalized_and_collapse_weights_sum_to_one() {
    for s in [
        wigner_friend(0.75f64.sqrt(), 0.5).unwrap(),
        extended_wigner_friend().unwrap(),
        extended_wigner_friend_recorded().unwrap(),
    ] {
        let ens = run_ensemble(&s).unwrap();
        let state = ens.global_state().unwrap();
        assert!((state.norm() - 1.0).abs() < 1e-10);
        let actors: Vec<String> = s.events().map(|e| e.actor.clone()).collect();
        for a in actors {
            let ens = run_ensemble(&s.with_mode(&a, Mode::Collapse).unwrap()).unwrap();
            assert!((ens.total_weight() - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn same_level_chain_is_mode_independent() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for d in 2..=4 {
        let l = SpaceLayout::single("S", d).unwrap();
        let psi = random_state(&mut rng, &l);
        let m1 = random_projective(&mut rng, &l).unwrap();
        let m2 = random_projective(&mut rng, &l).unwrap();
        let tables: Vec<_> = [Mode::Collapse, Mode::Relative]
            .into_iter()
            .map(|mode| {
                let rs = run_scenario(&same_level_chain(psi.clone(), m1.clone(), m2.clone(), mode).unwrap()).unwrap();
                table_of(&rs[0]).clone()
            })
            .collect();
        assert!(tables[0].max_abs_diff(&tables[1]).unwrap().0 < 1e-10);
    }
}

#[test]
fn encapsulated_chain_differs_between_modes() {
    let (a, b) = (0.75f64.sqrt(), 0.5);
    let s = wigner_friend(a, b).unwrap();
    let rs = run_scenario(&s).unwrap();
    let c = table_of(by_name(&rs, "update_rule"));
    let r = table_of(by_name(&rs, "relative_state"));
    assert!(c.max_abs_diff(r).unwrap().0 > 0.1);
}

#[test]
fn ill_formed_scenarios_rejected() {
    let l = SpaceLayout::single("S", 2).unwrap();
    let psi = StateVector::basis(l, 0).unwrap();
    let z = ProjectiveMeasurement::computational("S", &["0", "1"]).unwrap();
    let mut s = same_level_chain(psi.clone(), z.clone(), z.clone(), Mode::Relative).unwrap();
    s.queries.push(Query::new(QueryKind::OutcomeProb {
        actor: "Q".into(),
        outcome: "0".into(),
    }));
    assert!(matches!(
        run_scenario(&s),
        Err(formalism_core::Error::UnknownActor(a)) if a == "Q"
    ));
    let wrong = ProjectiveMeasurement::computational("T", &["0", "1"]).unwrap();
    assert!(run_scenario(&same_level_chain(psi, z, wrong, Mode::Relative).unwrap()).is_err());
    let _ = C64::new(0.0, 0.0);
}
