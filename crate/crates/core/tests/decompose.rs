mod common;

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rus_synth::database::*;
use rus_synth::decompose::*;
use rus_synth::search::{search_all, SearchTemplate, TwoCzParams};
use rus_synth::verifier::{euler_oracle, euler_reconstruct, phase_distance};

fn expanded(t_cap: f64) -> Database {
    let mut db = Database::from_found(&search_all(&SearchTemplate::TwoCzCanonical(TwoCzParams::new(4)), 1, 1));
    db.expand_classk(t_cap, DEFAULT_MAX_ENTRIES);
    db
}

fn haar(rng: &mut ChaCha8Rng) -> U2 {
    let v: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let (a, b, c, d) = (v[0] / n, v[1] / n, v[2] / n, v[3] / n);
    let phase = Complex64::from_polar(1.0, rng.gen_range(0.0..6.0));
    [Complex64::new(a, b), Complex64::new(c, d), Complex64::new(-c, d), Complex64::new(a, -b)].map(|z| z * phase)
}

#[test]
fn v_basis_ratios() {
    for (p, tp, want) in [(13.0, 7.38, 1.13), (17.0, 11.17, 0.83), (29.0, 14.22, 0.77)] {
        let got = cost_v_ratio(p, tp);
        assert!((got - want).abs() <= 0.01, "p={p}: {got}");
    }
}

#[test]
fn closed_form_costs() {
    let log5 = |x: f64| x.ln() / 5f64.ln();
    assert!((cost_bgs(1e-10, V3_EXPECTED_T) - 3.0 * log5(1e10) * 5.26).abs() < 1e-9);
    assert_eq!(wk_gamma(0.003), 2);
    assert_eq!(wk_gamma(0.03), 1);
    assert_eq!(wk_gamma(0.5), 0);
    assert_eq!(wk_gamma(2.0), 0);
    let want = 1.14 * 2.0 * 10f64.log2() + 8.0 * (1e-2 / 1e-10f64).log2();
    assert!((cost_wk(0.003, 1e-10) - want).abs() < 1e-9);
}

#[test]
fn euler_split_agrees_with_quaternion_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..500 {
        let u = haar(&mut rng);
        let (a, b, c) = euler_split(&u);
        assert!(fowler_distance(&u, &euler_compose(a, b, c)) < 1e-6);
        let (oa, ob, oc) = euler_oracle(&u);
        let ours = euler_compose(a, b, c);
        let theirs = euler_reconstruct(oa, ob, oc);
        assert!(phase_distance(&ours, &theirs) < 1e-6);
        assert!(phase_distance(&u, &theirs) < 1e-6);
    }
}

#[test]
fn z_rotations_meet_the_tolerance() {
    let table = build_z_table(&expanded(11.0));
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..200 {
        let theta = rng.gen_range(-2.0 * PI..2.0 * PI);
        let r = decompose_z(&table, theta, 1e-2).unwrap();
        assert!(r.distance <= 1e-2);
        assert!((fowler_distance(&rz(theta), &rz(r.implemented_angle)) - r.distance).abs() < 1e-12);
        assert!(r.interval95 >= 0.0);
    }
}

#[test]
fn euler_error_respects_the_triangle_inequality() {
    let db = expanded(11.0);
    let table = build_z_table(&db);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let u = haar(&mut rng);
        match decompose_u(&db, &table, &u, 0.03, Mode::Euler).unwrap() {
            UDecomposition::Euler { parts, distance, expected_t, .. } => {
                let sum: f64 = parts.iter().map(|p| p.distance).sum();
                assert!(distance <= sum + 1e-9);
                assert!(distance <= 0.03);
                let cost: f64 = parts.iter().map(|p| p.expected_t).sum();
                assert_eq!(cost, expected_t);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}

#[test]
fn auto_mode_is_never_worse() {
    let db = expanded(9.0);
    let table = build_z_table(&db);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..10 {
        let u = haar(&mut rng);
        let euler = decompose_u(&db, &table, &u, 0.1, Mode::Euler);
        let direct = decompose_u(&db, &table, &u, 0.1, Mode::Direct);
        let auto = decompose_u(&db, &table, &u, 0.1, Mode::Auto);
        let best = [&euler, &direct].iter().filter_map(|r| r.as_ref().ok()).map(|r| r.expected_t()).fold(f64::INFINITY, f64::min);
        match auto {
            Ok(a) => {
                assert_eq!(a.expected_t(), best);
                assert!(a.distance() <= 0.1);
            }
            Err(_) => assert!(best.is_infinite()),
        }
    }
}

#[test]
fn rejected_inputs() {
    let db = expanded(6.0);
    let table = build_z_table(&db);
    assert_eq!(decompose_z(&table, 0.3, 0.0).unwrap_err(), DecomposeError::Epsilon(0.0));
    assert!(matches!(decompose_z(&table, 0.3, 1e-9), Err(DecomposeError::Unreachable { .. })));
    let not_unitary = [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
    assert_eq!(decompose_u(&db, &table, &not_unitary, 0.1, Mode::Auto).unwrap_err(), DecomposeError::NotUnitary);
    assert!("sideways".parse::<Mode>().is_err());
}
