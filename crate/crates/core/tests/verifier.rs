mod common;

use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rus_synth::rus::analyze;
use rus_synth::search::{search_all, SearchTemplate, TwoCzParams};
use rus_synth::verifier::*;

#[test]
fn simulation_matches_the_test_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for c in [gosset(), v3(), sqrt7(), circuit(3, vec![0, 1], "H0 CNOT0,2 T2 H1 CZ1,2 Sdg2 Y0 X1 Tdg0 MZ0 MZ1")] {
        for _ in 0..5 {
            let psi: Vec<_> = (0..1 << c.width).map(|_| random_qubit::<f64, _>(&mut rng)[0]).collect();
            let ours = simulate::<f64>(&c, &psi);
            let theirs = run(&c, psi);
            for (a, b) in ours.iter().zip(&theirs) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn v3_on_zero() {
    let c = v3();
    let mut s = vec![common::c(0.0, 0.0); 4];
    s[0] = common::c(1.0, 0.0);
    let out = simulate::<f64>(&c, &s);
    // ancilla is qubit 0: rows 0,1 hold outcome 0
    let p0 = out[0].norm_sqr() + out[1].norm_sqr();
    assert!((p0 - 0.625).abs() < 1e-12);
    assert!(out[1].norm() < 1e-12);
    let r = verify_rus(&c, &analyze(&c).unwrap().unwrap(), 32, 1);
    assert!(r.pass, "{r:?}");
    assert!(r.outcomes.iter().all(|o| o.max_state_error <= STATE_TOL && o.max_probability_error <= PROB_TOL));
}

#[test]
fn named_circuits_pass() {
    for c in [gosset(), v3(), sqrt7()] {
        let a = analyze(&c).unwrap().unwrap();
        let r = verify_rus(&c, &a, 64, 2);
        assert!(r.pass, "{c}: {r:?}");
        assert!(r.normalization_error < 1e-12);
    }
}

#[test]
fn wrong_analysis_is_caught() {
    let a = analyze(&gosset()).unwrap().unwrap();
    let r = verify_rus(&v3(), &a, 16, 3);
    assert!(!r.pass);
    // same circuit, tampered success unitary
    let mut b = analyze(&v3()).unwrap().unwrap();
    b.u_beta = analyze(&sqrt7()).unwrap().unwrap().u_beta;
    assert!(!verify_rus(&v3(), &b, 16, 3).pass);
    // same circuit, tampered recovery
    let mut g = analyze(&gosset()).unwrap().unwrap();
    if let Some(r) = g.recoveries.values_mut().next() {
        *r = (*r + 1) % 24;
    }
    for o in g.outcomes.iter_mut() {
        if let rus_synth::rus::Outcome::Failure(x) = o {
            *x = (*x + 1) % 24;
        }
    }
    assert!(!verify_rus(&gosset(), &g, 16, 3).pass);
}

#[test]
fn zero_rounds_is_the_plain_circuit() {
    for c in [gosset(), v3()] {
        let a = analyze(&c).unwrap().unwrap();
        let r = verify_amplification(&c, &a, 0, 8, 4);
        assert!(r.pass, "{r:?}");
        assert!((r.success_probability - a.p_f64()).abs() < 1e-12);
    }
}

#[test]
fn amplification_boosts_a_low_probability_circuit() {
    let found = search_all(&SearchTemplate::TwoCzCanonical(TwoCzParams::new(7)), 1, 1);
    let low = found.iter().find(|f| f.analysis.p_f64() < 1.0 / 3.0).expect("a p < 1/3 class");
    let plan = low.analysis.amplification_plan().unwrap().unwrap();
    assert_eq!(plan.j, 1);
    let r = verify_amplification(&low.circuit, &low.analysis, plan.j, 16, 5);
    assert!(r.pass, "{r:?}");
    assert!((r.success_probability - plan.p_amplified).abs() < 1e-9);
    assert!(r.success_probability > low.analysis.p_f64());
}

#[test]
fn single_precision_backend_runs() {
    let c = sqrt7();
    let a = analyze(&c).unwrap().unwrap();
    let r = verify_rus_with::<f32>(&c, &a, 8, 6);
    // single precision cannot meet the double tolerances but stays close
    assert!(r.outcomes.iter().all(|o| o.max_probability_error < 1e-5 && o.max_state_error < 1e-3));
}
