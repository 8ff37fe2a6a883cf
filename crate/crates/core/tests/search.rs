mod common;

use common::*;
use rus_synth::database::Database;
use rus_synth::ring::{QuadRatio, QuadReal};
use rus_synth::search::{merge, run_search, search_all, shard_space, Found, GenericParams, SearchTemplate, TwoCzParams};
use rus_synth::verifier::verify_rus;

fn two_cz(t: usize) -> SearchTemplate {
    SearchTemplate::TwoCzCanonical(TwoCzParams::new(t))
}

fn generic(ancillas: usize, t: usize, len: usize) -> SearchTemplate {
    SearchTemplate::GenericGateWords(GenericParams::new(ancillas, t, len))
}

fn matching<'a>(found: &'a [Found], target: &M2) -> Vec<&'a Found> {
    found.iter().filter(|f| clifford_equivalent(&from_vec(&f.analysis.u_beta.to_c64()), target)).collect()
}

#[test]
fn generic_search_finds_the_gosset_circuit() {
    let found = search_all(&generic(1, 2, 10), 1, 1);
    let hits = matching(&found, &gosset_target());
    assert_eq!(hits.len(), 1);
    assert_eq!(hits[0].analysis.p_success, QuadReal::new(3, 0, 2));
    assert_eq!(hits[0].analysis.t_count, 2);
}

#[test]
fn two_cz_search_finds_v3() {
    let found = search_all(&two_cz(4), 1, 1);
    let hits = matching(&found, &v3_target());
    assert_eq!(hits.len(), 1);
    assert_eq!(hits[0].analysis.p_success, QuadReal::new(5, 0, 3));
    assert_eq!(hits[0].expected_t, QuadRatio::from_parts(32, 0, 5).unwrap());
}

#[test]
fn sqrt7_needs_the_generic_template() {
    let two = search_all(&two_cz(4), 1, 1);
    assert!(matching(&two, &sqrt7_target()).is_empty());
    let found = search_all(&generic(1, 4, 14), 1, 1);
    let hits = matching(&found, &sqrt7_target());
    assert_eq!(hits.len(), 1);
    assert_eq!(hits[0].analysis.p_success, QuadReal::new(7, 0, 3));
    assert_eq!(hits[0].analysis.t_count, 4);
}

#[test]
fn every_found_circuit_passes_the_oracles() {
    for template in [two_cz(5), generic(1, 3, 10), generic(2, 2, 8)] {
        let found = search_all(&template, 2, 1);
        assert!(!found.is_empty());
        for f in &found {
            let r = verify_rus(&f.circuit, &f.analysis, 8, 11);
            assert!(r.pass, "{}: {:?}", f.text, r);
            let bs = blocks(&f.circuit);
            let p: f64 = f.analysis.success_outcomes.iter().map(|&i| block_weight(&bs[i])).sum();
            assert!((p - f.analysis.p_f64()).abs() < 1e-12);
            assert_eq!(f.circuit.t_count(), f.analysis.t_count);
            assert!(f.analysis.t_count <= template.t_budget());
        }
    }
}

#[test]
fn results_do_not_depend_on_sharding() {
    for template in [two_cz(5), generic(1, 3, 9)] {
        let reference = Database::from_found(&search_all(&template, 1, 1)).to_string();
        for shards in [2, 3, 7] {
            assert_eq!(Database::from_found(&search_all(&template, shards, 1)).to_string(), reference);
            assert_eq!(Database::from_found(&search_all(&template, shards, 3)).to_string(), reference);
        }
    }
}

#[test]
fn merge_is_order_independent() {
    let template = two_cz(5);
    let parts: Vec<Vec<Found>> = shard_space(&template, 4).iter().map(|s| run_search(&template, s)).collect();
    let forward = merge(parts.clone());
    let backward = merge(parts.into_iter().rev());
    assert_eq!(forward, backward);
}

#[test]
fn shards_cover_the_space() {
    let template = two_cz(4);
    let shards = shard_space(&template, 5);
    assert_eq!(shards[0].start, 0);
    for w in shards.windows(2) {
        assert_eq!(w[0].end, w[1].start);
    }
    let all = shard_space(&template, 1);
    assert_eq!(shards.last().unwrap().end, all[0].end);
}

#[test]
fn cheapest_circuit_is_kept_per_class() {
    // every class holds the least expected T count any template found
    let a = search_all(&two_cz(4), 1, 1);
    let b = search_all(&generic(1, 4, 12), 1, 1);
    let merged = merge([a.clone(), b.clone()]);
    for f in &merged {
        for g in a.iter().chain(&b).filter(|g| g.key == f.key) {
            assert!(f.expected_t <= g.expected_t);
        }
    }
}
