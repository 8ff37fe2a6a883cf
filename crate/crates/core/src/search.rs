//! Direct search for RUS circuits.
//!
//! Two templates are supported. `TwoCz` places canonical {H,T} factors and
//! restricted Cliffords on one ancilla around two CZ gates and evaluates the
//! outcome blocks in closed form. `Generic` enumerates pruned gate words.
//! Both expose a flat index space that shards split into contiguous ranges;
//! the merge keeps, per EquivKey, the candidate with the least exact expected
//! T count, then the fewest gates, then the least circuit text, so results do not depend on how
//! the space was split.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::canonical::{canonical_by_t_count, CanonicalSeq, RestrictionSets};
use crate::clifford::{self, projective_normalize, word_to_gates, ProjectiveMatrix};
use crate::gates::{Circuit, Gate, GateKind, RingMatrix};
use crate::ring::{QuadReal, RingScalar};
use crate::rus::{self, RusAnalysis};
use crate::{Int, Key, Ratio};

type Fast = i64;
type FScalar = RingScalar<Fast>;
type FMatrix = RingMatrix<Fast>;

/// Default raw T budget for desk-scale runs.
pub const DEFAULT_MAX_T_BUDGET: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenericParams {
    pub ancillas: usize,
    pub max_len: usize,
    pub t_budget: usize,
    pub cnot: bool,
    /// Depth of the prefixes that define work items.
    pub prefix_depth: usize,
}

impl GenericParams {
    pub fn new(ancillas: usize, t_budget: usize, max_len: usize) -> Self {
        GenericParams { ancillas, max_len, t_budget, cnot: false, prefix_depth: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoCzParams {
    pub t_budget: usize,
    pub restrictions: RestrictionSets,
}

impl TwoCzParams {
    pub fn new(t_budget: usize) -> Self {
        TwoCzParams { t_budget, restrictions: crate::canonical::default_restrictions() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SearchTemplate {
    TwoCzCanonical(TwoCzParams),
    GenericGateWords(GenericParams),
}

impl SearchTemplate {
    pub fn t_budget(&self) -> usize {
        match self {
            SearchTemplate::TwoCzCanonical(p) => p.t_budget,
            SearchTemplate::GenericGateWords(p) => p.t_budget,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SearchTemplate::TwoCzCanonical(_) => "two-cz",
            SearchTemplate::GenericGateWords(_) => "generic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchShard {
    pub index: usize,
    pub start: u64,
    pub end: u64,
}

impl SearchShard {
    pub fn len(&self) -> u64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

/// One accepted circuit with its exact analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct Found {
    pub key: Key,
    pub circuit: Circuit,
    pub analysis: RusAnalysis,
    pub expected_t: Ratio,
    pub text: String,
}

impl Found {
    fn better_than(&self, other: &Found) -> bool {
        (&self.expected_t, self.circuit.gates.len(), &self.text) < (&other.expected_t, other.circuit.gates.len(), &other.text)
    }
}

/// A prepared index space for one template.
pub enum SearchSpace {
    TwoCz(TwoCzSpace),
    Generic(GenericSpace),
}

impl SearchSpace {
    pub fn new(template: &SearchTemplate) -> Self {
        match template {
            SearchTemplate::TwoCzCanonical(p) => SearchSpace::TwoCz(TwoCzSpace::new(p)),
            SearchTemplate::GenericGateWords(p) => SearchSpace::Generic(GenericSpace::new(p)),
        }
    }

    pub fn size(&self) -> u64 {
        match self {
            SearchSpace::TwoCz(s) => s.total,
            SearchSpace::Generic(s) => s.prefixes.len() as u64 + 1,
        }
    }

    /// Evaluates every instantiation in `[start, end)`.
    pub fn run_range(&self, start: u64, end: u64) -> Vec<Found> {
        let mut col = Collector::default();
        match self {
            SearchSpace::TwoCz(s) => s.run(start, end, &mut col),
            SearchSpace::Generic(s) => s.run(start, end, &mut col),
        }
        col.finish()
    }
}

/// Splits the space into `n` contiguous, disjoint, exhaustive ranges.
pub fn shard_space(template: &SearchTemplate, n: usize) -> Vec<SearchShard> {
    split_range(SearchSpace::new(template).size(), n)
}

fn split_range(total: u64, n: usize) -> Vec<SearchShard> {
    assert!(n >= 1, "need at least one shard");
    let n64 = n as u64;
    (0..n)
        .map(|i| {
            let i64_ = i as u64;
            SearchShard { index: i, start: total * i64_ / n64, end: total * (i64_ + 1) / n64 }
        })
        .collect()
}

pub fn run_search(template: &SearchTemplate, shard: &SearchShard) -> Vec<Found> {
    run_search_jobs(template, shard, 1)
}

/// Runs one shard, splitting it further over `jobs` rayon tasks.
pub fn run_search_jobs(template: &SearchTemplate, shard: &SearchShard, jobs: usize) -> Vec<Found> {
    let space = SearchSpace::new(template);
    let jobs = jobs.max(1);
    let parts: Vec<Vec<Found>> = split_range(shard.len(), jobs)
        .into_par_iter()
        .map(|r| space.run_range(shard.start + r.start, shard.start + r.end))
        .collect();
    let out = merge(parts);
    log::info!(
        "shard {} [{}, {}) of {}: {} classes",
        shard.index,
        shard.start,
        shard.end,
        space.size(),
        out.len()
    );
    out
}

/// Union with dedup by EquivKey; associative and commutative.
pub fn merge<I: IntoIterator<Item = Vec<Found>>>(parts: I) -> Vec<Found> {
    let mut best: BTreeMap<Key, Found> = BTreeMap::new();
    for f in parts.into_iter().flatten() {
        match best.get(&f.key) {
            Some(cur) if !f.better_than(cur) => {}
            _ => {
                best.insert(f.key.clone(), f);
            }
        }
    }
    best.into_values().collect()
}

struct Candidate {
    circuit: Circuit,
    analysis: RusAnalysis,
    expected_t: Ratio,
    text: String,
}

#[derive(Default)]
struct Collector {
    best: HashMap<ProjectiveMatrix<Int>, Candidate>,
    accepted: u64,
    rejected_by_full: u64,
}

impl Collector {
    fn offer(&mut self, circuit: Circuit) {
        let analysis = match rus::analyze(&circuit) {
            Ok(Some(a)) => a,
            _ => {
                self.rejected_by_full += 1;
                log::warn!("fast filter accepted a circuit the full analysis rejects: {circuit}");
                return;
            }
        };
        self.accepted += 1;
        let expected_t = analysis.expected_t();
        let norm = projective_normalize(&analysis.u_beta).expect("success block is nonzero");
        if let Some(cur) = self.best.get(&norm) {
            if expected_t > cur.expected_t {
                return;
            }
            if expected_t == cur.expected_t {
                let (n, cn) = (circuit.gates.len(), cur.circuit.gates.len());
                if n > cn || (n == cn && circuit.to_text() >= cur.text) {
                    return;
                }
            }
        }
        let text = circuit.to_text();
        self.best.insert(norm, Candidate { circuit, analysis, expected_t, text });
    }

    fn finish(self) -> Vec<Found> {
        log::debug!("accepted {} candidates ({} rejected by full analysis)", self.accepted, self.rejected_by_full);
        let mut with_keys: Vec<Found> = self
            .best
            .into_values()
            .map(|c| Found { key: c.analysis.key(), circuit: c.circuit, analysis: c.analysis, expected_t: c.expected_t, text: c.text })
            .collect();
        with_keys.sort_by(|a, b| a.text.cmp(&b.text));
        merge([with_keys])
    }
}

/// Fast acceptance test on exact blocks: every nonzero block is a scaled
/// Clifford or a scaled copy of one non-Clifford unitary, which occurs.
fn blocks_pass(blocks: &[FMatrix]) -> bool {
    let t = clifford::table::<Fast>();
    let mut first_success: Option<&FMatrix> = None;
    for b in blocks {
        let e = b.entries();
        if e.iter().all(|x| x.is_zero()) {
            continue;
        }
        // B B† = r I
        let Ok(n0) = e[0].checked_norm_sq().and_then(|x| x.checked_add(&e[1].checked_norm_sq()?)) else {
            return false;
        };
        let Ok(n1) = e[2].checked_norm_sq().and_then(|x| x.checked_add(&e[3].checked_norm_sq()?)) else {
            return false;
        };
        if n0 != n1 {
            return false;
        }
        let Ok(off) = e[0]
            .checked_mul(&e[2].conj())
            .and_then(|x| x.checked_add(&e[1].checked_mul(&e[3].conj())?))
        else {
            return false;
        };
        if !off.is_zero() {
            return false;
        }
        if t.find(b).is_some() {
            continue;
        }
        match first_success {
            None => first_success = Some(b),
            Some(f) => {
                if clifford::mutually_proportional(b, f).is_none() {
                    return false;
                }
            }
        }
    }
    first_success.is_some()
}

// ---------------------------------------------------------------------------
// two-CZ template

#[derive(Clone)]
struct SlotOption {
    /// Ancilla (or data) gates in time order, on qubit 0.
    gates: Vec<Gate>,
    mat: FMatrix,
}

struct Group {
    seqs: [CanonicalSeq; 3],
    s1: Arc<Vec<SlotOption>>,
    s2: Arc<Vec<SlotOption>>,
    d: Arc<Vec<SlotOption>>,
    s3: Arc<Vec<SlotOption>>,
}

impl Group {
    fn size(&self) -> u64 {
        (self.s1.len() * self.s2.len() * self.d.len() * self.s3.len()) as u64
    }
}

pub struct TwoCzSpace {
    groups: Vec<Group>,
    offsets: Vec<u64>,
    total: u64,
}

fn word_gates(word: &str) -> Vec<Gate> {
    word_to_gates(word, 0)
}

fn apply_gates(m: &mut FMatrix, gates: &[Gate]) {
    for g in gates {
        m.apply_gate(g, 1);
    }
}

/// `g_outer · C · g_inner` for every pair, deduped by `key`.
fn slot_options<K: std::hash::Hash + Eq>(
    inner: &[String],
    seq: &CanonicalSeq,
    outer: &[String],
    key: impl Fn(&FMatrix) -> K,
) -> Vec<SlotOption> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for gi in inner {
        for go in outer {
            let mut gates = word_gates(gi);
            gates.extend(seq.gates(0));
            gates.extend(word_gates(go));
            let mut mat = FMatrix::identity(2);
            apply_gates(&mut mat, &gates);
            if seen.insert(key(&mat)) {
                out.push(SlotOption { gates, mat });
            }
        }
    }
    out
}

fn only(words: &[String]) -> Vec<String> {
    words.to_vec()
}

fn state_key(m: &FMatrix) -> ProjectiveMatrix<Fast> {
    let z = FScalar::zero();
    let col = FMatrix::m2(m.get(0, 0).clone(), z.clone(), m.get(1, 0).clone(), z);
    projective_normalize(&col).expect("unitary column")
}

fn matrix_key(m: &FMatrix) -> ProjectiveMatrix<Fast> {
    projective_normalize(m).expect("unitary")
}

fn rows_key(m: &FMatrix) -> (ProjectiveMatrix<Fast>, ProjectiveMatrix<Fast>) {
    let z = FScalar::zero();
    let r0 = FMatrix::m2(m.get(0, 0).clone(), m.get(0, 1).clone(), z.clone(), z.clone());
    let r1 = FMatrix::m2(m.get(1, 0).clone(), m.get(1, 1).clone(), z.clone(), z);
    (projective_normalize(&r0).expect("row"), projective_normalize(&r1).expect("row"))
}

impl TwoCzSpace {
    pub fn new(p: &TwoCzParams) -> Self {
        let r = &p.restrictions;
        let canon = canonical_by_t_count(p.t_budget);
        let ident = vec!["I".to_string()];
        let mut s1_cache: HashMap<CanonicalSeq, Arc<Vec<SlotOption>>> = HashMap::new();
        let mut s2_cache: HashMap<CanonicalSeq, Arc<Vec<SlotOption>>> = HashMap::new();
        let mut s3_cache: HashMap<CanonicalSeq, Arc<Vec<SlotOption>>> = HashMap::new();
        let empty = CanonicalSeq::empty();
        let d = Arc::new(slot_options(&only(&r.data_between), &empty, &ident, matrix_key));
        let mut groups = Vec::new();
        for n1 in 0..=p.t_budget {
            for n2 in 0..=p.t_budget - n1 {
                for n3 in 0..=p.t_budget - n1 - n2 {
                    if n1 + n2 + n3 == 0 {
                        continue;
                    }
                    for c1 in &canon[n1] {
                        for c2 in &canon[n2] {
                            for c3 in &canon[n3] {
                                let s1 = s1_cache
                                    .entry(c1.clone())
                                    .or_insert_with(|| {
                                        let outer = if c1.t_count() == 0 { &ident } else { &r.full };
                                        Arc::new(slot_options(&r.prep, c1, outer, state_key))
                                    })
                                    .clone();
                                let s2 = s2_cache
                                    .entry(c2.clone())
                                    .or_insert_with(|| {
                                        Arc::new(if c2.t_count() == 0 {
                                            slot_options(&r.between_empty, c2, &ident, matrix_key)
                                        } else {
                                            slot_options(&r.after_cz, c2, &r.before_cz, matrix_key)
                                        })
                                    })
                                    .clone();
                                let s3 = s3_cache
                                    .entry(c3.clone())
                                    .or_insert_with(|| {
                                        let inner = if c3.t_count() == 0 { &ident } else { &r.full };
                                        Arc::new(slot_options(inner, c3, &r.measure, rows_key))
                                    })
                                    .clone();
                                groups.push(Group {
                                    seqs: [c1.clone(), c2.clone(), c3.clone()],
                                    s1,
                                    s2,
                                    d: d.clone(),
                                    s3,
                                });
                            }
                        }
                    }
                }
            }
        }
        let mut offsets = Vec::with_capacity(groups.len());
        let mut total = 0u64;
        for g in &groups {
            offsets.push(total);
            total += g.size();
        }
        TwoCzSpace { groups, offsets, total }
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    fn run(&self, start: u64, end: u64, col: &mut Collector) {
        let z = FMatrix::m2(FScalar::one(), FScalar::zero(), FScalar::zero(), -FScalar::one());
        let i2 = FMatrix::identity(2);
        let zp = |y: usize| if y == 1 { &z } else { &i2 };
        for (gi, g) in self.groups.iter().enumerate() {
            let (g0, g1) = (self.offsets[gi], self.offsets[gi] + g.size());
            let (lo, hi) = (start.max(g0), end.min(g1));
            if lo >= hi {
                continue;
            }
            let n4 = g.s3.len() as u64;
            let n3 = g.d.len() as u64;
            let n2 = g.s2.len() as u64;
            let mut idx = lo - g0;
            while idx < hi - g0 {
                let i4 = idx % n4;
                let rest = idx / n4;
                let (i3, rest) = (rest % n3, rest / n3);
                let (i2_, i1) = (rest % n2, rest / n2);
                let a = &g.s1[i1 as usize].mat;
                let m2 = &g.s2[i2_ as usize].mat;
                let dm = &g.d[i3 as usize].mat;
                // E_y = Σ_x M2[y][x] a_x Z^y D Z^x
                let mut e = [FMatrix::zeros(2, 2), FMatrix::zeros(2, 2)];
                let mut overflow = false;
                for (y, ey) in e.iter_mut().enumerate() {
                    for x in 0..2 {
                        let c = m2.get(y, x).checked_mul(a.get(x, 0));
                        let Ok(c) = c else {
                            overflow = true;
                            continue;
                        };
                        if c.is_zero() {
                            continue;
                        }
                        let term = zp(y).mul(dm).mul(zp(x)).scalar_mul(&c);
                        *ey = ey.add(&term);
                    }
                }
                let stop = (hi - g0).min((idx / n4 + 1) * n4);
                for j4 in i4..(i4 + (stop - idx)) {
                    let m3 = &g.s3[j4 as usize].mat;
                    let blocks: Vec<FMatrix> = (0..2)
                        .map(|j| e[0].scalar_mul(m3.get(j, 0)).add(&e[1].scalar_mul(m3.get(j, 1))))
                        .collect();
                    if !overflow && blocks_pass(&blocks) {
                        col.offer(self.circuit(g, i1 as usize, i2_ as usize, i3 as usize, j4 as usize));
                    }
                }
                idx = stop;
            }
        }
    }

    fn circuit(&self, g: &Group, i1: usize, i2: usize, i3: usize, i4: usize) -> Circuit {
        let mut gates: Vec<Gate> = g.s1[i1].gates.clone();
        gates.push(Gate::two(GateKind::CZ, 0, 1));
        gates.extend(g.d[i3].gates.iter().map(|x| Gate::one(x.kind, 1)));
        gates.extend(g.s2[i2].gates.iter().cloned());
        gates.push(Gate::two(GateKind::CZ, 0, 1));
        gates.extend(g.s3[i4].gates.iter().cloned());
        Circuit::with_gates(2, vec![0], gates).expect("template circuit is valid")
    }

    /// Canonical factor triples in index order, with group sizes.
    pub fn groups(&self) -> Vec<([String; 3], u64)> {
        self.groups
            .iter()
            .map(|g| ([g.seqs[0].to_string(), g.seqs[1].to_string(), g.seqs[2].to_string()], g.size()))
            .collect()
    }
}

// ---------------------------------------------------------------------------
// generic template

pub struct GenericSpace {
    params: GenericParams,
    width: usize,
    alphabet: Vec<Gate>,
    prefixes: Vec<Vec<u8>>,
}

#[derive(Clone)]
struct WordState {
    cols: FMatrix,
    t: usize,
    /// Ancillas still in |0⟩ up to phase.
    fresh: u32,
    data_touched: bool,
}

fn gate_rank(g: &Gate) -> (u8, usize, usize, u8) {
    match g.kind {
        GateKind::CZ => (0, g.qubits[0], g.qubits[1], 0),
        GateKind::CNOT => (1, g.qubits[0], g.qubits[1], 0),
        k => {
            let r = match k {
                GateKind::H => 0,
                GateKind::S => 1,
                _ => 2,
            };
            (2, g.qubits[0], 0, r)
        }
    }
}

fn commute(a: &Gate, b: &Gate) -> bool {
    let disjoint = a.qubits.iter().all(|q| !b.qubits.contains(q));
    disjoint || (a.kind.is_diagonal() && b.kind.is_diagonal())
}

impl GenericSpace {
    pub fn new(p: &GenericParams) -> Self {
        let width = p.ancillas + 1;
        let mut alphabet = Vec::new();
        for a in 0..width {
            for b in a + 1..width {
                alphabet.push(Gate::two(GateKind::CZ, a, b));
            }
        }
        if p.cnot {
            for a in 0..width {
                for b in 0..width {
                    if a != b {
                        alphabet.push(Gate::two(GateKind::CNOT, a, b));
                    }
                }
            }
        }
        for q in 0..width {
            for k in [GateKind::H, GateKind::S, GateKind::T] {
                alphabet.push(Gate::one(k, q));
            }
        }
        let mut s = GenericSpace { params: p.clone(), width, alphabet, prefixes: Vec::new() };
        let depth = p.prefix_depth.min(p.max_len);
        let mut prefixes = Vec::new();
        let mut word = Vec::new();
        s.collect_prefixes(&mut word, &s.initial(), depth, &mut prefixes);
        s.prefixes = prefixes;
        s
    }

    fn initial(&self) -> WordState {
        let rows = 1usize << self.width;
        let mut cols = FMatrix::zeros(rows, 2);
        // ancillas are qubits 0..m, data is the last qubit
        cols.set(0, 0, FScalar::one());
        cols.set(1, 1, FScalar::one());
        WordState { cols, t: 0, fresh: (1u32 << self.params.ancillas) - 1, data_touched: false }
    }

    fn data(&self) -> usize {
        self.width - 1
    }

    /// The state after appending `g`, or `None` if the word is pruned.
    fn step(&self, word: &[u8], st: &WordState, gi: u8) -> Option<WordState> {
        let g = &self.alphabet[gi as usize];
        if g.kind.is_t() && st.t >= self.params.t_budget {
            return None;
        }
        if let Some(&pi) = word.last() {
            let prev = &self.alphabet[pi as usize];
            if prev == g && matches!(g.kind, GateKind::H | GateKind::T | GateKind::CZ | GateKind::CNOT) {
                return None;
            }
            if commute(prev, g) && gate_rank(g) < gate_rank(prev) {
                return None;
            }
            if g.kind == GateKind::S && word.len() >= 3 && word[word.len() - 3..].iter().all(|&x| x == gi) {
                return None;
            }
        }
        let fresh = |q: usize| q < self.params.ancillas && st.fresh & (1 << q) != 0;
        match g.kind {
            GateKind::CZ if g.qubits.iter().any(|&q| fresh(q)) => return None,
            GateKind::CNOT if fresh(g.qubits[0]) => return None,
            GateKind::S | GateKind::T if fresh(g.qubits[0]) => return None,
            _ => {}
        }
        let d = self.data();
        if !st.data_touched && g.qubits == [d] && matches!(g.kind, GateKind::H | GateKind::S) {
            return None;
        }
        let mut next = st.clone();
        next.cols.apply_gate(g, self.width);
        if g.kind.is_t() {
            next.t += 1;
        }
        if g.kind == GateKind::H && g.qubits[0] < self.params.ancillas {
            next.fresh &= !(1 << g.qubits[0]);
        }
        if g.kind == GateKind::CNOT && g.qubits[1] < self.params.ancillas {
            next.fresh &= !(1 << g.qubits[1]);
        }
        if g.qubits.contains(&d) {
            next.data_touched = true;
        }
        Some(next)
    }

    fn collect_prefixes(&self, word: &mut Vec<u8>, st: &WordState, depth: usize, out: &mut Vec<Vec<u8>>) {
        if word.len() == depth {
            out.push(word.clone());
            return;
        }
        for gi in 0..self.alphabet.len() as u8 {
            if let Some(next) = self.step(word, st, gi) {
                word.push(gi);
                self.collect_prefixes(word, &next, depth, out);
                word.pop();
            }
        }
    }

    fn worth_analyzing(&self, word: &[u8], st: &WordState) -> bool {
        if st.t == 0 {
            return false;
        }
        let Some(&li) = word.last() else { return false };
        let last = &self.alphabet[li as usize];
        let d = self.data();
        // trailing data Cliffords and trailing diagonal ancilla gates change nothing
        !(last.qubits == [d] && !last.kind.is_t()
            || last.kind.arity() == 1 && last.qubits[0] != d && last.kind.is_diagonal())
    }

    fn visit(&self, word: &mut Vec<u8>, st: &WordState, extend: bool, col: &mut Collector) {
        if self.worth_analyzing(word, st) {
            let ancillas: Vec<usize> = (0..self.params.ancillas).collect();
            let blocks = rus::raw_blocks(&st.cols, self.width, &ancillas, self.data());
            if blocks_pass(&blocks) {
                let gates = word.iter().map(|&i| self.alphabet[i as usize].clone()).collect();
                col.offer(Circuit::with_gates(self.width, ancillas, gates).expect("valid word"));
            }
        }
        if !extend || word.len() >= self.params.max_len {
            return;
        }
        for gi in 0..self.alphabet.len() as u8 {
            if let Some(next) = self.step(word, st, gi) {
                word.push(gi);
                self.visit(word, &next, true, col);
                word.pop();
            }
        }
    }

    fn visit_short(&self, word: &mut Vec<u8>, st: &WordState, depth: usize, col: &mut Collector) {
        if word.len() == depth {
            return;
        }
        if !word.is_empty() {
            self.visit(word, st, false, col);
        }
        for gi in 0..self.alphabet.len() as u8 {
            if let Some(next) = self.step(word, st, gi) {
                word.push(gi);
                self.visit_short(word, &next, depth, col);
                word.pop();
            }
        }
    }

    fn run(&self, start: u64, end: u64, col: &mut Collector) {
        let depth = self.params.prefix_depth.min(self.params.max_len);
        for item in start..end {
            let mut word = Vec::new();
            if item == 0 {
                // every word shorter than the prefix depth
                self.visit_short(&mut word, &self.initial(), depth, col);
                continue;
            }
            let prefix = &self.prefixes[(item - 1) as usize];
            let mut st = self.initial();
            for &gi in prefix {
                st = self.step(&word, &st, gi).expect("stored prefix is valid");
                word.push(gi);
            }
            self.visit(&mut word, &st, true, col);
        }
    }
}

/// Convenience: run the whole space in one process.
pub fn search_all(template: &SearchTemplate, shards: usize, jobs: usize) -> Vec<Found> {
    let parts: Vec<Vec<Found>> =
        shard_space(template, shards).iter().map(|s| run_search_jobs(template, s, jobs)).collect();
    merge(parts)
}

/// Exact success probability as computed by the fast path, for diagnostics.
pub fn fast_probability(blocks: &[FMatrix]) -> Option<QuadReal<Fast>> {
    let k = blocks.iter().map(|b| b.max_denom_exp()).max()?;
    let mut num = QuadReal::zero();
    for b in blocks {
        num = num.checked_add(&b.mul_sqrt2_pow(k).ok()?.get(0, 0).checked_norm_sq().ok()?).ok()?;
    }
    Some(num.div_pow2(k))
}
