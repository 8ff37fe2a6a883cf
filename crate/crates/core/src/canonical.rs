//! Canonical middle factors `C` of single-qubit {H, T} circuits `g2·C·g1`
//! and the Clifford restriction sets used by the two-CZ search template.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::clifford::{self, projective_normalize, ProjectiveMatrix};
use crate::gates::{Gate, GateKind, RingMatrix};
use crate::{Int, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Syllable {
    TH,
    SHTH,
}

impl Syllable {
    pub fn name(self) -> &'static str {
        match self {
            Syllable::TH => "TH",
            Syllable::SHTH => "SHTH",
        }
    }

    fn kinds(self) -> &'static [GateKind] {
        match self {
            Syllable::TH => &[GateKind::T, GateKind::H],
            Syllable::SHTH => &[GateKind::S, GateKind::H, GateKind::T, GateKind::H],
        }
    }
}

/// A product of syllables in matrix order, e.g. `TH.SHTH` is `T·H·S·H·T·H`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct CanonicalSeq {
    pub syllables: Vec<Syllable>,
}

impl CanonicalSeq {
    pub fn empty() -> Self {
        CanonicalSeq::default()
    }

    pub fn t_count(&self) -> usize {
        self.syllables.len()
    }

    /// Gates on `qubit` in time order.
    pub fn gates(&self, qubit: usize) -> Vec<Gate> {
        self.syllables
            .iter()
            .flat_map(|s| s.kinds().iter())
            .rev()
            .map(|&k| Gate::one(k, qubit))
            .collect()
    }

    pub fn matrix<I: crate::ring::RingInt>(&self) -> RingMatrix<I> {
        let mut m = RingMatrix::identity(2);
        for g in self.gates(0) {
            m.apply_gate(&g, 1);
        }
        m
    }
}

impl fmt::Display for CanonicalSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = self.syllables.iter().map(|s| s.name()).collect();
        f.write_str(&parts.join("."))
    }
}

impl FromStr for CanonicalSeq {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Ok(CanonicalSeq::empty());
        }
        let syllables = s
            .split('.')
            .map(|p| match p {
                "TH" => Ok(Syllable::TH),
                "SHTH" => Ok(Syllable::SHTH),
                other => Err(format!("unknown syllable '{other}'")),
            })
            .collect::<Result<_, _>>()?;
        Ok(CanonicalSeq { syllables })
    }
}

impl Serialize for CanonicalSeq {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for CanonicalSeq {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Streams one syllable string per two-sided Clifford class of {H, T}
/// circuits, by increasing T count, choosing the lexicographically least
/// string (`TH < SHTH`) within each class.
pub struct CanonicalIter {
    t_max: usize,
    level: usize,
    pending: std::vec::IntoIter<CanonicalSeq>,
    seen: HashSet<ProjectiveMatrix<Int>>,
}

impl CanonicalIter {
    fn absorb_class(&mut self, m: &Matrix) {
        let t = clifford::table::<Int>();
        for g2 in t.elems() {
            let mg = m.mul(&g2.matrix);
            for g1 in t.elems() {
                let p = g1.matrix.mul(&mg);
                self.seen.insert(projective_normalize(&p).expect("class member is nonzero"));
            }
        }
    }

    fn fill_level(&mut self) {
        let n = self.level;
        let mut out = Vec::new();
        for bits in 0..(1u64 << n) {
            // most significant bit first; 0 = TH
            let syllables = (0..n)
                .map(|i| if (bits >> (n - 1 - i)) & 1 == 0 { Syllable::TH } else { Syllable::SHTH })
                .collect();
            let seq = CanonicalSeq { syllables };
            let m: Matrix = seq.matrix();
            let key = projective_normalize(&m).expect("nonzero");
            if self.seen.contains(&key) {
                continue;
            }
            self.absorb_class(&m);
            out.push(seq);
        }
        self.pending = out.into_iter();
    }
}

impl Iterator for CanonicalIter {
    type Item = CanonicalSeq;
    fn next(&mut self) -> Option<CanonicalSeq> {
        loop {
            if let Some(s) = self.pending.next() {
                return Some(s);
            }
            if self.level >= self.t_max {
                return None;
            }
            self.level += 1;
            self.fill_level();
        }
    }
}

pub fn enumerate_canonical(t_max: usize) -> CanonicalIter {
    let mut it = CanonicalIter {
        t_max,
        level: 0,
        pending: vec![CanonicalSeq::empty()].into_iter(),
        seen: HashSet::new(),
    };
    it.absorb_class(&Matrix::identity(2));
    it
}

/// Canonical sequences grouped by exact T count, `0..=t_max`.
pub fn canonical_by_t_count(t_max: usize) -> Vec<Vec<CanonicalSeq>> {
    let mut out = vec![Vec::new(); t_max + 1];
    for s in enumerate_canonical(t_max) {
        out[s.t_count()].push(s);
    }
    out
}

/// Clifford subsets (as words) used at each slot of the two-CZ template.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RestrictionSets {
    /// Cliffords acting on |0⟩, one per stabilizer state.
    pub prep: Vec<String>,
    /// Cliffords before a Z measurement, one per diagonal coset.
    pub measure: Vec<String>,
    /// Ancilla Cliffords right after a CZ: left cosets of `⟨X, Z, S⟩`.
    pub after_cz: Vec<String>,
    /// Ancilla Cliffords right before a CZ: right cosets of `⟨X, Z, S⟩`.
    pub before_cz: Vec<String>,
    /// Data-qubit Cliffords between the two CZs.
    pub data_between: Vec<String>,
    /// Cliffords between two CZs when the canonical slot is empty.
    pub between_empty: Vec<String>,
    pub full: Vec<String>,
}

fn coset_reps(sub: &[usize], left: bool) -> Vec<String> {
    let t = clifford::table::<Int>();
    let mut seen = HashSet::new();
    let mut reps = Vec::new();
    for g in t.elems() {
        let coset: std::collections::BTreeSet<usize> = sub
            .iter()
            .map(|&p| if left { t.mul(g.index, p) } else { t.mul(p, g.index) })
            .collect();
        if seen.insert(coset) {
            reps.push(g.word.clone());
        }
    }
    reps
}

fn subgroup(words: &[&str]) -> Vec<usize> {
    let t = clifford::table::<Int>();
    let gens: Vec<usize> = words.iter().map(|w| t.index_of_word(w).expect("Clifford word")).collect();
    let mut elems = vec![0usize];
    let mut i = 0;
    while i < elems.len() {
        for &g in &gens {
            let p = t.mul(elems[i], g);
            if !elems.contains(&p) {
                elems.push(p);
            }
        }
        i += 1;
    }
    elems
}

/// Every slot ranges over the full Clifford group.
pub fn unrestricted() -> RestrictionSets {
    let full: Vec<String> = clifford::table::<Int>().elems().iter().map(|e| e.word.clone()).collect();
    RestrictionSets {
        prep: full.clone(),
        measure: full.clone(),
        after_cz: full.clone(),
        before_cz: full.clone(),
        data_between: full.clone(),
        between_empty: full.clone(),
        full,
    }
}

pub fn default_restrictions() -> RestrictionSets {
    let t = clifford::table::<Int>();
    let pauli_s = subgroup(&["X", "Z", "S"]);
    let after_cz = coset_reps(&pauli_s, true);
    let before_cz = coset_reps(&pauli_s, false);
    // double cosets P\C/P
    let mut between_empty = Vec::new();
    let mut covered = HashSet::new();
    for g in t.elems() {
        if covered.contains(&g.index) {
            continue;
        }
        for &a in &pauli_s {
            for &b in &pauli_s {
                covered.insert(t.mul(t.mul(a, g.index), b));
            }
        }
        between_empty.push(g.word.clone());
    }
    let s = |v: &[&str]| v.iter().map(|w| w.to_string()).collect::<Vec<_>>();
    RestrictionSets {
        prep: s(&["I", "X", "H", "HX", "SH", "SHX"]),
        measure: s(&["I", "X", "H", "XH", "HSSS", "XHSSS"]),
        data_between: before_cz.clone(),
        after_cz,
        before_cz,
        between_empty,
        full: t.elems().iter().map(|e| e.word.clone()).collect(),
    }
}

impl RestrictionSets {
    /// Instantiations per canonical choice, against the unrestricted
    /// `576` per canonical slot and `24` per data slot (three data slots).
    pub fn reduction_factor(&self) -> f64 {
        let unrestricted = 576f64.powi(3) * 24f64.powi(3);
        let slot1 = (self.full.len() * self.prep.len()) as f64;
        let slot2 = (self.after_cz.len() * self.before_cz.len()) as f64;
        let slot3 = (self.full.len() * self.measure.len()) as f64;
        let data = self.data_between.len() as f64;
        unrestricted / (slot1 * slot2 * slot3 * data)
    }

    pub fn indices(words: &[String]) -> Vec<usize> {
        let t = clifford::table::<Int>();
        words.iter().map(|w| t.index_of_word(w).expect("Clifford word")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_counts() {
        let counts: Vec<usize> = (0..=7).map(|t| enumerate_canonical(t).count()).collect();
        assert_eq!(counts, vec![1, 2, 3, 4, 5, 7, 11, 19]);
        let only: Vec<CanonicalSeq> = enumerate_canonical(0).collect();
        assert_eq!(only, vec![CanonicalSeq::empty()]);
    }

    #[test]
    fn least_strings_come_first() {
        let seqs: Vec<String> = enumerate_canonical(3).map(|s| s.to_string()).collect();
        assert_eq!(seqs, vec!["", "TH", "TH.TH", "TH.TH.TH"]);
    }

    #[test]
    fn text_round_trip() {
        let s: CanonicalSeq = "TH.SHTH.TH".parse().unwrap();
        assert_eq!(s.to_string(), "TH.SHTH.TH");
        assert_eq!(s.t_count(), 3);
        assert!("TX".parse::<CanonicalSeq>().is_err());
    }

    #[test]
    fn seq_gates_match_matrix() {
        let s: CanonicalSeq = "SHTH".parse().unwrap();
        let t = GateKind::T.matrix2::<Int>().unwrap();
        let h = GateKind::H.matrix2::<Int>().unwrap();
        let sm = GateKind::S.matrix2::<Int>().unwrap();
        assert_eq!(s.matrix::<Int>(), sm.mul(&h).mul(&t).mul(&h));
    }

    #[test]
    fn restriction_sizes() {
        let r = default_restrictions();
        assert_eq!(r.prep.len(), 6);
        assert_eq!(r.measure.len(), 6);
        assert_eq!(r.full.len(), 24);
        assert_eq!(r.after_cz.len(), 3);
        assert_eq!(r.before_cz.len(), 3);
        assert_eq!(r.between_empty.len(), 2);
        assert!(r.reduction_factor() > 1e5);
        // every set names distinct Clifford classes
        for set in [&r.prep, &r.measure] {
            let mut idx = RestrictionSets::indices(set);
            idx.sort_unstable();
            idx.dedup();
            assert_eq!(idx.len(), set.len());
        }
    }

    #[test]
    fn prep_set_reaches_all_stabilizer_states() {
        let r = default_restrictions();
        let states: HashSet<ProjectiveMatrix<Int>> = RestrictionSets::indices(&r.prep)
            .into_iter()
            .map(|i| {
                let m = clifford::table::<Int>().matrix(i);
                // first column padded into a 2x2 to reuse the normalizer
                let z = crate::Scalar::zero();
                let col = Matrix::m2(m.get(0, 0).clone(), z.clone(), m.get(1, 0).clone(), z);
                projective_normalize(&col).unwrap()
            })
            .collect();
        assert_eq!(states.len(), 6);
    }

    #[test]
    fn measure_set_covers_diagonal_cosets() {
        let t = clifford::table::<Int>();
        let diag = subgroup(&["S"]);
        let r = default_restrictions();
        let mut cosets = HashSet::new();
        for g in RestrictionSets::indices(&r.measure) {
            let c: std::collections::BTreeSet<usize> = diag.iter().map(|&d| t.mul(d, g)).collect();
            cosets.insert(c);
        }
        assert_eq!(cosets.len(), 6);
    }
}
