//! The single-qubit Clifford group and Clifford-equivalence keys.

use std::any::{Any, TypeId};
use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::gates::{Gate, GateKind, RingMatrix};
use crate::ring::{RingError, RingInt, RingScalar};

pub const CLIFFORD_COUNT: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CliffordError {
    #[error("the zero matrix has no equivalence class")]
    ZeroMatrix,
    #[error("expected a 2x2 matrix")]
    Shape,
    #[error(transparent)]
    Ring(#[from] RingError),
}

#[derive(Clone, Debug)]
pub struct CliffordElem<I: RingInt> {
    pub index: usize,
    pub matrix: RingMatrix<I>,
    /// Product over {H, S} in matrix order; `"I"` for the identity.
    pub word: String,
}

impl<I: RingInt> CliffordElem<I> {
    /// Gates in time order on `qubit` implementing this element.
    pub fn to_gates(&self, qubit: usize) -> Vec<Gate> {
        word_to_gates(&self.word, qubit)
    }
}

/// Time-ordered gates for a matrix-order word over {H, S, X, Z, ...}.
pub fn word_to_gates(word: &str, qubit: usize) -> Vec<Gate> {
    if word == "I" {
        return Vec::new();
    }
    word.chars()
        .rev()
        .map(|ch| {
            let kind = match ch {
                'H' => GateKind::H,
                'S' => GateKind::S,
                'X' => GateKind::X,
                'Y' => GateKind::Y,
                'Z' => GateKind::Z,
                other => panic!("unexpected letter {other} in Clifford word"),
            };
            Gate::one(kind, qubit)
        })
        .collect()
}

/// Outcome of [`proportional_to_clifford`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CliffordMatch<I: RingInt> {
    Zero,
    /// `B = scale · C[index]`.
    Elem { index: usize, scale: RingScalar<I> },
}

impl<I: RingInt> CliffordMatch<I> {
    pub fn index(&self) -> Option<usize> {
        match self {
            CliffordMatch::Zero => None,
            CliffordMatch::Elem { index, .. } => Some(*index),
        }
    }
}

pub struct CliffordTable<I: RingInt> {
    elems: Vec<CliffordElem<I>>,
    mul: Vec<[u8; CLIFFORD_COUNT]>,
    inv: [u8; CLIFFORD_COUNT],
    masks: [u8; CLIFFORD_COUNT],
    g1: Vec<usize>,
    g2: Vec<usize>,
}

fn nonzero_mask<I: RingInt>(m: &RingMatrix<I>) -> u8 {
    m.entries()
        .iter()
        .enumerate()
        .fold(0u8, |acc, (i, x)| if x.is_zero() { acc } else { acc | (1 << i) })
}

/// `a = λ·b` for some nonzero field scalar λ (cross-multiplication test).
pub fn proportional<I: RingInt>(a: &RingMatrix<I>, b: &RingMatrix<I>) -> bool {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return false;
    }
    let (ea, eb) = (a.entries(), b.entries());
    let Some(p) = eb.iter().position(|x| !x.is_zero()) else {
        return false;
    };
    if ea[p].is_zero() {
        return false;
    }
    ea.iter().zip(eb).all(|(x, y)| {
        if x.is_zero() || y.is_zero() {
            return x.is_zero() && y.is_zero();
        }
        x.checked_mul(&eb[p]).ok() == ea[p].checked_mul(y).ok()
    })
}

fn word_matrix<I: RingInt>(word: &str) -> RingMatrix<I> {
    let mut m = RingMatrix::identity(2);
    for g in word_to_gates(word, 0) {
        m.apply_gate(&g, 1);
    }
    m
}

impl<I: RingInt> CliffordTable<I> {
    fn build() -> Self {
        let h = GateKind::H.matrix2::<I>().unwrap();
        let s = GateKind::S.matrix2::<I>().unwrap();
        let mut elems: Vec<CliffordElem<I>> =
            vec![CliffordElem { index: 0, matrix: RingMatrix::identity(2), word: "I".into() }];
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for (gen, name) in [(&h, 'H'), (&s, 'S')] {
                let m = elems[i].matrix.mul(gen);
                if elems.iter().any(|e| proportional(&m, &e.matrix)) {
                    continue;
                }
                let word = if elems[i].word == "I" { name.to_string() } else { format!("{}{name}", elems[i].word) };
                let index = elems.len();
                elems.push(CliffordElem { index, matrix: m, word });
                queue.push_back(index);
            }
        }
        assert_eq!(elems.len(), CLIFFORD_COUNT, "Clifford closure has the wrong size");

        let mut masks = [0u8; CLIFFORD_COUNT];
        for e in &elems {
            masks[e.index] = nonzero_mask(&e.matrix);
        }
        let find = |m: &RingMatrix<I>| -> usize {
            elems.iter().position(|e| proportional(m, &e.matrix)).expect("Clifford group not closed")
        };
        let mut mul = vec![[0u8; CLIFFORD_COUNT]; CLIFFORD_COUNT];
        let mut inv = [0u8; CLIFFORD_COUNT];
        for a in 0..CLIFFORD_COUNT {
            for b in 0..CLIFFORD_COUNT {
                let p = find(&elems[a].matrix.mul(&elems[b].matrix));
                mul[a][b] = p as u8;
                if p == 0 {
                    inv[a] = b as u8;
                }
            }
        }
        let g1 = ["I", "Z", "S", "SZ"].iter().map(|w| find(&word_matrix(w))).collect();
        let g2 = ["I", "H", "X", "XH", "HS", "XHS", "HSH", "XHSH"]
            .iter()
            .map(|w| find(&word_matrix(w)))
            .collect();
        CliffordTable { elems, mul, inv, masks, g1, g2 }
    }

    pub fn elems(&self) -> &[CliffordElem<I>] {
        &self.elems
    }

    pub fn get(&self, index: usize) -> &CliffordElem<I> {
        &self.elems[index]
    }

    pub fn matrix(&self, index: usize) -> &RingMatrix<I> {
        &self.elems[index].matrix
    }

    /// Index of the class of `C[a]·C[b]`.
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a][b] as usize
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inv[a] as usize
    }

    /// The class of an exact 2×2 matrix, if it is proportional to a Clifford.
    pub fn find(&self, m: &RingMatrix<I>) -> Option<usize> {
        let mask = nonzero_mask(m);
        (0..CLIFFORD_COUNT).find(|&i| self.masks[i] == mask && proportional(m, &self.elems[i].matrix))
    }

    pub fn index_of_word(&self, word: &str) -> Option<usize> {
        self.find(&word_matrix(word))
    }

    /// `G1 = {I, Z, S, S†}` as indices.
    pub fn g1(&self) -> &[usize] {
        &self.g1
    }

    /// `G2 = {I, H, X, XH, HS, XHS, HSH, XHSH}` as indices.
    pub fn g2(&self) -> &[usize] {
        &self.g2
    }
}

type TableCache = Mutex<HashMap<TypeId, &'static (dyn Any + Send + Sync)>>;

/// Shared immutable table for the integer backend `I`, built on first use.
pub fn table<I: RingInt>() -> &'static CliffordTable<I> {
    static CACHE: OnceLock<TableCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("Clifford table cache poisoned");
    let entry = guard
        .entry(TypeId::of::<I>())
        .or_insert_with(|| Box::leak(Box::new(CliffordTable::<I>::build())));
    entry.downcast_ref::<CliffordTable<I>>().expect("Clifford table type mismatch")
}

pub fn enumerate_cliffords<I: RingInt>() -> Vec<CliffordElem<I>> {
    table::<I>().elems.clone()
}

pub fn proportional_to_clifford<I: RingInt>(b: &RingMatrix<I>) -> Option<CliffordMatch<I>> {
    if b.rows() != 2 || b.cols() != 2 {
        return None;
    }
    if b.is_zero() {
        return Some(CliffordMatch::Zero);
    }
    let t = table::<I>();
    let index = t.find(b)?;
    let c = t.matrix(index);
    // B·C† = α·I
    let e = b.entries();
    let ce = c.entries();
    let scale = e[0].checked_mul(&ce[0].conj()).ok()?.checked_add(&e[1].checked_mul(&ce[1].conj()).ok()?).ok()?;
    Some(CliffordMatch::Elem { index, scale })
}

/// `λ` with `B1·B2† = λ·I`, when it exists.
pub fn mutually_proportional<I: RingInt>(b1: &RingMatrix<I>, b2: &RingMatrix<I>) -> Option<RingScalar<I>> {
    let p = b1.checked_mul(&b2.dagger()).ok()?;
    let e = p.entries();
    (e[1].is_zero() && e[2].is_zero() && e[0] == e[3]).then(|| e[0].clone())
}

/// `(a + b√2 + i(c + d√2)) / den` in `Q(i, √2)` with `den > 0` and the
/// five integers coprime.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElem<I> {
    pub den: I,
    pub a: I,
    pub b: I,
    pub c: I,
    pub d: I,
}

impl<I: RingInt> FieldElem<I> {
    fn new(a: I, b: I, c: I, d: I, den: I) -> Self {
        let (mut a, mut b, mut c, mut d, mut den) = (a, b, c, d, den);
        if den.is_negative() {
            a = -a;
            b = -b;
            c = -c;
            d = -d;
            den = -den;
        }
        let g = [&b, &c, &d, &den].iter().fold(a.abs(), |g, x| g.gcd(x));
        if a.is_zero() && b.is_zero() && c.is_zero() && d.is_zero() {
            return FieldElem { den: I::one(), a, b, c, d };
        }
        if !g.is_one() && !g.is_zero() {
            a = a / g.clone();
            b = b / g.clone();
            c = c / g.clone();
            d = d / g.clone();
            den = den / g;
        }
        FieldElem { den, a, b, c, d }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero() && self.c.is_zero() && self.d.is_zero()
    }

    pub fn to_c64(&self) -> num_complex::Complex<f64> {
        let f = |v: &I| v.to_f64().unwrap_or(f64::NAN);
        let s2 = std::f64::consts::SQRT_2;
        let den = f(&self.den);
        num_complex::Complex::new((f(&self.a) + f(&self.b) * s2) / den, (f(&self.c) + f(&self.d) * s2) / den)
    }
}

impl<I: RingInt> fmt::Debug for FieldElem<I> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}, {}, {}, {}]", self.a, self.b, self.c, self.d, self.den)
    }
}

impl<I: RingInt + Serialize> Serialize for FieldElem<I> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        (&self.a, &self.b, &self.c, &self.d, &self.den).serialize(s)
    }
}

impl<'de, I: RingInt + Deserialize<'de>> Deserialize<'de> for FieldElem<I> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (a, b, c, dd, den) = <(I, I, I, I, I)>::deserialize(d)?;
        if den.is_zero() {
            return Err(serde::de::Error::custom("zero denominator"));
        }
        Ok(FieldElem::new(a, b, c, dd, den))
    }
}

/// A 2×2 matrix divided by its first nonzero entry (row-major), so that
/// proportional matrices map to the same value.
pub type ProjectiveMatrix<I> = [FieldElem<I>; 4];

/// Canonical representative of the orbit `{λ·g1·U·g2}`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct EquivKey<I: RingInt>(pub ProjectiveMatrix<I>);

impl<I: RingInt + Serialize> Serialize for EquivKey<I> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de, I: RingInt + Deserialize<'de>> Deserialize<'de> for EquivKey<I> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(EquivKey(<[FieldElem<I>; 4]>::deserialize(d)?))
    }
}

fn cm<I: RingInt>(x: &I, y: &I) -> Result<I, RingError> {
    x.checked_mul(y).ok_or(RingError::Overflow)
}

/// Divides every entry by the first nonzero one, exactly.
pub fn projective_normalize<I: RingInt>(m: &RingMatrix<I>) -> Result<ProjectiveMatrix<I>, CliffordError> {
    if m.rows() != 2 || m.cols() != 2 {
        return Err(CliffordError::Shape);
    }
    let e = m.entries();
    let u = e.iter().find(|x| !x.is_zero()).ok_or(CliffordError::ZeroMatrix)?;
    // e/u = e·u*·(X − Y√2)·2^ku / N with |u|² = (X + Y√2)/2^ku and N = X² − 2Y²
    let n2 = u.checked_norm_sq()?;
    let (x, y, ku) = n2.parts();
    let two = I::one() + I::one();
    let n = cm(x, x)?.checked_sub(&cm(&two, &cm(y, y)?)?).ok_or(RingError::Overflow)?;
    let g = RingScalar::new(x.clone(), -y.clone(), I::zero(), I::zero(), 0);
    let w = u.conj().checked_mul(&g)?;
    let mut out = Vec::with_capacity(4);
    for v in e {
        let r = v.checked_mul(&w)?;
        let (a, b, c, d, kr) = r.parts();
        let (a, b, c, d, kr) = if kr % 2 == 1 {
            (cm(b, &two)?, a.clone(), cm(d, &two)?, c.clone(), kr + 1)
        } else {
            (a.clone(), b.clone(), c.clone(), d.clone(), kr)
        };
        let e2 = (kr / 2) as i64 - ku as i64;
        let pow2 = |p: i64| -> Result<I, RingError> {
            let mut acc = I::one();
            for _ in 0..p {
                acc = cm(&acc, &two)?;
            }
            Ok(acc)
        };
        let fe = if e2 >= 0 {
            FieldElem::new(a, b, c, d, cm(&n, &pow2(e2)?)?)
        } else {
            let s = pow2(-e2)?;
            FieldElem::new(cm(&a, &s)?, cm(&b, &s)?, cm(&c, &s)?, cm(&d, &s)?, n.clone())
        };
        out.push(fe);
    }
    Ok(out.try_into().unwrap_or_else(|_| unreachable!()))
}

/// The EquivKey of `U`: the least projective normalization of `g1·U·g2`
/// over all 576 Clifford pairs.
pub fn equivalence_representative<I: RingInt>(u: &RingMatrix<I>) -> Result<EquivKey<I>, CliffordError> {
    if u.rows() != 2 || u.cols() != 2 {
        return Err(CliffordError::Shape);
    }
    if u.is_zero() {
        return Err(CliffordError::ZeroMatrix);
    }
    let t = table::<I>();
    let mut best: Option<ProjectiveMatrix<I>> = None;
    for g2 in t.elems() {
        let ug2 = u.checked_mul(&g2.matrix)?;
        for g1 in t.elems() {
            let p = g1.matrix.checked_mul(&ug2)?;
            let key = projective_normalize(&p)?;
            if best.as_ref().is_none_or(|b| key < *b) {
                best = Some(key);
            }
        }
    }
    Ok(EquivKey(best.expect("Clifford table is nonempty")))
}

/// `(G1, G2)` as Clifford indices; every Clifford is `g1·g2` up to phase.
pub fn g1_g2_factorization<I: RingInt>() -> (Vec<usize>, Vec<usize>) {
    let t = table::<I>();
    (t.g1.clone(), t.g2.clone())
}

/// Words of `G1` and `G2` in the order of [`g1_g2_factorization`].
pub const G1_WORDS: [&str; 4] = ["I", "Z", "S", "Sdg"];
pub const G2_WORDS: [&str; 8] = ["I", "H", "X", "XH", "HS", "XHS", "HSH", "XHSH"];

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type S = RingScalar<i64>;
    type M = RingMatrix<i64>;

    fn gm(kind: GateKind) -> M {
        kind.matrix2().unwrap()
    }

    fn v3() -> M {
        M::m2(S::new(1, 0, 2, 0, 0), S::zero(), S::zero(), S::new(1, 0, -2, 0, 0))
    }

    #[test]
    fn twenty_four_elements() {
        let cl = enumerate_cliffords::<i64>();
        assert_eq!(cl.len(), 24);
        for (i, a) in cl.iter().enumerate() {
            assert!(a.matrix.is_unitary());
            for b in &cl[i + 1..] {
                assert!(!proportional(&a.matrix, &b.matrix));
            }
        }
        let t = table::<i64>();
        for k in [GateKind::H, GateKind::S, GateKind::X, GateKind::Z, GateKind::Y, GateKind::Sdg] {
            assert!(t.find(&gm(k)).is_some(), "{k:?} missing");
        }
        assert_eq!(t.find(&M::identity(2)), Some(0));
        assert!(t.find(&gm(GateKind::T)).is_none());
    }

    #[test]
    fn closure_and_inverses() {
        let t = table::<i64>();
        for a in 0..24 {
            assert_eq!(t.mul(a, t.inverse(a)), 0);
            for b in 0..24 {
                let p = t.matrix(a).mul(t.matrix(b));
                assert!(proportional(&p, t.matrix(t.mul(a, b))));
            }
        }
    }

    #[test]
    fn words_reproduce_matrices() {
        for e in enumerate_cliffords::<i64>() {
            let mut m = M::identity(2);
            for g in e.to_gates(0) {
                m.apply_gate(&g, 1);
            }
            assert_eq!(m, e.matrix, "{}", e.word);
        }
    }

    #[test]
    fn clifford_proportionality_examples() {
        let w = S::omega();
        assert_eq!(
            proportional_to_clifford(&M::identity(2).scalar_mul(&w)),
            Some(CliffordMatch::Elem { index: 0, scale: w })
        );
        let x = gm(GateKind::X);
        let t = table::<i64>();
        match proportional_to_clifford(&x).unwrap() {
            CliffordMatch::Elem { index, scale } => {
                assert_eq!(t.matrix(index).scalar_mul(&scale), x);
            }
            CliffordMatch::Zero => panic!(),
        }
        assert_eq!(proportional_to_clifford(&M::zeros(2, 2)), Some(CliffordMatch::Zero));
        assert_eq!(proportional_to_clifford(&v3()), None);
    }

    #[test]
    fn recovers_every_scaled_clifford() {
        let t = table::<i64>();
        for e in t.elems() {
            for j in 0..8 {
                let a = S::omega_pow(j);
                let b = e.matrix.scalar_mul(&a);
                match proportional_to_clifford(&b).unwrap() {
                    CliffordMatch::Elem { index, scale } => {
                        assert_eq!(index, e.index);
                        assert_eq!(t.matrix(index).scalar_mul(&scale), b);
                    }
                    CliffordMatch::Zero => panic!(),
                }
            }
        }
    }

    #[test]
    fn mutual_proportionality_examples() {
        let b = v3();
        assert!(mutually_proportional(&b, &b).is_some());
        assert!(mutually_proportional(&b, &b.scalar_mul(&S::from_int(2))).is_some());
        assert!(mutually_proportional(&b, &b.dagger()).is_none());
    }

    #[test]
    fn g1_g2_cover_the_group() {
        let t = table::<i64>();
        let (g1, g2) = g1_g2_factorization::<i64>();
        assert_eq!((g1.len(), g2.len()), (4, 8));
        let mut seen = [false; 24];
        for &a in &g1 {
            for &b in &g2 {
                seen[t.mul(a, b)] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
        assert_eq!(t.index_of_word("H"), Some(t.mul(g1[0], g2[1])));
        assert_eq!(t.index_of_word("S"), Some(t.mul(g1[2], g2[0])));
    }

    #[test]
    fn keys_of_cliffords_agree() {
        let ki = equivalence_representative(&M::identity(2)).unwrap();
        assert_eq!(equivalence_representative(&gm(GateKind::X)).unwrap(), ki);
        assert_eq!(equivalence_representative(&gm(GateKind::H).scalar_mul(&S::omega())).unwrap(), ki);
        assert_ne!(equivalence_representative(&gm(GateKind::T)).unwrap(), ki);
        assert!(equivalence_representative(&M::zeros(2, 2)).is_err());
    }

    #[test]
    fn key_is_orbit_invariant() {
        let t = table::<i64>();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let k = equivalence_representative(&v3()).unwrap();
        let hvs = gm(GateKind::H).mul(&v3()).mul(&gm(GateKind::S));
        assert_eq!(equivalence_representative(&hvs).unwrap(), k);
        let base = [
            v3(),
            gm(GateKind::T),
            gm(GateKind::T).mul(&gm(GateKind::H)).mul(&gm(GateKind::T)),
            M::m2(S::one(), S::new(0, 0, 0, 1, 0), S::new(0, 0, 0, 1, 0), S::one()),
        ];
        for _ in 0..1000 {
            let u = &base[rng.gen_range(0..base.len())];
            let (a, b) = (rng.gen_range(0..24), rng.gen_range(0..24));
            let ph = S::omega_pow(rng.gen_range(0..8));
            let v = t.matrix(a).mul(u).mul(t.matrix(b)).scalar_mul(&ph);
            assert_eq!(equivalence_representative(&v).unwrap(), equivalence_representative(u).unwrap());
        }
    }

    #[test]
    fn key_separates_orbits() {
        let a = equivalence_representative(&v3()).unwrap();
        let b = equivalence_representative(&gm(GateKind::T)).unwrap();
        assert_ne!(a, b);
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(serde_json::from_str::<EquivKey<i64>>(&json).unwrap(), a);
    }

    #[test]
    fn projective_normalization_is_scale_free() {
        let u = gm(GateKind::T).mul(&gm(GateKind::H));
        let p = projective_normalize(&u).unwrap();
        let scaled = u.scalar_mul(&S::new(3, 1, -2, 5, 3));
        assert_eq!(projective_normalize(&scaled).unwrap(), p);
        let first = p.iter().find(|x| !x.is_zero()).unwrap();
        assert_eq!(*first, FieldElem { den: 1, a: 1, b: 0, c: 0, d: 0 });
    }
}
