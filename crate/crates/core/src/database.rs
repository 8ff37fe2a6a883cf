//! RUS circuit database: one entry per Clifford class, composite expansion,
//! the Z-rotation angle table and non-axial lookup.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::io::{BufRead, Write};

pub use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clifford::{self, G2_WORDS};
use crate::gates::Circuit;
use crate::rus::{self, RusAnalysis, RusRecord};
use crate::search::Found;
use crate::{Int, Key, Matrix, Ratio};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_MAX_ENTRIES: usize = 250_000;
/// Grid used to compare floating-point class keys.
pub const KEY_QUANTUM: f64 = 1e-11;

#[derive(Debug, Error)]
pub enum DbError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("unsupported schema version {0}")]
    Schema(u32),
    #[error("entry {0} failed re-analysis")]
    Analysis(String),
}

/// Dense 2×2 complex matrix, row-major.
pub type U2 = [Complex64; 4];

pub fn mul2(a: &U2, b: &U2) -> U2 {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

pub fn dagger2(a: &U2) -> U2 {
    [a[0].conj(), a[2].conj(), a[1].conj(), a[3].conj()]
}

pub fn rz(theta: f64) -> U2 {
    let z = Complex64::new(0.0, 0.0);
    [Complex64::from_polar(1.0, -theta / 2.0), z, z, Complex64::from_polar(1.0, theta / 2.0)]
}

pub fn hadamard() -> U2 {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [h, h, h, -h]
}

pub fn to_u2(m: &Matrix) -> U2 {
    let v = m.to_c64();
    [v[0], v[1], v[2], v[3]]
}

/// Scales a matrix proportional to a unitary onto a unitary.
pub fn normalize_u2(m: &U2) -> U2 {
    let n = ((m[0].norm_sqr() + m[1].norm_sqr() + m[2].norm_sqr() + m[3].norm_sqr()) / 2.0).sqrt();
    m.map(|x| x / n)
}

/// `D(U,V) = sqrt((2 - |Tr(U†V)|) / 2)`.
pub fn fowler_distance(u: &U2, v: &U2) -> f64 {
    let tr = u[0].conj() * v[0] + u[2].conj() * v[2] + u[1].conj() * v[1] + u[3].conj() * v[3];
    ((2.0 - tr.norm()) / 2.0).max(0.0).sqrt()
}

/// Distance between `R_Z(a)` and `R_Z(b)`.
pub fn z_distance(a: f64, b: f64) -> f64 {
    (1.0 - ((a - b) / 2.0).cos().abs()).max(0.0).sqrt()
}

fn clifford_u2() -> &'static [U2; 24] {
    static CACHE: std::sync::OnceLock<[U2; 24]> = std::sync::OnceLock::new();
    CACHE.get_or_init(|| {
        let t = clifford::table::<Int>();
        std::array::from_fn(|i| to_u2(t.matrix(i)))
    })
}

pub fn clifford_matrix(index: usize) -> U2 {
    clifford_u2()[index]
}

/// Left factors: every Clifford is `d·g` with `d ∈ G₁`, `g ∈ G₂`.
fn g2_indices() -> &'static [usize] {
    static CACHE: std::sync::OnceLock<Vec<usize>> = std::sync::OnceLock::new();
    CACHE.get_or_init(|| {
        let t = clifford::table::<Int>();
        G2_WORDS.iter().map(|w| t.index_of_word(w).expect("G2 word in table")).collect()
    })
}

/// Right factors: inverses of `G₂`, so every Clifford is `g⁻¹·d`.
fn g2_right_indices() -> &'static [usize] {
    static CACHE: std::sync::OnceLock<Vec<usize>> = std::sync::OnceLock::new();
    CACHE.get_or_init(|| {
        let t = clifford::table::<Int>();
        g2_indices().iter().map(|&g| t.inverse(g)).collect()
    })
}

/// ZXZ Euler angles: `U ∝ R_Z(a)·R_X(b)·R_Z(c)` with `b ∈ [0, π]`; when `b`
/// is 0 or π the rotation is folded into `a` and `c = 0`.
pub fn zxz_euler(u: &U2) -> (f64, f64, f64) {
    let eps = 1e-12;
    let (c0, s0) = (u[0].norm(), u[2].norm());
    if s0 <= eps {
        return ((u[3] * u[0].conj()).arg(), 0.0, 0.0);
    }
    if c0 <= eps {
        return ((u[2] * u[1].conj()).arg(), PI, 0.0);
    }
    let b = 2.0 * s0.atan2(c0);
    let a = (Complex64::i() * u[2] * u[0].conj()).arg();
    let c = (u[3] * u[0].conj()).arg() - a;
    (a, b, c)
}

fn rem(x: f64, m: f64) -> f64 {
    let r = x.rem_euclid(m);
    if m - r < 1e-13 {
        0.0
    } else {
        r
    }
}

/// Reduces an axial angle to `[0, π/4]`: `θ mod π/2`, then `θ → π/2 − θ`
/// above `π/4`.
pub fn reduce_angle(theta: f64) -> f64 {
    reduce_angle_with(theta).0
}

/// `θ = sign·r + quarter·π/2` with the reduced `r`.
pub fn reduce_angle_with(theta: f64) -> (f64, i8, i64) {
    let mut q = (theta / FRAC_PI_2).floor();
    let mut r = theta - q * FRAC_PI_2;
    if FRAC_PI_2 - r < 1e-13 {
        r = 0.0;
        q += 1.0;
    }
    if r > FRAC_PI_4 {
        (FRAC_PI_2 - r, -1, q as i64 + 1)
    } else {
        (r, 1, q as i64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonAxialKey {
    pub theta: [f64; 3],
}

/// Class key for floating-point unitaries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassKey {
    Axial(f64),
    NonAxial(NonAxialKey),
}

impl ClassKey {
    pub fn quantized(&self) -> (u8, [i64; 3]) {
        let q = |x: f64| (x / KEY_QUANTUM).round() as i64;
        match self {
            ClassKey::Axial(a) => (0, [q(*a), 0, 0]),
            ClassKey::NonAxial(k) => (1, k.theta.map(q)),
        }
    }

    pub fn is_axial(&self) -> bool {
        matches!(self, ClassKey::Axial(_))
    }

    pub fn angle(&self) -> Option<f64> {
        match self {
            ClassKey::Axial(a) => Some(*a),
            ClassKey::NonAxial(_) => None,
        }
    }
}

const DIAG_TOL: f64 = 1e-9;

/// Lexicographic minimum of the reduced ZXZ triple over the 64 products
/// `g·U·h⁻¹`, `g, h ∈ G₂`.
pub fn nonaxial_representative(u: &U2) -> NonAxialKey {
    let c = clifford_u2();
    let mut best: Option<[f64; 3]> = None;
    for &l in g2_indices() {
        let lu = mul2(&c[l], u);
        for &r in g2_right_indices() {
            let v = mul2(&lu, &c[r]);
            let (a, b, cc) = zxz_euler(&v);
            let t = [rem(a, FRAC_PI_2), b, rem(cc, FRAC_PI_2)];
            let q = |x: &[f64; 3]| x.map(|y| (y / KEY_QUANTUM).round() as i64);
            if best.as_ref().is_none_or(|cur| q(&t) < q(cur)) {
                best = Some(t);
            }
        }
    }
    NonAxialKey { theta: best.expect("64 candidates") }
}

/// Two-sided Clifford class key of a float unitary.
pub fn class_key(u: &U2) -> ClassKey {
    match classify_axial_f64(u) {
        Some(a) => ClassKey::Axial(a),
        None => ClassKey::NonAxial(nonaxial_representative(u)),
    }
}

/// Reduced angle if some Clifford pair makes `g₁Ug₂` diagonal (tolerance 1e-9).
pub fn classify_axial_f64(u: &U2) -> Option<f64> {
    let c = clifford_u2();
    for &l in g2_indices() {
        let lu = mul2(&c[l], u);
        for &r in g2_right_indices() {
            let v = mul2(&lu, &c[r]);
            if v[1].norm() < DIAG_TOL && v[2].norm() < DIAG_TOL {
                return Some(reduce_angle((v[3] * v[0].conj()).arg()));
            }
        }
    }
    None
}

/// Exact axial test on a β-matrix; the angle is computed from the exact
/// diagonal entries.
pub fn classify_axial(u_beta: &Matrix) -> Option<f64> {
    let t = clifford::table::<Int>();
    for &l in g2_indices() {
        let lu = t.matrix(l).checked_mul(u_beta).ok()?;
        for &r in g2_right_indices() {
            let v = lu.checked_mul(t.matrix(r)).ok()?;
            if v.get(0, 1).is_zero() && v.get(1, 0).is_zero() {
                let a = v.get(0, 0).to_c64();
                let d = v.get(1, 1).to_c64();
                return Some(reduce_angle((d * a.conj()).arg()));
            }
        }
    }
    None
}

/// `U_{p0} · g_0 · U_{p1} · g_1 ⋯ U_{pk}` over base entry ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recipe {
    pub parts: Vec<usize>,
    pub cliffords: Vec<usize>,
}

mod u2_serde {
    use super::U2;
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(u: &U2, s: S) -> Result<S::Ok, S::Error> {
        u.map(|c| [c.re, c.im]).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<U2, D::Error> {
        let v = <[[f64; 2]; 4]>::deserialize(d)?;
        Ok(v.map(|[re, im]| Complex64::new(re, im)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DbEntry {
    pub class_k: usize,
    /// Exact class key; present for searched entries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key: Option<Key>,
    pub class_key: ClassKey,
    pub expected_t: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_t_exact: Option<Ratio>,
    pub variance_t: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_success: Option<f64>,
    #[serde(with = "u2_serde")]
    pub unitary: U2,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circuit: Option<Circuit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis: Option<RusRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recipe: Option<Recipe>,
}

impl DbEntry {
    pub fn from_analysis(circuit: Circuit, analysis: &RusAnalysis) -> Self {
        let u = normalize_u2(&to_u2(&analysis.u_beta));
        let class_key = match classify_axial(&analysis.u_beta) {
            Some(a) => ClassKey::Axial(a),
            None => ClassKey::NonAxial(nonaxial_representative(&u)),
        };
        let exact = analysis.expected_t();
        DbEntry {
            class_k: 1,
            key: Some(analysis.key()),
            class_key,
            expected_t: exact.to_f64(),
            expected_t_exact: Some(exact),
            variance_t: analysis.variance_t(),
            p_success: Some(analysis.p_f64()),
            unitary: u,
            circuit: Some(circuit),
            analysis: Some(analysis.to_record()),
            recipe: None,
        }
    }

    pub fn is_axial(&self) -> bool {
        self.class_key.is_axial()
    }

    fn gate_count(&self) -> usize {
        self.circuit.as_ref().map_or(0, |c| c.gates.len())
    }

    fn text(&self) -> String {
        self.circuit.as_ref().map(|c| c.to_text()).unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DbHeader {
    pub schema_version: u32,
    pub kind: String,
    #[serde(default)]
    pub t_cap: Option<f64>,
    #[serde(default)]
    pub template: Option<serde_json::Value>,
    #[serde(default)]
    pub base_count: usize,
    #[serde(default)]
    pub composite_count: usize,
    #[serde(default)]
    pub truncated: bool,
}

impl Default for DbHeader {
    fn default() -> Self {
        DbHeader {
            schema_version: SCHEMA_VERSION,
            kind: "rus-db".into(),
            t_cap: None,
            template: None,
            base_count: 0,
            composite_count: 0,
            truncated: false,
        }
    }
}

/// Searched (class-1) entries keyed exactly, plus composites from expansion.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Database {
    pub header: DbHeader,
    base: BTreeMap<Key, DbEntry>,
    composites: Vec<DbEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExpandReport {
    pub added: usize,
    pub levels: usize,
    pub truncated: bool,
}

impl std::fmt::Display for Database {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut buf = Vec::new();
        self.write(&mut buf).map_err(|_| std::fmt::Error)?;
        f.write_str(std::str::from_utf8(&buf).map_err(|_| std::fmt::Error)?)
    }
}

impl std::str::FromStr for Database {
    type Err = DbError;

    fn from_str(s: &str) -> Result<Self, DbError> {
        Self::read(s.as_bytes())
    }
}

impl Database {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_found(found: &[Found]) -> Self {
        let mut db = Database::new();
        for f in found {
            db.insert(f.circuit.clone(), &f.analysis);
        }
        db
    }

    /// Keeps the entry with the least exact expected T count per class, ties
    /// broken by gate count and then circuit text. Returns whether the stored entry changed.
    pub fn insert(&mut self, circuit: Circuit, analysis: &RusAnalysis) -> bool {
        let entry = DbEntry::from_analysis(circuit, analysis);
        self.insert_entry(entry)
    }

    pub fn insert_entry(&mut self, entry: DbEntry) -> bool {
        let key = entry.key.clone().expect("searched entries carry an exact key");
        if let Some(cur) = self.base.get(&key) {
            let (a, b) = (entry.expected_t_exact.as_ref(), cur.expected_t_exact.as_ref());
            if (a, entry.gate_count(), entry.text()) >= (b, cur.gate_count(), cur.text()) {
                return false;
            }
        }
        self.base.insert(key, entry);
        self.header.base_count = self.base.len();
        true
    }

    pub fn len(&self) -> usize {
        self.base.len() + self.composites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn base(&self) -> impl Iterator<Item = &DbEntry> {
        self.base.values()
    }

    pub fn composites(&self) -> &[DbEntry] {
        &self.composites
    }

    /// Base entries first (sorted by exact key), then composites.
    pub fn entries(&self) -> impl Iterator<Item = &DbEntry> {
        self.base.values().chain(self.composites.iter())
    }

    pub fn get(&self, id: usize) -> Option<&DbEntry> {
        self.entries().nth(id)
    }

    pub fn base_len(&self) -> usize {
        self.base.len()
    }

    /// Composes entries into class-k products `U₁g₁U₂⋯U_k` with total
    /// expected T count at most `t_cap`, cheapest first, so a truncated run
    /// holds every composite below its final cost horizon. Composites replace
    /// any previous expansion.
    pub fn expand_classk(&mut self, t_cap: f64, max_entries: usize) -> ExpandReport {
        let base: Vec<DbEntry> = self.base.values().cloned().collect();
        let cliffords = clifford_u2();
        let tol = 1e-9;
        let qcost = |c: f64| (c * 1e9).round() as i64;
        // base classes are never displaced by composites
        let mut base_keys: HashMap<(u8, [i64; 3]), f64> = HashMap::new();
        for e in &base {
            let c = base_keys.entry(e.class_key.quantized()).or_insert(f64::INFINITY);
            *c = c.min(e.expected_t);
        }
        let mut order: Vec<usize> = (0..base.len()).filter(|&i| base[i].expected_t <= t_cap + tol).collect();
        order.sort_by(|&a, &b| base[a].expected_t.total_cmp(&base[b].expected_t).then(a.cmp(&b)));
        let mut known: HashMap<(u8, [i64; 3]), usize> = HashMap::new();
        let mut composites: Vec<DbEntry> = Vec::new();
        let mut heap: BinaryHeap<Reverse<(i64, u8, usize)>> = BinaryHeap::new();
        for &i in &order {
            heap.push(Reverse((qcost(base[i].expected_t), 0, i)));
        }
        let mut report = ExpandReport { added: 0, levels: 1, truncated: false };
        'outer: while let Some(Reverse((c, kind, idx))) = heap.pop() {
            let (unitary, cost, variance, recipe) = if kind == 0 {
                let e = &base[idx];
                (e.unitary, e.expected_t, e.variance_t, Recipe { parts: vec![idx], cliffords: vec![] })
            } else {
                let e = &composites[idx];
                if qcost(e.expected_t) != c {
                    continue;
                }
                (e.unitary, e.expected_t, e.variance_t, e.recipe.clone().expect("composite recipe"))
            };
            for (g, gm) in cliffords.iter().enumerate() {
                let ug = mul2(&unitary, gm);
                for &bi in &order {
                    let b = &base[bi];
                    let total = cost + b.expected_t;
                    if total > t_cap + tol {
                        break;
                    }
                    let u = mul2(&ug, &b.unitary);
                    let ck = class_key(&u);
                    let q = ck.quantized();
                    if base_keys.get(&q).is_some_and(|&bc| bc <= total + tol) {
                        continue;
                    }
                    if known.get(&q).is_some_and(|&i| composites[i].expected_t <= total + tol) {
                        continue;
                    }
                    let mut r = recipe.clone();
                    r.parts.push(bi);
                    r.cliffords.push(g);
                    report.levels = report.levels.max(r.parts.len());
                    let entry = DbEntry {
                        class_k: r.parts.len(),
                        key: None,
                        class_key: ck,
                        expected_t: total,
                        expected_t_exact: None,
                        variance_t: variance + b.variance_t,
                        p_success: None,
                        unitary: u,
                        circuit: None,
                        analysis: None,
                        recipe: Some(r),
                    };
                    let slot = match known.get(&q) {
                        Some(&i) => {
                            composites[i] = entry;
                            i
                        }
                        None => {
                            if composites.len() >= max_entries {
                                report.truncated = true;
                                log::warn!("expansion stopped at {max_entries} composites, cost horizon {cost}");
                                break 'outer;
                            }
                            known.insert(q, composites.len());
                            composites.push(entry);
                            composites.len() - 1
                        }
                    };
                    heap.push(Reverse((qcost(total), 1, slot)));
                }
            }
        }
        composites.sort_by(|a, b| {
            a.class_key
                .quantized()
                .cmp(&b.class_key.quantized())
                .then(a.expected_t.total_cmp(&b.expected_t))
        });
        report.added = composites.len();
        self.composites = composites;
        self.header.t_cap = Some(t_cap);
        self.header.composite_count = self.composites.len();
        self.header.truncated = report.truncated;
        report
    }

    /// Float unitary of an entry's recipe, rebuilt from the base entries.
    pub fn recipe_unitary(&self, recipe: &Recipe) -> Option<U2> {
        let base: Vec<&DbEntry> = self.base.values().collect();
        let mut u = base.get(*recipe.parts.first()?)?.unitary;
        for (p, g) in recipe.parts[1..].iter().zip(&recipe.cliffords) {
            u = mul2(&mul2(&u, &clifford_matrix(*g)), &base.get(*p)?.unitary);
        }
        Some(u)
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<(), DbError> {
        let mut header = self.header.clone();
        header.base_count = self.base.len();
        header.composite_count = self.composites.len();
        writeln!(w, "{}", serde_json::to_string(&header).expect("header serializes"))?;
        for e in self.entries() {
            writeln!(w, "{}", serde_json::to_string(e).expect("entry serializes"))?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(r: R) -> Result<Self, DbError> {
        let mut lines = r.lines().enumerate();
        let header: DbHeader = match lines.next() {
            Some((_, l)) => serde_json::from_str(&l?).map_err(|e| DbError::Format { line: 1, msg: e.to_string() })?,
            None => return Err(DbError::Format { line: 1, msg: "missing header".into() }),
        };
        if header.schema_version != SCHEMA_VERSION {
            return Err(DbError::Schema(header.schema_version));
        }
        let mut db = Database { header, ..Default::default() };
        for (i, l) in lines {
            let l = l?;
            if l.trim().is_empty() {
                continue;
            }
            let e: DbEntry =
                serde_json::from_str(&l).map_err(|e| DbError::Format { line: i + 1, msg: e.to_string() })?;
            match &e.key {
                Some(k) => {
                    db.base.insert(k.clone(), e);
                }
                None => db.composites.push(e),
            }
        }
        Ok(db)
    }

    /// Re-analyzes every searched entry and rebuilds the class-1 map.
    pub fn dedupe(&self) -> Result<Database, DbError> {
        let mut out = Database { header: self.header.clone(), ..Default::default() };
        for e in self.base.values() {
            let c = e.circuit.clone().ok_or_else(|| DbError::Analysis("missing circuit".into()))?;
            let a = rus::analyze(&c)
                .ok()
                .flatten()
                .ok_or_else(|| DbError::Analysis(c.to_text()))?;
            out.insert(c, &a);
        }
        out.composites = self.composites.clone();
        Ok(out)
    }

    /// Merges another database's searched entries into this one.
    pub fn merge_base(&mut self, other: &Database) {
        for e in other.base.values() {
            self.insert_entry(e.clone());
        }
    }

    pub fn stats(&self) -> DbStats {
        let mut by_t: BTreeMap<usize, usize> = BTreeMap::new();
        for e in self.base.values() {
            if let Some(a) = &e.analysis {
                *by_t.entry(a.t_count).or_default() += 1;
            }
        }
        let entries: Vec<&DbEntry> = self.entries().collect();
        DbStats {
            schema_version: SCHEMA_VERSION,
            base: self.base.len(),
            composites: self.composites.len(),
            axial: entries.iter().filter(|e| e.is_axial()).count(),
            non_axial: entries.iter().filter(|e| !e.is_axial()).count(),
            base_by_t_count: by_t,
            min_expected_t: entries.iter().map(|e| e.expected_t).fold(None, |m: Option<f64>, x| {
                Some(m.map_or(x, |m| m.min(x)))
            }),
            t_cap: self.header.t_cap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DbStats {
    pub schema_version: u32,
    pub base: usize,
    pub composites: usize,
    pub axial: usize,
    pub non_axial: usize,
    pub base_by_t_count: BTreeMap<usize, usize>,
    pub min_expected_t: Option<f64>,
    pub t_cap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZRotEntry {
    pub angle: f64,
    /// Database entry id; `None` for the identity seed.
    pub entry: Option<usize>,
    /// Base entry ids in product order.
    pub recipe: Vec<usize>,
    pub expected_t: f64,
    pub variance_t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZTable {
    pub entries: Vec<ZRotEntry>,
}

/// Axial entries sorted by reduced angle, cheapest per angle, seeded with
/// the identity.
pub fn build_z_table(db: &Database) -> ZTable {
    let mut best: BTreeMap<i64, ZRotEntry> = BTreeMap::new();
    best.insert(0, ZRotEntry { angle: 0.0, entry: None, recipe: vec![], expected_t: 0.0, variance_t: 0.0 });
    for (id, e) in db.entries().enumerate() {
        let Some(angle) = e.class_key.angle() else { continue };
        let q = (angle / KEY_QUANTUM).round() as i64;
        let recipe = match &e.recipe {
            Some(r) => r.parts.clone(),
            None => vec![id],
        };
        let cand = ZRotEntry { angle, entry: Some(id), recipe, expected_t: e.expected_t, variance_t: e.variance_t };
        match best.get(&q) {
            Some(cur) if cur.expected_t <= cand.expected_t => {}
            _ => {
                best.insert(q, cand);
            }
        }
    }
    ZTable { entries: best.into_values().collect() }
}

impl ZTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Mean over entries of the angular distance to the nearest neighbour.
    pub fn mean_nearest_gap(&self) -> f64 {
        let a: Vec<f64> = self.entries.iter().map(|e| e.angle).collect();
        if a.len() < 2 {
            return FRAC_PI_4;
        }
        let n = a.len();
        let sum: f64 = (0..n)
            .map(|i| {
                let l = if i > 0 { a[i] - a[i - 1] } else { f64::INFINITY };
                let r = if i + 1 < n { a[i + 1] - a[i] } else { f64::INFINITY };
                l.min(r)
            })
            .sum();
        sum / n as f64
    }

    pub fn max_gap(&self) -> f64 {
        let a: Vec<f64> = self.entries.iter().map(|e| e.angle).collect();
        let mut g = a.first().copied().unwrap_or(FRAC_PI_4);
        for w in a.windows(2) {
            g = g.max(w[1] - w[0]);
        }
        g.max(FRAC_PI_4 - a.last().copied().unwrap_or(0.0))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("angle,expected_t,variance_t,entry\n");
        for e in &self.entries {
            let id = e.entry.map(|i| i.to_string()).unwrap_or_default();
            s.push_str(&format!("{:.17},{},{},{}\n", e.angle, e.expected_t, e.variance_t, id));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZLookup {
    pub entry: ZRotEntry,
    /// Distance between `R_Z(reduced target)` and `R_Z(entry.angle)`.
    pub distance: f64,
    pub reduced_angle: f64,
    /// `θ = sign·reduced + quarter·π/2`.
    pub sign: i8,
    pub quarter: i64,
}

/// Cheapest table entry within `eps` of `R_Z(theta)`.
pub fn lookup_z(table: &ZTable, theta: f64, eps: f64) -> Option<ZLookup> {
    if table.entries.is_empty() || eps.is_nan() || eps <= 0.0 {
        return None;
    }
    let (r, sign, quarter) = reduce_angle_with(theta);
    // |cos(Δ/2)| ≥ 1 − ε² bounds the window
    let c = (1.0 - eps * eps).clamp(-1.0, 1.0);
    let half = 2.0 * c.acos() + 1e-12;
    let lo = table.entries.partition_point(|e| e.angle < r - half);
    let hi = table.entries.partition_point(|e| e.angle <= r + half);
    let mut best: Option<(&ZRotEntry, f64)> = None;
    for e in &table.entries[lo..hi] {
        let d = z_distance(r, e.angle);
        if d > eps {
            continue;
        }
        let better = match best {
            None => true,
            Some((b, bd)) => (e.expected_t, d) < (b.expected_t, bd),
        };
        if better {
            best = Some((e, d));
        }
    }
    let (e, d) = best?;
    let check = fowler_distance(&rz(r), &rz(e.angle));
    assert!(check <= eps + 1e-12, "posterior distance check failed");
    Some(ZLookup { entry: e.clone(), distance: d, reduced_angle: r, sign, quarter })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonAxialMatch {
    pub entry: usize,
    pub left: usize,
    pub right: usize,
    pub distance: f64,
    pub expected_t: f64,
    pub variance_t: f64,
}

/// Linear scan over all entries and Clifford pairs; `U ≈ g_left·V·g_right`.
pub fn lookup_nonaxial(db: &Database, u: &U2, eps: f64) -> Option<NonAxialMatch> {
    let c = clifford_u2();
    let mut best: Option<NonAxialMatch> = None;
    for (id, e) in db.entries().enumerate() {
        if best.as_ref().is_some_and(|b| b.expected_t <= e.expected_t) {
            continue;
        }
        let mut found: Option<(usize, usize, f64)> = None;
        for (l, lm) in c.iter().enumerate() {
            let lv = mul2(lm, &e.unitary);
            for (r, rm) in c.iter().enumerate() {
                let d = fowler_distance(u, &mul2(&lv, rm));
                if d <= eps && found.is_none_or(|f| d < f.2) {
                    found = Some((l, r, d));
                }
            }
        }
        if let Some((l, r, d)) = found {
            best = Some(NonAxialMatch {
                entry: id,
                left: l,
                right: r,
                distance: d,
                expected_t: e.expected_t,
                variance_t: e.variance_t,
            });
        }
    }
    best
}
