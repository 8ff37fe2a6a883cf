//! Circuit representation and exact unitary evaluation.
//!
//! Qubit 0 is the most significant bit of a basis index, so in a two-qubit
//! circuit with ancilla 0 and data qubit 1 the rows of `W` come in
//! consecutive pairs `2i, 2i+1` per ancilla outcome `i`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::ring::{RingError, RingInt, RingScalar};

/// Widest circuit `evaluate` accepts by default.
pub const DEFAULT_MAX_WIDTH: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("circuit width {width} exceeds the supported maximum {max}")]
    WidthOverflow { width: usize, max: usize },
    #[error("invalid gate {0}")]
    InvalidGate(String),
    #[error("could not parse circuit: {0}")]
    Parse(String),
    #[error("invalid ancilla layout: {0}")]
    Ancillas(String),
    #[error(transparent)]
    Ring(#[from] RingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    H,
    S,
    Sdg,
    T,
    Tdg,
    X,
    Y,
    Z,
    CZ,
    CNOT,
}

impl GateKind {
    pub const ALL: [GateKind; 10] = [
        GateKind::H,
        GateKind::S,
        GateKind::Sdg,
        GateKind::T,
        GateKind::Tdg,
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::CZ,
        GateKind::CNOT,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateKind::CZ | GateKind::CNOT => 2,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::S => "S",
            GateKind::Sdg => "Sdg",
            GateKind::T => "T",
            GateKind::Tdg => "Tdg",
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::CZ => "CZ",
            GateKind::CNOT => "CNOT",
        }
    }

    pub fn is_t(self) -> bool {
        matches!(self, GateKind::T | GateKind::Tdg)
    }

    /// Diagonal in the computational basis.
    pub fn is_diagonal(self) -> bool {
        matches!(
            self,
            GateKind::S | GateKind::Sdg | GateKind::T | GateKind::Tdg | GateKind::Z | GateKind::CZ
        )
    }

    pub fn dagger(self) -> GateKind {
        match self {
            GateKind::S => GateKind::Sdg,
            GateKind::Sdg => GateKind::S,
            GateKind::T => GateKind::Tdg,
            GateKind::Tdg => GateKind::T,
            k => k,
        }
    }

    /// The 2×2 matrix of a single-qubit kind.
    pub fn matrix2<I: RingInt>(self) -> Option<RingMatrix<I>> {
        type S<I> = RingScalar<I>;
        let (o, z) = (S::<I>::one(), S::<I>::zero());
        let m = match self {
            GateKind::H => {
                let h = S::<I>::inv_sqrt2();
                [h.clone(), h.clone(), h.clone(), -h]
            }
            GateKind::S => [o.clone(), z.clone(), z, S::i()],
            GateKind::Sdg => [o.clone(), z.clone(), z, -S::i()],
            GateKind::T => [o.clone(), z.clone(), z, S::omega()],
            GateKind::Tdg => [o.clone(), z.clone(), z, S::omega_pow(7)],
            GateKind::X => [z.clone(), o.clone(), o, z],
            GateKind::Y => [z.clone(), -S::i(), S::i(), z],
            GateKind::Z => [o.clone(), z.clone(), z, -o],
            GateKind::CZ | GateKind::CNOT => return None,
        };
        Some(RingMatrix::from_vec(2, 2, m.to_vec()))
    }
}

impl FromStr for GateKind {
    type Err = CircuitError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GateKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| CircuitError::Parse(format!("unknown gate '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gate {
    pub kind: GateKind,
    /// For CNOT the first index is the control.
    pub qubits: Vec<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, qubits: &[usize]) -> Self {
        Gate { kind, qubits: qubits.to_vec() }
    }

    pub fn one(kind: GateKind, q: usize) -> Self {
        Gate { kind, qubits: vec![q] }
    }

    pub fn two(kind: GateKind, q0: usize, q1: usize) -> Self {
        Gate { kind, qubits: vec![q0, q1] }
    }

    pub fn validate(&self, width: usize) -> Result<(), CircuitError> {
        if self.qubits.len() != self.kind.arity() {
            return Err(CircuitError::InvalidGate(format!("{self}: wrong number of qubits")));
        }
        if self.qubits.iter().any(|&q| q >= width) {
            return Err(CircuitError::InvalidGate(format!("{self}: qubit out of range")));
        }
        if self.qubits.len() == 2 && self.qubits[0] == self.qubits[1] {
            return Err(CircuitError::InvalidGate(format!("{self}: repeated qubit")));
        }
        Ok(())
    }

    pub fn dagger(&self) -> Gate {
        Gate { kind: self.kind.dagger(), qubits: self.qubits.clone() }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind.name())?;
        for (i, q) in self.qubits.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{q}")?;
        }
        Ok(())
    }
}

fn split_token(tok: &str) -> Result<(&str, Vec<usize>), CircuitError> {
    let pos = tok
        .find(|c: char| c.is_ascii_digit())
        .ok_or_else(|| CircuitError::Parse(format!("token '{tok}' has no qubit index")))?;
    let (name, rest) = tok.split_at(pos);
    let qubits = rest
        .split(',')
        .map(|q| q.parse::<usize>().map_err(|_| CircuitError::Parse(format!("bad index in '{tok}'"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((name, qubits))
}

impl FromStr for Gate {
    type Err = CircuitError;
    fn from_str(tok: &str) -> Result<Self, Self::Err> {
        let (name, qubits) = split_token(tok)?;
        let g = Gate { kind: name.parse()?, qubits };
        if g.qubits.len() != g.kind.arity() {
            return Err(CircuitError::Parse(format!("'{tok}' has the wrong number of qubits")));
        }
        Ok(g)
    }
}

/// A circuit over {Clifford, T}. Ancillas start in |0⟩ and are measured in
/// the Z basis after the last gate; every other qubit is a data qubit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Circuit {
    pub width: usize,
    pub ancillas: Vec<usize>,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(width: usize, ancillas: Vec<usize>) -> Result<Self, CircuitError> {
        let mut ancillas = ancillas;
        ancillas.sort_unstable();
        if ancillas.windows(2).any(|w| w[0] == w[1]) {
            return Err(CircuitError::Ancillas("duplicate ancilla index".into()));
        }
        if ancillas.iter().any(|&a| a >= width) {
            return Err(CircuitError::Ancillas("ancilla index out of range".into()));
        }
        if ancillas.len() >= width {
            return Err(CircuitError::Ancillas("at least one data qubit is required".into()));
        }
        Ok(Circuit { width, ancillas, gates: Vec::new() })
    }

    pub fn with_gates(width: usize, ancillas: Vec<usize>, gates: Vec<Gate>) -> Result<Self, CircuitError> {
        let mut c = Self::new(width, ancillas)?;
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, g: Gate) -> Result<(), CircuitError> {
        g.validate(self.width)?;
        self.gates.push(g);
        Ok(())
    }

    pub fn ancilla_count(&self) -> usize {
        self.ancillas.len()
    }

    pub fn data_qubits(&self) -> Vec<usize> {
        (0..self.width).filter(|q| !self.ancillas.contains(q)).collect()
    }

    pub fn t_count(&self) -> usize {
        self.gates.iter().filter(|g| g.kind.is_t()).count()
    }

    /// `self` followed by `other` in time.
    pub fn concat(&self, other: &Circuit) -> Result<Circuit, CircuitError> {
        if self.width != other.width || self.ancillas != other.ancillas {
            return Err(CircuitError::Ancillas("cannot concatenate circuits of different layout".into()));
        }
        let mut c = self.clone();
        c.gates.extend(other.gates.iter().cloned());
        Ok(c)
    }

    /// Gate tokens followed by one `MZ` token per ancilla.
    pub fn to_text(&self) -> String {
        let mut toks: Vec<String> = self.gates.iter().map(|g| g.to_string()).collect();
        toks.extend(self.ancillas.iter().map(|a| format!("MZ{a}")));
        toks.join(" ")
    }

    pub fn from_text(width: usize, ancillas: Vec<usize>, text: &str) -> Result<Self, CircuitError> {
        let mut c = Self::new(width, ancillas)?;
        let mut measured = Vec::new();
        for tok in text.split_whitespace() {
            if let Some(rest) = tok.strip_prefix("MZ") {
                let q = rest
                    .parse::<usize>()
                    .map_err(|_| CircuitError::Parse(format!("bad measurement '{tok}'")))?;
                measured.push(q);
                continue;
            }
            if !measured.is_empty() {
                return Err(CircuitError::Parse("gates after measurement".into()));
            }
            c.push(tok.parse()?)?;
        }
        if measured != c.ancillas {
            return Err(CircuitError::Parse(format!(
                "measurements {measured:?} do not match ancillas {:?}",
                c.ancillas
            )));
        }
        Ok(c)
    }

    /// Two-line file format: a JSON header with the layout, then the tokens.
    pub fn to_file_string(&self) -> String {
        let header = serde_json::json!({ "width": self.width, "ancillas": self.ancillas });
        format!("{header}\n{}\n", self.to_text())
    }

    pub fn from_file_str(s: &str) -> Result<Self, CircuitError> {
        let mut lines = s.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| CircuitError::Parse("empty circuit file".into()))?;
        let h: CircuitHeader =
            serde_json::from_str(header).map_err(|e| CircuitError::Parse(e.to_string()))?;
        let body: Vec<&str> = lines.collect();
        Self::from_text(h.width, h.ancillas, &body.join(" "))
    }
}

#[derive(Serialize, Deserialize)]
struct CircuitHeader {
    width: usize,
    ancillas: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct CircuitRecord {
    width: usize,
    ancillas: Vec<usize>,
    gates: String,
}

impl Serialize for Circuit {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        CircuitRecord { width: self.width, ancillas: self.ancillas.clone(), gates: self.to_text() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Circuit {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = CircuitRecord::deserialize(d)?;
        Circuit::from_text(r.width, r.ancillas, &r.gates).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Dense row-major matrix over the exact ring.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RingMatrix<I> {
    rows: usize,
    cols: usize,
    data: Vec<RingScalar<I>>,
}

impl<I: RingInt> RingMatrix<I> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RingMatrix { rows, cols, data: vec![RingScalar::zero(); rows * cols] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m.data[i * dim + i] = RingScalar::one();
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<RingScalar<I>>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data has the wrong length");
        RingMatrix { rows, cols, data }
    }

    /// Convenience for 2×2 matrices given row-major.
    pub fn m2(a: RingScalar<I>, b: RingScalar<I>, c: RingScalar<I>, d: RingScalar<I>) -> Self {
        Self::from_vec(2, 2, vec![a, b, c, d])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &RingScalar<I> {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: RingScalar<I>) {
        self.data[r * self.cols + c] = v;
    }

    pub fn entries(&self) -> &[RingScalar<I>] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn checked_mul(&self, rhs: &Self) -> Result<Self, RingError> {
        assert_eq!(self.cols, rhs.rows, "matrix dimensions do not agree");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = RingScalar::zero();
                for k in 0..self.cols {
                    let (x, y) = (self.get(i, k), rhs.get(k, j));
                    if x.is_zero() || y.is_zero() {
                        continue;
                    }
                    acc = acc.checked_add(&x.checked_mul(y)?)?;
                }
                out.data[i * rhs.cols + j] = acc;
            }
        }
        Ok(out)
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        self.checked_mul(rhs).expect("ring arithmetic overflow")
    }

    pub fn dagger(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.get(i, j).conj();
            }
        }
        out
    }

    pub fn tensor(&self, rhs: &Self) -> Self {
        let (r, c) = (self.rows * rhs.rows, self.cols * rhs.cols);
        let mut out = Self::zeros(r, c);
        for i in 0..self.rows {
            for j in 0..self.cols {
                for k in 0..rhs.rows {
                    for l in 0..rhs.cols {
                        out.data[(i * rhs.rows + k) * c + j * rhs.cols + l] =
                            self.get(i, j) * rhs.get(k, l);
                    }
                }
            }
        }
        out
    }

    pub fn scalar_mul(&self, s: &RingScalar<I>) -> Self {
        RingMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        RingMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(x, y)| x + y).collect(),
        }
    }

    /// Exact test of `U·U† = I`.
    pub fn is_unitary(&self) -> bool {
        self.rows == self.cols
            && self.checked_mul(&self.dagger()).map(|p| p == Self::identity(self.rows)).unwrap_or(false)
    }

    /// Largest denominator exponent among the entries.
    pub fn max_denom_exp(&self) -> u32 {
        self.data.iter().map(|x| x.denom_exp()).max().unwrap_or(0)
    }

    pub fn mul_sqrt2_pow(&self, n: u32) -> Result<Self, RingError> {
        Ok(RingMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x.mul_sqrt2_pow(n)).collect::<Result<_, _>>()?,
        })
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols.len());
        for &r in rows {
            for &c in cols {
                data.push(self.get(r, c).clone());
            }
        }
        RingMatrix { rows: rows.len(), cols: cols.len(), data }
    }

    pub fn to_c64(&self) -> Vec<Complex<f64>> {
        self.data.iter().map(|x| x.to_c64()).collect()
    }

    pub fn convert<J: RingInt>(&self) -> Result<RingMatrix<J>, RingError> {
        Ok(RingMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x.convert()).collect::<Result<_, _>>()?,
        })
    }

    /// Left-multiplies in place by the gate acting on a `width`-qubit register.
    /// Works for any column count, so it also advances isometries.
    pub fn apply_gate(&mut self, g: &Gate, width: usize) {
        assert_eq!(self.rows, 1 << width, "row count does not match circuit width");
        let bit = |q: usize| 1usize << (width - 1 - q);
        let cols = self.cols;
        match g.kind {
            GateKind::CZ => {
                let m = bit(g.qubits[0]) | bit(g.qubits[1]);
                for r in (0..self.rows).filter(|r| r & m == m) {
                    for c in 0..cols {
                        let v = -&self.data[r * cols + c];
                        self.data[r * cols + c] = v;
                    }
                }
            }
            GateKind::CNOT => {
                let (cb, tb) = (bit(g.qubits[0]), bit(g.qubits[1]));
                for r in (0..self.rows).filter(|r| r & cb != 0 && r & tb == 0) {
                    for c in 0..cols {
                        self.data.swap(r * cols + c, (r | tb) * cols + c);
                    }
                }
            }
            kind => {
                let b = bit(g.qubits[0]);
                for r0 in (0..self.rows).filter(|r| r & b == 0) {
                    let r1 = r0 | b;
                    for c in 0..cols {
                        let (i0, i1) = (r0 * cols + c, r1 * cols + c);
                        apply_single(kind, &mut self.data, i0, i1);
                    }
                }
            }
        }
    }
}

#[inline]
fn apply_single<I: RingInt>(kind: GateKind, data: &mut [RingScalar<I>], i0: usize, i1: usize) {
    match kind {
        GateKind::H => {
            let (x, y) = (&data[i0], &data[i1]);
            let s = (x + y).div_sqrt2_pow(1);
            let d = (x - y).div_sqrt2_pow(1);
            data[i0] = s;
            data[i1] = d;
        }
        GateKind::S => data[i1] = data[i1].mul_i(),
        GateKind::Sdg => data[i1] = -data[i1].mul_i(),
        GateKind::T => data[i1] = data[i1].mul_omega(),
        GateKind::Tdg => {
            // ω^7 = -iω
            data[i1] = -data[i1].mul_omega().mul_i();
        }
        GateKind::X => data.swap(i0, i1),
        GateKind::Y => {
            let v0 = -data[i1].mul_i();
            let v1 = data[i0].mul_i();
            data[i0] = v0;
            data[i1] = v1;
        }
        GateKind::Z => data[i1] = -&data[i1],
        GateKind::CZ | GateKind::CNOT => unreachable!("two-qubit gate in single-qubit path"),
    }
}

impl<I: RingInt> fmt::Debug for RingMatrix<I> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RingMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                write!(f, "{:?} ", self.get(r, c))?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl<I: RingInt + Serialize> Serialize for RingMatrix<I> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<&[RingScalar<I>]> = self.data.chunks(self.cols.max(1)).collect();
        rows.serialize(s)
    }
}

impl<'de, I: RingInt + Deserialize<'de>> Deserialize<'de> for RingMatrix<I> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<RingScalar<I>>>::deserialize(d)?;
        let cols = rows.first().map(|r| r.len()).unwrap_or(0);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(serde::de::Error::custom("ragged matrix"));
        }
        let n = rows.len();
        Ok(RingMatrix::from_vec(n, cols, rows.into_iter().flatten().collect()))
    }
}

/// Full `2^width` matrix of a single gate.
pub fn gate_matrix<I: RingInt>(g: &Gate, width: usize) -> Result<RingMatrix<I>, CircuitError> {
    g.validate(width)?;
    let mut m = RingMatrix::identity(1 << width);
    m.apply_gate(g, width);
    Ok(m)
}

/// Exact unitary of the whole circuit: the product of gate matrices in time order.
pub fn evaluate<I: RingInt>(c: &Circuit) -> Result<RingMatrix<I>, CircuitError> {
    evaluate_with_max(c, DEFAULT_MAX_WIDTH)
}

pub fn evaluate_with_max<I: RingInt>(c: &Circuit, max_width: usize) -> Result<RingMatrix<I>, CircuitError> {
    if c.width > max_width {
        return Err(CircuitError::WidthOverflow { width: c.width, max: max_width });
    }
    let mut w = RingMatrix::identity(1 << c.width);
    for g in &c.gates {
        w.apply_gate(g, c.width);
    }
    Ok(w)
}
