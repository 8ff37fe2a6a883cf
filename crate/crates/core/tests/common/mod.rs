#![allow(dead_code)]

use num_complex::Complex64 as C;

pub type M2 = [C; 4];

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn mul(a: &M2, b: &M2) -> M2 {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

pub fn h() -> M2 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)]
}

pub fn s() -> M2 {
    [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)]
}

pub fn t() -> M2 {
    let w = C::from_polar(1.0, std::f64::consts::FRAC_PI_4);
    [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), w]
}

pub fn ident() -> M2 {
    [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]
}

pub fn scale(a: &M2) -> M2 {
    let n = ((a.iter().map(|z| z.norm_sqr()).sum::<f64>()) / 2.0).sqrt();
    a.map(|z| z / n)
}

/// `1 − |Tr(A†B)|/2` after normalizing both; zero exactly when proportional.
pub fn proj_gap(a: &M2, b: &M2) -> f64 {
    let (a, b) = (scale(a), scale(b));
    let tr = a[0].conj() * b[0] + a[1].conj() * b[1] + a[2].conj() * b[2] + a[3].conj() * b[3];
    (1.0 - tr.norm() / 2.0).abs()
}

/// The 24 single-qubit Cliffords mod phase, generated from H and S by closure.
pub fn cliffords() -> Vec<M2> {
    let mut out = vec![ident()];
    let mut i = 0;
    while i < out.len() {
        for g in [h(), s()] {
            let n = mul(&out[i], &g);
            if out.iter().all(|x| proj_gap(x, &n) > 1e-9) {
                out.push(n);
            }
        }
        i += 1;
    }
    out
}

pub fn clifford_equivalent(u: &M2, v: &M2) -> bool {
    let cl = cliffords();
    cl.iter().any(|a| cl.iter().any(|b| proj_gap(&mul(&mul(a, u), b), v) < 1e-9))
}

pub fn from_vec(v: &[C]) -> M2 {
    [v[0], v[1], v[2], v[3]]
}

use rus_synth::gates::{Circuit, GateKind};

/// Dense statevector evolution, qubit 0 most significant.
pub fn run(circ: &Circuit, mut psi: Vec<C>) -> Vec<C> {
    let n = circ.width;
    let bit = |idx: usize, q: usize| (idx >> (n - 1 - q)) & 1;
    for g in &circ.gates {
        let q = g.qubits[0];
        let single = |m: M2, psi: &mut Vec<C>| {
            for i in 0..psi.len() {
                if bit(i, q) == 0 {
                    let j = i | (1 << (n - 1 - q));
                    let (a, b) = (psi[i], psi[j]);
                    psi[i] = m[0] * a + m[1] * b;
                    psi[j] = m[2] * a + m[3] * b;
                }
            }
        };
        let z = c(0.0, 0.0);
        let one = c(1.0, 0.0);
        match g.kind {
            GateKind::H => single(h(), &mut psi),
            GateKind::S => single(s(), &mut psi),
            GateKind::T => single(t(), &mut psi),
            GateKind::Sdg => single([one, z, z, c(0.0, -1.0)], &mut psi),
            GateKind::Tdg => single([one, z, z, t()[3].conj()], &mut psi),
            GateKind::X => single([z, one, one, z], &mut psi),
            GateKind::Y => single([z, c(0.0, -1.0), c(0.0, 1.0), z], &mut psi),
            GateKind::Z => single([one, z, z, -one], &mut psi),
            GateKind::CZ => {
                let r = g.qubits[1];
                for (i, a) in psi.iter_mut().enumerate() {
                    if bit(i, q) == 1 && bit(i, r) == 1 {
                        *a = -*a;
                    }
                }
            }
            GateKind::CNOT => {
                let r = g.qubits[1];
                for i in 0..psi.len() {
                    if bit(i, q) == 1 && bit(i, r) == 0 {
                        psi.swap(i, i | (1 << (n - 1 - r)));
                    }
                }
            }
        }
    }
    psi
}

/// Per-outcome 2×2 blocks of the circuit with ancillas starting in |0⟩.
pub fn blocks(circ: &Circuit) -> Vec<M2> {
    let n = circ.width;
    let data = (0..n).find(|q| !circ.ancillas.contains(q)).unwrap();
    let m = circ.ancillas.len();
    let index = |outcome: usize, d: usize| {
        let mut idx = 0;
        for (j, &a) in circ.ancillas.iter().enumerate() {
            if (outcome >> (m - 1 - j)) & 1 == 1 {
                idx |= 1 << (n - 1 - a);
            }
        }
        idx | (d << (n - 1 - data))
    };
    let cols: Vec<Vec<C>> = (0..2)
        .map(|d| {
            let mut psi = vec![c(0.0, 0.0); 1 << n];
            psi[index(0, d)] = c(1.0, 0.0);
            run(circ, psi)
        })
        .collect();
    (0..1 << m)
        .map(|o| [cols[0][index(o, 0)], cols[1][index(o, 0)], cols[0][index(o, 1)], cols[1][index(o, 1)]])
        .collect()
}

/// Squared norm of a block that is proportional to a unitary.
pub fn block_weight(b: &M2) -> f64 {
    b.iter().map(|z| z.norm_sqr()).sum::<f64>() / 2.0
}

pub fn is_clifford(b: &M2) -> bool {
    block_weight(b) > 1e-12 && cliffords().iter().any(|g| proj_gap(g, b) < 1e-9)
}

pub fn circuit(width: usize, ancillas: Vec<usize>, text: &str) -> Circuit {
    Circuit::from_text(width, ancillas, text).unwrap()
}

pub const GOSSET: &str = "H0 CZ0,1 T0 H0 CZ0,1 T0 H0 MZ0";
pub const V3: &str = "H0 S0 T0 H0 CZ0,1 T0 H0 CZ0,1 T0 H0 T0 H0 MZ0";
pub const SQRT7: &str = "H0 S0 T0 H0 CZ0,1 H1 T1 H1 T1 H1 CZ0,1 H0 T0 H0 MZ0";

pub fn gosset() -> Circuit {
    circuit(2, vec![0], GOSSET)
}

pub fn v3() -> Circuit {
    circuit(2, vec![0], V3)
}

pub fn sqrt7() -> Circuit {
    circuit(2, vec![0], SQRT7)
}

/// `(I + i√2 X)`, `(I + 2iZ)` and `(2X + √2Y + Z)`, unnormalized.
pub fn gosset_target() -> M2 {
    let r = std::f64::consts::SQRT_2;
    [c(1.0, 0.0), c(0.0, r), c(0.0, r), c(1.0, 0.0)]
}

pub fn v3_target() -> M2 {
    [c(1.0, 2.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, -2.0)]
}

pub fn sqrt7_target() -> M2 {
    let r = std::f64::consts::SQRT_2;
    // 2X + √2Y + Z
    [c(1.0, 0.0), c(2.0, -r), c(2.0, r), c(-1.0, 0.0)]
}
