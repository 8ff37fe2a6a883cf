//! Floating-point statevector oracle. Gate matrices are written out here
//! directly rather than taken from the exact ring, so agreement with the
//! exact path is an independent check.

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::clifford;
use crate::gates::{Circuit, Gate, GateKind};
use crate::rus::{basis_index, Outcome, RusAnalysis};
use crate::Int;

pub const STATE_TOL: f64 = 1e-9;
pub const PROB_TOL: f64 = 1e-12;
pub const MAX_VERIFY_WIDTH: usize = 4;

pub trait Real: Float + FloatConst + FromPrimitive + Send + Sync + std::fmt::Debug + 'static {}
impl<T: Float + FloatConst + FromPrimitive + Send + Sync + std::fmt::Debug + 'static> Real for T {}

fn c<F: Real>(re: f64, im: f64) -> Complex<F> {
    Complex::new(F::from_f64(re).unwrap(), F::from_f64(im).unwrap())
}

fn single<F: Real>(k: GateKind) -> [Complex<F>; 4] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let (o, z) = (c(1.0, 0.0), c(0.0, 0.0));
    match k {
        GateKind::H => [c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)],
        GateKind::S => [o, z, z, c(0.0, 1.0)],
        GateKind::Sdg => [o, z, z, c(0.0, -1.0)],
        GateKind::T => [o, z, z, c(s, s)],
        GateKind::Tdg => [o, z, z, c(s, -s)],
        GateKind::X => [z, o, o, z],
        GateKind::Y => [z, c(0.0, -1.0), c(0.0, 1.0), z],
        GateKind::Z => [o, z, z, c(-1.0, 0.0)],
        GateKind::CZ | GateKind::CNOT => unreachable!("two-qubit gate"),
    }
}

/// Applies `g` in place; qubit 0 is the most significant bit.
pub fn apply<F: Real>(state: &mut [Complex<F>], g: &Gate, width: usize) {
    let bit = |q: usize| 1usize << (width - 1 - q);
    match g.kind {
        GateKind::CZ => {
            let (a, b) = (bit(g.qubits[0]), bit(g.qubits[1]));
            for (i, v) in state.iter_mut().enumerate() {
                if i & a != 0 && i & b != 0 {
                    *v = -*v;
                }
            }
        }
        GateKind::CNOT => {
            let (a, b) = (bit(g.qubits[0]), bit(g.qubits[1]));
            for i in 0..state.len() {
                if i & a != 0 && i & b == 0 {
                    state.swap(i, i | b);
                }
            }
        }
        k => {
            let m = single::<F>(k);
            let b = bit(g.qubits[0]);
            for i in 0..state.len() {
                if i & b == 0 {
                    let (x, y) = (state[i], state[i | b]);
                    state[i] = m[0] * x + m[1] * y;
                    state[i | b] = m[2] * x + m[3] * y;
                }
            }
        }
    }
}

pub fn simulate<F: Real>(c: &Circuit, input: &[Complex<F>]) -> Vec<Complex<F>> {
    let mut s = input.to_vec();
    for g in &c.gates {
        apply(&mut s, g, c.width);
    }
    s
}

/// Full unitary, column `j` = image of basis state `j`.
pub fn unitary<F: Real>(c: &Circuit) -> Vec<Vec<Complex<F>>> {
    let n = 1usize << c.width;
    (0..n)
        .map(|j| {
            let mut e = vec![Complex::new(F::zero(), F::zero()); n];
            e[j] = Complex::new(F::one(), F::zero());
            simulate(c, &e)
        })
        .collect()
}

/// Haar-random qubit state from four standard normals.
pub fn random_qubit<F: Real, R: Rng>(rng: &mut R) -> [Complex<F>; 2] {
    let mut n = || F::from_f64(rng.sample::<f64, _>(StandardNormal)).unwrap();
    let v = [Complex::new(n(), n()), Complex::new(n(), n())];
    let norm = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    [v[0] / norm, v[1] / norm]
}

fn mat_vec<F: Real>(m: &[Complex<F>; 4], v: &[Complex<F>; 2]) -> [Complex<F>; 2] {
    [m[0] * v[0] + m[1] * v[1], m[2] * v[0] + m[3] * v[1]]
}

/// `‖a/|a| − e^{iφ} b/|b|‖` minimized over the phase.
pub fn projective_error<F: Real>(a: &[Complex<F>; 2], b: &[Complex<F>; 2]) -> F {
    let na = (a[0].norm_sqr() + a[1].norm_sqr()).sqrt();
    let nb = (b[0].norm_sqr() + b[1].norm_sqr()).sqrt();
    let ov = b[0].conj() * a[0] + b[1].conj() * a[1];
    let r = ov.norm();
    // Align the phase explicitly; 2 - 2|<a|b>| cancels to ~sqrt(eps).
    let ph = if r > F::zero() { ov / r } else { Complex::new(F::one(), F::zero()) };
    let d0 = a[0] / na - ph * b[0] / nb;
    let d1 = a[1] / na - ph * b[1] / nb;
    (d0.norm_sqr() + d1.norm_sqr()).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeCheck {
    pub outcome: usize,
    pub expected_probability: f64,
    pub max_probability_error: f64,
    pub max_state_error: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RusReport {
    pub pass: bool,
    pub trials: usize,
    pub outcomes: Vec<OutcomeCheck>,
    /// Outcomes that failed any check.
    pub failed: Vec<usize>,
    pub normalization_error: f64,
    pub message: Option<String>,
}

fn declared<F: Real>(a: &RusAnalysis, i: usize) -> Option<[Complex<F>; 4]> {
    let m = match a.outcomes[i] {
        Outcome::Impossible => return None,
        Outcome::Success => a.u_beta.to_c64(),
        Outcome::Failure(idx) => clifford::table::<Int>().matrix(idx).to_c64(),
    };
    let conv = |z: &Complex<f64>| c::<F>(z.re, z.im);
    Some([conv(&m[0]), conv(&m[1]), conv(&m[2]), conv(&m[3])])
}

pub fn verify_rus(c: &Circuit, a: &RusAnalysis, trials: usize, seed: u64) -> RusReport {
    verify_rus_with::<f64>(c, a, trials, seed)
}

/// Simulates `W|0^m⟩|ψ⟩` for random `|ψ⟩` and checks every outcome's
/// probability and post-measurement data state against the declaration.
pub fn verify_rus_with<F: Real>(c: &Circuit, a: &RusAnalysis, trials: usize, seed: u64) -> RusReport {
    let fail = |msg: String| RusReport {
        pass: false,
        trials: 0,
        outcomes: vec![],
        failed: vec![],
        normalization_error: f64::NAN,
        message: Some(msg),
    };
    if c.width > MAX_VERIFY_WIDTH {
        return fail(format!("width {} exceeds {}", c.width, MAX_VERIFY_WIDTH));
    }
    let data = c.data_qubits();
    if data.len() != 1 {
        return fail("exactly one data qubit required".into());
    }
    let d = data[0];
    let m = c.ancillas.len();
    let nout = 1usize << m;
    if a.outcomes.len() != nout {
        return fail("analysis does not match the ancilla count".into());
    }
    let exact: Vec<f64> = a.outcome_probabilities().iter().map(|p| p.to_f64()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks: Vec<OutcomeCheck> = (0..nout)
        .map(|i| OutcomeCheck {
            outcome: i,
            expected_probability: exact[i],
            max_probability_error: 0.0,
            max_state_error: 0.0,
            pass: true,
        })
        .collect();
    let mut norm_err = 0.0f64;
    let mut first_probs: Option<Vec<f64>> = None;
    for _ in 0..trials {
        let psi = random_qubit::<F, _>(&mut rng);
        let mut s = vec![Complex::new(F::zero(), F::zero()); 1 << c.width];
        s[basis_index(c.width, &c.ancillas, d, 0, 0)] = psi[0];
        s[basis_index(c.width, &c.ancillas, d, 0, 1)] = psi[1];
        let out = simulate(c, &s);
        let total: F = out.iter().map(|z| z.norm_sqr()).fold(F::zero(), |x, y| x + y);
        norm_err = norm_err.max((total.to_f64().unwrap() - 1.0).abs());
        let mut probs = Vec::with_capacity(nout);
        for (i, chk) in checks.iter_mut().enumerate() {
            let phi = [
                out[basis_index(c.width, &c.ancillas, d, i, 0)],
                out[basis_index(c.width, &c.ancillas, d, i, 1)],
            ];
            let p = (phi[0].norm_sqr() + phi[1].norm_sqr()).to_f64().unwrap();
            probs.push(p);
            chk.max_probability_error = chk.max_probability_error.max((p - exact[i]).abs());
            if p > PROB_TOL {
                match declared::<F>(a, i) {
                    Some(op) => {
                        let e = projective_error(&phi, &mat_vec(&op, &psi)).to_f64().unwrap();
                        chk.max_state_error = chk.max_state_error.max(e);
                    }
                    None => chk.max_state_error = f64::INFINITY,
                }
            }
        }
        match &first_probs {
            None => first_probs = Some(probs),
            Some(f) => {
                for (i, (x, y)) in f.iter().zip(&probs).enumerate() {
                    checks[i].max_probability_error = checks[i].max_probability_error.max((x - y).abs());
                }
            }
        }
    }
    for chk in &mut checks {
        chk.pass = chk.max_probability_error <= PROB_TOL && chk.max_state_error <= STATE_TOL;
    }
    let failed: Vec<usize> = checks.iter().filter(|c| !c.pass).map(|c| c.outcome).collect();
    RusReport {
        pass: failed.is_empty() && norm_err <= PROB_TOL,
        trials,
        outcomes: checks,
        failed,
        normalization_error: norm_err,
        message: None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplificationReport {
    pub pass: bool,
    pub j: usize,
    pub expected_amplitude: f64,
    pub max_amplitude_error: f64,
    pub max_state_error: f64,
    pub success_probability: f64,
}

/// Simulates `(W·S₀·W†·S_good)^j·W|0^m⟩|ψ⟩` and compares the success-subspace
/// amplitude with `|sin((2j+1)θ)|`, `sin θ = √p`.
pub fn verify_amplification(c: &Circuit, a: &RusAnalysis, j: usize, trials: usize, seed: u64) -> AmplificationReport {
    type C = Complex<f64>;
    assert!(c.ancillas.len() <= 2, "amplification is checked for at most two ancillas");
    let d = c.data_qubits()[0];
    let n = 1usize << c.width;
    let w = unitary::<f64>(c);
    let apply_w = |v: &[C]| -> Vec<C> {
        let mut out = vec![C::new(0.0, 0.0); n];
        for (col, x) in w.iter().zip(v) {
            for (o, y) in out.iter_mut().zip(col) {
                *o += x * y;
            }
        }
        out
    };
    let apply_wdag = |v: &[C]| -> Vec<C> { w.iter().map(|col| col.iter().zip(v).map(|(a, b)| a.conj() * b).sum()).collect() };
    let success_rows: Vec<usize> = a
        .success_outcomes
        .iter()
        .flat_map(|&i| [0, 1].map(|b| basis_index(c.width, &c.ancillas, d, i, b)))
        .collect();
    let zero_rows = [basis_index(c.width, &c.ancillas, d, 0, 0), basis_index(c.width, &c.ancillas, d, 0, 1)];
    let theta = a.p_f64().sqrt().asin();
    let expected = ((2 * j + 1) as f64 * theta).sin().abs();
    let u = a.u_beta.to_c64();
    let u = [u[0], u[1], u[2], u[3]];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut amp_err = 0.0f64;
    let mut state_err = 0.0f64;
    let mut prob = 0.0;
    for _ in 0..trials {
        let psi = random_qubit::<f64, _>(&mut rng);
        let mut s = vec![C::new(0.0, 0.0); n];
        s[zero_rows[0]] = psi[0];
        s[zero_rows[1]] = psi[1];
        let mut v = apply_w(&s);
        for _ in 0..j {
            for &r in &success_rows {
                v[r] = -v[r];
            }
            v = apply_wdag(&v);
            for &r in &zero_rows {
                v[r] = -v[r];
            }
            v = apply_w(&v);
        }
        let p: f64 = success_rows.iter().map(|&r| v[r].norm_sqr()).sum();
        prob = p;
        amp_err = amp_err.max((p.sqrt() - expected).abs());
        // each success branch still carries U|ψ⟩
        let target = mat_vec(&u, &psi);
        for &i in &a.success_outcomes {
            let phi = [
                v[basis_index(c.width, &c.ancillas, d, i, 0)],
                v[basis_index(c.width, &c.ancillas, d, i, 1)],
            ];
            if phi[0].norm_sqr() + phi[1].norm_sqr() > PROB_TOL {
                state_err = state_err.max(projective_error(&phi, &target));
            }
        }
    }
    AmplificationReport {
        pass: amp_err <= STATE_TOL && state_err <= STATE_TOL,
        j,
        expected_amplitude: expected,
        max_amplitude_error: amp_err,
        max_state_error: state_err,
        success_probability: prob,
    }
}

/// `U ∝ R_Z(θ₁)·H·R_Z(θ₂)·H·R_Z(θ₃)`, computed from the quaternion of
/// `U/√det U`.
pub fn euler_oracle<F: Real>(u: &[Complex<F>; 4]) -> (F, F, F) {
    let det = u[0] * u[3] - u[1] * u[2];
    let r = det.sqrt();
    let v = u.map(|x| x / r);
    // v = q0·I − i(q1·X + q2·Y + q3·Z)
    let two = F::one() + F::one();
    let q0 = (v[0].re + v[3].re) / two;
    let q3 = (v[3].im - v[0].im) / two;
    let q1 = -(v[1].im + v[2].im) / two;
    let q2 = (v[2].re - v[1].re) / two;
    let cb = (q0 * q0 + q3 * q3).sqrt();
    let sb = (q1 * q1 + q2 * q2).sqrt();
    let b = two * sb.atan2(cb);
    let plus = q3.atan2(q0);
    let minus = q2.atan2(q1);
    let eps = F::from_f64(1e-12).unwrap();
    if sb < eps {
        return (two * plus, F::zero(), F::zero());
    }
    if cb < eps {
        return (two * minus, b, F::zero());
    }
    (plus + minus, b, plus - minus)
}

pub fn euler_reconstruct<F: Real>(a: F, b: F, c: F) -> [Complex<F>; 4] {
    let two = F::one() + F::one();
    let rzm = |t: F| -> [Complex<F>; 4] {
        let z = Complex::new(F::zero(), F::zero());
        [Complex::from_polar(F::one(), -t / two), z, z, Complex::from_polar(F::one(), t / two)]
    };
    let h = single::<F>(GateKind::H);
    let mul = |x: &[Complex<F>; 4], y: &[Complex<F>; 4]| {
        [x[0] * y[0] + x[1] * y[2], x[0] * y[1] + x[1] * y[3], x[2] * y[0] + x[3] * y[2], x[2] * y[1] + x[3] * y[3]]
    };
    mul(&mul(&mul(&mul(&rzm(a), &h), &rzm(b)), &h), &rzm(c))
}

/// Projective distance between two 2×2 unitaries, `√(1 − |Tr(A†B)|/2)`.
pub fn phase_distance<F: Real>(a: &[Complex<F>; 4], b: &[Complex<F>; 4]) -> F {
    let tr = a[0].conj() * b[0] + a[1].conj() * b[1] + a[2].conj() * b[2] + a[3].conj() * b[3];
    let two = F::one() + F::one();
    (F::one() - tr.norm() / two).max(F::zero()).sqrt()
}
