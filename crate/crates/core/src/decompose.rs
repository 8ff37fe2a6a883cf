//! Approximation of `R_Z(θ)` and arbitrary single-qubit unitaries from the
//! database, plus closed-form cost calculators.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::database::{
    self, fowler_distance, hadamard, lookup_nonaxial, lookup_z, mul2, rz, Database, NonAxialMatch, ZLookup, ZTable,
    U2,
};
use crate::rus::chebyshev_interval;

/// Expected T count of the 4-T V₃ circuit.
pub const V3_EXPECTED_T: f64 = 5.26;

#[derive(Debug, Error, PartialEq)]
pub enum DecomposeError {
    #[error("epsilon must lie in (0, 1], got {0}")]
    Epsilon(f64),
    #[error("no table entry within {eps} of the target; expand the table to a larger t-cap")]
    Unreachable { eps: f64 },
    #[error("reconstruction distance {got} exceeds {eps}")]
    Posterior { got: f64, eps: f64 },
    #[error("input is not unitary")]
    NotUnitary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Euler,
    Direct,
    Auto,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "euler" => Ok(Mode::Euler),
            "direct" => Ok(Mode::Direct),
            "auto" => Ok(Mode::Auto),
            _ => Err(format!("unknown mode {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZDecomposition {
    pub theta: f64,
    pub eps: f64,
    pub lookup: ZLookup,
    /// Angle actually implemented, `sign·entry.angle + quarter·π/2`.
    pub implemented_angle: f64,
    pub expected_t: f64,
    pub variance_t: f64,
    pub distance: f64,
    pub interval95: f64,
}

pub fn decompose_z(table: &ZTable, theta: f64, eps: f64) -> Result<ZDecomposition, DecomposeError> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(DecomposeError::Epsilon(eps));
    }
    let lookup = lookup_z(table, theta, eps).ok_or(DecomposeError::Unreachable { eps })?;
    let implemented = lookup.sign as f64 * lookup.entry.angle + lookup.quarter as f64 * std::f64::consts::FRAC_PI_2;
    let distance = fowler_distance(&rz(theta), &rz(implemented));
    if distance > eps + 1e-12 {
        return Err(DecomposeError::Posterior { got: distance, eps });
    }
    Ok(ZDecomposition {
        theta,
        eps,
        implemented_angle: implemented,
        expected_t: lookup.entry.expected_t,
        variance_t: lookup.entry.variance_t,
        interval95: chebyshev_interval(lookup.entry.variance_t, 0.95),
        distance,
        lookup,
    })
}

/// `U ∝ R_Z(θ₁)·H·R_Z(θ₂)·H·R_Z(θ₃)`.
pub fn euler_split(u: &U2) -> (f64, f64, f64) {
    database::zxz_euler(u)
}

pub fn euler_compose(a: f64, b: f64, c: f64) -> U2 {
    let h = hadamard();
    mul2(&mul2(&mul2(&mul2(&rz(a), &h), &rz(b)), &h), &rz(c))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum UDecomposition {
    Euler {
        angles: [f64; 3],
        parts: Vec<ZDecomposition>,
        expected_t: f64,
        variance_t: f64,
        distance: f64,
        interval95: f64,
    },
    Direct {
        matched: NonAxialMatch,
        expected_t: f64,
        variance_t: f64,
        distance: f64,
        interval95: f64,
    },
}

impl UDecomposition {
    pub fn expected_t(&self) -> f64 {
        match self {
            UDecomposition::Euler { expected_t, .. } | UDecomposition::Direct { expected_t, .. } => *expected_t,
        }
    }

    pub fn distance(&self) -> f64 {
        match self {
            UDecomposition::Euler { distance, .. } | UDecomposition::Direct { distance, .. } => *distance,
        }
    }
}

fn is_unitary(u: &U2) -> bool {
    let p = mul2(&database::dagger2(u), u);
    (p[0].re - 1.0).abs() < 1e-9
        && (p[3].re - 1.0).abs() < 1e-9
        && p[0].im.abs() < 1e-9
        && p[3].im.abs() < 1e-9
        && p[1].norm() < 1e-9
        && p[2].norm() < 1e-9
}

fn decompose_euler(table: &ZTable, u: &U2, eps: f64) -> Result<UDecomposition, DecomposeError> {
    let (a, b, c) = euler_split(u);
    let parts = [a, b, c]
        .iter()
        .map(|&x| decompose_z(table, x, eps / 3.0))
        .collect::<Result<Vec<_>, _>>()?;
    let v = euler_compose(parts[0].implemented_angle, parts[1].implemented_angle, parts[2].implemented_angle);
    let distance = fowler_distance(u, &v);
    if distance > eps + 1e-12 {
        return Err(DecomposeError::Posterior { got: distance, eps });
    }
    let expected_t = parts.iter().map(|p| p.expected_t).sum();
    let variance_t: f64 = parts.iter().map(|p| p.variance_t).sum();
    Ok(UDecomposition::Euler {
        angles: [a, b, c],
        parts,
        expected_t,
        variance_t,
        distance,
        interval95: chebyshev_interval(variance_t, 0.95),
    })
}

fn decompose_direct(db: &Database, u: &U2, eps: f64) -> Result<UDecomposition, DecomposeError> {
    let m = lookup_nonaxial(db, u, eps).ok_or(DecomposeError::Unreachable { eps })?;
    let e = db.get(m.entry).expect("match refers to an entry");
    let v = mul2(&mul2(&database::clifford_matrix(m.left), &e.unitary), &database::clifford_matrix(m.right));
    let distance = fowler_distance(u, &v);
    if distance > eps + 1e-12 {
        return Err(DecomposeError::Posterior { got: distance, eps });
    }
    Ok(UDecomposition::Direct {
        expected_t: m.expected_t,
        variance_t: m.variance_t,
        interval95: chebyshev_interval(m.variance_t, 0.95),
        distance,
        matched: m,
    })
}

pub fn decompose_u(db: &Database, table: &ZTable, u: &U2, eps: f64, mode: Mode) -> Result<UDecomposition, DecomposeError> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(DecomposeError::Epsilon(eps));
    }
    if !is_unitary(u) {
        return Err(DecomposeError::NotUnitary);
    }
    match mode {
        Mode::Euler => decompose_euler(table, u, eps),
        Mode::Direct => decompose_direct(db, u, eps),
        Mode::Auto => match (decompose_euler(table, u, eps), decompose_direct(db, u, eps)) {
            (Ok(a), Ok(b)) => Ok(if b.expected_t() < a.expected_t() { b } else { a }),
            (Ok(a), Err(_)) => Ok(a),
            (Err(_), Ok(b)) => Ok(b),
            (Err(e), Err(_)) => Err(e),
        },
    }
}

/// `3·log₅(1/ε)·t_per_v3`.
pub fn cost_bgs(eps: f64, t_per_v3: f64) -> f64 {
    3.0 * (1.0 / eps).log(5.0) * t_per_v3
}

/// `(5.26 / T_p)·log₅ p`: how much cheaper V₃ is per unit of approximation
/// power than a prime-`p` V-basis circuit costing `T_p`.
pub fn cost_v_ratio(p: f64, t_p: f64) -> f64 {
    V3_EXPECTED_T / t_p * p.log(5.0)
}

/// `γ` with `θ = a·10^{-γ}`, `a ∈ (0, 1)`; angles of 0.1 or more give 0.
pub fn wk_gamma(theta: f64) -> i32 {
    let t = theta.abs();
    if t <= 0.0 || !t.is_finite() {
        return 0;
    }
    (-t.log10()).floor().max(0.0) as i32
}

/// `1.14·log₂(10^γ) + 8·log₂(10^{-γ}/ε)`.
pub fn cost_wk(theta: f64, eps: f64) -> f64 {
    let g = wk_gamma(theta) as f64;
    1.14 * (g * 10f64.log2()) + 8.0 * (10f64.powf(-g) / eps).log2()
}
