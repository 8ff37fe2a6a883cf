//! Block structure of RUS circuits and their T-count statistics.
//!
//! For a circuit `W` on `m` ancillas and one data qubit, the columns with all
//! ancillas in |0⟩ split into `2^m` blocks `W_i`, one per measurement outcome.
//! After scaling by `√2^k` the blocks `B_i` are integral and
//! `Σ B_i† B_i = 2^k I`. Outcome `i` occurs with probability `r_i / 2^k`
//! where `B_i B_i† = r_i I`.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clifford::{self, CliffordMatch};
use crate::gates::{evaluate, Circuit, CircuitError, RingMatrix};
use crate::ring::{RingError, RingInt};
use crate::{Int, Matrix, Ratio, Real};

/// Largest amplification round count considered.
pub const MAX_AMPLIFICATION_ROUNDS: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RusError {
    #[error("amplification needs a Clifford reflection; {0} ancillas is more than 2")]
    AmplificationUnsupported(usize),
    #[error("success probability must lie in (0, 1], got {0}")]
    Probability(f64),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// What happens on one measurement outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    /// Never observed.
    Impossible,
    /// The data qubit receives the target unitary.
    Success,
    /// The data qubit receives this Clifford (undo with its inverse).
    Failure(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RusAnalysis {
    pub m: usize,
    pub k: u32,
    /// `B_i` for each outcome, indexed by the ancilla bits read in ascending qubit order.
    pub blocks: Vec<Matrix>,
    /// `r_i` with `B_i B_i† = r_i I`.
    pub weights: Vec<Real>,
    pub outcomes: Vec<Outcome>,
    pub success_outcomes: Vec<usize>,
    /// The first success block; every success block is proportional to it.
    pub u_beta: Matrix,
    /// `|α₀|² = r` of the first success block.
    pub alpha0_sq: Real,
    pub recoveries: BTreeMap<usize, usize>,
    /// Exact success probability.
    pub p_success: Real,
    pub t_count: usize,
}

/// Basis index of (ancilla outcome bits, data bit) in a register of `width` qubits.
pub fn basis_index(width: usize, ancillas: &[usize], data: usize, outcome: usize, data_bit: usize) -> usize {
    let m = ancillas.len();
    let mut idx = 0usize;
    for (j, &a) in ancillas.iter().enumerate() {
        if (outcome >> (m - 1 - j)) & 1 == 1 {
            idx |= 1 << (width - 1 - a);
        }
    }
    if data_bit == 1 {
        idx |= 1 << (width - 1 - data);
    }
    idx
}

/// Splits the two relevant columns of `W` (rows `2^width`, columns data=0,1
/// with ancillas in |0⟩) into unscaled per-outcome blocks.
pub fn raw_blocks<I: RingInt>(cols: &RingMatrix<I>, width: usize, ancillas: &[usize], data: usize) -> Vec<RingMatrix<I>> {
    let m = ancillas.len();
    (0..1usize << m)
        .map(|i| {
            let r0 = basis_index(width, ancillas, data, i, 0);
            let r1 = basis_index(width, ancillas, data, i, 1);
            cols.submatrix(&[r0, r1], &[0, 1])
        })
        .collect()
}

/// Classifies per-outcome blocks. `None` unless every nonzero block is a
/// scaled Clifford or a scaled copy of one common non-Clifford unitary, and at
/// least one block is of the second kind.
pub fn analyze_blocks(raw: &[Matrix], t_count: usize) -> Option<RusAnalysis> {
    let m = raw.len().trailing_zeros() as usize;
    let k = raw.iter().map(|b| b.max_denom_exp()).max().unwrap_or(0);
    let blocks: Vec<Matrix> = raw.iter().map(|b| b.mul_sqrt2_pow(k)).collect::<Result<_, _>>().ok()?;
    let mut outcomes = Vec::with_capacity(blocks.len());
    let mut weights = Vec::with_capacity(blocks.len());
    let mut recoveries = BTreeMap::new();
    let mut success: Vec<usize> = Vec::new();
    for (i, b) in blocks.iter().enumerate() {
        match clifford::proportional_to_clifford(b) {
            Some(CliffordMatch::Zero) => {
                outcomes.push(Outcome::Impossible);
                weights.push(Real::zero());
            }
            Some(CliffordMatch::Elem { index, scale }) => {
                outcomes.push(Outcome::Failure(index));
                weights.push(scale.checked_norm_sq().ok()?);
                recoveries.insert(i, index);
            }
            None => {
                if let Some(&first) = success.first() {
                    clifford::mutually_proportional(b, &blocks[first])?;
                }
                // B B† = r I with r > 0
                let g = b.checked_mul(&b.dagger()).ok()?;
                let e = g.entries();
                if !(e[1].is_zero() && e[2].is_zero() && e[0] == e[3]) || e[0].is_zero() {
                    return None;
                }
                outcomes.push(Outcome::Success);
                weights.push(e[0].re());
                success.push(i);
            }
        }
    }
    let first = *success.first()?;
    let mut p_num = Real::zero();
    for &i in &success {
        p_num = p_num.checked_add(&weights[i]).ok()?;
    }
    Some(RusAnalysis {
        m,
        k,
        u_beta: blocks[first].clone(),
        alpha0_sq: weights[first].clone(),
        blocks,
        weights,
        outcomes,
        success_outcomes: success,
        recoveries,
        p_success: p_num.div_pow2(k),
        t_count,
    })
}

/// Analysis of a circuit with one data qubit; `Ok(None)` when it is not an
/// RUS circuit with Clifford recoveries.
pub fn analyze(c: &Circuit) -> Result<Option<RusAnalysis>, RusError> {
    let data = c.data_qubits();
    if c.ancillas.is_empty() || data.len() != 1 {
        return Ok(None);
    }
    let w: Matrix = evaluate(c)?;
    let c0 = basis_index(c.width, &c.ancillas, data[0], 0, 0);
    let c1 = basis_index(c.width, &c.ancillas, data[0], 0, 1);
    let rows: Vec<usize> = (0..w.rows()).collect();
    let cols = w.submatrix(&rows, &[c0, c1]);
    Ok(analyze_blocks(&raw_blocks(&cols, c.width, &c.ancillas, data[0]), c.t_count()))
}

impl RusAnalysis {
    pub fn success_probability(&self) -> &Real {
        &self.p_success
    }

    pub fn p_f64(&self) -> f64 {
        self.p_success.to_f64()
    }

    /// Exact `t / p`.
    pub fn expected_t(&self) -> Ratio {
        Ratio::new(Real::from_int(self.t_count as i64), self.p_success.clone())
            .expect("success probability is positive")
    }

    pub fn expected_t_f64(&self) -> f64 {
        self.expected_t().to_f64()
    }

    pub fn variance_t(&self) -> f64 {
        variance_t(self.t_count, self.p_f64())
    }

    /// Exact probability of each outcome.
    pub fn outcome_probabilities(&self) -> Vec<Real> {
        self.weights.iter().map(|r| r.div_pow2(self.k)).collect()
    }

    /// Success unitary as an exact matrix proportional to a unitary.
    pub fn success_unitary(&self) -> &Matrix {
        &self.u_beta
    }

    /// Clifford-equivalence key of the success unitary.
    pub fn key(&self) -> crate::Key {
        clifford::equivalence_representative(&self.u_beta).expect("success block is nonzero")
    }

    pub fn amplification_plan(&self) -> Result<Option<AmplificationPlan>, RusError> {
        if self.m > 2 {
            return Err(RusError::AmplificationUnsupported(self.m));
        }
        Ok(amplification_plan(self.t_count, self.p_f64()))
    }

    /// Outcome label: ancilla bits in ascending qubit order.
    pub fn outcome_label(&self, i: usize) -> String {
        (0..self.m).map(|j| if (i >> (self.m - 1 - j)) & 1 == 1 { '1' } else { '0' }).collect()
    }

    pub fn to_record(&self) -> RusRecord {
        let t = clifford::table::<Int>();
        let expected = self.expected_t();
        RusRecord {
            m: self.m,
            k: self.k,
            beta: self.u_beta.clone(),
            alpha0_sq: self.alpha0_sq.clone(),
            success_outcomes: self.success_outcomes.iter().map(|&i| self.outcome_label(i)).collect(),
            recoveries: self
                .recoveries
                .iter()
                .map(|(&i, &c)| (self.outcome_label(i), t.get(c).word.clone()))
                .collect(),
            t_count: self.t_count,
            p_exact: self.p_success.clone(),
            p: self.p_f64(),
            expected_t_exact: expected.clone(),
            expected_t: expected.to_f64(),
            variance_t: self.variance_t(),
        }
    }
}

/// Serializable summary of an analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RusRecord {
    pub m: usize,
    pub k: u32,
    pub beta: Matrix,
    pub alpha0_sq: Real,
    pub success_outcomes: Vec<String>,
    pub recoveries: BTreeMap<String, String>,
    pub t_count: usize,
    pub p_exact: Real,
    pub p: f64,
    pub expected_t_exact: Ratio,
    pub expected_t: f64,
    pub variance_t: f64,
}

pub fn expected_t(t_count: usize, p: f64) -> f64 {
    t_count as f64 / p
}

/// `t(1 − p)/p²`.
pub fn variance_t(t_count: usize, p: f64) -> f64 {
    t_count as f64 * (1.0 - p) / (p * p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplificationPlan {
    pub j: usize,
    pub p_amplified: f64,
    pub t_amplified: usize,
    pub expected_t_amplified: f64,
    /// Ratio of the plain expected T count to the amplified one.
    pub improvement: f64,
}

/// Number of reflection rounds for amplitude amplification, when `p < 1/3`.
pub fn amplification_plan(t_count: usize, p: f64) -> Option<AmplificationPlan> {
    if !(p > 0.0 && p < 1.0 / 3.0) {
        return None;
    }
    let theta = p.sqrt().asin();
    let mut best: Option<(usize, f64)> = None;
    for j in 1..=MAX_AMPLIFICATION_ROUNDS {
        let n = (2 * j + 1) as f64;
        if n * theta > FRAC_PI_2 + theta {
            break;
        }
        let score = (n * theta).sin().powi(2) / n;
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((j, score));
        }
    }
    let (j, _) = best?;
    let n = 2 * j + 1;
    let p_amplified = ((n as f64) * theta).sin().powi(2);
    let t_amplified = n * t_count;
    let expected_t_amplified = t_amplified as f64 / p_amplified;
    Some(AmplificationPlan {
        j,
        p_amplified,
        t_amplified,
        expected_t_amplified,
        improvement: expected_t(t_count, p) / expected_t_amplified,
    })
}

/// Chebyshev half-width `σ/√(1 − confidence)`.
pub fn chebyshev_interval(variance: f64, confidence: f64) -> f64 {
    assert!(confidence > 0.0 && confidence < 1.0, "confidence must lie in (0, 1)");
    (variance / (1.0 - confidence)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_circuit_is_rejected() {
        let c = Circuit::new(2, vec![0]).unwrap();
        assert_eq!(analyze(&c).unwrap(), None);
    }

    #[test]
    fn expected_t_examples() {
        assert_abs_diff_eq!(expected_t(8, 0.625), 12.8, epsilon = 1e-12);
        assert_abs_diff_eq!(expected_t(4, 0.625), 6.4, epsilon = 1e-12);
        assert_abs_diff_eq!(expected_t(4, 0.5), 8.0);
        assert_abs_diff_eq!(variance_t(4, 0.5), 8.0);
    }

    #[test]
    fn amplification_examples() {
        let plan = amplification_plan(15, 0.1).unwrap();
        assert_eq!(plan.j, 1);
        assert_abs_diff_eq!(plan.p_amplified, 0.676, epsilon = 1e-3);
        assert_eq!(plan.t_amplified, 45);
        assert_abs_diff_eq!(plan.improvement, 2.25, epsilon = 0.01);
        assert!(amplification_plan(4, 0.625).is_none());
        assert!(amplification_plan(4, 1.0 / 3.0).is_none());
    }

    #[test]
    fn chebyshev_examples() {
        assert_abs_diff_eq!(chebyshev_interval(4.0, 0.95), 2.0 * 20f64.sqrt(), epsilon = 1e-12);
        assert_eq!(chebyshev_interval(0.0, 0.5), 0.0);
        assert_abs_diff_eq!(chebyshev_interval(1.0, 0.75), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn basis_indexing() {
        // width 3, ancillas {0, 2}, data 1
        assert_eq!(basis_index(3, &[0, 2], 1, 0b10, 0), 0b100);
        assert_eq!(basis_index(3, &[0, 2], 1, 0b01, 1), 0b011);
    }
}
