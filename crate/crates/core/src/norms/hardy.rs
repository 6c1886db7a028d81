//! Discrete Hardy inequalities for two-sided sequences:
//!
//! ```text
//! Σ_k 2^{kβq} (Σ_{j≥k} |a_j|)^q ≤ C Σ_k 2^{kβq} |a_k|^q
//! Σ_k 2^{−kβq} (Σ_{j≤k} |a_j|)^q ≤ C Σ_k 2^{−kβq} |a_k|^q
//! ```
//!
//! Ratios are reported at the norm level, `(LHS/RHS)^{1/q}`, and compared with
//! `1/(1−2^{−β})` for `q ≥ 1` and `(1−2^{−βq})^{−1/q}` for `q < 1`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::torus::Exponent;

/// A finitely supported sequence `a_k`, `k = offset .. offset + values.len()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteSequence {
    pub offset: i32,
    pub values: Vec<f64>,
}

impl FiniteSequence {
    pub fn new(offset: i32, values: Vec<f64>) -> Self {
        Self { offset, values }
    }

    pub fn delta(k: i32) -> Self {
        Self::new(k, vec![1.0])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardyReport {
    pub beta: f64,
    pub q: Exponent,
    pub forward_lhs: f64,
    pub forward_rhs: f64,
    pub forward_ratio: f64,
    pub backward_lhs: f64,
    pub backward_rhs: f64,
    pub backward_ratio: f64,
    /// Analytic constant at the norm level.
    pub constant: f64,
}

impl HardyReport {
    pub fn holds(&self) -> bool {
        let slack = 1.0 + 1e-12;
        self.forward_ratio <= self.constant * slack && self.backward_ratio <= self.constant * slack
    }
}

/// The analytic constant `C(β, q)` at the norm level.
pub fn hardy_constant(beta: f64, q: Exponent) -> f64 {
    match q {
        Exponent::Finite(q) if q < 1.0 => (1.0 - 2f64.powf(-beta * q)).powf(-1.0 / q),
        _ => 1.0 / (1.0 - 2f64.powf(-beta)),
    }
}

/// Norm-level ratio: sums arrive as `q`-th powers, suprema as plain values.
fn ratio(lhs: f64, rhs: f64, q: Exponent) -> f64 {
    if rhs == 0.0 {
        return if lhs == 0.0 { 0.0 } else { f64::INFINITY };
    }
    match q {
        Exponent::Finite(q) => (lhs / rhs).powf(1.0 / q),
        Exponent::Infinity => lhs / rhs,
    }
}

/// Evaluate both inequalities. The infinite geometric tails outside the
/// support are summed in closed form.
pub fn discrete_hardy_check(a: &FiniteSequence, beta: f64, q: Exponent) -> Result<HardyReport> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(invalid(format!("β = {beta} must be positive")));
    }
    if let Exponent::Finite(qv) = q {
        if !(qv > 0.0) {
            return Err(invalid(format!("q = {qv} must be positive")));
        }
    }
    let abs: Vec<f64> = a.values.iter().map(|v| v.abs()).collect();
    let len = abs.len();
    let lo = a.offset;
    let hi = a.offset + len as i32 - 1;
    let total: f64 = abs.iter().sum();
    // Suffix and prefix sums over the support.
    let mut suffix = vec![0.0; len + 1];
    for i in (0..len).rev() {
        suffix[i] = suffix[i + 1] + abs[i];
    }
    let mut prefix = vec![0.0; len + 1];
    for i in 0..len {
        prefix[i + 1] = prefix[i] + abs[i];
    }
    let up = |k: i32, x: f64| 2f64.powf(k as f64 * beta) * x;
    let down = |k: i32, x: f64| 2f64.powf(-(k as f64) * beta) * x;
    let report = match q {
        Exponent::Finite(qv) => {
            let r = 2f64.powf(-beta * qv);
            let mut fl = 0.0;
            let mut fr = 0.0;
            let mut bl = 0.0;
            let mut br = 0.0;
            for i in 0..len {
                let k = lo + i as i32;
                fl += up(k, suffix[i]).powf(qv);
                fr += up(k, abs[i]).powf(qv);
                bl += down(k, prefix[i + 1]).powf(qv);
                br += down(k, abs[i]).powf(qv);
            }
            if len > 0 {
                // k < lo: inner sum is the total; Σ_{k<lo} 2^{kβq} = 2^{(lo−1)βq}/(1−r).
                fl += total.powf(qv) * 2f64.powf((lo - 1) as f64 * beta * qv) / (1.0 - r);
                // k > hi: Σ_{k>hi} 2^{−kβq} = 2^{−(hi+1)βq}/(1−r).
                bl += total.powf(qv) * 2f64.powf(-((hi + 1) as f64) * beta * qv) / (1.0 - r);
            }
            (fl, fr, bl, br)
        }
        Exponent::Infinity => {
            let mut fl: f64 = 0.0;
            let mut fr: f64 = 0.0;
            let mut bl: f64 = 0.0;
            let mut br: f64 = 0.0;
            for i in 0..len {
                let k = lo + i as i32;
                fl = fl.max(up(k, suffix[i]));
                fr = fr.max(up(k, abs[i]));
                bl = bl.max(down(k, prefix[i + 1]));
                br = br.max(down(k, abs[i]));
            }
            // Outside the support the weighted tails only shrink.
            (fl, fr, bl, br)
        }
    };
    let (fl, fr, bl, br) = report;
    Ok(HardyReport {
        beta,
        q,
        forward_lhs: fl,
        forward_rhs: fr,
        forward_ratio: ratio(fl, fr, q),
        backward_lhs: bl,
        backward_rhs: br,
        backward_ratio: ratio(bl, br, q),
        constant: hardy_constant(beta, q),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardyBatch {
    pub beta: f64,
    pub q: Exponent,
    pub seed: u64,
    pub count: usize,
    pub max_forward_ratio: f64,
    pub max_backward_ratio: f64,
    pub constant: f64,
    pub all_hold: bool,
}

/// Random nonnegative sequences of width `support_width` with random offsets.
pub fn hardy_batch(
    beta: f64,
    q: Exponent,
    count: usize,
    support_width: usize,
    seed: u64,
) -> Result<HardyBatch> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut batch = HardyBatch {
        beta,
        q,
        seed,
        count,
        max_forward_ratio: 0.0,
        max_backward_ratio: 0.0,
        constant: hardy_constant(beta, q),
        all_hold: true,
    };
    for _ in 0..count {
        let offset = rng.gen_range(-10..=10);
        let values = (0..support_width).map(|_| rng.gen::<f64>()).collect();
        let r = discrete_hardy_check(&FiniteSequence::new(offset, values), beta, q)?;
        batch.max_forward_ratio = batch.max_forward_ratio.max(r.forward_ratio);
        batch.max_backward_ratio = batch.max_backward_ratio.max(r.backward_ratio);
        batch.all_hold &= r.holds();
    }
    Ok(batch)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_sequence() {
        let r =
            discrete_hardy_check(&FiniteSequence::delta(0), 1.0, Exponent::Finite(1.0)).unwrap();
        assert_eq!(r.forward_lhs, 2.0);
        assert_eq!(r.forward_rhs, 1.0);
        assert_eq!(r.forward_ratio, 2.0);
        assert_eq!(r.backward_ratio, 2.0);
        assert!(r.holds());
    }

    #[test]
    fn zero_sequence() {
        let a = FiniteSequence::new(3, vec![0.0; 5]);
        let r = discrete_hardy_check(&a, 0.5, Exponent::Finite(2.0)).unwrap();
        assert_eq!(
            (r.forward_lhs, r.forward_rhs, r.forward_ratio),
            (0.0, 0.0, 0.0)
        );
        assert!(r.holds());
        let empty = FiniteSequence::new(0, vec![]);
        assert!(discrete_hardy_check(&empty, 1.0, Exponent::Infinity)
            .unwrap()
            .holds());
    }

    #[test]
    fn tail_matches_truncated_sum() {
        // Pad the support with zeros far to the left: the closed-form tail must agree.
        let a = FiniteSequence::new(0, vec![0.3, 1.0, 0.2]);
        let mut padded = vec![0.0; 200];
        padded.extend_from_slice(&a.values);
        let b = FiniteSequence::new(-200, padded);
        let q = Exponent::Finite(2.0);
        let ra = discrete_hardy_check(&a, 0.5, q).unwrap();
        let rb = discrete_hardy_check(&b, 0.5, q).unwrap();
        assert!((ra.forward_lhs - rb.forward_lhs).abs() < 1e-12 * ra.forward_lhs);
    }

    #[test]
    fn batches_hold() {
        for q in [
            Exponent::Finite(0.5),
            Exponent::Finite(2.0),
            Exponent::Infinity,
        ] {
            let b = hardy_batch(0.5, q, 200, 20, 1).unwrap();
            assert!(b.all_hold, "{b:?}");
            assert!(b.max_forward_ratio >= 1.0);
        }
        assert!(discrete_hardy_check(&FiniteSequence::delta(0), 0.0, Exponent::Infinity).is_err());
    }
}
