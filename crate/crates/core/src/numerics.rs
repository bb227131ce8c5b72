//! Numerically stable primitives shared by every loss: log-sum-exp, stable
//! softmax, Euclidean simplex projection (sparsemax), and the 1.5-entmax
//! mapping.
//!
//! All functions are pure, operate on `f64` slices, and reject non-finite
//! input. Sorting steps break ties by original index (stable sort) so results
//! are deterministic across runs and platforms.

use crate::error::{Error, Result};

/// A probability distribution over classes: entries are nonnegative and sum
/// to one (within 1e-9). Produced by the mappings in this module.
#[derive(Debug, Clone, PartialEq)]
pub struct Probs(Vec<f64>);

impl Probs {
    /// Wraps a vector that is already a valid distribution.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("empty probability vector".into()));
        }
        let sum: f64 = values.iter().sum();
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "not a probability distribution (sum {sum})"
            )));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::ops::Deref for Probs {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

fn check_finite(v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::InvalidInput("empty logit vector".into()));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("non-finite logit".into()));
    }
    Ok(())
}

/// log Σ e^{v_j}, computed with a max shift so constant vectors are exact and
/// large magnitudes do not overflow.
pub fn log_sum_exp(v: &[f64]) -> Result<f64> {
    check_finite(v)?;
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = v.iter().map(|x| (x - max).exp()).sum();
    Ok(max + sum.ln())
}

/// Softmax with max-shift stabilisation. Invariant to adding a constant to
/// all logits; output sums to 1.
pub fn stable_softmax(v: &[f64]) -> Result<Probs> {
    check_finite(v)?;
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = v.iter().map(|x| (x - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    for x in &mut out {
        *x /= sum;
    }
    Ok(Probs(out))
}

/// Indices sorted by value descending; equal values keep original index order.
fn argsort_desc(v: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[b].partial_cmp(&v[a]).unwrap());
    idx
}

/// Euclidean projection of `v` onto the probability simplex via the
/// sort-and-threshold procedure. Entries outside the support set are exact
/// zeros.
pub fn simplex_project(v: &[f64]) -> Result<Probs> {
    check_finite(v)?;
    let order = argsort_desc(v);
    // Largest k with 1 + k*v_(k) > cumsum_k.
    let mut cumsum = 0.0;
    let mut k = 0;
    let mut cumsum_k = 0.0;
    for (j, &i) in order.iter().enumerate() {
        cumsum += v[i];
        if 1.0 + (j + 1) as f64 * v[i] > cumsum {
            k = j + 1;
            cumsum_k = cumsum;
        }
    }
    let tau = (cumsum_k - 1.0) / k as f64;
    Ok(Probs(v.iter().map(|&x| (x - tau).max(0.0)).collect()))
}

/// The 1.5-entmax mapping computed by the exact sorting-based method.
///
/// With s = (v - max v)/2, the output is p_i = [(s_i - τ)₊]² where τ is the
/// unique threshold making the squares sum to one. May contain exact zeros;
/// reduces to the uniform distribution on constant input.
pub fn entmax15(v: &[f64]) -> Result<Probs> {
    check_finite(v)?;
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let s: Vec<f64> = v.iter().map(|x| (x - max) / 2.0).collect();
    let order = argsort_desc(&s);

    // For each candidate support size k the threshold solves
    // Σ_{i≤k} (s_i − τ)² = 1, i.e. τ_k = mean_k − sqrt(1/k − var_k).
    // The valid size is the largest k with τ_k ≤ s_(k).
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut tau_star = f64::NEG_INFINITY;
    for (j, &i) in order.iter().enumerate() {
        let k = (j + 1) as f64;
        sum += s[i];
        sum_sq += s[i] * s[i];
        let mean = sum / k;
        let disc = 1.0 / k - (sum_sq / k - mean * mean);
        let tau = mean - disc.max(0.0).sqrt();
        if tau <= s[i] {
            tau_star = tau;
        }
    }

    let mut out: Vec<f64> = s
        .iter()
        .map(|&x| {
            let d = x - tau_star;
            if d > 0.0 {
                d * d
            } else {
                0.0
            }
        })
        .collect();
    // The threshold is exact up to rounding; renormalise the residual error.
    let total: f64 = out.iter().sum();
    for x in &mut out {
        *x /= total;
    }
    Ok(Probs(out))
}

/// Index of the maximum entry; ties resolve to the lowest index.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn log_sum_exp_uniform() {
        assert!(close(log_sum_exp(&[0.0, 0.0, 0.0]).unwrap(), 3f64.ln(), 1e-12));
    }

    #[test]
    fn log_sum_exp_overflow_guard() {
        let v = [1000.0, 1000.0];
        assert!(close(log_sum_exp(&v).unwrap(), 1000.0 + 2f64.ln(), 1e-12));
    }

    #[test]
    fn log_sum_exp_reference_value() {
        // ln(e^1 + e^2 + e^3), high-precision reference.
        assert!(close(
            log_sum_exp(&[1.0, 2.0, 3.0]).unwrap(),
            3.4076059644443806,
            1e-12
        ));
    }

    #[test]
    fn log_sum_exp_rejects_non_finite() {
        assert!(log_sum_exp(&[1.0, f64::NAN]).is_err());
        assert!(log_sum_exp(&[f64::INFINITY, 0.0]).is_err());
        assert!(log_sum_exp(&[]).is_err());
    }

    #[test]
    fn softmax_uniform() {
        let p = stable_softmax(&[0.0, 0.0, 0.0]).unwrap();
        for &x in p.values() {
            assert!(close(x, 1.0 / 3.0, 1e-15));
        }
    }

    #[test]
    fn softmax_shift_invariance() {
        for c in [-1000.0, -1.0, 0.5, 999.0] {
            let a = stable_softmax(&[0.0, 1.0, 2.0]).unwrap();
            let b = stable_softmax(&[c, c + 1.0, c + 2.0]).unwrap();
            for (x, y) in a.values().iter().zip(b.values()) {
                assert!(close(*x, *y, 1e-12));
            }
        }
    }

    #[test]
    fn softmax_reference_value() {
        let p = stable_softmax(&[1.0, 2.0, 3.0]).unwrap();
        let expect = [0.09003057317038046, 0.24472847105479767, 0.6652409557748219];
        for (x, e) in p.values().iter().zip(expect) {
            assert!(close(*x, e, 1e-12));
        }
    }

    #[test]
    fn simplex_project_saturated() {
        let p = simplex_project(&[1.0, 0.0, -1.0]).unwrap();
        assert_eq!(p.values(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn simplex_project_identity_on_simplex() {
        let p = simplex_project(&[0.5, 0.4, 0.1]).unwrap();
        for (x, e) in p.values().iter().zip([0.5, 0.4, 0.1]) {
            assert!(close(*x, e, 1e-15));
        }
    }

    #[test]
    fn simplex_project_uniform_on_constant() {
        for n in [2usize, 3, 7] {
            let v = vec![4.2; n];
            let p = simplex_project(&v).unwrap();
            for &x in p.values() {
                assert!(close(x, 1.0 / n as f64, 1e-12));
            }
        }
    }

    #[test]
    fn entmax15_uniform_on_constant() {
        for n in [2usize, 5, 9] {
            let p = entmax15(&vec![-3.0; n]).unwrap();
            for &x in p.values() {
                assert!(close(x, 1.0 / n as f64, 1e-12));
            }
        }
    }

    #[test]
    fn entmax15_one_hot_limit() {
        let p = entmax15(&[1.0e4, 0.0, -1.0e4]).unwrap();
        assert!(close(p.values()[0], 1.0, 1e-12));
        assert_eq!(p.values()[1], 0.0);
        assert_eq!(p.values()[2], 0.0);
    }

    #[test]
    fn entmax15_sums_to_one() {
        let p = entmax15(&[1.0, 0.0, -1.0]).unwrap();
        let sum: f64 = p.values().iter().sum();
        assert!(close(sum, 1.0, 1e-9));
    }

    #[test]
    fn mappings_preserve_argmax() {
        let v = [0.3, 2.1, -0.4, 2.0, 1.9];
        assert_eq!(argmax(stable_softmax(&v).unwrap().values()), 1);
        assert_eq!(argmax(simplex_project(&v).unwrap().values()), 1);
        assert_eq!(argmax(entmax15(&v).unwrap().values()), 1);
    }

    #[test]
    fn probs_rejects_bad_distribution() {
        assert!(Probs::new(vec![0.5, 0.6]).is_err());
        assert!(Probs::new(vec![1.5, -0.5]).is_err());
        assert!(Probs::new(vec![0.5, 0.5]).is_ok());
    }
}
