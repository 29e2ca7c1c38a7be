//! Streak statistics for binary series and their asymptotic variance.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Index sets of positions immediately following a run of `k` successes
/// (`make`) or `k` failures (`miss`).
fn streak_sets(bits: &[bool], k: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = bits.len();
    if k == 0 || k >= n {
        return Err(Error::parameter("streak length must satisfy 1 <= k < n"));
    }
    let mut make = Vec::new();
    let mut miss = Vec::new();
    // Track the current run length of identical outcomes ending at t - 1.
    let mut run_val = bits[0];
    let mut run_len = 1usize;
    for (t, &bit) in bits.iter().enumerate().skip(1) {
        if run_len >= k {
            if run_val {
                make.push(t);
            } else {
                miss.push(t);
            }
        }
        if bit == run_val {
            run_len += 1;
        } else {
            run_val = bit;
            run_len = 1;
        }
    }
    Ok((make, miss))
}

fn success_rate<S: Scalar>(bits: &[bool], idx: &[usize]) -> S {
    let hits = idx.iter().filter(|&&t| bits[t]).count();
    S::from_count(hits) / S::from_count(idx.len())
}

/// Success rate immediately after `k` consecutive successes.
pub fn hot_hand_make<S: Scalar>(bits: &[bool], k: usize) -> Result<S> {
    let (make, _) = streak_sets(bits, k)?;
    if make.is_empty() {
        return Err(Error::undefined(format!("no streaks of {k} successes")));
    }
    Ok(success_rate(bits, &make))
}

/// Difference between the success rates following `k` consecutive
/// successes and `k` consecutive failures.
pub fn hot_hand_diff<S: Scalar>(bits: &[bool], k: usize) -> Result<S> {
    let (make, miss) = streak_sets(bits, k)?;
    if make.is_empty() || miss.is_empty() {
        return Err(Error::undefined(format!(
            "a streak set of length {k} is empty (make: {}, miss: {})",
            make.len(),
            miss.len()
        )));
    }
    Ok(success_rate::<S>(bits, &make) - success_rate::<S>(bits, &miss))
}

/// Asymptotic variance of the streak difference under an i.i.d.
/// Bernoulli(q) null: `(q(1-q))^{1-k} ((1-q)^k + q^k)`.
pub fn hot_hand_sigma2<S: Scalar>(q: S, k: usize) -> Result<S> {
    if !(q > S::zero() && q < S::one()) {
        return Err(Error::parameter(
            "success rate must lie strictly between 0 and 1",
        ));
    }
    if k == 0 {
        return Err(Error::parameter("streak length must be at least 1"));
    }
    let one_minus = S::one() - q;
    Ok((q * one_minus).powi(1 - k as i32) * (one_minus.powi(k as i32) + q.powi(k as i32)))
}
