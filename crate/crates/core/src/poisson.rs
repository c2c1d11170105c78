//! Photon-number statistics of phase-randomized weak coherent pulses.

/// Tail mass below which the photon-number sum is truncated.
pub const TAIL_MASS: f64 = 1e-12;

/// Truncation never goes below this photon number.
pub const MIN_TRUNCATION: usize = 30;

/// Smallest `n ≥ 30` such that `P(N > n) < 1e-12` for `N ~ Poisson(mu)`.
///
/// Tail masses are accumulated from the far end of a generously long weight
/// vector so that they carry relative, not absolute, rounding error.
pub fn truncation(mu: f64) -> usize {
    let horizon = (mu + 40.0 * mu.sqrt() + 60.0).ceil() as usize;
    let w = weights(mu, horizon.max(MIN_TRUNCATION + 1));
    let mut tail = 0.0;
    let mut answer = w.len() - 1;
    for n in (0..w.len() - 1).rev() {
        tail += w[n + 1];
        if tail >= TAIL_MASS {
            break;
        }
        answer = n;
    }
    answer.max(MIN_TRUNCATION)
}

/// Poisson probabilities `e^{-mu} mu^n / n!` for `n = 0..=max_n`.
pub fn weights(mu: f64, max_n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(max_n + 1);
    let mut p = (-mu).exp();
    out.push(p);
    for n in 1..=max_n {
        p *= mu / n as f64;
        out.push(p);
    }
    out
}
