//! Classical combinatorics and information quantities of the protocol.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest photon number for which lumped binomials fit in a `u128`.
pub const MAX_EXACT_N: usize = 127;

/// Experiment configuration: number of states, mean photon number, channel
/// transmission and QBER.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub m: usize,
    pub mu: f64,
    #[serde(rename = "T")]
    pub transmission: f64,
    pub epsilon: f64,
}

impl ProtocolParams {
    pub fn new(m: usize, mu: f64, transmission: f64, epsilon: f64) -> Result<Self> {
        check_states(m)?;
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "mu",
                value: mu,
                reason: "mean photon number must be positive and finite",
            });
        }
        if !(0.0..=1.0).contains(&transmission) {
            return Err(Error::InvalidParameter {
                name: "T",
                value: transmission,
                reason: "transmission must lie in [0, 1]",
            });
        }
        if !(0.0..0.5).contains(&epsilon) {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                value: epsilon,
                reason: "QBER must lie in [0, 0.5)",
            });
        }
        Ok(Self {
            m,
            mu,
            transmission,
            epsilon,
        })
    }

    /// Angular spacing `2π/m` between neighbouring polarizations.
    pub fn theta(&self) -> f64 {
        2.0 * PI / self.m as f64
    }
}

pub(crate) fn check_states(m: usize) -> Result<()> {
    if m < 3 {
        Err(Error::TooFewStates(m))
    } else {
        Ok(())
    }
}

/// `C(n, w[m])`: the sum of `C(n, w + d·m)` over `d ≥ 0`, i.e. the number of
/// `n`-bit strings whose Hamming weight is congruent to `w` modulo `m`.
///
/// Computed by direct summation over one row of Pascal's triangle, in exact
/// 128-bit arithmetic.
pub fn lumped_binomial(n: usize, w: usize, m: usize) -> Result<u128> {
    check_states(m)?;
    if w >= m {
        return Err(Error::WeightOutOfRange { w, m });
    }
    let row = pascal_row(n)?;
    Ok(row.iter().skip(w).step_by(m).sum())
}

fn pascal_row(n: usize) -> Result<Vec<u128>> {
    if n > MAX_EXACT_N {
        return Err(Error::Overflow(n));
    }
    let mut row = vec![0u128; n + 1];
    row[0] = 1;
    for k in 1..=n {
        for j in (1..=k).rev() {
            row[j] += row[j - 1];
        }
    }
    Ok(row)
}

/// Cached `C(n, w[m])` for all `n ≤ max_n` and `w < m`.
///
/// Rows are built with the cyclic Pascal rule
/// `C(n+1, w[m]) = C(n, w[m]) + C(n, w-1[m])`.
#[derive(Debug, Clone)]
pub struct LumpedBinomialTable {
    m: usize,
    max_n: usize,
    values: Vec<Vec<u128>>,
}

impl LumpedBinomialTable {
    pub fn new(m: usize, max_n: usize) -> Result<Self> {
        check_states(m)?;
        if max_n > MAX_EXACT_N {
            return Err(Error::Overflow(max_n));
        }
        let mut values = Vec::with_capacity(max_n + 1);
        let mut row = vec![0u128; m];
        row[0] = 1;
        values.push(row.clone());
        for _ in 0..max_n {
            let next: Vec<u128> = (0..m).map(|w| row[w] + row[(w + m - 1) % m]).collect();
            values.push(next.clone());
            row = next;
        }
        Ok(Self { m, max_n, values })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn max_n(&self) -> usize {
        self.max_n
    }

    /// Returns `C(n, w[m])`, or `None` when `n > max_n` or `w ≥ m`.
    pub fn get(&self, n: usize, w: usize) -> Option<u128> {
        self.values.get(n).and_then(|row| row.get(w)).copied()
    }

    /// The full row `[C(n, 0[m]), …, C(n, m-1[m])]`.
    pub fn row(&self, n: usize) -> Option<&[u128]> {
        self.values.get(n).map(Vec::as_slice)
    }
}

/// `x · log2 x` with the convention `0 · log 0 = 0`.
pub(crate) fn xlog2x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}

/// `P(y|x, m) = (1 - cos((y - x)·2π/m)) / m`: probability that Bob obtains
/// outcome `y` on a single photon prepared in state `x`.
pub fn conditional_probability(x: usize, y: usize, m: usize) -> Result<f64> {
    check_states(m)?;
    if x >= m {
        return Err(Error::SymbolOutOfRange { symbol: x, m });
    }
    if y >= m {
        return Err(Error::SymbolOutOfRange { symbol: y, m });
    }
    let k = (y + m - x) % m;
    Ok(one_minus_cos(k, m) / m as f64)
}

/// `1 - cos(k·2π/m)` evaluated as `2 sin²(kπ/m)`, exact zero at `k = 0`.
fn one_minus_cos(k: usize, m: usize) -> f64 {
    let s = (PI * k as f64 / m as f64).sin();
    2.0 * s * s
}

/// Mutual information `S(X:Y)` between Alice's symbol and Bob's outcome for
/// single photons, in bits.
pub fn mutual_information(m: usize) -> f64 {
    (0..m).map(|k| xlog2x(one_minus_cos(k, m))).sum::<f64>() / m as f64
}

/// `S(Y|X) = log2 m - S(X:Y)`: the reverse-reconciliation disclosure per
/// detected pulse.
pub fn conditional_entropy_y_given_x(m: usize) -> f64 {
    (m as f64).log2() - mutual_information(m)
}

/// Binary entropy `h(p)` in bits.
pub fn binary_entropy(p: f64) -> f64 {
    -xlog2x(p) - xlog2x(1.0 - p)
}

/// Mutual information of the single-photon channel after depolarization to
/// QBER `epsilon`: `P_ε(y|x) = (1 - (1 - 2ε) cos((y - x)θ)) / m`.
///
/// For `m = 4` this equals `(1 - h(ε)) / 2`.
pub fn mutual_information_with_qber(m: usize, epsilon: f64) -> f64 {
    let contrast = 1.0 - 2.0 * epsilon;
    (0..m)
        .map(|k| {
            let angle = PI * k as f64 / m as f64;
            let s = angle.sin();
            // 1 - contrast·cos(2·angle), written to keep the k = 0 term exact
            let q = 2.0 * s * s * contrast + 2.0 * epsilon;
            xlog2x(q)
        })
        .sum::<f64>()
        / m as f64
}

/// Default panel count for [`continuous_limit_mutual_information`].
pub const CONTINUOUS_LIMIT_PANELS: usize = 1 << 16;

/// The `m → ∞` limit of [`mutual_information`]:
/// `(1/2π) ∫ (1 - cos θ) log2(1 - cos θ) dθ` over one period.
pub fn continuous_limit_mutual_information() -> f64 {
    continuous_limit_mutual_information_with(CONTINUOUS_LIMIT_PANELS)
}

/// Composite Simpson quadrature of the continuous-limit integral on `[0, π]`
/// (the integrand is even) with `panels` subintervals (rounded up to even).
pub fn continuous_limit_mutual_information_with(panels: usize) -> f64 {
    continuous_limit_integral(0.0, panels)
}

/// `m → ∞` limit of [`mutual_information_with_qber`].
pub fn continuous_limit_mutual_information_with_qber(epsilon: f64) -> f64 {
    continuous_limit_integral(epsilon, CONTINUOUS_LIMIT_PANELS)
}

fn continuous_limit_integral(epsilon: f64, panels: usize) -> f64 {
    let panels = panels.max(2).next_multiple_of(2);
    let h = PI / panels as f64;
    let contrast = 1.0 - 2.0 * epsilon;
    let f = |theta: f64| {
        let s = (0.5 * theta).sin();
        xlog2x(2.0 * s * s * contrast + 2.0 * epsilon)
    };
    let mut acc = f(0.0) + f(PI);
    for i in 1..panels {
        let weight = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += weight * f(i as f64 * h);
    }
    acc * h / 3.0 / PI
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn binomial(n: u64, k: u64) -> u128 {
        if k > n {
            return 0;
        }
        let k = k.min(n - k);
        let mut acc: u128 = 1;
        for i in 0..k {
            acc = acc * (n - i) as u128 / (i + 1) as u128;
        }
        acc
    }

    #[test]
    fn lumped_binomial_examples() {
        assert_eq!(lumped_binomial(3, 0, 4).unwrap(), 1);
        assert_eq!(
            lumped_binomial(5, 1, 4).unwrap(),
            binomial(5, 1) + binomial(5, 5)
        );
        assert_eq!(lumped_binomial(5, 1, 4).unwrap(), 6);
        assert_eq!(lumped_binomial(4, 0, 4).unwrap(), 2);
    }

    #[test]
    fn lumped_binomial_rejects_unreduced_weight() {
        assert_eq!(
            lumped_binomial(5, 4, 4),
            Err(Error::WeightOutOfRange { w: 4, m: 4 })
        );
        assert_eq!(lumped_binomial(5, 0, 2), Err(Error::TooFewStates(2)));
        assert_eq!(lumped_binomial(200, 0, 4), Err(Error::Overflow(200)));
    }

    #[test]
    fn lumped_binomial_handles_n_above_64() {
        let total: u128 = (0..5).map(|w| lumped_binomial(100, w, 5).unwrap()).sum();
        assert_eq!(total, 1u128 << 100);
    }

    #[test]
    fn table_partition_completeness() {
        for m in 3..=16 {
            let table = LumpedBinomialTable::new(m, 40).unwrap();
            for n in 0..=40 {
                let total: u128 = table.row(n).unwrap().iter().sum();
                assert_eq!(total, 1u128 << n, "n={n} m={m}");
            }
        }
    }

    #[test]
    fn table_matches_direct_summation_and_plain_binomials() {
        for m in 3..=10 {
            let table = LumpedBinomialTable::new(m, 60).unwrap();
            for n in 0..=60 {
                for w in 0..m {
                    let direct = lumped_binomial(n, w, m).unwrap();
                    assert_eq!(table.get(n, w), Some(direct));
                    if n < m {
                        assert_eq!(direct, binomial(n as u64, w as u64));
                    }
                }
            }
        }
        let table = LumpedBinomialTable::new(4, 10).unwrap();
        assert_eq!(table.get(11, 0), None);
        assert_eq!(table.get(3, 4), None);
    }

    #[test]
    fn conditional_probability_examples() {
        assert_eq!(conditional_probability(0, 0, 4).unwrap(), 0.0);
        assert_abs_diff_eq!(
            conditional_probability(0, 2, 4).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        for m in 3..20 {
            for x in 0..m {
                let total: f64 = (0..m)
                    .map(|y| conditional_probability(x, y, m).unwrap())
                    .sum();
                assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
                assert_eq!(conditional_probability(x, x, m).unwrap(), 0.0);
            }
        }
        assert!(conditional_probability(4, 0, 4).is_err());
        assert!(conditional_probability(0, 4, 4).is_err());
    }

    #[test]
    fn mutual_information_quoted_values() {
        assert_abs_diff_eq!(mutual_information(3), 0.5850, epsilon = 1e-4);
        assert_abs_diff_eq!(mutual_information(3), 1.5f64.log2(), epsilon = 1e-12);
        assert_abs_diff_eq!(mutual_information(4), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(
            continuous_limit_mutual_information(),
            0.4427,
            epsilon = 1e-4
        );
    }

    #[test]
    fn mutual_information_range() {
        let limit = continuous_limit_mutual_information();
        let mut previous = f64::INFINITY;
        for m in 3..200 {
            let mi = mutual_information(m);
            assert!(mi > 0.0);
            assert!(mi >= limit - 1e-12 && mi <= 1.5f64.log2() + 1e-12, "m={m}");
            assert!(mi <= previous + 1e-15);
            previous = mi;
        }
    }

    #[test]
    fn conditional_entropy_examples() {
        assert_abs_diff_eq!(conditional_entropy_y_given_x(4), 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(conditional_entropy_y_given_x(3), 1.0, epsilon = 1e-12);
        for m in 3..40 {
            assert_abs_diff_eq!(
                conditional_entropy_y_given_x(m) + mutual_information(m),
                (m as f64).log2(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn binary_entropy_examples() {
        assert_eq!(binary_entropy(0.5), 1.0);
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        assert_abs_diff_eq!(binary_entropy(0.25), 0.8113, epsilon = 1e-4);
        assert_abs_diff_eq!(1.0 - binary_entropy(0.25), 0.1887, epsilon = 1e-4);
    }

    #[test]
    fn continuous_limit_matches_closed_form() {
        // Fourier series of ln(1 - cos θ) gives 1/ln 2 - 1 bits.
        let closed_form = 1.0 / std::f64::consts::LN_2 - 1.0;
        assert_abs_diff_eq!(
            continuous_limit_mutual_information(),
            closed_form,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            continuous_limit_mutual_information(),
            mutual_information(1000),
            epsilon = 1e-4
        );
        let coarse = continuous_limit_mutual_information_with(CONTINUOUS_LIMIT_PANELS);
        let fine = continuous_limit_mutual_information_with(2 * CONTINUOUS_LIMIT_PANELS);
        assert!((coarse - fine).abs() < 1e-9);
    }

    #[test]
    fn noisy_mutual_information() {
        for &eps in &[0.0, 0.01, 0.0614, 0.2, 0.49] {
            assert_abs_diff_eq!(
                mutual_information_with_qber(4, eps),
                0.5 * (1.0 - binary_entropy(eps)),
                epsilon = 1e-12
            );
        }
        for m in 3..12 {
            assert_abs_diff_eq!(
                mutual_information_with_qber(m, 0.0),
                mutual_information(m),
                epsilon = 1e-14
            );
            assert_abs_diff_eq!(mutual_information_with_qber(m, 0.5), 0.0, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(
            continuous_limit_mutual_information_with_qber(0.05),
            mutual_information_with_qber(4000, 0.05),
            epsilon = 1e-8
        );
    }

    #[test]
    fn params_validation() {
        assert!(ProtocolParams::new(4, 0.1, 0.5, 0.0).is_ok());
        assert_eq!(
            ProtocolParams::new(2, 0.1, 0.5, 0.0),
            Err(Error::TooFewStates(2))
        );
        assert!(ProtocolParams::new(4, 0.0, 0.5, 0.0).is_err());
        assert!(ProtocolParams::new(4, 0.1, 1.5, 0.0).is_err());
        assert!(ProtocolParams::new(4, 0.1, 0.5, 0.5).is_err());
    }

    proptest! {
        #[test]
        fn conditional_probability_translation_invariant(
            m in 3usize..32, x in 0usize..32, y in 0usize..32, k in 0usize..64,
        ) {
            let (x, y) = (x % m, y % m);
            let base = conditional_probability(x, y, m).unwrap();
            let shifted = conditional_probability((x + k) % m, (y + k) % m, m).unwrap();
            prop_assert!((base - shifted).abs() < 1e-15);
            prop_assert!((0.0..=2.0 / m as f64 + 1e-15).contains(&base));
        }
    }
}
