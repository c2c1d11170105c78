//! Eve's toolbox on an `n`-photon pulse: block it, attempt an unambiguous
//! discrimination and resend (IRUD), or split off `n - 1` photons (PNS).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol_math::{check_states, mutual_information, LumpedBinomialTable, MAX_EXACT_N};
use crate::quantum_states::{rho_average, rho_conditioned, von_neumann_entropy};

/// Probability that an unambiguous discrimination of `m` symmetric
/// `n`-photon states succeeds: `2^{-n} · m · min_w C(n, w[m])`.
///
/// Zero exactly when `n < m - 1`.
pub fn irud_probability(n: usize, m: usize) -> Result<f64> {
    check_states(m)?;
    let table = LumpedBinomialTable::new(m, n)?;
    Ok(irud_from_row(table.row(n).expect("row n exists"), n))
}

fn irud_from_row(row: &[u128], n: usize) -> f64 {
    let smallest = row.iter().copied().min().unwrap_or(0);
    row.len() as f64 * smallest as f64 * 2f64.powi(-(n as i32))
}

/// Resend and PNS fractions `(u_n, p_n)` of the `n`-photon pulses when Eve
/// blocks a fraction `b_n` and discards only failed discriminations.
///
/// Each blocked failure covers `P/(1-P)` successful resends, so
/// `u_n = min(b_n P/(1-P), 1 - b_n)` and `p_n = max(1 - b_n - u_n, 0)`.
pub fn blocking_fractions(b_n: f64, p_delta: f64) -> (f64, f64) {
    let u = (b_n * p_delta / (1.0 - p_delta)).min(1.0 - b_n);
    let p = (1.0 - b_n - u).max(0.0);
    (u, p)
}

/// Holevo information `S(Y:E|n, PNS) = S(ρ_{n-1}) - S(ρ_{y,n-1})` that Eve
/// gains on Bob's outcome by keeping `n - 1` photons of an `n`-photon pulse.
pub fn holevo_pns(n: usize, m: usize) -> Result<f64> {
    check_states(m)?;
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            value: 0.0,
            reason: "PNS attack needs at least one photon",
        });
    }
    let kept = n - 1;
    if kept == 0 {
        return Ok(0.0);
    }
    let average = von_neumann_entropy(&rho_average(kept, m)?)?;
    let conditioned = von_neumann_entropy(&rho_conditioned(0, kept, m)?)?;
    Ok(average - conditioned)
}

/// Net reverse-reconciliation key rate of `n`-photon pulses under PNS,
/// `K_n = max(0, S(X:Y) - S(Y:E|n, PNS))`.
pub fn key_rate_per_n(n: usize, m: usize) -> Result<f64> {
    Ok((mutual_information(m) - holevo_pns(n, m)?).max(0.0))
}

/// μ-independent attack data for one photon number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonClass {
    pub n: usize,
    pub p_delta: f64,
    pub holevo_pns: f64,
    pub k_n: f64,
}

impl PhotonClass {
    /// Key destroyed per unit of blocked probability mass:
    /// `K_n / (1 - P(Δ|n,m))`. Infinite when the IRUD always succeeds.
    pub fn blocking_value(&self) -> f64 {
        if self.p_delta >= 1.0 {
            f64::INFINITY
        } else {
            self.k_n / (1.0 - self.p_delta)
        }
    }

    /// Largest useful blocked fraction, `1 - P(Δ|n,m)`.
    pub fn blocking_cap(&self) -> f64 {
        (1.0 - self.p_delta).max(0.0)
    }
}

/// Per-photon-number attack data for `n = 1..=max_n` at fixed `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassTable {
    m: usize,
    mutual_information: f64,
    classes: Vec<PhotonClass>,
}

impl ClassTable {
    pub fn new(m: usize, max_n: usize) -> Result<Self> {
        check_states(m)?;
        // Eve's states use n - 1 photons, the IRUD uses n.
        if max_n > MAX_EXACT_N {
            return Err(Error::Overflow(max_n));
        }
        let table = LumpedBinomialTable::new(m, max_n)?;
        let mi = mutual_information(m);
        let classes = (1..=max_n)
            .map(|n| {
                let holevo = holevo_pns(n, m)?;
                Ok(PhotonClass {
                    n,
                    p_delta: irud_from_row(table.row(n).expect("row exists"), n),
                    holevo_pns: holevo,
                    k_n: (mi - holevo).max(0.0),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            m,
            mutual_information: mi,
            classes,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn max_n(&self) -> usize {
        self.classes.len()
    }

    pub fn mutual_information(&self) -> f64 {
        self.mutual_information
    }

    /// Classes ordered by photon number, starting at `n = 1`.
    pub fn classes(&self) -> &[PhotonClass] {
        &self.classes
    }

    pub fn class(&self, n: usize) -> Option<&PhotonClass> {
        n.checked_sub(1).and_then(|i| self.classes.get(i))
    }
}

/// Attack record for one photon number at a given `μ` and blocking choice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackProfile {
    pub n: usize,
    pub poisson_weight: f64,
    pub p_delta: f64,
    pub holevo_pns: f64,
    pub k_n: f64,
    pub b_n: f64,
    pub u_n: f64,
    pub p_n: f64,
}

impl AttackProfile {
    pub fn new(class: &PhotonClass, poisson_weight: f64, b_n: f64) -> Self {
        let (u_n, p_n) = if class.p_delta >= 1.0 {
            (1.0 - b_n, 0.0)
        } else {
            blocking_fractions(b_n, class.p_delta)
        };
        Self {
            n: class.n,
            poisson_weight,
            p_delta: class.p_delta,
            holevo_pns: class.holevo_pns,
            k_n: class.k_n,
            b_n,
            u_n,
            p_n,
        }
    }

    /// Contribution `poisson_weight · p_n · K_n` to the net key rate.
    pub fn key_contribution(&self) -> f64 {
        self.poisson_weight * self.p_n * self.k_n
    }
}
