//! Net key rate of weak-coherent-pulse implementations under Eve's optimal
//! combination of blocking, IRUD and PNS attacks.
//!
//! Bob's detectors are ideal (unit efficiency, no dark counts) and Eve
//! delivers forwarded photons losslessly. To stay invisible she must keep
//! Bob's click fraction at `1 - e^{-Tμ}`, so she has to block a Poisson mass
//! `B = e^{-Tμ} - e^{-μ}` of non-empty pulses. Blocking a mass `δ` of class
//! `n` lets her resend successful discriminations on `δ P/(1-P)` more pulses
//! and removes `δ K_n / (1 - P)` of key, until the class is exhausted at
//! `b_n = 1 - P(Δ|n,m)`. She therefore fills classes greedily in decreasing
//! order of `K_n / (1 - P(Δ|n,m))`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attacks::{AttackProfile, ClassTable};
use crate::error::{Error, Result};
use crate::poisson;
use crate::protocol_math::{
    binary_entropy, check_states, continuous_limit_mutual_information_with_qber,
    mutual_information_with_qber, LumpedBinomialTable,
};
use crate::search::maximize_log_scale;

/// Default lower end of the mean-photon-number search.
pub const MU_MIN: f64 = 1e-4;
/// Default upper end of the mean-photon-number search.
pub const MU_MAX: f64 = 2.0;
/// Coarse log-grid size scanned before golden-section refinement.
pub const MU_GRID_POINTS: usize = 64;
/// Relative tolerance on the optimal `μ`.
pub const MU_REL_TOL: f64 = 1e-4;

/// Whether the transmission lies above the critical transmission.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    #[serde(rename = "above_Tc")]
    AboveTc,
    #[serde(rename = "at_or_below_Tc")]
    AtOrBelowTc,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::AboveTc => "above_Tc",
            Regime::AtOrBelowTc => "at_or_below_Tc",
        }
    }
}

/// One sample of the key rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyRatePoint {
    #[serde(rename = "T")]
    pub transmission: f64,
    pub mu: f64,
    /// Bits per sent pulse.
    pub key_rate: f64,
    /// Poisson mass Eve blocks to reproduce the honest click rate.
    pub blocked_budget: f64,
    pub regime: Regime,
}

/// Grid and optimizer settings a curve was produced with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
    /// Fixed mean photon number, or `None` when `μ` is optimized per point.
    pub mu: Option<f64>,
    pub mu_range: Option<(f64, f64)>,
}

impl SweepSpec {
    pub fn grid(&self) -> Vec<f64> {
        crate::search::log_grid(self.t_min, self.t_max, self.points)
    }
}

/// A key-rate sweep over transmission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyRateCurve {
    pub m: Option<usize>,
    pub protocol: String,
    pub sweep: SweepSpec,
    pub points: Vec<KeyRatePoint>,
    /// Optimal `μ` per point when optimizing (`None` where no `μ` gives key).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_opt: Option<Vec<Option<f64>>>,
}

/// Result of maximizing the key rate over `μ` at fixed transmission.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuOptimum {
    #[serde(rename = "T")]
    pub transmission: f64,
    /// `None` when no `μ` in the search range yields a positive key.
    pub mu_opt: Option<f64>,
    pub key_rate: f64,
}

fn check_mu(mu: f64) -> Result<()> {
    if mu > 0.0 && mu.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "mu",
            value: mu,
            reason: "mean photon number must be positive and finite",
        })
    }
}

fn check_transmission(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "T",
            value: t,
            reason: "transmission must lie in [0, 1]",
        })
    }
}

/// `e^{-Tμ} - e^{-μ}` without cancellation near `T = 1`.
fn blocking_budget(mu: f64, t: f64) -> f64 {
    (-mu).exp() * (mu * (1.0 - t)).exp_m1()
}

/// `T_c = -ln(1 - Σ_n e^{-μ} μ^n/n! P(Δ|n,m)) / μ`, the transmission at and
/// below which every detection can be explained by successful IRUD attacks.
pub fn critical_transmission(m: usize, mu: f64) -> Result<f64> {
    check_states(m)?;
    check_mu(mu)?;
    let max_n = poisson::truncation(mu);
    let table = LumpedBinomialTable::new(m, max_n)?;
    let weights = poisson::weights(mu, max_n);
    let success: f64 = (0..=max_n)
        .map(|n| {
            let row = table.row(n).expect("row exists");
            let smallest = *row.iter().min().expect("m >= 3");
            weights[n] * m as f64 * smallest as f64 * 2f64.powi(-(n as i32))
        })
        .sum();
    Ok(tc_from_success(success, mu))
}

fn tc_from_success(success: f64, mu: f64) -> f64 {
    (-(-success).ln_1p() / mu).clamp(0.0, 1.0)
}

/// Small-`μ` approximation `T_c ≈ m / (2 (m-1)!) · (μ/2)^{m-2}`.
pub fn critical_transmission_asymptotic(m: usize, mu: f64) -> f64 {
    let factorial: f64 = (1..m).map(|k| k as f64).product();
    m as f64 / (2.0 * factorial) * (mu / 2.0).powi(m as i32 - 2)
}

/// Key-rate evaluator for a fixed number of states, holding the
/// μ-independent per-photon-number attack data.
#[derive(Debug, Clone)]
pub struct KeyRateModel {
    table: ClassTable,
    // classes sorted by decreasing K_n / (1 - P)
    blocking_order: Vec<usize>,
}

/// Key rate together with Eve's per-class allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct KeyRateEvaluation {
    pub point: KeyRatePoint,
    pub profiles: Vec<AttackProfile>,
}

impl KeyRateModel {
    /// Model truncated at `max_n` photons.
    pub fn new(m: usize, max_n: usize) -> Result<Self> {
        Ok(Self::from_table(ClassTable::new(m, max_n)?))
    }

    /// Model with enough photon numbers for every `μ ≤ mu_max`.
    pub fn for_mu_up_to(m: usize, mu_max: f64) -> Result<Self> {
        check_mu(mu_max)?;
        Self::new(m, poisson::truncation(mu_max))
    }

    pub fn from_table(table: ClassTable) -> Self {
        let mut blocking_order: Vec<usize> = (0..table.classes().len()).collect();
        blocking_order.sort_by(|&a, &b| {
            let (ca, cb) = (&table.classes()[a], &table.classes()[b]);
            cb.blocking_value()
                .total_cmp(&ca.blocking_value())
                .then(ca.n.cmp(&cb.n))
        });
        Self {
            table,
            blocking_order,
        }
    }

    pub fn m(&self) -> usize {
        self.table.m()
    }

    pub fn table(&self) -> &ClassTable {
        &self.table
    }

    /// Photon numbers in the order Eve blocks them.
    pub fn blocking_order(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocking_order
            .iter()
            .map(|&i| self.table.classes()[i].n)
    }

    /// Poisson mass of pulses beyond the truncation; blockable, key-free.
    fn tail_mass(&self, weights: &[f64], mu: f64) -> f64 {
        let kept: f64 = weights[1..].iter().sum();
        (-(-mu).exp_m1() - kept).max(0.0)
    }

    /// Critical transmission under this model's truncation.
    pub fn critical_transmission(&self, mu: f64) -> Result<f64> {
        check_mu(mu)?;
        let weights = poisson::weights(mu, self.table.max_n());
        let success: f64 = self
            .table
            .classes()
            .iter()
            .map(|c| weights[c.n] * c.p_delta)
            .sum();
        Ok(tc_from_success(success, mu))
    }

    /// Net key rate and Eve's optimal blocking at `(μ, T)`.
    pub fn evaluate(&self, mu: f64, t: f64) -> Result<KeyRateEvaluation> {
        check_mu(mu)?;
        check_transmission(t)?;
        let weights = poisson::weights(mu, self.table.max_n());
        let budget = blocking_budget(mu, t);

        let mut blocked = vec![0.0; self.table.classes().len()];
        let mut remaining = budget;
        for &i in &self.blocking_order {
            if remaining <= 0.0 {
                break;
            }
            let class = &self.table.classes()[i];
            let weight = weights[class.n];
            let take = (weight * class.blocking_cap()).min(remaining);
            if weight > 0.0 {
                blocked[i] = take / weight;
            }
            remaining -= take;
        }
        if remaining > 0.0 {
            remaining -= self.tail_mass(&weights, mu);
        }

        let exhausted = remaining > 0.0;
        let profiles: Vec<AttackProfile> = self
            .table
            .classes()
            .iter()
            .zip(&blocked)
            .map(|(class, &b)| {
                // out of budget: Eve blocks everything she can see
                let b = if exhausted { 1.0 } else { b };
                AttackProfile::new(class, weights[class.n], b)
            })
            .collect();
        let key_rate = if exhausted {
            0.0
        } else {
            profiles.iter().map(AttackProfile::key_contribution).sum()
        };
        let regime = if exhausted || t <= self.critical_transmission(mu)? {
            Regime::AtOrBelowTc
        } else {
            Regime::AboveTc
        };
        let key_rate = match regime {
            Regime::AboveTc => key_rate,
            Regime::AtOrBelowTc => 0.0,
        };
        Ok(KeyRateEvaluation {
            point: KeyRatePoint {
                transmission: t,
                mu,
                key_rate,
                blocked_budget: budget,
                regime,
            },
            profiles,
        })
    }

    pub fn key_rate(&self, mu: f64, t: f64) -> Result<KeyRatePoint> {
        Ok(self.evaluate(mu, t)?.point)
    }

    /// Key rate with no blocking at all: `Σ_n e^{-μ} μ^n/n! K_n`.
    pub fn no_blocking_bound(&self, mu: f64) -> f64 {
        let weights = poisson::weights(mu, self.table.max_n());
        self.table
            .classes()
            .iter()
            .map(|c| weights[c.n] * c.k_n)
            .sum()
    }

    /// Maximizes the key rate over `μ ∈ [mu_min, mu_max]`.
    ///
    /// The model must cover `mu_max` (see [`KeyRateModel::for_mu_up_to`]).
    pub fn optimize_mu_in(&self, t: f64, mu_min: f64, mu_max: f64) -> Result<MuOptimum> {
        check_transmission(t)?;
        check_mu(mu_min)?;
        check_mu(mu_max)?;
        let found = maximize_log_scale(
            |mu| self.key_rate(mu, t).map(|p| p.key_rate).unwrap_or(0.0),
            mu_min,
            mu_max,
            MU_GRID_POINTS,
            MU_REL_TOL.ln_1p(),
        );
        Ok(match found {
            Some((mu, key_rate)) => MuOptimum {
                transmission: t,
                mu_opt: Some(mu),
                key_rate,
            },
            None => MuOptimum {
                transmission: t,
                mu_opt: None,
                key_rate: 0.0,
            },
        })
    }

    pub fn optimize_mu(&self, t: f64) -> Result<MuOptimum> {
        self.optimize_mu_in(t, MU_MIN, MU_MAX)
    }

    /// Fixed-`μ` sweep over `spec`'s transmission grid, evaluated in parallel.
    pub fn sweep(&self, mu: f64, t_min: f64, t_max: f64, points: usize) -> Result<KeyRateCurve> {
        let spec = SweepSpec {
            t_min,
            t_max,
            points,
            mu: Some(mu),
            mu_range: None,
        };
        let points = spec
            .grid()
            .into_par_iter()
            .map(|t| self.key_rate(mu, t))
            .collect::<Result<Vec<_>>>()?;
        Ok(KeyRateCurve {
            m: Some(self.m()),
            protocol: "siftless".into(),
            sweep: spec,
            points,
            mu_opt: None,
        })
    }

    /// Optimized-`μ` sweep, evaluated in parallel.
    pub fn sweep_optimized(
        &self,
        t_min: f64,
        t_max: f64,
        points: usize,
        mu_range: (f64, f64),
    ) -> Result<KeyRateCurve> {
        let spec = SweepSpec {
            t_min,
            t_max,
            points,
            mu: None,
            mu_range: Some(mu_range),
        };
        let optima = spec
            .grid()
            .into_par_iter()
            .map(|t| self.optimize_mu_in(t, mu_range.0, mu_range.1))
            .collect::<Result<Vec<_>>>()?;
        let points = optima
            .iter()
            .map(|opt| match opt.mu_opt {
                Some(mu) => self.key_rate(mu, opt.transmission),
                None => Ok(KeyRatePoint {
                    transmission: opt.transmission,
                    mu: f64::NAN,
                    key_rate: 0.0,
                    blocked_budget: 0.0,
                    regime: Regime::AtOrBelowTc,
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(KeyRateCurve {
            m: Some(self.m()),
            protocol: "siftless".into(),
            sweep: spec,
            points,
            mu_opt: Some(optima.iter().map(|o| o.mu_opt).collect()),
        })
    }
}

/// Net key rate `K(T, μ)` in bits per pulse, with the default Poisson
/// truncation for `μ`.
pub fn net_key_rate(m: usize, mu: f64, t: f64) -> Result<KeyRatePoint> {
    KeyRateModel::for_mu_up_to(m, mu)?.key_rate(mu, t)
}

/// Maximizes [`net_key_rate`] over `μ ∈ [1e-4, 2]`.
pub fn optimize_mu(m: usize, t: f64) -> Result<MuOptimum> {
    KeyRateModel::for_mu_up_to(m, MU_MAX)?.optimize_mu(t)
}

/// Number of states for the QBER threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QberTarget {
    States(usize),
    Continuous,
}

/// QBER at which the single-photon key `S(X:Y|m, ε) - h(ε)` vanishes.
///
/// Eve's single-photon information is `h(ε)`; Alice and Bob's channel is the
/// depolarized `P_ε(y|x) = (1 - (1 - 2ε) cos((y - x)θ)) / m`.
pub fn qber_threshold(target: QberTarget) -> Result<f64> {
    let key = |eps: f64| -> f64 {
        let mi = match target {
            QberTarget::States(m) => mutual_information_with_qber(m, eps),
            QberTarget::Continuous => continuous_limit_mutual_information_with_qber(eps),
        };
        mi - binary_entropy(eps)
    };
    if let QberTarget::States(m) = target {
        check_states(m)?;
    }
    // key(0) = S(X:Y) > 0 and key(1/2) = -1
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if key(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Probability that a pulse carries two or more photons.
fn multiphoton_probability(mu: f64) -> f64 {
    -(-mu).exp_m1() - mu * (-mu).exp()
}

/// PNS-limited BB84 with weak coherent pulses: half the detections survive
/// sifting and Eve is credited with full information on every multiphoton
/// pulse, `K = ½ max(0, 1 - e^{-Tμ} - P(n ≥ 2))`.
pub fn bb84_baseline(mu: f64, t: f64) -> Result<KeyRatePoint> {
    check_mu(mu)?;
    check_transmission(t)?;
    let clicks = -(-mu * t).exp_m1();
    let margin = clicks - multiphoton_probability(mu);
    let regime = if margin > 0.0 {
        Regime::AboveTc
    } else {
        Regime::AtOrBelowTc
    };
    Ok(KeyRatePoint {
        transmission: t,
        mu,
        key_rate: 0.5 * margin.max(0.0),
        blocked_budget: blocking_budget(mu, t),
        regime,
    })
}

/// Transmission below which [`bb84_baseline`] gives no key.
pub fn bb84_critical_transmission(mu: f64) -> Result<f64> {
    check_mu(mu)?;
    Ok(tc_from_success(multiphoton_probability(mu), mu))
}

/// Maximizes [`bb84_baseline`] over `μ ∈ [mu_min, mu_max]`.
pub fn bb84_optimize_mu(t: f64, mu_min: f64, mu_max: f64) -> Result<MuOptimum> {
    check_transmission(t)?;
    let found = maximize_log_scale(
        |mu| bb84_baseline(mu, t).map(|p| p.key_rate).unwrap_or(0.0),
        mu_min,
        mu_max,
        MU_GRID_POINTS,
        MU_REL_TOL.ln_1p(),
    );
    Ok(MuOptimum {
        transmission: t,
        mu_opt: found.map(|f| f.0),
        key_rate: found.map_or(0.0, |f| f.1),
    })
}

/// BB84 sweep at fixed `μ` or, with `mu: None`, optimized per point.
pub fn bb84_sweep(
    mu: Option<f64>,
    t_min: f64,
    t_max: f64,
    points: usize,
    mu_range: (f64, f64),
) -> Result<KeyRateCurve> {
    let spec = SweepSpec {
        t_min,
        t_max,
        points,
        mu,
        mu_range: mu.is_none().then_some(mu_range),
    };
    let grid = spec.grid();
    let (points, mu_opt) = match mu {
        Some(mu) => (
            grid.into_par_iter()
                .map(|t| bb84_baseline(mu, t))
                .collect::<Result<Vec<_>>>()?,
            None,
        ),
        None => {
            let optima = grid
                .into_par_iter()
                .map(|t| bb84_optimize_mu(t, mu_range.0, mu_range.1))
                .collect::<Result<Vec<_>>>()?;
            let points = optima
                .iter()
                .map(|o| match o.mu_opt {
                    Some(mu) => bb84_baseline(mu, o.transmission),
                    None => Ok(KeyRatePoint {
                        transmission: o.transmission,
                        mu: f64::NAN,
                        key_rate: 0.0,
                        blocked_budget: 0.0,
                        regime: Regime::AtOrBelowTc,
                    }),
                })
                .collect::<Result<Vec<_>>>()?;
            (points, Some(optima.iter().map(|o| o.mu_opt).collect()))
        }
    };
    Ok(KeyRateCurve {
        m: None,
        protocol: "bb84".into(),
        sweep: spec,
        points,
        mu_opt,
    })
}
