//! Pulse-level simulation of the honest protocol.
//!
//! Pulses are split into fixed-size batches; batch `i` draws from ChaCha8
//! stream `i` of the run's seed, so results depend on the seed and batch size
//! only, never on how many worker threads execute the batches.
//!
//! A pulse that reaches Bob with several photons produces a single outcome
//! drawn from `P(y|x)`, as if Bob picked one of the clicking detectors at
//! random and discarded the extra information.

use rand::distr::weighted::WeightedIndex;
use rand::distr::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol_math::{
    conditional_entropy_y_given_x, conditional_probability, mutual_information, ProtocolParams,
};

/// Pulses per RNG stream.
pub const DEFAULT_BATCH_SIZE: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub params: ProtocolParams,
    pub pulses: u64,
    pub seed: u64,
    pub batch_size: u64,
}

impl SimulationConfig {
    pub fn new(params: ProtocolParams, pulses: u64, seed: u64) -> Result<Self> {
        if pulses == 0 {
            return Err(Error::NoPulses);
        }
        Ok(Self {
            params,
            pulses,
            seed,
            batch_size: DEFAULT_BATCH_SIZE,
        })
    }

    pub fn with_batch_size(mut self, batch_size: u64) -> Self {
        self.batch_size = batch_size.max(1);
        self
    }

    fn batches(&self) -> u64 {
        self.pulses.div_ceil(self.batch_size)
    }
}

/// One simulated pulse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PulseRecord {
    pub pulse_id: u64,
    pub x: usize,
    pub n_sent: u64,
    pub n_arrived: u64,
    pub detected: bool,
    pub y: Option<usize>,
    /// Even `m` only: after Bob reveals `y mod m/2`, both candidates for his
    /// remaining bit are equally likely given `x`.
    pub erased_for_alice: bool,
}

/// Aggregate statistics of a simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub params: ProtocolParams,
    pub seed: u64,
    pub batch_size: u64,
    pub pulses: u64,
    pub detected: u64,
    pub click_fraction: f64,
    pub expected_click_fraction: f64,
    /// `empirical_joint[x][y]` counts detected pulses.
    pub empirical_joint: Vec<Vec<u64>>,
    pub empirical_mutual_information: f64,
    /// Delta-method standard error of the plug-in estimate.
    pub mutual_information_std_error: f64,
    /// Miller–Madow first-order bias of the plug-in estimate (it
    /// overestimates by about this much).
    pub mutual_information_bias: f64,
    /// Plug-in `H(Y|X)`: bits Bob discloses per detected pulse with ideal
    /// reverse-reconciliation codes.
    pub reconciliation_bits_per_pulse: f64,
    /// Detected pulses whose bit stays erased for Alice (even `m` only).
    pub erased_for_alice: Option<u64>,
}

struct Channel {
    m: usize,
    mu: f64,
    transmission: f64,
    flip_probability: f64,
    outcome: Vec<WeightedIndex<f64>>,
}

impl Channel {
    fn new(params: &ProtocolParams) -> Result<Self> {
        let m = params.m;
        let outcome = (0..m)
            .map(|x| {
                let weights = (0..m)
                    .map(|y| conditional_probability(x, y, m))
                    .collect::<Result<Vec<_>>>()?;
                Ok(WeightedIndex::new(weights).expect("valid outcome distribution"))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            m,
            mu: params.mu,
            transmission: params.transmission,
            flip_probability: 2.0 * params.epsilon,
            outcome,
        })
    }

    fn pulse<R: Rng>(&self, rng: &mut R, symbols: &Uniform<usize>, pulse_id: u64) -> PulseRecord {
        let x = symbols.sample(rng);
        let n_sent = Poisson::new(self.mu).expect("mu > 0").sample(rng) as u64;
        let n_arrived = if n_sent == 0 {
            0
        } else {
            Binomial::new(n_sent, self.transmission)
                .expect("transmission in [0, 1]")
                .sample(rng)
        };
        let detected = n_arrived > 0;
        let y = detected.then(|| {
            let y = self.outcome[x].sample(rng);
            if self.flip_probability > 0.0 && rng.random::<f64>() < self.flip_probability {
                symbols.sample(rng)
            } else {
                y
            }
        });
        let erased_for_alice = match y {
            Some(y) if self.m.is_multiple_of(2) => {
                let k = (y + self.m - x) % self.m;
                (4 * k) % (2 * self.m) == self.m
            }
            _ => false,
        };
        PulseRecord {
            pulse_id,
            x,
            n_sent,
            n_arrived,
            detected,
            y,
            erased_for_alice,
        }
    }
}

#[derive(Debug, Clone)]
struct Tally {
    detected: u64,
    erased: u64,
    joint: Vec<u64>,
}

impl Tally {
    fn new(m: usize) -> Self {
        Self {
            detected: 0,
            erased: 0,
            joint: vec![0; m * m],
        }
    }

    fn record(&mut self, m: usize, pulse: &PulseRecord) {
        if let Some(y) = pulse.y {
            self.detected += 1;
            self.joint[pulse.x * m + y] += 1;
            self.erased += u64::from(pulse.erased_for_alice);
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.detected += other.detected;
        self.erased += other.erased;
        for (a, b) in self.joint.iter_mut().zip(other.joint) {
            *a += b;
        }
        self
    }
}

fn batch_rng(seed: u64, batch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    rng
}

fn batch_bounds(config: &SimulationConfig, batch: u64) -> (u64, u64) {
    let start = batch * config.batch_size;
    (start, (start + config.batch_size).min(config.pulses))
}

fn run_batch<F>(config: &SimulationConfig, channel: &Channel, batch: u64, mut sink: F)
where
    F: FnMut(PulseRecord),
{
    let mut rng = batch_rng(config.seed, batch);
    let symbols = Uniform::new(0, channel.m).expect("m >= 3");
    let (start, end) = batch_bounds(config, batch);
    for pulse_id in start..end {
        sink(channel.pulse(&mut rng, &symbols, pulse_id));
    }
}

/// Simulates `config.pulses` pulses and returns aggregate statistics.
pub fn simulate(config: &SimulationConfig) -> Result<SimulationSummary> {
    if config.pulses == 0 {
        return Err(Error::NoPulses);
    }
    let channel = Channel::new(&config.params)?;
    let m = channel.m;
    let tally = (0..config.batches())
        .into_par_iter()
        .map(|batch| {
            let mut tally = Tally::new(m);
            run_batch(config, &channel, batch, |p| tally.record(m, &p));
            tally
        })
        .reduce(|| Tally::new(m), Tally::merge);
    Ok(summarize(config, tally))
}

/// Like [`simulate`], also returning every pulse in `pulse_id` order.
pub fn simulate_with_trace(
    config: &SimulationConfig,
) -> Result<(SimulationSummary, Vec<PulseRecord>)> {
    if config.pulses == 0 {
        return Err(Error::NoPulses);
    }
    let channel = Channel::new(&config.params)?;
    let m = channel.m;
    let batches: Vec<(Tally, Vec<PulseRecord>)> = (0..config.batches())
        .into_par_iter()
        .map(|batch| {
            let mut tally = Tally::new(m);
            let mut records = Vec::with_capacity(config.batch_size as usize);
            run_batch(config, &channel, batch, |p| {
                tally.record(m, &p);
                records.push(p);
            });
            (tally, records)
        })
        .collect();
    let mut total = Tally::new(m);
    let mut trace = Vec::with_capacity(config.pulses as usize);
    for (tally, records) in batches {
        total = total.merge(tally);
        trace.extend(records);
    }
    Ok((summarize(config, total), trace))
}

fn summarize(config: &SimulationConfig, tally: Tally) -> SimulationSummary {
    let params = config.params;
    let m = params.m;
    let joint: Vec<Vec<u64>> = tally.joint.chunks(m).map(<[u64]>::to_vec).collect();
    let stats = JointStatistics::from_counts(&joint);
    SimulationSummary {
        params,
        seed: config.seed,
        batch_size: config.batch_size,
        pulses: config.pulses,
        detected: tally.detected,
        click_fraction: tally.detected as f64 / config.pulses as f64,
        expected_click_fraction: -(-params.mu * params.transmission).exp_m1(),
        empirical_joint: joint,
        empirical_mutual_information: stats.mutual_information,
        mutual_information_std_error: stats.std_error,
        mutual_information_bias: stats.miller_madow_bias,
        reconciliation_bits_per_pulse: stats.conditional_entropy,
        erased_for_alice: m.is_multiple_of(2).then_some(tally.erased),
    }
}

struct JointStatistics {
    mutual_information: f64,
    std_error: f64,
    miller_madow_bias: f64,
    conditional_entropy: f64,
}

impl JointStatistics {
    fn from_counts(joint: &[Vec<u64>]) -> Self {
        let total: u64 = joint.iter().flatten().sum();
        if total == 0 {
            return Self {
                mutual_information: 0.0,
                std_error: 0.0,
                miller_madow_bias: 0.0,
                conditional_entropy: 0.0,
            };
        }
        let n = total as f64;
        let m = joint.len();
        let row: Vec<f64> = joint.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
        let col: Vec<f64> = (0..m)
            .map(|y| joint.iter().map(|r| r[y]).sum::<u64>() as f64)
            .collect();
        let (mut mi, mut second_moment, mut h_y_given_x) = (0.0, 0.0, 0.0);
        for (x, r) in joint.iter().enumerate() {
            for (y, &c) in r.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                let c = c as f64;
                let p = c / n;
                let log_ratio = (c * n / (row[x] * col[y])).log2();
                mi += p * log_ratio;
                second_moment += p * log_ratio * log_ratio;
                h_y_given_x -= p * (c / row[x]).log2();
            }
        }
        let nonzero = |v: &[f64]| v.iter().filter(|&&c| c > 0.0).count() as f64;
        let cells = joint.iter().flatten().filter(|&&c| c > 0).count() as f64;
        let bias =
            (cells - nonzero(&row) - nonzero(&col) + 1.0) / (2.0 * n * std::f64::consts::LN_2);
        Self {
            mutual_information: mi,
            std_error: ((second_moment - mi * mi).max(0.0) / n).sqrt(),
            miller_madow_bias: bias,
            conditional_entropy: h_y_given_x,
        }
    }
}

/// Reverse-reconciliation bookkeeping per detected pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconciliationReport {
    pub m: usize,
    /// `log2 m - 1` bits revealing `y mod m/2` (even `m` only).
    pub basis_bits: Option<f64>,
    /// Ideal error-correcting syndrome length for the remaining information.
    pub syndrome_bits: f64,
    /// `S(Y|X)`: total disclosure.
    pub disclosed_bits: f64,
    /// `S(X:Y)`: key length with ideal codes, before privacy amplification.
    pub key_bits: f64,
    pub detected: u64,
    /// Fraction of detected pulses whose remaining bit Alice can infer
    /// exactly (even `m` only).
    pub alice_known_fraction: Option<f64>,
}

/// Splits Bob's disclosure into a partial-basis announcement and an ideal
/// syndrome, and reports the empirical erasure statistics of a run.
pub fn reconciliation_accounting(
    summary: &SimulationSummary,
    m: usize,
) -> Result<ReconciliationReport> {
    crate::protocol_math::check_states(m)?;
    if summary.params.m != m {
        return Err(Error::InvalidParameter {
            name: "m",
            value: m as f64,
            reason: "does not match the simulated number of states",
        });
    }
    let disclosed = conditional_entropy_y_given_x(m);
    let basis_bits = m.is_multiple_of(2).then(|| (m as f64).log2() - 1.0);
    let alice_known_fraction = summary.erased_for_alice.and_then(|erased| {
        (summary.detected > 0).then(|| 1.0 - erased as f64 / summary.detected as f64)
    });
    Ok(ReconciliationReport {
        m,
        basis_bits,
        syndrome_bits: disclosed - basis_bits.unwrap_or(0.0),
        disclosed_bits: disclosed,
        key_bits: mutual_information(m),
        detected: summary.detected,
        alice_known_fraction,
    })
}
