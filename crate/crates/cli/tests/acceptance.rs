//! Acceptance suite: one PASS/FAIL line per criterion, each checked at its
//! pinned tolerance and runtime budget. Exits nonzero if any criterion fails.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use siftless_core::quantum_states::PSD_TOL;
use siftless_core::{
    continuous_limit_mutual_information, critical_transmission, critical_transmission_asymptotic,
    holevo_pns, irud_probability, key_rate_per_n, mutual_information, qber_threshold, rho_average,
    rho_conditioned, simulate, simulate_with_trace, KeyRateModel, ProtocolParams, QberTarget,
    SimulationConfig,
};

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    check: fn() -> Outcome,
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(label: &str, value: f64, target: f64, tol: f64) -> Result<String, String> {
    let line = format!("{label}={value:.6} (target {target} ± {tol})");
    ensure((value - target).abs() <= tol, line.clone())?;
    Ok(line)
}

/// Least-squares slope of `ys` against `xs`.
fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn log_space(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn c1_information_constants() -> Outcome {
    let a = within("S(X:Y|3)", mutual_information(3), 0.5850, 1e-3)?;
    let b = within("S(X:Y|4)", mutual_information(4), 0.5, 1e-3)?;
    let c = within(
        "S(X:Y|∞)",
        continuous_limit_mutual_information(),
        0.4427,
        1e-3,
    )?;
    Ok(format!("{a}; {b}; {c}"))
}

fn c2_two_photon_pns() -> Outcome {
    let chi = holevo_pns(2, 4).map_err(|e| e.to_string())?;
    let k2 = key_rate_per_n(2, 4).map_err(|e| e.to_string())?;
    let a = within("holevo_pns(2,4)", chi, 0.1887, 1e-3)?;
    let b = within("K_2", k2, 0.3113, 1e-3)?;
    Ok(format!("{a}; {b}"))
}

fn c3_irud_structure() -> Outcome {
    let mut checked = 0;
    for m in 3..=10 {
        let values: Vec<f64> = (0..=30)
            .map(|n| irud_probability(n, m))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        for (n, &p) in values.iter().enumerate() {
            // oracle: m 2^{-n} times the smallest lumped binomial class
            let smallest = (0..m)
                .map(|w| (w..=n).step_by(m).map(|k| binomial(n, k)).sum::<f64>())
                .fold(f64::INFINITY, f64::min);
            let oracle = m as f64 * smallest / 2f64.powi(n as i32);
            ensure(
                (p - oracle).abs() <= 1e-12 * oracle.max(1.0),
                format!("P(Δ|{n},{m})={p} vs oracle {oracle}"),
            )?;
            ensure(
                (p == 0.0) == (n + 1 < m),
                format!("support wrong at n={n}, m={m}: {p}"),
            )?;
            if n >= 2 {
                ensure(
                    p >= values[n - 2],
                    format!("P(Δ|{n},{m}) < P(Δ|{},{m})", n - 2),
                )?;
            }
            checked += 1;
        }
        let first = values[m - 1];
        let expected = m as f64 * 2f64.powi(1 - m as i32);
        ensure(
            (first - expected).abs() <= 1e-15,
            format!(
                "first nonzero P(Δ|{},{m})={first}, expected {expected}",
                m - 1
            ),
        )?;
    }
    Ok(format!("{checked} (n, m) pairs"))
}

fn c4_critical_transmission() -> Outcome {
    let mut worst = 0.0f64;
    let mut slopes = Vec::new();
    for m in 3..=6 {
        for mu in log_space(1e-3, 0.1, 12) {
            let exact = critical_transmission(m, mu).map_err(|e| e.to_string())?;
            let approx = critical_transmission_asymptotic(m, mu);
            worst = worst.max((approx / exact - 1.0).abs());
        }
        let mus = log_space(0.01, 0.1, 10);
        let tcs: Vec<f64> = mus
            .iter()
            .map(|&mu| critical_transmission(m, mu).map(f64::ln))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let lmu: Vec<f64> = mus.iter().map(|mu| mu.ln()).collect();
        let s = slope(&lmu, &tcs);
        ensure(
            (s - (m as f64 - 2.0)).abs() <= 0.1,
            format!("m={m}: slope {s:.4}, expected {}", m - 2),
        )?;
        slopes.push(format!("m={m}:{s:.3}"));
    }
    ensure(
        worst <= 0.15,
        format!("exact vs asymptotic differ by {:.1}%", 100.0 * worst),
    )?;
    Ok(format!(
        "max exact/asymptotic deviation {:.2}%; slopes {}",
        100.0 * worst,
        slopes.join(" ")
    ))
}

fn c5_key_rate_scaling() -> Outcome {
    let model = KeyRateModel::for_mu_up_to(4, 2.0).map_err(|e| e.to_string())?;
    let curve = model
        .sweep_optimized(1e-4, 1e-2, 9, (1e-4, 2.0))
        .map_err(|e| e.to_string())?;
    let (lt, lk): (Vec<f64>, Vec<f64>) = curve
        .points
        .iter()
        .map(|p| (p.transmission.ln(), p.key_rate.ln()))
        .unzip();
    ensure(
        lk.iter().all(|k| k.is_finite()),
        "zero key rate in the fit range",
    )?;
    let s = slope(&lt, &lk);
    ensure(
        (s - 1.5).abs() <= 0.1,
        format!("slope {s:.4}, expected 1.5 ± 0.1"),
    )?;
    let mu_opt = model
        .optimize_mu(1e-3)
        .map_err(|e| e.to_string())?
        .mu_opt
        .ok_or("no key at T=1e-3")?;
    let ratio = mu_opt / 0.0632;
    ensure(
        (1.0 / 1.5..=1.5).contains(&ratio),
        format!("μ_opt={mu_opt:.4} is not within a factor 1.5 of 0.0632"),
    )?;
    Ok(format!("slope {s:.4}; μ_opt(T=1e-3)={mu_opt:.4}"))
}

fn c6_qber_thresholds() -> Outcome {
    let targets = [
        ("m=4", QberTarget::States(4), 6.14),
        ("m=3", QberTarget::States(3), 6.89),
        ("continuous", QberTarget::Continuous, 5.93),
    ];
    let mut lines = Vec::new();
    let mut failed = false;
    for (label, target, percent) in targets {
        let value = 100.0 * qber_threshold(target).map_err(|e| e.to_string())?;
        let ok = (value - percent).abs() <= 0.05;
        failed |= !ok;
        lines.push(format!(
            "{label}: {value:.4}% (target {percent}% ± 0.05){}",
            if ok { "" } else { " MISMATCH" }
        ));
    }
    if failed {
        Err(lines.join("; "))
    } else {
        Ok(lines.join("; "))
    }
}

const ORACLE_MAX_N: usize = 10;

/// Exhaustive minimization of Eve's objective over blocking fractions.
///
/// The key is `Σ_n w_n K_n max(0, 1 - b_n/(1-P_n))` with the budget
/// `Σ_n w_n b_n + t = B`, where `t ≤ tail` is blocked mass beyond the
/// truncation. The objective is piecewise linear with breakpoints at
/// `b_n = 1 - P_n`, so an optimum sits at a vertex: every coordinate at a
/// breakpoint `{0, 1 - P_n, 1}` except at most one.
fn exhaustive_min_key(classes: &[(f64, f64, f64)], tail: f64, budget: f64) -> Option<f64> {
    let key_of = |(w, p, k): (f64, f64, f64), b: f64| w * k * (1.0 - b / (1.0 - p)).max(0.0);
    let tail_index = classes.len();
    let mut best: Option<f64> = None;
    for free in 0..=tail_index {
        let others: Vec<usize> = (0..=tail_index).filter(|&i| i != free).collect();
        let radix = |i: usize| if i == tail_index { 2 } else { 3 };
        let assignments: usize = others.iter().map(|&i| radix(i)).product();
        for code in 0..assignments {
            let (mut mass, mut key, mut rest_code) = (0.0, 0.0, code);
            for &i in &others {
                let digit = rest_code % radix(i);
                rest_code /= radix(i);
                if i == tail_index {
                    mass += [0.0, tail][digit];
                } else {
                    let c = classes[i];
                    let b = [0.0, 1.0 - c.1, 1.0][digit];
                    mass += c.0 * b;
                    key += key_of(c, b);
                }
            }
            let rest = budget - mass;
            let feasible = if free == tail_index {
                (-1e-15..=tail + 1e-15).contains(&rest)
            } else {
                let c = classes[free];
                let b = rest / c.0;
                let ok = (-1e-12..=1.0 + 1e-12).contains(&b);
                if ok {
                    key += key_of(c, b.clamp(0.0, 1.0));
                }
                ok
            };
            if feasible {
                best = Some(best.map_or(key, |v: f64| v.min(key)));
            }
        }
    }
    best
}

fn c7_oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_607);
    let mut worst = 0.0f64;
    let mut positive = 0;
    for draw in 0..20 {
        let m = rng.random_range(3..=8);
        let mu = (rng.random_range(0.01f64.ln()..1.0f64.ln())).exp();
        let t = (rng.random_range(1e-3f64.ln()..0.0)).exp();
        let model = KeyRateModel::new(m, ORACLE_MAX_N).map_err(|e| e.to_string())?;
        let greedy = model.key_rate(mu, t).map_err(|e| e.to_string())?.key_rate;

        let mut weight = (-mu).exp();
        let mut classes = Vec::new();
        for n in 1..=ORACLE_MAX_N {
            weight *= mu / n as f64;
            let class = model.table().class(n).ok_or("missing class")?;
            classes.push((weight, class.p_delta, class.k_n));
        }
        let kept: f64 = classes.iter().map(|c| c.0).sum();
        let tail = (1.0 - (-mu).exp() - kept).max(0.0);
        let budget = (-t * mu).exp() - (-mu).exp();
        let oracle = exhaustive_min_key(&classes, tail, budget).unwrap_or(0.0);
        let diff = (greedy - oracle).abs();
        ensure(
            diff <= 1e-9,
            format!(
                "draw {draw} (m={m}, μ={mu:.4}, T={t:.4e}): greedy {greedy:e} vs oracle {oracle:e}"
            ),
        )?;
        worst = worst.max(diff);
        positive += usize::from(greedy > 0.0);
    }
    Ok(format!(
        "20 draws ({positive} with positive key), max |Δ|={worst:.2e}"
    ))
}

fn c8_quantum_state_invariants() -> Outcome {
    let mut matrices = 0;
    let mut worst_mix = 0.0f64;
    for m in 3..=12 {
        for n in 1..=20 {
            let avg = rho_average(n, m).map_err(|e| e.to_string())?;
            avg.validate()
                .map_err(|e| format!("ρ̄(n={n}, m={m}): {e}"))?;
            let mut mix = avg.entries().map(|z| z * 0.0);
            let mut reference: Option<Vec<f64>> = None;
            for y in 0..m {
                let rho = rho_conditioned(y, n, m).map_err(|e| e.to_string())?;
                rho.validate()
                    .map_err(|e| format!("ρ_{y}(n={n}, m={m}): {e}"))?;
                ensure(
                    rho.eigenvalues().iter().all(|&l| l >= -PSD_TOL),
                    format!("ρ_{y}(n={n}, m={m}) not PSD"),
                )?;
                mix += rho.entries().unscale(m as f64);
                let spectrum = rho.eigenvalues();
                match &reference {
                    None => reference = Some(spectrum),
                    Some(r) => {
                        let d = r
                            .iter()
                            .zip(&spectrum)
                            .map(|(a, b)| (a - b).abs())
                            .fold(0.0, f64::max);
                        ensure(
                            d <= 1e-10,
                            format!("spectrum of ρ_{y}(n={n}, m={m}) depends on y"),
                        )?;
                    }
                }
                matrices += 1;
            }
            let defect = (mix - avg.entries())
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            ensure(
                defect <= 1e-12,
                format!("mixture identity off by {defect:e} at n={n}, m={m}"),
            )?;
            worst_mix = worst_mix.max(defect);
        }
    }
    // spectra stop depending on m once m ≥ n + 2
    let mut comparisons = 0;
    for n in 1..=10 {
        let top = |m: usize| -> Result<Vec<f64>, String> {
            let mut s = rho_conditioned(0, n, m)
                .map_err(|e| e.to_string())?
                .eigenvalues();
            s.reverse();
            s.truncate(n + 1);
            Ok(s)
        };
        let base = top(n + 2)?;
        for m in (n + 3)..=12 {
            let other = top(m)?;
            let d = base
                .iter()
                .zip(&other)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            ensure(
                d <= 1e-10,
                format!("spectrum at n={n} differs between m={} and m={m}", n + 2),
            )?;
            comparisons += 1;
        }
    }
    Ok(format!(
        "{matrices} conditioned states valid; mixture defect ≤ {worst_mix:.1e}; {comparisons} m-independence checks"
    ))
}

fn c9_monte_carlo() -> Outcome {
    let params = ProtocolParams::new(4, 0.1, 0.5, 0.0).map_err(|e| e.to_string())?;
    let config = SimulationConfig::new(params, 1_000_000, 42).map_err(|e| e.to_string())?;
    let summary = simulate(&config).map_err(|e| e.to_string())?;
    let p = -(-0.05f64).exp_m1();
    let sigma = (p * (1.0 - p) / 1e6).sqrt();
    let z = (summary.click_fraction - p) / sigma;
    ensure(
        z.abs() <= 5.0,
        format!(
            "click fraction {} is {z:.2}σ from {p}",
            summary.click_fraction
        ),
    )?;
    let diagonal: u64 = (0..4).map(|x| summary.empirical_joint[x][x]).sum();
    ensure(diagonal == 0, format!("{diagonal} detections with y = x"))?;
    let mi = summary.empirical_mutual_information;
    ensure((mi - 0.5).abs() <= 0.01, format!("empirical MI {mi}"))?;

    let (first, trace_a) = simulate_with_trace(&config).map_err(|e| e.to_string())?;
    let (second, trace_b) = simulate_with_trace(&config).map_err(|e| e.to_string())?;
    ensure(
        first == summary && second == summary,
        "summaries differ across reruns",
    )?;
    ensure(trace_a == trace_b, "traces differ across reruns")?;
    Ok(format!(
        "click fraction {:.6} ({z:+.2}σ), y=x count 0, MI {mi:.4}, reruns identical",
        summary.click_fraction
    ))
}

fn fixture(m: usize) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("tests/fixtures/keyrate_mu0.1_m{m}.csv"))
}

fn c10_key_rate_curve_shape() -> Outcome {
    let mut previous_tc = f64::INFINITY;
    let mut tcs = Vec::new();
    for m in 3..=6 {
        let output = Command::new(env!("CARGO_BIN_EXE_siftless"))
            .args(["keyrate", "--m", &m.to_string(), "--mu", "0.1"])
            .output()
            .map_err(|e| e.to_string())?;
        ensure(output.status.success(), format!("keyrate --m {m} failed"))?;
        let golden = std::fs::read(fixture(m)).map_err(|e| e.to_string())?;
        ensure(
            output.stdout == golden,
            format!("m={m}: output differs from golden fixture"),
        )?;

        let t_c = critical_transmission(m, 0.1).map_err(|e| e.to_string())?;
        let text = String::from_utf8(output.stdout).map_err(|e| e.to_string())?;
        let mut rows = 0;
        for line in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
            let fields: Vec<&str> = line.split(',').collect();
            let t: f64 = fields[0].parse().map_err(|_| format!("bad T in {line}"))?;
            let k: f64 = fields[2]
                .parse()
                .map_err(|_| format!("bad key_rate in {line}"))?;
            if t <= t_c {
                ensure(k == 0.0, format!("m={m}: key {k} at T={t} ≤ T_c={t_c}"))?;
            } else {
                ensure(k > 0.0, format!("m={m}: no key at T={t} > T_c={t_c}"))?;
            }
            rows += 1;
        }
        ensure(rows == 64, format!("m={m}: {rows} rows"))?;
        ensure(t_c < previous_tc, format!("T_c does not decrease at m={m}"))?;
        previous_tc = t_c;
        tcs.push(format!("m={m}:{t_c:.3e}"));
    }
    Ok(format!("golden files match; T_c {}", tcs.join(" ")))
}

fn main() {
    let criteria = [
        Criterion {
            id: 1,
            name: "information constants",
            budget: Duration::from_secs(1),
            check: c1_information_constants,
        },
        Criterion {
            id: 2,
            name: "two-photon PNS",
            budget: Duration::from_secs(1),
            check: c2_two_photon_pns,
        },
        Criterion {
            id: 3,
            name: "IRUD structure",
            budget: Duration::from_secs(1),
            check: c3_irud_structure,
        },
        Criterion {
            id: 4,
            name: "critical transmission",
            budget: Duration::from_secs(5),
            check: c4_critical_transmission,
        },
        Criterion {
            id: 5,
            name: "key-rate scaling",
            budget: Duration::from_secs(60),
            check: c5_key_rate_scaling,
        },
        Criterion {
            id: 6,
            name: "QBER thresholds",
            budget: Duration::from_secs(5),
            check: c6_qber_thresholds,
        },
        Criterion {
            id: 7,
            name: "greedy vs exhaustive blocking",
            budget: Duration::from_secs(60),
            check: c7_oracle_equivalence,
        },
        Criterion {
            id: 8,
            name: "quantum-state invariants",
            budget: Duration::from_secs(120),
            check: c8_quantum_state_invariants,
        },
        Criterion {
            id: 9,
            name: "Monte Carlo validation",
            budget: Duration::from_secs(60),
            check: c9_monte_carlo,
        },
        Criterion {
            id: 10,
            name: "key-rate curve shape and golden files",
            budget: Duration::from_secs(60),
            check: c10_key_rate_curve_shape,
        },
    ];
    let mut failures = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.check)();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > c.budget => Err(format!(
                "{detail}; runtime {:.2}s exceeds {}s",
                elapsed.as_secs_f64(),
                c.budget.as_secs()
            )),
            other => other,
        };
        let (status, detail) = match outcome {
            Ok(detail) => ("PASS", detail),
            Err(detail) => {
                failures += 1;
                ("FAIL", detail)
            }
        };
        println!(
            "{status} criterion {:>2} ({}): {detail} [{:.2}s]",
            c.id,
            c.name,
            elapsed.as_secs_f64()
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
