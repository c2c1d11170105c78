//! Command implementations. Each builds a [`Report`] that the caller
//! serializes.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::json;
use siftless_core::keyrate::{bb84_sweep, MU_MAX};
use siftless_core::{
    bb84_critical_transmission, conditional_entropy_y_given_x, critical_transmission_asymptotic,
    mutual_information, qber_threshold, reconciliation_accounting, simulate, simulate_with_trace,
    ClassTable, KeyRateCurve, KeyRateModel, ProtocolParams, QberTarget, SimulationConfig,
};

use crate::args::{
    Command, InfoArgs, KeyrateArgs, OutputArgs, OutputFormat, Protocol, QberArgs, SimulateArgs,
    TcArgs,
};
use crate::output::{Cell, Provenance, Report, Table};
use crate::{render, write_output, CliError};

/// Runs `command` and writes its output.
pub fn dispatch(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Info(args) => emit(&info(args)?, &args.output, OutputFormat::Csv),
        Command::Keyrate(args) => {
            let report = keyrate(args)?;
            if let Some(script) = &args.gnuplot {
                let format = args.output.format.unwrap_or(OutputFormat::Csv);
                let data = match (&args.output.out, format) {
                    (Some(out), OutputFormat::Csv) => out,
                    _ => {
                        return Err(CliError::Usage(
                            "--gnuplot needs CSV output written to a file with --out".into(),
                        ))
                    }
                };
                emit(&report, &args.output, OutputFormat::Csv)?;
                write_output(Some(script), gnuplot_script(data, &report).as_bytes())
            } else {
                emit(&report, &args.output, OutputFormat::Csv)
            }
        }
        Command::Tc(args) => emit(&tc(args)?, &args.output, OutputFormat::Csv),
        Command::Qber(args) => emit(&qber(args)?, &args.output, OutputFormat::Csv),
        Command::Simulate(args) => {
            let report = simulate_cmd(args)?;
            emit(&report, &args.output, OutputFormat::Json)
        }
    }
}

fn emit(report: &Report, output: &OutputArgs, default: OutputFormat) -> Result<(), CliError> {
    let bytes = render(report, output.format.unwrap_or(default))?;
    write_output(output.out.as_deref(), &bytes)
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// `info`: information rates and the per-photon-number attack table.
pub fn info(args: &InfoArgs) -> Result<Report, CliError> {
    let m = args.m;
    if args.max_n == 0 {
        return Err(usage("--max-n must be at least 1"));
    }
    let table_data = ClassTable::new(m, args.max_n)?;
    let mut table = Table::new(vec!["n", "p_delta", "holevo_pns", "k_n", "blocking_value"]);
    for class in table_data.classes() {
        let value = class.blocking_value();
        table.push(vec![
            class.n.into(),
            class.p_delta.into(),
            class.holevo_pns.into(),
            class.k_n.into(),
            value.is_finite().then_some(value).into(),
        ]);
    }
    Ok(Report {
        command: "info",
        params: json!({"m": m, "max_n": args.max_n}),
        provenance: Provenance::default(),
        summary: vec![
            ("S_Y", (m as f64).log2().into()),
            ("S_Y_given_X", conditional_entropy_y_given_x(m).into()),
            ("S_XY", mutual_information(m).into()),
        ],
        table,
        details: None,
    })
}

fn check_sweep(args: &KeyrateArgs) -> Result<(), CliError> {
    if args.points == 0 {
        return Err(usage("the transmission grid is empty (--points 0)"));
    }
    let valid_t = |t: f64| t > 0.0 && t <= 1.0;
    if !valid_t(args.t_min) || !valid_t(args.t_max) || args.t_min > args.t_max {
        return Err(usage(format!(
            "the transmission grid needs 0 < --t-min ≤ --t-max ≤ 1, got [{}, {}]",
            args.t_min, args.t_max
        )));
    }
    if args.optimize_mu && !(args.mu_min > 0.0 && args.mu_min < args.mu_max) {
        return Err(usage(format!(
            "the μ search interval needs 0 < --mu-min < --mu-max, got [{}, {}]",
            args.mu_min, args.mu_max
        )));
    }
    Ok(())
}

/// `keyrate`: a fixed-μ or optimized-μ sweep over transmission.
pub fn keyrate(args: &KeyrateArgs) -> Result<Report, CliError> {
    check_sweep(args)?;
    let mu_range = (args.mu_min, args.mu_max);
    let (curve, t_c): (KeyRateCurve, Option<f64>) = match args.protocol {
        Protocol::Siftless => {
            let m = args
                .m
                .ok_or_else(|| usage("--m is required for the siftless protocol"))?;
            if args.optimize_mu {
                let model = KeyRateModel::for_mu_up_to(m, args.mu_max.max(MU_MAX))?;
                let curve = model.sweep_optimized(args.t_min, args.t_max, args.points, mu_range)?;
                (curve, None)
            } else {
                let model = KeyRateModel::for_mu_up_to(m, args.mu)?;
                let t_c = model.critical_transmission(args.mu)?;
                let curve = model.sweep(args.mu, args.t_min, args.t_max, args.points)?;
                (curve, Some(t_c))
            }
        }
        Protocol::Bb84 => {
            let mu = (!args.optimize_mu).then_some(args.mu);
            let curve = bb84_sweep(mu, args.t_min, args.t_max, args.points, mu_range)?;
            let t_c = mu.map(bb84_critical_transmission).transpose()?;
            (curve, t_c)
        }
    };

    let mut columns = vec!["T", "mu", "key_rate", "regime"];
    if args.optimize_mu {
        columns.push("mu_opt");
    }
    let mut table = Table::new(columns);
    for (i, point) in curve.points.iter().enumerate() {
        let mu = point.mu.is_finite().then_some(point.mu);
        let mut row = vec![
            point.transmission.into(),
            mu.into(),
            point.key_rate.into(),
            point.regime.as_str().into(),
        ];
        if let Some(opt) = &curve.mu_opt {
            row.push(opt[i].into());
        }
        table.push(row);
    }

    let mut summary = Vec::new();
    if let Some(t_c) = t_c {
        summary.push(("T_c", Cell::from(t_c)));
    }
    Ok(Report {
        command: "keyrate",
        params: json!({
            "m": args.m,
            "protocol": args.protocol.as_str(),
            "mu": (!args.optimize_mu).then_some(args.mu),
            "optimize_mu": args.optimize_mu,
            "mu_range": args.optimize_mu.then_some([args.mu_min, args.mu_max]),
            "grid": {"t_min": args.t_min, "t_max": args.t_max, "points": args.points, "spacing": "log"},
        }),
        provenance: Provenance::default(),
        summary,
        table,
        details: None,
    })
}

/// Gnuplot script plotting the key-rate column of the CSV at `data`.
pub fn gnuplot_script(data: &Path, report: &Report) -> String {
    let params = &report.params;
    let mut title = params["protocol"]
        .as_str()
        .unwrap_or("siftless")
        .to_string();
    if let Some(m) = params["m"].as_u64() {
        let _ = write!(title, " m={m}");
    }
    match params["mu"].as_f64() {
        Some(mu) => {
            let _ = write!(title, " mu={mu}");
        }
        None => title.push_str(" optimized mu"),
    }
    let path = data.display().to_string().replace('\'', "''");
    format!(
        "set datafile separator ','\n\
         set logscale xy\n\
         set format y '%g'\n\
         set xlabel 'Transmission T'\n\
         set ylabel 'Key rate (bits per pulse)'\n\
         set key top left\n\
         plot '{path}' every ::1 using 1:($3 > 0 ? $3 : 1/0) with lines title '{title}'\n"
    )
}

/// `tc`: exact or asymptotic critical transmission.
pub fn tc(args: &TcArgs) -> Result<Report, CliError> {
    let (value, method) = if args.approx {
        if !(args.mu > 0.0 && args.mu.is_finite()) {
            return Err(usage(format!("--mu must be positive, got {}", args.mu)));
        }
        (
            critical_transmission_asymptotic(args.m, args.mu),
            "asymptotic",
        )
    } else {
        let model = KeyRateModel::for_mu_up_to(args.m, args.mu)?;
        (model.critical_transmission(args.mu)?, "exact")
    };
    let mut table = Table::new(vec!["m", "mu", "T_c", "method"]);
    table.push(vec![
        args.m.into(),
        args.mu.into(),
        value.into(),
        method.into(),
    ]);
    Ok(Report {
        command: "tc",
        params: json!({"m": args.m, "mu": args.mu, "approx": args.approx}),
        provenance: Provenance::default(),
        summary: Vec::new(),
        table,
        details: None,
    })
}

/// `qber`: QBER threshold for `m` states or the continuous limit.
pub fn qber(args: &QberArgs) -> Result<Report, CliError> {
    let (target, label) = match args.target.m {
        Some(m) => (QberTarget::States(m), format!("m={m}")),
        None => (QberTarget::Continuous, "continuous".to_string()),
    };
    let eps = qber_threshold(target)?;
    let mut table = Table::new(vec!["target", "m", "qber", "qber_percent"]);
    table.push(vec![
        Cell::Text(label),
        args.target.m.map_or(Cell::Missing, Cell::from),
        eps.into(),
        (100.0 * eps).into(),
    ]);
    Ok(Report {
        command: "qber",
        params: json!({"m": args.target.m, "continuous": args.target.m.is_none()}),
        provenance: Provenance::default(),
        summary: Vec::new(),
        table,
        details: None,
    })
}

/// `simulate`: Monte Carlo run with an optional per-pulse trace file.
pub fn simulate_cmd(args: &SimulateArgs) -> Result<Report, CliError> {
    if args.pulses == 0 {
        return Err(usage("--pulses must be at least 1"));
    }
    if args.batch_size == 0 {
        return Err(usage("--batch-size must be at least 1"));
    }
    let params = ProtocolParams::new(args.m, args.mu, args.transmission, args.epsilon)?;
    let config =
        SimulationConfig::new(params, args.pulses, args.seed)?.with_batch_size(args.batch_size);
    let summary = match &args.trace {
        Some(path) => {
            let (summary, trace) = simulate_with_trace(&config)?;
            let mut writer = csv::Writer::from_writer(Vec::new());
            writer
                .write_record(["pulse_id", "x", "n_sent", "n_arrived", "y"])
                .map_err(|e| CliError::Runtime(e.into()))?;
            for p in &trace {
                writer
                    .write_record([
                        p.pulse_id.to_string(),
                        p.x.to_string(),
                        p.n_sent.to_string(),
                        p.n_arrived.to_string(),
                        p.y.map_or_else(String::new, |y| y.to_string()),
                    ])
                    .map_err(|e| CliError::Runtime(e.into()))?;
            }
            let bytes = writer
                .into_inner()
                .map_err(|e| CliError::Runtime(anyhow::anyhow!("{e}")))?;
            write_output(Some(path), &bytes)?;
            summary
        }
        None => simulate(&config)?,
    };
    let reconciliation = reconciliation_accounting(&summary, args.m)?;

    let mut table = Table::new(vec![
        "pulses",
        "detected",
        "click_fraction",
        "expected_click_fraction",
        "empirical_mutual_information",
        "mutual_information_std_error",
        "mutual_information_bias",
        "reconciliation_bits_per_pulse",
        "key_bits",
        "alice_known_fraction",
    ]);
    table.push(vec![
        summary.pulses.into(),
        summary.detected.into(),
        summary.click_fraction.into(),
        summary.expected_click_fraction.into(),
        summary.empirical_mutual_information.into(),
        summary.mutual_information_std_error.into(),
        summary.mutual_information_bias.into(),
        summary.reconciliation_bits_per_pulse.into(),
        reconciliation.key_bits.into(),
        reconciliation.alice_known_fraction.into(),
    ]);
    Ok(Report {
        command: "simulate",
        params: json!({
            "m": args.m,
            "mu": args.mu,
            "T": args.transmission,
            "epsilon": args.epsilon,
            "pulses": args.pulses,
            "batch_size": args.batch_size,
        }),
        provenance: Provenance {
            seed: Some(args.seed),
            ..Provenance::default()
        },
        summary: Vec::new(),
        table,
        details: Some(json!({
            "empirical_joint": summary.empirical_joint,
            "erased_for_alice": summary.erased_for_alice,
            "reconciliation": reconciliation,
        })),
    })
}
