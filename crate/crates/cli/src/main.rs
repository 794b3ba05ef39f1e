use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use photon_sim_core::closed_form::{
    dark_click_prob_cf, dark_purity_cf, perturbed_amplitudes, perturbed_herald_prob, perturbed_prob_n,
    perturbed_purity, three_copy_herald_prob, three_copy_quoted_max,
};
use photon_sim_core::reproduce::run_all;
use photon_sim_core::schemes::{
    linspace, max_three_copy_herald, optimize_herald, run_dsv_source, run_perturbed_bs, run_three_copy,
    squeezed_coherent_study, sweep, SweepKind, SweepParams, ThreeCopyConfig, DEFAULT_SWEEP_POINTS, R_MAX,
    THREE_COPY_ASSIGNMENT,
};
use photon_sim_core::{DetectorModel, QubitAmplitudes, SimError};

/// Default directory for output files when `--out` is not given.
const OUT_DIR_ENV: &str = "PHOTON_SIM_OUT_DIR";

#[derive(Parser)]
#[command(name = "photon-sim", version, about = "Heralded single-photon source simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its metrics table.
    Run {
        #[arg(value_enum)]
        experiment: Experiment,
        #[command(flatten)]
        params: Params,
        #[command(flatten)]
        output: Output,
    },
    /// Tabulate a figure sweep against its closed form.
    Sweep {
        #[arg(value_parser = parse_kind)]
        kind: SweepKind,
        #[command(flatten)]
        params: Params,
        #[command(flatten)]
        output: Output,
    },
    /// Run every acceptance check and print a pass/fail table.
    ReproduceAll {
        /// Also write the reports as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Experiment {
    /// Two squeezed vacua on a 50:50 splitter, one output detected.
    Dsv,
    /// Three qubit copies through the "2","0" herald circuit.
    ThreeCopy,
    /// The squeezed-vacuum source with a detuned splitter.
    PerturbedBs,
    /// Squeezed-coherent emission, single-mode and three-copy.
    SqueezedCoherent,
    /// Squeezing that maximizes the herald probability.
    Optimize,
    /// Brute-force maximum of the three-copy herald probability.
    ThreeCopyMax,
}

impl Experiment {
    fn name(self) -> &'static str {
        match self {
            Experiment::Dsv => "dsv",
            Experiment::ThreeCopy => "three-copy",
            Experiment::PerturbedBs => "perturbed-bs",
            Experiment::SqueezedCoherent => "squeezed-coherent",
            Experiment::Optimize => "optimize",
            Experiment::ThreeCopyMax => "three-copy-max",
        }
    }

    fn accepts(self) -> &'static [&'static str] {
        match self {
            Experiment::Dsv => &["r", "varphi", "eta", "p_dark", "cutoff"],
            Experiment::ThreeCopy => &["phi", "nu", "beta", "cutoff"],
            Experiment::PerturbedBs => &["r", "varphi", "delta1", "delta2", "cutoff"],
            Experiment::SqueezedCoherent => &["r"],
            Experiment::Optimize => &["r_min", "r_max", "tol"],
            Experiment::ThreeCopyMax => &["beta", "points"],
        }
    }
}

fn parse_kind(s: &str) -> Result<SweepKind, SimError> {
    s.parse()
}

/// Parameter overrides. Each experiment or sweep accepts a subset.
#[derive(Args, Clone, Debug, Default, Serialize)]
struct Params {
    /// Squeezing magnitude.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    r: Option<f64>,
    /// Squeezing phase.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    varphi: Option<f64>,
    /// Detector efficiency.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    eta: Option<f64>,
    /// Dark-count probability per detection window.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    p_dark: Option<f64>,
    /// Splitter angle error.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    delta1: Option<f64>,
    /// Splitter phase error.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    delta2: Option<f64>,
    /// Phase of the first three-copy splitter.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    phi: Option<f64>,
    /// Phase of the second three-copy splitter.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    nu: Option<f64>,
    /// One-photon amplitude of the qubit inputs.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    /// Per-mode photon-number cutoff; chosen from a 1e-12 tail if omitted.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    cutoff: Option<usize>,
    /// Grid points per axis.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    points: Option<usize>,
    /// Lower end of the squeezing search bracket.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    r_min: Option<f64>,
    /// Upper end of the squeezing search bracket.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    r_max: Option<f64>,
    /// Search tolerance.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    tol: Option<f64>,
    /// First sweep axis as LO:HI.
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    axis1: Option<(f64, f64)>,
    /// Second sweep axis as LO:HI.
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    axis2: Option<(f64, f64)>,
}

impl Params {
    fn given(&self) -> Vec<String> {
        match serde_json::to_value(self) {
            Ok(Value::Object(map)) => map.keys().cloned().collect(),
            _ => Vec::new(),
        }
    }

    fn check_allowed(&self, what: &str, allowed: &[&str]) -> Result<(), SimError> {
        let extra: Vec<String> = self.given().into_iter().filter(|k| !allowed.contains(&k.as_str())).collect();
        if extra.is_empty() {
            return Ok(());
        }
        let flags: Vec<String> = extra.iter().map(|k| format!("--{}", k.replace('_', "-"))).collect();
        Err(SimError::invalid(format!("{what} does not take {}", flags.join(", "))))
    }
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected LO:HI, got '{s}'"))?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("bad lower bound '{lo}': {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("bad upper bound '{hi}': {e}"))?;
    if !(lo <= hi) {
        return Err(format!("range {lo}:{hi} is empty"));
    }
    Ok((lo, hi))
}

#[derive(Args, Clone, Debug)]
struct Output {
    /// Output file. Defaults to `$PHOTON_SIM_OUT_DIR/<name>.<format>`, or
    /// stdout when the variable is unset.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Serialize)]
struct RunConfig<'a> {
    command: &'static str,
    target: &'a str,
    params: &'a Params,
    out: Option<String>,
    format: Format,
}

/// Metrics of a single experiment, in the same column/row layout as a sweep.
#[derive(Serialize)]
struct RunTable {
    experiment: &'static str,
    columns: Vec<String>,
    rows: Vec<Vec<Option<f64>>>,
    metadata: BTreeMap<String, Value>,
}

impl RunTable {
    fn new(experiment: Experiment, columns: &[&str], rows: Vec<Vec<Option<f64>>>) -> Self {
        Self {
            experiment: experiment.name(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows,
            metadata: BTreeMap::new(),
        }
    }

    fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }
}

#[derive(Debug)]
enum CliError {
    Sim(SimError),
    Io(std::io::Error),
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Sim(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Sim(e) => e.kind(),
            CliError::Io(_) => "io",
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Sim(SimError::InvalidArgument(_)) => 2,
            CliError::Sim(SimError::LeakageExceeded { .. }) => 3,
            _ => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Sim(e) => e.to_string(),
            CliError::Io(e) => e.to_string(),
        }
    }
}

fn error_record(kind: &str, message: &str) {
    let record = serde_json::json!({ "error": kind, "message": message });
    eprintln!("{record}");
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid command line");
            error_record("usage", first.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Run { experiment, params, output } => cmd_run(experiment, &params, &output),
        Command::Sweep { kind, params, output } => cmd_sweep(kind, &params, &output),
        Command::ReproduceAll { out } => cmd_reproduce_all(out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            error_record(e.kind(), &e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn r_or_default(params: &Params) -> f64 {
    params.r.unwrap_or(R_MAX)
}

fn cmd_run(experiment: Experiment, params: &Params, output: &Output) -> Result<ExitCode, CliError> {
    params.check_allowed(experiment.name(), experiment.accepts())?;
    let table = match experiment {
        Experiment::Dsv => run_dsv(params)?,
        Experiment::ThreeCopy => run_three(params)?,
        Experiment::PerturbedBs => run_perturbed(params)?,
        Experiment::SqueezedCoherent => {
            let r = params.r.unwrap_or(0.36);
            let study = squeezed_coherent_study(&[r])?;
            let cols: Vec<&str> = study.columns.iter().map(String::as_str).collect();
            RunTable::new(experiment, &cols, study.rows).with("content_definition", "P(1) / sum_{n>=1} P(n)")
        }
        Experiment::Optimize => {
            let (lo, hi) = (params.r_min.unwrap_or(0.1), params.r_max.unwrap_or(2.0));
            let (r_star, p_star) = optimize_herald(lo, hi, params.tol.unwrap_or(1e-9))?;
            let exact = 1f64.asinh();
            RunTable::new(
                experiment,
                &["r_star", "herald_prob", "closed_form_r_star", "abs_diff"],
                vec![vec![Some(r_star), Some(p_star), Some(exact), Some((r_star - exact).abs())]],
            )
        }
        Experiment::ThreeCopyMax => {
            let beta = params.beta.unwrap_or(1.0);
            let best = max_three_copy_herald(QubitAmplitudes::from_beta(beta)?, params.points.unwrap_or(201))?;
            RunTable::new(
                experiment,
                &["beta", "phi", "nu", "theta", "mu", "herald_prob", "quoted_formula", "sixth_power_formula"],
                vec![vec![
                    Some(beta),
                    Some(best.phi),
                    Some(best.nu),
                    Some(best.theta),
                    Some(best.mu),
                    Some(best.herald_prob),
                    Some(three_copy_quoted_max(beta)),
                    Some(16.0 * beta.powi(6) / 81.0),
                ]],
            )
            .with("assignment", THREE_COPY_ASSIGNMENT)
            .with("grid_points", best.grid_points)
        }
    };
    let config = RunConfig {
        command: "run",
        target: experiment.name(),
        params,
        out: output.out.as_ref().map(|p| p.display().to_string()),
        format: output.format,
    };
    let body = match output.format {
        Format::Csv => to_csv(&table.columns, &table.rows),
        Format::Json => to_json(&config, &table),
    };
    write_output(experiment.name(), output, &body)?;
    Ok(ExitCode::SUCCESS)
}

fn run_dsv(params: &Params) -> Result<RunTable, CliError> {
    let (r, varphi) = (r_or_default(params), params.varphi.unwrap_or(0.0));
    let (eta, pd) = (params.eta.unwrap_or(1.0), params.p_dark.unwrap_or(0.0));
    let run = run_dsv_source(r, varphi, params.cutoff, &DetectorModel::new(eta, pd)?)?;
    let cf_p = dark_click_prob_cf(r, eta, pd);
    let cf_purity = dark_purity_cf(r, eta, pd);
    let mut d = (run.click_prob - cf_p).abs();
    if let Some(p) = run.purity.filter(|_| cf_purity.is_finite()) {
        d = d.max((p - cf_purity.abs()).abs());
    }
    Ok(RunTable::new(
        Experiment::Dsv,
        &[
            "r",
            "varphi",
            "eta",
            "p_dark",
            "cutoff",
            "herald_prob",
            "purity",
            "closed_form_herald_prob",
            "closed_form_purity_verbatim",
            "abs_diff",
            "leakage",
        ],
        vec![vec![
            Some(r),
            Some(varphi),
            Some(eta),
            Some(pd),
            Some(run.cutoff as f64),
            Some(run.click_prob),
            run.purity,
            Some(cf_p),
            cf_purity.is_finite().then_some(cf_purity),
            Some(d),
            Some(run.leakage),
        ]],
    )
    .with("output_distribution", serde_json::to_value(&run.output_distribution).unwrap_or(Value::Null))
    .with("note", "closed_form_purity_verbatim is the printed expression; it is compared in magnitude"))
}

fn run_three(params: &Params) -> Result<RunTable, CliError> {
    let (phi, nu) = (params.phi.unwrap_or(std::f64::consts::FRAC_PI_2), params.nu.unwrap_or(std::f64::consts::FRAC_PI_4));
    let beta = params.beta.unwrap_or(0.8);
    let q = QubitAmplitudes::from_beta(beta)?;
    let cfg = ThreeCopyConfig::new(q, phi, nu)?;
    let out = run_three_copy(&cfg, params.cutoff.unwrap_or(3))?;
    let dist = out.output_distribution(0);
    let at = |n: usize| dist.as_ref().map(|d| d.get(n).copied().unwrap_or(0.0));
    let cf = three_copy_herald_prob(&q, cfg.theta, cfg.phi, cfg.mu, cfg.nu);
    Ok(RunTable::new(
        Experiment::ThreeCopy,
        &["phi", "nu", "beta", "theta", "mu", "herald_prob", "purity", "vacuum_prob", "closed_form_herald_prob", "abs_diff"],
        vec![vec![
            Some(phi),
            Some(nu),
            Some(beta),
            Some(cfg.theta),
            Some(cfg.mu),
            Some(out.probability),
            at(1),
            at(0),
            Some(cf),
            Some((out.probability - cf).abs()),
        ]],
    )
    .with("assignment", THREE_COPY_ASSIGNMENT))
}

fn run_perturbed(params: &Params) -> Result<RunTable, CliError> {
    let (r, varphi) = (r_or_default(params), params.varphi.unwrap_or(0.0));
    let (d1, d2) = (params.delta1.unwrap_or(0.0), params.delta2.unwrap_or(0.0));
    let run = run_perturbed_bs(r, varphi, d1, d2, params.cutoff)?;
    let amps = perturbed_amplitudes(r, varphi, d1, d2);
    let cf_herald = perturbed_herald_prob(&amps)?;
    let cf_purity = perturbed_purity(&amps)?;
    let joint = |n: usize| run.joint_odd.get(n).copied().unwrap_or(0.0);
    let (cf1, cf3) = (perturbed_prob_n(&amps, 0), perturbed_prob_n(&amps, 1));
    let purity = run.purity();
    let d = [
        (run.click_prob() - cf_herald).abs(),
        purity.map_or(0.0, |p| (p - cf_purity).abs()),
        (joint(0) - cf1).abs(),
        (joint(1) - cf3).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    Ok(RunTable::new(
        Experiment::PerturbedBs,
        &[
            "r",
            "varphi",
            "delta1",
            "delta2",
            "cutoff",
            "herald_prob",
            "purity",
            "p1_joint",
            "p3_joint",
            "closed_form_herald_prob",
            "closed_form_purity",
            "closed_form_p1_joint",
            "closed_form_p3_joint",
            "abs_diff",
            "leakage",
        ],
        vec![vec![
            Some(r),
            Some(varphi),
            Some(d1),
            Some(d2),
            Some(run.cutoff as f64),
            Some(run.click_prob()),
            purity,
            Some(joint(0)),
            Some(joint(1)),
            Some(cf_herald),
            Some(cf_purity),
            Some(cf1),
            Some(cf3),
            Some(d),
            Some(run.leakage),
        ]],
    ))
}

fn cmd_sweep(kind: SweepKind, params: &Params, output: &Output) -> Result<ExitCode, CliError> {
    let allowed: &[&str] = match kind {
        SweepKind::Eta => &["r", "varphi", "cutoff", "points", "axis1"],
        SweepKind::Dark | SweepKind::Perturbed => &["r", "varphi", "cutoff", "points", "axis1", "axis2"],
        SweepKind::SqueezedCoherent => &["points", "axis1"],
    };
    params.check_allowed(&format!("sweep {kind}"), allowed)?;
    let points = params.points.unwrap_or(DEFAULT_SWEEP_POINTS);
    if points == 0 {
        return Err(SimError::invalid("--points must be positive").into());
    }
    let mut sp = SweepParams::defaults(kind, points);
    if let Some(r) = params.r {
        sp.r = r;
    }
    if let Some(v) = params.varphi {
        sp.varphi = v;
    }
    sp.cutoff = params.cutoff;
    if let Some((lo, hi)) = params.axis1 {
        sp.first = linspace(lo, hi, points);
    }
    if let Some((lo, hi)) = params.axis2 {
        sp.second = linspace(lo, hi, points);
    }
    let result = sweep(kind, &sp)?;
    let config = RunConfig {
        command: "sweep",
        target: kind.name(),
        params,
        out: output.out.as_ref().map(|p| p.display().to_string()),
        format: output.format,
    };
    let body = match output.format {
        Format::Csv => to_csv(&result.columns, &result.rows),
        Format::Json => to_json(&config, &result),
    };
    write_output(&format!("sweep-{}", kind.name()), output, &body)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_reproduce_all(out: Option<PathBuf>) -> Result<ExitCode, CliError> {
    let start = std::time::Instant::now();
    let reports = run_all();
    let mut stdout = std::io::stdout().lock();
    for report in &reports {
        write!(stdout, "{report}")?;
    }
    let failed: Vec<String> = reports.iter().filter(|r| !r.passed).map(|r| r.id.to_string()).collect();
    writeln!(
        stdout,
        "{} of {} criteria passed in {:.1} s{}",
        reports.len() - failed.len(),
        reports.len(),
        start.elapsed().as_secs_f64(),
        if failed.is_empty() { String::new() } else { format!("; failed: {}", failed.join(", ")) }
    )?;
    if let Some(path) = out {
        let text = serde_json::to_string_pretty(&reports).expect("reports serialize");
        std::fs::write(path, text + "\n")?;
    }
    Ok(if failed.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn fmt_cell(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x:.11e}"),
        _ => String::new(),
    }
}

fn to_csv(columns: &[String], rows: &[Vec<Option<f64>>]) -> String {
    let mut s = columns.join(",");
    s.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&c| fmt_cell(c)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

fn to_json(config: &RunConfig<'_>, result: &impl Serialize) -> String {
    let doc = serde_json::json!({ "config": config, "result": result });
    serde_json::to_string_pretty(&doc).expect("output serializes") + "\n"
}

fn write_output(name: &str, output: &Output, body: &str) -> Result<(), CliError> {
    let path = match (&output.out, std::env::var_os(OUT_DIR_ENV)) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(dir)) => {
            let dir = PathBuf::from(dir);
            std::fs::create_dir_all(&dir)?;
            Some(dir.join(format!("{name}.{}", output.format.extension())))
        }
        (None, None) => None,
    };
    match path {
        Some(p) => {
            std::fs::write(&p, body)?;
            log::info!("wrote {}", p.display());
        }
        None => std::io::stdout().lock().write_all(body.as_bytes())?,
    }
    Ok(())
}
