//! Command-line front end: flags and config files, dispatch to the
//! verifiers, and report emission.
//!
//! Verification suites print one JSON document `{"envelope", "report"}`;
//! `classify` prints JSON lines. The envelope carries the timestamp, so
//! everything outside it is byte-identical across runs with equal flags.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{IsTerminal, Write};
use std::path::PathBuf;
use std::time::SystemTime;

use clap::{Args, ColorChoice, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::combinatorics::{
    case_analysis, check_signature_identity, enumerate_configs, jang_lemma_checks, phi_values, BoltBounds,
    EnumerationBounds, Topology,
};
use crate::concomitants::{petrov_survey, PetrovReport};
use crate::flux::{charge_agrees, charges, global_balance, BalanceLedger};
use crate::identities::{asymptotic_decay_suite, core_suite, find, markdown_table, registry, run_suite, SuiteOptions};
use crate::metrics::{parse_key_values, validate, MetricModel, METRIC_NAMES};
use crate::tolerances::{ABS_FLOOR, DEFAULT_ORDER, REL_TOL};
use crate::{Error, Result, Side};

/// Metrics used when `--metric` is omitted.
pub const CURVED_METRICS: [&str; 4] = ["schwarzschild", "kerr", "taub-nut", "taub-bolt"];

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "instanton",
    version,
    about = "Numerical and exact checks for circle-symmetric ALF gravitational instantons",
    after_help = "Exit status: 0 all checks pass, 1 a check failed (report still written), 2 usage or configuration error.\n\
                  NO_COLOR disables colored status output."
)]
pub struct Cli {
    /// File of `key=value` lines supplying flags; command-line flags win.
    /// A `command` key selects the subcommand when none is given.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Markdown,
}

#[derive(Debug, Clone, Args)]
pub struct MetricArgs {
    /// Catalogue metric (flat, schwarzschild, kerr, taub-nut, taub-bolt);
    /// every curved metric when omitted.
    #[arg(long)]
    pub metric: Option<String>,
    /// Mass parameter (schwarzschild, kerr) [default: 1]
    #[arg(long)]
    pub m: Option<f64>,
    /// Rotation parameter (kerr) [default: 0.3]
    #[arg(long)]
    pub a: Option<f64>,
    /// NUT parameter (taub-nut, taub-bolt) [default: 1]
    #[arg(long)]
    pub n: Option<f64>,
    /// Circle length (flat) [default: 2π]
    #[arg(long)]
    pub length: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SamplingArgs {
    /// Seed of the sample-point generator.
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Number of sample points.
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    /// Jet order (at least 4 for identities with second derivatives).
    #[arg(long, default_value_t = DEFAULT_ORDER)]
    pub order: usize,
    /// Smallest λ at a sample point.
    #[arg(long, default_value_t = 0.05)]
    pub lambda_min: f64,
    /// Relative residual below which an equality passes.
    #[arg(long, default_value_t = REL_TOL)]
    pub rel_tol: f64,
    /// Absolute residual below which any check passes.
    #[arg(long, default_value_t = ABS_FLOOR)]
    pub abs_floor: f64,
    /// Constant added to the twist potential.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub twist_offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// Every registered identity.
    All,
    /// The identities of the main suite.
    Core,
    /// The quotient-geometry correspondence checks.
    Correspondence,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Catalogue metrics with parameters, fixed points and declared types.
    ListMetrics,
    /// Replays the tensor and divergence identities at seeded points.
    VerifyIdentities {
        #[command(flatten)]
        metric: MetricArgs,
        #[command(flatten)]
        sampling: SamplingArgs,
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        /// Restrict to these identity ids (repeatable).
        #[arg(long = "identity", value_name = "ID")]
        identities: Vec<String>,
    },
    /// Petrov type of each side from Mars–Simon and Weyl eigenvalue tests.
    Petrov {
        #[command(flatten)]
        metric: MetricArgs,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Number of sample points (at least 20).
        #[arg(long, default_value_t = 24)]
        points: usize,
    },
    /// Fixed-point charges and boundary terms, extrapolated in the level.
    Charges {
        #[command(flatten)]
        metric: MetricArgs,
    },
    /// Boundary balance of the integrated divergence identity.
    Balance {
        #[command(flatten)]
        metric: MetricArgs,
        /// Side (+ or -); both when omitted.
        #[arg(long, allow_hyphen_values = true)]
        sign: Option<String>,
    },
    /// Enumerates fixed-point data satisfying the signature formula and
    /// the weight lemmas; one JSON line per configuration.
    Classify {
        /// Euler characteristic.
        #[arg(long, allow_negative_numbers = true)]
        chi: i64,
        /// Signature.
        #[arg(long, allow_negative_numbers = true)]
        sign: i64,
        /// Euler number of the boundary circle bundle.
        #[arg(long, allow_negative_numbers = true, default_value_t = 0)]
        e: i64,
        /// Largest weight.
        #[arg(long)]
        max_weight: u32,
        /// Largest number of nuts.
        #[arg(long, default_value_t = 6)]
        max_nuts: usize,
        /// Also enumerate bolts (χ[B] ∈ {2, 0, −2}).
        #[arg(long)]
        bolts: bool,
        /// Largest number of bolts when --bolts is set.
        #[arg(long, default_value_t = 2)]
        max_bolts: usize,
        /// Largest |B·B| when --bolts is set.
        #[arg(long, default_value_t = 8)]
        max_self_intersection: i64,
    },
    /// Replays the equality cases for one topology and reports
    /// configurations with Φ > 0 on a constrained side.
    CaseAnalysis {
        /// kerr, taubbolt or chenteo.
        #[arg(long)]
        topology: String,
        #[arg(long, default_value_t = 12)]
        max_weight: u32,
        #[arg(long, default_value_t = 6)]
        max_nuts: usize,
        /// Leave out bolts.
        #[arg(long)]
        no_bolts: bool,
        /// Include every admissible configuration in the report.
        #[arg(long)]
        entries: bool,
    },
    /// Fitted decay exponents at infinity and the Ernst coefficient check.
    Decay {
        #[command(flatten)]
        metric: MetricArgs,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::ListMetrics => "list-metrics",
            Command::VerifyIdentities { .. } => "verify-identities",
            Command::Petrov { .. } => "petrov",
            Command::Charges { .. } => "charges",
            Command::Balance { .. } => "balance",
            Command::Classify { .. } => "classify",
            Command::CaseAnalysis { .. } => "case-analysis",
            Command::Decay { .. } => "decay",
        }
    }
}

const SUBCOMMANDS: [&str; 8] =
    ["list-metrics", "verify-identities", "petrov", "charges", "balance", "classify", "case-analysis", "decay"];

/// A rendered report and whether every check in it passed.
#[derive(Debug, Clone)]
pub struct Emitted {
    pub body: String,
    pub pass: bool,
}

fn has_flag(argv: &[String], flag: &str) -> bool {
    argv.iter().any(|a| a == flag || a.starts_with(&format!("{flag}=")))
}

fn config_path(argv: &[String]) -> Option<String> {
    let pos = argv.iter().position(|a| a == "--config" || a.starts_with("--config="))?;
    match argv[pos].split_once('=') {
        Some((_, v)) => Some(v.to_string()),
        None => argv.get(pos + 1).cloned(),
    }
}

/// Folds the `--config` file into `argv`. Keys become `--key value` flags
/// unless already given; `true`/`false` toggle switches.
pub fn merge_config(argv: Vec<String>) -> Result<Vec<String>> {
    let Some(path) = config_path(&argv) else { return Ok(argv) };
    let text = std::fs::read_to_string(&path).map_err(|e| Error::Config(format!("cannot read config {path}: {e}")))?;
    let mut out = argv;
    for (key, value) in parse_key_values(&text)? {
        if key == "config" {
            return Err(Error::Config("config files cannot include other config files".into()));
        }
        if key == "command" {
            if !out.iter().skip(1).any(|a| SUBCOMMANDS.contains(&a.as_str())) {
                out.insert(1.min(out.len()), value);
            }
            continue;
        }
        let flag = format!("--{key}");
        if has_flag(&out, &flag) {
            continue;
        }
        match value.as_str() {
            "true" => out.push(flag),
            "false" => {}
            _ => {
                out.push(flag);
                out.push(value);
            }
        }
    }
    Ok(out)
}

fn no_color() -> bool {
    std::env::var_os("NO_COLOR").is_some_and(|v| !v.is_empty())
}

/// Parses `argv` (program name first) after merging any config file.
pub fn parse(argv: Vec<String>) -> std::result::Result<Cli, clap::Error> {
    let mut cmd = Cli::command();
    if no_color() {
        cmd = cmd.color(ColorChoice::Never);
    }
    let argv = match merge_config(argv) {
        Ok(a) => a,
        Err(e) => return Err(cmd.error(clap::error::ErrorKind::InvalidValue, e.to_string())),
    };
    let matches = cmd.try_get_matches_from(argv)?;
    Cli::from_arg_matches(&matches)
}

fn envelope(command: &str) -> Value {
    json!({
        "tool": "instanton",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "generated_at": humantime::format_rfc3339_seconds(SystemTime::now()).to_string(),
    })
}

fn document<T: Serialize>(command: &str, report: &T) -> Result<String> {
    let doc = json!({ "envelope": envelope(command), "report": report });
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

/// Machine-readable kind of an error.
pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Jet(_) => "jet",
        Error::DegenerateMetric { .. } => "degenerate-metric",
        Error::FixedPoint { .. } => "fixed-point",
        Error::NormalizationViolation { .. } => "normalization-violation",
        Error::Sampling(_) => "sampling",
        Error::Catalogue { .. } => "catalogue-gate",
        Error::Calibration(_) => "calibration",
        Error::Extraction { .. } => "extraction",
        Error::Classification(_) => "classification",
        Error::Meshing(_) => "meshing",
        Error::Config(_) => "config",
        Error::UnknownMetric(_) => "unknown-metric",
        Error::SearchSpace { .. } => "search-space",
        Error::ContractViolation(_) => "contract-violation",
        Error::AtPoint { source, .. } => error_kind(source),
        Error::Io(_) => "io",
        Error::Json(_) => "json",
    }
}

/// Exit status for an error: usage and configuration problems give 2,
/// everything else is a verification failure.
pub fn error_exit(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::UnknownMetric(_) | Error::SearchSpace { .. } | Error::Io(_) => EXIT_USAGE,
        Error::AtPoint { source, .. } => error_exit(source),
        _ => EXIT_FAIL,
    }
}

fn error_report(command: &str, e: &Error) -> String {
    let doc = json!({
        "envelope": envelope(command),
        "error": { "kind": error_kind(e), "message": e.to_string() },
        "pass": false,
    });
    serde_json::to_string_pretty(&doc).unwrap_or_default() + "\n"
}

fn models(args: &MetricArgs) -> Result<Vec<MetricModel>> {
    let mut params = BTreeMap::new();
    for (k, v) in [("m", args.m), ("a", args.a), ("n", args.n), ("length", args.length)] {
        if let Some(v) = v {
            params.insert(k.to_string(), v);
        }
    }
    match &args.metric {
        Some(name) => Ok(vec![MetricModel::from_name(name, &params)?]),
        None if !params.is_empty() => Err(Error::Config("parameter overrides need --metric".into())),
        None => CURVED_METRICS.iter().map(|n| MetricModel::from_name(n, &params)).collect(),
    }
}

#[derive(Serialize)]
struct MetricListing {
    name: String,
    kind: crate::metrics::MetricKind,
    parameters: BTreeMap<String, f64>,
    orientation: f64,
    metadata: crate::metrics::Metadata,
}

fn list_metrics(format: Format) -> Result<Emitted> {
    let rows: Vec<MetricListing> = METRIC_NAMES
        .iter()
        .map(|n| {
            let m = MetricModel::from_name(n, &BTreeMap::new())?;
            Ok(MetricListing {
                name: m.name,
                kind: m.kind,
                parameters: m.parameters,
                orientation: m.orientation,
                metadata: m.metadata,
            })
        })
        .collect::<Result<_>>()?;
    let body = match format {
        Format::Json => document("list-metrics", &json!({ "metrics": rows }))?,
        Format::Markdown => {
            let mut s = String::from("| metric | parameters | fixed points | Petrov (+, −) |\n|---|---|---|---|\n");
            for r in &rows {
                let params: Vec<String> = r.parameters.iter().map(|(k, v)| format!("{k}={v}")).collect();
                let fps: Vec<&str> = r.metadata.fixed_points.iter().map(|f| f.label()).collect();
                let _ = writeln!(
                    s,
                    "| {} | {} | {} | {:?}, {:?} |",
                    r.name,
                    params.join(", "),
                    if fps.is_empty() { "none".to_string() } else { fps.join(", ") },
                    r.metadata.petrov[0],
                    r.metadata.petrov[1]
                );
            }
            s
        }
    };
    Ok(Emitted { body, pass: true })
}

fn verify_identities(
    metric: &MetricArgs,
    sampling: &SamplingArgs,
    suite: Suite,
    ids: &[String],
    format: Format,
) -> Result<Emitted> {
    let mut specs = match suite {
        Suite::All => registry(),
        Suite::Core => core_suite(),
        Suite::Correspondence => registry().into_iter().filter(|s| s.id.starts_with("C.")).collect(),
    };
    if !ids.is_empty() {
        for id in ids {
            if find(id).is_none() {
                return Err(Error::Config(format!("unknown identity {id:?}")));
            }
        }
        specs.retain(|s| ids.contains(&s.id));
    }
    let opts = SuiteOptions {
        n_points: sampling.points,
        seed: sampling.seed,
        order: sampling.order,
        lambda_min: sampling.lambda_min,
        twist_offset: sampling.twist_offset,
        rel_tol: sampling.rel_tol,
        abs_floor: sampling.abs_floor,
    };
    let mut per_metric = Vec::new();
    let mut all = Vec::new();
    for model in models(metric)? {
        let gate = validate(&model, 24, sampling.seed)?;
        let reports = run_suite(&model, &specs, opts)?;
        let pass = reports.iter().all(|r| r.pass);
        all.extend(reports.iter().cloned());
        per_metric.push(json!({ "metric": model.name, "parameters": model.parameters, "gate": gate, "reports": reports, "pass": pass }));
    }
    let pass = all.iter().all(|r| r.pass);
    let body = match format {
        Format::Json => document(
            "verify-identities",
            &json!({
                "seed": sampling.seed,
                "n_points": sampling.points,
                "order": sampling.order,
                "tolerance": sampling.rel_tol,
                "floor": sampling.abs_floor,
                "metrics": per_metric,
                "pass": pass,
            }),
        )?,
        Format::Markdown => {
            let failed = all.iter().filter(|r| !r.pass).count();
            format!("{}\n{} of {} checks pass\n", markdown_table(&all), all.len() - failed, all.len())
        }
    };
    Ok(Emitted { body, pass })
}

#[derive(Serialize)]
struct PetrovEntry {
    metric: String,
    parameters: BTreeMap<String, f64>,
    declared: [crate::metrics::PetrovType; 2],
    sides: [PetrovReport; 2],
    pass: bool,
}

fn petrov(metric: &MetricArgs, seed: u64, points: usize, format: Format) -> Result<Emitted> {
    if points < 20 {
        return Err(Error::Config(format!("petrov needs --points ≥ 20, got {points}")));
    }
    let mut rows = Vec::new();
    for model in models(metric)? {
        let sides = petrov_survey(&model, points, seed)?;
        let declared = model.metadata.petrov;
        let pass = Side::BOTH.iter().all(|s| sides[s.index()].verdict.matches(declared[s.index()]));
        rows.push(PetrovEntry { metric: model.name, parameters: model.parameters, declared, sides, pass });
    }
    let pass = rows.iter().all(|r| r.pass);
    let body = match format {
        Format::Json => document("petrov", &json!({ "seed": seed, "points": points, "metrics": rows, "pass": pass }))?,
        Format::Markdown => {
            let mut s = String::from(
                "| metric | side | verdict | declared | max ‖S‖/‖W‖ | s² spread | degeneracy |\n|---|---|---|---|---|---|---|\n",
            );
            for r in &rows {
                for side in Side::BOTH {
                    let p = &r.sides[side.index()];
                    let _ = writeln!(
                        s,
                        "| {} | {} | {:?} | {:?} | {:.2e} | {:.2e} | {:.2e} |",
                        r.metric,
                        side.symbol(),
                        p.verdict,
                        r.declared[side.index()],
                        p.max_s_over_w,
                        p.s2_spread,
                        p.max_degeneracy
                    );
                }
            }
            s
        }
    };
    Ok(Emitted { body, pass })
}

fn charges_cmd(metric: &MetricArgs, format: Format) -> Result<Emitted> {
    let mut rows = Vec::new();
    let mut table = String::from("| metric | fixed point | closed form | estimate | error | pass |\n|---|---|---|---|---|---|\n");
    let mut pass = true;
    for model in models(metric)? {
        let fluxes = charges(&model)?;
        let mut entries = Vec::new();
        for f in fluxes {
            let ok = charge_agrees(f.charge.estimate, f.targets.charge);
            pass &= ok;
            let _ = writeln!(
                table,
                "| {} | {} | {:.10} | {:.10} | {:.1e} | {} |",
                model.name,
                f.label,
                f.targets.charge,
                f.charge.estimate,
                f.charge.error,
                if ok { "yes" } else { "NO" }
            );
            entries.push(json!({ "flux": f, "pass": ok }));
        }
        rows.push(json!({ "metric": model.name, "parameters": model.parameters, "fixed_points": entries }));
    }
    let body = match format {
        Format::Json => document("charges", &json!({ "metrics": rows, "pass": pass }))?,
        Format::Markdown => table,
    };
    Ok(Emitted { body, pass })
}

fn balance(metric: &MetricArgs, sign: Option<&str>, format: Format) -> Result<Emitted> {
    let sides: Vec<Side> = match sign {
        Some(s) => vec![s.parse()?],
        None => Side::BOTH.to_vec(),
    };
    let mut ledgers: Vec<BalanceLedger> = Vec::new();
    for model in models(metric)? {
        for &side in &sides {
            ledgers.push(global_balance(&model, side)?);
        }
    }
    let pass = ledgers.iter().all(|l| l.pass != Some(false));
    let body = match format {
        Format::Json => document("balance", &json!({ "ledgers": ledgers, "pass": pass }))?,
        Format::Markdown => {
            let mut s = String::from(
                "| metric | side | Petrov | closed-form sum | imbalance | numeric imbalance | pass |\n|---|---|---|---|---|---|---|\n",
            );
            for l in &ledgers {
                let _ = writeln!(
                    s,
                    "| {} | {} | {:?} | {:.3e} | {:.2e} | {} | {} |",
                    l.metric,
                    l.side.symbol(),
                    l.petrov,
                    l.closed_form_sum,
                    l.imbalance,
                    l.numeric_imbalance.map_or("n/a".to_string(), |x| format!("{x:.2e}")),
                    match l.pass {
                        Some(true) => "yes",
                        Some(false) => "NO",
                        None => "n/a",
                    }
                );
            }
            s
        }
    };
    Ok(Emitted { body, pass })
}

fn classify(
    chi: i64,
    sign: i64,
    e: i64,
    w_max: u32,
    n_max: usize,
    bolts: Option<BoltBounds>,
    format: Format,
) -> Result<Emitted> {
    let bounds = EnumerationBounds {
        bolts: bolts.unwrap_or_else(BoltBounds::none),
        ..EnumerationBounds::nuts_only(chi, sign, e, n_max, w_max)
    };
    let en = enumerate_configs(&bounds)?;
    let mut lines = Vec::with_capacity(en.configs.len() + 2);
    let mut pass = true;
    let mut table = String::from("| configuration | signature formula | weight lemmas | Φ⁺ | Φ⁻ |\n|---|---|---|---|---|\n");
    for config in &en.configs {
        let cert = check_signature_identity(config, sign);
        let jang = jang_lemma_checks(config);
        let phi = phi_values(config);
        pass &= cert.holds && jang.pass;
        let _ = writeln!(
            table,
            "| {config} | {} | {} | {} | {} |",
            if cert.holds { "holds" } else { "fails" },
            if jang.pass { "hold" } else { "fail" },
            phi[0],
            phi[1]
        );
        lines.push(json!({
            "type": "config",
            "config": config.to_string(),
            "nuts": config.nuts,
            "bolts": config.bolts,
            "e": config.e,
            "signature": cert,
            "weight_lemmas": jang,
            "phi": [phi[0].to_string(), phi[1].to_string()],
        }));
    }
    let summary = json!({
        "type": "summary",
        "bounds": en.bounds,
        "configs": en.configs.len(),
        "candidates": en.candidates,
        "modular_false_positives": en.modular_false_positives,
        "rejected_by_lemma": en.rejected_by_lemma,
        "naive_space": en.naive_space,
        "pass": pass,
    });
    let body = match format {
        Format::Json => {
            let mut s = serde_json::to_string(&json!({ "type": "envelope", "envelope": envelope("classify") }))? + "\n";
            for l in lines.iter().chain(std::iter::once(&summary)) {
                s.push_str(&serde_json::to_string(l)?);
                s.push('\n');
            }
            s
        }
        Format::Markdown => format!("{table}\n{} configurations\n", en.configs.len()),
    };
    Ok(Emitted { body, pass })
}

fn case_analysis_cmd(topology: &str, w_max: u32, n_max: usize, no_bolts: bool, entries: bool, format: Format) -> Result<Emitted> {
    let topology: Topology = topology.parse()?;
    let bolts = if no_bolts { BoltBounds::none() } else { BoltBounds::default() };
    let mut report = case_analysis(topology, w_max, n_max, bolts)?;
    if !entries {
        report.entries.clear();
    }
    let pass = report.pass;
    let body = match format {
        Format::Json => document("case-analysis", &report)?,
        Format::Markdown => {
            let mut s = format!(
                "{}: {} admissible, {} equality, {} excluded, {} counterexamples\n",
                report.topology,
                report.admissible,
                report.equality,
                report.excluded,
                report.counterexamples.len()
            );
            if let Some(p) = &report.three_nut_patterns {
                let _ = writeln!(s, "three-nut configurations: {} match the pattern, {} other", p.matching, p.other);
            }
            for c in &report.counterexamples {
                let _ = writeln!(s, "- {} (Φ⁺ = {}, Φ⁻ = {})", c.config, c.phi[0], c.phi[1]);
            }
            s
        }
    };
    Ok(Emitted { body, pass })
}

fn decay(metric: &MetricArgs, format: Format) -> Result<Emitted> {
    let reports: Vec<_> = models(metric)?.iter().map(asymptotic_decay_suite).collect::<Result<_>>()?;
    let pass = reports.iter().all(|r| r.pass);
    let body = match format {
        Format::Json => document("decay", &json!({ "metrics": reports, "pass": pass }))?,
        Format::Markdown => {
            let mut s = String::from("| metric | quantity | target | exponent | pass |\n|---|---|---|---|---|\n");
            for r in &reports {
                for f in &r.fits {
                    let _ = writeln!(
                        s,
                        "| {} | {} | {} | {} | {} |",
                        r.metric,
                        f.quantity,
                        f.target,
                        f.exponent.map_or("vanishes".to_string(), |x| format!("{x:.4}")),
                        if f.pass { "yes" } else { "NO" }
                    );
                }
                for side in Side::BOTH {
                    let k = side.index();
                    let _ = writeln!(
                        s,
                        "| {} | r⁴(F{})² → b² | {:.6} | {:.6} | {} |",
                        r.metric,
                        side.symbol(),
                        r.b_squared[k],
                        r.r4_f2_limit[k],
                        if r.limit_agreement[k] { "yes" } else { "NO" }
                    );
                }
            }
            s
        }
    };
    Ok(Emitted { body, pass })
}

/// Runs a parsed command and renders its report.
pub fn execute(cli: &Cli) -> Result<Emitted> {
    let f = cli.format;
    match &cli.command {
        Command::ListMetrics => list_metrics(f),
        Command::VerifyIdentities { metric, sampling, suite, identities } => {
            verify_identities(metric, sampling, *suite, identities, f)
        }
        Command::Petrov { metric, seed, points } => petrov(metric, *seed, *points, f),
        Command::Charges { metric } => charges_cmd(metric, f),
        Command::Balance { metric, sign } => balance(metric, sign.as_deref(), f),
        Command::Classify { chi, sign, e, max_weight, max_nuts, bolts, max_bolts, max_self_intersection } => {
            let b = bolts.then(|| BoltBounds {
                max_bolts: *max_bolts,
                max_abs_self_intersection: *max_self_intersection,
                ..BoltBounds::default()
            });
            classify(*chi, *sign, *e, *max_weight, *max_nuts, b, f)
        }
        Command::CaseAnalysis { topology, max_weight, max_nuts, no_bolts, entries } => {
            case_analysis_cmd(topology, *max_weight, *max_nuts, *no_bolts, *entries, f)
        }
        Command::Decay { metric } => decay(metric, f),
    }
}

fn write_out(cli: &Cli, body: &str) -> Result<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, body)?,
        None => std::io::stdout().write_all(body.as_bytes())?,
    }
    Ok(())
}

fn status_line(command: &str, pass: bool) {
    let mut err = std::io::stderr();
    let word = if pass { "PASS" } else { "FAIL" };
    if err.is_terminal() && !no_color() {
        let code = if pass { 32 } else { 31 };
        let _ = writeln!(err, "{command}: \x1b[{code}m{word}\x1b[0m");
    } else {
        let _ = writeln!(err, "{command}: {word}");
    }
}

/// Entry point: parses `argv`, runs the command, writes the report and
/// returns the exit status.
pub fn run(argv: Vec<String>) -> i32 {
    let cli = match parse(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    let command = cli.command.name();
    match execute(&cli) {
        Ok(em) => {
            if let Err(e) = write_out(&cli, &em.body) {
                eprintln!("error: {e}");
                return EXIT_USAGE;
            }
            status_line(command, em.pass);
            if em.pass {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            let _ = write_out(&cli, &error_report(command, &e));
            eprintln!("error: {e}");
            error_exit(&e)
        }
    }
}
