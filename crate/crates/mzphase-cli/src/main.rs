//! Command-line front end: Fisher-information sweeps, record sampling,
//! estimation campaigns, and Wigner grids.
//!
//! Every subcommand reads the same configuration surface: an optional flat
//! TOML file (`--config`), overridden key by key with flags. Artifacts open
//! with the resolved configuration echoed as `# key = value` lines (CSV) or
//! a `meta` object (JSON); stripping the `# ` prefix yields a config file
//! that reproduces the numeric payload byte for byte. Only the
//! `generated_at` stamp moves between runs.
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 numerical
//! failure, 4 I/O failure.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

use mzphase::fisher_c::{fisher_report, mle_campaign, precision_sweep, CampaignSpec, SweepSpec};
use mzphase::io::{
    self, campaign_csv, campaign_json, fisher_csv, fisher_json, fmt_g17, json_real, samples_csv,
    samples_jsonl, wigner_csv, wigner_json, Meta, MetaValue,
};
use mzphase::states::alpha_from_mean_photons;
use mzphase::wigner::{default_half_extent, reduced_wigner_ecs};
use mzphase::{
    DephasingParams, InterferometerParams, MeasurementScheme, MleOptions, StateFamily, SweepAxis,
};

#[derive(Parser)]
#[command(
    name = "mzphase",
    version,
    about = "Phase-estimation toolkit for entangled-coherent-state interferometry"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Quantum Fisher information and the quantum Cramer-Rao bound
    Qfi(CommonArgs),
    /// Precision sweep over the phase or the mean photon number
    Sweep(SweepArgs),
    /// Draw measurement records with a fixed seed
    Sample(SampleArgs),
    /// Repeated maximum-likelihood estimation against the Cramer-Rao bound
    MleCampaign(CampaignArgs),
    /// Reduced Wigner distribution of the interfering output mode
    Wigner(WignerArgs),
}

#[derive(Args, Default)]
struct CommonArgs {
    /// Flat TOML config file; command-line flags override its keys
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Probe family: ecs, qwp, or noon
    #[arg(long)]
    state: Option<String>,

    /// Photon number of a N00N probe
    #[arg(long = "N", value_name = "N")]
    noon_n: Option<u32>,

    /// Coherent amplitude (give exactly one of --alpha, --n-bar)
    #[arg(long)]
    alpha: Option<f64>,

    /// Mean photon number (give exactly one of --alpha, --n-bar)
    #[arg(long)]
    n_bar: Option<f64>,

    /// Differential phase phi1 - phi2
    #[arg(long)]
    phi: Option<f64>,

    /// Common phase (phi1 + phi2)/2; defaults to 0 alongside --phi
    #[arg(long)]
    phi_bar: Option<f64>,

    /// First arm phase (give together with --phi2)
    #[arg(long)]
    phi1: Option<f64>,

    /// Second arm phase (give together with --phi1)
    #[arg(long)]
    phi2: Option<f64>,

    /// Photon loss probability in [0, 1]
    #[arg(long = "loss")]
    loss_p: Option<f64>,

    /// Qubit dephasing strength (QWP probes)
    #[arg(long)]
    chi: Option<f64>,

    /// Qubit dephasing phase offset (QWP probes)
    #[arg(long)]
    vartheta: Option<f64>,

    /// Measurement scheme; sweep accepts a comma list of
    /// homodyne, counting, quantum
    #[arg(long)]
    scheme: Option<String>,

    /// Records per estimate: Cramer-Rao repetition count for qfi/sweep,
    /// records per trial for mle-campaign
    #[arg(long = "M")]
    m: Option<u64>,

    /// RNG seed; required for sample and mle-campaign
    #[arg(long)]
    seed: Option<u64>,

    /// Output file; stdout when omitted
    #[arg(long, short = 'o', value_name = "FILE")]
    output: Option<PathBuf>,

    /// Output format: csv or json
    #[arg(long)]
    format: Option<String>,

    /// Cap on worker threads (defaults to the machine's core count)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Swept quantity: phi or n_bar
    #[arg(long)]
    axis: Option<String>,

    /// First grid value
    #[arg(long)]
    from: Option<f64>,

    /// Last grid value
    #[arg(long)]
    to: Option<f64>,

    /// Grid size
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Number of records to draw
    #[arg(long)]
    count: Option<usize>,
}

#[derive(Args)]
struct CampaignArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Number of independent trials (at least 100)
    #[arg(long)]
    trials: Option<usize>,

    /// Lower edge of the likelihood search window
    #[arg(long)]
    window_lo: Option<f64>,

    /// Upper edge of the likelihood search window
    #[arg(long)]
    window_hi: Option<f64>,

    /// Points of the coarse likelihood scan
    #[arg(long)]
    coarse_points: Option<usize>,

    /// Width at which the likelihood refinement stops
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct WignerArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Half width of the square phase-space window (default alpha + 6)
    #[arg(long)]
    half_extent: Option<f64>,

    /// Grid points per axis
    #[arg(long)]
    resolution: Option<usize>,
}

// ---------------------------------------------------------------------------
// Failure classification and exit codes.

#[derive(Debug)]
enum Failure {
    Config(String),
    Numerical(String),
    Io(String),
}

impl Failure {
    fn config(msg: impl Into<String>) -> Self {
        Failure::Config(msg.into())
    }

    fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Numerical(m) | Failure::Io(m) => m,
        }
    }
}

impl From<mzphase::Error> for Failure {
    fn from(e: mzphase::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

type CliResult<T> = Result<T, Failure>;

// ---------------------------------------------------------------------------
// Config file: a flat TOML document whose keys mirror the long flags.

const CONFIG_KEYS: &[&str] = &[
    "state", "N", "alpha", "n_bar", "phi", "phi_bar", "phi1", "phi2", "loss_p", "chi", "vartheta",
    "scheme", "M", "seed", "output_path", "output_format", "threads", "axis", "from", "to",
    "points", "count", "trials", "window_lo", "window_hi", "coarse_points", "tol", "half_extent",
    "resolution",
];

// Keys written into artifact metadata that are not configuration: tool
// provenance and, for campaigns, the summary statistics block. Accepted and
// ignored so an echoed metadata block works as a config file unchanged.
const ECHO_ONLY_KEYS: &[&str] = &[
    "tool",
    "version",
    "subcommand",
    "generated_at",
    "samples_per_trial",
    "true_phi",
    "mean_estimate",
    "bias",
    "std_dev",
    "rmse",
    "cfi",
    "crb_std",
    "crb_ratio",
    "multimodal_trials",
    "boundary_trials",
];

struct FileConfig {
    table: toml::Table,
}

impl FileConfig {
    fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Io(format!("reading {}: {e}", path.display())))?;
        let table: toml::Table = text
            .parse()
            .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
        for (key, value) in &table {
            if !CONFIG_KEYS.contains(&key.as_str()) && !ECHO_ONLY_KEYS.contains(&key.as_str()) {
                return Err(Failure::config(format!(
                    "{}: unknown config key {key:?}",
                    path.display()
                )));
            }
            if value.is_table() || value.is_array() {
                return Err(Failure::config(format!(
                    "{}: key {key:?} must be a scalar (the config is a flat document)",
                    path.display()
                )));
            }
        }
        Ok(FileConfig { table })
    }

    fn f64(&self, key: &str) -> CliResult<Option<f64>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(toml::Value::Float(x)) => Ok(Some(*x)),
            Some(toml::Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(other) => Err(Failure::config(format!(
                "config key {key:?} must be a number, got {other}"
            ))),
        }
    }

    fn integer(&self, key: &str) -> CliResult<Option<i64>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(toml::Value::Integer(i)) => Ok(Some(*i)),
            Some(other) => Err(Failure::config(format!(
                "config key {key:?} must be an integer, got {other}"
            ))),
        }
    }

    fn string(&self, key: &str) -> CliResult<Option<String>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(s.clone())),
            Some(other) => Err(Failure::config(format!(
                "config key {key:?} must be a string, got {other}"
            ))),
        }
    }
}

/// Flag values layered over the config file: a flag wins whenever present.
struct Ctx {
    file: Option<FileConfig>,
}

impl Ctx {
    fn new(args: &CommonArgs) -> CliResult<Self> {
        let file = match &args.config {
            Some(path) => Some(FileConfig::load(path)?),
            None => None,
        };
        Ok(Ctx { file })
    }

    fn f64(&self, flag: Option<f64>, key: &str) -> CliResult<Option<f64>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.file.as_ref().map_or(Ok(None), |f| f.f64(key)),
        }
    }

    fn string(&self, flag: Option<&String>, key: &str) -> CliResult<Option<String>> {
        match flag {
            Some(v) => Ok(Some(v.clone())),
            None => self.file.as_ref().map_or(Ok(None), |f| f.string(key)),
        }
    }

    fn u64(&self, flag: Option<u64>, key: &str) -> CliResult<Option<u64>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => match self.file.as_ref().map_or(Ok(None), |f| f.integer(key))? {
                None => Ok(None),
                Some(i) => u64::try_from(i)
                    .map(Some)
                    .map_err(|_| Failure::config(format!("config key {key:?} must be >= 0"))),
            },
        }
    }

    fn usize(&self, flag: Option<usize>, key: &str) -> CliResult<Option<usize>> {
        Ok(self.u64(flag.map(|v| v as u64), key)?.map(|v| v as usize))
    }

    fn u32(&self, flag: Option<u32>, key: &str) -> CliResult<Option<u32>> {
        match self.u64(flag.map(u64::from), key)? {
            None => Ok(None),
            Some(v) => u32::try_from(v)
                .map(Some)
                .map_err(|_| Failure::config(format!("config key {key:?} is out of range"))),
        }
    }
}

// ---------------------------------------------------------------------------
// Resolution of the probe description shared by all subcommands.

#[derive(Clone, Copy, PartialEq)]
enum Requirement {
    Required,
    Optional,
    Forbidden,
}

#[derive(Clone, Copy)]
enum AmplitudeSpec {
    Alpha(f64),
    NBar(f64),
    Unset,
}

#[derive(Clone, Copy)]
enum PhaseSpec {
    /// phi1, phi2
    Arms(f64, f64),
    /// phi, phi_bar
    Differential(f64, f64),
    Unset,
}

struct Probe {
    family: StateFamily,
    /// Coherent amplitude; zero for a N00N probe, which has none.
    alpha: f64,
    amplitude: AmplitudeSpec,
    phase: PhaseSpec,
    loss_p: f64,
    deph: DephasingParams,
}

impl Probe {
    fn params(&self) -> CliResult<InterferometerParams> {
        let p = match self.phase {
            PhaseSpec::Arms(phi1, phi2) => {
                InterferometerParams::new(self.alpha, phi1, phi2, self.loss_p)
            }
            PhaseSpec::Differential(phi, phi_bar) => {
                InterferometerParams::from_differential(self.alpha, phi, phi_bar, self.loss_p)
            }
            PhaseSpec::Unset => {
                InterferometerParams::from_differential(self.alpha, 0.0, 0.0, self.loss_p)
            }
        };
        p.map_err(Failure::from)
    }

    fn echo(&self, meta: &mut Meta, with_dephasing: bool) {
        let state = match self.family {
            StateFamily::Ecs => "ecs",
            StateFamily::Qwp => "qwp",
            StateFamily::Noon(_) => "noon",
        };
        meta.push(("state".into(), state.into()));
        if let StateFamily::Noon(n) = self.family {
            meta.push(("N".into(), MetaValue::Int(i64::from(n))));
        }
        match self.amplitude {
            AmplitudeSpec::Alpha(a) => meta.push(("alpha".into(), a.into())),
            AmplitudeSpec::NBar(n) => meta.push(("n_bar".into(), n.into())),
            AmplitudeSpec::Unset => {}
        }
        match self.phase {
            PhaseSpec::Arms(phi1, phi2) => {
                meta.push(("phi1".into(), phi1.into()));
                meta.push(("phi2".into(), phi2.into()));
            }
            PhaseSpec::Differential(phi, phi_bar) => {
                meta.push(("phi".into(), phi.into()));
                meta.push(("phi_bar".into(), phi_bar.into()));
            }
            PhaseSpec::Unset => {}
        }
        meta.push(("loss_p".into(), self.loss_p.into()));
        if with_dephasing {
            meta.push(("chi".into(), self.deph.chi().into()));
            meta.push(("vartheta".into(), self.deph.vartheta().into()));
        }
    }
}

fn parse_state(s: &str) -> CliResult<&'static str> {
    match s.to_ascii_lowercase().as_str() {
        "ecs" => Ok("ecs"),
        "qwp" => Ok("qwp"),
        "noon" | "n00n" => Ok("noon"),
        other => Err(Failure::config(format!(
            "unknown state {other:?} (expected ecs, qwp, or noon)"
        ))),
    }
}

fn resolve_probe(
    ctx: &Ctx,
    args: &CommonArgs,
    default_state: Option<&str>,
    amplitude: Requirement,
    phase: Requirement,
) -> CliResult<Probe> {
    let state = match ctx.string(args.state.as_ref(), "state")? {
        Some(s) => parse_state(&s)?,
        None => default_state.ok_or_else(|| {
            Failure::config("a probe state is required: --state ecs|qwp|noon")
        })?,
    };

    // The amplitude pair is one override group: a flag for either member
    // hides both file keys, so file and flags cannot mix into two specs.
    let (alpha_in, n_bar_in) = if args.alpha.is_some() || args.n_bar.is_some() {
        (args.alpha, args.n_bar)
    } else {
        match &ctx.file {
            Some(f) => (f.f64("alpha")?, f.f64("n_bar")?),
            None => (None, None),
        }
    };

    let noon_n = ctx.u32(args.noon_n, "N")?;
    let (family, alpha, amplitude_spec) = match state {
        "noon" => {
            if alpha_in.is_some() || n_bar_in.is_some() {
                return Err(Failure::config(
                    "a N00N probe is sized with --N, not --alpha or --n-bar",
                ));
            }
            let n = noon_n
                .ok_or_else(|| Failure::config("a N00N probe needs its photon number: --N"))?;
            (StateFamily::Noon(n), 0.0, AmplitudeSpec::Unset)
        }
        _ => {
            let family = if state == "ecs" { StateFamily::Ecs } else { StateFamily::Qwp };
            if noon_n.is_some() {
                return Err(Failure::config("--N only applies to a N00N probe"));
            }
            match (alpha_in, n_bar_in, amplitude) {
                (Some(_), Some(_), _) => {
                    return Err(Failure::config(
                        "give exactly one amplitude: --alpha or --n-bar",
                    ))
                }
                (None, None, Requirement::Required) => {
                    return Err(Failure::config(
                        "an amplitude is required: --alpha or --n-bar",
                    ))
                }
                (None, None, _) => (family, 0.0, AmplitudeSpec::Unset),
                (Some(_), None, Requirement::Forbidden)
                | (None, Some(_), Requirement::Forbidden) => {
                    return Err(Failure::config(
                        "the amplitude is swept here; drop --alpha/--n-bar",
                    ))
                }
                (Some(a), None, _) => (family, a, AmplitudeSpec::Alpha(a)),
                (None, Some(n), _) => {
                    let a = alpha_from_mean_photons(family, n)?;
                    (family, a, AmplitudeSpec::NBar(n))
                }
            }
        }
    };

    // The four phase keys are likewise one override group.
    let cli_phase = args.phi.is_some()
        || args.phi_bar.is_some()
        || args.phi1.is_some()
        || args.phi2.is_some();
    let (phi, phi_bar, phi1, phi2) = if cli_phase {
        (args.phi, args.phi_bar, args.phi1, args.phi2)
    } else {
        match &ctx.file {
            Some(f) => (f.f64("phi")?, f.f64("phi_bar")?, f.f64("phi1")?, f.f64("phi2")?),
            None => (None, None, None, None),
        }
    };
    let phase_spec = match (phi1, phi2, phi, phi_bar) {
        (Some(a), Some(b), None, None) => PhaseSpec::Arms(a, b),
        (None, None, Some(p), pb) => PhaseSpec::Differential(p, pb.unwrap_or(0.0)),
        (None, None, None, Some(_)) => {
            return Err(Failure::config("--phi-bar needs a differential phase: add --phi"))
        }
        (None, None, None, None) => match phase {
            Requirement::Required => {
                return Err(Failure::config(
                    "a phase is required: --phi [--phi-bar] or --phi1 with --phi2",
                ))
            }
            _ => PhaseSpec::Unset,
        },
        (Some(_), None, None, None) | (None, Some(_), None, None) => {
            return Err(Failure::config("--phi1 and --phi2 go together"))
        }
        _ => {
            return Err(Failure::config(
                "give one phase form: --phi/--phi-bar or --phi1/--phi2, not both",
            ))
        }
    };
    if matches!(phase_spec, PhaseSpec::Arms(..) | PhaseSpec::Differential(..))
        && phase == Requirement::Forbidden
    {
        return Err(Failure::config("the phase is swept here; drop the phase flags"));
    }

    let loss_p = ctx.f64(args.loss_p, "loss_p")?.unwrap_or(0.0);
    let chi = ctx.f64(args.chi, "chi")?.unwrap_or(0.0);
    let vartheta = ctx.f64(args.vartheta, "vartheta")?.unwrap_or(0.0);
    let deph = DephasingParams::new(chi, vartheta)?;

    Ok(Probe { family, alpha, amplitude: amplitude_spec, phase: phase_spec, loss_p, deph })
}

// ---------------------------------------------------------------------------
// Output plumbing.

#[derive(Clone, Copy, PartialEq)]
enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    fn label(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

fn resolve_format(ctx: &Ctx, args: &CommonArgs) -> CliResult<OutputFormat> {
    match ctx.string(args.format.as_ref(), "output_format")? {
        None => Ok(OutputFormat::Csv),
        Some(s) => match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => {
                Err(Failure::config(format!("unknown format {other:?} (expected csv or json)")))
            }
        },
    }
}

fn resolve_output(ctx: &Ctx, args: &CommonArgs) -> CliResult<Option<PathBuf>> {
    Ok(match &args.output {
        Some(p) => Some(p.clone()),
        None => ctx.string(None, "output_path")?.map(PathBuf::from),
    })
}

fn resolve_threads(ctx: &Ctx, args: &CommonArgs) -> CliResult<()> {
    if let Some(n) = ctx.usize(args.threads, "threads")? {
        if n == 0 {
            return Err(Failure::config("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::config(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn base_meta(subcommand: &str) -> Meta {
    let stamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs() as i64)
        .unwrap_or(0);
    vec![
        ("tool".into(), "mzphase".into()),
        ("version".into(), env!("CARGO_PKG_VERSION").into()),
        ("subcommand".into(), subcommand.into()),
        ("generated_at".into(), MetaValue::Int(stamp)),
    ]
}

fn emit(output: Option<&Path>, payload: &str) -> CliResult<()> {
    match output {
        Some(path) => std::fs::write(path, payload)
            .map_err(|e| Failure::Io(format!("writing {}: {e}", path.display()))),
        None => {
            print!("{payload}");
            Ok(())
        }
    }
}

/// out.csv -> out.homodyne.csv; used only when one run writes several schemes.
fn scheme_path(base: &Path, scheme: MeasurementScheme) -> PathBuf {
    match base.extension() {
        Some(ext) => {
            base.with_extension(format!("{}.{}", scheme.label(), ext.to_string_lossy()))
        }
        None => base.with_extension(scheme.label()),
    }
}

fn parse_scheme(s: &str) -> CliResult<MeasurementScheme> {
    s.trim().parse::<MeasurementScheme>().map_err(Failure::from)
}

fn resolve_schemes(ctx: &Ctx, args: &CommonArgs) -> CliResult<Vec<MeasurementScheme>> {
    let raw = ctx
        .string(args.scheme.as_ref(), "scheme")?
        .unwrap_or_else(|| "homodyne".to_string());
    let schemes: Vec<MeasurementScheme> =
        raw.split(',').map(parse_scheme).collect::<CliResult<_>>()?;
    if schemes.is_empty() {
        return Err(Failure::config("at least one scheme is required"));
    }
    Ok(schemes)
}

fn single_record_scheme(ctx: &Ctx, args: &CommonArgs) -> CliResult<MeasurementScheme> {
    let schemes = resolve_schemes(ctx, args)?;
    if schemes.len() != 1 {
        return Err(Failure::config("this subcommand takes a single scheme"));
    }
    if schemes[0] == MeasurementScheme::Quantum {
        return Err(Failure::config(
            "the quantum bound has no records; use homodyne or counting",
        ));
    }
    Ok(schemes[0])
}

// ---------------------------------------------------------------------------
// Subcommands.

fn cmd_qfi(args: &CommonArgs) -> CliResult<()> {
    let ctx = Ctx::new(args)?;
    resolve_threads(&ctx, args)?;
    let probe = resolve_probe(&ctx, args, None, Requirement::Required, Requirement::Optional)?;
    let m = ctx.u64(args.m, "M")?.unwrap_or(1);
    let format = resolve_format(&ctx, args)?;
    let output = resolve_output(&ctx, args)?;

    let report =
        fisher_report(probe.family, MeasurementScheme::Quantum, &probe.params()?, &probe.deph, m)?;

    let mut meta = base_meta("qfi");
    probe.echo(&mut meta, true);
    meta.push(("M".into(), MetaValue::Int(m as i64)));
    meta.push(("output_format".into(), format.label().into()));
    if let Some(path) = &output {
        meta.push(("output_path".into(), path.display().to_string().into()));
    }

    let payload = match format {
        OutputFormat::Csv => {
            let mut out = io::meta_comment_block(&meta);
            out.push_str("n_bar,qfi,delta_phi_min,delta_phi_sql\n");
            out.push_str(&format!(
                "{},{},{},{}\n",
                fmt_g17(report.n_bar),
                fmt_g17(report.qfi),
                fmt_g17(report.delta_phi_min),
                fmt_g17(report.delta_phi_sql),
            ));
            out
        }
        OutputFormat::Json => {
            let doc = serde_json::json!({
                "meta": io::meta_json(&meta),
                "rows": [{
                    "n_bar": json_real(report.n_bar),
                    "qfi": json_real(report.qfi),
                    "delta_phi_min": json_real(report.delta_phi_min),
                    "delta_phi_sql": json_real(report.delta_phi_sql),
                }],
            });
            serde_json::to_string_pretty(&doc).expect("static structure")
        }
    };
    emit(output.as_deref(), &payload)
}

fn parse_axis(s: &str) -> CliResult<SweepAxis> {
    match s.to_ascii_lowercase().as_str() {
        "phi" => Ok(SweepAxis::Phi),
        "n_bar" | "n-bar" | "nbar" => Ok(SweepAxis::NBar),
        other => Err(Failure::config(format!("unknown axis {other:?} (expected phi or n_bar)"))),
    }
}

fn cmd_sweep(args: &SweepArgs) -> CliResult<()> {
    let common = &args.common;
    let ctx = Ctx::new(common)?;
    resolve_threads(&ctx, common)?;

    let axis = match ctx.string(args.axis.as_ref(), "axis")? {
        Some(s) => parse_axis(&s)?,
        None => return Err(Failure::config("a sweep needs --axis phi or --axis n_bar")),
    };
    // The swept quantity must not also be pinned; the fixed one is required.
    let (amp_req, phase_req) = match axis {
        SweepAxis::Phi => (Requirement::Required, Requirement::Optional),
        SweepAxis::NBar => (Requirement::Forbidden, Requirement::Required),
    };
    let probe = resolve_probe(&ctx, common, None, amp_req, phase_req)?;

    let from = ctx
        .f64(args.from, "from")?
        .ok_or_else(|| Failure::config("a sweep needs --from"))?;
    let to = ctx.f64(args.to, "to")?.ok_or_else(|| Failure::config("a sweep needs --to"))?;
    let points = ctx
        .usize(args.points, "points")?
        .ok_or_else(|| Failure::config("a sweep needs --points"))?;
    let m = ctx.u64(common.m, "M")?.unwrap_or(1);
    let schemes = resolve_schemes(&ctx, common)?;
    let format = resolve_format(&ctx, common)?;
    let output = resolve_output(&ctx, common)?;
    if schemes.len() > 1 && output.is_none() {
        return Err(Failure::config("a multi-scheme sweep needs --output to split files"));
    }

    let (phi, phi_bar) = match probe.phase {
        PhaseSpec::Arms(a, b) => (a - b, 0.5 * (a + b)),
        PhaseSpec::Differential(p, pb) => (p, pb),
        PhaseSpec::Unset => (0.0, 0.0),
    };

    for &scheme in &schemes {
        let spec = SweepSpec {
            family: probe.family,
            scheme,
            axis,
            start: from,
            stop: to,
            points,
            alpha: probe.alpha,
            phi,
            phi_bar,
            loss_p: probe.loss_p,
            deph: probe.deph,
            repetitions: m,
        };
        let rows = precision_sweep(&spec)?;

        let path = match (&output, schemes.len()) {
            (Some(base), n) if n > 1 => Some(scheme_path(base, scheme)),
            (Some(base), _) => Some(base.clone()),
            (None, _) => None,
        };
        let mut meta = base_meta("sweep");
        probe.echo(&mut meta, true);
        meta.push(("scheme".into(), scheme.label().into()));
        meta.push(("M".into(), MetaValue::Int(m as i64)));
        meta.push(("axis".into(), axis.label().into()));
        meta.push(("from".into(), from.into()));
        meta.push(("to".into(), to.into()));
        meta.push(("points".into(), MetaValue::Int(points as i64)));
        meta.push(("output_format".into(), format.label().into()));
        if let Some(p) = &path {
            meta.push(("output_path".into(), p.display().to_string().into()));
        }

        let payload = match format {
            OutputFormat::Csv => fisher_csv(&meta, axis, &rows),
            OutputFormat::Json => fisher_json(&meta, axis, &rows),
        };
        emit(path.as_deref(), &payload)?;
    }
    Ok(())
}

fn cmd_sample(args: &SampleArgs) -> CliResult<()> {
    let common = &args.common;
    let ctx = Ctx::new(common)?;
    resolve_threads(&ctx, common)?;
    let probe =
        resolve_probe(&ctx, common, None, Requirement::Required, Requirement::Required)?;
    let scheme = single_record_scheme(&ctx, common)?;
    let count = ctx
        .usize(args.count, "count")?
        .ok_or_else(|| Failure::config("sample needs --count"))?;
    let seed = ctx
        .u64(common.seed, "seed")?
        .ok_or_else(|| Failure::config("sampling is stochastic; a --seed is required"))?;
    let format = resolve_format(&ctx, common)?;
    let output = resolve_output(&ctx, common)?;

    let records =
        mzphase::fisher_c::draw_samples(probe.family, scheme, &probe.params()?, &probe.deph, count, seed)?;

    let mut meta = base_meta("sample");
    probe.echo(&mut meta, true);
    meta.push(("scheme".into(), scheme.label().into()));
    meta.push(("count".into(), MetaValue::Int(count as i64)));
    meta.push(("seed".into(), MetaValue::Int(seed as i64)));
    meta.push(("output_format".into(), format.label().into()));
    if let Some(path) = &output {
        meta.push(("output_path".into(), path.display().to_string().into()));
    }

    let payload = match format {
        OutputFormat::Csv => samples_csv(&meta, &records),
        OutputFormat::Json => samples_jsonl(&meta, &records),
    };
    emit(output.as_deref(), &payload)
}

fn cmd_mle_campaign(args: &CampaignArgs) -> CliResult<()> {
    let common = &args.common;
    let ctx = Ctx::new(common)?;
    resolve_threads(&ctx, common)?;
    let probe =
        resolve_probe(&ctx, common, None, Requirement::Required, Requirement::Required)?;
    let scheme = single_record_scheme(&ctx, common)?;
    let trials = ctx
        .usize(args.trials, "trials")?
        .ok_or_else(|| Failure::config("a campaign needs --trials"))?;
    let m = ctx.u64(common.m, "M")?.unwrap_or(1);
    let seed = ctx
        .u64(common.seed, "seed")?
        .ok_or_else(|| Failure::config("campaigns are stochastic; a --seed is required"))?;

    let defaults = MleOptions::default();
    let window_lo = ctx.f64(args.window_lo, "window_lo")?;
    let window_hi = ctx.f64(args.window_hi, "window_hi")?;
    let window = match (window_lo, window_hi) {
        (Some(lo), Some(hi)) => (lo, hi),
        (None, None) => defaults.window,
        _ => return Err(Failure::config("--window-lo and --window-hi go together")),
    };
    let mle = MleOptions {
        window,
        coarse_points: ctx
            .usize(args.coarse_points, "coarse_points")?
            .unwrap_or(defaults.coarse_points),
        tol: ctx.f64(args.tol, "tol")?.unwrap_or(defaults.tol),
    };
    let format = resolve_format(&ctx, common)?;
    let output = resolve_output(&ctx, common)?;

    let spec = CampaignSpec {
        family: probe.family,
        scheme,
        params: probe.params()?,
        deph: probe.deph,
        samples_per_trial: m as usize,
        trials,
        master_seed: seed,
        mle,
    };
    let summary = mle_campaign(&spec)?;

    let mut meta = base_meta("mle-campaign");
    probe.echo(&mut meta, true);
    meta.push(("scheme".into(), scheme.label().into()));
    meta.push(("M".into(), MetaValue::Int(m as i64)));
    // `trials` is intentionally not echoed here: the summary block that
    // follows in the artifact carries it, and the combined flat document
    // must not repeat a key.
    meta.push(("seed".into(), MetaValue::Int(seed as i64)));
    meta.push(("window_lo".into(), window.0.into()));
    meta.push(("window_hi".into(), window.1.into()));
    meta.push(("coarse_points".into(), MetaValue::Int(mle.coarse_points as i64)));
    meta.push(("tol".into(), mle.tol.into()));
    meta.push(("output_format".into(), format.label().into()));
    if let Some(path) = &output {
        meta.push(("output_path".into(), path.display().to_string().into()));
    }

    let payload = match format {
        OutputFormat::Csv => campaign_csv(&meta, &summary),
        OutputFormat::Json => campaign_json(&meta, &summary),
    };
    emit(output.as_deref(), &payload)
}

fn cmd_wigner(args: &WignerArgs) -> CliResult<()> {
    let common = &args.common;
    let ctx = Ctx::new(common)?;
    resolve_threads(&ctx, common)?;
    let probe =
        resolve_probe(&ctx, common, Some("ecs"), Requirement::Required, Requirement::Required)?;
    if probe.family != StateFamily::Ecs {
        return Err(Failure::config("the Wigner reconstruction covers the ECS probe only"));
    }
    let half_extent = ctx
        .f64(args.half_extent, "half_extent")?
        .unwrap_or_else(|| default_half_extent(probe.alpha));
    let resolution = ctx.usize(args.resolution, "resolution")?.unwrap_or(201);
    let format = resolve_format(&ctx, common)?;
    let output = resolve_output(&ctx, common)?;

    let grid = reduced_wigner_ecs(&probe.params()?, half_extent, resolution)?;

    let mut meta = base_meta("wigner");
    probe.echo(&mut meta, false);
    meta.push(("half_extent".into(), half_extent.into()));
    meta.push(("resolution".into(), MetaValue::Int(resolution as i64)));
    meta.push(("output_format".into(), format.label().into()));
    if let Some(path) = &output {
        meta.push(("output_path".into(), path.display().to_string().into()));
    }

    let payload = match format {
        OutputFormat::Csv => wigner_csv(&meta, &grid),
        OutputFormat::Json => wigner_json(&meta, &grid),
    };
    emit(output.as_deref(), &payload)
}

fn run(cli: Cli) -> CliResult<()> {
    match &cli.command {
        Command::Qfi(args) => cmd_qfi(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Sample(args) => cmd_sample(args),
        Command::MleCampaign(args) => cmd_mle_campaign(args),
        Command::Wigner(args) => cmd_wigner(args),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(failure) = run(cli) {
        eprintln!("error: {}", failure.message());
        std::process::exit(failure.exit_code());
    }
}
