//! Batch front end: controller generation, certification, Monte Carlo
//! validation, comparison and uncertainty sweeps.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use smg_cert::oracle::report::{certificate_csv, comparison_csv, mc_csv, parse_mc_csv, plot_data_csv};
use smg_cert::oracle::{compare, mc_bounds, sweep, widths_monotone, ComparisonReport, EmpiricalBounds, McConfig, SamplingLaw};
use smg_cert::propagation::verify::{PreActivation, DEFAULT_SPLITS};
use smg_cert::smg::closed_loop::stand_in_spec;
use smg_cert::{
    assemble_closed_loop, find_steady_state, generate_controller, load_controller, save_controller, verify_with,
    BilinearMode, DisturbanceBox, Error, HiddenActivation, MlpController, OperatingPoint, SmgParams,
    VerificationCertificate, VerifyOptions,
};

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_SATURATION: u8 = 2;
const EXIT_UNSOUND: u8 = 3;

#[derive(Parser)]
#[command(name = "smg-cert", version, about = "Output bounds for neural excitation controllers on a shipboard microgrid")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// SMG parameter file; built-in defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Both)]
    format: Format,
    /// Leave `generated_at` out of every output file.
    #[arg(long, global = true)]
    no_timestamp: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    fn csv(self) -> bool {
        self != Format::Json
    }

    fn json(self) -> bool {
        self != Format::Csv
    }
}

#[derive(Subcommand)]
enum Command {
    /// Certify the control and excitation outputs over the shock box.
    Verify(VerifyArgs),
    /// Empirical output ranges by seeded sampling.
    Mc(McArgs),
    /// Check a certificate against Monte Carlo bounds.
    Compare(CompareArgs),
    /// Certificates and Monte Carlo bounds over a ladder of box radii.
    Sweep(SweepArgs),
    /// Write a seeded stand-in controller.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct BoxArgs {
    /// Controller file.
    #[arg(long, value_name = "PATH")]
    controller: PathBuf,
    /// Nominal load-torque step (p.u.); config value when omitted.
    #[arg(long)]
    shock: Option<f64>,
    /// Half-width of the shock uncertainty (p.u.); config value when omitted.
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BilinearArg {
    Mccormick,
    FrozenFactor,
}

#[derive(Clone, Copy, ValueEnum)]
enum PreActivationArg {
    Forward,
    Backward,
}

#[derive(Args)]
struct PropagationArgs {
    #[arg(long, value_enum, default_value_t = BilinearArg::Mccormick)]
    bilinear: BilinearArg,
    /// Source of the pre-activation bounds.
    #[arg(long, value_enum, default_value_t = PreActivationArg::Backward)]
    pre_activation: PreActivationArg,
    /// Minimum number of grid cells the shock box is cut into, each certified separately; 0 or 1 runs a single pass.
    #[arg(long, default_value_t = DEFAULT_SPLITS)]
    splits: usize,
}

impl PropagationArgs {
    fn options(&self) -> VerifyOptions {
        VerifyOptions {
            bilinear: match self.bilinear {
                BilinearArg::Mccormick => BilinearMode::McCormick,
                BilinearArg::FrozenFactor => BilinearMode::FrozenFactor,
            },
            pre_activation: match self.pre_activation {
                PreActivationArg::Forward => PreActivation::Forward,
                PreActivationArg::Backward => PreActivation::Backward,
            },
            splits: self.splits,
        }
    }
}

#[derive(Args)]
struct SamplingArgs {
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// uniform | vertex_biased
    #[arg(long, default_value = "vertex_biased")]
    law: SamplingLaw,
}

impl SamplingArgs {
    fn config(&self) -> Result<McConfig> {
        Ok(McConfig::new(self.samples, self.seed, self.law)?)
    }
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    bx: BoxArgs,
    #[command(flatten)]
    prop: PropagationArgs,
}

#[derive(Args)]
struct McArgs {
    #[command(flatten)]
    bx: BoxArgs,
    #[command(flatten)]
    sampling: SamplingArgs,
}

#[derive(Args)]
struct CompareArgs {
    /// Certificate JSON.
    #[arg(long, value_name = "PATH")]
    certificate: PathBuf,
    /// Monte Carlo bounds, JSON or CSV by extension.
    #[arg(long, value_name = "PATH")]
    mc: PathBuf,
    /// Controller name recorded in the report.
    #[arg(long)]
    label: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    /// Controller file.
    #[arg(long, value_name = "PATH")]
    controller: PathBuf,
    /// Shock center (p.u.); config value when omitted.
    #[arg(long)]
    shock: Option<f64>,
    /// Radius scale factors relative to the nominal load, ascending.
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45,0.5")]
    levels: Vec<f64>,
    #[command(flatten)]
    sampling: SamplingArgs,
    #[command(flatten)]
    prop: PropagationArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum ActivationArg {
    Tanh,
    Relu,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ActivationArg::Tanh)]
    activation: ActivationArg,
    #[arg(long, default_value_t = 1.0)]
    aggressiveness: f64,
    /// Layer widths, input first.
    #[arg(long, value_delimiter = ',', default_value = "7,32,32,2")]
    widths: Vec<usize>,
    #[arg(long, default_value_t = 0.1)]
    a_max: f64,
    /// Standard deviation of the output-layer bias.
    #[arg(long, default_value_t = 0.2)]
    output_bias_std: f64,
    /// Feed raw observations instead of normalizing around the operating point.
    #[arg(long)]
    no_normalization: bool,
    /// Controller file name inside the output directory.
    #[arg(long, default_value = "controller.json")]
    name: String,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { EXIT_OK });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let unsound = e.chain().any(|c| matches!(c.downcast_ref::<Error>(), Some(Error::Unsound { .. })));
            ExitCode::from(if unsound { EXIT_UNSOUND } else { EXIT_ERROR })
        }
    }
}

fn run(cli: &Cli) -> Result<u8> {
    let c = &cli.common;
    match &cli.command {
        Command::Verify(a) => cmd_verify(c, a),
        Command::Mc(a) => cmd_mc(c, a),
        Command::Compare(a) => cmd_compare(c, a),
        Command::Sweep(a) => cmd_sweep(c, a),
        Command::Generate(a) => cmd_generate(c, a),
    }
}

fn timestamp(c: &Common) -> Option<u64> {
    if c.no_timestamp {
        return None;
    }
    SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs())
}

fn require_file(path: &Path, what: &str) -> Result<()> {
    if !path.is_file() {
        bail!("{what} file not found: {}", path.display());
    }
    Ok(())
}

fn load_params(c: &Common) -> Result<SmgParams> {
    match &c.config {
        Some(path) => {
            require_file(path, "config")?;
            SmgParams::load(path).with_context(|| format!("loading config {}", path.display()))
        }
        None => Ok(SmgParams::default()),
    }
}

fn operating_point(p: &SmgParams) -> Result<OperatingPoint> {
    find_steady_state(p, p.sim.load_level).context("steady-state operating point")
}

fn load_ctrl(path: &Path) -> Result<MlpController> {
    require_file(path, "controller")?;
    load_controller(path).with_context(|| format!("loading controller {}", path.display()))
}

fn shock_box(p: &SmgParams, a: &BoxArgs) -> Result<DisturbanceBox> {
    let center = a.shock.unwrap_or(p.sim.shock);
    let radius = a.epsilon.unwrap_or(p.sim.epsilon);
    DisturbanceBox::scalar(center, radius).context("shock box")
}

fn controller_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn write(dir: &Path, name: &str, text: &str) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn certify(
    op: &OperatingPoint,
    ctrl: &MlpController,
    bx: &DisturbanceBox,
    opts: &VerifyOptions,
) -> Result<VerificationCertificate> {
    let asm = assemble_closed_loop(op, ctrl, bx)?;
    Ok(verify_with(&asm.graph, bx, &asm.graph.meta.control, opts)?)
}

fn cmd_verify(c: &Common, a: &VerifyArgs) -> Result<u8> {
    let p = load_params(c)?;
    let ctrl = load_ctrl(&a.bx.controller)?;
    let bx = shock_box(&p, &a.bx)?;
    let op = operating_point(&p)?;
    let mut cert = certify(&op, &ctrl, &bx, &a.prop.options())?;
    cert.generated_at = timestamp(c);
    if c.format.json() {
        write(&c.out, "certificate.json", &cert.to_json()?)?;
    }
    if c.format.csv() {
        write(&c.out, "certificate.csv", &certificate_csv(&cert)?)?;
    }
    for k in 0..2 {
        let iv = cert.interval(k);
        println!("{}: [{:.6}, {:.6}]", cert.labels[k], iv.lo, iv.hi);
    }
    if cert.saturation_free {
        println!("saturation-free");
        Ok(EXIT_OK)
    } else {
        println!(
            "saturation risk (control within ±{}: {}, excitation within limits: {})",
            cert.a_max, cert.control_within_limits, cert.excitation_within_limits
        );
        Ok(EXIT_SATURATION)
    }
}

fn cmd_mc(c: &Common, a: &McArgs) -> Result<u8> {
    let p = load_params(c)?;
    let ctrl = load_ctrl(&a.bx.controller)?;
    let bx = shock_box(&p, &a.bx)?;
    let op = operating_point(&p)?;
    let mut mc = mc_bounds(&op, &ctrl, &bx, &a.sampling.config()?)?;
    mc.generated_at = timestamp(c);
    if c.format.json() {
        write(&c.out, "mc.json", &mc.to_json()?)?;
    }
    if c.format.csv() {
        write(&c.out, "mc.csv", &mc_csv(&mc)?)?;
    }
    for k in 0..2 {
        let iv = mc.interval(k);
        println!("{}: [{:.6}, {:.6}]", mc.labels[k], iv.lo, iv.hi);
    }
    Ok(EXIT_OK)
}

fn read_mc(path: &Path) -> Result<EmpiricalBounds> {
    require_file(path, "Monte Carlo")?;
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let parsed = if csv {
        parse_mc_csv(&text)
    } else {
        EmpiricalBounds::from_json(&text)
    };
    parsed.with_context(|| format!("parsing {}", path.display()))
}

fn write_reports(c: &Common, stem: &str, reports: &[ComparisonReport]) -> Result<()> {
    if c.format.json() {
        write(&c.out, &format!("{stem}.json"), &json(&reports)?)?;
    }
    if c.format.csv() {
        write(&c.out, &format!("{stem}.csv"), &comparison_csv(reports)?)?;
    }
    Ok(())
}

fn cmd_compare(c: &Common, a: &CompareArgs) -> Result<u8> {
    require_file(&a.certificate, "certificate")?;
    let cert = VerificationCertificate::load(&a.certificate)
        .with_context(|| format!("loading certificate {}", a.certificate.display()))?;
    let mc = read_mc(&a.mc)?;
    let mut report = compare(&cert, &mc)?;
    report.controller = a.label.clone().unwrap_or_else(|| controller_name(&a.certificate));
    write_reports(c, "comparison", std::slice::from_ref(&report))?;
    for ch in &report.channels {
        println!(
            "{}: mc [{:.6}, {:.6}] dbbp [{:.6}, {:.6}] {}",
            ch.channel,
            ch.mc.lo,
            ch.mc.hi,
            ch.dbbp.lo,
            ch.dbbp.hi,
            if ch.sound { "sound" } else { "UNSOUND" }
        );
    }
    Ok(if report.sound { EXIT_OK } else { EXIT_UNSOUND })
}

fn cmd_sweep(c: &Common, a: &SweepArgs) -> Result<u8> {
    if a.levels.windows(2).any(|w| w[1] < w[0]) {
        bail!("--levels must be sorted ascending, got {:?}", a.levels);
    }
    let p = load_params(c)?;
    let ctrl = load_ctrl(&a.controller)?;
    let base = DisturbanceBox::scalar(a.shock.unwrap_or(p.sim.shock), p.sim.load_level).context("base box")?;
    let op = operating_point(&p)?;
    let name = controller_name(&a.controller);
    let mut rows = match sweep(&op, &ctrl, &base, &a.levels, &a.sampling.config()?, &a.prop.options()) {
        Ok(rows) => rows,
        Err(Error::Unsound { level, mut report }) => {
            report.controller = name;
            write_reports(c, "sweep_unsound", std::slice::from_ref(&report))?;
            return Err(Error::Unsound { level, report }.into());
        }
        Err(e) => return Err(e.into()),
    };
    let at = timestamp(c);
    for row in &mut rows {
        row.certificate.generated_at = at;
        row.mc.generated_at = at;
        row.report.controller = name.clone();
    }
    let reports: Vec<ComparisonReport> = rows.iter().map(|r| r.report.clone()).collect();
    if c.format.json() {
        write(&c.out, "sweep.json", &json(&rows)?)?;
    }
    if c.format.csv() {
        write(&c.out, "sweep.csv", &comparison_csv(&reports)?)?;
    }
    write(&c.out, "plot_data.csv", &plot_data_csv(&rows)?)?;
    for row in &rows {
        let w = row.certificate.widths();
        println!(
            "level {:.3}: widths U1 {:.3e} U2 {:.3e} saturation-free {}",
            row.level, w[0], w[1], row.certificate.saturation_free
        );
    }
    if !widths_monotone(&rows) {
        eprintln!("error: certificate widths shrink as the level grows");
        return Ok(EXIT_UNSOUND);
    }
    if rows.iter().any(|r| !r.certificate.saturation_free) {
        println!("saturation risk at one or more levels");
        return Ok(EXIT_SATURATION);
    }
    Ok(EXIT_OK)
}

fn cmd_generate(c: &Common, a: &GenerateArgs) -> Result<u8> {
    let activation = match a.activation {
        ActivationArg::Tanh => HiddenActivation::Tanh,
        ActivationArg::Relu => HiddenActivation::Relu,
    };
    let mut spec = if a.no_normalization {
        smg_cert::GeneratorSpec::new(a.seed, activation, a.aggressiveness)
    } else {
        let p = load_params(c)?;
        stand_in_spec(&operating_point(&p)?, a.seed, activation, a.aggressiveness)
    };
    spec.widths = a.widths.clone();
    spec.a_max = a.a_max;
    spec.output_bias_std = a.output_bias_std;
    let ctrl = generate_controller(&spec)?;
    fs::create_dir_all(&c.out).with_context(|| format!("creating output directory {}", c.out.display()))?;
    let path = c.out.join(&a.name);
    save_controller(&ctrl, &path)?;
    println!("{}", path.display());
    Ok(EXIT_OK)
}
