use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cfrank::certified::PrecisionPolicy;
use cfrank::cf_params::CFParams;
use cfrank::constructions::{build, BuilderKind, CertificateTrace};
use cfrank::contfrac::{Theta, ThetaSpec};
use cfrank::experiment::{
    parse_rational, run_simulate, run_verify, sha256_hex, DecayPlan, EigenPlan, ExperimentConfig, SimulatePlan,
    SimulateReport, VerifyPlan, VerifyReport, WindowCandidate, WindowPlan,
};
use cfrank::simulator::profile_csv;
use cfrank::verifier::CheckKind;
use cfrank::{Error, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

#[derive(Debug, Parser)]
#[command(name = "cfrank", version, about = "Exact (C,F) rank-one constructions for irrational rotations")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build parameters and certificates.
    Construct(ConstructArgs),
    /// Run verifier checks on a params file.
    Verify(VerifyArgs),
    /// Run tower experiments on a params file.
    Simulate(SimulateArgs),
    /// Construct, verify and simulate from one experiment config.
    Report(ConstructArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Experiment config (JSON); flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// cf:a0,a1,… | periodic:pre|period | surd:P,D,Q | decimal:0.…
    #[arg(long)]
    theta: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ConstructArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    builder: Option<String>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    digit_cap: Option<usize>,
    /// Window parameter for thm42.
    #[arg(long)]
    big_n: Option<String>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    params: PathBuf,
    /// Builder certificates; supplies theta, tail majorants and the replay trace.
    #[arg(long)]
    certificates: Option<PathBuf>,
    /// Checks to run, also accepted as --check a,b.
    checks: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    check: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    level: Vec<usize>,
    /// Torsion orders.
    #[arg(long, value_delimiter = ',')]
    p: Vec<u64>,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    window_n: Option<usize>,
    #[arg(long)]
    window_m: Option<usize>,
    /// `theta` or a rational `p/q`.
    #[arg(long, default_value = "theta")]
    candidate: String,
    #[arg(long)]
    replay: bool,
    /// Ignore the builder's tail majorants.
    #[arg(long)]
    no_tails: bool,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    params: PathBuf,
    #[arg(long)]
    certificates: Option<PathBuf>,
    /// Simulation plan (JSON); flags add to it.
    #[arg(long)]
    plan: Option<PathBuf>,
    #[arg(long)]
    rigidity: bool,
    #[arg(long, value_delimiter = ',')]
    decay: Vec<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    gap: Vec<usize>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write(dir: &Path, name: &str, body: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let p = dir.join(name);
    fs::write(&p, body).map_err(|source| Error::Io {
        path: p.display().to_string(),
        source,
    })?;
    Ok(p)
}

fn pretty<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

fn out_dir(common: &Common, cfg: Option<&ExperimentConfig>) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| cfg.and_then(|c| c.out.clone()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("cfrank-out"))
}

/// Config file first, then flags on top.
fn resolve(args: &ConstructArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &args.common.config {
        Some(p) => ExperimentConfig::from_json(&read(p)?)?,
        None => {
            let theta = args
                .common
                .theta
                .as_deref()
                .ok_or_else(|| Error::InvalidParams("--theta or --config is required".into()))?;
            let builder = args
                .builder
                .as_deref()
                .ok_or_else(|| Error::InvalidParams("--builder or --config is required".into()))?;
            ExperimentConfig::new(ThetaSpec::parse_flag(theta)?, builder.parse()?, 8)
        }
    };
    if let Some(t) = &args.common.theta {
        cfg.theta = ThetaSpec::parse_flag(t)?;
    }
    if let Some(b) = &args.builder {
        cfg.builder = b.parse::<BuilderKind>()?;
    }
    if let Some(l) = args.levels {
        cfg.build.levels = l;
    }
    if let Some(d) = args.digit_cap {
        cfg.build.digit_cap = d;
    }
    if let Some(s) = args.common.seed {
        cfg.seed = s;
    }
    if let Some(n) = &args.big_n {
        cfg.big_n = Some(n.parse().map_err(|_| Error::InvalidParams(format!("--big-n {n}")))?);
    }
    if let Some(o) = &args.common.out {
        cfg.out = Some(o.display().to_string());
    }
    cfg.build.precision = cfg.build.precision.clone().with_env_override();
    cfg.check()?;
    Ok(cfg)
}

fn construct(args: &ConstructArgs, full: bool) -> Result<i32> {
    let cfg = resolve(args)?;
    let dir = out_dir(&args.common, Some(&cfg));
    let theta = Theta::new(cfg.theta.clone())?;
    let built = build(cfg.builder, &theta, &cfg.build, cfg.big_n.as_ref())?;
    let params_json = built.params.to_json();
    write(&dir, "params.json", &params_json)?;
    write(&dir, "certificates.json", &pretty(&built.trace))?;
    if let Some(tc) = &built.two_cut {
        write(&dir, "params_two_cut.json", &tc.to_json())?;
    }
    let held = built.trace.all_hold();
    if !held {
        if let Some(c) = built.trace.certificates.iter().find(|c| !c.holds()) {
            eprintln!("certificate {} failed at level {}: {} {} {}", c.name, c.level, c.lhs.to_f64(), c.relation.symbol(), c.rhs.to_f64());
        }
    }
    if !full {
        println!("{} levels, {} certificates, all hold: {held}", built.params.levels(), built.trace.certificates.len());
        return Ok(if held { 0 } else { 1 });
    }
    let policy = &cfg.build.precision;
    let verify = run_verify(&cfg.verify, &built.params, &theta, built.trace.tails.as_ref(), Some(&built.trace), policy)?;
    let simulate = run_simulate(&cfg.simulate, &built.params, &theta, built.trace.tails.as_ref(), cfg.seed)?;
    write_csvs(&dir, &simulate)?;
    // The output location is not part of the experiment.
    let resolved = ExperimentConfig { out: None, ..cfg.clone() };
    let report = json!({
        "config": resolved,
        "config_hash": resolved.hash(),
        "params_hash": built.params.content_hash(),
        "certificates_hash": sha256_hex(pretty(&built.trace).as_bytes()),
        "certificates_hold": held,
        "verify": verify,
        "simulate": simulate,
    });
    write(&dir, "report.json", &pretty(&report))?;
    println!("report: certificates {held}, verify {}", verify.pass);
    Ok(if held && verify.pass && simulate_ok(&simulate) { 0 } else { 1 })
}

fn simulate_ok(r: &SimulateReport) -> bool {
    r.rigidity.iter().all(|x| x.holds) && r.eigen.as_ref().map_or(true, |e| e.within_bound)
}

fn write_csvs(dir: &Path, r: &SimulateReport) -> Result<()> {
    for (i, rows) in r.correlations.iter().enumerate() {
        write(dir, &format!("correlation_{i}.csv"), &profile_csv(rows))?;
    }
    Ok(())
}

/// Theta from the flag, else from the certificates file.
fn load_inputs(common: &Common, params: &Path, certs: Option<&Path>) -> Result<(CFParams, Theta, Option<CertificateTrace>, String)> {
    let params_text = read(params)?;
    let p = CFParams::from_json(&params_text)?;
    let trace: Option<CertificateTrace> = match certs {
        Some(c) => Some(serde_json::from_str(&read(c)?)?),
        None => None,
    };
    let spec = match (&common.theta, &trace) {
        (Some(t), _) => ThetaSpec::parse_flag(t)?,
        (None, Some(t)) => t.theta.clone(),
        (None, None) => return Err(Error::InvalidParams("--theta or --certificates is required".into())),
    };
    Ok((p, Theta::new(spec)?, trace, sha256_hex(params_text.as_bytes())))
}

fn verify(args: &VerifyArgs) -> Result<i32> {
    let (params, theta, trace, input_hash) = load_inputs(&args.common, &args.params, args.certificates.as_deref())?;
    let mut plan = match &args.common.config {
        Some(c) => ExperimentConfig::from_json(&read(c)?)?.verify,
        None => VerifyPlan::default(),
    };
    for name in args.checks.iter().chain(&args.check) {
        let kind = match name.as_str() {
            "torsion" => CheckKind::TorsionObstruction,
            "window" => CheckKind::WindowEigen,
            other => other.parse()?,
        };
        plan.checks.push(kind);
    }
    if !args.level.is_empty() {
        plan.levels = args.level.clone();
    }
    if !args.p.is_empty() {
        plan.torsion_p = args.p.clone();
    }
    if let Some(eps) = &args.eps {
        let parse = parse_rational;
        let l = params.levels();
        plan.window = Some(WindowPlan {
            candidate: match args.candidate.as_str() {
                "theta" => WindowCandidate::Theta,
                r => WindowCandidate::Rational { value: parse(r)? },
            },
            eps: parse(eps)?,
            n: args.window_n.unwrap_or(l.saturating_sub(1)),
            m: args.window_m.unwrap_or(l),
            size_cap: cfrank::simulator::DEFAULT_SUMSET_CAP,
        });
    }
    plan.replay |= args.replay;
    plan.use_tails &= !args.no_tails;
    let policy = PrecisionPolicy::default().with_env_override();
    let tails = trace.as_ref().and_then(|t| t.tails.as_ref());
    let report: VerifyReport = run_verify(&plan, &params, &theta, tails, trace.as_ref(), &policy)?;
    let body = pretty(&json!({ "input_hash": input_hash, "plan": plan, "report": report }));
    match &args.common.out {
        Some(dir) => {
            write(dir, "verify.json", &body)?;
        }
        None => print!("{body}"),
    }
    for c in &report.checks {
        eprintln!("{:<24} {:?}  {}", c.kind.name(), c.verdict, c.summary);
    }
    Ok(if report.pass { 0 } else { 1 })
}

fn simulate(args: &SimulateArgs) -> Result<i32> {
    let (params, theta, trace, input_hash) = load_inputs(&args.common, &args.params, args.certificates.as_deref())?;
    let mut plan: SimulatePlan = match &args.plan {
        Some(p) => serde_json::from_str(&read(p)?)?,
        None => SimulatePlan::default(),
    };
    plan.rigidity |= args.rigidity;
    if !args.decay.is_empty() {
        plan.decay = Some(DecayPlan {
            windows: args.decay.clone(),
            extra: 64,
        });
    }
    if let Some(samples) = args.samples {
        plan.eigen = Some(EigenPlan {
            depth: args.depth,
            samples,
        });
    }
    plan.gaps.extend(args.gap.iter().copied());
    let seed = args.common.seed.unwrap_or(0);
    let tails = trace.as_ref().and_then(|t| t.tails.as_ref());
    let report = run_simulate(&plan, &params, &theta, tails, seed)?;
    let body = pretty(&json!({ "input_hash": input_hash, "plan": plan, "report": report }));
    match &args.common.out {
        Some(dir) => {
            write(dir, "simulate.json", &body)?;
            write_csvs(dir, &report)?;
        }
        None => print!("{body}"),
    }
    Ok(if simulate_ok(&report) { 0 } else { 1 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match &cli.cmd {
        Command::Construct(a) => construct(a, false),
        Command::Report(a) => construct(a, true),
        Command::Verify(a) => verify(a),
        Command::Simulate(a) => simulate(a),
    };
    match r {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
