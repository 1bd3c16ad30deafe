use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use ltperiod::lubin_tate::{mul_p, pk_combinatorial, pk_series, LTModel, ModelKind};
use ltperiod::monna::check_w_props;
use ltperiod::padic_core::digits_p;
use ltperiod::{monna, w, Params, VerdictRecord};
use ltperiod_cli::{
    config_to_args, exact_suite, load_cert, parse_config_file, run_all, solve, verify, Report, RunConfig,
};

const EXIT_USAGE: u8 = 3;

#[derive(Parser)]
#[command(name = "ltperiod", version, about = "Valuations of the Lubin-Tate period of Q_{p^2}")]
struct Cli {
    /// Worker threads for the parallel sweeps.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// key = value file mirroring the flags; explicit flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Table of w(k) and the Monna map.
    #[command(args_override_self = true)]
    WTable {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 32)]
        max: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep of the six properties of w.
    #[command(args_override_self = true)]
    PropsW {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 10_000)]
        kmax: u64,
        #[arg(long, default_value_t = 2000)]
        pairs: u64,
        #[arg(long, default_value_t = 1500)]
        subs: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Prints P_k(Y).
    #[command(args_override_self = true)]
    Pk {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        k: u64,
        #[arg(long, value_enum, default_value_t = Method::Comb)]
        method: Method,
    },
    /// Prints [p](Z) in one of the two coordinates.
    #[command(args_override_self = true)]
    Mulp {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 20)]
        cap: usize,
        #[arg(long, value_enum, default_value_t = Model::Special)]
        model: Model,
    },
    /// The exact identities, no period needed.
    #[command(args_override_self = true)]
    Identities {
        #[arg(long)]
        p: u64,
        #[command(flatten)]
        limits: LimitArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solves for the period and writes a certificate.
    #[command(args_override_self = true)]
    SolveOmega {
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Checks a certificate and every statement at its period.
    #[command(args_override_self = true)]
    Verify {
        #[arg(long)]
        cert: PathBuf,
        #[command(flatten)]
        ranges: RangeArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact suite, solve, verify.
    #[command(args_override_self = true)]
    All {
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        limits: LimitArgs,
        #[command(flatten)]
        ranges: RangeArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        cert_out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    /// closed sum over q-adic partitions
    Comb,
    /// coefficient of exp(Y log) in the special coordinate
    Series,
    /// the same in the polynomial model
    Poly,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Special,
    Polynomial,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long)]
    p: u64,
    #[arg(long)]
    f: Option<u32>,
    /// Torsion level n.
    #[arg(long)]
    n: Option<u32>,
    /// Decision precision A.
    #[arg(long)]
    precision: Option<u32>,
    /// Integrality horizon K.
    #[arg(long)]
    truncation: Option<u64>,
    /// Truncation of the torsion-point equation.
    #[arg(long)]
    tail_truncation: Option<u64>,
    #[arg(long)]
    zeta_choice: Option<u64>,
    #[arg(long)]
    residue_branch: Option<u64>,
    #[arg(long)]
    escalate: bool,
    #[arg(long)]
    max_level: Option<u32>,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    max_free_digits: Option<u32>,
    #[arg(long)]
    eigen_tries: Option<u32>,
}

#[derive(Args)]
struct LimitArgs {
    #[arg(long)]
    pk_mmax: Option<u64>,
    #[arg(long)]
    w_kmax: Option<u64>,
    #[arg(long)]
    w_pairs: Option<u64>,
    #[arg(long)]
    w_subs: Option<u64>,
    #[arg(long)]
    identity_kmax: Option<u64>,
    #[arg(long)]
    functional_zcap: Option<usize>,
    #[arg(long)]
    lemma35_cap: Option<usize>,
    #[arg(long)]
    zeta_mmax: Option<u64>,
    #[arg(long)]
    lucas_mmax: Option<u64>,
}

#[derive(Args)]
struct RangeArgs {
    #[arg(long)]
    kmax: Option<u64>,
    #[arg(long)]
    s3_kmax: Option<u64>,
    #[arg(long)]
    prop39_mmax: Option<u64>,
    #[arg(long)]
    section4_nmax: Option<u64>,
}

fn run_config(p: u64, solver: Option<&SolverArgs>, limits: Option<&LimitArgs>, ranges: Option<&RangeArgs>) -> RunConfig {
    let mut c = RunConfig::for_prime(p);
    if let Some(s) = solver {
        let d = &mut c.solver;
        if let Some(n) = s.n {
            d.n = n;
            d.max_level = n + 1;
        }
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(x) = s.$f { d.$f = x; })* };
        }
        set!(f, precision, truncation, max_level, budget, max_free_digits, eigen_tries, zeta_choice);
        d.tail_truncation = s.tail_truncation;
        d.residue_branch = s.residue_branch;
        d.escalate = s.escalate;
    }
    if let Some(l) = limits {
        let d = &mut c.limits;
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(x) = l.$f { d.$f = x; })* };
        }
        set!(pk_mmax, w_kmax, w_pairs, w_subs, identity_kmax, functional_zcap, lemma35_cap, zeta_mmax, lucas_mmax);
    }
    if let Some(r) = ranges {
        c.verify.kmax = r.kmax;
        c.verify.s3_kmax = r.s3_kmax;
        c.verify.prop39_mmax = r.prop39_mmax;
        c.verify.section4_nmax = r.section4_nmax;
    }
    c
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn finish(report: &Report, out: Option<&Path>) -> anyhow::Result<u8> {
    emit(out, &report.render())?;
    for line in report.summary_lines() {
        eprintln!("{line}");
    }
    Ok(report.exit_code() as u8)
}

fn w_table(p: u64, max: u64, format: Format, out: Option<&Path>) -> anyhow::Result<u8> {
    let params = Params::new(p)?;
    let text = match format {
        Format::Csv => {
            let mut wr = csv::Writer::from_writer(Vec::new());
            wr.write_record(["k", "digits", "w", "monna"])?;
            for k in 0..=max {
                let d: Vec<String> = digits_p(k, p).iter().map(|x| x.to_string()).collect();
                wr.write_record([k.to_string(), d.join(" "), w(k, &params).to_string(), monna(k, p).to_string()])?;
            }
            String::from_utf8(wr.into_inner()?)?
        }
        Format::Json => {
            let rows: Vec<serde_json::Value> = (0..=max)
                .map(|k| {
                    serde_json::json!({
                        "k": k,
                        "digits": digits_p(k, p),
                        "w": w(k, &params).to_string(),
                        "monna": monna(k, p).to_string(),
                    })
                })
                .collect();
            serde_json::to_string_pretty(&rows)? + "\n"
        }
    };
    emit(out, &text)?;
    Ok(0)
}

fn props_w(p: u64, kmax: u64, pairs: u64, subs: u64, out: Option<&Path>) -> anyhow::Result<u8> {
    let params = Params::new(p)?;
    let mut config = RunConfig::for_prime(p);
    config.limits.w_kmax = kmax;
    config.limits.w_pairs = pairs;
    config.limits.w_subs = subs;
    let rep = check_w_props(&params, kmax, pairs, subs);
    let mut report = Report::new("props-w", &config);
    report.records = rep
        .items
        .iter()
        .map(|i| {
            VerdictRecord::exact(
                format!("prop2.1:item={}:{}", i.item, i.range),
                i.statement.clone(),
                i.pass,
                i.counterexample.clone().unwrap_or_else(|| format!("{} instances", i.instances)),
            )
        })
        .collect();
    finish(&report, out)
}

fn pk(p: u64, k: u64, method: Method) -> anyhow::Result<u8> {
    let params = Params::new(p)?;
    let poly = match method {
        Method::Comb => pk_combinatorial(k, &params),
        Method::Series => pk_series(k, &params, ModelKind::Special)?.swap_remove(k as usize),
        Method::Poly => pk_series(k, &params, ModelKind::Polynomial)?.swap_remove(k as usize),
    };
    println!("{poly}");
    Ok(0)
}

fn mulp(p: u64, cap: usize, model: Model) -> anyhow::Result<u8> {
    let params = Params::new(p)?;
    let kind = match model {
        Model::Special => ModelKind::Special,
        Model::Polynomial => ModelKind::Polynomial,
    };
    let s = mul_p(&LTModel::new(kind, params, cap))?;
    let mut terms = Vec::new();
    for (k, c) in s.coeffs().iter().enumerate() {
        if !c.is_zero() {
            terms.push(format!("({c})*Z^{k}"));
        }
    }
    println!("{} + O(Z^{cap})", terms.join(" + "));
    Ok(0)
}

fn dispatch(cli: Cli) -> anyhow::Result<u8> {
    match cli.cmd {
        Cmd::WTable { p, max, format, out } => w_table(p, max, format, out.as_deref()),
        Cmd::PropsW { p, kmax, pairs, subs, out } => props_w(p, kmax, pairs, subs, out.as_deref()),
        Cmd::Pk { p, k, method } => pk(p, k, method),
        Cmd::Mulp { p, cap, model } => mulp(p, cap, model),
        Cmd::Identities { p, limits, out } => {
            let config = run_config(p, None, Some(&limits), None);
            finish(&exact_suite(&config)?, out.as_deref())
        }
        Cmd::SolveOmega { solver, out } => {
            let config = run_config(solver.p, Some(&solver), None, None);
            let cert = solve(&config)?;
            emit(out.as_deref(), &(cert.to_json() + "\n"))?;
            for c in &cert.selfchecks {
                eprintln!("{}: {} ({})", c.name, c.status, c.data);
            }
            Ok(if cert.valid { 0 } else { 1 })
        }
        Cmd::Verify { cert, ranges, out } => {
            let cert = load_cert(&cert)?;
            let mut config = run_config(cert.config.p, None, None, Some(&ranges));
            config.solver = cert.config.clone();
            finish(&verify(&cert, &config)?, out.as_deref())
        }
        Cmd::All { solver, limits, ranges, out, cert_out } => {
            let config = run_config(solver.p, Some(&solver), Some(&limits), Some(&ranges));
            let (report, cert) = run_all(&config)?;
            if let Some(path) = cert_out {
                emit(Some(&path), &(cert.to_json() + "\n"))?;
            }
            finish(&report, out.as_deref())
        }
    }
}

/// Splices config-file flags in right after the subcommand name.
fn expand_args(raw: Vec<String>) -> anyhow::Result<Vec<String>> {
    let mut path = None;
    for (i, a) in raw.iter().enumerate() {
        if a == "--config" {
            path = raw.get(i + 1).cloned();
        } else if let Some(v) = a.strip_prefix("--config=") {
            path = Some(v.to_string());
        }
    }
    let Some(path) = path else { return Ok(raw) };
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading config {path}"))?;
    let extra = config_to_args(&parse_config_file(&text)?);
    let names = ["w-table", "props-w", "pk", "mulp", "identities", "solve-omega", "verify", "all"];
    let Some(pos) = raw.iter().position(|a| names.contains(&a.as_str())) else { return Ok(raw) };
    let mut out = raw[..=pos].to_vec();
    out.extend(extra);
    out.extend_from_slice(&raw[pos + 1..]);
    Ok(out)
}

fn main() -> ExitCode {
    let args = match expand_args(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
