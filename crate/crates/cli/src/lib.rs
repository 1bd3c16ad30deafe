//! Pipelines behind the `ltperiod` binary: configuration, the exact suite,
//! the solver, the verifier, and report assembly.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use ltperiod::omega_solver::{audit_cert, solve_omega, SelfCheck};
use ltperiod::report::{group_counts, to_json_lines, Counts, REPORT_SCHEMA};
use ltperiod::verifier::{
    check_base_cases, check_congruences_s3, check_prop39, check_section4, run_exact_suite, theorem_a_table, Evaluated,
    ExactLimits,
};
use ltperiod::{OmegaCert, Params, SolverConfig, Status, VerdictRecord};

/// Everything a run depends on. Its hash goes into every report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub solver: SolverConfig,
    pub limits: ExactLimits,
    pub verify: VerifyRanges,
}

/// Index ranges of the checks at Ω̂. `None` takes the default for p, clamped
/// to the certificate's K.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyRanges {
    pub kmax: Option<u64>,
    pub s3_kmax: Option<u64>,
    pub prop39_mmax: Option<u64>,
    pub section4_nmax: Option<u64>,
}

/// The ranges after defaults and clamping.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ranges {
    pub kmax: u64,
    pub s3_kmax: u64,
    pub prop39_mmax: u64,
    pub section4_nmax: u64,
}

impl VerifyRanges {
    /// Explicit values beyond K are refused; defaults shrink to fit.
    pub fn resolve(&self, params: &Params, k: u64) -> anyhow::Result<Ranges> {
        let Params { p, q } = *params;
        let fits = |name: &str, need: u64| -> anyhow::Result<()> {
            if need > k {
                bail!("{name} needs u_k up to k = {need}, beyond the certificate truncation K = {k}");
            }
            Ok(())
        };
        let kmax = match self.kmax {
            Some(x) => {
                fits("kmax", x)?;
                x
            }
            None => match p {
                2 => 64,
                3 => 27,
                _ => q * q,
            }
            .min(k),
        };
        let s3_kmax = match self.s3_kmax {
            Some(x) => {
                fits("s3-kmax", x)?;
                x
            }
            None => 32.min(k),
        };
        let prop39_mmax = match self.prop39_mmax {
            Some(x) => {
                fits("prop39-mmax", x * p + p - 1)?;
                x
            }
            None => 12.min((k + 1).saturating_sub(p) / p),
        };
        let section4_nmax = match self.section4_nmax {
            Some(x) => {
                fits("section4-nmax", x * q)?;
                x
            }
            None => 4.min(k / q),
        };
        Ok(Ranges { kmax, s3_kmax, prop39_mmax, section4_nmax })
    }
}

impl RunConfig {
    pub fn for_prime(p: u64) -> RunConfig {
        RunConfig { solver: SolverConfig::default_for(p), limits: ExactLimits::default(), verify: VerifyRanges::default() }
    }

    pub fn params(&self) -> anyhow::Result<Params> {
        Ok(Params::new(self.solver.p)?)
    }

    /// sha256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        sha256_hex(serde_json::to_string(self).expect("config serializes").as_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Reads `key = value` lines; `#` starts a comment. Keys are flag names
/// without the leading dashes.
pub fn parse_config_file(text: &str) -> anyhow::Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("config line {}: expected key = value, got {raw:?}", no + 1);
        };
        let k = k.trim().replace('_', "-");
        if k.is_empty() {
            bail!("config line {}: empty key", no + 1);
        }
        out.insert(k, v.trim().to_string());
    }
    Ok(out)
}

/// Turns config entries into flags placed ahead of the command line, so
/// that explicit flags win.
pub fn config_to_args(entries: &BTreeMap<String, String>) -> Vec<String> {
    let mut out = Vec::new();
    for (k, v) in entries {
        match v.as_str() {
            "true" => out.push(format!("--{k}")),
            "false" => {}
            _ => {
                out.push(format!("--{k}"));
                out.push(v.clone());
            }
        }
    }
    out
}

/// A report: records plus a summary carrying the config hash and the
/// certificate digest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub config_hash: String,
    pub certificate: Option<String>,
    pub records: Vec<VerdictRecord>,
}

#[derive(Serialize)]
struct Summary<'a> {
    schema: u32,
    command: &'a str,
    config_hash: &'a str,
    certificate: Option<&'a str>,
    counts: Counts,
    groups: Vec<GroupLine>,
}

#[derive(Serialize)]
struct GroupLine {
    group: String,
    pass: usize,
    fail: usize,
    inconclusive: usize,
}

impl Report {
    pub fn new(command: &str, config: &RunConfig) -> Report {
        Report { command: command.into(), config_hash: config.hash(), certificate: None, records: Vec::new() }
    }

    pub fn counts(&self) -> Counts {
        Counts::of(&self.records)
    }

    pub fn exit_code(&self) -> i32 {
        self.counts().exit_code()
    }

    /// JSON lines: one record each, then `{"summary": …}`.
    pub fn render(&self) -> String {
        let mut s = to_json_lines(&self.records);
        let summary = Summary {
            schema: REPORT_SCHEMA,
            command: &self.command,
            config_hash: &self.config_hash,
            certificate: self.certificate.as_deref(),
            counts: self.counts(),
            groups: group_counts(&self.records)
                .into_iter()
                .map(|(group, c)| GroupLine { group, pass: c.pass, fail: c.fail, inconclusive: c.inconclusive })
                .collect(),
        };
        s.push_str(&serde_json::json!({ "summary": summary }).to_string());
        s.push('\n');
        s
    }

    /// Lines like `thmA: 64/64 pass` for the terminal.
    pub fn summary_lines(&self) -> Vec<String> {
        group_counts(&self.records)
            .into_iter()
            .map(|(g, c)| {
                let mut line = format!("{g}: {}/{} pass", c.pass, c.total());
                if c.fail > 0 {
                    line.push_str(&format!(", {} fail", c.fail));
                }
                if c.inconclusive > 0 {
                    line.push_str(&format!(", {} inconclusive", c.inconclusive));
                }
                line
            })
            .collect()
    }
}

fn check_records(prefix: &str, checks: &[SelfCheck]) -> Vec<VerdictRecord> {
    checks
        .iter()
        .map(|c| {
            VerdictRecord::new(
                format!("{prefix}:{}", c.name),
                format!("certificate self-check {}", c.name),
                c.status,
                c.data.clone(),
                "pass",
            )
        })
        .collect()
}

/// The exact layer for one prime.
pub fn exact_suite(config: &RunConfig) -> anyhow::Result<Report> {
    let mut r = Report::new("identities", config);
    r.records = run_exact_suite(&config.params()?, &config.limits)?;
    Ok(r)
}

pub fn solve(config: &RunConfig) -> anyhow::Result<OmegaCert> {
    Ok(solve_omega(&config.params()?, &config.solver)?)
}

pub fn load_cert(path: &Path) -> anyhow::Result<OmegaCert> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(OmegaCert::from_json(&text)?)
}

/// Audit, valuation table, base cases, the u_k congruences, the mod p² recursion
/// and the orbit expansion, all at the certificate's Ω̂.
pub fn verify_records(cert: &OmegaCert, ranges: &VerifyRanges) -> anyhow::Result<Vec<VerdictRecord>> {
    let params = Params::new(cert.config.p)?;
    let rg = ranges.resolve(&params, cert.truncation)?;
    let q = params.q;
    let table = rg
        .kmax
        .max(rg.s3_kmax)
        .max(rg.prop39_mmax * params.p + params.p - 1)
        .max(rg.section4_nmax * q);
    let mut out = check_records("audit", &audit_cert(cert)?);
    let ev = Evaluated::new(cert, table)?;
    out.extend(theorem_a_table(&ev, rg.kmax)?);
    out.extend(check_base_cases(&ev));
    out.extend(check_congruences_s3(&ev, rg.s3_kmax)?);
    if rg.prop39_mmax >= params.p {
        out.extend(check_prop39(&ev, rg.prop39_mmax)?);
    }
    if rg.section4_nmax >= 1 {
        out.extend(check_section4(&ev, rg.section4_nmax)?);
    }
    Ok(out)
}

pub fn verify(cert: &OmegaCert, config: &RunConfig) -> anyhow::Result<Report> {
    let mut r = Report::new("verify", config);
    r.certificate = Some(sha256_hex(cert.to_json().as_bytes()));
    r.records = verify_records(cert, &config.verify)?;
    Ok(r)
}

/// Exact suite, solve, verify. Returns the report and the certificate.
pub fn run_all(config: &RunConfig) -> anyhow::Result<(Report, OmegaCert)> {
    let mut r = exact_suite(config)?;
    r.command = "all".into();
    let cert = solve(config)?;
    r.certificate = Some(sha256_hex(cert.to_json().as_bytes()));
    r.records.extend(check_records("solver", &cert.selfchecks));
    r.records.extend(verify_records(&cert, &config.verify)?);
    Ok((r, cert))
}

/// Valuation column of the `thmA:` records, for comparing runs.
pub fn valuation_column(records: &[VerdictRecord], kmax: u64) -> Vec<(String, String, Status)> {
    records
        .iter()
        .filter(|r| {
            r.check_id
                .strip_prefix("thmA:k=")
                .and_then(|k| k.parse::<u64>().ok())
                .is_some_and(|k| k <= kmax)
        })
        .map(|r| (r.check_id.clone(), r.measured.clone(), r.status))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_lines() {
        let m = parse_config_file("# solver\np = 3\nzeta_choice=2  # j\n\nescalate = true\n").unwrap();
        assert_eq!(m["p"], "3");
        assert_eq!(m["zeta-choice"], "2");
        let args = config_to_args(&m);
        assert_eq!(args, ["--escalate", "--p", "3", "--zeta-choice", "2"]);
        assert!(parse_config_file("nonsense").is_err());
    }

    #[test]
    fn ranges_clamp_and_refuse() {
        let params = Params::new(3).unwrap();
        let r = VerifyRanges::default().resolve(&params, 100).unwrap();
        assert_eq!(r, Ranges { kmax: 27, s3_kmax: 32, prop39_mmax: 12, section4_nmax: 4 });
        let r = VerifyRanges::default().resolve(&params, 30).unwrap();
        assert_eq!(r.section4_nmax, 3);
        assert_eq!(r.prop39_mmax, 9);
        let bad = VerifyRanges { kmax: Some(101), ..Default::default() };
        assert!(bad.resolve(&params, 100).is_err());
    }

    #[test]
    fn hash_tracks_config() {
        let a = RunConfig::for_prime(2);
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.solver.zeta_choice = 3;
        assert_ne!(a.hash(), b.hash());
    }
}
