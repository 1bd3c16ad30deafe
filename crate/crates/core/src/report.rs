//! Verdict records and pass/fail bookkeeping shared by the checkers.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::padic_core::{Rational, ValueV};

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    InconclusivePrecision,
}

impl Status {
    /// Turns a three-way decision into a status.
    pub fn from_decision(d: Option<bool>) -> Status {
        match d {
            Some(true) => Status::Pass,
            Some(false) => Status::Fail,
            None => Status::InconclusivePrecision,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::InconclusivePrecision => "inconclusive-precision",
        })
    }
}

/// One checked instance of a statement.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub check_id: String,
    pub claim: String,
    pub status: Status,
    pub measured: String,
    pub expected: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl VerdictRecord {
    pub fn new(
        check_id: impl Into<String>,
        claim: impl Into<String>,
        status: Status,
        measured: impl Into<String>,
        expected: impl Into<String>,
    ) -> Self {
        VerdictRecord {
            check_id: check_id.into(),
            claim: claim.into(),
            status,
            measured: measured.into(),
            expected: expected.into(),
            detail: None,
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    /// val = expected, read from a ValueV.
    pub fn valuation_eq(check_id: impl Into<String>, claim: impl Into<String>, v: &ValueV, expected: &Rational) -> Self {
        VerdictRecord::new(check_id, claim, Status::from_decision(v.eq_rat(expected)), v.to_string(), expected.to_string())
    }

    /// val > bound.
    pub fn valuation_gt(check_id: impl Into<String>, claim: impl Into<String>, v: &ValueV, bound: &Rational) -> Self {
        VerdictRecord::new(check_id, claim, Status::from_decision(v.gt(bound)), v.to_string(), format!(">{bound}"))
    }

    /// val ≥ bound.
    pub fn valuation_ge(check_id: impl Into<String>, claim: impl Into<String>, v: &ValueV, bound: &Rational) -> Self {
        VerdictRecord::new(check_id, claim, Status::from_decision(v.ge(bound)), v.to_string(), format!(">={bound}"))
    }

    pub fn exact(check_id: impl Into<String>, claim: impl Into<String>, ok: bool, measured: impl Into<String>) -> Self {
        let status = if ok { Status::Pass } else { Status::Fail };
        VerdictRecord::new(check_id, claim, status, measured, "exact")
    }
}

/// Outcome of an exhaustive check: instance count and the first failure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub range: String,
    pub instances: u64,
    pub pass: bool,
    pub first_failure: Option<String>,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, range: impl Into<String>) -> Self {
        CheckResult { name: name.into(), range: range.into(), instances: 0, pass: true, first_failure: None }
    }

    pub fn note(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.instances += 1;
        if !ok && self.pass {
            self.pass = false;
            self.first_failure = Some(what());
        }
    }

    pub fn to_record(&self) -> VerdictRecord {
        VerdictRecord::exact(
            format!("{}:{}", self.name, self.range),
            format!("{} on {}", self.name, self.range),
            self.pass,
            match &self.first_failure {
                Some(f) => format!("first failure {f}"),
                None => format!("{} instances", self.instances),
            },
        )
    }
}

/// Per-status counts for a group of records.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub pass: usize,
    pub fail: usize,
    pub inconclusive: usize,
}

impl Counts {
    pub fn of<'a>(recs: impl IntoIterator<Item = &'a VerdictRecord>) -> Counts {
        let mut c = Counts::default();
        for r in recs {
            match r.status {
                Status::Pass => c.pass += 1,
                Status::Fail => c.fail += 1,
                Status::InconclusivePrecision => c.inconclusive += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.pass + self.fail + self.inconclusive
    }

    /// 0 all pass, 1 any fail, 2 inconclusive but no fail.
    pub fn exit_code(&self) -> i32 {
        if self.fail > 0 {
            1
        } else if self.inconclusive > 0 {
            2
        } else {
            0
        }
    }
}

/// Counts grouped by the prefix of check_id before the first ':'.
pub fn group_counts(recs: &[VerdictRecord]) -> Vec<(String, Counts)> {
    let mut out: Vec<(String, Counts)> = Vec::new();
    for r in recs {
        let g = r.check_id.split(':').next().unwrap_or("").to_string();
        let idx = match out.iter().position(|(k, _)| *k == g) {
            Some(i) => i,
            None => {
                out.push((g, Counts::default()));
                out.len() - 1
            }
        };
        let c = &mut out[idx].1;
        match r.status {
            Status::Pass => c.pass += 1,
            Status::Fail => c.fail += 1,
            Status::InconclusivePrecision => c.inconclusive += 1,
        }
    }
    out
}

/// JSON-lines rendering, one record per line.
pub fn to_json_lines(recs: &[VerdictRecord]) -> String {
    let mut s = String::new();
    for r in recs {
        s.push_str(&serde_json::to_string(r).expect("records serialize"));
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn statuses_from_readings() {
        let b = ValueV::BoundedBelow(Rational::from_int(3));
        let r = VerdictRecord::valuation_eq("x:1", "c", &b, &Rational::from_int(4));
        assert_eq!(r.status, Status::InconclusivePrecision);
        let r = VerdictRecord::valuation_eq("x:2", "c", &b, &Rational::from_int(1));
        assert_eq!(r.status, Status::Fail);
        let f = ValueV::Finite(Rational::new(1, 6));
        assert_eq!(VerdictRecord::valuation_eq("x:3", "c", &f, &Rational::new(1, 6)).status, Status::Pass);
        let recs = [VerdictRecord::valuation_gt("y:1", "c", &f, &Rational::zero())];
        assert_eq!(Counts::of(&recs).exit_code(), 0);
    }

    #[test]
    fn json_line_shape() {
        let r = VerdictRecord::exact("a:b", "claim", true, "m");
        let line = to_json_lines(&[r]);
        assert!(line.contains("\"status\":\"pass\""));
        assert!(line.ends_with('\n'));
    }
}
