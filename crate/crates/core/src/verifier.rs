//! Checks at the solved period: the valuation table val(P_k(Ω̂)) = w(k), the
//! congruences around it, the orbit expansion of C_n, and the exact-layer
//! suite that needs no Ω̂ at all.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::local_model::{LocalNum, Tower};
use crate::lubin_tate::{
    check_lemma35, gauss_profile, identity_divbyu1_on, identity_functional_eq, mul_p, pk_combinatorial, pk_series,
    LTModel, ModelKind,
};
use crate::monna::{check_w_props, w};
use crate::omega_solver::{u_table, OmegaCert};
use crate::padic_core::{binom, binom_mod_p, enumerate_reps, orbit_size, val_factorial, IndexVector, Params, Rational};
use crate::report::{CheckResult, Status, VerdictRecord};
use crate::{Error, Result};

/// Ω̂ from a certificate with its coefficient table u_0 … u_kmax.
pub struct Evaluated {
    pub params: Params,
    pub tower: Arc<Tower>,
    pub omega: LocalNum,
    pub truncation: u64,
    u: Vec<LocalNum>,
}

impl Evaluated {
    /// Refuses kmax beyond the certificate's integrality horizon K.
    pub fn new(cert: &OmegaCert, kmax: u64) -> Result<Evaluated> {
        if kmax > cert.truncation {
            return Err(Error::Config(format!(
                "kmax = {kmax} exceeds the certificate truncation K = {}",
                cert.truncation
            )));
        }
        let tower = cert.build_tower()?;
        let omega = cert.omega_in(&tower)?;
        let u = u_table(&omega, kmax);
        Ok(Evaluated { params: tower.params, tower, omega, truncation: cert.truncation, u })
    }

    pub fn kmax(&self) -> u64 {
        self.u.len() as u64 - 1
    }

    pub fn u(&self, k: u64) -> &LocalNum {
        &self.u[k as usize]
    }

    fn need(&self, k: u64, what: &str) -> Result<()> {
        if k > self.kmax() {
            return Err(Error::Config(format!("{what} needs u_k up to k = {k}, table stops at {}", self.kmax())));
        }
        Ok(())
    }
}

fn id_tuple(k: &IndexVector) -> String {
    let parts: Vec<String> = k.entries.iter().map(|x| x.to_string()).collect();
    parts.join(",")
}

/// val(P_k(Ω̂)) against w(k) for 1 ≤ k ≤ kmax, each with the Gauss minimum
/// of P_k at valuation p/(q−1) as detail.
pub fn theorem_a_table(ev: &Evaluated, kmax: u64) -> Result<Vec<VerdictRecord>> {
    ev.need(kmax, "the valuation table")?;
    let params = ev.params;
    let polys = pk_series(kmax, &params, ModelKind::Special)?;
    (1..=kmax)
        .into_par_iter()
        .map(|k| {
            let g = gauss_profile(&polys[k as usize], &params)?;
            let rec = VerdictRecord::valuation_eq(
                format!("thmA:k={k}"),
                format!("val_p(P_{k}(Omega)) = w({k})"),
                &ev.u(k).val(),
                &w(k, &params),
            );
            Ok(rec.with_detail(format!("gauss min {} over {} term(s)", g.min_value, g.tie_count)))
        })
        .collect()
}

/// Closed-form values for i ≤ q−1 and the powers k = p^j, j ≤ 5.
pub fn check_base_cases(ev: &Evaluated) -> Vec<VerdictRecord> {
    let Params { p, q } = ev.params;
    let mut out = Vec::new();
    for i in 1..q.min(ev.kmax() + 1) {
        let exp = Rational::new(i * p, q - 1) - Rational::from_int(val_factorial(i, p) as i64);
        out.push(VerdictRecord::valuation_eq(
            format!("lemma1.2:i={i}"),
            format!("val(u_{i}) = {i}p/(q-1) - val(({i})!)"),
            &ev.u(i).val(),
            &exp,
        ));
    }
    let mut pj = 1u64;
    for j in 0..=5u32 {
        if pj > ev.kmax() {
            break;
        }
        let exp = Rational::new(p, (q - 1) * pj);
        out.push(VerdictRecord::valuation_eq(
            format!("powers:k={pj}"),
            format!("val(u_{{p^{j}}}) = (p/(q-1)) p^-{j}"),
            &ev.u(pj).val(),
            &exp,
        ));
        pj *= p;
    }
    out
}

/// Coefficient of Z^{qn} in [p](Z)^k for 1 ≤ k ≤ q·nmax, special model.
fn mul_p_power_coeffs(params: &Params, nmax: u64) -> Result<Vec<Vec<Rational>>> {
    let q = params.q;
    let cap = (q * nmax + 1) as usize;
    let mp = mul_p(&LTModel::new(ModelKind::Special, *params, cap.max(2)))?;
    // table[n][k] = [Z^{qn}] [p]^k
    let mut table = vec![vec![Rational::zero(); cap]; nmax as usize + 1];
    let mut pw = mp.clone();
    for k in 1..cap {
        for (n, row) in table.iter_mut().enumerate().skip(1) {
            row[k] = pw.coeff(q as usize * n).clone();
        }
        pw = pw.mul(&mp);
    }
    Ok(table)
}

/// Congruences between the u_k at Ω̂ for indices up to kmax.
pub fn check_congruences_s3(ev: &Evaluated, kmax: u64) -> Result<Vec<VerdictRecord>> {
    ev.need(kmax, "the congruence checks")?;
    let Params { p, q } = ev.params;
    let one = Rational::one();
    let inv_p = Rational::new(1, p);
    let mut out = Vec::new();

    // coefficient of Z^{pj} on both sides of Σ u_m Z^{qm} ≡ Σ u_k^p Z^{kp}
    out.extend((1..=kmax).into_par_iter().map(|j| {
        let lhs = ev.u(j).pow(p);
        if j % p == 0 {
            VerdictRecord::valuation_gt(
                format!("prop3.1:j={j}"),
                format!("u_{j}^p = u_{} mod p*m", j / p),
                &lhs.sub(ev.u(j / p)).val(),
                &one,
            )
        } else {
            VerdictRecord::valuation_gt(format!("prop3.1:j={j}"), format!("u_{j}^p = 0 mod p*m"), &lhs.val(), &one)
        }
    }).collect::<Vec<_>>());

    for k in (1..=kmax).filter(|k| k % p != 0) {
        out.push(VerdictRecord::valuation_gt(
            format!("cor3.2:k={k}"),
            format!("val(u_{k}) > 1/p"),
            &ev.u(k).val(),
            &inv_p,
        ));
    }

    for m in 1..=kmax / p {
        let d = ev.u(p * m).pow(p).sub(ev.u(m));
        out.push(VerdictRecord::valuation_gt(
            format!("cor3.3:m={m}"),
            format!("u_{}^p = u_{m} mod p*m", p * m),
            &d.val(),
            &one,
        ));
    }

    for m in 1..=kmax / p {
        let vm = ev.u(m).val();
        let vpm = ev.u(p * m).val();
        let id = format!("cor3.4:m={m}");
        let rec = match vm.finite() {
            Some(v) if *v <= one => {
                let exp = v * &inv_p;
                VerdictRecord::valuation_eq(id, format!("val(u_{}) = val(u_{m})/p", p * m), &vpm, &exp)
            }
            _ => match vm.gt(&one) {
                Some(true) => VerdictRecord::valuation_gt(id, format!("val(u_{m}) > 1 => val(u_{}) > 1/p", p * m), &vpm, &inv_p),
                _ => VerdictRecord::new(
                    id,
                    format!("val(u_{}) determined by val(u_{m})", p * m),
                    Status::InconclusivePrecision,
                    vm.to_string(),
                    "a decided val(u_m)",
                ),
            },
        };
        out.push(rec);
    }

    let nmax = kmax / q;
    if nmax >= 1 {
        let table = mul_p_power_coeffs(&ev.params, nmax)?;
        for n in 1..=nmax {
            let mut s = LocalNum::zero(&ev.tower);
            for k in 1..=q * n {
                let c = &table[n as usize][k as usize];
                if !c.is_zero() {
                    s = s.add(&ev.u(k).scale(c));
                }
            }
            out.push(VerdictRecord::valuation_ge(
                format!("cor3.6:n={n}"),
                format!("[Z^{}] G([p](Z)) = u_{n} mod p^2", q * n),
                &s.sub(ev.u(n)).val(),
                &Rational::from_int(2),
            ));
        }
    }

    for k in 2..=kmax {
        let d = ev.u(1).mul(ev.u(k - 1)).sub(&ev.u(k).scale(&Rational::from_int(k as i64)));
        out.push(VerdictRecord::valuation_ge(
            format!("cor3.8:k={k}"),
            format!("u_1 u_{} = {k} u_{k} mod p", k - 1),
            &d.val(),
            &one,
        ));
    }
    Ok(out)
}

/// ζ_{i,m} for 0 ≤ i ≤ p−1, 0 ≤ m ≤ mmax.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZetaTable {
    pub p: u64,
    /// rows[m][i]
    pub rows: Vec<Vec<Rational>>,
}

impl ZetaTable {
    pub fn get(&self, i: u64, m: u64) -> &Rational {
        &self.rows[m as usize][i as usize]
    }

    /// val_p(ζ_{p−1,m}) ≥ 1.
    pub fn top_divisible(&self, m: u64) -> bool {
        self.get(self.p - 1, m).val_p(self.p).is_none_or(|v| v >= 1)
    }
}

/// ζ_{0,m} = 0 and ζ_{i,m} = ((k−q+1)/k)(ζ_{i−1,m} + 1) with k = mp + i.
pub fn zeta_table(params: &Params, mmax: u64) -> ZetaTable {
    let Params { p, q } = *params;
    let rows = (0..=mmax)
        .map(|m| {
            let mut row = vec![Rational::zero()];
            for i in 1..p {
                let k = (m * p + i) as i64;
                let next = Rational::new(k - q as i64 + 1, k) * (&row[i as usize - 1] + &Rational::one());
                row.push(next);
            }
            row
        })
        .collect();
    ZetaTable { p, rows }
}

/// u_{mp+i} ≡ C(mp+i, i)^{-1} u_{mp} u_i + p ζ_{i,m} u_{p(m−p)+i+1} mod p²
/// for p ≤ m ≤ mmax and 0 ≤ i ≤ p−1.
pub fn check_prop39(ev: &Evaluated, mmax: u64) -> Result<Vec<VerdictRecord>> {
    let p = ev.params.p;
    ev.need(mmax * p + p - 1, "the mod p^2 recursion")?;
    let zt = zeta_table(&ev.params, mmax);
    let two = Rational::from_int(2);
    let mut out = Vec::new();
    for m in p..=mmax {
        for i in 0..p {
            let k = m * p + i;
            let c = Rational::new(1, binom(k, i));
            let z = zt.get(i, m);
            let mut rhs = ev.u(m * p).mul(ev.u(i)).scale(&c);
            if !z.is_zero() {
                let idx = p * (m - p) + i + 1;
                rhs = rhs.add(&ev.u(idx).scale(&(z * &Rational::from_int(p as i64))));
            }
            out.push(VerdictRecord::valuation_ge(
                format!("prop3.9:m={m},i={i}"),
                format!("u_{k} = C({k},{i})^-1 u_{} u_{i} + p zeta_{{{i},{m}}} u_{} mod p^2", m * p, p * (m - p) + i + 1),
                &ev.u(k).sub(&rhs).val(),
                &two,
            ));
        }
    }
    Ok(out)
}

fn val_u64(mut x: u64, p: u64) -> u32 {
    let mut v = 0;
    while x.is_multiple_of(p) {
        x /= p;
        v += 1;
    }
    v
}

/// u_𝐤 = ∏ u_{k_i}.
fn u_of(ev: &Evaluated, k: &IndexVector) -> LocalNum {
    k.entries.iter().fold(LocalNum::one(&ev.tower), |acc, &ki| acc.mul(ev.u(ki)))
}

/// [Z^{qn}] (1 + G)^p by truncated series products.
fn cn_direct(ev: &Evaluated, nmax: u64) -> Vec<LocalNum> {
    let Params { p, q } = ev.params;
    let len = (q * nmax + 1) as usize;
    let base: Vec<LocalNum> = (0..len as u64).map(|k| ev.u(k).clone()).collect();
    let mut acc = base.clone();
    for _ in 1..p {
        acc = (0..len)
            .map(|d| (0..=d).fold(LocalNum::zero(&ev.tower), |s, i| s.add(&acc[i].mul(&base[d - i]))))
            .collect();
    }
    (0..=nmax).map(|n| acc[(q * n) as usize].clone()).collect()
}

/// The orbit expansion of C_n and the inequalities that bound it, n ≤ nmax.
pub fn check_section4(ev: &Evaluated, nmax: u64) -> Result<Vec<VerdictRecord>> {
    let Params { p, q } = ev.params;
    ev.need(q * nmax, "the orbit expansion")?;
    let direct = cn_direct(ev, nmax);
    let two = Rational::from_int(2);
    let mut out = Vec::new();
    for n in 1..=nmax {
        let wn = w(n, &ev.params);
        let reps = enumerate_reps(q * n, p as usize);
        let k0 = IndexVector::new(vec![p * n; p as usize]);
        let terms: Vec<(IndexVector, u64, LocalNum)> = reps
            .into_par_iter()
            .map(|k| {
                let s = orbit_size(&k);
                let uk = u_of(ev, &k);
                (k, s, uk)
            })
            .collect();
        let orbit_sum = terms
            .iter()
            .fold(LocalNum::zero(&ev.tower), |acc, (_, s, uk)| acc.add(&uk.scale(&Rational::from_int(*s as i64))));

        let diff = orbit_sum.sub(&direct[n as usize]);
        out.push(VerdictRecord::exact(
            format!("section4:cn-agree:n={n}"),
            format!("orbit sum and series power give the same C_{n}"),
            diff.is_zero(),
            format!("val of difference {}", diff.val()),
        ));
        out.push(VerdictRecord::valuation_ge(
            format!("section4:diamond:n={n}"),
            format!("u_{n} = C_{n} mod p^2"),
            &ev.u(n).sub(&orbit_sum).val(),
            &two,
        ));
        for (k, s, uk) in &terms {
            let tag = id_tuple(k);
            let all_equal = k.entries.iter().all(|&x| x == k.entries[0]);
            let vs = val_u64(*s, p);
            if !all_equal {
                let v = vs;
                out.push(VerdictRecord::exact(
                    format!("section4:lemma4.4:n={n},k=({tag})"),
                    format!("val_p(|S_p.k|) = 1 for k = ({tag})"),
                    v == 1,
                    format!("|S_p.k| = {s}"),
                ));
            }
            if *k != k0 {
                let v = uk.val().add_const(&Rational::from_int(vs as i64));
                out.push(VerdictRecord::valuation_gt(
                    format!("section4:star:n={n},k=({tag})"),
                    format!("val(|S_p.k| u_k) > w({n}) for k = ({tag})"),
                    &v,
                    &wn,
                ));
            }
            if k.entries.iter().any(|&x| x % q != 0) {
                out.push(VerdictRecord::valuation_gt(
                    format!("section4:lemma4.5:n={n},k=({tag})"),
                    format!("val(u_k) > w({n}) - 1 for k = ({tag})"),
                    &uk.val(),
                    &(&wn - &Rational::one()),
                ));
            }
        }
        out.push(VerdictRecord::valuation_gt(
            format!("section4:starstar:n={n}"),
            format!("val(p u_{}) > w({n})", q * n),
            &ev.u(q * n).val().add_const(&Rational::one()),
            &wn,
        ));
    }
    Ok(out)
}

/// Ranges of the exact suite.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactLimits {
    pub pk_mmax: u64,
    pub w_kmax: u64,
    pub w_pairs: u64,
    pub w_subs: u64,
    pub identity_kmax: u64,
    pub functional_zcap: usize,
    pub lemma35_cap: usize,
    pub zeta_mmax: u64,
    pub lucas_mmax: u64,
}

impl Default for ExactLimits {
    fn default() -> Self {
        ExactLimits {
            pk_mmax: 200,
            w_kmax: 10_000,
            w_pairs: 2000,
            w_subs: 1500,
            identity_kmax: 200,
            functional_zcap: 20,
            lemma35_cap: 50,
            zeta_mmax: 500,
            lucas_mmax: 200,
        }
    }
}

/// P_m by the closed sum against the series coefficient, m ≤ mmax.
pub fn check_dual_path(params: &Params, mmax: u64) -> Result<CheckResult> {
    let series = pk_series(mmax, params, ModelKind::Special)?;
    let comb: Vec<bool> = (0..=mmax)
        .into_par_iter()
        .map(|m| pk_combinatorial(m, params) == series[m as usize])
        .collect();
    let mut res = CheckResult::new("prop1.1", format!("p={}, 0<=m<={mmax}", params.p));
    for (m, ok) in comb.iter().enumerate() {
        res.note(*ok, || format!("m={m}"));
    }
    Ok(res)
}

/// ζ_{p−1,m} ≡ 0 mod p for m ≤ mmax.
pub fn check_lemma310(params: &Params, mmax: u64) -> CheckResult {
    let zt = zeta_table(params, mmax);
    let mut res = CheckResult::new("lemma3.10", format!("p={}, 0<=m<={mmax}", params.p));
    for m in 0..=mmax {
        res.note(zt.top_divisible(m), || format!("m={m}: zeta = {}", zt.get(params.p - 1, m)));
    }
    res
}

/// C(mp+i, i) ≡ 1 mod p for m ≤ mmax, i ≤ p−1.
pub fn check_lucas(params: &Params, mmax: u64) -> CheckResult {
    let p = params.p;
    let mut res = CheckResult::new("lucas", format!("p={p}, 0<=m<={mmax}"));
    for m in 0..=mmax {
        for i in 0..p {
            res.note(binom_mod_p(m * p + i, i, p) == 1, || format!("m={m}, i={i}"));
        }
    }
    res
}

/// Every exact-layer statement: one record per proposition and range.
pub fn run_exact_suite(params: &Params, limits: &ExactLimits) -> Result<Vec<VerdictRecord>> {
    let mut out = vec![check_dual_path(params, limits.pk_mmax)?.to_record()];
    let props = check_w_props(params, limits.w_kmax, limits.w_pairs, limits.w_subs);
    for item in &props.items {
        out.push(VerdictRecord::exact(
            format!("prop2.1:item={}:{}", item.item, item.range),
            item.statement.clone(),
            item.pass,
            match &item.counterexample {
                Some(c) => format!("counterexample {c}"),
                None => format!("{} instances", item.instances),
            },
        ));
    }
    out.push(check_lemma35(params, limits.lemma35_cap)?.0.to_record());
    let polys = pk_series(limits.identity_kmax, params, ModelKind::Special)?;
    out.push(identity_divbyu1_on(&polys, params).to_record());
    out.push(identity_functional_eq(params, limits.functional_zcap)?.to_record());
    out.push(check_lemma310(params, limits.zeta_mmax).to_record());
    out.push(check_lucas(params, limits.lucas_mmax).to_record());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_hand_values() {
        let zt = zeta_table(&Params::new(3).unwrap(), 3);
        assert_eq!(*zt.get(0, 3), Rational::zero());
        assert_eq!(*zt.get(1, 3), Rational::new(1, 5));
        assert_eq!(*zt.get(2, 3), Rational::new(18, 55));
        assert!(zt.top_divisible(3));
    }

    #[test]
    fn lucas_and_lemma310_small() {
        for p in [2, 3, 5] {
            let params = Params::new(p).unwrap();
            assert!(check_lucas(&params, 50).pass);
            assert!(check_lemma310(&params, 50).pass);
        }
    }

    #[test]
    fn exact_suite_small_limits() {
        let limits = ExactLimits {
            pk_mmax: 20,
            w_kmax: 200,
            w_pairs: 60,
            w_subs: 40,
            identity_kmax: 20,
            functional_zcap: 10,
            lemma35_cap: 20,
            zeta_mmax: 20,
            lucas_mmax: 20,
        };
        let recs = run_exact_suite(&Params::new(2).unwrap(), &limits).unwrap();
        assert!(recs.iter().all(|r| r.status == Status::Pass), "{recs:?}");
    }
}
