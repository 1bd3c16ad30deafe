//! The two Lubin–Tate coordinates for L = Q_{p²}, π = p: the special one with
//! log = Σ Z^{q^m}/p^m and the polynomial model with [p]₀ = Z^q + pZ. Also the
//! coefficient polynomials P_m(Y) of exp(Y·log(Z)) by two independent paths.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::padic_core::{binom, factorial, inv_mod, Params, Rational};
use crate::report::CheckResult;
use crate::series::{YPoly, ZSeries};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Special,
    Polynomial,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LTModel {
    pub kind: ModelKind,
    pub params: Params,
    pub cap: usize,
}

impl LTModel {
    pub fn new(kind: ModelKind, params: Params, cap: usize) -> Self {
        LTModel { kind, params, cap }
    }

    pub fn log(&self) -> Result<ZSeries<Rational>> {
        match self.kind {
            ModelKind::Special => log_special(&self.params, self.cap),
            ModelKind::Polynomial => log_polynomial_model(&self.params, self.cap),
        }
    }

    pub fn mul_p(&self) -> Result<ZSeries<Rational>> {
        mul_p(self)
    }
}

fn need_cap(cap: usize, min: usize, what: &str) -> Result<()> {
    if cap < min {
        return Err(Error::Config(format!("{what} needs cap >= {min}, got {cap}")));
    }
    Ok(())
}

/// Z + Z^q/p + Z^{q²}/p² + … mod Z^cap.
pub fn log_special(params: &Params, cap: usize) -> Result<ZSeries<Rational>> {
    need_cap(cap, 2, "log")?;
    let mut entries = Vec::new();
    let (mut qk, mut pk) = (1usize, 1u64);
    while qk < cap {
        entries.push((qk, Rational::new(1, pk)));
        qk *= params.q as usize;
        pk *= params.p;
    }
    ZSeries::from_sparse(&Rational::zero(), cap, &entries)
}

pub fn exp_special(params: &Params, cap: usize) -> Result<ZSeries<Rational>> {
    log_special(params, cap)?.reversion()
}

/// The unique log with derivative 1 and log(pZ + Z^q) = p·log(Z). Comparing
/// Z^n coefficients gives l_n (p^n − p) = −Σ_{k<n} l_k [Z^n](pZ + Z^q)^k,
/// where [Z^{k+i(q−1)}](pZ + Z^q)^k = C(k, i) p^{k−i}.
pub fn log_polynomial_model(params: &Params, cap: usize) -> Result<ZSeries<Rational>> {
    need_cap(cap, 2, "log")?;
    let (p, q1) = (params.p, (params.q - 1) as usize);
    let pb = BigInt::from(p);
    let mut l = vec![Rational::zero(); cap];
    l[1] = Rational::one();
    for n in 2..cap {
        let mut s = Rational::zero();
        let mut i = 1;
        while i * q1 < n {
            let k = n - i * q1;
            if i <= k && !l[k].is_zero() {
                let c = binom(k as u64, i as u64) * pb.pow((k - i) as u32);
                s += &(&l[k] * &Rational::from_int(c));
            }
            i += 1;
        }
        if !s.is_zero() {
            let d = pb.pow(n as u32) - &pb;
            l[n] = -s / Rational::from_int(d);
        }
    }
    ZSeries::from_coeffs(l)
}

/// The same coefficients modulo p^digits, as rationals with a p-power
/// denominator. The exact ones carry every p^{n−1} − 1 in their denominators
/// and grow too fast for long caps.
pub fn log_polynomial_model_approx(params: &Params, cap: usize, digits: u32) -> Result<Vec<Rational>> {
    need_cap(cap, 2, "log")?;
    let (p, q1) = (params.p, (params.q - 1) as usize);
    let pb = BigInt::from(p);
    let mut depth = 0u32;
    let mut x = cap;
    while x > 1 {
        x /= params.q as usize;
        depth += 1;
    }
    // p^d·l_n is integral; the coefficient-1 term of the recursion passes a
    // division by p down the chain n → n/q, so each level can spoil a digit
    let d = depth + 1;
    let m = digits + d + depth + 2;
    let modulus = pb.pow(m);
    let mut l = vec![BigInt::zero(); cap];
    l[1] = pb.pow(d);
    for n in 2..cap {
        let mut s = BigInt::zero();
        let mut i = 1;
        while i * q1 < n {
            let k = n - i * q1;
            if i <= k && (k - i) < m as usize && !l[k].is_zero() {
                let c = binom(k as u64, i as u64) * pb.pow((k - i) as u32);
                s += &l[k] * c;
            }
            i += 1;
        }
        let s = s.mod_floor(&modulus);
        if s.is_zero() {
            continue;
        }
        if !(&s % &pb).is_zero() {
            return Err(Error::Precision(format!("log coefficient {n} has val below -{d}")));
        }
        let unit = (pb.pow(n as u32 - 1) - 1u32).mod_floor(&modulus);
        let inv = inv_mod(&unit, &modulus).expect("p^{n-1} - 1 is a unit");
        l[n] = (-(s / &pb) * inv).mod_floor(&modulus);
    }
    let den = pb.pow(d);
    Ok(l.into_iter().map(|x| Rational::new(x, den.clone())).collect())
}

/// [p](Z) in the given model, mod Z^cap.
pub fn mul_p(model: &LTModel) -> Result<ZSeries<Rational>> {
    let params = &model.params;
    need_cap(model.cap, params.q as usize + 1, "[p]")?;
    match model.kind {
        ModelKind::Polynomial => ZSeries::from_sparse(
            &Rational::zero(),
            model.cap,
            &[(1, Rational::from_int(params.p as i64)), (params.q as usize, Rational::one())],
        ),
        ModelKind::Special => {
            let log = log_special(params, model.cap)?;
            let exp = log.reversion()?;
            let plog = log.scale(&Rational::from_int(params.p as i64)).expect("rational scaling");
            exp.compose(&plog)
        }
    }
}

/// Checks that ([p] − Z^q − pZ)/p² in the special model is p-integral with
/// order ≥ 2 up to Z^cap, and returns that quotient s(Z).
pub fn check_lemma35(params: &Params, cap: usize) -> Result<(CheckResult, ZSeries<Rational>)> {
    let mp = mul_p(&LTModel::new(ModelKind::Special, *params, cap))?;
    let p = params.p as i64;
    let mut c = mp.into_coeffs();
    c[1] -= &Rational::from_int(p);
    c[params.q as usize] -= &Rational::one();
    let p2 = Rational::new(1, p * p);
    let s: Vec<Rational> = c.iter().map(|x| x * &p2).collect();
    let mut res = CheckResult::new("lemma3.5", format!("p={p}, Z^{cap}"));
    for (k, sk) in s.iter().enumerate() {
        let ok = if k < 2 { sk.is_zero() } else { sk.val_p(params.p).is_none_or(|v| v >= 0) };
        res.note(ok, || format!("Z^{k} coefficient of s is {sk}"));
    }
    Ok((res, ZSeries::from_coeffs(s)?))
}

/// P_m(Y) = Σ over m = m_0 + q m_1 + … + q^d m_d of Y^{Σ m_i} / (∏ m_i! · p^{Σ i m_i}).
pub fn pk_combinatorial(m: u64, params: &Params) -> YPoly {
    let q = params.q;
    let mut qpows = vec![1u64];
    while qpows.last().unwrap() * q <= m.max(1) {
        qpows.push(qpows.last().unwrap() * q);
    }
    let facts: Vec<BigInt> = {
        let mut v = vec![BigInt::from(1)];
        for i in 1..=m {
            let last = v.last().unwrap() * BigInt::from(i);
            v.push(last);
        }
        v
    };
    let pb = BigInt::from(params.p);
    let mut acc: BTreeMap<u32, Rational> = BTreeMap::new();
    // walk levels from the top; at level 0 the remainder is m_0
    fn rec(
        level: usize,
        rem: u64,
        ysum: u64,
        den: BigInt,
        ctx: (&[u64], &[BigInt], &BigInt),
        acc: &mut BTreeMap<u32, Rational>,
    ) {
        let (qpows, facts, pb) = ctx;
        if level == 0 {
            let d = den * &facts[rem as usize];
            let e = acc.entry((ysum + rem) as u32).or_insert_with(Rational::zero);
            *e += &Rational::new(1, d);
            return;
        }
        let step = qpows[level];
        for mi in 0..=rem / step {
            let d = &den * &facts[mi as usize] * pb.pow((level as u64 * mi) as u32);
            rec(level - 1, rem - mi * step, ysum + mi, d, ctx, acc);
        }
    }
    rec(qpows.len() - 1, m, 0, BigInt::from(1), (&qpows, &facts, &pb), &mut acc);
    acc.into_iter().fold(YPoly::zero(), |a, (j, c)| a.add(&YPoly::monomial(j, c)))
}

/// exp(Y·l(Z)) for a series l with l(0) = 0, through E' = (Y l') E:
/// n E_n = Y Σ_{k=1}^{n} k l_k E_{n−k}.
pub fn exp_y_times(log: &ZSeries<Rational>) -> Vec<YPoly> {
    let cap = log.cap();
    let mut e = vec![YPoly::one()];
    for n in 1..cap {
        let mut s = YPoly::zero();
        for k in 1..=n {
            let lk = log.coeff(k);
            if lk.is_zero() {
                continue;
            }
            s = s.add(&e[n - k].scale(&(lk * &Rational::from_int(k as i64))));
        }
        e.push(s.shift(1).scale(&Rational::new(1, n as i64)));
    }
    e
}

/// P_0 … P_mmax as coefficients of exp(Y·log). The special model multiplies
/// the factors exp(Y·Z^{q^k}/p^k); the polynomial model goes through the
/// differential recurrence with its solved log.
pub fn pk_series(mmax: u64, params: &Params, model: ModelKind) -> Result<Vec<YPoly>> {
    let cap = mmax as usize + 1;
    match model {
        ModelKind::Polynomial => {
            let log = log_polynomial_model(params, cap.max(2))?;
            let mut v = exp_y_times(&log);
            v.truncate(cap);
            Ok(v)
        }
        ModelKind::Special => {
            let zero = YPoly::zero();
            let mut acc = ZSeries::from_sparse(&zero, cap, &[(0, YPoly::one())])?;
            let (mut qk, mut k) = (1u64, 0u32);
            while qk <= mmax {
                // exp(Y Z^{q^k}/p^k) = Σ_m Y^m Z^{m q^k} / (m! p^{km})
                let mut entries = Vec::new();
                let mut m = 0u64;
                while m * qk <= mmax {
                    let den = factorial(m) * BigInt::from(params.p).pow(k * m as u32);
                    entries.push(((m * qk) as usize, YPoly::monomial(m as u32, Rational::new(1, den))));
                    m += 1;
                }
                acc = acc.mul(&ZSeries::from_sparse(&zero, cap, &entries)?);
                qk *= params.q;
                k += 1;
            }
            Ok(acc.into_coeffs())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaussProfile {
    /// (Y-exponent j, val_p(c_j) + j·p/(q−1))
    pub entries: Vec<(u32, Rational)>,
    pub min_value: Rational,
    pub tie_count: usize,
}

/// Term valuations of P at an argument of valuation p/(q−1).
pub fn gauss_profile(poly: &YPoly, params: &Params) -> Result<GaussProfile> {
    if poly.is_zero() {
        return Err(Error::Config("Gauss profile of the zero polynomial".into()));
    }
    let vo = params.val_omega();
    let entries: Vec<(u32, Rational)> = poly
        .terms()
        .map(|(j, c)| {
            let v = c.val_p(params.p).expect("stored terms are nonzero");
            (j, Rational::from_int(v) + &vo * &Rational::from_int(j as i64))
        })
        .collect();
    let min_value = entries.iter().map(|(_, v)| v).min().cloned().expect("nonempty");
    let tie_count = entries.iter().filter(|(_, v)| *v == min_value).count();
    Ok(GaussProfile { entries, min_value, tie_count })
}

/// k·P_k = Y·Σ_r p^r P_{k−q^r} for 1 ≤ k ≤ kmax, on a supplied table.
pub fn identity_divbyu1_on(polys: &[YPoly], params: &Params) -> CheckResult {
    let kmax = polys.len() as u64 - 1;
    let mut res = CheckResult::new("prop3.7", format!("p={}, 1<=k<={kmax}", params.p));
    for k in 1..=kmax {
        let lhs = polys[k as usize].scale(&Rational::from_int(k as i64));
        let mut rhs = YPoly::zero();
        let (mut qr, mut pr) = (1u64, 1i64);
        while qr <= k {
            rhs = rhs.add(&polys[(k - qr) as usize].scale(&Rational::from_int(pr)));
            qr *= params.q;
            pr *= params.p as i64;
        }
        res.note(lhs == rhs.shift(1), || format!("k={k}"));
    }
    res
}

pub fn identity_divbyu1(kmax: u64, params: &Params) -> Result<CheckResult> {
    Ok(identity_divbyu1_on(&pk_series(kmax, params, ModelKind::Special)?, params))
}

/// G([p](Z)) = (1 + G(Z))^p − 1 over YPoly, mod Z^zcap, G = Σ_{k≥1} P_k Z^k.
pub fn identity_functional_eq(params: &Params, zcap: usize) -> Result<CheckResult> {
    need_cap(zcap, params.q as usize + 1, "functional equation")?;
    let (lhs, rhs) = functional_eq_sides(params, zcap)?;
    let mut res = CheckResult::new("functional-eq", format!("p={}, Z^{zcap}", params.p));
    for k in 0..zcap {
        res.note(lhs.coeff(k) == rhs.coeff(k), || format!("Z^{k}: {} vs {}", lhs.coeff(k), rhs.coeff(k)));
    }
    Ok(res)
}

/// Both sides of the functional equation, computed by separate pipelines.
pub fn functional_eq_sides(params: &Params, zcap: usize) -> Result<(ZSeries<YPoly>, ZSeries<YPoly>)> {
    let mut pk = pk_series(zcap as u64 - 1, params, ModelKind::Special)?;
    pk[0] = YPoly::zero();
    let g = ZSeries::from_coeffs(pk)?;
    let mp = mul_p(&LTModel::new(ModelKind::Special, *params, zcap))?;
    let mp_y = ZSeries::from_coeffs(mp.coeffs().iter().map(|c| YPoly::constant(c.clone())).collect())?;
    let lhs = g.compose(&mp_y)?;
    let zero = YPoly::zero();
    let one = ZSeries::from_sparse(&zero, zcap, &[(0, YPoly::one())])?;
    let rhs = one.add(&g).pow(params.p).sub(&one);
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: i64, b: i64) -> Rational {
        Rational::new(a, b)
    }

    fn p(n: u64) -> Params {
        Params::new(n).unwrap()
    }

    #[test]
    fn special_log_and_exp() {
        let l = log_special(&p(2), 17).unwrap();
        assert_eq!(*l.coeff(4), r(1, 2));
        assert_eq!(*l.coeff(16), r(1, 4));
        assert_eq!(*l.coeff(2), r(0, 1));
        let e = exp_special(&p(2), 10).unwrap();
        assert_eq!(*e.coeff(1), r(1, 1));
        assert_eq!(*e.coeff(4), r(-1, 2));
        assert_eq!(*e.coeff(7), r(1, 1));
    }

    #[test]
    fn multiplication_by_p() {
        let poly = mul_p(&LTModel::new(ModelKind::Polynomial, p(2), 8)).unwrap();
        assert_eq!(*poly.coeff(1), r(2, 1));
        assert_eq!(*poly.coeff(4), r(1, 1));
        let sp = mul_p(&LTModel::new(ModelKind::Special, p(2), 8)).unwrap();
        assert_eq!(*sp.coeff(1), r(2, 1));
        assert_eq!(*sp.coeff(4), r(-7, 1));
    }

    #[test]
    fn lemma35_small() {
        let (res, s) = check_lemma35(&p(2), 20).unwrap();
        assert!(res.pass);
        assert_eq!(*s.coeff(4), r(-2, 1));
        assert!(check_lemma35(&p(3), 15).unwrap().0.pass);
    }

    #[test]
    fn polynomial_log() {
        let l = log_polynomial_model(&p(2), 8).unwrap();
        assert_eq!(*l.coeff(1), r(1, 1));
        assert_eq!(*l.coeff(4), r(-1, 14));
        assert_eq!(l.coeff(4).val_p(2), Some(-1));
        // l(pZ + Z^q) = p l(Z)
        let f = mul_p(&LTModel::new(ModelKind::Polynomial, p(2), 30)).unwrap();
        let l = log_polynomial_model(&p(2), 30).unwrap();
        assert_eq!(l.compose(&f).unwrap(), l.scale(&r(2, 1)).unwrap());
    }

    #[test]
    fn approximate_log_matches() {
        for pr in [p(2), p(3)] {
            let exact = log_polynomial_model(&pr, 80).unwrap();
            let approx = log_polynomial_model_approx(&pr, 80, 30).unwrap();
            for (n, a) in approx.iter().enumerate() {
                let d = a - exact.coeff(n);
                assert!(d.val_p(pr.p).is_none_or(|v| v >= 30), "n = {n}");
            }
        }
    }

    #[test]
    fn combinatorial_displays() {
        let pr = p(2);
        assert_eq!(pk_combinatorial(2, &pr).to_string(), "Y^2/2");
        assert_eq!(pk_combinatorial(4, &pr).to_string(), "Y^4/24 + Y/2");
        assert_eq!(pk_combinatorial(8, &pr).to_string(), "Y^8/40320 + Y^5/48 + Y^2/8");
        assert_eq!(pk_combinatorial(0, &pr), YPoly::one());
    }

    #[test]
    fn dual_path_small() {
        for n in [2, 3] {
            let pr = p(n);
            let s = pk_series(60, &pr, ModelKind::Special).unwrap();
            let via_ode = exp_y_times(&log_special(&pr, 61).unwrap());
            for m in 0..=60 {
                assert_eq!(s[m as usize], pk_combinatorial(m, &pr), "m={m}");
                assert_eq!(s[m as usize], via_ode[m as usize], "m={m}");
            }
            let poly = pk_series(10, &pr, ModelKind::Polynomial).unwrap();
            assert_eq!(poly[1], YPoly::y());
        }
    }

    #[test]
    fn gauss_examples() {
        let pr = p(2);
        let g2 = gauss_profile(&pk_combinatorial(2, &pr), &pr).unwrap();
        assert_eq!((g2.min_value.clone(), g2.tie_count), (r(1, 3), 1));
        let g4 = gauss_profile(&pk_combinatorial(4, &pr), &pr).unwrap();
        assert_eq!((g4.min_value.clone(), g4.tie_count), (r(-1, 3), 2));
        assert!(gauss_profile(&YPoly::zero(), &pr).is_err());
    }

    #[test]
    fn identities_small() {
        let pr = p(2);
        let t = pk_series(4, &pr, ModelKind::Special).unwrap();
        assert_eq!(t[4].scale(&r(4, 1)).to_string(), "Y^4/6 + 2*Y");
        assert!(identity_divbyu1(40, &pr).unwrap().pass);
        assert!(identity_functional_eq(&pr, 12).unwrap().pass);
        let (lhs, rhs) = functional_eq_sides(&pr, 8).unwrap();
        assert_eq!(*lhs.coeff(1), YPoly::monomial(1, r(2, 1)));
        assert_eq!(*rhs.coeff(1), YPoly::monomial(1, r(2, 1)));
    }
}
