//! Finite-precision model of the torsion field K_n = L(t_n) for the
//! polynomial model [p]₀ = Z^q + pZ.
//!
//! K_n is presented as W_f[π]/(E(π)) with π = t_n and
//! E(x) = ([p^{n−1}]₀(x))^{q−1} + p, Eisenstein of degree e = (q−1)q^{n−1}.
//! Elements carry capped relative precision: value = p^{−shift}·payload with
//! payload known modulo p^prec and normalized so that some coordinate is a
//! p-adic unit.

use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::padic_core::{val_biguint, Params, Rational, ValueV};
use crate::series::CoefficientRing;
use crate::{Error, Result};

pub const DEFAULT_BUDGET: u64 = 500_000;

/// Replayable description of the model field.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerSpec {
    pub p: u64,
    /// Unramified degree; the residue field is F_{p^f}.
    pub f: u32,
    /// Torsion level.
    pub n: u32,
    /// Target precision A at which congruences are decided.
    pub precision: u32,
    /// Working relative precision N carried by every element.
    pub working_precision: u32,
    /// Monic unramified polynomial, coefficients low to high.
    pub unramified: Vec<i64>,
    /// E(x) coefficients low to high, exact decimal integers.
    pub eisenstein: Vec<String>,
    /// The layer polynomials ψ_1 … ψ_n, for the record.
    pub psi: Vec<String>,
    pub ramification: u64,
    pub dimension: u64,
}

impl TowerSpec {
    pub fn new(p: u64, f: u32, n: u32, precision: u32, working_precision: u32) -> Result<Self> {
        let params = Params::new(p)?;
        if n == 0 || f == 0 {
            return Err(Error::Config("tower needs n >= 1 and f >= 1".into()));
        }
        if precision < 1 || working_precision < precision {
            return Err(Error::Config(format!(
                "need 1 <= A <= N, got A = {precision}, N = {working_precision}"
            )));
        }
        let q = params.q;
        let unramified = default_unramified(p, f);
        let e_poly = eisenstein_poly(p, n);
        let mut psi = vec![format!("x^{} + {p}", q - 1)];
        for j in 2..=n {
            psi.push(format!("x^{q} + {p}*x - t_{}", j - 1));
        }
        let ramification = (q - 1) * q.pow(n - 1);
        Ok(TowerSpec {
            p,
            f,
            n,
            precision,
            working_precision,
            unramified,
            eisenstein: e_poly.iter().map(|c| c.to_string()).collect(),
            psi,
            ramification,
            dimension: ramification * f as u64,
        })
    }

    pub fn params(&self) -> Params {
        Params { p: self.p, q: self.p * self.p }
    }
}

/// Monic polynomial of degree f irreducible mod p: x²+x+1 or x²+1 when
/// they work for f = 2, otherwise the first one in a fixed search order.
pub fn default_unramified(p: u64, f: u32) -> Vec<i64> {
    if f == 1 {
        return vec![0, 1];
    }
    if f == 2 {
        for cand in [[1i64, 1, 1], [1, 0, 1]] {
            if irreducible_mod_p(&cand, p) {
                return cand.to_vec();
            }
        }
    }
    let f = f as usize;
    let total = p.pow(f as u32);
    for code in 0..total {
        let mut c = Vec::with_capacity(f + 1);
        let mut x = code;
        for _ in 0..f {
            c.push((x % p) as i64);
            x /= p;
        }
        c.push(1);
        if irreducible_mod_p(&c, p) {
            return c;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

/// Irreducibility over F_p by trial division by all monic polynomials of
/// degree ≤ deg/2 (only used for tiny degrees).
fn irreducible_mod_p(c: &[i64], p: u64) -> bool {
    let deg = c.len() - 1;
    let f: Vec<u64> = c.iter().map(|x| x.rem_euclid(p as i64) as u64).collect();
    for d in 1..=deg / 2 {
        for code in 0..p.pow(d as u32) {
            let mut g = Vec::with_capacity(d + 1);
            let mut x = code;
            for _ in 0..d {
                g.push(x % p);
                x /= p;
            }
            g.push(1);
            if poly_rem_mod_p(&f, &g, p).iter().all(|x| *x == 0) {
                return false;
            }
        }
    }
    true
}

fn poly_rem_mod_p(a: &[u64], g: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    let dg = g.len() - 1;
    while r.len() > dg {
        let lead = r.pop().unwrap();
        let off = r.len() - dg;
        for i in 0..dg {
            r[off + i] = (r[off + i] + p - lead * g[i] % p) % p;
        }
    }
    r
}

/// E(x) = ([p^{n−1}]₀(x))^{q−1} + p over Z, low to high.
pub fn eisenstein_poly(p: u64, n: u32) -> Vec<BigInt> {
    let q = (p * p) as usize;
    let mut f = vec![BigInt::zero(), BigInt::one()];
    for _ in 1..n {
        let mut fq = vec![BigInt::one()];
        for _ in 0..q {
            fq = int_poly_mul(&fq, &f);
        }
        for (i, c) in f.iter().enumerate() {
            fq[i] += c * BigInt::from(p);
        }
        f = fq;
    }
    let mut e = vec![BigInt::one()];
    for _ in 0..q - 1 {
        e = int_poly_mul(&e, &f);
    }
    e[0] += BigInt::from(p);
    e
}

/// [p^k]₀(x) over Z, low to high.
pub fn iterate_mul_p(p: u64, k: u32) -> Vec<BigInt> {
    let q = (p * p) as usize;
    let mut f = vec![BigInt::zero(), BigInt::one()];
    for _ in 0..k {
        let mut fq = vec![BigInt::one()];
        for _ in 0..q {
            fq = int_poly_mul(&fq, &f);
        }
        for (i, c) in f.iter().enumerate() {
            fq[i] += c * BigInt::from(p);
        }
        f = fq;
    }
    f
}

fn int_poly_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut r = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !y.is_zero() {
                r[i + j] += x * y;
            }
        }
    }
    r
}

/// Materialized reduction data for a TowerSpec.
pub struct Tower {
    pub spec: TowerSpec,
    pub params: Params,
    pub e: usize,
    pub f: usize,
    pub dim: usize,
    pub prec: u32,
    pows: Vec<BigUint>,
    /// ω^f = −Σ g_k ω^k
    g: Vec<i64>,
    /// E_0 … E_{e−1} mod p^N, and the nonzero ones
    e_low: Vec<BigUint>,
    e_nz: Vec<(usize, BigUint)>,
    /// rev(E)^{−1} mod x^{e−1}, coefficients mod p^N
    e_rev_inv: Vec<BigUint>,
}

impl fmt::Debug for Tower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tower(p={}, f={}, n={}, N={})", self.params.p, self.f, self.spec.n, self.prec)
    }
}

impl Tower {
    pub fn build(spec: &TowerSpec) -> Result<Arc<Tower>> {
        Tower::build_with_budget(spec, DEFAULT_BUDGET)
    }

    pub fn build_with_budget(spec: &TowerSpec, budget: u64) -> Result<Arc<Tower>> {
        let fresh = TowerSpec::new(spec.p, spec.f, spec.n, spec.precision, spec.working_precision)?;
        if fresh.eisenstein != spec.eisenstein || fresh.ramification != spec.ramification {
            return Err(Error::Config("tower spec does not match its defining data".into()));
        }
        if spec.unramified.len() != spec.f as usize + 1
            || spec.unramified.last() != Some(&1)
            || (spec.f > 1 && !irreducible_mod_p(&spec.unramified, spec.p))
        {
            return Err(Error::Config("unramified polynomial must be monic irreducible of degree f".into()));
        }
        if spec.dimension > budget {
            return Err(Error::Budget(format!(
                "tower dimension {} exceeds budget {budget}",
                spec.dimension
            )));
        }
        let params = spec.params();
        let p = params.p;
        let e = spec.ramification as usize;
        let f = spec.f as usize;
        let nw = spec.working_precision;
        let pb = BigUint::from(p);
        // exact elements of positive valuation keep N digits past their valuation
        let mut pows = Vec::with_capacity(2 * nw as usize + 1);
        pows.push(BigUint::one());
        for i in 0..2 * nw as usize {
            let x = &pows[i] * &pb;
            pows.push(x);
        }
        let modulus = pows[nw as usize].clone();
        let mb = BigInt::from_biguint(Sign::Plus, modulus.clone());
        let e_full: Vec<BigInt> = spec.eisenstein.iter().map(|s| s.parse().expect("checked above")).collect();
        for (i, c) in e_full.iter().enumerate().take(e) {
            let ok = if i == 0 { c == &BigInt::from(p) } else { c.is_multiple_of(&BigInt::from(p)) };
            if !ok {
                return Err(Error::Config("E is not Eisenstein".into()));
            }
        }
        let e_low: Vec<BigUint> = e_full[..e].iter().map(|c| c.mod_floor(&mb).to_biguint().unwrap()).collect();
        let e_nz: Vec<(usize, BigUint)> =
            e_low.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| (i, c.clone())).collect();
        // rev(E) = 1 + Σ_{i<e} E_i x^{e−i}; its inverse mod x^{e−1}
        let len = e.saturating_sub(1);
        let mut inv = vec![BigUint::zero(); len];
        if len > 0 {
            inv[0] = BigUint::one();
        }
        for m in 1..len {
            // inv_m = −Σ_{i≥1} rev_i inv_{m−i}
            let mut s = BigUint::zero();
            for (ei, c) in &e_nz {
                let r = e - ei;
                if r <= m {
                    s += c * &inv[m - r];
                }
            }
            let s = s % &modulus;
            inv[m] = if s.is_zero() { s } else { &modulus - s };
        }
        Ok(Arc::new(Tower {
            spec: spec.clone(),
            params,
            e,
            f,
            dim: e * f,
            prec: nw,
            pows,
            g: spec.unramified[..f].to_vec(),
            e_low,
            e_nz,
            e_rev_inv: inv,
        }))
    }

    pub fn p(&self) -> u64 {
        self.params.p
    }

    /// Largest payload precision, in units of 1/e.
    pub fn cap(&self) -> i64 {
        self.prec as i64 * self.e as i64
    }

    fn big_modulus(&self) -> BigInt {
        to_bigint(&self.pows[self.prec as usize])
    }

    pub fn pow_p(&self, k: u32) -> &BigUint {
        &self.pows[k as usize]
    }

    fn reduce(&self, x: BigUint, k: u32) -> BigUint {
        if self.params.p == 2 {
            if x.bits() <= k as u64 {
                x
            } else {
                x & (&self.pows[k as usize] - 1u32)
            }
        } else if x < self.pows[k as usize] {
            x
        } else {
            x % &self.pows[k as usize]
        }
    }

    fn reduce_signed(&self, x: &BigInt, k: u32) -> BigUint {
        let m = BigInt::from_biguint(Sign::Plus, self.pows[k as usize].clone());
        x.mod_floor(&m).to_biguint().expect("non-negative")
    }

    /// Product of two payload vectors modulo p^k, reduced by ω and E.
    fn mul_payload(&self, a: &[BigUint], b: &[BigUint], k: u32) -> Vec<BigUint> {
        let (e, f) = (self.e, self.f);
        let mbits = self.pows[k as usize].bits() as usize;
        let w = 2 * mbits + (usize::BITS - self.dim.leading_zeros()) as usize + 2;
        let stride = 2 * f - 1;
        let slots = |v: &[BigUint]| -> Vec<(usize, BigUint)> {
            v.iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                // operands may carry more digits than the product keeps
                .map(|(idx, c)| ((idx / f) * stride + idx % f, self.reduce(c.clone(), k)))
                .collect()
        };
        let nslots = (2 * e - 1) * stride;
        let prod = pack(&slots(a), w, nslots) * pack(&slots(b), w, nslots);
        let raw = unpack(&prod, w, nslots);
        // ω reduction, per π-degree
        let mut c: Vec<BigUint> = Vec::with_capacity((2 * e - 1) * f);
        for i in 0..2 * e - 1 {
            let row = &raw[i * stride..(i + 1) * stride];
            if f == 1 {
                c.push(self.reduce(row[0].clone(), k));
                continue;
            }
            let mut s: Vec<BigInt> = row.iter().map(|x| BigInt::from_biguint(Sign::Plus, x.clone())).collect();
            for j in (f..stride).rev() {
                let top = std::mem::take(&mut s[j]);
                if top.is_zero() {
                    continue;
                }
                for (kk, gk) in self.g.iter().enumerate() {
                    if *gk != 0 {
                        s[j - f + kk] -= &top * BigInt::from(*gk);
                    }
                }
            }
            for x in s.iter().take(f) {
                c.push(self.reduce_signed(x, k));
            }
        }
        self.reduce_e(c, k)
    }

    /// Reduces a payload of π-degree ≤ 2e−2 modulo E, via the reversed
    /// quotient rev(Q) = rev(c_hi)·rev(E)^{−1} mod x^{e−1}.
    fn reduce_e(&self, mut c: Vec<BigUint>, k: u32) -> Vec<BigUint> {
        let (e, f) = (self.e, self.f);
        let hi = &c[e * f..];
        if hi.iter().all(|x| x.is_zero()) {
            c.truncate(e * f);
            return c;
        }
        let mbits = self.pows[k as usize].bits() as usize;
        let w = 2 * mbits + (usize::BITS - self.dim.leading_zeros()) as usize + 2;
        let len = e - 1;
        // rev(c_hi)_m = c_{2e−2−m}
        let mut rs = Vec::new();
        for m in 0..len {
            let src = 2 * e - 2 - m;
            for j in 0..f {
                let x = &c[src * f + j];
                if !x.is_zero() {
                    rs.push((m * f + j, x.clone()));
                }
            }
        }
        let inv_slots: Vec<(usize, BigUint)> = self
            .e_rev_inv
            .iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
            .map(|(m, x)| (m * f, self.reduce(x.clone(), k)))
            .collect();
        let qrev = unpack(&(pack(&rs, w, 2 * len * f) * pack(&inv_slots, w, 2 * len * f)), w, len * f);
        // Q_m = qrev_{e−2−m}
        let mut qs = Vec::new();
        for m in 0..len {
            for j in 0..f {
                let x = self.reduce(qrev[(len - 1 - m) * f + j].clone(), k);
                if !x.is_zero() {
                    qs.push((m * f + j, x));
                }
            }
        }
        let es: Vec<(usize, BigUint)> =
            self.e_nz.iter().map(|(i, x)| (i * f, self.reduce(x.clone(), k))).collect();
        let prod = unpack(&(pack(&qs, w, 2 * e * f) * pack(&es, w, 2 * e * f)), w, e * f);
        let m = &self.pows[k as usize];
        c.truncate(e * f);
        for (ci, pi) in c.iter_mut().zip(prod) {
            let pi = self.reduce(pi, k);
            let cur = std::mem::take(ci);
            *ci = if cur >= pi { cur - pi } else { cur + m - pi };
        }
        c
    }

    /// Multiplies W_f elements modulo p^k.
    pub fn wf_mul(&self, a: &[BigUint], b: &[BigUint], k: u32) -> Vec<BigUint> {
        let f = self.f;
        let mut s = vec![BigInt::zero(); 2 * f - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                s[i + j] += BigInt::from_biguint(Sign::Plus, x * y);
            }
        }
        for j in (f..2 * f - 1).rev() {
            let top = std::mem::take(&mut s[j]);
            for (kk, gk) in self.g.iter().enumerate() {
                s[j - f + kk] -= &top * BigInt::from(*gk);
            }
        }
        s.iter().take(f).map(|x| self.reduce_signed(x, k)).collect()
    }

    pub fn wf_pow(&self, a: &[BigUint], mut n: u64, k: u32) -> Vec<BigUint> {
        let mut acc = vec![BigUint::zero(); self.f];
        acc[0] = BigUint::one();
        let mut base = a.to_vec();
        while n > 0 {
            if n & 1 == 1 {
                acc = self.wf_mul(&acc, &base, k);
            }
            n >>= 1;
            if n > 0 {
                base = self.wf_mul(&base, &base, k);
            }
        }
        acc
    }

    fn wf_is_unit(&self, a: &[BigUint]) -> bool {
        let pb = BigUint::from(self.params.p);
        a.iter().any(|x| !(x % &pb).is_zero())
    }

    /// Inverse of a W_f unit modulo p^k: brute force mod p, then Newton.
    pub fn wf_inv(&self, a: &[BigUint], k: u32) -> Option<Vec<BigUint>> {
        if !self.wf_is_unit(a) {
            return None;
        }
        let p = self.params.p;
        let f = self.f;
        let a1: Vec<BigUint> = a.iter().map(|x| x % p).collect();
        let mut y = None;
        for code in 1..p.pow(f as u32) {
            let mut cand = Vec::with_capacity(f);
            let mut x = code;
            for _ in 0..f {
                cand.push(BigUint::from(x % p));
                x /= p;
            }
            let t = self.wf_mul(&a1, &cand, 1);
            if t[0].is_one() && t[1..].iter().all(|x| x.is_zero()) {
                y = Some(cand);
                break;
            }
        }
        let mut y = y?;
        let mut have = 1u32;
        while have < k {
            have = (2 * have).min(k);
            let ay = self.wf_mul(a, &y, have);
            let mut corr: Vec<BigUint> = ay.iter().map(|x| self.reduce_signed(&-to_bigint(x), have)).collect();
            corr[0] = self.reduce(&corr[0] + 2u32, have);
            y = self.wf_mul(&y, &corr, have);
        }
        Some(y)
    }

    /// Teichmüller lift of a residue (coordinates over the ω-basis mod p):
    /// the limit of x ↦ x^{p^f}.
    pub fn teichmuller_wf(&self, residue: &[u64]) -> Vec<BigUint> {
        let p = self.params.p;
        let mut x: Vec<BigUint> = (0..self.f).map(|j| BigUint::from(residue.get(j).copied().unwrap_or(0) % p)).collect();
        let q = p.pow(self.f as u32);
        for _ in 0..=self.prec {
            let y = self.wf_pow(&x, q, self.prec);
            if y == x {
                break;
            }
            x = y;
        }
        x
    }
}

pub fn to_bigint(x: &BigUint) -> BigInt {
    BigInt::from_biguint(Sign::Plus, x.clone())
}

fn pack(slots: &[(usize, BigUint)], w: usize, nslots: usize) -> BigUint {
    let mut limbs = vec![0u32; (nslots * w) / 32 + 3];
    for (s, x) in slots {
        let off = s * w;
        let (li, sh) = (off / 32, off % 32);
        for (k, d) in x.iter_u32_digits().enumerate() {
            let v = (d as u64) << sh;
            limbs[li + k] |= v as u32;
            limbs[li + k + 1] |= (v >> 32) as u32;
        }
    }
    BigUint::new(limbs)
}

fn unpack(x: &BigUint, w: usize, nslots: usize) -> Vec<BigUint> {
    let d = x.to_u32_digits();
    let nl = w.div_ceil(32);
    let extra = nl * 32 - w;
    (0..nslots)
        .map(|s| {
            let off = s * w;
            let (li, sh) = (off / 32, off % 32);
            if li >= d.len() {
                return BigUint::zero();
            }
            let mut out = vec![0u32; nl];
            for (k, o) in out.iter_mut().enumerate() {
                let lo = d.get(li + k).copied().unwrap_or(0) as u64;
                let hi = d.get(li + k + 1).copied().unwrap_or(0) as u64;
                *o = ((lo | (hi << 32)) >> sh) as u32;
            }
            if extra > 0 {
                out[nl - 1] &= u32::MAX >> extra;
            }
            BigUint::new(out)
        })
        .collect()
}

/// Element p^{−shift}·Σ c_{i,j} ω^j π^i of the model field.
///
/// `prec` is measured in units of 1/e: the payload is known modulo π^prec,
/// so coordinate i carries ceil((prec − i)/e) digits. A payload vanishing at
/// that precision stands for "some element of valuation ≥ prec/e − shift".
#[derive(Clone)]
pub struct LocalNum {
    tower: Arc<Tower>,
    shift: i64,
    prec: i64,
    c: Vec<BigUint>,
}

/// Equality at the common precision.
impl PartialEq for LocalNum {
    fn eq(&self, o: &Self) -> bool {
        self.sub(o).is_zero()
    }
}

impl fmt::Debug for LocalNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LocalNum(val {}, prec {}/{})", self.val(), self.prec, self.tower.e)
    }
}

/// Serialized form: sparse payload in decimal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalNumRepr {
    pub shift: i64,
    pub prec: i64,
    pub coeffs: Vec<(usize, String)>,
}

fn ceil_div(a: i64, b: i64) -> i64 {
    a.div_euclid(b) + i64::from(a.rem_euclid(b) != 0)
}

impl LocalNum {
    /// Builds and normalizes: masks each coordinate to its own precision,
    /// pulls powers of p into the shift, and canonicalizes vanishing payloads.
    fn raw(tower: &Arc<Tower>, shift: i64, prec: i64, c: Vec<BigUint>) -> LocalNum {
        let mut x = LocalNum { tower: tower.clone(), shift, prec: prec.min(tower.cap()), c };
        x.normalize();
        x
    }

    fn digits(&self) -> u32 {
        ceil_div(self.prec, self.tower.e as i64).max(0) as u32
    }

    fn normalize(&mut self) {
        let t = self.tower.clone();
        let (e, f) = (t.e as i64, t.f);
        // coordinate masks and payload valuation in units of 1/e
        let mut pv = self.prec.max(0);
        for (idx, x) in self.c.iter_mut().enumerate() {
            if x.is_zero() {
                continue;
            }
            let i = (idx / f) as i64;
            let k = ceil_div(self.prec - i, e).max(0) as u32;
            *x = t.reduce(std::mem::take(x), k);
            if !x.is_zero() {
                pv = pv.min(e * val_biguint(x, t.params.p) as i64 + i);
            }
        }
        if pv >= self.prec {
            // nothing known: keep only the bound, with prec in [0, e)
            for x in self.c.iter_mut() {
                *x = BigUint::zero();
            }
            let d = self.prec.div_euclid(e);
            self.shift -= d;
            self.prec -= d * e;
            return;
        }
        let d = pv / e;
        if d > 0 {
            let p = t.params.p;
            let m = &t.pows[d as usize];
            for x in self.c.iter_mut() {
                if !x.is_zero() {
                    *x = if p == 2 { &*x >> d } else { &*x / m };
                }
            }
            self.shift -= d;
            self.prec -= d * e;
        }
    }

    /// Valuation of the payload in units of 1/e (`None` if it vanishes).
    fn payload_val(&self) -> Option<i64> {
        let t = &self.tower;
        let (e, f) = (t.e as i64, t.f);
        let mut best: Option<i64> = None;
        for (idx, x) in self.c.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            let i = (idx / f) as i64;
            if best.is_some_and(|b| b <= i) {
                break;
            }
            let v = e * val_biguint(x, t.params.p) as i64 + i;
            if best.is_none_or(|b| v < b) {
                best = Some(v);
            }
        }
        best.filter(|v| *v < self.prec)
    }

    /// An element known only to have valuation ≥ b.
    pub fn zero_bounded(tower: &Arc<Tower>, b: i64) -> LocalNum {
        LocalNum { tower: tower.clone(), shift: -b, prec: 0, c: vec![BigUint::zero(); tower.dim] }
    }

    fn vanishing(tower: &Arc<Tower>, shift: i64, prec: i64) -> LocalNum {
        LocalNum::raw(tower, shift, prec, vec![BigUint::zero(); tower.dim])
    }

    /// Zero to the full working precision.
    pub fn zero(tower: &Arc<Tower>) -> LocalNum {
        LocalNum::zero_bounded(tower, tower.prec as i64)
    }

    pub fn one(tower: &Arc<Tower>) -> LocalNum {
        LocalNum::from_int(tower, 1)
    }

    pub fn from_int(tower: &Arc<Tower>, n: i64) -> LocalNum {
        LocalNum::from_wf(tower, 0, &[BigInt::from(n)])
    }

    pub fn from_rational(tower: &Arc<Tower>, r: &Rational) -> LocalNum {
        LocalNum::one(tower).scale(r)
    }

    /// Exact element a·π^i for a ∈ W_f given by ω-coordinates and i < e,
    /// carried at full relative precision.
    pub fn from_wf(tower: &Arc<Tower>, i: usize, a: &[BigInt]) -> LocalNum {
        assert!(i < tower.e && a.len() <= tower.f);
        let mut c = vec![BigUint::zero(); tower.dim];
        for (j, x) in a.iter().enumerate() {
            c[i * tower.f + j] = x.clone().mod_floor(&tower.big_modulus()).to_biguint().unwrap();
        }
        LocalNum::exact(tower, 0, c)
    }

    /// Exact element p^{−shift}·Σ coords (index i·f + j).
    pub fn from_coords(tower: &Arc<Tower>, shift: i64, coords: &[BigInt]) -> LocalNum {
        assert_eq!(coords.len(), tower.dim);
        let m = tower.big_modulus();
        let c = coords.iter().map(|x| x.mod_floor(&m).to_biguint().unwrap()).collect();
        LocalNum::exact(tower, shift, c)
    }

    /// Exact payloads keep N relative digits after the p-part is pulled out.
    fn exact(tower: &Arc<Tower>, shift: i64, c: Vec<BigUint>) -> LocalNum {
        let e = tower.e as i64;
        let v = c
            .iter()
            .filter(|x| !x.is_zero())
            .map(|x| val_biguint(x, tower.params.p) as i64)
            .min();
        match v {
            None => LocalNum::zero_bounded(tower, tower.prec as i64 - shift),
            Some(v) => {
                let v = v.min(tower.prec as i64 - 1);
                let mut x = LocalNum { tower: tower.clone(), shift, prec: tower.cap() + v * e, c };
                x.normalize();
                x
            }
        }
    }

    /// The uniformizer π = t_n.
    pub fn pi(tower: &Arc<Tower>) -> LocalNum {
        LocalNum::from_wf(tower, 1, &[BigInt::one()])
    }

    /// ω, the root of the unramified polynomial.
    pub fn omega(tower: &Arc<Tower>) -> LocalNum {
        if tower.f == 1 {
            return LocalNum::zero(tower);
        }
        LocalNum::from_wf(tower, 0, &[BigInt::zero(), BigInt::one()])
    }

    pub fn tower(&self) -> &Arc<Tower> {
        &self.tower
    }

    pub fn shift(&self) -> i64 {
        self.shift
    }

    /// Payload precision in units of 1/e.
    pub fn prec(&self) -> i64 {
        self.prec
    }

    /// Payload coordinates (index i·f + j).
    pub fn payload(&self) -> &[BigUint] {
        &self.c
    }

    /// True when the payload vanishes at its precision.
    pub fn is_zero(&self) -> bool {
        self.payload_val().is_none()
    }

    /// Valuation below which the element is known: prec/e − shift.
    pub fn abs_precision(&self) -> Rational {
        Rational::new(self.prec, self.tower.e as i64) - Rational::from_int(self.shift)
    }

    pub fn zero_like(&self) -> LocalNum {
        LocalNum::zero(&self.tower)
    }

    pub fn one_like(&self) -> LocalNum {
        LocalNum::one(&self.tower)
    }

    pub fn add(&self, o: &LocalNum) -> LocalNum {
        let t = &self.tower;
        let e = t.e as i64;
        let s = self.shift.max(o.shift);
        let da = s - self.shift;
        let db = s - o.shift;
        let prec = (self.prec + da * e).min(o.prec + db * e).min(t.cap());
        let k = ceil_div(prec, e).max(0);
        let mut c: Vec<BigUint> = vec![BigUint::zero(); t.dim];
        for (src, d) in [(&self.c, da), (&o.c, db)] {
            if d >= k {
                continue;
            }
            let m = &t.pows[d as usize];
            for (ci, x) in c.iter_mut().zip(src.iter()) {
                if !x.is_zero() {
                    if d == 0 {
                        *ci += x;
                    } else {
                        *ci += x * m;
                    }
                }
            }
        }
        LocalNum::raw(t, s, prec, c)
    }

    pub fn neg(&self) -> LocalNum {
        let k = self.digits();
        let m = &self.tower.pows[k as usize];
        let c = self.c.iter().map(|x| if x.is_zero() { x.clone() } else { m - x }).collect();
        LocalNum::raw(&self.tower, self.shift, self.prec, c)
    }

    pub fn sub(&self, o: &LocalNum) -> LocalNum {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &LocalNum) -> LocalNum {
        let t = &self.tower;
        let shift = self.shift + o.shift;
        let (va, vb) = (self.payload_val(), o.payload_val());
        // the error of each factor times the other's payload
        let ea = self.prec + vb.unwrap_or(o.prec);
        let eb = o.prec + va.unwrap_or(self.prec);
        let prec = ea.min(eb).min(t.cap());
        if va.is_none() || vb.is_none() {
            return LocalNum::vanishing(t, shift, prec);
        }
        let k = ceil_div(prec, t.e as i64).max(0) as u32;
        let c = t.mul_payload(&self.c, &o.c, k);
        LocalNum::raw(t, shift, prec, c)
    }

    pub fn square(&self) -> LocalNum {
        self.mul(self)
    }

    pub fn pow(&self, mut n: u64) -> LocalNum {
        let mut acc = self.one_like();
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.square();
            }
        }
        acc
    }

    /// Multiplication by π, cheaper than a general product.
    pub fn mul_pi(&self) -> LocalNum {
        let t = &self.tower;
        let (e, f) = (t.e, t.f);
        let prec = (self.prec + 1).min(t.cap());
        if self.is_zero() {
            return LocalNum::vanishing(t, self.shift, prec);
        }
        let k = ceil_div(prec, e as i64).max(0) as u32;
        let mut c = vec![BigUint::zero(); t.dim];
        c[f..].clone_from_slice(&self.c[..(e - 1) * f]);
        let top = &self.c[(e - 1) * f..];
        if top.iter().any(|x| !x.is_zero()) {
            // π^e = −Σ E_i π^i
            let m = &t.pows[k as usize];
            for (i, ev) in &t.e_nz {
                for (j, tj) in top.iter().enumerate() {
                    if tj.is_zero() {
                        continue;
                    }
                    let prod = t.reduce(ev * tj, k);
                    let cur = t.reduce(std::mem::take(&mut c[i * f + j]), k);
                    c[i * f + j] = if cur >= prod { cur - prod } else { cur + m - prod };
                }
            }
        }
        LocalNum::raw(t, self.shift, prec, c)
    }

    /// Multiplication by a rational: the p-part moves the shift, the unit
    /// part multiplies the payload.
    pub fn scale(&self, r: &Rational) -> LocalNum {
        let t = &self.tower;
        if r.is_zero() {
            return LocalNum::zero(t);
        }
        let (v, a, b) = r.split_p(t.params.p);
        if self.is_zero() {
            return LocalNum::vanishing(t, self.shift - v, self.prec);
        }
        let k = self.digits();
        let m = BigInt::from_biguint(Sign::Plus, t.pows[k as usize].clone());
        let binv = crate::padic_core::inv_mod(&b.mod_floor(&m), &m).expect("b is prime to p");
        let u = (a * binv).mod_floor(&m).to_biguint().unwrap();
        let c = if u.is_one() {
            self.c.clone()
        } else {
            self.c.iter().map(|x| t.reduce(x * &u, k)).collect()
        };
        LocalNum { tower: t.clone(), shift: self.shift - v, prec: self.prec, c }
    }

    /// Multiplies by p^k (k may be negative).
    pub fn mul_p_pow(&self, k: i64) -> LocalNum {
        let mut r = self.clone();
        r.shift -= k;
        r
    }

    /// Multiplies by an element of W_f given as ω-coordinates.
    pub fn mul_wf(&self, a: &[BigInt]) -> LocalNum {
        self.mul(&LocalNum::from_wf(&self.tower, 0, a))
    }

    /// Exact valuation when the payload is nonzero at its precision,
    /// otherwise the bound it is known to satisfy.
    pub fn val(&self) -> ValueV {
        match self.payload_val() {
            Some(v) => ValueV::Finite(Rational::new(v, self.tower.e as i64) - Rational::from_int(self.shift)),
            None => ValueV::BoundedBelow(self.abs_precision()),
        }
    }

    /// Multiplicative inverse of a nonzero element, by Newton iteration from
    /// the leading term.
    pub fn inv(&self) -> Option<LocalNum> {
        let pv = self.payload_val()?;
        let t = &self.tower;
        let f = t.f;
        let lead = pv as usize % t.e;
        let ci = t.wf_inv(&self.c[lead * f..(lead + 1) * f], 1)?;
        let ci: Vec<BigInt> = ci.iter().map(to_bigint).collect();
        let mut y = LocalNum::from_wf(t, 0, &ci).mul(&pi_inverse(t).pow(lead as u64)).mul_p_pow(self.shift);
        let two = LocalNum::from_int(t, 2);
        for _ in 0..64 {
            let r = self.mul(&y);
            if r.sub(&self.one_like()).is_zero() {
                return Some(y);
            }
            y = y.mul(&two.sub(&r));
        }
        Some(y)
    }

    pub fn to_repr(&self) -> LocalNumRepr {
        LocalNumRepr {
            shift: self.shift,
            prec: self.prec,
            coeffs: self
                .c
                .iter()
                .enumerate()
                .filter(|(_, x)| !x.is_zero())
                .map(|(i, x)| (i, x.to_string()))
                .collect(),
        }
    }

    pub fn from_repr(tower: &Arc<Tower>, r: &LocalNumRepr) -> Result<LocalNum> {
        if r.prec > tower.cap() || r.prec < 0 {
            return Err(Error::Parse("element precision out of range".into()));
        }
        let mut c = vec![BigUint::zero(); tower.dim];
        for (i, s) in &r.coeffs {
            let x: BigUint = s.parse().map_err(|_| Error::Parse(format!("bad coordinate {s:?}")))?;
            if *i >= tower.dim {
                return Err(Error::Parse(format!("coordinate {i} out of range")));
            }
            c[*i] = x;
        }
        let x = LocalNum { tower: tower.clone(), shift: r.shift, prec: r.prec, c };
        let mut n = x.clone();
        n.normalize();
        if n.shift != x.shift || n.prec != x.prec || n.c != x.c {
            return Err(Error::Parse("element is not in normal form".into()));
        }
        Ok(x)
    }

    /// Coordinates of an integral element modulo p^digits, or `None` when
    /// the element is not integral or not known to that many digits.
    pub fn integral_coords(&self, digits: u32) -> Option<Vec<BigUint>> {
        let t = &self.tower;
        let e = t.e as i64;
        if self.shift > 0 && !self.is_zero() {
            return None;
        }
        let lift = (-self.shift).max(0);
        let m = &t.pows.get(digits as usize)?.clone();
        let mut out = vec![BigUint::zero(); t.dim];
        if self.is_zero() {
            return (self.abs_precision() >= Rational::from_int(digits)).then_some(out);
        }
        for (idx, x) in self.c.iter().enumerate() {
            let i = (idx / t.f) as i64;
            if ceil_div(self.prec - i, e) + lift < digits as i64 {
                return None;
            }
            if lift >= digits as i64 || x.is_zero() {
                continue;
            }
            out[idx] = (x * &t.pows[lift as usize]) % m;
        }
        Some(out)
    }

    /// The W_f coordinates of the π^i coefficient of the payload.
    pub fn coeff_wf(&self, i: usize) -> Vec<BigUint> {
        let f = self.tower.f;
        self.c[i * f..(i + 1) * f].to_vec()
    }
}

/// π^{−1} = −(π^{e−1} + E_{e−1}π^{e−2} + … + E_1)/E_0 with E_0 = p.
pub fn pi_inverse(t: &Arc<Tower>) -> LocalNum {
    let (e, f) = (t.e, t.f);
    let mut c = vec![BigUint::zero(); t.dim];
    c[(e - 1) * f] = BigUint::one();
    for i in 1..e {
        c[(i - 1) * f] = t.e_low[i].clone();
    }
    LocalNum::exact(t, 0, c).scale(&Rational::new(-1, t.params.p as i64))
}

/// Valuation of a ring element.
pub fn ring_val(a: &LocalNum) -> ValueV {
    a.val()
}

/// Teichmüller lift in W_f ⊂ K_n of a residue given by ω-coordinates mod p.
pub fn teichmuller(tower: &Arc<Tower>, residue: &[u64]) -> LocalNum {
    let w = tower.teichmuller_wf(residue);
    let w: Vec<BigInt> = w.into_iter().map(|x| BigInt::from_biguint(Sign::Plus, x)).collect();
    LocalNum::from_wf(tower, 0, &w)
}

/// π_K = t_n together with e_K, after checking val(π^{e_K}) = 1.
pub fn uniformizer_find(tower: &Arc<Tower>) -> Result<(LocalNum, u64)> {
    let pi = LocalNum::pi(tower);
    let ek = tower.e as u64;
    if pi.pow(ek).val() != ValueV::Finite(Rational::one()) {
        return Err(Error::Config("π^e does not have valuation 1".into()));
    }
    Ok((pi, ek))
}

/// t_1 … t_n with t_j = [p^{n−j}]₀(t_n).
pub fn torsion_points(tower: &Arc<Tower>) -> Vec<LocalNum> {
    let n = tower.spec.n as usize;
    let q = tower.params.q;
    let p = tower.params.p as i64;
    let mut out = vec![LocalNum::pi(tower)];
    for _ in 1..n {
        let t = out.last().unwrap();
        out.push(t.pow(q).add(&t.scale(&Rational::from_int(p))));
    }
    out.reverse();
    out
}

impl CoefficientRing for LocalNum {
    fn r_zero(&self) -> Self {
        self.zero_like()
    }
    fn r_one(&self) -> Self {
        self.one_like()
    }
    fn r_add(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn r_sub(&self, o: &Self) -> Self {
        self.sub(o)
    }
    fn r_mul(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn r_neg(&self) -> Self {
        self.neg()
    }
    fn r_is_zero(&self) -> bool {
        self.is_zero()
    }
    fn r_scale(&self, c: &Rational) -> Option<Self> {
        Some(self.scale(c))
    }
    fn r_inv(&self) -> Option<Self> {
        self.inv()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tower(p: u64, n: u32, nw: u32) -> Arc<Tower> {
        Tower::build(&TowerSpec::new(p, 2, n, 3.min(nw), nw).unwrap()).unwrap()
    }

    fn r(a: i64, b: i64) -> Rational {
        Rational::new(a, b)
    }

    #[test]
    fn eisenstein_shape() {
        let e = eisenstein_poly(2, 1);
        assert_eq!(e, vec![BigInt::from(2), BigInt::zero(), BigInt::zero(), BigInt::one()]);
        let e = eisenstein_poly(2, 2);
        assert_eq!(e.len(), 13);
        let s = TowerSpec::new(2, 2, 3, 3, 10).unwrap();
        assert_eq!((s.ramification, s.dimension), (48, 96));
        assert_eq!(default_unramified(2, 2), vec![1, 1, 1]);
        assert_eq!(default_unramified(3, 2), vec![1, 0, 1]);
        assert_eq!(default_unramified(5, 2), vec![1, 1, 1]);
    }

    #[test]
    fn budget_is_enforced() {
        let s = TowerSpec::new(2, 2, 3, 3, 10).unwrap();
        assert!(matches!(Tower::build_with_budget(&s, 50), Err(Error::Budget(_))));
    }

    #[test]
    fn basic_valuations() {
        let t = tower(2, 2, 20);
        assert_eq!(LocalNum::from_int(&t, 2).val(), ValueV::Finite(r(1, 1)));
        let ts = torsion_points(&t);
        assert_eq!(ts[0].val(), ValueV::Finite(r(1, 3)));
        assert_eq!(ts[1].val(), ValueV::Finite(r(1, 12)));
        // ψ_1(t_1) = 0 and ψ_2(t_2) = t_1
        let z = ts[0].pow(3).add(&LocalNum::from_int(&t, 2));
        assert!(z.is_zero());
        let z = ts[1].pow(4).add(&ts[1].scale(&r(2, 1))).sub(&ts[0]);
        assert!(z.is_zero());
        assert_eq!(LocalNum::from_rational(&t, &r(-1, 14)).val(), ValueV::Finite(r(-1, 1)));
    }

    #[test]
    fn shift_algebra() {
        let t = tower(2, 2, 20);
        let a = LocalNum::from_rational(&t, &r(3, 2));
        let b = LocalNum::from_int(&t, 2);
        let c = a.mul(&b);
        assert_eq!(c, LocalNum::from_int(&t, 3));
        let z = a.add(&a.neg());
        assert!(z.is_zero());
        assert_eq!(z.abs_precision(), a.abs_precision());
    }

    #[test]
    fn mul_pi_matches_general_product() {
        let t = tower(2, 2, 16);
        let pi = LocalNum::pi(&t);
        let mut x = LocalNum::from_wf(&t, 11, &[BigInt::from(3), BigInt::from(5)]);
        for _ in 0..5 {
            x = x.add(&LocalNum::from_wf(&t, 0, &[BigInt::from(7)]));
            assert_eq!(x.mul_pi(), x.mul(&pi));
            x = x.mul(&pi).mul(&pi);
        }
    }

    #[test]
    fn pi_inverse_and_inv() {
        let t = tower(3, 1, 12);
        let pi = LocalNum::pi(&t);
        assert_eq!(pi.mul(&pi_inverse(&t)), LocalNum::one(&t));
        let x = pi.pow(3).add(&LocalNum::from_int(&t, 5)).mul(&pi);
        let y = x.inv().unwrap();
        let d = x.mul(&y).sub(&LocalNum::one(&t));
        assert!(d.is_zero() && d.abs_precision() >= r(10, 1), "{d:?}");
    }

    #[test]
    fn teichmuller_lifts() {
        let t = tower(2, 1, 30);
        let w = teichmuller(&t, &[0, 1]);
        assert_eq!(w, LocalNum::omega(&t));
        assert_eq!(w.pow(3), LocalNum::one(&t));
        assert_eq!(teichmuller(&t, &[1]), LocalNum::one(&t));
        let t3 = tower(3, 1, 20);
        let x = teichmuller(&t3, &[1, 1]);
        assert_eq!(x.pow(8), LocalNum::one(&t3));
    }

    #[test]
    fn uniformizer() {
        let t = tower(2, 2, 12);
        let (pi, ek) = uniformizer_find(&t).unwrap();
        assert_eq!(ek, 12);
        assert_eq!(pi.val(), ValueV::Finite(r(1, 12)));
    }

    #[test]
    fn repr_roundtrip() {
        let t = tower(2, 2, 24);
        let x = LocalNum::pi(&t).pow(7).add(&LocalNum::from_rational(&t, &r(5, 8)));
        let y = LocalNum::from_repr(&t, &x.to_repr()).unwrap();
        assert_eq!(x, y);
    }
}
