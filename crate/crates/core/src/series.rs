//! Dense truncated power series in Z over an abstract coefficient ring, and
//! sparse polynomials in the formal variable Y.

use std::collections::BTreeMap;
use std::fmt;

use crate::local_model::LocalNum;
use crate::padic_core::Rational;
use crate::{Error, Result};

/// The ring operations the series engine needs. Constants are produced from
/// an existing element so that context-carrying rings (the local model) work.
pub trait CoefficientRing: Clone + fmt::Debug {
    fn r_zero(&self) -> Self;
    fn r_one(&self) -> Self;
    fn r_add(&self, o: &Self) -> Self;
    fn r_sub(&self, o: &Self) -> Self;
    fn r_mul(&self, o: &Self) -> Self;
    fn r_neg(&self) -> Self;
    fn r_is_zero(&self) -> bool;
    /// Multiplication by a rational scalar, when the ring admits it.
    fn r_scale(&self, c: &Rational) -> Option<Self>;
    /// Multiplicative inverse, when it exists.
    fn r_inv(&self) -> Option<Self>;
}

impl CoefficientRing for Rational {
    fn r_zero(&self) -> Self {
        Rational::zero()
    }
    fn r_one(&self) -> Self {
        Rational::one()
    }
    fn r_add(&self, o: &Self) -> Self {
        self + o
    }
    fn r_sub(&self, o: &Self) -> Self {
        self - o
    }
    fn r_mul(&self, o: &Self) -> Self {
        self * o
    }
    fn r_neg(&self) -> Self {
        -self
    }
    fn r_is_zero(&self) -> bool {
        self.is_zero()
    }
    fn r_scale(&self, c: &Rational) -> Option<Self> {
        Some(self * c)
    }
    fn r_inv(&self) -> Option<Self> {
        (!self.is_zero()).then(|| self.recip())
    }
}

/// Polynomial in Y with rational coefficients, stored sparsely.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct YPoly {
    terms: BTreeMap<u32, Rational>,
}

impl YPoly {
    pub fn zero() -> Self {
        YPoly::default()
    }

    pub fn constant(c: Rational) -> Self {
        YPoly::monomial(0, c)
    }

    pub fn one() -> Self {
        YPoly::constant(Rational::one())
    }

    /// c·Y^j
    pub fn monomial(j: u32, c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(j, c);
        }
        YPoly { terms }
    }

    pub fn y() -> Self {
        YPoly::monomial(1, Rational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, j: u32) -> Rational {
        self.terms.get(&j).cloned().unwrap_or_else(Rational::zero)
    }

    /// Nonzero terms in increasing exponent order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (u32, &Rational)> {
        self.terms.iter().map(|(j, c)| (*j, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().copied()
    }

    fn add_term(&mut self, j: u32, c: &Rational) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(j).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&j);
        }
    }

    pub fn add(&self, o: &YPoly) -> YPoly {
        let mut r = self.clone();
        for (j, c) in o.terms() {
            r.add_term(j, c);
        }
        r
    }

    pub fn sub(&self, o: &YPoly) -> YPoly {
        let mut r = self.clone();
        for (j, c) in o.terms() {
            r.add_term(j, &-c);
        }
        r
    }

    pub fn mul(&self, o: &YPoly) -> YPoly {
        let mut r = YPoly::zero();
        for (i, a) in self.terms() {
            for (j, b) in o.terms() {
                r.add_term(i + j, &(a * b));
            }
        }
        r
    }

    pub fn scale(&self, c: &Rational) -> YPoly {
        if c.is_zero() {
            return YPoly::zero();
        }
        YPoly { terms: self.terms.iter().map(|(j, a)| (*j, a * c)).collect() }
    }

    /// Multiplies by Y^s.
    pub fn shift(&self, s: u32) -> YPoly {
        YPoly { terms: self.terms.iter().map(|(j, a)| (j + s, a.clone())).collect() }
    }

    pub fn eval_rational(&self, y: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for (j, c) in self.terms() {
            acc += &(c * &y.pow(j as i32));
        }
        acc
    }

    /// Horner evaluation in the local model ring.
    pub fn eval_local(&self, x: &LocalNum) -> LocalNum {
        ypoly_eval(self, x)
    }
}

/// Horner evaluation of a YPoly at a local-model element, walking exponents
/// from the top and multiplying by x^gap between consecutive terms.
pub fn ypoly_eval(poly: &YPoly, x: &LocalNum) -> LocalNum {
    let mut cache: BTreeMap<u32, LocalNum> = BTreeMap::new();
    let mut power = |g: u32| -> LocalNum {
        cache.entry(g).or_insert_with(|| x.pow(g as u64)).clone()
    };
    let mut it = poly.terms().rev();
    let Some((mut top, c)) = it.next() else {
        return x.zero_like();
    };
    let mut acc = x.one_like().scale(c);
    for (j, c) in it {
        acc = acc.mul(&power(top - j)).add(&x.one_like().scale(c));
        top = j;
    }
    if top > 0 {
        acc = acc.mul(&power(top));
    }
    acc
}

impl fmt::Display for YPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (j, c) in self.terms.iter().rev() {
            let neg = c.numer() < &num_bigint::BigInt::from(0);
            let a = c.numer().magnitude().clone();
            let b = c.denom().clone();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let mono = match j {
                0 => String::new(),
                1 => "Y".to_string(),
                _ => format!("Y^{j}"),
            };
            let one = num_bigint::BigUint::from(1u32);
            match (mono.is_empty(), a == one) {
                (true, _) => write!(f, "{a}")?,
                (false, true) => write!(f, "{mono}")?,
                (false, false) => write!(f, "{a}*{mono}")?,
            }
            if b != num_bigint::BigInt::from(1) {
                write!(f, "/{b}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for YPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl CoefficientRing for YPoly {
    fn r_zero(&self) -> Self {
        YPoly::zero()
    }
    fn r_one(&self) -> Self {
        YPoly::one()
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
        self.scale(&-Rational::one())
    }
    fn r_is_zero(&self) -> bool {
        self.is_zero()
    }
    fn r_scale(&self, c: &Rational) -> Option<Self> {
        Some(self.scale(c))
    }
    fn r_inv(&self) -> Option<Self> {
        match (self.num_terms(), self.terms.get(&0)) {
            (1, Some(c)) if !c.is_zero() => Some(YPoly::constant(c.recip())),
            _ => None,
        }
    }
}

/// Power series c_0 + c_1 Z + … known exactly modulo Z^cap.
#[derive(Clone, Debug, PartialEq)]
pub struct ZSeries<C> {
    coeffs: Vec<C>,
}

impl<C: CoefficientRing> ZSeries<C> {
    /// Builds a series from its first `cap` coefficients (cap ≥ 1).
    pub fn from_coeffs(coeffs: Vec<C>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Series("series needs cap >= 1".into()));
        }
        Ok(ZSeries { coeffs })
    }

    /// Series from a sparse list; `template` supplies ring constants.
    pub fn from_sparse(template: &C, cap: usize, entries: &[(usize, C)]) -> Result<Self> {
        let mut coeffs = vec![template.r_zero(); cap];
        for (k, c) in entries {
            if *k < cap {
                coeffs[*k] = c.clone();
            }
        }
        ZSeries::from_coeffs(coeffs)
    }

    pub fn zeros(template: &C, cap: usize) -> Result<Self> {
        ZSeries::from_coeffs(vec![template.r_zero(); cap])
    }

    /// The series Z (or 0 when cap = 1).
    pub fn var(template: &C, cap: usize) -> Result<Self> {
        let mut s = ZSeries::zeros(template, cap)?;
        if cap > 1 {
            s.coeffs[1] = template.r_one();
        }
        Ok(s)
    }

    pub fn cap(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, k: usize) -> &C {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C> {
        self.coeffs
    }

    pub fn truncate(&self, cap: usize) -> Self {
        ZSeries { coeffs: self.coeffs[..cap.min(self.cap()).max(1)].to_vec() }
    }

    pub fn add(&self, o: &Self) -> Self {
        let cap = self.cap().min(o.cap());
        ZSeries { coeffs: (0..cap).map(|k| self.coeffs[k].r_add(&o.coeffs[k])).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let cap = self.cap().min(o.cap());
        ZSeries { coeffs: (0..cap).map(|k| self.coeffs[k].r_sub(&o.coeffs[k])).collect() }
    }

    pub fn scale(&self, c: &Rational) -> Option<Self> {
        let coeffs = self.coeffs.iter().map(|x| x.r_scale(c)).collect::<Option<Vec<_>>>()?;
        Some(ZSeries { coeffs })
    }

    /// Cauchy product modulo Z^{min cap}.
    pub fn mul(&self, o: &Self) -> Self {
        let cap = self.cap().min(o.cap());
        let mut out = vec![self.coeffs[0].r_zero(); cap];
        for (i, a) in self.coeffs.iter().enumerate().take(cap) {
            if a.r_is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate().take(cap - i) {
                if b.r_is_zero() {
                    continue;
                }
                out[i + j] = out[i + j].r_add(&a.r_mul(b));
            }
        }
        ZSeries { coeffs: out }
    }

    /// f^n by repeated squaring.
    pub fn pow(&self, mut n: u64) -> Self {
        let mut base = self.clone();
        let mut acc = ZSeries::from_sparse(&self.coeffs[0], self.cap(), &[(0, self.coeffs[0].r_one())])
            .expect("cap >= 1");
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// f∘g modulo Z^{min cap}; g must have zero constant term.
    pub fn compose(&self, g: &Self) -> Result<Self> {
        if !g.coeffs[0].r_is_zero() {
            return Err(Error::Series("inner series has nonzero constant term".into()));
        }
        let cap = self.cap().min(g.cap());
        let g = g.truncate(cap);
        let mut acc = ZSeries::zeros(&self.coeffs[0], cap)?;
        for k in (0..cap).rev() {
            acc = acc.mul(&g);
            acc.coeffs[0] = acc.coeffs[0].r_add(&self.coeffs[k]);
        }
        Ok(acc)
    }

    /// Compositional inverse: g with f∘g = Z modulo Z^cap. Coefficients are
    /// fixed one degree at a time; the degree-k coefficient of g^j (j ≥ 2)
    /// only involves lower coefficients of g.
    pub fn reversion(&self) -> Result<Self> {
        let cap = self.cap();
        if !self.coeffs[0].r_is_zero() {
            return Err(Error::Series("reversion needs f(0) = 0".into()));
        }
        let zero = self.coeffs[0].r_zero();
        if cap < 2 {
            return ZSeries::from_coeffs(vec![zero]);
        }
        let f1inv = self.coeffs[1]
            .r_inv()
            .ok_or_else(|| Error::Series("linear coefficient is not invertible".into()))?;
        // pw[j][m] = [Z^m] g^j
        let mut pw: Vec<Vec<C>> = vec![vec![zero.clone(); cap]; cap];
        let mut g = vec![zero.clone(); cap];
        g[1] = f1inv.clone();
        pw[1][1] = f1inv.clone();
        for j in 2..cap {
            pw[j][j] = pw[j - 1][j - 1].r_mul(&f1inv);
        }
        for k in 2..cap {
            for j in 2..=k {
                if j == k {
                    continue;
                }
                let mut s = zero.clone();
                for i in 1..=(k - (j - 1)) {
                    let t = &pw[j - 1][k - i];
                    if g[i].r_is_zero() || t.r_is_zero() {
                        continue;
                    }
                    s = s.r_add(&g[i].r_mul(t));
                }
                pw[j][k] = s;
            }
            let mut s = zero.clone();
            for (j, pj) in pw.iter().enumerate().take(k + 1).skip(2) {
                if self.coeffs[j].r_is_zero() {
                    continue;
                }
                s = s.r_add(&self.coeffs[j].r_mul(&pj[k]));
            }
            g[k] = s.r_neg().r_mul(&f1inv);
            pw[1][k] = g[k].clone();
        }
        ZSeries::from_coeffs(g)
    }

    /// Formal derivative (the top coefficient is lost, cap drops by one).
    pub fn derivative(&self) -> Option<Self> {
        if self.cap() < 2 {
            return None;
        }
        let coeffs = (1..self.cap())
            .map(|k| self.coeffs[k].r_scale(&Rational::from_int(k as i64)))
            .collect::<Option<Vec<_>>>()?;
        Some(ZSeries { coeffs })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rs(v: &[(usize, Rational)], cap: usize) -> ZSeries<Rational> {
        ZSeries::from_sparse(&Rational::zero(), cap, v).unwrap()
    }

    fn r(a: i64, b: i64) -> Rational {
        Rational::new(a, b)
    }

    #[test]
    fn product_examples() {
        let a = rs(&[(0, r(1, 1)), (1, r(1, 1))], 3);
        let b = rs(&[(0, r(1, 1)), (1, r(-1, 1))], 3);
        assert_eq!(a.mul(&b), rs(&[(0, r(1, 1)), (2, r(-1, 1))], 3));
        let log = rs(&[(1, r(1, 1)), (4, r(1, 2))], 8);
        assert_eq!(*log.mul(&log).coeff(5), r(1, 1));
    }

    #[test]
    fn compose_examples() {
        let f = rs(&[(1, r(1, 1)), (4, r(1, 2))], 8);
        let g = rs(&[(1, r(2, 1))], 8);
        assert_eq!(f.compose(&g).unwrap(), rs(&[(1, r(2, 1)), (4, r(8, 1))], 8));
        let id = rs(&[(1, r(1, 1))], 8);
        assert_eq!(id.compose(&g).unwrap(), g);
        assert!(f.compose(&rs(&[(0, r(1, 1))], 8)).is_err());
    }

    #[test]
    fn reversion_examples() {
        let f = rs(&[(1, r(1, 1)), (4, r(1, 2))], 10);
        let g = f.reversion().unwrap();
        assert_eq!(g, rs(&[(1, r(1, 1)), (4, r(-1, 2)), (7, r(1, 1))], 10));
        assert_eq!(f.compose(&g).unwrap(), rs(&[(1, r(1, 1))], 10));
        let id = rs(&[(1, r(1, 1))], 6);
        assert_eq!(id.reversion().unwrap(), id);
        assert!(rs(&[(2, r(1, 1))], 6).reversion().is_err());
    }

    #[test]
    fn power_examples() {
        let a = rs(&[(0, r(1, 1)), (1, r(1, 1))], 3);
        assert_eq!(a.pow(2), rs(&[(0, r(1, 1)), (1, r(2, 1)), (2, r(1, 1))], 3));
        assert_eq!(a.pow(0), rs(&[(0, r(1, 1))], 3));
    }

    #[test]
    fn ypoly_display() {
        let p = YPoly::monomial(8, r(1, 40320))
            .add(&YPoly::monomial(5, r(1, 48)))
            .add(&YPoly::monomial(2, r(1, 8)));
        assert_eq!(p.to_string(), "Y^8/40320 + Y^5/48 + Y^2/8");
        assert_eq!(YPoly::y().to_string(), "Y");
        assert_eq!(YPoly::monomial(2, r(-3, 4)).add(&YPoly::constant(r(1, 1))).to_string(), "-3*Y^2/4 + 1");
        assert_eq!(YPoly::zero().to_string(), "0");
    }
}
