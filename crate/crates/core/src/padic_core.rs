//! Exact rationals, p-adic valuations of rationals, base-p digits and the
//! orbit combinatorics of p-tuples.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::Error;

/// Exact rational number, always reduced with positive denominator.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new<N: Into<BigInt>, D: Into<BigInt>>(num: N, den: D) -> Self {
        Rational(BigRational::new(num.into(), den.into()))
    }

    pub fn from_int<N: Into<BigInt>>(n: N) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn inner(&self) -> &BigRational {
        &self.0
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Self {
        Rational(self.0.recip())
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    pub fn pow(&self, e: i32) -> Self {
        Rational(num_traits::Pow::pow(&self.0, e))
    }

    /// p-adic valuation; `None` for zero.
    pub fn val_p(&self, p: u64) -> Option<i64> {
        if self.is_zero() {
            return None;
        }
        Some(val_int(self.numer(), p) as i64 - val_int(self.denom(), p) as i64)
    }

    /// Splits a nonzero rational as p^v · (a / b) with a, b prime to p.
    pub fn split_p(&self, p: u64) -> (i64, BigInt, BigInt) {
        let pb = BigInt::from(p);
        let mut a = self.numer().clone();
        let mut b = self.denom().clone();
        let mut v = 0i64;
        while a.is_multiple_of(&pb) {
            a /= &pb;
            v += 1;
        }
        while b.is_multiple_of(&pb) {
            b /= &pb;
            v -= 1;
        }
        (v, a, b)
    }
}

fn val_int(x: &BigInt, p: u64) -> u64 {
    let pb = BigInt::from(p);
    let mut x = x.clone();
    let mut v = 0;
    while !x.is_zero() && x.is_multiple_of(&pb) {
        x /= &pb;
        v += 1;
    }
    v
}

/// p-adic valuation of a nonzero big unsigned integer (0 for zero).
pub fn val_biguint(x: &BigUint, p: u64) -> u64 {
    if x.is_zero() {
        return 0;
    }
    if p == 2 {
        return x.trailing_zeros().unwrap_or(0);
    }
    let pb = BigUint::from(p);
    let mut x = x.clone();
    let mut v = 0;
    loop {
        let (d, r) = x.div_rem(&pb);
        if !r.is_zero() {
            return v;
        }
        x = d;
        v += 1;
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::Parse(format!("not a rational: {s:?}"));
        let s = s.trim();
        match s.split_once('/') {
            Some((n, d)) => {
                let n: BigInt = n.trim().parse().map_err(|_| bad())?;
                let d: BigInt = d.trim().parse().map_err(|_| bad())?;
                if d.is_zero() {
                    return Err(bad());
                }
                Ok(Rational::new(n, d))
            }
            None => Ok(Rational::from_int(s.parse::<BigInt>().map_err(|_| bad())?)),
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_int(n)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Rational::from_int(n)
    }
}

macro_rules! binop {
    ($tr:ident, $f:ident) => {
        impl $tr<&Rational> for &Rational {
            type Output = Rational;
            fn $f(self, o: &Rational) -> Rational {
                Rational((&self.0).$f(&o.0))
            }
        }
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $f(self, o: Rational) -> Rational {
                Rational(self.0.$f(o.0))
            }
        }
        impl $tr<&Rational> for Rational {
            type Output = Rational;
            fn $f(self, o: &Rational) -> Rational {
                Rational(self.0.$f(&o.0))
            }
        }
    };
}
binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, o: &Rational) {
        self.0 += &o.0;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, o: &Rational) {
        self.0 -= &o.0;
    }
}

impl MulAssign<&Rational> for Rational {
    fn mul_assign(&mut self, o: &Rational) {
        self.0 *= &o.0;
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

/// The fixed prime p with q = p².
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Params {
    pub p: u64,
    pub q: u64,
}

impl Params {
    pub fn new(p: u64) -> Result<Self, Error> {
        if !is_prime(p) {
            return Err(Error::Config(format!("p = {p} is not prime")));
        }
        if p > 1 << 20 {
            return Err(Error::Config(format!("p = {p} is too large")));
        }
        Ok(Params { p, q: p * p })
    }

    /// val_p(Ω) = p/(q−1).
    pub fn val_omega(&self) -> Rational {
        Rational::new(self.p, self.q - 1)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// A p-adic valuation reading.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum ValueV {
    Finite(Rational),
    Infinite,
    /// The element vanishes at working precision; its valuation is at least the cutoff.
    BoundedBelow(Rational),
}

impl ValueV {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            ValueV::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, ValueV::BoundedBelow(_))
    }

    /// Decides val > x; `None` when a bounded-below reading cannot separate.
    pub fn gt(&self, x: &Rational) -> Option<bool> {
        match self {
            ValueV::Finite(v) => Some(v > x),
            ValueV::Infinite => Some(true),
            ValueV::BoundedBelow(c) => (c > x).then_some(true),
        }
    }

    /// Decides val ≥ x.
    pub fn ge(&self, x: &Rational) -> Option<bool> {
        match self {
            ValueV::Finite(v) => Some(v >= x),
            ValueV::Infinite => Some(true),
            ValueV::BoundedBelow(c) => (c >= x).then_some(true),
        }
    }

    /// Decides val = x.
    pub fn eq_rat(&self, x: &Rational) -> Option<bool> {
        match self {
            ValueV::Finite(v) => Some(v == x),
            ValueV::Infinite => Some(false),
            ValueV::BoundedBelow(c) => (c > x).then_some(false),
        }
    }

    /// Lower bound carried by the reading (`None` for +∞).
    pub fn lower(&self) -> Option<&Rational> {
        match self {
            ValueV::Finite(v) | ValueV::BoundedBelow(v) => Some(v),
            ValueV::Infinite => None,
        }
    }

    pub fn add_const(&self, c: &Rational) -> ValueV {
        match self {
            ValueV::Finite(v) => ValueV::Finite(v + c),
            ValueV::Infinite => ValueV::Infinite,
            ValueV::BoundedBelow(v) => ValueV::BoundedBelow(v + c),
        }
    }
}

impl fmt::Display for ValueV {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueV::Finite(v) => write!(f, "{v}"),
            ValueV::Infinite => write!(f, "inf"),
            ValueV::BoundedBelow(c) => write!(f, ">={c}"),
        }
    }
}

/// p-adic valuation of a rational: exact integer, or infinite for zero.
pub fn val_p_rat(x: &Rational, p: u64) -> ValueV {
    match x.val_p(p) {
        Some(v) => ValueV::Finite(Rational::from_int(v)),
        None => ValueV::Infinite,
    }
}

/// Little-endian base-p digits; `[0]` for zero.
pub fn digits_p(mut n: u64, p: u64) -> Vec<u64> {
    if n == 0 {
        return vec![0];
    }
    let mut d = Vec::new();
    while n > 0 {
        d.push(n % p);
        n /= p;
    }
    d
}

pub fn sp_digit_sum(n: u64, p: u64) -> u64 {
    digits_p(n, p).iter().sum()
}

/// val_p(n!) by Legendre: (n − s_p(n))/(p − 1).
pub fn val_factorial(n: u64, p: u64) -> u64 {
    (n - sp_digit_sum(n, p)) / (p - 1)
}

/// Binomial coefficient mod p by Lucas' theorem.
pub fn binom_mod_p(n: u64, k: u64, p: u64) -> u64 {
    let (mut n, mut k) = (n, k);
    let mut r = 1u64;
    while n > 0 || k > 0 {
        let (a, b) = (n % p, k % p);
        if b > a {
            return 0;
        }
        r = r * small_binom(a, b) % p;
        n /= p;
        k /= p;
    }
    r
}

fn small_binom(n: u64, k: u64) -> u64 {
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r as u64
}

/// Exact binomial coefficient.
pub fn binom(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |a, i| a * BigInt::from(i))
}

/// A p-tuple of non-negative integers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndexVector {
    pub entries: Vec<u64>,
}

impl IndexVector {
    pub fn new(entries: Vec<u64>) -> Self {
        IndexVector { entries }
    }

    pub fn sum(&self) -> u64 {
        self.entries.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl fmt::Display for IndexVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Size of the orbit of `k` under permutation of its entries.
pub fn orbit_size(k: &IndexVector) -> u64 {
    let mut sorted = k.entries.clone();
    sorted.sort_unstable();
    let mut denom = 1u64;
    let mut run = 1u64;
    for i in 1..=sorted.len() {
        if i < sorted.len() && sorted[i] == sorted[i - 1] {
            run += 1;
        } else {
            denom *= (1..=run).product::<u64>();
            run = 1;
        }
    }
    (1..=k.len() as u64).product::<u64>() / denom
}

/// One representative per orbit: non-increasing tuples of `parts` entries
/// summing to `sum`, in lexicographically decreasing order.
pub fn enumerate_reps(sum: u64, parts: usize) -> Vec<IndexVector> {
    fn rec(rem: u64, slots: usize, cap: u64, cur: &mut Vec<u64>, out: &mut Vec<IndexVector>) {
        if slots == 0 {
            if rem == 0 {
                out.push(IndexVector::new(cur.clone()));
            }
            return;
        }
        let hi = cap.min(rem);
        // the remaining slots must be able to absorb rem with entries ≤ x
        for x in (0..=hi).rev() {
            if x * (slots as u64) < rem {
                break;
            }
            cur.push(x);
            rec(rem - x, slots - 1, x, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if parts == 0 {
        if sum == 0 {
            out.push(IndexVector::new(vec![]));
        }
        return out;
    }
    rec(sum, parts, sum, &mut Vec::new(), &mut out);
    out
}

/// Exact modular inverse for a value prime to the modulus.
pub fn inv_mod(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let g = a.extended_gcd(m);
    if !g.gcd.is_one() && g.gcd != -BigInt::one() {
        return None;
    }
    let mut x = g.x.mod_floor(m);
    if g.gcd.is_negative() {
        x = (-x).mod_floor(m);
    }
    Some(x)
}
