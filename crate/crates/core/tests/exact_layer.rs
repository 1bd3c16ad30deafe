use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use ltperiod::lubin_tate::{gauss_profile, log_polynomial_model, mul_p, pk_combinatorial, pk_series};
use ltperiod::monna::{monna, w, w_small_closed_form};
use ltperiod::padic_core::{
    binom, binom_mod_p, digits_p, enumerate_reps, factorial, orbit_size, val_factorial, IndexVector,
};
use ltperiod::{LTModel, ModelKind, Params, Rational};

fn params(p: u64) -> Params {
    Params::new(p).unwrap()
}

/// Counts factors of p by repeated division.
fn strip(mut n: BigInt, p: u64) -> u64 {
    let p = BigInt::from(p);
    let mut v = 0;
    while !n.is_zero() && n.is_multiple_of(&p) {
        n /= &p;
        v += 1;
    }
    v
}

fn permutations(v: &[u64]) -> BTreeSet<Vec<u64>> {
    if v.len() <= 1 {
        return BTreeSet::from([v.to_vec()]);
    }
    let mut out = BTreeSet::new();
    for i in 0..v.len() {
        let mut rest = v.to_vec();
        let x = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, x);
            out.insert(tail);
        }
    }
    out
}

#[test]
fn legendre_against_division() {
    for p in [2, 3, 5] {
        let mut f = BigInt::from(1);
        for n in 0..=300u64 {
            if n > 0 {
                f *= n;
            }
            assert_eq!(val_factorial(n, p), strip(f.clone(), p), "n = {n}, p = {p}");
        }
        // ⌊q/p⌋ + ⌊q/p²⌋
        assert_eq!(val_factorial(p * p, p), p + 1);
    }
    assert_eq!(strip(factorial(4), 2), 3);
}

#[test]
fn lucas_against_exact_binomials() {
    for p in [2, 3, 5, 7] {
        for n in 0..=200u64 {
            for k in 0..=n {
                let exact = binom(n, k).mod_floor(&BigInt::from(p)).to_u64().unwrap();
                assert_eq!(binom_mod_p(n, k, p), exact, "({n} {k}) mod {p}");
            }
        }
    }
}

#[test]
fn unequal_entries_give_one_factor_of_p() {
    for p in [2u64, 3, 5] {
        for s in 0..=30 {
            for k in enumerate_reps(s, p as usize) {
                let brute = permutations(&k.entries).len() as u64;
                assert_eq!(orbit_size(&k), brute);
                let equal = k.entries.iter().all(|&x| x == k.entries[0]);
                let v = strip(BigInt::from(brute), p);
                assert_eq!(v, if equal { 0 } else { 1 }, "{:?}", k.entries);
            }
        }
    }
}

#[test]
fn reps_are_orbit_representatives() {
    for p in [2u64, 3] {
        for s in 0..=12u64 {
            let reps = enumerate_reps(s, p as usize);
            // every composition sorts to exactly one representative
            let mut seen = BTreeSet::new();
            let mut stack = vec![Vec::<u64>::new()];
            while let Some(v) = stack.pop() {
                if v.len() == p as usize {
                    if v.iter().sum::<u64>() == s {
                        let mut w = v.clone();
                        w.sort_unstable_by(|a, b| b.cmp(a));
                        seen.insert(w);
                    }
                    continue;
                }
                for x in 0..=s {
                    let mut u = v.clone();
                    u.push(x);
                    stack.push(u);
                }
            }
            let got: BTreeSet<Vec<u64>> = reps.iter().map(|r| r.entries.clone()).collect();
            assert_eq!(got.len(), reps.len(), "duplicates at s = {s}");
            assert_eq!(got, seen);
            if p == 2 {
                assert_eq!(reps.len() as u64, s / 2 + 1);
            }
            // lexicographically decreasing
            assert!(reps.windows(2).all(|w| w[0].entries > w[1].entries));
        }
    }
    assert_eq!(
        enumerate_reps(4, 2),
        vec![IndexVector::new(vec![4, 0]), IndexVector::new(vec![3, 1]), IndexVector::new(vec![2, 2])]
    );
}

#[test]
fn weight_is_scaled_monna() {
    for p in [2u64, 3, 5] {
        let pr = params(p);
        let c = Rational::new((p * p) as i64, (p * p - 1) as i64);
        for k in 0..2000 {
            assert_eq!(w(k, &pr), &c * &monna(k, p));
        }
    }
    // 5 = (101)_2 reversed across the radix point is 0.101 = 5/8
    assert_eq!(monna(5, 2), Rational::new(5, 8));
    assert_eq!(w(5, &params(2)), Rational::new(5, 6));
}

#[test]
fn weight_from_digit_sum() {
    // independent form: w(k) = (p/(q−1))·Σ k_i p^{−i}, summed term by term
    for p in [2u64, 3, 5] {
        let pr = params(p);
        for k in 0..3000 {
            let mut s = Rational::zero();
            for (i, d) in digits_p(k, p).iter().enumerate() {
                s = &s + &Rational::new(*d as i64, (p as i64).pow(i as u32));
            }
            assert_eq!(w(k, &pr), &s * &Rational::new(p as i64, (p * p - 1) as i64));
        }
    }
}

#[test]
fn lemma_one_two_profiles() {
    for p in [2u64, 3, 5] {
        let pr = params(p);
        for i in 1..pr.q {
            let (a, b) = (i / p, i % p);
            let expect = Rational::new((a + b * p) as i64, (pr.q - 1) as i64);
            assert_eq!(w_small_closed_form(i, &pr), expect);
            let g = gauss_profile(&pk_combinatorial(i, &pr), &pr).unwrap();
            assert_eq!(g.entries.len(), 1);
            assert_eq!(g.min_value, expect, "p = {p}, i = {i}");
        }
    }
}

#[test]
fn powers_of_p_have_a_unique_minimum() {
    for p in [2u64, 3] {
        let pr = params(p);
        for k in [1, p] {
            let g = gauss_profile(&pk_combinatorial(k, &pr), &pr).unwrap();
            assert_eq!(g.tie_count, 1);
            assert_eq!(g.min_value, w(k, &pr));
        }
    }
}

#[test]
fn polynomial_log_degree_q() {
    // log(2Z + Z^4) = 2 log Z at Z^4: c_4·2^4 + 1 = 2·c_4
    let c4 = Rational::new(-1, 14);
    assert_eq!(&(&c4 * &Rational::from_int(16)) + &Rational::one(), &c4 * &Rational::from_int(2));
    let log = log_polynomial_model(&params(2), 10).unwrap();
    assert_eq!(*log.coeff(4), c4);
    assert_eq!(log.coeff(4).val_p(2), Some(-1));
}

#[test]
fn special_multiplication_by_two() {
    // exp(2·log Z) with log = Z + Z^4/2, exp = Z − Z^4/2 + …:
    // 2Z + Z^4 − (2Z)^4/2 at degree 4
    let s = mul_p(&LTModel::new(ModelKind::Special, params(2), 8)).unwrap();
    assert_eq!(*s.coeff(1), Rational::from_int(2));
    assert_eq!(*s.coeff(4), Rational::from_int(1 - 16 / 2));
    let poly = mul_p(&LTModel::new(ModelKind::Polynomial, params(2), 8)).unwrap();
    let nz: Vec<(usize, Rational)> =
        poly.coeffs().iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| (i, c.clone())).collect();
    assert_eq!(nz, [(1, Rational::from_int(2)), (4, Rational::one())]);
}

#[test]
fn polynomial_model_starts_like_special() {
    // both logs are Z + O(Z^q), so P_m agree below q
    for p in [2u64, 3] {
        let pr = params(p);
        let a = pk_series(pr.q - 1, &pr, ModelKind::Polynomial).unwrap();
        let b = pk_series(pr.q - 1, &pr, ModelKind::Special).unwrap();
        assert_eq!(a, b);
    }
}
