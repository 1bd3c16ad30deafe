//! The weight w(k), the Monna map, and the property sweep for w.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::padic_core::{digits_p, Params, Rational};

/// w(k) = (p/(q−1))·Σ k_i p^{−i} for k = Σ k_i p^i.
pub fn w(k: u64, params: &Params) -> Rational {
    let p = params.p;
    // Σ k_i p^{h−i} / p^h keeps everything integral until the last step
    let d = digits_p(k, p);
    let h = d.len() as u32 - 1;
    let mut num: u128 = 0;
    for (i, &di) in d.iter().enumerate() {
        num += di as u128 * (p as u128).pow(h - i as u32);
    }
    let den = (p as u128).pow(h) * (params.q - 1) as u128;
    Rational::new(num * p as u128, den)
}

/// Classical Monna map M(k) = Σ k_i p^{−i−1}.
pub fn monna(k: u64, p: u64) -> Rational {
    let d = digits_p(k, p);
    let h = d.len() as u32;
    let mut num: u128 = 0;
    for (i, &di) in d.iter().enumerate() {
        num += di as u128 * (p as u128).pow(h - 1 - i as u32);
    }
    Rational::new(num, (p as u128).pow(h))
}

/// Outcome of one item of the property sweep.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PropertyItem {
    pub item: u32,
    pub statement: String,
    pub range: String,
    pub instances: u64,
    pub pass: bool,
    pub counterexample: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PropertyReport {
    pub p: u64,
    pub items: Vec<PropertyItem>,
}

impl PropertyReport {
    pub fn all_pass(&self) -> bool {
        self.items.iter().all(|i| i.pass)
    }
}

struct Sweep {
    instances: u64,
    first_bad: Option<String>,
}

impl Sweep {
    fn new() -> Self {
        Sweep { instances: 0, first_bad: None }
    }

    fn merge(mut self, o: Sweep) -> Sweep {
        self.instances += o.instances;
        if self.first_bad.is_none() {
            self.first_bad = o.first_bad;
        }
        self
    }

    fn note(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.instances += 1;
        if !ok && self.first_bad.is_none() {
            self.first_bad = Some(what());
        }
    }

    fn finish(self, item: u32, statement: &str, range: String) -> PropertyItem {
        PropertyItem {
            item,
            statement: statement.to_string(),
            range,
            instances: self.instances,
            pass: self.first_bad.is_none(),
            counterexample: self.first_bad,
        }
    }
}

/// Sweeps the six properties of the weight function. Items 1, 2, 4 run over
/// every k ≤ kmax, item 5 over every p^n·k + i ≤ kmax, item 3 over all pairs
/// k < ℓ ≤ pair_budget and item 6 over all a, b ≤ sub_budget.
pub fn check_w_props(params: &Params, kmax: u64, pair_budget: u64, sub_budget: u64) -> PropertyReport {
    let p = params.p;
    let q = params.q;
    let wt: Vec<Rational> = (0..=kmax.max(pair_budget).max(2 * sub_budget) + 1)
        .into_par_iter()
        .map(|k| w(k, params))
        .collect();
    let one = Rational::one();
    let bound = &one + &Rational::new(1, q - 1);

    let mut items = Vec::new();

    let mut s = Sweep::new();
    for k in 0..=kmax {
        s.note(wt[k as usize] < bound, || format!("k={k}: w={}", wt[k as usize]));
    }
    items.push(s.finish(1, "w(k) < 1 + 1/(q-1)", format!("0<=k<={kmax}")));

    let mut s = Sweep::new();
    for k in 0..=kmax {
        let wk = &wt[k as usize];
        let ge1 = *wk >= one;
        let cong = k % q == q - 1;
        let gt1 = *wk > one;
        let ok = ge1 == cong && (!cong || gt1 == (k != q - 1));
        s.note(ok, || format!("k={k}: w={wk}"));
    }
    items.push(s.finish(
        2,
        "w(k) >= 1 iff k = -1 mod q, and w(k) > 1 unless k = q-1",
        format!("0<=k<={kmax}"),
    ));

    let s = (1..=pair_budget)
        .into_par_iter()
        .map(|l| {
            let mut s = Sweep::new();
            for k in 0..l {
                let integral = (&wt[l as usize] - &wt[k as usize]).is_integer();
                let special = k % q == 0 && l == k + q - 1;
                s.note(integral == special, || format!("k={k}, l={l}"));
            }
            s
        })
        .reduce(Sweep::new, Sweep::merge);
    items.push(s.finish(
        3,
        "w(l) - w(k) in Z for k < l iff k = qj, l = qj + q - 1",
        format!("0<=k<l<={pair_budget}"),
    ));

    let mut s = Sweep::new();
    let half = Rational::new(1, p);
    for k in 0..=kmax / p {
        let ok = wt[(p * k) as usize] == &half * &wt[k as usize];
        s.note(ok, || format!("k={k}"));
    }
    items.push(s.finish(4, "w(pk) = w(k)/p", format!("pk<={kmax}")));

    let mut s = Sweep::new();
    let mut pn = 1u64;
    while pn <= kmax {
        for k in 0..=kmax / pn {
            for i in 0..pn {
                let idx = pn * k + i;
                if idx > kmax {
                    break;
                }
                let ok = wt[idx as usize] == &wt[(pn * k) as usize] + &wt[i as usize];
                s.note(ok, || format!("n-power={pn}, k={k}, i={i}"));
            }
        }
        pn *= p;
    }
    items.push(s.finish(
        5,
        "w(p^n k + i) = w(p^n k) + w(i) for 0 <= i < p^n",
        format!("p^n k + i <= {kmax}"),
    ));

    let s = (0..=sub_budget)
        .into_par_iter()
        .map(|a| {
            let mut s = Sweep::new();
            for b in 0..=sub_budget {
                let ok = wt[(a + b) as usize] <= &wt[a as usize] + &wt[b as usize];
                s.note(ok, || format!("a={a}, b={b}"));
            }
            s
        })
        .reduce(Sweep::new, Sweep::merge);
    items.push(s.finish(6, "w(a + b) <= w(a) + w(b)", format!("0<=a,b<={sub_budget}")));

    PropertyReport { p, items }
}

/// Closed form for 0 ≤ i ≤ q−1, i = a·p + b: w(i) = (a + b·p)/(q−1).
pub fn w_small_closed_form(i: u64, params: &Params) -> Rational {
    let (a, b) = (i / params.p, i % params.p);
    Rational::new(a + b * params.p, params.q - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p2() -> Params {
        Params::new(2).unwrap()
    }

    #[test]
    fn weight_examples() {
        assert_eq!(w(0, &p2()), Rational::zero());
        assert_eq!(w(1, &p2()), Rational::new(2, 3));
        assert_eq!(w(3, &p2()), Rational::one());
        assert_eq!(w(7, &p2()), Rational::new(7, 6));
        assert_eq!(w(4, &p2()), Rational::new(1, 6));
    }

    #[test]
    fn monna_examples() {
        assert_eq!(monna(1, 2), Rational::new(1, 2));
        assert_eq!(monna(5, 2), Rational::new(5, 8));
        assert_eq!(w(5, &p2()), Rational::new(4, 3) * monna(5, 2));
    }

    #[test]
    fn item_witnesses() {
        let pr = p2();
        assert_eq!(w(7, &pr) - w(4, &pr), Rational::one());
        assert_eq!(w(2, &pr), Rational::new(1, 2) * w(1, &pr));
        assert!(w(2, &pr) <= w(1, &pr) + w(1, &pr));
    }

    #[test]
    fn small_sweep_passes() {
        for p in [2, 3, 5] {
            let r = check_w_props(&Params::new(p).unwrap(), 600, 200, 150);
            assert!(r.all_pass(), "{r:?}");
        }
    }
}
