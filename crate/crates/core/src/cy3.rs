//! Descendant correlators of a Calabi–Yau threefold in terms of the
//! zero-point invariant N_{g,ℓ}: the closed multiple-point function, the
//! vertex form with geometric-series insertions, the twisted zero-point
//! value, and an independent reducer using string, dilaton and divisor.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::coeffring::{factorial, qi, LambdaRational, Scalar, Q};
use crate::error::{Error, Result};
use crate::series::{MultiSeries, VariableSet};

/// Threefold data for one curve class ℓ.
#[derive(Clone, Debug, PartialEq)]
pub struct CY3Spec {
    /// ∫_ℓ H for the class being computed.
    pub pairing: Q,
    /// (ℓ, D), e.g. 5d on the quintic.
    pub degree_d: i64,
    /// Known values of N_{g,ℓ} keyed by (g, class label).
    pub n_values: BTreeMap<(u32, u32), Q>,
}

impl CY3Spec {
    pub fn new(pairing: Q, degree_d: i64) -> Self {
        CY3Spec { pairing, degree_d, n_values: BTreeMap::new() }
    }
    /// The quintic in degree d: ∫ H = d and (ℓ, D) = 5d.
    pub fn quintic(d: u32) -> Self {
        CY3Spec::new(qi(d as i64), 5 * d as i64)
    }
}

/// coeff · N_{g,class}
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Correlator {
    pub coeff: Q,
    pub g: u32,
    pub class: u32,
}

impl Correlator {
    /// Numeric value when the spec knows N_{g,class}; a zero multiple is always 0.
    pub fn value(&self, spec: &CY3Spec) -> Option<Q> {
        if self.coeff.is_zero() {
            return Some(Q::zero());
        }
        spec.n_values.get(&(self.g, self.class)).map(|n| n * &self.coeff)
    }
}

impl fmt::Display for Correlator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*N_{{{},{}}}", self.coeff.to_text(), self.g, self.class)
    }
}

/// coeff · N_{g,class} with a λ-dependent coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct TwistedCorrelator {
    pub coeff: LambdaRational,
    pub g: u32,
    pub class: u32,
}

/// ∏_{r=1}^{p} (2g + m + r − 4), always as a literal product.
pub fn rising_factor(g: u32, m: usize, p: usize) -> Q {
    let base = 2 * g as i64 + m as i64 - 4;
    (1..=p as i64).fold(Q::one(), |acc, r| acc * qi(base + r))
}

/// Elementary symmetric polynomials σ_0..σ_len of the given values.
pub fn elementary_symmetric<S: Scalar>(vals: &[S]) -> Vec<S> {
    let mut e = vec![S::nil(); vals.len() + 1];
    e[0] = S::unit();
    for (k, v) in vals.iter().enumerate() {
        for p in (1..=k + 1).rev() {
            let t = e[p - 1].mul_ref(v);
            e[p].add_assign_ref(&t);
        }
    }
    e
}

fn check_slots(big_n: usize, n: usize, m: usize) -> Result<()> {
    if big_n < n + m {
        return Err(Error::Precondition(format!("need N >= n + m, got N={big_n}, n={n}, m={m}")));
    }
    Ok(())
}

/// Variables x1..xm, y1..yn with caps N − m.
pub fn multi_point_vars(big_n: usize, n: usize, m: usize) -> Result<Arc<VariableSet>> {
    check_slots(big_n, n, m)?;
    let cap = (big_n - m) as u32;
    let mut b = VariableSet::builder();
    for i in 1..=m {
        b = b.var(&format!("x{i}"), cap);
    }
    for j in 1..=n {
        b = b.var(&format!("y{j}"), cap);
    }
    Ok(b.build())
}

/// Generating polynomial of ⟨Hψ^{k}…, ψ^{l}…, 1…⟩_{g,N} / N_{g,ℓ} in x (H slots) and y (ψ slots).
pub fn multi_point_poly(g: u32, big_n: usize, n: usize, m: usize, spec: &CY3Spec) -> Result<MultiSeries<Q>> {
    let vars = multi_point_vars(big_n, n, m)?;
    let all: Vec<MultiSeries<Q>> = vars
        .specs()
        .iter()
        .map(|v| MultiSeries::var(&vars, &v.name))
        .collect::<Result<_>>()?;
    let ys = &all[m..];
    let total = all.iter().fold(MultiSeries::zero(&vars), |acc, v| &acc + v);
    let mut sig = vec![MultiSeries::one(&vars)];
    for y in ys {
        sig.push(MultiSeries::zero(&vars));
        for p in (1..sig.len()).rev() {
            let t = &sig[p - 1] * y;
            sig[p] = &sig[p] + &t;
        }
    }
    let hm = crate::coeffring::qpow(&spec.pairing, m as i64);
    let mut out = MultiSeries::zero(&vars);
    for (p, s) in sig.iter().enumerate() {
        let c = rising_factor(g, m, p);
        if c.is_zero() {
            continue;
        }
        let term = s.try_mul(&total.int_pow((big_n - m - p) as i64)?)?;
        out = &out + &term.scale(&(c * &hm));
    }
    Ok(out)
}

/// Closed multiple-point function evaluated at x (H slots) and y (ψ slots); N slots in total.
pub fn multi_point(
    g: u32,
    big_n: usize,
    x: &[Q],
    y: &[Q],
    class: u32,
    spec: &CY3Spec,
) -> Result<Correlator> {
    let (m, n) = (x.len(), y.len());
    check_slots(big_n, n, m)?;
    let sx: Q = x.iter().chain(y).fold(Q::zero(), |a, b| a + b);
    let sig = elementary_symmetric(y);
    let hm = crate::coeffring::qpow(&spec.pairing, m as i64);
    let mut acc = Q::zero();
    for (p, s) in sig.iter().enumerate() {
        let e = big_n - m - p;
        acc += rising_factor(g, m, p) * s * crate::coeffring::qpow(&sx, e as i64);
    }
    Ok(Correlator { coeff: acc * hm, g, class })
}

/// ⟨(t0 + t1 H)/(1 − z_i ψ), i = 1..n⟩_{g,n} as a multiple of N_{g,class}.
pub fn q_vertex(g: u32, class: u32, t0: &Q, t1: &Q, z: &[Q], spec: &CY3Spec) -> Correlator {
    let n = z.len();
    let sig = elementary_symmetric(z);
    let sz: Q = z.iter().fold(Q::zero(), |a, b| a + b);
    let mut acc = Q::zero();
    for m in 0..=n {
        for p in 0..=(n - m) {
            let qq = n - m - p;
            let ratio = Q::new(factorial((m + qq) as u64), factorial(m as u64) * factorial(qq as u64));
            acc += crate::coeffring::qpow(t0, (p + qq) as i64)
                * crate::coeffring::qpow(&spec.pairing, m as i64)
                * crate::coeffring::qpow(t1, m as i64)
                * rising_factor(g, m, p)
                * ratio
                * &sig[p]
                * crate::coeffring::qpow(&sz, qq as i64);
        }
    }
    Correlator { coeff: acc, g, class }
}

/// Same vertex computed by expanding each insertion against the multiple-point function.
pub fn q_vertex_by_expansion(g: u32, class: u32, t0: &Q, t1: &Q, z: &[Q], spec: &CY3Spec) -> Result<Correlator> {
    let n = z.len();
    let mut acc = Q::zero();
    for mask in 0u32..(1 << n) {
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for (i, zi) in z.iter().enumerate() {
            if mask & (1 << i) != 0 {
                x.push(zi.clone());
            } else {
                y.push(zi.clone());
            }
        }
        let m = x.len();
        let w = crate::coeffring::qpow(t1, m as i64) * crate::coeffring::qpow(t0, (n - m) as i64);
        acc += w * multi_point(g, n, &x, &y, class, spec)?.coeff;
    }
    Ok(Correlator { coeff: acc, g, class })
}

/// ⟨⟩ twisted by O^- ⊕ O(D)^+ on a threefold: (−1)^{1−g} λ^{2g−2−(ℓ,D)} N_{g,ℓ}.
pub fn twisted_zero_point(g: u32, class: u32, spec: &CY3Spec) -> TwistedCorrelator {
    let sign = if g % 2 == 1 { 1 } else { -1 };
    let e = 2 * g as i64 - 2 - spec.degree_d;
    TwistedCorrelator { coeff: LambdaRational::monomial(qi(sign), e), g, class }
}

/// ψ^psi · H^h at one marking.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Insertion {
    pub psi: u32,
    pub h: u32,
}

impl Insertion {
    pub fn new(psi: u32, h: u32) -> Self {
        Insertion { psi, h }
    }
}

/// Reduces a descendant invariant to c·N_{g,class} with string, dilaton and divisor.
pub fn reduce_by_equations(g: u32, class: u32, insertions: &[Insertion], spec: &CY3Spec) -> Correlator {
    let mut memo = BTreeMap::new();
    let mut key: Vec<Insertion> = insertions.to_vec();
    key.sort();
    let coeff = reduce_rec(g, key, &spec.pairing, &mut memo);
    Correlator { coeff, g, class }
}

fn reduce_rec(g: u32, ins: Vec<Insertion>, pairing: &Q, memo: &mut BTreeMap<Vec<Insertion>, Q>) -> Q {
    let n = ins.len();
    if ins.iter().any(|x| x.h >= 4) {
        return Q::zero();
    }
    if ins.iter().map(|x| (x.psi + x.h) as usize).sum::<usize>() != n {
        return Q::zero();
    }
    if n == 0 {
        return Q::one();
    }
    if let Some(v) = memo.get(&ins) {
        return v.clone();
    }
    let without = |i: usize| -> Vec<Insertion> {
        let mut r = ins.clone();
        r.remove(i);
        r
    };
    let lowered = |rest: &[Insertion], j: usize, dh: u32| -> Vec<Insertion> {
        let mut r = rest.to_vec();
        r[j].psi -= 1;
        r[j].h += dh;
        r.sort();
        r
    };
    let find = |t: Insertion| ins.iter().position(|x| *x == t);
    let mut acc = Q::zero();
    if let Some(i) = find(Insertion::new(0, 0)) {
        let rest = without(i);
        for j in 0..rest.len() {
            if rest[j].psi >= 1 {
                acc += reduce_rec(g, lowered(&rest, j, 0), pairing, memo);
            }
        }
    } else if let Some(i) = find(Insertion::new(1, 0)) {
        let rest = without(i);
        let f = qi(2 * g as i64 - 2 + rest.len() as i64);
        acc += f * reduce_rec(g, rest, pairing, memo);
    } else if let Some(i) = find(Insertion::new(0, 1)) {
        let rest = without(i);
        acc += pairing * reduce_rec(g, rest.clone(), pairing, memo);
        for j in 0..rest.len() {
            if rest[j].psi >= 1 {
                acc += reduce_rec(g, lowered(&rest, j, 1), pairing, memo);
            }
        }
    }
    memo.insert(ins, acc.clone());
    acc
}

/// Checks every coefficient of the multiple-point polynomial against the reducer.
pub fn multi_point_matches_reduction(g: u32, big_n: usize, n: usize, m: usize, spec: &CY3Spec) -> Result<bool> {
    let poly = multi_point_poly(g, big_n, n, m, spec)?;
    let deg = big_n - m;
    let mut ok = true;
    for_each_exponent(n + m, deg, &mut |e: &[i32]| {
        let mut ins: Vec<Insertion> = Vec::new();
        for (i, k) in e.iter().enumerate() {
            ins.push(Insertion::new(*k as u32, if i < m { 1 } else { 0 }));
        }
        ins.extend(std::iter::repeat_n(Insertion::new(0, 0), big_n - n - m));
        let want = reduce_by_equations(g, 0, &ins, spec).coeff;
        if poly.coeff(e) != want {
            ok = false;
        }
    });
    // nothing off the degree N − m
    let off = poly.terms().any(|(e, _)| e.iter().sum::<i32>() as usize != deg);
    Ok(ok && !off)
}

/// Calls f on every vector of `len` nonnegative ints summing to `total`.
fn for_each_exponent(len: usize, total: usize, f: &mut dyn FnMut(&[i32])) {
    fn go(pos: usize, left: usize, cur: &mut Vec<i32>, f: &mut dyn FnMut(&[i32])) {
        if pos + 1 == cur.len() {
            cur[pos] = left as i32;
            f(cur);
            return;
        }
        for k in 0..=left {
            cur[pos] = k as i32;
            go(pos + 1, left - k, cur, f);
        }
    }
    if len == 0 {
        if total == 0 {
            f(&[]);
        }
        return;
    }
    let mut cur = vec![0; len];
    go(0, total, &mut cur, f);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffring::q;
    use proptest::prelude::*;

    fn spec() -> CY3Spec {
        CY3Spec::new(q(3, 2), 5)
    }

    #[test]
    fn multi_point_examples() {
        let s = spec();
        assert_eq!(multi_point(3, 0, &[], &[], 1, &s).unwrap().coeff, qi(1));
        // only x^0 survives with N = 1, m = 1
        let c = multi_point(2, 1, &[qi(7)], &[], 1, &s).unwrap();
        assert_eq!(c.coeff, s.pairing);
        assert!(multi_point(2, 1, &[qi(1)], &[qi(1)], 1, &s).is_err());
    }

    #[test]
    fn multi_point_g2_agrees_with_reduction() {
        assert!(multi_point_matches_reduction(2, 2, 1, 1, &spec()).unwrap());
    }

    #[test]
    fn multi_point_agrees_with_reduction_small() {
        let s = spec();
        for g in 0..=4 {
            for tot in 0..=4usize {
                for m in 0..=tot {
                    let n = tot - m;
                    for extra in 0..=1 {
                        assert!(multi_point_matches_reduction(g, tot + extra, n, m, &s).unwrap(), "g={g} n={n} m={m}");
                    }
                }
            }
        }
    }

    #[test]
    fn reduction_examples() {
        let s = spec();
        let dil = [Insertion::new(1, 0)];
        assert_eq!(reduce_by_equations(2, 1, &dil, &s).coeff, qi(2));
        assert_eq!(reduce_by_equations(5, 1, &[Insertion::new(0, 1)], &s).coeff, s.pairing);
        let two = [Insertion::new(1, 0), Insertion::new(1, 0)];
        assert_eq!(reduce_by_equations(2, 1, &two, &s).coeff, qi(6));
        assert_eq!(reduce_by_equations(2, 1, &[Insertion::new(2, 0)], &s).coeff, qi(0));
    }

    #[test]
    fn q_vertex_examples() {
        let s = spec();
        assert_eq!(q_vertex(2, 1, &qi(3), &qi(5), &[], &s).coeff, qi(1));
        // n = 1, t1 = 0, g = 2: t0((2g−3)z + z)
        let z = q(2, 7);
        let v = q_vertex(2, 1, &qi(3), &qi(0), std::slice::from_ref(&z), &s);
        assert_eq!(v.coeff, qi(3) * qi(2) * &z);
    }

    #[test]
    fn q_vertex_matches_expansion() {
        let s = spec();
        let (t0, t1) = (q(2, 3), q(-5, 4));
        for (g, zs) in [(2, vec![q(1, 2)]), (2, vec![q(1, 3), qi(2)]), (3, vec![q(-1, 5), q(7, 3)]), (0, vec![qi(1), qi(2), qi(3)]), (1, vec![q(1, 2), q(1, 3), q(1, 4)])] {
            assert_eq!(q_vertex(g, 1, &t0, &t1, &zs, &s), q_vertex_by_expansion(g, 1, &t0, &t1, &zs, &s).unwrap());
        }
    }

    #[test]
    fn twisted_zero_point_values() {
        let s = CY3Spec::quintic(1);
        assert_eq!(twisted_zero_point(0, 1, &s).coeff, LambdaRational::monomial(qi(-1), -7));
        assert_eq!(twisted_zero_point(1, 1, &s).coeff, LambdaRational::monomial(qi(1), -5));
        assert_eq!(twisted_zero_point(3, 1, &s).coeff, LambdaRational::monomial(qi(1), -1));
        for g in 0..6 {
            for dd in 1..12 {
                let t = twisted_zero_point(g, 1, &CY3Spec::new(qi(1), dd));
                let (_, e) = t.coeff.as_monomial().unwrap();
                assert_eq!(e, 2 * g as i64 - 2 - dd);
            }
        }
    }

    #[test]
    fn numeric_value_when_known() {
        let mut s = CY3Spec::quintic(1);
        s.n_values.insert((0, 1), qi(2875));
        let c = reduce_by_equations(0, 1, &[Insertion::new(0, 1)], &s);
        assert_eq!(c.value(&s), Some(qi(2875)));
        assert_eq!(c.to_string(), "1*N_{0,1}");
    }

    #[test]
    fn string_equation_in_generating_form() {
        // appending a 1 slot multiplies by the total sum of variables
        let s = spec();
        let x = [q(1, 2)];
        let y = [q(2, 3), q(-1, 4)];
        let tot: Q = x.iter().chain(&y).sum();
        for big_n in 3..6 {
            let a = multi_point(2, big_n, &x, &y, 1, &s).unwrap().coeff;
            let b = multi_point(2, big_n + 1, &x, &y, 1, &s).unwrap().coeff;
            assert_eq!(b, a * &tot);
        }
    }

    fn small_q() -> impl Strategy<Value = Q> {
        (-9i64..10, 1i64..6).prop_map(|(a, b)| q(a, b))
    }

    proptest! {
        #[test]
        fn multi_point_is_symmetric(xs in proptest::collection::vec(small_q(), 0..3), ys in proptest::collection::vec(small_q(), 0..3), g in 0u32..4, extra in 0usize..3) {
            let s = spec();
            let big_n = xs.len() + ys.len() + extra;
            let base = multi_point(g, big_n, &xs, &ys, 1, &s).unwrap();
            let mut xr = xs.clone(); xr.reverse();
            let mut yr = ys.clone(); yr.reverse();
            prop_assert_eq!(multi_point(g, big_n, &xr, &yr, 1, &s).unwrap(), base);
        }
    }
}
