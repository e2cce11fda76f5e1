//! Exact scalars: big rationals, polynomials and rational functions in the
//! equivariant parameter λ, Laurent polynomials in λ, and the combinatorial
//! number conventions (binomials, inverse factorials, harmonic numbers).

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::series::{MultiSeries, VariableSet};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    BigRational::from_integer(BigInt::from(n))
}

pub fn qb(n: BigInt) -> Q {
    BigRational::from_integer(n)
}

/// "p/q", or "p" when the denominator is one.
pub fn q_str(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        Ok(BigRational::new(n, d))
    } else {
        let n: BigInt = s.parse().map_err(|_| bad())?;
        Ok(qb(n))
    }
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Binomial coefficient with the zero conventions: 0 unless 0 <= b <= a.
pub fn binomial(a: i64, b: i64) -> Q {
    if b < 0 || b > a {
        return Q::zero();
    }
    let b = b.min(a - b);
    let mut acc = BigInt::one();
    for i in 0..b {
        acc = acc * BigInt::from(a - i) / BigInt::from(i + 1);
    }
    qb(acc)
}

/// Generalized binomial coefficient binom(x, k) = x(x-1)...(x-k+1)/k! for any rational x.
pub fn binomial_general(x: &Q, k: u64) -> Q {
    let mut acc = Q::one();
    for i in 0..k {
        acc = acc * (x - qi(i as i64)) / qi(i as i64 + 1);
    }
    acc
}

pub fn inv_factorial(n: i64) -> Q {
    if n < 0 {
        Q::zero()
    } else {
        Q::new(BigInt::one(), factorial(n as u64))
    }
}

pub fn harmonic(k: u64) -> Q {
    (1..=k).fold(Q::zero(), |acc, i| acc + Q::new(BigInt::one(), BigInt::from(i)))
}

pub fn qpow(x: &Q, e: i64) -> Q {
    if e >= 0 {
        num_traits::pow(x.clone(), e as usize)
    } else {
        num_traits::pow(x.recip(), (-e) as usize)
    }
}

/// Ring interface shared by all coefficient types a series can carry.
pub trait Scalar: Clone + PartialEq + fmt::Debug + Send + Sync + 'static {
    fn nil() -> Self;
    fn unit() -> Self;
    fn is_nil(&self) -> bool;
    fn from_q(x: Q) -> Self;
    fn add_assign_ref(&mut self, o: &Self);
    fn sub_assign_ref(&mut self, o: &Self);
    fn mul_ref(&self, o: &Self) -> Self;
    fn neg_ref(&self) -> Self;
    fn scale(&self, x: &Q) -> Self;
    /// Multiplicative inverse when it exists inside the ring.
    fn inv(&self) -> Option<Self>;
    fn to_text(&self) -> String;

    fn add_ref(&self, o: &Self) -> Self {
        let mut r = self.clone();
        r.add_assign_ref(o);
        r
    }
    fn sub_ref(&self, o: &Self) -> Self {
        let mut r = self.clone();
        r.sub_assign_ref(o);
        r
    }
}

impl Scalar for Q {
    fn nil() -> Self {
        Zero::zero()
    }
    fn unit() -> Self {
        One::one()
    }
    fn is_nil(&self) -> bool {
        Zero::is_zero(self)
    }
    fn from_q(x: Q) -> Self {
        x
    }
    fn add_assign_ref(&mut self, o: &Self) {
        *self += o;
    }
    fn sub_assign_ref(&mut self, o: &Self) {
        *self -= o;
    }
    fn mul_ref(&self, o: &Self) -> Self {
        self * o
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn scale(&self, x: &Q) -> Self {
        self * x
    }
    fn inv(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }
    fn to_text(&self) -> String {
        q_str(self)
    }
}

// ---------------------------------------------------------------------------
// Polynomials in λ

/// Dense polynomial in λ, ascending coefficients, no trailing zeros.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct Poly {
    c: Vec<Q>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { c: Vec::new() }
    }
    pub fn one() -> Self {
        Poly::constant(Q::one())
    }
    pub fn constant(x: Q) -> Self {
        Poly::from_coeffs(vec![x])
    }
    /// λ
    pub fn lambda() -> Self {
        Poly::from_coeffs(vec![Q::zero(), Q::one()])
    }
    pub fn monomial(x: Q, e: usize) -> Self {
        let mut c = vec![Q::zero(); e + 1];
        c[e] = x;
        Poly::from_coeffs(c)
    }
    pub fn from_coeffs(mut c: Vec<Q>) -> Self {
        while c.last().is_some_and(|x| Zero::is_zero(x)) {
            c.pop();
        }
        Poly { c }
    }
    pub fn coeffs(&self) -> &[Q] {
        &self.c
    }
    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }
    pub fn lead(&self) -> Q {
        self.c.last().cloned().unwrap_or_else(Q::zero)
    }
    pub fn coeff(&self, i: usize) -> Q {
        self.c.get(i).cloned().unwrap_or_else(Q::zero)
    }
    /// Lowest power of λ with a nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.c.iter().position(|x| !Zero::is_zero(x))
    }
    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        let c = (0..n).map(|i| self.coeff(i) + o.coeff(i)).collect();
        Poly::from_coeffs(c)
    }
    pub fn sub(&self, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        let c = (0..n).map(|i| self.coeff(i) - o.coeff(i)).collect();
        Poly::from_coeffs(c)
    }
    pub fn neg(&self) -> Poly {
        Poly { c: self.c.iter().map(|x| -x).collect() }
    }
    pub fn scale(&self, x: &Q) -> Poly {
        Poly::from_coeffs(self.c.iter().map(|y| y * x).collect())
    }
    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![Q::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if Zero::is_zero(a) {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly::from_coeffs(c)
    }
    pub fn pow(&self, e: u32) -> Poly {
        (0..e).fold(Poly::one(), |acc, _| acc.mul(self))
    }
    /// Euclidean division; panics on a zero divisor.
    pub fn divrem(&self, d: &Poly) -> (Poly, Poly) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let dd = d.c.len() - 1;
        let lead_inv = d.lead().recip();
        let mut r = self.c.clone();
        if r.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let mut qv = vec![Q::zero(); r.len() - dd];
        for i in (0..qv.len()).rev() {
            let t = &r[i + dd] * &lead_inv;
            if !Zero::is_zero(&t) {
                for (j, dj) in d.c.iter().enumerate() {
                    r[i + j] -= &t * dj;
                }
            }
            qv[i] = t;
        }
        (Poly::from_coeffs(qv), Poly::from_coeffs(r))
    }
    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        self.scale(&self.lead().recip())
    }
    /// Monic gcd; gcd(0, 0) = 0.
    pub fn gcd(&self, o: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let (_, r) = a.divrem(&b);
            a = b;
            b = r.monic();
        }
        a.monic()
    }
    pub fn eval(&self, x: &Q) -> Q {
        self.c.iter().rev().fold(Q::zero(), |acc, c| acc * x + c)
    }
    /// Integer-coefficient rendering, e.g. "3*λ^2 - λ + 2"; the caller scales first.
    fn render(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, c) in self.c.iter().enumerate().rev() {
            if Zero::is_zero(c) {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mono = match i {
                0 => String::new(),
                1 => "λ".to_string(),
                _ => format!("λ^{i}"),
            };
            if mono.is_empty() {
                out.push_str(&q_str(&a));
            } else if a.is_one() {
                out.push_str(&mono);
            } else {
                out.push_str(&format!("{}*{}", q_str(&a), mono));
            }
        }
        out
    }
    fn denominator_lcm(&self) -> BigInt {
        self.c.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
    }
}

// ---------------------------------------------------------------------------
// Rational functions in λ

/// Element of ℚ(λ) kept as num/den with den monic and gcd(num, den) = 1.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct LambdaRational {
    num: Poly,
    den: Poly,
}

impl LambdaRational {
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::normalized(num, den))
    }
    fn normalized(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return LambdaRational { num: Poly::zero(), den: Poly::one() };
        }
        let g = num.gcd(&den);
        let (n, _) = num.divrem(&g);
        let (d, _) = den.divrem(&g);
        let l = d.lead().recip();
        LambdaRational { num: n.scale(&l), den: d.scale(&l) }
    }
    pub fn from_poly(p: Poly) -> Self {
        LambdaRational { num: p, den: Poly::one() }
    }
    pub fn constant(x: Q) -> Self {
        Self::from_poly(Poly::constant(x))
    }
    pub fn lambda() -> Self {
        Self::from_poly(Poly::lambda())
    }
    /// c·λ^e for any integer e.
    pub fn monomial(c: Q, e: i64) -> Self {
        if e >= 0 {
            Self::from_poly(Poly::monomial(c, e as usize))
        } else {
            Self::normalized(Poly::constant(c), Poly::monomial(Q::one(), (-e) as usize))
        }
    }
    /// a + b·λ
    pub fn linear(a: Q, b: Q) -> Self {
        Self::from_poly(Poly::from_coeffs(vec![a, b]))
    }
    pub fn num(&self) -> &Poly {
        &self.num
    }
    pub fn den(&self) -> &Poly {
        &self.den
    }
    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
    pub fn add(&self, o: &Self) -> Self {
        if self.den == o.den {
            return Self::normalized(self.num.add(&o.num), self.den.clone());
        }
        Self::normalized(self.num.mul(&o.den).add(&o.num.mul(&self.den)), self.den.mul(&o.den))
    }
    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
    pub fn neg(&self) -> Self {
        LambdaRational { num: self.num.neg(), den: self.den.clone() }
    }
    pub fn mul(&self, o: &Self) -> Self {
        Self::normalized(self.num.mul(&o.num), self.den.mul(&o.den))
    }
    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::normalized(self.den.clone(), self.num.clone()))
    }
    pub fn div(&self, o: &Self) -> Result<Self> {
        Ok(self.mul(&o.inv()?))
    }
    pub fn pow(&self, e: i64) -> Result<Self> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let k = e.unsigned_abs() as u32;
        Ok(LambdaRational { num: base.num.pow(k), den: base.den.pow(k) })
    }
    pub fn eval(&self, x: &Q) -> Result<Q> {
        let d = self.den.eval(x);
        if Zero::is_zero(&d) {
            return Err(Error::DivisionByZero);
        }
        Ok(self.num.eval(x) / d)
    }
    /// Some(c, e) when the value is c·λ^e.
    pub fn as_monomial(&self) -> Option<(Q, i64)> {
        if self.is_zero() {
            return Some((Q::zero(), 0));
        }
        let dn = self.num.degree()?;
        let dd = self.den.degree()?;
        if self.num.valuation()? != dn || self.den.valuation()? != dd {
            return None;
        }
        Some((self.num.lead() / self.den.lead(), dn as i64 - dd as i64))
    }
    /// Some(L) when the denominator is a pure power of λ.
    pub fn to_laurent(&self) -> Option<Laurent> {
        let dd = self.den.degree()?;
        if self.den.valuation()? != dd {
            return None;
        }
        let s = self.den.lead().recip();
        let mut l = Laurent::zero();
        for (i, c) in self.num.coeffs().iter().enumerate() {
            l.add_term(i as i64 - dd as i64, c * &s);
        }
        Some(l)
    }
}

impl fmt::Display for LambdaRational {
    /// "num(λ)/den(λ)" with both sides scaled to integer coefficients.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = self.num.denominator_lcm().lcm(&self.den.denominator_lcm());
        let s = qb(l);
        let (n, d) = (self.num.scale(&s), self.den.scale(&s));
        if d.degree() == Some(0) && d.lead().is_one() {
            return write!(f, "{}", n.render());
        }
        write!(f, "({})/({})", n.render(), d.render())
    }
}

impl Scalar for LambdaRational {
    fn nil() -> Self {
        LambdaRational::from_poly(Poly::zero())
    }
    fn unit() -> Self {
        LambdaRational::from_poly(Poly::one())
    }
    fn is_nil(&self) -> bool {
        self.num.is_zero()
    }
    fn from_q(x: Q) -> Self {
        LambdaRational::constant(x)
    }
    fn add_assign_ref(&mut self, o: &Self) {
        *self = self.add(o);
    }
    fn sub_assign_ref(&mut self, o: &Self) {
        *self = LambdaRational::sub(self, o);
    }
    fn mul_ref(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn neg_ref(&self) -> Self {
        self.neg()
    }
    fn scale(&self, x: &Q) -> Self {
        Self::normalized(self.num.scale(x), self.den.clone())
    }
    fn inv(&self) -> Option<Self> {
        LambdaRational::inv(self).ok()
    }
    fn to_text(&self) -> String {
        self.to_string()
    }
}

// ---------------------------------------------------------------------------
// Laurent polynomials in λ

/// Finite sum Σ c_e λ^e, the fast path for λ-graded hypertail data.
#[derive(Clone, PartialEq, Eq, Debug, Default, Hash)]
pub struct Laurent {
    terms: BTreeMap<i64, Q>,
}

impl Laurent {
    pub fn zero() -> Self {
        Laurent { terms: BTreeMap::new() }
    }
    pub fn monomial(c: Q, e: i64) -> Self {
        let mut l = Laurent::zero();
        l.add_term(e, c);
        l
    }
    pub fn constant(c: Q) -> Self {
        Laurent::monomial(c, 0)
    }
    pub fn lambda() -> Self {
        Laurent::monomial(Q::one(), 1)
    }
    pub fn add_term(&mut self, e: i64, c: Q) {
        if Zero::is_zero(&c) {
            return;
        }
        let slot = self.terms.entry(e).or_insert_with(Q::zero);
        *slot += c;
        if Zero::is_zero(slot) {
            self.terms.remove(&e);
        }
    }
    pub fn coeff(&self, e: i64) -> Q {
        self.terms.get(&e).cloned().unwrap_or_else(Q::zero)
    }
    pub fn terms(&self) -> impl Iterator<Item = (i64, &Q)> {
        self.terms.iter().map(|(e, c)| (*e, c))
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn is_monomial(&self) -> bool {
        self.terms.len() <= 1
    }
    pub fn min_exp(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }
    pub fn max_exp(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }
    /// Multiply by λ^k.
    pub fn shift(&self, k: i64) -> Laurent {
        Laurent { terms: self.terms.iter().map(|(e, c)| (e + k, c.clone())).collect() }
    }
    /// Substitute λ = x (x nonzero when negative powers occur).
    pub fn eval(&self, x: &Q) -> Q {
        self.terms.iter().fold(Q::zero(), |acc, (e, c)| acc + c * qpow(x, *e))
    }
    pub fn to_lambda_rational(&self) -> LambdaRational {
        let lo = self.min_exp().unwrap_or(0).min(0);
        let mut c = Vec::new();
        for (e, x) in &self.terms {
            let i = (e - lo) as usize;
            if c.len() <= i {
                c.resize(i + 1, Q::zero());
            }
            c[i] = x.clone();
        }
        let num = Poly::from_coeffs(c);
        LambdaRational::normalized(num, Poly::monomial(Q::one(), (-lo) as usize))
    }
}

impl Scalar for Laurent {
    fn nil() -> Self {
        Laurent::zero()
    }
    fn unit() -> Self {
        Laurent::constant(Q::one())
    }
    fn is_nil(&self) -> bool {
        self.terms.is_empty()
    }
    fn from_q(x: Q) -> Self {
        Laurent::constant(x)
    }
    fn add_assign_ref(&mut self, o: &Self) {
        for (e, c) in &o.terms {
            self.add_term(*e, c.clone());
        }
    }
    fn sub_assign_ref(&mut self, o: &Self) {
        for (e, c) in &o.terms {
            self.add_term(*e, -c);
        }
    }
    fn mul_ref(&self, o: &Self) -> Self {
        let mut r = Laurent::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                r.add_term(e1 + e2, c1 * c2);
            }
        }
        r
    }
    fn neg_ref(&self) -> Self {
        Laurent { terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect() }
    }
    fn scale(&self, x: &Q) -> Self {
        if Zero::is_zero(x) {
            return Laurent::zero();
        }
        Laurent { terms: self.terms.iter().map(|(e, c)| (*e, c * x)).collect() }
    }
    fn inv(&self) -> Option<Self> {
        if self.terms.len() != 1 {
            return None;
        }
        let (e, c) = self.terms.iter().next()?;
        Some(Laurent::monomial(c.recip(), -e))
    }
    fn to_text(&self) -> String {
        self.to_lambda_rational().to_string()
    }
}

// ---------------------------------------------------------------------------
// Rational functions of (λ, z) and their expansions

/// A rational function of z over ℚ(λ): numerator and denominator are
/// polynomials in z (ascending) with LambdaRational coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct ZRational {
    pub num: Vec<LambdaRational>,
    pub den: Vec<LambdaRational>,
}

impl ZRational {
    pub fn from_lambda(r: LambdaRational) -> Self {
        ZRational { num: vec![r], den: vec![Scalar::unit()] }
    }
    /// 1/(a + b z) with a, b in ℚ(λ).
    pub fn inv_linear(a: LambdaRational, b: LambdaRational) -> Self {
        ZRational { num: vec![Scalar::unit()], den: vec![a, b] }
    }
    pub fn mul(&self, o: &ZRational) -> ZRational {
        ZRational { num: zpoly_mul(&self.num, &o.num), den: zpoly_mul(&self.den, &o.den) }
    }
    pub fn is_z_free(&self) -> bool {
        self.num.iter().skip(1).all(|c| c.is_zero()) && self.den.iter().skip(1).all(|c| c.is_zero())
    }
}

fn zpoly_mul(a: &[LambdaRational], b: &[LambdaRational]) -> Vec<LambdaRational> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut c = vec![<LambdaRational as Scalar>::nil(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            c[i + j].add_assign_ref(&x.mul(y));
        }
    }
    c
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpandMode {
    /// Laurent expansion in λ^{-1} of a z-free rational function.
    InvLambda,
    /// Taylor expansion in z with coefficients in ℚ(λ).
    ZSeries,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expansion {
    InvLambda(Laurent),
    ZSeries(MultiSeries<LambdaRational>),
}

/// Explicit, mode-tagged expansion of a rational function.
pub fn lambda_expand(r: &ZRational, mode: ExpandMode, order: u32) -> Result<Expansion> {
    match mode {
        ExpandMode::ZSeries => expand_z_series(r, order).map(Expansion::ZSeries),
        ExpandMode::InvLambda => {
            if !r.is_z_free() {
                return Err(Error::Precondition("inv-lambda expansion needs a z-free function".into()));
            }
            let num = r.num.first().cloned().unwrap_or_else(Scalar::nil);
            let den = r.den.first().cloned().unwrap_or_else(Scalar::nil);
            let f = num.div(&den).map_err(|_| Error::SingularExpansion("zero denominator".into()))?;
            Ok(Expansion::InvLambda(expand_inv_lambda(&f, order)))
        }
    }
}

/// Taylor expansion in z up to z^order; the z^0 part of the denominator must be invertible.
pub fn expand_z_series(r: &ZRational, order: u32) -> Result<MultiSeries<LambdaRational>> {
    let vars = VariableSet::builder().var("z", order).build();
    let d0 = r.den.first().cloned().unwrap_or_else(Scalar::nil);
    if d0.is_zero() {
        return Err(Error::SingularExpansion("denominator vanishes at z = 0".into()));
    }
    let d0inv = d0.inv()?;
    let n = order as usize + 1;
    let at = |v: &[LambdaRational], i: usize| v.get(i).cloned().unwrap_or_else(Scalar::nil);
    // s = num/den: den·s = num solved term by term.
    let mut s: Vec<LambdaRational> = Vec::with_capacity(n);
    for k in 0..n {
        let mut acc = at(&r.num, k);
        for j in 1..=k {
            let dj = at(&r.den, j);
            if !dj.is_zero() {
                acc.sub_assign_ref(&dj.mul(&s[k - j]));
            }
        }
        s.push(acc.mul(&d0inv));
    }
    let mut out = MultiSeries::zero(&vars);
    for (k, c) in s.into_iter().enumerate() {
        out.add_term(vec![k as i32], c);
    }
    Ok(out)
}

/// Laurent expansion of r in λ^{-1}: the leading power λ^{deg num - deg den}
/// followed by `order` further terms.
pub fn expand_inv_lambda(r: &LambdaRational, order: u32) -> Laurent {
    if r.is_zero() {
        return Laurent::zero();
    }
    // Work in x = 1/λ: num(λ) = λ^n N(x), den(λ) = λ^m D(x) with D(0) ≠ 0.
    let n = r.num().degree().unwrap_or(0);
    let m = r.den().degree().unwrap_or(0);
    let nr: Vec<Q> = r.num().coeffs().iter().rev().cloned().collect();
    let dr: Vec<Q> = r.den().coeffs().iter().rev().cloned().collect();
    let d0inv = dr[0].recip();
    let len = order as usize + 1;
    let mut s: Vec<Q> = Vec::with_capacity(len);
    for k in 0..len {
        let mut acc = nr.get(k).cloned().unwrap_or_else(Q::zero);
        for j in 1..=k.min(dr.len() - 1) {
            acc -= &dr[j] * &s[k - j];
        }
        s.push(acc * &d0inv);
    }
    let top = n as i64 - m as i64;
    let mut out = Laurent::zero();
    for (k, c) in s.into_iter().enumerate() {
        out.add_term(top - k as i64, c);
    }
    out
}
