//! Truncated multivariate power series over a pluggable scalar ring.
//!
//! Every variable carries an upper truncation cap. A variable may be declared
//! Laurent with a finite floor (negative exponents allowed down to the floor)
//! or nilpotent (exponents at or above the nilpotency degree vanish).
//! Truncation involving Laurent variables is exact only when the caps leave
//! room for the negative shifts that later products introduce.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde_json::{Map, Value};

use crate::coeffring::{binomial_general, factorial, q, qb, qi, LambdaRational, Laurent, Poly, Scalar, Q};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarSpec {
    pub name: String,
    pub cap: i32,
    pub floor: i32,
    pub nil: Option<i32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableSet {
    vars: Vec<VarSpec>,
}

#[derive(Default)]
pub struct VariableSetBuilder {
    vars: Vec<VarSpec>,
}

impl VariableSetBuilder {
    pub fn var(mut self, name: &str, cap: u32) -> Self {
        self.vars.push(VarSpec { name: name.into(), cap: cap as i32, floor: 0, nil: None });
        self
    }
    /// Laurent variable with exponents in [floor, cap]; floor <= 0.
    pub fn laurent(mut self, name: &str, cap: i32, floor: i32) -> Self {
        assert!(floor <= 0 && floor <= cap, "bad Laurent range for {name}");
        self.vars.push(VarSpec { name: name.into(), cap, floor, nil: None });
        self
    }
    /// Variable with name^degree = 0.
    pub fn nilpotent(mut self, name: &str, degree: u32) -> Self {
        assert!(degree >= 1);
        self.vars.push(VarSpec {
            name: name.into(),
            cap: degree as i32 - 1,
            floor: 0,
            nil: Some(degree as i32),
        });
        self
    }
    pub fn build(self) -> Arc<VariableSet> {
        for (i, v) in self.vars.iter().enumerate() {
            assert!(v.cap >= v.floor, "negative cap for {}", v.name);
            assert!(
                self.vars[..i].iter().all(|w| w.name != v.name),
                "duplicate variable {}",
                v.name
            );
            if let Some(n) = v.nil {
                assert!(n <= v.cap + 1);
            }
        }
        Arc::new(VariableSet { vars: self.vars })
    }
}

impl VariableSet {
    pub fn builder() -> VariableSetBuilder {
        VariableSetBuilder::default()
    }
    pub fn len(&self) -> usize {
        self.vars.len()
    }
    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }
    pub fn specs(&self) -> &[VarSpec] {
        &self.vars
    }
    pub fn index(&self, name: &str) -> Result<usize> {
        self.vars
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.into()))
    }
    fn admits_top(&self, e: &[i32]) -> bool {
        e.iter().zip(&self.vars).all(|(x, v)| *x <= v.cap && v.nil.is_none_or(|n| *x < n))
    }
    fn check_floor(&self, e: &[i32]) {
        for (x, v) in e.iter().zip(&self.vars) {
            assert!(*x >= v.floor, "exponent {} of {} below its floor {}", x, v.name, v.floor);
        }
    }
    /// Upper bound on how many factors of a topologically nilpotent series
    /// can multiply to something nonzero.
    fn power_bound(&self) -> i32 {
        self.vars.iter().map(|v| v.cap - v.floor).sum::<i32>() + 1
    }
}

/// Sparse truncated series; zero coefficients are never stored.
#[derive(Clone, PartialEq)]
pub struct MultiSeries<S: Scalar> {
    vars: Arc<VariableSet>,
    coeffs: BTreeMap<Vec<i32>, S>,
}

impl<S: Scalar> fmt::Debug for MultiSeries<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}

fn same_vars(a: &Arc<VariableSet>, b: &Arc<VariableSet>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

impl<S: Scalar> MultiSeries<S> {
    pub fn zero(vars: &Arc<VariableSet>) -> Self {
        MultiSeries { vars: vars.clone(), coeffs: BTreeMap::new() }
    }
    pub fn constant(vars: &Arc<VariableSet>, c: S) -> Self {
        let mut s = Self::zero(vars);
        s.add_term(vec![0; vars.len()], c);
        s
    }
    pub fn one(vars: &Arc<VariableSet>) -> Self {
        Self::constant(vars, S::unit())
    }
    pub fn var(vars: &Arc<VariableSet>, name: &str) -> Result<Self> {
        let i = vars.index(name)?;
        let mut e = vec![0; vars.len()];
        e[i] = 1;
        let mut s = Self::zero(vars);
        s.add_term(e, S::unit());
        Ok(s)
    }
    pub fn monomial(vars: &Arc<VariableSet>, exps: Vec<i32>, c: S) -> Self {
        let mut s = Self::zero(vars);
        s.add_term(exps, c);
        s
    }
    /// Univariate series from ascending coefficients in the named variable.
    pub fn from_coeffs(vars: &Arc<VariableSet>, name: &str, cs: &[S]) -> Result<Self> {
        let i = vars.index(name)?;
        let mut s = Self::zero(vars);
        for (k, c) in cs.iter().enumerate() {
            let mut e = vec![0; vars.len()];
            e[i] = k as i32;
            s.add_term(e, c.clone());
        }
        Ok(s)
    }
    pub fn vars(&self) -> &Arc<VariableSet> {
        &self.vars
    }
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i32>, &S)> {
        self.coeffs.iter()
    }
    pub fn coeff(&self, e: &[i32]) -> S {
        self.coeffs.get(e).cloned().unwrap_or_else(S::nil)
    }
    pub fn constant_term(&self) -> S {
        self.coeff(&vec![0; self.vars.len()])
    }
    /// Adds c·x^e; terms beyond a cap or nilpotency degree are dropped.
    pub fn add_term(&mut self, e: Vec<i32>, c: S) {
        assert_eq!(e.len(), self.vars.len(), "exponent vector length");
        if c.is_nil() || !self.vars.admits_top(&e) {
            return;
        }
        self.vars.check_floor(&e);
        match self.coeffs.get_mut(&e) {
            Some(slot) => {
                slot.add_assign_ref(&c);
                if slot.is_nil() {
                    self.coeffs.remove(&e);
                }
            }
            None => {
                self.coeffs.insert(e, c);
            }
        }
    }

    fn check(&self, o: &Self) -> Result<()> {
        if same_vars(&self.vars, &o.vars) {
            Ok(())
        } else {
            Err(Error::VariableMismatch)
        }
    }
    pub fn try_add(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let mut r = self.clone();
        for (e, c) in &o.coeffs {
            r.add_term(e.clone(), c.clone());
        }
        Ok(r)
    }
    pub fn try_sub(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let mut r = self.clone();
        for (e, c) in &o.coeffs {
            r.add_term(e.clone(), c.neg_ref());
        }
        Ok(r)
    }
    pub fn neg(&self) -> Self {
        self.map(|c| c.neg_ref())
    }
    pub fn scale(&self, x: &Q) -> Self {
        self.map(|c| c.scale(x))
    }
    pub fn scale_by(&self, x: &S) -> Self {
        self.map(|c| c.mul_ref(x))
    }
    pub fn map(&self, f: impl Fn(&S) -> S) -> Self {
        let mut r = Self::zero(&self.vars);
        for (e, c) in &self.coeffs {
            r.add_term(e.clone(), f(c));
        }
        r
    }
    /// Coefficient-wise change of scalar ring over the same variables.
    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> MultiSeries<T> {
        let mut r = MultiSeries::zero(&self.vars);
        for (e, c) in &self.coeffs {
            r.add_term(e.clone(), f(c));
        }
        r
    }
    /// Same terms viewed in another variable set with identical variable order.
    pub fn recast(&self, vars: &Arc<VariableSet>) -> Result<Self> {
        if vars.len() != self.vars.len() {
            return Err(Error::VariableMismatch);
        }
        let mut r = Self::zero(vars);
        for (e, c) in &self.coeffs {
            r.add_term(e.clone(), c.clone());
        }
        Ok(r)
    }

    pub fn try_mul(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let n = self.vars.len();
        let specs = &self.vars.vars;
        let mut out: BTreeMap<Vec<i32>, S> = BTreeMap::new();
        let mut key = vec![0i32; n];
        for (e1, c1) in &self.coeffs {
            'inner: for (e2, c2) in &o.coeffs {
                for i in 0..n {
                    let x = e1[i] + e2[i];
                    let v = &specs[i];
                    if x > v.cap || v.nil.is_some_and(|m| x >= m) {
                        continue 'inner;
                    }
                    assert!(x >= v.floor, "product exponent of {} below its floor {}", v.name, v.floor);
                    key[i] = x;
                }
                let p = c1.mul_ref(c2);
                if let Some(slot) = out.get_mut(&key) {
                    slot.add_assign_ref(&p);
                } else {
                    out.insert(key.clone(), p);
                }
            }
        }
        out.retain(|_, c| !c.is_nil());
        Ok(MultiSeries { vars: self.vars.clone(), coeffs: out })
    }

    /// True when every term has a positive exponent somewhere, so that high
    /// powers vanish under truncation.
    fn is_topologically_nilpotent(&self) -> bool {
        self.coeffs.keys().all(|e| e.iter().any(|x| *x > 0))
    }

    fn power_series_in(&self, coefs: impl Fn(usize) -> Option<Q>) -> Result<Self> {
        if !self.is_topologically_nilpotent() {
            return Err(Error::Precondition("series argument must have zero constant part".into()));
        }
        let mut result = Self::zero(&self.vars);
        let mut p = Self::one(&self.vars);
        let bound = self.vars.power_bound() as usize;
        for k in 0..=bound {
            if let Some(c) = coefs(k) {
                if !c.is_zero() {
                    result = result.try_add(&p.scale(&c))?;
                }
            }
            p = p.try_mul(self)?;
            if p.is_zero() {
                break;
            }
        }
        Ok(result)
    }

    pub fn exp(&self) -> Result<Self> {
        self.power_series_in(|k| Some(Q::new(One::one(), factorial(k as u64))))
    }

    /// log(1 + f)
    pub fn log_one_plus(&self) -> Result<Self> {
        self.power_series_in(|k| {
            if k == 0 {
                None
            } else {
                let s = if k % 2 == 1 { 1 } else { -1 };
                Some(q(s, k as i64))
            }
        })
    }

    /// f^e for any integer e; e < 0 needs an invertible constant term.
    pub fn int_pow(&self, e: i64) -> Result<Self> {
        if e >= 0 {
            let mut r = Self::one(&self.vars);
            let mut base = self.clone();
            let mut k = e as u64;
            while k > 0 {
                if k & 1 == 1 {
                    r = r.try_mul(&base)?;
                }
                k >>= 1;
                if k > 0 {
                    base = base.try_mul(&base)?;
                }
            }
            return Ok(r);
        }
        let c = self.constant_term();
        let cinv = c
            .inv()
            .ok_or_else(|| Error::Precondition("constant term is not invertible".into()))?;
        // f = c(1 + g)
        let g = self.scale_by(&cinv).try_sub(&Self::one(&self.vars))?;
        let ex = qi(e);
        let series = g.power_series_in(|k| Some(binomial_general(&ex, k as u64)))?;
        let ce = pow_scalar(&cinv, (-e) as u64);
        Ok(series.scale_by(&ce))
    }

    pub fn inverse(&self) -> Result<Self> {
        self.int_pow(-1)
    }

    /// Substitute var := g; f must have nonnegative exponents in var and g must be topologically nilpotent.
    pub fn compose(&self, var: &str, g: &Self) -> Result<Self> {
        self.check(g)?;
        if !g.is_zero() && !g.is_topologically_nilpotent() {
            return Err(Error::Precondition("substituted series must have zero constant part".into()));
        }
        let i = self.vars.index(var)?;
        let mut by_power: BTreeMap<i32, Self> = BTreeMap::new();
        for (e, c) in &self.coeffs {
            if e[i] < 0 {
                return Err(Error::Precondition(format!("negative power of {var} cannot be composed")));
            }
            let mut e0 = e.clone();
            e0[i] = 0;
            by_power.entry(e[i]).or_insert_with(|| Self::zero(&self.vars)).add_term(e0, c.clone());
        }
        let mut result = Self::zero(&self.vars);
        let mut gp = Self::one(&self.vars);
        let mut cur = 0;
        for (k, part) in by_power {
            while cur < k {
                gp = gp.try_mul(g)?;
                cur += 1;
            }
            if gp.is_zero() {
                break;
            }
            result = result.try_add(&part.try_mul(&gp)?)?;
        }
        Ok(result)
    }

    /// Keep nonnegative powers of var (var^0 included).
    pub fn plus_truncate(&self, var: &str) -> Result<Self> {
        let i = self.vars.index(var)?;
        Ok(self.filter(|e| e[i] >= 0))
    }

    /// Keep only terms with nonnegative powers of both variables.
    pub fn plus_truncate2(&self, a: &str, b: &str) -> Result<Self> {
        let (i, j) = (self.vars.index(a)?, self.vars.index(b)?);
        Ok(self.filter(|e| e[i] >= 0 && e[j] >= 0))
    }

    pub fn filter(&self, keep: impl Fn(&[i32]) -> bool) -> Self {
        MultiSeries {
            vars: self.vars.clone(),
            coeffs: self.coeffs.iter().filter(|(e, _)| keep(e)).map(|(e, c)| (e.clone(), c.clone())).collect(),
        }
    }

    /// Terms with var^k, returned with that exponent reset to zero.
    pub fn coeff_of(&self, var: &str, k: i32) -> Result<Self> {
        let i = self.vars.index(var)?;
        let mut r = Self::zero(&self.vars);
        for (e, c) in &self.coeffs {
            if e[i] == k {
                let mut e0 = e.clone();
                e0[i] = 0;
                r.add_term(e0, c.clone());
            }
        }
        Ok(r)
    }

    /// Multiply by var^k.
    pub fn shift(&self, var: &str, k: i32) -> Result<Self> {
        let i = self.vars.index(var)?;
        let mut r = Self::zero(&self.vars);
        for (e, c) in &self.coeffs {
            let mut e1 = e.clone();
            e1[i] += k;
            r.add_term(e1, c.clone());
        }
        Ok(r)
    }

    /// Substitute a scalar value for var (exact since exponents are bounded).
    pub fn specialize(&self, var: &str, x: &S) -> Result<Self> {
        let i = self.vars.index(var)?;
        let xinv = x.inv();
        let mut r = Self::zero(&self.vars);
        for (e, c) in &self.coeffs {
            let k = e[i];
            let f = if k >= 0 {
                pow_scalar(x, k as u64)
            } else {
                let xi = xinv.clone().ok_or(Error::DivisionByZero)?;
                pow_scalar(&xi, (-k) as u64)
            };
            let mut e0 = e.clone();
            e0[i] = 0;
            r.add_term(e0, c.mul_ref(&f));
        }
        Ok(r)
    }

    pub fn max_exponent(&self, var: &str) -> Result<Option<i32>> {
        let i = self.vars.index(var)?;
        Ok(self.coeffs.keys().map(|e| e[i]).max())
    }

    /// Deterministic JSON map {monomial: scalar}, graded lexicographic order.
    pub fn to_json(&self) -> Value {
        let mut keys: Vec<&Vec<i32>> = self.coeffs.keys().collect();
        keys.sort_by(|a, b| {
            let da: i32 = a.iter().sum();
            let db: i32 = b.iter().sum();
            da.cmp(&db).then_with(|| b.cmp(a))
        });
        let mut m = Map::new();
        for e in keys {
            m.insert(monomial_string(&self.vars, e), Value::String(self.coeffs[e].to_text()));
        }
        Value::Object(m)
    }
}

pub fn monomial_string(vars: &VariableSet, e: &[i32]) -> String {
    let parts: Vec<String> = e
        .iter()
        .zip(vars.specs())
        .filter(|(x, _)| **x != 0)
        .map(|(x, v)| if *x == 1 { v.name.clone() } else { format!("{}^{}", v.name, x) })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

pub fn pow_scalar<S: Scalar>(x: &S, k: u64) -> S {
    let mut r = S::unit();
    for _ in 0..k {
        r = r.mul_ref(x);
    }
    r
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl<S: Scalar> std::ops::$tr<&MultiSeries<S>> for &MultiSeries<S> {
            type Output = MultiSeries<S>;
            fn $m(self, o: &MultiSeries<S>) -> MultiSeries<S> {
                self.$f(o).expect("series over different variable sets")
            }
        }
    };
}
binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);

// ---------------------------------------------------------------------------
// Tree function and Lagrange inversion

/// T(x) = Σ n^{n-1} x^n / n! in the named variable.
pub fn tree_function_in<S: Scalar>(vars: &Arc<VariableSet>, var: &str) -> Result<MultiSeries<S>> {
    let i = vars.index(var)?;
    let cap = vars.specs()[i].cap.max(0) as u64;
    let mut cs = vec![S::nil()];
    for n in 1..=cap {
        let c = Q::new(num_traits::pow(num_bigint::BigInt::from(n), (n - 1) as usize), factorial(n));
        cs.push(S::from_q(c));
    }
    MultiSeries::from_coeffs(vars, var, &cs)
}

/// T(x) truncated at x^cap, in a fresh one-variable set.
pub fn tree_function(cap: u32) -> MultiSeries<Q> {
    let vars = VariableSet::builder().var("x", cap).build();
    tree_function_in(&vars, "x").expect("x is declared")
}

/// [x^k] F(T(x)) computed as [y^k] (1 - y) F(y) e^{k y}.
pub fn lagrange_coeff<S: Scalar>(f: &MultiSeries<S>, k: u32) -> Result<S> {
    if f.vars().len() != 1 {
        return Err(Error::Precondition("lagrange_coeff needs a one-variable series".into()));
    }
    let spec = &f.vars().specs()[0];
    if spec.cap < k as i32 {
        return Err(Error::InsufficientOrder(format!("need order {k}, series has {}", spec.cap)));
    }
    if k == 0 {
        return Ok(f.coeff(&[0]));
    }
    let mut acc = S::nil();
    // [y^k] (1 - y) F(y) e^{k y} = Σ_j (F_j - F_{j-1}) k^{k-j}/(k-j)!
    for j in 0..=k as i32 {
        let mut c = f.coeff(&[j]);
        if j >= 1 {
            c.sub_assign_ref(&f.coeff(&[j - 1]));
        }
        let r = (k as i32 - j) as u64;
        let w = Q::new(num_traits::pow(num_bigint::BigInt::from(k), r as usize), factorial(r));
        acc.add_assign_ref(&c.scale(&w));
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Elementary fractions in (λ, z)

/// c_m with 1/∏_{m=1}^{d}(λ+mz) = Σ_m c_m/(λ+mz).
pub fn partial_fractions_lambda(d: u32) -> Vec<(u32, LambdaRational)> {
    assert!(d >= 1, "partial fractions need d >= 1");
    (1..=d)
        .map(|m| {
            let sign = if (d - m) % 2 == 0 { 1 } else { -1 };
            let num = num_traits::pow(num_bigint::BigInt::from(m), (d - 1) as usize) * sign;
            let den = factorial((m - 1) as u64) * factorial((d - m) as u64);
            (m, LambdaRational::monomial(Q::new(num, den), -(d as i64 - 1)))
        })
        .collect()
}

/// Σ_{(m,j)} c_{m,j}/(λ+mz)^j + Σ_a p_a z^a with Laurent-in-λ coefficients.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct PoleSum {
    poles: BTreeMap<(u32, u32), Laurent>,
    poly: BTreeMap<u32, Laurent>,
}

impl PoleSum {
    pub fn zero() -> Self {
        PoleSum::default()
    }
    pub fn constant(c: Laurent) -> Self {
        let mut p = PoleSum::zero();
        p.add_poly(0, c);
        p
    }
    /// c/(λ+mz)^j
    pub fn pole(m: u32, j: u32, c: Laurent) -> Self {
        let mut p = PoleSum::zero();
        p.add_pole(m, j, c);
        p
    }
    /// 1/∏_{m=1}^{d}(λ+mz); d = 0 gives 1.
    pub fn inverse_pochhammer(d: u32) -> Self {
        if d == 0 {
            return PoleSum::constant(Scalar::unit());
        }
        let mut p = PoleSum::zero();
        for (m, c) in partial_fractions_lambda(d) {
            p.add_pole(m, 1, c.to_laurent().expect("monomial coefficient"));
        }
        p
    }
    pub fn add_pole(&mut self, m: u32, j: u32, c: Laurent) {
        assert!(m >= 1 && j >= 1);
        add_into(&mut self.poles, (m, j), c);
    }
    pub fn add_poly(&mut self, a: u32, c: Laurent) {
        add_into(&mut self.poly, a, c);
    }
    pub fn poles(&self) -> impl Iterator<Item = (&(u32, u32), &Laurent)> {
        self.poles.iter()
    }
    pub fn poly(&self) -> impl Iterator<Item = (&u32, &Laurent)> {
        self.poly.iter()
    }
    pub fn pole_coeff(&self, m: u32, j: u32) -> Laurent {
        self.poles.get(&(m, j)).cloned().unwrap_or_default()
    }
    pub fn is_zero(&self) -> bool {
        self.poles.is_empty() && self.poly.is_empty()
    }
    pub fn add(&self, o: &PoleSum) -> PoleSum {
        let mut r = self.clone();
        for (k, c) in &o.poles {
            add_into(&mut r.poles, *k, c.clone());
        }
        for (k, c) in &o.poly {
            add_into(&mut r.poly, *k, c.clone());
        }
        r
    }
    pub fn scale(&self, c: &Laurent) -> PoleSum {
        let mut r = PoleSum::zero();
        for (k, x) in &self.poles {
            add_into(&mut r.poles, *k, x.mul_ref(c));
        }
        for (k, x) in &self.poly {
            add_into(&mut r.poly, *k, x.mul_ref(c));
        }
        r
    }
    /// Multiply by z: z/(λ+mz)^j = (1/m)(1/(λ+mz)^{j-1} - λ/(λ+mz)^j).
    pub fn mul_z(&self) -> PoleSum {
        let mut r = PoleSum::zero();
        for (a, c) in &self.poly {
            r.add_poly(a + 1, c.clone());
        }
        for (&(m, j), c) in &self.poles {
            let inv_m = q(1, m as i64);
            let head = c.scale(&inv_m);
            if j == 1 {
                r.add_poly(0, head.clone());
            } else {
                r.add_pole(m, j - 1, head.clone());
            }
            r.add_pole(m, j, head.shift(1).neg_ref());
        }
        r
    }
    /// One application of [z^{-1} ·]₊.
    pub fn difference(&self) -> PoleSum {
        let mut r = PoleSum::zero();
        for (a, c) in &self.poly {
            if *a >= 1 {
                r.add_poly(a - 1, c.clone());
            }
        }
        for (&(m, j), c) in &self.poles {
            // (A^{-j} - λ^{-j})/z = -m Σ_{s=1}^{j} λ^{-(j-s+1)} A^{-s},  A = λ + m z
            let base = c.scale(&qi(-(m as i64)));
            for s in 1..=j {
                r.add_pole(m, s, base.shift(-((j - s + 1) as i64)));
            }
        }
        r
    }
    /// Expansion as a series in z (Laurent coefficients in λ).
    pub fn to_series(&self, vars: &Arc<VariableSet>, z: &str) -> Result<MultiSeries<Laurent>> {
        let iz = vars.index(z)?;
        let cap = vars.specs()[iz].cap;
        let n = vars.len();
        let mut out = MultiSeries::zero(vars);
        for (a, c) in &self.poly {
            let mut e = vec![0; n];
            e[iz] = *a as i32;
            out.add_term(e, c.clone());
        }
        for (&(m, j), c) in &self.poles {
            // (λ+mz)^{-j} = Σ_a (-1)^a binom(j+a-1, a) m^a z^a λ^{-j-a}
            for a in 0..=cap.max(0) {
                let b = crate::coeffring::binomial((j as i64) + a as i64 - 1, a as i64);
                let sign = if a % 2 == 0 { qi(1) } else { qi(-1) };
                let w = b * sign * qb(num_traits::pow(num_bigint::BigInt::from(m), a as usize));
                let mut e = vec![0; n];
                e[iz] = a;
                out.add_term(e, c.shift(-(j as i64) - a as i64).scale(&w));
            }
        }
        Ok(out)
    }
    /// Value at a rational z, as a rational function of λ.
    pub fn eval_at(&self, z: &Q) -> Result<LambdaRational> {
        let mut acc = LambdaRational::constant(Q::zero());
        for (a, c) in &self.poly {
            let t = c.to_lambda_rational().scale(&crate::coeffring::qpow(z, *a as i64));
            acc = acc.add(&t);
        }
        for (&(m, j), c) in &self.poles {
            let lin = LambdaRational::from_poly(Poly::from_coeffs(vec![qi(m as i64) * z, Q::one()]));
            let t = c.to_lambda_rational().mul(&lin.pow(-(j as i64))?);
            acc = acc.add(&t);
        }
        Ok(acc)
    }
}

fn add_into<K: Ord + Copy>(map: &mut BTreeMap<K, Laurent>, k: K, c: Laurent) {
    if c.is_zero() {
        return;
    }
    let slot = map.entry(k).or_default();
    slot.add_assign_ref(&c);
    if slot.is_zero() {
        map.remove(&k);
    }
}

/// Apply [z^{-1} ·]₊ `power` times.
pub fn difference_operator_apply(f: &PoleSum, power: u32) -> PoleSum {
    (0..power).fold(f.clone(), |acc, _| acc.difference())
}

impl Zero for PoleSum {
    fn zero() -> Self {
        PoleSum::default()
    }
    fn is_zero(&self) -> bool {
        PoleSum::is_zero(self)
    }
}

impl std::ops::Add for PoleSum {
    type Output = PoleSum;
    fn add(self, o: PoleSum) -> PoleSum {
        PoleSum::add(&self, &o)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zvars(cap: u32) -> Arc<VariableSet> {
        VariableSet::builder().var("z", cap).build()
    }

    fn poly(vars: &Arc<VariableSet>, cs: &[i64]) -> MultiSeries<Q> {
        let v: Vec<Q> = cs.iter().map(|c| qi(*c)).collect();
        MultiSeries::from_coeffs(vars, "z", &v).unwrap()
    }

    #[test]
    fn products() {
        let v = zvars(5);
        assert_eq!(&poly(&v, &[1, 1]) * &poly(&v, &[1, -1]), poly(&v, &[1, 0, -1]));
        let f = poly(&v, &[3, 0, 2]);
        assert_eq!(&f * &MultiSeries::one(&v), f);
        let v4 = zvars(4);
        assert_eq!(&poly(&v4, &[1, 1, 1, 1, 1]) * &poly(&v4, &[1, -1]), MultiSeries::one(&v4));
    }

    #[test]
    fn mismatched_variables_are_rejected() {
        let a = poly(&zvars(3), &[1, 1]);
        let b = poly(&zvars(4), &[1, 1]);
        assert_eq!(a.try_mul(&b), Err(Error::VariableMismatch));
    }

    #[test]
    fn exp_log_pow() {
        let v = zvars(3);
        let z = MultiSeries::<Q>::var(&v, "z").unwrap();
        let e = z.exp().unwrap();
        let expect = MultiSeries::from_coeffs(&v, "z", &[qi(1), qi(1), q(1, 2), q(1, 6)]).unwrap();
        assert_eq!(e, expect);
        let g = poly(&v, &[1, -1]).int_pow(-1).unwrap();
        assert_eq!(g, poly(&v, &[1, 1, 1, 1]));
        let back = (&e - &MultiSeries::one(&v)).log_one_plus().unwrap();
        assert_eq!(back, z);
        assert!(MultiSeries::<Q>::one(&v).exp().is_err());
        assert!(MultiSeries::<Q>::zero(&v).int_pow(-1).is_err());
    }

    #[test]
    fn composition() {
        let v = zvars(3);
        let z2 = poly(&v, &[0, 0, 1]);
        let g = poly(&v, &[0, 1, 1]);
        assert_eq!(z2.compose("z", &g).unwrap(), poly(&v, &[0, 0, 1, 2]));
        let f = poly(&v, &[7, 2, 5]);
        assert_eq!(f.compose("z", &MultiSeries::zero(&v)).unwrap(), poly(&v, &[7]));
        assert!(f.compose("z", &poly(&v, &[1, 1])).is_err());
    }

    #[test]
    fn tree_function_identities() {
        let t = tree_function(3);
        assert_eq!(t.coeff(&[1]), qi(1));
        assert_eq!(t.coeff(&[2]), qi(1));
        assert_eq!(t.coeff(&[3]), q(3, 2));

        let t10 = tree_function(10);
        let x = MultiSeries::var(t10.vars(), "x").unwrap();
        assert_eq!(&x * &t10.exp().unwrap(), t10);

        let one = MultiSeries::one(t10.vars());
        let ratio = &t10 * &(&one - &t10).inverse().unwrap();
        assert_eq!(ratio.coeff(&[3]), q(9, 2));

        // T(z e^{-z}) = z
        let vars = VariableSet::builder().var("x", 8).var("z", 8).build();
        let tx: MultiSeries<Q> = tree_function_in(&vars, "x").unwrap();
        let z = MultiSeries::var(&vars, "z").unwrap();
        let arg = &z * &z.neg().exp().unwrap();
        assert_eq!(tx.compose("x", &arg).unwrap(), z);
    }

    #[test]
    fn lagrange_examples() {
        let v = zvars(6);
        let y = poly(&v, &[0, 1]);
        assert_eq!(lagrange_coeff(&y, 4).unwrap(), q(8, 3));
        assert_eq!(lagrange_coeff(&MultiSeries::<Q>::one(&v), 0).unwrap(), qi(1));
        let g = &y * &poly(&v, &[1, -1]).inverse().unwrap();
        assert_eq!(lagrange_coeff(&g, 2).unwrap(), qi(2));
        assert!(lagrange_coeff(&y, 7).is_err());
    }

    #[test]
    fn plus_truncation() {
        let v = VariableSet::builder().laurent("z", 4, -2).build();
        let mut f = MultiSeries::<Q>::zero(&v);
        f.add_term(vec![-1], qi(1));
        f.add_term(vec![0], qi(2));
        f.add_term(vec![1], qi(3));
        let t = f.plus_truncate("z").unwrap();
        let mut expect = MultiSeries::zero(&v);
        expect.add_term(vec![0], qi(2));
        expect.add_term(vec![1], qi(3));
        assert_eq!(t, expect);
        assert_eq!(t.plus_truncate("z").unwrap(), t);
    }

    #[test]
    fn nilpotent_variable_truncates() {
        let v = VariableSet::builder().var("z", 5).nilpotent("H", 4).build();
        let h = MultiSeries::<Q>::var(&v, "H").unwrap();
        assert!(h.int_pow(4).unwrap().is_zero());
        assert!(!h.int_pow(3).unwrap().is_zero());
    }

    #[test]
    fn json_is_graded_lex() {
        let v = VariableSet::builder().var("q", 3).var("z", 3).build();
        let mut f = MultiSeries::<Q>::zero(&v);
        f.add_term(vec![0, 2], qi(5));
        f.add_term(vec![1, 1], q(1, 2));
        f.add_term(vec![0, 0], qi(1));
        f.add_term(vec![2, 0], qi(-1));
        f.add_term(vec![0, 1], qi(7));
        let s = f.to_json().to_string();
        assert_eq!(s, r#"{"1":"1","z":"7","q^2":"-1","q*z":"1/2","z^2":"5"}"#);
    }

    #[test]
    fn partial_fraction_coefficients() {
        let p1 = partial_fractions_lambda(1);
        assert_eq!(p1, vec![(1, LambdaRational::constant(qi(1)))]);
        let p2 = partial_fractions_lambda(2);
        assert_eq!(p2[0], (1, LambdaRational::monomial(qi(-1), -1)));
        assert_eq!(p2[1], (2, LambdaRational::monomial(qi(2), -1)));
    }

    #[test]
    fn partial_fractions_recombine() {
        for d in 1..=8u32 {
            let ps = PoleSum::inverse_pochhammer(d);
            for zv in [q(1, 3), qi(2), q(-5, 7)] {
                let lhs = ps.eval_at(&zv).unwrap();
                let mut prod = LambdaRational::constant(qi(1));
                for m in 1..=d {
                    prod = prod.mul(&LambdaRational::linear(qi(m as i64) * &zv, qi(1)));
                }
                assert_eq!(lhs, prod.inv().unwrap(), "d={d}");
            }
        }
    }

    #[test]
    fn difference_operator_rules() {
        let l = |c: i64, e: i64| Laurent::monomial(qi(c), e);
        let f = PoleSum::pole(3, 1, l(1, 0));
        assert_eq!(difference_operator_apply(&f, 1), PoleSum::pole(3, 1, l(-3, -1)));
        assert_eq!(difference_operator_apply(&f, 0), f);
        for m in 1..5u32 {
            let g = PoleSum::pole(m, 1, l(1, 0));
            let expect = PoleSum::pole(m, 1, l((m * m) as i64, -2));
            assert_eq!(difference_operator_apply(&g, 2), expect);
        }
    }

    #[test]
    fn difference_matches_series_truncation() {
        let vars = VariableSet::builder().laurent("z", 8, -1).build();
        let mut f = PoleSum::pole(2, 3, Laurent::monomial(q(3, 2), -1));
        f.add_pole(1, 1, Laurent::monomial(qi(-4), 2));
        f.add_poly(2, Laurent::monomial(qi(5), -3));
        let direct = f.to_series(&vars, "z").unwrap().shift("z", -1).unwrap().plus_truncate("z").unwrap();
        let via = f.difference().to_series(&vars, "z").unwrap();
        assert_eq!(direct.filter(|e| e[0] < 8), via.filter(|e| e[0] < 8));
        let zf = f.mul_z().to_series(&vars, "z").unwrap();
        let shifted = f.to_series(&vars, "z").unwrap().shift("z", 1).unwrap();
        assert_eq!(zf, shifted);
    }
}
