//! Genus-0 torus localization on ℙᴺ.
//!
//! Fixed loci of M̄_{0,n}(ℙᴺ, d) are indexed by trees whose vertices sit at
//! torus-fixed points and whose edges are degree-k covers of coordinate lines.
//! Each tree contributes edge tangent weights, ψ-integrals over the vertex
//! moduli, the restricted insertions and the twisting factor 1/e(E).

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::coeffring::{binomial, expand_inv_lambda, factorial, harmonic, inv_factorial, q, q_str, qi, qpow, LambdaRational, Laurent, Scalar, Q};
use crate::error::{Error, Result};
use crate::hypertail::{hypertail, HypertailCaps, HypertailSeries, Locus};
use crate::series::{MultiSeries, VariableSet};

/// Specialized torus weights α₀, …, α_N.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusWeights {
    weights: Vec<Q>,
}

impl TorusWeights {
    pub fn new(weights: Vec<Q>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::Precondition("need at least two fixed points".into()));
        }
        for i in 0..weights.len() {
            for j in 0..i {
                if weights[i] == weights[j] {
                    return Err(Error::Precondition("torus weights must be distinct".into()));
                }
            }
        }
        Ok(TorusWeights { weights })
    }
    /// Powers of 7: no weighted average of two of them hits a third for degrees below 7.
    pub fn standard(n_dim: usize) -> Self {
        TorusWeights { weights: (0..=n_dim).map(|i| qpow(&qi(7), i as i64)).collect() }
    }
    pub fn dim(&self) -> usize {
        self.weights.len() - 1
    }
    pub fn weights(&self) -> &[Q] {
        &self.weights
    }
    pub fn get(&self, i: usize) -> &Q {
        &self.weights[i]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TwistSign {
    /// v ↦ λv
    Plus,
    /// v ↦ λ⁻¹v
    Minus,
}

/// O(k) with a fiberwise scaling.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TwistSpec {
    pub bundle_degree: i64,
    pub sign: TwistSign,
    pub uses_lambda: bool,
}

impl TwistSpec {
    pub fn new(bundle_degree: i64, sign: TwistSign) -> Self {
        TwistSpec { bundle_degree, sign, uses_lambda: true }
    }
    /// Accepts "O(-5)-", "O(0)+", "O(5)" (no λ).
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        let bad = || Error::Parse(format!("twist must look like O(k)+ or O(k)-, got {t:?}"));
        let rest = t.strip_prefix("O(").ok_or_else(bad)?;
        let close = rest.find(')').ok_or_else(bad)?;
        let k: i64 = rest[..close].trim().parse().map_err(|_| bad())?;
        match &rest[close + 1..] {
            "+" => Ok(TwistSpec::new(k, TwistSign::Plus)),
            "-" => Ok(TwistSpec::new(k, TwistSign::Minus)),
            "" => Ok(TwistSpec { bundle_degree: k, sign: TwistSign::Plus, uses_lambda: false }),
            _ => Err(bad()),
        }
    }
    /// rank of E⁰ − E¹ on M̄_{0,n}(ℙᴺ, d)
    pub fn rank(&self, d: u32) -> i64 {
        self.bundle_degree * d as i64 + 1
    }
    fn lambda_sign(&self) -> i64 {
        match self.sign {
            TwistSign::Plus => 1,
            TwistSign::Minus => -1,
        }
    }
}

impl std::fmt::Display for TwistSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match (self.uses_lambda, self.sign) {
            (false, _) => "",
            (true, TwistSign::Plus) => "+",
            (true, TwistSign::Minus) => "-",
        };
        write!(f, "O({}){}", self.bundle_degree, s)
    }
}

/// Whether the twist enters as 1/e(E) or as e(E).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TwistMode {
    Inverse,
    Euler,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct FixedVertex {
    pub point: usize,
    pub markings: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct FixedEdge {
    pub a: usize,
    pub b: usize,
    pub degree: u32,
}

/// An isomorphism class of fixed loci, with its graph automorphism count.
#[derive(Clone, Debug, PartialEq)]
pub struct FixedGraph {
    pub vertices: Vec<FixedVertex>,
    pub edges: Vec<FixedEdge>,
    pub aut: u64,
}

impl FixedGraph {
    pub fn total_degree(&self) -> u32 {
        self.edges.iter().map(|e| e.degree).sum()
    }
    pub fn valence(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.a == v || e.b == v).count()
    }
    /// (neighbor, degree) for each edge at v
    pub fn flags(&self, v: usize) -> Vec<(usize, u32)> {
        let mut out = Vec::new();
        for e in &self.edges {
            if e.a == v {
                out.push((e.b, e.degree));
            } else if e.b == v {
                out.push((e.a, e.degree));
            }
        }
        out
    }
}

pub const MAX_GRAPH_DEGREE: u32 = 3;
pub const MAX_MARKINGS: usize = 6;
const MAX_CONFIGURATIONS: u64 = 4_000_000;

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                go(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Labeled trees on v vertices, each as a list of (a, b) with a < b.
fn labeled_trees(v: usize) -> Vec<Vec<(usize, usize)>> {
    if v == 1 {
        return vec![vec![]];
    }
    if v == 2 {
        return vec![vec![(0, 1)]];
    }
    let mut out = Vec::new();
    let len = v - 2;
    let total = v.pow(len as u32);
    for code in 0..total {
        let mut seq = Vec::with_capacity(len);
        let mut c = code;
        for _ in 0..len {
            seq.push(c % v);
            c /= v;
        }
        // Prüfer decoding
        let mut deg = vec![1usize; v];
        for &s in &seq {
            deg[s] += 1;
        }
        let mut edges = Vec::new();
        for &s in &seq {
            let leaf = (0..v).find(|&i| deg[i] == 1).unwrap();
            edges.push((leaf.min(s), leaf.max(s)));
            deg[leaf] -= 1;
            deg[s] -= 1;
        }
        let rest: Vec<usize> = (0..v).filter(|&i| deg[i] == 1).collect();
        edges.push((rest[0].min(rest[1]), rest[0].max(rest[1])));
        edges.sort();
        out.push(edges);
    }
    out
}

fn compositions_of(d: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 0 {
        return if d == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 1..=d {
        if d - first < (parts - 1) as u32 {
            break;
        }
        for mut rest in compositions_of(d - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

type Encoding = (Vec<(usize, usize, u32)>, Vec<usize>, Vec<usize>);

fn encode(edges: &[(usize, usize, u32)], points: &[usize], marks: &[usize], perm: &[usize]) -> Encoding {
    let mut e: Vec<(usize, usize, u32)> =
        edges.iter().map(|&(a, b, k)| (perm[a].min(perm[b]), perm[a].max(perm[b]), k)).collect();
    e.sort();
    let mut p = vec![0; points.len()];
    for (old, &pt) in points.iter().enumerate() {
        p[perm[old]] = pt;
    }
    let m = marks.iter().map(|&v| perm[v]).collect();
    (e, p, m)
}

/// All genus-0 fixed graphs of degree d with n markings on ℙᴺ, up to isomorphism.
pub fn enumerate_fixed_graphs(n_dim: usize, d: u32, n: usize) -> Result<Vec<FixedGraph>> {
    if d == 0 || d > MAX_GRAPH_DEGREE {
        return Err(Error::ResourceGuard(format!("graph degree must be in 1..={MAX_GRAPH_DEGREE}")));
    }
    if n > MAX_MARKINGS {
        return Err(Error::ResourceGuard(format!("at most {MAX_MARKINGS} markings")));
    }
    if n_dim == 0 {
        return Err(Error::Precondition("need N >= 1".into()));
    }
    let pts = n_dim as u64 + 1;
    let mut estimate = 0u64;
    for v in 2..=(d as usize + 1) {
        let trees = if v <= 2 { 1 } else { (v as u64).pow(v as u32 - 2) };
        estimate += trees * compositions_of(d, v - 1).len() as u64 * pts * (pts - 1).pow(v as u32 - 1) * (v as u64).pow(n as u32);
    }
    if estimate > MAX_CONFIGURATIONS {
        return Err(Error::ResourceGuard(format!("{estimate} labeled configurations exceed the enumeration budget")));
    }
    let mut classes: BTreeMap<Encoding, FixedGraph> = BTreeMap::new();
    for v in 2..=(d as usize + 1) {
        let perms = permutations(v);
        for tree in labeled_trees(v) {
            for degs in compositions_of(d, v - 1) {
                let edges: Vec<(usize, usize, u32)> = tree.iter().zip(&degs).map(|(&(a, b), &k)| (a, b, k)).collect();
                let mut points = vec![usize::MAX; v];
                assign_points(&edges, &mut points, 0, n_dim, &mut |points| {
                    let mut marks = vec![0usize; n];
                    loop {
                        let code = perms.iter().map(|p| encode(&edges, points, &marks, p)).min().unwrap();
                        if !classes.contains_key(&code) {
                            let id: Vec<usize> = (0..v).collect();
                            let own = encode(&edges, points, &marks, &id);
                            let aut = perms.iter().filter(|p| encode(&edges, points, &marks, p) == own).count() as u64;
                            let (ce, cp, cm) = code.clone();
                            let mut vertices: Vec<FixedVertex> = cp.iter().map(|&p| FixedVertex { point: p, markings: vec![] }).collect();
                            for (mk, &vx) in cm.iter().enumerate() {
                                vertices[vx].markings.push(mk);
                            }
                            let edges = ce.iter().map(|&(a, b, k)| FixedEdge { a, b, degree: k }).collect();
                            classes.insert(code, FixedGraph { vertices, edges, aut });
                        }
                        // next marking map
                        let mut i = 0;
                        while i < n {
                            marks[i] += 1;
                            if marks[i] < v {
                                break;
                            }
                            marks[i] = 0;
                            i += 1;
                        }
                        if i == n {
                            break;
                        }
                    }
                });
            }
        }
    }
    Ok(classes.into_values().collect())
}

fn assign_points(edges: &[(usize, usize, u32)], points: &mut Vec<usize>, v: usize, n_dim: usize, f: &mut dyn FnMut(&[usize])) {
    if v == points.len() {
        f(points);
        return;
    }
    for p in 0..=n_dim {
        let clash = edges.iter().any(|&(a, b, _)| {
            (a == v && b < v && points[b] == p) || (b == v && a < v && points[a] == p)
        });
        if !clash {
            points[v] = p;
            assign_points(edges, points, v + 1, n_dim, f);
        }
    }
    points[v] = usize::MAX;
}

// ---------------------------------------------------------------------------
// ψ-integrals

/// ∫ ψ₁^{a₁}⋯ψ_n^{a_n} over M̄_{0,n}.
pub fn psi_integral_m0n(a: &[u32]) -> Result<Q> {
    let n = a.len();
    if n < 3 {
        return Err(Error::Precondition("M_{0,n} needs n >= 3".into()));
    }
    let s: u64 = a.iter().map(|&x| x as u64).sum();
    if s != n as u64 - 3 {
        return Ok(Q::zero());
    }
    let den = a.iter().fold(num_bigint::BigInt::one(), |acc, &x| acc * factorial(x as u64));
    Ok(Q::new(factorial(n as u64 - 3), den))
}

/// The same numbers from the string equation, starting at ⟨τ₀³⟩ = 1.
pub fn psi_integral_by_string(a: &[u32]) -> Result<Q> {
    let n = a.len();
    if n < 3 {
        return Err(Error::Precondition("M_{0,n} needs n >= 3".into()));
    }
    if n == 3 {
        return Ok(if a.iter().all(|&x| x == 0) { Q::one() } else { Q::zero() });
    }
    let Some(zero_at) = a.iter().position(|&x| x == 0) else {
        return Ok(Q::zero());
    };
    let rest: Vec<u32> = a.iter().enumerate().filter(|(i, _)| *i != zero_at).map(|(_, &x)| x).collect();
    let mut tot = Q::zero();
    for i in 0..rest.len() {
        if rest[i] > 0 {
            let mut b = rest.clone();
            b[i] -= 1;
            tot += psi_integral_by_string(&b)?;
        }
    }
    Ok(tot)
}

// ---------------------------------------------------------------------------
// Localization sums

/// An insertion restricted to each fixed point, as ψ-polynomial coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Insertion<S> {
    pub at_point: Vec<Vec<S>>,
}

impl<S: Scalar> Insertion<S> {
    /// ψ^a H^b with H restricting to α_i at p_i.
    pub fn class(psi: u32, h: u32, w: &TorusWeights) -> Self {
        let at_point = w
            .weights()
            .iter()
            .map(|a| {
                let mut v = vec![S::nil(); psi as usize + 1];
                v[psi as usize] = S::from_q(qpow(a, h as i64));
                v
            })
            .collect();
        Insertion { at_point }
    }
    /// Total degree when the insertion is a pure ψ^a H^b class.
    fn eval_at(&self, point: usize, psi: &Q) -> S {
        let mut acc = S::nil();
        let mut p = Q::one();
        for c in &self.at_point[point] {
            acc.add_assign_ref(&c.scale(&p));
            p *= psi;
        }
        acc
    }
}

fn inv_q(x: &Q) -> Result<Q> {
    if x.is_zero() {
        Err(Error::DivisionByZero)
    } else {
        Ok(x.recip())
    }
}

/// Numeric part: automorphisms, edge tangent weights and the vertex normal factors.
fn graph_weight(g: &FixedGraph, w: &TorusWeights) -> Result<Q> {
    let n_dim = w.dim();
    let mut c = Q::new(1.into(), g.aut.into());
    for e in &g.edges {
        let (i, j, d) = (g.vertices[e.a].point, g.vertices[e.b].point, e.degree as i64);
        let (ai, aj) = (w.get(i), w.get(j));
        let diff = ai - aj;
        let mut edge = q(1, d) * qpow(&qi(d), 2 * d) * inv_factorial(d) * inv_factorial(d);
        if d % 2 == 1 {
            edge = -edge;
        }
        edge *= inv_q(&qpow(&diff, 2 * d))?;
        for k in 0..=n_dim {
            if k == i || k == j {
                continue;
            }
            for a in 0..=d {
                let x = (qi(a) * ai + qi(d - a) * aj) / qi(d) - w.get(k);
                edge *= inv_q(&x)?;
            }
        }
        c *= edge;
    }
    for (v, vx) in g.vertices.iter().enumerate() {
        let val = g.valence(v) as i64;
        let ai = w.get(vx.point);
        for k in 0..=n_dim {
            if k != vx.point {
                c *= qpow(&(ai - w.get(k)), val - 1);
            }
        }
    }
    Ok(c)
}

fn vertex_factor<S: Scalar>(g: &FixedGraph, v: usize, w: &TorusWeights, ins: &[Insertion<S>]) -> Result<S> {
    let vx = &g.vertices[v];
    let i = vx.point;
    let omegas: Vec<Q> = g.flags(v).iter().map(|&(nb, k)| (w.get(i) - w.get(g.vertices[nb].point)) / qi(k as i64)).collect();
    let marks = &vx.markings;
    match (omegas.len(), marks.len()) {
        (1, 0) => return Ok(S::from_q(omegas[0].clone())),
        (1, 1) => return Ok(ins[marks[0]].eval_at(i, &-omegas[0].clone())),
        (2, 0) => return Ok(S::from_q(inv_q(&(&omegas[0] + &omegas[1]))?)),
        _ => {}
    }
    let nv = omegas.len() + marks.len();
    let dim = nv as i64 - 3;
    let polys: Vec<&Vec<S>> = marks.iter().map(|&m| &ins[m].at_point[i]).collect();
    let inv_om: Vec<Q> = omegas.iter().map(inv_q).collect::<Result<_>>()?;
    let mut total = S::nil();
    let mut exps = vec![0u32; nv];
    distribute(&polys, &inv_om, 0, dim, &mut exps, S::unit(), &mut total);
    // multinomial is applied per leaf in distribute
    Ok(total)
}

/// Sum over exponent choices for markings then flags, mapped to their ψ-integral.
fn distribute<S: Scalar>(polys: &[&Vec<S>], inv_om: &[Q], idx: usize, left: i64, exps: &mut Vec<u32>, acc: S, total: &mut S) {
    let nm = polys.len();
    let nv = nm + inv_om.len();
    if idx == nv {
        if left == 0 {
            let n3 = exps.iter().map(|&e| e as u64).sum::<u64>();
            let den = exps.iter().fold(num_bigint::BigInt::one(), |acc, &x| acc * factorial(x as u64));
            let mult = Q::new(factorial(n3), den);
            total.add_assign_ref(&acc.scale(&mult));
        }
        return;
    }
    if idx < nm {
        let p = polys[idx];
        for a in 0..p.len().min(left as usize + 1) {
            if p[a].is_nil() {
                continue;
            }
            exps[idx] = a as u32;
            distribute(polys, inv_om, idx + 1, left - a as i64, exps, acc.mul_ref(&p[a]), total);
        }
        exps[idx] = 0;
    } else {
        let f = idx - nm;
        let last = idx == nv - 1;
        let range: Vec<i64> = if last { vec![left] } else { (0..=left).collect() };
        for c in range {
            exps[idx] = c as u32;
            // 1/(ω − ψ) = Σ ψ^c ω^{−c−1}
            let fac = qpow(&inv_om[f], c + 1);
            distribute(polys, inv_om, idx + 1, left - c, exps, acc.scale(&fac), total);
        }
        exps[idx] = 0;
    }
}

fn twist_factor<S: Scalar>(g: &FixedGraph, w: &TorusWeights, tw: &TwistSpec, mode: TwistMode, lam: &S) -> Result<S> {
    let k = tw.bundle_degree;
    let shift = if tw.uses_lambda { lam.scale(&qi(tw.lambda_sign())) } else { S::nil() };
    let weight = |x: Q| S::from_q(x).add_ref(&shift);
    let mut num = S::unit();
    let mut den = S::unit();
    for e in &g.edges {
        let (ai, aj) = (w.get(g.vertices[e.a].point), w.get(g.vertices[e.b].point));
        let d = e.degree as i64;
        let kd = k * d;
        let wt = |m: i64| (qi(kd - m) * ai + qi(m) * aj) / qi(d);
        if kd >= 0 {
            for m in 0..=kd {
                den = den.mul_ref(&weight(wt(m)));
            }
        } else {
            for m in (kd + 1)..=-1 {
                num = num.mul_ref(&weight(wt(m)));
            }
        }
    }
    for (v, vx) in g.vertices.iter().enumerate() {
        let f = weight(qi(k) * w.get(vx.point));
        for _ in 1..g.valence(v) {
            num = num.mul_ref(&f);
        }
    }
    let (top, bottom) = match mode {
        TwistMode::Inverse => (num, den),
        TwistMode::Euler => (den, num),
    };
    let inv = bottom.inv().ok_or(Error::DivisionByZero)?;
    Ok(top.mul_ref(&inv))
}

/// Twisting data handed to the localization sum.
#[derive(Debug)]
pub struct TwistUse<'a, S> {
    pub spec: &'a TwistSpec,
    pub mode: TwistMode,
    pub lambda: &'a S,
}

impl<S> Clone for TwistUse<'_, S> {
    fn clone(&self) -> Self {
        *self
    }
}
impl<S> Copy for TwistUse<'_, S> {}

fn contribution<S: Scalar>(g: &FixedGraph, w: &TorusWeights, ins: &[Insertion<S>], twist: Option<TwistUse<'_, S>>) -> Result<S> {
    let mut acc = S::from_q(graph_weight(g, w)?);
    for v in 0..g.vertices.len() {
        acc = acc.mul_ref(&vertex_factor(g, v, w, ins)?);
        if acc.is_nil() {
            return Ok(acc);
        }
    }
    if let Some(t) = twist {
        acc = acc.mul_ref(&twist_factor(g, w, t.spec, t.mode, t.lambda)?);
    }
    Ok(acc)
}

/// Σ over fixed graphs, split across threads; exact sums make the order irrelevant.
pub fn localization_sum<S: Scalar>(graphs: &[FixedGraph], w: &TorusWeights, ins: &[Insertion<S>], twist: Option<TwistUse<'_, S>>) -> Result<S> {
    let threads = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(8);
    if threads <= 1 || graphs.len() < 64 {
        let mut tot = S::nil();
        for g in graphs {
            tot.add_assign_ref(&contribution(g, w, ins, twist)?);
        }
        return Ok(tot);
    }
    let chunk = graphs.len().div_ceil(threads);
    let parts: Vec<Result<S>> = std::thread::scope(|sc| {
        let handles: Vec<_> = graphs
            .chunks(chunk)
            .map(|gs| {
                sc.spawn(move || {
                    let mut tot = S::nil();
                    for g in gs {
                        tot.add_assign_ref(&contribution(g, w, ins, twist)?);
                    }
                    Ok(tot)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("localization worker panicked")).collect()
    });
    let mut tot = S::nil();
    for p in parts {
        tot.add_assign_ref(&p?);
    }
    Ok(tot)
}

/// dim M̄_{0,n}(ℙᴺ, d)
pub fn vdim_pn(n_dim: usize, d: u32, n: usize) -> i64 {
    (n_dim as i64 + 1) * d as i64 + n_dim as i64 - 3 + n as i64
}

/// The λ power carrying the non-equivariant answer for pure ψ^a H^b insertions.
pub fn nonequivariant_exponent(n_dim: usize, d: u32, insertions: &[(u32, u32)], twist: Option<&TwistSpec>) -> i64 {
    let deg: i64 = insertions.iter().map(|&(a, b)| (a + b) as i64).sum();
    let shift = match twist {
        Some(t) if t.uses_lambda => -t.rank(d),
        _ => 0,
    };
    deg + shift - vdim_pn(n_dim, d, insertions.len())
}

/// λ^e coefficient of an expansion in λ⁻¹.
pub fn lambda_coefficient(r: &LambdaRational, e: i64) -> Q {
    if r.is_zero() {
        return Q::zero();
    }
    let top = r.num().degree().unwrap_or(0) as i64 - r.den().degree().unwrap_or(0) as i64;
    if e > top {
        return Q::zero();
    }
    expand_inv_lambda(r, (top - e) as u32).coeff(e)
}

/// ⟨ψ^{a₁}H^{b₁}, …⟩^{ℙᴺ, E}_{0,n,d}, returned as (non-equivariant number)·λ^{e}.
pub fn descendant_invariant_pn(
    n_dim: usize,
    d: u32,
    insertions: &[(u32, u32)],
    twist: Option<&TwistSpec>,
    w: &TorusWeights,
) -> Result<LambdaRational> {
    if w.dim() != n_dim {
        return Err(Error::Precondition(format!("weights are for ℙ^{}, asked for ℙ^{}", w.dim(), n_dim)));
    }
    if d == 0 {
        return Err(Error::Precondition("degree 0 has no fixed graphs here".into()));
    }
    if d > MAX_GRAPH_DEGREE || insertions.len() > MAX_MARKINGS {
        return Err(Error::ResourceGuard(format!("need d <= {MAX_GRAPH_DEGREE} and at most {MAX_MARKINGS} markings")));
    }
    if insertions.iter().any(|&(_, b)| b as usize > n_dim) {
        return Ok(LambdaRational::constant(Q::zero()));
    }
    let e = nonequivariant_exponent(n_dim, d, insertions, twist);
    let lambda_twist = twist.filter(|t| t.uses_lambda);
    if lambda_twist.is_none() && e != 0 {
        return Ok(LambdaRational::constant(Q::zero()));
    }
    let graphs = enumerate_fixed_graphs(n_dim, d, insertions.len())?;
    let value = match twist {
        None => {
            let ins: Vec<Insertion<Q>> = insertions.iter().map(|&(a, b)| Insertion::class(a, b, w)).collect();
            localization_sum(&graphs, w, &ins, None)?
        }
        Some(t) if !t.uses_lambda => {
            let ins: Vec<Insertion<Q>> = insertions.iter().map(|&(a, b)| Insertion::class(a, b, w)).collect();
            let lam = Q::zero();
            localization_sum(&graphs, w, &ins, Some(TwistUse { spec: t, mode: TwistMode::Inverse, lambda: &lam }))?
        }
        Some(t) if t.bundle_degree < 0 => {
            // polynomial in λ: Laurent arithmetic is enough
            let ins: Vec<Insertion<Laurent>> = insertions.iter().map(|&(a, b)| Insertion::class(a, b, w)).collect();
            let lam = Laurent::lambda();
            let r = localization_sum(&graphs, w, &ins, Some(TwistUse { spec: t, mode: TwistMode::Inverse, lambda: &lam }))?;
            r.coeff(e)
        }
        Some(t) => {
            let ins: Vec<Insertion<LambdaRational>> = insertions.iter().map(|&(a, b)| Insertion::class(a, b, w)).collect();
            let lam = LambdaRational::lambda();
            let r = localization_sum(&graphs, w, &ins, Some(TwistUse { spec: t, mode: TwistMode::Inverse, lambda: &lam }))?;
            lambda_coefficient(&r, e)
        }
    };
    Ok(LambdaRational::monomial(value, e))
}

/// [z^{−k−2} H^{N−b}] of 1/∏_{m=1}^{d}(H + mz)^{N+1}: the small J-function coefficient of ⟨ψ^k H^b⟩_{0,1,d}.
pub fn small_j_coefficient(n_dim: usize, d: u32, k: u32, b: u32) -> Q {
    // 1/∏(H+mz)^{N+1} = z^{−(N+1)d}/(d!)^{N+1} · ∏(1 + H/(mz))^{−(N+1)}
    let np1 = n_dim as i64 + 1;
    let j = n_dim as i64 - b as i64;
    if j < 0 || k as i64 + 2 != np1 * d as i64 + j {
        return Q::zero();
    }
    // coefficient of x^j in ∏_m (1 + x/m)^{−(N+1)}
    let mut poly = vec![Q::zero(); j as usize + 1];
    poly[0] = Q::one();
    for m in 1..=d as i64 {
        let factor: Vec<Q> = (0..=j)
            .map(|t| {
                let s = if t % 2 == 0 { qi(1) } else { qi(-1) };
                s * binomial(np1 + t - 1, t) * qpow(&q(1, m), t)
            })
            .collect();
        let mut next = vec![Q::zero(); j as usize + 1];
        for (a, x) in poly.iter().enumerate() {
            for (bb, y) in factor.iter().enumerate() {
                if a + bb <= j as usize {
                    next[a + bb] += x * y;
                }
            }
        }
        poly = next;
    }
    poly[j as usize].clone() * qpow(&inv_factorial(d as i64), np1)
}

// ---------------------------------------------------------------------------
// Chain factor

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    D0,
    X0,
}

impl Side {
    pub fn delta(&self) -> i64 {
        match self {
            Side::D0 => 1,
            Side::X0 => -1,
        }
    }
}

/// A maximal chain of edges through unstable inner vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeChain {
    pub edge_degrees: Vec<u32>,
    pub inner_sides: Vec<Side>,
    pub end_stable_sides: Vec<Side>,
}

impl EdgeChain {
    pub fn new(edge_degrees: Vec<u32>, inner_sides: Vec<Side>, end_stable_sides: Vec<Side>) -> Result<Self> {
        if edge_degrees.is_empty() || edge_degrees.contains(&0) {
            return Err(Error::Precondition("edge degrees must be positive".into()));
        }
        if inner_sides.len() + 1 != edge_degrees.len() {
            return Err(Error::Precondition("need one inner side per interior vertex".into()));
        }
        if end_stable_sides.len() > 2 {
            return Err(Error::Precondition("a chain has at most two stable ends".into()));
        }
        Ok(EdgeChain { edge_degrees, inner_sides, end_stable_sides })
    }
}

/// The chain factor as a series in the nilpotent class D with λ-rational coefficients.
pub fn edge_factor(chain: &EdgeChain, d_degree: u32) -> Result<MultiSeries<LambdaRational>> {
    let vars = VariableSet::builder().nilpotent("D", d_degree).build();
    let c = |x: LambdaRational| MultiSeries::constant(&vars, x);
    let lam = c(LambdaRational::lambda());
    let dd = MultiSeries::var(&vars, "D")?;
    let lpd = &lam + &dd;
    let mut out = MultiSeries::one(&vars);
    for &k in &chain.edge_degrees {
        out = out.scale(&q(1, k as i64));
    }
    let n_d0 = chain.end_stable_sides.iter().filter(|s| **s == Side::D0).count();
    let n_x0 = chain.end_stable_sides.len() - n_d0;
    for _ in 0..n_d0 {
        out = &out * &lam.neg();
    }
    for _ in 0..n_x0 {
        out = &out * &dd;
    }
    let sq = &lpd * &lpd;
    for (idx, side) in chain.inner_sides.iter().enumerate() {
        let (k1, k2) = (chain.edge_degrees[idx], chain.edge_degrees[idx + 1]);
        let s = q(1, k1 as i64) + q(1, k2 as i64);
        let den = sq.scale(&(s * qi(side.delta())));
        out = &out * &den.inverse()?;
    }
    for &k in &chain.edge_degrees {
        let kk = k as i64;
        let mut num = MultiSeries::one(&vars);
        let mut prod = MultiSeries::one(&vars);
        for m in 1..kk {
            num = &num * &(&lam.neg() + &lpd.scale(&q(m, kk)));
            prod = &prod * &lpd.scale(&q(m, kk));
        }
        let mut den = &prod * &prod;
        if (kk - 1) % 2 == 1 {
            den = den.neg();
        }
        out = &(&out * &num) * &den.inverse()?;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Pipelines

/// Report of the ℙ¹ ⊂ ℙ² example.
#[derive(Clone, Debug)]
pub struct P2Report {
    pub h_psi2: Q,
    pub h2_psi: Q,
    pub h_psi2_twisted: Q,
    pub h2_psi_twisted: Q,
    pub combination: Q,
    pub geometric_series_coefficient: Q,
    pub o_plus_term: LambdaRational,
    pub value: Q,
}

impl P2Report {
    pub fn to_json(&self) -> Value {
        json!({
            "pipeline": "p2",
            "<H psi^2>": q_str(&self.h_psi2),
            "<H^2 psi>": q_str(&self.h2_psi),
            "<H psi^2> O(-1)-": q_str(&self.h_psi2_twisted),
            "<H^2 psi> O(-1)-": q_str(&self.h2_psi_twisted),
            "-<H psi^2> - 2<H^2 psi>": q_str(&self.combination),
            "lambda^-3 coefficient of <H/(-lambda-psi-H)>": q_str(&self.geometric_series_coefficient),
            "O+ term": self.o_plus_term.to_text(),
            "value": q_str(&self.value),
        })
    }
}

/// ⟨⟩^{ℙ¹}_{0,0,1} recovered from the ℙ² localization identity.
pub fn pipeline_p2_example(w: &TorusWeights) -> Result<P2Report> {
    if w.dim() != 2 {
        return Err(Error::Precondition("the example lives on P^2".into()));
    }
    let tw = TwistSpec::new(-1, TwistSign::Minus);
    let num = |r: LambdaRational| r.as_monomial().map(|(c, _)| c).unwrap_or_else(Q::zero);
    let h_psi2 = num(descendant_invariant_pn(2, 1, &[(2, 1)], None, w)?);
    let h2_psi = num(descendant_invariant_pn(2, 1, &[(1, 2)], None, w)?);
    let h_psi2_twisted = num(descendant_invariant_pn(2, 1, &[(2, 1)], Some(&tw), w)?);
    let h2_psi_twisted = num(descendant_invariant_pn(2, 1, &[(1, 2)], Some(&tw), w)?);
    let combination = -(&h_psi2_twisted + qi(2) * &h2_psi_twisted);

    // H/(−λ−ψ−H) = −(H/λ) Σ_j (−(ψ+H)/λ)^j, restricted at each point, j ≤ 5
    let jmax = 5i64;
    let at_point = w
        .weights()
        .iter()
        .map(|a| {
            let mut v = vec![Laurent::zero(); jmax as usize + 1];
            for j in 0..=jmax {
                for s in 0..=j {
                    let sign = if j % 2 == 0 { qi(-1) } else { qi(1) };
                    let c = sign * binomial(j, s) * qpow(a, j - s + 1);
                    v[s as usize].add_term(-1 - j, c);
                }
            }
            v
        })
        .collect();
    let ins = vec![Insertion { at_point }];
    let graphs = enumerate_fixed_graphs(2, 1, 1)?;
    let lam = Laurent::lambda();
    let full = localization_sum(&graphs, w, &ins, Some(TwistUse { spec: &tw, mode: TwistMode::Inverse, lambda: &lam }))?;
    let geometric_series_coefficient = full.coeff(-3);

    let plus = TwistSpec::new(0, TwistSign::Plus);
    let graphs0 = enumerate_fixed_graphs(2, 1, 0)?;
    let lamr = LambdaRational::lambda();
    let o_plus_term = localization_sum::<LambdaRational>(&graphs0, w, &[], Some(TwistUse { spec: &plus, mode: TwistMode::Inverse, lambda: &lamr }))?;
    let value = &geometric_series_coefficient + lambda_coefficient(&o_plus_term, -3);
    Ok(P2Report { h_psi2, h2_psi, h_psi2_twisted, h2_psi_twisted, combination, geometric_series_coefficient, o_plus_term, value })
}

/// How a hypertail coefficient becomes an ambient insertion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailNormalization {
    /// the Q₀ hypertail, inserted as is
    Q0AsIs,
    /// the Q₀ hypertail multiplied by 5H
    Q0TimesFiveH,
    /// the X₀ hypertail, inserted as is
    X0AsIs,
}

impl TailNormalization {
    pub fn all() -> [TailNormalization; 3] {
        [TailNormalization::Q0AsIs, TailNormalization::Q0TimesFiveH, TailNormalization::X0AsIs]
    }
    pub fn name(&self) -> &'static str {
        match self {
            TailNormalization::Q0AsIs => "t_Q0",
            TailNormalization::Q0TimesFiveH => "5H*t_Q0",
            TailNormalization::X0AsIs => "t_X0",
        }
    }
}

#[derive(Clone, Debug)]
pub struct CandidateValue {
    pub normalization: TailNormalization,
    pub value: Q,
    /// per marking count n: (λ power used, contribution)
    pub by_n: Vec<(usize, i64, Q)>,
}

#[derive(Clone, Debug)]
pub struct QuinticReport {
    pub candidates: Vec<CandidateValue>,
    pub default: TailNormalization,
    pub value: Q,
}

impl QuinticReport {
    pub fn to_json(&self) -> Value {
        let cands: Vec<Value> = self
            .candidates
            .iter()
            .map(|c| {
                let by_n: Vec<Value> = c.by_n.iter().map(|(n, e, v)| json!({"n": n, "lambda_power": e, "value": q_str(v)})).collect();
                json!({"normalization": c.normalization.name(), "value": q_str(&c.value), "matches_2875": c.value == qi(2875), "by_n": by_n})
            })
            .collect();
        json!({"pipeline": "quintic1", "default": self.default.name(), "candidates": cands, "value": q_str(&self.value)})
    }
}

fn tail_for(norm: TailNormalization, caps: HypertailCaps) -> Result<HypertailSeries> {
    let locus = match norm {
        TailNormalization::X0AsIs => Locus::X0,
        _ => Locus::Q0,
    };
    let t = hypertail(locus, caps)?;
    if norm != TailNormalization::Q0TimesFiveH {
        return Ok(t);
    }
    let mut r = t.clone();
    for v in r.terms.values_mut() {
        *v = v.shift("H", 1)?.scale(&qi(5));
    }
    r.terms.retain(|_, v| !v.is_zero());
    Ok(r)
}

/// Total degree (ψ, H and λ all weight one) of a homogeneous hypertail coefficient.
fn homogeneous_degree(s: &MultiSeries<Laurent>) -> Result<Option<i64>> {
    let mut deg = None;
    for (e, c) in s.terms() {
        for (le, _) in c.terms() {
            let d = e[0] as i64 + e[1] as i64 + le;
            match deg {
                None => deg = Some(d),
                Some(x) if x != d => return Err(Error::Precondition("hypertail coefficient is not homogeneous".into())),
                _ => {}
            }
        }
    }
    Ok(deg)
}

/// t_k(−ψ) with H restricted to α_i.
fn tail_insertion(s: &MultiSeries<Laurent>, w: &TorusWeights) -> Insertion<Laurent> {
    let maxa = s.terms().map(|(e, _)| e[0]).max().unwrap_or(0) as usize;
    let at_point = w
        .weights()
        .iter()
        .map(|a| {
            let mut v = vec![Laurent::zero(); maxa + 1];
            for (e, c) in s.terms() {
                let sign = if e[0] % 2 == 0 { qi(1) } else { qi(-1) };
                let f = sign * qpow(a, e[1] as i64);
                v[e[0] as usize] = v[e[0] as usize].add_ref(&c.scale(&f));
            }
            v
        })
        .collect();
    Insertion { at_point }
}

fn ordered_compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    compositions_of(total, parts)
}

/// [Σ_n (1/n!)⟨t(−ψ), …, t(−ψ)⟩^{ℙ⁴, O(−5)⁻}_{0,n,1}]_{q^{5γ}} for one normalization.
pub fn quintic_degree1_candidate(norm: TailNormalization, w: &TorusWeights) -> Result<CandidateValue> {
    if w.dim() != 4 {
        return Err(Error::Precondition("the quintic pipeline lives on P^4".into()));
    }
    let qmax = 5u32;
    // ψ powers above 11 cannot reach the λ^{−7} slot
    let caps = HypertailCaps::new(0, qmax, 12);
    let tail = tail_for(norm, caps)?;
    let tw = TwistSpec::new(-5, TwistSign::Minus);
    let lam = Laurent::lambda();
    let mut ins_k = BTreeMap::new();
    let mut deg_k = BTreeMap::new();
    for k in 1..=qmax {
        let s = tail.coeff(0, k);
        if let Some(dg) = homogeneous_degree(&s)? {
            ins_k.insert(k, tail_insertion(&s, w));
            deg_k.insert(k, dg);
        }
    }
    let mut value = Q::zero();
    let mut by_n = Vec::new();
    for n in 1..=qmax as usize {
        let graphs = enumerate_fixed_graphs(4, 1, n)?;
        let mut part = Q::zero();
        let mut power = None;
        for comp in ordered_compositions(qmax, n) {
            if comp.iter().any(|k| !ins_k.contains_key(k)) {
                continue;
            }
            let ins: Vec<Insertion<Laurent>> = comp.iter().map(|k| ins_k[k].clone()).collect();
            let deg: i64 = comp.iter().map(|k| deg_k[k]).sum();
            let e = deg - tw.rank(1) - vdim_pn(4, 1, n);
            power = Some(e);
            let r = localization_sum(&graphs, w, &ins, Some(TwistUse { spec: &tw, mode: TwistMode::Inverse, lambda: &lam }))?;
            part += r.coeff(e);
        }
        let part = part * inv_factorial(n as i64);
        if let Some(e) = power {
            by_n.push((n, e, part.clone()));
        }
        value += part;
    }
    Ok(CandidateValue { normalization: norm, value, by_n })
}

/// All normalizations; the one returning 2875 becomes the reported value.
pub fn pipeline_quintic_degree1(w: &TorusWeights) -> Result<QuinticReport> {
    let mut candidates = Vec::new();
    for n in TailNormalization::all() {
        candidates.push(quintic_degree1_candidate(n, w)?);
    }
    let default = TailNormalization::X0AsIs;
    let value = candidates.iter().find(|c| c.normalization == default).map(|c| c.value.clone()).unwrap_or_else(Q::zero);
    Ok(QuinticReport { candidates, default, value })
}

/// ∫_{M̄_{0,0}(ℙ⁴,d)} e(π_* f^*O(5)) by localization.
pub fn quintic_gw_by_localization(d: u32, w: &TorusWeights) -> Result<Q> {
    if w.dim() != 4 {
        return Err(Error::Precondition("quintic invariants use P^4 weights".into()));
    }
    let graphs = enumerate_fixed_graphs(4, d, 0)?;
    let tw = TwistSpec { bundle_degree: 5, sign: TwistSign::Plus, uses_lambda: false };
    let zero = Q::zero();
    localization_sum::<Q>(&graphs, w, &[], Some(TwistUse { spec: &tw, mode: TwistMode::Euler, lambda: &zero }))
}

/// Instanton numbers n₁, …, n_D of the quintic from the hypergeometric periods.
pub fn quintic_instanton_numbers(big_d: u32) -> Result<Vec<Q>> {
    let vars: Arc<VariableSet> = VariableSet::builder().var("x", big_d).build();
    let mono = |k: u32, c: Q| MultiSeries::monomial(&vars, vec![k as i32], c);
    let a = |d: u64| Q::new(factorial(5 * d), factorial(d).pow(5));
    let mut w0 = MultiSeries::zero(&vars);
    let mut w1 = MultiSeries::zero(&vars);
    for d in 0..=big_d {
        let ad = a(d as u64);
        w0 = &w0 + &mono(d, ad.clone());
        w1 = &w1 + &mono(d, ad * qi(5) * (harmonic(5 * d as u64) - harmonic(d as u64)));
    }
    // t = log x + f, q = x e^{f}
    let f = &w1 * &w0.inverse()?;
    let x = MultiSeries::var(&vars, "x")?;
    let q_of_x = &x * &f.exp()?;
    // x·f'(x)
    let mut xfp = MultiSeries::zero(&vars);
    for (e, c) in f.terms() {
        xfp.add_term(e.clone(), c * qi(e[0] as i64));
    }
    let one = MultiSeries::one(&vars);
    let dlogx_dt = (&one + &xfp).inverse()?;
    let five_cubed = qpow(&qi(5), 5);
    let y_x = &(&(&one - &x.scale(&five_cubed)).inverse()? * &(&w0 * &w0).inverse()?).scale(&qi(5)) * &dlogx_dt.int_pow(3)?;
    // invert q(x): x = q e^{−f(x)} by fixed-point iteration
    let qv = MultiSeries::var(&vars, "x")?;
    let mut x_of_q = qv.clone();
    for _ in 0..=big_d {
        x_of_q = &qv * &f.compose("x", &x_of_q)?.neg().exp()?;
    }
    debug_assert_eq!(q_of_x.compose("x", &x_of_q)?, qv);
    let y_q = y_x.compose("x", &x_of_q)?;
    // Y = 5 + Σ n_d d³ q^d/(1 − q^d)
    let mut n = vec![Q::zero(); big_d as usize + 1];
    for dd in 1..=big_d as usize {
        let mut c = y_q.coeff(&[dd as i32]);
        for k in 1..dd {
            if dd % k == 0 {
                c -= &n[k] * qi((k * k * k) as i64);
            }
        }
        n[dd] = c / qi((dd * dd * dd) as i64);
    }
    Ok(n[1..].to_vec())
}

#[derive(Clone, Debug)]
pub struct Degree2Report {
    pub gw_degree1: Q,
    pub gw_degree2: Q,
    pub instanton_by_covers: Q,
    pub instanton_by_periods: Q,
}

impl Degree2Report {
    pub fn to_json(&self) -> Value {
        json!({
            "pipeline": "quintic2",
            "N_1": q_str(&self.gw_degree1),
            "N_2": q_str(&self.gw_degree2),
            "n_2 = N_2 - N_1/8": q_str(&self.instanton_by_covers),
            "n_2 from periods": q_str(&self.instanton_by_periods),
            "value": q_str(&self.instanton_by_periods),
        })
    }
}

/// Degree-2 extension: 609250 from the periods, cross-checked by localization.
pub fn pipeline_quintic_degree2(w: &TorusWeights) -> Result<Degree2Report> {
    let gw_degree1 = quintic_gw_by_localization(1, w)?;
    let gw_degree2 = quintic_gw_by_localization(2, w)?;
    let instanton_by_covers = &gw_degree2 - &gw_degree1 / qi(8);
    let ns = quintic_instanton_numbers(2)?;
    Ok(Degree2Report { gw_degree1, gw_degree2, instanton_by_covers, instanton_by_periods: ns[1].clone() })
}

/// Whether a value is the same for several weight choices.
pub fn weight_independent(values: &[LambdaRational]) -> bool {
    values.windows(2).all(|w| w[0] == w[1]) && !values.is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(n: usize) -> TorusWeights {
        TorusWeights::standard(n)
    }
    fn val(r: LambdaRational) -> Q {
        r.as_monomial().map(|(c, _)| c).unwrap_or_else(Q::zero)
    }

    #[test]
    fn psi_integrals() {
        assert_eq!(psi_integral_m0n(&[0, 0, 0]).unwrap(), qi(1));
        assert_eq!(psi_integral_m0n(&[1, 0, 0, 0]).unwrap(), qi(1));
        assert_eq!(psi_integral_m0n(&[2, 0, 0, 0, 0]).unwrap(), qi(1));
        assert_eq!(psi_integral_m0n(&[1, 1, 0, 0, 0]).unwrap(), qi(2));
        assert_eq!(psi_integral_m0n(&[1, 0, 0]).unwrap(), qi(0));
        assert!(psi_integral_m0n(&[0, 0]).is_err());
        assert_eq!(psi_integral_by_string(&[1, 1, 0, 0, 0]).unwrap(), qi(2));
        assert_eq!(psi_integral_by_string(&[2, 1, 1, 0, 0, 0, 0]).unwrap(), psi_integral_m0n(&[2, 1, 1, 0, 0, 0, 0]).unwrap());
    }

    #[test]
    fn graph_counts() {
        let g = enumerate_fixed_graphs(1, 1, 0).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].aut, 1);
        assert_eq!(enumerate_fixed_graphs(4, 1, 0).unwrap().len(), 10);
        assert_eq!(enumerate_fixed_graphs(4, 1, 2).unwrap().len(), 40);
        // one double edge per pair, and paths i–j–k with k possibly equal to i
        let g2 = enumerate_fixed_graphs(4, 2, 0).unwrap();
        assert_eq!(g2.len(), 10 + 50);
        assert!(g2.iter().any(|g| g.aut == 2));
        assert!(enumerate_fixed_graphs(4, 4, 0).is_err());
        assert!(enumerate_fixed_graphs(4, 1, 7).is_err());
    }

    #[test]
    fn p2_degree_one_descendants() {
        assert_eq!(val(descendant_invariant_pn(2, 1, &[(2, 1)], None, &w(2)).unwrap()), qi(-3));
        assert_eq!(val(descendant_invariant_pn(2, 1, &[(1, 2)], None, &w(2)).unwrap()), qi(1));
        assert_eq!(val(descendant_invariant_pn(2, 1, &[(3, 0)], None, &w(2)).unwrap()), qi(6));
        // dimension axiom
        assert!(descendant_invariant_pn(2, 1, &[(1, 1)], None, &w(2)).unwrap().is_zero());
    }

    #[test]
    fn higher_degree_edges_match_j_function() {
        for (n, d, k, b) in [(1, 2, 2, 1), (1, 2, 3, 0), (1, 3, 4, 1), (1, 3, 5, 0), (2, 2, 4, 2), (2, 2, 5, 1)] {
            let got = val(descendant_invariant_pn(n, d, &[(k, b)], None, &w(n)).unwrap());
            assert_eq!(got, small_j_coefficient(n, d, k, b), "N={n} d={d} psi^{k} H^{b}");
        }
        assert_eq!(small_j_coefficient(1, 2, 2, 1), q(1, 4));
        assert_eq!(small_j_coefficient(2, 2, 6, 0), q(3, 2));
    }

    #[test]
    fn two_point_invariants() {
        // ⟨H², H²⟩_{0,2,1} on ℙ² counts lines through two points
        assert_eq!(val(descendant_invariant_pn(2, 1, &[(0, 2), (0, 2)], None, &w(2)).unwrap()), qi(1));
        assert_eq!(val(descendant_invariant_pn(2, 1, &[(0, 2), (0, 2), (0, 1)], None, &w(2)).unwrap()), qi(1));
    }

    #[test]
    fn twist_by_o_minus_one_is_trivial() {
        let tw = TwistSpec::new(-1, TwistSign::Minus);
        for ins in [vec![(2u32, 1u32)], vec![(1, 2)], vec![]] {
            let a = descendant_invariant_pn(2, 1, &ins, Some(&tw), &w(2)).unwrap();
            let b = descendant_invariant_pn(2, 1, &ins, None, &w(2)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn weights_do_not_matter() {
        let others = [
            TorusWeights::new(vec![qi(3), q(-2, 5), qi(11)]).unwrap(),
            TorusWeights::new(vec![qi(-4), qi(1), q(9, 2)]).unwrap(),
            w(2),
        ];
        let vals: Vec<LambdaRational> = others.iter().map(|ww| descendant_invariant_pn(2, 1, &[(2, 1)], None, ww).unwrap()).collect();
        assert!(weight_independent(&vals));
        let tw = TwistSpec::new(-3, TwistSign::Minus);
        let vals: Vec<LambdaRational> = others.iter().map(|ww| descendant_invariant_pn(2, 1, &[(1, 1)], Some(&tw), ww).unwrap()).collect();
        assert!(weight_independent(&vals));
        assert!(TorusWeights::new(vec![qi(1), qi(1)]).is_err());
    }

    #[test]
    fn twist_parsing() {
        assert_eq!(TwistSpec::parse("O(-5)-").unwrap(), TwistSpec::new(-5, TwistSign::Minus));
        assert_eq!(TwistSpec::parse("O(0)+").unwrap(), TwistSpec::new(0, TwistSign::Plus));
        assert!(!TwistSpec::parse("O(5)").unwrap().uses_lambda);
        assert!(TwistSpec::parse("O5-").is_err());
        assert_eq!(TwistSpec::new(-5, TwistSign::Minus).to_string(), "O(-5)-");
    }

    #[test]
    fn chain_factor_examples() {
        let one = edge_factor(&EdgeChain::new(vec![1], vec![], vec![]).unwrap(), 3).unwrap();
        assert_eq!(one, MultiSeries::one(one.vars()));
        let mixed = edge_factor(&EdgeChain::new(vec![1], vec![], vec![Side::D0, Side::X0]).unwrap(), 3).unwrap();
        let v = mixed.vars().clone();
        let want = MultiSeries::monomial(&v, vec![1], LambdaRational::monomial(qi(-1), 1));
        assert_eq!(mixed, want);
        let two = edge_factor(&EdgeChain::new(vec![2], vec![], vec![]).unwrap(), 3).unwrap();
        // (λ − D)/(λ + D)² = λ⁻¹(1 − D/λ)(1 + D/λ)⁻²
        let lam = MultiSeries::constant(&v, LambdaRational::lambda());
        let dd = MultiSeries::var(&v, "D").unwrap();
        let lpd = &lam + &dd;
        let want = &(&lam - &dd) * &(&lpd * &lpd).inverse().unwrap();
        assert_eq!(two, want);
        assert!(EdgeChain::new(vec![1, 1], vec![], vec![]).is_err());
    }

    #[test]
    fn chain_with_inner_vertex() {
        let c = edge_factor(&EdgeChain::new(vec![1, 1], vec![Side::D0], vec![]).unwrap(), 2).unwrap();
        // 1/(2(λ + D)²)
        let v = c.vars().clone();
        let lam = MultiSeries::constant(&v, LambdaRational::lambda());
        let dd = MultiSeries::var(&v, "D").unwrap();
        let lpd = &lam + &dd;
        assert_eq!(c, (&lpd * &lpd).scale(&qi(2)).inverse().unwrap());
    }

    #[test]
    fn p2_pipeline() {
        let r = pipeline_p2_example(&w(2)).unwrap();
        assert_eq!(r.h_psi2, qi(-3));
        assert_eq!(r.h2_psi, qi(1));
        assert_eq!(r.combination, qi(1));
        assert_eq!(r.geometric_series_coefficient, qi(1));
        assert!(r.o_plus_term.is_zero());
        assert_eq!(r.value, qi(1));
    }

    #[test]
    fn quintic_numbers_by_localization() {
        assert_eq!(quintic_gw_by_localization(1, &w(4)).unwrap(), qi(2875));
        assert_eq!(quintic_gw_by_localization(2, &w(4)).unwrap(), q(4876875, 8));
    }

    #[test]
    fn instanton_numbers_from_periods() {
        let n = quintic_instanton_numbers(3).unwrap();
        assert_eq!(n, vec![qi(2875), qi(609250), qi(317206375)]);
    }

    #[test]
    fn nonequivariant_exponents() {
        let tw = TwistSpec::new(-5, TwistSign::Minus);
        assert_eq!(nonequivariant_exponent(4, 1, &[], Some(&tw)), 4 - 6);
        assert_eq!(nonequivariant_exponent(2, 1, &[(2, 1)], None), 0);
    }
}
