//! Finite real chains over canonical simplex expressions.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::affine::{PrismMap, SimplexMap, Q};
use crate::error::{Error, Result};
use crate::expr::SimplexExpr;

const ZERO_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Chain {
    degree: usize,
    terms: BTreeMap<SimplexExpr, f64>,
}

impl Chain {
    pub fn zero(degree: usize) -> Self {
        Chain { degree, terms: BTreeMap::new() }
    }

    /// Chain from arbitrary expressions; terms are canonicalized and merged.
    pub fn from_terms<I: IntoIterator<Item = (SimplexExpr, f64)>>(degree: usize, terms: I) -> Result<Self> {
        let mut c = Chain::zero(degree);
        for (s, a) in terms {
            if s.dim() != degree {
                return Err(Error::DimensionMismatch { expected: degree, got: s.dim() });
            }
            c.add_term(s, a);
        }
        Ok(c)
    }

    pub fn single(s: SimplexExpr) -> Self {
        let mut c = Chain::zero(s.dim());
        c.add_term(s, 1.0);
        c
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn add_term(&mut self, s: SimplexExpr, a: f64) {
        self.add_canonical(s.canonical(), a);
    }

    /// Add a term already in canonical form.
    pub fn add_canonical(&mut self, s: SimplexExpr, a: f64) {
        if a == 0.0 {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(s) {
            Entry::Vacant(v) => {
                v.insert(a);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += a;
                if o.get().abs() <= ZERO_TOL {
                    o.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> &BTreeMap<SimplexExpr, f64> {
        &self.terms
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SimplexExpr, &f64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, s: &SimplexExpr) -> f64 {
        self.terms.get(&s.canonical()).copied().unwrap_or(0.0)
    }

    pub fn l1_norm(&self) -> f64 {
        crate::volume::compensated_sum(self.terms.values().map(|a| a.abs()))
    }

    /// `|c|₁` if the support lies in `a`, `∞` otherwise.
    pub fn restricted_norm(&self, a: &SupportSet) -> f64 {
        if self.terms.keys().all(|s| a.contains(s)) {
            self.l1_norm()
        } else {
            f64::INFINITY
        }
    }

    pub fn support(&self) -> SupportSet {
        SupportSet { members: self.terms.keys().cloned().collect() }
    }

    pub fn scale(&self, k: f64) -> Chain {
        let mut c = Chain::zero(self.degree);
        for (s, a) in &self.terms {
            c.add_canonical(s.clone(), a * k);
        }
        c
    }

    pub fn add(&self, o: &Chain) -> Chain {
        let mut c = self.clone();
        for (s, a) in &o.terms {
            c.add_canonical(s.clone(), *a);
        }
        c
    }

    pub fn sub(&self, o: &Chain) -> Chain {
        self.add(&o.scale(-1.0))
    }

    /// Maximal recursive Lipschitz certificate over the support.
    pub fn lipschitz_bound(&self) -> f64 {
        self.terms.keys().map(|s| s.lipschitz_certificate().bound).fold(0.0, f64::max)
    }

    /// Apply a per-term linear map computed in parallel and merged in order.
    pub fn map_terms<F>(&self, degree: usize, f: F) -> Chain
    where
        F: Fn(&SimplexExpr) -> Vec<(SimplexExpr, f64)> + Sync,
    {
        let parts: Vec<(f64, Vec<(SimplexExpr, f64)>)> = self.terms.par_iter().map(|(s, a)| (*a, f(s))).collect();
        let mut c = Chain::zero(degree);
        for (a, list) in parts {
            for (s, b) in list {
                c.add_canonical(s, a * b);
            }
        }
        c
    }

    pub fn try_map_terms<F>(&self, degree: usize, f: F) -> Result<Chain>
    where
        F: Fn(&SimplexExpr) -> Result<Vec<(SimplexExpr, f64)>> + Sync,
    {
        let parts = self.terms.par_iter().map(|(s, a)| f(s).map(|v| (*a, v))).collect::<Result<Vec<_>>>()?;
        let mut c = Chain::zero(degree);
        for (a, list) in parts {
            for (s, b) in list {
                c.add_canonical(s, a * b);
            }
        }
        Ok(c)
    }

    pub fn boundary(&self) -> Chain {
        if self.degree == 0 {
            return Chain::zero(0);
        }
        self.map_terms(self.degree - 1, |s| {
            (0..=s.dim())
                .map(|j| {
                    let f = s.face(j).expect("face index in range").canonical_of_normal();
                    (f, if j % 2 == 0 { 1.0 } else { -1.0 })
                })
                .collect()
        })
    }

    pub fn subdivide(&self) -> Chain {
        let maps = sd_maps(self.degree);
        self.map_terms(self.degree, |s| {
            maps.iter()
                .map(|(sg, m)| (SimplexExpr::affine(s.clone(), m.clone()).unwrap().canonical(), *sg as f64))
                .collect()
        })
    }

    /// `T` with `sd - id = ∂T + T∂`.
    pub fn subdivision_homotopy(&self) -> Chain {
        let maps = sd_homotopy_maps(self.degree);
        self.map_terms(self.degree + 1, |s| {
            maps.iter()
                .map(|(m, a)| (SimplexExpr::affine(s.clone(), m.clone()).unwrap().canonical(), *a as f64))
                .collect()
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<ChainTermJson> =
            self.terms.iter().map(|(s, a)| ChainTermJson { simplex: s.clone(), coeff: format!("{a:?}") }).collect();
        serde_json::json!({ "degree": self.degree, "terms": terms })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Chain> {
        let degree =
            v.get("degree").and_then(|d| d.as_u64()).ok_or_else(|| Error::Input("chain json needs a degree".into()))?
                as usize;
        let terms: Vec<ChainTermJson> = serde_json::from_value(v.get("terms").cloned().unwrap_or_default())
            .map_err(|e| Error::Input(e.to_string()))?;
        let mut c = Chain::zero(degree);
        for t in terms {
            let a: f64 = t.coeff.parse().map_err(|_| Error::Input(format!("bad coefficient {}", t.coeff)))?;
            if t.simplex.dim() != degree {
                return Err(Error::DimensionMismatch { expected: degree, got: t.simplex.dim() });
            }
            c.add_term(t.simplex, a);
        }
        Ok(c)
    }
}

#[derive(Serialize, Deserialize)]
struct ChainTermJson {
    simplex: SimplexExpr,
    coeff: String,
}

/// Finite set of canonical simplices.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct SupportSet {
    members: BTreeSet<SimplexExpr>,
}

impl SupportSet {
    pub fn new<I: IntoIterator<Item = SimplexExpr>>(it: I) -> Self {
        SupportSet { members: it.into_iter().map(|s| s.canonical()).collect() }
    }

    pub fn contains(&self, s: &SimplexExpr) -> bool {
        self.members.contains(s)
    }

    pub fn insert(&mut self, s: SimplexExpr) {
        self.members.insert(s.canonical());
    }

    pub fn remove(&mut self, s: &SimplexExpr) -> bool {
        self.members.remove(&s.canonical())
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &SimplexExpr> {
        self.members.iter()
    }

    pub fn lipschitz_bound(&self) -> f64 {
        self.members.iter().map(|s| s.lipschitz_certificate().bound).fold(0.0, f64::max)
    }
}

fn cone(b: &[Q], m: &SimplexMap) -> SimplexMap {
    let mut cols = vec![b.to_vec()];
    cols.extend(m.cols.iter().cloned());
    SimplexMap { cols }
}

fn barycenter(k: usize) -> Vec<Q> {
    vec![Q::new(1, k as i64 + 1); k + 1]
}

/// Signed affine simplices of the barycentric subdivision of Δᵏ.
pub fn sd_maps(k: usize) -> Vec<(i32, SimplexMap)> {
    if k == 0 {
        return vec![(1, SimplexMap::identity(0))];
    }
    let lower = sd_maps(k - 1);
    let b = barycenter(k);
    let mut out = Vec::new();
    for j in 0..=k {
        let fj = SimplexMap::face(k, j);
        let s = if j % 2 == 0 { 1 } else { -1 };
        for (sg, m) in &lower {
            out.push((s * sg, cone(&b, &fj.after(m))));
        }
    }
    out
}

fn add_map(acc: &mut BTreeMap<SimplexMap, i64>, m: SimplexMap, a: i64) {
    let e = acc.entry(m.clone()).or_insert(0);
    *e += a;
    if *e == 0 {
        acc.remove(&m);
    }
}

/// Affine simplices Δᵏ⁺¹ → Δᵏ of the subdivision homotopy applied to ιₖ.
pub fn sd_homotopy_maps(k: usize) -> Vec<(SimplexMap, i64)> {
    if k == 0 {
        return Vec::new();
    }
    let lower = sd_homotopy_maps(k - 1);
    let mut inner: BTreeMap<SimplexMap, i64> = BTreeMap::new();
    for (s, m) in sd_maps(k) {
        add_map(&mut inner, m, s as i64);
    }
    add_map(&mut inner, SimplexMap::identity(k), -1);
    for j in 0..=k {
        let fj = SimplexMap::face(k, j);
        let s = if j % 2 == 0 { 1 } else { -1 };
        for (m, a) in &lower {
            add_map(&mut inner, fj.after(m), -s * a);
        }
    }
    let b = barycenter(k);
    inner.into_iter().map(|(m, a)| (cone(&b, &m), a)).collect()
}

/// Homotopy `Δᵏ × [0,1] → X` from `f` (t = 0) to `g` (t = 1) along geodesics.
#[derive(Clone, Debug, PartialEq)]
pub struct Homotopy {
    pub f: SimplexExpr,
    pub g: SimplexExpr,
}

impl Homotopy {
    pub fn new(f: SimplexExpr, g: SimplexExpr) -> Result<Self> {
        if f.dim() != g.dim() || f.factors() != g.factors() {
            return Err(Error::Contract("homotopy ends must have equal dimension and target".into()));
        }
        Ok(Homotopy { f, g })
    }

    /// `Σⱼ (-1)ʲ H ∘ Gⱼ` with `Gⱼ = [a₀..aⱼ, bⱼ..bₖ]`.
    pub fn prism_terms(&self) -> Vec<(SimplexExpr, f64)> {
        let k = self.f.dim();
        (0..=k)
            .map(|j| {
                let e = SimplexExpr::join(self.f.clone(), self.g.clone(), PrismMap::prism_simplex(k, j))
                    .expect("dimensions checked");
                (e.canonical(), if j % 2 == 0 { 1.0 } else { -1.0 })
            })
            .collect()
    }

    pub fn prism_decomposition(&self) -> Chain {
        let mut c = Chain::zero(self.f.dim() + 1);
        for (s, a) in self.prism_terms() {
            c.add_canonical(s, a);
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::HPoint;

    fn tri() -> SimplexExpr {
        SimplexExpr::straight_points(&[HPoint::polar(0.2, 0.1), HPoint::polar(1.0, 2.0), HPoint::polar(1.3, 4.0)])
            .unwrap()
    }

    #[test]
    fn segment_boundary() {
        let p = HPoint::polar(0.5, 1.0);
        let r = HPoint::polar(1.5, 3.0);
        let c = Chain::single(SimplexExpr::straight_points(&[p.clone(), r.clone()]).unwrap());
        let b = c.boundary();
        let mut e = Chain::zero(0);
        e.add_term(SimplexExpr::straight_points(&[r]).unwrap(), 1.0);
        e.add_term(SimplexExpr::straight_points(&[p]).unwrap(), -1.0);
        assert_eq!(b, e);
        assert_eq!(Chain::zero(2).l1_norm(), 0.0);
    }

    #[test]
    fn subdivision_counts_and_naturality() {
        assert_eq!(sd_maps(1).len(), 2);
        assert_eq!(sd_maps(2).len(), 6);
        assert_eq!(sd_maps(3).len(), 24);
        let c = Chain::single(tri());
        let sd = c.subdivide();
        assert_eq!(sd.len(), 6);
        assert_eq!(sd.l1_norm(), 6.0);
        assert_eq!(sd.boundary(), c.boundary().subdivide());
        assert!(sd.boundary().boundary().is_empty());
    }

    #[test]
    fn subdivision_homotopy_identity() {
        let c = Chain::single(tri());
        let t = c.subdivision_homotopy();
        let lhs = t.boundary().add(&c.boundary().subdivision_homotopy());
        let rhs = c.subdivide().sub(&c);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn restricted_norm_escapes() {
        let c = Chain::single(tri()).subdivide();
        let mut a = c.support();
        assert_eq!(c.restricted_norm(&a), 6.0);
        let first = c.terms().keys().next().unwrap().clone();
        a.remove(&first);
        assert_eq!(c.restricted_norm(&a), f64::INFINITY);
    }
}
