//! Eilenberg–Zilber and Alexander–Whitney maps, and finitely supported
//! cochains with their cross product.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::affine::{PairMap, SimplexMap};
use crate::chain::{Chain, SupportSet};
use crate::error::{Error, Result};
use crate::expr::SimplexExpr;

/// `(m,n)`-shuffles as lattice paths, with their signs. `true` is a step in
/// the first factor.
pub fn shuffles(m: usize, n: usize) -> Vec<(Vec<bool>, f64)> {
    fn rec(m: usize, n: usize, path: &mut Vec<bool>, inv: usize, seen_n: usize, out: &mut Vec<(Vec<bool>, f64)>) {
        if m == 0 && n == 0 {
            out.push((path.clone(), if inv.is_multiple_of(2) { 1.0 } else { -1.0 }));
            return;
        }
        if m > 0 {
            path.push(true);
            rec(m - 1, n, path, inv + seen_n, seen_n, out);
            path.pop();
        }
        if n > 0 {
            path.push(false);
            rec(m, n - 1, path, inv, seen_n + 1, out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, n, &mut Vec::new(), 0, 0, &mut out);
    out
}

fn shuffle_map(m: usize, n: usize, path: &[bool]) -> PairMap {
    let (mut i, mut k) = (0, 0);
    let mut li = vec![0];
    let mut ri = vec![0];
    for &step in path {
        if step {
            i += 1;
        } else {
            k += 1;
        }
        li.push(i);
        ri.push(k);
    }
    PairMap::from_parts(SimplexMap::from_vertices(m, &li), SimplexMap::from_vertices(n, &ri))
}

/// `ez(σ ⊗ ρ)`, a sum of `binomial(m+n, m)` product simplices.
pub fn ez(s: &SimplexExpr, r: &SimplexExpr) -> Chain {
    let (m, n) = (s.dim(), r.dim());
    let mut c = Chain::zero(m + n);
    for (path, sign) in shuffles(m, n) {
        let p = SimplexExpr::product(s.clone(), r.clone(), shuffle_map(m, n, &path)).expect("shuffle dimensions");
        c.add_term(p, sign);
    }
    c
}

/// Bilinear extension of [`ez`].
pub fn ez_chain(a: &Chain, b: &Chain) -> Chain {
    let mut c = Chain::zero(a.degree() + b.degree());
    for (s, x) in a.iter() {
        for (r, y) in b.iter() {
            for (t, z) in ez(s, r).iter() {
                c.add_canonical(t.clone(), x * y * z);
            }
        }
    }
    c
}

/// Front `m`-face projected to the first `left_factors` factors and back
/// `n`-face projected to the rest, both in canonical form.
pub fn aw(s: &SimplexExpr, m: usize, n: usize, left_factors: usize) -> Result<(SimplexExpr, SimplexExpr)> {
    let k = s.dim();
    if m + n != k {
        return Err(Error::DimensionMismatch { expected: k, got: m + n });
    }
    let nf = s.factors();
    if left_factors == 0 || left_factors >= nf {
        return Err(Error::Input(format!("cannot split {nf} factors at {left_factors}")));
    }
    let front: Vec<usize> = (0..=m).collect();
    let back: Vec<usize> = (m..=k).collect();
    let f = SimplexExpr::affine(s.clone(), SimplexMap::from_vertices(k, &front))?.normalize();
    let b = SimplexExpr::affine(s.clone(), SimplexMap::from_vertices(k, &back))?.normalize();
    Ok((f.project(0, left_factors).canonical(), b.project(left_factors, nf - left_factors).canonical()))
}

/// All splittings `m = 0..=k` of [`aw`].
pub fn aw_full(s: &SimplexExpr, left_factors: usize) -> Result<Vec<(usize, SimplexExpr, SimplexExpr)>> {
    let k = s.dim();
    (0..=k).map(|m| aw(s, m, k - m, left_factors).map(|(f, b)| (m, f, b))).collect()
}

/// `aw∘ez(σ⊗ρ)` in the `(m,n)` component, with degenerate pairs removed.
pub fn aw_ez(s: &SimplexExpr, r: &SimplexExpr) -> Result<BTreeMap<(SimplexExpr, SimplexExpr), f64>> {
    let (m, n) = (s.dim(), r.dim());
    let lf = s.factors();
    let mut out: BTreeMap<(SimplexExpr, SimplexExpr), f64> = BTreeMap::new();
    for (t, a) in ez(s, r).iter() {
        let (f, b) = aw(t, m, n, lf)?;
        if f.is_degenerate() || b.is_degenerate() {
            continue;
        }
        *out.entry((f, b)).or_insert(0.0) += a;
    }
    out.retain(|_, v| *v != 0.0);
    Ok(out)
}

/// Finitely supported cochain vanishing on degenerate simplices.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Cochain {
    pub degree: usize,
    values: BTreeMap<SimplexExpr, f64>,
}

impl Cochain {
    pub fn new(degree: usize) -> Self {
        Cochain { degree, values: BTreeMap::new() }
    }

    pub fn set(&mut self, s: &SimplexExpr, v: f64) {
        self.values.insert(s.canonical(), v);
    }

    pub fn eval(&self, s: &SimplexExpr) -> f64 {
        let c = s.canonical();
        if c.dim() != self.degree || c.is_degenerate() {
            return 0.0;
        }
        self.values.get(&c).copied().unwrap_or(0.0)
    }

    pub fn support(&self) -> SupportSet {
        SupportSet::new(self.values.keys().cloned())
    }

    /// `‖f‖^A`, the largest value on `A`.
    pub fn norm_on(&self, a: &SupportSet) -> f64 {
        a.iter().map(|s| self.eval(s).abs()).fold(0.0, f64::max)
    }
}

/// `⟨f, c⟩`.
pub fn cochain_eval(f: &Cochain, c: &Chain) -> f64 {
    crate::volume::compensated_sum(c.iter().map(|(s, a)| a * f.eval(s)))
}

/// `f × g` on product simplices: `f(π_M ⌊τ⌋) · g(π_N ⌈τ⌉)`.
#[derive(Clone, Debug)]
pub struct CrossCochain<'a> {
    pub f: &'a Cochain,
    pub g: &'a Cochain,
    pub left_factors: usize,
}

pub fn cross_cochain<'a>(f: &'a Cochain, g: &'a Cochain, left_factors: usize) -> CrossCochain<'a> {
    CrossCochain { f, g, left_factors }
}

impl CrossCochain<'_> {
    pub fn degree(&self) -> usize {
        self.f.degree + self.g.degree
    }

    pub fn eval(&self, t: &SimplexExpr) -> Result<f64> {
        if t.dim() != self.degree() {
            return Ok(0.0);
        }
        let (a, b) = aw(t, self.f.degree, self.g.degree, self.left_factors)?;
        Ok(self.f.eval(&a) * self.g.eval(&b))
    }

    pub fn eval_chain(&self, c: &Chain) -> Result<f64> {
        let parts = c.iter().map(|(s, a)| self.eval(s).map(|v| a * v)).collect::<Result<Vec<_>>>()?;
        Ok(crate::volume::compensated_sum(parts))
    }

    pub fn norm_on(&self, a: &SupportSet) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for s in a.iter() {
            worst = worst.max(self.eval(s)?.abs());
        }
        Ok(worst)
    }

    /// Factor supports `A_M`, `A_N` of the front and back faces of `A`.
    pub fn factor_supports(&self, a: &SupportSet) -> Result<(SupportSet, SupportSet)> {
        let mut am = SupportSet::default();
        let mut an = SupportSet::default();
        for s in a.iter() {
            let (x, y) = aw(s, self.f.degree, self.g.degree, self.left_factors)?;
            am.insert(x);
            an.insert(y);
        }
        Ok((am, an))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::HPoint;

    fn seg(a: f64, b: f64) -> SimplexExpr {
        SimplexExpr::straight_points(&[HPoint::polar(a, 0.2), HPoint::polar(b, 1.7)]).unwrap()
    }

    fn tri(r: f64) -> SimplexExpr {
        SimplexExpr::straight_points(&[HPoint::polar(r, 0.1), HPoint::polar(1.0, 2.0), HPoint::polar(0.5, 4.0)])
            .unwrap()
    }

    #[test]
    fn shuffle_signs() {
        let s: Vec<f64> = shuffles(2, 1).into_iter().map(|x| x.1).collect();
        assert_eq!(s, vec![1.0, -1.0, 1.0]);
        assert_eq!(shuffles(2, 2).len(), 6);
    }

    #[test]
    fn ez_square_and_boundary() {
        let (s, r) = (seg(0.3, 1.0), seg(0.2, 0.9));
        let c = ez(&s, &r);
        assert_eq!(c.len(), 2);
        let mut signs: Vec<f64> = c.iter().map(|x| *x.1).collect();
        signs.sort_by(f64::total_cmp);
        assert_eq!(signs, vec![-1.0, 1.0]);
        assert!(c.boundary().boundary().is_empty());
    }

    #[test]
    fn aw_ez_is_identity_up_to_degenerates() {
        for (s, r) in [(seg(0.3, 1.0), tri(0.2)), (tri(0.1), tri(0.4)), (tri(0.3), seg(0.1, 0.5))] {
            let m = aw_ez(&s, &r).unwrap();
            assert_eq!(m.len(), 1);
            let ((f, b), v) = m.into_iter().next().unwrap();
            assert_eq!((f, b, v), (s.canonical(), r.canonical(), 1.0));
        }
    }

    #[test]
    fn cross_on_ez() {
        let (s, r) = (tri(0.2), seg(0.3, 1.0));
        let mut f = Cochain::new(2);
        f.set(&s, 2.5);
        let mut g = Cochain::new(1);
        g.set(&r, -0.5);
        let x = cross_cochain(&f, &g, 1);
        assert!((x.eval_chain(&ez(&s, &r)).unwrap() + 1.25).abs() < 1e-15);
    }
}
