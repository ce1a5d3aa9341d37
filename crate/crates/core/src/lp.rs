//! Exact ℓ¹-minimal representatives of a fixed 2-cycle in a finite complex,
//! with dual certificates.
//!
//! The problem `min |c₀ + ∂b|₁` over 3-chains `b` is solved through its dual
//! `max ⟨f, c₀⟩` subject to `f∘∂ = 0` and `|f| ≤ 1`. A bounded-variable simplex
//! runs in floating point; the optimal vertex and multipliers are then
//! rationalized and verified exactly, falling back to an exact solve on the
//! final basis when rounding does not reproduce them.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::chain::Chain;
use crate::error::{Error, Result};
use crate::expr::SimplexExpr;
use crate::quotient::Quotient;

const EPS: f64 = 1e-9;
const MAX_PIVOTS: usize = 200_000;

/// Oriented 2-complex: triangle boundaries in an edge basis, optional 3-cells
/// by their signed triangle incidences, and a reference 2-cycle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangulatedSurface {
    pub edges: usize,
    pub triangle_edges: Vec<Vec<(usize, i64)>>,
    pub fillings: Vec<Vec<(usize, i64)>>,
    pub c0: Vec<BigRational>,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn rat_of_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::Input(format!("non-finite coefficient {x}")))
}

fn approx(x: f64) -> BigRational {
    match Ratio::<i64>::approximate_float(x) {
        Some(r) => BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom())),
        None => BigRational::zero(),
    }
}

impl TriangulatedSurface {
    /// Combinatorial complex from vertex-labelled triangles `[a, b, c]`.
    pub fn from_faces(faces: &[[usize; 3]], c0: &[i64], fillings: Vec<Vec<(usize, i64)>>) -> Result<Self> {
        if faces.len() != c0.len() {
            return Err(Error::DimensionMismatch { expected: faces.len(), got: c0.len() });
        }
        let mut index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut triangle_edges = Vec::with_capacity(faces.len());
        for f in faces {
            let mut row = Vec::new();
            for (j, (a, b)) in [(f[1], f[2]), (f[0], f[2]), (f[0], f[1])].into_iter().enumerate() {
                let sign = if j % 2 == 0 { 1 } else { -1 };
                let (key, s) = if a < b { ((a, b), sign) } else { ((b, a), -sign) };
                let n = index.len();
                let e = *index.entry(key).or_insert(n);
                row.push((e, s));
            }
            triangle_edges.push(row);
        }
        let t = TriangulatedSurface {
            edges: index.len(),
            triangle_edges,
            fillings,
            c0: c0.iter().map(|&x| rat(x)).collect(),
        };
        t.validate()?;
        Ok(t)
    }

    /// Complex spanned by the support of a 2-cycle and the faces of a set of
    /// 3-simplices.
    pub fn from_chains(c0: &Chain, tets: &[SimplexExpr]) -> Result<(Self, Vec<SimplexExpr>)> {
        if c0.degree() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: c0.degree() });
        }
        let mut tri: BTreeMap<SimplexExpr, usize> = BTreeMap::new();
        let mut order: Vec<SimplexExpr> = Vec::new();
        let mut id = |s: SimplexExpr, tri: &mut BTreeMap<SimplexExpr, usize>| -> usize {
            let n = tri.len();
            *tri.entry(s.clone()).or_insert_with(|| {
                order.push(s);
                n
            })
        };
        for (s, _) in c0.iter() {
            id(s.clone(), &mut tri);
        }
        let mut fillings = Vec::with_capacity(tets.len());
        for t in tets {
            let b = Chain::single(t.clone()).boundary();
            let row: Vec<(usize, i64)> = b
                .iter()
                .map(|(s, a)| -> Result<(usize, i64)> {
                    if a.fract() != 0.0 {
                        return Err(Error::Input("non-integral incidence".into()));
                    }
                    Ok((id(s.clone(), &mut tri), *a as i64))
                })
                .collect::<Result<_>>()?;
            if !row.is_empty() {
                fillings.push(row);
            }
        }
        let mut edge_index: BTreeMap<SimplexExpr, usize> = BTreeMap::new();
        let mut triangle_edges = Vec::with_capacity(order.len());
        for s in &order {
            let b = Chain::single(s.clone()).boundary();
            let mut row = Vec::new();
            for (e, a) in b.iter() {
                let n = edge_index.len();
                let k = *edge_index.entry(e.clone()).or_insert(n);
                row.push((k, *a as i64));
            }
            triangle_edges.push(row);
        }
        let c = order.iter().map(|s| rat_of_f64(c0.coefficient(s))).collect::<Result<Vec<_>>>()?;
        let t = TriangulatedSurface { edges: edge_index.len(), triangle_edges, fillings, c0: c };
        t.validate()?;
        Ok((t, order))
    }

    pub fn triangles(&self) -> usize {
        self.triangle_edges.len()
    }

    /// Exact boundary of a triangle-coefficient vector.
    pub fn boundary_of(&self, x: &[BigRational]) -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); self.edges];
        for (row, a) in self.triangle_edges.iter().zip(x) {
            if a.is_zero() {
                continue;
            }
            for &(e, s) in row {
                out[e] += a * rat(s);
            }
        }
        out
    }

    fn validate(&self) -> Result<()> {
        for row in self.triangle_edges.iter().chain(&self.fillings) {
            for &(_, s) in row {
                if s.abs() > 8 {
                    return Err(Error::Input("incidence out of range".into()));
                }
            }
        }
        if self.fillings.iter().flatten().any(|&(t, _)| t >= self.triangles()) {
            return Err(Error::IndexOutOfRange { index: self.triangles(), len: self.triangles() });
        }
        if self.boundary_of(&self.c0).iter().any(|x| !x.is_zero()) {
            return Err(Error::Contract("reference chain is not a cycle".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub value: BigRational,
    /// Minimal representative `c₀ + ∂b` on the triangle basis.
    pub cycle: Vec<BigRational>,
    /// Dual vector `f`, a cocycle with `|f| ≤ 1`.
    pub dual: Vec<BigRational>,
    /// Filling coefficients `b`.
    pub filling: Vec<BigRational>,
    pub pivots: usize,
}

impl LpSolution {
    pub fn value_f64(&self) -> f64 {
        self.value.to_f64().unwrap_or(f64::NAN)
    }
}

/// Exact verification of a primal/dual pair.
pub fn verify(t: &TriangulatedSurface, s: &LpSolution) -> Result<()> {
    let n = t.triangles();
    if s.dual.len() != n || s.cycle.len() != n || s.filling.len() != t.fillings.len() {
        return Err(Error::Contract("certificate has wrong shape".into()));
    }
    if s.dual.iter().any(|f| f.abs() > BigRational::one()) {
        return Err(Error::Contract("dual exceeds 1".into()));
    }
    for row in &t.fillings {
        let mut acc = BigRational::zero();
        for &(j, a) in row {
            acc += &s.dual[j] * rat(a);
        }
        if !acc.is_zero() {
            return Err(Error::Contract("dual is not a cocycle".into()));
        }
    }
    let mut z = t.c0.clone();
    for (row, b) in t.fillings.iter().zip(&s.filling) {
        for &(j, a) in row {
            z[j] += b * rat(a);
        }
    }
    if z != s.cycle {
        return Err(Error::Contract("cycle differs from c0 + ∂b".into()));
    }
    let primal: BigRational = z.iter().map(|x| x.abs()).sum();
    let dual: BigRational = t.c0.iter().zip(&s.dual).map(|(a, b)| a * b).sum();
    if primal != dual || primal != s.value {
        return Err(Error::Contract(format!("duality gap {primal} vs {dual}")));
    }
    Ok(())
}

/// Dense bounded-variable tableau for `max cᵀx, Mx = 0, l ≤ x ≤ u`.
struct Tableau {
    rows: usize,
    cols: usize,
    t: Vec<f64>,
    d: Vec<f64>,
    basis: Vec<usize>,
    at_upper: Vec<bool>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    beta: Vec<f64>,
}

impl Tableau {
    fn value(&self, j: usize) -> f64 {
        if self.at_upper[j] {
            self.upper[j]
        } else {
            self.lower[j]
        }
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let w = self.cols;
        let p = self.t[r * w + e];
        for j in 0..w {
            self.t[r * w + j] /= p;
        }
        let prow: Vec<f64> = self.t[r * w..(r + 1) * w].to_vec();
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.t[i * w + e];
            if f != 0.0 {
                for j in 0..w {
                    self.t[i * w + j] -= f * prow[j];
                }
            }
        }
        let f = self.d[e];
        if f != 0.0 {
            for j in 0..w {
                self.d[j] -= f * prow[j];
            }
        }
        self.basis[r] = e;
    }

    fn run(&mut self) -> Result<usize> {
        let w = self.cols;
        let mut pivots = 0;
        let mut in_basis = vec![false; w];
        for &b in &self.basis {
            in_basis[b] = true;
        }
        loop {
            let entering = (0..w).find(|&j| {
                !in_basis[j]
                    && self.upper[j] > self.lower[j]
                    && ((!self.at_upper[j] && self.d[j] > EPS) || (self.at_upper[j] && self.d[j] < -EPS))
            });
            let Some(e) = entering else { return Ok(pivots) };
            let dir = if self.at_upper[e] { -1.0 } else { 1.0 };
            let mut theta = self.upper[e] - self.lower[e];
            let mut leave: Option<(usize, bool)> = None;
            for i in 0..self.rows {
                let a = self.t[i * w + e] * dir;
                let b = self.basis[i];
                let lim = if a > EPS {
                    Some(((self.beta[i] - self.lower[b]) / a, false))
                } else if a < -EPS {
                    Some(((self.upper[b] - self.beta[i]) / -a, true))
                } else {
                    None
                };
                if let Some((th, up)) = lim {
                    let th = th.max(0.0);
                    let better = th < theta - EPS
                        || ((th - theta).abs() <= EPS
                            && match leave {
                                None => true,
                                Some((li, _)) => b < self.basis[li],
                            });
                    if better {
                        theta = th;
                        leave = Some((i, up));
                    }
                }
            }
            for i in 0..self.rows {
                self.beta[i] -= theta * dir * self.t[i * w + e];
            }
            match leave {
                None => self.at_upper[e] = !self.at_upper[e],
                Some((r, up)) => {
                    let old = self.basis[r];
                    let entering_value = self.value(e) + theta * dir;
                    self.pivot(r, e);
                    in_basis[old] = false;
                    in_basis[e] = true;
                    self.at_upper[old] = up;
                    self.beta[r] = entering_value;
                }
            }
            pivots += 1;
            if pivots > MAX_PIVOTS {
                return Err(Error::Numerical("simplex pivot limit reached".into()));
            }
        }
    }
}

/// Solve `B x = r` exactly by Gauss–Jordan elimination.
fn solve_exact(mut b: Vec<Vec<BigRational>>, mut r: Vec<BigRational>) -> Result<Vec<BigRational>> {
    let n = r.len();
    for c in 0..n {
        let p = (c..n).find(|&i| !b[i][c].is_zero()).ok_or_else(|| Error::Internal("singular basis".into()))?;
        b.swap(c, p);
        r.swap(c, p);
        let inv = b[c][c].recip();
        for j in c..n {
            b[c][j] = &b[c][j] * &inv;
        }
        r[c] = &r[c] * &inv;
        for i in 0..n {
            if i != c && !b[i][c].is_zero() {
                let f = b[i][c].clone();
                for j in c..n {
                    let v = &b[c][j] * &f;
                    b[i][j] -= v;
                }
                let v = &r[c] * &f;
                r[i] -= v;
            }
        }
    }
    Ok(r)
}

fn assemble(t: &TriangulatedSurface, dual: Vec<BigRational>, y: Vec<BigRational>, pivots: usize) -> LpSolution {
    let filling: Vec<BigRational> = y.iter().map(|v| -v).collect();
    let mut cycle = t.c0.clone();
    for (row, b) in t.fillings.iter().zip(&filling) {
        for &(j, a) in row {
            cycle[j] += b * rat(a);
        }
    }
    let value = cycle.iter().map(|x| x.abs()).sum();
    LpSolution { value, cycle, dual, filling, pivots }
}

/// `min |c₀ + ∂b|₁` with an exactly verified dual certificate.
pub fn min_l1_representative(t: &TriangulatedSurface) -> Result<LpSolution> {
    let n = t.triangles();
    let m = t.fillings.len();
    let w = 2 * n + m;
    let c0: Vec<f64> = t.c0.iter().map(|x| x.to_f64().unwrap_or(0.0)).collect();
    let mut tab = vec![0.0; m * w];
    for (i, row) in t.fillings.iter().enumerate() {
        for &(j, a) in row {
            tab[i * w + j] += a as f64;
            tab[i * w + n + j] -= a as f64;
        }
        tab[i * w + 2 * n + i] = 1.0;
    }
    let mut d = vec![0.0; w];
    d[..n].copy_from_slice(&c0);
    for j in 0..n {
        d[n + j] = -c0[j];
    }
    let mut upper = vec![1.0; w];
    for u in upper.iter_mut().skip(2 * n) {
        *u = 0.0;
    }
    let mut tb = Tableau {
        rows: m,
        cols: w,
        t: tab,
        d,
        basis: (2 * n..w).collect(),
        at_upper: vec![false; w],
        lower: vec![0.0; w],
        upper,
        beta: vec![0.0; m],
    };
    let pivots = tb.run()?;

    let mut x = vec![0.0; w];
    for j in 0..w {
        x[j] = tb.value(j);
    }
    for (i, &b) in tb.basis.iter().enumerate() {
        x[b] = tb.beta[i];
    }
    let dual: Vec<BigRational> = (0..n).map(|j| approx(x[j] - x[n + j])).collect();
    let y: Vec<BigRational> = (0..m).map(|i| approx(-tb.d[2 * n + i])).collect();
    let sol = assemble(t, dual, y, pivots);
    if verify(t, &sol).is_ok() {
        return Ok(sol);
    }

    // Exact solve on the final basis.
    let col = |j: usize| -> Vec<BigRational> {
        let mut v = vec![BigRational::zero(); m];
        if j < n {
            for (i, row) in t.fillings.iter().enumerate() {
                for &(k, a) in row {
                    if k == j {
                        v[i] += rat(a);
                    }
                }
            }
        } else if j < 2 * n {
            for (i, row) in t.fillings.iter().enumerate() {
                for &(k, a) in row {
                    if k == j - n {
                        v[i] -= rat(a);
                    }
                }
            }
        } else {
            v[j - 2 * n] = BigRational::one();
        }
        v
    };
    let cost = |j: usize| -> BigRational {
        if j < n {
            t.c0[j].clone()
        } else if j < 2 * n {
            -t.c0[j - n].clone()
        } else {
            BigRational::zero()
        }
    };
    let cols: Vec<Vec<BigRational>> = tb.basis.iter().map(|&j| col(j)).collect();
    let bmat: Vec<Vec<BigRational>> = (0..m).map(|i| (0..m).map(|k| cols[k][i].clone()).collect()).collect();
    let mut rhs = vec![BigRational::zero(); m];
    let mut xe: Vec<BigRational> =
        (0..w).map(|j| if tb.at_upper[j] { BigRational::one() } else { BigRational::zero() }).collect();
    for &b in &tb.basis {
        xe[b] = BigRational::zero();
    }
    for (j, v) in xe.iter().enumerate() {
        if !v.is_zero() {
            for (i, a) in col(j).into_iter().enumerate() {
                rhs[i] -= a * v;
            }
        }
    }
    let xb = solve_exact(bmat.clone(), rhs)?;
    for (i, &b) in tb.basis.iter().enumerate() {
        xe[b] = xb[i].clone();
    }
    let bt: Vec<Vec<BigRational>> = (0..m).map(|i| (0..m).map(|k| bmat[k][i].clone()).collect()).collect();
    let y = solve_exact(bt, tb.basis.iter().map(|&j| cost(j)).collect())?;
    let dual: Vec<BigRational> = (0..n).map(|j| &xe[j] - &xe[n + j]).collect();
    let sol = assemble(t, dual, y, pivots);
    verify(t, &sol).map_err(|e| Error::Internal(format!("exact certificate failed: {e}")))?;
    Ok(sol)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundReport {
    pub round: usize,
    pub triangles: usize,
    pub fillings: usize,
    pub support: usize,
    pub value: BigRational,
    pub value_f64: f64,
    pub lower_bound: f64,
    pub homotopy_identity: bool,
}

/// Rounds of subdivide, straighten and solve, starting from the fan cycle.
/// Straightened subdivision prisms of all earlier rounds are kept as
/// 3-cells, so later rounds can only improve.
pub fn upper_bound_report(q: &Quotient, rounds: usize) -> Result<Vec<RoundReport>> {
    use crate::straighten::straighten;
    if rounds > 2 {
        return Err(Error::Input(format!("rounds {rounds} exceeds the size guard of 2")));
    }
    let lower = crate::volume::thurston_lower_bound(q);
    let mut c = q.fan_fundamental_cycle();
    let mut tets: Vec<SimplexExpr> = Vec::new();
    let mut out = Vec::new();
    for r in 0..=rounds {
        let mut identity = true;
        if r > 0 {
            let h = straighten(&c.subdivision_homotopy())?;
            let next = straighten(&c.subdivide())?;
            identity = h.boundary() == next.sub(&c);
            tets.extend(h.iter().map(|(s, _)| s.clone()));
            tets.sort();
            tets.dedup();
            c = next;
        }
        crate::volume::check_straight_areas(&c)?;
        let (t, _) = TriangulatedSurface::from_chains(&c, &tets)?;
        let sol = min_l1_representative(&t)?;
        let v = sol.value_f64();
        if v < lower - 1e-9 {
            return Err(Error::Contract(format!("LP value {v} below the lower bound {lower}")));
        }
        out.push(RoundReport {
            round: r,
            triangles: t.triangles(),
            fillings: t.fillings.len(),
            support: sol.cycle.iter().filter(|x| !x.is_zero()).count(),
            value: sol.value.clone(),
            value_f64: v,
            lower_bound: lower,
            homotopy_identity: identity,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tetrahedron_boundary() {
        let faces = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];
        let t = TriangulatedSurface::from_faces(&faces, &[1, -1, 1, -1], vec![]).unwrap();
        let s = min_l1_representative(&t).unwrap();
        assert_eq!(s.value, rat(4));
        let filled =
            TriangulatedSurface::from_faces(&faces, &[1, -1, 1, -1], vec![vec![(0, 1), (1, -1), (2, 1), (3, -1)]])
                .unwrap();
        let s = min_l1_representative(&filled).unwrap();
        assert_eq!(s.value, rat(0));
        verify(&filled, &s).unwrap();
    }

    #[test]
    fn non_cycle_rejected() {
        let faces = [[0, 1, 2]];
        assert!(TriangulatedSurface::from_faces(&faces, &[1], vec![]).is_err());
    }

    #[test]
    fn exact_fallback_solver() {
        let b = vec![vec![rat(2), rat(1)], vec![rat(1), rat(3)]];
        let x = solve_exact(b, vec![rat(1), rat(2)]).unwrap();
        assert_eq!(x, vec![BigRational::new(1.into(), 5.into()), BigRational::new(3.into(), 5.into())]);
    }

    #[test]
    fn fan_rounds() {
        let q = crate::quotient::genus_surface(2).unwrap();
        let r = upper_bound_report(&q, 1).unwrap();
        assert_eq!(r[0].value, rat(8));
        assert!(r[1].homotopy_identity);
        assert!(r[1].value <= r[0].value && r[1].value_f64 >= 4.0, "{:?}", r[1]);
    }
}
