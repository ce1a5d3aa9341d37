//! Closed expression algebra for singular simplices.
//!
//! Four node kinds: straight simplices on lifted vertices, affine
//! reparametrizations, geodesic joins over a prism, and products. Every
//! expression has a normal form; two expressions denote the same singular
//! simplex of the quotient when their canonical forms (normal form translated
//! so that the first vertex of each factor has trivial deck) coincide.

use serde::{Deserialize, Serialize};

use crate::affine::{q_f64, PairMap, PrismMap, SimplexMap, Q};
use crate::error::{Error, Result};
use crate::geom::{geodesic, hdist, mink, product_dist, simplex_grid, straight_eval, HPoint};
use crate::points::{CoverPoint, Deck, FactorPoint};
use crate::scalar::{Dual, Scalar};
use num_traits::{One, Zero};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum SimplexExpr {
    Straight { vertices: Vec<CoverPoint> },
    Affine { inner: Box<SimplexExpr>, map: SimplexMap },
    Join { f: Box<SimplexExpr>, g: Box<SimplexExpr>, map: PrismMap },
    Product { left: Box<SimplexExpr>, right: Box<SimplexExpr>, map: PairMap },
}

use SimplexExpr::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LipMethod {
    RecursiveJoin,
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipCertificate {
    pub bound: f64,
    pub method: LipMethod,
    pub resolution: Option<usize>,
}

/// Jacobian with respect to the edge coordinates `uᵢ` of
/// `β = e₀ + Σ uᵢ (eᵢ - e₀)`, and its operator norm for the Euclidean metric
/// of Δᵏ ⊂ ℝᵏ⁺¹.
#[derive(Clone, Debug, PartialEq)]
pub struct Differential {
    pub point: Vec<Vec<f64>>,
    pub jacobian: Vec<Vec<Vec<f64>>>,
    pub norm: f64,
}

/// Default sampling resolution per dimension.
pub fn default_resolution(k: usize) -> usize {
    (1usize << k.min(3)) * 32
}

impl SimplexExpr {
    pub fn straight(vertices: Vec<CoverPoint>) -> Result<Self> {
        let Some(first) = vertices.first() else {
            return Err(Error::Input("straight simplex needs at least one vertex".into()));
        };
        let nf = first.len();
        if nf == 0 {
            return Err(Error::Input("cover point without factors".into()));
        }
        for v in &vertices {
            if v.len() != nf {
                return Err(Error::DimensionMismatch { expected: nf, got: v.len() });
            }
            for (a, b) in v.iter().zip(first) {
                if a.base.coords().len() != b.base.coords().len() {
                    return Err(Error::DimensionMismatch {
                        expected: b.base.coords().len(),
                        got: a.base.coords().len(),
                    });
                }
            }
        }
        Ok(Straight { vertices })
    }

    /// Straight simplex on points of a single hyperbolic space.
    pub fn straight_points(points: &[HPoint]) -> Result<Self> {
        Self::straight(points.iter().map(|p| vec![FactorPoint::atom(p)]).collect())
    }

    /// Constant `k`-simplex at `p`.
    pub fn constant(p: CoverPoint, k: usize) -> Self {
        let s = Straight { vertices: vec![p] };
        if k == 0 {
            s
        } else {
            Affine { inner: Box::new(s), map: SimplexMap::from_vertices(0, &vec![0; k + 1]) }
        }
    }

    pub fn affine(inner: SimplexExpr, map: SimplexMap) -> Result<Self> {
        if map.dst_dim() != inner.dim() {
            return Err(Error::DimensionMismatch { expected: inner.dim(), got: map.dst_dim() });
        }
        Ok(Affine { inner: Box::new(inner), map })
    }

    pub fn join(f: SimplexExpr, g: SimplexExpr, map: PrismMap) -> Result<Self> {
        if f.dim() != g.dim() || map.base_dim() != f.dim() {
            return Err(Error::DimensionMismatch { expected: f.dim(), got: g.dim() });
        }
        if f.factors() != g.factors() {
            return Err(Error::DimensionMismatch { expected: f.factors(), got: g.factors() });
        }
        Ok(Join { f: Box::new(f), g: Box::new(g), map })
    }

    pub fn product(left: SimplexExpr, right: SimplexExpr, map: PairMap) -> Result<Self> {
        if map.left().dst_dim() != left.dim() || map.right().dst_dim() != right.dim() {
            return Err(Error::DimensionMismatch { expected: left.dim(), got: map.left().dst_dim() });
        }
        Ok(Product { left: Box::new(left), right: Box::new(right), map })
    }

    pub fn dim(&self) -> usize {
        match self {
            Straight { vertices } => vertices.len() - 1,
            Affine { map, .. } => map.src_dim(),
            Join { map, .. } => map.src_dim(),
            Product { map, .. } => map.src_dim(),
        }
    }

    /// Number of hyperbolic factors of the target.
    pub fn factors(&self) -> usize {
        match self {
            Straight { vertices } => vertices[0].len(),
            Affine { inner, .. } => inner.factors(),
            Join { f, .. } => f.factors(),
            Product { left, right, .. } => left.factors() + right.factors(),
        }
    }

    pub fn is_straight(&self) -> bool {
        matches!(self, Straight { .. })
    }

    pub fn vertices(&self) -> Option<&[CoverPoint]> {
        match self {
            Straight { vertices } => Some(vertices),
            _ => None,
        }
    }

    /// Generic evaluation; returns per-factor hyperboloid coordinates.
    pub fn eval_generic<S: Scalar>(&self, z: &[S]) -> Vec<Vec<S>> {
        match self {
            Straight { vertices } => {
                let nf = vertices[0].len();
                (0..nf)
                    .map(|f| {
                        let vs: Vec<Vec<S>> =
                            vertices.iter().map(|v| v[f].coords().into_iter().map(S::from_f64).collect()).collect();
                        straight_eval(&vs, z)
                    })
                    .collect()
            }
            Affine { inner, map } => inner.eval_generic(&apply_cols(&map.cols, z)),
            Join { f, g, map } => {
                let base: Vec<Vec<Q>> = map.cols.iter().map(|c| c.0.clone()).collect();
                let b = apply_cols(&base, z);
                let mut t = S::from_f64(0.0);
                for (w, c) in z.iter().zip(&map.cols) {
                    t = t + w.scale(q_f64(&c.1));
                }
                if t.value() <= 0.0 {
                    return f.eval_generic(&b);
                }
                if t.value() >= 1.0 {
                    return g.eval_generic(&b);
                }
                let fa = f.eval_generic(&b);
                let ga = g.eval_generic(&b);
                fa.iter().zip(&ga).map(|(x, y)| geodesic(x, y, t)).collect()
            }
            Product { left, right, map } => {
                let a = apply_cols(&map.left().cols, z);
                let b = apply_cols(&map.right().cols, z);
                let mut out = left.eval_generic(&a);
                out.extend(right.eval_generic(&b));
                out
            }
        }
    }

    pub fn evaluate(&self, z: &[f64]) -> Result<Vec<Vec<f64>>> {
        if z.len() != self.dim() + 1 {
            return Err(Error::DimensionMismatch { expected: self.dim() + 1, got: z.len() });
        }
        if z.iter().any(|w| !(*w >= -1e-14)) || (z.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::Input("point outside the closed simplex".into()));
        }
        Ok(self.eval_generic(z))
    }

    /// Lifted point at rational barycentric coordinates, when it can be named
    /// exactly (joins only at their ends).
    pub fn point_at(&self, beta: &[Q]) -> Option<CoverPoint> {
        match self {
            Straight { vertices } => {
                let nf = vertices[0].len();
                Some(
                    (0..nf)
                        .map(|f| FactorPoint::eval(vertices.iter().map(|v| v[f].clone()).collect(), beta.to_vec()))
                        .collect(),
                )
            }
            Affine { inner, map } => inner.point_at(&map.apply(beta)),
            Join { f, g, map } => {
                let b = map.base_map().apply(beta);
                let mut t = Q::zero();
                for (w, c) in beta.iter().zip(&map.cols) {
                    t += *w * c.1;
                }
                if t.is_zero() {
                    f.point_at(&b)
                } else if t.is_one() {
                    g.point_at(&b)
                } else {
                    None
                }
            }
            Product { left, right, map } => {
                let mut a = left.point_at(&map.left().apply(beta))?;
                a.extend(right.point_at(&map.right().apply(beta))?);
                Some(a)
            }
        }
    }

    pub fn vertex_point(&self, j: usize) -> Option<CoverPoint> {
        let mut b = vec![Q::zero(); self.dim() + 1];
        b[j] = Q::one();
        self.point_at(&b)
    }

    pub fn vertex_points(&self) -> Result<Vec<CoverPoint>> {
        (0..=self.dim()).map(|j| self.vertex_point(j).ok_or(Error::LiftMissing)).collect()
    }

    /// Face opposite vertex `j`, in normal form.
    pub fn face(&self, j: usize) -> Result<SimplexExpr> {
        let k = self.dim();
        if k == 0 || j > k {
            return Err(Error::IndexOutOfRange { index: j, len: k + 1 });
        }
        Ok(apply_map(self.normalize(), &SimplexMap::face(k, j)))
    }

    pub fn translate(&self, decks: &[Deck]) -> SimplexExpr {
        match self {
            Straight { vertices } => Straight {
                vertices: vertices.iter().map(|v| v.iter().zip(decks).map(|(p, h)| p.translate(h)).collect()).collect(),
            },
            Affine { inner, map } => Affine { inner: Box::new(inner.translate(decks)), map: map.clone() },
            Join { f, g, map } => {
                Join { f: Box::new(f.translate(decks)), g: Box::new(g.translate(decks)), map: map.clone() }
            }
            Product { left, right, map } => {
                let nl = left.factors();
                Product {
                    left: Box::new(left.translate(&decks[..nl])),
                    right: Box::new(right.translate(&decks[nl..])),
                    map: map.clone(),
                }
            }
        }
    }

    /// Deck of the first leaf point of each factor.
    pub fn anchor(&self) -> Vec<Deck> {
        match self {
            Straight { vertices } => vertices[0].iter().map(|p| p.deck.clone()).collect(),
            Affine { inner, .. } => inner.anchor(),
            Join { f, .. } => f.anchor(),
            Product { left, right, .. } => {
                let mut a = left.anchor();
                a.extend(right.anchor());
                a
            }
        }
    }

    /// Canonical form of an expression already in normal form.
    pub fn canonical_of_normal(&self) -> SimplexExpr {
        let a = self.anchor();
        if a.iter().all(|d| d.is_identity()) {
            return self.clone();
        }
        let inv: Vec<Deck> = a.iter().map(|d| d.inverse()).collect();
        self.translate(&inv)
    }

    /// Representative of the class of this simplex in the quotient.
    pub fn canonical(&self) -> SimplexExpr {
        self.normalize().canonical_of_normal()
    }

    pub fn normalize(&self) -> SimplexExpr {
        match self {
            Straight { vertices } => norm_straight(vertices.clone(), SimplexMap::identity(vertices.len() - 1)),
            Affine { inner, map } => apply_map(inner.normalize(), map),
            Join { f, g, map } => norm_join(f.normalize(), g.normalize(), map.clone()),
            Product { left, right, map } => norm_product(left.normalize(), right.normalize(), map.clone()),
        }
    }

    /// Vertex if this normal form is a constant map.
    pub fn constant_point(&self) -> Option<&CoverPoint> {
        match self {
            Straight { vertices } if vertices.len() == 1 => Some(&vertices[0]),
            Affine { inner, .. } => match &**inner {
                Straight { vertices } if vertices.len() == 1 => Some(&vertices[0]),
                _ => None,
            },
            _ => None,
        }
    }

    /// Whether the affine factor of this normal form is rank-deficient.
    pub fn is_degenerate(&self) -> bool {
        let k = self.dim();
        match self {
            Straight { .. } => false,
            Affine { map, .. } => map.rank() < k,
            Join { map, .. } => map.rank() < k,
            Product { map, .. } => map.rank() < k,
        }
    }

    /// Composition with the projection onto factors `start..start+len`.
    pub fn project(&self, start: usize, len: usize) -> SimplexExpr {
        match self {
            Straight { vertices } => {
                let v: Vec<CoverPoint> = vertices.iter().map(|cp| cp[start..start + len].to_vec()).collect();
                let k = v.len() - 1;
                norm_straight(v, SimplexMap::identity(k))
            }
            Affine { inner, map } => apply_map(inner.project(start, len), map),
            Join { f, g, map } => norm_join(f.project(start, len), g.project(start, len), map.clone()),
            Product { left, right, map } => {
                let nl = left.factors();
                if start + len <= nl {
                    apply_map(left.project(start, len), &map.left())
                } else if start >= nl {
                    apply_map(right.project(start - nl, len), &map.right())
                } else {
                    norm_product(left.project(start, nl - start), right.project(0, start + len - nl), map.clone())
                }
            }
        }
    }

    pub fn diameter_bound(&self) -> f64 {
        match self {
            Straight { vertices } => {
                let k = vertices.len() - 1;
                if k == 0 {
                    return 0.0;
                }
                let c: Vec<Vec<Vec<f64>>> = vertices.iter().map(|v| v.iter().map(|p| p.coords()).collect()).collect();
                let mut m: f64 = 0.0;
                for i in 0..=k {
                    for j in i + 1..=k {
                        m = m.max(product_dist(&c[i], &c[j]));
                    }
                }
                2.0 * k as f64 * m
            }
            Affine { inner, .. } => inner.diameter_bound(),
            Join { f, g, .. } => {
                let mut z = vec![0.0; f.dim() + 1];
                z[0] = 1.0;
                let d0 = product_dist(&f.eval_generic(&z), &g.eval_generic(&z));
                f.diameter_bound() + g.diameter_bound() + d0
            }
            Product { left, right, .. } => left.diameter_bound().hypot(right.diameter_bound()),
        }
    }

    /// Recursive certificate.
    pub fn lipschitz_certificate(&self) -> LipCertificate {
        LipCertificate { bound: self.recursive_lipschitz(), method: LipMethod::RecursiveJoin, resolution: None }
    }

    fn recursive_lipschitz(&self) -> f64 {
        match self {
            Straight { vertices } => {
                let k = vertices.len() - 1;
                let d = self.diameter_bound();
                let mut l = 0.0;
                for _ in 0..k {
                    l = cone_constant() * 2.0 * (l + d);
                }
                l
            }
            Affine { inner, map } => {
                if map.src_dim() == 0 {
                    return 0.0;
                }
                inner.recursive_lipschitz() * map.operator_norm()
            }
            Join { f, g, map } => {
                if map.src_dim() == 0 {
                    return 0.0;
                }
                let diam = self.diameter_bound();
                2.0 * (f.recursive_lipschitz() + g.recursive_lipschitz() + diam) * map.operator_norm()
            }
            Product { left, right, map } => {
                if map.src_dim() == 0 {
                    return 0.0;
                }
                left.recursive_lipschitz().max(right.recursive_lipschitz()) * map.operator_norm()
            }
        }
    }

    /// Largest finite-difference expansion along edge directions on the
    /// lattice of spacing `1/res`, times 1.1.
    pub fn sampled_certificate(&self, res: usize) -> LipCertificate {
        LipCertificate { bound: 1.1 * self.sampled_expansion(res), method: LipMethod::Sampled, resolution: Some(res) }
    }

    pub fn sampled_expansion(&self, res: usize) -> f64 {
        let k = self.dim();
        if k == 0 {
            return 0.0;
        }
        let grid = simplex_grid(k, res);
        let keys: Vec<Vec<usize>> =
            grid.iter().map(|z| z.iter().map(|w| (w * res as f64).round() as usize).collect()).collect();
        let vals: Vec<Vec<Vec<f64>>> = grid.iter().map(|z| self.eval_generic(z)).collect();
        let index: std::collections::HashMap<&[usize], usize> =
            keys.iter().enumerate().map(|(i, k)| (k.as_slice(), i)).collect();
        let h = std::f64::consts::SQRT_2 / res as f64;
        let mut best: f64 = 0.0;
        for (a, key) in keys.iter().enumerate() {
            for i in 0..=k {
                if key[i] == 0 {
                    continue;
                }
                for j in 0..=k {
                    if j == i {
                        continue;
                    }
                    let mut nk = key.clone();
                    nk[i] -= 1;
                    nk[j] += 1;
                    if let Some(&b) = index.get(nk.as_slice()) {
                        best = best.max(product_dist(&vals[a], &vals[b]) / h);
                    }
                }
            }
        }
        best
    }

    /// Differential at an interior point via forward-mode evaluation.
    pub fn differential(&self, b: &[f64]) -> Result<Differential> {
        let k = self.dim();
        if b.len() != k + 1 {
            return Err(Error::DimensionMismatch { expected: k + 1, got: b.len() });
        }
        match k {
            0 => Ok(Differential { point: self.eval_generic(b), jacobian: vec![], norm: 0.0 }),
            1 => Ok(self.diff_n::<1>(b)),
            2 => Ok(self.diff_n::<2>(b)),
            3 => Ok(self.diff_n::<3>(b)),
            4 => Ok(self.diff_n::<4>(b)),
            5 => Ok(self.diff_n::<5>(b)),
            _ => Err(Error::Input("differential supported up to dimension 5".into())),
        }
    }

    fn diff_n<const N: usize>(&self, b: &[f64]) -> Differential {
        let mut z = Vec::with_capacity(N + 1);
        let mut z0 = Dual::<N>::constant(b[0]);
        for i in 0..N {
            z0.d[i] = -1.0;
        }
        z.push(z0);
        for i in 0..N {
            z.push(Dual::<N>::variable(b[i + 1], i));
        }
        let out = self.eval_generic(&z);
        let point: Vec<Vec<f64>> = out.iter().map(|f| f.iter().map(|x| x.v).collect()).collect();
        let jacobian: Vec<Vec<Vec<f64>>> = out.iter().map(|f| f.iter().map(|x| x.d.to_vec()).collect()).collect();
        let norm = differential_norm(&jacobian, N);
        Differential { point, jacobian, norm }
    }
}

/// Bi-Lipschitz constant of the cone identification Δᵏ ≅ Δᵏ⁻¹ × [0,1]/collapse
/// entering the recursive certificate.
pub fn cone_constant() -> f64 {
    1.0
}

/// Operator norm of per-factor Jacobians (`coords × k`) with the Minkowski
/// metric on the target and the Euclidean metric of Δᵏ on the source.
pub fn differential_norm(jac: &[Vec<Vec<f64>>], k: usize) -> f64 {
    let mut gt = nalgebra::DMatrix::<f64>::zeros(k, k);
    for f in jac {
        for a in 0..k {
            for b in 0..k {
                let ca: Vec<f64> = f.iter().map(|r| r[a]).collect();
                let cb: Vec<f64> = f.iter().map(|r| r[b]).collect();
                gt[(a, b)] += mink(&ca, &cb);
            }
        }
    }
    let g = nalgebra::DMatrix::from_fn(k, k, |i, j| if i == j { 2.0 } else { 1.0 });
    let l = nalgebra::Cholesky::new(g).expect("positive definite").l();
    let li = l.try_inverse().expect("invertible");
    let m = &li * gt * li.transpose();
    let m = (&m + m.transpose()) * 0.5;
    m.symmetric_eigenvalues().max().max(0.0).sqrt()
}

fn apply_cols<S: Scalar>(cols: &[Vec<Q>], z: &[S]) -> Vec<S> {
    let m = cols[0].len();
    let mut out = vec![S::from_f64(0.0); m];
    for (w, c) in z.iter().zip(cols) {
        for (o, x) in out.iter_mut().zip(c) {
            if !x.is_zero() {
                *o = *o + w.scale(q_f64(x));
            }
        }
    }
    out
}

fn canonical_cover_list(vs: &[CoverPoint]) -> Vec<CoverPoint> {
    let inv: Vec<Deck> = vs[0].iter().map(|p| p.deck.inverse()).collect();
    vs.iter().map(|v| v.iter().zip(&inv).map(|(p, h)| p.translate(h)).collect()).collect()
}

fn norm_straight(mut v: Vec<CoverPoint>, mut a: SimplexMap) -> SimplexExpr {
    let keep = a.used_rows();
    if keep.iter().any(|k| !k) {
        v = v.into_iter().zip(&keep).filter(|(_, k)| **k).map(|(x, _)| x).collect();
        a = a.keep_rows(&keep);
    }
    let mut uniq: Vec<CoverPoint> = Vec::new();
    let mut target = Vec::with_capacity(v.len());
    for x in &v {
        match uniq.iter().position(|u| u == x) {
            Some(i) => target.push(i),
            None => {
                target.push(uniq.len());
                uniq.push(x.clone());
            }
        }
    }
    if uniq.len() <= 2 && uniq.len() < v.len() {
        a = a.merge_rows(&target, uniq.len());
        v = uniq;
    }
    if v.len() == 1 {
        return if a.src_dim() == 0 {
            Straight { vertices: v }
        } else {
            Affine { inner: Box::new(Straight { vertices: v }), map: a }
        };
    }
    if v.len() == 2 {
        let fwd = canonical_cover_list(&v);
        let rev = canonical_cover_list(&[v[1].clone(), v[0].clone()]);
        if rev < fwd {
            v.swap(0, 1);
            a = a.merge_rows(&[1, 0], 2);
        }
    }
    if a.is_identity() {
        Straight { vertices: v }
    } else {
        Affine { inner: Box::new(Straight { vertices: v }), map: a }
    }
}

/// Precompose a normal form with `m`.
fn apply_map(e: SimplexExpr, m: &SimplexMap) -> SimplexExpr {
    match e {
        Straight { vertices } => norm_straight(vertices, m.clone()),
        Affine { inner, map } => match *inner {
            Straight { vertices } => norm_straight(vertices, map.after(m)),
            other => apply_map(other, &map.after(m)),
        },
        Join { f, g, map } => norm_join(*f, *g, map.after(m)),
        Product { left, right, map } => norm_product(*left, *right, map.after(m)),
    }
}

fn drop_entry(v: &[Q], i: usize) -> Vec<Q> {
    v.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, x)| *x).collect()
}

fn norm_join(mut f: SimplexExpr, mut g: SimplexExpr, mut p: PrismMap) -> SimplexExpr {
    loop {
        if p.cols.iter().all(|c| c.1.is_zero()) {
            return apply_map(f, &p.base_map());
        }
        if p.cols.iter().all(|c| c.1.is_one()) {
            return apply_map(g, &p.base_map());
        }
        let used = p.base_map().used_rows();
        match used.iter().position(|u| !u) {
            Some(i) => {
                let m = p.base_dim();
                let fm = SimplexMap::face(m, i);
                f = apply_map(f, &fm);
                g = apply_map(g, &fm);
                p = PrismMap { cols: p.cols.iter().map(|(b, t)| (drop_entry(b, i), *t)).collect() };
            }
            None => break,
        }
    }
    if f == g {
        return apply_map(f, &p.base_map());
    }
    if let (Some(x), Some(y)) = (f.constant_point(), g.constant_point()) {
        let cols = p.cols.iter().map(|(_, t)| vec![Q::one() - *t, *t]).collect();
        return norm_straight(vec![x.clone(), y.clone()], SimplexMap { cols });
    }
    if p.base_dim() == 1 {
        let flip = SimplexMap::from_vertices(1, &[1, 0]);
        let f2 = apply_map(f.clone(), &flip);
        let g2 = apply_map(g.clone(), &flip);
        let p2 = PrismMap { cols: p.cols.iter().map(|(b, t)| (vec![b[1], b[0]], *t)).collect() };
        let a = Join { f: Box::new(f), g: Box::new(g), map: p };
        let b = Join { f: Box::new(f2), g: Box::new(g2), map: p2 };
        return if b.canonical_of_normal() < a.canonical_of_normal() { b } else { a };
    }
    Join { f: Box::new(f), g: Box::new(g), map: p }
}

fn norm_product(mut l: SimplexExpr, mut r: SimplexExpr, mut q: PairMap) -> SimplexExpr {
    loop {
        let ul = q.left().used_rows();
        if let Some(i) = ul.iter().position(|u| !u) {
            l = apply_map(l, &SimplexMap::face(q.left().dst_dim(), i));
            q = PairMap { cols: q.cols.iter().map(|(a, b)| (drop_entry(a, i), b.clone())).collect() };
            continue;
        }
        let ur = q.right().used_rows();
        if let Some(i) = ur.iter().position(|u| !u) {
            r = apply_map(r, &SimplexMap::face(q.right().dst_dim(), i));
            q = PairMap { cols: q.cols.iter().map(|(a, b)| (a.clone(), drop_entry(b, i))).collect() };
            continue;
        }
        break;
    }
    Product { left: Box::new(l), right: Box::new(r), map: q }
}

/// Plain hyperbolic distance of two single-factor evaluations.
pub fn factor_distance(a: &[f64], b: &[f64]) -> f64 {
    hdist(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine::q;

    fn pts() -> Vec<HPoint> {
        vec![HPoint::polar(0.3, 0.2), HPoint::polar(1.4, 2.1), HPoint::polar(0.9, 4.0), HPoint::polar(1.1, 5.5)]
    }

    #[test]
    fn faces_of_straight_are_straight() {
        let s = SimplexExpr::straight_points(&pts()).unwrap();
        let f = s.face(1).unwrap();
        let expect = SimplexExpr::straight_points(&[pts()[0].clone(), pts()[2].clone(), pts()[3].clone()]).unwrap();
        assert_eq!(f, expect);
        assert!(matches!(s.face(4), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn constant_and_segment() {
        let p = pts();
        let c = SimplexExpr::straight_points(&p[..1]).unwrap();
        assert_eq!(c.diameter_bound(), 0.0);
        assert_eq!(c.lipschitz_certificate().bound, 0.0);
        let s = SimplexExpr::straight_points(&p[..2]).unwrap();
        let m = s.evaluate(&[0.5, 0.5]).unwrap();
        let d0 = hdist(&m[0], &p[0].coords);
        let d1 = hdist(&m[0], &p[1].coords);
        assert!((d0 - d1).abs() < 1e-12);
        let d = hdist(&p[0].coords, &p[1].coords);
        assert!(s.lipschitz_certificate().bound >= d);
        let df = s.differential(&[0.5, 0.5]).unwrap();
        // speed d along Δ¹ of length √2
        assert!((df.norm - d / std::f64::consts::SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn reversed_segment_is_distinct_but_canonical() {
        let p = pts();
        let s = SimplexExpr::straight_points(&[p[0].clone(), p[1].clone()]).unwrap();
        let r = SimplexExpr::straight_points(&[p[1].clone(), p[0].clone()]).unwrap();
        assert_ne!(s.canonical(), r.canonical());
        let flip = SimplexExpr::affine(r.clone(), SimplexMap::from_vertices(1, &[1, 0])).unwrap();
        assert_eq!(flip.canonical(), s.canonical());
    }

    #[test]
    fn join_of_points_is_segment() {
        let p = pts();
        let a = SimplexExpr::straight_points(&p[..1]).unwrap();
        let b = SimplexExpr::straight_points(&p[1..2]).unwrap();
        let j = SimplexExpr::join(a, b, PrismMap::prism_simplex(0, 0)).unwrap();
        let s = SimplexExpr::straight_points(&p[..2]).unwrap();
        assert_eq!(j.canonical(), s.canonical());
        assert_eq!(j.point_at(&[q(1, 1), q(0, 1)]).unwrap(), s.vertex_point(0).unwrap());
    }
}
