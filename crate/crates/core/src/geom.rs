//! Hyperboloid model of Hⁿ: points, isometries, exp/log and geodesics.
//!
//! Points are vectors `x` with `⟨x,x⟩ = -1`, `x₀ > 0` for the Minkowski form
//! `⟨x,y⟩ = -x₀y₀ + Σ xᵢyᵢ`. Inputs are expected to stay within
//! [`ENVELOPE_RADIUS`] of the origin.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Maximal distance from the origin for which the kernel is validated.
pub const ENVELOPE_RADIUS: f64 = 30.0;

const GEODESIC_LINEAR_CUTOFF: f64 = 1e-6;
const ORTHO_DRIFT: f64 = 1e-10;
const CHAIN_REORTHO: usize = 16;

pub fn mink<S: Scalar>(a: &[S], b: &[S]) -> S {
    let mut s = -(a[0] * b[0]);
    for i in 1..a.len() {
        s = s + a[i] * b[i];
    }
    s
}

/// Project onto the upper sheet by recomputing the time coordinate.
pub fn renormalize<S: Scalar>(x: &mut [S]) {
    let mut r = S::from_f64(1.0);
    for c in &x[1..] {
        r = r + *c * *c;
    }
    x[0] = r.sqrt();
}

/// Hyperbolic distance between hyperboloid vectors, accurate at small range.
pub fn hdist<S: Scalar>(x: &[S], y: &[S]) -> S {
    let c = -mink(x, y);
    if c.value() < 2.0 {
        let mut q = S::from_f64(0.0);
        let d0 = x[0] - y[0];
        q = q - d0 * d0;
        for i in 1..x.len() {
            let d = x[i] - y[i];
            q = q + d * d;
        }
        if q.value() <= 0.0 {
            return S::from_f64(0.0);
        }
        (q.sqrt().scale(0.5)).asinh().scale(2.0)
    } else {
        c.acosh()
    }
}

/// Point at parameter `t ∈ [0,1]` on the geodesic from `x` to `y`.
pub fn geodesic<S: Scalar>(x: &[S], y: &[S], t: S) -> Vec<S> {
    let one = S::from_f64(1.0);
    let d = hdist(x, y);
    let mut out: Vec<S> = if d.value() < GEODESIC_LINEAR_CUTOFF {
        x.iter().zip(y).map(|(&a, &b)| (one - t) * a + t * b).collect()
    } else {
        let sd = d.sinh();
        let wa = ((one - t) * d).sinh() / sd;
        let wb = (t * d).sinh() / sd;
        x.iter().zip(y).map(|(&a, &b)| wa * a + wb * b).collect()
    };
    renormalize(&mut out);
    out
}

/// Straight simplex on `verts` evaluated at barycentric `z` by cone recursion:
/// `[x₀..xₖ](z) = geodesic([x₀..xₖ₋₁](z'/(1-zₖ)), xₖ; zₖ)`.
pub fn straight_eval<S: Scalar>(verts: &[Vec<S>], z: &[S]) -> Vec<S> {
    let k = verts.len() - 1;
    if k == 0 {
        return verts[0].clone();
    }
    let t = z[k];
    if t.value() >= 1.0 {
        return verts[k].clone();
    }
    let rest = S::from_f64(1.0) - t;
    let inner: Vec<S> = z[..k].iter().map(|&w| w / rest).collect();
    let p = straight_eval(&verts[..k], &inner);
    if t.value() == 0.0 {
        return p;
    }
    geodesic(&p, &verts[k], t)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HPoint {
    pub coords: Vec<f64>,
}

impl HPoint {
    pub fn origin(n: usize) -> Self {
        let mut coords = vec![0.0; n + 1];
        coords[0] = 1.0;
        HPoint { coords }
    }

    /// Validates the sheet and renormalizes.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::Input("hyperboloid point needs at least 2 coordinates".into()));
        }
        let q = mink(&coords, &coords);
        if !(q < 0.0) || coords[0] <= 0.0 || !coords.iter().all(|c| c.is_finite()) {
            return Err(Error::Input("not on the upper hyperboloid sheet".into()));
        }
        Ok(Self::from_raw(coords))
    }

    pub fn from_raw(mut coords: Vec<f64>) -> Self {
        renormalize(&mut coords);
        HPoint { coords }
    }

    /// Point of H² at distance `r` from the origin in direction `theta`.
    pub fn polar(r: f64, theta: f64) -> Self {
        HPoint::from_raw(vec![r.cosh(), r.sinh() * theta.cos(), r.sinh() * theta.sin()])
    }

    /// Dimension of the hyperbolic space.
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn norm_defect(&self) -> f64 {
        (mink(&self.coords, &self.coords) + 1.0).abs()
    }

    /// Poincaré disk coordinates.
    pub fn to_disk(&self) -> Vec<f64> {
        let d = 1.0 + self.coords[0];
        self.coords[1..].iter().map(|c| c / d).collect()
    }

    pub fn from_disk(u: &[f64]) -> Self {
        let r2: f64 = u.iter().map(|a| a * a).sum();
        let den = 1.0 - r2;
        let mut c = vec![(1.0 + r2) / den];
        c.extend(u.iter().map(|a| 2.0 * a / den));
        HPoint::from_raw(c)
    }
}

fn check_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { expected: a, got: b });
    }
    Ok(())
}

pub fn dist(x: &HPoint, y: &HPoint) -> Result<f64> {
    check_dim(x.coords.len(), y.coords.len())?;
    Ok(hdist(&x.coords, &y.coords))
}

/// Project `v` onto the tangent space at `x`.
pub fn project_tangent(x: &HPoint, v: &[f64]) -> Vec<f64> {
    let c = mink(&x.coords, v);
    v.iter().zip(&x.coords).map(|(a, b)| a + c * b).collect()
}

pub fn exp_map(x: &HPoint, v: &[f64]) -> Result<HPoint> {
    check_dim(x.coords.len(), v.len())?;
    let v = project_tangent(x, v);
    let n2 = mink(&v, &v).max(0.0);
    let n = n2.sqrt();
    if n == 0.0 {
        return Ok(x.clone());
    }
    let (c, s) = (n.cosh(), n.sinh() / n);
    Ok(HPoint::from_raw(x.coords.iter().zip(&v).map(|(a, b)| c * a + s * b).collect()))
}

pub fn log_map(x: &HPoint, y: &HPoint) -> Result<Vec<f64>> {
    check_dim(x.coords.len(), y.coords.len())?;
    let d = hdist(&x.coords, &y.coords);
    if d == 0.0 {
        return Ok(vec![0.0; x.coords.len()]);
    }
    let c = mink(&x.coords, &y.coords);
    let u: Vec<f64> = y.coords.iter().zip(&x.coords).map(|(b, a)| b + c * a).collect();
    let un = mink(&u, &u).max(0.0).sqrt();
    if un == 0.0 {
        return Ok(vec![0.0; x.coords.len()]);
    }
    Ok(u.iter().map(|a| a * d / un).collect())
}

/// Element of the identity component of O(n,1), stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HIsometry {
    pub dim: usize,
    pub m: Vec<f64>,
}

impl HIsometry {
    pub fn identity(n: usize) -> Self {
        let d = n + 1;
        let mut m = vec![0.0; d * d];
        for i in 0..d {
            m[i * d + i] = 1.0;
        }
        HIsometry { dim: n, m }
    }

    pub fn from_rows(n: usize, m: Vec<f64>) -> Result<Self> {
        let d = n + 1;
        if m.len() != d * d {
            return Err(Error::DimensionMismatch { expected: d * d, got: m.len() });
        }
        let g = HIsometry { dim: n, m };
        if g.lorentz_defect() > 1e-6 || g.at(0, 0) < 1.0 - 1e-9 || g.det() < 0.0 {
            return Err(Error::Input("matrix is not an orientation-preserving isometry".into()));
        }
        Ok(g)
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.m[i * (self.dim + 1) + j]
    }

    /// Rotation of H² about the origin.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        HIsometry { dim: 2, m: vec![1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c] }
    }

    /// Translation of H² by `d` along the x-axis.
    pub fn translation_x(d: f64) -> Self {
        let (c, s) = (d.cosh(), d.sinh());
        HIsometry { dim: 2, m: vec![c, s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0] }
    }

    /// Pure boost carrying the origin to `p` without rotation.
    pub fn boost(p: &HPoint) -> Self {
        let n = p.dim();
        let d = n + 1;
        let x = &p.coords;
        let mut m = vec![0.0; d * d];
        m[0] = x[0];
        for i in 1..d {
            m[i] = x[i];
            m[i * d] = x[i];
            for j in 1..d {
                m[i * d + j] = x[i] * x[j] / (1.0 + x[0]) + if i == j { 1.0 } else { 0.0 };
            }
        }
        HIsometry { dim: n, m }
    }

    pub fn apply_slice<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let d = self.dim + 1;
        (0..d)
            .map(|i| {
                let mut s = S::from_f64(0.0);
                for j in 0..d {
                    s = s + x[j].scale(self.m[i * d + j]);
                }
                s
            })
            .collect()
    }

    pub fn apply(&self, x: &HPoint) -> HPoint {
        HPoint::from_raw(self.apply_slice(&x.coords))
    }

    /// Image of the origin: the first column.
    pub fn orbit_point(&self) -> Vec<f64> {
        let d = self.dim + 1;
        (0..d).map(|i| self.m[i * d]).collect()
    }

    pub fn compose(&self, other: &HIsometry) -> HIsometry {
        let d = self.dim + 1;
        let mut m = vec![0.0; d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.m[i * d + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..d {
                    m[i * d + j] += a * other.m[k * d + j];
                }
            }
        }
        let mut g = HIsometry { dim: self.dim, m };
        if g.relative_drift() > ORTHO_DRIFT {
            g.reorthogonalize();
        }
        g
    }

    /// Product of a sequence, re-orthogonalized every few factors.
    pub fn compose_chain(factors: &[HIsometry]) -> Option<HIsometry> {
        let mut it = factors.iter();
        let mut acc = it.next()?.clone();
        for (i, g) in it.enumerate() {
            acc = acc.compose(g);
            if (i + 1) % CHAIN_REORTHO == 0 && acc.relative_drift() > ORTHO_DRIFT {
                acc.reorthogonalize();
            }
        }
        Some(acc)
    }

    /// `J Gᵀ J`.
    pub fn inverse(&self) -> HIsometry {
        let d = self.dim + 1;
        let mut m = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                let s = if (i == 0) != (j == 0) { -1.0 } else { 1.0 };
                m[i * d + j] = s * self.m[j * d + i];
            }
        }
        HIsometry { dim: self.dim, m }
    }

    /// Max entry of `GᵀJG - J`.
    pub fn lorentz_defect(&self) -> f64 {
        let d = self.dim + 1;
        let mut worst: f64 = 0.0;
        for a in 0..d {
            for b in 0..d {
                let mut s = -self.m[a] * self.m[b];
                for i in 1..d {
                    s += self.m[i * d + a] * self.m[i * d + b];
                }
                let target = if a != b {
                    0.0
                } else if a == 0 {
                    -1.0
                } else {
                    1.0
                };
                worst = worst.max((s - target).abs());
            }
        }
        worst
    }

    /// Lorentz defect scaled by the squared largest entry, the size of the
    /// rounding error inherent in storing `G`.
    pub fn relative_drift(&self) -> f64 {
        let s = self.m.iter().fold(1.0f64, |a, b| a.max(b.abs()));
        self.lorentz_defect() / (s * s)
    }

    /// Minkowski Gram–Schmidt on the columns.
    pub fn reorthogonalize(&mut self) {
        let d = self.dim + 1;
        let mut cols: Vec<Vec<f64>> = (0..d).map(|j| (0..d).map(|i| self.m[i * d + j]).collect()).collect();
        renormalize(&mut cols[0]);
        for j in 1..d {
            let mut c = cols[j].clone();
            let p0 = mink(&c, &cols[0]);
            for (a, b) in c.iter_mut().zip(&cols[0]) {
                *a += p0 * b;
            }
            for prev in cols.iter().take(j).skip(1) {
                let p = mink(&c, prev);
                for (a, b) in c.iter_mut().zip(prev) {
                    *a -= p * b;
                }
            }
            let n = mink(&c, &c).max(f64::MIN_POSITIVE).sqrt();
            for a in c.iter_mut() {
                *a /= n;
            }
            cols[j] = c;
        }
        for (j, c) in cols.iter().enumerate() {
            for i in 0..d {
                self.m[i * d + j] = c[i];
            }
        }
    }

    pub fn det(&self) -> f64 {
        let d = self.dim + 1;
        nalgebra::DMatrix::from_row_slice(d, d, &self.m).determinant()
    }

    /// `cosh` of the translation length for an element of Isom⁺(H²),
    /// from `tr = 1 + 2 cosh ℓ`.
    pub fn translation_length(&self) -> f64 {
        let tr: f64 = (0..=self.dim).map(|i| self.at(i, i)).sum();
        ((tr - 1.0) / 2.0).max(1.0).acosh()
    }
}

/// Isometry carrying the base frame at the origin to the frame at `p` rotated
/// by `theta`.
pub fn frame_isometry(p: &HPoint, theta: f64) -> Result<HIsometry> {
    check_dim(3, p.coords.len())?;
    Ok(HIsometry::boost(p).compose(&HIsometry::rotation(theta)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductPoint {
    pub factors: Vec<HPoint>,
}

impl ProductPoint {
    pub fn dist(&self, other: &ProductPoint) -> Result<f64> {
        check_dim(self.factors.len(), other.factors.len())?;
        let mut s = 0.0;
        for (a, b) in self.factors.iter().zip(&other.factors) {
            let d = dist(a, b)?;
            s += d * d;
        }
        Ok(s.sqrt())
    }
}

/// Product-metric distance on raw factor coordinate lists.
pub fn product_dist(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = hdist(x, y);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaryPoint {
    pub weights: Vec<f64>,
}

impl BaryPoint {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::Input("barycentric weights must be non-negative".into()));
        }
        let s: f64 = weights.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::Input(format!("barycentric weights sum to {s}")));
        }
        Ok(BaryPoint { weights: weights.iter().map(|w| w / s).collect() })
    }

    pub fn vertex(k: usize, j: usize) -> Self {
        let mut weights = vec![0.0; k + 1];
        weights[j] = 1.0;
        BaryPoint { weights }
    }

    pub fn barycenter(k: usize) -> Self {
        BaryPoint { weights: vec![1.0 / (k + 1) as f64; k + 1] }
    }

    pub fn dim(&self) -> usize {
        self.weights.len() - 1
    }
}

/// Lattice points `i/res` of Δᵏ (all weights multiples of `1/res`).
pub fn simplex_grid(k: usize, res: usize) -> Vec<Vec<f64>> {
    fn rec(k: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            let mut v = cur.clone();
            v.push(left);
            out.push(v);
            return;
        }
        for i in 0..=left {
            cur.push(i);
            rec(k, left - i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, res, &mut Vec::new(), &mut out);
    out.into_iter().map(|v| v.into_iter().map(|i| i as f64 / res as f64).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_closed_forms() {
        let o = HPoint::origin(2);
        assert_eq!(dist(&o, &o).unwrap(), 0.0);
        let p = HPoint::polar(1.0, 0.0);
        assert!((dist(&o, &p).unwrap() - 1.0).abs() < 1e-14);
        let q = HPoint::origin(3);
        assert!(matches!(dist(&o, &q), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn exp_closed_form_and_zero() {
        let o = HPoint::origin(2);
        assert_eq!(exp_map(&o, &[0.0, 0.0, 0.0]).unwrap(), o);
        let p = exp_map(&o, &[0.0, 1.0, 0.0]).unwrap();
        assert!((p.coords[0] - 1f64.cosh()).abs() < 1e-14);
        assert!((p.coords[1] - 1f64.sinh()).abs() < 1e-14);
        assert_eq!(log_map(&p, &p).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn frame_isometry_base_cases() {
        let o = HPoint::origin(2);
        let id = frame_isometry(&o, 0.0).unwrap();
        assert_eq!(id, HIsometry::identity(2));
        let r = frame_isometry(&o, std::f64::consts::FRAC_PI_2).unwrap();
        assert!(dist(&r.apply(&o), &o).unwrap() < 1e-15);
        let e = r.apply_slice(&[0.0, 1.0, 0.0]);
        assert!(e[1].abs() < 1e-15 && (e[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn inverse_and_reorthogonalize() {
        let p = HPoint::polar(2.0, 0.7);
        let g = frame_isometry(&p, 1.3).unwrap();
        let gi = g.inverse();
        let e = g.compose(&gi);
        for i in 0..3 {
            for j in 0..3 {
                let t = if i == j { 1.0 } else { 0.0 };
                assert!((e.at(i, j) - t).abs() < 1e-12);
            }
        }
        let mut noisy = g.clone();
        noisy.m[4] += 1e-7;
        assert!(noisy.lorentz_defect() > 1e-8);
        noisy.reorthogonalize();
        assert!(noisy.lorentz_defect() < 1e-12);
        assert!((g.det() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn straight_vertices_are_exact() {
        let v = vec![HPoint::polar(1.0, 0.1).coords, HPoint::polar(2.0, 2.0).coords, HPoint::polar(0.5, 4.0).coords];
        for j in 0..3 {
            let mut z = vec![0.0; 3];
            z[j] = 1.0;
            assert_eq!(straight_eval(&v, &z), v[j]);
        }
    }

    #[test]
    fn grid_counts() {
        assert_eq!(simplex_grid(2, 4).len(), 15);
        assert_eq!(simplex_grid(3, 2).len(), 10);
    }
}
