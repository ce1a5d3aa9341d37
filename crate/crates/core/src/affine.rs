//! Exact affine maps between simplices, prisms and products of simplices.
//!
//! A map is given by the images of the vertices of its source Δᵏ; images are
//! barycentric coordinates with rational entries.

use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

pub type Q = Ratio<i64>;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

pub fn q_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn unit(m: usize, i: usize) -> Vec<Q> {
    let mut v = vec![Q::zero(); m + 1];
    v[i] = Q::one();
    v
}

fn combine(weights: &[Q], cols: &[Vec<Q>]) -> Vec<Q> {
    let mut out = vec![Q::zero(); cols[0].len()];
    for (w, c) in weights.iter().zip(cols) {
        if w.is_zero() {
            continue;
        }
        for (o, x) in out.iter_mut().zip(c) {
            *o += *w * *x;
        }
    }
    out
}

/// Exact rank of a rational matrix given by rows.
pub fn rank(mut rows: Vec<Vec<Q>>) -> usize {
    let mut r = 0;
    let ncols = rows.first().map_or(0, |x| x.len());
    for c in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let piv = rows[r][c];
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c] / piv;
                for j in c..ncols {
                    let v = rows[r][j];
                    rows[i][j] -= f * v;
                }
            }
        }
        r += 1;
    }
    r
}

/// Affine map Δᵏ → Δᵐ.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SimplexMap {
    pub cols: Vec<Vec<Q>>,
}

impl SimplexMap {
    pub fn identity(k: usize) -> Self {
        SimplexMap { cols: (0..=k).map(|i| unit(k, i)).collect() }
    }

    /// Face inclusion Δᵏ⁻¹ → Δᵏ skipping vertex `j`.
    pub fn face(k: usize, j: usize) -> Self {
        SimplexMap { cols: (0..=k).filter(|&i| i != j).map(|i| unit(k, i)).collect() }
    }

    /// Vertex map given by `idx` into Δᵐ.
    pub fn from_vertices(m: usize, idx: &[usize]) -> Self {
        SimplexMap { cols: idx.iter().map(|&i| unit(m, i)).collect() }
    }

    pub fn src_dim(&self) -> usize {
        self.cols.len() - 1
    }

    pub fn dst_dim(&self) -> usize {
        self.cols[0].len() - 1
    }

    pub fn is_identity(&self) -> bool {
        self.src_dim() == self.dst_dim() && self.cols.iter().enumerate().all(|(i, c)| *c == unit(self.dst_dim(), i))
    }

    pub fn apply(&self, b: &[Q]) -> Vec<Q> {
        combine(b, &self.cols)
    }

    pub fn apply_f64(&self, b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dst_dim() + 1];
        for (w, c) in b.iter().zip(&self.cols) {
            for (o, x) in out.iter_mut().zip(c) {
                *o += w * q_f64(x);
            }
        }
        out
    }

    /// `self ∘ inner`.
    pub fn after(&self, inner: &SimplexMap) -> SimplexMap {
        SimplexMap { cols: inner.cols.iter().map(|c| self.apply(c)).collect() }
    }

    /// Rank of the linear part (dimension of the image).
    pub fn rank(&self) -> usize {
        let c0 = &self.cols[0];
        rank(self.cols[1..].iter().map(|c| c.iter().zip(c0).map(|(a, b)| *a - *b).collect()).collect())
    }

    pub fn is_degenerate(&self) -> bool {
        self.rank() < self.src_dim()
    }

    /// Rows (target vertices) that receive weight from some column.
    pub fn used_rows(&self) -> Vec<bool> {
        let mut u = vec![false; self.dst_dim() + 1];
        for c in &self.cols {
            for (i, x) in c.iter().enumerate() {
                if !x.is_zero() {
                    u[i] = true;
                }
            }
        }
        u
    }

    pub fn keep_rows(&self, keep: &[bool]) -> SimplexMap {
        SimplexMap {
            cols: self
                .cols
                .iter()
                .map(|c| c.iter().zip(keep).filter(|(_, k)| **k).map(|(x, _)| *x).collect())
                .collect(),
        }
    }

    /// Sum rows according to `target[i]`, producing `m` rows.
    pub fn merge_rows(&self, target: &[usize], m: usize) -> SimplexMap {
        SimplexMap {
            cols: self
                .cols
                .iter()
                .map(|c| {
                    let mut v = vec![Q::zero(); m];
                    for (x, t) in c.iter().zip(target) {
                        v[*t] += *x;
                    }
                    v
                })
                .collect(),
        }
    }

    /// Linear part on the tangent space `{Σ = 0}` as an f64 matrix with
    /// respect to orthonormal bases.
    pub fn operator_norm(&self) -> f64 {
        let rows: Vec<Vec<f64>> = self.cols.iter().map(|c| c.iter().map(q_f64).collect()).collect();
        linear_operator_norm(&rows, &[])
    }
}

/// Operator norm of the affine map sending vertex `i` of Δᵏ to `imgs[i]`
/// (Euclidean coordinates), where `extra[i]` are appended coordinates.
pub(crate) fn linear_operator_norm(imgs: &[Vec<f64>], extra: &[Vec<f64>]) -> f64 {
    let k = imgs.len() - 1;
    if k == 0 {
        return 0.0;
    }
    let full: Vec<Vec<f64>> = imgs
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let mut w = v.clone();
            if let Some(e) = extra.get(i) {
                w.extend(e);
            }
            w
        })
        .collect();
    let dn = full[0].len();
    // Columns: images of e_i - e_0 in target coords.
    let a = nalgebra::DMatrix::from_fn(dn, k, |r, c| full[c + 1][r] - full[0][r]);
    // Source Gram of e_i - e_0.
    let g = nalgebra::DMatrix::from_fn(k, k, |i, j| if i == j { 2.0 } else { 1.0 });
    let l = nalgebra::Cholesky::new(g).expect("gram is positive definite").l();
    let linv = l.try_inverse().expect("invertible");
    let m = a * linv.transpose();
    m.singular_values().max()
}

fn rational_norm_prism(cols: &[(Vec<Q>, Q)]) -> f64 {
    let imgs: Vec<Vec<f64>> = cols.iter().map(|c| c.0.iter().map(q_f64).collect()).collect();
    let extra: Vec<Vec<f64>> = cols.iter().map(|c| vec![q_f64(&c.1)]).collect();
    linear_operator_norm(&imgs, &extra)
}

/// Affine map Δᵏ → Δᵐ × [0,1].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PrismMap {
    pub cols: Vec<(Vec<Q>, Q)>,
}

impl PrismMap {
    /// Simplex `[a₀..a_j, b_j..b_k]` of the standard prism decomposition,
    /// `aᵢ = (eᵢ, 0)`, `bᵢ = (eᵢ, 1)`.
    pub fn prism_simplex(k: usize, j: usize) -> Self {
        let mut cols = Vec::with_capacity(k + 2);
        for i in 0..=j {
            cols.push((unit(k, i), Q::zero()));
        }
        for i in j..=k {
            cols.push((unit(k, i), Q::one()));
        }
        PrismMap { cols }
    }

    pub fn src_dim(&self) -> usize {
        self.cols.len() - 1
    }

    pub fn base_dim(&self) -> usize {
        self.cols[0].0.len() - 1
    }

    pub fn after(&self, inner: &SimplexMap) -> PrismMap {
        PrismMap {
            cols: inner
                .cols
                .iter()
                .map(|w| {
                    let bary = combine(w, &self.cols.iter().map(|c| c.0.clone()).collect::<Vec<_>>());
                    let mut t = Q::zero();
                    for (x, c) in w.iter().zip(&self.cols) {
                        t += *x * c.1;
                    }
                    (bary, t)
                })
                .collect(),
        }
    }

    pub fn base_map(&self) -> SimplexMap {
        SimplexMap { cols: self.cols.iter().map(|c| c.0.clone()).collect() }
    }

    pub fn apply_f64(&self, b: &[f64]) -> (Vec<f64>, f64) {
        let bary = self.base_map().apply_f64(b);
        let t = b.iter().zip(&self.cols).map(|(w, c)| w * q_f64(&c.1)).sum();
        (bary, t)
    }

    pub fn rank(&self) -> usize {
        let c0 = &self.cols[0];
        rank(
            self.cols[1..]
                .iter()
                .map(|c| {
                    let mut r: Vec<Q> = c.0.iter().zip(&c0.0).map(|(a, b)| *a - *b).collect();
                    r.push(c.1 - c0.1);
                    r
                })
                .collect(),
        )
    }

    pub fn operator_norm(&self) -> f64 {
        rational_norm_prism(&self.cols)
    }
}

/// Affine map Δᵏ → Δᵐ × Δⁿ.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PairMap {
    pub cols: Vec<(Vec<Q>, Vec<Q>)>,
}

impl PairMap {
    pub fn src_dim(&self) -> usize {
        self.cols.len() - 1
    }

    pub fn left(&self) -> SimplexMap {
        SimplexMap { cols: self.cols.iter().map(|c| c.0.clone()).collect() }
    }

    pub fn right(&self) -> SimplexMap {
        SimplexMap { cols: self.cols.iter().map(|c| c.1.clone()).collect() }
    }

    pub fn from_parts(l: SimplexMap, r: SimplexMap) -> Self {
        PairMap { cols: l.cols.into_iter().zip(r.cols).collect() }
    }

    pub fn after(&self, inner: &SimplexMap) -> PairMap {
        PairMap::from_parts(self.left().after(inner), self.right().after(inner))
    }

    pub fn rank(&self) -> usize {
        let c0 = &self.cols[0];
        rank(
            self.cols[1..]
                .iter()
                .map(|c| {
                    let mut r: Vec<Q> = c.0.iter().zip(&c0.0).map(|(a, b)| *a - *b).collect();
                    r.extend(c.1.iter().zip(&c0.1).map(|(a, b)| *a - *b));
                    r
                })
                .collect(),
        )
    }

    pub fn operator_norm(&self) -> f64 {
        let imgs: Vec<Vec<f64>> = self.cols.iter().map(|c| c.0.iter().map(q_f64).collect()).collect();
        let extra: Vec<Vec<f64>> = self.cols.iter().map(|c| c.1.iter().map(q_f64).collect()).collect();
        linear_operator_norm(&imgs, &extra)
    }
}

/// Sign of a rational.
pub fn sign_of(x: &Q) -> i32 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn face_and_identity() {
        let f = SimplexMap::face(2, 1);
        assert_eq!(f.apply(&[q(1, 2), q(1, 2)]), vec![q(1, 2), q(0, 1), q(1, 2)]);
        assert!(SimplexMap::identity(3).is_identity());
        assert!(!f.is_degenerate());
        let collapse = SimplexMap::from_vertices(2, &[0, 0, 1]);
        assert!(collapse.is_degenerate());
    }

    #[test]
    fn norms() {
        assert!((SimplexMap::identity(2).operator_norm() - 1.0).abs() < 1e-12);
        assert!((SimplexMap::face(2, 0).operator_norm() - 1.0).abs() < 1e-12);
        let p = PrismMap::prism_simplex(1, 0);
        assert_eq!(p.rank(), 2);
        // (e0,0),(e0,1),(e1,1): vertical edge has length 1 vs √2 in Δ².
        assert!(p.operator_norm() > 0.7);
    }
}
