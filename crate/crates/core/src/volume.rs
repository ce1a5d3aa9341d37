//! Pairing of top-degree chains with the hyperbolic volume form.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::Chain;
use crate::error::{Error, Result};
use crate::expr::SimplexExpr;
use crate::geom::mink;
use crate::quotient::Quotient;
use crate::scalar::Dual;

/// Euclidean area of the standard 2-simplex used in the pairing bound.
pub const VOL_DELTA2: f64 = 0.433_012_701_892_219_3;

/// Supremal area of a straight triangle in H².
pub const V2: f64 = PI;

const QUADRATURE_REL_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairingMode {
    Exact,
    Quadrature,
}

impl PairingMode {
    pub fn default_tolerance(self) -> f64 {
        match self {
            PairingMode::Exact => 1e-9,
            PairingMode::Quadrature => 1e-4,
        }
    }
}

/// Neumaier summation.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let mut s = 0.0f64;
    let mut c = 0.0f64;
    for x in it {
        let t = s + x;
        if s.abs() >= x.abs() {
            c += (s - t) + x;
        } else {
            c += (x - t) + s;
        }
        s = t;
    }
    s + c
}

fn det3(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0])
}

/// Interior angle at `x` of the triangle `x y z`.
fn angle_at(x: &[f64], y: &[f64], z: &[f64]) -> f64 {
    let cy = mink(x, y);
    let cz = mink(x, z);
    let u: Vec<f64> = y.iter().zip(x).map(|(a, b)| a + cy * b).collect();
    let v: Vec<f64> = z.iter().zip(x).map(|(a, b)| a + cz * b).collect();
    let uu = mink(&u, &u).max(0.0);
    let vv = mink(&v, &v).max(0.0);
    let uv = mink(&u, &v);
    let cross = (uu * vv - uv * uv).max(0.0).sqrt();
    cross.atan2(uv)
}

/// Signed area `±(π - α - β - γ)` of the straight triangle on three points of
/// H², positive for counter-clockwise vertex order.
pub fn triangle_area(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let s = det3(a, b, c);
    if s == 0.0 || a == b || b == c || a == c {
        return 0.0;
    }
    let defect = (PI - angle_at(a, b, c) - angle_at(b, c, a) - angle_at(c, a, b)).max(0.0);
    defect * s.signum()
}

fn det_n(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    nalgebra::DMatrix::from_fn(n, n, |i, j| m[j][i]).determinant()
}

const GL5: [(f64, f64); 5] = [
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.0, 0.568_888_888_888_888_9),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];
const GL4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
];

/// Pullback of the area form at edge coordinates `(u, v)`.
fn area_density(s: &SimplexExpr, u: f64, v: f64) -> f64 {
    let mut z0 = Dual::<2>::constant(1.0 - u - v);
    z0.d = [-1.0, -1.0];
    let z = [z0, Dual::variable(u, 0), Dual::variable(v, 1)];
    let x = &s.eval_generic(&z)[0];
    let p: Vec<f64> = x.iter().map(|c| c.v).collect();
    let du: Vec<f64> = x.iter().map(|c| c.d[0]).collect();
    let dv: Vec<f64> = x.iter().map(|c| c.d[1]).collect();
    det3(&p, &du, &dv)
}

/// Collapsed Gauss product rule on the triangle with corners `p` in the
/// `(u, v)` chart; exact for polynomials of degree 7.
fn tri_rule(s: &SimplexExpr, p: [[f64; 2]; 3]) -> f64 {
    let e1 = [p[1][0] - p[0][0], p[1][1] - p[0][1]];
    let e2 = [p[2][0] - p[1][0], p[2][1] - p[1][1]];
    let jac = (e1[0] * e2[1] - e1[1] * e2[0]).abs();
    let mut terms = Vec::with_capacity(20);
    for (xs, ws) in GL5 {
        let sv = 0.5 * (xs + 1.0);
        for (xt, wt) in GL4 {
            let tv = 0.5 * (xt + 1.0);
            let u = p[0][0] + sv * e1[0] + sv * tv * e2[0];
            let v = p[0][1] + sv * e1[1] + sv * tv * e2[1];
            terms.push(0.25 * ws * wt * sv * jac * area_density(s, u, v));
        }
    }
    compensated_sum(terms)
}

fn children(p: [[f64; 2]; 3]) -> [[[f64; 2]; 3]; 4] {
    let m = |a: [f64; 2], b: [f64; 2]| [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
    let m01 = m(p[0], p[1]);
    let m12 = m(p[1], p[2]);
    let m02 = m(p[0], p[2]);
    [[p[0], m01, m02], [m01, p[1], m12], [m02, m12, p[2]], [m01, m12, m02]]
}

fn adaptive(s: &SimplexExpr, p: [[f64; 2]; 3], whole: f64, tol: f64, depth: usize, out: &mut Vec<f64>) {
    let kids = children(p);
    let parts: Vec<f64> = kids.iter().map(|c| tri_rule(s, *c)).collect();
    let refined = compensated_sum(parts.iter().copied());
    if (refined - whole).abs() <= tol || depth >= 10 {
        out.push(refined);
        return;
    }
    for (c, w) in kids.iter().zip(parts) {
        adaptive(s, *c, w, tol / 4.0, depth + 1, out);
    }
}

/// Adaptive quadrature of the pulled-back area form over Δ².
pub fn quadrature_area(s: &SimplexExpr, rel_tol: f64) -> f64 {
    let p = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    let whole = tri_rule(s, p);
    let tol = rel_tol * whole.abs().max(1e-3);
    let mut out = Vec::new();
    adaptive(s, p, whole, tol, 0, &mut out);
    compensated_sum(out)
}

fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (1..=n)
        .map(|i| {
            let mut x = (PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Volume of a 3-simplex in H³ by collapsed Gauss rules of increasing order.
pub fn quadrature_volume3(s: &SimplexExpr, rel_tol: f64) -> f64 {
    let density = |a: f64, b: f64, c: f64| {
        let mut z0 = Dual::<3>::constant(1.0 - a - b - c);
        z0.d = [-1.0, -1.0, -1.0];
        let z = [z0, Dual::variable(a, 0), Dual::variable(b, 1), Dual::variable(c, 2)];
        let x = &s.eval_generic(&z)[0];
        let cols: Vec<Vec<f64>> = (0..4)
            .map(|j| if j == 0 { x.iter().map(|c| c.v).collect() } else { x.iter().map(|c| c.d[j - 1]).collect() })
            .collect();
        det_n(&cols)
    };
    let rule = |n: usize| {
        let g = gauss_legendre(n);
        let mut terms = Vec::new();
        for &(x1, w1) in &g {
            let s1 = 0.5 * (x1 + 1.0);
            for &(x2, w2) in &g {
                let s2 = 0.5 * (x2 + 1.0);
                for &(x3, w3) in &g {
                    let s3 = 0.5 * (x3 + 1.0);
                    // (s1, s2, s3) -> e1 s1 + (e2-e1) s1 s2 + (e3-e2) s1 s2 s3
                    let a = s1 * (1.0 - s2);
                    let b = s1 * s2 * (1.0 - s3);
                    let c = s1 * s2 * s3;
                    terms.push(0.125 * w1 * w2 * w3 * s1 * s1 * s2 * density(a, b, c));
                }
            }
        }
        compensated_sum(terms)
    };
    let mut prev = rule(4);
    for n in (6..=24).step_by(2) {
        let cur = rule(n);
        if (cur - prev).abs() <= rel_tol * cur.abs().max(1e-3) {
            return cur;
        }
        prev = cur;
    }
    prev
}

/// `⟨dvol, σ⟩` for a single 2-simplex in H².
pub fn pair_simplex(s: &SimplexExpr, mode: PairingMode) -> Result<f64> {
    if s.factors() != 1 {
        return Err(Error::Input("volume pairing needs a single hyperbolic factor".into()));
    }
    match s.dim() {
        2 => {}
        3 => return Ok(quadrature_volume3(s, 1e-8)),
        k => return Err(Error::DimensionMismatch { expected: 2, got: k }),
    }
    if mode == PairingMode::Exact {
        if let Some(v) = s.vertices() {
            let c: Vec<Vec<f64>> = v.iter().map(|p| p[0].coords()).collect();
            if c[0].len() == 3 {
                return Ok(triangle_area(&c[0], &c[1], &c[2]));
            }
        }
    }
    Ok(quadrature_area(s, QUADRATURE_REL_TOL))
}

/// `Σ aₖ ⟨dvol, σₖ⟩`, checking `|⟨dvol,σ⟩| ≤ L²·vol(Δ²)` per term.
pub fn pair_dvol(c: &Chain, mode: PairingMode) -> Result<f64> {
    if c.degree() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: c.degree() });
    }
    let terms: Vec<(&SimplexExpr, f64)> = c.iter().map(|(s, a)| (s, *a)).collect();
    let parts = terms
        .par_iter()
        .map(|(s, a)| {
            let v = pair_simplex(s, mode)?;
            let l = s.lipschitz_certificate().bound;
            if v.abs() > l * l * VOL_DELTA2 + 1e-12 {
                return Err(Error::Contract(format!("pairing {v} exceeds certificate bound {}", l * l * VOL_DELTA2)));
            }
            Ok(a * v)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(compensated_sum(parts))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FundamentalCheck {
    pub is_fundamental: bool,
    pub pairing: f64,
    pub residual: f64,
}

pub fn is_fundamental(q: &Quotient, c: &Chain, mode: PairingMode) -> Result<FundamentalCheck> {
    if !c.boundary().is_empty() {
        return Err(Error::Contract("chain is not a cycle".into()));
    }
    let pairing = pair_dvol(c, mode)?;
    let residual = (pairing - q.area).abs();
    Ok(FundamentalCheck { is_fundamental: residual <= mode.default_tolerance(), pairing, residual })
}

/// `vol/π`, a lower bound for the ℓ¹-norm of any straight fundamental cycle.
pub fn thurston_lower_bound(q: &Quotient) -> f64 {
    q.area / V2
}

/// Asserts every straight term has area strictly below π.
pub fn check_straight_areas(c: &Chain) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (s, _) in c.iter() {
        if s.is_straight() && s.dim() == 2 {
            let a = pair_simplex(s, PairingMode::Exact)?.abs();
            if a >= V2 {
                return Err(Error::Contract(format!("straight triangle of area {a}")));
            }
            worst = worst.max(a);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::HPoint;
    use crate::quotient::genus_surface;

    #[test]
    fn fan_triangle_area() {
        let q = genus_surface(2).unwrap();
        for (s, _, _) in q.fan_terms() {
            let a = pair_simplex(&s, PairingMode::Exact).unwrap().abs();
            assert!((a - PI / 2.0).abs() < 1e-12);
            let b = pair_simplex(&s, PairingMode::Quadrature).unwrap().abs();
            assert!((b - PI / 2.0).abs() < 1e-6);
        }
    }

    #[test]
    fn degenerate_triangle_pairs_to_zero() {
        let p = HPoint::polar(1.0, 0.3);
        let r = HPoint::polar(2.0, 1.3);
        let s = SimplexExpr::straight_points(&[p.clone(), r, p]).unwrap();
        assert_eq!(pair_simplex(&s, PairingMode::Exact).unwrap(), 0.0);
    }

    #[test]
    fn gauss_legendre_weights() {
        let g = gauss_legendre(7);
        let w: f64 = g.iter().map(|x| x.1).sum();
        assert!((w - 2.0).abs() < 1e-14);
        let m: f64 = g.iter().map(|x| x.1 * x.0.powi(12)).sum();
        assert!((m - 2.0 / 13.0).abs() < 1e-14);
    }

    #[test]
    fn compensated() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(v), 2.0);
    }
}
