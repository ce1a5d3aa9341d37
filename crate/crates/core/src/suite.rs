//! Seeded randomized invariant suites shared by the self-test and the
//! acceptance harness.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::affine::PrismMap;
use crate::chain::SupportSet;
use crate::error::Result;
use crate::expr::SimplexExpr;
use crate::geom::{hdist, simplex_grid, HPoint};
use crate::product::{aw_ez, cross_cochain, ez, Cochain};
use crate::volume::{pair_simplex, PairingMode, VOL_DELTA2};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub trials: usize,
    pub violations: usize,
    /// Largest observed ratio of measured quantity to its bound.
    pub worst_ratio: f64,
}

impl SuiteResult {
    fn new(name: &str) -> Self {
        SuiteResult { name: name.into(), trials: 0, violations: 0, worst_ratio: 0.0 }
    }

    fn record(&mut self, value: f64, bound: f64) {
        self.trials += 1;
        let r = if bound > 0.0 {
            value / bound
        } else if value > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        self.worst_ratio = self.worst_ratio.max(r);
        if value > bound * (1.0 + 1e-9) + 1e-12 {
            self.violations += 1;
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0 && self.trials > 0
    }
}

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn random_point<R: Rng>(rng: &mut R, radius: f64) -> HPoint {
    HPoint::polar(rng.gen::<f64>() * radius, rng.gen::<f64>() * 2.0 * PI)
}

/// Straight `k`-simplex with vertices in the ball of the given radius.
pub fn random_straight<R: Rng>(rng: &mut R, k: usize, radius: f64) -> SimplexExpr {
    let pts: Vec<HPoint> = (0..=k).map(|_| random_point(rng, radius)).collect();
    SimplexExpr::straight_points(&pts).expect("planar points")
}

/// Geodesic join of two straight `k`-simplices through one prism simplex.
pub fn random_join<R: Rng>(rng: &mut R, k: usize, radius: f64) -> SimplexExpr {
    let f = random_straight(rng, k, radius);
    let g = random_straight(rng, k, radius);
    let j = rng.gen_range(0..=k);
    SimplexExpr::join(f, g, PrismMap::prism_simplex(k, j)).expect("matching dimensions")
}

fn sampled_diameter(s: &SimplexExpr, res: usize) -> f64 {
    let pts: Vec<Vec<Vec<f64>>> = simplex_grid(s.dim(), res).iter().map(|z| s.eval_generic(z)).collect();
    let mut d: f64 = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let sq: f64 = pts[i].iter().zip(&pts[j]).map(|(a, b)| hdist(a, b).powi(2)).sum();
            d = d.max(sq.sqrt());
        }
    }
    d
}

/// Sampled expansion of joins and straight simplices against the recursive
/// certificate.
pub fn lipschitz_suite(seed: u64, trials: usize) -> SuiteResult {
    let mut r = rng(seed);
    let mut out = SuiteResult::new("join_lipschitz");
    for t in 0..trials {
        let k = 1 + t % 2;
        let s = if t % 3 == 0 { random_straight(&mut r, k, 2.0) } else { random_join(&mut r, k, 2.0) };
        out.record(s.sampled_expansion(8), s.lipschitz_certificate().bound);
    }
    out
}

/// Sampled diameter against the inductive triangle-inequality bound.
pub fn diameter_suite(seed: u64, trials: usize) -> SuiteResult {
    let mut r = rng(seed);
    let mut out = SuiteResult::new("diameter");
    for t in 0..trials {
        let k = 1 + t % 3;
        let s = if t % 2 == 0 { random_straight(&mut r, k, 3.0) } else { random_join(&mut r, k.min(2), 3.0) };
        out.record(sampled_diameter(&s, 6), s.diameter_bound());
    }
    out
}

/// `|⟨dvol, σ⟩| ≤ L²·vol(Δ²)` on straight triangles and joins of segments.
pub fn pairing_bound_suite(seed: u64, trials: usize) -> Result<SuiteResult> {
    let mut r = rng(seed);
    let mut out = SuiteResult::new("pairing_bound");
    for t in 0..trials {
        let (s, mode) = if t % 2 == 0 {
            (random_straight(&mut r, 2, 3.0), PairingMode::Exact)
        } else {
            (random_join(&mut r, 1, 2.0), PairingMode::Quadrature)
        };
        let l = s.lipschitz_certificate().bound;
        out.record(pair_simplex(&s, mode)?.abs(), l * l * VOL_DELTA2);
    }
    Ok(out)
}

/// Straight triangles of diameter at most 10 have area below π.
pub fn thurston_suite(seed: u64, trials: usize) -> Result<SuiteResult> {
    let mut r = rng(seed);
    let mut out = SuiteResult::new("straight_area_below_pi");
    for _ in 0..trials {
        let s = random_straight(&mut r, 2, 5.0);
        let a = pair_simplex(&s, PairingMode::Exact)?.abs();
        out.trials += 1;
        out.worst_ratio = out.worst_ratio.max(a / PI);
        if a >= PI {
            out.violations += 1;
        }
    }
    Ok(out)
}

/// `aw∘ez = id` up to degenerate pairs for every `m + n ≤ max_degree`, and
/// `⟨f×g, ez(σ⊗ρ)⟩ = f(σ)g(ρ)`.
pub fn product_suite(seed: u64, max_degree: usize) -> Result<SuiteResult> {
    let mut r = rng(seed);
    let mut out = SuiteResult::new("aw_ez_identity");
    for m in 0..=max_degree {
        for n in 0..=max_degree - m {
            let s = random_straight(&mut r, m, 1.5);
            let t = random_straight(&mut r, n, 1.5);
            let map = aw_ez(&s, &t)?;
            let identity = map.len() == 1 && map.get(&(s.canonical(), t.canonical())) == Some(&1.0);
            let mut f = Cochain::new(m);
            let fv = r.gen_range(-1.0..1.0);
            f.set(&s, fv);
            let mut g = Cochain::new(n);
            let gv = r.gen_range(-1.0..1.0);
            g.set(&t, gv);
            let lhs = cross_cochain(&f, &g, 1).eval_chain(&ez(&s, &t))?;
            out.trials += 1;
            let err = (lhs - fv * gv).abs();
            out.worst_ratio = out.worst_ratio.max(err);
            if !identity || err > 1e-12 {
                out.violations += 1;
            }
        }
    }
    Ok(out)
}

/// `‖f×g‖^A ≤ ‖f‖^{A_M}·‖g‖^{A_N}` on random finite supports.
pub fn cross_norm_suite(seed: u64, trials: usize) -> Result<SuiteResult> {
    let mut r = rng(seed);
    let mut out = SuiteResult::new("cross_norm");
    let pool_m: Vec<SimplexExpr> = (0..6).map(|_| random_straight(&mut r, 1, 1.5)).collect();
    let pool_n: Vec<SimplexExpr> = (0..6).map(|_| random_straight(&mut r, 1, 1.5)).collect();
    for _ in 0..trials {
        let mut f = Cochain::new(1);
        let mut g = Cochain::new(1);
        for s in &pool_m {
            f.set(s, r.gen_range(-2.0..2.0));
        }
        for s in &pool_n {
            g.set(s, r.gen_range(-2.0..2.0));
        }
        let mut a = SupportSet::default();
        for _ in 0..r.gen_range(1..8) {
            let s = &pool_m[r.gen_range(0..pool_m.len())];
            let t = &pool_n[r.gen_range(0..pool_n.len())];
            for (p, _) in ez(s, t).iter() {
                if r.gen_bool(0.7) {
                    a.insert(p.clone());
                }
            }
        }
        if a.is_empty() {
            a.insert(ez(&pool_m[0], &pool_n[0]).iter().next().unwrap().0.clone());
        }
        let x = cross_cochain(&f, &g, 1);
        let (am, an) = x.factor_supports(&a)?;
        out.record(x.norm_on(&a)?, f.norm_on(&am) * g.norm_on(&an));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass_small() {
        assert!(lipschitz_suite(1, 12).passed());
        assert!(diameter_suite(2, 12).passed());
        assert!(pairing_bound_suite(3, 12).unwrap().passed());
        assert!(thurston_suite(4, 50).unwrap().passed());
        assert!(product_suite(5, 4).unwrap().passed());
        assert!(cross_norm_suite(6, 20).unwrap().passed());
    }
}
