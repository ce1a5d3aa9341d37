//! Monte Carlo smearing of a lifted cycle of one surface onto the orbit net of
//! another surface with the same universal cover.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::Chain;
use crate::error::{Error, Result};
use crate::expr::SimplexExpr;
use crate::geom::{frame_isometry, HIsometry, HPoint};
use crate::points::CoverPoint;
use crate::quotient::{Net, Quotient};
use crate::volume::{compensated_sum, triangle_area};

pub const DEFAULT_BLOCK: usize = 1024;
const BOOTSTRAP_RESAMPLES: usize = 200;

/// Haar samples of `Λ\G` through the unit tangent bundle of the polygon.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HaarSampler {
    pub seed: u64,
    pub n: usize,
    pub block: usize,
}

impl HaarSampler {
    pub fn new(seed: u64, n: usize) -> Self {
        HaarSampler { seed, n, block: DEFAULT_BLOCK }
    }

    pub fn blocks(&self) -> usize {
        self.n.div_ceil(self.block)
    }

    pub fn block_rng(&self, b: usize) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(b as u64);
        rng
    }

    /// Area-uniform point of the polygon and uniform frame angle.
    pub fn sample_point<R: Rng>(q: &Quotient, rng: &mut R) -> (HPoint, f64) {
        let ch = q.circumradius.cosh() - 1.0;
        loop {
            let u: f64 = rng.gen();
            let r = (1.0 + u * ch).acosh();
            let a = rng.gen::<f64>() * 2.0 * PI;
            let p = HPoint::polar(r, a);
            if q.contains(&p.coords, 0.0) {
                let theta = rng.gen::<f64>() * 2.0 * PI;
                return (p, theta);
            }
        }
    }

    pub fn sample<R: Rng>(q: &Quotient, rng: &mut R) -> HIsometry {
        let (p, theta) = Self::sample_point(q, rng);
        frame_isometry(&p, theta).expect("planar point")
    }
}

/// Lifted simplex: vertex coordinates in H² and a coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedTerm {
    pub vertices: Vec<usize>,
    pub coeff: f64,
}

/// Lifted chain with shared vertex table.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedChain {
    pub degree: usize,
    pub points: Vec<Vec<f64>>,
    pub terms: Vec<LiftedTerm>,
}

impl LiftedChain {
    /// Lift each term by its canonical representative.
    pub fn from_chain(c: &Chain) -> Result<Self> {
        let mut points: Vec<Vec<f64>> = Vec::new();
        let mut index: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
        let mut terms = Vec::with_capacity(c.len());
        for (s, a) in c.iter() {
            if s.factors() != 1 {
                return Err(Error::Input("smearing needs a chain over a single surface".into()));
            }
            let mut vs = Vec::new();
            for p in s.vertex_points()? {
                let x = p[0].coords();
                let key: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
                let n = index.len();
                let i = *index.entry(key).or_insert_with(|| {
                    points.push(x);
                    n
                });
                vs.push(i);
            }
            terms.push(LiftedTerm { vertices: vs, coeff: *a });
        }
        Ok(LiftedChain { degree: c.degree(), points, terms })
    }

    /// Alternating faces of every lifted term, kept as lifts.
    pub fn lifted_boundary(&self) -> LiftedChain {
        let mut merged: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for t in &self.terms {
            for j in 0..t.vertices.len() {
                let mut f = t.vertices.clone();
                f.remove(j);
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                *merged.entry(f).or_insert(0.0) += s * t.coeff;
            }
        }
        LiftedChain {
            degree: self.degree.saturating_sub(1),
            points: self.points.clone(),
            terms: merged
                .into_iter()
                .filter(|(_, a)| *a != 0.0)
                .map(|(vertices, coeff)| LiftedTerm { vertices, coeff })
                .collect(),
        }
    }

    /// Translate one term by an isometry of the universal cover.
    pub fn translate_term(&self, k: usize, g: &HIsometry) -> LiftedChain {
        let mut out = self.clone();
        let vs: Vec<usize> = self.terms[k].vertices.clone();
        let mut fresh = Vec::new();
        for v in vs {
            out.points.push(g.apply_slice(&self.points[v]));
            fresh.push(out.points.len() - 1);
        }
        out.terms[k].vertices = fresh;
        out
    }
}

/// Weighted key table from Monte Carlo samples.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalSmear {
    pub degree: usize,
    pub n: usize,
    pub weights: BTreeMap<SimplexExpr, f64>,
    /// Per-sample `Σ aₖ⟨dvol, str(g·σ̃ₖ)⟩` (degree 2 only).
    pub per_sample: Vec<f64>,
    pub source_l1: f64,
}

impl EmpiricalSmear {
    pub fn to_chain(&self) -> Chain {
        let mut c = Chain::zero(self.degree);
        for (s, w) in &self.weights {
            c.add_canonical(s.clone(), w / self.n as f64);
        }
        c
    }

    /// Unnormalized sums of coefficients; integral for integral inputs.
    pub fn weight_chain(&self) -> Chain {
        let mut c = Chain::zero(self.degree);
        for (s, w) in &self.weights {
            c.add_canonical(s.clone(), *w);
        }
        c
    }

    pub fn l1(&self) -> f64 {
        compensated_sum(self.weights.values().map(|w| w.abs())) / self.n as f64
    }
}

struct BlockOut {
    weights: BTreeMap<SimplexExpr, f64>,
    xs: Vec<f64>,
}

fn smear_block(n_q: &Quotient, net: &Net, c: &LiftedChain, gs: &[HIsometry]) -> Result<BlockOut> {
    let mut weights: BTreeMap<SimplexExpr, f64> = BTreeMap::new();
    let mut xs = Vec::with_capacity(gs.len());
    for g in gs {
        let snapped: Vec<CoverPoint> =
            c.points.iter().map(|x| net.snap(n_q, &g.apply_slice(x)).map(|p| vec![p])).collect::<Result<_>>()?;
        let mut x = Vec::with_capacity(c.terms.len());
        for t in &c.terms {
            let vs: Vec<CoverPoint> = t.vertices.iter().map(|&i| snapped[i].clone()).collect();
            if c.degree == 2 {
                let co: Vec<Vec<f64>> = vs.iter().map(|p| p[0].coords()).collect();
                x.push(t.coeff * triangle_area(&co[0], &co[1], &co[2]));
            }
            let key = SimplexExpr::straight(vs)?.canonical();
            *weights.entry(key).or_insert(0.0) += t.coeff;
        }
        xs.push(compensated_sum(x));
    }
    weights.retain(|_, w| *w != 0.0);
    Ok(BlockOut { weights, xs })
}

/// Guard: the net mesh must be below the injectivity radius of `N`.
pub fn check_mesh(n_q: &Quotient, net: &Net) -> Result<f64> {
    let inj = n_q.injectivity_radius();
    if net.mesh >= inj {
        return Err(Error::Input(format!("mesh {} not below injectivity radius {inj}", net.mesh)));
    }
    Ok(inj)
}

/// `φ̂` on a lifted chain: every sample is shared by all terms.
pub fn smear_lifted(n_q: &Quotient, net: &Net, c: &LiftedChain, sampler: &HaarSampler) -> Result<EmpiricalSmear> {
    check_mesh(n_q, net)?;
    if sampler.n == 0 || sampler.block == 0 {
        return Err(Error::Input("sample count and block size must be positive".into()));
    }
    let blocks: Vec<Result<BlockOut>> = (0..sampler.blocks())
        .into_par_iter()
        .map(|b| {
            let mut rng = sampler.block_rng(b);
            let len = sampler.block.min(sampler.n - b * sampler.block);
            let gs: Vec<HIsometry> = (0..len).map(|_| HaarSampler::sample(n_q, &mut rng)).collect();
            smear_block(n_q, net, c, &gs)
        })
        .collect();
    let mut weights: BTreeMap<SimplexExpr, f64> = BTreeMap::new();
    let mut per_sample = Vec::with_capacity(sampler.n);
    for b in blocks {
        let b = b?;
        for (k, w) in b.weights {
            *weights.entry(k).or_insert(0.0) += w;
        }
        per_sample.extend(b.xs);
    }
    weights.retain(|_, w| *w != 0.0);
    let source_l1 = compensated_sum(c.terms.iter().map(|t| t.coeff.abs()));
    Ok(EmpiricalSmear { degree: c.degree, n: sampler.n, weights, per_sample, source_l1 })
}

pub fn smear(m: &Quotient, n_q: &Quotient, c: &Chain, net: &Net, sampler: &HaarSampler) -> Result<EmpiricalSmear> {
    if m.polygon[0].dim() != n_q.polygon[0].dim() {
        return Err(Error::Input("source and target covers differ".into()));
    }
    smear_lifted(n_q, net, &LiftedChain::from_chain(c)?, sampler)
}

/// Mean of the per-sample pairings with a bootstrap standard error.
pub fn smear_pair_dvol(s: &EmpiricalSmear, seed: u64) -> Result<(f64, f64)> {
    if s.degree != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: s.degree });
    }
    let n = s.per_sample.len();
    let mean = compensated_sum(s.per_sample.iter().copied()) / n as f64;
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x5eed_b007);
    let means: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| compensated_sum((0..n).map(|_| s.per_sample[rng.gen_range(0..n)])) / n as f64)
        .collect();
    let mb = compensated_sum(means.iter().copied()) / means.len() as f64;
    let var = compensated_sum(means.iter().map(|x| (x - mb) * (x - mb))) / (means.len() - 1) as f64;
    Ok((mean, var.sqrt()))
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

/// One-sample Kolmogorov–Smirnov statistic against a continuous CDF.
pub fn ks_one_sample(a: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut a = a.to_vec();
    a.sort_by(f64::total_cmp);
    let n = a.len() as f64;
    a.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Critical value of the two-sample statistic at level `alpha`.
pub fn ks_critical(n: usize, m: usize, alpha: f64) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    c * ((n + m) as f64 / (n * m) as f64).sqrt()
}

/// Proposal radii of the sampler against `(cosh r - 1)/(cosh R - 1)`.
pub fn radial_ks(q: &Quotient, seed: u64, n: usize) -> (f64, f64) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let ch = q.circumradius.cosh() - 1.0;
    let r: Vec<f64> = (0..n).map(|_| (1.0 + rng.gen::<f64>() * ch).acosh()).collect();
    let d = ks_one_sample(&r, |x| (x.cosh() - 1.0) / ch);
    (d, 1.36 / (n as f64).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftIndependence {
    pub term: usize,
    pub side: usize,
    pub samples: usize,
    pub statistic: f64,
    pub critical: f64,
    pub passed: bool,
}

/// Compare per-sample areas of `σ̃ₖ` and `λ·σ̃ₖ` under independent seeds.
pub fn lift_independence(
    m: &Quotient,
    n_q: &Quotient,
    net: &Net,
    term: usize,
    side: usize,
    seed: u64,
    samples: usize,
) -> Result<LiftIndependence> {
    let full = LiftedChain::from_chain(&m.fan_fundamental_cycle())?;
    if term >= full.terms.len() || side >= m.side_maps.len() {
        return Err(Error::Input(format!("no term {term} or side {side}")));
    }
    let mut one = full.clone();
    one.terms = vec![full.terms[term].clone()];
    let moved = one.translate_term(0, &m.side_maps[side]);
    let a = smear_lifted(n_q, net, &one, &HaarSampler::new(seed, samples))?;
    let b = smear_lifted(n_q, net, &moved, &HaarSampler::new(seed.wrapping_add(1), samples))?;
    let statistic = ks_statistic(&a.per_sample, &b.per_sample);
    let critical = ks_critical(samples, samples, 0.05);
    Ok(LiftIndependence { term, side, samples, statistic, critical, passed: statistic < critical })
}

impl EmpiricalSmear {
    /// Running block means of the per-sample pairing, as TSV.
    pub fn block_tsv(&self, block: usize) -> String {
        let mut out = String::from("block\tsamples\tmean\trunning_mean\n");
        let mut total = 0.0;
        let mut seen = 0;
        for (b, xs) in self.per_sample.chunks(block.max(1)).enumerate() {
            let s = compensated_sum(xs.iter().copied());
            total += s;
            seen += xs.len();
            out.push_str(&format!("{b}\t{}\t{}\t{}\n", xs.len(), s / xs.len() as f64, total / seen as f64));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmearReport {
    pub n: usize,
    pub seed: u64,
    pub source_genus: usize,
    pub target_genus: usize,
    pub mesh: f64,
    pub injectivity_radius: f64,
    pub keys: usize,
    pub l1: f64,
    pub source_l1: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub ratio: f64,
    pub ratio_stderr: f64,
    pub expected_ratio: f64,
    pub source_area: f64,
    pub target_area: f64,
    pub boundary_terms: usize,
    pub boundary_l1: f64,
    pub chain_map_exact: bool,
}

/// The proportionality experiment for the fan cycle of `m`.
pub fn proportionality(m: &Quotient, n_q: &Quotient, net: &Net, sampler: &HaarSampler) -> Result<SmearReport> {
    proportionality_full(m, n_q, net, sampler).map(|r| r.0)
}

pub fn proportionality_full(
    m: &Quotient,
    n_q: &Quotient,
    net: &Net,
    sampler: &HaarSampler,
) -> Result<(SmearReport, EmpiricalSmear)> {
    let inj = check_mesh(n_q, net)?;
    let c = m.fan_fundamental_cycle();
    let lifted = LiftedChain::from_chain(&c)?;
    let s = smear_lifted(n_q, net, &lifted, sampler)?;
    let b = smear_lifted(n_q, net, &lifted.lifted_boundary(), sampler)?;
    let chain_map_exact = s.weight_chain().boundary() == b.weight_chain();
    let bd = s.to_chain().boundary();
    let (estimate, stderr) = smear_pair_dvol(&s, sampler.seed)?;
    let r = SmearReport {
        n: sampler.n,
        seed: sampler.seed,
        source_genus: m.genus,
        target_genus: n_q.genus,
        mesh: net.mesh,
        injectivity_radius: inj,
        keys: s.weights.len(),
        l1: s.l1(),
        source_l1: s.source_l1,
        estimate,
        stderr,
        ratio: estimate / n_q.area,
        ratio_stderr: stderr / n_q.area,
        expected_ratio: m.area / n_q.area,
        source_area: m.area,
        target_area: n_q.area,
        boundary_terms: bd.len(),
        boundary_l1: bd.l1_norm(),
        chain_map_exact,
    };
    Ok((r, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quotient::{build_net, genus_surface};

    #[test]
    fn sampler_is_uniform_in_radius() {
        let q = genus_surface(2).unwrap();
        let s = HaarSampler::new(3, 4000);
        let mut rng = s.block_rng(0);
        let inside = (0..4000).filter(|_| HaarSampler::sample_point(&q, &mut rng).0.coords[0] < 2.0).count();
        // area of the disk of radius acosh 2 over the polygon area
        let expect = 2.0 * PI * (2.0 - 1.0) / q.area;
        assert!((inside as f64 / 4000.0 - expect).abs() < 0.03);
    }

    #[test]
    fn single_sample_single_triangle() {
        let q = genus_surface(2).unwrap();
        let net = build_net(&q, 0.25).unwrap();
        let c = q.fan_fundamental_cycle();
        let (t, a) = c.iter().next().unwrap();
        let one = Chain::from_terms(2, [(t.clone(), *a)]).unwrap();
        let s = smear(&q, &q, &one, &net, &HaarSampler::new(1, 1)).unwrap();
        assert_eq!(s.weights.len(), 1);
        assert_eq!(s.l1(), 1.0);
    }

    #[test]
    fn deterministic_and_substochastic() {
        let m = genus_surface(2).unwrap();
        let n = genus_surface(3).unwrap();
        let net = build_net(&n, 0.25).unwrap();
        let s = HaarSampler { seed: 11, n: 300, block: 64 };
        let r1 = proportionality(&m, &n, &net, &s).unwrap();
        let r2 = proportionality(&m, &n, &net, &s).unwrap();
        assert_eq!(r1, r2);
        assert!(r1.l1 <= 8.0);
        assert!((r1.ratio - 0.5).abs() < 0.05, "{r1:?}");
        assert!(r1.chain_map_exact);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        assert_eq!(pool.install(|| proportionality(&m, &n, &net, &s)).unwrap(), r1);
    }

    #[test]
    fn ks_helpers() {
        assert_eq!(ks_statistic(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert_eq!(ks_statistic(&[1.0, 2.0], &[3.0, 4.0]), 1.0);
        let q = genus_surface(2).unwrap();
        let (d, crit) = radial_ks(&q, 5, 5000);
        assert!(d < crit, "{d} {crit}");
    }

    #[test]
    fn translated_lift_is_same_law() {
        let m = genus_surface(2).unwrap();
        let n = genus_surface(3).unwrap();
        let net = build_net(&n, 0.25).unwrap();
        let r = lift_independence(&m, &n, &net, 0, 1, 9, 2000).unwrap();
        assert!(r.passed, "{r:?}");
    }
}
