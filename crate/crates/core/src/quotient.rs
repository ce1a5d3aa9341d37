//! Closed hyperbolic surfaces from regular 4g-gons with side pairings.

use std::collections::{HashMap, HashSet, VecDeque};
use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::chain::Chain;
use crate::error::{Error, Result};
use crate::expr::SimplexExpr;
use crate::geom::{hdist, mink, HIsometry, HPoint, ENVELOPE_RADIUS};
use crate::points::{CoverPoint, Deck, FactorPoint, QPoint};

const REDUCE_STEPS: usize = 10_000;
const REDUCE_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct Quotient {
    pub genus: usize,
    pub polygon: Vec<HPoint>,
    /// `side_maps[s]` carries side `paired[s]` onto side `s`; it maps the
    /// polygon to its neighbour across side `s`.
    pub side_maps: Vec<HIsometry>,
    pub paired: Vec<usize>,
    pub circumradius: f64,
    pub inradius: f64,
    pub area: f64,
    pub vertex_decks: Vec<Deck>,
    normals: Vec<Vec<f64>>,
    neighbors: Vec<(HIsometry, Deck)>,
    center: Arc<QPoint>,
    vertex: Arc<QPoint>,
}

/// Circumradius of the regular `n`-gon with interior angle `alpha`.
pub fn regular_circumradius(n: usize, alpha: f64) -> f64 {
    let c = 1.0 / (PI / n as f64).tan() / (alpha / 2.0).tan();
    c.acosh()
}

impl Quotient {
    pub fn sides(&self) -> usize {
        self.polygon.len()
    }

    pub fn vertex_angle(&self) -> f64 {
        2.0 * PI / self.sides() as f64
    }

    /// Area of the polygon from its angle defect.
    pub fn polygon_area(&self) -> f64 {
        let n = self.sides() as f64;
        (n - 2.0) * PI - n * self.vertex_angle()
    }

    pub fn center_point(&self) -> FactorPoint {
        FactorPoint::lifted(Deck::identity(), self.center.clone())
    }

    /// Lift `hᵢ·v₀` of polygon vertex `i`.
    pub fn vertex_point(&self, i: usize) -> FactorPoint {
        let i = i % self.sides();
        FactorPoint::lifted(self.vertex_decks[i].clone(), self.vertex.clone())
    }

    /// Group elements whose translate of the origin lies within `2R + 1`.
    pub fn neighbors(&self) -> &[(HIsometry, Deck)] {
        &self.neighbors
    }

    /// Whether `x` lies in the closed polygon, up to `tol`.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.normals.iter().all(|n| mink(x, n) <= tol * (1.0 + x[0]))
    }

    /// Representative `y` in the polygon and deck `h` with `x = h·y`.
    pub fn reduce(&self, x: &HPoint) -> Result<(HPoint, Deck)> {
        let (y, h) = self.reduce_iso(&x.coords)?;
        Ok((HPoint::from_raw(y), Deck::from_iso(h)))
    }

    pub fn reduce_iso(&self, x: &[f64]) -> Result<(Vec<f64>, HIsometry)> {
        let d = hdist(x, &[1.0, 0.0, 0.0]);
        if !(d <= ENVELOPE_RADIUS) {
            return Err(Error::Envelope(d));
        }
        let mut y = x.to_vec();
        let mut h = HIsometry::identity(2);
        let mut steps = 0;
        loop {
            let c0 = y[0];
            let mut best: Option<(usize, f64)> = None;
            for (s, g) in self.side_maps.iter().enumerate() {
                let o = g.orbit_point();
                let cs = -mink(&y, &o);
                if cs < c0 - REDUCE_TOL * c0 && best.is_none_or(|(_, b)| cs < b) {
                    best = Some((s, cs));
                }
            }
            let Some((s, _)) = best else { break };
            y = self.side_maps[s].inverse().apply_slice(&y);
            h = h.compose(&self.side_maps[s]);
            steps += 1;
            if steps > REDUCE_STEPS {
                return Err(Error::Numerical("reduction did not terminate".into()));
            }
        }
        if !self.contains(&y, 1e-9) {
            let mut best: Option<(f64, Vec<f64>, HIsometry)> = None;
            for (g, _) in &self.neighbors {
                let z = g.inverse().apply_slice(&y);
                if best.as_ref().is_none_or(|b| z[0] < b.0) {
                    best = Some((z[0], z, g.clone()));
                }
            }
            let (_, z, g) = best.expect("neighbour set contains the identity");
            y = z;
            h = h.compose(&g);
            steps += 1;
        }
        if steps > 0 {
            crate::geom::renormalize(&mut y);
        }
        Ok((y, h))
    }

    /// Fan of `4g` straight triangles from the centre, oriented as a
    /// Δ-complex so that the boundary cancels under the side pairings.
    pub fn fan_fundamental_cycle(&self) -> Chain {
        let mut c = Chain::zero(2);
        for (s, _, a) in self.fan_terms() {
            c.add_term(s, a);
        }
        c
    }

    /// Lifted fan triangles with their side index and coefficient.
    pub fn fan_terms(&self) -> Vec<(SimplexExpr, usize, f64)> {
        let n = self.sides();
        let o = self.center_point();
        (0..n)
            .map(|i| {
                let a = self.vertex_point(i);
                let b = self.vertex_point(i + 1);
                if i % 4 < 2 {
                    (SimplexExpr::straight(vec![vec![o.clone()], vec![a], vec![b]]).unwrap(), i, 1.0)
                } else {
                    (SimplexExpr::straight(vec![vec![o.clone()], vec![b], vec![a]]).unwrap(), i, -1.0)
                }
            })
            .collect()
    }

    /// Half the shortest translation length over the group elements whose
    /// axes can meet the polygon.
    pub fn injectivity_radius(&self) -> f64 {
        let lmin = self.side_maps.iter().map(|g| g.translation_length()).fold(f64::INFINITY, f64::min);
        let bound = lmin + 2.0 * self.circumradius + 0.1;
        let elems = bfs_elements(&self.side_maps, bound, bound);
        elems
            .iter()
            .filter(|(_, d)| !d.is_identity())
            .map(|(g, _)| g.translation_length())
            .fold(f64::INFINITY, f64::min)
            / 2.0
    }

    pub fn descriptor(&self) -> QuotientDescriptor {
        QuotientDescriptor {
            genus: self.genus,
            area: self.area,
            circumradius: self.circumradius,
            inradius: self.inradius,
            polygon: self.polygon.iter().map(|p| p.coords.clone()).collect(),
            pairings: self
                .side_maps
                .iter()
                .enumerate()
                .map(|(s, g)| PairingDescriptor { side: s, paired_with: self.paired[s], matrix: g.m.clone() })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PairingDescriptor {
    pub side: usize,
    pub paired_with: usize,
    pub matrix: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct QuotientDescriptor {
    pub genus: usize,
    pub area: f64,
    pub circumradius: f64,
    pub inradius: f64,
    pub polygon: Vec<Vec<f64>>,
    pub pairings: Vec<PairingDescriptor>,
}

fn bfs_elements(gens: &[HIsometry], keep: f64, explore: f64) -> Vec<(HIsometry, Deck)> {
    let o = [1.0, 0.0, 0.0];
    let mut seen: HashSet<[i64; 3]> = HashSet::new();
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    let id = HIsometry::identity(2);
    seen.insert(Deck::identity().key());
    queue.push_back(id);
    while let Some(g) = queue.pop_front() {
        let d = hdist(&g.orbit_point(), &o);
        if d <= keep {
            out.push((g.clone(), Deck::from_iso(g.clone())));
        }
        for s in gens {
            let h = g.compose(s);
            let dh = hdist(&h.orbit_point(), &o);
            if dh > explore {
                continue;
            }
            let key = Deck::from_iso(h.clone()).key();
            if seen.insert(key) {
                queue.push_back(h);
            }
        }
    }
    out
}

/// Regular 4g-gon surface with pairings `aᵢ bᵢ aᵢ⁻¹ bᵢ⁻¹`.
pub fn genus_surface(g: usize) -> Result<Quotient> {
    if !(2..=3).contains(&g) {
        return Err(Error::UnsupportedGenus(g));
    }
    let n = 4 * g;
    let nf = n as f64;
    let cot = 1.0 / (PI / nf).tan();
    let r = (cot * cot).acosh();
    let inr = cot.acosh();
    let polygon: Vec<HPoint> = (0..n).map(|j| HPoint::polar(r, 2.0 * PI * j as f64 / nf)).collect();
    let mid = |j: usize| (2 * j + 1) as f64 * PI / nf;
    let mut side_maps = vec![HIsometry::identity(2); n];
    let mut paired = vec![0; n];
    for j in (0..n).filter(|j| j % 4 < 2) {
        let gj = HIsometry::rotation(mid(j))
            .compose(&HIsometry::translation_x(2.0 * inr))
            .compose(&HIsometry::rotation(PI))
            .compose(&HIsometry::rotation(-mid(j + 2)));
        side_maps[j + 2] = gj.inverse();
        side_maps[j] = gj;
        paired[j] = j + 2;
        paired[j + 2] = j;
    }
    let o = [1.0, 0.0, 0.0];
    let normals: Vec<Vec<f64>> =
        side_maps.iter().map(|s| s.orbit_point().iter().zip(&o).map(|(a, b)| a - b).collect()).collect();
    let neighbors = bfs_elements(&side_maps, 2.0 * r + 1.0, 2.0 * r + 1.0 + 2.0 * inr + 0.5);
    let v0 = &polygon[0];
    let mut vertex_decks = Vec::with_capacity(n);
    for vi in &polygon {
        let h = neighbors
            .iter()
            .find(|(gm, _)| hdist(&gm.apply_slice(&v0.coords), &vi.coords) < 1e-8)
            .map(|(_, d)| d.clone())
            .ok_or_else(|| Error::Internal("vertex cycle not found in neighbour set".into()))?;
        vertex_decks.push(h);
    }
    let q = Quotient {
        genus: g,
        center: Arc::new(QPoint::atom(&HPoint::origin(2))),
        vertex: Arc::new(QPoint::atom(v0)),
        polygon,
        side_maps,
        paired,
        circumradius: r,
        inradius: inr,
        area: (4.0 * g as f64 - 4.0) * PI,
        vertex_decks,
        normals,
        neighbors,
    };
    Ok(q)
}

/// Spatial index of lifted net points in Poincaré disk coordinates.
#[derive(Clone, Debug)]
struct OrbitIndex {
    cell: f64,
    buckets: HashMap<(i32, i32), Vec<usize>>,
    entries: Vec<OrbitEntry>,
}

#[derive(Clone, Debug)]
struct OrbitEntry {
    coords: Vec<f64>,
    net_index: usize,
    deck: Deck,
}

fn disk(x: &[f64]) -> (f64, f64) {
    (x[1] / (1.0 + x[0]), x[2] / (1.0 + x[0]))
}

impl OrbitIndex {
    fn new(cell: f64) -> Self {
        OrbitIndex { cell, buckets: HashMap::new(), entries: Vec::new() }
    }

    fn bucket(&self, u: (f64, f64)) -> (i32, i32) {
        ((u.0 / self.cell).floor() as i32, (u.1 / self.cell).floor() as i32)
    }

    fn insert(&mut self, e: OrbitEntry) {
        let b = self.bucket(disk(&e.coords));
        self.buckets.entry(b).or_default().push(self.entries.len());
        self.entries.push(e);
    }

    /// Entries within hyperbolic distance `r` of `y`.
    fn query(&self, y: &[f64], r: f64) -> Vec<(f64, usize)> {
        let u = disk(y);
        let s = u.0.hypot(u.1);
        let t = (r / 2.0).tanh();
        let e = (1.0 - s * s) * t / (1.0 - s * t) * 1.000001 + 1e-12;
        let lo = self.bucket((u.0 - e, u.1 - e));
        let hi = self.bucket((u.0 + e, u.1 + e));
        let mut out = Vec::new();
        for i in lo.0..=hi.0 {
            for j in lo.1..=hi.1 {
                if let Some(v) = self.buckets.get(&(i, j)) {
                    for &k in v {
                        let d = hdist(y, &self.entries[k].coords);
                        if d <= r {
                            out.push((d, k));
                        }
                    }
                }
            }
        }
        out
    }
}

/// Net of the polygon with a Voronoi assignment of its orbit.
#[derive(Clone, Debug)]
pub struct Net {
    pub mesh: f64,
    pub points: Vec<HPoint>,
    atoms: Vec<Arc<QPoint>>,
    index: OrbitIndex,
}

impl Net {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn atom(&self, i: usize) -> Arc<QPoint> {
        self.atoms[i].clone()
    }

    /// Nearest lifted net point to `x`: net index and deck `λ` with the
    /// point `λ·tᵢ`. Ties go to the smaller index, then the smaller deck key.
    pub fn assign(&self, q: &Quotient, x: &[f64]) -> Result<(usize, Deck)> {
        let (y, h) = q.reduce_iso(x)?;
        let mut found = self.index.query(&y, self.mesh * 1.01 + 1e-9);
        if found.is_empty() {
            found = (0..self.index.entries.len()).map(|k| (hdist(&y, &self.index.entries[k].coords), k)).collect();
        }
        let best = found
            .into_iter()
            .min_by(|a, b| {
                let ea = &self.index.entries[a.1];
                let eb = &self.index.entries[b.1];
                a.0.total_cmp(&b.0).then(ea.net_index.cmp(&eb.net_index)).then(ea.deck.key().cmp(&eb.deck.key()))
            })
            .ok_or_else(|| Error::Internal("empty net".into()))?;
        let e = &self.index.entries[best.1];
        let deck = Deck::from_iso(h.compose(&e.deck.iso()));
        Ok((e.net_index, deck))
    }

    /// Snapped lifted point.
    pub fn snap(&self, q: &Quotient, x: &[f64]) -> Result<FactorPoint> {
        let (i, d) = self.assign(q, x)?;
        Ok(FactorPoint::lifted(d, self.atoms[i].clone()))
    }

    /// Distance from `x` to the orbit of the net.
    pub fn orbit_distance(&self, q: &Quotient, x: &[f64]) -> Result<f64> {
        let p = self.snap(q, x)?;
        Ok(hdist(x, &p.coords()))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "mesh": self.mesh,
            "points": self.points.iter().map(|p| p.coords.clone()).collect::<Vec<_>>(),
        })
    }
}

/// Greedy net with covering radius at most `mesh`.
pub fn build_net(q: &Quotient, mesh: f64) -> Result<Net> {
    if !(mesh > 0.0 && mesh <= 0.5) {
        return Err(Error::Input(format!("mesh {mesh} outside (0, 1/2]")));
    }
    let h = mesh / 4.0;
    let tau = mesh - h;
    let reach = q.circumradius + mesh + 0.05;
    let lifts: Vec<&(HIsometry, Deck)> = q.neighbors.iter().collect();
    let mut index = OrbitIndex::new(0.02);
    let mut points: Vec<HPoint> = Vec::new();
    let add = |p: HPoint, index: &mut OrbitIndex, points: &mut Vec<HPoint>| {
        let ni = points.len();
        for (g, d) in &lifts {
            let c = g.apply_slice(&p.coords);
            if hdist(&c, &[1.0, 0.0, 0.0]) <= reach {
                index.insert(OrbitEntry { coords: c, net_index: ni, deck: d.clone() });
            }
        }
        points.push(p);
    };
    add(HPoint::origin(2), &mut index, &mut points);
    let golden = 0.618_033_988_749_895;
    let rings = (q.circumradius / h).ceil() as usize;
    for i in 1..=rings {
        let r = i as f64 * h;
        let m = ((2.0 * PI * r.sinh()) / h).ceil().max(6.0) as usize;
        let off = (i as f64 * golden).fract() * 2.0 * PI / m as f64;
        for a in 0..m {
            let theta = off + 2.0 * PI * a as f64 / m as f64;
            let (y, _) = q.reduce_iso(&HPoint::polar(r, theta).coords)?;
            if index.query(&y, tau).is_empty() {
                add(HPoint::from_raw(y), &mut index, &mut points);
            }
        }
    }
    let atoms = points.iter().map(|p| Arc::new(QPoint::atom(p))).collect();
    Ok(Net { mesh, points, atoms, index })
}

/// Cover point of a single surface factor.
pub fn cover(p: FactorPoint) -> CoverPoint {
    vec![p]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn octagon_constants() {
        let q = genus_surface(2).unwrap();
        assert_eq!(q.sides(), 8);
        assert!((q.area - 4.0 * PI).abs() < 1e-12);
        assert!((q.polygon_area() - q.area).abs() < 1e-9);
        assert!((q.vertex_angle() - PI / 4.0).abs() < 1e-15);
        assert!((q.inradius - (1.0 + 2f64.sqrt()).acosh()).abs() < 1e-14);
        assert!(matches!(genus_surface(4), Err(Error::UnsupportedGenus(4))));
    }

    #[test]
    fn pairings_match_vertices() {
        for g in [2, 3] {
            let q = genus_surface(g).unwrap();
            let n = q.sides();
            for j in (0..n).filter(|j| j % 4 < 2) {
                let gj = &q.side_maps[j];
                let a = gj.apply(&q.polygon[(j + 2) % n]);
                let b = gj.apply(&q.polygon[(j + 3) % n]);
                assert!(hdist(&a.coords, &q.polygon[j + 1].coords) < 1e-9);
                assert!(hdist(&b.coords, &q.polygon[j].coords) < 1e-9);
            }
            for (i, h) in q.vertex_decks.iter().enumerate() {
                assert!(hdist(&h.apply(&q.polygon[0].coords), &q.polygon[i].coords) < 1e-9);
            }
        }
    }

    #[test]
    fn reduce_interior_and_generator() {
        let q = genus_surface(2).unwrap();
        let x = HPoint::polar(0.7, 1.0);
        let (y, h) = q.reduce(&x).unwrap();
        assert_eq!(y, x);
        assert!(h.is_identity());
        let gx = q.side_maps[1].apply(&x);
        let (y, h) = q.reduce(&gx).unwrap();
        assert!(hdist(&y.coords, &x.coords) < 1e-10);
        assert_eq!(h, Deck::from_iso(q.side_maps[1].clone()));
        assert!(matches!(q.reduce(&HPoint::polar(31.0, 0.0)), Err(Error::Envelope(_))));
    }

    #[test]
    fn fan_is_a_fundamental_cycle() {
        use crate::volume::{pair_dvol, PairingMode};
        for g in [2, 3] {
            let q = genus_surface(g).unwrap();
            let c = q.fan_fundamental_cycle();
            assert_eq!(c.len(), 4 * g);
            assert!(c.boundary().is_empty());
            let v = pair_dvol(&c, PairingMode::Exact).unwrap();
            assert!((v - q.area).abs() < 1e-9, "{v}");
        }
    }

    #[test]
    fn injectivity_radius_is_half_systole() {
        let q = genus_surface(2).unwrap();
        let r = q.injectivity_radius();
        let sys = q.side_maps.iter().map(|g| g.translation_length()).fold(f64::INFINITY, f64::min);
        assert!(r > 0.5 && r <= sys / 2.0 + 1e-12, "{r}");
    }

    #[test]
    fn net_covers_at_mesh() {
        let q = genus_surface(2).unwrap();
        let net = build_net(&q, 0.5).unwrap();
        for i in 0..200 {
            let x = HPoint::polar(0.013 * i as f64, 2.399 * i as f64);
            let d = net.orbit_distance(&q, &x.coords).unwrap();
            assert!(d <= 0.5, "{d}");
        }
        assert!(build_net(&q, 0.7).is_err());
    }
}
