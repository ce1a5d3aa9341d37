//! Multiplicity combinatorics of covers built from a classifying complex and
//! shifted interval systems on the real line, with an exact verifier.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::affine::Q;
use crate::error::{Error, Result};

/// Finite simplicial complex given by all of its simplices (sorted vertex
/// lists, closed under faces).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Complex {
    pub vertices: usize,
    pub simplices: Vec<Vec<usize>>,
}

impl Complex {
    /// Closure under faces of the given maximal simplices.
    pub fn from_maximal(vertices: usize, maximal: &[Vec<usize>]) -> Result<Self> {
        let mut all = BTreeSet::new();
        for s in maximal {
            let mut s = s.clone();
            s.sort_unstable();
            s.dedup();
            if s.is_empty() || s.iter().any(|&v| v >= vertices) {
                return Err(Error::Input(format!("bad simplex {s:?}")));
            }
            for mask in 1u32..(1 << s.len()) {
                all.insert(
                    s.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &v)| v).collect::<Vec<_>>(),
                );
            }
        }
        for v in 0..vertices {
            if !all.contains(&vec![v]) {
                return Err(Error::Input(format!("vertex {v} is not in any simplex")));
            }
        }
        let mut simplices: Vec<Vec<usize>> = all.into_iter().collect();
        simplices.sort_by_key(|s| (s.len(), s.clone()));
        Ok(Complex { vertices, simplices })
    }

    pub fn dim(&self) -> usize {
        self.simplices.iter().map(|s| s.len() - 1).max().unwrap_or(0)
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.simplices.iter().filter(|s| s.len() == 2).map(|s| (s[0], s[1]))
    }

    /// Graph distance from `base` in the 1-skeleton.
    pub fn graph_distance(&self, base: usize) -> Vec<Option<usize>> {
        let mut adj = vec![Vec::new(); self.vertices];
        for (a, b) in self.edges() {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut d = vec![None; self.vertices];
        d[base] = Some(0);
        let mut queue = VecDeque::from([base]);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if d[w].is_none() {
                    d[w] = Some(d[v].unwrap() + 1);
                    queue.push_back(w);
                }
            }
        }
        d
    }
}

/// Barycentric subdivision with vertices coloured by the dimension of the
/// simplex they are the barycenter of.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarCover {
    pub subdivision: Complex,
    pub colors: Vec<usize>,
    pub cover: Vec<Vec<usize>>,
}

impl StarCover {
    /// Largest number of cover sets meeting a single cell.
    pub fn multiplicity(&self) -> usize {
        self.subdivision
            .simplices
            .iter()
            .map(|t| t.iter().map(|&v| self.colors[v]).collect::<BTreeSet<_>>().len())
            .max()
            .unwrap_or(0)
    }
}

/// Open-star cover of the barycentric subdivision, grouped into `k+1`
/// families of pairwise disjoint stars.
pub fn star_refinement(k: &Complex) -> Result<StarCover> {
    let dim = k.dim();
    if dim > 4 {
        return Err(Error::Input(format!("complex of dimension {dim} is too large")));
    }
    let is_face = |a: &Vec<usize>, b: &Vec<usize>| a.len() < b.len() && a.iter().all(|v| b.contains(v));
    let mut maximal = Vec::new();
    fn chains(
        k: &Complex,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        is_face: &dyn Fn(&Vec<usize>, &Vec<usize>) -> bool,
    ) {
        let last = &k.simplices[*cur.last().unwrap()];
        let mut extended = false;
        for (j, s) in k.simplices.iter().enumerate() {
            if is_face(last, s) && s.len() == last.len() + 1 {
                cur.push(j);
                chains(k, cur, out, is_face);
                cur.pop();
                extended = true;
            }
        }
        if !extended {
            out.push(cur.clone());
        }
    }
    for (i, s) in k.simplices.iter().enumerate() {
        if s.len() == 1 {
            chains(k, &mut vec![i], &mut maximal, &is_face);
        }
    }
    let subdivision = Complex::from_maximal(k.simplices.len(), &maximal)?;
    let colors: Vec<usize> = k.simplices.iter().map(|s| s.len() - 1).collect();
    let cover = (0..=dim).map(|c| (0..colors.len()).filter(|&v| colors[v] == c).collect()).collect();
    Ok(StarCover { subdivision, colors, cover })
}

/// `{(m + shift - eps, m + shift + 1) : m ∈ ℤ}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalFamily {
    pub shift: Q,
    pub eps: Q,
}

fn floor(q: &Q) -> i64 {
    q.numer().div_floor(q.denom())
}

impl IntervalFamily {
    /// Indices `m` with `t` in the `m`-th interval.
    pub fn containing(&self, t: &Q) -> Vec<i64> {
        let lo = t - self.shift - Q::one();
        let hi = t - self.shift + self.eps;
        let mut m = floor(&lo) + 1;
        let mut out = Vec::new();
        while Q::from(m) < hi {
            out.push(m);
            m += 1;
        }
        out
    }

    /// Interval endpoints strictly inside `(lo, hi)`.
    pub fn breakpoints(&self, lo: &Q, hi: &Q) -> Vec<Q> {
        let mut out = Vec::new();
        let start = floor(&(lo - self.shift - Q::one())) - 1;
        let end = floor(&(hi - self.shift + self.eps)) + 1;
        for m in start..=end {
            for e in [Q::from(m) + self.shift - self.eps, Q::from(m) + self.shift + Q::one()] {
                if &e > lo && &e < hi {
                    out.push(e);
                }
            }
        }
        out
    }
}

/// Shifts `a_j = j/(2|J|)` and overlap width `1/(4|J|)`.
pub fn interval_systems(count: usize) -> Result<Vec<IntervalFamily>> {
    if count == 0 {
        return Err(Error::Input("need at least one interval family".into()));
    }
    let n = count as i64;
    Ok((0..n).map(|j| IntervalFamily { shift: Q::new(j, 2 * n), eps: Q::new(1, 4 * n) }).collect())
}

/// Exact maximal multiplicity of a union of families over `[lo, hi]`, with
/// the point where it is attained.
pub fn union_multiplicity(fams: &[&IntervalFamily], lo: &Q, hi: &Q) -> (usize, Q) {
    let mut pts: BTreeSet<Q> = fams.iter().flat_map(|f| f.breakpoints(lo, hi)).collect();
    pts.insert(*lo);
    pts.insert(*hi);
    let sorted: Vec<Q> = pts.into_iter().collect();
    let mut cands = sorted.clone();
    for w in sorted.windows(2) {
        cands.push((w[0] + w[1]) / Q::from(2));
    }
    cands
        .into_iter()
        .map(|t| (fams.iter().map(|f| f.containing(&t).len()).sum::<usize>(), t))
        .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)))
        .unwrap()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemScan {
    pub count: usize,
    pub single: Vec<usize>,
    pub pairwise_max: usize,
    pub passed: bool,
}

/// Multiplicity-2 of each family and multiplicity-3 of each pairwise union.
pub fn scan_systems(fams: &[IntervalFamily]) -> SystemScan {
    let (lo, hi) = (Q::from(-2), Q::from(3));
    let single: Vec<usize> = fams.iter().map(|f| union_multiplicity(&[f], &lo, &hi).0).collect();
    let mut pairwise_max = 0;
    for i in 0..fams.len() {
        for j in i + 1..fams.len() {
            pairwise_max = pairwise_max.max(union_multiplicity(&[&fams[i], &fams[j]], &lo, &hi).0);
        }
    }
    let passed = single.iter().all(|&m| m == 2) && pairwise_max <= 3;
    SystemScan { count: fams.len(), single, pairwise_max, passed }
}

/// Base complex with a cover by vertex families, a function on vertices and
/// one interval family per cover index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverInstance {
    pub complex: Complex,
    pub cover: Vec<Vec<usize>>,
    pub f: Vec<Q>,
    pub systems: Vec<IntervalFamily>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub cell: Vec<usize>,
    pub value: Q,
    /// `(j, m)`: the set `U_j ∩ f⁻¹(W_{j,m})`.
    pub sets: Vec<(usize, i64)>,
    /// Cover index occurring twice among the sets, if any.
    pub repeated: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverReport {
    pub k: usize,
    pub cells: usize,
    pub base_multiplicity: usize,
    pub combined_sets: usize,
    pub multiplicity: usize,
    pub bound: usize,
    pub relatively_compact: bool,
    pub systems: SystemScan,
    pub witness: Witness,
    pub passed: bool,
}

impl CoverReport {
    pub fn require(&self) -> Result<()> {
        if self.passed {
            return Ok(());
        }
        let w = &self.witness;
        Err(Error::Contract(format!(
            "multiplicity {} > {} at cell {:?}, f = {}: sets {:?}",
            self.multiplicity, self.bound, w.cell, w.value, w.sets
        )))
    }
}

impl CoverInstance {
    fn validate(&self) -> Result<()> {
        let n = self.complex.vertices;
        if self.f.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: self.f.len() });
        }
        if self.systems.len() != self.cover.len() {
            return Err(Error::DimensionMismatch { expected: self.cover.len(), got: self.systems.len() });
        }
        if self.cover.iter().flatten().any(|&v| v >= n) {
            return Err(Error::Input("cover refers to a missing vertex".into()));
        }
        if let Some(t) = self.complex.simplices.iter().find(|t| self.indices(t).is_empty()) {
            return Err(Error::Input(format!("cell {t:?} is not covered")));
        }
        Ok(())
    }

    fn indices(&self, t: &[usize]) -> Vec<usize> {
        (0..self.cover.len()).filter(|&j| self.cover[j].iter().any(|v| t.contains(v))).collect()
    }

    fn sets_at(&self, js: &[usize], t: &Q) -> Vec<(usize, i64)> {
        js.iter().flat_map(|&j| self.systems[j].containing(t).into_iter().map(move |m| (j, m))).collect()
    }

    /// Candidate values of `f` on the open cell: breakpoints and midpoints.
    fn candidates(&self, t: &[usize], js: &[usize]) -> Vec<Q> {
        let lo = t.iter().map(|&v| self.f[v]).min().unwrap();
        let hi = t.iter().map(|&v| self.f[v]).max().unwrap();
        if lo == hi {
            return vec![lo];
        }
        let mut pts: BTreeSet<Q> = js.iter().flat_map(|&j| self.systems[j].breakpoints(&lo, &hi)).collect();
        pts.insert(lo);
        pts.insert(hi);
        let sorted: Vec<Q> = pts.into_iter().collect();
        let mut out: Vec<Q> = sorted[1..sorted.len() - 1].to_vec();
        out.extend(sorted.windows(2).map(|w| (w[0] + w[1]) / Q::from(2)));
        out
    }

    /// Exact multiplicity over every cell and every breakpoint of `f`.
    pub fn verify(&self) -> Result<CoverReport> {
        self.validate()?;
        let mut best: Option<(usize, Witness)> = None;
        let mut base_multiplicity = 0;
        let mut combined: BTreeSet<(usize, i64)> = BTreeSet::new();
        for t in &self.complex.simplices {
            let js = self.indices(t);
            base_multiplicity = base_multiplicity.max(js.len());
            for v in self.candidates(t, &js) {
                let sets = self.sets_at(&js, &v);
                combined.extend(sets.iter().copied());
                if best.as_ref().is_none_or(|b| sets.len() > b.0) {
                    let mut seen = BTreeMap::new();
                    for (j, _) in &sets {
                        *seen.entry(*j).or_insert(0) += 1;
                    }
                    let repeated = seen.into_iter().filter(|(_, c)| *c > 1).map(|(j, _)| j).collect();
                    best = Some((sets.len(), Witness { cell: t.clone(), value: v, sets, repeated }));
                }
            }
        }
        let (multiplicity, witness) = best.ok_or_else(|| Error::Input("empty complex".into()))?;
        let k = base_multiplicity - 1;
        let bound = k + 2;
        let systems = scan_systems(&self.systems);
        Ok(CoverReport {
            k,
            cells: self.complex.simplices.len(),
            base_multiplicity,
            combined_sets: combined.len(),
            multiplicity,
            bound,
            relatively_compact: self.systems.iter().all(|s| s.eps < Q::one()),
            systems,
            witness,
            passed: multiplicity <= bound,
        })
    }

    /// Brute-force maximum over a uniform grid of `f` values per cell.
    pub fn brute_force(&self, steps: i64) -> usize {
        let mut best = 0;
        for t in &self.complex.simplices {
            let js = self.indices(t);
            let lo = t.iter().map(|&v| self.f[v]).min().unwrap();
            let hi = t.iter().map(|&v| self.f[v]).max().unwrap();
            let vals: Vec<Q> =
                if lo == hi { vec![lo] } else { (1..steps).map(|i| lo + (hi - lo) * Q::new(i, steps)).collect() };
            for v in vals {
                best = best.max(self.sets_at(&js, &v).len());
            }
        }
        best
    }
}

/// Combined cover from the star refinement of `k`, `f` = scaled graph
/// distance from `base` in the subdivision, and the standard interval systems.
pub fn combine(k: &Complex, base: usize, scale: Q) -> Result<(CoverInstance, CoverReport)> {
    let star = star_refinement(k)?;
    let systems = interval_systems(star.cover.len())?;
    build_and_verify(star, base, scale, systems)
}

fn build_and_verify(
    star: StarCover,
    base: usize,
    scale: Q,
    systems: Vec<IntervalFamily>,
) -> Result<(CoverInstance, CoverReport)> {
    let d = star.subdivision.graph_distance(base);
    if d.iter().any(Option::is_none) {
        return Err(Error::Input("complex is not connected".into()));
    }
    let f = d.into_iter().map(|x| Q::from(x.unwrap() as i64) * scale).collect();
    let ci = CoverInstance { complex: star.subdivision, cover: star.cover, f, systems };
    let r = ci.verify()?;
    Ok((ci, r))
}

/// Wedge of two triangulated circles.
pub fn wedge_of_circles() -> Complex {
    let e = [[0, 1], [1, 2], [0, 2], [0, 3], [3, 4], [0, 4]];
    Complex::from_maximal(5, &e.iter().map(|s| s.to_vec()).collect::<Vec<_>>()).expect("valid model")
}

/// Torus triangulated on a 3×3 grid.
pub fn torus_grid() -> Complex {
    let v = |i: usize, j: usize| (i % 3) * 3 + j % 3;
    let mut t = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            t.push(vec![v(i, j), v(i + 1, j), v(i + 1, j + 1)]);
            t.push(vec![v(i, j), v(i, j + 1), v(i + 1, j + 1)]);
        }
    }
    Complex::from_maximal(9, &t).expect("valid model")
}

pub fn default_scale() -> Q {
    Q::new(1, 2)
}

/// Every family gets the same shift, so overlap zones coincide.
pub fn adversarial(k: &Complex, base: usize, scale: Q) -> Result<(CoverInstance, CoverReport)> {
    let star = star_refinement(k)?;
    let n = star.cover.len() as i64;
    let systems = (0..n).map(|_| IntervalFamily { shift: Q::zero(), eps: Q::new(1, 4 * n) }).collect();
    build_and_verify(star, base, scale, systems)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_multiplicities() {
        let edge = Complex::from_maximal(2, &[vec![0, 1]]).unwrap();
        assert_eq!(star_refinement(&edge).unwrap().multiplicity(), 2);
        let bd = Complex::from_maximal(3, &[vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        assert_eq!(star_refinement(&bd).unwrap().multiplicity(), 2);
        let tri = Complex::from_maximal(3, &[vec![0, 1, 2]]).unwrap();
        let s = star_refinement(&tri).unwrap();
        assert_eq!(s.multiplicity(), 3);
        assert_eq!(s.subdivision.simplices.iter().filter(|t| t.len() == 3).count(), 6);
    }

    #[test]
    fn interval_scans() {
        let one = interval_systems(1).unwrap();
        assert_eq!(scan_systems(&one).single, vec![2]);
        for n in 2..=5 {
            let s = scan_systems(&interval_systems(n).unwrap());
            assert!(s.passed, "{s:?}");
            assert_eq!(s.pairwise_max, 3);
        }
    }

    #[test]
    fn sampled_pair_of_families() {
        let f = interval_systems(2).unwrap();
        let mut worst = 0;
        for i in 0..10_000 {
            let t = Q::new(i, 2500) - Q::from(1);
            worst = worst.max(f[0].containing(&t).len() + f[1].containing(&t).len());
        }
        assert_eq!(worst, 3);
    }

    #[test]
    fn models_meet_bound() {
        let (ci, r) = combine(&wedge_of_circles(), 0, default_scale()).unwrap();
        assert_eq!((r.k, r.bound), (1, 3));
        assert!(r.passed && r.multiplicity <= 3);
        assert!(ci.brute_force(64) <= r.multiplicity);
        let (ci, r) = combine(&torus_grid(), 0, default_scale()).unwrap();
        assert_eq!((r.k, r.bound), (2, 4));
        assert!(r.passed);
        assert!(ci.brute_force(64) <= r.multiplicity);
    }

    #[test]
    fn adversarial_witness() {
        for k in [wedge_of_circles(), torus_grid()] {
            let (ci, r) = adversarial(&k, 0, default_scale()).unwrap();
            assert!(!r.passed);
            assert!(r.multiplicity >= r.k + 3);
            assert!(!r.witness.repeated.is_empty());
            assert!(!r.systems.passed);
            assert_eq!(ci.sets_at(&ci.indices(&r.witness.cell), &r.witness.value), r.witness.sets);
            assert!(r.require().is_err());
        }
    }
}
