//! Exactly identified points of the universal cover.
//!
//! A lifted point is a deck transformation applied to a canonical base point.
//! Base points are either atoms (fixed coordinates, compared bitwise) or
//! evaluations of a straight simplex at rational barycentric coordinates.
//! Deck transformations are identified by their orbit point `g·o`, which
//! separates elements of a torsion-free cocompact group by a wide margin.

use std::cmp::Ordering;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::affine::{q_f64, Q};
use crate::geom::{straight_eval, HIsometry, HPoint};

const DECK_GRID: f64 = 16.0;

#[derive(Clone, Debug)]
pub struct Deck {
    mat: Option<Arc<HIsometry>>,
    key: [i64; 3],
}

const IDENTITY_KEY: [i64; 3] = [DECK_GRID as i64, 0, 0];

impl Deck {
    pub fn identity() -> Self {
        Deck { mat: None, key: IDENTITY_KEY }
    }

    pub fn from_iso(g: HIsometry) -> Self {
        assert_eq!(g.dim, 2, "deck transformations act on H²");
        let o = g.orbit_point();
        let key =
            [(o[0] * DECK_GRID).round() as i64, (o[1] * DECK_GRID).round() as i64, (o[2] * DECK_GRID).round() as i64];
        if key == IDENTITY_KEY {
            Deck::identity()
        } else {
            Deck { mat: Some(Arc::new(g)), key }
        }
    }

    pub fn is_identity(&self) -> bool {
        self.mat.is_none()
    }

    pub fn key(&self) -> [i64; 3] {
        self.key
    }

    pub fn iso(&self) -> HIsometry {
        match &self.mat {
            Some(m) => (**m).clone(),
            None => HIsometry::identity(2),
        }
    }

    pub fn matrix(&self) -> Option<&HIsometry> {
        self.mat.as_deref()
    }

    pub fn mul(&self, other: &Deck) -> Deck {
        match (&self.mat, &other.mat) {
            (None, _) => other.clone(),
            (_, None) => self.clone(),
            (Some(a), Some(b)) => Deck::from_iso(a.compose(b)),
        }
    }

    pub fn inverse(&self) -> Deck {
        match &self.mat {
            None => self.clone(),
            Some(a) => Deck::from_iso(a.inverse()),
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match &self.mat {
            None => x.to_vec(),
            Some(m) => m.apply_slice(x),
        }
    }
}

impl PartialEq for Deck {
    fn eq(&self, o: &Self) -> bool {
        self.key == o.key
    }
}
impl Eq for Deck {}
impl Hash for Deck {
    fn hash<H: Hasher>(&self, h: &mut H) {
        self.key.hash(h)
    }
}
impl PartialOrd for Deck {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Deck {
    fn cmp(&self, o: &Self) -> Ordering {
        self.key.cmp(&o.key)
    }
}

impl Serialize for Deck {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.mat.as_ref().map(|m| m.m.clone()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Deck {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let m: Option<Vec<f64>> = Option::deserialize(d)?;
        match m {
            None => Ok(Deck::identity()),
            Some(m) => {
                let g = HIsometry::from_rows(2, m).map_err(serde::de::Error::custom)?;
                Ok(Deck::from_iso(g))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PointKind {
    Atom(Vec<u64>),
    Eval(Vec<FactorPoint>, Vec<Q>),
}

/// Canonical base point with cached coordinates.
#[derive(Clone, Debug)]
pub struct QPoint {
    kind: PointKind,
    coords: Vec<f64>,
}

impl QPoint {
    pub fn atom(p: &HPoint) -> Self {
        QPoint { kind: PointKind::Atom(p.coords.iter().map(|c| c.to_bits()).collect()), coords: p.coords.clone() }
    }

    pub fn kind(&self) -> &PointKind {
        &self.kind
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn is_atom(&self) -> bool {
        matches!(self.kind, PointKind::Atom(_))
    }
}

impl PartialEq for QPoint {
    fn eq(&self, o: &Self) -> bool {
        self.kind == o.kind
    }
}
impl Eq for QPoint {}
impl Hash for QPoint {
    fn hash<H: Hasher>(&self, h: &mut H) {
        self.kind.hash(h)
    }
}
impl PartialOrd for QPoint {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for QPoint {
    fn cmp(&self, o: &Self) -> Ordering {
        self.kind.cmp(&o.kind)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum QPointRepr {
    Atom { coords: Vec<f64> },
    Eval { vertices: Vec<FactorPoint>, beta: Vec<Q> },
}

impl Serialize for QPoint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match &self.kind {
            PointKind::Atom(_) => QPointRepr::Atom { coords: self.coords.clone() }.serialize(s),
            PointKind::Eval(v, b) => QPointRepr::Eval { vertices: v.clone(), beta: b.clone() }.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for QPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match QPointRepr::deserialize(d)? {
            QPointRepr::Atom { coords } => {
                Ok(QPoint { kind: PointKind::Atom(coords.iter().map(|c| c.to_bits()).collect()), coords })
            }
            QPointRepr::Eval { vertices, beta } => {
                if vertices.len() != beta.len() || vertices.is_empty() {
                    return Err(serde::de::Error::custom("eval point arity mismatch"));
                }
                let coords = eval_coords(&vertices, &beta);
                Ok(QPoint { kind: PointKind::Eval(vertices, beta), coords })
            }
        }
    }
}

fn eval_coords(vertices: &[FactorPoint], beta: &[Q]) -> Vec<f64> {
    let vc: Vec<Vec<f64>> = vertices.iter().map(|v| v.coords()).collect();
    let z: Vec<f64> = beta.iter().map(q_f64).collect();
    straight_eval(&vc, &z)
}

/// Point of one factor of the universal cover.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FactorPoint {
    pub deck: Deck,
    pub base: Arc<QPoint>,
}

/// Point of a product of universal covers, one entry per factor.
pub type CoverPoint = Vec<FactorPoint>;

impl FactorPoint {
    pub fn atom(p: &HPoint) -> Self {
        FactorPoint { deck: Deck::identity(), base: Arc::new(QPoint::atom(p)) }
    }

    pub fn lifted(deck: Deck, base: Arc<QPoint>) -> Self {
        FactorPoint { deck, base }
    }

    pub fn coords(&self) -> Vec<f64> {
        self.deck.apply(&self.base.coords)
    }

    pub fn translate(&self, h: &Deck) -> FactorPoint {
        FactorPoint { deck: h.mul(&self.deck), base: self.base.clone() }
    }

    /// Point of the straight simplex on `vertices` at rational `beta`, in
    /// canonical form.
    pub fn eval(vertices: Vec<FactorPoint>, beta: Vec<Q>) -> FactorPoint {
        let mut vs: Vec<FactorPoint> = Vec::new();
        let mut bs: Vec<Q> = Vec::new();
        for (v, b) in vertices.into_iter().zip(beta) {
            if b != Q::from_integer(0) {
                vs.push(v);
                bs.push(b);
            }
        }
        assert!(!vs.is_empty(), "barycentric weights vanish");
        let mut uniq: Vec<FactorPoint> = Vec::new();
        for v in &vs {
            if !uniq.contains(v) {
                uniq.push(v.clone());
            }
        }
        if uniq.len() <= 2 && uniq.len() < vs.len() {
            let mut w = vec![Q::from_integer(0); uniq.len()];
            for (v, b) in vs.iter().zip(&bs) {
                let i = uniq.iter().position(|u| u == v).unwrap();
                w[i] += *b;
            }
            vs = uniq;
            bs = w;
        }
        if vs.len() == 1 {
            return vs.pop().unwrap();
        }
        if vs.len() == 2 {
            let a = canonical_translate(&vs);
            let swapped = vec![vs[1].clone(), vs[0].clone()];
            let b = canonical_translate(&swapped);
            let rb = vec![bs[1], bs[0]];
            if (&b, &rb) < (&a, &bs) {
                vs = swapped;
                bs = rb;
            }
        }
        let h = vs[0].deck.clone();
        let hi = h.inverse();
        let local: Vec<FactorPoint> = vs.iter().map(|v| v.translate(&hi)).collect();
        let coords = eval_coords(&local, &bs);
        FactorPoint { deck: h, base: Arc::new(QPoint { kind: PointKind::Eval(local, bs), coords }) }
    }
}

/// Translate a vertex list so that its first entry has trivial deck.
pub fn canonical_translate(vs: &[FactorPoint]) -> Vec<FactorPoint> {
    let hi = vs[0].deck.inverse();
    vs.iter().map(|v| v.translate(&hi)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine::q;
    use crate::geom::{dist, HIsometry};

    #[test]
    fn deck_keys_identify_group_elements() {
        let g = HIsometry::translation_x(2.0).compose(&HIsometry::rotation(0.4));
        let a = Deck::from_iso(g.clone());
        let b = Deck::from_iso(g.compose(&HIsometry::rotation(1.0)).compose(&HIsometry::rotation(-1.0)));
        assert_eq!(a, b);
        assert!(a.mul(&a.inverse()).is_identity());
    }

    #[test]
    fn segment_midpoint_is_orientation_free() {
        let p = FactorPoint::atom(&HPoint::polar(1.0, 0.3));
        let r = FactorPoint::atom(&HPoint::polar(2.0, 2.3));
        let h = Deck::from_iso(HIsometry::translation_x(3.0));
        let r = r.translate(&h);
        let m1 = FactorPoint::eval(vec![p.clone(), r.clone()], vec![q(1, 3), q(2, 3)]);
        let m2 = FactorPoint::eval(vec![r.clone(), p.clone()], vec![q(2, 3), q(1, 3)]);
        assert_eq!(m1, m2);
        let d1 = dist(&HPoint::from_raw(m1.coords()), &HPoint::from_raw(p.coords())).unwrap();
        let d = dist(&HPoint::from_raw(r.coords()), &HPoint::from_raw(p.coords())).unwrap();
        assert!((d1 - 2.0 * d / 3.0).abs() < 1e-10);
        let m3 = FactorPoint::eval(vec![p.clone(), r.clone(), p.clone()], vec![q(1, 6), q(2, 3), q(1, 6)]);
        assert_eq!(m1, m3);
        let t = m1.translate(&h);
        let m4 = FactorPoint::eval(vec![p.translate(&h), r.translate(&h)], vec![q(1, 3), q(2, 3)]);
        assert_eq!(t, m4);
    }
}
