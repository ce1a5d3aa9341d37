//! Straightening of lifted chains, its prism homotopy, net snapping and
//! sparsification of product chains.

use crate::chain::{Chain, Homotopy};
use crate::error::{Error, Result};
use crate::expr::SimplexExpr;
use crate::geom::{hdist, ENVELOPE_RADIUS};
use crate::points::{CoverPoint, FactorPoint};
use crate::quotient::{Net, Quotient};

fn check_envelope(p: &CoverPoint) -> Result<()> {
    for f in p {
        let c = f.coords();
        let mut o = vec![0.0; c.len()];
        o[0] = 1.0;
        let d = hdist(&c, &o);
        if !(d <= ENVELOPE_RADIUS) {
            return Err(Error::Envelope(d));
        }
    }
    Ok(())
}

/// Straight simplex on the lifted vertices of `σ`.
pub fn straighten_simplex(s: &SimplexExpr) -> Result<SimplexExpr> {
    let v = s.vertex_points()?;
    Ok(SimplexExpr::straight(v)?.canonical())
}

pub fn straighten(c: &Chain) -> Result<Chain> {
    c.try_map_terms(c.degree(), |s| Ok(vec![(straighten_simplex(s)?, 1.0)]))
}

/// `H(σ)`, the prism of the geodesic homotopy from `σ` to its straightening.
pub fn simplex_homotopy(s: &SimplexExpr) -> Result<Chain> {
    let t = straighten_simplex(s)?;
    Ok(Homotopy::new(s.clone(), t)?.prism_decomposition())
}

/// `H(c)` with `∂H(c) + H(∂c) = s(c) - c`.
pub fn straightening_homotopy(c: &Chain) -> Result<Chain> {
    c.try_map_terms(c.degree() + 1, |s| Ok(simplex_homotopy(s)?.terms().iter().map(|(k, v)| (k.clone(), *v)).collect()))
}

/// `∂H(c) + H(∂c) - s(c) + c`; empty when the homotopy identity holds.
pub fn homotopy_defect(c: &Chain) -> Result<Chain> {
    let mut lhs = straightening_homotopy(c)?.boundary();
    if c.degree() > 0 {
        lhs = lhs.add(&straightening_homotopy(&c.boundary())?);
    }
    Ok(lhs.sub(&straighten(c)?).add(c))
}

/// Largest distance between the ends of the prism homotopy and `σ`, `sσ`
/// over a grid of `res` points per edge.
pub fn homotopy_residual(s: &SimplexExpr, res: usize) -> Result<f64> {
    use crate::affine::PrismMap;
    let k = s.dim();
    let t = straighten_simplex(s)?;
    let bottom = SimplexExpr::join(s.clone(), t.clone(), PrismMap::prism_simplex(k, k))?;
    let top = SimplexExpr::join(s.clone(), t.clone(), PrismMap::prism_simplex(k, 0))?;
    let mut worst: f64 = 0.0;
    for z in crate::geom::simplex_grid(k, res) {
        let mut zb = z.clone();
        zb.push(0.0);
        let mut zt = vec![0.0];
        zt.extend(&z);
        let a = s.evaluate(&z)?;
        let b = t.evaluate(&z)?;
        let ha = bottom.evaluate(&zb)?;
        let hb = top.evaluate(&zt)?;
        for f in 0..a.len() {
            worst = worst.max(hdist(&a[f], &ha[f])).max(hdist(&b[f], &hb[f]));
        }
    }
    Ok(worst)
}

/// Snap every factor of a lifted point to the orbit of the factor's net.
pub fn snap_point(qs: &[&Quotient], nets: &[&Net], p: &CoverPoint) -> Result<CoverPoint> {
    if p.len() != qs.len() || qs.len() != nets.len() {
        return Err(Error::DimensionMismatch { expected: qs.len(), got: p.len() });
    }
    check_envelope(p)?;
    p.iter().zip(qs.iter().zip(nets)).map(|(f, (q, n))| -> Result<FactorPoint> { n.snap(q, &f.coords()) }).collect()
}

/// `str(σ)`: the straight simplex on the net points of the cells containing
/// the lifted vertices of `σ`.
pub fn net_straighten(q: &Quotient, net: &Net, s: &SimplexExpr) -> Result<SimplexExpr> {
    snap_straighten(&[q], &[net], s)
}

pub fn snap_straighten(qs: &[&Quotient], nets: &[&Net], s: &SimplexExpr) -> Result<SimplexExpr> {
    let v = s.vertex_points()?;
    let w = v.iter().map(|p| snap_point(qs, nets, p)).collect::<Result<Vec<_>>>()?;
    Ok(SimplexExpr::straight(w)?.canonical())
}

/// `φ(c)` on a chain over `M×N`.
pub fn sparsify(qm: &Quotient, netm: &Net, qn: &Quotient, netn: &Net, c: &Chain) -> Result<Chain> {
    let qs = [qm, qn];
    let nets = [netm, netn];
    c.try_map_terms(c.degree(), |s| {
        if s.factors() != 2 {
            return Err(Error::Input("sparsify needs chains over a product of two surfaces".into()));
        }
        Ok(vec![(snap_straighten(&qs, &nets, s)?, 1.0)])
    })
}

/// Prism homotopy from `c` to `φ(c)`.
pub fn sparsify_homotopy(qm: &Quotient, netm: &Net, qn: &Quotient, netn: &Net, c: &Chain) -> Result<Chain> {
    let qs = [qm, qn];
    let nets = [netm, netn];
    c.try_map_terms(c.degree() + 1, |s| {
        let t = snap_straighten(&qs, &nets, s)?;
        Ok(Homotopy::new(s.clone(), t)?.prism_decomposition().terms().iter().map(|(k, v)| (k.clone(), *v)).collect())
    })
}

/// Distinct straight factor projections of the support, per factor.
pub fn projection_counts(c: &Chain) -> Vec<usize> {
    let Some((first, _)) = c.iter().next() else { return Vec::new() };
    (0..first.factors())
        .map(|f| {
            let mut seen = std::collections::BTreeSet::new();
            for (s, _) in c.iter() {
                seen.insert(s.project(f, 1).canonical());
            }
            seen.len()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quotient::{build_net, genus_surface};

    #[test]
    fn straight_chain_is_fixed() {
        let q = genus_surface(2).unwrap();
        let c = q.fan_fundamental_cycle();
        assert_eq!(straighten(&c).unwrap(), c);
        assert!(homotopy_defect(&c).unwrap().is_empty());
    }

    #[test]
    fn subdivided_fan_homotopy_identity() {
        let q = genus_surface(2).unwrap();
        let c = q.fan_fundamental_cycle().subdivide();
        let s = straighten(&c).unwrap();
        assert!(s.boundary().is_empty());
        assert!(s.l1_norm() <= c.l1_norm() + 1e-12);
        let h = straightening_homotopy(&c).unwrap();
        assert_eq!(h.boundary(), s.sub(&c));
        let (t, _) = c.iter().next().unwrap();
        assert!(homotopy_residual(t, 4).unwrap() < 1e-9);
    }

    #[test]
    fn net_straighten_fixes_net_simplices() {
        let q = genus_surface(2).unwrap();
        let net = build_net(&q, 0.5).unwrap();
        let c = q.fan_fundamental_cycle();
        let (t, _) = c.iter().next().unwrap();
        let once = net_straighten(&q, &net, t).unwrap();
        let twice = net_straighten(&q, &net, &once).unwrap();
        assert_eq!(once, twice);
        for j in 0..3 {
            assert_eq!(net_straighten(&q, &net, &t.face(j).unwrap()).unwrap(), once.face(j).unwrap().canonical());
        }
    }

    #[test]
    fn sparsified_product_of_fans() {
        let q = genus_surface(2).unwrap();
        let net = build_net(&q, 0.5).unwrap();
        let f = q.fan_fundamental_cycle();
        let c = crate::product::ez_chain(&f, &f);
        assert_eq!(c.len(), 384);
        assert!(c.boundary().is_empty());
        let p = sparsify(&q, &net, &q, &net, &c).unwrap();
        assert!(p.l1_norm() <= c.l1_norm());
        assert!(p.boundary().is_empty());
        let h = sparsify_homotopy(&q, &net, &q, &net, &c).unwrap();
        assert_eq!(h.boundary(), p.sub(&c));
        assert_eq!(sparsify(&q, &net, &q, &net, &p).unwrap(), p);
    }
}
