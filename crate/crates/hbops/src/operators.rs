//! Linear operators between spaces: norms with attainment sets, adjoints
//! and scaling. The exact path maximizes over the vertices of a polytopal
//! domain ball; smooth domains get a net-plus-refinement estimate.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::bodies::{FaceDescriptor, Space, Val, SMOOTH_NORM_BAND};
use crate::exactnum::{RatMatrix, RatVector, Rational};
use crate::lp::affine_dim;
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct LinOperator {
    pub matrix: RatMatrix,
    pub domain: Space,
    pub codomain: Space,
}

impl LinOperator {
    pub fn new(matrix: RatMatrix, domain: Space, codomain: Space) -> Result<Self> {
        if matrix.rows() != codomain.dim() || matrix.cols() != domain.dim() {
            return Err(Error::Dimension(format!(
                "operator matrix is {}x{} between dim {} and dim {}",
                matrix.rows(),
                matrix.cols(),
                domain.dim(),
                codomain.dim()
            )));
        }
        Ok(LinOperator {
            matrix,
            domain,
            codomain,
        })
    }

    pub fn identity(domain: Space, codomain: Space) -> Result<Self> {
        if domain.dim() != codomain.dim() {
            return Err(Error::Dimension("identity needs equal dimensions".into()));
        }
        let n = domain.dim();
        Self::new(RatMatrix::identity(n), domain, codomain)
    }

    pub fn apply(&self, x: &RatVector) -> RatVector {
        self.matrix.mul_vec(x)
    }

    pub fn rank(&self) -> usize {
        crate::exactnum::rank(&self.matrix)
    }
}

/// Operator norm with its attainment structure. `value` is exact for
/// polytopal domains with exactly-normed images; attainment faces are
/// faces of the domain ball on which the norm is attained everywhere.
#[derive(Clone, Debug)]
pub struct NormReport {
    pub value: Val,
    pub attainment_points: Vec<RatVector>,
    pub attainment_faces: Vec<FaceDescriptor>,
}

/// Operator norm. Exact path for polytopal domains: the maximum of
/// ||T v|| over the vertices of the domain ball, with attainment faces
/// recovered from the facet incidence. A face counts as attaining only
/// if the norm is attained on all of it, which by convexity is
/// equivalent to all its vertices and its centroid attaining.
pub fn op_norm(t: &LinOperator) -> Result<NormReport> {
    if t.domain.is_polytopal() {
        op_norm_exact(t)
    } else {
        op_norm_numeric(t, 4096)
    }
}

fn op_norm_exact(t: &LinOperator) -> Result<NormReport> {
    let mat = t.domain.materialize()?;
    let verts = &mat.vertices;
    let vals: Vec<Val> = verts
        .iter()
        .map(|v| t.codomain.norm(&t.apply(v)))
        .collect::<Result<_>>()?;
    let value = vals
        .iter()
        .cloned()
        .reduce(|a, b| a.max(b, SMOOTH_NORM_BAND))
        .ok_or_else(|| Error::Internal("domain ball has no vertices".into()))?;
    let attains =
        |v: &Val| v.cmp_with(&value, SMOOTH_NORM_BAND) == Ordering::Equal;
    let attaining: Vec<usize> = (0..verts.len()).filter(|&i| attains(&vals[i])).collect();

    // Facet incidence, used to close vertex sets into faces.
    let active: Vec<BTreeSet<usize>> = verts
        .iter()
        .map(|v| {
            mat.facets
                .iter()
                .enumerate()
                .filter(|(_, g)| g.dot(v) == Rational::one())
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    let closure = |idxs: &BTreeSet<usize>| -> Option<BTreeSet<usize>> {
        let mut common: Option<BTreeSet<usize>> = None;
        for &i in idxs {
            common = Some(match common {
                None => active[i].clone(),
                Some(c) => c.intersection(&active[i]).cloned().collect(),
            });
        }
        let common = common?;
        if common.is_empty() {
            return None; // no proper face contains the set
        }
        Some(
            (0..verts.len())
                .filter(|&i| common.is_subset(&active[i]))
                .collect(),
        )
    };
    let centroid = |idxs: &BTreeSet<usize>| -> RatVector {
        let k = Rational::from_integer(BigInt::from(idxs.len() as i64));
        let mut c = RatVector::zeros(t.domain.dim());
        for &i in idxs {
            c = &c + &verts[i];
        }
        c.scale(&k.recip())
    };
    let attaining_set: BTreeSet<usize> = attaining.iter().cloned().collect();
    let face_attains = |idxs: &BTreeSet<usize>| -> Result<bool> {
        if !idxs.is_subset(&attaining_set) {
            return Ok(false);
        }
        let c = centroid(idxs);
        Ok(attains(&t.codomain.norm(&t.apply(&c))?))
    };

    // Grow the family of fully-attaining faces by closing unions of
    // pairs, then keep the inclusion-maximal ones.
    let mut family: BTreeSet<BTreeSet<usize>> =
        attaining.iter().map(|&i| BTreeSet::from([i])).collect();
    let mut changed = true;
    while changed {
        changed = false;
        let snapshot: Vec<BTreeSet<usize>> = family.iter().cloned().collect();
        for a in 0..snapshot.len() {
            for b in a + 1..snapshot.len() {
                let union: BTreeSet<usize> =
                    snapshot[a].union(&snapshot[b]).cloned().collect();
                if let Some(cl) = closure(&union) {
                    if !family.contains(&cl) && face_attains(&cl)? {
                        family.insert(cl);
                        changed = true;
                    }
                }
            }
        }
    }
    let clusters: Vec<BTreeSet<usize>> = family
        .iter()
        .filter(|c| !family.iter().any(|d| d.len() > c.len() && c.is_subset(d)))
        .cloned()
        .collect();

    let mut attainment_points: Vec<RatVector> =
        attaining.iter().map(|&i| verts[i].clone()).collect();
    let mut attainment_faces = Vec::new();
    for cl in clusters.iter().filter(|c| c.len() > 1) {
        let face_verts: Vec<RatVector> = cl.iter().map(|&i| verts[i].clone()).collect();
        let common: BTreeSet<usize> = cl
            .iter()
            .map(|&i| active[i].clone())
            .reduce(|x, y| x.intersection(&y).cloned().collect())
            .expect("nonempty cluster");
        let k = Rational::from_integer(BigInt::from(common.len() as i64));
        let mut h = RatVector::zeros(t.domain.dim());
        for &g in &common {
            h = &h + &mat.facets[g];
        }
        let functional = h.scale(&k.recip());
        let dimension = affine_dim(&face_verts)?;
        let v0 = &face_verts[0];
        let diffs: Vec<RatVector> = face_verts.iter().skip(1).map(|v| v - v0).collect();
        let affine_basis = independent_subset(&diffs);
        attainment_points.push(centroid(cl));
        attainment_faces.push(FaceDescriptor {
            functional,
            dimension,
            affine_basis,
            vertices: face_verts,
            carrier_facets: Some(mat.facets.clone()),
        });
    }
    attainment_points = {
        let s: BTreeSet<RatVector> = attainment_points.into_iter().collect();
        s.into_iter().collect()
    };

    Ok(NormReport {
        value,
        attainment_points,
        attainment_faces,
    })
}

/// Net-and-refine estimate for smooth domains: maximize the Rayleigh
/// quotient ||T u|| / ||u|| over a deterministic direction net, then
/// shrink a pattern search around the best direction down to 1e-12
/// steps. Attainment data is reported through the best direction only.
fn op_norm_numeric(t: &LinOperator, net: usize) -> Result<NormReport> {
    let n = t.domain.dim();
    let quotient = |u: &[f64]| -> f64 {
        let ur = RatVector::new(
            u.iter()
                .map(|&x| {
                    Rational::new(
                        BigInt::from((x * (1u64 << 40) as f64).round() as i64),
                        BigInt::from(1u64 << 40),
                    )
                })
                .collect(),
        );
        let dn = norm_f64(&t.domain, &ur);
        if dn <= 0.0 {
            return 0.0;
        }
        norm_f64(&t.codomain, &t.apply(&ur)) / dn
    };
    let mut best = vec![0.0; n];
    let mut best_val = -1.0;
    for u in direction_net(n, net) {
        let q = quotient(&u);
        if q > best_val {
            best_val = q;
            best = u;
        }
    }
    let mut step = 0.5;
    while step > 1e-12 {
        let mut improved = false;
        for i in 0..n {
            for s in [step, -step] {
                let mut cand = best.clone();
                cand[i] += s;
                let norm: f64 = cand.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm < 1e-9 {
                    continue;
                }
                for c in cand.iter_mut() {
                    *c /= norm;
                }
                let q = quotient(&cand);
                if q > best_val + 1e-15 {
                    best_val = q;
                    best = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.618;
        }
    }
    let best_rat = RatVector::new(
        best.iter()
            .map(|&x| {
                Rational::new(
                    BigInt::from((x * (1u64 << 40) as f64).round() as i64),
                    BigInt::from(1u64 << 40),
                )
            })
            .collect(),
    );
    Ok(NormReport {
        value: Val::Approx(best_val),
        attainment_points: vec![best_rat],
        attainment_faces: Vec::new(),
    })
}

fn norm_f64(s: &Space, v: &RatVector) -> f64 {
    s.norm(v).map(|x| x.to_f64()).unwrap_or(f64::NAN)
}

/// Deterministic unit directions: equally spaced on the circle in
/// dimension 2, a seeded uniform sample on the sphere otherwise.
pub fn direction_net(dim: usize, count: usize) -> Vec<Vec<f64>> {
    if dim == 1 {
        return vec![vec![1.0], vec![-1.0]];
    }
    if dim == 2 {
        return (0..count)
            .map(|k| {
                let a = std::f64::consts::PI * 2.0 * (k as f64) / (count as f64);
                vec![a.cos(), a.sin()]
            })
            .collect();
    }
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x9e3779b9);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm: f64 = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 {
            out.push(u.into_iter().map(|x| x / norm).collect());
        }
    }
    out
}

fn independent_subset(vectors: &[RatVector]) -> Vec<RatVector> {
    let mut out: Vec<RatVector> = Vec::new();
    for v in vectors {
        if v.is_zero() {
            continue;
        }
        let mut tentative = out.clone();
        tentative.push(v.clone());
        if crate::exactnum::rank(&RatMatrix::from_rows(&tentative)) == tentative.len() {
            out.push(v.clone());
        }
    }
    out
}

/// Adjoint: the transpose matrix between the polar spaces.
pub fn adjoint(t: &LinOperator) -> LinOperator {
    LinOperator {
        matrix: t.matrix.transpose(),
        domain: t.codomain.polar(),
        codomain: t.domain.polar(),
    }
}

/// Scales the operator by a nonzero rational.
pub fn scale(t: &LinOperator, alpha: &Rational) -> Result<LinOperator> {
    if alpha.is_zero() {
        return Err(Error::Validation("scaling an operator by zero".into()));
    }
    Ok(LinOperator {
        matrix: t.matrix.scale(alpha),
        domain: t.domain.clone(),
        codomain: t.codomain.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::{l1_ball, l2_ball, linf_ball, space, BodyExpr};
    use crate::exactnum::{rat, rat_int};

    fn rv(xs: &[i64]) -> RatVector {
        RatVector::from_i64(xs)
    }

    #[test]
    fn identity_l1_to_linf() {
        let t = LinOperator::identity(space(l1_ball(2)).unwrap(), space(linf_ball(2)).unwrap())
            .unwrap();
        let rep = op_norm(&t).unwrap();
        assert_eq!(rep.value.as_rational().unwrap(), &rat_int(1));
        // attained at +-e1, +-e2 and, since the whole sphere attains,
        // also at the four edge centroids.
        for i in 0..2 {
            let e = RatVector::unit(2, i);
            assert!(rep.attainment_points.contains(&e));
            assert!(rep.attainment_points.contains(&-&e));
        }
    }

    #[test]
    fn identity_linf_to_l1_attains_at_corners_only() {
        let t = LinOperator::identity(space(linf_ball(2)).unwrap(), space(l1_ball(2)).unwrap())
            .unwrap();
        let rep = op_norm(&t).unwrap();
        assert_eq!(rep.value.as_rational().unwrap(), &rat_int(2));
        assert_eq!(rep.attainment_points.len(), 4);
        assert!(rep.attainment_points.contains(&rv(&[1, 1])));
        // Edge midpoints have l1 norm 1 < 2: no attainment faces.
        assert!(rep.attainment_faces.is_empty());
    }

    #[test]
    fn identity_l1_to_l1_attains_everywhere() {
        let s = space(l1_ball(2)).unwrap();
        let t = LinOperator::identity(s.clone(), s).unwrap();
        let rep = op_norm(&t).unwrap();
        assert_eq!(rep.value.as_rational().unwrap(), &rat_int(1));
        // The whole sphere attains: four edge faces.
        assert_eq!(rep.attainment_faces.len(), 4);
        for f in &rep.attainment_faces {
            assert_eq!(f.dimension, 1);
        }
    }

    #[test]
    fn adjoint_round_trip_and_pairing() {
        let dom = space(l1_ball(2)).unwrap();
        let cod = space(linf_ball(3)).unwrap();
        let m = RatMatrix::from_i64(3, 2, &[1, 2, 0, -1, 3, 5]);
        let t = LinOperator::new(m, dom, cod).unwrap();
        let a = adjoint(&t);
        assert_eq!(a.matrix.rows(), 2);
        let aa = adjoint(&a);
        assert_eq!(aa.matrix, t.matrix);
        // <T x, y*> = <x, T* y*> exactly on random rational vectors.
        let x = RatVector::new(vec![rat(2, 3), rat(-1, 7)]);
        let ys = RatVector::new(vec![rat(1, 2), rat_int(4), rat(-3, 5)]);
        assert_eq!(t.apply(&x).dot(&ys), a.apply(&ys).dot(&x));
    }

    #[test]
    fn adjoint_norm_equality_polytopal() {
        let dom = space(l1_ball(3)).unwrap();
        let cod = space(linf_ball(2)).unwrap();
        let m = RatMatrix::from_i64(2, 3, &[1, -2, 3, 0, 4, -1]);
        let t = LinOperator::new(m, dom, cod).unwrap();
        let a = adjoint(&t);
        let nt = op_norm(&t).unwrap().value;
        let na = op_norm(&a).unwrap().value;
        assert_eq!(nt.as_rational().unwrap(), na.as_rational().unwrap());
    }

    #[test]
    fn scaling_behavior() {
        let t = LinOperator::identity(space(l1_ball(2)).unwrap(), space(linf_ball(2)).unwrap())
            .unwrap();
        assert!(scale(&t, &rat_int(0)).is_err());
        let s1 = scale(&t, &rat_int(1)).unwrap();
        assert_eq!(s1.matrix, t.matrix);
        let minus = scale(&t, &rat_int(-1)).unwrap();
        let rep = op_norm(&minus).unwrap();
        assert_eq!(rep.value.as_rational().unwrap(), &rat_int(1));
        assert_eq!(
            rep.attainment_points,
            op_norm(&t).unwrap().attainment_points
        );
        let threehalf = scale(&t, &rat(3, 2)).unwrap();
        assert_eq!(
            op_norm(&threehalf).unwrap().value.as_rational().unwrap(),
            &rat(3, 2)
        );
    }

    #[test]
    fn numeric_norm_of_euclidean_identity() {
        let s = space(l2_ball(2)).unwrap();
        let t = LinOperator::identity(s.clone(), s).unwrap();
        let rep = op_norm(&t).unwrap();
        assert!((rep.value.to_f64() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn numeric_norm_matches_exact_on_mixed_domain() {
        // Domain smooth (l2), codomain l1: ||T|| = max over the circle of
        // ||T u||_1 for T = identity in dim 2 is sqrt(2).
        let t = LinOperator::identity(space(l2_ball(2)).unwrap(), space(l1_ball(2)).unwrap())
            .unwrap();
        let rep = op_norm(&t).unwrap();
        assert!((rep.value.to_f64() - 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn remark_operator_attainment() {
        // identity from l1^3 onto the truncated body: norm 1, attained
        // exactly at the six unit basis vectors, no attainment faces.
        let y = space(BodyExpr::IntersectPoly(vec![
            BodyExpr::Scale(rat(11, 10), Box::new(l1_ball(3))),
            linf_ball(3),
        ]))
        .unwrap();
        let t = LinOperator::identity(space(l1_ball(3)).unwrap(), y).unwrap();
        let rep = op_norm(&t).unwrap();
        assert_eq!(rep.value.as_rational().unwrap(), &rat_int(1));
        let mut expect: Vec<RatVector> = Vec::new();
        for i in 0..3 {
            let e = RatVector::unit(3, i);
            expect.push(e.clone());
            expect.push(-&e);
        }
        let expect: std::collections::BTreeSet<RatVector> = expect.into_iter().collect();
        let got: std::collections::BTreeSet<RatVector> =
            rep.attainment_points.iter().cloned().collect();
        assert_eq!(got, expect);
        assert!(rep.attainment_faces.is_empty());
    }
}
