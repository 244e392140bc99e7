//! Symmetric convex bodies as composable expressions: norms, polars,
//! exact materialization of polytopal bodies, exposed faces, the maximal
//! support-set dimension f(X), the non-smoothness count d(x), and
//! witnessed support sets carrying verified cube configurations.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::exactnum::{rank, rational_to_f64, RatMatrix, RatVector, Rational};
use crate::lp::{self, affine_dim, FaceMembership, LpProblem, LpResult};
use crate::{Error, Result};

/// Exponent of a p-ball leaf.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PExponent {
    One,
    Two,
    Infinity,
    /// 1 < q < infinity, q != 2.
    Other(Rational),
}

impl PExponent {
    pub fn conjugate(&self) -> PExponent {
        match self {
            PExponent::One => PExponent::Infinity,
            PExponent::Infinity => PExponent::One,
            PExponent::Two => PExponent::Two,
            PExponent::Other(q) => {
                let one = Rational::one();
                PExponent::Other(q.clone() / (q - &one))
            }
        }
    }

    pub fn is_polytopal(&self) -> bool {
        matches!(self, PExponent::One | PExponent::Infinity)
    }

    fn to_f64(&self) -> f64 {
        match self {
            PExponent::One => 1.0,
            PExponent::Two => 2.0,
            PExponent::Infinity => f64::INFINITY,
            PExponent::Other(q) => rational_to_f64(q),
        }
    }
}

/// A symmetric convex body with nonempty interior, as an expression tree.
/// All facet offsets in H-representations are 1, which is possible
/// because the origin is interior.
#[derive(Clone, Debug, PartialEq)]
pub enum BodyExpr {
    PolytopeV(Vec<RatVector>),
    PolytopeH(Vec<RatVector>),
    PBall { dim: usize, p: PExponent },
    SumInf(Vec<BodyExpr>),
    SumOne(Vec<BodyExpr>),
    Scale(Rational, Box<BodyExpr>),
    IntersectPoly(Vec<BodyExpr>),
}

impl BodyExpr {
    pub fn dim(&self) -> usize {
        match self {
            BodyExpr::PolytopeV(pts) => pts.first().map_or(0, |p| p.dim()),
            BodyExpr::PolytopeH(ns) => ns.first().map_or(0, |n| n.dim()),
            BodyExpr::PBall { dim, .. } => *dim,
            BodyExpr::SumInf(parts) | BodyExpr::SumOne(parts) => {
                parts.iter().map(|p| p.dim()).sum()
            }
            BodyExpr::Scale(_, inner) => inner.dim(),
            BodyExpr::IntersectPoly(parts) => parts.first().map_or(0, |p| p.dim()),
        }
    }

    pub fn is_polytopal(&self) -> bool {
        match self {
            BodyExpr::PolytopeV(_) | BodyExpr::PolytopeH(_) => true,
            BodyExpr::PBall { p, .. } => p.is_polytopal(),
            BodyExpr::SumInf(parts) | BodyExpr::SumOne(parts) => {
                parts.iter().all(|p| p.is_polytopal())
            }
            BodyExpr::Scale(_, inner) => inner.is_polytopal(),
            BodyExpr::IntersectPoly(_) => true,
        }
    }
}

pub fn pball(dim: usize, p: PExponent) -> BodyExpr {
    BodyExpr::PBall { dim, p }
}

pub fn l1_ball(dim: usize) -> BodyExpr {
    pball(dim, PExponent::One)
}

pub fn l2_ball(dim: usize) -> BodyExpr {
    pball(dim, PExponent::Two)
}

pub fn linf_ball(dim: usize) -> BodyExpr {
    pball(dim, PExponent::Infinity)
}

/// Norm values: exact rationals, exact square roots of rationals (the
/// Euclidean case), or floats for everything else. Square roots reduce
/// to rationals whenever the radicand is a perfect square.
#[derive(Clone, Debug)]
pub enum Val {
    Rat(Rational),
    Sqrt(Rational),
    Approx(f64),
}

fn rational_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let (n, d) = (r.numer(), r.denom());
    let sn = n.sqrt();
    let sd = d.sqrt();
    if &(&sn * &sn) == n && &(&sd * &sd) == d {
        Some(Rational::new(sn, sd))
    } else {
        None
    }
}

impl Val {
    pub fn rat(r: Rational) -> Val {
        Val::Rat(r)
    }

    pub fn sqrt_of(r: Rational) -> Val {
        match rational_sqrt(&r) {
            Some(s) => Val::Rat(s),
            None => Val::Sqrt(r),
        }
    }

    pub fn zero() -> Val {
        Val::Rat(Rational::zero())
    }

    pub fn one() -> Val {
        Val::Rat(Rational::one())
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Val::Rat(r) => rational_to_f64(r),
            Val::Sqrt(r) => rational_to_f64(r).sqrt(),
            Val::Approx(f) => *f,
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, Val::Approx(_))
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            Val::Rat(r) => Some(r),
            _ => None,
        }
    }

    /// Comparison. Exact between exact values; within `band` of each
    /// other, inexact values compare as equal.
    pub fn cmp_with(&self, other: &Val, band: f64) -> Ordering {
        match (self, other) {
            (Val::Rat(a), Val::Rat(b)) => a.cmp(b),
            // Values are norms, hence nonnegative; compare squares.
            (Val::Rat(a), Val::Sqrt(b)) => (a * a).cmp(b),
            (Val::Sqrt(a), Val::Rat(b)) => a.cmp(&(b * b)),
            (Val::Sqrt(a), Val::Sqrt(b)) => a.cmp(b),
            _ => {
                let (x, y) = (self.to_f64(), other.to_f64());
                if (x - y).abs() <= band {
                    Ordering::Equal
                } else if x < y {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
        }
    }

    pub fn cmp_rat(&self, bound: &Rational, band: f64) -> Ordering {
        self.cmp_with(&Val::Rat(bound.clone()), band)
    }

    pub fn add(&self, other: &Val) -> Val {
        match (self, other) {
            (Val::Rat(a), Val::Rat(b)) => Val::Rat(a + b),
            _ => Val::Approx(self.to_f64() + other.to_f64()),
        }
    }

    /// Multiplication by a nonnegative rational keeps exactness.
    pub fn mul_rat(&self, c: &Rational) -> Val {
        match self {
            Val::Rat(r) => Val::Rat(r * c),
            Val::Sqrt(r) => Val::sqrt_of(r * c * c),
            Val::Approx(f) => Val::Approx(f * rational_to_f64(c)),
        }
    }

    pub fn max(self, other: Val, band: f64) -> Val {
        if self.cmp_with(&other, band) == Ordering::Less {
            other
        } else {
            self
        }
    }
}

/// Tolerance for unit-sphere membership at smooth leaves.
pub const SMOOTH_NORM_BAND: f64 = 1e-12;
/// Tolerance for face-tie detection at smooth leaves.
pub const SMOOTH_FACE_BAND: f64 = 1e-10;

/// Canonical V- and H-representation of a polytopal body: vertex and
/// facet lists are sorted, deduplicated and irredundant, all facet
/// offsets 1.
#[derive(Clone, Debug, PartialEq)]
pub struct Materialized {
    pub vertices: Vec<RatVector>,
    pub facets: Vec<RatVector>,
}

impl Materialized {
    /// Vertices lying on the facet with the given normal.
    pub fn facet_vertices(&self, normal: &RatVector) -> Vec<RatVector> {
        self.vertices
            .iter()
            .filter(|v| normal.dot(v) == Rational::one())
            .cloned()
            .collect()
    }
}

/// A validated space: the unit ball expression plus caches for the polar
/// and the materialization. Immutable after construction; caches are
/// write-once and race-benign.
pub struct SpaceHandle {
    body: BodyExpr,
    dim: usize,
    polytopal: bool,
    polar_cache: OnceLock<Arc<SpaceHandle>>,
    mat_cache: OnceLock<Materialized>,
}

impl std::fmt::Debug for SpaceHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpaceHandle")
            .field("dim", &self.dim)
            .field("polytopal", &self.polytopal)
            .field("body", &self.body)
            .finish()
    }
}

pub type Space = Arc<SpaceHandle>;

/// Validates a body expression and wraps it into a shareable handle.
/// Bodies that are not symmetric or not full-dimensional are rejected
/// with the first violated invariant, never silently fixed.
pub fn space(body: BodyExpr) -> Result<Space> {
    validate(&body)?;
    Ok(Arc::new(SpaceHandle {
        dim: body.dim(),
        polytopal: body.is_polytopal(),
        body,
        polar_cache: OnceLock::new(),
        mat_cache: OnceLock::new(),
    }))
}

fn validate(body: &BodyExpr) -> Result<()> {
    match body {
        BodyExpr::PolytopeV(pts) => {
            if pts.is_empty() {
                return Err(Error::Validation("polytope has no points".into()));
            }
            let dim = pts[0].dim();
            if dim == 0 {
                return Err(Error::Validation("zero-dimensional polytope".into()));
            }
            if pts.iter().any(|p| p.dim() != dim) {
                return Err(Error::Validation("points of mixed dimension".into()));
            }
            let set: BTreeSet<&RatVector> = pts.iter().collect();
            for p in pts {
                if !set.contains(&-p) {
                    return Err(Error::Validation(format!(
                        "not symmetric: missing -{p:?}"
                    )));
                }
            }
            if rank(&RatMatrix::from_rows(pts)) != dim {
                return Err(Error::Validation(
                    "not full-dimensional: points do not span".into(),
                ));
            }
            Ok(())
        }
        BodyExpr::PolytopeH(ns) => {
            if ns.is_empty() {
                return Err(Error::Validation("no facet normals".into()));
            }
            let dim = ns[0].dim();
            if dim == 0 {
                return Err(Error::Validation("zero-dimensional body".into()));
            }
            if ns.iter().any(|n| n.dim() != dim) {
                return Err(Error::Validation("normals of mixed dimension".into()));
            }
            if ns.iter().any(|n| n.is_zero()) {
                return Err(Error::Validation("zero facet normal".into()));
            }
            let set: BTreeSet<&RatVector> = ns.iter().collect();
            for n in ns {
                if !set.contains(&-n) {
                    return Err(Error::Validation(format!(
                        "not symmetric: missing -{n:?}"
                    )));
                }
            }
            if rank(&RatMatrix::from_rows(ns)) != dim {
                return Err(Error::Validation(
                    "unbounded: normals do not span".into(),
                ));
            }
            Ok(())
        }
        BodyExpr::PBall { dim, p } => {
            if *dim == 0 {
                return Err(Error::Validation("zero-dimensional ball".into()));
            }
            if let PExponent::Other(q) = p {
                if q <= &Rational::one() {
                    return Err(Error::Validation("p-ball exponent must be > 1".into()));
                }
            }
            Ok(())
        }
        BodyExpr::SumInf(parts) | BodyExpr::SumOne(parts) => {
            if parts.is_empty() {
                return Err(Error::Validation("direct sum of no parts".into()));
            }
            parts.iter().try_for_each(validate)
        }
        BodyExpr::Scale(c, inner) => {
            if !c.is_positive() {
                return Err(Error::Validation("scale factor must be positive".into()));
            }
            validate(inner)
        }
        BodyExpr::IntersectPoly(parts) => {
            if parts.is_empty() {
                return Err(Error::Validation("intersection of no parts".into()));
            }
            let dim = parts[0].dim();
            for p in parts {
                if !p.is_polytopal() {
                    return Err(Error::Validation(
                        "intersection parts must be polytopal".into(),
                    ));
                }
                if p.dim() != dim {
                    return Err(Error::Validation(
                        "intersection parts of mixed dimension".into(),
                    ));
                }
            }
            parts.iter().try_for_each(validate)
        }
    }
}

impl SpaceHandle {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_polytopal(&self) -> bool {
        self.polytopal
    }

    pub fn body(&self) -> &BodyExpr {
        &self.body
    }

    /// The dual space: the polar body, cached.
    pub fn polar(&self) -> Space {
        self.polar_cache
            .get_or_init(|| {
                let polar_body =
                    polar_expr(&self.body).expect("polar of a validated body cannot fail");
                space(polar_body).expect("polar of a validated body is valid")
            })
            .clone()
    }

    /// Canonical explicit V- and H-representation; polytopal bodies only.
    pub fn materialize(&self) -> Result<&Materialized> {
        if !self.polytopal {
            return Err(Error::Unsupported(
                "materialize on a body with smooth leaves".into(),
            ));
        }
        if let Some(m) = self.mat_cache.get() {
            return Ok(m);
        }
        let m = materialize_expr(&self.body)?;
        let _ = self.mat_cache.set(m);
        Ok(self.mat_cache.get().expect("just set"))
    }

    /// Gauge of v with respect to the unit ball. Exact for polytopal
    /// bodies and l1/linf leaves; exact square-root backing for
    /// Euclidean leaves; float otherwise.
    pub fn norm(&self, v: &RatVector) -> Result<Val> {
        if v.dim() != self.dim {
            return Err(Error::Dimension(format!(
                "norm of a dim-{} vector in a dim-{} space",
                v.dim(),
                self.dim
            )));
        }
        if self.polytopal {
            let mat = self.materialize()?;
            return Ok(Val::Rat(hrep_gauge(&mat.facets, v)));
        }
        norm_expr(&self.body, v)
    }

    /// Exact-where-possible test that v lies on the unit sphere.
    pub fn is_unit(&self, v: &RatVector) -> Result<bool> {
        Ok(self.norm(v)?.cmp_rat(&Rational::one(), SMOOTH_NORM_BAND) == Ordering::Equal)
    }
}

fn hrep_gauge(facets: &[RatVector], v: &RatVector) -> Rational {
    facets
        .iter()
        .map(|g| g.dot(v))
        .max()
        .expect("nonempty facet list")
        .max(Rational::zero())
}

/// Gauge of v in conv(points) via LP: minimize the total hull weight
/// needed to write v as a nonnegative combination of the points.
fn vrep_gauge(points: &[RatVector], v: &RatVector) -> Result<Rational> {
    if v.is_zero() {
        return Ok(Rational::zero());
    }
    let n = v.dim();
    let k = points.len();
    let mut obj = RatVector::zeros(k);
    for i in 0..k {
        obj.set(i, Rational::one());
    }
    let mut prob = LpProblem::minimize(obj);
    for i in 0..k {
        prob.add_ge(RatVector::unit(k, i), Rational::zero());
    }
    for d in 0..n {
        let row = RatVector::new((0..k).map(|i| points[i].get(d).clone()).collect());
        prob.add_eq(row, v.get(d).clone());
    }
    match lp::solve(&prob) {
        LpResult::Optimal { value, .. } => Ok(value),
        LpResult::Infeasible => Err(Error::Internal(
            "gauge LP infeasible for a full-dimensional body".into(),
        )),
        LpResult::Unbounded => Err(Error::Internal("gauge LP unbounded".into())),
    }
}

fn norm_expr(body: &BodyExpr, v: &RatVector) -> Result<Val> {
    match body {
        BodyExpr::PolytopeH(ns) => Ok(Val::Rat(hrep_gauge(ns, v))),
        BodyExpr::PolytopeV(pts) => Ok(Val::Rat(vrep_gauge(pts, v)?)),
        BodyExpr::PBall { p, .. } => Ok(pball_norm(p, v)),
        BodyExpr::SumInf(parts) => {
            let mut acc = Val::zero();
            let mut off = 0;
            for part in parts {
                let d = part.dim();
                let nv = norm_expr(part, &v.slice(off, d))?;
                acc = acc.max(nv, SMOOTH_NORM_BAND);
                off += d;
            }
            Ok(acc)
        }
        BodyExpr::SumOne(parts) => {
            let mut acc = Val::zero();
            let mut off = 0;
            for part in parts {
                let d = part.dim();
                let nv = norm_expr(part, &v.slice(off, d))?;
                acc = acc.add(&nv);
                off += d;
            }
            Ok(acc)
        }
        BodyExpr::Scale(c, inner) => Ok(norm_expr(inner, v)?.mul_rat(&c.recip())),
        BodyExpr::IntersectPoly(parts) => {
            let mut acc = Val::zero();
            for part in parts {
                acc = acc.max(norm_expr(part, v)?, SMOOTH_NORM_BAND);
            }
            Ok(acc)
        }
    }
}

fn pball_norm(p: &PExponent, v: &RatVector) -> Val {
    match p {
        PExponent::One => Val::Rat(v.abs_sum()),
        PExponent::Infinity => Val::Rat(v.abs_max()),
        PExponent::Two => Val::sqrt_of(v.sq_sum()),
        PExponent::Other(q) => {
            let nonzero: Vec<&Rational> =
                v.entries().iter().filter(|e| !e.is_zero()).collect();
            match nonzero.len() {
                0 => Val::zero(),
                // A single coordinate has the same p-norm for every p.
                1 => Val::Rat(nonzero[0].abs()),
                _ => {
                    let qf = rational_to_f64(q);
                    let s: f64 = v
                        .entries()
                        .iter()
                        .map(|e| rational_to_f64(e).abs().powf(qf))
                        .sum();
                    Val::Approx(s.powf(1.0 / qf))
                }
            }
        }
    }
}

/// Structural polar: V- and H-data swap, p-balls conjugate, the two sum
/// kinds swap, scaling inverts. The polar of a polytopal intersection is
/// the convex hull of the part polars.
pub fn polar_expr(body: &BodyExpr) -> Result<BodyExpr> {
    Ok(match body {
        BodyExpr::PolytopeV(pts) => BodyExpr::PolytopeH(pts.clone()),
        BodyExpr::PolytopeH(ns) => BodyExpr::PolytopeV(ns.clone()),
        BodyExpr::PBall { dim, p } => BodyExpr::PBall {
            dim: *dim,
            p: p.conjugate(),
        },
        BodyExpr::SumInf(parts) => BodyExpr::SumOne(
            parts
                .iter()
                .map(polar_expr)
                .collect::<Result<Vec<_>>>()?,
        ),
        BodyExpr::SumOne(parts) => BodyExpr::SumInf(
            parts
                .iter()
                .map(polar_expr)
                .collect::<Result<Vec<_>>>()?,
        ),
        BodyExpr::Scale(c, inner) => {
            BodyExpr::Scale(c.recip(), Box::new(polar_expr(inner)?))
        }
        BodyExpr::IntersectPoly(parts) => {
            let mut points = Vec::new();
            for part in parts {
                points.extend(materialize_expr(part)?.facets);
            }
            BodyExpr::PolytopeV(points)
        }
    })
}

/// Exact vertex enumeration for {x : n.x <= 1 for all given normals},
/// assumed bounded with the origin interior. Incremental cutting: start
/// from an enclosing box and cut one halfspace at a time; edges are
/// detected with the exact algebraic adjacency test (the common active
/// constraints have rank dim - 1).
fn vertex_enum(normals: &[RatVector], dim: usize) -> Result<Vec<RatVector>> {
    if rank(&RatMatrix::from_rows(normals)) != dim {
        return Err(Error::Validation(
            "vertex enumeration on an unbounded body".into(),
        ));
    }
    // Enclosing box from dim independent normals: the body lies in
    // B^{-1} [-1,1]^dim, so |x_i| <= sum_j |B^{-1}_{ij}|; add 1 for a
    // strict margin so no body vertex can touch the box.
    let mut rows = Vec::new();
    for n in normals {
        let mut tentative = rows.clone();
        tentative.push(n.clone());
        if rank(&RatMatrix::from_rows(&tentative)) > rows.len() {
            rows.push(n.clone());
            if rows.len() == dim {
                break;
            }
        }
    }
    let binv = crate::exactnum::inverse(&RatMatrix::from_rows(&rows))?;
    let bounds: Vec<Rational> = (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| binv.get(i, j).abs())
                .sum::<Rational>()
                + Rational::one()
        })
        .collect();

    // Constraint list: box facets first, then the input normals scaled
    // to offset 1 (e_i . x <= M_i becomes (e_i / M_i) . x <= 1).
    let mut constraints: Vec<RatVector> = Vec::new();
    for i in 0..dim {
        let e = RatVector::unit(dim, i).scale(&bounds[i].recip());
        constraints.push(e.clone());
        constraints.push(-&e);
    }
    let ncut0 = constraints.len();
    constraints.extend(normals.iter().cloned());

    let mut vertices: Vec<RatVector> = Vec::new();
    for mask in 0..1usize << dim {
        let mut v = RatVector::zeros(dim);
        for i in 0..dim {
            let s = if mask >> i & 1 == 1 {
                -bounds[i].clone()
            } else {
                bounds[i].clone()
            };
            v.set(i, s);
        }
        vertices.push(v);
    }

    let active_sets = |verts: &[RatVector], upto: usize| -> Vec<Vec<usize>> {
        verts
            .iter()
            .map(|v| {
                (0..upto)
                    .filter(|&c| constraints[c].dot(v) == Rational::one())
                    .collect()
            })
            .collect()
    };

    for k in ncut0..constraints.len() {
        let g = &constraints[k];
        let vals: Vec<Rational> = vertices
            .iter()
            .map(|v| g.dot(v) - Rational::one())
            .collect();
        if vals.iter().all(|x| !x.is_positive()) {
            continue;
        }
        let active = active_sets(&vertices, k);
        let mut next: BTreeSet<RatVector> = BTreeSet::new();
        for (i, v) in vertices.iter().enumerate() {
            if !vals[i].is_positive() {
                next.insert(v.clone());
            }
        }
        for i in 0..vertices.len() {
            if !vals[i].is_negative() {
                continue;
            }
            for j in 0..vertices.len() {
                if !vals[j].is_positive() {
                    continue;
                }
                let common: Vec<RatVector> = active[i]
                    .iter()
                    .filter(|c| active[j].contains(c))
                    .map(|&c| constraints[c].clone())
                    .collect();
                if common.is_empty()
                    || rank(&RatMatrix::from_rows(&common)) != dim - 1
                {
                    continue;
                }
                let t = &vals[i] / (&vals[i] - &vals[j]);
                let p = &vertices[i] + &(&vertices[j] - &vertices[i]).scale(&t);
                next.insert(p);
            }
        }
        vertices = next.into_iter().collect();
        if vertices.is_empty() {
            return Err(Error::Internal(
                "vertex enumeration emptied a body with interior origin".into(),
            ));
        }
    }
    Ok(vertices)
}

/// Facet-defining subset of an H-description, given the vertex set:
/// a normal is a facet normal iff its contact set has affine dimension
/// dim - 1.
fn irredundant_facets(
    normals: &[RatVector],
    vertices: &[RatVector],
    dim: usize,
) -> Result<Vec<RatVector>> {
    let mut set: BTreeSet<RatVector> = BTreeSet::new();
    for n in normals {
        let contact: Vec<RatVector> = vertices
            .iter()
            .filter(|v| n.dot(v) == Rational::one())
            .cloned()
            .collect();
        if !contact.is_empty() && affine_dim(&contact)? == dim - 1 {
            set.insert(n.clone());
        }
    }
    Ok(set.into_iter().collect())
}

/// Extreme points of a symmetric point set, given the facet normals of
/// its hull: a point is a vertex iff its active normals have full rank.
fn extreme_points(points: &[RatVector], facets: &[RatVector], dim: usize) -> Vec<RatVector> {
    let mut set: BTreeSet<RatVector> = BTreeSet::new();
    for p in points {
        let active: Vec<RatVector> = facets
            .iter()
            .filter(|g| g.dot(p) == Rational::one())
            .cloned()
            .collect();
        if !active.is_empty() && rank(&RatMatrix::from_rows(&active)) == dim {
            set.insert(p.clone());
        }
    }
    set.into_iter().collect()
}

fn sorted_dedup(vs: Vec<RatVector>) -> Vec<RatVector> {
    let set: BTreeSet<RatVector> = vs.into_iter().collect();
    set.into_iter().collect()
}

/// Explicit canonical V- and H-representations for polytopal bodies.
/// Products concatenate H-data, hulls concatenate V-data, and the
/// remaining conversions run the exact double-description enumeration.
pub fn materialize_expr(body: &BodyExpr) -> Result<Materialized> {
    match body {
        BodyExpr::PolytopeV(pts) => {
            let dim = body.dim();
            let points = sorted_dedup(pts.clone());
            // Facet normals of conv(P) are the vertices of the polar
            // {y : p.y <= 1}, so one enumeration gives the H-data.
            let facets = vertex_enum(&points, dim)?;
            let vertices = extreme_points(&points, &facets, dim);
            Ok(Materialized { vertices, facets })
        }
        BodyExpr::PolytopeH(ns) => {
            let dim = body.dim();
            let normals = sorted_dedup(ns.clone());
            let vertices = vertex_enum(&normals, dim)?;
            let facets = irredundant_facets(&normals, &vertices, dim)?;
            Ok(Materialized { vertices, facets })
        }
        BodyExpr::PBall { dim, p } => match p {
            PExponent::One => Ok(Materialized {
                vertices: sorted_dedup(cross_polytope_vertices(*dim)),
                facets: sorted_dedup(sign_vectors(*dim)),
            }),
            PExponent::Infinity => Ok(Materialized {
                vertices: sorted_dedup(sign_vectors(*dim)),
                facets: sorted_dedup(cross_polytope_vertices(*dim)),
            }),
            _ => Err(Error::Unsupported("materialize on a smooth leaf".into())),
        },
        BodyExpr::SumInf(parts) => {
            let total = body.dim();
            let mats: Vec<Materialized> =
                parts.iter().map(materialize_expr).collect::<Result<_>>()?;
            // Vertices of a product are products of vertices.
            let mut vertices = vec![RatVector::zeros(total)];
            let mut off = 0;
            for (part, mat) in parts.iter().zip(&mats) {
                let mut grown = Vec::with_capacity(vertices.len() * mat.vertices.len());
                for base in &vertices {
                    for pv in &mat.vertices {
                        let mut v = base.clone();
                        for (i, e) in pv.entries().iter().enumerate() {
                            v.set(off + i, e.clone());
                        }
                        grown.push(v);
                    }
                }
                vertices = grown;
                off += part.dim();
            }
            // Facets are the embedded part facets.
            let mut facets = Vec::new();
            let mut off = 0;
            for (part, mat) in parts.iter().zip(&mats) {
                for g in &mat.facets {
                    facets.push(g.embed(total, off));
                }
                off += part.dim();
            }
            Ok(Materialized {
                vertices: sorted_dedup(vertices),
                facets: sorted_dedup(facets),
            })
        }
        BodyExpr::SumOne(parts) => {
            let total = body.dim();
            let mats: Vec<Materialized> =
                parts.iter().map(materialize_expr).collect::<Result<_>>()?;
            // Vertices embed; facet normals are all cross-part choices.
            let mut vertices = Vec::new();
            let mut off = 0;
            for (part, mat) in parts.iter().zip(&mats) {
                for v in &mat.vertices {
                    vertices.push(v.embed(total, off));
                }
                off += part.dim();
            }
            let mut facets = vec![RatVector::zeros(total)];
            let mut off = 0;
            for (part, mat) in parts.iter().zip(&mats) {
                let mut grown = Vec::with_capacity(facets.len() * mat.facets.len());
                for base in &facets {
                    for g in &mat.facets {
                        let mut n = base.clone();
                        for (i, e) in g.entries().iter().enumerate() {
                            n.set(off + i, e.clone());
                        }
                        grown.push(n);
                    }
                }
                facets = grown;
                off += part.dim();
            }
            Ok(Materialized {
                vertices: sorted_dedup(vertices),
                facets: sorted_dedup(facets),
            })
        }
        BodyExpr::Scale(c, inner) => {
            let m = materialize_expr(inner)?;
            let cinv = c.recip();
            Ok(Materialized {
                vertices: sorted_dedup(
                    m.vertices.iter().map(|v| v.scale(c)).collect(),
                ),
                facets: sorted_dedup(m.facets.iter().map(|g| g.scale(&cinv)).collect()),
            })
        }
        BodyExpr::IntersectPoly(parts) => {
            let dim = body.dim();
            let mut normals = Vec::new();
            for part in parts {
                normals.extend(materialize_expr(part)?.facets);
            }
            let normals = sorted_dedup(normals);
            let vertices = vertex_enum(&normals, dim)?;
            let facets = irredundant_facets(&normals, &vertices, dim)?;
            Ok(Materialized { vertices, facets })
        }
    }
}

fn cross_polytope_vertices(dim: usize) -> Vec<RatVector> {
    let mut vs = Vec::with_capacity(2 * dim);
    for i in 0..dim {
        let e = RatVector::unit(dim, i);
        vs.push(e.clone());
        vs.push(-&e);
    }
    vs
}

fn sign_vectors(dim: usize) -> Vec<RatVector> {
    lp::sign_patterns(dim).map(RatVector::new).collect()
}

/// An exposed face of the unit ball: the contact set of a supporting
/// hyperplane. For polytopal bodies everything is exact and the carrier
/// facet list is retained for cube-scaling LPs; for smooth leaves the
/// face is a single point and only the dimension is meaningful.
#[derive(Clone, Debug)]
pub struct FaceDescriptor {
    /// Exposing functional, scaled so its supremum over the ball is 1
    /// whenever that scaling is exactly representable.
    pub functional: RatVector,
    pub dimension: usize,
    pub affine_basis: Vec<RatVector>,
    /// Vertex list in the polytopal case, empty otherwise.
    pub vertices: Vec<RatVector>,
    /// Facet normals of the carrier polytope, when available.
    pub carrier_facets: Option<Vec<RatVector>>,
}

/// Greedily picks a maximal linearly independent subset.
fn independent_subset(vectors: &[RatVector]) -> Vec<RatVector> {
    let mut out: Vec<RatVector> = Vec::new();
    for v in vectors {
        if v.is_zero() {
            continue;
        }
        let mut tentative = out.clone();
        tentative.push(v.clone());
        if rank(&RatMatrix::from_rows(&tentative)) == tentative.len() {
            out.push(v.clone());
        }
    }
    out
}

/// The face of B(S) where the functional h attains its maximum over the
/// ball. Exact for polytopal S; for smooth leaves and their sums the
/// descriptor carries the exact dimension and the value comparisons use
/// the smooth-leaf tie tolerance.
pub fn exposed_face(s: &SpaceHandle, h: &RatVector) -> Result<FaceDescriptor> {
    if h.is_zero() {
        return Err(Error::Validation("exposing functional is zero".into()));
    }
    if h.dim() != s.dim() {
        return Err(Error::Dimension("functional dimension mismatch".into()));
    }
    if s.is_polytopal() {
        let mat = s.materialize()?;
        let vals: Vec<Rational> = mat.vertices.iter().map(|v| h.dot(v)).collect();
        let max = vals.iter().max().expect("nonempty vertex set").clone();
        let functional = h.scale(&max.recip());
        let vertices: Vec<RatVector> = mat
            .vertices
            .iter()
            .zip(&vals)
            .filter(|(_, val)| **val == max)
            .map(|(v, _)| v.clone())
            .collect();
        let dimension = affine_dim(&vertices)?;
        let v0 = &vertices[0];
        let diffs: Vec<RatVector> = vertices.iter().skip(1).map(|v| v - v0).collect();
        let affine_basis = independent_subset(&diffs);
        return Ok(FaceDescriptor {
            functional,
            dimension,
            affine_basis,
            vertices,
            carrier_facets: Some(mat.facets.clone()),
        });
    }
    let (_, dimension) = exposed_face_dim_expr(&s.body, h)?;
    Ok(FaceDescriptor {
        functional: h.clone(),
        dimension,
        affine_basis: Vec::new(),
        vertices: Vec::new(),
        carrier_facets: None,
    })
}

/// Recursive (dual value, face dimension) of the face exposed by h.
fn exposed_face_dim_expr(body: &BodyExpr, h: &RatVector) -> Result<(Val, usize)> {
    match body {
        BodyExpr::PolytopeV(_) | BodyExpr::PolytopeH(_) => {
            let mat = materialize_expr(body)?;
            let vals: Vec<Rational> = mat.vertices.iter().map(|v| h.dot(v)).collect();
            let max = vals.iter().max().expect("nonempty").clone();
            let verts: Vec<RatVector> = mat
                .vertices
                .into_iter()
                .zip(&vals)
                .filter(|(_, val)| **val == max)
                .map(|(v, _)| v)
                .collect();
            Ok((Val::Rat(max), affine_dim(&verts)?))
        }
        BodyExpr::PBall { dim, p } => match p {
            PExponent::One | PExponent::Infinity => {
                exposed_face_dim_expr(&materialized_as_v(body)?, h)
            }
            PExponent::Two => {
                // Unique contact point for a strictly convex ball.
                let _ = dim;
                Ok((Val::sqrt_of(h.sq_sum()), 0))
            }
            PExponent::Other(q) => {
                let qf = rational_to_f64(q);
                let conj = qf / (qf - 1.0);
                let s: f64 = h
                    .entries()
                    .iter()
                    .map(|e| rational_to_f64(e).abs().powf(conj))
                    .sum();
                Ok((Val::Approx(s.powf(1.0 / conj)), 0))
            }
        },
        BodyExpr::SumInf(parts) => {
            // Product ball: the face is the product of part faces; a
            // zero block functional contributes the whole part ball.
            let mut total_val = Val::zero();
            let mut total_dim = 0usize;
            let mut off = 0;
            for part in parts {
                let d = part.dim();
                let hp = h.slice(off, d);
                if hp.is_zero() {
                    total_dim += d;
                } else {
                    let (v, fd) = exposed_face_dim_expr(part, &hp)?;
                    total_val = total_val.add(&v);
                    total_dim += fd;
                }
                off += d;
            }
            Ok((total_val, total_dim))
        }
        BodyExpr::SumOne(parts) => {
            // Hull of embedded balls: the winners of the per-part dual
            // values tie into conv(F_1 u ... u F_t).
            let mut results = Vec::new();
            let mut off = 0;
            for part in parts {
                let d = part.dim();
                let hp = h.slice(off, d);
                if hp.is_zero() {
                    results.push((Val::zero(), 0usize));
                } else {
                    results.push(exposed_face_dim_expr(part, &hp)?);
                }
                off += d;
            }
            let best = results
                .iter()
                .map(|(v, _)| v.clone())
                .reduce(|a, b| a.max(b, SMOOTH_FACE_BAND))
                .expect("nonempty parts");
            let winners: Vec<&(Val, usize)> = results
                .iter()
                .filter(|(v, _)| v.cmp_with(&best, SMOOTH_FACE_BAND) == Ordering::Equal)
                .collect();
            let dim_sum: usize = winners.iter().map(|(_, d)| d).sum();
            Ok((best, dim_sum + winners.len() - 1))
        }
        BodyExpr::Scale(c, inner) => {
            let (v, d) = exposed_face_dim_expr(inner, h)?;
            Ok((v.mul_rat(c), d))
        }
        BodyExpr::IntersectPoly(_) => {
            exposed_face_dim_expr(&materialized_as_v(body)?, h)
        }
    }
}

fn materialized_as_v(body: &BodyExpr) -> Result<BodyExpr> {
    Ok(BodyExpr::PolytopeV(materialize_expr(body)?.vertices))
}

/// d(x): the dimension of the set of unit functionals attaining 1 at x,
/// computed as the dimension of the polar face exposed by x. The
/// precondition is that x lies on the unit sphere.
pub fn compute_d(s: &SpaceHandle, x: &RatVector) -> Result<usize> {
    if !s.is_unit(x)? {
        return Err(Error::Validation(
            "d(x) requires x on the unit sphere".into(),
        ));
    }
    Ok(exposed_face(&s.polar(), x)?.dimension)
}

/// A support set together with everything needed to check it: the
/// exposing face, a relative-interior point of unit norm, and cube
/// directions realizing the face dimension.
#[derive(Clone, Debug)]
pub struct WitnessedSupportSet {
    pub face: FaceDescriptor,
    pub center: RatVector,
    pub directions: Vec<RatVector>,
}

impl WitnessedSupportSet {
    /// All cube corners theta * center + sum of +-directions.
    pub fn corners(&self) -> Vec<RatVector> {
        let m = self.directions.len();
        let mut out = Vec::with_capacity(1 << (m + 1));
        for theta in lp::sign_patterns(m) {
            let mut w = self.center.clone();
            for (d, s) in self.directions.iter().zip(&theta) {
                w = &w + &d.scale(s);
            }
            out.push(-&w);
            out.push(w);
        }
        out
    }
}

/// Checks every invariant of a witnessed support set: direction count
/// and independence, all cube corners exactly on the sphere (tolerance
/// only at smooth leaves), and center +- direction staying in the face.
pub fn verify_witness(s: &SpaceHandle, w: &WitnessedSupportSet) -> Result<()> {
    if w.directions.len() != w.face.dimension {
        return Err(Error::Validation(format!(
            "witness has {} directions for a dim-{} face",
            w.directions.len(),
            w.face.dimension
        )));
    }
    if !w.directions.is_empty()
        && rank(&RatMatrix::from_rows(&w.directions)) != w.directions.len()
    {
        return Err(Error::Validation(
            "witness directions are linearly dependent".into(),
        ));
    }
    let h = &w.face.functional;
    if h.dot(&w.center) != Rational::one() {
        return Err(Error::Validation("witness center not on the face".into()));
    }
    for corner in w.corners() {
        if !s.is_unit(&corner)? {
            return Err(Error::Validation(format!(
                "cube corner off the unit sphere: {corner:?}"
            )));
        }
    }
    for d in &w.directions {
        for pt in [&w.center + d, &w.center - d] {
            if h.dot(&pt) != Rational::one() || !s.is_unit(&pt)? {
                return Err(Error::Validation(
                    "center +- direction leaves the face".into(),
                ));
            }
        }
    }
    Ok(())
}

struct WitnessParts {
    f: usize,
    center: RatVector,
    directions: Vec<RatVector>,
    functional: RatVector,
}

/// f(S): the maximal dimension of a support set of B(S), plus a witness
/// achieving it. Compositional rules for sums and scalings, facet route
/// for polytopal leaves and intersections, any boundary point for smooth
/// leaves. The witness is verified before it is returned.
pub fn compute_f(s: &SpaceHandle) -> Result<(usize, WitnessedSupportSet)> {
    let parts = f_rec(&s.body)?;
    let face = exposed_face(s, &parts.functional)?;
    if face.dimension != parts.f {
        return Err(Error::Internal(format!(
            "witnessed face has dimension {} but f = {}",
            face.dimension, parts.f
        )));
    }
    let witness = WitnessedSupportSet {
        face,
        center: parts.center,
        directions: parts.directions,
    };
    verify_witness(s, &witness)
        .map_err(|e| Error::Internal(format!("witness verification failed: {e}")))?;
    Ok((parts.f, witness))
}

fn f_rec(body: &BodyExpr) -> Result<WitnessParts> {
    match body {
        BodyExpr::PBall { dim, p } if !p.is_polytopal() => Ok(WitnessParts {
            f: 0,
            center: RatVector::unit(*dim, 0),
            directions: Vec::new(),
            functional: RatVector::unit(*dim, 0),
        }),
        BodyExpr::PolytopeV(_)
        | BodyExpr::PolytopeH(_)
        | BodyExpr::PBall { .. }
        | BodyExpr::IntersectPoly(_) => facet_witness(body),
        BodyExpr::SumInf(parts) => {
            let dims: Vec<usize> = parts.iter().map(|p| p.dim()).collect();
            let total: usize = dims.iter().sum();
            let subs: Vec<WitnessParts> =
                parts.iter().map(f_rec).collect::<Result<_>>()?;
            // Pick the part whose witness, extended by full boxes in all
            // other parts, gives the largest dimension.
            let score =
                |i: usize| subs[i].f + total - dims[i];
            let best = (0..parts.len())
                .max_by(|&a, &b| score(a).cmp(&score(b)).then(b.cmp(&a)))
                .expect("nonempty parts");
            let offset: usize = dims[..best].iter().sum();
            let mut directions: Vec<RatVector> = subs[best]
                .directions
                .iter()
                .map(|d| d.embed(total, offset))
                .collect();
            let mut off = 0;
            for (j, part) in parts.iter().enumerate() {
                if j != best {
                    directions.extend(box_fill_directions(part, total, off)?);
                }
                off += dims[j];
            }
            Ok(WitnessParts {
                f: score(best),
                center: subs[best].center.embed(total, offset),
                directions,
                functional: subs[best].functional.embed(total, offset),
            })
        }
        BodyExpr::SumOne(parts) => {
            let subs: Vec<WitnessParts> =
                parts.iter().map(f_rec).collect::<Result<_>>()?;
            let dims: Vec<usize> = parts.iter().map(|p| p.dim()).collect();
            let mut acc = WitnessParts {
                f: subs[0].f,
                center: subs[0].center.clone(),
                directions: subs[0].directions.clone(),
                functional: subs[0].functional.clone(),
            };
            let mut acc_dim = dims[0];
            for (j, sub) in subs.iter().enumerate().skip(1) {
                acc = combine_sum_one(&acc, acc_dim, sub, dims[j]);
                acc_dim += dims[j];
            }
            Ok(acc)
        }
        BodyExpr::Scale(c, inner) => {
            let sub = f_rec(inner)?;
            Ok(WitnessParts {
                f: sub.f,
                center: sub.center.scale(c),
                directions: sub.directions.iter().map(|d| d.scale(c)).collect(),
                functional: sub.functional.scale(&c.recip()),
            })
        }
    }
}

/// Witness for a polytopal body: take the first canonical facet, center
/// at the vertex centroid, directions from an affine basis, scaled by
/// the largest exact cube that still fits (an LP).
fn facet_witness(body: &BodyExpr) -> Result<WitnessParts> {
    let dim = body.dim();
    let mat = materialize_expr(body)?;
    let h = mat.facets[0].clone();
    let verts = mat.facet_vertices(&h);
    let count = Rational::from_integer(BigInt::from(verts.len() as i64));
    let mut center = RatVector::zeros(dim);
    for v in &verts {
        center = &center + v;
    }
    center = center.scale(&count.recip());
    let diffs: Vec<RatVector> = verts.iter().skip(1).map(|v| v - &verts[0]).collect();
    let basis = independent_subset(&diffs);
    if basis.len() != dim - 1 {
        return Err(Error::Internal(format!(
            "facet affine basis has {} directions in dim {}",
            basis.len(),
            dim
        )));
    }
    let s = lp::max_cube_scale(FaceMembership::CarrierFacets(&mat.facets), &center, &basis)?;
    Ok(WitnessParts {
        f: dim - 1,
        center,
        directions: basis.iter().map(|d| d.scale(&s)).collect(),
        functional: h,
    })
}

/// Directions filling a whole part ball inside a product: scaled basis
/// vectors whose box combinations stay inside the part ball. Needs every
/// basis-vector norm to be exactly rational, which holds across the
/// whole expression grammar.
fn box_fill_directions(
    part: &BodyExpr,
    total: usize,
    offset: usize,
) -> Result<Vec<RatVector>> {
    let d = part.dim();
    let count = Rational::from_integer(BigInt::from(d as i64));
    let mut out = Vec::with_capacity(d);
    for l in 0..d {
        let e = RatVector::unit(d, l);
        let n = norm_expr(part, &e)?;
        let n = n.as_rational().ok_or_else(|| {
            Error::Unsupported("basis vector norm is not exactly rational".into())
        })?;
        out.push(e.scale(&(n * &count).recip()).embed(total, offset));
    }
    Ok(out)
}

/// Combines two support-set witnesses across a SumOne: the face becomes
/// conv(F1 u F2), the center the midpoint, and the directions the two
/// halves' directions plus one mixing direction, all at the exact scale
/// 1/2 that keeps every cube corner inside the hull face.
fn combine_sum_one(
    a: &WitnessParts,
    a_dim: usize,
    b: &WitnessParts,
    b_dim: usize,
) -> WitnessParts {
    let total = a_dim + b_dim;
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    let quarter = Rational::new(BigInt::one(), BigInt::from(4));
    let ca = a.center.embed(total, 0);
    let cb = b.center.embed(total, a_dim);
    let center = (&ca + &cb).scale(&half);
    let mut directions = Vec::with_capacity(a.f + b.f + 1);
    for d in &a.directions {
        directions.push(d.embed(total, 0).scale(&quarter));
    }
    for d in &b.directions {
        directions.push(d.embed(total, a_dim).scale(&quarter));
    }
    directions.push((&ca - &cb).scale(&quarter));
    WitnessParts {
        f: a.f + b.f + 1,
        center,
        directions,
        functional: RatVector::concat(&[&a.functional, &b.functional]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{rat, rat_int};

    fn rv(xs: &[i64]) -> RatVector {
        RatVector::from_i64(xs)
    }

    #[test]
    fn l1_and_linf_norms() {
        let l1 = space(l1_ball(3)).unwrap();
        let li = space(linf_ball(3)).unwrap();
        let v = rv(&[1, -2, 3]);
        assert_eq!(l1.norm(&v).unwrap().as_rational().unwrap(), &rat_int(6));
        assert_eq!(li.norm(&v).unwrap().as_rational().unwrap(), &rat_int(3));
        assert_eq!(
            l1.norm(&RatVector::zeros(3)).unwrap().as_rational().unwrap(),
            &rat_int(0)
        );
    }

    #[test]
    fn norm_symmetry() {
        let s = space(BodyExpr::SumOne(vec![l2_ball(2), l1_ball(2)])).unwrap();
        let v = RatVector::new(vec![rat(3, 4), rat(-1, 3), rat_int(2), rat(1, 7)]);
        let a = s.norm(&v).unwrap().to_f64();
        let b = s.norm(&-&v).unwrap().to_f64();
        assert_eq!(a, b);
    }

    #[test]
    fn euclidean_norm_exact_on_perfect_squares() {
        let s = space(l2_ball(2)).unwrap();
        let v = RatVector::new(vec![rat(3, 5), rat(4, 5)]);
        assert_eq!(s.norm(&v).unwrap().as_rational().unwrap(), &rat_int(1));
        assert!(s.is_unit(&v).unwrap());
        let w = rv(&[1, 1]);
        assert!(!s.norm(&w).unwrap().is_exact() || s.norm(&w).unwrap().as_rational().is_none());
        assert!((s.norm(&w).unwrap().to_f64() - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn validation_rejects_bad_bodies() {
        // Asymmetric vertex set.
        let bad = BodyExpr::PolytopeV(vec![rv(&[1, 0]), rv(&[-1, 0]), rv(&[0, 1])]);
        assert!(matches!(space(bad), Err(Error::Validation(_))));
        // Not full-dimensional.
        let flat = BodyExpr::PolytopeV(vec![rv(&[1, 0]), rv(&[-1, 0])]);
        assert!(space(flat).is_err());
        // Unbounded H-body.
        let open = BodyExpr::PolytopeH(vec![rv(&[1, 0]), rv(&[-1, 0])]);
        assert!(space(open).is_err());
        // Bad exponent.
        assert!(space(pball(2, PExponent::Other(rat(1, 2)))).is_err());
        // Smooth part in an intersection.
        assert!(space(BodyExpr::IntersectPoly(vec![l2_ball(2)])).is_err());
    }

    #[test]
    fn polar_swaps_cube_and_cross_polytope() {
        let li = space(linf_ball(3)).unwrap();
        let polar = li.polar();
        let m = polar.materialize().unwrap();
        let expect = space(l1_ball(3)).unwrap();
        assert_eq!(*m, *expect.materialize().unwrap());
    }

    #[test]
    fn polar_of_sums() {
        let s = space(BodyExpr::SumOne(vec![l2_ball(2), l2_ball(2)])).unwrap();
        match s.polar().body() {
            BodyExpr::SumInf(parts) => {
                assert_eq!(parts.len(), 2);
                assert!(matches!(
                    parts[0],
                    BodyExpr::PBall { p: PExponent::Two, .. }
                ));
            }
            other => panic!("unexpected polar {other:?}"),
        }
    }

    #[test]
    fn bipolar_vertex_sets_match() {
        let pts = vec![rv(&[2, 1]), rv(&[-2, -1]), rv(&[0, 1]), rv(&[0, -1]), rv(&[1, 1]), rv(&[-1, -1])];
        let s = space(BodyExpr::PolytopeV(pts)).unwrap();
        let bipolar = s.polar().polar();
        assert_eq!(
            s.materialize().unwrap().vertices,
            bipolar.materialize().unwrap().vertices
        );
    }

    #[test]
    fn materialize_prism_over_rotated_square() {
        let s = space(BodyExpr::SumInf(vec![l1_ball(2), l1_ball(1)])).unwrap();
        let m = s.materialize().unwrap();
        assert_eq!(m.vertices.len(), 8);
        assert_eq!(m.facets.len(), 6);
    }

    #[test]
    fn materialize_canonicalizes_redundant_points() {
        // The origin-ish interior point and a duplicated vertex must
        // disappear from the canonical V-representation.
        let pts = vec![
            rv(&[1, 0]),
            rv(&[-1, 0]),
            rv(&[0, 1]),
            rv(&[0, -1]),
            rv(&[0, 0]),
            rv(&[1, 0]),
        ];
        let s = space(BodyExpr::PolytopeV(pts)).unwrap();
        let m = s.materialize().unwrap();
        assert_eq!(m.vertices.len(), 4);
        assert_eq!(m.facets.len(), 4);
        // The gauge of any nonzero v puts v / gauge on the boundary.
        let v = rv(&[3, 5]);
        let g = s.norm(&v).unwrap().as_rational().unwrap().clone();
        let boundary = v.scale(&g.recip());
        let vals: Vec<Rational> = m.facets.iter().map(|f| f.dot(&boundary)).collect();
        assert!(vals.iter().all(|x| x <= &rat_int(1)));
        assert!(vals.iter().any(|x| x == &rat_int(1)));
    }

    #[test]
    fn remark_body_geometry() {
        // intersection of (11/10) B(l1^3) with B(linf^3): each of the six
        // cross-polytope tips is truncated by a cube facet, leaving four
        // vertices per tip. The unit basis vectors sit at the centers of
        // the little square faces, on the sphere but not extreme.
        let body = BodyExpr::IntersectPoly(vec![
            BodyExpr::Scale(rat(11, 10), Box::new(l1_ball(3))),
            linf_ball(3),
        ]);
        let s = space(body).unwrap();
        let m = s.materialize().unwrap();
        assert_eq!(m.vertices.len(), 24);
        assert_eq!(m.facets.len(), 14);
        assert!(m
            .vertices
            .contains(&RatVector::new(vec![rat_int(1), rat(1, 10), rat_int(0)])));
        for i in 0..3 {
            let e = RatVector::unit(3, i);
            assert!(s.is_unit(&e).unwrap());
            assert!(!m.vertices.contains(&e));
            let face = exposed_face(&s, &e).unwrap();
            assert_eq!(face.dimension, 2);
        }
        // Centrally symmetric.
        for v in &m.vertices {
            assert!(m.vertices.contains(&-v));
        }
    }

    #[test]
    fn exposed_faces_of_cube_and_cross_polytope() {
        let cube = space(linf_ball(3)).unwrap();
        let f = exposed_face(&cube, &rv(&[1, 0, 0])).unwrap();
        assert_eq!(f.dimension, 2);
        assert_eq!(f.vertices.len(), 4);
        let corner = exposed_face(&cube, &rv(&[1, 1, 1])).unwrap();
        assert_eq!(corner.dimension, 0);
        assert_eq!(corner.vertices, vec![rv(&[1, 1, 1])]);
        let cross = space(l1_ball(3)).unwrap();
        let facet = exposed_face(&cross, &rv(&[1, 1, 1])).unwrap();
        assert_eq!(facet.dimension, 2);
        assert_eq!(facet.vertices.len(), 3);
    }

    #[test]
    fn compute_f_basic_cases() {
        let (f, _) = compute_f(&space(linf_ball(3)).unwrap()).unwrap();
        assert_eq!(f, 2);
        let (f, w) = compute_f(&space(l2_ball(2)).unwrap()).unwrap();
        assert_eq!(f, 0);
        assert!(w.directions.is_empty());
    }

    #[test]
    fn compute_f_sum_rules() {
        let s1 = space(BodyExpr::SumOne(vec![l2_ball(2), l2_ball(2)])).unwrap();
        assert_eq!(compute_f(&s1).unwrap().0, 1);
        let s2 = space(BodyExpr::SumInf(vec![l2_ball(2), l2_ball(2)])).unwrap();
        assert_eq!(compute_f(&s2).unwrap().0, 2);
    }

    #[test]
    fn compute_d_cases() {
        let l1 = space(l1_ball(3)).unwrap();
        assert_eq!(compute_d(&l1, &rv(&[1, 0, 0])).unwrap(), 2);
        let l2 = space(l2_ball(2)).unwrap();
        assert_eq!(
            compute_d(&l2, &RatVector::new(vec![rat(3, 5), rat(4, 5)])).unwrap(),
            0
        );
        let li = space(linf_ball(2)).unwrap();
        assert_eq!(compute_d(&li, &rv(&[1, 1])).unwrap(), 1);
        // Not on the sphere.
        assert!(compute_d(&li, &rv(&[2, 0])).is_err());
    }

    #[test]
    fn duality_inequality_with_attainment() {
        let pts = vec![rv(&[1, 2]), rv(&[-1, -2]), rv(&[1, 0]), rv(&[-1, 0])];
        let s = space(BodyExpr::PolytopeV(pts)).unwrap();
        let polar = s.polar();
        let pm = polar.materialize().unwrap();
        let v = rv(&[1, 1]);
        let nv = s.norm(&v).unwrap().as_rational().unwrap().clone();
        let mut attained = false;
        for w in &pm.vertices {
            let lhs = v.dot(w).abs();
            let rhs = &nv * polar.norm(w).unwrap().as_rational().unwrap();
            assert!(lhs <= rhs);
            if lhs == rhs {
                attained = true;
            }
        }
        assert!(attained);
    }
}
