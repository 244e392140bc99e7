//! Deciding norm-preserving extendability. A polytopal space embeds
//! isometrically into a finite sup-norm space through its facet
//! functionals; because that target is injective, the minimum extension
//! norm over it equals the worst case over all superspaces, so an exact
//! LP decides the extension property outright. On top of the decision
//! procedure sit the necessary-condition verifier, the rank bound from
//! the support-set invariants, and the constructive existence proof for
//! rank-k operators, which emits a finite atomic certificate that can be
//! checked independently.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::bodies::{
    compute_d, compute_f, exposed_face, BodyExpr, Space, Val,
    SMOOTH_NORM_BAND,
};
use crate::exactnum::{rank, RatMatrix, RatVector, Rational};
use crate::lp::{self, LpProblem, LpResult};
use crate::operators::{op_norm, LinOperator};
use crate::{Error, Result};

/// Certificate-norm tolerance on smooth codomains.
pub const CERT_NORM_BAND: f64 = 1e-9;

/// The isometric embedding of a polytopal space into l_inf^N: one
/// functional per antipodal facet pair of its unit ball, i.e. per
/// antipodal vertex pair of the polar ball.
#[derive(Clone, Debug)]
pub struct LinfEmbedding {
    pub functionals: Vec<RatVector>,
}

impl LinfEmbedding {
    pub fn count(&self) -> usize {
        self.functionals.len()
    }

    /// N x dim(X) matrix whose rows are the embedding functionals.
    pub fn matrix(&self) -> RatMatrix {
        RatMatrix::from_rows(&self.functionals)
    }

    pub fn apply(&self, x: &RatVector) -> RatVector {
        RatVector::new(self.functionals.iter().map(|g| g.dot(x)).collect())
    }
}

/// Canonical representative of an antipodal pair: the lexicographically
/// larger of v and -v.
fn antipodal_reps(vertices: &[RatVector]) -> Vec<RatVector> {
    let mut reps: Vec<RatVector> = Vec::new();
    for v in vertices {
        let neg = -v;
        let rep = if *v > neg { v.clone() } else { neg };
        if !reps.contains(&rep) {
            reps.push(rep);
        }
    }
    reps
}

/// Embeds a polytopal space isometrically into the sup-norm space of
/// its facet-pair evaluations. The isometry max_i |g_i(x)| = ||x|| is
/// verified on the standard basis and on seeded random rational points.
pub fn embed_linf(x: &Space) -> Result<LinfEmbedding> {
    if !x.is_polytopal() {
        return Err(Error::Unsupported(
            "l_inf embedding needs a polytopal space".into(),
        ));
    }
    let polar = x.polar();
    let functionals = antipodal_reps(&polar.materialize()?.vertices);
    let emb = LinfEmbedding { functionals };

    let check = |v: &RatVector| -> Result<()> {
        let image_norm = emb
            .apply(v)
            .entries()
            .iter()
            .map(|e| e.abs())
            .max()
            .unwrap_or_else(Rational::zero);
        let norm = x.norm(v)?;
        match norm.as_rational() {
            Some(r) if *r == image_norm => Ok(()),
            _ => Err(Error::Internal(format!(
                "embedding is not isometric at {v:?}"
            ))),
        }
    };
    for i in 0..x.dim() {
        check(&RatVector::unit(x.dim(), i))?;
    }
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..100 {
        let v = RatVector::new(
            (0..x.dim())
                .map(|_| {
                    Rational::new(
                        BigInt::from(rng.gen_range(-100i64..=100)),
                        BigInt::from(rng.gen_range(1i64..=20)),
                    )
                })
                .collect(),
        );
        check(&v)?;
    }
    Ok(emb)
}

/// Exact minimum over all extensions of T through the sup-norm embedding
/// of its domain; by injectivity of the finite sup-norm space this is
/// the worst-case extension norm over every superspace. Returns the
/// optimal value together with an optimal extension matrix.
///
/// The LP minimizes t subject to Ext . J = T and, for every vertex y* of
/// the polar codomain ball, sum_j |(y*^T Ext)_j| <= t. The absolute-value
/// constraints are enforced lazily as sign-pattern cuts: each round adds
/// the most violated linearization until the exact norm of the current
/// extension is within t, which certifies optimality.
pub fn min_extension_norm(t: &LinOperator) -> Result<(Rational, RatMatrix, LinfEmbedding)> {
    if !t.domain.is_polytopal() || !t.codomain.is_polytopal() {
        return Err(Error::Unsupported(
            "exact extension norm needs polytopal domain and codomain".into(),
        ));
    }
    let emb = embed_linf(&t.domain)?;
    let n = emb.count();
    let dim_x = t.domain.dim();
    let dim_y = t.codomain.dim();
    let duals = antipodal_reps(&t.codomain.polar().materialize()?.vertices);

    // Variables: Ext row-major (dim_y * n), then t.
    let nvars = dim_y * n + 1;
    let tvar = dim_y * n;
    let jmat = emb.matrix();
    let base_problem = || {
        let mut obj = RatVector::zeros(nvars);
        obj.set(tvar, Rational::one());
        let mut prob = LpProblem::minimize(obj);
        let mut trow = RatVector::zeros(nvars);
        trow.set(tvar, Rational::one());
        prob.add_ge(trow, Rational::zero());
        for i in 0..dim_y {
            for k in 0..dim_x {
                let mut row = RatVector::zeros(nvars);
                for l in 0..n {
                    row.set(i * n + l, jmat.get(l, k).clone());
                }
                prob.add_eq(row, t.matrix.get(i, k).clone());
            }
        }
        prob
    };

    let extract = |point: &RatVector| -> RatMatrix {
        let mut ext = RatMatrix::zeros(dim_y, n);
        for i in 0..dim_y {
            for l in 0..n {
                ext.set(i, l, point.get(i * n + l).clone());
            }
        }
        ext
    };

    let (mut value, mut point, mut solver) = match lp::IncrementalLp::new(base_problem()) {
        Ok(triple) => triple,
        Err(outcome) => {
            return Err(Error::Internal(format!(
                "extension-norm LP not optimal: {outcome:?}"
            )))
        }
    };

    // Sign-pattern cuts enter lazily: each round adds, for every polar
    // vertex whose l1 image norm exceeds t, the linearization along the
    // current signs, and the tableau re-optimizes by dual simplex. At
    // termination the separation pass has certified the extension
    // feasible at the relaxation optimum, which makes it optimal for
    // the full problem.
    let mut rounds = 0usize;
    loop {
        rounds += 1;
        if rounds > 10_000 {
            return Err(Error::Internal(
                "extension-norm LP did not converge".into(),
            ));
        }
        let ext = extract(&point);
        if std::env::var("HBOPS_LP_TRACE").is_ok() {
            eprintln!(
                "cut round {rounds}: value {}",
                crate::exactnum::rational_to_f64(&value)
            );
        }
        let mut violated = false;
        for ys in &duals {
            // z = y*^T Ext
            let z = ext.transpose().mul_vec(ys);
            let norm1 = z.abs_sum();
            if norm1 > value {
                violated = true;
                let mut row = RatVector::zeros(nvars);
                for l in 0..n {
                    let sgn = if z.get(l).is_negative() {
                        -Rational::one()
                    } else {
                        Rational::one()
                    };
                    for i in 0..dim_y {
                        row.set(i * n + l, ys.get(i) * &sgn);
                    }
                }
                row.set(tvar, -Rational::one());
                let (v2, p2) = solver.add_cut(row, Rational::zero())?;
                value = v2;
                point = p2;
            }
        }
        if !violated {
            return Ok((value, ext, emb));
        }
    }
}

/// Outcome of the extension-property decision.
#[derive(Clone, Debug)]
pub enum HbVerdict {
    /// Extends to every superspace at its own norm; carries the optimal
    /// extension over the sup-norm embedding.
    IsHb {
        extension: RatMatrix,
        embedding: LinfEmbedding,
    },
    /// The exact minimum extension norm strictly exceeds ||T||.
    NotHb {
        operator_norm: Rational,
        min_extension_norm: Rational,
    },
    /// Smooth leaves present: only a net-discretized bound is available.
    LowerBoundOnly { bound: f64, net_size: usize },
}

impl HbVerdict {
    pub fn is_hb(&self) -> bool {
        matches!(self, HbVerdict::IsHb { .. })
    }
}

/// Decides the extension property. Exact for polytopal domain and
/// codomain (rational comparison, no tolerance); anything with smooth
/// leaves degrades to a lower-bound report and never claims a negative.
pub fn is_hahn_banach(t: &LinOperator) -> Result<HbVerdict> {
    if t.domain.is_polytopal() && t.codomain.is_polytopal() {
        let report = op_norm(t)?;
        let tnorm = report
            .value
            .as_rational()
            .ok_or_else(|| Error::Internal("polytopal norm must be rational".into()))?
            .clone();
        let (min_ext, extension, embedding) = min_extension_norm(t)?;
        if min_ext == tnorm {
            // Sanity: the extension restricted to the embedded domain
            // must reproduce T exactly.
            let restricted = extension.mul_mat(&embedding.matrix());
            if restricted != t.matrix {
                return Err(Error::Internal(
                    "optimal extension does not restrict to T".into(),
                ));
            }
            return Ok(HbVerdict::IsHb {
                extension,
                embedding,
            });
        }
        if min_ext < tnorm {
            return Err(Error::Internal(
                "extension norm below the operator norm".into(),
            ));
        }
        return Ok(HbVerdict::NotHb {
            operator_norm: tnorm,
            min_extension_norm: min_ext,
        });
    }
    let net = 16 * t.domain.dim().max(t.codomain.dim());
    Ok(HbVerdict::LowerBoundOnly {
        bound: hb_lower_bound(t, net)?,
        net_size: net,
    })
}

/// Rational point exactly on the Euclidean unit circle near angle a,
/// via the half-angle parametrization with a dyadic parameter.
fn circle_point(a: f64) -> RatVector {
    let t = (a / 2.0).tan();
    // Small denominators keep the exact LP coefficients short.
    let denom = 1i64 << 10;
    let tr = Rational::new(BigInt::from((t * denom as f64).round() as i64), BigInt::from(denom));
    let one = Rational::one();
    let d = &one + &(&tr * &tr);
    RatVector::new(vec![(&one - &(&tr * &tr)) / &d, (&tr + &tr) / &d])
}

/// Rational points exactly on the Euclidean unit sphere via inverse
/// stereographic projection of a deterministic rational grid.
fn sphere_points(dim: usize, count: usize) -> Vec<RatVector> {
    if dim == 2 {
        return (0..count)
            .map(|k| circle_point(std::f64::consts::PI * k as f64 / count as f64))
            .collect();
    }
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xd15c);
    let mut out = Vec::with_capacity(count);
    // Include the poles and basis directions first so small nets span.
    for i in 0..dim.min(count) {
        out.push(RatVector::unit(dim, i));
    }
    while out.len() < count {
        let a = RatVector::new(
            (0..dim - 1)
                .map(|_| {
                    Rational::new(
                        BigInt::from(rng.gen_range(-8i64..=8)),
                        BigInt::from(rng.gen_range(1i64..=8)),
                    )
                })
                .collect(),
        );
        let s = a.sq_sum();
        let one = Rational::one();
        let d = &one + &s;
        let mut coords: Vec<Rational> =
            a.entries().iter().map(|ai| (ai + ai) / &d).collect();
        coords.push((&one - &s) / &d);
        let p = RatVector::new(coords);
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

/// Scales a functional exactly into the dual unit ball: the largest
/// rational multiple c * g with c^2 ||g||^2 <= 1 certifiable exactly,
/// shrinking a float estimate until the exact check passes.
fn into_dual_ball(xstar: &Space, g: &RatVector) -> Result<RatVector> {
    let norm = xstar.norm(g)?;
    if let Some(r) = norm.as_rational() {
        return Ok(g.scale(&r.recip()));
    }
    let nf = norm.to_f64();
    let denom = 1i64 << 16;
    let mut c = Rational::new(
        BigInt::from(((1.0 / nf) * denom as f64).floor() as i64),
        BigInt::from(denom),
    );
    let shrink = Rational::new(BigInt::from((1i64 << 12) - 1), BigInt::from(1i64 << 12));
    for _ in 0..128 {
        let scaled = g.scale(&c);
        let cmp = xstar.norm(&scaled)?.cmp_rat(&Rational::one(), 0.0);
        if cmp != Ordering::Greater {
            return Ok(scaled);
        }
        c *= &shrink;
    }
    Err(Error::Internal("could not scale functional into the dual ball".into()))
}

/// Polytopal inner discretization of a space: the norm whose unit ball
/// is cut out by +-(net functionals), each certified to lie in the dual
/// ball, so the polytopal ball contains the original one.
/// Public for diagnostics and tests.
pub fn net_space_public(s: &Space, net_size: usize) -> Result<Space> {
    net_space(s, net_size)
}

fn net_space(s: &Space, net_size: usize) -> Result<Space> {
    if s.is_polytopal() {
        return Ok(s.clone());
    }
    if net_size < s.dim() {
        return Err(Error::Validation(format!(
            "net of {net_size} directions cannot span dimension {}",
            s.dim()
        )));
    }
    let dual = s.polar();
    let mut normals = Vec::new();
    for g in sphere_points(s.dim(), net_size) {
        let scaled = into_dual_ball(&dual, &g)?;
        normals.push(scaled.clone());
        normals.push(-&scaled);
    }
    if rank(&RatMatrix::from_rows(&normals)) < s.dim() {
        return Err(Error::Validation("net too small to span".into()));
    }
    crate::bodies::space(BodyExpr::PolytopeH(normals))
}

/// Finite relaxation of the extension-property quantifier for smooth
/// domains: both spaces are replaced by polytopal net discretizations
/// whose balls contain the originals, and the exact LP runs on the
/// discretized pair. The result underestimates the limiting extension
/// norm and is nondecreasing under nested net refinement.
pub fn hb_lower_bound(t: &LinOperator, net_size: usize) -> Result<f64> {
    let xn = net_space(&t.domain, net_size)?;
    let yn = net_space(&t.codomain, net_size)?;
    let tn = LinOperator::new(t.matrix.clone(), xn, yn)?;
    let (value, _, _) = min_extension_norm(&tn)?;
    Ok(crate::exactnum::rational_to_f64(&value))
}

/// Per-attainment-point entry of the necessary-condition check.
#[derive(Clone, Debug)]
pub struct Theorem1Entry {
    pub point: RatVector,
    pub image: RatVector,
    pub d_x0: usize,
    pub max_support_dim: usize,
    pub required: i64,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct Theorem1Report {
    pub rank: usize,
    pub entries: Vec<Theorem1Entry>,
    pub all_pass: bool,
    /// Attainment representatives are vertices and attainment-face
    /// centroids; non-centroid interior points are represented by their
    /// face's centroid.
    pub note: &'static str,
}

/// Checks the necessary condition: at every norm-attainment point x0 of
/// a norm-one operator, T x0 must lie in a support set of the codomain
/// ball of dimension at least rank - 1 - d(x0).
pub fn theorem1_verify(t: &LinOperator) -> Result<Theorem1Report> {
    if !t.domain.is_polytopal() || !t.codomain.is_polytopal() {
        return Err(Error::Unsupported(
            "the exact necessary-condition check needs polytopal spaces".into(),
        ));
    }
    let report = op_norm(t)?;
    if report.value.cmp_rat(&Rational::one(), 0.0) != Ordering::Equal {
        return Err(Error::Validation(format!(
            "operator norm must be exactly 1, got {:?}; rescale first",
            report.value
        )));
    }
    let k = t.rank();
    let ymat = t.codomain.materialize()?;
    let mut entries = Vec::new();
    for x0 in &report.attainment_points {
        let d = compute_d(&t.domain, x0)?;
        let image = t.apply(x0);
        let mut max_support_dim: Option<usize> = None;
        for g in &ymat.facets {
            if g.dot(&image) == Rational::one() {
                let dim = exposed_face(&t.codomain, g)?.dimension;
                max_support_dim = Some(max_support_dim.map_or(dim, |m| m.max(dim)));
            }
        }
        let max_support_dim = max_support_dim.ok_or_else(|| {
            Error::Internal("attainment image is not on the codomain sphere".into())
        })?;
        let required = k as i64 - 1 - d as i64;
        entries.push(Theorem1Entry {
            point: x0.clone(),
            image,
            d_x0: d,
            max_support_dim,
            required,
            pass: max_support_dim as i64 >= required,
        });
    }
    Ok(Theorem1Report {
        rank: k,
        all_pass: entries.iter().all(|e| e.pass),
        entries,
        note: "attainment representatives: vertices and attainment-face centroids",
    })
}

/// Largest rank a norm-preserving-extendable operator between the two
/// spaces can have: min(dim X, dim Y, f(X*) + f(Y) + 1).
pub fn corollary_max_rank(x: &Space, y: &Space) -> Result<usize> {
    let (f_xs, _) = compute_f(&x.polar())?;
    let (f_y, _) = compute_f(y)?;
    Ok(x.dim().min(y.dim()).min(f_xs + f_y + 1))
}

/// A finite atomic-measure representation of an extension of T to the
/// continuous functions on the dual sphere: atoms (point, vector) with
/// the action f -> sum f(point_a) vector_a. Valid when every atom point
/// lies on the dual sphere, the restriction to the domain reproduces T
/// exactly, the sup-norm of the atomic operator is 1, and the claimed
/// rank matches.
#[derive(Clone, Debug)]
pub struct ExtensionCertificate {
    pub atoms: Vec<(RatVector, RatVector)>,
    pub operator: LinOperator,
    pub rank: usize,
}

#[derive(Clone, Debug)]
pub struct CertificateReport {
    pub atoms_on_sphere: bool,
    pub restriction_ok: bool,
    pub norm_value: Val,
    pub norm_ok: bool,
    pub rank_ok: bool,
    pub diagnostics: Vec<String>,
}

impl CertificateReport {
    pub fn valid(&self) -> bool {
        self.atoms_on_sphere && self.restriction_ok && self.norm_ok && self.rank_ok
    }
}

/// Checks all certificate invariants. The operator norm of the atomic
/// extension is computed exactly through the polar vertices for a
/// polytopal codomain and by sign-pattern enumeration (at most 20 atoms)
/// otherwise.
pub fn verify_certificate(cert: &ExtensionCertificate) -> Result<CertificateReport> {
    let x = &cert.operator.domain;
    let y = &cert.operator.codomain;
    let dual = x.polar();
    let mut diagnostics = Vec::new();

    let mut atoms_on_sphere = true;
    for (p, _) in &cert.atoms {
        if !dual.is_unit(p)? {
            atoms_on_sphere = false;
            diagnostics.push(format!("atom point off the dual sphere: {p:?}"));
        }
    }

    let mut sum = RatMatrix::zeros(y.dim(), x.dim());
    for (p, v) in &cert.atoms {
        for i in 0..y.dim() {
            for j in 0..x.dim() {
                let val = sum.get(i, j) + v.get(i) * p.get(j);
                sum.set(i, j, val);
            }
        }
    }
    let restriction_ok = sum == cert.operator.matrix;
    if !restriction_ok {
        diagnostics.push("atomic restriction does not reproduce the operator".into());
    }

    let norm_value = atomic_operator_norm(y, &cert.atoms)?;
    let band = if y.is_polytopal() { 0.0 } else { CERT_NORM_BAND };
    let norm_ok = norm_value.cmp_rat(&Rational::one(), band) == Ordering::Equal;
    if !norm_ok {
        diagnostics.push(format!(
            "atomic operator norm is {:?}, expected 1",
            norm_value
        ));
    }

    let rank_ok = rank(&cert.operator.matrix) == cert.rank;
    if !rank_ok {
        diagnostics.push(format!(
            "rank is {}, certificate claims {}",
            rank(&cert.operator.matrix),
            cert.rank
        ));
    }

    Ok(CertificateReport {
        atoms_on_sphere,
        restriction_ok,
        norm_value,
        norm_ok,
        rank_ok,
        diagnostics,
    })
}

/// sup-norm of the atomic operator f -> sum f(p_a) v_a.
fn atomic_operator_norm(y: &Space, atoms: &[(RatVector, RatVector)]) -> Result<Val> {
    if y.is_polytopal() {
        let duals = antipodal_reps(&y.polar().materialize()?.vertices);
        let mut best = Rational::zero();
        for ys in &duals {
            let s: Rational = atoms.iter().map(|(_, v)| ys.dot(v).abs()).sum();
            best = best.max(s);
        }
        return Ok(Val::Rat(best));
    }
    if atoms.len() > 20 {
        return Err(Error::Unsupported(
            "certificate norm enumeration capped at 20 atoms".into(),
        ));
    }
    let mut best = Val::zero();
    // Sign patterns come in mirror pairs with equal norms.
    for mask in 0..1usize << (atoms.len().saturating_sub(1)) {
        let mut acc = RatVector::zeros(y.dim());
        for (i, (_, v)) in atoms.iter().enumerate() {
            if i > 0 && mask >> (i - 1) & 1 == 1 {
                acc = &acc - v;
            } else {
                acc = &acc + v;
            }
        }
        best = best.max(y.norm(&acc)?, SMOOTH_NORM_BAND);
    }
    Ok(best)
}

/// Runs the constructive existence proof for a rank-k extendable
/// operator between X and Y:
///
/// 1. support-set witnesses with cube configurations in S(Y) and S(X*),
///    split so the dual cube contributes m' = min(f(X*), k-1) directions
///    and the codomain cube n' = k - 1 - m';
/// 2. x0 = the exposing functional of the dual witness, so x0*(x0) = 1
///    and every cube functional annihilates x0;
/// 3. completion of the dual basis annihilating x0, plus its
///    biorthogonal vectors;
/// 4. a first operator from single-direction extensions of the
///    completion functionals, realized as atoms on the dual sphere;
/// 5. a second operator from atomic measures on the dual cube corners
///    with weights +-2^{-m'}, which reproduce the cube functionals by
///    biorthogonality;
/// 6. their average, whose restriction is returned with the atom list
///    as the certificate.
pub fn construct_rank_k(
    x: &Space,
    y: &Space,
    k: usize,
) -> Result<(LinOperator, ExtensionCertificate)> {
    let bound = corollary_max_rank(x, y)?;
    if k < 1 || k > bound {
        return Err(Error::Validation(format!(
            "rank {k} is outside the feasible range 1..={bound} \
             (f(X*) + f(Y) + 1 caps the rank)"
        )));
    }
    let xstar = x.polar();
    let (f_y, wy) = compute_f(y)?;
    let (f_xs, wxs) = compute_f(&xstar)?;

    let m_eff = f_xs.min(k - 1);
    let n_eff = k - 1 - m_eff;
    debug_assert!(n_eff <= f_y);

    let y0 = wy.center.clone();
    let x0s = wxs.center.clone();
    let x_dirs: Vec<RatVector> = wxs.directions[..m_eff].to_vec();
    let x0 = wxs.face.functional.clone();

    // Dual basis: x0*, the cube functionals, then a completion that
    // annihilates x0.
    let mut given = vec![x0s.clone()];
    given.extend(x_dirs.iter().cloned());
    let full = crate::exactnum::complete_basis_annihilating(&x0, &given)?;

    // Codomain directions: cube directions first, then unit-normed
    // completion vectors for any shortfall beyond f(Y).
    let cube_pool: Vec<RatVector> = wy.directions.clone();
    let q1_dirs: Vec<RatVector> = cube_pool[..n_eff].to_vec();
    let cube_left = cube_pool.len() - n_eff;
    let q2_cube = m_eff.min(cube_left);
    let shortfall = m_eff - q2_cube;
    let mut q2_dirs: Vec<RatVector> = cube_pool[n_eff..n_eff + q2_cube].to_vec();
    if shortfall > 0 {
        let mut span: Vec<RatVector> = vec![y0.clone()];
        span.extend(q1_dirs.iter().cloned());
        span.extend(q2_dirs.iter().cloned());
        for i in 0..y.dim() {
            if q2_dirs.len() == m_eff {
                break;
            }
            let e = RatVector::unit(y.dim(), i);
            let mut tentative = span.clone();
            tentative.push(e.clone());
            if rank(&RatMatrix::from_rows(&tentative)) == tentative.len() {
                let nv = y.norm(&e)?;
                let nr = nv.as_rational().ok_or_else(|| {
                    Error::Unsupported("completion vector norm is not rational".into())
                })?;
                let unit = e.scale(&nr.recip());
                span.push(e);
                q2_dirs.push(unit);
            }
        }
        if q2_dirs.len() != m_eff {
            return Err(Error::Internal("could not complete codomain directions".into()));
        }
    }
    // Per-direction coefficients keeping the second operator inside the
    // ball: cube directions take weight 1 by the cube property; the
    // convex split halves everything when completion directions join.
    let alphas: Vec<Rational> = (0..m_eff)
        .map(|i| {
            if shortfall == 0 {
                Rational::one()
            } else if i < q2_cube {
                Rational::new(BigInt::one(), BigInt::from(2))
            } else {
                Rational::new(BigInt::one(), BigInt::from(2 * shortfall as i64))
            }
        })
        .collect();

    let half = Rational::new(BigInt::one(), BigInt::from(2));
    let mut atoms: BTreeMap<RatVector, RatVector> = BTreeMap::new();
    let mut add_atom = |p: RatVector, v: RatVector| {
        let entry = atoms
            .entry(p)
            .or_insert_with(|| RatVector::zeros(v.dim()));
        *entry = &*entry + &v;
    };

    // First operator, scaled by 1/2: the atom at x0* carries y0; each
    // completion functional extends through atoms on the dual sphere.
    add_atom(x0s.clone(), y0.scale(&half));
    let mut formula = outer(&y0, &x0s).scale(&half);
    for (i, yi) in q1_dirs.iter().enumerate() {
        let phi = &full[m_eff + 1 + i];
        let (phi_atoms, total_weight) = functional_atoms(&xstar, phi)?;
        for (p, w) in phi_atoms {
            add_atom(p, yi.scale(&(&w / &total_weight * &half)));
        }
        formula = formula.add(&outer(yi, phi).scale(&(&half / &total_weight)));
    }

    // Second operator, scaled by 1/2: atoms at the dual cube corners.
    let weight = Rational::new(BigInt::one(), BigInt::from(1i64 << m_eff));
    for theta in lp::sign_patterns(m_eff) {
        let mut corner = x0s.clone();
        let mut vector = y0.clone();
        for ((d, s), (alpha, w)) in x_dirs
            .iter()
            .zip(&theta)
            .zip(alphas.iter().zip(&q2_dirs))
        {
            corner = &corner + &d.scale(s);
            vector = &vector + &w.scale(&(s * alpha));
        }
        add_atom(corner, vector.scale(&(&weight * &half)));
    }
    formula = formula.add(&outer(&y0, &x0s).scale(&half));
    for i in 0..m_eff {
        formula = formula.add(&outer(&q2_dirs[i], &full[1 + i]).scale(&(&alphas[i] * &half)));
    }
    // The eq-(5)/(8) coefficient formula and the atom sum must agree.
    let atoms: Vec<(RatVector, RatVector)> = atoms.into_iter().collect();
    let mut atom_sum = RatMatrix::zeros(y.dim(), x.dim());
    for (p, v) in &atoms {
        atom_sum = atom_sum.add(&outer(v, p));
    }
    if atom_sum != formula {
        return Err(Error::Internal(
            "atomic restriction disagrees with the coefficient formula".into(),
        ));
    }

    let operator = LinOperator::new(formula, x.clone(), y.clone())?;
    if operator.rank() != k {
        return Err(Error::Internal(format!(
            "constructed operator has rank {}, wanted {k}",
            operator.rank()
        )));
    }
    if operator.apply(&x0) != y0 {
        return Err(Error::Internal("T x0 != y0 after construction".into()));
    }
    let cert = ExtensionCertificate {
        atoms,
        operator: operator.clone(),
        rank: k,
    };
    let report = verify_certificate(&cert)?;
    if !report.valid() {
        return Err(Error::Internal(format!(
            "constructed certificate fails verification: {:?}",
            report.diagnostics
        )));
    }
    Ok((operator, cert))
}

fn outer(y: &RatVector, phi: &RatVector) -> RatMatrix {
    let mut m = RatMatrix::zeros(y.dim(), phi.dim());
    for i in 0..y.dim() {
        for j in 0..phi.dim() {
            m.set(i, j, y.get(i) * phi.get(j));
        }
    }
    m
}

/// Represents a functional as an atomic measure on the dual sphere:
/// a single atom at phi / ||phi|| when the dual norm is exactly
/// rational (a true norm-preserving extension), otherwise one atom per
/// coordinate direction scaled to the sphere (an extension whose total
/// weight may exceed the dual norm; the caller divides by it).
fn functional_atoms(
    xstar: &Space,
    phi: &RatVector,
) -> Result<(Vec<(RatVector, Rational)>, Rational)> {
    let norm = xstar.norm(phi)?;
    if let Some(r) = norm.as_rational() {
        return Ok((vec![(phi.scale(&r.recip()), r.clone())], r.clone()));
    }
    let mut out = Vec::new();
    let mut total = Rational::zero();
    for (i, c) in phi.entries().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let e = RatVector::unit(phi.dim(), i);
        let n = xstar.norm(&e)?;
        let nr = n.as_rational().ok_or_else(|| {
            Error::Unsupported("basis vector dual norm is not rational".into())
        })?;
        let w = c * nr;
        total += w.abs();
        out.push((e.scale(&nr.recip()), w));
    }
    if out.is_empty() {
        return Err(Error::Validation("cannot represent the zero functional".into()));
    }
    Ok((out, total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::{l1_ball, l2_ball, linf_ball, space};
    use crate::exactnum::{rat, rat_int};

    fn rv(xs: &[i64]) -> RatVector {
        RatVector::from_i64(xs)
    }

    #[test]
    fn embed_linf_of_linf_is_standard_basis() {
        let s = space(linf_ball(3)).unwrap();
        let emb = embed_linf(&s).unwrap();
        assert_eq!(emb.count(), 3);
        for g in &emb.functionals {
            assert_eq!(g.abs_sum(), rat_int(1)); // +-e_i
        }
    }

    #[test]
    fn embed_linf_of_l1_squares() {
        let s = space(l1_ball(2)).unwrap();
        let emb = embed_linf(&s).unwrap();
        assert_eq!(emb.count(), 2);
        assert!(emb.functionals.contains(&rv(&[1, 1])));
        assert!(emb.functionals.contains(&rv(&[1, -1])));
    }

    #[test]
    fn min_extension_of_identity_on_linf() {
        let s = space(linf_ball(3)).unwrap();
        let t = LinOperator::identity(s.clone(), s).unwrap();
        let (v, _, _) = min_extension_norm(&t).unwrap();
        assert_eq!(v, rat_int(1));
    }

    #[test]
    fn rank_one_extends_at_norm() {
        // T = y phi^T from l1^3 to linf^2.
        let dom = space(l1_ball(3)).unwrap();
        let cod = space(linf_ball(2)).unwrap();
        let phi = rv(&[1, -2, 3]);
        let yv = rv(&[2, 1]);
        let m = outer(&yv, &phi);
        let t = LinOperator::new(m, dom, cod).unwrap();
        let (v, _, _) = min_extension_norm(&t).unwrap();
        let norm = op_norm(&t).unwrap().value.as_rational().unwrap().clone();
        assert_eq!(v, norm);
        assert!(is_hahn_banach(&t).unwrap().is_hb());
    }

    #[test]
    fn remark_operator_is_not_extendable() {
        let y = space(BodyExpr::IntersectPoly(vec![
            BodyExpr::Scale(rat(11, 10), Box::new(l1_ball(3))),
            linf_ball(3),
        ]))
        .unwrap();
        let t = LinOperator::identity(space(l1_ball(3)).unwrap(), y).unwrap();
        match is_hahn_banach(&t).unwrap() {
            HbVerdict::NotHb {
                operator_norm,
                min_extension_norm,
            } => {
                assert_eq!(operator_norm, rat_int(1));
                assert!(min_extension_norm > rat_int(1));
            }
            other => panic!("expected NotHb, got {other:?}"),
        }
    }

    #[test]
    fn remark_operator_satisfies_necessary_condition() {
        let y = space(BodyExpr::IntersectPoly(vec![
            BodyExpr::Scale(rat(11, 10), Box::new(l1_ball(3))),
            linf_ball(3),
        ]))
        .unwrap();
        let t = LinOperator::identity(space(l1_ball(3)).unwrap(), y).unwrap();
        let rep = theorem1_verify(&t).unwrap();
        assert_eq!(rep.rank, 3);
        assert!(rep.all_pass);
        assert_eq!(rep.entries.len(), 6);
        for e in &rep.entries {
            assert_eq!(e.d_x0, 2);
            assert_eq!(e.max_support_dim, 2);
            assert_eq!(e.required, 0);
        }
    }

    #[test]
    fn corollary_bounds() {
        let l2_2 = space(l2_ball(2)).unwrap();
        assert_eq!(corollary_max_rank(&l2_2, &l2_2).unwrap(), 1);
        let l1_2 = space(l1_ball(2)).unwrap();
        assert_eq!(corollary_max_rank(&l1_2, &l1_2).unwrap(), 2);
        let l2_4 = space(l2_ball(4)).unwrap();
        let sum = space(BodyExpr::SumInf(vec![l2_ball(2), l2_ball(2)])).unwrap();
        assert_eq!(corollary_max_rank(&l2_4, &sum).unwrap(), 3);
    }

    #[test]
    fn construct_rank_one_euclidean() {
        let s = space(l2_ball(2)).unwrap();
        let (op, cert) = construct_rank_k(&s, &s, 1).unwrap();
        assert_eq!(op.rank(), 1);
        assert_eq!(cert.atoms.len(), 1);
        assert!(verify_certificate(&cert).unwrap().valid());
        assert!(construct_rank_k(&s, &s, 2).is_err());
    }

    #[test]
    fn construct_rank_two_l1_squares() {
        let s = space(l1_ball(2)).unwrap();
        let (op, cert) = construct_rank_k(&s, &s, 2).unwrap();
        assert_eq!(op.rank(), 2);
        assert!(verify_certificate(&cert).unwrap().valid());
        assert!(is_hahn_banach(&op).unwrap().is_hb());
    }

    #[test]
    fn construct_rank_three_mixed() {
        // X = l2^2 sum_1 l2^2 has f(X*) = 2; Y = l2^4 has f(Y) = 0.
        let x = space(BodyExpr::SumOne(vec![l2_ball(2), l2_ball(2)])).unwrap();
        let y = space(l2_ball(4)).unwrap();
        assert_eq!(corollary_max_rank(&x, &y).unwrap(), 3);
        let (op, cert) = construct_rank_k(&x, &y, 3).unwrap();
        assert_eq!(op.rank(), 3);
        let rep = verify_certificate(&cert).unwrap();
        assert!(rep.valid(), "diagnostics: {:?}", rep.diagnostics);
        assert!(construct_rank_k(&x, &y, 4).is_err());
    }

    #[test]
    fn invalid_certificate_detected() {
        let s = space(l2_ball(2)).unwrap();
        let (_, cert) = construct_rank_k(&s, &s, 1).unwrap();
        // Doubling the atom vector breaks the norm invariant.
        let mut bad = cert.clone();
        bad.atoms[0].1 = bad.atoms[0].1.scale(&rat_int(2));
        bad.operator.matrix = bad.operator.matrix.scale(&rat_int(2));
        let rep = verify_certificate(&bad).unwrap();
        assert!(!rep.valid());
        assert!(!rep.norm_ok);
        assert!((rep.norm_value.to_f64() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn lower_bound_on_euclidean_identity_grows() {
        let s = space(l2_ball(2)).unwrap();
        let t = LinOperator::identity(s.clone(), s).unwrap();
        let b8 = hb_lower_bound(&t, 8).unwrap();
        let b32 = hb_lower_bound(&t, 32).unwrap();
        assert!(b8 <= b32 + 1e-12, "b8={b8} b32={b32}");
        assert!(b32 > 1.2, "b32={b32}");
        assert!(b32 < 4.0 / std::f64::consts::PI + 1e-6);
    }

    #[test]
    fn lower_bound_rank_one_stays_at_norm() {
        let s = space(l2_ball(2)).unwrap();
        let m = RatMatrix::from_i64(2, 2, &[1, 0, 0, 0]);
        let t = LinOperator::new(m, s.clone(), s).unwrap();
        let b = hb_lower_bound(&t, 16).unwrap();
        assert!((b - 1.0).abs() < 1e-9, "b={b}");
    }

    #[test]
    fn lower_bound_dim_one() {
        let s = space(l2_ball(1)).unwrap();
        let t = LinOperator::identity(s.clone(), s).unwrap();
        assert!((hb_lower_bound(&t, 4).unwrap() - 1.0).abs() < 1e-12);
    }
}
