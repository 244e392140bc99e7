//! Exact rational linear programming: a dense two-phase simplex over
//! arbitrary-precision rationals, an incremental variant for cutting
//! loops (new rows enter by dual-simplex pivots on the same tableau),
//! and the geometric helpers built on top (affine dimension, cube
//! scaling inside a face).
//!
//! Every `Optimal` result is re-checked before it is returned: the point
//! must satisfy all constraints exactly, and dual multipliers read off
//! the final reduced costs are verified against strong duality.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::exactnum::{rank, RatMatrix, RatVector, Rational};
use crate::{Error, Result};

/// minimize objective . x  subject to  a x <= b  and  e x = f, x free.
#[derive(Clone, Debug)]
pub struct LpProblem {
    objective: RatVector,
    ineq_rows: Vec<RatVector>,
    ineq_rhs: Vec<Rational>,
    eq_rows: Vec<RatVector>,
    eq_rhs: Vec<Rational>,
}

impl LpProblem {
    pub fn minimize(objective: RatVector) -> Self {
        LpProblem {
            objective,
            ineq_rows: Vec::new(),
            ineq_rhs: Vec::new(),
            eq_rows: Vec::new(),
            eq_rhs: Vec::new(),
        }
    }

    pub fn nvars(&self) -> usize {
        self.objective.dim()
    }

    pub fn add_le(&mut self, row: RatVector, rhs: Rational) {
        assert_eq!(row.dim(), self.nvars(), "constraint width mismatch");
        let (row, rhs) = normalize_row(row, rhs);
        self.ineq_rows.push(row);
        self.ineq_rhs.push(rhs);
    }

    pub fn add_ge(&mut self, row: RatVector, rhs: Rational) {
        self.add_le(-&row, -rhs);
    }

    pub fn add_eq(&mut self, row: RatVector, rhs: Rational) {
        assert_eq!(row.dim(), self.nvars(), "constraint width mismatch");
        let (row, rhs) = normalize_row(row, rhs);
        self.eq_rows.push(row);
        self.eq_rhs.push(rhs);
    }

    pub fn num_constraints(&self) -> usize {
        self.ineq_rows.len() + self.eq_rows.len()
    }

    pub fn ineqs(&self) -> impl Iterator<Item = (&RatVector, &Rational)> {
        self.ineq_rows.iter().zip(self.ineq_rhs.iter())
    }

    pub fn eqs(&self) -> impl Iterator<Item = (&RatVector, &Rational)> {
        self.eq_rows.iter().zip(self.eq_rhs.iter())
    }

    fn is_feasible(&self, x: &RatVector) -> bool {
        self.ineqs().all(|(row, rhs)| &row.dot(x) <= rhs)
            && self.eqs().all(|(row, rhs)| &row.dot(x) == rhs)
    }
}

/// Rescales a constraint to integer entries with content 1; keeps the
/// exact simplex coefficients short.
fn normalize_row(row: RatVector, rhs: Rational) -> (RatVector, Rational) {
    let mut lcm = BigInt::from(1);
    for e in row.entries().iter().chain(std::iter::once(&rhs)) {
        lcm = num_integer::lcm(lcm, e.denom().clone());
    }
    let scaled: Vec<BigInt> = row
        .entries()
        .iter()
        .chain(std::iter::once(&rhs))
        .map(|e| e.numer() * (&lcm / e.denom()))
        .collect();
    let mut gcd = BigInt::from(0);
    for s in &scaled {
        gcd = num_integer::gcd(gcd, s.clone());
    }
    if gcd.is_zero() {
        return (row, rhs);
    }
    let n = row.dim();
    let entries: Vec<Rational> = scaled[..n]
        .iter()
        .map(|s| Rational::from_integer(s / &gcd))
        .collect();
    let new_rhs = Rational::from_integer(&scaled[n] / &gcd);
    (RatVector::new(entries), new_rhs)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpResult {
    Optimal { value: Rational, point: RatVector },
    Infeasible,
    Unbounded,
}

impl LpResult {
    pub fn expect_optimal(self, what: &str) -> (Rational, RatVector) {
        match self {
            LpResult::Optimal { value, point } => (value, point),
            other => panic!("{what}: expected optimal LP, got {other:?}"),
        }
    }
}

/// Dense simplex tableau. Free variables are split into differences of
/// nonnegatives: columns are [u_0..u_{n-1}, v_0..v_{n-1}], then one
/// slack per row, then any artificials, then slacks of rows added later.
struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    cost: Vec<Rational>,
    cost_rhs: Rational,
    basis: Vec<usize>,
    enterable: Vec<bool>,
}

impl Tableau {
    fn ncols(&self) -> usize {
        self.cost.len()
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let inv = self.rows[row][col].recip();
        for v in self.rows[row].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        self.rhs[row] *= &inv;
        let pivot_row = self.rows[row].clone();
        let pivot_rhs = self.rhs[row].clone();
        for r in 0..self.rows.len() {
            if r == row || self.rows[r][col].is_zero() {
                continue;
            }
            let factor = self.rows[r][col].clone();
            for (j, v) in self.rows[r].iter_mut().enumerate() {
                if !pivot_row[j].is_zero() {
                    *v -= &factor * &pivot_row[j];
                }
            }
            self.rhs[r] -= &factor * &pivot_rhs;
        }
        if !self.cost[col].is_zero() {
            let factor = self.cost[col].clone();
            for (j, v) in self.cost.iter_mut().enumerate() {
                if !pivot_row[j].is_zero() {
                    *v -= &factor * &pivot_row[j];
                }
            }
            self.cost_rhs -= &factor * &pivot_rhs;
        }
        self.basis[row] = col;
    }

    /// Primal simplex to optimality. Pricing is Dantzig (most negative
    /// reduced cost); after a stretch of pivots without objective
    /// improvement it falls back to Bland's rule, whose anti-cycling
    /// guarantee makes the whole procedure terminate. The ratio test
    /// breaks ties toward the lowest basic variable index.
    /// Returns false when unbounded.
    fn primal_run(&mut self) -> bool {
        const STALL_LIMIT: usize = 40;
        let mut stall = 0usize;
        let mut last_obj = self.cost_rhs.clone();
        loop {
            let ncols = self.ncols();
            let bland = stall >= STALL_LIMIT;
            let entering = if bland {
                (0..ncols).find(|&j| self.enterable[j] && self.cost[j].is_negative())
            } else {
                let mut best: Option<usize> = None;
                for j in 0..ncols {
                    if self.enterable[j]
                        && self.cost[j].is_negative()
                        && best.map_or(true, |b| self.cost[j] < self.cost[b])
                    {
                        best = Some(j);
                    }
                }
                best
            };
            let col = match entering {
                Some(c) => c,
                None => return true,
            };
            let mut best: Option<(Rational, usize, usize)> = None;
            for (r, data) in self.rows.iter().enumerate() {
                if data[col].is_positive() {
                    let ratio = &self.rhs[r] / &data[col];
                    let key = (ratio, self.basis[r], r);
                    if best.as_ref().map_or(true, |b| (&key.0, key.1) < (&b.0, b.1)) {
                        best = Some(key);
                    }
                }
            }
            match best {
                Some((_, _, row)) => self.pivot(row, col),
                None => return false,
            }
            if self.cost_rhs != last_obj {
                last_obj = self.cost_rhs.clone();
                stall = 0;
            } else {
                stall += 1;
            }
        }
    }

    /// Dual simplex: restores primal feasibility while keeping reduced
    /// costs nonnegative; used after appending a violated row. Leaving
    /// row = most negative basic value (lowest index on ties, switching
    /// to pure lowest-index Bland order on long stalls); entering column
    /// minimizes cost_j / -a_rj among negative entries, ties toward the
    /// lowest column index. Returns false when primal-infeasible.
    fn dual_run(&mut self) -> bool {
        const STALL_LIMIT: usize = 40;
        let mut stall = 0usize;
        let mut last_obj = self.cost_rhs.clone();
        loop {
            let bland = stall >= STALL_LIMIT;
            let leaving = if bland {
                (0..self.rows.len()).find(|&r| self.rhs[r].is_negative())
            } else {
                let mut best: Option<usize> = None;
                for r in 0..self.rows.len() {
                    if self.rhs[r].is_negative()
                        && best.map_or(true, |b| self.rhs[r] < self.rhs[b])
                    {
                        best = Some(r);
                    }
                }
                best
            };
            let row = match leaving {
                Some(r) => r,
                None => return true,
            };
            let mut best: Option<(Rational, usize)> = None;
            for j in 0..self.ncols() {
                if self.enterable[j] && self.rows[row][j].is_negative() {
                    let ratio = &self.cost[j] / &(-&self.rows[row][j]);
                    let key = (ratio, j);
                    if best.as_ref().map_or(true, |b| (&key.0, key.1) < (&b.0, b.1)) {
                        best = Some(key);
                    }
                }
            }
            match best {
                Some((_, col)) => self.pivot(row, col),
                None => return false,
            }
            if self.cost_rhs != last_obj {
                last_obj = self.cost_rhs.clone();
                stall = 0;
            } else {
                stall += 1;
            }
        }
    }
}

/// A solved LP that accepts additional <= rows, re-optimizing by dual
/// simplex on the same tableau. The workhorse behind cutting-plane
/// loops, where re-solving from scratch would repeat all the work.
pub struct IncrementalLp {
    prob: LpProblem,
    t: Tableau,
    nu: usize,
    /// All constraint rows in tableau order, as <= rows.
    std_rows: Vec<RatVector>,
    std_rhs: Vec<Rational>,
    /// Slack column of each tableau row.
    slack_cols: Vec<usize>,
}

impl IncrementalLp {
    /// Solves the base problem. Only `Optimal` outcomes produce a solver.
    pub fn new(prob: LpProblem) -> std::result::Result<(Rational, RatVector, Self), LpResult> {
        let n = prob.nvars();
        let mut rows: Vec<RatVector> = prob.ineq_rows.clone();
        let mut rhs: Vec<Rational> = prob.ineq_rhs.clone();
        for (row, r) in prob.eqs() {
            rows.push(row.clone());
            rhs.push(r.clone());
            rows.push(-row);
            rhs.push(-r);
        }
        let m = rows.len();
        if m == 0 {
            return Err(if prob.objective.is_zero() {
                LpResult::Optimal {
                    value: Rational::zero(),
                    point: RatVector::zeros(n),
                }
            } else {
                LpResult::Unbounded
            });
        }

        // Columns: u (n), v (n), slack (m), artificials for rows whose
        // right side is negative (their slack cannot start basic).
        let nu = n;
        let nv = n;
        let art_rows: Vec<usize> = (0..m).filter(|&i| rhs[i].is_negative()).collect();
        let nart = art_rows.len();
        let ncols = nu + nv + m + nart;

        let mut t = Tableau {
            rows: Vec::with_capacity(m),
            rhs: Vec::with_capacity(m),
            cost: vec![Rational::zero(); ncols],
            cost_rhs: Rational::zero(),
            basis: Vec::with_capacity(m),
            enterable: vec![true; ncols],
        };
        let mut slack_cols = Vec::with_capacity(m);
        let mut art_index = 0usize;
        for i in 0..m {
            let negate = rhs[i].is_negative();
            let sgn = if negate {
                -Rational::one()
            } else {
                Rational::one()
            };
            let mut data = vec![Rational::zero(); ncols];
            for j in 0..n {
                let a = rows[i].get(j) * &sgn;
                data[nu + j] = -&a;
                data[j] = a;
            }
            data[nu + nv + i] = sgn.clone();
            slack_cols.push(nu + nv + i);
            if negate {
                let acol = nu + nv + m + art_index;
                data[acol] = Rational::one();
                t.basis.push(acol);
                t.enterable[acol] = false; // artificials never re-enter
                art_index += 1;
            } else {
                t.basis.push(nu + nv + i);
            }
            t.rows.push(data);
            t.rhs.push(&rhs[i] * &sgn);
        }

        if nart > 0 {
            // Phase 1: minimize the artificial sum, priced out over the
            // artificial basic rows.
            for j in 0..ncols {
                let mut s = Rational::zero();
                for &r in &art_rows {
                    s += &t.rows[r][j];
                }
                t.cost[j] = -s;
            }
            let mut rhs_sum = Rational::zero();
            for &r in &art_rows {
                rhs_sum += &t.rhs[r];
            }
            t.cost_rhs = -rhs_sum;
            for i in 0..nart {
                t.cost[nu + nv + m + i] = Rational::zero();
            }
            t.primal_run();
            if t.cost_rhs.is_negative() {
                return Err(LpResult::Infeasible);
            }
            for r in 0..m {
                if t.basis[r] >= nu + nv + m {
                    let col =
                        (0..nu + nv + m).find(|&j| !t.rows[r][j].is_zero());
                    if let Some(c) = col {
                        t.pivot(r, c);
                    }
                }
            }
        }

        // Phase 2 objective.
        t.cost = vec![Rational::zero(); ncols];
        t.cost_rhs = Rational::zero();
        for j in 0..n {
            t.cost[j] = prob.objective.get(j).clone();
            t.cost[nu + j] = -prob.objective.get(j);
        }
        for r in 0..m {
            let b = t.basis[r];
            if !t.cost[b].is_zero() {
                let factor = t.cost[b].clone();
                for j in 0..ncols {
                    if !t.rows[r][j].is_zero() {
                        let v = &t.cost[j] - &factor * &t.rows[r][j];
                        t.cost[j] = v;
                    }
                }
                t.cost_rhs -= &factor * &t.rhs[r];
            }
        }
        if !t.primal_run() {
            return Err(LpResult::Unbounded);
        }

        let mut solver = IncrementalLp {
            prob,
            t,
            nu,
            std_rows: rows,
            std_rhs: rhs,
            slack_cols,
        };
        let (value, point) = solver.certified_optimum();
        Ok((value, point, solver))
    }

    pub fn point(&self) -> RatVector {
        let n = self.nu;
        let mut point = RatVector::zeros(n);
        for (r, &b) in self.t.basis.iter().enumerate() {
            if b < n {
                let v = point.get(b) + &self.t.rhs[r];
                point.set(b, v);
            } else if b < 2 * n {
                let v = point.get(b - n) - &self.t.rhs[r];
                point.set(b - n, v);
            }
        }
        point
    }

    /// Appends a <= row and re-optimizes by dual simplex.
    pub fn add_cut(&mut self, row: RatVector, rhs: Rational) -> Result<(Rational, RatVector)> {
        let (row, rhs) = normalize_row(row, rhs);
        self.prob.add_le(row.clone(), rhs.clone());
        let n = self.nu;
        let ncols_old = self.t.ncols();
        // New slack column.
        for data in self.t.rows.iter_mut() {
            data.push(Rational::zero());
        }
        self.t.cost.push(Rational::zero());
        self.t.enterable.push(true);
        // New row, reduced against the current basis.
        let mut data = vec![Rational::zero(); ncols_old + 1];
        for j in 0..n {
            data[j] = row.get(j).clone();
            data[n + j] = -row.get(j);
        }
        data[ncols_old] = Rational::one();
        let mut new_rhs = rhs;
        for r in 0..self.t.rows.len() {
            let b = self.t.basis[r];
            if !data[b].is_zero() {
                let factor = data[b].clone();
                for j in 0..=ncols_old {
                    if !self.t.rows[r][j].is_zero() {
                        let v = &data[j] - &factor * &self.t.rows[r][j];
                        data[j] = v;
                    }
                }
                new_rhs -= &factor * &self.t.rhs[r];
            }
        }
        self.t.rows.push(data);
        self.t.rhs.push(new_rhs);
        self.t.basis.push(ncols_old);
        self.std_rows.push(row);
        self.std_rhs.push(self.prob.ineq_rhs.last().unwrap().clone());
        self.slack_cols.push(ncols_old);
        if !self.t.dual_run() {
            return Err(Error::Internal(
                "cut made the LP infeasible".into(),
            ));
        }
        Ok(self.certified_optimum())
    }

    /// Reads the optimum off the tableau and verifies it: the point must
    /// be exactly feasible, match the tableau objective, and admit dual
    /// multipliers (from the slack reduced costs) that satisfy
    /// stationarity, sign and strong duality exactly.
    fn certified_optimum(&self) -> (Rational, RatVector) {
        let point = self.point();
        let value = self.prob.objective.dot(&point);
        assert!(
            self.prob.is_feasible(&point),
            "simplex returned an infeasible point"
        );
        assert_eq!(
            value, -self.t.cost_rhs.clone(),
            "tableau objective and recomputed objective disagree"
        );
        let n = self.prob.nvars();
        let m = self.std_rows.len();
        // w_i = -(reduced cost of slack i); sign-normalization of rows
        // never moves slack columns, so this is exact.
        let w: Vec<Rational> = (0..m)
            .map(|i| -self.t.cost[self.slack_cols[i]].clone())
            .collect();
        for wi in &w {
            assert!(
                !wi.is_positive(),
                "dual certificate has a positive inequality multiplier"
            );
        }
        for j in 0..n {
            let lhs: Rational = (0..m).map(|i| self.std_rows[i].get(j) * &w[i]).sum();
            assert_eq!(
                lhs,
                *self.prob.objective.get(j),
                "dual certificate fails stationarity at column {j}"
            );
        }
        let dual_value: Rational = (0..m).map(|i| &self.std_rhs[i] * &w[i]).sum();
        assert_eq!(
            dual_value, value,
            "dual certificate value does not match the primal optimum"
        );
        (value, point)
    }
}

/// Exact optimum via two-phase simplex. Equality rows are expanded into
/// opposing inequality pairs, free variables into differences of
/// nonnegatives.
pub fn solve(p: &LpProblem) -> LpResult {
    match IncrementalLp::new(p.clone()) {
        Ok((value, point, _)) => LpResult::Optimal { value, point },
        Err(outcome) => outcome,
    }
}

/// Dimension of the affine hull of a nonempty point set: the rank of the
/// matrix of differences from the first point.
pub fn affine_dim(points: &[RatVector]) -> Result<usize> {
    let first = points
        .first()
        .ok_or_else(|| Error::Validation("affine_dim of empty point set".into()))?;
    let diffs: Vec<RatVector> = points.iter().skip(1).map(|p| p - first).collect();
    if diffs.is_empty() {
        return Ok(0);
    }
    Ok(rank(&RatMatrix::from_rows(&diffs)))
}

/// How membership in a face is described when scaling a cube into it.
pub enum FaceMembership<'a> {
    /// The face is the part of the carrier polytope's boundary where its
    /// exposing functional is 1: membership reduces to the carrier facet
    /// inequalities (the exposing equality holds by construction because
    /// the directions are parallel to the face).
    CarrierFacets(&'a [RatVector]),
    /// The face given by its own vertex list; membership via convex hull.
    VertexHull(&'a [RatVector]),
}

/// Largest exact s >= 0 such that center + s * (sum of +-dirs) stays in
/// the face for every sign pattern. Errors when the best scale is 0,
/// which means the center is not in the face's relative interior.
pub fn max_cube_scale(
    membership: FaceMembership<'_>,
    center: &RatVector,
    dirs: &[RatVector],
) -> Result<Rational> {
    let m = dirs.len();
    if m == 0 {
        return Ok(Rational::one());
    }
    if m > 10 {
        return Err(Error::Validation(format!(
            "cube has {m} directions; the sign-pattern enumeration is capped at 10"
        )));
    }
    let corners: Vec<RatVector> = sign_patterns(m)
        .map(|theta| {
            let mut w = RatVector::zeros(center.dim());
            for (d, s) in dirs.iter().zip(&theta) {
                w = &w + &d.scale(s);
            }
            w
        })
        .collect();

    let result = match membership {
        FaceMembership::CarrierFacets(normals) => {
            // One variable: maximize s subject to
            //   s * (g . w_theta) <= 1 - g . center  for all g, theta.
            let mut lp = LpProblem::minimize(RatVector::new(vec![-Rational::one()]));
            lp.add_ge(RatVector::new(vec![Rational::one()]), Rational::zero());
            for g in normals {
                let slack = Rational::one() - g.dot(center);
                for w in &corners {
                    lp.add_le(RatVector::new(vec![g.dot(w)]), slack.clone());
                }
            }
            solve(&lp)
        }
        FaceMembership::VertexHull(vertices) => {
            if vertices.is_empty() {
                return Err(Error::Validation("face has no vertices".into()));
            }
            // Variables: s, then one hull coefficient per (corner, vertex).
            let dim = center.dim();
            let nv = vertices.len();
            let ncorners = corners.len();
            let nvars = 1 + ncorners * nv;
            let mut obj = RatVector::zeros(nvars);
            obj.set(0, -Rational::one());
            let mut lp = LpProblem::minimize(obj);
            let mut s_low = RatVector::zeros(nvars);
            s_low.set(0, Rational::one());
            lp.add_ge(s_low, Rational::zero());
            for (ci, w) in corners.iter().enumerate() {
                for vi in 0..nv {
                    let mut row = RatVector::zeros(nvars);
                    row.set(1 + ci * nv + vi, Rational::one());
                    lp.add_ge(row, Rational::zero());
                }
                let mut sum_row = RatVector::zeros(nvars);
                for vi in 0..nv {
                    sum_row.set(1 + ci * nv + vi, Rational::one());
                }
                lp.add_eq(sum_row, Rational::one());
                for d in 0..dim {
                    let mut row = RatVector::zeros(nvars);
                    row.set(0, -w.get(d).clone());
                    for (vi, v) in vertices.iter().enumerate() {
                        row.set(1 + ci * nv + vi, v.get(d).clone());
                    }
                    lp.add_eq(row, center.get(d).clone());
                }
            }
            solve(&lp)
        }
    };

    match result {
        LpResult::Optimal { value, .. } => {
            let s = -value;
            if s.is_zero() {
                Err(Error::Validation("center not relative-interior".into()))
            } else {
                Ok(s)
            }
        }
        LpResult::Infeasible => Err(Error::Validation("center not in the face".into())),
        LpResult::Unbounded => Err(Error::Internal(
            "cube scale unbounded on a bounded face".into(),
        )),
    }
}

/// Iterator over all sign patterns in {-1, +1}^m, deterministic order.
pub fn sign_patterns(m: usize) -> impl Iterator<Item = Vec<Rational>> {
    (0..1usize << m).map(move |mask| {
        (0..m)
            .map(|i| {
                if mask >> i & 1 == 1 {
                    -Rational::one()
                } else {
                    Rational::one()
                }
            })
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{rat, rat_int, RatVector};

    fn rv(xs: &[i64]) -> RatVector {
        RatVector::from_i64(xs)
    }

    #[test]
    fn minimize_x_above_three() {
        let mut lp = LpProblem::minimize(rv(&[1]));
        lp.add_ge(rv(&[1]), rat_int(3));
        let r = solve(&lp);
        assert_eq!(
            r,
            LpResult::Optimal {
                value: rat_int(3),
                point: rv(&[3])
            }
        );
    }

    #[test]
    fn contradictory_bounds_infeasible() {
        let mut lp = LpProblem::minimize(rv(&[0]));
        lp.add_le(rv(&[1]), rat_int(-1));
        lp.add_ge(rv(&[1]), rat_int(1));
        assert_eq!(solve(&lp), LpResult::Infeasible);
    }

    #[test]
    fn unbounded_direction_detected() {
        let mut lp = LpProblem::minimize(rv(&[1]));
        lp.add_le(rv(&[1]), rat_int(5));
        assert_eq!(solve(&lp), LpResult::Unbounded);
    }

    #[test]
    fn equality_constraints_respected() {
        // min x + y  s.t.  x + y = 2, x - y <= 0
        let mut lp = LpProblem::minimize(rv(&[1, 1]));
        lp.add_eq(rv(&[1, 1]), rat_int(2));
        lp.add_le(rv(&[1, -1]), rat_int(0));
        match solve(&lp) {
            LpResult::Optimal { value, point } => {
                assert_eq!(value, rat_int(2));
                assert_eq!(point.get(0) + point.get(1), rat_int(2));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn fractional_optimum_is_exact() {
        // min -x - y on the triangle 2x + y <= 1, x + 3y <= 1, x,y >= 0:
        // vertex intersection of the two lines is (2/5, 1/5).
        let mut lp = LpProblem::minimize(rv(&[-1, -1]));
        lp.add_le(rv(&[2, 1]), rat_int(1));
        lp.add_le(rv(&[1, 3]), rat_int(1));
        lp.add_ge(rv(&[1, 0]), rat_int(0));
        lp.add_ge(rv(&[0, 1]), rat_int(0));
        let (value, point) = solve(&lp).expect_optimal("triangle");
        assert_eq!(value, rat(-3, 5));
        assert_eq!(point, RatVector::new(vec![rat(2, 5), rat(1, 5)]));
    }

    #[test]
    fn negative_rhs_needs_sign_normalization() {
        let mut lp = LpProblem::minimize(rv(&[1]));
        lp.add_le(rv(&[-1]), rat_int(-2)); // x >= 2
        lp.add_le(rv(&[1]), rat_int(7));
        let (value, _) = solve(&lp).expect_optimal("negative rhs");
        assert_eq!(value, rat_int(2));
    }

    #[test]
    fn incremental_cuts_match_scratch_solves() {
        // min -x - y over x, y in [0, 3]^2, then cut with x + y <= 4,
        // then x + 2y <= 5; compare against scratch solves.
        let mut base = LpProblem::minimize(rv(&[-1, -1]));
        base.add_le(rv(&[1, 0]), rat_int(3));
        base.add_le(rv(&[0, 1]), rat_int(3));
        base.add_ge(rv(&[1, 0]), rat_int(0));
        base.add_ge(rv(&[0, 1]), rat_int(0));

        let (v0, _, mut inc) = IncrementalLp::new(base.clone()).unwrap();
        assert_eq!(v0, rat_int(-6));
        let (v1, _) = inc.add_cut(rv(&[1, 1]), rat_int(4)).unwrap();
        assert_eq!(v1, rat_int(-4));
        let (v2, p2) = inc.add_cut(rv(&[1, 2]), rat_int(5)).unwrap();
        let mut scratch = base;
        scratch.add_le(rv(&[1, 1]), rat_int(4));
        scratch.add_le(rv(&[1, 2]), rat_int(5));
        let (vs, _) = solve(&scratch).expect_optimal("scratch");
        assert_eq!(v2, vs);
        assert!(scratch.is_feasible(&p2));
    }

    #[test]
    fn affine_dim_cases() {
        assert!(affine_dim(&[]).is_err());
        assert_eq!(affine_dim(&[rv(&[5, 5])]).unwrap(), 0);
        assert_eq!(affine_dim(&[rv(&[0, 0]), rv(&[1, 0]), rv(&[0, 1])]).unwrap(), 2);
        assert_eq!(affine_dim(&[rv(&[0, 0]), rv(&[1, 1]), rv(&[2, 2])]).unwrap(), 1);
    }

    #[test]
    fn cube_scale_on_segment() {
        let normals = vec![rv(&[1, 0]), rv(&[-1, 0]), rv(&[0, 1]), rv(&[0, -1])];
        let center = rv(&[0, 1]);
        let dirs = vec![rv(&[1, 0])];
        let s = max_cube_scale(FaceMembership::CarrierFacets(&normals), &center, &dirs).unwrap();
        assert_eq!(s, rat_int(1));
    }

    #[test]
    fn cube_scale_square_facet_of_cube() {
        let mut normals = Vec::new();
        for i in 0..3 {
            normals.push(RatVector::unit(3, i));
            normals.push(-&RatVector::unit(3, i));
        }
        let center = rv(&[0, 0, 1]);
        let dirs = vec![rv(&[1, 0, 0]), rv(&[0, 1, 0])];
        let s = max_cube_scale(FaceMembership::CarrierFacets(&normals), &center, &dirs).unwrap();
        assert_eq!(s, rat_int(1));
    }

    #[test]
    fn cube_scale_via_vertex_hull() {
        let verts = vec![rv(&[1, 1, 1]), rv(&[1, -1, 1]), rv(&[-1, 1, 1]), rv(&[-1, -1, 1])];
        let center = rv(&[0, 0, 1]);
        let dirs = vec![rv(&[1, 0, 0]), rv(&[0, 1, 0])];
        let s = max_cube_scale(FaceMembership::VertexHull(&verts), &center, &dirs).unwrap();
        assert_eq!(s, rat_int(1));
        let off = RatVector::new(vec![rat(1, 2), rat_int(0), rat_int(1)]);
        let s2 = max_cube_scale(FaceMembership::VertexHull(&verts), &off, &dirs).unwrap();
        assert_eq!(s2, rat(1, 2));
    }

    #[test]
    fn cube_scale_rejects_boundary_center() {
        let normals = vec![rv(&[1, 0]), rv(&[-1, 0]), rv(&[0, 1]), rv(&[0, -1])];
        let center = rv(&[1, 1]);
        let dirs = vec![rv(&[1, 0])];
        assert!(
            max_cube_scale(FaceMembership::CarrierFacets(&normals), &center, &dirs).is_err()
        );
    }
}
