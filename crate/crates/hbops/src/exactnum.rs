//! Exact rational scalars, dense vectors and matrices, and the elimination
//! routines the rest of the crate builds on: rank, kernels, basis completion
//! and biorthogonal systems. Everything here is arbitrary precision; no
//! floating point enters any code path in this module.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::{Error, Result};

/// Arbitrary-precision rational scalar, always in canonical form
/// (reduced, positive denominator). `num_rational` maintains the
/// canonical form on every operation.
pub type Rational = num_rational::BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses the canonical "p/q" form ("p" alone when q = 1).
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational numerator in {s:?}")))?;
    let d: BigInt = den
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational denominator in {s:?}")))?;
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(Rational::new(n, d))
}

/// Formats in the canonical "p/q" string form used by all JSON documents.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    // Good enough for reporting; exact paths never round-trip through this.
    let n = r.numer();
    let d = r.denom();
    match (n.to_string().parse::<f64>(), d.to_string().parse::<f64>()) {
        (Ok(a), Ok(b)) => a / b,
        _ => f64::NAN,
    }
}

/// Dense exact vector.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RatVector {
    entries: Vec<Rational>,
}

impl fmt::Debug for RatVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(format_rational).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl RatVector {
    pub fn new(entries: Vec<Rational>) -> Self {
        RatVector { entries }
    }

    pub fn zeros(dim: usize) -> Self {
        RatVector {
            entries: vec![Rational::zero(); dim],
        }
    }

    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.entries[i] = Rational::one();
        v
    }

    pub fn from_i64(entries: &[i64]) -> Self {
        RatVector::new(entries.iter().map(|&x| rat_int(x)).collect())
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> &Rational {
        &self.entries[i]
    }

    pub fn set(&mut self, i: usize, v: Rational) {
        self.entries[i] = v;
    }

    pub fn dot(&self, other: &RatVector) -> Rational {
        assert_eq!(self.dim(), other.dim(), "dot on mismatched dims");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn scale(&self, c: &Rational) -> RatVector {
        RatVector::new(self.entries.iter().map(|e| e * c).collect())
    }

    /// Sum of absolute values of the coordinates.
    pub fn abs_sum(&self) -> Rational {
        self.entries.iter().map(|e| e.abs()).sum()
    }

    /// Maximum absolute value of the coordinates.
    pub fn abs_max(&self) -> Rational {
        self.entries
            .iter()
            .map(|e| e.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    /// Exact sum of squares of the coordinates.
    pub fn sq_sum(&self) -> Rational {
        self.entries.iter().map(|e| e * e).sum()
    }

    /// Concatenates coordinate blocks.
    pub fn concat(parts: &[&RatVector]) -> RatVector {
        let mut e = Vec::new();
        for p in parts {
            e.extend_from_slice(&p.entries);
        }
        RatVector::new(e)
    }

    pub fn slice(&self, start: usize, len: usize) -> RatVector {
        RatVector::new(self.entries[start..start + len].to_vec())
    }

    /// Embeds this vector as the block starting at `offset` inside a
    /// zero vector of dimension `total`.
    pub fn embed(&self, total: usize, offset: usize) -> RatVector {
        let mut v = RatVector::zeros(total);
        for (i, e) in self.entries.iter().enumerate() {
            v.entries[offset + i] = e.clone();
        }
        v
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.entries.iter().map(rational_to_f64).collect()
    }
}

impl Add for &RatVector {
    type Output = RatVector;
    fn add(self, rhs: &RatVector) -> RatVector {
        assert_eq!(self.dim(), rhs.dim());
        RatVector::new(
            self.entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

impl Sub for &RatVector {
    type Output = RatVector;
    fn sub(self, rhs: &RatVector) -> RatVector {
        assert_eq!(self.dim(), rhs.dim());
        RatVector::new(
            self.entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }
}

impl Neg for &RatVector {
    type Output = RatVector;
    fn neg(self) -> RatVector {
        RatVector::new(self.entries.iter().map(|e| -e).collect())
    }
}

/// Dense exact matrix, row major.
#[derive(Clone, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rational>,
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RatMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let parts: Vec<String> = (0..self.cols)
                .map(|c| format_rational(self.get(r, c)))
                .collect();
            writeln!(f, "  [{}]", parts.join(", "))?;
        }
        write!(f, "]")
    }
}

impl RatMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Rational>) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count mismatch");
        RatMatrix {
            rows,
            cols,
            entries,
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix::new(rows, cols, vec![Rational::zero(); rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn from_rows(rows: &[RatVector]) -> Self {
        assert!(!rows.is_empty(), "from_rows on empty slice");
        let cols = rows[0].dim();
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.dim(), cols, "ragged rows");
            entries.extend_from_slice(r.entries());
        }
        RatMatrix::new(rows.len(), cols, entries)
    }

    pub fn from_i64(rows: usize, cols: usize, entries: &[i64]) -> Self {
        RatMatrix::new(rows, cols, entries.iter().map(|&x| rat_int(x)).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rational) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> RatVector {
        RatVector::new(self.entries[r * self.cols..(r + 1) * self.cols].to_vec())
    }

    pub fn col(&self, c: usize) -> RatVector {
        RatVector::new((0..self.rows).map(|r| self.get(r, c).clone()).collect())
    }

    pub fn transpose(&self) -> RatMatrix {
        let mut t = RatMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &RatVector) -> RatVector {
        assert_eq!(self.cols, v.dim(), "matrix-vector shape mismatch");
        RatVector::new(
            (0..self.rows)
                .map(|r| {
                    (0..self.cols)
                        .map(|c| self.get(r, c) * v.get(c))
                        .sum::<Rational>()
                })
                .collect(),
        )
    }

    pub fn mul_mat(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let mut out = RatMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for c in 0..other.cols {
                let mut acc = Rational::zero();
                for k in 0..self.cols {
                    acc += self.get(r, k) * other.get(k, c);
                }
                out.set(r, c, acc);
            }
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> RatMatrix {
        RatMatrix::new(
            self.rows,
            self.cols,
            self.entries.iter().map(|e| e * c).collect(),
        )
    }

    pub fn add(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        RatMatrix::new(
            self.rows,
            self.cols,
            self.entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn all_rows(&self) -> Vec<RatVector> {
        (0..self.rows).map(|r| self.row(r)).collect()
    }
}

impl Mul<&RatVector> for &RatMatrix {
    type Output = RatVector;
    fn mul(self, v: &RatVector) -> RatVector {
        self.mul_vec(v)
    }
}

/// Exact rank via fraction-free (Bareiss) elimination on the
/// denominator-cleared integer matrix. Pivoting is first nonzero in
/// column order, so results are reproducible.
pub fn rank(m: &RatMatrix) -> usize {
    if m.rows == 0 || m.cols == 0 {
        return 0;
    }
    // Clear denominators row by row; rank is unchanged.
    let mut a: Vec<Vec<BigInt>> = (0..m.rows)
        .map(|r| {
            let mut lcm = BigInt::one();
            for c in 0..m.cols {
                lcm = num_integer::lcm(lcm, m.get(r, c).denom().clone());
            }
            (0..m.cols)
                .map(|c| {
                    let e = m.get(r, c);
                    e.numer() * (&lcm / e.denom())
                })
                .collect()
        })
        .collect();

    let (nrows, ncols) = (m.rows, m.cols);
    let mut prev_pivot = BigInt::one();
    let mut pivot_row = 0usize;
    for col in 0..ncols {
        let found = (pivot_row..nrows).find(|&r| !a[r][col].is_zero());
        let r0 = match found {
            Some(r) => r,
            None => continue,
        };
        a.swap(pivot_row, r0);
        let pivot = a[pivot_row][col].clone();
        for r in pivot_row + 1..nrows {
            for c in col + 1..ncols {
                let num = &pivot * &a[r][c] - &a[r][col] * &a[pivot_row][c];
                a[r][c] = num / &prev_pivot;
            }
            a[r][col] = BigInt::zero();
        }
        prev_pivot = pivot;
        pivot_row += 1;
        if pivot_row == nrows {
            break;
        }
    }
    pivot_row
}

/// Reduced row echelon form; returns (rref matrix, pivot column indexes).
pub fn rref(m: &RatMatrix) -> (RatMatrix, Vec<usize>) {
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut pr = 0usize;
    for col in 0..a.cols {
        if pr == a.rows {
            break;
        }
        let found = (pr..a.rows).find(|&r| !a.get(r, col).is_zero());
        let r0 = match found {
            Some(r) => r,
            None => continue,
        };
        for c in 0..a.cols {
            let tmp = a.get(pr, c).clone();
            a.set(pr, c, a.get(r0, c).clone());
            a.set(r0, c, tmp);
        }
        let inv = a.get(pr, col).recip();
        for c in 0..a.cols {
            let v = a.get(pr, c) * &inv;
            a.set(pr, c, v);
        }
        for r in 0..a.rows {
            if r != pr && !a.get(r, col).is_zero() {
                let f = a.get(r, col).clone();
                for c in 0..a.cols {
                    let v = a.get(r, c) - &f * a.get(pr, c);
                    a.set(r, c, v);
                }
            }
        }
        pivots.push(col);
        pr += 1;
    }
    (a, pivots)
}

/// Exactly spanning vectors of ker M; returns cols - rank(M) vectors.
pub fn kernel_basis(m: &RatMatrix) -> Vec<RatVector> {
    let (r, pivots) = rref(m);
    let is_pivot: Vec<bool> = {
        let mut v = vec![false; m.cols];
        for &p in &pivots {
            v[p] = true;
        }
        v
    };
    let mut basis = Vec::new();
    for free in 0..m.cols {
        if is_pivot[free] {
            continue;
        }
        let mut v = RatVector::zeros(m.cols);
        v.set(free, Rational::one());
        for (pi, &pc) in pivots.iter().enumerate() {
            v.set(pc, -r.get(pi, free).clone());
        }
        basis.push(v);
    }
    basis
}

/// Solves M x = b exactly. Returns None when the system is inconsistent;
/// for underdetermined systems returns one particular solution.
pub fn solve(m: &RatMatrix, b: &RatVector) -> Option<RatVector> {
    assert_eq!(m.rows, b.dim(), "solve shape mismatch");
    let mut aug = RatMatrix::zeros(m.rows, m.cols + 1);
    for r in 0..m.rows {
        for c in 0..m.cols {
            aug.set(r, c, m.get(r, c).clone());
        }
        aug.set(r, m.cols, b.get(r).clone());
    }
    let (rr, pivots) = rref(&aug);
    if pivots.contains(&m.cols) {
        return None; // pivot in the augmented column: inconsistent
    }
    let mut x = RatVector::zeros(m.cols);
    for (pi, &pc) in pivots.iter().enumerate() {
        x.set(pc, rr.get(pi, m.cols).clone());
    }
    Some(x)
}

/// Exact inverse; errors on singular input.
pub fn inverse(m: &RatMatrix) -> Result<RatMatrix> {
    if m.rows != m.cols {
        return Err(Error::Dimension("inverse of non-square matrix".into()));
    }
    let n = m.rows;
    let mut aug = RatMatrix::zeros(n, 2 * n);
    for r in 0..n {
        for c in 0..n {
            aug.set(r, c, m.get(r, c).clone());
        }
        aug.set(r, n + r, Rational::one());
    }
    let (rr, pivots) = rref(&aug);
    if pivots.len() < n || pivots.iter().take(n).enumerate().any(|(i, &p)| p != i) {
        return Err(Error::Singular);
    }
    let mut inv = RatMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            inv.set(r, c, rr.get(r, n + c).clone());
        }
    }
    Ok(inv)
}

/// Completes `given` (functionals x0*, x1*, ..., xm* with x0*(x0) = 1 and
/// xi*(x0) = 0 for i >= 1) to a full basis of the dual coordinate space in
/// which every added functional annihilates x0. Completion candidates are
/// standard basis functionals, corrected by subtracting their value at x0
/// times x0*.
pub fn complete_basis_annihilating(
    x0: &RatVector,
    given: &[RatVector],
) -> Result<Vec<RatVector>> {
    let dim = x0.dim();
    if given.is_empty() {
        return Err(Error::Validation("no functionals given".into()));
    }
    for g in given {
        if g.dim() != dim {
            return Err(Error::Dimension("functional/point dim mismatch".into()));
        }
    }
    if rank(&RatMatrix::from_rows(given)) != given.len() {
        return Err(Error::Validation(
            "given functionals are linearly dependent".into(),
        ));
    }
    if given[0].dot(x0) != Rational::one() {
        return Err(Error::Validation("x0*(x0) != 1".into()));
    }
    for (i, g) in given.iter().enumerate().skip(1) {
        if !g.dot(x0).is_zero() {
            return Err(Error::Validation(format!("x{i}*(x0) != 0")));
        }
    }

    let mut basis: Vec<RatVector> = given.to_vec();
    for j in 0..dim {
        if basis.len() == dim {
            break;
        }
        let cand = RatVector::unit(dim, j);
        let mut tentative = basis.clone();
        tentative.push(cand.clone());
        if rank(&RatMatrix::from_rows(&tentative)) == tentative.len() {
            // Elementary row operation: keeps independence, kills the
            // pairing with x0.
            let corrected = &cand - &given[0].scale(&cand.dot(x0));
            basis.push(corrected);
        }
    }
    if basis.len() != dim {
        return Err(Error::Validation("basis completion failed".into()));
    }
    Ok(basis)
}

/// Biorthogonal vectors of a functional basis: vectors x0..xr with
/// xi*(xj) exactly delta_ij. These are the columns of the inverse of the
/// matrix whose rows are the functionals.
pub fn biorthogonal_vectors(functional_basis: &[RatVector]) -> Result<Vec<RatVector>> {
    if functional_basis.is_empty() {
        return Err(Error::Validation("empty functional basis".into()));
    }
    let f = RatMatrix::from_rows(functional_basis);
    if f.rows() != f.cols() {
        return Err(Error::Dimension("functional basis is not square".into()));
    }
    let inv = inverse(&f)?;
    Ok((0..inv.cols()).map(|c| inv.col(c)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rv(xs: &[i64]) -> RatVector {
        RatVector::from_i64(xs)
    }

    #[test]
    fn rational_canonical_form() {
        let r = rat(6, -4);
        assert_eq!(format_rational(&r), "-3/2");
        assert_eq!(parse_rational("-3/2").unwrap(), r);
        assert_eq!(parse_rational("7").unwrap(), rat_int(7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn rational_arithmetic_exact() {
        let a = rat(1, 3);
        let b = rat(1, 6);
        assert_eq!(&a + &b, rat(1, 2));
    }

    #[test]
    fn rank_identity() {
        assert_eq!(rank(&RatMatrix::identity(3)), 3);
    }

    #[test]
    fn rank_proportional_rows() {
        let m = RatMatrix::from_i64(2, 2, &[1, 2, 2, 4]);
        assert_eq!(rank(&m), 1);
    }

    #[test]
    fn rank_equals_transpose_rank() {
        let m = RatMatrix::from_i64(3, 4, &[1, 2, 3, 4, 2, 4, 6, 8, 0, 1, 1, 0]);
        assert_eq!(rank(&m), rank(&m.transpose()));
        assert_eq!(rank(&m), 2);
    }

    #[test]
    fn kernel_of_identity_empty() {
        assert!(kernel_basis(&RatMatrix::identity(4)).is_empty());
    }

    #[test]
    fn kernel_of_difference_row() {
        let m = RatMatrix::from_i64(1, 2, &[1, -1]);
        let k = kernel_basis(&m);
        assert_eq!(k.len(), 1);
        assert_eq!(k[0].get(0), k[0].get(1));
        assert!(!k[0].is_zero());
    }

    #[test]
    fn kernel_multiply_back_is_zero() {
        let m = RatMatrix::from_i64(2, 4, &[1, 2, 3, 4, 0, 1, -1, 2]);
        let k = kernel_basis(&m);
        assert_eq!(k.len(), 4 - rank(&m));
        for v in &k {
            assert!(m.mul_vec(v).is_zero());
        }
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        let m = RatMatrix::from_i64(2, 2, &[1, 1, 1, -1]);
        let x = solve(&m, &rv(&[3, 1])).unwrap();
        assert_eq!(x, RatVector::new(vec![rat_int(2), rat_int(1)]));
        let sing = RatMatrix::from_i64(2, 2, &[1, 1, 1, 1]);
        assert!(solve(&sing, &rv(&[0, 1])).is_none());
    }

    #[test]
    fn inverse_round_trip() {
        let m = RatMatrix::from_i64(3, 3, &[2, 1, 0, 1, 3, 1, 0, 1, 2]);
        let inv = inverse(&m).unwrap();
        assert_eq!(m.mul_mat(&inv), RatMatrix::identity(3));
        assert!(inverse(&RatMatrix::from_i64(2, 2, &[1, 2, 2, 4])).is_err());
    }

    #[test]
    fn complete_basis_dim2() {
        let x0 = rv(&[1, 0]);
        let basis = complete_basis_annihilating(&x0, &[rv(&[1, 0])]).unwrap();
        assert_eq!(basis.len(), 2);
        assert_eq!(basis[0], rv(&[1, 0]));
        assert!(basis[1].dot(&x0).is_zero());
    }

    #[test]
    fn complete_basis_dim3_annihilates() {
        let x0 = rv(&[1, 0, 0]);
        let given = [rv(&[1, 0, 0]), rv(&[0, 1, 0])];
        let basis = complete_basis_annihilating(&x0, &given).unwrap();
        assert_eq!(basis.len(), 3);
        assert!(basis[2].get(0).is_zero());
        assert!(basis[2].dot(&x0).is_zero());
    }

    #[test]
    fn complete_basis_rejects_bad_input() {
        let x0 = rv(&[1, 0]);
        assert!(complete_basis_annihilating(&x0, &[rv(&[2, 0])]).is_err());
        assert!(complete_basis_annihilating(&x0, &[rv(&[1, 0]), rv(&[2, 0])]).is_err());
    }

    #[test]
    fn complete_basis_random_dim4_pairings_vanish() {
        let x0 = rv(&[1, 2, 0, -1]);
        let x0s = RatVector::new(vec![rat_int(1), rat_int(0), rat(1, 2), rat_int(0)]);
        assert_eq!(x0s.dot(&x0), rat_int(1));
        let x1s = rv(&[2, -1, 3, 0]);
        assert!(x1s.dot(&x0).is_zero());
        let basis = complete_basis_annihilating(&x0, &[x0s, x1s]).unwrap();
        assert_eq!(basis.len(), 4);
        assert_eq!(rank(&RatMatrix::from_rows(&basis)), 4);
        for f in basis.iter().skip(1) {
            assert!(f.dot(&x0).is_zero());
        }
    }

    #[test]
    fn biorthogonal_standard_basis() {
        let fs = [rv(&[1, 0]), rv(&[0, 1])];
        let vs = biorthogonal_vectors(&fs).unwrap();
        assert_eq!(vs, vec![rv(&[1, 0]), rv(&[0, 1])]);
    }

    #[test]
    fn biorthogonal_diagonal() {
        let fs = [rv(&[2, 0]), rv(&[0, 2])];
        let vs = biorthogonal_vectors(&fs).unwrap();
        assert_eq!(vs[0], RatVector::new(vec![rat(1, 2), rat_int(0)]));
        assert_eq!(vs[1], RatVector::new(vec![rat_int(0), rat(1, 2)]));
    }

    #[test]
    fn biorthogonal_pairing_is_identity() {
        let fs = [
            rv(&[1, 2, 0, 1]),
            rv(&[0, 1, 1, 0]),
            rv(&[3, 0, 1, -1]),
            rv(&[1, 1, 1, 1]),
        ];
        let vs = biorthogonal_vectors(&fs).unwrap();
        for (i, f) in fs.iter().enumerate() {
            for (j, v) in vs.iter().enumerate() {
                let expect = if i == j { rat_int(1) } else { rat_int(0) };
                assert_eq!(f.dot(v), expect, "pairing ({i},{j})");
            }
        }
        assert!(biorthogonal_vectors(&[rv(&[1, 1]), rv(&[2, 2])]).is_err());
    }
}
