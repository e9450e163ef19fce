//! Exact rational linear algebra.
//!
//! Every scalar in the crate is a [`Rat`]; vectors are plain `Vec<Rat>` and
//! matrices are row lists with an explicit column count so that empty
//! matrices still know their shape.

mod lattice;
mod subspace;

pub use lattice::{gcd_maximal_minors, hnf_lattice_basis, integer_rows, kernel_lattice, saturated_lattice_basis};
pub use subspace::{direction_intersect, subspace_intersect, AffineSubspace};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rat = BigRational;
pub type RatVec = Vec<Rat>;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rvec(xs: &[i64]) -> RatVec {
    xs.iter().map(|&x| rat(x)).collect()
}

/// Parses `"p/q"`, `"p"` or a decimal-free integer string.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let parse_int = |t: &str| t.trim().parse::<BigInt>().map_err(|_| Error::Parse(format!("invalid rational {s:?}")));
    match s.split_once('/') {
        Some((p, q)) => {
            let q = parse_int(q)?;
            if q.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(Rat::new(parse_int(p)?, q))
        }
        None => Ok(Rat::from_integer(parse_int(s)?)),
    }
}

pub fn format_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// `(a, b, ...)` with exact entries.
pub fn format_point(v: &[Rat]) -> String {
    let parts: Vec<String> = v.iter().map(format_rat).collect();
    format!("({})", parts.join(", "))
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter().zip(b).fold(Rat::zero(), |acc, (x, y)| acc + x * y)
}

pub fn sub(a: &[Rat], b: &[Rat]) -> RatVec {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[Rat], b: &[Rat]) -> RatVec {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[Rat], s: &Rat) -> RatVec {
    a.iter().map(|x| x * s).collect()
}

pub fn is_zero_vec(a: &[Rat]) -> bool {
    a.iter().all(Zero::is_zero)
}

/// Dense rational matrix stored by rows.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RatMat {
    ncols: usize,
    rows: Vec<RatVec>,
}

impl RatMat {
    pub fn new(ncols: usize, rows: Vec<RatVec>) -> Result<Self> {
        for row in &rows {
            crate::error::check_dim(ncols, row.len())?;
        }
        Ok(Self { ncols, rows })
    }

    pub fn empty(ncols: usize) -> Self {
        Self { ncols, rows: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n).map(|i| (0..n).map(|j| if i == j { Rat::one() } else { Rat::zero() }).collect()).collect();
        Self { ncols: n, rows }
    }

    pub fn from_i64(ncols: usize, rows: &[&[i64]]) -> Self {
        let rows: Vec<RatVec> = rows.iter().map(|r| rvec(r)).collect();
        Self::new(ncols, rows).expect("ragged integer matrix")
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rows(&self) -> &[RatVec] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<RatVec> {
        self.rows
    }

    pub fn row(&self, i: usize) -> &RatVec {
        &self.rows[i]
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn transpose(&self) -> RatMat {
        let rows = (0..self.ncols).map(|j| self.rows.iter().map(|r| r[j].clone()).collect()).collect();
        RatMat { ncols: self.rows.len(), rows }
    }

    pub fn mul_vec(&self, v: &[Rat]) -> RatVec {
        self.rows.iter().map(|r| dot(r, v)).collect()
    }

    pub fn mul(&self, other: &RatMat) -> Result<RatMat> {
        crate::error::check_dim(self.ncols, other.nrows())?;
        let t = other.transpose();
        let rows = self.rows.iter().map(|r| t.rows.iter().map(|c| dot(r, c)).collect()).collect();
        Ok(RatMat { ncols: other.ncols, rows })
    }

    /// Stacks `other` below `self`.
    pub fn stack(&self, other: &RatMat) -> Result<RatMat> {
        crate::error::check_dim(self.ncols, other.ncols)?;
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        Ok(RatMat { ncols: self.ncols, rows })
    }

    pub fn is_integral(&self) -> bool {
        self.rows.iter().flatten().all(|x| x.is_integer())
    }

    pub fn rank(&self) -> usize {
        rref(self).1.len()
    }

    /// Nonzero rows of the reduced row echelon form.
    pub fn row_space(&self) -> RatMat {
        let (r, pivots) = rref(self);
        RatMat { ncols: self.ncols, rows: r.rows.into_iter().take(pivots.len()).collect() }
    }
}

/// Reduced row echelon form with exact pivots normalized to one.
pub fn rref(m: &RatMat) -> (RatMat, Vec<usize>) {
    let mut rows = m.rows.clone();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..m.ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        if !inv.is_one() {
            for x in rows[r].iter_mut() {
                *x *= &inv;
            }
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (RatMat { ncols: m.ncols, rows }, pivots)
}

/// Canonical (RREF) basis of `{x : m x = 0}`.
pub fn nullspace(m: &RatMat) -> RatMat {
    let (r, pivots) = rref(m);
    let n = m.ncols;
    let mut basis = Vec::new();
    let mut is_pivot = vec![false; n];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    for f in (0..n).filter(|&j| !is_pivot[j]) {
        let mut v = vec![Rat::zero(); n];
        v[f] = Rat::one();
        for (i, &p) in pivots.iter().enumerate() {
            v[p] = -r.rows[i][f].clone();
        }
        basis.push(v);
    }
    RatMat { ncols: n, rows: basis }.row_space()
}

/// A particular solution of `m x = rhs`, with free variables set to zero.
pub fn solve(m: &RatMat, rhs: &[Rat]) -> Option<RatVec> {
    let n = m.ncols;
    let aug_rows = m
        .rows
        .iter()
        .zip(rhs)
        .map(|(row, b)| {
            let mut r = row.clone();
            r.push(b.clone());
            r
        })
        .collect();
    let (r, pivots) = rref(&RatMat { ncols: n + 1, rows: aug_rows });
    if pivots.last() == Some(&n) {
        return None;
    }
    let mut x = vec![Rat::zero(); n];
    for (i, &p) in pivots.iter().enumerate() {
        x[p] = r.rows[i][n].clone();
    }
    Some(x)
}

/// Determinant by Gaussian elimination over the rationals.
pub fn det(m: &RatMat) -> Rat {
    let n = m.nrows();
    debug_assert_eq!(n, m.ncols);
    let mut a = m.rows.clone();
    let mut d = Rat::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return Rat::zero();
        };
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d *= &a[c][c];
        let inv = a[c][c].recip();
        let pivot_row = a[c].clone();
        for row in a.iter_mut().skip(c + 1) {
            if row[c].is_zero() {
                continue;
            }
            let f = &row[c] * &inv;
            for (x, y) in row.iter_mut().zip(&pivot_row).skip(c) {
                *x -= &f * y;
            }
        }
    }
    d
}

/// Rank of the affine span of a point set (-1 for the empty set).
pub fn affine_rank(points: &[&RatVec]) -> isize {
    let Some((first, rest)) = points.split_first() else {
        return -1;
    };
    if rest.is_empty() {
        return 0;
    }
    let rows = rest.iter().map(|p| sub(p, first)).collect();
    RatMat { ncols: first.len(), rows }.rank() as isize
}

/// Scales a nonzero rational vector to the primitive integer vector with the
/// same direction, returning the positive factor applied.
pub fn primitive_scale(v: &[Rat]) -> Rat {
    use num_integer::Integer;
    let mut lcm = BigInt::one();
    for x in v {
        lcm = lcm.lcm(x.denom());
    }
    let mut g = BigInt::zero();
    for x in v {
        let n = x.numer() * (&lcm / x.denom());
        g = g.gcd(&n);
    }
    if g.is_zero() {
        return Rat::one();
    }
    Rat::new(lcm, g.abs())
}
