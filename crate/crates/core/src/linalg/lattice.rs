//! Integer lattices: Hermite normal forms, kernel lattices and saturation.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{nullspace, primitive_scale, scale, Rat, RatMat};
use crate::error::{Error, Result};

type IntRow = Vec<BigInt>;

pub fn integer_rows(m: &RatMat) -> Result<Vec<IntRow>> {
    m.rows()
        .iter()
        .map(|r| {
            r.iter().map(|x| if x.is_integer() { Ok(x.to_integer()) } else { Err(Error::NonIntegralInput) }).collect()
        })
        .collect()
}

fn to_ratmat(ncols: usize, rows: Vec<IntRow>) -> RatMat {
    let rows = rows.into_iter().map(|r| r.into_iter().map(Rat::from_integer).collect()).collect();
    RatMat::new(ncols, rows).expect("rows share the column count")
}

fn axpy(target: &mut IntRow, q: &BigInt, src: &IntRow) {
    for (t, s) in target.iter_mut().zip(src) {
        *t -= q * s;
    }
}

/// Row-style Hermite reduction on the first `pivot_cols` columns.
/// Returns the transformed rows (zero rows last) and the rank.
fn hermite_rows(mut rows: Vec<IntRow>, pivot_cols: usize) -> (Vec<IntRow>, usize) {
    let mut r = 0;
    for c in 0..pivot_cols {
        if r == rows.len() {
            break;
        }
        loop {
            let best = (r..rows.len())
                .filter(|&i| !rows[i][c].is_zero())
                .min_by(|&i, &j| rows[i][c].abs().cmp(&rows[j][c].abs()));
            let Some(best) = best else { break };
            rows.swap(r, best);
            let pivot = rows[r].clone();
            let mut done = true;
            for row in rows.iter_mut().skip(r + 1) {
                if row[c].is_zero() {
                    continue;
                }
                let q = row[c].div_floor(&pivot[c]);
                axpy(row, &q, &pivot);
                if !row[c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if rows[r][c].is_zero() {
            continue;
        }
        if rows[r][c].is_negative() {
            for x in rows[r].iter_mut() {
                *x = -x.clone();
            }
        }
        let pivot = rows[r].clone();
        for row in rows.iter_mut().take(r) {
            let q = row[c].div_floor(&pivot[c]);
            if !q.is_zero() {
                axpy(row, &q, &pivot);
            }
        }
        r += 1;
    }
    (rows, r)
}

/// Hermite normal form basis of the lattice generated by integer rows.
///
/// Pivots are positive and entries above each pivot lie in `[0, pivot)`.
pub fn hnf_lattice_basis(generators: &RatMat) -> Result<RatMat> {
    let rows = integer_rows(generators)?;
    let n = generators.ncols();
    let (rows, rank) = hermite_rows(rows, n);
    Ok(to_ratmat(n, rows.into_iter().take(rank).collect()))
}

/// HNF basis of `Z^n ∩ ker(bt)` for an integral `bt` of full row rank.
pub fn kernel_lattice(bt: &RatMat) -> Result<RatMat> {
    let b = integer_rows(bt)?;
    let (k, n) = (bt.nrows(), bt.ncols());
    // Rows [column_j(bt) | e_j]; unimodular row operations keep the right
    // block a Z-basis change, so rows whose left block vanishes span the kernel.
    let aug: Vec<IntRow> = (0..n)
        .map(|j| {
            let mut row: IntRow = b.iter().map(|r| r[j].clone()).collect();
            row.extend((0..n).map(|i| if i == j { BigInt::one() } else { BigInt::zero() }));
            row
        })
        .collect();
    let (rows, rank) = hermite_rows(aug, k);
    if rank != k {
        return Err(Error::RankDeficient { rows: k, cols: n, rank });
    }
    let kernel: Vec<IntRow> = rows.into_iter().skip(rank).map(|r| r[k..].to_vec()).collect();
    let (kernel, kr) = hermite_rows(kernel, n);
    Ok(to_ratmat(n, kernel.into_iter().take(kr).collect()))
}

/// HNF basis of `Z^n ∩ span(directions)` for a rational subspace.
pub fn saturated_lattice_basis(directions: &RatMat) -> RatMat {
    let n = directions.ncols();
    let complement = nullspace(directions);
    let scaled: Vec<_> = complement.rows().iter().map(|r| scale(r, &primitive_scale(r))).collect();
    let complement = RatMat::new(n, scaled).expect("complement rows have width n");
    if complement.is_empty() {
        return RatMat::identity(n);
    }
    kernel_lattice(&complement).expect("canonical complement has full row rank")
}

/// gcd of the maximal minors of an integral matrix of shape `n x k`, `n >= k`.
/// The action of the subtorus is effective exactly when this gcd is one.
pub fn gcd_maximal_minors(b: &RatMat) -> Result<BigInt> {
    let rows = integer_rows(b)?;
    let (n, k) = (b.nrows(), b.ncols());
    if k > n {
        return Ok(BigInt::zero());
    }
    let g = crate::combinatorics::combinations(n, k)
        .into_iter()
        .map(|idx| int_det(idx.iter().map(|&i| rows[i].clone()).collect()))
        .fold(BigInt::zero(), |g, d| g.gcd(&d));
    Ok(g)
}

fn int_det(m: Vec<IntRow>) -> BigInt {
    if m.is_empty() {
        return BigInt::one();
    }
    let n = m.len();
    let (h, rank) = hermite_rows(m, n);
    if rank < n {
        return BigInt::zero();
    }
    // Unimodular row operations preserve |det|.
    h.iter().enumerate().fold(BigInt::one(), |acc, (i, r)| acc * &r[i])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rvec;

    #[test]
    fn hnf_examples() {
        let m = RatMat::from_i64(2, &[&[2, 0], &[0, 2]]);
        assert_eq!(hnf_lattice_basis(&m).unwrap(), m);
        let m = RatMat::from_i64(2, &[&[1, 1], &[1, -1]]);
        assert_eq!(hnf_lattice_basis(&m).unwrap(), RatMat::from_i64(2, &[&[1, 1], &[0, 2]]));
        let m = RatMat::from_i64(2, &[&[0, 0]]);
        assert!(hnf_lattice_basis(&m).unwrap().is_empty());
        let half = RatMat::new(1, vec![vec![crate::linalg::ratio(1, 2)]]).unwrap();
        assert_eq!(hnf_lattice_basis(&half), Err(Error::NonIntegralInput));
    }

    #[test]
    fn kernel_examples() {
        assert!(kernel_lattice(&RatMat::identity(2)).unwrap().is_empty());
        assert_eq!(kernel_lattice(&RatMat::from_i64(2, &[&[1, 1]])).unwrap(), RatMat::from_i64(2, &[&[1, -1]]));
        assert_eq!(
            kernel_lattice(&RatMat::from_i64(3, &[&[1, 1, 0], &[0, 0, 1]])).unwrap(),
            RatMat::from_i64(3, &[&[1, -1, 0]])
        );
        assert!(matches!(
            kernel_lattice(&RatMat::from_i64(2, &[&[1, 1], &[2, 2]])),
            Err(Error::RankDeficient { rank: 1, .. })
        ));
    }

    #[test]
    fn kernel_of_non_primitive_map() {
        // x + 2y + 3z = 0 has a rank-2 kernel lattice of index 1 in the plane.
        let k = kernel_lattice(&RatMat::from_i64(3, &[&[1, 2, 3]])).unwrap();
        assert_eq!(k.nrows(), 2);
        for r in k.rows() {
            assert_eq!(crate::linalg::dot(r, &rvec(&[1, 2, 3])), crate::linalg::rat(0));
        }
        // (2,-1,0) and (3,0,-1) span the kernel lattice; both must be generated.
        let h = hnf_lattice_basis(&k).unwrap();
        let with = hnf_lattice_basis(&k.stack(&RatMat::from_i64(3, &[&[2, -1, 0], &[3, 0, -1]])).unwrap()).unwrap();
        assert_eq!(h, with);
    }

    #[test]
    fn saturation_and_minors() {
        let d = RatMat::from_i64(2, &[&[2, 2]]);
        assert_eq!(saturated_lattice_basis(&d), RatMat::from_i64(2, &[&[1, 1]]));
        assert_eq!(saturated_lattice_basis(&RatMat::identity(2)), RatMat::identity(2));
        let b = RatMat::from_i64(2, &[&[1, 0], &[1, 0], &[0, 1]]);
        assert_eq!(gcd_maximal_minors(&b).unwrap(), BigInt::one());
        let b = RatMat::from_i64(1, &[&[2], &[4]]);
        assert_eq!(gcd_maximal_minors(&b).unwrap(), BigInt::from(2));
    }
}
