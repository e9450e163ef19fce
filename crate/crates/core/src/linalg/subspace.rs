use num_traits::Zero;

use super::{dot, nullspace, solve, sub, Rat, RatMat, RatVec};
use crate::error::{check_dim, Error, Result};

/// An affine subspace `base + span(directions)` in canonical form.
///
/// The direction rows are the nonzero rows of a reduced row echelon form and
/// the base point vanishes on every pivot column, so two equal subspaces have
/// identical encodings and `==` is set equality.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AffineSubspace {
    directions: RatMat,
    base: RatVec,
}

impl AffineSubspace {
    /// The affine subspace through `point` spanned by the rows of `spanning`.
    pub fn new(point: RatVec, spanning: &RatMat) -> Result<Self> {
        check_dim(point.len(), spanning.ncols())?;
        let directions = spanning.row_space();
        Ok(Self::from_canonical_directions(point, directions))
    }

    fn from_canonical_directions(mut base: RatVec, directions: RatMat) -> Self {
        for row in directions.rows() {
            let p = leading_index(row).expect("row space rows are nonzero");
            if base[p].is_zero() {
                continue;
            }
            let f = base[p].clone();
            for (b, d) in base.iter_mut().zip(row) {
                *b -= &f * d;
            }
        }
        Self { directions, base }
    }

    pub fn point(p: RatVec) -> Self {
        let n = p.len();
        Self { directions: RatMat::empty(n), base: p }
    }

    pub fn whole(n: usize) -> Self {
        Self { directions: RatMat::identity(n), base: vec![Rat::zero(); n] }
    }

    /// Affine hull of a nonempty point set.
    pub fn from_points(points: &[RatVec]) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptyPolytope)?;
        let diffs = points[1..].iter().map(|p| sub(p, first)).collect();
        Self::new(first.clone(), &RatMat::new(first.len(), diffs)?)
    }

    /// Solution set of `eqs · x = rhs`, or `None` when inconsistent.
    pub fn from_equations(eqs: &RatMat, rhs: &[Rat]) -> Option<Self> {
        let x = solve(eqs, rhs)?;
        Some(Self::from_canonical_directions(x, nullspace(eqs)))
    }

    pub fn ambient_dim(&self) -> usize {
        self.base.len()
    }

    pub fn dim(&self) -> usize {
        self.directions.nrows()
    }

    pub fn base(&self) -> &RatVec {
        &self.base
    }

    pub fn directions(&self) -> &RatMat {
        &self.directions
    }

    /// Pivot columns of the direction basis; the coordinates of a point of
    /// the subspace in these columns parametrize it.
    pub fn pivots(&self) -> Vec<usize> {
        self.directions.rows().iter().filter_map(|r| leading_index(r)).collect()
    }

    /// Canonical equations `E x = e` cutting out the subspace.
    pub fn equations(&self) -> (RatMat, RatVec) {
        let eqs = nullspace(&self.directions);
        let rhs = eqs.rows().iter().map(|r| dot(r, &self.base)).collect();
        (eqs, rhs)
    }

    /// Intrinsic coordinates of `x` (assumed to lie in the subspace).
    pub fn coords(&self, x: &[Rat]) -> RatVec {
        self.pivots().into_iter().map(|p| &x[p] - &self.base[p]).collect()
    }

    pub fn lift(&self, t: &[Rat]) -> RatVec {
        let mut x = self.base.clone();
        for (row, s) in self.directions.rows().iter().zip(t) {
            if s.is_zero() {
                continue;
            }
            for (xi, d) in x.iter_mut().zip(row) {
                *xi += s * d;
            }
        }
        x
    }

    pub fn contains_point(&self, x: &[Rat]) -> bool {
        x.len() == self.ambient_dim() && self.lift(&self.coords(x)).as_slice() == x
    }

    pub fn contains_direction(&self, v: &[Rat]) -> bool {
        let t: RatVec = self.pivots().into_iter().map(|p| v[p].clone()).collect();
        let mut w = vec![Rat::zero(); v.len()];
        for (row, s) in self.directions.rows().iter().zip(&t) {
            for (wi, d) in w.iter_mut().zip(row) {
                *wi += s * d;
            }
        }
        w.as_slice() == v
    }

    pub fn contains_subspace(&self, other: &AffineSubspace) -> bool {
        self.contains_point(&other.base) && other.directions.rows().iter().all(|d| self.contains_direction(d))
    }

    /// Restriction of the linear form `a` to intrinsic coordinates:
    /// `a · lift(t) = w · t + a · base`.
    pub fn restrict_form(&self, a: &[Rat]) -> RatVec {
        self.directions.rows().iter().map(|d| dot(d, a)).collect()
    }

    pub fn intersect(&self, other: &AffineSubspace) -> Result<Option<AffineSubspace>> {
        subspace_intersect(self, other)
    }

    /// Image under the linear map `x ↦ m x`.
    pub fn map_linear(&self, m: &RatMat) -> Result<AffineSubspace> {
        check_dim(m.ncols(), self.ambient_dim())?;
        let dirs = self.directions.rows().iter().map(|d| m.mul_vec(d)).collect();
        AffineSubspace::new(m.mul_vec(&self.base), &RatMat::new(m.nrows(), dirs)?)
    }
}

fn leading_index(row: &[Rat]) -> Option<usize> {
    row.iter().position(|x| !x.is_zero())
}

/// Intersection of two affine subspaces; `None` when they are disjoint.
pub fn subspace_intersect(a: &AffineSubspace, b: &AffineSubspace) -> Result<Option<AffineSubspace>> {
    check_dim(a.ambient_dim(), b.ambient_dim())?;
    let (ea, ra) = a.equations();
    let (eb, rb) = b.equations();
    let eqs = ea.stack(&eb)?;
    let rhs: RatVec = ra.into_iter().chain(rb).collect();
    Ok(AffineSubspace::from_equations(&eqs, &rhs))
}

/// Canonical basis of the intersection of the direction spaces.
pub fn direction_intersect(spaces: &[&AffineSubspace]) -> Result<RatMat> {
    let first = spaces.first().ok_or(Error::DimensionMismatch { expected: 1, found: 0 })?;
    let n = first.ambient_dim();
    let mut constraints = RatMat::empty(n);
    for s in spaces {
        check_dim(n, s.ambient_dim())?;
        constraints = constraints.stack(&nullspace(s.directions()))?;
    }
    Ok(nullspace(&constraints))
}
