//! Exact rational polyhedra: H-polytopes, face lattices, relatively open
//! cells and common refinements of cell families.

mod cell;
mod face;
mod refine;

pub use cell::{cell_contains, RelOpenCell};
pub use face::{Face, FaceLattice};
pub use refine::{common_refinement, Refiner};

use std::collections::BTreeSet;
use std::sync::OnceLock;

use num_traits::Zero;

use crate::combinatorics::combinations;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, nullspace, rref, Rat, RatMat, RatVec};

/// The closed halfspace `normal · x <= offset`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Halfspace {
    pub normal: RatVec,
    pub offset: Rat,
}

impl Halfspace {
    pub fn new(normal: RatVec, offset: Rat) -> Self {
        Self { normal, offset }
    }

    /// `normal · x - offset`; nonpositive inside.
    pub fn slack(&self, x: &[Rat]) -> Rat {
        dot(&self.normal, x) - &self.offset
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        dot(&self.normal, x) <= self.offset
    }

    pub fn contains_strictly(&self, x: &[Rat]) -> bool {
        dot(&self.normal, x) < self.offset
    }

    pub fn is_tight(&self, x: &[Rat]) -> bool {
        dot(&self.normal, x) == self.offset
    }

    pub fn negated(&self) -> Halfspace {
        Halfspace { normal: self.normal.iter().map(|x| -x).collect(), offset: -self.offset.clone() }
    }
}

/// A polytope `{x : A x <= b}` in `R^n`.
#[derive(Clone, Debug)]
pub struct HPolytope {
    dim: usize,
    ineqs: Vec<Halfspace>,
    vertices: OnceLock<Vec<RatVec>>,
    lattice: OnceLock<FaceLattice>,
}

impl PartialEq for HPolytope {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.ineqs == other.ineqs
    }
}

impl Eq for HPolytope {}

impl HPolytope {
    /// Builds a polytope and checks that it is bounded and nonempty.
    pub fn new(dim: usize, ineqs: Vec<Halfspace>) -> Result<Self> {
        for h in &ineqs {
            check_dim(dim, h.normal.len())?;
        }
        let p = Self { dim, ineqs, vertices: OnceLock::new(), lattice: OnceLock::new() };
        p.vertices()?;
        Ok(p)
    }

    pub fn from_rows(a: &RatMat, b: &[Rat]) -> Result<Self> {
        check_dim(a.nrows(), b.len())?;
        let ineqs = a.rows().iter().zip(b).map(|(r, o)| Halfspace::new(r.clone(), o.clone())).collect();
        Self::new(a.ncols(), ineqs)
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn ineqs(&self) -> &[Halfspace] {
        &self.ineqs
    }

    /// Exact, deduplicated, lexicographically sorted vertex list.
    pub fn vertices(&self) -> Result<&[RatVec]> {
        if let Some(v) = self.vertices.get() {
            return Ok(v);
        }
        let tineqs: Vec<(RatVec, Rat)> = self.ineqs.iter().map(|h| (h.normal.clone(), h.offset.clone())).collect();
        if !is_bounded(self.dim, &tineqs) {
            return Err(Error::UnboundedPolytope);
        }
        let verts = enumerate_vertices(self.dim, &tineqs);
        if verts.is_empty() {
            return Err(Error::EmptyPolytope);
        }
        Ok(self.vertices.get_or_init(|| verts))
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        self.ineqs.iter().all(|h| h.contains(x))
    }

    pub fn face_lattice(&self) -> Result<&FaceLattice> {
        if let Some(l) = self.lattice.get() {
            return Ok(l);
        }
        let lattice = FaceLattice::build(self.vertices()?, &self.ineqs)?;
        Ok(self.lattice.get_or_init(|| lattice))
    }
}

/// The cell `π(relint F)` for `π(x) = bt · x`. Since `F` is compact and
/// convex this is `relint(π(F))`, with carrier `π(aff F)`.
pub fn project_relint(lattice: &FaceLattice, face: &Face, bt: &RatMat) -> Result<RelOpenCell> {
    let rank = bt.rank();
    if rank < bt.nrows() {
        return Err(Error::RankDeficient { rows: bt.nrows(), cols: bt.ncols(), rank });
    }
    if let Some(v) = lattice.vertices.first() {
        check_dim(bt.ncols(), v.len())?;
    }
    if face.vertex_ids.is_empty() {
        return Err(Error::EmptyPolytope);
    }
    let pts: Vec<RatVec> = face.vertex_ids.iter().map(|&i| bt.mul_vec(&lattice.vertices[i])).collect();
    RelOpenCell::from_vertices(&pts)
}

/// Vertices of `{t in R^d : w_i · t <= c_i}` by enumerating all bases of
/// `d` tight constraints.
pub(crate) fn enumerate_vertices(d: usize, ineqs: &[(RatVec, Rat)]) -> Vec<RatVec> {
    let mut rows: Vec<&(RatVec, Rat)> = Vec::new();
    for ineq in ineqs {
        if ineq.0.iter().all(Zero::is_zero) {
            if ineq.1 < Rat::zero() {
                return Vec::new();
            }
        } else {
            rows.push(ineq);
        }
    }
    if d == 0 {
        return vec![Vec::new()];
    }
    let feasible = |x: &RatVec| rows.iter().all(|(w, c)| &dot(w, x) <= c);
    let mut found = BTreeSet::new();
    for subset in combinations(rows.len(), d) {
        let aug = subset
            .iter()
            .map(|&i| {
                let mut r = rows[i].0.clone();
                r.push(rows[i].1.clone());
                r
            })
            .collect();
        let (r, pivots) = rref(&RatMat::new(d + 1, aug).expect("square system"));
        if pivots.len() != d || pivots[d - 1] != d - 1 {
            continue;
        }
        let x: RatVec = (0..d).map(|i| r.row(i)[d].clone()).collect();
        if !found.contains(&x) && feasible(&x) {
            found.insert(x);
        }
    }
    found.into_iter().collect()
}

/// Whether the recession cone `{t : w_i · t <= 0}` is trivial.
pub(crate) fn is_bounded(d: usize, ineqs: &[(RatVec, Rat)]) -> bool {
    if d == 0 {
        return true;
    }
    let normals: Vec<RatVec> =
        ineqs.iter().filter(|(w, _)| !w.iter().all(Zero::is_zero)).map(|(w, _)| w.clone()).collect();
    let w = RatMat::new(d, normals.clone()).expect("normals have width d");
    if w.rank() < d {
        return false;
    }
    let recedes = |r: &RatVec| normals.iter().all(|n| dot(n, r) <= Rat::zero());
    for subset in combinations(normals.len(), d - 1) {
        let m = RatMat::new(d, subset.iter().map(|&i| normals[i].clone()).collect()).unwrap();
        let ker = nullspace(&m);
        if ker.nrows() != 1 {
            continue;
        }
        let r = ker.row(0).clone();
        let neg: RatVec = r.iter().map(|x| -x).collect();
        if recedes(&r) || recedes(&neg) {
            return false;
        }
    }
    true
}
