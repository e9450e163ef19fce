//! Hamiltonian subtorus actions on symplectic toric manifolds, given by
//! the momentum polytope `P ⊂ R^n` of the big torus and an integral matrix
//! `B` (`n x k`) embedding the subtorus. The induced momentum map is
//! `π = Bᵀ : R^n → R^k`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{One, Signed};

use crate::cover::PiecewiseAffineCover;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{
    det, direction_intersect, gcd_maximal_minors, nullspace, primitive_scale, scale, AffineSubspace, Rat, RatMat,
    RatVec,
};
use crate::par::{self, Execution};
use crate::polyhedron::{project_relint, HPolytope, RelOpenCell};
use crate::stratifier::{stratify_with, Stratification};

#[derive(Debug)]
pub struct ToricAction {
    polytope: HPolytope,
    b: RatMat,
    projection: RatMat,
    faces: OnceLock<Vec<ProjectedFace>>,
}

impl Clone for ToricAction {
    fn clone(&self) -> Self {
        Self {
            polytope: self.polytope.clone(),
            b: self.b.clone(),
            projection: self.projection.clone(),
            faces: OnceLock::new(),
        }
    }
}

impl PartialEq for ToricAction {
    fn eq(&self, other: &Self) -> bool {
        self.polytope == other.polytope && self.b == other.b
    }
}

/// A nonempty face of the polytope and its image cell.
#[derive(Clone, Debug)]
struct ProjectedFace {
    active_set: Vec<usize>,
    image: RelOpenCell,
}

impl ToricAction {
    /// `b` is `n x k`, integral, of rank `k`.
    pub fn new(polytope: HPolytope, b: RatMat) -> Result<Self> {
        check_dim(polytope.ambient_dim(), b.nrows())?;
        if !b.is_integral() {
            return Err(Error::NonIntegralInput);
        }
        let rank = b.rank();
        if rank < b.ncols() {
            return Err(Error::RankDeficient { rows: b.nrows(), cols: b.ncols(), rank });
        }
        let projection = b.transpose();
        Ok(Self { polytope, b, projection, faces: OnceLock::new() })
    }

    /// Builds the action from the rows of `Bᵀ`.
    pub fn from_projection(polytope: HPolytope, bt: RatMat) -> Result<Self> {
        Self::new(polytope, bt.transpose())
    }

    pub fn polytope(&self) -> &HPolytope {
        &self.polytope
    }

    pub fn b(&self) -> &RatMat {
        &self.b
    }

    /// `Bᵀ`, the map on duals.
    pub fn projection(&self) -> &RatMat {
        &self.projection
    }

    /// `n`.
    pub fn n(&self) -> usize {
        self.b.nrows()
    }

    /// `k`.
    pub fn k(&self) -> usize {
        self.b.ncols()
    }

    pub fn minors_gcd(&self) -> BigInt {
        gcd_maximal_minors(&self.b).expect("B is integral")
    }

    /// The subtorus acts effectively when the maximal minors of `B` are coprime.
    pub fn is_effective(&self) -> bool {
        self.minors_gcd().is_one()
    }

    /// At every vertex the primitive normals of the tight facets form a
    /// basis of `Z^n`.
    pub fn is_delzant(&self) -> Result<bool> {
        let n = self.n();
        let lattice = self.polytope.face_lattice()?;
        let facets: Vec<&Vec<usize>> =
            lattice.faces.iter().filter(|f| f.dim == n as isize - 1).map(|f| &f.active_set).collect();
        let normal = |i: usize| {
            let w = &self.polytope.ineqs()[i].normal;
            scale(w, &primitive_scale(w))
        };
        for v in lattice.faces.iter().filter(|f| f.dim == 0) {
            let mut rows = Vec::new();
            for f in &facets {
                if let Some(&i) = f.iter().find(|i| v.active_set.contains(i)) {
                    if f.iter().all(|j| v.active_set.contains(j)) {
                        rows.push(normal(i));
                    }
                }
            }
            if rows.len() != n {
                return Ok(false);
            }
            let d = det(&RatMat::new(n, rows)?);
            if !d.abs().is_one() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn projected_faces(&self) -> Result<&[ProjectedFace]> {
        if let Some(f) = self.faces.get() {
            return Ok(f);
        }
        let lattice = self.polytope.face_lattice()?;
        let faces: Vec<&crate::polyhedron::Face> = lattice.nonempty_faces().collect();
        let out = par::try_map(Execution::default(), &faces, |f| {
            Ok::<_, Error>(ProjectedFace {
                active_set: f.active_set.clone(),
                image: project_relint(lattice, f, &self.projection)?,
            })
        })?;
        Ok(self.faces.get_or_init(|| out))
    }

    /// Isotropy data of every face whose image contains `x`.
    pub fn isotropy_at(&self, x: &[Rat]) -> Result<Vec<IsotropyData>> {
        check_dim(self.k(), x.len())?;
        let faces = self.projected_faces()?;
        let out: Vec<IsotropyData> =
            faces.iter().filter(|f| f.image.contains(x)).map(|f| self.isotropy_of(&f.active_set)).collect();
        if out.is_empty() {
            return Err(Error::PointOutsideImage);
        }
        Ok(out)
    }

    /// `{ξ : Bξ ∈ span(normals active at F)}` and its annihilator.
    fn isotropy_of(&self, active_set: &[usize]) -> IsotropyData {
        let (n, k) = (self.n(), self.k());
        // rows of [B | -Nᵀ], one per coordinate of R^n
        let rows: Vec<RatVec> = (0..n)
            .map(|r| {
                let mut row = self.b.row(r).clone();
                row.extend(active_set.iter().map(|&i| -self.polytope.ineqs()[i].normal[r].clone()));
                row
            })
            .collect();
        let ker = nullspace(&RatMat::new(k + active_set.len(), rows).expect("consistent widths"));
        let xis: Vec<RatVec> = ker.rows().iter().map(|r| r[..k].to_vec()).collect();
        let isotropy = RatMat::new(k, xis).expect("width k").row_space();
        let annihilator = nullspace(&isotropy);
        IsotropyData { active_set: active_set.to_vec(), isotropy, annihilator }
    }
}

/// Isotropy of the subtorus along the preimage of an open face.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsotropyData {
    pub active_set: Vec<usize>,
    /// RREF basis of the isotropy Lie algebra in `R^k`.
    pub isotropy: RatMat,
    /// RREF basis of its annihilator in `(R^k)*`.
    pub annihilator: RatMat,
}

/// Intersection of the annihilators of all isotropy algebras over `x`.
pub fn annihilator_intersection(data: &[IsotropyData]) -> Result<RatMat> {
    let k = data.first().map_or(0, |d| d.annihilator.ncols());
    let spaces: Vec<AffineSubspace> = data
        .iter()
        .map(|d| AffineSubspace::new(vec![Rat::from_integer(0.into()); k], &d.annihilator))
        .collect::<Result<_>>()?;
    direction_intersect(&spaces.iter().collect::<Vec<_>>())
}

/// The cover by images of open faces, with duplicate images merged.
pub fn momentum_cover(a: &ToricAction) -> Result<PiecewiseAffineCover> {
    Ok(momentum_cover_with_faces(a)?.0)
}

/// The cover together with, per member, the active sets of the faces
/// mapping onto it.
pub fn momentum_cover_with_faces(a: &ToricAction) -> Result<(PiecewiseAffineCover, Vec<Vec<Vec<usize>>>)> {
    let mut members: BTreeMap<RelOpenCell, BTreeSet<Vec<usize>>> = BTreeMap::new();
    for f in a.projected_faces()? {
        members.entry(f.image.clone()).or_default().insert(f.active_set.clone());
    }
    let (cells, faces): (Vec<_>, Vec<_>) =
        members.into_iter().map(|(c, fs)| (c, fs.into_iter().collect::<Vec<_>>())).unzip();
    Ok((PiecewiseAffineCover::new(a.k(), cells)?, faces))
}

pub fn hamiltonian_stratification(a: &ToricAction) -> Result<Stratification> {
    hamiltonian_stratification_with(a, Execution::default())
}

pub fn hamiltonian_stratification_with(a: &ToricAction, exec: Execution) -> Result<Stratification> {
    stratify_with(&momentum_cover(a)?, exec)
}

/// Strata over which every isotropy algebra vanishes.
pub fn regular_locus(a: &ToricAction, s: &Stratification) -> Result<BTreeSet<usize>> {
    let g = a.minors_gcd();
    if !g.is_one() {
        return Err(Error::NonEffectiveAction { gcd: g.to_string() });
    }
    let mut out = BTreeSet::new();
    for st in s.strata() {
        let data = a.isotropy_at(&st.sample_point())?;
        if data.iter().all(|d| d.isotropy.is_empty()) {
            out.insert(st.id);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{rat, rvec};
    use crate::polyhedron::Halfspace;

    fn hp(rows: &[(&[i64], i64)]) -> HPolytope {
        let dim = rows[0].0.len();
        HPolytope::new(dim, rows.iter().map(|(a, b)| Halfspace::new(rvec(a), rat(*b))).collect()).unwrap()
    }

    fn prism() -> ToricAction {
        let p = hp(&[(&[-1, 0, 0], 0), (&[1, 0, 0], 1), (&[0, -1, 0], 0), (&[0, 0, -1], 0), (&[0, 1, 1], 3)]);
        ToricAction::from_projection(p, RatMat::from_i64(3, &[&[1, 1, 0], &[0, 0, 1]])).unwrap()
    }

    fn square() -> HPolytope {
        hp(&[(&[-1, 0], 0), (&[1, 0], 1), (&[0, -1], 0), (&[0, 1], 1)])
    }

    #[test]
    fn prism_cover_and_isotropy() {
        let a = prism();
        assert!(a.is_effective());
        assert!(a.is_delzant().unwrap());
        let cover = momentum_cover(&a).unwrap();
        let dims: Vec<usize> = cover.members().iter().map(|m| m.dim()).collect();
        assert_eq!(cover.len(), 21);
        assert_eq!(dims.iter().filter(|&&d| d == 0).count(), 6);
        assert_eq!(dims.iter().filter(|&&d| d == 1).count(), 10);
        assert!(cover.validate().valid);

        let at = a.isotropy_at(&rvec(&[1, 2])).unwrap();
        let anns: BTreeSet<RatMat> =
            at.iter().filter(|d| d.isotropy.nrows() == 1).map(|d| d.annihilator.clone()).collect();
        let want: BTreeSet<RatMat> =
            [RatMat::from_i64(2, &[&[0, 1]]), RatMat::from_i64(2, &[&[1, -1]])].into_iter().collect();
        assert_eq!(anns, want);
        assert!(annihilator_intersection(&at).unwrap().is_empty());

        // (2, 1) lies on the wall x + y = 3: the edge {u = 0, v1 + v2 = 3}
        // has isotropy span(1, 1), so the local direction is span(1, -1)
        let wall = a.isotropy_at(&rvec(&[2, 1])).unwrap();
        assert_eq!(wall.len(), 3);
        assert_eq!(annihilator_intersection(&wall).unwrap(), RatMat::from_i64(2, &[&[1, -1]]));

        // over a generic point the fiber u in [0, 1] meets the interior and the
        // facets u = 0 and u = 1, all with trivial isotropy
        let generic = a.isotropy_at(&[rat(2), crate::linalg::ratio(1, 2)]).unwrap();
        assert_eq!(generic.len(), 3);
        assert!(generic.iter().all(|d| d.isotropy.is_empty() && d.annihilator == RatMat::identity(2)));

        let corner = a.isotropy_at(&rvec(&[0, 0])).unwrap();
        assert_eq!(corner.len(), 1);
        assert_eq!(corner[0].isotropy, RatMat::identity(2));
        assert_eq!(a.isotropy_at(&rvec(&[5, 5])), Err(Error::PointOutsideImage));
    }

    #[test]
    fn identity_and_collapsing_projections() {
        let a = ToricAction::new(square(), RatMat::identity(2)).unwrap();
        let cover = momentum_cover(&a).unwrap();
        assert_eq!(cover.len(), 9);
        let s = hamiltonian_stratification(&a).unwrap();
        assert_eq!(s.counts_by_dim(), vec![4, 4, 1]);
        assert_eq!(regular_locus(&a, &s).unwrap(), [8].into_iter().collect());

        let a = ToricAction::from_projection(square(), RatMat::from_i64(2, &[&[1, 0]])).unwrap();
        let (cover, faces) = momentum_cover_with_faces(&a).unwrap();
        assert_eq!(cover.len(), 3);
        // the open interval is the image of the interior and both horizontal edges
        let interval = cover.members().iter().position(|m| m.dim() == 1).unwrap();
        assert_eq!(faces[interval].len(), 3);
    }

    #[test]
    fn simplex_sum() {
        let p = hp(&[(&[-1, 0], 0), (&[0, -1], 0), (&[1, 1], 2)]);
        let a = ToricAction::from_projection(p, RatMat::from_i64(2, &[&[1, 1]])).unwrap();
        let s = hamiltonian_stratification(&a).unwrap();
        assert_eq!(s.counts_by_dim(), vec![2, 1]);
        assert_eq!(regular_locus(&a, &s).unwrap(), [2].into_iter().collect());
    }

    #[test]
    fn rejects_bad_matrices() {
        assert_eq!(
            ToricAction::new(square(), RatMat::new(1, vec![vec![crate::linalg::ratio(1, 2)], vec![rat(1)]]).unwrap()),
            Err(Error::NonIntegralInput)
        );
        assert!(matches!(
            ToricAction::new(square(), RatMat::from_i64(2, &[&[1, 2], &[2, 4]])),
            Err(Error::RankDeficient { .. })
        ));
        let a = ToricAction::new(square(), RatMat::from_i64(1, &[&[2], &[0]])).unwrap();
        assert!(!a.is_effective());
        let s = hamiltonian_stratification(&a).unwrap();
        assert!(matches!(regular_locus(&a, &s), Err(Error::NonEffectiveAction { .. })));
    }
}
