use std::collections::BTreeSet;

use num_traits::Zero;
use rand::Rng;

use super::{enumerate_vertices, is_bounded, FaceLattice, Halfspace};
use crate::combinatorics::combinations;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{
    affine_rank, dot, nullspace, primitive_scale, rat, scale, sub, AffineSubspace, Rat, RatMat, RatVec,
};

/// A relatively open rational polytope: the relative interior of
/// `carrier ∩ {closed_ineqs}`.
///
/// Stored canonically. The inequalities are exactly the facets of the closure
/// inside the carrier, with primitive integer normals supported on the
/// carrier's pivot columns, sorted. The cell is the set of carrier points where
/// every facet inequality holds strictly.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RelOpenCell {
    carrier: AffineSubspace,
    ineqs: Vec<Halfspace>,
    vertices: Vec<RatVec>,
}

impl RelOpenCell {
    /// The relative interior of `carrier ∩ {ineqs}`; `None` when empty.
    pub fn from_closure(carrier: AffineSubspace, ineqs: &[Halfspace]) -> Result<Option<Self>> {
        for h in ineqs {
            check_dim(carrier.ambient_dim(), h.normal.len())?;
        }
        let t = restrict(&carrier, ineqs);
        if !is_bounded(carrier.dim(), &t) && !enumerate_vertices(carrier.dim(), &t).is_empty() {
            return Err(Error::UnboundedPolytope);
        }
        Ok(Self::build(carrier, ineqs))
    }

    /// Canonicalizing constructor for closures already known to be bounded.
    pub(crate) fn build(carrier: AffineSubspace, ineqs: &[Halfspace]) -> Option<Self> {
        let d = carrier.dim();
        let t = restrict(&carrier, ineqs);
        let tverts = enumerate_vertices(d, &t);
        if tverts.is_empty() {
            return None;
        }
        let refs: Vec<&RatVec> = tverts.iter().collect();
        if (affine_rank(&refs) as usize) < d {
            let lifted: Vec<RatVec> = tverts.iter().map(|v| carrier.lift(v)).collect();
            let hull = AffineSubspace::from_points(&lifted).expect("nonempty vertex set");
            return Self::build(hull, ineqs);
        }
        let mut facets = BTreeSet::new();
        for (w, c) in &t {
            if w.iter().all(Zero::is_zero) {
                continue;
            }
            let tight: Vec<&RatVec> = tverts.iter().filter(|v| &dot(w, v) == c).collect();
            if d >= 1 && affine_rank(&tight) == d as isize - 1 {
                let s = primitive_scale(w);
                facets.insert((scale(w, &s), c * &s));
            }
        }
        let pivots = carrier.pivots();
        let n = carrier.ambient_dim();
        let ineqs = facets
            .into_iter()
            .map(|(w, c)| {
                let mut normal = vec![Rat::zero(); n];
                for (p, x) in pivots.iter().zip(w) {
                    normal[*p] = x;
                }
                Halfspace::new(normal, c)
            })
            .collect();
        let mut vertices: Vec<RatVec> = tverts.iter().map(|v| carrier.lift(v)).collect();
        vertices.sort();
        Some(Self { carrier, ineqs, vertices })
    }

    pub fn point(p: RatVec) -> Self {
        Self { carrier: AffineSubspace::point(p.clone()), ineqs: Vec::new(), vertices: vec![p] }
    }

    /// Relative interior of the convex hull of `points`.
    pub fn from_vertices(points: &[RatVec]) -> Result<Self> {
        let carrier = AffineSubspace::from_points(points)?;
        for p in points {
            check_dim(carrier.ambient_dim(), p.len())?;
        }
        let d = carrier.dim();
        if d == 0 {
            return Ok(Self::point(carrier.base().clone()));
        }
        let pts: BTreeSet<RatVec> = points.iter().map(|p| carrier.coords(p)).collect();
        let pts: Vec<RatVec> = pts.into_iter().collect();
        let mut halfspaces = BTreeSet::new();
        for subset in combinations(pts.len(), d) {
            let base = &pts[subset[0]];
            let diffs: Vec<RatVec> = subset[1..].iter().map(|&i| sub(&pts[i], base)).collect();
            let normal_space = nullspace(&RatMat::new(d, diffs).expect("width d"));
            if normal_space.nrows() != 1 {
                continue;
            }
            let w = normal_space.row(0).clone();
            let c = dot(&w, base);
            let (mut le, mut ge) = (true, true);
            for p in &pts {
                let v = dot(&w, p);
                le &= v <= c;
                ge &= v >= c;
            }
            if le {
                halfspaces.insert((w.clone(), c.clone()));
            }
            if ge {
                halfspaces.insert((w.iter().map(|x| -x).collect(), -c));
            }
        }
        let pivots = carrier.pivots();
        let n = carrier.ambient_dim();
        let ineqs: Vec<Halfspace> = halfspaces
            .into_iter()
            .map(|(w, c)| {
                let mut normal = vec![Rat::zero(); n];
                for (p, x) in pivots.iter().zip(w) {
                    normal[*p] = x;
                }
                Halfspace::new(normal, c)
            })
            .collect();
        Self::build(carrier, &ineqs).ok_or(Error::EmptyPolytope)
    }

    pub fn carrier(&self) -> &AffineSubspace {
        &self.carrier
    }

    pub fn ineqs(&self) -> &[Halfspace] {
        &self.ineqs
    }

    /// Vertices of the closure, sorted.
    pub fn vertices(&self) -> &[RatVec] {
        &self.vertices
    }

    pub fn dim(&self) -> usize {
        self.carrier.dim()
    }

    pub fn ambient_dim(&self) -> usize {
        self.carrier.ambient_dim()
    }

    /// Proper faces removed from the closure; every proper face lies in a
    /// facet, so these are the facet singletons.
    pub fn excluded_faces(&self) -> Vec<Vec<usize>> {
        (0..self.ineqs.len()).map(|i| vec![i]).collect()
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        self.carrier.contains_point(x) && self.ineqs.iter().all(|h| h.contains_strictly(x))
    }

    pub fn closure_contains(&self, x: &[Rat]) -> bool {
        self.carrier.contains_point(x) && self.ineqs.iter().all(|h| h.contains(x))
    }

    /// Whether `other ⊂ closure(self)`.
    pub fn closure_contains_cell(&self, other: &RelOpenCell) -> bool {
        other.vertices.iter().all(|v| self.closure_contains(v))
    }

    /// Whether `other ⊂ self`.
    pub fn contains_cell(&self, other: &RelOpenCell) -> bool {
        self.closure_contains_cell(other) && self.contains(&other.sample_point())
    }

    /// Barycenter of the closure's vertices, a point of the cell.
    pub fn sample_point(&self) -> RatVec {
        let n = self.ambient_dim();
        let k = rat(self.vertices.len() as i64);
        let mut acc = vec![Rat::zero(); n];
        for v in &self.vertices {
            for (a, x) in acc.iter_mut().zip(v) {
                *a += x;
            }
        }
        acc.into_iter().map(|a| a / &k).collect()
    }

    /// A random point of the cell: a convex combination of the closure
    /// vertices with positive integer weights.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> RatVec {
        let n = self.ambient_dim();
        let mut acc = vec![Rat::zero(); n];
        let mut total = Rat::zero();
        for v in &self.vertices {
            let w = rat(rng.gen_range(1..=12));
            for (a, x) in acc.iter_mut().zip(v) {
                *a += x * &w;
            }
            total += w;
        }
        acc.into_iter().map(|a| a / &total).collect()
    }

    /// Relative interior of `closure(self) ∩ closure(other)`.
    pub fn closure_intersection(&self, other: &RelOpenCell) -> Option<RelOpenCell> {
        if !boxes_overlap(&self.vertices, &other.vertices) {
            return None;
        }
        let carrier = self.carrier.intersect(&other.carrier).ok()??;
        let ineqs: Vec<Halfspace> = self.ineqs.iter().chain(&other.ineqs).cloned().collect();
        Self::build(carrier, &ineqs)
    }

    /// Whether `other` meets `closure(self)`.
    pub fn closure_meets(&self, other: &RelOpenCell) -> bool {
        if self.closure_contains_cell(other) {
            return true;
        }
        // If a convex subset of closure(other) meets relint(closure(other)),
        // its own relative interior lies inside the cell.
        self.closure_intersection(other).is_some_and(|r| other.contains(&r.sample_point()))
    }

    /// Whether the two relatively open cells share a point.
    pub fn meets(&self, other: &RelOpenCell) -> bool {
        self.closure_intersection(other).is_some_and(|r| {
            let s = r.sample_point();
            self.contains(&s) && other.contains(&s)
        })
    }

    /// Face lattice of the closure.
    pub fn face_lattice(&self) -> FaceLattice {
        FaceLattice::build(&self.vertices, &self.ineqs).expect("cell closures are polytopes")
    }

    /// Relative interiors of all nonempty faces of the closure.
    pub fn face_cells(&self) -> Vec<RelOpenCell> {
        let l = self.face_lattice();
        l.nonempty_faces().map(|f| RelOpenCell::from_vertices(&l.face_vertices(f)).expect("nonempty face")).collect()
    }

    /// Image under an injective linear map `x ↦ m x`.
    pub fn map_linear(&self, m: &RatMat) -> Result<RelOpenCell> {
        check_dim(m.ncols(), self.ambient_dim())?;
        let pts: Vec<RatVec> = self.vertices.iter().map(|v| m.mul_vec(v)).collect();
        RelOpenCell::from_vertices(&pts)
    }

    /// Whether the linear form `a` is constant on the carrier.
    pub(crate) fn form_constant_on_carrier(&self, a: &[Rat]) -> bool {
        self.carrier.restrict_form(a).iter().all(Zero::is_zero)
    }
}

/// Checked membership of a point in a relatively open cell.
pub fn cell_contains(c: &RelOpenCell, x: &[Rat]) -> Result<bool> {
    check_dim(c.ambient_dim(), x.len())?;
    Ok(c.contains(x))
}

fn restrict(carrier: &AffineSubspace, ineqs: &[Halfspace]) -> Vec<(RatVec, Rat)> {
    ineqs.iter().map(|h| (carrier.restrict_form(&h.normal), &h.offset - dot(&h.normal, carrier.base()))).collect()
}

fn boxes_overlap(a: &[RatVec], b: &[RatVec]) -> bool {
    let n = a.first().map_or(0, Vec::len);
    (0..n).all(|j| {
        let lo_a = a.iter().map(|v| &v[j]).min().unwrap();
        let hi_a = a.iter().map(|v| &v[j]).max().unwrap();
        let lo_b = b.iter().map(|v| &v[j]).min().unwrap();
        let hi_b = b.iter().map(|v| &v[j]).max().unwrap();
        lo_a <= hi_b && lo_b <= hi_a
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ratio, rvec};

    fn pts(v: &[&[i64]]) -> Vec<RatVec> {
        v.iter().map(|p| rvec(p)).collect()
    }

    #[test]
    fn open_segment_membership() {
        let seg = RelOpenCell::from_vertices(&pts(&[&[1, 0], &[1, 3]])).unwrap();
        assert_eq!(seg.dim(), 1);
        assert!(cell_contains(&seg, &rvec(&[1, 2])).unwrap());
        assert!(!cell_contains(&seg, &rvec(&[1, 3])).unwrap());
        assert!(!cell_contains(&seg, &rvec(&[2, 2])).unwrap());
        assert!(matches!(cell_contains(&seg, &rvec(&[1])), Err(Error::DimensionMismatch { .. })));
        assert_eq!(seg.ineqs().len(), 2);
    }

    #[test]
    fn quadrilateral_boundary_excluded() {
        let quad = RelOpenCell::from_vertices(&pts(&[&[0, 0], &[4, 0], &[1, 3], &[0, 3]])).unwrap();
        assert_eq!(quad.ineqs().len(), 4);
        assert!(!quad.contains(&rvec(&[2, 2])));
        assert!(quad.closure_contains(&rvec(&[2, 2])));
        assert!(quad.contains(&rvec(&[2, 1])));
        assert!(quad.contains(&quad.sample_point()));
    }

    #[test]
    fn canonical_regardless_of_construction() {
        let a = RelOpenCell::from_vertices(&pts(&[&[0, 0], &[2, 0], &[0, 2], &[1, 0]])).unwrap();
        let ineqs = vec![
            Halfspace::new(rvec(&[-3, 0]), rat(0)),
            Halfspace::new(rvec(&[0, -1]), rat(0)),
            Halfspace::new(rvec(&[2, 2]), rat(4)),
            Halfspace::new(rvec(&[1, 0]), rat(7)),
        ];
        let b = RelOpenCell::from_closure(AffineSubspace::whole(2), &ineqs).unwrap().unwrap();
        assert_eq!(a, b);
        assert_eq!(a.ineqs().len(), 3);
    }

    #[test]
    fn implicit_equalities_shrink_carrier() {
        let ineqs = vec![
            Halfspace::new(rvec(&[0, 1]), rat(1)),
            Halfspace::new(rvec(&[0, -1]), rat(-1)),
            Halfspace::new(rvec(&[1, 0]), rat(2)),
            Halfspace::new(rvec(&[-1, 0]), rat(0)),
        ];
        let c = RelOpenCell::from_closure(AffineSubspace::whole(2), &ineqs).unwrap().unwrap();
        assert_eq!(c.dim(), 1);
        assert!(c.contains(&rvec(&[1, 1])));
        assert_eq!(c, RelOpenCell::from_vertices(&pts(&[&[0, 1], &[2, 1]])).unwrap());
    }

    #[test]
    fn intersections() {
        let sq = RelOpenCell::from_vertices(&pts(&[&[0, 0], &[2, 0], &[0, 2], &[2, 2]])).unwrap();
        let edge = RelOpenCell::from_vertices(&pts(&[&[2, 0], &[2, 2]])).unwrap();
        assert!(!sq.meets(&edge));
        assert!(sq.closure_meets(&edge));
        assert!(sq.closure_contains_cell(&edge));
        let long = RelOpenCell::from_vertices(&pts(&[&[2, 1], &[2, 5]])).unwrap();
        assert!(sq.closure_meets(&long));
        assert!(!sq.closure_contains_cell(&long));
        let far = RelOpenCell::from_vertices(&pts(&[&[3, 0], &[3, 2]])).unwrap();
        assert!(!sq.closure_meets(&far));
        let diag = RelOpenCell::from_vertices(&pts(&[&[1, 1], &[3, 3]])).unwrap();
        assert!(sq.meets(&diag));
        let p = RelOpenCell::point(vec![ratio(1, 2), ratio(1, 2)]);
        assert!(sq.contains_cell(&p));
    }
}
