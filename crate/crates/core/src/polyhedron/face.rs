use std::collections::{BTreeSet, VecDeque};

use super::Halfspace;
use crate::error::Result;
use crate::linalg::{affine_rank, AffineSubspace, RatVec};

/// A face of a polytope, identified by the vertices it contains.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face {
    /// Inequalities tight on the whole face.
    pub active_set: Vec<usize>,
    /// `None` for the empty face.
    pub affine_hull: Option<AffineSubspace>,
    /// Affine dimension; `-1` for the empty face.
    pub dim: isize,
    pub vertex_ids: Vec<usize>,
}

/// Face lattice built from vertex-facet incidences.
#[derive(Clone, Debug)]
pub struct FaceLattice {
    pub vertices: Vec<RatVec>,
    /// Sorted by `(dim, active_set)`; index 0 is the empty face.
    pub faces: Vec<Face>,
    /// `(i, j)` when face `i` is a facet of face `j`.
    pub covers: Vec<(usize, usize)>,
}

impl FaceLattice {
    pub(crate) fn build(vertices: &[RatVec], ineqs: &[Halfspace]) -> Result<Self> {
        let nv = vertices.len();
        let tight: Vec<BTreeSet<usize>> =
            ineqs.iter().map(|h| (0..nv).filter(|&v| h.is_tight(&vertices[v])).collect()).collect();
        let all: BTreeSet<usize> = (0..nv).collect();
        let generators: BTreeSet<BTreeSet<usize>> = tight.iter().filter(|t| t.len() < nv).cloned().collect();

        let mut seen: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
        let mut queue = VecDeque::from([all.clone()]);
        seen.insert(all);
        for g in &generators {
            if seen.insert(g.clone()) {
                queue.push_back(g.clone());
            }
        }
        while let Some(face) = queue.pop_front() {
            for g in &generators {
                let meet: BTreeSet<usize> = face.intersection(g).copied().collect();
                if seen.insert(meet.clone()) {
                    queue.push_back(meet);
                }
            }
        }
        seen.insert(BTreeSet::new());

        let mut faces: Vec<Face> = seen
            .into_iter()
            .map(|vs| {
                let active_set = (0..ineqs.len()).filter(|&i| vs.is_subset(&tight[i])).collect();
                let pts: Vec<&RatVec> = vs.iter().map(|&v| &vertices[v]).collect();
                let dim = affine_rank(&pts);
                let affine_hull = if vs.is_empty() {
                    None
                } else {
                    let owned: Vec<RatVec> = pts.into_iter().cloned().collect();
                    Some(AffineSubspace::from_points(&owned).expect("nonempty face"))
                };
                Face { active_set, affine_hull, dim, vertex_ids: vs.into_iter().collect() }
            })
            .collect();
        faces.sort_by(|a, b| (a.dim, &a.active_set).cmp(&(b.dim, &b.active_set)));

        let sets: Vec<BTreeSet<usize>> = faces.iter().map(|f| f.vertex_ids.iter().copied().collect()).collect();
        let mut covers = Vec::new();
        for (i, fi) in faces.iter().enumerate() {
            for (j, fj) in faces.iter().enumerate() {
                if fj.dim == fi.dim + 1 && sets[i].is_subset(&sets[j]) {
                    covers.push((i, j));
                }
            }
        }
        Ok(Self { vertices: vertices.to_vec(), faces, covers })
    }

    pub fn dim(&self) -> isize {
        self.faces.last().map_or(-1, |f| f.dim)
    }

    /// Number of faces of each dimension `0..=dim`.
    pub fn f_vector(&self) -> Vec<usize> {
        let d = self.dim();
        (0..=d).map(|k| self.faces.iter().filter(|f| f.dim == k).count()).collect()
    }

    pub fn nonempty_faces(&self) -> impl Iterator<Item = &Face> {
        self.faces.iter().filter(|f| f.dim >= 0)
    }

    pub fn face_vertices(&self, face: &Face) -> Vec<RatVec> {
        face.vertex_ids.iter().map(|&v| self.vertices[v].clone()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::hp;

    #[test]
    fn graded_and_vertex_sets_are_facet_intersections() {
        let cube = hp(&[
            (&[-1, 0, 0], 0),
            (&[1, 0, 0], 1),
            (&[0, -1, 0], 0),
            (&[0, 1, 0], 1),
            (&[0, 0, -1], 0),
            (&[0, 0, 1], 1),
        ]);
        let l = cube.face_lattice().unwrap();
        assert_eq!(l.f_vector(), vec![8, 12, 6, 1]);
        // every face of dim d >= 0 is covered by a face of dim d + 1 up to the top
        for (i, f) in l.faces.iter().enumerate() {
            if f.dim < l.dim() {
                assert!(l.covers.iter().any(|&(a, _)| a == i));
            }
        }
        // vertex sets are intersections of the facets containing them
        let facets: Vec<_> = l.faces.iter().filter(|f| f.dim == 2).collect();
        for f in l.nonempty_faces() {
            let mut meet: Vec<usize> = (0..8).collect();
            for g in facets.iter().filter(|g| f.vertex_ids.iter().all(|v| g.vertex_ids.contains(v))) {
                meet.retain(|v| g.vertex_ids.contains(v));
            }
            assert_eq!(meet, f.vertex_ids);
        }
    }
}
