//! Finite piecewise-affine covers by relatively open rational polytopes.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{affine_rank, format_point, Rat, RatVec};
use crate::par::{self, Execution};
use crate::polyhedron::{Refiner, RelOpenCell};

/// A finite cover of `X = ∪ members` by affine-open cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiecewiseAffineCover {
    ambient_dim: usize,
    members: Vec<RelOpenCell>,
}

impl PiecewiseAffineCover {
    pub fn new(ambient_dim: usize, members: Vec<RelOpenCell>) -> Result<Self> {
        for m in &members {
            check_dim(ambient_dim, m.ambient_dim())?;
        }
        Ok(Self { ambient_dim, members })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn members(&self) -> &[RelOpenCell] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Members whose closure is not contained in another member's closure.
    /// `Cl(X)` is the union of their closures.
    pub fn support_closure(&self) -> Vec<&RelOpenCell> {
        let mut out: Vec<&RelOpenCell> = Vec::new();
        for (i, m) in self.members.iter().enumerate() {
            let dominated = self
                .members
                .iter()
                .enumerate()
                .any(|(j, o)| j != i && o.closure_contains_cell(m) && (!m.closure_contains_cell(o) || j < i));
            if !dominated {
                out.push(m);
            }
        }
        out
    }

    /// Indices of members containing `x`.
    pub fn membership_signature(&self, x: &[Rat]) -> Result<Vec<usize>> {
        check_dim(self.ambient_dim, x.len())?;
        let sig: Vec<usize> = (0..self.members.len()).filter(|&i| self.members[i].contains(x)).collect();
        if sig.is_empty() {
            return Err(Error::PointOutsideSupport);
        }
        Ok(sig)
    }

    pub fn validate(&self) -> ValidationReport {
        self.validate_with(Execution::default())
    }

    /// Checks that each member is open in its affine hull and that its
    /// closure within `X` is a union of members.
    pub fn validate_with(&self, exec: Execution) -> ValidationReport {
        match support_refinement(self, exec) {
            Ok(r) => self.report_from(&r, exec),
            Err(e) => ValidationReport { members: Vec::new(), valid: false, error: Some(e.to_string()) },
        }
    }

    pub(crate) fn report_from(&self, refinement: &[Piece], exec: Execution) -> ValidationReport {
        let idx: Vec<usize> = (0..self.members.len()).collect();
        let members = par::map(exec, &idx, |&i| {
            let m = &self.members[i];
            let verts: Vec<&RatVec> = m.vertices().iter().collect();
            let open_in_hull = affine_rank(&verts) == m.dim() as isize && m.contains(&m.sample_point());
            let witnesses: Vec<usize> =
                (0..self.members.len()).filter(|&j| m.closure_contains_cell(&self.members[j])).collect();
            let uncovered: Vec<RelOpenCell> = refinement
                .iter()
                .filter(|p| m.closure_contains_cell(&p.cell))
                .filter(|p| !p.signature.iter().any(|j| witnesses.binary_search(j).is_ok()))
                .map(|p| p.cell.clone())
                .collect();
            MemberReport { member: i, open_in_hull, closure_is_union: uncovered.is_empty(), witnesses, uncovered }
        });
        let valid = members.iter().all(|m| m.open_in_hull && m.closure_is_union);
        ValidationReport { members, valid, error: None }
    }
}

/// Per-member outcome of [`PiecewiseAffineCover::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MemberReport {
    pub member: usize,
    pub open_in_hull: bool,
    pub closure_is_union: bool,
    /// Members contained in the closure of this one.
    pub witnesses: Vec<usize>,
    /// Refined cells of `Cl(member) ∩ X` not covered by any witness.
    pub uncovered: Vec<RelOpenCell>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub members: Vec<MemberReport>,
    pub valid: bool,
    /// Set when the refinement itself could not be computed.
    pub error: Option<String>,
}

impl ValidationReport {
    pub fn offending(&self) -> Vec<usize> {
        self.members.iter().filter(|m| !m.open_in_hull || !m.closure_is_union).map(|m| m.member).collect()
    }

    pub fn into_result(self) -> Result<()> {
        if self.valid {
            Ok(())
        } else {
            Err(Error::InvalidCover { offending: self.offending() })
        }
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "cover is {}", if self.valid { "valid" } else { "invalid" })?;
        if let Some(e) = &self.error {
            writeln!(f, "error: {e}")?;
        }
        for m in &self.members {
            write!(f, "member {}: ", m.member)?;
            if !m.open_in_hull {
                write!(f, "not open in its affine hull; ")?;
            }
            if m.closure_is_union {
                writeln!(f, "closure = union of members {:?}", m.witnesses)?;
            } else {
                writeln!(f, "closure is not a union of members; uncovered cells:")?;
                for c in &m.uncovered {
                    let pts: Vec<String> = c.vertices().iter().map(|v| format_point(v)).collect();
                    writeln!(f, "  dim {} with vertices {}", c.dim(), pts.join(" "))?;
                }
            }
        }
        Ok(())
    }
}

/// A cell of the support refinement with its membership signature.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct Piece {
    pub cell: RelOpenCell,
    pub signature: Vec<usize>,
}

/// Partition of `X` into relatively open cells on which membership in
/// every member, and in every face of every member closure, is constant.
pub(crate) fn support_refinement(cover: &PiecewiseAffineCover, exec: Execution) -> Result<Vec<Piece>> {
    let refiner = Refiner::new(cover.ambient_dim, &cover.members)?;
    // every member lies in the closure of a maximal one, so refining the
    // faces of the maximal closures and dropping pieces outside X suffices
    let regions: BTreeSet<RelOpenCell> = cover.support_closure().into_iter().flat_map(|m| m.face_cells()).collect();
    let regions: Vec<RelOpenCell> = regions.into_iter().collect();
    let per_region = par::try_map(exec, &regions, |r| refiner.refine(r))?;
    let mut cells: BTreeSet<RelOpenCell> = per_region
        .into_iter()
        .flatten()
        .filter(|c| {
            let s = c.sample_point();
            cover.members.iter().any(|m| m.contains(&s))
        })
        .collect();

    // Pieces cut from different members normally coincide; overlapping
    // unequal pieces are refined against each other until disjoint.
    loop {
        let by_sig = group_by_signature(cover, &cells);
        let clash = by_sig.values().find_map(|group| {
            group
                .iter()
                .enumerate()
                .find_map(|(i, a)| group[i + 1..].iter().find(|b| a.meets(b)).map(|b| ((*a).clone(), (*b).clone())))
        });
        let Some((a, b)) = clash else {
            return Ok(by_sig
                .into_iter()
                .flat_map(|(sig, group)| {
                    group.into_iter().map(move |c| Piece { cell: c.clone(), signature: sig.clone() })
                })
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect());
        };
        cells.remove(&a);
        cells.remove(&b);
        let pair = [a.clone(), b.clone()];
        let r = Refiner::new(cover.ambient_dim, &pair)?;
        cells.extend(r.refine(&a)?);
        cells.extend(r.refine(&b)?);
    }
}

fn group_by_signature<'a>(
    cover: &PiecewiseAffineCover,
    cells: &'a BTreeSet<RelOpenCell>,
) -> BTreeMap<Vec<usize>, Vec<&'a RelOpenCell>> {
    let mut out: BTreeMap<Vec<usize>, Vec<&RelOpenCell>> = BTreeMap::new();
    for c in cells {
        let s = c.sample_point();
        let sig = (0..cover.members.len()).filter(|&i| cover.members[i].contains(&s)).collect();
        out.entry(sig).or_default().push(c);
    }
    out
}

/// Sample points of the refinement, one per piece.
pub fn sample_support(cover: &PiecewiseAffineCover) -> Result<Vec<RatVec>> {
    Ok(support_refinement(cover, Execution::default())?.into_iter().map(|p| p.cell.sample_point()).collect())
}
