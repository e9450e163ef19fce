//! Common refinement of a family of relatively open cells.
//!
//! Every nonempty face of every input closure contributes its affine hull
//! (a "flat"). A cell is split by a flat when the flat meets the cell's
//! carrier in a hyperplane of the carrier that passes through the cell.
//! Flats meeting the carrier in lower dimension only force a cut when they
//! actually pass through the cell; the cut is then one of the flat's own
//! canonical equations. The result is a partition into relatively open cells
//! on which membership in every input cell and every face of every input
//! closure is constant.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use super::{Halfspace, RelOpenCell};
use crate::error::{check_dim, Result};
use crate::linalg::{dot, AffineSubspace, Rat, RatMat, RatVec};

#[derive(Clone, Debug)]
struct Flat {
    space: AffineSubspace,
    eqs: Vec<(RatVec, Rat)>,
}

/// Precomputed flats of a cell family, reusable across `within` regions.
#[derive(Clone, Debug)]
pub struct Refiner {
    ambient_dim: usize,
    flats: Vec<Flat>,
}

impl Refiner {
    pub fn new(ambient_dim: usize, cells: &[RelOpenCell]) -> Result<Self> {
        let mut spaces = BTreeSet::new();
        for c in cells {
            check_dim(ambient_dim, c.ambient_dim())?;
            let lattice = c.face_lattice();
            for f in lattice.nonempty_faces() {
                spaces.insert(f.affine_hull.clone().expect("nonempty face"));
            }
        }
        let flats = spaces
            .into_iter()
            .filter(|s| s.dim() < ambient_dim)
            .map(|space| {
                let (e, r) = space.equations();
                let eqs = e.into_rows().into_iter().zip(r).collect();
                Flat { space, eqs }
            })
            .collect();
        Ok(Self { ambient_dim, flats })
    }

    pub fn flat_count(&self) -> usize {
        self.flats.len()
    }

    /// Partition of `within` into cells with constant membership.
    pub fn refine(&self, within: &RelOpenCell) -> Result<Vec<RelOpenCell>> {
        check_dim(self.ambient_dim, within.ambient_dim())?;
        let mut done = Vec::new();
        let mut work = vec![within.clone()];
        while let Some(c) = work.pop() {
            match self.find_cut(&c) {
                None => done.push(c),
                Some((e, g)) => work.extend(split(&c, &e, &g)),
            }
        }
        done.sort();
        done.dedup();
        Ok(done)
    }

    fn find_cut(&self, c: &RelOpenCell) -> Option<(RatVec, Rat)> {
        let d = c.dim();
        if d == 0 {
            return None;
        }
        let mut deferred = Vec::new();
        for flat in &self.flats {
            let mut inside = true;
            let mut disjoint = false;
            for (e, g) in &flat.eqs {
                let (neg, zero, pos) = signs(c.vertices(), e, g);
                if neg == 0 && zero == 0 || pos == 0 && zero == 0 {
                    disjoint = true;
                    break;
                }
                inside &= neg == 0 && pos == 0;
            }
            if disjoint || inside {
                continue;
            }
            let Some(meet) = flat.space.intersect(c.carrier()).ok().flatten() else {
                continue;
            };
            if meet.dim() + 1 == d {
                if let Some(cut) = crossing_equation(c, flat) {
                    return Some(cut);
                }
            } else if meet.dim() + 1 < d {
                deferred.push((flat, meet));
            }
        }
        for (flat, meet) in deferred {
            let Some(q) = RelOpenCell::build(meet, c.ineqs()) else { continue };
            if c.contains(&q.sample_point()) {
                if let Some(cut) = crossing_equation(c, flat) {
                    return Some(cut);
                }
            }
        }
        None
    }
}

fn signs(vertices: &[RatVec], e: &[Rat], g: &Rat) -> (usize, usize, usize) {
    let mut out = (0, 0, 0);
    for v in vertices {
        match dot(e, v).cmp(g) {
            Ordering::Less => out.0 += 1,
            Ordering::Equal => out.1 += 1,
            Ordering::Greater => out.2 += 1,
        }
    }
    out
}

/// First canonical equation of the flat that is nonconstant on the cell's
/// carrier and has cell vertices strictly on both sides.
fn crossing_equation(c: &RelOpenCell, flat: &Flat) -> Option<(RatVec, Rat)> {
    flat.eqs.iter().find_map(|(e, g)| {
        if c.form_constant_on_carrier(e) {
            return None;
        }
        let (neg, _, pos) = signs(c.vertices(), e, g);
        (neg > 0 && pos > 0).then(|| (e.clone(), g.clone()))
    })
}

fn split(c: &RelOpenCell, e: &RatVec, g: &Rat) -> Vec<RelOpenCell> {
    let mut out = Vec::with_capacity(3);
    let below = Halfspace::new(e.clone(), g.clone());
    let above = below.negated();
    for h in [below, above] {
        let mut ineqs = c.ineqs().to_vec();
        ineqs.push(h);
        out.extend(RelOpenCell::build(c.carrier().clone(), &ineqs));
    }
    let (eqs, rhs) = c.carrier().equations();
    let eqs = eqs.stack(&RatMat::new(e.len(), vec![e.clone()]).expect("width matches")).expect("width matches");
    let rhs: RatVec = rhs.into_iter().chain([g.clone()]).collect();
    if let Some(carrier) = AffineSubspace::from_equations(&eqs, &rhs) {
        out.extend(RelOpenCell::build(carrier, c.ineqs()));
    }
    out
}

/// Partition of `within` into relatively open cells such that membership in
/// every input cell, and in every face of every input closure, is constant
/// on each output cell.
pub fn common_refinement(cells: &[RelOpenCell], within: &RelOpenCell) -> Result<Vec<RelOpenCell>> {
    Refiner::new(within.ambient_dim(), cells)?.refine(within)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ratio, rvec};

    fn cell(v: &[&[i64]]) -> RelOpenCell {
        RelOpenCell::from_vertices(&v.iter().map(|p| rvec(p)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn single_cut_of_square() {
        let square = cell(&[&[0, 0], &[2, 0], &[0, 2], &[2, 2]]);
        let seg = cell(&[&[1, 0], &[1, 2]]);
        let parts = common_refinement(std::slice::from_ref(&seg), &square).unwrap();
        assert_eq!(parts.len(), 3);
        assert_eq!(parts.iter().filter(|p| p.dim() == 2).count(), 2);
        assert!(parts.contains(&seg));
    }

    #[test]
    fn point_cut_of_interval() {
        let interval = cell(&[&[0], &[2]]);
        let point = RelOpenCell::point(rvec(&[1]));
        let parts = common_refinement(std::slice::from_ref(&point), &interval).unwrap();
        let mut expect = vec![cell(&[&[0], &[1]]), point, cell(&[&[1], &[2]])];
        expect.sort();
        assert_eq!(parts, expect);
    }

    #[test]
    fn isolated_point_forces_fallback_cut() {
        let square = cell(&[&[0, 0], &[2, 0], &[0, 2], &[2, 2]]);
        let p = RelOpenCell::point(rvec(&[1, 1]));
        let parts = common_refinement(std::slice::from_ref(&p), &square).unwrap();
        assert!(parts.contains(&p));
        for q in &parts {
            assert!(q == &p || !q.meets(&p));
        }
        // pieces partition the square: every sampled point lies in exactly one piece
        for x in [[1, 1], [1, 3], [3, 1], [1, 2]] {
            let x = vec![ratio(x[0], 2), ratio(x[1], 2)];
            assert_eq!(parts.iter().filter(|q| q.contains(&x)).count(), 1);
        }
    }
}
