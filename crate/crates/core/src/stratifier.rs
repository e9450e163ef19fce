//! The unique stratification of a piecewise-affine cover.
//!
//! The support is refined into cells of constant membership signature. Each
//! cell gets the direction space `D = ∩ T P_i` over its signature. Cells with
//! the same `D` lying in a common translate of `D` are merged into connected
//! components; those components are the strata.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_traits::Signed;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cover::{support_refinement, PiecewiseAffineCover};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{direction_intersect, dot, rat, saturated_lattice_basis, AffineSubspace, Rat, RatMat, RatVec};
use crate::par::{self, Execution};
use crate::polyhedron::{Refiner, RelOpenCell};

/// A refined cell with its signature and direction space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DCell {
    pub cell: RelOpenCell,
    pub signature: Vec<usize>,
    pub direction: RatMat,
}

/// The distribution `x ↦ ∩_{i ∈ I_x} T_x P_i`, constant on refined cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DField {
    pub cells: Vec<DCell>,
}

impl DField {
    pub fn counts_by_dim(&self) -> Vec<usize> {
        counts(self.cells.iter().map(|c| c.cell.dim()))
    }
}

fn counts(dims: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut out = Vec::new();
    for d in dims {
        if out.len() <= d {
            out.resize(d + 1, 0);
        }
        out[d] += 1;
    }
    out
}

pub fn compute_d_field(c: &PiecewiseAffineCover) -> Result<DField> {
    compute_d_field_with(c, Execution::default())
}

pub fn compute_d_field_with(c: &PiecewiseAffineCover, exec: Execution) -> Result<DField> {
    let pieces = support_refinement(c, exec)?;
    c.report_from(&pieces, exec).into_result()?;
    let cells = par::try_map(exec, &pieces, |p| {
        let carriers: Vec<&AffineSubspace> = p.signature.iter().map(|&i| c.members()[i].carrier()).collect();
        Ok::<_, Error>(DCell {
            cell: p.cell.clone(),
            signature: p.signature.clone(),
            direction: direction_intersect(&carriers)?,
        })
    })?;
    Ok(DField { cells })
}

/// A connected affine-open piece of the stratification.
///
/// Cells of full dimension have the stratum carrier as their carrier;
/// lower-dimensional cells glue them together inside that carrier. Convex
/// strata are stored as a single cell.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Stratum {
    pub id: usize,
    pub dim: usize,
    /// Canonical RREF basis of the direction space.
    pub direction: RatMat,
    /// HNF basis of the direction lattice `Z^k ∩ direction`.
    pub integral_direction: RatMat,
    pub carrier: AffineSubspace,
    /// Sorted, pairwise disjoint.
    pub cells: Vec<RelOpenCell>,
    /// Edges of a spanning forest of the cell adjacency graph.
    pub spanning_tree: Vec<(usize, usize)>,
}

impl Stratum {
    /// Builds a stratum from cells; the carrier is their joint affine hull.
    pub fn from_cells(mut cells: Vec<RelOpenCell>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::EmptyPolytope);
        }
        cells.sort();
        cells.dedup();
        let pts: Vec<RatVec> = cells.iter().flat_map(|c| c.vertices().iter().cloned()).collect();
        let carrier = AffineSubspace::from_points(&pts)?;
        let dim = carrier.dim();
        let spanning_tree = spanning_forest(&cells, dim);
        Ok(Self {
            id: 0,
            dim,
            direction: carrier.directions().clone(),
            integral_direction: saturated_lattice_basis(carrier.directions()),
            carrier,
            cells,
            spanning_tree,
        })
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        self.carrier.contains_point(x) && self.cells.iter().any(|c| c.contains(x))
    }

    pub fn is_connected(&self) -> bool {
        self.spanning_tree.len() + 1 == self.cells.len()
    }

    pub fn sample_point(&self) -> RatVec {
        self.cells.iter().max_by_key(|c| c.dim()).expect("nonempty").sample_point()
    }

    /// Whether `x` lies in `Cl(self)`.
    pub fn closure_contains(&self, x: &[Rat]) -> bool {
        self.cells.iter().any(|c| c.closure_contains(x))
    }

    fn bounding_box(&self) -> (RatVec, RatVec) {
        let n = self.carrier.ambient_dim();
        let mut lo: Option<RatVec> = None;
        let mut hi: Option<RatVec> = None;
        for v in self.cells.iter().flat_map(|c| c.vertices()) {
            match (&mut lo, &mut hi) {
                (Some(l), Some(h)) => {
                    for j in 0..n {
                        if v[j] < l[j] {
                            l[j] = v[j].clone();
                        }
                        if v[j] > h[j] {
                            h[j] = v[j].clone();
                        }
                    }
                }
                _ => {
                    lo = Some(v.clone());
                    hi = Some(v.clone());
                }
            }
        }
        (lo.expect("nonempty"), hi.expect("nonempty"))
    }
}

/// Strata sorted by `(dim, carrier, cells)` with ids equal to positions,
/// and the frontier relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stratification {
    ambient_dim: usize,
    strata: Vec<Stratum>,
    frontier: Vec<(usize, usize)>,
}

impl Stratification {
    /// Sorts the strata, assigns ids and computes the frontier pairs.
    pub fn from_strata(ambient_dim: usize, strata: Vec<Stratum>) -> Result<Self> {
        Self::from_strata_with(ambient_dim, strata, Execution::default())
    }

    pub fn from_strata_with(ambient_dim: usize, mut strata: Vec<Stratum>, exec: Execution) -> Result<Self> {
        for s in &strata {
            check_dim(ambient_dim, s.carrier.ambient_dim())?;
        }
        strata.sort_by(|a, b| (a.dim, &a.carrier, &a.cells).cmp(&(b.dim, &b.carrier, &b.cells)));
        for (i, s) in strata.iter_mut().enumerate() {
            s.id = i;
        }
        let frontier = meeting_pairs(&strata, exec);
        Ok(Self { ambient_dim, strata, frontier })
    }

    /// Rebuilds a stratification from stored parts without recomputation.
    pub(crate) fn from_raw(ambient_dim: usize, strata: Vec<Stratum>, frontier: Vec<(usize, usize)>) -> Self {
        Self { ambient_dim, strata, frontier }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn strata(&self) -> &[Stratum] {
        &self.strata
    }

    pub fn stratum(&self, id: usize) -> Result<&Stratum> {
        self.strata.get(id).ok_or(Error::UnknownStratum(id))
    }

    /// Pairs `(lower, upper)` with `lower ∩ Cl(upper) ≠ ∅`, `lower ≠ upper`.
    pub fn frontier(&self) -> &[(usize, usize)] {
        &self.frontier
    }

    /// Number of strata of each dimension.
    pub fn counts_by_dim(&self) -> Vec<usize> {
        counts(self.strata.iter().map(|s| s.dim))
    }

    pub fn strata_containing(&self, x: &[Rat]) -> Vec<usize> {
        self.strata.iter().filter(|s| s.contains(x)).map(|s| s.id).collect()
    }

    pub fn top_strata(&self) -> impl Iterator<Item = &Stratum> {
        let k = self.strata.iter().map(|s| s.dim).max().unwrap_or(0);
        self.strata.iter().filter(move |s| s.dim == k)
    }

    /// Pairs of distinct strata that share a point.
    pub fn disjointness_violations(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, a) in self.strata.iter().enumerate() {
            for b in &self.strata[i + 1..] {
                if a.cells.iter().any(|c| b.cells.iter().any(|d| c.meets(d))) {
                    out.push((a.id, b.id));
                }
            }
        }
        out
    }

    /// Strata that fail to be open in their carrier near sampled points.
    ///
    /// For a sample `x`, the points `x ± r e` for a basis `e` of the
    /// direction space must stay in the stratum, where `r` is below every
    /// nonzero slack at `x`; polyhedral cells are cones near `x`, so this
    /// is an exact test of local openness.
    pub fn affine_openness_violations(&self, samples: usize, seed: u64) -> Vec<usize> {
        let mut out = Vec::new();
        for s in &self.strata {
            let mut rng = stream(seed, s.id as u64);
            let mut points: Vec<RatVec> = s.cells.iter().map(|c| c.sample_point()).collect();
            for i in 0..samples {
                points.push(s.cells[i % s.cells.len()].random_point(&mut rng));
            }
            if points.iter().any(|x| !locally_open(s, x)) {
                out.push(s.id);
            }
        }
        out
    }
}

fn locally_open(s: &Stratum, x: &[Rat]) -> bool {
    let mut r: Option<Rat> = None;
    let mut scale = rat(1);
    for c in &s.cells {
        for h in c.ineqs() {
            let slack = -h.slack(x);
            if slack.is_positive() && r.as_ref().is_none_or(|r| &slack < r) {
                r = Some(slack);
            }
            for d in s.direction.rows() {
                let m = dot(&h.normal, d).abs();
                if m > scale {
                    scale = m;
                }
            }
        }
    }
    let r = r.unwrap_or_else(|| rat(1)) / (scale * rat(2));
    s.direction.rows().iter().all(|d| {
        [r.clone(), -r.clone()].iter().all(|t| {
            let y: RatVec = x.iter().zip(d).map(|(a, b)| a + b * t).collect();
            s.contains(&y)
        })
    })
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn boxes_overlap(a: &(RatVec, RatVec), b: &(RatVec, RatVec)) -> bool {
    (0..a.0.len()).all(|j| a.0[j] <= b.1[j] && b.0[j] <= a.1[j])
}

fn meeting_pairs(strata: &[Stratum], exec: Execution) -> Vec<(usize, usize)> {
    let boxes: Vec<_> = strata.iter().map(Stratum::bounding_box).collect();
    let idx: Vec<usize> = (0..strata.len()).collect();
    par::map(exec, &idx, |&i| {
        (0..strata.len())
            .filter(|&j| {
                j != i
                    && boxes_overlap(&boxes[i], &boxes[j])
                    && strata[i].cells.iter().any(|l| strata[j].cells.iter().any(|u| u.closure_meets(l)))
            })
            .map(|j| (i, j))
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

/// Adjacency of cells inside one merge group of dimension `dim`: a
/// codimension-one cell joins every full cell whose closure contains it, a
/// lower cell attaches to the first such full cell. Returns the edges, or
/// the index of a lower cell with no full cell around it.
fn adjacency(cells: &[RelOpenCell], dim: usize) -> std::result::Result<Vec<(usize, usize)>, usize> {
    let tops: Vec<usize> = (0..cells.len()).filter(|&i| cells[i].dim() == dim).collect();
    let mut edges = Vec::new();
    for (l, low) in cells.iter().enumerate() {
        if low.dim() == dim {
            continue;
        }
        let around: Vec<usize> = tops.iter().copied().filter(|&t| cells[t].closure_contains_cell(low)).collect();
        let Some(&first) = around.first() else { return Err(l) };
        edges.push((first, l));
        if low.dim() + 1 == dim {
            edges.extend(around.windows(2).map(|w| (w[0], w[1])));
        }
    }
    Ok(edges)
}

fn spanning_forest(cells: &[RelOpenCell], dim: usize) -> Vec<(usize, usize)> {
    let edges = match adjacency(cells, dim) {
        Ok(e) => e,
        Err(_) => return Vec::new(),
    };
    let mut nbrs: Vec<Vec<usize>> = vec![Vec::new(); cells.len()];
    for &(a, b) in &edges {
        nbrs[a].push(b);
        nbrs[b].push(a);
    }
    let mut seen = vec![false; cells.len()];
    let mut tree = Vec::new();
    for root in 0..cells.len() {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(a) = queue.pop_front() {
            for &b in &nbrs[a] {
                if !seen[b] {
                    seen[b] = true;
                    tree.push((a.min(b), a.max(b)));
                    queue.push_back(b);
                }
            }
        }
    }
    tree.sort();
    tree
}

fn components(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

/// Replaces a component by the relative interior of its convex hull when
/// the two coincide.
fn simplify(cells: Vec<RelOpenCell>, dim: usize) -> Vec<RelOpenCell> {
    if cells.len() == 1 {
        return cells;
    }
    let pts: Vec<RatVec> = cells.iter().flat_map(|c| c.vertices().iter().cloned()).collect();
    let Ok(hull) = RelOpenCell::from_vertices(&pts) else { return cells };
    if hull.dim() != dim || !cells.iter().all(|c| hull.contains_cell(c)) {
        return cells;
    }
    let Ok(refiner) = Refiner::new(hull.ambient_dim(), &cells) else { return cells };
    let Ok(pieces) = refiner.refine(&hull) else { return cells };
    if pieces.iter().all(|p| cells.iter().any(|c| c.contains_cell(p))) {
        vec![hull]
    } else {
        cells
    }
}

pub fn stratify(c: &PiecewiseAffineCover) -> Result<Stratification> {
    stratify_with(c, Execution::default())
}

pub fn stratify_with(c: &PiecewiseAffineCover, exec: Execution) -> Result<Stratification> {
    let field = compute_d_field_with(c, exec)?;
    let mut groups: BTreeMap<AffineSubspace, Vec<usize>> = BTreeMap::new();
    for (i, dc) in field.cells.iter().enumerate() {
        let translate = AffineSubspace::new(dc.cell.sample_point(), &dc.direction)?;
        groups.entry(translate).or_default().push(i);
    }
    let groups: Vec<(AffineSubspace, Vec<usize>)> = groups.into_iter().collect();
    let built = par::try_map(exec, &groups, |(carrier, members)| {
        let dim = carrier.dim();
        let cells: Vec<RelOpenCell> = members.iter().map(|&i| field.cells[i].cell.clone()).collect();
        let edges = adjacency(&cells, dim).map_err(|l| Error::NonIntegrable { cell: members[l] })?;
        let mut out = Vec::new();
        for comp in components(cells.len(), &edges) {
            let part: Vec<RelOpenCell> = comp.iter().map(|&i| cells[i].clone()).collect();
            let mut part = simplify(part, dim);
            part.sort();
            let spanning_tree = spanning_forest(&part, dim);
            out.push(Stratum {
                id: 0,
                dim,
                direction: carrier.directions().clone(),
                integral_direction: saturated_lattice_basis(carrier.directions()),
                carrier: carrier.clone(),
                cells: part,
                spanning_tree,
            });
        }
        Ok::<_, Error>(out)
    })?;
    Stratification::from_strata_with(c.ambient_dim(), built.into_iter().flatten().collect(), exec)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FrontierViolation {
    /// `lower` meets `Cl(upper)` but is not contained in it.
    NotContained { lower: usize, upper: usize },
    /// `lower` meets `Cl(upper)` but is not of smaller dimension.
    DimensionNotLower { lower: usize, upper: usize },
}

/// Checks: `Cl(σ) ∩ τ ≠ ∅` implies `τ ⊂ Cl(σ)` and `dim τ < dim σ`.
pub fn verify_frontier(s: &Stratification) -> Vec<FrontierViolation> {
    let pairs = meeting_pairs(&s.strata, Execution::default());
    let mut out = Vec::new();
    for (lower, upper) in pairs {
        let (l, u) = (&s.strata[lower], &s.strata[upper]);
        if l.dim >= u.dim {
            out.push(FrontierViolation::DimensionNotLower { lower, upper });
        }
        if !closure_contains_stratum(u, l) {
            out.push(FrontierViolation::NotContained { lower, upper });
        }
    }
    out
}

fn closure_contains_stratum(upper: &Stratum, lower: &Stratum) -> bool {
    let refiner = match Refiner::new(upper.carrier.ambient_dim(), &upper.cells) {
        Ok(r) => r,
        Err(_) => return false,
    };
    lower.cells.iter().all(|l| {
        if upper.cells.iter().any(|u| u.closure_contains_cell(l)) {
            return true;
        }
        match refiner.refine(l) {
            Ok(pieces) => pieces.iter().all(|p| upper.cells.iter().any(|u| u.closure_contains_cell(p))),
            Err(_) => false,
        }
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TangentViolation {
    pub stratum: usize,
    pub point: RatVec,
    /// `None` when the point lies outside the support.
    pub expected: Option<RatMat>,
    pub found: RatMat,
}

/// At random rational points of each stratum, compares the stratum
/// direction with `∩ T P_i` over the point's membership signature.
pub fn verify_tangent_condition(
    s: &Stratification,
    c: &PiecewiseAffineCover,
    samples_per_stratum: usize,
    seed: u64,
) -> Vec<TangentViolation> {
    let mut out = Vec::new();
    for st in s.strata() {
        let mut rng = stream(seed, st.id as u64);
        for i in 0..samples_per_stratum {
            let x = st.cells[i % st.cells.len()].random_point(&mut rng);
            let expected = c.membership_signature(&x).ok().and_then(|sig| {
                let carriers: Vec<&AffineSubspace> = sig.iter().map(|&j| c.members()[j].carrier()).collect();
                direction_intersect(&carriers).ok()
            });
            if expected.as_ref() != Some(&st.direction) {
                out.push(TangentViolation { stratum: st.id, point: x, expected, found: st.direction.clone() });
            }
        }
    }
    out
}

/// Strata as point sets, for comparing stratifications whose cell
/// decompositions may differ: two strata agree when each one's cells are
/// covered by the other's.
pub fn same_point_set(a: &Stratum, b: &Stratum) -> bool {
    if a.dim != b.dim || a.carrier != b.carrier {
        return false;
    }
    if a.cells == b.cells {
        return true;
    }
    let covers = |x: &Stratum, y: &Stratum| {
        let Ok(refiner) = Refiner::new(x.carrier.ambient_dim(), &y.cells) else { return false };
        x.cells
            .iter()
            .all(|c| refiner.refine(c).is_ok_and(|ps| ps.iter().all(|p| y.cells.iter().any(|d| d.contains_cell(p)))))
    };
    covers(a, b) && covers(b, a)
}

/// The ids of strata whose direction space is zero.
pub fn point_strata(s: &Stratification) -> BTreeSet<usize> {
    s.strata().iter().filter(|t| t.direction.is_empty()).map(|t| t.id).collect()
}
