//! Duistermaat-Heckman densities: exact fiber volumes, their polynomial
//! interpolation on top-dimensional strata, and a Monte-Carlo oracle.
//!
//! Fibers `P ∩ π⁻¹(x)` are measured in the lattice `Z^n ∩ ker π`: with an
//! HNF basis `K` of that lattice and a particular solution `y0` of
//! `π(y0) = x`, the fiber is `{y0 + Kᵀ t}` and its volume is the Euclidean
//! volume of the `t`-polytope.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{affine_rank, det, dot, kernel_lattice, rat, rat_to_f64, solve, sub, Rat, RatMat, RatVec};
use crate::par::{self, Execution};
use crate::polyhedron::enumerate_vertices;
use crate::stratifier::Stratification;
use crate::toric::ToricAction;

/// Seed of the interpolation-point streams when none is given.
pub const DEFAULT_SEED: u64 = 0x5EED;

const MC_CHUNK: usize = 8192;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberVolume {
    pub point: RatVec,
    pub volume: Rat,
}

/// The fiber over `x` as `{t ∈ R^m : w_i · t <= c_i}`, `m = n - k`.
struct Fiber {
    m: usize,
    ineqs: Vec<(RatVec, Rat)>,
    /// `y0` when `m = 0`.
    base: RatVec,
}

fn fiber(a: &ToricAction, x: &[Rat]) -> Result<Fiber> {
    check_dim(a.k(), x.len())?;
    let bt = a.projection();
    let kernel = kernel_lattice(bt)?;
    let y0 = solve(bt, x).ok_or_else(|| Error::Internal("projection has full row rank".into()))?;
    let ineqs = a
        .polytope()
        .ineqs()
        .iter()
        .map(|h| {
            let w: RatVec = kernel.rows().iter().map(|kr| dot(&h.normal, kr)).collect();
            (w, &h.offset - dot(&h.normal, &y0))
        })
        .collect();
    Ok(Fiber { m: kernel.nrows(), ineqs, base: y0 })
}

impl Fiber {
    fn vertices(&self) -> Result<Vec<RatVec>> {
        if self.m == 0 {
            let inside = self.ineqs.iter().all(|(_, c)| !c.is_negative());
            return if inside { Ok(vec![Vec::new()]) } else { Err(Error::EmptyFiber) };
        }
        let v = enumerate_vertices(self.m, &self.ineqs);
        if v.is_empty() {
            Err(Error::EmptyFiber)
        } else {
            Ok(v)
        }
    }

    fn is_full_dimensional(&self, verts: &[RatVec]) -> bool {
        let refs: Vec<&RatVec> = verts.iter().collect();
        affine_rank(&refs) == self.m as isize
    }
}

/// Lattice-normalized `(n - k)`-volume of the fiber over `x`.
pub fn fiber_volume(a: &ToricAction, x: &[Rat]) -> Result<FiberVolume> {
    let f = fiber(a, x)?;
    let verts = f.vertices()?;
    let volume = if f.m == 0 {
        Rat::one()
    } else if !f.is_full_dimensional(&verts) {
        Rat::zero()
    } else {
        polytope_volume(&verts, &f.ineqs, f.m)
    };
    Ok(FiberVolume { point: x.to_vec(), volume })
}

/// Volume of a full-dimensional polytope by a pulling triangulation.
fn polytope_volume(verts: &[RatVec], ineqs: &[(RatVec, Rat)], d: usize) -> Rat {
    let all: Vec<usize> = (0..verts.len()).collect();
    let fact: Rat = (1..=d as i64).map(rat).product();
    let mut total = Rat::zero();
    for simplex in pull(verts, ineqs, &all, d) {
        let v0 = &verts[simplex[0]];
        let rows: Vec<RatVec> = simplex[1..].iter().map(|&i| sub(&verts[i], v0)).collect();
        total += det(&RatMat::new(d, rows).expect("square")).abs();
    }
    total / fact
}

/// Pulling triangulation of the face with vertex set `face` and dimension
/// `dim`: cone from its first vertex over the triangulated facets that
/// avoid it.
fn pull(verts: &[RatVec], ineqs: &[(RatVec, Rat)], face: &[usize], dim: usize) -> Vec<Vec<usize>> {
    if dim == 0 {
        return vec![vec![face[0]]];
    }
    let apex = face[0];
    let mut facets: BTreeSet<Vec<usize>> = BTreeSet::new();
    for (w, c) in ineqs {
        let tight: Vec<usize> = face.iter().copied().filter(|&v| &dot(w, &verts[v]) == c).collect();
        if tight.contains(&apex) || tight.is_empty() {
            continue;
        }
        let refs: Vec<&RatVec> = tight.iter().map(|&v| &verts[v]).collect();
        if affine_rank(&refs) == dim as isize - 1 {
            facets.insert(tight);
        }
    }
    let mut out = Vec::new();
    for f in facets {
        for mut s in pull(verts, ineqs, &f, dim - 1) {
            s.insert(0, apex);
            out.push(s);
        }
    }
    out
}

/// A polynomial in the `k` coordinates of `R^k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DensityPoly {
    pub stratum_id: usize,
    pub nvars: usize,
    /// Nonzero coefficients by exponent vector.
    pub coefficients: BTreeMap<Vec<u32>, Rat>,
    /// Total degree; `0` for constants, including zero.
    pub degree: usize,
}

impl DensityPoly {
    pub fn new(stratum_id: usize, nvars: usize, coefficients: BTreeMap<Vec<u32>, Rat>) -> Self {
        let coefficients: BTreeMap<Vec<u32>, Rat> = coefficients.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        let degree = coefficients.keys().map(|e| e.iter().sum::<u32>() as usize).max().unwrap_or(0);
        Self { stratum_id, nvars, coefficients, degree }
    }

    pub fn eval(&self, x: &[Rat]) -> Rat {
        self.coefficients.iter().map(|(e, c)| c * monomial(e, x)).sum()
    }

    fn var_names(&self) -> Vec<String> {
        match self.nvars {
            1 => vec!["t".into()],
            2 => vec!["x".into(), "y".into()],
            3 => vec!["x".into(), "y".into(), "z".into()],
            k => (1..=k).map(|i| format!("x{i}")).collect(),
        }
    }
}

/// Terms by decreasing degree, e.g. `-x - y + 4`.
impl fmt::Display for DensityPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coefficients.is_empty() {
            return write!(f, "0");
        }
        let names = self.var_names();
        let mut terms: Vec<(&Vec<u32>, &Rat)> = self.coefficients.iter().collect();
        terms.sort_by(|a, b| {
            let da: u32 = a.0.iter().sum();
            let db: u32 = b.0.iter().sum();
            db.cmp(&da).then_with(|| b.0.cmp(a.0))
        });
        for (i, (e, c)) in terms.into_iter().enumerate() {
            let mono: Vec<String> = e
                .iter()
                .zip(&names)
                .filter(|(p, _)| **p > 0)
                .map(|(p, n)| if *p == 1 { n.clone() } else { format!("{n}^{p}") })
                .collect();
            let mag = c.abs();
            let sign = if c.is_negative() { "-" } else { "+" };
            if i == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let coef = crate::linalg::format_rat(&mag);
            match (mono.is_empty(), mag.is_one()) {
                (true, _) => write!(f, "{coef}")?,
                (false, true) => write!(f, "{}", mono.join("*"))?,
                (false, false) => write!(f, "{coef}*{}", mono.join("*"))?,
            }
        }
        Ok(())
    }
}

fn monomial(e: &[u32], x: &[Rat]) -> Rat {
    e.iter().zip(x).fold(Rat::one(), |acc, (p, xi)| acc * num_traits::pow(xi.clone(), *p as usize))
}

/// Exponent vectors of length `k` with total degree at most `d`, by degree.
pub fn monomials(k: usize, d: usize) -> Vec<Vec<u32>> {
    fn rec(k: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == k {
            out.push(prefix.clone());
            return;
        }
        for p in 0..=left {
            prefix.push(p);
            rec(k, left - p, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, d as u32, &mut Vec::new(), &mut out);
    out.sort_by_key(|e| (e.iter().sum::<u32>(), std::cmp::Reverse(e.clone())));
    out
}

pub fn density_polynomial(a: &ToricAction, s: &Stratification, stratum_id: usize) -> Result<DensityPoly> {
    density_polynomial_seeded(a, s, stratum_id, DEFAULT_SEED)
}

pub fn density_polynomial_seeded(
    a: &ToricAction,
    s: &Stratification,
    stratum_id: usize,
    seed: u64,
) -> Result<DensityPoly> {
    density_polynomial_checked(a, s, stratum_id, seed, 0)
}

/// Interpolates the fiber volume on a `k`-dimensional stratum by a
/// polynomial of degree at most `n - k`, from points drawn on the stream
/// `(seed, stratum_id)`, then checks `max(held_out, k + 1)` further points.
pub fn density_polynomial_checked(
    a: &ToricAction,
    s: &Stratification,
    stratum_id: usize,
    seed: u64,
    held_out: usize,
) -> Result<DensityPoly> {
    let st = s.stratum(stratum_id)?;
    let k = a.k();
    check_dim(k, s.ambient_dim())?;
    if st.dim != k {
        return Err(Error::NotTopDimensional { stratum: stratum_id, dim: st.dim, expected: k });
    }
    let monos = monomials(k, a.n() - k);
    let cells: Vec<_> = st.cells.iter().filter(|c| c.dim() == k).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stratum_id as u64);
    let draw = |rng: &mut ChaCha8Rng| {
        let c = cells[rng.gen_range(0..cells.len())];
        c.random_point(rng)
    };

    let mut rows: Vec<RatVec> = Vec::new();
    let mut values: Vec<Rat> = Vec::new();
    let mut tries = 0;
    while rows.len() < monos.len() {
        tries += 1;
        if tries > 100 * monos.len() + 100 {
            return Err(Error::Internal("no affinely generic interpolation points found".into()));
        }
        let x = draw(&mut rng);
        let row: RatVec = monos.iter().map(|e| monomial(e, &x)).collect();
        let mut trial = rows.clone();
        trial.push(row);
        if RatMat::new(monos.len(), trial.clone())?.rank() == trial.len() {
            rows = trial;
            values.push(fiber_volume(a, &x)?.volume);
        }
    }
    let coef = solve(&RatMat::new(monos.len(), rows)?, &values)
        .ok_or_else(|| Error::Internal("interpolation system is singular".into()))?;
    let poly = DensityPoly::new(stratum_id, k, monos.into_iter().zip(coef).collect());
    for _ in 0..held_out.max(k + 1) {
        let x = draw(&mut rng);
        if poly.eval(&x) != fiber_volume(a, &x)?.volume {
            return Err(Error::InterpolationInconsistent { stratum: stratum_id });
        }
    }
    Ok(poly)
}

/// Densities of every `k`-dimensional stratum, keyed by stratum id.
pub fn all_densities(
    a: &ToricAction,
    s: &Stratification,
    seed: u64,
    exec: Execution,
) -> Result<BTreeMap<usize, DensityPoly>> {
    all_densities_checked(a, s, seed, 0, exec)
}

/// [`all_densities`] with `held_out` verification points per stratum.
pub fn all_densities_checked(
    a: &ToricAction,
    s: &Stratification,
    seed: u64,
    held_out: usize,
    exec: Execution,
) -> Result<BTreeMap<usize, DensityPoly>> {
    let ids: Vec<usize> = s.strata().iter().filter(|t| t.dim == a.k()).map(|t| t.id).collect();
    let polys = par::try_map(exec, &ids, |&id| density_polynomial_checked(a, s, id, seed, held_out))?;
    Ok(ids.into_iter().zip(polys).collect())
}

/// Monte-Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub trials: usize,
}

impl McEstimate {
    /// Whether `exact` lies within `sigmas` standard errors. A fiber that
    /// fills its bounding box gives a zero standard error, so a few ulps of
    /// rounding in the box volume are allowed on top.
    pub fn agrees_with(&self, exact: f64, sigmas: f64) -> bool {
        let rounding = 64.0 * f64::EPSILON * exact.abs().max(1.0);
        (self.estimate - exact).abs() <= sigmas * self.std_error + rounding
    }
}

pub fn mc_fiber_volume(a: &ToricAction, x: &[Rat], trials: usize, seed: u64) -> Result<McEstimate> {
    mc_fiber_volume_with(a, x, trials, seed, Execution::default())
}

/// Rejection sampling in the bounding box of the fiber in kernel-lattice
/// coordinates. Samples are drawn in chunks with one stream per chunk, so
/// the estimate does not depend on the execution policy.
pub fn mc_fiber_volume_with(
    a: &ToricAction,
    x: &[Rat],
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<McEstimate> {
    let f = fiber(a, x)?;
    let verts = f.vertices()?;
    if f.m == 0 {
        return Ok(McEstimate { estimate: 1.0, std_error: 0.0, trials });
    }
    if !f.is_full_dimensional(&verts) {
        return Err(Error::DegenerateFiber);
    }
    let m = f.m;
    let lo: Vec<f64> = (0..m).map(|j| verts.iter().map(|v| rat_to_f64(&v[j])).fold(f64::INFINITY, f64::min)).collect();
    let hi: Vec<f64> =
        (0..m).map(|j| verts.iter().map(|v| rat_to_f64(&v[j])).fold(f64::NEG_INFINITY, f64::max)).collect();
    let box_volume: f64 = lo.iter().zip(&hi).map(|(l, h)| h - l).product();
    let ineqs: Vec<(Vec<f64>, f64)> =
        f.ineqs.iter().map(|(w, c)| (w.iter().map(rat_to_f64).collect(), rat_to_f64(c))).collect();

    let chunks: Vec<usize> = (0..trials.div_ceil(MC_CHUNK)).collect();
    let hits: usize = par::map(exec, &chunks, |&ci| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(ci as u64);
        let count = MC_CHUNK.min(trials - ci * MC_CHUNK);
        let mut t = vec![0.0; m];
        let mut inside = 0;
        for _ in 0..count {
            for j in 0..m {
                t[j] = lo[j] + (hi[j] - lo[j]) * rng.gen::<f64>();
            }
            if ineqs.iter().all(|(w, c)| w.iter().zip(&t).map(|(a, b)| a * b).sum::<f64>() <= *c) {
                inside += 1;
            }
        }
        inside
    })
    .into_iter()
    .sum();
    let p = hits as f64 / trials as f64;
    Ok(McEstimate { estimate: box_volume * p, std_error: box_volume * (p * (1.0 - p) / trials as f64).sqrt(), trials })
}

/// The fiber over `x` as a point of `R^n` when `n = k`.
pub fn point_fiber(a: &ToricAction, x: &[Rat]) -> Result<RatVec> {
    let f = fiber(a, x)?;
    f.vertices()?;
    Ok(f.base)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ratio, rvec};
    use crate::polyhedron::{HPolytope, Halfspace};
    use crate::toric::hamiltonian_stratification;

    fn hp(rows: &[(&[i64], i64)]) -> HPolytope {
        let dim = rows[0].0.len();
        HPolytope::new(dim, rows.iter().map(|(a, b)| Halfspace::new(rvec(a), rat(*b))).collect()).unwrap()
    }

    fn prism() -> ToricAction {
        let p = hp(&[(&[-1, 0, 0], 0), (&[1, 0, 0], 1), (&[0, -1, 0], 0), (&[0, 0, -1], 0), (&[0, 1, 1], 3)]);
        ToricAction::from_projection(p, RatMat::from_i64(3, &[&[1, 1, 0], &[0, 0, 1]])).unwrap()
    }

    #[test]
    fn prism_fiber_volumes() {
        let a = prism();
        assert_eq!(fiber_volume(&a, &[ratio(1, 2), rat(1)]).unwrap().volume, ratio(1, 2));
        assert_eq!(fiber_volume(&a, &rvec(&[2, 2])).unwrap().volume, rat(0));
        assert_eq!(fiber_volume(&a, &rvec(&[2, 1])).unwrap().volume, rat(1));
        assert_eq!(fiber_volume(&a, &rvec(&[9, 9])), Err(Error::EmptyFiber));
        assert_eq!(mc_fiber_volume(&a, &rvec(&[2, 2]), 100, 1), Err(Error::DegenerateFiber));
    }

    #[test]
    fn pulling_volume_of_cube_and_simplex() {
        let cube = hp(&[
            (&[-1, 0, 0], 0),
            (&[1, 0, 0], 2),
            (&[0, -1, 0], 0),
            (&[0, 1, 0], 2),
            (&[0, 0, -1], 0),
            (&[0, 0, 1], 2),
        ]);
        let t: Vec<(RatVec, Rat)> = cube.ineqs().iter().map(|h| (h.normal.clone(), h.offset.clone())).collect();
        assert_eq!(polytope_volume(cube.vertices().unwrap(), &t, 3), rat(8));
        let simplex = hp(&[(&[-1, 0, 0], 0), (&[0, -1, 0], 0), (&[0, 0, -1], 0), (&[1, 1, 1], 3)]);
        let t: Vec<(RatVec, Rat)> = simplex.ineqs().iter().map(|h| (h.normal.clone(), h.offset.clone())).collect();
        assert_eq!(polytope_volume(simplex.vertices().unwrap(), &t, 3), ratio(9, 2));
    }

    #[test]
    fn identity_fibers_are_points() {
        let sq = hp(&[(&[-1, 0], 0), (&[1, 0], 1), (&[0, -1], 0), (&[0, 1], 1)]);
        let a = ToricAction::new(sq, RatMat::identity(2)).unwrap();
        assert_eq!(fiber_volume(&a, &[ratio(1, 3), ratio(1, 2)]).unwrap().volume, rat(1));
        let mc = mc_fiber_volume(&a, &[ratio(1, 3), ratio(1, 2)], 10, 0).unwrap();
        assert_eq!(mc.estimate, 1.0);
        let s = hamiltonian_stratification(&a).unwrap();
        let top = s.top_strata().next().unwrap().id;
        let p = density_polynomial(&a, &s, top).unwrap();
        assert_eq!(p.to_string(), "1");
        assert!(matches!(density_polynomial(&a, &s, 0), Err(Error::NotTopDimensional { .. })));
        assert_eq!(density_polynomial(&a, &s, 99), Err(Error::UnknownStratum(99)));
    }

    #[test]
    fn simplex_sum_density() {
        let p = hp(&[(&[-1, 0], 0), (&[0, -1], 0), (&[1, 1], 2)]);
        let a = ToricAction::from_projection(p, RatMat::from_i64(2, &[&[1, 1]])).unwrap();
        let s = hamiltonian_stratification(&a).unwrap();
        let top = s.top_strata().next().unwrap().id;
        let poly = density_polynomial(&a, &s, top).unwrap();
        assert_eq!(poly.to_string(), "t");
        assert_eq!(poly.degree, 1);
    }

    #[test]
    fn display_and_monomials() {
        assert_eq!(monomials(2, 1), vec![vec![0, 0], vec![1, 0], vec![0, 1]]);
        assert_eq!(monomials(3, 2).len(), 10);
        let mut c = BTreeMap::new();
        c.insert(vec![0, 0], rat(4));
        c.insert(vec![1, 0], rat(-1));
        c.insert(vec![0, 1], rat(-1));
        c.insert(vec![2, 1], ratio(1, 2));
        c.insert(vec![1, 1], rat(0));
        let p = DensityPoly::new(0, 2, c);
        assert_eq!(p.degree, 3);
        assert_eq!(p.to_string(), "1/2*x^2*y - x - y + 4");
    }

    #[test]
    fn monte_carlo_is_policy_independent() {
        let a = prism();
        let x = [ratio(1, 2), rat(1)];
        let s = mc_fiber_volume_with(&a, &x, 20_000, 7, Execution::Sequential).unwrap();
        let p = mc_fiber_volume_with(&a, &x, 20_000, 7, Execution::Parallel).unwrap();
        assert_eq!(s, p);
        assert!(s.agrees_with(0.5, 4.0));
    }

    #[test]
    fn interval_fibers_fill_their_box() {
        let a = prism();
        let e = mc_fiber_volume(&a, &[ratio(1, 3), ratio(1, 7)], 1000, 1).unwrap();
        assert_eq!(e.std_error, 0.0);
        assert!(e.agrees_with(1.0 / 3.0, 4.0));
        assert!(!e.agrees_with(0.3334, 4.0));
    }
}
