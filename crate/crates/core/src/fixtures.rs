//! Standard inputs and a generator of random toric instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cover::PiecewiseAffineCover;
use crate::linalg::{dot, rat, rvec, RatMat, RatVec};
use crate::polyhedron::{HPolytope, Halfspace, RelOpenCell};
use crate::toric::ToricAction;

fn hp(rows: &[(&[i64], i64)]) -> HPolytope {
    let dim = rows[0].0.len();
    HPolytope::new(dim, rows.iter().map(|(a, b)| Halfspace::new(rvec(a), rat(*b))).collect()).expect("bounded nonempty")
}

/// `[0,1] x 3Δ²` in `(u, v1, v2)` with `π(u, v) = (u + v1, v2)`.
pub fn prism_example() -> ToricAction {
    let p = hp(&[(&[-1, 0, 0], 0), (&[1, 0, 0], 1), (&[0, -1, 0], 0), (&[0, 0, -1], 0), (&[0, 1, 1], 3)]);
    ToricAction::from_projection(p, RatMat::from_i64(3, &[&[1, 1, 0], &[0, 0, 1]])).expect("rank 2")
}

/// The unit square with the identity projection.
pub fn square_identity() -> ToricAction {
    let p = hp(&[(&[-1, 0], 0), (&[1, 0], 1), (&[0, -1], 0), (&[0, 1], 1)]);
    ToricAction::new(p, RatMat::identity(2)).expect("rank 2")
}

/// `conv{(0,0), (2,0), (0,2)}` with `π(x, y) = x + y`.
pub fn simplex_sum() -> ToricAction {
    let p = hp(&[(&[-1, 0], 0), (&[0, -1], 0), (&[1, 1], 2)]);
    ToricAction::from_projection(p, RatMat::from_i64(2, &[&[1, 1]])).expect("rank 1")
}

/// Two open half-axes and an open box around them: the closures of the
/// half-axes contain the origin, which is not a union of members.
pub fn slit_box() -> PiecewiseAffineCover {
    let cell = |v: &[&[i64]]| RelOpenCell::from_vertices(&v.iter().map(|p| rvec(p)).collect::<Vec<_>>()).unwrap();
    PiecewiseAffineCover::new(
        2,
        vec![cell(&[&[-1, 0], &[0, 0]]), cell(&[&[0, 0], &[1, 0]]), cell(&[&[-1, -1], &[1, -1], &[-1, 1], &[1, 1]])],
    )
    .expect("planar")
}

#[derive(Clone, Debug)]
pub struct RandomToric {
    pub seed: u64,
    /// Block dimensions of the product polytope before the coordinate change.
    pub blocks: Vec<usize>,
    pub action: ToricAction,
}

/// Bounds for [`random_toric`].
#[derive(Clone, Copy, Debug)]
pub struct RandomToricParams {
    pub max_n: usize,
    pub max_k: usize,
    /// Largest dilation of a simplex block.
    pub max_scale: i64,
    /// Largest absolute entry of `B`.
    pub max_entry: i64,
}

impl Default for RandomToricParams {
    fn default() -> Self {
        Self { max_n: 4, max_k: 3, max_scale: 3, max_entry: 2 }
    }
}

/// A product of dilated simplices and intervals in `R^n`, moved by a random
/// unimodular map and an integer translation, with a random integral `B` of
/// rank `k`.
pub fn random_toric(seed: u64, params: RandomToricParams) -> RandomToric {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=params.max_n);
    let k = rng.gen_range(1..=params.max_k.min(n));

    let mut blocks = Vec::new();
    let mut left = n;
    while left > 0 {
        let d = rng.gen_range(1..=left.min(3));
        blocks.push(d);
        left -= d;
    }
    // inequalities of the product in original coordinates
    let mut rows: Vec<(RatVec, i64)> = Vec::new();
    let mut off = 0;
    for &d in &blocks {
        let s = rng.gen_range(1..=params.max_scale);
        for i in 0..d {
            let mut e = vec![rat(0); n];
            e[off + i] = rat(-1);
            rows.push((e, 0));
        }
        let mut sum = vec![rat(0); n];
        for i in 0..d {
            sum[off + i] = rat(1);
        }
        rows.push((sum, s));
        off += d;
    }

    // y = U x + t; a · x <= b becomes (U^{-T} a) · y <= b + (U^{-T} a) · t
    let (u_inv_t, t) = unimodular_change(&mut rng, n);
    let ineqs: Vec<Halfspace> = rows
        .into_iter()
        .map(|(a, b)| {
            let a2 = u_inv_t.mul_vec(&a);
            let off = dot(&a2, &t);
            Halfspace::new(a2, rat(b) + off)
        })
        .collect();
    let polytope = HPolytope::new(n, ineqs).expect("image of a polytope");

    let b = loop {
        let rows: Vec<RatVec> = (0..n)
            .map(|_| (0..k).map(|_| rat(rng.gen_range(-params.max_entry..=params.max_entry))).collect())
            .collect();
        let b = RatMat::new(k, rows).expect("width k");
        if b.rank() == k {
            break b;
        }
    };
    RandomToric { seed, blocks, action: ToricAction::new(polytope, b).expect("integral of rank k") }
}

/// Fifty instances with `n <= 4` followed by larger ones with `n <= 6`:
/// those with `k <= 2` and at most 140 faces, or `k = 1` and up to 1000.
pub fn random_corpus() -> Vec<RandomToric> {
    let small = RandomToricParams::default();
    let large = RandomToricParams { max_n: 6, ..small };
    let mut out: Vec<RandomToric> = (0..50).map(|seed| random_toric(seed, small)).collect();
    let extra = (1000..1100).map(|seed| random_toric(seed, large)).filter(|r| {
        let faces = r.action.polytope().face_lattice().map_or(usize::MAX, |l| l.faces.len());
        r.action.n() >= 5 && r.action.k() <= 2 && (faces <= 140 || r.action.k() == 1 && faces <= 1000)
    });
    out.extend(extra);
    out
}

/// `(U^{-T}, t)` for a random product `U` of elementary integer matrices.
fn unimodular_change(rng: &mut ChaCha8Rng, n: usize) -> (RatMat, RatVec) {
    let mut inv_t = RatMat::identity(n);
    for _ in 0..n {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i == j {
            continue;
        }
        let c = rng.gen_range(-1..=1);
        // U <- (I + c e_i e_j^T) U, so U^{-T} <- (I - c e_j e_i^T) U^{-T}
        let mut e = RatMat::identity(n).into_rows();
        e[j][i] = rat(-c);
        inv_t = RatMat::new(n, e).expect("square").mul(&inv_t).expect("square");
    }
    let t = (0..n).map(|_| rat(rng.gen_range(-2..=2))).collect();
    (inv_t, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_instances_are_well_formed() {
        for seed in 0..20 {
            let r = random_toric(seed, RandomToricParams::default());
            let a = &r.action;
            assert!(a.n() <= 4 && a.k() <= a.n());
            assert_eq!(r.blocks.iter().sum::<usize>(), a.n());
            assert!(a.polytope().vertices().unwrap().len() > a.n());
            // a unimodular image of a lattice polytope keeps integral vertices
            assert!(a.polytope().vertices().unwrap().iter().flatten().all(|x| x.is_integer()));
        }
    }

    #[test]
    fn deterministic() {
        let p = RandomToricParams::default();
        assert_eq!(random_toric(7, p).action, random_toric(7, p).action);
    }
}
