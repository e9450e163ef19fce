use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use strata_core::linalg::{rat, ratio, rvec, RatVec};
use strata_core::polyhedron::{common_refinement, HPolytope, Halfspace, RelOpenCell};

fn points(dim: usize, count: std::ops::Range<usize>) -> impl Strategy<Value = Vec<RatVec>> {
    prop::collection::vec(prop::collection::vec(-5i64..=5, dim), count)
        .prop_map(|ps| ps.into_iter().map(|p| p.into_iter().map(rat).collect()).collect())
}

proptest! {
    #[test]
    fn hull_cells_are_canonical(pts in points(2, 1..7)) {
        let c = RelOpenCell::from_vertices(&pts).unwrap();
        let mut rev = pts.clone();
        rev.reverse();
        // adding a midpoint changes nothing
        let mid: RatVec = pts[0].iter().zip(pts.last().unwrap()).map(|(a, b)| (a + b) / rat(2)).collect();
        rev.push(mid);
        prop_assert_eq!(&RelOpenCell::from_vertices(&rev).unwrap(), &c);
        prop_assert!(c.contains(&c.sample_point()));
        for v in c.vertices() {
            prop_assert!(c.closure_contains(v));
            prop_assert_eq!(c.contains(v), c.dim() == 0);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..4 {
            prop_assert!(c.contains(&c.random_point(&mut rng)));
        }
    }

    #[test]
    fn faces_partition_the_closure(pts in points(3, 4..7)) {
        let c = RelOpenCell::from_vertices(&pts).unwrap();
        let faces = c.face_cells();
        for (i, a) in faces.iter().enumerate() {
            for b in &faces[i + 1..] {
                prop_assert!(!a.meets(b));
            }
        }
        for p in &pts {
            prop_assert_eq!(faces.iter().filter(|f| f.contains(p)).count(), 1);
        }
    }

    #[test]
    fn refinement_is_a_partition(cuts in prop::collection::vec((points(2, 2..3), any::<bool>()), 1..4)) {
        let square = RelOpenCell::from_vertices(&[rvec(&[0, 0]), rvec(&[4, 0]), rvec(&[0, 4]), rvec(&[4, 4])]).unwrap();
        let cells: Vec<RelOpenCell> = cuts
            .iter()
            .map(|(ps, point)| {
                if *point {
                    RelOpenCell::point(ps[0].clone())
                } else {
                    RelOpenCell::from_vertices(ps).unwrap()
                }
            })
            .collect();
        let pieces = common_refinement(&cells, &square).unwrap();
        for (i, a) in pieces.iter().enumerate() {
            prop_assert!(square.contains_cell(a));
            for b in &pieces[i + 1..] {
                prop_assert!(!a.meets(b));
            }
            // membership in every input cell is constant on a piece
            for c in &cells {
                prop_assert!(c.contains_cell(a) || !c.meets(a));
            }
        }
        for x in 0..=8 {
            for y in 0..=8 {
                let p = vec![ratio(x, 2), ratio(y, 2)];
                let want = usize::from(square.contains(&p));
                prop_assert_eq!(pieces.iter().filter(|c| c.contains(&p)).count(), want);
            }
        }
    }
}

#[test]
fn cube_has_the_expected_face_lattice() {
    let mut ineqs = Vec::new();
    for i in 0..3 {
        let mut e = vec![rat(0); 3];
        e[i] = rat(1);
        ineqs.push(Halfspace::new(e.clone(), rat(1)));
        ineqs.push(Halfspace::new(e.iter().map(|x| -x).collect(), rat(0)));
    }
    let cube = HPolytope::new(3, ineqs).unwrap();
    assert_eq!(cube.vertices().unwrap().len(), 8);
    let l = cube.face_lattice().unwrap();
    let mut by_dim = [0; 4];
    for f in l.nonempty_faces() {
        by_dim[f.dim as usize] += 1;
    }
    assert_eq!(by_dim, [8, 12, 6, 1]);
}
