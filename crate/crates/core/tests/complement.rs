mod common;

use common::{face, faces_where, interior_collapses, planar_components};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use topomin::complement::{
    competitor_check, complement_subcomplex, realize_constraint, spanning_check, spanning_check_with, spanning_report,
    ConstraintCycle, CycleTerm, Region, SpanningVerdict,
};
use topomin::complex::{build_grid_complex, FaceSet};
use topomin::homology::{homology_group, is_null_homologous};
use topomin::{Error, Execution};

fn square_loop(center: [i64; 2], axes: [usize; 2], n: usize, fixed: &[(usize, i64)]) -> ConstraintCycle {
    let ring = [(-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0)];
    let points = ring
        .iter()
        .map(|&(du, dv)| {
            let mut p = vec![0; n];
            for &(a, x) in fixed {
                p[a] = x;
            }
            p[axes[0]] = center[0] + du;
            p[axes[1]] = center[1] + dv;
            p
        })
        .collect();
    ConstraintCycle::Loop { points }
}

#[test]
fn plane_in_4d_has_one_linking_class() {
    let k = build_grid_complex(4, &[3, 3, 3, 3], 1.0).unwrap();
    let plane = FaceSet::new(&k, 2, faces_where(&k, 2, |p| p[2] == 1 && p[3] == 1)).unwrap();
    let model = complement_subcomplex(&k, &plane);
    assert_eq!(homology_group(&model, 1).unwrap().rank, 1);
    assert_eq!(homology_group(&model, 0).unwrap().rank, 1);

    let linking = square_loop([1, 1], [2, 3], 4, &[(0, 0), (1, 0)]);
    let apart = square_loop([1, 1], [0, 1], 4, &[(2, 3), (3, 3)]);
    let verdicts = spanning_check(&k, &plane, &[linking, apart]).unwrap();
    assert_eq!(verdicts, vec![SpanningVerdict::Pass, SpanningVerdict::Killed]);
}

#[test]
fn line_in_3d_is_linked_by_a_loop() {
    let k = build_grid_complex(3, &[3, 2, 2], 1.0).unwrap();
    let line = FaceSet::new(&k, 1, faces_where(&k, 1, |p| p[1] == 1 && p[2] == 1)).unwrap();
    let around = square_loop([1, 1], [1, 2], 3, &[(0, 0)]);
    let report = spanning_report(&k, &line, &[around.clone()], Execution::Sequential, true).unwrap();
    assert_eq!(report[0].verdict, SpanningVerdict::Pass);
    assert_eq!(report[0].homology_rank, Some(1));

    // cutting the line leaves the loop free to slide off
    let cut = line.removed(face(&k, &[&[1, 1, 1], &[2, 1, 1]]));
    assert_eq!(spanning_check(&k, &cut, &[around]).unwrap(), vec![SpanningVerdict::Killed]);
}

#[test]
fn general_cycles_and_degenerate_loops() {
    let k = build_grid_complex(2, &[2, 2], 1.0).unwrap();
    let row = FaceSet::new(&k, 1, faces_where(&k, 1, |p| p[1] == 1)).unwrap();
    let model = complement_subcomplex(&k, &row);
    let back_and_forth = ConstraintCycle::Loop { points: vec![vec![0, 0], vec![1, 0]] };
    assert!(realize_constraint(&back_and_forth, &model).unwrap().degenerate);

    // 2([q] - [p]) as an explicit 0-cycle
    let twice = ConstraintCycle::Cycle {
        degree: 0,
        terms: vec![
            CycleTerm { coef: 2, simplex: vec![vec![0, 2]] },
            CycleTerm { coef: -2, simplex: vec![vec![0, 0]] },
        ],
    };
    assert_eq!(spanning_check(&k, &row, &[twice]).unwrap(), vec![SpanningVerdict::Pass]);
    let unbalanced = ConstraintCycle::Cycle { degree: 0, terms: vec![CycleTerm { coef: 1, simplex: vec![vec![0, 0]] }] };
    assert_eq!(spanning_check(&k, &FaceSet::empty(&k, 1).unwrap(), &[unbalanced]).unwrap(), vec![SpanningVerdict::Pass]);
}

#[test]
fn competitor_region_rules() {
    let k = build_grid_complex(2, &[4, 3], 1.0).unwrap();
    let row = FaceSet::new(&k, 1, faces_where(&k, 1, |p| p[1] == 1)).unwrap();
    let region = Region::new(vec![1, 0], vec![3, 3]).unwrap();
    let inside = vec![ConstraintCycle::PointPair { p: vec![2, 2], q: vec![0, 0] }];
    assert!(matches!(competitor_check(&row, &row, &region, &inside), Err(Error::Precondition(_))));

    let far = vec![ConstraintCycle::PointPair { p: vec![0, 0], q: vec![0, 3] }];
    // a bump inside the region keeps separating
    let bump = row
        .removed(face(&k, &[&[1, 1], &[2, 1]]))
        .inserted(face(&k, &[&[1, 1], &[2, 2]]))
        .inserted(face(&k, &[&[2, 1], &[2, 2]]));
    let verdict = competitor_check(&row, &bump, &region, &far).unwrap();
    assert!(verdict.overall && verdict.boundary_match);
    // a hole inside the region does not
    let hole = row.removed(face(&k, &[&[2, 1], &[3, 1]]));
    assert!(!competitor_check(&row, &hole, &region, &far).unwrap().overall);
    // changes outside the region break the boundary match
    let outside = row.removed(face(&k, &[&[3, 1], &[4, 1]]));
    assert!(!competitor_check(&row, &outside, &region, &far).unwrap().boundary_match);
}

#[test]
fn strategies_agree_on_reports() {
    let k = build_grid_complex(3, &[2, 2, 2], 1.0).unwrap();
    let line = FaceSet::new(&k, 1, faces_where(&k, 1, |p| p[1] == 1 && p[2] == 1)).unwrap();
    let cs = vec![
        square_loop([1, 1], [1, 2], 3, &[(0, 0)]),
        square_loop([1, 1], [1, 2], 3, &[(0, 2)]),
        square_loop([1, 1], [0, 1], 3, &[(2, 0)]),
    ];
    let a = spanning_report(&k, &line, &cs, Execution::Sequential, true).unwrap();
    let b = spanning_report(&k, &line, &cs, Execution::Parallel, true).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.iter().map(|r| r.verdict).collect::<Vec<_>>(), vec![
        SpanningVerdict::Pass,
        SpanningVerdict::Pass,
        SpanningVerdict::Killed
    ]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Complement component counts in the plane agree with a triangle-adjacency
    /// union-find, and point-pair verdicts follow its components.
    #[test]
    fn planar_complements_match_union_find(seed in any::<u64>(), w in 2usize..=4, h in 2usize..=4) {
        let k = build_grid_complex(2, &[w, h], 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let density = rng.random_range(0.1..0.7);
        let faces: Vec<usize> = (0..k.count(1)).filter(|_| rng.random_bool(density)).collect();
        let set = FaceSet::new(&k, 1, faces).unwrap();
        let (count, of_vertex) = planar_components(&set);
        let model = complement_subcomplex(&k, &set);
        prop_assert_eq!(homology_group(&model, 0).unwrap().rank, count);

        let free: Vec<usize> = (0..k.count(0)).filter(|&v| of_vertex[v].is_some()).collect();
        prop_assume!(free.len() >= 2);
        let (a, b) = (free[rng.random_range(0..free.len())], free[rng.random_range(0..free.len())]);
        prop_assume!(a != b);
        let pair = ConstraintCycle::PointPair { p: k.lattice_point(a), q: k.lattice_point(b) };
        let verdict = spanning_check_with(&k, &set, &[pair.clone()], Execution::Sequential).unwrap()[0];
        let same = of_vertex[a] == of_vertex[b];
        prop_assert_eq!(verdict, if same { SpanningVerdict::Killed } else { SpanningVerdict::Pass });
        // the homological test in the full model agrees with the component test
        let z = model.subdivide(&pair.ambient_chain(&k).unwrap()).unwrap();
        prop_assert_eq!(is_null_homologous(&model, &z).unwrap().0, same);
    }

    /// Interior free-face collapses never change a verdict.
    #[test]
    fn collapses_keep_verdicts(seed in any::<u64>()) {
        let k = build_grid_complex(2, &[4, 3], 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pairs: Vec<ConstraintCycle> =
            (0..=4).map(|x| ConstraintCycle::PointPair { p: vec![x, 0], q: vec![x, 3] }).collect();
        let row = rng.random_range(1..=2);
        let mut faces = faces_where(&k, 1, |p| p[1] == row);
        let interior: Vec<usize> = faces_where(&k, 1, |p| p[1] > 0 && p[1] < 3);
        faces.extend(interior.iter().copied().filter(|_| rng.random_bool(0.3)));
        let mut set = FaceSet::new(&k, 1, faces).unwrap();
        let before = spanning_check(&k, &set, &pairs).unwrap();
        prop_assert!(before.iter().all(|v| v.passed()));
        for _ in 0..6 {
            let moves = interior_collapses(&set);
            if moves.is_empty() {
                break;
            }
            let (_, f) = moves[rng.random_range(0..moves.len())];
            set = set.removed(f);
            prop_assert_eq!(&spanning_check(&k, &set, &pairs).unwrap(), &before);
        }
    }
}
