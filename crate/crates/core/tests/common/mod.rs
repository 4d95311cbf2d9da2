#![allow(dead_code)]

use std::collections::BTreeSet;

use num_rational::Rational64;
use topomin::complex::{Complex, FaceSet};

/// Index of the face spanned by the given lattice points.
pub fn face(k: &Complex, points: &[&[i64]]) -> usize {
    let verts: Vec<usize> = points.iter().map(|p| k.vertex_at(p).expect("point in box")).collect();
    k.find(&verts).expect("face of the grid").0
}

/// All `dim`-faces whose vertices all satisfy `pred`.
pub fn faces_where(k: &Complex, dim: usize, pred: impl Fn(&[i64]) -> bool) -> Vec<usize> {
    (0..k.count(dim))
        .filter(|&f| k.simplex(dim, f).vertices().iter().all(|&v| pred(&k.lattice_point(v))))
        .collect()
}

/// Whether every vertex of simplex `(dim, i)` lies on one common facet of the box.
pub fn on_box_boundary(k: &Complex, dim: usize, i: usize) -> bool {
    let lattice = k.lattice().expect("grid complex").to_vec();
    let pts: Vec<Vec<i64>> = k.simplex(dim, i).vertices().iter().map(|&v| k.lattice_point(v)).collect();
    (0..lattice.len()).any(|a| {
        pts.iter().all(|p| p[a] == 0) || pts.iter().all(|p| p[a] == lattice[a] as i64)
    })
}

/// Faces of `set`'s closure lying in the box boundary.
pub fn boundary_trace(set: &FaceSet<'_>) -> Vec<BTreeSet<usize>> {
    let k = set.complex();
    set.closure()
        .into_iter()
        .enumerate()
        .map(|(dim, faces)| faces.into_iter().filter(|&i| on_box_boundary(k, dim, i)).collect())
        .collect()
}

/// Free-face collapses `(free, face)` that leave the box boundary untouched:
/// the free face is not in the boundary and removing the face does not
/// change the part of the closure lying in the boundary.
pub fn interior_collapses(set: &FaceSet<'_>) -> Vec<(usize, usize)> {
    let k = set.complex();
    let before = boundary_trace(set);
    let mut seen = BTreeSet::new();
    topomin::complement::free_faces(set)
        .into_iter()
        .filter(|&(free, face)| {
            !on_box_boundary(k, set.dim() - 1, free)
                && seen.insert(face)
                && boundary_trace(&set.removed(face)) == before
        })
        .collect()
}

/// Union-find over `0..n`.
pub struct Dsu(Vec<usize>);

impl Dsu {
    pub fn new(n: usize) -> Self {
        Dsu((0..n).collect())
    }
    pub fn find(&mut self, x: usize) -> usize {
        let p = self.0[x];
        if p == x {
            return x;
        }
        let r = self.find(p);
        self.0[x] = r;
        r
    }
    pub fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

/// Components of a planar box minus a set of edges, computed on triangles:
/// two triangles connect across a shared edge outside the set or around a
/// shared vertex outside the set's closure. Returns the component count and,
/// per lattice vertex outside the closure, its component root.
pub fn planar_components(set: &FaceSet<'_>) -> (usize, Vec<Option<usize>>) {
    let k = set.complex();
    assert_eq!((k.ambient_dim(), set.dim()), (2, 1));
    let closure = set.closure();
    let tris = k.count(2);
    let mut dsu = Dsu::new(tris);
    let mut around: Vec<Vec<usize>> = vec![Vec::new(); k.count(0)];
    let mut across: Vec<Vec<usize>> = vec![Vec::new(); k.count(1)];
    for t in 0..tris {
        for &v in k.simplex(2, t).vertices() {
            around[v].push(t);
        }
        for (_, e) in k.face_indices(2, t) {
            across[e].push(t);
        }
    }
    for (e, ts) in across.iter().enumerate() {
        if !set.contains(e) {
            for w in ts.windows(2) {
                dsu.union(w[0], w[1]);
            }
        }
    }
    for (v, ts) in around.iter().enumerate() {
        if !closure[0].contains(&v) {
            for w in ts.windows(2) {
                dsu.union(w[0], w[1]);
            }
        }
    }
    let roots: BTreeSet<usize> = (0..tris).map(|t| dsu.find(t)).collect();
    let of_vertex = (0..k.count(0))
        .map(|v| (!closure[0].contains(&v)).then(|| dsu.find(around[v][0])))
        .collect();
    (roots.len(), of_vertex)
}

/// A small solver instance: box, per-face weights, constraints and a
/// feasible candidate pool that avoids every constraint.
pub struct Instance {
    pub cells: Vec<usize>,
    pub dim: usize,
    pub weights: Vec<f64>,
    pub constraints: Vec<topomin::complement::ConstraintCycle>,
    pub pool: Vec<usize>,
}

/// Pool cap for instances constrained by a loop.
pub const LOOP_POOL: usize = 12;

/// Deterministic random instance with at most `max_pool` candidate faces.
/// Kinds rotate through planar separation, surfaces in 3D and curves in 3D
/// linked by loops.
pub fn random_instance(seed: u64, max_pool: usize) -> Instance {
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use topomin::complement::ConstraintCycle;
    use topomin::complex::build_grid_complex;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let (cells, dim, constraints, base): (Vec<usize>, usize, Vec<ConstraintCycle>, Box<dyn Fn(&[i64]) -> bool>) =
        match seed % 3 {
            0 => {
                let (w, h) = (rng.random_range(2..=4usize), rng.random_range(2..=3usize));
                let row = rng.random_range(1..h as i64);
                let cols: Vec<i64> = (0..=w as i64).filter(|_| rng.random_bool(0.5)).collect();
                let cols = if cols.is_empty() { vec![0] } else { cols };
                let cs = cols
                    .iter()
                    .map(|&x| ConstraintCycle::PointPair { p: vec![x, 0], q: vec![x, h as i64] })
                    .collect();
                (vec![w, h], 1, cs, Box::new(move |p: &[i64]| p[1] == row))
            }
            1 => {
                let cs = vec![ConstraintCycle::PointPair { p: vec![1, 1, 0], q: vec![1, 1, 2] }];
                (vec![2, 2, 2], 2, cs, Box::new(|p: &[i64]| p[2] == 1))
            }
            _ => {
                let ring = [(0, 0), (1, 0), (2, 0), (2, 1), (2, 2), (1, 2), (0, 2), (0, 1)];
                let points = ring.iter().map(|&(y, z)| vec![0, y, z]).collect();
                let cs = vec![ConstraintCycle::Loop { points }];
                (vec![2, 2, 2], 1, cs, Box::new(|p: &[i64]| p[1] == 1 && p[2] == 1))
            }
        };
    let k = build_grid_complex(cells.len(), &cells, 1.0).unwrap();
    let touching = |f: usize| -> bool {
        let faces = k.simplex(dim, f).all_faces();
        constraints.iter().any(|c| {
            let chain = c.ambient_chain(&k).unwrap();
            let hit = chain.support().any(|i| k.simplex(chain.dim(), i).all_faces().iter().any(|g| faces.contains(g)));
            hit
        })
    };
    let usable: Vec<usize> = (0..k.count(dim)).filter(|&f| !touching(f)).collect();
    let mut pool: Vec<usize> = usable.iter().copied().filter(|&f| {
        k.simplex(dim, f).vertices().iter().all(|&v| base(&k.lattice_point(v)))
    }).collect();
    let mut rest: Vec<usize> = usable.iter().copied().filter(|f| !pool.contains(f)).collect();
    rest.shuffle(&mut rng);
    // Loop constraints need a full homology computation per check.
    let max_pool = if seed % 3 == 2 { max_pool.min(LOOP_POOL) } else { max_pool };
    let extra = max_pool.saturating_sub(pool.len());
    pool.extend(rest.into_iter().take(extra));
    pool.sort_unstable();
    let levels = [1.0, 1.25, 1.5, 2.0, 3.0];
    let weights = (0..k.count(dim)).map(|_| levels[rng.random_range(0..levels.len())]).collect();
    Instance { cells, dim, weights, constraints, pool }
}

/// Output of one run of the command-line binary.
pub struct CliRun {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run_cli(args: &[&str]) -> CliRun {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_topomin")).args(args).output().expect("binary runs");
    CliRun {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).expect("utf-8 stdout"),
        stderr: String::from_utf8(out.stderr).expect("utf-8 stderr"),
    }
}

/// Path of a bundled example problem.
pub fn example(name: &str) -> String {
    format!("{}/problems/{name}", env!("CARGO_MANIFEST_DIR"))
}

/// Report text with the timing field removed.
pub fn without_timing(report: &str) -> String {
    report.lines().filter(|l| !l.trim_start().starts_with("\"timing_ms\"")).collect::<Vec<_>>().join("\n")
}

/// Complex on vertices `0..nv` placed on a line, generated by `tops`.
pub fn abstract_complex(nv: usize, tops: Vec<Vec<usize>>) -> Complex {
    let coords = (0..nv).map(|v| vec![Rational64::from_integer(v as i64)]).collect();
    Complex::from_simplices(coords, 1.0, tops).unwrap()
}

/// 3x3 square grid with opposite sides glued, each square split along its diagonal.
pub fn glued_grid(twisted: bool) -> Complex {
    let canon = |mut x: usize, mut y: usize| {
        if y == 3 {
            y = 0;
            if twisted {
                x = (3 - x) % 3;
            }
        }
        if x == 3 {
            x = 0;
        }
        3 * y + x
    };
    let mut tops = Vec::new();
    for x in 0..3 {
        for y in 0..3 {
            tops.push(vec![canon(x, y), canon(x + 1, y), canon(x + 1, y + 1)]);
            tops.push(vec![canon(x, y), canon(x, y + 1), canon(x + 1, y + 1)]);
        }
    }
    abstract_complex(9, tops)
}
