//! 2-vectors in R⁴, orthogonal projections onto planes, characteristic
//! angles, and numerical checks of the projection inequalities
//! `|p¹ξ| + |p²ξ| ≤ 1` (orthogonal planes) and `≤ 1 + 2cos α₁` (general).

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;

pub type Vec4 = [f64; 4];

/// Index pairs of the basis `e_i ∧ e_j`, `i < j`, in storage order
/// 12, 13, 14, 23, 24, 34.
pub const BASIS_PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Tolerance for treating planes as orthogonal.
pub const ORTHOGONAL_TOL: f64 = 1e-12;

/// An element of Λ²R⁴ in the orthonormal basis `e_i ∧ e_j`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TwoVector(pub [f64; 6]);

impl TwoVector {
    pub fn zero() -> Self {
        TwoVector([0.0; 6])
    }

    /// `e_i ∧ e_j` for 0-based axes; swapping the axes flips the sign.
    pub fn basis(i: usize, j: usize) -> Self {
        wedge(&unit(i), &unit(j))
    }

    pub fn coords(&self) -> &[f64; 6] {
        &self.0
    }

    pub fn dot(&self, other: &TwoVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    /// Euclidean norm: the square root of the sum of squared coordinates.
    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scaled(&self, k: f64) -> Self {
        TwoVector(self.0.map(|x| x * k))
    }

    pub fn add(&self, other: &TwoVector) -> Self {
        let mut out = self.0;
        for (o, b) in out.iter_mut().zip(&other.0) {
            *o += b;
        }
        TwoVector(out)
    }

    pub fn neg(&self) -> Self {
        self.scaled(-1.0)
    }

    /// The Plücker quadratic `λ12 λ34 − λ13 λ24 + λ14 λ23`; zero exactly on
    /// simple 2-vectors.
    pub fn plucker(&self) -> f64 {
        let [l12, l13, l14, l23, l24, l34] = self.0;
        l12 * l34 - l13 * l24 + l14 * l23
    }
}

pub fn unit(i: usize) -> Vec4 {
    let mut e = [0.0; 4];
    e[i] = 1.0;
    e
}

pub fn dot4(a: &Vec4, b: &Vec4) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm4(a: &Vec4) -> f64 {
    dot4(a, a).sqrt()
}

fn axpy(a: f64, x: &Vec4, y: &Vec4) -> Vec4 {
    [a * x[0] + y[0], a * x[1] + y[1], a * x[2] + y[2], a * x[3] + y[3]]
}

fn scale4(a: f64, x: &Vec4) -> Vec4 {
    x.map(|v| a * v)
}

/// Exterior product `x ∧ y` with coordinates `x_i y_j − x_j y_i`.
pub fn wedge(x: &Vec4, y: &Vec4) -> TwoVector {
    TwoVector(BASIS_PAIRS.map(|(i, j)| x[i] * y[j] - x[j] * y[i]))
}

/// Plücker test with a tolerance relative to `|ξ|²`.
pub fn is_simple(xi: &TwoVector, tol: f64) -> bool {
    xi.plucker().abs() <= tol * xi.dot(xi)
}

/// An oriented 2-plane through the origin with an orthonormal frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneFrame {
    v1: Vec4,
    v2: Vec4,
}

impl PlaneFrame {
    /// Accepts `v1, v2` only if they are orthonormal to `1e-12`.
    pub fn orthonormal(v1: Vec4, v2: Vec4) -> Result<Self> {
        let err = (dot4(&v1, &v1) - 1.0).abs().max((dot4(&v2, &v2) - 1.0).abs()).max(dot4(&v1, &v2).abs());
        if err > 1e-12 {
            return Err(Error::Degenerate(format!("frame not orthonormal (error {err:e})")));
        }
        Ok(PlaneFrame { v1, v2 })
    }

    /// Gram–Schmidt on two spanning vectors.
    pub fn from_spanning(a: Vec4, b: Vec4) -> Result<Self> {
        let na = norm4(&a);
        if na < 1e-12 {
            return Err(Error::Degenerate("zero spanning vector".into()));
        }
        let v1 = scale4(1.0 / na, &a);
        let r = axpy(-dot4(&b, &v1), &v1, &b);
        let nr = norm4(&r);
        if nr < 1e-12 * norm4(&b).max(1.0) {
            return Err(Error::Degenerate("spanning vectors are parallel".into()));
        }
        Ok(PlaneFrame { v1, v2: scale4(1.0 / nr, &r) })
    }

    /// The coordinate plane `e_i ∧ e_j` (0-based axes).
    pub fn coordinate(i: usize, j: usize) -> Self {
        PlaneFrame { v1: unit(i), v2: unit(j) }
    }

    pub fn basis(&self) -> [Vec4; 2] {
        [self.v1, self.v2]
    }

    /// Unit 2-vector `v1 ∧ v2` representing the plane.
    pub fn two_vector(&self) -> TwoVector {
        wedge(&self.v1, &self.v2)
    }

    /// Orthogonal projection of `x` onto the plane.
    pub fn project(&self, x: &Vec4) -> Vec4 {
        let [a, b] = self.coords_of(x);
        axpy(a, &self.v1, &scale4(b, &self.v2))
    }

    /// Coordinates of the projection of `x` in the frame.
    pub fn coords_of(&self, x: &Vec4) -> [f64; 2] {
        [dot4(x, &self.v1), dot4(x, &self.v2)]
    }

    /// Distance from `x` to the plane.
    pub fn distance(&self, x: &Vec4) -> f64 {
        let p = self.project(x);
        norm4(&axpy(-1.0, &p, x))
    }

    /// The plane rotated by the orthogonal matrix `r` (row-major).
    pub fn rotated(&self, r: &[[f64; 4]; 4]) -> Self {
        let apply = |x: &Vec4| -> Vec4 { [0, 1, 2, 3].map(|i| dot4(&r[i], x)) };
        PlaneFrame { v1: apply(&self.v1), v2: apply(&self.v2) }
    }

    /// Orthonormal basis of the orthogonal complement.
    pub fn complement(&self) -> PlaneFrame {
        let mut basis: Vec<Vec4> = vec![self.v1, self.v2];
        for i in 0..4 {
            let mut w = unit(i);
            for b in &basis {
                w = axpy(-dot4(&w, b), b, &w);
            }
            let n = norm4(&w);
            if n > 1e-6 {
                basis.push(scale4(1.0 / n, &w));
            }
            if basis.len() == 4 {
                break;
            }
        }
        PlaneFrame { v1: basis[2], v2: basis[3] }
    }
}

/// `|∧₂p(ξ)|` for the orthogonal projection `p` onto `plane`.
///
/// Computed from the induced map on the basis `e_i ∧ e_j`, so the value does
/// not depend on a factorization of `ξ`.
pub fn plane_projection_norm(plane: &PlaneFrame, xi: &TwoVector) -> f64 {
    let mut image = TwoVector::zero();
    for (k, &(i, j)) in BASIS_PAIRS.iter().enumerate() {
        if xi.0[k] == 0.0 {
            continue;
        }
        let col = wedge(&plane.project(&unit(i)), &plane.project(&unit(j)));
        image = image.add(&col.scaled(xi.0[k]));
    }
    image.norm()
}

/// Principal angles `(α₁, α₂)`, `0 ≤ α₁ ≤ α₂ ≤ π/2`, between two planes.
pub fn characteristic_angles(p: &PlaneFrame, q: &PlaneFrame) -> (f64, f64) {
    let cos = singular_values_2x2(&cross_gram(p, q));
    let sin = singular_values_2x2(&cross_gram(&p.complement(), q));
    // Largest cosine pairs with the smallest sine.
    let a1 = sin[1].atan2(cos[0]);
    let a2 = sin[0].atan2(cos[1]);
    (a1.clamp(0.0, FRAC_PI_2), a2.clamp(0.0, FRAC_PI_2))
}

fn cross_gram(p: &PlaneFrame, q: &PlaneFrame) -> [[f64; 2]; 2] {
    let (pb, qb) = (p.basis(), q.basis());
    [[dot4(&pb[0], &qb[0]), dot4(&pb[0], &qb[1])], [dot4(&pb[1], &qb[0]), dot4(&pb[1], &qb[1])]]
}

/// Singular values of a 2x2 matrix, largest first.
fn singular_values_2x2(m: &[[f64; 2]; 2]) -> [f64; 2] {
    let [[a, b], [c, d]] = *m;
    let s = (a + d).hypot(b - c);
    let t = (a - d).hypot(b + c);
    [(s + t) / 2.0, ((s - t) / 2.0).abs()]
}

/// Two planes with their cached characteristic angles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanePair {
    pub p1: PlaneFrame,
    pub p2: PlaneFrame,
    pub alpha1: f64,
    pub alpha2: f64,
}

impl PlanePair {
    pub fn new(p1: PlaneFrame, p2: PlaneFrame) -> Self {
        let (alpha1, alpha2) = characteristic_angles(&p1, &p2);
        PlanePair { p1, p2, alpha1, alpha2 }
    }

    /// `e1∧e2` and `e3∧e4`.
    pub fn orthogonal() -> Self {
        Self::new(PlaneFrame::coordinate(0, 1), PlaneFrame::coordinate(2, 3))
    }

    /// `P¹ = e1∧e2`, `P² = (cos a1 e1 + sin a1 e3) ∧ (cos a2 e2 + sin a2 e4)`.
    pub fn with_angles(a1: f64, a2: f64) -> Result<Self> {
        if !(0.0..=FRAC_PI_2).contains(&a1) || !(0.0..=FRAC_PI_2).contains(&a2) {
            return Err(Error::InvalidInput(format!("angles ({a1}, {a2}) outside [0, π/2]")));
        }
        let x = [a1.cos(), 0.0, a1.sin(), 0.0];
        let y = [0.0, a2.cos(), 0.0, a2.sin()];
        Ok(Self::new(PlaneFrame::coordinate(0, 1), PlaneFrame::orthonormal(x, y)?))
    }

    pub fn is_orthogonal(&self) -> bool {
        let g = cross_gram(&self.p1, &self.p2);
        g.iter().flatten().all(|x| x.abs() <= ORTHOGONAL_TOL)
    }

    /// Bound on `|p¹ξ| + |p²ξ|`: 1 for orthogonal planes, else `1 + 2cos α₁`.
    pub fn projection_bound(&self) -> f64 {
        if self.is_orthogonal() {
            1.0
        } else {
            1.0 + 2.0 * self.alpha1.cos()
        }
    }

    pub fn projection_sum(&self, xi: &TwoVector) -> f64 {
        plane_projection_norm(&self.p1, xi) + plane_projection_norm(&self.p2, xi)
    }
}

/// `x∧y` with `x = cos α v1 + sin α u1`, `y = cos α v2 + sin α u2`, where
/// `v1, v2` is an orthonormal pair in `P¹` and `u1, u2` one in `P²`.
pub fn equality_family(pair: &PlanePair, alpha: f64, v1: Vec4, v2: Vec4, u1: Vec4, u2: Vec4) -> Result<TwoVector> {
    if !pair.is_orthogonal() {
        return Err(Error::Precondition("equality family needs orthogonal planes".into()));
    }
    PlaneFrame::orthonormal(v1, v2)?;
    PlaneFrame::orthonormal(u1, u2)?;
    if [v1, v2].iter().any(|v| pair.p1.distance(v) > 1e-9) || [u1, u2].iter().any(|u| pair.p2.distance(u) > 1e-9) {
        return Err(Error::Precondition("frame vectors do not lie in their planes".into()));
    }
    let (c, s) = (alpha.cos(), alpha.sin());
    let x = axpy(c, &v1, &scale4(s, &u1));
    let y = axpy(c, &v2, &scale4(s, &u2));
    Ok(wedge(&x, &y))
}

/// `count` seeded members of the equality family: random in-plane rotations
/// of each frame and a random mixing angle in `[0, π/2]`.
pub fn equality_samples(pair: &PlanePair, count: usize, seed: u64) -> Result<Vec<TwoVector>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rotate = |f: &PlaneFrame, t: f64| -> (Vec4, Vec4) {
        let [b1, b2] = f.basis();
        let (c, s) = (t.cos(), t.sin());
        (axpy(c, &b1, &scale4(s, &b2)), axpy(-s, &b1, &scale4(c, &b2)))
    };
    (0..count)
        .map(|_| {
            let (t1, t2, alpha): (f64, f64, f64) = (
                rng.random_range(0.0..std::f64::consts::TAU),
                rng.random_range(0.0..std::f64::consts::TAU),
                rng.random_range(0.0..=FRAC_PI_2),
            );
            let (v1, v2) = rotate(&pair.p1, t1);
            let (u1, u2) = rotate(&pair.p2, t2);
            equality_family(pair, alpha, v1, v2, u1, u2)
        })
        .collect()
}

/// Uniformly distributed unit simple 2-vector: orthonormalized Gaussian pair.
pub fn random_unit_simple<R: rand::Rng + ?Sized>(rng: &mut R) -> TwoVector {
    loop {
        let a: Vec4 = std::array::from_fn(|_| StandardNormal.sample(rng));
        let b: Vec4 = std::array::from_fn(|_| StandardNormal.sample(rng));
        if let Ok(frame) = PlaneFrame::from_spanning(a, b) {
            return frame.two_vector();
        }
    }
}

/// Samples drawn per deterministic stream.
const CHUNK: usize = 1 << 14;

/// Seeded generator for chunk `chunk` of a sampling run.
pub fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub samples: usize,
    pub injected: usize,
    pub seed: u64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub orthogonal: bool,
    pub max_sum: f64,
    pub bound: f64,
    /// `bound - max_sum`; nonnegative when no violation was observed.
    pub margin: f64,
}

pub fn verify_projection_bounds(pair: &PlanePair, samples: usize, seed: u64) -> Result<BoundReport> {
    verify_projection_bounds_with(pair, samples, seed, &[], Execution::default())
}

/// Maximum of `|p¹ξ| + |p²ξ|` over `samples` random unit simple 2-vectors
/// plus the `injected` ones. Streams are split into fixed chunks so the
/// result does not depend on the execution strategy.
pub fn verify_projection_bounds_with(
    pair: &PlanePair,
    samples: usize,
    seed: u64,
    injected: &[TwoVector],
    exec: Execution,
) -> Result<BoundReport> {
    if samples + injected.len() == 0 {
        return Err(Error::InvalidInput("at least one sample is required".into()));
    }
    let chunks = samples.div_ceil(CHUNK);
    let maxima = exec.map_range(chunks, |c| {
        let mut rng = chunk_rng(seed, c);
        let n = CHUNK.min(samples - c * CHUNK);
        (0..n)
            .map(|_| pair.projection_sum(&random_unit_simple(&mut rng)))
            .fold(f64::NEG_INFINITY, f64::max)
    });
    let max_sum = maxima
        .into_iter()
        .chain(injected.iter().map(|xi| pair.projection_sum(xi)))
        .fold(f64::NEG_INFINITY, f64::max);
    let bound = pair.projection_bound();
    Ok(BoundReport {
        samples,
        injected: injected.len(),
        seed,
        alpha1: pair.alpha1,
        alpha2: pair.alpha2,
        orthogonal: pair.is_orthogonal(),
        max_sum,
        bound,
        margin: bound - max_sum,
    })
}

pub type Triangle4 = [Vec4; 3];

/// Area and unit tangent 2-vector of a triangle in R⁴.
pub fn triangle_tangent(t: &Triangle4) -> Result<(TwoVector, f64)> {
    let a = axpy(-1.0, &t[0], &t[1]);
    let b = axpy(-1.0, &t[0], &t[2]);
    let xi = wedge(&a, &b);
    let n = xi.norm();
    let scale = norm4(&a).max(norm4(&b)).max(f64::MIN_POSITIVE);
    if n <= 1e-14 * scale * scale {
        return Err(Error::Degenerate("triangle has zero area".into()));
    }
    Ok((xi.scaled(1.0 / n), n / 2.0))
}

/// Area of the projection of a triangle onto a plane, from the projected
/// vertex coordinates.
pub fn projected_triangle_area(t: &Triangle4, plane: &PlaneFrame) -> f64 {
    let [a, b, c] = t.map(|p| plane.coords_of(&p));
    ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])).abs() / 2.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectedAreas {
    /// `Σ area(p¹T)`.
    pub p1_area: f64,
    /// `Σ area(p²T)`.
    pub p2_area: f64,
    /// `Σ area(T)`.
    pub area: f64,
    /// `max_T (|p¹ξ_T| + |p²ξ_T|)`.
    pub lambda: f64,
    /// `λ · Σ area(T)`.
    pub lambda_area: f64,
}

/// Per-triangle projected area sums (overlaps are not merged).
pub fn projected_area_sums(triangles: &[Triangle4], pair: &PlanePair) -> Result<ProjectedAreas> {
    let mut out = ProjectedAreas { p1_area: 0.0, p2_area: 0.0, area: 0.0, lambda: 0.0, lambda_area: 0.0 };
    for t in triangles {
        let (xi, area) = triangle_tangent(t)?;
        out.p1_area += projected_triangle_area(t, &pair.p1);
        out.p2_area += projected_triangle_area(t, &pair.p2);
        out.area += area;
        out.lambda = out.lambda.max(pair.projection_sum(&xi));
    }
    out.lambda_area = out.lambda * out.area;
    Ok(out)
}
