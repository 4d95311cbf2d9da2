//! Minimization of the weighted area `J_h(F) = Σ h(face) · vol(face)` over
//! face sets satisfying the spanning constraints.

mod exhaustive;
mod local;
mod projection;

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::complement::ConstraintCycle;
use crate::complex::{Complex, FaceSet};
use crate::error::{Error, Result};

pub use exhaustive::{minimize_exhaustive, minimize_exhaustive_with, EXHAUSTIVE_CAP};
pub use local::{minimize_local, minimize_local_with, LocalOptions, Move};
pub use projection::{projection_lower_bound, PlaneRegion, ProjectionBound, ProjectionSetup};

/// Relative tolerance for comparing objective values.
pub const OBJECTIVE_TOL: f64 = 1e-9;

/// Weight `h` with `1 ≤ h ≤ M`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WeightField {
    Constant { value: f64 },
    /// One sample per d-face (taken at its barycenter), indexed by face.
    PerFace { values: Vec<f64>, max: f64 },
}

impl WeightField {
    pub fn constant(value: f64) -> Result<Self> {
        if !(value.is_finite() && value >= 1.0) {
            return Err(Error::InvalidInput(format!("weight {value} violates 1 <= h <= M")));
        }
        Ok(WeightField::Constant { value })
    }

    pub fn per_face(values: Vec<f64>, max: f64) -> Result<Self> {
        if !(max.is_finite() && max >= 1.0) {
            return Err(Error::InvalidInput(format!("weight bound M = {max} must be at least 1")));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(**v >= 1.0 && **v <= max)) {
            return Err(Error::InvalidInput(format!("weight {v} at face {i} violates 1 <= h <= {max}")));
        }
        Ok(WeightField::PerFace { values, max })
    }

    pub fn value(&self, face: usize) -> f64 {
        match self {
            WeightField::Constant { value } => *value,
            WeightField::PerFace { values, .. } => values[face],
        }
    }

    pub fn max(&self) -> f64 {
        match self {
            WeightField::Constant { value } => *value,
            WeightField::PerFace { max, .. } => *max,
        }
    }

    fn check_len(&self, complex: &Complex, dim: usize) -> Result<()> {
        match self {
            WeightField::PerFace { values, .. } if values.len() != complex.count(dim) => Err(Error::InvalidInput(
                format!("{} weights for {} faces", values.len(), complex.count(dim)),
            )),
            _ => Ok(()),
        }
    }
}

/// Weighted d-volume of a single face.
pub fn face_cost(complex: &Complex, dim: usize, face: usize, h: &WeightField) -> f64 {
    h.value(face) * complex.volume(dim, face)
}

/// `J_h(F)`: sum over faces, in index order, of weight times d-volume.
pub fn measure_jh(set: &FaceSet<'_>, h: &WeightField) -> f64 {
    set.iter().map(|f| face_cost(set.complex(), set.dim(), f, h)).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum Certificate {
    /// Global optimum over the candidate pool by exhaustive search.
    Exhaustive { lower_bound: f64 },
    /// Projection-area lower bound.
    Projection { lower_bound: f64, lambda: f64, covered: [f64; 2] },
    None,
}

impl Certificate {
    pub fn lower_bound(&self) -> f64 {
        match self {
            Certificate::Exhaustive { lower_bound } | Certificate::Projection { lower_bound, .. } => *lower_bound,
            Certificate::None => 0.0,
        }
    }

    pub fn method(&self) -> &'static str {
        match self {
            Certificate::Exhaustive { .. } => "exhaustive",
            Certificate::Projection { .. } => "projection",
            Certificate::None => "none",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveResult<'a> {
    pub best: FaceSet<'a>,
    pub objective: f64,
    pub certificate: Certificate,
    /// Number of spanning checks performed.
    pub evaluations: usize,
    pub accepted_moves: usize,
    /// Accepted states `(objective, faces)` in order, starting from the initial one.
    pub history: Vec<(f64, Vec<usize>)>,
    pub seed: Option<u64>,
}

/// Orders `(objective, faces)` candidates: smaller objective, then the
/// lexicographically smaller face-index list.
pub(crate) fn compare_candidates(a: (f64, &[usize]), b: (f64, &[usize])) -> Ordering {
    let tol = OBJECTIVE_TOL * a.0.abs().max(b.0.abs()).max(1.0);
    if a.0 < b.0 - tol {
        Ordering::Less
    } else if a.0 > b.0 + tol {
        Ordering::Greater
    } else {
        a.1.cmp(b.1)
    }
}

/// Faces whose closure meets the support of some constraint; a set holding
/// any of them fails that constraint by contact.
pub(crate) fn contact_faces(complex: &Complex, dim: usize, constraints: &[ConstraintCycle]) -> Result<BTreeSet<usize>> {
    let mut support: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); complex.top_dim() + 1];
    for c in constraints {
        let chain = c.ambient_chain(complex)?;
        for i in chain.support() {
            for f in complex.simplex(chain.dim(), i).all_faces() {
                support[f.dim()].insert(complex.index_of(&f).expect("closed complex"));
            }
        }
    }
    Ok((0..complex.count(dim))
        .filter(|&face| {
            complex
                .simplex(dim, face)
                .all_faces()
                .iter()
                .any(|g| support[g.dim()].contains(&complex.index_of(g).expect("closed complex")))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::build_grid_complex;

    #[test]
    fn measure_examples() {
        let k = build_grid_complex(2, &[1, 1], 1.0).unwrap();
        let one = WeightField::constant(1.0).unwrap();
        let two = WeightField::constant(2.0).unwrap();
        // one unit square = two triangles of area 1/2
        let both = FaceSet::new(&k, 1, []).unwrap();
        assert_eq!(measure_jh(&both, &one), 0.0);
        let k3 = build_grid_complex(3, &[1, 1, 1], 1.0).unwrap();
        let bottom: Vec<usize> = (0..k3.count(2))
            .filter(|&f| k3.simplex(2, f).vertices().iter().all(|&v| k3.lattice_point(v)[2] == 0))
            .collect();
        let sq = FaceSet::new(&k3, 2, bottom).unwrap();
        assert!((measure_jh(&sq, &one) - 1.0).abs() < 1e-12);
        assert!((measure_jh(&sq, &two) - 2.0 * measure_jh(&sq, &one)).abs() < 1e-12);
        let single = FaceSet::new(&k3, 2, [sq.iter().next().unwrap()]).unwrap();
        assert!((measure_jh(&single, &one) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn weight_bounds() {
        assert!(WeightField::constant(0.5).is_err());
        assert!(WeightField::per_face(vec![1.0, 3.0], 2.0).is_err());
        assert!(WeightField::per_face(vec![1.0, 2.0], 2.0).is_ok());
    }

    #[test]
    fn candidate_order() {
        assert_eq!(compare_candidates((1.0, &[3]), (2.0, &[1])), Ordering::Less);
        assert_eq!(compare_candidates((1.0, &[1, 4]), (1.0 + 1e-12, &[2])), Ordering::Less);
    }
}
