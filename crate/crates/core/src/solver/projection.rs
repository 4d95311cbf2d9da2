use serde::{Deserialize, Serialize};

use super::Certificate;
use crate::complex::FaceSet;
use crate::error::{Error, Result};
use crate::grassmann::{PlanePair, Triangle4, Vec4};

/// Projected triangles below this area are skipped.
const MIN_TRIANGLE_AREA: f64 = 1e-15;

/// A region of a plane, in the plane's frame coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum PlaneRegion {
    Rect { lo: [f64; 2], hi: [f64; 2] },
    Disk { center: [f64; 2], radius: f64 },
}

impl PlaneRegion {
    fn bounds(&self) -> ([f64; 2], [f64; 2]) {
        match self {
            PlaneRegion::Rect { lo, hi } => (*lo, *hi),
            PlaneRegion::Disk { center, radius } => {
                ([center[0] - radius, center[1] - radius], [center[0] + radius, center[1] + radius])
            }
        }
    }

    fn contains(&self, p: [f64; 2]) -> bool {
        match self {
            PlaneRegion::Rect { lo, hi } => (lo[0]..=hi[0]).contains(&p[0]) && (lo[1]..=hi[1]).contains(&p[1]),
            PlaneRegion::Disk { center, radius } => {
                (p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2) <= radius * radius
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            PlaneRegion::Rect { lo, hi } => lo[0] < hi[0] && lo[1] < hi[1],
            PlaneRegion::Disk { radius, .. } => *radius > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("empty plane region {self:?}")))
        }
    }
}

/// Two planes through `origin` and the region of each plane whose coverage
/// by the projected surface is measured.
#[derive(Clone, Debug)]
pub struct ProjectionSetup {
    pub pair: PlanePair,
    pub origin: Vec4,
    pub regions: [PlaneRegion; 2],
    /// Raster cells per side of each region's bounding box.
    pub raster: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionBound {
    pub lower_bound: f64,
    pub lambda: f64,
    /// Area of each region covered by the projection of the face set.
    pub covered: [f64; 2],
}

impl ProjectionBound {
    pub fn certificate(&self) -> Certificate {
        Certificate::Projection { lower_bound: self.lower_bound, lambda: self.lambda, covered: self.covered }
    }
}

/// Lower bound `(covered₁ + covered₂) / λ` on the area, hence on `J_h`, of
/// a 2-dimensional face set in R⁴, where `λ` is the projection-sum bound of
/// the plane pair. Coverage is measured on a raster: a cell counts when its
/// center lies in the region and in some projected triangle.
pub fn projection_lower_bound(set: &FaceSet<'_>, setup: &ProjectionSetup) -> Result<ProjectionBound> {
    let complex = set.complex();
    if complex.ambient_dim() != 4 || set.dim() != 2 {
        return Err(Error::Precondition(format!(
            "projection bound needs 2-faces in R^4, got {}-faces in R^{}",
            set.dim(),
            complex.ambient_dim()
        )));
    }
    if setup.raster == 0 {
        return Err(Error::InvalidInput("raster must be positive".into()));
    }
    for r in &setup.regions {
        r.validate()?;
    }

    let triangles: Vec<Triangle4> = set
        .iter()
        .map(|f| {
            complex.simplex(2, f).vertices().iter().map(|&v| {
                let p = complex.point(v);
                [0, 1, 2, 3].map(|i| p[i] - setup.origin[i])
            })
        })
        .map(|mut it| [it.next().unwrap(), it.next().unwrap(), it.next().unwrap()])
        .collect();

    let planes = [&setup.pair.p1, &setup.pair.p2];
    let mut covered = [0.0; 2];
    for (slot, (plane, region)) in covered.iter_mut().zip(planes.iter().zip(&setup.regions)) {
        let projected: Vec<[[f64; 2]; 3]> = triangles.iter().map(|t| t.map(|p| plane.coords_of(&p))).collect();
        *slot = raster_coverage(&projected, region, setup.raster);
    }
    let lambda = setup.pair.projection_bound();
    Ok(ProjectionBound { lower_bound: (covered[0] + covered[1]) / lambda, lambda, covered })
}

fn raster_coverage(triangles: &[[[f64; 2]; 3]], region: &PlaneRegion, n: usize) -> f64 {
    let (lo, hi) = region.bounds();
    let step = [(hi[0] - lo[0]) / n as f64, (hi[1] - lo[1]) / n as f64];
    let center = |i: usize, j: usize| [lo[0] + (i as f64 + 0.5) * step[0], lo[1] + (j as f64 + 0.5) * step[1]];
    let mut hit = vec![false; n * n];
    for t in triangles {
        let signed = (t[1][0] - t[0][0]) * (t[2][1] - t[0][1]) - (t[1][1] - t[0][1]) * (t[2][0] - t[0][0]);
        if signed.abs() / 2.0 < MIN_TRIANGLE_AREA {
            continue;
        }
        let tmin = [0, 1].map(|a| t.iter().map(|p| p[a]).fold(f64::INFINITY, f64::min));
        let tmax = [0, 1].map(|a| t.iter().map(|p| p[a]).fold(f64::NEG_INFINITY, f64::max));
        let index_range = |a: usize| {
            let first = ((tmin[a] - lo[a]) / step[a] - 0.5).ceil().max(0.0) as usize;
            let last = ((tmax[a] - lo[a]) / step[a] - 0.5).floor();
            if last < 0.0 {
                return first..first;
            }
            first..(last as usize + 1).min(n)
        };
        let (ri, rj) = (index_range(0), index_range(1));
        for j in rj {
            for i in ri.clone() {
                let cell = j * n + i;
                if !hit[cell] && in_triangle(center(i, j), t, signed) {
                    hit[cell] = true;
                }
            }
        }
    }
    let cell_area = step[0] * step[1];
    (0..n * n).filter(|&c| hit[c] && region.contains(center(c % n, c / n))).count() as f64 * cell_area
}

/// Closed containment test with a small relative slack for edges shared by
/// adjacent triangles.
fn in_triangle(p: [f64; 2], t: &[[f64; 2]; 3], signed: f64) -> bool {
    let slack = 1e-12 * signed.abs();
    (0..3).all(|k| {
        let (a, b) = (t[k], t[(k + 1) % 3]);
        let s = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
        s * signed.signum() >= -slack
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::build_grid_complex;

    fn plane_square(k: &crate::complex::Complex, fixed: [usize; 2], at: i64) -> Vec<usize> {
        (0..k.count(2))
            .filter(|&f| {
                k.simplex(2, f).vertices().iter().all(|&v| {
                    let p = k.lattice_point(v);
                    p[fixed[0]] == at && p[fixed[1]] == at
                })
            })
            .collect()
    }

    #[test]
    fn orthogonal_squares_attain_bound() {
        let k = build_grid_complex(4, &[2, 2, 2, 2], 0.5).unwrap();
        let mut faces = plane_square(&k, [2, 3], 1);
        faces.extend(plane_square(&k, [0, 1], 1));
        let set = FaceSet::new(&k, 2, faces).unwrap();
        let setup = ProjectionSetup {
            pair: PlanePair::orthogonal(),
            origin: [0.0; 4],
            regions: [
                PlaneRegion::Rect { lo: [0.0, 0.0], hi: [1.0, 1.0] },
                PlaneRegion::Rect { lo: [0.0, 0.0], hi: [1.0, 1.0] },
            ],
            raster: 64,
        };
        let b = projection_lower_bound(&set, &setup).unwrap();
        assert!((b.covered[0] - 1.0).abs() < 1e-12 && (b.covered[1] - 1.0).abs() < 1e-12);
        assert!((b.lower_bound - 2.0).abs() < 1e-12);
    }

    #[test]
    fn disk_and_partial_cover() {
        let k = build_grid_complex(4, &[2, 2, 2, 2], 1.0).unwrap();
        let set = FaceSet::new(&k, 2, plane_square(&k, [2, 3], 0)).unwrap();
        let setup = ProjectionSetup {
            pair: PlanePair::orthogonal(),
            origin: [0.0; 4],
            regions: [
                PlaneRegion::Disk { center: [1.0, 1.0], radius: 1.0 },
                PlaneRegion::Rect { lo: [0.0, 0.0], hi: [1.0, 1.0] },
            ],
            raster: 400,
        };
        let b = projection_lower_bound(&set, &setup).unwrap();
        assert!((b.covered[0] - std::f64::consts::PI).abs() < 0.02, "{}", b.covered[0]);
        assert_eq!(b.covered[1], 0.0);
    }

    #[test]
    fn wrong_dimension_is_rejected() {
        let k = build_grid_complex(3, &[1, 1, 1], 1.0).unwrap();
        let set = FaceSet::empty(&k, 2).unwrap();
        let setup = ProjectionSetup {
            pair: PlanePair::orthogonal(),
            origin: [0.0; 4],
            regions: [
                PlaneRegion::Rect { lo: [0.0, 0.0], hi: [1.0, 1.0] },
                PlaneRegion::Rect { lo: [0.0, 0.0], hi: [1.0, 1.0] },
            ],
            raster: 8,
        };
        assert!(matches!(projection_lower_bound(&set, &setup), Err(Error::Precondition(_))));
    }
}
