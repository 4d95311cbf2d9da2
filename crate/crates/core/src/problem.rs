//! Problem files: a TOML description of the grid box, weight, initial face
//! set, constraint cycles and optional modification region and projection
//! setup.
//!
//! ```toml
//! n = 2
//! d = 1
//! box = [2, 2]
//! scale = 1.5
//! seed = 7
//!
//! [initial]
//! generator = "separating-row"
//!
//! [[constraint]]
//! kind = "point-pair"
//! p = [1, 0]
//! q = [1, 2]
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::complement::{ConstraintCycle, Region};
use crate::complex::{build_grid_complex, Complex, FaceSet};
use crate::error::{Error, Result};
use crate::grassmann::PlanePair;
use crate::solver::{PlaneRegion, ProjectionSetup, WeightField};

pub const GENERATORS: [&str; 4] = ["all", "separating-row", "straight-path", "two-planes-orthogonal"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    /// Ambient dimension.
    pub n: usize,
    /// Dimension of the face sets.
    pub d: usize,
    /// Cells per axis.
    #[serde(rename = "box")]
    pub cells: Vec<usize>,
    #[serde(default = "default_scale")]
    pub scale: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_budget")]
    pub budget: usize,
    /// Relative gap below which a lower bound certifies the objective.
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Raster cells per side for projection areas.
    #[serde(default = "default_raster")]
    pub raster: usize,
    #[serde(default = "default_weight")]
    pub weight: WeightField,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<FaceSource>,
    /// Candidate faces for the solvers; all d-faces when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pool: Option<FaceSource>,
    /// Face set compared against `initial` by `check` inside `region`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub competitor: Option<FaceSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<Region>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projection: Option<ProjectionSpec>,
    #[serde(default, rename = "constraint", skip_serializing_if = "Vec::is_empty")]
    pub constraints: Vec<ConstraintCycle>,
}

/// A face set given either by a named generator or by explicit faces, each
/// face a list of lattice points.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaceSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    /// Free axis of `straight-path`, normal axis of `separating-row`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<usize>,
    /// Lattice point the generated flat passes through; the box center by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub through: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub faces: Option<Vec<Vec<Vec<i64>>>>,
}

/// Plane pair and measured regions for the projection lower bound. Planes
/// pass through `origin`; without `angles` they are the coordinate planes
/// `x1x2` and `x3x4`, otherwise the pair at the given characteristic angles.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectionSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angles: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<[f64; 4]>,
    /// One region per plane; defaults to the projected box for coordinate planes.
    #[serde(default, rename = "region", skip_serializing_if = "Vec::is_empty")]
    pub regions: Vec<PlaneRegion>,
}

fn default_scale() -> f64 {
    1.0
}
fn default_budget() -> usize {
    10_000
}
fn default_tol() -> f64 {
    1e-9
}
fn default_raster() -> usize {
    1024
}
fn default_weight() -> WeightField {
    WeightField::Constant { value: 1.0 }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProblemError {
    Syntax { line: usize, column: usize, message: String },
    Invalid(Vec<String>),
}

impl fmt::Display for ProblemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemError::Syntax { line, column, message } => {
                write!(f, "syntax error at line {line}, column {column}: {message}")
            }
            ProblemError::Invalid(list) => {
                write!(f, "invalid problem ({} violation{}):", list.len(), if list.len() == 1 { "" } else { "s" })?;
                for v in list {
                    write!(f, "\n  - {v}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for ProblemError {}

/// Parses and validates a problem file, reporting every semantic violation.
pub fn parse_problem(text: &str) -> std::result::Result<ProblemSpec, ProblemError> {
    let spec: ProblemSpec = toml::from_str(text).map_err(|e| {
        let (line, column) = match e.span() {
            Some(span) => line_column(text, span.start),
            None => (1, 1),
        };
        ProblemError::Syntax { line, column, message: e.message().trim().to_string() }
    })?;
    let violations = spec.violations();
    if violations.is_empty() {
        Ok(spec)
    } else {
        Err(ProblemError::Invalid(violations))
    }
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

impl ProblemSpec {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("problem specs serialize")
    }

    /// All semantic violations, in a fixed order.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.n == 0 || self.n > 4 {
            out.push(format!("ambient dimension n = {} must be between 1 and 4", self.n));
        }
        if self.d == 0 || self.d >= self.n {
            out.push(format!(
                "cell dimension must be below ambient and positive (d = {}, n = {})",
                self.d, self.n
            ));
        }
        if self.cells.len() != self.n {
            out.push(format!("box has {} axes, expected n = {}", self.cells.len(), self.n));
        }
        if self.cells.contains(&0) {
            out.push("box axes need at least one cell".into());
        }
        if !(self.scale.is_finite() && self.scale > 0.0) {
            out.push(format!("scale {} must be positive", self.scale));
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            out.push(format!("tolerance {} must be nonnegative", self.tol));
        }
        if self.raster == 0 {
            out.push("raster must be positive".into());
        }
        if i64::try_from(self.seed).is_err() {
            out.push(format!("seed {} exceeds the signed 64-bit range", self.seed));
        }
        match &self.weight {
            WeightField::Constant { value } => {
                if !(*value >= 1.0 && value.is_finite()) {
                    out.push(format!("weight {value} violates the bound 1 <= h <= M"));
                }
            }
            WeightField::PerFace { values, max } => {
                if !(*max >= 1.0 && max.is_finite()) {
                    out.push(format!("weight bound M = {max} violates 1 <= M"));
                }
                for (i, v) in values.iter().enumerate() {
                    if !(*v >= 1.0 && v <= max) {
                        out.push(format!("weight {v} at face {i} violates the bound 1 <= h <= M = {max}"));
                    }
                }
            }
        }
        for (j, c) in self.constraints.iter().enumerate() {
            if self.n > self.d && c.degree() != self.n - self.d - 1 {
                out.push(format!(
                    "constraint {j} ({}) has degree {}, expected n - d - 1 = {}",
                    c.kind_name(),
                    c.degree(),
                    self.n - self.d - 1
                ));
            }
        }
        if let Some(p) = &self.projection {
            if self.n != 4 || self.d != 2 {
                out.push("projection bound needs n = 4 and d = 2".into());
            }
            if p.angles.is_some() && p.regions.is_empty() {
                out.push("projection with angles needs two explicit regions".into());
            }
            if !p.regions.is_empty() && p.regions.len() != 2 {
                out.push(format!("projection needs 2 regions, got {}", p.regions.len()));
            }
        }
        if !out.is_empty() {
            return out;
        }

        // The remaining checks need the complex.
        let complex = match self.build_complex() {
            Ok(k) => k,
            Err(e) => {
                out.push(e.to_string());
                return out;
            }
        };
        if let WeightField::PerFace { values, .. } = &self.weight {
            if values.len() != complex.count(self.d) {
                out.push(format!("{} weights given for {} faces", values.len(), complex.count(self.d)));
            }
        }
        for (j, c) in self.constraints.iter().enumerate() {
            if let Err(e) = c.ambient_chain(&complex) {
                out.push(format!("constraint {j}: {e}"));
            }
        }
        for (name, src) in [("initial", &self.initial), ("pool", &self.pool), ("competitor", &self.competitor)] {
            if let Some(src) = src {
                if let Err(e) = self.resolve(&complex, src) {
                    out.push(format!("{name}: {e}"));
                }
            }
        }
        if let Some(r) = &self.region {
            if let Err(e) = Region::new(r.lo.clone(), r.hi.clone()) {
                out.push(e.to_string());
            } else if r.lo.len() != self.n {
                out.push(format!("region has {} axes, expected {}", r.lo.len(), self.n));
            }
        }
        if self.competitor.is_some() && (self.region.is_none() || self.initial.is_none()) {
            out.push("competitor needs both initial and region".into());
        }
        if let Some(Err(e)) = self.projection_setup() {
            out.push(e.to_string());
        }
        out
    }

    pub fn build_complex(&self) -> Result<Complex> {
        build_grid_complex(self.n, &self.cells, self.scale)
    }

    fn center(&self) -> Vec<i64> {
        self.cells.iter().map(|&c| (c / 2) as i64).collect()
    }

    /// Expands a face source to a face set of dimension `d`.
    pub fn resolve<'a>(&self, complex: &'a Complex, src: &FaceSource) -> Result<FaceSet<'a>> {
        match (&src.generator, &src.faces) {
            (Some(_), Some(_)) => Err(Error::InvalidInput("give either a generator or faces, not both".into())),
            (None, None) => Err(Error::InvalidInput("face source needs a generator or faces".into())),
            (None, Some(faces)) => {
                let mut idx = Vec::with_capacity(faces.len());
                for f in faces {
                    if f.len() != self.d + 1 {
                        return Err(Error::InvalidInput(format!("face {f:?} does not have {} vertices", self.d + 1)));
                    }
                    let verts = f
                        .iter()
                        .map(|p| {
                            complex
                                .vertex_at(p)
                                .ok_or_else(|| Error::InvalidInput(format!("point {p:?} lies outside the box")))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    let (i, _) = complex
                        .find(&verts)
                        .ok_or_else(|| Error::InvalidInput(format!("{f:?} is not a face of the grid complex")))?;
                    idx.push(i);
                }
                FaceSet::new(complex, self.d, idx)
            }
            (Some(name), None) => self.generate(complex, name, src.axis, src.through.as_deref()),
        }
    }

    fn generate<'a>(
        &self,
        complex: &'a Complex,
        name: &str,
        axis: Option<usize>,
        through: Option<&[i64]>,
    ) -> Result<FaceSet<'a>> {
        let (n, d) = (self.n, self.d);
        let point = match through {
            Some(p) if p.len() != n => {
                return Err(Error::InvalidInput(format!("through point {p:?} needs {n} coordinates")))
            }
            Some(p) if p.iter().zip(&self.cells).any(|(&x, &c)| x < 0 || x > c as i64) => {
                return Err(Error::InvalidInput(format!("through point {p:?} lies outside the box")))
            }
            Some(p) => p.to_vec(),
            None => self.center(),
        };
        if let Some(a) = axis {
            if a >= n {
                return Err(Error::InvalidInput(format!("axis {a} out of range for n = {n}")));
            }
        }
        let flats: Vec<Vec<usize>> = match name {
            "all" => vec![vec![]],
            "separating-row" => {
                if d + 1 != n {
                    return Err(Error::InvalidInput("separating-row needs d = n - 1".into()));
                }
                vec![vec![axis.unwrap_or(n - 1)]]
            }
            "straight-path" => {
                if d != 1 {
                    return Err(Error::InvalidInput("straight-path needs d = 1".into()));
                }
                let free = axis.unwrap_or(0);
                vec![(0..n).filter(|&a| a != free).collect()]
            }
            "two-planes-orthogonal" => {
                if n != 4 || d != 2 {
                    return Err(Error::InvalidInput("two-planes-orthogonal needs n = 4 and d = 2".into()));
                }
                vec![vec![2, 3], vec![0, 1]]
            }
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown generator \"{other}\" (known: {})",
                    GENERATORS.join(", ")
                )))
            }
        };
        let faces = (0..complex.count(d)).filter(|&f| {
            flats.iter().any(|fixed| {
                complex
                    .simplex(d, f)
                    .vertices()
                    .iter()
                    .all(|&v| {
                        let p = complex.lattice_point(v);
                        fixed.iter().all(|&a| p[a] == point[a])
                    })
            })
        });
        FaceSet::new(complex, d, faces)
    }

    pub fn initial_set<'a>(&self, complex: &'a Complex) -> Result<Option<FaceSet<'a>>> {
        self.initial.as_ref().map(|s| self.resolve(complex, s)).transpose()
    }

    pub fn pool_set<'a>(&self, complex: &'a Complex) -> Result<FaceSet<'a>> {
        match &self.pool {
            Some(s) => self.resolve(complex, s),
            None => FaceSet::all(complex, self.d),
        }
    }

    pub fn competitor_set<'a>(&self, complex: &'a Complex) -> Result<Option<FaceSet<'a>>> {
        self.competitor.as_ref().map(|s| self.resolve(complex, s)).transpose()
    }

    /// The projection setup, if the problem has one.
    pub fn projection_setup(&self) -> Option<Result<ProjectionSetup>> {
        let spec = self.projection.as_ref()?;
        Some(self.build_projection(spec))
    }

    fn build_projection(&self, spec: &ProjectionSpec) -> Result<ProjectionSetup> {
        let pair = match spec.angles {
            None => PlanePair::orthogonal(),
            Some([a1, a2]) => PlanePair::with_angles(a1, a2)?,
        };
        let origin = spec.origin.unwrap_or([0.0; 4]);
        let regions = if spec.regions.is_empty() {
            if self.cells.len() != 4 {
                return Err(Error::InvalidInput("projection needs a 4-axis box".into()));
            }
            let side = |a: usize| self.cells[a] as f64 * self.scale;
            let rect = |a: usize, b: usize| PlaneRegion::Rect {
                lo: [-origin[a], -origin[b]],
                hi: [side(a) - origin[a], side(b) - origin[b]],
            };
            [rect(0, 1), rect(2, 3)]
        } else {
            match <[PlaneRegion; 2]>::try_from(spec.regions.clone()) {
                Ok(r) => r,
                Err(_) => return Err(Error::InvalidInput("projection needs exactly 2 regions".into())),
            }
        };
        Ok(ProjectionSetup { pair, origin, regions, raster: self.raster })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SEPARATION: &str = r#"
n = 2
d = 1
box = [2, 2]
scale = 1.5

[initial]
generator = "separating-row"

[[constraint]]
kind = "point-pair"
p = [1, 0]
q = [1, 2]
"#;

    #[test]
    fn minimal_separation_problem() {
        let spec = parse_problem(SEPARATION).unwrap();
        assert_eq!((spec.n, spec.d), (2, 1));
        assert_eq!(spec.constraints.len(), 1);
        let k = spec.build_complex().unwrap();
        let init = spec.initial_set(&k).unwrap().unwrap();
        assert_eq!(init.len(), 2);
        assert_eq!(parse_problem(&spec.to_toml()).unwrap(), spec);
    }

    #[test]
    fn collects_all_violations() {
        let text = "n = 2\nd = 2\nbox = [2, 2]\n[weight]\nkind = \"constant\"\nvalue = 0.5\n";
        let ProblemError::Invalid(list) = parse_problem(text).unwrap_err() else { panic!() };
        assert_eq!(list.len(), 2, "{list:?}");
        assert!(list[0].contains("cell dimension must be below ambient"));
        assert!(list[1].contains("1 <= h <= M"));
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse_problem("n = 2\nd = = 1\n").unwrap_err();
        let ProblemError::Syntax { line, .. } = err else { panic!("{err:?}") };
        assert_eq!(line, 2);
    }

    #[test]
    fn generators_expand() {
        let text = "n = 4\nd = 2\nbox = [2, 2, 2, 2]\n[initial]\ngenerator = \"two-planes-orthogonal\"\n";
        let spec = parse_problem(text).unwrap();
        let k = spec.build_complex().unwrap();
        // each 2x2 square holds 8 triangles
        assert_eq!(spec.initial_set(&k).unwrap().unwrap().len(), 16);

        let text = "n = 2\nd = 1\nbox = [3, 2]\n[initial]\ngenerator = \"straight-path\"\nthrough = [0, 1]\n";
        let spec = parse_problem(text).unwrap();
        let k = spec.build_complex().unwrap();
        assert_eq!(spec.initial_set(&k).unwrap().unwrap().len(), 3);

        let bad = "n = 2\nd = 1\nbox = [3, 2]\n[initial]\ngenerator = \"spiral\"\n";
        let ProblemError::Invalid(list) = parse_problem(bad).unwrap_err() else { panic!() };
        assert!(list[0].contains("unknown generator"));
    }

    #[test]
    fn explicit_faces_and_bad_constraints() {
        let text = r#"
n = 2
d = 1
box = [2, 2]
[initial]
faces = [[[0, 1], [1, 1]], [[1, 1], [2, 1]]]
[[constraint]]
kind = "point-pair"
p = [1, 0]
q = [1, 5]
[[constraint]]
kind = "loop"
points = [[0, 0], [1, 0], [1, 1]]
"#;
        let ProblemError::Invalid(list) = parse_problem(text).unwrap_err() else { panic!() };
        assert_eq!(list.len(), 1, "{list:?}");
        assert!(list[0].contains("degree 1"));
    }
}
