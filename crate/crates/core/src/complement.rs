//! Homotopy models of the complement of a face set and the homological
//! spanning / competitor conditions evaluated on them.
//!
//! The complement of `|F|` inside the box is modelled by the full subcomplex
//! of the barycentric subdivision of `K` on the barycenters of simplices not
//! lying in the closure of `F`. A constraint sphere is represented by a cycle
//! of `K` (two points, a closed edge loop, or a general cycle), pushed into
//! the subdivision by the subdivision chain map.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Deref;

use num_bigint::BigInt;
use num_rational::Rational64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::complex::{boundary, Chain, Complex, FaceSet, Simplex};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::homology::{homology_group, is_null_homologous};

/// A cycle of the ambient grid complex standing in for a constraint sphere.
/// Vertices are given as integer lattice points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ConstraintCycle {
    /// `[q] - [p]`: a 0-sphere.
    PointPair { p: Vec<i64>, q: Vec<i64> },
    /// Closed polygon; consecutive points (and last to first) must span edges.
    Loop { points: Vec<Vec<i64>> },
    /// Integer combination of oriented simplices, each given by its vertices.
    Cycle { degree: usize, terms: Vec<CycleTerm> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleTerm {
    pub coef: i64,
    pub simplex: Vec<Vec<i64>>,
}

impl ConstraintCycle {
    pub fn degree(&self) -> usize {
        match self {
            ConstraintCycle::PointPair { .. } => 0,
            ConstraintCycle::Loop { .. } => 1,
            ConstraintCycle::Cycle { degree, .. } => *degree,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ConstraintCycle::PointPair { .. } => "point-pair",
            ConstraintCycle::Loop { .. } => "loop",
            ConstraintCycle::Cycle { .. } => "cycle",
        }
    }

    /// The constraint as a cycle of the ambient complex.
    pub fn ambient_chain(&self, complex: &Complex) -> Result<Chain> {
        let vertex = |p: &[i64]| {
            complex.vertex_at(p).ok_or_else(|| {
                Error::Realization(format!("point {p:?} leaves the box"))
            })
        };
        let chain = match self {
            ConstraintCycle::PointPair { p, q } => {
                let (p, q) = (vertex(p)?, vertex(q)?);
                if p == q {
                    return Err(Error::Realization("point pair with equal points".into()));
                }
                Chain::from_terms(0, [(q, 1), (p, -1)])
            }
            ConstraintCycle::Loop { points } => {
                if points.len() < 2 {
                    return Err(Error::Realization("a loop needs at least two points".into()));
                }
                let ids = points.iter().map(|p| vertex(p)).collect::<Result<Vec<_>>>()?;
                let mut chain = Chain::zero(1);
                for (i, &a) in ids.iter().enumerate() {
                    let b = ids[(i + 1) % ids.len()];
                    let (e, sign) = complex.find(&[a, b]).ok_or_else(|| {
                        Error::Realization(format!(
                            "{:?} -> {:?} is not an edge of the complex",
                            points[i],
                            points[(i + 1) % ids.len()]
                        ))
                    })?;
                    chain.add_term(e, BigInt::from(sign));
                }
                chain
            }
            ConstraintCycle::Cycle { degree, terms } => {
                let mut chain = Chain::zero(*degree);
                for t in terms {
                    if t.simplex.len() != degree + 1 {
                        return Err(Error::Realization(format!(
                            "cycle term has {} vertices, expected {}",
                            t.simplex.len(),
                            degree + 1
                        )));
                    }
                    let ids = t.simplex.iter().map(|p| vertex(p)).collect::<Result<Vec<_>>>()?;
                    let (s, sign) = complex.find(&ids).ok_or_else(|| {
                        Error::Realization(format!("{:?} is not a simplex of the complex", t.simplex))
                    })?;
                    chain.add_term(s, BigInt::from(t.coef * sign as i64));
                }
                if !boundary(complex, &chain)?.is_zero() {
                    return Err(Error::Realization("general constraint is not a cycle".into()));
                }
                chain
            }
        };
        Ok(chain)
    }
}

/// The full subcomplex of the barycentric subdivision on simplices of `K`
/// disjoint from `|F|`, together with the barycenter map.
pub struct ComplementModel<'a> {
    ambient: &'a Complex,
    blocked: Vec<Vec<bool>>,
    vertex_of: Vec<Vec<Option<usize>>>,
    complex: Complex,
}

impl Deref for ComplementModel<'_> {
    type Target = Complex;
    fn deref(&self) -> &Complex {
        &self.complex
    }
}

impl<'a> ComplementModel<'a> {
    pub fn complex(&self) -> &Complex {
        &self.complex
    }

    pub fn ambient(&self) -> &'a Complex {
        self.ambient
    }

    /// `true` when ambient simplex `i` of dimension `k` lies in `|F|`.
    pub fn is_blocked(&self, k: usize, i: usize) -> bool {
        self.blocked[k][i]
    }

    /// Model vertex at the barycenter of an ambient simplex, if it survives.
    pub fn barycenter_vertex(&self, k: usize, i: usize) -> Option<usize> {
        self.vertex_of[k][i]
    }

    /// Pushes an ambient chain into the model with the subdivision chain map
    /// `sd(σ) = σ̂ * sd(∂σ)`. Fails if the support meets `|F|`.
    pub fn subdivide(&self, chain: &Chain) -> Result<Chain> {
        let k = chain.dim();
        let mut out = Chain::zero(k);
        for (i, coef) in chain.terms() {
            for (ids, sign) in self.subdivided_simplex(k, i)? {
                let (s, perm) = Simplex::oriented(ids)?;
                let idx = self.complex.index_of(&s).ok_or_else(|| {
                    Error::Realization("subdivided simplex missing from the model".into())
                })?;
                let c = if sign * perm as i64 > 0 { coef.clone() } else { -coef };
                out.add_term(idx, c);
            }
        }
        Ok(out)
    }

    fn subdivided_simplex(&self, k: usize, i: usize) -> Result<Vec<(Vec<usize>, i64)>> {
        let apex = self.vertex_of[k][i].ok_or_else(|| {
            Error::Realization(format!("support meets the face set ({k}-simplex {i})"))
        })?;
        if k == 0 {
            return Ok(vec![(vec![apex], 1)]);
        }
        let mut out = Vec::new();
        for (fsign, f) in self.ambient.face_indices(k, i) {
            for (mut ids, s) in self.subdivided_simplex(k - 1, f)? {
                ids.insert(0, apex);
                out.push((ids, s * fsign as i64));
            }
        }
        Ok(out)
    }
}

/// Full complement model.
pub fn complement_subcomplex<'a>(complex: &'a Complex, set: &FaceSet<'_>) -> ComplementModel<'a> {
    complement_skeleton(complex, set, complex.top_dim())
}

/// Complement model truncated to simplices of dimension at most `max_dim`;
/// enough to compute homology below `max_dim`.
pub fn complement_skeleton<'a>(
    complex: &'a Complex,
    set: &FaceSet<'_>,
    max_dim: usize,
) -> ComplementModel<'a> {
    let top = complex.top_dim();
    let mut blocked: Vec<Vec<bool>> = (0..=top).map(|k| vec![false; complex.count(k)]).collect();
    for (k, faces) in set.closure().into_iter().enumerate() {
        for i in faces {
            blocked[k][i] = true;
        }
    }

    let mut vertex_of: Vec<Vec<Option<usize>>> = (0..=top).map(|k| vec![None; complex.count(k)]).collect();
    let mut owners: Vec<(usize, usize)> = Vec::new();
    let mut coords: Vec<Vec<Rational64>> = Vec::new();
    for k in 0..=top {
        for i in 0..complex.count(k) {
            if !blocked[k][i] {
                vertex_of[k][i] = Some(owners.len());
                owners.push((k, i));
                coords.push(complex.barycenter(complex.simplex(k, i)));
            }
        }
    }

    // Codimension-one cofaces among surviving simplices.
    let mut cofaces: Vec<Vec<Vec<usize>>> = (0..=top).map(|k| vec![Vec::new(); complex.count(k)]).collect();
    for k in 1..=top {
        for j in 0..complex.count(k) {
            if blocked[k][j] {
                continue;
            }
            for (_, f) in complex.face_indices(k, j) {
                cofaces[k - 1][f].push(j);
            }
        }
    }
    // Proper supersets of each surviving simplex, as model vertex ids.
    let supersets: Vec<Vec<usize>> = owners
        .iter()
        .map(|&(k, i)| {
            let mut out = Vec::new();
            let mut layer: BTreeSet<usize> = [i].into_iter().collect();
            for dim in k..top {
                let next: BTreeSet<usize> =
                    layer.iter().flat_map(|&s| cofaces[dim][s].iter().copied()).collect();
                out.extend(next.iter().map(|&j| vertex_of[dim + 1][j].expect("surviving coface")));
                layer = next;
            }
            out
        })
        .collect();

    let max_dim = max_dim.min(top);
    let mut tables: Vec<Vec<Simplex>> = vec![Vec::new(); max_dim + 1];
    let mut stack: Vec<usize> = Vec::with_capacity(max_dim + 1);
    for v in 0..owners.len() {
        stack.push(v);
        extend_flags(&supersets, &mut stack, &mut tables, max_dim);
        stack.pop();
    }

    let model = Complex::from_closed(coords, complex.scale(), tables);
    ComplementModel { ambient: complex, blocked, vertex_of, complex: model }
}

fn extend_flags(
    supersets: &[Vec<usize>],
    stack: &mut Vec<usize>,
    tables: &mut [Vec<Simplex>],
    max_dim: usize,
) {
    tables[stack.len() - 1].push(Simplex::from_sorted_unchecked(stack.clone()));
    if stack.len() > max_dim {
        return;
    }
    let last = *stack.last().unwrap();
    for &next in &supersets[last] {
        stack.push(next);
        extend_flags(supersets, stack, tables, max_dim);
        stack.pop();
    }
}

/// A constraint cycle realized in a complement model.
#[derive(Clone, Debug, PartialEq)]
pub struct RealizedConstraint {
    pub chain: Chain,
    /// The cycle cancelled to zero (for example a loop that doubles back).
    pub degenerate: bool,
}

pub fn realize_constraint(spec: &ConstraintCycle, model: &ComplementModel<'_>) -> Result<RealizedConstraint> {
    let ambient = spec.ambient_chain(model.ambient())?;
    let chain = model.subdivide(&ambient)?;
    Ok(RealizedConstraint { degenerate: chain.is_zero(), chain })
}

/// Outcome of one spanning constraint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpanningVerdict {
    /// The cycle is nonzero in the homology of the complement.
    Pass,
    /// The cycle bounds in the complement.
    Killed,
    /// The cycle's support meets the face set.
    Contact,
}

impl SpanningVerdict {
    pub fn passed(self) -> bool {
        self == SpanningVerdict::Pass
    }
}

/// `true` if the support of `chain` (with all faces) meets the closure of `set`.
fn touches(complex: &Complex, chain: &Chain, blocked: &[BTreeSet<usize>]) -> bool {
    let k = chain.dim();
    chain.support().any(|i| {
        complex.simplex(k, i).all_faces().iter().any(|f| {
            let d = f.dim();
            d < blocked.len() && blocked[d].contains(&complex.index_of(f).expect("closed complex"))
        })
    })
}

/// Evaluates every constraint against the complement of `set`.
pub fn spanning_check(
    complex: &Complex,
    set: &FaceSet<'_>,
    constraints: &[ConstraintCycle],
) -> Result<Vec<SpanningVerdict>> {
    spanning_check_with(complex, set, constraints, Execution::default())
}

pub fn spanning_check_with(
    complex: &Complex,
    set: &FaceSet<'_>,
    constraints: &[ConstraintCycle],
    exec: Execution,
) -> Result<Vec<SpanningVerdict>> {
    Ok(spanning_report(complex, set, constraints, exec, false)?
        .into_iter()
        .map(|r| r.verdict)
        .collect())
}

/// Verdict plus the rank of the complement homology in the constraint's degree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub verdict: SpanningVerdict,
    pub degree: usize,
    pub homology_rank: Option<usize>,
}

pub fn spanning_report(
    complex: &Complex,
    set: &FaceSet<'_>,
    constraints: &[ConstraintCycle],
    exec: Execution,
    with_ranks: bool,
) -> Result<Vec<ConstraintReport>> {
    if !std::ptr::eq(complex, set.complex()) {
        return Err(Error::MismatchedComplex);
    }
    let chains = constraints
        .iter()
        .map(|c| c.ambient_chain(complex))
        .collect::<Result<Vec<_>>>()?;
    let blocked = set.closure();
    let contact: Vec<bool> = chains.iter().map(|c| touches(complex, c, &blocked)).collect();
    let max_degree = chains
        .iter()
        .zip(&contact)
        .filter(|(_, &hit)| !hit)
        .map(|(c, _)| c.dim())
        .max();
    let Some(max_degree) = max_degree else {
        return Ok(constraints
            .iter()
            .map(|c| ConstraintReport {
                verdict: SpanningVerdict::Contact,
                degree: c.degree(),
                homology_rank: None,
            })
            .collect());
    };
    let components = Components::new(complex, &blocked);
    let model = chains
        .iter()
        .zip(&contact)
        .any(|(c, &hit)| !hit && c.dim() > 0)
        .then(|| complement_skeleton(complex, set, max_degree + 1));
    let jobs: Vec<usize> = (0..constraints.len()).collect();
    exec.map(&jobs, |&j| -> Result<ConstraintReport> {
        let degree = chains[j].dim();
        if contact[j] {
            return Ok(ConstraintReport { verdict: SpanningVerdict::Contact, degree, homology_rank: None });
        }
        let (null, homology_rank) = if degree == 0 {
            (components.bounds(&chains[j]), with_ranks.then_some(components.count))
        } else {
            let model = model.as_ref().expect("model built for positive degrees");
            let z = model.subdivide(&chains[j])?;
            let (null, _) = is_null_homologous(model, &z)?;
            let rank = if with_ranks { Some(homology_group(model, degree)?.rank) } else { None };
            (null, rank)
        };
        Ok(ConstraintReport {
            verdict: if null { SpanningVerdict::Killed } else { SpanningVerdict::Pass },
            degree,
            homology_rank,
        })
    })
    .into_iter()
    .collect()
}

/// Path components of `|K| \ |F|`: surviving simplices joined to their
/// surviving cofaces.
struct Components {
    root: Vec<usize>,
    /// Number of components.
    count: usize,
}

impl Components {
    fn new(complex: &Complex, blocked: &[BTreeSet<usize>]) -> Self {
        let top = complex.top_dim();
        let offsets: Vec<usize> = (0..=top)
            .scan(0, |acc, k| {
                let o = *acc;
                *acc += complex.count(k);
                Some(o)
            })
            .collect();
        let total = offsets[top] + complex.count(top);
        let alive = |k: usize, i: usize| k >= blocked.len() || !blocked[k].contains(&i);
        let mut parent: Vec<usize> = (0..total).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for k in 1..=top {
            for j in 0..complex.count(k) {
                if !alive(k, j) {
                    continue;
                }
                for (_, f) in complex.face_indices(k, j) {
                    if alive(k - 1, f) {
                        let (a, b) = (find(&mut parent, offsets[k] + j), find(&mut parent, offsets[k - 1] + f));
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        let mut count = 0;
        for k in 0..=top {
            for i in 0..complex.count(k) {
                let x = offsets[k] + i;
                if alive(k, i) && find(&mut parent, x) == x {
                    count += 1;
                }
            }
        }
        let root = (0..complex.count(0)).map(|v| find(&mut parent, v)).collect();
        Components { root, count }
    }

    /// A 0-chain bounds iff its coefficients sum to zero on every component.
    fn bounds(&self, chain: &Chain) -> bool {
        let mut sums: BTreeMap<usize, BigInt> = BTreeMap::new();
        for (v, c) in chain.terms() {
            *sums.entry(self.root[v]).or_default() += c;
        }
        sums.values().all(|s| s.is_zero())
    }
}

/// A closed axis-aligned box of lattice cells.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
}

impl Region {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return Err(Error::InvalidInput(format!("invalid region {lo:?}..{hi:?}")));
        }
        Ok(Region { lo, hi })
    }

    pub fn contains_point(&self, p: &[Rational64]) -> bool {
        p.iter().zip(self.lo.iter().zip(&self.hi)).all(|(x, (&lo, &hi))| {
            *x >= Rational64::from_integer(lo) && *x <= Rational64::from_integer(hi)
        })
    }

    pub fn interior_contains(&self, p: &[Rational64]) -> bool {
        p.iter().zip(self.lo.iter().zip(&self.hi)).all(|(x, (&lo, &hi))| {
            *x > Rational64::from_integer(lo) && *x < Rational64::from_integer(hi)
        })
    }

    /// Whether simplex `i` of dimension `k` lies in the closed region.
    pub fn contains_simplex(&self, complex: &Complex, k: usize, i: usize) -> bool {
        complex.simplex(k, i).vertices().iter().all(|&v| self.contains_point(complex.coords(v)))
    }

    /// Whether the relative interior of the simplex meets the open region.
    pub fn meets_simplex_interior(&self, complex: &Complex, k: usize, i: usize) -> bool {
        self.interior_contains(&complex.barycenter(complex.simplex(k, i)))
    }

    pub fn contains_region(&self, other: &Region) -> bool {
        self.lo.iter().zip(&other.lo).all(|(a, b)| a <= b) && self.hi.iter().zip(&other.hi).all(|(a, b)| a >= b)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompetitorVerdict {
    /// The two sets agree outside the region.
    pub boundary_match: bool,
    /// Per constraint: nonzero for the reference implies nonzero for the candidate.
    pub survival: Vec<(usize, bool)>,
    pub overall: bool,
}

/// Checks whether `candidate` is a topological competitor of `reference`
/// with respect to `region`, on the given constraint family.
pub fn competitor_check(
    reference: &FaceSet<'_>,
    candidate: &FaceSet<'_>,
    region: &Region,
    constraints: &[ConstraintCycle],
) -> Result<CompetitorVerdict> {
    if !reference.same_ambient(candidate) || reference.dim() != candidate.dim() {
        return Err(Error::MismatchedComplex);
    }
    let complex = reference.complex();
    if region.lo.len() != complex.ambient_dim() {
        return Err(Error::InvalidInput("region dimension does not match the complex".into()));
    }
    for (j, c) in constraints.iter().enumerate() {
        let chain = c.ambient_chain(complex)?;
        let k = chain.dim();
        let meets = chain.support().any(|i| {
            complex.simplex(k, i).all_faces().iter().any(|f| {
                let idx = complex.index_of(f).expect("closed complex");
                region.meets_simplex_interior(complex, f.dim(), idx)
            })
        });
        if meets {
            return Err(Error::Precondition(format!("constraint {j} meets the modification region")));
        }
    }
    let d = reference.dim();
    let outside = |s: &FaceSet<'_>| -> BTreeSet<usize> {
        s.iter().filter(|&f| !region.contains_simplex(complex, d, f)).collect()
    };
    let boundary_match = outside(reference) == outside(candidate);
    let before = spanning_check(complex, reference, constraints)?;
    let after = spanning_check(complex, candidate, constraints)?;
    let survival: Vec<(usize, bool)> = before
        .iter()
        .zip(&after)
        .enumerate()
        .map(|(j, (b, a))| (j, !b.passed() || a.passed()))
        .collect();
    let overall = boundary_match && survival.iter().all(|(_, ok)| *ok);
    Ok(CompetitorVerdict { boundary_match, survival, overall })
}

/// The (d-1)-faces of `set` contained in exactly one of its d-faces, paired
/// with that face.
pub fn free_faces(set: &FaceSet<'_>) -> Vec<(usize, usize)> {
    let complex = set.complex();
    let d = set.dim();
    if d == 0 {
        return Vec::new();
    }
    let mut owner: std::collections::BTreeMap<usize, (usize, usize)> = Default::default();
    for f in set.iter() {
        for (_, g) in complex.face_indices(d, f) {
            let e = owner.entry(g).or_insert((0, f));
            e.0 += 1;
        }
    }
    owner.into_iter().filter(|(_, (n, _))| *n == 1).map(|(g, (_, f))| (g, f)).collect()
}
