//! Finite simplicial complexes, integer chains and the boundary operator.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use rustc_hash::FxHashMap as HashMap;

use crate::error::{Error, Result};
use crate::homology::HomologyCache;
use crate::matrix::IntMatrix;
use crate::snf::SparseMatrix;

/// An oriented simplex stored by its strictly increasing vertex ids.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Simplex {
    vertices: Vec<usize>,
}

impl Simplex {
    /// Canonical simplex from an already increasing vertex list.
    pub fn new(vertices: Vec<usize>) -> Result<Self> {
        let (s, sign) = Self::oriented(vertices)?;
        if sign != 1 {
            return Err(Error::InvalidInput(
                "vertex ids must be strictly increasing; use Simplex::oriented".into(),
            ));
        }
        Ok(s)
    }

    /// Canonicalizes an arbitrary vertex ordering and returns the sign of the
    /// sorting permutation.
    pub fn oriented(mut vertices: Vec<usize>) -> Result<(Self, i8)> {
        if vertices.is_empty() {
            return Err(Error::InvalidInput("a simplex needs at least one vertex".into()));
        }
        let sign = permutation_sign(&vertices);
        vertices.sort_unstable();
        if vertices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput(format!("repeated vertex in {vertices:?}")));
        }
        Ok((Simplex { vertices }, sign))
    }

    pub(crate) fn from_sorted_unchecked(vertices: Vec<usize>) -> Self {
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        Simplex { vertices }
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    /// The codimension-one faces with their incidence signs `(-1)^i`, where
    /// face `i` omits the `i`-th vertex.
    pub fn boundary_faces(&self) -> impl Iterator<Item = (i8, Simplex)> + '_ {
        let k = self.vertices.len();
        (0..if k > 1 { k } else { 0 }).map(move |i| {
            let mut v = self.vertices.clone();
            v.remove(i);
            (if i % 2 == 0 { 1 } else { -1 }, Simplex { vertices: v })
        })
    }

    /// Every nonempty face, including the simplex itself.
    pub fn all_faces(&self) -> Vec<Simplex> {
        let k = self.vertices.len();
        (1u32..(1u32 << k))
            .map(|mask| Simplex {
                vertices: (0..k)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| self.vertices[i])
                    .collect(),
            })
            .collect()
    }

    pub fn is_face_of(&self, other: &Simplex) -> bool {
        self.vertices.iter().all(|v| other.vertices.binary_search(v).is_ok())
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.vertices.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}

/// Sign of the permutation that sorts `v` (counted by inversions).
pub fn permutation_sign(v: &[usize]) -> i8 {
    let mut inversions = 0usize;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            if v[i] > v[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// A finite simplicial complex with per-dimension indexed simplex tables.
///
/// Vertex `v` is always the 0-simplex with index `v`. Coordinates are exact
/// rationals; multiply by [`Complex::scale`] to get ambient lengths.
pub struct Complex {
    coords: Vec<Vec<Rational64>>,
    scale: f64,
    simplices: Vec<Vec<Simplex>>,
    index: Vec<HashMap<Simplex, usize>>,
    lattice: Option<Vec<usize>>,
    pub(crate) homology_cache: HomologyCache,
}

impl fmt::Debug for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Complex")
            .field("ambient_dim", &self.ambient_dim())
            .field("counts", &self.counts())
            .finish()
    }
}

impl Complex {
    /// Builds the closure of `simplices` over the vertex set given by `coords`.
    pub fn from_simplices<I>(coords: Vec<Vec<Rational64>>, scale: f64, simplices: I) -> Result<Self>
    where
        I: IntoIterator<Item = Vec<usize>>,
    {
        let nv = coords.len();
        if let Some(first) = coords.first() {
            if coords.iter().any(|c| c.len() != first.len()) {
                return Err(Error::InvalidInput("inconsistent coordinate dimensions".into()));
            }
        }
        let mut per_dim: Vec<BTreeSet<Simplex>> = vec![(0..nv)
            .map(|v| Simplex { vertices: vec![v] })
            .collect()];
        for raw in simplices {
            let (s, _) = Simplex::oriented(raw)?;
            if let Some(&bad) = s.vertices.iter().find(|&&v| v >= nv) {
                return Err(Error::InvalidInput(format!("vertex {bad} has no coordinates")));
            }
            for face in s.all_faces() {
                let k = face.dim();
                if per_dim.len() <= k {
                    per_dim.resize_with(k + 1, BTreeSet::new);
                }
                per_dim[k].insert(face);
            }
        }
        Ok(Self::from_closed(
            coords,
            scale,
            per_dim.into_iter().map(|s| s.into_iter().collect()).collect(),
        ))
    }

    /// Assembles a complex from per-dimension tables that are already closed
    /// under taking faces. Tables are sorted here.
    pub(crate) fn from_closed(
        coords: Vec<Vec<Rational64>>,
        scale: f64,
        mut simplices: Vec<Vec<Simplex>>,
    ) -> Self {
        while simplices.len() > 1 && simplices.last().is_some_and(|s| s.is_empty()) {
            simplices.pop();
        }
        let index = simplices
            .iter_mut()
            .map(|table| {
                table.sort_unstable();
                table.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect()
            })
            .collect();
        let top = simplices.len().saturating_sub(1);
        Complex {
            coords,
            scale,
            simplices,
            index,
            lattice: None,
            homology_cache: HomologyCache::new(top),
        }
    }

    /// Dimension of the coordinate space.
    pub fn ambient_dim(&self) -> usize {
        self.coords.first().map_or(0, Vec::len)
    }

    /// Largest dimension with at least one simplex.
    pub fn top_dim(&self) -> usize {
        self.simplices.len().saturating_sub(1)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn count(&self, k: usize) -> usize {
        self.simplices.get(k).map_or(0, Vec::len)
    }

    pub fn counts(&self) -> Vec<usize> {
        self.simplices.iter().map(Vec::len).collect()
    }

    pub fn num_vertices(&self) -> usize {
        self.coords.len()
    }

    pub fn simplices(&self, k: usize) -> &[Simplex] {
        self.simplices.get(k).map_or(&[], Vec::as_slice)
    }

    pub fn simplex(&self, k: usize, i: usize) -> &Simplex {
        &self.simplices[k][i]
    }

    pub fn index_of(&self, s: &Simplex) -> Option<usize> {
        self.index.get(s.dim())?.get(s).copied()
    }

    /// Exact vertex coordinates in lattice units.
    pub fn coords(&self, v: usize) -> &[Rational64] {
        &self.coords[v]
    }

    /// Vertex position in ambient units (coordinates times scale).
    pub fn point(&self, v: usize) -> Vec<f64> {
        self.coords[v]
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::NAN) * self.scale)
            .collect()
    }

    /// Indices and signs of the codimension-one faces of simplex `i` in dimension `k`.
    pub fn face_indices(&self, k: usize, i: usize) -> Vec<(i8, usize)> {
        self.simplices[k][i]
            .boundary_faces()
            .map(|(sign, f)| {
                let j = self.index[k - 1][&f];
                (sign, j)
            })
            .collect()
    }

    /// Per-axis cell counts when the complex was built on a lattice grid.
    pub fn lattice(&self) -> Option<&[usize]> {
        self.lattice.as_deref()
    }

    /// Vertex id of an integer lattice point of a grid complex.
    pub fn vertex_at(&self, point: &[i64]) -> Option<usize> {
        let dims = self.lattice.as_ref()?;
        if point.len() != dims.len() {
            return None;
        }
        let mut id = 0usize;
        for (&p, &b) in point.iter().zip(dims).rev() {
            if p < 0 || p as usize > b {
                return None;
            }
            id = id * (b + 1) + p as usize;
        }
        Some(id)
    }

    /// Lattice coordinates of a grid vertex.
    pub fn lattice_point(&self, v: usize) -> Vec<i64> {
        self.coords[v].iter().map(|c| c.to_integer()).collect()
    }

    /// Index of the simplex spanned by the given (unordered) vertex ids.
    pub fn find(&self, vertices: &[usize]) -> Option<(usize, i8)> {
        let (s, sign) = Simplex::oriented(vertices.to_vec()).ok()?;
        self.index_of(&s).map(|i| (i, sign))
    }

    /// Barycenter of a simplex in exact lattice coordinates.
    pub fn barycenter(&self, s: &Simplex) -> Vec<Rational64> {
        let n = self.ambient_dim();
        let k = s.vertices().len() as i64;
        let mut c = vec![Rational64::zero(); n];
        for &v in s.vertices() {
            for (acc, x) in c.iter_mut().zip(&self.coords[v]) {
                *acc += *x;
            }
        }
        c.into_iter().map(|x| x / k).collect()
    }

    /// d-dimensional volume of simplex `i` of dimension `k`, in ambient units.
    pub fn volume(&self, k: usize, i: usize) -> f64 {
        let pts: Vec<Vec<f64>> =
            self.simplices[k][i].vertices().iter().map(|&v| self.point(v)).collect();
        simplex_volume(&pts)
    }
}

/// Volume of the simplex spanned by `pts` via the Gram determinant.
pub fn simplex_volume(pts: &[Vec<f64>]) -> f64 {
    let k = pts.len().saturating_sub(1);
    if k == 0 {
        return 1.0;
    }
    let edges: Vec<Vec<f64>> = pts[1..]
        .iter()
        .map(|p| p.iter().zip(&pts[0]).map(|(a, b)| a - b).collect())
        .collect();
    let mut gram = vec![vec![0.0; k]; k];
    for a in 0..k {
        for b in 0..k {
            gram[a][b] = edges[a].iter().zip(&edges[b]).map(|(x, y)| x * y).sum();
        }
    }
    let det = determinant(gram).max(0.0);
    let fact: f64 = (1..=k).map(|x| x as f64).product();
    det.sqrt() / fact
}

fn determinant(mut m: Vec<Vec<f64>>) -> f64 {
    let n = m.len();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        if m[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        det *= m[col][col];
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for c in col..n {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    det
}

/// Kuhn (Freudenthal) triangulation of an axis-aligned box of unit cells.
///
/// Each cell is split into `n!` simplices sharing its main diagonal. Vertex
/// ids follow the mixed-radix order with axis 0 varying fastest.
pub fn build_grid_complex(n: usize, cells: &[usize], scale: f64) -> Result<Complex> {
    if n == 0 || n > 4 {
        return Err(Error::InvalidInput(format!("ambient dimension {n} not in 1..=4")));
    }
    if cells.len() != n {
        return Err(Error::InvalidInput(format!(
            "expected {n} axis counts, got {}",
            cells.len()
        )));
    }
    if cells.contains(&0) {
        return Err(Error::InvalidInput("axis cell counts must be at least 1".into()));
    }
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::InvalidInput(format!("scale must be positive, got {scale}")));
    }
    let strides: Vec<usize> = (0..n)
        .map(|a| cells[..a].iter().map(|c| c + 1).product())
        .collect();
    let nv: usize = cells.iter().map(|c| c + 1).product();
    let coords: Vec<Vec<Rational64>> = (0..nv)
        .map(|id| {
            (0..n)
                .map(|a| Rational64::from_integer(((id / strides[a]) % (cells[a] + 1)) as i64))
                .collect()
        })
        .collect();

    let perms = permutations(n);
    let ncells: usize = cells.iter().product();
    let mut tops = Vec::with_capacity(ncells * perms.len());
    for c in 0..ncells {
        let mut rem = c;
        let mut origin = 0usize;
        for a in 0..n {
            origin += (rem % cells[a]) * strides[a];
            rem /= cells[a];
        }
        for perm in &perms {
            let mut v = origin;
            let mut simplex = vec![v];
            for &axis in perm {
                v += strides[axis];
                simplex.push(v);
            }
            tops.push(simplex);
        }
    }
    let mut complex = Complex::from_simplices(coords, scale, tops)?;
    complex.lattice = Some(cells.to_vec());
    Ok(complex)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

/// A sparse integer combination of k-simplices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chain {
    dim: usize,
    terms: BTreeMap<usize, BigInt>,
}

impl Chain {
    pub fn zero(dim: usize) -> Self {
        Chain { dim, terms: BTreeMap::new() }
    }

    /// Sums the given terms, dropping zero coefficients.
    pub fn from_terms<I, C>(dim: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (usize, C)>,
        C: Into<BigInt>,
    {
        let mut c = Chain::zero(dim);
        for (i, coef) in terms {
            c.add_term(i, coef.into());
        }
        c
    }

    /// The elementary chain `sign * simplex_i`.
    pub fn elementary(dim: usize, i: usize, sign: i64) -> Self {
        Chain::from_terms(dim, [(i, sign)])
    }

    pub fn add_term(&mut self, i: usize, coef: BigInt) {
        if coef.is_zero() {
            return;
        }
        let entry = self.terms.entry(i).or_insert_with(BigInt::zero);
        *entry += coef;
        if entry.is_zero() {
            self.terms.remove(&i);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, i: usize) -> BigInt {
        self.terms.get(&i).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, &BigInt)> + '_ {
        self.terms.iter().map(|(&i, c)| (i, c))
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.terms.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scaled(&self, k: &BigInt) -> Chain {
        Chain::from_terms(self.dim, self.terms.iter().map(|(&i, c)| (i, c * k)))
    }

    /// Errors unless every simplex index is valid in `complex`.
    pub fn validate(&self, complex: &Complex) -> Result<()> {
        let count = complex.count(self.dim);
        match self.terms.keys().next_back() {
            Some(&i) if i >= count => Err(Error::InvalidInput(format!(
                "chain references {}-simplex {i}, complex has {count}",
                self.dim
            ))),
            _ => Ok(()),
        }
    }
}

impl Add for &Chain {
    type Output = Chain;
    fn add(self, rhs: &Chain) -> Chain {
        assert_eq!(self.dim, rhs.dim, "adding chains of different dimensions");
        let mut out = self.clone();
        for (&i, c) in &rhs.terms {
            out.add_term(i, c.clone());
        }
        out
    }
}

impl Sub for &Chain {
    type Output = Chain;
    fn sub(self, rhs: &Chain) -> Chain {
        self + &(-rhs)
    }
}

impl Neg for &Chain {
    type Output = Chain;
    fn neg(self) -> Chain {
        Chain {
            dim: self.dim,
            terms: self.terms.iter().map(|(&i, c)| (i, -c)).collect(),
        }
    }
}

/// Boundary of a chain: `sum_i (-1)^i` times the face omitting vertex `i`,
/// extended linearly. The boundary of a 0-chain is the zero 0-chain.
pub fn boundary(complex: &Complex, chain: &Chain) -> Result<Chain> {
    chain.validate(complex)?;
    let k = chain.dim;
    if k == 0 {
        return Ok(Chain::zero(0));
    }
    let mut out = Chain::zero(k - 1);
    for (i, coef) in chain.terms() {
        for (sign, j) in complex.face_indices(k, i) {
            let term = if sign > 0 { coef.clone() } else { -coef };
            out.add_term(j, term);
        }
    }
    Ok(out)
}

/// Dense matrix of the boundary map from k-chains to (k-1)-chains.
pub fn boundary_matrix(complex: &Complex, k: usize) -> Result<IntMatrix> {
    if k == 0 || k > complex.top_dim() {
        return Err(Error::DimensionOutOfRange { k, max: complex.top_dim() });
    }
    let mut m = IntMatrix::zeros(complex.count(k - 1), complex.count(k));
    for j in 0..complex.count(k) {
        for (sign, i) in complex.face_indices(k, j) {
            m.set(i, j, BigInt::from(sign));
        }
    }
    Ok(m)
}

/// Sparse boundary matrix; rows are (k-1)-simplices, columns k-simplices.
pub(crate) fn sparse_boundary(complex: &Complex, k: usize) -> SparseMatrix<i64> {
    let rows = if k == 0 { 0 } else { complex.count(k - 1) };
    let mut m = SparseMatrix::new(rows, complex.count(k));
    if k > 0 {
        for j in 0..complex.count(k) {
            for (sign, i) in complex.face_indices(k, j) {
                m.push(i, j, sign as i64);
            }
        }
    }
    m
}

/// A set of d-faces of an ambient complex.
#[derive(Clone)]
pub struct FaceSet<'a> {
    complex: &'a Complex,
    dim: usize,
    faces: BTreeSet<usize>,
}

impl fmt::Debug for FaceSet<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FaceSet").field("dim", &self.dim).field("faces", &self.faces).finish()
    }
}

impl PartialEq for FaceSet<'_> {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.complex, other.complex) && self.dim == other.dim && self.faces == other.faces
    }
}

impl Eq for FaceSet<'_> {}

impl<'a> FaceSet<'a> {
    pub fn new<I: IntoIterator<Item = usize>>(complex: &'a Complex, dim: usize, faces: I) -> Result<Self> {
        if dim >= complex.top_dim() {
            return Err(Error::InvalidInput(format!(
                "cell dimension {dim} must be below the complex dimension {}",
                complex.top_dim()
            )));
        }
        let faces: BTreeSet<usize> = faces.into_iter().collect();
        let count = complex.count(dim);
        if let Some(&bad) = faces.iter().find(|&&f| f >= count) {
            return Err(Error::InvalidInput(format!("face index {bad} out of range ({count} faces)")));
        }
        Ok(FaceSet { complex, dim, faces })
    }

    pub fn empty(complex: &'a Complex, dim: usize) -> Result<Self> {
        Self::new(complex, dim, std::iter::empty())
    }

    /// Every d-face of the ambient complex.
    pub fn all(complex: &'a Complex, dim: usize) -> Result<Self> {
        Self::new(complex, dim, 0..complex.count(dim))
    }

    pub fn complex(&self) -> &'a Complex {
        self.complex
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn contains(&self, face: usize) -> bool {
        self.faces.contains(&face)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.faces.iter().copied()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.faces.iter().copied().collect()
    }

    pub fn same_ambient(&self, other: &FaceSet<'_>) -> bool {
        std::ptr::eq(self.complex, other.complex)
    }

    /// Copy with the given faces replaced. Indices must be valid.
    pub fn with_faces<I: IntoIterator<Item = usize>>(&self, faces: I) -> Self {
        let faces: BTreeSet<usize> = faces.into_iter().collect();
        debug_assert!(faces.iter().all(|&f| f < self.complex.count(self.dim)));
        FaceSet { complex: self.complex, dim: self.dim, faces }
    }

    pub fn inserted(&self, face: usize) -> Self {
        let mut s = self.clone();
        s.faces.insert(face);
        s
    }

    pub fn removed(&self, face: usize) -> Self {
        let mut s = self.clone();
        s.faces.remove(&face);
        s
    }

    /// All simplices (any dimension) lying in the closure of the face set,
    /// as per-dimension sorted index sets.
    pub fn closure(&self) -> Vec<BTreeSet<usize>> {
        let mut out = vec![BTreeSet::new(); self.dim + 1];
        for &f in &self.faces {
            for face in self.complex.simplex(self.dim, f).all_faces() {
                let k = face.dim();
                out[k].insert(self.complex.index_of(&face).expect("closed complex"));
            }
        }
        out
    }
}

/// Chain with coefficient `+1` or `-1` on every face of `set`.
///
/// `orientation`, when given, holds one sign per face in increasing index
/// order; otherwise every face carries its canonical orientation.
pub fn faceset_to_chain(set: &FaceSet<'_>, orientation: Option<&[i8]>) -> Result<Chain> {
    if let Some(signs) = orientation {
        if signs.len() != set.len() {
            return Err(Error::InvalidInput(format!(
                "{} orientation signs for {} faces",
                signs.len(),
                set.len()
            )));
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidInput("orientation signs must be +1 or -1".into()));
        }
    }
    Ok(Chain::from_terms(
        set.dim(),
        set.iter().enumerate().map(|(pos, f)| {
            let sign = orientation.map_or(1, |o| o[pos]);
            (f, BigInt::from(sign))
        }),
    ))
}
