//! Smith normal form over the integers and sparse unit-pivot elimination.
//!
//! Dense matrices go straight to [`smith_normal_form`]. Large sparse boundary
//! matrices are first reduced by eliminating `+1`/`-1` pivots, which splits
//! off identity blocks without changing the invariant factors; only the
//! residual block is diagonalized densely.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::ops::Neg;

use num_bigint::BigInt;
use rustc_hash::{FxHashMap as HashMap, FxHashSet as HashSet};
use num_integer::Integer;
use num_traits::{CheckedMul, CheckedSub, One, Signed, ToPrimitive, Zero};

use crate::matrix::IntMatrix;

/// `U * A * V = D` with `U`, `V` unimodular and `D` diagonal with
/// `d1 | d2 | ...`, all nonnegative.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SnfResult {
    pub u: IntMatrix,
    pub v: IntMatrix,
    pub d: IntMatrix,
}

impl SnfResult {
    /// Diagonal entries of `D`, including zeros.
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.d.rows().min(self.d.cols())).map(|i| self.d.get(i, i).clone()).collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|x| !x.is_zero()).count()
    }
}

pub fn smith_normal_form(a: &IntMatrix) -> SnfResult {
    let (d, u, v) = diagonalize(a.clone(), true);
    SnfResult { u: u.unwrap(), v: v.unwrap(), d }
}

/// Nonzero invariant factors of `a`, in divisibility order.
pub fn invariant_factors(a: &IntMatrix) -> Vec<BigInt> {
    let (d, _, _) = diagonalize(a.clone(), false);
    (0..d.rows().min(d.cols()))
        .map(|i| d.get(i, i).clone())
        .filter(|x| !x.is_zero())
        .collect()
}

/// Some integer solution of `a x = b`, if one exists.
pub fn solve_integer(a: &IntMatrix, b: &[BigInt]) -> Option<Vec<BigInt>> {
    assert_eq!(a.rows(), b.len(), "right-hand side length mismatch");
    let snf = smith_normal_form(a);
    let ub = snf.u.mul_vec(b);
    let diag = snf.diagonal();
    let mut y = vec![BigInt::zero(); a.cols()];
    for (i, rhs) in ub.iter().enumerate() {
        let d = diag.get(i).cloned().unwrap_or_else(BigInt::zero);
        if d.is_zero() {
            if !rhs.is_zero() {
                return None;
            }
        } else {
            let (q, r) = rhs.div_rem(&d);
            if !r.is_zero() {
                return None;
            }
            y[i] = q;
        }
    }
    Some(snf.v.mul_vec(&y))
}

type Diagonalized = (IntMatrix, Option<IntMatrix>, Option<IntMatrix>);

fn diagonalize(mut d: IntMatrix, track: bool) -> Diagonalized {
    let (m, n) = (d.rows(), d.cols());
    let mut u = track.then(|| IntMatrix::identity(m));
    let mut v = track.then(|| IntMatrix::identity(n));

    for t in 0..m.min(n) {
        // Smallest nonzero entry of the trailing block becomes the pivot.
        let Some((pr, pc)) = min_abs_entry(&d, t..m, t..n) else {
            break;
        };
        swap_rows(&mut d, &mut u, t, pr);
        swap_cols(&mut d, &mut v, t, pc);
        loop {
            let pivot = d.get(t, t).clone();
            let mut clean = true;
            for i in t + 1..m {
                if d.get(i, t).is_zero() {
                    continue;
                }
                let q = d.get(i, t).div_floor(&pivot);
                add_row(&mut d, &mut u, i, t, &-q);
                clean &= d.get(i, t).is_zero();
            }
            for j in t + 1..n {
                if d.get(t, j).is_zero() {
                    continue;
                }
                let q = d.get(t, j).div_floor(&pivot);
                add_col(&mut d, &mut v, j, t, &-q);
                clean &= d.get(t, j).is_zero();
            }
            if !clean {
                // A remainder smaller than the pivot survives; move it in.
                let (r, c) = min_abs_cross(&d, t);
                swap_rows(&mut d, &mut u, t, r);
                swap_cols(&mut d, &mut v, t, c);
                continue;
            }
            let bad = (t + 1..m)
                .flat_map(|i| (t + 1..n).map(move |j| (i, j)))
                .find(|&(i, j)| !d.get(i, j).is_multiple_of(&pivot));
            match bad {
                Some((i, _)) => add_row(&mut d, &mut u, t, i, &BigInt::one()),
                None => break,
            }
        }
        if d.get(t, t).is_negative() {
            d.negate_row(t);
            if let Some(u) = u.as_mut() {
                u.negate_row(t);
            }
        }
    }
    (d, u, v)
}

fn min_abs_entry(
    d: &IntMatrix,
    rows: std::ops::Range<usize>,
    cols: std::ops::Range<usize>,
) -> Option<(usize, usize)> {
    let mut best: Option<((usize, usize), BigInt)> = None;
    for i in rows {
        for j in cols.clone() {
            let x = d.get(i, j);
            if x.is_zero() {
                continue;
            }
            let a = x.abs();
            if best.as_ref().is_none_or(|(_, b)| a < *b) {
                let unit = a.is_one();
                best = Some(((i, j), a));
                if unit {
                    return best.map(|(p, _)| p);
                }
            }
        }
    }
    best.map(|(p, _)| p)
}

fn min_abs_cross(d: &IntMatrix, t: usize) -> (usize, usize) {
    let mut cand = vec![(t, t)];
    cand.extend((t + 1..d.rows()).map(|i| (i, t)));
    cand.extend((t + 1..d.cols()).map(|j| (t, j)));
    cand.into_iter()
        .filter(|&(i, j)| !d.get(i, j).is_zero())
        .min_by_key(|&(i, j)| d.get(i, j).abs())
        .expect("pivot is nonzero")
}

fn swap_rows(d: &mut IntMatrix, u: &mut Option<IntMatrix>, a: usize, b: usize) {
    d.swap_rows(a, b);
    if let Some(u) = u {
        u.swap_rows(a, b);
    }
}

fn swap_cols(d: &mut IntMatrix, v: &mut Option<IntMatrix>, a: usize, b: usize) {
    d.swap_cols(a, b);
    if let Some(v) = v {
        v.swap_cols(a, b);
    }
}

fn add_row(d: &mut IntMatrix, u: &mut Option<IntMatrix>, dst: usize, src: usize, k: &BigInt) {
    d.add_row_multiple(dst, src, k);
    if let Some(u) = u {
        u.add_row_multiple(dst, src, k);
    }
}

fn add_col(d: &mut IntMatrix, v: &mut Option<IntMatrix>, dst: usize, src: usize, k: &BigInt) {
    d.add_col_multiple(dst, src, k);
    if let Some(v) = v {
        v.add_col_multiple(dst, src, k);
    }
}

/// Coefficient ring used by the sparse elimination. Machine integers report
/// overflow through the checked operations; `BigInt` never overflows.
pub(crate) trait Coeff:
    Clone + PartialEq + Zero + One + Signed + CheckedMul + CheckedSub + Neg<Output = Self>
{
    fn to_big(&self) -> BigInt;
    fn from_big(x: &BigInt) -> Option<Self>;
}

impl Coeff for i64 {
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
    fn from_big(x: &BigInt) -> Option<Self> {
        x.to_i64()
    }
}

impl Coeff for BigInt {
    fn to_big(&self) -> BigInt {
        self.clone()
    }
    fn from_big(x: &BigInt) -> Option<Self> {
        Some(x.clone())
    }
}

/// Triplet-form sparse matrix.
#[derive(Clone, Debug)]
pub(crate) struct SparseMatrix<T> {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, T)>,
}

impl<T: Coeff> SparseMatrix<T> {
    pub fn new(rows: usize, cols: usize) -> Self {
        SparseMatrix { rows, cols, entries: Vec::new() }
    }

    pub fn push(&mut self, r: usize, c: usize, v: T) {
        self.entries.push((r, c, v));
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    fn convert<U: Coeff>(&self) -> SparseMatrix<U> {
        SparseMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .map(|(r, c, v)| (*r, *c, U::from_big(&v.to_big()).expect("widening")))
                .collect(),
        }
    }
}

/// Outcome of reducing a sparse matrix (optionally with a right-hand side).
#[derive(Clone, Debug)]
pub(crate) struct Reduction {
    /// Number of unit pivots eliminated; each contributes an invariant factor 1.
    pub unit_pivots: usize,
    /// Nonzero invariant factors of the residual block.
    pub residual_factors: Vec<BigInt>,
    /// For a right-hand side `b`: `Some(x)` with `A x = b`, or `None`.
    pub solution: Option<Option<Vec<BigInt>>>,
}

impl Reduction {
    pub fn rank(&self) -> usize {
        self.unit_pivots + self.residual_factors.len()
    }

    /// All nonzero invariant factors, in divisibility order.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        let mut f = vec![BigInt::one(); self.unit_pivots];
        f.extend(self.residual_factors.iter().cloned());
        f
    }
}

struct Overflow;

/// Reduces `m`, first in machine integers and, should an intermediate value
/// overflow, again in arbitrary precision.
pub(crate) fn reduce(m: &SparseMatrix<i64>, rhs: Option<&[BigInt]>) -> Reduction {
    if let Some(b) = rhs {
        assert_eq!(b.len(), m.rows(), "right-hand side length mismatch");
    }
    let small_rhs: Option<Option<Vec<i64>>> =
        rhs.map(|b| b.iter().map(|x| x.to_i64()).collect::<Option<Vec<i64>>>());
    if !matches!(small_rhs, Some(None)) {
        if let Ok(r) = eliminate(m, small_rhs.flatten().as_deref()) {
            return r;
        }
    }
    let big_rhs: Option<Vec<BigInt>> = rhs.map(<[BigInt]>::to_vec);
    match eliminate::<BigInt>(&m.convert(), big_rhs.as_deref()) {
        Ok(r) => r,
        Err(Overflow) => unreachable!("arbitrary precision cannot overflow"),
    }
}

struct Pivot<T> {
    col: usize,
    sign: T,
    row: Vec<(usize, T)>,
    rhs: T,
}

fn eliminate<T: Coeff>(m: &SparseMatrix<T>, rhs: Option<&[T]>) -> Result<Reduction, Overflow> {
    let (nr, nc) = (m.rows, m.cols);
    let mut rows: Vec<HashMap<usize, T>> = vec![HashMap::default(); nr];
    let mut col_rows: Vec<HashSet<usize>> = vec![HashSet::default(); nc];
    for (r, c, v) in &m.entries {
        if v.is_zero() {
            continue;
        }
        let e = rows[*r].entry(*c).or_insert_with(T::zero);
        *e = e.clone() + v.clone();
        if e.is_zero() {
            rows[*r].remove(c);
            col_rows[*c].remove(r);
        } else {
            col_rows[*c].insert(*r);
        }
    }
    let mut b: Vec<T> = rhs.map_or_else(|| vec![T::zero(); nr], <[T]>::to_vec);
    let with_rhs = rhs.is_some();

    let mut pivots: Vec<Pivot<T>> = Vec::new();
    let mut col_done = vec![false; nc];
    let mut row_done = vec![false; nr];

    let mut progress = true;
    while progress {
        progress = false;
        let mut heap: BinaryHeap<Reverse<(usize, usize)>> = (0..nc)
            .filter(|&c| !col_done[c] && !col_rows[c].is_empty())
            .map(|c| Reverse((col_rows[c].len(), c)))
            .collect();
        let mut deferred = HashSet::default();
        while let Some(Reverse((count, c))) = heap.pop() {
            if col_done[c] || col_rows[c].is_empty() {
                continue;
            }
            if count != col_rows[c].len() {
                heap.push(Reverse((col_rows[c].len(), c)));
                continue;
            }
            let pivot_row = col_rows[c]
                .iter()
                .copied()
                .filter(|&r| rows[r][&c].abs().is_one())
                .min_by_key(|&r| (rows[r].len(), r));
            let Some(pr) = pivot_row else {
                deferred.insert(c);
                continue;
            };
            deferred.remove(&c);
            let sign = rows[pr][&c].clone();
            let prow: Vec<(usize, T)> =
                rows[pr].iter().map(|(&k, v)| (k, v.clone())).collect();
            let targets: Vec<usize> = col_rows[c].iter().copied().filter(|&r| r != pr).collect();
            let mut touched = HashSet::default();
            for r in targets {
                let f = rows[r][&c].checked_mul(&sign).ok_or(Overflow)?;
                for (k, v) in &prow {
                    let cur = rows[r].get(k).cloned().unwrap_or_else(T::zero);
                    let new = cur.checked_sub(&f.checked_mul(v).ok_or(Overflow)?).ok_or(Overflow)?;
                    if new.is_zero() {
                        rows[r].remove(k);
                        col_rows[*k].remove(&r);
                    } else {
                        rows[r].insert(*k, new);
                        col_rows[*k].insert(r);
                    }
                    touched.insert(*k);
                }
                if with_rhs {
                    let delta = f.checked_mul(&b[pr]).ok_or(Overflow)?;
                    b[r] = b[r].checked_sub(&delta).ok_or(Overflow)?;
                }
            }
            for (k, _) in &prow {
                col_rows[*k].remove(&pr);
            }
            rows[pr].clear();
            row_done[pr] = true;
            col_done[c] = true;
            pivots.push(Pivot {
                col: c,
                sign,
                row: prow.into_iter().filter(|(k, _)| *k != c).collect(),
                rhs: b[pr].clone(),
            });
            progress = true;
            for k in touched {
                if !col_done[k] && !col_rows[k].is_empty() {
                    heap.push(Reverse((col_rows[k].len(), k)));
                }
            }
        }
    }

    // Residual block: rows and columns still carrying entries.
    let res_rows: Vec<usize> = (0..nr).filter(|&r| !row_done[r] && !rows[r].is_empty()).collect();
    let mut res_cols: Vec<usize> =
        (0..nc).filter(|&c| !col_done[c] && !col_rows[c].is_empty()).collect();
    res_cols.sort_unstable();
    let col_pos: HashMap<usize, usize> = res_cols.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut dense = IntMatrix::zeros(res_rows.len(), res_cols.len());
    for (i, &r) in res_rows.iter().enumerate() {
        for (c, v) in &rows[r] {
            dense.set(i, col_pos[c], v.to_big());
        }
    }
    let residual_factors = invariant_factors(&dense);

    let solution = if with_rhs {
        let consistent_zero_rows = (0..nr)
            .filter(|&r| !row_done[r] && rows[r].is_empty())
            .all(|r| b[r].is_zero());
        if !consistent_zero_rows {
            Some(None)
        } else {
            let res_b: Vec<BigInt> = res_rows.iter().map(|&r| b[r].to_big()).collect();
            match solve_integer(&dense, &res_b) {
                None => Some(None),
                Some(y) => {
                    let mut x: Vec<BigInt> = vec![BigInt::zero(); nc];
                    for (i, &c) in res_cols.iter().enumerate() {
                        x[c] = y[i].clone();
                    }
                    for p in pivots.iter().rev() {
                        let mut acc = p.rhs.to_big();
                        for (k, v) in &p.row {
                            acc -= v.to_big() * &x[*k];
                        }
                        x[p.col] = acc * p.sign.to_big();
                    }
                    Some(Some(x))
                }
            }
        }
    } else {
        None
    };

    Ok(Reduction { unit_pivots: pivots.len(), residual_factors, solution })
}

impl SparseMatrix<i64> {
    #[cfg(test)]
    pub fn to_dense(&self) -> IntMatrix {
        let mut d = IntMatrix::zeros(self.rows, self.cols);
        for (r, c, v) in &self.entries {
            let cur = d.get(*r, *c).clone();
            d.set(*r, *c, cur + BigInt::from(*v));
        }
        d
    }
}
