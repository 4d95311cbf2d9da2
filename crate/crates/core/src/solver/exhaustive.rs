use std::cmp::Ordering;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};

use super::{compare_candidates, contact_faces, face_cost, measure_jh, Certificate, SolveResult, WeightField, OBJECTIVE_TOL};
use crate::complement::{spanning_check_with, ConstraintCycle};
use crate::complex::{Complex, FaceSet};
use crate::error::{Error, Result};
use crate::exec::Execution;

/// Largest candidate pool accepted by [`minimize_exhaustive`].
pub const EXHAUSTIVE_CAP: usize = 30;

/// Number of leading include/exclude decisions fanned out as independent tasks.
const SPLIT_DEPTH: usize = 4;

pub fn minimize_exhaustive<'a>(
    complex: &'a Complex,
    constraints: &[ConstraintCycle],
    h: &WeightField,
    pool: &FaceSet<'a>,
) -> Result<SolveResult<'a>> {
    minimize_exhaustive_with(complex, constraints, h, pool, Execution::default())
}

/// Global minimizer of `J_h` over all subsets of `pool` passing every
/// constraint, ties broken by the lexicographically smallest index list.
///
/// Feasibility is monotone under inclusion (a cycle that survives in a larger
/// complement survives in a smaller one), so a branch is cut as soon as
/// adding every remaining candidate still fails, and a feasible partial set
/// is never extended.
pub fn minimize_exhaustive_with<'a>(
    complex: &'a Complex,
    constraints: &[ConstraintCycle],
    h: &WeightField,
    pool: &FaceSet<'a>,
    exec: Execution,
) -> Result<SolveResult<'a>> {
    if !std::ptr::eq(complex, pool.complex()) {
        return Err(Error::MismatchedComplex);
    }
    if pool.len() > EXHAUSTIVE_CAP {
        return Err(Error::PoolTooLarge { size: pool.len(), cap: EXHAUSTIVE_CAP });
    }
    let dim = pool.dim();
    h.check_len(complex, dim)?;
    let contact = contact_faces(complex, dim, constraints)?;
    let usable: Vec<usize> = pool.iter().filter(|f| !contact.contains(f)).collect();
    let costs: Vec<f64> = usable.iter().map(|&f| face_cost(complex, dim, f, h)).collect();

    let search = Search { complex, constraints, dim, usable: &usable, costs: &costs, evaluations: AtomicUsize::new(0) };
    if !search.feasible(&usable) {
        return Err(Error::Infeasible);
    }

    let depth = SPLIT_DEPTH.min(usable.len());
    let branches = exec.map_range(1 << depth, |mask| {
        let mut chosen = Vec::new();
        let mut cost = 0.0;
        for bit in 0..depth {
            if mask & (1 << (depth - 1 - bit)) != 0 {
                chosen.push(bit);
                cost += costs[bit];
            }
        }
        let mut best: Option<(f64, Vec<usize>)> = None;
        search.descend(depth, &mut chosen, cost, Known::default(), &mut best);
        best
    });
    let (_, picks) = branches
        .into_iter()
        .flatten()
        .min_by(|a, b| compare_candidates((a.0, &a.1), (b.0, &b.1)))
        .ok_or(Error::Infeasible)?;

    let best = pool.with_faces(picks);
    let objective = measure_jh(&best, h);
    let faces = best.indices();
    Ok(SolveResult {
        objective,
        certificate: Certificate::Exhaustive { lower_bound: objective },
        evaluations: search.evaluations.into_inner(),
        accepted_moves: 0,
        history: vec![(objective, faces)],
        seed: None,
        best,
    })
}

struct Search<'s> {
    complex: &'s Complex,
    constraints: &'s [ConstraintCycle],
    dim: usize,
    usable: &'s [usize],
    costs: &'s [f64],
    evaluations: AtomicUsize,
}

impl Search<'_> {
    fn feasible(&self, faces: &[usize]) -> bool {
        self.evaluations.fetch_add(1, AtomicOrdering::Relaxed);
        let set = FaceSet::new(self.complex, self.dim, faces.iter().copied()).expect("valid faces");
        spanning_check_with(self.complex, &set, self.constraints, Execution::Sequential)
            .map(|v| v.iter().all(|x| x.passed()))
            .unwrap_or(false)
    }

    fn faces_of(&self, picks: &[usize]) -> Vec<usize> {
        picks.iter().map(|&i| self.usable[i]).collect()
    }

    /// Decides candidates `next..`; `chosen` holds positions in `usable`.
    /// `known_infeasible` says the chosen set itself already failed and
    /// `open_known` that chosen plus every remaining candidate passed.
    fn descend(
        &self,
        next: usize,
        chosen: &mut Vec<usize>,
        cost: f64,
        known: Known,
        best: &mut Option<(f64, Vec<usize>)>,
    ) {
        if let Some((b, _)) = best {
            if cost > *b + OBJECTIVE_TOL * b.abs().max(1.0) {
                return;
            }
        }
        let current = self.faces_of(chosen);
        if !known.chosen_fails && self.feasible(&current) {
            let better = match best {
                None => true,
                Some((b, faces)) => compare_candidates((cost, &current), (*b, faces)) == Ordering::Less,
            };
            if better {
                *best = Some((cost, current));
            }
            return;
        }
        if next == self.usable.len() {
            return;
        }
        if !known.completion_passes {
            let mut completion = current;
            completion.extend_from_slice(&self.usable[next..]);
            completion.sort_unstable();
            if !self.feasible(&completion) {
                return;
            }
        }
        chosen.push(next);
        self.descend(next + 1, chosen, cost + self.costs[next], Known { chosen_fails: false, completion_passes: true }, best);
        chosen.pop();
        self.descend(next + 1, chosen, cost, Known { chosen_fails: true, completion_passes: false }, best);
    }
}

/// Feasibility facts inherited from the parent node.
#[derive(Clone, Copy, Default)]
struct Known {
    chosen_fails: bool,
    completion_passes: bool,
}
