use std::collections::BTreeSet;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{contact_faces, face_cost, measure_jh, Certificate, SolveResult, WeightField, OBJECTIVE_TOL};
use crate::complement::{free_faces, spanning_check_with, ConstraintCycle};
use crate::complex::{Complex, FaceSet};
use crate::error::{Error, Result};
use crate::exec::Execution;

/// Above this many addable faces, exchange additions are restricted to faces
/// sharing a vertex with a removed face.
const FULL_EXCHANGE_POOL: usize = 64;

/// Candidate moves evaluated per batch.
const BATCH: usize = 32;

/// A move applied to the current face set.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Move {
    /// Remove `face` through its free (d-1)-face `free`.
    Collapse { free: usize, face: usize },
    Exchange { remove: Vec<usize>, add: Vec<usize> },
}

#[derive(Clone, Debug)]
pub struct LocalOptions<'a> {
    /// Faces that may be added; defaults to every d-face of the complex.
    pub pool: Option<FaceSet<'a>>,
    /// Largest number of faces removed or added by one exchange.
    pub max_exchange: usize,
    /// Consecutive non-improving kicks before a restart.
    pub patience: usize,
    /// Restarts from the whole searched set by a randomized descent.
    pub restarts: usize,
    pub exec: Execution,
}

impl Default for LocalOptions<'_> {
    fn default() -> Self {
        LocalOptions { pool: None, max_exchange: 2, patience: 40, restarts: 2, exec: Execution::default() }
    }
}

pub fn minimize_local<'a>(
    complex: &'a Complex,
    constraints: &[ConstraintCycle],
    h: &WeightField,
    init: &FaceSet<'a>,
    budget: usize,
    seed: u64,
) -> Result<SolveResult<'a>> {
    minimize_local_with(complex, constraints, h, init, budget, seed, &LocalOptions::default())
}

/// Seeded local search over face sets.
///
/// From `init`, repeatedly applies the best objective-decreasing move
/// (free-face collapse or an exchange of up to `max_exchange` faces) that
/// keeps every constraint satisfied. When no such move remains, the search
/// kicks the current local optimum by adding a random handful of pool faces
/// (a superset, hence feasible) and descends again, keeping the result only
/// if strictly better. After `patience` failed kicks it restarts from the
/// whole pool with a randomized descent. `budget` caps the number of
/// spanning checks.
pub fn minimize_local_with<'a>(
    complex: &'a Complex,
    constraints: &[ConstraintCycle],
    h: &WeightField,
    init: &FaceSet<'a>,
    budget: usize,
    seed: u64,
    options: &LocalOptions<'a>,
) -> Result<SolveResult<'a>> {
    if !std::ptr::eq(complex, init.complex()) {
        return Err(Error::MismatchedComplex);
    }
    let dim = init.dim();
    h.check_len(complex, dim)?;
    if let Some(pool) = &options.pool {
        if !pool.same_ambient(init) || pool.dim() != dim {
            return Err(Error::MismatchedComplex);
        }
    }
    let verdicts = spanning_check_with(complex, init, constraints, options.exec)?;
    if !verdicts.iter().all(|v| v.passed()) {
        return Err(Error::Precondition("initial face set does not satisfy the constraints".into()));
    }

    let contact = contact_faces(complex, dim, constraints)?;
    let pool: Vec<usize> = match &options.pool {
        Some(p) => p.iter().collect::<Vec<_>>(),
        None => (0..complex.count(dim)).collect(),
    }
    .into_iter()
    .filter(|f| !contact.contains(f))
    .collect();
    let costs: Vec<f64> = (0..complex.count(dim)).map(|f| face_cost(complex, dim, f, h)).collect();

    let mut universe: Vec<usize> = pool.iter().copied().chain(init.iter()).collect();
    universe.sort_unstable();
    universe.dedup();
    let mut search = Local {
        complex,
        constraints,
        dim,
        pool: &pool,
        costs: &costs,
        options,
        budget,
        evaluations: 0,
        known: KnownSets::new(&universe),
    };

    let start: BTreeSet<usize> = init.iter().collect();
    let start_key = search.known.key(&start);
    search.known.record(&start_key, true);
    let start_cost = search.cost(&start);
    let mut history = vec![(start_cost, start.iter().copied().collect::<Vec<_>>())];
    let (mut best, mut best_cost) = search.descend(start, start_cost, Some(&mut history));
    let mut accepted = history.len() - 1;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut anchor, mut anchor_cost) = (best.clone(), best_cost);
    let mut stale = 0;
    let mut restarts = 0;
    while search.evaluations < budget {
        if stale >= options.patience {
            if restarts == options.restarts {
                break;
            }
            restarts += 1;
            stale = 0;
            let full: BTreeSet<usize> = universe.iter().copied().collect();
            let full_cost = search.cost(&full);
            let (rough, rough_cost) = search.descend_shuffled(full, full_cost, &mut rng);
            (anchor, anchor_cost) = search.descend(rough, rough_cost, None);
        } else {
            let outside: Vec<usize> = pool.iter().copied().filter(|f| !anchor.contains(f)).collect();
            if outside.is_empty() {
                stale = options.patience;
                continue;
            }
            let k = rng.random_range(1..=outside.len().min(1 + outside.len() / 2));
            let mut kicked = anchor.clone();
            kicked.extend(outside.choose_multiple(&mut rng, k).copied());
            let kicked_cost = search.cost(&kicked);
            let (rough, rough_cost) = search.descend_shuffled(kicked, kicked_cost, &mut rng);
            let (cand, cand_cost) = search.descend(rough, rough_cost, None);
            if improves(cand_cost, anchor_cost) {
                (anchor, anchor_cost) = (cand, cand_cost);
                stale = 0;
            } else {
                stale += 1;
            }
        }
        if improves(anchor_cost, best_cost) {
            history.push((anchor_cost, anchor.iter().copied().collect()));
            (best, best_cost) = (anchor.clone(), anchor_cost);
            accepted += 1;
        }
    }

    let best = init.with_faces(best.iter().copied());
    Ok(SolveResult {
        objective: measure_jh(&best, h),
        best,
        certificate: Certificate::None,
        evaluations: search.evaluations,
        accepted_moves: accepted,
        history,
        seed: Some(seed),
    })
}

fn improves(candidate: f64, incumbent: f64) -> bool {
    candidate < incumbent - OBJECTIVE_TOL * incumbent.abs().max(1.0)
}

struct Local<'s> {
    complex: &'s Complex,
    constraints: &'s [ConstraintCycle],
    dim: usize,
    pool: &'s [usize],
    costs: &'s [f64],
    options: &'s LocalOptions<'s>,
    budget: usize,
    evaluations: usize,
    known: KnownSets,
}

impl Local<'_> {
    fn cost(&self, set: &BTreeSet<usize>) -> f64 {
        set.iter().map(|&f| self.costs[f]).sum()
    }

    /// Best-improvement descent; each accepted state is appended to `trace`.
    fn descend(
        &mut self,
        mut current: BTreeSet<usize>,
        mut cost: f64,
        mut trace: Option<&mut Vec<(f64, Vec<usize>)>>,
    ) -> (BTreeSet<usize>, f64) {
        while self.evaluations < self.budget {
            let moves = self.improving_moves(&current, cost);
            let Some((mv, next, next_cost)) = self.first_feasible(&current, moves) else {
                break;
            };
            let _ = mv;
            current = next;
            cost = next_cost;
            if let Some(t) = trace.as_deref_mut() {
                t.push((cost, current.iter().copied().collect()));
            }
        }
        (current, cost)
    }

    /// Descent taking the first feasible improving move in random order.
    fn descend_shuffled(&mut self, mut current: BTreeSet<usize>, mut cost: f64, rng: &mut ChaCha8Rng) -> (BTreeSet<usize>, f64) {
        while self.evaluations < self.budget {
            let mut moves = self.improving_moves(&current, cost);
            moves.shuffle(rng);
            let Some((_, next, next_cost)) = self.first_feasible(&current, moves) else {
                break;
            };
            current = next;
            cost = next_cost;
        }
        (current, cost)
    }

    /// Objective-decreasing moves sorted by resulting objective, then by
    /// the move itself.
    fn improving_moves(&self, current: &BTreeSet<usize>, cost: f64) -> Vec<(f64, Move)> {
        let threshold = cost - OBJECTIVE_TOL * cost.abs().max(1.0);
        let mut moves: Vec<(f64, Move)> = Vec::new();

        let set = FaceSet::new(self.complex, self.dim, current.iter().copied()).expect("valid faces");
        let mut collapsible = BTreeSet::new();
        for (free, face) in free_faces(&set) {
            if collapsible.insert(face) {
                moves.push((cost - self.costs[face], Move::Collapse { free, face }));
            }
        }
        for &f in current.iter().filter(|f| !collapsible.contains(f)) {
            moves.push((cost - self.costs[f], Move::Exchange { remove: vec![f], add: vec![] }));
        }

        let members: Vec<usize> = current.iter().copied().collect();
        let outside: Vec<usize> = self.pool.iter().copied().filter(|f| !current.contains(f)).collect();
        let restrict = outside.len() > FULL_EXCHANGE_POOL;
        let max_k = self.options.max_exchange;
        let priced = |items: &[usize]| {
            let mut v: Vec<(f64, Vec<usize>)> = subsets(items, max_k)
                .into_iter()
                .map(|s| (s.iter().map(|&g| self.costs[g]).sum(), s))
                .collect();
            v.sort_by(|a, b| a.0.total_cmp(&b.0));
            v
        };
        let shared = if restrict { Vec::new() } else { priced(&outside) };
        for remove in subsets(&members, max_k) {
            let removed_cost: f64 = remove.iter().map(|&f| self.costs[f]).sum();
            let near;
            let adds = if restrict {
                let addable: Vec<usize> =
                    outside.iter().copied().filter(|&g| remove.iter().any(|&f| self.adjacent(f, g))).collect();
                near = priced(&addable);
                &near
            } else {
                &shared
            };
            for (add_cost, add) in adds {
                let new_cost = cost - removed_cost + add_cost;
                if new_cost >= threshold {
                    break;
                }
                moves.push((new_cost, Move::Exchange { remove: remove.clone(), add: add.clone() }));
            }
        }
        moves.retain(|(c, _)| *c < threshold);
        moves.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        moves
    }

    fn adjacent(&self, a: usize, b: usize) -> bool {
        let va = self.complex.simplex(self.dim, a).vertices();
        self.complex.simplex(self.dim, b).vertices().iter().any(|v| va.contains(v))
    }

    /// The first feasible move in order. Candidates whose status follows
    /// from earlier checks are decided without a spanning check; the rest are
    /// checked in batches.
    fn first_feasible(
        &mut self,
        current: &BTreeSet<usize>,
        moves: Vec<(f64, Move)>,
    ) -> Option<(Move, BTreeSet<usize>, f64)> {
        let mut next = 0;
        while next < moves.len() && self.evaluations < self.budget {
            let room = BATCH.min(self.budget - self.evaluations);
            let mut batch: Vec<(usize, BTreeSet<usize>, Key)> = Vec::new();
            let mut settled = None;
            while next < moves.len() && batch.len() < room {
                let set = apply(current, &moves[next].1);
                let key = self.known.key(&set);
                match self.known.status(&key) {
                    Some(true) => {
                        settled = Some((next, set));
                        break;
                    }
                    Some(false) => {}
                    None => batch.push((next, set, key)),
                }
                next += 1;
            }
            self.evaluations += batch.len();
            let (complex, dim, constraints) = (self.complex, self.dim, self.constraints);
            let ok = self.options.exec.map(&batch, |(_, s, _)| check(complex, dim, constraints, s));
            for ((_, _, key), &feasible) in batch.iter().zip(&ok) {
                self.known.record(key, feasible);
            }
            let found = batch.into_iter().zip(ok).find(|(_, f)| *f).map(|((i, s, _), _)| (i, s)).or(settled);
            if let Some((i, set)) = found {
                let (c, m) = moves[i].clone();
                return Some((m, set, c));
            }
        }
        None
    }
}

type Key = Vec<u64>;

/// Face sets with known feasibility, as bitsets over the searched faces.
/// Feasibility is monotone under inclusion for sets avoiding every
/// constraint, so a superset of a feasible set is feasible and a subset of
/// an infeasible one is not.
struct KnownSets {
    bit: rustc_hash::FxHashMap<usize, usize>,
    words: usize,
    /// Concatenated keys, `words` per set.
    feasible: Vec<u64>,
    infeasible: Vec<u64>,
}

/// Most sets remembered per kind.
const KNOWN_CAP: usize = 1 << 14;

impl KnownSets {
    fn new(universe: &[usize]) -> Self {
        KnownSets {
            bit: universe.iter().enumerate().map(|(i, &f)| (f, i)).collect(),
            words: universe.len().div_ceil(64).max(1),
            feasible: Vec::new(),
            infeasible: Vec::new(),
        }
    }

    fn key(&self, set: &BTreeSet<usize>) -> Key {
        let mut k = vec![0u64; self.words];
        for f in set {
            let b = self.bit[f];
            k[b / 64] |= 1 << (b % 64);
        }
        k
    }

    fn status(&self, key: &[u64]) -> Option<bool> {
        let subset = |a: &[u64], b: &[u64]| a.iter().zip(b).all(|(x, y)| x & !y == 0);
        if self.feasible.chunks_exact(self.words).any(|f| subset(f, key)) {
            Some(true)
        } else if self.infeasible.chunks_exact(self.words).any(|g| subset(key, g)) {
            Some(false)
        } else {
            None
        }
    }

    fn record(&mut self, key: &[u64], feasible: bool) {
        let list = if feasible { &mut self.feasible } else { &mut self.infeasible };
        if list.len() < KNOWN_CAP * self.words {
            list.extend_from_slice(key);
        }
    }
}

fn check(complex: &Complex, dim: usize, constraints: &[ConstraintCycle], set: &BTreeSet<usize>) -> bool {
    let fs = FaceSet::new(complex, dim, set.iter().copied()).expect("valid faces");
    spanning_check_with(complex, &fs, constraints, Execution::Sequential)
        .map(|v| v.iter().all(|x| x.passed()))
        .unwrap_or(false)
}

fn apply(current: &BTreeSet<usize>, m: &Move) -> BTreeSet<usize> {
    let mut next = current.clone();
    match m {
        Move::Collapse { face, .. } => {
            next.remove(face);
        }
        Move::Exchange { remove, add } => {
            for f in remove {
                next.remove(f);
            }
            next.extend(add.iter().copied());
        }
    }
    next
}

/// Nonempty subsets of `items` with at most `k` elements (k <= 2 in practice).
fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    fn rec(items: &[usize], start: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        if cur.len() == k {
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            rec(items, i + 1, k, cur, out);
            cur.pop();
        }
    }
    rec(items, 0, k, &mut Vec::new(), &mut out);
    out
}
