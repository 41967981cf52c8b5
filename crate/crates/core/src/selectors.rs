//! Column subset selectors.
//!
//! [`select_exact`] enumerates every `k`-subset in lexicographic order and is
//! the ground truth the heuristics are measured against. The enumeration is
//! split into fixed-size contiguous chunks whose boundaries depend only on
//! `C(n, k)`, and chunk winners are merged in chunk order, so the winning
//! subset does not depend on the number of worker threads.

use std::fmt;
use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::criteria::{CriterionKind, CriterionSpec, CriterionValue, Direction, SchattenP};
use crate::error::{Error, Result};
use crate::matrix::{svd, DenseMatrix};

/// Largest column count [`select_exact`] accepts without `allow_large`.
pub const MAX_EXACT_COLUMNS: usize = 30;

/// Absolute slack used when comparing an optimum against a threshold.
pub const DECISION_SLACK: f64 = 1e-9;

/// Relative margin a candidate must beat the incumbent by to replace it.
/// Anything closer counts as a tie and the earlier subset is kept.
const TIE_MARGIN: f64 = 1e-12;

const CHUNK_LEN: u64 = 2048;

/// Strictly increasing column indices of a parent matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColumnSubset {
    indices: Vec<usize>,
}

impl ColumnSubset {
    /// Sorts `indices` and checks they are distinct, non-empty and below
    /// `parent_cols`.
    pub fn new(mut indices: Vec<usize>, parent_cols: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidInput("column subset is empty".into()));
        }
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput(format!(
                "column subset {indices:?} has repeated indices"
            )));
        }
        if let Some(&last) = indices.last() {
            if last >= parent_cols {
                return Err(Error::InvalidInput(format!(
                    "column index {last} out of range for {parent_cols} columns"
                )));
            }
        }
        Ok(Self { indices })
    }

    fn from_sorted(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        Self { indices }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn extract(&self, a: &DenseMatrix) -> DenseMatrix {
        a.select_columns(&self.indices)
    }
}

impl fmt::Display for ColumnSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.indices.iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exact,
    GreedyFrobenius,
    GreedyForward,
    LocalSwap,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::GreedyFrobenius => "greedy-frobenius",
            Method::GreedyForward => "greedy",
            Method::LocalSwap => "local-swap",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct SelectionResult {
    pub subset: ColumnSubset,
    pub value: CriterionValue,
    pub method: Method,
    pub subsets_evaluated: u64,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactOptions {
    pub threads: usize,
    pub allow_large: bool,
}

impl Default for ExactOptions {
    fn default() -> Self {
        Self {
            threads: 1,
            allow_large: false,
        }
    }
}

impl ExactOptions {
    pub fn with_threads(threads: usize) -> Self {
        Self {
            threads,
            ..Self::default()
        }
    }
}

/// Criterion value of the columns `indices` of `a`, or `None` when the
/// criterion is undefined there (rank deficiency, zero columns).
pub fn evaluate_subset(
    a: &DenseMatrix,
    indices: &[usize],
    criterion: &CriterionSpec,
) -> Option<f64> {
    let c = a.select_columns(indices);
    if criterion.is_residual() {
        return criterion.evaluate_in(a, &c).ok();
    }
    let s = svd(&c).ok()?;
    criterion.evaluate_with_svd(&c, &s, Some(a)).ok()
}

fn improves(direction: Direction, candidate: f64, incumbent: f64) -> bool {
    let margin = TIE_MARGIN * incumbent.abs();
    match direction {
        Direction::Maximize => candidate - incumbent > margin,
        Direction::Minimize => incumbent - candidate > margin,
    }
}

/// `C(n, k)`, saturating at `u64::MAX`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// The `rank`-th `k`-combination of `0..n` in lexicographic order.
pub fn unrank_combination(mut rank: u64, n: usize, k: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut next = 0;
    for slot in 0..k {
        let remaining = k - slot - 1;
        loop {
            let count = binomial(n - next - 1, remaining);
            if rank < count {
                break;
            }
            rank -= count;
            next += 1;
        }
        out.push(next);
        next += 1;
    }
    out
}

/// Advances `combo` to its lexicographic successor; false after the last.
pub fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

struct ChunkBest {
    best: Option<(f64, Vec<usize>)>,
    visited: u64,
}

fn scan_chunk(
    a: &DenseMatrix,
    k: usize,
    criterion: &CriterionSpec,
    start: u64,
    len: u64,
) -> ChunkBest {
    let n = a.cols();
    let direction = criterion.direction();
    let mut combo = unrank_combination(start, n, k);
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut visited = 0;
    loop {
        visited += 1;
        if let Some(v) = evaluate_subset(a, &combo, criterion) {
            let better = match &best {
                None => true,
                Some((incumbent, _)) => improves(direction, v, *incumbent),
            };
            if better {
                best = Some((v, combo.clone()));
            }
        }
        if visited == len || !next_combination(&mut combo, n) {
            break;
        }
    }
    ChunkBest { best, visited }
}

fn check_k(a: &DenseMatrix, k: usize) -> Result<()> {
    if k == 0 || k > a.cols() {
        return Err(Error::InvalidParameter(format!(
            "subset size k = {k} must lie in 1..={}",
            a.cols()
        )));
    }
    Ok(())
}

pub fn select_exact(
    a: &DenseMatrix,
    k: usize,
    criterion: &CriterionSpec,
) -> Result<SelectionResult> {
    select_exact_with(a, k, criterion, &ExactOptions::default())
}

/// Exhaustive search over all `C(n, k)` subsets.
pub fn select_exact_with(
    a: &DenseMatrix,
    k: usize,
    criterion: &CriterionSpec,
    options: &ExactOptions,
) -> Result<SelectionResult> {
    check_k(a, k)?;
    if options.threads == 0 {
        return Err(Error::InvalidParameter("threads must be >= 1".into()));
    }
    if a.cols() > MAX_EXACT_COLUMNS && !options.allow_large {
        return Err(Error::Precondition(format!(
            "exact selection over {} columns exceeds the limit of {MAX_EXACT_COLUMNS}; \
             set allow_large to override",
            a.cols()
        )));
    }
    let started = Instant::now();
    let total = binomial(a.cols(), k);
    let chunks: Vec<(u64, u64)> = (0..total.div_ceil(CHUNK_LEN))
        .map(|c| {
            let start = c * CHUNK_LEN;
            (start, CHUNK_LEN.min(total - start))
        })
        .collect();

    let scan = |&(start, len): &(u64, u64)| scan_chunk(a, k, criterion, start, len);
    let partials: Vec<ChunkBest> = if options.threads == 1 || chunks.len() == 1 {
        chunks.iter().map(scan).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(options.threads)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("cannot build thread pool: {e}")))?;
        pool.install(|| chunks.par_iter().map(scan).collect())
    };

    let direction = criterion.direction();
    let mut visited = 0;
    let mut best: Option<(f64, Vec<usize>)> = None;
    for part in partials {
        visited += part.visited;
        if let Some((v, combo)) = part.best {
            let better = match &best {
                None => true,
                Some((incumbent, _)) => improves(direction, v, *incumbent),
            };
            if better {
                best = Some((v, combo));
            }
        }
    }
    let (value, combo) = best.ok_or_else(|| {
        Error::Infeasible(format!(
            "no {k}-column subset admits criterion {}",
            criterion.id()
        ))
    })?;
    Ok(SelectionResult {
        subset: ColumnSubset::from_sorted(combo),
        value: CriterionValue {
            value,
            criterion: *criterion,
            subset_size: k,
        },
        method: Method::Exact,
        subsets_evaluated: visited,
        elapsed: started.elapsed(),
    })
}

/// Frobenius-norm minimization: the `k` columns of smallest two-norm, ties
/// going to the smaller index. Optimal because `‖C‖_F²` is the sum of the
/// squared column norms.
pub fn select_greedy_frobenius(a: &DenseMatrix, k: usize) -> Result<SelectionResult> {
    check_k(a, k)?;
    let started = Instant::now();
    let norms = a.column_norms();
    let mut order: Vec<usize> = (0..a.cols()).collect();
    order.sort_by(|&x, &y| norms[x].total_cmp(&norms[y]).then(x.cmp(&y)));
    let mut chosen = order[..k].to_vec();
    chosen.sort_unstable();
    let subset = ColumnSubset::from_sorted(chosen);
    let value = subset.extract(a).frobenius_norm();
    Ok(SelectionResult {
        subset,
        value: CriterionValue {
            value,
            criterion: CriterionSpec::with_p(CriterionKind::Norm, SchattenP::Finite(2.0)),
            subset_size: k,
        },
        method: Method::GreedyFrobenius,
        subsets_evaluated: a.cols() as u64,
        elapsed: started.elapsed(),
    })
}

/// Forward greedy: grow the subset one column at a time, each time adding
/// the column that gives the best criterion value for the enlarged subset.
pub fn select_greedy_forward(
    a: &DenseMatrix,
    k: usize,
    criterion: &CriterionSpec,
) -> Result<SelectionResult> {
    check_k(a, k)?;
    let started = Instant::now();
    let direction = criterion.direction();
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    let mut evaluated = 0;
    let mut value = f64::NAN;
    for step in 0..k {
        let mut best: Option<(f64, usize)> = None;
        for j in (0..a.cols()).filter(|j| !chosen.contains(j)) {
            let mut trial = chosen.clone();
            trial.push(j);
            trial.sort_unstable();
            evaluated += 1;
            let Some(v) = evaluate_subset(a, &trial, criterion) else {
                continue;
            };
            if best.is_none_or(|(incumbent, _)| improves(direction, v, incumbent)) {
                best = Some((v, j));
            }
        }
        let (v, j) = best.ok_or_else(|| {
            Error::Infeasible(format!(
                "no admissible extension at step {} for {}",
                step + 1,
                criterion.id()
            ))
        })?;
        chosen.push(j);
        chosen.sort_unstable();
        value = v;
    }
    Ok(SelectionResult {
        subset: ColumnSubset::from_sorted(chosen),
        value: CriterionValue {
            value,
            criterion: *criterion,
            subset_size: k,
        },
        method: Method::GreedyForward,
        subsets_evaluated: evaluated,
        elapsed: started.elapsed(),
    })
}

/// Pairwise-swap volume maximization from a seeded random full-rank start.
/// Each sweep applies the single best one-in/one-out exchange and stops once
/// no exchange improves the volume by more than a relative `1e-12`.
pub fn select_local_swap_volume(
    a: &DenseMatrix,
    k: usize,
    seed: u64,
    max_sweeps: usize,
) -> Result<SelectionResult> {
    check_k(a, k)?;
    let started = Instant::now();
    let n = a.cols();
    let criterion = CriterionSpec::simple(CriterionKind::Volume);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut evaluated = 0;

    let mut start = None;
    for _ in 0..n * k {
        let mut combo = sample(&mut rng, n, k).into_vec();
        combo.sort_unstable();
        evaluated += 1;
        match evaluate_subset(a, &combo, &criterion) {
            Some(v) if v > 0.0 => {
                start = Some((v, combo));
                break;
            }
            _ => {}
        }
    }
    let (mut value, mut current) = start.ok_or_else(|| {
        Error::Infeasible(format!(
            "no full-rank {k}-column start found after {} draws",
            n * k
        ))
    })?;

    for _ in 0..max_sweeps {
        let mut best: Option<(f64, Vec<usize>)> = None;
        for pos in 0..k {
            for j in (0..n).filter(|j| !current.contains(j)) {
                let mut trial = current.clone();
                trial[pos] = j;
                trial.sort_unstable();
                evaluated += 1;
                let Some(v) = evaluate_subset(a, &trial, &criterion) else {
                    continue;
                };
                if best.as_ref().is_none_or(|(b, _)| v > *b) {
                    best = Some((v, trial));
                }
            }
        }
        match best {
            Some((v, trial)) if v > value * (1.0 + TIE_MARGIN) => {
                value = v;
                current = trial;
            }
            _ => break,
        }
    }
    Ok(SelectionResult {
        subset: ColumnSubset::from_sorted(current),
        value: CriterionValue {
            value,
            criterion,
            subset_size: k,
        },
        method: Method::LocalSwap,
        subsets_evaluated: evaluated,
        elapsed: started.elapsed(),
    })
}

/// "Is there a `k`-column submatrix whose criterion value reaches `b`?"
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionQuery {
    pub criterion: CriterionSpec,
    pub k: usize,
    pub b: f64,
}

impl DecisionQuery {
    pub fn new(criterion: CriterionSpec, k: usize, b: f64) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "threshold b must be positive and finite, got {b}"
            )));
        }
        Ok(Self { criterion, k, b })
    }

    /// The query at the orthonormal optimum, `b = optimal_unit_value(k)`.
    pub fn at_optimum(criterion: CriterionSpec, k: usize) -> Result<Self> {
        let b = criterion.optimal_unit_value(k).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "{} has no optimal unit-column value",
                criterion.id()
            ))
        })?;
        Self::new(criterion, k, b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub answer: bool,
    /// Optimal subset, present when the answer is yes.
    pub witness: Option<ColumnSubset>,
    /// Exact optimum over all `k`-subsets.
    pub optimum: f64,
}

pub fn decide(a: &DenseMatrix, query: &DecisionQuery) -> Result<Decision> {
    decide_with(a, query, &ExactOptions::default())
}

pub fn decide_with(
    a: &DenseMatrix,
    query: &DecisionQuery,
    options: &ExactOptions,
) -> Result<Decision> {
    if query.criterion.optimal_unit_value(query.k) == Some(query.b) && !a.has_unit_columns(1e-12) {
        log::warn!(
            "threshold {} is the unit-column optimum of {} but the matrix has non-unit columns",
            query.b,
            query.criterion.id()
        );
    }
    let best = select_exact_with(a, query.k, &query.criterion, options)?;
    let answer = query
        .criterion
        .direction()
        .reaches(best.value.value, query.b, DECISION_SLACK);
    Ok(Decision {
        answer,
        witness: answer.then_some(best.subset),
        optimum: best.value.value,
    })
}
