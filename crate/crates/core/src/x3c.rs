//! Exact cover by 3-sets: instances, an exact solver, the reduction to a
//! unit-column matrix, and the checks that tie subset selection optima on
//! that matrix back to the solvability of the instance.
//!
//! Elements are numbered `1..=3M`. Column `j` of the reduction matrix has
//! the entry `1/√3` in row `i − 1` for every element `i` of set `j`, so any
//! `M` columns are orthonormal exactly when the corresponding sets are an
//! exact cover.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::criteria::{CriterionKind, CriterionSpec, Direction, SchattenP};
use crate::error::{Error, Result};
use crate::matrix::{svd, DenseMatrix};
use crate::selectors::{
    decide_with, select_exact_with, ColumnSubset, DecisionQuery, ExactOptions, DECISION_SLACK,
};

/// `1/√3` rounded once to the nearest double. Every reduction and gadget
/// entry uses this exact bit pattern.
pub const INV_SQRT3: f64 = 0.577_350_269_189_625_764_509_148_780_502;

/// Largest `M` for which falseness is certified by exhaustive search.
pub const MAX_CERTIFIED_M: usize = 5;

/// Draw budget of [`generate_false`].
pub const FALSE_DRAW_BUDGET: usize = 10_000;

pub type Triple = [usize; 3];

/// Ground set `{1, …, 3M}` and a collection of distinct 3-element subsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct X3CInstance {
    m: usize,
    sets: Vec<Triple>,
}

impl X3CInstance {
    pub fn new(m: usize, sets: Vec<Triple>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput("X3C needs M >= 1".into()));
        }
        if sets.is_empty() {
            return Err(Error::InvalidInput("X3C instance has no sets".into()));
        }
        let ground = 3 * m;
        let mut seen = HashSet::with_capacity(sets.len());
        let mut normalized = Vec::with_capacity(sets.len());
        for (idx, set) in sets.into_iter().enumerate() {
            let mut t = set;
            t.sort_unstable();
            if t[0] == t[1] || t[1] == t[2] {
                return Err(Error::InvalidInput(format!(
                    "set {idx} {set:?} has repeated elements"
                )));
            }
            if t[0] < 1 || t[2] > ground {
                return Err(Error::InvalidInput(format!(
                    "set {idx} {set:?} leaves the ground set 1..={ground}"
                )));
            }
            if !seen.insert(t) {
                return Err(Error::InvalidInput(format!(
                    "set {idx} {t:?} is a duplicate"
                )));
            }
            normalized.push(t);
        }
        Ok(Self {
            m,
            sets: normalized,
        })
    }

    /// Number of triples a cover needs; the ground set has `3M` elements.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn sets(&self) -> &[Triple] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Whether `indices` select `M` pairwise disjoint sets covering everything.
    pub fn is_cover(&self, indices: &[usize]) -> bool {
        if indices.len() != self.m {
            return false;
        }
        let mut covered = vec![false; 3 * self.m + 1];
        for &i in indices {
            let Some(set) = self.sets.get(i) else {
                return false;
            };
            for &e in set {
                if covered[e] {
                    return false;
                }
                covered[e] = true;
            }
        }
        covered[1..].iter().all(|&c| c)
    }
}

/// `"M n"` on the first line, then one line of three elements per set.
impl fmt::Display for X3CInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.m, self.sets.len())?;
        for [a, b, c] in &self.sets {
            writeln!(f, "{a} {b} {c}")?;
        }
        Ok(())
    }
}

impl FromStr for X3CInstance {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let parse_ints = |lineno: usize, line: &str| -> Result<Vec<usize>> {
            line.split_whitespace()
                .map(|tok| {
                    tok.parse::<usize>().map_err(|_| {
                        Error::InvalidInput(format!("line {lineno}: bad integer {tok:?}"))
                    })
                })
                .collect()
        };
        let (lineno, header) = lines
            .next()
            .ok_or_else(|| Error::InvalidInput("empty X3C instance".into()))?;
        let header = parse_ints(lineno, header)?;
        let [m, n] = header[..] else {
            return Err(Error::InvalidInput(format!(
                "line {lineno}: header must be \"M n\""
            )));
        };
        let mut sets = Vec::with_capacity(n);
        for (lineno, line) in lines {
            let vals = parse_ints(lineno, line)?;
            let [a, b, c] = vals[..] else {
                return Err(Error::InvalidInput(format!(
                    "line {lineno}: expected three elements, got {}",
                    vals.len()
                )));
            };
            sets.push([a, b, c]);
        }
        if sets.len() != n {
            return Err(Error::InvalidInput(format!(
                "header announces {n} sets but {} follow",
                sets.len()
            )));
        }
        X3CInstance::new(m, sets)
    }
}

fn triple_capacity(m: usize) -> u64 {
    crate::selectors::binomial(3 * m, 3)
}

fn random_triple(rng: &mut ChaCha8Rng, ground: usize) -> Triple {
    let v = sample(rng, ground, 3).into_vec();
    let mut t = [v[0] + 1, v[1] + 1, v[2] + 1];
    t.sort_unstable();
    t
}

fn all_triples(ground: usize) -> Vec<Triple> {
    let mut out = Vec::new();
    for a in 1..=ground {
        for b in a + 1..=ground {
            for c in b + 1..=ground {
                out.push([a, b, c]);
            }
        }
    }
    out
}

/// `count` distinct triples not in `taken`, drawn uniformly.
fn draw_distinct(
    rng: &mut ChaCha8Rng,
    ground: usize,
    count: usize,
    taken: &mut HashSet<Triple>,
) -> Vec<Triple> {
    let capacity = triple_capacity(ground / 3) as usize;
    let mut out = Vec::with_capacity(count);
    if 2 * (count + taken.len()) > capacity {
        let mut pool: Vec<Triple> = all_triples(ground)
            .into_iter()
            .filter(|t| !taken.contains(t))
            .collect();
        pool.shuffle(rng);
        pool.truncate(count);
        taken.extend(pool.iter().copied());
        return pool;
    }
    while out.len() < count {
        let t = random_triple(rng, ground);
        if taken.insert(t) {
            out.push(t);
        }
    }
    out
}

/// Plants a random exact cover and adds `extra_sets` distinct random
/// triples, then shuffles the set order.
pub fn generate_true(m: usize, extra_sets: usize, seed: u64) -> Result<X3CInstance> {
    if m == 0 {
        return Err(Error::InvalidParameter("M must be >= 1".into()));
    }
    let ground = 3 * m;
    if (m + extra_sets) as u64 > triple_capacity(m) {
        return Err(Error::Capacity(format!(
            "{} sets requested but only {} distinct triples exist over {ground} elements",
            m + extra_sets,
            triple_capacity(m)
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut elements: Vec<usize> = (1..=ground).collect();
    elements.shuffle(&mut rng);
    let mut sets: Vec<Triple> = elements
        .chunks_exact(3)
        .map(|c| {
            let mut t = [c[0], c[1], c[2]];
            t.sort_unstable();
            t
        })
        .collect();
    let mut taken: HashSet<Triple> = sets.iter().copied().collect();
    sets.extend(draw_distinct(&mut rng, ground, extra_sets, &mut taken));
    sets.shuffle(&mut rng);
    let inst = X3CInstance::new(m, sets)?;
    if m <= 6 && solve_exact(&inst).is_none() {
        return Err(Error::GenerationFailed(
            "planted instance unexpectedly has no cover".into(),
        ));
    }
    Ok(inst)
}

/// Rejection-samples `n` distinct triples until the exact solver certifies
/// that no cover exists.
pub fn generate_false(m: usize, n: usize, seed: u64) -> Result<X3CInstance> {
    if !(2..=MAX_CERTIFIED_M).contains(&m) {
        return Err(Error::InvalidParameter(format!(
            "certified-false generation needs 2 <= M <= {MAX_CERTIFIED_M}, got {m}"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "need n >= 2 sets, got {n}"
        )));
    }
    if n as u64 > triple_capacity(m) {
        return Err(Error::Capacity(format!(
            "{n} sets requested but only {} distinct triples exist",
            triple_capacity(m)
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..FALSE_DRAW_BUDGET {
        let mut taken = HashSet::new();
        let sets = draw_distinct(&mut rng, 3 * m, n, &mut taken);
        let inst = X3CInstance::new(m, sets)?;
        if solve_exact(&inst).is_none() {
            return Ok(inst);
        }
    }
    Err(Error::GenerationFailed(format!(
        "no cover-free instance with M = {m}, n = {n} in {FALSE_DRAW_BUDGET} draws"
    )))
}

/// Backtracking exact cover: always branch on the lowest uncovered element.
/// Returns the cover's set indices in increasing order.
pub fn solve_exact(inst: &X3CInstance) -> Option<Vec<usize>> {
    let ground = 3 * inst.m;
    let mut containing: Vec<Vec<usize>> = vec![Vec::new(); ground + 1];
    for (j, set) in inst.sets.iter().enumerate() {
        for &e in set {
            containing[e].push(j);
        }
    }
    let mut covered = vec![false; ground + 1];
    let mut chosen = Vec::with_capacity(inst.m);
    if search(inst, &containing, &mut covered, &mut chosen) {
        chosen.sort_unstable();
        Some(chosen)
    } else {
        None
    }
}

fn search(
    inst: &X3CInstance,
    containing: &[Vec<usize>],
    covered: &mut [bool],
    chosen: &mut Vec<usize>,
) -> bool {
    let Some(first) = (1..covered.len()).find(|&e| !covered[e]) else {
        return true;
    };
    for &j in &containing[first] {
        let set = inst.sets[j];
        if set.iter().any(|&e| covered[e]) {
            continue;
        }
        for &e in &set {
            covered[e] = true;
        }
        chosen.push(j);
        if search(inst, containing, covered, chosen) {
            return true;
        }
        chosen.pop();
        for &e in &set {
            covered[e] = false;
        }
    }
    false
}

/// The `3M × n` reduction matrix with the instance it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionMatrix {
    pub matrix: DenseMatrix,
    pub source: X3CInstance,
}

pub fn reduce(inst: &X3CInstance) -> ReductionMatrix {
    let rows = 3 * inst.m;
    let cols = inst.sets.len();
    let mut data = vec![0.0; rows * cols];
    for (j, set) in inst.sets.iter().enumerate() {
        for &e in set {
            data[(e - 1) * cols + j] = INV_SQRT3;
        }
    }
    ReductionMatrix {
        matrix: DenseMatrix::new(rows, cols, data).expect("valid reduction shape"),
        source: inst.clone(),
    }
}

/// Two reduction columns whose sets share `shared` elements, restricted to
/// the rows they touch: `5 × 2` for one shared element, `4 × 2` for two.
pub fn gadget(shared: usize) -> Result<DenseMatrix> {
    let s = INV_SQRT3;
    match shared {
        1 => DenseMatrix::from_columns(&[[s, s, s, 0.0, 0.0], [0.0, 0.0, s, s, s]]),
        2 => DenseMatrix::from_columns(&[[s, s, s, 0.0], [0.0, s, s, s]]),
        other => Err(Error::InvalidParameter(format!(
            "gadget overlap must be 1 or 2, got {other}"
        ))),
    }
}

/// One criterion's answer on the reduction matrix at `b = optimal value`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceRow {
    pub criterion: CriterionSpec,
    pub answer: bool,
    pub optimum: Option<f64>,
    pub agrees: bool,
}

/// Runs every registry criterion's decision problem on the reduction of
/// `inst` with `k = M` and compares it with the exact solver.
pub fn equivalence_rows(inst: &X3CInstance, options: &ExactOptions) -> Result<Vec<EquivalenceRow>> {
    if inst.m > MAX_CERTIFIED_M || inst.len() > 14 {
        return Err(Error::Precondition(format!(
            "equivalence check is limited to M <= {MAX_CERTIFIED_M} and n <= 14, got M = {}, n = {}",
            inst.m,
            inst.len()
        )));
    }
    let solvable = solve_exact(inst).is_some();
    let reduction = reduce(inst);
    let k = inst.m;
    CriterionSpec::registry()
        .into_iter()
        .map(|criterion| {
            let (answer, optimum) = if k > inst.len() {
                (false, None)
            } else {
                let query = DecisionQuery::at_optimum(criterion, k)?;
                match decide_with(&reduction.matrix, &query, options) {
                    Ok(d) => (d.answer, Some(d.optimum)),
                    Err(Error::Infeasible(_)) => (false, None),
                    Err(e) => return Err(e),
                }
            };
            Ok(EquivalenceRow {
                criterion,
                answer,
                optimum,
                agrees: answer == solvable,
            })
        })
        .collect()
}

/// True iff every registry criterion answers "yes" exactly when the
/// instance has an exact cover.
pub fn verify_equivalence(inst: &X3CInstance) -> Result<bool> {
    Ok(equivalence_rows(inst, &ExactOptions::default())?
        .iter()
        .all(|r| r.agrees))
}

/// Exact optimum of one criterion on a cover-free reduction against the
/// inapproximability threshold for that criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub criterion: CriterionSpec,
    pub exact_optimum: f64,
    pub threshold: f64,
    /// A second, weaker published value for the same threshold, if any.
    pub alternate_threshold: Option<f64>,
    pub gap_holds: bool,
    pub witness: ColumnSubset,
}

/// Thresholds for `k = M` columns of a cover-free reduction: maximized
/// criteria stay at or below, minimized ones at or above.
pub fn gap_thresholds(k: usize) -> Vec<(CriterionSpec, f64, Option<f64>)> {
    use CriterionKind::*;
    let kf = k as f64;
    let two_sqrt2_3 = 2.0 * 2f64.sqrt() / 3.0;
    let excess = (1.0 + 1.0 / (4.0 * kf)).sqrt();
    let fin = SchattenP::Finite;
    let mut rows = vec![
        (
            CriterionSpec::simple(RelativeVolume),
            std::f64::consts::FRAC_1_SQRT_2,
            None,
        ),
        (CriterionSpec::simple(Volume), two_sqrt2_3, None),
        (
            CriterionSpec::simple(SOptimality),
            two_sqrt2_3.powf(1.0 / kf),
            None,
        ),
        (
            CriterionSpec::with_p(Norm, SchattenP::Infinity),
            2.0 * INV_SQRT3,
            None,
        ),
        (
            CriterionSpec::with_p(PinvNorm, SchattenP::Infinity),
            1.5f64.sqrt(),
            Some(2.0 * INV_SQRT3),
        ),
        (
            CriterionSpec::with_p(PinvNorm, fin(2.0)),
            (kf + 0.25).sqrt(),
            None,
        ),
    ];
    for p in [3.0, 4.0] {
        rows.push((
            CriterionSpec::with_p(PinvNorm, fin(p)),
            kf.powf(1.0 / p) * excess,
            None,
        ));
    }
    rows.extend([
        (CriterionSpec::simple(CondTwo), 2f64.sqrt(), None),
        (CriterionSpec::simple(CondFrobenius), kf * excess, None),
        (CriterionSpec::simple(CondMixed), (1.5 * kf).sqrt(), None),
        (CriterionSpec::simple(StableRank), 0.75 * kf, None),
    ]);
    rows
}

/// Checks every threshold on a certified cover-free instance.
pub fn gap_report(inst: &X3CInstance, options: &ExactOptions) -> Result<Vec<GapReport>> {
    if solve_exact(inst).is_some() {
        return Err(Error::Precondition(
            "gap report needs a cover-free instance, but this one has an exact cover".into(),
        ));
    }
    let reduction = reduce(inst);
    let k = inst.m;
    let rank = svd(&reduction.matrix)?.numerical_rank;
    if rank < k || inst.len() < k {
        return Err(Error::Precondition(format!(
            "reduction matrix has rank {rank} < M = {k}"
        )));
    }
    gap_thresholds(k)
        .into_iter()
        .map(|(criterion, threshold, alternate_threshold)| {
            let best = select_exact_with(&reduction.matrix, k, &criterion, options)?;
            let value = best.value.value;
            let gap_holds = match criterion.direction() {
                Direction::Maximize => value <= threshold + DECISION_SLACK,
                Direction::Minimize => value >= threshold - DECISION_SLACK,
            };
            Ok(GapReport {
                criterion,
                exact_optimum: value,
                threshold,
                alternate_threshold,
                gap_holds,
                witness: best.subset,
            })
        })
        .collect()
}
