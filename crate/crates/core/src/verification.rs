//! Randomized checks of the optimal-value inequalities, column-removal
//! monotonicity, singular value interlacing and the partitioned
//! pseudo-inverse identities.
//!
//! Each check belongs to one lemma id. [`run_suite`] draws matrices from
//! four families (unit columns, orthonormal, perturbed orthonormal and
//! random partitions) with a seeded generator and returns one
//! [`LemmaReport`] per id, sorted by id.
//!
//! Tolerances are absolute for quantities of order one and relative to the
//! bound for the pseudo-inverse norms of random partitions, which grow with
//! the conditioning of the draw.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::criteria::{
    condition_number, pinv_schatten_norm, relative_volume, s_optimality, schatten_norm,
    stable_rank, volume, ConditionKind, SchattenP,
};
use crate::error::{Error, Result};
use crate::matrix::{partitioned_pinv, pseudo_inverse, svd, DenseMatrix};
use crate::selectors::{binomial, next_combination};

/// Slack on every optimal-value inequality.
pub const INEQUALITY_TOL: f64 = 1e-10;
/// Orthonormality defect below which the optimum must be attained...
pub const ORTHO_DEFECT_TOL: f64 = 1e-8;
/// ...to within this distance.
pub const ATTAIN_TOL: f64 = 1e-6;
/// Distance from the optimum that counts as "attained" in the converse...
pub const NEAR_OPTIMUM_TOL: f64 = 1e-10;
/// ...which must force the defect below this.
pub const CONVERSE_DEFECT_TOL: f64 = 1e-4;
/// Tolerance of the Frobenius and arithmetic/geometric mean identities.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Tolerance of the partition bounds and the reconstruction.
pub const PARTITION_TOL: f64 = 1e-9;
/// Cap on the number of submatrices checked per removal size.
pub const MAX_REMOVAL_SAMPLES: u64 = 1000;

/// Every lemma id [`run_suite`] reports on.
pub const LEMMA_IDS: [&str; 17] = [
    "e_inter",
    "e_mean",
    "e_sc",
    "e_srk",
    "l_cond",
    "l_fi",
    "l_inter",
    "l_inter2",
    "l_norm",
    "l_pi0",
    "l_pi1",
    "l_pi1_pow",
    "l_pinv",
    "l_srank",
    "l_vol",
    "lem:orth",
    "r_schattenp",
];

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaReport {
    pub lemma_id: String,
    pub trials: usize,
    /// Number of individual checks that exceeded their tolerance.
    pub failures: usize,
    /// Largest normalized violation seen, zero when every check held exactly.
    pub worst_violation: f64,
    pub seed: u64,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Draws per family.
    pub trials: usize,
    pub rows: (usize, usize),
    pub cols: (usize, usize),
    /// Schatten parameters above 2 used by the norm and partition checks.
    pub p_values: Vec<f64>,
    /// Schatten parameters in `[1, 2)` for the upper-bound check.
    pub low_p_values: Vec<f64>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 200,
            rows: (2, 8),
            cols: (1, 6),
            p_values: vec![3.0, 4.0, 6.0],
            low_p_values: vec![1.0, 1.5],
        }
    }
}

#[derive(Default)]
struct Tally {
    trials: usize,
    failures: usize,
    worst: f64,
}

struct Recorder {
    tallies: BTreeMap<&'static str, Tally>,
}

impl Recorder {
    fn new() -> Self {
        let tallies = LEMMA_IDS.iter().map(|&id| (id, Tally::default())).collect();
        Self { tallies }
    }

    fn trial(&mut self, id: &'static str) {
        self.tallies.get_mut(id).expect("known lemma id").trials += 1;
    }

    /// Records a check whose normalized violation is `excess` (positive when
    /// the statement is violated) against `tol`.
    fn check(&mut self, id: &'static str, excess: f64, tol: f64) {
        let t = self.tallies.get_mut(id).expect("known lemma id");
        let excess = if excess.is_nan() {
            f64::INFINITY
        } else {
            excess
        };
        if excess > tol {
            t.failures += 1;
        }
        t.worst = t.worst.max(excess.max(0.0));
    }

    /// `lhs ≤ rhs`.
    fn le(&mut self, id: &'static str, lhs: f64, rhs: f64, tol: f64) {
        self.check(id, lhs - rhs, tol);
    }

    /// `lhs ≤ rhs` with the violation measured relative to `max(1, |rhs|)`.
    fn le_rel(&mut self, id: &'static str, lhs: f64, rhs: f64, tol: f64) {
        self.check(id, (lhs - rhs) / rhs.abs().max(1.0), tol);
    }

    fn into_reports(self, seed: u64) -> Vec<LemmaReport> {
        self.tallies
            .into_iter()
            .map(|(id, t)| LemmaReport {
                lemma_id: id.to_string(),
                trials: t.trials,
                failures: t.failures,
                worst_violation: t.worst,
                seed,
            })
            .collect()
    }
}

pub fn random_gaussian(rng: &mut impl Rng, rows: usize, cols: usize) -> DenseMatrix {
    let data = (0..rows * cols)
        .map(|_| rng.sample(StandardNormal))
        .collect();
    DenseMatrix::new(rows, cols, data).expect("finite Gaussian draws")
}

/// Gaussian matrix with columns scaled to unit two-norm.
pub fn random_unit_columns(rng: &mut impl Rng, rows: usize, cols: usize) -> DenseMatrix {
    loop {
        if let Ok(m) = random_gaussian(rng, rows, cols).normalize_columns() {
            return m;
        }
    }
}

/// Thin `Q` factor of a Gaussian matrix, `cols ≤ rows`.
pub fn random_orthonormal(rng: &mut impl Rng, rows: usize, cols: usize) -> DenseMatrix {
    assert!(cols <= rows, "orthonormal columns need cols <= rows");
    let g = random_gaussian(rng, rows, cols).to_nalgebra();
    let q = g.qr().q();
    DenseMatrix::from_nalgebra(&q.columns(0, cols).into_owned())
}

/// `Q + ε·G` with `‖G‖_F = 1`, columns rescaled to unit norm.
pub fn perturbed_orthonormal(
    rng: &mut impl Rng,
    rows: usize,
    cols: usize,
    eps: f64,
) -> DenseMatrix {
    let q = random_orthonormal(rng, rows, cols);
    let g = random_gaussian(rng, rows, cols);
    let g = g.scale(1.0 / g.frobenius_norm());
    q.add(&g.scale(eps))
        .and_then(|m| m.normalize_columns())
        .expect("small perturbation keeps columns nonzero")
}

fn draw_size(rng: &mut impl Rng, range: (usize, usize)) -> usize {
    rng.random_range(range.0..=range.1.max(range.0))
}

/// The values of every unit-column criterion the lemmas speak about, with
/// the optimum each one attains on orthonormal columns.
fn unit_column_values(c: &DenseMatrix, cfg: &SuiteConfig) -> Result<Vec<(&'static str, f64, f64)>> {
    let k = c.cols() as f64;
    let mut out = vec![
        ("l_vol", volume(c)?, 1.0),
        ("l_vol", s_optimality(c)?, 1.0),
        ("lem:orth", relative_volume(c)?, 1.0),
        ("l_norm", schatten_norm(c, SchattenP::Infinity)?, 1.0),
        ("l_pinv", pinv_schatten_norm(c, SchattenP::Infinity)?, 1.0),
        (
            "l_pinv",
            pinv_schatten_norm(c, SchattenP::Finite(2.0))?,
            k.sqrt(),
        ),
        ("l_cond", condition_number(c, ConditionKind::Two)?, 1.0),
        ("l_cond", condition_number(c, ConditionKind::Frobenius)?, k),
        (
            "l_cond",
            condition_number(c, ConditionKind::Mixed)?,
            k.sqrt(),
        ),
        ("l_srank", stable_rank(c, 2.0)?, k),
    ];
    for &p in &cfg.p_values {
        let sp = SchattenP::new(p)?;
        out.push(("l_norm", schatten_norm(c, sp)?, k.powf(1.0 / p)));
        out.push(("l_pinv", pinv_schatten_norm(c, sp)?, k.powf(1.0 / p)));
        out.push((
            "l_cond",
            condition_number(c, ConditionKind::Schatten(sp))?,
            k.powf(2.0 / p),
        ));
        out.push((
            "l_cond",
            condition_number(c, ConditionKind::MixedSchatten(sp))?,
            k.powf(1.0 / p),
        ));
        out.push(("l_srank", stable_rank(c, p)?, k));
    }
    Ok(out)
}

/// Upper bounds (maximized criteria) versus lower bounds.
fn is_upper_bound(id: &str) -> bool {
    matches!(id, "l_vol" | "lem:orth" | "l_srank")
}

fn check_unit_column_inequalities(
    rec: &mut Recorder,
    c: &DenseMatrix,
    cfg: &SuiteConfig,
) -> Result<()> {
    let k = c.cols() as f64;
    for (id, value, optimum) in unit_column_values(c, cfg)? {
        if is_upper_bound(id) {
            rec.le(id, value, optimum, INEQUALITY_TOL);
        } else {
            rec.le(id, optimum, value, INEQUALITY_TOL);
        }
    }
    // 0 < rvol.
    rec.check("lem:orth", -relative_volume(c)?, 0.0);

    for &p in &cfg.low_p_values {
        let norm = schatten_norm(c, SchattenP::new(p)?)?;
        rec.le("r_schattenp", k.sqrt(), norm, INEQUALITY_TOL);
        rec.le("r_schattenp", norm, k.powf(1.0 / p), INEQUALITY_TOL);
    }

    let fro = schatten_norm(c, SchattenP::Finite(2.0))?;
    rec.check("e_srk", (fro * fro - k).abs(), IDENTITY_TOL);
    rec.le(
        "e_mean",
        volume(c)?.powf(2.0 / k),
        fro * fro / k,
        IDENTITY_TOL,
    );
    Ok(())
}

/// Defect small ⇒ every criterion within [`ATTAIN_TOL`] of its optimum.
fn check_attained(rec: &mut Recorder, c: &DenseMatrix, cfg: &SuiteConfig) -> Result<()> {
    let defect = c.orthonormality_defect();
    if defect > ORTHO_DEFECT_TOL {
        return Ok(());
    }
    for (id, value, optimum) in unit_column_values(c, cfg)? {
        rec.check(id, (value - optimum).abs(), ATTAIN_TOL);
    }
    Ok(())
}

/// Criterion within [`NEAR_OPTIMUM_TOL`] of its optimum ⇒ small defect.
fn check_converse(rec: &mut Recorder, c: &DenseMatrix, cfg: &SuiteConfig) -> Result<()> {
    let defect = c.orthonormality_defect();
    for (id, value, optimum) in unit_column_values(c, cfg)? {
        if (value - optimum).abs() <= NEAR_OPTIMUM_TOL {
            rec.check(id, defect - CONVERSE_DEFECT_TOL, 0.0);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Default)]
struct RemovalOutcome {
    /// Largest `rvol(C) − rvol(C_ℓ)`.
    rvol_excess: f64,
    /// Largest `κ(C_ℓ) − κ(C)` relative to `max(1, κ(C))`.
    cond_excess: f64,
}

fn condition_kinds() -> Vec<ConditionKind> {
    let mut kinds = vec![
        ConditionKind::Two,
        ConditionKind::Frobenius,
        ConditionKind::Mixed,
    ];
    for p in [3.0, 4.0] {
        kinds.push(ConditionKind::Schatten(SchattenP::Finite(p)));
        kinds.push(ConditionKind::MixedSchatten(SchattenP::Finite(p)));
    }
    kinds
}

fn removal_outcome(c: &DenseMatrix, ell: usize, seed: u64) -> Result<RemovalOutcome> {
    let k = c.cols();
    if ell == 0 || ell >= k {
        return Err(Error::InvalidParameter(format!(
            "submatrix size must satisfy 1 <= ell < k = {k}, got {ell}"
        )));
    }
    let parent_rvol = relative_volume(c)?;
    let kinds = condition_kinds();
    let parent_cond: Vec<f64> = kinds
        .iter()
        .map(|&kind| condition_number(c, kind))
        .collect::<Result<_>>()?;

    let subsets: Vec<Vec<usize>> = if binomial(k, ell) <= MAX_REMOVAL_SAMPLES {
        let mut combo: Vec<usize> = (0..ell).collect();
        let mut all = vec![combo.clone()];
        while next_combination(&mut combo, k) {
            all.push(combo.clone());
        }
        all
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..MAX_REMOVAL_SAMPLES)
            .map(|_| {
                let mut s = sample(&mut rng, k, ell).into_vec();
                s.sort_unstable();
                s
            })
            .collect()
    };

    let mut out = RemovalOutcome {
        rvol_excess: f64::NEG_INFINITY,
        cond_excess: f64::NEG_INFINITY,
    };
    for idx in subsets {
        let sub = c.select_columns(&idx);
        out.rvol_excess = out.rvol_excess.max(parent_rvol - relative_volume(&sub)?);
        for (&kind, &parent) in kinds.iter().zip(&parent_cond) {
            let child = condition_number(&sub, kind)?;
            out.cond_excess = out.cond_excess.max((child - parent) / parent.max(1.0));
        }
    }
    Ok(out)
}

/// True when every `ell`-column submatrix of `c` has relative volume at
/// least that of `c` and every condition number at most that of `c`, up to
/// `1e-10`. All submatrices are checked when there are at most 1000 of
/// them, otherwise 1000 drawn with a fixed seed.
pub fn check_removal_monotonicity(c: &DenseMatrix, ell: usize) -> Result<bool> {
    check_removal_monotonicity_seeded(c, ell, 0)
}

pub fn check_removal_monotonicity_seeded(c: &DenseMatrix, ell: usize, seed: u64) -> Result<bool> {
    let r = removal_outcome(c, ell, seed)?;
    Ok(r.rvol_excess <= INEQUALITY_TOL && r.cond_excess <= INEQUALITY_TOL)
}

/// `σ_{min(m,n)−k+j}(A) ≤ σ_j(C) ≤ σ_j(A)` for a `k`-column submatrix.
fn check_interlacing(rec: &mut Recorder, a: &DenseMatrix, idx: &[usize]) -> Result<()> {
    let sa = svd(a)?;
    let sc = svd(&a.select_columns(idx))?;
    let base = a.rows().min(a.cols()) - idx.len();
    for j in 1..=idx.len() {
        rec.le("e_inter", sc.sigma(j), sa.sigma(j), INEQUALITY_TOL);
        rec.le("e_inter", sa.sigma(base + j), sc.sigma(j), INEQUALITY_TOL);
    }
    Ok(())
}

fn pinv_norm_sq(m: &DenseMatrix, p: SchattenP) -> Result<f64> {
    Ok(pinv_schatten_norm(m, p)?.powi(2))
}

fn check_partition(
    rec: &mut Recorder,
    c: &DenseMatrix,
    split: usize,
    cfg: &SuiteConfig,
) -> Result<()> {
    let n = c.cols();
    let left: Vec<usize> = (0..split).collect();
    let right: Vec<usize> = (split..n).collect();
    let c1 = c.select_columns(&left);
    let c2 = c.select_columns(&right);

    let pp = partitioned_pinv(&c1, &c2)?;
    let direct = pseudo_inverse(c, None)?;
    let scale = direct.max_abs().max(1.0);
    rec.check(
        "l_pi0",
        pp.stacked().sub(&direct)?.max_abs() / scale,
        PARTITION_TOL,
    );
    let m1 = crate::matrix::complement_projector(&c2)?.matmul(&c1)?;
    let schur_gap = pp.schur1.sub(&m1.gram())?.max_abs() / pp.schur1.max_abs().max(1.0);
    rec.check("l_pi0", schur_gap, PARTITION_TOL);

    let fro = SchattenP::Finite(2.0);
    let whole = pinv_norm_sq(c, fro)?;
    let parts = pinv_norm_sq(&c1, fro)? + pinv_norm_sq(&c2, fro)?;
    rec.le_rel("l_fi", parts, whole, PARTITION_TOL);

    for &p in &cfg.p_values {
        let sp = SchattenP::new(p)?;
        let whole = pinv_norm_sq(c, sp)?;
        let parts = pinv_norm_sq(&c1, sp)? + pinv_norm_sq(&c2, sp)?;
        rec.le_rel("l_pi1", parts, whole, PARTITION_TOL);

        let whole = pinv_schatten_norm(c, sp)?.powf(p);
        let parts = pinv_schatten_norm(&c1, sp)?.powf(p) + pinv_schatten_norm(&c2, sp)?.powf(p);
        rec.le_rel("l_pi1_pow", parts, whole, PARTITION_TOL);
    }

    // vol([C₁ c])² = det(C₁ᵀC₁)·‖P c‖² with c the first column of C₂.
    let last = c2.select_columns(&[0]);
    let joined = c1.hconcat(&last)?;
    let lhs = volume(&joined)?.powi(2);
    let det = c1.gram().to_nalgebra().determinant();
    let projected = crate::matrix::complement_projector(&c1)?.matmul(&last)?;
    let rhs = det * projected.frobenius_norm().powi(2);
    rec.check(
        "e_sc",
        (lhs - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE),
        PARTITION_TOL,
    );
    Ok(())
}

/// Runs every lemma check on `cfg.trials` draws from each family.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Vec<LemmaReport>> {
    if cfg.trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    if cfg.rows.0 < 2 || cfg.cols.0 < 1 || cfg.rows.0 > cfg.rows.1 || cfg.cols.0 > cfg.cols.1 {
        return Err(Error::InvalidParameter(format!(
            "bad size ranges rows {:?}, cols {:?}",
            cfg.rows, cfg.cols
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rec = Recorder::new();
    let unit_ids = [
        "l_vol",
        "lem:orth",
        "l_norm",
        "r_schattenp",
        "l_pinv",
        "l_cond",
        "l_srank",
        "e_srk",
        "e_mean",
    ];

    // (a) unit columns.
    for _ in 0..cfg.trials {
        let m = draw_size(&mut rng, cfg.rows);
        let k = draw_size(&mut rng, cfg.cols).min(m);
        let c = random_unit_columns(&mut rng, m, k);
        for id in unit_ids {
            rec.trial(id);
        }
        check_unit_column_inequalities(&mut rec, &c, cfg)?;
        check_converse(&mut rec, &c, cfg)?;

        if k >= 2 {
            rec.trial("l_inter");
            rec.trial("l_inter2");
            let ell = rng.random_range(1..k);
            let r = removal_outcome(&c, ell, rng.random())?;
            rec.check("l_inter", r.rvol_excess, INEQUALITY_TOL);
            rec.check("l_inter2", r.cond_excess, INEQUALITY_TOL);
        }

        // Interlacing on a tall parent.
        let n = draw_size(&mut rng, (cfg.cols.0.max(1), cfg.cols.1 + 2)).min(m);
        let a = random_gaussian(&mut rng, m, n);
        let kk = rng.random_range(1..=n);
        let mut idx = sample(&mut rng, n, kk).into_vec();
        idx.sort_unstable();
        rec.trial("e_inter");
        check_interlacing(&mut rec, &a, &idx)?;
    }

    // (b) orthonormal columns: every optimum attained.
    for _ in 0..cfg.trials {
        let m = draw_size(&mut rng, cfg.rows);
        let k = draw_size(&mut rng, cfg.cols).min(m);
        let q = random_orthonormal(&mut rng, m, k);
        for id in unit_ids {
            rec.trial(id);
        }
        check_unit_column_inequalities(&mut rec, &q, cfg)?;
        check_attained(&mut rec, &q, cfg)?;
        check_converse(&mut rec, &q, cfg)?;
        if k >= 2 {
            rec.trial("l_inter");
            rec.trial("l_inter2");
            let r = removal_outcome(&q, rng.random_range(1..k), rng.random())?;
            rec.check("l_inter", r.rvol_excess, INEQUALITY_TOL);
            rec.check("l_inter2", r.cond_excess, INEQUALITY_TOL);
        }
    }

    // (c) perturbed orthonormal columns.
    for t in 0..cfg.trials {
        let m = draw_size(&mut rng, cfg.rows);
        let k = draw_size(&mut rng, cfg.cols).min(m);
        let eps = if t % 2 == 0 { 1e-6 } else { 1e-3 };
        let c = perturbed_orthonormal(&mut rng, m, k, eps);
        for id in unit_ids {
            rec.trial(id);
        }
        check_unit_column_inequalities(&mut rec, &c, cfg)?;
        check_attained(&mut rec, &c, cfg)?;
        check_converse(&mut rec, &c, cfg)?;
    }

    // (d) random full-column-rank partitions.
    let mut drawn = 0;
    while drawn < cfg.trials {
        let m = draw_size(&mut rng, cfg.rows);
        let n = draw_size(&mut rng, (2, cfg.cols.1.max(2))).min(m);
        if n < 2 {
            continue;
        }
        let c = random_gaussian(&mut rng, m, n);
        let s = svd(&c)?;
        if s.numerical_rank < n || s.largest() / s.sigma(n) > 1e6 {
            continue;
        }
        let split = rng.random_range(1..n);
        for id in ["l_pi0", "l_fi", "l_pi1", "l_pi1_pow", "e_sc"] {
            rec.trial(id);
        }
        check_partition(&mut rec, &c, split, cfg)?;
        // lem:orth's inequality holds for any full-rank matrix.
        rec.trial("lem:orth");
        let rv = relative_volume(&c)?;
        rec.check("lem:orth", -rv, 0.0);
        rec.le("lem:orth", rv, 1.0, INEQUALITY_TOL);
        drawn += 1;
    }

    Ok(rec.into_reports(cfg.seed))
}

/// One line per lemma: `lemma=<id> trials=<n> failures=<n>
/// worst_violation=<x> seed=<s> status=<pass|FAIL>`.
pub fn format_reports(reports: &[LemmaReport]) -> String {
    let mut out = String::new();
    for r in reports {
        let _ = writeln!(
            out,
            "lemma={} trials={} failures={} worst_violation={:.16e} seed={} status={}",
            r.lemma_id,
            r.trials,
            r.failures,
            r.worst_violation,
            r.seed,
            if r.passed() { "pass" } else { "FAIL" }
        );
    }
    out
}
