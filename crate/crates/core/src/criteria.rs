//! Subset selection criteria and the registry that records, for each one,
//! whether it is maximized or minimized and which value `k` orthonormal
//! columns attain.
//!
//! All evaluators work from the singular values of the submatrix `C`, so a
//! single SVD per candidate subset serves every criterion.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matrix::{pseudo_inverse, svd, DenseMatrix, SvdResult};

/// Schatten parameter `p ≥ 1`, with `∞` meaning the two-norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SchattenP {
    Finite(f64),
    Infinity,
}

impl SchattenP {
    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(SchattenP::Infinity)
        } else if p.is_finite() && p >= 1.0 {
            Ok(SchattenP::Finite(p))
        } else {
            Err(Error::InvalidParameter(format!(
                "Schatten parameter must be >= 1 or inf, got {p}"
            )))
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            SchattenP::Finite(p) => p,
            SchattenP::Infinity => f64::INFINITY,
        }
    }

    /// `k^{1/p}`, which is 1 for `p = ∞`.
    pub fn root_of(self, k: usize) -> f64 {
        match self {
            SchattenP::Finite(p) => (k as f64).powf(1.0 / p),
            SchattenP::Infinity => 1.0,
        }
    }
}

impl fmt::Display for SchattenP {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchattenP::Infinity => write!(f, "inf"),
            SchattenP::Finite(p) if p.fract() == 0.0 && *p < 1e15 => write!(f, "{}", *p as i64),
            SchattenP::Finite(p) => write!(f, "{p}"),
        }
    }
}

impl FromStr for SchattenP {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(SchattenP::Infinity),
            other => {
                let p: f64 = other.parse().map_err(|_| {
                    Error::InvalidParameter(format!("cannot parse Schatten parameter {other:?}"))
                })?;
                SchattenP::new(p)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CriterionKind {
    Volume,
    RelativeVolume,
    SOptimality,
    Norm,
    PinvNorm,
    CondTwo,
    CondFrobenius,
    CondSchatten,
    CondMixed,
    CondMixedSchatten,
    StableRank,
    ResidualTwo,
    ResidualFrobenius,
}

impl CriterionKind {
    fn name(self) -> &'static str {
        match self {
            CriterionKind::Volume => "volume",
            CriterionKind::RelativeVolume => "rvol",
            CriterionKind::SOptimality => "sopt",
            CriterionKind::Norm => "norm",
            CriterionKind::PinvNorm => "pinv-norm",
            CriterionKind::CondTwo => "cond-two",
            CriterionKind::CondFrobenius => "cond-frobenius",
            CriterionKind::CondSchatten => "cond-schatten",
            CriterionKind::CondMixed => "cond-mixed",
            CriterionKind::CondMixedSchatten => "cond-mixed-schatten",
            CriterionKind::StableRank => "srank",
            CriterionKind::ResidualTwo => "residual-two",
            CriterionKind::ResidualFrobenius => "residual-frobenius",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "volume" | "vol" => CriterionKind::Volume,
            "rvol" | "relative-volume" => CriterionKind::RelativeVolume,
            "sopt" | "s-optimality" => CriterionKind::SOptimality,
            "norm" => CriterionKind::Norm,
            "pinv-norm" => CriterionKind::PinvNorm,
            "cond-two" => CriterionKind::CondTwo,
            "cond-frobenius" => CriterionKind::CondFrobenius,
            "cond-schatten" => CriterionKind::CondSchatten,
            "cond-mixed" => CriterionKind::CondMixed,
            "cond-mixed-schatten" => CriterionKind::CondMixedSchatten,
            "srank" | "stable-rank" => CriterionKind::StableRank,
            "residual-two" => CriterionKind::ResidualTwo,
            "residual-frobenius" => CriterionKind::ResidualFrobenius,
            _ => return None,
        })
    }

    fn takes_p(self) -> bool {
        matches!(
            self,
            CriterionKind::Norm
                | CriterionKind::PinvNorm
                | CriterionKind::CondSchatten
                | CriterionKind::CondMixedSchatten
                | CriterionKind::StableRank
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Maximize,
    Minimize,
}

impl Direction {
    /// True when `candidate` is strictly better than `incumbent`.
    pub fn prefers(self, candidate: f64, incumbent: f64) -> bool {
        match self {
            Direction::Maximize => candidate > incumbent,
            Direction::Minimize => candidate < incumbent,
        }
    }

    /// True when `value` reaches the threshold `b` in this direction,
    /// allowing an absolute `slack`.
    pub fn reaches(self, value: f64, b: f64, slack: f64) -> bool {
        match self {
            Direction::Maximize => value >= b - slack,
            Direction::Minimize => value <= b + slack,
        }
    }
}

/// Which condition number to compute.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConditionKind {
    /// `σ₁/σ_k`
    Two,
    /// `‖C‖_F‖C†‖_F`
    Frobenius,
    /// `‖C‖_(p)‖C†‖_(p)`
    Schatten(SchattenP),
    /// `‖C‖_F‖C†‖₂`
    Mixed,
    /// `‖C‖_(p)‖C†‖₂`
    MixedSchatten(SchattenP),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualNorm {
    Two,
    Frobenius,
}

/// A criterion together with its Schatten parameter, where it has one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriterionSpec {
    kind: CriterionKind,
    p: Option<SchattenP>,
}

impl CriterionSpec {
    /// Validates the kind/parameter combination. Stable rank defaults to
    /// `p = 2`; the other parameterized kinds require `p`.
    pub fn new(kind: CriterionKind, p: Option<SchattenP>) -> Result<Self> {
        let p = match (kind, p) {
            (CriterionKind::StableRank, None) => Some(SchattenP::Finite(2.0)),
            (CriterionKind::StableRank, Some(SchattenP::Finite(v))) if v >= 2.0 => p,
            (CriterionKind::StableRank, Some(other)) => {
                return Err(Error::InvalidParameter(format!(
                    "stable rank needs finite p >= 2, got {other}"
                )))
            }
            (k, None) if k.takes_p() => {
                return Err(Error::InvalidParameter(format!(
                    "criterion {} needs a Schatten parameter p",
                    k.name()
                )))
            }
            (k, Some(_)) if !k.takes_p() => {
                return Err(Error::InvalidParameter(format!(
                    "criterion {} takes no Schatten parameter",
                    k.name()
                )))
            }
            (_, p) => p,
        };
        Ok(Self { kind, p })
    }

    /// Shorthand for kinds without a parameter. Panics if the kind needs one.
    pub fn simple(kind: CriterionKind) -> Self {
        Self::new(kind, None).expect("criterion kind takes no parameter")
    }

    /// Shorthand for parameterized kinds. Panics on an invalid combination.
    pub fn with_p(kind: CriterionKind, p: SchattenP) -> Self {
        Self::new(kind, Some(p)).expect("valid criterion/parameter combination")
    }

    pub fn kind(&self) -> CriterionKind {
        self.kind
    }

    pub fn p(&self) -> Option<SchattenP> {
        self.p
    }

    pub fn direction(&self) -> Direction {
        match self.kind {
            CriterionKind::Volume
            | CriterionKind::RelativeVolume
            | CriterionKind::SOptimality
            | CriterionKind::StableRank => Direction::Maximize,
            _ => Direction::Minimize,
        }
    }

    /// Criteria that are undefined for rank-deficient `C`. Exhaustive
    /// selection skips such subsets for these.
    pub fn requires_full_rank(&self) -> bool {
        matches!(
            self.kind,
            CriterionKind::RelativeVolume
                | CriterionKind::SOptimality
                | CriterionKind::PinvNorm
                | CriterionKind::CondTwo
                | CriterionKind::CondFrobenius
                | CriterionKind::CondSchatten
                | CriterionKind::CondMixed
                | CriterionKind::CondMixedSchatten
        )
    }

    pub fn is_residual(&self) -> bool {
        matches!(
            self.kind,
            CriterionKind::ResidualTwo | CriterionKind::ResidualFrobenius
        )
    }

    /// Value attained by `k` orthonormal columns, which is the optimum over
    /// all `m × k` matrices with unit columns. `None` for the residuals.
    pub fn optimal_unit_value(&self, k: usize) -> Option<f64> {
        let kf = k as f64;
        let p = self.p;
        Some(match self.kind {
            CriterionKind::Volume
            | CriterionKind::RelativeVolume
            | CriterionKind::SOptimality
            | CriterionKind::CondTwo => 1.0,
            CriterionKind::Norm | CriterionKind::PinvNorm | CriterionKind::CondMixedSchatten => {
                p?.root_of(k)
            }
            CriterionKind::CondMixed => kf.sqrt(),
            CriterionKind::CondFrobenius => kf,
            CriterionKind::CondSchatten => p?.root_of(k).powi(2),
            CriterionKind::StableRank => kf,
            CriterionKind::ResidualTwo | CriterionKind::ResidualFrobenius => return None,
        })
    }

    /// True when reaching [`optimal_unit_value`](Self::optimal_unit_value)
    /// on unit columns forces orthonormality. Fails for the residuals and
    /// for Schatten norms with `p ≤ 2` (the Frobenius norm is constant on
    /// unit columns, and below 2 the orthonormal value is an upper bound).
    pub fn characterizes_orthonormality(&self) -> bool {
        match self.kind {
            CriterionKind::ResidualTwo | CriterionKind::ResidualFrobenius => false,
            CriterionKind::Norm => {
                matches!(self.p, Some(SchattenP::Infinity))
                    || matches!(self.p, Some(SchattenP::Finite(p)) if p > 2.0)
            }
            _ => true,
        }
    }

    /// Stable lowercase identifier, e.g. `rvol`, `cond-two`, `pinv-norm:p=4`.
    pub fn id(&self) -> String {
        match (self.kind, self.p) {
            (CriterionKind::StableRank, Some(SchattenP::Finite(2.0))) => "srank".to_string(),
            (kind, Some(p)) => format!("{}:p={p}", kind.name()),
            (kind, None) => kind.name().to_string(),
        }
    }

    /// Criteria whose decision problem at `b = optimal_unit_value(k)` on a
    /// unit-column matrix is equivalent to the existence of `k`
    /// orthonormal columns.
    pub fn registry() -> Vec<CriterionSpec> {
        use CriterionKind::*;
        let p = |v: f64| SchattenP::Finite(v);
        vec![
            Self::simple(Volume),
            Self::simple(RelativeVolume),
            Self::simple(SOptimality),
            Self::with_p(Norm, SchattenP::Infinity),
            Self::with_p(Norm, p(3.0)),
            Self::with_p(Norm, p(4.0)),
            Self::with_p(PinvNorm, SchattenP::Infinity),
            Self::with_p(PinvNorm, p(2.0)),
            Self::with_p(PinvNorm, p(3.0)),
            Self::with_p(PinvNorm, p(4.0)),
            Self::simple(CondTwo),
            Self::simple(CondFrobenius),
            Self::with_p(CondSchatten, p(3.0)),
            Self::with_p(CondSchatten, p(4.0)),
            Self::simple(CondMixed),
            Self::with_p(CondMixedSchatten, p(3.0)),
            Self::with_p(CondMixedSchatten, p(4.0)),
            Self::simple(StableRank),
            Self::with_p(StableRank, p(3.0)),
            Self::with_p(StableRank, p(4.0)),
        ]
    }

    /// Evaluates a non-residual criterion on `c`.
    pub fn evaluate(&self, c: &DenseMatrix) -> Result<f64> {
        if self.is_residual() {
            return Err(Error::InvalidParameter(format!(
                "{} needs the parent matrix; use evaluate_in",
                self.id()
            )));
        }
        let s = svd(c)?;
        self.evaluate_with_svd(c, &s, None)
    }

    /// Evaluates any criterion on `c`, a column submatrix of `parent`.
    pub fn evaluate_in(&self, parent: &DenseMatrix, c: &DenseMatrix) -> Result<f64> {
        if self.is_residual() {
            let norm = if self.kind == CriterionKind::ResidualTwo {
                ResidualNorm::Two
            } else {
                ResidualNorm::Frobenius
            };
            return residual(parent, c, norm);
        }
        self.evaluate(c)
    }

    /// Evaluation from precomputed singular values of `c`.
    pub(crate) fn evaluate_with_svd(
        &self,
        c: &DenseMatrix,
        s: &SvdResult,
        parent: Option<&DenseMatrix>,
    ) -> Result<f64> {
        let k = c.cols();
        if self.requires_full_rank() {
            full_rank(s, k)?;
        }
        let sigma = &s.singular_values;
        let p = self.p;
        match self.kind {
            CriterionKind::Volume => Ok(volume_from(s, k)),
            CriterionKind::RelativeVolume => Ok(rvol_from(sigma, k)),
            CriterionKind::SOptimality => sopt_from(c, s),
            CriterionKind::Norm => Ok(schatten_from(sigma, p.expect("validated"))),
            CriterionKind::PinvNorm => Ok(pinv_schatten_from(&sigma[..k], p.expect("validated"))),
            CriterionKind::CondTwo => Ok(condition_from(&sigma[..k], ConditionKind::Two)),
            CriterionKind::CondFrobenius => {
                Ok(condition_from(&sigma[..k], ConditionKind::Frobenius))
            }
            CriterionKind::CondSchatten => Ok(condition_from(
                &sigma[..k],
                ConditionKind::Schatten(p.expect("validated")),
            )),
            CriterionKind::CondMixed => Ok(condition_from(&sigma[..k], ConditionKind::Mixed)),
            CriterionKind::CondMixedSchatten => Ok(condition_from(
                &sigma[..k],
                ConditionKind::MixedSchatten(p.expect("validated")),
            )),
            CriterionKind::StableRank => {
                Ok(stable_rank_from(sigma, p.expect("validated").as_f64()))
            }
            CriterionKind::ResidualTwo | CriterionKind::ResidualFrobenius => {
                let parent = parent.ok_or_else(|| {
                    Error::InvalidParameter(format!("{} needs the parent matrix", self.id()))
                })?;
                self.evaluate_in(parent, c)
            }
        }
    }
}

impl fmt::Display for CriterionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl FromStr for CriterionSpec {
    type Err = Error;

    /// Parses `name` or `name:p=<p>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, p) = match s.split_once(':') {
            Some((name, rest)) => {
                let value = rest.strip_prefix("p=").ok_or_else(|| {
                    Error::InvalidParameter(format!("expected ':p=<value>' in {s:?}"))
                })?;
                (name, Some(value.parse::<SchattenP>()?))
            }
            None => (s, None),
        };
        let kind = CriterionKind::from_name(name)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown criterion {name:?}")))?;
        CriterionSpec::new(kind, p)
    }
}

/// A criterion value together with what produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionValue {
    pub value: f64,
    pub criterion: CriterionSpec,
    pub subset_size: usize,
}

fn full_rank(s: &SvdResult, k: usize) -> Result<()> {
    if s.numerical_rank < k {
        Err(Error::RankDeficient {
            rank: s.numerical_rank,
            required: k,
        })
    } else {
        Ok(())
    }
}

fn volume_from(s: &SvdResult, k: usize) -> f64 {
    if s.numerical_rank < k {
        0.0
    } else {
        s.singular_values[..k].iter().product()
    }
}

fn rvol_from(sigma: &[f64], k: usize) -> f64 {
    let top = sigma[0];
    sigma[..k].iter().map(|s| s / top).product()
}

fn sopt_from(c: &DenseMatrix, s: &SvdResult) -> Result<f64> {
    let k = c.cols();
    let norms = c.column_norms();
    if let Some(j) = norms.iter().position(|&n| n == 0.0) {
        return Err(Error::InvalidInput(format!("column {j} is zero")));
    }
    full_rank(s, k)?;
    // Pair σ_j with column norms to keep the ratio near one.
    let ratio: f64 = s.singular_values[..k]
        .iter()
        .zip(&norms)
        .map(|(sig, n)| sig / n)
        .product();
    Ok(ratio.powf(1.0 / k as f64))
}

fn schatten_from(sigma: &[f64], p: SchattenP) -> f64 {
    let top = sigma.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0.0;
    }
    match p {
        SchattenP::Infinity => top,
        SchattenP::Finite(p) => {
            top * sigma
                .iter()
                .map(|s| (s / top).powf(p))
                .sum::<f64>()
                .powf(1.0 / p)
        }
    }
}

/// `‖C†‖_(p)` from the leading `k` singular values, all positive.
fn pinv_schatten_from(sigma: &[f64], p: SchattenP) -> f64 {
    let smallest = *sigma.last().expect("k >= 1");
    match p {
        SchattenP::Infinity => 1.0 / smallest,
        SchattenP::Finite(p) => {
            let sum: f64 = sigma.iter().map(|s| (smallest / s).powf(p)).sum();
            sum.powf(1.0 / p) / smallest
        }
    }
}

fn condition_from(sigma: &[f64], kind: ConditionKind) -> f64 {
    let fro = SchattenP::Finite(2.0);
    match kind {
        ConditionKind::Two => sigma[0] / sigma[sigma.len() - 1],
        ConditionKind::Frobenius => schatten_from(sigma, fro) * pinv_schatten_from(sigma, fro),
        ConditionKind::Schatten(p) => schatten_from(sigma, p) * pinv_schatten_from(sigma, p),
        ConditionKind::Mixed => {
            schatten_from(sigma, fro) * pinv_schatten_from(sigma, SchattenP::Infinity)
        }
        ConditionKind::MixedSchatten(p) => {
            schatten_from(sigma, p) * pinv_schatten_from(sigma, SchattenP::Infinity)
        }
    }
}

fn stable_rank_from(sigma: &[f64], p: f64) -> f64 {
    let top = sigma.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0.0;
    }
    sigma.iter().map(|s| (s / top).powf(p)).sum()
}

/// `vol(C) = σ₁⋯σ_k`, zero when `C` is numerically rank deficient.
pub fn volume(c: &DenseMatrix) -> Result<f64> {
    Ok(volume_from(&svd(c)?, c.cols()))
}

/// `rvol(C) = ∏ σ_j/σ₁`.
pub fn relative_volume(c: &DenseMatrix) -> Result<f64> {
    let s = svd(c)?;
    full_rank(&s, c.cols())?;
    Ok(rvol_from(&s.singular_values, c.cols()))
}

/// `(vol(C)/∏‖Ceᵢ‖₂)^{1/k}`.
pub fn s_optimality(c: &DenseMatrix) -> Result<f64> {
    sopt_from(c, &svd(c)?)
}

pub fn schatten_norm(c: &DenseMatrix, p: SchattenP) -> Result<f64> {
    Ok(schatten_from(&svd(c)?.singular_values, p))
}

/// Schatten norm of the pseudo-inverse, `(Σ σ_j^{−p})^{1/p}`.
pub fn pinv_schatten_norm(c: &DenseMatrix, p: SchattenP) -> Result<f64> {
    let s = svd(c)?;
    full_rank(&s, c.cols())?;
    Ok(pinv_schatten_from(&s.singular_values[..c.cols()], p))
}

pub fn condition_number(c: &DenseMatrix, kind: ConditionKind) -> Result<f64> {
    let s = svd(c)?;
    full_rank(&s, c.cols())?;
    Ok(condition_from(&s.singular_values[..c.cols()], kind))
}

/// `‖C‖_(p)^p/‖C‖₂^p` for `p ≥ 2`; zero for the zero matrix.
pub fn stable_rank(c: &DenseMatrix, p: f64) -> Result<f64> {
    if !(p >= 2.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "stable rank needs finite p >= 2, got {p}"
        )));
    }
    Ok(stable_rank_from(&svd(c)?.singular_values, p))
}

/// `‖(I − CC†)A‖` in the two- or Frobenius norm.
pub fn residual(a: &DenseMatrix, c: &DenseMatrix, norm: ResidualNorm) -> Result<f64> {
    if a.rows() != c.rows() {
        return Err(Error::Shape(format!(
            "A has {} rows but C has {}",
            a.rows(),
            c.rows()
        )));
    }
    let coeffs = pseudo_inverse(c, None)?.matmul(a)?;
    let r = a.sub(&c.matmul(&coeffs)?)?;
    Ok(match norm {
        ResidualNorm::Frobenius => r.frobenius_norm(),
        ResidualNorm::Two => svd(&r)?.largest(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const INV_SQRT3: f64 = 0.577_350_269_189_625_8;

    fn aux1() -> DenseMatrix {
        let s = INV_SQRT3;
        DenseMatrix::from_columns(&[[s, s, s, 0.0, 0.0], [0.0, 0.0, s, s, s]]).unwrap()
    }

    fn aux2() -> DenseMatrix {
        let s = INV_SQRT3;
        DenseMatrix::from_columns(&[[s, s, s, 0.0], [0.0, s, s, s]]).unwrap()
    }

    fn orthonormal_3x2() -> DenseMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        DenseMatrix::from_columns(&[[h, h, 0.0], [h, -h, 0.0]]).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn volume_examples() {
        close(volume(&orthonormal_3x2()).unwrap(), 1.0, 1e-15);
        close(volume(&aux1()).unwrap(), 2.0 * 2f64.sqrt() / 3.0, 1e-12);
        close(
            volume(&DenseMatrix::diag(&[2.0, 3.0]).unwrap()).unwrap(),
            6.0,
            1e-14,
        );
        let dup = DenseMatrix::from_columns(&[[1.0, 0.0], [1.0, 0.0]]).unwrap();
        assert_eq!(volume(&dup).unwrap(), 0.0);
    }

    #[test]
    fn relative_volume_examples() {
        let col = DenseMatrix::from_columns(&[[3.0, -4.0, 1.0]]).unwrap();
        close(relative_volume(&col).unwrap(), 1.0, 0.0);
        close(
            relative_volume(&aux1()).unwrap(),
            std::f64::consts::FRAC_1_SQRT_2,
            1e-12,
        );
        close(relative_volume(&aux2()).unwrap(), 1.0 / 5f64.sqrt(), 1e-12);
        let dup = DenseMatrix::from_columns(&[[1.0, 0.0], [1.0, 0.0]]).unwrap();
        assert!(matches!(
            relative_volume(&dup),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn s_optimality_examples() {
        close(s_optimality(&orthonormal_3x2()).unwrap(), 1.0, 1e-15);
        close(
            s_optimality(&aux1()).unwrap(),
            (2.0 * 2f64.sqrt() / 3.0).sqrt(),
            1e-12,
        );
        close(
            s_optimality(&DenseMatrix::diag(&[2.0, 3.0]).unwrap()).unwrap(),
            1.0,
            1e-15,
        );
        let zero_col = DenseMatrix::from_columns(&[[1.0, 0.0], [0.0, 0.0]]).unwrap();
        assert!(matches!(
            s_optimality(&zero_col),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn schatten_norm_examples() {
        let i3 = DenseMatrix::identity(3).unwrap();
        close(
            schatten_norm(&i3, SchattenP::Finite(3.0)).unwrap(),
            3f64.powf(1.0 / 3.0),
            1e-15,
        );
        close(
            schatten_norm(&aux1(), SchattenP::Infinity).unwrap(),
            2.0 / 3f64.sqrt(),
            1e-12,
        );
        let d = DenseMatrix::diag(&[2.0, 1.0]).unwrap();
        close(
            schatten_norm(&d, SchattenP::Finite(4.0)).unwrap(),
            17f64.powf(0.25),
            1e-14,
        );
        let m = aux2();
        close(
            schatten_norm(&m, SchattenP::Finite(2.0)).unwrap(),
            m.frobenius_norm(),
            1e-12,
        );
        assert!(SchattenP::new(0.5).is_err());
        assert!("0.9".parse::<SchattenP>().is_err());
    }

    #[test]
    fn pinv_norm_examples() {
        let q = DenseMatrix::from_columns(&[[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]]).unwrap();
        close(
            pinv_schatten_norm(&q, SchattenP::Finite(2.0)).unwrap(),
            2f64.sqrt(),
            1e-15,
        );
        close(
            pinv_schatten_norm(&aux1(), SchattenP::Infinity).unwrap(),
            1.5f64.sqrt(),
            1e-12,
        );
        close(
            pinv_schatten_norm(&aux1(), SchattenP::Finite(2.0)).unwrap(),
            1.5,
            1e-12,
        );
    }

    #[test]
    fn condition_number_examples() {
        close(
            condition_number(&orthonormal_3x2(), ConditionKind::Two).unwrap(),
            1.0,
            1e-15,
        );
        close(
            condition_number(&aux1(), ConditionKind::Two).unwrap(),
            2f64.sqrt(),
            1e-12,
        );
        let d = DenseMatrix::diag(&[2.0, 1.0]).unwrap();
        close(
            condition_number(&d, ConditionKind::Frobenius).unwrap(),
            2.5,
            1e-14,
        );
        close(
            condition_number(&d, ConditionKind::Mixed).unwrap(),
            5f64.sqrt(),
            1e-14,
        );
        let dup = DenseMatrix::from_columns(&[[1.0, 0.0], [1.0, 0.0]]).unwrap();
        assert!(condition_number(&dup, ConditionKind::Two).is_err());
    }

    #[test]
    fn stable_rank_examples() {
        assert_eq!(
            stable_rank(&DenseMatrix::zeros(3, 2).unwrap(), 2.0).unwrap(),
            0.0
        );
        close(
            stable_rank(&DenseMatrix::identity(4).unwrap(), 2.0).unwrap(),
            4.0,
            1e-15,
        );
        close(stable_rank(&aux1(), 2.0).unwrap(), 1.5, 1e-12);
        assert!(stable_rank(&aux1(), 1.5).is_err());
    }

    #[test]
    fn residual_examples() {
        let a = DenseMatrix::from_rows(&[[1.0, 2.0], [0.5, -1.0], [3.0, 0.0]]).unwrap();
        close(residual(&a, &a, ResidualNorm::Two).unwrap(), 0.0, 1e-14);
        let i3 = DenseMatrix::identity(3).unwrap();
        let c = i3.select_columns(&[0]);
        close(
            residual(&i3, &c, ResidualNorm::Frobenius).unwrap(),
            2f64.sqrt(),
            1e-15,
        );
        close(residual(&i3, &c, ResidualNorm::Two).unwrap(), 1.0, 1e-15);
        let short = DenseMatrix::identity(2).unwrap();
        assert!(matches!(
            residual(&i3, &short, ResidualNorm::Two),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn residual_matches_explicit_projector() {
        let a = DenseMatrix::from_rows(&[
            [1.0, 0.3, -0.2, 2.0],
            [0.4, 1.0, 0.0, -1.0],
            [0.0, -0.5, 1.5, 0.1],
            [2.0, 0.2, 0.2, 0.0],
            [-1.0, 0.0, 0.7, 0.3],
        ])
        .unwrap();
        let c = a.select_columns(&[1, 3]);
        let p = crate::matrix::complement_projector(&c).unwrap();
        let projected = p.matmul(&a).unwrap();
        close(
            residual(&a, &c, ResidualNorm::Frobenius).unwrap(),
            projected.frobenius_norm(),
            1e-12,
        );
        close(
            residual(&a, &c, ResidualNorm::Two).unwrap(),
            svd(&projected).unwrap().largest(),
            1e-12,
        );
    }

    #[test]
    fn ids_round_trip() {
        for spec in CriterionSpec::registry() {
            let parsed: CriterionSpec = spec.id().parse().unwrap();
            assert_eq!(parsed, spec);
        }
        assert_eq!(
            "pinv-norm:p=4".parse::<CriterionSpec>().unwrap().id(),
            "pinv-norm:p=4"
        );
        assert_eq!("srank:p=2".parse::<CriterionSpec>().unwrap().id(), "srank");
        assert_eq!(
            "norm:p=inf".parse::<CriterionSpec>().unwrap().id(),
            "norm:p=inf"
        );
        assert!("bogus".parse::<CriterionSpec>().is_err());
        assert!("norm".parse::<CriterionSpec>().is_err());
        assert!("rvol:p=3".parse::<CriterionSpec>().is_err());
        assert!("srank:p=inf".parse::<CriterionSpec>().is_err());
    }

    #[test]
    fn directions_and_optimal_values() {
        use CriterionKind::*;
        for kind in [Volume, RelativeVolume, SOptimality, StableRank] {
            assert_eq!(
                CriterionSpec::new(kind, None).unwrap().direction(),
                Direction::Maximize
            );
        }
        let k = 4;
        let v = |s: &str| {
            s.parse::<CriterionSpec>()
                .unwrap()
                .optimal_unit_value(k)
                .unwrap()
        };
        close(v("volume"), 1.0, 0.0);
        close(v("norm:p=inf"), 1.0, 0.0);
        close(v("norm:p=2"), 2.0, 1e-15);
        close(v("norm:p=4"), 4f64.powf(0.25), 1e-15);
        close(v("pinv-norm:p=2"), 2.0, 1e-15);
        close(v("cond-mixed"), 2.0, 0.0);
        close(v("cond-mixed-schatten:p=3"), 4f64.powf(1.0 / 3.0), 1e-15);
        close(v("cond-frobenius"), 4.0, 0.0);
        close(v("cond-schatten:p=4"), 2.0, 1e-15);
        close(v("srank"), 4.0, 0.0);
        close(v("srank:p=3"), 4.0, 0.0);
        assert!("residual-two"
            .parse::<CriterionSpec>()
            .unwrap()
            .optimal_unit_value(k)
            .is_none());
    }

    #[test]
    fn orthonormal_columns_attain_every_optimum() {
        let q = DenseMatrix::from_columns(&[
            [0.5, 0.5, 0.5, 0.5],
            [0.5, -0.5, 0.5, -0.5],
            [0.5, 0.5, -0.5, -0.5],
        ])
        .unwrap();
        for spec in CriterionSpec::registry() {
            let got = spec.evaluate(&q).unwrap();
            close(got, spec.optimal_unit_value(3).unwrap(), 1e-12);
        }
    }

    fn unit_column_matrix() -> impl Strategy<Value = DenseMatrix> {
        (2usize..7, 1usize..5).prop_flat_map(|(m, k)| {
            let k = k.min(m);
            prop::collection::vec(-1.0f64..1.0, m * k)
                .prop_filter_map("needs nonzero columns", move |data| {
                    DenseMatrix::new(m, k, data).ok()?.normalize_columns().ok()
                })
        })
    }

    proptest! {
        #[test]
        fn unit_columns_never_beat_orthonormal(c in unit_column_matrix()) {
            let k = c.cols();
            prop_assume!(svd(&c).unwrap().numerical_rank == k);
            prop_assume!(svd(&c).unwrap().singular_values[k - 1] > 1e-6);
            for spec in CriterionSpec::registry() {
                let value = spec.evaluate(&c).unwrap();
                let opt = spec.optimal_unit_value(k).unwrap();
                prop_assert!(spec.direction().reaches(opt, value, 1e-10 * opt.max(1.0)),
                    "{} value {} beats optimum {}", spec.id(), value, opt);
            }
        }

        #[test]
        fn frobenius_norm_squared_is_k(c in unit_column_matrix()) {
            let fro = schatten_norm(&c, SchattenP::Finite(2.0)).unwrap();
            prop_assert!((fro * fro - c.cols() as f64).abs() <= 1e-12);
        }
    }
}
