//! Dense real matrices and the SVD-based kernels the criteria are built on.
//!
//! [`DenseMatrix`] is an immutable row-major value type. Every operation
//! returns a fresh matrix, so matrices can be shared freely across threads
//! during parallel subset enumeration.

use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A real `rows × cols` matrix stored row-major. Both dimensions are at
/// least one and every entry is finite.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite entry at ({}, {})",
                pos / cols,
                pos % cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from a slice of equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let ncols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * ncols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != ncols {
                return Err(Error::InvalidInput(format!(
                    "row {i} has {} entries, expected {ncols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), ncols, data)
    }

    /// Builds a matrix from a slice of equally long columns.
    pub fn from_columns<C: AsRef<[f64]>>(columns: &[C]) -> Result<Self> {
        let ncols = columns.len();
        let nrows = columns.first().map_or(0, |c| c.as_ref().len());
        if let Some(j) = columns.iter().position(|c| c.as_ref().len() != nrows) {
            return Err(Error::InvalidInput(format!(
                "column {j} has {} entries, expected {nrows}",
                columns[j].as_ref().len()
            )));
        }
        let mut data = vec![0.0; nrows * ncols];
        for (j, c) in columns.iter().enumerate() {
            for (i, &x) in c.as_ref().iter().enumerate() {
                data[i * ncols + j] = x;
            }
        }
        Self::new(nrows, ncols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        Ok(m)
    }

    /// Square diagonal matrix.
    pub fn diag(values: &[f64]) -> Result<Self> {
        let n = values.len();
        let mut data = vec![0.0; n * n];
        for (i, &v) in values.iter().enumerate() {
            data[i * n + i] = v;
        }
        Self::new(n, n, data)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Row-major entries.
    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn column_norm(&self, j: usize) -> f64 {
        (0..self.rows)
            .map(|i| self.get(i, j).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn column_norms(&self) -> Vec<f64> {
        (0..self.cols).map(|j| self.column_norm(j)).collect()
    }

    /// The submatrix made of the given columns, in the given order.
    ///
    /// Panics if an index is out of range or `indices` is empty.
    pub fn select_columns(&self, indices: &[usize]) -> DenseMatrix {
        assert!(!indices.is_empty(), "cannot select zero columns");
        let k = indices.len();
        let mut data = Vec::with_capacity(self.rows * k);
        for i in 0..self.rows {
            let row = self.row(i);
            data.extend(indices.iter().map(|&j| row[j]));
        }
        DenseMatrix {
            rows: self.rows,
            cols: k,
            data,
        }
    }

    /// Horizontal concatenation `[self other]`.
    pub fn hconcat(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.rows != other.rows {
            return Err(Error::Shape(format!(
                "cannot concatenate {} rows with {} rows",
                self.rows, other.rows
            )));
        }
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for i in 0..self.rows {
            data.extend_from_slice(self.row(i));
            data.extend_from_slice(other.row(i));
        }
        Ok(DenseMatrix {
            rows: self.rows,
            cols,
            data,
        })
    }

    /// Vertical concatenation `[self; other]`.
    pub fn vconcat(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.cols {
            return Err(Error::Shape(format!(
                "cannot stack {} columns over {} columns",
                self.cols, other.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(DenseMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            data.extend((0..self.rows).map(|i| self.get(i, j)));
        }
        DenseMatrix {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    pub fn matmul(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut data = vec![0.0; self.rows * rhs.cols];
        for i in 0..self.rows {
            let out = &mut data[i * rhs.cols..(i + 1) * rhs.cols];
            for (l, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out.iter_mut().zip(rhs.row(l)) {
                    *o += a * b;
                }
            }
        }
        Ok(DenseMatrix {
            rows: self.rows,
            cols: rhs.cols,
            data,
        })
    }

    pub fn sub(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        self.zip_with(rhs, |a, b| a - b)
    }

    pub fn add(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn scale(&self, factor: f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * factor).collect(),
        }
    }

    fn zip_with(&self, rhs: &DenseMatrix, f: impl Fn(f64, f64) -> f64) -> Result<DenseMatrix> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::Shape(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// `selfᵀ·self`.
    pub fn gram(&self) -> DenseMatrix {
        let n = self.cols;
        let mut data = vec![0.0; n * n];
        for i in 0..self.rows {
            let row = self.row(i);
            for a in 0..n {
                let ra = row[a];
                if ra == 0.0 {
                    continue;
                }
                for b in a..n {
                    data[a * n + b] += ra * row[b];
                }
            }
        }
        for a in 0..n {
            for b in 0..a {
                data[a * n + b] = data[b * n + a];
            }
        }
        DenseMatrix {
            rows: n,
            cols: n,
            data,
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows == self.cols
            && (0..self.rows)
                .all(|i| (0..i).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol))
    }

    /// `‖CᵀC − I‖_F`, zero exactly when the columns are orthonormal.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = self.gram();
        let mut acc = 0.0;
        for a in 0..self.cols {
            for b in 0..self.cols {
                let target = if a == b { 1.0 } else { 0.0 };
                acc += (g.get(a, b) - target).powi(2);
            }
        }
        acc.sqrt()
    }

    /// True when every column has two-norm within `tol` of one.
    pub fn has_unit_columns(&self, tol: f64) -> bool {
        (0..self.cols).all(|j| (self.column_norm(j) - 1.0).abs() <= tol)
    }

    /// Copy with every column scaled to unit two-norm. Zero columns are
    /// rejected.
    pub fn normalize_columns(&self) -> Result<DenseMatrix> {
        let norms = self.column_norms();
        if let Some(j) = norms.iter().position(|&n| n == 0.0) {
            return Err(Error::InvalidInput(format!("column {j} is zero")));
        }
        let mut data = self.data.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                data[i * self.cols + j] /= norms[j];
            }
        }
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub(crate) fn from_nalgebra(m: &DMatrix<f64>) -> DenseMatrix {
        let (rows, cols) = m.shape();
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            data.extend((0..cols).map(|j| m[(i, j)]));
        }
        DenseMatrix { rows, cols, data }
    }
}

/// Singular values in non-increasing order together with the numerical rank
/// they imply.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdResult {
    pub singular_values: Vec<f64>,
    pub numerical_rank: usize,
    pub rank_tolerance: f64,
}

impl SvdResult {
    /// Largest singular value, `‖M‖₂`.
    pub fn largest(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    /// `σ_j` with one-based `j`, or zero past `min(rows, cols)`.
    pub fn sigma(&self, j: usize) -> f64 {
        j.checked_sub(1)
            .and_then(|i| self.singular_values.get(i))
            .copied()
            .unwrap_or(0.0)
    }
}

/// Default rank cut-off `max(rows, cols)·ε·σ₁`.
pub fn default_rank_tolerance(rows: usize, cols: usize, sigma_max: f64) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON * sigma_max
}

fn check_finite(m: &DenseMatrix) -> Result<()> {
    if m.data.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput("matrix has non-finite entries".into()))
    }
}

/// Singular values only. Tall inputs are reduced to their `R` factor
/// first, which loses less to rounding than bidiagonalizing the full matrix.
pub fn svd(m: &DenseMatrix) -> Result<SvdResult> {
    check_finite(m)?;
    let a = m.to_nalgebra();
    let values = if m.rows > m.cols {
        a.qr().r().singular_values()
    } else {
        a.singular_values()
    };
    let mut singular_values: Vec<f64> = values.iter().map(|s| s.abs()).collect();
    singular_values.sort_by(|a, b| b.total_cmp(a));
    let sigma_max = singular_values.first().copied().unwrap_or(0.0);
    let rank_tolerance = default_rank_tolerance(m.rows, m.cols, sigma_max);
    let numerical_rank = singular_values
        .iter()
        .filter(|&&s| s > rank_tolerance)
        .count();
    Ok(SvdResult {
        singular_values,
        numerical_rank,
        // Keep the tolerance positive for the all-zero matrix.
        rank_tolerance: if rank_tolerance > 0.0 {
            rank_tolerance
        } else {
            f64::MIN_POSITIVE
        },
    })
}

/// Moore–Penrose pseudo-inverse from a truncated SVD. Singular values at or
/// below `tol` (default: the SVD rank tolerance) are treated as zero.
pub fn pseudo_inverse(m: &DenseMatrix, tol: Option<f64>) -> Result<DenseMatrix> {
    check_finite(m)?;
    let decomposition = nalgebra::linalg::SVD::new(m.to_nalgebra(), true, true);
    let sigma = &decomposition.singular_values;
    let sigma_max = sigma.iter().fold(0.0_f64, |acc, s| acc.max(s.abs()));
    let cutoff = tol.unwrap_or_else(|| default_rank_tolerance(m.rows, m.cols, sigma_max));
    let u = decomposition.u.as_ref().expect("u requested");
    let v_t = decomposition.v_t.as_ref().expect("v_t requested");

    // M† = V Σ⁺ Uᵀ, accumulated one rank-one term at a time.
    let mut out = DMatrix::<f64>::zeros(m.cols, m.rows);
    for (r, &s) in sigma.iter().enumerate() {
        if s <= cutoff {
            continue;
        }
        let inv = 1.0 / s;
        let v = v_t.row(r).transpose();
        let u_col = u.column(r);
        out += (v * inv) * u_col.transpose();
    }
    Ok(DenseMatrix::from_nalgebra(&out))
}

fn require_full_column_rank(m: &DenseMatrix) -> Result<()> {
    let s = svd(m)?;
    if s.numerical_rank < m.cols {
        return Err(Error::RankDeficient {
            rank: s.numerical_rank,
            required: m.cols,
        });
    }
    Ok(())
}

/// `P = I − C·C†`, the orthogonal projector onto `range(C)^⊥`.
pub fn complement_projector(c: &DenseMatrix) -> Result<DenseMatrix> {
    require_full_column_rank(c)?;
    let pinv = pseudo_inverse(c, None)?;
    let cc = c.matmul(&pinv)?;
    let p = DenseMatrix::identity(c.rows)?.sub(&cc)?;
    // Symmetrize to remove rounding asymmetry.
    Ok(p.add(&p.transpose())?.scale(0.5))
}

/// Block form of `[C₁ C₂]†` for a full column rank partition.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionedPinv {
    /// `(P₂C₁)†`, `k × m`.
    pub m1_pinv: DenseMatrix,
    /// `(P₁C₂)†`, `(n−k) × m`.
    pub m2_pinv: DenseMatrix,
    /// `S₁ = C₁ᵀP₂C₁`.
    pub schur1: DenseMatrix,
    /// `S₂ = C₂ᵀP₁C₂`.
    pub schur2: DenseMatrix,
}

impl PartitionedPinv {
    /// The stacked blocks, which equal `[C₁ C₂]†`.
    pub fn stacked(&self) -> DenseMatrix {
        self.m1_pinv
            .vconcat(&self.m2_pinv)
            .expect("blocks share the row count of C")
    }
}

pub fn partitioned_pinv(c1: &DenseMatrix, c2: &DenseMatrix) -> Result<PartitionedPinv> {
    let combined = c1.hconcat(c2)?;
    if combined.cols > combined.rows {
        return Err(Error::Shape(format!(
            "partitioned pseudo-inverse needs n <= m, got {} columns and {} rows",
            combined.cols, combined.rows
        )));
    }
    require_full_column_rank(&combined)?;
    let p1 = complement_projector(c1)?;
    let p2 = complement_projector(c2)?;
    let m1 = p2.matmul(c1)?;
    let m2 = p1.matmul(c2)?;
    let schur1 = c1.transpose().matmul(&m1)?;
    let schur2 = c2.transpose().matmul(&m2)?;
    Ok(PartitionedPinv {
        m1_pinv: pseudo_inverse(&m1, None)?,
        m2_pinv: pseudo_inverse(&m2, None)?,
        schur1: schur1.add(&schur1.transpose())?.scale(0.5),
        schur2: schur2.add(&schur2.transpose())?.scale(0.5),
    })
}
