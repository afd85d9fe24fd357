//! Dense matrices, thin SVD and norm helpers on top of `faer`.

use faer::{Mat, MatRef};

use crate::error::{Error, Result};

/// An observed `p × n` matrix (rows are features, columns are samples)
/// together with its noise scale.
///
/// `noise_scale` is the per-entry noise standard deviation times `√n`. For
/// the canonical model with `N(0, 1/n)` noise entries it is 1; the bulk edge
/// of the singular values sits at `noise_scale·(1 + √(p/n))`.
#[derive(Debug, Clone)]
pub struct DataMatrix {
    values: Mat<f64>,
    noise_scale: f64,
}

impl DataMatrix {
    pub fn new(values: Mat<f64>, noise_scale: f64) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::Domain(format!(
                "matrix must be nonempty, got {}x{}",
                values.nrows(),
                values.ncols()
            )));
        }
        if !(noise_scale.is_finite() && noise_scale > 0.0) {
            return Err(Error::Domain(format!(
                "noise scale must be positive and finite, got {noise_scale}"
            )));
        }
        check_finite(values.as_ref())?;
        Ok(DataMatrix {
            values,
            noise_scale,
        })
    }

    /// Matrix with the canonical noise scale 1.
    pub fn from_mat(values: Mat<f64>) -> Result<Self> {
        Self::new(values, 1.0)
    }

    /// Builds a matrix from row-major rows of equal length.
    pub fn from_rows(rows: &[Vec<f64>], noise_scale: f64) -> Result<Self> {
        let p = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != n) {
            return Err(Error::Usage(format!(
                "row {bad} has {} entries, expected {n}",
                rows[bad].len()
            )));
        }
        Self::new(Mat::from_fn(p, n, |i, j| rows[i][j]), noise_scale)
    }

    pub fn zeros(p: usize, n: usize, noise_scale: f64) -> Result<Self> {
        Self::new(Mat::zeros(p, n), noise_scale)
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    #[inline]
    pub fn noise_scale(&self) -> f64 {
        self.noise_scale
    }

    #[inline]
    pub fn values(&self) -> MatRef<'_, f64> {
        self.values.as_ref()
    }

    pub fn into_values(self) -> Mat<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    /// Same data with a different noise scale.
    pub fn with_noise_scale(self, noise_scale: f64) -> Result<Self> {
        Self::new(self.values, noise_scale)
    }

    /// Multiplies every entry and the noise scale by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let v = &self.values;
        Self::new(
            Mat::from_fn(v.nrows(), v.ncols(), |i, j| factor * v[(i, j)]),
            self.noise_scale * factor.abs(),
        )
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.nrows())
            .map(|i| (0..self.ncols()).map(|j| self.values[(i, j)]).collect())
            .collect()
    }
}

fn check_finite(m: MatRef<'_, f64>) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            if !v.is_finite() {
                return Err(Error::Domain(format!("non-finite entry {v} at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

/// Thin SVD `Y = U·diag(σ)·Vᵀ` with `m = min(p, n)` components.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    /// `p × m`, orthonormal columns.
    pub left_vectors: Mat<f64>,
    /// Nonincreasing, nonnegative.
    pub singular_values: Vec<f64>,
    /// `n × m`, orthonormal columns.
    pub right_vectors: Mat<f64>,
}

impl SvdFactors {
    pub fn rank_capacity(&self) -> usize {
        self.singular_values.len()
    }

    /// `Σ_{k<r} σ_k u_k v_kᵀ`.
    pub fn truncated(&self, r: usize) -> Mat<f64> {
        let q: Vec<f64> = self.singular_values[..r].to_vec();
        reconstruct(self.left_vectors.as_ref(), &q, self.right_vectors.as_ref())
    }
}

/// Thin SVD of a data matrix.
pub fn thin_svd(y: &DataMatrix) -> Result<SvdFactors> {
    svd_of(y.values())
}

/// Thin SVD of any finite matrix.
///
/// Singular values come out nonincreasing with ties kept in backend order.
/// Each singular pair is sign-normalized so the largest-magnitude entry of
/// the left vector is positive.
pub fn svd_of(m: MatRef<'_, f64>) -> Result<SvdFactors> {
    check_finite(m)?;
    let svd = m
        .thin_svd()
        .map_err(|e| Error::Linalg(format!("SVD did not converge: {e:?}")))?;
    let s = svd.S().column_vector();
    let k = s.nrows();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));

    let (u, v) = (svd.U(), svd.V());
    let mut left = Mat::<f64>::zeros(u.nrows(), k);
    let mut right = Mat::<f64>::zeros(v.nrows(), k);
    let mut values = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        let mut pivot = 0.0f64;
        for i in 0..u.nrows() {
            if u[(i, src)].abs() > pivot.abs() {
                pivot = u[(i, src)];
            }
        }
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for i in 0..u.nrows() {
            left[(i, dst)] = sign * u[(i, src)];
        }
        for i in 0..v.nrows() {
            right[(i, dst)] = sign * v[(i, src)];
        }
        values.push(s[src].max(0.0));
    }
    Ok(SvdFactors {
        left_vectors: left,
        singular_values: values,
        right_vectors: right,
    })
}

/// `Σ_k q_k·u_k·v_kᵀ` over the first `q.len()` columns of `u` and `v`.
pub fn reconstruct(u: MatRef<'_, f64>, q: &[f64], v: MatRef<'_, f64>) -> Mat<f64> {
    let r = q.len();
    let scaled_u = Mat::from_fn(u.nrows(), r, |i, k| q[k] * u[(i, k)]);
    if r == 0 {
        return Mat::zeros(u.nrows(), v.nrows());
    }
    &scaled_u * v.subcols(0, r).transpose()
}

/// Largest singular value of a dense matrix.
pub fn operator_norm(m: MatRef<'_, f64>) -> Result<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(0.0);
    }
    check_finite(m)?;
    let s = m
        .singular_values()
        .map_err(|e| Error::Linalg(format!("SVD did not converge: {e:?}")))?;
    Ok(s.into_iter().fold(0.0, f64::max))
}

pub fn frobenius_norm(m: MatRef<'_, f64>) -> f64 {
    m.norm_l2()
}

/// Operator and Frobenius norms of `L·Rᵀ` without forming the product.
///
/// `left` is `p × k` and `right` is `n × k` with small `k`. Both factors are
/// reduced by thin QR so only a `k × k` core is decomposed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactoredNorms {
    pub operator: f64,
    pub frobenius: f64,
}

pub fn factored_norms(left: MatRef<'_, f64>, right: MatRef<'_, f64>) -> Result<FactoredNorms> {
    let k = left.ncols();
    if right.ncols() != k {
        return Err(Error::Usage(format!(
            "factor widths differ: {} vs {}",
            k,
            right.ncols()
        )));
    }
    if k == 0 {
        return Ok(FactoredNorms {
            operator: 0.0,
            frobenius: 0.0,
        });
    }
    let core = if k <= left.nrows() && k <= right.nrows() {
        let rl = upper_factor(left);
        let rr = upper_factor(right);
        &rl * rr.transpose()
    } else {
        left * right.transpose()
    };
    Ok(FactoredNorms {
        operator: operator_norm(core.as_ref())?,
        frobenius: frobenius_norm(core.as_ref()),
    })
}

/// `R` of a thin QR of a tall matrix.
fn upper_factor(m: MatRef<'_, f64>) -> Mat<f64> {
    m.qr().thin_R().to_owned()
}

/// Horizontal concatenation of equally tall blocks.
pub(crate) fn hcat(blocks: &[MatRef<'_, f64>]) -> Mat<f64> {
    let rows = blocks.first().map_or(0, |b| b.nrows());
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Mat::<f64>::zeros(rows, cols);
    let mut offset = 0;
    for b in blocks {
        debug_assert_eq!(b.nrows(), rows);
        out.as_mut().subcols_mut(offset, b.ncols()).copy_from(*b);
        offset += b.ncols();
    }
    out
}
