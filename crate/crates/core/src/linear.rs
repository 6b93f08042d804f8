//! Ordinary least squares for saturated and nested designs.

use serde::Serialize;

use crate::error::{Error, ModelRole, Result};
use crate::linalg::{dot, norm2, Cholesky, ColumnSubset, Matrix, SymmetricMatrix};
use crate::report::{assemble, ComparisonMode, ModelFamily, NestedComparisonReport, Sides};

/// An `N × p` design with finite entries and `p ≤ N`. Full column rank is
/// checked by the fitting routines.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignMatrix {
    matrix: Matrix,
}

impl DesignMatrix {
    pub fn new(matrix: Matrix) -> Result<Self> {
        if !matrix.is_finite() {
            return Err(Error::input("design matrix has non-finite entries"));
        }
        if matrix.cols() > matrix.rows() {
            return Err(Error::input(format!(
                "design has {} columns but only {} rows",
                matrix.cols(),
                matrix.rows()
            )));
        }
        Ok(Self { matrix })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    pub fn n_rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn n_cols(&self) -> usize {
        self.matrix.cols()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn gram(&self) -> SymmetricMatrix {
        self.matrix.gram()
    }

    /// Gram matrix factor; fails naming the first linearly dependent column.
    pub fn gram_factor(&self) -> Result<Cholesky> {
        Cholesky::new(&self.gram())
    }

    /// Design restricted to the given columns, in order (no rank check).
    pub fn select_columns(&self, columns: &[usize]) -> Result<DesignMatrix> {
        if let Some(&bad) = columns.iter().find(|&&c| c >= self.n_cols()) {
            return Err(Error::input(format!(
                "column {bad} out of range for a design with {} columns",
                self.n_cols()
            )));
        }
        Self::new(self.matrix.select_columns(columns))
    }

    pub fn select_rows(&self, rows: &[usize]) -> Result<DesignMatrix> {
        Self::new(self.matrix.select_rows(rows))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearFit {
    pub beta_hat: Vec<f64>,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
    /// ‖Y − Xβ̂‖², the model's bias.
    pub rss: f64,
    /// rss / (N − p); `None` when the fit has no residual degrees of freedom.
    pub sigma2_hat: Option<f64>,
    /// σ̂² (XᵀX)⁻¹, present with `sigma2_hat`.
    pub covariance: Option<SymmetricMatrix>,
    pub gram_inverse: SymmetricMatrix,
    pub dof: usize,
}

impl LinearFit {
    pub fn residual_norm(&self) -> f64 {
        norm2(&self.residuals)
    }

    pub fn standard_errors(&self) -> Option<Vec<f64>> {
        self.covariance
            .as_ref()
            .map(|c| c.diagonal_entries().into_iter().map(f64::sqrt).collect())
    }
}

fn check_response(x: &DesignMatrix, y: &[f64]) -> Result<()> {
    if y.len() != x.n_rows() {
        return Err(Error::input(format!(
            "response has {} values but the design has {} rows",
            y.len(),
            x.n_rows()
        )));
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::input(format!("response value {i} is not finite")));
    }
    Ok(())
}

/// β̂ = (XᵀX)⁻¹XᵀY via Cholesky of the Gram matrix, with one step of
/// iterative refinement on the residual.
pub fn fit_ols(x: &DesignMatrix, y: &[f64]) -> Result<LinearFit> {
    check_response(x, y)?;
    let chol = x.gram_factor()?;
    let residual = |beta: &[f64]| -> Vec<f64> {
        let fitted = x.matrix().mul_vec(beta);
        y.iter().zip(&fitted).map(|(a, b)| a - b).collect()
    };
    let mut beta_hat = chol.solve(&x.matrix().tr_mul_vec(y));
    let correction = chol.solve(&x.matrix().tr_mul_vec(&residual(&beta_hat)));
    for (b, d) in beta_hat.iter_mut().zip(&correction) {
        *b += d;
    }
    let fitted = x.matrix().mul_vec(&beta_hat);
    let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    let rss = dot(&residuals, &residuals);
    let dof = x.n_rows() - x.n_cols();
    let gram_inverse = chol.inverse();
    let sigma2_hat = (dof > 0).then(|| rss / dof as f64);
    let covariance = sigma2_hat.map(|s2| gram_inverse.scaled(s2));
    Ok(LinearFit {
        beta_hat,
        fitted,
        residuals,
        rss,
        sigma2_hat,
        covariance,
        gram_inverse,
        dof,
    })
}

/// M = X(XᵀX)⁻¹Xᵀ, the orthogonal projector onto the column space of X.
pub fn projection_matrix(x: &DesignMatrix) -> Result<SymmetricMatrix> {
    let chol = x.gram_factor()?;
    // rows of X L⁻ᵀ
    let half: Vec<Vec<f64>> = (0..x.n_rows())
        .map(|i| chol.forward(x.matrix().row(i)))
        .collect();
    Ok(SymmetricMatrix::from_upper(x.n_rows(), |i, j| {
        dot(&half[i], &half[j])
    }))
}

/// The nested design X* made of the subset's columns.
pub fn nest_design(x: &DesignMatrix, subset: &ColumnSubset) -> Result<DesignMatrix> {
    if subset.parent_dim() != x.n_cols() {
        return Err(Error::input(format!(
            "subset is defined for {} columns but the design has {}",
            subset.parent_dim(),
            x.n_cols()
        )));
    }
    let nested = x.select_columns(subset.indices())?;
    nested.gram_factor()?;
    Ok(nested)
}

/// Fits saturated and nested models and compares bias, residual norm and
/// the spectra of their Gram matrices and inverses.
pub fn compare_nested(
    x: &DesignMatrix,
    y: &[f64],
    subset: &ColumnSubset,
) -> Result<NestedComparisonReport> {
    let x_nested = nest_design(x, subset).map_err(Error::in_model(ModelRole::Nested))?;
    let saturated = fit_ols(x, y).map_err(Error::in_model(ModelRole::Saturated))?;
    let nested = fit_ols(&x_nested, y).map_err(Error::in_model(ModelRole::Nested))?;

    let y_sq = dot(y, y);
    let mut report = assemble(
        ModelFamily::Linear,
        ComparisonMode::Exact,
        subset.indices().to_vec(),
        Sides {
            bias: (saturated.rss, nested.rss),
            bias_scale: y_sq,
            residual_norm: (saturated.residual_norm(), nested.residual_norm()),
            residual_scale: y_sq.sqrt(),
        },
        &x.gram(),
        &x_nested.gram(),
    )?;
    report.scaled_var_radius_saturated = saturated.sigma2_hat.map(|s| s * report.var_radius_saturated);
    report.scaled_var_radius_nested = nested.sigma2_hat.map(|s| s * report.var_radius_nested);
    Ok(report)
}
