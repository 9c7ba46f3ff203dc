//! Incrementally maintained inverse Gram matrix `(A Aᵀ)⁻¹`.
//!
//! Each appended row grows the inverse by one bordering row and column using
//! the block-inverse (Schur complement) identity, so an append costs O(m²)
//! plus O(mN) for the cross products with the stored rows. The projection
//! `I - A†A` is never materialized; it is applied as `x - Aᵀ Γ (A x - y)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Result, ZapError};

/// Relative guard on the Schur complement `β - αᵀΓα`, as a multiple of `β`.
pub const SCHUR_GUARD: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct GramInverse {
    /// m×N, one measurement row per appended sample, in append order.
    rows: DMatrix<f64>,
    /// m×m, symmetric.
    gamma: DMatrix<f64>,
    n_dim: usize,
}

impl GramInverse {
    pub fn new(n_dim: usize) -> Result<Self> {
        if n_dim == 0 {
            return Err(invalid("signal dimension must be at least 1"));
        }
        Ok(Self {
            rows: DMatrix::zeros(0, n_dim),
            gamma: DMatrix::zeros(0, 0),
            n_dim,
        })
    }

    pub fn m(&self) -> usize {
        self.rows.nrows()
    }

    pub fn n_dim(&self) -> usize {
        self.n_dim
    }

    pub fn gamma(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    pub fn rows(&self) -> &DMatrix<f64> {
        &self.rows
    }

    /// Appends `a` as the newest row. On error the state is left untouched.
    pub fn append_row(&mut self, a: &DVector<f64>) -> Result<()> {
        if a.len() != self.n_dim {
            return Err(invalid(format!(
                "row has length {}, expected {}",
                a.len(),
                self.n_dim
            )));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(invalid("row contains non-finite entries"));
        }
        let m = self.m();
        if m == self.n_dim {
            return Err(ZapError::Capacity { n_dim: self.n_dim });
        }

        let beta = a.dot(a);
        let guard = SCHUR_GUARD * beta;
        if m == 0 {
            if beta <= guard {
                return Err(ZapError::DegenerateRow { schur: beta, guard });
            }
            self.gamma = DMatrix::from_element(1, 1, 1.0 / beta);
            self.rows = DMatrix::from_row_slice(1, self.n_dim, a.as_slice());
            return Ok(());
        }

        let cross = &self.rows * a; // A_m a
        let gc = &self.gamma * &cross; // Γ A_m a
        let schur = beta - cross.dot(&gc);
        if schur.is_nan() || schur <= guard {
            return Err(ZapError::DegenerateRow { schur, guard });
        }
        let theta = 1.0 / schur;

        let mut next = DMatrix::zeros(m + 1, m + 1);
        for j in 0..m {
            for i in 0..m {
                next[(i, j)] = self.gamma[(i, j)] + theta * gc[i] * gc[j];
            }
            next[(m, j)] = -theta * gc[j];
            next[(j, m)] = -theta * gc[j];
        }
        next[(m, m)] = theta;
        symmetrize(&mut next);

        self.gamma = next;
        self.rows = std::mem::replace(&mut self.rows, DMatrix::zeros(0, 0)).insert_row(m, 0.0);
        self.rows.row_mut(m).copy_from(&a.transpose());
        Ok(())
    }

    /// `x - Aᵀ Γ (A x - y)`: the closest point to `x` on `{z : A z = y}`.
    /// With no rows there is no constraint and `x` is returned as is.
    pub fn apply_projection(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.n_dim {
            return Err(invalid(format!(
                "x has length {}, expected {}",
                x.len(),
                self.n_dim
            )));
        }
        if y.len() != self.m() {
            return Err(invalid(format!(
                "y has length {}, expected {}",
                y.len(),
                self.m()
            )));
        }
        if self.m() == 0 {
            return Ok(x.clone());
        }
        let mut out = x.clone();
        self.project_in_place(&mut out, y);
        Ok(out)
    }

    /// Minimum-norm solution `Aᵀ Γ y`.
    pub fn least_squares_solution(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        if self.m() == 0 {
            return Err(invalid(
                "least-squares solution undefined without measurements",
            ));
        }
        if y.len() != self.m() {
            return Err(invalid(format!(
                "y has length {}, expected {}",
                y.len(),
                self.m()
            )));
        }
        Ok(self.rows.tr_mul(&(&self.gamma * y)))
    }

    /// Dimensions must already be checked by the caller.
    pub(crate) fn project_in_place(&self, x: &mut DVector<f64>, y: &DVector<f64>) {
        if self.m() == 0 {
            return;
        }
        let residual = &self.rows * &*x - y;
        let weights = &self.gamma * residual;
        x.gemv_tr(-1.0, &self.rows, &weights, 1.0);
    }
}

fn symmetrize(g: &mut DMatrix<f64>) {
    let n = g.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            let v = 0.5 * (g[(i, j)] + g[(j, i)]);
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
}
