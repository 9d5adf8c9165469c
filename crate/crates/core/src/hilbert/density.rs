use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::state::LogicalAmplitudes;
use crate::error::{Error, Result};

pub const LOGICAL_DIM: usize = 8;

/// Tolerances for [`DensityMatrix::validate`].
pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const EIGEN_FLOOR: f64 = -1e-9;

/// Three-qubit density matrix on the logical space.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        let rho = Self::new_unchecked(matrix)?;
        rho.validate()?;
        Ok(rho)
    }

    /// Only the shape is checked.
    pub fn new_unchecked(matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != LOGICAL_DIM || matrix.ncols() != LOGICAL_DIM {
            return Err(Error::DimensionMismatch {
                expected: LOGICAL_DIM,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(DensityMatrix { matrix })
    }

    /// `|psi><psi|`, normalizing `psi`.
    pub fn from_pure(psi: &LogicalAmplitudes) -> Result<Self> {
        let norm = psi.norm_sqr();
        if norm <= 1e-24 {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let v = psi.to_vector().unscale(norm.sqrt());
        Ok(DensityMatrix {
            matrix: &v * v.adjoint(),
        })
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix {
            matrix: DMatrix::identity(LOGICAL_DIM, LOGICAL_DIM) / Complex64::new(LOGICAL_DIM as f64, 0.0),
        }
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn hermitian_part(&self) -> DMatrix<Complex64> {
        (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut vals: Vec<f64> = SymmetricEigen::new(self.hermitian_part())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        vals.sort_by(f64::total_cmp);
        vals
    }

    pub fn validate(&self) -> Result<()> {
        let asym = (&self.matrix - self.matrix.adjoint())
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        if asym > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {asym:.3e})")));
        }
        let tr = self.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = self.eigenvalues()[0];
        if min < EIGEN_FLOOR {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    /// `(1 - p) rho + p I / 8`
    pub fn depolarize(&self, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "depolarizing probability {p} outside [0, 1]"
            )));
        }
        let mixed = Self::maximally_mixed();
        Ok(DensityMatrix {
            matrix: &self.matrix * Complex64::new(1.0 - p, 0.0) + mixed.matrix * Complex64::new(p, 0.0),
        })
    }

    /// `Re tr(rho A)`
    pub fn expectation(&self, observable: &DMatrix<Complex64>) -> f64 {
        // tr(rho A) = sum_ij rho_ij A_ji
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..LOGICAL_DIM {
            for j in 0..LOGICAL_DIM {
                acc += self.matrix[(i, j)] * observable[(j, i)];
            }
        }
        acc.re
    }

    /// Real and imaginary parts as row-major nested vectors.
    pub fn real_imag(&self) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let rows = |f: fn(&Complex64) -> f64| {
            (0..LOGICAL_DIM)
                .map(|r| (0..LOGICAL_DIM).map(|c| f(&self.matrix[(r, c)])).collect())
                .collect()
        };
        (rows(|z| z.re), rows(|z| z.im))
    }
}
