//! Dense `exp(−iHt)` for small static Hamiltonians, used as an independent
//! reference for the integrators.

use crate::error::{Error, Result};
use crate::hilbert::{CsrMatrix, Operator};
use crate::C64;
use nalgebra::DMatrix;

pub const ORACLE_MAX_DIM: usize = 64;

/// `exp(−iHt)` via the eigendecomposition of the Hermitian matrix `H`.
pub fn expm_oracle(h: &Operator, t: f64) -> Result<Operator> {
    let d = h.dim();
    if d > ORACLE_MAX_DIM {
        return Err(Error::InvalidDimension {
            what: format!("oracle (limit {ORACLE_MAX_DIM})"),
            dim: d,
        });
    }
    let scale = h.matrix().max_abs().max(1.0);
    let deviation = h.hermiticity_defect();
    if deviation > 1e-12 * scale {
        return Err(Error::NonHermitian { deviation });
    }
    let m = DMatrix::from_fn(d, d, |i, j| h.get(i, j));
    let eig = m.symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| C64::from_polar(1.0, -e * t)));
    let u = v * phases * v.adjoint();
    let dense: Vec<C64> = (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).map(|(i, j)| u[(i, j)]).collect();
    Operator::new(h.layout().clone(), CsrMatrix::from_dense(d, d, &dense), "expm")
}


#[cfg(test)]
pub(crate) use tests::random_for_tests;
