//! Least squares restricted to a column subset of the sensing matrix.

use crate::pilot::SensingMatrix;
use crate::{CMatrix, CVector, Error, Result};

/// Relative pivot size below which a restricted system counts as singular.
const RANK_TOLERANCE: f64 = 1e-10;

/// Solves `min ‖y − Θ̃(:, support)·x‖₂` through a Householder QR of the
/// selected columns.
///
/// `x[j]` is the coefficient of column `support[j]`. An empty support
/// yields an empty vector.
pub fn solve_on_support(sensing: &SensingMatrix, support: &[usize], y: &CVector) -> Result<CVector> {
    if support.is_empty() {
        return Ok(CVector::zeros(0));
    }
    if y.len() != sensing.slots() {
        return Err(Error::ShapeMismatch(format!(
            "measurement has {} entries, sensing matrix has {} rows",
            y.len(),
            sensing.slots()
        )));
    }
    if support.len() > sensing.slots() {
        return Err(Error::Underdetermined {
            unknowns: support.len(),
            measurements: sensing.slots(),
        });
    }
    let a: CMatrix = sensing.matrix().select_columns(support.iter());
    let scale = a.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    let qr = a.qr();
    let r = qr.r();
    let singular = scale == 0.0 || r.diagonal().iter().any(|d| d.norm() <= RANK_TOLERANCE * scale);
    if singular {
        return Err(Error::Singular {
            support: support.to_vec(),
        });
    }
    let rhs = qr.q().adjoint() * y;
    r.solve_upper_triangular(&rhs).ok_or_else(|| Error::Singular {
        support: support.to_vec(),
    })
}
