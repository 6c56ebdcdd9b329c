//! Greedy pursuit shared by every column-support stage.

use num_complex::Complex64;

use super::lsq::solve_on_support;
use crate::pilot::SensingMatrix;
use crate::{CVector, Error, Result};

/// Result of [`omp_inner`]. `coeffs[j]` belongs to column `support[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OmpOutcome {
    /// Selected columns in selection order, starting with the initial support.
    pub support: Vec<usize>,
    pub residual: CVector,
    pub coeffs: CVector,
}

/// Runs `n_iters` OMP rounds on `y`, starting from `init_support`.
///
/// A non-empty initial support is least-squares fitted first and the
/// residual taken from that fit. Each round picks the column maximizing
/// `|Θ̃(:,n)ᴴ r|²` among columns not yet selected (ties go to the lowest
/// index), refits on the enlarged support and updates the residual.
pub fn omp_inner(
    y: &CVector,
    sensing: &SensingMatrix,
    n_iters: usize,
    init_support: &[usize],
) -> Result<OmpOutcome> {
    let atoms = sensing.atoms();
    if init_support.len() + n_iters > sensing.slots() {
        return Err(Error::Underdetermined {
            unknowns: init_support.len() + n_iters,
            measurements: sensing.slots(),
        });
    }
    if init_support.len() + n_iters > atoms {
        return Err(Error::InvalidGeometry(format!(
            "cannot select {} distinct columns out of {atoms}",
            init_support.len() + n_iters
        )));
    }

    let mut support = init_support.to_vec();
    let mut selected = vec![false; atoms];
    for &c in &support {
        if c >= atoms || selected[c] {
            return Err(Error::InvalidGeometry(format!(
                "initial support {init_support:?} is out of range or repeats a column"
            )));
        }
        selected[c] = true;
    }

    let mut coeffs = solve_on_support(sensing, &support, y)?;
    let mut residual = residual_of(sensing, &support, &coeffs, y);

    for _ in 0..n_iters {
        let correlation = sensing.adjoint() * &residual;
        let mut best: Option<(usize, f64)> = None;
        for (n, c) in correlation.iter().enumerate() {
            if selected[n] {
                continue;
            }
            let power = c.norm_sqr();
            if best.is_none_or(|(_, p)| power > p) {
                best = Some((n, power));
            }
        }
        let (pick, _) = best.expect("support size checked against atom count");
        selected[pick] = true;
        support.push(pick);
        coeffs = solve_on_support(sensing, &support, y)?;
        residual = residual_of(sensing, &support, &coeffs, y);
    }

    Ok(OmpOutcome {
        support,
        residual,
        coeffs,
    })
}

fn residual_of(sensing: &SensingMatrix, support: &[usize], coeffs: &CVector, y: &CVector) -> CVector {
    let mut r = y.clone();
    for (&col, &x) in support.iter().zip(coeffs.iter()) {
        if x != Complex64::new(0.0, 0.0) {
            r -= sensing.matrix().column(col) * x;
        }
    }
    r
}
