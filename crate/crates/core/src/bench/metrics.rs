//! Accuracy metrics.

use crate::channel::TrueSupports;
use crate::estimators::SupportEstimate;
use crate::{CMatrix, Error, Result};

/// `(1/K)·Σ_k ‖Ĥ_k − H_k‖²_F / ‖H_k‖²_F`.
pub fn nmse(estimated: &[CMatrix], truth: &[CMatrix]) -> Result<f64> {
    if estimated.len() != truth.len() || truth.is_empty() {
        return Err(Error::ShapeMismatch(format!(
            "{} estimates for {} true channels",
            estimated.len(),
            truth.len()
        )));
    }
    let mut total = 0.0;
    for (user, (est, h)) in estimated.iter().zip(truth).enumerate() {
        if est.shape() != h.shape() {
            return Err(Error::ShapeMismatch(format!(
                "user {user}: estimate {:?} vs truth {:?}",
                est.shape(),
                h.shape()
            )));
        }
        let energy = h.norm_squared();
        if energy == 0.0 {
            return Err(Error::DegenerateTruth { user });
        }
        total += (est - h).norm_squared() / energy;
    }
    Ok(total / truth.len() as f64)
}

/// Fractions of correctly detected rows and columns.
///
/// The row rate is `|Ω̂_r ∩ Ω_r| / L_G`, averaged over users. The column
/// rate averages `|Ω̂_c ∩ Ω_c| / L_r` over every true `(user, row)`; a
/// true row that was not detected contributes zero.
pub fn support_recovery(est: &SupportEstimate, truth: &TrueSupports) -> (f64, f64) {
    let users = truth.cols.len();
    if users == 0 || truth.rows.is_empty() {
        return (0.0, 0.0);
    }
    let overlap = |a: &[usize], b: &[usize]| a.iter().filter(|x| b.contains(x)).count() as f64;

    let mut row_rate = 0.0;
    let mut col_rate = 0.0;
    for k in 0..users {
        let rows = est.rows.get(k).map(Vec::as_slice).unwrap_or(&[]);
        row_rate += overlap(rows, &truth.rows) / truth.rows.len() as f64;
        for (i, &row) in truth.rows.iter().enumerate() {
            let true_cols = &truth.cols[k][i];
            if true_cols.is_empty() {
                continue;
            }
            let hit = rows
                .iter()
                .position(|&r| r == row)
                .and_then(|j| est.user_cols.get(k).and_then(|c| c.get(j)));
            if let Some(cols) = hit {
                col_rate += overlap(cols, true_cols) / true_cols.len() as f64;
            }
        }
    }
    (
        row_rate / users as f64,
        col_rate / (users * truth.rows.len()) as f64,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn h(seed: f64) -> CMatrix {
        CMatrix::from_fn(3, 4, |i, j| Complex64::new(seed + i as f64, j as f64 - seed))
    }

    #[test]
    fn nmse_reference_values() {
        let truth = vec![h(1.0), h(2.5)];
        assert_eq!(nmse(&truth, &truth).unwrap(), 0.0);
        let zeros = vec![CMatrix::zeros(3, 4); 2];
        assert!((nmse(&zeros, &truth).unwrap() - 1.0).abs() < 1e-15);
        let doubled: Vec<CMatrix> = truth.iter().map(|m| m * Complex64::new(2.0, 0.0)).collect();
        assert!((nmse(&doubled, &truth).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn nmse_errors() {
        let truth = vec![CMatrix::zeros(3, 4)];
        assert!(matches!(
            nmse(&[h(1.0)], &truth),
            Err(Error::DegenerateTruth { user: 0 })
        ));
        assert!(nmse(&[h(1.0)], &[h(1.0), h(2.0)]).is_err());
        assert!(nmse(&[CMatrix::zeros(2, 2)], &[h(1.0)]).is_err());
    }

    fn truth() -> TrueSupports {
        TrueSupports {
            rows: vec![1, 5],
            cols: vec![vec![vec![0, 2], vec![3, 4]], vec![vec![1, 2], vec![6, 7]]],
            common_cols: vec![vec![2], vec![]],
        }
    }

    #[test]
    fn exact_and_disjoint_supports() {
        let t = truth();
        let exact = SupportEstimate {
            rows: vec![t.rows.clone(); 2],
            common_cols: t.common_cols.clone(),
            user_cols: t.cols.clone(),
        };
        assert_eq!(support_recovery(&exact, &t), (1.0, 1.0));
        let disjoint = SupportEstimate {
            rows: vec![vec![0, 2]; 2],
            common_cols: vec![vec![], vec![]],
            user_cols: vec![vec![vec![0, 2], vec![3, 4]]; 2],
        };
        assert_eq!(support_recovery(&disjoint, &t), (0.0, 0.0));
    }

    #[test]
    fn half_overlap() {
        let t = truth();
        // Row 1 found, row 5 missed; in row 1 user 0 gets both columns and
        // user 1 gets one of two.
        let est = SupportEstimate {
            rows: vec![vec![1, 3]; 2],
            common_cols: vec![vec![], vec![]],
            user_cols: vec![vec![vec![0, 2], vec![3, 4]], vec![vec![2, 9], vec![6, 7]]],
        };
        let (row, col) = support_recovery(&est, &t);
        assert_eq!(row, 0.5);
        assert!((col - (1.0 + 0.5) / 4.0).abs() < 1e-15);
    }
}
