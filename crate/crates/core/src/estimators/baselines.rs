//! Reference estimators without the shared-column structure.

use super::dsomp::{complete_user_cols, estimate_row_support, estimate_user_cols};
use super::{ls_reconstruct, top_indices, EstimationProblem, EstimationResult};
use super::{SparsityLevels, SupportEstimate};
use crate::Result;

/// Joint row support across users, then an independent `l_r[k]`-step
/// OMP for every `(user, row)`.
pub fn row_structured_omp(problem: &EstimationProblem<'_>, levels: &SparsityLevels) -> Result<EstimationResult> {
    levels.check(problem)?;
    let rows = estimate_row_support(problem.measurements, levels.l_g)?;
    let no_common = vec![Vec::new(); rows.len()];
    let user_cols = estimate_user_cols(problem, &rows, &no_common, &levels.l_r)?;
    let support = SupportEstimate {
        rows: vec![rows; problem.users()],
        common_cols: no_common,
        user_cols,
    };
    ls_reconstruct(problem, support)
}

/// Conventional per-user OMP with the same sparsity budget.
///
/// Each user ranks the column powers of its own `Ỹ_k`, keeps the `l_g`
/// strongest as its rows, and runs `l_r[k]` OMP steps on each of them.
/// Nothing is shared between users.
pub fn baseline_omp(problem: &EstimationProblem<'_>, levels: &SparsityLevels) -> Result<EstimationResult> {
    levels.check(problem)?;
    let mut rows = Vec::with_capacity(problem.users());
    let mut user_cols = Vec::with_capacity(problem.users());
    for (k, y) in problem.measurements.y_tilde.iter().enumerate() {
        let power: Vec<f64> = y.column_iter().map(|c| c.norm_squared()).collect();
        let user_rows = top_indices(&power, levels.l_g);
        let no_common = vec![Vec::new(); user_rows.len()];
        user_cols.push(complete_user_cols(problem, k, &user_rows, &no_common, levels.l_r[k])?);
        rows.push(user_rows);
    }
    let support = SupportEstimate {
        rows,
        common_cols: vec![Vec::new(); levels.l_g],
        user_cols,
    };
    ls_reconstruct(problem, support)
}
