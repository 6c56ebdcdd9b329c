//! Cascaded channel estimators.
//!
//! Every estimator works on the effective measurements `Ỹ_k = Θ̃·H̃_kᴴ + W̃_k`
//! and returns support estimates plus angular and spatial channels:
//!
//! | estimator            | rows                 | columns                                 |
//! |----------------------|----------------------|-----------------------------------------|
//! | [`ds_omp`]           | joint power ranking  | joint voting for `l_c`, then per user   |
//! | [`row_structured_omp`] | joint power ranking | per user OMP                           |
//! | [`baseline_omp`]     | per user ranking     | per user OMP                            |
//! | [`oracle_ls`]        | true                 | true                                    |

mod baselines;
mod dsomp;
mod lsq;
mod omp;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::angular::{from_angular, Dictionary};
use crate::channel::{SystemGeometry, TrueSupports};
use crate::pilot::{MeasurementSet, SensingMatrix};
use crate::{CMatrix, Error, Result};

pub use baselines::{baseline_omp, row_structured_omp};
pub use dsomp::{
    ds_omp, estimate_common_cols, estimate_row_support, estimate_row_support_with_work,
    estimate_user_cols, RowSupportOutcome,
};
pub use lsq::solve_on_support;
pub use omp::{omp_inner, OmpOutcome};

/// Everything an estimator reads: measurements, sensing matrix and the
/// two dictionaries for the final spatial transform.
#[derive(Debug, Clone, Copy)]
pub struct EstimationProblem<'a> {
    pub measurements: &'a MeasurementSet,
    pub sensing: &'a SensingMatrix,
    pub bs_dict: &'a Dictionary,
    pub ris_dict: &'a Dictionary,
}

impl EstimationProblem<'_> {
    pub fn users(&self) -> usize {
        self.measurements.users()
    }

    /// Measurement column `row` of user `k`.
    pub(crate) fn column(&self, user: usize, row: usize) -> crate::CVector {
        self.measurements.y_tilde[user].column(row).into_owned()
    }
}

/// Sparsity inputs of the estimators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityLevels {
    /// Non-zero rows, shared by all users.
    pub l_g: usize,
    /// Non-zero columns per non-zero row, per user.
    pub l_r: Vec<usize>,
    /// Columns per row shared by all users.
    pub l_c: usize,
}

impl SparsityLevels {
    pub fn from_geometry(geom: &SystemGeometry) -> Self {
        Self {
            l_g: geom.l_g,
            l_r: vec![geom.l_r; geom.k_users],
            l_c: geom.l_c,
        }
    }

    pub(crate) fn check(&self, problem: &EstimationProblem<'_>) -> Result<()> {
        if self.l_r.len() != problem.users() {
            return Err(Error::ShapeMismatch(format!(
                "{} per-user path counts for {} users",
                self.l_r.len(),
                problem.users()
            )));
        }
        if self.l_g > problem.measurements.bs_rows() {
            return Err(Error::InvalidGeometry(format!(
                "L_G={} exceeds the {} BS angular rows",
                self.l_g,
                problem.measurements.bs_rows()
            )));
        }
        if let Some(&l_r) = self.l_r.iter().find(|&&l_r| l_r < self.l_c) {
            return Err(Error::InvalidGeometry(format!(
                "L_c={} exceeds a user's L_r={l_r}",
                self.l_c
            )));
        }
        Ok(())
    }
}

/// Estimated supports.
///
/// `user_cols[k][i]` are the columns of user `k` in row `rows[k][i]`, and
/// `common_cols[i]` the shared columns of the `i`-th jointly detected
/// row (empty when the estimator does not use shared columns). Joint
/// estimators give every user the same row list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportEstimate {
    pub rows: Vec<Vec<usize>>,
    pub common_cols: Vec<Vec<usize>>,
    pub user_cols: Vec<Vec<Vec<usize>>>,
}

impl SupportEstimate {
    /// The row support when it is shared by every user.
    pub fn joint_rows(&self) -> Option<&[usize]> {
        let first = self.rows.first()?;
        self.rows.iter().all(|r| r == first).then_some(first.as_slice())
    }

    /// Whether every shared column set is inside every user's set for the
    /// same row.
    pub fn common_contained(&self) -> bool {
        self.user_cols.iter().all(|per_row| {
            self.common_cols
                .iter()
                .zip(per_row)
                .all(|(common, cols)| common.iter().all(|c| cols.contains(c)))
        })
    }

    fn from_truth(truth: &TrueSupports) -> Self {
        Self {
            rows: vec![truth.rows.clone(); truth.cols.len()],
            common_cols: truth.common_cols.clone(),
            user_cols: truth.cols.clone(),
        }
    }
}

/// Angular and spatial channel estimates with the supports they used.
#[derive(Debug, Clone)]
pub struct EstimationResult {
    pub angular: Vec<CMatrix>,
    pub spatial: Vec<CMatrix>,
    pub support: SupportEstimate,
}

/// Least-squares fit of every `(user, row)` measurement column on its
/// estimated column support, scattered into `H̃̂_k` and mapped back to
/// the spatial domain.
///
/// The fitted vector is a column of `H̃̂_kᴴ`, so the angular entries are
/// its conjugate.
pub fn ls_reconstruct(problem: &EstimationProblem<'_>, support: SupportEstimate) -> Result<EstimationResult> {
    let (m, n) = (problem.bs_dict.total(), problem.ris_dict.total());
    if support.rows.len() != problem.users() || support.user_cols.len() != problem.users() {
        return Err(Error::ShapeMismatch(format!(
            "support covers {} users, measurements {}",
            support.rows.len(),
            problem.users()
        )));
    }
    let mut angular = Vec::with_capacity(problem.users());
    for (k, (rows, cols)) in support.rows.iter().zip(&support.user_cols).enumerate() {
        if rows.len() != cols.len() {
            return Err(Error::ShapeMismatch(format!(
                "user {k}: {} rows but {} column sets",
                rows.len(),
                cols.len()
            )));
        }
        let mut h = CMatrix::zeros(m, n);
        for (&row, row_cols) in rows.iter().zip(cols) {
            let x = solve_on_support(problem.sensing, row_cols, &problem.column(k, row))?;
            for (&c, v) in row_cols.iter().zip(x.iter()) {
                h[(row, c)] = v.conj();
            }
        }
        angular.push(h);
    }
    let spatial = angular
        .iter()
        .map(|h| from_angular(h, problem.bs_dict, problem.ris_dict))
        .collect::<Result<Vec<_>>>()?;
    Ok(EstimationResult {
        angular,
        spatial,
        support,
    })
}

/// LS on the true supports: the lower bound every estimator is compared to.
pub fn oracle_ls(problem: &EstimationProblem<'_>, truth: &TrueSupports) -> Result<EstimationResult> {
    ls_reconstruct(problem, SupportEstimate::from_truth(truth))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    DsOmp,
    RowStructured,
    BaselineOmp,
    OracleLs,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 4] = [
        EstimatorKind::DsOmp,
        EstimatorKind::RowStructured,
        EstimatorKind::BaselineOmp,
        EstimatorKind::OracleLs,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            EstimatorKind::DsOmp => "ds_omp",
            EstimatorKind::RowStructured => "row_structured",
            EstimatorKind::BaselineOmp => "baseline_omp",
            EstimatorKind::OracleLs => "oracle_ls",
        }
    }

    /// Runs this estimator. Only the oracle reads `truth`.
    pub fn run(
        &self,
        problem: &EstimationProblem<'_>,
        levels: &SparsityLevels,
        truth: Option<&TrueSupports>,
    ) -> Result<EstimationResult> {
        match self {
            EstimatorKind::DsOmp => ds_omp(problem, levels),
            EstimatorKind::RowStructured => row_structured_omp(problem, levels),
            EstimatorKind::BaselineOmp => baseline_omp(problem, levels),
            EstimatorKind::OracleLs => oracle_ls(problem, truth.ok_or(Error::MissingTruth)?),
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EstimatorKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownEstimator(s.to_string()))
    }
}

/// Indices of the `count` largest values, ties to the lowest index,
/// returned in ascending index order.
pub(crate) fn top_indices(values: &[f64], count: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order.truncate(count);
    order.sort_unstable();
    order
}
