//! Double-structured OMP: joint rows, voted common columns, per-user completion.

use super::{ls_reconstruct, omp_inner, top_indices, EstimationProblem, EstimationResult};
use super::{SparsityLevels, SupportEstimate};
use crate::pilot::MeasurementSet;
use crate::{Error, Result};

/// Row support with the accumulated column powers it was ranked on.
#[derive(Debug, Clone, PartialEq)]
pub struct RowSupportOutcome {
    pub rows: Vec<usize>,
    /// `g(m) = Σ_k ‖Ỹ_k(:,m)‖²`.
    pub power: Vec<f64>,
    /// Number of `|·|²` accumulations performed, `K·M·Q`.
    pub work: u64,
}

/// Stage 1: sums the column powers of all users' measurements and keeps
/// the `l_g` strongest columns as the shared row support.
pub fn estimate_row_support_with_work(measurements: &MeasurementSet, l_g: usize) -> Result<RowSupportOutcome> {
    let m = measurements.bs_rows();
    if l_g > m {
        return Err(Error::InvalidGeometry(format!(
            "cannot select L_G={l_g} rows out of {m}"
        )));
    }
    let mut power = vec![0.0; m];
    let mut work = 0u64;
    for y in &measurements.y_tilde {
        for (g, col) in power.iter_mut().zip(y.column_iter()) {
            for v in col.iter() {
                *g += v.norm_sqr();
                work += 1;
            }
        }
    }
    Ok(RowSupportOutcome {
        rows: top_indices(&power, l_g),
        power,
        work,
    })
}

/// Stage 1 without the bookkeeping.
pub fn estimate_row_support(measurements: &MeasurementSet, l_g: usize) -> Result<Vec<usize>> {
    estimate_row_support_with_work(measurements, l_g).map(|o| o.rows)
}

/// Stage 2: for every detected row, runs a full `l_r[k]`-step OMP per
/// user on that measurement column and counts how often each column is
/// picked. The `l_c` most voted columns (ties to the lowest index) form
/// the row's shared support.
pub fn estimate_common_cols(
    problem: &EstimationProblem<'_>,
    rows: &[usize],
    l_r: &[usize],
    l_c: usize,
) -> Result<Vec<Vec<usize>>> {
    if l_c == 0 {
        return Ok(vec![Vec::new(); rows.len()]);
    }
    let atoms = problem.sensing.atoms();
    rows.iter()
        .map(|&row| {
            let mut votes = vec![0.0f64; atoms];
            for (k, &iters) in l_r.iter().enumerate() {
                let picks = omp_inner(&problem.column(k, row), problem.sensing, iters, &[])?;
                for c in picks.support {
                    votes[c] += 1.0;
                }
            }
            Ok(top_indices(&votes, l_c))
        })
        .collect()
}

/// Stage 3: per `(row, user)`, fits the shared columns and runs
/// `l_r[k] − |common|` further OMP steps for the user-specific columns.
///
/// Returns `cols[k][i]` for row `rows[i]`, sorted ascending.
pub fn estimate_user_cols(
    problem: &EstimationProblem<'_>,
    rows: &[usize],
    common_cols: &[Vec<usize>],
    l_r: &[usize],
) -> Result<Vec<Vec<Vec<usize>>>> {
    if common_cols.len() != rows.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} shared column sets for {} rows",
            common_cols.len(),
            rows.len()
        )));
    }
    l_r.iter()
        .enumerate()
        .map(|(k, &l_r_k)| complete_user_cols(problem, k, rows, common_cols, l_r_k))
        .collect()
}

/// Stage 3 for a single user.
pub(crate) fn complete_user_cols(
    problem: &EstimationProblem<'_>,
    user: usize,
    rows: &[usize],
    common_cols: &[Vec<usize>],
    l_r: usize,
) -> Result<Vec<Vec<usize>>> {
    rows.iter()
        .zip(common_cols)
        .map(|(&row, common)| {
            let extra = l_r.checked_sub(common.len()).ok_or_else(|| {
                Error::InvalidGeometry(format!(
                    "user {user}: {} shared columns exceed L_r={l_r}",
                    common.len()
                ))
            })?;
            let mut cols = omp_inner(&problem.column(user, row), problem.sensing, extra, common)?.support;
            cols.sort_unstable();
            Ok(cols)
        })
        .collect()
}

/// DS-OMP cascaded channel estimation.
///
/// Stage 2 is skipped when `l_c = 0`, which reduces the estimator to the
/// row-structured scheme.
pub fn ds_omp(problem: &EstimationProblem<'_>, levels: &SparsityLevels) -> Result<EstimationResult> {
    levels.check(problem)?;
    let rows = estimate_row_support(problem.measurements, levels.l_g)?;
    let common_cols = estimate_common_cols(problem, &rows, &levels.l_r, levels.l_c)?;
    let user_cols = estimate_user_cols(problem, &rows, &common_cols, &levels.l_r)?;
    let support = SupportEstimate {
        rows: vec![rows; problem.users()],
        common_cols,
        user_cols,
    };
    ls_reconstruct(problem, support)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::build_dictionary;
    use crate::channel::{ChannelRealization, GainModel, SystemGeometry};
    use crate::pilot::{build_sensing, gen_reflecting, measure, MeasurementSet, SensingMatrix};
    use crate::{CMatrix, CVector};
    use num_complex::Complex64;

    struct Setup {
        real: ChannelRealization,
        meas: MeasurementSet,
        sensing: SensingMatrix,
        um: crate::angular::Dictionary,
        un: crate::angular::Dictionary,
    }

    impl Setup {
        fn new(geom: SystemGeometry, q: usize, snr_db: f64, seed: u64) -> Self {
            let um = build_dictionary(geom.bs);
            let un = build_dictionary(geom.ris);
            let real = ChannelRealization::generate(&geom, &GainModel::default(), seed, &um, &un).unwrap();
            let sensing = build_sensing(&gen_reflecting(geom.n(), q, seed ^ 0xabc).unwrap(), &un).unwrap();
            let meas = measure(&real, &sensing, snr_db, seed ^ 0xdef).unwrap();
            Self {
                real,
                meas,
                sensing,
                um,
                un,
            }
        }

        fn problem(&self) -> EstimationProblem<'_> {
            EstimationProblem {
                measurements: &self.meas,
                sensing: &self.sensing,
                bs_dict: &self.um,
                ris_dict: &self.un,
            }
        }
    }

    fn single_user_measurements(y: CMatrix) -> MeasurementSet {
        let q = y.nrows();
        MeasurementSet {
            noise: vec![CMatrix::zeros(q, y.ncols())],
            y_tilde: vec![y],
            noise_power: vec![0.0],
            snr_db: f64::INFINITY,
            q_slots: q,
        }
    }

    #[test]
    fn single_nonzero_column_is_the_row() {
        let mut y = CMatrix::zeros(5, 8);
        y.set_column(6, &CVector::from_element(5, Complex64::new(0.1, 0.2)));
        let meas = single_user_measurements(y);
        assert_eq!(estimate_row_support(&meas, 1).unwrap(), vec![6]);
        assert!(estimate_row_support(&meas, 9).is_err());
    }

    #[test]
    fn row_power_is_a_sum_over_users() {
        let s = Setup::new(SystemGeometry::desk_scale(2), 16, 0.0, 4);
        let out = estimate_row_support_with_work(&s.meas, 3).unwrap();
        let mut summed = CMatrix::zeros(16, 16);
        for y in &s.meas.y_tilde {
            summed += y.component_mul(&y.conjugate());
        }
        for m in 0..16 {
            let col: f64 = summed.column(m).iter().map(|v| v.re).sum();
            assert!((col - out.power[m]).abs() <= 1e-12 * col.abs().max(1e-300));
        }
        assert_eq!(out.work, 8 * 16 * 16);
    }

    #[test]
    fn noiseless_rows_are_exact() {
        for seed in 0..20 {
            let s = Setup::new(SystemGeometry::desk_scale(2), 8, f64::INFINITY, seed);
            assert_eq!(estimate_row_support(&s.meas, 3).unwrap(), s.real.supports.rows);
        }
    }

    #[test]
    fn no_common_paths_means_empty_sets() {
        let s = Setup::new(SystemGeometry::desk_scale(2), 16, 0.0, 1);
        let p = s.problem();
        let rows = estimate_row_support(&s.meas, 3).unwrap();
        let common = estimate_common_cols(&p, &rows, &[4; 8], 0).unwrap();
        assert_eq!(common, vec![Vec::<usize>::new(); 3]);
    }

    #[test]
    fn single_voter_takes_its_own_picks() {
        let mut geom = SystemGeometry::desk_scale(2);
        geom.k_users = 1;
        let s = Setup::new(geom, 24, 10.0, 3);
        let p = s.problem();
        let rows = estimate_row_support(&s.meas, 3).unwrap();
        let common = estimate_common_cols(&p, &rows, &[4], 2).unwrap();
        for (i, &row) in rows.iter().enumerate() {
            let picks = omp_inner(&p.column(0, row), &s.sensing, 4, &[]).unwrap().support;
            let mut expected = picks.clone();
            expected.sort_unstable();
            expected.truncate(2);
            assert_eq!(common[i], expected);
        }
    }

    #[test]
    fn fully_common_runs_no_extra_iterations() {
        let s = Setup::new(SystemGeometry::desk_scale(4), 24, 0.0, 2);
        let p = s.problem();
        let rows = estimate_row_support(&s.meas, 3).unwrap();
        let common = estimate_common_cols(&p, &rows, &[4; 8], 4).unwrap();
        let cols = estimate_user_cols(&p, &rows, &common, &[4; 8]).unwrap();
        for per_user in &cols {
            assert_eq!(per_user, &common);
        }
    }

    #[test]
    fn zero_common_is_plain_per_user_omp() {
        let s = Setup::new(SystemGeometry::desk_scale(0), 24, 0.0, 6);
        let p = s.problem();
        let rows = estimate_row_support(&s.meas, 3).unwrap();
        let empty = vec![Vec::new(); 3];
        let cols = estimate_user_cols(&p, &rows, &empty, &[4; 8]).unwrap();
        for (k, per_user) in cols.iter().enumerate() {
            for (i, &row) in rows.iter().enumerate() {
                let mut expected = omp_inner(&p.column(k, row), &s.sensing, 4, &[]).unwrap().support;
                expected.sort_unstable();
                assert_eq!(per_user[i], expected);
            }
        }
    }

    #[test]
    fn noiseless_common_columns_found() {
        let mut hits = 0;
        for seed in 0..100 {
            let s = Setup::new(SystemGeometry::desk_scale(2), 64, f64::INFINITY, 100 + seed);
            let p = s.problem();
            let rows = estimate_row_support(&s.meas, 3).unwrap();
            let common = estimate_common_cols(&p, &rows, &[4; 8], 2).unwrap();
            if rows == s.real.supports.rows && common == s.real.supports.common_cols {
                hits += 1;
            }
        }
        assert!(hits >= 95, "{hits}/100");
    }

    #[test]
    fn noiseless_user_columns_with_true_prefix() {
        let mut hits = 0;
        for seed in 0..100 {
            let s = Setup::new(SystemGeometry::desk_scale(2), 32, f64::INFINITY, 300 + seed);
            let p = s.problem();
            let truth = &s.real.supports;
            let cols = estimate_user_cols(&p, &truth.rows, &truth.common_cols, &[4; 8]).unwrap();
            if cols == truth.cols {
                hits += 1;
            }
        }
        assert!(hits >= 95, "{hits}/100");
    }

    #[test]
    fn ds_omp_keeps_common_inside_user_sets() {
        let s = Setup::new(SystemGeometry::desk_scale(2), 16, 0.0, 8);
        let out = ds_omp(&s.problem(), &SparsityLevels::from_geometry(&s.real.geom)).unwrap();
        assert!(out.support.common_contained());
        assert!(out.support.joint_rows().is_some());
        for h in &out.angular {
            let nnz = h.iter().filter(|v| v.norm() > 0.0).count();
            assert!(nnz <= 3 * 4);
        }
    }
}
