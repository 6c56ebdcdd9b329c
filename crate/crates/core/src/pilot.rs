//! RIS reflection patterns, the sensing matrix and noisy pilot measurements.
//!
//! With unit pilots and orthogonal users, the measurements of user `k`
//! after the BS-side angular transform are `Ỹ_k = Θ̃·H̃_kᴴ + W̃_k`
//! (`Q×M`), where `Θ̃ = (U_Nᵀ Θ)ᴴ` is shared by every user. The
//! measurements are synthesized directly in that effective domain.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::angular::Dictionary;
use crate::channel::ChannelRealization;
use crate::{seed, CMatrix, Error, Result};

/// RIS reflection coefficients over `Q` slots, `N×Q`, entries `±1/√N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectingMatrix {
    theta: CMatrix,
}

impl ReflectingMatrix {
    pub fn matrix(&self) -> &CMatrix {
        &self.theta
    }

    pub fn elements(&self) -> usize {
        self.theta.nrows()
    }

    pub fn slots(&self) -> usize {
        self.theta.ncols()
    }
}

/// Draws i.i.d. equiprobable `±1/√N` coefficients.
///
/// Columns are drawn in slot order, so the pattern for `Q` slots is a
/// prefix of the pattern for any larger `Q` under the same seed.
pub fn gen_reflecting(n: usize, q: usize, seed: u64) -> Result<ReflectingMatrix> {
    if n == 0 || q == 0 {
        return Err(Error::InvalidGeometry(format!(
            "reflecting matrix needs N >= 1 and Q >= 1, got N={n} Q={q}"
        )));
    }
    let mut rng = seed::rng(seed);
    let level = 1.0 / (n as f64).sqrt();
    let mut theta = CMatrix::zeros(n, q);
    for slot in 0..q {
        for element in 0..n {
            let sign = if rng.random::<bool>() { level } else { -level };
            theta[(element, slot)] = Complex64::new(sign, 0.0);
        }
    }
    Ok(ReflectingMatrix { theta })
}

/// `Q×N` sensing matrix `Θ̃ = (U_Nᵀ Θ)ᴴ`, with its adjoint cached for
/// correlation steps.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingMatrix {
    theta_tilde: CMatrix,
    adjoint: CMatrix,
}

impl SensingMatrix {
    /// Wraps an arbitrary `Q×N` matrix as a sensing matrix.
    pub fn from_matrix(theta_tilde: CMatrix) -> Self {
        let adjoint = theta_tilde.adjoint();
        Self {
            theta_tilde,
            adjoint,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.theta_tilde
    }

    /// `Θ̃ᴴ`, `N×Q`.
    pub fn adjoint(&self) -> &CMatrix {
        &self.adjoint
    }

    /// Number of pilot slots `Q`.
    pub fn slots(&self) -> usize {
        self.theta_tilde.nrows()
    }

    /// Number of angular columns `N`.
    pub fn atoms(&self) -> usize {
        self.theta_tilde.ncols()
    }
}

pub fn build_sensing(theta: &ReflectingMatrix, un: &Dictionary) -> Result<SensingMatrix> {
    if theta.elements() != un.total() {
        return Err(Error::ShapeMismatch(format!(
            "reflecting matrix has {} elements but the RIS dictionary has {}",
            theta.elements(),
            un.total()
        )));
    }
    let adjoint = un.matrix().transpose() * theta.matrix();
    Ok(SensingMatrix {
        theta_tilde: adjoint.adjoint(),
        adjoint,
    })
}

/// Effective pilot measurements of all users.
#[derive(Debug, Clone)]
pub struct MeasurementSet {
    /// `Ỹ_k`, each `Q×M`.
    pub y_tilde: Vec<CMatrix>,
    /// The noise realization `W̃_k` that was added.
    pub noise: Vec<CMatrix>,
    /// Per-user noise power `σ²_k`; zero when noiseless.
    pub noise_power: Vec<f64>,
    pub snr_db: f64,
    pub q_slots: usize,
}

impl MeasurementSet {
    pub fn users(&self) -> usize {
        self.y_tilde.len()
    }

    /// Number of measurement columns, one per BS angular row.
    pub fn bs_rows(&self) -> usize {
        self.y_tilde.first().map_or(0, |y| y.ncols())
    }

    /// Same measurements with every `Ỹ_k` multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for y in &mut out.y_tilde {
            *y *= Complex64::new(factor, 0.0);
        }
        out
    }
}

/// Measures a generated realization; see [`measure_channels`].
pub fn measure(
    realization: &ChannelRealization,
    sensing: &SensingMatrix,
    snr_db: f64,
    seed: u64,
) -> Result<MeasurementSet> {
    measure_channels(&realization.angular, sensing, snr_db, seed)
}

/// Forms `Ỹ_k = Θ̃·H̃_kᴴ + W̃_k` for every angular channel.
///
/// `W̃_k` is circularly-symmetric complex Gaussian with per-entry variance
/// `σ²_k = ‖Θ̃H̃_kᴴ‖²_F / (Q·M·10^(snr_db/10))`, calibrated per user.
/// `snr_db = +∞` gives noiseless measurements.
pub fn measure_channels(
    angular: &[CMatrix],
    sensing: &SensingMatrix,
    snr_db: f64,
    seed: u64,
) -> Result<MeasurementSet> {
    if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
        return Err(Error::Config(format!("SNR must be finite or +inf, got {snr_db}")));
    }
    let noiseless = snr_db == f64::INFINITY;
    let snr_linear = 10f64.powf(snr_db / 10.0);
    let mut rng = seed::rng(seed);

    let mut y_tilde = Vec::with_capacity(angular.len());
    let mut noise = Vec::with_capacity(angular.len());
    let mut noise_power = Vec::with_capacity(angular.len());
    for (user, h) in angular.iter().enumerate() {
        if h.ncols() != sensing.atoms() {
            return Err(Error::ShapeMismatch(format!(
                "user {user} channel has {} columns, sensing matrix has {}",
                h.ncols(),
                sensing.atoms()
            )));
        }
        let clean = sensing.matrix() * h.adjoint();
        let (q, m) = clean.shape();
        let (sigma2, w) = if noiseless {
            (0.0, CMatrix::zeros(q, m))
        } else {
            let energy = clean.norm_squared();
            if energy == 0.0 {
                return Err(Error::DegenerateSignal { user, snr_db });
            }
            let sigma2 = energy / ((q * m) as f64 * snr_linear);
            (sigma2, complex_gaussian(&mut rng, q, m, sigma2))
        };
        y_tilde.push(clean + &w);
        noise.push(w);
        noise_power.push(sigma2);
    }
    Ok(MeasurementSet {
        y_tilde,
        noise,
        noise_power,
        snr_db,
        q_slots: sensing.slots(),
    })
}

/// `rows×cols` matrix of i.i.d. `CN(0, variance)` entries.
pub fn complex_gaussian<R: Rng>(rng: &mut R, rows: usize, cols: usize, variance: f64) -> CMatrix {
    let std = (variance / 2.0).sqrt();
    let mut out = CMatrix::zeros(rows, cols);
    for c in 0..cols {
        for r in 0..rows {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            out[(r, c)] = Complex64::new(re * std, im * std);
        }
    }
    out
}
