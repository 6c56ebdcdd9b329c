//! Experiment configuration.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::angular::UpaShape;
use crate::channel::{GainModel, SystemGeometry};
use crate::estimators::EstimatorKind;
use crate::{Error, Result};

/// One Monte-Carlo sweep over pilot lengths and common-path counts.
///
/// Defaults are the full-size geometry: 8x8 BS, 16x16 RIS, 16
/// users, `L_G = 5`, `L_r = 8`, `d_BR = 10 m`, `d_RU = 100 m`, 0 dB SNR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub bs: UpaShape,
    pub ris: UpaShape,
    pub k_users: usize,
    pub l_g: usize,
    pub l_r: usize,
    pub gains: GainModel,
    /// SNR in dB; `inf` for noiseless measurements.
    #[serde(serialize_with = "ser_snr", deserialize_with = "de_snr")]
    pub snr_db: f64,
    pub q_values: Vec<usize>,
    pub l_c_values: Vec<usize>,
    pub n_trials: usize,
    pub master_seed: u64,
    pub estimators: Vec<EstimatorKind>,
    /// Write mean estimator run times into the CSV. Off by default since
    /// timings make the output non-reproducible.
    pub record_wall_time: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let geom = SystemGeometry::reference_scale(0);
        Self {
            bs: geom.bs,
            ris: geom.ris,
            k_users: geom.k_users,
            l_g: geom.l_g,
            l_r: geom.l_r,
            gains: GainModel::default(),
            snr_db: 0.0,
            q_values: vec![16, 32, 48, 64],
            l_c_values: vec![0, 4],
            n_trials: 100,
            master_seed: 1,
            estimators: EstimatorKind::ALL.to_vec(),
            record_wall_time: false,
        }
    }
}

impl ExperimentConfig {
    /// Config with the array and path counts of `geom` and a single `l_c`.
    pub fn for_geometry(geom: &SystemGeometry) -> Self {
        Self {
            bs: geom.bs,
            ris: geom.ris,
            k_users: geom.k_users,
            l_g: geom.l_g,
            l_r: geom.l_r,
            l_c_values: vec![geom.l_c],
            ..Self::default()
        }
    }

    pub fn geometry(&self, l_c: usize) -> SystemGeometry {
        SystemGeometry {
            bs: self.bs,
            ris: self.ris,
            k_users: self.k_users,
            l_g: self.l_g,
            l_r: self.l_r,
            l_c,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if self.n_trials == 0 {
            return bad("n_trials must be at least 1");
        }
        if self.q_values.is_empty() {
            return bad("q_values is empty");
        }
        if self.q_values.contains(&0) {
            return bad("every pilot length in q_values must be at least 1");
        }
        if self.l_c_values.is_empty() {
            return bad("l_c_values is empty");
        }
        if self.estimators.is_empty() {
            return bad("estimators is empty");
        }
        if self.snr_db.is_nan() || self.snr_db == f64::NEG_INFINITY {
            return bad("snr_db must be finite or inf");
        }
        self.gains.validate()?;
        for &l_c in &self.l_c_values {
            self.geometry(l_c).validate()?;
        }
        Ok(())
    }
}

fn ser_snr<S: Serializer>(value: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if value.is_finite() {
        s.serialize_f64(*value)
    } else {
        s.serialize_str(if *value > 0.0 { "inf" } else { "-inf" })
    }
}

fn de_snr<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Snr {
        Number(f64),
        Int(i64),
        Text(String),
    }
    match Snr::deserialize(d)? {
        Snr::Number(v) => Ok(v),
        Snr::Int(v) => Ok(v as f64),
        Snr::Text(t) => t
            .trim()
            .parse::<f64>()
            .map_err(|_| serde::de::Error::custom(format!("invalid SNR `{t}`"))),
    }
}
