//! On-grid multipath channels with shared BS-side paths and partially
//! shared user-side scatterers.
//!
//! The RIS-BS channel `G` is common to all users. Each user channel
//! `h_k` has `l_r` paths, the first `l_c` of which arrive from scatterers
//! shared by every user. Because every angle lies on the dictionary grid,
//! each reflecting path pair `(l1, l2)` contributes exactly one non-zero
//! entry of the angular cascaded channel: row = BS grid point of `l1`,
//! column = wrapped sum of the RIS grid points of `l1` and `l2`.

mod fixture;

use std::collections::BTreeSet;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::angular::{steering_vector, to_angular, Dictionary, GridIndex, UpaShape};
use crate::{seed, CMatrix, CVector, Error, Result};

pub use fixture::{load_fixture, save_fixture, ChannelFixture, FIXTURE_FORMAT};

/// Shape of one experiment: arrays, users and path counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemGeometry {
    /// BS array, `M = bs.total()` antennas.
    pub bs: UpaShape,
    /// RIS array, `N = ris.total()` elements.
    pub ris: UpaShape,
    pub k_users: usize,
    /// Paths between RIS and BS.
    pub l_g: usize,
    /// Paths between each user and the RIS.
    pub l_r: usize,
    /// User-side paths shared by all users.
    pub l_c: usize,
}

impl SystemGeometry {
    /// Full-size geometry: 8x8 BS, 16x16 RIS,
    /// 16 users, 5 BS-side and 8 user-side paths.
    pub fn reference_scale(l_c: usize) -> Self {
        Self {
            bs: UpaShape::new(8, 8).unwrap(),
            ris: UpaShape::new(16, 16).unwrap(),
            k_users: 16,
            l_g: 5,
            l_r: 8,
            l_c,
        }
    }

    /// Reduced geometry for quick runs: 4x4 BS, 8x8 RIS, 8 users.
    pub fn desk_scale(l_c: usize) -> Self {
        Self {
            bs: UpaShape::new(4, 4).unwrap(),
            ris: UpaShape::new(8, 8).unwrap(),
            k_users: 8,
            l_g: 3,
            l_r: 4,
            l_c,
        }
    }

    pub fn m(&self) -> usize {
        self.bs.total()
    }

    pub fn n(&self) -> usize {
        self.ris.total()
    }

    pub fn with_l_c(mut self, l_c: usize) -> Self {
        self.l_c = l_c;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_users == 0 || self.l_g == 0 || self.l_r == 0 {
            return Err(Error::InvalidGeometry(format!(
                "need at least one user and one path per link (K={}, L_G={}, L_r={})",
                self.k_users, self.l_g, self.l_r
            )));
        }
        if self.l_c > self.l_r {
            return Err(Error::InvalidGeometry(format!(
                "common paths L_c={} exceed user paths L_r={}",
                self.l_c, self.l_r
            )));
        }
        if self.l_g > self.m() || self.l_g > self.n() {
            return Err(Error::InfeasibleGeometry(format!(
                "L_G={} distinct paths do not fit on a {} BS grid and {} RIS grid",
                self.l_g, self.bs, self.ris
            )));
        }
        if self.l_r > self.n() {
            return Err(Error::InfeasibleGeometry(format!(
                "L_r={} distinct paths do not fit on a {} RIS grid",
                self.l_r, self.ris
            )));
        }
        Ok(())
    }
}

/// Large-scale path loss `10⁻³·d^(−exponent)` on both hops.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainModel {
    /// BS-RIS distance in meters.
    pub d_br: f64,
    /// RIS-user distance in meters.
    pub d_ru: f64,
}

impl Default for GainModel {
    fn default() -> Self {
        Self {
            d_br: 10.0,
            d_ru: 100.0,
        }
    }
}

impl GainModel {
    pub const BS_RIS_EXPONENT: f64 = 2.2;
    pub const RIS_USER_EXPONENT: f64 = 2.8;

    pub fn bs_ris_magnitude(&self) -> f64 {
        1e-3 * self.d_br.powf(-Self::BS_RIS_EXPONENT)
    }

    pub fn ris_user_magnitude(&self) -> f64 {
        1e-3 * self.d_ru.powf(-Self::RIS_USER_EXPONENT)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |d: f64| d.is_finite() && d > 0.0;
        if !ok(self.d_br) || !ok(self.d_ru) {
            return Err(Error::InvalidGeometry(format!(
                "distances must be positive, got d_BR={} d_RU={}",
                self.d_br, self.d_ru
            )));
        }
        Ok(())
    }
}

/// One RIS-BS path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BsPath {
    pub gain: Complex64,
    /// Arrival direction at the BS.
    pub bs_grid: GridIndex,
    /// Departure direction at the RIS.
    pub ris_grid: GridIndex,
}

/// One user-RIS path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserPath {
    pub gain: Complex64,
    /// Arrival direction at the RIS.
    pub ris_grid: GridIndex,
    /// Whether the path belongs to the scatterer set shared by all users.
    pub common: bool,
}

/// Sampled propagation paths for `G` and every `h_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathSet {
    pub bs_side: Vec<BsPath>,
    /// `user_side[k]` lists user `k`'s paths, common ones first.
    pub user_side: Vec<Vec<UserPath>>,
}

impl PathSet {
    /// Checks counts, grid bounds, distinctness and the sharing structure.
    pub fn validate(&self, geom: &SystemGeometry) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidGeometry(msg));
        if self.bs_side.len() != geom.l_g {
            return bad(format!("{} BS-side paths, expected {}", self.bs_side.len(), geom.l_g));
        }
        if self.user_side.len() != geom.k_users {
            return bad(format!("{} users in path set, expected {}", self.user_side.len(), geom.k_users));
        }
        let mut rows = BTreeSet::new();
        for p in &self.bs_side {
            if !p.bs_grid.is_within(geom.bs) || !p.ris_grid.is_within(geom.ris) {
                return bad(format!("BS-side path {p:?} is off the grid"));
            }
            if !rows.insert(p.bs_grid) {
                return bad(format!("duplicate BS arrival direction {:?}", p.bs_grid));
            }
        }
        let mut shared: Option<Vec<GridIndex>> = None;
        for (k, paths) in self.user_side.iter().enumerate() {
            if paths.len() != geom.l_r {
                return bad(format!("user {k} has {} paths, expected {}", paths.len(), geom.l_r));
            }
            let common: Vec<GridIndex> = paths.iter().filter(|p| p.common).map(|p| p.ris_grid).collect();
            if common.len() != geom.l_c {
                return bad(format!("user {k} has {} common paths, expected {}", common.len(), geom.l_c));
            }
            let mut seen = BTreeSet::new();
            for p in paths {
                if !p.ris_grid.is_within(geom.ris) {
                    return bad(format!("user {k} path {p:?} is off the grid"));
                }
                if !seen.insert(p.ris_grid) {
                    return bad(format!("user {k} has duplicate direction {:?}", p.ris_grid));
                }
            }
            let mut sorted = common;
            sorted.sort();
            match &shared {
                None => shared = Some(sorted),
                Some(first) if *first != sorted => {
                    return bad(format!("user {k} common directions differ from user 0"));
                }
                Some(_) => {}
            }
        }
        Ok(())
    }
}

fn random_phase<R: Rng>(rng: &mut R, magnitude: f64) -> Complex64 {
    Complex64::from_polar(magnitude, TAU * rng.random::<f64>())
}

fn draw_grid<R: Rng>(rng: &mut R, shape: UpaShape, amount: usize) -> Vec<GridIndex> {
    index::sample(rng, shape.total(), amount)
        .into_iter()
        .map(|flat| GridIndex::from_flat(shape, flat))
        .collect()
}

/// Samples on-grid paths with the shared-scatterer structure.
///
/// Directions are drawn uniformly without replacement: BS-side arrival
/// and departure directions on their grids, one set of `l_c` common RIS
/// directions shared by all users, and `l_r − l_c` further directions
/// per user avoiding that user's common set. Distinct user directions
/// give distinct cascaded columns for every BS-side path, since adding a
/// fixed grid offset is a bijection. Gain phases are uniform.
pub fn sample_paths(geom: &SystemGeometry, gains: &GainModel, seed: u64) -> Result<PathSet> {
    geom.validate()?;
    gains.validate()?;
    let mut rng = seed::rng(seed);

    let bs_dirs = draw_grid(&mut rng, geom.bs, geom.l_g);
    let ris_dirs = draw_grid(&mut rng, geom.ris, geom.l_g);
    let bs_side = bs_dirs
        .into_iter()
        .zip(ris_dirs)
        .map(|(bs_grid, ris_grid)| BsPath {
            gain: random_phase(&mut rng, gains.bs_ris_magnitude()),
            bs_grid,
            ris_grid,
        })
        .collect();

    let n = geom.n();
    let common_flat: Vec<usize> = index::sample(&mut rng, n, geom.l_c).into_vec();
    let mut free: Vec<usize> = (0..n).filter(|i| !common_flat.contains(i)).collect();
    free.sort_unstable();
    let specific = geom.l_r - geom.l_c;

    let user_side = (0..geom.k_users)
        .map(|_| {
            let mut paths: Vec<UserPath> = common_flat
                .iter()
                .map(|&flat| UserPath {
                    gain: random_phase(&mut rng, gains.ris_user_magnitude()),
                    ris_grid: GridIndex::from_flat(geom.ris, flat),
                    common: true,
                })
                .collect();
            for pick in index::sample(&mut rng, free.len(), specific) {
                paths.push(UserPath {
                    gain: random_phase(&mut rng, gains.ris_user_magnitude()),
                    ris_grid: GridIndex::from_flat(geom.ris, free[pick]),
                    common: false,
                });
            }
            paths
        })
        .collect();

    let paths = PathSet { bs_side, user_side };
    debug_assert!(paths.validate(geom).is_ok());
    Ok(paths)
}

/// RIS-BS channel `G = √(MN/L_G) Σ α·b(bs)·a(ris)ᵀ`.
pub fn assemble_g(paths: &PathSet, geom: &SystemGeometry) -> CMatrix {
    let (m, n) = (geom.m(), geom.n());
    let scale = ((m * n) as f64 / paths.bs_side.len().max(1) as f64).sqrt();
    let mut g = CMatrix::zeros(m, n);
    for p in &paths.bs_side {
        let b = steering_vector(p.bs_grid.frequency(geom.bs), geom.bs);
        let a = steering_vector(p.ris_grid.frequency(geom.ris), geom.ris);
        g += b * a.transpose() * (p.gain * scale);
    }
    g
}

/// User channel `h_k = √(N/L_r) Σ α·a(ris)`.
pub fn assemble_h(paths: &PathSet, user: usize, geom: &SystemGeometry) -> Result<CVector> {
    let user_paths = paths.user_side.get(user).ok_or(Error::UserOutOfRange {
        index: user,
        users: paths.user_side.len(),
    })?;
    let n = geom.n();
    let scale = (n as f64 / user_paths.len().max(1) as f64).sqrt();
    let mut h = CVector::zeros(n);
    for p in user_paths {
        h += steering_vector(p.ris_grid.frequency(geom.ris), geom.ris) * (p.gain * scale);
    }
    Ok(h)
}

/// Cascaded channel `G·diag(h)`: column `n` of `G` scaled by `h[n]`.
pub fn cascade(g: &CMatrix, h: &CVector) -> Result<CMatrix> {
    if g.ncols() != h.len() {
        return Err(Error::ShapeMismatch(format!(
            "G has {} columns but h has {} entries",
            g.ncols(),
            h.len()
        )));
    }
    let mut out = g.clone();
    for (mut col, &hn) in out.column_iter_mut().zip(h.iter()) {
        col *= hn;
    }
    Ok(out)
}

/// Exact non-zero pattern of the angular cascaded channels.
///
/// `cols[k][i]` holds the non-zero columns of user `k` in row `rows[i]`.
/// All sets are sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrueSupports {
    pub rows: Vec<usize>,
    pub cols: Vec<Vec<Vec<usize>>>,
    /// Columns produced by the common paths, per row.
    pub common_cols: Vec<Vec<usize>>,
}

pub fn true_supports(paths: &PathSet, geom: &SystemGeometry) -> TrueSupports {
    let mut order: Vec<usize> = (0..paths.bs_side.len()).collect();
    order.sort_by_key(|&l1| paths.bs_side[l1].bs_grid.flat(geom.bs));
    let rows = order
        .iter()
        .map(|&l1| paths.bs_side[l1].bs_grid.flat(geom.bs))
        .collect();

    let column_set = |l1: usize, user_paths: &mut dyn Iterator<Item = &UserPath>| -> Vec<usize> {
        let shift = paths.bs_side[l1].ris_grid;
        let mut cols: Vec<usize> = user_paths
            .map(|p| shift.wrapping_add(p.ris_grid, geom.ris).flat(geom.ris))
            .collect();
        cols.sort_unstable();
        cols
    };

    let cols = paths
        .user_side
        .iter()
        .map(|user_paths| {
            order
                .iter()
                .map(|&l1| column_set(l1, &mut user_paths.iter()))
                .collect()
        })
        .collect();
    let common_cols = match paths.user_side.first() {
        Some(user_paths) => order
            .iter()
            .map(|&l1| column_set(l1, &mut user_paths.iter().filter(|p| p.common)))
            .collect(),
        None => vec![Vec::new(); order.len()],
    };
    TrueSupports {
        rows,
        cols,
        common_cols,
    }
}

/// One complete channel draw: spatial, cascaded and angular channels
/// with their ground-truth supports.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub geom: SystemGeometry,
    pub paths: PathSet,
    pub g: CMatrix,
    pub h_users: Vec<CVector>,
    pub cascaded: Vec<CMatrix>,
    pub angular: Vec<CMatrix>,
    pub supports: TrueSupports,
}

impl ChannelRealization {
    /// Samples paths under `seed` and assembles every channel.
    pub fn generate(
        geom: &SystemGeometry,
        gains: &GainModel,
        seed: u64,
        um: &Dictionary,
        un: &Dictionary,
    ) -> Result<Self> {
        let paths = sample_paths(geom, gains, seed)?;
        Self::from_paths(geom, paths, um, un)
    }

    /// Assembles all channels from already sampled paths.
    pub fn from_paths(
        geom: &SystemGeometry,
        paths: PathSet,
        um: &Dictionary,
        un: &Dictionary,
    ) -> Result<Self> {
        geom.validate()?;
        paths.validate(geom)?;
        if um.shape() != geom.bs || un.shape() != geom.ris {
            return Err(Error::ShapeMismatch(format!(
                "dictionaries {}/{} do not match arrays {}/{}",
                um.shape(),
                un.shape(),
                geom.bs,
                geom.ris
            )));
        }
        let g = assemble_g(&paths, geom);
        let h_users = (0..geom.k_users)
            .map(|k| assemble_h(&paths, k, geom))
            .collect::<Result<Vec<_>>>()?;
        let cascaded = h_users
            .iter()
            .map(|h| cascade(&g, h))
            .collect::<Result<Vec<_>>>()?;
        let angular = cascaded
            .iter()
            .map(|h| to_angular(h, um, un))
            .collect::<Result<Vec<_>>>()?;
        let supports = true_supports(&paths, geom);
        Ok(Self {
            geom: *geom,
            paths,
            g,
            h_users,
            cascaded,
            angular,
            supports,
        })
    }
}
