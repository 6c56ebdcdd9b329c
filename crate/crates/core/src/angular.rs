//! UPA steering vectors and the Kronecker-DFT angular dictionaries.
//!
//! Angles are handled through their normalized spatial frequencies
//! `d·sin(θ)cos(ψ)/λ` and `d·sin(ψ)/λ`, reduced modulo one. On-grid
//! frequencies `(i1/n1, i2/n2)` are carried as integer [`GridIndex`]
//! values so that sums of angles wrap exactly.
//!
//! Flat element and column indices are axis-1 major: `a·n2 + b`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{CMatrix, CVector, Error, Result};

/// Dimensions of a uniform planar array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawShape", into = "RawShape")]
pub struct UpaShape {
    n1: usize,
    n2: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawShape {
    n1: usize,
    n2: usize,
}

impl TryFrom<RawShape> for UpaShape {
    type Error = Error;

    fn try_from(raw: RawShape) -> Result<Self> {
        UpaShape::new(raw.n1, raw.n2)
    }
}

impl From<UpaShape> for RawShape {
    fn from(shape: UpaShape) -> Self {
        RawShape {
            n1: shape.n1,
            n2: shape.n2,
        }
    }
}

impl UpaShape {
    pub fn new(n1: usize, n2: usize) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(Error::InvalidShape { n1, n2 });
        }
        Ok(Self { n1, n2 })
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    /// Number of elements, `n1·n2`.
    pub fn total(&self) -> usize {
        self.n1 * self.n2
    }
}

impl std::fmt::Display for UpaShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.n1, self.n2)
    }
}

/// Normalized spatial frequencies along both array axes, each in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialFrequencyPair {
    f1: f64,
    f2: f64,
}

impl SpatialFrequencyPair {
    pub fn new(f1: f64, f2: f64) -> Result<Self> {
        let valid = |f: f64| (0.0..1.0).contains(&f);
        if !valid(f1) || !valid(f2) {
            return Err(Error::InvalidFrequency { f1, f2 });
        }
        Ok(Self { f1, f2 })
    }

    pub fn f1(&self) -> f64 {
        self.f1
    }

    pub fn f2(&self) -> f64 {
        self.f2
    }
}

/// Integer coordinates of an on-grid frequency pair `(i1/n1, i2/n2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridIndex {
    pub i1: usize,
    pub i2: usize,
}

impl GridIndex {
    pub fn from_flat(shape: UpaShape, flat: usize) -> Self {
        debug_assert!(flat < shape.total());
        Self {
            i1: flat / shape.n2,
            i2: flat % shape.n2,
        }
    }

    pub fn flat(&self, shape: UpaShape) -> usize {
        self.i1 * shape.n2 + self.i2
    }

    /// Grid point of the frequency sum, wrapped per axis.
    pub fn wrapping_add(&self, other: GridIndex, shape: UpaShape) -> GridIndex {
        GridIndex {
            i1: (self.i1 + other.i1) % shape.n1,
            i2: (self.i2 + other.i2) % shape.n2,
        }
    }

    pub fn frequency(&self, shape: UpaShape) -> SpatialFrequencyPair {
        SpatialFrequencyPair {
            f1: self.i1 as f64 / shape.n1 as f64,
            f2: self.i2 as f64 / shape.n2 as f64,
        }
    }

    pub fn is_within(&self, shape: UpaShape) -> bool {
        self.i1 < shape.n1 && self.i2 < shape.n2
    }
}

/// Normalized steering vector of a UPA towards `freq`.
///
/// Entry `a·n2 + b` is `exp(-j2π(f1·a + f2·b)) / √(n1·n2)`, i.e. the
/// Kronecker product of the two per-axis phase ramps.
pub fn steering_vector(freq: SpatialFrequencyPair, shape: UpaShape) -> CVector {
    let scale = 1.0 / (shape.total() as f64).sqrt();
    CVector::from_fn(shape.total(), |idx, _| {
        let (a, b) = (idx / shape.n2, idx % shape.n2);
        let cycles = (freq.f1 * a as f64 + freq.f2 * b as f64).fract();
        Complex64::from_polar(scale, -TAU * cycles)
    })
}

/// Unitary angular dictionary of a UPA.
///
/// Column `i1·n2 + i2` is the steering vector at `(i1/n1, i2/n2)`,
/// which makes the matrix the Kronecker product of two normalized DFT
/// matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    shape: UpaShape,
    u: CMatrix,
}

impl Dictionary {
    pub fn shape(&self) -> UpaShape {
        self.shape
    }

    pub fn total(&self) -> usize {
        self.shape.total()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.u
    }
}

pub fn build_dictionary(shape: UpaShape) -> Dictionary {
    let total = shape.total();
    let mut u = CMatrix::zeros(total, total);
    for col in 0..total {
        let freq = GridIndex::from_flat(shape, col).frequency(shape);
        u.set_column(col, &steering_vector(freq, shape));
    }
    Dictionary { shape, u }
}

fn check_dims(h: &CMatrix, um: &Dictionary, un: &Dictionary) -> Result<()> {
    if h.nrows() != um.total() || h.ncols() != un.total() {
        return Err(Error::ShapeMismatch(format!(
            "channel is {}x{} but dictionaries are {} (BS) and {} (RIS)",
            h.nrows(),
            h.ncols(),
            um.total(),
            un.total()
        )));
    }
    Ok(())
}

/// Spatial to angular: `U_Mᴴ · H · conj(U_N)`, the solution of `H = U_M H̃ U_Nᵀ`.
pub fn to_angular(h_spatial: &CMatrix, um: &Dictionary, un: &Dictionary) -> Result<CMatrix> {
    check_dims(h_spatial, um, un)?;
    Ok(um.u.adjoint() * h_spatial * un.u.conjugate())
}

/// Angular to spatial: `U_M · H̃ · U_Nᵀ`.
///
/// Estimated angular channels have only a handful of non-zero rows, so
/// the product is formed over those rows alone when that is cheaper.
pub fn from_angular(h_angular: &CMatrix, um: &Dictionary, un: &Dictionary) -> Result<CMatrix> {
    check_dims(h_angular, um, un)?;
    let zero = Complex64::new(0.0, 0.0);
    let rows: Vec<usize> = (0..h_angular.nrows())
        .filter(|&r| h_angular.row(r).iter().any(|&v| v != zero))
        .collect();
    if rows.len() * 2 >= h_angular.nrows() {
        return Ok(&um.u * h_angular * un.u.transpose());
    }
    if rows.is_empty() {
        return Ok(CMatrix::zeros(um.total(), un.total()));
    }
    let reduced = h_angular.select_rows(rows.iter()) * un.u.transpose();
    Ok(um.u.select_columns(rows.iter()) * reduced)
}
