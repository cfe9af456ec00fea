//! Rayleigh block-fading channels.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{svd2x2, Complex, ComplexMatrix, SvdFactorization};

pub const USERS: usize = 2;
pub const TX_ANTENNAS: usize = 2;
pub const RX_ANTENNAS: usize = 2;

/// One circularly-symmetric complex Gaussian sample with variance `var`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex {
    let sd = (0.5 * var).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(sd * re, sd * im)
}

/// Matrix with i.i.d. CN(0, 1) entries.
pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    let data = (0..rows * cols).map(|_| complex_gaussian(rng, 1.0)).collect();
    ComplexMatrix::new(rows, cols, data).expect("gaussian samples are finite")
}

/// A user's channel together with its exact SVD.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserChannel {
    pub h: ComplexMatrix,
    pub svd: SvdFactorization,
}

impl UserChannel {
    pub fn new(h: ComplexMatrix) -> Result<Self> {
        let svd = svd2x2(&h)?;
        Ok(Self { h, svd })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSet {
    pub users: Vec<UserChannel>,
}

impl ChannelSet {
    pub fn new(matrices: Vec<ComplexMatrix>) -> Result<Self> {
        let users = matrices
            .into_iter()
            .map(UserChannel::new)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { users })
    }

    pub fn matrices(&self) -> Vec<ComplexMatrix> {
        self.users.iter().map(|u| u.h.clone()).collect()
    }
}

/// Draws `USERS` independent `RX_ANTENNAS x TX_ANTENNAS` channels.
pub fn gen_channels<R: Rng + ?Sized>(rng: &mut R) -> ChannelSet {
    let matrices = (0..USERS)
        .map(|_| gaussian_matrix(rng, RX_ANTENNAS, TX_ANTENNAS))
        .collect();
    ChannelSet::new(matrices).expect("2x2 channels always decompose")
}
