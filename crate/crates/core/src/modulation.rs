//! Gray-mapped QPSK and 16QAM with unit average symbol energy.
//!
//! Bits are `u8` values 0 or 1. 16QAM takes two bits for the in-phase axis
//! followed by two for the quadrature axis, each pair Gray mapped as
//! `00 → -3, 01 → -1, 11 → +1, 10 → +3` before scaling by `1/√10`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Complex;

const QAM16_SCALE: f64 = 0.316_227_766_016_837_94; // 1/√10

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Modulation {
    Qpsk,
    Qam16,
}

impl Modulation {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            Modulation::Qpsk => 2,
            Modulation::Qam16 => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Modulation::Qpsk => "qpsk",
            Modulation::Qam16 => "16qam",
        }
    }

    /// Maps bits to symbols; the bit count must be a multiple of
    /// [`bits_per_symbol`](Self::bits_per_symbol).
    pub fn modulate(self, bits: &[u8]) -> Result<Vec<Complex>> {
        let k = self.bits_per_symbol();
        if !bits.len().is_multiple_of(k) {
            return Err(Error::Format(format!(
                "{} needs a multiple of {k} bits, got {}",
                self.name(),
                bits.len()
            )));
        }
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::Format(format!("bit value {b} is not 0 or 1")));
        }
        Ok(bits.chunks_exact(k).map(|c| self.map_symbol(c)).collect())
    }

    fn map_symbol(self, b: &[u8]) -> Complex {
        match self {
            Modulation::Qpsk => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                Complex::new(s * (1.0 - 2.0 * b[0] as f64), s * (1.0 - 2.0 * b[1] as f64))
            }
            Modulation::Qam16 => Complex::new(
                gray_level(b[0], b[1]) * QAM16_SCALE,
                gray_level(b[2], b[3]) * QAM16_SCALE,
            ),
        }
    }

    /// Minimum-distance slicing back to bits.
    pub fn demodulate(self, symbols: &[Complex]) -> Vec<u8> {
        let mut out = Vec::with_capacity(symbols.len() * self.bits_per_symbol());
        for &z in symbols {
            self.slice_into(z, &mut out);
        }
        out
    }

    pub(crate) fn slice_into(self, z: Complex, out: &mut Vec<u8>) {
        match self {
            Modulation::Qpsk => {
                out.push(u8::from(z.re < 0.0));
                out.push(u8::from(z.im < 0.0));
            }
            Modulation::Qam16 => {
                for x in [z.re / QAM16_SCALE, z.im / QAM16_SCALE] {
                    out.push(u8::from(x > 0.0));
                    out.push(u8::from(x.abs() < 2.0));
                }
            }
        }
    }
}

fn gray_level(msb: u8, lsb: u8) -> f64 {
    match (msb, lsb) {
        (0, 0) => -3.0,
        (0, 1) => -1.0,
        (1, 1) => 1.0,
        _ => 3.0,
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qpsk" | "4qam" => Ok(Modulation::Qpsk),
            "16qam" | "qam16" => Ok(Modulation::Qam16),
            other => Err(Error::Config(format!(
                "unknown modulation '{other}' (expected qpsk or 16qam)"
            ))),
        }
    }
}
