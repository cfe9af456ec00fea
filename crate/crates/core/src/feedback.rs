//! Bit-exact limited-feedback messages.
//!
//! Every scheme spends the same `12·N` bits per user:
//!
//! | scheme            | unit-vector reals   | norms / singular values |
//! |-------------------|---------------------|-------------------------|
//! | reg-inv-sel       | 8 × N bits          | 2 × 2N bits             |
//! | reg-inv (fixed)   | 4 × 2N bits         | 1 × 4N bits             |
//! | gmud              | 4 × 2N bits         | 2 × 2N bits             |
//!
//! Scalars go through a uniform midrise quantizer, unit-vector components on
//! `[-1, 1]` and magnitudes on `[0, 4]`. Fields are packed most significant
//! bit first in the order: vector components (`re, im` of each entry, row by
//! row), then the magnitudes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{vec_norm, Complex, ComplexMatrix, SvdFactorization};
use crate::precoding::{GmudFeedback, Scheme};

pub const UNIT_RANGE: (f64, f64) = (-1.0, 1.0);
pub const MAGNITUDE_RANGE: (f64, f64) = (0.0, 4.0);

/// Largest `N` accepted; the widest field is then `4N = 64` bits.
pub const MAX_N: u32 = 16;

/// Uniform midrise quantizer with `2^bits` cells on `[lo, hi)`.
///
/// Values outside the range are clamped to the first or last cell. Returns
/// the cell index and its midpoint.
pub fn quantize_scalar(v: f64, lo: f64, hi: f64, bits: u32) -> (u64, f64) {
    assert!((1..=64).contains(&bits), "quantizer width must be 1..=64 bits");
    assert!(lo < hi, "empty quantizer range");
    let max_index = if bits == 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    };
    let step = (hi - lo) / 2f64.powi(bits as i32);
    let cell = ((v - lo) / step).floor();
    let index = if cell.is_nan() || cell <= 0.0 {
        0
    } else {
        // float-to-int casts saturate
        (cell as u64).min(max_index)
    };
    (index, dequantize_scalar(index, lo, hi, bits))
}

/// Midpoint of cell `index`.
pub fn dequantize_scalar(index: u64, lo: f64, hi: f64, bits: u32) -> f64 {
    let step = (hi - lo) / 2f64.powi(bits as i32);
    lo + (index as f64 + 0.5) * step
}

/// Which message layout a scheme uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeedbackKind {
    RegInvSelection,
    RegInvFixed,
    Gmud,
}

impl From<Scheme> for FeedbackKind {
    fn from(s: Scheme) -> Self {
        match s {
            Scheme::RegInv => FeedbackKind::RegInvFixed,
            Scheme::RegInvSelection => FeedbackKind::RegInvSelection,
            Scheme::Gmud => FeedbackKind::Gmud,
        }
    }
}

/// Field widths of one message layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub vector_reals: u32,
    pub vector_bits: u32,
    pub magnitudes: u32,
    pub magnitude_bits: u32,
}

impl Layout {
    pub fn total_bits(&self) -> u32 {
        self.vector_reals * self.vector_bits + self.magnitudes * self.magnitude_bits
    }
}

/// The per-user bit budget `12·N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeedbackBudget {
    n: u32,
}

impl FeedbackBudget {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 || n > MAX_N {
            return Err(Error::Config(format!("N must be in 1..={MAX_N}, got {n}")));
        }
        Ok(Self { n })
    }

    /// Budget for a total of `bits` feedback bits per user (a multiple of 12).
    pub fn from_total_bits(bits: u32) -> Result<Self> {
        if !bits.is_multiple_of(12) {
            return Err(Error::Config(format!(
                "feedback budget must be a multiple of 12 bits, got {bits}"
            )));
        }
        Self::new(bits / 12)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn total_bits(&self) -> u32 {
        12 * self.n
    }

    pub fn layout(&self, kind: FeedbackKind) -> Layout {
        let n = self.n;
        match kind {
            FeedbackKind::RegInvSelection => Layout {
                vector_reals: 8,
                vector_bits: n,
                magnitudes: 2,
                magnitude_bits: 2 * n,
            },
            FeedbackKind::RegInvFixed => Layout {
                vector_reals: 4,
                vector_bits: 2 * n,
                magnitudes: 1,
                magnitude_bits: 4 * n,
            },
            FeedbackKind::Gmud => Layout {
                vector_reals: 4,
                vector_bits: 2 * n,
                magnitudes: 2,
                magnitude_bits: 2 * n,
            },
        }
    }
}

/// A channel report.
///
/// After [`decode`] the vector fields hold the raw reconstruction levels, so
/// that re-encoding a decoded message reproduces its bits exactly. The
/// accessors [`channel_rows`](Self::channel_rows) and
/// [`gmud_feedback`](Self::gmud_feedback) return renormalized unit vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FeedbackMessage {
    /// Both rows of the channel as unit vectors plus their norms.
    RegInvSelection {
        rows: [[Complex; 2]; 2],
        norms: [f64; 2],
    },
    /// One row of the channel as a unit vector plus its norm.
    RegInvFixed { row: [Complex; 2], norm: f64 },
    /// Principal right singular vector and both singular values.
    Gmud(GmudFeedback),
}

fn unit_and_norm(v: &[Complex; 2]) -> ([Complex; 2], f64) {
    let n = vec_norm(v);
    if n == 0.0 {
        return ([Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)], 0.0);
    }
    ([v[0] / n, v[1] / n], n)
}

fn renormalized(v: &[Complex; 2]) -> [Complex; 2] {
    unit_and_norm(v).0
}

impl FeedbackMessage {
    pub fn reg_inv_selection(h: &ComplexMatrix) -> Self {
        let (r0, n0) = unit_and_norm(&h.row2(0));
        let (r1, n1) = unit_and_norm(&h.row2(1));
        FeedbackMessage::RegInvSelection {
            rows: [r0, r1],
            norms: [n0, n1],
        }
    }

    pub fn reg_inv_fixed(h: &ComplexMatrix, row: usize) -> Self {
        let (row, norm) = unit_and_norm(&h.row2(row));
        FeedbackMessage::RegInvFixed { row, norm }
    }

    pub fn gmud(svd: &SvdFactorization) -> Self {
        FeedbackMessage::Gmud(GmudFeedback::from_svd(svd))
    }

    pub fn kind(&self) -> FeedbackKind {
        match self {
            FeedbackMessage::RegInvSelection { .. } => FeedbackKind::RegInvSelection,
            FeedbackMessage::RegInvFixed { .. } => FeedbackKind::RegInvFixed,
            FeedbackMessage::Gmud(_) => FeedbackKind::Gmud,
        }
    }

    /// Channel rows rebuilt as `norm · unit vector`.
    pub fn channel_rows(&self) -> Vec<[Complex; 2]> {
        let scaled = |v: &[Complex; 2], n: f64| {
            let u = renormalized(v);
            [u[0] * n, u[1] * n]
        };
        match self {
            FeedbackMessage::RegInvSelection { rows, norms } => {
                vec![scaled(&rows[0], norms[0]), scaled(&rows[1], norms[1])]
            }
            FeedbackMessage::RegInvFixed { row, norm } => vec![scaled(row, *norm)],
            FeedbackMessage::Gmud(_) => Vec::new(),
        }
    }

    /// GMUD report with `v1` renormalized.
    pub fn gmud_feedback(&self) -> Option<GmudFeedback> {
        match self {
            FeedbackMessage::Gmud(fb) => Some(GmudFeedback {
                v1: renormalized(&fb.v1),
                ..*fb
            }),
            _ => None,
        }
    }

    fn fields(&self) -> (Vec<f64>, Vec<f64>) {
        let reals = |v: &[Complex; 2]| [v[0].re, v[0].im, v[1].re, v[1].im];
        match self {
            FeedbackMessage::RegInvSelection { rows, norms } => {
                let mut comps = reals(&rows[0]).to_vec();
                comps.extend(reals(&rows[1]));
                (comps, norms.to_vec())
            }
            FeedbackMessage::RegInvFixed { row, norm } => (reals(row).to_vec(), vec![*norm]),
            FeedbackMessage::Gmud(fb) => (reals(&fb.v1).to_vec(), vec![fb.lambda1, fb.lambda2]),
        }
    }
}

/// Bit sequence, most significant bit of each field first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    /// Appends the low `width` bits of `value`, most significant first.
    pub fn push_field(&mut self, value: u64, width: u32) {
        for k in (0..width).rev() {
            self.0.push((value >> k) & 1 == 1);
        }
    }

    fn read_field(&self, pos: &mut usize, width: u32) -> u64 {
        let mut v = 0u64;
        for _ in 0..width {
            v = (v << 1) | u64::from(self.0[*pos]);
            *pos += 1;
        }
        v
    }
}

impl From<Vec<bool>> for BitString {
    fn from(bits: Vec<bool>) -> Self {
        Self(bits)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Format(format!("invalid bit character '{other}'"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitString)
    }
}

/// Packs a message into exactly `12·N` bits.
pub fn encode(msg: &FeedbackMessage, budget: FeedbackBudget) -> BitString {
    let layout = budget.layout(msg.kind());
    let (comps, mags) = msg.fields();
    let mut out = BitString::new();
    for v in comps {
        let (idx, _) = quantize_scalar(v, UNIT_RANGE.0, UNIT_RANGE.1, layout.vector_bits);
        out.push_field(idx, layout.vector_bits);
    }
    for v in mags {
        let (idx, _) = quantize_scalar(v, MAGNITUDE_RANGE.0, MAGNITUDE_RANGE.1, layout.magnitude_bits);
        out.push_field(idx, layout.magnitude_bits);
    }
    debug_assert_eq!(out.len() as u32, budget.total_bits());
    out
}

/// Unpacks a message: every field becomes its reconstruction level and the
/// singular values are sorted descending. Unit vectors are renormalized by
/// the message accessors.
pub fn decode(bits: &BitString, kind: FeedbackKind, budget: FeedbackBudget) -> Result<FeedbackMessage> {
    let layout = budget.layout(kind);
    if bits.len() as u32 != layout.total_bits() {
        return Err(Error::Format(format!(
            "expected {} feedback bits, got {}",
            layout.total_bits(),
            bits.len()
        )));
    }
    let mut pos = 0;
    let comps: Vec<f64> = (0..layout.vector_reals)
        .map(|_| {
            let idx = bits.read_field(&mut pos, layout.vector_bits);
            dequantize_scalar(idx, UNIT_RANGE.0, UNIT_RANGE.1, layout.vector_bits)
        })
        .collect();
    let mags: Vec<f64> = (0..layout.magnitudes)
        .map(|_| {
            let idx = bits.read_field(&mut pos, layout.magnitude_bits);
            dequantize_scalar(idx, MAGNITUDE_RANGE.0, MAGNITUDE_RANGE.1, layout.magnitude_bits)
        })
        .collect();

    let unit = |c: &[f64]| [Complex::new(c[0], c[1]), Complex::new(c[2], c[3])];
    Ok(match kind {
        FeedbackKind::RegInvSelection => FeedbackMessage::RegInvSelection {
            rows: [unit(&comps[0..4]), unit(&comps[4..8])],
            norms: [mags[0], mags[1]],
        },
        FeedbackKind::RegInvFixed => FeedbackMessage::RegInvFixed {
            row: unit(&comps[0..4]),
            norm: mags[0],
        },
        FeedbackKind::Gmud => FeedbackMessage::Gmud(GmudFeedback {
            lambda1: mags[0].max(mags[1]),
            lambda2: mags[0].min(mags[1]),
            v1: unit(&comps[0..4]),
        }),
    })
}

/// `decode(encode(msg))`: what the transmitter sees after the feedback link.
pub fn quantize_message(msg: &FeedbackMessage, budget: FeedbackBudget) -> FeedbackMessage {
    decode(&encode(msg, budget), msg.kind(), budget).expect("encoder emits the decoder's layout")
}
