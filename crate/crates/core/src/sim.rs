//! Monte Carlo bit-error-rate simulation of the two-user downlink.
//!
//! Each channel realization is simulated with its own random stream derived
//! from `(seed, snr index, realization index)`: a ChaCha8 generator seeded
//! with the master seed and switched to stream `snr_idx << 32 | realization`.
//! Results therefore do not depend on thread count or scheduling, and
//! different schemes run with the same seed see the same channels, payload
//! bits and noise.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{complex_gaussian, gen_channels, ChannelSet, RX_ANTENNAS, USERS};
use crate::decomposition::receive_vector;
use crate::error::{Error, Result};
use crate::feedback::{quantize_message, FeedbackBudget, FeedbackMessage};
use crate::linalg::{dot, vec_norm, Complex, ComplexMatrix};
use crate::modulation::Modulation;
use crate::precoding::{
    antenna_selection, optimize_gmud, reg_inv_on_rows, GmudFeedback, GridSpec, PrecoderInfo,
    Scheme,
};

/// Target payload bits per SNR point when the symbol count is derived.
pub const DEFAULT_BITS_PER_POINT: usize = 200_000;
pub const DEFAULT_REALIZATIONS: usize = 400;

/// What the transmitter learns about each channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeedbackMode {
    Perfect,
    Quantized(FeedbackBudget),
}

impl FeedbackMode {
    /// Total feedback bits per user, `None` for perfect CSI.
    pub fn bits(&self) -> Option<u32> {
        match self {
            FeedbackMode::Perfect => None,
            FeedbackMode::Quantized(b) => Some(b.total_bits()),
        }
    }
}

impl fmt::Display for FeedbackMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeedbackMode::Perfect => f.write_str("perfect"),
            FeedbackMode::Quantized(b) => write!(f, "{}", b.total_bits()),
        }
    }
}

impl FromStr for FeedbackMode {
    type Err = Error;

    /// `perfect`, or the per-field resolution `N` of a `12·N`-bit budget.
    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("perfect") {
            return Ok(FeedbackMode::Perfect);
        }
        let n: u32 = s
            .parse()
            .map_err(|_| Error::Config(format!("feedback must be 'perfect' or N, got '{s}'")))?;
        Ok(FeedbackMode::Quantized(FeedbackBudget::new(n)?))
    }
}

/// Which channel row a user reports under the fixed-antenna baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FixedRow {
    Index(usize),
    /// The row with the largest norm, chosen by the receiver.
    Strongest,
}

impl Default for FixedRow {
    fn default() -> Self {
        FixedRow::Index(0)
    }
}

impl FixedRow {
    fn resolve(self, h: &ComplexMatrix) -> usize {
        match self {
            FixedRow::Index(i) => i,
            FixedRow::Strongest => {
                let norm = |i: usize| vec_norm(&h.row(i));
                (1..h.rows()).fold(0, |best, i| if norm(i) > norm(best) { i } else { best })
            }
        }
    }
}

/// How a GMUD user combines its two receive antennas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum GmudReceiver {
    /// Projection onto the first column of the user's own `P`, which removes
    /// the `ε` row of `R Qᴴ`.
    #[default]
    Projection,
    /// Matched filter on the effective vector `H_k g_k`.
    MatchedFilter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub scheme: Scheme,
    pub modulation: Modulation,
    pub snr_db: Vec<f64>,
    pub feedback: FeedbackMode,
    pub realizations: usize,
    /// Symbol vectors sent per channel realization.
    pub symbols_per_realization: usize,
    pub seed: u64,
    pub grid: GridSpec,
    /// Channel row used by the fixed-antenna regularized inverse.
    pub fixed_row: FixedRow,
    pub gmud_receiver: GmudReceiver,
}

impl SimConfig {
    /// Defaults: perfect CSI, 400 realizations, about 2·10⁵ bits per point.
    pub fn new(scheme: Scheme, modulation: Modulation, snr_db: Vec<f64>) -> Self {
        Self {
            scheme,
            modulation,
            snr_db,
            feedback: FeedbackMode::Perfect,
            realizations: DEFAULT_REALIZATIONS,
            symbols_per_realization: default_symbols(DEFAULT_REALIZATIONS, modulation),
            seed: 0,
            grid: GridSpec::default(),
            fixed_row: FixedRow::default(),
            gmud_receiver: GmudReceiver::default(),
        }
    }

    /// Sets the realization count and rescales the symbol count to keep
    /// about [`DEFAULT_BITS_PER_POINT`] bits per point.
    pub fn with_realizations(mut self, realizations: usize) -> Self {
        self.realizations = realizations;
        self.symbols_per_realization = default_symbols(realizations, self.modulation);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.realizations == 0 {
            return Err(Error::Config("realizations must be at least 1".into()));
        }
        if self.symbols_per_realization == 0 {
            return Err(Error::Config("symbols per realization must be at least 1".into()));
        }
        if self.snr_db.is_empty() {
            return Err(Error::Config("SNR list is empty".into()));
        }
        if let Some(s) = self.snr_db.iter().find(|s| !s.is_finite()) {
            return Err(Error::Config(format!("SNR {s} dB is not finite")));
        }
        if let FixedRow::Index(i) = self.fixed_row {
            if i >= RX_ANTENNAS {
                return Err(Error::Config(format!("fixed row {i} out of range")));
            }
        }
        if self.realizations > u32::MAX as usize || self.snr_db.len() > u32::MAX as usize {
            return Err(Error::Config("too many realizations or SNR points".into()));
        }
        self.grid.validate()
    }

    pub fn bits_per_realization(&self) -> u64 {
        (self.symbols_per_realization * USERS * self.modulation.bits_per_symbol()) as u64
    }
}

/// Symbol count giving about [`DEFAULT_BITS_PER_POINT`] bits per point.
pub fn default_symbols(realizations: usize, modulation: Modulation) -> usize {
    let per_symbol = realizations.max(1) * USERS * modulation.bits_per_symbol();
    DEFAULT_BITS_PER_POINT.div_ceil(per_symbol)
}

/// `σ² = 10^(-SNR/10)` for unit transmit power.
pub fn noise_variance(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerPoint {
    pub snr_db: f64,
    pub ber: f64,
    pub bits: u64,
    pub errors: u64,
    /// Standard error of `ber` from the spread of per-realization error rates.
    pub std_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerCurve {
    pub scheme: Scheme,
    pub modulation: Modulation,
    pub feedback: FeedbackMode,
    pub points: Vec<BerPoint>,
}

impl BerCurve {
    pub fn point(&self, snr_db: f64) -> Option<&BerPoint> {
        self.points.iter().find(|p| p.snr_db == snr_db)
    }
}

/// `x = Gu/√γ` with `γ = ‖Gu‖²`.
pub fn transmit(g: &ComplexMatrix, u: &[Complex]) -> Result<(Vec<Complex>, f64)> {
    let gu = g.apply(u)?;
    let gamma: f64 = gu.iter().map(|z| z.norm_sqr()).sum();
    if gamma.is_nan() || gamma <= 0.0 {
        return Err(Error::DegenerateSymbol);
    }
    let s = gamma.sqrt();
    Ok((gu.into_iter().map(|z| z / s).collect(), gamma))
}

/// Precoder plus the per-user combining vectors agreed for one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub g: ComplexMatrix,
    /// Combining vector `w_k`; the detector statistic is `w_kᴴ y_k`.
    pub combiners: Vec<[Complex; 2]>,
}

/// Feedback, precoder design and receiver setup for one realization.
pub fn prepare_link(config: &SimConfig, channels: &ChannelSet, noise_var: f64) -> Result<Link> {
    let users = &channels.users;
    let report = |msg: FeedbackMessage| match config.feedback {
        FeedbackMode::Perfect => msg,
        FeedbackMode::Quantized(budget) => quantize_message(&msg, budget),
    };
    let antenna = |i: usize| {
        let mut w = [Complex::new(0.0, 0.0); 2];
        w[i] = Complex::new(1.0, 0.0);
        w
    };
    match config.scheme {
        Scheme::RegInv => {
            let rows: Vec<usize> = users.iter().map(|u| config.fixed_row.resolve(&u.h)).collect();
            let seen = users
                .iter()
                .zip(&rows)
                .map(|(u, &i)| {
                    let reported = report(FeedbackMessage::reg_inv_fixed(&u.h, i)).channel_rows();
                    ComplexMatrix::from_rows(&reported)
                })
                .collect::<Result<Vec<_>>>()?;
            let (pre, _) = reg_inv_on_rows(&seen, &vec![0; users.len()], noise_var)?;
            Ok(Link {
                g: pre.g,
                combiners: rows.into_iter().map(antenna).collect(),
            })
        }
        Scheme::RegInvSelection => {
            let seen = users
                .iter()
                .map(|u| {
                    ComplexMatrix::from_rows(
                        &report(FeedbackMessage::reg_inv_selection(&u.h)).channel_rows(),
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            let (pre, _) = antenna_selection(&seen, noise_var)?;
            let PrecoderInfo::Antennas(rows) = &pre.info else {
                unreachable!("antenna selection reports antennas")
            };
            Ok(Link {
                combiners: rows.iter().map(|&i| antenna(i)).collect(),
                g: pre.g,
            })
        }
        Scheme::Gmud => {
            if users.len() != 2 {
                return Err(Error::Dimension("GMUD precoding serves exactly two users".into()));
            }
            let fb: Vec<GmudFeedback> = users
                .iter()
                .map(|u| {
                    report(FeedbackMessage::gmud(&u.svd))
                        .gmud_feedback()
                        .expect("GMUD message")
                })
                .collect();
            let design = optimize_gmud(&fb[0], &fb[1], noise_var, &config.grid)?;
            let p = design.params;
            let combiners = users
                .iter()
                .enumerate()
                .map(|(k, u)| match config.gmud_receiver {
                    GmudReceiver::Projection => receive_vector(&u.svd, p.r[k], p.theta[k]),
                    GmudReceiver::MatchedFilter => {
                        let gk = design.precoder.g.column2(k);
                        Ok(u.h.apply2(&gk))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Link {
                g: design.precoder.g,
                combiners,
            })
        }
    }
}

/// Adds noise to `H_k x`, combines with `w_k`, equalizes by the known
/// effective gain `w_kᴴ H_k g_k / √γ` and slices. Appends the detected bits
/// of every user to `out`, user by user.
#[allow(clippy::too_many_arguments)]
pub fn receive_detect<R: Rng + ?Sized>(
    link: &Link,
    channels: &ChannelSet,
    x: &[Complex],
    gamma: f64,
    modulation: Modulation,
    noise_var: f64,
    rng: &mut R,
    out: &mut Vec<u8>,
) -> Result<()> {
    if x.len() != 2 {
        return Err(Error::Dimension(format!("expected 2 transmit samples, got {}", x.len())));
    }
    let x2 = [x[0], x[1]];
    let root_gamma = gamma.sqrt();
    for (k, user) in channels.users.iter().enumerate() {
        let hx = user.h.apply2(&x2);
        let y = [
            hx[0] + complex_gaussian(rng, noise_var),
            hx[1] + complex_gaussian(rng, noise_var),
        ];
        let w = &link.combiners[k];
        let gain = dot(w, &user.h.apply2(&link.g.column2(k))) / root_gamma;
        let stat = dot(w, &y);
        // A user that was given no power has nothing to equalize.
        let z = if gain.norm() > 0.0 {
            stat / gain
        } else {
            Complex::new(0.0, 0.0)
        };
        modulation.slice_into(z, out);
    }
    Ok(())
}

fn realization_rng(seed: u64, snr_idx: usize, realization: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((snr_idx as u64) << 32) | realization as u64);
    rng
}

/// Bit errors in one channel realization.
pub fn simulate_realization(
    config: &SimConfig,
    snr_idx: usize,
    realization: usize,
) -> Result<u64> {
    let noise_var = noise_variance(config.snr_db[snr_idx]);
    let mut rng = realization_rng(config.seed, snr_idx, realization);
    let channels = gen_channels(&mut rng);
    let link = prepare_link(config, &channels, noise_var)?;

    let m = config.modulation;
    let k = m.bits_per_symbol();
    let mut bits = vec![0u8; USERS * k];
    let mut detected = Vec::with_capacity(USERS * k);
    let mut errors = 0u64;
    for _ in 0..config.symbols_per_realization {
        for b in bits.iter_mut() {
            *b = u8::from(rng.random::<bool>());
        }
        let u = m.modulate(&bits)?;
        detected.clear();
        match transmit(&link.g, &u) {
            Ok((x, gamma)) => {
                receive_detect(&link, &channels, &x, gamma, m, noise_var, &mut rng, &mut detected)?
            }
            // A rank-deficient precoder built from coarse feedback can map
            // the symbol vector to zero; nothing is sent and every user
            // slices a zero statistic.
            Err(Error::DegenerateSymbol) => {
                for _ in 0..USERS {
                    m.slice_into(Complex::new(0.0, 0.0), &mut detected);
                }
            }
            Err(e) => return Err(e),
        }
        errors += bits
            .iter()
            .zip(&detected)
            .filter(|(a, b)| a != b)
            .count() as u64;
    }
    Ok(errors)
}

/// One BER estimate per configured SNR point.
pub fn run_ber(config: &SimConfig) -> Result<BerCurve> {
    config.validate()?;
    let per_real = config.bits_per_realization();
    let points = (0..config.snr_db.len())
        .map(|s| {
            let errors: Vec<u64> = (0..config.realizations)
                .into_par_iter()
                .map(|r| simulate_realization(config, s, r))
                .collect::<Result<_>>()?;
            Ok(summarize(config.snr_db[s], &errors, per_real))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BerCurve {
        scheme: config.scheme,
        modulation: config.modulation,
        feedback: config.feedback,
        points,
    })
}

fn summarize(snr_db: f64, errors: &[u64], bits_per_realization: u64) -> BerPoint {
    let n = errors.len();
    let total_errors: u64 = errors.iter().sum();
    let bits = bits_per_realization * n as u64;
    let ber = total_errors as f64 / bits as f64;
    let std_err = if n > 1 {
        let var = errors
            .iter()
            .map(|&e| (e as f64 / bits_per_realization as f64 - ber).powi(2))
            .sum::<f64>()
            / (n - 1) as f64;
        (var / n as f64).sqrt()
    } else {
        0.0
    };
    BerPoint {
        snr_db,
        ber,
        bits,
        errors: total_errors,
        std_err,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn transmit_normalizes() {
        let i = ComplexMatrix::identity(2);
        let (x, g) = transmit(&i, &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!((x, g), (vec![c(1.0, 0.0), c(0.0, 0.0)], 1.0));
        let half = i.scale(c(0.5, 0.0));
        let (x, g) = transmit(&half, &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(g, 0.25);
        assert_eq!(x, vec![c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(
            transmit(&i, &[c(0.0, 0.0), c(0.0, 0.0)]),
            Err(Error::DegenerateSymbol)
        ));

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let g = crate::channel::gaussian_matrix(&mut rng, 2, 2);
            let u = [complex_gaussian(&mut rng, 1.0), complex_gaussian(&mut rng, 1.0)];
            let (x, _) = transmit(&g, &u).unwrap();
            let n: f64 = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            assert_abs_diff_eq!(n, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn noiseless_links_are_error_free() {
        for scheme in Scheme::ALL {
            let mut cfg = SimConfig::new(scheme, Modulation::Qam16, vec![300.0]);
            cfg.realizations = 20;
            cfg.symbols_per_realization = 50;
            cfg.grid = GridSpec {
                n_r: 4,
                n_theta: 8,
                n_power: 5,
                ..GridSpec::default()
            };
            let curve = run_ber(&cfg).unwrap();
            assert_eq!(curve.points[0].errors, 0, "{scheme}");
        }
    }

    #[test]
    fn zero_forcing_with_exact_rows() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let channels = gen_channels(&mut rng);
        let cfg = SimConfig::new(Scheme::RegInv, Modulation::Qpsk, vec![0.0]);
        let link = prepare_link(&cfg, &channels, 0.0).unwrap();
        let bits = [0u8, 1, 1, 1];
        let u = Modulation::Qpsk.modulate(&bits).unwrap();
        let (x, gamma) = transmit(&link.g, &u).unwrap();
        let mut out = Vec::new();
        receive_detect(&link, &channels, &x, gamma, Modulation::Qpsk, 0.0, &mut rng, &mut out)
            .unwrap();
        assert_eq!(out, bits);
    }

    #[test]
    fn silent_slot_when_precoder_collapses() {
        // Identical reported rows make G rank one, so u = [s, -s] is lost.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let channels = gen_channels(&mut rng);
        let row = channels.users[0].h.row(0);
        let h_hat = ComplexMatrix::from_rows(&[row.clone(), row]).unwrap();
        let g = crate::precoding::reg_inv(&h_hat, 0.1).unwrap();
        let s = c(1.0, 1.0) / 2f64.sqrt();
        assert!(matches!(transmit(&g, &[s, -s]), Err(Error::DegenerateSymbol)));

        let mut cfg = SimConfig::new(Scheme::RegInvSelection, Modulation::Qam16, vec![30.0]);
        cfg.feedback = "2".parse().unwrap();
        cfg.realizations = 300;
        cfg.symbols_per_realization = 40;
        let p = run_ber(&cfg).unwrap().points[0];
        assert!(p.ber > 0.0 && p.ber < 0.5);
    }

    #[test]
    fn strongest_row() {
        let h = ComplexMatrix::from_2x2(c(0.1, 0.0), c(0.0, 0.2), c(1.0, 0.0), c(0.0, -1.0));
        assert_eq!(FixedRow::Strongest.resolve(&h), 1);
        assert_eq!(FixedRow::Index(0).resolve(&h), 0);
        let mut cfg = SimConfig::new(Scheme::RegInv, Modulation::Qpsk, vec![300.0]);
        cfg.fixed_row = FixedRow::Strongest;
        cfg.realizations = 10;
        cfg.symbols_per_realization = 20;
        assert_eq!(run_ber(&cfg).unwrap().points[0].errors, 0);
        cfg.fixed_row = FixedRow::Index(2);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn feedback_mode_text() {
        assert_eq!("perfect".parse::<FeedbackMode>().unwrap(), FeedbackMode::Perfect);
        let q: FeedbackMode = "4".parse().unwrap();
        assert_eq!(q.bits(), Some(48));
        assert_eq!(q.to_string(), "48");
        assert!("0".parse::<FeedbackMode>().is_err());
        assert!("x".parse::<FeedbackMode>().is_err());
    }

    #[test]
    fn config_validation() {
        let ok = SimConfig::new(Scheme::Gmud, Modulation::Qpsk, vec![10.0]);
        assert!(ok.validate().is_ok());
        assert_eq!(ok.symbols_per_realization, 125);
        let mut bad = ok.clone();
        bad.realizations = 0;
        assert!(bad.validate().is_err());
        let mut bad = ok.clone();
        bad.snr_db.clear();
        assert!(bad.validate().is_err());
        let mut bad = ok;
        bad.symbols_per_realization = 0;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn deterministic_and_common_channels() {
        let mut cfg = SimConfig::new(Scheme::RegInvSelection, Modulation::Qpsk, vec![5.0, 10.0]);
        cfg.realizations = 30;
        cfg.symbols_per_realization = 20;
        cfg.seed = 77;
        assert_eq!(run_ber(&cfg).unwrap(), run_ber(&cfg).unwrap());
        let a = gen_channels(&mut realization_rng(77, 1, 3));
        let b = gen_channels(&mut realization_rng(77, 1, 3));
        let other = gen_channels(&mut realization_rng(77, 0, 3));
        assert_eq!(a, b);
        assert_ne!(a, other);
    }

    #[test]
    fn summary_statistics() {
        let p = summarize(3.0, &[1, 3], 10);
        assert_eq!((p.errors, p.bits), (4, 20));
        assert_abs_diff_eq!(p.ber, 0.2, epsilon = 1e-15);
        // sample sd of {0.1, 0.3} is √0.02, over √2 gives 0.1
        assert_abs_diff_eq!(p.std_err, 0.1, epsilon = 1e-12);
    }
}
