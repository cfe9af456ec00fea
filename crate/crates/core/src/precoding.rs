//! Multi-user precoders for two transmit antennas and two users.
//!
//! * regularized channel inversion on a fixed row of each user's channel,
//! * the same with receive-antenna selection by max-min SINR,
//! * GMUD beam steering, where each user's beam is chosen from the cone
//!   generated by its decomposition family and the beams, `r`'s and power
//!   split are picked by exhaustive max-min SINR grid search.
//!
//! All selection costs use the expected normalization `γ̄ = ‖G‖_F²`, which is
//! `E‖Gu‖²` for unit-energy symbols.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::decomposition::{beam_from_feedback, beam_from_rotation, solve_rotations, wrap_phase};
use crate::error::{Error, Result};
use crate::linalg::{
    conj_transpose, dot, fro_norm, mat_inv, mat_mul, orthogonal_complement2, Complex,
    ComplexMatrix,
};

/// SINR values are capped here so that max-min comparisons stay total when a
/// denominator vanishes.
pub const SINR_CAP: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scheme {
    /// Regularized inverse on a fixed receive antenna per user.
    RegInv,
    /// Regularized inverse with max-min SINR receive-antenna selection.
    RegInvSelection,
    /// GMUD beam steering from singular values and principal eigenvector.
    Gmud,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::RegInv, Scheme::RegInvSelection, Scheme::Gmud];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::RegInv => "reg-inv",
            Scheme::RegInvSelection => "reg-inv-sel",
            Scheme::Gmud => "gmud",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "reg-inv" | "reg-inv-fixed" | "reginv" => Ok(Scheme::RegInv),
            "reg-inv-sel" | "reg-inv-selection" => Ok(Scheme::RegInvSelection),
            "gmud" => Ok(Scheme::Gmud),
            other => Err(Error::Config(format!(
                "unknown scheme '{other}' (expected reg-inv, reg-inv-sel or gmud)"
            ))),
        }
    }
}

/// What a user reports for GMUD precoding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GmudFeedback {
    pub lambda1: f64,
    pub lambda2: f64,
    pub v1: [Complex; 2],
}

impl GmudFeedback {
    pub fn from_svd(svd: &crate::linalg::SvdFactorization) -> Self {
        Self {
            lambda1: svd.lambda1,
            lambda2: svd.lambda2,
            v1: svd.v1(),
        }
    }
}

/// Per-user `(r, θ)` and the power split `(α, β)` of a GMUD precoder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GmudBeamParams {
    pub r: [f64; 2],
    pub theta: [f64; 2],
    pub alpha: f64,
    pub beta: f64,
}

impl GmudBeamParams {
    /// Parameters with power fraction `alpha2` on the first user.
    pub fn with_power(r: [f64; 2], theta: [f64; 2], alpha2: f64) -> Self {
        let (alpha, beta) = power_split(alpha2);
        Self {
            r,
            theta,
            alpha,
            beta,
        }
    }
}

fn power_split(alpha2: f64) -> (f64, f64) {
    let alpha2 = alpha2.clamp(0.0, 1.0);
    (alpha2.sqrt(), (1.0 - alpha2).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinrReport {
    pub per_user: Vec<f64>,
    pub min_sinr: f64,
    /// Expected normalization `E‖Gu‖²`.
    pub gamma_bar: f64,
}

impl SinrReport {
    fn new(per_user: Vec<f64>, gamma_bar: f64) -> Self {
        let min_sinr = per_user.iter().copied().fold(f64::INFINITY, f64::min);
        Self {
            per_user,
            min_sinr,
            gamma_bar,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PrecoderInfo {
    /// Receive antenna (channel row) used by each user.
    Antennas(Vec<usize>),
    Gmud(GmudBeamParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecodingMatrix {
    pub g: ComplexMatrix,
    pub scheme: Scheme,
    pub info: PrecoderInfo,
}

fn saturating_ratio(num: f64, den: f64) -> f64 {
    if num <= 0.0 {
        return 0.0;
    }
    if den <= 0.0 {
        return SINR_CAP;
    }
    (num / den).min(SINR_CAP)
}

/// `G = H̃ᴴ (H̃H̃ᴴ + Kσ²I)⁻¹` for a `K x N_T` stacked channel `H̃`.
pub fn reg_inv(h_tilde: &ComplexMatrix, noise_var: f64) -> Result<ComplexMatrix> {
    if !(noise_var >= 0.0 && noise_var.is_finite()) {
        return Err(Error::Domain(format!("noise variance {noise_var} must be ≥ 0")));
    }
    let k = h_tilde.rows();
    let hh = conj_transpose(h_tilde);
    let alpha = Complex::new(k as f64 * noise_var, 0.0);
    let gram = mat_mul(h_tilde, &hh)?.add(&ComplexMatrix::identity(k).scale(alpha))?;
    mat_mul(&hh, &mat_inv(&gram)?)
}

/// Per-user SINR of a regularized-inverse link with `γ̄ = ‖G‖_F²`:
/// `|e_mm|² / (Σ_{n≠m} |e_mn|² + γ̄σ²)` where `E = Ĥ G`.
pub fn reg_inv_sinr(h_hat: &ComplexMatrix, g: &ComplexMatrix, noise_var: f64) -> Result<SinrReport> {
    let e = mat_mul(h_hat, g)?;
    let gamma_bar = fro_norm(g).powi(2);
    let per_user = (0..e.rows())
        .map(|m| {
            let signal = e[(m, m)].norm_sqr();
            let interference: f64 = (0..e.cols())
                .filter(|&n| n != m)
                .map(|n| e[(m, n)].norm_sqr())
                .sum();
            saturating_ratio(signal, interference + gamma_bar * noise_var)
        })
        .collect();
    Ok(SinrReport::new(per_user, gamma_bar))
}

/// Regularized inverse on the given row of each user's channel.
pub fn reg_inv_on_rows(
    channels: &[ComplexMatrix],
    rows: &[usize],
    noise_var: f64,
) -> Result<(PrecodingMatrix, SinrReport)> {
    if channels.len() != rows.len() {
        return Err(Error::Dimension("one row index per user required".into()));
    }
    let stacked: Vec<Vec<Complex>> = channels
        .iter()
        .zip(rows)
        .map(|(h, &i)| {
            if i < h.rows() {
                Ok(h.row(i))
            } else {
                Err(Error::Dimension(format!("row {i} of a {}-row channel", h.rows())))
            }
        })
        .collect::<Result<_>>()?;
    let h_hat = ComplexMatrix::from_rows(&stacked)?;
    let g = reg_inv(&h_hat, noise_var)?;
    let report = reg_inv_sinr(&h_hat, &g, noise_var)?;
    let scheme = Scheme::RegInv;
    Ok((
        PrecodingMatrix {
            g,
            scheme,
            info: PrecoderInfo::Antennas(rows.to_vec()),
        },
        report,
    ))
}

/// Receive-antenna selection: tries every one-row-per-user combination and
/// keeps the one with the largest minimum SINR.
///
/// Combinations are enumerated in lexicographic order of the per-user row
/// indices (first user most significant); ties keep the earliest.
pub fn antenna_selection(
    channels: &[ComplexMatrix],
    noise_var: f64,
) -> Result<(PrecodingMatrix, SinrReport)> {
    let n_rx = channels
        .first()
        .ok_or_else(|| Error::Dimension("no users".into()))?
        .rows();
    if channels.iter().any(|h| h.rows() != n_rx) {
        return Err(Error::Dimension("users have different antenna counts".into()));
    }
    let k = channels.len();
    let combos = n_rx.pow(k as u32);
    let mut best: Option<(PrecodingMatrix, SinrReport)> = None;
    for index in 0..combos {
        let rows = combination(index, n_rx, k);
        let (pre, report) = reg_inv_on_rows(channels, &rows, noise_var)?;
        if best
            .as_ref()
            .is_none_or(|(_, b)| report.min_sinr > b.min_sinr)
        {
            best = Some((pre, report));
        }
    }
    let (mut pre, report) = best.expect("at least one combination");
    pre.scheme = Scheme::RegInvSelection;
    Ok((pre, report))
}

/// Mixed-radix digits of `index`, most significant first.
pub fn combination(mut index: usize, radix: usize, digits: usize) -> Vec<usize> {
    let mut out = vec![0; digits];
    for d in out.iter_mut().rev() {
        *d = index % radix;
        index /= radix;
    }
    out
}

/// `(SINR_k, SINR_l)` of the two-user GMUD cost for given `r`'s, beam overlap
/// `|q1,kᴴ q1,l|²` and power split.
#[inline]
fn gmud_pair_sinr(
    alpha: f64,
    beta: f64,
    r_k: f64,
    r_l: f64,
    overlap2: f64,
    noise_var: f64,
) -> (f64, f64, f64) {
    let a2 = alpha * alpha;
    let b2 = beta * beta;
    let gamma_bar = a2 + b2;
    let rk2 = r_k * r_k;
    let rl2 = r_l * r_l;
    let s_k = saturating_ratio(a2 * rk2, b2 * rk2 * overlap2 + noise_var * gamma_bar);
    let s_l = saturating_ratio(b2 * rl2, a2 * rl2 * overlap2 + noise_var * gamma_bar);
    (s_k, s_l, gamma_bar)
}

/// Evaluates the max-min cost at one parameter point.
pub fn gmud_min_sinr(
    params: &GmudBeamParams,
    fb_k: &GmudFeedback,
    fb_l: &GmudFeedback,
    noise_var: f64,
) -> Result<SinrReport> {
    let q_k = beam_from_feedback(fb_k.lambda1, fb_k.lambda2, &fb_k.v1, params.r[0], params.theta[0])?;
    let q_l = beam_from_feedback(fb_l.lambda1, fb_l.lambda2, &fb_l.v1, params.r[1], params.theta[1])?;
    let overlap2 = dot(&q_k, &q_l).norm_sqr();
    let (s_k, s_l, gamma_bar) = gmud_pair_sinr(
        params.alpha,
        params.beta,
        params.r[0],
        params.r[1],
        overlap2,
        noise_var,
    );
    Ok(SinrReport::new(vec![s_k, s_l], gamma_bar))
}

/// Grid for the GMUD parameter search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Points per user on `[λ2, λ1]`.
    pub n_r: usize,
    /// Points per user on `[0, 2π)`.
    pub n_theta: usize,
    /// Points for the first user's power fraction `α²` on `[0.1, 0.9]`.
    pub n_power: usize,
    /// Also try `α² ∈ {0, 1}`.
    pub power_endpoints: bool,
    /// One extra pass on a half-step neighbourhood of the grid optimum.
    pub refine: bool,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            n_r: 8,
            n_theta: 16,
            n_power: 9,
            power_endpoints: true,
            refine: false,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_r == 0 || self.n_theta == 0 || self.n_power == 0 {
            return Err(Error::Config("grid sizes must be at least 1".into()));
        }
        Ok(())
    }

    /// Candidate `r` values: uniform on `[λ2, λ1]`, or `λ1` alone for one point.
    pub fn r_values(&self, lambda1: f64, lambda2: f64) -> Vec<f64> {
        if self.n_r == 1 {
            return vec![lambda1];
        }
        let step = (lambda1 - lambda2) / (self.n_r - 1) as f64;
        (0..self.n_r)
            .map(|i| {
                let r = if i + 1 == self.n_r {
                    lambda1
                } else {
                    lambda2 + step * i as f64
                };
                // r must stay positive; only hit when λ2 is exactly zero.
                if r > 0.0 {
                    r
                } else {
                    lambda1 * 1e-12
                }
            })
            .collect()
    }

    pub fn theta_values(&self) -> Vec<f64> {
        (0..self.n_theta)
            .map(|i| TAU * i as f64 / self.n_theta as f64)
            .collect()
    }

    /// Candidate `α²` values in ascending order.
    pub fn power_values(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_power + 2);
        if self.power_endpoints {
            out.push(0.0);
        }
        if self.n_power == 1 {
            out.push(0.5);
        } else {
            let step = 0.8 / (self.n_power - 1) as f64;
            out.extend((0..self.n_power).map(|i| 0.1 + step * i as f64));
        }
        if self.power_endpoints {
            out.push(1.0);
        }
        out
    }

    pub fn points(&self) -> usize {
        let powers = self.n_power + if self.power_endpoints { 2 } else { 0 };
        (self.n_r * self.n_theta).pow(2) * powers
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmudDesign {
    pub precoder: PrecodingMatrix,
    pub params: GmudBeamParams,
    pub report: SinrReport,
}

struct Beam {
    q: [Complex; 2],
    r: f64,
    theta: f64,
}

fn beam_table(fb: &GmudFeedback, grid: &GridSpec) -> Result<Vec<Beam>> {
    let v2 = orthogonal_complement2(&fb.v1);
    let thetas = grid.theta_values();
    let mut out = Vec::with_capacity(grid.n_r * grid.n_theta);
    for r in grid.r_values(fb.lambda1, fb.lambda2) {
        let rot = solve_rotations(fb.lambda1, fb.lambda2, r)?;
        for &theta in &thetas {
            out.push(Beam {
                q: beam_from_rotation(&rot, &fb.v1, &v2, theta),
                r,
                theta,
            });
        }
    }
    Ok(out)
}

/// Exhaustive max-min SINR search over `(r_k, θ_k, r_l, θ_l, α²)`.
///
/// Grid points are visited in lexicographic index order and only a strictly
/// better point replaces the incumbent, so the result does not depend on
/// evaluation order.
pub fn optimize_gmud(
    fb_k: &GmudFeedback,
    fb_l: &GmudFeedback,
    noise_var: f64,
    grid: &GridSpec,
) -> Result<GmudDesign> {
    grid.validate()?;
    // Validates the feedback even for single-point grids.
    beam_from_feedback(fb_k.lambda1, fb_k.lambda2, &fb_k.v1, fb_k.lambda1, 0.0)?;
    beam_from_feedback(fb_l.lambda1, fb_l.lambda2, &fb_l.v1, fb_l.lambda1, 0.0)?;

    let beams_k = beam_table(fb_k, grid)?;
    let beams_l = beam_table(fb_l, grid)?;
    let powers: Vec<(f64, f64)> = grid.power_values().into_iter().map(power_split).collect();

    // Each SINR is at most r²/(σ²γ̄) whatever the overlap and power split, so
    // pairs whose bound cannot strictly beat the incumbent are skipped. The
    // margin keeps the bound safe against rounding.
    let min_gamma = powers
        .iter()
        .map(|&(a, b)| a * a + b * b)
        .fold(f64::INFINITY, f64::min);
    let bound = |r: f64| {
        if noise_var > 0.0 {
            (r * r / (noise_var * min_gamma) * (1.0 + 1e-9)).min(SINR_CAP)
        } else {
            SINR_CAP
        }
    };

    let mut best_val = f64::NEG_INFINITY;
    let mut best = (0usize, 0usize, 0usize);
    for (i, bk) in beams_k.iter().enumerate() {
        let bound_k = bound(bk.r);
        if bound_k <= best_val {
            continue;
        }
        for (j, bl) in beams_l.iter().enumerate() {
            if bound_k.min(bound(bl.r)) <= best_val {
                continue;
            }
            let overlap2 = dot(&bk.q, &bl.q).norm_sqr();
            for (p, &(alpha, beta)) in powers.iter().enumerate() {
                let (s_k, s_l, _) = gmud_pair_sinr(alpha, beta, bk.r, bl.r, overlap2, noise_var);
                let m = s_k.min(s_l);
                if m > best_val {
                    best_val = m;
                    best = (i, j, p);
                }
            }
        }
    }

    let (i, j, p) = best;
    let mut params = GmudBeamParams {
        r: [beams_k[i].r, beams_l[j].r],
        theta: [beams_k[i].theta, beams_l[j].theta],
        alpha: powers[p].0,
        beta: powers[p].1,
    };
    let mut report = gmud_min_sinr(&params, fb_k, fb_l, noise_var)?;

    if grid.refine {
        (params, report) = refine(params, report, fb_k, fb_l, noise_var, grid)?;
    }

    let q_k = beam_from_feedback(fb_k.lambda1, fb_k.lambda2, &fb_k.v1, params.r[0], params.theta[0])?;
    let q_l = beam_from_feedback(fb_l.lambda1, fb_l.lambda2, &fb_l.v1, params.r[1], params.theta[1])?;
    let g = ComplexMatrix::from_columns(&[
        [q_k[0] * params.alpha, q_k[1] * params.alpha],
        [q_l[0] * params.beta, q_l[1] * params.beta],
    ])?;
    Ok(GmudDesign {
        precoder: PrecodingMatrix {
            g,
            scheme: Scheme::Gmud,
            info: PrecoderInfo::Gmud(params),
        },
        params,
        report,
    })
}

/// Tries every combination of `{-h/2, 0, +h/2}` offsets around the incumbent,
/// `h` being the grid step of each coordinate.
fn refine(
    params: GmudBeamParams,
    report: SinrReport,
    fb_k: &GmudFeedback,
    fb_l: &GmudFeedback,
    noise_var: f64,
    grid: &GridSpec,
) -> Result<(GmudBeamParams, SinrReport)> {
    let r_step = |fb: &GmudFeedback| {
        if grid.n_r > 1 {
            (fb.lambda1 - fb.lambda2) / (grid.n_r - 1) as f64
        } else {
            0.0
        }
    };
    let half = [
        0.5 * r_step(fb_k),
        0.5 * TAU / grid.n_theta as f64,
        0.5 * r_step(fb_l),
        0.5 * TAU / grid.n_theta as f64,
        if grid.n_power > 1 {
            0.4 / (grid.n_power - 1) as f64
        } else {
            0.0
        },
    ];
    let alpha2 = params.alpha * params.alpha;
    let mut best = (params, report);
    for code in 0..3usize.pow(5) {
        if code == 121 {
            // all-zero offset, the incumbent itself
            continue;
        }
        let off: Vec<f64> = combination(code, 3, 5)
            .into_iter()
            .zip(half)
            .map(|(d, h)| (d as f64 - 1.0) * h)
            .collect();
        let cand = GmudBeamParams::with_power(
            [
                (params.r[0] + off[0]).clamp(fb_k.lambda2.max(f64::MIN_POSITIVE), fb_k.lambda1),
                (params.r[1] + off[2]).clamp(fb_l.lambda2.max(f64::MIN_POSITIVE), fb_l.lambda1),
            ],
            [wrap_phase(params.theta[0] + off[1]), wrap_phase(params.theta[1] + off[3])],
            (alpha2 + off[4]).clamp(0.0, 1.0),
        );
        let rep = gmud_min_sinr(&cand, fb_k, fb_l, noise_var)?;
        if rep.min_sinr > best.1.min_sinr {
            best = (cand, rep);
        }
    }
    Ok(best)
}
