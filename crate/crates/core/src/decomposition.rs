//! Generalized multi-unitary decomposition of 2x2 complex matrices.
//!
//! A matrix `H = U Λ Vᴴ` is rewritten as `H = P R Qᴴ` where `R` is lower
//! triangular with a prescribed `(1,1)` entry `r ∈ [λ2, λ1]`:
//!
//! ```text
//! R = U0ᴴ Λ V0 = [ r   0  ]      U0 = [ a  b ]    V0 = [ c  s ]
//!                [ z1  z2 ]           [-b  a ]         [-s  c ]
//! ```
//!
//! Inserting a diagonal phase matrix `M = diag(e^{jθ1}, e^{jθ2})`, which
//! commutes with `Λ`, gives a whole family `P = U M U0`, `Q = V M V0` that
//! shares the same `R`. For fixed `r` the first column of `Q` sweeps a cone of
//! half-angle `arccos(c)` around the principal right singular vector.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    conj_transpose, dot, mat_mul, orthogonal_complement2, svd2x2, vec_norm, Complex,
    ComplexMatrix, SvdFactorization,
};

/// Relative slack allowed at both ends of `[λ2, λ1]` when validating `r`.
pub const R_INTERVAL_RTOL: f64 = 1e-9;

/// Below this relative gap the singular values are treated as equal.
pub const DEGENERATE_RTOL: f64 = 1e-12;

/// Givens rotation parameters of `U0` and `V0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GmudRotation {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub s: f64,
}

impl GmudRotation {
    pub const IDENTITY: Self = Self {
        a: 1.0,
        b: 0.0,
        c: 1.0,
        s: 0.0,
    };

    /// `U0 = [[a, b], [-b, a]]`.
    pub fn u0(&self) -> ComplexMatrix {
        real_2x2(self.a, self.b, -self.b, self.a)
    }

    /// `V0 = [[c, s], [-s, c]]`.
    pub fn v0(&self) -> ComplexMatrix {
        real_2x2(self.c, self.s, -self.s, self.c)
    }

    /// Half-angle of the beam cone around the principal eigenvector.
    pub fn cone_angle(&self) -> f64 {
        self.c.clamp(-1.0, 1.0).acos()
    }
}

fn real_2x2(m00: f64, m01: f64, m10: f64, m11: f64) -> ComplexMatrix {
    ComplexMatrix::from_2x2(
        Complex::new(m00, 0.0),
        Complex::new(m01, 0.0),
        Complex::new(m10, 0.0),
        Complex::new(m11, 0.0),
    )
}

/// The lower-triangular factor `[[r, 0], [z1, z2]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpecialR {
    pub r: f64,
    pub z1: f64,
    pub z2: f64,
}

impl SpecialR {
    pub fn matrix(&self) -> ComplexMatrix {
        real_2x2(self.r, 0.0, self.z1, self.z2)
    }
}

/// Phases `(θ1, θ2)` of the diagonal matrix `M`, reduced to `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePair {
    theta1: f64,
    theta2: f64,
}

impl PhasePair {
    pub fn new(theta1: f64, theta2: f64) -> Self {
        Self {
            theta1: wrap_phase(theta1),
            theta2: wrap_phase(theta2),
        }
    }

    pub fn zero() -> Self {
        Self::new(0.0, 0.0)
    }

    pub fn theta1(&self) -> f64 {
        self.theta1
    }

    pub fn theta2(&self) -> f64 {
        self.theta2
    }
}

/// Reduces an angle to `[0, 2π)`.
pub fn wrap_phase(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs.
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// `H = P · R · Qᴴ` together with the parameters that generated it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmudFactorization {
    pub p: ComplexMatrix,
    pub rmat: SpecialR,
    pub q: ComplexMatrix,
    pub r: f64,
    pub phases: PhasePair,
    pub rotation: GmudRotation,
    pub source_svd: SvdFactorization,
}

impl GmudFactorization {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let pr = mat_mul(&self.p, &self.rmat.matrix()).expect("2x2 shapes");
        mat_mul(&pr, &conj_transpose(&self.q)).expect("2x2 shapes")
    }

    /// Transmit beam: the first column of `Q`.
    pub fn beam(&self) -> [Complex; 2] {
        self.q.column2(0)
    }
}

/// Checks `r` against `[λ2, λ1]` with a small relative slack and clamps it
/// into the interval.
fn admissible_r(lambda1: f64, lambda2: f64, r: f64) -> Result<f64> {
    if !(lambda1.is_finite() && lambda2.is_finite() && r.is_finite()) {
        return Err(Error::Domain("non-finite singular values or r".into()));
    }
    if lambda1 <= 0.0 {
        return Err(Error::Domain("largest singular value must be positive".into()));
    }
    if lambda2 < 0.0 || lambda2 > lambda1 {
        return Err(Error::Domain(format!(
            "singular values must satisfy λ1 ≥ λ2 ≥ 0, got ({lambda1}, {lambda2})"
        )));
    }
    let slack = R_INTERVAL_RTOL * lambda1;
    if r <= 0.0 || r < lambda2 - slack || r > lambda1 + slack {
        return Err(Error::OutOfInterval {
            r,
            lambda1,
            lambda2,
        });
    }
    Ok(r.clamp(lambda2, lambda1))
}

/// Solves `a·c·λ1 + b·s·λ2 = r`, `a·s·λ1 − b·c·λ2 = 0` for the real,
/// nonnegative rotation parameters.
pub fn solve_rotations(lambda1: f64, lambda2: f64, r: f64) -> Result<GmudRotation> {
    let r = admissible_r(lambda1, lambda2, r)?;
    if lambda1 - lambda2 <= DEGENERATE_RTOL * lambda1 {
        return Ok(GmudRotation::IDENTITY);
    }
    let gap = (lambda1 - lambda2) * (lambda1 + lambda2);
    let a = ((r - lambda2) * (r + lambda2) / gap).max(0.0).sqrt();
    let b = ((lambda1 - r) * (lambda1 + r) / gap).max(0.0).sqrt();
    Ok(GmudRotation {
        a,
        b,
        c: (lambda1 / r * a).min(1.0),
        s: (lambda2 / r * b).min(1.0),
    })
}

/// Entries of `R = U0ᴴ Λ V0` for the rotation solving the given `r`.
pub fn build_special_r(lambda1: f64, lambda2: f64, r: f64) -> Result<SpecialR> {
    let rot = solve_rotations(lambda1, lambda2, r)?;
    Ok(special_r_from(lambda1, lambda2, &rot))
}

fn special_r_from(lambda1: f64, lambda2: f64, rot: &GmudRotation) -> SpecialR {
    let GmudRotation { a, b, c, s } = *rot;
    SpecialR {
        r: a * c * lambda1 + b * s * lambda2,
        z1: b * c * lambda1 - a * s * lambda2,
        z2: b * s * lambda1 + a * c * lambda2,
    }
}

/// `diag(e^{jθ1}, e^{jθ2})`.
pub fn phase_matrix(pp: PhasePair) -> ComplexMatrix {
    ComplexMatrix::diag(&[
        Complex::from_polar(1.0, pp.theta1),
        Complex::from_polar(1.0, pp.theta2),
    ])
}

/// Decomposes a 2x2 matrix as `P R Qᴴ` with prescribed `R[0][0] = r`.
pub fn gmud(h: &ComplexMatrix, r: f64, pp: PhasePair) -> Result<GmudFactorization> {
    let svd = svd2x2(h)?;
    gmud_from_svd(svd, r, pp)
}

/// As [`gmud`], reusing an existing SVD of the matrix.
pub fn gmud_from_svd(svd: SvdFactorization, r: f64, pp: PhasePair) -> Result<GmudFactorization> {
    let rot = solve_rotations(svd.lambda1, svd.lambda2, r)?;
    let rmat = special_r_from(svd.lambda1, svd.lambda2, &rot);
    let m = phase_matrix(pp);
    let p = mat_mul(&mat_mul(&svd.u, &m)?, &rot.u0())?;
    let q = mat_mul(&mat_mul(&svd.v, &m)?, &rot.v0())?;
    Ok(GmudFactorization {
        p,
        rmat,
        q,
        r: rmat.r,
        phases: pp,
        rotation: rot,
        source_svd: svd,
    })
}

/// Returns `[-conj(v1[1]), conj(v1[0])]`, the unit vector orthogonal to `v1`.
pub fn complete_orthonormal(v1: &[Complex; 2]) -> Result<[Complex; 2]> {
    let n = vec_norm(v1);
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!("expected a unit vector, norm is {n}")));
    }
    Ok(orthogonal_complement2(v1))
}

/// Transmit beam reconstructed from `(λ1, λ2, v1)` feedback.
///
/// With `v2 = complete_orthonormal(v1)` this is the first column of
/// `[v1 v2] · diag(e^{jθ}, 1) · V0`, i.e. `c·e^{jθ}·v1 − s·v2`.
pub fn beam_from_feedback(
    lambda1: f64,
    lambda2: f64,
    v1: &[Complex; 2],
    r: f64,
    theta: f64,
) -> Result<[Complex; 2]> {
    let rot = solve_rotations(lambda1, lambda2, r)?;
    let v2 = complete_orthonormal(v1)?;
    Ok(beam_from_rotation(&rot, v1, &v2, theta))
}

pub(crate) fn beam_from_rotation(
    rot: &GmudRotation,
    v1: &[Complex; 2],
    v2: &[Complex; 2],
    theta: f64,
) -> [Complex; 2] {
    let ph = Complex::from_polar(rot.c, theta);
    [ph * v1[0] - rot.s * v2[0], ph * v1[1] - rot.s * v2[1]]
}

/// First column of `P` for the receiver's own decomposition at `(r, θ)`,
/// using the same second-eigenvector completion as [`beam_from_feedback`].
///
/// Its defining property is `p1ᴴ H = r · q1ᴴ`: projecting the received vector
/// onto `p1` keeps only the first row of `R Qᴴ`, so the `ε` row is discarded.
pub fn receive_vector(svd: &SvdFactorization, r: f64, theta: f64) -> Result<[Complex; 2]> {
    let r = r.clamp(svd.lambda2, svd.lambda1);
    let rot = solve_rotations(svd.lambda1, svd.lambda2, r)?;
    let v1 = svd.v1();
    let v2 = orthogonal_complement2(&v1);
    let u1 = svd.u.column2(0);
    // The completed v2 equals the stored second column up to a phase; carry
    // the same phase over to u2 so that H v2 = λ2 u2 still holds.
    let ph2 = dot(&svd.v.column2(1), &v2);
    let u2 = svd.u.column2(1);
    let u2 = [u2[0] * ph2, u2[1] * ph2];
    let ph = Complex::from_polar(rot.a, theta);
    Ok([ph * u1[0] - rot.b * u2[0], ph * u1[1] - rot.b * u2[1]])
}
