//! Small dense complex matrices.
//!
//! Everything in this crate lives in dimension two (two transmit antennas, two
//! users, two receive antennas), so the kernel is written for clarity rather
//! than for large sizes. Matrices are stored row-major and treated as values.
//!
//! The 2x2 singular value decomposition is closed form: the Hermitian Gram
//! matrix `W = HᴴH` is diagonalized with the quadratic formula and the left
//! singular vectors are recovered from `H v / λ`.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Complex = Complex64;

pub const ZERO: Complex = Complex::new(0.0, 0.0);
pub const ONE: Complex = Complex::new(1.0, 0.0);

/// Relative pivot threshold below which a matrix is reported as singular.
const SINGULAR_RTOL: f64 = 1e-14;

/// Ratio `λ2 / λ1` below which the second left singular vector is completed
/// orthogonally instead of being computed from `H v2 / λ2`.
pub const RANK_DEFICIENT_RTOL: f64 = 1e-12;

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting bad shapes and
    /// non-finite values.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!("empty shape {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(k) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite {
                row: k / cols,
                col: k % cols,
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![ONE; n])
    }

    pub fn diag(entries: &[Complex]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn diag_real(entries: &[f64]) -> Self {
        let entries: Vec<Complex> = entries.iter().map(|&x| Complex::new(x, 0.0)).collect();
        Self::diag(&entries)
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows<R: AsRef<[Complex]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        if rows.iter().any(|r| r.as_ref().len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        let data = rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect();
        Self::new(rows.len(), cols, data)
    }

    /// Builds a 2x2 matrix from its four entries.
    pub fn from_2x2(m00: Complex, m01: Complex, m10: Complex, m11: Complex) -> Self {
        Self {
            rows: 2,
            cols: 2,
            data: vec![m00, m01, m10, m11],
        }
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns<C: AsRef<[Complex]>>(cols: &[C]) -> Result<Self> {
        let rows = cols.first().map(|c| c.as_ref().len()).unwrap_or(0);
        if cols.iter().any(|c| c.as_ref().len() != rows) {
            return Err(Error::Dimension("ragged columns".into()));
        }
        let mut data = Vec::with_capacity(rows * cols.len());
        for i in 0..rows {
            for c in cols {
                data.push(c.as_ref()[i]);
            }
        }
        Self::new(rows, cols.len(), data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex] {
        &self.data
    }

    pub fn row(&self, i: usize) -> Vec<Complex> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn column(&self, j: usize) -> Vec<Complex> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Column `j` of a two-row matrix as a fixed-size vector.
    pub fn column2(&self, j: usize) -> [Complex; 2] {
        debug_assert_eq!(self.rows, 2);
        [self[(0, j)], self[(1, j)]]
    }

    /// Row `i` of a two-column matrix as a fixed-size vector.
    pub fn row2(&self, i: usize) -> [Complex; 2] {
        debug_assert_eq!(self.cols, 2);
        [self[(i, 0)], self[(i, 1)]]
    }

    pub fn scale(&self, k: Complex) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * k).collect(),
        }
    }

    /// Entrywise sum; shapes must agree.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    /// Entrywise difference; shapes must agree.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex, Complex) -> Complex) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Matrix-vector product.
    pub fn apply(&self, x: &[Complex]) -> Result<Vec<Complex>> {
        if x.len() != self.cols {
            return Err(Error::Dimension(format!(
                "{}x{} matrix applied to length-{} vector",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(x)
                    .map(|(&a, &b)| a * b)
                    .sum()
            })
            .collect())
    }

    /// Product with a 2-vector, for 2x2 matrices on hot paths.
    pub fn apply2(&self, x: &[Complex; 2]) -> [Complex; 2] {
        debug_assert!(self.rows == 2 && self.cols == 2);
        let d = &self.data;
        [d[0] * x[0] + d[1] * x[1], d[2] * x[0] + d[3] * x[1]]
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex;

    fn index(&self, (i, j): (usize, usize)) -> &Complex {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Display for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                let z = self[(i, j)];
                write!(f, "{:.6}{:+.6}j", z.re, z.im)?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

/// Standard matrix product `a·b`.
pub fn mat_mul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.cols != b.rows {
        return Err(Error::Dimension(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut out = ComplexMatrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        for k in 0..a.cols {
            let aik = a.data[i * a.cols + k];
            for j in 0..b.cols {
                out.data[i * b.cols + j] += aik * b.data[k * b.cols + j];
            }
        }
    }
    Ok(out)
}

/// Conjugate transpose `aᴴ`.
pub fn conj_transpose(a: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(a.cols, a.rows);
    for i in 0..a.rows {
        for j in 0..a.cols {
            out.data[j * a.rows + i] = a.data[i * a.cols + j].conj();
        }
    }
    out
}

/// Frobenius norm.
pub fn fro_norm(a: &ComplexMatrix) -> f64 {
    a.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Inverse of a square matrix.
///
/// 2x2 inputs use the adjugate; larger ones use Gauss-Jordan elimination with
/// partial pivoting. A pivot (or, for 2x2, `|det|/‖a‖_F`) below `1e-14·‖a‖_F`
/// is reported as [`Error::Singular`].
pub fn mat_inv(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "cannot invert a {}x{} matrix",
            a.rows, a.cols
        )));
    }
    let scale = fro_norm(a);
    if scale == 0.0 {
        return Err(Error::Singular);
    }
    let tol = SINGULAR_RTOL * scale;

    if a.rows == 1 {
        let z = a.data[0];
        if z.norm() <= tol {
            return Err(Error::Singular);
        }
        return ComplexMatrix::new(1, 1, vec![z.inv()]);
    }

    if a.rows == 2 {
        let d = &a.data;
        let det = d[0] * d[3] - d[1] * d[2];
        // |det| has the units of ‖a‖², so compare |det|/‖a‖ against the pivot tolerance.
        if det.norm() / scale <= tol {
            return Err(Error::Singular);
        }
        let inv_det = det.inv();
        return Ok(ComplexMatrix::from_2x2(
            d[3] * inv_det,
            -d[1] * inv_det,
            -d[2] * inv_det,
            d[0] * inv_det,
        ));
    }

    let n = a.rows;
    let mut work = a.clone();
    let mut inv = ComplexMatrix::identity(n);
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&x, &y| {
                work[(x, col)]
                    .norm()
                    .total_cmp(&work[(y, col)].norm())
                    .then(y.cmp(&x))
            })
            .expect("non-empty pivot range");
        if work[(pivot_row, col)].norm() <= tol {
            return Err(Error::Singular);
        }
        if pivot_row != col {
            for j in 0..n {
                work.data.swap(pivot_row * n + j, col * n + j);
                inv.data.swap(pivot_row * n + j, col * n + j);
            }
        }
        let p = work[(col, col)].inv();
        for j in 0..n {
            work[(col, j)] *= p;
            inv[(col, j)] *= p;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = work[(i, col)];
            if f == ZERO {
                continue;
            }
            for j in 0..n {
                let w = work[(col, j)];
                let v = inv[(col, j)];
                work[(i, j)] -= f * w;
                inv[(i, j)] -= f * v;
            }
        }
    }
    Ok(inv)
}

/// Inner product `xᴴy`.
pub fn dot(x: &[Complex], y: &[Complex]) -> Complex {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn vec_norm(x: &[Complex]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Rotates `v` by a unit phase so that its largest-magnitude entry (first one
/// on ties) is real and nonnegative.
pub fn canonical_phase(v: &mut [Complex]) {
    let mut best = 0;
    for (i, z) in v.iter().enumerate() {
        if z.norm() > v[best].norm() {
            best = i;
        }
    }
    let pivot = v[best];
    let mag = pivot.norm();
    if mag == 0.0 {
        return;
    }
    let rot = pivot.conj() / mag;
    for z in v.iter_mut() {
        *z *= rot;
    }
    v[best] = Complex::new(mag, 0.0);
}

/// A unit 2-vector orthogonal to `v`: `[-conj(v[1]), conj(v[0])]`.
pub fn orthogonal_complement2(v: &[Complex; 2]) -> [Complex; 2] {
    [-v[1].conj(), v[0].conj()]
}

/// Singular value decomposition of a 2x2 complex matrix.
///
/// `h = u · diag(λ1, λ2) · vᴴ` with `λ1 ≥ λ2 ≥ 0`. Each column of `v` has its
/// largest-magnitude entry real and nonnegative, which makes the factorization
/// a deterministic function of `h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvdFactorization {
    pub u: ComplexMatrix,
    pub lambda1: f64,
    pub lambda2: f64,
    pub v: ComplexMatrix,
}

impl SvdFactorization {
    /// Principal right singular vector (first column of `v`).
    pub fn v1(&self) -> [Complex; 2] {
        self.v.column2(0)
    }

    pub fn sigma(&self) -> ComplexMatrix {
        ComplexMatrix::diag_real(&[self.lambda1, self.lambda2])
    }

    /// Rebuilds `u · Λ · vᴴ`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let us = mat_mul(&self.u, &self.sigma()).expect("2x2 shapes");
        mat_mul(&us, &conj_transpose(&self.v)).expect("2x2 shapes")
    }
}

/// Closed-form SVD of a 2x2 complex matrix.
pub fn svd2x2(h: &ComplexMatrix) -> Result<SvdFactorization> {
    if h.rows != 2 || h.cols != 2 {
        return Err(Error::Dimension(format!(
            "svd2x2 needs a 2x2 matrix, got {}x{}",
            h.rows, h.cols
        )));
    }
    let d = &h.data;
    let (h00, h01, h10, h11) = (d[0], d[1], d[2], d[3]);

    // Gram matrix W = HᴴH = [[w11, w12], [conj(w12), w22]].
    let w11 = h00.norm_sqr() + h10.norm_sqr();
    let w22 = h01.norm_sqr() + h11.norm_sqr();
    let w12 = h00.conj() * h01 + h10.conj() * h11;

    let trace = w11 + w22;
    if trace == 0.0 {
        return Ok(SvdFactorization {
            u: ComplexMatrix::identity(2),
            lambda1: 0.0,
            lambda2: 0.0,
            v: ComplexMatrix::identity(2),
        });
    }

    // μ = (tr ± √(tr² − 4 det)) / 2, with tr² − 4 det = (w11 − w22)² + 4|w12|².
    let diff = w11 - w22;
    let disc = diff.hypot(2.0 * w12.norm());
    let mu1 = 0.5 * (trace + disc);
    let lambda1 = mu1.sqrt();
    // λ1·λ2 = |det H| exactly, which is better conditioned than √μ2 when λ2 ≪ λ1.
    let det_h = (h00 * h11 - h01 * h10).norm();
    let lambda2 = (det_h / lambda1).min(lambda1);

    // Eigenvector of W for μ1, taken from whichever row of (W − μ1 I) avoids
    // cancellation: μ1 − w22 = (diff + disc)/2 and μ1 − w11 = (disc − diff)/2.
    let mut v1 = if diff >= 0.0 {
        [Complex::new(0.5 * (diff + disc), 0.0), w12.conj()]
    } else {
        [w12, Complex::new(0.5 * (disc - diff), 0.0)]
    };
    let n1 = vec_norm(&v1);
    if n1 <= f64::EPSILON * trace {
        // W is a multiple of the identity; any basis is a valid eigenbasis.
        v1 = [ONE, ZERO];
    } else {
        v1 = [v1[0] / n1, v1[1] / n1];
    }
    canonical_phase(&mut v1);
    let mut v2 = orthogonal_complement2(&v1);
    canonical_phase(&mut v2);

    let hv1 = h.apply2(&v1);
    let u1 = [hv1[0] / lambda1, hv1[1] / lambda1];
    let u1n = vec_norm(&u1);
    let u1 = [u1[0] / u1n, u1[1] / u1n];

    // The second left vector is the unit complement of u1, phased so that
    // u2ᴴ H v2 is real and nonnegative. For λ2 ≤ 1e-12·λ1 any phase will do.
    let mut u2 = orthogonal_complement2(&u1);
    if lambda2 > RANK_DEFICIENT_RTOL * lambda1 {
        let t = dot(&u2, &h.apply2(&v2));
        let tn = t.norm();
        if tn > 0.0 {
            let ph = t / tn;
            u2 = [u2[0] * ph, u2[1] * ph];
        }
    }

    Ok(SvdFactorization {
        u: ComplexMatrix::from_2x2(u1[0], u2[0], u1[1], u2[1]),
        lambda1,
        lambda2,
        v: ComplexMatrix::from_2x2(v1[0], v2[0], v1[1], v2[1]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
        let data = (0..rows * cols)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        ComplexMatrix::new(rows, cols, data).unwrap()
    }

    fn residual_vs_identity(m: &ComplexMatrix) -> f64 {
        fro_norm(&m.sub(&ComplexMatrix::identity(m.rows())).unwrap())
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert!(matches!(
            ComplexMatrix::new(2, 2, vec![ZERO; 3]),
            Err(Error::Dimension(_))
        ));
        assert_eq!(
            ComplexMatrix::new(1, 2, vec![ZERO, c(f64::NAN, 0.0)]),
            Err(Error::NonFinite { row: 0, col: 1 })
        );
    }

    #[test]
    fn mat_mul_identity_and_j_squared() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_matrix(&mut rng, 2, 2);
        assert_eq!(mat_mul(&ComplexMatrix::identity(2), &a).unwrap(), a);

        let j = ComplexMatrix::diag(&[c(0.0, 1.0), c(0.0, 1.0)]);
        let jj = mat_mul(&j, &j).unwrap();
        assert_eq!(jj, ComplexMatrix::identity(2).scale(c(-1.0, 0.0)));
    }

    #[test]
    fn mat_mul_matches_triple_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for (m, k, n) in [(2, 2, 2), (2, 3, 4), (3, 1, 2)] {
            let a = random_matrix(&mut rng, m, k);
            let b = random_matrix(&mut rng, k, n);
            let got = mat_mul(&a, &b).unwrap();
            for i in 0..m {
                for j in 0..n {
                    let mut re = 0.0;
                    let mut im = 0.0;
                    for t in 0..k {
                        let (x, y) = (a[(i, t)], b[(t, j)]);
                        re += x.re * y.re - x.im * y.im;
                        im += x.re * y.im + x.im * y.re;
                    }
                    assert_abs_diff_eq!(got[(i, j)].re, re, epsilon = 1e-14);
                    assert_abs_diff_eq!(got[(i, j)].im, im, epsilon = 1e-14);
                }
            }
        }
        let a = random_matrix(&mut rng, 2, 3);
        assert!(matches!(mat_mul(&a, &a), Err(Error::Dimension(_))));
    }

    #[test]
    fn conj_transpose_cases() {
        let a = ComplexMatrix::new(1, 1, vec![c(1.0, 1.0)]).unwrap();
        assert_eq!(conj_transpose(&a)[(0, 0)], c(1.0, -1.0));

        let s = ComplexMatrix::from_2x2(c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(5.0, 0.0));
        assert_eq!(conj_transpose(&s), s);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = random_matrix(&mut rng, 2, 3);
        let rh = conj_transpose(&r);
        assert_eq!((rh.rows(), rh.cols()), (3, 2));
        assert_eq!(conj_transpose(&rh), r);
    }

    #[test]
    fn fro_norm_cases() {
        assert_eq!(fro_norm(&ComplexMatrix::zeros(2, 2)), 0.0);
        assert_abs_diff_eq!(fro_norm(&ComplexMatrix::identity(2)), 2f64.sqrt());
        let m = ComplexMatrix::new(1, 1, vec![c(3.0, 4.0)]).unwrap();
        assert_eq!(fro_norm(&m), 5.0);
    }

    #[test]
    fn mat_inv_cases() {
        let d = ComplexMatrix::diag_real(&[2.0, 4.0]);
        assert_eq!(mat_inv(&d).unwrap(), ComplexMatrix::diag_real(&[0.5, 0.25]));
        assert_eq!(
            mat_inv(&ComplexMatrix::identity(2)).unwrap(),
            ComplexMatrix::identity(2)
        );

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in [1, 2, 3, 4] {
            let a = random_matrix(&mut rng, n, n)
                .add(&ComplexMatrix::identity(n).scale(c(2.0, 0.0)))
                .unwrap();
            let inv = mat_inv(&a).unwrap();
            assert!(residual_vs_identity(&mat_mul(&a, &inv).unwrap()) <= 1e-10);
            let back = mat_inv(&inv).unwrap();
            assert!(fro_norm(&back.sub(&a).unwrap()) <= 1e-9 * fro_norm(&a));
        }
    }

    #[test]
    fn mat_inv_errors() {
        let sing = ComplexMatrix::from_2x2(c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0));
        assert_eq!(mat_inv(&sing), Err(Error::Singular));
        assert_eq!(mat_inv(&ComplexMatrix::zeros(3, 3)), Err(Error::Singular));
        let rank2 = ComplexMatrix::from_rows(&[
            [c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
            [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)],
            [c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)],
        ])
        .unwrap();
        assert_eq!(mat_inv(&rank2), Err(Error::Singular));
        assert!(matches!(
            mat_inv(&ComplexMatrix::zeros(2, 3)),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn svd_identity_and_diagonal() {
        let s = svd2x2(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!((s.lambda1, s.lambda2), (1.0, 1.0));
        assert_eq!(s.u, ComplexMatrix::identity(2));
        assert_eq!(s.v, ComplexMatrix::identity(2));

        let s = svd2x2(&ComplexMatrix::diag_real(&[2.0, 1.0])).unwrap();
        assert_eq!((s.lambda1, s.lambda2), (2.0, 1.0));

        // Swapped order: the larger singular value comes from the second axis.
        let s = svd2x2(&ComplexMatrix::diag_real(&[1.0, 3.0])).unwrap();
        assert_eq!((s.lambda1, s.lambda2), (3.0, 1.0));
        assert_eq!(s.v1(), [ZERO, ONE]);
    }

    #[test]
    fn svd_golden_ratio_case() {
        // W = [[1,1],[1,2]] has eigenvalues (3 ± √5)/2, so λ = (√5 ± 1)/2.
        let h = ComplexMatrix::from_2x2(ONE, ONE, ZERO, ONE);
        let s = svd2x2(&h).unwrap();
        let sqrt5 = 5f64.sqrt();
        assert_abs_diff_eq!(s.lambda1, (1.0 + sqrt5) / 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.lambda2, (sqrt5 - 1.0) / 2.0, epsilon = 1e-14);
        assert!(fro_norm(&s.reconstruct().sub(&h).unwrap()) <= 1e-12);
    }

    #[test]
    fn svd_zero_and_rank_one() {
        let s = svd2x2(&ComplexMatrix::zeros(2, 2)).unwrap();
        assert_eq!((s.lambda1, s.lambda2), (0.0, 0.0));
        assert_eq!(s.u, ComplexMatrix::identity(2));
        assert_eq!(s.v, ComplexMatrix::identity(2));

        // Outer product x yᴴ has rank one.
        let x = [c(0.3, -0.2), c(1.1, 0.5)];
        let y = [c(-0.7, 0.1), c(0.2, 0.9)];
        let h = ComplexMatrix::from_2x2(
            x[0] * y[0].conj(),
            x[0] * y[1].conj(),
            x[1] * y[0].conj(),
            x[1] * y[1].conj(),
        );
        let s = svd2x2(&h).unwrap();
        assert!(s.lambda2 <= 1e-12 * s.lambda1);
        assert!(fro_norm(&s.reconstruct().sub(&h).unwrap()) <= 1e-12);
        let uhu = mat_mul(&conj_transpose(&s.u), &s.u).unwrap();
        assert!(residual_vs_identity(&uhu) <= 1e-12);
    }

    #[test]
    fn svd_phase_convention_and_determinism() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let h = random_matrix(&mut rng, 2, 2);
            let s = svd2x2(&h).unwrap();
            for j in 0..2 {
                let col = s.v.column2(j);
                let k = if col[1].norm() > col[0].norm() { 1 } else { 0 };
                assert_eq!(col[k].im, 0.0);
                assert!(col[k].re >= 0.0);
            }
            assert_eq!(svd2x2(&h).unwrap(), s);
        }
    }

    #[test]
    fn svd_rejects_non_square() {
        assert!(matches!(
            svd2x2(&ComplexMatrix::zeros(2, 3)),
            Err(Error::Dimension(_))
        ));
    }
}
