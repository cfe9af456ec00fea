//! Generalized multi-unitary decomposition (GMUD) of 2x2 complex channels and
//! its use as a limited-feedback precoder for a two-user MIMO downlink.
//!
//! A channel `H = U Λ Vᴴ` is rewritten as `H = P R Qᴴ` with an upper
//! triangular `R` whose top-left entry `r` can be anything in `[λ2, λ1]`.
//! The first column of `Q` then sweeps a cone around the principal right
//! singular vector, which gives the transmitter a family of beams to choose
//! from while users only report `(λ1, λ2, v1)`.
//!
//! Modules, bottom up:
//! * [`linalg`]: small dense complex matrices and a closed-form 2x2 SVD,
//! * [`decomposition`]: the GMUD factorization and its beams,
//! * [`precoding`]: regularized inversion, antenna selection, GMUD search,
//! * [`feedback`]: the bit-exact `12·N`-bit feedback messages,
//! * [`modulation`], [`channel`], [`sim`]: the Monte Carlo link.

pub mod channel;
pub mod decomposition;
pub mod error;
pub mod feedback;
pub mod linalg;
pub mod modulation;
pub mod precoding;
pub mod sim;

pub use decomposition::{gmud, GmudFactorization, PhasePair};
pub use error::{Error, Result};
pub use linalg::{svd2x2, Complex, ComplexMatrix, SvdFactorization};
pub use modulation::Modulation;
pub use precoding::{GridSpec, Scheme};
pub use sim::{run_ber, BerCurve, BerPoint, FeedbackMode, SimConfig};
