//! Seeded sampling of Haar-random states, unitaries and local channels.
//!
//! All randomness flows through ChaCha8 streams seeded with `seed_from_u64`,
//! so every sample is reproducible from its seed.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::state::{check_dims, PureState};

pub type GmeRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> GmeRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// An independent stream derived from `seed` and `stream`.
pub fn substream(seed: u64, stream: u64) -> GmeRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Normalized standard complex Gaussian vector over `dims`.
pub fn haar_random_pure(dims: &[usize], seed: u64) -> Result<PureState> {
    haar_random_pure_with(dims, &mut seeded_rng(seed))
}

pub fn haar_random_pure_with<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<PureState> {
    let total = check_dims(dims)?;
    let amps = (0..total).map(|_| gaussian(rng)).collect();
    PureState::normalized(dims.to_vec(), amps)
}

/// `rows x cols` matrix with orthonormal columns (`rows >= cols`), Haar distributed.
pub fn random_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<Complex64> {
    assert!(rows >= cols && cols > 0);
    let g = DMatrix::from_fn(rows, cols, |_, _| gaussian(rng));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    // Fix the phase gauge of QR so the result is Haar rather than QR-biased.
    DMatrix::from_fn(rows, cols, |i, j| {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        q[(i, j)] * phase
    })
}

pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DMatrix<Complex64> {
    random_isometry(d, d, rng)
}
