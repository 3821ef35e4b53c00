//! Single-party quantum channels and their measurement branches.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{GmeError, Result};
use crate::linalg::max_abs;
use crate::random::random_isometry;
use crate::state::PureState;

/// Branches with probability below this are dropped.
pub const BRANCH_CUTOFF: f64 = 1e-12;

/// Kraus operators `K_k` acting on one party, with `sum_k K_k^dag K_k = I`.
#[derive(Clone, Debug)]
pub struct LocalChannel {
    party: usize,
    kraus: Vec<DMatrix<Complex64>>,
}

impl LocalChannel {
    pub fn new(party: usize, kraus: Vec<DMatrix<Complex64>>) -> Result<Self> {
        Self::with_tol(party, kraus, 1e-9)
    }

    pub fn with_tol(party: usize, kraus: Vec<DMatrix<Complex64>>, tol: f64) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| GmeError::InvalidDims("channel has no Kraus operators".into()))?;
        let d = first.ncols();
        if kraus.iter().any(|k| k.nrows() != d || k.ncols() != d) {
            return Err(GmeError::InvalidDims("Kraus operators must all be d x d".into()));
        }
        let sum = kraus.iter().fold(DMatrix::zeros(d, d), |acc, k| acc + k.adjoint() * k);
        let defect = max_abs(&(sum - DMatrix::identity(d, d)));
        if defect > tol {
            return Err(GmeError::KrausIncomplete(defect));
        }
        Ok(Self { party, kraus })
    }

    pub fn unitary(party: usize, u: DMatrix<Complex64>) -> Result<Self> {
        Self::new(party, vec![u])
    }

    /// Complete projective measurement in the computational basis.
    pub fn projective(party: usize, d: usize) -> Self {
        let kraus = (0..d)
            .map(|k| {
                let mut p = DMatrix::zeros(d, d);
                p[(k, k)] = Complex64::new(1.0, 0.0);
                p
            })
            .collect();
        Self { party, kraus }
    }

    /// Random channel with `n_kraus` operators cut from a Haar isometry.
    pub fn random<R: Rng + ?Sized>(party: usize, d: usize, n_kraus: usize, rng: &mut R) -> Self {
        let v = random_isometry(d * n_kraus, d, rng);
        let kraus = (0..n_kraus).map(|k| v.rows(k * d, d).into_owned()).collect();
        Self { party, kraus }
    }

    pub fn party(&self) -> usize {
        self.party
    }

    pub fn kraus(&self) -> &[DMatrix<Complex64>] {
        &self.kraus
    }
}

/// One outcome of a local channel: probability and renormalized post-state.
#[derive(Clone, Debug)]
pub struct Branch {
    pub probability: f64,
    pub state: PureState,
}

/// Splits `psi` into the branches `K_k psi / ||K_k psi||`.
pub fn apply_local_channel_branches(psi: &PureState, ch: &LocalChannel) -> Result<Vec<Branch>> {
    let n = psi.n_parties();
    if ch.party >= n {
        return Err(GmeError::PartyOutOfRange { party: ch.party, parties: n });
    }
    let mut branches = Vec::with_capacity(ch.kraus.len());
    for k in &ch.kraus {
        let amps = psi.apply_local(ch.party, k)?;
        let p: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if p < BRANCH_CUTOFF {
            continue;
        }
        let state = PureState::normalized(psi.dims().to_vec(), amps)?;
        branches.push(Branch { probability: p, state });
    }
    Ok(branches)
}
