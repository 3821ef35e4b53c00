//! Separability structure of non-GME pure states.
//!
//! A vanishing triangle area forces a vanishing edge, and a vanishing cut
//! concurrence means the state factors across that cut. Refining the party
//! set by every product cut gives the finest factorization visible from cut
//! concurrences.

use serde::Serialize;

use crate::concurrence::{full_cut_table, CutConcurrenceTable};
use crate::cut::{Cut, PartySet};
use crate::error::{GmeError, Result};
use crate::linalg::hermitian_eig;
use crate::state::{split_indices, tensor_product, PartialTrace, PureState, C64};

pub const DEFAULT_TOL: f64 = 1e-6;
pub const MAX_CLASSIFIER_PARTIES: usize = 10;
/// Cuts within this factor above `tol` are reported as marginal.
pub const MARGINAL_FACTOR: f64 = 10.0;

#[derive(Clone, Debug, Serialize)]
pub struct MarginalCut {
    pub cut: Cut,
    pub concurrence: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Factorization {
    /// Disjoint blocks covering every party, ordered by their lowest party.
    pub factors: Vec<PartySet>,
    pub is_gme: bool,
    pub product_cuts: Vec<Cut>,
    /// Cuts with `tol < C <= 10 tol`: close enough to the threshold to deserve a look.
    pub marginal_cuts: Vec<MarginalCut>,
    pub tol: f64,
    /// Max entrywise `|(x)_F rho_F - |psi><psi||`.
    pub reconstruction_deviation: f64,
}

impl Factorization {
    pub fn factor_labels(&self) -> Vec<Vec<usize>> {
        self.factors.iter().map(|f| f.labels()).collect()
    }
}

pub fn product_cuts(psi: &PureState, tol: f64) -> Result<Vec<Cut>> {
    if psi.n_parties() < 2 {
        return Err(GmeError::PartyCount { expected: ">= 2", got: psi.n_parties() });
    }
    Ok(product_cuts_from_table(&full_cut_table(psi), tol))
}

pub fn product_cuts_from_table(table: &CutConcurrenceTable, tol: f64) -> Vec<Cut> {
    table.iter().filter(|(_, &c)| c <= tol).map(|(cut, _)| *cut).collect()
}

/// Common refinement of the full party set by every cut.
pub fn refine(n: usize, cuts: &[Cut]) -> Vec<PartySet> {
    let mut blocks = vec![PartySet::full(n)];
    for cut in cuts {
        let s = cut.side();
        blocks = blocks
            .into_iter()
            .flat_map(|b| [b.intersection(&s), b.intersection(&s.complement())])
            .filter(|b| !b.is_empty())
            .collect();
    }
    blocks.sort_by_key(|b| b.mask().trailing_zeros());
    blocks
}

/// Tolerance for the reconstruction check paired with a cut tolerance:
/// 1e-6 for exact input, up to 1e-3 for rounded fixtures.
pub fn reconstruction_tol(tol: f64) -> f64 {
    tol.clamp(1e-6, 1e-3)
}

pub fn finest_factorization(psi: &PureState, tol: f64) -> Result<Factorization> {
    let n = psi.n_parties();
    if n < 2 {
        return Err(GmeError::PartyCount { expected: ">= 2", got: n });
    }
    if n > MAX_CLASSIFIER_PARTIES {
        return Err(GmeError::OutOfRange { what: "classifier party count", value: n, lo: 2, hi: MAX_CLASSIFIER_PARTIES });
    }
    let table = full_cut_table(psi);
    classify_with_table(psi, &table, tol)
}

pub fn classify_with_table(psi: &PureState, table: &CutConcurrenceTable, tol: f64) -> Result<Factorization> {
    let n = psi.n_parties();
    let cuts = product_cuts_from_table(table, tol);
    let factors = refine(n, &cuts);
    let marginal_cuts = table
        .iter()
        .filter(|(_, &c)| c > tol && c <= MARGINAL_FACTOR * tol)
        .map(|(cut, &c)| MarginalCut { cut: *cut, concurrence: c })
        .collect();
    let deviation = reconstruction_deviation(psi, &factors)?;
    let rtol = reconstruction_tol(tol);
    if deviation > rtol {
        return Err(GmeError::InconsistentFactorization { deviation, tol: rtol });
    }
    Ok(Factorization {
        is_gme: factors.len() == 1,
        factors,
        product_cuts: cuts,
        marginal_cuts,
        tol,
        reconstruction_deviation: deviation,
    })
}

/// Largest entrywise gap between the product of the factor marginals and `|psi><psi|`.
pub fn reconstruction_deviation(psi: &PureState, factors: &[PartySet]) -> Result<f64> {
    if factors.len() <= 1 {
        return Ok(0.0);
    }
    let dims = psi.dims();
    let mut pieces = Vec::with_capacity(factors.len());
    for f in factors {
        let rho = psi.partial_trace(f)?;
        let split = split_indices(dims, f);
        pieces.push((rho, split.row));
    }
    let amps = psi.amplitudes();
    let d = amps.len();
    let mut worst = 0.0f64;
    for r in 0..d {
        for c in 0..d {
            let mut prod = C64::new(1.0, 0.0);
            for (rho, idx) in &pieces {
                prod *= rho.matrix()[(idx[r], idx[c])];
            }
            worst = worst.max((prod - amps[r] * amps[c].conj()).norm());
        }
    }
    Ok(worst)
}

/// Rebuilds a pure state from the dominant eigenvector of each factor's marginal.
pub fn reassemble(psi: &PureState, factors: &[PartySet]) -> Result<PureState> {
    if factors.len() <= 1 {
        return Ok(psi.clone());
    }
    let mut parts = Vec::with_capacity(factors.len());
    let mut order = Vec::with_capacity(psi.n_parties());
    for f in factors {
        let rho = psi.partial_trace(f)?;
        let eig = hermitian_eig(rho.matrix())?;
        let v: Vec<C64> = eig.vectors.column(0).iter().copied().collect();
        parts.push(PureState::normalized(rho.dims().to_vec(), v)?);
        order.extend(f.parties());
    }
    let joined = tensor_product(&parts)?;
    // joined has parties in `order`; invert that permutation
    let mut inverse = vec![0usize; order.len()];
    for (pos, &p) in order.iter().enumerate() {
        inverse[p] = pos;
    }
    joined.permute_parties(&inverse)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::haar_random_pure;

    fn ps(n: usize, p: &[usize]) -> PartySet {
        PartySet::new(n, p).unwrap()
    }

    #[test]
    fn ghz_has_no_product_cuts() {
        assert!(product_cuts(&PureState::ghz(4).unwrap(), DEFAULT_TOL).unwrap().is_empty());
        let f = finest_factorization(&PureState::ghz(3).unwrap(), DEFAULT_TOL).unwrap();
        assert!(f.is_gme);
        assert_eq!(f.factors, vec![PartySet::full(3)]);
    }

    #[test]
    fn zero_tensor_bell() {
        let z = PureState::basis(vec![2], &[0]).unwrap();
        let s = tensor_product(&[z, PureState::ghz(2).unwrap()]).unwrap();
        let cuts = product_cuts(&s, DEFAULT_TOL).unwrap();
        assert_eq!(cuts, vec![Cut::from_parties(3, &[0]).unwrap()]);
    }

    #[test]
    fn two_singletons_and_a_pair() {
        let z = PureState::basis(vec![2], &[0]).unwrap();
        let s = tensor_product(&[z.clone(), z, PureState::ghz(2).unwrap()]).unwrap();
        let f = finest_factorization(&s, DEFAULT_TOL).unwrap();
        assert_eq!(f.factors, vec![ps(4, &[0]), ps(4, &[1]), ps(4, &[2, 3])]);
        assert!(!f.is_gme);
    }

    #[test]
    fn interleaved_factors_found() {
        // parties 0,2 entangled; 1,3 entangled
        let a = haar_random_pure(&[2, 3], 4).unwrap();
        let b = haar_random_pure(&[2, 2], 5).unwrap();
        let s = tensor_product(&[a, b]).unwrap().permute_parties(&[0, 2, 1, 3]).unwrap();
        let f = finest_factorization(&s, DEFAULT_TOL).unwrap();
        assert_eq!(f.factors, vec![ps(4, &[0, 2]), ps(4, &[1, 3])]);
        assert!(f.reconstruction_deviation < 1e-9);
    }

    #[test]
    fn refinement_order_independent() {
        let cuts = vec![
            Cut::from_parties(5, &[0]).unwrap(),
            Cut::from_parties(5, &[0, 1]).unwrap(),
            Cut::from_parties(5, &[3, 4]).unwrap(),
        ];
        let a = refine(5, &cuts);
        let mut rev = cuts.clone();
        rev.reverse();
        assert_eq!(a, refine(5, &rev));
        assert_eq!(a, vec![ps(5, &[0]), ps(5, &[1]), ps(5, &[2]), ps(5, &[3, 4])]);
    }

    #[test]
    fn idempotent_on_reassembled_state() {
        let a = haar_random_pure(&[2], 1).unwrap();
        let b = haar_random_pure(&[3, 2], 2).unwrap();
        let c = haar_random_pure(&[2, 2], 3).unwrap();
        let s = tensor_product(&[a, b, c]).unwrap().permute_parties(&[1, 3, 0, 4, 2]).unwrap();
        let f = finest_factorization(&s, DEFAULT_TOL).unwrap();
        let back = reassemble(&s, &f.factors).unwrap();
        assert!((back.inner(&s).norm() - 1.0).abs() < 1e-9);
        let g = finest_factorization(&back, DEFAULT_TOL).unwrap();
        assert_eq!(f.factors, g.factors);
    }

    #[test]
    fn inconsistent_when_tolerance_too_loose() {
        let s = haar_random_pure(&[2, 2, 2], 8).unwrap();
        let err = finest_factorization(&s, 2.0).unwrap_err();
        assert!(err.is_internal());
    }

    #[test]
    fn too_many_parties() {
        let s = PureState::ghz(11).unwrap();
        assert!(matches!(finest_factorization(&s, DEFAULT_TOL), Err(GmeError::OutOfRange { .. })));
    }

    #[test]
    fn marginal_cuts_flagged() {
        // slightly entangled pair: C = 2|ab| for a|00> + b|11>
        let eps: f64 = 2e-6;
        let b = eps / 2.0;
        let a = (1.0 - b * b).sqrt();
        let pair = PureState::new(vec![2, 2], vec![C64::new(a, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(b, 0.0)]).unwrap();
        let f = finest_factorization(&pair, 1e-6).unwrap();
        assert_eq!(f.marginal_cuts.len(), 1);
        assert!(f.is_gme);
    }
}
