//! Bipartite concurrences and the polygamy inequalities they satisfy.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::cut::{Cut, PartySet};
use crate::error::{GmeError, Result};
use crate::linalg::hermitian_eig;
use crate::state::{linear_entropy, marginal_purity, DensityMatrix, PartialTrace, PureState};

/// Slack below which an inequality counts as violated.
pub const SLACK_TOL: f64 = 1e-9;

/// `sqrt(2(1 - Tr rho_S^2))`, clamped at zero inside the root.
pub fn concurrence_pure(psi: &PureState, set: &PartySet) -> Result<f64> {
    if set.n_parties() != psi.n_parties() {
        return Err(GmeError::InvalidDims(format!(
            "cut over {} parties on a {}-party state",
            set.n_parties(),
            psi.n_parties()
        )));
    }
    let cut = Cut::new(*set)?;
    Ok(concurrence_of_cut(psi, &cut))
}

pub(crate) fn concurrence_of_cut(psi: &PureState, cut: &Cut) -> f64 {
    concurrence_from_purity(marginal_purity(psi, &cut.side()))
}

fn concurrence_from_purity(p: f64) -> f64 {
    (2.0 * (1.0 - p)).max(0.0).sqrt()
}

/// Upper bound `sqrt(2(1 - 1/d))` for a cut whose smaller side has dimension `d`.
pub fn max_concurrence(d_small: usize) -> f64 {
    (2.0 * (1.0 - 1.0 / d_small as f64)).sqrt()
}

/// Concurrence of every canonical cut whose smaller side has at most
/// `max_subset_size` parties.
#[derive(Clone, Debug, Serialize)]
pub struct CutConcurrenceTable {
    pub dims: Vec<usize>,
    pub max_subset_size: usize,
    pub entries: BTreeMap<Cut, f64>,
}

impl CutConcurrenceTable {
    /// Looks up either side of a cut.
    pub fn get(&self, set: &PartySet) -> Option<f64> {
        Cut::new(*set).ok().and_then(|c| self.entries.get(&c).copied())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Cut, &f64)> {
        self.entries.iter()
    }

    /// Dimension of the smaller-dimensional side of `cut`.
    pub fn min_side_dim(&self, cut: &Cut) -> usize {
        let s = cut.side();
        let (a, b) = self.dims.iter().enumerate().fold((1usize, 1usize), |(a, b), (k, &d)| {
            if s.contains(k) { (a * d, b) } else { (a, b * d) }
        });
        a.min(b)
    }
}

pub fn all_cut_concurrences(psi: &PureState, max_subset_size: usize) -> Result<CutConcurrenceTable> {
    let n = psi.n_parties();
    let hi = n / 2;
    if max_subset_size < 1 || max_subset_size > hi {
        return Err(GmeError::OutOfRange { what: "max_subset_size", value: max_subset_size, lo: 1, hi });
    }
    let cuts: Vec<Cut> = Cut::all(n).filter(|c| c.smaller_side().len() <= max_subset_size).collect();
    let values = cut_values(psi, &cuts);
    Ok(CutConcurrenceTable {
        dims: psi.dims().to_vec(),
        max_subset_size,
        entries: cuts.into_iter().zip(values).collect(),
    })
}

fn cut_values(psi: &PureState, cuts: &[Cut]) -> Vec<f64> {
    // Thread dispatch costs more than the work for small registers.
    if psi.dim() * cuts.len() < 1 << 14 {
        cuts.iter().map(|c| concurrence_of_cut(psi, c)).collect()
    } else {
        cuts.par_iter().map(|c| concurrence_of_cut(psi, c)).collect()
    }
}

/// Table over every bipartition of `psi`.
pub fn full_cut_table(psi: &PureState) -> CutConcurrenceTable {
    let n = psi.n_parties();
    let cuts: Vec<Cut> = Cut::all(n).collect();
    let values = cut_values(psi, &cuts);
    CutConcurrenceTable {
        dims: psi.dims().to_vec(),
        max_subset_size: n / 2,
        entries: cuts.into_iter().zip(values).collect(),
    }
}

fn sigma_y_y() -> DMatrix<Complex64> {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    // sigma_y (x) sigma_y is real: anti-diagonal (-1, 1, 1, -1).
    DMatrix::from_row_slice(
        4,
        4,
        &[z, z, z, -one, z, z, one, z, z, one, z, z, -one, z, z, z],
    )
}

/// Two-qubit mixed-state concurrence `max(0, l1 - l2 - l3 - l4)`.
///
/// The `l_k` are the square roots of the eigenvalues of `rho * rho_tilde`,
/// obtained here from the Hermitian matrix `sqrt(rho) rho_tilde sqrt(rho)`
/// which shares that spectrum.
pub fn wootters_concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.dims() != [2, 2] {
        return Err(GmeError::InvalidDims(format!("Wootters concurrence needs dims [2, 2], got {:?}", rho.dims())));
    }
    let m = rho.matrix();
    let yy = sigma_y_y();
    let eig = hermitian_eig(m)?;
    let mut sqrt_rho = DMatrix::zeros(4, 4);
    for (k, &lam) in eig.values.iter().enumerate() {
        let v = eig.vectors.column(k);
        sqrt_rho += (&v * v.adjoint()) * Complex64::new(lam.max(0.0).sqrt(), 0.0);
    }
    // sqrt(rho) rho~ sqrt(rho) = A A^dag with A = sqrt(rho) Y sqrt(rho)^*, so the
    // square-rooted eigenvalues are the singular values of A.
    let a = &sqrt_rho * &yy * sqrt_rho.map(|z| z.conj());
    let mut l: Vec<f64> = a.singular_values().iter().copied().collect();
    l.sort_by(|x, y| y.total_cmp(x));
    Ok((l[0] - l[1] - l[2] - l[3]).max(0.0))
}

/// Both sides of `|T(rho_A) - T(rho_B)| <= T(rho_AB) <= T(rho_A) + T(rho_B)`
/// for a bipartite `rho_AB` with `dims = [d_A, d_B]`, as (lower, upper) slacks.
pub fn linear_entropy_slacks(rho_ab: &DensityMatrix) -> Result<(f64, f64)> {
    if rho_ab.n_parties() != 2 {
        return Err(GmeError::PartyCount { expected: "2", got: rho_ab.n_parties() });
    }
    let ta = linear_entropy(&rho_ab.partial_trace(&PartySet::singleton(2, 0))?);
    let tb = linear_entropy(&rho_ab.partial_trace(&PartySet::singleton(2, 1))?);
    let tab = linear_entropy(rho_ab);
    Ok((tab - (ta - tb).abs(), ta + tb - tab))
}

#[derive(Clone, Debug, Serialize)]
pub struct PairSlack {
    pub i: usize,
    pub j: usize,
    /// `C_{i|rest} + C_{j|rest} - C_{ij|rest}`
    pub pair_cut_bound: f64,
    /// `C_{ij|rest} + C_{j|rest} - C_{i|rest}`
    pub single_bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EntropySlack {
    pub s: PartySet,
    pub t: PartySet,
    pub lower: f64,
    pub upper: f64,
}

/// Slacks of every inequality checked for one pure state. Negative slack is a violation.
#[derive(Clone, Debug, Serialize)]
pub struct PolygamyReport {
    /// `sum_{j != i} C^2_j - C^2_i` per party.
    pub squared: Vec<f64>,
    /// `sum_{j != i} C_j - C_i` per party.
    pub linear: Vec<f64>,
    /// Ordered pairs `(i, j)`, `i != j`.
    pub pairs: Vec<PairSlack>,
    /// Disjoint nonempty party sets `S`, `S'` with `S` before `S'`.
    pub entropy: Vec<EntropySlack>,
    pub min_slack: f64,
    pub all_hold: bool,
}

impl PolygamyReport {
    pub fn violations(&self) -> usize {
        let neg = |x: &f64| *x < -SLACK_TOL;
        self.squared.iter().filter(|x| neg(x)).count()
            + self.linear.iter().filter(|x| neg(x)).count()
            + self
                .pairs
                .iter()
                .map(|p| neg(&p.pair_cut_bound) as usize + neg(&p.single_bound) as usize)
                .sum::<usize>()
            + self
                .entropy
                .iter()
                .map(|e| neg(&e.lower) as usize + neg(&e.upper) as usize)
                .sum::<usize>()
    }
}

pub fn check_polygamy(psi: &PureState) -> Result<PolygamyReport> {
    let n = psi.n_parties();
    if n < 3 {
        return Err(GmeError::PartyCount { expected: ">= 3", got: n });
    }
    // Linear entropy of every party subset (subset and complement share it).
    let full = (1u32 << n) - 1;
    let mut entropy = vec![0.0f64; 1 << n];
    for mask in 1..full {
        if mask & 1 == 1 {
            let t = 1.0 - marginal_purity(psi, &PartySet::from_mask(n, mask));
            entropy[mask as usize] = t;
            entropy[(full ^ mask) as usize] = t;
        }
    }
    let conc = |mask: u32| concurrence_from_purity(1.0 - entropy[mask as usize]);
    let single: Vec<f64> = (0..n).map(|i| conc(1 << i)).collect();
    let sum_sq: f64 = single.iter().map(|c| c * c).sum();
    let sum: f64 = single.iter().sum();
    let squared: Vec<f64> = single.iter().map(|c| sum_sq - 2.0 * c * c).collect();
    let linear: Vec<f64> = single.iter().map(|c| sum - 2.0 * c).collect();

    let mut pairs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let cij = conc((1 << i) | (1 << j));
            pairs.push(PairSlack {
                i,
                j,
                pair_cut_bound: single[i] + single[j] - cij,
                single_bound: cij + single[j] - single[i],
            });
        }
    }

    let mut ent = Vec::new();
    for s in 1..=full {
        let rest = full ^ s;
        // enumerate nonempty submasks t of rest with t > s to visit each pair once
        let mut t = rest;
        while t > 0 {
            if t > s {
                let (ts, tt, tu) = (entropy[s as usize], entropy[t as usize], entropy[(s | t) as usize]);
                ent.push(EntropySlack {
                    s: PartySet::from_mask(n, s),
                    t: PartySet::from_mask(n, t),
                    lower: tu - (ts - tt).abs(),
                    upper: ts + tt - tu,
                });
            }
            t = (t - 1) & rest;
        }
    }

    let min_slack = squared
        .iter()
        .chain(&linear)
        .copied()
        .chain(pairs.iter().flat_map(|p| [p.pair_cut_bound, p.single_bound]))
        .chain(ent.iter().flat_map(|e| [e.lower, e.upper]))
        .fold(f64::INFINITY, f64::min);
    Ok(PolygamyReport { squared, linear, pairs, entropy: ent, min_slack, all_hold: min_slack >= -SLACK_TOL })
}
