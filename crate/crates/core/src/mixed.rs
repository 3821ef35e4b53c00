//! Mixed-state GME: the purification witness and a convex-roof upper bound.
//!
//! The witness evaluates the pure-state measure on a minimal purification,
//! treating the reference system as one extra party. The convex roof is
//! estimated by searching over pure-state decompositions; the result is an
//! upper bound on the true minimum, never a certified value.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{GmeError, Result};
use crate::linalg::Eigen;
use crate::random::substream;
use crate::state::{DensityMatrix, PureState, C64};
use crate::triangle::{f_total, EdgeConvention, GmeOptions, GmeReport};

pub const DEFAULT_RANK_TOL: f64 = 1e-9;
/// Rank tolerance for fixtures transcribed at ~6 significant digits.
pub const FIXTURE_RANK_TOL: f64 = 1e-4;

/// Members lighter than this are left out of a decomposition.
const WEIGHT_CUTOFF: f64 = 1e-14;

#[derive(Clone, Debug)]
pub struct Purification {
    /// State over `dims ++ [rank]`.
    pub state: PureState,
    pub reference_party: usize,
    pub rank: usize,
    /// Kept eigenvalues, descending, renormalized to sum to 1.
    pub weights: Vec<f64>,
}

/// Kept spectrum: eigenvalues above `rank_tol`, renormalized.
fn kept_spectrum(rho: &DensityMatrix, rank_tol: f64) -> Result<(Vec<f64>, Eigen)> {
    let eig = rho.eig()?;
    let r = eig.rank(rank_tol);
    if r == 0 {
        return Err(GmeError::ZeroRank(rank_tol));
    }
    let total: f64 = eig.values[..r].iter().sum();
    Ok((eig.values[..r].iter().map(|v| v / total).collect(), eig))
}

/// `sum_k sqrt(lambda_k) |v_k> |k>_R` over the eigenvalues above `rank_tol`.
pub fn minimal_purification(rho: &DensityMatrix, rank_tol: f64) -> Result<Purification> {
    let (weights, eig) = kept_spectrum(rho, rank_tol)?;
    let r = weights.len();
    let d = rho.dim();
    let mut amps = vec![C64::new(0.0, 0.0); d * r];
    for (k, w) in weights.iter().enumerate() {
        let s = w.sqrt();
        for a in 0..d {
            amps[a * r + k] = eig.vectors[(a, k)] * s;
        }
    }
    let mut dims = rho.dims().to_vec();
    let reference_party = dims.len();
    // A rank-1 state still gets a two-level reference so the party is well formed.
    let rdim = r.max(2);
    if rdim != r {
        amps = amps.iter().flat_map(|&a| [a, C64::new(0.0, 0.0)]).collect();
    }
    dims.push(rdim);
    let state = PureState::normalized(dims, amps)?;
    Ok(Purification { state, reference_party, rank: r, weights })
}

/// Dominant eigenvector of a numerically rank-1 state.
pub fn pure_projection(rho: &DensityMatrix, rank_tol: f64) -> Result<PureState> {
    let eig = rho.eig()?;
    match eig.rank(rank_tol) {
        0 => Err(GmeError::ZeroRank(rank_tol)),
        1 => {
            let v: Vec<C64> = eig.vectors.column(0).iter().copied().collect();
            PureState::normalized(rho.dims().to_vec(), v)
        }
        _ => Err(GmeError::Validation { check: "numerical rank 1", value: eig.values[1], tol: rank_tol }),
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct WitnessOptions {
    pub gme: GmeOptions,
    pub rank_tol: f64,
}

impl Default for WitnessOptions {
    fn default() -> Self {
        Self { gme: GmeOptions::default(), rank_tol: DEFAULT_RANK_TOL }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessReport {
    pub value: f64,
    pub convention: EdgeConvention,
    pub rank: usize,
    /// Rank-1 input: the measure was evaluated on the pure state directly,
    /// since its purification has a product reference and would read 0.
    pub pure_bypass: bool,
    pub gme_detected: bool,
    pub report: GmeReport,
}

pub fn witness(rho: &DensityMatrix, opts: &WitnessOptions) -> Result<WitnessReport> {
    let n = rho.n_parties();
    if n < 3 {
        return Err(GmeError::PartyCount { expected: ">= 3", got: n });
    }
    let (weights, eig) = kept_spectrum(rho, opts.rank_tol)?;
    if weights.len() == 1 {
        let v: Vec<C64> = eig.vectors.column(0).iter().copied().collect();
        let psi = PureState::normalized(rho.dims().to_vec(), v)?;
        let report = f_total(&psi, &opts.gme)?;
        return Ok(WitnessReport {
            value: report.f_total,
            convention: opts.gme.convention,
            rank: 1,
            pure_bypass: true,
            gme_detected: report.is_gme(),
            report,
        });
    }
    let p = minimal_purification(rho, opts.rank_tol)?;
    let report = witness_of_purification(&p.state, &opts.gme)?;
    Ok(WitnessReport {
        value: report.f_total,
        convention: opts.gme.convention,
        rank: p.rank,
        pure_bypass: false,
        gme_detected: report.is_gme(),
        report,
    })
}

/// The measure on any purification, the reference being its last party.
pub fn witness_of_purification(purified: &PureState, opts: &GmeOptions) -> Result<GmeReport> {
    f_total(purified, opts)
}

/// A pure-state ensemble `{p_i, psi_i}`.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub members: Vec<(f64, PureState)>,
}

impl Decomposition {
    pub fn mixture(&self) -> DMatrix<C64> {
        let d = self.members.first().map_or(0, |(_, s)| s.dim());
        let mut out = DMatrix::zeros(d, d);
        for (p, s) in &self.members {
            let v = DVector::from_column_slice(s.amplitudes());
            out += (&v * v.adjoint()) * C64::new(*p, 0.0);
        }
        out
    }

    pub fn total_weight(&self) -> f64 {
        self.members.iter().map(|(p, _)| p).sum()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvexRoofConfig {
    pub gme: GmeOptions,
    /// Ensemble sizes to search; `None` means `r, r+1, r+2`.
    pub ensemble_sizes: Option<Vec<usize>>,
    pub restarts: usize,
    pub max_iterations: usize,
    pub seed: u64,
    pub rank_tol: f64,
}

impl Default for ConvexRoofConfig {
    fn default() -> Self {
        Self {
            gme: GmeOptions::default(),
            ensemble_sizes: None,
            restarts: 32,
            max_iterations: 500,
            seed: 0,
            rank_tol: DEFAULT_RANK_TOL,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConvexRoofResult {
    /// Best ensemble average found: an upper bound on the convex roof.
    pub value: f64,
    /// Ensemble average of the eigen-decomposition.
    pub spectral_value: f64,
    pub decomposition: Decomposition,
    pub rank: usize,
    pub ensemble_size: usize,
    /// Running best after each restart, sizes ascending then restarts ascending.
    pub history: Vec<f64>,
    pub evaluations: usize,
}

/// Complex Givens rotations in the `(p, q)` planes, `p < q`, applied in a fixed order.
/// Two angles per plane; together with an irrelevant diagonal of row phases they
/// reach every `m x m` unitary.
struct GivensChart {
    m: usize,
    planes: Vec<(usize, usize)>,
}

impl GivensChart {
    fn new(m: usize) -> Self {
        let planes = (0..m).flat_map(|p| (p + 1..m).map(move |q| (p, q))).collect();
        Self { m, planes }
    }

    fn n_params(&self) -> usize {
        2 * self.planes.len()
    }

    fn unitary(&self, x: &[f64]) -> DMatrix<C64> {
        let mut u = DMatrix::<C64>::identity(self.m, self.m);
        for (k, &(p, q)) in self.planes.iter().enumerate() {
            let (theta, phi) = (x[2 * k], x[2 * k + 1]);
            let (s, c) = theta.sin_cos();
            let e = C64::from_polar(1.0, phi);
            // rows p and q of G * U
            for col in 0..self.m {
                let (up, uq) = (u[(p, col)], u[(q, col)]);
                u[(p, col)] = up * c - e.conj() * uq * s;
                u[(q, col)] = e * up * s + uq * c;
            }
        }
        u
    }
}

struct Objective<'a> {
    dims: &'a [usize],
    /// Columns `sqrt(lambda_k) v_k`.
    scaled: DMatrix<C64>,
    chart: GivensChart,
    opts: GmeOptions,
}

impl Objective<'_> {
    fn members(&self, x: &[f64]) -> Vec<(f64, Vec<C64>)> {
        let r = self.scaled.ncols();
        let u = self.chart.unitary(x);
        let mut out = Vec::with_capacity(self.chart.m);
        for i in 0..self.chart.m {
            let coeffs = DVector::from_fn(r, |k, _| u[(i, k)]);
            let w = &self.scaled * coeffs;
            let p = w.norm_squared();
            if p > WEIGHT_CUTOFF {
                out.push((p, w.iter().copied().collect()));
            }
        }
        out
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        let mut total = 0.0;
        for (p, amps) in self.members(x) {
            let psi = PureState::normalized(self.dims.to_vec(), amps)?;
            total += p * f_total(&psi, &self.opts)?.f_total;
        }
        Ok(total)
    }

    fn decomposition(&self, x: &[f64]) -> Result<Decomposition> {
        let members = self
            .members(x)
            .into_iter()
            .map(|(p, amps)| PureState::normalized(self.dims.to_vec(), amps).map(|s| (p, s)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Decomposition { members })
    }
}

struct SearchOutcome {
    value: f64,
    x: Vec<f64>,
    evaluations: usize,
}

const INITIAL_STEP: f64 = 0.5;
const MIN_STEP: f64 = 1e-7;

/// Compass search: try `+-step` along each coordinate, take the first
/// improvement, halve the step after a sweep with none.
fn pattern_search(obj: &Objective<'_>, mut x: Vec<f64>, max_iterations: usize) -> Result<SearchOutcome> {
    let mut f = obj.value(&x)?;
    let mut evaluations = 1;
    let mut step = INITIAL_STEP;
    for _ in 0..max_iterations {
        let mut improved = false;
        for j in 0..x.len() {
            for sign in [1.0, -1.0] {
                let old = x[j];
                x[j] = old + sign * step;
                let g = obj.value(&x)?;
                evaluations += 1;
                if g < f {
                    f = g;
                    improved = true;
                    break;
                }
                x[j] = old;
            }
        }
        if !improved {
            step *= 0.5;
            if step < MIN_STEP {
                break;
            }
        }
    }
    Ok(SearchOutcome { value: f, x, evaluations })
}

pub fn convex_roof_upper_bound(rho: &DensityMatrix, config: &ConvexRoofConfig) -> Result<ConvexRoofResult> {
    let n = rho.n_parties();
    if n < 3 {
        return Err(GmeError::PartyCount { expected: ">= 3", got: n });
    }
    let (weights, eig) = kept_spectrum(rho, config.rank_tol)?;
    let r = weights.len();
    let sizes = config.ensemble_sizes.clone().unwrap_or_else(|| vec![r, r + 1, r + 2]);
    if let Some(&m) = sizes.iter().find(|&&m| m < r) {
        return Err(GmeError::EnsembleTooSmall { size: m, rank: r });
    }
    let dims = rho.dims();

    if r == 1 {
        let v: Vec<C64> = eig.vectors.column(0).iter().copied().collect();
        let psi = PureState::normalized(dims.to_vec(), v)?;
        let value = f_total(&psi, &config.gme)?.f_total;
        return Ok(ConvexRoofResult {
            value,
            spectral_value: value,
            decomposition: Decomposition { members: vec![(1.0, psi)] },
            rank: 1,
            ensemble_size: 1,
            history: vec![value],
            evaluations: 1,
        });
    }

    let scaled = DMatrix::from_fn(rho.dim(), r, |a, k| eig.vectors[(a, k)] * weights[k].sqrt());
    let mut history = Vec::new();
    let mut evaluations = 0;
    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    let mut spectral_value = f64::NAN;

    for &m in &sizes {
        let obj = Objective { dims, scaled: scaled.clone(), chart: GivensChart::new(m), opts: config.gme };
        let p = obj.chart.n_params();
        if spectral_value.is_nan() {
            spectral_value = obj.value(&vec![0.0; p])?;
        }
        let stream_base = (m as u64) << 32;
        let runs = (0..config.restarts.max(1))
            .into_par_iter()
            .map(|restart| {
                // restart 0 starts at the identity, i.e. the spectral ensemble
                let x0 = if restart == 0 {
                    vec![0.0; p]
                } else {
                    let mut rng = substream(config.seed, stream_base | restart as u64);
                    (0..p).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect()
                };
                pattern_search(&obj, x0, config.max_iterations)
            })
            .collect::<Result<Vec<_>>>()?;
        for run in runs {
            evaluations += run.evaluations;
            if best.as_ref().is_none_or(|(v, _, _)| run.value < *v) {
                best = Some((run.value, m, run.x));
            }
            history.push(best.as_ref().map(|b| b.0).unwrap());
        }
    }

    let (value, m, x) = best.expect("at least one ensemble size");
    let obj = Objective { dims, scaled, chart: GivensChart::new(m), opts: config.gme };
    let decomposition = obj.decomposition(&x)?;
    Ok(ConvexRoofResult { value, spectral_value, decomposition, rank: r, ensemble_size: m, history, evaluations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use crate::cut::PartySet;
    use crate::random::{haar_random_pure, haar_unitary, seeded_rng};
    use crate::state::{PartialTrace, STATE_TOL};
    use approx::assert_abs_diff_eq;

    fn diag_mixture(dims: Vec<usize>, entries: &[(usize, f64)]) -> DensityMatrix {
        let d: usize = dims.iter().product();
        let mut m = DMatrix::zeros(d, d);
        for &(i, p) in entries {
            m[(i, i)] = C64::new(p, 0.0);
        }
        DensityMatrix::new(dims, m).unwrap()
    }

    #[test]
    fn pure_input_purifies_to_product_with_reference() {
        let phi = haar_random_pure(&[2, 2, 2], 1).unwrap();
        let p = minimal_purification(&phi.to_density(), DEFAULT_RANK_TOL).unwrap();
        assert_eq!(p.rank, 1);
        let back = p.state.partial_trace(&PartySet::new(4, &[0, 1, 2]).unwrap()).unwrap();
        assert!(max_abs(&(back.matrix() - phi.to_density().matrix())) < 1e-9);
    }

    #[test]
    fn diagonal_qubit_purification() {
        let rho = diag_mixture(vec![2], &[(0, 0.75), (1, 0.25)]);
        let p = minimal_purification(&rho, DEFAULT_RANK_TOL).unwrap();
        let a = p.state.amplitudes();
        assert_abs_diff_eq!(a[0].norm(), 0.75f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(a[3].norm(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(a[1].norm() + a[2].norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn purification_reproduces_mixed_state() {
        let psi = haar_random_pure(&[2, 2, 2, 3], 9).unwrap();
        let rho = psi.partial_trace(&PartySet::new(4, &[0, 1, 2]).unwrap()).unwrap();
        let p = minimal_purification(&rho, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(p.rank, 3);
        let back = p.state.partial_trace(&PartySet::new(4, &[0, 1, 2]).unwrap()).unwrap();
        assert!(max_abs(&(back.matrix() - rho.matrix())) < 1e-8);
    }

    #[test]
    fn zero_rank_rejected() {
        let rho = DensityMatrix::from_parts(vec![2], DMatrix::zeros(2, 2));
        assert!(matches!(minimal_purification(&rho, 1e-9), Err(GmeError::ZeroRank(_))));
    }

    #[test]
    fn witness_bypass_on_pure_input() {
        let psi = PureState::w(3).unwrap();
        let w = witness(&psi.to_density(), &WitnessOptions::default()).unwrap();
        assert!(w.pure_bypass);
        let direct = f_total(&psi, &GmeOptions::default()).unwrap().f_total;
        assert_abs_diff_eq!(w.value, direct, epsilon = 1e-12);
    }

    #[test]
    fn witness_needs_three_parties() {
        let rho = diag_mixture(vec![2, 2], &[(0, 0.5), (3, 0.5)]);
        assert!(witness(&rho, &WitnessOptions::default()).is_err());
    }

    #[test]
    fn witness_of_classical_ghz_mixture_is_hand_purification_value() {
        let rho = diag_mixture(vec![2, 2, 2], &[(0, 0.5), (7, 0.5)]);
        let w = witness(&rho, &WitnessOptions::default()).unwrap();
        assert!(!w.pure_bypass);
        assert_eq!(w.rank, 2);
        // purification (|0000> + |1111>)/sqrt 2 up to a unitary on R
        let hand = f_total(&PureState::ghz(4).unwrap(), &GmeOptions::default()).unwrap().f_total;
        assert_abs_diff_eq!(w.value, hand, epsilon = 1e-9);
    }

    #[test]
    fn gauge_on_reference_is_irrelevant() {
        let psi = haar_random_pure(&[2, 2, 2, 2], 21).unwrap();
        let rho = psi.partial_trace(&PartySet::new(4, &[0, 1, 2]).unwrap()).unwrap();
        let p = minimal_purification(&rho, DEFAULT_RANK_TOL).unwrap();
        let opts = GmeOptions::default();
        let base = witness_of_purification(&p.state, &opts).unwrap().f_total;
        let mut rng = seeded_rng(2);
        for _ in 0..5 {
            let u = haar_unitary(p.rank, &mut rng);
            let g = p.state.apply_local_unitary(3, &u).unwrap();
            assert!((witness_of_purification(&g, &opts).unwrap().f_total - base).abs() < 1e-8);
        }
    }

    #[test]
    fn givens_chart_is_unitary() {
        let chart = GivensChart::new(4);
        let mut rng = seeded_rng(4);
        let x: Vec<f64> = (0..chart.n_params()).map(|_| rng.random_range(0.0..6.0)).collect();
        let u = chart.unitary(&x);
        assert!(max_abs(&(u.adjoint() * &u - DMatrix::identity(4, 4))) < 1e-12);
        assert_eq!(chart.unitary(&vec![0.0; chart.n_params()]), DMatrix::identity(4, 4));
    }

    #[test]
    fn convex_roof_pure_input() {
        let psi = PureState::ghz(3).unwrap();
        let res = convex_roof_upper_bound(&psi.to_density(), &ConvexRoofConfig::default()).unwrap();
        assert_eq!(res.decomposition.len(), 1);
        assert_abs_diff_eq!(res.value, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn convex_roof_classical_mixture_is_zero() {
        let rho = diag_mixture(vec![2, 2, 2], &[(0, 0.5), (7, 0.5)]);
        let cfg = ConvexRoofConfig { restarts: 4, max_iterations: 200, ..Default::default() };
        let res = convex_roof_upper_bound(&rho, &cfg).unwrap();
        assert!(res.value <= 1e-6, "value {}", res.value);
    }

    #[test]
    fn convex_roof_rejects_small_ensembles() {
        let rho = diag_mixture(vec![2, 2, 2], &[(0, 0.5), (7, 0.25), (3, 0.25)]);
        let cfg = ConvexRoofConfig { ensemble_sizes: Some(vec![2]), ..Default::default() };
        assert!(matches!(convex_roof_upper_bound(&rho, &cfg), Err(GmeError::EnsembleTooSmall { size: 2, rank: 3 })));
    }

    #[test]
    fn decomposition_reproduces_state_and_history_monotone() {
        let psi = haar_random_pure(&[2, 2, 2, 2], 5).unwrap();
        let rho = psi.partial_trace(&PartySet::new(4, &[0, 1, 2]).unwrap()).unwrap();
        let cfg = ConvexRoofConfig { restarts: 3, max_iterations: 60, seed: 17, ..Default::default() };
        let res = convex_roof_upper_bound(&rho, &cfg).unwrap();
        assert!((res.decomposition.total_weight() - 1.0).abs() < STATE_TOL);
        assert!(max_abs(&(res.decomposition.mixture() - rho.matrix())) < 1e-7);
        assert!(res.value <= res.spectral_value + 1e-9);
        assert!(res.history.windows(2).all(|w| w[1] <= w[0]));
    }
}
