//! The runnable property campaign behind `selftest`.
//!
//! Each check is seeded and returns a [`CheckOutcome`]; the campaign passes
//! only when every check does.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{apply_local_channel_branches, LocalChannel};
use crate::concurrence::{check_polygamy, concurrence_pure, wootters_concurrence};
use crate::cut::PartySet;
use crate::error::Result;
use crate::fixtures;
use crate::mixed::{minimal_purification, pure_projection, witness, witness_of_purification, WitnessOptions, FIXTURE_RANK_TOL};
use crate::random::{haar_random_pure_with, haar_unitary, substream};
use crate::state::{tensor_product, PartialTrace, PureState, C64};
use crate::structure::finest_factorization;
use crate::triangle::{f_level, f_total, squared_area, EdgeConvention, GmeOptions};

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &'static str, passed: bool, detail: impl Into<String>) -> Self {
        Self { name, passed, detail: detail.into() }
    }

    fn from_result(name: &'static str, r: Result<(bool, String)>) -> Self {
        match r {
            Ok((passed, detail)) => Self::new(name, passed, detail),
            Err(e) => Self::new(name, false, format!("error: {e}")),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CampaignConfig {
    pub seed: u64,
    pub polygamy_trials: usize,
    pub locc_pairs: usize,
    pub fd_samples: usize,
    pub f5_states: usize,
    pub lu_trials: usize,
    pub gauges: usize,
}

impl CampaignConfig {
    pub fn full(seed: u64) -> Self {
        Self { seed, polygamy_trials: 1000, locc_pairs: 200, fd_samples: 1000, f5_states: 50, lu_trials: 100, gauges: 20 }
    }

    pub fn quick(seed: u64) -> Self {
        Self { seed, polygamy_trials: 50, locc_pairs: 20, fd_samples: 200, f5_states: 8, lu_trials: 10, gauges: 4 }
    }
}

/// Stream ids per check so checks do not share random numbers.
mod stream {
    pub const POLYGAMY: u64 = 1 << 40;
    pub const LOCC: u64 = 2 << 40;
    pub const FD: u64 = 3 << 40;
    pub const F5: u64 = 4 << 40;
    pub const LU: u64 = 5 << 40;
    pub const GAUGE: u64 = 6 << 40;
}

pub fn run_campaign(cfg: &CampaignConfig) -> Vec<CheckOutcome> {
    vec![
        CheckOutcome::from_result("golden: GHZ_4 and W_4", golden_ghz_w()),
        CheckOutcome::from_result("golden: Appendix C factorization", golden_appendix_c()),
        CheckOutcome::from_result("golden: Appendix C pair concurrence 0.866", golden_appendix_c_pair()),
        CheckOutcome::from_result("golden: Appendix E spectrum", golden_appendix_e_spectrum()),
        CheckOutcome::from_result("golden: Appendix E pair concurrences 1/2", golden_appendix_e_pairs()),
        CheckOutcome::from_result("golden: Appendix E witness 0.8034", golden_appendix_e_witness()),
        CheckOutcome::from_result("golden: reduced Appendix C witness 0", golden_reduced_c()),
        CheckOutcome::from_result("polygamy inequalities", polygamy_suite(cfg)),
        CheckOutcome::from_result("LOCC branch monotonicity", locc_suite(cfg)),
        CheckOutcome::from_result("edge monotonicity (finite differences)", Ok(edge_monotonicity(cfg))),
        CheckOutcome::from_result("local-unitary invariance", lu_suite(cfg)),
        CheckOutcome::from_result("F_5 level equivalence", f5_suite(cfg)),
        CheckOutcome::from_result("witness gauge invariance", gauge_suite(cfg)),
    ]
}

fn opts(conv: EdgeConvention) -> GmeOptions {
    GmeOptions::with_convention(conv)
}

fn golden_ghz_w() -> Result<(bool, String)> {
    let ghz = fixtures::ghz4();
    let w = fixtures::w4();
    let g_c = f_total(&ghz, &opts(EdgeConvention::Concurrence))?.f_total;
    let g_s = f_total(&ghz, &opts(EdgeConvention::Squared))?.f_total;
    let w_s = f_total(&w, &opts(EdgeConvention::Squared))?.f_total;
    let w_c = f_total(&w, &opts(EdgeConvention::Concurrence))?.f_total;
    let ok = (g_c - 1.0).abs() < 1e-9
        && (g_s - 1.0).abs() < 1e-9
        && (w_s - (5.0f64 / 12.0).powf(0.25)).abs() < 1e-9
        && (w_c - (2.0f64 / 3.0).sqrt()).abs() < 1e-9;
    Ok((ok, format!("GHZ {g_c:.10}/{g_s:.10}, W squared {w_s:.10}, W concurrence {w_c:.10}")))
}

fn appendix_c_pure() -> Result<PureState> {
    pure_projection(&fixtures::appendix_c(), 1e-3)
}

fn golden_appendix_c() -> Result<(bool, String)> {
    let psi = appendix_c_pure()?;
    let o = GmeOptions { edge_tol: 1e-3, ..GmeOptions::default() };
    let rep = f_total(&psi, &o)?;
    let labels: Vec<&str> = rep.zero_triangles.iter().map(|z| z.label.as_str()).collect();
    let f = finest_factorization(&psi, 1e-3)?;
    let want = vec![vec![1], vec![2], vec![3, 4]];
    let ok = rep.f_total.abs() <= 1e-6 && labels.contains(&"1|3") && labels.contains(&"2|4") && f.factor_labels() == want;
    Ok((ok, format!("F_4 = {:.3e}, factors {:?}", rep.f_total, f.factor_labels())))
}

fn golden_appendix_c_pair() -> Result<(bool, String)> {
    let psi = appendix_c_pure()?;
    let c = concurrence_pure(&psi, &PartySet::new(4, &[2, 3])?)?;
    Ok(((c - 0.866).abs() <= 5e-3, format!("C_{{3,4}}|{{1,2}} = {c:.6}")))
}

fn golden_appendix_e_spectrum() -> Result<(bool, String)> {
    let eig = fixtures::appendix_e().eig()?;
    let ok = (eig.values[0] - 0.75).abs() <= 1e-3 && (eig.values[1] - 0.25).abs() <= 1e-3 && eig.values[2..].iter().all(|v| v.abs() <= 1e-3);
    Ok((ok, format!("eigenvalues {:.6} {:.6}", eig.values[0], eig.values[1])))
}

fn golden_appendix_e_pairs() -> Result<(bool, String)> {
    let rho = fixtures::appendix_e();
    let mut vals = Vec::new();
    for pair in [[0, 1], [0, 2], [1, 2]] {
        vals.push(wootters_concurrence(&rho.partial_trace(&PartySet::new(3, &pair)?)?)?);
    }
    let ok = vals.iter().all(|c| (c - 0.5).abs() <= 5e-3);
    Ok((ok, format!("C(12) {:.6}, C(13) {:.6}, C(23) {:.6}", vals[0], vals[1], vals[2])))
}

fn golden_appendix_e_witness() -> Result<(bool, String)> {
    let rho = fixtures::appendix_e();
    let mut parts = Vec::new();
    let mut ok = false;
    for conv in EdgeConvention::ALL {
        let w = witness(&rho, &WitnessOptions { gme: opts(conv), rank_tol: FIXTURE_RANK_TOL })?;
        ok |= (w.value - 0.8034).abs() <= 5e-3;
        parts.push(format!("{conv} {:.6}", w.value));
    }
    Ok((ok, parts.join(", ")))
}

fn golden_reduced_c() -> Result<(bool, String)> {
    let psi = appendix_c_pure()?;
    let rho = psi.partial_trace(&PartySet::new(4, &[0, 1, 3])?)?;
    let w = witness(&rho, &WitnessOptions { gme: GmeOptions::default(), rank_tol: FIXTURE_RANK_TOL })?;
    Ok((w.value.abs() <= 1e-6, format!("witness {:.3e} (rank {})", w.value, w.rank)))
}

fn polygamy_suite(cfg: &CampaignConfig) -> Result<(bool, String)> {
    let families: [&[usize]; 4] = [&[2, 2, 2], &[2, 2, 2, 2], &[2, 2, 2, 2, 2], &[3, 3, 3]];
    let mut worst = f64::INFINITY;
    let mut violations = 0;
    for (fi, dims) in families.iter().enumerate() {
        let res = (0..cfg.polygamy_trials)
            .into_par_iter()
            .map(|k| {
                let mut rng = substream(cfg.seed, stream::POLYGAMY | ((fi as u64) << 32) | k as u64);
                check_polygamy(&haar_random_pure_with(dims, &mut rng)?)
            })
            .collect::<Result<Vec<_>>>()?;
        for r in res {
            worst = worst.min(r.min_slack);
            violations += r.violations();
        }
    }
    Ok((violations == 0 && worst >= -1e-9, format!("{} states per family, min slack {worst:.3e}, {violations} violations", cfg.polygamy_trials)))
}

/// Largest `sum_k p_k F(branch_k) - F(psi)` over seeded (state, channel) pairs.
pub fn locc_excess(seed: u64, pairs: usize, conv: EdgeConvention) -> Result<f64> {
    let o = opts(conv);
    let gaps = (0..pairs)
        .into_par_iter()
        .map(|k| {
            let mut rng = substream(seed, stream::LOCC | k as u64);
            let n = if k % 2 == 0 { 3 } else { 4 };
            let psi = haar_random_pure_with(&vec![2; n], &mut rng)?;
            let party = rng.random_range(0..n);
            let n_kraus = rng.random_range(1..=4);
            let ch = LocalChannel::random(party, 2, n_kraus, &mut rng);
            let before = f_total(&psi, &o)?.f_total;
            let mut after = 0.0;
            for b in apply_local_channel_branches(&psi, &ch)? {
                after += b.probability * f_total(&b.state, &o)?.f_total;
            }
            Ok(after - before)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(gaps.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

fn locc_suite(cfg: &CampaignConfig) -> Result<(bool, String)> {
    let mut ok = true;
    let mut parts = Vec::new();
    for conv in EdgeConvention::ALL {
        let gap = locc_excess(cfg.seed, cfg.locc_pairs, conv)?;
        ok &= gap <= 1e-7;
        parts.push(format!("{conv} max gain {gap:.3e}"));
    }
    Ok((ok, parts.join(", ")))
}

/// Smallest central-difference derivative of the squared Heron area with respect
/// to any edge, over edge triples obeying `b^2 + c^2 >= a^2` for every labelling.
pub fn min_edge_derivative(seed: u64, samples: usize, step: f64) -> f64 {
    let mut rng = substream(seed, stream::FD);
    let mut worst = f64::INFINITY;
    let mut taken = 0;
    while taken < samples {
        let e: [f64; 3] = [rng.random_range(step..1.0), rng.random_range(step..1.0), rng.random_range(step..1.0)];
        let sq = e.map(|x| x * x);
        if (0..3).any(|i| sq[(i + 1) % 3] + sq[(i + 2) % 3] < sq[i]) {
            continue;
        }
        taken += 1;
        for i in 0..3 {
            let (mut up, mut down) = (e, e);
            up[i] += step;
            down[i] -= step;
            let d = (squared_area(up) - squared_area(down)) / (2.0 * step);
            worst = worst.min(d);
        }
    }
    worst
}

fn edge_monotonicity(cfg: &CampaignConfig) -> (bool, String) {
    let d = min_edge_derivative(cfg.seed, cfg.fd_samples, 1e-5);
    (d >= -1e-9, format!("min derivative {d:.3e} over {} samples", cfg.fd_samples))
}

fn lu_suite(cfg: &CampaignConfig) -> Result<(bool, String)> {
    let worst = (0..cfg.lu_trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = substream(cfg.seed, stream::LU | k as u64);
            let dims: Vec<usize> = if k % 2 == 0 { vec![2, 2, 2, 2] } else { vec![2, 3, 2] };
            let psi = haar_random_pure_with(&dims, &mut rng)?;
            let mut phi = psi.clone();
            for (p, &d) in dims.iter().enumerate() {
                phi = phi.apply_local_unitary(p, &haar_unitary(d, &mut rng))?;
            }
            let mut gap = 0.0f64;
            for conv in EdgeConvention::ALL {
                gap = gap.max((f_total(&psi, &opts(conv))?.f_total - f_total(&phi, &opts(conv))?.f_total).abs());
            }
            Ok(gap)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok((worst < 1e-9, format!("max change {worst:.3e}")))
}

/// A 5-qubit state that factors across a random bipartition.
pub fn biseparable_five_qubit<R: Rng + ?Sized>(rng: &mut R) -> Result<PureState> {
    let k = rng.random_range(1..=2);
    let a = haar_random_pure_with(&vec![2; k], rng)?;
    let b = haar_random_pure_with(&vec![2; 5 - k], rng)?;
    let joined = tensor_product(&[a, b])?;
    let mut order: Vec<usize> = (0..5).collect();
    for i in (1..5).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    joined.permute_parties(&order)
}

fn f5_suite(cfg: &CampaignConfig) -> Result<(bool, String)> {
    let o = GmeOptions::default();
    let results = (0..2 * cfg.f5_states)
        .into_par_iter()
        .map(|k| {
            let mut rng = substream(cfg.seed, stream::F5 | k as u64);
            let psi = if k < cfg.f5_states { biseparable_five_qubit(&mut rng)? } else { haar_random_pure_with(&[2; 5], &mut rng)? };
            let l1 = f_level(&psi, 1, &o)? <= 1e-8;
            let l2 = f_level(&psi, 2, &o)? <= 1e-8;
            Ok((l1 == l2, l1))
        })
        .collect::<Result<Vec<_>>>()?;
    let exceptions = results.iter().filter(|r| !r.0).count();
    let zeros = results.iter().filter(|r| r.1).count();
    Ok((exceptions == 0, format!("{} states, {zeros} with vanishing level 1, {exceptions} exceptions", results.len())))
}

/// Appends `extra` zero-weight levels to the last party.
pub fn pad_last_party(psi: &PureState, extra: usize) -> Result<PureState> {
    let dims = psi.dims();
    let r = *dims.last().expect("at least one party");
    let mut new_dims = dims.to_vec();
    *new_dims.last_mut().expect("nonempty") = r + extra;
    let mut amps = Vec::with_capacity(psi.dim() / r * (r + extra));
    for chunk in psi.amplitudes().chunks(r) {
        amps.extend_from_slice(chunk);
        amps.extend(std::iter::repeat_n(C64::new(0.0, 0.0), extra));
    }
    PureState::new(new_dims, amps)
}

/// Largest witness change under reference unitaries and zero padding.
pub fn gauge_deviation(rho: &crate::state::DensityMatrix, seed: u64, gauges: usize, rank_tol: f64) -> Result<f64> {
    let p = minimal_purification(rho, rank_tol)?;
    let mut worst = 0.0f64;
    for conv in EdgeConvention::ALL {
        let o = opts(conv);
        let base = witness_of_purification(&p.state, &o)?.f_total;
        let r = p.state.dims()[p.reference_party];
        let mut rng = substream(seed, stream::GAUGE | conv as u64);
        for _ in 0..gauges {
            let g = p.state.apply_local_unitary(p.reference_party, &haar_unitary(r, &mut rng))?;
            worst = worst.max((witness_of_purification(&g, &o)?.f_total - base).abs());
        }
        for extra in 1..=2 {
            let padded = pad_last_party(&p.state, extra)?;
            worst = worst.max((witness_of_purification(&padded, &o)?.f_total - base).abs());
            let g = padded.apply_local_unitary(p.reference_party, &haar_unitary(r + extra, &mut rng))?;
            worst = worst.max((witness_of_purification(&g, &o)?.f_total - base).abs());
        }
    }
    Ok(worst)
}

fn gauge_suite(cfg: &CampaignConfig) -> Result<(bool, String)> {
    let fixture = gauge_deviation(&fixtures::appendix_e(), cfg.seed, cfg.gauges, FIXTURE_RANK_TOL)?;
    // Appendix E has a product party, so its witness is zero in every gauge;
    // random reduced states exercise nonzero values.
    let mut random = 0.0f64;
    for k in 0..4u64 {
        let mut rng = substream(cfg.seed, stream::GAUGE | (1 << 32) | k);
        let env = 2 + (k as usize % 2);
        let psi = haar_random_pure_with(&[2, 2, 2, env], &mut rng)?;
        let rho = psi.partial_trace(&PartySet::new(4, &[0, 1, 2])?)?;
        random = random.max(gauge_deviation(&rho, cfg.seed ^ k, cfg.gauges, 1e-9)?);
    }
    Ok((fixture.max(random) < 1e-8, format!("Appendix E max change {fixture:.3e}, random states {random:.3e}")))
}
