//! Analysis reports and their canonical serialization.
//!
//! JSON output has sorted keys and floats rounded to 10 significant digits,
//! so equal inputs give byte-identical text.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::concurrence::{check_polygamy, full_cut_table, CutConcurrenceTable};
use crate::cut::{Cut, PartySet};
use crate::error::Result;
use crate::mixed::{ConvexRoofConfig, ConvexRoofResult, WitnessReport};
use crate::random::{haar_random_pure, substream};
use crate::state::PureState;
use crate::structure::{classify_with_table, MarginalCut, MAX_CLASSIFIER_PARTIES};
use crate::triangle::{f_total_from_table, EdgeConvention, GmeOptions, GmeReport, ZeroTriangle};

pub const TOOL_NAME: &str = "trigme";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, Serialize)]
pub struct CutEntry {
    pub cut: Cut,
    pub concurrence: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TriangleEntry {
    pub label: String,
    pub vertices: [PartySet; 3],
    pub concurrences: [f64; 3],
    pub edges: [f64; 3],
    pub area: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelEntry {
    pub level: usize,
    pub value: f64,
    pub triangles: Vec<TriangleEntry>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FactorizationEntry {
    pub factors: Vec<PartySet>,
    pub is_gme: bool,
    pub product_cuts: Vec<Cut>,
    pub reconstruction_deviation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub input_digest: String,
    pub dims: Vec<usize>,
    pub convention: EdgeConvention,
    pub tol: f64,
    pub seed: Option<u64>,
    pub notices: Vec<String>,
    pub cut_concurrences: Vec<CutEntry>,
    pub levels: Vec<LevelEntry>,
    pub f_total: f64,
    /// The total under every edge convention, keyed by convention name.
    pub f_total_by_convention: BTreeMap<String, f64>,
    pub exceeds_unity: bool,
    pub gme: bool,
    pub zero_triangles: Vec<ZeroTriangle>,
    pub factorization: Option<FactorizationEntry>,
    pub marginal_cuts: Vec<MarginalCut>,
}

fn cut_entries(table: &CutConcurrenceTable) -> Vec<CutEntry> {
    table.iter().map(|(cut, &c)| CutEntry { cut: *cut, concurrence: c }).collect()
}

fn level_entries(report: &GmeReport) -> Vec<LevelEntry> {
    report
        .levels
        .iter()
        .map(|l| LevelEntry {
            level: l.level,
            value: l.value,
            triangles: l
                .triangles
                .iter()
                .map(|t| TriangleEntry {
                    label: t.label(),
                    vertices: t.vertices,
                    concurrences: t.concurrences,
                    edges: t.edges,
                    area: t.area,
                })
                .collect(),
        })
        .collect()
}

/// Full pure-state analysis. `tol` is the edge snapping and classifier tolerance.
pub fn analyze(
    psi: &PureState,
    convention: EdgeConvention,
    tol: f64,
    input_digest: String,
    seed: Option<u64>,
    mut notices: Vec<String>,
) -> Result<AnalysisReport> {
    let table = full_cut_table(psi);
    let base = GmeOptions { convention, edge_tol: tol, ..GmeOptions::default() };
    let main = f_total_from_table(&table, &base)?;
    let mut by_conv = BTreeMap::new();
    for conv in EdgeConvention::ALL {
        let v = if conv == convention { main.f_total } else { f_total_from_table(&table, &GmeOptions { convention: conv, ..base })?.f_total };
        by_conv.insert(conv.name().to_string(), v);
    }
    let (factorization, marginal_cuts) = if psi.n_parties() <= MAX_CLASSIFIER_PARTIES {
        let f = classify_with_table(psi, &table, tol)?;
        let entry = FactorizationEntry {
            factors: f.factors.clone(),
            is_gme: f.is_gme,
            product_cuts: f.product_cuts.clone(),
            reconstruction_deviation: f.reconstruction_deviation,
        };
        (Some(entry), f.marginal_cuts)
    } else {
        notices.push(format!("factorization skipped above {MAX_CLASSIFIER_PARTIES} parties"));
        (None, Vec::new())
    };
    if main.exceeds_unity {
        notices.push("a triangle area exceeds 1; values are reported unclamped".into());
    }
    Ok(AnalysisReport {
        tool: TOOL_NAME,
        version: TOOL_VERSION,
        input_digest,
        dims: psi.dims().to_vec(),
        convention,
        tol,
        seed,
        notices,
        cut_concurrences: cut_entries(&table),
        levels: level_entries(&main),
        f_total: main.f_total,
        f_total_by_convention: by_conv,
        exceeds_unity: main.exceeds_unity,
        gme: main.is_gme(),
        zero_triangles: main.zero_triangles,
        factorization,
        marginal_cuts,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessSummary {
    pub tool: &'static str,
    pub version: &'static str,
    pub input_digest: String,
    pub dims: Vec<usize>,
    pub convention: EdgeConvention,
    pub value: f64,
    pub value_by_convention: BTreeMap<String, f64>,
    pub rank: usize,
    pub pure_bypass: bool,
    pub verdict: &'static str,
    pub zero_triangles: usize,
}

pub fn witness_summary(input_digest: String, dims: &[usize], reports: &[WitnessReport], convention: EdgeConvention) -> WitnessSummary {
    let main = reports.iter().find(|r| r.convention == convention).unwrap_or(&reports[0]);
    WitnessSummary {
        tool: TOOL_NAME,
        version: TOOL_VERSION,
        input_digest,
        dims: dims.to_vec(),
        convention: main.convention,
        value: main.value,
        value_by_convention: reports.iter().map(|r| (r.convention.name().to_string(), r.value)).collect(),
        rank: main.rank,
        pure_bypass: main.pure_bypass,
        verdict: if main.gme_detected { "GME detected" } else { "no GME detected by witness" },
        zero_triangles: main.report.zero_triangles.len(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MemberEntry {
    pub weight: f64,
    pub f_total: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvexRoofSummary {
    pub tool: &'static str,
    pub version: &'static str,
    pub input_digest: String,
    pub dims: Vec<usize>,
    pub convention: EdgeConvention,
    /// Best ensemble average found: an upper bound, not a certified minimum.
    pub upper_bound: f64,
    pub spectral_value: f64,
    pub rank: usize,
    pub ensemble_size: usize,
    pub restarts: usize,
    pub max_iterations: usize,
    pub seed: u64,
    pub evaluations: usize,
    pub members: Vec<MemberEntry>,
}

pub fn convex_roof_summary(input_digest: String, dims: &[usize], cfg: &ConvexRoofConfig, res: &ConvexRoofResult) -> Result<ConvexRoofSummary> {
    let members = res
        .decomposition
        .members
        .iter()
        .map(|(p, s)| Ok(MemberEntry { weight: *p, f_total: crate::triangle::f_total(s, &cfg.gme)?.f_total }))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvexRoofSummary {
        tool: TOOL_NAME,
        version: TOOL_VERSION,
        input_digest,
        dims: dims.to_vec(),
        convention: cfg.gme.convention,
        upper_bound: res.value,
        spectral_value: res.spectral_value,
        rank: res.rank,
        ensemble_size: res.ensemble_size,
        restarts: cfg.restarts,
        max_iterations: cfg.max_iterations,
        seed: cfg.seed,
        evaluations: res.evaluations,
        members,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PolygamySummary {
    pub tool: &'static str,
    pub version: &'static str,
    pub dims: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Minimum slack per family over all trials.
    pub min_squared: f64,
    pub min_linear: f64,
    pub min_pair: f64,
    pub min_entropy: f64,
    pub min_slack: f64,
    pub violations: usize,
    pub all_hold: bool,
}

/// Polygamy slacks over `trials` Haar samples; trial `k` uses `substream(seed, k)`.
pub fn polygamy_campaign(dims: &[usize], trials: usize, seed: u64) -> Result<PolygamySummary> {
    use rayon::prelude::*;
    let reports = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = substream(seed, k as u64);
            let psi = crate::random::haar_random_pure_with(dims, &mut rng)?;
            check_polygamy(&psi)
        })
        .collect::<Result<Vec<_>>>()?;
    let min_of = |f: &dyn Fn(&crate::concurrence::PolygamyReport) -> f64| reports.iter().map(f).fold(f64::INFINITY, f64::min);
    let fold = |v: &mut dyn Iterator<Item = f64>| v.fold(f64::INFINITY, f64::min);
    let min_squared = min_of(&|r| fold(&mut r.squared.iter().copied()));
    let min_linear = min_of(&|r| fold(&mut r.linear.iter().copied()));
    let min_pair = min_of(&|r| fold(&mut r.pairs.iter().flat_map(|p| [p.pair_cut_bound, p.single_bound])));
    let min_entropy = min_of(&|r| fold(&mut r.entropy.iter().flat_map(|e| [e.lower, e.upper])));
    let violations = reports.iter().map(|r| r.violations()).sum();
    Ok(PolygamySummary {
        tool: TOOL_NAME,
        version: TOOL_VERSION,
        dims: dims.to_vec(),
        trials,
        seed,
        min_squared,
        min_linear,
        min_pair,
        min_entropy,
        min_slack: min_of(&|r| r.min_slack),
        violations,
        all_hold: violations == 0,
    })
}

/// A Haar sample, for the `random` command.
pub fn random_state(dims: &[usize], seed: u64) -> Result<PureState> {
    haar_random_pure(dims, seed)
}

fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.9e}").parse().unwrap_or(x)
}

fn canonicalize(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().unwrap_or(f64::NAN));
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(canonicalize).collect()),
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            let mut out = Map::new();
            for (k, val) in entries {
                out.insert(k, canonicalize(val));
            }
            Value::Object(out)
        }
        other => other,
    }
}

/// Sorted keys, floats at 10 significant digits, trailing newline.
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("report types serialize");
    let mut s = serde_json::to_string_pretty(&canonicalize(v)).expect("json values serialize");
    s.push('\n');
    s
}

pub fn emit_report(report: &AnalysisReport, json: bool) -> String {
    if json {
        canonical_json(report)
    } else {
        render_text(report)
    }
}

fn render_text(r: &AnalysisReport) -> String {
    let mut o = String::new();
    let _ = writeln!(o, "{} {}  input sha256 {}", r.tool, r.version, r.input_digest);
    let _ = writeln!(o, "dims {:?}  convention {}  tol {:e}", r.dims, r.convention, r.tol);
    if let Some(seed) = r.seed {
        let _ = writeln!(o, "seed {seed}");
    }
    for n in &r.notices {
        let _ = writeln!(o, "notice: {n}");
    }
    let _ = writeln!(o, "\ncut concurrences");
    for c in &r.cut_concurrences {
        let _ = writeln!(o, "  {:<24} {:.6}", c.cut.to_string(), c.concurrence);
    }
    let _ = writeln!(o, "\nlevels");
    for l in &r.levels {
        let _ = writeln!(o, "  level {}  value {:.6}  ({} triangles)", l.level, l.value, l.triangles.len());
        for t in &l.triangles {
            let v: Vec<String> = t.vertices.iter().map(|s| s.to_string()).collect();
            let _ = writeln!(
                o,
                "    {:<8} {:<22} edges [{:.6}, {:.6}, {:.6}]  area {:.6}",
                t.label,
                v.join(" "),
                t.edges[0],
                t.edges[1],
                t.edges[2],
                t.area
            );
        }
    }
    let _ = writeln!(o, "\nF_{} = {:.6} ({})", r.dims.len(), r.f_total, r.convention);
    for (name, v) in &r.f_total_by_convention {
        let _ = writeln!(o, "  {name:<12} {v:.6}");
    }
    let _ = writeln!(o, "GME: {}", if r.gme { "yes" } else { "no" });
    if !r.zero_triangles.is_empty() {
        let labels: Vec<&str> = r.zero_triangles.iter().map(|z| z.label.as_str()).collect();
        let _ = writeln!(o, "zero triangles: {}", labels.join(", "));
    }
    if let Some(f) = &r.factorization {
        let blocks: Vec<String> = f.factors.iter().map(|b| b.to_string()).collect();
        let _ = writeln!(o, "factors: {}  (reconstruction deviation {:.2e})", blocks.join(" "), f.reconstruction_deviation);
    }
    for m in &r.marginal_cuts {
        let _ = writeln!(o, "warning: cut {} is marginal (C = {:.3e})", m.cut, m.concurrence);
    }
    o
}
