//! Concurrence triangles and the geometric-mean-area GME measures built on them.
//!
//! A tripartition `X | Y | Z` of the parties gives a triangle whose edges are
//! the concurrences `C_{X|YZ}`, `C_{Y|XZ}`, `C_{Z|XY}`; the polygamy
//! inequalities make these satisfy the triangle inequality. The normalized
//! area is `[ (16/3) Q (Q-a)(Q-b)(Q-c) ]^e` with `Q` the half-perimeter.
//!
//! Two edge conventions are supported. [`EdgeConvention::Concurrence`] uses
//! the concurrences themselves with `e = 1/2`; [`EdgeConvention::Squared`]
//! uses squared concurrences with `e = 1/4`. Every report carries the
//! convention it was computed under.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::concurrence::{full_cut_table, CutConcurrenceTable};
use crate::cut::PartySet;
use crate::error::{GmeError, Result};
use crate::state::PureState;

/// A Heron radicand below `-RADICAND_TOL` means the edges are not a triangle.
pub const RADICAND_TOL: f64 = 1e-9;
/// Areas at or below this count as zero.
pub const ZERO_AREA_TOL: f64 = 1e-8;
/// Cut concurrences at or below this count as a product cut.
pub const EDGE_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeConvention {
    /// Edges are concurrences, area exponent 1/2.
    #[default]
    Concurrence,
    /// Edges are squared concurrences, area exponent 1/4.
    Squared,
}

impl EdgeConvention {
    pub const ALL: [EdgeConvention; 2] = [EdgeConvention::Concurrence, EdgeConvention::Squared];

    pub fn exponent(self) -> f64 {
        match self {
            EdgeConvention::Concurrence => 0.5,
            EdgeConvention::Squared => 0.25,
        }
    }

    /// Edge length for a cut of concurrence `c`.
    pub fn edge(self, c: f64) -> f64 {
        match self {
            EdgeConvention::Concurrence => c,
            EdgeConvention::Squared => c * c,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EdgeConvention::Concurrence => "concurrence",
            EdgeConvention::Squared => "squared",
        }
    }
}

impl fmt::Display for EdgeConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EdgeConvention {
    type Err = GmeError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "concurrence" => Ok(EdgeConvention::Concurrence),
            "squared" => Ok(EdgeConvention::Squared),
            other => Err(GmeError::Parse(format!("unknown edge convention '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GmeOptions {
    pub convention: EdgeConvention,
    /// Triangles with an edge concurrence at or below this get area exactly 0.
    pub edge_tol: f64,
    pub zero_tol: f64,
}

impl Default for GmeOptions {
    fn default() -> Self {
        Self { convention: EdgeConvention::Concurrence, edge_tol: EDGE_TOL, zero_tol: ZERO_AREA_TOL }
    }
}

impl GmeOptions {
    pub fn with_convention(convention: EdgeConvention) -> Self {
        Self { convention, ..Self::default() }
    }
}

/// `Q (Q-a)(Q-b)(Q-c)`, the squared unnormalized Heron area.
pub fn squared_area(edges: [f64; 3]) -> f64 {
    let [a, b, c] = edges;
    let q = 0.5 * (a + b + c);
    q * (q - a) * (q - b) * (q - c)
}

/// `[ (16/3) Q (Q-a)(Q-b)(Q-c) ]^e` for edge lengths already in the units of `conv`.
///
/// The radicand is evaluated in the cancellation-free sorted form
/// `(a+(b+c)) (c-(a-b)) (c+(a-b)) (a+(b-c)) / 3` with `a >= b >= c`.
pub fn heron_area_normalized(edges: [f64; 3], conv: EdgeConvention) -> Result<f64> {
    let mut e = edges;
    e.sort_by(|x, y| y.total_cmp(x));
    let [a, b, c] = e;
    let radicand = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c)) / 3.0;
    if radicand < -RADICAND_TOL || radicand.is_nan() {
        return Err(GmeError::PolygamyViolated(radicand));
    }
    Ok(radicand.max(0.0).powf(conv.exponent()))
}

/// One concurrence triangle with its computed area.
#[derive(Clone, Debug, Serialize)]
pub struct Triangle {
    /// The three vertex groups of the tripartition.
    pub vertices: [PartySet; 3],
    /// `concurrences[k]` is `C_{vertices[k] | rest}`.
    pub concurrences: [f64; 3],
    /// Edge lengths in the report's convention.
    pub edges: [f64; 3],
    pub half_perimeter: f64,
    pub area: f64,
    /// Vertex whose cut fell at or below the edge tolerance.
    pub zero_edge: Option<usize>,
}

impl Triangle {
    pub fn is_zero(&self, zero_tol: f64) -> bool {
        self.area <= zero_tol
    }

    /// Paper-style label: first two vertex groups, e.g. `1|3` or `1|23`.
    pub fn label(&self) -> String {
        let lab = |s: &PartySet| s.labels().iter().map(|l| l.to_string()).collect::<String>();
        format!("{}|{}", lab(&self.vertices[0]), lab(&self.vertices[1]))
    }
}

fn build_triangle(table: &CutConcurrenceTable, vertices: [PartySet; 3], opts: &GmeOptions) -> Result<Triangle> {
    let mut concurrences = [0.0; 3];
    for (k, v) in vertices.iter().enumerate() {
        concurrences[k] = table
            .get(v)
            .ok_or_else(|| GmeError::InvalidDims(format!("no concurrence for cut {v}")))?;
    }
    let edges = concurrences.map(|c| opts.convention.edge(c));
    let zero_edge = concurrences.iter().position(|&c| c <= opts.edge_tol);
    let area = match zero_edge {
        Some(_) => 0.0,
        None => heron_area_normalized(edges, opts.convention)?,
    };
    Ok(Triangle {
        vertices,
        concurrences,
        edges,
        half_perimeter: 0.5 * edges.iter().sum::<f64>(),
        area,
        zero_edge,
    })
}

/// Geometric mean accumulated in log space; any zero makes the mean zero.
pub fn geometric_mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut count = 0usize;
    let mut log_sum = 0.0;
    for v in values {
        if v <= 0.0 {
            return 0.0;
        }
        log_sum += v.ln();
        count += 1;
    }
    if count == 0 {
        return 0.0;
    }
    (log_sum / count as f64).exp()
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelReport {
    pub level: usize,
    pub value: f64,
    pub triangles: Vec<Triangle>,
}

/// The tripartition triangles of level `l`: every party `i` and every
/// `l`-subset `S` not containing it, in the order `i` ascending then `S` by mask.
pub fn level_vertices(n: usize, l: usize) -> Vec<[PartySet; 3]> {
    let mut out = Vec::new();
    for i in 0..n {
        let vi = PartySet::singleton(n, i);
        for s in PartySet::subsets_of_size(n, l) {
            if s.contains(i) {
                continue;
            }
            let rest = vi.union(&s).complement();
            out.push([vi, s, rest]);
        }
    }
    out
}

fn level_report(table: &CutConcurrenceTable, n: usize, l: usize, opts: &GmeOptions) -> Result<LevelReport> {
    let triangles = level_vertices(n, l)
        .into_iter()
        .map(|v| build_triangle(table, v, opts))
        .collect::<Result<Vec<_>>>()?;
    let value = geometric_mean(triangles.iter().map(|t| t.area));
    Ok(LevelReport { level: l, value, triangles })
}

fn check_level(n: usize, l: usize) -> Result<()> {
    if n < 4 {
        return Err(GmeError::PartyCount { expected: ">= 4", got: n });
    }
    if l < 1 || l > n - 3 {
        return Err(GmeError::OutOfRange { what: "level", value: l, lo: 1, hi: n - 3 });
    }
    Ok(())
}

/// Area of the single concurrence triangle of a tripartite state.
pub fn f3(psi: &PureState, opts: &GmeOptions) -> Result<f64> {
    let n = psi.n_parties();
    if n != 3 {
        return Err(GmeError::PartyCount { expected: "3", got: n });
    }
    let table = full_cut_table(psi);
    Ok(build_triangle(&table, tripartite_vertices(), opts)?.area)
}

fn tripartite_vertices() -> [PartySet; 3] {
    [PartySet::singleton(3, 0), PartySet::singleton(3, 1), PartySet::singleton(3, 2)]
}

/// Geometric mean area over the `N * C(N-1, l)` level-`l` triangles.
pub fn f_level(psi: &PureState, l: usize, opts: &GmeOptions) -> Result<f64> {
    let n = psi.n_parties();
    check_level(n, l)?;
    let table = full_cut_table(psi);
    Ok(level_report(&table, n, l, opts)?.value)
}

/// Number of levels entering the total measure, `floor((N-2)/2)`.
pub fn level_count(n: usize) -> usize {
    (n.saturating_sub(2)) / 2
}

#[derive(Clone, Debug, Serialize)]
pub struct ZeroTriangle {
    pub level: usize,
    pub label: String,
    pub vertices: [PartySet; 3],
    pub zero_vertex: Option<PartySet>,
    pub area: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GmeReport {
    pub convention: EdgeConvention,
    pub n_parties: usize,
    pub options: GmeOptions,
    pub levels: Vec<LevelReport>,
    pub f_total: f64,
    pub zero_triangles: Vec<ZeroTriangle>,
    /// Some area or the total came out above 1.
    pub exceeds_unity: bool,
}

impl GmeReport {
    pub fn level(&self, l: usize) -> Option<&LevelReport> {
        self.levels.iter().find(|r| r.level == l)
    }

    pub fn is_gme(&self) -> bool {
        self.f_total > self.options.zero_tol
    }

    pub fn triangles(&self) -> impl Iterator<Item = &Triangle> {
        self.levels.iter().flat_map(|l| l.triangles.iter())
    }
}

/// The total measure: `F_3` for three parties, otherwise the geometric mean
/// of the levels `1..=floor((N-2)/2)`.
pub fn f_total(psi: &PureState, opts: &GmeOptions) -> Result<GmeReport> {
    let table = full_cut_table(psi);
    f_total_from_table(&table, opts)
}

pub fn f_total_from_table(table: &CutConcurrenceTable, opts: &GmeOptions) -> Result<GmeReport> {
    let n = table.dims.len();
    if n < 3 {
        return Err(GmeError::PartyCount { expected: ">= 3", got: n });
    }
    let levels = if n == 3 {
        let t = build_triangle(table, tripartite_vertices(), opts)?;
        vec![LevelReport { level: 1, value: t.area, triangles: vec![t] }]
    } else {
        (1..=level_count(n)).map(|l| level_report(table, n, l, opts)).collect::<Result<Vec<_>>>()?
    };
    let f = geometric_mean(levels.iter().map(|l| l.value));
    let zero_triangles = levels
        .iter()
        .flat_map(|lvl| {
            lvl.triangles.iter().filter(|t| t.is_zero(opts.zero_tol)).map(move |t| ZeroTriangle {
                level: lvl.level,
                label: t.label(),
                vertices: t.vertices,
                zero_vertex: t.zero_edge.map(|k| t.vertices[k]),
                area: t.area,
            })
        })
        .collect();
    let exceeds_unity = f > 1.0 + 1e-12 || levels.iter().flat_map(|l| &l.triangles).any(|t| t.area > 1.0 + 1e-12);
    Ok(GmeReport { convention: opts.convention, n_parties: n, options: *opts, levels, f_total: f, zero_triangles, exceeds_unity })
}
