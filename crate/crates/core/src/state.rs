//! Dense multi-qudit states.
//!
//! Amplitudes are stored row-major in party order: for digits `c_k` the flat
//! index is `sum_k c_k * prod_{j>k} d_j`, so party 0 is the most significant.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::cut::{PartySet, MAX_PARTIES};
use crate::error::{GmeError, Result};
use crate::linalg::{self, Eigen};

pub type C64 = Complex64;

/// Default tolerance for state invariants (norm, trace, Hermiticity, PSD).
pub const STATE_TOL: f64 = 1e-9;

/// Largest total Hilbert-space dimension accepted.
pub const MAX_DIM: usize = 1 << 16;

pub(crate) fn check_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return Err(GmeError::InvalidDims("empty dimension list".into()));
    }
    if dims.len() > MAX_PARTIES {
        return Err(GmeError::InvalidDims(format!("{} parties exceeds {MAX_PARTIES}", dims.len())));
    }
    let mut total = 1usize;
    for &d in dims {
        if d < 2 {
            return Err(GmeError::InvalidDims(format!("local dimension {d} < 2")));
        }
        total = total.saturating_mul(d);
        if total > MAX_DIM {
            return Err(GmeError::InvalidDims(format!("total dimension exceeds {MAX_DIM}")));
        }
    }
    Ok(total)
}

/// Row and column index of every flat basis index when the parties are split
/// into `set` (rows) and its complement (columns).
pub(crate) struct Split {
    pub row: Vec<usize>,
    pub col: Vec<usize>,
    pub rows: usize,
    pub cols: usize,
}

pub(crate) fn split_indices(dims: &[usize], set: &PartySet) -> Split {
    let n = dims.len();
    let rows: usize = (0..n).filter(|&k| set.contains(k)).map(|k| dims[k]).product();
    let cols: usize = (0..n).filter(|&k| !set.contains(k)).map(|k| dims[k]).product();
    // Per-party stride inside its own side.
    let mut side_stride = vec![0usize; n];
    let (mut rs, mut cs) = (1usize, 1usize);
    for k in (0..n).rev() {
        if set.contains(k) {
            side_stride[k] = rs;
            rs *= dims[k];
        } else {
            side_stride[k] = cs;
            cs *= dims[k];
        }
    }
    let total = rows * cols;
    let mut row = Vec::with_capacity(total);
    let mut col = Vec::with_capacity(total);
    let mut digits = vec![0usize; n];
    let (mut r, mut c) = (0usize, 0usize);
    for _ in 0..total {
        row.push(r);
        col.push(c);
        // odometer increment, last party fastest
        for k in (0..n).rev() {
            let on_row = set.contains(k);
            digits[k] += 1;
            if on_row { r += side_stride[k] } else { c += side_stride[k] }
            if digits[k] < dims[k] {
                break;
            }
            let back = dims[k] * side_stride[k];
            if on_row { r -= back } else { c -= back }
            digits[k] = 0;
        }
    }
    Split { row, col, rows, cols }
}

/// A normalized pure state on `dims.len()` parties.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    dims: Vec<usize>,
    amps: Vec<C64>,
}

impl PureState {
    /// Validates length and norm (within [`STATE_TOL`]).
    pub fn new(dims: Vec<usize>, amps: Vec<C64>) -> Result<Self> {
        Self::with_tol(dims, amps, STATE_TOL)
    }

    pub fn with_tol(dims: Vec<usize>, amps: Vec<C64>, tol: f64) -> Result<Self> {
        let total = check_dims(&dims)?;
        if amps.len() != total {
            return Err(GmeError::InvalidDims(format!(
                "{} amplitudes for total dimension {total}",
                amps.len()
            )));
        }
        let norm = norm(&amps);
        if (norm - 1.0).abs() > tol {
            return Err(GmeError::Validation { check: "normalization", value: norm, tol });
        }
        Ok(Self { dims, amps })
    }

    /// Rescales `amps` to unit norm.
    pub fn normalized(dims: Vec<usize>, mut amps: Vec<C64>) -> Result<Self> {
        let total = check_dims(&dims)?;
        if amps.len() != total {
            return Err(GmeError::InvalidDims(format!(
                "{} amplitudes for total dimension {total}",
                amps.len()
            )));
        }
        let n = norm(&amps);
        if n < 1e-300 || !n.is_finite() {
            return Err(GmeError::Validation { check: "normalization", value: n, tol: STATE_TOL });
        }
        amps.iter_mut().for_each(|a| *a /= n);
        Ok(Self { dims, amps })
    }

    /// Computational basis state `|digits>`.
    pub fn basis(dims: Vec<usize>, digits: &[usize]) -> Result<Self> {
        let total = check_dims(&dims)?;
        if digits.len() != dims.len() || digits.iter().zip(&dims).any(|(c, d)| c >= d) {
            return Err(GmeError::InvalidDims(format!("basis label {digits:?} does not fit {dims:?}")));
        }
        let idx = digits.iter().zip(&dims).fold(0, |acc, (c, d)| acc * d + c);
        let mut amps = vec![C64::new(0.0, 0.0); total];
        amps[idx] = C64::new(1.0, 0.0);
        Ok(Self { dims, amps })
    }

    /// `(|0...0> + |1...1>)/sqrt(2)` on `n` qubits.
    pub fn ghz(n: usize) -> Result<Self> {
        let dims = vec![2; n];
        let total = check_dims(&dims)?;
        let mut amps = vec![C64::new(0.0, 0.0); total];
        let h = std::f64::consts::FRAC_1_SQRT_2;
        amps[0] = C64::new(h, 0.0);
        amps[total - 1] = C64::new(h, 0.0);
        Ok(Self { dims, amps })
    }

    /// Uniform superposition of the `n` single-excitation qubit states.
    pub fn w(n: usize) -> Result<Self> {
        let dims = vec![2; n];
        let total = check_dims(&dims)?;
        let mut amps = vec![C64::new(0.0, 0.0); total];
        let a = 1.0 / (n as f64).sqrt();
        for k in 0..n {
            amps[1 << k] = C64::new(a, 0.0);
        }
        Ok(Self { dims, amps })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn n_parties(&self) -> usize {
        self.dims.len()
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amps)
    }

    pub fn all_parties(&self) -> PartySet {
        PartySet::full(self.n_parties())
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|psi><psi|` as a density matrix.
    pub fn to_density(&self) -> DensityMatrix {
        let v = nalgebra::DVector::from_column_slice(&self.amps);
        DensityMatrix::from_parts(self.dims.clone(), &v * v.adjoint())
    }

    /// Amplitudes reshaped to a `d_S x d_rest` matrix.
    pub fn bipartition_matrix(&self, set: &PartySet) -> DMatrix<C64> {
        let split = split_indices(&self.dims, set);
        let mut m = DMatrix::zeros(split.rows, split.cols);
        for (i, a) in self.amps.iter().enumerate() {
            m[(split.row[i], split.col[i])] = *a;
        }
        m
    }

    /// Applies `op` (a `d x d` matrix) to one party; the result is not renormalized.
    pub fn apply_local(&self, party: usize, op: &DMatrix<C64>) -> Result<Vec<C64>> {
        let n = self.n_parties();
        if party >= n {
            return Err(GmeError::PartyOutOfRange { party, parties: n });
        }
        let d = self.dims[party];
        if op.ncols() != d {
            return Err(GmeError::InvalidDims(format!(
                "operator with {} columns on party of dimension {d}",
                op.ncols()
            )));
        }
        if op.nrows() != d {
            return Err(GmeError::InvalidDims("local operator must be square".into()));
        }
        let stride: usize = self.dims[party + 1..].iter().product();
        let block = d * stride;
        let mut out = vec![C64::new(0.0, 0.0); self.amps.len()];
        for base in (0..self.amps.len()).step_by(block) {
            for low in 0..stride {
                for r in 0..d {
                    let mut acc = C64::new(0.0, 0.0);
                    for c in 0..d {
                        acc += op[(r, c)] * self.amps[base + c * stride + low];
                    }
                    out[base + r * stride + low] = acc;
                }
            }
        }
        Ok(out)
    }

    /// Applies a unitary on one party.
    pub fn apply_local_unitary(&self, party: usize, u: &DMatrix<C64>) -> Result<PureState> {
        let amps = self.apply_local(party, u)?;
        PureState::with_tol(self.dims.clone(), amps, 1e-8)
    }

    /// Reorders parties so that new party `k` is old party `order[k]`.
    pub fn permute_parties(&self, order: &[usize]) -> Result<PureState> {
        let n = self.n_parties();
        let mut seen = vec![false; n];
        if order.len() != n || order.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(GmeError::InvalidDims(format!("{order:?} is not a permutation of {n} parties")));
        }
        let new_dims: Vec<usize> = order.iter().map(|&p| self.dims[p]).collect();
        let old_strides = strides(&self.dims);
        let mut amps = vec![C64::new(0.0, 0.0); self.amps.len()];
        let mut digits = vec![0usize; n];
        for (new_idx, slot) in amps.iter_mut().enumerate() {
            let mut rem = new_idx;
            for k in (0..n).rev() {
                digits[k] = rem % new_dims[k];
                rem /= new_dims[k];
            }
            let old_idx: usize = (0..n).map(|k| digits[k] * old_strides[order[k]]).sum();
            *slot = self.amps[old_idx];
        }
        Ok(PureState { dims: new_dims, amps })
    }
}

pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

fn norm(amps: &[C64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// A Hermitian, unit-trace, positive semidefinite matrix over `dims`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    mat: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn new(dims: Vec<usize>, mat: DMatrix<C64>) -> Result<Self> {
        Self::with_tol(dims, mat, STATE_TOL)
    }

    /// Validates Hermiticity, trace and spectrum against `tol`.
    pub fn with_tol(dims: Vec<usize>, mat: DMatrix<C64>, tol: f64) -> Result<Self> {
        let total = check_dims(&dims)?;
        if mat.nrows() != total || mat.ncols() != total {
            return Err(GmeError::InvalidDims(format!(
                "{}x{} matrix for total dimension {total}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let herm = linalg::hermiticity_defect(&mat);
        if herm > tol {
            return Err(GmeError::Validation { check: "hermiticity", value: herm, tol });
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(GmeError::Validation { check: "unit trace", value: tr.re, tol });
        }
        let eig = linalg::hermitian_eig_tol(&mat, tol)?;
        let min = eig.values.last().copied().unwrap_or(0.0);
        if min < -tol {
            return Err(GmeError::Validation { check: "positive semidefinite", value: min, tol });
        }
        Ok(Self { dims, mat })
    }

    pub(crate) fn from_parts(dims: Vec<usize>, mat: DMatrix<C64>) -> Self {
        Self { dims, mat }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn n_parties(&self) -> usize {
        self.dims.len()
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn eig(&self) -> Result<Eigen> {
        hermitian_eig(self)
    }
}

/// Kronecker product of the factors, parties concatenated in order.
pub fn tensor_product(states: &[PureState]) -> Result<PureState> {
    let (first, rest) = states.split_first().ok_or(GmeError::NoFactors)?;
    let mut dims = first.dims.clone();
    let mut amps = first.amps.clone();
    for s in rest {
        dims.extend_from_slice(&s.dims);
        check_dims(&dims)?;
        amps = amps.iter().flat_map(|a| s.amps.iter().map(move |b| a * b)).collect();
    }
    PureState::with_tol(dims, amps, 1e-8)
}

/// Either kind of state, for operations that accept both.
#[derive(Clone, Debug)]
pub enum AnyState {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl From<PureState> for AnyState {
    fn from(p: PureState) -> Self {
        AnyState::Pure(p)
    }
}

impl From<DensityMatrix> for AnyState {
    fn from(d: DensityMatrix) -> Self {
        AnyState::Mixed(d)
    }
}

pub trait PartialTrace {
    /// Reduced state on `keep`, tracing out every other party.
    fn partial_trace(&self, keep: &PartySet) -> Result<DensityMatrix>;
}

fn check_keep(dims: &[usize], keep: &PartySet) -> Result<()> {
    if keep.n_parties() != dims.len() {
        return Err(GmeError::InvalidDims(format!(
            "party set over {} parties applied to a {}-party state",
            keep.n_parties(),
            dims.len()
        )));
    }
    if keep.is_empty() || keep.is_full() {
        return Err(GmeError::ImproperBipartition(format!("keep set {keep} is empty or full")));
    }
    Ok(())
}

fn kept_dims(dims: &[usize], keep: &PartySet) -> Vec<usize> {
    keep.parties().into_iter().map(|k| dims[k]).collect()
}

impl PartialTrace for PureState {
    fn partial_trace(&self, keep: &PartySet) -> Result<DensityMatrix> {
        check_keep(&self.dims, keep)?;
        let m = self.bipartition_matrix(keep);
        Ok(DensityMatrix::from_parts(kept_dims(&self.dims, keep), &m * m.adjoint()))
    }
}

impl PartialTrace for DensityMatrix {
    fn partial_trace(&self, keep: &PartySet) -> Result<DensityMatrix> {
        check_keep(&self.dims, keep)?;
        let split = split_indices(&self.dims, keep);
        // full[r][c] = flat index of (kept r, traced c)
        let mut full = vec![0usize; split.rows * split.cols];
        for (idx, (r, c)) in split.row.iter().zip(&split.col).enumerate() {
            full[r * split.cols + c] = idx;
        }
        let mut out = DMatrix::zeros(split.rows, split.rows);
        for i in 0..split.rows {
            for j in 0..split.rows {
                let mut acc = C64::new(0.0, 0.0);
                for t in 0..split.cols {
                    acc += self.mat[(full[i * split.cols + t], full[j * split.cols + t])];
                }
                out[(i, j)] = acc;
            }
        }
        Ok(DensityMatrix::from_parts(kept_dims(&self.dims, keep), out))
    }
}

impl PartialTrace for AnyState {
    fn partial_trace(&self, keep: &PartySet) -> Result<DensityMatrix> {
        match self {
            AnyState::Pure(p) => p.partial_trace(keep),
            AnyState::Mixed(m) => m.partial_trace(keep),
        }
    }
}

/// `Tr(rho^2)`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.mat.iter().map(|z| z.norm_sqr()).sum()
}

/// `1 - Tr(rho^2)`.
pub fn linear_entropy(rho: &DensityMatrix) -> f64 {
    1.0 - purity(rho)
}

/// Purity of the reduced state on `set`, without forming the larger marginal.
pub fn marginal_purity(psi: &PureState, set: &PartySet) -> f64 {
    let m = psi.bipartition_matrix(set);
    let g = if m.nrows() <= m.ncols() { &m * m.adjoint() } else { m.adjoint() * &m };
    g.iter().map(|z| z.norm_sqr()).sum()
}

/// Eigendecomposition of a density matrix, eigenvalues descending.
pub fn hermitian_eig(rho: &DensityMatrix) -> Result<Eigen> {
    linalg::hermitian_eig(&rho.mat)
}
