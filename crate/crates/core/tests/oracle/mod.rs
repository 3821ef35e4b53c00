//! Reference implementations used only by tests.
//!
//! Deliberately naive: marginals by summing over every index pair, the plain
//! Heron formula, geometric means as products. No code is shared with the
//! library beyond the complex number type.

#![allow(dead_code)]

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64 as C;

pub fn digits(mut idx: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        out[k] = idx % dims[k];
        idx /= dims[k];
    }
    out
}

pub fn index(d: &[usize], dims: &[usize]) -> usize {
    d.iter().zip(dims).fold(0, |acc, (&x, &n)| acc * n + x)
}

/// Reduced density matrix on `keep` (ascending), by direct summation.
pub fn marginal(dims: &[usize], amps: &[C], keep: &[usize]) -> Vec<Vec<C>> {
    let kd: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let dk: usize = kd.iter().product();
    let mut rho = vec![vec![C::new(0.0, 0.0); dk]; dk];
    let total = amps.len();
    for a in 0..total {
        if amps[a].norm_sqr() == 0.0 {
            continue;
        }
        let da = digits(a, dims);
        for b in 0..total {
            let db = digits(b, dims);
            // traced parties must agree
            let agree = (0..dims.len()).filter(|p| !keep.contains(p)).all(|p| da[p] == db[p]);
            if !agree {
                continue;
            }
            let ra = index(&keep.iter().map(|&k| da[k]).collect::<Vec<_>>(), &kd);
            let rb = index(&keep.iter().map(|&k| db[k]).collect::<Vec<_>>(), &kd);
            rho[ra][rb] += amps[a] * amps[b].conj();
        }
    }
    rho
}

pub fn purity(rho: &[Vec<C>]) -> f64 {
    let n = rho.len();
    let mut s = C::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            s += rho[i][j] * rho[j][i];
        }
    }
    s.re
}

pub fn concurrence(dims: &[usize], amps: &[C], side: &[usize]) -> f64 {
    let mut keep = side.to_vec();
    keep.sort();
    (2.0 * (1.0 - purity(&marginal(dims, amps, &keep)))).max(0.0).sqrt()
}

/// Normalized Heron area with edges `c` or `c^2`.
pub fn heron(c: [f64; 3], squared: bool) -> f64 {
    let e = if squared { c.map(|x| x * x) } else { c };
    let q = (e[0] + e[1] + e[2]) / 2.0;
    let r = 16.0 / 3.0 * q * (q - e[0]) * (q - e[1]) * (q - e[2]);
    let r = r.max(0.0);
    if squared {
        r.powf(0.25)
    } else {
        r.sqrt()
    }
}

fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    (0u32..(1 << n))
        .filter(|m| m.count_ones() as usize == size)
        .map(|m| (0..n).filter(|&i| m >> i & 1 == 1).collect())
        .collect()
}

/// Level-`l` triangle areas: vertex `{i}`, an `l`-set `S` without `i`, and the rest.
pub fn level_areas(dims: &[usize], amps: &[C], l: usize, squared: bool) -> Vec<f64> {
    let n = dims.len();
    let mut out = Vec::new();
    for i in 0..n {
        for s in subsets(n, l) {
            if s.contains(&i) {
                continue;
            }
            let rest: Vec<usize> = (0..n).filter(|p| *p != i && !s.contains(p)).collect();
            let c = [concurrence(dims, amps, &[i]), concurrence(dims, amps, &s), concurrence(dims, amps, &rest)];
            out.push(heron(c, squared));
        }
    }
    out
}

pub fn geo_mean(v: &[f64]) -> f64 {
    v.iter().product::<f64>().powf(1.0 / v.len() as f64)
}

pub fn f_level(dims: &[usize], amps: &[C], l: usize, squared: bool) -> f64 {
    geo_mean(&level_areas(dims, amps, l, squared))
}

pub fn f_total(dims: &[usize], amps: &[C], squared: bool) -> f64 {
    let n = dims.len();
    if n == 3 {
        let c = [concurrence(dims, amps, &[0]), concurrence(dims, amps, &[1]), concurrence(dims, amps, &[2])];
        return heron(c, squared);
    }
    let levels: Vec<f64> = (1..=(n - 2) / 2).map(|l| f_level(dims, amps, l, squared)).collect();
    geo_mean(&levels)
}

/// Minimum slack over the four polygamy families for a pure state.
pub fn polygamy_min_slack(dims: &[usize], amps: &[C]) -> f64 {
    let n = dims.len();
    let single: Vec<f64> = (0..n).map(|i| concurrence(dims, amps, &[i])).collect();
    let mut worst = f64::INFINITY;
    for i in 0..n {
        let others_sq: f64 = (0..n).filter(|&j| j != i).map(|j| single[j] * single[j]).sum();
        let others: f64 = (0..n).filter(|&j| j != i).map(|j| single[j]).sum();
        worst = worst.min(others_sq - single[i] * single[i]);
        worst = worst.min(others - single[i]);
        for j in 0..n {
            if j == i {
                continue;
            }
            let cij = concurrence(dims, amps, &[i, j]);
            worst = worst.min(single[i] + single[j] - cij);
            worst = worst.min(cij + single[j] - single[i]);
        }
    }
    // linear entropy bounds over disjoint nonempty S, T
    let t = |set: &[usize]| 1.0 - purity(&marginal(dims, amps, set));
    for ms in 1u32..(1 << n) {
        for mt in 1u32..(1 << n) {
            if ms & mt != 0 {
                continue;
            }
            let s: Vec<usize> = (0..n).filter(|&i| ms >> i & 1 == 1).collect();
            let tt: Vec<usize> = (0..n).filter(|&i| mt >> i & 1 == 1).collect();
            let u: Vec<usize> = (0..n).filter(|&i| (ms | mt) >> i & 1 == 1).collect();
            let (a, b, c) = (t(&s), t(&tt), t(&u));
            worst = worst.min(c - (a - b).abs());
            worst = worst.min(a + b - c);
        }
    }
    worst
}

/// `(K on party) |psi>`, unnormalized.
pub fn apply_op(dims: &[usize], amps: &[C], party: usize, k: &DMatrix<C>) -> Vec<C> {
    let mut out = vec![C::new(0.0, 0.0); amps.len()];
    for (a, amp) in amps.iter().enumerate() {
        let da = digits(a, dims);
        for row in 0..dims[party] {
            let mut db = da.clone();
            db[party] = row;
            out[index(&db, dims)] += k[(row, da[party])] * amp;
        }
    }
    out
}

pub fn normalize(v: &mut [C]) -> f64 {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let s = n.sqrt();
    v.iter_mut().for_each(|z| *z /= s);
    n
}

/// Dominant eigenvector of a Hermitian PSD matrix by power iteration.
pub fn dominant_eigvec(m: &DMatrix<C>) -> Vec<C> {
    let n = m.nrows();
    let mut v: Vec<C> = (0..n).map(|i| C::new(1.0 + i as f64 * 0.013, 0.1 * (i % 3) as f64)).collect();
    normalize(&mut v);
    for _ in 0..500 {
        let mut w = vec![C::new(0.0, 0.0); n];
        for i in 0..n {
            for j in 0..n {
                w[i] += m[(i, j)] * v[j];
            }
        }
        normalize(&mut w);
        v = w;
    }
    v
}

/// Two-qubit concurrence of a real density matrix from the eigenvalues of `rho rho~`.
pub fn wootters_real(rho: &Matrix4<f64>) -> f64 {
    let yy = Matrix4::new(
        0.0, 0.0, 0.0, -1.0, //
        0.0, 0.0, 1.0, 0.0, //
        0.0, 1.0, 0.0, 0.0, //
        -1.0, 0.0, 0.0, 0.0,
    );
    let r = rho * yy * rho * yy;
    let mut l: Vec<f64> = r.complex_eigenvalues().iter().map(|z| z.re.max(0.0).sqrt()).collect();
    l.sort_by(|a, b| b.total_cmp(a));
    (l[0] - l[1] - l[2] - l[3]).max(0.0)
}

/// Real part of a two-party marginal as a `Matrix4`.
pub fn to_matrix4(rho: &[Vec<C>]) -> Matrix4<f64> {
    Matrix4::from_fn(|i, j| rho[i][j].re)
}

/// Reduced matrix of a density matrix on `keep` (ascending), by direct summation.
pub fn marginal_of_density(dims: &[usize], rho: &DMatrix<C>, keep: &[usize]) -> Vec<Vec<C>> {
    let kd: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let dk: usize = kd.iter().product();
    let mut out = vec![vec![C::new(0.0, 0.0); dk]; dk];
    let total = rho.nrows();
    for a in 0..total {
        let da = digits(a, dims);
        for b in 0..total {
            let db = digits(b, dims);
            if (0..dims.len()).filter(|p| !keep.contains(p)).all(|p| da[p] == db[p]) {
                let ra = index(&keep.iter().map(|&k| da[k]).collect::<Vec<_>>(), &kd);
                let rb = index(&keep.iter().map(|&k| db[k]).collect::<Vec<_>>(), &kd);
                out[ra][rb] += rho[(a, b)];
            }
        }
    }
    out
}
