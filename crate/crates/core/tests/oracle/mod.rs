//! Reference implementations on plain nested vectors, independent of nalgebra.
#![allow(dead_code, clippy::needless_range_loop, clippy::manual_is_multiple_of)]

use nalgebra::DMatrix;
use rand::Rng;

pub type Mat = Vec<Vec<f64>>;

pub fn zeros(n: usize) -> Mat {
    vec![vec![0.0; n]; n]
}

pub fn identity(n: usize) -> Mat {
    let mut m = zeros(n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

pub fn from_dmatrix(m: &DMatrix<f64>) -> Mat {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub fn to_dmatrix(m: &Mat) -> DMatrix<f64> {
    let n = m.len();
    DMatrix::from_fn(n, m.first().map_or(0, Vec::len), |i, j| m[i][j])
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let (n, k, p) = (a.len(), b.len(), b[0].len());
    let mut out = vec![vec![0.0; p]; n];
    for i in 0..n {
        for l in 0..k {
            let x = a[i][l];
            for j in 0..p {
                out[i][j] += x * b[l][j];
            }
        }
    }
    out
}

pub fn transpose(a: &Mat) -> Mat {
    let (n, p) = (a.len(), a[0].len());
    (0..p).map(|j| (0..n).map(|i| a[i][j]).collect()).collect()
}

pub fn trace(a: &Mat) -> f64 {
    (0..a.len()).map(|i| a[i][i]).sum()
}

pub fn scale(a: &Mat, s: f64) -> Mat {
    a.iter()
        .map(|r| r.iter().map(|x| x * s).collect())
        .collect()
}

pub fn add(a: &Mat, b: &Mat) -> Mat {
    a.iter()
        .zip(b)
        .map(|(r, q)| r.iter().zip(q).map(|(x, y)| x + y).collect())
        .collect()
}

pub fn frobenius_distance(a: &Mat, b: &Mat) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn max_asymmetry(a: &Mat) -> f64 {
    let n = a.len();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((a[i][j] - a[j][i]).abs());
        }
    }
    worst
}

/// Cyclic Jacobi rotations. Returns eigenvalues and the matching eigenvectors
/// as columns of the second matrix.
pub fn jacobi_eigen(a: &Mat) -> (Vec<f64>, Mat) {
    let n = a.len();
    let mut m = a.clone();
    let mut v = identity(n);
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        let scale: f64 = m
            .iter()
            .flatten()
            .map(|x| x * x)
            .sum::<f64>()
            .max(f64::MIN_POSITIVE);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q] == 0.0 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k][p], v[k][q]);
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| m[i][i]).collect(), v)
}

pub fn min_eigenvalue(a: &Mat) -> f64 {
    jacobi_eigen(a).0.into_iter().fold(f64::INFINITY, f64::min)
}

pub fn entropy(a: &Mat) -> f64 {
    jacobi_eigen(a)
        .0
        .into_iter()
        .filter(|&l| l > 0.0)
        .map(|l| -l * l.ln())
        .sum()
}

fn column(v: &Mat, j: usize) -> Vec<f64> {
    v.iter().map(|r| r[j]).collect()
}

fn outer_sum(vectors: &[Vec<f64>]) -> Mat {
    let n = vectors[0].len();
    let mut p = zeros(n);
    for x in vectors {
        for i in 0..n {
            for j in 0..n {
                p[i][j] += x[i] * x[j];
            }
        }
    }
    p
}

/// `Σ_g λ_g P_g B P_g` with eigenvalues grouped within a relative tolerance, trace-normalized.
pub fn fuzz(a: &Mat, b: &Mat) -> Mat {
    let (vals, vecs) = jacobi_eigen(a);
    let n = a.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]));
    let top = vals[order[0]].abs().max(1.0);
    let mut out = zeros(n);
    let mut i = 0;
    while i < n {
        let mut group = vec![order[i]];
        while i + group.len() < n
            && (vals[order[i]] - vals[order[i + group.len()]]).abs() <= 1e-8 * top
        {
            group.push(order[i + group.len()]);
        }
        let lambda = group.iter().map(|&g| vals[g]).sum::<f64>() / group.len() as f64;
        i += group.len();
        if lambda <= 0.0 {
            continue;
        }
        let p = outer_sum(&group.iter().map(|&g| column(&vecs, g)).collect::<Vec<_>>());
        out = add(&out, &scale(&matmul(&matmul(&p, b), &p), lambda));
    }
    let t = trace(&out);
    scale(&out, 1.0 / t)
}

pub fn sqrt_psd(a: &Mat) -> Mat {
    let (vals, vecs) = jacobi_eigen(a);
    let n = a.len();
    let top = vals.iter().copied().fold(0.0, f64::max);
    let mut d = zeros(n);
    for i in 0..n {
        d[i][i] = if vals[i] <= n as f64 * f64::EPSILON * top {
            0.0
        } else {
            vals[i].sqrt()
        };
    }
    matmul(&matmul(&vecs, &d), &transpose(&vecs))
}

/// `A^{1/2} B A^{1/2}`, trace-normalized.
pub fn phaser(a: &Mat, b: &Mat) -> Mat {
    let r = sqrt_psd(a);
    let out = matmul(&matmul(&r, b), &r);
    let t = trace(&out);
    scale(&out, 1.0 / t)
}

pub fn random_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// A random trace-1 PSD matrix of rank `rank`.
pub fn random_density<R: Rng>(rng: &mut R, n: usize, rank: usize) -> Mat {
    let vs: Vec<Vec<f64>> = (0..rank).map(|_| random_vector(rng, n)).collect();
    let m = outer_sum(&vs);
    let t = trace(&m);
    scale(&m, 1.0 / t)
}

/// Gram–Schmidt on the columns of a random matrix.
pub fn random_orthogonal<R: Rng>(rng: &mut R, n: usize) -> Mat {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v = random_vector(rng, n);
        for c in &cols {
            let d: f64 = v.iter().zip(c).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(c).for_each(|(x, y)| *x -= d * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            cols.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    transpose(&cols)
}

/// `V diag(λ) Vᵀ` for orthogonal `V`.
pub fn with_spectrum(v: &Mat, lambdas: &[f64]) -> Mat {
    let n = v.len();
    let mut d = zeros(n);
    for i in 0..n {
        d[i][i] = lambdas[i];
    }
    matmul(&matmul(v, &d), &transpose(v))
}

/// Replaces columns `cols` of `v` by a random rotation within their span.
pub fn remix_columns<R: Rng>(rng: &mut R, v: &Mat, cols: &[usize]) -> Mat {
    let q = random_orthogonal(rng, cols.len());
    let mut out = v.clone();
    for row in 0..v.len() {
        for (j, &cj) in cols.iter().enumerate() {
            out[row][cj] = cols
                .iter()
                .enumerate()
                .map(|(i, &ci)| v[row][ci] * q[i][j])
                .sum();
        }
    }
    out
}

pub fn central_difference(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut x = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = x[i];
            x[i] = orig + h;
            let up = f(&x);
            x[i] = orig - h;
            let down = f(&x);
            x[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// `‖a − b‖ / max(‖a‖, ‖b‖)`, 0 when both vanish.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    let denom = na.max(nb);
    if denom == 0.0 {
        0.0
    } else {
        diff / denom
    }
}

/// Exhaustive pregroup search over symbols `0..6` encoding
/// `n^l, n, n^r, s^l, s, s^r` (base = sym / 3, adjoint = sym % 3).
pub fn cancels(a: u8, b: u8) -> bool {
    a / 3 == b / 3 && ((a % 3 == 0 && b % 3 == 1) || (a % 3 == 1 && b % 3 == 2))
}

pub const S: u8 = 4;

pub struct PregroupSearch {
    memo: Vec<u8>,
}

impl PregroupSearch {
    pub fn new(max_len: u32) -> Self {
        Self {
            memo: vec![0; 7usize.pow(max_len)],
        }
    }

    fn code(list: &[u8]) -> usize {
        list.iter()
            .rev()
            .fold(0usize, |acc, &s| acc * 7 + s as usize + 1)
    }

    /// True when some contraction order leaves exactly `s`.
    pub fn reaches_s(&mut self, list: &[u8]) -> bool {
        if list == [S] {
            return true;
        }
        let code = Self::code(list);
        if self.memo[code] != 0 {
            return self.memo[code] == 2;
        }
        let mut found = false;
        for i in 0..list.len().saturating_sub(1) {
            if cancels(list[i], list[i + 1]) {
                let mut next = list.to_vec();
                next.drain(i..i + 2);
                if self.reaches_s(&next) {
                    found = true;
                    break;
                }
            }
        }
        self.memo[code] = if found { 2 } else { 1 };
        found
    }
}

/// True when `target` is reachable from `list` by contractions.
pub fn reaches(list: &[u8], target: &[u8]) -> bool {
    if list == target {
        return true;
    }
    if list.len() <= target.len() {
        return false;
    }
    (0..list.len() - 1).any(|i| {
        cancels(list[i], list[i + 1]) && {
            let mut next = list.to_vec();
            next.drain(i..i + 2);
            reaches(&next, target)
        }
    })
}

pub fn is_irreducible(list: &[u8]) -> bool {
    list.windows(2).all(|w| !cancels(w[0], w[1]))
}

pub fn symbol_name(s: u8) -> &'static str {
    ["n^l", "n", "n^r", "s^l", "s", "s^r"][s as usize]
}

/// Average ranks, then Pearson, written out in full.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        v.iter()
            .map(|&a| {
                let less = v.iter().filter(|&&b| b < a).count() as f64;
                let equal = v.iter().filter(|&&b| b == a).count() as f64;
                less + (equal + 1.0) / 2.0
            })
            .collect()
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my) * (b - my)).sum();
    cov / (vx * vy).sqrt()
}
