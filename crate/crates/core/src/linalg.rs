//! Small dense-band kernels: banded LU with partial pivoting, a tridiagonal
//! solver and the lowest eigenpair of a symmetric tridiagonal matrix.

/// Square band matrix with `kl` sub- and `ku` super-diagonals, stored row-wise
/// with `kl` extra columns of room for pivoting fill-in.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self { n, kl, ku, width, data: vec![0.0; n * width] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl, "({i}, {j}) outside band");
        i * self.width + (j + self.kl - i)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku + self.kl {
            return 0.0;
        }
        self.data[self.slot(i, j)]
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        assert!(j + self.kl >= i && j <= i + self.ku, "({i}, {j}) outside band");
        let s = self.slot(i, j);
        self.data[s] += value;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// In-place LU factorisation with row pivoting. Returns `None` on an exactly singular pivot.
    pub fn factor(mut self) -> Option<BandLu> {
        let n = self.n;
        let reach = self.ku + self.kl;
        let mut pivots = vec![0usize; n];
        for k in 0..n {
            let last_row = (k + self.kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs();
            for i in k + 1..=last_row {
                let v = self.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return None;
            }
            pivots[k] = p;
            let last_col = (k + reach).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let a = self.slot(k, j);
                    let b = self.slot(p, j);
                    self.data.swap(a, b);
                }
            }
            let diag = self.data[self.slot(k, k)];
            for i in k + 1..=last_row {
                let s = self.slot(i, k);
                let l = self.data[s] / diag;
                self.data[s] = l;
                if l != 0.0 {
                    for j in k + 1..=last_col {
                        let kj = self.data[self.slot(k, j)];
                        let ij = self.slot(i, j);
                        self.data[ij] -= l * kj;
                    }
                }
            }
        }
        Some(BandLu { m: self, pivots })
    }
}

#[derive(Debug, Clone)]
pub struct BandLu {
    m: BandMatrix,
    pivots: Vec<usize>,
}

impl BandLu {
    pub fn solve(&self, rhs: &mut [f64]) {
        let a = &self.m;
        let n = a.n;
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                rhs.swap(k, p);
            }
            let bk = rhs[k];
            for i in k + 1..=(k + a.kl).min(n - 1) {
                rhs[i] -= a.data[a.slot(i, k)] * bk;
            }
        }
        let reach = a.ku + a.kl;
        for k in (0..n).rev() {
            let mut s = rhs[k];
            for j in k + 1..=(k + reach).min(n - 1) {
                s -= a.data[a.slot(k, j)] * rhs[j];
            }
            rhs[k] = s / a.data[a.slot(k, k)];
        }
    }
}

/// Solves a tridiagonal system without pivoting; meant for diagonally dominant
/// or positive-definite matrices. `lower[i]` couples rows `i+1` and `i`, `upper[i]` rows `i` and `i+1`.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64]) {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut beta = diag[0];
    rhs[0] /= beta;
    for i in 1..n {
        c[i - 1] = upper[i - 1] / beta;
        beta = diag[i] - lower[i - 1] * c[i - 1];
        rhs[i] = (rhs[i] - lower[i - 1] * rhs[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
}

/// Number of eigenvalues strictly below `x` of the symmetric tridiagonal `(diag, off)`.
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let tiny = f64::MIN_POSITIVE.sqrt();
    let mut count = 0;
    let mut q = diag[0] - x;
    for i in 0..diag.len() {
        if i > 0 {
            q = diag[i] - x - off[i - 1] * off[i - 1] / q;
        }
        if q == 0.0 {
            q = -tiny;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

#[derive(Debug, Clone)]
pub struct LowestEigenpair {
    pub value: f64,
    /// Unit Euclidean norm, largest component positive.
    pub vector: Vec<f64>,
    pub bisection_steps: usize,
}

/// Lowest eigenpair of a symmetric tridiagonal matrix: Sturm bisection for the
/// value, then shifted inverse iteration from just below it for the vector.
pub fn lowest_eigenpair(diag: &[f64], off: &[f64]) -> Option<LowestEigenpair> {
    let m = diag.len();
    if m == 0 || off.len() + 1 != m {
        return None;
    }
    let radius = |i: usize| {
        let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < m { off[i].abs() } else { 0.0 };
        left + right
    };
    let mut lo = (0..m).map(|i| diag[i] - radius(i)).fold(f64::INFINITY, f64::min);
    let mut hi = (0..m).map(|i| diag[i] + radius(i)).fold(f64::NEG_INFINITY, f64::max);
    if !(lo.is_finite() && hi.is_finite()) {
        return None;
    }
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    let mut steps = 0;
    while hi - lo > 4.0 * f64::EPSILON * scale && steps < 400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
        steps += 1;
    }
    // Shift below the spectrum keeps T - shift positive definite.
    let shift = lo - 1e-9 * scale;
    let lower: Vec<f64> = off.to_vec();
    let shifted: Vec<f64> = diag.iter().map(|d| d - shift).collect();
    let mut y = vec![1.0 / (m as f64).sqrt(); m];
    for _ in 0..8 {
        solve_tridiagonal(&lower, &shifted, &lower, &mut y);
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return None;
        }
        y.iter_mut().for_each(|v| *v /= norm);
    }
    let imax = y
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(i, _)| i)
        .unwrap();
    if y[imax] < 0.0 {
        y.iter_mut().for_each(|v| *v = -*v);
    }
    // Rayleigh quotient of the converged vector.
    let mut num = 0.0;
    for i in 0..m {
        let mut ty = diag[i] * y[i];
        if i > 0 {
            ty += off[i - 1] * y[i - 1];
        }
        if i + 1 < m {
            ty += off[i] * y[i + 1];
        }
        num += y[i] * ty;
    }
    Some(LowestEigenpair { value: num, vector: y, bisection_steps: steps })
}
