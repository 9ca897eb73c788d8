//! Elements of `M_N(ℂ)^{⊗K}` in factored, sum-of-factored, or dense storage.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Largest `N^K` accepted for dense storage (`K·log₂N ≤ 16`).
pub const MAX_DENSE_SIDE: usize = 1 << 16;

#[derive(Clone, Debug, PartialEq)]
pub enum TensorOperand {
    /// `A_1 ⊗ … ⊗ A_K`.
    Factored(Vec<CMatrix>),
    /// `Σ_t w_t A_{t,1} ⊗ … ⊗ A_{t,K}`.
    Sum(Vec<(Complex64, Vec<CMatrix>)>),
    /// Full `N^K × N^K` matrix; leg 1 is the most significant digit of a multi-index.
    Dense { n: usize, legs: usize, data: CMatrix },
}

fn check_factors(factors: &[CMatrix], n: Option<usize>) -> Result<usize> {
    let Some(first) = factors.first() else {
        return Err(Error::invalid("an operand needs at least one leg"));
    };
    let n = n.unwrap_or(first.nrows());
    if n == 0 {
        return Err(Error::invalid("matrix dimension must be positive"));
    }
    for (k, a) in factors.iter().enumerate() {
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::invalid(format!(
                "leg {} is {}x{}, expected {}x{}",
                k + 1,
                a.nrows(),
                a.ncols(),
                n,
                n
            )));
        }
    }
    Ok(n)
}

impl TensorOperand {
    pub fn factored(factors: Vec<CMatrix>) -> Result<Self> {
        check_factors(&factors, None)?;
        Ok(TensorOperand::Factored(factors))
    }

    pub fn sum(terms: Vec<(Complex64, Vec<CMatrix>)>) -> Result<Self> {
        let Some((_, first)) = terms.first() else {
            return Err(Error::invalid("a sum operand needs at least one term"));
        };
        let n = check_factors(first, None)?;
        let legs = first.len();
        for (_, t) in &terms {
            check_factors(t, Some(n))?;
            if t.len() != legs {
                return Err(Error::invalid("all terms of a sum operand need the same number of legs"));
            }
        }
        Ok(TensorOperand::Sum(terms))
    }

    pub fn dense(n: usize, legs: usize, data: CMatrix) -> Result<Self> {
        let side = dense_side(n, legs)?;
        if data.nrows() != side || data.ncols() != side {
            return Err(Error::invalid(format!(
                "dense operand must be {}x{} for N = {}, K = {}",
                side, side, n, legs
            )));
        }
        Ok(TensorOperand::Dense { n, legs, data })
    }

    /// `I_N^{⊗K}` in factored form.
    pub fn identity(n: usize, legs: usize) -> Self {
        TensorOperand::Factored(vec![CMatrix::identity(n, n); legs])
    }

    pub fn dim(&self) -> usize {
        match self {
            TensorOperand::Factored(f) => f[0].nrows(),
            TensorOperand::Sum(t) => t[0].1[0].nrows(),
            TensorOperand::Dense { n, .. } => *n,
        }
    }

    pub fn legs(&self) -> usize {
        match self {
            TensorOperand::Factored(f) => f.len(),
            TensorOperand::Sum(t) => t[0].1.len(),
            TensorOperand::Dense { legs, .. } => *legs,
        }
    }

    /// Weighted factored terms, or `None` for dense storage.
    pub fn terms(&self) -> Option<Vec<(Complex64, &[CMatrix])>> {
        match self {
            TensorOperand::Factored(f) => Some(vec![(Complex64::new(1.0, 0.0), f.as_slice())]),
            TensorOperand::Sum(t) => Some(t.iter().map(|(w, f)| (*w, f.as_slice())).collect()),
            TensorOperand::Dense { .. } => None,
        }
    }

    pub fn to_dense(&self) -> Result<CMatrix> {
        let n = self.dim();
        let legs = self.legs();
        let side = dense_side(n, legs)?;
        match self {
            TensorOperand::Dense { data, .. } => Ok(data.clone()),
            _ => {
                let mut out = CMatrix::zeros(side, side);
                for (w, f) in self.terms().expect("factored forms have terms") {
                    out += kron_all(f) * w;
                }
                Ok(out)
            }
        }
    }

    /// Entry `A(𝐢, 𝐣)` for 0-based multi-indices.
    pub fn entry(&self, rows: &[usize], cols: &[usize]) -> Complex64 {
        match self {
            TensorOperand::Dense { n, data, .. } => data[(flat_index(rows, *n), flat_index(cols, *n))],
            _ => self
                .terms()
                .expect("factored forms have terms")
                .iter()
                .map(|(w, f)| {
                    f.iter().enumerate().fold(*w, |acc, (k, a)| acc * a[(rows[k], cols[k])])
                })
                .sum(),
        }
    }

    /// `(D_1 ⊗ … ⊗ D_K) A (E_1 ⊗ … ⊗ E_K)` for diagonal `D_k = diag(left[k])`, `E_k = diag(right[k])`.
    pub fn scale_diagonal(&self, left: &[Vec<Complex64>], right: &[Vec<Complex64>]) -> Result<Self> {
        let n = self.dim();
        let legs = self.legs();
        if left.len() != legs || right.len() != legs || left.iter().chain(right).any(|d| d.len() != n) {
            return Err(Error::invalid("diagonal scalings must give N entries per leg"));
        }
        let scale = |f: &[CMatrix]| -> Vec<CMatrix> {
            f.iter()
                .enumerate()
                .map(|(k, a)| CMatrix::from_fn(n, n, |i, j| left[k][i] * a[(i, j)] * right[k][j]))
                .collect()
        };
        Ok(match self {
            TensorOperand::Factored(f) => TensorOperand::Factored(scale(f)),
            TensorOperand::Sum(t) => TensorOperand::Sum(t.iter().map(|(w, f)| (*w, scale(f))).collect()),
            TensorOperand::Dense { data, .. } => {
                let side = data.nrows();
                let diag = |d: &[Vec<Complex64>], idx: usize| -> Complex64 {
                    let digits = multi_index(idx, n, legs);
                    digits.iter().enumerate().map(|(k, &i)| d[k][i]).product()
                };
                let l: Vec<Complex64> = (0..side).map(|r| diag(left, r)).collect();
                let r: Vec<Complex64> = (0..side).map(|c| diag(right, c)).collect();
                TensorOperand::Dense {
                    n,
                    legs,
                    data: CMatrix::from_fn(side, side, |i, j| l[i] * data[(i, j)] * r[j]),
                }
            }
        })
    }

    /// The operand `self ⊗ other` (legs of `self` first).
    pub fn tensor(&self, other: &TensorOperand) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::invalid("tensor factors must share the matrix dimension"));
        }
        let (Some(a), Some(b)) = (self.terms(), other.terms()) else {
            let n = self.dim();
            let legs = self.legs() + other.legs();
            return TensorOperand::dense(n, legs, self.to_dense()?.kronecker(&other.to_dense()?));
        };
        let mut terms = Vec::with_capacity(a.len() * b.len());
        for (wa, fa) in &a {
            for (wb, fb) in &b {
                let mut f = fa.to_vec();
                f.extend_from_slice(fb);
                terms.push((wa * wb, f));
            }
        }
        if terms.len() == 1 && terms[0].0 == Complex64::new(1.0, 0.0) {
            Ok(TensorOperand::Factored(terms.pop().unwrap().1))
        } else {
            Ok(TensorOperand::Sum(terms))
        }
    }
}

fn dense_side(n: usize, legs: usize) -> Result<usize> {
    let mut side: usize = 1;
    for _ in 0..legs {
        side = side.saturating_mul(n);
        if side > MAX_DENSE_SIDE {
            return Err(Error::limit(format!(
                "dense storage of N = {} with K = {} legs exceeds N^K <= {}",
                n, legs, MAX_DENSE_SIDE
            )));
        }
    }
    Ok(side)
}

/// `a · op(b)` through a blocked complex GEMM; `op` is the transpose when `transpose_b`.
pub fn matmul(a: &CMatrix, b: &CMatrix, transpose_b: bool) -> CMatrix {
    let (m, k) = a.shape();
    let (rb, cb) = b.shape();
    let (kb, n, rsb, csb) = if transpose_b { (cb, rb, rb as isize, 1) } else { (rb, cb, 1, rb as isize) };
    assert_eq!(k, kb, "inner dimensions differ");
    let mut c = CMatrix::zeros(m, n);
    if m == 0 || n == 0 || k == 0 {
        return c;
    }
    // SAFETY: `Complex64` is `repr(C)` with layout `[f64; 2]`; nalgebra storage is
    // column-major and contiguous, and the strides below stay inside each buffer.
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.as_ptr() as *const [f64; 2],
            1,
            m as isize,
            b.as_ptr() as *const [f64; 2],
            rsb,
            csb,
            [0.0, 0.0],
            c.as_mut_ptr() as *mut [f64; 2],
            1,
            m as isize,
        );
    }
    c
}

/// Row-major flattening of a multi-index, leg 1 most significant.
pub fn flat_index(idx: &[usize], n: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * n + i)
}

pub fn multi_index(mut flat: usize, n: usize, legs: usize) -> Vec<usize> {
    let mut out = vec![0; legs];
    for k in (0..legs).rev() {
        out[k] = flat % n;
        flat /= n;
    }
    out
}

pub fn kron_all(factors: &[CMatrix]) -> CMatrix {
    factors
        .iter()
        .skip(1)
        .fold(factors[0].clone(), |acc, a| acc.kronecker(a))
}

/// Largest singular value.
pub fn operator_norm(a: &CMatrix) -> f64 {
    a.clone().singular_values().max()
}
