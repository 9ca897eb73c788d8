//! Rational characters of `U(N)`, leg permutations of `(ℂ^N)^{⊗d}`, and the
//! conditional expectation onto their span.

use std::fmt;
use std::str::FromStr;

use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;
use num_complex::Complex64;
use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operand::{matmul, multi_index, CMatrix, TensorOperand};
use crate::perm::{all_permutations, check_permutation, compose, cycles, inverse};
use crate::random::{pairwise_sum, sample_haar_unitary, sample_values, MCReport, RngStream};
use crate::word::StarWord;

/// Eigenvalues closer than this are treated as colliding.
pub const EIGENVALUE_GAP: f64 = 1e-8;
/// Largest `N^d` materialized as a dense leg permutation.
pub const MAX_LEG_SIDE: usize = 1 << 16;
/// Largest `d` for the conditional expectation (Gram matrix of size `d!`).
pub const MAX_AMALGAM_LEGS: usize = 4;
/// Largest `min(k, N − k)` for which `e_k` is taken from Newton's identities.
const MAX_NEWTON_DEGREE: usize = 16;

/// A pair of Young diagrams `(λ, μ)` indexing the rational irreducible representation
/// with highest weight `(λ₁, …, λ_a, 0, …, 0, −μ_b, …, −μ₁)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Signature {
    pub lambda: Vec<u32>,
    pub mu: Vec<u32>,
}

fn check_diagram(d: &[u32], name: &str) -> Result<()> {
    if d.contains(&0) {
        return Err(Error::invalid(format!("{} must have positive parts", name)));
    }
    if d.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::invalid(format!("{} must be weakly decreasing", name)));
    }
    Ok(())
}

fn parse_diagram(s: &str) -> Result<Vec<u32>> {
    let s = s.trim();
    if s.is_empty() || s == "-" {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| t.trim().parse::<u32>().map_err(|_| Error::Parse(format!("bad diagram part {:?}", t))))
        .collect()
}

impl Signature {
    pub fn new(lambda: Vec<u32>, mu: Vec<u32>) -> Result<Self> {
        check_diagram(&lambda, "lambda")?;
        check_diagram(&mu, "mu")?;
        Ok(Signature { lambda, mu })
    }

    /// From comma lists such as `"2,1"` and `""`.
    pub fn parse(lambda: &str, mu: &str) -> Result<Self> {
        Signature::new(parse_diagram(lambda)?, parse_diagram(mu)?)
    }

    pub fn trivial() -> Self {
        Signature { lambda: Vec::new(), mu: Vec::new() }
    }

    pub fn is_trivial(&self) -> bool {
        self.lambda.is_empty() && self.mu.is_empty()
    }

    /// `l(λ) + l(μ)`, the least `N` carrying the representation.
    pub fn length(&self) -> usize {
        self.lambda.len() + self.mu.len()
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        if self.length() > n {
            return Err(Error::invalid(format!(
                "signature {} needs N >= {}, got {}",
                self,
                self.length(),
                n
            )));
        }
        Ok(())
    }

    /// The padded highest weight `λ̂` of length `N`.
    pub fn highest_weight(&self, n: usize) -> Result<Vec<i64>> {
        self.check_dim(n)?;
        let mut w = vec![0i64; n];
        for (j, &l) in self.lambda.iter().enumerate() {
            w[j] = l as i64;
        }
        for (j, &m) in self.mu.iter().enumerate() {
            w[n - 1 - j] = -(m as i64);
        }
        Ok(w)
    }

    /// Weyl's dimension formula `∏_{i<j} (l_i − l_j)/(j − i)` in exact arithmetic.
    pub fn dimension(&self, n: usize) -> Result<u128> {
        let w = self.highest_weight(n)?;
        let l: Vec<i128> = (0..n).map(|j| w[j] as i128 + (n - 1 - j) as i128).collect();
        let changed: Vec<bool> = w.iter().map(|&x| x != 0).collect();
        let overflow = || Error::Numerical(format!("dimension of {} at N = {} overflows", self, n));
        let mut dim = Ratio::<i128>::from_integer(1);
        for i in 0..n {
            for j in i + 1..n {
                if !changed[i] && !changed[j] {
                    continue;
                }
                let num = dim.numer().checked_mul(l[i] - l[j]).ok_or_else(overflow)?;
                let den = dim.denom().checked_mul((j - i) as i128).ok_or_else(overflow)?;
                dim = Ratio::new(num, den);
            }
        }
        if !dim.is_integer() || *dim.numer() <= 0 {
            return Err(Error::Numerical(format!("dimension formula gave {}", dim)));
        }
        u128::try_from(*dim.numer()).map_err(|_| overflow())
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |d: &[u32]| d.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        write!(f, "(({}),({}))", show(&self.lambda), show(&self.mu))
    }
}

impl FromStr for Signature {
    type Err = Error;

    /// `"2,1;1"` is `λ = (2,1)`, `μ = (1)`; the `;μ` part may be omitted.
    fn from_str(s: &str) -> Result<Self> {
        let (l, m) = s.split_once(';').unwrap_or((s, ""));
        Signature::parse(l, m)
    }
}

fn eigenvalues(u: &CMatrix) -> Result<Vec<Complex64>> {
    let schur = u.clone().schur();
    let ev = schur
        .eigenvalues()
        .ok_or_else(|| Error::IllConditioned("Schur form did not triangularize".into()))?;
    Ok(ev.iter().copied().collect())
}

fn min_gap(z: &[Complex64]) -> f64 {
    let mut gap = f64::INFINITY;
    for i in 0..z.len() {
        for j in i + 1..z.len() {
            gap = gap.min((z[i] - z[j]).norm());
        }
    }
    gap
}

/// `det(z_i^{l_j}) / det(z_i^{N−j})` as `det(X_C)` with `X = V^{−1} A_C`, where `C` are
/// the columns whose exponent differs from the Vandermonde one.
fn weyl_ratio(z: &[Complex64], w: &[i64]) -> Result<Complex64> {
    let n = z.len();
    let changed: Vec<usize> = (0..n).filter(|&j| w[j] != 0).collect();
    if changed.is_empty() {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let pow = |x: Complex64, e: i64| -> Complex64 { x.powi(e as i32) };
    let v = CMatrix::from_fn(n, n, |i, j| pow(z[i], (n - 1 - j) as i64));
    let a = CMatrix::from_fn(n, changed.len(), |i, c| {
        let j = changed[c];
        pow(z[i], w[j] + (n - 1 - j) as i64)
    });
    let x = v
        .lu()
        .solve(&a)
        .ok_or_else(|| Error::IllConditioned("Vandermonde system is singular".into()))?;
    let sub = CMatrix::from_fn(changed.len(), changed.len(), |r, c| x[(changed[r], c)]);
    Ok(sub.determinant())
}

/// `χ_{λ,μ}(U) / dim` from the eigenvalues of `U` (determinant ratio), falling back
/// to [`normalized_character_by_traces`] when two eigenvalues collide.
pub fn normalized_character(sig: &Signature, u: &CMatrix) -> Result<Complex64> {
    let n = u.nrows();
    if u.ncols() != n {
        return Err(Error::invalid("the matrix must be square"));
    }
    let w = sig.highest_weight(n)?;
    if sig.is_trivial() {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let z = eigenvalues(u)?;
    if min_gap(&z) < EIGENVALUE_GAP {
        return normalized_character_by_traces(sig, u);
    }
    let dim = sig.dimension(n)? as f64;
    Ok(weyl_ratio(&z, &w)? / dim)
}

/// Elementary symmetric polynomials `e_0, …, e_m` of the eigenvalues from the power
/// sums `p_j = Tr(U^j)` (Newton's identities).
fn elementary_from_traces(u: &CMatrix, m: usize) -> Vec<Complex64> {
    let n = u.nrows();
    let mut p = Vec::with_capacity(m + 1);
    p.push(Complex64::new(n as f64, 0.0));
    let mut power = CMatrix::identity(n, n);
    for _ in 1..=m {
        power = matmul(&power, u, false);
        p.push(power.trace());
    }
    let mut e = vec![Complex64::new(1.0, 0.0)];
    for k in 1..=m {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 1..=k {
            let term = e[k - j] * p[j];
            if j % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        e.push(acc / k as f64);
    }
    e
}

/// The same normalized character through the dual Jacobi–Trudi identity
/// `s_ν = det[e_{ν′_i − i + j}]` with `ν = λ̂ + μ₁`, using `e_{N−k} = det U · conj(e_k)`
/// for unitary `U`. No eigenvalues are needed, so coinciding eigenvalues are harmless.
pub fn normalized_character_by_traces(sig: &Signature, u: &CMatrix) -> Result<Complex64> {
    let n = u.nrows();
    let w = sig.highest_weight(n)?;
    if sig.is_trivial() {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let shift = sig.mu.first().copied().unwrap_or(0) as i64;
    let nu: Vec<i64> = w.iter().map(|&x| x + shift).collect();
    let width = nu[0] as usize;
    let conj_nu: Vec<i64> = (1..=width as i64).map(|i| nu.iter().filter(|&&x| x >= i).count() as i64).collect();
    let mut needed: Vec<i64> = Vec::new();
    for i in 0..width {
        for j in 0..width {
            needed.push(conj_nu[i] - i as i64 + j as i64);
        }
    }
    let depth = needed
        .iter()
        .filter(|&&k| k >= 0 && k <= n as i64)
        .map(|&k| (k as usize).min(n - k as usize))
        .max()
        .unwrap_or(0);
    if depth > MAX_NEWTON_DEGREE {
        return Err(Error::IllConditioned(format!(
            "the trace route needs e_k with min(k, N-k) = {} > {}",
            depth, MAX_NEWTON_DEGREE
        )));
    }
    let e = elementary_from_traces(u, depth);
    let det = u.determinant();
    let e_at = |k: i64| -> Complex64 {
        if k < 0 || k > n as i64 {
            Complex64::new(0.0, 0.0)
        } else if k as usize <= depth {
            e[k as usize]
        } else {
            det * e[n - k as usize].conj()
        }
    };
    let jt = CMatrix::from_fn(width, width, |i, j| e_at(conj_nu[i] - i as i64 + j as i64));
    let schur = jt.determinant();
    let dim = sig.dimension(n)? as f64;
    Ok(schur * det.powi(-(shift as i32)) / dim)
}

/// `(tr U)^{l(λ)} (tr Ū)^{l(μ)}`, the leading behaviour of the normalized character.
pub fn character_leading_term(sig: &Signature, u: &CMatrix) -> Complex64 {
    let tr = u.trace() / u.nrows() as f64;
    tr.powi(sig.lambda.len() as i32) * tr.conj().powi(sig.mu.len() as i32)
}

/// Letters `0..K` are `U_k`, letters `K..2K` are `conj(U_{k−K})`.
pub fn evaluate_conjugate_word(us: &[CMatrix], m: &StarWord) -> Result<CMatrix> {
    let k = us.len();
    if m.alphabet_size() > 2 * k {
        return Err(Error::invalid(format!("word uses letter {} beyond 2K = {}", m.alphabet_size(), 2 * k)));
    }
    let n = us[0].nrows();
    Ok(m.letters().iter().fold(CMatrix::identity(n, n), |acc, l| {
        let base = if l.index < k { us[l.index].clone() } else { us[l.index - k].conjugate() };
        let x = if l.star { base.adjoint() } else { base };
        matmul(&acc, &x, false)
    }))
}

#[derive(Clone, Debug, Serialize)]
pub struct CharacterReport {
    pub signature: String,
    pub word: String,
    pub report: MCReport,
    /// Mean of `|χ(M) − (tr M)^{l(λ)} (tr M̄)^{l(μ)}|`.
    pub asymptotic_error: f64,
}

/// Monte-Carlo mean of `χ_{λ,μ}(M(U, Ū))` over `K` independent Haar unitaries.
pub fn character_mc(sig: &Signature, m: &StarWord, k: usize, n: usize, samples: usize, stream: RngStream) -> Result<CharacterReport> {
    if m.is_trivial() {
        return Err(Error::invalid("the word reduces to the identity"));
    }
    if samples < 2 {
        return Err(Error::invalid("Monte-Carlo runs need at least 2 samples"));
    }
    sig.check_dim(n)?;
    let start = Instant::now();
    let pairs = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream.sample(i).rng();
            let us: Vec<CMatrix> = (0..k).map(|_| sample_haar_unitary(n, &mut rng)).collect();
            let x = evaluate_conjugate_word(&us, m)?;
            let chi = normalized_character(sig, &x)?;
            Ok((chi, Complex64::new((chi - character_leading_term(sig, &x)).norm(), 0.0)))
        })
        .collect::<Result<Vec<_>>>()?;
    let (values, errs): (Vec<Complex64>, Vec<Complex64>) = pairs.into_iter().unzip();
    let report = MCReport::from_samples(n, &values, start.elapsed().as_secs_f64());
    let asymptotic_error = pairwise_sum(&errs).re / samples as f64;
    Ok(CharacterReport { signature: sig.to_string(), word: m.to_string(), report, asymptotic_error })
}

fn leg_side(n: usize, d: usize) -> Result<usize> {
    let mut side = 1usize;
    for _ in 0..d {
        side = side.checked_mul(n).filter(|&s| s <= MAX_LEG_SIDE).ok_or_else(|| {
            Error::limit(format!("(C^{})^(x{}) exceeds the dense limit N^d <= {}", n, d, MAX_LEG_SIDE))
        })?;
    }
    Ok(side)
}

/// Index action of `ρ(σ)`: `e_{i_1} ⊗ ⋯ ⊗ e_{i_d} ↦ e_{i_{σ^{−1}(1)}} ⊗ ⋯`, i.e. leg
/// `m` moves to position `σ(m)`.
pub fn permute_legs(sigma: &[usize], idx: &[usize]) -> Vec<usize> {
    let mut out = vec![0; idx.len()];
    for (m, &i) in idx.iter().enumerate() {
        out[sigma[m]] = i;
    }
    out
}

/// Dense `ρ(σ)` on `(ℂ^N)^{⊗d}`.
pub fn leg_permutation(sigma: &[usize], n: usize) -> Result<CMatrix> {
    check_permutation(sigma)?;
    let d = sigma.len();
    let side = leg_side(n, d)?;
    let mut m = CMatrix::zeros(side, side);
    for col in 0..side {
        let idx = multi_index(col, n, d);
        let row = crate::operand::flat_index(&permute_legs(sigma, &idx), n);
        m[(row, col)] = Complex64::new(1.0, 0.0);
    }
    Ok(m)
}

/// `tr_N^{⊗d}(A^{⊗d} ρ(σ))` by dense contraction.
fn dense_permuted_trace(a: &CMatrix, sigma: &[usize]) -> Result<Complex64> {
    let n = a.nrows();
    let d = sigma.len();
    let side = leg_side(n, d)?;
    let mut total = Complex64::new(0.0, 0.0);
    // Tr(A^{⊗d} ρ(σ)) = Σ_col (A^{⊗d})(col, ρ(σ)·col) summed over basis vectors
    for col in 0..side {
        let idx = multi_index(col, n, d);
        let moved = permute_legs(sigma, &idx);
        let mut prod = Complex64::new(1.0, 0.0);
        for k in 0..d {
            prod *= a[(idx[k], moved[k])];
        }
        total += prod;
    }
    Ok(total / side as f64)
}

/// `N^{−d} ∏_{cycles c of σ} Tr(A^{|c|})`.
pub fn cycle_factorization(a: &CMatrix, sigma: &[usize]) -> Result<Complex64> {
    check_permutation(sigma)?;
    let n = a.nrows();
    let d = sigma.len();
    let mut powers = vec![CMatrix::identity(n, n)];
    let mut out = Complex64::new(1.0, 0.0);
    for c in cycles(sigma) {
        while powers.len() <= c.len() {
            let next = matmul(powers.last().unwrap(), a, false);
            powers.push(next);
        }
        out *= powers[c.len()].trace();
    }
    Ok(out / (n as f64).powi(d as i32))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct FactorizationCheck {
    pub direct: Complex64,
    pub factored: Complex64,
    pub residual: f64,
}

/// Compares `tr^{⊗d}(A^{⊗d} ρ(σ))` (dense) with the cycle product.
pub fn cycle_factorization_check(a: &CMatrix, sigma: &[usize]) -> Result<FactorizationCheck> {
    check_permutation(sigma)?;
    let direct = dense_permuted_trace(a, sigma)?;
    let factored = cycle_factorization(a, sigma)?;
    Ok(FactorizationCheck { direct, factored, residual: (direct - factored).norm() })
}

/// A word of `F_{2K} × S_d`: letters `0..K` act as `U_k^{⊗d}`, letters `K..2K` as
/// `(U_{k−K}^t)^{⊗d}`; `sigma` in one-line notation (0-based).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PermutationWord {
    pub free: StarWord,
    pub sigma: Vec<usize>,
}

impl PermutationWord {
    pub fn new(free: StarWord, sigma: Vec<usize>) -> Result<Self> {
        check_permutation(&sigma)?;
        Ok(PermutationWord { free, sigma })
    }

    pub fn is_trivial(&self) -> bool {
        self.free.is_trivial() && self.sigma.iter().enumerate().all(|(i, &s)| i == s)
    }
}

fn evaluate_transpose_word(us: &[CMatrix], m: &StarWord) -> CMatrix {
    let k = us.len();
    let n = us[0].nrows();
    m.letters().iter().fold(CMatrix::identity(n, n), |acc, l| {
        let base = if l.index < k { us[l.index].clone() } else { us[l.index - k].transpose() };
        let x = if l.star { base.adjoint() } else { base };
        matmul(&acc, &x, false)
    })
}

/// Monte-Carlo estimate of `tr_N^{⊗d} ρ^{(N)}(𝔴)` for `K` Haar unitaries, computed per
/// sample through the cycle factorization; when `N^d` is small enough the dense
/// contraction is evaluated as well and must agree to `1e−10`.
pub fn left_regular_check(word: &PermutationWord, k: usize, n: usize, samples: usize, stream: RngStream) -> Result<MCReport> {
    if word.is_trivial() {
        return Err(Error::invalid("the word is trivial in F_2K x S_d"));
    }
    if word.free.alphabet_size() > 2 * k {
        return Err(Error::invalid("free part uses more than 2K letters"));
    }
    if samples < 2 {
        return Err(Error::invalid("Monte-Carlo runs need at least 2 samples"));
    }
    let d = word.sigma.len();
    let dense = leg_side(n, d).is_ok();
    let (values, secs) = sample_values(samples, stream, |rng| {
        let us: Vec<CMatrix> = (0..k.max(1)).map(|_| sample_haar_unitary(n, rng)).collect();
        let a = evaluate_transpose_word(&us, &word.free);
        let value = cycle_factorization(&a, &word.sigma)?;
        if dense {
            let direct = dense_permuted_trace(&a, &word.sigma)?;
            if (direct - value).norm() > 1e-10 {
                return Err(Error::Numerical(format!(
                    "cycle factorization off by {:e}",
                    (direct - value).norm()
                )));
            }
        }
        Ok(value)
    })?;
    Ok(MCReport::from_samples(n, &values, secs))
}

/// Orthogonal projection onto `span{ρ(σ) : σ ∈ S_d}` for `⟨X, Y⟩ = tr^{⊗d}(X* Y)`.
#[derive(Clone, Debug, Serialize)]
pub struct SdProjection {
    pub n: usize,
    pub d: usize,
    /// `S_d` in lexicographic one-line order.
    pub perms: Vec<Vec<usize>>,
    pub coefficients: Vec<Complex64>,
}

impl SdProjection {
    pub fn to_dense(&self) -> Result<CMatrix> {
        let side = leg_side(self.n, self.d)?;
        let mut out = CMatrix::zeros(side, side);
        for (p, c) in self.perms.iter().zip(&self.coefficients) {
            out += leg_permutation(p, self.n)? * *c;
        }
        Ok(out)
    }
}

/// `G(σ, τ) = N^{#cycles(σ^{−1}τ) − d}`.
pub fn sd_gram(perms: &[Vec<usize>], n: usize) -> DMatrix<f64> {
    let d = perms.first().map(|p| p.len()).unwrap_or(0) as i32;
    DMatrix::from_fn(perms.len(), perms.len(), |i, j| {
        let c = crate::perm::cycle_count(&compose(&inverse(&perms[i]), &perms[j])) as i32;
        (n as f64).powi(c - d)
    })
}

/// Coefficients `G^{−1} [tr^{⊗d}(ρ(σ)* A)]_σ` of the projection of `A`.
pub fn conditional_expectation_sd(a: &TensorOperand, d: usize) -> Result<SdProjection> {
    if d == 0 || d > MAX_AMALGAM_LEGS {
        return Err(Error::invalid(format!("d must be in 1..={}", MAX_AMALGAM_LEGS)));
    }
    if a.legs() != d {
        return Err(Error::invalid(format!("operand has {} legs, expected d = {}", a.legs(), d)));
    }
    let n = a.dim();
    if n < d {
        return Err(Error::IllConditioned(format!(
            "the leg permutations are linearly dependent for N = {} < d = {}",
            n, d
        )));
    }
    let side = leg_side(n, d)?;
    let dense = a.to_dense()?;
    let perms = all_permutations(d);
    // tr(ρ(σ)* A) = N^{−d} Σ_col A(ρ(σ)col, col)
    let rhs: Vec<Complex64> = perms
        .iter()
        .map(|p| {
            let mut s = Complex64::new(0.0, 0.0);
            for col in 0..side {
                let row = crate::operand::flat_index(&permute_legs(p, &multi_index(col, n, d)), n);
                s += dense[(row, col)];
            }
            s / side as f64
        })
        .collect();
    let gram = sd_gram(&perms, n);
    let lu = gram.lu();
    let solve = |v: Vec<f64>| -> Result<Vec<f64>> {
        lu.solve(&nalgebra::DVector::from_vec(v))
            .map(|x| x.iter().copied().collect())
            .ok_or_else(|| Error::IllConditioned("singular Gram matrix".into()))
    };
    let re = solve(rhs.iter().map(|z| z.re).collect())?;
    let im = solve(rhs.iter().map(|z| z.im).collect())?;
    let coefficients = re.iter().zip(&im).map(|(&r, &i)| Complex64::new(r, i)).collect();
    Ok(SdProjection { n, d, perms, coefficients })
}

/// Product in the group algebra `ℂ[S_d]`, elements indexed like `perms`.
fn sd_product(perms: &[Vec<usize>], a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let index: std::collections::HashMap<&[usize], usize> =
        perms.iter().enumerate().map(|(i, p)| (p.as_slice(), i)).collect();
    let mut out = vec![Complex64::new(0.0, 0.0); perms.len()];
    for (i, x) in a.iter().enumerate() {
        if x.norm() == 0.0 {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[index[compose(&perms[i], &perms[j]).as_slice()]] += x * y;
        }
    }
    out
}

/// Coefficients of `E(W^{⊗d})` over `S_d` (lexicographic order), without forming the
/// `N^d × N^d` matrix: `tr^{⊗d}(ρ(σ)* W^{⊗d})` is a product of traces of powers of `W`.
pub fn tensor_power_expectation(w: &CMatrix, d: usize) -> Result<Vec<Complex64>> {
    if d == 0 || d > MAX_AMALGAM_LEGS {
        return Err(Error::invalid(format!("d must be in 1..={}", MAX_AMALGAM_LEGS)));
    }
    let n = w.nrows();
    if n < d {
        return Err(Error::IllConditioned(format!(
            "the leg permutations are linearly dependent for N = {} < d = {}",
            n, d
        )));
    }
    let perms = all_permutations(d);
    let rhs: Vec<Complex64> = perms.iter().map(|p| cycle_factorization(w, &inverse(p))).collect::<Result<_>>()?;
    let lu = sd_gram(&perms, n).lu();
    let solve = |v: Vec<f64>| -> Result<Vec<f64>> {
        lu.solve(&nalgebra::DVector::from_vec(v))
            .map(|x| x.iter().copied().collect())
            .ok_or_else(|| Error::IllConditioned("singular Gram matrix".into()))
    };
    let re = solve(rhs.iter().map(|z| z.re).collect())?;
    let im = solve(rhs.iter().map(|z| z.im).collect())?;
    Ok(re.iter().zip(&im).map(|(&r, &i)| Complex64::new(r, i)).collect())
}

/// Coefficients of `E(a_1 ⋯ a_l)` with `a_i = W_i^{⊗d} − E(W_i^{⊗d})`. Leg permutations
/// commute with `W^{⊗d}`, so each of the `2^l` expansion terms is `P · V^{⊗d}` with `P`
/// in the group algebra and `E(P V^{⊗d}) = P E(V^{⊗d})`.
pub fn centered_product_expectation(ws: &[CMatrix], d: usize) -> Result<Vec<Complex64>> {
    let perms = all_permutations(d);
    let n = ws.first().map(|w| w.nrows()).ok_or_else(|| Error::invalid("empty product"))?;
    let centers: Vec<Vec<Complex64>> = ws.iter().map(|w| tensor_power_expectation(w, d)).collect::<Result<_>>()?;
    let mut unit = vec![Complex64::new(0.0, 0.0); perms.len()];
    unit[0] = Complex64::new(1.0, 0.0);
    let mut total = vec![Complex64::new(0.0, 0.0); perms.len()];
    for mask in 0u32..(1 << ws.len()) {
        let mut p = unit.clone();
        let mut v = CMatrix::identity(n, n);
        for (i, w) in ws.iter().enumerate() {
            if mask & (1 << i) != 0 {
                p = sd_product(&perms, &p, &centers[i]);
            } else {
                v = matmul(&v, w, false);
            }
        }
        let term = sd_product(&perms, &p, &tensor_power_expectation(&v, d)?);
        let sign = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        for (t, x) in total.iter_mut().zip(term) {
            *t += x * sign;
        }
    }
    Ok(total)
}

/// Finite-order probe of freeness with amalgamation over `S_d`: for independent Haar
/// `U₁, U₂` and `x = U₁^{⊗d} − E(U₁^{⊗d})`, `y = U₂^{⊗d} − E(U₂^{⊗d})`, the Euclidean
/// norm of the sample mean of the coefficients of `E(x y x* y*)`.
pub fn amalgamation_probe(d: usize, n: usize, samples: usize, stream: RngStream) -> Result<f64> {
    if samples == 0 {
        return Err(Error::invalid("at least one sample is required"));
    }
    let rows = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream.sample(i).rng();
            let u1 = sample_haar_unitary(n, &mut rng);
            let u2 = sample_haar_unitary(n, &mut rng);
            centered_product_expectation(&[u1.clone(), u2.clone(), u1.adjoint(), u2.adjoint()], d)
        })
        .collect::<Result<Vec<_>>>()?;
    let count = rows[0].len();
    let norm_sqr: f64 = (0..count)
        .map(|j| {
            let col: Vec<Complex64> = rows.iter().map(|r| r[j]).collect();
            (pairwise_sum(&col) / samples as f64).norm_sqr()
        })
        .sum();
    Ok(norm_sqr.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::sample_ginibre;

    fn haar(n: usize, seed: u64) -> CMatrix {
        sample_haar_unitary(n, &mut RngStream::new(seed, 0).rng())
    }

    #[test]
    fn dimensions() {
        let s = |l: &str, m: &str| Signature::parse(l, m).unwrap();
        assert_eq!(s("1", "").dimension(5).unwrap(), 5);
        assert_eq!(s("1", "1").dimension(7).unwrap(), 48);
        assert_eq!(s("2", "").dimension(4).unwrap(), 10);
        assert_eq!(s("1,1", "").dimension(4).unwrap(), 6);
        assert_eq!(s("2,1", "").dimension(3).unwrap(), 8);
        assert_eq!(s("", "").dimension(9).unwrap(), 1);
        assert_eq!(s("1,1", "1").dimension(128).unwrap(), 128 * 127 / 2 * 128 - 128);
        assert!(s("1,1", "1").dimension(2).is_err());
        assert!(Signature::parse("1,2", "").is_err());
    }

    #[test]
    fn fundamental_is_normalized_trace() {
        let u = haar(3, 1);
        let chi = normalized_character(&Signature::parse("1", "").unwrap(), &u).unwrap();
        assert!((chi - u.trace() / 3.0).norm() < 1e-12);
        let chi = normalized_character(&Signature::parse("", "1").unwrap(), &u).unwrap();
        assert!((chi - u.trace().conj() / 3.0).norm() < 1e-12);
    }

    #[test]
    fn small_characters_from_power_sums() {
        // oracle: h_2 = (p1² + p2)/2, e_2 = (p1² − p2)/2, adjoint = |p1|² − 1
        let n = 5;
        let u = haar(n, 2);
        let p1 = u.trace();
        let p2 = (&u * &u).trace();
        let nf = n as f64;
        let cases = [
            ("2", "", (p1 * p1 + p2) / 2.0 / (nf * (nf + 1.0) / 2.0)),
            ("1,1", "", (p1 * p1 - p2) / 2.0 / (nf * (nf - 1.0) / 2.0)),
            ("1", "1", (Complex64::new(p1.norm_sqr(), 0.0) - 1.0) / (nf * nf - 1.0)),
        ];
        for (l, m, expect) in cases {
            let sig = Signature::parse(l, m).unwrap();
            let chi = normalized_character(&sig, &u).unwrap();
            assert!((chi - expect).norm() < 1e-10, "{}: {} vs {}", sig, chi, expect);
        }
    }

    #[test]
    fn both_routes_agree() {
        let sigs = ["2,1;1", "3;", "1,1;1", ";2", "2;2", "1,1,1;1,1"];
        for (t, s) in sigs.iter().enumerate() {
            let sig: Signature = s.parse().unwrap();
            for n in [6, 9] {
                let u = haar(n, 10 + t as u64);
                let a = normalized_character(&sig, &u).unwrap();
                let b = normalized_character_by_traces(&sig, &u).unwrap();
                assert!((a - b).norm() < 1e-9, "{} N={}: {} vs {}", sig, n, a, b);
            }
        }
    }

    #[test]
    fn unital_and_class_function() {
        let sig: Signature = "2,1;1".parse().unwrap();
        let id = CMatrix::identity(6, 6);
        assert!((normalized_character(&sig, &id).unwrap() - 1.0).norm() < 1e-12);
        let u = haar(6, 3);
        let v = haar(6, 4);
        let a = normalized_character(&sig, &u).unwrap();
        let b = normalized_character(&sig, &(&v * &u * v.adjoint())).unwrap();
        assert!((a - b).norm() < 1e-9);
        // scalar matrices act by z^{|λ|−|μ|}
        let z = Complex64::from_polar(1.0, 0.7);
        let zi = CMatrix::identity(6, 6) * z;
        assert!((normalized_character(&sig, &zi).unwrap() - z.powi(2)).norm() < 1e-10);
    }

    #[test]
    fn leg_permutations() {
        let swap = leg_permutation(&[1, 0], 2).unwrap();
        let expect = CMatrix::from_fn(4, 4, |i, j| {
            let p = [0, 2, 1, 3];
            if p[j] == i { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }
        });
        assert_eq!(swap, expect);
        assert_eq!(leg_permutation(&[0, 1, 2], 2).unwrap(), CMatrix::identity(8, 8));
        let perms = all_permutations(3);
        for s in &perms {
            for t in &perms {
                let lhs = leg_permutation(&compose(s, t), 3).unwrap();
                let rhs = leg_permutation(s, 3).unwrap() * leg_permutation(t, 3).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
        assert!(leg_permutation(&[0, 1, 2, 3, 4], 16).is_err());
    }

    #[test]
    fn factorization_identity() {
        let mut rng = RngStream::new(5, 0).rng();
        for d in 1..=3 {
            for sigma in all_permutations(d) {
                let a = sample_ginibre(4, &mut rng);
                let c = cycle_factorization_check(&a, &sigma).unwrap();
                assert!(c.residual < 1e-10 * (1.0 + c.direct.norm()), "{:?}", c);
                let id = cycle_factorization(&CMatrix::identity(4, 4), &sigma).unwrap();
                let cyc = crate::perm::cycle_count(&sigma) as i32;
                assert!((id.re - 4f64.powi(cyc - d as i32)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn left_regular_examples() {
        let w = PermutationWord::new("1".parse().unwrap(), vec![0, 1]).unwrap();
        let r = left_regular_check(&w, 1, 32, 400, RngStream::new(6, 0)).unwrap();
        assert!(r.within(Complex64::new(0.0, 0.0), 3.0), "{:?}", r);
        let swap = PermutationWord::new(StarWord::empty(), vec![1, 0]).unwrap();
        let r = left_regular_check(&swap, 1, 10, 5, RngStream::new(7, 0)).unwrap();
        assert!((r.estimate - 0.1).norm() < 1e-14 && r.stderr < 1e-14);
        let trivial = PermutationWord::new("1,1*".parse().unwrap(), vec![0, 1]).unwrap();
        assert!(left_regular_check(&trivial, 1, 4, 5, RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn projection_properties() {
        let n = 3;
        for d in [2, 3] {
            let perms = all_permutations(d);
            for p in &perms {
                let op = TensorOperand::dense(n, d, leg_permutation(p, n).unwrap()).unwrap();
                let proj = conditional_expectation_sd(&op, d).unwrap();
                for (q, c) in perms.iter().zip(&proj.coefficients) {
                    let e = if q == p { 1.0 } else { 0.0 };
                    assert!((c - e).norm() < 1e-10);
                }
            }
            let mut rng = RngStream::new(8, d as u64).rng();
            let side = n.pow(d as u32);
            let a = sample_ginibre(side, &mut rng);
            let b = sample_ginibre(side, &mut rng);
            let e = |m: &CMatrix| {
                conditional_expectation_sd(&TensorOperand::dense(n, d, m.clone()).unwrap(), d).unwrap().to_dense().unwrap()
            };
            let ea = e(&a);
            assert!((e(&ea) - &ea).norm() < 1e-9);
            // self-adjoint: tr(E(A)* B) = tr(A* E(B))
            let lhs = (ea.adjoint() * &b).trace();
            let rhs = (a.adjoint() * e(&b)).trace();
            assert!((lhs - rhs).norm() < 1e-9 * (1.0 + lhs.norm()));
            // bimodule: E(ρ(σ) A ρ(τ)) = ρ(σ) E(A) ρ(τ)
            let s = leg_permutation(&perms[1], n).unwrap();
            let t = leg_permutation(perms.last().unwrap(), n).unwrap();
            assert!((e(&(&s * &a * &t)) - &s * &ea * &t).norm() < 1e-9);
        }
        let op = TensorOperand::identity(2, 3);
        assert!(matches!(conditional_expectation_sd(&op, 3), Err(Error::IllConditioned(_))));
    }

    #[test]
    fn group_algebra_route_matches_dense() {
        let n = 3;
        let d = 2;
        let mut rng = RngStream::new(12, 0).rng();
        let ws: Vec<CMatrix> = (0..3).map(|_| sample_ginibre(n, &mut rng)).collect();
        let dense_e = |m: CMatrix| {
            conditional_expectation_sd(&TensorOperand::dense(n, d, m).unwrap(), d).unwrap()
        };
        let power = |w: &CMatrix| TensorOperand::Factored(vec![w.clone(); d]).to_dense().unwrap();
        let fast = tensor_power_expectation(&ws[0], d).unwrap();
        let slow = dense_e(power(&ws[0])).coefficients;
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-12);
        }
        // E(a1 a2 a3) with a_i = W_i^{⊗d} − E(W_i^{⊗d}), dense oracle
        let centered: Vec<CMatrix> = ws.iter().map(|w| power(w) - dense_e(power(w)).to_dense().unwrap()).collect();
        let product = &centered[0] * &centered[1] * &centered[2];
        let slow = dense_e(product).coefficients;
        let fast = centered_product_expectation(&ws, d).unwrap();
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-10, "{} vs {}", a, b);
        }
        // E(x x*) does not vanish, unlike the alternating product
        let u = sample_haar_unitary(16, &mut rng);
        let xx = centered_product_expectation(&[u.clone(), u.adjoint()], d).unwrap();
        assert!(xx.iter().map(|c| c.norm()).sum::<f64>() > 0.5);
    }

    #[test]
    fn amalgamation_probe_decreases() {
        let values: Vec<f64> =
            [8, 16, 32].iter().map(|&n| amalgamation_probe(2, n, 100, RngStream::new(13, n as u64)).unwrap()).collect();
        assert!(values[0] > values[1] && values[1] > values[2], "{:?}", values);
    }
}
