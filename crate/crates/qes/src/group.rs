//! Nilpotent group algebra: elements, generator polynomials, Casimir
//! invariants, the scaling action, and the induced representation.
//!
//! An element is a pair `(a, b)` with `a` real and `b` an N-vector. The
//! product twists the second factor by the upper triangular matrix
//! `A_ij(a) = a^(j-i)/(j-i)!`, which is a one-parameter group in `a`. The
//! representation on wavefunctions acts by `(U_(a,b) phi)(x) =
//! exp(-i beta^T A(x) b) phi(x + a)`, and its generators are the
//! polynomials `X_k(x) = sum_j beta_(k-j) x^j / j!`.

use crate::poly::Poly;
use crate::{factorial, QesError, Result};
use num_complex::Complex64;

/// Group element `(a, b)` with `b` of length N.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    pub a: f64,
    pub b: Vec<f64>,
}

impl GroupElement {
    pub fn new(a: f64, b: Vec<f64>) -> Self {
        GroupElement { a, b }
    }

    pub fn identity(n: usize) -> Self {
        GroupElement {
            a: 0.0,
            b: vec![0.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    /// Group product `(a, b)(a', b') = (a + a', b + A(a) b')`.
    pub fn product(&self, rhs: &GroupElement) -> Result<GroupElement> {
        if self.dim() != rhs.dim() {
            return Err(QesError::DimensionMismatch(format!(
                "group product of dimensions {} and {}",
                self.dim(),
                rhs.dim()
            )));
        }
        let twisted = apply_a(self.a, &rhs.b);
        let b = self
            .b
            .iter()
            .zip(twisted.iter())
            .map(|(x, y)| x + y)
            .collect();
        Ok(GroupElement { a: self.a + rhs.a, b })
    }

    /// Inverse `(-a, -A(-a) b)`.
    pub fn inverse(&self) -> GroupElement {
        let b = apply_a(-self.a, &self.b).iter().map(|x| -x).collect();
        GroupElement { a: -self.a, b }
    }
}

/// The matrix `A_ij(a) = a^(j-i)/(j-i)!` for `i <= j`, zero below the
/// diagonal (indices here are 0-based, the shape is n x n).
pub fn matrix_a(a: f64, n: usize) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for (j, row) in m[i].iter_mut().enumerate().skip(i) {
            *row = a.powi((j - i) as i32) / factorial(j - i);
        }
    }
    m
}

/// `A(a) v` without materializing the matrix.
fn apply_a(a: f64, v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| {
            (i..n)
                .map(|j| a.powi((j - i) as i32) / factorial(j - i) * v[j])
                .sum()
        })
        .collect()
}

/// Representation labels `beta_1..beta_N`, stored 1-based through [`BetaVector::get`].
///
/// `beta_1` must be nonzero; the solvers additionally require `beta_1 > 0`
/// for a normalizable ground form. The mirrored labels produced by
/// [`crate::symmetry::tilde_betas`] flip the sign of `beta_1` when N is odd,
/// which is why the weaker invariant lives here.
#[derive(Clone, Debug, PartialEq)]
pub struct BetaVector {
    beta: Vec<f64>,
}

impl BetaVector {
    pub fn new(beta: Vec<f64>) -> Result<Self> {
        if beta.len() < 2 {
            return Err(QesError::InvalidParameter(
                "beta vector needs at least two components".into(),
            ));
        }
        if beta.iter().any(|b| !b.is_finite()) {
            return Err(QesError::InvalidParameter(
                "beta components must be finite".into(),
            ));
        }
        if beta[0] == 0.0 {
            return Err(QesError::InvalidParameter("beta_1 must be nonzero".into()));
        }
        Ok(BetaVector { beta })
    }

    /// Group dimension N.
    pub fn n(&self) -> usize {
        self.beta.len()
    }

    /// `beta_k`, 1-based.
    pub fn get(&self, k: usize) -> f64 {
        self.beta[k - 1]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.beta
    }
}

/// Generator polynomial `X_k(x) = sum_{j=0}^{k-1} beta_(k-j) x^j / j!`.
#[derive(Clone, Debug)]
pub struct GeneratorPoly {
    pub k: usize,
    pub poly: Poly,
}

impl GeneratorPoly {
    pub fn eval(&self, x: f64) -> f64 {
        self.poly.eval(x)
    }
}

/// Build `X_k` for `k = 1..=N`. The chain rule `d X_k / dx = X_(k-1)`
/// holds coefficient-wise down to `X_1 = beta_1`.
pub fn generator_poly(k: usize, betas: &BetaVector) -> Result<GeneratorPoly> {
    let n = betas.n();
    if k == 0 || k > n {
        return Err(QesError::IndexOutOfRange(format!(
            "generator index {k} for dimension {n}"
        )));
    }
    let coeffs: Vec<f64> = (0..k).map(|j| betas.get(k - j) / factorial(j)).collect();
    Ok(GeneratorPoly {
        k,
        poly: Poly::new(coeffs),
    })
}

/// Casimir invariant `C_k`, `k = 1..=N-1`.
///
/// `C_1 = beta_1` and for `k >= 2`
/// `C_k = sum_{n=0}^{k-2} (-1)^n/n! beta_1^(k-1-n) beta_2^n beta_(k+1-n)
///        + (-1)^(k-1)/(k-1)! * (k-1)/k * beta_2^k`.
pub fn casimir(k: usize, betas: &BetaVector) -> Result<f64> {
    let n = betas.n();
    if k == 0 || k >= n {
        return Err(QesError::IndexOutOfRange(format!(
            "Casimir index {k} for dimension {n}"
        )));
    }
    if k == 1 {
        return Ok(betas.get(1));
    }
    let b1 = betas.get(1);
    let b2 = betas.get(2);
    let mut acc = 0.0;
    for m in 0..=(k - 2) {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign / factorial(m) * b1.powi((k - 1 - m) as i32) * b2.powi(m as i32)
            * betas.get(k + 1 - m);
    }
    let sign = if (k - 1) % 2 == 0 { 1.0 } else { -1.0 };
    acc += sign / factorial(k - 1) * ((k - 1) as f64 / k as f64) * b2.powi(k as i32);
    Ok(acc)
}

/// The invariants `C_1..C_(N-1)` of a dimension-N label set.
#[derive(Clone, Debug, PartialEq)]
pub struct CasimirSet {
    n: usize,
    c: Vec<f64>,
}

impl CasimirSet {
    /// Build directly from values `C_1..C_(N-1)`; `C_1` must be nonzero.
    pub fn from_values(n: usize, c: Vec<f64>) -> Result<Self> {
        if n < 2 || c.len() != n - 1 {
            return Err(QesError::DimensionMismatch(format!(
                "expected {} Casimir values for dimension {n}, got {}",
                n.saturating_sub(1),
                c.len()
            )));
        }
        if c[0] == 0.0 || c.iter().any(|x| !x.is_finite()) {
            return Err(QesError::InvalidParameter(
                "C_1 must be nonzero and all Casimirs finite".into(),
            ));
        }
        Ok(CasimirSet { n, c })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `C_k`, 1-based, `k <= N-1`.
    pub fn get(&self, k: usize) -> f64 {
        self.c[k - 1]
    }

    pub fn c1(&self) -> f64 {
        self.c[0]
    }

    pub fn values(&self) -> &[f64] {
        &self.c
    }
}

/// All Casimirs of a label set.
pub fn casimir_set(betas: &BetaVector) -> CasimirSet {
    let n = betas.n();
    let c = (1..n).map(|k| casimir(k, betas).unwrap()).collect();
    CasimirSet { n, c }
}

/// Coefficients of the re-expression
/// `C_1^(k-2) X_k = sum_{n=0}^{k-3} C_(k-1-n)/n! X_2^n + X_2^(k-1)/(k-1)!`.
///
/// Returns `(scale, q)` with `scale = C_1^(k-2)` and `q[j]` the coefficient
/// of `X_2^j`. Valid for `k = 2..=N`; `k = N` needs only `C_(N-1)` and is
/// covered by the same telescoping, guarded here by the nonzero-`C_1`
/// invariant of [`CasimirSet`].
pub fn reexpress_coeffs(k: usize, c: &CasimirSet) -> Result<(f64, Vec<f64>)> {
    let n = c.n();
    if k < 2 || k > n {
        return Err(QesError::IndexOutOfRange(format!(
            "re-expression index {k} for dimension {n}"
        )));
    }
    let mut q = vec![0.0; k];
    for j in 0..=(k.saturating_sub(3)) {
        if k >= 3 {
            q[j] = c.get(k - 1 - j) / factorial(j);
        }
    }
    q[k - 1] = 1.0 / factorial(k - 1);
    Ok((c.c1().powi(k as i32 - 2), q))
}

/// Scaling action `beta_k -> t^(N+1-k) beta_k`, `t > 0`.
///
/// Casimirs transform as `C_1 -> t^N C_1` and `C_k -> t^(k(N-1)) C_k` for
/// `k >= 2`; energies of the associated Hamiltonians scale by `t^2`.
pub fn scale_betas(t: f64, betas: &BetaVector) -> Result<BetaVector> {
    if !(t.is_finite() && t > 0.0) {
        return Err(QesError::InvalidParameter(format!(
            "scale parameter must be positive, got {t}"
        )));
    }
    let n = betas.n();
    let beta = (1..=n)
        .map(|k| t.powi((n + 1 - k) as i32) * betas.get(k))
        .collect();
    BetaVector::new(beta)
}

/// Apply the induced representation:
/// `(U_(a,b) phi)(x) = exp(-i beta^T A(x) b) phi(x + a)`.
pub fn representation_apply<F>(
    g: &GroupElement,
    betas: &BetaVector,
    phi: F,
    x: f64,
) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    let n = betas.n();
    if g.dim() != n {
        return Err(QesError::DimensionMismatch(format!(
            "element dimension {} vs label dimension {n}",
            g.dim()
        )));
    }
    let ab = apply_a(x, &g.b);
    let phase: f64 = (0..n).map(|i| betas.get(i + 1) * ab[i]).sum();
    Ok(Complex64::new(0.0, -phase).exp() * phi(x + g.a))
}
