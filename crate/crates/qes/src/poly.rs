//! Dense univariate polynomials with f64 coefficients, constant term first.
//!
//! Degrees stay tiny here (at most a few times the group dimension), so a
//! plain coefficient vector is the right representation. Roots are taken
//! from the eigenvalues of the companion matrix.

use nalgebra::DMatrix;

/// Polynomial `c[0] + c[1] x + c[2] x^2 + ...`. Trailing zeros are trimmed,
/// the zero polynomial is the empty vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Poly::new(vec![c])
    }

    /// `c x^k`.
    pub fn monomial(c: f64, k: usize) -> Self {
        let mut v = vec![0.0; k + 1];
        v[k] = c;
        Poly::new(v)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `x^k` (0 beyond the stored degree).
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    /// Degree, with the convention `deg 0 = 0` for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// True when every coefficient is below `tol` in magnitude.
    pub fn is_negligible(&self, tol: f64) -> bool {
        self.coeffs.iter().all(|c| c.abs() <= tol)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        let d: Vec<f64> = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| k as f64 * c)
            .collect();
        Poly::new(d)
    }

    /// Antiderivative with zero constant term.
    pub fn antiderivative(&self) -> Poly {
        let mut v = vec![0.0];
        v.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| c / (k as f64 + 1.0)),
        );
        Poly::new(v)
    }

    pub fn add(&self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut v = vec![0.0; n];
        for (k, slot) in v.iter_mut().enumerate() {
            *slot = self.coeff(k) + rhs.coeff(k);
        }
        Poly::new(v)
    }

    pub fn sub(&self, rhs: &Poly) -> Poly {
        self.add(&rhs.scale(-1.0))
    }

    pub fn scale(&self, c: f64) -> Poly {
        Poly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn mul(&self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut v = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        Poly::new(v)
    }

    /// Multiply by `x` (degree shift by one).
    pub fn mul_x(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut v = vec![0.0];
        v.extend_from_slice(&self.coeffs);
        Poly::new(v)
    }

    /// `p(c0 + c1 t)` as a polynomial in `t`, by Horner over polynomials.
    pub fn compose_affine(&self, c0: f64, c1: f64) -> Poly {
        let inner = Poly::new(vec![c0, c1]);
        let mut acc = Poly::zero();
        for &c in self.coeffs.iter().rev() {
            acc = acc.mul(&inner).add(&Poly::constant(c));
        }
        acc
    }

    /// Real roots from the companion matrix, unsorted in no guaranteed order.
    ///
    /// Leading coefficients smaller than `lead_tol` times the largest
    /// coefficient are treated as zero before forming the companion matrix;
    /// eigenvalues with relative imaginary part above 1e-8 are discarded.
    pub fn real_roots(&self, lead_tol: f64) -> Vec<f64> {
        let max_c = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if max_c == 0.0 {
            return Vec::new();
        }
        let mut c = self.coeffs.clone();
        while c.last().is_some_and(|l| l.abs() <= lead_tol * max_c) {
            c.pop();
        }
        let d = c.len().saturating_sub(1);
        if d == 0 {
            return Vec::new();
        }
        let lead = c[d];
        let mut comp = DMatrix::<f64>::zeros(d, d);
        for i in 1..d {
            comp[(i, i - 1)] = 1.0;
        }
        for i in 0..d {
            comp[(i, d - 1)] = -c[i] / lead;
        }
        let eigs = comp.complex_eigenvalues();
        let mut roots: Vec<f64> = eigs
            .iter()
            .filter(|z| z.im.abs() <= 1e-8 * (1.0 + z.re.abs()))
            .map(|z| z.re)
            .collect();
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        roots
    }
}
