//! The overdetermined coefficient recursion behind the polynomial ansatz.
//!
//! Writing an eigenfunction candidate as `p(X_2) exp(-W)` with
//! `p = sum_m a_m X_2^m`, the eigenvalue equation turns into a linear
//! recurrence on the `a_m` whose row `m` reads
//!
//! ```text
//! -(m+2)(m+1) C_1^2 a_(m+2)
//!   + sum_{n=0}^{N-3} 2 C_(N-1-n)/(n! C_1^(N-3)) (m-n+1) a_(m-n+1)
//!   + sum_{n=0}^{N-4} (1+alpha)/n! C_(N-2-n)/C_1^(N-3) a_(m-n)
//!   + (2m - N + 3 + alpha(N-1))/((N-1)! C_1^(N-3)) a_(m-N+2)
//!   - E a_m = 0
//! ```
//!
//! for `m = 0..M+N-2`, with `a_k = 0` outside `0..=M`. The quantization
//! `alpha = -1 - 2M/(N-1)` makes the coefficient of `a_(m-N+2)` equal to
//! `2(m-N+2-M)/((N-1)! C_1^(N-3))`, so the top row truncates and rows
//! `N-2..=M+N-2` determine `a_(M-1)..a_0` downward from `a_M = 1`. The
//! `N-2` leftover rows `m = 0..N-3` are the solvability conditions on
//! `(E, C_2..C_(N-1))` that the solvers consume.
//!
//! Coefficients `a_m` depend polynomially on `E`, so the downward solve is
//! carried out once over polynomials in `E`; scalar results are evaluations.

use crate::group::CasimirSet;
use crate::poly::Poly;
use crate::{factorial, BetaVector, QesError, Result};
use serde::{Deserialize, Serialize};

/// A quasi-exactly solvable problem statement: dimension N, block size
/// M+1, coupling alpha, and the representation labels with their Casimirs.
#[derive(Clone, Debug)]
pub struct QesProblem {
    pub n: usize,
    pub m: usize,
    pub alpha: f64,
    pub betas: BetaVector,
    pub casimirs: CasimirSet,
}

impl QesProblem {
    /// Problem with quantized `alpha = -1 - 2M/(N-1)`, `N >= 3`.
    pub fn from_betas(n: usize, m: usize, betas: BetaVector) -> Result<Self> {
        if betas.n() != n {
            return Err(QesError::DimensionMismatch(format!(
                "beta vector of length {} for dimension {n}",
                betas.n()
            )));
        }
        if betas.get(1) <= 0.0 {
            return Err(QesError::InvalidParameter(
                "beta_1 must be positive for a normalizable ground form".into(),
            ));
        }
        let alpha = alpha_for(n, m)?;
        let casimirs = crate::group::casimir_set(&betas);
        Ok(QesProblem { n, m, alpha, betas, casimirs })
    }

    /// Harmonic problem (N = 2) with a freely chosen alpha.
    pub fn harmonic(m: usize, alpha: f64, betas: BetaVector) -> Result<Self> {
        if betas.n() != 2 {
            return Err(QesError::DimensionMismatch(
                "harmonic problems take beta vectors of length 2".into(),
            ));
        }
        if betas.get(1) <= 0.0 {
            return Err(QesError::InvalidParameter("beta_1 must be positive".into()));
        }
        let casimirs = crate::group::casimir_set(&betas);
        Ok(QesProblem { n: 2, m, alpha, betas, casimirs })
    }

    /// Residual of a candidate `(E, a)` against this problem's rows.
    pub fn residual(&self, e: f64, a: &CoefficientVector) -> Result<ResidualVector> {
        residual_vector(self.n, self.m, self.alpha, &self.casimirs, e, a)
    }
}

/// Ansatz coefficients `a_0..a_M` in the `X_2` power basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientVector(pub Vec<f64>);

impl CoefficientVector {
    /// Block order M (the vector has M+1 entries).
    pub fn order(&self) -> usize {
        self.0.len() - 1
    }

    /// `a_k`, zero outside the stored range.
    pub fn get(&self, k: isize) -> f64 {
        if k < 0 {
            return 0.0;
        }
        self.0.get(k as usize).copied().unwrap_or(0.0)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Row residuals of the recursion, kept both in raw form and multiplied by
/// the conditioning factor `(N-1)! C_1^(N-3)`.
///
/// Tolerance checks divide each scaled row by the magnitude of its largest
/// contributing term (floored at 1), so a row only counts as zero when it
/// cancels relative to what it sums.
#[derive(Clone, Debug)]
pub struct ResidualVector {
    entries: Vec<f64>,
    scaled: Vec<f64>,
    row_scale: Vec<f64>,
}

impl ResidualVector {
    /// Raw row values, row `m` at index `m`.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    /// Largest conditioned row magnitude; the solvers compare this against
    /// the residual tolerance.
    pub fn max_scaled(&self) -> f64 {
        self.scaled
            .iter()
            .zip(self.row_scale.iter())
            .fold(0.0, |m, (r, s)| m.max(r.abs() / s))
    }

    pub fn within(&self, tol: f64) -> bool {
        self.max_scaled() <= tol
    }
}

/// Quantized coupling `alpha = -1 - 2M/(N-1)` for `N >= 3`.
pub fn alpha_for(n: usize, m: usize) -> Result<f64> {
    if n < 3 {
        return Err(QesError::Unsupported(
            "alpha quantization needs N >= 3; harmonic alpha is a free parameter".into(),
        ));
    }
    Ok(-1.0 - 2.0 * m as f64 / (n as f64 - 1.0))
}

/// The quantized alpha together with the top-coefficient rule: the returned
/// factor `f` fixes `a_(M-1) = f * E * a_M`, which is `-1` for N = 3 and `0`
/// for every larger N.
pub fn alpha_and_top_rule(n: usize, m: usize) -> Result<(f64, f64)> {
    let alpha = alpha_for(n, m)?;
    Ok((alpha, if n == 3 { -1.0 } else { 0.0 }))
}

/// Conditioning factor `(N-1)! C_1^(N-3)` relating raw rows to the form the
/// catalogued recursions are quoted in.
pub fn row_norm_factor(n: usize, c1: f64) -> f64 {
    factorial(n - 1) * c1.powi(n as i32 - 3)
}

/// Evaluate all rows `m = 0..M+N-2` for a candidate `(E, a)`.
pub fn residual_vector(
    n: usize,
    m: usize,
    alpha: f64,
    c: &CasimirSet,
    e: f64,
    a: &CoefficientVector,
) -> Result<ResidualVector> {
    if n < 2 {
        return Err(QesError::Unsupported("recursion needs N >= 2".into()));
    }
    if c.n() != n {
        return Err(QesError::DimensionMismatch(format!(
            "Casimir set of dimension {} against N = {n}",
            c.n()
        )));
    }
    if a.order() != m {
        return Err(QesError::DimensionMismatch(format!(
            "coefficient vector of order {} against M = {m}",
            a.order()
        )));
    }
    let c1 = c.c1();
    let inv_pow = c1.powi(-(n as i32 - 3));
    let norm = row_norm_factor(n, c1);
    let rows = m + n - 1;
    let mut entries = Vec::with_capacity(rows);
    let mut scaled = Vec::with_capacity(rows);
    let mut row_scale = Vec::with_capacity(rows);
    for row in 0..rows {
        let mi = row as isize;
        let mut acc = 0.0;
        let mut peak: f64 = 1.0;
        let mut push = |acc: &mut f64, term: f64| {
            *acc += term;
            peak = peak.max((term * norm).abs());
        };
        push(
            &mut acc,
            -((row + 2) as f64) * ((row + 1) as f64) * c1 * c1 * a.get(mi + 2),
        );
        if n >= 3 {
            for k in 0..=(n - 3) {
                let term = 2.0 * c.get(n - 1 - k) / factorial(k) * inv_pow
                    * (mi - k as isize + 1) as f64
                    * a.get(mi - k as isize + 1);
                push(&mut acc, term);
            }
        }
        if n >= 4 {
            for k in 0..=(n - 4) {
                let term = (1.0 + alpha) / factorial(k) * c.get(n - 2 - k) * inv_pow
                    * a.get(mi - k as isize);
                push(&mut acc, term);
            }
        }
        push(
            &mut acc,
            (2.0 * row as f64 - n as f64 + 3.0 + alpha * (n as f64 - 1.0)) / norm
                * a.get(mi - n as isize + 2),
        );
        push(&mut acc, -e * a.get(mi));
        entries.push(acc);
        scaled.push(acc * norm);
        row_scale.push(peak);
    }
    Ok(ResidualVector { entries, scaled, row_scale })
}

/// Harmonic (N = 2) rows `(m+2)(m+1) beta_1^2 a_(m+2) - ((2m+1+alpha) beta_1 - E) a_m`.
///
/// These are the N = 2 evaluations of the general rows with the overall
/// sign flipped; both vanish on the same candidates.
pub fn residual_vector_harmonic(
    beta1: f64,
    alpha: f64,
    e: f64,
    a: &CoefficientVector,
) -> ResidualVector {
    let m = a.order();
    let mut entries = Vec::with_capacity(m + 1);
    let mut row_scale = Vec::with_capacity(m + 1);
    for row in 0..=m {
        let mi = row as isize;
        let t1 = (row + 2) as f64 * (row + 1) as f64 * beta1 * beta1 * a.get(mi + 2);
        let t2 = -((2.0 * row as f64 + 1.0 + alpha) * beta1 - e) * a.get(mi);
        entries.push(t1 + t2);
        row_scale.push(1.0f64.max(t1.abs()).max(t2.abs()));
    }
    ResidualVector {
        scaled: entries.clone(),
        entries,
        row_scale,
    }
}

/// Row `m` of the recursion over polynomials in `E`; `a[k]` holds the
/// polynomial for `a_k` and indices outside the slice are zero.
fn row_poly(n: usize, row: usize, alpha: f64, c: &CasimirSet, a: &[Poly]) -> Poly {
    let c1 = c.c1();
    let inv_pow = c1.powi(-(n as i32 - 3));
    let norm = row_norm_factor(n, c1);
    let get = |k: isize| -> Poly {
        if k < 0 || k as usize >= a.len() {
            Poly::zero()
        } else {
            a[k as usize].clone()
        }
    };
    let mi = row as isize;
    let mut acc = get(mi + 2).scale(-((row + 2) as f64) * ((row + 1) as f64) * c1 * c1);
    if n >= 3 {
        for k in 0..=(n - 3) {
            let coeff = 2.0 * c.get(n - 1 - k) / factorial(k) * inv_pow
                * (mi - k as isize + 1) as f64;
            acc = acc.add(&get(mi - k as isize + 1).scale(coeff));
        }
    }
    if n >= 4 {
        for k in 0..=(n - 4) {
            let coeff = (1.0 + alpha) / factorial(k) * c.get(n - 2 - k) * inv_pow;
            acc = acc.add(&get(mi - k as isize).scale(coeff));
        }
    }
    let top = (2.0 * row as f64 - n as f64 + 3.0 + alpha * (n as f64 - 1.0)) / norm;
    acc = acc.add(&get(mi - n as isize + 2).scale(top));
    // the -E a_m term: multiply a_m by the monomial E
    acc.sub(&get(mi).mul_x())
}

/// Solve rows `N-2..=M+N-2` downward for `a_(M-1)..a_0` as polynomials in
/// `E`, normalized to `a_M = 1`. Requires `N >= 3`.
pub fn downward_coeff_polys(n: usize, m: usize, c: &CasimirSet) -> Result<Vec<Poly>> {
    let alpha = alpha_for(n, m)?;
    if c.n() != n {
        return Err(QesError::DimensionMismatch(format!(
            "Casimir set of dimension {} against N = {n}",
            c.n()
        )));
    }
    let norm = row_norm_factor(n, c.c1());
    let mut a = vec![Poly::zero(); m + 1];
    a[m] = Poly::constant(1.0);
    for k in (0..m).rev() {
        let row = k + n - 2;
        // row value with a_k still zero, then divide by a_k's coefficient
        let r = row_poly(n, row, alpha, c, &a);
        let w = 2.0 * (k as f64 - m as f64) / norm;
        a[k] = r.scale(-1.0 / w);
    }
    Ok(a)
}

/// Scalar downward solve: the polynomials of [`downward_coeff_polys`]
/// evaluated at `E = e`.
pub fn downward_recursion(n: usize, m: usize, c: &CasimirSet, e: f64) -> Result<CoefficientVector> {
    let polys = downward_coeff_polys(n, m, c)?;
    Ok(CoefficientVector(polys.iter().map(|p| p.eval(e)).collect()))
}

/// The leftover rows `m = 0..N-3` after the downward solve, multiplied by
/// the conditioning factor, as polynomials in `E`. Their common real zeros
/// are the block's eigenvalues at the given Casimirs.
pub fn leftover_rows_poly(n: usize, m: usize, c: &CasimirSet) -> Result<Vec<Poly>> {
    let alpha = alpha_for(n, m)?;
    let a = downward_coeff_polys(n, m, c)?;
    let norm = row_norm_factor(n, c.c1());
    Ok((0..n - 2)
        .map(|row| row_poly(n, row, alpha, c, &a).scale(norm))
        .collect())
}

/// Leftover rows evaluated at `E = e` (conditioned normalization).
pub fn leftover_residuals(n: usize, m: usize, c: &CasimirSet, e: f64) -> Result<Vec<f64>> {
    Ok(leftover_rows_poly(n, m, c)?
        .iter()
        .map(|p| p.eval(e))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::CasimirSet;
    use approx::assert_abs_diff_eq;

    fn cs(n: usize, c: &[f64]) -> CasimirSet {
        CasimirSet::from_values(n, c.to_vec()).unwrap()
    }

    #[test]
    fn alpha_quantization_values() {
        assert_abs_diff_eq!(alpha_for(4, 0).unwrap(), -1.0);
        assert_abs_diff_eq!(alpha_for(4, 1).unwrap(), -5.0 / 3.0);
        assert_abs_diff_eq!(alpha_for(4, 2).unwrap(), -7.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(alpha_for(5, 3).unwrap(), -2.5);
        assert_abs_diff_eq!(alpha_for(3, 2).unwrap(), -3.0);
        assert!(alpha_for(2, 1).is_err());
    }

    #[test]
    fn top_rule_distinguishes_n_three() {
        assert_abs_diff_eq!(alpha_and_top_rule(3, 4).unwrap().1, -1.0);
        assert_abs_diff_eq!(alpha_and_top_rule(4, 4).unwrap().1, 0.0);
        // N = 3 downward solve realizes a_(M-1) = -E a_M
        let c = cs(3, &[1.3, 0.4]);
        let a = downward_recursion(3, 3, &c, 0.7).unwrap();
        assert_abs_diff_eq!(a.get(2), -0.7, epsilon = 1e-12);
    }

    /// Rows for N = 4, multiplied by 6 C_1, against the quoted form
    /// -6(m+2)(m+1)C1^3 a_(m+2) + 12(m+1)C3 a_(m+1)
    ///   + 6[(2m+1+alpha)C2 - C1 E] a_m + (3 alpha + 2m - 1) a_(m-2).
    #[test]
    fn rows_match_quoted_sextic_form() {
        let c = cs(4, &[1.7, -0.9, 0.6]);
        let (c1, c2, c3) = (1.7, -0.9, 0.6);
        let m = 3;
        let alpha = alpha_for(4, m).unwrap();
        let a = CoefficientVector(vec![0.3, -1.2, 0.8, 1.0]);
        let e = 0.45;
        let r = residual_vector(4, m, alpha, &c, e, &a).unwrap();
        let norm = row_norm_factor(4, c1);
        for row in 0..r.len() {
            let mi = row as isize;
            let want = -6.0 * ((row + 2) * (row + 1)) as f64 * c1.powi(3) * a.get(mi + 2)
                + 12.0 * (row + 1) as f64 * c3 * a.get(mi + 1)
                + 6.0 * ((2.0 * row as f64 + 1.0 + alpha) * c2 - c1 * e) * a.get(mi)
                + (3.0 * alpha + 2.0 * row as f64 - 1.0) * a.get(mi - 2);
            assert_abs_diff_eq!(r.entries()[row] * norm, want, epsilon = 1e-10);
        }
    }

    /// Rows for N = 5, multiplied by 12 C_1^2:
    /// -12(m+2)(m+1)C1^4 a_(m+2) + 24(m+1)C4 a_(m+1)
    ///   + 12[(2m+1+alpha)C3 - C1^2 E] a_m + 12(m+alpha)C2 a_(m-1)
    ///   + (m - 1 + 2 alpha) a_(m-3).
    #[test]
    fn rows_match_quoted_octic_form() {
        let c = cs(5, &[0.8, 1.1, -0.5, 0.9]);
        let (c1, c2, c3, c4): (f64, f64, f64, f64) = (0.8, 1.1, -0.5, 0.9);
        let m = 2;
        let alpha = alpha_for(5, m).unwrap();
        let a = CoefficientVector(vec![-0.4, 0.9, 1.0]);
        let e = -0.3;
        let r = residual_vector(5, m, alpha, &c, e, &a).unwrap();
        // the quoted N = 5 rows carry 12 C_1^2, half the conditioning factor
        let norm = 12.0 * c1 * c1;
        for row in 0..r.len() {
            let mi = row as isize;
            let want = -12.0 * ((row + 2) * (row + 1)) as f64 * c1.powi(4) * a.get(mi + 2)
                + 24.0 * (row + 1) as f64 * c4 * a.get(mi + 1)
                + 12.0 * ((2.0 * row as f64 + 1.0 + alpha) * c3 - c1 * c1 * e) * a.get(mi)
                + 12.0 * (row as f64 + alpha) * c2 * a.get(mi - 1)
                + (row as f64 - 1.0 + 2.0 * alpha) * a.get(mi - 3);
            assert_abs_diff_eq!(r.entries()[row] * norm, want, epsilon = 1e-10);
        }
    }

    /// Rows for N = 6, multiplied by 120 C_1^3:
    /// -120(m+2)(m+1)C1^5 a_(m+2) + 240(m+1)C5 a_(m+1)
    ///   + 120[(2m+1+alpha)C4 - C1^3 E] a_m + 120(m+alpha)C3 a_(m-1)
    ///   + 20(2m-1+3alpha)C2 a_(m-2) + (2m-3+5alpha) a_(m-4).
    #[test]
    fn rows_match_quoted_decatic_form() {
        let c = cs(6, &[0.5, -0.05, 0.2, 0.1187, -0.3]);
        let (c1, c2, c3, c4, c5) = (0.5, -0.05, 0.2, 0.1187, -0.3);
        let m = 4;
        let alpha = alpha_for(6, m).unwrap();
        let a = CoefficientVector(vec![0.05, -0.2, -0.8, 0.4, 1.0]);
        let e = 6.0;
        let r = residual_vector(6, m, alpha, &c, e, &a).unwrap();
        let norm = row_norm_factor(6, c1);
        for row in 0..r.len() {
            let mi = row as isize;
            let mf = row as f64;
            let want = -120.0 * ((row + 2) * (row + 1)) as f64 * c1.powi(5) * a.get(mi + 2)
                + 240.0 * (row + 1) as f64 * c5 * a.get(mi + 1)
                + 120.0 * ((2.0 * mf + 1.0 + alpha) * c4 - c1.powi(3) * e) * a.get(mi)
                + 120.0 * (mf + alpha) * c3 * a.get(mi - 1)
                + 20.0 * (2.0 * mf - 1.0 + 3.0 * alpha) * c2 * a.get(mi - 2)
                + (2.0 * mf - 3.0 + 5.0 * alpha) * a.get(mi - 4);
            assert_abs_diff_eq!(r.entries()[row] * norm, want, epsilon = 1e-10);
        }
    }

    #[test]
    fn harmonic_rows_are_sign_flipped_general_rows() {
        let beta1 = 1.4;
        let c = cs(2, &[beta1]);
        let alpha = -0.6;
        let a = CoefficientVector(vec![0.2, -0.7, 1.0]);
        let e = 1.9;
        let gen = residual_vector(2, 2, alpha, &c, e, &a).unwrap();
        let har = residual_vector_harmonic(beta1, alpha, e, &a);
        assert_eq!(gen.len(), har.len());
        for i in 0..gen.len() {
            assert_abs_diff_eq!(gen.entries()[i], -har.entries()[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn downward_solve_zeroes_its_rows() {
        let c = cs(5, &[0.8, 1.1, -0.5, 0.9]);
        let m = 4;
        let e = 0.37;
        let a = downward_recursion(5, m, &c, e).unwrap();
        assert_abs_diff_eq!(a.get(m as isize), 1.0);
        let alpha = alpha_for(5, m).unwrap();
        let r = residual_vector(5, m, alpha, &c, e, &a).unwrap();
        // rows N-2.. are solved; the leftover rows stay generically nonzero
        for row in 3..r.len() {
            assert!(r.entries()[row].abs() < 1e-10, "row {row}: {}", r.entries()[row]);
        }
        let leftover = leftover_residuals(5, m, &c, e).unwrap();
        assert_eq!(leftover.len(), 3);
        assert!(leftover.iter().any(|x| x.abs() > 1e-6));
    }

    #[test]
    fn downward_solve_forced_coefficients() {
        // N = 4, M = 2: a_1 = 0 and a_0 = 4 C_2 - 1.5 C_1 E at any E.
        let c = cs(4, &[1.7, -0.9, 0.6]);
        let e = 0.23;
        let a = downward_recursion(4, 2, &c, e).unwrap();
        assert_abs_diff_eq!(a.get(1), 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(a.get(0), 4.0 * -0.9 - 1.5 * 1.7 * e, epsilon = 1e-12);
        // N = 5, M = 2: a_1 = 0 and a_0 = 6 C_2 at any E.
        let c = cs(5, &[0.8, 1.1, -0.5, 0.9]);
        let a = downward_recursion(5, 2, &c, 0.77).unwrap();
        assert_abs_diff_eq!(a.get(1), 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(a.get(0), 6.0 * 1.1, epsilon = 1e-12);
        // N = 6, M = 2: a_1 = 0 and a_0 = 8 C_2.
        let c = cs(6, &[0.5, -0.05, 0.0, 0.04, 0.0]);
        let a = downward_recursion(6, 2, &c, -0.4).unwrap();
        assert_abs_diff_eq!(a.get(1), 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(a.get(0), 8.0 * -0.05, epsilon = 1e-12);
    }

    #[test]
    fn coefficient_polys_match_scalar_solve() {
        let c = cs(6, &[0.5, -0.05, 0.2, 0.1, -0.3]);
        let polys = downward_coeff_polys(6, 5, &c).unwrap();
        for e in [-1.3, 0.0, 0.9, 4.2] {
            let a = downward_recursion(6, 5, &c, e).unwrap();
            for (k, p) in polys.iter().enumerate() {
                assert_abs_diff_eq!(p.eval(e), a.get(k as isize), epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn residual_rejects_shape_mismatches() {
        let c = cs(4, &[1.0, 0.5, 0.0]);
        let a = CoefficientVector(vec![1.0, 2.0]);
        assert!(residual_vector(5, 1, -1.5, &c, 0.0, &a).is_err());
        assert!(residual_vector(4, 3, -1.5, &c, 0.0, &a).is_err());
    }
}
