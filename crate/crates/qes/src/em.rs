//! Charged-particle problems in three dimensions that reduce to the
//! one-dimensional polynomial wells.
//!
//! Replacing the top label `beta_N` by the momentum operator conjugate to a
//! second coordinate `y` turns the algebra representation reducible and the
//! Hamiltonian `X_0^2 + X_N^2 + alpha X_(N-1)` into that of a charged
//! particle in the static fields
//!
//! `E = (-alpha X_(N-2)(x), 0, 0)`, `B = (0, 0, X_(N-1)(x))`,
//!
//! with a free motion added in `z`. The fields are perpendicular, and the
//! electric profile is proportional to the derivative of the magnetic one
//! because of the generator chain `X_k' = X_(k-1)`. A simultaneous
//! eigenfunction of the momenta,
//! `Phi(x, y, z) = e^(i p_y y + i p_z z) psi(x) / (2 pi)`,
//! turns the 3-D eigenvalue problem at energy `script E` into the 1-D well
//! problem with labels `(beta_1, ..., beta_(N-1), beta_N = -p_y)` at energy
//! `E = script E - p_z^2`. For `N = 2` this is the textbook constant
//! magnetic field reduced to a shifted oscillator.

use crate::group::{generator_poly, BetaVector};
use crate::oracle::{self, wavefunction_eval};
use crate::poly::Poly;
use crate::recursion::QesProblem;
use crate::solver::QesSolution;
use crate::{QesError, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// A 3-D field problem built on the labels `beta_1 .. beta_(N-1)`; the top
/// label is carried by the transverse momentum `p_y` instead.
#[derive(Clone, Debug)]
pub struct EmProblem {
    pub n: usize,
    pub alpha: f64,
    betas_head: Vec<f64>,
    pub p_y: f64,
    pub p_z: f64,
}

impl EmProblem {
    /// `betas_head` holds `beta_1 .. beta_(N-1)`; `beta_1 > 0` keeps the
    /// reduced well confining.
    pub fn new(n: usize, alpha: f64, betas_head: Vec<f64>, p_y: f64, p_z: f64) -> Result<Self> {
        if n < 2 {
            return Err(QesError::Unsupported(
                "field problems need a representation of dimension at least 2".into(),
            ));
        }
        if betas_head.len() != n - 1 {
            return Err(QesError::DimensionMismatch(format!(
                "expected beta_1..beta_{} ({} values), got {}",
                n - 1,
                n - 1,
                betas_head.len()
            )));
        }
        if betas_head.iter().any(|b| !b.is_finite())
            || !alpha.is_finite()
            || !p_y.is_finite()
            || !p_z.is_finite()
        {
            return Err(QesError::InvalidParameter(
                "field parameters must be finite".into(),
            ));
        }
        if betas_head[0] <= 0.0 {
            return Err(QesError::InvalidParameter(
                "beta_1 must be positive for a confining reduction".into(),
            ));
        }
        Ok(EmProblem { n, alpha, betas_head, p_y, p_z })
    }

    /// `beta_1 .. beta_(N-1)`.
    pub fn betas_head(&self) -> &[f64] {
        &self.betas_head
    }

    /// The labels of the reduced 1-D problem: the head with `beta_N = -p_y`
    /// appended. Each transverse momentum selects a different representation.
    pub fn full_labels(&self) -> BetaVector {
        let mut b = self.betas_head.clone();
        b.push(-self.p_y);
        BetaVector::new(b).expect("head was validated at construction")
    }
}

/// `(E, B)` field vectors at `x`.
///
/// The electric field vanishes identically for `N = 2`, where the potential
/// term is the constant `alpha beta_1` and only the uniform magnetic field
/// remains.
pub fn em_fields(x: f64, prob: &EmProblem) -> ([f64; 3], [f64; 3]) {
    let full = prob.full_labels();
    let b_z = generator_poly(prob.n - 1, &full)
        .expect("dimension checked at construction")
        .poly
        .eval(x);
    let e_x = if prob.n >= 3 {
        -prob.alpha
            * generator_poly(prob.n - 2, &full)
                .expect("dimension checked at construction")
                .poly
                .eval(x)
    } else {
        0.0
    };
    ([e_x, 0.0, 0.0], [0.0, 0.0, b_z])
}

/// The 1-D well problem seen by the Fourier mode `(p_y, p_z)` at 3-D energy
/// `script_e`, together with its 1-D eigenvalue `E = script_e - p_z^2`.
///
/// For `N >= 3` the block order is read off the quantized coupling; a
/// coupling off the ladder `alpha = -1 - 2M/(N-1)` has no polynomial block
/// and is rejected. The harmonic case keeps its free coupling and reduces to
/// the order-0 problem (every order is solvable there).
pub fn reduce_to_1d(prob: &EmProblem, script_e: f64) -> Result<(QesProblem, f64)> {
    let full = prob.full_labels();
    let e = script_e - prob.p_z * prob.p_z;
    if prob.n == 2 {
        return Ok((QesProblem::harmonic(0, prob.alpha, full)?, e));
    }
    let m_real = -(1.0 + prob.alpha) * (prob.n as f64 - 1.0) / 2.0;
    let m = m_real.round();
    if m < 0.0 || (m_real - m).abs() > 1e-9 {
        return Err(QesError::InvalidParameter(format!(
            "coupling {} is off the quantized ladder alpha = -1 - 2M/(N-1)",
            prob.alpha
        )));
    }
    let qp = QesProblem::from_betas(prob.n, m as usize, full)?;
    if (qp.alpha - prob.alpha).abs() > 1e-9 {
        return Err(QesError::InvalidParameter(
            "coupling does not reproduce an integer block order".into(),
        ));
    }
    Ok((qp, e))
}

/// The 3-D energy recovered from a 1-D eigenvalue: `script E = E + p_z^2`.
pub fn lift_energy(e: f64, p_z: f64) -> f64 {
    e + p_z * p_z
}

fn check_reduced_labels(prob: &EmProblem, sol: &QesSolution) -> Result<BetaVector> {
    let want = prob.full_labels();
    let got = sol.betas.as_ref().ok_or_else(|| {
        QesError::InvalidParameter(
            "attach concrete labels to the 1-D solution before lifting it".into(),
        )
    })?;
    let close = got.n() == want.n()
        && (1..=want.n()).all(|k| {
            (got.get(k) - want.get(k)).abs() <= 1e-12 * (1.0 + want.get(k).abs())
        });
    if !close {
        return Err(QesError::InvalidParameter(
            "solution labels do not match the reduction (beta_N must equal -p_y)".into(),
        ));
    }
    Ok(want)
}

/// The simultaneous eigenfunction of the Hamiltonian and both transverse
/// momenta: `e^(i p_y y + i p_z z) psi(x) / (2 pi)`.
///
/// The 1-D solution must carry exactly the labels of [`reduce_to_1d`];
/// anything else belongs to a different Fourier mode.
pub fn plane_wave_eigenfunction(
    prob: &EmProblem,
    sol: &QesSolution,
    x: f64,
    y: f64,
    z: f64,
) -> Result<Complex64> {
    check_reduced_labels(prob, sol)?;
    let phase = Complex64::new(0.0, prob.p_y * y + prob.p_z * z).exp();
    Ok(phase * wavefunction_eval(x, sol)? / (2.0 * PI))
}

/// Pointwise defect of the 3-D eigenvalue equation on a plane-wave mode,
/// `max |(H - script E) Phi| / max |Phi|` over the sample abscissas.
///
/// This is assembled from the 3-D operator as written: the analytic
/// transverse derivatives pull down `p_y`, `p_z`, the magnetic square is
/// expanded around the momentum (never substituting `beta_N = -p_y`), and
/// `psi''` comes from differentiating the ansatz twice. The unimodular plane
/// factor cancels in the ratio, so only `x` remains. For an exact reduction
/// this agrees with the 1-D residual to rounding.
pub fn em_residual(
    prob: &EmProblem,
    sol: &QesSolution,
    script_e: f64,
    xs: &[f64],
) -> Result<f64> {
    let full = check_reduced_labels(prob, sol)?;
    if (sol.alpha - prob.alpha).abs() > 1e-9 {
        return Err(QesError::InvalidParameter(
            "solution coupling does not match the field problem".into(),
        ));
    }
    if sol.n % 2 == 1 && xs.iter().any(|&x| x < 0.0) {
        return Err(QesError::Unsupported(
            "odd-N modes are half-line objects; sample x >= 0".into(),
        ));
    }
    let xn = generator_poly(prob.n, &full)?.poly;
    let xn1 = generator_poly(prob.n - 1, &full)?.poly;
    let p = Poly::new(sol.coeffs.as_slice().to_vec()).compose_affine(full.get(2), full.get(1));
    let dp = p.derivative();
    // psi = P e^(-W): psi'' = (P'' - 2 P' X_N + P (X_N^2 - X_(N-1))) e^(-W).
    let psi2 = dp
        .derivative()
        .sub(&dp.mul(&xn).scale(2.0))
        .add(&p.mul(&xn.mul(&xn).sub(&xn1)));
    // The magnetic series beta_(N-1) x + ... + beta_1 x^(N-1)/(N-1)!.
    let series = xn.sub(&Poly::constant(full.get(prob.n)));
    let py_minus = Poly::constant(prob.p_y).sub(&series);
    let shifted = py_minus
        .mul(&py_minus)
        .add(&xn1.scale(prob.alpha))
        .add(&Poly::constant(prob.p_z * prob.p_z - script_e));
    let defect = psi2.scale(-1.0).add(&shifted.mul(&p));
    let w = xn.antiderivative();
    oracle::residual_over(xs, |x| {
        let damp = (-w.eval(x)).exp();
        (defect.eval(x) * damp, p.eval(x) * damp)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{chebyshev_points, schrodinger_residual};
    use crate::recursion::alpha_for;
    use crate::solver::solve_catalogued;
    use approx::assert_abs_diff_eq;

    fn sextic_head() -> Vec<f64> {
        vec![6.0, 2.0, -0.2]
    }

    /// Fig-style sextic: `beta_4 = -p_y` with `p_y` chosen so the cubic
    /// invariant vanishes.
    fn sextic_py() -> f64 {
        19.0 / 135.0
    }

    #[test]
    fn order_two_gives_a_constant_magnetic_field() {
        let prob = EmProblem::new(2, 0.3, vec![1.5], 0.4, -0.2).unwrap();
        for x in [-2.0, 0.0, 1.3] {
            let (e, b) = em_fields(x, &prob);
            assert_eq!(e, [0.0; 3]);
            assert_abs_diff_eq!(b[2], 1.5, epsilon = 1e-15);
            assert_eq!((b[0], b[1]), (0.0, 0.0));
        }
    }

    #[test]
    fn fields_are_orthogonal_with_linked_profiles() {
        let alpha = alpha_for(4, 1).unwrap();
        let prob = EmProblem::new(4, alpha, sextic_head(), sextic_py(), 0.0).unwrap();
        let full = prob.full_labels();
        // d(B_z)/dx follows the generator chain down one step.
        let db = generator_poly(3, &full).unwrap().poly.derivative();
        let lower = generator_poly(2, &full).unwrap().poly;
        assert_eq!(db.coeffs(), lower.coeffs());
        for x in [-1.0, 0.0, 0.7, 2.2] {
            let (e, b) = em_fields(x, &prob);
            let dot: f64 = e.iter().zip(b.iter()).map(|(u, v)| u * v).sum();
            assert_abs_diff_eq!(dot, 0.0);
            assert_abs_diff_eq!(e[0], -alpha * db.eval(x), epsilon = 1e-12);
        }
    }

    #[test]
    fn construction_rejects_bad_shapes() {
        assert!(EmProblem::new(4, -1.0, vec![6.0, 2.0], 0.0, 0.0).is_err());
        assert!(EmProblem::new(4, -1.0, vec![-6.0, 2.0, 0.1], 0.0, 0.0).is_err());
        assert!(EmProblem::new(1, -1.0, vec![], 0.0, 0.0).is_err());
        assert!(EmProblem::new(4, f64::NAN, vec![6.0, 2.0, 0.1], 0.0, 0.0).is_err());
    }

    #[test]
    fn reduction_appends_the_momentum_label_and_shifts_the_energy() {
        let alpha = alpha_for(4, 1).unwrap();
        let prob = EmProblem::new(4, alpha, sextic_head(), sextic_py(), 2.0).unwrap();
        let (qp, e) = reduce_to_1d(&prob, 5.0).unwrap();
        assert_eq!(qp.n, 4);
        assert_eq!(qp.m, 1);
        assert_abs_diff_eq!(qp.betas.get(4), -sextic_py(), epsilon = 1e-15);
        assert_abs_diff_eq!(e, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(lift_energy(e, 2.0), 5.0, epsilon = 1e-15);
        // Distinct transverse momenta land in distinct representations.
        let other = EmProblem::new(4, alpha, sextic_head(), 1.0, 2.0).unwrap();
        let (qp2, _) = reduce_to_1d(&other, 5.0).unwrap();
        assert!((qp.betas.get(4) - qp2.betas.get(4)).abs() > 0.5);
    }

    #[test]
    fn harmonic_reduction_keeps_the_free_coupling() {
        let prob = EmProblem::new(2, 0.7, vec![1.0], -0.3, 1.5).unwrap();
        let (qp, e) = reduce_to_1d(&prob, 4.0).unwrap();
        assert_eq!(qp.n, 2);
        assert_abs_diff_eq!(qp.alpha, 0.7);
        assert_abs_diff_eq!(qp.betas.get(2), 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(e, 4.0 - 2.25, epsilon = 1e-15);
    }

    #[test]
    fn off_ladder_couplings_are_rejected() {
        let prob = EmProblem::new(4, -1.37, sextic_head(), 0.0, 0.0).unwrap();
        assert!(reduce_to_1d(&prob, 1.0).is_err());
    }

    /// The 3-D defect, assembled through the field operator, agrees with the
    /// 1-D defect of the reduced well to rounding, and both vanish on a
    /// genuine solution.
    #[test]
    fn three_d_residual_equals_the_reduced_residual() {
        let alpha = alpha_for(4, 1).unwrap();
        let out = solve_catalogued(4, 1, 6.0, -3.2, &[None]).unwrap();
        let labels = BetaVector::new(vec![6.0, 2.0, -0.2, -sextic_py()]).unwrap();
        let sol = out.solutions[0].clone().with_betas(labels).unwrap();
        for (p_y, p_z) in [(sextic_py(), 0.0), (sextic_py(), 2.0)] {
            let prob = EmProblem::new(4, alpha, sextic_head(), p_y, p_z).unwrap();
            let script_e = lift_energy(sol.energy, p_z);
            let pts = chebyshev_points(3.0, 50);
            let three_d = em_residual(&prob, &sol, script_e, &pts).unwrap();
            let one_d = schrodinger_residual(&sol, &pts).unwrap();
            assert!(three_d < 1e-10, "3-D residual {three_d}");
            assert_abs_diff_eq!(three_d, one_d, epsilon = 1e-13);
            // A wrong 3-D energy is caught at the same scale it is wrong.
            let off = em_residual(&prob, &sol, script_e + 1e-3, &pts).unwrap();
            assert!(off > 1e-4);
        }
    }

    #[test]
    fn plane_wave_carries_phase_and_shape() {
        let alpha = alpha_for(4, 1).unwrap();
        let out = solve_catalogued(4, 1, 6.0, -3.2, &[None]).unwrap();
        let labels = BetaVector::new(vec![6.0, 2.0, -0.2, -sextic_py()]).unwrap();
        let sol = out.solutions[0].clone().with_betas(labels).unwrap();
        let prob = EmProblem::new(4, alpha, sextic_head(), sextic_py(), 1.0).unwrap();
        let val = plane_wave_eigenfunction(&prob, &sol, 0.5, 0.3, -0.2).unwrap();
        let psi = wavefunction_eval(0.5, &sol).unwrap();
        let want = Complex64::from_polar(1.0, 0.3 * sextic_py() - 0.2) * psi / (2.0 * PI);
        assert!((val - want).norm() < 1e-14, "plane-wave value off: {val} vs {want}");
        // A solution realized at different labels is a different Fourier
        // mode and is rejected.
        let other = solve_catalogued(4, 1, 6.0, -3.2, &[None]).unwrap().solutions[0]
            .clone()
            .realize(0.0)
            .unwrap();
        assert!(plane_wave_eigenfunction(&prob, &other, 0.5, 0.3, -0.2).is_err());
    }
}
