//! Symmetrized `|x|` potentials and parity eigenstates.
//!
//! For odd `N` the weight `e^(-W)` with `W' = X_N` grows without bound on one
//! half line, so the polynomial ansatz is not normalizable on all of `R`. The
//! cure is to continue the potential as an even function of `x`: on the
//! negative half line the representation labels are swapped to
//! `tilde beta_i = (-1)^(i+N+1) beta_i`, which mirrors the positive half line
//! through the origin. Eigenfunctions then split into parity sectors,
//!
//! ```text
//! psi(x) = p(X_2(x)) e^(-W(x))                                        x >= 0,
//! psi(x) = +/- sum_m (-1)^((N+1)m) a_m tildeX_2(x)^m e^(-tildeW(x)),  x < 0,
//! ```
//!
//! and gluing the halves smoothly at `x = 0` imposes one extra scalar
//! condition per sector on top of the recursion rows:
//!
//! * even: `a_0 beta_N - sum_(m>=1) a_m (m beta_1 - beta_2 beta_N) beta_2^(m-1) = 0`
//!   (the derivative must vanish at the origin),
//! * odd: `sum_m a_m beta_2^m = 0` (the value must vanish at the origin).
//!
//! [`solve_symmetrized`] carries closed forms for the sextic (`N = 4`) and
//! octic (`N = 5`) blocks at `M <= 2`, including the one-parameter sextic
//! family whose even and odd sectors share the same potential, and falls back
//! to a damped Gauss-Newton search on the joint system (leftover recursion
//! rows plus continuity) for other orders.

use std::collections::BTreeSet;

use crate::group::{casimir, casimir_set, generator_poly, BetaVector};
use crate::recursion::{alpha_for, downward_recursion, leftover_residuals, CoefficientVector};
use crate::solver::{check_solution, gauss_newton, jacobian, ConstraintRecord, QesSolution};
use crate::{residual_tolerance, QesError, Result};

/// Parity sector of a symmetrized eigenfunction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    /// Overall sign of the `x < 0` branch.
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

impl std::str::FromStr for Parity {
    type Err = QesError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "even" => Ok(Parity::Even),
            "odd" => Ok(Parity::Odd),
            other => Err(QesError::InvalidParameter(format!(
                "parity must be 'even' or 'odd', got '{other}'"
            ))),
        }
    }
}

/// Sector selection for [`solve_symmetrized`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParityChoice {
    Even,
    Odd,
    /// Search both sectors. For the sextic `M = 2` block with only `beta_4`
    /// pinned this returns the shared-potential pair; otherwise it is the
    /// union of the even and odd searches.
    Both,
}

/// An eigenpair of the symmetrized Hamiltonian with definite parity.
///
/// The base solution always carries realized labels; `tilde_betas` are the
/// labels governing the `x < 0` branch.
#[derive(Clone, Debug)]
pub struct ParitySolution {
    pub base: QesSolution,
    pub parity: Parity,
    pub tilde_betas: BetaVector,
    /// Value of the applicable continuity condition at `x = 0`.
    pub continuity_residual: f64,
}

/// Parity solutions plus notes about sectors or branches that were ruled out.
#[derive(Clone, Debug, Default)]
pub struct SymmetrizedOutcome {
    pub solutions: Vec<ParitySolution>,
    pub diagnostics: Vec<String>,
}

/// Labels of the mirrored representation, `tilde beta_i = (-1)^(i+N+1) beta_i`.
///
/// Applying the map twice restores the original labels. For odd `N` the
/// leading label flips sign, which is why [`BetaVector`] only insists on
/// `beta_1 != 0`.
pub fn tilde_betas(betas: &BetaVector) -> BetaVector {
    let n = betas.n();
    let flipped: Vec<f64> = (1..=n)
        .map(|i| {
            if (i + n + 1) % 2 == 1 {
                -betas.get(i)
            } else {
                betas.get(i)
            }
        })
        .collect();
    BetaVector::new(flipped).expect("sign flips keep labels well formed")
}

/// Derivative-continuity condition at `x = 0` for a parity even state:
/// `a_0 beta_N - sum_(m>=1) a_m (m beta_1 - beta_2 beta_N) beta_2^(m-1)`.
pub fn continuity_even_residual(a: &CoefficientVector, betas: &BetaVector) -> f64 {
    let b1 = betas.get(1);
    let b2 = betas.get(2);
    let bn = betas.get(betas.n());
    let mut r = a.get(0) * bn;
    for m in 1..=a.order() {
        r -= a.get(m as isize) * (m as f64 * b1 - b2 * bn) * b2.powi(m as i32 - 1);
    }
    r
}

/// Value-continuity condition at `x = 0` for a parity odd state: the
/// polynomial evaluated at `X_2(0) = beta_2`, i.e. `sum_m a_m beta_2^m`.
pub fn continuity_odd_residual(a: &CoefficientVector, betas: &BetaVector) -> f64 {
    let b2 = betas.get(2);
    a.as_slice().iter().rev().fold(0.0, |acc, am| acc * b2 + am)
}

/// Wrap a solved eigenpair as a parity eigenstate of the symmetrized
/// Hamiltonian, checking the applicable continuity condition at `x = 0`.
pub fn symmetrize(base: QesSolution, parity: Parity) -> Result<ParitySolution> {
    let betas = base.betas.clone().ok_or_else(|| {
        QesError::InvalidParameter(
            "attach labels before symmetrizing: the continuity conditions read individual beta_i"
                .into(),
        )
    })?;
    let r = match parity {
        Parity::Even => continuity_even_residual(&base.coeffs, &betas),
        Parity::Odd => continuity_odd_residual(&base.coeffs, &betas),
    };
    if r.abs() > residual_tolerance() {
        return Err(QesError::NoSolution(format!(
            "branch {}: {} continuity fails at x = 0 (residual {:.3e})",
            base.branch,
            parity.label(),
            r
        )));
    }
    Ok(ParitySolution {
        tilde_betas: tilde_betas(&betas),
        base,
        parity,
        continuity_residual: r,
    })
}

/// Evaluate a parity eigenstate anywhere on the real line.
///
/// The `x >= 0` branch is the plain ansatz `p(X_2(x)) e^(-W(x))`; the `x < 0`
/// branch twists the coefficients by `(-1)^((N+1)m)`, swaps in the tilde
/// labels, and applies the sector sign. Both branches agree at `x = 0`.
pub fn parity_wavefunction_eval(x: f64, ps: &ParitySolution) -> f64 {
    let betas = ps
        .base
        .betas
        .as_ref()
        .expect("parity solutions carry realized labels");
    if x >= 0.0 {
        half_line_eval(x, ps.base.coeffs.as_slice(), betas)
    } else {
        let twisted = twisted_coeffs(ps.base.coeffs.as_slice(), betas.n());
        ps.parity.sign() * half_line_eval(x, &twisted, &ps.tilde_betas)
    }
}

/// Coefficients of the `x < 0` branch, `(-1)^((N+1)m) a_m`.
pub(crate) fn twisted_coeffs(a: &[f64], n: usize) -> Vec<f64> {
    a.iter()
        .enumerate()
        .map(|(m, am)| if (n + 1) * m % 2 == 1 { -am } else { *am })
        .collect()
}

/// `p(X_2(x)) e^(-W(x))` with `W` the antiderivative of `X_N` vanishing at 0.
pub(crate) fn half_line_eval(x: f64, a: &[f64], betas: &BetaVector) -> f64 {
    let u = generator_poly(2, betas)
        .expect("labels have dimension >= 2")
        .eval(x);
    let w = generator_poly(betas.n(), betas)
        .expect("top generator always exists")
        .poly
        .antiderivative()
        .eval(x);
    let p = a.iter().rev().fold(0.0, |acc, am| acc * u + am);
    p * (-w).exp()
}

/// Solve the symmetrized problem for a catalogued family or, for orders
/// without a closed form, by a seeded Newton search on the joint system.
///
/// `free` supplies values for the family's free labels as `(index, value)`
/// pairs with `beta_1` at index 1; each family states which labels it leaves
/// free. Outside the catalogue exactly two labels must be pinned, since the
/// recursion rows plus one continuity condition leave a two-parameter family.
pub fn solve_symmetrized(
    n: usize,
    m: usize,
    parity: ParityChoice,
    free: &[(usize, f64)],
) -> Result<SymmetrizedOutcome> {
    if n < 2 {
        return Err(QesError::Unsupported(
            "representation dimension must be at least 2".into(),
        ));
    }
    if n == 2 {
        return Err(QesError::Unsupported(
            "symmetrizing the harmonic block only removes the linear shift (beta_2 = 0); \
             solve it directly"
                .into(),
        ));
    }
    let mut seen = BTreeSet::new();
    for &(i, v) in free {
        if i == 0 || i > n {
            return Err(QesError::IndexOutOfRange(format!(
                "beta index {i} for dimension {n}"
            )));
        }
        if !v.is_finite() {
            return Err(QesError::InvalidParameter(format!(
                "beta_{i} must be finite"
            )));
        }
        if !seen.insert(i) {
            return Err(QesError::InvalidParameter(format!("beta_{i} given twice")));
        }
    }
    match parity {
        ParityChoice::Even => sector(n, m, Parity::Even, free),
        ParityChoice::Odd => sector(n, m, Parity::Odd, free),
        ParityChoice::Both => {
            if n == 4 && m == 2 && free.len() == 1 && free[0].0 == 4 {
                return double_parity_family(free[0].1);
            }
            let mut out = SymmetrizedOutcome::default();
            for p in [Parity::Even, Parity::Odd] {
                match sector(n, m, p, free) {
                    Ok(mut s) => {
                        out.solutions.append(&mut s.solutions);
                        out.diagnostics.append(&mut s.diagnostics);
                    }
                    Err(e) => out.diagnostics.push(format!("{} sector: {e}", p.label())),
                }
            }
            Ok(out)
        }
    }
}

fn sector(n: usize, m: usize, parity: Parity, free: &[(usize, f64)]) -> Result<SymmetrizedOutcome> {
    match (n, m) {
        (4, 0..=2) | (5, 0..=2) => catalogued_sector(n, m, parity, free),
        _ => generic_sector(n, m, parity, free),
    }
}

/// Check that `free` pins exactly the labels a family leaves free and return
/// their values in index order.
fn expect_free(free: &[(usize, f64)], wanted: &[usize], family: &str) -> Result<Vec<f64>> {
    let mut got = free.to_vec();
    got.sort_by_key(|p| p.0);
    let idx: Vec<usize> = got.iter().map(|p| p.0).collect();
    if idx != wanted {
        let show = |v: &[usize]| {
            v.iter()
                .map(|i| format!("beta_{i}"))
                .collect::<Vec<_>>()
                .join(", ")
        };
        return Err(QesError::InvalidParameter(format!(
            "{family} leaves {} free; got values for {}",
            show(wanted),
            if idx.is_empty() {
                "none".to_string()
            } else {
                show(&idx)
            }
        )));
    }
    Ok(got.into_iter().map(|p| p.1).collect())
}

fn nonzero(v: f64, what: &str) -> Result<f64> {
    if v == 0.0 {
        return Err(QesError::InvalidParameter(format!("{what} must be nonzero")));
    }
    Ok(v)
}

fn names(idx: &[usize]) -> Vec<String> {
    idx.iter().map(|i| format!("beta_{i}")).collect()
}

/// Run a closed-form family through the shared residual and continuity gates.
fn family(
    n: usize,
    m: usize,
    branch: &str,
    parity: Parity,
    betas: Vec<f64>,
    energy: f64,
    constraint: ConstraintRecord,
) -> Result<ParitySolution> {
    let betas = BetaVector::new(betas)?;
    if betas.get(1) <= 0.0 {
        return Err(QesError::NoSolution(format!(
            "branch {branch}: beta_1 = {:.6} is not positive",
            betas.get(1)
        )));
    }
    let c = casimir_set(&betas);
    let alpha = alpha_for(n, m)?;
    let sol = check_solution(n, m, alpha, c, energy, branch, constraint)?.with_betas(betas)?;
    symmetrize(sol, parity)
}

fn push_or_note(out: &mut SymmetrizedOutcome, res: Result<ParitySolution>) {
    match res {
        Ok(s) => out.solutions.push(s),
        Err(e) => out.diagnostics.push(e.to_string()),
    }
}

fn catalogued_sector(
    n: usize,
    m: usize,
    parity: Parity,
    free: &[(usize, f64)],
) -> Result<SymmetrizedOutcome> {
    let mut out = SymmetrizedOutcome::default();
    let record = |fixed: &[usize], solved: &[usize]| ConstraintRecord {
        fixed: names(fixed),
        solved: {
            let mut v = names(solved);
            v.push("E".into());
            v
        },
        ..Default::default()
    };
    match (n, m, parity) {
        // A lone constant polynomial: only an even gluing is possible and it
        // forces the top label (hence E = 0) to vanish.
        (4 | 5, 0, Parity::Odd) => {
            out.diagnostics.push(format!(
                "no nontrivial parity odd state at M = 0 for N = {n}: \
                 a constant polynomial cannot vanish at the origin"
            ));
        }
        (4, 0, Parity::Even) => {
            let v = expect_free(free, &[1, 2, 3], "sextic M = 0 even")?;
            let betas = vec![v[0], v[1], v[2], 0.0];
            push_or_note(
                &mut out,
                family(4, 0, "even", parity, betas, 0.0, record(&[1, 2, 3], &[4])),
            );
        }
        (5, 0, Parity::Even) => {
            let v = expect_free(free, &[1, 2, 3, 4], "octic M = 0 even")?;
            let betas = vec![v[0], v[1], v[2], v[3], 0.0];
            push_or_note(
                &mut out,
                family(5, 0, "even", parity, betas, 0.0, record(&[1, 2, 3, 4], &[5])),
            );
        }
        (4, 1, Parity::Odd) => {
            let v = expect_free(free, &[1, 3], "sextic M = 1 odd")?;
            let (b1, b3) = (v[0], v[1]);
            let betas = vec![b1, 0.0, b3, 0.0];
            let e = 4.0 * b3 / 3.0;
            push_or_note(
                &mut out,
                family(4, 1, "odd", parity, betas, e, record(&[1, 3], &[2, 4])),
            );
        }
        (4, 1, Parity::Even) => {
            let v = expect_free(free, &[1, 4], "sextic M = 1 even")?;
            let (b1, b4) = (v[0], nonzero(v[1], "beta_4")?);
            let betas = vec![b1, b1 / b4, b1 / (3.0 * b4 * b4) + b4 * b4, b4];
            let e = -2.0 * b1 / (9.0 * b4 * b4) + 4.0 / 3.0 * b4 * b4;
            push_or_note(
                &mut out,
                family(4, 1, "even", parity, betas, e, record(&[1, 4], &[2, 3])),
            );
        }
        (4, 2, Parity::Odd) => {
            let v = expect_free(free, &[2, 4], "sextic M = 2 odd")?;
            let (b2, b4) = (v[0], nonzero(v[1], "beta_4")?);
            let betas = vec![
                2.0 * b2 * b4,
                b2,
                b2 / (6.0 * b4) + 2.0 * b4 * b4,
                b4,
            ];
            let e = b2 / (9.0 * b4) + 16.0 / 3.0 * b4 * b4;
            push_or_note(
                &mut out,
                family(4, 2, "odd", parity, betas, e, record(&[2, 4], &[1, 3])),
            );
        }
        (4, 2, Parity::Even) => {
            let v = expect_free(free, &[2, 4], "sextic M = 2 even")?;
            let (b2, b4) = (nonzero(v[0], "beta_2")?, nonzero(v[1], "beta_4")?);
            let b43 = b4.powi(3);
            let disc = 4.0 * b2.powi(4) - 18.0 * b2.powi(3) * b43 + 9.0 * b2 * b2 * b43 * b43;
            if disc < 0.0 {
                out.diagnostics.push(format!(
                    "discriminant 4 b2^4 - 18 b2^3 b4^3 + 9 b2^2 b4^6 = {disc:.6e} is negative: \
                     no real parity even pair at beta_2 = {b2}, beta_4 = {b4}"
                ));
                return Ok(out);
            }
            let root = disc.sqrt();
            for (sign, branch) in [(1.0, "even-plus"), (-1.0, "even-minus")] {
                let b1 = (2.0 * b2 * b2 + 3.0 * b2 * b43 + sign * root) / (15.0 * b4 * b4);
                let b3 = (14.0 * b2 * b2 + 21.0 * b2 * b43 - 3.0 * sign * root) / (30.0 * b2 * b4);
                let e = (-34.0 * b2 * b2 + 39.0 * b2 * b43 + 3.0 * sign * root) / (45.0 * b2 * b4);
                push_or_note(
                    &mut out,
                    family(4, 2, branch, parity, vec![b1, b2, b3, b4], e, record(&[2, 4], &[1, 3])),
                );
            }
        }
        (5, 1, Parity::Odd) => {
            let v = expect_free(free, &[1, 4], "octic M = 1 odd")?;
            let (b1, b4) = (v[0], v[1]);
            let betas = vec![b1, 0.0, 0.0, b4, 0.0];
            let e = 1.5 * b4;
            push_or_note(
                &mut out,
                family(5, 1, "odd", parity, betas, e, record(&[1, 4], &[2, 3, 5])),
            );
        }
        (5, 1, Parity::Even) => {
            let v = expect_free(free, &[1, 5], "octic M = 1 even")?;
            let (b1, b5) = (v[0], nonzero(v[1], "beta_5")?);
            let betas = vec![
                b1,
                b1 / b5,
                b1 / (2.0 * b5 * b5),
                b1 / (8.0 * b5.powi(3)) + b5 * b5,
                b5,
            ];
            let bv = BetaVector::new(betas.clone())?;
            let e = 1.5 * casimir(3, &bv)? / (b1 * b1);
            push_or_note(
                &mut out,
                family(5, 1, "even", parity, betas, e, record(&[1, 5], &[2, 3, 4])),
            );
        }
        (5, 2, Parity::Odd) => {
            let v = expect_free(free, &[2, 5], "octic M = 2 odd")?;
            let (b2, b5) = (v[0], nonzero(v[1], "beta_5")?);
            let b1 = 2.0 * b2 * b5;
            let betas = vec![b1, b2, b2 / (6.0 * b5), 2.0 * b5 * b5, b5];
            let bv = BetaVector::new(betas.clone())?;
            let c2 = casimir(2, &bv)?;
            let e = -b1 * b1 / (4.0 * c2);
            push_or_note(
                &mut out,
                family(5, 2, "odd", parity, betas, e, record(&[2, 5], &[1, 3, 4])),
            );
        }
        (5, 2, Parity::Even) => {
            let v = expect_free(free, &[2, 5], "octic M = 2 even")?;
            let (b2, b5) = (nonzero(v[0], "beta_2")?, nonzero(v[1], "beta_5")?);
            let b54 = b5.powi(4);
            let disc = b2.powi(4) - 9.0 * b2.powi(3) * b54 + 9.0 * b2 * b2 * b54 * b54;
            if disc < 0.0 {
                out.diagnostics.push(format!(
                    "discriminant b2^4 - 9 b2^3 b5^4 + 9 b2^2 b5^8 = {disc:.6e} is negative: \
                     no real parity even pair at beta_2 = {b2}, beta_5 = {b5}"
                ));
                return Ok(out);
            }
            let root = disc.sqrt();
            for (sign, branch) in [(1.0, "even-plus"), (-1.0, "even-minus")] {
                let b1 = (b2 * b2 + 3.0 * b2 * b54 + sign * root) / (15.0 * b5.powi(3));
                let b3 = (2.0 * b2 * b2 + 3.0 * b2 * b54 - sign * root) / (3.0 * b2 * b5);
                let b4 = (7.0 * b2 * b2 + 36.0 * b2 * b54 - 8.0 * sign * root) / (30.0 * b2 * b5 * b5);
                let betas = vec![b1, b2, b3, b4, b5];
                let bv = match BetaVector::new(betas.clone()) {
                    Ok(bv) => bv,
                    Err(e) => {
                        out.diagnostics.push(format!("branch {branch}: {e}"));
                        continue;
                    }
                };
                let c2 = casimir(2, &bv)?;
                if c2.abs() <= 1e-12 * (1.0 + b1.abs()) {
                    out.diagnostics
                        .push(format!("branch {branch}: C_2 vanishes, energy undefined"));
                    continue;
                }
                let e = -b1 * b1 / (4.0 * c2);
                push_or_note(
                    &mut out,
                    family(5, 2, branch, parity, betas, e, record(&[2, 5], &[1, 3, 4])),
                );
            }
        }
        _ => unreachable!("catalogued_sector is only called for N = 4, 5 with M <= 2"),
    }
    Ok(out)
}

/// The one-parameter sextic `M = 2` family whose even and odd sectors share
/// the same potential: `beta_2 = 8 beta_4^3`, `beta_1 = 16 beta_4^4`,
/// `beta_3 = (10/3) beta_4^2`, with `E_even = -(40/9) beta_4^2` and
/// `E_odd = (56/9) beta_4^2`.
fn double_parity_family(b4: f64) -> Result<SymmetrizedOutcome> {
    let b4 = nonzero(b4, "beta_4")?;
    if !b4.is_finite() {
        return Err(QesError::InvalidParameter("beta_4 must be finite".into()));
    }
    let betas = vec![
        16.0 * b4.powi(4),
        8.0 * b4.powi(3),
        10.0 / 3.0 * b4 * b4,
        b4,
    ];
    let constraint = ConstraintRecord {
        fixed: names(&[4]),
        solved: {
            let mut v = names(&[1, 2, 3]);
            v.push("E".into());
            v
        },
        ..Default::default()
    };
    let mut out = SymmetrizedOutcome::default();
    push_or_note(
        &mut out,
        family(
            4,
            2,
            "double-even",
            Parity::Even,
            betas.clone(),
            -40.0 / 9.0 * b4 * b4,
            constraint.clone(),
        ),
    );
    push_or_note(
        &mut out,
        family(
            4,
            2,
            "double-odd",
            Parity::Odd,
            betas,
            56.0 / 9.0 * b4 * b4,
            constraint,
        ),
    );
    Ok(out)
}

/// Newton search for orders without a closed form: unknowns are the unpinned
/// labels plus `E`; equations are the leftover recursion rows plus the
/// sector's continuity condition.
fn generic_sector(
    n: usize,
    m: usize,
    parity: Parity,
    free: &[(usize, f64)],
) -> Result<SymmetrizedOutcome> {
    if free.len() != 2 {
        return Err(QesError::InvalidParameter(format!(
            "the recursion rows plus one continuity condition leave a two-parameter family \
             for N = {n}; pin exactly two labels (got {})",
            free.len()
        )));
    }
    let alpha = alpha_for(n, m)?;
    let mut pinned = free.to_vec();
    pinned.sort_by_key(|p| p.0);
    let unknown_idx: Vec<usize> = (1..=n)
        .filter(|i| pinned.iter().all(|&(j, _)| j != *i))
        .collect();
    let assemble = |u: &[f64]| -> Option<BetaVector> {
        let mut v = vec![0.0; n];
        for &(i, val) in &pinned {
            v[i - 1] = val;
        }
        for (j, &i) in unknown_idx.iter().enumerate() {
            v[i - 1] = u[1 + j];
        }
        BetaVector::new(v).ok()
    };
    let f = |u: &[f64]| -> Option<Vec<f64>> {
        let betas = assemble(u)?;
        let c = casimir_set(&betas);
        let coeffs = downward_recursion(n, m, &c, u[0]).ok()?;
        let mut rows = leftover_residuals(n, m, &c, u[0]).ok()?;
        rows.push(match parity {
            Parity::Even => continuity_even_residual(&coeffs, &betas),
            Parity::Odd => continuity_odd_residual(&coeffs, &betas),
        });
        rows.iter().all(|r| r.is_finite()).then_some(rows)
    };

    let e_axis = [0.0, 0.5, -0.5, 2.0, -2.0, 8.0, -8.0];
    let b_axis = [1.0, -1.0, 0.5, -0.5, 2.0, -2.0];
    let dims = 1 + unknown_idx.len();
    let total = e_axis.len() * b_axis.len().pow(dims as u32 - 1);
    let stride = total.div_ceil(4096).max(1);
    let mut found: Vec<Vec<f64>> = Vec::new();
    for idx in (0..total).step_by(stride) {
        let mut rem = idx;
        let mut seed = Vec::with_capacity(dims);
        seed.push(e_axis[rem % e_axis.len()]);
        rem /= e_axis.len();
        for _ in 1..dims {
            seed.push(b_axis[rem % b_axis.len()]);
            rem /= b_axis.len();
        }
        if let Some(root) = gauss_newton(&f, &seed, 200) {
            let dup = found.iter().any(|r| {
                r.iter()
                    .zip(&root)
                    .all(|(a, b)| (a - b).abs() <= 1e-6 * (1.0 + a.abs().max(b.abs())))
            });
            if !dup {
                found.push(root);
            }
        }
    }
    found.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut out = SymmetrizedOutcome::default();
    if found.is_empty() {
        out.diagnostics.push(format!(
            "no seed converged for the {} sector at N = {n}, M = {m}",
            parity.label()
        ));
        return Ok(out);
    }
    for root in found {
        let Some(betas) = assemble(&root) else {
            continue;
        };
        if betas.get(1) <= 1e-8 {
            out.diagnostics.push(format!(
                "rejected a root with beta_1 = {:.3e} (labels must keep beta_1 > 0)",
                betas.get(1)
            ));
            continue;
        }
        let degenerate = jacobian(&f, &root)
            .map(|j| {
                let svd = j.svd(false, false);
                let smax = svd.singular_values.max();
                svd.singular_values.min() <= 1e-8 * smax.max(1.0)
            })
            .unwrap_or(true);
        let constraint = ConstraintRecord {
            fixed: names(&pinned.iter().map(|p| p.0).collect::<Vec<_>>()),
            solved: {
                let mut v = names(&unknown_idx);
                v.push("E".into());
                v
            },
            degenerate,
            ..Default::default()
        };
        let branch = format!("{}-root{}", parity.label(), out.solutions.len());
        push_or_note(
            &mut out,
            check_solution(n, m, alpha, casimir_set(&betas), root[0], &branch, constraint)
                .and_then(|s| s.with_betas(betas.clone()))
                .and_then(|s| symmetrize(s, parity)),
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn bv(v: &[f64]) -> BetaVector {
        BetaVector::new(v.to_vec()).unwrap()
    }

    fn cv(v: &[f64]) -> CoefficientVector {
        CoefficientVector(v.to_vec())
    }

    #[test]
    fn tilde_sign_pattern() {
        let t4 = tilde_betas(&bv(&[6.0, 2.0, -0.2, 0.1]));
        assert_eq!(t4.as_slice(), &[6.0, -2.0, -0.2, -0.1]);
        let t3 = tilde_betas(&bv(&[1.0, 1.0, 1.0]));
        assert_eq!(t3.as_slice(), &[-1.0, 1.0, -1.0]);
    }

    #[test]
    fn continuity_even_cases() {
        // M = 0: the condition collapses to a_0 beta_N.
        let betas = bv(&[6.0, 2.0, -0.2, 0.1]);
        assert_relative_eq!(continuity_even_residual(&cv(&[1.0]), &betas), 0.1);
        // Family betas for the sextic M = 1 even state: exact zero.
        let fam = bv(&[6.0, 12.0, 8.25, 0.5]);
        assert_abs_diff_eq!(
            continuity_even_residual(&cv(&[0.0, 1.0]), &fam),
            0.0,
            epsilon = 1e-14
        );
        // Generic labels violate the condition.
        assert!(continuity_even_residual(&cv(&[0.0, 1.0]), &betas).abs() > 1.0);
    }

    #[test]
    fn continuity_odd_cases() {
        // a_0 = 0 leaves a_1 beta_2: zero forces beta_2 = 0.
        let betas = bv(&[6.0, 2.0, -0.2, 0.1]);
        assert_relative_eq!(continuity_odd_residual(&cv(&[0.0, 1.0]), &betas), 2.0);
        // p(u) = u^2 - 4 at beta_2 = 2 glues.
        assert_abs_diff_eq!(
            continuity_odd_residual(&cv(&[-4.0, 0.0, 1.0]), &betas),
            0.0
        );
        // beta_2 = 0 evaluates the polynomial at the origin.
        let unshifted = bv(&[6.0, 0.0, -0.2, 0.1]);
        assert_relative_eq!(
            continuity_odd_residual(&cv(&[3.0, 0.0, 1.0]), &unshifted),
            3.0
        );
    }

    #[test]
    fn sextic_m0_even_family() {
        let out = solve_symmetrized(4, 0, ParityChoice::Even, &[(1, 6.0), (2, 2.0), (3, -0.2)])
            .unwrap();
        assert_eq!(out.solutions.len(), 1);
        let s = &out.solutions[0];
        assert_eq!(s.base.energy, 0.0);
        assert_eq!(s.base.betas.as_ref().unwrap().get(4), 0.0);
        assert!(s.continuity_residual.abs() <= 1e-14);

        let odd = solve_symmetrized(4, 0, ParityChoice::Odd, &[]).unwrap();
        assert!(odd.solutions.is_empty());
        assert!(odd.diagnostics[0].contains("parity odd"));
    }

    #[test]
    fn sextic_m1_families() {
        let odd = solve_symmetrized(4, 1, ParityChoice::Odd, &[(1, 6.0), (3, 1.2)]).unwrap();
        assert_eq!(odd.solutions.len(), 1);
        assert_relative_eq!(odd.solutions[0].base.energy, 1.6, epsilon = 1e-12);
        let b = odd.solutions[0].base.betas.clone().unwrap();
        assert_eq!((b.get(2), b.get(4)), (0.0, 0.0));

        let even = solve_symmetrized(4, 1, ParityChoice::Even, &[(1, 6.0), (4, 0.5)]).unwrap();
        assert_eq!(even.solutions.len(), 1);
        let s = &even.solutions[0];
        assert_relative_eq!(s.base.energy, -5.0, epsilon = 1e-12);
        let b = s.base.betas.clone().unwrap();
        assert_relative_eq!(b.get(2), 12.0);
        assert_relative_eq!(b.get(3), 8.25);
    }

    #[test]
    fn sextic_m2_families() {
        let odd = solve_symmetrized(4, 2, ParityChoice::Odd, &[(2, 2.0), (4, 0.5)]).unwrap();
        assert_eq!(odd.solutions.len(), 1);
        assert_relative_eq!(odd.solutions[0].base.energy, 16.0 / 9.0, epsilon = 1e-12);
        let b = odd.solutions[0].base.betas.clone().unwrap();
        assert_relative_eq!(b.get(1), 2.0);
        assert_relative_eq!(b.get(3), 7.0 / 6.0, epsilon = 1e-12);

        let even = solve_symmetrized(4, 2, ParityChoice::Even, &[(2, 2.0), (4, 0.5)]).unwrap();
        assert_eq!(even.solutions.len(), 2, "{:?}", even.diagnostics);
        for s in &even.solutions {
            assert!(s.continuity_residual.abs() <= 1e-10);
            assert!(s.base.constraint.residual <= 1e-10);
        }
        // Closed forms for the pair at beta_2 = 2, beta_4 = 0.5.
        let root = (4.0 * 16.0 - 18.0 * 8.0 * 0.125 + 9.0 * 4.0 * 0.015625_f64).sqrt();
        let e_plus = (-34.0 * 4.0 + 39.0 * 2.0 * 0.125 + 3.0 * root) / 45.0;
        let e_minus = (-34.0 * 4.0 + 39.0 * 2.0 * 0.125 - 3.0 * root) / 45.0;
        let mut got: Vec<f64> = even.solutions.iter().map(|s| s.base.energy).collect();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_relative_eq!(got[0], e_minus, epsilon = 1e-10);
        assert_relative_eq!(got[1], e_plus, epsilon = 1e-10);
    }

    #[test]
    fn sextic_double_parity_pair() {
        let out = solve_symmetrized(4, 2, ParityChoice::Both, &[(4, 0.5)]).unwrap();
        assert_eq!(out.solutions.len(), 2, "{:?}", out.diagnostics);
        let even = out.solutions.iter().find(|s| s.parity == Parity::Even).unwrap();
        let odd = out.solutions.iter().find(|s| s.parity == Parity::Odd).unwrap();
        assert_relative_eq!(even.base.energy, -10.0 / 9.0, epsilon = 1e-12);
        assert_relative_eq!(odd.base.energy, 14.0 / 9.0, epsilon = 1e-12);
        // One potential, two sectors: identical labels.
        assert_eq!(
            even.base.betas.as_ref().unwrap().as_slice(),
            odd.base.betas.as_ref().unwrap().as_slice()
        );
        assert_eq!(even.base.betas.as_ref().unwrap().as_slice()[..2], [1.0, 1.0]);
    }

    #[test]
    fn sextic_m2_even_rejects_negative_discriminant() {
        let out = solve_symmetrized(4, 2, ParityChoice::Even, &[(2, 0.2), (4, 0.5)]).unwrap();
        assert!(out.solutions.is_empty());
        assert!(out.diagnostics[0].contains("discriminant"));
    }

    #[test]
    fn octic_families() {
        let m0 = solve_symmetrized(
            5,
            0,
            ParityChoice::Even,
            &[(1, 1.0), (2, 0.3), (3, -0.4), (4, 2.0)],
        )
        .unwrap();
        assert_eq!(m0.solutions.len(), 1);
        assert_eq!(m0.solutions[0].base.energy, 0.0);

        let m1_odd = solve_symmetrized(5, 1, ParityChoice::Odd, &[(1, 1.0), (4, 2.0)]).unwrap();
        assert_eq!(m1_odd.solutions.len(), 1);
        assert_relative_eq!(m1_odd.solutions[0].base.energy, 3.0, epsilon = 1e-12);

        let m1_even = solve_symmetrized(5, 1, ParityChoice::Even, &[(1, 1.0), (5, 0.5)]).unwrap();
        assert_eq!(m1_even.solutions.len(), 1, "{:?}", m1_even.diagnostics);
        let s = &m1_even.solutions[0];
        let b = s.base.betas.clone().unwrap();
        assert_eq!(b.as_slice(), &[1.0, 2.0, 2.0, 1.25, 0.5]);
        assert_relative_eq!(s.base.energy, -0.125, epsilon = 1e-12);

        let m2_odd = solve_symmetrized(5, 2, ParityChoice::Odd, &[(2, 2.0), (5, 0.5)]).unwrap();
        assert_eq!(m2_odd.solutions.len(), 1, "{:?}", m2_odd.diagnostics);
        let s = &m2_odd.solutions[0];
        let b = s.base.betas.clone().unwrap();
        assert_relative_eq!(b.get(1), 2.0);
        assert_relative_eq!(b.get(3), 2.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(b.get(4), 0.5);
        assert_relative_eq!(s.base.energy, 1.5, epsilon = 1e-12);

        let m2_even = solve_symmetrized(5, 2, ParityChoice::Even, &[(2, 2.0), (5, 0.5)]).unwrap();
        assert_eq!(m2_even.solutions.len(), 2, "{:?}", m2_even.diagnostics);
        for s in &m2_even.solutions {
            assert!(s.continuity_residual.abs() <= 1e-10);
        }
    }

    #[test]
    fn wrong_free_set_is_rejected() {
        let err = solve_symmetrized(4, 1, ParityChoice::Odd, &[(1, 6.0), (4, 0.5)]).unwrap_err();
        assert!(err.to_string().contains("beta_3"), "{err}");
    }

    #[test]
    fn parity_pointwise_symmetry_and_smoothness() {
        let out = solve_symmetrized(4, 2, ParityChoice::Both, &[(4, 0.5)]).unwrap();
        let even = out.solutions.iter().find(|s| s.parity == Parity::Even).unwrap();
        let odd = out.solutions.iter().find(|s| s.parity == Parity::Odd).unwrap();

        for &x in &[0.1, 0.3, 0.7, 1.4, 2.5] {
            let (pe, me) = (
                parity_wavefunction_eval(x, even),
                parity_wavefunction_eval(-x, even),
            );
            assert_relative_eq!(pe, me, max_relative = 1e-12);
            let (po, mo) = (
                parity_wavefunction_eval(x, odd),
                parity_wavefunction_eval(-x, odd),
            );
            assert_relative_eq!(po, -mo, max_relative = 1e-12);
        }
        assert!(parity_wavefunction_eval(0.0, odd).abs() <= 1e-12);

        // Second-order one-sided derivative estimates agree across x = 0.
        let h = 1e-5;
        let psi = |x: f64| parity_wavefunction_eval(x, even);
        let d_plus = (4.0 * psi(h) - psi(2.0 * h) - 3.0 * psi(0.0)) / (2.0 * h);
        let d_minus = (3.0 * psi(0.0) - 4.0 * psi(-h) + psi(-2.0 * h)) / (2.0 * h);
        assert!(
            (d_plus - d_minus).abs() < 1e-8,
            "derivative jump {:.3e}",
            (d_plus - d_minus).abs()
        );
    }

    #[test]
    fn even_n_unshifted_labels_reduce_to_plain_ansatz() {
        // With beta_2 = beta_4 = 0 the tilde labels coincide with the plain
        // ones, so the symmetrized state is the analytic one everywhere.
        let out = solve_symmetrized(4, 1, ParityChoice::Odd, &[(1, 6.0), (3, 1.2)]).unwrap();
        let s = &out.solutions[0];
        let betas = s.base.betas.clone().unwrap();
        assert_eq!(tilde_betas(&betas).as_slice(), betas.as_slice());
        for &x in &[-2.0, -1.1, -0.4, 0.0, 0.9, 1.7] {
            let direct = half_line_eval(x, s.base.coeffs.as_slice(), &betas);
            assert_relative_eq!(parity_wavefunction_eval(x, s), direct, max_relative = 1e-12);
        }
    }

    #[test]
    fn tilde_branch_reproduces_mirrored_potential() {
        for betas in [
            bv(&[1.0, 1.0, 1.0]),
            bv(&[6.0, 2.0, -0.2, 0.1]),
            bv(&[1.0, 2.0, 2.0, 1.25, 0.5]),
        ] {
            let n = betas.n();
            let alpha = -1.7;
            let t = tilde_betas(&betas);
            let xn = generator_poly(n, &betas).unwrap();
            let xn1 = generator_poly(n - 1, &betas).unwrap();
            let txn = generator_poly(n, &t).unwrap();
            let txn1 = generator_poly(n - 1, &t).unwrap();
            for &x in &[-2.3, -1.0, -0.25, -0.01] {
                let mirrored = xn.eval(-x).powi(2) + alpha * xn1.eval(-x);
                let tilde = txn.eval(x).powi(2) + alpha * txn1.eval(x);
                assert_relative_eq!(tilde, mirrored, max_relative = 1e-12, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn harmonic_gluing_forces_the_unshifted_oscillator() {
        // A shifted harmonic block cannot glue evenly: the M = 0 condition is
        // a_0 beta_2 itself.
        let shifted = bv(&[2.0, 0.7]);
        assert_relative_eq!(continuity_even_residual(&cv(&[1.0]), &shifted), 0.7);
        let unshifted = bv(&[2.0, 0.0]);
        assert_abs_diff_eq!(continuity_even_residual(&cv(&[1.0]), &unshifted), 0.0);
        assert_abs_diff_eq!(continuity_odd_residual(&cv(&[0.0, 1.0]), &unshifted), 0.0);
        // The solver refuses the degenerate case outright.
        assert!(solve_symmetrized(2, 0, ParityChoice::Even, &[]).is_err());
    }

    #[test]
    fn generic_sector_finds_the_analytic_m3_block() {
        // Pinning beta_1 = 1 and beta_3 = 2.5 at N = 4, M = 3, the odd gluing
        // forces beta_2 = beta_4 = 0, where the energies satisfy
        // E^2 - 4 C_2 E - 4 = 0 with C_2 = beta_1 beta_3 = 2.5.
        let out = solve_symmetrized(4, 3, ParityChoice::Odd, &[(1, 1.0), (3, 2.5)]).unwrap();
        assert!(!out.solutions.is_empty(), "{:?}", out.diagnostics);
        let expected = [
            5.0 - 2.0 * 7.25_f64.sqrt(),
            5.0 + 2.0 * 7.25_f64.sqrt(),
        ];
        let mut matched = 0;
        for s in &out.solutions {
            let b = s.base.betas.clone().unwrap();
            if b.get(2).abs() < 1e-8 && b.get(4).abs() < 1e-8 {
                let e = s.base.energy;
                assert!(
                    expected.iter().any(|t| (t - e).abs() <= 1e-8),
                    "unexpected energy {e}"
                );
                matched += 1;
            }
            assert!(s.continuity_residual.abs() <= 1e-10);
            assert!(s.base.constraint.residual <= 1e-10);
        }
        assert!(matched >= 1, "no root landed on the analytic block");
    }

    proptest! {
        #[test]
        fn tilde_is_an_involution(
            n in 2usize..8,
            seed in proptest::collection::vec(-3.0f64..3.0, 8),
        ) {
            let mut v: Vec<f64> = seed.into_iter().take(n).collect();
            prop_assume!(v.len() == n);
            if v[0] == 0.0 {
                v[0] = 1.0;
            }
            let betas = bv(&v);
            let twice = tilde_betas(&tilde_betas(&betas));
            prop_assert_eq!(twice.as_slice(), betas.as_slice());
        }

        #[test]
        fn double_family_states_have_exact_parity(
            b4 in 0.3f64..1.2,
            x in 0.0f64..3.0,
        ) {
            let out = solve_symmetrized(4, 2, ParityChoice::Both, &[(4, b4)]).unwrap();
            prop_assert_eq!(out.solutions.len(), 2);
            for s in &out.solutions {
                let plus = parity_wavefunction_eval(x, s);
                let minus = parity_wavefunction_eval(-x, s);
                let scale = plus.abs().max(minus.abs()).max(1e-300);
                prop_assert!((plus - s.parity.sign() * minus).abs() <= 1e-12 * scale);
            }
        }
    }
}
