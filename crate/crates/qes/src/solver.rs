//! Eigenpair solvers for the polynomial block.
//!
//! Three routes produce [`QesSolution`] values:
//!
//! * [`solve_catalogued`]: the closed-form families for the sextic (N = 4),
//!   octic (N = 5) and decatic (N = 6) potentials, plus [`solve_harmonic`]
//!   for N = 2. Constraints on the higher Casimirs are part of each family.
//! * [`solve_generic`]: the leftover rows treated as equations on `E` and
//!   any unconstrained Casimirs. With `E` the only unknown the rows are
//!   polynomials in `E` and roots come from the companion matrix; otherwise
//!   a damped Gauss-Newton iteration runs from a deterministic seed grid.
//! * [`solve_zero_energy`]: the `E = 0` families that exist at every even
//!   potential order when all higher Casimirs vanish.
//!
//! Every returned solution has been re-checked against the full recursion
//! rows; `a_M = 1` throughout.

use crate::group::{casimir, casimir_set, BetaVector, CasimirSet};
use crate::recursion::{
    alpha_for, downward_recursion, leftover_residuals, leftover_rows_poly, residual_vector,
    residual_vector_harmonic, CoefficientVector, QesProblem,
};
use crate::{factorial, residual_tolerance, QesError, Result};
use nalgebra::DMatrix;

/// Relative tolerance for matching user-supplied Casimirs against the
/// values a catalogued family requires.
const CASIMIR_MATCH_TOL: f64 = 1e-8;

/// Which parameters a solution branch held fixed, which it solved for,
/// and which stayed free (reported with their adopted values).
#[derive(Clone, Debug, Default)]
pub struct ConstraintRecord {
    pub fixed: Vec<String>,
    pub solved: Vec<String>,
    pub free: Vec<String>,
    /// Largest conditioned recursion row at the solution.
    pub residual: f64,
    /// Set when the leftover system's Jacobian is rank deficient at the
    /// solution (one-parameter families and other degeneracies).
    pub degenerate: bool,
}

/// One solved eigenpair of a polynomial block.
#[derive(Clone, Debug)]
pub struct QesSolution {
    pub n: usize,
    pub m: usize,
    pub alpha: f64,
    pub energy: f64,
    pub coeffs: CoefficientVector,
    pub casimirs: CasimirSet,
    /// Representation labels; `None` until a beta_2 choice pins them down.
    pub betas: Option<BetaVector>,
    pub branch: String,
    pub constraint: ConstraintRecord,
}

impl QesSolution {
    /// Recover labels from the Casimirs with the given `beta_2`.
    pub fn realize(mut self, beta2: f64) -> Result<QesSolution> {
        self.betas = Some(betas_from_casimirs(&self.casimirs, beta2)?);
        Ok(self)
    }

    /// Attach externally known labels; they must reproduce this solution's
    /// Casimirs.
    pub fn with_betas(mut self, betas: BetaVector) -> Result<QesSolution> {
        let c = casimir_set(&betas);
        if !casimirs_close(&c, &self.casimirs) {
            return Err(QesError::InvalidParameter(
                "labels do not reproduce the solution's Casimirs".into(),
            ));
        }
        self.betas = Some(betas);
        Ok(self)
    }

    /// The full problem statement; requires realized labels.
    pub fn problem(&self) -> Result<QesProblem> {
        let betas = self.betas.clone().ok_or_else(|| {
            QesError::InvalidParameter("solution has no realized labels yet".into())
        })?;
        if self.n == 2 {
            QesProblem::harmonic(self.m, self.alpha, betas)
        } else {
            QesProblem::from_betas(self.n, self.m, betas)
        }
    }

    /// Recursion rows evaluated at this solution.
    pub fn residual(&self) -> Result<crate::recursion::ResidualVector> {
        if self.n == 2 {
            let beta1 = self.casimirs.c1();
            Ok(residual_vector_harmonic(beta1, self.alpha, self.energy, &self.coeffs))
        } else {
            residual_vector(self.n, self.m, self.alpha, &self.casimirs, self.energy, &self.coeffs)
        }
    }
}

/// Solutions plus human-readable notes about skipped or rejected branches.
#[derive(Clone, Debug, Default)]
pub struct SolveOutcome {
    pub solutions: Vec<QesSolution>,
    pub diagnostics: Vec<String>,
}

fn casimirs_close(a: &CasimirSet, b: &CasimirSet) -> bool {
    a.n() == b.n()
        && a.values()
            .iter()
            .zip(b.values())
            .all(|(x, y)| (x - y).abs() <= CASIMIR_MATCH_TOL * 1.0f64.max(x.abs()).max(y.abs()))
}

/// Invert the Casimir map: labels `beta_1..beta_N` from `C_1..C_(N-1)`
/// and a chosen `beta_2`. Each `C_k` is linear in `beta_(k+1)` with
/// coefficient `beta_1^(k-1)`, so the labels fill in one by one.
pub fn betas_from_casimirs(c: &CasimirSet, beta2: f64) -> Result<BetaVector> {
    let n = c.n();
    let b1 = c.c1();
    let mut beta = vec![b1, beta2];
    for k in 2..n {
        let mut probe = beta.clone();
        probe.push(0.0);
        let partial = casimir(k, &BetaVector::new(probe)?)?;
        beta.push((c.get(k) - partial) / b1.powi(k as i32 - 1));
    }
    BetaVector::new(beta)
}

pub(crate) fn check_solution(
    n: usize,
    m: usize,
    alpha: f64,
    c: CasimirSet,
    e: f64,
    branch: &str,
    constraint: ConstraintRecord,
) -> Result<QesSolution> {
    let coeffs = downward_recursion(n, m, &c, e)?;
    let res = residual_vector(n, m, alpha, &c, e, &coeffs)?;
    let max = res.max_scaled();
    let mut constraint = constraint;
    constraint.residual = max;
    if max > residual_tolerance() {
        return Err(QesError::NoSolution(format!(
            "branch {branch} misses the recursion rows (residual {max:.3e})"
        )));
    }
    Ok(QesSolution {
        n,
        m,
        alpha,
        energy: e,
        coeffs,
        casimirs: c,
        betas: None,
        branch: branch.to_string(),
        constraint,
    })
}

/// Does a required Casimir value agree with a user-supplied one?
fn matches_known(required: f64, known: Option<f64>) -> bool {
    match known {
        None => true,
        Some(v) => (v - required).abs() <= CASIMIR_MATCH_TOL * 1.0f64.max(v.abs()).max(required.abs()),
    }
}

fn free_or(known: Option<f64>, default: f64) -> f64 {
    known.unwrap_or(default)
}

/// Closed-form solutions of the harmonic block (N = 2), any `alpha`:
/// `E_M = (2M + 1 + alpha) beta_1`.
pub fn solve_harmonic(m: usize, alpha: f64, betas: BetaVector) -> Result<QesSolution> {
    if betas.n() != 2 || betas.get(1) <= 0.0 {
        return Err(QesError::InvalidParameter(
            "harmonic solve needs (beta_1 > 0, beta_2)".into(),
        ));
    }
    let b1 = betas.get(1);
    let e = (2.0 * m as f64 + 1.0 + alpha) * b1;
    let mut a = vec![0.0; m + 1];
    a[m] = 1.0;
    let mut k = m as isize - 2;
    while k >= 0 {
        let ku = k as usize;
        let denom = (2.0 * k as f64 + 1.0 + alpha) * b1 - e; // = 2 (k - M) beta_1
        a[ku] = (ku + 2) as f64 * (ku + 1) as f64 * b1 * b1 * a[ku + 2] / denom;
        k -= 2;
    }
    let coeffs = CoefficientVector(a);
    let res = residual_vector_harmonic(b1, alpha, e, &coeffs);
    let constraint = ConstraintRecord {
        fixed: vec!["beta1".into(), "beta2".into(), "alpha".into()],
        solved: vec!["E".into()],
        free: vec![],
        residual: res.max_scaled(),
        degenerate: false,
    };
    Ok(QesSolution {
        n: 2,
        m,
        alpha,
        energy: e,
        coeffs,
        casimirs: casimir_set(&betas),
        betas: Some(betas),
        branch: "harmonic".into(),
        constraint,
    })
}

/// Real roots of the leftover system when `E` is the only unknown: the
/// rows are polynomials in `E`; candidates come from the lowest-degree
/// nonzero row and must zero every other row.
fn poly_energy_roots(n: usize, m: usize, c: &CasimirSet) -> Result<Vec<f64>> {
    let rows = leftover_rows_poly(n, m, c)?;
    let global = rows
        .iter()
        .flat_map(|p| p.coeffs().iter())
        .fold(0.0f64, |g, x| g.max(x.abs()));
    if global == 0.0 {
        return Ok(vec![]);
    }
    let pivot = rows
        .iter()
        .filter(|p| !p.is_negligible(1e-9 * global.max(1.0)))
        .min_by_key(|p| p.degree());
    let Some(pivot) = pivot else {
        return Err(QesError::NoSolution(
            "leftover system is identically zero".into(),
        ));
    };
    let mut out = Vec::new();
    for e in pivot.real_roots(1e-12) {
        let ok = leftover_residuals(n, m, c, e)?
            .iter()
            .all(|r| r.abs() <= 1e-8 * global.max(1.0));
        if ok && !out.iter().any(|x: &f64| (x - e).abs() <= 1e-9 * (1.0 + e.abs())) {
            out.push(e);
        }
    }
    Ok(out)
}

/// The catalogued closed-form families.
///
/// `known_rest` carries user knowledge of `C_3..C_(N-1)` (entries may be
/// `None`): families constrain some of these and the supplied values must
/// agree; genuinely free ones adopt the supplied value, defaulting to 0.
/// Solutions are returned in ascending energy with unrealized labels.
pub fn solve_catalogued(
    n: usize,
    m: usize,
    c1: f64,
    c2: f64,
    known_rest: &[Option<f64>],
) -> Result<SolveOutcome> {
    if !(c1 > 0.0) {
        return Err(QesError::InvalidParameter("C_1 must be positive".into()));
    }
    if n < 4 || known_rest.len() != n - 3 {
        return Err(QesError::DimensionMismatch(format!(
            "expected {} optional higher Casimirs for N = {n}",
            n.saturating_sub(3)
        )));
    }
    let mut out = SolveOutcome::default();
    let alpha = alpha_for(n, m)?;
    match (n, m) {
        (4, 0..=5) => sextic_branches(m, alpha, c1, c2, known_rest[0], &mut out)?,
        (5, 0..=2) => octic_branches(m, alpha, c1, c2, known_rest, &mut out)?,
        (6, 0..=5) => decatic_branches(m, alpha, c1, c2, known_rest, &mut out)?,
        _ => {
            return Err(QesError::Unsupported(format!(
                "no catalogued family for N = {n}, M = {m}; use the generic solver"
            )))
        }
    }
    out.solutions.sort_by(|a, b| a.energy.partial_cmp(&b.energy).unwrap());
    Ok(out)
}

fn push_or_note(out: &mut SolveOutcome, sol: Result<QesSolution>) {
    match sol {
        Ok(s) => out.solutions.push(s),
        Err(e) => out.diagnostics.push(e.to_string()),
    }
}

fn sextic_branches(
    m: usize,
    alpha: f64,
    c1: f64,
    c2: f64,
    known_c3: Option<f64>,
    out: &mut SolveOutcome,
) -> Result<()> {
    if m == 0 {
        // ground state of the block: the only surviving row reads -E a_0,
        // so E = 0 with no constraint on C_3
        let c = CasimirSet::from_values(4, vec![c1, c2, free_or(known_c3, 0.0)])?;
        let constraint = ConstraintRecord {
            fixed: vec!["C1".into(), "C2".into()],
            solved: vec!["E".into()],
            free: vec!["C3".into()],
            ..Default::default()
        };
        push_or_note(out, check_solution(4, 0, alpha, c, 0.0, "main", constraint));
        return Ok(());
    }
    // the main family lives on C_3 = 0
    if matches_known(0.0, known_c3) {
        let c = CasimirSet::from_values(4, vec![c1, c2, 0.0])?;
        let roots = poly_energy_roots(4, m, &c)?;
        let many = roots.len() > 1;
        for (i, e) in roots.iter().enumerate() {
            let branch = if many { format!("c3zero-{i}") } else { "c3zero".into() };
            let constraint = ConstraintRecord {
                fixed: vec!["C1".into(), "C2".into(), "C3".into()],
                solved: vec!["E".into()],
                ..Default::default()
            };
            push_or_note(out, check_solution(4, m, alpha, c.clone(), *e, &branch, constraint));
        }
    } else {
        out.diagnostics
            .push("supplied C_3 is nonzero, skipping the C_3 = 0 family".into());
    }
    // quartic blocks admit a nonzero-C_3 pair when C_2 < 0
    if m == 4 {
        let radicand = -(27.0 / 14.0) * c2 * (c1.powi(3) + 16.0 / 49.0 * c2 * c2);
        if radicand > 0.0 {
            let e = 40.0 * c2 / (21.0 * c1);
            for (sign, tag) in [(1.0, "c3plus"), (-1.0, "c3minus")] {
                let c3 = sign * radicand.sqrt();
                if !matches_known(c3, known_c3) {
                    out.diagnostics
                        .push(format!("supplied C_3 is off the {tag} branch value {c3:.12e}"));
                    continue;
                }
                let c = CasimirSet::from_values(4, vec![c1, c2, c3])?;
                let constraint = ConstraintRecord {
                    fixed: vec!["C1".into(), "C2".into()],
                    solved: vec!["E".into(), "C3".into()],
                    ..Default::default()
                };
                push_or_note(out, check_solution(4, 4, alpha, c, e, tag, constraint));
            }
        } else {
            out.diagnostics
                .push("nonzero-C_3 pair needs C_2 < 0, skipped".into());
        }
    }
    Ok(())
}

fn octic_branches(
    m: usize,
    alpha: f64,
    c1: f64,
    c2: f64,
    known: &[Option<f64>],
    out: &mut SolveOutcome,
) -> Result<()> {
    let (known_c3, known_c4) = (known[0], known[1]);
    match m {
        0 => {
            // ground state of the block: E = 0, no Casimir constraints
            let c = CasimirSet::from_values(
                5,
                vec![c1, c2, free_or(known_c3, 0.0), free_or(known_c4, 0.0)],
            )?;
            let constraint = ConstraintRecord {
                fixed: vec!["C1".into(), "C2".into()],
                solved: vec!["E".into()],
                free: vec!["C3".into(), "C4".into()],
                ..Default::default()
            };
            push_or_note(out, check_solution(5, 0, alpha, c, 0.0, "main", constraint));
        }
        1 => {
            // needs C_2 = 0 and C_4 = 0; C_3 stays free and sets the energy
            if c2.abs() > CASIMIR_MATCH_TOL * 1.0f64.max(c1.abs()) {
                out.diagnostics
                    .push("octic M = 1 family needs C_2 = 0, skipped".into());
                return Ok(());
            }
            if !matches_known(0.0, known_c4) {
                out.diagnostics
                    .push("octic M = 1 family needs C_4 = 0, skipped".into());
                return Ok(());
            }
            let c3 = free_or(known_c3, 0.0);
            let c = CasimirSet::from_values(5, vec![c1, 0.0, c3, 0.0])?;
            let e = 1.5 * c3 / (c1 * c1);
            let constraint = ConstraintRecord {
                fixed: vec!["C1".into(), "C2".into(), "C4".into()],
                solved: vec!["E".into()],
                free: vec!["C3".into()],
                ..Default::default()
            };
            push_or_note(out, check_solution(5, 1, alpha, c, e, "main", constraint));
        }
        2 => {
            if c2 == 0.0 {
                return Err(QesError::NoSolution(
                    "octic M = 2 family needs C_2 != 0".into(),
                ));
            }
            let c3 = -c1.powi(4) / (12.0 * c2);
            let c4 = 1.5 * c2 * c2;
            let e = -c1 * c1 / (4.0 * c2);
            if !matches_known(c3, known_c3) || !matches_known(c4, known_c4) {
                out.diagnostics
                    .push("supplied higher Casimirs are off the octic M = 2 family".into());
                return Ok(());
            }
            let c = CasimirSet::from_values(5, vec![c1, c2, c3, c4])?;
            let constraint = ConstraintRecord {
                fixed: vec!["C1".into(), "C2".into()],
                solved: vec!["E".into(), "C3".into(), "C4".into()],
                ..Default::default()
            };
            push_or_note(out, check_solution(5, 2, alpha, c, e, "main", constraint));
        }
        _ => unreachable!(),
    }
    Ok(())
}

fn decatic_branches(
    m: usize,
    alpha: f64,
    c1: f64,
    c2: f64,
    known: &[Option<f64>],
    out: &mut SolveOutcome,
) -> Result<()> {
    let (known_c3, known_c4, known_c5) = (known[0], known[1], known[2]);
    // every catalogued decatic family sits on C_3 = C_5 = 0
    if m > 0 && (!matches_known(0.0, known_c3) || !matches_known(0.0, known_c5)) {
        out.diagnostics
            .push("decatic families need C_3 = C_5 = 0, skipped".into());
        return Ok(());
    }
    let fixed = vec!["C1".into(), "C2".into(), "C3".into(), "C5".into()];
    match m {
        0 => {
            let c = CasimirSet::from_values(
                6,
                vec![
                    c1,
                    c2,
                    free_or(known_c3, 0.0),
                    free_or(known_c4, 0.0),
                    free_or(known_c5, 0.0),
                ],
            )?;
            let constraint = ConstraintRecord {
                fixed: vec!["C1".into(), "C2".into()],
                solved: vec!["E".into()],
                free: vec!["C3".into(), "C4".into(), "C5".into()],
                ..Default::default()
            };
            push_or_note(out, check_solution(6, 0, alpha, c, 0.0, "main", constraint));
        }
        1 => {
            if c2.abs() > CASIMIR_MATCH_TOL * 1.0f64.max(c1.abs()) {
                out.diagnostics
                    .push("decatic M = 1 family needs C_2 = 0, skipped".into());
                return Ok(());
            }
            let c4 = free_or(known_c4, 0.0);
            let c = CasimirSet::from_values(6, vec![c1, 0.0, 0.0, c4, 0.0])?;
            let e = 8.0 * c4 / (5.0 * c1.powi(3));
            let constraint = ConstraintRecord {
                fixed: fixed.clone(),
                solved: vec!["E".into()],
                free: vec!["C4".into()],
                ..Default::default()
            };
            push_or_note(out, check_solution(6, 1, alpha, c, e, "main", constraint));
        }
        2 | 3 | 5 => {
            if c2 == 0.0 {
                return Err(QesError::NoSolution(format!(
                    "decatic M = {m} family needs C_2 != 0"
                )));
            }
            let (c4, e) = match m {
                2 => (
                    -c1.powi(5) / (16.0 * c2) + 0.8 * c2 * c2,
                    -c1 * c1 / (5.0 * c2) - 16.0 * c2 * c2 / (25.0 * c1.powi(3)),
                ),
                3 => (
                    -c1.powi(5) / (8.0 * c2) + 0.8 * c2 * c2,
                    -3.0 * c1 * c1 / (5.0 * c2) + 16.0 * c2 * c2 / (25.0 * c1.powi(3)),
                ),
                _ => (-c1.powi(5) / (4.0 * c2) + 0.5 * c2 * c2, -2.0 * c1 * c1 / c2),
            };
            if !matches_known(c4, known_c4) {
                out.diagnostics
                    .push(format!("supplied C_4 is off the decatic M = {m} family"));
                return Ok(());
            }
            let c = CasimirSet::from_values(6, vec![c1, c2, 0.0, c4, 0.0])?;
            let constraint = ConstraintRecord {
                fixed,
                solved: vec!["E".into(), "C4".into()],
                ..Default::default()
            };
            push_or_note(out, check_solution(6, m, alpha, c, e, "main", constraint));
        }
        4 => {
            if c2 == 0.0 {
                return Err(QesError::NoSolution(
                    "decatic M = 4 family needs C_2 != 0".into(),
                ));
            }
            let d = 2025.0 * c1.powi(10) * c2 * c2 - 1920.0 * c1.powi(5) * c2.powi(5)
                + 4096.0 * c2.powi(8);
            if d < 0.0 {
                out.diagnostics
                    .push("decatic M = 4 discriminant is negative, skipped".into());
                return Ok(());
            }
            let sq = d.sqrt();
            for (sign, tag) in [(1.0, "upper"), (-1.0, "lower")] {
                // E takes +sqrt with the C_4 branch taking -sqrt, and vice versa
                let c4 = (320.0 * c2.powi(4) - 135.0 * c1.powi(5) * c2 - sign * sq)
                    / (480.0 * c2 * c2);
                let e = (-15.0 * c1.powi(5) * c2 + sign * sq) / (50.0 * c1.powi(3) * c2 * c2);
                if !matches_known(c4, known_c4) {
                    out.diagnostics
                        .push(format!("supplied C_4 is off the decatic M = 4 {tag} branch"));
                    continue;
                }
                let c = CasimirSet::from_values(6, vec![c1, c2, 0.0, c4, 0.0])?;
                let constraint = ConstraintRecord {
                    fixed: fixed.clone(),
                    solved: vec!["E".into(), "C4".into()],
                    ..Default::default()
                };
                push_or_note(out, check_solution(6, 4, alpha, c, e, tag, constraint));
            }
        }
        _ => unreachable!(),
    }
    Ok(())
}

/// Options for the seeded generic solver.
#[derive(Clone, Debug)]
pub struct GenericOptions {
    /// Log-spaced magnitudes per sign on each axis (plus a zero seed).
    pub magnitudes_per_sign: usize,
    /// Hard cap on the number of grid seeds; larger grids are strided.
    pub max_seeds: usize,
    pub max_iter: usize,
}

impl Default for GenericOptions {
    fn default() -> Self {
        GenericOptions {
            magnitudes_per_sign: 16,
            max_seeds: 4096,
            max_iter: 60,
        }
    }
}

/// Solve the leftover system with `E` and the `None` entries of
/// `fixed_rest` (covering `C_3..C_(N-1)`) as unknowns.
///
/// `extra_seeds` entries are full unknown vectors `(E, C...)` tried in
/// addition to the deterministic grid. Solutions are deduplicated,
/// re-checked against all recursion rows and sorted by energy.
pub fn solve_generic(
    n: usize,
    m: usize,
    c1: f64,
    c2: f64,
    fixed_rest: &[Option<f64>],
    extra_seeds: &[Vec<f64>],
    opts: &GenericOptions,
) -> Result<SolveOutcome> {
    if !(c1 > 0.0) {
        return Err(QesError::InvalidParameter("C_1 must be positive".into()));
    }
    if n < 3 || fixed_rest.len() != n.saturating_sub(3) {
        return Err(QesError::DimensionMismatch(format!(
            "expected {} optional higher Casimirs for N = {n}",
            n.saturating_sub(3)
        )));
    }
    let alpha = alpha_for(n, m)?;
    let unknown_idx: Vec<usize> = fixed_rest
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.is_none().then_some(i))
        .collect();
    let dim = 1 + unknown_idx.len();
    let assemble = |u: &[f64]| -> CasimirSet {
        let mut c = vec![c1, c2];
        c.extend(fixed_rest.iter().map(|v| v.unwrap_or(0.0)));
        for (j, &i) in unknown_idx.iter().enumerate() {
            c[2 + i] = u[1 + j];
        }
        CasimirSet::from_values(n, c).expect("C_1 checked above")
    };
    let mut out = SolveOutcome::default();

    if dim == 1 {
        let c = assemble(&[0.0]);
        let roots = poly_energy_roots(n, m, &c)?;
        if roots.is_empty() {
            out.diagnostics
                .push("no real energy zeroes the leftover rows".into());
        }
        for (i, e) in roots.iter().enumerate() {
            let constraint = ConstraintRecord {
                fixed: (1..n).map(|k| format!("C{k}")).collect(),
                solved: vec!["E".into()],
                ..Default::default()
            };
            push_or_note(
                &mut out,
                check_solution(n, m, alpha, c.clone(), *e, &format!("root{i}"), constraint),
            );
        }
        return Ok(out);
    }

    // residual map on the unknown vector
    let f = |u: &[f64]| -> Option<Vec<f64>> {
        let c = assemble(u);
        leftover_residuals(n, m, &c, u[0]).ok()
    };

    let mut axis = vec![0.0f64];
    for i in 0..opts.magnitudes_per_sign {
        let mag = 10f64.powf(-2.0 + 4.0 * i as f64 / (opts.magnitudes_per_sign - 1) as f64);
        axis.push(mag);
        axis.push(-mag);
    }
    let per = axis.len();
    let total = per.pow(dim as u32);
    let stride = total.div_ceil(opts.max_seeds).max(1);
    let mut found: Vec<Vec<f64>> = Vec::new();
    let mut seed_vec = |idx: usize| -> Vec<f64> {
        let mut rem = idx;
        (0..dim)
            .map(|_| {
                let v = axis[rem % per];
                rem /= per;
                v
            })
            .collect()
    };
    let mut seeds: Vec<Vec<f64>> = (0..total).step_by(stride).map(&mut seed_vec).collect();
    seeds.extend_from_slice(extra_seeds);

    for seed in seeds {
        if let Some(root) = gauss_newton(&f, &seed, opts.max_iter) {
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

    for root in found {
        let c = assemble(&root);
        let degenerate = jacobian(&f, &root)
            .map(|j| {
                let svd = j.svd(false, false);
                let smax = svd.singular_values.max();
                svd.singular_values.min() <= 1e-8 * smax.max(1.0)
            })
            .unwrap_or(true);
        let idx = out.solutions.len();
        let constraint = ConstraintRecord {
            fixed: {
                let mut v = vec!["C1".into(), "C2".into()];
                v.extend(fixed_rest.iter().enumerate().filter_map(|(i, val)| {
                    val.is_some().then(|| format!("C{}", i + 3))
                }));
                v
            },
            solved: {
                let mut v = vec!["E".into()];
                v.extend(unknown_idx.iter().map(|i| format!("C{}", i + 3)));
                v
            },
            degenerate,
            ..Default::default()
        };
        push_or_note(
            &mut out,
            check_solution(n, m, alpha, c, root[0], &format!("root{idx}"), constraint),
        );
    }
    if out.solutions.is_empty() && out.diagnostics.is_empty() {
        out.diagnostics.push("no seed converged to a root".into());
    }
    Ok(out)
}

pub(crate) fn jacobian<F>(f: &F, u: &[f64]) -> Option<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Option<Vec<f64>>,
{
    let base = f(u)?;
    let rows = base.len();
    let mut j = DMatrix::<f64>::zeros(rows, u.len());
    for i in 0..u.len() {
        let h = 1e-6 * u[i].abs().max(1.0);
        let mut up = u.to_vec();
        up[i] += h;
        let mut dn = u.to_vec();
        dn[i] -= h;
        let (fu, fd) = (f(&up)?, f(&dn)?);
        for r in 0..rows {
            j[(r, i)] = (fu[r] - fd[r]) / (2.0 * h);
        }
    }
    Some(j)
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Damped Gauss-Newton on the (possibly overdetermined) leftover system.
pub(crate) fn gauss_newton<F>(f: &F, seed: &[f64], max_iter: usize) -> Option<Vec<f64>>
where
    F: Fn(&[f64]) -> Option<Vec<f64>>,
{
    let mut u = seed.to_vec();
    let mut fv = f(&u)?;
    let mut norm = inf_norm(&fv);
    for _ in 0..max_iter {
        if !norm.is_finite() {
            return None;
        }
        if norm <= 1e-12 {
            return Some(u);
        }
        let j = jacobian(f, &u)?;
        let jt = j.transpose();
        let g = &jt * DMatrix::from_column_slice(fv.len(), 1, &fv);
        let h0 = &jt * &j;
        let mut lambda = 0.0f64;
        let mut stepped = false;
        for _ in 0..10 {
            let mut h = h0.clone();
            for i in 0..h.nrows() {
                h[(i, i)] += lambda;
            }
            if let Some(delta) = h.lu().solve(&g) {
                let cand: Vec<f64> = u.iter().zip(delta.iter()).map(|(a, d)| a - d).collect();
                if let Some(fc) = f(&cand) {
                    let nc = inf_norm(&fc);
                    if nc < norm {
                        u = cand;
                        fv = fc;
                        norm = nc;
                        stepped = true;
                        break;
                    }
                }
            }
            lambda = if lambda == 0.0 { 1e-10 } else { lambda * 100.0 };
        }
        if !stepped {
            break;
        }
    }
    (norm <= 1e-12).then_some(u)
}

/// The zero-energy families: with all higher Casimirs vanishing and
/// `beta_1 = (N-1)!`, rows pair up into the two-term relation
/// `a_(m-N) = -((N-1)!/2) m(m-1)/(N+M-m) C_1^(N-1) a_m`,
/// which closes exactly when `M = kN` or `M = kN + 1`.
pub fn solve_zero_energy(n: usize, m: usize) -> Result<QesSolution> {
    if n < 2 {
        return Err(QesError::Unsupported("zero-energy families need N >= 2".into()));
    }
    if m % n > 1 {
        return Err(QesError::ZeroEnergyOrder { n, m });
    }
    let b1 = factorial(n - 1);
    let mut beta = vec![0.0; n];
    beta[0] = b1;
    let betas = BetaVector::new(beta)?;
    let casimirs = casimir_set(&betas);
    let alpha = if n == 2 {
        -1.0 - 2.0 * m as f64
    } else {
        alpha_for(n, m)?
    };
    let mut a = vec![0.0; m + 1];
    a[m] = 1.0;
    let mut mm = m;
    while mm >= n {
        let t = mm as f64;
        a[mm - n] = -(b1 / 2.0) * t * (t - 1.0) / ((n + m) as f64 - t) * b1.powi(n as i32 - 1)
            * a[mm];
        mm -= n;
    }
    let coeffs = CoefficientVector(a);
    let res = if n == 2 {
        residual_vector_harmonic(b1, alpha, 0.0, &coeffs)
    } else {
        residual_vector(n, m, alpha, &casimirs, 0.0, &coeffs)?
    };
    let max = res.max_scaled();
    if max > residual_tolerance() {
        return Err(QesError::NoSolution(format!(
            "zero-energy family residual {max:.3e} exceeds tolerance"
        )));
    }
    Ok(QesSolution {
        n,
        m,
        alpha,
        energy: 0.0,
        coeffs,
        casimirs,
        betas: Some(betas),
        branch: "zero-energy".into(),
        constraint: ConstraintRecord {
            fixed: vec!["C1".into()],
            solved: vec!["a".into()],
            free: vec![],
            residual: max,
            degenerate: false,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Poly;
    use approx::assert_abs_diff_eq;

    #[test]
    fn casimir_inversion_round_trips() {
        let betas = BetaVector::new(vec![1.5, -0.7, 2.2, 0.9, -1.1, 0.4]).unwrap();
        let c = casimir_set(&betas);
        let back = betas_from_casimirs(&c, betas.get(2)).unwrap();
        for k in 1..=6 {
            assert_abs_diff_eq!(back.get(k), betas.get(k), epsilon = 1e-10);
        }
        let again = casimir_set(&back);
        for k in 1..=5 {
            assert_abs_diff_eq!(again.get(k), c.get(k), epsilon = 1e-10);
        }
    }

    #[test]
    fn casimir_inversion_matches_quoted_sextic_labels() {
        // C = (6, -3.2, 0) with beta_2 = 2 pins beta_3 = -0.2 and
        // beta_4 = beta_2 beta_3 / beta_1 - beta_2^3 / (3 beta_1^2)
        let c = CasimirSet::from_values(4, vec![6.0, -3.2, 0.0]).unwrap();
        let betas = betas_from_casimirs(&c, 2.0).unwrap();
        assert_abs_diff_eq!(betas.get(3), -0.2, epsilon = 1e-14);
        let expect = 2.0 * -0.2 / 6.0 - 8.0 / (3.0 * 36.0);
        assert_abs_diff_eq!(betas.get(4), expect, epsilon = 1e-14);
    }

    #[test]
    fn harmonic_ladder() {
        for (alpha, beta2) in [(0.0, 0.0), (-1.0, 0.7)] {
            let betas = BetaVector::new(vec![1.0, beta2]).unwrap();
            for m in 0..6 {
                let s = solve_harmonic(m, alpha, betas.clone()).unwrap();
                assert_abs_diff_eq!(s.energy, 2.0 * (0.5 + m as f64 + alpha / 2.0), epsilon = 1e-12);
                assert!(s.residual().unwrap().max_scaled() < 1e-12);
                // only every other coefficient is populated
                for (k, &a) in s.coeffs.as_slice().iter().enumerate() {
                    if (m - k) % 2 == 1 {
                        assert_eq!(a, 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn sextic_closed_forms() {
        let (c1, c2) = (1.7, -0.9);
        let rest = [None];
        let s1 = solve_catalogued(4, 1, c1, c2, &rest).unwrap();
        assert_eq!(s1.solutions.len(), 1);
        assert_abs_diff_eq!(s1.solutions[0].energy, 4.0 * c2 / (3.0 * c1), epsilon = 1e-10);
        // M = 1 kills the constant coefficient
        assert_abs_diff_eq!(s1.solutions[0].coeffs.get(0), 0.0, epsilon = 1e-12);

        let s2 = solve_catalogued(4, 2, c1, c2, &rest).unwrap();
        let r = c2 / c1;
        let disc = (r * r + c1 / 3.0).sqrt();
        assert_eq!(s2.solutions.len(), 2);
        assert_abs_diff_eq!(s2.solutions[0].energy, 2.0 / 3.0 * r - 2.0 * disc, epsilon = 1e-9);
        assert_abs_diff_eq!(s2.solutions[1].energy, 2.0 / 3.0 * r + 2.0 * disc, epsilon = 1e-9);
        // a_0 = 4 C_2 - 1.5 C_1 E on both branches
        for s in &s2.solutions {
            assert_abs_diff_eq!(
                s.coeffs.get(0),
                4.0 * c2 - 1.5 * c1 * s.energy,
                epsilon = 1e-9
            );
        }

        let s3 = solve_catalogued(4, 3, c1, c2, &rest).unwrap();
        let disc3 = (r * r + c1).sqrt();
        assert_eq!(s3.solutions.len(), 2);
        assert_abs_diff_eq!(s3.solutions[0].energy, 2.0 * r - 2.0 * disc3, epsilon = 1e-9);
        assert_abs_diff_eq!(s3.solutions[1].energy, 2.0 * r + 2.0 * disc3, epsilon = 1e-9);
    }

    #[test]
    fn sextic_quintic_block_matches_quoted_cubic() {
        let (c1, c2) = (1.7, -0.9);
        let r = c2 / c1;
        // (E + 4r/3)(E - 8r/3)(E - 20r/3) - (40/3)C1(E + 4r/3) - 8C1(E - 20r/3)
        let lin = |a: f64| Poly::new(vec![a, 1.0]);
        let cubic = lin(4.0 * r / 3.0)
            .mul(&lin(-8.0 * r / 3.0))
            .mul(&lin(-20.0 * r / 3.0))
            .sub(&lin(4.0 * r / 3.0).scale(40.0 / 3.0 * c1))
            .sub(&lin(-20.0 * r / 3.0).scale(8.0 * c1));
        let mut want = cubic.real_roots(1e-12);
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let got = solve_catalogued(4, 5, c1, c2, &[None]).unwrap();
        assert_eq!(got.solutions.len(), want.len());
        for (s, w) in got.solutions.iter().zip(&want) {
            assert_abs_diff_eq!(s.energy, *w, epsilon = 1e-8);
        }
    }

    #[test]
    fn sextic_nonzero_c3_pair() {
        let out = solve_catalogued(4, 4, 1.0, -1.0, &[None]).unwrap();
        let pair: Vec<&QesSolution> = out
            .solutions
            .iter()
            .filter(|s| s.branch.starts_with("c3"))
            .filter(|s| s.branch == "c3plus" || s.branch == "c3minus")
            .collect();
        assert_eq!(pair.len(), 2);
        let want_c3 = (27.0_f64 / 14.0 * (1.0 + 16.0 / 49.0)).sqrt();
        for s in pair {
            assert_abs_diff_eq!(s.energy, -40.0 / 21.0, epsilon = 1e-12);
            assert_abs_diff_eq!(s.casimirs.get(3).abs(), want_c3, epsilon = 1e-12);
            assert!(s.constraint.residual < 1e-10);
        }
        // and the C_3 = 0 cubic contributes three real roots
        let zero: Vec<&QesSolution> = out
            .solutions
            .iter()
            .filter(|s| s.branch.starts_with("c3zero"))
            .collect();
        assert_eq!(zero.len(), 3);
    }

    #[test]
    fn octic_families() {
        // M = 1: C_2 = C_4 = 0, E = 3 C_3 / (2 C_1^2)
        let out = solve_catalogued(5, 1, 2.0, 0.0, &[Some(-1.2), None]).unwrap();
        assert_eq!(out.solutions.len(), 1);
        let s = &out.solutions[0];
        assert_abs_diff_eq!(s.energy, 1.5 * -1.2 / 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.coeffs.get(0), 0.0, epsilon = 1e-12);
        // M = 2 pins C_3, C_4 and E
        let (c1, c2) = (0.8, 1.1);
        let out = solve_catalogued(5, 2, c1, c2, &[None, None]).unwrap();
        assert_eq!(out.solutions.len(), 1);
        let s = &out.solutions[0];
        assert_abs_diff_eq!(s.casimirs.get(3), -c1.powi(4) / (12.0 * c2), epsilon = 1e-12);
        assert_abs_diff_eq!(s.casimirs.get(4), 1.5 * c2 * c2, epsilon = 1e-12);
        assert_abs_diff_eq!(s.energy, -c1 * c1 / (4.0 * c2), epsilon = 1e-12);
        assert_abs_diff_eq!(s.coeffs.get(0), 6.0 * c2, epsilon = 1e-10);
        assert_abs_diff_eq!(s.coeffs.get(1), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn decatic_families() {
        let (c1, c2) = (0.5, -0.05);
        let rest = [None, None, None];
        for m in [2usize, 3, 5] {
            let out = solve_catalogued(6, m, c1, c2, &rest).unwrap();
            assert_eq!(out.solutions.len(), 1, "M = {m}");
            assert!(out.solutions[0].constraint.residual < 1e-10);
        }
        let out = solve_catalogued(6, 4, c1, c2, &rest).unwrap();
        assert_eq!(out.solutions.len(), 2);
        let hi = out.solutions.last().unwrap();
        // a_2 = 16 C_2 a_4 on both branches
        for s in &out.solutions {
            assert_abs_diff_eq!(s.coeffs.get(2), 16.0 * c2, epsilon = 1e-9);
        }
        // the upper branch reproduces the quoted label value beta_5 ~ 0.9499
        assert_abs_diff_eq!(hi.casimirs.get(4) / c1.powi(3), 0.9499, epsilon = 1e-3);

        // quoted single-eigenvalue family: C = (1, -1) gives E = 2
        let out = solve_catalogued(6, 5, 1.0, -1.0, &rest).unwrap();
        assert_eq!(out.solutions.len(), 1);
        assert_abs_diff_eq!(out.solutions[0].energy, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out.solutions[0].casimirs.get(4), 0.75, epsilon = 1e-12);
    }

    #[test]
    fn generic_single_unknown_matches_catalogue() {
        let (c1, c2) = (1.7, -0.9);
        let cat = solve_catalogued(4, 2, c1, c2, &[None]).unwrap();
        let gen = solve_generic(4, 2, c1, c2, &[Some(0.0)], &[], &GenericOptions::default())
            .unwrap();
        assert_eq!(gen.solutions.len(), cat.solutions.len());
        for (g, c) in gen.solutions.iter().zip(&cat.solutions) {
            assert_abs_diff_eq!(g.energy, c.energy, epsilon = 1e-9);
        }
    }

    #[test]
    fn generic_quartic_order_block() {
        // N = 3 has no leftover freedom beyond E; a cubic block gives
        // real roots whose residuals vanish
        let out = solve_generic(3, 2, 1.0, 0.5, &[], &[], &GenericOptions::default()).unwrap();
        assert!(!out.solutions.is_empty());
        for s in &out.solutions {
            assert!(s.constraint.residual < 1e-10);
            // top rule for N = 3: a_(M-1) = -E a_M
            assert_abs_diff_eq!(s.coeffs.get(1), -s.energy, epsilon = 1e-9);
        }
    }

    #[test]
    fn generic_two_unknowns_finds_nonzero_c3_pair() {
        let opts = GenericOptions {
            magnitudes_per_sign: 8,
            max_seeds: 1200,
            ..Default::default()
        };
        let out = solve_generic(4, 4, 1.0, -1.0, &[None], &[], &opts).unwrap();
        let want_c3 = (27.0_f64 / 14.0 * (1.0 + 16.0 / 49.0)).sqrt();
        let hits = out
            .solutions
            .iter()
            .filter(|s| {
                (s.energy + 40.0 / 21.0).abs() < 1e-6
                    && (s.casimirs.get(3).abs() - want_c3).abs() < 1e-6
            })
            .count();
        assert_eq!(hits, 2, "branches found: {:?}", out.solutions.iter().map(|s| (s.energy, s.casimirs.get(3))).collect::<Vec<_>>());
    }

    #[test]
    fn zero_energy_families() {
        let s = solve_zero_energy(4, 4).unwrap();
        assert_abs_diff_eq!(s.coeffs.get(0), -1944.0, epsilon = 1e-9);
        assert_eq!(s.energy, 0.0);
        assert!(solve_zero_energy(4, 2).is_err());
        assert!(solve_zero_energy(4, 3).is_err());
        for (n, m) in [(3, 3), (4, 5), (5, 5), (5, 6), (6, 1), (2, 4)] {
            let s = solve_zero_energy(n, m).unwrap();
            assert!(
                s.constraint.residual < 1e-10,
                "N = {n}, M = {m}: {}",
                s.constraint.residual
            );
        }
    }

    #[test]
    fn realization_round_trip() {
        let out = solve_catalogued(4, 2, 1.7, -0.9, &[None]).unwrap();
        let s = out.solutions[0].clone().realize(0.4).unwrap();
        let betas = s.betas.clone().unwrap();
        let c = casimir_set(&betas);
        for k in 1..=3 {
            assert_abs_diff_eq!(c.get(k), s.casimirs.get(k), epsilon = 1e-10);
        }
        // attaching mismatched labels is rejected
        let bad = BetaVector::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(out.solutions[0].clone().with_betas(bad).is_err());
    }
}
