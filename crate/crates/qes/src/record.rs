//! Versioned JSON and CSV persistence for solved eigenpairs.
//!
//! A solved branch travels as one [`SolutionRecord`]: a self-describing JSON
//! object carrying the problem labels, the eigenpair, an optional grid-oracle
//! report, and provenance. Records are designed to be byte-stable across runs
//! with identical inputs:
//!
//! * every float is printed as `{:.16e}` (17 significant digits, enough to
//!   round-trip any f64 exactly),
//! * struct fields serialize in a fixed order and nothing is omitted,
//! * the provenance timestamp honors `SOURCE_DATE_EPOCH` when set.
//!
//! The schema carries a version tag (`"qes-record/1"`) so future layout
//! changes stay detectable. CSV output uses a `.` decimal point, `,` as the
//! separator, and a header row.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::io;
use std::path::Path;

use crate::group::{casimir_set, BetaVector, CasimirSet};
use crate::recursion::{alpha_for, CoefficientVector};
use crate::solver::{ConstraintRecord, QesSolution};
use crate::symmetry::{symmetrize, Parity, ParitySolution};
use crate::{oracle::OracleReport, QesError, Result};

/// Version tag written into (and required from) every solution record.
pub const SCHEMA_VERSION: &str = "qes-record/1";

/// Version tag for the electromagnetic companion record.
pub const EM_SCHEMA_VERSION: &str = "qes-em-record/1";

/// The potential and block labels a record's solutions belong to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemBlock {
    pub n: usize,
    pub m: usize,
    pub alpha: f64,
    /// Representation labels `beta_1..beta_N`.
    pub betas: Vec<f64>,
    /// Invariants `C_1..C_(N-1)` of those labels.
    pub casimirs: Vec<f64>,
    /// True when the potential is the |x|-symmetrized one.
    pub symmetrized: bool,
    /// Parity sector for symmetrized records ("even"/"odd"), else `None`.
    pub parity: Option<String>,
}

/// One eigenpair: energy, block coefficients, branch tag, node count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionEntry {
    /// Which closed-form or numeric branch produced this pair.
    pub branch: String,
    pub energy: f64,
    /// Block coefficients `a_0..a_M` of the polynomial factor in `X_2`.
    pub coefficients: Vec<f64>,
    /// Sign changes of the analytic eigenfunction over the sampled line.
    pub node_count: usize,
    /// Matching-condition value at `x = 0` for symmetrized records.
    pub continuity_residual: Option<f64>,
}

/// Grid-oracle outcome attached to a record by `verify` (or `solve` when the
/// oracle was run at solve time).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleBlock {
    pub grid_half_width: f64,
    pub grid_steps: usize,
    pub matched_index: usize,
    pub matched_eigenvalue: f64,
    /// |analytic E - matched grid eigenvalue|.
    pub abs_delta: f64,
    pub residual_norm: f64,
    pub node_count: usize,
    pub analytic_nodes: usize,
    pub wall_warning: bool,
    pub richardson_ratio: Option<f64>,
    pub normalization: String,
}

impl From<&OracleReport> for OracleBlock {
    fn from(r: &OracleReport) -> Self {
        OracleBlock {
            grid_half_width: r.grid_half_width,
            grid_steps: r.grid_steps,
            matched_index: r.matched_index,
            matched_eigenvalue: r.eigenvalues[r.matched_index],
            abs_delta: r.matched_delta.abs(),
            residual_norm: r.residual_norm,
            node_count: r.node_count,
            analytic_nodes: r.analytic_nodes,
            wall_warning: r.wall_warning,
            richardson_ratio: r.richardson_ratio,
            normalization: r.normalization.to_string(),
        }
    }
}

/// How and when a record was produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// The command line that produced the record.
    pub command: String,
    /// Unix seconds; `SOURCE_DATE_EPOCH` wins over the wall clock.
    pub timestamp: u64,
}

/// One persisted solution branch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub schema_version: String,
    pub problem: ProblemBlock,
    pub solutions: Vec<SolutionEntry>,
    pub oracle: Option<OracleBlock>,
    pub provenance: Provenance,
}

/// Electric and magnetic field vectors sampled at one point on the x axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub x: f64,
    pub e_field: [f64; 3],
    pub b_field: [f64; 3],
}

/// Companion record for the electromagnetic reading: the reduced 1-D record
/// plus the transverse momenta, the lifted 3-D eigenvalue, and field samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmRecord {
    pub schema_version: String,
    pub p_y: f64,
    pub p_z: f64,
    /// 3-D eigenvalue for this branch: reduced E plus `p_z^2`.
    pub energy_3d: f64,
    /// Scaled defect of the full 3-D eigenvalue equation at the plane-wave
    /// ansatz, assembled without using the reduction.
    pub residual_3d: f64,
    pub fields: Vec<FieldSample>,
    pub record: SolutionRecord,
}

impl ProblemBlock {
    /// Capture the labels of a solved eigenpair. The solution must carry
    /// realized labels (a `beta_2` choice), since records always persist the
    /// full label vector.
    pub fn from_solution(
        sol: &QesSolution,
        symmetrized: bool,
        parity: Option<Parity>,
    ) -> Result<Self> {
        let betas = sol.betas.as_ref().ok_or_else(|| {
            QesError::InvalidParameter(
                "solution has no realized labels; choose beta_2 before recording".into(),
            )
        })?;
        Ok(ProblemBlock {
            n: sol.n,
            m: sol.m,
            alpha: sol.alpha,
            betas: betas.as_slice().to_vec(),
            casimirs: sol.casimirs.values().to_vec(),
            symmetrized,
            parity: parity.map(|p| p.label().to_string()),
        })
    }

    /// Validate internal consistency: label lengths, the quantized coupling
    /// for `n >= 3`, and that the stored invariants match the stored labels.
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(QesError::Record("record has n < 2".into()));
        }
        if self.betas.len() != self.n {
            return Err(QesError::Record(format!(
                "record carries {} labels for n = {}",
                self.betas.len(),
                self.n
            )));
        }
        if self.casimirs.len() != self.n - 1 {
            return Err(QesError::Record(format!(
                "record carries {} invariants for n = {}",
                self.casimirs.len(),
                self.n
            )));
        }
        if self.n >= 3 {
            let want = alpha_for(self.n, self.m)?;
            if (self.alpha - want).abs() > 1e-9 * (1.0 + want.abs()) {
                return Err(QesError::Record(format!(
                    "alpha {} is off the quantized ladder value {} for n = {}, m = {}",
                    self.alpha, want, self.n, self.m
                )));
            }
        }
        let betas = BetaVector::new(self.betas.clone())?;
        let c = casimir_set(&betas);
        for (k, (got, want)) in self.casimirs.iter().zip(c.values()).enumerate() {
            if (got - want).abs() > 1e-9 * (1.0 + want.abs()) {
                return Err(QesError::Record(format!(
                    "stored invariant C_{} = {} disagrees with the labels ({})",
                    k + 1,
                    got,
                    want
                )));
            }
        }
        if let Some(p) = &self.parity {
            p.parse::<Parity>()
                .map_err(|e| QesError::Record(e.to_string()))?;
            if !self.symmetrized {
                return Err(QesError::Record(
                    "parity sector set on an unsymmetrized record".into(),
                ));
            }
        } else if self.symmetrized {
            return Err(QesError::Record(
                "symmetrized record is missing its parity sector".into(),
            ));
        }
        Ok(())
    }

    /// Parsed parity sector, if the record is symmetrized.
    pub fn parity(&self) -> Result<Option<Parity>> {
        self.parity.as_deref().map(str::parse).transpose()
    }
}

impl SolutionRecord {
    /// Check the schema tag and per-block consistency.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(QesError::Record(format!(
                "unsupported schema version '{}' (expected '{}')",
                self.schema_version, SCHEMA_VERSION
            )));
        }
        self.problem.validate()?;
        if self.solutions.is_empty() {
            return Err(QesError::Record("record has no solutions".into()));
        }
        for entry in &self.solutions {
            if entry.coefficients.len() != self.problem.m + 1 {
                return Err(QesError::Record(format!(
                    "branch '{}' carries {} coefficients for m = {}",
                    entry.branch,
                    entry.coefficients.len(),
                    self.problem.m
                )));
            }
            if !entry.energy.is_finite() {
                return Err(QesError::Record(format!(
                    "branch '{}' has a non-finite energy",
                    entry.branch
                )));
            }
        }
        Ok(())
    }

    /// Rebuild solver-side eigenpairs from the persisted data. Symmetrized
    /// records come back as parity solutions with the matching condition
    /// recomputed from scratch; plain records yield the bare eigenpair.
    pub fn to_solutions(&self) -> Result<Vec<RebuiltSolution>> {
        self.validate()?;
        let betas = BetaVector::new(self.problem.betas.clone())?;
        let casimirs = CasimirSet::from_values(self.problem.n, self.problem.casimirs.clone())?;
        let parity = self.problem.parity()?;
        let mut out = Vec::with_capacity(self.solutions.len());
        for entry in &self.solutions {
            let base = QesSolution {
                n: self.problem.n,
                m: self.problem.m,
                alpha: self.problem.alpha,
                energy: entry.energy,
                coeffs: CoefficientVector(entry.coefficients.clone()),
                casimirs: casimirs.clone(),
                betas: Some(betas.clone()),
                branch: entry.branch.clone(),
                constraint: ConstraintRecord::default(),
            };
            let rebuilt = match parity {
                Some(p) => RebuiltSolution::Symmetrized(symmetrize(base, p)?),
                None => RebuiltSolution::Plain(base),
            };
            out.push(rebuilt);
        }
        Ok(out)
    }
}

/// A record entry mapped back onto solver types.
#[derive(Clone, Debug)]
pub enum RebuiltSolution {
    Plain(QesSolution),
    Symmetrized(ParitySolution),
}

impl RebuiltSolution {
    pub fn energy(&self) -> f64 {
        match self {
            RebuiltSolution::Plain(s) => s.energy,
            RebuiltSolution::Symmetrized(p) => p.base.energy,
        }
    }
}

/// Serialize one record as a single JSON line (no trailing newline), floats
/// in 17-significant-digit scientific notation.
pub fn to_json_line<T: Serialize>(record: &T) -> Result<String> {
    let mut buf = Vec::with_capacity(1024);
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFloats);
    record
        .serialize(&mut ser)
        .map_err(|e| QesError::Record(e.to_string()))?;
    String::from_utf8(buf).map_err(|e| QesError::Record(e.to_string()))
}

/// Parse and validate one record from a JSON line.
pub fn from_json_line(line: &str) -> Result<SolutionRecord> {
    let record: SolutionRecord =
        serde_json::from_str(line).map_err(|e| QesError::Record(e.to_string()))?;
    record.validate()?;
    Ok(record)
}

/// Read a stream of records, one JSON object per non-empty line.
pub fn read_records(path: &Path) -> Result<Vec<SolutionRecord>> {
    let text = std::fs::read_to_string(path)?;
    let mut records = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record = from_json_line(line)
            .map_err(|e| QesError::Record(format!("line {}: {}", idx + 1, e)))?;
        records.push(record);
    }
    if records.is_empty() {
        return Err(QesError::Record("no records in file".into()));
    }
    Ok(records)
}

/// Write records as a JSON-lines file.
pub fn write_records(path: &Path, records: &[SolutionRecord]) -> Result<()> {
    let mut out = String::new();
    for record in records {
        out.push_str(&to_json_line(record)?);
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Provenance timestamp: `SOURCE_DATE_EPOCH` when set (for reproducible
/// output), otherwise the wall clock.
pub fn timestamp_now() -> u64 {
    resolve_timestamp(std::env::var("SOURCE_DATE_EPOCH").ok().as_deref())
}

fn resolve_timestamp(source_date_epoch: Option<&str>) -> u64 {
    if let Some(raw) = source_date_epoch {
        if let Ok(seconds) = raw.trim().parse::<u64>() {
            return seconds;
        }
    }
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Write a CSV table: header row, `,` separator, `.` decimal point, floats
/// in the same 17-significant-digit notation as the JSON records.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        if row.len() != header.len() {
            return Err(QesError::DimensionMismatch(format!(
                "CSV row has {} cells under a {}-column header",
                row.len(),
                header.len()
            )));
        }
        for (i, value) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{value:.16e}");
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// JSON formatter that prints every float with 17 significant digits so that
/// parsing the text recovers the exact bit pattern.
struct SciFloats;

impl serde_json::ser::Formatter for SciFloats {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        write!(writer, "{value:.8e}")
    }
}
