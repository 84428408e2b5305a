//! End-to-end checks of the `qes` binary: records out of `solve`, replay
//! through `verify`, CSV export, the electromagnetic fiber command, exit
//! codes, and byte-stable output under `SOURCE_DATE_EPOCH`.

use std::path::Path;
use std::process::{Command, Output};

fn qes(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qes"))
        .args(args)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .output()
        .expect("binary runs")
}

fn stdout_lines(out: &Output) -> Vec<serde_json::Value> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).expect("stdout lines are JSON records"))
        .collect()
}

fn write_record(dir: &Path, name: &str, out: &Output) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, &out.stdout).unwrap();
    path
}

#[test]
fn solve_reports_the_sextic_double_well_eigenpair() {
    let out = qes(&["solve", "--n", "4", "--m", "1", "--beta", "6,2,-0.2,auto"]);
    assert_eq!(out.status.code(), Some(0));
    let recs = stdout_lines(&out);
    assert_eq!(recs.len(), 1);
    let rec = &recs[0];
    assert_eq!(rec["schema_version"], "qes-record/1");
    assert_eq!(rec["problem"]["n"], 4);
    assert_eq!(rec["problem"]["m"], 1);
    let betas: Vec<f64> = rec["problem"]["betas"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    // `auto` fixes the last label by C_3 = 0: beta_4 = -19/135.
    assert_eq!(&betas[..3], &[6.0, 2.0, -0.2]);
    assert!((betas[3] + 19.0 / 135.0).abs() < 1e-15);
    let energy = rec["solutions"][0]["energy"].as_f64().unwrap();
    assert!((energy + 32.0 / 45.0).abs() < 1e-12, "E = {energy}");
    assert_eq!(rec["solutions"][0]["node_count"], 1);
    assert_eq!(
        rec["provenance"]["command"],
        "qes solve --n 4 --m 1 --beta 6,2,-0.2,auto"
    );
    assert_eq!(rec["provenance"]["timestamp"], 1700000000u64);
}

#[test]
fn solve_by_invariants_realizes_labels() {
    let out = qes(&[
        "solve", "--n", "6", "--m", "5", "--casimir", "1,-1", "--beta2", "0",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let recs = stdout_lines(&out);
    assert_eq!(recs.len(), 1);
    let rec = &recs[0];
    // The quintic-order decatic family pins E = -2 C_1^2 / C_2 and
    // C_4 = -C_1^5/(4 C_2) + C_2^2/2.
    let energy = rec["solutions"][0]["energy"].as_f64().unwrap();
    assert!((energy - 2.0).abs() < 1e-12);
    let cs: Vec<f64> = rec["problem"]["casimirs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(cs.len(), 5);
    assert!((cs[0] - 1.0).abs() < 1e-15 && (cs[1] + 1.0).abs() < 1e-15);
    assert!((cs[3] - 0.75).abs() < 1e-12, "C_4 = {}", cs[3]);
}

#[test]
fn zero_energy_solves_members_and_rejects_outsiders() {
    let out = qes(&["solve", "--n", "4", "--m", "1", "--zero-energy"]);
    assert_eq!(out.status.code(), Some(0));
    let rec = &stdout_lines(&out)[0];
    assert_eq!(rec["solutions"][0]["energy"].as_f64().unwrap(), 0.0);
    assert_eq!(rec["solutions"][0]["node_count"], 1);

    // M must be a multiple of N or one above it; (5, 2) is neither.
    let bad = qes(&["solve", "--n", "5", "--m", "2", "--zero-energy"]);
    assert_eq!(bad.status.code(), Some(3));
    assert!(bad.stdout.is_empty());
}

#[test]
fn symmetrized_sector_records_parity_and_continuity() {
    let out = qes(&[
        "solve",
        "--n",
        "5",
        "--m",
        "2",
        "--symmetrized",
        "--parity",
        "odd",
        "--beta",
        "auto,2,auto,auto,0.5",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let recs = stdout_lines(&out);
    assert_eq!(recs.len(), 1);
    let rec = &recs[0];
    assert_eq!(rec["problem"]["symmetrized"], true);
    assert_eq!(rec["problem"]["parity"], "odd");
    // Odd gluing at (beta_2, beta_5) = (2, 1/2): beta_1 = 2 beta_2 beta_5
    // and E = -C_1^2 / (4 C_2) = 3/2.
    let betas: Vec<f64> = rec["problem"]["betas"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(betas[0], 2.0);
    let energy = rec["solutions"][0]["energy"].as_f64().unwrap();
    assert!((energy - 1.5).abs() < 1e-12);
    let cont = rec["solutions"][0]["continuity_residual"].as_f64().unwrap();
    assert!(cont.abs() < 1e-10);
}

#[test]
fn exit_codes_separate_usage_input_and_family_errors() {
    // Missing required argument: the parser owns this one.
    let usage = qes(&["solve", "--n", "4"]);
    assert_eq!(usage.status.code(), Some(2));

    // Parsable arguments but no way to pose the problem.
    let unposed = qes(&["solve", "--n", "4", "--m", "1"]);
    assert_eq!(unposed.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&unposed.stderr).contains("--beta"));

    // A family whose constraints reject the parameter point: the run
    // succeeds but reports that no branch survived.
    let empty = qes(&[
        "solve", "--n", "6", "--m", "1", "--casimir", "1,-0.5", "--beta2", "0",
    ]);
    assert_eq!(empty.status.code(), Some(2));
    assert!(empty.stdout.is_empty());
    assert!(String::from_utf8_lossy(&empty.stderr).contains("no solution"));
}

#[test]
fn verify_replays_records_against_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let solved = qes(&["solve", "--n", "4", "--m", "1", "--beta", "6,2,-0.2,auto"]);
    assert_eq!(solved.status.code(), Some(0));
    let record = write_record(dir.path(), "sextic.jsonl", &solved);
    let record = record.to_str().unwrap();

    let ok = qes(&["verify", "--record", record]);
    assert_eq!(
        ok.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&ok.stderr)
    );

    // A coarser grid and a hand-picked box still verify: the acceptance
    // threshold follows the mesh error model.
    let coarse = qes(&[
        "verify", "--record", record, "--grid-n", "800", "--box", "8",
    ]);
    assert_eq!(coarse.status.code(), Some(0));

    // Unreadable inputs are their own failure class.
    let missing = qes(&["verify", "--record", dir.path().join("nope.jsonl").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(4));
    let garbage_path = dir.path().join("garbage.jsonl");
    std::fs::write(&garbage_path, "not json\n").unwrap();
    let garbage = qes(&["verify", "--record", garbage_path.to_str().unwrap()]);
    assert_eq!(garbage.status.code(), Some(4));
}

#[test]
fn records_are_byte_stable_under_a_pinned_epoch() {
    let args = [
        "solve", "--n", "6", "--m", "5", "--casimir", "1,-1", "--beta2", "0",
    ];
    let first = qes(&args);
    let second = qes(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout, "records must not carry run noise");
}

#[test]
fn plot_data_exports_normalized_tables() {
    let dir = tempfile::tempdir().unwrap();
    let solved = qes(&["solve", "--n", "4", "--m", "1", "--beta", "6,2,-0.2,auto"]);
    let record = write_record(dir.path(), "sextic.jsonl", &solved);
    let out_dir = dir.path().join("plots");

    let plotted = qes(&[
        "plot-data",
        "--record",
        record.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--normalize",
        "10",
    ]);
    assert_eq!(
        plotted.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&plotted.stderr)
    );

    let table = |name: &str| -> Vec<(f64, f64)> {
        let text = std::fs::read_to_string(out_dir.join(name)).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("y,value"), "{name} header");
        lines
            .map(|l| {
                let (y, v) = l.split_once(',').unwrap();
                (y.parse().unwrap(), v.parse().unwrap())
            })
            .collect()
    };

    // 801 interior nodes of the uniform arctan grid, range strictly inside
    // (-pi/2, pi/2), potential finite everywhere on it.
    let pot = table("potential.csv");
    assert_eq!(pot.len(), 801);
    assert!(pot.first().unwrap().0 > -std::f64::consts::FRAC_PI_2);
    assert!(pot.last().unwrap().0 < std::f64::consts::FRAC_PI_2);
    assert!(pot.iter().all(|(_, v)| v.is_finite()));

    // The lone branch of this block: one file, one node, and the requested
    // square integral over y (Simpson on the same 801-point grid).
    let psis: Vec<_> = std::fs::read_dir(&out_dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.starts_with("psi_"))
        .collect();
    assert_eq!(psis.len(), 1, "{psis:?}");
    let psi = table(&psis[0]);
    assert_eq!(psi.len(), 801);
    let peak = psi.iter().fold(0.0f64, |a, (_, v)| a.max(v.abs()));
    let mut signs = 0;
    let mut last = 0.0f64;
    for &(_, v) in &psi {
        if v.abs() <= 1e-9 * peak {
            continue;
        }
        let s = v.signum();
        if last != 0.0 && s != last {
            signs += 1;
        }
        last = s;
    }
    assert_eq!(signs, 1, "an M = 1 state changes sign exactly once");
    let h = std::f64::consts::PI / 802.0;
    let simpson: f64 = psi
        .iter()
        .enumerate()
        .map(|(i, (_, v))| if i % 2 == 0 { 4.0 * v * v } else { 2.0 * v * v })
        .sum::<f64>()
        * h
        / 3.0;
    assert!(
        (simpson - 10.0).abs() < 1e-8,
        "square integral over y is {simpson}, wanted 10"
    );
}

#[test]
fn em_lifts_the_reduced_eigenvalue_exactly() {
    // beta_3 = -25/9 puts the cubic invariant at zero once the y-momentum
    // pins beta_4 = -1, so the reduced block is the closed-form M = 1 line.
    let out = qes(&[
        "em",
        "--n",
        "4",
        "--m",
        "1",
        "--beta",
        "6,2,-2.7777777777777777",
        "--py",
        "1",
        "--pz",
        "0.5",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let recs = stdout_lines(&out);
    assert_eq!(recs.len(), 1);
    let rec = &recs[0];
    assert_eq!(rec["schema_version"], "qes-em-record/1");
    assert_eq!(rec["p_y"].as_f64().unwrap(), 1.0);
    assert_eq!(rec["p_z"].as_f64().unwrap(), 0.5);

    let betas: Vec<f64> = rec["record"]["problem"]["betas"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(betas[3], -1.0, "the fiber must pin the top label to -p_y");

    let e1 = rec["record"]["solutions"][0]["energy"].as_f64().unwrap();
    let e3 = rec["energy_3d"].as_f64().unwrap();
    assert_eq!(e3, e1 + 0.25, "the lift adds p_z^2 with no extra rounding");
    assert!(rec["residual_3d"].as_f64().unwrap() < 1e-10);

    // Field samples: E is minus the gradient of the scalar part, B points
    // along z; both are polynomial in x and sampled on a fixed stencil.
    let fields = rec["fields"].as_array().unwrap();
    assert_eq!(fields.len(), 9);
    for f in fields {
        assert_eq!(f["b_field"][0].as_f64().unwrap(), 0.0);
        assert_eq!(f["b_field"][1].as_f64().unwrap(), 0.0);
    }
}
