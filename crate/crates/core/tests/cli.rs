use std::path::Path;
use std::process::{Command, Output};

use dho::csvio::Table;

fn dho(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dho")).args(args).output().unwrap()
}

fn table(out: &Output) -> Table {
    Table::read_from(out.stdout.as_slice()).unwrap()
}

#[test]
fn derive_lists_constants() {
    let out = dho(&["derive", "--gamma", "1.5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("quantum_regime=hyperbolic"));
    assert!(text.contains("gamma=1.500000000000e0"));
}

#[test]
fn exit_codes() {
    assert_eq!(dho(&["--m=-1", "derive"]).status.code(), Some(2));
    assert_eq!(dho(&["transitions", "closed", "--gamma", "3"]).status.code(), Some(2));
    assert_eq!(dho(&["transitions", "closed", "--l", "1"]).status.code(), Some(2));
    assert_eq!(dho(&["no-such-command"]).status.code(), Some(2));
    let leak = dho(&[
        "transitions",
        "ode",
        "--case",
        "c",
        "--truncation",
        "24",
        "--t-max",
        "30",
    ]);
    assert_eq!(leak.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&leak.stderr).contains("truncation leak"));
}

#[test]
fn odd_initial_level_keeps_parity() {
    let out = dho(&[
        "transitions",
        "ode",
        "--l",
        "5",
        "--t-max",
        "2",
        "--dt",
        "0.5",
        "--n-max",
        "11",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let t = table(&out);
    for n in (0..=11).step_by(2) {
        for col in [format!("re{n}"), format!("im{n}")] {
            assert!(t.column(&col).unwrap().iter().all(|v| *v == 0.0), "{col}");
        }
    }
    assert_eq!(t.column("re5").unwrap()[0], 1.0);
}

#[test]
fn routes_agree_through_the_cli() {
    let args = |route| {
        dho(&[
            "transitions",
            route,
            "--gamma",
            "0.8",
            "--t-max",
            "5",
            "--dt",
            "0.25",
            "--precision",
            "15",
        ])
    };
    let closed = table(&args("closed"));
    for route in ["ode", "contour"] {
        let other = table(&args(route));
        assert_eq!(other.header, closed.header);
        for (a, b) in closed.rows.iter().zip(&other.rows) {
            for (x, y) in a.iter().zip(b).take(a.len() - 1) {
                assert!((x - y).abs() < 1e-8, "{route}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn config_file_sits_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# case (c)\ngamma = 1.5\nm = 1\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let from_file = String::from_utf8(dho(&["derive", "--config", cfg]).stdout).unwrap();
    assert!(from_file.contains("gamma=1.500000000000e0"));
    let overridden = String::from_utf8(dho(&["derive", "--config", cfg, "--gamma", "0.5"]).stdout).unwrap();
    assert!(overridden.contains("gamma=5.000000000000e-1"));

    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "speed=1\n").unwrap();
    assert_eq!(
        dho(&["derive", "--config", bad.to_str().unwrap()]).status.code(),
        Some(2)
    );
}

fn read(dir: &Path, name: &str) -> Table {
    Table::read_file(&dir.join(name)).unwrap()
}

#[test]
fn figure_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert!(dho(&["fig1", "--out", d, "--points", "201"]).status.success());
    assert!(dho(&["fig2", "--out", d, "--dt", "0.1"]).status.success());
    assert!(
        dho(&["fig3", "--out", d, "--case", "a", "--ode", "--t-max", "10", "--dt", "0.1"])
            .status
            .success()
    );

    let f1 = read(dir.path(), "fig1_t250.csv");
    assert_eq!(f1.header, ["X", "phi0_sq", "phi1_sq", "phi2_sq"]);
    assert_eq!(f1.rows.len(), 201);

    for case in ['a', 'b', 'c'] {
        let f2 = read(dir.path(), &format!("fig2_case_{case}.csv"));
        assert_eq!(f2.header, ["t", "p0", "p2", "p4", "p6"]);
        assert_eq!(f2.rows.len(), 301);
        assert_eq!(f2.rows[0][1..], [1.0, 0.0, 0.0, 0.0]);
    }

    let f3 = read(dir.path(), "fig3_case_a.csv");
    assert_eq!(f3.header.len(), 9);
    for row in &f3.rows {
        for k in 1..=4 {
            assert!((row[k] - row[k + 4]).abs() < 1e-8);
        }
    }
    assert!(!dir.path().join("fig3_case_b.csv").exists());
}

#[test]
fn classical_ledger_columns() {
    let out = dho(&[
        "classical",
        "--gamma",
        "0.5",
        "--phi",
        "1.5707963267948966",
        "--t-max",
        "10",
        "--dt",
        "0.01",
    ]);
    assert!(out.status.success());
    let t = table(&out);
    let h = t.column("H").unwrap();
    assert!(h.iter().all(|v| (v / h[0] - 1.0).abs() < 1e-11));
    let q = t.column("Q").unwrap();
    let gap = t.column("H_minus_E").unwrap();
    let offset = gap[0] - q[0];
    for (g, q) in gap.iter().zip(&q) {
        assert!((g - offset - q).abs() < 1e-8 * h[0]);
    }
}

#[test]
fn wavefunction_is_normalised() {
    let out = dho(&["wavefunction", "--t", "3", "--points", "2049"]);
    assert!(out.status.success());
    let t = table(&out);
    let x = t.column("X").unwrap();
    let rho = t.column("density").unwrap();
    assert_eq!(x.len(), 2049);
    let h = x[1] - x[0];
    let norm = h * (rho.iter().sum::<f64>() - 0.5 * (rho[0] + rho[rho.len() - 1]));
    assert!((norm - 1.0).abs() < 1e-8, "{norm}");
}

#[test]
fn wavefunction_at_start_is_initial_eigenfunction() {
    let out = dho(&["wavefunction", "--l", "2", "--points", "101"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let t = table(&out);
    let (x, rho) = (t.column("X").unwrap(), t.column("density").unwrap());
    for (x, r) in x.iter().zip(&rho) {
        // |phi_2|^2 at t = 0 for m = omega = hbar = 1
        let expect = (2.0 * x * x - 1.0).powi(2) * (-x * x).exp() / (2.0 * std::f64::consts::PI.sqrt());
        assert!((r - expect).abs() < 1e-11, "{x}: {r} vs {expect}");
    }
}

#[test]
fn spectrum_overlaps_are_identity() {
    let out = dho(&[
        "spectrum", "overlaps", "--t", "250", "--m", "10", "--k", "10", "--gamma", "0.1", "--n-max", "6",
    ]);
    assert!(out.status.success());
    let t = table(&out);
    assert_eq!(t.header, ["n", "n2", "re", "im"]);
    assert_eq!(t.rows.len(), 49);
    for r in &t.rows {
        let expect = if r[0] == r[1] { 1.0 } else { 0.0 };
        assert!((r[2] - expect).abs() < 1e-10 && r[3].abs() < 1e-10);
    }
}
