use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rbtomo"))
}

fn write(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
    p
}

fn run(args: &[&str], config: Option<&Path>) -> Output {
    let mut c = bin();
    c.args(args);
    if let Some(p) = config {
        c.arg("--config").arg(p);
    }
    c.output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_column(text: &str, col: usize) -> Vec<f64> {
    text.lines().skip(1).map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect()
}

fn hadamard_decay(target: Value) -> Value {
    json!({
        "n": 1,
        "e_map": {"kind": "gate", "params": {"name": "H"}},
        "target": target,
        "lengths": (1..=8).collect::<Vec<_>>()
    })
}

#[test]
fn hadamard_series_oscillate_oppositely() {
    let dir = TempDir::new().unwrap();
    let c0 = hadamard_decay(json!({"n": 1, "tableau": ["10", "01"], "phases": "00"}));
    // π rotation about X, i.e. the Pauli X.
    let c1 = hadamard_decay(json!({"name": "X"}));
    let f0 = csv_column(&stdout(&run(&["simulate-decay", "--analytic"], Some(&write(dir.path(), "c0.json", &c0)))), 1);
    let f1 = csv_column(&stdout(&run(&["simulate-decay", "--analytic"], Some(&write(dir.path(), "c1.json", &c1)))), 1);
    for (k, (a, b)) in f0.iter().zip(&f1).enumerate() {
        let mag = (1.0f64 / 3.0).powi(k as i32 + 1);
        assert!((a.abs() - mag).abs() < 1e-12 && (b.abs() - mag).abs() < 1e-12);
        assert!(*b > 0.0);
        assert_eq!(*a < 0.0, k % 2 == 0);
    }
}

#[test]
fn identity_decay_is_flat() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({
        "n": 1,
        "e_map": {"kind": "depolarizing", "params": {"delta": 1.0}},
        "target": {"id": 0},
        "lengths": [1, 5, 50]
    });
    let out = stdout(&run(&["simulate-decay", "--analytic"], Some(&write(dir.path(), "id.json", &cfg))));
    assert!(out.starts_with("k,mean,stderr,n_sequences,shots\n"));
    for m in csv_column(&out, 1) {
        assert!((m - 1.0).abs() < 1e-12);
    }
}

#[test]
fn seeded_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "h.json", &hadamard_decay(json!({"id": 0})));
    let out_a = dir.path().join("a.csv");
    let out_b = dir.path().join("b.csv");
    for out in [&out_a, &out_b] {
        let o = bin()
            .args(["simulate-decay", "--seed", "9", "--threads", "2", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(out)
            .output()
            .unwrap();
        assert!(o.status.success());
    }
    let a = std::fs::read(&out_a).unwrap();
    assert_eq!(a, std::fs::read(&out_b).unwrap());
    let other = stdout(&run(&["simulate-decay", "--seed", "10"], Some(&cfg)));
    assert_ne!(a, other.into_bytes());
}

#[test]
fn sampled_runs_need_a_seed() {
    let dir = TempDir::new().unwrap();
    let o = run(&["simulate-decay"], Some(&write(dir.path(), "h.json", &hadamard_decay(json!({"id": 0})))));
    assert_eq!(o.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "validation");
}

#[test]
fn schema_violations_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let o = run(&["estimate-p"], Some(&write(dir.path(), "bad.json", &json!({"n": 1}))));
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["reconstruct"], Some(Path::new("/nonexistent/config.json")));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn estimate_p_reports_hadamard_decay() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({
        "n": 1,
        "e_map": {"kind": "gate", "params": {"name": "H"}},
        "target": {"name": "X"},
        "epsilon": 0.05,
        "delta": 0.05
    });
    let out = stdout(&run(&["estimate-p", "--analytic"], Some(&write(dir.path(), "p.json", &cfg))));
    let est: rbtomo::rb::PEstimate = serde_json::from_str(&out).unwrap();
    assert!((est.p_hat - 1.0 / 3.0).abs() < 1e-12);
    let v: Value = serde_json::from_str(&out).unwrap();
    for key in ["p_hat", "epsilon", "delta", "a_lower", "clamped_to_zero", "samples_used"] {
        assert!(v.get(key).is_some(), "{key}");
    }
}

fn pl_rows(v: &Value) -> Vec<Vec<f64>> {
    serde_json::from_value(v["matrix"].clone()).unwrap()
}

fn reconstruct_config(eta_prep: f64, eta_meas: f64) -> Value {
    json!({
        "n": 1,
        "e_map": {"kind": "gate", "params": {"name": "H"}},
        "noise_map": {"kind": "depolarizing", "params": {"delta": 0.98}},
        "eta_prep": eta_prep,
        "eta_meas": eta_meas,
        "method": {"kind": "analytic"}
    })
}

#[test]
fn reconstruct_recovers_hadamard() {
    let dir = TempDir::new().unwrap();
    let h = [[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0], [0.0, 0.0, -1.0, 0.0], [0.0, 1.0, 0.0, 0.0]];
    let mut first: Option<Vec<Vec<f64>>> = None;
    for (i, (ep, em)) in [(0.0, 0.0), (0.1, 0.05)].into_iter().enumerate() {
        let cfg = write(dir.path(), &format!("r{i}.json"), &reconstruct_config(ep, em));
        let report: Value = serde_json::from_str(&stdout(&run(&["reconstruct"], Some(&cfg)))).unwrap();
        let e = pl_rows(&report["e_prime"]);
        for (r, row) in e.iter().enumerate() {
            for (c, x) in row.iter().enumerate() {
                assert!((x - h[r][c]).abs() < 1e-8);
            }
        }
        for key in ["en_prime", "n_prime", "residuals", "kappa"] {
            assert!(report.get(key).is_some(), "{key}");
        }
        match &first {
            None => first = Some(e),
            Some(f) => {
                for (a, b) in f.iter().flatten().zip(e.iter().flatten()) {
                    assert!((a - b).abs() < 1e-9);
                }
            }
        }
    }
}

#[test]
fn singular_noise_gives_structured_error() {
    let dir = TempDir::new().unwrap();
    let mut cfg = reconstruct_config(0.0, 0.0);
    // Complete dephasing keeps the decay observable but kills the X and Y rows.
    cfg["noise_map"] = json!({"kind": "dephasing", "params": {"gamma": 0.0}});
    let o = run(&["reconstruct"], Some(&write(dir.path(), "s.json", &cfg)));
    assert_eq!(o.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "singular");
    assert!(err["error"]["details"]["threshold"].is_number());
}

#[test]
fn bound_curves_table() {
    let out = stdout(&run(&["bound-curves", "--chi-b", "0.995"], None));
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("chi_ab,ours_lo,ours_hi,mgj_lo,mgj_hi,mgj_valid"));
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(str::to_owned).collect()).collect();
    assert_eq!(rows.len(), 201);
    for r in &rows {
        let lo: f64 = r[1].parse().unwrap();
        let hi: f64 = r[2].parse().unwrap();
        assert!((0.0..=hi).contains(&lo) && hi <= 1.0);
        if r[0] == "0.995" {
            assert_eq!(hi, 1.0);
        }
    }

    let out = stdout(&run(&["bound-curves", "--chi-b", "1", "--points", "11"], None));
    for l in out.lines().skip(1) {
        let v: Vec<f64> = l.split(',').take(3).map(|x| x.parse().unwrap()).collect();
        assert!((v[1] - v[0]).abs() < 1e-12 && (v[2] - v[0]).abs() < 1e-12);
    }
    assert_eq!(run(&["bound-curves", "--chi-b", "1.5"], None).status.code(), Some(2));
}

#[test]
fn decompose_circuits() {
    let dir = TempDir::new().unwrap();
    let t = write(dir.path(), "t.json", &json!([{"gate": "T", "qubit": 0}]));
    let combo: Value = serde_json::from_str(&stdout(&run(&["decompose"], Some(&t)))).unwrap();
    assert_eq!(combo["terms"].as_array().unwrap().len(), 3);
    assert!((combo["one_norm"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-12);
    let back: rbtomo::bounds::LinearCombination = serde_json::from_value(combo).unwrap();
    assert_eq!(back, rbtomo::bounds::decompose_t());

    let empty = write(dir.path(), "e.json", &json!({"n": 2, "gates": []}));
    let combo: Value = serde_json::from_str(&stdout(&run(&["decompose"], Some(&empty)))).unwrap();
    assert_eq!(combo["terms"].as_array().unwrap().len(), 1);
    assert_eq!(combo["terms"][0]["beta"], 1.0);

    let many = write(dir.path(), "m.json", &json!({"gates": vec![json!({"gate": "T", "qubit": 0}); 3], "t_max": 2}));
    assert_eq!(run(&["decompose"], Some(&many)).status.code(), Some(2));
}

#[test]
fn bound_fidelity_contains_truth() {
    let dir = TempDir::new().unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let cfg = json!({
        "n": 1,
        "e_map": {"kind": "unitary", "params": {"matrix": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [s, s]]]}},
        "noise_map": {"kind": "depolarizing", "params": {"delta": 0.99}},
        "circuit": [{"gate": "T", "qubit": 0}, {"gate": "clifford", "name": "H"}, {"gate": "T", "qubit": 0}],
        "epsilon": 0.02,
        "delta": 0.05
    });
    let path = write(dir.path(), "b.json", &cfg);
    let report: Value = serde_json::from_str(&stdout(&run(&["bound-fidelity", "--analytic"], Some(&path)))).unwrap();
    let truth = report["simulated_fidelity"].as_f64().unwrap();
    let (lo, hi) = (report["interval"]["lo"].as_f64().unwrap(), report["interval"]["hi"].as_f64().unwrap());
    assert!(report["interval"]["valid"].as_bool().unwrap());
    assert!(lo <= truth && truth <= hi, "{lo} {truth} {hi}");
    assert_eq!(report["samples_used"], 0);

    let sampled: Value = serde_json::from_str(&stdout(&run(&["bound-fidelity", "--seed", "1"], Some(&path)))).unwrap();
    assert!(sampled["samples_used"].as_u64().unwrap() > 0);
}

#[test]
fn cp_scan_and_span_check() {
    let out = stdout(&run(&["cp-scan", "--qubits", "1", "--trials", "20", "--seed", "2"], None));
    assert!(out.starts_with("trial,min_choi_eigenvalue,noncp\n"));
    assert_eq!(out.lines().count(), 21);
    assert!(out.lines().skip(1).all(|l| l.ends_with(",false")));
    assert_eq!(run(&["cp-scan", "--qubits", "1"], None).status.code(), Some(2));

    let span: Value = serde_json::from_str(&stdout(&run(&["span-check", "--qubits", "1", "--seed", "0"], None))).unwrap();
    assert_eq!(span["clifford_rank"], 10);
    assert_eq!(span["rank_with_haar"], 10);
}
