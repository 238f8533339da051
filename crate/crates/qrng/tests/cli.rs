//! End-to-end runs of the `qrng` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qrng::format::{CountRecordJson, ReconstructionReport};
use qrng_core::optics::{self, CountRecord, MeasurementSetting};
use qrng_core::reference;
use qrng_core::tomography;
use serde_json::Value;
use tempfile::TempDir;

fn qrng(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrng"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn qrng")
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

const D_STATE: &str =
    r#"{"dim": 2, "entries": [[0.5, 0], [0.5, 0], [0.5, 0], [0.5, 0]], "label": "D"}"#;
const EQ9_STATE: &str =
    r#"{"dim": 2, "entries": [[0.493, 0], [0.449, 0.144], [0.449, -0.144], [0.507, 0]]}"#;

fn dir_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().into_string().unwrap(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}

#[test]
fn simulate_writes_one_record_per_setting_and_a_manifest() {
    let tmp = TempDir::new().unwrap();
    write(
        tmp.path(),
        "run.json",
        r#"{"source": {"kind": "pure", "state": "D"}, "settings": ["HV", "DA", "RL"],
            "trials_per_setting": 1000000, "seed": 7, "output_dir": "run"}"#,
    );
    ok(&qrng(tmp.path(), &["simulate", "run.json"]));
    let files = dir_files(&tmp.path().join("run"));
    let names: Vec<_> = files.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(
        names,
        [
            "manifest.json",
            "record_00_HV.json",
            "record_01_DA.json",
            "record_02_RL.json"
        ]
    );

    let manifest: Value = serde_json::from_slice(&files[0].1).unwrap();
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 3);
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);

    // |D> in HV: binomial(10^6, 1/2) within 5 sigma
    let hv: CountRecordJson = serde_json::from_slice(&files[1].1).unwrap();
    assert_eq!(hv.total_trials, 1_000_000);
    let c0 = hv.counts["0"] as f64;
    assert!((c0 - 5e5).abs() < 5.0 * 500.0, "{c0}");
    let da: CountRecordJson = serde_json::from_slice(&files[2].1).unwrap();
    assert_eq!(da.counts["0"], 1_000_000);
}

#[test]
fn simulate_is_byte_identical_across_runs() {
    let tmp = TempDir::new().unwrap();
    write(
        tmp.path(),
        "run.json",
        r#"{"source": {"kind": "bell_phi_plus", "visibility": 0.9}, "trials_per_setting": 100000, "seed": 42}"#,
    );
    ok(&qrng(tmp.path(), &["simulate", "run.json", "--out", "a"]));
    ok(&qrng(tmp.path(), &["simulate", "run.json", "--out", "b"]));
    let a = dir_files(&tmp.path().join("a"));
    assert_eq!(a.len(), 10);
    assert_eq!(a, dir_files(&tmp.path().join("b")));

    ok(&qrng(
        tmp.path(),
        &["simulate", "run.json", "--out", "c", "--seed", "43"],
    ));
    assert_ne!(a, dir_files(&tmp.path().join("c")));
}

#[test]
fn simulate_csv_round_trips_through_tomo() {
    let tmp = TempDir::new().unwrap();
    write(
        tmp.path(),
        "run.json",
        r#"{"source": {"kind": "pure", "state": "R"}, "trials_per_setting": 200000, "seed": 3}"#,
    );
    ok(&qrng(
        tmp.path(),
        &["simulate", "run.json", "--out", "r", "--format", "csv"],
    ));
    assert!(tmp.path().join("r/records.csv").exists());
    write(
        tmp.path(),
        "r.json",
        r#"{"dim": 2, "entries": [[0.5, 0], [0, -0.5], [0, 0.5], [0.5, 0]]}"#,
    );
    ok(&qrng(
        tmp.path(),
        &[
            "tomo",
            "r/records.csv",
            "--dim",
            "2",
            "--truth",
            "r.json",
            "--out",
            "t",
        ],
    ));
    let rep: Value =
        serde_json::from_slice(&fs::read(tmp.path().join("t/reconstruction.json")).unwrap())
            .unwrap();
    assert!(rep["fidelity_to_truth"].as_f64().unwrap() > 0.995);
}

#[test]
fn simulate_rejects_weights_not_summing_to_one() {
    let tmp = TempDir::new().unwrap();
    write(
        tmp.path(),
        "bad.json",
        r#"{"source": {"kind": "classical_mixture", "components": [
                {"state": "H", "weight": 0.5}, {"state": "V", "weight": 0.4}]},
            "trials_per_setting": 1000, "output_dir": "x"}"#,
    );
    let out = qrng(tmp.path(), &["simulate", "bad.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("weight"), "{}", stderr(&out));
    assert!(!tmp.path().join("x").exists());
}

#[test]
fn simulate_rejects_unknown_fields_and_missing_output() {
    let tmp = TempDir::new().unwrap();
    write(
        tmp.path(),
        "typo.json",
        r#"{"source": {"kind": "pure", "state": "D"}, "trials": 10, "output_dir": "x"}"#,
    );
    assert_eq!(
        qrng(tmp.path(), &["simulate", "typo.json"]).status.code(),
        Some(2)
    );
    write(
        tmp.path(),
        "noout.json",
        r#"{"source": {"kind": "pure", "state": "D"}, "trials_per_setting": 10}"#,
    );
    let out = qrng(tmp.path(), &["simulate", "noout.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("output_dir"));
    assert_eq!(
        qrng(tmp.path(), &["simulate", "missing.json", "--out", "y"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn tomo_on_simulated_d_state_meets_fidelity() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "d.json", D_STATE);
    write(
        tmp.path(),
        "run.json",
        r#"{"source": {"kind": "pure", "state": "D"}, "settings": ["HV", "DA", "RL"],
            "trials_per_setting": 1000000, "seed": 11}"#,
    );
    ok(&qrng(tmp.path(), &["simulate", "run.json", "--out", "rec"]));
    let text = ok(&qrng(
        tmp.path(),
        &[
            "tomo",
            "rec",
            "--dim",
            "2",
            "--truth",
            "d.json",
            "--bootstrap",
            "200",
            "--out",
            "t",
        ],
    ));
    assert!(text.contains("fidelity (root) to truth"));
    let rep: Value =
        serde_json::from_slice(&fs::read(tmp.path().join("t/reconstruction.json")).unwrap())
            .unwrap();
    let f = rep["fidelity_to_truth"].as_f64().unwrap();
    assert!(f >= 0.995, "{f}");
    assert_eq!(rep["bootstrap"]["n_resamples"], 200);
    assert!(tmp.path().join("t/state.json").exists());
}

/// Born probabilities of every tomography setting, without the physicality
/// check (the measured pair has negative ones).
fn born(rho: &qrng_core::DensityMatrix) -> Vec<(MeasurementSetting, Vec<f64>)> {
    tomography::tomography_settings(rho.dim())
        .unwrap()
        .into_iter()
        .map(|s| {
            let p = optics::setting_projectors(&s)
                .iter()
                .map(|proj| rho.matrix().trace_product(proj).re)
                .collect();
            (s, p)
        })
        .collect()
}

fn to_records(freqs: &[(MeasurementSetting, Vec<f64>)]) -> Vec<CountRecordJson> {
    const N: u64 = 1_000_000_000_000;
    freqs
        .iter()
        .map(|(s, p)| {
            let mut counts: Vec<u64> = p.iter().map(|&x| (x * N as f64).round() as u64).collect();
            let sum: u64 = counts.iter().sum();
            let last = counts.len() - 1;
            counts[last] = counts[last] + N - sum;
            CountRecordJson::from(&CountRecord::new(*s, counts, N, 0).unwrap())
        })
        .collect()
}

#[test]
fn tomo_recovers_measured_pair_from_exact_records() {
    use qrng_core::optics::Basis::{DA, HV, RL};
    let rho = reference::two_photon();
    let mut freqs = born(&rho);

    // The measured pair assigns negative probability to (L, D) in RL x DA,
    // so no count record can carry its Born probabilities as they stand.
    let at = |f: &[(MeasurementSetting, Vec<f64>)], a, b| {
        f.iter()
            .position(|(s, _)| s.bases() == Some((a, Some(b))))
            .unwrap()
    };
    let rl_da = at(&freqs, RL, DA);
    assert!((freqs[rl_da].1[2] + 0.0155).abs() < 1e-9);

    // Linear inversion averages each arm's marginal over the three settings
    // that share it. Raising arm 2's DA marginal in RL x DA and lowering it
    // by half as much in HV x DA and DA x DA leaves the estimate unchanged
    // and makes every record a valid distribution.
    let delta = 0.08;
    let shift = |p: &mut Vec<f64>, d: f64| {
        for (k, x) in p.iter_mut().enumerate() {
            let b = if k % 2 == 0 { 1.0 } else { -1.0 };
            *x += b * d / 4.0;
        }
    };
    shift(&mut freqs[rl_da].1, delta);
    let hv_da = at(&freqs, HV, DA);
    shift(&mut freqs[hv_da].1, -delta / 2.0);
    let da_da = at(&freqs, DA, DA);
    shift(&mut freqs[da_da].1, -delta / 2.0);
    assert!(freqs.iter().all(|(_, p)| p.iter().all(|&x| x >= 0.0)));

    let tmp = TempDir::new().unwrap();
    write(
        tmp.path(),
        "pair.json",
        &serde_json::to_string(&to_records(&freqs)).unwrap(),
    );
    ok(&qrng(
        tmp.path(),
        &["tomo", "pair.json", "--dim", "4", "--out", "t"],
    ));

    let rep: ReconstructionReport =
        serde_json::from_slice(&fs::read(tmp.path().join("t/reconstruction.json")).unwrap())
            .unwrap();
    assert_eq!(rep.dim, 4);
    for (got, want) in rep.raw.entries.iter().zip(reference::TWO_PHOTON.iter()) {
        assert!(
            (got[0] - want.0).abs() < 1e-9 && (got[1] - want.1).abs() < 1e-9,
            "{got:?} vs {want:?}"
        );
    }
    // the raw matrix keeps the negative eigenvalue, the projection removes it
    assert!(rep.eigenvalues_before[0] < -0.08);
    assert!(rep.eigenvalues_after.iter().all(|&l| l >= 0.0));
}

#[test]
fn tomo_recovers_single_photon_from_exact_records() {
    let rho = reference::single_photon();
    let tmp = TempDir::new().unwrap();
    write(
        tmp.path(),
        "single.json",
        &serde_json::to_string(&to_records(&born(&rho))).unwrap(),
    );
    ok(&qrng(
        tmp.path(),
        &["tomo", "single.json", "--dim", "2", "--out", "t"],
    ));
    let rep: ReconstructionReport =
        serde_json::from_slice(&fs::read(tmp.path().join("t/reconstruction.json")).unwrap())
            .unwrap();
    for (got, want) in rep
        .projected
        .entries
        .iter()
        .zip(reference::SINGLE_PHOTON.iter())
    {
        assert!((got[0] - want.0).abs() < 1e-9 && (got[1] - want.1).abs() < 1e-9);
    }
    assert!((rep.stokes[1] - 0.898).abs() < 1e-9 && (rep.stokes[2] + 0.288).abs() < 1e-9);
}

#[test]
fn tomo_names_the_missing_setting() {
    let tmp = TempDir::new().unwrap();
    write(
        tmp.path(),
        "run.json",
        r#"{"source": {"kind": "bell_phi_plus"}, "trials_per_setting": 1000, "seed": 1}"#,
    );
    ok(&qrng(tmp.path(), &["simulate", "run.json", "--out", "rec"]));
    let victim = tmp.path().join("rec/record_05_DA-RL.json");
    assert!(victim.exists());
    fs::remove_file(&victim).unwrap();
    fs::remove_file(tmp.path().join("rec/manifest.json")).unwrap();

    let out = qrng(tmp.path(), &["tomo", "rec", "--dim", "4", "--out", "t"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("DA") && err.contains("RL"), "{err}");

    let wrong_dim = qrng(tmp.path(), &["tomo", "rec", "--dim", "2"]);
    assert_eq!(wrong_dim.status.code(), Some(2));
    let bad_dim = qrng(tmp.path(), &["tomo", "rec", "--dim", "3"]);
    assert_eq!(bad_dim.status.code(), Some(2));
}

#[test]
fn audit_reports_single_photon_values() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "eq9.json", EQ9_STATE);
    let text = ok(&qrng(
        tmp.path(),
        &[
            "audit",
            "eq9.json",
            "--scheme",
            "single_HV",
            "--target-state",
            "D",
            "--out",
            "a",
        ],
    ));
    assert!(text.contains("coherence C = 0.472"), "{text}");
    let rep: Value =
        serde_json::from_slice(&fs::read(tmp.path().join("a/audit.json")).unwrap()).unwrap();
    for key in [
        "probabilities",
        "coherence_C",
        "min_entropy_bound",
        "empirical_min_entropy",
        "fidelity_to_target",
        "chsh_S",
        "extractable_bits",
    ] {
        assert!(rep.get(key).is_some(), "missing {key}");
    }
    assert!((rep["fidelity_to_target"].as_f64().unwrap() - 0.974).abs() < 0.002);
    assert_eq!(rep["extractable_bits"], 585_708);

    ok(&qrng(
        tmp.path(),
        &[
            "audit",
            "eq9.json",
            "--scheme",
            "single_HV",
            "--format",
            "csv",
            "--out",
            "c",
        ],
    ));
    let csv = fs::read_to_string(tmp.path().join("c/audit.csv")).unwrap();
    assert!(csv.starts_with("p0,p1,coherence_C"));
}

#[test]
fn audit_of_measured_pair_warns_and_reports_chsh() {
    let tmp = TempDir::new().unwrap();
    let state = qrng::format::StateJson::from(&reference::two_photon());
    write(
        tmp.path(),
        "pair.json",
        &serde_json::to_string(&state).unwrap(),
    );
    let text = ok(&qrng(
        tmp.path(),
        &[
            "audit",
            "pair.json",
            "--scheme",
            "coincidence_HH_VV",
            "--target-state",
            "phi_plus",
            "--out",
            "a",
        ],
    ));
    assert!(text.contains("warning"), "{text}");
    let rep: Value =
        serde_json::from_slice(&fs::read(tmp.path().join("a/audit.json")).unwrap()).unwrap();
    assert!((rep["coherence_C"].as_f64().unwrap() - 0.441).abs() < 0.002);
    assert!((rep["fidelity_to_target"].as_f64().unwrap() - 0.904).abs() < 0.002);
    assert!(rep["chsh_S"].as_f64().unwrap() > 2.0);

    let single = ok(&qrng(
        tmp.path(),
        &["audit", "pair.json", "--scheme", "single_HV", "--out", "b"],
    ));
    assert!(single.contains("coherence C = 0.197"), "{single}");
}

#[test]
fn audit_rejects_scheme_dimension_mismatch() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "eq9.json", EQ9_STATE);
    let out = qrng(
        tmp.path(),
        &["audit", "eq9.json", "--scheme", "coincidence_HH_VV"],
    );
    assert_eq!(out.status.code(), Some(2));
    let out = qrng(
        tmp.path(),
        &[
            "audit",
            "eq9.json",
            "--scheme",
            "single_HV",
            "--target-state",
            "Q",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bits_from_d_state_are_unbiased() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "d.json", D_STATE);
    ok(&qrng(
        tmp.path(),
        &[
            "bits",
            "d.json",
            "--scheme",
            "single_HV",
            "--n",
            "1000000",
            "--seed",
            "7",
            "--out",
            "b",
        ],
    ));
    let raw = fs::read(tmp.path().join("b/raw.bin")).unwrap();
    assert_eq!(raw.len(), 125_000);
    let ones: u32 = raw.iter().map(|b| b.count_ones()).sum();
    let bias = (ones as f64 / 1e6 - 0.5).abs();
    assert!(bias < 0.002, "{bias}");
    let side: Value =
        serde_json::from_slice(&fs::read(tmp.path().join("b/raw.json")).unwrap()).unwrap();
    assert_eq!(side["length"], 1_000_000);
    assert_eq!(side["provenance"], "simulated");
    assert_eq!(side["seed"], 7);
}

#[test]
fn bits_toeplitz_respects_budget() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "eq9.json", EQ9_STATE);
    let base = [
        "bits",
        "eq9.json",
        "--scheme",
        "single_HV",
        "--n",
        "1000000",
        "--extractor",
        "toeplitz",
    ];

    let mut args = base.to_vec();
    args.extend(["--out-len", "580000", "--out", "ok"]);
    let text = ok(&qrng(tmp.path(), &args));
    assert!(text.contains("entropy budget: 585708"), "{text}");
    let side: Value =
        serde_json::from_slice(&fs::read(tmp.path().join("ok/extracted.json")).unwrap()).unwrap();
    assert_eq!(side["length"], 580_000);

    let mut args = base.to_vec();
    args.extend(["--out-len", "600000", "--out", "over"]);
    let out = qrng(tmp.path(), &args);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("585708"));
    assert!(!tmp.path().join("over").exists());
}

#[test]
fn bits_von_neumann_and_coincidence() {
    let tmp = TempDir::new().unwrap();
    let state = qrng::format::StateJson::from(&reference::two_photon());
    write(
        tmp.path(),
        "pair.json",
        &serde_json::to_string(&state).unwrap(),
    );
    let text = ok(&qrng(
        tmp.path(),
        &[
            "bits",
            "pair.json",
            "--scheme",
            "coincidence_HH_VV",
            "--n",
            "100000",
            "--extractor",
            "von_neumann",
            "--out",
            "v",
        ],
    ));
    assert!(text.contains("discarded"), "{text}");
    let side: Value =
        serde_json::from_slice(&fs::read(tmp.path().join("v/extracted.json")).unwrap()).unwrap();
    let n = side["length"].as_u64().unwrap();
    // E[pairs kept] = n/2 * 2 p q with p(HH|kept) = 0.447
    let expected = 100_000.0 * 0.447 * 0.553;
    assert!((n as f64 - expected).abs() < 0.02 * expected, "{n}");
}

#[test]
fn bits_are_deterministic() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "eq9.json", EQ9_STATE);
    for d in ["a", "b"] {
        ok(&qrng(
            tmp.path(),
            &[
                "bits",
                "eq9.json",
                "--scheme",
                "single_HV",
                "--n",
                "200000",
                "--extractor",
                "toeplitz",
                "--seed",
                "5",
                "--out",
                d,
            ],
        ));
    }
    assert_eq!(
        dir_files(&tmp.path().join("a")),
        dir_files(&tmp.path().join("b"))
    );
}

#[test]
fn reproduce_is_deterministic_and_flags_squared_fidelity() {
    let tmp = TempDir::new().unwrap();
    let a = qrng(tmp.path(), &["reproduce-paper"]);
    let b = qrng(tmp.path(), &["reproduce"]);
    assert_eq!(a.stdout, b.stdout);
    let table = String::from_utf8(a.stdout).unwrap();
    assert!(table.contains("coherence C"));

    let sq = ok(&qrng(
        tmp.path(),
        &["reproduce-paper", "--convention", "squared"],
    ));
    let fid: Vec<_> = sq
        .lines()
        .filter(|l| l.contains("fidelity (squared)"))
        .collect();
    assert_eq!(fid.len(), 2, "{sq}");
    assert!(fid[0].contains("0.949") && fid[0].contains("CONVENTION"));
    assert!(fid[1].contains("0.817") && fid[1].contains("CONVENTION"));

    ok(&qrng(
        tmp.path(),
        &["reproduce-paper", "--format", "json", "--out", "j1"],
    ));
    ok(&qrng(
        tmp.path(),
        &["reproduce-paper", "--format", "json", "--out", "j2"],
    ));
    let j1 = fs::read(tmp.path().join("j1/reproduction.json")).unwrap();
    assert_eq!(
        j1,
        fs::read(tmp.path().join("j2/reproduction.json")).unwrap()
    );
    let v: Value = serde_json::from_slice(&j1).unwrap();
    assert!(v["rows"].as_array().unwrap().len() >= 20);
}

#[test]
fn usage_errors_exit_with_validation_code() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(qrng(tmp.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        qrng(tmp.path(), &["reproduce", "--convention", "cubed"])
            .status
            .code(),
        Some(2)
    );
}
