use std::path::Path;
use std::process::{Command, Output};

use cca_cli::run::RESULTS_HEADER;

fn cca(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cca"))
        .args(args)
        .current_dir(cwd)
        .env_remove("CCA_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const SMALL: &str =
    "source = \"synthetic\"\nd_x = 10\nd_y = 8\nk_true = 2\nstrengths = [3.0, 2.0]\nn = 10000\nk = 2\nseed = 3\n";

/// Writes the 8-row two-view case with C_X = C_Y = I and C_XY = diag(0.9, 0.3).
fn write_hand_case(dir: &Path) {
    let h = |i: usize, j: usize| {
        if (i & j).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    };
    let (a, b) = ((1.0f64 - 0.81).sqrt(), (1.0f64 - 0.09).sqrt());
    let mut x = String::from("x1,x2\n");
    let mut y = String::from("y1,y2\n");
    for i in 0..8 {
        x.push_str(&format!("{},{}\n", h(i, 1), h(i, 2)));
        y.push_str(&format!(
            "{},{}\n",
            0.9 * h(i, 1) + a * h(i, 3),
            0.3 * h(i, 2) + b * h(i, 4)
        ));
    }
    std::fs::write(dir.join("x.csv"), x).unwrap();
    std::fs::write(dir.join("y.csv"), y).unwrap();
}

#[test]
fn run_writes_results_with_golden_header() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = cca(&["run", "--config", &cfg, "--output_dir", "out"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let csv = std::fs::read_to_string(dir.path().join("out/results.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], RESULTS_HEADER);
    assert_eq!(
        lines[0],
        "samples_seen,pcc,f_tilde,f_pca,whitening_u,whitening_v,elapsed_s"
    );
    // 100 steps, evaluated at 0 and every 10 steps.
    assert_eq!(lines.len() - 1, 100 / 10 + 1);
    let seen: Vec<usize> = lines[1..]
        .iter()
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(seen.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(*seen.last().unwrap(), 10_000);
    // 17 significant digits.
    let pcc = lines[1].split(',').nth(1).unwrap();
    assert_eq!(pcc.split('e').next().unwrap().replace(['.', '-'], "").len(), 17);

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/summary.json")).unwrap()).unwrap();
    for key in ["final_pcc", "total_time_s", "steps", "config"] {
        assert!(summary.get(key).is_some(), "summary lacks {key}");
    }
    assert_eq!(summary["steps"], 100);
    assert_eq!(summary["config"]["hyper"]["k"], 2);
    let diag: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/diagnostics.json")).unwrap()).unwrap();
    for key in [
        "E",
        "bound_x",
        "bound_y",
        "whitening_u",
        "whitening_v",
        "max_update_norm",
        "ball_radius",
    ] {
        assert!(diag.get(key).is_some(), "diagnostics lack {key}");
    }
}

#[test]
fn runs_are_deterministic_apart_from_timing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let strip = |p: &Path| -> Vec<String> {
        std::fs::read_to_string(p)
            .unwrap()
            .lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect()
    };
    for name in ["a", "b"] {
        let out = cca(&["run", "--config", &cfg, &format!("--output_dir={name}")], dir.path());
        assert!(out.status.success());
    }
    assert_eq!(
        strip(&dir.path().join("a/results.csv")),
        strip(&dir.path().join("b/results.csv"))
    );
    let out = cca(
        &["run", "--config", &cfg, "--output_dir", "c", "--seed", "4"],
        dir.path(),
    );
    assert!(out.status.success());
    assert_ne!(
        strip(&dir.path().join("a/results.csv")),
        strip(&dir.path().join("c/results.csv"))
    );
}

#[test]
fn output_dir_defaults_to_env_var() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = Command::new(env!("CARGO_BIN_EXE_cca"))
        .args(["run", "--config", &cfg, "--n", "1000"])
        .current_dir(dir.path())
        .env("CCA_OUTPUT_DIR", dir.path().join("from_env"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("from_env/results.csv").exists());
}

#[test]
fn exact_hand_case_from_files() {
    let dir = tempfile::tempdir().unwrap();
    write_hand_case(dir.path());
    let cfg = write_config(
        dir.path(),
        "source = \"files\"\npath_x = \"x.csv\"\npath_y = \"y.csv\"\nskip_header = true\nk = 2\noutput_dir = \"exact\"\n",
    );
    let out = cca(&["exact", "--config", &cfg, "--brute-check"], dir.path());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}{}", String::from_utf8_lossy(&out.stderr));
    let rhos: Vec<f64> = stdout
        .lines()
        .filter_map(|l| l.strip_prefix("rho_"))
        .map(|l| l.split(" = ").nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(rhos.len(), 2);
    assert!(
        (rhos[0] - 0.9).abs() <= 1e-12 && (rhos[1] - 0.3).abs() <= 1e-12,
        "{rhos:?}"
    );
    assert!(stdout.contains("brute-force max"));
    for f in ["u_star.ccam", "v_star.ccam", "correlations.csv"] {
        assert!(dir.path().join("exact").join(f).exists(), "missing {f}");
    }
    let u: nalgebra::DMatrix<f64> = cca_core::stream::read_matrix_cache(&dir.path().join("exact/u_star.ccam")).unwrap();
    assert_eq!(u.shape(), (2, 2));
}

#[test]
fn exact_noiseless_identity_case() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "d_x = 3\nd_y = 3\nk_true = 3\nstrengths = [1.0, 1.0, 1.0]\nnoise_scale = 0.0\nn = 500\nk = 3\noutput_dir = \"o\"\n",
    );
    let out = cca(&["exact", "--config", &cfg], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let rhos: Vec<f64> = stdout
        .lines()
        .map(|l| l.split(" = ").nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(rhos.len(), 3);
    assert!(rhos.iter().all(|r| (r - 1.0).abs() <= 1e-6), "{rhos:?}");
}

#[test]
fn split_source_matches_files_source() {
    let dir = tempfile::tempdir().unwrap();
    write_hand_case(dir.path());
    let x = std::fs::read_to_string(dir.path().join("x.csv")).unwrap();
    let y = std::fs::read_to_string(dir.path().join("y.csv")).unwrap();
    let joined: String = x.lines().zip(y.lines()).map(|(a, b)| format!("{a},{b}\n")).collect();
    std::fs::write(dir.path().join("xy.csv"), joined).unwrap();
    let cfg = write_config(
        dir.path(),
        "source = \"split\"\npath = \"xy.csv\"\nsplit_column = 2\nskip_header = true\nk = 2\noutput_dir = \"o\"\n",
    );
    let out = cca(&["exact", "--config", &cfg], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("rho_1 = 9.0000000000000"));
}

#[test]
fn gradient_check_passes_and_negative_control_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = cca(&["check-gradients", "--trials", "3"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(
        stdout.lines().next().unwrap(),
        "trial,seed,u_tilde,v_tilde,s_u,s_v,q_u,q_v"
    );
    assert_eq!(stdout.lines().count(), 1 + 3 + 1);

    let out = cca(&["check-gradients", "--trials", "2", "--corrupt"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(cca(&["check-gradients", "--trials", "0"], p).status.code(), Some(2));
    assert_eq!(cca(&["bench", "--dims", "4", "--k", "8"], p).status.code(), Some(2));
    assert_eq!(cca(&["run", "--config", "missing.toml"], p).status.code(), Some(2));

    let cfg = write_config(p, "bogus_key = 1\n");
    let out = cca(&["run", "--config", &cfg], p);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus_key"));

    let cfg = write_config(p, "k = \"two\"\n");
    let out = cca(&["run", "--config", &cfg], p);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("run.toml") && err.contains("`k`"), "{err}");

    let cfg = write_config(
        p,
        "source = \"files\"\npath_x = \"nope_x.csv\"\npath_y = \"nope_y.csv\"\n",
    );
    assert_eq!(cca(&["run", "--config", &cfg], p).status.code(), Some(3));

    std::fs::write(p.join("bad_x.csv"), "1,2\n3,oops\n").unwrap();
    std::fs::write(p.join("bad_y.csv"), "1\n2\n").unwrap();
    let cfg = write_config(
        p,
        "source = \"files\"\npath_x = \"bad_x.csv\"\npath_y = \"bad_y.csv\"\nk = 1\n",
    );
    let out = cca(&["run", "--config", &cfg], p);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 2"));
}

#[test]
fn bench_single_dimension_has_empty_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let out = cca(&["bench", "--dims", "16", "--k", "2", "--batches", "3"], dir.path());
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "d,median_step_ms,ratio_vs_prev");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("16,") && lines[1].ends_with(','), "{}", lines[1]);
}
