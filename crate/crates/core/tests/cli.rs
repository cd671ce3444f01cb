use std::fs;
use std::path::Path;
use std::process::Command;

use penreg::cli::{cmd_fit, cmd_report, FitConfig};
use penreg::generators::{realization_rng, PenaltyMode};
use penreg::Selector;
use rand::Rng;
use rand_distr::StandardNormal;

fn penreg() -> Command {
    Command::new(env!("CARGO_BIN_EXE_penreg"))
}

fn write_csv(path: &Path, names: &[&str], rows: &[Vec<f64>]) {
    let mut s = names.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","));
        s.push('\n');
    }
    fs::write(path, s).unwrap();
}

const SMALL: &str = "design = exponential\nn = 60\nc = 0.3,0.5\nsigma2 = 100\npenalty = l1,scad\nselectors = cv10,aic,aicc,bic,cp,gcv,gamma\nreps = 4\nseed = 7\n";

#[test]
fn simulate_writes_files_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.txt");
    fs::write(&cfg, SMALL).unwrap();
    let out1 = dir.path().join("a");
    let st = penreg().args(["simulate", "--config"]).arg(&cfg).arg("--out").arg(&out1).status().unwrap();
    assert!(st.success());
    for f in ["records.csv", "summary.csv", "df_quantiles.csv", "summary_table.txt", "run_manifest.txt"] {
        assert!(out1.join(f).is_file(), "{f} missing");
    }
    // the manifest is itself a config; re-running from it reproduces the records
    let out2 = dir.path().join("b");
    let st = penreg()
        .args(["simulate", "--config"])
        .arg(out1.join("run_manifest.txt"))
        .args(["--workers", "2", "--out"])
        .arg(&out2)
        .status()
        .unwrap();
    assert!(st.success());
    assert_eq!(fs::read(out1.join("records.csv")).unwrap(), fs::read(out2.join("records.csv")).unwrap());

    let rep = dir.path().join("r");
    let st = penreg().args(["report", "--records"]).arg(out1.join("records.csv")).arg("--out").arg(&rep).status().unwrap();
    assert!(st.success());
    for f in ["summary.csv", "df_quantiles.csv", "summary_table.txt"] {
        assert_eq!(fs::read(out1.join(f)).unwrap(), fs::read(rep.join(f)).unwrap(), "{f} differs");
    }
    let summary = fs::read_to_string(out1.join("summary.csv")).unwrap();
    // 7 selectors × 2 c × 2 penalties, plus the header
    assert_eq!(summary.lines().count(), 1 + 28);
}

#[test]
fn invalid_scenario_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.txt");
    fs::write(&cfg, "design = poisson\nn = 100\nc = 0.5\nselectors = cp\n").unwrap();
    let out = penreg().args(["simulate", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert!(!out.status.success());
    assert!(!out.stderr.is_empty());
}

#[test]
fn empty_records_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let rec = dir.path().join("records.csv");
    fs::write(&rec, "").unwrap();
    assert!(cmd_report(&rec, dir.path()).is_err());
    let out = penreg().args(["report", "--records"]).arg(&rec).arg("--out").arg(dir.path()).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn single_selector_records_give_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let rec = dir.path().join("records.csv");
    fs::write(&rec, "rep,selector,lambda,df,loss,efficiency,flag\n0,bic,0.5,3,2.0,1.25,ok\n1,bic,0.4,2,3.0,1.5,ok\n").unwrap();
    cmd_report(&rec, dir.path()).unwrap();
    let s = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    let rows: Vec<&str> = s.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with("bic,"));
    assert!(rows[0].contains(",1.375,"));
}

#[test]
fn missing_target_names_the_column() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    write_csv(&data, &["a", "b"], &[vec![1.0, 2.0], vec![2.0, 1.0], vec![3.0, 5.0]]);
    let out = penreg()
        .args(["fit", "--data"])
        .arg(&data)
        .args(["--target", "response", "--out"])
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("response"));
}

#[test]
fn bad_cells_and_constant_columns_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    fs::write(&data, "y,x1\n1,2\n2,abc\n3,4\n").unwrap();
    let err = cmd_fit(&FitConfig::new(data.clone(), "y".into(), dir.path().join("o"))).unwrap_err();
    assert!(err.to_string().contains("abc"), "{err}");
    write_csv(&data, &["y", "x1", "flat"], &(0..12).map(|i| vec![i as f64 * 0.3 + (i % 3) as f64, i as f64, 5.0]).collect::<Vec<_>>());
    let err = cmd_fit(&FitConfig::new(data, "y".into(), dir.path().join("o"))).unwrap_err();
    assert!(err.to_string().contains("flat"), "{err}");
}

#[test]
fn fit_marks_the_signal_variable() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    let mut rng = realization_rng(12, 0);
    let rows: Vec<Vec<f64>> = (0..80)
        .map(|_| {
            let x: Vec<f64> = (0..5).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let y = 2.0 * x[0] + 0.5 * rng.sample::<f64, _>(StandardNormal);
            std::iter::once(y).chain(x).collect()
        })
        .collect();
    write_csv(&data, &["y", "x1", "x2", "x3", "x4", "x5"], &rows);
    let out = dir.path().join("o");
    let st = penreg().args(["fit", "--data"]).arg(&data).args(["--target", "y", "--out"]).arg(&out).status().unwrap();
    assert!(st.success());
    for pen in ["l1", "scad", "scad37"] {
        let grid = fs::read_to_string(out.join(format!("selection_grid_{pen}.csv"))).unwrap();
        let mut lines = grid.lines();
        assert_eq!(lines.next().unwrap(), "selector,x1,x2,x3,x4,x5");
        let rows: Vec<&str> = lines.collect();
        // cv10 runs twice
        assert_eq!(rows.len(), 8, "{pen}");
        assert!(rows.iter().any(|r| r.starts_with("cv10(1),")) && rows.iter().any(|r| r.starts_with("cv10(2),")));
        for r in rows {
            assert_eq!(r.split(',').nth(1), Some("X"), "{pen}: {r}");
        }
    }
    assert!(out.join("coefficients.csv").is_file());
    let manifest = fs::read_to_string(out.join("fit_manifest.txt")).unwrap();
    assert!(manifest.contains("cv_seeds = 1,2"));
}

#[test]
fn bic_picks_empty_model_on_pure_noise() {
    let dir = tempfile::tempdir().unwrap();
    let mut empty = 0;
    let mut names = vec!["y".to_string()];
    names.extend((1..=24).map(|j| format!("x{j}")));
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    for rep in 0..50 {
        let mut rng = realization_rng(2024, rep);
        let rows: Vec<Vec<f64>> = (0..100).map(|_| (0..25).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()).collect();
        let data = dir.path().join(format!("noise{rep}.csv"));
        write_csv(&data, &names, &rows);
        let mut cfg = FitConfig::new(data, "y".into(), dir.path().join(format!("o{rep}")));
        cfg.penalties = vec![PenaltyMode::L1];
        cfg.selectors = vec![Selector::Bic];
        let picks = cmd_fit(&cfg).unwrap();
        if picks[0].coefficients.iter().all(|b| *b == 0.0) {
            empty += 1;
        }
    }
    assert!(empty >= 45, "BIC chose the empty model in {empty} of 50");
}
