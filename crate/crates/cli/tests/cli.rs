use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chaining_cli::ExperimentConfig;

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn chaining(args: &[&str], threads: Option<usize>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_chaining"));
    cmd.args(args);
    match threads {
        Some(n) => cmd.env("CHAINING_THREADS", n.to_string()),
        None => cmd.env_remove("CHAINING_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn run_config(sub: &str, config: &Path, out: &Path, threads: Option<usize>) -> Output {
    chaining(&[sub, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()], threads)
}

fn report(out: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn rademacher_basis_two_sided_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_config("two-sided", &configs_dir().join("two_sided_rademacher_257.json"), tmp.path(), None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(tmp.path());
    assert_eq!(r["pass"], true);
    let gamma = r["result"]["gamma"].as_f64().unwrap();
    assert!((gamma - 5.93001).abs() < 1e-5, "{gamma}");
    assert!((r["result"]["esup"]["mean"].as_f64().unwrap() - 2.0).abs() < 0.02);
}

#[test]
fn singleton_supremum_is_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_config("supremum", &configs_dir().join("supremum_singleton.json"), tmp.path(), None);
    assert_eq!(o.status.code(), Some(0));
    let r = report(tmp.path());
    assert_eq!(r["result"]["mean"].as_f64(), Some(0.0));
}

#[test]
fn small_sudakov_set_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_config("sudakov", &configs_dir().join("sudakov_too_small.json"), tmp.path(), None);
    assert_eq!(o.status.code(), Some(2));
    let r = report(tmp.path());
    assert_eq!(r["pass"], false);
    assert_eq!(r["result"]["report"]["cardinality_ok"], false);
}

#[test]
fn schema_errors_name_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = write_config(
        tmp.path(),
        "bad.json",
        r#"{"experiment": "gamma", "process": [{"family": "gaussian"}], "index_set": {"basis": {"n": 2}}, "params": {"p": "two"}}"#,
    );
    let o = run_config("gamma", &bad, &tmp.path().join("out"), None);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("params.p"), "{err}");

    let unknown = write_config(
        tmp.path(),
        "unknown.json",
        r#"{"experiment": "gamma", "process": [{"family": "gaussian", "shape": 2}], "index_set": {"basis": {"n": 1}}}"#,
    );
    let o = run_config("gamma", &unknown, &tmp.path().join("out"), None);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("process[0]"));
}

#[test]
fn sampled_experiments_need_a_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "noseed.json",
        r#"{"experiment": "supremum", "process": [{"family": "gaussian", "count": 2}], "index_set": {"basis": {"n": 2}}}"#,
    );
    let o = run_config("supremum", &cfg, &tmp.path().join("out"), None);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("params.seed"));
    let o = chaining(
        &["supremum", "--config", cfg.to_str().unwrap(), "--out", tmp.path().join("o2").to_str().unwrap(), "--seed", "4"],
        None,
    );
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn exact_mode_cap_gives_guidance() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "big.json",
        r#"{"experiment": "gamma", "process": [{"family": "gaussian", "count": 11}], "index_set": {"basis": {"n": 11}}}"#,
    );
    let o = chaining(
        &["gamma", "--config", cfg.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap(), "--mode", "exact"],
        None,
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--mode greedy"));
}

#[test]
fn subcommand_must_match_config() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_config("gamma", &configs_dir().join("supremum_singleton.json"), tmp.path(), None);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("experiment"));
}

#[test]
fn unwritable_output_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let file = write_config(tmp.path(), "occupied", "");
    let o = run_config("supremum", &configs_dir().join("supremum_singleton.json"), &file.join("sub"), None);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn reports_are_identical_across_worker_counts_and_output_dirs() {
    let tmp = tempfile::tempdir().unwrap();
    for (sub, name) in
        [("compare", "compare_rademacher_gaussian"), ("sudakov", "sudakov_gaussian_basis"), ("hull", "hull_gaussian")]
    {
        let cfg = configs_dir().join(format!("{name}.json"));
        let (a, b) = (tmp.path().join(format!("{name}_1")), tmp.path().join(format!("{name}_8")));
        assert!(run_config(sub, &cfg, &a, Some(1)).status.success());
        assert!(run_config(sub, &cfg, &b, Some(8)).status.success());
        let ra = std::fs::read(a.join("report.json")).unwrap();
        assert_eq!(ra, std::fs::read(b.join("report.json")).unwrap(), "{name}");
        for entry in std::fs::read_dir(&a).unwrap() {
            let f = entry.unwrap().file_name();
            assert_eq!(std::fs::read(a.join(&f)).unwrap(), std::fs::read(b.join(&f)).unwrap(), "{name}/{f:?}");
        }
    }
}

#[test]
fn bad_thread_count_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_chaining"));
    let cfg = configs_dir().join("supremum_singleton.json");
    cmd.args(["supremum", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()])
        .env("CHAINING_THREADS", "many");
    assert_eq!(cmd.output().unwrap().status.code(), Some(1));
}

#[test]
fn shipped_configs_parse_and_validate() {
    let mut seen = 0;
    for entry in std::fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") && path.file_name().unwrap() != "schema.json" {
            let cfg = ExperimentConfig::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
            cfg.validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 8);
}

#[test]
fn report_embeds_seeds_grids_and_hash() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(run_config("compare", &configs_dir().join("compare_rademacher_gaussian.json"), tmp.path(), None).status.success());
    let r = report(tmp.path());
    assert_eq!(r["seeds"]["master_seed"], 9);
    assert_eq!(r["seeds"]["index_set_seeds"][0], serde_json::json!(["index_set", 21]));
    assert_eq!(r["grids"]["p_grid"], serde_json::json!([2.0, 4.0]));
    assert_eq!(r["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(r["config"]["output"]["dir"], serde_json::Value::Null);
    assert_eq!(r["tool"]["name"], "chaining");
    let tables: Vec<_> = r["tables"].as_array().unwrap().iter().map(|t| t.as_str().unwrap().to_string()).collect();
    for t in &tables {
        assert!(tmp.path().join(t).exists(), "{t}");
    }
    let curves = std::fs::read_to_string(tmp.path().join("tail_curves.csv")).unwrap();
    assert!(curves.starts_with("quantile,u,c,p_y,p_x,ratio\n"));
}

#[test]
fn schema_lists_every_experiment_and_family() {
    let schema: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(configs_dir().join("schema.json")).unwrap()).unwrap();
    let experiments: Vec<&str> =
        schema["properties"]["experiment"]["enum"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    for e in &experiments {
        let text = format!(r#"{{"experiment": "{e}", "process": [{{"family": "gaussian"}}]}}"#);
        let cfg = ExperimentConfig::from_json(&text).unwrap();
        assert_eq!(cfg.experiment.name(), *e);
    }
    assert_eq!(experiments.len(), 8);
    for family in schema["$defs"]["process"]["items"]["oneOf"].as_array().unwrap() {
        let name = family["properties"]["family"]["const"].as_str().unwrap();
        let extra = match name {
            "sym_weibull" => r#", "shape": 1.5"#,
            "three_point" => r#", "atom": 3.0"#,
            "power_tail" => r#", "scale": 1.0, "exponent": 2.0"#,
            _ => "",
        };
        let text = format!(
            r#"{{"experiment": "gamma", "process": [{{"family": "{name}", "count": 2{extra}}}],
                "index_set": {{"interleave_of": {{"scaled": {{"factor": 2.0, "of": {{"basis": {{"n": 1}}}}}}}}}}}}"#
        );
        let cfg = ExperimentConfig::from_json(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let out = chaining_cli::run(&cfg).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(out.report.pass, "{name}");
    }
}
