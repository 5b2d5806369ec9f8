use std::fs;
use std::path::Path;

use symlab::config::Layer;
use symlab::{main_with_args, run_and_write, CliError, ExperimentSpec};
use symlab_core::lie::GroupKind;

fn args(list: &[&str]) -> Vec<String> {
    std::iter::once("symlab").chain(list.iter().copied()).map(String::from).collect()
}

fn csvs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

#[test]
fn empty_config_gives_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.conf");
    fs::write(&cfg, "").unwrap();
    let spec = ExperimentSpec::from_file("gauge-covariance-2d", &cfg, dir.path().join("out")).unwrap();
    assert_eq!(spec.settings.d, 2);
    assert_eq!(spec.settings.n, 64);
    assert_eq!(spec.settings.group, GroupKind::SU2);
    let resolved = spec.layers.resolve();
    assert_eq!(resolved["n"].1, Layer::Default);
}

#[test]
fn alpha_outside_range_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    fs::write(&cfg, "alpha = 0.5\n").unwrap();
    let err = ExperimentSpec::from_file("norm-scaling", &cfg, dir.path().join("out")).unwrap_err();
    assert!(matches!(err, CliError::Config(_)));
    assert!(err.to_string().contains("(2/3, 1)"), "{err}");
}

#[test]
fn unknown_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let err = ExperimentSpec::new("det-ym-flow", None, &["nonsense=1".into()], None, dir.path().into()).unwrap_err();
    assert!(err.to_string().contains("nonsense"));
}

#[test]
fn flag_overrides_file_and_manifest_records_both() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "# small run\nn = 12\nhorizon = 0.002\nsizes = 8,12\n").unwrap();
    let out = dir.path().join("out");
    let code = main_with_args(args(&[
        "det-ym-flow",
        "--config",
        cfg.to_str().unwrap(),
        "--set",
        "n=16",
        "--out",
        out.to_str().unwrap(),
    ]));
    assert_ne!(code, 2);
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["n"], "16");
    assert_eq!(manifest["sources"]["n"], "flag");
    assert_eq!(manifest["sources"]["horizon"], "file");
    assert_eq!(manifest["sources"]["d"], "default");
    assert_eq!(manifest["layers"]["file"]["n"], "12");
    assert_eq!(manifest["layers"]["flags"]["n"], "16");
    assert!(manifest["version"].as_str().unwrap().starts_with("symlab"));
    for f in manifest["artifacts"].as_array().unwrap() {
        assert!(out.join(f.as_str().unwrap()).exists(), "{f}");
    }
}

#[test]
fn unknown_experiment_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let code = main_with_args(args(&["no-such-thing", "--out", dir.path().to_str().unwrap()]));
    assert_ne!(code, 0);
}

#[test]
fn malformed_seed_range_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let code = main_with_args(args(&["she-exact", "--seeds", "5..2", "--out", dir.path().to_str().unwrap()]));
    assert_eq!(code, 2);
}

#[test]
fn reruns_are_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let flags: Vec<String> = ["n=8", "horizon=0.01", "dt=1e-4", "sample_every=5"].iter().map(|s| s.to_string()).collect();
    let run = |sub: &str| {
        let spec = ExperimentSpec::new("she-exact", None, &flags, Some("0..2"), dir.path().join(sub)).unwrap();
        run_and_write(&spec).unwrap();
        csvs(&dir.path().join(sub))
    };
    let a = run("a");
    let b = run("b");
    assert!(!a.is_empty());
    assert_eq!(a, b);
    let ma = fs::read(dir.path().join("a/manifest.json")).unwrap();
    let mb = fs::read(dir.path().join("b/manifest.json")).unwrap();
    assert_eq!(ma, mb);
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let flags: Vec<String> = ["n=8", "horizon=0.5"].iter().map(|s| s.to_string()).collect();
    let spec = |sub: &str| ExperimentSpec::new("generative-abelian", None, &flags, Some("0..6"), dir.path().join(sub)).unwrap();
    let pool = |k| rayon::ThreadPoolBuilder::new().num_threads(k).build().unwrap();
    pool(1).install(|| run_and_write(&spec("one")).unwrap());
    pool(3).install(|| run_and_write(&spec("three")).unwrap());
    assert_eq!(csvs(&dir.path().join("one")), csvs(&dir.path().join("three")));
}
