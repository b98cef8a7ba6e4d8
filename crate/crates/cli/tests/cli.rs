use std::path::Path;
use std::process::{Command, Output};

fn dyncc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dyncc")).args(args).env("RUST_LOG", "warn").output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let o = dyncc(args);
    assert!(o.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn gen_lift_train_sample_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let data = d.join("data");
    ok(&["gen", "--model", "tiny-ba", "--seed", "1", "--count", "4", "--split", "2,1,1", "--out", p(&data)]);
    for f in ["train.json", "val.json", "test.json", "manifest.json"] {
        assert!(data.join(f).exists(), "{f}");
    }
    let ccs = d.join("test_ccs.json");
    ok(&["lift", "--in", p(&data.join("test.json")), "--out", p(&ccs), "--max-clique", "15"]);
    assert!(d.join("test_ccs.json.manifest.json").exists());

    let cfg = d.join("train.json");
    std::fs::write(&cfg, r#"{"loss":"bce","traversal":"deterministic","lr":0.001,"decay_factor":0.1,"patience_decay":1,"patience_stop":2,"max_epochs":2,"seed":3,"hidden":8}"#).unwrap();
    let ckpt = d.join("ckpt");
    ok(&["train", "--config", p(&cfg), "--data", p(&data), "--out", p(&ckpt)]);
    let curve = std::fs::read_to_string(ckpt.join("loss_curve.csv")).unwrap();
    assert!(curve.starts_with("epoch,train_loss,val_loss,lr\n"));

    let pred = d.join("pred.json");
    ok(&["sample", "--model", p(&ckpt), "--in", p(&ccs), "--out", p(&pred), "--seed", "4"]);
    let again = d.join("pred2.json");
    ok(&["sample", "--model", p(&ckpt), "--in", p(&ccs), "--out", p(&again), "--seed", "4"]);
    assert_eq!(std::fs::read(&pred).unwrap(), std::fs::read(&again).unwrap());

    let report = d.join("report.csv");
    ok(&["eval-graph", "--pred", p(&pred), "--target", p(&ccs), "--out", p(&report)]);
    let csv = std::fs::read_to_string(&report).unwrap();
    assert!(csv.starts_with("metric,value\n") && csv.lines().count() == 12, "{csv}");

    let base = d.join("baseline.json");
    ok(&["baseline", "--target", p(&ccs), "--out", p(&base), "--seed", "2"]);
    ok(&["eval-cc", "--pred", p(&base), "--target", p(&ccs), "--losses", "hc,hbce", "--out", p(&d.join("cc.json"))]);
}

#[test]
fn eval_cc_on_identical_inputs_scores_zero_hc() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["gen", "--model", "ba", "--n", "12", "--m", "3", "--count", "1", "--split", "1,0,0", "--out", p(d)]);
    let ccs = d.join("ccs.json");
    ok(&["lift", "--in", p(&d.join("train.json")), "--out", p(&ccs)]);
    let out = d.join("cc.json");
    ok(&["eval-cc", "--pred", p(&ccs), "--target", p(&ccs), "--out", p(&out)]);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let hc: Vec<f64> = v.as_array().unwrap().iter().filter(|r| r["variant"] == "hc").map(|r| r["mean"].as_f64().unwrap()).collect();
    assert_eq!(hc.len(), 2);
    assert!(hc.iter().all(|&x| x == 0.0), "{hc:?}");
}

#[test]
fn gradcheck_exits_zero() {
    let out = ok(&["gradcheck"]);
    assert!(out.contains("all") && !out.contains("FAIL"), "{out}");
}

#[test]
fn malformed_input_names_the_json_path() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"schema":"graphseries-v1","num_nodes":3,"timesteps":[{"edges":[[0,1],[1,"two"]]}]}"#).unwrap();
    let o = dyncc(&["lift", "--in", p(&bad), "--out", p(&dir.path().join("x.json"))]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("timesteps[0].edges[1]"), "{err}");

    let wrong = dir.path().join("wrong.json");
    std::fs::write(&wrong, r#"{"schema":"graphseries-v9","num_nodes":1,"timesteps":[]}"#).unwrap();
    let o = dyncc(&["lift", "--in", p(&wrong), "--out", p(&dir.path().join("y.json"))]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("schema"));
}

#[test]
fn pipeline_replay_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = d.join("exp.json");
    std::fs::write(
        &cfg,
        r#"{
  "dataset": {"kind":"ba","count":3,"split":[1,1,1],"seed":5,"ba":{"n":10,"m":2,"seed":0}},
  "lift": {"min_clique_size":3,"max_clique_size":15},
  "train": {"loss":"bce","traversal":"deterministic","lr":0.001,"decay_factor":0.1,"patience_decay":1,"patience_stop":2,"max_epochs":2,"seed":1,"hidden":8},
  "sample_seed": 9
}"#,
    )
    .unwrap();
    let (a, b) = (d.join("a"), d.join("b"));
    ok(&["pipeline", "--config", p(&cfg), "--out", p(&a)]);
    let out = ok(&["pipeline", "--replay", p(&a.join("manifest.json")), "--compare", p(&a), "--out", p(&b)]);
    assert!(out.contains("byte-identical"), "{out}");
}

#[test]
fn ingest_covid_builds_a_windowed_series() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("edges.json"), r#"{"num_nodes":3,"days":[[[0,1],[1,1]],[[1,2,0.5],[2,1]]]}"#).unwrap();
    std::fs::write(d.join("cases.csv"), "region,d0,d1\nA,1,2\nB,3,4\nC,5,6\n").unwrap();
    let out = d.join("covid.json");
    ok(&["ingest-covid", "--edges", p(&d.join("edges.json")), "--cases", p(&d.join("cases.csv")), "--window", "2", "--out", p(&out)]);
    let s = dyncc_core::io::graph_series_from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(s[0].len(), 2);
    assert_eq!(s[0].graphs[0].edges(), &[(0, 1)]);
    assert_eq!(s[0].graphs[1].edges(), &[(1, 2)]);
}
