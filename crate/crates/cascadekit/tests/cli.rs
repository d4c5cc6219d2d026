use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn sample(file: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/sample").join(file)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cascadekit"))
        .args(["--threads", "1"])
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().map(str::to_string).collect()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn subcommands_chain() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name);
    let (posts, comments, lexicon) = (sample("posts.jsonl"), sample("comments.jsonl"), sample("lexicon_sample.txt"));

    ok(&["ingest", "--posts", s(&posts), "--comments", s(&comments), "--out", s(&p("events.jsonl")), "--report", s(&p("ingest.json"))]);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(p("ingest.json")).unwrap()).unwrap();
    assert_eq!(report["lines_read"], 300);
    assert_eq!(report["malformed_lines"], 2);
    assert_eq!(report["bot_comments_dropped"], 14);

    let events = p("events.jsonl");
    ok(&["metrics", "--events", s(&events), "--out", s(&p("metrics.csv"))]);
    assert_eq!(lines(&p("metrics.csv")).len(), 41);
    for community in ["conspiracy", "science"] {
        ok(&["metrics", "--events", s(&events), "--community", community, "--out", s(&p(&format!("{community}.csv")))]);
    }
    assert_eq!(lines(&p("conspiracy.csv")).len(), 21);

    ok(&["ccdf", "--column", "size", s(&p("metrics.csv")), "--out", s(&p("ccdf.csv"))]);
    let ccdf = lines(&p("ccdf.csv"));
    assert_eq!(ccdf[0], "value,ccdf");
    assert!(ccdf[1].ends_with(",1"), "CCDF starts at 1: {}", ccdf[1]);

    let ks = ok(&["kstest", "--column", "size", s(&p("conspiracy.csv")), s(&p("science.csv"))]);
    assert!(ks.contains("size"), "{ks}");

    ok(&["growth", "--events", s(&events), "--cap", "10", "--out", s(&p("growth.csv"))]);
    assert!(lines(&p("growth.csv"))[0].starts_with("community,curve,index"));

    ok(&["affect", "--lexicon", s(&lexicon), "--events", s(&events), "--out", s(&p("affect.csv"))]);

    ok(&["lda", "tokenize", "--events", s(&events), "--kind", "post", "--out", s(&p("docs.jsonl"))]);
    ok(&[
        "lda", "fit", "--k", "3", "--in", s(&p("docs.jsonl")), "--model", s(&p("lda.bin")), "--theta",
        s(&p("theta.csv")), "--iterations", "50",
    ]);
    assert_eq!(&fs::read(p("lda.bin")).unwrap()[..5], b"CKLDA");
    ok(&["lda", "infer", "--model", s(&p("lda.bin")), "--in", s(&p("docs.jsonl")), "--theta", s(&p("theta2.csv"))]);
    assert_eq!(lines(&p("theta.csv")).len(), lines(&p("theta2.csv")).len());

    ok(&["network", "build", "--events", s(&events), "--community", "conspiracy", "--out", s(&p("net.bin"))]);
    let stats = ok(&["network", "stats", "--net", s(&p("net.bin"))]);
    assert!(stats.contains("25"), "{stats}");
    ok(&["network", "degrees", "--net", s(&p("net.bin")), "--out", s(&p("degrees.csv"))]);
    ok(&["percolate", "--net", s(&p("net.bin")), "--grid", "0:0.5:0.1", "--adaptive", "--out", s(&p("perc.csv"))]);
    let g: Vec<f64> =
        lines(&p("perc.csv")).iter().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(g.len(), 6);
    assert_eq!(g[0], 1.0);
    assert!(g.windows(2).all(|w| w[1] <= w[0]));

    ok(&[
        "features", "--events", s(&events), "--metrics", s(&p("metrics.csv")), "--affect", s(&p("affect.csv")),
        "--theta", s(&p("theta.csv")), "--out", s(&p("features.csv")),
    ]);
    ok(&[
        "classify", "--features", s(&p("features.csv")), "--combination", "topic,dynamic+emotion", "--trials", "2",
        "--trees", "10", "--report", s(&p("auc.csv")),
    ]);
    let auc = lines(&p("auc.csv"));
    assert_eq!(auc[0], "combination,trial,auc");
    assert_eq!(auc.len(), 1 + 2 * 2 + 2 * 2);

    ok(&["sources", "--events", s(&events), "--metrics", s(&p("metrics.csv")), "--out", s(&p("subgroups.csv"))]);
    assert_eq!(lines(&p("subgroups.csv")).len(), 1 + 13 * 3);

    ok(&["report", "--events", s(&events), "--out", s(&p("report.csv")), "--monthly", s(&p("monthly.csv"))]);
    assert!(lines(&p("report.csv"))[0].starts_with("indicator,group"));
}

fn write_config(dir: &Path, extra: &str) -> PathBuf {
    let path = dir.join("pipeline.toml");
    let body = format!(
        "posts = [{:?}]\ncomments = [{:?}]\nout_dir = \"out\"\n{extra}\n[topics]\nk = 3\niterations = 20\n\n[classify]\ntrees = 5\ntrials = 2\n",
        sample("posts.jsonl"),
        sample("comments.jsonl"),
    );
    fs::write(&path, body).unwrap();
    path
}

#[test]
fn pipeline_rejects_missing_lexicon_before_work() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "stages = [\"metrics\", \"affect\"]");
    let out = run(&["pipeline", "--config", s(&config)]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("lexicon"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn failed_stage_leaves_no_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let extra = format!(
        "lexicon = {:?}\npositive_community = \"nowhere\"\nstages = [\"metrics\", \"affect\", \"topics\", \"classify\"]",
        sample("lexicon_sample.txt")
    );
    let config = write_config(dir.path(), &extra);
    let out = run(&["pipeline", "--config", s(&config)]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("stage `classify`"), "{err}");
    let out_dir = dir.path().join("out");
    assert!(out_dir.join("metrics.csv").exists());
    assert!(!out_dir.join("features.csv").exists());
    assert!(!out_dir.join("auc.csv").exists());
    assert!(!out_dir.join("manifest.json").exists());
}

#[test]
fn pipeline_is_thread_count_independent() {
    let dir = tempfile::tempdir().unwrap();
    let extra = format!("lexicon = {:?}", sample("lexicon_sample.txt"));
    let config = write_config(dir.path(), &extra);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    ok(&["pipeline", "--config", s(&config), "--out-dir", s(&a)]);
    let out = Command::new(env!("CARGO_BIN_EXE_cascadekit"))
        .args(["--threads", "3", "pipeline", "--config", s(&config), "--out-dir", s(&b)])
        .output()
        .unwrap();
    assert!(out.status.success());
    for file in ["metrics.csv", "affect.csv", "theta_posts.csv", "percolation.csv", "auc.csv", "report.csv"] {
        assert_eq!(fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap(), "{file}");
    }
}

#[test]
fn bad_input_reports_error() {
    let out = run(&["metrics", "--events", "/nonexistent/events.jsonl", "--out", "/tmp/x.csv"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}
