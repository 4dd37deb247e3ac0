mod common;

use std::path::Path;

use common::{disjoint_corpus, snapshot, statute, statute_ok, write_json};
use serde_json::Value;

fn error_of(args: &[&str]) -> Value {
    let out = statute(args);
    assert!(!out.status.success(), "expected failure for {args:?}");
    serde_json::from_slice(out.stderr.trim_ascii()).expect("stderr is one JSON object")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn errors_are_json_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let e = error_of(&["stats", "--corpus", "/nonexistent/corpus.json"]);
    assert_eq!(e["error"], "config");

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"books\": [").unwrap();
    let e = error_of(&["stats", "--corpus", path(&bad), "--out-dir", path(dir.path())]);
    assert_eq!(e["error"], "parse");
    assert!(e["message"].as_str().unwrap().contains("bad.json:"));

    let e = error_of(&["no-such-command"]);
    assert_eq!(e["error"], "usage");

    let corpus = write_json(dir.path(), "c.json", &disjoint_corpus(4, 1));
    let e = error_of(&[
        "make-training",
        "--corpus",
        path(&corpus),
        "--scheme",
        "uni-rr-empht",
        "--min-tu",
        "8",
    ]);
    assert_eq!(e["error"], "config");
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_json(dir.path(), "c.json", &disjoint_corpus(6, 1));
    let out = dir.path().join("out");
    let config = serde_json::json!({
        "corpus": corpus, "scheme": "title-rr", "min_tu": 8, "out_dir": out,
    });
    let config_path = write_json(dir.path(), "run.json", &config);
    let printed = statute_ok(&["make-training", "--config", path(&config_path), "--min-tu", "16"]);
    assert!(printed.trim().ends_with("all_title-rr_tu16.jsonl"), "{printed}");
    let units = std::fs::read_to_string(out.join("all_title-rr_tu16.jsonl")).unwrap();
    assert_eq!(units.lines().count(), 6 * 16);

    let unknown = write_json(dir.path(), "bad.json", &serde_json::json!({"corpsu": "x"}));
    assert_eq!(error_of(&["stats", "--config", path(&unknown)])["error"], "config");
}

#[test]
fn training_file_covers_every_book_article() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_json(dir.path(), "c.json", &disjoint_corpus(30, 3));
    let out = dir.path().join("out");
    statute_ok(&[
        "make-training",
        "--corpus",
        path(&corpus),
        "--scope",
        "book:2",
        "--scheme",
        "uni-rr-empht",
        "--min-tu",
        "32",
        "--out-dir",
        path(&out),
    ]);
    let text = std::fs::read_to_string(out.join("book2_uni-rr-empht_tu32.jsonl")).unwrap();
    let records: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(records.len() >= 32 * 10);
    let keys: Vec<&String> = records[0].as_object().unwrap().keys().collect();
    assert_eq!(keys, ["article_id", "block_index", "book", "replica", "scheme", "text"]);
    assert!(records.iter().all(|r| r["book"] == 2));
}

#[test]
fn manifest_tracks_input_digests() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_json(dir.path(), "c.json", &disjoint_corpus(6, 1));
    let out = dir.path().join("out");
    let args = ["stats", "--corpus", path(&corpus), "--out-dir", path(&out)];
    statute_ok(&args);
    let manifest_name = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .find(|n| n.starts_with("manifest_stats_"))
        .expect("manifest written");
    let read =
        || -> Value { serde_json::from_str(&std::fs::read_to_string(out.join(&manifest_name)).unwrap()).unwrap() };
    let before = read();
    assert_eq!(before["inputs"][0]["path"], path(&corpus));
    assert_eq!(before["outputs"][0]["path"], "stats_all.csv");
    assert!(before["config"].get("out_dir").is_none());

    statute_ok(&args);
    assert_eq!(read(), before);

    let mut text = std::fs::read(&corpus).unwrap();
    text.push(b' ');
    std::fs::write(&corpus, text).unwrap();
    statute_ok(&args);
    let after = read();
    assert_ne!(after["inputs"][0]["sha256"], before["inputs"][0]["sha256"]);
    assert_eq!(after["outputs"], before["outputs"]);
    assert_eq!(after["config_sha256"], before["config_sha256"]);
}

#[test]
fn replayed_sentences_score_perfectly() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_json(dir.path(), "c.json", &disjoint_corpus(12, 1));
    let out = dir.path().join("out");
    let (c, o) = (path(&corpus), path(&out));
    statute_ok(&["make-training", "--corpus", c, "--out-dir", o]);
    statute_ok(&["train-baseline", "--corpus", c, "--out-dir", o]);
    statute_ok(&["make-queries", "--corpus", c, "--out-dir", o, "--rate", "1.0"]);
    let queries = out.join("queries_all_q1.jsonl");
    statute_ok(&["predict", "--out-dir", o, "--queries", path(&queries)]);
    let predictions = out.join("predictions_queries_all_q1.csv");
    statute_ok(&[
        "eval-single",
        "--out-dir",
        o,
        "--predictions",
        path(&predictions),
        "--queries",
        path(&queries),
    ]);
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("metrics_single_queries_all_q1.json")).unwrap())
            .unwrap();
    for metric in ["accuracy", "P", "R", "F_micro", "F_macro", "MRR", "R@3", "R@10"] {
        assert_eq!(report["metrics"][metric], 1.0, "{metric}");
    }
    statute_ok(&["report", "--out-dir", o]);
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.starts_with("protocol,portion,accuracy,P,R,F_micro,F_macro"));
}

#[test]
fn one_hot_external_predictions_give_all_ones() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_json(dir.path(), "c.json", &disjoint_corpus(3, 1));
    let queries = dir.path().join("q.jsonl");
    std::fs::write(
        &queries,
        "{\"query_id\":\"a\",\"qtype\":3,\"text\":\"x\",\"gold\":[\"1\"]}\n{\"query_id\":\"b\",\"qtype\":3,\"text\":\"y\",\"gold\":[\"3\"]}\n",
    )
    .unwrap();
    // Eight significant digits, the way an external writer might format it.
    let predictions = dir.path().join("p.csv");
    std::fs::write(
        &predictions,
        "query_id,1,2,3\na,1.0000000,0.0000000,0.0000000\nb,0,0,1\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = path(&out);
    statute_ok(&[
        "load-predictions",
        "--corpus",
        path(&corpus),
        "--predictions",
        path(&predictions),
        "--out-dir",
        o,
    ]);
    statute_ok(&[
        "eval-single",
        "--predictions",
        path(&predictions),
        "--queries",
        path(&queries),
        "--out-dir",
        o,
    ]);
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("metrics_single_q.json")).unwrap()).unwrap();
    assert_eq!(report["metrics"]["F_macro"], 1.0);
    assert_eq!(report["metrics"]["E"], 0.0);

    std::fs::write(&predictions, "query_id,1,2,3\na,0.5,0.1,0.1\nb,0,0,1\n").unwrap();
    let e = error_of(&[
        "load-predictions",
        "--corpus",
        path(&corpus),
        "--predictions",
        path(&predictions),
        "--out-dir",
        o,
    ]);
    assert_eq!(e["error"], "predictions");

    std::fs::write(&predictions, "query_id,1,2\na,1,0\nb,0,1\n").unwrap();
    let e = error_of(&[
        "load-predictions",
        "--corpus",
        path(&corpus),
        "--predictions",
        path(&predictions),
        "--out-dir",
        o,
    ]);
    assert_eq!(e["error"], "predictions");
}

#[test]
fn embedding_clustering_and_attributes() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_json(dir.path(), "c.json", &disjoint_corpus(6, 1));
    let embeddings = dir.path().join("emb.csv");
    std::fs::write(
        &embeddings,
        "article_id,v0,v1,v2\n1,1,0,0\n2,0.9,0.1,0\n3,0,1,0\n4,0,0.8,0.1\n5,0,0,1\n6,0.1,0,2\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let (c, o) = (path(&corpus), path(&out));
    statute_ok(&[
        "cluster",
        "--corpus",
        c,
        "--embeddings",
        path(&embeddings),
        "--k",
        "3",
        "--out-dir",
        o,
    ]);
    let partition = std::fs::read_to_string(out.join("partition_all_embeddings.csv")).unwrap();
    assert_eq!(partition, "article_id,partition_id\n1,0\n2,0\n3,1\n4,1\n5,2\n6,2\n");

    statute_ok(&["attributes", "--corpus", c, "--out-dir", o]);
    let schema: Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("attributes_book1.json")).unwrap()).unwrap();
    assert_eq!(schema.as_array().unwrap().len(), 3);
    assert_eq!(schema[0]["attribute_id"], 1);
    let vectors = std::fs::read_to_string(out.join("attribute_vectors_book1.csv")).unwrap();
    assert!(
        vectors.starts_with("article_id,b0,b1,b2\n1,1,1,0\n2,1,0,0\n3,0,0,1\n"),
        "{vectors}"
    );
    let leftovers: Vec<String> = snapshot(&out)
        .into_iter()
        .map(|(n, _)| n)
        .filter(|n| n.starts_with(".tmp"))
        .collect();
    assert!(leftovers.is_empty(), "{leftovers:?}");
}
