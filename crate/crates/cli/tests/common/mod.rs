#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Output;

use serde_json::{json, Value};

/// A letters-only word unique to `(article, slot)`.
pub fn word(article: usize, slot: usize) -> String {
    let mut n = article * 1000 + slot;
    let mut s = String::from("zq");
    for _ in 0..4 {
        s.push((b'a' + (n % 26) as u8) as char);
        n /= 26;
    }
    s
}

/// Corpus JSON where no two articles share a word. Articles are spread over
/// `books` books, two chapters each, the first chapter holding a section.
pub fn disjoint_corpus(n_articles: usize, books: u8) -> Value {
    let per_book = n_articles.div_ceil(books as usize);
    let mut out = Vec::new();
    for b in 1..=books {
        let start = (b as usize - 1) * per_book;
        let end = (start + per_book).min(n_articles);
        let mut articles = Vec::new();
        for a in start..end {
            let n_sent = 3 + a % 3;
            let content: Vec<String> = (0..n_sent)
                .map(|s| format!("{}.", (0..4).map(|w| word(a, s * 10 + w)).collect::<Vec<_>>().join(" ")))
                .collect();
            let division = match (a - start) % 3 {
                0 => format!("b{b}c1s1"),
                1 => format!("b{b}c1"),
                _ => format!("b{b}c2"),
            };
            articles.push(json!({
                "id": (a + 1).to_string(),
                "title": format!("{} {}", word(a, 900), word(a, 901)),
                "content": content.join(" "),
                "division": division,
            }));
        }
        out.push(json!({
            "book": b,
            "divisions": [
                {"id": format!("b{b}c1"), "level": "chapter", "heading": "disposizioni generali", "children": [format!("b{b}c1s1")]},
                {"id": format!("b{b}c1s1"), "level": "section", "heading": "effetti"},
                {"id": format!("b{b}c2"), "level": "chapter", "heading": "norme speciali"}
            ],
            "articles": articles,
        }));
    }
    json!({ "books": out })
}

/// Four chapters, seven subchapters, five sections, two paragraphs.
pub fn example_tree_corpus() -> Value {
    let d = |id: &str, level: &str, children: &[&str]| json!({"id": id, "level": level, "heading": format!("heading {id}"), "children": children});
    let divisions = vec![
        d("c1", "chapter", &["sc1", "sc2"]),
        d("sc1", "subchapter", &["s1", "s2"]),
        d("s1", "section", &["p1", "p2"]),
        d("p1", "paragraph", &[]),
        d("p2", "paragraph", &[]),
        d("s2", "section", &[]),
        d("sc2", "subchapter", &["s3"]),
        d("s3", "section", &[]),
        d("c2", "chapter", &["sc3", "sc4"]),
        d("sc3", "subchapter", &[]),
        d("sc4", "subchapter", &["s4"]),
        d("s4", "section", &[]),
        d("c3", "chapter", &["sc5", "sc6"]),
        d("sc5", "subchapter", &[]),
        d("sc6", "subchapter", &["s5"]),
        d("s5", "section", &[]),
        d("c4", "chapter", &["sc7"]),
        d("sc7", "subchapter", &[]),
    ];
    let leaves = [
        "p1", "p1", "p2", "s2", "s3", "sc3", "s4", "sc5", "s5", "sc7", "s1", "c1",
    ];
    let articles: Vec<Value> = leaves
        .iter()
        .enumerate()
        .map(|(i, div)| json!({"id": (i + 1).to_string(), "title": word(i, 0), "content": format!("{}.", word(i, 1)), "division": div}))
        .collect();
    json!({"books": [{"book": 2, "divisions": divisions, "articles": articles}]})
}

pub fn write_json(dir: &Path, name: &str, value: &Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

pub fn statute(args: &[&str]) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_statute"))
        .args(args)
        .output()
        .expect("binary runs")
}

/// Runs the binary and panics with its stderr on failure.
pub fn statute_ok(args: &[&str]) -> String {
    let out = statute(args);
    assert!(
        out.status.success(),
        "statute {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Every regular file in `dir` with its bytes, sorted by name.
pub fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}
