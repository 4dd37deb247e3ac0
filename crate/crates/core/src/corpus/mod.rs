//! Law corpus model: articles organized under a chapter / subchapter /
//! section / paragraph hierarchy, one forest per book.

mod normalize;
mod segment;
mod stats;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{ArticleId, Scope};

pub use normalize::{normalize_text, word_tokens, Normalizer, TERMINATORS};
pub use segment::segment_sentences;
pub use stats::{corpus_stats, stats_csv, BookStats, Summary};

/// Books are numbered 1 through 6.
pub const BOOK_RANGE: std::ops::RangeInclusive<u8> = 1..=6;

/// Division level, ordered from the top of the hierarchy down.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Chapter,
    Subchapter,
    Section,
    Paragraph,
}

impl Level {
    pub fn as_str(&self) -> &'static str {
        match self {
            Level::Chapter => "chapter",
            Level::Subchapter => "subchapter",
            Level::Section => "section",
            Level::Paragraph => "paragraph",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "chapter" => Ok(Level::Chapter),
            "subchapter" => Ok(Level::Subchapter),
            "section" => Ok(Level::Section),
            "paragraph" => Ok(Level::Paragraph),
            other => Err(Error::Config(format!("unknown division level {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DivisionNode {
    pub id: String,
    pub level: Level,
    pub heading: String,
    pub children: Vec<String>,
    pub book: u8,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Article {
    pub id: ArticleId,
    pub book: u8,
    pub title: String,
    /// Normalized content sentences, title excluded.
    pub sentences: Vec<String>,
    /// Division ids from the chapter down to the terminal division.
    pub division_path: Vec<String>,
}

impl Article {
    /// Id of the division that directly contains the article.
    pub fn terminal_division(&self) -> &str {
        self.division_path.last().map(String::as_str).unwrap_or_default()
    }

    /// Title followed by the content sentences.
    pub fn full_sequence(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.title.as_str()).chain(self.sentences.iter().map(String::as_str))
    }
}

/// `(id, book, title, sentences, terminal division id)`.
pub type ArticleParts = (ArticleId, u8, String, Vec<String>, String);

#[derive(Clone, Debug, PartialEq)]
pub struct Corpus {
    pub articles: Vec<Article>,
    pub hierarchy: Vec<DivisionNode>,
    pub scope: Scope,
}

impl Corpus {
    /// Validates the parts and assembles a corpus, deriving each article's
    /// division path from the hierarchy. Each article tuple is
    /// `(id, book, title, sentences, terminal division id)`.
    pub fn assemble(articles: Vec<ArticleParts>, hierarchy: Vec<DivisionNode>, scope: Scope) -> Result<Corpus> {
        let index = validate_hierarchy(&hierarchy)?;
        let mut parent: HashMap<&str, &str> = HashMap::new();
        for node in &hierarchy {
            for child in &node.children {
                parent.insert(child.as_str(), node.id.as_str());
            }
        }

        let mut seen = HashSet::new();
        let mut direct_articles: HashMap<&str, usize> = HashMap::new();
        let mut built = Vec::with_capacity(articles.len());
        for (id, book, title, sentences, division) in &articles {
            if !seen.insert(id.clone()) {
                return Err(Error::Validation(format!("duplicate article id {id}")));
            }
            if title.is_empty() {
                return Err(Error::Article {
                    id: id.clone(),
                    message: "title is empty after normalization".into(),
                });
            }
            let node = index
                .get(division.as_str())
                .map(|&i| &hierarchy[i])
                .ok_or_else(|| Error::Validation(format!("article {id} references unknown division {division:?}")))?;
            if node.book != *book {
                return Err(Error::Validation(format!(
                    "article {id} in book {book} references division {division:?} of book {}",
                    node.book
                )));
            }
            *direct_articles.entry(node.id.as_str()).or_default() += 1;

            let mut path = vec![node.id.clone()];
            let mut cur = node.id.as_str();
            while let Some(&p) = parent.get(cur) {
                path.push(p.to_string());
                cur = p;
            }
            path.reverse();
            built.push(Article {
                id: id.clone(),
                book: *book,
                title: title.clone(),
                sentences: sentences.clone(),
                division_path: path,
            });
        }

        for node in &hierarchy {
            if node.children.is_empty() && !direct_articles.contains_key(node.id.as_str()) {
                return Err(Error::Validation(format!(
                    "leaf division {:?} has no articles",
                    node.id
                )));
            }
        }

        Ok(Corpus {
            articles: built,
            hierarchy,
            scope,
        })
    }

    /// Books present in the corpus, in order of first appearance.
    pub fn books(&self) -> Vec<u8> {
        let mut books = Vec::new();
        for b in self
            .hierarchy
            .iter()
            .map(|n| n.book)
            .chain(self.articles.iter().map(|a| a.book))
        {
            if !books.contains(&b) {
                books.push(b);
            }
        }
        books
    }

    /// Sub-corpus for a scope. Errors when the scope holds no articles.
    pub fn restrict(&self, scope: Scope) -> Result<Corpus> {
        let articles: Vec<Article> = self
            .articles
            .iter()
            .filter(|a| scope.contains_book(a.book))
            .cloned()
            .collect();
        if articles.is_empty() {
            return Err(Error::Empty(format!("scope {scope} has no articles")));
        }
        Ok(Corpus {
            articles,
            hierarchy: self
                .hierarchy
                .iter()
                .filter(|n| scope.contains_book(n.book))
                .cloned()
                .collect(),
            scope,
        })
    }

    pub fn article(&self, id: &ArticleId) -> Option<&Article> {
        self.articles.iter().find(|a| &a.id == id)
    }

    pub fn node(&self, id: &str) -> Option<&DivisionNode> {
        self.hierarchy.iter().find(|n| n.id == id)
    }

    /// Articles in ascending natural id order.
    pub fn sorted_articles(&self) -> Vec<&Article> {
        let mut out: Vec<&Article> = self.articles.iter().collect();
        out.sort_by(|a, b| a.id.cmp(&b.id));
        out
    }

    /// Article ids in ascending natural order.
    pub fn article_ids(&self) -> Vec<ArticleId> {
        self.sorted_articles().into_iter().map(|a| a.id.clone()).collect()
    }

    /// Division nodes of a book in depth-first document order.
    pub fn nodes_in_document_order(&self, book: u8) -> Vec<&DivisionNode> {
        let nodes: Vec<&DivisionNode> = self.hierarchy.iter().filter(|n| n.book == book).collect();
        let by_id: HashMap<&str, &DivisionNode> = nodes.iter().map(|n| (n.id.as_str(), *n)).collect();
        let children: HashSet<&str> = nodes
            .iter()
            .flat_map(|n| n.children.iter().map(String::as_str))
            .collect();
        let mut out = Vec::with_capacity(nodes.len());
        let mut stack: Vec<&DivisionNode> = nodes
            .iter()
            .rev()
            .filter(|n| !children.contains(n.id.as_str()))
            .copied()
            .collect();
        while let Some(node) = stack.pop() {
            out.push(node);
            for child in node.children.iter().rev() {
                if let Some(c) = by_id.get(child.as_str()) {
                    stack.push(c);
                }
            }
        }
        out
    }

    /// Every article under a division node, in ascending id order.
    pub fn articles_under(&self, node_id: &str) -> Vec<ArticleId> {
        let mut ids: Vec<ArticleId> = self
            .articles
            .iter()
            .filter(|a| a.division_path.iter().any(|d| d == node_id))
            .map(|a| a.id.clone())
            .collect();
        ids.sort();
        ids
    }

    /// Serialized (normalized) corpus in the input schema, with
    /// `sentences` in place of `content`.
    pub fn to_json(&self) -> String {
        let books = self
            .books()
            .into_iter()
            .map(|book| BookRecord {
                book,
                divisions: self
                    .hierarchy
                    .iter()
                    .filter(|n| n.book == book)
                    .map(|n| DivisionRecord {
                        id: n.id.clone(),
                        level: n.level,
                        heading: n.heading.clone(),
                        children: n.children.clone(),
                    })
                    .collect(),
                articles: self
                    .articles
                    .iter()
                    .filter(|a| a.book == book)
                    .map(|a| ArticleRecord {
                        id: a.id.as_str().to_string(),
                        title: a.title.clone(),
                        content: None,
                        sentences: Some(a.sentences.clone()),
                        division: a.terminal_division().to_string(),
                    })
                    .collect(),
            })
            .collect();
        let mut out = serde_json::to_string_pretty(&CorpusRecord { books }).expect("corpus serializes");
        out.push('\n');
        out
    }
}

fn validate_hierarchy(hierarchy: &[DivisionNode]) -> Result<HashMap<&str, usize>> {
    let mut index = HashMap::new();
    for (i, node) in hierarchy.iter().enumerate() {
        if index.insert(node.id.as_str(), i).is_some() {
            return Err(Error::Validation(format!("duplicate division id {:?}", node.id)));
        }
    }
    let mut parent_of: HashMap<&str, &str> = HashMap::new();
    for node in hierarchy {
        for child in &node.children {
            let c = index
                .get(child.as_str())
                .map(|&i| &hierarchy[i])
                .ok_or_else(|| Error::Validation(format!("division {:?} lists unknown child {child:?}", node.id)))?;
            if c.book != node.book {
                return Err(Error::Validation(format!(
                    "division {:?} has child {child:?} in another book",
                    node.id
                )));
            }
            if c.level <= node.level {
                return Err(Error::Validation(format!(
                    "division {:?} ({}) has child {child:?} at level {}; levels must descend",
                    node.id, node.level, c.level
                )));
            }
            if let Some(prev) = parent_of.insert(child.as_str(), node.id.as_str()) {
                return Err(Error::Validation(format!(
                    "division {child:?} has two parents: {prev:?} and {:?}",
                    node.id
                )));
            }
        }
    }
    for node in hierarchy {
        if !parent_of.contains_key(node.id.as_str()) && node.level != Level::Chapter {
            return Err(Error::Validation(format!(
                "top-level division {:?} must be a chapter, found {}",
                node.id, node.level
            )));
        }
    }
    // Strictly descending levels along parent links rule out cycles.
    Ok(index)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CorpusRecord {
    books: Vec<BookRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BookRecord {
    book: u8,
    divisions: Vec<DivisionRecord>,
    articles: Vec<ArticleRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DivisionRecord {
    id: String,
    level: Level,
    heading: String,
    #[serde(default)]
    children: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArticleRecord {
    id: String,
    title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    content: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sentences: Option<Vec<String>>,
    division: String,
}

/// Normalizes a single-sentence field (title or heading): terminators are
/// folded into spaces.
fn normalize_line(raw: &str) -> String {
    segment_sentences(&normalize_text(raw)).join(" ")
}

/// Parses a corpus file in either raw (`content`) or normalized
/// (`sentences`) form.
pub fn parse_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_corpus_str(&text, &path.display().to_string())
}

/// Parses corpus JSON text; `origin` names the source in error messages.
pub fn parse_corpus_str(text: &str, origin: &str) -> Result<Corpus> {
    let record: CorpusRecord =
        serde_json::from_str(text).map_err(|e| Error::parse(format!("{origin}:{}:{}", e.line(), e.column()), e))?;

    let mut seen_books = HashSet::new();
    let mut hierarchy = Vec::new();
    let mut articles = Vec::new();
    for book in record.books {
        if !BOOK_RANGE.contains(&book.book) {
            return Err(Error::Validation(format!("book number {} outside 1..=6", book.book)));
        }
        if !seen_books.insert(book.book) {
            return Err(Error::Validation(format!("book {} listed twice", book.book)));
        }
        for d in book.divisions {
            hierarchy.push(DivisionNode {
                id: d.id,
                level: d.level,
                heading: normalize_line(&d.heading),
                children: d.children,
                book: book.book,
            });
        }
        for a in book.articles {
            let id = ArticleId::new(&a.id);
            let sentences = match (a.content, a.sentences) {
                (Some(_), Some(_)) => {
                    return Err(Error::Validation(format!(
                        "article {id} has both \"content\" and \"sentences\""
                    )))
                }
                (Some(content), None) => segment_sentences(&normalize_text(&content)),
                (None, Some(sentences)) => sentences
                    .iter()
                    .map(|s| normalize_line(s))
                    .filter(|s| !s.is_empty())
                    .collect(),
                (None, None) => {
                    return Err(Error::Validation(format!(
                        "article {id} has neither \"content\" nor \"sentences\""
                    )))
                }
            };
            articles.push((id, book.book, normalize_line(&a.title), sentences, a.division));
        }
    }
    Corpus::assemble(articles, hierarchy, Scope::Whole)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const SMALL: &str = r#"{"books":[{"book":1,
        "divisions":[
            {"id":"c1","level":"chapter","heading":"Delle persone","children":["c1s1","c1s2"]},
            {"id":"c1s1","level":"subchapter","heading":"Capacità.","children":[]},
            {"id":"c1s2","level":"subchapter","heading":"Domicilio","children":[]},
            {"id":"c2","level":"chapter","heading":"Della famiglia"}
        ],
        "articles":[
            {"id":"2","title":"Maggiore età.","content":"La maggiore età è fissata al compimento del 18 anno. Con essa si acquista la capacità; salvo eccezioni.","division":"c1s1"},
            {"id":"1","title":"Capacità giuridica","content":"La capacità si acquista dalla nascita.","division":"c1s1"},
            {"id":"43","title":"Domicilio e residenza","content":"Il domicilio è nel luogo. La residenza è nel luogo della dimora.","division":"c1s2"},
            {"id":"79-bis","title":"Promessa","content":"La promessa non obbliga.","division":"c2"}
        ]}]}"#;

    #[test]
    fn parses_and_normalizes() {
        let c = parse_corpus_str(SMALL, "small").unwrap();
        assert_eq!(c.articles.len(), 4);
        let a2 = c.article(&ArticleId::new("2")).unwrap();
        assert_eq!(a2.title, "maggiore eta");
        assert_eq!(
            a2.sentences,
            [
                "la maggiore eta e fissata al compimento del anno",
                "con essa si acquista la capacita",
                "salvo eccezioni"
            ]
        );
        assert_eq!(a2.division_path, ["c1", "c1s1"]);
        assert_eq!(c.node("c1s1").unwrap().heading, "capacita");
        let ids: Vec<String> = c.article_ids().iter().map(|i| i.to_string()).collect();
        assert_eq!(ids, ["1", "2", "43", "79-bis"]);
    }

    #[test]
    fn serialize_round_trip() {
        let c = parse_corpus_str(SMALL, "small").unwrap();
        let again = parse_corpus_str(&c.to_json(), "again").unwrap();
        assert_eq!(c, again);
        assert_eq!(again.to_json(), c.to_json());
    }

    #[test]
    fn document_order() {
        let c = parse_corpus_str(SMALL, "small").unwrap();
        let ids: Vec<&str> = c.nodes_in_document_order(1).iter().map(|n| n.id.as_str()).collect();
        assert_eq!(ids, ["c1", "c1s1", "c1s2", "c2"]);
        assert_eq!(c.articles_under("c1").len(), 3);
    }

    #[test]
    fn malformed_json_reports_location() {
        let err = parse_corpus_str("{\"books\": [\n{\"book\": 1,,}]}", "bad.json").unwrap_err();
        match err {
            Error::Parse { location, .. } => assert!(location.starts_with("bad.json:2:"), "{location}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_article_rejected() {
        let text = SMALL.replace("\"id\":\"43\"", "\"id\":\"1\"");
        let err = parse_corpus_str(&text, "dup").unwrap_err();
        assert!(matches!(err, Error::Validation(m) if m.contains("duplicate article")));
    }

    #[test]
    fn dangling_division_rejected() {
        let text = SMALL.replace("\"division\":\"c2\"", "\"division\":\"c9\"");
        assert!(matches!(parse_corpus_str(&text, "x"), Err(Error::Validation(_))));
        let text = SMALL.replace("[\"c1s1\",\"c1s2\"]", "[\"c1s1\",\"c1s2\",\"zz\"]");
        assert!(matches!(parse_corpus_str(&text, "x"), Err(Error::Validation(_))));
    }

    #[test]
    fn level_order_enforced() {
        let text = SMALL.replace(
            "\"level\":\"subchapter\",\"heading\":\"Domicilio\"",
            "\"level\":\"chapter\",\"heading\":\"Domicilio\"",
        );
        assert!(matches!(parse_corpus_str(&text, "x"), Err(Error::Validation(m)) if m.contains("levels must descend")));
    }

    #[test]
    fn empty_leaf_rejected() {
        let text = SMALL.replace("\"division\":\"c2\"", "\"division\":\"c1s2\"");
        assert!(matches!(parse_corpus_str(&text, "x"), Err(Error::Validation(m)) if m.contains("no articles")));
    }

    #[test]
    fn empty_title_rejected() {
        let text = SMALL.replace("\"title\":\"Promessa\"", "\"title\":\"123.\"");
        assert!(matches!(parse_corpus_str(&text, "x"), Err(Error::Article { .. })));
    }

    #[test]
    fn restrict_by_book() {
        let c = parse_corpus_str(SMALL, "small").unwrap();
        assert_eq!(c.restrict(Scope::Book(1)).unwrap().articles.len(), 4);
        assert!(matches!(c.restrict(Scope::Book(2)), Err(Error::Empty(_))));
    }
}
