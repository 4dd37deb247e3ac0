//! Test query sets.
//!
//! | qtype | source                                   | gold            |
//! |-------|------------------------------------------|-----------------|
//! | 1     | sentences sampled from the articles      | source article  |
//! | 2     | paraphrases of the qtype-1 sentences     | source article  |
//! | 3     | expert comment paragraphs                | commented article |
//! | 4     | single sentences of those comments       | commented article |
//! | 5     | case-law decisions                       | cited article   |
//! | 6     | division headings                        | all articles under the division |

mod paraphrase;

use std::collections::HashSet;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{normalize_text, segment_sentences, Corpus, Level};
use crate::error::{Error, Result};
use crate::ids::{ArticleId, Scope};

pub use paraphrase::{paraphrase_all, CommandParaphraser, IdentityParaphraser, Paraphraser};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Query {
    #[serde(rename = "query_id")]
    pub id: String,
    pub qtype: u8,
    pub text: String,
    pub gold: Vec<ArticleId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub division_level: Option<Level>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_article: Option<ArticleId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<i32>,
    /// Set on qtype-2 queries whose paraphrase equals the original.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub unparaphrased: bool,
}

impl Query {
    fn single(id: String, qtype: u8, text: String, article: ArticleId) -> Query {
        Query {
            id,
            qtype,
            text,
            gold: vec![article.clone()],
            division_level: None,
            source_article: Some(article),
            year: None,
            unparaphrased: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct QuerySet {
    pub queries: Vec<Query>,
}

impl QuerySet {
    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }

    pub fn to_jsonl(&self) -> String {
        crate::io::to_jsonl(&self.queries)
    }

    pub fn from_jsonl(text: &str, origin: &str) -> Result<QuerySet> {
        Ok(QuerySet {
            queries: crate::io::from_jsonl(text, origin)?,
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<QuerySet> {
        Ok(QuerySet {
            queries: crate::io::read_jsonl(path)?,
        })
    }

    /// Checks query invariants, and that every gold id exists in `corpus`
    /// when one is given.
    pub fn validate(&self, corpus: Option<&Corpus>) -> Result<()> {
        let known: Option<HashSet<&ArticleId>> = corpus.map(|c| c.articles.iter().map(|a| &a.id).collect());
        let mut ids = HashSet::new();
        for q in &self.queries {
            if !ids.insert(q.id.as_str()) {
                return Err(Error::Validation(format!("duplicate query id {}", q.id)));
            }
            if !(1..=6).contains(&q.qtype) {
                return Err(Error::Validation(format!(
                    "query {}: qtype {} outside 1..=6",
                    q.id, q.qtype
                )));
            }
            if q.gold.is_empty() {
                return Err(Error::Validation(format!("query {}: empty gold set", q.id)));
            }
            if q.qtype <= 5 && q.gold.len() != 1 {
                return Err(Error::Validation(format!(
                    "query {}: qtype {} needs exactly one gold article",
                    q.id, q.qtype
                )));
            }
            if q.qtype == 6 && q.text.chars().any(|c| c.is_ascii_digit()) {
                return Err(Error::Validation(format!(
                    "query {}: heading query mentions a number",
                    q.id
                )));
            }
            if let Some(known) = &known {
                if let Some(missing) = q.gold.iter().find(|g| !known.contains(g)) {
                    return Err(Error::Validation(format!(
                        "query {}: unknown gold article {missing}",
                        q.id
                    )));
                }
            }
        }
        Ok(())
    }
}

/// How many sentences to draw from each article for qtype-1 queries.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Sampling {
    /// Exactly this many per article; fewer available sentences is an error.
    PerArticle(usize),
    /// `max(1, round(rate * L))` per article, capped at `L`.
    Rate(f64),
}

fn query_id(qtype: u8, n: usize) -> String {
    format!("q{qtype}-{n:06}")
}

/// Samples content sentences (title excluded) without replacement per
/// article, articles visited in ascending id order with one seeded stream.
pub fn gen_qtype1(corpus: &Corpus, scope: Scope, sampling: Sampling, seed: u64) -> Result<QuerySet> {
    if let Sampling::Rate(r) = sampling {
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::Config(format!("sampling rate {r} outside (0, 1]")));
        }
    }
    let scoped = corpus.restrict(scope)?;
    let articles = scoped.sorted_articles();

    let counts: Vec<usize> = articles
        .iter()
        .map(|a| {
            let available = a.sentences.len();
            match sampling {
                Sampling::PerArticle(k) => k,
                Sampling::Rate(r) => ((r * available as f64).round() as usize).max(1).min(available),
            }
        })
        .collect();
    let shortfalls: Vec<String> = articles
        .iter()
        .zip(&counts)
        .filter(|(a, &k)| k > a.sentences.len())
        .map(|(a, &k)| format!("article {} (requested {k}, available {})", a.id, a.sentences.len()))
        .collect();
    if !shortfalls.is_empty() {
        return Err(Error::Shortfall(shortfalls.join("; ")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut queries = Vec::new();
    for (article, &k) in articles.iter().zip(&counts) {
        let mut picked = rand::seq::index::sample(&mut rng, article.sentences.len(), k).into_vec();
        picked.sort_unstable();
        for i in picked {
            queries.push(Query::single(
                query_id(1, queries.len() + 1),
                1,
                article.sentences[i].clone(),
                article.id.clone(),
            ));
        }
    }
    Ok(QuerySet { queries })
}

/// Skipped query and the reason, one JSON Lines record each.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkipRecord {
    pub query_id: String,
    pub reason: String,
}

/// Re-emits qtype-1 queries with paraphrased text. Hook failures skip the
/// query and land in the returned skip report.
pub fn gen_qtype2<P: Paraphraser + ?Sized>(
    qtype1: &QuerySet,
    hook: &P,
    concurrency: usize,
) -> (QuerySet, Vec<SkipRecord>) {
    let inputs: Vec<&str> = qtype1.queries.iter().map(|q| q.text.as_str()).collect();
    let results = paraphrase_all(hook, &inputs, concurrency);
    let mut queries = Vec::new();
    let mut skipped = Vec::new();
    for (i, (q, result)) in qtype1.queries.iter().zip(results).enumerate() {
        let id = match q.id.strip_prefix("q1-") {
            Some(rest) => format!("q2-{rest}"),
            None => query_id(2, i + 1),
        };
        let text = match result {
            Ok(raw) => segment_sentences(&normalize_text(&raw)).join(" "),
            Err(reason) => {
                skipped.push(SkipRecord { query_id: id, reason });
                continue;
            }
        };
        if text.is_empty() {
            skipped.push(SkipRecord {
                query_id: id,
                reason: "empty paraphrase".into(),
            });
            continue;
        }
        queries.push(Query {
            id,
            qtype: 2,
            unparaphrased: text == q.text,
            text,
            ..q.clone()
        });
    }
    (QuerySet { queries }, skipped)
}

/// External annotation record: comments and case-law decisions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TextRecord {
    pub article_id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<i32>,
}

/// Resolves records against the corpus (unknown ids are a validation
/// error) and keeps those whose article falls in `scope`.
fn resolve_records(records: Vec<TextRecord>, corpus: &Corpus, scope: Scope) -> Result<Vec<(TextRecord, ArticleId)>> {
    let mut out = Vec::new();
    for (line, r) in records.into_iter().enumerate() {
        let id = ArticleId::new(&r.article_id);
        let article = corpus.article(&id).ok_or_else(|| {
            Error::Validation(format!(
                "record {} references unknown article {:?}",
                line + 1,
                r.article_id
            ))
        })?;
        if scope.contains_book(article.book) {
            out.push((r, id));
        }
    }
    Ok(out)
}

/// Comment paragraphs become qtype-3 queries; their sentences become
/// qtype-4 queries.
pub fn ingest_comments_str(text: &str, origin: &str, corpus: &Corpus, scope: Scope) -> Result<(QuerySet, QuerySet)> {
    let records = crate::io::from_jsonl::<TextRecord>(text, origin)?;
    let mut paragraphs = Vec::new();
    let mut sentences = Vec::new();
    for (r, id) in resolve_records(records, corpus, scope)? {
        let normalized = normalize_text(&r.text);
        let parts = segment_sentences(&normalized);
        if parts.is_empty() {
            continue;
        }
        let mut q = Query::single(query_id(3, paragraphs.len() + 1), 3, normalized, id.clone());
        q.year = r.year;
        paragraphs.push(q);
        for s in parts {
            let mut q = Query::single(query_id(4, sentences.len() + 1), 4, s, id.clone());
            q.year = r.year;
            sentences.push(q);
        }
    }
    Ok((QuerySet { queries: paragraphs }, QuerySet { queries: sentences }))
}

pub fn ingest_comments(path: impl AsRef<Path>, corpus: &Corpus, scope: Scope) -> Result<(QuerySet, QuerySet)> {
    let path = path.as_ref();
    ingest_comments_str(
        &crate::io::read_to_string(path)?,
        &path.display().to_string(),
        corpus,
        scope,
    )
}

/// One qtype-5 query per case-law decision; the year is kept.
pub fn ingest_cases_str(text: &str, origin: &str, corpus: &Corpus, scope: Scope) -> Result<QuerySet> {
    let records = crate::io::from_jsonl::<TextRecord>(text, origin)?;
    let mut queries = Vec::new();
    for (r, id) in resolve_records(records, corpus, scope)? {
        let normalized = normalize_text(&r.text);
        if segment_sentences(&normalized).is_empty() {
            continue;
        }
        let mut q = Query::single(query_id(5, queries.len() + 1), 5, normalized, id);
        q.year = r.year;
        queries.push(q);
    }
    Ok(QuerySet { queries })
}

pub fn ingest_cases(path: impl AsRef<Path>, corpus: &Corpus, scope: Scope) -> Result<QuerySet> {
    let path = path.as_ref();
    ingest_cases_str(
        &crate::io::read_to_string(path)?,
        &path.display().to_string(),
        corpus,
        scope,
    )
}

/// One query per division at `level`: the heading as text and every article
/// under the division as gold. Books are visited in ascending order and
/// divisions in document order; divisions with an empty heading are skipped.
pub fn gen_qtype6(corpus: &Corpus, level: Level) -> QuerySet {
    let mut books = corpus.books();
    books.sort_unstable();
    let mut queries = Vec::new();
    for book in books {
        for node in corpus.nodes_in_document_order(book) {
            if node.level != level || node.heading.is_empty() {
                continue;
            }
            queries.push(Query {
                id: query_id(6, queries.len() + 1),
                qtype: 6,
                text: node.heading.clone(),
                gold: corpus.articles_under(&node.id),
                division_level: Some(level),
                source_article: None,
                year: None,
                unparaphrased: false,
            });
        }
    }
    QuerySet { queries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_corpus_str;

    const CORPUS: &str = r#"{"books":[
      {"book":1,"divisions":[
        {"id":"c1","level":"chapter","heading":"Delle persone","children":["c1a","c1b"]},
        {"id":"c1a","level":"subchapter","heading":"Capacita"},
        {"id":"c1b","level":"subchapter","heading":"Domicilio"}],
       "articles":[
        {"id":"1","title":"uno","content":"prima frase. seconda frase. terza frase","division":"c1a"},
        {"id":"2","title":"due","content":"sola frase","division":"c1a"},
        {"id":"3","title":"tre","content":"alfa. beta","division":"c1b"}]},
      {"book":2,"divisions":[{"id":"d1","level":"chapter","heading":"Successioni"}],
       "articles":[{"id":"456","title":"apertura","content":"la successione si apre. nel luogo","division":"d1"}]}]}"#;

    fn corpus() -> Corpus {
        parse_corpus_str(CORPUS, "t").unwrap()
    }

    #[test]
    fn qtype1_sampling_is_seeded() {
        let c = corpus();
        let a = gen_qtype1(&c, Scope::Book(1), Sampling::PerArticle(1), 7).unwrap();
        let b = gen_qtype1(&c, Scope::Book(1), Sampling::PerArticle(1), 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_jsonl(), b.to_jsonl());
        assert_eq!(a.len(), 3);
        let q2 = &a.queries[1];
        assert_eq!(q2.text, "sola frase");
        assert_eq!(q2.gold, vec![ArticleId::new("2")]);
        a.validate(Some(&c)).unwrap();
        for q in &a.queries {
            let art = c.article(&q.gold[0]).unwrap();
            assert!(art.sentences.contains(&q.text));
        }
    }

    #[test]
    fn qtype1_shortfall() {
        let err = gen_qtype1(&corpus(), Scope::Book(1), Sampling::PerArticle(2), 1).unwrap_err();
        match err {
            Error::Shortfall(m) => assert!(m.contains("article 2 (requested 2, available 1)"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn qtype1_rate() {
        let q = gen_qtype1(&corpus(), Scope::Whole, Sampling::Rate(0.5), 3).unwrap();
        // round(1.5)=2, max(1, round(0.5))=1, 1, 1
        assert_eq!(q.len(), 5);
        assert!(gen_qtype1(&corpus(), Scope::Whole, Sampling::Rate(0.0), 3).is_err());
    }

    #[test]
    fn qtype2_identity_and_failures() {
        let c = corpus();
        let q1 = gen_qtype1(&c, Scope::Whole, Sampling::PerArticle(1), 5).unwrap();
        let (q2, skipped) = gen_qtype2(&q1, &IdentityParaphraser, 4);
        assert!(skipped.is_empty());
        assert_eq!(q2.len(), q1.len());
        assert!(q2.queries.iter().all(|q| q.unparaphrased && q.qtype == 2));
        assert_eq!(q2.queries[0].id, "q2-000001");

        let flaky = |t: &str| -> std::result::Result<String, String> {
            if t.contains("sola") {
                Err("translator down".into())
            } else {
                Ok(format!("{t} parafrasi."))
            }
        };
        let (q2, skipped) = gen_qtype2(&q1, &flaky, 2);
        assert_eq!(
            skipped,
            vec![SkipRecord {
                query_id: "q2-000002".into(),
                reason: "translator down".into()
            }]
        );
        assert_eq!(q2.len(), q1.len() - 1);
        assert!(q2
            .queries
            .iter()
            .all(|q| !q.unparaphrased && q.text.ends_with("parafrasi")));
    }

    #[test]
    fn comments_and_sentences() {
        let c = corpus();
        let text = r#"{"article_id":"1","text":"Il commento. Spiega tutto; davvero."}
{"article_id":"456","text":"Altro libro."}
"#;
        let (q3, q4) = ingest_comments_str(text, "c", &c, Scope::Book(1)).unwrap();
        assert_eq!(q3.len(), 1);
        assert_eq!(q3.queries[0].text, "il commento. spiega tutto; davvero.");
        assert_eq!(q4.len(), 3);
        assert!(q4.queries.iter().all(|q| q.gold == vec![ArticleId::new("1")]));
        let (_, all4) = ingest_comments_str(text, "c", &c, Scope::Whole).unwrap();
        assert_eq!(all4.len(), 4);

        let bad = r#"{"article_id":"999","text":"x"}"#;
        assert!(matches!(
            ingest_comments_str(bad, "c", &c, Scope::Whole),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn cases_keep_year() {
        let c = corpus();
        let text = r#"{"article_id":"456","text":"La Corte afferma.","year":1998}"#;
        let q5 = ingest_cases_str(text, "c", &c, Scope::Whole).unwrap();
        assert_eq!(q5.queries[0].year, Some(1998));
        assert_eq!(q5.queries[0].qtype, 5);
        let line = q5.to_jsonl();
        assert!(line.contains("\"year\":1998"));
        assert_eq!(QuerySet::from_jsonl(&line, "x").unwrap(), q5);
    }

    #[test]
    fn heading_queries() {
        let c = corpus();
        let ch = gen_qtype6(&c, Level::Chapter);
        assert_eq!(ch.len(), 2);
        assert_eq!(ch.queries[0].gold.len(), 3);
        assert_eq!(ch.queries[0].text, "delle persone");
        let sub = gen_qtype6(&c, Level::Subchapter);
        assert_eq!(sub.len(), 2);
        assert_eq!(sub.queries[1].gold, vec![ArticleId::new("3")]);
        assert!(gen_qtype6(&c, Level::Section).is_empty());
        ch.validate(Some(&c)).unwrap();
    }

    #[test]
    fn validation_rules() {
        let mut q = gen_qtype6(&corpus(), Level::Chapter);
        q.queries[0].qtype = 1;
        assert!(q.validate(None).is_err());
        let mut q = gen_qtype6(&corpus(), Level::Chapter);
        q.queries[0].gold = vec![ArticleId::new("1000")];
        assert!(q.validate(Some(&corpus())).is_err());
    }
}
