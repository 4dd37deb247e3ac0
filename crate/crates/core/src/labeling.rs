//! Unsupervised training-unit generation.
//!
//! Each scheme derives a round-robin block of unit texts from an article's
//! title and sentences; the block is replicated until the article has at
//! least `min_tu` units. The `*-empht` schemes build the block without the
//! title and append a separate run of title replicas.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::corpus::{Article, Corpus};
use crate::error::{Error, Result};
use crate::ids::{ArticleId, Scope};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    TitleRr,
    UniRr,
    BiRr,
    TriRr,
    CasRr,
    TriangleRr,
    UniRrEmphT,
    CasRrEmphT,
    TriangleRrEmphT,
}

enum Composition {
    Title,
    NGram(usize),
    Cascade,
    Triangle,
}

impl Scheme {
    pub const ALL: [Scheme; 9] = [
        Scheme::TitleRr,
        Scheme::UniRr,
        Scheme::BiRr,
        Scheme::TriRr,
        Scheme::CasRr,
        Scheme::TriangleRr,
        Scheme::UniRrEmphT,
        Scheme::CasRrEmphT,
        Scheme::TriangleRrEmphT,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::TitleRr => "title-rr",
            Scheme::UniRr => "uni-rr",
            Scheme::BiRr => "bi-rr",
            Scheme::TriRr => "tri-rr",
            Scheme::CasRr => "cas-rr",
            Scheme::TriangleRr => "triangle-rr",
            Scheme::UniRrEmphT => "uni-rr-empht",
            Scheme::CasRrEmphT => "cas-rr-empht",
            Scheme::TriangleRrEmphT => "triangle-rr-empht",
        }
    }

    /// Whether the title is kept out of the round-robin block.
    pub fn emphasizes_title(&self) -> bool {
        matches!(self, Scheme::UniRrEmphT | Scheme::CasRrEmphT | Scheme::TriangleRrEmphT)
    }

    fn composition(&self) -> Composition {
        match self {
            Scheme::TitleRr => Composition::Title,
            Scheme::UniRr | Scheme::UniRrEmphT => Composition::NGram(1),
            Scheme::BiRr => Composition::NGram(2),
            Scheme::TriRr => Composition::NGram(3),
            Scheme::CasRr | Scheme::CasRrEmphT => Composition::Cascade,
            Scheme::TriangleRr | Scheme::TriangleRrEmphT => Composition::Triangle,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    /// Accepts `uni-rr-empht` as well as `UniRRemphT`.
    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .map(|c| c.to_ascii_lowercase())
            .collect();
        Scheme::ALL
            .into_iter()
            .find(|sch| sch.as_str().replace('-', "") == key)
            .ok_or_else(|| Error::Config(format!("unknown labeling scheme {s:?}")))
    }
}

impl Serialize for Scheme {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Scheme {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelingConfig {
    pub scheme: Scheme,
    /// Minimum number of training units per article.
    pub min_tu: usize,
    /// Multiplier for the sentence subset of the title-emphasis schemes.
    pub m: usize,
    /// Mean sentences per article, title excluded (3 or 4).
    pub mean_s: usize,
}

impl LabelingConfig {
    pub const DEFAULT_MIN_TU: usize = 32;
    pub const DEFAULT_M: usize = 4;
    pub const DEFAULT_MEAN_S: usize = 4;

    pub fn new(scheme: Scheme) -> Self {
        LabelingConfig {
            scheme,
            min_tu: Self::DEFAULT_MIN_TU,
            m: Self::DEFAULT_M,
            mean_s: Self::DEFAULT_MEAN_S,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_tu == 0 {
            return Err(Error::Config("min_tu must be positive".into()));
        }
        if self.m == 0 {
            return Err(Error::Config("m must be positive".into()));
        }
        if !(3..=4).contains(&self.mean_s) {
            return Err(Error::Config(format!("mean_s must be 3 or 4, got {}", self.mean_s)));
        }
        if self.scheme.emphasizes_title() && self.sentence_quota() >= self.min_tu {
            return Err(Error::Config(format!(
                "{}: m * mean_s = {} must be below min_tu = {}",
                self.scheme,
                self.sentence_quota(),
                self.min_tu
            )));
        }
        Ok(())
    }

    /// `m * mean_s`.
    pub fn sentence_quota(&self) -> usize {
        self.m * self.mean_s
    }

    /// `min_tu - m * mean_s`, the number of title replicas for the
    /// title-emphasis schemes.
    pub fn title_replicas(&self) -> usize {
        self.min_tu.saturating_sub(self.sentence_quota())
    }
}

/// A scheme's round-robin block for one article.
#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub units: Vec<String>,
    /// Present for the title-emphasis schemes, whose block excludes it.
    pub title: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingUnit {
    pub article_id: ArticleId,
    pub book: u8,
    pub scheme: Scheme,
    /// Replication round, 0-based.
    pub replica: usize,
    /// Position within the block. Title replicas of the title-emphasis
    /// schemes carry the index one past the sentence block.
    pub block_index: usize,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingSet {
    pub scope: Scope,
    pub config: LabelingConfig,
    pub units: Vec<TrainingUnit>,
}

impl TrainingSet {
    /// Conventional file name: `<scope>_<scheme>_tu<min_tu>.jsonl`.
    pub fn file_name(&self) -> String {
        training_file_name(self.scope, &self.config)
    }

    pub fn to_jsonl(&self) -> String {
        crate::io::to_jsonl(&self.units)
    }
}

pub fn training_file_name(scope: Scope, config: &LabelingConfig) -> String {
    format!("{}_{}_tu{}.jsonl", scope.file_stem(), config.scheme, config.min_tu)
}

fn ngrams(seq: &[&str], n: usize) -> Vec<String> {
    if seq.len() < n {
        return vec![seq.join(" ")];
    }
    seq.windows(n).map(|w| w.join(" ")).collect()
}

fn cascade(seq: &[&str]) -> Vec<String> {
    (1..=seq.len()).map(|end| seq[..end].join(" ")).collect()
}

/// Builds the round-robin block for an article.
pub fn build_block(article: &Article, config: &LabelingConfig) -> Result<Block> {
    let fail = |message: &str| Error::Article {
        id: article.id.clone(),
        message: message.to_string(),
    };
    if article.title.trim().is_empty() {
        return Err(fail("empty title"));
    }
    let emph = config.scheme.emphasizes_title();
    let seq: Vec<&str> = if emph {
        article.sentences.iter().map(String::as_str).collect()
    } else {
        article.full_sequence().collect()
    };
    if emph && seq.is_empty() {
        return Err(fail("no content sentences for a title-emphasis scheme"));
    }
    let units = match config.scheme.composition() {
        Composition::Title => vec![article.title.clone()],
        Composition::NGram(n) => ngrams(&seq, n),
        Composition::Cascade => cascade(&seq),
        Composition::Triangle => (1..=3).flat_map(|n| ngrams(&seq, n)).collect(),
    };
    Ok(Block {
        units,
        title: emph.then(|| article.title.clone()),
    })
}

/// Generates an article's training units.
///
/// Plain schemes emit `ceil(min_tu / |block|)` whole copies of the block.
/// Title-emphasis schemes cycle the block to exactly `max(L, m * mean_s)`
/// units (L = content sentence count), then append `min_tu - m * mean_s`
/// title replicas.
pub fn generate_units(article: &Article, config: &LabelingConfig) -> Result<Vec<TrainingUnit>> {
    config.validate()?;
    let block = build_block(article, config)?;
    let unit = |text: &str, replica: usize, block_index: usize| TrainingUnit {
        article_id: article.id.clone(),
        book: article.book,
        scheme: config.scheme,
        replica,
        block_index,
        text: text.to_string(),
    };
    let len = block.units.len();

    let Some(title) = block.title else {
        let replicas = config.min_tu.div_ceil(len);
        return Ok((0..replicas)
            .flat_map(|r| block.units.iter().enumerate().map(move |(i, t)| (r, i, t)))
            .map(|(r, i, t)| unit(t, r, i))
            .collect());
    };

    let first = article.sentences.len().max(config.sentence_quota());
    let mut out: Vec<TrainingUnit> = (0..first)
        .map(|j| unit(&block.units[j % len], j / len, j % len))
        .collect();
    out.extend((0..config.title_replicas()).map(|r| unit(&title, r, len)));
    Ok(out)
}

/// Training set for every article in `scope`, in ascending article id order.
pub fn generate_training_set(corpus: &Corpus, scope: Scope, config: &LabelingConfig) -> Result<TrainingSet> {
    config.validate()?;
    let scoped = corpus.restrict(scope)?;
    let mut units = Vec::new();
    for article in scoped.sorted_articles() {
        let generated = generate_units(article, config).map_err(|e| match e {
            e @ Error::Article { .. } => e,
            other => Error::Article {
                id: article.id.clone(),
                message: other.to_string(),
            },
        })?;
        units.extend(generated);
    }
    Ok(TrainingSet {
        scope,
        config: *config,
        units,
    })
}

/// Reads training units from a JSON Lines file.
pub fn read_training_units(path: impl AsRef<std::path::Path>) -> Result<Vec<TrainingUnit>> {
    crate::io::read_jsonl(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn article(n_sentences: usize) -> Article {
        Article {
            id: ArticleId::new("7"),
            book: 1,
            title: "T".into(),
            sentences: (1..=n_sentences).map(|i| format!("s{i}")).collect(),
            division_path: vec!["c1".into()],
        }
    }

    fn texts(block: &Block) -> Vec<&str> {
        block.units.iter().map(String::as_str).collect()
    }

    #[test]
    fn blocks_for_three_sentences() {
        let a = article(3);
        let b = |s| build_block(&a, &LabelingConfig::new(s)).unwrap();
        assert_eq!(texts(&b(Scheme::TitleRr)), ["T"]);
        assert_eq!(texts(&b(Scheme::UniRr)), ["T", "s1", "s2", "s3"]);
        assert_eq!(texts(&b(Scheme::BiRr)), ["T s1", "s1 s2", "s2 s3"]);
        assert_eq!(texts(&b(Scheme::TriRr)), ["T s1 s2", "s1 s2 s3"]);
        assert_eq!(texts(&b(Scheme::CasRr)), ["T", "T s1", "T s1 s2", "T s1 s2 s3"]);
        assert_eq!(b(Scheme::TriangleRr).units.len(), 9);
        let e = b(Scheme::CasRrEmphT);
        assert_eq!(texts(&e), ["s1", "s1 s2", "s1 s2 s3"]);
        assert_eq!(e.title.as_deref(), Some("T"));
    }

    #[test]
    fn short_sequences_collapse() {
        let a = article(1);
        let b = |s| build_block(&a, &LabelingConfig::new(s)).unwrap();
        assert_eq!(texts(&b(Scheme::TriRr)), ["T s1"]);
        assert_eq!(texts(&b(Scheme::TriangleRr)), ["T", "s1", "T s1", "T s1"]);
    }

    #[test]
    fn unigram_title_emphasis() {
        let cfg = LabelingConfig {
            scheme: Scheme::UniRrEmphT,
            min_tu: 32,
            m: 4,
            mean_s: 3,
        };
        let units = generate_units(&article(3), &cfg).unwrap();
        assert_eq!(units.len(), 32);
        let head: Vec<&str> = units[..12].iter().map(|u| u.text.as_str()).collect();
        assert_eq!(head, ["s1", "s2", "s3"].repeat(4));
        assert!(units[12..].iter().all(|u| u.text == "T" && u.block_index == 3));
        assert_eq!(units[11].replica, 3);
    }

    #[test]
    fn long_article_keeps_all_sentences() {
        let cfg = LabelingConfig {
            scheme: Scheme::UniRrEmphT,
            min_tu: 32,
            m: 4,
            mean_s: 3,
        };
        let units = generate_units(&article(15), &cfg).unwrap();
        assert_eq!(units.len(), 15 + 20);
    }

    #[test]
    fn title_only_and_triangle_replication() {
        let cfg = LabelingConfig {
            scheme: Scheme::TitleRr,
            min_tu: 8,
            m: 4,
            mean_s: 4,
        };
        let units = generate_units(&article(3), &cfg).unwrap();
        assert_eq!(units.len(), 8);
        assert!(units.iter().all(|u| u.text == "T" && u.block_index == 0));
        let cfg = LabelingConfig::new(Scheme::TriangleRr);
        assert_eq!(generate_units(&article(3), &cfg).unwrap().len(), 36);
    }

    #[test]
    fn config_invariants() {
        let bad = LabelingConfig {
            scheme: Scheme::UniRrEmphT,
            min_tu: 16,
            m: 4,
            mean_s: 4,
        };
        assert!(matches!(bad.validate(), Err(Error::Config(_))));
        let ok = LabelingConfig {
            scheme: Scheme::UniRr,
            min_tu: 16,
            m: 4,
            mean_s: 4,
        };
        assert!(ok.validate().is_ok());
        assert!(LabelingConfig { mean_s: 5, ..ok }.validate().is_err());
        assert!(LabelingConfig { min_tu: 0, ..ok }.validate().is_err());
    }

    #[test]
    fn emphasis_needs_content() {
        let err = build_block(&article(0), &LabelingConfig::new(Scheme::UniRrEmphT)).unwrap_err();
        assert!(matches!(err, Error::Article { .. }));
        assert!(build_block(&article(0), &LabelingConfig::new(Scheme::TriRr)).is_ok());
    }

    #[test]
    fn scheme_names() {
        for s in Scheme::ALL {
            assert_eq!(s.as_str().parse::<Scheme>().unwrap(), s);
        }
        assert_eq!("UniRRemphT".parse::<Scheme>().unwrap(), Scheme::UniRrEmphT);
        assert_eq!("TriangleRR".parse::<Scheme>().unwrap(), Scheme::TriangleRr);
        assert!("quad-rr".parse::<Scheme>().is_err());
    }

    #[test]
    fn file_name_convention() {
        let cfg = LabelingConfig::new(Scheme::UniRrEmphT);
        assert_eq!(
            training_file_name(Scope::Book(2), &cfg),
            "book2_uni-rr-empht_tu32.jsonl"
        );
    }
}
