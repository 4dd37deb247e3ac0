//! Binary attribute representation of articles: one boolean attribute per
//! division node of a book, set along the article's hierarchy path.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::{Article, Corpus};
use crate::error::{Error, Result};
use crate::ids::ArticleId;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub attribute_id: usize,
    pub division_id: String,
    pub heading: String,
}

/// How division nodes map to attributes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum AttributeMode {
    /// One attribute per division node.
    #[default]
    PerNode,
    /// Nodes sharing a heading share one attribute (first occurrence wins
    /// the slot and the division id).
    UniqueHeading,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttributeSchema {
    pub book: u8,
    pub attributes: Vec<Attribute>,
    slot: HashMap<String, usize>,
}

impl AttributeSchema {
    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    /// Bit position of a division node.
    pub fn position(&self, division_id: &str) -> Option<usize> {
        self.slot.get(division_id).copied()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.attributes).expect("attributes serialize")
    }
}

/// Attributes of `book` in depth-first document order, ids from 1.
pub fn build_attribute_schema(corpus: &Corpus, book: u8, mode: AttributeMode) -> Result<AttributeSchema> {
    let nodes = corpus.nodes_in_document_order(book);
    if nodes.is_empty() {
        return Err(Error::Empty(format!("book {book} has no divisions")));
    }
    let mut attributes: Vec<Attribute> = Vec::new();
    let mut slot = HashMap::new();
    let mut by_heading: HashMap<&str, usize> = HashMap::new();
    for node in nodes {
        let pos = match mode {
            AttributeMode::UniqueHeading => by_heading.get(node.heading.as_str()).copied(),
            AttributeMode::PerNode => None,
        };
        let pos = pos.unwrap_or_else(|| {
            attributes.push(Attribute {
                attribute_id: attributes.len() + 1,
                division_id: node.id.clone(),
                heading: node.heading.clone(),
            });
            by_heading.insert(node.heading.as_str(), attributes.len() - 1);
            attributes.len() - 1
        });
        slot.insert(node.id.clone(), pos);
    }
    Ok(AttributeSchema { book, attributes, slot })
}

pub fn article_attribute_vector(article: &Article, schema: &AttributeSchema) -> Result<Vec<u8>> {
    if article.book != schema.book {
        return Err(Error::Article {
            id: article.id.clone(),
            message: format!("belongs to book {}, schema is for book {}", article.book, schema.book),
        });
    }
    let mut bits = vec![0u8; schema.len()];
    for division in &article.division_path {
        let pos = schema.position(division).ok_or_else(|| Error::Article {
            id: article.id.clone(),
            message: format!("division {division:?} missing from the schema"),
        })?;
        bits[pos] = 1;
    }
    Ok(bits)
}

/// Vectors for every article of the schema's book, ascending id order.
pub fn attribute_vectors(corpus: &Corpus, schema: &AttributeSchema) -> Result<Vec<(ArticleId, Vec<u8>)>> {
    corpus
        .sorted_articles()
        .into_iter()
        .filter(|a| a.book == schema.book)
        .map(|a| Ok((a.id.clone(), article_attribute_vector(a, schema)?)))
        .collect()
}

/// CSV `article_id,b0,...,b{A-1}`.
pub fn attribute_vectors_csv(schema: &AttributeSchema, vectors: &[(ArticleId, Vec<u8>)]) -> String {
    let mut out = String::from("article_id");
    for i in 0..schema.len() {
        let _ = write!(out, ",b{i}");
    }
    out.push('\n');
    for (id, bits) in vectors {
        out.push_str(id.as_str());
        for b in bits {
            let _ = write!(out, ",{b}");
        }
        out.push('\n');
    }
    out
}
