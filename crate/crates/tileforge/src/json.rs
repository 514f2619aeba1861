//! Shared helpers for the versioned JSON documents.

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum JsonError {
    #[error("malformed JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("expected schema {expected:?}, found {found:?}")]
    Schema { expected: &'static str, found: String },
    #[error("invalid document: {0}")]
    Invalid(String),
}

/// Implemented by the wire structs; each carries a `schema` tag.
pub trait Versioned: Serialize + DeserializeOwned {
    const SCHEMA: &'static str;
    fn schema(&self) -> &str;
}

pub fn parse<T: Versioned>(text: &str) -> Result<T, JsonError> {
    let doc: T = serde_json::from_str(text)?;
    if doc.schema() != T::SCHEMA {
        return Err(JsonError::Schema { expected: T::SCHEMA, found: doc.schema().to_string() });
    }
    Ok(doc)
}

pub fn render<T: Versioned>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("wire structs always serialize");
    s.push('\n');
    s
}
