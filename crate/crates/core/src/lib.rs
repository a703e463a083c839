//! Instance-driven XML Schema subsetting.
//!
//! Given a (possibly very large) XSD schema set and a corpus of valid XML
//! instance documents, this crate computes the minimal subset of schema
//! components the corpus actually exercises, emits that subset as valid XSD
//! files, and reports size metrics for the full and reduced sets.

pub mod builtins;
pub mod catalog;
pub mod error;
pub mod analyzer;
pub mod loader;
pub mod model;
pub mod name;
pub mod source;

pub use catalog::SchemaCatalog;
pub use error::{Error, Result};
pub use loader::{load_schema_set, LoadOptions, LoadResult, Warning};
pub use model::{Relation, SchemaSet, Violation};
pub use name::{ComponentKind, ComponentRef, QualifiedName};
pub use source::SourceIndex;
