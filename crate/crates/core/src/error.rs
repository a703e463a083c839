use std::path::PathBuf;

use crate::name::{ComponentRef, QualifiedName};

/// Errors produced while building, loading, analyzing or emitting schema sets.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("component names the built-in anyType, which is never stored")]
    AnyTypeExcluded,

    #[error("inner components must be elements or attributes, got {0:?}")]
    InvalidInnerKind(crate::name::ComponentKind),

    #[error("inner component container must be a global type, model group or attribute group")]
    InvalidInnerContainer,

    #[error("relation {relation} cannot hold ({left}, {right}): {reason}")]
    RelationSignature {
        relation: &'static str,
        left: String,
        right: String,
        reason: &'static str,
    },

    #[error("adding isDerivedFrom({0}, {1}) would create a derivation cycle")]
    DerivationCycle(String, String),

    #[error("{0} already has type {1} under isOfType, cannot also assign {2}")]
    TypeConflict(String, String, String),

    #[error("{path}: XML parse error: {source}")]
    XmlParse {
        path: PathBuf,
        source: roxmltree::Error,
    },

    #[error("{path}: {message}")]
    Schema { path: PathBuf, message: String },

    #[error("{path}: unsupported construct <{construct}> at {location}")]
    UnsupportedConstruct {
        path: PathBuf,
        construct: String,
        location: String,
    },

    #[error("unresolved {kind} of {target} from {path}")]
    Unresolved {
        path: PathBuf,
        kind: &'static str,
        target: String,
    },

    #[error("duplicate global definition of {kind:?} {name} (in {first} and {second})")]
    DuplicateGlobal {
        kind: crate::name::ComponentKind,
        name: QualifiedName,
        first: PathBuf,
        second: PathBuf,
    },

    #[error("unknown type {0}")]
    UnknownType(QualifiedName),

    #[error("{0} is not a global element")]
    NotGlobalElement(QualifiedName),

    #[error("{file}: {path}: {message}")]
    Analysis {
        file: String,
        path: String,
        message: String,
    },

    #[error("emission error: {0}")]
    Emit(String),

    #[error("pruning would remove required content from {container}: {detail}")]
    RequiredDrop { container: String, detail: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn schema(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub(crate) fn relation_signature(
    relation: &'static str,
    left: &ComponentRef,
    right: &ComponentRef,
    reason: &'static str,
) -> Error {
    Error::RelationSignature {
        relation,
        left: left.to_string(),
        right: right.to_string(),
        reason,
    }
}

pub type Result<T> = std::result::Result<T, Error>;
