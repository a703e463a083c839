//! Names and references for schema components.
//!
//! Global components are identified by a [`QualifiedName`]; components nested
//! inside a global type or group (local element and attribute declarations)
//! are identified by their container plus a local name, written
//! `Container:member` (attributes as `Container:@member`).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The XML Schema namespace.
pub const XSD_NS: &str = "http://www.w3.org/2001/XMLSchema";
/// The XML Schema instance namespace (`xsi:type`, `xsi:nil`, ...).
pub const XSI_NS: &str = "http://www.w3.org/2001/XMLSchema-instance";
/// The `xml:` namespace (`xml:lang`, `xml:base`, ...).
pub const XML_NS: &str = "http://www.w3.org/XML/1998/namespace";
/// Reserved namespace for synthetic names given to anonymous inline types.
pub const ANON_NS: &str = "urn:x-xsdprune:anonymous";

/// Namespace URI plus local name. The identity currency for all global
/// schema components. Equality is exact string equality on both fields.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct QualifiedName {
    pub namespace: String,
    pub local: String,
}

impl QualifiedName {
    pub fn new(namespace: impl Into<String>, local: impl Into<String>) -> Self {
        QualifiedName {
            namespace: namespace.into(),
            local: local.into(),
        }
    }

    /// A name in no namespace.
    pub fn unqualified(local: impl Into<String>) -> Self {
        QualifiedName::new("", local)
    }

    /// A name in the XML Schema namespace.
    pub fn xsd(local: impl Into<String>) -> Self {
        QualifiedName::new(XSD_NS, local)
    }

    pub fn is_xsd(&self) -> bool {
        self.namespace == XSD_NS
    }

    /// True for a syntactically valid NCName (no colon, XML name rules).
    pub fn has_valid_local(&self) -> bool {
        is_ncname(&self.local)
    }
}

/// NCName check, sufficient for schema identifiers: an XML name without colons.
pub fn is_ncname(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | '\u{b7}'))
}

impl fmt::Display for QualifiedName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.namespace.as_str() {
            "" => write!(f, "{}", self.local),
            XSD_NS => write!(f, "xs:{}", self.local),
            XML_NS => write!(f, "xml:{}", self.local),
            ANON_NS => write!(f, "anon:{}", self.local),
            ns => write!(f, "{{{}}}{}", ns, self.local),
        }
    }
}

/// The five component kinds of a schema set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ComponentKind {
    Type,
    Element,
    Attribute,
    ModelGroup,
    AttributeGroup,
}

impl ComponentKind {
    pub fn label(self) -> &'static str {
        match self {
            ComponentKind::Type => "type",
            ComponentKind::Element => "element",
            ComponentKind::Attribute => "attribute",
            ComponentKind::ModelGroup => "modelGroup",
            ComponentKind::AttributeGroup => "attributeGroup",
        }
    }
}

/// Typed reference to a schema component.
///
/// Global components carry their qualified name. Inner components (local
/// element/attribute declarations) carry the global container that textually
/// declares them, the local name, and an ordinal disambiguating repeated
/// local names within one container (0 for the first occurrence in document
/// order).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ComponentRef {
    Global {
        kind: ComponentKind,
        name: QualifiedName,
    },
    Inner {
        kind: ComponentKind,
        container: Box<ComponentRef>,
        local: String,
        ordinal: u32,
    },
}

impl ComponentRef {
    pub fn global(kind: ComponentKind, name: QualifiedName) -> Self {
        ComponentRef::Global { kind, name }
    }

    pub fn global_type(name: QualifiedName) -> Self {
        Self::global(ComponentKind::Type, name)
    }

    pub fn global_element(name: QualifiedName) -> Self {
        Self::global(ComponentKind::Element, name)
    }

    pub fn global_attribute(name: QualifiedName) -> Self {
        Self::global(ComponentKind::Attribute, name)
    }

    pub fn model_group(name: QualifiedName) -> Self {
        Self::global(ComponentKind::ModelGroup, name)
    }

    pub fn attribute_group(name: QualifiedName) -> Self {
        Self::global(ComponentKind::AttributeGroup, name)
    }

    /// Inner element or attribute declared within a global container.
    pub fn inner(
        kind: ComponentKind,
        container: ComponentRef,
        local: impl Into<String>,
        ordinal: u32,
    ) -> Result<Self> {
        if !matches!(kind, ComponentKind::Element | ComponentKind::Attribute) {
            return Err(Error::InvalidInnerKind(kind));
        }
        if !matches!(
            container.kind(),
            ComponentKind::Type | ComponentKind::ModelGroup | ComponentKind::AttributeGroup
        ) || !container.is_global()
        {
            return Err(Error::InvalidInnerContainer);
        }
        Ok(ComponentRef::Inner {
            kind,
            container: Box::new(container),
            local: local.into(),
            ordinal,
        })
    }

    /// Inner ref where the caller guarantees a well-formed container.
    pub fn inner_unchecked(
        kind: ComponentKind,
        container: ComponentRef,
        local: impl Into<String>,
        ordinal: u32,
    ) -> Self {
        Self::inner(kind, container, local, ordinal).expect("well-formed inner component")
    }

    pub fn kind(&self) -> ComponentKind {
        match self {
            ComponentRef::Global { kind, .. } | ComponentRef::Inner { kind, .. } => *kind,
        }
    }

    pub fn is_global(&self) -> bool {
        matches!(self, ComponentRef::Global { .. })
    }

    pub fn is_inner(&self) -> bool {
        matches!(self, ComponentRef::Inner { .. })
    }

    /// The qualified name of a global component.
    pub fn name(&self) -> Option<&QualifiedName> {
        match self {
            ComponentRef::Global { name, .. } => Some(name),
            ComponentRef::Inner { .. } => None,
        }
    }

    /// The container of an inner component.
    pub fn container(&self) -> Option<&ComponentRef> {
        match self {
            ComponentRef::Global { .. } => None,
            ComponentRef::Inner { container, .. } => Some(container),
        }
    }

    pub fn local_name(&self) -> &str {
        match self {
            ComponentRef::Global { name, .. } => &name.local,
            ComponentRef::Inner { local, .. } => local,
        }
    }

    /// True when this reference names the built-in `anyType`, which is never
    /// stored in a schema set.
    pub fn is_any_type(&self) -> bool {
        matches!(self, ComponentRef::Global { kind: ComponentKind::Type, name }
            if name.is_xsd() && name.local == "anyType")
    }
}

impl fmt::Display for ComponentRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComponentRef::Global { name, .. } => write!(f, "{}", name),
            ComponentRef::Inner {
                kind,
                container,
                local,
                ordinal,
            } => {
                let marker = if *kind == ComponentKind::Attribute {
                    "@"
                } else {
                    ""
                };
                if *ordinal == 0 {
                    write!(f, "{}:{}{}", container, marker, local)
                } else {
                    write!(f, "{}:{}{}#{}", container, marker, local, ordinal)
                }
            }
        }
    }
}
