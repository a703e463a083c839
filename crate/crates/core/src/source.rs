//! Preserved source syntax and per-component structure indexes.
//!
//! Loading keeps, for every global component, the original XSD subtree it
//! was declared with (as an owned tree with all QName-valued attributes
//! resolved against the source file's in-scope namespaces) plus a flattened
//! view of its particles and attribute uses. Emission re-serializes these
//! fragments; analysis walks the flattened views.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::name::{ComponentRef, QualifiedName};

/// Occurrence upper bound; `unbounded` is a distinguished marker, never a
/// sentinel integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaxOccurs {
    Bounded(u32),
    Unbounded,
}

impl MaxOccurs {
    pub fn is_zero(self) -> bool {
        matches!(self, MaxOccurs::Bounded(0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Compositor {
    Sequence,
    Choice,
    All,
}

/// What a particle stands for, flattened out of its compositor tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParticleTerm {
    /// A local element declaration.
    InnerElement {
        decl: ComponentRef,
        /// Namespace instance elements carry for this declaration ("" when
        /// the declaration is unqualified).
        instance_namespace: String,
        local: String,
        /// Declared type; `None` means the implicit `anyType`.
        type_name: Option<QualifiedName>,
        nillable: bool,
    },
    /// A `ref=` to a global element.
    ElementRef(QualifiedName),
    /// A `ref=` to a named model group.
    GroupRef(QualifiedName),
    /// An `any` wildcard; carries the raw namespace constraint.
    Wildcard(String),
}

/// One entry of a container's flattened particle list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParticleInfo {
    pub term: ParticleTerm,
    pub min_occurs: u32,
    pub max_occurs: MaxOccurs,
    /// The innermost compositor this particle sits in.
    pub compositor: Compositor,
}

/// What an attribute use stands for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AttrUseTerm {
    /// A local attribute declaration.
    InnerAttribute {
        decl: ComponentRef,
        instance_namespace: String,
        local: String,
        /// Declared simple type; `None` means the implicit `anySimpleType`.
        type_name: Option<QualifiedName>,
    },
    /// A `ref=` to a global attribute.
    AttributeRef(QualifiedName),
    /// A `ref=` to a named attribute group.
    AttributeGroupRef(QualifiedName),
    /// An `anyAttribute` wildcard; carries the raw namespace constraint.
    AnyAttribute(String),
    /// A `use="prohibited"` tombstone: shadows an inherited attribute so it
    /// never matches through this type.
    Prohibited { namespace: String, local: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttrUse {
    pub term: AttrUseTerm,
    pub required: bool,
}

/// Attribute of a preserved source fragment. QName-valued attributes are
/// stored resolved so fragments stay meaningful outside their original
/// namespace context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FragmentAttr {
    /// Attribute namespace ("" for unprefixed attributes).
    pub namespace: String,
    pub local: String,
    pub value: FragmentValue,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FragmentValue {
    Plain(String),
    QName(QualifiedName),
    QNameList(Vec<QualifiedName>),
}

/// Owned copy of one source XML element and its subtree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fragment {
    pub namespace: String,
    pub local: String,
    pub attributes: Vec<FragmentAttr>,
    pub children: Vec<FragmentNode>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FragmentNode {
    Element(Fragment),
    Text(String),
    Comment(String),
}

impl Fragment {
    pub fn attribute(&self, local: &str) -> Option<&FragmentValue> {
        self.attributes
            .iter()
            .find(|a| a.namespace.is_empty() && a.local == local)
            .map(|a| &a.value)
    }

    pub fn plain_attribute(&self, local: &str) -> Option<&str> {
        match self.attribute(local) {
            Some(FragmentValue::Plain(s)) => Some(s),
            _ => None,
        }
    }

    pub fn qname_attribute(&self, local: &str) -> Option<&QualifiedName> {
        match self.attribute(local) {
            Some(FragmentValue::QName(q)) => Some(q),
            _ => None,
        }
    }

    /// Child elements in the XSD namespace.
    pub fn xsd_children(&self) -> impl Iterator<Item = &Fragment> {
        self.children.iter().filter_map(|c| match c {
            FragmentNode::Element(e) if e.namespace == crate::name::XSD_NS => Some(e),
            _ => None,
        })
    }
}

/// Everything preserved about one global component.
#[derive(Debug, Clone)]
pub struct SourceEntry {
    pub source_file: PathBuf,
    pub target_namespace: String,
    pub fragment: Fragment,
    /// Flattened particle list in schema document order (types and model
    /// groups; empty for the rest).
    pub particles: Vec<ParticleInfo>,
    /// Flattened attribute uses in document order (types and attribute
    /// groups; empty for the rest).
    pub attr_uses: Vec<AttrUse>,
}

/// Map from every global component to its original syntax and structure.
#[derive(Debug, Clone, Default)]
pub struct SourceIndex {
    entries: BTreeMap<ComponentRef, SourceEntry>,
    /// Per source file, the prefix→namespace bindings seen on its root.
    pub namespace_prefixes: BTreeMap<PathBuf, BTreeMap<String, String>>,
}

impl SourceIndex {
    pub fn insert(&mut self, component: ComponentRef, entry: SourceEntry) {
        self.entries.insert(component, entry);
    }

    pub fn get(&self, component: &ComponentRef) -> Option<&SourceEntry> {
        self.entries.get(component)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&ComponentRef, &SourceEntry)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
