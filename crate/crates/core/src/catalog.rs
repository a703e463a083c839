//! Resolution indexes built during loading: global declarations, type
//! derivation, and substitution groups.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use crate::builtins;
use crate::error::{Error, Result};
use crate::name::{ComponentKind, ComponentRef, QualifiedName};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivationMethod {
    Extension,
    Restriction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TypeKind {
    Complex,
    /// Complex type whose content is a simple type (text plus attributes).
    ComplexSimpleContent,
    Simple,
}

#[derive(Debug, Clone)]
pub struct ElementInfo {
    /// Declared type; `None` is the implicit `anyType`.
    pub type_name: Option<QualifiedName>,
    pub substitution_head: Option<QualifiedName>,
    pub is_abstract: bool,
    pub nillable: bool,
}

#[derive(Debug, Clone)]
pub struct AttributeInfo {
    /// Declared simple type; `None` is the implicit `anySimpleType`.
    pub type_name: Option<QualifiedName>,
}

#[derive(Debug, Clone)]
pub struct TypeEntry {
    pub kind: TypeKind,
    /// Types this type needs beyond derivation: list item types and union
    /// member types. The relation model cannot carry these, but retention
    /// and emission must follow them.
    pub extra_type_deps: Vec<QualifiedName>,
}

/// Resolution indexes for one loaded schema set.
#[derive(Debug, Clone, Default)]
pub struct SchemaCatalog {
    pub entry_files: Vec<PathBuf>,
    /// Every schema document loaded, with the target namespace it
    /// contributed to (after chameleon adoption).
    pub loaded_files: BTreeMap<PathBuf, String>,
    pub(crate) types: BTreeMap<QualifiedName, TypeEntry>,
    pub(crate) global_elements: BTreeMap<QualifiedName, ElementInfo>,
    pub(crate) global_attributes: BTreeMap<QualifiedName, AttributeInfo>,
    pub(crate) model_groups: BTreeSet<QualifiedName>,
    pub(crate) attribute_groups: BTreeSet<QualifiedName>,
    /// type → (base, method); acyclic, one base per type.
    pub(crate) derivation: BTreeMap<QualifiedName, (QualifiedName, DerivationMethod)>,
    /// member element → its declared head (single step).
    pub(crate) substitution_head: BTreeMap<QualifiedName, QualifiedName>,
    /// head element → all transitive members; transitively closed.
    pub(crate) substitution_members: BTreeMap<QualifiedName, BTreeSet<QualifiedName>>,
}

impl SchemaCatalog {
    /// Resolves a type name to its component reference, accepting built-in
    /// XSD types. Unknown names are errors.
    pub fn resolve_type(&self, name: &QualifiedName) -> Result<ComponentRef> {
        if self.types.contains_key(name) || builtins::is_builtin_type(name) {
            Ok(ComponentRef::global_type(name.clone()))
        } else {
            Err(Error::UnknownType(name.clone()))
        }
    }

    pub fn is_declared_type(&self, name: &QualifiedName) -> bool {
        self.types.contains_key(name)
    }

    pub fn type_entry(&self, name: &QualifiedName) -> Option<&TypeEntry> {
        self.types.get(name)
    }

    pub fn element_info(&self, name: &QualifiedName) -> Option<&ElementInfo> {
        self.global_elements.get(name)
    }

    pub fn attribute_info(&self, name: &QualifiedName) -> Option<&AttributeInfo> {
        self.global_attributes.get(name)
    }

    pub fn derivation_of(&self, name: &QualifiedName) -> Option<&(QualifiedName, DerivationMethod)> {
        self.derivation.get(name)
    }

    /// The transitive substitution-group member set of a head element,
    /// excluding the head itself. Errors when `head` is not a global
    /// element.
    pub fn substitution_members(&self, head: &QualifiedName) -> Result<BTreeSet<QualifiedName>> {
        if !self.global_elements.contains_key(head) {
            return Err(Error::NotGlobalElement(head.clone()));
        }
        Ok(self
            .substitution_members
            .get(head)
            .cloned()
            .unwrap_or_default())
    }

    /// The declared head of a member element, one step up the chain.
    pub fn declared_head(&self, member: &QualifiedName) -> Option<&QualifiedName> {
        self.substitution_head.get(member)
    }

    /// The derivation chain of a declared (non-built-in) type, nearest base
    /// first, excluding `anyType`. Built-in types have no stored ancestors.
    pub fn ancestors(&self, ty: &QualifiedName) -> Vec<QualifiedName> {
        let mut out = Vec::new();
        let mut cur = ty.clone();
        while let Some((base, _)) = self.derivation.get(&cur) {
            out.push(base.clone());
            cur = base.clone();
        }
        out
    }

    /// True when `derived` is `base` or transitively derives from it, using
    /// declared derivations plus the built-in hierarchy.
    pub fn derives_from(&self, derived: &QualifiedName, base: &QualifiedName) -> bool {
        if base.is_xsd() && base.local == "anyType" {
            return true;
        }
        let mut cur = derived.clone();
        loop {
            if cur == *base {
                return true;
            }
            if let Some((b, _)) = self.derivation.get(&cur) {
                cur = b.clone();
            } else if let Some(b) = builtins::builtin_base(&cur) {
                cur = b;
            } else {
                return false;
            }
        }
    }

    /// Closes the substitution index transitively. Called once after all
    /// schema documents are loaded.
    pub(crate) fn close_substitution_index(&mut self) {
        let mut members: BTreeMap<QualifiedName, BTreeSet<QualifiedName>> = BTreeMap::new();
        for (member, head) in &self.substitution_head {
            // Walk the head chain; a member of E is also a member of every
            // transitive head above E.
            let mut cur = head;
            let mut guard = 0;
            loop {
                members
                    .entry(cur.clone())
                    .or_default()
                    .insert(member.clone());
                guard += 1;
                if guard > self.substitution_head.len() {
                    break; // cycle in declarations; loading reports it
                }
                match self.substitution_head.get(cur) {
                    Some(next) => cur = next,
                    None => break,
                }
            }
        }
        self.substitution_members = members;
    }

    /// The kind of a declared global component name, if any.
    pub fn kind_of_global(&self, name: &QualifiedName) -> Option<ComponentKind> {
        if self.types.contains_key(name) {
            Some(ComponentKind::Type)
        } else if self.global_elements.contains_key(name) {
            Some(ComponentKind::Element)
        } else if self.global_attributes.contains_key(name) {
            Some(ComponentKind::Attribute)
        } else if self.model_groups.contains(name) {
            Some(ComponentKind::ModelGroup)
        } else if self.attribute_groups.contains(name) {
            Some(ComponentKind::AttributeGroup)
        } else {
            None
        }
    }
}
