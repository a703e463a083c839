//! Conversion of parsed XSD subtrees into owned [`Fragment`] trees.
//!
//! All QName-valued attributes are resolved against the source document's
//! in-scope namespaces while the tree is copied, so fragments carry no
//! prefix dependencies. Local element/attribute declarations get their
//! effective `form` made explicit whenever it differs from the emission
//! defaults (qualified elements, unqualified attributes).

use std::path::Path;

use roxmltree::Node;

use crate::error::{Error, Result};
use crate::name::{QualifiedName, XSD_NS};
use crate::source::{Fragment, FragmentAttr, FragmentNode, FragmentValue};

/// Attributes of XSD elements whose value is a single QName.
const QNAME_ATTRS: &[&str] = &["type", "ref", "base", "substitutionGroup", "itemType", "refer"];

/// Namespace resolution context for one schema document.
pub(crate) struct ResolveCtx<'a> {
    pub path: &'a Path,
    /// Effective target namespace, after chameleon adoption.
    pub target_namespace: &'a str,
    /// True when this document had no targetNamespace of its own and was
    /// included into another namespace; unprefixed QNames with no default
    /// namespace then resolve to the adopting namespace.
    pub chameleon: bool,
    pub element_form_qualified: bool,
    pub attribute_form_qualified: bool,
}

impl ResolveCtx<'_> {
    /// Resolves a lexical QName from an attribute value at `node`.
    pub(crate) fn resolve_qname(&self, node: Node, raw: &str) -> Result<QualifiedName> {
        let raw = raw.trim();
        if let Some((prefix, local)) = raw.split_once(':') {
            match node.lookup_namespace_uri(Some(prefix)) {
                Some(ns) => Ok(QualifiedName::new(ns, local)),
                None => Err(Error::schema(
                    self.path,
                    format!("undeclared namespace prefix `{}` in QName `{}`", prefix, raw),
                )),
            }
        } else {
            match node.lookup_namespace_uri(None) {
                Some(ns) => Ok(QualifiedName::new(ns, raw)),
                None if self.chameleon => {
                    Ok(QualifiedName::new(self.target_namespace, raw))
                }
                None => Ok(QualifiedName::unqualified(raw)),
            }
        }
    }
}

/// Copies `node`'s subtree into an owned fragment. `is_root` marks the
/// global declaration itself, which is exempt from form normalization.
pub(crate) fn build_fragment(ctx: &ResolveCtx, node: Node, is_root: bool) -> Result<Fragment> {
    let namespace = node.tag_name().namespace().unwrap_or("").to_string();
    let local = node.tag_name().name().to_string();
    let is_xsd = namespace == XSD_NS;

    let mut attributes = Vec::new();
    for attr in node.attributes() {
        let attr_ns = attr.namespace().unwrap_or("");
        let attr_local = attr.name();
        let value = if is_xsd && attr_ns.is_empty() && QNAME_ATTRS.contains(&attr_local) {
            FragmentValue::QName(ctx.resolve_qname(node, attr.value())?)
        } else if is_xsd && attr_ns.is_empty() && attr_local == "memberTypes" {
            let mut names = Vec::new();
            for part in attr.value().split_whitespace() {
                names.push(ctx.resolve_qname(node, part)?);
            }
            FragmentValue::QNameList(names)
        } else {
            FragmentValue::Plain(attr.value().to_string())
        };
        attributes.push(FragmentAttr {
            namespace: attr_ns.to_string(),
            local: attr_local.to_string(),
            value,
        });
    }

    let mut fragment = Fragment {
        namespace,
        local,
        attributes,
        children: Vec::new(),
    };

    if !is_root && is_xsd && matches!(fragment.local.as_str(), "element" | "attribute") {
        normalize_form(ctx, &mut fragment);
    }

    for child in node.children() {
        if child.is_element() {
            fragment
                .children
                .push(FragmentNode::Element(build_fragment(ctx, child, false)?));
        } else if child.is_text() {
            if let Some(text) = child.text() {
                fragment.children.push(FragmentNode::Text(text.to_string()));
            }
        } else if child.is_comment() {
            if let Some(text) = child.text() {
                fragment
                    .children
                    .push(FragmentNode::Comment(text.to_string()));
            }
        }
    }

    Ok(fragment)
}

/// Rewrites a local declaration's `form` so the fragment no longer depends
/// on its source document's form defaults. Emitted files declare qualified
/// elements and unqualified attributes as their defaults; declarations whose
/// effective form matches that need no attribute at all.
fn normalize_form(ctx: &ResolveCtx, fragment: &mut Fragment) {
    // Only named local declarations have a form; references do not.
    if fragment.plain_attribute("name").is_none() {
        return;
    }
    let default_qualified = match fragment.local.as_str() {
        "element" => ctx.element_form_qualified,
        _ => ctx.attribute_form_qualified,
    };
    let effective_qualified = match fragment.plain_attribute("form") {
        Some("qualified") => true,
        Some("unqualified") => false,
        _ => default_qualified,
    };
    // Emission defaults: elements qualified, attributes unqualified.
    let emission_default_qualified = fragment.local == "element";

    fragment.attributes.retain(|a| !(a.namespace.is_empty() && a.local == "form"));
    if effective_qualified != emission_default_qualified {
        fragment.attributes.push(FragmentAttr {
            namespace: String::new(),
            local: "form".to_string(),
            value: FragmentValue::Plain(
                if effective_qualified { "qualified" } else { "unqualified" }.to_string(),
            ),
        });
    }
}

/// True when a local declaration in this fragment is qualified in instance
/// documents, reading the normalized form produced by [`normalize_form`].
pub(crate) fn normalized_form_qualified(fragment: &Fragment) -> bool {
    match fragment.plain_attribute("form") {
        Some("qualified") => true,
        Some("unqualified") => false,
        _ => fragment.local == "element",
    }
}
