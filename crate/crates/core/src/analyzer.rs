//! Instance-driven subset computation: matches XML instance nodes against
//! the loaded schema's content models and accumulates exactly the components
//! and relation pairs the corpus exercises, including types reached through
//! `xsi:type` dynamic typing and elements reached through substitution
//! groups.

use std::fmt;
use std::path::Path;

use serde::Serialize;

use crate::catalog::{SchemaCatalog, TypeKind};
use crate::error::{Error, Result};
use crate::loader::Warning;
use crate::model::{Relation, SchemaSet};
use crate::name::{ComponentRef, QualifiedName, XML_NS, XSI_NS};
use crate::source::{AttrUseTerm, ParticleTerm, SourceIndex};

/// How analysis reacts to instance content the schema cannot account for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AnalysisMode {
    /// Unmatched content aborts the run with the document path.
    #[default]
    Strict,
    /// Unmatched content produces a warning and the subtree is skipped.
    Lenient,
}

/// Everything analysis needs, borrowed from one load result.
#[derive(Clone, Copy)]
pub struct AnalysisContext<'a> {
    pub schema: &'a SchemaSet,
    pub catalog: &'a SchemaCatalog,
    pub source_index: &'a SourceIndex,
    pub mode: AnalysisMode,
}

/// A parsed XML instance element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceNode {
    pub name: QualifiedName,
    /// Attributes in document order, excluding namespace declarations;
    /// `xsi:*` attributes are lifted into the dedicated fields.
    pub attributes: Vec<(QualifiedName, String)>,
    pub xsi_type: Option<QualifiedName>,
    pub xsi_nil: bool,
    pub children: Vec<InstanceNode>,
    pub text: String,
}

impl InstanceNode {
    /// A leaf contains no child elements.
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// Returns the root node of an instance document.
pub fn root_of(text: &str) -> Result<InstanceNode> {
    let doc = roxmltree::Document::parse(text).map_err(|source| Error::XmlParse {
        path: "<instance>".into(),
        source,
    })?;
    Ok(convert_node(doc.root_element())?)
}

/// Reads and parses an instance document from disk.
pub fn root_of_file(path: &Path) -> Result<InstanceNode> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::io(path, source))?;
    let doc = roxmltree::Document::parse(&text).map_err(|source| Error::XmlParse {
        path: path.to_path_buf(),
        source,
    })?;
    convert_node(doc.root_element())
}

fn convert_node(node: roxmltree::Node) -> Result<InstanceNode> {
    let name = QualifiedName::new(
        node.tag_name().namespace().unwrap_or(""),
        node.tag_name().name(),
    );
    let mut attributes = Vec::new();
    let mut xsi_type = None;
    let mut xsi_nil = false;
    for attr in node.attributes() {
        let ns = attr.namespace().unwrap_or("");
        if ns == XSI_NS {
            match attr.name() {
                "type" => {
                    let raw = attr.value().trim();
                    let resolved = match raw.split_once(':') {
                        Some((prefix, local)) => {
                            let ns = node.lookup_namespace_uri(Some(prefix)).ok_or_else(|| {
                                Error::Analysis {
                                    file: String::new(),
                                    path: name.to_string(),
                                    message: format!(
                                        "xsi:type `{}` uses the undeclared prefix `{}`",
                                        raw, prefix
                                    ),
                                }
                            })?;
                            QualifiedName::new(ns, local)
                        }
                        None => QualifiedName::new(
                            node.lookup_namespace_uri(None).unwrap_or(""),
                            raw,
                        ),
                    };
                    xsi_type = Some(resolved);
                }
                "nil" => xsi_nil = attr.value() == "true",
                _ => {} // xsi:schemaLocation and friends are reserved
            }
            continue;
        }
        attributes.push((QualifiedName::new(ns, attr.name()), attr.value().to_string()));
    }
    let mut children = Vec::new();
    let mut text = String::new();
    for child in node.children() {
        if child.is_element() {
            children.push(convert_node(child)?);
        } else if child.is_text() {
            if let Some(t) = child.text() {
                text.push_str(t);
            }
        }
    }
    Ok(InstanceNode {
        name,
        attributes,
        xsi_type,
        xsi_nil,
        children,
        text,
    })
}

/// Per-document analysis outcome.
#[derive(Debug, Clone, Serialize)]
pub struct FileReport {
    pub path: String,
    /// Component count of this document's own subset, before union.
    pub components: usize,
    /// Relation pair count of this document's own subset.
    pub relations: usize,
    pub warnings: Vec<String>,
    pub skipped_subtrees: usize,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct AnalysisReport {
    pub files: Vec<FileReport>,
}

/// Where a matched element declaration was found.
#[derive(Debug, Clone)]
struct GroupHop {
    referrer: ComponentRef,
    group: ComponentRef,
}

#[derive(Debug, Clone)]
enum ElementMatch {
    /// A local declaration; `holder` is the type or model group textually
    /// declaring it (always equal to the decl's container).
    Inner {
        decl: ComponentRef,
        type_name: Option<QualifiedName>,
        hops: Vec<GroupHop>,
    },
    /// A `ref=` particle; `referenced` is the element named in the schema
    /// text, `member` the substitution-group member actually present (equal
    /// to `referenced` for direct matches).
    Ref {
        referenced: QualifiedName,
        member: QualifiedName,
        holder: ComponentRef,
        hops: Vec<GroupHop>,
    },
    Wildcard,
}

#[derive(Debug, Clone)]
enum AttributeMatch {
    Inner {
        decl: ComponentRef,
        type_name: Option<QualifiedName>,
        holder: ComponentRef,
        hops: Vec<GroupHop>,
    },
    Ref {
        target: QualifiedName,
        holder: ComponentRef,
        hops: Vec<GroupHop>,
    },
    Wildcard,
}

/// The declaration an instance node resolved to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedElement {
    pub decl: ComponentRef,
    /// Declared type of the declaration; `None` is the implicit `anyType`.
    pub declared_type: Option<QualifiedName>,
}

struct Analysis<'a> {
    ctx: AnalysisContext<'a>,
    file: String,
    result: SchemaSet,
    warnings: Vec<Warning>,
    skipped: usize,
}

impl<'a> Analysis<'a> {
    fn new(ctx: AnalysisContext<'a>, file: &str) -> Self {
        Analysis {
            ctx,
            file: file.to_string(),
            result: SchemaSet::empty(),
            warnings: Vec::new(),
            skipped: 0,
        }
    }

    fn error(&self, path: &str, message: impl Into<String>) -> Error {
        Error::Analysis {
            file: self.file.clone(),
            path: path.to_string(),
            message: message.into(),
        }
    }

    /// Lenient mode turns an unmatched-content error into a warning and
    /// reports the subtree as skipped.
    fn unmatched(&mut self, path: &str, message: String) -> Result<bool> {
        match self.ctx.mode {
            AnalysisMode::Strict => Err(self.error(path, message)),
            AnalysisMode::Lenient => {
                self.warnings.push(Warning {
                    file: None,
                    message: format!("{}: {}: {}", self.file, path, message),
                });
                self.skipped += 1;
                Ok(false)
            }
        }
    }

    fn skip_wildcard(&mut self, path: &str, what: &str) {
        self.warnings.push(Warning {
            file: None,
            message: format!(
                "{}: {}: {} matched a wildcard and was skipped; wildcard content is outside the relation model",
                self.file, path, what
            ),
        });
        self.skipped += 1;
    }

    /// Adds a type, its whole derivation chain with the connecting
    /// isDerivedFrom pairs, and any list/union item types it needs.
    fn add_type_closure(&mut self, type_name: &QualifiedName) -> Result<()> {
        let comp = ComponentRef::global_type(type_name.clone());
        if self.result.types().contains(&comp) {
            return Ok(());
        }
        self.result.add_component(comp.clone())?;
        if let Some(entry) = self.ctx.catalog.type_entry(type_name) {
            let deps = entry.extra_type_deps.clone();
            for dep in deps {
                self.add_type_closure(&dep)?;
            }
        }
        if let Some((base, _)) = self.ctx.catalog.derivation_of(type_name).cloned() {
            self.result.add_relation(
                Relation::IsDerivedFrom,
                comp,
                ComponentRef::global_type(base.clone()),
            )?;
            self.add_type_closure(&base)?;
        }
        Ok(())
    }

    /// Adds a global element together with the declaration content its
    /// emitted form needs: its isOfType pair and declared-type closure.
    fn add_global_element_closure(&mut self, name: &QualifiedName) -> Result<()> {
        let comp = ComponentRef::global_element(name.clone());
        self.result.add_component(comp.clone())?;
        if let Some(info) = self.ctx.catalog.element_info(name) {
            if let Some(t) = info.type_name.clone() {
                self.result.add_relation(
                    Relation::IsOfType,
                    comp,
                    ComponentRef::global_type(t.clone()),
                )?;
                self.add_type_closure(&t)?;
            }
        }
        Ok(())
    }

    /// Records the substitution chain from a member up to the referenced
    /// head: every isInSubstitutionGroup pair plus each chain element's own
    /// declaration closure.
    fn add_substitution_chain(
        &mut self,
        member: &QualifiedName,
        referenced: &QualifiedName,
        path: &str,
    ) -> Result<()> {
        let mut cur = member.clone();
        let mut guard = 0;
        while cur != *referenced {
            let head = match self.ctx.catalog.declared_head(&cur) {
                Some(h) => h.clone(),
                None => {
                    return Err(self.error(
                        path,
                        format!(
                            "substitution chain from `{}` never reaches referenced element `{}`",
                            member, referenced
                        ),
                    ))
                }
            };
            self.add_global_element_closure(&cur)?;
            self.add_global_element_closure(&head)?;
            self.result.add_relation(
                Relation::IsInSubstitutionGroup,
                ComponentRef::global_element(cur.clone()),
                ComponentRef::global_element(head.clone()),
            )?;
            cur = head;
            guard += 1;
            if guard > 1000 {
                return Err(self.error(path, "substitution chain too deep".to_string()));
            }
        }
        Ok(())
    }

    fn add_group_hops(&mut self, hops: &[GroupHop]) -> Result<()> {
        for hop in hops {
            self.result.add_component(hop.group.clone())?;
            self.result.add_relation(
                Relation::Reference,
                hop.referrer.clone(),
                hop.group.clone(),
            )?;
        }
        Ok(())
    }

    /// The derivation chain of a dynamic type, outermost first, as the list
    /// of containers whose content models apply to a node of that type.
    fn type_chain(&self, dynamic_type: &QualifiedName) -> Vec<QualifiedName> {
        let mut chain = vec![dynamic_type.clone()];
        chain.extend(self.ctx.catalog.ancestors(dynamic_type));
        chain
    }

    /// Searches one container's particles (expanding referenced model
    /// groups depth-first in document order) for a declaration matching
    /// `name`. Direct name matches only; substitution handled by callers.
    fn find_in_container(
        &self,
        container: &ComponentRef,
        name: &QualifiedName,
        hops: &mut Vec<GroupHop>,
        saw_wildcard: &mut bool,
    ) -> Option<ElementMatch> {
        let entry = self.ctx.source_index.get(container)?;
        for particle in &entry.particles {
            match &particle.term {
                ParticleTerm::InnerElement {
                    decl,
                    instance_namespace,
                    local,
                    type_name,
                    ..
                } => {
                    if *local == name.local && *instance_namespace == name.namespace {
                        return Some(ElementMatch::Inner {
                            decl: decl.clone(),
                            type_name: type_name.clone(),
                            hops: hops.clone(),
                        });
                    }
                }
                ParticleTerm::ElementRef(target) => {
                    if target == name {
                        return Some(ElementMatch::Ref {
                            referenced: target.clone(),
                            member: target.clone(),
                            holder: container.clone(),
                            hops: hops.clone(),
                        });
                    }
                }
                ParticleTerm::GroupRef(group_name) => {
                    let group = ComponentRef::model_group(group_name.clone());
                    hops.push(GroupHop {
                        referrer: container.clone(),
                        group: group.clone(),
                    });
                    if let Some(found) = self.find_in_container(&group, name, hops, saw_wildcard) {
                        return Some(found);
                    }
                    hops.pop();
                }
                ParticleTerm::Wildcard(constraint) => {
                    if wildcard_matches(constraint, &entry.target_namespace, &name.namespace) {
                        *saw_wildcard = true;
                    }
                }
            }
        }
        None
    }

    /// Substitution pass over one container: an element reference matches a
    /// node whose name is a transitive substitution member of the
    /// referenced element.
    fn find_substitution_in_container(
        &self,
        container: &ComponentRef,
        name: &QualifiedName,
        hops: &mut Vec<GroupHop>,
    ) -> Option<ElementMatch> {
        let entry = self.ctx.source_index.get(container)?;
        for particle in &entry.particles {
            match &particle.term {
                ParticleTerm::ElementRef(target) => {
                    if let Ok(members) = self.ctx.catalog.substitution_members(target) {
                        if members.contains(name) {
                            return Some(ElementMatch::Ref {
                                referenced: target.clone(),
                                member: name.clone(),
                                holder: container.clone(),
                                hops: hops.clone(),
                            });
                        }
                    }
                }
                ParticleTerm::GroupRef(group_name) => {
                    let group = ComponentRef::model_group(group_name.clone());
                    hops.push(GroupHop {
                        referrer: container.clone(),
                        group: group.clone(),
                    });
                    if let Some(found) = self.find_substitution_in_container(&group, name, hops) {
                        return Some(found);
                    }
                    hops.pop();
                }
                _ => {}
            }
        }
        None
    }

    /// Matches a child node's name within the effective content model of a
    /// dynamic type: the type's own particles first, then inherited ones,
    /// walking the derivation chain; direct matches win over substitution,
    /// substitution over wildcards.
    fn find_element_match(
        &self,
        dynamic_type: &QualifiedName,
        name: &QualifiedName,
    ) -> Option<ElementMatch> {
        let chain = self.type_chain(dynamic_type);
        let mut saw_wildcard = false;
        for ty in &chain {
            let container = ComponentRef::global_type(ty.clone());
            let mut hops = Vec::new();
            if let Some(found) =
                self.find_in_container(&container, name, &mut hops, &mut saw_wildcard)
            {
                return Some(found);
            }
        }
        for ty in &chain {
            let container = ComponentRef::global_type(ty.clone());
            let mut hops = Vec::new();
            if let Some(found) = self.find_substitution_in_container(&container, name, &mut hops) {
                return Some(found);
            }
        }
        if saw_wildcard {
            return Some(ElementMatch::Wildcard);
        }
        None
    }

    /// Matches an instance attribute within the effective attribute model
    /// of a dynamic type: own uses first, then inherited ones, expanding
    /// attribute groups; prohibitions in nearer types shadow inherited
    /// declarations.
    fn find_attribute_match(
        &self,
        dynamic_type: &QualifiedName,
        name: &QualifiedName,
    ) -> Option<AttributeMatch> {
        let chain = self.type_chain(dynamic_type);
        let mut saw_wildcard = false;
        let mut prohibited: Vec<(String, String)> = Vec::new();
        for ty in &chain {
            let container = ComponentRef::global_type(ty.clone());
            let mut hops = Vec::new();
            if let Some(found) =
                self.find_attr_in_container(&container, name, &mut hops, &mut saw_wildcard, &mut prohibited)
            {
                return Some(found);
            }
        }
        if saw_wildcard {
            return Some(AttributeMatch::Wildcard);
        }
        None
    }

    fn find_attr_in_container(
        &self,
        container: &ComponentRef,
        name: &QualifiedName,
        hops: &mut Vec<GroupHop>,
        saw_wildcard: &mut bool,
        prohibited: &mut Vec<(String, String)>,
    ) -> Option<AttributeMatch> {
        let entry = self.ctx.source_index.get(container)?;
        for attr_use in &entry.attr_uses {
            match &attr_use.term {
                AttrUseTerm::InnerAttribute {
                    decl,
                    instance_namespace,
                    local,
                    type_name,
                } => {
                    if *local == name.local && *instance_namespace == name.namespace {
                        if prohibited.contains(&(name.namespace.clone(), name.local.clone())) {
                            continue;
                        }
                        return Some(AttributeMatch::Inner {
                            decl: decl.clone(),
                            type_name: type_name.clone(),
                            holder: container.clone(),
                            hops: hops.clone(),
                        });
                    }
                }
                AttrUseTerm::AttributeRef(target) => {
                    if target == name
                        && !prohibited.contains(&(name.namespace.clone(), name.local.clone()))
                    {
                        return Some(AttributeMatch::Ref {
                            target: target.clone(),
                            holder: container.clone(),
                            hops: hops.clone(),
                        });
                    }
                }
                AttrUseTerm::AttributeGroupRef(group_name) => {
                    let group = ComponentRef::attribute_group(group_name.clone());
                    hops.push(GroupHop {
                        referrer: container.clone(),
                        group: group.clone(),
                    });
                    if let Some(found) =
                        self.find_attr_in_container(&group, name, hops, saw_wildcard, prohibited)
                    {
                        return Some(found);
                    }
                    hops.pop();
                }
                AttrUseTerm::Prohibited { namespace, local } => {
                    prohibited.push((namespace.clone(), local.clone()));
                }
                AttrUseTerm::AnyAttribute(constraint) => {
                    if wildcard_matches(constraint, &entry.target_namespace, &name.namespace) {
                        *saw_wildcard = true;
                    }
                }
            }
        }
        None
    }

    /// The dynamic type of a node: its `xsi:type` when present (verified to
    /// derive from the declared type), else the declared type.
    fn dynamic_type(
        &self,
        node: &InstanceNode,
        declared: &Option<QualifiedName>,
        path: &str,
    ) -> Result<Option<QualifiedName>> {
        match &node.xsi_type {
            Some(x) => {
                if !self.ctx.catalog.is_declared_type(x) && !crate::builtins::is_builtin_type(x) {
                    return Err(self.error(path, format!("xsi:type names unknown type `{}`", x)));
                }
                if let Some(declared) = declared {
                    if !self.ctx.catalog.derives_from(x, declared) {
                        return Err(self.error(
                            path,
                            format!(
                                "xsi:type `{}` is not derived from the declared type `{}`",
                                x, declared
                            ),
                        ));
                    }
                }
                Ok(Some(x.clone()))
            }
            None => Ok(declared.clone()),
        }
    }

    /// The recursion of the subsetting algorithm: one instance node with
    /// its resolved declaration.
    fn visit(&mut self, node: &InstanceNode, resolved: &ResolvedElement, path: &str) -> Result<()> {
        self.result.add_component(resolved.decl.clone())?;
        if let Some(declared) = &resolved.declared_type {
            self.result.add_relation(
                Relation::IsOfType,
                resolved.decl.clone(),
                ComponentRef::global_type(declared.clone()),
            )?;
        }

        let dynamic = self.dynamic_type(node, &resolved.declared_type, path)?;
        let dynamic = match dynamic {
            Some(t) => {
                self.add_type_closure(&t)?;
                Some(t)
            }
            None => None,
        };

        // Attributes, excluding the reserved xsi:/xmlns: and xml: spaces.
        for (attr_name, _) in &node.attributes {
            if attr_name.namespace == XML_NS {
                continue;
            }
            let attr_path = format!("{}/@{}", path, attr_name.local);
            let Some(dynamic) = &dynamic else {
                self.unmatched(
                    &attr_path,
                    "attribute on an element with no stored type (anyType content)".to_string(),
                )?;
                continue;
            };
            match self.find_attribute_match(dynamic, attr_name) {
                None => {
                    self.unmatched(
                        &attr_path,
                        format!("no attribute declaration matches `{}`", attr_name),
                    )?;
                }
                Some(AttributeMatch::Wildcard) => {
                    self.skip_wildcard(&attr_path, "attribute");
                }
                Some(AttributeMatch::Inner {
                    decl,
                    type_name,
                    holder,
                    hops,
                }) => {
                    self.add_group_hops(&hops)?;
                    self.result.add_component(decl.clone())?;
                    self.result
                        .add_relation(Relation::Contains, holder, decl.clone())?;
                    if let Some(t) = &type_name {
                        self.result.add_relation(
                            Relation::IsOfType,
                            decl,
                            ComponentRef::global_type(t.clone()),
                        )?;
                        self.add_type_closure(t)?;
                    }
                }
                Some(AttributeMatch::Ref {
                    target,
                    holder,
                    hops,
                }) => {
                    self.add_group_hops(&hops)?;
                    let attr = ComponentRef::global_attribute(target.clone());
                    self.result.add_component(attr.clone())?;
                    self.result
                        .add_relation(Relation::Reference, holder, attr.clone())?;
                    if let Some(info) = self.ctx.catalog.attribute_info(&target) {
                        if let Some(t) = info.type_name.clone() {
                            self.result.add_relation(
                                Relation::IsOfType,
                                attr,
                                ComponentRef::global_type(t.clone()),
                            )?;
                            self.add_type_closure(&t)?;
                        }
                    }
                }
            }
        }

        if node.is_leaf() {
            return Ok(());
        }

        let Some(dynamic) = dynamic else {
            self.unmatched(
                path,
                "children under an element with no stored type (anyType content)".to_string(),
            )?;
            return Ok(());
        };
        if matches!(
            self.ctx.catalog.type_entry(&dynamic).map(|e| e.kind),
            Some(TypeKind::Simple) | Some(TypeKind::ComplexSimpleContent)
        ) || crate::builtins::is_builtin_type(&dynamic)
        {
            self.unmatched(
                path,
                format!("child elements under simple-content type `{}`", dynamic),
            )?;
            return Ok(());
        }

        let mut sibling_counts: std::collections::BTreeMap<&QualifiedName, usize> =
            std::collections::BTreeMap::new();
        for child in &node.children {
            let position = sibling_counts.entry(&child.name).or_insert(0);
            *position += 1;
            let child_path = format!("{}/{}[{}]", path, child.name.local, position);

            match self.find_element_match(&dynamic, &child.name) {
                None => {
                    self.unmatched(
                        &child_path,
                        format!("no element declaration matches `{}`", child.name),
                    )?;
                }
                Some(ElementMatch::Wildcard) => {
                    self.skip_wildcard(&child_path, "element");
                }
                Some(ElementMatch::Inner {
                    decl,
                    type_name,
                    hops,
                }) => {
                    self.add_group_hops(&hops)?;
                    let holder = decl
                        .container()
                        .expect("inner declaration has a container")
                        .clone();
                    self.result
                        .add_relation(Relation::Contains, holder, decl.clone())?;
                    let resolved = ResolvedElement {
                        decl,
                        declared_type: type_name,
                    };
                    self.visit(child, &resolved, &child_path)?;
                }
                Some(ElementMatch::Ref {
                    referenced,
                    member,
                    holder,
                    hops,
                }) => {
                    self.add_group_hops(&hops)?;
                    self.result.add_relation(
                        Relation::Reference,
                        holder,
                        ComponentRef::global_element(referenced.clone()),
                    )?;
                    if member != referenced {
                        self.add_substitution_chain(&member, &referenced, &child_path)?;
                    }
                    let declared_type = self
                        .ctx
                        .catalog
                        .element_info(&member)
                        .and_then(|info| info.type_name.clone());
                    let resolved = ResolvedElement {
                        decl: ComponentRef::global_element(member.clone()),
                        declared_type,
                    };
                    self.visit(child, &resolved, &child_path)?;
                }
            }
        }
        Ok(())
    }
}

/// True when a wildcard namespace constraint admits `ns`.
fn wildcard_matches(constraint: &str, target_namespace: &str, ns: &str) -> bool {
    match constraint {
        "##any" => true,
        "##other" => !ns.is_empty() && ns != target_namespace,
        list => list.split_whitespace().any(|token| match token {
            "##targetNamespace" => ns == target_namespace,
            "##local" => ns.is_empty(),
            uri => ns == uri,
        }),
    }
}

/// Resolves the declaration matching an instance node: against the global
/// element declarations for roots, or within the parent's dynamic type.
pub fn element_decl(
    ctx: AnalysisContext,
    node: &InstanceNode,
    parent_type: Option<&ComponentRef>,
) -> Result<ComponentRef> {
    match parent_type {
        None => match ctx.catalog.element_info(&node.name) {
            Some(_) => Ok(ComponentRef::global_element(node.name.clone())),
            None => Err(Error::Analysis {
                file: String::new(),
                path: format!("/{}", node.name.local),
                message: format!("no global element declaration matches `{}`", node.name),
            }),
        },
        Some(parent) => {
            let type_name = parent.name().ok_or_else(|| Error::Analysis {
                file: String::new(),
                path: node.name.to_string(),
                message: "parent context must be a global type".to_string(),
            })?;
            let analysis = Analysis::new(ctx, "");
            match analysis.find_element_match(type_name, &node.name) {
                Some(ElementMatch::Inner { decl, .. }) => Ok(decl),
                Some(ElementMatch::Ref { member, .. }) => {
                    Ok(ComponentRef::global_element(member))
                }
                Some(ElementMatch::Wildcard) | None => Err(Error::Analysis {
                    file: String::new(),
                    path: node.name.to_string(),
                    message: format!(
                        "no element declaration in `{}` matches `{}`",
                        type_name, node.name
                    ),
                }),
            }
        }
    }
}

/// The dynamic type of a node given its resolved declaration: `xsi:type`
/// when present (verified against the declared type), else the declared
/// type.
pub fn type_of(
    ctx: AnalysisContext,
    node: &InstanceNode,
    decl: &ComponentRef,
) -> Result<ComponentRef> {
    let analysis = Analysis::new(ctx, "");
    let declared = declared_type_of(ctx, decl)?;
    let dynamic = analysis.dynamic_type(node, &declared, &node.name.to_string())?;
    match dynamic {
        Some(t) => Ok(ComponentRef::global_type(t)),
        None => Err(Error::Analysis {
            file: String::new(),
            path: node.name.to_string(),
            message: "element has no stored type (its declared type is anyType)".to_string(),
        }),
    }
}

fn declared_type_of(ctx: AnalysisContext, decl: &ComponentRef) -> Result<Option<QualifiedName>> {
    match decl {
        ComponentRef::Global { name, .. } => Ok(ctx
            .catalog
            .element_info(name)
            .and_then(|info| info.type_name.clone())),
        ComponentRef::Inner { .. } => {
            let container = decl.container().expect("inner declaration has a container");
            let entry = ctx.source_index.get(container).ok_or_else(|| Error::Analysis {
                file: String::new(),
                path: decl.to_string(),
                message: "declaration container has no source entry".to_string(),
            })?;
            for particle in &entry.particles {
                if let ParticleTerm::InnerElement {
                    decl: d, type_name, ..
                } = &particle.term
                {
                    if d == decl {
                        return Ok(type_name.clone());
                    }
                }
            }
            for attr_use in &entry.attr_uses {
                if let AttrUseTerm::InnerAttribute {
                    decl: d, type_name, ..
                } = &attr_use.term
                {
                    if d == decl {
                        return Ok(type_name.clone());
                    }
                }
            }
            Err(Error::Analysis {
                file: String::new(),
                path: decl.to_string(),
                message: "declaration not found in its container's source entry".to_string(),
            })
        }
    }
}

/// The type or model group textually holding a declaration matched within
/// `dynamic_type`'s effective content model.
pub fn container_of(
    ctx: AnalysisContext,
    decl: &ComponentRef,
    dynamic_type: &ComponentRef,
) -> Result<ComponentRef> {
    let type_name = dynamic_type.name().ok_or_else(|| Error::Analysis {
        file: String::new(),
        path: dynamic_type.to_string(),
        message: "dynamic type must be a global type".to_string(),
    })?;
    let analysis = Analysis::new(ctx, "");
    // Walk the derivation chain looking for the component whose particle or
    // attribute list textually holds the declaration or its reference.
    let chain = analysis.type_chain(type_name);
    for ty in &chain {
        let container = ComponentRef::global_type(ty.clone());
        if let Some(holder) = find_holder(ctx, &container, decl) {
            return Ok(holder);
        }
    }
    Err(Error::Analysis {
        file: String::new(),
        path: decl.to_string(),
        message: format!("declaration is not reachable from type `{}`", type_name),
    })
}

fn find_holder(
    ctx: AnalysisContext,
    container: &ComponentRef,
    decl: &ComponentRef,
) -> Option<ComponentRef> {
    let entry = ctx.source_index.get(container)?;
    for particle in &entry.particles {
        match &particle.term {
            ParticleTerm::InnerElement { decl: d, .. } if d == decl => {
                return Some(container.clone());
            }
            ParticleTerm::ElementRef(target)
                if decl.is_global() && Some(target) == decl.name() =>
            {
                return Some(container.clone());
            }
            ParticleTerm::GroupRef(group_name) => {
                let group = ComponentRef::model_group(group_name.clone());
                if let Some(found) = find_holder(ctx, &group, decl) {
                    return Some(found);
                }
            }
            _ => {}
        }
    }
    for attr_use in &entry.attr_uses {
        match &attr_use.term {
            AttrUseTerm::InnerAttribute { decl: d, .. } if d == decl => {
                return Some(container.clone());
            }
            AttrUseTerm::AttributeRef(target)
                if decl.is_global() && Some(target) == decl.name() =>
            {
                return Some(container.clone());
            }
            AttrUseTerm::AttributeGroupRef(group_name) => {
                let group = ComponentRef::attribute_group(group_name.clone());
                if let Some(found) = find_holder(ctx, &group, decl) {
                    return Some(found);
                }
            }
            _ => {}
        }
    }
    None
}

/// The transitive derivation chain of a type, nearest base first, excluding
/// the built-in `anyType`.
pub fn ancestors(ctx: AnalysisContext, ty: &ComponentRef) -> Result<Vec<ComponentRef>> {
    let name = ty.name().ok_or_else(|| Error::Analysis {
        file: String::new(),
        path: ty.to_string(),
        message: "ancestors takes a global type".to_string(),
    })?;
    Ok(ctx
        .catalog
        .ancestors(name)
        .into_iter()
        .map(ComponentRef::global_type)
        .collect())
}

/// Computes the schema subset used by one instance fragment rooted at
/// `node`, whose resolved declaration is `decl`.
pub fn schema_subset_used_in(
    ctx: AnalysisContext,
    node: &InstanceNode,
    decl: &ComponentRef,
) -> Result<SchemaSet> {
    let mut analysis = Analysis::new(ctx, "<fragment>");
    let declared_type = declared_type_of(ctx, decl)?;
    let resolved = ResolvedElement {
        decl: decl.clone(),
        declared_type,
    };
    let path = format!("/{}", node.name.local);
    analysis.visit(node, &resolved, &path)?;
    Ok(analysis.result)
}

/// Analyzes one document: resolves the root against the global element
/// declarations and folds the recursion over the tree. Returns the
/// document's own subset plus its report.
pub fn analyze_document(
    ctx: AnalysisContext,
    root: &InstanceNode,
    file: &str,
) -> Result<(SchemaSet, FileReport)> {
    let mut analysis = Analysis::new(ctx, file);
    let path = format!("/{}", root.name.local);
    match ctx.catalog.element_info(&root.name) {
        Some(info) => {
            let resolved = ResolvedElement {
                decl: ComponentRef::global_element(root.name.clone()),
                declared_type: info.type_name.clone(),
            };
            analysis.visit(root, &resolved, &path)?;
        }
        None => {
            analysis.unmatched(
                &path,
                format!("no global element declaration matches root `{}`", root.name),
            )?;
        }
    }
    let report = FileReport {
        path: file.to_string(),
        components: analysis.result.all_components().count(),
        relations: analysis.result.relations().len(),
        warnings: analysis.warnings.iter().map(|w| w.to_string()).collect(),
        skipped_subtrees: analysis.skipped,
    };
    Ok((analysis.result, report))
}

/// The top-level subsetting loop: the union of every document's subset.
pub fn subset_schemas(
    ctx: AnalysisContext,
    corpus: &[(String, InstanceNode)],
) -> Result<(SchemaSet, AnalysisReport)> {
    let mut result = SchemaSet::empty();
    let mut report = AnalysisReport::default();
    for (file, root) in corpus {
        let (subset, file_report) = analyze_document(ctx, root, file)?;
        result = result.union(&subset)?;
        report.files.push(file_report);
    }
    Ok((result, report))
}

impl fmt::Debug for AnalysisContext<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalysisContext")
            .field("mode", &self.mode)
            .finish_non_exhaustive()
    }
}
