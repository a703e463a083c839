//! Per-component structure extraction: walks the owned fragment of each
//! global declaration, registers catalog entries and anonymous types,
//! flattens particles and attribute uses, and records relation intents for
//! later materialization into the schema set.

use std::path::{Path, PathBuf};

use crate::catalog::{
    AttributeInfo, DerivationMethod, ElementInfo, SchemaCatalog, TypeEntry, TypeKind,
};
use crate::error::{Error, Result};
use crate::loader::fragment::normalized_form_qualified;
use crate::loader::Warning;
use crate::model::Relation;
use crate::name::{is_ncname, ComponentKind, ComponentRef, QualifiedName, ANON_NS, XML_NS};
use crate::source::{
    AttrUse, AttrUseTerm, Compositor, Fragment, MaxOccurs, ParticleInfo, ParticleTerm, SourceEntry,
    SourceIndex,
};

pub(crate) struct DocCtx<'a> {
    pub path: &'a Path,
    pub target_namespace: &'a str,
}

pub(crate) struct Collector {
    pub catalog: SchemaCatalog,
    pub index: SourceIndex,
    pub relations: Vec<(Relation, ComponentRef, ComponentRef)>,
    pub components: Vec<ComponentRef>,
    pub warnings: Vec<Warning>,
}

impl Collector {
    pub(crate) fn new() -> Self {
        Collector {
            catalog: SchemaCatalog::default(),
            index: SourceIndex::default(),
            relations: Vec::new(),
            components: Vec::new(),
            warnings: Vec::new(),
        }
    }

    fn warn(&mut self, path: &Path, message: String) {
        self.warnings.push(Warning {
            file: Some(path.to_path_buf()),
            message,
        });
    }
}

/// Counter for synthetic names of anonymous inline types, scoped to one
/// global declaration.
struct AnonScope {
    host_local: String,
    counter: u32,
}

impl AnonScope {
    fn next_name(&mut self) -> QualifiedName {
        self.counter += 1;
        QualifiedName::new(ANON_NS, format!("{}..anon{}", self.host_local, self.counter))
    }
}

fn required_name(doc: &DocCtx, fragment: &Fragment) -> Result<QualifiedName> {
    let local = fragment.plain_attribute("name").ok_or_else(|| {
        Error::schema(
            doc.path,
            format!("global <{}> is missing its name attribute", fragment.local),
        )
    })?;
    if !is_ncname(local) {
        return Err(Error::schema(
            doc.path,
            format!("`{}` is not a valid NCName", local),
        ));
    }
    Ok(QualifiedName::new(doc.target_namespace, local))
}

fn entry(doc: &DocCtx, fragment: &Fragment) -> SourceEntry {
    SourceEntry {
        source_file: doc.path.to_path_buf(),
        target_namespace: doc.target_namespace.to_string(),
        fragment: fragment.clone(),
        particles: Vec::new(),
        attr_uses: Vec::new(),
    }
}

fn check_duplicate(
    c: &Collector,
    doc: &DocCtx,
    kind: ComponentKind,
    name: &QualifiedName,
    exists: bool,
) -> Result<()> {
    if exists {
        let comp = ComponentRef::global(kind, name.clone());
        let first = c
            .index
            .get(&comp)
            .map(|e| e.source_file.clone())
            .unwrap_or_else(|| PathBuf::from("<unknown>"));
        return Err(Error::DuplicateGlobal {
            kind,
            name: name.clone(),
            first,
            second: doc.path.to_path_buf(),
        });
    }
    Ok(())
}

/// Registers one top-level declaration of a schema document.
pub(crate) fn register_global(c: &mut Collector, doc: &DocCtx, fragment: &Fragment) -> Result<()> {
    let name = required_name(doc, fragment)?;
    let mut anon = AnonScope {
        host_local: name.local.clone(),
        counter: 0,
    };
    match fragment.local.as_str() {
        "complexType" => {
            check_duplicate(c, doc, ComponentKind::Type, &name, c.catalog.is_declared_type(&name))?;
            process_complex_type(c, doc, name, fragment, &mut anon)
        }
        "simpleType" => {
            check_duplicate(c, doc, ComponentKind::Type, &name, c.catalog.is_declared_type(&name))?;
            process_simple_type(c, doc, name, fragment, &mut anon)
        }
        "element" => {
            check_duplicate(
                c,
                doc,
                ComponentKind::Element,
                &name,
                c.catalog.element_info(&name).is_some(),
            )?;
            process_global_element(c, doc, name, fragment, &mut anon)
        }
        "attribute" => {
            check_duplicate(
                c,
                doc,
                ComponentKind::Attribute,
                &name,
                c.catalog.attribute_info(&name).is_some(),
            )?;
            process_global_attribute(c, doc, name, fragment, &mut anon)
        }
        "group" => {
            check_duplicate(
                c,
                doc,
                ComponentKind::ModelGroup,
                &name,
                c.catalog.model_groups.contains(&name),
            )?;
            process_group(c, doc, name, fragment, &mut anon)
        }
        "attributeGroup" => {
            check_duplicate(
                c,
                doc,
                ComponentKind::AttributeGroup,
                &name,
                c.catalog.attribute_groups.contains(&name),
            )?;
            process_attribute_group(c, doc, name, fragment, &mut anon)
        }
        other => Err(Error::UnsupportedConstruct {
            path: doc.path.to_path_buf(),
            construct: other.to_string(),
            location: "top level".to_string(),
        }),
    }
}

/// The declared type of an element/attribute declaration: an explicit
/// `type=`, an inline anonymous type, or none (the implicit any type).
/// A literal `xs:anyType` is treated as absent, it is never stored.
fn declared_type(
    c: &mut Collector,
    doc: &DocCtx,
    fragment: &Fragment,
    anon: &mut AnonScope,
    attributes_allowed: bool,
) -> Result<Option<QualifiedName>> {
    if let Some(q) = fragment.qname_attribute("type") {
        if q.is_xsd() && q.local == "anyType" {
            return Ok(None);
        }
        return Ok(Some(q.clone()));
    }
    for child in fragment.xsd_children() {
        match child.local.as_str() {
            "complexType" if attributes_allowed => {
                let name = anon.next_name();
                process_complex_type(c, doc, name.clone(), child, anon)?;
                return Ok(Some(name));
            }
            "simpleType" => {
                let name = anon.next_name();
                process_simple_type(c, doc, name.clone(), child, anon)?;
                return Ok(Some(name));
            }
            _ => {}
        }
    }
    Ok(None)
}

fn warn_identity_constraints(c: &mut Collector, doc: &DocCtx, fragment: &Fragment) {
    for child in fragment.xsd_children() {
        if matches!(child.local.as_str(), "key" | "keyref" | "unique") {
            c.warn(
                doc.path,
                format!(
                    "identity constraint <{}> on element `{}` is outside the relation model and passed through",
                    child.local,
                    fragment.plain_attribute("name").unwrap_or("?")
                ),
            );
        }
    }
}

fn process_global_element(
    c: &mut Collector,
    doc: &DocCtx,
    name: QualifiedName,
    fragment: &Fragment,
    anon: &mut AnonScope,
) -> Result<()> {
    let comp = ComponentRef::global_element(name.clone());
    let type_name = declared_type(c, doc, fragment, anon, true)?;
    let head = fragment.qname_attribute("substitutionGroup").cloned();
    warn_identity_constraints(c, doc, fragment);

    c.components.push(comp.clone());
    if let Some(t) = &type_name {
        c.relations.push((
            Relation::IsOfType,
            comp.clone(),
            ComponentRef::global_type(t.clone()),
        ));
    }
    if let Some(h) = &head {
        c.catalog
            .substitution_head
            .insert(name.clone(), h.clone());
        c.relations.push((
            Relation::IsInSubstitutionGroup,
            comp.clone(),
            ComponentRef::global_element(h.clone()),
        ));
    }
    c.catalog.global_elements.insert(
        name,
        ElementInfo {
            type_name,
            substitution_head: head,
            is_abstract: fragment.plain_attribute("abstract") == Some("true"),
            nillable: fragment.plain_attribute("nillable") == Some("true"),
        },
    );
    c.index.insert(comp, entry(doc, fragment));
    Ok(())
}

fn process_global_attribute(
    c: &mut Collector,
    doc: &DocCtx,
    name: QualifiedName,
    fragment: &Fragment,
    anon: &mut AnonScope,
) -> Result<()> {
    let comp = ComponentRef::global_attribute(name.clone());
    let type_name = declared_type(c, doc, fragment, anon, false)?;
    c.components.push(comp.clone());
    if let Some(t) = &type_name {
        c.relations.push((
            Relation::IsOfType,
            comp.clone(),
            ComponentRef::global_type(t.clone()),
        ));
    }
    c.catalog
        .global_attributes
        .insert(name, AttributeInfo { type_name });
    c.index.insert(comp, entry(doc, fragment));
    Ok(())
}

fn process_simple_type(
    c: &mut Collector,
    doc: &DocCtx,
    name: QualifiedName,
    fragment: &Fragment,
    anon: &mut AnonScope,
) -> Result<()> {
    let comp = ComponentRef::global_type(name.clone());
    let mut extra_deps = Vec::new();

    for child in fragment.xsd_children() {
        match child.local.as_str() {
            "restriction" => {
                let base = if let Some(b) = child.qname_attribute("base") {
                    Some(b.clone())
                } else {
                    // Anonymous base: <restriction><simpleType>...
                    let mut base = None;
                    for inner in child.xsd_children() {
                        if inner.local == "simpleType" {
                            let anon_name = anon.next_name();
                            process_simple_type(c, doc, anon_name.clone(), inner, anon)?;
                            base = Some(anon_name);
                            break;
                        }
                    }
                    base
                };
                if let Some(base) = base {
                    if !(base.is_xsd() && base.local == "anyType") {
                        c.catalog
                            .derivation
                            .insert(name.clone(), (base.clone(), DerivationMethod::Restriction));
                        c.relations.push((
                            Relation::IsDerivedFrom,
                            comp.clone(),
                            ComponentRef::global_type(base),
                        ));
                    }
                }
            }
            "list" => {
                if let Some(item) = child.qname_attribute("itemType") {
                    extra_deps.push(item.clone());
                } else {
                    for inner in child.xsd_children() {
                        if inner.local == "simpleType" {
                            let anon_name = anon.next_name();
                            process_simple_type(c, doc, anon_name.clone(), inner, anon)?;
                            extra_deps.push(anon_name);
                            break;
                        }
                    }
                }
            }
            "union" => {
                if let Some(crate::source::FragmentValue::QNameList(members)) =
                    child.attribute("memberTypes")
                {
                    extra_deps.extend(members.iter().cloned());
                }
                for inner in child.xsd_children() {
                    if inner.local == "simpleType" {
                        let anon_name = anon.next_name();
                        process_simple_type(c, doc, anon_name.clone(), inner, anon)?;
                        extra_deps.push(anon_name);
                    }
                }
            }
            "annotation" => {}
            _ => {}
        }
    }

    c.components.push(comp.clone());
    c.catalog.types.insert(
        name,
        TypeEntry {
            kind: TypeKind::Simple,
            extra_type_deps: extra_deps,
        },
    );
    c.index.insert(comp, entry(doc, fragment));
    Ok(())
}

fn process_complex_type(
    c: &mut Collector,
    doc: &DocCtx,
    name: QualifiedName,
    fragment: &Fragment,
    anon: &mut AnonScope,
) -> Result<()> {
    let comp = ComponentRef::global_type(name.clone());
    let mut particles = Vec::new();
    let mut attr_uses = Vec::new();
    let mut kind = TypeKind::Complex;

    // The element holding the content model and attribute uses: the type
    // itself, or the extension/restriction inside its content wrapper.
    let mut content_holder = fragment;
    for child in fragment.xsd_children() {
        match child.local.as_str() {
            "simpleContent" | "complexContent" => {
                if child.local == "simpleContent" {
                    kind = TypeKind::ComplexSimpleContent;
                }
                for derivation in child.xsd_children() {
                    let method = match derivation.local.as_str() {
                        "extension" => DerivationMethod::Extension,
                        "restriction" => DerivationMethod::Restriction,
                        "annotation" => continue,
                        other => {
                            return Err(Error::UnsupportedConstruct {
                                path: doc.path.to_path_buf(),
                                construct: other.to_string(),
                                location: format!("content of type {}", name),
                            })
                        }
                    };
                    let base = derivation.qname_attribute("base").ok_or_else(|| {
                        Error::schema(
                            doc.path,
                            format!("derivation in type {} is missing its base", name),
                        )
                    })?;
                    if !(base.is_xsd() && base.local == "anyType") {
                        c.catalog
                            .derivation
                            .insert(name.clone(), (base.clone(), method));
                        c.relations.push((
                            Relation::IsDerivedFrom,
                            comp.clone(),
                            ComponentRef::global_type(base.clone()),
                        ));
                    }
                    content_holder = derivation;
                }
            }
            _ => {}
        }
    }

    for child in content_holder.xsd_children() {
        match child.local.as_str() {
            "sequence" | "choice" | "all" => {
                let compositor = match child.local.as_str() {
                    "choice" => Compositor::Choice,
                    "all" => Compositor::All,
                    _ => Compositor::Sequence,
                };
                flatten_particles(c, doc, &comp, child, compositor, &mut particles, anon)?;
            }
            "group" => {
                particle_group_ref(c, doc, &comp, child, Compositor::Sequence, &mut particles)?;
            }
            "attribute" | "attributeGroup" | "anyAttribute" => {
                flatten_attr_use(c, doc, &comp, child, &mut attr_uses, anon)?;
            }
            "annotation" => {}
            "simpleContent" | "complexContent" => {} // handled above
            other => {
                return Err(Error::UnsupportedConstruct {
                    path: doc.path.to_path_buf(),
                    construct: other.to_string(),
                    location: format!("content of type {}", name),
                })
            }
        }
    }

    c.components.push(comp.clone());
    c.catalog.types.insert(
        name,
        TypeEntry {
            kind,
            extra_type_deps: Vec::new(),
        },
    );
    let mut e = entry(doc, fragment);
    e.particles = particles;
    e.attr_uses = attr_uses;
    c.index.insert(comp, e);
    Ok(())
}

fn process_group(
    c: &mut Collector,
    doc: &DocCtx,
    name: QualifiedName,
    fragment: &Fragment,
    anon: &mut AnonScope,
) -> Result<()> {
    let comp = ComponentRef::model_group(name.clone());
    let mut particles = Vec::new();
    for child in fragment.xsd_children() {
        match child.local.as_str() {
            "sequence" | "choice" | "all" => {
                let compositor = match child.local.as_str() {
                    "choice" => Compositor::Choice,
                    "all" => Compositor::All,
                    _ => Compositor::Sequence,
                };
                flatten_particles(c, doc, &comp, child, compositor, &mut particles, anon)?;
            }
            "annotation" => {}
            other => {
                return Err(Error::UnsupportedConstruct {
                    path: doc.path.to_path_buf(),
                    construct: other.to_string(),
                    location: format!("model group {}", name),
                })
            }
        }
    }
    c.components.push(comp.clone());
    c.catalog.model_groups.insert(name);
    let mut e = entry(doc, fragment);
    e.particles = particles;
    c.index.insert(comp, e);
    Ok(())
}

fn process_attribute_group(
    c: &mut Collector,
    doc: &DocCtx,
    name: QualifiedName,
    fragment: &Fragment,
    anon: &mut AnonScope,
) -> Result<()> {
    let comp = ComponentRef::attribute_group(name.clone());
    let mut attr_uses = Vec::new();
    for child in fragment.xsd_children() {
        match child.local.as_str() {
            "attribute" | "attributeGroup" | "anyAttribute" => {
                flatten_attr_use(c, doc, &comp, child, &mut attr_uses, anon)?;
            }
            "annotation" => {}
            other => {
                return Err(Error::UnsupportedConstruct {
                    path: doc.path.to_path_buf(),
                    construct: other.to_string(),
                    location: format!("attribute group {}", name),
                })
            }
        }
    }
    c.components.push(comp.clone());
    c.catalog.attribute_groups.insert(name);
    let mut e = entry(doc, fragment);
    e.attr_uses = attr_uses;
    c.index.insert(comp, e);
    Ok(())
}

fn occurs(doc: &DocCtx, fragment: &Fragment) -> Result<(u32, MaxOccurs)> {
    let min = match fragment.plain_attribute("minOccurs") {
        Some(v) => v.parse::<u32>().map_err(|_| {
            Error::schema(doc.path, format!("invalid minOccurs value `{}`", v))
        })?,
        None => 1,
    };
    let max = match fragment.plain_attribute("maxOccurs") {
        Some("unbounded") => MaxOccurs::Unbounded,
        Some(v) => MaxOccurs::Bounded(v.parse::<u32>().map_err(|_| {
            Error::schema(doc.path, format!("invalid maxOccurs value `{}`", v))
        })?),
        None => MaxOccurs::Bounded(1),
    };
    Ok((min, max))
}

fn particle_group_ref(
    c: &mut Collector,
    doc: &DocCtx,
    container: &ComponentRef,
    fragment: &Fragment,
    compositor: Compositor,
    out: &mut Vec<ParticleInfo>,
) -> Result<()> {
    let target = fragment.qname_attribute("ref").ok_or_else(|| {
        Error::schema(doc.path, "group use without ref in a content model".to_string())
    })?;
    let (min_occurs, max_occurs) = occurs(doc, fragment)?;
    c.relations.push((
        Relation::Reference,
        container.clone(),
        ComponentRef::model_group(target.clone()),
    ));
    out.push(ParticleInfo {
        term: ParticleTerm::GroupRef(target.clone()),
        min_occurs,
        max_occurs,
        compositor,
    });
    Ok(())
}

fn flatten_particles(
    c: &mut Collector,
    doc: &DocCtx,
    container: &ComponentRef,
    compositor_fragment: &Fragment,
    compositor: Compositor,
    out: &mut Vec<ParticleInfo>,
    anon: &mut AnonScope,
) -> Result<()> {
    for child in compositor_fragment.xsd_children() {
        match child.local.as_str() {
            "element" => {
                let (min_occurs, max_occurs) = occurs(doc, child)?;
                if let Some(target) = child.qname_attribute("ref") {
                    c.relations.push((
                        Relation::Reference,
                        container.clone(),
                        ComponentRef::global_element(target.clone()),
                    ));
                    out.push(ParticleInfo {
                        term: ParticleTerm::ElementRef(target.clone()),
                        min_occurs,
                        max_occurs,
                        compositor,
                    });
                    continue;
                }
                let local = child.plain_attribute("name").ok_or_else(|| {
                    Error::schema(doc.path, "element particle without name or ref".to_string())
                })?;
                warn_identity_constraints(c, doc, child);
                let ordinal = out
                    .iter()
                    .filter(|p| matches!(&p.term, ParticleTerm::InnerElement { local: l, .. } if l == local))
                    .count() as u32;
                let decl = ComponentRef::inner_unchecked(
                    ComponentKind::Element,
                    container.clone(),
                    local,
                    ordinal,
                );
                let type_name = declared_type(c, doc, child, anon, true)?;
                c.components.push(decl.clone());
                c.relations
                    .push((Relation::Contains, container.clone(), decl.clone()));
                if let Some(t) = &type_name {
                    c.relations.push((
                        Relation::IsOfType,
                        decl.clone(),
                        ComponentRef::global_type(t.clone()),
                    ));
                }
                let instance_namespace = if normalized_form_qualified(child) {
                    doc.target_namespace.to_string()
                } else {
                    String::new()
                };
                out.push(ParticleInfo {
                    term: ParticleTerm::InnerElement {
                        decl,
                        instance_namespace,
                        local: local.to_string(),
                        type_name,
                        nillable: child.plain_attribute("nillable") == Some("true"),
                    },
                    min_occurs,
                    max_occurs,
                    compositor,
                });
            }
            "sequence" | "choice" | "all" => {
                let inner = match child.local.as_str() {
                    "choice" => Compositor::Choice,
                    "all" => Compositor::All,
                    _ => Compositor::Sequence,
                };
                flatten_particles(c, doc, container, child, inner, out, anon)?;
            }
            "group" => {
                particle_group_ref(c, doc, container, child, compositor, out)?;
            }
            "any" => {
                let (min_occurs, max_occurs) = occurs(doc, child)?;
                let constraint = child
                    .plain_attribute("namespace")
                    .unwrap_or("##any")
                    .to_string();
                c.warn(
                    doc.path,
                    format!(
                        "wildcard <any namespace=\"{}\"> in {} is outside the relation model; matching instance nodes will be skipped",
                        constraint, container
                    ),
                );
                out.push(ParticleInfo {
                    term: ParticleTerm::Wildcard(constraint),
                    min_occurs,
                    max_occurs,
                    compositor,
                });
            }
            "annotation" => {}
            other => {
                return Err(Error::UnsupportedConstruct {
                    path: doc.path.to_path_buf(),
                    construct: other.to_string(),
                    location: format!("content model of {}", container),
                })
            }
        }
    }
    Ok(())
}

fn flatten_attr_use(
    c: &mut Collector,
    doc: &DocCtx,
    container: &ComponentRef,
    child: &Fragment,
    out: &mut Vec<AttrUse>,
    anon: &mut AnonScope,
) -> Result<()> {
    match child.local.as_str() {
        "attribute" => {
            let use_value = child.plain_attribute("use").unwrap_or("optional");
            if use_value == "prohibited" {
                let (namespace, local) = if let Some(target) = child.qname_attribute("ref") {
                    (target.namespace.clone(), target.local.clone())
                } else if let Some(local) = child.plain_attribute("name") {
                    let ns = if normalized_form_qualified(child) {
                        doc.target_namespace.to_string()
                    } else {
                        String::new()
                    };
                    (ns, local.to_string())
                } else {
                    return Err(Error::schema(
                        doc.path,
                        "prohibited attribute use without name or ref".to_string(),
                    ));
                };
                out.push(AttrUse {
                    term: AttrUseTerm::Prohibited { namespace, local },
                    required: false,
                });
                return Ok(());
            }
            let required = use_value == "required";
            if let Some(target) = child.qname_attribute("ref") {
                if target.namespace == XML_NS {
                    c.warn(
                        doc.path,
                        format!(
                            "reference to xml-namespace attribute `{}` in {} is passed through without modeling",
                            target.local, container
                        ),
                    );
                    return Ok(());
                }
                c.relations.push((
                    Relation::Reference,
                    container.clone(),
                    ComponentRef::global_attribute(target.clone()),
                ));
                out.push(AttrUse {
                    term: AttrUseTerm::AttributeRef(target.clone()),
                    required,
                });
                return Ok(());
            }
            let local = child.plain_attribute("name").ok_or_else(|| {
                Error::schema(doc.path, "attribute use without name or ref".to_string())
            })?;
            let ordinal = out
                .iter()
                .filter(|u| matches!(&u.term, AttrUseTerm::InnerAttribute { local: l, .. } if l == local))
                .count() as u32;
            let decl = ComponentRef::inner_unchecked(
                ComponentKind::Attribute,
                container.clone(),
                local,
                ordinal,
            );
            let type_name = declared_type(c, doc, child, anon, false)?;
            c.components.push(decl.clone());
            c.relations
                .push((Relation::Contains, container.clone(), decl.clone()));
            if let Some(t) = &type_name {
                c.relations.push((
                    Relation::IsOfType,
                    decl.clone(),
                    ComponentRef::global_type(t.clone()),
                ));
            }
            let instance_namespace = if normalized_form_qualified(child) {
                doc.target_namespace.to_string()
            } else {
                String::new()
            };
            out.push(AttrUse {
                term: AttrUseTerm::InnerAttribute {
                    decl,
                    instance_namespace,
                    local: local.to_string(),
                    type_name,
                },
                required,
            });
        }
        "attributeGroup" => {
            let target = child.qname_attribute("ref").ok_or_else(|| {
                Error::schema(
                    doc.path,
                    "attributeGroup use without ref in a content model".to_string(),
                )
            })?;
            c.relations.push((
                Relation::Reference,
                container.clone(),
                ComponentRef::attribute_group(target.clone()),
            ));
            out.push(AttrUse {
                term: AttrUseTerm::AttributeGroupRef(target.clone()),
                required: false,
            });
        }
        "anyAttribute" => {
            let constraint = child
                .plain_attribute("namespace")
                .unwrap_or("##any")
                .to_string();
            c.warn(
                doc.path,
                format!(
                    "wildcard <anyAttribute namespace=\"{}\"> in {} is outside the relation model; matching instance attributes will be skipped",
                    constraint, container
                ),
            );
            out.push(AttrUse {
                term: AttrUseTerm::AnyAttribute(constraint),
                required: false,
            });
        }
        _ => unreachable!("flatten_attr_use called on {}", child.local),
    }
    Ok(())
}
