//! Multi-file XSD loading: imports, includes, namespaces, and construction
//! of the full schema set plus its source index and resolution catalog.

mod flatten;
mod fragment;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use crate::catalog::SchemaCatalog;
use crate::error::{Error, Result};
use crate::model::{Relation, SchemaSet};
use crate::name::{ComponentKind, ComponentRef, QualifiedName, XML_NS, XSD_NS};
use crate::source::SourceIndex;
use crate::builtins;

use flatten::{register_global, Collector, DocCtx};
use fragment::{build_fragment, ResolveCtx};

/// A non-fatal loading or analysis notice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Warning {
    pub file: Option<PathBuf>,
    pub message: String,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.file {
            Some(p) => write!(f, "{}: {}", p.display(), self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Optional namespace catalog: plain text, one `namespaceURI<TAB>path`
    /// per line, used to resolve imports before schemaLocation hints.
    pub catalog_file: Option<PathBuf>,
}

#[derive(Debug)]
pub struct LoadResult {
    pub schema: SchemaSet,
    pub source_index: SourceIndex,
    pub catalog: SchemaCatalog,
    pub warnings: Vec<Warning>,
}

/// Loads a schema set from its entry files, following imports and includes
/// on the filesystem only. Returns the complete schema set of all global
/// components and relation pairs present in the schema text.
pub fn load_schema_set(entry_files: &[PathBuf], options: &LoadOptions) -> Result<LoadResult> {
    let namespace_map = match &options.catalog_file {
        Some(path) => parse_catalog_file(path)?,
        None => BTreeMap::new(),
    };

    let mut collector = Collector::new();
    let mut loaded_files: BTreeMap<PathBuf, String> = BTreeMap::new();
    let mut namespace_prefixes: BTreeMap<PathBuf, BTreeMap<String, String>> = BTreeMap::new();

    // Queue of (file, namespace adopted from an including document).
    let mut queue: VecDeque<(PathBuf, Option<String>)> = VecDeque::new();
    let mut visited: BTreeSet<(PathBuf, String)> = BTreeSet::new();
    let mut canonical_entries = Vec::new();
    for path in entry_files {
        let canonical = canonicalize(path)?;
        canonical_entries.push(canonical.clone());
        queue.push_back((canonical, None));
    }

    while let Some((path, adopted)) = queue.pop_front() {
        let text = read_schema_text(&path)?;
        let doc = roxmltree::Document::parse(&text).map_err(|source| Error::XmlParse {
            path: path.clone(),
            source,
        })?;
        let root = doc.root_element();
        if root.tag_name().namespace() != Some(XSD_NS) || root.tag_name().name() != "schema" {
            return Err(Error::schema(
                &path,
                format!(
                    "document element is <{}>, expected an XML Schema <schema> root",
                    root.tag_name().name()
                ),
            ));
        }

        let own_tns = root.attribute("targetNamespace").map(str::to_string);
        let chameleon = own_tns.is_none() && adopted.is_some();
        let effective_tns = own_tns
            .clone()
            .or_else(|| adopted.clone())
            .unwrap_or_default();
        if !visited.insert((path.clone(), effective_tns.clone())) {
            continue;
        }
        loaded_files.insert(path.clone(), effective_tns.clone());
        let mut prefixes = BTreeMap::new();
        for ns in root.namespaces() {
            prefixes.insert(ns.name().unwrap_or("").to_string(), ns.uri().to_string());
        }
        namespace_prefixes.insert(path.clone(), prefixes);

        let resolve_ctx = ResolveCtx {
            path: &path,
            target_namespace: &effective_tns,
            chameleon,
            element_form_qualified: root.attribute("elementFormDefault") == Some("qualified"),
            attribute_form_qualified: root.attribute("attributeFormDefault") == Some("qualified"),
        };
        let doc_ctx = DocCtx {
            path: &path,
            target_namespace: &effective_tns,
        };

        for child in root.children().filter(|n| n.is_element()) {
            if child.tag_name().namespace() != Some(XSD_NS) {
                continue;
            }
            match child.tag_name().name() {
                "import" => {
                    let namespace = child.attribute("namespace").unwrap_or("");
                    let location = child.attribute("schemaLocation");
                    match resolve_import(
                        &path,
                        namespace,
                        location,
                        &namespace_map,
                        &mut collector.warnings,
                    )? {
                        Some(resolved) => queue.push_back((resolved, None)),
                        None => {}
                    }
                }
                "include" => {
                    let location = child.attribute("schemaLocation").ok_or_else(|| {
                        Error::schema(&path, "include without schemaLocation".to_string())
                    })?;
                    let resolved = resolve_location(&path, location).ok_or_else(|| {
                        Error::Unresolved {
                            path: path.clone(),
                            kind: "include",
                            target: location.to_string(),
                        }
                    })?;
                    queue.push_back((resolved, Some(effective_tns.clone())));
                }
                "redefine" | "notation" => {
                    return Err(Error::UnsupportedConstruct {
                        path: path.clone(),
                        construct: child.tag_name().name().to_string(),
                        location: format!("line {}", doc.text_pos_at(child.range().start).row),
                    });
                }
                "annotation" => {}
                "complexType" | "simpleType" | "element" | "attribute" | "group"
                | "attributeGroup" => {
                    let fragment = build_fragment(&resolve_ctx, child, true)?;
                    register_global(&mut collector, &doc_ctx, &fragment)?;
                }
                other => {
                    return Err(Error::UnsupportedConstruct {
                        path: path.clone(),
                        construct: other.to_string(),
                        location: format!("line {}", doc.text_pos_at(child.range().start).row),
                    });
                }
            }
        }
    }

    audit_references(&collector)?;
    audit_derivation_cycles(&collector.catalog)?;
    audit_substitution_cycles(&collector.catalog)?;

    let mut schema = SchemaSet::empty();
    for component in &collector.components {
        schema.add_component(component.clone())?;
    }
    for (relation, x, y) in &collector.relations {
        schema.add_relation(*relation, x.clone(), y.clone())?;
    }

    let Collector {
        mut catalog,
        mut index,
        warnings,
        ..
    } = collector;
    catalog.entry_files = canonical_entries;
    catalog.loaded_files = loaded_files;
    catalog.close_substitution_index();
    index.namespace_prefixes = namespace_prefixes;

    Ok(LoadResult {
        schema,
        source_index: index,
        catalog,
        warnings,
    })
}

fn canonicalize(path: &Path) -> Result<PathBuf> {
    fs::canonicalize(path).map_err(|source| Error::io(path, source))
}

/// Reads a schema document honoring a UTF-16 byte order mark; everything
/// else is treated as UTF-8.
fn read_schema_text(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|source| Error::io(path, source))?;
    let text = if bytes.starts_with(&[0xFF, 0xFE]) {
        decode_utf16(&bytes[2..], u16::from_le_bytes, path)?
    } else if bytes.starts_with(&[0xFE, 0xFF]) {
        decode_utf16(&bytes[2..], u16::from_be_bytes, path)?
    } else {
        String::from_utf8(bytes)
            .map_err(|_| Error::schema(path, "document is not valid UTF-8".to_string()))?
    };
    Ok(text.trim_start_matches('\u{feff}').to_string())
}

fn decode_utf16(bytes: &[u8], combine: fn([u8; 2]) -> u16, path: &Path) -> Result<String> {
    if bytes.len() % 2 != 0 {
        return Err(Error::schema(path, "truncated UTF-16 content".to_string()));
    }
    let units: Vec<u16> = bytes
        .chunks_exact(2)
        .map(|c| combine([c[0], c[1]]))
        .collect();
    String::from_utf16(&units)
        .map_err(|_| Error::schema(path, "document is not valid UTF-16".to_string()))
}

/// Resolution order for imports: catalog mapping, then schemaLocation as a
/// filesystem path. The XSD namespace needs no document; the xml namespace
/// is tolerated with a warning when no document can be found.
fn resolve_import(
    importer: &Path,
    namespace: &str,
    location: Option<&str>,
    namespace_map: &BTreeMap<String, PathBuf>,
    warnings: &mut Vec<Warning>,
) -> Result<Option<PathBuf>> {
    if let Some(mapped) = namespace_map.get(namespace) {
        return Ok(Some(canonicalize(mapped)?));
    }
    if namespace == XSD_NS {
        return Ok(None);
    }
    if let Some(location) = location {
        if let Some(resolved) = resolve_location(importer, location) {
            return Ok(Some(resolved));
        }
    }
    if namespace == XML_NS {
        warnings.push(Warning {
            file: Some(importer.to_path_buf()),
            message: "import of the xml namespace could not be resolved; xml:* attributes are passed through"
                .to_string(),
        });
        return Ok(None);
    }
    Err(Error::Unresolved {
        path: importer.to_path_buf(),
        kind: "import",
        target: if namespace.is_empty() {
            location.unwrap_or("(no namespace, no location)").to_string()
        } else {
            namespace.to_string()
        },
    })
}

/// A schemaLocation resolves only when it denotes a filesystem path; URLs
/// need a catalog entry. Relative paths are taken from the referring file.
fn resolve_location(referrer: &Path, location: &str) -> Option<PathBuf> {
    if location.contains("://") {
        return None;
    }
    let candidate = Path::new(location);
    let joined = if candidate.is_absolute() {
        candidate.to_path_buf()
    } else {
        referrer.parent().unwrap_or(Path::new(".")).join(candidate)
    };
    fs::canonicalize(&joined).ok()
}

fn parse_catalog_file(path: &Path) -> Result<BTreeMap<String, PathBuf>> {
    let text = fs::read_to_string(path).map_err(|source| Error::io(path, source))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let (ns, target) = line.split_once('\t').ok_or_else(|| {
            Error::schema(
                path,
                format!("catalog line {} is not namespaceURI<TAB>path", lineno + 1),
            )
        })?;
        let target_path = Path::new(target);
        let resolved = if target_path.is_absolute() {
            target_path.to_path_buf()
        } else {
            base.join(target_path)
        };
        map.insert(ns.to_string(), resolved);
    }
    Ok(map)
}

/// The source file a component was declared in, for error context.
fn file_of(index: &SourceIndex, component: &ComponentRef) -> PathBuf {
    let global = match component {
        ComponentRef::Inner { container, .. } => container,
        c => c,
    };
    index
        .get(global)
        .map(|e| e.source_file.clone())
        .unwrap_or_else(|| PathBuf::from("<unknown>"))
}

/// Every global name referenced by a relation intent must be declared (or a
/// built-in type). Runs after all documents are loaded.
fn audit_references(c: &Collector) -> Result<()> {
    let catalog = &c.catalog;
    let check = |kind: ComponentKind, name: &QualifiedName, from: &ComponentRef| -> Result<()> {
        let known = match kind {
            ComponentKind::Type => {
                catalog.is_declared_type(name) || builtins::is_builtin_type(name)
            }
            ComponentKind::Element => catalog.element_info(name).is_some(),
            ComponentKind::Attribute => catalog.attribute_info(name).is_some(),
            ComponentKind::ModelGroup => catalog.model_groups.contains(name),
            ComponentKind::AttributeGroup => catalog.attribute_groups.contains(name),
        };
        if known {
            Ok(())
        } else {
            Err(Error::schema(
                file_of(&c.index, from),
                format!("{} references undeclared {} `{}`", from, kind.label(), name),
            ))
        }
    };

    for (relation, x, y) in &c.relations {
        match relation {
            Relation::IsOfType | Relation::IsDerivedFrom => {
                if let Some(name) = y.name() {
                    check(ComponentKind::Type, name, x)?;
                }
            }
            Relation::Reference | Relation::IsInSubstitutionGroup => {
                if let Some(name) = y.name() {
                    check(y.kind(), name, x)?;
                }
            }
            Relation::Contains => {}
        }
    }

    for (name, entry) in &catalog.types {
        for dep in &entry.extra_type_deps {
            let from = ComponentRef::global_type(name.clone());
            check(ComponentKind::Type, dep, &from)?;
        }
    }
    Ok(())
}

fn audit_derivation_cycles(catalog: &SchemaCatalog) -> Result<()> {
    for start in catalog.derivation.keys() {
        let mut cur = start;
        let mut steps = 0;
        while let Some((base, _)) = catalog.derivation.get(cur) {
            steps += 1;
            if base == start || steps > catalog.derivation.len() {
                return Err(Error::DerivationCycle(
                    start.to_string(),
                    cur.to_string(),
                ));
            }
            cur = base;
        }
    }
    Ok(())
}

fn audit_substitution_cycles(catalog: &SchemaCatalog) -> Result<()> {
    for start in catalog.substitution_head.keys() {
        let mut cur = start;
        let mut steps = 0;
        while let Some(head) = catalog.substitution_head.get(cur) {
            steps += 1;
            if head == start || steps > catalog.substitution_head.len() {
                return Err(Error::schema(
                    PathBuf::from("<schema set>"),
                    format!("substitution group of `{}` forms a cycle", start),
                ));
            }
            cur = head;
        }
    }
    Ok(())
}
