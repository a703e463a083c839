//! The schema-set model: five component sets plus five binary relations,
//! with subset, union, relation copying and consistency checking.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{relation_signature, Error, Result};
use crate::name::{ComponentKind, ComponentRef};

/// The five binary relations between schema components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Relation {
    IsOfType,
    Reference,
    Contains,
    IsDerivedFrom,
    IsInSubstitutionGroup,
}

impl Relation {
    pub const ALL: [Relation; 5] = [
        Relation::IsOfType,
        Relation::Reference,
        Relation::Contains,
        Relation::IsDerivedFrom,
        Relation::IsInSubstitutionGroup,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Relation::IsOfType => "isOfType",
            Relation::Reference => "reference",
            Relation::Contains => "contains",
            Relation::IsDerivedFrom => "isDerivedFrom",
            Relation::IsInSubstitutionGroup => "isInSubstitutionGroup",
        }
    }
}

type Pair = (ComponentRef, ComponentRef);

/// The five relation pair sets of a schema set.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RelationStore {
    pairs: [BTreeSet<Pair>; 5],
}

impl RelationStore {
    fn idx(relation: Relation) -> usize {
        match relation {
            Relation::IsOfType => 0,
            Relation::Reference => 1,
            Relation::Contains => 2,
            Relation::IsDerivedFrom => 3,
            Relation::IsInSubstitutionGroup => 4,
        }
    }

    pub fn get(&self, relation: Relation) -> &BTreeSet<Pair> {
        &self.pairs[Self::idx(relation)]
    }

    fn get_mut(&mut self, relation: Relation) -> &mut BTreeSet<Pair> {
        &mut self.pairs[Self::idx(relation)]
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.iter().all(|p| p.is_empty())
    }

    pub fn len(&self) -> usize {
        self.pairs.iter().map(|p| p.len()).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Relation, &Pair)> {
        Relation::ALL
            .iter()
            .flat_map(move |r| self.get(*r).iter().map(move |p| (*r, p)))
    }

    /// The declared type of an element or attribute under isOfType, if any.
    pub fn type_of(&self, component: &ComponentRef) -> Option<&ComponentRef> {
        self.get(Relation::IsOfType)
            .iter()
            .find(|(l, _)| l == component)
            .map(|(_, r)| r)
    }

    /// The base type of a type under isDerivedFrom, if any.
    pub fn base_of(&self, ty: &ComponentRef) -> Option<&ComponentRef> {
        self.get(Relation::IsDerivedFrom)
            .iter()
            .find(|(l, _)| l == ty)
            .map(|(_, r)| r)
    }
}

/// A single consistency violation: the invariant that failed and the
/// offending component or pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub invariant: &'static str,
    pub offender: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.invariant, self.offender)
    }
}

/// A schema set: the sets of type, element, attribute, model group and
/// attribute group components, plus the binary relations between them.
///
/// Values are immutable from the caller's perspective once built; all
/// operations either return new sets or are only reachable during
/// construction. Safe to share read-only across threads.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SchemaSet {
    types: BTreeSet<ComponentRef>,
    elements: BTreeSet<ComponentRef>,
    attributes: BTreeSet<ComponentRef>,
    model_groups: BTreeSet<ComponentRef>,
    attribute_groups: BTreeSet<ComponentRef>,
    relations: RelationStore,
}

impl SchemaSet {
    /// The empty schema set: all component sets and relations empty.
    pub fn empty() -> Self {
        SchemaSet::default()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
            && self.elements.is_empty()
            && self.attributes.is_empty()
            && self.model_groups.is_empty()
            && self.attribute_groups.is_empty()
            && self.relations.is_empty()
    }

    pub fn types(&self) -> &BTreeSet<ComponentRef> {
        &self.types
    }

    pub fn elements(&self) -> &BTreeSet<ComponentRef> {
        &self.elements
    }

    pub fn attributes(&self) -> &BTreeSet<ComponentRef> {
        &self.attributes
    }

    pub fn model_groups(&self) -> &BTreeSet<ComponentRef> {
        &self.model_groups
    }

    pub fn attribute_groups(&self) -> &BTreeSet<ComponentRef> {
        &self.attribute_groups
    }

    pub fn relations(&self) -> &RelationStore {
        &self.relations
    }

    /// The component set matching a kind.
    pub fn components(&self, kind: ComponentKind) -> &BTreeSet<ComponentRef> {
        match kind {
            ComponentKind::Type => &self.types,
            ComponentKind::Element => &self.elements,
            ComponentKind::Attribute => &self.attributes,
            ComponentKind::ModelGroup => &self.model_groups,
            ComponentKind::AttributeGroup => &self.attribute_groups,
        }
    }

    fn components_mut(&mut self, kind: ComponentKind) -> &mut BTreeSet<ComponentRef> {
        match kind {
            ComponentKind::Type => &mut self.types,
            ComponentKind::Element => &mut self.elements,
            ComponentKind::Attribute => &mut self.attributes,
            ComponentKind::ModelGroup => &mut self.model_groups,
            ComponentKind::AttributeGroup => &mut self.attribute_groups,
        }
    }

    pub fn contains_component(&self, c: &ComponentRef) -> bool {
        self.components(c.kind()).contains(c)
    }

    /// Every component across the five sets.
    pub fn all_components(&self) -> impl Iterator<Item = &ComponentRef> {
        self.types
            .iter()
            .chain(&self.elements)
            .chain(&self.attributes)
            .chain(&self.model_groups)
            .chain(&self.attribute_groups)
    }

    /// Adds a component to the set matching its kind. Idempotent. The
    /// built-in `anyType` is rejected, it is never stored.
    pub fn add_component(&mut self, c: ComponentRef) -> Result<()> {
        if c.is_any_type() {
            return Err(Error::AnyTypeExcluded);
        }
        self.components_mut(c.kind()).insert(c);
        Ok(())
    }

    /// Adds a pair to one of the five relations, auto-adding both endpoints
    /// to their component sets so closure is preserved. Idempotent.
    ///
    /// Fails on signature violations, on a second distinct type for one
    /// element under isOfType, and on isDerivedFrom cycles.
    pub fn add_relation(&mut self, relation: Relation, x: ComponentRef, y: ComponentRef) -> Result<()> {
        check_signature(relation, &x, &y)?;
        if x.is_any_type() || y.is_any_type() {
            return Err(Error::AnyTypeExcluded);
        }
        match relation {
            Relation::IsOfType => {
                if let Some(existing) = self.relations.type_of(&x) {
                    if *existing != y {
                        return Err(Error::TypeConflict(
                            x.to_string(),
                            existing.to_string(),
                            y.to_string(),
                        ));
                    }
                }
            }
            Relation::IsDerivedFrom => {
                if let Some(existing) = self.relations.base_of(&x) {
                    if *existing != y {
                        return Err(Error::TypeConflict(
                            x.to_string(),
                            existing.to_string(),
                            y.to_string(),
                        ));
                    }
                }
                // Walking from y: reaching x means (x, y) closes a cycle.
                let mut cur = y.clone();
                loop {
                    if cur == x {
                        return Err(Error::DerivationCycle(x.to_string(), y.to_string()));
                    }
                    match self.relations.base_of(&cur) {
                        Some(b) => cur = b.clone(),
                        None => break,
                    }
                }
            }
            _ => {}
        }
        self.add_component(x.clone())?;
        self.add_component(y.clone())?;
        self.relations.get_mut(relation).insert((x, y));
        Ok(())
    }

    /// Component-wise and relation-wise set union.
    ///
    /// Fails if the operands assign different types to the same component
    /// under isOfType, or if merging isDerivedFrom would create a cycle;
    /// both signal that the operands came from different source schemas.
    pub fn union(&self, other: &SchemaSet) -> Result<SchemaSet> {
        let mut out = self.clone();
        for c in other.all_components() {
            out.add_component(c.clone())?;
        }
        for (relation, (x, y)) in other.relations.iter() {
            out.add_relation(relation, x.clone(), y.clone())?;
        }
        Ok(out)
    }

    /// True iff all five component sets and all five relations of `self`
    /// are (improper) subsets of `other`'s.
    pub fn is_subset_of(&self, other: &SchemaSet) -> bool {
        self.types.is_subset(&other.types)
            && self.elements.is_subset(&other.elements)
            && self.attributes.is_subset(&other.attributes)
            && self.model_groups.is_subset(&other.model_groups)
            && self.attribute_groups.is_subset(&other.attribute_groups)
            && Relation::ALL
                .iter()
                .all(|r| self.relations.get(*r).is_subset(other.relations.get(*r)))
    }

    /// Copies every relation pair of `source` whose both endpoints lie in
    /// `components` into `self`.
    pub fn copy_relations_from(
        &mut self,
        source: &SchemaSet,
        components: &BTreeSet<ComponentRef>,
    ) -> Result<()> {
        for (relation, (x, y)) in source.relations.iter() {
            if components.contains(x) && components.contains(y) {
                self.add_relation(relation, x.clone(), y.clone())?;
            }
        }
        Ok(())
    }

    /// Inserts a component without kind/anyType checks. Diagnostic and test
    /// use only; `consistency_check` reports what this breaks.
    pub fn insert_component_raw(&mut self, kind: ComponentKind, c: ComponentRef) {
        self.components_mut(kind).insert(c);
    }

    /// Inserts a relation pair without signature, closure, uniqueness or
    /// cycle checks. Diagnostic and test use only.
    pub fn insert_relation_raw(&mut self, relation: Relation, x: ComponentRef, y: ComponentRef) {
        self.relations.get_mut(relation).insert((x, y));
    }

    /// Checks every model invariant, returning one violation per breach.
    /// An empty result means the set is consistent.
    pub fn consistency_check(&self) -> Vec<Violation> {
        let mut out = Vec::new();

        for kind in [
            ComponentKind::Type,
            ComponentKind::Element,
            ComponentKind::Attribute,
            ComponentKind::ModelGroup,
            ComponentKind::AttributeGroup,
        ] {
            for c in self.components(kind) {
                if c.kind() != kind {
                    out.push(Violation {
                        invariant: "component stored in the set of another kind",
                        offender: c.to_string(),
                    });
                }
                if c.is_any_type() {
                    out.push(Violation {
                        invariant: "built-in anyType is never stored",
                        offender: c.to_string(),
                    });
                }
                if c.is_inner() && !matches!(c.kind(), ComponentKind::Element | ComponentKind::Attribute)
                {
                    out.push(Violation {
                        invariant: "inner scope is only legal for elements and attributes",
                        offender: c.to_string(),
                    });
                }
            }
        }

        for (relation, (x, y)) in self.relations.iter() {
            if check_signature(relation, x, y).is_err() {
                out.push(Violation {
                    invariant: "relation signature",
                    offender: format!("{} ({}, {})", relation.label(), x, y),
                });
            }
            for end in [x, y] {
                if !self.contains_component(end) {
                    out.push(Violation {
                        invariant: "closure: relation endpoint missing from its component set",
                        offender: format!("{} in {} ({}, {})", end, relation.label(), x, y),
                    });
                }
            }
        }

        for (which, relation) in [
            ("isOfType", Relation::IsOfType),
            ("isDerivedFrom", Relation::IsDerivedFrom),
        ] {
            let pairs = self.relations.get(relation);
            let mut seen: BTreeSet<&ComponentRef> = BTreeSet::new();
            for (x, _) in pairs {
                if !seen.insert(x) {
                    out.push(Violation {
                        invariant: match which {
                            "isOfType" => "isOfType is left-unique",
                            _ => "isDerivedFrom is left-unique",
                        },
                        offender: x.to_string(),
                    });
                }
            }
        }

        // Cycle check over isDerivedFrom; left-uniqueness failures already
        // reported above, so a simple chain walk with a step bound suffices.
        let derived = self.relations.get(Relation::IsDerivedFrom);
        for (x, _) in derived {
            let mut cur = x;
            let mut steps = 0;
            while let Some(b) = self.relations.base_of(cur) {
                steps += 1;
                if b == x || steps > derived.len() {
                    out.push(Violation {
                        invariant: "isDerivedFrom is acyclic",
                        offender: x.to_string(),
                    });
                    break;
                }
                cur = b;
            }
        }

        for (x, y) in self.relations.get(Relation::Contains) {
            let ok = y.is_inner() && y.container() == Some(x);
            if !ok {
                out.push(Violation {
                    invariant: "contains pairs have an inner right operand declared by the left",
                    offender: format!("contains ({}, {})", x, y),
                });
            }
        }

        for (x, y) in self.relations.get(Relation::Reference) {
            if !y.is_global() {
                out.push(Violation {
                    invariant: "reference pairs have a global right operand",
                    offender: format!("reference ({}, {})", x, y),
                });
            }
        }

        out
    }

    /// Canonical plain-text dump: one component or relation pair per line,
    /// grouped by kind and relation in fixed order, lexicographically sorted
    /// within each group. Identical sets produce byte-identical dumps.
    pub fn canonical_dump(&self) -> String {
        let mut lines = Vec::new();
        for kind in [
            ComponentKind::Type,
            ComponentKind::Element,
            ComponentKind::Attribute,
            ComponentKind::ModelGroup,
            ComponentKind::AttributeGroup,
        ] {
            let mut group: Vec<String> = self
                .components(kind)
                .iter()
                .map(|c| format!("{} {}", kind.label(), c))
                .collect();
            group.sort();
            lines.extend(group);
        }
        for relation in Relation::ALL {
            let mut group: Vec<String> = self
                .relations
                .get(relation)
                .iter()
                .map(|(x, y)| format!("{} ({}, {})", relation.label(), x, y))
                .collect();
            group.sort();
            lines.extend(group);
        }
        let mut dump = lines.join("\n");
        if !dump.is_empty() {
            dump.push('\n');
        }
        dump
    }
}

fn check_signature(relation: Relation, x: &ComponentRef, y: &ComponentRef) -> Result<()> {
    let container_kind = |c: &ComponentRef| {
        matches!(
            c.kind(),
            ComponentKind::Type | ComponentKind::ModelGroup | ComponentKind::AttributeGroup
        )
    };
    match relation {
        Relation::IsOfType => {
            if !matches!(x.kind(), ComponentKind::Element | ComponentKind::Attribute) {
                return Err(relation_signature(
                    "isOfType",
                    x,
                    y,
                    "left operand must be an element or attribute",
                ));
            }
            if y.kind() != ComponentKind::Type || !y.is_global() {
                return Err(relation_signature(
                    "isOfType",
                    x,
                    y,
                    "right operand must be a global type",
                ));
            }
        }
        Relation::Reference => {
            if !container_kind(x) || !x.is_global() {
                return Err(relation_signature(
                    "reference",
                    x,
                    y,
                    "left operand must be a global type, model group or attribute group",
                ));
            }
            if !y.is_global()
                || !matches!(
                    y.kind(),
                    ComponentKind::Element
                        | ComponentKind::Attribute
                        | ComponentKind::ModelGroup
                        | ComponentKind::AttributeGroup
                )
            {
                return Err(relation_signature(
                    "reference",
                    x,
                    y,
                    "right operand must be a global element, attribute or group",
                ));
            }
        }
        Relation::Contains => {
            if !container_kind(x) || !x.is_global() {
                return Err(relation_signature(
                    "contains",
                    x,
                    y,
                    "left operand must be a global type, model group or attribute group",
                ));
            }
            if !y.is_inner()
                || !matches!(y.kind(), ComponentKind::Element | ComponentKind::Attribute)
                || y.container() != Some(x)
            {
                return Err(relation_signature(
                    "contains",
                    x,
                    y,
                    "right operand must be an inner element or attribute of the left operand",
                ));
            }
        }
        Relation::IsDerivedFrom => {
            if x.kind() != ComponentKind::Type || y.kind() != ComponentKind::Type {
                return Err(relation_signature(
                    "isDerivedFrom",
                    x,
                    y,
                    "both operands must be types",
                ));
            }
        }
        Relation::IsInSubstitutionGroup => {
            if x.kind() != ComponentKind::Element
                || !x.is_global()
                || y.kind() != ComponentKind::Element
                || !y.is_global()
            {
                return Err(relation_signature(
                    "isInSubstitutionGroup",
                    x,
                    y,
                    "both operands must be global elements",
                ));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::name::QualifiedName;

    fn ty(name: &str) -> ComponentRef {
        ComponentRef::global_type(QualifiedName::unqualified(name))
    }

    fn elem(name: &str) -> ComponentRef {
        ComponentRef::global_element(QualifiedName::unqualified(name))
    }

    fn inner_elem(container: &ComponentRef, local: &str) -> ComponentRef {
        ComponentRef::inner_unchecked(ComponentKind::Element, container.clone(), local, 0)
    }

    /// The full schema set for the worked single-file example: three complex
    /// types, two global elements, five isOfType pairs, one derivation, one
    /// reference, three contains pairs.
    pub(crate) fn example_full_set() -> SchemaSet {
        let string = ComponentRef::global_type(QualifiedName::xsd("string"));
        let base = ty("Base");
        let child = ty("Child");
        let container_type = ty("ContainerType");
        let container = elem("Container");
        let base_elem2 = elem("baseElem2");
        let base_base_elem = inner_elem(&base, "baseElem");
        let child_chd_elem = inner_elem(&child, "chdElem");
        let container_item = inner_elem(&container_type, "item");

        let mut s = SchemaSet::empty();
        s.add_relation(Relation::IsOfType, container.clone(), container_type.clone())
            .unwrap();
        s.add_relation(Relation::IsOfType, base_elem2.clone(), string.clone())
            .unwrap();
        s.add_relation(Relation::IsOfType, base_base_elem.clone(), string.clone())
            .unwrap();
        s.add_relation(Relation::IsOfType, child_chd_elem.clone(), string.clone())
            .unwrap();
        s.add_relation(Relation::IsOfType, container_item.clone(), base.clone())
            .unwrap();
        s.add_relation(Relation::IsDerivedFrom, child.clone(), base.clone())
            .unwrap();
        s.add_relation(Relation::Reference, base.clone(), base_elem2.clone())
            .unwrap();
        s.add_relation(Relation::Contains, base.clone(), base_base_elem.clone())
            .unwrap();
        s.add_relation(Relation::Contains, child.clone(), child_chd_elem.clone())
            .unwrap();
        s.add_relation(Relation::Contains, container_type, container_item)
            .unwrap();
        s
    }

    /// The subset of the example set exercised by an instance that only uses
    /// `Container`, `item` and `baseElem`.
    pub(crate) fn example_subset() -> SchemaSet {
        let string = ComponentRef::global_type(QualifiedName::xsd("string"));
        let base = ty("Base");
        let container_type = ty("ContainerType");
        let container = elem("Container");
        let base_base_elem = inner_elem(&base, "baseElem");
        let container_item = inner_elem(&container_type, "item");

        let mut s = SchemaSet::empty();
        s.add_relation(Relation::IsOfType, container, container_type.clone())
            .unwrap();
        s.add_relation(Relation::IsOfType, base_base_elem.clone(), string)
            .unwrap();
        s.add_relation(Relation::IsOfType, container_item.clone(), base.clone())
            .unwrap();
        s.add_relation(Relation::Contains, base, base_base_elem).unwrap();
        s.add_relation(Relation::Contains, container_type, container_item)
            .unwrap();
        s
    }

    #[test]
    fn empty_set_has_no_members() {
        let s = SchemaSet::empty();
        assert!(s.is_empty());
        assert_eq!(s.types().len(), 0);
        assert_eq!(s.relations().len(), 0);
        assert_eq!(s.union(&SchemaSet::empty()).unwrap(), SchemaSet::empty());
        assert!(SchemaSet::empty().is_subset_of(&example_full_set()));
    }

    #[test]
    fn add_component_is_idempotent() {
        let mut s = SchemaSet::empty();
        s.add_component(ty("Base")).unwrap();
        s.add_component(ty("Base")).unwrap();
        assert_eq!(s.types().len(), 1);
    }

    #[test]
    fn add_component_rejects_any_type() {
        let mut s = SchemaSet::empty();
        let any = ComponentRef::global_type(QualifiedName::xsd("anyType"));
        assert!(matches!(s.add_component(any), Err(Error::AnyTypeExcluded)));
    }

    #[test]
    fn inner_element_components() {
        let container_type = ty("ContainerType");
        let item = inner_elem(&container_type, "item");
        let mut s = SchemaSet::empty();
        s.add_component(item.clone()).unwrap();
        assert!(s.elements().contains(&item));
        assert_eq!(item.to_string(), "ContainerType:item");
    }

    #[test]
    fn inner_scope_rules() {
        assert!(ComponentRef::inner(
            ComponentKind::Type,
            ty("T"),
            "x",
            0
        )
        .is_err());
        assert!(ComponentRef::inner(ComponentKind::Element, elem("e"), "x", 0).is_err());
        assert!(ComponentRef::inner(ComponentKind::Element, ty("T"), "x", 0).is_ok());
    }

    #[test]
    fn relation_auto_adds_endpoints() {
        let mut s = SchemaSet::empty();
        s.add_relation(Relation::IsDerivedFrom, ty("Child"), ty("Base"))
            .unwrap();
        assert!(s.types().contains(&ty("Child")));
        assert!(s.types().contains(&ty("Base")));
        assert_eq!(
            s.relations().get(Relation::IsDerivedFrom).len(),
            1
        );
    }

    #[test]
    fn derivation_cycle_rejected() {
        let mut s = SchemaSet::empty();
        s.add_relation(Relation::IsDerivedFrom, ty("Child"), ty("Base"))
            .unwrap();
        let err = s
            .add_relation(Relation::IsDerivedFrom, ty("Base"), ty("Child"))
            .unwrap_err();
        assert!(matches!(err, Error::DerivationCycle(..)));
    }

    #[test]
    fn is_of_type_left_unique() {
        let mut s = SchemaSet::empty();
        s.add_relation(Relation::IsOfType, elem("e"), ty("A")).unwrap();
        // Same pair again is fine.
        s.add_relation(Relation::IsOfType, elem("e"), ty("A")).unwrap();
        let err = s
            .add_relation(Relation::IsOfType, elem("e"), ty("B"))
            .unwrap_err();
        assert!(matches!(err, Error::TypeConflict(..)));
    }

    #[test]
    fn signature_violations_rejected() {
        let mut s = SchemaSet::empty();
        assert!(s
            .add_relation(Relation::IsDerivedFrom, elem("e"), ty("A"))
            .is_err());
        assert!(s.add_relation(Relation::IsOfType, ty("A"), ty("B")).is_err());
        assert!(s
            .add_relation(Relation::Reference, ty("A"), inner_elem(&ty("B"), "x"))
            .is_err());
        // contains right operand must belong to the left operand.
        assert!(s
            .add_relation(
                Relation::Contains,
                ty("A"),
                inner_elem(&ty("B"), "x")
            )
            .is_err());
        assert!(s.is_empty(), "failed adds must not leave partial state");
    }

    #[test]
    fn union_merges_and_detects_conflicts() {
        let full = example_full_set();
        let sub = example_subset();
        assert_eq!(sub.union(&SchemaSet::empty()).unwrap(), sub);
        assert_eq!(sub.union(&full).unwrap(), full);
        assert_eq!(full.union(&sub).unwrap(), full);

        let mut a = SchemaSet::empty();
        a.add_relation(Relation::IsOfType, elem("e"), ty("A")).unwrap();
        let mut b = SchemaSet::empty();
        b.add_relation(Relation::IsOfType, elem("e"), ty("B")).unwrap();
        assert!(matches!(a.union(&b), Err(Error::TypeConflict(..))));
    }

    #[test]
    fn subset_matches_worked_example() {
        let full = example_full_set();
        let sub = example_subset();
        assert!(sub.is_subset_of(&full));
        assert!(!full.is_subset_of(&sub));
        assert!(full.is_subset_of(&full));
    }

    #[test]
    fn copy_relations_both_endpoint_rule() {
        let full = example_full_set();

        // {Child, Base}: only the derivation pair has both endpoints inside.
        let mut target = SchemaSet::empty();
        let components: BTreeSet<_> = [ty("Child"), ty("Base")].into_iter().collect();
        target.copy_relations_from(&full, &components).unwrap();
        assert_eq!(target.relations().get(Relation::IsDerivedFrom).len(), 1);
        assert_eq!(target.relations().len(), 1);

        // {Base} alone: no pair has both endpoints equal to Base.
        let mut target = SchemaSet::empty();
        let components: BTreeSet<_> = [ty("Base")].into_iter().collect();
        target.copy_relations_from(&full, &components).unwrap();
        assert!(target.is_empty());

        // Empty component set copies nothing.
        let mut target = SchemaSet::empty();
        target.copy_relations_from(&full, &BTreeSet::new()).unwrap();
        assert!(target.is_empty());
    }

    #[test]
    fn consistency_of_example_and_violations() {
        assert_eq!(example_full_set().consistency_check(), vec![]);

        // isOfType pair whose type is absent from T.
        let mut s = SchemaSet::empty();
        s.insert_component_raw(ComponentKind::Element, elem("e"));
        s.insert_relation_raw(Relation::IsOfType, elem("e"), ty("Ghost"));
        let violations = s.consistency_check();
        assert_eq!(violations.len(), 1);
        assert!(violations[0].invariant.starts_with("closure"));

        // Injected derivation cycle.
        let mut s = SchemaSet::empty();
        s.insert_component_raw(ComponentKind::Type, ty("A"));
        s.insert_component_raw(ComponentKind::Type, ty("B"));
        s.insert_relation_raw(Relation::IsDerivedFrom, ty("A"), ty("B"));
        s.insert_relation_raw(Relation::IsDerivedFrom, ty("B"), ty("A"));
        let violations = s.consistency_check();
        assert!(violations
            .iter()
            .any(|v| v.invariant == "isDerivedFrom is acyclic"));
    }

    #[test]
    fn canonical_dump_is_sorted_and_stable() {
        let full = example_full_set();
        let dump = full.canonical_dump();
        assert_eq!(dump, full.clone().canonical_dump());
        let expected = "\
type Base
type Child
type ContainerType
type xs:string
element Base:baseElem
element Child:chdElem
element Container
element ContainerType:item
element baseElem2
isOfType (Base:baseElem, xs:string)
isOfType (Child:chdElem, xs:string)
isOfType (Container, ContainerType)
isOfType (ContainerType:item, Base)
isOfType (baseElem2, xs:string)
reference (Base, baseElem2)
contains (Base, Base:baseElem)
contains (Child, Child:chdElem)
contains (ContainerType, ContainerType:item)
isDerivedFrom (Child, Base)
";
        assert_eq!(dump, expected);
    }
}
