//! The built-in XML Schema datatypes and their derivation hierarchy.
//!
//! Built-in simple types are modeled as ordinary members of a schema set's
//! type set with no outgoing relations; the hierarchy here exists only to
//! answer `xsi:type` derivation checks. `anyType` is recognized but never
//! stored in a schema set.

use crate::name::{QualifiedName, XSD_NS};

/// Pairs of (type name, base type name) for every built-in XSD 1.0 datatype.
/// `anyType` is the root; list types (`IDREFS`, ...) hang off `anySimpleType`.
const HIERARCHY: &[(&str, &str)] = &[
    ("anySimpleType", "anyType"),
    ("string", "anySimpleType"),
    ("boolean", "anySimpleType"),
    ("decimal", "anySimpleType"),
    ("float", "anySimpleType"),
    ("double", "anySimpleType"),
    ("duration", "anySimpleType"),
    ("dateTime", "anySimpleType"),
    ("time", "anySimpleType"),
    ("date", "anySimpleType"),
    ("gYearMonth", "anySimpleType"),
    ("gYear", "anySimpleType"),
    ("gMonthDay", "anySimpleType"),
    ("gDay", "anySimpleType"),
    ("gMonth", "anySimpleType"),
    ("hexBinary", "anySimpleType"),
    ("base64Binary", "anySimpleType"),
    ("anyURI", "anySimpleType"),
    ("QName", "anySimpleType"),
    ("NOTATION", "anySimpleType"),
    ("normalizedString", "string"),
    ("token", "normalizedString"),
    ("language", "token"),
    ("NMTOKEN", "token"),
    ("NMTOKENS", "anySimpleType"),
    ("Name", "token"),
    ("NCName", "Name"),
    ("ID", "NCName"),
    ("IDREF", "NCName"),
    ("IDREFS", "anySimpleType"),
    ("ENTITY", "NCName"),
    ("ENTITIES", "anySimpleType"),
    ("integer", "decimal"),
    ("nonPositiveInteger", "integer"),
    ("negativeInteger", "nonPositiveInteger"),
    ("long", "integer"),
    ("int", "long"),
    ("short", "int"),
    ("byte", "short"),
    ("nonNegativeInteger", "integer"),
    ("unsignedLong", "nonNegativeInteger"),
    ("unsignedInt", "unsignedLong"),
    ("unsignedShort", "unsignedInt"),
    ("unsignedByte", "unsignedShort"),
    ("positiveInteger", "nonNegativeInteger"),
];

/// True for any built-in type name in the XSD namespace, including `anyType`.
pub fn is_builtin_type(name: &QualifiedName) -> bool {
    name.namespace == XSD_NS
        && (name.local == "anyType" || HIERARCHY.iter().any(|(t, _)| *t == name.local))
}

/// The base of a built-in type, or `None` for `anyType` and unknown names.
pub fn builtin_base(name: &QualifiedName) -> Option<QualifiedName> {
    if name.namespace != XSD_NS {
        return None;
    }
    HIERARCHY
        .iter()
        .find(|(t, _)| *t == name.local)
        .map(|(_, b)| QualifiedName::xsd(*b))
}

/// True when `derived` equals `base` or transitively derives from it within
/// the built-in hierarchy. Everything derives from `anyType`.
pub fn builtin_derives_from(derived: &QualifiedName, base: &QualifiedName) -> bool {
    if !is_builtin_type(derived) || !is_builtin_type(base) {
        return false;
    }
    if base.local == "anyType" {
        return true;
    }
    let mut cur = derived.clone();
    loop {
        if cur == *base {
            return true;
        }
        match builtin_base(&cur) {
            Some(b) => cur = b,
            None => return false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_builtins() {
        assert!(is_builtin_type(&QualifiedName::xsd("string")));
        assert!(is_builtin_type(&QualifiedName::xsd("anyType")));
        assert!(!is_builtin_type(&QualifiedName::xsd("bogus")));
        assert!(!is_builtin_type(&QualifiedName::unqualified("string")));
    }

    #[test]
    fn derivation_chains() {
        let id = QualifiedName::xsd("ID");
        assert!(builtin_derives_from(&id, &QualifiedName::xsd("string")));
        assert!(builtin_derives_from(&id, &QualifiedName::xsd("anyType")));
        assert!(!builtin_derives_from(
            &QualifiedName::xsd("string"),
            &QualifiedName::xsd("ID")
        ));
        assert!(builtin_derives_from(
            &QualifiedName::xsd("unsignedByte"),
            &QualifiedName::xsd("decimal")
        ));
    }
}
