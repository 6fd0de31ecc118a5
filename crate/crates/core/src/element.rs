//! Canonical element encodings for the supported poset families.

use serde::{Serialize, Serializer};
use std::fmt;

/// Canonical identifier of a poset element.
///
/// Two payloads represent the same element iff they are byte-identical after
/// normalization. Lattice, cone and columnar elements are integer vectors
/// (cone elements are stored directly in the ambient group, which is already
/// a normal form for abelian presentations); tree elements are words over the
/// alphabet; custom-DAG elements are node labels.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ElementId {
    Coords(Vec<i64>),
    Word(String),
    Node(String),
}

impl ElementId {
    pub fn coords(v: impl Into<Vec<i64>>) -> Self {
        ElementId::Coords(v.into())
    }

    pub fn word(w: impl Into<String>) -> Self {
        ElementId::Word(w.into())
    }

    pub fn node(n: impl Into<String>) -> Self {
        ElementId::Node(n.into())
    }

    pub fn as_coords(&self) -> Option<&[i64]> {
        match self {
            ElementId::Coords(v) => Some(v),
            _ => None,
        }
    }

    /// Stable byte encoding, used for element-keyed seeding.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        match self {
            ElementId::Coords(v) => {
                out.push(0u8);
                for c in v {
                    out.extend_from_slice(&c.to_le_bytes());
                }
            }
            ElementId::Word(w) => {
                out.push(1u8);
                out.extend_from_slice(w.as_bytes());
            }
            ElementId::Node(n) => {
                out.push(2u8);
                out.extend_from_slice(n.as_bytes());
            }
        }
        out
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementId::Coords(v) => {
                write!(f, "(")?;
                for (i, c) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, ")")
            }
            ElementId::Word(w) => {
                if w.is_empty() {
                    write!(f, "\u{3b5}") // ε, the empty word
                } else {
                    write!(f, "{w}")
                }
            }
            ElementId::Node(n) => write!(f, "{n}"),
        }
    }
}

impl Serialize for ElementId {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ElementId::Coords(v) => v.serialize(serializer),
            ElementId::Word(w) => w.serialize(serializer),
            ElementId::Node(n) => n.serialize(serializer),
        }
    }
}

/// FNV-1a over the canonical byte encoding. Stable across runs and
/// platforms, unlike the std hasher.
pub fn stable_hash(id: &ElementId) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in id.canonical_bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}
