//! Category tables.
//!
//! A class table is an ordered list of unique category names; indices
//! are stable and a content hash versions the table in output headers
//! so files produced against different tables cannot be mixed silently.
//! The 37-category FAIR1M table ships built in, but any table can be
//! loaded from a text file with one name per line.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// The 37 FAIR1M category names, in submission order.
pub const FAIR1M_CLASSES: [&str; 37] = [
    "Boeing737",
    "Boeing777",
    "Boeing747",
    "Boeing787",
    "A320",
    "A220",
    "A330",
    "A350",
    "C919",
    "ARJ21",
    "other-airplane",
    "passenger-ship",
    "motorboat",
    "fishing-boat",
    "tugboat",
    "engineering-ship",
    "liquid-cargo-ship",
    "dry-cargo-ship",
    "warship",
    "other-ship",
    "small-car",
    "bus",
    "cargo-truck",
    "dump-truck",
    "van",
    "trailer",
    "tractor",
    "truck-tractor",
    "excavator",
    "other-vehicle",
    "baseball-field",
    "basketball-court",
    "football-field",
    "tennis-court",
    "roundabout",
    "intersection",
    "bridge",
];

/// An ordered, unique list of category names.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassTable {
    names: Vec<String>,
}

impl ClassTable {
    pub fn new(names: Vec<String>) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::ClassTable("class table is empty".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for name in &names {
            if name.is_empty() || name.split_whitespace().count() != 1 {
                return Err(Error::ClassTable(format!(
                    "class name '{name}' must be a single non-empty token"
                )));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::ClassTable(format!("duplicate class name '{name}'")));
            }
        }
        Ok(ClassTable { names })
    }

    /// The built-in 37-class FAIR1M table.
    pub fn fair1m() -> Self {
        ClassTable {
            names: FAIR1M_CLASSES.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Load a table from a text file, one name per line. Blank lines and
    /// `#` comments are skipped.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        let names: Vec<String> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_string)
            .collect();
        ClassTable::new(names)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, class_id: usize) -> Result<&str> {
        self.names
            .get(class_id)
            .map(String::as_str)
            .ok_or_else(|| {
                Error::ClassTable(format!(
                    "class id {class_id} out of range ({} classes)",
                    self.names.len()
                ))
            })
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// FNV-1a hash of the joined names; stable across runs, used to
    /// version the table in file headers.
    pub fn version_hash(&self) -> u64 {
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        for name in &self.names {
            for b in name.bytes().chain(std::iter::once(b'\n')) {
                hash ^= b as u64;
                hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
        hash
    }

    /// Header comment line recording class count and table version.
    pub fn header_line(&self) -> String {
        format!("# class-table {} classes, version {:016x}", self.len(), self.version_hash())
    }
}
