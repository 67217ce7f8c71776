use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The three verdicts. Indices are fixed: NE = 0, OT = 1, UT = 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassLabel {
    /// No error.
    #[serde(rename = "NE")]
    Ne,
    /// Over-translation: the target says more than the source.
    #[serde(rename = "OT")]
    Ot,
    /// Under-translation: the target says less than the source.
    #[serde(rename = "UT")]
    Ut,
}

impl ClassLabel {
    pub const ALL: [ClassLabel; 3] = [ClassLabel::Ne, ClassLabel::Ot, ClassLabel::Ut];
    pub const COUNT: usize = 3;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::Ne => "NE",
            ClassLabel::Ot => "OT",
            ClassLabel::Ut => "UT",
        }
    }

    pub fn is_error(self) -> bool {
        self != ClassLabel::Ne
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "NE" => Ok(ClassLabel::Ne),
            "OT" => Ok(ClassLabel::Ot),
            "UT" => Ok(ClassLabel::Ut),
            other => Err(format!("unknown label {other:?} (expected NE, OT or UT)")),
        }
    }
}
