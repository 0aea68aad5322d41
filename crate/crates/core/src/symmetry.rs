use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// The three copula symmetry structures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Symmetry {
    /// Exchangeability, `C(u, v) = C(v, u)`.
    #[serde(rename = "S")]
    Reflection,
    /// `C` equals its survival copula.
    #[serde(rename = "R")]
    Radial,
    /// Invariance under flipping either coordinate.
    #[serde(rename = "J")]
    Joint,
}

impl Symmetry {
    pub const ALL: [Symmetry; 3] = [Symmetry::Reflection, Symmetry::Radial, Symmetry::Joint];

    pub fn letter(self) -> &'static str {
        match self {
            Symmetry::Reflection => "S",
            Symmetry::Radial => "R",
            Symmetry::Joint => "J",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Symmetry::Reflection => "reflection",
            Symmetry::Radial => "radial",
            Symmetry::Joint => "joint",
        }
    }
}

impl fmt::Display for Symmetry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Symmetry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "s" | "reflection" => Ok(Symmetry::Reflection),
            "r" | "radial" => Ok(Symmetry::Radial),
            "j" | "joint" => Ok(Symmetry::Joint),
            other => Err(Error::InvalidParameter(format!("unknown symmetry '{other}'"))),
        }
    }
}
