//! Loading identity catalogues from JSON.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::expr::{parse_specs, ExprJson, Scope};
use super::{Identity, Kind};
use crate::arg::ArgJson;
use crate::error::{Error, Result};
use crate::exponent::{parse_rational, rat_int};

const BUILTIN_SPECS: &str = include_str!("../../catalogue/specs.json");
const BUILTIN_IDENTITIES: &str = include_str!("../../catalogue/identities.json");

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentityFile {
    pub name: String,
    #[serde(default)]
    pub location: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub tex: String,
    #[serde(default = "default_kind")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<String>,
    pub lhs: ExprJson,
    pub rhs: ExprJson,
    /// Argument of a shift law.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<ArgJson>,
    /// Parameter count and box of a family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<[i64; 2]>,
    #[serde(default)]
    pub mutant: bool,
}

fn default_kind() -> String {
    "series".into()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogueFile {
    #[serde(default = "default_version")]
    pub version: u32,
    #[serde(default)]
    pub defs: BTreeMap<String, ExprJson>,
    pub identities: Vec<IdentityFile>,
}

fn default_version() -> u32 {
    1
}

#[derive(Clone, Debug, Default)]
pub struct Catalogue {
    pub identities: Vec<Identity>,
}

impl Catalogue {
    /// Parses a specs map (`name -> spec`) and an identity file.
    pub fn from_json(specs: &str, identities: &str) -> Result<Catalogue> {
        let spec_value: serde_json::Value = serde_json::from_str(specs).map_err(|e| Error::Parse(e.to_string()))?;
        let file: CatalogueFile = serde_json::from_str(identities).map_err(|e| Error::Parse(e.to_string()))?;
        if file.version != 1 {
            return Err(Error::Parse(format!("unsupported catalogue version {}", file.version)));
        }
        let scope = Scope {
            specs: parse_specs(&spec_value)?,
            defs: file.defs.iter().map(|(k, v)| (k.clone(), v)).collect(),
        };
        let mut identities = Vec::with_capacity(file.identities.len());
        for entry in &file.identities {
            let id = build(entry, &scope).map_err(|e| Error::Parse(format!("identity `{}`: {e}", entry.name)))?;
            if identities.iter().any(|x: &Identity| x.name == id.name) {
                return Err(Error::Parse(format!("duplicate identity `{}`", id.name)));
            }
            identities.push(id);
        }
        Ok(Catalogue { identities })
    }

    pub fn get(&self, name: &str) -> Result<&Identity> {
        self.identities
            .iter()
            .find(|i| i.name == name)
            .ok_or_else(|| Error::UnknownIdentity(name.to_string()))
    }

    /// Entries verified by `--all` (mutants excluded).
    pub fn genuine(&self) -> impl Iterator<Item = &Identity> {
        self.identities.iter().filter(|i| !i.mutant)
    }

    pub fn names(&self) -> Vec<&str> {
        self.identities.iter().map(|i| i.name.as_str()).collect()
    }
}

fn build(entry: &IdentityFile, scope: &Scope<'_>) -> Result<Identity> {
    let kind = match entry.kind.as_str() {
        "series" => Kind::Series,
        "shift" => Kind::Shift(
            entry
                .shift
                .as_ref()
                .ok_or_else(|| Error::Parse("shift identity without `shift`".into()))?
                .parse()?,
        ),
        "family" => {
            let [lo, hi] = entry.range.unwrap_or([-3, 3]);
            if lo > hi {
                return Err(Error::Parse("empty parameter range".into()));
            }
            Kind::Family {
                rank: entry.rank.unwrap_or(1),
                lo,
                hi,
            }
        }
        other => return Err(Error::Parse(format!("unknown kind `{other}`"))),
    };
    let default_order = match &entry.order {
        Some(t) => parse_rational(t)?,
        None => rat_int(6),
    };
    Ok(Identity {
        name: entry.name.clone(),
        location: entry.location.clone(),
        description: entry.description.clone(),
        tex: entry.tex.clone(),
        kind,
        default_order,
        lhs: entry.lhs.resolve(scope)?,
        rhs: entry.rhs.resolve(scope)?,
        mutant: entry.mutant,
    })
}

/// The catalogue compiled into the library.
pub fn builtin_catalogue() -> Result<Catalogue> {
    Catalogue::from_json(BUILTIN_SPECS, BUILTIN_IDENTITIES)
}
