//! TOML run configuration and its merge with command-line flags.
//!
//! Flags beat the file, the file beats defaults. Capacities start at the
//! template defaults (1 on single edges, 2 on merged edges); `[capacities]`
//! entries and repeated `--cap` flags override individual edges, keyed by
//! edge label ("1" through "7", "1+2", "6+7"). Rationals are written as
//! integers or as strings like "3/2".

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use butterflow::gfq::FieldSpec;
use butterflow::netgraph::{Capacity, EdgeLabel, TemplateCaps, Variant};
use butterflow::rational::{parse_rational, Rational};
use butterflow::regions::RatePair;
use butterflow::Error;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum RationalValue {
    Int(i64),
    Text(String),
}

impl RationalValue {
    fn parse(&self, key: &str) -> Result<Rational, Error> {
        match self {
            RationalValue::Int(i) => Ok(Rational::from_integer(*i as i128)),
            RationalValue::Text(s) => parse_rational(s)
                .map_err(|e| Error::InvalidConfig(format!("{key}: {e}"))),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    variant: Option<String>,
    q: Option<u32>,
    secure: Option<bool>,
    seed: Option<u64>,
    rate1: Option<RationalValue>,
    rate2: Option<RationalValue>,
    out: Option<PathBuf>,
    #[serde(default)]
    capacities: BTreeMap<String, RationalValue>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<ConfigFile, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::InvalidConfig(format!("cannot read {}: {e}", path.display()))
        })?;
        toml::from_str(&text)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
    }
}

/// Everything a subcommand needs, after merging flags over the file.
#[derive(Debug, Clone)]
pub struct Settings {
    pub variant: Option<Variant>,
    pub field: FieldSpec,
    pub secure: bool,
    pub seed: u64,
    pub rate1: Option<Rational>,
    pub rate2: Option<Rational>,
    pub out: Option<PathBuf>,
    pub cap_overrides: BTreeMap<EdgeLabel, Rational>,
}

pub struct Flags {
    pub variant: Option<String>,
    pub q: Option<u32>,
    pub secure: bool,
    pub seed: Option<u64>,
    pub rate1: Option<String>,
    pub rate2: Option<String>,
    pub out: Option<PathBuf>,
    pub caps: Vec<String>,
}

fn parse_variant(name: &str) -> Result<Variant, Error> {
    use butterflow::netgraph::ALL_VARIANTS;
    ALL_VARIANTS
        .into_iter()
        .find(|v| v.as_str() == name)
        .ok_or_else(|| Error::UnsupportedVariant {
            operation: "run".to_string(),
            variant: name.to_string(),
        })
}

fn parse_cap_entry(entry: &str) -> Result<(String, Rational), Error> {
    let (label, value) = entry.split_once('=').ok_or_else(|| {
        Error::InvalidConfig(format!("--cap takes LABEL=VALUE, got {entry:?}"))
    })?;
    let value = parse_rational(value.trim())
        .map_err(|e| Error::InvalidConfig(format!("--cap {label}: {e}")))?;
    Ok((label.trim().to_string(), value))
}

pub fn merge(file: &ConfigFile, flags: &Flags) -> Result<Settings, Error> {
    let variant = match flags.variant.as_deref().or(file.variant.as_deref()) {
        Some(name) => Some(parse_variant(name)?),
        None => None,
    };
    let q = flags.q.or(file.q).unwrap_or(2);
    let field = FieldSpec::new(q)?;
    let secure = flags.secure || file.secure.unwrap_or(false);
    let seed = flags.seed.or(file.seed).unwrap_or(0);
    let parse_flag_rate = |s: &Option<String>, key: &str| -> Result<Option<Rational>, Error> {
        s.as_deref()
            .map(|v| parse_rational(v).map_err(|e| Error::InvalidConfig(format!("{key}: {e}"))))
            .transpose()
    };
    let rate1 = match parse_flag_rate(&flags.rate1, "--rate1")? {
        Some(r) => Some(r),
        None => file.rate1.as_ref().map(|v| v.parse("rate1")).transpose()?,
    };
    let rate2 = match parse_flag_rate(&flags.rate2, "--rate2")? {
        Some(r) => Some(r),
        None => file.rate2.as_ref().map(|v| v.parse("rate2")).transpose()?,
    };
    let out = flags.out.clone().or_else(|| file.out.clone());

    let mut cap_overrides: BTreeMap<EdgeLabel, Rational> = BTreeMap::new();
    let mut push = |label_text: &str, value: Rational| -> Result<(), Error> {
        let label = EdgeLabel::from_str(label_text)
            .map_err(|e| Error::InvalidConfig(format!("capacity key {label_text:?}: {e}")))?;
        cap_overrides.insert(label, value);
        Ok(())
    };
    for (label_text, value) in &file.capacities {
        push(label_text, value.parse(&format!("capacities.{label_text}"))?)?;
    }
    for entry in &flags.caps {
        let (label_text, value) = parse_cap_entry(entry)?;
        push(&label_text, value)?;
    }

    Ok(Settings {
        variant,
        field,
        secure,
        seed,
        rate1,
        rate2,
        out,
        cap_overrides,
    })
}

impl Settings {
    pub fn require_variant(&self) -> Result<Variant, Error> {
        self.variant.ok_or_else(|| {
            Error::InvalidConfig("no variant given; pass --variant or set it in the config".into())
        })
    }

    pub fn rates(&self) -> Result<RatePair, Error> {
        match (self.rate1, self.rate2) {
            (Some(r1), Some(r2)) => RatePair::new(r1, r2),
            _ => Err(Error::InvalidConfig(
                "this command needs rate1 and rate2".into(),
            )),
        }
    }

    /// Template defaults overridden by the merged capacity entries. Entries
    /// whose label does not belong to the variant are rejected.
    pub fn capacities(&self) -> Result<TemplateCaps, Error> {
        let variant = self.require_variant()?;
        let valid = variant.edge_labels();
        let mut caps: BTreeMap<EdgeLabel, Capacity> = valid
            .iter()
            .map(|&l| {
                let default = match l {
                    EdgeLabel::Single(_) => Rational::from_integer(1),
                    EdgeLabel::Merged(_, _) => Rational::from_integer(2),
                };
                (l, Capacity::new(default).expect("non-negative default"))
            })
            .collect();
        for (&label, &value) in &self.cap_overrides {
            if !valid.contains(&label) {
                return Err(Error::InvalidConfig(format!(
                    "edge {label} does not exist in variant {}",
                    variant.as_str()
                )));
            }
            caps.insert(label, Capacity::new(value)?);
        }
        TemplateCaps::new(variant, caps)
    }
}
