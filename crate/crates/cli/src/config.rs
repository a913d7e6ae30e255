//! Run configuration: a TOML file with sections, overridden by flags, with
//! every default filled in before execution.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

use crate::CliError;

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct FieldSection {
    /// Degree; 1 for `Q`, 2 for a real quadratic field.
    pub r: Option<usize>,
    /// Squarefree radicand; `d = 1` means `Q`.
    pub d: Option<i64>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct LevelSection {
    /// Generator of the level ideal.
    pub s: Option<String>,
    /// Generator of the Hecke ideal `n`.
    pub n: Option<String>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct PrimeSection {
    pub p: Option<i64>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RangesSection {
    pub l: Option<Vec<u32>>,
    pub l_max: Option<u32>,
    pub k: Option<Vec<u32>>,
    pub cutoffs: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct FormsSection {
    pub m1: Option<String>,
    pub m2: Option<String>,
    /// Modulus of a Kloosterman sum.
    pub c: Option<String>,
    /// Multiply `m1`, `m2` by the inverse of the different generator.
    pub times_dinv: Option<bool>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct BesselSection {
    pub order: Option<u32>,
    pub x: Option<f64>,
    pub check: Option<String>,
    pub grid: Option<Vec<u32>>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSection {
    pub k: Option<u32>,
    pub pairs: Option<String>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct DiscrepancySection {
    pub atoms: Option<String>,
    pub reference: Option<String>,
    pub p: Option<f64>,
    pub normalize: Option<bool>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub format: Option<String>,
    pub path: Option<String>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub workers: Option<usize>,
    pub point_budget: Option<usize>,
    pub pair_budget: Option<u64>,
    pub rel_target: Option<f64>,
    pub max_doublings: Option<u32>,
}

/// Everything a run can be configured with.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub field: FieldSection,
    pub level: LevelSection,
    pub prime: PrimeSection,
    pub ranges: RangesSection,
    pub forms: FormsSection,
    pub bessel: BesselSection,
    pub oracle: OracleSection,
    pub discrepancy: DiscrepancySection,
    pub output: OutputSection,
    pub run: RunSection,
}

pub const WORKERS_ENV: &str = "PETERSSON_WORKERS";

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::validation(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::validation(format!("bad config: {e}")))
    }

    /// Fill every unset value with its default and validate the combination.
    pub fn resolve(mut self, env_workers: Option<String>) -> Result<Self, CliError> {
        let f = &mut self.field;
        match (f.r, f.d) {
            (None, None) => {
                f.r = Some(2);
                f.d = Some(2);
            }
            (None, Some(d)) => f.r = Some(if d == 1 { 1 } else { 2 }),
            (Some(1), None) => f.d = Some(1),
            (Some(_), None) => return Err(CliError::validation("field.d is required when r = 2")),
            (Some(r), Some(d)) => {
                if (r == 1) != (d == 1) || r > 2 || r == 0 {
                    return Err(CliError::validation(format!("inconsistent field spec r = {r}, d = {d}")));
                }
            }
        }
        self.level.s.get_or_insert_with(|| "1".into());
        self.level.n.get_or_insert_with(|| "1".into());
        self.prime.p.get_or_insert(3);
        if self.ranges.l.is_none() {
            let top = *self.ranges.l_max.get_or_insert(9);
            self.ranges.l = Some((1..=top).filter(|l| l % 2 == 1).collect());
        }
        self.forms.m1.get_or_insert_with(|| "1".into());
        self.forms.m2.get_or_insert_with(|| "1".into());
        self.forms.c.get_or_insert_with(|| "1".into());
        self.forms.times_dinv.get_or_insert(false);
        self.bessel.check.get_or_insert_with(|| "iv".into());
        self.bessel.grid.get_or_insert_with(|| petersson::bessel::GRID_ORDERS.to_vec());
        self.oracle.k.get_or_insert(12);
        self.oracle.pairs.get_or_insert_with(|| {
            petersson::oracle::DEFAULT_PAIRS.iter().map(|(m, n)| format!("({m},{n})")).collect::<Vec<_>>().join(",")
        });
        self.discrepancy.reference.get_or_insert_with(|| "sato-tate".into());
        self.discrepancy.normalize.get_or_insert(false);
        let fmt = self.output.format.get_or_insert_with(|| "json".into());
        if fmt != "json" && fmt != "csv" {
            return Err(CliError::validation(format!("unknown format '{fmt}' (json or csv)")));
        }
        if self.run.workers.is_none() {
            if let Some(v) = env_workers {
                let w = v.trim().parse().map_err(|_| CliError::validation(format!("{WORKERS_ENV}='{v}' is not a count")))?;
                self.run.workers = Some(w);
            }
        }
        self.run.point_budget.get_or_insert(petersson::lattice::DEFAULT_POINT_BUDGET);
        self.run.pair_budget.get_or_insert(petersson::kloosterman::DEFAULT_PAIR_BUDGET);
        self.run.rel_target.get_or_insert(1e-3);
        self.run.max_doublings.get_or_insert(14);
        Ok(self)
    }

    /// Hex SHA-256 of the resolved configuration and command.
    pub fn hash(&self, command: &str) -> String {
        let body = serde_json::json!({ "command": command, "config": self });
        hex::encode(Sha256::digest(body.to_string().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_fills_defaults() {
        let c = RunConfig::parse("[field]\nd = 5\n[prime]\np = 2\n[ranges]\nl_max = 5\n").unwrap();
        let r = c.resolve(None).unwrap();
        assert_eq!(r.field.r, Some(2));
        assert_eq!(r.ranges.l, Some(vec![1, 3, 5]));
        assert_eq!(r.output.format.as_deref(), Some("json"));
        assert!(RunConfig::parse("[field]\nbogus = 1\n").is_err());
        assert!(RunConfig::parse("[field]\nr = 1\nd = 2\n").unwrap().resolve(None).is_err());
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = RunConfig::default().resolve(None).unwrap();
        let mut b = a.clone();
        assert_eq!(a.hash("x"), b.hash("x"));
        assert_ne!(a.hash("x"), a.hash("y"));
        b.prime.p = Some(5);
        assert_ne!(a.hash("x"), b.hash("x"));
        assert_eq!(a.hash("x").len(), 64);
    }

    #[test]
    fn env_workers() {
        let r = RunConfig::default().resolve(Some("3".into())).unwrap();
        assert_eq!(r.run.workers, Some(3));
        assert!(RunConfig::default().resolve(Some("many".into())).is_err());
    }
}
