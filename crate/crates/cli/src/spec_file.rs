//! The JSON spec-file format.

use std::path::Path;

use rankone::{Budget, Builder, RankOneSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

fn default_max_stage() -> usize {
    Budget::default().max_stage
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_descendants: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_pairs: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_height_bits: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub name: String,
    pub builder: Builder,
    #[serde(default = "default_max_stage")]
    pub max_stage: usize,
    #[serde(default)]
    pub budget: BudgetFile,
}

/// Command-line overrides of the file's budget.
#[derive(Clone, Debug, Default)]
pub struct BudgetOverrides {
    pub max_stage: Option<usize>,
    pub max_descendants: Option<u64>,
    pub max_pairs: Option<u64>,
    pub max_height_bits: Option<u64>,
}

impl SpecFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let spec: SpecFile =
            serde_json::from_str(text).map_err(|e| CliError::Schema(e.to_string()))?;
        spec.builder
            .validate()
            .map_err(|e| CliError::Schema(e.to_string()))?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn budget(&self, o: &BudgetOverrides) -> Budget {
        let d = Budget::default();
        Budget {
            max_stage: o.max_stage.unwrap_or(self.max_stage),
            max_height_bits: o
                .max_height_bits
                .or(self.budget.max_height_bits)
                .unwrap_or(d.max_height_bits),
            max_descendants: o
                .max_descendants
                .or(self.budget.max_descendants)
                .unwrap_or(d.max_descendants),
            max_pairs: o.max_pairs.or(self.budget.max_pairs).unwrap_or(d.max_pairs),
        }
    }

    pub fn build(&self, o: &BudgetOverrides) -> Result<RankOneSpec, CliError> {
        self.builder
            .clone()
            .into_spec(self.budget(o))
            .map_err(|e| CliError::Schema(e.to_string()))
    }

    /// sha256 of the canonical (re-serialized) document, so formatting and
    /// key order in the file do not change it.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(&serde_json::to_value(self).expect("serializable"))
            .expect("serializable");
        Sha256::digest(&canonical)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_hash() {
        let a = SpecFile::parse(
            r#"{"name":"t","builder":{"kind":"t_q","q":2,"max_odd_r":64},"max_stage":12}"#,
        )
        .unwrap();
        let b = SpecFile::parse(
            r#"{ "max_stage": 12,
                 "builder": {"max_odd_r": 64, "q": 2, "kind": "t_q"},
                 "name": "t" }"#,
        )
        .unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
        let c = SpecFile::parse(r#"{"name":"t","builder":{"kind":"t_q","q":3},"max_stage":12}"#)
            .unwrap();
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn schema_errors() {
        for bad in [
            r#"{"name":"t","builder":{"kind":"t_q","q":1}}"#,
            r#"{"name":"t","builder":{"kind":"koopman"},"extra":1}"#,
            r#"{"name":"t","builder":{"kind":"koopman"},"budget":{"max_pair":3}}"#,
            r#"{"builder":{"kind":"koopman"}}"#,
            "not json",
        ] {
            assert!(
                matches!(SpecFile::parse(bad), Err(CliError::Schema(_))),
                "{bad}"
            );
        }
    }

    #[test]
    fn overrides_win() {
        let s = SpecFile::parse(
            r#"{"name":"k","builder":{"kind":"koopman"},"budget":{"max_pairs":10}}"#,
        )
        .unwrap();
        let b = s.budget(&BudgetOverrides {
            max_pairs: Some(20),
            ..Default::default()
        });
        assert_eq!(b.max_pairs, 20);
        assert_eq!(s.budget(&BudgetOverrides::default()).max_pairs, 10);
    }
}
