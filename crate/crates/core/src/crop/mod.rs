//! Daily tomato growth models.

pub mod simple;
pub mod tomgro;

use serde::{Deserialize, Serialize};

/// Which crop model drives a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CropModel {
    Simple,
    Tomgro,
}

impl CropModel {
    pub fn as_str(self) -> &'static str {
        match self {
            CropModel::Simple => "simple",
            CropModel::Tomgro => "tomgro",
        }
    }

    /// Number of crop state components (3 for SIMPLE, 5 for TOMGRO).
    pub fn state_dim(self) -> usize {
        match self {
            CropModel::Simple => 3,
            CropModel::Tomgro => 5,
        }
    }
}

impl std::str::FromStr for CropModel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "simple" => Ok(CropModel::Simple),
            "tomgro" => Ok(CropModel::Tomgro),
            other => Err(format!("unknown crop model `{other}` (expected simple|tomgro)")),
        }
    }
}
