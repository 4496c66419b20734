use serde::{Deserialize, Serialize};

use super::ttc::{ContactClass, TtcResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConflictType {
    RearEnd,
    Sideswipe,
    Unsupported,
}

/// Ordered from least to most severe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConflictSeverity {
    None,
    Slight,
    Severe,
}

impl ConflictSeverity {
    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SeverityThresholds {
    /// TTC strictly below this is at least a slight conflict (s).
    pub slight: f64,
    /// TTC strictly below this is a severe conflict (s).
    pub severe: f64,
    /// Intersecting angles at or above this (degrees) are head-on/angle geometries.
    pub max_angle_deg: f64,
}

impl Default for SeverityThresholds {
    fn default() -> Self {
        Self {
            slight: 3.0,
            severe: 1.5,
            max_angle_deg: 30.0,
        }
    }
}

impl SeverityThresholds {
    pub fn is_valid(&self) -> bool {
        self.slight > self.severe && self.severe > 0.0 && self.max_angle_deg > 0.0
    }

    pub fn severity(&self, ttc: f64) -> ConflictSeverity {
        if ttc < self.severe {
            ConflictSeverity::Severe
        } else if ttc < self.slight {
            ConflictSeverity::Slight
        } else {
            ConflictSeverity::None
        }
    }
}

/// Conflict type (absent when no contact is predicted) and severity.
pub fn classify(
    result: &TtcResult,
    thresholds: &SeverityThresholds,
) -> (Option<ConflictType>, ConflictSeverity) {
    let kind = match result.contact_class {
        ContactClass::None => return (None, ConflictSeverity::None),
        _ if result.alpha_deg >= thresholds.max_angle_deg => ConflictType::Unsupported,
        ContactClass::FrontToRear => ConflictType::RearEnd,
        ContactClass::CornerToSide => ConflictType::Sideswipe,
    };
    (Some(kind), thresholds.severity(result.ttc))
}
