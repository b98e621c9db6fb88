use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Base time unit of the inventory model. Every rate and duration inside the model is
/// expressed in this unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum TimeUnit {
    #[default]
    Week,
    Day,
}

impl TimeUnit {
    /// Number of time units per year (N_t).
    pub fn per_year(self) -> u32 {
        match self {
            TimeUnit::Week => 52,
            TimeUnit::Day => 365,
        }
    }

    pub fn from_per_year(n: u32) -> Result<Self> {
        match n {
            52 => Ok(TimeUnit::Week),
            365 => Ok(TimeUnit::Day),
            other => Err(Error::config(format!("unsupported time units per year {other}; use 52 or 365"))),
        }
    }

    pub fn seconds(self) -> f64 {
        match self {
            TimeUnit::Week => 604_800.0,
            TimeUnit::Day => 86_400.0,
        }
    }

    pub fn per_second_to_per_unit(self, rate_per_s: f64) -> f64 {
        rate_per_s * self.seconds()
    }

    pub fn per_unit_to_per_second(self, rate: f64) -> f64 {
        rate / self.seconds()
    }

    pub fn seconds_to_units(self, seconds: f64) -> f64 {
        seconds / self.seconds()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn rate_conversion_round_trips(rate in -1e-3f64..1e-3) {
            for unit in [TimeUnit::Week, TimeUnit::Day] {
                let back = unit.per_unit_to_per_second(unit.per_second_to_per_unit(rate));
                prop_assert!((back - rate).abs() <= 1e-12 * rate.abs());
            }
        }
    }

    #[test]
    fn per_year_mapping() {
        assert_eq!(TimeUnit::from_per_year(52).unwrap(), TimeUnit::Week);
        assert_eq!(TimeUnit::from_per_year(365).unwrap().per_year(), 365);
        assert!(TimeUnit::from_per_year(12).is_err());
    }
}
