use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Homogeneous XX chain: `n` spins, nearest-neighbour coupling `coupling`,
/// and the registration horizon used by the time-window analyses.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    n: usize,
    coupling: f64,
    registration_time: Option<f64>,
}

impl ChainConfig {
    pub fn new(n: usize, coupling: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidConfig(format!("chain needs at least 2 spins, got {n}")));
        }
        if !(coupling > 0.0 && coupling.is_finite()) {
            return Err(Error::InvalidConfig(format!("coupling must be positive, got {coupling}")));
        }
        Ok(Self { n, coupling, registration_time: None })
    }

    /// Chain of `n` spins with unit coupling (dimensionless time).
    pub fn with_length(n: usize) -> Result<Self> {
        Self::new(n, 1.0)
    }

    pub fn with_registration_time(mut self, t_reg: f64) -> Result<Self> {
        if !(t_reg >= 0.0 && t_reg.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "registration time must be finite and non-negative, got {t_reg}"
            )));
        }
        self.registration_time = Some(t_reg);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn registration_time_opt(&self) -> Option<f64> {
        self.registration_time
    }

    /// The registration horizon; errors if it has not been set yet.
    pub fn registration_time(&self) -> Result<f64> {
        self.registration_time
            .ok_or_else(|| Error::InvalidConfig("registration time not set; run the optimal-time search first".into()))
    }

    /// Number of basis states with at most two excitations.
    pub fn low_sector_dim(&self) -> usize {
        1 + self.n + self.n * (self.n - 1) / 2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_short_chain_and_bad_coupling() {
        assert!(ChainConfig::new(1, 1.0).is_err());
        assert!(ChainConfig::new(4, 0.0).is_err());
        assert!(ChainConfig::new(4, f64::NAN).is_err());
        assert!(ChainConfig::with_length(2).is_ok());
    }

    #[test]
    fn registration_time_must_be_set_and_non_negative() {
        let c = ChainConfig::with_length(10).unwrap();
        assert!(c.registration_time().is_err());
        assert!(c.with_registration_time(-1.0).is_err());
        let c = c.with_registration_time(12.238).unwrap();
        assert_eq!(c.registration_time().unwrap(), 12.238);
        assert_eq!(c.low_sector_dim(), 56);
    }
}
