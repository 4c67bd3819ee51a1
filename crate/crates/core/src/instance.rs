use thiserror::Error;

use crate::arms::ArmSpec;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InstanceError {
    #[error("an instance needs at least one arm")]
    NoArms,
    #[error("budget must be positive and finite, got {0}")]
    Budget(f64),
    #[error("horizon must be at least 1")]
    Horizon,
}

/// `K` arms, an initial budget `B` and a horizon `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditInstance {
    arms: Vec<ArmSpec>,
    budget: f64,
    horizon: u64,
}

impl BanditInstance {
    pub fn new(arms: Vec<ArmSpec>, budget: f64, horizon: u64) -> Result<Self, InstanceError> {
        if arms.is_empty() {
            return Err(InstanceError::NoArms);
        }
        if !(budget.is_finite() && budget > 0.0) {
            return Err(InstanceError::Budget(budget));
        }
        if horizon == 0 {
            return Err(InstanceError::Horizon);
        }
        Ok(Self { arms, budget, horizon })
    }

    pub fn arms(&self) -> &[ArmSpec] {
        &self.arms
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    /// Same arms and budget, different horizon.
    pub fn with_horizon(&self, horizon: u64) -> Result<Self, InstanceError> {
        Self::new(self.arms.clone(), self.budget, horizon)
    }

    /// Largest arm mean.
    pub fn best_mean(&self) -> f64 {
        self.arms.iter().map(ArmSpec::mean).fold(f64::NEG_INFINITY, f64::max)
    }
}
