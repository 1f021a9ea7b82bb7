//! Sequential-composition bookkeeping for pure epsilon-DP.

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Charge<T> {
    pub label: String,
    pub epsilon: T,
}

/// Records every epsilon spent by a run. Under sequential composition the
/// total guarantee is the sum of the charges.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BudgetLedger<T> {
    charges: Vec<Charge<T>>,
}

impl<T: Real> BudgetLedger<T> {
    pub fn new() -> Self {
        Self { charges: Vec::new() }
    }

    pub fn charge(&mut self, label: impl Into<String>, epsilon: T) {
        self.charges.push(Charge {
            label: label.into(),
            epsilon,
        });
    }

    pub fn charges(&self) -> &[Charge<T>] {
        &self.charges
    }

    pub fn total(&self) -> T {
        self.charges.iter().map(|c| c.epsilon).sum()
    }

    /// True when the recorded total equals `expected` up to a few ulps of accumulation.
    pub fn matches(&self, expected: T) -> bool {
        let tol = T::of(1e-12).max(T::epsilon() * T::of(64.0)) * expected.abs().max(T::one());
        (self.total() - expected).abs() <= tol
    }
}
