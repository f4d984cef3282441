use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Spin-1/2 isotopes the model accepts.
pub const SPIN_HALF_ISOTOPES: &[&str] = &[
    "1H", "3H", "13C", "15N", "19F", "29Si", "31P", "57Fe", "77Se", "89Y", "103Rh", "107Ag",
    "109Ag", "113Cd", "119Sn", "129Xe", "183W", "195Pt", "199Hg", "205Tl", "207Pb",
];

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Spin {
    pub label: String,
    pub isotope: String,
    /// Chemical-shift offset in Hz (converted to rad/s internally).
    pub offset_hz: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coupling {
    pub i: usize,
    pub j: usize,
    /// Scalar J coupling in Hz.
    pub j_hz: f64,
}

/// A liquid-state spin system: isotropic offsets, scalar couplings, and one
/// uniform damping rate mu (rad/s) standing in for relaxation.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinSystem {
    pub spins: Vec<Spin>,
    pub couplings: Vec<Coupling>,
    pub damping_mu: f64,
}

impl SpinSystem {
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let sys: SpinSystem = serde_json::from_str(text)?;
        sys.validate()?;
        Ok(sys)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spin system serializes")
    }

    pub fn n_spins(&self) -> usize {
        self.spins.len()
    }

    pub fn same_isotope(&self, i: usize, j: usize) -> bool {
        self.spins[i].isotope == self.spins[j].isotope
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.spins.is_empty() {
            return Err(ModelError::EmptySystem);
        }
        for spin in &self.spins {
            if !SPIN_HALF_ISOTOPES.contains(&spin.isotope.as_str()) {
                return Err(ModelError::UnknownIsotope {
                    label: spin.label.clone(),
                    isotope: spin.isotope.clone(),
                });
            }
        }
        let n = self.spins.len();
        let mut seen = BTreeSet::new();
        for (index, c) in self.couplings.iter().enumerate() {
            for spin in [c.i, c.j] {
                if spin >= n {
                    return Err(ModelError::CouplingIndexOutOfRange { index, spin, n });
                }
            }
            if c.i == c.j {
                return Err(ModelError::SelfCoupling { index, spin: c.i });
            }
            let pair = (c.i.min(c.j), c.i.max(c.j));
            if !seen.insert(pair) {
                return Err(ModelError::DuplicateCoupling {
                    i: pair.0,
                    j: pair.1,
                });
            }
        }
        if !(self.damping_mu > 0.0) || !self.damping_mu.is_finite() {
            return Err(ModelError::NonPositiveDamping {
                value: self.damping_mu,
            });
        }
        Ok(())
    }
}
