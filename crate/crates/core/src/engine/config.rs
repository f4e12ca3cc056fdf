use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RestartPolicy {
    /// Luby sequence scaled by `unit_conflicts`.
    Luby { unit_conflicts: u64 },
    /// Restart after `base`, `base*factor`, `base*factor^2`, ... conflicts.
    Geometric { base: u64, factor: f64 },
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InCallDeletion {
    /// Every `interval_conflicts` conflicts, drop the worse half of the
    /// clauses learned during the current call.
    LbdHalving { interval_conflicts: u64 },
    Off,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub restart_policy: RestartPolicy,
    pub in_call_deletion: InCallDeletion,
    pub phase_saving: bool,
    pub var_decay: f64,
    /// 0 keeps the fully deterministic defaults (zero activities, negative
    /// polarity). Any other value perturbs initial activities and default
    /// polarities.
    pub seed: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            restart_policy: RestartPolicy::Luby { unit_conflicts: 64 },
            in_call_deletion: InCallDeletion::LbdHalving {
                interval_conflicts: 2000,
            },
            phase_saving: true,
            var_decay: 0.95,
            seed: 0,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.var_decay > 0.0 && self.var_decay < 1.0) {
            return Err(format!("var_decay must be in (0,1), got {}", self.var_decay));
        }
        match self.restart_policy {
            RestartPolicy::Luby { unit_conflicts } if unit_conflicts < 1 => {
                return Err("luby unit must be >= 1".into())
            }
            RestartPolicy::Geometric { base, factor } if base < 1 || factor < 1.0 => {
                return Err("geometric restarts need base >= 1 and factor >= 1".into())
            }
            _ => {}
        }
        if let InCallDeletion::LbdHalving { interval_conflicts } = self.in_call_deletion {
            if interval_conflicts < 1 {
                return Err("deletion interval must be >= 1".into());
            }
        }
        Ok(())
    }

    /// Conflict budget before the `restart_index`-th restart, `None` when
    /// restarts are disabled.
    pub(crate) fn restart_limit(&self, restart_index: u64) -> Option<u64> {
        match self.restart_policy {
            RestartPolicy::Luby { unit_conflicts } => Some(luby(restart_index) * unit_conflicts),
            RestartPolicy::Geometric { base, factor } => {
                Some((base as f64 * factor.powi(restart_index.min(i32::MAX as u64) as i32)) as u64)
            }
            RestartPolicy::Off => None,
        }
    }
}

/// i-th element (0-based) of the Luby sequence 1,1,2,1,1,2,4,1,1,2,...
pub fn luby(mut i: u64) -> u64 {
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < i + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != i {
        size = (size - 1) >> 1;
        seq -= 1;
        i %= size;
    }
    1u64 << seq
}
