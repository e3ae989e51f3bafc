use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ClutterLevel, Condition, Dataset, TrialSpec};
use crate::error::{Error, Result};

pub const TRIALS_PER_SESSION: usize = 76;
pub const FALSE_TRIALS: usize = 22;
pub const BREAK_AFTER: usize = 38;

/// Trials per clutter stratum and how many of them have the target absent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StratumQuota {
    pub level: ClutterLevel,
    pub total: usize,
    pub absent: usize,
}

/// 24/26/26 trials per stratum; 7/6/9 absent-target trials.
pub const QUOTAS: [StratumQuota; 3] = [
    StratumQuota { level: ClutterLevel::Low, total: 24, absent: 7 },
    StratumQuota { level: ClutterLevel::Intermediate, total: 26, absent: 6 },
    StratumQuota { level: ClutterLevel::High, total: 26, absent: 9 },
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionPlan {
    pub condition: Condition,
    pub seed: u64,
    pub trials: Vec<TrialSpec>,
    /// Number of completed trials after which a break is taken.
    pub break_after: Option<usize>,
}

/// Selects the session's image-target pairs and orders them by `seed`.
///
/// Selection depends only on the dataset: within each stratum the first
/// eligible present and absent candidates in manifest order fill the
/// quota, so every condition sees the same pairs and only the order varies.
pub fn build_session(dataset: &Dataset, condition: Condition, seed: u64) -> Result<SessionPlan> {
    let mut trials = Vec::with_capacity(TRIALS_PER_SESSION);
    for quota in QUOTAS {
        let mut present = Vec::new();
        let mut absent = Vec::new();
        for scene in dataset.scenes.iter().filter(|s| s.clutter() == Some(quota.level)) {
            for c in scene.candidates.iter().filter(|c| !c.ambiguous) {
                let spec = TrialSpec {
                    image_id: scene.image_id.clone(),
                    target_label: c.target_label.clone(),
                    target_present: c.target_present,
                    clutter_level: quota.level,
                    target_shape: c.shape,
                    condition,
                };
                if c.target_present {
                    present.push(spec);
                } else {
                    absent.push(spec);
                }
            }
        }
        let need_present = quota.total - quota.absent;
        if present.len() < need_present || absent.len() < quota.absent {
            return Err(Error::Config(format!(
                "stratum {} needs {} target-present and {} target-absent pairs, dataset has {} and {}",
                quota.level.as_str(),
                need_present,
                quota.absent,
                present.len(),
                absent.len()
            )));
        }
        trials.extend(absent.into_iter().take(quota.absent));
        trials.extend(present.into_iter().take(need_present));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    trials.shuffle(&mut rng);
    Ok(SessionPlan {
        condition,
        seed,
        trials,
        break_after: condition.has_break().then_some(BREAK_AFTER),
    })
}
