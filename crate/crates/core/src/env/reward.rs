use super::EnvState;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardParams {
    pub w_hlr_fov: f64,
    pub w_llr_fov: f64,
    pub w_approach: f64,
    pub w_time: f64,
    pub capture_bonus: f64,
    /// Scale on the shaped terms. `None` means one over the LLR max speed.
    pub alpha: Option<f64>,
}

impl Default for RewardParams {
    fn default() -> Self {
        Self {
            w_hlr_fov: 1.0,
            w_llr_fov: 1.0,
            w_approach: 1.0,
            w_time: 0.05,
            capture_bonus: 10.0,
            alpha: None,
        }
    }
}

impl RewardParams {
    pub fn alpha_for(&self, llr_speed: u32) -> f64 {
        self.alpha.unwrap_or(1.0 / f64::from(llr_speed.max(1)))
    }
}

/// Capture test shared by the reward and the evacuee's interception check.
pub fn within_capture(distance: f64, capture_radius: f64) -> bool {
    distance < capture_radius
}

/// Ingredients of one step's reward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardTerms {
    pub captured: bool,
    pub in_hlr_fov: bool,
    pub in_llr_fov: bool,
    /// Decrease in LLR-evacuee distance, zero unless the evacuee was seen
    /// before and after the step.
    pub approach: f64,
    pub t: u32,
}

impl RewardTerms {
    pub fn between(prev: &EnvState, next: &EnvState) -> Self {
        let approach = if prev.evac_visible() && next.evac_visible() {
            prev.llr_evac_distance() - next.llr_evac_distance()
        } else {
            0.0
        };
        Self {
            captured: !prev.evacuee.guided && next.evacuee.guided,
            in_hlr_fov: next.in_hlr_fov(next.evacuee.position()),
            in_llr_fov: next.in_llr_fov(next.evacuee.position()),
            approach,
            t: prev.t,
        }
    }

    pub fn reward(&self, params: &RewardParams, alpha: f64) -> f64 {
        if self.captured {
            return params.capture_bonus;
        }
        let flag = |b: bool| if b { 1.0 } else { 0.0 };
        alpha
            * (params.w_hlr_fov * flag(self.in_hlr_fov)
                + params.w_llr_fov * flag(self.in_llr_fov)
                + params.w_approach * self.approach
                + params.w_time * -f64::from(self.t))
    }
}

/// Shared team reward for the transition `prev -> next`. Zero once the
/// evacuee is already being guided.
pub fn compute_reward(prev: &EnvState, next: &EnvState, params: &RewardParams, alpha: f64) -> f64 {
    if prev.evacuee.guided {
        return 0.0;
    }
    RewardTerms::between(prev, next).reward(params, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn terms(captured: bool, hlr: bool, llr: bool, approach: f64, t: u32) -> RewardTerms {
        RewardTerms {
            captured,
            in_hlr_fov: hlr,
            in_llr_fov: llr,
            approach,
            t,
        }
    }

    #[test]
    fn capture_bonus() {
        assert!(within_capture(0.5, 1.0));
        assert!(!within_capture(1.0, 1.0));
        let p = RewardParams::default();
        assert_eq!(terms(true, false, false, 0.0, 40).reward(&p, 0.5), 10.0);
    }

    #[test]
    fn unseen_time_penalty() {
        let p = RewardParams::default();
        let r = terms(false, false, false, 0.0, 4).reward(&p, 0.5);
        assert!((r - -0.1).abs() < 1e-12);
    }

    #[test]
    fn seen_and_approaching() {
        let p = RewardParams::default();
        let r = terms(false, true, true, 5.0 - 3.0, 10).reward(&p, 0.5);
        assert!((r - 1.75).abs() < 1e-12);
    }

    #[test]
    fn alpha_defaults_to_inverse_llr_speed() {
        assert_eq!(RewardParams::default().alpha_for(2), 0.5);
        let p = RewardParams {
            alpha: Some(0.3),
            ..RewardParams::default()
        };
        assert_eq!(p.alpha_for(2), 0.3);
    }
}
