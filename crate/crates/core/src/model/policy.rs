use serde::{Deserialize, Serialize};

/// Rule used by seeders to pick which segment to push.
///
/// The value `u` is the probability that a seeder/leecher transaction hands
/// out segment `a` (or the rare segment, in the lumped model). Every policy
/// is total on the nonnegative quadrant and returns a value in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ControlPolicy {
    Constant {
        u: f64,
    },
    /// `u = x_b / (x_a + x_b)`.
    ContinuousRarest,
    /// `1` when `a` is rarer, `0` when `b` is rarer, `1/2` on the tie band.
    ///
    /// `tie_tol = None` uses a band of `1e-9 * (x_a + x_b + 1)`.
    BangBang {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tie_tol: Option<f64>,
    },
    /// `u = x_a / (x_a + k x_b)`: large `k` keeps pushing `b` even when `a`
    /// is the rarer segment.
    ControlledRarity {
        k: f64,
    },
    /// `1 - inner`.
    Inverted {
        inner: Box<ControlPolicy>,
    },
}

impl ControlPolicy {
    pub const HALF: ControlPolicy = ControlPolicy::Constant { u: 0.5 };

    pub fn constant(u: f64) -> Self {
        ControlPolicy::Constant { u }
    }

    pub fn bang_bang() -> Self {
        ControlPolicy::BangBang { tie_tol: None }
    }

    pub fn inverted(inner: ControlPolicy) -> Self {
        ControlPolicy::Inverted { inner: Box::new(inner) }
    }

    pub fn validate(&self) -> crate::Result<()> {
        let bad = |name, reason: &str| {
            Err(crate::Error::InvalidParameter {
                name,
                reason: reason.to_string(),
            })
        };
        match self {
            ControlPolicy::Constant { u } if !(0.0..=1.0).contains(u) => {
                bad("u", "constant control must lie in [0, 1]")
            }
            ControlPolicy::BangBang { tie_tol: Some(t) } if !(*t >= 0.0) => {
                bad("tie_tol", "tie tolerance must be nonnegative")
            }
            ControlPolicy::ControlledRarity { k } if !(*k > 0.0 && k.is_finite()) => {
                bad("k", "rarity bias must be positive")
            }
            ControlPolicy::Inverted { inner } => inner.validate(),
            _ => Ok(()),
        }
    }

    /// Signed distance `x_a - x_b` to the switching surface of a bang-bang
    /// rule, `0.0` inside its tie band; `None` for rules without a
    /// discontinuity that trajectories slide along.
    pub fn switching(&self, x_a: f64, x_b: f64) -> Option<f64> {
        match self {
            ControlPolicy::BangBang { tie_tol } => {
                let tol = tie_tol.unwrap_or(1e-9 * (x_a + x_b + 1.0));
                let d = x_a - x_b;
                Some(if d.abs() <= tol { 0.0 } else { d })
            }
            _ => None,
        }
    }

    /// Evaluates the policy at segment populations `(x_a, x_b)`.
    pub fn value(&self, x_a: f64, x_b: f64) -> f64 {
        let u = match self {
            ControlPolicy::Constant { u } => *u,
            ControlPolicy::ContinuousRarest => ratio_or_half(x_b, x_a + x_b),
            ControlPolicy::BangBang { tie_tol } => {
                let tol = tie_tol.unwrap_or(1e-9 * (x_a + x_b + 1.0));
                if x_a < x_b - tol {
                    1.0
                } else if x_a > x_b + tol {
                    0.0
                } else {
                    0.5
                }
            }
            ControlPolicy::ControlledRarity { k } => ratio_or_half(x_a, x_a + k * x_b),
            ControlPolicy::Inverted { inner } => 1.0 - inner.value(x_a, x_b),
        };
        u.clamp(0.0, 1.0)
    }
}

/// Free-function form of [`ControlPolicy::value`].
pub fn control_value(policy: &ControlPolicy, x_a: f64, x_b: f64) -> f64 {
    policy.value(x_a, x_b)
}

// 0/0 (empty swarm) is the symmetric tie.
fn ratio_or_half(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.5
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn continuous_rarest_ratio() {
        assert_eq!(ControlPolicy::ContinuousRarest.value(1.0, 3.0), 0.75);
    }

    #[test]
    fn bang_bang_tie_is_half() {
        let p = ControlPolicy::BangBang { tie_tol: Some(0.0) };
        assert_eq!(p.value(5.0, 5.0), 0.5);
        assert_eq!(p.value(4.0, 5.0), 1.0);
        assert_eq!(p.value(6.0, 5.0), 0.0);
    }

    #[test]
    fn default_tie_band_scales_with_population() {
        let p = ControlPolicy::bang_bang();
        assert_eq!(p.value(1.0, 1.0 + 1e-9), 0.5);
        assert_eq!(p.value(1.0, 1.0 + 1e-8), 1.0);
        assert_eq!(p.value(1e6, 1e6 + 1e-4), 0.5);
    }

    #[test]
    fn controlled_rarity_formula() {
        let p = ControlPolicy::ControlledRarity { k: 2.0 };
        assert_eq!(p.value(2.0, 1.0), 0.5);
        // k = 1 is the complement of continuous rarest-first.
        let k1 = ControlPolicy::ControlledRarity { k: 1.0 };
        assert!((k1.value(1.0, 3.0) - (1.0 - 0.75)).abs() < 1e-15);
    }

    #[test]
    fn empty_swarm_is_half() {
        for p in [
            ControlPolicy::ContinuousRarest,
            ControlPolicy::ControlledRarity { k: 3.0 },
            ControlPolicy::bang_bang(),
        ] {
            assert_eq!(p.value(0.0, 0.0), 0.5);
        }
    }

    #[test]
    fn inverted_complements() {
        let p = ControlPolicy::inverted(ControlPolicy::bang_bang());
        assert_eq!(p.value(1.0, 2.0), 0.0);
        assert_eq!(p.value(2.0, 1.0), 1.0);
    }

    #[test]
    fn validation() {
        assert!(ControlPolicy::constant(1.5).validate().is_err());
        assert!(ControlPolicy::ControlledRarity { k: 0.0 }.validate().is_err());
        assert!(ControlPolicy::inverted(ControlPolicy::constant(-0.1))
            .validate()
            .is_err());
        assert!(ControlPolicy::HALF.validate().is_ok());
    }
}
