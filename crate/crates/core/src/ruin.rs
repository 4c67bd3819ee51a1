//! Analytical ruin quantities.
//!
//! The decay rate `γ(F)` of an arm is the infimum of `KL(Q‖F) / E_Q[-X]` over
//! distributions `Q` with negative mean. For a risky arm with positive drift
//! it equals `-λ'`, where `λ' < 0` is the nontrivial root of the log-MGF
//! `Λ(λ) = log E[exp(λX)]`; [`gamma`] finds that root by bisection. For arms
//! on `{-1, 0, 1}` the gambler's-ruin closed form gives the constant-policy
//! ruin probability `(p₋₁/p₁)^⌈B⌉`, and the EXPLOIT ruin probability is the
//! product of those with per-arm budget `B/K`.

use std::fmt;

use thiserror::Error;

use crate::arms::{ArmClass, ArmSpec};
use crate::format::fmt_sig;
use crate::instance::BanditInstance;

/// Width of the final bisection bracket on `λ`.
pub const GAMMA_TOLERANCE: f64 = 1e-12;

const BRACKET_EPS: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TheoryError {
    #[error("arm {arm} has support outside {{-1, 0, 1}}; no closed form")]
    UnsupportedSupport { arm: usize },
    #[error("budget must be positive, got {0}")]
    InvalidBudget(f64),
    #[error("exact EXPLOIT ruin probability unavailable ({reason}); upper bound {upper_bound}")]
    Unsupported { reason: String, upper_bound: f64 },
    #[error("every arm is ruined almost surely (p_ex = 1); weights undefined")]
    Degenerate,
    #[error("KL ratio undefined: {0}")]
    Domain(String),
}

/// Exponential ruin rate of an arm, `+∞` for arms that cannot lose.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Gamma(f64);

impl Gamma {
    pub const INFINITE: Gamma = Gamma(f64::INFINITY);

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// `exp(-budget · γ)`, with `exp(-budget · ∞) = 0`.
    pub fn decay(self, budget: f64) -> f64 {
        if self.is_infinite() {
            0.0
        } else {
            (-budget * self.0).exp()
        }
    }
}

impl fmt::Display for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// `log E[exp(λX)]`.
pub fn log_mgf(arm: &ArmSpec, lambda: f64) -> f64 {
    if lambda.abs() <= 1.0 {
        // expm1/ln_1p keep full precision for small λ, where the root sits
        // for arms with small drift.
        let s: f64 = arm.points().map(|(x, p)| p * (lambda * x).exp_m1()).sum();
        s.ln_1p()
    } else {
        let m = arm
            .support()
            .iter()
            .map(|&x| lambda * x)
            .fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = arm.points().map(|(x, p)| p * (lambda * x - m).exp()).sum();
        m + s.ln()
    }
}

/// Negative root `λ'` of the log-MGF for a risky arm with positive drift.
fn negative_mgf_root(arm: &ArmSpec) -> f64 {
    let mut lo = -1.0;
    while log_mgf(arm, lo) <= 0.0 {
        lo *= 2.0;
    }
    let mut hi = -BRACKET_EPS;
    while hi - lo > GAMMA_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if log_mgf(arm, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn gamma(arm: &ArmSpec) -> Gamma {
    match arm.classify() {
        ArmClass::Positive | ArmClass::Zero => Gamma::INFINITE,
        ArmClass::NonpositiveDrift => Gamma(0.0),
        ArmClass::RiskyPositiveDrift => Gamma(-negative_mgf_root(arm)),
    }
}

/// Exponentially tilted arm `q_i ∝ p_i exp(λ' x_i)`, the minimizer of the
/// KL ratio. `None` unless the arm is risky with positive drift.
pub fn tilted_minimizer(arm: &ArmSpec) -> Option<ArmSpec> {
    if arm.classify() != ArmClass::RiskyPositiveDrift {
        return None;
    }
    let root = negative_mgf_root(arm);
    let weights: Vec<f64> = arm.points().map(|(x, p)| p * (root * x).exp()).collect();
    let total: f64 = weights.iter().sum();
    let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
    ArmSpec::new(arm.support(), &probs).ok()
}

/// `KL(q‖p) / E_q[-X]`.
pub fn kl_ratio(q: &ArmSpec, p: &ArmSpec) -> Result<f64, TheoryError> {
    let q_mean = q.mean();
    if q_mean >= 0.0 {
        return Err(TheoryError::Domain(format!("mean of q is {q_mean}, not negative")));
    }
    let mut kl = 0.0;
    for (x, qx) in q.points() {
        let px = p.prob_of(x);
        if px == 0.0 {
            return Err(TheoryError::Domain(format!(
                "q puts mass on {x} outside the support of p"
            )));
        }
        kl += qx * (qx / px).ln();
    }
    Ok(kl / -q_mean)
}

/// Ruin probability of always pulling `arm` from budget `budget`, for arms on
/// `{-1, 0, 1}`: `1` when the mean is `≤ 0`, else `(p₋₁/p₁)^⌈budget⌉`.
pub fn ruin_prob_constant(arm: &ArmSpec, budget: f64) -> Result<f64, TheoryError> {
    if !arm.is_ternary() {
        return Err(TheoryError::UnsupportedSupport { arm: 0 });
    }
    if budget.is_nan() || budget <= 0.0 {
        return Err(TheoryError::InvalidBudget(budget));
    }
    if arm.mean() <= 0.0 {
        return Ok(1.0);
    }
    let ratio = arm.prob_of(-1.0) / arm.prob_of(1.0);
    Ok(ratio.powf(budget.ceil()))
}

/// Per-arm ruin probabilities with budget share `B/K`.
pub fn per_arm_ruin(instance: &BanditInstance) -> Result<Vec<f64>, TheoryError> {
    let share = instance.budget() / instance.num_arms() as f64;
    instance
        .arms()
        .iter()
        .enumerate()
        .map(|(k, arm)| {
            ruin_prob_constant(arm, share).map_err(|e| match e {
                TheoryError::UnsupportedSupport { .. } => TheoryError::UnsupportedSupport { arm: k },
                other => other,
            })
        })
        .collect()
}

/// `exp(-(B/K) Σ_k γ(F_k))`, the ruin level of the Pareto lower bound with
/// equal budget fractions.
pub fn pareto_ruin_level(instance: &BanditInstance) -> f64 {
    let sum: f64 = instance.arms().iter().map(|a| gamma(a).value()).sum();
    Gamma(sum).decay(instance.budget() / instance.num_arms() as f64)
}

/// `exp(-B Σ_k (1/K - 1/B) γ(F_k))`, the general upper bound on the EXPLOIT
/// ruin probability.
pub fn p_ex_upper_bound(instance: &BanditInstance) -> f64 {
    let b = instance.budget();
    let coeff = b * (1.0 / instance.num_arms() as f64 - 1.0 / b);
    let exponent: f64 = instance
        .arms()
        .iter()
        .map(|a| {
            let g = gamma(a).value();
            if coeff == 0.0 || g == 0.0 {
                0.0
            } else {
                coeff * g
            }
        })
        .sum();
    (-exponent).exp().min(1.0)
}

fn is_multiple_of_arms(instance: &BanditInstance) -> bool {
    let share = instance.budget() / instance.num_arms() as f64;
    share >= 1.0 && share.fract() == 0.0
}

/// Exact ruin probability shared by all EXPLOIT policies.
///
/// Requires arms on `{-1, 0, 1}` and `B` a positive multiple of `K`; otherwise
/// returns [`TheoryError::Unsupported`] carrying the general upper bound.
pub fn p_ex(instance: &BanditInstance) -> Result<f64, TheoryError> {
    let reason = if !instance.arms().iter().all(ArmSpec::is_ternary) {
        Some("arm support is not within {-1, 0, 1}")
    } else if !is_multiple_of_arms(instance) {
        Some("budget is not a positive integer multiple of the number of arms")
    } else {
        None
    };
    if let Some(reason) = reason {
        return Err(TheoryError::Unsupported {
            reason: reason.to_string(),
            upper_bound: p_ex_upper_bound(instance),
        });
    }
    Ok(per_arm_ruin(instance)?.iter().product())
}

/// Long-run pull shares of EXPLOIT policies given survival.
#[derive(Debug, Clone, PartialEq)]
pub struct ExploitWeights {
    /// Arm indices sorted by decreasing mean (ties by index).
    pub order: Vec<usize>,
    /// `w_k`, indexed by original arm index.
    pub weights: Vec<f64>,
}

/// `w_k = P(survive_k) Π_{j before k} P(ruin_j) / (1 - p_ex)` with arms taken in
/// decreasing-mean order.
pub fn exploit_weights(instance: &BanditInstance) -> Result<ExploitWeights, TheoryError> {
    let p = p_ex(instance)?;
    if p >= 1.0 {
        return Err(TheoryError::Degenerate);
    }
    let ruin = per_arm_ruin(instance)?;
    let mut order: Vec<usize> = (0..instance.num_arms()).collect();
    order.sort_by(|&a, &b| {
        instance.arms()[b]
            .mean()
            .total_cmp(&instance.arms()[a].mean())
            .then(a.cmp(&b))
    });
    let mut weights = vec![0.0; instance.num_arms()];
    let mut prefix = 1.0;
    for &k in &order {
        weights[k] = (1.0 - ruin[k]) * prefix / (1.0 - p);
        prefix *= ruin[k];
    }
    Ok(ExploitWeights { order, weights })
}

/// `(1 - exp(-(B/K) Σ γ_k)) · max_k μ_k`, the per-step reward of the
/// survival-regret reference.
pub fn sreg_coefficient(instance: &BanditInstance) -> f64 {
    (1.0 - pareto_ruin_level(instance)) * instance.best_mean()
}

/// Survival-regret baseline reward over `horizon` steps.
pub fn sreg_baseline_at(instance: &BanditInstance, horizon: u64) -> f64 {
    if horizon == 0 {
        return 0.0;
    }
    sreg_coefficient(instance) * horizon as f64
}

/// Survival-regret baseline reward at the instance horizon.
pub fn sreg_baseline(instance: &BanditInstance) -> f64 {
    sreg_baseline_at(instance, instance.horizon())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuinReport {
    pub gammas: Vec<Gamma>,
    pub per_arm_ruin: Vec<f64>,
    pub p_ex: f64,
    pub weights: Vec<f64>,
    pub sreg_baseline_coeff: f64,
}

impl RuinReport {
    pub fn compute(instance: &BanditInstance) -> Result<Self, TheoryError> {
        Ok(Self {
            gammas: instance.arms().iter().map(gamma).collect(),
            per_arm_ruin: per_arm_ruin(instance)?,
            p_ex: p_ex(instance)?,
            weights: exploit_weights(instance)?.weights,
            sreg_baseline_coeff: sreg_coefficient(instance),
        })
    }

    /// Flat `key=value` lines, numbers with 12 significant digits.
    pub fn key_values(&self, prefix: &str) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for (k, g) in self.gammas.iter().enumerate() {
            let v = if g.is_infinite() {
                "inf".to_string()
            } else {
                fmt_sig(g.value(), 12)
            };
            out.push((format!("{prefix}gamma.{}", k + 1), v));
        }
        for (k, r) in self.per_arm_ruin.iter().enumerate() {
            out.push((format!("{prefix}ruin.{}", k + 1), fmt_sig(*r, 12)));
        }
        out.push((format!("{prefix}p_ex"), fmt_sig(self.p_ex, 12)));
        for (k, w) in self.weights.iter().enumerate() {
            out.push((format!("{prefix}weight.{}", k + 1), fmt_sig(*w, 12)));
        }
        out.push((
            format!("{prefix}sreg_baseline_coeff"),
            fmt_sig(self.sreg_baseline_coeff, 12),
        ));
        out
    }
}
