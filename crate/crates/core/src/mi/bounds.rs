//! Donsker-Varadhan lower bound on critic scores, optionally with the
//! partition term's exponentials clamped to `[e^-τ, e^τ]`.
//!
//! `J = mean(T_joint) - ln mean(clamp(e^T_marginal))`
//!
//! The Jensen-Shannon (f-GAN) bound supplies the training gradients of
//! the clipped estimator: the clipped DV value alone rewards pushing joint
//! scores upward without limit once the marginal scores saturate.

use crate::error::{Error, Result};

/// Value of the bound together with `dJ/dT` for every score.
#[derive(Debug, Clone)]
pub struct BoundEval {
    pub value: f64,
    pub joint_grad: Vec<f64>,
    pub marginal_grad: Vec<f64>,
}

fn check_scores(joint: &[f64], marginal: &[f64]) -> Result<()> {
    if joint.is_empty() || marginal.is_empty() {
        return Err(Error::Empty("critic score batch".into()));
    }
    if joint.iter().chain(marginal).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("critic scores".into()));
    }
    Ok(())
}

fn check_tau(tau: Option<f64>) -> Result<()> {
    match tau {
        Some(t) if !(t > 0.0) => Err(Error::InvalidArgument(format!(
            "tau must be positive, got {t}"
        ))),
        _ => Ok(()),
    }
}

/// `ln Σ w_i e^{s_i}` computed with max subtraction.
fn log_sum_exp_weighted(scores: &[f64], weights: &[f64]) -> f64 {
    let m = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = scores
        .iter()
        .zip(weights)
        .map(|(&t, &w)| w * (t - m).exp())
        .sum();
    m + s.ln()
}

/// Clipped DV bound with uniform sample weights. `tau = None` is plain DV.
pub fn dv_bound(joint: &[f64], marginal: &[f64], tau: Option<f64>) -> Result<BoundEval> {
    let wj = vec![1.0 / joint.len().max(1) as f64; joint.len()];
    let wm = vec![1.0 / marginal.len().max(1) as f64; marginal.len()];
    dv_bound_weighted(joint, &wj, marginal, &wm, tau)
}

/// Clipped DV bound where each score carries a probability weight; with
/// weights from an exact enumeration this is the population bound.
pub fn dv_bound_weighted(
    joint: &[f64],
    joint_weights: &[f64],
    marginal: &[f64],
    marginal_weights: &[f64],
    tau: Option<f64>,
) -> Result<BoundEval> {
    check_scores(joint, marginal)?;
    check_tau(tau)?;
    if joint.len() != joint_weights.len() || marginal.len() != marginal_weights.len() {
        return Err(Error::InvalidArgument(
            "one weight per score required".into(),
        ));
    }
    let wj_sum: f64 = joint_weights.iter().sum();
    let wm_sum: f64 = marginal_weights.iter().sum();
    if !(wj_sum > 0.0 && wm_sum > 0.0) {
        return Err(Error::InvalidArgument(
            "weights must have positive mass".into(),
        ));
    }

    let first: f64 = joint
        .iter()
        .zip(joint_weights)
        .map(|(t, w)| t * w)
        .sum::<f64>()
        / wj_sum;
    // Clamping e^T to [e^-τ, e^τ] is clamping T to [-τ, τ].
    let clipped: Vec<f64> = match tau {
        Some(t) => marginal.iter().map(|&s| s.clamp(-t, t)).collect(),
        None => marginal.to_vec(),
    };
    let norm_w: Vec<f64> = marginal_weights.iter().map(|w| w / wm_sum).collect();
    let log_partition = log_sum_exp_weighted(&clipped, &norm_w);

    let joint_grad = joint_weights.iter().map(|w| w / wj_sum).collect();
    let marginal_grad = marginal
        .iter()
        .zip(&clipped)
        .zip(&norm_w)
        .map(|((&raw, &c), &w)| {
            let active = tau.is_none_or(|t| raw > -t && raw < t);
            if active {
                -w * (c - log_partition).exp()
            } else {
                0.0
            }
        })
        .collect();

    Ok(BoundEval {
        value: first - log_partition,
        joint_grad,
        marginal_grad,
    })
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `mean(−softplus(−T_joint)) − mean(softplus(T_marginal))`. Maximized by
/// the log density ratio, the same critic that makes DV tight.
pub fn js_bound(joint: &[f64], marginal: &[f64]) -> Result<BoundEval> {
    check_scores(joint, marginal)?;
    let (nj, nm) = (joint.len() as f64, marginal.len() as f64);
    let value = -joint.iter().map(|&t| softplus(-t)).sum::<f64>() / nj
        - marginal.iter().map(|&t| softplus(t)).sum::<f64>() / nm;
    Ok(BoundEval {
        value,
        joint_grad: joint.iter().map(|&t| sigmoid(-t) / nj).collect(),
        marginal_grad: marginal.iter().map(|&t| -sigmoid(t) / nm).collect(),
    })
}
