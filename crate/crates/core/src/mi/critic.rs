use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::bounds::{dv_bound, dv_bound_weighted, js_bound};
use super::{EstimatorKind, MiEstimate};
use crate::error::{shape_err, Error, Result};
use crate::numerics::{Activation, GradientSet, Matrix, Mlp, Optimizer, Seed};

/// Named input block of a critic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub name: String,
    pub dim: usize,
}

impl Block {
    pub fn new(name: impl Into<String>, dim: usize) -> Self {
        Self {
            name: name.into(),
            dim,
        }
    }
}

/// Scalar-valued network over the concatenation of its input blocks.
#[derive(Debug, Clone)]
pub struct Critic {
    model: Mlp,
    blocks: Vec<Block>,
}

/// Everything one critic evaluation produces for a training step.
#[derive(Debug)]
pub struct CriticPass {
    pub estimate: f64,
    /// Gradient of the training objective (not the loss) w.r.t. critic
    /// parameters. Plain DV when `tau` is `None`, otherwise the
    /// Jensen-Shannon surrogate used by the clipped estimator.
    pub param_grads: Option<GradientSet>,
    /// Gradient of the estimate w.r.t. the joint input matrix.
    pub joint_input_grad: Option<Matrix>,
    /// Gradient of the estimate w.r.t. the marginal input matrix.
    pub marginal_input_grad: Option<Matrix>,
}

impl Critic {
    pub fn new(
        blocks: Vec<Block>,
        hidden: &[usize],
        activation: Activation,
        seed: Seed,
    ) -> Result<Self> {
        if blocks.is_empty() || blocks.iter().any(|b| b.dim == 0) {
            return Err(Error::InvalidArgument(
                "critic needs non-empty input blocks".into(),
            ));
        }
        let input: usize = blocks.iter().map(|b| b.dim).sum();
        let mut dims = vec![input];
        dims.extend_from_slice(hidden);
        dims.push(1);
        Ok(Self {
            model: Mlp::new(&dims, activation, seed)?,
            blocks,
        })
    }

    /// Wraps an existing model; its input width must equal the block total.
    pub fn from_model(model: Mlp, blocks: Vec<Block>) -> Result<Self> {
        let input: usize = blocks.iter().map(|b| b.dim).sum();
        if model.input_dim() != input || model.output_dim() != 1 {
            return Err(shape_err(
                "Critic::from_model",
                format!("{input} -> 1"),
                format!("{} -> {}", model.input_dim(), model.output_dim()),
            ));
        }
        Ok(Self { model, blocks })
    }

    pub fn model(&self) -> &Mlp {
        &self.model
    }

    pub fn model_mut(&mut self) -> &mut Mlp {
        &mut self.model
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn input_dim(&self) -> usize {
        self.model.input_dim()
    }

    /// Concatenates per-block batches after checking them against the blocks.
    pub fn assemble(&self, parts: &[&Matrix]) -> Result<Matrix> {
        if parts.len() != self.blocks.len() {
            return Err(shape_err(
                "Critic::assemble",
                self.blocks.len(),
                parts.len(),
            ));
        }
        for (b, p) in self.blocks.iter().zip(parts) {
            if p.cols() != b.dim {
                return Err(shape_err(
                    "Critic::assemble",
                    format!("block {} with {} cols", b.name, b.dim),
                    format!("{} cols", p.cols()),
                ));
            }
        }
        Matrix::hcat(parts)
    }

    /// Critic scores `T` for each row of an assembled input.
    pub fn scores(&self, input: &Matrix) -> Result<Vec<f64>> {
        Ok(self.model.predict(input)?.into_data())
    }

    /// Estimate and requested gradients for assembled joint / marginal
    /// inputs. With `tau` set the estimate is the clipped DV value and the
    /// parameter gradients follow the Jensen-Shannon bound; input gradients
    /// are always those of the estimate.
    pub fn pass(
        &self,
        joint: &Matrix,
        marginal: &Matrix,
        tau: Option<f64>,
        want_params: bool,
        want_inputs: bool,
    ) -> Result<CriticPass> {
        let (tj, cj) = self.model.forward(joint)?;
        let (tm, cm) = self.model.forward(marginal)?;
        let dv = dv_bound(tj.data(), tm.data(), tau)?;
        let mut out = CriticPass {
            estimate: dv.value,
            param_grads: None,
            joint_input_grad: None,
            marginal_input_grad: None,
        };
        let column = |g: Vec<f64>| Matrix::from_raw(g.len(), 1, g);
        if want_params {
            let train = if tau.is_some() {
                js_bound(tj.data(), tm.data())?
            } else {
                dv.clone()
            };
            let (mut pj, _) = self.model.backward(&cj, &column(train.joint_grad))?;
            let (pm, _) = self.model.backward(&cm, &column(train.marginal_grad))?;
            pj.add_assign(&pm)?;
            out.param_grads = Some(pj);
        }
        if want_inputs {
            out.joint_input_grad = Some(self.model.input_gradient(&cj, &column(dv.joint_grad))?);
            out.marginal_input_grad =
                Some(self.model.input_gradient(&cm, &column(dv.marginal_grad))?);
        }
        Ok(out)
    }
}

/// Returns `batch_b` with its rows uniformly permuted, breaking the pairing
/// with `batch_a`.
pub fn shuffle_marginal<R: Rng + ?Sized>(
    batch_a: &Matrix,
    batch_b: &Matrix,
    rng: &mut R,
) -> Result<Matrix> {
    if batch_a.rows() != batch_b.rows() {
        return Err(shape_err(
            "shuffle_marginal",
            batch_a.rows(),
            batch_b.rows(),
        ));
    }
    let mut idx: Vec<usize> = (0..batch_b.rows()).collect();
    idx.shuffle(rng);
    Ok(batch_b.select_rows(&idx))
}

fn estimate_from(value: f64, batch: usize, kind: EstimatorKind) -> MiEstimate {
    MiEstimate::from_nats(value, batch, kind)
}

/// Donsker-Varadhan estimate from per-block joint and marginal batches.
pub fn dv_estimate(critic: &Critic, joint: &[&Matrix], marginal: &[&Matrix]) -> Result<MiEstimate> {
    let j = critic.assemble(joint)?;
    let m = critic.assemble(marginal)?;
    if j.rows() == 0 || m.rows() == 0 {
        return Err(Error::Empty("dv_estimate batch".into()));
    }
    let v = dv_bound(&critic.scores(&j)?, &critic.scores(&m)?, None)?.value;
    Ok(estimate_from(v, j.rows(), EstimatorKind::Dv))
}

/// DV estimate where rows carry probability weights (exact enumeration).
pub fn dv_estimate_weighted(
    critic: &Critic,
    joint: &[&Matrix],
    joint_weights: &[f64],
    marginal: &[&Matrix],
    marginal_weights: &[f64],
) -> Result<MiEstimate> {
    let j = critic.assemble(joint)?;
    let m = critic.assemble(marginal)?;
    let v = dv_bound_weighted(
        &critic.scores(&j)?,
        joint_weights,
        &critic.scores(&m)?,
        marginal_weights,
        None,
    )?
    .value;
    Ok(estimate_from(v, j.rows(), EstimatorKind::Dv))
}

/// Clipped-partition (SMILE) estimate.
pub fn smile_estimate(
    critic: &Critic,
    joint: &[&Matrix],
    marginal: &[&Matrix],
    tau: f64,
) -> Result<MiEstimate> {
    if !(tau > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tau must be positive, got {tau}"
        )));
    }
    let j = critic.assemble(joint)?;
    let m = critic.assemble(marginal)?;
    if j.rows() == 0 || m.rows() == 0 {
        return Err(Error::Empty("smile_estimate batch".into()));
    }
    let v = dv_bound(&critic.scores(&j)?, &critic.scores(&m)?, Some(tau))?.value;
    Ok(estimate_from(v, j.rows(), EstimatorKind::Smile))
}

/// One optimizer step on the critic for the clipped estimator (gradients
/// from the Jensen-Shannon bound). Returns the estimate seen by this step, measured
/// before the update.
pub fn critic_train_step(
    critic: &mut Critic,
    joint: &[&Matrix],
    marginal: &[&Matrix],
    opt: &mut Optimizer,
    tau: f64,
) -> Result<f64> {
    let j = critic.assemble(joint)?;
    let m = critic.assemble(marginal)?;
    train_on_assembled(critic, &j, &m, opt, Some(tau))
}

pub(crate) fn train_on_assembled(
    critic: &mut Critic,
    joint: &Matrix,
    marginal: &Matrix,
    opt: &mut Optimizer,
    tau: Option<f64>,
) -> Result<f64> {
    let pass = critic.pass(joint, marginal, tau, true, false)?;
    if !pass.estimate.is_finite() {
        return Err(Error::NonFinite("critic loss".into()));
    }
    let mut g = pass.param_grads.expect("requested");
    g.scale(-1.0);
    opt.step(&mut critic.model, &g)?;
    Ok(pass.estimate)
}
