use std::fmt;
use std::io::Write;
use std::path::Path;

use log::{debug, info};
use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::SubtractionConfig;
use crate::error::{shape_err, Error, Result};
use crate::mi::{train_on_assembled, Block, Critic};
use crate::numerics::checkpoint::save_mlp;
use crate::numerics::{mse, Matrix, Mlp, Optimizer, Standardizer};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Pretrain,
    Subtract,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Pretrain => "pretrain",
            Stage::Subtract => "subtract",
        })
    }
}

/// One row of the training trace. Estimates are the mean over that epoch's
/// critic steps and are absent when no critic step ran.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub stage: Stage,
    pub recon_loss: Option<f64>,
    pub mi_full_nats: Option<f64>,
    pub mi_leak_nats: Option<f64>,
    pub l2: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsTrace {
    pub records: Vec<EpochRecord>,
}

pub const TRACE_HEADER: [&str; 6] = [
    "epoch",
    "stage",
    "recon_loss",
    "mi_full_nats",
    "mi_leak_nats",
    "l2",
];

fn opt_field(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl EpochRecord {
    pub fn csv_fields(&self) -> [String; 6] {
        [
            self.epoch.to_string(),
            self.stage.to_string(),
            opt_field(self.recon_loss),
            opt_field(self.mi_full_nats),
            opt_field(self.mi_leak_nats),
            opt_field(self.l2),
        ]
    }
}

impl DiagnosticsTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&EpochRecord> {
        self.records.last()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(TRACE_HEADER)?;
        for r in &self.records {
            out.write_record(r.csv_fields())?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    /// `λ·leak − full` per subtraction epoch, where both estimates exist.
    pub fn objective_series(&self, lambda: f64) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.stage == Stage::Subtract)
            .filter_map(|r| Some(lambda * r.mi_leak_nats? - r.mi_full_nats?))
            .collect()
    }
}

/// Generator, reconstructor and the two critics of one run, with the
/// training state needed to continue it.
///
/// Naming follows the objective: `x` is the conditioning variable whose
/// information must be removed and `y` is the source the generator reads.
/// The full critic scores `(y, x, z)`, the leak critic `(x, z)`.
#[derive(Debug)]
pub struct Subtractor {
    config: SubtractionConfig,
    generator: Mlp,
    reconstructor: Mlp,
    critic_full: Critic,
    critic_leak: Critic,
    x_scale: Standardizer,
    y_scale: Standardizer,
    opt_generator: Optimizer,
    opt_reconstructor: Optimizer,
    opt_full: Optimizer,
    opt_leak: Optimizer,
    rng: ChaCha8Rng,
    epoch: usize,
    trace: DiagnosticsTrace,
}

/// Alias used where a finished run is handed around.
pub type TrainedSubtractor = Subtractor;

fn dims(input: usize, hidden: &[usize], output: usize) -> Vec<usize> {
    let mut d = vec![input];
    d.extend_from_slice(hidden);
    d.push(output);
    d
}

impl Subtractor {
    /// Fresh networks; standardization statistics are fitted on `x` and `y`.
    pub fn new(config: SubtractionConfig, x: &Matrix, y: &Matrix) -> Result<Self> {
        let problems = config.validate();
        if !problems.is_empty() {
            return Err(Error::InvalidArgument(problems.join("; ")));
        }
        if x.rows() != y.rows() {
            return Err(shape_err(
                "Subtractor::new",
                format!("{} rows", y.rows()),
                format!("{} rows", x.rows()),
            ));
        }
        if x.rows() < 2 || x.cols() == 0 || y.cols() == 0 {
            return Err(Error::Empty(
                "subtraction needs at least 2 rows and non-empty variables".into(),
            ));
        }
        let s = config.seed;
        let act = config.activation;
        let (dx, dy, dz) = (x.cols(), y.cols(), config.z_dim);
        let generator = Mlp::new(&dims(dy, &config.generator_dims, dz), act, s.derive(1))?;
        let reconstructor = Mlp::new(&dims(dz, &config.generator_dims, dy), act, s.derive(2))?;
        let critic_full = Critic::new(
            vec![
                Block::new("y", dy),
                Block::new("x", dx),
                Block::new("z", dz),
            ],
            &config.discriminator_dims,
            act,
            s.derive(3),
        )?;
        let critic_leak = Critic::new(
            vec![Block::new("x", dx), Block::new("z", dz)],
            &config.discriminator_dims,
            act,
            s.derive(4),
        )?;
        let opt = |lr: f64| Optimizer::adam(lr).and_then(|o| o.with_clip_norm(config.clip_norm));
        Ok(Self {
            opt_generator: opt(config.lr_generator)?,
            opt_reconstructor: opt(config.lr_generator)?,
            opt_full: opt(config.lr_discriminator)?,
            opt_leak: opt(config.lr_discriminator)?,
            rng: s.derive(5).rng(),
            x_scale: Standardizer::fit(x),
            y_scale: Standardizer::fit(y),
            generator,
            reconstructor,
            critic_full,
            critic_leak,
            config,
            epoch: 0,
            trace: DiagnosticsTrace::default(),
        })
    }

    pub fn config(&self) -> &SubtractionConfig {
        &self.config
    }

    pub fn generator(&self) -> &Mlp {
        &self.generator
    }

    pub fn generator_mut(&mut self) -> &mut Mlp {
        &mut self.generator
    }

    pub fn reconstructor(&self) -> &Mlp {
        &self.reconstructor
    }

    pub fn critic_full(&self) -> &Critic {
        &self.critic_full
    }

    pub fn critic_leak(&self) -> &Critic {
        &self.critic_leak
    }

    pub fn trace(&self) -> &DiagnosticsTrace {
        &self.trace
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub fn stage(&self) -> Stage {
        if self.epoch < self.config.n1 {
            Stage::Pretrain
        } else {
            Stage::Subtract
        }
    }

    pub fn x_dim(&self) -> usize {
        self.x_scale.dim()
    }

    pub fn y_dim(&self) -> usize {
        self.y_scale.dim()
    }

    /// `z = generator(standardized y)`; deterministic.
    pub fn generate_representation(&self, y: &Matrix) -> Result<Matrix> {
        self.generator.predict(&self.y_scale.apply(y)?)
    }

    /// One joint step on generator and reconstructor minimizing the mean
    /// squared reconstruction error of standardized `y`.
    pub fn pretrain_step(&mut self, y_batch: &Matrix) -> Result<f64> {
        let ys = self.y_scale.apply(y_batch)?;
        let (z, gen_cache) = self.generator.forward(&ys)?;
        let (recon, rec_cache) = self.reconstructor.forward(&z)?;
        let (loss, grad) = mse(&recon, &ys)?;
        if !loss.is_finite() {
            return Err(Error::NonFinite("reconstruction loss".into()));
        }
        let (rec_grads, z_grad) = self.reconstructor.backward(&rec_cache, &grad)?;
        let (gen_grads, _) = self.generator.backward(&gen_cache, &z_grad)?;
        self.opt_reconstructor
            .step(&mut self.reconstructor, &rec_grads)?;
        self.opt_generator.step(&mut self.generator, &gen_grads)?;
        Ok(loss)
    }

    fn check_batch(&self, x: &Matrix, y: &Matrix) -> Result<()> {
        if x.rows() != y.rows() {
            return Err(shape_err(
                "subtraction batch",
                format!("{} rows", y.rows()),
                format!("{} rows", x.rows()),
            ));
        }
        if x.rows() < 2 {
            return Err(Error::Empty(
                "subtraction batch needs at least 2 rows".into(),
            ));
        }
        Ok(())
    }

    fn permuted(&mut self, m: &Matrix) -> Matrix {
        let mut idx: Vec<usize> = (0..m.rows()).collect();
        idx.shuffle(&mut self.rng);
        m.select_rows(&idx)
    }

    /// One generator step on `λ·Î(x;z) − Î(y;x,z)` with both critics held
    /// fixed. Returns the objective value before the step.
    pub fn subtraction_step(
        &mut self,
        x_batch: &Matrix,
        y_batch: &Matrix,
        lambda: f64,
    ) -> Result<f64> {
        self.check_batch(x_batch, y_batch)?;
        let xs = self.x_scale.apply(x_batch)?;
        let ys = self.y_scale.apply(y_batch)?;
        let (z, gen_cache) = self.generator.forward(&ys)?;
        let y_shuf = self.permuted(&ys);
        let x_shuf = self.permuted(&xs);
        let tau = Some(self.config.tau);

        let full = self.critic_full.pass(
            &Matrix::hcat(&[&ys, &xs, &z])?,
            &Matrix::hcat(&[&y_shuf, &xs, &z])?,
            tau,
            false,
            true,
        )?;
        let leak = self.critic_leak.pass(
            &Matrix::hcat(&[&xs, &z])?,
            &Matrix::hcat(&[&x_shuf, &z])?,
            tau,
            false,
            true,
        )?;
        let l2 = lambda * leak.estimate - full.estimate;
        if !l2.is_finite() {
            return Err(Error::NonFinite("generator objective".into()));
        }
        let z_cols = |g: Option<Matrix>| -> Matrix {
            let g = g.expect("requested");
            g.select_cols(g.cols() - z.cols(), g.cols())
        };
        let full_z = z_cols(full.joint_input_grad).add(&z_cols(full.marginal_input_grad))?;
        let leak_z = z_cols(leak.joint_input_grad).add(&z_cols(leak.marginal_input_grad))?;
        let z_grad = leak_z.scale(lambda).sub(&full_z)?;
        let (gen_grads, _) = self.generator.backward(&gen_cache, &z_grad)?;
        self.opt_generator.step(&mut self.generator, &gen_grads)?;
        Ok(l2)
    }

    /// One maximizing step for each critic on the clipped bound, with `z`
    /// taken from the current generator and not differentiated. Returns
    /// the losses (negated estimates) seen before the step.
    pub fn discriminator_step(&mut self, x_batch: &Matrix, y_batch: &Matrix) -> Result<(f64, f64)> {
        self.check_batch(x_batch, y_batch)?;
        let xs = self.x_scale.apply(x_batch)?;
        let ys = self.y_scale.apply(y_batch)?;
        let z = self.generator.predict(&ys)?;
        let y_shuf = self.permuted(&ys);
        let x_shuf = self.permuted(&xs);
        let tau = Some(self.config.tau);
        let full = train_on_assembled(
            &mut self.critic_full,
            &Matrix::hcat(&[&ys, &xs, &z])?,
            &Matrix::hcat(&[&y_shuf, &xs, &z])?,
            &mut self.opt_full,
            tau,
        )?;
        let leak = train_on_assembled(
            &mut self.critic_leak,
            &Matrix::hcat(&[&xs, &z])?,
            &Matrix::hcat(&[&x_shuf, &z])?,
            &mut self.opt_leak,
            tau,
        )?;
        Ok((-full, -leak))
    }

    fn batch_indices(&mut self, n: usize) -> Vec<usize> {
        if n <= self.config.batch_size {
            (0..n).collect()
        } else {
            sample(&mut self.rng, n, self.config.batch_size).into_vec()
        }
    }

    /// One outer epoch: a generator (or pretraining) step followed by `n3`
    /// critic steps on fresh batches.
    pub fn run_epoch(&mut self, x: &Matrix, y: &Matrix) -> Result<&EpochRecord> {
        self.check_batch(x, y)?;
        let stage = self.stage();
        let idx = self.batch_indices(x.rows());
        let (xb, yb) = (x.select_rows(&idx), y.select_rows(&idx));
        let mut rec = EpochRecord {
            epoch: self.epoch,
            stage,
            recon_loss: None,
            mi_full_nats: None,
            mi_leak_nats: None,
            l2: None,
        };
        match stage {
            Stage::Pretrain => rec.recon_loss = Some(self.pretrain_step(&yb)?),
            Stage::Subtract => {
                rec.l2 = Some(self.subtraction_step(&xb, &yb, self.config.lambda)?)
            }
        }
        let n3 = self.config.n3;
        if n3 > 0 {
            let (mut full, mut leak) = (0.0, 0.0);
            for _ in 0..n3 {
                let idx = self.batch_indices(x.rows());
                let (lf, ll) =
                    self.discriminator_step(&x.select_rows(&idx), &y.select_rows(&idx))?;
                full -= lf;
                leak -= ll;
            }
            rec.mi_full_nats = Some(full / n3 as f64);
            rec.mi_leak_nats = Some(leak / n3 as f64);
        }
        debug!(
            "epoch {} {} recon={} full={} leak={} l2={}",
            rec.epoch,
            rec.stage,
            opt_field(rec.recon_loss),
            opt_field(rec.mi_full_nats),
            opt_field(rec.mi_leak_nats),
            opt_field(rec.l2)
        );
        self.epoch += 1;
        self.trace.records.push(rec);
        Ok(self.trace.records.last().expect("just pushed"))
    }

    /// Writes every network in the checkpoint format plus the
    /// standardization statistics as JSON.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        save_mlp(&self.generator, dir.join("generator.bin"))?;
        save_mlp(&self.reconstructor, dir.join("reconstructor.bin"))?;
        save_mlp(self.critic_full.model(), dir.join("critic_full.bin"))?;
        save_mlp(self.critic_leak.model(), dir.join("critic_leak.bin"))?;
        let scales = serde_json::json!({ "x": self.x_scale, "y": self.y_scale });
        std::fs::write(
            dir.join("standardization.json"),
            serde_json::to_string_pretty(&scales)?,
        )?;
        Ok(())
    }

    /// Restores generator weights from a checkpoint written by [`Subtractor::save`].
    pub fn load_generator(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let m = crate::numerics::checkpoint::load_mlp(path)?;
        if m.dims() != self.generator.dims() {
            return Err(shape_err(
                "load_generator",
                format!("{:?}", self.generator.dims()),
                format!("{:?}", m.dims()),
            ));
        }
        self.generator = m;
        Ok(())
    }
}

/// Full run: `n1` pretraining epochs, then subtraction until `n2`, with
/// the critics trained in every epoch.
pub fn train_information_subtraction(
    config: &SubtractionConfig,
    x: &Matrix,
    y: &Matrix,
) -> Result<Subtractor> {
    let mut s = Subtractor::new(config.clone(), x, y)?;
    let every = (config.n2 / 20).max(1);
    for e in 0..config.n2 {
        let r = s.run_epoch(x, y)?;
        if e % every == 0 || e + 1 == config.n2 {
            info!(
                "epoch {}/{} {} recon={} full={} leak={} l2={}",
                e + 1,
                config.n2,
                r.stage,
                opt_field(r.recon_loss),
                opt_field(r.mi_full_nats),
                opt_field(r.mi_leak_nats),
                opt_field(r.l2)
            );
        }
    }
    Ok(s)
}

/// Gradient-set helper for tests that compare parameters bitwise.
#[cfg(test)]
pub(crate) fn parameters_of(m: &Mlp) -> Vec<f64> {
    let mut g = crate::numerics::GradientSet::zeros_like(m);
    for (w, src) in g.weights.iter_mut().zip(m.weights()) {
        *w = src.clone();
    }
    for (b, src) in g.biases.iter_mut().zip(m.biases()) {
        *b = src.clone();
    }
    g.values().collect()
}
