use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{Dataset, Role};
use crate::error::{Error, Result};
use crate::numerics::{Matrix, Seed};

/// Lotka-Volterra parameters for wolves (W), sheep (S), rabbits (R) and
/// grass (G), iterated with the discrete map
/// `X ← X + X·(rate terms)/Δt`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LvParams {
    pub w0: f64,
    pub s0: f64,
    pub r0: f64,
    pub g0: f64,
    pub a: [f64; 3],
    pub b: [f64; 3],
    pub c: [f64; 3],
    pub d: [f64; 3],
    pub delta_t: f64,
    pub steps: usize,
}

impl Default for LvParams {
    fn default() -> Self {
        Self {
            w0: 9.0,
            s0: 10.0,
            r0: 10.0,
            g0: 100.0,
            a: [9.0, 0.3, 0.1],
            b: [2.0, 0.2, 0.6],
            c: [3.0, 0.2, 0.8],
            d: [23.0, 0.6, 0.3],
            delta_t: 800.0,
            steps: 1500,
        }
    }
}

/// Population state `(W, S, R, G)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LvState {
    pub w: f64,
    pub s: f64,
    pub r: f64,
    pub g: f64,
}

impl LvParams {
    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        if ![self.w0, self.s0, self.r0, self.g0]
            .iter()
            .all(|p| *p > 0.0 && p.is_finite())
        {
            v.push("lotka_volterra initial populations must be positive".into());
        }
        if !(self.delta_t > 0.0 && self.delta_t.is_finite()) {
            v.push("lotka_volterra.delta_t must be positive".into());
        }
        if self.steps == 0 {
            v.push("lotka_volterra.steps must be at least 1".into());
        }
        v
    }

    pub fn initial(&self) -> LvState {
        LvState {
            w: self.w0,
            s: self.s0,
            r: self.r0,
            g: self.g0,
        }
    }

    /// One application of the discrete update.
    pub fn step(&self, x: LvState) -> LvState {
        let k = 1.0 / self.delta_t;
        let [a0, a1, a2] = self.a;
        let [b0, b1, b2] = self.b;
        let [c0, c1, c2] = self.c;
        let [d0, d1, d2] = self.d;
        LvState {
            w: x.w + k * x.w * (-a0 + a1 * x.s + a2 * x.r),
            s: x.s + k * x.s * (b0 - b1 * x.w + b2 * x.g),
            r: x.r + k * x.r * (c0 - c1 * x.w + c2 * x.g),
            g: x.g + k * x.g * (d0 - d1 * x.s - d2 * x.r),
        }
    }
}

/// Runs the map for `params.steps` rows (row 0 is the initial state).
/// Columns: W, S, R, G, t.
pub fn simulate_lotka_volterra(params: &LvParams) -> Result<Dataset> {
    let problems = params.validate();
    if !problems.is_empty() {
        return Err(Error::InvalidArgument(problems.join("; ")));
    }
    let mut cols: [Vec<f64>; 5] = Default::default();
    let mut x = params.initial();
    for t in 0..params.steps {
        if t > 0 {
            x = params.step(x);
        }
        for (name, v) in [("W", x.w), ("S", x.s), ("R", x.r), ("G", x.g)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Diverged {
                    step: t,
                    reason: format!("population {name} = {v}"),
                });
            }
        }
        cols[0].push(x.w);
        cols[1].push(x.s);
        cols[2].push(x.r);
        cols[3].push(x.g);
        cols[4].push(t as f64);
    }
    let [w, s, r, g, t] = cols;
    Dataset::from_continuous(vec![
        ("W", Role::Feature, w),
        ("S", Role::Feature, s),
        ("R", Role::Feature, r),
        ("G", Role::Target, g),
        ("t", Role::Ignore, t),
    ])
}

/// Researchers from three countries: `Y = V·W` where only the training
/// experience `W` depends on the country `X`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FairSynthConfig {
    pub n: usize,
    pub priors: [f64; 3],
    pub w_means: [f64; 3],
    pub w_stds: [f64; 3],
    /// `V ~ N(v_mean, v_std)` truncated to positive values.
    pub v_mean: f64,
    pub v_std: f64,
}

impl Default for FairSynthConfig {
    fn default() -> Self {
        Self {
            n: 1500,
            priors: [1.0 / 3.0; 3],
            w_means: [0.7, 0.5, 0.3],
            w_stds: [0.05, 0.1, 0.07],
            v_mean: 1.0,
            v_std: 0.2,
        }
    }
}

impl FairSynthConfig {
    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.n == 0 {
            v.push("fair_synth.n must be positive".into());
        }
        if self.priors.iter().any(|p| *p < 0.0)
            || (self.priors.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            v.push("fair_synth.priors must be non-negative and sum to 1".into());
        }
        if self.w_stds.iter().any(|s| !(*s > 0.0)) || !(self.v_std > 0.0) {
            v.push("fair_synth standard deviations must be positive".into());
        }
        if !(self.v_mean > 0.0) {
            v.push("fair_synth.v_mean must be positive".into());
        }
        v
    }
}

/// Columns: X (protected country index), V (feature), W, Y (target).
pub fn gen_fair_synthetic(config: &FairSynthConfig, seed: Seed) -> Result<Dataset> {
    let problems = config.validate();
    if !problems.is_empty() {
        return Err(Error::InvalidArgument(problems.join("; ")));
    }
    let mut rng = seed.rng();
    let v_dist = Normal::new(config.v_mean, config.v_std)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let (mut xs, mut vs, mut ws, mut ys) = (vec![], vec![], vec![], vec![]);
    for _ in 0..config.n {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut country = 2;
        for (i, p) in config.priors.iter().enumerate() {
            acc += p;
            if u < acc {
                country = i;
                break;
            }
        }
        let z: f64 = StandardNormal.sample(&mut rng);
        let w = config.w_means[country] + config.w_stds[country] * z;
        let v = loop {
            let v = v_dist.sample(&mut rng);
            if v > 0.0 {
                break v;
            }
        };
        xs.push(country as f64);
        vs.push(v);
        ws.push(w);
        ys.push(v * w);
    }
    Dataset::from_continuous(vec![
        ("X", Role::Protected, xs),
        ("V", Role::Feature, vs),
        ("W", Role::Ignore, ws),
        ("Y", Role::Target, ys),
    ])
}

/// `dim` independent bivariate normal pairs with correlation `rho`.
pub fn gen_correlated_gaussians(
    n: usize,
    rho: f64,
    dim: usize,
    seed: Seed,
) -> Result<(Matrix, Matrix)> {
    if !(rho.abs() < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "|rho| must be < 1, got {rho}"
        )));
    }
    if dim == 0 {
        return Err(Error::InvalidArgument("dim must be positive".into()));
    }
    let mut rng = seed.rng();
    let c = (1.0 - rho * rho).sqrt();
    let mut x = Vec::with_capacity(n * dim);
    let mut y = Vec::with_capacity(n * dim);
    for _ in 0..n * dim {
        let a: f64 = StandardNormal.sample(&mut rng);
        let b: f64 = StandardNormal.sample(&mut rng);
        x.push(a);
        y.push(rho * a + c * b);
    }
    Ok((Matrix::new(n, dim, x)?, Matrix::new(n, dim, y)?))
}

/// `-dim/2 · ln(1 − ρ²)` nats.
pub fn gaussian_mi_nats(rho: f64, dim: usize) -> f64 {
    -0.5 * dim as f64 * (1.0 - rho * rho).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_step_matches_hand_evaluation() {
        let p = LvParams::default();
        let s = p.step(p.initial());
        assert!((s.w - 8.94375).abs() < 1e-12);
        assert!((s.s - 10.7525).abs() < 1e-12);
        assert!((s.r - 11.015).abs() < 1e-12);
        assert!((s.g - 101.75).abs() < 1e-12);
    }

    #[test]
    fn zero_coefficients_are_constant() {
        let p = LvParams {
            a: [0.0; 3],
            b: [0.0; 3],
            c: [0.0; 3],
            d: [0.0; 3],
            steps: 50,
            ..LvParams::default()
        };
        let ds = simulate_lotka_volterra(&p).unwrap();
        let g = ds.column("G").unwrap();
        assert!(g.data().iter().all(|&v| v == 100.0));
    }

    #[test]
    fn default_run_is_positive_and_bounded() {
        let ds = simulate_lotka_volterra(&LvParams::default()).unwrap();
        assert_eq!(ds.n_rows(), 1500);
        for name in ["W", "S", "R", "G"] {
            let c = ds.column(name).unwrap();
            assert!(c.data().iter().all(|&v| v > 0.0 && v < 1e4), "{name}");
        }
    }

    #[test]
    fn extinction_is_reported_with_step() {
        let p = LvParams {
            a: [900.0, 0.0, 0.0],
            delta_t: 1.0,
            steps: 10,
            ..LvParams::default()
        };
        match simulate_lotka_volterra(&p) {
            Err(Error::Diverged { step, .. }) => assert_eq!(step, 1),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn fair_synth_degenerate_std() {
        let cfg = FairSynthConfig {
            w_stds: [1e-9; 3],
            ..FairSynthConfig::default()
        };
        let ds = gen_fair_synthetic(&cfg, Seed(1)).unwrap();
        let x = ds.column("X").unwrap();
        let w = ds.column("W").unwrap();
        for i in 0..ds.n_rows() {
            if x.get(i, 0) == 0.0 {
                assert!((w.get(i, 0) - 0.7).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn fair_synth_y_is_product() {
        let ds = gen_fair_synthetic(&FairSynthConfig::default(), Seed(2)).unwrap();
        let (v, w, y) = (
            ds.column("V").unwrap(),
            ds.column("W").unwrap(),
            ds.column("Y").unwrap(),
        );
        for i in 0..ds.n_rows() {
            assert_eq!(y.get(i, 0), v.get(i, 0) * w.get(i, 0));
        }
    }

    #[test]
    fn gaussian_rho_bounds() {
        assert!(gen_correlated_gaussians(10, 1.0, 1, Seed(0)).is_err());
        assert_eq!(gaussian_mi_nats(0.0, 1), 0.0);
        assert!((gaussian_mi_nats(0.9, 1) - 0.830_366).abs() < 1e-6);
    }
}
