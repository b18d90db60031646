use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{adult_schema, FairSynthConfig, LvParams, Schema, SplitSpec, COVERTYPE_DOMAINS};
use crate::mi::{OracleConfig, SmileFitConfig};
use crate::numerics::Seed;
use crate::subtraction::SubtractionConfig;

/// Environment variable naming the default output root.
pub const OUTPUT_ROOT_ENV: &str = "INFOSUB_OUTPUT_ROOT";

const DEFAULT_OUTPUT_ROOT: &str = "runs";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// `Z` of grass `G` with sheep `S` subtracted.
    LotkaVolterra,
    /// Iterative sector decomposition of `G` against `S` and `W`.
    Venn,
    /// `Z` of output `Y` with country `X` subtracted.
    FairSynth,
    /// Census income with sex as the protected variable.
    Adult,
    /// Forest cover with the wilderness area as the domain.
    Covertype,
    /// Clipped critic and KSG against closed-form Gaussian information.
    GaussianOracle,
    /// λ sweep on the synthetic fair case.
    Sweep,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::LotkaVolterra => "lotka_volterra",
            Self::Venn => "venn",
            Self::FairSynth => "fair_synth",
            Self::Adult => "adult",
            Self::Covertype => "covertype",
            Self::GaussianOracle => "gaussian_oracle",
            Self::Sweep => "sweep",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LotkaVolterraSection {
    pub params: LvParams,
    /// Train on log populations; reports always use raw values.
    pub log_scale: bool,
}

impl Default for LotkaVolterraSection {
    fn default() -> Self {
        Self {
            params: LvParams::default(),
            log_scale: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdultSection {
    /// Raw `adult.data`-style file.
    pub path: PathBuf,
    #[serde(default = "adult_schema")]
    pub schema: Schema,
    #[serde(default = "default_adult_split")]
    pub split: SplitSpec,
}

fn default_adult_split() -> SplitSpec {
    SplitSpec::Iid {
        train_n: 15000,
        test_n: 17561,
        seed: 0,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovertypeSection {
    /// Raw 55-column `covtype.data` file.
    pub path: PathBuf,
    #[serde(default = "default_covertype_split")]
    pub split: SplitSpec,
}

fn default_covertype_split() -> SplitSpec {
    SplitSpec::ByDomain {
        column: "wilderness".into(),
        train_domains: COVERTYPE_DOMAINS[..3]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        test_domains: vec![COVERTYPE_DOMAINS[3].to_string()],
        max_train: None,
        max_test: None,
        seed: 0,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaussianOracleSection {
    pub rhos: Vec<f64>,
    pub n: usize,
    pub critic: SmileFitConfig,
}

impl Default for GaussianOracleSection {
    fn default() -> Self {
        Self {
            rhos: vec![0.0, 0.3, 0.6, 0.9],
            n: 5000,
            critic: SmileFitConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub lambdas: Vec<f64>,
    /// Slack in bits for the monotonicity checks.
    pub slack_bits: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            lambdas: vec![0.0, 0.5, 1.0, 2.0, 5.0],
            slack_bits: 0.1,
        }
    }
}

/// One experiment, as read from a TOML file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Experiment directory name; defaults to the kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Run directory name; defaults to `run-seed<seed>`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Output root; falls back to the environment, then `runs`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Master seed; overrides `subtraction.seed`.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub subtraction: SubtractionConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lotka_volterra: Option<LotkaVolterraSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fair_synth: Option<FairSynthConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adult: Option<AdultSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covertype: Option<CovertypeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gaussian_oracle: Option<GaussianOracleSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Every violation: unknown sections for the kind, missing required
    /// sections, nested constraint failures and unreadable data paths.
    pub fn validate(&self) -> Vec<String> {
        use ExperimentKind::*;
        let mut v = Vec::new();
        let present = [
            (
                "lotka_volterra",
                self.lotka_volterra.is_some(),
                &[LotkaVolterra, Venn][..],
            ),
            (
                "fair_synth",
                self.fair_synth.is_some(),
                &[FairSynth, Sweep][..],
            ),
            ("adult", self.adult.is_some(), &[Adult][..]),
            ("covertype", self.covertype.is_some(), &[Covertype][..]),
            (
                "gaussian_oracle",
                self.gaussian_oracle.is_some(),
                &[GaussianOracle][..],
            ),
            ("sweep", self.sweep.is_some(), &[Sweep][..]),
        ];
        for (section, is_set, kinds) in present {
            if is_set && !kinds.contains(&self.kind) {
                v.push(format!(
                    "[{section}] is not used by kind {}",
                    self.kind.as_str()
                ));
            }
        }
        if self.kind != GaussianOracle {
            v.extend(self.subtraction.validate());
        }
        v.extend(self.oracle.validate());
        for label in [&self.name, &self.label].into_iter().flatten() {
            if label.is_empty() || label.contains(['/', '\\']) || label == "." || label == ".." {
                v.push(format!(
                    "name/label {label:?} must be a plain directory name"
                ));
            }
        }
        match self.kind {
            LotkaVolterra | Venn => {
                let s = self.lotka_volterra.clone().unwrap_or_default();
                v.extend(s.params.validate());
            }
            FairSynth | Sweep => {
                let f = self.fair_synth.clone().unwrap_or_default();
                v.extend(f.validate());
                if self.kind == Sweep {
                    let s = self.sweep.clone().unwrap_or_default();
                    if s.lambdas.len() < 2 {
                        v.push("sweep.lambdas needs at least 2 values".into());
                    }
                    if s.lambdas.windows(2).any(|w| !(w[1] > w[0])) {
                        v.push("sweep.lambdas must be strictly increasing".into());
                    }
                    if s.lambdas.iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
                        v.push("sweep.lambdas must be non-negative".into());
                    }
                    if !(s.slack_bits >= 0.0) {
                        v.push("sweep.slack_bits must be non-negative".into());
                    }
                }
            }
            Adult => match &self.adult {
                None => v.push("kind adult requires an [adult] section with a data path".into()),
                Some(a) => {
                    check_path(&mut v, "adult.path", &a.path);
                    if !a
                        .schema
                        .columns
                        .iter()
                        .any(|c| c.role == crate::data::Role::Protected)
                    {
                        v.push("adult.schema needs a protected column".into());
                    }
                    if !a
                        .schema
                        .columns
                        .iter()
                        .any(|c| c.role == crate::data::Role::Target)
                    {
                        v.push("adult.schema needs a target column".into());
                    }
                    check_split(&mut v, "adult.split", &a.split);
                }
            },
            Covertype => match &self.covertype {
                None => {
                    v.push("kind covertype requires a [covertype] section with a data path".into())
                }
                Some(c) => {
                    check_path(&mut v, "covertype.path", &c.path);
                    check_split(&mut v, "covertype.split", &c.split);
                    if let SplitSpec::ByDomain { column, .. } = &c.split {
                        if column != "wilderness" {
                            v.push("covertype.split.column must be \"wilderness\"".into());
                        }
                    }
                }
            },
            GaussianOracle => {
                let g = self.gaussian_oracle.clone().unwrap_or_default();
                if g.rhos.is_empty() {
                    v.push("gaussian_oracle.rhos must not be empty".into());
                }
                if g.rhos.iter().any(|r| !(r.abs() < 1.0)) {
                    v.push("gaussian_oracle.rhos must lie strictly inside (-1, 1)".into());
                }
                if g.n < 2 {
                    v.push("gaussian_oracle.n must be at least 2".into());
                }
                v.extend(
                    g.critic
                        .validate()
                        .into_iter()
                        .map(|m| format!("gaussian_oracle.critic: {m}")),
                );
            }
        }
        v
    }

    /// All defaults written out, the master seed pushed into the nested
    /// configs, and `output`/`label`/`name` fixed. `output_override` and
    /// `seed_override` come from the command line.
    pub fn resolve(
        &self,
        output_override: Option<&Path>,
        seed_override: Option<u64>,
    ) -> ExperimentConfig {
        use ExperimentKind::*;
        let mut c = self.clone();
        if let Some(s) = seed_override {
            c.seed = s;
        }
        c.subtraction.seed = Seed(c.seed);
        c.output = Some(match (output_override, &self.output) {
            (Some(o), _) => o.to_path_buf(),
            (None, Some(o)) => o.clone(),
            (None, None) => std::env::var_os(OUTPUT_ROOT_ENV)
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_ROOT)),
        });
        c.name.get_or_insert_with(|| c.kind.as_str().to_string());
        if c.label.is_none() {
            c.label = Some(format!("run-seed{}", c.seed));
        }
        match c.kind {
            LotkaVolterra | Venn => {
                c.lotka_volterra.get_or_insert_with(Default::default);
            }
            FairSynth => {
                c.fair_synth.get_or_insert_with(Default::default);
            }
            Sweep => {
                c.fair_synth.get_or_insert_with(Default::default);
                c.sweep.get_or_insert_with(Default::default);
            }
            GaussianOracle => {
                let g = c.gaussian_oracle.get_or_insert_with(Default::default);
                g.critic.seed = Seed(c.seed);
            }
            Adult | Covertype => {}
        }
        c
    }

    /// `<output>/<name>/<label>`; meaningful after [`resolve`](Self::resolve).
    pub fn run_dir(&self) -> PathBuf {
        let root = self
            .output
            .clone()
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_ROOT));
        let name = self
            .name
            .clone()
            .unwrap_or_else(|| self.kind.as_str().to_string());
        let label = self
            .label
            .clone()
            .unwrap_or_else(|| format!("run-seed{}", self.seed));
        root.join(name).join(label)
    }
}

fn check_path(v: &mut Vec<String>, field: &str, path: &Path) {
    if !path.is_file() {
        v.push(format!(
            "{field}: {} is not a readable file",
            path.display()
        ));
    }
}

fn check_split(v: &mut Vec<String>, field: &str, split: &SplitSpec) {
    match split {
        SplitSpec::Iid {
            train_n, test_n, ..
        } => {
            if *train_n == 0 || *test_n == 0 {
                v.push(format!("{field}: train_n and test_n must be positive"));
            }
        }
        SplitSpec::ByDomain {
            train_domains,
            test_domains,
            ..
        } => {
            if train_domains.is_empty() || test_domains.is_empty() {
                v.push(format!(
                    "{field}: train_domains and test_domains must be non-empty"
                ));
            }
            if train_domains.iter().any(|d| test_domains.contains(d)) {
                v.push(format!("{field}: a domain appears on both sides"));
            }
        }
    }
}
