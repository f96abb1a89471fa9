use serde::{Deserialize, Serialize};

use chaining_core::dist::DistributionModel;
use chaining_core::gamma::{Functional, GammaMode};
use chaining_core::metric::{IndexSet, ProcessSpec};
use chaining_core::stochlab::{RngStream, SupTarget};
use chaining_core::tailkit::TailFunction;
use chaining_core::verify::{interleave, packing_set, sphere_random};

use crate::error::CliError;

/// Version of the config and report layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Gamma,
    Supremum,
    Sudakov,
    TwoSided,
    WeakStrong,
    Compare,
    Tails,
    Hull,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Gamma => "gamma",
            Experiment::Supremum => "supremum",
            Experiment::Sudakov => "sudakov",
            Experiment::TwoSided => "two-sided",
            Experiment::WeakStrong => "weak-strong",
            Experiment::Compare => "compare",
            Experiment::Tails => "tails",
            Experiment::Hull => "hull",
        }
    }

    /// Experiments that draw Monte Carlo samples and therefore need a seed.
    pub fn is_sampled(self) -> bool {
        matches!(
            self,
            Experiment::Supremum | Experiment::Sudakov | Experiment::TwoSided | Experiment::WeakStrong | Experiment::Compare
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Gaussian {
        #[serde(default = "one")]
        count: usize,
    },
    Rademacher {
        #[serde(default = "one")]
        count: usize,
    },
    SymExponential {
        #[serde(default = "one")]
        count: usize,
    },
    SymWeibull {
        shape: f64,
        #[serde(default = "one")]
        count: usize,
    },
    ThreePoint {
        atom: f64,
        #[serde(default = "one")]
        count: usize,
    },
    /// Log-concave law with `N(t) = (t/scale)^exponent`, rescaled to unit variance.
    PowerTail {
        scale: f64,
        exponent: f64,
        #[serde(default = "one")]
        count: usize,
    },
}

fn one() -> usize {
    1
}

impl ModelSpec {
    fn build(&self) -> chaining_core::Result<(DistributionModel, usize)> {
        Ok(match *self {
            ModelSpec::Gaussian { count } => (DistributionModel::gaussian(), count),
            ModelSpec::Rademacher { count } => (DistributionModel::rademacher(), count),
            ModelSpec::SymExponential { count } => (DistributionModel::sym_exponential(), count),
            ModelSpec::SymWeibull { shape, count } => (DistributionModel::sym_weibull(shape)?, count),
            ModelSpec::ThreePoint { atom, count } => (DistributionModel::three_point(atom)?, count),
            ModelSpec::PowerTail { scale, exponent, count } => {
                (DistributionModel::log_concave_from_tail(TailFunction::power(scale, exponent))?, count)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum IndexSetSpec {
    Points { points: Vec<Vec<f64>>, labels: Option<Vec<String>> },
    Basis { n: usize },
    Packing { m: usize, n: usize },
    SphereRandom { n: usize, count: usize, seed: u64 },
    InterleaveOf(Box<IndexSetSpec>),
    Scaled { factor: f64, of: Box<IndexSetSpec> },
}

impl IndexSetSpec {
    pub fn build(&self) -> chaining_core::Result<IndexSet> {
        match self {
            IndexSetSpec::Points { points, labels } => {
                let dim = points.first().map_or(0, Vec::len);
                let set = IndexSet::new(dim, points.clone())?;
                match labels {
                    Some(l) => set.with_labels(l.clone()),
                    None => Ok(set),
                }
            }
            IndexSetSpec::Basis { n } => IndexSet::basis(*n),
            IndexSetSpec::Packing { m, n } => packing_set(*m, *n),
            IndexSetSpec::SphereRandom { n, count, seed } => sphere_random(*n, *count, RngStream::new(*seed, 0)),
            IndexSetSpec::InterleaveOf(inner) => Ok(interleave(&inner.build()?)),
            IndexSetSpec::Scaled { factor, of } => Ok(of.build()?.scaled(*factor)),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub p: Option<f64>,
    pub u: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub mode: Option<GammaMode>,
    pub functional: Option<Functional>,
    pub target: Option<SupTarget>,
    /// Orders for the domination check (compare) or the κ sweep (sudakov).
    pub p_grid: Option<Vec<f64>>,
    /// Second process for `compare`; defaults to `process`.
    pub process_y: Option<Vec<ModelSpec>>,
    /// Index set of the second process for `compare`; defaults to `index_set`.
    pub index_set_y: Option<IndexSetSpec>,
    /// Grid size for `tails`.
    pub points: Option<usize>,
    /// Upper threshold on the observed constant (two-sided, weak-strong).
    pub max_constant: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Directory for the report and tables; `--out` overrides it.
    pub dir: Option<String>,
    /// Skip CSV tables when false.
    #[serde(default = "yes")]
    pub tables: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "schema")]
    pub schema_version: u32,
    pub experiment: Experiment,
    pub process: Vec<ModelSpec>,
    pub index_set: Option<IndexSetSpec>,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub output: OutputSpec,
}

fn schema() -> u32 {
    SCHEMA_VERSION
}

/// Overrides from the command line, applied before validation.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub mode: Option<GammaMode>,
    pub out: Option<String>,
}

pub fn build_process(models: &[ModelSpec]) -> chaining_core::Result<ProcessSpec> {
    let mut all = Vec::new();
    for m in models {
        let (model, count) = m.build()?;
        all.extend(std::iter::repeat_n(model, count));
    }
    ProcessSpec::new(all)
}

impl ExperimentConfig {
    /// Parses JSON, reporting the path of the offending field on schema errors.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de)
            .map_err(|e| CliError::Schema { path: e.path().to_string(), message: e.inner().to_string() })?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::Schema {
                path: "schema_version".into(),
                message: format!("unsupported version {} (expected {SCHEMA_VERSION})", cfg.schema_version),
            });
        }
        Ok(cfg)
    }

    pub fn apply(mut self, o: &Overrides) -> Self {
        if o.samples.is_some() {
            self.params.samples = o.samples;
        }
        if o.seed.is_some() {
            self.params.seed = o.seed;
        }
        if o.mode.is_some() {
            self.params.mode = o.mode;
        }
        if o.out.is_some() {
            self.output.dir = o.out.clone();
        }
        self
    }

    /// Checks cross-field rules that the schema cannot express.
    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |path: &str, message: &str| Err(CliError::Schema { path: path.into(), message: message.into() });
        if self.process.is_empty() {
            return fail("process", "at least one model descriptor is required");
        }
        if self.experiment.is_sampled() && self.params.seed.is_none() {
            return fail("params.seed", "a seed is mandatory for sampled experiments");
        }
        if self.experiment != Experiment::Tails && self.index_set.is_none() {
            return fail("index_set", "this experiment needs an index set");
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.params.seed.unwrap_or(0)
    }

    pub fn stream(&self) -> RngStream {
        RngStream::new(self.seed(), 0)
    }
}
