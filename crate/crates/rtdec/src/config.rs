//! TOML run configuration.
//!
//! ```toml
//! trials = 10000
//! seed = 1
//! budgets = [0, 200, 400, 800]
//!
//! [problem]
//! kind = "repetition"
//! d = 5
//! p = 0.01
//!
//! [predecoder]
//! iterations = 80
//!
//! [decoder]
//! kind = "filtered_osd"
//! r_max = 500
//! ```

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rtdec_core::bp::RelayConfig;
use rtdec_core::cluster::UfConfig;
use rtdec_core::cost::DeviceProfile;
use rtdec_core::osd::OsdConfig;
use rtdec_core::problem::{bivariate_bicycle, phenomenological, repetition, BbSpec};
use rtdec_core::DecodingProblem;
use serde::{Deserialize, Serialize};

use crate::io::load_problem;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    /// Cycle budgets for `curve.csv`; empty skips the curve.
    #[serde(default)]
    pub budgets: Vec<u64>,
    /// Trials slower than this are recorded as cutoff failures.
    #[serde(default)]
    pub cutoff: Option<u64>,
    pub problem: ProblemSpec,
    #[serde(default)]
    pub predecoder: Option<PredecoderSpec>,
    pub decoder: DecoderSpec,
    #[serde(default)]
    pub device: Option<DeviceProfile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    Repetition {
        d: usize,
        p: f64,
    },
    /// Code-capacity bivariate bicycle code. `code` names a preset
    /// (`bb72`, `gross`, `two_gross`); otherwise `l`, `m`, `a_terms` and
    /// `b_terms` give the polynomials.
    Bb {
        #[serde(default)]
        code: Option<String>,
        #[serde(default)]
        l: Option<usize>,
        #[serde(default)]
        m: Option<usize>,
        #[serde(default)]
        a_terms: Vec<(usize, usize)>,
        #[serde(default)]
        b_terms: Vec<(usize, usize)>,
        p: f64,
    },
    /// A problem file; relative paths resolve against the config file.
    File {
        path: PathBuf,
    },
    Phenomenological {
        base: Box<ProblemSpec>,
        rounds: usize,
        q_meas: f64,
    },
}

impl ProblemSpec {
    pub fn build(&self, base_dir: &Path) -> Result<DecodingProblem> {
        Ok(match self {
            ProblemSpec::Repetition { d, p } => repetition(*d, *p)?,
            ProblemSpec::Bb { code, l, m, a_terms, b_terms, p } => {
                let spec = match code.as_deref() {
                    Some(name) => bb_preset(name)?,
                    None => {
                        let (Some(l), Some(m)) = (l, m) else { bail!("bb problem needs `code` or `l` and `m`") };
                        BbSpec { l: *l, m: *m, a_terms: a_terms.clone(), b_terms: b_terms.clone() }
                    }
                };
                bivariate_bicycle(spec)?.decoding_problem(*p)?
            }
            ProblemSpec::File { path } => {
                let full = if path.is_absolute() { path.clone() } else { base_dir.join(path) };
                load_problem(&full)?
            }
            ProblemSpec::Phenomenological { base, rounds, q_meas } => {
                phenomenological(&base.build(base_dir)?, *rounds, *q_meas)?
            }
        })
    }
}

pub fn bb_preset(name: &str) -> Result<BbSpec> {
    Ok(match name {
        "bb72" => BbSpec::bb72(),
        "gross" => BbSpec::gross(),
        "two_gross" | "two-gross" => BbSpec::two_gross(),
        other => bail!("unknown bivariate bicycle preset `{other}`"),
    })
}

/// Memory-BP first leg run before a post-processing decoder. When it fails,
/// `refresh_iterations` plain-BP iterations from the priors supply the LLRs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredecoderSpec {
    #[serde(default = "default_pre_iterations")]
    pub iterations: u32,
    #[serde(default = "default_pre_gamma")]
    pub gamma: f64,
    #[serde(default = "default_refresh")]
    pub refresh_iterations: u32,
}

fn default_pre_iterations() -> u32 {
    80
}
fn default_pre_gamma() -> f64 {
    0.125
}
fn default_refresh() -> u32 {
    25
}

impl Default for PredecoderSpec {
    fn default() -> Self {
        Self { iterations: 80, gamma: 0.125, refresh_iterations: 25 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DecoderSpec {
    /// MinSum BP, with optional uniform memory strength.
    Bp {
        #[serde(default = "default_bp_iterations")]
        max_iterations: u32,
        #[serde(default)]
        gamma: f64,
    },
    Relay(RelaySettings),
    FilteredOsd(OsdSettings),
    StandardOsd,
    Cluster(ClusterSettings),
}

fn default_bp_iterations() -> u32 {
    100
}

impl DecoderSpec {
    pub fn id(&self) -> &'static str {
        match self {
            DecoderSpec::Bp { .. } => "bp",
            DecoderSpec::Relay(_) => "relay",
            DecoderSpec::FilteredOsd(_) => "filtered_osd",
            DecoderSpec::StandardOsd => "standard_osd",
            DecoderSpec::Cluster(_) => "cluster",
        }
    }

    pub fn is_post_processor(&self) -> bool {
        matches!(self, DecoderSpec::FilteredOsd(_) | DecoderSpec::StandardOsd | DecoderSpec::Cluster(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RelaySettings {
    pub first_gamma: f64,
    pub first_iterations: u32,
    pub later_legs: usize,
    pub later_iterations: u32,
    pub gamma_lo: f64,
    pub gamma_hi: f64,
    pub gamma_seed: u64,
}

impl Default for RelaySettings {
    fn default() -> Self {
        Self::gross()
    }
}

impl RelaySettings {
    pub fn gross() -> Self {
        Self {
            first_gamma: 0.125,
            first_iterations: 80,
            later_legs: 299,
            later_iterations: 60,
            gamma_lo: -0.24,
            gamma_hi: 0.66,
            gamma_seed: 0,
        }
    }

    pub fn two_gross() -> Self {
        Self { later_legs: 300, gamma_lo: -0.161, gamma_hi: 0.815, ..Self::gross() }
    }

    pub fn to_config(&self) -> RelayConfig {
        RelayConfig::chained(
            self.first_gamma,
            self.first_iterations,
            self.later_legs,
            self.later_iterations,
            self.gamma_lo,
            self.gamma_hi,
            self.gamma_seed,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OsdSettings {
    pub lambda_confident: f64,
    pub r_max: usize,
    pub banking: usize,
    pub zero_filter_blocks: usize,
    pub padded_timing: bool,
    pub use_systolic: bool,
}

impl Default for OsdSettings {
    fn default() -> Self {
        let c = OsdConfig::default();
        Self {
            lambda_confident: c.lambda_confident,
            r_max: c.r_max,
            banking: c.banking,
            zero_filter_blocks: c.zero_filter_blocks,
            padded_timing: c.padded_timing,
            use_systolic: c.use_systolic,
        }
    }
}

impl OsdSettings {
    pub fn to_config(&self) -> OsdConfig {
        OsdConfig {
            lambda_confident: self.lambda_confident,
            r_max: self.r_max,
            banking: self.banking,
            zero_filter_blocks: self.zero_filter_blocks,
            padded_timing: self.padded_timing,
            use_systolic: self.use_systolic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterSettings {
    pub lambda_accept: f64,
    pub lambda_suspicious: f64,
    pub n_clus: usize,
    pub solver_sizes: Vec<(usize, usize)>,
    pub bucket_width: u64,
}

impl Default for ClusterSettings {
    fn default() -> Self {
        let c = UfConfig::default();
        Self {
            lambda_accept: c.lambda_accept,
            lambda_suspicious: c.lambda_suspicious,
            n_clus: c.n_clus,
            solver_sizes: c.solver_sizes,
            bucket_width: c.bucket_width,
        }
    }
}

impl ClusterSettings {
    pub fn to_config(&self) -> UfConfig {
        UfConfig {
            lambda_accept: self.lambda_accept,
            lambda_suspicious: self.lambda_suspicious,
            n_clus: self.n_clus,
            solver_sizes: self.solver_sizes.clone(),
            bucket_width: self.bucket_width,
            record_growth: false,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).context("parsing run configuration")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            bail!("trials must be at least 1");
        }
        if !self.budgets.windows(2).all(|w| w[0] <= w[1]) {
            bail!("budgets must be sorted ascending");
        }
        if self.predecoder.is_some() && !self.decoder.is_post_processor() {
            bail!("a pre-decoder can only precede filtered_osd, standard_osd or cluster");
        }
        Ok(())
    }
}
