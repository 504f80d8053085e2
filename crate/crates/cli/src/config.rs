//! Run configuration: JSON file merged with command line flags.

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const MIN_RES: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Conjugate,
    SymmetrizeBody,
    SymmetrizeFn,
    SymmetrizeU,
    Verify,
    GenProp51,
    GenProp52,
    Diagnose,
    Sandwich,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Conjugate => "conjugate",
            Command::SymmetrizeBody => "symmetrize-body",
            Command::SymmetrizeFn => "symmetrize-fn",
            Command::SymmetrizeU => "symmetrize-u",
            Command::Verify => "verify",
            Command::GenProp51 => "gen-prop51",
            Command::GenProp52 => "gen-prop52",
            Command::Diagnose => "diagnose",
            Command::Sandwich => "sandwich",
        }
    }
}

/// Every field is optional so that a file and the flags can be layered.
#[derive(Clone, Debug, Default, Serialize, Deserialize, Parser)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
#[command(name = "aniso", version, about = "Anisotropic Polya-Szego toolkit")]
pub struct RunConfig {
    /// Pipeline to run; may also come from the config file.
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// JSON config file; flags override its entries.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<String>,
    /// Function u: field name (tent:<body>, bump:<body>, cap, twobump, asym,
    /// random[:seed]) or a grid text file.
    #[arg(long)]
    pub u: Option<String>,
    /// Young function Phi: catalog string or sampled table.
    #[arg(long)]
    pub phi: Option<String>,
    /// Symmetrization body K.
    #[arg(long = "K")]
    #[serde(rename = "K")]
    pub k: Option<String>,
    /// Body L of gen-prop51 and symmetrize-body.
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub l: Option<String>,
    /// One-dimensional Young function A of gen-prop51.
    #[arg(long = "A")]
    #[serde(rename = "A")]
    pub big_a: Option<String>,
    /// Profile b of gen-prop51 as a CSV file; default b(t) = 1 - t.
    #[arg(long)]
    pub b: Option<String>,
    /// Dilation a of gen-prop52.
    #[arg(long)]
    pub a: Option<f64>,
    /// Levels t1,t2,t3 of gen-prop52.
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<String>,
    /// Center x0, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<String>,
    /// Cells per axis.
    #[arg(long)]
    pub res: Option<usize>,
    /// Half width of the gradient-space box.
    #[arg(long = "box")]
    #[serde(rename = "box")]
    pub half: Option<f64>,
    /// Dimension when no u is given.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Interior levels of the per-level chain.
    #[arg(long)]
    pub levels: Option<usize>,
    /// Nodes per axis of the gradient-space grids.
    #[arg(long)]
    pub dual_res: Option<usize>,
    /// Relative gap accepted as equality.
    #[arg(long)]
    pub equality_tol: Option<f64>,
    /// Fraction of the level range skipped at each end.
    #[arg(long)]
    pub level_trim: Option<f64>,
    /// Skip the coarse-grid evaluation.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub no_refine: Option<bool>,
    /// Scale and shift for symmetrize-body, `s;x,y`.
    #[arg(long, allow_hyphen_values = true)]
    pub dilate: Option<String>,
    /// Output directory for artifacts.
    #[arg(long)]
    pub out: Option<String>,
    /// Seed for randomized fixtures.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Run verify on the generated pair.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub then_verify: Option<bool>,
}

macro_rules! layer {
    ($base:ident, $top:ident, $($f:ident),*) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f.clone(); } )*
    };
}

impl RunConfig {
    /// Flags on top of the file named by `--config`.
    pub fn load(flags: RunConfig) -> Result<RunConfig, CliError> {
        let mut cfg = match &flags.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Io(format!("cannot read config {path}: {e}")))?;
                serde_json::from_str::<RunConfig>(&text)
                    .map_err(|e| CliError::Config(format!("bad config file {path}: {e}")))?
            }
            None => RunConfig::default(),
        };
        layer!(
            cfg, flags, command, u, phi, k, l, big_a, b, a, t, x0, res, half, dim, levels, dual_res, equality_tol,
            level_trim, no_refine, dilate, out, seed, then_verify
        );
        cfg.fill_defaults();
        cfg.validate()?;
        Ok(cfg)
    }

    fn fill_defaults(&mut self) {
        self.res.get_or_insert(128);
        self.half.get_or_insert(2.0);
        self.seed.get_or_insert(0);
        self.levels.get_or_insert(48);
        self.equality_tol.get_or_insert(0.03);
        self.level_trim.get_or_insert(0.05);
        self.no_refine.get_or_insert(false);
        self.then_verify.get_or_insert(false);
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.command.is_none() {
            return Err(CliError::Config("no command given".into()));
        }
        let res = self.res.unwrap();
        if res < MIN_RES {
            return Err(CliError::Config(format!("resolution {res} is below the minimum of {MIN_RES} cells per axis")));
        }
        if !(self.half.unwrap() > 0.0) {
            return Err(CliError::Config("box half width must be positive".into()));
        }
        if self.levels.unwrap() < 4 {
            return Err(CliError::Config("need at least 4 levels".into()));
        }
        if let Some(n) = self.dual_res {
            if n < MIN_RES + 1 {
                return Err(CliError::Config(format!("dual resolution {n} is below {} nodes", MIN_RES + 1)));
            }
        }
        let trim = self.level_trim.unwrap();
        if !(0.0..0.5).contains(&trim) {
            return Err(CliError::Config("level trim must lie in [0, 0.5)".into()));
        }
        Ok(())
    }

    pub fn command(&self) -> Command {
        self.command.expect("validated")
    }

    pub fn res(&self) -> usize {
        self.res.expect("defaulted")
    }

    pub fn half(&self) -> f64 {
        self.half.expect("defaulted")
    }

    pub fn seed(&self) -> u64 {
        self.seed.expect("defaulted")
    }

    pub fn require<'a>(&self, v: &'a Option<String>, flag: &str) -> Result<&'a str, CliError> {
        v.as_deref()
            .ok_or_else(|| CliError::Config(format!("{} needs --{flag}", self.command().name())))
    }

    pub fn verify_config(&self) -> aniso_core::verify::VerifyConfig {
        aniso_core::verify::VerifyConfig {
            levels: self.levels.unwrap(),
            dual_res: self.dual_res,
            refine: !self.no_refine.unwrap(),
            equality_tol: self.equality_tol.unwrap(),
            level_trim: self.level_trim.unwrap(),
        }
    }
}

pub fn parse_list(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| CliError::Config(format!("bad {what}: {s}")))
}
