use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::Failure;

pub const CONFIG_VERSION: u32 = 1;
pub const CONFIG_FILE: &str = "config.toml";
const DEFAULT_OUT_DIR: &str = "uipt-out";

/// Everything needed to repeat a run. Saved as flat TOML next to the
/// outputs; `uipt --config <file>` replays it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub schema_version: u32,
    pub seed: u64,
    pub replicas: usize,
    pub out_dir: PathBuf,
    /// Worker count; has no effect on results.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(flatten)]
    pub command: Command,
}

/// What the config file may leave out.
#[derive(Debug, Default, Deserialize)]
struct PartialConfig {
    schema_version: Option<u32>,
    seed: Option<u64>,
    replicas: Option<usize>,
    out_dir: Option<PathBuf>,
    threads: Option<usize>,
    #[serde(flatten)]
    command: Option<Command>,
}

#[derive(Debug, Clone, Default)]
pub struct Globals {
    pub seed: Option<u64>,
    pub replicas: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    /// Print an exact law as a CSV of fractions.
    Laws(LawsArgs),
    /// Run the boundary-size chain.
    Chain(ChainArgs),
    /// Grow the UIPT layer by layer and fit growth exponents.
    Grow(GrowArgs),
    /// Site percolation survival by colored peeling.
    Perc(PercArgs),
    /// Goodness-of-fit tests of the samplers, with negative controls.
    Gof(GofArgs),
    /// Run the whole harness and write one report bundle.
    Report(ReportArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Laws(_) => "laws",
            Command::Chain(_) => "chain",
            Command::Grow(_) => "grow",
            Command::Perc(_) => "perc",
            Command::Gof(_) => "gof",
            Command::Report(_) => "report",
        }
    }

    /// Fills unset fields of `self` from `base`.
    fn over(self, base: Command) -> Result<Command, Failure> {
        Ok(match (self, base) {
            (Command::Laws(a), Command::Laws(b)) => Command::Laws(a.over(b)),
            (Command::Chain(a), Command::Chain(b)) => Command::Chain(a.over(b)),
            (Command::Grow(a), Command::Grow(b)) => Command::Grow(a.over(b)),
            (Command::Perc(a), Command::Perc(b)) => Command::Perc(a.over(b)),
            (Command::Gof(a), Command::Gof(b)) => Command::Gof(a.over(b)),
            (Command::Report(a), Command::Report(b)) => Command::Report(a.over(b)),
            (a, b) => {
                return Err(Failure::Config(format!(
                    "command `{}` does not match `{}` in the config file",
                    a.name(),
                    b.name()
                )))
            }
        })
    }

    fn with_defaults(self) -> Command {
        match self {
            Command::Laws(a) => Command::Laws(a),
            Command::Chain(a) => Command::Chain(a.over(ChainArgs::defaults())),
            Command::Grow(a) => Command::Grow(a.over(GrowArgs::defaults())),
            Command::Perc(a) => Command::Perc(a.over(PercArgs::defaults())),
            Command::Gof(a) => Command::Gof(a.over(GofArgs::defaults())),
            Command::Report(a) => Command::Report(a.over(ReportArgs::defaults())),
        }
    }
}

/// Field-wise `self.f.or(base.f)`.
macro_rules! overlay {
    ($t:ident { $($f:ident),* $(,)? }) => {
        impl $t {
            fn over(self, base: $t) -> $t {
                $t { $($f: self.$f.or(base.$f)),* }
            }
        }
    };
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawsArgs {
    /// Step law of the boundary chain at this boundary parameter.
    #[arg(long, value_name = "M")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step_law: Option<u64>,
    /// Peeling law of a polygon with a marked internal vertex.
    #[arg(long, value_name = "M")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub marked_law: Option<u64>,
    /// Peeling law of a free polygon triangulation.
    #[arg(long, value_name = "M")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub free_peel_law: Option<u64>,
    /// Law of the number of internal vertices of a free triangulation,
    /// truncated at `--n-max`.
    #[arg(long, value_name = "M")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub free_size_law: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<u64>,
}
overlay!(LawsArgs { step_law, marked_law, free_peel_law, free_size_law, n_max });

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainArgs {
    #[arg(long)]
    pub m0: Option<u64>,
    #[arg(long)]
    pub horizon: Option<u64>,
    /// Levels whose first hitting times are recorded.
    #[arg(long, value_delimiter = ',')]
    pub targets: Option<Vec<u64>>,
    /// Stop at 0 instead of stepping up from it.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub absorb: Option<bool>,
    /// Stop once the chain reaches this level.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub escape_level: Option<u64>,
}
overlay!(ChainArgs { m0, horizon, targets, absorb, escape_level });

impl ChainArgs {
    fn defaults() -> Self {
        ChainArgs { m0: Some(1), horizon: Some(100_000), targets: Some(vec![]), absorb: Some(false), escape_level: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeArg {
    Full,
    Skeleton,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleArg {
    Trailing,
    Leading,
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowArgs {
    #[arg(long)]
    pub r_max: Option<u32>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, value_enum)]
    pub rule: Option<RuleArg>,
    /// Start from a bare polygon with this boundary parameter instead of a
    /// root triangle.
    #[arg(long, value_name = "M")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub polygon: Option<u64>,
    /// Peel steps per replica (hole filling included) before it is
    /// abandoned.
    #[arg(long)]
    pub step_budget: Option<u64>,
    /// Smallest radius used in the exponent fits.
    #[arg(long)]
    pub fit_from: Option<u32>,
    /// Full mode: also write the first replica's graph.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub export_mesh: Option<bool>,
}
overlay!(GrowArgs { r_max, mode, rule, polygon, step_budget, fit_from, export_mesh });

impl GrowArgs {
    fn defaults() -> Self {
        GrowArgs {
            r_max: Some(16),
            mode: Some(ModeArg::Skeleton),
            rule: Some(RuleArg::Trailing),
            polygon: None,
            step_budget: Some(100_000_000),
            fit_from: Some(4),
            export_mesh: Some(false),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineArg {
    Reduced,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialArg {
    Random,
    AllBlack,
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PercArgs {
    /// One probability or a comma-separated list.
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<f64>>,
    #[arg(long)]
    pub horizon: Option<u64>,
    #[arg(long, value_enum)]
    pub engine: Option<EngineArg>,
    #[arg(long, value_enum)]
    pub initial: Option<InitialArg>,
    /// Full engine: color the vertices inside filled holes too.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub color_holes: Option<bool>,
    /// Survival level whose crossing the sweep reports.
    #[arg(long)]
    pub crossing_level: Option<f64>,
    /// Full engine: peel steps per run, hole filling included.
    #[arg(long)]
    pub step_budget: Option<u64>,
}
overlay!(PercArgs { p, horizon, engine, initial, color_holes, crossing_level, step_budget });

impl PercArgs {
    fn defaults() -> Self {
        PercArgs {
            p: Some(vec![0.5]),
            horizon: Some(10_000),
            engine: Some(EngineArg::Reduced),
            initial: Some(InitialArg::Random),
            color_holes: Some(false),
            crossing_level: Some(0.1),
            step_budget: Some(uipt::peeling::DEFAULT_STEP_BUDGET),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GofArgs {
    /// Boundary parameters for the step-law tests.
    #[arg(long, value_delimiter = ',')]
    pub m_list: Option<Vec<u64>>,
    /// Draws per step-law test.
    #[arg(long)]
    pub draws: Option<u64>,
    #[arg(long)]
    pub significance: Option<f64>,
    /// Boundary parameters for the stable-limit tests (`--replicas`
    /// samples each).
    #[arg(long, value_delimiter = ',')]
    pub stable_m: Option<Vec<u64>>,
    /// Largest accepted KS distance in the stable-limit tests.
    #[arg(long)]
    pub max_ks: Option<f64>,
}
overlay!(GofArgs { m_list, draws, significance, stable_m, max_ks });

impl GofArgs {
    fn defaults() -> Self {
        GofArgs {
            m_list: Some(vec![1, 5, 50]),
            draws: Some(1_000_000),
            significance: Some(0.001),
            stable_m: Some(vec![50]),
            max_ks: Some(0.1),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportArgs {
    /// Skeleton growth radius for the layer fits.
    #[arg(long)]
    pub r_max: Option<u32>,
    #[arg(long)]
    pub fit_from: Option<u32>,
    /// Chain length for the boundary and jump-sum fits.
    #[arg(long)]
    pub chain_horizon: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<f64>>,
    #[arg(long)]
    pub perc_horizon: Option<u64>,
    #[arg(long)]
    pub stable_m: Option<u64>,
    #[arg(long)]
    pub draws: Option<u64>,
    #[arg(long)]
    pub significance: Option<f64>,
    #[arg(long)]
    pub max_ks: Option<f64>,
}
overlay!(ReportArgs { r_max, fit_from, chain_horizon, p, perc_horizon, stable_m, draws, significance, max_ks });

impl ReportArgs {
    fn defaults() -> Self {
        ReportArgs {
            r_max: Some(32),
            fit_from: Some(8),
            chain_horizon: Some(100_000),
            p: Some(vec![0.4, 0.45, 0.5, 0.55, 0.6]),
            perc_horizon: Some(10_000),
            stable_m: Some(50),
            draws: Some(100_000),
            significance: Some(0.001),
            max_ks: Some(0.1),
        }
    }
}

fn read_partial(path: &Path) -> Result<PartialConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    let partial: PartialConfig =
        toml::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    if let Some(v) = partial.schema_version {
        if v != CONFIG_VERSION {
            return Err(Failure::Config(format!("{}: schema version {v}, expected {CONFIG_VERSION}", path.display())));
        }
    }
    Ok(partial)
}

/// Flags win over the config file; the output directory falls back to
/// `env_out_dir`, then to `uipt-out`.
pub fn resolve(
    file: Option<&Path>,
    globals: Globals,
    command: Option<Command>,
    env_out_dir: Option<PathBuf>,
) -> Result<RunConfig, Failure> {
    let partial = match file {
        Some(path) => read_partial(path)?,
        None => PartialConfig::default(),
    };
    let command = match (command, partial.command) {
        (Some(c), Some(base)) => c.over(base)?,
        (Some(c), None) => c,
        (None, Some(base)) => base,
        (None, None) => return Err(Failure::Config("no command given and no config file to replay".into())),
    };
    let replicas = globals.replicas.or(partial.replicas).unwrap_or(100);
    if replicas == 0 {
        return Err(Failure::Config("replicas must be at least 1".into()));
    }
    Ok(RunConfig {
        schema_version: CONFIG_VERSION,
        seed: globals.seed.or(partial.seed).unwrap_or(1),
        replicas,
        out_dir: globals
            .out_dir
            .or(partial.out_dir)
            .or(env_out_dir)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR)),
        threads: globals.threads.or(partial.threads),
        command: command.with_defaults(),
    })
}

impl RunConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn save(&self) -> Result<PathBuf, Failure> {
        fs::create_dir_all(&self.out_dir).map_err(|e| Failure::io(&self.out_dir, e))?;
        let path = self.out_dir.join(CONFIG_FILE);
        fs::write(&path, self.to_toml()).map_err(|e| Failure::io(&path, e))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn perc(p: Option<Vec<f64>>, horizon: Option<u64>) -> Command {
        Command::Perc(PercArgs { p, horizon, ..PercArgs::default() })
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        fs::write(&path, "schema_version = 1\nseed = 9\ncommand = \"perc\"\nhorizon = 77\np = [0.25]\n").unwrap();
        let globals = Globals { replicas: Some(5), ..Globals::default() };
        let cfg = resolve(Some(&path), globals, Some(perc(Some(vec![0.7]), None)), None).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.replicas, 5);
        let Command::Perc(a) = &cfg.command else { panic!() };
        assert_eq!(a.p, Some(vec![0.7]));
        assert_eq!(a.horizon, Some(77));
        assert_eq!(a.engine, Some(EngineArg::Reduced));
    }

    #[test]
    fn saved_config_round_trips() {
        let cfg = resolve(None, Globals::default(), Some(perc(None, None)), Some("env-dir".into())).unwrap();
        assert_eq!(cfg.out_dir, PathBuf::from("env-dir"));
        let text = cfg.to_toml();
        assert!(text.contains("command = \"perc\""));
        assert!(!text.contains('['.to_string().repeat(2).as_str()), "not flat:\n{text}");
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        fs::write(&path, &text).unwrap();
        let back = resolve(Some(&path), Globals::default(), None, None).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn config_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        fs::write(&path, "command = \"grow\"\n").unwrap();
        assert!(matches!(resolve(Some(&path), Globals::default(), Some(perc(None, None)), None), Err(Failure::Config(_))));
        fs::write(&path, "command = \"perc\"\nbogus = 1\n").unwrap();
        assert!(matches!(resolve(Some(&path), Globals::default(), None, None), Err(Failure::Config(_))));
        fs::write(&path, "schema_version = 7\ncommand = \"perc\"\n").unwrap();
        assert!(matches!(resolve(Some(&path), Globals::default(), None, None), Err(Failure::Config(_))));
        assert!(matches!(resolve(None, Globals::default(), None, None), Err(Failure::Config(_))));
        let zero = Globals { replicas: Some(0), ..Globals::default() };
        assert!(matches!(resolve(None, zero, Some(perc(None, None)), None), Err(Failure::Config(_))));
        assert!(matches!(
            resolve(Some(&dir.path().join("missing.toml")), Globals::default(), None, None),
            Err(Failure::Io { .. })
        ));
    }
}
