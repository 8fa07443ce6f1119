//! Run configuration from flags and an optional `key=value` file.
//!
//! The file holds one `key = value` pair per line; blank lines and lines
//! starting with `#` are ignored. Keys are the long flag names without the
//! leading dashes (`p-min` and `p_min` are both accepted) plus `command`.
//! Flags override file values.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use qwalk_core::NoiseTarget;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Simulate,
    Sweep,
    Mixing,
    Decay,
    Resources,
    OracleCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Sweep => "sweep",
            Command::Mixing => "mixing",
            Command::Decay => "decay",
            Command::Resources => "resources",
            Command::OracleCheck => "oracle-check",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LatticeKind {
    Line,
    Cycle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum NoiseArg {
    Coin,
    Position,
    Both,
}

impl From<NoiseArg> for NoiseTarget {
    fn from(n: NoiseArg) -> Self {
        match n {
            NoiseArg::Coin => NoiseTarget::Coin,
            NoiseArg::Position => NoiseTarget::Position,
            NoiseArg::Both => NoiseTarget::Both,
        }
    }
}

/// Command-line arguments. Every setting is optional so that unset flags
/// fall back to the config file and then to defaults.
#[derive(Clone, Debug, Default, Parser)]
#[command(name = "qwalk", version, about = "Noisy coined quantum walks on lines and cycles")]
pub struct Args {
    /// Experiment to run.
    #[arg(value_enum)]
    pub command: Option<Command>,
    #[arg(long, value_enum)]
    pub lattice: Option<LatticeKind>,
    /// Cycle size N.
    #[arg(long)]
    pub size: Option<usize>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Line half-width, or number of steps for `mixing`.
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long, value_enum)]
    pub noise: Option<NoiseArg>,
    /// Noise rate per step.
    #[arg(long, allow_negative_numbers = true)]
    pub p: Option<f64>,
    #[arg(long = "p-min", allow_negative_numbers = true)]
    pub p_min: Option<f64>,
    #[arg(long = "p-max", allow_negative_numbers = true)]
    pub p_max: Option<f64>,
    #[arg(long = "p-count")]
    pub p_count: Option<usize>,
    /// Comma-separated noise rates for `decay` (and `sweep`, overriding the grid).
    #[arg(long = "p-values", value_delimiter = ',', allow_negative_numbers = true)]
    pub p_values: Option<Vec<f64>>,
    /// Mixing threshold on the unhalved TVD; defaults to 1/N.
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    /// Warm restarts reported by `mixing`.
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Trajectories for `oracle-check`.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// CSV output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write an SVG plot next to the CSV.
    #[arg(long)]
    pub plot: bool,
    /// `key=value` configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

const FILE_KEYS: [&str; 18] = [
    "command", "lattice", "size", "steps", "horizon", "noise", "p", "p-min", "p-max", "p-count",
    "p-values", "epsilon", "restarts", "samples", "seed", "jobs", "out", "plot",
];

fn parse_value<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T, CliError> {
    raw.parse()
        .map_err(|_| CliError::invalid(key, raw, "cannot be parsed"))
}

fn parse_enum<T: ValueEnum>(key: &str, raw: &str) -> Result<T, CliError> {
    T::from_str(raw, true).map_err(|_| {
        let names: Vec<String> = T::value_variants()
            .iter()
            .filter_map(|v| v.to_possible_value().map(|p| p.get_name().to_string()))
            .collect();
        CliError::invalid(key, raw, &format!("expected one of {}", names.join(", ")))
    })
}

/// Reads a config file into [`Args`]; every key is validated here.
pub fn parse_config_file(path: &Path) -> Result<Args, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config_text(&text, &path.display().to_string())
}

pub fn parse_config_text(text: &str, origin: &str) -> Result<Args, CliError> {
    let mut args = Args::default();
    let mut seen = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::config(format!("{origin}:{}: expected `key = value`, got `{line}`", n + 1))
        })?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if !FILE_KEYS.contains(&key.as_str()) {
            return Err(CliError::config(format!("{origin}:{}: unknown key `{key}`", n + 1)));
        }
        if seen.contains(&key) {
            return Err(CliError::config(format!("{origin}:{}: duplicate key `{key}`", n + 1)));
        }
        seen.push(key.clone());
        let k = key.as_str();
        match k {
            "command" => args.command = Some(parse_enum(k, value)?),
            "lattice" => args.lattice = Some(parse_enum(k, value)?),
            "noise" => args.noise = Some(parse_enum(k, value)?),
            "size" => args.size = Some(parse_value(k, value)?),
            "steps" => args.steps = Some(parse_value(k, value)?),
            "horizon" => args.horizon = Some(parse_value(k, value)?),
            "p" => args.p = Some(parse_value(k, value)?),
            "p-min" => args.p_min = Some(parse_value(k, value)?),
            "p-max" => args.p_max = Some(parse_value(k, value)?),
            "p-count" => args.p_count = Some(parse_value(k, value)?),
            "p-values" => {
                args.p_values = Some(
                    value
                        .split(',')
                        .map(|v| parse_value(k, v.trim()))
                        .collect::<Result<_, _>>()?,
                )
            }
            "epsilon" => args.epsilon = Some(parse_value(k, value)?),
            "restarts" => args.restarts = Some(parse_value(k, value)?),
            "samples" => args.samples = Some(parse_value(k, value)?),
            "seed" => args.seed = Some(parse_value(k, value)?),
            "jobs" => args.jobs = Some(parse_value(k, value)?),
            "out" => args.out = Some(PathBuf::from(value)),
            "plot" => args.plot = parse_value(k, value)?,
            _ => unreachable!("key list and match arms agree"),
        }
    }
    Ok(args)
}

impl Args {
    /// Field-wise merge where `self` (the flags) wins over `file`.
    pub fn over(self, file: Args) -> Args {
        Args {
            command: self.command.or(file.command),
            lattice: self.lattice.or(file.lattice),
            size: self.size.or(file.size),
            steps: self.steps.or(file.steps),
            horizon: self.horizon.or(file.horizon),
            noise: self.noise.or(file.noise),
            p: self.p.or(file.p),
            p_min: self.p_min.or(file.p_min),
            p_max: self.p_max.or(file.p_max),
            p_count: self.p_count.or(file.p_count),
            p_values: self.p_values.or(file.p_values),
            epsilon: self.epsilon.or(file.epsilon),
            restarts: self.restarts.or(file.restarts),
            samples: self.samples.or(file.samples),
            seed: self.seed.or(file.seed),
            jobs: self.jobs.or(file.jobs),
            out: self.out.or(file.out),
            plot: self.plot || file.plot,
            config: self.config,
        }
    }
}

/// Validated settings for one invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub lattice: LatticeKind,
    /// Cycle size; `None` on the line.
    pub size: Option<usize>,
    pub steps: usize,
    /// Line half-width for `simulate`/`oracle-check`, step count for `mixing`.
    pub horizon: usize,
    pub noise: NoiseTarget,
    pub p: f64,
    /// Noise rates for `sweep` and `decay`.
    pub p_grid: Vec<f64>,
    pub epsilon: Option<f64>,
    pub restarts: usize,
    pub samples: usize,
    pub seed: u64,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub plot: bool,
}

pub const DEFAULT_STEPS: usize = 100;
pub const DEFAULT_SAMPLES: usize = 100_000;

fn check_rate(key: &str, p: f64) -> Result<f64, CliError> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(CliError::invalid(key, p, "must lie in [0, 1]"))
    }
}

impl RunConfig {
    pub fn from_args(args: Args) -> Result<RunConfig, CliError> {
        let command = args
            .command
            .ok_or_else(|| CliError::config("missing `command` (simulate, sweep, mixing, decay, resources or oracle-check)"))?;
        let lattice = args.lattice.unwrap_or(match command {
            Command::Mixing => LatticeKind::Cycle,
            _ => LatticeKind::Line,
        });
        match (command, lattice) {
            (Command::Sweep | Command::Decay, LatticeKind::Cycle) => {
                return Err(CliError::invalid("lattice", "cycle", &format!("`{}` runs on the line", command.name())))
            }
            (Command::Mixing, LatticeKind::Line) => {
                return Err(CliError::invalid("lattice", "line", "`mixing` runs on a cycle"))
            }
            _ => {}
        }
        let size = match lattice {
            LatticeKind::Line => None,
            LatticeKind::Cycle => {
                let n = args
                    .size
                    .ok_or_else(|| CliError::config("`size` is required when lattice=cycle"))?;
                if n < 3 {
                    return Err(CliError::invalid("size", n, "a cycle needs at least 3 sites"));
                }
                Some(n)
            }
        };
        let steps = args.steps.unwrap_or(DEFAULT_STEPS);
        if steps < 1 && matches!(command, Command::Sweep | Command::Decay | Command::Resources) {
            return Err(CliError::invalid("steps", steps, "must be at least 1"));
        }
        let horizon = match (command, size) {
            (Command::Mixing, Some(n)) => {
                let h = args.horizon.unwrap_or(10 * n);
                if h < n {
                    return Err(CliError::invalid("horizon", h, "must be at least the cycle size"));
                }
                h
            }
            (_, None) => {
                let h = args.horizon.unwrap_or(steps).max(1);
                if h < steps {
                    return Err(CliError::invalid("horizon", h, "the line must hold every step"));
                }
                h
            }
            (_, Some(_)) => args.horizon.unwrap_or(steps),
        };
        let noise = args.noise.unwrap_or(NoiseArg::Position).into();
        let p = check_rate("p", args.p.unwrap_or(0.0))?;
        let p_grid = match command {
            Command::Sweep => match args.p_values {
                Some(values) => values,
                None => {
                    let lo = check_rate("p-min", args.p_min.unwrap_or(0.0))?;
                    let hi = check_rate("p-max", args.p_max.unwrap_or(0.2))?;
                    if lo > hi {
                        return Err(CliError::invalid("p-min", lo, "must not exceed p-max"));
                    }
                    let count = args.p_count.unwrap_or(41);
                    if count < 1 {
                        return Err(CliError::invalid("p-count", count, "must be at least 1"));
                    }
                    qwalk_core::experiments::linear_grid(lo, hi, count)
                }
            },
            Command::Decay => args.p_values.unwrap_or_else(|| vec![0.0, 0.05, 0.1]),
            _ => Vec::new(),
        };
        for &v in &p_grid {
            check_rate("p-values", v)?;
        }
        if command == Command::Sweep && p_grid.windows(2).any(|w| w[0] > w[1]) {
            return Err(CliError::invalid("p-values", format_list(&p_grid), "must be sorted ascending"));
        }
        if command == Command::Decay {
            if p_grid.is_empty() {
                return Err(CliError::invalid("p-values", "", "needs at least one rate"));
            }
            for (i, a) in p_grid.iter().enumerate() {
                if p_grid[..i].contains(a) {
                    return Err(CliError::invalid("p-values", a, "duplicate rate"));
                }
            }
        }
        if let Some(e) = args.epsilon {
            if !(e > 0.0 && e < 2.0) {
                return Err(CliError::invalid("epsilon", e, "must lie in (0, 2) for the unhalved TVD"));
            }
        }
        let restarts = args.restarts.unwrap_or(0);
        if restarts > 0 {
            if command != Command::Mixing {
                return Err(CliError::invalid("restarts", restarts, "only used by `mixing`"));
            }
            if size.is_some_and(|n| n % 2 == 0) {
                return Err(CliError::invalid("restarts", restarts, "warm starts need an odd cycle"));
            }
            if steps < 1 {
                return Err(CliError::invalid("steps", steps, "warm starts need at least one step"));
            }
        }
        let samples = args.samples.unwrap_or(DEFAULT_SAMPLES);
        if samples < 1 {
            return Err(CliError::invalid("samples", samples, "must be at least 1"));
        }
        if let Some(j) = args.jobs {
            if j < 1 {
                return Err(CliError::invalid("jobs", j, "must be at least 1"));
            }
        }
        if args.plot {
            if command == Command::Resources {
                return Err(CliError::invalid("plot", true, "`resources` has nothing to plot"));
            }
            if args.out.is_none() {
                return Err(CliError::invalid("plot", true, "needs `out` to place the SVG"));
            }
        }
        Ok(RunConfig {
            command,
            lattice,
            size,
            steps,
            horizon,
            noise,
            p,
            p_grid,
            epsilon: args.epsilon,
            restarts,
            samples,
            seed: args.seed.unwrap_or(0),
            jobs: args.jobs,
            out: args.out,
            plot: args.plot,
        })
    }

    /// Settings that determine the numbers, as `key=value` pairs. Worker
    /// count and output location are left out.
    pub fn echo(&self) -> String {
        let mut parts = vec![format!("command={}", self.command.name())];
        match self.size {
            Some(n) => parts.push(format!("lattice=cycle size={n}")),
            None => parts.push("lattice=line".to_string()),
        }
        match self.command {
            Command::Mixing => parts.push(format!("horizon={}", self.horizon)),
            Command::Simulate | Command::OracleCheck if self.size.is_none() => {
                parts.push(format!("steps={} horizon={}", self.steps, self.horizon))
            }
            _ => parts.push(format!("steps={}", self.steps)),
        }
        parts.push(format!("noise={}", self.noise.name()));
        match self.command {
            Command::Sweep | Command::Decay => parts.push(format!("p-values={}", format_list(&self.p_grid))),
            _ => parts.push(format!("p={}", self.p)),
        }
        if self.command == Command::Mixing {
            if let Some(e) = self.epsilon {
                parts.push(format!("epsilon={e}"));
            }
            if self.restarts > 0 {
                parts.push(format!("restarts={} steps={}", self.restarts, self.steps));
            }
        }
        if self.command == Command::OracleCheck {
            parts.push(format!("samples={} seed={}", self.samples, self.seed));
        }
        parts.join(" ")
    }
}

fn format_list(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

/// Parses argv and the optional config file into a validated config.
pub fn parse_config<I, T>(argv: I) -> Result<RunConfig, ParseOutcome>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let flags = Args::try_parse_from(argv).map_err(ParseOutcome::Clap)?;
    let file = match &flags.config {
        Some(path) => parse_config_file(path).map_err(ParseOutcome::Error)?,
        None => Args::default(),
    };
    RunConfig::from_args(flags.over(file)).map_err(ParseOutcome::Error)
}

/// Why [`parse_config`] did not produce a config.
#[derive(Debug)]
pub enum ParseOutcome {
    /// clap usage error, or `--help`/`--version` output.
    Clap(clap::Error),
    Error(CliError),
}
