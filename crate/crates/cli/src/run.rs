//! Command dispatch and output files.

use std::fs;
use std::path::{Path, PathBuf};

use qwalk_core::experiments::{
    classical_match_steps, cycle_mixing_run, negativity_decay_run, resource_estimate, sweep_noise,
    trajectory_oracle, warm_start_distribution, ResourceMode,
};
use qwalk_core::{
    evolve, evolve_with, position_distribution, tvd, Distribution, Lattice, MixingResult, MixingTime,
    NoiseModel, Observable, TvdReference, WalkConfig,
};

use crate::config::{Command, RunConfig};
use crate::error::CliError;
use crate::svg::{self, Series};
use crate::table::{Cell, ResultTable, Table};

pub const TVD_NOTE: &str = "tvd: unhalved, sum_x |P(x) - Q(x)|, range [0, 2]";

/// A finished run: the CSV table and, when requested, the SVG text.
pub struct Output {
    pub table: ResultTable,
    pub plot: Option<String>,
}

/// Runs the configured experiment on a pool of `jobs` workers (the global
/// pool when unset).
pub fn execute(cfg: &RunConfig) -> Result<Output, CliError> {
    match cfg.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::config(format!("cannot start {n} workers: {e}")))?
            .install(|| compute(cfg)),
        None => compute(cfg),
    }
}

fn compute(cfg: &RunConfig) -> Result<Output, CliError> {
    let (mut table, plot) = match cfg.command {
        Command::Simulate => simulate(cfg)?,
        Command::Sweep => sweep(cfg)?,
        Command::Mixing => mixing(cfg)?,
        Command::Decay => decay(cfg)?,
        Command::Resources => (resources(cfg)?, None),
        Command::OracleCheck => oracle_check(cfg)?,
    };
    let mut provenance = vec![
        format!("qwalk {}", env!("CARGO_PKG_VERSION")),
        format!("config: {}", cfg.echo()),
        TVD_NOTE.to_string(),
    ];
    provenance.append(&mut table.provenance);
    provenance.push(format!(
        "timestamp: {}",
        chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
    ));
    table.provenance = provenance;
    let plot = if cfg.plot {
        plot.map(|p| svg::render(&p.title, &p.x_label, &p.y_label, &plot_series(&table.main, &p.x, &p.ys)))
    } else {
        None
    };
    Ok(Output { table, plot })
}

struct PlotSpec {
    title: String,
    x_label: String,
    y_label: String,
    x: String,
    ys: Vec<String>,
}

impl PlotSpec {
    fn new(title: impl Into<String>, x: &str, y_label: &str, ys: &[&str]) -> PlotSpec {
        PlotSpec {
            title: title.into(),
            x_label: x.to_string(),
            y_label: y_label.to_string(),
            x: x.to_string(),
            ys: ys.iter().map(|s| s.to_string()).collect(),
        }
    }
}

fn plot_series(table: &Table, x: &str, ys: &[String]) -> Vec<Series> {
    let xs: Vec<f64> = table
        .column(x)
        .expect("plot x column exists")
        .into_iter()
        .map(|c| c.as_f64().unwrap_or(f64::NAN))
        .collect();
    ys.iter()
        .map(|name| Series {
            name: name.clone(),
            points: xs
                .iter()
                .zip(table.column(name).expect("plot y column exists"))
                .map(|(&x, c)| (x, c.as_f64().unwrap_or(f64::NAN)))
                .collect(),
        })
        .collect()
}

fn lattice_of(cfg: &RunConfig) -> Result<Lattice, CliError> {
    Ok(match cfg.size {
        Some(n) => Lattice::cycle(n)?,
        None => Lattice::line(cfg.horizon)?,
    })
}

fn lattice_label(lattice: &Lattice) -> String {
    match *lattice {
        Lattice::Line { horizon } => format!("line, half-width {horizon}"),
        Lattice::Cycle { size } => format!("cycle N={size}"),
    }
}

fn simulate(cfg: &RunConfig) -> Result<(ResultTable, Option<PlotSpec>), CliError> {
    let lattice = lattice_of(cfg)?;
    let walk = WalkConfig::new(lattice, cfg.steps, NoiseModel::new(cfg.noise, cfg.p)?)?;
    let mut observers = vec![Observable::Tvd(TvdReference::Auto), Observable::Negativity];
    if lattice.is_line() {
        observers.push(Observable::Sigma);
    }
    let ev = evolve(&walk, &observers)?;
    let mut t = Table::new(["t", "sigma", "tvd", "negativity"])?;
    for rec in ev.series.records() {
        t.push(vec![
            Cell::index(rec.t),
            Cell::Real(rec.sigma.unwrap_or(f64::NAN)),
            Cell::Real(rec.tvd.expect("tvd requested")),
            Cell::Real(rec.negativity.expect("negativity requested")),
        ]);
    }
    let mut table = ResultTable::new(t);
    table.note(match lattice {
        Lattice::Line { .. } => "tvd reference: parity-restricted top-hat of half-width floor(t/sqrt(2))",
        Lattice::Cycle { .. } => "tvd reference: uniform; sigma is undefined on a cycle (NaN)",
    });
    let title = format!("{}, {} noise p={}", lattice_label(&lattice), cfg.noise.name(), cfg.p);
    Ok((table, Some(PlotSpec::new(title, "t", "value", &["tvd", "negativity"]))))
}

fn sweep(cfg: &RunConfig) -> Result<(ResultTable, Option<PlotSpec>), CliError> {
    let rows = sweep_noise(cfg.steps, cfg.noise, &cfg.p_grid)?;
    let mut t = Table::new(["p", "tvd_final", "negativity_final", "sigma_final"])?;
    for r in rows {
        t.push(vec![
            Cell::Real(r.p),
            Cell::Real(r.tvd_final),
            Cell::Real(r.negativity_final),
            Cell::Real(r.sigma_final),
        ]);
    }
    let mut table = ResultTable::new(t);
    table.note(format!("tvd reference: parity-restricted top-hat for t={}", cfg.steps));
    let title = format!("line T={}, {} noise", cfg.steps, cfg.noise.name());
    Ok((table, Some(PlotSpec::new(title, "p", "value", &["tvd_final", "negativity_final"]))))
}

fn mixing_cell(m: &MixingResult<f64>) -> Cell {
    match m.mixing_time {
        MixingTime::Reached(t) => Cell::index(t),
        MixingTime::NotReached => Cell::Text("NotReached".into()),
    }
}

fn mixing(cfg: &RunConfig) -> Result<(ResultTable, Option<PlotSpec>), CliError> {
    let n = cfg.size.expect("mixing runs on a cycle");
    let run = cycle_mixing_run(n, cfg.noise, cfg.p, cfg.horizon, cfg.epsilon)?;
    let mut t = Table::new(["t", "tvd", "tvd_averaged", "negativity"])?;
    for k in 0..=cfg.horizon {
        t.push(vec![
            Cell::index(k),
            Cell::Real(run.tvd[k]),
            Cell::Real(run.tvd_averaged[k]),
            Cell::Real(run.negativity[k]),
        ]);
    }
    let mut table = ResultTable::new(t);
    table.note("tvd reference: uniform; tvd_averaged uses the mean of P(0..t-1) for t >= 1");
    let mut summary = Table::new(["measure", "epsilon", "mixing_time", "horizon"])?;
    for (name, m) in [("M", &run.mixing), ("M_avg", &run.averaged_mixing)] {
        summary.push(vec![
            Cell::Text(name.into()),
            Cell::Real(m.epsilon),
            mixing_cell(m),
            Cell::index(m.horizon),
        ]);
    }
    table.block("summary", summary);
    if cfg.restarts > 0 {
        let uniform = Distribution::uniform(Lattice::cycle(n)?);
        let mut warm = Table::new(["restarts", "steps", "tvd"])?;
        for r in 0..=cfg.restarts {
            let d = warm_start_distribution::<f64>(n, cfg.steps, r)?;
            warm.push(vec![Cell::index(r), Cell::index(cfg.steps), Cell::Real(tvd(&d, &uniform)?)]);
        }
        table.block("warm start", warm);
    }
    let title = format!("cycle N={n}, {} noise p={}", cfg.noise.name(), cfg.p);
    Ok((table, Some(PlotSpec::new(title, "t", "value", &["tvd", "tvd_averaged", "negativity"]))))
}

fn decay(cfg: &RunConfig) -> Result<(ResultTable, Option<PlotSpec>), CliError> {
    let runs = negativity_decay_run(cfg.steps, &cfg.p_grid, cfg.noise)?;
    let names: Vec<String> = cfg.p_grid.iter().map(|p| format!("negativity_p={p}")).collect();
    let mut t = Table::new(std::iter::once("t".to_string()).chain(names.iter().cloned()))?;
    for k in 0..=cfg.steps {
        let mut row = vec![Cell::index(k)];
        row.extend(runs.iter().map(|r| Cell::Real(r.negativity[k])));
        t.push(row);
    }
    let table = ResultTable::new(t);
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let title = format!("line T={}, {} noise", cfg.steps, cfg.noise.name());
    Ok((table, Some(PlotSpec::new(title, "t", "negativity", &refs))))
}

fn resources(cfg: &RunConfig) -> Result<ResultTable, CliError> {
    let steps = cfg.steps as u64;
    let mode = match cfg.size {
        Some(n) => ResourceMode::Cycle { size: n as u64, steps },
        None => ResourceMode::Line { steps },
    };
    let r = resource_estimate(mode, cfg.noise, cfg.p)?;
    let mut columns = vec!["steps", "register_width", "measurements", "quantum_gates", "qubits", "ancillae"];
    let mut row = vec![
        Cell::count(r.steps),
        Cell::count(r.register_width),
        Cell::count(r.measurements),
        Cell::count(r.quantum_gates),
        Cell::count(r.qubits),
        Cell::count(r.ancillae),
    ];
    if cfg.size.is_none() {
        columns.push("classical_match_steps");
        row.push(Cell::count(classical_match_steps(steps)));
    }
    let mut t = Table::new(columns)?;
    t.push(row);
    let mut table = ResultTable::new(t);
    table.note(format!("counting model: {}", r.counting_model));
    table.note(format!("gate class: {}", r.gate_class));
    table.note(format!("qubit class: {}", r.qubit_class));
    Ok(table)
}

fn oracle_check(cfg: &RunConfig) -> Result<(ResultTable, Option<PlotSpec>), CliError> {
    let lattice = lattice_of(cfg)?;
    let walk = WalkConfig::new(lattice, cfg.steps, NoiseModel::new(cfg.noise, cfg.p)?)?;
    let exact = position_distribution(&evolve_with(&walk, |_| Ok(()))?);
    let sampled = trajectory_oracle(&walk, cfg.samples, cfg.seed)?;
    let mut t = Table::new(["x", "p_exact", "p_sampled", "abs_diff"])?;
    for ((x, a), (_, b)) in exact.iter().zip(sampled.iter()) {
        t.push(vec![Cell::Int(x), Cell::Real(a), Cell::Real(b), Cell::Real((a - b).abs())]);
    }
    let mut table = ResultTable::new(t);
    table.note(format!("tvd(exact, sampled): {:.16e}", tvd(&exact, &sampled)?));
    let title = format!("{}, {} noise p={}, {} trajectories", lattice_label(&lattice), cfg.noise.name(), cfg.p, cfg.samples);
    Ok((table, Some(PlotSpec::new(title, "x", "probability", &["p_exact", "p_sampled"]))))
}

/// Where the SVG for a given CSV path goes.
pub fn plot_path(csv: &Path) -> PathBuf {
    csv.with_extension("svg")
}

fn temp_path(target: &Path) -> PathBuf {
    let name = target.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    target.with_file_name(format!(".{name}.{}.tmp", std::process::id()))
}

/// Writes every file or none: contents go to temporaries next to their
/// targets, which are renamed only after all writes succeed. On failure,
/// temporaries and already renamed targets are removed.
pub fn write_all(files: &[(PathBuf, String)]) -> Result<(), CliError> {
    let temps: Vec<PathBuf> = files.iter().map(|(p, _)| temp_path(p)).collect();
    let cleanup = |upto_renamed: usize| {
        for (k, tmp) in temps.iter().enumerate() {
            let _ = fs::remove_file(tmp);
            if k < upto_renamed {
                let _ = fs::remove_file(&files[k].0);
            }
        }
    };
    for ((_, contents), tmp) in files.iter().zip(&temps) {
        if let Err(e) = fs::write(tmp, contents) {
            cleanup(0);
            return Err(CliError::io(tmp, e));
        }
    }
    for (k, ((path, _), tmp)) in files.iter().zip(&temps).enumerate() {
        if let Err(e) = fs::rename(tmp, path) {
            cleanup(k);
            return Err(CliError::io(path, e));
        }
    }
    Ok(())
}

/// Runs the experiment and writes its outputs. Without an output path the
/// CSV is returned for the caller to print.
pub fn run(cfg: &RunConfig) -> Result<Option<String>, CliError> {
    let out = execute(cfg)?;
    let csv = out.table.to_csv();
    match &cfg.out {
        None => Ok(Some(csv)),
        Some(path) => {
            let mut files = vec![(path.clone(), csv)];
            if let Some(svg) = out.plot {
                files.push((plot_path(path), svg));
            }
            write_all(&files)?;
            Ok(None)
        }
    }
}
