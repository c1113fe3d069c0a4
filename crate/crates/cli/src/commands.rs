//! Subcommand definitions and their implementations.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use stochpath_core::bnc::AnchorPolicy;
use stochpath_core::recourse::vss_from_solutions;
use stochpath_core::{
    build_evp, build_two_stage, generate_instance, load_instance, parse_tsplib, save_instance, solve_model,
    FractionalSeparation, GenerationConfig, Instance, Solution, SolverParams,
};

use crate::plot::render_svg;
use crate::record::{status_label, ModelChoice, SolveRecord};
use crate::tables::{read_vss_csv, runs_csv, runs_markdown, vss_csv, vss_markdown, RunRow, VssRow};

/// Vehicle counts and required targets per vehicle of the benchmark grid.
pub const SUITE_VEHICLES: [usize; 5] = [1, 2, 3, 4, 5];
pub const SUITE_REQUIRED: [usize; 3] = [1, 3, 5];

#[derive(Debug, Parser)]
#[command(name = "stochpath", version, about = "Stochastic heterogeneous multi-vehicle Dubins routing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build instance files from a TSPLIB coordinate file.
    Generate(GenerateArgs),
    /// Solve one instance and write its record.
    Solve(SolveArgs),
    /// Solve both models and append a row to the VSS table.
    Vss(VssArgs),
    /// Draw the tours of a solve record as SVG.
    Plot(PlotArgs),
    /// Solve a set of instances with both models and write all tables.
    Suite(SuiteArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// TSPLIB file providing the target coordinates.
    pub tsplib: PathBuf,
    /// Number of vehicles.
    #[arg(short = 'n', long, default_value_t = 1, conflicts_with = "suite")]
    pub vehicles: usize,
    /// Required targets per vehicle.
    #[arg(short = 'f', long, default_value_t = 0, conflicts_with = "suite")]
    pub required: usize,
    /// Emit the whole 13-instance grid instead of a single instance.
    #[arg(long)]
    pub suite: bool,
    #[arg(long, default_value_t = 100)]
    pub scenarios: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Uniform support of the service times.
    #[arg(long, value_parser = parse_range, default_value = "5:15", allow_hyphen_values = true)]
    pub service_range: (f64, f64),
    /// Uniform support of the allowance offset from the mean service time.
    #[arg(long, value_parser = parse_range, default_value = "-3:3", allow_hyphen_values = true)]
    pub tau_bar_offset: (f64, f64),
    /// Penalty per unit of excess service time.
    #[arg(long, default_value_t = 1000.0)]
    pub gamma: f64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CutsPerComponent {
    One,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FractionalMode {
    On,
    Off,
    Depth,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Wall-clock limit in seconds.
    #[arg(long, default_value_t = 3600.0)]
    pub time_limit: f64,
    /// Relative optimality gap.
    #[arg(long, default_value_t = 1e-6)]
    pub gap: f64,
    /// Connectivity cuts per violating component.
    #[arg(long, value_enum, default_value_t = CutsPerComponent::One)]
    pub cuts_per_component: CutsPerComponent,
    /// Min-cut separation of fractional points.
    #[arg(long, value_enum, default_value_t = FractionalMode::Depth)]
    pub fractional: FractionalMode,
    /// Progress record every this many nodes; 0 logs only incumbent and bound updates.
    #[arg(long, default_value_t = 0)]
    pub log_interval: u64,
}

impl SolverArgs {
    pub fn params(&self) -> Result<SolverParams> {
        if !(self.time_limit.is_finite() && self.time_limit >= 0.0) {
            bail!("time limit must be a non-negative number of seconds");
        }
        if !(self.gap >= 0.0) {
            bail!("gap must be non-negative");
        }
        let defaults = SolverParams::default();
        Ok(SolverParams {
            time_limit: Duration::from_secs_f64(self.time_limit),
            rel_gap: self.gap,
            anchors: match self.cuts_per_component {
                CutsPerComponent::One => AnchorPolicy::Strongest,
                CutsPerComponent::All => AnchorPolicy::All,
            },
            fractional: match self.fractional {
                FractionalMode::On => FractionalSeparation::Always,
                FractionalMode::Off => FractionalSeparation::Off,
                FractionalMode::Depth => defaults.fractional,
            },
            log_interval: self.log_interval,
            ..defaults
        })
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value_t = ModelChoice::Stochastic)]
    pub model: ModelChoice,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VssArgs {
    pub instance: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Directory holding `vss.csv` and `vss.md`.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    pub instance: PathBuf,
    /// Record written by `solve`.
    pub record: PathBuf,
    /// Output file; defaults to `<record stem>.svg` next to the record.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SuiteArgs {
    /// Instance files.
    #[arg(required = true)]
    pub instances: Vec<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Instances solved concurrently.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected LO:HI, got `{s}`"))?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("bad lower end `{lo}`: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("bad upper end `{hi}`: {e}"))?;
    if lo > hi {
        return Err(format!("lower end {lo} exceeds upper end {hi}"));
    }
    Ok((lo, hi))
}

pub fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Generate(a) => generate(&a).map(|_| ExitCode::SUCCESS),
        Command::Solve(a) => solve_cmd(&a),
        Command::Vss(a) => vss_cmd(&a),
        Command::Plot(a) => plot_cmd(&a).map(|_| ExitCode::SUCCESS),
        Command::Suite(a) => suite_cmd(&a),
    }
}

fn exit_for(certified: bool) -> ExitCode {
    if certified {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let instance = load_instance(&text).with_context(|| format!("loading {}", path.display()))?;
    Ok(instance)
}

/// Writes the requested instances and returns their paths.
pub fn generate(a: &GenerateArgs) -> Result<Vec<PathBuf>> {
    let text = fs::read_to_string(&a.tsplib).with_context(|| format!("reading {}", a.tsplib.display()))?;
    let data = parse_tsplib(&text).with_context(|| format!("parsing {}", a.tsplib.display()))?;
    let base = match &data.name {
        Some(n) => n.clone(),
        None => a.tsplib.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "instance".into()),
    };
    let grid: Vec<(usize, usize)> = if a.suite {
        SUITE_VEHICLES
            .iter()
            .flat_map(|&n| {
                let fs: &[usize] = if n == 1 { &[0] } else { &SUITE_REQUIRED };
                fs.iter().map(move |&f| (n, f))
            })
            .collect()
    } else {
        vec![(a.vehicles, a.required)]
    };
    let config = GenerationConfig { service_range: a.service_range, tau_bar_offset: a.tau_bar_offset, gamma: a.gamma };
    let coords = data.coordinates();
    let mut written = Vec::new();
    for (n, f) in grid {
        let inst = generate_instance(&base, &coords, n, f, a.scenarios, a.seed, config)
            .with_context(|| format!("generating {base}-{n}-{f}"))?;
        let path = a.out.join(format!("{}.json", inst.name));
        write(&path, &save_instance(&inst))?;
        println!("{}", path.display());
        written.push(path);
    }
    Ok(written)
}

pub fn solve_instance(instance: &Instance, model: ModelChoice, params: &SolverParams) -> Solution {
    let (m, map) = match model {
        ModelChoice::Stochastic => build_two_stage(instance),
        ModelChoice::Evp => build_evp(instance),
    };
    solve_model(&m, &map, params)
}

pub fn record_path(out: &Path, instance: &str, model: ModelChoice) -> PathBuf {
    out.join(format!("{instance}.{}.json", model.as_str()))
}

fn summary(r: &SolveRecord) -> String {
    format!(
        "{} [{}] status={} objective={:.4} first_stage={:.4} penalty={:.4} gap={:.2e} nodes={} cuts={} time={:.2}s",
        r.instance,
        r.model.as_str(),
        status_label(r.status),
        r.objective,
        r.first_stage_cost,
        r.expected_penalty,
        r.gap,
        r.nodes,
        r.cuts_added,
        r.wall_time_s
    )
}

fn solve_cmd(a: &SolveArgs) -> Result<ExitCode> {
    let params = a.solver.params()?;
    let instance = read_instance(&a.instance)?;
    let solution = solve_instance(&instance, a.model, &params);
    let record = SolveRecord::new(&instance.name, a.model, &solution);
    write(&record_path(&a.out, &instance.name, a.model), &record.to_json())?;
    println!("{}", summary(&record));
    Ok(exit_for(record.certified))
}

/// Replace any row for the same instance, keeping first-seen order.
pub fn merge_vss_rows(mut rows: Vec<VssRow>, row: VssRow) -> Vec<VssRow> {
    match rows.iter_mut().find(|r| r.instance == row.instance) {
        Some(slot) => *slot = row,
        None => rows.push(row),
    }
    rows
}

fn append_vss(out: &Path, row: VssRow) -> Result<()> {
    let csv_path = out.join("vss.csv");
    let rows = if csv_path.exists() {
        let text = fs::read_to_string(&csv_path).with_context(|| format!("reading {}", csv_path.display()))?;
        read_vss_csv(&text).with_context(|| format!("parsing {}", csv_path.display()))?
    } else {
        Vec::new()
    };
    let rows = merge_vss_rows(rows, row);
    write(&csv_path, &vss_csv(&rows))?;
    write(&out.join("vss.md"), &vss_markdown(&rows))
}

struct PairOutcome {
    stochastic: SolveRecord,
    evp: SolveRecord,
    vss: VssRow,
}

fn solve_pair(instance: &Instance, params: &SolverParams, out: &Path) -> Result<PairOutcome> {
    let s = solve_instance(instance, ModelChoice::Stochastic, params);
    let e = solve_instance(instance, ModelChoice::Evp, params);
    let report = vss_from_solutions(instance, &s, &e);
    let stochastic = SolveRecord::new(&instance.name, ModelChoice::Stochastic, &s);
    let evp = SolveRecord::new(&instance.name, ModelChoice::Evp, &e);
    write(&record_path(out, &instance.name, ModelChoice::Stochastic), &stochastic.to_json())?;
    write(&record_path(out, &instance.name, ModelChoice::Evp), &evp.to_json())?;
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    write(&out.join(format!("{}.vss.json", instance.name)), &json)?;
    Ok(PairOutcome { stochastic, evp, vss: VssRow::from(&report) })
}

fn vss_cmd(a: &VssArgs) -> Result<ExitCode> {
    let params = a.solver.params()?;
    let instance = read_instance(&a.instance)?;
    let outcome = solve_pair(&instance, &params, &a.out)?;
    let row = outcome.vss;
    println!(
        "{} D*={:.4} S*={:.4} VSS={:.4} extra_time={:.2}s",
        row.instance, row.d_star, row.s_star, row.vss, row.extra_time_s
    );
    let certified = row.certified;
    append_vss(&a.out, row)?;
    Ok(exit_for(certified))
}

/// Sampling step small enough that the chord error on the tightest arc stays
/// far below the length tolerance.
pub fn plot_step(instance: &Instance) -> f64 {
    let r = instance.vehicles.iter().map(|v| v.turn_radius).fold(f64::INFINITY, f64::min);
    (r / 50.0).max(1e-6)
}

pub fn plot_record(instance: &Instance, record: &SolveRecord) -> Result<String> {
    if record.instance != instance.name {
        bail!("record belongs to instance `{}`, not `{}`", record.instance, instance.name);
    }
    Ok(render_svg(instance, &record.tours, plot_step(instance))?)
}

fn plot_cmd(a: &PlotArgs) -> Result<()> {
    let instance = read_instance(&a.instance)?;
    let text = fs::read_to_string(&a.record).with_context(|| format!("reading {}", a.record.display()))?;
    let record: SolveRecord =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", a.record.display()))?;
    let svg = plot_record(&instance, &record)?;
    let path = a.output.clone().unwrap_or_else(|| a.record.with_extension("svg"));
    write(&path, &svg)?;
    println!("{}", path.display());
    Ok(())
}

fn suite_cmd(a: &SuiteArgs) -> Result<ExitCode> {
    let params = a.solver.params()?;
    let instances = a.instances.iter().map(|p| read_instance(p)).collect::<Result<Vec<_>>>()?;
    let slots: Vec<Mutex<Option<Result<PairOutcome>>>> = instances.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..a.jobs.clamp(1, instances.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(inst) = instances.get(i) else { break };
                let outcome = solve_pair(inst, &params, &a.out);
                if let Ok(o) = &outcome {
                    eprintln!("{}", summary(&o.stochastic));
                    eprintln!("{}", summary(&o.evp));
                }
                *slots[i].lock().expect("slot lock") = Some(outcome);
            });
        }
    });
    let mut runs = Vec::new();
    let mut vss = Vec::new();
    for slot in slots {
        let o = slot.into_inner().expect("slot lock").expect("every instance was processed")?;
        runs.push(RunRow::from(&o.stochastic));
        vss.push(o.vss);
    }
    write(&a.out.join("runs.md"), &runs_markdown(&runs))?;
    write(&a.out.join("runs.csv"), &runs_csv(&runs))?;
    write(&a.out.join("vss.md"), &vss_markdown(&vss))?;
    write(&a.out.join("vss.csv"), &vss_csv(&vss))?;
    print!("{}", vss_markdown(&vss));
    let certified = vss.iter().all(|r| r.certified);
    Ok(exit_for(certified))
}
