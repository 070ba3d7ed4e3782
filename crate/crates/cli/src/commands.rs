//! Subcommand dispatch.
//!
//! Exit codes: 0 success, 1 runtime failure (IO or numerics, diagnostic on
//! stderr), 2 usage error (unknown command or flag).

use crate::config::{ScenarioFile, TargetSpec};
use crate::{csvio, plot};
use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use fieldtrack_core::field::ObservationSet;
use fieldtrack_core::inference::{
    ci_distance_normal, pvalue_map, test_point_reach, LimitLawConfig,
};
use fieldtrack_core::sim::{
    mc_distance_study, mc_power_study, sample_observations, SyntheticScenario,
};
use fieldtrack_core::tracker::{confidence_ellipse, track_curve, Trajectory, TrajectoryExport};
use nalgebra::DVector;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(
    name = "fieldtrack",
    version,
    about = "Track integral curves of noisy vector fields and test where they reach"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "lower")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Parser)]
struct CommonArgs {
    /// Scenario config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output path.
    #[arg(long)]
    out: PathBuf,
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output format.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample observations from the scenario and write them as CSV.
    GenData(CommonArgs),
    /// Track the estimated curve together with its bias and covariance.
    Track(CommonArgs),
    /// Test whether the curve reaches the configured target.
    Test(CommonArgs),
    /// Monte Carlo distribution study of the minimal squared distance.
    McStudy(CommonArgs),
    /// Empirical vs theoretical power over the configured target list.
    PowerCurve(CommonArgs),
    /// p-value map over the configured grid.
    PMap(CommonArgs),
}

/// Parse and run; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err:#}");
            1
        }
    }
}

pub fn dispatch(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::GenData(args) => gen_data(&args),
        Command::Track(args) => track(&args),
        Command::Test(args) => test(&args),
        Command::McStudy(args) => mc_study(&args),
        Command::PowerCurve(args) => power_curve(&args),
        Command::PMap(args) => p_map(&args),
    }
}

fn write_out(path: &Path, contents: &str) -> anyhow::Result<()> {
    let mut f = std::fs::File::create(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    f.write_all(contents.as_bytes())?;
    Ok(())
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    write_out(path, &(text + "\n"))
}

fn observations(
    file: &ScenarioFile,
    scenario: &SyntheticScenario,
) -> anyhow::Result<ObservationSet> {
    match &file.data {
        Some(path) => csvio::read_observations(path, scenario.domain.clone()),
        None => Ok(sample_observations(scenario)?),
    }
}

fn law_config(file: &ScenarioFile, scenario: &SyntheticScenario) -> LimitLawConfig {
    let beta = file.track.as_ref().map(|t| t.beta).unwrap_or(0.0);
    LimitLawConfig {
        draws: file.draws,
        seed: scenario.seed,
        beta,
    }
}

fn gen_data(args: &CommonArgs) -> anyhow::Result<()> {
    let file = ScenarioFile::load(&args.config)?;
    let scenario = file.scenario(args.seed)?;
    let obs = sample_observations(&scenario)?;
    csvio::write_observations(&obs, &args.out)
}

fn ellipses_along(
    traj: &Trajectory,
    every: usize,
    alpha: f64,
) -> anyhow::Result<Vec<fieldtrack_core::tracker::Ellipsoid>> {
    let mut out = Vec::new();
    for s in traj.states.iter().skip(every).step_by(every.max(1)) {
        out.push(confidence_ellipse(
            s,
            alpha,
            traj.sample_size_n,
            traj.bandwidth.h,
            traj.bandwidth.beta,
        )?);
    }
    Ok(out)
}

fn track(args: &CommonArgs) -> anyhow::Result<()> {
    let file = ScenarioFile::load(&args.config)?;
    let scenario = file.scenario(args.seed)?;
    let cfg = file.track_config()?;
    let obs = observations(&file, &scenario)?;
    let traj = track_curve(&obs, &cfg)?;
    match args.format.unwrap_or(Format::Json) {
        Format::Json => write_json(&args.out, &TrajectoryExport::from(&traj)),
        Format::Svg => {
            let ellipses = ellipses_along(&traj, file.ellipse_every, file.alpha)?;
            write_out(&args.out, &plot::svg_trajectory(&traj, &ellipses)?)
        }
        Format::Csv => bail!("track supports json or svg output"),
    }
}

fn test(args: &CommonArgs) -> anyhow::Result<()> {
    let file = ScenarioFile::load(&args.config)?;
    let scenario = file.scenario(args.seed)?;
    let cfg = file.track_config()?;
    let obs = observations(&file, &scenario)?;
    let traj = track_curve(&obs, &cfg)?;
    let law = law_config(&file, &scenario);
    match (&file.target, file.d2_null) {
        (Some(TargetSpec::Point(a)), None) => {
            let report = test_point_reach(
                &traj,
                &DVector::from_vec(a.clone()),
                file.alpha,
                scenario.n,
                cfg.bandwidth.h,
                &law,
            )?;
            write_json(&args.out, &report)
        }
        (Some(_), Some(d2_null)) => {
            let target = file.target()?;
            let ci = ci_distance_normal(
                &traj,
                &target,
                d2_null,
                file.alpha,
                scenario.n,
                cfg.bandwidth.h,
                law.beta,
            )?;
            write_json(&args.out, &ci)
        }
        (Some(TargetSpec::Sphere { .. }), None) => bail!(
            "sphere targets need `d2_null` (normal-regime confidence interval); \
             the reach test takes a point target"
        ),
        (None, _) => bail!("test needs a `target` in the config"),
    }
}

fn mc_study(args: &CommonArgs) -> anyhow::Result<()> {
    let file = ScenarioFile::load(&args.config)?;
    let scenario = file.scenario(args.seed)?;
    let cfg = file.track_config()?;
    let reps = file
        .replications
        .context("mc-study needs `replications` in the config")?;
    let target = file.target()?;
    let d2_null = file.d2_null.unwrap_or(0.0);
    let study = mc_distance_study(&scenario, &cfg, &target, d2_null, reps, file.standardize)?;
    match args.format.unwrap_or(Format::Json) {
        Format::Json => write_json(&args.out, &study),
        Format::Svg => {
            let hist = study
                .histogram
                .as_ref()
                .context("study produced no histogram")?;
            write_out(
                &args.out,
                &plot::svg_histogram(hist, study.replications, file.standardize)?,
            )
        }
        Format::Csv => bail!("mc-study supports json or svg output"),
    }
}

fn power_curve(args: &CommonArgs) -> anyhow::Result<()> {
    let file = ScenarioFile::load(&args.config)?;
    let scenario = file.scenario(args.seed)?;
    let cfg = file.track_config()?;
    let reps = file
        .replications
        .context("power-curve needs `replications` in the config")?;
    let targets: Vec<DVector<f64>> = file
        .targets
        .as_ref()
        .context("power-curve needs `targets` in the config")?
        .iter()
        .map(|t| DVector::from_vec(t.clone()))
        .collect();
    let law = law_config(&file, &scenario);
    let study = mc_power_study(&scenario, &cfg, &targets, file.alpha, reps, &law)?;
    match args.format.unwrap_or(Format::Json) {
        Format::Json => write_json(&args.out, &study),
        Format::Svg => {
            let power = study.power.as_ref().context("no power data")?;
            write_out(&args.out, &plot::svg_power(power)?)
        }
        Format::Csv => bail!("power-curve supports json or svg output"),
    }
}

fn p_map(args: &CommonArgs) -> anyhow::Result<()> {
    let file = ScenarioFile::load(&args.config)?;
    let scenario = file.scenario(args.seed)?;
    let cfg = file.track_config()?;
    let obs = observations(&file, &scenario)?;
    let traj = track_curve(&obs, &cfg)?;
    let (grid, steps) = file.grid_points()?;
    let law = law_config(&file, &scenario);
    let entries = pvalue_map(
        &traj,
        &grid,
        file.alpha,
        scenario.n,
        cfg.bandwidth.h,
        &law,
    )?;
    match args.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let d = entries[0].0.len();
            let mut text = String::new();
            for j in 1..=d {
                text.push_str(&format!("x{j},"));
            }
            text.push_str("p\n");
            for (point, p) in &entries {
                for c in point.iter() {
                    text.push_str(&format!("{c},"));
                }
                text.push_str(&format!("{p}\n"));
            }
            write_out(&args.out, &text)
        }
        Format::Svg => write_out(&args.out, &plot::svg_pmap(&entries, &steps)?),
        Format::Json => {
            let rows: Vec<serde_json::Value> = entries
                .iter()
                .map(|(point, p)| {
                    serde_json::json!({
                        "point": point.iter().copied().collect::<Vec<f64>>(),
                        "p": p,
                    })
                })
                .collect();
            write_json(&args.out, &rows)
        }
    }
}

