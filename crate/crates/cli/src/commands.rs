use std::path::PathBuf;

use clap::Args;
use cspin_core::dynamics::{evolve_observable, satellite_magnetization_weights, InitialState};
use cspin_core::full_basis::{
    aggregate, disorder_order_parameter, full_floquet, full_magnetization_weights, product_state,
    sample_realization, DisorderSpec, FullBasisModel, RNG_IDENTITY,
};
use cspin_core::krylov::{effective_dimension, floquet_krylov, fragmentation_census, overlap_map, CycleSampler};
use cspin_core::operators::build_floquet;
use cspin_core::scar::scar_scatter;
use cspin_core::selfcheck::run_self_checks;
use cspin_core::sweep::{phase_sweep, AxisName, AxisSpec};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{
    load_config, resolve_model, section, Angle, DisorderFlags, EvolveFlags, KrylovFlags, ModelFlags, PhaseFlags,
    ResolvedModel,
};
use crate::error::{CliError, CliResult};
use crate::output::{heatmap_svg, num, Csv, Run};

#[derive(Args, Clone, Debug)]
pub struct CommonFlags {
    /// JSON config file or an earlier run manifest; flags override it
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory for CSV, SVG and manifest files
    #[arg(long = "out-dir", default_value = ".")]
    pub out_dir: PathBuf,
    /// Worker threads [default: available cores]
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, PartialEq, Eq)]
pub enum Outcome {
    Complete,
    /// Some sweep cells are NaN.
    Partial,
    /// A self-check exceeded its tolerance.
    ChecksFailed,
}

fn parse_initial(s: &str) -> CliResult<InitialState> {
    s.parse().map_err(|e: cspin_core::Error| CliError::usage(e.to_string()))
}

fn positive<T: PartialOrd + Default + std::fmt::Display>(name: &str, v: T) -> CliResult<T> {
    if v > T::default() {
        Ok(v)
    } else {
        Err(CliError::usage(format!("--{name} must be at least 1, got {v}")))
    }
}

fn layered_model(flags: ModelFlags, config: &serde_json::Value, default_n: usize, sector: bool) -> CliResult<ResolvedModel> {
    resolve_model(&flags.over(section(config)?), default_n, sector)
}

#[derive(Serialize)]
struct EvolveRecord {
    #[serde(flatten)]
    model: ResolvedModel,
    initial: String,
    cycles: u64,
    stride: u64,
}

pub fn evolve(common: &CommonFlags, model: ModelFlags, flags: EvolveFlags) -> CliResult<Outcome> {
    let config = load_config(common.config.as_deref(), "evolve")?;
    let model = layered_model(model, &config, 21, true)?;
    let flags = flags.or(section(&config)?);
    let initial = parse_initial(flags.initial.as_deref().unwrap_or("J-down"))?;
    let cycles = flags.cycles.unwrap_or(1000);
    let stride = positive("stride", flags.stride.unwrap_or(1))?;

    let basis = model.basis()?;
    let psi = initial.state(&basis)?;
    let mut run = Run::start("evolve", &common.out_dir)?;
    let u = build_floquet(&model.params, &basis)?;
    let series = evolve_observable(&u, &satellite_magnetization_weights(&basis), &psi, cycles, stride)?;

    let mut csv = Csv::new(&["cycle", "magnetization", "staggered"]);
    for k in 0..series.len() {
        csv.row([series.cycles[k].to_string(), num(series.magnetization[k]), num(series.staggered[k])]);
    }
    run.write("evolve.csv", &csv.into_string())?;
    run.finish(&EvolveRecord { model, initial: initial.to_string(), cycles, stride })?;
    Ok(Outcome::Complete)
}

/// `name:start:stop:count`, with an optional trailing `:linear`.
fn parse_axis(s: &str) -> CliResult<AxisSpec> {
    let bad = |why: &str| CliError::usage(format!("axis '{s}': {why} (expected name:start:stop:count)"));
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    if !(parts.len() == 4 || parts.len() == 5 && parts[4] == "linear") {
        return Err(bad("wrong number of fields"));
    }
    let name: AxisName = parts[0].parse().map_err(|e: cspin_core::Error| CliError::usage(e.to_string()))?;
    let start = parts[1].parse::<Angle>().map_err(|e| bad(&e))?.0;
    let stop = parts[2].parse::<Angle>().map_err(|e| bad(&e))?.0;
    let count = parts[3].parse::<usize>().map_err(|_| bad("count must be a positive integer"))?;
    let spec = AxisSpec::linear(name, start, stop, count);
    spec.validate()?;
    Ok(spec)
}

fn axis_string(a: &AxisSpec) -> String {
    format!("{}:{:?}:{:?}:{}", a.name, a.start, a.stop, a.count)
}

#[derive(Serialize)]
struct PhaseRecord {
    #[serde(flatten)]
    model: ResolvedModel,
    x: String,
    y: String,
    initial: String,
    cycles: u64,
    svg: bool,
}

pub fn phase(common: &CommonFlags, model: ModelFlags, flags: PhaseFlags) -> CliResult<Outcome> {
    let config = load_config(common.config.as_deref(), "phase")?;
    let model = layered_model(model, &config, 21, true)?;
    let flags = flags.or(section(&config)?);
    let x = parse_axis(flags.x.as_deref().ok_or_else(|| CliError::usage("phase needs --x"))?)?;
    let y = parse_axis(flags.y.as_deref().ok_or_else(|| CliError::usage("phase needs --y"))?)?;
    let initial = parse_initial(flags.initial.as_deref().unwrap_or("J-up"))?;
    let cycles = positive("cycles", flags.cycles.unwrap_or(10_000))?;
    let svg = flags.svg.unwrap_or(false);

    let basis = model.basis()?;
    initial.state(&basis)?;
    let mut run = Run::start("phase", &common.out_dir)?;
    let grid = phase_sweep(&model.params, &basis, &x, &y, &initial, cycles)?;

    let mut csv = Csv::new(&["x", "y", "order_parameter"]);
    for (xv, yv, v) in grid.cells() {
        csv.row([num(xv), num(yv), num(v)]);
    }
    run.write("phase.csv", &csv.into_string())?;
    if svg {
        let title = format!("time-averaged staggered magnetization, {cycles} cycles");
        let image = heatmap_svg(
            x.name.as_str(),
            &grid.x_axis.values,
            y.name.as_str(),
            &grid.y_axis.values,
            &grid.order_parameter,
            &title,
        );
        run.write("phase.svg", &image)?;
    }
    run.warnings = grid
        .failures
        .iter()
        .map(|f| {
            format!(
                "cell {}={:?} {}={:?} is NaN: {}",
                x.name, grid.x_axis.values[f.ix], y.name, grid.y_axis.values[f.iy], f.message
            )
        })
        .collect();
    let partial = !run.warnings.is_empty();
    for w in &run.warnings {
        eprintln!("warning: {w}");
    }
    run.finish(&PhaseRecord {
        model,
        x: axis_string(&x),
        y: axis_string(&y),
        initial: initial.to_string(),
        cycles,
        svg,
    })?;
    Ok(if partial { Outcome::Partial } else { Outcome::Complete })
}

#[derive(Serialize)]
struct KrylovRecord {
    #[serde(flatten)]
    model: ResolvedModel,
    initial: String,
    sampler: String,
    threshold: f64,
}

pub fn krylov(common: &CommonFlags, model: ModelFlags, flags: KrylovFlags) -> CliResult<Outcome> {
    let config = load_config(common.config.as_deref(), "krylov")?;
    let model = layered_model(model, &config, 21, true)?;
    let flags = flags.or(section(&config)?);
    let initial = parse_initial(flags.initial.as_deref().unwrap_or("J-down"))?;
    let sampler: CycleSampler = flags
        .sampler
        .as_deref()
        .unwrap_or("fig2")
        .parse()
        .map_err(|e: cspin_core::Error| CliError::usage(e.to_string()))?;
    let threshold = flags.threshold.unwrap_or(cspin_core::krylov::DEFAULT_OCCUPATION_THRESHOLD);

    let basis = model.basis()?;
    let psi = initial.state(&basis)?;
    let mut run = Run::start("krylov", &common.out_dir)?;
    let map = overlap_map(&model.params, &basis, &psi, &sampler)?;
    let rows = effective_dimension(&map, threshold)?;

    let labels: Vec<String> = basis.labels().map(|l| l.to_string()).collect();
    let mut header = vec!["cycle"];
    header.extend(labels.iter().map(String::as_str));
    let mut csv = Csv::new(&header);
    for (n, row) in map.sampled_cycles.iter().zip(&map.overlaps) {
        csv.row(std::iter::once(n.to_string()).chain(row.iter().map(|&f| num(f))));
    }
    run.write("krylov.csv", &csv.into_string())?;

    let mut eff = Csv::new(&["cycle", "occupied", "inverse_participation_ratio"]);
    for (n, r) in map.sampled_cycles.iter().zip(&rows) {
        eff.row([n.to_string(), r.occupied.to_string(), num(r.inverse_participation_ratio)]);
    }
    run.write("krylov_effective.csv", &eff.into_string())?;

    let census = fragmentation_census(&model.params.with_theta(0.0), &basis)?;
    let mut dims = Csv::new(&["initial", "dimension", "expected_dimension", "span_residual"]);
    for c in &census {
        dims.row([c.initial.to_string(), c.dimension.to_string(), c.expected.len().to_string(), num(c.span_residual)]);
    }
    run.write("krylov_census.csv", &dims.into_string())?;

    let own = floquet_krylov(&model.params, &basis, &psi)?;
    println!(
        "Floquet-Krylov dimension of {} at the given pulse error: {} of {}",
        initial.label(&basis),
        own.dimension,
        basis.dim()
    );
    run.finish(&KrylovRecord {
        model,
        initial: initial.to_string(),
        sampler: sampler.to_string(),
        threshold,
    })?;
    Ok(Outcome::Complete)
}

#[derive(Serialize)]
struct ScarRecordParams {
    #[serde(flatten)]
    model: ResolvedModel,
}

pub fn scar(common: &CommonFlags, model: ModelFlags) -> CliResult<Outcome> {
    let config = load_config(common.config.as_deref(), "scar")?;
    let model = layered_model(model, &config, 10, true)?;
    if model.n % 2 != 0 {
        return Err(CliError::usage(format!(
            "scar diagnostics split the satellites into two halves of N/2 spins, so N must be even (got N = {})",
            model.n
        )));
    }
    let basis = model.basis()?;
    let mut run = Run::start("scar", &common.out_dir)?;
    let records = scar_scatter(&model.params, &basis)?;
    let mut csv = Csv::new(&[
        "quasienergy_over_omega",
        "entropy_nats",
        "overlap_plus",
        "overlap_minus",
        "degenerate_flag",
    ]);
    for r in &records {
        csv.row([
            num(r.quasienergy_over_omega),
            num(r.entropy),
            num(r.overlap_plus),
            num(r.overlap_minus),
            u8::from(r.degenerate).to_string(),
        ]);
    }
    run.write("scar.csv", &csv.into_string())?;
    run.finish(&ScarRecordParams { model })?;
    Ok(Outcome::Complete)
}

/// Product-state string for the full basis: satellites first, then the central spin.
fn disorder_initial(s: &str, n: usize) -> CliResult<String> {
    let t = s.trim();
    if !t.is_empty() && t.chars().all(|c| matches!(c, 'u' | 'd' | 'U' | 'D')) {
        return Ok(t.to_ascii_lowercase());
    }
    let label = match parse_initial(t)? {
        InitialState::JUp => return Ok(format!("{}u", "u".repeat(n))),
        InitialState::JDown => return Ok(format!("{}d", "u".repeat(n))),
        InitialState::Basis(l) => l,
    };
    let central = label.sigma.short();
    match label.twice_m {
        m if m == n as i64 => Ok(format!("{}{central}", "u".repeat(n))),
        m if m == -(n as i64) => Ok(format!("{}{central}", "d".repeat(n))),
        m => Err(CliError::usage(format!(
            "initial state m:{m} is not a product state; disorder runs need twice_m = ±{n} or a u/d string"
        ))),
    }
}

#[derive(Serialize)]
struct DisorderRecord {
    #[serde(flatten)]
    model: ResolvedModel,
    initial: String,
    mean: f64,
    std: f64,
    seed: u64,
    realizations: usize,
    cycles: u64,
    stride: u64,
    aggregate: bool,
    series: bool,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let k = values.len();
    if k % 2 == 1 {
        values[k / 2]
    } else {
        0.5 * (values[k / 2 - 1] + values[k / 2])
    }
}

pub fn disorder(common: &CommonFlags, model: ModelFlags, flags: DisorderFlags) -> CliResult<Outcome> {
    let config = load_config(common.config.as_deref(), "disorder")?;
    let model = layered_model(model, &config, 5, false)?;
    let flags = flags.or(section(&config)?);
    let n = model.n;
    let initial = disorder_initial(flags.initial.as_deref().unwrap_or("J-down"), n)?;
    let spec = DisorderSpec {
        mean: flags.mean.unwrap_or(model.params.a_xy),
        std: flags.std.unwrap_or(0.0),
        seed: flags.seed.unwrap_or(2024),
        n_realizations: positive("realizations", flags.realizations.unwrap_or(10))?,
    };
    spec.validate()?;
    let cycles = positive("cycles", flags.cycles.unwrap_or(50_000))?;
    let stride = positive("stride", flags.stride.unwrap_or(1))?;
    let (want_aggregate, want_series) = (flags.aggregate.unwrap_or(false), flags.series.unwrap_or(false));

    let psi = product_state(n, &initial)?;
    let base = FullBasisModel::homogeneous(&model.params, n)?;
    let mut run = Run::start("disorder", &common.out_dir)?;
    run.seeds = vec![spec.seed];
    run.rng = Some(RNG_IDENTITY.to_string());

    let samples = disorder_order_parameter(&spec, &base, &psi, cycles)?;
    let mut csv = Csv::new(&["realization", "seed", "delta_axy", "order_parameter"]);
    for s in &samples {
        csv.row([s.realization.to_string(), spec.seed.to_string(), num(spec.std), num(s.order_parameter)]);
    }
    run.write("disorder.csv", &csv.into_string())?;

    if want_aggregate {
        let (mean, std) = aggregate(&samples).expect("at least one realization");
        let mut values: Vec<f64> = samples.iter().map(|s| s.order_parameter).collect();
        let mut summary = Csv::new(&["realizations", "mean", "std", "median"]);
        summary.row([samples.len().to_string(), num(mean), num(std), num(median(&mut values))]);
        run.write("disorder_summary.csv", &summary.into_string())?;
    }

    if want_series {
        let weights = full_magnetization_weights(n);
        let series = (0..spec.n_realizations as u64)
            .into_par_iter()
            .map(|k| {
                let model = base.with_a_xy(sample_realization(&spec, n, k)?)?;
                evolve_observable(&full_floquet(&model)?, &weights, &psi, cycles, stride)
            })
            .collect::<cspin_core::Result<Vec<_>>>()?;
        let mut csv = Csv::new(&["realization", "cycle", "magnetization", "staggered"]);
        for (k, s) in series.iter().enumerate() {
            for i in 0..s.len() {
                csv.row([k.to_string(), s.cycles[i].to_string(), num(s.magnetization[i]), num(s.staggered[i])]);
            }
        }
        run.write("disorder_series.csv", &csv.into_string())?;
    }

    run.finish(&DisorderRecord {
        model,
        initial,
        mean: spec.mean,
        std: spec.std,
        seed: spec.seed,
        realizations: spec.n_realizations,
        cycles,
        stride,
        aggregate: want_aggregate,
        series: want_series,
    })?;
    Ok(Outcome::Complete)
}

pub fn verify() -> CliResult<Outcome> {
    let reports = run_self_checks()?;
    let width = reports.iter().map(|r| r.name.len()).max().unwrap_or(5).max(5);
    println!("{:<width$}  {:>12}  {:>10}  result", "check", "max residual", "tolerance");
    for r in &reports {
        println!(
            "{:<width$}  {:>12.3e}  {:>10.1e}  {}",
            r.name,
            r.max_residual,
            r.tolerance,
            if r.passed { "PASS" } else { "FAIL" }
        );
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    println!("{} of {} checks passed", reports.len() - failed, reports.len());
    Ok(if failed == 0 { Outcome::Complete } else { Outcome::ChecksFailed })
}

pub fn init_threads(threads: Option<usize>) -> CliResult<()> {
    if let Some(k) = threads {
        if k == 0 {
            return Err(CliError::usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::usage(format!("cannot start {k} worker threads: {e}")))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_grammar() {
        let a = parse_axis("theta:0:0.5pi:11").unwrap();
        assert_eq!(a.name, AxisName::Theta);
        assert!((a.stop - 0.5 * std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(a.count, 11);
        assert!(parse_axis("a_z:0:8:81:linear").is_ok());
        assert!(parse_axis("a_z:8:0:3").is_err());
        assert!(parse_axis("a_z:0:8:0").is_err());
        assert!(parse_axis("q:0:1:2").is_err());
        assert!(parse_axis("a_z:0:8").is_err());
        let back = parse_axis(&axis_string(&a)).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn disorder_initial_states() {
        assert_eq!(disorder_initial("J-down", 3).unwrap(), "uuud");
        assert_eq!(disorder_initial("J-up", 3).unwrap(), "uuuu");
        assert_eq!(disorder_initial("m:-3,up", 3).unwrap(), "dddu");
        assert_eq!(disorder_initial("UdUd", 3).unwrap(), "udud");
        assert!(disorder_initial("m:1,up", 3).is_err());
        assert!(disorder_initial("xyz", 3).is_err());
    }

    #[test]
    fn medians() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
