//! Command-line front end.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hgmrf_core::car::{sfcar_from_snr_with, EdgeDependence, NoiseModel};
use hgmrf_core::experiments::{
    exp_area_scaling, exp_density_scaling, exp_energy_scaling, exp_snr_limits,
    exp_spacing_convergence, exp_zeta_limits, geometric_sides, log_grid, DensityScalingConfig,
    EnergyScenario, ExperimentOutput, FitWindow, SnrLimitsConfig, ZetaLimitsConfig,
};
use hgmrf_core::network::{evaluate_network, NetworkConfig};
use hgmrf_core::oracle::{finite_lattice_rates, LatticeSpec, MonteCarloSpec};
use hgmrf_core::physmap::{
    check_correlation_map_monotone, edge_correlation, rho_from_dependence, zeta_from_spacing,
    PhysicalField,
};
use hgmrf_core::rates::{sfcar_rates, sfcar_rates_for, RateMethod};
use hgmrf_core::specfun::QuadratureSpec;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, EXIT_NOT_CONVERGED, EXIT_OK};
use crate::montecarlo::sample_llr_per_node;
use crate::output::{experiment_results, json_document, table_json, write_json, Table};
use crate::params::{parse_config, BoundaryArg, Format, Params, ScenarioArg, WindowArg};

/// Grid size of the correlation-map monotonicity check run once per
/// process before the map is inverted.
pub const MONOTONICITY_CHECK_POINTS: usize = 1000;

/// Largest quadrature grid the CLI will refine to.
pub const MAX_QUAD_POINTS: usize = 4096;

#[derive(Debug, Parser)]
#[command(
    name = "hgmrf",
    version,
    about = "Information rates of hidden Gauss-Markov random fields"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Asymptotic per-node KLI and MI rates of the SFCAR field.
    Rates(CommonArgs),
    /// Spacing to edge correlation and edge dependence.
    Map(CommonArgs),
    /// Exact rates on a finite lattice.
    Oracle(CommonArgs),
    /// Monte Carlo log-likelihood ratio on a torus.
    Mc(CommonArgs),
    /// Energy and information of a sensor network.
    Network(CommonArgs),
    /// Scaling-law sweeps with fitted exponents.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON configuration file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub params: Params,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(value_enum)]
    pub kind: Option<ExperimentKind>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Rates,
    Map,
    Oracle,
    Mc,
    Network,
    Experiment,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Rates => "rates",
            Command::Map => "map",
            Command::Oracle => "oracle",
            Command::Mc => "mc",
            Command::Network => "network",
            Command::Experiment => "experiment",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Efficiency and total information against area at fixed spacing.
    Area,
    /// Convergence of the rates as spacing grows.
    Spacing,
    /// Per-node rates and efficiency against density at fixed area.
    Density,
    /// Total information against total energy.
    Energy,
    /// Low- and high-SNR behaviour of the rates.
    SnrLimits,
    /// Behaviour of the rates near zeta = 0 and zeta = 1/4.
    ZetaLimits,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Area => "area",
            ExperimentKind::Spacing => "spacing",
            ExperimentKind::Density => "density",
            ExperimentKind::Energy => "energy",
            ExperimentKind::SnrLimits => "snr-limits",
            ExperimentKind::ZetaLimits => "zeta-limits",
        }
    }
}

/// A fully merged invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub kind: Option<ExperimentKind>,
    pub params: Params,
}

impl RunConfig {
    /// Merges flags over an optional configuration file.
    pub fn from_cli(cli: Cli) -> Result<Self, CliError> {
        let (command, kind, common) = match cli.command {
            CommandArgs::Rates(c) => (Command::Rates, None, c),
            CommandArgs::Map(c) => (Command::Map, None, c),
            CommandArgs::Oracle(c) => (Command::Oracle, None, c),
            CommandArgs::Mc(c) => (Command::Mc, None, c),
            CommandArgs::Network(c) => (Command::Network, None, c),
            CommandArgs::Experiment(e) => (Command::Experiment, e.kind, e.common),
        };
        let mut params = common.params;
        let mut kind = kind;
        if let Some(path) = &common.config {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Usage(format!("cannot read configuration {}: {e}", path.display()))
            })?;
            let file = parse_config(&text)?;
            if let Some(c) = &file.command {
                if c != command.name() {
                    return Err(CliError::Usage(format!(
                        "configuration is for command '{c}', not '{}'",
                        command.name()
                    )));
                }
            }
            if let Some(k) = &file.kind {
                let parsed = ExperimentKind::from_str(k, false)
                    .map_err(|_| CliError::Usage(format!("unknown experiment kind '{k}'")))?;
                kind = kind.or(Some(parsed));
            }
            params = params.over(file.params);
        }
        Ok(Self {
            command,
            kind,
            params,
        })
    }
}

/// Runs the CLI on `args`, returning the process exit status.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return EXIT_OK;
            }
            let message = e.to_string();
            let line = message.lines().next().unwrap_or("invalid arguments");
            let _ = writeln!(stderr, "{line}");
            return crate::error::EXIT_VALIDATION;
        }
    };
    let outcome = RunConfig::from_cli(cli).and_then(|config| run(&config, stdout));
    match outcome {
        Ok(Status::Converged) => EXIT_OK,
        Ok(Status::NotConverged) => {
            let _ = writeln!(
                stderr,
                "error: quadrature did not reach the requested tolerance"
            );
            EXIT_NOT_CONVERGED
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", single_line(&e.to_string()));
            e.exit_code()
        }
    }
}

fn single_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    NotConverged,
}

impl Status {
    fn from_converged(converged: bool) -> Self {
        if converged {
            Status::Converged
        } else {
            Status::NotConverged
        }
    }
}

/// Runs one command and writes its output to `--out` or `stdout`.
pub fn run(config: &RunConfig, stdout: &mut dyn Write) -> Result<Status, CliError> {
    let mut params = config.params.clone();
    let format = *params.format.get_or_insert(Format::Csv);
    match config.command {
        Command::Rates => run_rates(&mut params, format, stdout),
        Command::Map => run_map(&mut params, format, stdout),
        Command::Oracle => run_oracle(&mut params, format, stdout),
        Command::Mc => run_mc(&mut params, format, stdout),
        Command::Network => run_network(&mut params, format, stdout),
        Command::Experiment => {
            let kind = config.kind.ok_or_else(|| {
                CliError::Usage("experiment needs a kind: area, spacing, density, energy, snr-limits or zeta-limits".into())
            })?;
            run_experiment(kind, &mut params, format, stdout)
        }
    }
}

/// Runs the correlation-map monotonicity check once per process.
pub fn ensure_map_monotone() -> Result<(), CliError> {
    static CHECK: OnceLock<Result<(), hgmrf_core::Error>> = OnceLock::new();
    CHECK
        .get_or_init(|| check_correlation_map_monotone(MONOTONICITY_CHECK_POINTS))
        .clone()
        .map_err(CliError::from)
}

fn allow_only(params: &Params, command: &str, allowed: &[&str]) -> Result<(), CliError> {
    for key in params.given() {
        if key != "out" && key != "format" && !allowed.contains(&key.as_str()) {
            return Err(CliError::Usage(format!(
                "parameter '{key}' does not apply to '{command}'"
            )));
        }
    }
    Ok(())
}

fn require<T: Copy>(value: Option<T>, name: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("missing required parameter --{name}")))
}

/// Linear SNR from `--snr` or `--snr-db`.
fn resolve_snr(params: &Params, default: Option<f64>) -> Result<f64, CliError> {
    match (params.snr, params.snr_db) {
        (Some(_), Some(_)) => Err(CliError::Usage(
            "give either --snr or --snr-db, not both".into(),
        )),
        (Some(s), None) => Ok(s),
        (None, Some(db)) => Ok(10f64.powf(db / 10.0)),
        (None, None) => {
            default.ok_or_else(|| CliError::Usage("missing required parameter --snr".into()))
        }
    }
}

fn fill_snr(params: &mut Params, default: f64) -> Result<f64, CliError> {
    let snr = resolve_snr(params, Some(default))?;
    if params.snr_db.is_none() {
        params.snr = Some(snr);
    }
    Ok(snr)
}

fn quadrature(params: &mut Params) -> Result<QuadratureSpec, CliError> {
    let defaults = QuadratureSpec::default();
    let points = *params.quad_points.get_or_insert(defaults.points_per_axis());
    let rtol = *params
        .quad_rtol
        .get_or_insert(defaults.relative_tolerance());
    Ok(QuadratureSpec::new(
        points,
        rtol,
        MAX_QUAD_POINTS.max(points),
    )?)
}

fn open_output<'a>(
    path: Option<&Path>,
    stdout: &'a mut dyn Write,
) -> Result<Box<dyn Write + 'a>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            CliError::Usage(format!("cannot create {}: {e}", p.display()))
        })?)),
        None => Box::new(stdout),
    })
}

fn emit_table(
    command: &str,
    params: &Params,
    format: Format,
    table: &Table,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let mut out = open_output(params.out.as_deref(), stdout)?;
    match format {
        Format::Csv => table.write_csv(&mut out),
        Format::Json => write_json(
            &json_document(command, None, params, vec![("result", table_json(table))])?,
            &mut out,
        ),
    }
}

fn method_name(method: RateMethod) -> &'static str {
    match method {
        RateMethod::Exact => "exact",
        RateMethod::Midpoint2d => "midpoint-2d",
        RateMethod::DensityOfStates => "density-of-states",
    }
}

fn run_rates(
    params: &mut Params,
    format: Format,
    stdout: &mut dyn Write,
) -> Result<Status, CliError> {
    allow_only(
        params,
        "rates",
        &[
            "zeta",
            "snr",
            "snr-db",
            "alpha",
            "spacing",
            "quad-points",
            "quad-rtol",
        ],
    )?;
    let snr = resolve_snr(params, None)?;
    let spec = quadrature(params)?;
    let (dependence, result) = match (params.zeta, params.alpha, params.spacing) {
        (Some(z), None, None) => {
            let r = sfcar_rates(z, snr, &spec)?;
            let dep = if z == 0.25 {
                None
            } else {
                Some(EdgeDependence::new(z)?)
            };
            (dep, r)
        }
        (None, Some(alpha), Some(spacing)) => {
            ensure_map_monotone()?;
            let dep = zeta_from_spacing(&PhysicalField::new(alpha, spacing)?)?;
            (Some(dep), sfcar_rates_for(dep, snr, &spec)?)
        }
        _ => {
            return Err(CliError::Usage(
                "rates needs either --zeta or both --alpha and --spacing".into(),
            ))
        }
    };
    let (zeta, log_gap) = match dependence {
        Some(d) => (d.zeta(), d.log_gap()),
        None => (0.25, f64::NEG_INFINITY),
    };
    let table = Table::row(vec![
        ("zeta", zeta.into()),
        ("log_gap", log_gap.into()),
        ("snr", snr.into()),
        ("kli", result.kli_rate.into()),
        ("mi", result.mi_rate.into()),
        ("method", method_name(result.method).into()),
        ("quadrature_points", result.quadrature_points.into()),
        ("converged", result.converged.into()),
    ]);
    emit_table("rates", params, format, &table, stdout)?;
    Ok(Status::from_converged(result.converged))
}

fn run_map(
    params: &mut Params,
    format: Format,
    stdout: &mut dyn Write,
) -> Result<Status, CliError> {
    allow_only(params, "map", &["zeta", "alpha", "spacing"])?;
    let table = match (params.zeta, params.alpha, params.spacing) {
        (Some(z), None, None) => {
            let dep = EdgeDependence::new(z)?;
            Table::row(vec![
                ("zeta", z.into()),
                ("rho", rho_from_dependence(dep).into()),
            ])
        }
        (None, Some(alpha), Some(spacing)) => {
            ensure_map_monotone()?;
            let field = PhysicalField::new(alpha, spacing)?;
            let dep = zeta_from_spacing(&field)?;
            Table::row(vec![
                ("alpha", alpha.into()),
                ("spacing", spacing.into()),
                ("alpha_d", (alpha * spacing).into()),
                ("rho", edge_correlation(&field).into()),
                ("zeta", dep.zeta().into()),
                ("log_gap", dep.log_gap().into()),
            ])
        }
        _ => {
            return Err(CliError::Usage(
                "map needs either --zeta or both --alpha and --spacing".into(),
            ))
        }
    };
    emit_table("map", params, format, &table, stdout)?;
    Ok(Status::Converged)
}

fn run_oracle(
    params: &mut Params,
    format: Format,
    stdout: &mut dyn Write,
) -> Result<Status, CliError> {
    allow_only(
        params,
        "oracle",
        &[
            "zeta",
            "snr",
            "snr-db",
            "n",
            "boundary",
            "sigma2",
            "quad-points",
            "quad-rtol",
        ],
    )?;
    let zeta = require(params.zeta, "zeta")?;
    let snr = resolve_snr(params, None)?;
    let n = require(params.n, "n")?;
    let boundary = *params.boundary.get_or_insert(BoundaryArg::Torus);
    let sigma2 = *params.sigma2.get_or_insert(1.0);
    let spec = quadrature(params)?;
    let noise = NoiseModel::new(sigma2)?;
    let dependence = EdgeDependence::new(zeta)?;
    let model = sfcar_from_snr_with(snr, dependence, &noise)?;
    let lattice = LatticeSpec::new(n, boundary.into())?;
    let finite = finite_lattice_rates(&model, &noise, &lattice)?;
    let asymptotic = sfcar_rates_for(dependence, snr, &spec)?;
    let table = Table::row(vec![
        ("n", n.into()),
        (
            "boundary",
            match boundary {
                BoundaryArg::Torus => "torus",
                BoundaryArg::Free => "free",
            }
            .into(),
        ),
        ("zeta", zeta.into()),
        ("snr", snr.into()),
        ("sigma2", sigma2.into()),
        ("kappa", model.kappa().into()),
        ("kli", finite.kli_rate.into()),
        ("mi", finite.mi_rate.into()),
        ("asymptotic_kli", asymptotic.kli_rate.into()),
        ("asymptotic_mi", asymptotic.mi_rate.into()),
        (
            "kli_difference",
            (finite.kli_rate - asymptotic.kli_rate).into(),
        ),
        (
            "mi_difference",
            (finite.mi_rate - asymptotic.mi_rate).into(),
        ),
    ]);
    emit_table("oracle", params, format, &table, stdout)?;
    Ok(Status::from_converged(asymptotic.converged))
}

fn run_mc(params: &mut Params, format: Format, stdout: &mut dyn Write) -> Result<Status, CliError> {
    allow_only(
        params,
        "mc",
        &["zeta", "snr", "snr-db", "n", "replicates", "seed", "sigma2"],
    )?;
    let zeta = require(params.zeta, "zeta")?;
    let snr = resolve_snr(params, None)?;
    let n = require(params.n, "n")?;
    let seed = require(params.seed, "seed")?;
    let replicates = *params.replicates.get_or_insert(1000);
    let sigma2 = *params.sigma2.get_or_insert(1.0);
    let noise = NoiseModel::new(sigma2)?;
    let model = sfcar_from_snr_with(snr, EdgeDependence::new(zeta)?, &noise)?;
    let mc = MonteCarloSpec::new(replicates, seed)?;
    let estimate = sample_llr_per_node(&model, &noise, n, &mc)?;
    let exact = finite_lattice_rates(&model, &noise, &LatticeSpec::torus(n)?)?;
    let table = Table::row(vec![
        ("n", n.into()),
        ("zeta", zeta.into()),
        ("snr", snr.into()),
        ("sigma2", sigma2.into()),
        ("replicates", replicates.into()),
        ("seed", seed.into()),
        ("mean_llr", estimate.mean.into()),
        ("standard_error", estimate.standard_error.into()),
        ("exact_kli", exact.kli_rate.into()),
        (
            "z_score",
            ((estimate.mean - exact.kli_rate) / estimate.standard_error).into(),
        ),
    ]);
    emit_table("mc", params, format, &table, stdout)?;
    Ok(Status::Converged)
}

/// Network defaults: `α = 1`, `E_s = 1`, `E₀ = 1`, `ν = 2`, `β = 1`, `σ² = 1`.
fn network_config(params: &mut Params, n: usize, spacing: f64) -> NetworkConfig {
    NetworkConfig {
        n,
        spacing,
        sensing_energy: *params.es.get_or_insert(1.0),
        comm_energy_coeff: *params.e0.get_or_insert(1.0),
        loss_exponent: *params.nu.get_or_insert(2.0),
        snr_per_joule: *params.beta.get_or_insert(1.0),
        alpha: *params.alpha.get_or_insert(1.0),
        noise_sigma2: *params.sigma2.get_or_insert(1.0),
    }
}

fn run_network(
    params: &mut Params,
    format: Format,
    stdout: &mut dyn Write,
) -> Result<Status, CliError> {
    allow_only(
        params,
        "network",
        &[
            "n",
            "spacing",
            "alpha",
            "es",
            "e0",
            "nu",
            "beta",
            "sigma2",
            "quad-points",
            "quad-rtol",
        ],
    )?;
    let n = require(params.n, "n")?;
    let spacing = require(params.spacing, "spacing")?;
    let config = network_config(params, n, spacing);
    let spec = quadrature(params)?;
    ensure_map_monotone()?;
    let r = evaluate_network(&config, &spec)?;
    let table = Table::row(vec![
        ("node_count", r.node_count.into()),
        ("density", r.density.into()),
        ("area", r.area.into()),
        ("snr", r.snr.into()),
        ("zeta", r.zeta.into()),
        ("per_node_kli", r.per_node_kli.into()),
        ("per_node_mi", r.per_node_mi.into()),
        ("total_kli", r.total_kli.into()),
        ("total_mi", r.total_mi.into()),
        ("sensing_energy", r.sensing_energy_total.into()),
        ("communication_energy", r.communication_energy_total.into()),
        ("total_energy", r.total_energy.into()),
        ("efficiency_kli", r.efficiency_kli.into()),
        ("efficiency_mi", r.efficiency_mi.into()),
        ("converged", r.converged.into()),
    ]);
    emit_table("network", params, format, &table, stdout)?;
    Ok(Status::from_converged(r.converged))
}

fn sides(values: &[f64]) -> Result<Vec<usize>, CliError> {
    values
        .iter()
        .map(|&v| {
            if v.fract() == 0.0 && v >= 2.0 && v <= u32::MAX as f64 {
                Ok(v as usize)
            } else {
                Err(CliError::Usage(format!(
                    "grid side {v} is not an integer of at least 2"
                )))
            }
        })
        .collect()
}

fn default_sides() -> Vec<f64> {
    geometric_sides(32, 512, 17)
        .into_iter()
        .map(|n| n as f64)
        .collect()
}

fn run_experiment(
    kind: ExperimentKind,
    params: &mut Params,
    format: Format,
    stdout: &mut dyn Write,
) -> Result<Status, CliError> {
    const QUAD: [&str; 2] = ["quad-points", "quad-rtol"];
    let allowed: Vec<&str> = match kind {
        ExperimentKind::Area => vec![
            "values", "spacing", "alpha", "es", "beta", "e0", "nu", "sigma2", "window",
        ],
        ExperimentKind::Spacing => vec!["values", "alpha", "snr", "snr-db"],
        ExperimentKind::Density => {
            vec![
                "values", "area", "alpha", "snr", "snr-db", "es", "e0", "nu", "window",
            ]
        }
        ExperimentKind::Energy => vec![
            "scenario", "values", "n", "spacing", "alpha", "es", "beta", "e0", "nu", "sigma2",
            "window",
        ],
        ExperimentKind::SnrLimits => vec!["values"],
        ExperimentKind::ZetaLimits => vec!["snr", "snr-db"],
    }
    .into_iter()
    .chain(QUAD)
    .collect();
    allow_only(params, "experiment", &allowed)?;
    let spec = quadrature(params)?;
    let window = |params: &mut Params| {
        params
            .window
            .get_or_insert(WindowArg(FitWindow::TopDecade))
            .0
    };
    if kind != ExperimentKind::ZetaLimits && kind != ExperimentKind::SnrLimits {
        ensure_map_monotone()?;
    }
    let out: ExperimentOutput = match kind {
        ExperimentKind::Area => {
            let n_values = sides(params.values.get_or_insert_with(default_sides))?;
            let spacing = *params.spacing.get_or_insert(2.0);
            params.beta.get_or_insert(10.0);
            let base = network_config(params, n_values[0], spacing);
            exp_area_scaling(&base, &n_values, window(params), &spec)?
        }
        ExperimentKind::Spacing => {
            let alpha = *params.alpha.get_or_insert(1.0);
            let snr = fill_snr(params, 10.0)?;
            let d = params
                .values
                .get_or_insert_with(|| (0..=10).map(|i| (3.0 + 0.5 * i as f64) / alpha).collect())
                .clone();
            exp_spacing_convergence(alpha, snr, &d, &spec)?
        }
        ExperimentKind::Density => {
            let n_values = sides(params.values.get_or_insert_with(default_sides))?;
            let area = *params.area.get_or_insert(400.0);
            let alpha = *params.alpha.get_or_insert(1.0);
            let snr = fill_snr(params, 10.0)?;
            let mut cfg = DensityScalingConfig::new(area, alpha, snr, n_values);
            cfg.sensing_energy = *params.es.get_or_insert(cfg.sensing_energy);
            cfg.comm_energy_coeff = *params.e0.get_or_insert(cfg.comm_energy_coeff);
            cfg.loss_exponent = *params.nu.get_or_insert(cfg.loss_exponent);
            cfg.window = window(params);
            exp_density_scaling(&cfg, &spec)?
        }
        ExperimentKind::Energy => {
            let scenario = *params
                .scenario
                .get_or_insert(ScenarioArg::FixedSensingAreaSweep);
            let spacing = *params.spacing.get_or_insert(2.0);
            let (scenario, values, n) = match scenario {
                ScenarioArg::FixedAreaSensingSweep => {
                    let values = params
                        .values
                        .get_or_insert_with(|| log_grid(1e2, 1e6, 17))
                        .clone();
                    let n = *params.n.get_or_insert(64);
                    (EnergyScenario::FixedAreaSensingSweep, values, n)
                }
                ScenarioArg::FixedSensingAreaSweep => {
                    if params.n.is_some() {
                        return Err(CliError::Usage(
                            "scenario fixed-sensing-area-sweep sweeps n; pass sides with --values"
                                .into(),
                        ));
                    }
                    let values = params.values.get_or_insert_with(default_sides).clone();
                    let first = sides(&values)?[0];
                    (EnergyScenario::FixedSensingAreaSweep, values, first)
                }
            };
            let base = network_config(params, n, spacing);
            exp_energy_scaling(&base, scenario, &values, window(params), &spec)?
        }
        ExperimentKind::SnrLimits => {
            let zetas = params
                .values
                .get_or_insert_with(|| SnrLimitsConfig::default().zetas)
                .clone();
            exp_snr_limits(
                &SnrLimitsConfig {
                    zetas,
                    ..SnrLimitsConfig::default()
                },
                &spec,
            )?
        }
        ExperimentKind::ZetaLimits => {
            let snr = fill_snr(params, 10.0)?;
            exp_zeta_limits(
                &ZetaLimitsConfig {
                    snr,
                    ..ZetaLimitsConfig::default()
                },
                &spec,
            )?
        }
    };
    emit_experiment(kind, params, format, &out, stdout)?;
    let converged = out
        .notes
        .iter()
        .all(|n| !n.starts_with("quadrature did not converge"));
    Ok(Status::from_converged(converged))
}

/// Path of the fit summary written next to a table file.
pub fn fits_path(table: &Path) -> PathBuf {
    let mut name = table
        .file_stem()
        .map(|s| s.to_os_string())
        .unwrap_or_default();
    name.push(".fits.json");
    table.with_file_name(name)
}

fn emit_experiment(
    kind: ExperimentKind,
    params: &Params,
    format: Format,
    out: &ExperimentOutput,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let table = Table::from_sweep(&out.sweep);
    let results = experiment_results(out)?;
    match (format, params.out.as_deref()) {
        (Format::Json, path) => {
            let mut results = results;
            results.push(("table", table_json(&table)));
            let doc = json_document("experiment", Some(kind.name()), params, results)?;
            write_json(&doc, open_output(path, stdout)?)
        }
        (Format::Csv, Some(path)) => {
            table.write_csv(open_output(Some(path), stdout)?)?;
            let doc = json_document("experiment", Some(kind.name()), params, results)?;
            write_json(&doc, open_output(Some(&fits_path(path)), stdout)?)
        }
        (Format::Csv, None) => table.write_csv(stdout),
    }
}
