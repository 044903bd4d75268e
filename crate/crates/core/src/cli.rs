//! Command-line front end: TOML experiment configuration, subcommands and the
//! artifacts each one writes.
//!
//! Exit codes: `0` success, `1` usage or configuration error, `2` a numerical check
//! ran to completion and failed.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dispersion::{self, CouplingMode, LinearizationMatrices, Verdict};
use crate::littlewood_paley::{self as lp, BesovIndex, DyadicPartition, SmoothingSetup, Variant};
use crate::model::{self, Affine, Branch, DriftMode, PlaneWave, SystemParams};
use crate::output::{self, Cell};
use crate::perturbation::{self, ExperimentSetup, PerturbationState};
use crate::solver::{self, FieldState, FnForcing, NoForcing, SolverConfig};
use crate::spectral::{Grid, SpectralField};
use crate::Complex64 as C;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid configuration: {0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// Everything a run can be configured with. Every section is optional.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub model: SystemParams,
    pub wave: WaveConfig,
    pub grid: GridConfig,
    pub solver: SolverConfig,
    pub initial: InitialConfig,
    pub dispersion: DispersionConfig,
    pub scan: ScanConfig,
    pub decay: DecayConfig,
    pub instability: InstabilityConfig,
    pub besov: BesovConfig,
    pub quadratic: QuadraticConfig,
}

/// Plane wave selection. With `r0` given the wave is taken as is (θ₀ defaults to
/// `√(1 − r₀²)`); otherwise it is solved from the model.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WaveConfig {
    pub r0: Option<f64>,
    pub theta0: Option<f64>,
    pub w0: f64,
    /// Fix `w₀ = −u(r₀)θ₀` when `θ₀ ≠ 0`.
    pub compatible_drift: bool,
    /// Index into the isolated amplitudes, ascending.
    pub root: Option<usize>,
}

impl WaveConfig {
    pub fn resolve(&self, params: &SystemParams) -> Result<PlaneWave, model::ModelError> {
        let drift = if self.compatible_drift {
            DriftMode::Compatible { fallback: self.w0 }
        } else {
            DriftMode::Free(self.w0)
        };
        match self.r0 {
            Some(r0) => {
                let theta0 = self.theta0.unwrap_or_else(|| (1.0 - r0 * r0).max(0.0).sqrt());
                let w0 = match drift {
                    DriftMode::Compatible { .. } if theta0 != 0.0 => -params.u.eval(r0) * theta0,
                    _ => self.w0,
                };
                PlaneWave::new(params, r0, theta0, w0)
            }
            None => {
                let branch = self.root.map_or(Branch::Default, Branch::Root);
                model::solve_plane_wave(params, branch, drift)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub dim: usize,
    pub n: usize,
    pub length: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { dim: 1, n: 256, length: 2.0 * std::f64::consts::PI }
    }
}

impl GridConfig {
    pub fn build(&self) -> Result<Grid, ConfigError> {
        Grid::new(self.dim, self.n, self.length).map_err(|e| ConfigError::Invalid(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialKind {
    Zero,
    PlaneWave,
    #[default]
    PerturbedPlaneWave,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialConfig {
    pub kind: InitialKind,
    pub amplitude: f64,
    /// Largest mode index of random components.
    pub max_mode: i64,
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self { kind: InitialKind::default(), amplitude: 1e-3, max_mode: 4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Linearization {
    /// The tabulated `A`, `B`, `C`.
    #[default]
    Tabulated,
    /// The linearisation of the polar system itself.
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DispersionConfig {
    pub k_min: f64,
    pub k_max: f64,
    pub samples: usize,
    /// Extra wavenumbers merged into the grid.
    pub include: Vec<f64>,
    pub coupling: CouplingMode,
    pub linearization: Linearization,
}

impl Default for DispersionConfig {
    fn default() -> Self {
        Self {
            k_min: -16.0,
            k_max: 16.0,
            samples: 1024,
            include: vec![0.0],
            coupling: CouplingMode::default(),
            linearization: Linearization::default(),
        }
    }
}

impl DispersionConfig {
    pub fn ks(&self) -> Result<Vec<f64>, ConfigError> {
        let mut ks = dispersion::k_grid(self.k_min, self.k_max, self.samples)
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        ks.extend(self.include.iter().copied());
        ks.sort_by(f64::total_cmp);
        ks.dedup();
        Ok(ks)
    }

    pub fn matrices(&self, params: &SystemParams, wave: &PlaneWave) -> LinearizationMatrices {
        match self.linearization {
            Linearization::Tabulated => dispersion::build_matrices(params, wave, self.coupling),
            Linearization::Exact => LinearizationMatrices::exact(params, wave),
        }
    }
}

/// Parameter lists swept by `stability-scan`. Empty lists keep the `[model]` value.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    pub m: Vec<f64>,
    pub w0: Vec<f64>,
    pub u: Vec<Affine>,
    pub v: Vec<Affine>,
    pub kappa: Vec<Affine>,
    pub s1: Vec<Affine>,
    pub s2: Vec<Affine>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecayConfig {
    pub amplitude: f64,
    pub s: f64,
    pub max_mode: i64,
}

impl Default for DecayConfig {
    fn default() -> Self {
        Self { amplitude: 1e-3, s: 1.0, max_mode: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InstabilityConfig {
    pub k_seed: i64,
    pub amplitude: f64,
}

impl Default for InstabilityConfig {
    fn default() -> Self {
        Self { k_seed: 2, amplitude: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BesovConfig {
    pub q_values: Vec<i32>,
    pub mu: f64,
    pub u_disp: f64,
    pub p: f64,
    pub random_fields: usize,
    pub smoothing_cases: usize,
    pub smoothing_max_mode: i64,
}

impl Default for BesovConfig {
    fn default() -> Self {
        Self { q_values: vec![1, 2, 3, 4], mu: 1.0, u_disp: 0.0, p: 2.0, random_fields: 20, smoothing_cases: 50, smoothing_max_mode: 32 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadraticConfig {
    pub eps: Vec<f64>,
    pub directions: usize,
    pub max_mode: i64,
}

impl Default for QuadraticConfig {
    fn default() -> Self {
        Self { eps: vec![1e-1, 1e-2, 1e-3, 1e-4], directions: 5, max_mode: 3 }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Read { path: path.to_owned(), source })?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !self.model.is_finite() {
            return Err(ConfigError::Invalid("model coefficients must be finite".into()));
        }
        self.solver.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.grid.build()?;
        Ok(())
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// Random field with uniformly distributed coefficients on the modes
/// `0 < max|j| ≤ max_mode`, scaled to unit-measure `L²` norm `amplitude`.
/// Coefficients are drawn mode by mode, so the same seed gives the same function
/// on every grid that resolves `max_mode`. With `real` the physical values are
/// projected onto the real axis.
pub fn random_field(grid: &Grid, rng: &mut impl Rng, max_mode: i64, amplitude: f64, real: bool) -> SpectralField {
    let mut coeffs = vec![C::new(0.0, 0.0); grid.len()];
    let m = max_mode.min(grid.n() as i64 / 2 - 1).max(0);
    let ys = if grid.dim() == 2 { -m..=m } else { 0..=0 };
    for jy in ys {
        for jx in -m..=m {
            let c = C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            if (jx, jy) != (0, 0) {
                coeffs[grid.index_of_mode(jx, jy)] = c;
            }
        }
    }
    let mut f = SpectralField::from_spectral(grid, coeffs).expect("length matches grid").to_physical();
    if real {
        f = f.map_values(|z| C::new(z.re, 0.0));
    }
    let norm = f.l2_norm();
    if norm > 0.0 {
        f = f.scale(C::new(amplitude / norm, 0.0));
    }
    f
}

/// Sample times for the smoothing check: `0` followed by a log-spaced grid on
/// `[10⁻⁵, t_end]`, fine enough to resolve the fast decay of high blocks.
pub fn smoothing_times(t_end: f64, samples: usize) -> Vec<f64> {
    let (a, b) = (1e-5f64.ln(), t_end.ln());
    std::iter::once(0.0)
        .chain((0..samples).map(|j| (a + (b - a) * j as f64 / (samples - 1) as f64).exp()))
        .collect()
}

/// Randomised family of smoothing-estimate cases: random `σ ∈ [−1, 1)`,
/// `p ∈ {2, ∞}`, `r ∈ {1, 2}`, `ρ ∈ {1, 2}`, `ρ₁ ∈ {ρ, ∞}`, random data and a source
/// `cos(t)g₁ + sin(t)g₂`, all band-limited to `max_mode`.
pub fn smoothing_family(
    grid: &Grid,
    rng: &mut impl Rng,
    cases: usize,
    max_mode: i64,
    mu: f64,
    u_disp: f64,
) -> Result<Vec<lp::SmoothingReport>, lp::LpError> {
    let times = smoothing_times(1.0, 200);
    (0..cases)
        .map(|_| {
            let sigma = rng.gen_range(-1.0..1.0);
            let p = if rng.gen_bool(0.5) { 2.0 } else { f64::INFINITY };
            let r = if rng.gen_bool(0.5) { 1.0 } else { 2.0 };
            let rho = if rng.gen_bool(0.5) { 1.0 } else { 2.0 };
            let rho1 = if rng.gen_bool(0.5) { rho } else { f64::INFINITY };
            let idx = BesovIndex::new(sigma, p, r)?.with_rho(rho)?;
            let f0 = random_field(grid, rng, max_mode, 1.0, true);
            let g1 = random_field(grid, rng, max_mode, 1.0, true);
            let g2 = random_field(grid, rng, max_mode, 1.0, true);
            let forcing = FnForcing(move |t: f64, grid: &Grid| {
                let g = g1.scale(C::new(t.cos(), 0.0)).add(&g2.scale(C::new(t.sin(), 0.0))).expect("same grid");
                (g, (0..grid.dim()).map(|_| SpectralField::zeros(grid)).collect())
            });
            let setup = SmoothingSetup { mu, u_disp, idx, rho1 };
            lp::check_smoothing_estimate(&f0, &forcing, &setup, &times)
        })
        .collect()
}

#[derive(Debug, Parser)]
#[command(name = "cglb", version, about = "Spectral solver and stability toolkit for the coupled Ginzburg-Landau system")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML experiment configuration.
    #[arg(long, global = true, env = "CGLB_CONFIG")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "CGLB_OUT", default_value = "out")]
    pub out: PathBuf,
    /// Overrides the configured seed.
    #[arg(long, global = true, env = "CGLB_SEED")]
    pub seed: Option<u64>,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true, env = "CGLB_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Evolve the full system and record norm diagnostics.
    Simulate,
    /// Eigenvalues of the linearised symbol on a wavenumber grid.
    Dispersion,
    /// Classify the spectrum over a grid of parameters.
    StabilityScan,
    /// Fit the decay rate of a perturbed stable plane wave.
    DecayFit,
    /// Measure the growth rate of a seeded unstable mode.
    Instability,
    /// Littlewood-Paley and Besov sanity checks.
    BesovCheck,
    /// Check that the nonlinear remainder is quadratic.
    QuadraticCheck,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Dispersion => "dispersion",
            Command::StabilityScan => "stability-scan",
            Command::DecayFit => "decay-fit",
            Command::Instability => "instability",
            Command::BesovCheck => "besov-check",
            Command::QuadraticCheck => "quadratic-check",
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Run(String),
}

fn run_err(e: impl std::fmt::Display) -> CliError {
    CliError::Run(e.to_string())
}

/// Result of one subcommand.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutcome {
    pub command: String,
    pub pass: bool,
    pub files: Vec<String>,
}

struct Out<'a> {
    dir: &'a Path,
    files: Vec<String>,
}

impl Out<'_> {
    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        output::write_file(self.dir, name, contents)?;
        self.files.push(name.to_owned());
        Ok(())
    }
}

/// Parse arguments, run, print a one-line JSON status and return the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = (|| {
        let mut cfg = match &cli.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = cli.seed {
            cfg.seed = s;
        }
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(t) = cli.threads {
            builder = builder.num_threads(t);
        }
        let pool = builder.build().map_err(run_err)?;
        pool.install(|| run(cli.command, &cfg, &cli.out))
    })();
    match result {
        Ok(outcome) => {
            println!("{}", serde_json::json!({"status": if outcome.pass { "ok" } else { "check_failed" }, "outcome": outcome}));
            if outcome.pass {
                0
            } else {
                2
            }
        }
        Err(e) => {
            eprintln!("{}", serde_json::json!({"status": "error", "message": e.to_string()}));
            1
        }
    }
}

pub fn run(command: Command, cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunOutcome, CliError> {
    cfg.validate()?;
    let mut out = Out { dir: out_dir, files: Vec::new() };
    let pass = match command {
        Command::Simulate => simulate(cfg, &mut out)?,
        Command::Dispersion => dispersion_cmd(cfg, &mut out)?,
        Command::StabilityScan => stability_scan(cfg, &mut out)?,
        Command::DecayFit => decay_fit(cfg, &mut out)?,
        Command::Instability => instability(cfg, &mut out)?,
        Command::BesovCheck => besov_check(cfg, &mut out)?,
        Command::QuadraticCheck => quadratic_check(cfg, &mut out)?,
    };
    Ok(RunOutcome { command: command.name().to_owned(), pass, files: out.files })
}

fn resolve_wave(cfg: &ExperimentConfig) -> Result<PlaneWave, CliError> {
    cfg.wave.resolve(&cfg.model).map_err(|e| ConfigError::Invalid(e.to_string()).into())
}

/// Plane wave sampled on the grid; `θ₀` must be compatible with the period.
fn plane_wave_state(grid: &Grid, wave: &PlaneWave) -> Result<FieldState, CliError> {
    let turns = wave.theta0 * grid.length() / (2.0 * std::f64::consts::PI);
    if (turns - turns.round()).abs() > 1e-9 {
        return Err(ConfigError::Invalid(format!("theta0 = {} is not periodic on the grid", wave.theta0)).into());
    }
    let p = SpectralField::from_fn(grid, |x, _| C::from_polar(wave.r0, wave.theta0 * x));
    let mut omega: Vec<SpectralField> = (0..grid.dim()).map(|_| SpectralField::zeros(grid)).collect();
    omega[0] = SpectralField::from_real_fn(grid, |_, _| wave.w0);
    FieldState::new(p, omega, 0.0).map_err(run_err)
}

pub fn initial_state(cfg: &ExperimentConfig, grid: &Grid) -> Result<FieldState, CliError> {
    let mut rng = cfg.rng();
    let init = &cfg.initial;
    let noise = |rng: &mut ChaCha8Rng| -> (SpectralField, Vec<SpectralField>) {
        let p = random_field(grid, rng, init.max_mode, init.amplitude, false);
        let w = (0..grid.dim()).map(|_| random_field(grid, rng, init.max_mode, init.amplitude, true)).collect();
        (p, w)
    };
    match init.kind {
        InitialKind::Zero => Ok(FieldState::zeros(grid)),
        InitialKind::Random => {
            let (p, w) = noise(&mut rng);
            FieldState::new(p, w, 0.0).map_err(run_err)
        }
        InitialKind::PlaneWave => plane_wave_state(grid, &resolve_wave(cfg)?),
        InitialKind::PerturbedPlaneWave => {
            let base = plane_wave_state(grid, &resolve_wave(cfg)?)?;
            let (p, w) = noise(&mut rng);
            let p = base.p.add(&p).map_err(run_err)?;
            let w = base.omega.iter().zip(&w).map(|(a, b)| a.add(b)).collect::<Result<Vec<_>, _>>().map_err(run_err)?;
            FieldState::new(p, w, 0.0).map_err(run_err)
        }
    }
}

fn simulate(cfg: &ExperimentConfig, out: &mut Out) -> Result<bool, CliError> {
    let grid = cfg.grid.build()?;
    let state0 = initial_state(cfg, &grid)?;
    let (rows, status, summary) = match solver::evolve(&state0, &cfg.model, &NoForcing, &cfg.solver, &mut []) {
        Ok(tr) => {
            let summary = serde_json::json!({
                "steps": tr.steps,
                "t_final": tr.final_state.t,
                "smallness_monitor": lp::smallness_monitor(&tr.final_state, cfg.solver.besov_p),
            });
            (tr.rows, "ok".to_string(), summary)
        }
        Err(e) => {
            let summary = serde_json::json!({"error": e.error.to_string()});
            (e.rows, "solver_error".to_string(), summary)
        }
    };
    out.write("diagnostics.csv", &output::diagnostics_csv(&rows))?;
    let pass = status == "ok";
    out.write(
        "summary.json",
        &output::json_string(
            "cglb-summary",
            &serde_json::json!({"status": status, "seed": cfg.seed, "rows": rows.len(), "result": summary}),
        ),
    )?;
    Ok(pass)
}

fn dispersion_cmd(cfg: &ExperimentConfig, out: &mut Out) -> Result<bool, CliError> {
    let wave = resolve_wave(cfg)?;
    let m = cfg.dispersion.matrices(&cfg.model, &wave);
    let ks = cfg.dispersion.ks()?;
    let samples = dispersion::spectrum(&m, &ks);
    let max_residual = samples.iter().map(|s| s.residual(&m)).fold(0.0, f64::max);
    let verdict = dispersion::classify_spectrum(&samples).map_err(run_err)?;
    let closed_form = dispersion::closed_form_discrepancy(&cfg.model, &wave, &ks, 1e-8);
    out.write("spectrum.csv", &output::spectrum_csv(&samples))?;
    let mut body = verdict.to_json();
    body["wave"] = serde_json::to_value(wave).map_err(run_err)?;
    body["max_residual"] = max_residual.into();
    body["closed_form"] = serde_json::to_value(&closed_form).map_err(run_err)?;
    body["coupling"] = serde_json::to_value(cfg.dispersion.coupling).map_err(run_err)?;
    body["linearization"] = serde_json::to_value(cfg.dispersion.linearization).map_err(run_err)?;
    out.write("verdict.json", &output::json_string("cglb-verdict", &body))?;
    Ok(max_residual <= 1e-9)
}

fn axis<T: Copy>(list: &[T], default: T) -> Vec<T> {
    if list.is_empty() {
        vec![default]
    } else {
        list.to_vec()
    }
}

/// Cartesian product of the scan lists, in lexicographic order of
/// `(m, u, v, κ, s₁, s₂, w₀)`.
pub fn scan_points(cfg: &ExperimentConfig) -> Vec<(SystemParams, f64)> {
    let b = cfg.model;
    let s = &cfg.scan;
    let mut pts = Vec::new();
    for &m in &axis(&s.m, b.m) {
        for &u in &axis(&s.u, b.u) {
            for &v in &axis(&s.v, b.v) {
                for &kappa in &axis(&s.kappa, b.kappa) {
                    for &s1 in &axis(&s.s1, b.s1) {
                        for &s2 in &axis(&s.s2, b.s2) {
                            for &w0 in &axis(&s.w0, cfg.wave.w0) {
                                pts.push((SystemParams { m, u, v, kappa, s1, s2, ..b }, w0));
                            }
                        }
                    }
                }
            }
        }
    }
    pts
}

pub const ATLAS_HEADER: [&str; 18] = [
    "m", "u0", "u1", "v0", "v1", "kappa0", "kappa1", "s1_0", "s1_1", "s2_0", "s2_1", "w0", "r0", "theta0",
    "verdict", "max_re", "omega_plus", "C",
];

fn stability_scan(cfg: &ExperimentConfig, out: &mut Out) -> Result<bool, CliError> {
    let ks = cfg.dispersion.ks()?;
    let pts = scan_points(cfg);
    let rows: Vec<Vec<Cell>> = pts
        .par_iter()
        .map(|(params, w0)| {
            let mut row: Vec<Cell> = [
                params.m, params.u.0, params.u.1, params.v.0, params.v.1, params.kappa.0, params.kappa.1,
                params.s1.0, params.s1.1, params.s2.0, params.s2.1, *w0,
            ]
            .iter()
            .map(|&x| x.into())
            .collect();
            let wave_cfg = WaveConfig { w0: *w0, ..cfg.wave.clone() };
            match wave_cfg.resolve(params) {
                Ok(wave) => {
                    let m = cfg.dispersion.matrices(params, &wave);
                    let samples = dispersion::spectrum(&m, &ks);
                    let verdict = dispersion::classify_spectrum(&samples).expect("nonempty grid");
                    let max_re = samples.iter().filter(|s| s.k != 0.0).map(|s| s.max_re()).fold(f64::NEG_INFINITY, f64::max);
                    let (omega, c) = match verdict {
                        Verdict::Unstable { omega_plus, .. } => (omega_plus, f64::NAN),
                        Verdict::SpectrallyStable { c } => (f64::NAN, c.unwrap_or(f64::NAN)),
                        Verdict::Marginal { .. } => (f64::NAN, f64::NAN),
                    };
                    row.extend([wave.r0.into(), wave.theta0.into(), verdict.name().into()]);
                    row.extend([max_re.into(), omega.into(), c.into()]);
                }
                Err(_) => {
                    row.extend([f64::NAN.into(), f64::NAN.into(), "no_plane_wave".into()]);
                    row.extend([f64::NAN.into(), f64::NAN.into(), f64::NAN.into()]);
                }
            }
            row
        })
        .collect();
    out.write("atlas.csv", &output::csv_string("cglb-atlas", &ATLAS_HEADER, &rows))?;
    Ok(true)
}

fn random_perturbation(grid: &Grid, rng: &mut ChaCha8Rng, max_mode: i64, amp: f64) -> Result<PerturbationState, CliError> {
    let mut f = || random_field(grid, rng, max_mode, amp, true);
    let (r, p, h) = (f(), f(), f());
    PerturbationState::new(r, p, h).map_err(run_err)
}

fn experiment_grid(cfg: &ExperimentConfig) -> Result<Grid, CliError> {
    if cfg.grid.dim != 1 {
        return Err(ConfigError::Invalid("perturbation experiments are one-dimensional".into()).into());
    }
    cfg.grid.build().map_err(Into::into)
}

fn decay_fit(cfg: &ExperimentConfig, out: &mut Out) -> Result<bool, CliError> {
    let grid = experiment_grid(cfg)?;
    let wave = resolve_wave(cfg)?;
    let mut rng = cfg.rng();
    let pi0 = random_perturbation(&grid, &mut rng, cfg.decay.max_mode, cfg.decay.amplitude)?;
    let report = perturbation::decay_experiment(&cfg.model, &wave, &pi0, cfg.decay.s, &cfg.solver).map_err(run_err)?;
    let rows: Vec<Vec<Cell>> = report.series.iter().map(|&(t, v)| vec![t.into(), v.into()]).collect();
    out.write("decay_series.csv", &output::csv_string("cglb-decay-series", &["t", "norm"], &rows))?;
    out.write("decay.json", &output::json_string("cglb-decay", &report))?;
    Ok(report.pass)
}

fn instability(cfg: &ExperimentConfig, out: &mut Out) -> Result<bool, CliError> {
    let grid = experiment_grid(cfg)?;
    let wave = resolve_wave(cfg)?;
    let setup = ExperimentSetup { n: grid.n(), length: grid.length(), solver: cfg.solver.clone() };
    let report = perturbation::instability_experiment(
        &cfg.model,
        &wave,
        cfg.instability.k_seed,
        cfg.instability.amplitude,
        &setup,
    )
    .map_err(run_err)?;
    out.write("instability.json", &output::json_string("cglb-instability", &report))?;
    Ok(report.fit.pass && report.grew)
}

fn quadratic_check(cfg: &ExperimentConfig, out: &mut Out) -> Result<bool, CliError> {
    let grid = experiment_grid(cfg)?;
    let wave = resolve_wave(cfg)?;
    let mut rng = cfg.rng();
    let mut reports = Vec::new();
    for _ in 0..cfg.quadratic.directions {
        let dir = random_perturbation(&grid, &mut rng, cfg.quadratic.max_mode, 1.0)?;
        reports.push(perturbation::quadratic_order_check(&dir, &cfg.model, &wave, &cfg.quadratic.eps));
    }
    let pass = reports.iter().all(|r| r.pass);
    out.write(
        "quadratic.json",
        &output::json_string("cglb-quadratic", &serde_json::json!({"pass": pass, "directions": reports})),
    )?;
    Ok(pass)
}

/// Largest `|Σ_q φ_q(k) − 1|` over the grid wavenumbers (`k ≠ 0` when homogeneous).
pub fn partition_error(grid: &Grid, variant: Variant) -> f64 {
    let part = DyadicPartition::new(grid);
    (0..grid.len())
        .map(|i| grid.k_abs(i))
        .filter(|&k| variant == Variant::Nonhomogeneous || k > 0.0)
        .map(|k| (part.range(variant).map(|q| part.symbol(q, variant, k)).sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max)
}

/// `max |T_u v + T_v u + R(u, v) − uv|` relative to `max |uv|`.
pub fn bony_error(u: &SpectralField, v: &SpectralField) -> Result<f64, lp::LpError> {
    let (a, b, r) = lp::bony_split(u, v)?;
    let uv = u.to_physical().as_slice().iter().zip(v.to_physical().as_slice()).map(|(x, y)| x * y).collect::<Vec<_>>();
    let scale = uv.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let err = (0..uv.len())
        .map(|i| (a.as_slice()[i] + b.as_slice()[i] + r.as_slice()[i] - uv[i]).norm())
        .fold(0.0, f64::max);
    Ok(err / scale)
}

/// `Σ_q ‖Δ̇_q f‖²_{L²} / ‖f‖²_{L²}`; lies in `[1/2, 1]` for zero-mean `f`.
pub fn block_energy_ratio(f: &SpectralField) -> f64 {
    let part = DyadicPartition::new(f.grid());
    let total = f.l2_norm().powi(2);
    let sum: f64 = part
        .range(Variant::Homogeneous)
        .map(|q| part.block(f, q, Variant::Homogeneous).expect("q in range").l2_norm().powi(2))
        .sum();
    sum / total
}

/// Tolerance on the ratio of fitted rates between consecutive blocks (ideal 4).
pub const SCALING_TOL: f64 = 0.05;

fn besov_check(cfg: &ExperimentConfig, out: &mut Out) -> Result<bool, CliError> {
    let grid = cfg.grid.build()?;
    let bc = &cfg.besov;
    let mut rng = cfg.rng();
    let cutoff = grid.dealias_cutoff();

    let partition = partition_error(&grid, Variant::Homogeneous).max(partition_error(&grid, Variant::Nonhomogeneous));

    let mut bony = 0.0f64;
    let mut energy = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..bc.random_fields {
        let u = random_field(&grid, &mut rng, cutoff, 1.0, false);
        let v = random_field(&grid, &mut rng, cutoff, 1.0, false);
        bony = bony.max(bony_error(&u, &v).map_err(run_err)?);
        let e = block_energy_ratio(&u);
        energy = (energy.0.min(e), energy.1.max(e));
    }

    let mut decay = Vec::new();
    for &q in &bc.q_values {
        let f = lp::fixed_profile_field(&grid, q);
        let horizon = 0.5 / (bc.mu * 4f64.powi(q));
        let ts: Vec<f64> = (0..=10).map(|j| horizon * j as f64 / 10.0).collect();
        decay.push(lp::check_semigroup_decay(&f, q, bc.mu, bc.u_disp, bc.p, &ts).map_err(run_err)?);
    }
    let scaling: Vec<f64> = decay.windows(2).map(|w| w[1].fitted_rate / w[0].fitted_rate).collect();
    let scaling_ok = scaling.iter().all(|r| (r / 4.0 - 1.0).abs() <= SCALING_TOL);

    let family = smoothing_family(&grid, &mut rng, bc.smoothing_cases, bc.smoothing_max_mode, bc.mu, bc.u_disp)
        .map_err(run_err)?;
    let worst = family.into_iter().max_by(|a, b| a.ratio.total_cmp(&b.ratio));
    let smoothing_ok = worst.as_ref().is_none_or(|w| w.pass);

    let pass = partition <= 1e-12
        && bony <= 1e-10
        && (energy.0 >= 1.0 / 3.0 || bc.random_fields == 0)
        && energy.1 <= 1.0 + 1e-12
        && decay.iter().all(|d| d.pass)
        && scaling_ok
        && smoothing_ok;
    let body = serde_json::json!({
        "pass": pass,
        "partition_error": partition,
        "bony_relative_error": bony,
        "block_energy_ratio": [energy.0, energy.1],
        "decay": decay,
        "scaling_ratios": scaling,
        "scaling_tolerance": SCALING_TOL,
        "smoothing_worst": worst,
    });
    out.write("besov.json", &output::json_string("cglb-besov", &body))?;
    Ok(pass)
}
