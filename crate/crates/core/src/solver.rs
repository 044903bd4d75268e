//! Time integration of the coupled system
//!
//! ```text
//! (∂ₜ − (1+iu)Δ) P = −Ω·∇P + ξP − (1+iv)|P|²P − r₁ P div Ω + f₁
//! (∂ₜ − mΔ) Ω     = −Ω·∇Ω − κ∇(|P|²) + f₂
//! ```
//!
//! The diffusive parts are propagated exactly per Fourier mode (the heat semigroup
//! of the Duhamel formula); everything else, including `ξP`, is explicit.
//! Coefficient functions are evaluated pointwise at `r = |P|`; the dispersion
//! `u(r)` is split into a reference value `u(r_ref)` treated exactly and the
//! remainder `i(u(|P|) − u(r_ref))ΔP` treated explicitly.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::littlewood_paley;
use crate::model::SystemParams;
use crate::spectral::{Grid, SpectralField};

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);
const I: C = C::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("step unstable at t = {t}: max-norm {norm:e} exceeds the blow-up threshold")]
    StepUnstable { t: f64, norm: f64 },
    #[error("advective CFL violated at t = {t}: Courant number {courant:.3} > {limit}")]
    CflViolated { t: f64, courant: f64, limit: f64 },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("state does not match the grid: {0}")]
    StateMismatch(String),
}

/// Time-stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Exponential time differencing with a second-order Runge–Kutta corrector.
    #[default]
    ExponentialRk2,
    /// Semi-implicit BDF2 with second-order extrapolation of the explicit terms.
    ImexBdf2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub dealias: bool,
    /// Record diagnostics every `cadence` steps (the final state is always recorded).
    pub cadence: usize,
    /// Max-norm above which a step is reported as unstable.
    pub blowup_threshold: f64,
    /// Modes with `|k| > k_max` are removed every step.
    pub k_max: Option<f64>,
    /// Amplitude at which the exactly-propagated dispersion `u(r_ref)` is taken.
    pub reference_amplitude: f64,
    /// Upper bound on `max|Ω|·dt/dx`; `None` disables the check.
    pub cfl_limit: Option<f64>,
    /// Sobolev index of the `Hs_*` diagnostics.
    pub sobolev_s: f64,
    /// Integrability index of the Besov diagnostic.
    pub besov_p: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 1.0,
            scheme: Scheme::ExponentialRk2,
            dealias: true,
            cadence: 100,
            blowup_threshold: 1e6,
            k_max: None,
            reference_amplitude: 0.0,
            cfl_limit: Some(1.0),
            sobolev_s: 1.0,
            besov_p: 2.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: &str| Err(SolverError::InvalidConfig(m.to_owned()));
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad("dt must be positive");
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return bad("t_end must be nonnegative");
        }
        if self.cadence == 0 {
            return bad("cadence must be at least 1");
        }
        if !(self.blowup_threshold > 0.0) {
            return bad("blowup_threshold must be positive");
        }
        if matches!(self.k_max, Some(k) if !(k > 0.0)) {
            return bad("k_max must be positive");
        }
        if !(self.besov_p >= 1.0) {
            return bad("besov_p must be >= 1");
        }
        Ok(())
    }

    /// Number of steps and the (uniform) step actually taken to reach `t_end`.
    pub fn step_plan(&self) -> (usize, f64) {
        if self.t_end == 0.0 {
            return (0, self.dt);
        }
        let steps = (self.t_end / self.dt - 1e-9).ceil().max(1.0) as usize;
        (steps, self.t_end / steps as f64)
    }
}

/// Complex amplitude `P` and real vector field `Ω` at time `t`, stored as Fourier
/// coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub p: SpectralField,
    pub omega: Vec<SpectralField>,
    pub t: f64,
}

impl FieldState {
    /// Build a state; `Ω` components are projected onto real values.
    pub fn new(p: SpectralField, omega: Vec<SpectralField>, t: f64) -> Result<Self, SolverError> {
        let grid = p.grid().clone();
        if omega.len() != grid.dim() {
            return Err(SolverError::StateMismatch(format!(
                "{} Omega components on a {}-d grid",
                omega.len(),
                grid.dim()
            )));
        }
        if omega.iter().any(|w| *w.grid() != grid) {
            return Err(SolverError::StateMismatch("Omega lives on another grid".into()));
        }
        let omega = omega
            .into_iter()
            .map(|w| w.to_physical().map_values(|z| C::new(z.re, 0.0)).to_spectral())
            .collect();
        Ok(Self { p: p.to_spectral(), omega, t })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self {
            p: SpectralField::zeros(grid),
            omega: (0..grid.dim()).map(|_| SpectralField::zeros(grid)).collect(),
            t: 0.0,
        }
    }

    pub fn grid(&self) -> &Grid {
        self.p.grid()
    }

    /// Multiply `P` and `Ω` by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Self {
        let s = C::new(alpha, 0.0);
        Self {
            p: self.p.scale(s),
            omega: self.omega.iter().map(|w| w.scale(s)).collect(),
            t: self.t,
        }
    }

    pub fn max_norm(&self) -> f64 {
        let mut m = self.p.max_norm();
        for w in &self.omega {
            m = m.max(w.max_norm());
        }
        m
    }
}

/// Source terms `f₁(t)`, `f₂(t)` as Fourier coefficients.
pub trait Forcing: Sync {
    /// `None` means identically zero at `t`.
    fn at(&self, t: f64, grid: &Grid) -> Option<(Vec<C>, Vec<Vec<C>>)>;
}

/// Zero forcing.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoForcing;

impl Forcing for NoForcing {
    fn at(&self, _t: f64, _grid: &Grid) -> Option<(Vec<C>, Vec<Vec<C>>)> {
        None
    }
}

/// Forcing given by a closure returning point values `(f₁, [f₂ components])`.
pub struct FnForcing<F>(pub F);

impl<F> Forcing for FnForcing<F>
where
    F: Fn(f64, &Grid) -> (SpectralField, Vec<SpectralField>) + Sync,
{
    fn at(&self, t: f64, grid: &Grid) -> Option<(Vec<C>, Vec<Vec<C>>)> {
        let (f1, f2) = (self.0)(t, grid);
        Some((f1.coefficients(), f2.iter().map(|f| f.coefficients()).collect()))
    }
}

/// Exact solution operator of `∂ₜf = μ(1+i·u_disp)Δf` over `dt`, applied per mode.
pub fn linear_propagator(field: &SpectralField, mu: f64, u_disp: f64, dt: f64) -> SpectralField {
    let g = field.grid().clone();
    let rate = C::new(mu, mu * u_disp);
    field.multiplier(|i| (-rate * g.k_squared(i) * dt).exp())
}

/// `(e^z, φ₁(z), φ₂(z))` with `φ₁ = (e^z − 1)/z`, `φ₂ = (e^z − 1 − z)/z²`.
pub fn phi_functions(z: C) -> (C, C, C) {
    let e = z.exp();
    if z.norm() < 0.5 {
        // Taylor series; 20 terms is far below f64 resolution for |z| < 0.5.
        let mut p1 = ZERO;
        let mut p2 = ZERO;
        let mut term = C::new(1.0, 0.0);
        let mut fact = 1.0;
        for j in 0..20 {
            // term = z^j, fact = (j+1)!
            fact *= (j + 1) as f64;
            p1 += term / fact;
            p2 += term / (fact * (j + 2) as f64);
            term *= z;
        }
        (e, p1, p2)
    } else {
        (e, (e - 1.0) / z, (e - 1.0 - z) / (z * z))
    }
}

/// Options for [`rhs_nonlinear`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhsOptions {
    pub dealias: bool,
    /// Dispersion already handled by the propagator.
    pub u_ref: f64,
}

/// Explicit right-hand sides
/// `dP = −Ω·∇P + ξP − (1+iv)|P|²P − r₁P div Ω + i(u(|P|) − u_ref)ΔP`,
/// `dΩ = −Ω·∇Ω − κ∇(|P|²)`, as Fourier coefficients.
pub fn rhs_nonlinear(
    state: &FieldState,
    params: &SystemParams,
    opts: RhsOptions,
) -> (SpectralField, Vec<SpectralField>) {
    let grid = state.grid().clone();
    let omega: Vec<Vec<C>> = state.omega.iter().map(|w| w.coefficients()).collect();
    let (dp, dw) = rhs_raw(&grid, &state.p.coefficients(), &omega, params, opts);
    (
        SpectralField::from_spectral(&grid, dp).expect("grid length"),
        dw.into_iter()
            .map(|w| SpectralField::from_spectral(&grid, w).expect("grid length"))
            .collect(),
    )
}

fn to_phys(grid: &Grid, coeffs: &[C]) -> Vec<C> {
    let mut v = coeffs.to_vec();
    grid.inverse_in_place(&mut v);
    v
}

fn deriv_phys(grid: &Grid, coeffs: &[C], axis: usize, order: u32) -> Vec<C> {
    let half = (grid.n() / 2) as u64;
    let mut v: Vec<C> = coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            if order % 2 == 1 && grid.mode(i)[axis].unsigned_abs() == half {
                ZERO
            } else {
                c * (I * grid.wavevector(i)[axis]).powu(order)
            }
        })
        .collect();
    grid.inverse_in_place(&mut v);
    v
}

fn to_spec(grid: &Grid, mut values: Vec<C>, dealias: bool) -> Vec<C> {
    grid.forward_in_place(&mut values);
    if dealias {
        for (i, v) in values.iter_mut().enumerate() {
            if !grid.is_dealiased_mode(i) {
                *v = ZERO;
            }
        }
    }
    values
}

fn laplacian_phys(grid: &Grid, coeffs: &[C]) -> Vec<C> {
    let mut v: Vec<C> = coeffs.iter().enumerate().map(|(i, c)| -c * grid.k_squared(i)).collect();
    grid.inverse_in_place(&mut v);
    v
}

pub(crate) fn rhs_raw(
    grid: &Grid,
    p_hat: &[C],
    omega_hat: &[Vec<C>],
    params: &SystemParams,
    opts: RhsOptions,
) -> (Vec<C>, Vec<Vec<C>>) {
    let dim = grid.dim();
    let len = grid.len();
    let p = to_phys(grid, p_hat);
    let grad_p: Vec<Vec<C>> = (0..dim).map(|a| deriv_phys(grid, p_hat, a, 1)).collect();
    let w: Vec<Vec<f64>> = omega_hat
        .iter()
        .map(|c| to_phys(grid, c).into_iter().map(|z| z.re).collect())
        .collect();
    // grad_w[i][j] = ∂_j Ω_i
    let grad_w: Vec<Vec<Vec<f64>>> = omega_hat
        .iter()
        .map(|c| {
            (0..dim)
                .map(|a| deriv_phys(grid, c, a, 1).into_iter().map(|z| z.re).collect())
                .collect()
        })
        .collect();

    // |P|², band-limited first so the cubic term is two successive dealiased products.
    let q_hat = to_spec(grid, p.iter().map(|z| C::new(z.norm_sqr(), 0.0)).collect(), opts.dealias);
    let q: Vec<f64> = to_phys(grid, &q_hat).into_iter().map(|z| z.re).collect();
    let grad_q: Vec<Vec<f64>> = (0..dim)
        .map(|a| deriv_phys(grid, &q_hat, a, 1).into_iter().map(|z| z.re).collect())
        .collect();

    let u_varies = params.u.0 != opts.u_ref || !params.u.is_constant();
    let lap_p = if u_varies { Some(laplacian_phys(grid, p_hat)) } else { None };

    let mut dp = vec![ZERO; len];
    for x in 0..len {
        let r = p[x].norm();
        let mut adv = ZERO;
        let mut div = 0.0;
        for a in 0..dim {
            adv += grad_p[a][x] * w[a][x];
            div += grad_w[a][a][x];
        }
        let v = params.v.eval(r);
        let mut val = -adv + params.xi * p[x] - C::new(1.0, v) * q[x] * p[x]
            - params.r1(r) * p[x] * div;
        if let Some(lap) = &lap_p {
            val += I * (params.u.eval(r) - opts.u_ref) * lap[x];
        }
        dp[x] = val;
    }
    let dp_hat = to_spec(grid, dp, opts.dealias);

    let dw_hat = (0..dim)
        .map(|i| {
            let vals = (0..len)
                .map(|x| {
                    let r = p[x].norm();
                    let adv: f64 = (0..dim).map(|j| w[j][x] * grad_w[i][j][x]).sum();
                    C::new(-adv - params.kappa.eval(r) * grad_q[i][x], 0.0)
                })
                .collect();
            to_spec(grid, vals, opts.dealias)
        })
        .collect();
    (dp_hat, dw_hat)
}

/// Stateful integrator holding the per-mode propagator factors and, for BDF2, the
/// previous step.
pub struct Integrator {
    grid: Grid,
    params: SystemParams,
    config: SolverConfig,
    dt: f64,
    u_ref: f64,
    /// Per component (P, then each Ω): per-mode (E, hφ₁, hφ₂) for ETD2RK.
    etd: Vec<Vec<(C, C, C)>>,
    /// Per component per mode linear symbol L(k).
    symbol: Vec<Vec<C>>,
    keep: Vec<bool>,
    history: Option<(Vec<Vec<C>>, Vec<Vec<C>>)>,
}

impl Integrator {
    pub fn new(grid: &Grid, params: &SystemParams, config: &SolverConfig) -> Result<Self, SolverError> {
        config.validate()?;
        if !params.is_finite() {
            return Err(SolverError::InvalidConfig("non-finite coefficients".into()));
        }
        let (_, dt) = config.step_plan();
        let u_ref = params.u.eval(config.reference_amplitude);
        let keep: Vec<bool> = (0..grid.len())
            .map(|i| config.k_max.is_none_or(|km| grid.k_abs(i) <= km + 1e-12))
            .collect();
        let mut symbol = Vec::with_capacity(grid.dim() + 1);
        symbol.push((0..grid.len()).map(|i| -C::new(1.0, u_ref) * grid.k_squared(i)).collect());
        for _ in 0..grid.dim() {
            symbol.push(
                (0..grid.len()).map(|i| C::new(-params.m * grid.k_squared(i), 0.0)).collect(),
            );
        }
        let etd = symbol
            .iter()
            .map(|sym: &Vec<C>| {
                sym.iter()
                    .map(|&l| {
                        let (e, p1, p2) = phi_functions(l * dt);
                        (e, p1 * dt, p2 * dt)
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            grid: grid.clone(),
            params: *params,
            config: config.clone(),
            dt,
            u_ref,
            etd,
            symbol,
            keep,
            history: None,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn explicit(&self, comps: &[Vec<C>], t: f64, forcing: &dyn Forcing) -> Vec<Vec<C>> {
        let opts = RhsOptions { dealias: self.config.dealias, u_ref: self.u_ref };
        let (dp, dw) = rhs_raw(&self.grid, &comps[0], &comps[1..], &self.params, opts);
        let mut out = Vec::with_capacity(comps.len());
        out.push(dp);
        out.extend(dw);
        if let Some((f1, f2)) = forcing.at(t, &self.grid) {
            for (o, f) in out[0].iter_mut().zip(&f1) {
                *o += f;
            }
            for (comp, fc) in out[1..].iter_mut().zip(&f2) {
                for (o, f) in comp.iter_mut().zip(fc) {
                    *o += f;
                }
            }
        }
        for comp in out.iter_mut() {
            for (v, k) in comp.iter_mut().zip(&self.keep) {
                if !k {
                    *v = ZERO;
                }
            }
        }
        out
    }

    /// Advance `state` by one step.
    pub fn step(&mut self, state: &mut FieldState, forcing: &dyn Forcing) -> Result<(), SolverError> {
        if *state.grid() != self.grid || state.omega.len() != self.grid.dim() {
            return Err(SolverError::StateMismatch("state grid differs from integrator grid".into()));
        }
        if let Some(limit) = self.config.cfl_limit {
            let wmax = state.omega.iter().map(|w| w.max_norm()).fold(0.0, f64::max);
            let courant = wmax * self.dt / self.grid.dx();
            if courant > limit {
                return Err(SolverError::CflViolated { t: state.t, courant, limit });
            }
        }
        let mut comps: Vec<Vec<C>> = Vec::with_capacity(self.grid.dim() + 1);
        comps.push(state.p.coefficients());
        comps.extend(state.omega.iter().map(|w| w.coefficients()));
        for comp in comps.iter_mut() {
            for (v, k) in comp.iter_mut().zip(&self.keep) {
                if !k {
                    *v = ZERO;
                }
            }
        }
        let t = state.t;
        let h = self.dt;
        let n0 = self.explicit(&comps, t, forcing);
        let next = match (self.config.scheme, self.history.take()) {
            (Scheme::ImexBdf2, Some((prev, n_prev))) => {
                let next: Vec<Vec<C>> = comps
                    .iter()
                    .enumerate()
                    .map(|(c, u)| {
                        (0..u.len())
                            .map(|i| {
                                let rhs = 4.0 * u[i] - prev[c][i]
                                    + 2.0 * h * (2.0 * n0[c][i] - n_prev[c][i]);
                                rhs / (3.0 - 2.0 * h * self.symbol[c][i])
                            })
                            .collect()
                    })
                    .collect();
                self.history = Some((comps, n0));
                next
            }
            _ => {
                let a: Vec<Vec<C>> = comps
                    .iter()
                    .enumerate()
                    .map(|(c, u)| {
                        u.iter()
                            .zip(&n0[c])
                            .zip(&self.etd[c])
                            .map(|((u, n), (e, p1, _))| e * u + p1 * n)
                            .collect()
                    })
                    .collect();
                let na = self.explicit(&a, t + h, forcing);
                let next: Vec<Vec<C>> = a
                    .iter()
                    .enumerate()
                    .map(|(c, a)| {
                        (0..a.len())
                            .map(|i| a[i] + self.etd[c][i].2 * (na[c][i] - n0[c][i]))
                            .collect()
                    })
                    .collect();
                if self.config.scheme == Scheme::ImexBdf2 {
                    self.history = Some((comps, n0));
                }
                next
            }
        };
        let mut it = next.into_iter();
        let p = SpectralField::from_spectral(&self.grid, it.next().unwrap()).expect("len");
        let omega: Vec<SpectralField> = it
            .map(|w| {
                // keep Ω real: project onto the conjugate-symmetric part
                let f = SpectralField::from_spectral(&self.grid, w).expect("len");
                f.to_physical().map_values(|z| C::new(z.re, 0.0)).to_spectral()
            })
            .collect();
        let new_t = t + h;
        let candidate = FieldState { p, omega, t: new_t };
        let norm = candidate.max_norm();
        if !norm.is_finite() || norm > self.config.blowup_threshold {
            return Err(SolverError::StepUnstable { t: new_t, norm });
        }
        *state = candidate;
        Ok(())
    }
}

/// One step of the configured scheme from a fresh integrator (BDF2 bootstraps with
/// an exponential RK2 step).
pub fn step(
    state: &FieldState,
    params: &SystemParams,
    forcing: &dyn Forcing,
    config: &SolverConfig,
) -> Result<FieldState, SolverError> {
    let mut integ = Integrator::new(state.grid(), params, config)?;
    let mut out = state.clone();
    integ.step(&mut out, forcing)?;
    Ok(out)
}

/// One row of the diagnostics time series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticRow {
    pub t: f64,
    pub l2_p: f64,
    pub l2_omega: f64,
    pub hs_p: f64,
    pub hs_omega: f64,
    pub besov_proxy: f64,
}

impl DiagnosticRow {
    pub const CSV_HEADER: &'static str = "t,L2_P,L2_Omega,Hs_P,Hs_Omega,besov_proxy";

    pub fn of(state: &FieldState, config: &SolverConfig) -> Self {
        let s = config.sobolev_s;
        let sq = |v: f64| v * v;
        Self {
            t: state.t,
            l2_p: state.p.l2_norm(),
            l2_omega: state.omega.iter().map(|w| sq(w.l2_norm())).sum::<f64>().sqrt(),
            hs_p: state.p.sobolev_norm(s),
            hs_omega: state.omega.iter().map(|w| sq(w.sobolev_norm(s))).sum::<f64>().sqrt(),
            besov_proxy: littlewood_paley::smallness_monitor(state, config.besov_p),
        }
    }

    pub fn values(&self) -> [f64; 6] {
        [self.t, self.l2_p, self.l2_omega, self.hs_p, self.hs_omega, self.besov_proxy]
    }
}

/// Result of [`evolve`].
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub rows: Vec<DiagnosticRow>,
    pub final_state: FieldState,
    pub steps: usize,
}

/// Failure during [`evolve`], carrying the diagnostics recorded so far.
#[derive(Debug, Clone, thiserror::Error)]
#[error("{error}")]
pub struct EvolveError {
    pub error: SolverError,
    pub rows: Vec<DiagnosticRow>,
}

/// Repeated [`Integrator::step`] with diagnostics every `config.cadence` steps and at
/// the end. Observers see the state at the same cadence.
pub fn evolve(
    state0: &FieldState,
    params: &SystemParams,
    forcing: &dyn Forcing,
    config: &SolverConfig,
    observers: &mut [&mut dyn FnMut(&FieldState)],
) -> Result<Trajectory, EvolveError> {
    let wrap = |error| EvolveError { error, rows: Vec::new() };
    let mut integ = Integrator::new(state0.grid(), params, config).map_err(wrap)?;
    let (steps, _) = config.step_plan();
    let mut state = state0.clone();
    let mut rows = vec![DiagnosticRow::of(&state, config)];
    for obs in observers.iter_mut() {
        obs(&state);
    }
    for s in 1..=steps {
        if let Err(error) = integ.step(&mut state, forcing) {
            return Err(EvolveError { error, rows });
        }
        if s % config.cadence == 0 || s == steps {
            rows.push(DiagnosticRow::of(&state, config));
            for obs in observers.iter_mut() {
                obs(&state);
            }
        }
    }
    Ok(Trajectory { rows, final_state: state, steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Affine;
    use std::f64::consts::PI;

    #[test]
    fn propagator_identity_and_decay() {
        let g = Grid::new(1, 16, 2.0 * PI).unwrap();
        let f = SpectralField::from_real_fn(&g, |x, _| (3.0 * x).cos());
        assert_eq!(linear_propagator(&f, 1.0, 0.7, 0.0), f.to_spectral());
        let out = linear_propagator(&f, 1.0, 0.0, 1.0);
        let ratio = out.max_norm() / f.max_norm();
        assert!((ratio - (-9.0f64).exp()).abs() < 1e-15);
        let disp = linear_propagator(&f, 1.0, 5.0, 1.0);
        assert!((disp.l2_norm() - out.l2_norm()).abs() < 1e-15);
    }

    #[test]
    fn phi_functions_continuous_across_series_switch() {
        for z in [C::new(0.49999, 0.0), C::new(0.0, -0.4999), C::new(-0.3, 0.39)] {
            let (_, a1, a2) = phi_functions(z);
            let e = z.exp();
            assert!((a1 - (e - 1.0) / z).norm() < 1e-14);
            assert!((a2 - (e - 1.0 - z) / (z * z)).norm() < 1e-12);
        }
        let (_, p1, p2) = phi_functions(ZERO);
        assert_eq!((p1, p2), (C::new(1.0, 0.0), C::new(0.5, 0.0)));
    }

    #[test]
    fn zero_state_rhs_is_zero() {
        let g = Grid::new(2, 16, 1.0).unwrap();
        let st = FieldState::zeros(&g);
        let (dp, dw) = rhs_nonlinear(&st, &SystemParams::default(), RhsOptions { dealias: true, u_ref: 0.0 });
        assert_eq!(dp.max_norm(), 0.0);
        assert!(dw.iter().all(|w| w.max_norm() == 0.0));
    }

    #[test]
    fn constant_amplitude_rhs() {
        let g = Grid::new(1, 16, 1.0).unwrap();
        let c = C::new(0.3, -0.4);
        let p = SpectralField::from_fn(&g, |_, _| c);
        let st = FieldState::new(p, vec![SpectralField::zeros(&g)], 0.0).unwrap();
        let params = SystemParams { kappa: Affine::constant(2.0), ..Default::default() };
        let (dp, dw) = rhs_nonlinear(&st, &params, RhsOptions { dealias: true, u_ref: 0.0 });
        let want = c - c * c.norm_sqr();
        assert!(dp.values().iter().all(|z| (z - want).norm() < 1e-15));
        assert!(dw[0].max_norm() < 1e-15);
    }

    #[test]
    fn zero_state_stays_bit_exact_zero() {
        let g = Grid::new(1, 32, 5.0).unwrap();
        let cfg = SolverConfig { dt: 0.01, t_end: 0.5, ..Default::default() };
        let st = FieldState::zeros(&g);
        let out = evolve(&st, &SystemParams::default(), &NoForcing, &cfg, &mut []).unwrap();
        assert!(out.final_state.p.as_slice().iter().all(|z| *z == ZERO));
        assert!(out.final_state.omega[0].as_slice().iter().all(|z| *z == ZERO));
    }

    #[test]
    fn t_end_zero_records_initial_only() {
        let g = Grid::new(1, 16, 1.0).unwrap();
        let cfg = SolverConfig { t_end: 0.0, ..Default::default() };
        let out = evolve(&FieldState::zeros(&g), &SystemParams::default(), &NoForcing, &cfg, &mut [])
            .unwrap();
        assert_eq!(out.rows.len(), 1);
        assert_eq!(out.steps, 0);
    }

    #[test]
    fn blowup_is_reported() {
        // anti-diffusion in Ω: mode 5 grows like e^{25t}
        let g = Grid::new(1, 16, 2.0 * PI).unwrap();
        let w = SpectralField::from_real_fn(&g, |x, _| 1e-3 * (5.0 * x).sin());
        let st = FieldState::new(SpectralField::zeros(&g), vec![w], 0.0).unwrap();
        let params = SystemParams { m: -1.0, ..Default::default() };
        let cfg = SolverConfig { dt: 0.01, t_end: 5.0, cfl_limit: None, ..Default::default() };
        let err = evolve(&st, &params, &NoForcing, &cfg, &mut []).unwrap_err();
        match err.error {
            SolverError::StepUnstable { t, .. } => assert!(t > 0.3 && t < 1.5, "t = {t}"),
            e => panic!("unexpected {e}"),
        }
        assert!(!err.rows.is_empty());
    }

    #[test]
    fn bad_config_rejected() {
        let g = Grid::new(1, 16, 1.0).unwrap();
        let cfg = SolverConfig { dt: -1.0, ..Default::default() };
        assert!(Integrator::new(&g, &SystemParams::default(), &cfg).is_err());
        let cfg = SolverConfig { cadence: 0, ..Default::default() };
        assert!(Integrator::new(&g, &SystemParams::default(), &cfg).is_err());
    }
}
