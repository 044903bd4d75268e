//! Discrete Littlewood–Paley theory on periodic grids: dyadic blocks, Besov
//! norms, Bony's paraproduct splitting, and numerical checks of the heat-semigroup
//! decay and smoothing estimates.
//!
//! The cutoff profiles are built from one smooth step `s` on `[3/4, 4/3]`:
//! `χ(ξ) = 1 − s(|ξ|)` and `φ(ξ) = χ(ξ/2) − χ(ξ)`, so `φ` lives in the annulus
//! `3/4 ≤ |ξ| ≤ 8/3` and the partition of unity telescopes exactly.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::solver::{phi_functions, FieldState, Forcing};
use crate::spectral::{lp_norm, Grid, SpectralField};

type C = Complex64;

const INNER: f64 = 0.75;
const BALL: f64 = 4.0 / 3.0;
const OUTER: f64 = 8.0 / 3.0;

/// Empirical ceiling for the smoothing-estimate ratio LHS/RHS. The constant of the
/// estimate is not quantified analytically; this value was calibrated on randomized
/// families of initial data and sources (observed maximum about 0.93 on 4×50 cases
/// at `n = 256` and `512`, with time samples log-spaced from `10⁻⁵`).
pub const SMOOTHING_RATIO_CEILING: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LpError {
    #[error("dyadic block {q} outside the resolvable range [{lo}, {hi}]")]
    OutOfRange { q: i32, lo: i32, hi: i32 },
    #[error("invalid Besov index: {0}")]
    InvalidIndex(String),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("invalid time grid: {0}")]
    InvalidTimeGrid(String),
    #[error("decay fit failed: {0}")]
    DegenerateFit(String),
}

/// Homogeneous (`Δ̇_q`, `q ∈ ℤ`) or nonhomogeneous (`Δ_{-1} = χ(D)`, `Δ_q`, `q ≥ 0`) blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    #[default]
    Homogeneous,
    Nonhomogeneous,
}

fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

/// Low-frequency cutoff: 1 on `|ξ| ≤ 3/4`, 0 on `|ξ| ≥ 4/3`.
pub fn chi(xi: f64) -> f64 {
    1.0 - smooth_step((xi.abs() - INNER) / (BALL - INNER))
}

/// Annulus profile `φ(ξ) = χ(ξ/2) − χ(ξ)`.
pub fn phi(xi: f64) -> f64 {
    chi(xi / 2.0) - chi(xi)
}

fn scale(q: i32) -> f64 {
    2f64.powi(q)
}

/// Dyadic decomposition adapted to one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicPartition {
    grid: Grid,
    /// Smallest block that sees a nonzero wavenumber of the grid.
    pub q_min: i32,
    /// Largest block that sees a wavenumber of the grid.
    pub q_max: i32,
}

impl DyadicPartition {
    pub fn new(grid: &Grid) -> Self {
        let k_min = grid.k0();
        let k_max = (0..grid.len()).map(|i| grid.k_abs(i)).fold(0.0, f64::max);
        // φ(2^{-q}·) vanishes at every grid wavenumber below q_min and above q_max.
        let q_min = (INNER * k_min).log2().floor() as i32;
        let q_min = if scale(q_min + 1) <= INNER * k_min { q_min + 1 } else { q_min };
        let mut q_max = (k_max / INNER).log2().ceil() as i32 - 1;
        while scale(q_max + 1) * INNER < k_max {
            q_max += 1;
        }
        Self { grid: grid.clone(), q_min, q_max }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Admissible block indices for `variant`.
    pub fn range(&self, variant: Variant) -> std::ops::RangeInclusive<i32> {
        match variant {
            Variant::Homogeneous => self.q_min..=self.q_max,
            Variant::Nonhomogeneous => -1..=self.q_max.max(-1),
        }
    }

    /// Multiplier of block `q` at wavenumber modulus `k`.
    pub fn symbol(&self, q: i32, variant: Variant, k: f64) -> f64 {
        match variant {
            Variant::Nonhomogeneous if q == -1 => chi(k),
            Variant::Nonhomogeneous if q < -1 => 0.0,
            _ => phi(k / scale(q)),
        }
    }

    fn check(&self, q: i32, variant: Variant) -> Result<(), LpError> {
        let r = self.range(variant);
        if r.contains(&q) {
            Ok(())
        } else {
            Err(LpError::OutOfRange { q, lo: *r.start(), hi: *r.end() })
        }
    }

    /// `Δ_q f`.
    pub fn block(&self, f: &SpectralField, q: i32, variant: Variant) -> Result<SpectralField, LpError> {
        if *f.grid() != self.grid {
            return Err(LpError::GridMismatch);
        }
        self.check(q, variant)?;
        let g = &self.grid;
        Ok(f.real_multiplier(|i| self.symbol(q, variant, g.k_abs(i))))
    }

    /// Low-frequency cutoff `S_q f = Σ_{q' ≤ q−1} Δ_{q'} f` (nonhomogeneous; `S_q = 0` for `q ≤ −1`).
    pub fn low_pass(&self, f: &SpectralField, q: i32) -> SpectralField {
        let g = &self.grid;
        if q <= -1 {
            return SpectralField::zeros(g).to_spectral();
        }
        f.real_multiplier(|i| chi(g.k_abs(i) / scale(q)))
    }
}

/// `Δ_q f` on a fresh partition of `f`'s grid.
pub fn dyadic_block(f: &SpectralField, q: i32, variant: Variant) -> Result<SpectralField, LpError> {
    DyadicPartition::new(f.grid()).block(f, q, variant)
}

/// Regularity and integrability indices of a Besov norm, with optional time exponent
/// for Chemin–Lerner space-time norms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BesovIndex {
    pub s: f64,
    pub p: f64,
    pub r: f64,
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub variant: Variant,
}

impl BesovIndex {
    pub fn new(s: f64, p: f64, r: f64) -> Result<Self, LpError> {
        let idx = Self { s, p, r, rho: None, variant: Variant::Homogeneous };
        idx.validate()?;
        Ok(idx)
    }

    pub fn with_rho(mut self, rho: f64) -> Result<Self, LpError> {
        self.rho = Some(rho);
        self.validate()?;
        Ok(self)
    }

    pub fn nonhomogeneous(mut self) -> Self {
        self.variant = Variant::Nonhomogeneous;
        self
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let ok = |e: f64| e >= 1.0 && !e.is_nan();
        if !self.s.is_finite() {
            return Err(LpError::InvalidIndex("s must be finite".into()));
        }
        if !ok(self.p) || !ok(self.r) || self.rho.is_some_and(|x| !ok(x)) {
            return Err(LpError::InvalidIndex("exponents must lie in [1, ∞]".into()));
        }
        Ok(())
    }
}

fn lr_sum(terms: impl Iterator<Item = f64>, r: f64) -> f64 {
    if r.is_infinite() {
        terms.fold(0.0, f64::max)
    } else {
        terms.map(|t| t.powf(r)).sum::<f64>().powf(1.0 / r)
    }
}

/// `(Σ_q (2^{qs}‖Δ_q f‖_{L^p})^r)^{1/r}` over the resolvable blocks.
pub fn besov_norm(f: &SpectralField, idx: &BesovIndex) -> f64 {
    let part = DyadicPartition::new(f.grid());
    besov_norm_with(&part, f, idx)
}

fn besov_norm_with(part: &DyadicPartition, f: &SpectralField, idx: &BesovIndex) -> f64 {
    let terms: Vec<f64> = part
        .range(idx.variant)
        .map(|q| {
            let b = part.block(f, q, idx.variant).expect("q in range").to_physical();
            scale(q).powf(idx.s) * lp_norm(b.as_slice(), idx.p)
        })
        .collect();
    lr_sum(terms.into_iter(), idx.r)
}

/// Bony splitting `uv = T_u v + T_v u + R(u, v)` with nonhomogeneous blocks, returned
/// in physical representation.
pub fn bony_split(
    u: &SpectralField,
    v: &SpectralField,
) -> Result<(SpectralField, SpectralField, SpectralField), LpError> {
    if u.grid() != v.grid() {
        return Err(LpError::GridMismatch);
    }
    let grid = u.grid().clone();
    let part = DyadicPartition::new(&grid);
    let qs: Vec<i32> = part.range(Variant::Nonhomogeneous).collect();
    let blocks = |f: &SpectralField| -> Vec<Vec<C>> {
        qs.iter()
            .map(|&q| part.block(f, q, Variant::Nonhomogeneous).unwrap().to_physical().into_vec())
            .collect()
    };
    let bu = blocks(u);
    let bv = blocks(v);
    let len = grid.len();
    let mut tuv = vec![C::new(0.0, 0.0); len];
    let mut tvu = tuv.clone();
    let mut ruv = tuv.clone();
    // running S_{q-1}: sum of blocks q' ≤ q − 2
    let mut su = tuv.clone();
    let mut sv = tuv.clone();
    for (j, _) in qs.iter().enumerate() {
        if j >= 2 {
            for x in 0..len {
                su[x] += bu[j - 2][x];
                sv[x] += bv[j - 2][x];
            }
        }
        for x in 0..len {
            tuv[x] += su[x] * bv[j][x];
            tvu[x] += sv[x] * bu[j][x];
            let mut near = bv[j][x];
            if j >= 1 {
                near += bv[j - 1][x];
            }
            if j + 1 < qs.len() {
                near += bv[j + 1][x];
            }
            ruv[x] += bu[j][x] * near;
        }
    }
    let mk = |v| SpectralField::from_physical(&grid, v).expect("grid length");
    Ok((mk(tuv), mk(tvu), mk(ruv)))
}

/// JSON record of a semigroup-decay check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub q: i32,
    pub p: f64,
    /// Fitted exponent `c·2^{2q}` of `e^{−cμt2^{2q}}`.
    pub fitted_rate: f64,
    pub fitted_c: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub pass: bool,
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Fits the decay of `‖e^{μ(1+iu)tΔ}Δ̇_q f‖_{L^p} / ‖Δ̇_q f‖_{L^p}` over `t_grid` and
/// checks the fitted constant against the annulus bracket `[(3/4)², (8/3)²]`.
pub fn check_semigroup_decay(
    f: &SpectralField,
    q: i32,
    mu: f64,
    u_disp: f64,
    p: f64,
    t_grid: &[f64],
) -> Result<DecayReport, LpError> {
    if t_grid.len() < 2 || t_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(LpError::InvalidTimeGrid("need at least two nonnegative times".into()));
    }
    if !(mu > 0.0) {
        return Err(LpError::DegenerateFit("mu must be positive".into()));
    }
    let block = dyadic_block(f, q, Variant::Homogeneous)?;
    let n0 = lp_norm(block.to_physical().as_slice(), p);
    if n0 == 0.0 {
        return Err(LpError::DegenerateFit(format!("block {q} of the test field is empty")));
    }
    let logs: Vec<f64> = t_grid
        .iter()
        .map(|&t| {
            let ft = crate::solver::linear_propagator(&block, mu, u_disp, t);
            (lp_norm(ft.to_physical().as_slice(), p) / n0).ln()
        })
        .collect();
    let (slope, _) = linear_fit(t_grid, &logs);
    let rate = -slope / mu;
    let fitted_c = rate / scale(2 * q);
    let (lo, hi) = (INNER * INNER, OUTER * OUTER);
    Ok(DecayReport {
        q,
        p,
        fitted_rate: rate,
        fitted_c,
        bracket_lo: lo,
        bracket_hi: hi,
        pass: fitted_c.is_finite() && (lo..=hi).contains(&fitted_c),
    })
}

/// Real test field with modes of modulus `2^q`, `3·2^{q−1}`, `2^{q+1}` (in units of
/// the fundamental wavenumber) along the first axis; the block profile is the same
/// for every `q`, which makes decay rates comparable across scales.
pub fn fixed_profile_field(grid: &Grid, q: i32) -> SpectralField {
    let k0 = grid.k0();
    let a = scale(q);
    SpectralField::from_real_fn(grid, |x, _| {
        (a * k0 * x).cos() + 0.5 * (1.5 * a * k0 * x).sin() + 0.25 * (2.0 * a * k0 * x).cos()
    })
}

/// Inputs of the smoothing-estimate check for `∂ₜf − μ(1+iu)Δf = g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingSetup {
    pub mu: f64,
    pub u_disp: f64,
    /// `σ`, `p`, `r`, and the source time exponent `ρ` (defaults to 1).
    pub idx: BesovIndex,
    /// Time exponent `ρ₁ ≥ ρ` of the solution norm.
    pub rho1: f64,
}

/// Both sides of the smoothing estimate and their ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothingReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub ceiling: f64,
    /// The ceiling is an empirical calibration, not an analytic constant.
    pub ceiling_calibrated: bool,
    pub pass: bool,
}

/// `‖f‖_{L̃^ρ(Ḃ^s_{p,r})}` of a sampled trajectory: time `L^ρ` (trapezoidal, over the
/// sample times) of each `‖Δ̇_q f(t)‖_{L^p}`, then the weighted `ℓ^r` sum over `q`.
pub fn chemin_lerner_norm(
    part: &DyadicPartition,
    times: &[f64],
    samples: &[SpectralField],
    s: f64,
    p: f64,
    r: f64,
    rho: f64,
) -> f64 {
    let terms: Vec<f64> = part
        .range(Variant::Homogeneous)
        .map(|q| {
            let norms: Vec<f64> = samples
                .iter()
                .map(|f| {
                    let b = part.block(f, q, Variant::Homogeneous).expect("q in range");
                    lp_norm(b.to_physical().as_slice(), p)
                })
                .collect();
            scale(q).powf(s) * time_lp(times, &norms, rho)
        })
        .collect();
    lr_sum(terms.into_iter(), r)
}

fn time_lp(times: &[f64], values: &[f64], rho: f64) -> f64 {
    if rho.is_infinite() {
        return values.iter().cloned().fold(0.0, f64::max);
    }
    let mut acc = 0.0;
    for j in 1..times.len() {
        let h = times[j] - times[j - 1];
        acc += 0.5 * h * (values[j].powf(rho) + values[j - 1].powf(rho));
    }
    acc.powf(1.0 / rho)
}

/// Solves `∂ₜf − μ(1+iu)Δf = g` exactly per mode on the sample times, with `g`
/// (first forcing component) interpolated linearly in time between samples.
pub fn duhamel_solve(
    f0: &SpectralField,
    g: &dyn Forcing,
    mu: f64,
    u_disp: f64,
    times: &[f64],
) -> Result<(Vec<SpectralField>, Vec<SpectralField>), LpError> {
    if times.len() < 2 || times[0] != 0.0 || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(LpError::InvalidTimeGrid("times must start at 0 and increase".into()));
    }
    let grid = f0.grid().clone();
    let source = |t: f64| -> Vec<C> {
        g.at(t, &grid).map(|(f1, _)| f1).unwrap_or_else(|| vec![C::new(0.0, 0.0); grid.len()])
    };
    let symbol: Vec<C> = (0..grid.len()).map(|i| -C::new(mu, mu * u_disp) * grid.k_squared(i)).collect();
    let mut f = f0.coefficients();
    let mut gs = vec![source(times[0])];
    let mut sol = vec![SpectralField::from_spectral(&grid, f.clone()).expect("len")];
    for j in 1..times.len() {
        let h = times[j] - times[j - 1];
        let g1 = source(times[j]);
        let g0 = gs.last().unwrap();
        for i in 0..grid.len() {
            let (e, p1, p2) = phi_functions(symbol[i] * h);
            f[i] = e * f[i] + h * p1 * g0[i] + h * p2 * (g1[i] - g0[i]);
        }
        gs.push(g1);
        sol.push(SpectralField::from_spectral(&grid, f.clone()).expect("len"));
    }
    let gfields = gs
        .into_iter()
        .map(|c| SpectralField::from_spectral(&grid, c).expect("len"))
        .collect();
    Ok((sol, gfields))
}

/// Evaluates `μ^{1/ρ₁}‖f‖_{L̃^{ρ₁}(Ḃ^{σ+2/ρ₁})}` against
/// `‖f₀‖_{Ḃ^σ} + μ^{1/ρ−1}‖g‖_{L̃^ρ(Ḃ^{σ−2+2/ρ})}` on the sample times.
pub fn check_smoothing_estimate(
    f0: &SpectralField,
    g: &dyn Forcing,
    setup: &SmoothingSetup,
    times: &[f64],
) -> Result<SmoothingReport, LpError> {
    let idx = setup.idx;
    idx.validate()?;
    let rho = idx.rho.unwrap_or(1.0);
    if !(setup.rho1 >= rho) {
        return Err(LpError::InvalidIndex("rho1 must be at least rho".into()));
    }
    if !(setup.mu > 0.0) {
        return Err(LpError::InvalidIndex("mu must be positive".into()));
    }
    let part = DyadicPartition::new(f0.grid());
    let (sol, gs) = duhamel_solve(f0, g, setup.mu, setup.u_disp, times)?;
    let inv = |x: f64| if x.is_infinite() { 0.0 } else { 1.0 / x };
    let lhs = setup.mu.powf(inv(setup.rho1))
        * chemin_lerner_norm(&part, times, &sol, idx.s + 2.0 * inv(setup.rho1), idx.p, idx.r, setup.rho1);
    let f0_norm = besov_norm_with(&part, f0, &BesovIndex { variant: Variant::Homogeneous, ..idx });
    let g_norm =
        chemin_lerner_norm(&part, times, &gs, idx.s - 2.0 + 2.0 * inv(rho), idx.p, idx.r, rho);
    let rhs = f0_norm + setup.mu.powf(inv(rho) - 1.0) * g_norm;
    let ratio = if rhs == 0.0 && lhs == 0.0 { 0.0 } else { lhs / rhs };
    Ok(SmoothingReport {
        lhs,
        rhs,
        ratio,
        ceiling: SMOOTHING_RATIO_CEILING,
        ceiling_calibrated: true,
        pass: ratio.is_finite() && ratio <= SMOOTHING_RATIO_CEILING,
    })
}

/// Discrete `Ḃ^{N/p−1}_{p,1}` norm of `P` plus that of each component of `Ω`.
pub fn smallness_monitor(state: &FieldState, p: f64) -> f64 {
    let part = DyadicPartition::new(state.grid());
    let idx = BesovIndex {
        s: state.grid().dim() as f64 / p - 1.0,
        p,
        r: 1.0,
        rho: None,
        variant: Variant::Homogeneous,
    };
    besov_norm_with(&part, &state.p, &idx)
        + state.omega.iter().map(|w| besov_norm_with(&part, w, &idx)).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn profile_supports() {
        for i in 0..2000 {
            let xi = i as f64 * 0.002;
            if xi <= INNER || xi >= OUTER {
                assert_eq!(phi(xi), 0.0, "phi({xi})");
            }
            if xi >= BALL {
                assert_eq!(chi(xi), 0.0);
            }
            assert!(phi(xi) >= 0.0 && phi(xi) <= 1.0);
        }
        assert_eq!(chi(0.5), 1.0);
    }

    #[test]
    fn partition_of_unity_on_grid() {
        let g = Grid::new(2, 32, 2.0 * PI).unwrap();
        let part = DyadicPartition::new(&g);
        for i in 1..g.len() {
            let k = g.k_abs(i);
            let hom: f64 = part.range(Variant::Homogeneous).map(|q| part.symbol(q, Variant::Homogeneous, k)).sum();
            let non: f64 =
                part.range(Variant::Nonhomogeneous).map(|q| part.symbol(q, Variant::Nonhomogeneous, k)).sum();
            assert!((hom - 1.0).abs() < 1e-12 && (non - 1.0).abs() < 1e-12, "k = {k}");
        }
    }

    #[test]
    fn out_of_range_block() {
        let g = Grid::new(1, 32, 2.0 * PI).unwrap();
        let f = SpectralField::from_real_fn(&g, |x, _| x.sin());
        let part = DyadicPartition::new(&g);
        assert!(matches!(
            part.block(&f, part.q_max + 1, Variant::Homogeneous),
            Err(LpError::OutOfRange { .. })
        ));
        assert!(part.block(&f, -1, Variant::Nonhomogeneous).is_ok());
    }

    #[test]
    fn single_mode_blocks() {
        let g = Grid::new(1, 64, 2.0 * PI).unwrap();
        let f = SpectralField::from_real_fn(&g, |x, _| (8.0 * x).cos());
        let b3 = dyadic_block(&f, 3, Variant::Homogeneous).unwrap();
        assert!((b3.l2_norm() - phi(1.0) * f.l2_norm()).abs() < 1e-12);
        assert!(dyadic_block(&f, 1, Variant::Homogeneous).unwrap().max_norm() < 1e-14);
        assert!(dyadic_block(&f, 5, Variant::Homogeneous).unwrap().max_norm() < 1e-14);
    }

    #[test]
    fn besov_zero_and_homogeneity() {
        let g = Grid::new(1, 32, 2.0 * PI).unwrap();
        let idx = BesovIndex::new(0.5, 2.0, 1.0).unwrap();
        assert_eq!(besov_norm(&SpectralField::zeros(&g), &idx), 0.0);
        let f = SpectralField::from_real_fn(&g, |x, _| x.sin() + (5.0 * x).cos());
        let a = besov_norm(&f, &idx);
        let b = besov_norm(&f.scale(C::new(-3.0, 0.0)), &idx);
        assert!((b - 3.0 * a).abs() < 1e-12 * a);
    }

    #[test]
    fn invalid_index() {
        assert!(BesovIndex::new(0.0, 0.5, 1.0).is_err());
        assert!(BesovIndex::new(f64::NAN, 2.0, 1.0).is_err());
        assert!(BesovIndex::new(0.0, f64::INFINITY, f64::INFINITY).is_ok());
    }

    #[test]
    fn single_mode_decay_is_exact() {
        let g = Grid::new(1, 64, 2.0 * PI).unwrap();
        let f = SpectralField::from_real_fn(&g, |x, _| (6.0 * x).sin());
        let t: Vec<f64> = (0..10).map(|j| j as f64 * 0.01).collect();
        let rep = check_semigroup_decay(&f, 2, 0.7, 0.0, 2.0, &t).unwrap();
        assert!((rep.fitted_rate - 36.0).abs() < 1e-8);
        let rep2 = check_semigroup_decay(&f, 2, 0.7, 3.0, 2.0, &t).unwrap();
        assert!((rep.fitted_rate - rep2.fitted_rate).abs() < 1e-10);
        assert!(rep.pass);
    }

    #[test]
    fn duhamel_constant_source() {
        // f' = -k² f + g with g = cos(kx) constant in time
        let g = Grid::new(1, 16, 2.0 * PI).unwrap();
        let src = crate::solver::FnForcing(|_t: f64, g: &Grid| {
            (SpectralField::from_real_fn(g, |x, _| (2.0 * x).cos()), vec![])
        });
        let times = [0.0, 0.1, 0.35];
        let (sol, _) = duhamel_solve(&SpectralField::zeros(&g), &src, 1.0, 0.0, &times).unwrap();
        let want = (1.0 - (-4.0f64 * 0.35).exp()) / 4.0;
        let got = sol[2].to_physical().as_slice()[0].re;
        assert!((got - want).abs() < 1e-14);
    }

    #[test]
    fn smoothing_zero_data() {
        let g = Grid::new(1, 16, 2.0 * PI).unwrap();
        let setup = SmoothingSetup {
            mu: 1.0,
            u_disp: 0.0,
            idx: BesovIndex::new(0.0, 2.0, 2.0).unwrap().with_rho(1.0).unwrap(),
            rho1: 2.0,
        };
        let rep = check_smoothing_estimate(&SpectralField::zeros(&g), &crate::solver::NoForcing, &setup, &[0.0, 1.0])
            .unwrap();
        assert_eq!(rep.ratio, 0.0);
        assert!(rep.pass);
    }
}
