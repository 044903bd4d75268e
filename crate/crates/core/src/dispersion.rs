//! Linearisation about plane waves, dispersion curves and spectral stability.
//!
//! In polar variables `π = (ρ, φ, h)` the linearised system reads
//! `π_t = A π_xx + B π_x + C π`, so a Fourier mode `e^{ikx}` evolves under the
//! matrix `M(k) = −k²A + ikB + C`. Its eigenvalues trace the curves `λ_j(k)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, CMat};
use crate::model::{PlaneWave, SystemParams};

type C = Complex64;


#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DispersionError {
    #[error("no spectrum samples to classify")]
    EmptySampleSet,
    #[error("invalid wavenumber grid: {0}")]
    InvalidGrid(String),
}

/// How the `κ∇|P|²` coupling enters the third row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingMode {
    /// No coupling: the `h` row only sees `h`.
    KappaZero,
    /// `−2r₀κ(r₀)` as a constant entry `C[3][1]`.
    ConstantCoupling,
    /// `−2r₀κ(r₀)` on the first-derivative term, `B[3][1]`.
    #[default]
    GradientCoupling,
}

/// Real 3×3 coefficient matrices of the linearised polar system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearizationMatrices {
    pub a: [[f64; 3]; 3],
    pub b: [[f64; 3]; 3],
    pub c: [[f64; 3]; 3],
    pub mode: CouplingMode,
}

/// `Γ = c₁θ₀² + r₀²v′(r₀) + 2r₀v(r₀)`.
pub fn gamma(params: &SystemParams, wave: &PlaneWave) -> f64 {
    let r0 = wave.r0;
    params.u.slope() * wave.theta0 * wave.theta0
        + r0 * r0 * params.v.slope()
        + 2.0 * r0 * params.v.eval(r0)
}

/// The matrices in the tabulated form (exact when `c₀ = 0` and `θ₀ = 0`).
pub fn build_matrices(params: &SystemParams, wave: &PlaneWave, mode: CouplingMode) -> LinearizationMatrices {
    let (r0, th, w0) = (wave.r0, wave.theta0, wave.w0);
    let c1 = params.u.slope();
    let u0 = params.u.eval(r0);
    let br = 2.0 * th * u0 + w0;
    let a = [[1.0, -r0 * u0, 0.0], [c1, 1.0, 0.0], [0.0, 0.0, params.m]];
    let mut b = [
        [-br, -2.0 * th * r0, -params.s1.eval(r0) * r0],
        [0.0, -br, -params.s2.eval(r0)],
        [0.0, 0.0, -w0],
    ];
    let mut c = [[-2.0 * r0 * r0, 0.0, 0.0], [-gamma(params, wave), 0.0, -th], [0.0; 3]];
    let coupling = -2.0 * r0 * params.kappa.eval(r0);
    match mode {
        CouplingMode::KappaZero => {}
        CouplingMode::ConstantCoupling => c[2][0] = coupling,
        CouplingMode::GradientCoupling => b[2][0] = coupling,
    }
    LinearizationMatrices { a, b, c, mode }
}

impl LinearizationMatrices {
    /// Linearisation of the polar equations for arbitrary `c₀`, `θ₀`, with the
    /// gradient coupling. Differs from [`build_matrices`] by `A[2][1] += c₀/r₀` and
    /// `B[2][1] += 2θ₀/r₀`.
    pub fn exact(params: &SystemParams, wave: &PlaneWave) -> Self {
        let mut m = build_matrices(params, wave, CouplingMode::GradientCoupling);
        if wave.r0 > 0.0 {
            m.a[1][0] += params.u.0 / wave.r0;
            m.b[1][0] += 2.0 * wave.theta0 / wave.r0;
        }
        m
    }

    /// `M(k) = −k²A + ikB + C`.
    pub fn symbol(&self, k: f64) -> CMat {
        let mut m = CMat::zeros(3);
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] = C::new(-k * k * self.a[i][j] + self.c[i][j], k * self.b[i][j]);
            }
        }
        m
    }
}

/// Eigenvalues at one wavenumber, sorted by descending real part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSample {
    pub k: f64,
    pub lambdas: [C; 3],
}

impl SpectrumSample {
    pub fn max_re(&self) -> f64 {
        self.lambdas[0].re
    }

    /// Largest `|det(M(k) − λI)|` over the three values, relative to the size of the
    /// characteristic polynomial's terms at `λ`.
    pub fn residual(&self, m: &LinearizationMatrices) -> f64 {
        let coeffs = linalg::char_poly3(&m.symbol(self.k));
        self.lambdas
            .iter()
            .map(|&l| {
                let scale: f64 = coeffs.iter().enumerate().map(|(j, c)| c.norm() * l.norm().powi(j as i32)).sum();
                linalg::poly_eval(&coeffs, l).norm() / scale.max(f64::MIN_POSITIVE)
            })
            .fold(0.0, f64::max)
    }
}

/// Sort by descending real part, near-ties by ascending imaginary part.
pub fn sort_lambdas(l: &mut [C]) {
    l.sort_by(|x, y| {
        let tol = 1e-12 * (1.0 + x.re.abs().max(y.re.abs()));
        if (x.re - y.re).abs() <= tol {
            x.im.total_cmp(&y.im)
        } else {
            y.re.total_cmp(&x.re)
        }
    });
}

/// Eigenvalues of `M(k)` by Hessenberg QR.
pub fn eigenvalues_at_k(m: &LinearizationMatrices, k: f64) -> SpectrumSample {
    let mut ev = linalg::eigenvalues(&m.symbol(k));
    sort_lambdas(&mut ev);
    SpectrumSample { k, lambdas: [ev[0], ev[1], ev[2]] }
}

/// Roots of `det(λI − M(k))` through the companion matrix of the characteristic
/// cubic; an independent route to the same values.
pub fn companion_eigenvalues(m: &LinearizationMatrices, k: f64) -> [C; 3] {
    let mut r = linalg::companion_roots(&linalg::char_poly3(&m.symbol(k)));
    sort_lambdas(&mut r);
    [r[0], r[1], r[2]]
}

/// Spectrum over a list of wavenumbers; order of the output follows `ks`.
pub fn spectrum(m: &LinearizationMatrices, ks: &[f64]) -> Vec<SpectrumSample> {
    ks.par_iter().map(|&k| eigenvalues_at_k(m, k)).collect()
}

/// `n` uniform samples on `[lo, hi]`, plus `k = 0` if it lies inside and is missing.
pub fn k_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, DispersionError> {
    if n < 2 || !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(DispersionError::InvalidGrid(format!("[{lo}, {hi}] with {n} samples")));
    }
    let mut ks: Vec<f64> = (0..n).map(|j| lo + (hi - lo) * j as f64 / (n - 1) as f64).collect();
    if lo <= 0.0 && hi >= 0.0 && !ks.contains(&0.0) {
        let pos = ks.partition_point(|&k| k < 0.0);
        ks.insert(pos, 0.0);
    }
    Ok(ks)
}

/// Default grid: 1024 samples on `[−16, 16]` plus `k = 0`.
pub fn default_k_grid() -> Vec<f64> {
    k_grid(-16.0, 16.0, 1024).expect("valid default grid")
}

/// Smallest over permutations of the largest pairwise distance.
pub fn match_error(a: &[C; 3], b: &[C; 3]) -> f64 {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    PERMS
        .iter()
        .map(|p| (0..3).map(|i| (a[i] - b[p[i]]).norm()).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min)
}

/// Tabulated radicand `a + ib` of the closed form for `λ₂,₃`.
pub fn radicand_tabulated(params: &SystemParams, wave: &PlaneWave, k: f64) -> (f64, f64) {
    let (r0, th) = (wave.r0, wave.theta0);
    let (c0, c1) = (params.u.0, params.u.1);
    let u0 = c0 + c1 * r0;
    let bracket = c0 * th * th + r0 * r0 * params.v.slope() + 2.0 * r0 * params.v.eval(r0);
    let a = r0.powi(4) - c1 * r0 * u0 * k.powi(4) + r0 * bracket * k;
    let b = 2.0 * r0 * th * c1 * k.powi(3);
    (a, b)
}

/// Radicand `r₀⁴ + M₁₂M₂₁` of the 2×2 `(ρ, φ)` block of the tabulated matrices.
pub fn radicand_exact(params: &SystemParams, wave: &PlaneWave, k: f64) -> C {
    let m = build_matrices(params, wave, CouplingMode::KappaZero).symbol(k);
    C::new(wave.r0.powi(4), 0.0) + m[(0, 1)] * m[(1, 0)]
}

fn closed_form_with(params: &SystemParams, wave: &PlaneWave, k: f64, radicand: C) -> [C; 3] {
    let r0 = wave.r0;
    let br = wave.w0 + 2.0 * wave.theta0 * params.u.eval(r0);
    let l1 = C::new(-k * k * params.m, -wave.w0 * k);
    let centre = -C::new(r0 * r0 + k * k, br * k);
    let root = radicand.sqrt();
    let mut l = [l1, centre + root, centre - root];
    sort_lambdas(&mut l);
    l
}

/// `λ₁ = −k²m − ikw₀`, `λ₂,₃ = −[r₀² + k² + ik(w₀ + 2θ₀u(r₀))] ± √(a + ib)` with the
/// tabulated radicand (principal square root). Valid for the uncoupled (`κ = 0`)
/// matrices only where the tabulated radicand is exact; see [`closed_form_discrepancy`].
pub fn closed_form_lambda(params: &SystemParams, wave: &PlaneWave, k: f64) -> [C; 3] {
    let (a, b) = radicand_tabulated(params, wave, k);
    closed_form_with(params, wave, k, C::new(a, b))
}

/// The same closed form with the radicand recomputed from the matrices.
pub fn closed_form_lambda_exact(params: &SystemParams, wave: &PlaneWave, k: f64) -> [C; 3] {
    closed_form_with(params, wave, k, radicand_exact(params, wave, k))
}

/// Real parts `−(r₀² + k²) ± ([√(a² + b²) + a]/2)^{1/2}` of `λ₂,₃`.
pub fn closed_form_real_parts(a: f64, b: f64, r0: f64, k: f64) -> (f64, f64) {
    let s = (((a * a + b * b).sqrt() + a) / 2.0).max(0.0).sqrt();
    let base = -(r0 * r0 + k * k);
    (base + s, base - s)
}

/// Agreement of the tabulated closed form with the numerical eigenvalues of the
/// uncoupled matrices on one parameter slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub max_abs_err: f64,
    pub worst_k: f64,
    /// Same comparison with the exact radicand.
    pub exact_max_abs_err: f64,
    pub tolerance: f64,
    pub agrees: bool,
}

pub fn closed_form_discrepancy(
    params: &SystemParams,
    wave: &PlaneWave,
    ks: &[f64],
    tolerance: f64,
) -> DiscrepancyReport {
    let m = build_matrices(params, wave, CouplingMode::KappaZero);
    let mut worst = (0.0, 0.0);
    let mut red = 0.0f64;
    for &k in ks {
        let num = eigenvalues_at_k(&m, k).lambdas;
        let e = match_error(&closed_form_lambda(params, wave, k), &num);
        if e > worst.0 {
            worst = (e, k);
        }
        red = red.max(match_error(&closed_form_lambda_exact(params, wave, k), &num));
    }
    DiscrepancyReport {
        max_abs_err: worst.0,
        worst_k: worst.1,
        exact_max_abs_err: red,
        tolerance,
        agrees: worst.0 <= tolerance,
    }
}

/// The two parameter slices with closed-form cubic roots: `r₀ = m = 1`, `θ₀ = v = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoupledSlice {
    /// `u ≡ 1`, `κ = 1/2`.
    UnitDispersion,
    /// `u ≡ 0`, `κ = 1`.
    NoDispersion,
}

impl CoupledSlice {
    pub fn params(&self, s1: f64, s2: f64) -> SystemParams {
        use crate::model::Affine;
        let (u, kappa) = match self {
            CoupledSlice::UnitDispersion => (1.0, 0.5),
            CoupledSlice::NoDispersion => (0.0, 1.0),
        };
        SystemParams {
            u: Affine::constant(u),
            v: Affine::ZERO,
            xi: 1.0,
            m: 1.0,
            kappa: Affine::constant(kappa),
            s1: Affine::constant(s1),
            s2: Affine::constant(s2),
        }
    }

    pub fn wave(&self, w0: f64) -> PlaneWave {
        PlaneWave { r0: 1.0, theta0: 0.0, w0 }
    }
}

/// Closed-form eigenvalues on a [`CoupledSlice`] with constant coupling
/// (`CouplingMode::ConstantCoupling`).
///
/// With `μ = λ + k² + ikw₀` the unit-dispersion slice gives
/// `μ³ + 2μ² − iks₁μ − ik³s₂ = 0`, solved by Cardano with `Δ₀ = 4 + 3iks₁`,
/// `a = −16 + i(27k³s₂ − 18ks₁)`, `Y = ((a + √(a² − 4Δ₀³))/2)^{1/3}` and
/// `μ = −2/3 + ζY/3 + Δ₀/(3ζY)` over the cube roots of unity `ζ`. The other slice
/// factors as `μ(μ² + 2μ − 2iks₁) = 0`.
pub fn coupled_slice_closed_form(slice: CoupledSlice, k: f64, s1: f64, s2: f64, w0: f64) -> [C; 3] {
    let shift = C::new(k * k, k * w0);
    let mut l = match slice {
        CoupledSlice::UnitDispersion => {
            let (a, d0) = cardano_terms(k, s1, s2);
            let y = cardano_y(a, d0);
            let zetas = [C::new(1.0, 0.0), C::new(-0.5, 0.75f64.sqrt()), C::new(-0.5, -(0.75f64.sqrt()))];
            zetas.map(|z| {
                let zy = z * y;
                let mu = if zy.norm() == 0.0 {
                    C::new(-2.0 / 3.0, 0.0)
                } else {
                    C::new(-2.0 / 3.0, 0.0) + zy / 3.0 + d0 / (3.0 * zy)
                };
                mu - shift
            })
        }
        CoupledSlice::NoDispersion => {
            let root = C::new(1.0, 2.0 * k * s1).sqrt();
            [-shift, C::new(-1.0, 0.0) - root - shift, C::new(-1.0, 0.0) + root - shift]
        }
    };
    sort_lambdas(&mut l);
    l
}

fn cardano_terms(k: f64, s1: f64, s2: f64) -> (C, C) {
    let a = C::new(-16.0, 27.0 * k.powi(3) * s2 - 18.0 * k * s1);
    let d0 = C::new(4.0, 3.0 * k * s1);
    (a, d0)
}

fn cardano_y(a: C, d0: C) -> C {
    let x = a + (a * a - 4.0 * d0 * d0 * d0).sqrt();
    (x / 2.0).powf(1.0 / 3.0)
}

/// First Cardano root exactly as tabulated for the unit-dispersion slice, i.e.
/// without the `X^{1/3}/(3·2^{1/3})` term.
pub fn coupled_slice_tabulated_lambda1(k: f64, s1: f64, s2: f64, w0: f64) -> C {
    let (a, d0) = cardano_terms(k, s1, s2);
    let x = a + (a * a - 4.0 * d0 * d0 * d0).sqrt();
    -C::new(2.0 + 3.0 * k * k, 3.0 * k * w0) / 3.0 + 2f64.cbrt() * d0 / (3.0 * x.powf(1.0 / 3.0))
}

/// The three sufficient conditions `k²m > 0`, `2(r₀² + k²)² ≥ a` and
/// `4(r₀² + k²)⁴ − 4a(r₀² + k²)² > b²` for `Re λ(k) < 0`.
pub fn stability_conditions(a: f64, b: f64, r0: f64, k: f64, m: f64) -> [bool; 3] {
    let s = r0 * r0 + k * k;
    [k * k * m > 0.0, 2.0 * s * s >= a, 4.0 * s.powi(4) - 4.0 * a * s * s > b * b]
}

/// Largest real part of the closed form at `k`, from `a`, `b` and `m`.
pub fn closed_form_max_re(a: f64, b: f64, r0: f64, k: f64, m: f64) -> f64 {
    let (hi, _) = closed_form_real_parts(a, b, r0, k);
    hi.max(-k * k * m)
}

/// Outcome of [`classify_spectrum`].
#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    /// `Re λ ≤ −C(Im λ)²` at every sample; `c` is `None` when no sample has a
    /// nonzero imaginary part (the parabola is unconstrained).
    SpectrallyStable { c: Option<f64> },
    /// Growth at some `k ≠ 0`.
    Unstable {
        /// Maximal runs of consecutive samples with positive growth, as `[k_lo, k_hi]`.
        band: Vec<(f64, f64)>,
        /// Infimum of the positive real parts.
        omega_plus: f64,
        max_re: f64,
        k_at_max: f64,
    },
    /// `sup_{k≠0} Re λ` within tolerance of zero.
    Marginal { sup_re: f64 },
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::SpectrallyStable { .. } => "stable",
            Verdict::Unstable { .. } => "unstable",
            Verdict::Marginal { .. } => "marginal",
        }
    }

    pub fn is_stable(&self) -> bool {
        matches!(self, Verdict::SpectrallyStable { .. })
    }

    pub fn to_json(&self) -> serde_json::Value {
        use serde_json::json;
        match self {
            Verdict::SpectrallyStable { c } => {
                json!({"verdict": self.name(), "C": c, "omega_plus": null, "unstable_band": []})
            }
            Verdict::Unstable { band, omega_plus, .. } => json!({
                "verdict": self.name(),
                "C": null,
                "omega_plus": omega_plus,
                "unstable_band": band.iter().map(|(a, b)| [a, b]).collect::<Vec<_>>(),
            }),
            Verdict::Marginal { .. } => {
                json!({"verdict": self.name(), "C": null, "omega_plus": null, "unstable_band": []})
            }
        }
    }
}

/// Tolerance on real parts used by [`classify_spectrum`].
pub const CLASSIFY_TOL: f64 = 1e-10;

pub fn classify_spectrum(samples: &[SpectrumSample]) -> Result<Verdict, DispersionError> {
    classify_spectrum_with(samples, CLASSIFY_TOL)
}

pub fn classify_spectrum_with(samples: &[SpectrumSample], tol: f64) -> Result<Verdict, DispersionError> {
    let nonzero: Vec<&SpectrumSample> = samples.iter().filter(|s| s.k != 0.0).collect();
    if nonzero.is_empty() {
        return Err(DispersionError::EmptySampleSet);
    }
    let (sup_re, k_at_max) = nonzero
        .iter()
        .map(|s| (s.max_re(), s.k))
        .fold((f64::NEG_INFINITY, 0.0), |acc, x| if x.0 > acc.0 { x } else { acc });

    if sup_re > tol {
        let mut sorted: Vec<&SpectrumSample> = samples.iter().collect();
        sorted.sort_by(|a, b| a.k.total_cmp(&b.k));
        let mut band = Vec::new();
        let mut open: Option<(f64, f64)> = None;
        for s in &sorted {
            if s.max_re() > tol {
                open = Some(match open {
                    Some((lo, _)) => (lo, s.k),
                    None => (s.k, s.k),
                });
            } else if let Some(iv) = open.take() {
                band.push(iv);
            }
        }
        band.extend(open);
        let omega_plus = samples
            .iter()
            .flat_map(|s| s.lambdas.iter())
            .map(|l| l.re)
            .filter(|&r| r > tol)
            .fold(f64::INFINITY, f64::min);
        return Ok(Verdict::Unstable { band, omega_plus, max_re: sup_re, k_at_max });
    }
    if sup_re >= -tol {
        return Ok(Verdict::Marginal { sup_re });
    }
    let c = samples
        .iter()
        .flat_map(|s| s.lambdas.iter())
        .filter(|l| l.im.abs() > tol)
        .map(|l| -l.re / (l.im * l.im))
        .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.min(x))));
    Ok(Verdict::SpectrallyStable { c })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Affine;

    fn case1(m: f64, w0: f64) -> (SystemParams, PlaneWave) {
        let p = SystemParams { m, ..Default::default() };
        (p, PlaneWave { r0: 1.0, theta0: 0.0, w0 })
    }

    #[test]
    fn case1_matrices() {
        let (mut p, w) = case1(1.0, 0.3);
        p.s1 = Affine::constant(0.2);
        p.s2 = Affine::constant(-0.4);
        let m = build_matrices(&p, &w, CouplingMode::KappaZero);
        assert_eq!(m.a, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        assert_eq!(m.b, [[-0.3, 0.0, -0.2], [0.0, -0.3, 0.4], [0.0, 0.0, -0.3]]);
        assert_eq!(m.c, [[-2.0, 0.0, 0.0], [0.0; 3], [0.0; 3]]);
        let p = SystemParams { kappa: Affine::constant(1.0), ..p };
        assert_eq!(build_matrices(&p, &w, CouplingMode::ConstantCoupling).c[2][0], -2.0);
        assert_eq!(build_matrices(&p, &w, CouplingMode::GradientCoupling).b[2][0], -2.0);
    }

    #[test]
    fn case1_eigenvalues() {
        let (p, w) = case1(1.0, 0.0);
        let m = build_matrices(&p, &w, CouplingMode::KappaZero);
        let s = eigenvalues_at_k(&m, 1.0);
        let want = [C::new(-1.0, 0.0), C::new(-1.0, 0.0), C::new(-3.0, 0.0)];
        assert!(match_error(&s.lambdas, &want) < 1e-12);
        let s0 = eigenvalues_at_k(&m, 0.0);
        assert!(match_error(&s0.lambdas, &[C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(-2.0, 0.0)]) < 1e-12);
    }

    #[test]
    fn conjugate_symmetry() {
        let p = SystemParams {
            u: Affine(0.3, -0.2),
            v: Affine(0.1, 0.5),
            kappa: Affine::constant(0.4),
            s1: Affine::constant(0.7),
            s2: Affine::constant(-0.3),
            ..Default::default()
        };
        let w = PlaneWave { r0: 0.8, theta0: 0.6, w0: 0.25 };
        let m = build_matrices(&p, &w, CouplingMode::GradientCoupling);
        let a = eigenvalues_at_k(&m, 1.7).lambdas.map(|z| z.conj());
        let b = eigenvalues_at_k(&m, -1.7).lambdas;
        assert!(match_error(&a, &b) < 1e-12);
    }

    #[test]
    fn classify_case1() {
        let (p, w) = case1(0.5, 2.0);
        let m = build_matrices(&p, &w, CouplingMode::KappaZero);
        let v = classify_spectrum(&spectrum(&m, &default_k_grid())).unwrap();
        match v {
            Verdict::SpectrallyStable { c: Some(c) } => assert!((c - 0.5 / 4.0).abs() < 1e-12, "{c}"),
            other => panic!("{other:?}"),
        }
        let (p, w) = case1(1.0, 0.0);
        let v = classify_spectrum(&spectrum(&build_matrices(&p, &w, CouplingMode::KappaZero), &default_k_grid()))
            .unwrap();
        assert_eq!(v, Verdict::SpectrallyStable { c: None });
    }

    #[test]
    fn classify_negative_m() {
        let (p, w) = case1(-1.0, 0.0);
        let ks = default_k_grid();
        let v = classify_spectrum(&spectrum(&build_matrices(&p, &w, CouplingMode::KappaZero), &ks)).unwrap();
        match v {
            Verdict::Unstable { band, k_at_max, .. } => {
                assert_eq!(k_at_max.abs(), 16.0);
                assert_eq!(band.len(), 2);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(classify_spectrum(&[]), Err(DispersionError::EmptySampleSet));
    }

    #[test]
    fn coupled_slice_special_cases() {
        for &(s1, s2) in &[(0.0, 0.0), (1.0, 0.0), (-1.0, 0.0), (0.3, 0.7)] {
            let slice = CoupledSlice::UnitDispersion;
            let m = build_matrices(&slice.params(s1, s2), &slice.wave(0.4), CouplingMode::ConstantCoupling);
            for k in [-3.0, -0.5, 0.25, 2.0] {
                let got = coupled_slice_closed_form(slice, k, s1, s2, 0.4);
                assert!(match_error(&got, &eigenvalues_at_k(&m, k).lambdas) < 1e-9, "s1={s1} s2={s2} k={k}");
            }
        }
    }

    #[test]
    fn stability_predicate_examples() {
        assert_eq!(stability_conditions(1.0, 0.0, 1.0, 0.5, 1.0), [true, true, true]);
        assert!(!stability_conditions(1.0, 0.0, 1.0, 0.5, -1.0)[0]);
        let k = 0.5;
        let a = 2.0 * (1.0 + k * k) * (1.0f64 + k * k) + 1.0;
        assert!(!stability_conditions(a, 0.0, 1.0, k, 1.0)[1]);
        assert!(closed_form_real_parts(a, 0.0, 1.0, k).0 >= 0.0);
    }

    #[test]
    fn k_grid_contains_zero() {
        let ks = default_k_grid();
        assert_eq!(ks.len(), 1025);
        assert!(ks.contains(&0.0));
        assert!(ks.windows(2).all(|w| w[0] < w[1]));
        assert!(k_grid(1.0, 0.0, 4).is_err());
    }
}
