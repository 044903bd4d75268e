//! Coefficients of the coupled system and its plane-wave equilibria.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg;

/// Residual tolerance for the plane-wave constraint equations.
pub const PLANE_WAVE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("no real plane wave: the constraint system has no root with 0 <= r0 <= 1")]
    NoRealSolution,
    #[error("plane waves form a one-parameter family r0^2 + theta0^2 = 1; pick a branch")]
    AmbiguousFamily,
    #[error("branch {requested} requested but only {available} isolated plane waves exist")]
    NoSuchBranch { requested: usize, available: usize },
    #[error("invalid plane wave: {0}")]
    InvalidPlaneWave(String),
}

/// Coefficient affine in the local amplitude: `c₀ + c₁·r`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Affine(pub f64, pub f64);

impl Affine {
    pub const ZERO: Affine = Affine(0.0, 0.0);

    pub fn constant(c: f64) -> Self {
        Affine(c, 0.0)
    }

    pub fn eval(&self, r: f64) -> f64 {
        eval_coeff(*self, r)
    }

    pub fn slope(&self) -> f64 {
        self.1
    }

    pub fn is_constant(&self) -> bool {
        self.1 == 0.0
    }
}

/// `c₀ + c₁·r`.
pub fn eval_coeff(coeffs: Affine, r: f64) -> f64 {
    coeffs.0 + coeffs.1 * r
}

/// All PDE coefficients. `u`, `v`, `κ`, `s₁`, `s₂` may depend affinely on the local
/// amplitude `r = |P|`; `r₁ = s₁ + i·s₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemParams {
    pub u: Affine,
    pub v: Affine,
    pub xi: f64,
    pub m: f64,
    pub kappa: Affine,
    pub s1: Affine,
    pub s2: Affine,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            u: Affine::ZERO,
            v: Affine::ZERO,
            xi: 1.0,
            m: 1.0,
            kappa: Affine::ZERO,
            s1: Affine::ZERO,
            s2: Affine::ZERO,
        }
    }
}

impl SystemParams {
    /// `r₁(r) = s₁(r) + i·s₂(r)`.
    pub fn r1(&self, r: f64) -> Complex64 {
        Complex64::new(self.s1.eval(r), self.s2.eval(r))
    }

    /// Parameters with every coefficient frozen at amplitude `r`.
    pub fn frozen_at(&self, r: f64) -> Self {
        let f = |a: Affine| Affine::constant(a.eval(r));
        Self {
            u: f(self.u),
            v: f(self.v),
            kappa: f(self.kappa),
            s1: f(self.s1),
            s2: f(self.s2),
            ..*self
        }
    }

    pub fn is_constant(&self) -> bool {
        [self.u, self.v, self.kappa, self.s1, self.s2].iter().all(Affine::is_constant)
    }

    pub fn is_finite(&self) -> bool {
        [self.u, self.v, self.kappa, self.s1, self.s2]
            .iter()
            .all(|a| a.0.is_finite() && a.1.is_finite())
            && self.xi.is_finite()
            && self.m.is_finite()
    }
}

/// Plane-wave equilibrium `P = r₀ e^{iθ₀x}`, `Ω = w₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneWave {
    pub r0: f64,
    pub theta0: f64,
    pub w0: f64,
}

impl PlaneWave {
    /// Validated constructor: checks both constraint equations.
    pub fn new(params: &SystemParams, r0: f64, theta0: f64, w0: f64) -> Result<Self, ModelError> {
        let wave = Self { r0, theta0, w0 };
        if r0 < 0.0 || !r0.is_finite() || !theta0.is_finite() || !w0.is_finite() {
            return Err(ModelError::InvalidPlaneWave(format!("bad values {wave:?}")));
        }
        let (res1, res2) = wave.residuals(params);
        if res1.abs() > PLANE_WAVE_TOL || res2.abs() > PLANE_WAVE_TOL {
            return Err(ModelError::InvalidPlaneWave(format!(
                "constraint residuals ({res1:e}, {res2:e}) exceed {PLANE_WAVE_TOL:e}"
            )));
        }
        Ok(wave)
    }

    /// `(r₀² + θ₀² − 1, u(r₀)θ₀² + v(r₀)r₀²)`.
    pub fn residuals(&self, params: &SystemParams) -> (f64, f64) {
        let r = self.r0;
        let t2 = self.theta0 * self.theta0;
        (r * r + t2 - 1.0, params.u.eval(r) * t2 + params.v.eval(r) * r * r)
    }

    /// Residual of the drift compatibility `w₀θ₀ + u(r₀)θ₀² = 0`.
    pub fn compatibility_residual(&self, params: &SystemParams) -> f64 {
        self.w0 * self.theta0 + params.u.eval(self.r0) * self.theta0 * self.theta0
    }

    /// Residual of the stationarity condition of the phase equation of the full
    /// system, `w₀θ₀ + u(r₀)θ₀² + v(r₀)r₀²`. A plane wave is a time-independent
    /// solution of the full system exactly when this and the amplitude constraint
    /// vanish.
    pub fn stationarity_residual(&self, params: &SystemParams) -> f64 {
        self.compatibility_residual(params) + params.v.eval(self.r0) * self.r0 * self.r0
    }
}

/// Branch selector for [`solve_plane_wave`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Branch {
    /// Largest admissible isolated root; `(r₀, θ₀) = (1, 0)` on a family.
    #[default]
    Default,
    /// Index into the isolated roots sorted by ascending `r₀`.
    Root(usize),
    /// Representative with the given amplitude on a family.
    FamilyAmplitude(f64),
    /// Refuse to pick on a family: report [`ModelError::AmbiguousFamily`].
    Strict,
}

/// How `w₀` is fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriftMode {
    /// `w₀` is the given value.
    Free(f64),
    /// Solve `w₀θ₀ = −u(r₀)θ₀²`; when `θ₀ = 0` the given fallback is used.
    Compatible { fallback: f64 },
}

/// Set of solutions to the plane-wave constraints.
#[derive(Debug, Clone, PartialEq)]
pub enum PlaneWaveSet {
    /// Isolated amplitudes `r₀ ∈ [0, 1]`, ascending.
    Isolated(Vec<f64>),
    /// Every `r₀ ∈ [0, 1]` works (`u ≡ v ≡ 0` on the unit circle).
    Family,
}

/// Enumerate amplitudes solving `u(r)(1 − r²) + v(r)r² = 0` on `[0, 1]`.
///
/// With affine `u`, `v` this is the cubic
/// `(v₁ − u₁)r³ + (v₀ − u₀)r² + u₁r + u₀ = 0`, solved through its companion matrix.
pub fn plane_wave_amplitudes(params: &SystemParams) -> PlaneWaveSet {
    let (u0, u1) = (params.u.0, params.u.1);
    let (v0, v1) = (params.v.0, params.v.1);
    let coeffs = [u0, u1, v0 - u0, v1 - u1];
    let scale = coeffs.iter().map(|c| c.abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return PlaneWaveSet::Family;
    }
    let deg = coeffs.iter().rposition(|c| c.abs() > 1e-14 * scale).unwrap_or(0);
    if deg == 0 {
        return PlaneWaveSet::Isolated(Vec::new());
    }
    let cc: Vec<Complex64> = coeffs[..=deg].iter().map(|&c| Complex64::new(c, 0.0)).collect();
    let mut roots: Vec<f64> = linalg::companion_roots(&cc)
        .into_iter()
        .filter(|z| z.im.abs() <= 1e-8 * (1.0 + z.norm()))
        .map(|z| polish_real_root(&coeffs[..=deg], z.re))
        .filter(|&r| (-1e-12..=1.0 + 1e-12).contains(&r))
        .map(|r| r.clamp(0.0, 1.0))
        .collect();
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-10);
    PlaneWaveSet::Isolated(roots)
}

fn polish_real_root(coeffs: &[f64], mut r: f64) -> f64 {
    let eval = |x: f64| coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c);
    let deriv = |x: f64| {
        coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (i, c)| acc * x + i as f64 * c)
    };
    for _ in 0..4 {
        let d = deriv(r);
        if d == 0.0 {
            break;
        }
        let cand = r - eval(r) / d;
        if eval(cand).abs() < eval(r).abs() {
            r = cand;
        } else {
            break;
        }
    }
    r
}

/// Solve the plane-wave constraints `r₀² + θ₀² = 1`, `u(r₀)θ₀² + v(r₀)r₀² = 0`.
///
/// `θ₀` is returned nonnegative.
pub fn solve_plane_wave(
    params: &SystemParams,
    branch: Branch,
    drift: DriftMode,
) -> Result<PlaneWave, ModelError> {
    let r0 = match (plane_wave_amplitudes(params), branch) {
        (PlaneWaveSet::Family, Branch::Strict) => return Err(ModelError::AmbiguousFamily),
        (PlaneWaveSet::Family, Branch::FamilyAmplitude(r)) => {
            if !(0.0..=1.0).contains(&r) {
                return Err(ModelError::InvalidPlaneWave(format!("amplitude {r} outside [0, 1]")));
            }
            r
        }
        (PlaneWaveSet::Family, _) => 1.0,
        (PlaneWaveSet::Isolated(roots), _) if roots.is_empty() => {
            return Err(ModelError::NoRealSolution)
        }
        (PlaneWaveSet::Isolated(roots), Branch::Root(i)) => *roots
            .get(i)
            .ok_or(ModelError::NoSuchBranch { requested: i, available: roots.len() })?,
        (PlaneWaveSet::Isolated(roots), _) => *roots.last().unwrap(),
    };
    let theta0 = (1.0 - r0 * r0).max(0.0).sqrt();
    let w0 = match drift {
        DriftMode::Free(w) => w,
        DriftMode::Compatible { fallback } => {
            if theta0 == 0.0 {
                fallback
            } else {
                -params.u.eval(r0) * theta0
            }
        }
    };
    let wave = PlaneWave { r0, theta0, w0 };
    let (a, b) = wave.residuals(params);
    if a.abs() > PLANE_WAVE_TOL || b.abs() > PLANE_WAVE_TOL {
        return Err(ModelError::InvalidPlaneWave(format!(
            "root polishing left residuals ({a:e}, {b:e})"
        )));
    }
    Ok(wave)
}
