use cglb::model::Affine;
use cglb::perturbation::{self as pert, PerturbationState};
use cglb::solver::{self, NoForcing};
use cglb::{Complex64 as C, FieldState, Grid, PlaneWave, SolverConfig, SpectralField, SystemParams};
use std::f64::consts::PI;

#[test]
fn small_mode_follows_the_linear_rate() {
    let grid = Grid::new(1, 64, 2.0 * PI).unwrap();
    let eps = 1e-8;
    for (k, u) in [(1i64, 0.0), (2, 0.7), (3, -1.3)] {
        let params = SystemParams { u: Affine::constant(u), v: Affine::constant(0.4), ..Default::default() };
        let p = SpectralField::from_fn(&grid, |x, _| C::from_polar(eps, k as f64 * x));
        let st = FieldState::new(p, vec![SpectralField::zeros(&grid)], 0.0).unwrap();
        let t = 0.5;
        let cfg = SolverConfig { dt: 2.5e-4, t_end: t, cadence: 100, ..Default::default() };
        let end = solver::evolve(&st, &params, &NoForcing, &cfg, &mut []).unwrap().final_state;
        let got = end.p.coefficients()[grid.index_of_mode(k, 0)];
        let kk = (k * k) as f64;
        let want = eps * C::new(1.0 - kk, -u * kk).scale(t).exp();
        assert!((got - want).norm() <= 1e-6 * want.norm(), "k {k}: {got} vs {want}");
    }
}

#[test]
fn polar_evolution_matches_the_full_system() {
    let grid = Grid::new(1, 64, 2.0 * PI).unwrap();
    let params = SystemParams {
        u: Affine::constant(0.3),
        v: Affine::constant(-0.3),
        m: 0.5,
        kappa: Affine::constant(0.2),
        s1: Affine::constant(0.1),
        s2: Affine::constant(-0.1),
        ..Default::default()
    };
    let wave = PlaneWave { r0: 1.0, theta0: 0.0, w0: 0.2 };
    let pi0 = PerturbationState::from_fns(
        &grid,
        |x| 1e-3 * x.cos(),
        |x| 2e-3 * (2.0 * x).sin(),
        |x| -1e-3 * x.sin(),
    )
    .unwrap();
    let cfg = SolverConfig { dt: 5e-4, t_end: 0.5, cadence: 100, cfl_limit: None, ..Default::default() };

    let polar = pert::evolve_polar(&pi0, &params, &wave, &cfg).unwrap();
    assert!(polar.stopped.is_none());
    let full0 = pert::compose(&pi0, &wave).unwrap();
    let full = solver::evolve(&full0, &params, &NoForcing, &cfg, &mut []).unwrap().final_state;
    let back = pert::decompose(&full, &wave).unwrap();

    let scale = polar.final_state.l2_norm();
    let mut diff = 0.0f64;
    for (a, b) in back.components().iter().zip(polar.final_state.components()) {
        diff = diff.max(a.sub(b).unwrap().l2_norm());
    }
    assert!(diff <= 1e-4 * scale, "diff {diff:.3e}, scale {scale:.3e}");
}
