use cglb::model::Affine;
use cglb::perturbation::{remainder, PerturbationState};
use cglb::{Grid, PlaneWave, SystemParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn random_state(grid: &Grid, rng: &mut ChaCha8Rng, amp: f64) -> PerturbationState {
    let mut c = || -> [f64; 6] { std::array::from_fn(|_| rng.gen_range(-1.0..1.0)) };
    let (a, b, h) = (c(), c(), c());
    let f = move |w: [f64; 6]| move |x: f64| amp * (w[0] * x.cos() + w[1] * x.sin() + w[2] * (2.0 * x).cos() + w[3] * (2.0 * x).sin() + w[4] * (3.0 * x).cos() + w[5] * (3.0 * x).sin());
    PerturbationState::from_fns(grid, f(a), f(b), f(h)).unwrap()
}

fn add(a: &PerturbationState, b: &PerturbationState, s: f64) -> PerturbationState {
    let [ar, ap, ah] = a.components();
    let [br, bp, bh] = b.components();
    let f = |x: &cglb::SpectralField, y: &cglb::SpectralField| x.add(&y.scale(s.into())).unwrap();
    PerturbationState::new(f(ar, br), f(ap, bp), f(ah, bh)).unwrap()
}

/// Central difference of `ψ` at `π` along `η`.
fn dpsi(pi: &PerturbationState, eta: &PerturbationState, params: &SystemParams, wave: &PlaneWave) -> [Vec<f64>; 3] {
    let h = 1e-5;
    let plus = remainder(&add(pi, eta, h), params, wave);
    let minus = remainder(&add(pi, eta, -h), params, wave);
    let d = |a: &cglb::SpectralField, b: &cglb::SpectralField| {
        a.real_values().iter().zip(b.real_values()).map(|(x, y)| (x - y) / (2.0 * h)).collect()
    };
    [d(&plus.psi1, &minus.psi1), d(&plus.psi2, &minus.psi2), d(&plus.psi3, &minus.psi3)]
}

fn dist(a: &[Vec<f64>; 3], b: &[Vec<f64>; 3]) -> f64 {
    let n = a[0].len() as f64;
    a.iter().zip(b).flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).powi(2))).sum::<f64>().sqrt() / n.sqrt()
}

#[test]
fn derivative_of_remainder_is_locally_lipschitz() {
    let grid = Grid::new(1, 64, 2.0 * PI).unwrap();
    let params = SystemParams {
        u: Affine(0.0, 0.5),
        kappa: Affine::constant(0.3),
        s1: Affine::constant(0.2),
        s2: Affine::constant(-0.1),
        ..Default::default()
    };
    let wave = PlaneWave { r0: 1.0, theta0: 0.0, w0: 0.4 };
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..5 {
        let pi1 = random_state(&grid, &mut rng, 0.05);
        let dir = random_state(&grid, &mut rng, 1.0);
        let eta = random_state(&grid, &mut rng, 1.0);
        let base = dpsi(&pi1, &eta, &params, &wave);
        let ratios: Vec<f64> = [1e-1, 1e-2]
            .iter()
            .map(|&d| {
                let pi2 = add(&pi1, &dir, d);
                dist(&dpsi(&pi2, &eta, &params, &wave), &base) / (d * dir.l2_norm())
            })
            .collect();
        assert!(ratios.iter().all(|r| r.is_finite() && *r > 0.0));
        assert!((ratios[0] / ratios[1] - 1.0).abs() < 0.3, "{ratios:?}");
    }
}
