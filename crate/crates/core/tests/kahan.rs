//! Kahan stepping and cubic polarization against independent oracles.

use faer::Mat;
use ligep::kahan::{
    kahan_step, polarize_quadratic, Bilinear, CubicHamiltonian, LinearKahan, QuadraticOde, TensorBilinear,
    ZeroBilinear,
};
use ligep::linalg::matvec;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn random_tensor(rng: &mut ChaCha8Rng, n: usize) -> TensorBilinear {
    let raw: Vec<f64> = random_vec(rng, n * n * n);
    TensorBilinear::from_data(n, raw).symmetrized()
}

fn random_hamiltonian(seed: u64, n: usize) -> (CubicHamiltonian, Vec<f64>, Mat<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw = random_vec(&mut rng, n * n * n);
    let b0 = Mat::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let b = Mat::from_fn(n, n, |i, j| 0.5 * (b0[(i, j)] + b0[(j, i)]));
    let c = random_vec(&mut rng, n);
    let h = CubicHamiltonian::new(n, |i, j, k| raw[i + n * (j + n * k)], b.clone(), c, 0.25).unwrap();
    (h, raw, b)
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn polarized_energy_on_the_diagonal(seed in 0u64..1000, z in prop::collection::vec(-2.0f64..2.0, 4)) {
        let (h, raw, b) = random_hamiltonian(seed, 4);
        let n = 4;
        let mut direct = 0.25;
        for i in 0..n {
            for j in 0..n {
                direct += b[(i, j)] * z[i] * z[j];
                for k in 0..n {
                    direct += raw[i + n * (j + n * k)] * z[i] * z[j] * z[k];
                }
            }
            direct += h.linear()[i] * z[i];
        }
        let s = h.energy(&z).unwrap();
        prop_assert!((s - direct).abs() <= 1e-12 * direct.abs().max(1.0));
    }

    #[test]
    fn polarized_energy_is_symmetric(seed in 0u64..1000) {
        let (h, _, _) = random_hamiltonian(seed, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 1);
        let (x, y, z) = (random_vec(&mut rng, 5), random_vec(&mut rng, 5), random_vec(&mut rng, 5));
        let base = h.polarized(&x, &y, &z).unwrap();
        for (a, b, c) in [(&x, &z, &y), (&y, &x, &z), (&y, &z, &x), (&z, &x, &y), (&z, &y, &x)] {
            let p = h.polarized(a, b, c).unwrap();
            prop_assert!((p - base).abs() <= 1e-13 * base.abs().max(1.0));
        }
    }

    #[test]
    fn polarized_gradient_matches_finite_differences(seed in 0u64..1000) {
        let (h, _, _) = random_hamiltonian(seed, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        let (x, y, z) = (random_vec(&mut rng, 4), random_vec(&mut rng, 4), random_vec(&mut rng, 4));
        let g = h.grad_polarized(&y, &z).unwrap();
        let eps = 1e-5;
        for i in 0..4 {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += eps;
            xm[i] -= eps;
            let fd = (h.polarized(&xp, &y, &z).unwrap() - h.polarized(&xm, &y, &z).unwrap()) / (2.0 * eps);
            prop_assert!((fd - g[i]).abs() <= 1e-6, "component {}: {} vs {}", i, fd, g[i]);
        }
    }

    #[test]
    fn polarization_recovers_the_bilinear_form(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_tensor(&mut rng, 6);
        let (a, b) = (random_vec(&mut rng, 6), random_vec(&mut rng, 6));
        let expected = t.apply(&a, &b);
        let sys = QuadraticOde::new(t, Mat::zeros(6, 6), vec![0.0; 6]).unwrap();
        let p = polarize_quadratic(&sys, &a, &b).unwrap();
        prop_assert!(max_diff(&p, &expected) <= 1e-13);
    }

    #[test]
    fn kahan_step_is_time_symmetric(seed in 0u64..1000, dt in 0.005f64..0.05) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_tensor(&mut rng, 5);
        let c = random_vec(&mut rng, 5);
        let sys = QuadraticOde::new(t, Mat::zeros(5, 5), c).unwrap();
        let y0 = random_vec(&mut rng, 5);
        let y1 = kahan_step(&sys, &y0, dt).unwrap();
        let back = kahan_step(&sys, &y1, -dt).unwrap();
        prop_assert!(max_diff(&back, &y0) <= 1e-12);
    }

    #[test]
    fn kahan_step_is_affine_in_the_constant(seed in 0u64..1000, alpha in -2.0f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_tensor(&mut rng, 4);
        let b = Mat::from_fn(4, 4, |_, _| rng.random_range(-1.0..1.0));
        let (c1, c2, y) = (random_vec(&mut rng, 4), random_vec(&mut rng, 4), random_vec(&mut rng, 4));
        let mix: Vec<f64> = c1.iter().zip(&c2).map(|(a, b)| alpha * a + (1.0 - alpha) * b).collect();
        let step = |c: Vec<f64>| {
            let sys = QuadraticOde::new(t.clone(), b.clone(), c).unwrap();
            kahan_step(&sys, &y, 0.02).unwrap()
        };
        let (s1, s2, sm) = (step(c1), step(c2), step(mix));
        let expect: Vec<f64> = s1.iter().zip(&s2).map(|(a, b)| alpha * a + (1.0 - alpha) * b).collect();
        prop_assert!(max_diff(&sm, &expect) <= 1e-11);
    }
}

#[test]
fn step_satisfies_the_symmetric_difference_equation() {
    // (y' - y)/dt = T(y, y') + B(y + y')/2 + c, with a mass matrix.
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let n = 6;
    let t = random_tensor(&mut rng, n);
    let b = Mat::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let m0 = Mat::from_fn(n, n, |_, _| rng.random_range(-0.2..0.2));
    let mass = Mat::from_fn(n, n, |i, j| if i == j { 2.0 } else { 0.0 }) + &m0 * m0.transpose();
    let c = random_vec(&mut rng, n);
    let sys = QuadraticOde::new(t.clone(), b.clone(), c.clone()).unwrap().with_mass(mass.clone()).unwrap();
    let y = random_vec(&mut rng, n);
    let dt = 0.03;
    let y1 = kahan_step(&sys, &y, dt).unwrap();
    let diff: Vec<f64> = y1.iter().zip(&y).map(|(a, b)| (a - b) / dt).collect();
    let lhs = matvec(&mass, &diff);
    let sum: Vec<f64> = y1.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
    let bs = matvec(&b, &sum);
    let q = t.apply(&y, &y1);
    let rhs: Vec<f64> = (0..n).map(|i| q[i] + bs[i] + c[i]).collect();
    assert!(max_diff(&lhs, &rhs) <= 1e-11);
}

#[test]
fn linear_kahan_is_the_implicit_midpoint_rule() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 7;
    let raw = Mat::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let b = &raw - raw.transpose();
    let c = random_vec(&mut rng, n);
    let sys = QuadraticOde::new(ZeroBilinear(n), b.clone(), c.clone()).unwrap();
    let dt = 0.1;
    let stepper = LinearKahan::new(&sys, dt).unwrap();
    let mut y = random_vec(&mut rng, n);
    for _ in 0..20 {
        let y1 = stepper.step(&y).unwrap();
        let mid: Vec<f64> = y.iter().zip(&y1).map(|(a, b)| 0.5 * (a + b)).collect();
        let f = matvec(&b, &mid);
        for i in 0..n {
            assert!(((y1[i] - y[i]) / dt - f[i] - c[i]).abs() <= 1e-13 * (1.0 + f[i].abs()));
        }
        // The implicit midpoint rule conserves |y|² for skew B and c = 0 only,
        // so here only compare with the generic Kahan step.
        let generic = kahan_step(&sys, &y, dt).unwrap();
        assert!(max_diff(&generic, &y1) <= 1e-13);
        y = y1;
    }
}

#[test]
fn skew_linear_flow_conserves_the_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let n = 8;
    let raw = Mat::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let b = &raw - raw.transpose();
    let sys = QuadraticOde::new(ZeroBilinear(n), b, vec![0.0; n]).unwrap();
    let stepper = LinearKahan::new(&sys, 0.05).unwrap();
    let mut y = random_vec(&mut rng, n);
    let e0: f64 = y.iter().map(|x| x * x).sum();
    for _ in 0..200 {
        y = stepper.step(&y).unwrap();
    }
    let e1: f64 = y.iter().map(|x| x * x).sum();
    assert!((e1 - e0).abs() <= 1e-12 * e0);
}
