//! POD basis optimality and layout properties.

use faer::Mat;
use ligep::linalg::{identity, matvec, matvec_t, norm2};
use ligep::msfom::{reconstruct_aux, simulate};
use ligep::pod::{assemble_snapshots, compute_basis, lift_state, project_state};
use ligep::{Grid1D, Model, SnapshotLayout, SnapshotSet};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn frob2(a: &Mat<f64>) -> f64 {
    (0..a.ncols()).map(|j| a.col_as_slice(j).iter().map(|x| x * x).sum::<f64>()).sum()
}

/// `‖Z - VVᵀZ‖_F²`.
fn residual(v: &Mat<f64>, z: &Mat<f64>) -> f64 {
    frob2(&(z - v * (v.transpose() * z)))
}

fn random_set(seed: u64, n: usize, m: usize) -> SnapshotSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Decaying spectrum so that truncation is meaningful.
    let cols: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|i| rng.random_range(-1.0..1.0) / (1.0 + i as f64 * 0.1)).collect())
        .collect();
    SnapshotSet::from_components(&["u"], &[cols], &vec![0.0; m], SnapshotLayout::Global).unwrap()
}

#[test]
fn truncation_error_equals_singular_value_tail() {
    let z = random_set(1, 64, 90);
    let b = compute_basis(&z, 10).unwrap();
    let tail: f64 = b.singular_values[10..].iter().map(|s| s * s).sum();
    let res = residual(&b.v, &z.data);
    assert!((res - tail).abs() <= 1e-10 * tail, "{res} vs {tail}");
    assert!(frob2(&(b.v.transpose() * &b.v - identity(10))) <= 1e-24);
}

#[test]
fn pod_basis_beats_other_bases() {
    let z = random_set(2, 40, 60);
    let best = residual(&compute_basis(&z, 6).unwrap().v, &z.data);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let q = ligep::linalg::thin_svd(&Mat::from_fn(40, 6, |_, _| rng.random_range(-1.0..1.0))).unwrap().u;
        assert!(residual(&q, &z.data) >= best);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn spectrum_and_projector_ignore_column_order(seed in 0u64..1000) {
        let z = random_set(seed, 20, 30);
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 7);
        let mut perm: Vec<usize> = (0..30).collect();
        for i in (1..30).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let shuffled = SnapshotSet {
            data: Mat::from_fn(20, 30, |i, j| z.data[(i, perm[j])]),
            ..z.clone()
        };
        let (a, b) = (compute_basis(&z, 5).unwrap(), compute_basis(&shuffled, 5).unwrap());
        for (x, y) in a.singular_values.iter().zip(&b.singular_values) {
            prop_assert!((x - y).abs() <= 1e-12 * a.singular_values[0]);
        }
        let pa = &a.v * a.v.transpose();
        let pb = &b.v * b.v.transpose();
        prop_assert!(frob2(&(pa - pb)).sqrt() <= 1e-9);
    }

    #[test]
    fn projection_is_a_contraction(seed in 0u64..1000, x in prop::collection::vec(-1.0f64..1.0, 20)) {
        let z = random_set(seed, 20, 25);
        let b = compute_basis(&z, 7).unwrap();
        let px = matvec(&b.v, &matvec_t(&b.v, &x));
        prop_assert!(norm2(&px) <= norm2(&x) * (1.0 + 1e-14));
        // The projector is idempotent.
        let ppx = matvec(&b.v, &matvec_t(&b.v, &px));
        let diff: Vec<f64> = ppx.iter().zip(&px).map(|(a, b)| a - b).collect();
        prop_assert!(norm2(&diff) <= 1e-13);
    }
}

#[test]
fn global_basis_minimizes_the_summed_component_error() {
    let model = Model::Kdv { eta: 1.0, gamma: 0.1 };
    let g = Grid1D::new(0.0, 2.0, 40).unwrap();
    let dt = 0.005;
    let traj = simulate(&model, &g, dt, 60).unwrap();
    let snaps = reconstruct_aux(&model, &traj.u, &g, dt).unwrap();
    let times = traj.times();
    let global = assemble_snapshots(model.kind(), &snaps, &times, SnapshotLayout::Global).unwrap();
    assert_eq!((global.data.nrows(), global.data.ncols()), (40, 4 * 61));
    let r = 8;
    let basis = compute_basis(&global, r).unwrap();
    assert_eq!(basis.d, 4);
    // Σ_c ‖Z_c - VVᵀZ_c‖² equals the tail of the global spectrum.
    let per_component: f64 = snaps
        .components
        .iter()
        .map(|c| {
            let zc = Mat::from_fn(40, c.len(), |i, j| c[j][i]);
            residual(&basis.v, &zc)
        })
        .sum();
    let tail: f64 = basis.singular_values[r..].iter().map(|s| s * s).sum();
    assert!((per_component - tail).abs() <= 1e-9 * tail.max(1e-30));
    // A basis fitted to u alone cannot do better on the summed objective.
    let u_only = SnapshotSet::from_components(&["u"], &[snaps.components[1].clone()], &times, SnapshotLayout::Global)
        .unwrap();
    let vu = compute_basis(&u_only, r).unwrap().v;
    assert!(residual(&vu, &global.data) >= residual(&basis.v, &global.data));

    // The stacked layout yields one long basis with d = 1.
    let stacked = assemble_snapshots(model.kind(), &snaps, &times, SnapshotLayout::Stacked).unwrap();
    assert_eq!((stacked.data.nrows(), stacked.data.ncols()), (160, 61));
    let sb = compute_basis(&stacked, r).unwrap();
    assert_eq!((sb.d, sb.rows()), (1, 160));

    // Lift and projection act blockwise.
    let z: Vec<f64> = (0..4).flat_map(|c| snaps.components[c][10].clone()).collect();
    let zr = project_state(&basis, &z).unwrap();
    assert_eq!(zr.len(), 4 * r);
    assert_eq!(lift_state(&basis, &zr).unwrap().len(), 160);
}

#[test]
fn basis_rank_is_validated() {
    let z = random_set(4, 10, 6);
    assert!(compute_basis(&z, 0).is_err());
    assert!(compute_basis(&z, 7).is_err());
    let b = compute_basis(&z, 6).unwrap();
    assert!(b.truncated(7).is_err());
    assert_eq!(b.truncated(3).unwrap().v.ncols(), 3);
}

#[test]
fn snapshot_order_is_enforced() {
    let model = Model::Ch { c: 1.0, a: 10.0, x0: 0.0 };
    let g = Grid1D::new(-5.0, 5.0, 20).unwrap();
    let traj = simulate(&model, &g, 0.01, 5).unwrap();
    let mut snaps = reconstruct_aux(&model, &traj.u, &g, 0.01).unwrap();
    assert_eq!(snaps.labels, vec!["u", "phi", "v", "w", "nu"]);
    snaps.labels.swap(2, 3);
    assert!(assemble_snapshots(model.kind(), &snaps, &traj.times(), SnapshotLayout::Global).is_err());
}
