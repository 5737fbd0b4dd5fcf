mod common;

use demix_core::conclab::*;
use demix_core::ensemble::{standard_normal_vec, uniform_ball_point};
use demix_core::linalg::{distance, norm};
use demix_core::mixing::deviation_stat;
use demix_core::{sample_matrix, DenseMatrix, EnsembleSpec, MixingOperator, RngSeed};
use proptest::prelude::*;

fn random_set(count: usize, dim: usize, scale: f64, seed: RngSeed) -> FinitePointSet {
    let mut rng = seed.rng();
    FinitePointSet::new(
        (0..count)
            .map(|_| standard_normal_vec(&mut rng, dim).into_iter().map(|v| v * scale).collect())
            .collect(),
    )
    .unwrap()
}

#[test]
fn width_of_two_basis_vectors() {
    // E max(g₁, g₂) = 1/√π
    let set = FinitePointSet::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
    let w = gaussian_width_mc(&set, 100_000, RngSeed::new(1, 0)).unwrap();
    let exact = 1.0 / std::f64::consts::PI.sqrt();
    assert!((w.mean - exact).abs() <= 3.0 * w.stderr, "{} ± {}", w.mean, w.stderr);
}

#[test]
fn width_of_antipodal_pair() {
    // {e₁, −e₁}: w = γ = E|g| = √(2/π)
    let set = FinitePointSet::new(vec![vec![1.0, 0.0, 0.0], vec![-1.0, 0.0, 0.0]]).unwrap();
    let w = gaussian_width_mc(&set, 50_000, RngSeed::new(2, 0)).unwrap();
    let g = gaussian_complexity_mc(&set, 50_000, RngSeed::new(2, 0)).unwrap();
    let exact = (2.0 / std::f64::consts::PI).sqrt();
    assert!((w.mean - exact).abs() <= 3.0 * w.stderr);
    assert_eq!(w.mean, g.mean);
}

#[test]
fn complexity_sandwich_and_log_bound() {
    let mut sets = vec![
        FinitePointSet::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap(),
        FinitePointSet::new(vec![vec![3.0, 4.0]]).unwrap(),
    ];
    for s in 0..8u64 {
        sets.push(random_set(5 + 7 * s as usize, 3 + s as usize, 0.5 + s as f64, RngSeed::new(10 + s, 0)));
    }
    // Offset cluster: min-norm far from zero.
    sets.push(FinitePointSet::new((0..20).map(|i| vec![5.0 + 0.01 * i as f64, 0.1 * (i as f64).sin()]).collect()).unwrap());

    for (i, set) in sets.iter().enumerate() {
        let seed = RngSeed::new(50 + i as u64, 0);
        let w = gaussian_width_mc(set, 20_000, seed).unwrap();
        let g = gaussian_complexity_mc(set, 20_000, seed.derive(1)).unwrap();
        let slack = 3.0 * (w.stderr + g.stderr);
        assert!((w.mean + set.rad()) / 3.0 <= g.mean + slack, "set {i}: lower");
        assert!(g.mean <= 2.0 * (w.mean + set.min_norm()) + slack, "set {i}: upper");
        let t = set.len() as f64;
        if set.len() >= 2 {
            assert!(w.mean <= 1.5 * t.ln().sqrt() * set.diam() + 3.0 * w.stderr, "set {i}: log bound");
        }
    }
}

#[test]
fn width_is_reproducible() {
    let set = random_set(10, 4, 1.0, RngSeed::new(3, 0));
    let a = gaussian_width_mc(&set, 3000, RngSeed::new(4, 0)).unwrap();
    let b = gaussian_width_mc(&set, 3000, RngSeed::new(4, 0)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn nets_cover_and_respect_bound() {
    for (k, r, eta) in [(1, 1.0, 0.3), (2, 1.0, 0.25), (3, 2.0, 0.9), (4, 1.0, 0.85), (5, 1.0, 0.7)] {
        let net = build_ball_net(k, r, eta).unwrap();
        assert!(net.log_cardinality() <= covering_log_bound(k, r, eta) + 1e-12);
        assert!(net.points.iter().all(|p| norm(p) <= r * (1.0 + 1e-12)));
        let mut rng = RngSeed::new(k as u64, 7).rng();
        for i in 0..3000 {
            // Half of the probes sit on the sphere, where coverage is tightest.
            let mut p = uniform_ball_point(&mut rng, k, r);
            if i % 2 == 0 {
                let s = r / norm(&p);
                p.iter_mut().for_each(|v| *v *= s);
            }
            assert!(net.distance_to(&p) <= eta * (1.0 + 1e-12), "k={k} r={r} eta={eta}");
        }
    }
}

#[test]
fn net_size_guard() {
    assert!(matches!(
        build_ball_net_with_cap(6, 1.0, 0.01, 1000),
        Err(demix_core::DemixError::NetTooLarge { .. })
    ));
}

#[test]
fn image_net_delta_covers_continuum() {
    let g = random_relu_generator(2, 8, 5, RngSeed::new(1, 0)).unwrap();
    let h = random_relu_generator(2, 8, 4, RngSeed::new(2, 0)).unwrap();
    let nu = build_ball_net(2, 1.0, 0.3).unwrap();
    let nv = build_ball_net(2, 1.0, 0.4).unwrap();
    let img = image_net(&nu, &nv, &g, &h, DEFAULT_NET_CAP).unwrap();
    assert_eq!(img.set.len(), img.xs.len() * img.ys.len());
    let mut rng = RngSeed::new(3, 0).rng();
    for _ in 0..500 {
        let u = uniform_ball_point(&mut rng, 2, 1.0);
        let v = uniform_ball_point(&mut rng, 2, 1.0);
        let mut z = g.forward(&u).unwrap();
        z.extend(h.forward(&v).unwrap());
        let d = img.set.points().iter().map(|p| distance(p, &z)).fold(f64::INFINITY, f64::min);
        assert!(d <= img.delta + 1e-12);
    }
}

#[test]
fn product_route_agrees_with_exhaustive_on_image_nets() {
    let g = random_relu_generator(2, 6, 6, RngSeed::new(4, 0)).unwrap();
    let h = random_relu_generator(2, 6, 5, RngSeed::new(5, 0)).unwrap();
    let net = build_ball_net(2, 1.0, 0.5).unwrap();
    let img = image_net(&net, &net, &g, &h, DEFAULT_NET_CAP).unwrap();
    for s in 0..3u64 {
        let a = sample_matrix(&EnsembleSpec::gaussian(), 5, 6, RngSeed::new(6, s)).unwrap();
        let op = MixingOperator::new(a);
        let full = srec_check(&op, &img.set, 0.5, 0.1).unwrap();
        let prod = srec_check_product(&op, &img.xs, &img.ys, 0.5, 0.1).unwrap();
        assert!((full.min_margin - prod.min_margin).abs() <= 1e-9);
        assert_eq!(full.pair_count, prod.pair_count);
    }
}

#[test]
fn exhaustive_srec_matches_brute_force() {
    let set = random_set(12, 7, 1.0, RngSeed::new(7, 0));
    let a = sample_matrix(&EnsembleSpec::rademacher(), 4, 3, RngSeed::new(8, 0)).unwrap();
    let op = MixingOperator::new(a.clone());
    let rep = srec_check(&op, &set, 0.8, 0.05).unwrap();
    let mut best = f64::INFINITY;
    for i in 0..set.len() {
        for j in i + 1..set.len() {
            let d: Vec<f64> = set.points()[i].iter().zip(&set.points()[j]).map(|(p, q)| p - q).collect();
            let bd = common::naive_mix(&a, &d[..3], &d[3..], 1.0, 2.0);
            best = best.min(norm(&bd) / 2.0 - 0.8 * norm(&d) + 0.05);
        }
    }
    assert!((rep.min_margin - best).abs() <= 1e-12);
}

#[test]
fn srec_below_threshold_fails() {
    // A single measurement cannot separate a spread-out set.
    let set = random_set(30, 4, 1.0, RngSeed::new(9, 0));
    let op = MixingOperator::new(sample_matrix(&EnsembleSpec::gaussian(), 1, 3, RngSeed::new(9, 1)).unwrap());
    assert!(!srec_check(&op, &set, 0.9, 0.0).unwrap().holds());
}

#[test]
fn cancelling_pair_violates_srec() {
    // B = [1 1] on R^{1+1}: ‖B d‖ = |d₁ + d₂| vanishes for d = (1, −1).
    let op = MixingOperator::new(DenseMatrix::identity(1));
    let set = FinitePointSet::new(vec![vec![1.0, -1.0], vec![0.0, 0.0]]).unwrap();
    let rep = srec_check(&op, &set, 0.5, 0.1).unwrap();
    assert!((rep.min_margin - (0.1 - 0.5 * 2f64.sqrt())).abs() < 1e-15);
    assert_eq!(rep.argmin_pair, Some((0, 1)));
}

#[test]
fn deviation_pure_y_is_zero_for_every_ensemble() {
    let (m, n) = (16, 8);
    let set = FinitePointSet::new(
        (0..10)
            .map(|i| {
                let mut z = vec![0.0; n];
                z.extend((0..m).map(|j| ((i + 2 * j) as f64).sin()));
                z
            })
            .collect(),
    )
    .unwrap();
    for spec in [EnsembleSpec::gaussian(), EnsembleSpec::rademacher(), EnsembleSpec::uniform_scaled()] {
        let rep = deviation_experiment(&spec, &set, m, n, 30, 1.0, RngSeed::new(1, 0)).unwrap();
        assert!(rep.sup_deviation_samples.iter().all(|&s| s == 0.0));
        assert!(rep.empirical_constant.is_finite());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn deviation_is_positively_homogeneous(seed in 0u64..100_000, c in 0.01f64..100.0) {
        let a = sample_matrix(&EnsembleSpec::gaussian(), 6, 4, RngSeed::new(seed, 0)).unwrap();
        let op = MixingOperator::new(a);
        let mut rng = RngSeed::new(seed, 1).rng();
        let x = standard_normal_vec(&mut rng, 4);
        let y = standard_normal_vec(&mut rng, 6);
        let base = deviation_stat(&op, &x, &y).unwrap();
        let xs: Vec<f64> = x.iter().map(|v| v * c).collect();
        let ys: Vec<f64> = y.iter().map(|v| v * c).collect();
        let scaled = deviation_stat(&op, &xs, &ys).unwrap();
        let mag = c * (norm(&x) + norm(&y)) * 6f64.sqrt();
        prop_assert!((scaled - c * base).abs() <= 1e-12 * mag);
    }

    #[test]
    fn srec_margin_scales_with_set(seed in 0u64..100_000, c in 0.1f64..10.0) {
        let set = random_set(8, 5, 1.0, RngSeed::new(seed, 0));
        let op = MixingOperator::new(sample_matrix(&EnsembleSpec::uniform_scaled(), 3, 2, RngSeed::new(seed, 1)).unwrap());
        let base = srec_check(&op, &set, 0.6, 0.2).unwrap();
        let scaled = srec_check(&op, &set.scaled(c), 0.6, 0.2 * c).unwrap();
        prop_assert!((scaled.min_margin - c * base.min_margin).abs() <= 1e-9 * c.max(1.0));
    }
}
