use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use valnet_core::hhd::{decompose, decompose_with, HodgeDecomposition, LaplacianSolver};
use valnet_core::FlowNetwork;
use valnet_oracles::hodge_pseudoinverse;

fn random_flows(n: usize, density: f64, seed: u64) -> FlowNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = DMatrix::from_fn(n, n, |i, j| {
        if i != j && rng.random_bool(density) {
            rng.random_range(0.01..10.0)
        } else {
            0.0
        }
    });
    FlowNetwork::anonymous(w).unwrap()
}

fn scale(d: &HodgeDecomposition) -> f64 {
    d.net_flow.amax().max(f64::MIN_POSITIVE)
}

fn energy(d: &HodgeDecomposition, phi: &[f64]) -> f64 {
    let n = d.len();
    let mut e = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let w = d.weights[(i, j)];
            if w > 0.0 {
                let c = d.net_flow[(i, j)] - w * (phi[i] - phi[j]);
                e += c * c / w;
            }
        }
    }
    e
}

#[test]
fn directed_triangle_is_pure_circulation() {
    let w = DMatrix::from_row_slice(3, 3, &[0.0, 2.0, 0.0, 0.0, 0.0, 2.0, 2.0, 0.0, 0.0]);
    let d = decompose(&FlowNetwork::anonymous(w).unwrap());
    assert!(d.phi.iter().all(|p| p.abs() < 1e-14));
    assert_eq!(d.circular[(0, 1)], 2.0);
    assert_eq!(d.circular[(2, 0)], 2.0);
}

#[test]
fn chain_is_pure_potential() {
    let w = DMatrix::from_row_slice(3, 3, &[0.0, 3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
    let d = decompose(&FlowNetwork::anonymous(w).unwrap());
    assert!(d.circular.iter().all(|c| *c == 0.0));
    // phi_0 - phi_1 = 3, phi_1 - phi_2 = 1, sum = 0.
    let expected = [7.0 / 3.0, -2.0 / 3.0, -5.0 / 3.0];
    for (p, e) in d.phi.iter().zip(expected) {
        assert!((p - e).abs() < 1e-12);
    }
}

#[test]
fn reciprocal_pair_cancels_into_bilateral() {
    let w = DMatrix::from_row_slice(2, 2, &[0.0, 5.0, 3.0, 0.0]);
    let d = decompose(&FlowNetwork::anonymous(w).unwrap());
    assert_eq!(d.bilateral[(0, 1)], 3.0);
    assert_eq!(d.bilateral[(1, 0)], 3.0);
    assert!((d.phi[0] - d.phi[1] - 2.0).abs() < 1e-12);
}

#[test]
fn solvers_agree() {
    let net = random_flows(60, 0.2, 7);
    let a = decompose_with(&net, LaplacianSolver::Cholesky);
    let b = decompose_with(&net, LaplacianSolver::ConjugateGradient);
    let diff = a
        .phi
        .iter()
        .zip(&b.phi)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    assert!(diff < 1e-9 * scale(&a));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn potentials_match_pseudoinverse(n in 2usize..=60, density in 0.02f64..0.5, seed in any::<u64>()) {
        let net = random_flows(n, density, seed);
        let d = decompose(&net);
        let reference = hodge_pseudoinverse(&net.weights);
        let s = scale(&d);
        for i in 0..n {
            prop_assert!((d.phi[i] - reference.phi[i]).abs() < 1e-10 * s.max(1.0));
        }
        prop_assert!((&d.circular - &reference.circular).amax() < 1e-9 * s.max(1.0));
    }

    #[test]
    fn exactness_balance_and_orthogonality(n in 2usize..=100, density in 0.02f64..0.4, seed in any::<u64>()) {
        let net = random_flows(n, density, seed);
        let d = decompose(&net);
        let s = scale(&d);
        prop_assert!(d.residual < 1e-9 * s);

        let through: Vec<f64> = (0..n)
            .map(|i| net.weights.row(i).sum() + net.weights.column(i).sum())
            .collect();
        for i in 0..n {
            let balance: f64 = d.circular.row(i).sum();
            prop_assert!(balance.abs() <= 1e-9 * through[i].max(f64::MIN_POSITIVE));
        }

        let (mut dot, mut pp, mut cc) = (0.0, 0.0, 0.0);
        for i in 0..n {
            for j in 0..i {
                let w = d.weights[(i, j)];
                if w > 0.0 {
                    let p = d.potential_flow(i, j);
                    let c = d.circular[(i, j)];
                    dot += p * c / w;
                    pp += p * p / w;
                    cc += c * c / w;
                }
            }
        }
        prop_assert!(dot.abs() <= 1e-9 * (pp * cc).sqrt().max(f64::MIN_POSITIVE));
    }

    #[test]
    fn circular_energy_is_minimal(n in 3usize..=40, seed in any::<u64>()) {
        let net = random_flows(n, 0.3, seed);
        let d = decompose(&net);
        let base = energy(&d, &d.phi);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        for _ in 0..5 {
            let perturbed: Vec<f64> = d.phi.iter().map(|p| p + rng.random_range(-1.0..1.0)).collect();
            prop_assert!(base <= energy(&d, &perturbed) * (1.0 + 1e-12) + 1e-12);
        }
    }

    #[test]
    fn scaling_and_gauge(n in 2usize..=50, seed in any::<u64>(), c in 1e-3f64..1e3) {
        let net = random_flows(n, 0.25, seed);
        let d1 = decompose(&net);
        let d2 = decompose(&net.scaled(c));
        let s = scale(&d2);
        for i in 0..n {
            prop_assert!((d1.phi[i] * c - d2.phi[i]).abs() < 1e-9 * s.max(1.0));
        }
        prop_assert!((&d1.circular * c - &d2.circular).amax() < 1e-9 * s.max(1.0));

        let shifted: Vec<f64> = d1.phi.iter().map(|p| p + 17.0).collect();
        for i in 0..n {
            for j in 0..n {
                let w = d1.weights[(i, j)];
                let a = w * (d1.phi[i] - d1.phi[j]);
                let b = w * (shifted[i] - shifted[j]);
                prop_assert!((a - b).abs() < 1e-9 * s.max(1.0));
            }
        }
        let total: f64 = d1.phi.iter().sum();
        prop_assert!(total.abs() < 1e-9 * scale(&d1).max(1.0) * n as f64);
    }
}
