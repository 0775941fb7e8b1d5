use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use valnet_core::metrics::{betweenness, log_normal_fit, strength_fit, structural_report, LogBase};
use valnet_core::FlowNetwork;
use valnet_oracles::{assortativity_undirected, betweenness_bruteforce, clustering_literal};

fn random_digraph(n: usize, density: f64, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(n, n, |i, j| {
        if i != j && rng.random_bool(density) {
            rng.random_range(0.5..3.0)
        } else {
            0.0
        }
    })
}

#[test]
fn two_cycle_is_fully_reciprocal() {
    let w = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    let r = structural_report(&FlowNetwork::anonymous(w).unwrap()).unwrap();
    assert_eq!(r.density, 1.0);
    assert_eq!(r.reciprocity, 1.0);
    assert_eq!(r.diameter, Some(1));
}

#[test]
fn log_fit_recovers_parameters_of_exact_sample() {
    // exp(mu +/- sigma), equally weighted: mean mu, population sd sigma.
    let (mu, sigma) = (5.959f64, 2.129f64);
    let values = [(mu - sigma).exp(), (mu + sigma).exp()];
    let fit = log_normal_fit(&values).unwrap();
    assert!((fit.mu(LogBase::Natural) - mu).abs() < 1e-12);
    assert!((fit.sigma(LogBase::Natural) - sigma).abs() < 1e-12);
    let ln10 = 10f64.ln();
    assert!((fit.mu(LogBase::Ten) - mu / ln10).abs() < 1e-12);
    assert!((fit.sigma(LogBase::Ten) - sigma / ln10).abs() < 1e-12);
}

#[test]
fn strengths_are_weighted_degrees() {
    let w = DMatrix::from_row_slice(3, 3, &[0.0, 2.0, 1.0, 0.0, 0.0, 4.0, 0.0, 0.0, 0.0]);
    let fit = strength_fit(&FlowNetwork::anonymous(w).unwrap()).unwrap();
    assert_eq!(fit.out_strength, vec![3.0, 4.0, 0.0]);
    assert_eq!(fit.in_strength, vec![0.0, 2.0, 5.0]);
    assert_eq!(fit.in_fit.count, 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn betweenness_matches_bruteforce(n in 2usize..=25, density in 0.05f64..0.6, seed in any::<u64>()) {
        let w = random_digraph(n, density, seed);
        let ours = betweenness(&FlowNetwork::anonymous(w.clone()).unwrap());
        let reference = betweenness_bruteforce(&w);
        for (a, b) in ours.iter().zip(&reference) {
            prop_assert!((a - b).abs() < 1e-9 * b.max(1.0));
        }
    }

    #[test]
    fn clustering_and_assortativity_match_literal(n in 3usize..=30, density in 0.05f64..0.7, seed in any::<u64>()) {
        let w = random_digraph(n, density, seed);
        let r = structural_report(&FlowNetwork::anonymous(w.clone()).unwrap()).unwrap();
        prop_assert!((r.clustering_coefficient - clustering_literal(&w)).abs() < 1e-12);
        match (r.assortativity, assortativity_undirected(&w)) {
            (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-9),
            (None, None) => {}
            (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
        }
    }

    #[test]
    fn density_and_reciprocity_in_range(n in 2usize..=30, density in 0.0f64..1.0, seed in any::<u64>()) {
        let w = random_digraph(n, density, seed);
        let r = structural_report(&FlowNetwork::anonymous(w.clone()).unwrap()).unwrap();
        let links = w.iter().filter(|x| **x > 0.0).count();
        prop_assert_eq!(r.links, links);
        prop_assert!((r.density - links as f64 / (n * (n - 1)) as f64).abs() < 1e-15);
        prop_assert!((0.0..=1.0).contains(&r.reciprocity));
        if r.strongly_connected && n > 1 {
            prop_assert!(r.diameter.unwrap() >= 1);
        }
    }
}
