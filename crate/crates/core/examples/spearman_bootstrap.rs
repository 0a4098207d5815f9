//! Spearman correlation with a seeded percentile bootstrap interval.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rqscore::stats::{bootstrap_ci, render_percent, spearman, strength_ratio, BootstrapConfig};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let z = Normal::new(0.0, 1.0).unwrap();
    let pairs: Vec<(f64, f64)> = (0..200)
        .map(|_| {
            let x: f64 = z.sample(&mut rng);
            let y = 0.5 * x + 0.75f64.sqrt() * z.sample(&mut rng);
            (x, (y * 2.0).round() / 2.0) // ties on the second variable
        })
        .collect();
    let rho = spearman(&pairs).unwrap();
    let cfg = BootstrapConfig {
        samples: 1000,
        alpha: 0.05,
        seed: 42,
    };
    let (lo, hi) = bootstrap_ci(&pairs, &cfg).unwrap();
    println!("rho = {rho:.4}, 95% CI [{lo:.4}, {hi:.4}] (B = {}, seed {})", cfg.samples, cfg.seed);
    assert_eq!((lo, hi), bootstrap_ci(&pairs, &cfg).unwrap());

    let ratio = strength_ratio(0.239, 0.285).unwrap();
    println!("rho 0.239 has {} of the strength of rho 0.285", render_percent(ratio));
    println!("constant input: {:?}", spearman(&[(1.0, 1.0), (2.0, 1.0), (3.0, 1.0)]));
}
