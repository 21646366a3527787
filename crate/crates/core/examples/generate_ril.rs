//! Generating synthetic matrices with planted random-walk patterns.
//!
//! Run with `cargo run --example generate_ril`.

use std::error::Error;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vouw::ril::{generate, generate_shape, RilConfig};

fn main() -> Result<(), Box<dyn Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..3 {
        println!("{}\n", generate_shape(8, 4, &mut rng));
    }

    let config = RilConfig::with_snr(64, 64, 0.2, 11)?;
    println!("occurrences per shape: {:?}", config.occurrence_counts());
    let (matrix, truth) = generate(&config)?;
    println!(
        "{}x{} matrix over {} symbols, achieved snr {:.4}, {} shapes",
        matrix.rows(),
        matrix.cols(),
        matrix.alphabet_size(),
        truth.snr(),
        truth.planted.len()
    );

    // Explicit counts with a small alphabet.
    let config = RilConfig::with_counts(32, 32, 6, 4, 5, 7)?.alphabet(8)?;
    let (_, truth) = generate(&config)?;
    for (shape, at) in &truth.planted {
        println!("{} cells planted at {at:?}", shape.cardinality());
    }

    let mut map = String::new();
    for r in 0..16 {
        for c in 0..32 {
            map.push(if truth.mask.get(r, c) { '#' } else { '.' });
        }
        map.push('\n');
    }
    println!("\nupper half of the ground-truth mask:\n{map}");
    Ok(())
}
