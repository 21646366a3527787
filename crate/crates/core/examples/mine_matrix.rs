//! Mining a matrix with each heuristic and printing the discovered patterns.
//!
//! Run with `cargo run --release --example mine_matrix`.

use std::error::Error;

use vouw::{mine, Heuristic, Matrix, MinerConfig};

fn main() -> Result<(), Box<dyn Error>> {
    // A 2x2 motif tiled across a background of zeros, with a little noise.
    let motif = [[1, 2], [3, 1]];
    let mut cells = vec![0u32; 24 * 24];
    for (k, (r, c)) in [(1, 1), (1, 9), (5, 4), (9, 14), (13, 2), (15, 19), (19, 8), (20, 20)].into_iter().enumerate() {
        for (dr, row) in motif.iter().enumerate() {
            for (dc, &s) in row.iter().enumerate() {
                cells[(r + dr) * 24 + c + dc] = s;
            }
        }
        cells[(k * 71) % 576] = 4;
    }
    let matrix = Matrix::new(24, 24, 5, cells)?;

    for (name, config) in [
        ("best-1", MinerConfig::new(Heuristic::Best1, false)),
        ("best-1 + local", MinerConfig::new(Heuristic::Best1, true)),
        ("best-*", MinerConfig::new(Heuristic::BestStar, false)),
        ("best-* + local", MinerConfig::new(Heuristic::BestStar, true)),
    ] {
        let outcome = mine(&matrix, &config)?;
        let s = &outcome.state;
        println!(
            "{name:<15} iterations {:>3}  |H| {:>3}  |I| {:>4}  ratio {:.4}",
            outcome.log.len(),
            s.model_size(),
            s.instance_count(),
            s.lengths().ratio
        );
        assert!(s.is_lossless());
    }

    let outcome = mine(&matrix, &MinerConfig::new(Heuristic::Best1, true))?;
    println!("\nmulti-cell patterns found with best-1 + local:");
    for (_, pattern, usage) in outcome.state.model().filter(|(_, p, _)| !p.is_singleton()) {
        println!("usage {usage}:\n{pattern}\n");
    }
    Ok(())
}
