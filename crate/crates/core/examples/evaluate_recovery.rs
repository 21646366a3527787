//! Scoring how well mining recovers planted patterns.
//!
//! Run with `cargo run --release --example evaluate_recovery`.

use std::error::Error;

use vouw::eval::{coverage_mask, evaluate, precision_recall, spearman, Variant};
use vouw::ril::{generate, RilConfig};

fn main() -> Result<(), Box<dyn Error>> {
    let (mut snrs, mut ratios) = (Vec::new(), Vec::new());
    for (seed, snr) in [0.05, 0.1, 0.2, 0.3].into_iter().enumerate() {
        let (matrix, truth) = generate(&RilConfig::with_snr(96, 96, snr, seed as u64 + 1)?)?;
        for variant in Variant::ALL {
            let report = evaluate(&matrix, &truth, variant)?;
            println!(
                "snr {snr:.2} {:<9} precision {:.3} recall {:.3} ratio {:.4} ({} iterations, {:.2}s)",
                variant.name(),
                report.precision,
                report.recall,
                report.compression_ratio,
                report.iterations,
                report.seconds
            );
            if variant == Variant::Local {
                snrs.push(report.snr_ground_truth);
                ratios.push(report.compression_ratio);
            }
        }
    }
    // More signal means more compression, so the correlation is negative.
    println!("\nspearman(snr, ratio) over local runs: {:?}", spearman(&snrs, &ratios));

    // The lower-level pieces, used directly.
    let (matrix, truth) = generate(&RilConfig::with_snr(48, 48, 0.15, 9)?)?;
    let outcome = vouw::mine(&matrix, &Variant::Both.miner_config())?;
    let (p, r) = precision_recall(&coverage_mask(&outcome.state), &truth.mask)?;
    println!("48x48 with both heuristics: precision {p:.3} recall {r:.3}");
    Ok(())
}
