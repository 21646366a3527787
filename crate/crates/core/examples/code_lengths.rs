//! Description lengths: the universal integer code, pattern and model
//! lengths, and the prequential code for instance usages.
//!
//! Run with `cargo run --example code_lengths`.

use std::error::Error;

use vouw::encoding::{
    instantiation_length, log_binomial, model_length, pattern_length, prequential_length, universal_integer,
    EncodingParams,
};
use vouw::grid::Pattern;
use vouw::MiningState;

fn main() -> Result<(), Box<dyn Error>> {
    println!("{:>8} {:>10}", "n", "L_N(n)");
    for n in [1u64, 2, 3, 16, 1000, 1 << 20] {
        println!("{n:>8} {:>10.4}", universal_integer(n)?);
    }
    println!("log2 C(12, 5) = {:.4}\n", log_binomial(12, 5)?);

    let params = EncodingParams::new(32, 32, 16);
    let bar = Pattern::from_cells([(0, 0, 3), (0, 1, 3), (0, 2, 4)])?;
    let dot = Pattern::singleton(3);
    println!("bar pattern: {:.3} bits", pattern_length(&bar, &params));
    println!("dot pattern: {:.3} bits", pattern_length(&dot, &params));
    println!("model {{bar, dot}}: {:.3} bits", model_length([&bar, &dot], &params)?);

    // Skewed usages are cheaper to transmit than even ones.
    let even = prequential_length([50u64, 50], params.epsilon());
    let skew = prequential_length([95u64, 5], params.epsilon());
    println!("\nprequential 50/50: {even:.3} bits, 95/5: {skew:.3} bits");
    println!("instantiation 95/5 with positions: {:.3} bits", instantiation_length([95u64, 5], &params));

    let state = MiningState::new(&vouw::Matrix::new(32, 32, 16, (0..1024).map(|i| (i % 7) as u32).collect())?);
    let report = state.lengths();
    println!(
        "\nsingleton model on a 32x32 matrix: model {:.1} + instances {:.1} = {:.1} bits, ratio {:.4}",
        report.model_bits, report.instantiation_bits, report.total_bits, report.ratio
    );
    Ok(())
}
