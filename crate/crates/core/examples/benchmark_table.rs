//! A small benchmark grid: CSV rows plus the summary table.
//!
//! Run with `cargo run --release --example benchmark_table`. Set a larger
//! size list to approach the full benchmark.

use std::error::Error;

use vouw::eval::{bench, format_table, summarize, write_csv, BenchConfig, Variant};

fn main() -> Result<(), Box<dyn Error>> {
    let config = BenchConfig {
        sizes: vec![48, 64],
        snrs: vec![0.05, 0.3],
        variants: Variant::ALL.to_vec(),
        seeds: 2,
        threads: std::thread::available_parallelism().map_or(0, |n| n.get()),
        ..BenchConfig::default()
    };
    let rows = bench(&config)?;
    write_csv(&rows, std::io::stdout())?;
    println!();
    print!("{}", format_table(&summarize(&rows)));
    Ok(())
}
