//! Writing and reading the text formats used by the command line tool.
//!
//! Run with `cargo run --example file_formats`.

use std::error::Error;

use vouw::cli::format::{parse_mask, parse_matrix, write_mask, write_matrix, PatternSet};
use vouw::ril::{generate, RilConfig};
use vouw::{mine, MinerConfig};

fn main() -> Result<(), Box<dyn Error>> {
    let (matrix, truth) = generate(&RilConfig::with_counts(12, 12, 4, 2, 3, 5)?.alphabet(6)?)?;

    let text = write_matrix(&matrix);
    print!("{text}");
    assert_eq!(parse_matrix(&text)?, matrix);

    let mask_text = write_mask(&truth.mask);
    println!("\n{}", mask_text.lines().take(4).collect::<Vec<_>>().join("\n"));
    assert_eq!(parse_mask(&mask_text)?, truth.mask);

    let outcome = mine(&matrix, &MinerConfig::default())?;
    let set = PatternSet::from_state(&outcome.state);
    let set_text = set.write();
    println!("\npattern set ({} lines), first lines:", set_text.lines().count());
    for line in set_text.lines().take(6) {
        println!("  {line}");
    }
    let parsed = PatternSet::parse(&set_text)?;
    assert_eq!(parsed.reconstruct(12, 12, 6)?, matrix);
    let state = parsed.to_state(&matrix)?;
    println!("\nreloaded state: {:.3} bits (mined {:.3})", state.total_bits(), outcome.state.total_bits());

    match parse_matrix("VOUW-MATRIX 2 2 2\n0 1\n1 9\n") {
        Ok(_) => println!("unexpected: bad symbol accepted"),
        Err(e) => println!("bad input: {e}"),
    }
    Ok(())
}
