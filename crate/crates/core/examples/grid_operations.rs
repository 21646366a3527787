//! Building patterns, placing them on a grid and combining them.
//!
//! Run with `cargo run --example grid_operations`.

use std::error::Error;

use vouw::grid::{deinstantiate, instantiate, superpose, union_pattern, Offset, Pattern};

fn main() -> Result<(), Box<dyn Error>> {
    // An L-shaped pattern; coordinates are normalised to the bounding box.
    let ell = Pattern::from_cells([(5, 5, 1), (6, 5, 2), (6, 6, 3)])?;
    println!("ell ({}x{}, {} cells, pivot {:?}):\n{ell}\n", ell.rows(), ell.cols(), ell.cardinality(), ell.pivot());

    let dims = (6, 6);
    let a = instantiate(&ell, (0, 0), dims)?;
    let b = instantiate(&Pattern::singleton(7), (0, 2), dims)?;
    let both = superpose(&a, &b)?;
    println!("superposed overlay holds {} cells:", both.len());
    for ((r, c), s) in both.entries() {
        println!("  ({r}, {c}) = {s}");
    }

    // Placing the same pattern twice on the same cell is rejected.
    match superpose(&a, &a) {
        Ok(_) => println!("unexpected: overlapping overlays merged"),
        Err(e) => println!("overlap rejected: {e}"),
    }

    let (pattern, at) = deinstantiate(&both)?;
    println!("\ndeinstantiated at {at:?}:\n{pattern}\n");

    // The union keeps X at its pivot and places Y at delta.
    let z = union_pattern(&ell, &ell, Offset::new(0, 2))?;
    println!("ell joined with itself at {}:\n{z}", Offset::new(0, 2));
    Ok(())
}
