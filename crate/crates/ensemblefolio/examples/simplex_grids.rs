//! Grids of constant combinations: what they cost and when to stop.
//!
//! Every mixture ensemble here runs over the rational points of a simplex
//! with a fixed step denominator. The point count is a binomial that grows
//! fast in the number of components, so the library counts before it
//! allocates and refuses grids past a cap.
//!
//! ```bash
//! cargo run --example simplex_grids
//! ```

use ensemblefolio::simplex_grid::{
    enumerate_grid, enumerate_grid_with_cap, grid_point_count, DEFAULT_POINT_CAP,
};

fn main() -> ensemblefolio::Result<()> {
    println!("point counts (components x step denominator):\n");
    print!("{:>6}", "k\\D");
    let dens = [10u32, 100, 1000, 2000];
    for d in dens {
        print!("{:>14}", d);
    }
    println!();
    for k in 2..=6usize {
        print!("{:>6}", k);
        for d in dens {
            print!("{:>14}", grid_point_count(k, d)?);
        }
        println!();
    }

    let grid = enumerate_grid(3, 4)?;
    println!("\nall {} points of the k=3, D=4 grid:", grid.len());
    for i in 0..grid.len() {
        println!("  {:>2}  {:?}  from composition {:?}", i, grid.point(i), grid.composition(i));
    }
    for j in 0..grid.dim() {
        println!("  vertex {} sits at index {}", j, grid.vertex_index(j).unwrap());
    }

    println!("\nenumeration cap is {} points; past it you get a capacity error:", DEFAULT_POINT_CAP);
    match enumerate_grid(6, 200) {
        Err(e) => println!("  k=6, D=200 -> {}", e),
        Ok(_) => unreachable!(),
    }
    match enumerate_grid_with_cap(4, 200, 500_000) {
        Err(e) => println!("  k=4, D=200 under a 500k cap -> {}", e),
        Ok(_) => unreachable!(),
    }
    println!("\nwhen the full grid is out of reach, partition the components instead;");
    println!("see large_scale_partition.");
    Ok(())
}
