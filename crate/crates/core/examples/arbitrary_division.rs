//! Coverage baseline: block tiling and the round-robin flight order.

use infoplan::baseline::{block_budget, build_partitions};
use infoplan::graph::GridSpec;

fn main() -> infoplan::Result<()> {
    let mut grid = GridSpec::new(6, 6);
    grid.start_depot = [3.0, 3.0];
    let g = grid.build()?;
    let budget = block_budget(&g, 3, 3)?;

    let mut schedule = build_partitions(&g, budget)?;
    println!("budget {budget:.2} s -> {} blocks of {:?}", schedule.len(), schedule.block);
    for (k, part) in schedule.partitions.iter().enumerate() {
        println!("block {k}: areas {part:?}");
    }
    for flight in 1..=6 {
        let p = schedule.next_flight();
        println!("flight {flight}: {:?} ({:.1} s)", p.seq, p.cost);
    }
    Ok(())
}
