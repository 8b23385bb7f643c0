//! The harness behind `sfasat selftest`: seeded random instances cross-
//! checked between independent implementations. Rerunning prints the
//! same bytes; change the seed to explore a different slice.
//!
//!     cargo run --example random_crosscheck

use sfasat::decide::{check_sat, verify_witness};
use sfasat::harness::{
    bapa_bounded_solve, bapa_enumeration_sat, random_bapa, random_sfa, seeded,
};

fn main() -> sfasat::Result<()> {
    let mut rng = seeded(7);

    let mut sat = 0;
    for _ in 0..50 {
        let m = random_sfa(&mut rng);
        let result = check_sat(&m)?;
        assert_eq!(result.status.is_sat(), m.prune_and_reach());
        if let Some(w) = &result.witness {
            assert!(verify_witness(&m, None, w));
            sat += 1;
        }
    }
    println!("50 random automata, {sat} satisfiable, all witnesses verified");

    let mut agreements = 0;
    for _ in 0..30 {
        let f = random_bapa(&mut rng);
        let enumerated = bapa_enumeration_sat(&f, 8);
        let solved = bapa_bounded_solve(&f, 8)?;
        assert_eq!(enumerated, solved);
        agreements += 1;
    }
    println!("{agreements} random set formulas, solver matches enumeration");
    Ok(())
}
