//! Constrain how many positions of the accepted word satisfy each
//! predicate. The constraint language talks about the index sets of the
//! declared generators, so `|odd & pos| = 2` reads "exactly two positions
//! are both odd and positive".
//!
//!     cargo run --example cardinality

use num::Zero;
use sfasat::algebra::{parse_predicate, AlgebraId};
use sfasat::decide::{check_sat_card, verify_witness, CardinalityConstraint};
use sfasat::qfbapa::parse_bapa_with;
use sfasat::sfa::{GeneratorSet, Sfa, Transition};

fn main() -> sfasat::Result<()> {
    let odd = parse_predicate("x % 2 == 1", AlgebraId::Lia)?;
    let pos = parse_predicate("x > 0", AlgebraId::Lia)?;
    let guard = odd.and(&pos)?;
    let m = Sfa::new(
        AlgebraId::Lia,
        2,
        0,
        [0],
        vec![
            Transition { source: 0, guard: guard.clone(), target: 1 },
            Transition { source: 1, guard, target: 0 },
        ],
    )?;

    let names = vec!["odd".to_string(), "pos".to_string()];
    let gens = GeneratorSet::new(
        AlgebraId::Lia,
        vec![("odd".into(), odd), ("pos".into(), pos)],
    )?;

    for clause in ["|odd & pos| = 2", "|odd & pos| = 1", "|odd| = 4 && |pos| = 4"] {
        let formula = parse_bapa_with(clause, &names)?;
        let constraint = CardinalityConstraint::with_generators(formula, gens.clone());
        let result = check_sat_card(&m, &constraint)?;
        match &result.witness {
            Some(w) => {
                assert!(verify_witness(&m, Some(&constraint), w));
                println!("{clause}: SAT by {w:?}");
                // one entry per generator region, keyed by its bit pattern
                for (region, size) in &result.diagnostics.region_sizes {
                    if !size.is_zero() {
                        println!("  region {region} holds {size} position(s)");
                    }
                }
            }
            None => println!("{clause}: UNSAT"),
        }
    }
    Ok(())
}
