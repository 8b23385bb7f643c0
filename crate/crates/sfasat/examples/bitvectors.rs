//! The second supported algebra: fixed-width bitvectors, with predicates
//! given as explicit value sets.
//!
//!     cargo run --example bitvectors

use sfasat::algebra::{parse_predicate, AlgebraId, DomainElement, Predicate};
use sfasat::decide::{brute_force_check, check_sat};
use sfasat::sfa::{Sfa, Transition};

fn main() -> sfasat::Result<()> {
    let w = 6;
    let hit = parse_predicate("in {6, 14, 22, 38, 54}", AlgebraId::Bv(w))?;
    let m = Sfa::new(
        AlgebraId::Bv(w),
        2,
        0,
        [1],
        vec![
            Transition { source: 0, guard: hit.clone(), target: 1 },
            Transition { source: 1, guard: Predicate::top(AlgebraId::Bv(w)), target: 1 },
        ],
    )?;

    let result = check_sat(&m)?;
    println!("witness: {:?}", result.witness);

    // negation is complement within the width: !hit has 2^6 - 5 values
    let miss = hit.not();
    println!("!hit satisfiable by {:?}", miss.is_satisfiable());

    // the witness agrees with plain enumeration over the whole domain
    let domain: Vec<DomainElement> = (0..1u64 << w).map(DomainElement::Bv).collect();
    let brute = brute_force_check(&m, None, &domain, 2)?;
    assert_eq!(brute.status, result.status);
    println!("brute force agrees: {:?}", brute.witness);
    Ok(())
}
