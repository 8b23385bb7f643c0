//! Build an automaton in code instead of loading a file: guards are
//! predicate values combined with `and`/`or`/`not`, transitions plain
//! structs over state indices.
//!
//!     cargo run --example build_sfa

use sfasat::algebra::{parse_predicate, AlgebraId, DomainElement};
use sfasat::decide::{check_sat, verify_witness};
use sfasat::sfa::{Sfa, Transition};

fn main() -> sfasat::Result<()> {
    let odd = parse_predicate("x % 2 == 1", AlgebraId::Lia)?;
    let pos = parse_predicate("x > 0", AlgebraId::Lia)?;
    let small = parse_predicate("x <= 10", AlgebraId::Lia)?;

    // q0 --odd&pos--> q1 --!small--> q2, with a q2 loop on odd|small
    let m = Sfa::new(
        AlgebraId::Lia,
        3,
        0,
        [2],
        vec![
            Transition { source: 0, guard: odd.and(&pos)?, target: 1 },
            Transition { source: 1, guard: small.not(), target: 2 },
            Transition { source: 2, guard: odd.or(&small)?, target: 2 },
        ],
    )?;

    let result = check_sat(&m)?;
    let witness = result.witness.expect("this machine accepts something");
    println!("witness: {witness:?}");
    println!("letter counts: {:?}", result.diagnostics.letter_counts);
    assert!(verify_witness(&m, None, &witness));
    assert!(m.accepts(&witness)?);

    // the same word, evaluated letter by letter against one guard
    for w in &witness {
        println!("odd({w}) = {}", odd.evaluate(w)?);
    }

    // an element outside the domain of the algebra is a type error
    let e = m.accepts(&[DomainElement::Bv(3)]).unwrap_err();
    println!("mixing algebras fails: {e}");
    Ok(())
}
