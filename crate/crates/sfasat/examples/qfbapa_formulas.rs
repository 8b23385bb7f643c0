//! Standalone set-cardinality reasoning: parse a formula over set
//! variables, solve it, inspect the model, and check a sparse
//! certificate for it.
//!
//!     cargo run --example qfbapa_formulas

use sfasat::qfbapa::{certificate_of, parse_bapa, qfbapa_solve, qfbapa_verify};

fn main() -> sfasat::Result<()> {
    let inputs = [
        "|A| = 2 && |B| = 2 && |A + B| = 3",
        "|A|=3 & A sub B & |B|=2",
        "A <= B && |A| = |B| && !(A = B)",
        "|U| = 6 && 2 dvd |A| && 3 <= |A & ~B|",
        "|A| = ",
    ];
    for input in inputs {
        let f = match parse_bapa(input) {
            Ok(f) => f,
            Err(e) => {
                println!("{input}\n  does not parse: {e}");
                continue;
            }
        };
        match qfbapa_solve(&f)? {
            None => println!("{input}\n  UNSAT"),
            Some(model) => {
                println!("{input}\n  SAT with |U| = {}", model.universe);
                let sets = model.sets.as_ref().expect("models carry concrete sets");
                for (name, set) in f.set_vars.iter().zip(sets) {
                    println!("  {name} = {set:?}");
                }

                // a model touches few regions; that list plus its sizes is
                // a certificate checkable without re-solving
                let cert = certificate_of(&f)?.expect("solve already succeeded");
                assert!(qfbapa_verify(&f, &cert));
                println!(
                    "  certificate uses {} of {} regions",
                    cert.regions.len(),
                    model.regions.len(),
                );
            }
        }
    }
    Ok(())
}
