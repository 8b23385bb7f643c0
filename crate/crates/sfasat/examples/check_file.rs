//! Load automaton files and decide whether they accept anything.
//!
//!     cargo run --example check_file

use sfasat::decide::{check_sat, check_sat_card};
use sfasat::sfa_file::load_sfa_file;

fn main() -> sfasat::Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    for name in ["odd_pos.sfa", "odd_pos_card2.sfa", "blocked.sfa", "chain_card.sfa"] {
        let file = load_sfa_file(format!("{dir}/{name}"))?;
        let result = match &file.cardinality {
            Some(constraint) => check_sat_card(&file.sfa, constraint)?,
            None => check_sat(&file.sfa)?,
        };
        match result.witness {
            Some(w) => {
                let word = w.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
                println!("{name}: satisfiable, e.g. by [{word}]");
            }
            None => println!("{name}: accepts nothing"),
        }
    }
    Ok(())
}
