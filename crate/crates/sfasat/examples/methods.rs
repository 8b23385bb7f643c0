//! The three decision methods side by side: full decomposition, guard
//! pruning with reachability, and bounded brute force. Pruning cannot see
//! cardinality clauses, brute force only searches a finite box; on plain
//! reachability questions all three agree.
//!
//!     cargo run --example methods

use sfasat::algebra::DomainElement;
use sfasat::decide::{brute_force_check, check_sat};
use sfasat::sfa_file::load_sfa_file;

fn main() -> sfasat::Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    let domain: Vec<DomainElement> = (-8..=8).map(DomainElement::Int).collect();

    for name in ["odd_pos.sfa", "blocked.sfa"] {
        let file = load_sfa_file(format!("{dir}/{name}"))?;

        let decomp = check_sat(&file.sfa)?;
        let prune = file.sfa.prune_and_reach();
        let brute = brute_force_check(&file.sfa, None, &domain, 4)?;

        println!(
            "{name}: decomp={:?} prune={} brute={:?}",
            decomp.status, prune, brute.status
        );
        assert_eq!(decomp.status.is_sat(), prune);
        assert_eq!(decomp.status, brute.status);
    }

    // brute force is still an oracle for cardinality clauses, just a
    // bounded one
    let file = load_sfa_file(format!("{dir}/odd_pos_card2.sfa"))?;
    let c = file.cardinality.as_ref().expect("fixture has a clause");
    let brute = brute_force_check(&file.sfa, Some(c), &domain, 4)?;
    println!("odd_pos_card2.sfa: brute={:?} {:?}", brute.status, brute.witness);
    Ok(())
}
