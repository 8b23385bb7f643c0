//! The letter-count formula: a linear-size existential arithmetic formula
//! whose models are exactly the letter-count vectors of accepted words.
//!
//!     cargo run --example parikh_image

use sfasat::parikh::{flow_of_model, parikh_formula, parikh_members_upto, realize_path};
use sfasat::presburger::{pa_solve, PaFormula, PresburgerFormula, Term};
use sfasat::sfa::propositionalize;
use sfasat::sfa_file::load_sfa_file;

fn main() -> sfasat::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/odd_pos.sfa");
    let file = load_sfa_file(path)?;
    let (_, ta) = propositionalize(&file.sfa);

    let rho = parikh_formula(&ta);
    println!("letter variables: {:?}", rho.letter_vars);
    println!("formula size: {} nodes", rho.formula.node_count());

    // every count vector of a short accepted word is a model, and no
    // other vector is
    let members = parikh_members_upto(&ta, 6)?;
    println!("count vectors of words up to length 6: {members:?}");

    for k in 0..=4usize {
        let pin = PaFormula::eq(Term::var(rho.letter_vars[0].clone()), Term::int(k as i64));
        let pinned = PresburgerFormula::new(
            rho.formula.exists.clone(),
            PaFormula::and(vec![rho.formula.matrix.clone(), pin]),
        );
        let model = pa_solve(&pinned)?;
        let member = members.contains(&vec![k]);
        println!("count [{k}]: in image = {}, enumerated = {member}", model.is_some());
        assert_eq!(model.is_some(), member);

        // a model carries an accepting flow, and the flow walks a path
        if let Some(model) = model {
            let flow = flow_of_model(&ta, &model)?;
            let letters = realize_path(&ta, &flow)?;
            println!("  realized letter sequence: {letters:?}");
        }
    }
    Ok(())
}
