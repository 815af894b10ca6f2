//! Writes the mixed-integer semidefinite model of a small instance and
//! reads it back.

use infoplan::estimator::InfoObjective;
use infoplan::exact::{export_misdp, parse_misdp, MisdpEncoding};
use infoplan::graph::GridSpec;
use infoplan::instance::filtered_prior;
use infoplan::model::DiffusionField;

fn main() -> infoplan::Result<()> {
    let model = DiffusionField::new(2, 2).build()?;
    let g = GridSpec::new(2, 2).build()?;
    let prior = filtered_prior(&model, 10.0, 12, None)?;
    let objective = InfoObjective::new(&prior, &model)?;

    let enc = MisdpEncoding::build(&g, 45.0);
    let text = export_misdp(&enc, &objective)?;
    for line in text.lines().take(12) {
        println!("{line}");
    }
    println!("... {} lines", text.lines().count());
    let doc = parse_misdp(&text)?;
    println!(
        "parsed back: {} areas, {} edge variables, {} constraints, {} LMI terms",
        doc.n_areas,
        doc.q.len(),
        doc.constraints.len(),
        doc.lmi_terms.len()
    );
    Ok(())
}
