use hilbert_eisenstein::eisenstein::{coefficient, constant_term_table, EisensteinSpec};
use hilbert_eisenstein::ideal_arith::ideals_up_to;
use hilbert_eisenstein::Field;

fn main() -> hilbert_eisenstein::Result<()> {
    let f = Field::quadratic(10)?;
    let s = EisensteinSpec::trivial(&f, 2)?;
    println!("E_2 over {}", f.name());
    for r in constant_term_table(&s)? {
        let cusp = r.cusp_label.as_ref().map(|c| format!("class of N = {}", c.norm())).unwrap_or_else(|| "infinity".into());
        let v = r.value.exact().map(|c| c.to_string()).unwrap_or_else(|| r.value.to_cball(64).to_string());
        println!("  lambda {} cusp {cusp:<16} c(0) = {v:<10} via {}", r.lambda, r.formula_path);
    }
    for n in ideals_up_to(&f, 10)? {
        println!("  c({:?}) = {}", n.basis().iter().map(|x| f.format_elt(x)).collect::<Vec<_>>(), coefficient(&s, &n)?);
    }
    Ok(())
}
