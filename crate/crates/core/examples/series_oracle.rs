use hilbert_eisenstein::eisenstein::{constant_term_table, EisensteinSpec};
use hilbert_eisenstein::oracle_hilbert::SeriesEvaluator;
use hilbert_eisenstein::Field;

fn main() -> hilbert_eisenstein::Result<()> {
    let f = Field::quadratic(10)?;
    let s = EisensteinSpec::trivial(&f, 4)?;
    for r in constant_term_table(&s)? {
        let exact = r.value.exact().unwrap().to_string();
        for b in [10.0, 20.0] {
            let ev = SeriesEvaluator::new(&s, r.lambda, Some(&r.matrix), b)?;
            let c = ev.extract_constant(&[10.0], 1)?;
            println!("lambda {} {}: B = {b:<4} series {:.10}  exact {exact}  ({} terms)", r.lambda, r.matrix.display(&f), c.value.value.re, c.terms);
        }
    }
    Ok(())
}
