use hilbert_eisenstein::ray_class::ray_class_group;
use hilbert_eisenstein::{Field, Ideal};

fn main() -> hilbert_eisenstein::Result<()> {
    let f = Field::quadratic(5)?;
    let m = Ideal::parse(&f, "[11]")?;
    let g = ray_class_group(&f, &m)?;
    println!("narrow ray class group mod 11 over {}: {:?}", f.name(), g.structure);
    for (i, chi) in g.characters().iter().enumerate().take(8) {
        let cond = chi.conductor().norm();
        let line = if chi.is_primitive() {
            let t = chi.gauss_sum()?;
            format!("|tau|^2 = {}", t.mul(&t.conj()).as_rational().unwrap())
        } else {
            "imprimitive".to_string()
        };
        println!("  chi_{i}: order {:>2}  N(cond) = {cond:<4} {line}", chi.order());
    }
    Ok(())
}
