use hilbert_eisenstein::cusp_geometry::{enumerate_cusps, il_class, normalized_representatives};
use hilbert_eisenstein::{Field, Ideal};

fn main() -> hilbert_eisenstein::Result<()> {
    let f = Field::quadratic(10)?;
    let o = Ideal::unit(&f);
    let level = Ideal::from_int(&f, 3)?;
    for (lambda, t) in normalized_representatives(&o, &level)?.iter().enumerate() {
        println!("lambda = {lambda}: t = {:?}", t.basis().iter().map(|x| f.format_elt(x)).collect::<Vec<_>>());
        for c in enumerate_cusps(t, lambda, &o, &level)? {
            println!("  {}  il class {:?}  verified {}", c.matrix.display(&f), il_class(&c.matrix, &t.inv())?, c.verify(t, &o)?);
        }
    }
    Ok(())
}
