use hilbert_eisenstein::class_group::class_group;
use hilbert_eisenstein::ideal_arith::different;
use hilbert_eisenstein::ray_class::narrow_class_group;
use hilbert_eisenstein::Field;

fn main() -> hilbert_eisenstein::Result<()> {
    for d in [2, 5, 10, 15, 79] {
        let f = Field::quadratic(d)?;
        let eps = &f.units()[0];
        println!(
            "{:<14} d_F = {:<4} eps = {:<12} N(eps) = {:>2}  h = {}  h+ = {}  N(d) = {}",
            f.name(),
            f.discriminant(),
            f.format_elt(eps),
            f.norm(eps),
            class_group(&f)?.order(),
            narrow_class_group(&f)?.order(),
            different(&f).norm(),
        );
    }
    Ok(())
}
