use hilbert_eisenstein::hecke_l::{l_special_value, SpecialValueOptions};
use hilbert_eisenstein::ray_class::{narrow_class_group, ray_class_group};
use hilbert_eisenstein::{Field, Ideal};

fn main() -> hilbert_eisenstein::Result<()> {
    let opts = SpecialValueOptions::default();
    for d in [5, 13, 10] {
        let f = Field::quadratic(d)?;
        let zeta = narrow_class_group(&f)?.trivial_character();
        for k in [2, 4] {
            let v = l_special_value(&zeta, k, &opts)?;
            let shown = v.exact.map(|c| c.to_string()).unwrap_or_else(|| v.value.to_string());
            println!("zeta_{}({}) = {shown}  [{}]", f.name(), 1 - k, v.method);
        }
    }
    let q = Field::rationals();
    let g = ray_class_group(&q, &Ideal::from_int(&q, 5)?)?;
    for chi in g.characters().iter().filter(|c| c.is_primitive()) {
        let v = l_special_value(chi, 2, &opts)?;
        println!("L(chi mod 5 of order {}, -1) = {}", chi.order(), v.exact.unwrap());
    }
    Ok(())
}
