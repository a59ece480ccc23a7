use hilbert_eisenstein::cusp_geometry::sl2z;
use hilbert_eisenstein::eisenstein::{constant_under_slash, EisensteinSpec};
use hilbert_eisenstein::oracle_q::{cusp_covering_set, QEisenstein};
use hilbert_eisenstein::ray_class::{narrow_class_group, ray_class_group};
use hilbert_eisenstein::{Field, Ideal};

fn main() -> hilbert_eisenstein::Result<()> {
    let q = Field::rationals();
    let id = narrow_class_group(&q)?.trivial_character();
    let chi = ray_class_group(&q, &Ideal::from_int(&q, 5)?)?.characters().into_iter().find(|c| c.order() == 2).unwrap();
    let spec = EisensteinSpec::new(chi.clone(), id.clone(), 4)?;
    let oracle = QEisenstein::new(&chi, &id, 4)?;
    for g in cusp_covering_set(5) {
        let formula = constant_under_slash(&spec, 0, &sl2z(&q, g)?)?;
        let lattice = oracle.slash_and_extract(g, 12, 10.0)?;
        println!(
            "gamma = {g:?}: formula {:.12} lattice sum {:.12} +/- {:.1e}",
            formula.value.to_cball(64).re.to_f64(),
            lattice.value.re,
            lattice.radius
        );
    }
    Ok(())
}
