use std::sync::Arc;

use hilbert_eisenstein::cusp_geometry::sl2z;
use hilbert_eisenstein::eisenstein::{constant_under_slash, EisensteinSpec};
use hilbert_eisenstein::field_core::Field;
use hilbert_eisenstein::ideal_arith::Ideal;
use hilbert_eisenstein::oracle_q::{cusp_covering_set, QEisenstein};
use hilbert_eisenstein::ray_class::{narrow_class_group, ray_class_group, RayClassCharacter};
use num_complex::Complex64;

fn primitive_chars(q: &Arc<Field>, u: i64) -> Vec<RayClassCharacter> {
    if u == 1 {
        return vec![narrow_class_group(q).unwrap().trivial_character()];
    }
    let g = ray_class_group(q, &Ideal::from_int(q, u).unwrap()).unwrap();
    g.characters().into_iter().filter(|c| c.is_primitive()).collect()
}

#[test]
fn constant_terms_match_lattice_sums() {
    let q = Field::rationals();
    let mut checked = 0;
    for n in [1i64, 5, 8, 12] {
        for u in (1..=n).filter(|u| n % u == 0) {
            for eta in primitive_chars(&q, u) {
                for psi in primitive_chars(&q, n / u) {
                    for k in [3u32, 4] {
                        let Ok(spec) = EisensteinSpec::new(eta.clone(), psi.clone(), k as i64) else { continue };
                        let oracle = QEisenstein::new(&eta, &psi, k).unwrap();
                        for g in cusp_covering_set(n) {
                            let a = sl2z(&q, g).unwrap();
                            let f = constant_under_slash(&spec, 0, &a).unwrap().value.to_cball(64);
                            let fz = Complex64::new(f.re.mid.to_f64(), f.im.mid.to_f64());
                            let o = oracle.slash_and_extract(g, 12, 10.0).unwrap();
                            assert!(
                                o.distance(fz) < 1e-6,
                                "N={n} u={u} k={k} eta={:?} psi={:?} g={g:?}: formula {fz} oracle {:?}",
                                eta.images(),
                                psi.images(),
                                o
                            );
                            checked += 1;
                        }
                    }
                }
            }
        }
    }
    assert!(checked > 20);
}
