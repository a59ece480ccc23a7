//! Named verification suites, shared by `hmf verify` and the acceptance tests.
//!
//! Every suite returns a list of exact or toleranced checks. Reports contain no
//! timings so that the same seed always gives the same document.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value as Json};

use crate::arith::rat;
use crate::class_group::{class_group, is_principal};
use crate::cusp_geometry::{
    basis_determinant, enumerate_cusps, il_class, il_ideal, il_ideal_variant, lattice_determinant, positive_basis,
    random_borel, random_in, random_sl2, sl2z, DetConstraint, GroupSpec, Mat2,
};
use crate::cyclo::{Cyclo, CycloSum};
use crate::eisenstein::{coefficient, constant_at_infinity, constant_term_table, constant_under_slash, EisensteinSpec};
use crate::error::{Error, Result};
use crate::field_core::Field;
use crate::hecke_l::{l_special_value, SpecialValueOptions};
use crate::ideal_arith::{different, ideals_up_to, Ideal};
use crate::oracle_hilbert::SeriesEvaluator;
use crate::oracle_q::{cusp_covering_set, horocycle_mean, Approx, QEisenstein};
use crate::ray_class::{narrow_class_group, ray_class_group, RayClassCharacter};

/// Version of the suite definitions; bump when a suite's checks change.
pub const SUITE_VERSION: u32 = 1;

pub const SUITES: &[&str] = &[
    "exact-q",
    "q10-ledger",
    "formula-oracle-q",
    "formula-oracle-f",
    "lvalue-reconstruction",
    "gauss-sums",
    "cusps",
    "equivariance",
    "properties",
];

#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), pass, detail: detail.into() }
    }
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    pub fn to_json(&self) -> Json {
        json!({
            "suite": self.suite,
            "version": SUITE_VERSION,
            "seed": self.seed,
            "passed": self.passed(),
            "checks": self.checks.iter().map(|c| json!({"name": c.name, "pass": c.pass, "detail": c.detail})).collect::<Vec<_>>(),
        })
    }
}

pub fn run_suite(name: &str, seed: u64) -> Result<SuiteReport> {
    let checks = match name {
        "exact-q" => exact_q()?,
        "q10-ledger" => q10_ledger()?,
        "formula-oracle-q" => formula_oracle_q()?,
        "formula-oracle-f" => formula_oracle_f(40.0)?,
        "lvalue-reconstruction" => lvalue_reconstruction()?,
        "gauss-sums" => gauss_sums()?,
        "cusps" => cusps(seed, 500)?,
        "equivariance" => equivariance(seed, 200)?,
        "properties" => properties(seed, 1000)?,
        _ => return Err(Error::Invalid(format!("unknown suite '{name}'; known: {}", SUITES.join(", ")))),
    };
    Ok(SuiteReport { suite: name.to_string(), seed, checks })
}

fn approx_of(v: &crate::eisenstein::Value) -> C64 {
    let b = v.to_cball(64);
    C64::new(b.re.mid.to_f64(), b.im.mid.to_f64())
}

fn primitive_chars(f: &Arc<Field>, m: &Ideal) -> Result<Vec<RayClassCharacter>> {
    if m.is_unit() {
        return Ok(vec![narrow_class_group(f)?.trivial_character()]);
    }
    Ok(ray_class_group(f, m)?.characters().into_iter().filter(|c| c.is_primitive()).collect())
}

pub fn exact_q() -> Result<Vec<Check>> {
    let q = Field::rationals();
    let mut out = Vec::new();
    for (k, want) in [(4, rat(1, 240)), (6, rat(-1, 504))] {
        let s = EisensteinSpec::trivial(&q, k)?;
        let got = constant_at_infinity(&s, 0)?.value.as_rational();
        let pass = got.as_ref() == Some(&want);
        let shown = got.map(|g| g.to_string()).unwrap_or_else(|| "not exact".into());
        out.push(Check::new(format!("c_inf(E_{k}) over Q"), pass, format!("{shown} (want {want})")));
    }
    Ok(out)
}

pub fn q10_ledger() -> Result<Vec<Check>> {
    let f = Field::quadratic(10)?;
    let e = |s: &str| f.parse_elt(s);
    let gens = |v: &[&str]| -> Result<Ideal> { Ideal::from_generators(&f, &v.iter().map(|s| e(s)).collect::<Result<Vec<_>>>()?) };
    let mut out = Vec::new();
    let disc = f.discriminant().clone();
    out.push(Check::new("discriminant", disc == 40.into(), format!("d_F = {disc}")));
    let dd = different(&f);
    let sqrt_gen = Ideal::principal(&f, &e("2*sqrt(10)")?)?;
    let shown = dd.basis().iter().map(|x| f.format_elt(x)).collect::<Vec<_>>().join(", ");
    out.push(Check::new("different is (2 sqrt10)", dd == sqrt_gen, format!("Z-basis [{shown}]")));
    let p5 = gens(&["5", "sqrt(10)"])?;
    let p = gens(&["2", "sqrt(10)"])?;
    let q3 = gens(&["3", "sqrt(10) - 1"])?;
    let mut fac = dd.factor()?;
    fac.sort_by_key(|(q, _)| q.norm());
    let want = vec![(p.clone(), 3), (p5.clone(), 1)];
    let pass = fac == want;
    let shown: Vec<String> = fac.iter().map(|(q, e)| format!("N={}^{e}", q.norm())).collect();
    out.push(Check::new("different = (5, sqrt10) p^3", pass, shown.join(" ")));
    let lhs = Ideal::principal(&f, &e("2 + sqrt(10)")?)?;
    out.push(Check::new("(2 + sqrt10) = (3, sqrt10 - 1) p", lhs == q3.mul(&p), String::new()));
    let (principal, _) = is_principal(&p)?;
    out.push(Check::new("p = (2, sqrt10) is not principal", !principal, format!("is_principal = {principal}")));
    let cg = class_group(&f)?;
    out.push(Check::new("class number", cg.order() == 2, format!("h = {}", cg.order())));
    let m = Mat2::parse(&f, "2 + sqrt(10), (10 + sqrt(10))/20, 2*sqrt(10), 1")?;
    let o = Ideal::unit(&f);
    let member = GroupSpec::new(o.clone(), o.clone(), DetConstraint::Unit).is_member(&m);
    out.push(Check::new("displayed matrix lies in Gamma(O; O, O)", member, m.display(&f)));
    let il = il_ideal(&m, &o)?;
    let triv = cg.dlog(&il)?.iter().all(|&x| x == 0);
    out.push(Check::new("il with d^-1 is the trivial class", il == o && triv, "2 sqrt10 d^-1 + (2 + sqrt10) O = O"));
    let var = il_ideal_variant(&m, &o)?;
    let nontriv = cg.dlog(&var)? == cg.dlog(&p)? && cg.dlog(&p)?.iter().any(|&x| x != 0);
    out.push(Check::new("il with d gives the class of p", var == p && nontriv, String::new()));
    Ok(out)
}

pub fn formula_oracle_q() -> Result<Vec<Check>> {
    let q = Field::rationals();
    let mut out = Vec::new();
    for n in [1i64, 5, 8, 12] {
        let mut worst: f64 = 0.0;
        let mut count = 0;
        let mut fail = None;
        for u in (1..=n).filter(|u| n % u == 0) {
            for eta in primitive_chars(&q, &Ideal::from_int(&q, u)?)? {
                for psi in primitive_chars(&q, &Ideal::from_int(&q, n / u)?)? {
                    for k in [3u32, 4] {
                        let Ok(spec) = EisensteinSpec::new(eta.clone(), psi.clone(), k as i64) else { continue };
                        let oracle = QEisenstein::new(&eta, &psi, k)?;
                        for g in cusp_covering_set(n) {
                            let a = sl2z(&q, g)?;
                            let fz = approx_of(&constant_under_slash(&spec, 0, &a)?.value);
                            let o = oracle.slash_and_extract(g, 12, 10.0)?;
                            let d = o.distance(fz);
                            worst = worst.max(d);
                            count += 1;
                            if !(d < 1e-6) && fail.is_none() {
                                fail = Some(format!("u={u} k={k} g={g:?}: formula {fz} oracle {}", o.value));
                            }
                        }
                    }
                }
            }
        }
        let detail = fail.unwrap_or_else(|| format!("{count} comparisons, max |delta| = {worst:.2e}"));
        out.push(Check::new(format!("N = {n}"), count > 0 && worst < 1e-6, detail));
    }
    Ok(out)
}

/// Series oracle against the closed formulas at every cusp class: Q(sqrt5) with box `b`, Q(sqrt10) with box 25.
pub fn formula_oracle_f(b: f64) -> Result<Vec<Check>> {
    let mut out = oracle_f_checks(5, b, 10.0)?;
    out.extend(oracle_f_checks(10, 25.0, 10.0)?);
    Ok(out)
}

/// `E_4(id, id)` over `Q(sqrt d)`: truncated series at height `t` against the exact table, relative tolerance 1e-3.
pub fn oracle_f_checks(d: i64, bound: f64, t: f64) -> Result<Vec<Check>> {
    let f = Field::quadratic(d)?;
    let s = EisensteinSpec::trivial(&f, 4)?.with_precision(96);
    let mut out = Vec::new();
    for r in constant_term_table(&s)? {
        let want = approx_of(&r.value);
        let ev = SeriesEvaluator::new(&s, r.lambda, Some(&r.matrix), bound)?;
        let c = ev.extract_constant(&[t], 1)?;
        let d_rel = (c.value.value - want).norm() / (1.0 + want.norm());
        let label = match &r.cusp_label {
            None => "infinity".to_string(),
            Some(l) => format!("N(r0)={}", l.norm()),
        };
        out.push(Check::new(
            format!("Q(sqrt{d}) k=4 lambda={} cusp {label}", r.lambda),
            d_rel < 1e-3,
            format!("oracle {:.9} formula {:.9} rel {d_rel:.2e} (B={bound}, {} terms)", c.value.value.re, want.re, c.terms),
        ));
    }
    Ok(out)
}

pub fn lvalue_reconstruction() -> Result<Vec<Check>> {
    let f = Field::quadratic(5)?;
    let chi = narrow_class_group(&f)?.trivial_character();
    let opts = SpecialValueOptions { prec: 128, gate_prec: 192, ..Default::default() };
    let v = l_special_value(&chi, 2, &opts)?;
    let got = v.exact_rational();
    let pass = got == Some(rat(1, 30)) && v.method == "functional-equation+reconstruction";
    Ok(vec![Check::new(
        "zeta_Q(sqrt5)(-1)",
        pass,
        format!("{} via {}", got.map(|g| g.to_string()).unwrap_or_else(|| v.value.to_string()), v.method),
    )])
}

pub fn gauss_sums() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (f, bound) in [(Field::rationals(), 50u64), (Field::quadratic(10)?, 30)] {
        let mut worst: f64 = 0.0;
        let mut count = 0;
        let mut fail = None;
        for b in ideals_up_to(&f, bound)? {
            let nb = b.norm();
            for chi in primitive_chars(&f, &b)? {
                let t = chi.gauss_sum()?;
                let n2 = t.to_cball(128).norm_sqr();
                let err = (n2.mid.to_f64() - nb.to_f64().unwrap()).abs() + n2.rad;
                let exact_ok = t.mul(&t.conj()).as_rational().as_ref() == Some(&nb);
                worst = worst.max(err);
                count += 1;
                if (!exact_ok || !(err < 1e-20)) && fail.is_none() {
                    fail = Some(format!("modulus of norm {nb}: |tau|^2 off by {err:e}"));
                }
            }
        }
        let detail = fail.unwrap_or_else(|| format!("{count} primitive characters, max error {worst:.1e}"));
        out.push(Check::new(format!("{} moduli up to norm {bound}", f.name()), count > 0 && worst < 1e-20, detail));
    }
    Ok(out)
}

pub fn cusps(seed: u64, samples: usize) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for f in [Field::rationals(), Field::quadratic(5)?, Field::quadratic(10)?] {
        let o = Ideal::unit(&f);
        let h = class_group(&f)?.order() as usize;
        let reps = enumerate_cusps(&o, 0, &o, &o)?;
        let labels: Vec<Vec<i64>> = reps.iter().map(|r| il_class(&r.matrix, &o)).collect::<Result<_>>()?;
        let distinct = labels.iter().enumerate().all(|(i, a)| labels[..i].iter().all(|b| b != a));
        out.push(Check::new(
            format!("{}: cusp classes", f.name()),
            reps.len() == h && distinct,
            format!("{} classes, h = {h}", reps.len()),
        ));
        let cs = class_group(&f)?.representatives(None)?;
        let mut bad = None;
        for i in 0..samples {
            let c = &cs[i % cs.len()];
            let g = GroupSpec::new(o.clone(), c.inv(), DetConstraint::One).random_element(&mut rng, 4, 2);
            let m = random_sl2(&f, &mut rng, 3, 3);
            let b = random_borel(&f, &mut rng, 3);
            if il_class(&g.mul(&f, &m).mul(&f, &b), c)? != il_class(&m, c)? && bad.is_none() {
                bad = Some(format!("sample {i}: m = {}", m.display(&f)));
            }
        }
        out.push(Check::new(
            format!("{}: il invariance", f.name()),
            bad.is_none(),
            bad.unwrap_or_else(|| format!("{samples} random (g, m, b)")),
        ));
    }
    Ok(out)
}

pub fn equivariance(seed: u64, samples: usize) -> Result<Vec<Check>> {
    let q = Field::rationals();
    let id = narrow_class_group(&q)?.trivial_character();
    let quad = ray_class_group(&q, &Ideal::from_int(&q, 5)?)?
        .characters()
        .into_iter()
        .find(|c| c.order() == 2)
        .ok_or_else(|| Error::Verification("no quadratic character mod 5".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (name, eta, psi) in [("(id, chi5)", id.clone(), quad.clone()), ("(chi5, id)", quad.clone(), id.clone())] {
        let s = EisensteinSpec::new(eta, psi, 4)?;
        let level = s.group(0, &s.level);
        let full = s.group(0, &Ideal::unit(&q));
        let mut bad = None;
        for i in 0..samples {
            let g = level.random_element(&mut rng, 6, 3);
            let a = full.random_element(&mut rng, 5, 3);
            let lhs = constant_under_slash(&s, 0, &g.mul(&q, &a))?.value;
            let rhs = constant_under_slash(&s, 0, &a)?.value;
            let e = s.eta.eval_f(&g.d)?.zip(s.psi.eval_f(&g.d)?).map(|(x, y)| x + y);
            let ok = match (e, lhs.exact(), rhs.exact()) {
                (Some(e), Some(l), Some(r)) => *l == r.mul(&Cyclo::root_of_unity(&e)),
                _ => false,
            };
            if !ok && bad.is_none() {
                bad = Some(format!("sample {i}: gamma = {}", g.display(&q)));
            }
        }
        out.push(Check::new(
            format!("F=Q N=5 k=4 {name}"),
            bad.is_none(),
            bad.unwrap_or_else(|| format!("{samples} random gamma, exact equality")),
        ));
    }
    Ok(out)
}

fn random_integral_ideal(f: &Arc<Field>, rng: &mut ChaCha8Rng, h: i64) -> Result<Ideal> {
    let o = Ideal::unit(f);
    loop {
        let a = random_in(&o, rng, h);
        let b = random_in(&o, rng, h);
        if a.is_zero() && b.is_zero() {
            continue;
        }
        let gens: Vec<_> = [a, b].into_iter().filter(|x| !x.is_zero()).collect();
        return Ideal::from_generators(f, &gens);
    }
}

fn property_check(name: &str, n: usize, first_failure: Option<String>) -> Check {
    Check::new(name, first_failure.is_none(), first_failure.unwrap_or_else(|| format!("{n} instances")))
}

pub fn properties(seed: u64, n: usize) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fields = [Field::quadratic(5)?, Field::quadratic(10)?, Field::quadratic(2)?, Field::rationals()];
    let mut out = Vec::new();

    let mut bad = None;
    for i in 0..n {
        let f = &fields[i % fields.len()];
        let a = random_integral_ideal(f, &mut rng, 6)?;
        let b = random_integral_ideal(f, &mut rng, 6)?;
        let c = random_integral_ideal(f, &mut rng, 6)?;
        let laws = [
            a.mul(&b).mul(&c) == a.mul(&b.mul(&c)),
            a.mul(&b.add(&c)) == a.mul(&b).add(&a.mul(&c)),
            a.mul(&a.inv()) == Ideal::unit(f),
            a.mul(&b).norm() == a.norm() * b.norm(),
            a.add(&b).mul(&a.intersect(&b)) == a.mul(&b),
            a.div(&b).mul(&b) == a,
        ];
        if let Some(j) = laws.iter().position(|ok| !ok) {
            bad.get_or_insert(format!("{}: law {j} fails for N(a)={}, N(b)={}", f.name(), a.norm(), b.norm()));
        }
    }
    out.push(property_check("ideal arithmetic laws", n, bad));

    let mut bad = None;
    for i in 0..n {
        let f = &fields[i % fields.len()];
        let a = random_integral_ideal(f, &mut rng, 8)?;
        let fac = a.factor()?;
        let back = fac.iter().fold(Ideal::unit(f), |acc, (p, e)| acc.mul(&p.pow(*e)));
        let primes_ok = fac.iter().all(|(p, _)| p.is_integral() && !p.is_unit());
        if (back != a || !primes_ok) && bad.is_none() {
            bad = Some(format!("{}: factor round trip fails at N(a)={}", f.name(), a.norm()));
        }
    }
    out.push(property_check("factor round trip", n, bad));

    let f5 = fields[0].clone();
    let p29 = crate::ideal_arith::primes_above(&f5, 29)?.remove(0);
    let psi = ray_class_group(&f5, &p29)?
        .characters()
        .into_iter()
        .find(|c| c.is_primitive() && c.signature().is_totally_positive() && c.order() > 1)
        .ok_or_else(|| Error::Verification("no even character mod a prime over 29".into()))?;
    let specs = [
        EisensteinSpec::trivial(&f5, 4)?,
        EisensteinSpec::new(narrow_class_group(&f5)?.trivial_character(), psi, 2)?,
    ];
    let small = ideals_up_to(&f5, 60)?;
    let mut bad = None;
    let mut done = 0;
    while done < n {
        let a = &small[rng.gen_range(0..small.len())];
        let b = &small[rng.gen_range(0..small.len())];
        if !a.is_coprime(b) {
            continue;
        }
        let s = &specs[done % specs.len()];
        let lhs = coefficient(s, &a.mul(b))?;
        let rhs = coefficient(s, a)?.mul(&coefficient(s, b)?);
        if lhs != rhs && bad.is_none() {
            bad = Some(format!("k={}: N(m)={}, N(n)={}", s.k, a.norm(), b.norm()));
        }
        done += 1;
    }
    out.push(property_check("coefficient multiplicativity", n, bad));

    let moduli: Vec<Ideal> = ideals_up_to(&f5, 30)?;
    let groups: Vec<_> = moduli.iter().map(|m| ray_class_group(&f5, m)).collect::<Result<_>>()?;
    let chars: Vec<Vec<RayClassCharacter>> = groups.iter().map(|g| g.characters()).collect();
    let mut bad = None;
    let mut done = 0;
    while done < n {
        let j = rng.gen_range(0..moduli.len());
        let a = &small[rng.gen_range(0..small.len())];
        if !a.is_coprime(&moduli[j]) {
            continue;
        }
        let g = &groups[j];
        let mut acc = CycloSum::new(g.structure.iter().product::<u64>().max(1));
        for chi in &chars[j] {
            acc.add_root(&chi.eval_ideal(a)?.unwrap(), &BigRational::one());
        }
        let sum = acc.finish();
        let trivial = g.dlog(a)?.iter().all(|&x| x == 0);
        let want = if trivial { Cyclo::int(chars[j].len() as i64) } else { Cyclo::zero() };
        if sum != want && bad.is_none() {
            bad = Some(format!("modulus of norm {}: sum {sum} want {want}", moduli[j].norm()));
        }
        done += 1;
    }
    out.push(property_check("character orthogonality", n, bad));

    let mut bad = None;
    for i in 0..n {
        let modes = rng.gen_range(1..=8i64);
        let coeffs: Vec<C64> = (0..2 * modes + 1).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let t = rng.gen_range(0.05..0.5);
        let m = rng.gen_range(-modes..=modes);
        let cs = coeffs.clone();
        let series = move |z: C64| -> Result<Approx> {
            let v = cs.iter().enumerate().map(|(j, c)| c * (C64::new(0.0, 2.0 * std::f64::consts::PI * (j as i64 - modes) as f64) * z).exp()).sum();
            Ok(Approx::new(v, 0.0))
        };
        let got = horocycle_mean(series, 1.0, modes, t, m as f64)?;
        let want = coeffs[(m + modes) as usize];
        let scale = coeffs.iter().map(|c| c.norm()).sum::<f64>() * (2.0 * std::f64::consts::PI * modes as f64 * 2.0 * t).exp();
        if (got.value - want).norm() > 1e-12 * scale && bad.is_none() {
            bad = Some(format!("instance {i}: modes={modes} m={m}: got {} want {want}", got.value));
        }
    }
    out.push(property_check("horocycle projection exactness", n, bad));

    let mut bad = None;
    for i in 0..n {
        let f = &fields[i % 3];
        let a = random_integral_ideal(f, &mut rng, 5)?;
        let den = rng.gen_range(1..=4i64);
        let l = a.scale(&f.from_rational(rat(1, den)))?;
        let v = positive_basis(&l)?;
        let ok = v.len() == f.degree()
            && v.iter().all(|x| f.is_totally_positive(x) && l.contains(x))
            && basis_determinant(&v).abs() == lattice_determinant(&l);
        if !ok && bad.is_none() {
            bad = Some(format!("{}: N(L)={}", f.name(), l.norm()));
        }
    }
    out.push(property_check("positive_basis postconditions", n, bad));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ledger_and_exact_suites_pass() {
        for s in ["exact-q", "q10-ledger", "lvalue-reconstruction"] {
            let r = run_suite(s, 1).unwrap();
            assert!(r.passed(), "{s}: {:?}", r.failures());
        }
    }

    #[test]
    fn small_property_run() {
        let checks = properties(3, 40).unwrap();
        assert!(checks.iter().all(|c| c.pass), "{checks:?}");
    }

    #[test]
    fn unknown_suite_is_rejected() {
        assert!(run_suite("nope", 0).is_err());
    }
}
