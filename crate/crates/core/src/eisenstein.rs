//! Normalized coefficients and constant terms of `E_k(eta, psi)` at every cusp class.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::{json, Value as Json};

use crate::arith::qint;
#[cfg(test)]
use crate::arith::rat;
use crate::class_group::class_group;
use crate::cusp_geometry::{cusp_matrix, enumerate_cusps, normalized_representatives, DetConstraint, GroupSpec, Mat2};
use crate::cyclo::{Cyclo, CycloSum};
use crate::error::{invalid, Error, Result};
use crate::field_core::{Field, SignVector};
use crate::hecke_l::{l_special_value, LValue, SpecialValueOptions};
use crate::ideal_arith::{different, Ideal};
use crate::precision::CBall;
use crate::ray_class::{narrow_class_group, ray_class_group, RayClassCharacter};

/// An exact cyclotomic number or a certified complex ball.
#[derive(Clone, Debug)]
pub enum Value {
    Exact(Cyclo),
    Ball(CBall),
}

impl Value {
    pub fn zero() -> Value {
        Value::Exact(Cyclo::zero())
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Value::Exact(_))
    }

    pub fn exact(&self) -> Option<&Cyclo> {
        match self {
            Value::Exact(c) => Some(c),
            Value::Ball(_) => None,
        }
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        self.exact().and_then(|c| c.as_rational())
    }

    pub fn to_cball(&self, prec: u32) -> CBall {
        match self {
            Value::Exact(c) => c.to_cball(prec),
            Value::Ball(b) => b.clone(),
        }
    }

    pub fn mul_exact(&self, c: &Cyclo) -> Value {
        match self {
            Value::Exact(x) => Value::Exact(x.mul(c)),
            Value::Ball(b) => Value::Ball(b.mul(&c.to_cball(b.prec()))),
        }
    }

    /// `|self - o|` bounded above; 0 for equal exact values.
    pub fn distance(&self, o: &Value, prec: u32) -> f64 {
        if let (Value::Exact(a), Value::Exact(b)) = (self, o) {
            if a == b {
                return 0.0;
            }
        }
        self.to_cball(prec).distance_bound(&o.to_cball(prec))
    }

    pub fn to_json(&self) -> Json {
        match self {
            Value::Exact(c) => json!({"exact": c.to_string()}),
            Value::Ball(b) => b.to_json(),
        }
    }
}

impl From<&LValue> for Value {
    fn from(l: &LValue) -> Value {
        match &l.exact {
            Some(c) => Value::Exact(c.clone()),
            None => Value::Ball(l.value.clone()),
        }
    }
}

/// Data defining `E_k(eta, psi)`.
pub struct EisensteinSpec {
    pub field: Arc<Field>,
    pub k: i64,
    pub eta: RayClassCharacter,
    pub psi: RayClassCharacter,
    /// `m = a b`.
    pub level: Ideal,
    /// `t_lambda` in narrow class order.
    pub t: Vec<Ideal>,
    pub options: SpecialValueOptions,
    lcache: Mutex<HashMap<String, LValue>>,
}

fn char_key(c: &RayClassCharacter) -> String {
    format!("{:?}", c)
}

impl EisensteinSpec {
    /// Validates primitivity and the parity condition `q + r = (k, ..., k) mod 2`.
    pub fn new(eta: RayClassCharacter, psi: RayClassCharacter, k: i64) -> Result<EisensteinSpec> {
        let f = eta.field().clone();
        if !Arc::ptr_eq(&f, psi.field()) && f.name() != psi.field().name() {
            return invalid("eta and psi live over different fields");
        }
        if k < 1 {
            return invalid("weight must be >= 1");
        }
        if !eta.is_primitive() || !psi.is_primitive() {
            return invalid("eta and psi must be primitive (primitivize first)");
        }
        let d = f.degree();
        let par = eta.signature().mul(psi.signature());
        let want = if k % 2 == 0 { SignVector(0) } else { SignVector((1u32 << d) - 1) };
        if par != want {
            return invalid(format!(
                "parity: signatures {:?} + {:?} do not match weight {k}",
                eta.signature().signs(d),
                psi.signature().signs(d)
            ));
        }
        let level = eta.modulus().mul(psi.modulus());
        let t = if f.is_rational() {
            // the lattice convention under which Gamma^1 is SL_2(Z)
            vec![Ideal::unit(&f)]
        } else {
            normalized_representatives(psi.modulus(), &level)?
        };
        Ok(EisensteinSpec {
            field: f,
            k,
            eta,
            psi,
            level,
            t,
            options: SpecialValueOptions::default(),
            lcache: Mutex::new(HashMap::new()),
        })
    }

    pub fn with_precision(mut self, prec: u32) -> Self {
        self.options.prec = prec;
        self.options.gate_prec = prec + 64;
        self
    }

    /// Trivial characters mod `O`.
    pub fn trivial(f: &Arc<Field>, k: i64) -> Result<EisensteinSpec> {
        let g = narrow_class_group(f)?;
        EisensteinSpec::new(g.trivial_character(), g.trivial_character(), k)
    }

    pub fn degree(&self) -> usize {
        self.field.degree()
    }

    pub fn narrow_class_number(&self) -> usize {
        self.t.len()
    }

    /// `Gamma^1_lambda(n)` for an integral ideal `n`.
    pub fn group(&self, lambda: usize, n: &Ideal) -> GroupSpec {
        GroupSpec::new(n.clone(), self.t[lambda].clone(), DetConstraint::One)
    }

    fn l_value(&self, chi: &RayClassCharacter, s_k: i64) -> Result<LValue> {
        let key = format!("{}|{}", char_key(chi), s_k);
        if let Some(v) = self.lcache.lock().unwrap().get(&key) {
            return Ok(v.clone());
        }
        let v = l_special_value(chi, s_k, &self.options)?;
        self.lcache.lock().unwrap().insert(key, v.clone());
        Ok(v)
    }

    pub fn to_json(&self) -> Json {
        json!({
            "field": self.field.name(),
            "k": self.k,
            "eta": self.eta.to_json(),
            "psi": self.psi.to_json(),
            "level": self.level.to_json(),
            "t": self.t.iter().map(|t| t.to_json()).collect::<Vec<_>>(),
        })
    }
}

fn is_id(c: &RayClassCharacter) -> bool {
    c.is_trivial() && c.modulus().is_unit()
}

fn root(t: &BigRational) -> Cyclo {
    Cyclo::root_of_unity(t)
}

/// `c(n, E_k(eta, psi)) = sum_{n1 | n} eta(n / n1) psi(n1) N(n1)^{k-1}`.
pub fn coefficient(spec: &EisensteinSpec, n: &Ideal) -> Result<Cyclo> {
    if !n.is_integral() || n.norm().is_zero() {
        return invalid("coefficients are indexed by nonzero integral ideals");
    }
    let f = &spec.field;
    let fac = if n.is_unit() { vec![] } else { n.factor()? };
    let ord = spec.eta.order().max(1) * spec.psi.order().max(1);
    let mut acc = CycloSum::new(ord);
    // all exponent vectors 0 <= e_i <= v_i
    let mut e = vec![0i64; fac.len()];
    loop {
        let mut n1 = Ideal::unit(f);
        for ((p, _), &ei) in fac.iter().zip(&e) {
            n1 = n1.mul(&p.pow(ei));
        }
        let n2 = n.mul(&n1.inv());
        if let (Some(a), Some(b)) = (spec.eta.eval_ideal(&n2)?, spec.psi.eval_ideal(&n1)?) {
            let w = qint(n1.norm().to_integer().pow((spec.k - 1) as u32));
            acc.add_root(&(a + b), &w);
        }
        let mut i = 0;
        loop {
            if i == e.len() {
                return Ok(acc.finish());
            }
            if e[i] < fac[i].1 {
                e[i] += 1;
                break;
            }
            e[i] = 0;
            i += 1;
        }
    }
}

/// Why a constant term vanishes.
pub const B_NOT_DIVIDING_N1: &str = "b ∤ n1";
pub const DELTA_PSI: &str = "delta_psi_id = 0";
pub const DELTA_ETA: &str = "delta_eta_id = 0";
pub const CHARACTER_ZERO: &str = "character value 0 at a non-coprime ideal";

/// One constant term with its provenance.
#[derive(Clone, Debug)]
pub struct ConstantTermReport {
    pub lambda: usize,
    /// `None` for the cusp at infinity.
    pub cusp_label: Option<Ideal>,
    pub matrix: Mat2,
    pub n1: Option<Ideal>,
    pub value: Value,
    pub vanishing_reason: Option<&'static str>,
    pub formula_path: &'static str,
    pub conventions: &'static str,
    pub notes: Vec<String>,
}

const CONVENTIONS: &str = "Gauss sums of primitive characters; t_lambda integral-coprime normalization";

impl ConstantTermReport {
    pub fn to_json(&self, f: &Field) -> Json {
        json!({
            "lambda": self.lambda,
            "cusp": match &self.cusp_label { None => json!("infinity"), Some(r) => r.to_json() },
            "matrix": self.matrix.to_json(f),
            "n1": self.n1.as_ref().map(|n| n.to_json()),
            "value": self.value.to_json(),
            "vanishing_reason": self.vanishing_reason,
            "formula_path": self.formula_path,
            "conventions": self.conventions,
            "notes": self.notes,
        })
    }

    fn zero(lambda: usize, cusp_label: Option<Ideal>, matrix: Mat2, path: &'static str, why: &'static str) -> Self {
        ConstantTermReport {
            lambda,
            cusp_label,
            matrix,
            n1: None,
            value: Value::zero(),
            vanishing_reason: Some(why),
            formula_path: path,
            conventions: CONVENTIONS,
            notes: Vec::new(),
        }
    }
}

fn two_pow_minus_d(d: usize) -> Cyclo {
    Cyclo::rational(BigRational::new(BigInt::one(), BigInt::one() << d))
}

/// The value at infinity: `delta_{eta,id} 2^{-d} L(psi, 1-k)` for `k >= 2`, and
/// `2^{-d} (delta_{eta,id} L(psi, 0) + delta_{psi,id} L(eta, 0))` for `k = 1`.
pub fn constant_at_infinity_value(spec: &EisensteinSpec) -> Result<(Value, Option<&'static str>, Vec<String>)> {
    let d = spec.degree();
    let half = two_pow_minus_d(d);
    if spec.k >= 2 {
        if !is_id(&spec.eta) {
            return Ok((Value::zero(), Some(DELTA_ETA), vec![]));
        }
        let l = spec.l_value(&spec.psi, spec.k)?;
        return Ok((Value::from(&l).mul_exact(&half), None, l.notes.clone()));
    }
    if !spec.field.is_rational() {
        return Err(Error::Unsupported("weight 1 constant terms need an exact L(., 0) backend, available over Q only".into()));
    }
    let mut acc = Cyclo::zero();
    if is_id(&spec.eta) {
        acc = acc.add(spec.l_value(&spec.psi, 1)?.exact.as_ref().unwrap());
    }
    if is_id(&spec.psi) {
        acc = acc.add(spec.l_value(&spec.eta, 1)?.exact.as_ref().unwrap());
    }
    Ok((Value::Exact(acc.mul(&half)), None, vec![]))
}

pub fn constant_at_infinity(spec: &EisensteinSpec, lambda: usize) -> Result<ConstantTermReport> {
    check_lambda(spec, lambda)?;
    let (value, why, notes) = constant_at_infinity_value(spec)?;
    Ok(ConstantTermReport {
        lambda,
        cusp_label: None,
        matrix: Mat2::identity(&spec.field),
        n1: None,
        value,
        vanishing_reason: why,
        formula_path: "infinity",
        conventions: CONVENTIONS,
        notes,
    })
}

fn check_lambda(spec: &EisensteinSpec, lambda: usize) -> Result<()> {
    if lambda >= spec.t.len() {
        return invalid(format!("lambda {lambda} out of range (narrow class number {})", spec.t.len()));
    }
    Ok(())
}

/// `c_lambda(0, E | A)` for `A` in `Gamma^1_lambda(O)`.
pub fn constant_under_slash(spec: &EisensteinSpec, lambda: usize, a: &Mat2) -> Result<ConstantTermReport> {
    check_lambda(spec, lambda)?;
    let f = &spec.field;
    let d = spec.degree();
    let t = &spec.t[lambda];
    let unit = Ideal::unit(f);
    if !spec.group(lambda, &unit).is_member(a) {
        return invalid(format!("matrix {} is not in Gamma^1_lambda(O)", a.display(f)));
    }
    if a.c.is_zero() {
        // f | [[alpha, beta], [0, 1/alpha]] has constant term N(alpha)^k c(0)
        let (v, why, notes) = constant_at_infinity_value(spec)?;
        let nk = f.norm(&a.a).to_integer().to_i64().unwrap().pow(spec.k as u32);
        return Ok(ConstantTermReport {
            lambda,
            cusp_label: None,
            matrix: a.clone(),
            n1: None,
            value: v.mul_exact(&Cyclo::int(nk)),
            vanishing_reason: why,
            formula_path: "upper-triangular",
            conventions: CONVENTIONS,
            notes,
        });
    }
    let path = "slash-formula";
    let dd = different(f);
    let n1 = Ideal::principal(f, &a.c)?.mul(&dd.mul(t).inv());
    let b = spec.psi.modulus();
    if !b.contains_ideal(&n1) {
        let mut r = ConstantTermReport::zero(lambda, None, a.clone(), path, B_NOT_DIVIDING_N1);
        r.n1 = Some(n1);
        return Ok(r);
    }
    let zero = |why| {
        let mut r = ConstantTermReport::zero(lambda, None, a.clone(), path, why);
        r.n1 = Some(n1.clone());
        Ok(r)
    };
    // eta(gamma (b d t)^{-1}) and sgn(alpha)^r psi^{-1}(alpha) = conj psi_f(alpha)
    let Some(eta_n) = spec.eta.eval_ideal(&n1.mul(&b.inv()))? else { return zero(CHARACTER_ZERO) };
    let Some(psi_a) = spec.psi.eval_f(&a.a)? else { return zero(CHARACTER_ZERO) };
    let sg = f.sgn_power(&-&a.c, spec.eta.signature())?;
    let m = &spec.level;
    let g = ray_class_group(f, m)?;
    let eta_m = spec.eta.pullback(&g)?;
    let psi_m = spec.psi.pullback(&g)?;
    // chi = eta^{-1} psi, primitive of conductor c
    let chi = eta_m.inverse().mul(&psi_m)?.primitivize()?;
    let c = chi.modulus().clone();
    let tau_num = chi.inverse().gauss_sum()?;
    let tau_den = spec.psi.inverse().gauss_sum()?;
    let ratio = tau_num
        .div(&tau_den)
        .ok_or_else(|| Error::Degenerate("vanishing Gauss sum".into()))?;
    let nb = b.norm();
    let nc = c.norm();
    let q = (nb / nc).pow(spec.k as i32);
    let euler = removed_euler_factor_inverse(&chi, m, spec.k)?;
    let mut factor = two_pow_minus_d(d)
        .mul(&ratio)
        .mul(&Cyclo::rational(q))
        .mul(&root(&(eta_n - psi_a)))
        .mul(&euler);
    if sg < 0 {
        factor = factor.neg();
    }
    let l = spec.l_value(&chi, spec.k)?;
    Ok(ConstantTermReport {
        lambda,
        cusp_label: None,
        matrix: a.clone(),
        n1: Some(n1),
        value: Value::from(&l).mul_exact(&factor),
        vanishing_reason: None,
        formula_path: path,
        conventions: CONVENTIONS,
        notes: l.notes.clone(),
    })
}

/// `prod_{q | m, q not | cond} (1 - conj chi(q) N q^{-k})`.
fn removed_euler_factor_inverse(chi: &RayClassCharacter, m: &Ideal, k: i64) -> Result<Cyclo> {
    let c = chi.modulus();
    let mut acc = Cyclo::one();
    if m.is_unit() {
        return Ok(acc);
    }
    for p in m.prime_divisors()? {
        if c.valuation(&p) > 0 {
            continue;
        }
        let tq = chi.eval_ideal(&p)?.expect("prime coprime to the conductor");
        let np = p.norm().to_integer();
        let w = BigRational::new(BigInt::one(), np.pow(k as u32));
        acc = acc.mul(&Cyclo::one().sub(&root(&-tq).mul(&Cyclo::rational(w))));
    }
    Ok(acc)
}

/// `c_lambda(0, E | A_lambda)` at the cusp labelled by the class of `r0` (not the class at infinity):
/// `delta_{psi,id} 2^{-d} tau(eta) (N r0 / N a)^k sgn(-gamma)^q eta(n1) L(eta^{-1}, 1-k)`.
pub fn constant_at_cusp(spec: &EisensteinSpec, lambda: usize, r0: &Ideal) -> Result<ConstantTermReport> {
    check_lambda(spec, lambda)?;
    let f = &spec.field;
    let cg = class_group(f)?;
    if cg.class_index(r0)? == 0 {
        return invalid("r0 lies in the class of infinity; use the constant at infinity");
    }
    if !r0.is_integral() || !r0.is_coprime(&spec.level) {
        return invalid("class representative must be integral and coprime to the level");
    }
    let rep = cusp_matrix(&spec.t[lambda], lambda, r0, spec.psi.modulus())?;
    cusp_value(spec, lambda, r0, &rep.matrix, rep.n1.clone().unwrap())
}

fn cusp_value(spec: &EisensteinSpec, lambda: usize, r0: &Ideal, a: &Mat2, n1: Ideal) -> Result<ConstantTermReport> {
    let f = &spec.field;
    let path = "cusp-formula";
    if !is_id(&spec.psi) {
        let mut r = ConstantTermReport::zero(lambda, Some(r0.clone()), a.clone(), path, DELTA_PSI);
        r.n1 = Some(n1);
        return Ok(r);
    }
    let Some(eta_n) = spec.eta.eval_ideal(&n1)? else {
        let mut r = ConstantTermReport::zero(lambda, Some(r0.clone()), a.clone(), path, CHARACTER_ZERO);
        r.n1 = Some(n1);
        return Ok(r);
    };
    let tau = spec.eta.gauss_sum()?;
    let q = (r0.norm() / spec.eta.modulus().norm()).pow(spec.k as i32);
    let sg = f.sgn_power(&-&a.c, spec.eta.signature())?;
    let mut factor = two_pow_minus_d(spec.degree()).mul(&tau).mul(&Cyclo::rational(q)).mul(&root(&eta_n));
    if sg < 0 {
        factor = factor.neg();
    }
    let l = spec.l_value(&spec.eta.inverse(), spec.k)?;
    Ok(ConstantTermReport {
        lambda,
        cusp_label: Some(r0.clone()),
        matrix: a.clone(),
        n1: Some(n1),
        value: Value::from(&l).mul_exact(&factor),
        vanishing_reason: None,
        formula_path: path,
        conventions: CONVENTIONS,
        notes: l.notes.clone(),
    })
}

/// One report per narrow class `lambda` and cusp class of `Gamma^1_lambda(O)`, in
/// `(lambda, class)` order with the cusp at infinity first.
pub fn constant_term_table(spec: &EisensteinSpec) -> Result<Vec<ConstantTermReport>> {
    let mut out = Vec::new();
    for lambda in 0..spec.t.len() {
        for rep in enumerate_cusps(&spec.t[lambda], lambda, spec.psi.modulus(), &spec.level)? {
            if rep.is_infinity() {
                out.push(constant_at_infinity(spec, lambda)?);
            } else {
                out.push(cusp_value(spec, lambda, &rep.class_label, &rep.matrix, rep.n1.clone().unwrap())?);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cusp_geometry::sl2z;

    fn chars_mod(f: &Arc<Field>, n: i64) -> Vec<RayClassCharacter> {
        let g = ray_class_group(f, &Ideal::from_int(f, n).unwrap()).unwrap();
        g.characters().into_iter().filter(|c| c.is_primitive()).collect()
    }

    #[test]
    fn rational_constants_at_infinity() {
        let q = Field::rationals();
        for (k, want) in [(4, rat(1, 240)), (6, rat(-1, 504)), (2, rat(-1, 24))] {
            let s = EisensteinSpec::trivial(&q, k).unwrap();
            assert_eq!(constant_at_infinity(&s, 0).unwrap().value.as_rational(), Some(want));
        }
    }

    #[test]
    fn divisor_sum_coefficients() {
        let q = Field::rationals();
        let s = EisensteinSpec::trivial(&q, 4).unwrap();
        let c = coefficient(&s, &Ideal::from_int(&q, 6).unwrap()).unwrap();
        assert_eq!(c.as_rational(), Some(qint(252)));
        assert_eq!(coefficient(&s, &Ideal::unit(&q)).unwrap().as_rational(), Some(qint(1)));
    }

    #[test]
    fn slash_vanishing_and_identity() {
        let q = Field::rationals();
        let psi = chars_mod(&q, 5).into_iter().find(|c| c.order() == 2).unwrap();
        let id = narrow_class_group(&q).unwrap().trivial_character();
        let s = EisensteinSpec::new(id, psi, 4).unwrap();
        let a = sl2z(&q, [1, 0, 1, 1]).unwrap();
        let r = constant_under_slash(&s, 0, &a).unwrap();
        assert_eq!(r.vanishing_reason, Some(B_NOT_DIVIDING_N1));
        let inf = constant_at_infinity(&s, 0).unwrap().value.as_rational().unwrap();
        let r = constant_under_slash(&s, 0, &Mat2::identity(&q)).unwrap();
        assert_eq!(r.value.as_rational(), Some(inf.clone()));
        let r = constant_under_slash(&s, 0, &sl2z(&q, [1, 0, 5, 1]).unwrap()).unwrap();
        assert!(r.vanishing_reason.is_none());
        assert!(!r.value.exact().unwrap().is_zero());
    }

    #[test]
    fn parity_is_enforced() {
        let q = Field::rationals();
        let psi = chars_mod(&q, 5).into_iter().find(|c| c.order() == 2).unwrap();
        let id = narrow_class_group(&q).unwrap().trivial_character();
        assert!(EisensteinSpec::new(id, psi, 3).is_err());
    }

    #[test]
    fn sqrt10_table_shape() {
        let f = Field::quadratic(10).unwrap();
        let s = EisensteinSpec::trivial(&f, 2).unwrap().with_precision(96);
        let t = constant_term_table(&s).unwrap();
        assert_eq!(t.len(), 4);
        assert_eq!(t[0].value.as_rational(), Some(rat(1, 4) * rat(7, 6)));
    }

    fn random_gamma0(rng: &mut impl rand::Rng, n: i64) -> [i64; 4] {
        use num_integer::Integer;
        loop {
            let c = n * rng.gen_range(-6i64..=6);
            let d = rng.gen_range(-40i64..=40);
            let e = c.extended_gcd(&d);
            if e.gcd != 1 {
                continue;
            }
            // a d - b c = 1 with a = e.y, b = -e.x
            return [e.y, -e.x, c, d];
        }
    }

    #[test]
    fn level_group_equivariance() {
        use rand::SeedableRng;
        let q = Field::rationals();
        let id = narrow_class_group(&q).unwrap().trivial_character();
        let quad = chars_mod(&q, 5).into_iter().find(|c| c.order() == 2).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for (eta, psi) in [(id.clone(), quad.clone()), (quad.clone(), id.clone())] {
            let s = EisensteinSpec::new(eta, psi, 4).unwrap();
            let chi = s.eta.mul(&s.psi).ok();
            for _ in 0..40 {
                let g = random_gamma0(&mut rng, 5);
                let a = random_gamma0(&mut rng, 1);
                let gm = sl2z(&q, g).unwrap();
                let am = sl2z(&q, a).unwrap();
                let lhs = constant_under_slash(&s, 0, &gm.mul(&q, &am)).unwrap().value;
                let rhs = constant_under_slash(&s, 0, &am).unwrap().value;
                let e = match &chi {
                    Some(c) => c.eval_f(&q.from_int(g[3])).unwrap().unwrap(),
                    None => quad.eval_f(&q.from_int(g[3])).unwrap().unwrap(),
                };
                assert_eq!(lhs.exact().unwrap(), &rhs.exact().unwrap().mul(&root(&e)), "g={g:?} a={a:?}");
            }
        }
    }
}
