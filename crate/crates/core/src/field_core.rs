//! Totally real number fields: elements over an integral basis, exact signs at
//! the real embeddings, trace and norm, units and the unit subgroup `U`.

use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::arith::{self, qint, IMat, QMat};
use crate::error::{invalid, Error, Result};

/// Element of `F`, stored as rational coordinates over the integral basis.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct Elt(pub Vec<BigRational>);

impl Elt {
    pub fn zero(d: usize) -> Self {
        Elt(vec![BigRational::zero(); d])
    }

    pub fn from_rational(d: usize, q: BigRational) -> Self {
        let mut v = vec![BigRational::zero(); d];
        v[0] = q;
        Elt(v)
    }

    pub fn from_int(d: usize, n: impl Into<BigInt>) -> Self {
        Self::from_rational(d, qint(n))
    }

    pub fn from_ints(v: &[i64]) -> Self {
        Elt(v.iter().map(|&x| qint(x)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| x.is_zero())
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(|x| x.is_integer())
    }

    pub fn scale(&self, q: &BigRational) -> Elt {
        Elt(self.0.iter().map(|x| x * q).collect())
    }

    pub fn scale_int(&self, n: i64) -> Elt {
        self.scale(&qint(n))
    }

    /// Least positive integer `m` with `m * self` integral.
    pub fn denominator(&self) -> BigInt {
        arith::lcm_all(self.0.iter().map(|x| x.denom()))
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        self.0[1..].iter().all(|x| x.is_zero()).then(|| self.0[0].clone())
    }

    pub fn int_coords(&self) -> Option<Vec<BigInt>> {
        self.is_integral().then(|| self.0.iter().map(|x| x.to_integer()).collect())
    }
}

impl Add for &Elt {
    type Output = Elt;
    fn add(self, o: &Elt) -> Elt {
        Elt(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Elt {
    type Output = Elt;
    fn sub(self, o: &Elt) -> Elt {
        Elt(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &Elt {
    type Output = Elt;
    fn neg(self) -> Elt {
        Elt(self.0.iter().map(|a| -a).collect())
    }
}

impl Add for Elt {
    type Output = Elt;
    fn add(self, o: Elt) -> Elt {
        &self + &o
    }
}

impl Sub for Elt {
    type Output = Elt;
    fn sub(self, o: Elt) -> Elt {
        &self - &o
    }
}

impl Neg for Elt {
    type Output = Elt;
    fn neg(self) -> Elt {
        -&self
    }
}

impl AddAssign<&Elt> for Elt {
    fn add_assign(&mut self, o: &Elt) {
        for (a, b) in self.0.iter_mut().zip(&o.0) {
            *a += b;
        }
    }
}

impl SubAssign<&Elt> for Elt {
    fn sub_assign(&mut self, o: &Elt) {
        for (a, b) in self.0.iter_mut().zip(&o.0) {
            *a -= b;
        }
    }
}

/// Vector in `{+1,-1}^d`, one entry per real embedding.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default, PartialOrd, Ord)]
pub struct SignVector(pub u32);

impl SignVector {
    pub fn from_signs(signs: &[i8]) -> Self {
        SignVector(
            signs
                .iter()
                .enumerate()
                .filter(|(_, &s)| s < 0)
                .fold(0, |acc, (i, _)| acc | (1 << i)),
        )
    }

    /// Bit `i` set means a negative sign (or exponent 1) at embedding `i`.
    pub fn bit(&self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn signs(&self, d: usize) -> Vec<i8> {
        (0..d).map(|i| if self.bit(i) { -1 } else { 1 }).collect()
    }

    pub fn is_totally_positive(&self) -> bool {
        self.0 == 0
    }

    pub fn mul(self, o: SignVector) -> SignVector {
        SignVector(self.0 ^ o.0)
    }

    /// `prod_sigma sgn(a^sigma)^{q_sigma}` for this sign vector and exponent `q`.
    pub fn power(&self, q: SignVector) -> i8 {
        if (self.0 & q.0).count_ones() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn all(d: usize) -> impl Iterator<Item = SignVector> {
        (0..1u32 << d).map(SignVector)
    }
}

/// Class group data supplied by the user for fields of degree at least 3.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ClassData {
    pub h: u64,
    #[serde(default)]
    pub narrow_h: Option<u64>,
}

/// User-facing description of a field.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(untagged)]
pub enum FieldSpec {
    Quadratic {
        quadratic_d: i64,
    },
    General {
        poly: Vec<i64>,
        #[serde(default)]
        basis: Option<Vec<Vec<String>>>,
        #[serde(default)]
        units: Vec<Vec<String>>,
        #[serde(default)]
        class_group: Option<ClassData>,
    },
}

impl FieldSpec {
    /// Accepts `Q`, a bare integer `D` or a JSON object.
    pub fn parse(s: &str) -> Result<FieldSpec> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("q") || t == "1" {
            return Ok(FieldSpec::General { poly: vec![0, 1], basis: None, units: vec![], class_group: None });
        }
        if let Ok(d) = t.parse::<i64>() {
            return Ok(FieldSpec::Quadratic { quadratic_d: d });
        }
        let v: serde_json::Value = serde_json::from_str(t)
            .map_err(|e| Error::Parse { pos: e.column().saturating_sub(1), msg: e.to_string() })?;
        if let Some(d) = v.get("quadratic_D").and_then(|x| x.as_i64()) {
            return Ok(FieldSpec::Quadratic { quadratic_d: d });
        }
        serde_json::from_value(v).map_err(|e| Error::Invalid(format!("field spec: {e}")))
    }
}

#[derive(Default)]
pub(crate) struct FieldCache {
    pub different: OnceLock<crate::ideal_arith::Ideal>,
    pub inverse_different: OnceLock<crate::ideal_arith::Ideal>,
    pub class_group: OnceLock<Result<Arc<crate::class_group::ClassGroup>>>,
    #[allow(clippy::type_complexity)]
    pub ray_groups: std::sync::Mutex<std::collections::HashMap<(IMat, IMat), Arc<crate::ray_class::RayClassGroup>>>,
    pub unit_signs: OnceLock<Vec<SignVector>>,
}

/// A totally real number field with a chosen integral basis.
pub struct Field {
    degree: usize,
    poly: Vec<BigInt>,
    basis: QMat,
    to_basis: QMat,
    mt: Vec<Vec<Vec<BigInt>>>,
    trace_form: IMat,
    disc: BigInt,
    roots: Vec<(BigRational, BigRational)>,
    quad: Option<i64>,
    units: Vec<Elt>,
    class_data: Option<ClassData>,
    spec: FieldSpec,
    pub(crate) cache: FieldCache,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Field({})", self.name())
    }
}

fn poly_eval_q(p: &[BigRational], x: &BigRational) -> BigRational {
    p.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
}

fn poly_rem_q(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    while r.len() > db && !r.is_empty() {
        let lead = r.last().unwrap().clone();
        if lead.is_zero() {
            r.pop();
            continue;
        }
        let f = &lead / b.last().unwrap();
        let shift = r.len() - 1 - db;
        for (i, c) in b.iter().enumerate() {
            r[shift + i] -= &f * c;
        }
        r.pop();
    }
    while r.last().map_or(false, |x| x.is_zero()) {
        r.pop();
    }
    r
}

fn poly_deriv_q(p: &[BigRational]) -> Vec<BigRational> {
    p.iter().enumerate().skip(1).map(|(i, c)| c * qint(i as i64)).collect()
}

fn sturm_sequence(p: &[BigRational]) -> Vec<Vec<BigRational>> {
    let mut seq = vec![p.to_vec(), poly_deriv_q(p)];
    loop {
        let n = seq.len();
        if seq[n - 1].is_empty() {
            seq.pop();
            break;
        }
        let r = poly_rem_q(&seq[n - 2], &seq[n - 1]);
        if r.is_empty() {
            break;
        }
        seq.push(r.iter().map(|x| -x).collect());
    }
    seq
}

fn sign_changes(seq: &[Vec<BigRational>], x: &BigRational) -> usize {
    let signs: Vec<i32> = seq
        .iter()
        .map(|p| poly_eval_q(p, x))
        .filter(|v| !v.is_zero())
        .map(|v| if v.is_positive() { 1 } else { -1 })
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Isolating intervals `(l, r)` of the real roots of a squarefree polynomial,
/// in decreasing order of the root.
fn isolate_roots(p: &[BigRational]) -> Vec<(BigRational, BigRational)> {
    let seq = sturm_sequence(p);
    let lead = p.last().unwrap().abs();
    let bound = p.iter().map(|c| c.abs() / &lead).fold(BigRational::zero(), |a, b| a.max(b))
        + BigRational::one();
    let mut out = Vec::new();
    let mut stack = vec![(-bound.clone(), bound)];
    while let Some((l, r)) = stack.pop() {
        let n = sign_changes(&seq, &l) - sign_changes(&seq, &r);
        if n == 0 {
            continue;
        }
        if n == 1 && !poly_eval_q(p, &l).is_zero() && !poly_eval_q(p, &r).is_zero() {
            out.push((l, r));
            continue;
        }
        let m = (&l + &r) / qint(2);
        if poly_eval_q(p, &m).is_zero() {
            out.push((m.clone(), m.clone()));
            let eps = (&r - &l) / qint(1 << 20);
            stack.push((l, &m - &eps));
            stack.push((&m + &eps, r));
            continue;
        }
        stack.push((l, m.clone()));
        stack.push((m, r));
    }
    out.sort_by(|a, b| b.0.cmp(&a.0));
    out
}

fn refine(p: &[BigRational], iv: &(BigRational, BigRational)) -> (BigRational, BigRational) {
    let (l, r) = iv.clone();
    if l == r {
        return (l, r);
    }
    let m = (&l + &r) / qint(2);
    let fm = poly_eval_q(p, &m);
    if fm.is_zero() {
        return (m.clone(), m);
    }
    let fl = poly_eval_q(p, &l);
    if fl.is_positive() == fm.is_positive() {
        (m, r)
    } else {
        (l, m)
    }
}

/// Interval Horner evaluation over `[l, r]`.
fn interval_eval(p: &[BigRational], l: &BigRational, r: &BigRational) -> (BigRational, BigRational) {
    let mut lo = BigRational::zero();
    let mut hi = BigRational::zero();
    for c in p.iter().rev() {
        let cands = [&lo * l, &lo * r, &hi * l, &hi * r];
        let mn = cands.iter().min().unwrap().clone();
        let mx = cands.iter().max().unwrap().clone();
        lo = mn + c;
        hi = mx + c;
    }
    (lo, hi)
}

fn continued_fraction_unit(d: i64) -> (BigRational, BigRational) {
    // complete quotients (P + sqrt d)/Q of the reduced expansion of the
    // generator of O; their product over a period is the fundamental unit
    let dd = BigInt::from(d);
    let sq = dd.sqrt();
    let (mut p, mut q) = if d % 4 == 1 { (BigInt::one(), BigInt::from(2)) } else { (BigInt::zero(), BigInt::one()) };
    let step = |p: &BigInt, q: &BigInt| -> (BigInt, BigInt) {
        let a = (p + &sq).div_floor(q);
        let np = &a * q - p;
        let nq = (&dd - &np * &np) / q;
        (np, nq)
    };
    let (p1, q1) = step(&p, &q);
    p = p1.clone();
    q = q1.clone();
    let mut ex = BigRational::one();
    let mut ey = BigRational::zero();
    loop {
        // multiply by (p + sqrt d)/q
        let nx = (&ex * qint(p.clone()) + &ey * qint(d)) / qint(q.clone());
        let ny = (&ex + &ey * qint(p.clone())) / qint(q.clone());
        ex = nx;
        ey = ny;
        let (np, nq) = step(&p, &q);
        p = np;
        q = nq;
        if p == p1 && q == q1 {
            break;
        }
    }
    (ex, ey)
}

impl Field {
    pub fn rationals() -> Arc<Field> {
        Field::from_spec(&FieldSpec::General { poly: vec![0, 1], basis: None, units: vec![], class_group: None })
            .expect("Q is a valid field")
    }

    pub fn quadratic(d: i64) -> Result<Arc<Field>> {
        Field::from_spec(&FieldSpec::Quadratic { quadratic_d: d })
    }

    pub fn from_spec(spec: &FieldSpec) -> Result<Arc<Field>> {
        match spec {
            FieldSpec::Quadratic { quadratic_d: d } => {
                let d = *d;
                if d <= 1 || !arith::is_squarefree(d as u64) {
                    return invalid(format!("D = {d} must be a squarefree integer > 1"));
                }
                let poly = vec![BigInt::from(-d), BigInt::zero(), BigInt::one()];
                let basis = if d % 4 == 1 {
                    vec![vec![qint(1), qint(0)], vec![arith::rat(1, 2), arith::rat(1, 2)]]
                } else {
                    arith::qidentity(2)
                };
                let mut f = Field::build(poly, basis, vec![], None, spec.clone(), Some(d))?;
                let (x, y) = continued_fraction_unit(d);
                let eps = f.from_sqrt_parts(&x, &y);
                let eps = if f.is_gt_one(&eps) { eps } else { f.inv(&eps)? };
                f.units = vec![eps];
                Ok(Arc::new(f))
            }
            FieldSpec::General { poly, basis, units, class_group } => {
                let poly: Vec<BigInt> = poly.iter().map(|&c| BigInt::from(c)).collect();
                let d = poly.len().saturating_sub(1);
                if d == 0 || !poly[d].is_one() {
                    return invalid("defining polynomial must be monic of degree >= 1");
                }
                if d == 2 && poly[1].is_zero() && poly[0].is_negative() {
                    let dd = (-&poly[0]).to_i64().unwrap_or(0);
                    if basis.is_none() && arith::is_squarefree(dd as u64) {
                        return Field::quadratic(dd);
                    }
                }
                let basis = match basis {
                    Some(rows) => {
                        if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                            return invalid("basis must be a d x d matrix");
                        }
                        rows.iter()
                            .map(|r| r.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>())
                            .collect::<Result<QMat>>()?
                    }
                    None => arith::qidentity(d),
                };
                let mut f = Field::build(poly, basis, vec![], class_group.clone(), spec.clone(), None)?;
                if d > 2 && (units.len() != d - 1 || class_group.is_none()) {
                    return Err(Error::InsufficientFieldData(
                        "degree >= 3 requires d-1 unit generators and class group data".into(),
                    ));
                }
                if d == 2 {
                    return Err(Error::Unsupported(
                        "quadratic fields must be given as {\"quadratic_D\": D} with the standard basis".into(),
                    ));
                }
                let us = units
                    .iter()
                    .map(|u| {
                        if u.len() != d {
                            return invalid("unit has wrong length");
                        }
                        Ok(Elt(u.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>()?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                for u in &us {
                    if !u.is_integral() || f.norm(u).abs() != BigRational::one() {
                        return invalid("unit generator does not have norm +-1");
                    }
                }
                f.units = us;
                Ok(Arc::new(f))
            }
        }
    }

    fn build(
        poly: Vec<BigInt>,
        basis: QMat,
        units: Vec<Elt>,
        class_data: Option<ClassData>,
        spec: FieldSpec,
        quad: Option<i64>,
    ) -> Result<Field> {
        let d = poly.len() - 1;
        let qpoly: Vec<BigRational> = poly.iter().map(|c| qint(c.clone())).collect();
        if d > 1 {
            let g = poly_rem_q(&qpoly, &poly_deriv_q(&qpoly));
            let mut a = qpoly.clone();
            let mut b = poly_deriv_q(&qpoly);
            let _ = g;
            while !b.is_empty() {
                let r = poly_rem_q(&a, &b);
                a = b;
                b = r;
            }
            if a.len() > 1 {
                return invalid("defining polynomial is not squarefree");
            }
        }
        let roots = isolate_roots(&qpoly);
        if roots.len() != d {
            return invalid("defining polynomial is not totally real");
        }
        let to_basis = arith::qinv(&basis).ok_or_else(|| Error::Invalid("basis is singular".into()))?;
        // multiplication table
        let mulpow = |a: &[BigRational], b: &[BigRational]| -> Vec<BigRational> {
            let mut prod = vec![BigRational::zero(); 2 * d - 1];
            for (i, x) in a.iter().enumerate() {
                for (j, y) in b.iter().enumerate() {
                    prod[i + j] += x * y;
                }
            }
            let mut r = poly_rem_q(&prod, &qpoly);
            r.resize(d, BigRational::zero());
            r
        };
        let mut mt = vec![vec![vec![BigInt::zero(); d]; d]; d];
        for i in 0..d {
            for j in 0..d {
                let p = mulpow(&basis[i], &basis[j]);
                for k in 0..d {
                    let c = (0..d).fold(BigRational::zero(), |acc, l| acc + &p[l] * &to_basis[l][k]);
                    if !c.is_integer() {
                        return invalid("basis is not closed under multiplication");
                    }
                    mt[i][j][k] = c.to_integer();
                }
            }
        }
        // 1 must be the first basis element
        if basis[0].iter().enumerate().any(|(i, c)| if i == 0 { !c.is_one() } else { !c.is_zero() }) {
            return invalid("first basis element must be 1");
        }
        let mut f = Field {
            degree: d,
            poly,
            basis,
            to_basis,
            mt,
            trace_form: vec![],
            disc: BigInt::zero(),
            roots,
            quad,
            units,
            class_data,
            spec,
            cache: FieldCache::default(),
        };
        let tf: IMat = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        let mut e = Elt::zero(d);
                        e.0[i] = BigRational::one();
                        let mut g = Elt::zero(d);
                        g.0[j] = BigRational::one();
                        f.trace(&f.mul(&e, &g)).to_integer()
                    })
                    .collect()
            })
            .collect();
        f.disc = arith::det(&tf);
        f.trace_form = tf;
        if f.disc.is_zero() {
            return invalid("degenerate basis");
        }
        // refine root intervals once so that later sign decisions are quick
        let qp: Vec<BigRational> = f.poly.iter().map(|c| qint(c.clone())).collect();
        for iv in f.roots.iter_mut() {
            for _ in 0..40 {
                *iv = refine(&qp, iv);
            }
        }
        Ok(f)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn discriminant(&self) -> &BigInt {
        &self.disc
    }

    pub fn defining_polynomial(&self) -> &[BigInt] {
        &self.poly
    }

    pub fn integral_basis(&self) -> &QMat {
        &self.basis
    }

    pub fn quadratic_d(&self) -> Option<i64> {
        self.quad
    }

    pub fn is_rational(&self) -> bool {
        self.degree == 1
    }

    pub fn class_data(&self) -> Option<&ClassData> {
        self.class_data.as_ref()
    }

    pub fn name(&self) -> String {
        match self.quad {
            Some(d) => format!("Q(sqrt({d}))"),
            None if self.degree == 1 => "Q".to_string(),
            None => format!("Q[x]/({})", self.poly.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")),
        }
    }

    /// Fundamental units (a generating set of `O^x` together with `-1`).
    pub fn units(&self) -> &[Elt] {
        &self.units
    }

    pub fn trace_form(&self) -> &IMat {
        &self.trace_form
    }

    pub fn mult_table(&self) -> &Vec<Vec<Vec<BigInt>>> {
        &self.mt
    }

    pub fn zero(&self) -> Elt {
        Elt::zero(self.degree)
    }

    pub fn one(&self) -> Elt {
        Elt::from_int(self.degree, 1)
    }

    pub fn from_int(&self, n: impl Into<BigInt>) -> Elt {
        Elt::from_int(self.degree, n)
    }

    pub fn from_rational(&self, q: BigRational) -> Elt {
        Elt::from_rational(self.degree, q)
    }

    /// The `i`-th integral basis element.
    pub fn basis_elt(&self, i: usize) -> Elt {
        let mut e = self.zero();
        e.0[i] = BigRational::one();
        e
    }

    pub fn mul(&self, a: &Elt, b: &Elt) -> Elt {
        let d = self.degree;
        let mut out = vec![BigRational::zero(); d];
        for i in 0..d {
            if a.0[i].is_zero() {
                continue;
            }
            for j in 0..d {
                if b.0[j].is_zero() {
                    continue;
                }
                let ab = &a.0[i] * &b.0[j];
                for (k, o) in out.iter_mut().enumerate() {
                    let c = &self.mt[i][j][k];
                    if !c.is_zero() {
                        *o += &ab * BigRational::from_integer(c.clone());
                    }
                }
            }
        }
        Elt(out)
    }

    pub fn square(&self, a: &Elt) -> Elt {
        self.mul(a, a)
    }

    pub fn pow(&self, a: &Elt, e: i64) -> Result<Elt> {
        let base = if e < 0 { self.inv(a)? } else { a.clone() };
        let mut n = e.unsigned_abs();
        let mut acc = self.one();
        let mut b = base;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(&acc, &b);
            }
            b = self.mul(&b, &b);
            n >>= 1;
        }
        Ok(acc)
    }

    /// Matrix of multiplication by `a`: column `j` holds the coordinates of `a * w_j`.
    pub fn regular_matrix(&self, a: &Elt) -> QMat {
        let d = self.degree;
        let mut m = arith::qzeros(d, d);
        for i in 0..d {
            if a.0[i].is_zero() {
                continue;
            }
            for j in 0..d {
                for k in 0..d {
                    let c = &self.mt[i][j][k];
                    if !c.is_zero() {
                        m[k][j] += &a.0[i] * BigRational::from_integer(c.clone());
                    }
                }
            }
        }
        m
    }

    pub fn trace(&self, a: &Elt) -> BigRational {
        let m = self.regular_matrix(a);
        (0..self.degree).fold(BigRational::zero(), |acc, i| acc + &m[i][i])
    }

    pub fn norm(&self, a: &Elt) -> BigRational {
        if let Some(dd) = self.quad {
            let (p, q) = self.sqrt_parts(a);
            return &p * &p - &q * &q * qint(dd);
        }
        arith::qdet(&self.regular_matrix(a))
    }

    pub fn trace_and_norm(&self, a: &Elt) -> (BigRational, BigRational) {
        (self.trace(a), self.norm(a))
    }

    pub fn inv(&self, a: &Elt) -> Result<Elt> {
        if a.is_zero() {
            return Err(Error::Degenerate("inverse of zero".into()));
        }
        let m = self.regular_matrix(a);
        let mi = arith::qinv(&m).ok_or_else(|| Error::Degenerate("singular element".into()))?;
        Ok(Elt((0..self.degree).map(|i| mi[i][0].clone()).collect()))
    }

    pub fn div(&self, a: &Elt, b: &Elt) -> Result<Elt> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    /// For a quadratic field, `(p, q)` with `a = p + q sqrt(D)`.
    pub fn sqrt_parts(&self, a: &Elt) -> (BigRational, BigRational) {
        let d = self.quad.expect("quadratic field");
        if d % 4 == 1 {
            let h = &a.0[1] / qint(2);
            (&a.0[0] + &h, h)
        } else {
            (a.0[0].clone(), a.0[1].clone())
        }
    }

    /// Inverse of [`Field::sqrt_parts`].
    pub fn from_sqrt_parts(&self, p: &BigRational, q: &BigRational) -> Elt {
        let d = self.quad.expect("quadratic field");
        if d % 4 == 1 {
            Elt(vec![p - q, q * qint(2)])
        } else {
            Elt(vec![p.clone(), q.clone()])
        }
    }

    /// `sqrt(D)` in a quadratic field.
    pub fn sqrt_d(&self) -> Elt {
        self.from_sqrt_parts(&BigRational::zero(), &BigRational::one())
    }

    fn power_coords(&self, a: &Elt) -> Vec<BigRational> {
        let d = self.degree;
        (0..d).map(|k| (0..d).fold(BigRational::zero(), |acc, i| acc + &a.0[i] * &self.basis[i][k])).collect()
    }

    /// Element with the given coordinates in the power basis of the defining polynomial.
    pub fn from_power_coords(&self, p: &[BigRational]) -> Elt {
        let d = self.degree;
        Elt((0..d).map(|k| (0..d).fold(BigRational::zero(), |acc, i| acc + &p[i] * &self.to_basis[i][k])).collect())
    }

    /// Exact sign of `a` at embedding `sigma`; `0` only for `a = 0`.
    pub fn sign_at(&self, a: &Elt, sigma: usize) -> i8 {
        if a.is_zero() {
            return 0;
        }
        if let Some(dd) = self.quad {
            let (p, q) = self.sqrt_parts(a);
            let q = if sigma == 0 { q } else { -q };
            let sp = p.signum();
            let sq = q.signum();
            if sq.is_zero() {
                return if sp.is_positive() { 1 } else { -1 };
            }
            if sp.is_zero() || sp == sq {
                return if sq.is_positive() { 1 } else { -1 };
            }
            // opposite signs: compare p^2 with q^2 D
            let c = (&p * &p).cmp(&(&q * &q * qint(dd)));
            let dominant_p = c == std::cmp::Ordering::Greater;
            let s = if dominant_p { sp } else { sq };
            return if s.is_positive() { 1 } else { -1 };
        }
        let pc = self.power_coords(a);
        let qp: Vec<BigRational> = self.poly.iter().map(|c| qint(c.clone())).collect();
        let mut iv = self.roots[sigma].clone();
        loop {
            let (lo, hi) = interval_eval(&pc, &iv.0, &iv.1);
            if lo.is_positive() {
                return 1;
            }
            if hi.is_negative() {
                return -1;
            }
            iv = refine(&qp, &iv);
        }
    }

    pub fn sign_vector(&self, a: &Elt) -> Result<SignVector> {
        if a.is_zero() {
            return Err(Error::Degenerate("sign of zero".into()));
        }
        let s: Vec<i8> = (0..self.degree).map(|i| self.sign_at(a, i)).collect();
        Ok(SignVector::from_signs(&s))
    }

    /// `sgn(a)^q`.
    pub fn sgn_power(&self, a: &Elt, q: SignVector) -> Result<i8> {
        Ok(self.sign_vector(a)?.power(q))
    }

    pub fn is_totally_positive(&self, a: &Elt) -> bool {
        !a.is_zero() && (0..self.degree).all(|i| self.sign_at(a, i) > 0)
    }

    /// `a > 1` at the first embedding.
    pub fn is_gt_one(&self, a: &Elt) -> bool {
        self.sign_at(&(a - &self.one()), 0) > 0
    }

    /// `|a^sigma| < |b^sigma|`, decided exactly.
    pub fn abs_lt(&self, a: &Elt, b: &Elt, sigma: usize) -> bool {
        let diff = &self.square(b) - &self.square(a);
        self.sign_at(&diff, sigma) > 0
    }

    /// Embedding values to `prec` bits.
    pub fn embed_float(&self, a: &Elt, prec: u32) -> Vec<Float> {
        let wp = prec + 16;
        if let Some(dd) = self.quad {
            let (p, q) = self.sqrt_parts(a);
            let s = Float::with_val(wp, dd).sqrt();
            let pf = rat_to_float(&p, wp);
            let qf = rat_to_float(&q, wp);
            let t = Float::with_val(wp, &qf * &s);
            return vec![
                Float::with_val(prec, &pf + &t),
                Float::with_val(prec, &pf - &t),
            ];
        }
        let pc = self.power_coords(a);
        let qp: Vec<BigRational> = self.poly.iter().map(|c| qint(c.clone())).collect();
        (0..self.degree)
            .map(|s| {
                let mut iv = self.roots[s].clone();
                for _ in 0..(wp as usize + 8) {
                    if iv.0 == iv.1 {
                        break;
                    }
                    iv = refine(&qp, &iv);
                }
                let x = rat_to_float(&((&iv.0 + &iv.1) / qint(2)), wp);
                let mut acc = Float::with_val(wp, 0);
                for c in pc.iter().rev() {
                    acc *= &x;
                    acc += rat_to_float(c, wp);
                }
                Float::with_val(prec, acc)
            })
            .collect()
    }

    pub fn embed_f64(&self, a: &Elt) -> Vec<f64> {
        self.embed_float(a, 64).iter().map(|x| x.to_f64()).collect()
    }

    /// Coordinates of `a` over the basis as 64-bit integers, when integral and small.
    pub fn to_i64_coords(&self, a: &Elt) -> Option<Vec<i64>> {
        a.0.iter().map(|x| if x.is_integer() { x.to_integer().to_i64() } else { None }).collect()
    }

    /// Sign vectors of `-1` and of the fundamental units.
    pub fn unit_sign_vectors(&self) -> &[SignVector] {
        self.cache.unit_signs.get_or_init(|| {
            let mut v = vec![self.sign_vector(&-self.one()).unwrap()];
            v.extend(self.units.iter().map(|u| self.sign_vector(u).unwrap()));
            v
        })
    }

    /// Parses an element literal such as `2 + 3*w`, `1/2 - w`, `2+sqrt(10)` or `w2`.
    pub fn parse_elt(&self, s: &str) -> Result<Elt> {
        parse_elt_impl(self, s, 0)
    }

    pub fn format_elt(&self, a: &Elt) -> String {
        let mut parts: Vec<String> = Vec::new();
        for (i, c) in a.0.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sym = match i {
                0 => String::new(),
                1 => "w".to_string(),
                _ => format!("w{i}"),
            };
            let neg = c.is_negative();
            let ab = c.abs();
            let body = if sym.is_empty() {
                ab.to_string()
            } else if ab.is_one() {
                sym
            } else {
                format!("{ab}*{sym}")
            };
            if parts.is_empty() {
                parts.push(if neg { format!("-{body}") } else { body });
            } else {
                parts.push(if neg { format!("- {body}") } else { format!("+ {body}") });
            }
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" ")
        }
    }

    /// Real-embedding value of the regulator `log |eps|` summed per unit, to `prec` bits.
    pub fn regulator(&self, prec: u32) -> Result<Float> {
        match self.degree {
            1 => Ok(Float::with_val(prec, 1)),
            2 => {
                let e = self.embed_float(&self.units[0], prec + 16);
                Ok(Float::with_val(prec, e[0].clone().abs().ln()))
            }
            _ => {
                let r = self.degree - 1;
                let mut m = Vec::new();
                for u in &self.units {
                    let e = self.embed_float(u, prec + 32);
                    m.push(e.into_iter().take(r).map(|x| x.abs().ln()).collect::<Vec<_>>());
                }
                Ok(Float::with_val(prec, float_det(m, prec + 32).abs()))
            }
        }
    }
}

fn float_det(mut m: Vec<Vec<Float>>, prec: u32) -> Float {
    let n = m.len();
    let mut det = Float::with_val(prec, 1);
    for k in 0..n {
        let p = (k..n)
            .max_by(|&a, &b| m[a][k].clone().abs().partial_cmp(&m[b][k].clone().abs()).unwrap())
            .unwrap();
        if p != k {
            m.swap(p, k);
            det = -det;
        }
        let piv = m[k][k].clone();
        if piv.is_zero() {
            return Float::with_val(prec, 0);
        }
        det *= &piv;
        for i in k + 1..n {
            let f = Float::with_val(prec, &m[i][k] / &piv);
            for j in k..n {
                let t = Float::with_val(prec, &f * &m[k][j]);
                m[i][j] -= t;
            }
        }
    }
    det
}

pub fn rat_to_float(q: &BigRational, prec: u32) -> Float {
    let n = rug::Integer::from_str_radix(&q.numer().to_str_radix(16), 16).unwrap();
    let d = rug::Integer::from_str_radix(&q.denom().to_str_radix(16), 16).unwrap();
    Float::with_val(prec, rug::Rational::from((n, d)))
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let t = s.trim();
    let bad = || Error::Parse { pos: 0, msg: format!("not a rational: {t:?}") };
    match t.split_once('/') {
        Some((a, b)) => {
            let n: BigInt = a.trim().parse().map_err(|_| bad())?;
            let d: BigInt = b.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(qint(t.parse::<BigInt>().map_err(|_| bad())?)),
    }
}

fn parse_elt_impl(f: &Field, s: &str, offset: usize) -> Result<Elt> {
    let mut p = EltParser { f, chars: s.chars().collect(), i: 0, offset };
    p.ws();
    if p.i >= p.chars.len() {
        return Err(p.err(0, "empty element literal"));
    }
    let v = p.expr()?;
    p.ws();
    if p.i < p.chars.len() {
        return Err(p.err(p.i, "unexpected character"));
    }
    Ok(v)
}

/// Recursive descent over `+ - * /`, parentheses, integers, `w`, `w<i>` and `sqrt(D)`.
struct EltParser<'a> {
    f: &'a Field,
    chars: Vec<char>,
    i: usize,
    offset: usize,
}

impl EltParser<'_> {
    fn err(&self, pos: usize, msg: &str) -> Error {
        Error::Parse { pos: pos + self.offset, msg: msg.to_string() }
    }

    fn ws(&mut self) {
        while self.i < self.chars.len() && self.chars[self.i].is_whitespace() {
            self.i += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.ws();
        self.chars.get(self.i).copied()
    }

    fn int(&mut self) -> Option<BigInt> {
        let st = self.i;
        while self.i < self.chars.len() && self.chars[self.i].is_ascii_digit() {
            self.i += 1;
        }
        (st < self.i).then(|| self.chars[st..self.i].iter().collect::<String>().parse().unwrap())
    }

    fn expr(&mut self) -> Result<Elt> {
        let mut acc = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                '+' => {
                    self.i += 1;
                    acc = &acc + &self.term()?;
                }
                '-' => {
                    self.i += 1;
                    acc = &acc - &self.term()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Elt> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.i += 1;
                    acc = self.f.mul(&acc, &self.unary()?);
                }
                Some('/') => {
                    self.i += 1;
                    let pos = self.i;
                    let d = self.unary()?;
                    if d.is_zero() {
                        return Err(self.err(pos, "division by zero"));
                    }
                    acc = self.f.div(&acc, &d)?;
                }
                Some('w') | Some('s') | Some('(') => {
                    acc = self.f.mul(&acc, &self.atom()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Elt> {
        match self.peek() {
            Some('-') => {
                self.i += 1;
                Ok(-&self.unary()?)
            }
            Some('+') => {
                self.i += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Elt> {
        let d = self.f.degree();
        let st = match self.peek() {
            Some(_) => self.i,
            None => return Err(self.err(self.i, "unexpected end of input")),
        };
        let c = self.chars[st];
        if c.is_ascii_digit() {
            let n = self.int().unwrap();
            return Ok(self.f.from_int(n));
        }
        if c == '(' {
            self.i += 1;
            let v = self.expr()?;
            if self.peek() != Some(')') {
                return Err(self.err(self.i, "expected ')'"));
            }
            self.i += 1;
            return Ok(v);
        }
        if c == 'w' {
            self.i += 1;
            let idx = match self.int() {
                Some(n) => n.to_usize().ok_or_else(|| self.err(st, "bad basis index"))?,
                None => 1,
            };
            if idx == 0 || idx >= d {
                return Err(self.err(st, "basis index out of range"));
            }
            return Ok(self.f.basis_elt(idx));
        }
        if self.chars[st..].iter().take(5).collect::<String>() == "sqrt(" {
            self.i += 5;
            self.ws();
            let n = self.int().ok_or_else(|| self.err(self.i, "expected integer under sqrt"))?;
            if self.peek() != Some(')') {
                return Err(self.err(self.i, "expected ')'"));
            }
            self.i += 1;
            if self.f.quadratic_d().map(BigInt::from) != Some(n) {
                return Err(self.err(st, "sqrt(n) must match the field discriminant D"));
            }
            return Ok(self.f.sqrt_d());
        }
        Err(self.err(st, "expected a number, 'w', 'sqrt(' or '('"))
    }
}

/// The unit subgroup `U = {u : N(u)^k = 1, u = 1 mod m}` and its index in `O^x`.
#[derive(Clone, Debug)]
pub struct UnitSubgroup {
    pub modulus: crate::ideal_arith::Ideal,
    pub weight: i64,
    pub generators: Vec<Elt>,
    pub index: u64,
    /// Whether `-1` lies in `U`.
    pub contains_minus_one: bool,
}

pub fn unit_subgroup(f: &Arc<Field>, m: &crate::ideal_arith::Ideal, k: i64) -> Result<UnitSubgroup> {
    if !m.is_integral() {
        return invalid("modulus must be integral");
    }
    let r = f.units().len();
    let member = |u: &Elt| -> bool {
        let n = f.norm(u);
        let nk = if k % 2 == 0 || n.is_one() { BigRational::one() } else { n };
        nk.is_one() && m.contains(&(u - &f.one()))
    };
    // exponent bound: orders of units mod m, doubled for the norm condition
    let mut exps = Vec::new();
    for u in f.units() {
        let mut e = 1u64;
        let mut p = u.clone();
        loop {
            if m.contains(&(&p - &f.one())) {
                break;
            }
            p = m.reduce(&f.mul(&p, u));
            e += 1;
            if e > 1_000_000 {
                return Err(Error::Unsupported("unit order modulo m too large".into()));
            }
        }
        exps.push(2 * e);
    }
    // enumerate the finite quotient {+-1} x prod Z/M_i and collect members
    let mut lattice_gens: Vec<Vec<BigInt>> = Vec::new();
    let mut col = vec![BigInt::zero(); r + 1];
    col[0] = BigInt::from(2);
    lattice_gens.push(col);
    for (i, &e) in exps.iter().enumerate() {
        let mut c = vec![BigInt::zero(); r + 1];
        c[i + 1] = BigInt::from(e);
        lattice_gens.push(c);
    }
    let total: u64 = 2 * exps.iter().product::<u64>();
    let mut idx = vec![0u64; r + 1];
    for _ in 0..total {
        let mut u = if idx[0] == 1 { -f.one() } else { f.one() };
        for (i, &e) in idx[1..].iter().enumerate() {
            u = f.mul(&u, &f.pow(&f.units()[i], e as i64)?);
        }
        if member(&u) {
            lattice_gens.push(idx.iter().map(|&x| BigInt::from(x)).collect());
        }
        // advance the mixed-radix counter
        for j in 0..=r {
            idx[j] += 1;
            let lim = if j == 0 { 2 } else { exps[j - 1] };
            if idx[j] < lim {
                break;
            }
            idx[j] = 0;
        }
    }
    let mat: IMat = (0..=r).map(|i| lattice_gens.iter().map(|c| c[i].clone()).collect()).collect();
    let (h, _) = arith::hnf_columns(&mat).ok_or_else(|| Error::Degenerate("unit lattice".into()))?;
    let index = arith::det(&h).abs().to_u64().unwrap();
    let mut generators = Vec::new();
    let mut contains_minus_one = false;
    for j in 0..=r {
        let v: Vec<BigInt> = (0..=r).map(|i| h[i][j].clone()).collect();
        if v[1..].iter().all(|x| x.is_zero()) {
            if v[0].is_one() {
                contains_minus_one = true;
                generators.push(-f.one());
            }
            continue;
        }
        let mut u = if v[0].is_odd() { -f.one() } else { f.one() };
        for (i, e) in v[1..].iter().enumerate() {
            u = f.mul(&u, &f.pow(&f.units()[i], e.to_i64().unwrap())?);
        }
        generators.push(u);
    }
    Ok(UnitSubgroup { modulus: m.clone(), weight: k, generators, index, contains_minus_one })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discriminants_and_bases() {
        let f = Field::quadratic(10).unwrap();
        assert_eq!(f.discriminant(), &BigInt::from(40));
        let f5 = Field::quadratic(5).unwrap();
        assert_eq!(f5.discriminant(), &BigInt::from(5));
        assert_eq!(f5.integral_basis()[1], vec![arith::rat(1, 2), arith::rat(1, 2)]);
        assert_eq!(Field::rationals().discriminant(), &BigInt::one());
    }

    #[test]
    fn fundamental_units() {
        for (d, p, q) in [(2, (1, 1), (1, 1)), (3, (2, 1), (1, 1)), (10, (3, 1), (1, 1)), (7, (8, 1), (3, 1))] {
            let f = Field::quadratic(d).unwrap();
            let (x, y) = f.sqrt_parts(&f.units()[0]);
            assert_eq!((x, y), (arith::rat(p.0, p.1), arith::rat(q.0, q.1)), "D={d}");
        }
        let f = Field::quadratic(5).unwrap();
        assert_eq!(f.units()[0], Elt::from_ints(&[0, 1]));
        let f = Field::quadratic(13).unwrap();
        assert_eq!(f.sqrt_parts(&f.units()[0]), (arith::rat(3, 2), arith::rat(1, 2)));
        let f = Field::quadratic(10).unwrap();
        assert_eq!(f.norm(&f.units()[0]), qint(-1));
    }

    #[test]
    fn signs_and_norms() {
        let f = Field::quadratic(10).unwrap();
        let a = f.parse_elt("2 + w").unwrap();
        assert_eq!(f.sign_vector(&a).unwrap().signs(2), vec![1, -1]);
        assert_eq!(f.trace_and_norm(&a), (qint(4), qint(-6)));
        assert_eq!(f.trace_and_norm(&f.sqrt_d()), (qint(0), qint(-10)));
        assert_eq!(f.sgn_power(&-f.one(), SignVector(3)).unwrap(), 1);
        assert!(f.sign_vector(&f.zero()).is_err());
    }

    #[test]
    fn general_degree_signs_agree_with_quadratic_path() {
        let g = Field::from_spec(&FieldSpec::General {
            poly: vec![-1, -3, 0, 1],
            basis: None,
            units: vec![vec!["0".into(), "1".into(), "0".into()], vec!["1".into(), "1".into(), "0".into()]],
            class_group: Some(ClassData { h: 1, narrow_h: Some(1) }),
        })
        .unwrap();
        assert_eq!(g.discriminant(), &BigInt::from(81));
        let x = g.basis_elt(1);
        let s = g.sign_vector(&x).unwrap().signs(3);
        let v = g.embed_f64(&x);
        for i in 0..3 {
            assert_eq!(s[i] as f64, v[i].signum());
        }
        assert!(v[0] > v[1] && v[1] > v[2]);
    }

    #[test]
    fn element_parsing() {
        let f = Field::quadratic(10).unwrap();
        assert_eq!(f.parse_elt("2+sqrt(10)").unwrap(), Elt::from_ints(&[2, 1]));
        assert_eq!(f.parse_elt("(10)").unwrap(), Elt::from_ints(&[10, 0]));
        assert!(f.parse_elt("(1 + w").is_err());
        assert_eq!(f.parse_elt("(10 + sqrt(10))/20").unwrap(), Elt(vec![arith::rat(1, 2), arith::rat(1, 20)]));
        assert_eq!(f.parse_elt("1/2 - 3*w").unwrap(), Elt(vec![arith::rat(1, 2), qint(-3)]));
        assert_eq!(f.parse_elt("-w").unwrap(), Elt::from_ints(&[0, -1]));
        assert_eq!(f.parse_elt("7").unwrap(), Elt::from_ints(&[7, 0]));
        assert_eq!(f.parse_elt("10/20 + w/20").unwrap(), Elt(vec![arith::rat(1, 2), arith::rat(1, 20)]));
        match f.parse_elt("2 + x") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("{other:?}"),
        }
        let s = f.format_elt(&Elt(vec![arith::rat(1, 2), qint(-3)]));
        assert_eq!(f.parse_elt(&s).unwrap(), Elt(vec![arith::rat(1, 2), qint(-3)]));
    }

    #[test]
    fn inverse_and_power() {
        let f = Field::quadratic(5).unwrap();
        let a = f.parse_elt("3 + 2*w").unwrap();
        let ai = f.inv(&a).unwrap();
        assert_eq!(f.mul(&a, &ai), f.one());
        assert_eq!(f.pow(&a, -2).unwrap(), f.mul(&ai, &ai));
    }
}
