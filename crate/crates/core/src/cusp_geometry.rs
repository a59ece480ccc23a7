//! Congruence subgroups `Gamma(n; O, c)`, the cusp labelling `il`, totally positive
//! lattice bases and the constructive representatives used for constant terms.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::arith::{self, frac, QMat};
use crate::class_group::class_group;
use crate::error::{invalid, Error, Result};
use crate::field_core::{Elt, Field};
use crate::ideal_arith::{different, inverse_different, Ideal};
use crate::ray_class::narrow_class_group;

/// A 2x2 matrix over `F`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Mat2 {
    pub a: Elt,
    pub b: Elt,
    pub c: Elt,
    pub d: Elt,
}

impl Mat2 {
    pub fn new(a: Elt, b: Elt, c: Elt, d: Elt) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn identity(f: &Field) -> Self {
        Mat2::new(f.one(), f.zero(), f.zero(), f.one())
    }

    pub fn from_ints(f: &Field, m: [i64; 4]) -> Self {
        Mat2::new(f.from_int(m[0]), f.from_int(m[1]), f.from_int(m[2]), f.from_int(m[3]))
    }

    pub fn det(&self, f: &Field) -> Elt {
        &f.mul(&self.a, &self.d) - &f.mul(&self.b, &self.c)
    }

    pub fn mul(&self, f: &Field, o: &Mat2) -> Mat2 {
        Mat2::new(
            &f.mul(&self.a, &o.a) + &f.mul(&self.b, &o.c),
            &f.mul(&self.a, &o.b) + &f.mul(&self.b, &o.d),
            &f.mul(&self.c, &o.a) + &f.mul(&self.d, &o.c),
            &f.mul(&self.c, &o.b) + &f.mul(&self.d, &o.d),
        )
    }

    pub fn inverse(&self, f: &Field) -> Result<Mat2> {
        let di = f.inv(&self.det(f))?;
        Ok(Mat2::new(f.mul(&self.d, &di), -&f.mul(&self.b, &di), -&f.mul(&self.c, &di), f.mul(&self.a, &di)))
    }

    pub fn is_upper_triangular(&self) -> bool {
        self.c.is_zero()
    }

    /// Parses `"a,b,c,d"` (element literals) or a JSON array of four literals.
    pub fn parse(f: &Field, s: &str) -> Result<Mat2> {
        let t = s.trim();
        let parts: Vec<String> = if t.starts_with('[') {
            let v: Vec<serde_json::Value> = serde_json::from_str(t)
                .map_err(|e| Error::Parse { pos: e.column().saturating_sub(1), msg: e.to_string() })?;
            v.into_iter()
                .map(|x| match x {
                    serde_json::Value::String(s) => s,
                    other => other.to_string(),
                })
                .collect()
        } else {
            t.split(',').map(|x| x.to_string()).collect()
        };
        if parts.len() != 4 {
            return invalid(format!("matrix needs 4 entries, got {}", parts.len()));
        }
        let mut e = Vec::new();
        let mut offset = 0usize;
        for p in &parts {
            e.push(f.parse_elt(p).map_err(|err| match err {
                Error::Parse { pos, msg } => Error::Parse { pos: pos + offset, msg },
                other => other,
            })?);
            offset += p.len() + 1;
        }
        Ok(Mat2::new(e[0].clone(), e[1].clone(), e[2].clone(), e[3].clone()))
    }

    pub fn to_json(&self, f: &Field) -> serde_json::Value {
        serde_json::json!([f.format_elt(&self.a), f.format_elt(&self.b), f.format_elt(&self.c), f.format_elt(&self.d)])
    }

    pub fn display(&self, f: &Field) -> String {
        format!(
            "[[{}, {}], [{}, {}]]",
            f.format_elt(&self.a),
            f.format_elt(&self.b),
            f.format_elt(&self.c),
            f.format_elt(&self.d)
        )
    }
}

/// Which determinant condition a [`GroupSpec`] imposes.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DetConstraint {
    /// `ad - bc` a totally positive unit.
    Unit,
    /// `ad - bc = 1`.
    One,
}

/// `Gamma(n; O, c)` or `Gamma^1(n; O, c)`.
#[derive(Clone, Debug)]
pub struct GroupSpec {
    pub level: Ideal,
    pub twist: Ideal,
    pub det: DetConstraint,
}

impl GroupSpec {
    pub fn new(level: Ideal, twist: Ideal, det: DetConstraint) -> Self {
        GroupSpec { level, twist, det }
    }

    /// Ideal containing the upper-right entries: `c^{-1} d^{-1}`.
    pub fn upper_ideal(&self) -> Ideal {
        self.twist.inv().mul(&inverse_different(self.twist.field()))
    }

    /// Ideal containing the lower-left entries: `n c d`.
    pub fn lower_ideal(&self) -> Ideal {
        self.level.mul(&self.twist).mul(&different(self.twist.field()))
    }

    pub fn is_member(&self, g: &Mat2) -> bool {
        let f = self.twist.field();
        if !(g.a.is_integral() && g.d.is_integral()) {
            return false;
        }
        if !self.upper_ideal().contains(&g.b) || !self.lower_ideal().contains(&g.c) {
            return false;
        }
        let det = g.det(f);
        match self.det {
            DetConstraint::One => det == f.one(),
            DetConstraint::Unit => {
                det.is_integral() && f.norm(&det).abs().is_one() && f.is_totally_positive(&det)
            }
        }
    }

    /// Random element as a product of elementary matrices with small entries.
    pub fn random_element<R: Rng>(&self, rng: &mut R, factors: usize, height: i64) -> Mat2 {
        let f = self.twist.field().clone();
        let up = self.upper_ideal();
        let lo = self.lower_ideal();
        let mut m = Mat2::identity(&f);
        for i in 0..factors {
            let e = match (i + rng.gen_range(0..2)) % 3 {
                0 => Mat2::new(f.one(), random_in(&up, rng, height), f.zero(), f.one()),
                1 => Mat2::new(f.one(), f.zero(), random_in(&lo, rng, height), f.one()),
                _ => {
                    let u = random_unit(&f, rng, self.det == DetConstraint::One);
                    let ui = f.inv(&u).unwrap();
                    Mat2::new(u, f.zero(), f.zero(), ui)
                }
            };
            m = m.mul(&f, &e);
        }
        m
    }
}

/// Random element of an ideal with basis coefficients in `[-h, h]`.
pub fn random_in<R: Rng>(a: &Ideal, rng: &mut R, h: i64) -> Elt {
    let f = a.field();
    a.basis().iter().fold(f.zero(), |acc, b| &acc + &b.scale_int(rng.gen_range(-h..=h)))
}

/// Random element of `F^x` with small numerators and denominators.
pub fn random_nonzero<R: Rng>(f: &Field, rng: &mut R, h: i64) -> Elt {
    loop {
        let den = rng.gen_range(1..=h.max(1));
        let v: Vec<BigRational> =
            (0..f.degree()).map(|_| arith::rat(rng.gen_range(-h..=h), den)).collect();
        let x = Elt(v);
        if !x.is_zero() {
            return x;
        }
    }
}

fn random_unit<R: Rng>(f: &Field, rng: &mut R, _det_one: bool) -> Elt {
    let mut u = if rng.gen_bool(0.5) { f.one() } else { -&f.one() };
    for e in f.units() {
        let k = rng.gen_range(-1i64..=1);
        u = f.mul(&u, &f.pow(e, k).unwrap());
    }
    u
}

/// Random element of `SL_2(F)` as a product of elementary matrices.
pub fn random_sl2<R: Rng>(f: &Field, rng: &mut R, factors: usize, h: i64) -> Mat2 {
    let mut m = Mat2::identity(f);
    for i in 0..factors {
        let x = random_nonzero(f, rng, h);
        let e = if i % 2 == 0 {
            Mat2::new(f.one(), x, f.zero(), f.one())
        } else {
            Mat2::new(f.one(), f.zero(), x, f.one())
        };
        m = m.mul(f, &e);
    }
    m
}

/// Random element of `B^1(F)`.
pub fn random_borel<R: Rng>(f: &Field, rng: &mut R, h: i64) -> Mat2 {
    let t = random_nonzero(f, rng, h);
    let s = random_nonzero(f, rng, h);
    let ti = f.inv(&t).unwrap();
    Mat2::new(t, s, f.zero(), ti)
}

/// `il_c(m) = c c d^{-1} + a O`.
pub fn il_ideal(m: &Mat2, c: &Ideal) -> Result<Ideal> {
    let f = c.field();
    let mut parts = Vec::new();
    if !m.c.is_zero() {
        parts.push(c.mul(&inverse_different(f)).scale(&m.c)?);
    }
    if !m.a.is_zero() {
        parts.push(Ideal::principal(f, &m.a)?);
    }
    parts
        .into_iter()
        .reduce(|x, y| x.add(&y))
        .ok_or_else(|| Error::Degenerate("first column is zero".into()))
}

/// The variant `c c d + a O`, which is not invariant in general.
pub fn il_ideal_variant(m: &Mat2, c: &Ideal) -> Result<Ideal> {
    let f = c.field();
    let mut parts = Vec::new();
    if !m.c.is_zero() {
        parts.push(c.mul(&different(f)).scale(&m.c)?);
    }
    if !m.a.is_zero() {
        parts.push(Ideal::principal(f, &m.a)?);
    }
    parts
        .into_iter()
        .reduce(|x, y| x.add(&y))
        .ok_or_else(|| Error::Degenerate("first column is zero".into()))
}

/// Wide class of `il_c(m)` as discrete-log coordinates.
pub fn il_class(m: &Mat2, c: &Ideal) -> Result<Vec<i64>> {
    class_group(c.field())?.dlog(&il_ideal(m, c)?)
}

fn embedding_matrix(f: &Field, v: &[Elt]) -> Vec<Vec<f64>> {
    v.iter().map(|x| f.embed_f64(x)).collect()
}

fn solve_f64(rows: &[Vec<f64>], t: &[f64]) -> Option<Vec<f64>> {
    // rows[i] is the embedding of basis vector i; solve sum y_i rows[i] = t
    let d = t.len();
    let mut m: Vec<Vec<f64>> = (0..d).map(|r| {
        let mut row: Vec<f64> = (0..d).map(|i| rows[i][r]).collect();
        row.push(t[r]);
        row
    }).collect();
    for col in 0..d {
        let piv = (col..d).max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        for r in 0..d {
            if r != col {
                let fct = m[r][col] / m[col][col];
                for c in col..=d {
                    m[r][c] -= fct * m[col][c];
                }
            }
        }
    }
    Some((0..d).map(|i| m[i][d] / m[i][i]).collect())
}

fn coords_matrix(v: &[Elt]) -> QMat {
    // columns are the vectors
    let d = v.len();
    (0..d).map(|r| (0..d).map(|c| v[c].0[r].clone()).collect()).collect()
}

/// A Z-basis of `L` made of totally positive elements.
///
/// Lattice points near shifted copies of the diagonal give independent positive
/// vectors; the index of their span is then driven to 1 by replacing some `x_j`
/// with a fractional combination `sum a_i x_i`, `0 <= a_i < 1`, `a_j > 0`.
pub fn positive_basis(l: &Ideal) -> Result<Vec<Elt>> {
    let f = l.field().clone();
    let d = f.degree();
    let lb = l.basis();
    if d == 1 {
        return Ok(vec![Elt(vec![lb[0].0[0].abs()])]);
    }
    let emb = embedding_matrix(&f, &lb);
    let scale: f64 = emb.iter().flat_map(|r| r.iter()).fold(0.0f64, |a, &b| a.max(b.abs())) * d as f64;
    let mut r = scale.max(1.0) * 2.0;
    let mut xs: Vec<Elt> = Vec::new();
    for _ in 0..60 {
        xs.clear();
        for i in 0..d {
            let t: Vec<f64> = (0..d).map(|s| r * if s == i { 2.0 } else { 1.0 }).collect();
            let y = solve_f64(&emb, &t).ok_or_else(|| Error::Degenerate("singular embedding".into()))?;
            let x = lb.iter().zip(&y).fold(f.zero(), |acc, (b, &c)| &acc + &b.scale_int(c.round() as i64));
            xs.push(x);
        }
        if xs.iter().all(|x| f.is_totally_positive(x)) && !arith::qdet(&coords_matrix(&xs)).is_zero() {
            break;
        }
        r *= 2.0;
    }
    loop {
        let xm = coords_matrix(&xs);
        let xinv = arith::qinv(&xm).ok_or_else(|| Error::Degenerate("dependent vectors".into()))?;
        let mut swapped = false;
        for v in &lb {
            let a = arith::qmat_vec(&xinv, &v.0);
            if a.iter().all(|c| c.is_integer()) {
                continue;
            }
            let fr: Vec<BigRational> = a.iter().map(frac).collect();
            let j = (0..d).find(|&j| !fr[j].is_zero()).unwrap();
            let x = xs.iter().zip(&fr).fold(f.zero(), |acc, (xi, c)| &acc + &xi.scale(c));
            xs[j] = x;
            swapped = true;
            break;
        }
        if !swapped {
            return Ok(xs);
        }
    }
}

/// Totally positive `a` in `lattice` with `a` outside `p * lattice` for every listed prime,
/// of smallest norm among the points of the first search box containing one (ties broken by
/// trace, then coordinates).
pub fn avoid_primes(lattice: &Ideal, primes: &[Ideal]) -> Result<Elt> {
    let f = lattice.field().clone();
    let d = f.degree();
    let subs: Vec<Ideal> = primes.iter().map(|p| lattice.mul(p)).collect();
    let covol = lattice.norm().to_f64().unwrap().abs() * f.discriminant().to_f64().unwrap().abs().sqrt();
    let mut r = covol.powf(1.0 / d as f64).max(1.0);
    for _ in 0..12 {
        let mut best: Option<(BigRational, BigRational, Elt)> = None;
        for x in lattice.points_in_box(&vec![r; d]) {
            if x.is_zero() || !f.is_totally_positive(&x) || subs.iter().any(|c| c.contains(&x)) {
                continue;
            }
            let key = (f.norm(&x), f.trace(&x), x);
            if best.as_ref().map_or(true, |b| (&key.0, &key.1, &key.2) < (&b.0, &b.1, &b.2)) {
                best = Some(key);
            }
        }
        if let Some((_, _, x)) = best {
            return Ok(x);
        }
        r *= 2.0;
    }
    Err(Error::Verification("no totally positive element avoiding the primes".into()))
}

/// Totally positive `a` in `a_ideal` with `aO = a_ideal * n`, `n` integral and coprime to `m`.
pub fn coprime_generator(a_ideal: &Ideal, m: &Ideal) -> Result<(Elt, Ideal)> {
    let f = a_ideal.field();
    let primes = if m.is_unit() { vec![] } else { m.prime_divisors()? };
    let a = avoid_primes(a_ideal, &primes)?;
    let n = Ideal::principal(f, &a)?.mul(&a_ideal.inv());
    Ok((a, n))
}

/// Representatives `t_lambda` of the narrow class group, in narrow class order, with
/// `b d t_lambda` integral and coprime to `m`.
pub fn normalized_representatives(b: &Ideal, m: &Ideal) -> Result<Vec<Ideal>> {
    let f = b.field().clone();
    let narrow = narrow_class_group(&f)?;
    let dd = different(&f);
    let m_primes = if m.is_unit() { vec![] } else { m.prime_divisors()? };
    let mut out = Vec::new();
    for c in narrow.class_representatives(None)? {
        let bdc = b.mul(&dd).mul(&c);
        let mut c0 = Ideal::unit(&f);
        for p in &m_primes {
            let v = bdc.valuation(p);
            if v > 0 {
                c0 = c0.mul(&p.pow(v));
            }
        }
        let cc = positive_basis(&c0)?.remove(0);
        let n = Ideal::principal(&f, &cc)?.mul(&c0.inv());
        let (a, _) = coprime_generator(&n, m)?;
        let t = c.scale(&f.div(&a, &cc)?)?;
        let check = b.mul(&dd).mul(&t);
        if !check.is_integral() || !check.is_coprime(m) {
            return Err(Error::Verification("representative postcondition failed".into()));
        }
        out.push(t);
    }
    Ok(out)
}

/// The matrix attached to a cusp class.
#[derive(Clone, Debug)]
pub struct CuspRepresentative {
    pub matrix: Mat2,
    pub lambda: usize,
    /// `r_0`; the class of `O` marks the cusp at infinity.
    pub class_label: Ideal,
    /// `None` for the cusp at infinity.
    pub n1: Option<Ideal>,
    pub n2: Option<Ideal>,
}

impl CuspRepresentative {
    pub fn is_infinity(&self) -> bool {
        self.matrix.c.is_zero()
    }

    pub fn to_json(&self, f: &Field) -> serde_json::Value {
        serde_json::json!({
            "lambda": self.lambda,
            "class_label": if self.is_infinity() { serde_json::json!("infinity") } else { self.class_label.to_json() },
            "matrix": self.matrix.to_json(f),
            "n1": self.n1.as_ref().map(|n| n.to_json()),
            "n2": self.n2.as_ref().map(|n| n.to_json()),
        })
    }

    /// Re-checks every ideal condition exactly.
    pub fn verify(&self, t: &Ideal, b: &Ideal) -> Result<bool> {
        let f = t.field();
        let m = &self.matrix;
        if m.det(f) != f.one() {
            return Ok(false);
        }
        if self.is_infinity() {
            return Ok(true);
        }
        let (n1, n2) = (self.n1.as_ref().unwrap(), self.n2.as_ref().unwrap());
        let r0 = &self.class_label;
        let dtr = different(f).mul(t).mul(r0);
        Ok(Ideal::principal(f, &m.a)? == n2.mul(r0)
            && dtr.inv().contains(&m.b)
            && Ideal::principal(f, &m.c)? == n1.mul(&dtr)
            && r0.inv().contains(&m.d)
            && n1.is_integral()
            && n2.is_integral()
            && n1.is_coprime(n2)
            && n1.is_coprime(b)
            && il_ideal(m, &t.inv())? == *r0)
    }
}

/// A matrix `A` in `SL_2(F)` with `il_{t^{-1}}(A) = r0` and the divisibility pattern
/// `alpha O = n2 r0`, `gamma O = n1 d t r0`, `n1 + n2 = O`, `n1 + b = O`.
pub fn cusp_matrix(t: &Ideal, lambda: usize, r0: &Ideal, b: &Ideal) -> Result<CuspRepresentative> {
    let f = t.field().clone();
    if !r0.is_integral() {
        return invalid("class label must be integral");
    }
    let dtr = different(&f).mul(t).mul(r0);
    let b_primes = if b.is_unit() { vec![] } else { b.prime_divisors()? };
    let gamma = avoid_primes(&dtr, &b_primes)?;
    let n1 = Ideal::principal(&f, &gamma)?.mul(&dtr.inv());
    let (alpha, n2) = coprime_generator(r0, &n1)?;
    // x + y = 1 with x in alpha r0^{-1} = n2 and y in gamma (d t r0)^{-1} = n1
    let (x, y) = n2.split_one(&n1)?;
    let delta = f.div(&x, &alpha)?;
    let beta = -&f.div(&y, &gamma)?;
    let rep = CuspRepresentative {
        matrix: Mat2::new(alpha, beta, gamma, delta),
        lambda,
        class_label: r0.clone(),
        n1: Some(n1),
        n2: Some(n2),
    };
    if !rep.verify(t, b)? {
        return Err(Error::Verification("cusp matrix postconditions failed".into()));
    }
    Ok(rep)
}

/// One representative per cusp class of `Gamma^1_lambda(O)`, the cusp at infinity first.
/// Labels are wide class representatives, integral and coprime to `m`.
pub fn enumerate_cusps(t: &Ideal, lambda: usize, b: &Ideal, m: &Ideal) -> Result<Vec<CuspRepresentative>> {
    let f = t.field().clone();
    let cg = class_group(&f)?;
    let reps = cg.representatives(Some(m))?;
    let mut out = Vec::new();
    for (i, r0) in reps.iter().enumerate() {
        if i == 0 {
            out.push(CuspRepresentative {
                matrix: Mat2::identity(&f),
                lambda,
                class_label: Ideal::unit(&f),
                n1: None,
                n2: None,
            });
        } else {
            out.push(cusp_matrix(t, lambda, r0, b)?);
        }
    }
    Ok(out)
}

/// Integer matrix of `SL_2(Z)` from four integers, checking the determinant.
pub fn sl2z(f: &Arc<Field>, m: [i64; 4]) -> Result<Mat2> {
    if m[0] * m[3] - m[1] * m[2] != 1 {
        return invalid("matrix is not in SL_2(Z)");
    }
    Ok(Mat2::from_ints(f, m))
}

/// Coordinates helper used by tests: the determinant of a basis as an exact rational.
pub fn basis_determinant(v: &[Elt]) -> BigRational {
    arith::qdet(&coords_matrix(v))
}

/// `[O : L]`-scaled covolume: `det(HNF)/den^d` of a lattice.
pub fn lattice_determinant(l: &Ideal) -> BigRational {
    let d = l.degree();
    let h = l.hnf();
    let det = (0..d).fold(BigInt::one(), |acc, i| acc * &h[i][i]);
    BigRational::new(det, num_traits::pow(l.den().clone(), d))
}


#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q10() -> Arc<Field> {
        Field::quadratic(10).unwrap()
    }

    fn q10_sample_matrix(f: &Field) -> Mat2 {
        Mat2::parse(f, "2 + sqrt(10), (10 + sqrt(10))/20, 2*sqrt(10), 1").unwrap()
    }

    #[test]
    fn displayed_q10_matrix_membership_and_labels() {
        let f = q10();
        let m = q10_sample_matrix(&f);
        let o = Ideal::unit(&f);
        let g = GroupSpec::new(o.clone(), o.clone(), DetConstraint::Unit);
        assert!(g.is_member(&m));
        assert_eq!(il_ideal(&m, &o).unwrap(), o);
        let p = Ideal::parse(&f, "[2, w]").unwrap();
        assert_eq!(il_ideal_variant(&m, &o).unwrap(), p);
        let q = Field::rationals();
        let g5 = GroupSpec::new(Ideal::from_int(&q, 5).unwrap(), Ideal::unit(&q), DetConstraint::Unit);
        assert!(!g5.is_member(&Mat2::from_ints(&q, [1, 0, 1, 1])));
        assert!(g5.is_member(&Mat2::identity(&q)));
    }

    #[test]
    fn positive_bases() {
        let f = q10();
        for l in [Ideal::unit(&f), inverse_different(&f), Ideal::parse(&f, "[3, w - 1]").unwrap()] {
            let v = positive_basis(&l).unwrap();
            assert!(v.iter().all(|x| f.is_totally_positive(x) && l.contains(x)));
            assert_eq!(basis_determinant(&v).abs(), lattice_determinant(&l));
        }
    }

    #[test]
    fn coprime_generators_and_normalized_representatives() {
        let f = q10();
        let p = Ideal::parse(&f, "[2, w]").unwrap();
        let two = Ideal::from_int(&f, 2).unwrap();
        let (a, n) = coprime_generator(&p, &two).unwrap();
        assert!(f.is_totally_positive(&a) && p.contains(&a));
        assert!(n.is_integral() && n.is_coprime(&two));
        let six = Ideal::from_int(&f, 6).unwrap();
        let ts = normalized_representatives(&Ideal::unit(&f), &six).unwrap();
        assert_eq!(ts.len(), 2);
        for t in &ts {
            let x = different(&f).mul(t);
            assert!(x.is_integral() && x.is_coprime(&six));
        }
    }

    #[test]
    fn cusp_matrices() {
        let f = q10();
        let o = Ideal::unit(&f);
        let cusps = enumerate_cusps(&o, 0, &o, &o).unwrap();
        assert_eq!(cusps.len(), 2);
        assert!(cusps[0].is_infinity());
        assert!(cusps[1].verify(&o, &o).unwrap());
        let l0 = il_class(&cusps[0].matrix, &o).unwrap();
        let l1 = il_class(&cusps[1].matrix, &o).unwrap();
        assert_ne!(l0, l1);
        let q = Field::rationals();
        let oq = Ideal::unit(&q);
        assert_eq!(enumerate_cusps(&oq, 0, &Ideal::from_int(&q, 5).unwrap(), &oq).unwrap().len(), 1);
    }

    #[test]
    fn il_invariance_sample() {
        let f = q10();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let c = Ideal::parse(&f, "[2, w]").unwrap();
        let g = GroupSpec::new(Ideal::unit(&f), c.inv(), DetConstraint::One);
        for _ in 0..20 {
            let gm = g.random_element(&mut rng, 4, 2);
            assert!(g.is_member(&gm));
            let m = random_sl2(&f, &mut rng, 3, 3);
            let b = random_borel(&f, &mut rng, 3);
            let lhs = il_class(&gm.mul(&f, &m).mul(&f, &b), &c).unwrap();
            assert_eq!(lhs, il_class(&m, &c).unwrap());
        }
    }
}
