//! Fractional ideals as Hermite-normal-form lattices over the integral basis.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{self, qint, IMat};
use crate::error::{invalid, Error, Result};
use crate::field_core::{Elt, Field};

/// A nonzero fractional ideal `(1/den) * span_Z(columns of hnf)`.
#[derive(Clone)]
pub struct Ideal {
    field: Arc<Field>,
    hnf: IMat,
    den: BigInt,
}

impl PartialEq for Ideal {
    fn eq(&self, o: &Self) -> bool {
        self.den == o.den && self.hnf == o.hnf
    }
}

impl Eq for Ideal {}

impl Hash for Ideal {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.hnf.hash(state);
        self.den.hash(state);
    }
}

impl PartialOrd for Ideal {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Ideal {
    fn cmp(&self, o: &Self) -> Ordering {
        self.norm()
            .cmp(&o.norm())
            .then_with(|| self.den.cmp(&o.den))
            .then_with(|| self.hnf.cmp(&o.hnf))
    }
}

impl fmt::Debug for Ideal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Ideal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens: Vec<String> = self.basis().iter().map(|b| self.field.format_elt(b)).collect();
        write!(f, "({})", gens.join(", "))
    }
}

impl Ideal {
    /// Canonical ideal from an integer matrix whose columns span `den * I`.
    fn from_int_columns(field: &Arc<Field>, cols: &IMat, den: BigInt) -> Result<Ideal> {
        let (h, _) = arith::hnf_columns(cols).ok_or_else(|| Error::Degenerate("zero ideal".into()))?;
        let g = arith::gcd_all(h.iter().flatten()).gcd(&den);
        let (h, den) = if g.is_one() {
            (h, den)
        } else {
            (h.iter().map(|r| r.iter().map(|x| x / &g).collect()).collect(), den / &g)
        };
        Ok(Ideal { field: field.clone(), hnf: h, den })
    }

    /// Z-span of the given elements (caller guarantees O-module closure).
    pub fn from_z_span(field: &Arc<Field>, elts: &[Elt]) -> Result<Ideal> {
        let d = field.degree();
        if elts.is_empty() {
            return Err(Error::Degenerate("zero ideal".into()));
        }
        let den = arith::lcm_all(elts.iter().flat_map(|e| e.0.iter().map(|x| x.denom())));
        let dq = qint(den.clone());
        let cols: IMat = (0..d)
            .map(|i| elts.iter().map(|e| (&e.0[i] * &dq).to_integer()).collect())
            .collect();
        Ideal::from_int_columns(field, &cols, den)
    }

    /// The O-module generated by `gens`.
    pub fn from_generators(field: &Arc<Field>, gens: &[Elt]) -> Result<Ideal> {
        let d = field.degree();
        let mut z = Vec::with_capacity(gens.len() * d);
        for g in gens {
            if g.0.len() != d {
                return invalid("generator has wrong dimension");
            }
            for j in 0..d {
                z.push(field.mul(g, &field.basis_elt(j)));
            }
        }
        Ideal::from_z_span(field, &z)
    }

    pub fn principal(field: &Arc<Field>, a: &Elt) -> Result<Ideal> {
        Ideal::from_generators(field, std::slice::from_ref(a))
    }

    pub fn unit(field: &Arc<Field>) -> Ideal {
        Ideal { field: field.clone(), hnf: arith::identity(field.degree()), den: BigInt::one() }
    }

    pub fn from_int(field: &Arc<Field>, n: i64) -> Result<Ideal> {
        Ideal::principal(field, &field.from_int(n))
    }

    /// Ideal from an explicit HNF and denominator, validated as an O-module.
    pub fn from_hnf(field: &Arc<Field>, hnf: IMat, den: BigInt) -> Result<Ideal> {
        let d = field.degree();
        if hnf.len() != d || hnf.iter().any(|r| r.len() != d) || !den.is_positive() {
            return invalid("hnf must be a d x d matrix with positive denominator");
        }
        let out = Ideal::from_int_columns(field, &hnf, den)?;
        for b in out.basis() {
            for j in 0..d {
                if !out.contains(&field.mul(&b, &field.basis_elt(j))) {
                    return invalid("lattice is not an O-module");
                }
            }
        }
        Ok(out)
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn hnf(&self) -> &IMat {
        &self.hnf
    }

    pub fn den(&self) -> &BigInt {
        &self.den
    }

    pub fn degree(&self) -> usize {
        self.field.degree()
    }

    /// Z-basis (the HNF columns divided by the denominator).
    pub fn basis(&self) -> Vec<Elt> {
        let d = self.degree();
        (0..d)
            .map(|j| Elt((0..d).map(|i| BigRational::new(self.hnf[i][j].clone(), self.den.clone())).collect()))
            .collect()
    }

    pub fn norm(&self) -> BigRational {
        let p = (0..self.degree()).fold(BigInt::one(), |acc, i| acc * &self.hnf[i][i]);
        BigRational::new(p, num_traits::pow(self.den.clone(), self.degree()))
    }

    pub fn is_integral(&self) -> bool {
        self.den.is_one()
    }

    pub fn is_unit(&self) -> bool {
        self.den.is_one() && self.hnf == arith::identity(self.degree())
    }

    /// Smallest positive rational in the ideal.
    pub fn min_rational(&self) -> BigRational {
        BigRational::new(self.hnf[0][0].clone(), self.den.clone())
    }

    /// Coordinates of `x` over the HNF basis, if `x` lies in the ideal.
    pub fn coordinates(&self, x: &Elt) -> Option<Vec<BigInt>> {
        let d = self.degree();
        let dq = qint(self.den.clone());
        let v: Vec<BigRational> = x.0.iter().map(|c| c * &dq).collect();
        if !v.iter().all(|c| c.is_integer()) {
            return None;
        }
        let v: Vec<BigInt> = v.iter().map(|c| c.to_integer()).collect();
        let mut y = vec![BigInt::zero(); d];
        for r in (0..d).rev() {
            let mut s = v[r].clone();
            for j in r + 1..d {
                s -= &self.hnf[r][j] * &y[j];
            }
            let (q, rem) = s.div_rem(&self.hnf[r][r]);
            if !rem.is_zero() {
                return None;
            }
            y[r] = q;
        }
        Some(y)
    }

    pub fn contains(&self, x: &Elt) -> bool {
        self.coordinates(x).is_some()
    }

    pub fn contains_ideal(&self, o: &Ideal) -> bool {
        o.basis().iter().all(|b| self.contains(b))
    }

    /// Canonical representative of `x` modulo this integral ideal. `x` must be integral.
    pub fn reduce(&self, x: &Elt) -> Elt {
        debug_assert!(self.is_integral());
        let d = self.degree();
        let mut v: Vec<BigInt> = x.0.iter().map(|c| c.to_integer()).collect();
        for j in (0..d).rev() {
            let q = v[j].div_floor(&self.hnf[j][j]);
            if !q.is_zero() {
                for i in 0..=j {
                    v[i] -= &q * &self.hnf[i][j];
                }
            }
        }
        Elt(v.into_iter().map(qint).collect())
    }

    pub fn mul(&self, o: &Ideal) -> Ideal {
        let a = self.basis();
        let b = o.basis();
        let mut prods = Vec::with_capacity(a.len() * b.len());
        for x in &a {
            for y in &b {
                prods.push(self.field.mul(x, y));
            }
        }
        Ideal::from_z_span(&self.field, &prods).expect("product of nonzero ideals")
    }

    pub fn scale(&self, a: &Elt) -> Result<Ideal> {
        if a.is_zero() {
            return Err(Error::Degenerate("zero ideal".into()));
        }
        let v: Vec<Elt> = self.basis().iter().map(|b| self.field.mul(b, a)).collect();
        Ideal::from_z_span(&self.field, &v)
    }

    pub fn add(&self, o: &Ideal) -> Ideal {
        let mut v = self.basis();
        v.extend(o.basis());
        Ideal::from_z_span(&self.field, &v).expect("sum of nonzero ideals")
    }

    pub fn intersect(&self, o: &Ideal) -> Ideal {
        let d = self.degree();
        let l = self.den.lcm(&o.den);
        let fa = &l / &self.den;
        let fb = &l / &o.den;
        let mut m = arith::zeros(d, 2 * d);
        for i in 0..d {
            for j in 0..d {
                m[i][j] = &self.hnf[i][j] * &fa;
                m[i][d + j] = -(&o.hnf[i][j] * &fb);
            }
        }
        let k = arith::kernel_columns(&m).expect("full rank");
        let cols: IMat = (0..d)
            .map(|i| {
                (0..k[0].len())
                    .map(|c| (0..d).fold(BigInt::zero(), |acc, j| acc + &m[i][j] * &k[j][c]))
                    .collect()
            })
            .collect();
        Ideal::from_int_columns(&self.field, &cols, l).expect("intersection of nonzero ideals")
    }

    /// Trace dual `{x : Tr(x I) in Z}`.
    pub fn dual(&self) -> Ideal {
        let d = self.degree();
        let b: arith::QMat = (0..d)
            .map(|i| (0..d).map(|j| BigRational::new(self.hnf[i][j].clone(), self.den.clone())).collect())
            .collect();
        let t = arith::to_q(self.field.trace_form());
        let ti = arith::qinv(&t).expect("nondegenerate trace form");
        let bti = arith::qinv(&arith::transpose(&b)).expect("nonsingular basis");
        let y = arith::qmul(&ti, &bti);
        let elts: Vec<Elt> = (0..d).map(|j| Elt((0..d).map(|i| y[i][j].clone()).collect())).collect();
        Ideal::from_z_span(&self.field, &elts).expect("dual lattice")
    }

    pub fn inv(&self) -> Ideal {
        self.mul(&inverse_different(&self.field)).dual()
    }

    pub fn div(&self, o: &Ideal) -> Ideal {
        self.mul(&o.inv())
    }

    pub fn pow(&self, e: i64) -> Ideal {
        let base = if e < 0 { self.inv() } else { self.clone() };
        let mut n = e.unsigned_abs();
        let mut acc = Ideal::unit(&self.field);
        let mut b = base;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&b);
            }
            n >>= 1;
            if n > 0 {
                b = b.mul(&b);
            }
        }
        acc
    }

    /// Whether two integral ideals are coprime.
    pub fn is_coprime(&self, o: &Ideal) -> bool {
        self.add(o).is_unit()
    }

    /// `(x, y)` with `x` in `self`, `y` in `o` and `x + y = 1`, for coprime integral ideals.
    pub fn split_one(&self, o: &Ideal) -> Result<(Elt, Elt)> {
        let d = self.degree();
        let mut m = arith::zeros(d, 2 * d);
        for i in 0..d {
            for j in 0..d {
                m[i][j] = &self.hnf[i][j] * &o.den;
                m[i][d + j] = &o.hnf[i][j] * &self.den;
            }
        }
        let l = &self.den * &o.den;
        let mut t = vec![BigInt::zero(); d];
        t[0] = l;
        let s = arith::solve_integer(&m, &t).ok_or_else(|| Error::Degenerate("ideals are not coprime".into()))?;
        let x = Elt(
            (0..d)
                .map(|i| BigRational::new((0..d).fold(BigInt::zero(), |a, j| a + &self.hnf[i][j] * &s[j]), self.den.clone()))
                .collect(),
        );
        Ok((x.clone(), &self.field.one() - &x))
    }

    /// Primes dividing numerator or denominator of the norm.
    fn rational_primes(&self) -> Vec<u64> {
        let n = self.norm();
        let mut ps: Vec<u64> = Vec::new();
        for v in [n.numer(), n.denom(), &self.den] {
            let v = v.abs().to_u64().expect("norm fits in 64 bits");
            if v > 1 {
                ps.extend(arith::factor_u64(v).into_iter().map(|(p, _)| p));
            }
        }
        ps.sort_unstable();
        ps.dedup();
        ps
    }

    /// `v_p(self)` for a prime ideal `p`.
    pub fn valuation(&self, p: &Ideal) -> i64 {
        let pi = p.inv();
        let pr = p.min_rational().to_integer();
        let mut j = self.scale(&self.field.from_int(self.den.clone())).unwrap();
        let mut v = 0i64;
        while j.is_integral() && p.contains_ideal(&j) {
            j = j.mul(&pi);
            v += 1;
        }
        let mut dv = 0i64;
        let mut den = self.den.clone();
        while (&den % &pr).is_zero() {
            den /= &pr;
            dv += 1;
        }
        if dv > 0 {
            let e = Ideal::principal(&self.field, &self.field.from_int(pr)).unwrap().valuation(p);
            v -= dv * e;
        }
        v
    }

    /// Prime factorization, sorted by `(norm, hnf)`, with nonzero exponents.
    pub fn factor(&self) -> Result<Vec<(Ideal, i64)>> {
        let mut out = Vec::new();
        for p in self.rational_primes() {
            for q in primes_above(&self.field, p)? {
                let v = self.valuation(&q);
                if v != 0 {
                    out.push((q, v));
                }
            }
        }
        out.sort();
        Ok(out)
    }

    /// Primes dividing this integral ideal.
    pub fn prime_divisors(&self) -> Result<Vec<Ideal>> {
        Ok(self.factor()?.into_iter().map(|(p, _)| p).collect())
    }

    /// Parses `[g1, g2, ...]`, `(g1, ...)`, a single element, or `{"hnf": .., "den": n}`.
    pub fn parse(field: &Arc<Field>, s: &str) -> Result<Ideal> {
        let t = s.trim();
        if t.starts_with('{') {
            let v: serde_json::Value = serde_json::from_str(t)
                .map_err(|e| Error::Parse { pos: e.column().saturating_sub(1), msg: e.to_string() })?;
            let h = v
                .get("hnf")
                .and_then(|h| h.as_array())
                .ok_or_else(|| Error::Invalid("ideal object needs \"hnf\"".into()))?;
            let hnf: IMat = h
                .iter()
                .map(|r| {
                    r.as_array()
                        .ok_or_else(|| Error::Invalid("hnf rows must be arrays".into()))?
                        .iter()
                        .map(json_int)
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<_>>()?;
            let den = match v.get("den") {
                Some(x) => json_int(x)?,
                None => BigInt::one(),
            };
            return Ideal::from_hnf(field, hnf, den);
        }
        let (inner, off) = if (t.starts_with('[') && t.ends_with(']')) || (t.starts_with('(') && t.ends_with(')')) {
            (&t[1..t.len() - 1], 1)
        } else {
            (t, 0)
        };
        let mut gens = Vec::new();
        let mut pos = off;
        let mut depth = 0i32;
        let mut start = 0;
        let bytes: Vec<char> = inner.chars().collect();
        for (i, &c) in bytes.iter().enumerate() {
            match c {
                '(' => depth += 1,
                ')' => depth -= 1,
                ',' if depth == 0 => {
                    let part: String = bytes[start..i].iter().collect();
                    gens.push(parse_elt_at(field, &part, pos)?);
                    start = i + 1;
                    pos = off + i + 1;
                }
                _ => {}
            }
        }
        let part: String = bytes[start..].iter().collect();
        gens.push(parse_elt_at(field, &part, pos)?);
        if gens.iter().all(|g| g.is_zero()) {
            return Err(Error::Degenerate("zero ideal".into()));
        }
        let gens: Vec<Elt> = gens.into_iter().filter(|g| !g.is_zero()).collect();
        Ideal::from_generators(field, &gens)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "hnf": self.hnf.iter().map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "den": self.den.to_string(),
            "norm": self.norm().to_string(),
            "generators": self.basis().iter().map(|b| self.field.format_elt(b)).collect::<Vec<_>>(),
        })
    }
}

fn json_int(v: &serde_json::Value) -> Result<BigInt> {
    match v {
        serde_json::Value::Number(n) => n
            .as_i64()
            .map(BigInt::from)
            .ok_or_else(|| Error::Invalid("integer expected".into())),
        serde_json::Value::String(s) => s.trim().parse().map_err(|_| Error::Invalid(format!("integer expected: {s}"))),
        _ => invalid("integer expected"),
    }
}

fn parse_elt_at(field: &Arc<Field>, s: &str, pos: usize) -> Result<Elt> {
    field.parse_elt(s).map_err(|e| match e {
        Error::Parse { pos: p, msg } => Error::Parse { pos: p + pos, msg },
        other => other,
    })
}

/// The different ideal of `F`.
pub fn different(field: &Arc<Field>) -> Ideal {
    field.cache.different.get_or_init(|| inverse_different(field).inv_direct()).clone()
}

/// The inverse different, i.e. the trace dual of `O`.
pub fn inverse_different(field: &Arc<Field>) -> Ideal {
    field.cache.inverse_different.get_or_init(|| Ideal::unit(field).dual()).clone()
}

impl Ideal {
    // inverse without going through the cached inverse different
    fn inv_direct(&self) -> Ideal {
        let o = Ideal::unit(&self.field).dual();
        self.mul(&o).dual()
    }
}

impl Ideal {
    /// Lattice points whose embeddings satisfy `|x^sigma| <= bounds[sigma]` (up to a
    /// small floating margin; callers filter exactly).
    pub fn points_in_box(&self, bounds: &[f64]) -> Vec<Elt> {
        let d = self.degree();
        let basis = self.basis();
        let emb: Vec<Vec<f64>> = basis.iter().map(|b| self.field.embed_f64(b)).collect();
        // m[s][j] = sigma_s(b_j)
        let m: Vec<Vec<f64>> = (0..d).map(|s| (0..d).map(|j| emb[j][s]).collect()).collect();
        let mi = invert_f64(&m);
        let ranges: Vec<i64> = (0..d)
            .map(|j| {
                let r: f64 = (0..d).map(|s| mi[j][s].abs() * bounds[s]).sum();
                (r * (1.0 + 1e-9) + 1e-6).floor() as i64
            })
            .collect();
        let mut out = Vec::new();
        let mut idx: Vec<i64> = ranges.iter().map(|r| -r).collect();
        let margin = |s: usize| bounds[s] * (1.0 + 1e-9) + 1e-9;
        loop {
            let ok = (0..d).all(|s| {
                let v: f64 = (0..d).map(|j| idx[j] as f64 * m[s][j]).sum();
                v.abs() <= margin(s)
            });
            if ok {
                let x = (0..d).fold(self.field.zero(), |acc, j| {
                    if idx[j] == 0 {
                        acc
                    } else {
                        &acc + &basis[j].scale_int(idx[j])
                    }
                });
                out.push(x);
            }
            let mut k = 0;
            loop {
                if k == d {
                    return out;
                }
                idx[k] += 1;
                if idx[k] <= ranges[k] {
                    break;
                }
                idx[k] = -ranges[k];
                k += 1;
            }
        }
    }
}

pub fn invert_f64(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| a[x][c].abs().partial_cmp(&a[y][c].abs()).unwrap()).unwrap();
        a.swap(c, p);
        let pv = a[c][c];
        for v in a[c].iter_mut() {
            *v /= pv;
        }
        for r in 0..n {
            if r != c {
                let f = a[r][c];
                if f != 0.0 {
                    for k in 0..2 * n {
                        a[r][k] -= f * a[c][k];
                    }
                }
            }
        }
    }
    a.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Coset representatives of `I / J` for `J` contained in `I`.
pub fn coset_representatives(i: &Ideal, j: &Ideal) -> Result<Vec<Elt>> {
    let d = i.degree();
    let bi = i.basis();
    let mut m = arith::zeros(d, d);
    for (c, b) in j.basis().iter().enumerate() {
        let co = i.coordinates(b).ok_or_else(|| Error::Invalid("J is not contained in I".into()))?;
        for r in 0..d {
            m[r][c] = co[r].clone();
        }
    }
    let (diag, u, _) = arith::snf(&m);
    let ui = arith::iinv_unimodular(&u).expect("unimodular");
    // new basis of I: columns of B * U^{-1}
    let nb: Vec<Elt> = (0..d)
        .map(|c| {
            (0..d).fold(i.field.zero(), |acc, r| {
                if ui[r][c].is_zero() {
                    acc
                } else {
                    &acc + &bi[r].scale(&qint(ui[r][c].clone()))
                }
            })
        })
        .collect();
    let sizes: Vec<u64> = diag.iter().map(|x| x.to_u64().expect("index fits")).collect();
    let total: u64 = sizes.iter().product();
    if total > 50_000_000 {
        return Err(Error::Unsupported("index too large for coset enumeration".into()));
    }
    let mut out = Vec::with_capacity(total as usize);
    let mut idx = vec![0u64; d];
    for _ in 0..total {
        let mut x = i.field.zero();
        for k in 0..d {
            if idx[k] > 0 {
                x += &nb[k].scale_int(idx[k] as i64);
            }
        }
        out.push(x);
        for k in 0..d {
            idx[k] += 1;
            if idx[k] < sizes[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    Ok(out)
}

/// A generator `t` of `O` or of a suborder, its minimal polynomial and the index `[O : Z[t]]`.
fn monogenic_data(field: &Arc<Field>) -> (Elt, Vec<BigInt>, BigInt) {
    let d = field.degree();
    match d {
        1 => (field.one(), vec![BigInt::zero(), BigInt::one()], BigInt::one()),
        2 => {
            let w = field.basis_elt(1);
            let (t, n) = field.trace_and_norm(&w);
            (w, vec![n.to_integer(), -t.to_integer(), BigInt::one()], BigInt::one())
        }
        _ => {
            let mut e = vec![BigRational::zero(); d];
            e[1] = BigRational::one();
            let theta = field.from_power_coords(&e);
            let mut pows = vec![field.one()];
            for _ in 1..d {
                pows.push(field.mul(pows.last().unwrap(), &theta));
            }
            let tf: IMat = (0..d)
                .map(|i| (0..d).map(|j| field.trace(&field.mul(&pows[i], &pows[j])).to_integer()).collect())
                .collect();
            let disc = arith::det(&tf);
            let idx2 = &disc / field.discriminant();
            (theta, field.defining_polynomial().to_vec(), idx2.sqrt())
        }
    }
}

/// Prime ideals above the rational prime `p`, sorted.
pub fn primes_above(field: &Arc<Field>, p: u64) -> Result<Vec<Ideal>> {
    if field.degree() == 1 {
        return Ok(vec![Ideal::from_int(field, p as i64)?]);
    }
    let (t, g, index) = monogenic_data(field);
    if (&index % BigInt::from(p)).is_zero() {
        return Err(Error::Unsupported(format!("p = {p} divides the index of Z[theta]; cannot factor")));
    }
    let gp: Vec<u64> = g.iter().map(|c| c.mod_floor(&BigInt::from(p)).to_u64().unwrap()).collect();
    let facs = fp::factor(&gp, p);
    let mut out = Vec::new();
    for (h, _) in facs {
        let mut ht = field.zero();
        for c in h.iter().rev() {
            ht = &field.mul(&ht, &t) + &field.from_int(*c);
        }
        out.push(Ideal::from_generators(field, &[field.from_int(p), ht])?);
    }
    out.sort();
    Ok(out)
}

/// All integral ideals of norm at most `x`, sorted by `(norm, hnf)`.
pub fn ideals_up_to(field: &Arc<Field>, x: u64) -> Result<Vec<Ideal>> {
    let mut out = vec![Ideal::unit(field)];
    let mut p = 2u64;
    while p <= x {
        if arith::factor_u64(p).len() == 1 && arith::factor_u64(p)[0].1 == 1 {
            for q in primes_above(field, p)? {
                let nq = q.norm().to_integer().to_u64().unwrap();
                if nq > x {
                    continue;
                }
                let cur = out.clone();
                for a in cur {
                    let mut na = a.norm().to_integer().to_u64().unwrap();
                    let mut b = a;
                    while na.saturating_mul(nq) <= x {
                        b = b.mul(&q);
                        na *= nq;
                        out.push(b.clone());
                    }
                }
            }
        }
        p += 1;
    }
    out.sort();
    Ok(out)
}

/// Polynomial factorization over F_p; polynomials are coefficient vectors, low degree first.
pub(crate) mod fp {
    use super::*;

    fn trim(mut a: Vec<u64>) -> Vec<u64> {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    fn mulm(a: u64, b: u64, p: u64) -> u64 {
        ((a as u128 * b as u128) % p as u128) as u64
    }

    fn inv(a: u64, p: u64) -> u64 {
        powm(a, p - 2, p)
    }

    fn powm(mut a: u64, mut e: u64, p: u64) -> u64 {
        let mut r = 1 % p;
        a %= p;
        while e > 0 {
            if e & 1 == 1 {
                r = mulm(r, a, p);
            }
            a = mulm(a, a, p);
            e >>= 1;
        }
        r
    }

    fn sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let n = a.len().max(b.len());
        trim((0..n).map(|i| (a.get(i).copied().unwrap_or(0) + p - b.get(i).copied().unwrap_or(0)) % p).collect())
    }

    fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return vec![];
        }
        let mut r = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                r[i + j] = (r[i + j] + mulm(x, y, p)) % p;
            }
        }
        trim(r)
    }

    fn divrem(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
        let mut r = trim(a.to_vec());
        let db = b.len() - 1;
        let li = inv(*b.last().unwrap(), p);
        if r.len() < b.len() {
            return (vec![], r);
        }
        let mut q = vec![0u64; r.len() - db];
        while r.len() > db {
            let c = mulm(*r.last().unwrap(), li, p);
            let s = r.len() - 1 - db;
            q[s] = c;
            for (i, &bc) in b.iter().enumerate() {
                r[s + i] = (r[s + i] + p - mulm(c, bc, p)) % p;
            }
            r = trim(r);
        }
        (trim(q), r)
    }

    fn monic(a: Vec<u64>, p: u64) -> Vec<u64> {
        let li = inv(*a.last().unwrap(), p);
        a.iter().map(|&x| mulm(x, li, p)).collect()
    }

    fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut a = trim(a.to_vec());
        let mut b = trim(b.to_vec());
        while !b.is_empty() {
            let (_, r) = divrem(&a, &b, p);
            a = b;
            b = r;
        }
        monic(a, p)
    }

    fn powmod(base: &[u64], e: &BigUint, m: &[u64], p: u64) -> Vec<u64> {
        let mut r = vec![1u64];
        let mut b = divrem(base, m, p).1;
        for i in 0..e.bits() {
            if e.bit(i) {
                r = divrem(&mul(&r, &b, p), m, p).1;
            }
            b = divrem(&mul(&b, &b, p), m, p).1;
        }
        r
    }

    fn deriv(a: &[u64], p: u64) -> Vec<u64> {
        trim(a.iter().enumerate().skip(1).map(|(i, &c)| mulm(c, i as u64 % p, p)).collect())
    }

    /// Monic polynomials of degree `n` over F_p, in lexicographic order.
    fn all_monic(n: usize, p: u64) -> impl Iterator<Item = Vec<u64>> {
        let total = p.pow(n as u32);
        (0..total).map(move |mut k| {
            let mut v = Vec::with_capacity(n + 1);
            for _ in 0..n {
                v.push(k % p);
                k /= p;
            }
            v.push(1);
            v
        })
    }

    fn brute(f: &[u64], p: u64) -> Vec<(Vec<u64>, u32)> {
        let mut f = monic(trim(f.to_vec()), p);
        let mut out = Vec::new();
        let mut n = 1;
        while f.len() > 1 {
            if 2 * n > f.len() - 1 {
                out.push((f.clone(), 1));
                break;
            }
            for h in all_monic(n, p) {
                let mut e = 0;
                loop {
                    let (q, r) = divrem(&f, &h, p);
                    if !r.is_empty() {
                        break;
                    }
                    f = q;
                    e += 1;
                }
                if e > 0 {
                    out.push((h, e));
                }
            }
            n += 1;
        }
        out
    }

    fn equal_degree(f: &[u64], d: usize, p: u64, rng: &mut ChaCha8Rng) -> Vec<Vec<u64>> {
        if f.len() - 1 == d {
            return vec![f.to_vec()];
        }
        let e = (BigUint::from(p).pow(d as u32) - 1u32) / 2u32;
        loop {
            let a: Vec<u64> = trim((0..f.len() - 1).map(|_| rng.gen_range(0..p)).collect());
            if a.len() < 2 {
                continue;
            }
            let b = sub(&powmod(&a, &e, f, p), &[1], p);
            let g = if b.is_empty() { continue } else { gcd(f, &b, p) };
            if g.len() > 1 && g.len() < f.len() {
                let (q, _) = divrem(f, &g, p);
                let mut out = equal_degree(&g, d, p, rng);
                out.extend(equal_degree(&monic(q, p), d, p, rng));
                return out;
            }
        }
    }

    /// Irreducible monic factors with multiplicity, sorted.
    pub fn factor(f: &[u64], p: u64) -> Vec<(Vec<u64>, u32)> {
        let deg = trim(f.to_vec()).len() - 1;
        let mut out = if (p as f64).powi(deg as i32 / 2) <= 1e5 || p <= deg as u64 {
            brute(f, p)
        } else {
            let f = monic(trim(f.to_vec()), p);
            let mut rng = ChaCha8Rng::seed_from_u64(p);
            // squarefree part; p > deg so f' != 0
            let g = gcd(&f, &deriv(&f, p), p);
            let rad = monic(divrem(&f, &g, p).0, p);
            let mut rest = rad.clone();
            let mut irr = Vec::new();
            let x = vec![0, 1];
            let mut xp = x.clone();
            let mut d = 1;
            while rest.len() > 1 {
                if 2 * d > rest.len() - 1 {
                    irr.push(rest.clone());
                    break;
                }
                xp = powmod(&xp, &BigUint::from(p), &rest, p);
                let h = gcd(&rest, &sub(&xp, &x, p), p);
                if h.len() > 1 {
                    irr.extend(equal_degree(&h, d, p, &mut rng));
                    rest = monic(divrem(&rest, &h, p).0, p);
                    xp = divrem(&xp, &rest, p).1;
                }
                d += 1;
            }
            irr.into_iter()
                .map(|h| {
                    let mut e = 0;
                    let mut ff = f.clone();
                    loop {
                        let (q, r) = divrem(&ff, &h, p);
                        if !r.is_empty() {
                            break;
                        }
                        ff = q;
                        e += 1;
                    }
                    (h, e)
                })
                .collect()
        };
        out.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));
        out
    }

    #[cfg(test)]
    mod tests {
        use super::*;

        #[test]
        fn factors_mod_p() {
            // x^2 - 10 mod 3 = (x - 1)(x + 1)
            assert_eq!(factor(&[2, 0, 1], 3), vec![(vec![1, 1], 1), (vec![2, 1], 1)]);
            // x^2 - 10 mod 2 = x^2
            assert_eq!(factor(&[0, 0, 1], 2), vec![(vec![0, 1], 2)]);
            // x^2 + 1 mod 1000003 is irreducible (p = 3 mod 4)
            assert_eq!(factor(&[1, 0, 1], 1_000_003), vec![(vec![1, 0, 1], 1)]);
            // x^2 + 1 mod 1000033 splits (p = 1 mod 4)
            let f = factor(&[1, 0, 1], 1_000_033);
            assert_eq!(f.len(), 2);
            assert_eq!(mul(&f[0].0, &f[1].0, 1_000_033), vec![1, 0, 1]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q10() -> Arc<Field> {
        Field::quadratic(10).unwrap()
    }

    #[test]
    fn products_and_identities() {
        let f = q10();
        let p = Ideal::parse(&f, "[2, w]").unwrap();
        assert_eq!(p.mul(&p), Ideal::from_int(&f, 2).unwrap());
        assert_eq!(p.mul(&Ideal::unit(&f)), p);
        let dinv = inverse_different(&f);
        let a = dinv.scale(&f.parse_elt("2*w").unwrap()).unwrap();
        let b = Ideal::principal(&f, &f.parse_elt("2+w").unwrap()).unwrap();
        assert!(a.add(&b).is_unit());
        assert_eq!(p.mul(&p.inv()), Ideal::unit(&f));
    }

    #[test]
    fn different_factorization() {
        let f = q10();
        let d = different(&f);
        assert_eq!(d.norm(), qint(40));
        let fac = d.factor().unwrap();
        let p2 = Ideal::parse(&f, "[2, w]").unwrap();
        let p5 = Ideal::parse(&f, "[5, w]").unwrap();
        assert_eq!(fac, vec![(p2.clone(), 3), (p5, 1)]);
        let a = Ideal::principal(&f, &f.parse_elt("2+w").unwrap()).unwrap();
        let q3 = Ideal::parse(&f, "[3, w - 1]").unwrap();
        assert_eq!(a.factor().unwrap(), vec![(p2, 1), (q3, 1)]);
        assert!(Ideal::unit(&f).factor().unwrap().is_empty());
    }

    #[test]
    fn fractional_valuations() {
        let f = Field::quadratic(5).unwrap();
        let a = Ideal::principal(&f, &f.parse_elt("1/6").unwrap()).unwrap();
        let fac = a.factor().unwrap();
        let prod = fac.iter().fold(Ideal::unit(&f), |acc, (p, e)| acc.mul(&p.pow(*e)));
        assert_eq!(prod, a);
        assert!(fac.iter().all(|(_, e)| *e < 0));
    }

    #[test]
    fn cosets() {
        let q = Field::rationals();
        let i = Ideal::principal(&q, &q.parse_elt("1/5").unwrap()).unwrap();
        let reps = coset_representatives(&i, &Ideal::unit(&q)).unwrap();
        let mut r: Vec<BigRational> = reps.iter().map(|x| arith::frac(&x.0[0])).collect();
        r.sort();
        assert_eq!(r, (0..5).map(|k| arith::rat(k, 5)).collect::<Vec<_>>());
        let f = q10();
        let c = coset_representatives(&inverse_different(&f), &Ideal::unit(&f)).unwrap();
        assert_eq!(c.len(), 40);
        assert_eq!(coset_representatives(&Ideal::unit(&f), &Ideal::unit(&f)).unwrap().len(), 1);
    }

    #[test]
    fn ideal_enumeration() {
        let q = Field::rationals();
        assert_eq!(ideals_up_to(&q, 10).unwrap().len(), 10);
        let f = Field::quadratic(5).unwrap();
        let norms: Vec<BigRational> = ideals_up_to(&f, 5).unwrap().iter().map(|a| a.norm()).collect();
        assert_eq!(norms, vec![qint(1), qint(4), qint(5)]);
    }

    #[test]
    fn dedekind_identity() {
        let f = q10();
        let a = Ideal::parse(&f, "[6, 2 + w]").unwrap();
        let b = Ideal::parse(&f, "[4, w]").unwrap();
        assert_eq!(a.add(&b).mul(&a.intersect(&b)), a.mul(&b));
    }

    #[test]
    fn parse_errors() {
        let f = q10();
        assert!(matches!(Ideal::parse(&f, "[0]"), Err(Error::Degenerate(_))));
        match Ideal::parse(&f, "[2, 3 + x]") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 8),
            other => panic!("{other:?}"),
        }
        let j = Ideal::parse(&f, r#"{"hnf": [[2, 0], [0, 1]], "den": 1}"#).unwrap();
        assert_eq!(j, Ideal::parse(&f, "[2, w]").unwrap());
        assert!(Ideal::parse(&f, r#"{"hnf": [[3, 1], [0, 2]]}"#).is_err());
    }
}
