//! Wide class group of a real quadratic field via cycles of reduced ideals,
//! principality with explicit generators, and narrow principality.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{self, IMat};
use crate::error::{Error, Result};
use crate::field_core::{Elt, Field};
use crate::ideal_arith::{ideals_up_to, primes_above, Ideal};

/// The wide class group `Cl_F` with a presentation on small primes.
#[derive(Debug)]
pub struct ClassGroup {
    field: Arc<Field>,
    /// Cyclic orders (all > 1), divisibility chain.
    pub structure: Vec<u64>,
    /// Ideals generating each cyclic factor.
    pub generators: Vec<Ideal>,
    primes: Vec<Ideal>,
    // class key -> exponent vector over `primes`
    table: HashMap<(IMat, BigInt), Vec<i64>>,
    // rows map prime exponents to SNF coordinates
    v: IMat,
    full_structure: Vec<BigInt>,
}

impl ClassGroup {
    pub fn order(&self) -> u64 {
        self.structure.iter().product()
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    /// Coordinates of the class of `a` on [`ClassGroup::generators`].
    pub fn dlog(&self, a: &Ideal) -> Result<Vec<i64>> {
        if self.structure.is_empty() {
            return Ok(vec![]);
        }
        let key = class_key(a)?;
        let e = self
            .table
            .get(&key)
            .ok_or_else(|| Error::Verification("ideal class not found in class table".into()))?;
        let n = self.primes.len();
        let mut out = Vec::new();
        for (j, d) in self.full_structure.iter().enumerate() {
            if d.is_one() {
                continue;
            }
            let s = (0..n).fold(BigInt::zero(), |acc, i| acc + &self.v[i][j] * BigInt::from(e[i]));
            let m = d.to_i64().unwrap();
            out.push(((s % m + m) % m).to_i64().unwrap());
        }
        Ok(out)
    }

    /// Index of a class in `0..h` (mixed radix over the structure).
    pub fn class_index(&self, a: &Ideal) -> Result<u64> {
        let c = self.dlog(a)?;
        Ok(c.iter().zip(&self.structure).rev().fold(0u64, |acc, (&x, &n)| acc * n + x as u64))
    }

    /// `prod g_i^{c_i}` as an ideal.
    pub fn ideal_of(&self, c: &[i64]) -> Ideal {
        c.iter()
            .zip(&self.generators)
            .fold(Ideal::unit(&self.field), |acc, (&e, g)| acc.mul(&g.pow(e)))
    }

    /// One integral ideal per class, of smallest norm, optionally coprime to `m`,
    /// listed by class index.
    pub fn representatives(&self, coprime_to: Option<&Ideal>) -> Result<Vec<Ideal>> {
        let h = self.order() as usize;
        let mut reps: Vec<Option<Ideal>> = vec![None; h];
        let mut x = 8u64;
        loop {
            for a in ideals_up_to(&self.field, x)? {
                if let Some(m) = coprime_to {
                    if !a.is_coprime(m) {
                        continue;
                    }
                }
                let i = self.class_index(&a)? as usize;
                if reps[i].is_none() {
                    reps[i] = Some(a);
                }
            }
            if reps.iter().all(|r| r.is_some()) {
                return Ok(reps.into_iter().map(|r| r.unwrap()).collect());
            }
            x *= 4;
            if x > 1 << 24 {
                return Err(Error::Verification("class representatives not found".into()));
            }
        }
    }
}

/// Class group of `F` (cached on the field).
pub fn class_group(field: &Arc<Field>) -> Result<Arc<ClassGroup>> {
    field.cache.class_group.get_or_init(|| compute_class_group(field).map(Arc::new)).clone()
}

fn trivial(field: &Arc<Field>) -> ClassGroup {
    ClassGroup {
        field: field.clone(),
        structure: vec![],
        generators: vec![],
        primes: vec![],
        table: HashMap::new(),
        v: vec![],
        full_structure: vec![],
    }
}

fn compute_class_group(field: &Arc<Field>) -> Result<ClassGroup> {
    match field.degree() {
        1 => return Ok(trivial(field)),
        2 => {}
        _ => {
            return match field.class_data() {
                Some(c) if c.h == 1 => Ok(trivial(field)),
                Some(_) => Err(Error::InsufficientFieldData(
                    "class groups with h > 1 are only supported for quadratic fields".into(),
                )),
                None => Err(Error::InsufficientFieldData("class group data missing".into())),
            }
        }
    }
    // Minkowski bound sqrt(d_F)/2
    let disc = field.discriminant().to_f64().unwrap();
    let bound = (disc.sqrt() / 2.0).floor() as u64;
    let mut primes = Vec::new();
    for p in 2..=bound.max(1) {
        if arith::factor_u64(p).len() != 1 || arith::factor_u64(p)[0].1 != 1 {
            continue;
        }
        for q in primes_above(field, p)? {
            if q.norm().to_integer().to_u64().unwrap() <= bound {
                primes.push(q);
            }
        }
    }
    let n = primes.len();
    let mut table: HashMap<(IMat, BigInt), Vec<i64>> = HashMap::new();
    let mut reps: Vec<(Ideal, Vec<i64>)> = Vec::new();
    let o = Ideal::unit(field);
    table.insert(class_key(&o)?, vec![0; n]);
    reps.push((o, vec![0; n]));
    let mut relations: Vec<Vec<i64>> = Vec::new();
    let mut queue: VecDeque<usize> = VecDeque::from([0]);
    while let Some(k) = queue.pop_front() {
        let (a, e) = reps[k].clone();
        for (i, p) in primes.iter().enumerate() {
            let b = reduce(&a.mul(p))?.0;
            let key = class_key(&b)?;
            let mut eb = e.clone();
            eb[i] += 1;
            match table.get(&key) {
                Some(prev) => {
                    let rel: Vec<i64> = eb.iter().zip(prev).map(|(x, y)| x - y).collect();
                    if rel.iter().any(|&x| x != 0) {
                        relations.push(rel);
                    }
                }
                None => {
                    table.insert(key, eb.clone());
                    reps.push((b, eb));
                    queue.push_back(reps.len() - 1);
                }
            }
        }
    }
    if n == 0 {
        return Ok(trivial(field));
    }
    let rel: IMat = if relations.is_empty() {
        vec![vec![BigInt::zero(); n]]
    } else {
        relations.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    };
    let (diag, _, v) = arith::snf(&rel);
    let mut full = vec![BigInt::zero(); n];
    for (i, d) in diag.iter().enumerate().take(n) {
        full[i] = d.clone();
    }
    if full.iter().any(|d| d.is_zero()) {
        return Err(Error::Verification("class group relations are incomplete".into()));
    }
    let vi = arith::iinv_unimodular(&v).expect("unimodular");
    let mut structure = Vec::new();
    let mut generators = Vec::new();
    for (j, d) in full.iter().enumerate() {
        if d.is_one() {
            continue;
        }
        structure.push(d.to_u64().unwrap());
        let g = (0..n).fold(Ideal::unit(field), |acc, i| acc.mul(&primes[i].pow(vi[j][i].to_i64().unwrap())));
        generators.push(g);
    }
    let h = table.len() as u64;
    if structure.iter().product::<u64>() != h {
        return Err(Error::Verification("class group order mismatch".into()));
    }
    if let Some(c) = field.class_data() {
        if c.h != h {
            return Err(Error::Verification(format!("supplied h = {} but computed {h}", c.h)));
        }
    }
    Ok(ClassGroup { field: field.clone(), structure, generators, primes, table, v, full_structure: full })
}

/// Exact comparison `|x^sigma| < |y^sigma|`.
fn abs_lt(f: &Field, x: &Elt, y: &Elt, s: usize) -> bool {
    f.abs_lt(x, y, s)
}

/// Shortest vector of a rank-2 lattice under `Tr(x^2)`, by Lagrange reduction.
fn shortest(f: &Field, a: &Ideal) -> Elt {
    let mut b = a.basis();
    let q = |x: &Elt| f.trace(&f.square(x));
    let ip = |x: &Elt, y: &Elt| f.trace(&f.mul(x, y));
    if q(&b[1]) < q(&b[0]) {
        b.swap(0, 1);
    }
    loop {
        let mu = (ip(&b[0], &b[1]) / q(&b[0])).round();
        if !mu.is_zero() {
            b[1] = &b[1] - &b[0].scale(&mu);
        }
        if q(&b[1]) < q(&b[0]) {
            b.swap(0, 1);
        } else {
            return b[0].clone();
        }
    }
}

/// `(b, mu)` with `a = mu * b` and `b` reduced (1 is a minimum of `b`).
pub fn reduce(a: &Ideal) -> Result<(Ideal, Elt)> {
    let f = a.field();
    let mu = shortest(f, a);
    let b = a.scale(&f.inv(&mu)?)?;
    Ok((b, mu))
}

/// Successor of 1 in the chain of minima of the reduced ideal `b`.
fn next_minimum(f: &Field, b: &Ideal) -> Elt {
    let covol = b.norm().to_f64().unwrap() * f.discriminant().to_f64().unwrap().sqrt();
    let mut x1 = covol + 1.0;
    loop {
        let one = f.one();
        let mut best: Option<Elt> = None;
        for x in b.points_in_box(&[x1, 1.0]) {
            if x.is_zero() || x == one || x == -&one {
                continue;
            }
            if !abs_lt(f, &x, &one, 1) {
                continue;
            }
            let better = match &best {
                None => true,
                Some(y) => abs_lt(f, &x, y, 0),
            };
            if better {
                best = Some(x);
            }
        }
        if let Some(nu) = best {
            return if f.sign_at(&nu, 0) < 0 { -nu } else { nu };
        }
        x1 *= 2.0;
    }
}

/// The cycle of reduced ideals containing reduced `b`, with the steps `nu_i`
/// such that `cycle[i] = nu_i * cycle[i+1]`.
fn cycle(b: &Ideal) -> Result<Vec<(Ideal, Elt)>> {
    let f = b.field().clone();
    let mut out = Vec::new();
    let mut cur = b.clone();
    loop {
        let nu = next_minimum(&f, &cur);
        let next = cur.scale(&f.inv(&nu)?)?;
        out.push((cur, nu));
        if &next == b {
            return Ok(out);
        }
        if out.len() > 100_000 {
            return Err(Error::Verification("reduction cycle did not close".into()));
        }
        cur = next;
    }
}

fn class_key(a: &Ideal) -> Result<(IMat, BigInt)> {
    match a.degree() {
        1 => Ok((vec![vec![BigInt::one()]], BigInt::one())),
        2 => {
            let (b, _) = reduce(a)?;
            let c = cycle(&b)?;
            Ok(c.iter()
                .map(|(i, _)| (i.hnf().clone(), i.den().clone()))
                .min()
                .unwrap())
        }
        _ => match a.field().class_data() {
            Some(c) if c.h == 1 => Ok((vec![], BigInt::one())),
            _ => Err(Error::InsufficientFieldData("class group data missing".into())),
        },
    }
}

/// Generator of `a` if it is principal.
pub fn principal_generator(a: &Ideal) -> Result<Option<Elt>> {
    let f = a.field().clone();
    match f.degree() {
        1 => Ok(Some(f.from_rational(a.min_rational()))),
        2 => {
            let (b, mu) = reduce(a)?;
            let mut theta = mu;
            for (i, nu) in cycle(&b)? {
                if i.is_unit() {
                    debug_assert_eq!(Ideal::principal(&f, &theta)?, *a);
                    return Ok(Some(theta));
                }
                theta = f.mul(&theta, &nu);
            }
            Ok(None)
        }
        _ => Err(Error::InsufficientFieldData("principal generators need a quadratic field".into())),
    }
}

/// `(is principal, generator)`. For degree >= 3 with `h = 1` no generator is produced.
pub fn is_principal(a: &Ideal) -> Result<(bool, Option<Elt>)> {
    let f = a.field();
    if f.degree() >= 3 {
        return match f.class_data() {
            Some(c) if c.h == 1 => Ok((true, None)),
            _ => Err(Error::InsufficientFieldData("class group data missing".into())),
        };
    }
    let g = principal_generator(a)?;
    Ok((g.is_some(), g))
}

/// A totally positive generator of `a`, if one exists.
pub fn narrow_generator(a: &Ideal) -> Result<Option<Elt>> {
    let f = a.field().clone();
    let Some(theta) = principal_generator(a)? else { return Ok(None) };
    let mut cands = vec![theta.clone(), -&theta];
    for u in f.units() {
        let t = f.mul(&theta, u);
        cands.push(-&t);
        cands.push(t);
    }
    Ok(cands.into_iter().find(|c| f.is_totally_positive(c)))
}

/// Generator search by bounded enumeration, used to cross-check [`principal_generator`].
pub fn principal_generator_bruteforce(a: &Ideal) -> Result<Option<Elt>> {
    let f = a.field().clone();
    if f.degree() != 2 {
        return Err(Error::Unsupported("bounded search is implemented for quadratic fields".into()));
    }
    let n = a.norm();
    let eps = f.embed_f64(&f.units()[0])[0].abs();
    let r = (n.to_f64().unwrap() * eps).sqrt() * (1.0 + 1e-9);
    for x in a.points_in_box(&[r, r]) {
        if x.is_zero() {
            continue;
        }
        if f.norm(&x).abs() == n && Ideal::principal(&f, &x)? == *a {
            return Ok(Some(x));
        }
    }
    Ok(None)
}

/// Summary of the wide or narrow class group.
#[derive(Clone, Debug)]
pub struct IdealClassGroup {
    pub narrow: bool,
    pub structure: Vec<u64>,
    pub representatives: Vec<Ideal>,
    pub h: u64,
}

pub fn ideal_class_group(field: &Arc<Field>, narrow: bool, coprime_to: Option<&Ideal>) -> Result<IdealClassGroup> {
    if narrow {
        let g = crate::ray_class::narrow_class_group(field)?;
        let reps = g.class_representatives(coprime_to)?;
        return Ok(IdealClassGroup { narrow, structure: g.structure.clone(), h: g.order(), representatives: reps });
    }
    let g = class_group(field)?;
    let representatives = if field.degree() >= 3 { vec![Ideal::unit(field)] } else { g.representatives(coprime_to)? };
    Ok(IdealClassGroup { narrow, structure: g.structure.clone(), h: g.order(), representatives })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_numbers() {
        for (d, h) in [(2, 1), (3, 1), (5, 1), (6, 1), (7, 1), (10, 2), (15, 2), (26, 2), (79, 3), (82, 4), (229, 3)] {
            let f = Field::quadratic(d).unwrap();
            assert_eq!(class_group(&f).unwrap().order(), h, "D={d}");
        }
    }

    #[test]
    fn principality_q10() {
        let f = Field::quadratic(10).unwrap();
        let p = Ideal::parse(&f, "[2, w]").unwrap();
        assert_eq!(is_principal(&p).unwrap().0, false);
        let two = Ideal::from_int(&f, 2).unwrap();
        let (ok, g) = is_principal(&two).unwrap();
        assert!(ok);
        assert_eq!(Ideal::principal(&f, &g.unwrap()).unwrap(), two);
        let ng = narrow_generator(&two).unwrap().unwrap();
        assert!(f.is_totally_positive(&ng));
        let a = Ideal::principal(&f, &f.parse_elt("7 + 3*w").unwrap()).unwrap();
        let g = principal_generator(&a).unwrap().unwrap();
        assert_eq!(Ideal::principal(&f, &g).unwrap(), a);
        assert!(principal_generator_bruteforce(&a).unwrap().is_some());
        assert!(principal_generator_bruteforce(&p).unwrap().is_none());
    }

    #[test]
    fn dlog_is_additive() {
        let f = Field::quadratic(82).unwrap();
        let g = class_group(&f).unwrap();
        let ideals = ideals_up_to(&f, 40).unwrap();
        for a in ideals.iter().take(12) {
            for b in ideals.iter().take(12) {
                let da = g.dlog(a).unwrap();
                let db = g.dlog(b).unwrap();
                let dab = g.dlog(&a.mul(b)).unwrap();
                for i in 0..g.structure.len() {
                    assert_eq!((da[i] + db[i]) % g.structure[i] as i64, dab[i]);
                }
                let princ = principal_generator(&a.mul(b)).unwrap().is_some();
                assert_eq!(princ, dab.iter().all(|&x| x == 0));
            }
        }
    }

    #[test]
    fn representatives_are_integral_and_distinct() {
        let f = Field::quadratic(10).unwrap();
        let g = class_group(&f).unwrap();
        let six = Ideal::from_int(&f, 6).unwrap();
        let reps = g.representatives(Some(&six)).unwrap();
        assert_eq!(reps.len(), 2);
        for (i, r) in reps.iter().enumerate() {
            assert!(r.is_integral() && r.is_coprime(&six));
            assert_eq!(g.class_index(r).unwrap(), i as u64);
        }
    }
}
