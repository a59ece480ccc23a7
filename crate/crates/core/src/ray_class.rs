//! Narrow ray class groups `Cl(b)`, their characters, conductors and Gauss sums.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{self, frac, qint, IMat};
use crate::class_group::{class_group, principal_generator, ClassGroup};
use crate::cyclo::{Cyclo, CycloSum};
use crate::error::{invalid, Error, Result};
use crate::field_core::{Elt, Field, SignVector};
use crate::ideal_arith::{coset_representatives, different, Ideal};

/// Largest modulus norm accepted by [`ray_class_group`].
pub const MAX_MODULUS_NORM: u64 = 100_000;

/// `(O/b)^x` with a triangular presentation and a discrete-log table.
struct Residues {
    d: usize,
    h: Vec<Vec<i64>>,
    mt: Vec<Vec<Vec<i64>>>,
    radix: Vec<usize>,
    size: usize,
    gens: Vec<usize>,
    orders: Vec<u64>,
    // gens[j]^{orders[j]} = prod_{i<j} gens[i]^{rels[j][i]}
    rels: Vec<Vec<i64>>,
    dlog: Vec<Option<Vec<u32>>>,
    units: usize,
}

fn to_i64_mat(m: &IMat) -> Vec<Vec<i64>> {
    m.iter().map(|r| r.iter().map(|x| x.to_i64().expect("small modulus")).collect()).collect()
}

fn in_lattice(h: &[Vec<i64>], v: &[i64]) -> bool {
    let d = v.len();
    let mut y = vec![0i64; d];
    for r in (0..d).rev() {
        let mut s = v[r] as i128;
        for j in r + 1..d {
            s -= h[r][j] as i128 * y[j] as i128;
        }
        if s % h[r][r] as i128 != 0 {
            return false;
        }
        y[r] = (s / h[r][r] as i128) as i64;
    }
    true
}

impl Residues {
    fn new(field: &Field, b: &Ideal, primes: &[Ideal]) -> Residues {
        let d = field.degree();
        let h = to_i64_mat(b.hnf());
        let mt: Vec<Vec<Vec<i64>>> = field
            .mult_table()
            .iter()
            .map(|a| a.iter().map(|r| r.iter().map(|x| x.to_i64().unwrap()).collect()).collect())
            .collect();
        let mut radix = vec![1usize; d];
        for j in 1..d {
            radix[j] = radix[j - 1] * h[j - 1][j - 1] as usize;
        }
        let size = radix[d - 1] * h[d - 1][d - 1] as usize;
        let ph: Vec<Vec<Vec<i64>>> = primes.iter().map(|p| to_i64_mat(p.hnf())).collect();
        let mut res = Residues {
            d,
            h,
            mt,
            radix,
            size,
            gens: vec![],
            orders: vec![],
            rels: vec![],
            dlog: vec![None; size],
            units: 0,
        };
        let is_unit: Vec<bool> = (0..size).map(|i| {
            let v = res.vector(i);
            ph.iter().all(|p| !in_lattice(p, &v))
        }).collect();
        res.units = is_unit.iter().filter(|&&u| u).count();
        let one = res.index(&res.reduce(&{
            let mut v = vec![0i64; d];
            v[0] = 1;
            v
        }));
        res.dlog[one] = Some(vec![]);
        let mut members = vec![one];
        for u in 0..size {
            if members.len() == res.units {
                break;
            }
            if !is_unit[u] || res.dlog[u].is_some() {
                continue;
            }
            let uv = res.vector(u);
            let mut pw = uv.clone();
            let mut m = 1u64;
            loop {
                let idx = res.index(&pw);
                if res.dlog[idx].is_some() {
                    break;
                }
                pw = res.mul(&pw, &uv);
                m += 1;
            }
            let rel: Vec<i64> = res.dlog[res.index(&pw)].as_ref().unwrap().iter().map(|&x| x as i64).collect();
            let old = members.clone();
            let mut p = uv.clone();
            for j in 1..m {
                for &s in &old {
                    let t = res.index(&res.mul(&p, &res.vector(s)));
                    let mut e = res.dlog[s].clone().unwrap();
                    e.push(j as u32);
                    res.dlog[t] = Some(e);
                    members.push(t);
                }
                p = res.mul(&p, &uv);
            }
            for &s in &old {
                res.dlog[s].as_mut().unwrap().push(0);
            }
            res.gens.push(u);
            res.orders.push(m);
            res.rels.push(rel);
        }
        // pad exponent vectors to the final number of generators
        let n = res.gens.len();
        for e in res.dlog.iter_mut().flatten() {
            e.resize(n, 0);
        }
        res
    }

    fn vector(&self, mut i: usize) -> Vec<i64> {
        let mut v = vec![0i64; self.d];
        for j in 0..self.d {
            let hj = self.h[j][j] as usize;
            v[j] = (i % hj) as i64;
            i /= hj;
        }
        v
    }

    fn index(&self, v: &[i64]) -> usize {
        v.iter().zip(&self.radix).map(|(&x, &r)| x as usize * r).sum()
    }

    fn reduce(&self, v: &[i64]) -> Vec<i64> {
        let mut v: Vec<i128> = v.iter().map(|&x| x as i128).collect();
        for j in (0..self.d).rev() {
            let q = v[j].div_euclid(self.h[j][j] as i128);
            if q != 0 {
                for i in 0..=j {
                    v[i] -= q * self.h[i][j] as i128;
                }
            }
        }
        v.into_iter().map(|x| x as i64).collect()
    }

    fn mul(&self, a: &[i64], b: &[i64]) -> Vec<i64> {
        let d = self.d;
        let mut out = vec![0i128; d];
        for i in 0..d {
            if a[i] == 0 {
                continue;
            }
            for j in 0..d {
                if b[j] == 0 {
                    continue;
                }
                let ab = a[i] as i128 * b[j] as i128;
                for k in 0..d {
                    out[k] += ab * self.mt[i][j][k] as i128;
                }
            }
        }
        // reduce with i128 before narrowing
        for j in (0..d).rev() {
            let q = out[j].div_euclid(self.h[j][j] as i128);
            if q != 0 {
                for i in 0..=j {
                    out[i] -= q * self.h[i][j] as i128;
                }
            }
        }
        out.into_iter().map(|x| x as i64).collect()
    }

    fn index_of_elt(&self, b: &Ideal, x: &Elt) -> usize {
        let r = b.reduce(x);
        let v: Vec<i64> = r.0.iter().map(|c| c.to_integer().to_i64().unwrap()).collect();
        self.index(&v)
    }

    fn elt(&self, i: usize) -> Elt {
        Elt(self.vector(i).into_iter().map(qint).collect())
    }
}

/// The narrow ray class group modulo an integral ideal `b`.
pub struct RayClassGroup {
    field: Arc<Field>,
    pub modulus: Ideal,
    /// Primes outside the modulus that chosen representatives avoid.
    pub avoid: Ideal,
    /// Invariant factors (all > 1).
    pub structure: Vec<u64>,
    wide: Arc<ClassGroup>,
    wide_gens: Vec<Ideal>,
    wide_gen_powers: Vec<Elt>,
    residues: Residues,
    n_pres: usize,
    v: IMat,
    vinv: IMat,
    kept: Vec<(usize, u64)>,
}

impl fmt::Debug for RayClassGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cl({}) = {:?}", self.modulus, self.structure)
    }
}

fn cache_key(b: &Ideal, avoid: &Ideal) -> (IMat, IMat) {
    (b.hnf().clone(), avoid.hnf().clone())
}

/// `Cl(b)`.
pub fn ray_class_group(field: &Arc<Field>, b: &Ideal) -> Result<Arc<RayClassGroup>> {
    ray_class_group_avoiding(field, b, &Ideal::unit(field))
}

/// `Cl_F^+ = Cl(O)`.
pub fn narrow_class_group(field: &Arc<Field>) -> Result<Arc<RayClassGroup>> {
    ray_class_group(field, &Ideal::unit(field))
}

/// `Cl(b)` whose presentation ideals are also coprime to `avoid`.
pub fn ray_class_group_avoiding(field: &Arc<Field>, b: &Ideal, avoid: &Ideal) -> Result<Arc<RayClassGroup>> {
    if !b.is_integral() || !avoid.is_integral() {
        return invalid("ray class modulus must be integral");
    }
    let key = cache_key(b, avoid);
    if let Some(g) = field.cache.ray_groups.lock().unwrap().get(&key) {
        return Ok(g.clone());
    }
    let g = Arc::new(build(field, b, avoid)?);
    field.cache.ray_groups.lock().unwrap().insert(key, g.clone());
    Ok(g)
}

fn build(field: &Arc<Field>, b: &Ideal, avoid: &Ideal) -> Result<RayClassGroup> {
    let d = field.degree();
    if d >= 3 {
        return Err(Error::InsufficientFieldData(
            "ray class groups need principal generators, available only for degree <= 2".into(),
        ));
    }
    let nb = b.norm().to_integer().to_u64().unwrap_or(u64::MAX);
    if nb > MAX_MODULUS_NORM {
        return Err(Error::Unsupported(format!("modulus norm {nb} exceeds {MAX_MODULUS_NORM}")));
    }
    let wide = class_group(field)?;
    let primes_b = b.prime_divisors()?;
    let coprime_target = b.mul(avoid);
    let reps = wide.representatives(Some(&coprime_target))?;
    let mut wide_gens = Vec::new();
    let mut wide_gen_powers = Vec::new();
    let mut stride = 1usize;
    for &n in &wide.structure {
        let g = reps[stride].clone();
        let y = principal_generator(&g.pow(n as i64))?
            .ok_or_else(|| Error::Verification("class group generator power is not principal".into()))?;
        wide_gens.push(g);
        wide_gen_powers.push(y);
        stride *= n as usize;
    }
    let residues = Residues::new(field, b, &primes_b);
    let nw = wide_gens.len();
    let nr = residues.gens.len();
    let n_pres = nw + nr + d;
    let mut g = RayClassGroup {
        field: field.clone(),
        modulus: b.clone(),
        avoid: avoid.clone(),
        structure: vec![],
        wide: wide.clone(),
        wide_gens,
        wide_gen_powers,
        residues,
        n_pres,
        v: vec![],
        vinv: vec![],
        kept: vec![],
    };
    let mut rels: Vec<Vec<i64>> = Vec::new();
    for j in 0..nr {
        let mut r = vec![0i64; n_pres];
        r[nw + j] = g.residues.orders[j] as i64;
        for (i, &x) in g.residues.rels[j].iter().enumerate().take(j) {
            r[nw + i] -= x;
        }
        rels.push(r);
    }
    for s in 0..d {
        let mut r = vec![0i64; n_pres];
        r[nw + nr + s] = 2;
        rels.push(r);
    }
    let mut units = vec![-field.one()];
    units.extend(field.units().iter().cloned());
    for u in &units {
        rels.push(g.kappa(u)?);
    }
    for i in 0..nw {
        let mut r = g.kappa(&g.wide_gen_powers[i])?;
        for x in r.iter_mut() {
            *x = -*x;
        }
        r[i] += wide.structure[i] as i64;
        rels.push(r);
    }
    if n_pres > 0 {
        let m: IMat = rels.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        let (diag, _, v) = arith::snf(&m);
        let vinv = arith::iinv_unimodular(&v).expect("unimodular");
        let mut kept = Vec::new();
        for j in 0..n_pres {
            let dj = diag.get(j).cloned().unwrap_or_else(BigInt::zero);
            if dj.is_zero() {
                return Err(Error::Verification("ray class relations are incomplete".into()));
            }
            if !dj.is_one() {
                kept.push((j, dj.to_u64().unwrap()));
            }
        }
        g.structure = kept.iter().map(|&(_, n)| n).collect();
        g.v = v;
        g.vinv = vinv;
        g.kept = kept;
    }
    Ok(g)
}

impl RayClassGroup {
    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn order(&self) -> u64 {
        self.structure.iter().product()
    }

    /// Order of `(O/b)^x`.
    pub fn residue_units(&self) -> usize {
        self.residues.units
    }

    /// `h`, the wide class number used in the presentation.
    pub fn wide_class_number(&self) -> u64 {
        self.wide.order()
    }

    fn nw(&self) -> usize {
        self.wide_gens.len()
    }

    fn nr(&self) -> usize {
        self.residues.gens.len()
    }

    /// Index of the residue class of an integral `x`, if it is a unit mod `b`.
    fn unit_residue(&self, x: &Elt) -> Option<usize> {
        let i = self.residues.index_of_elt(&self.modulus, x);
        self.residues.dlog[i].as_ref().map(|_| i)
    }

    /// Presentation vector of the principal ideal `xO` via `(x mod^x b, sgn x)`.
    pub fn kappa(&self, x: &Elt) -> Result<Vec<i64>> {
        let f = &self.field;
        if x.is_zero() {
            return Err(Error::Degenerate("zero element".into()));
        }
        let xi = if x.is_integral() {
            x.clone()
        } else {
            let j = Ideal::unit(f).intersect(&Ideal::principal(f, x)?.inv());
            let (z, _) = j
                .split_one(&self.modulus)
                .map_err(|_| Error::Invalid("element is not coprime to the modulus".into()))?;
            f.mul(&z, x)
        };
        let i = self
            .unit_residue(&xi)
            .ok_or_else(|| Error::Invalid("element is not coprime to the modulus".into()))?;
        let mut out = vec![0i64; self.n_pres];
        let nw = self.nw();
        for (k, &e) in self.residues.dlog[i].as_ref().unwrap().iter().enumerate() {
            out[nw + k] = e as i64;
        }
        let s = f.sign_vector(x)?;
        for sg in 0..f.degree() {
            if s.bit(sg) {
                out[nw + self.nr() + sg] = 1;
            }
        }
        Ok(out)
    }

    /// Presentation vector of an ideal coprime to the modulus.
    pub fn presentation(&self, a: &Ideal) -> Result<Vec<i64>> {
        let f = &self.field;
        let e = self.wide.dlog(a)?;
        let mut j = a.clone();
        for (i, &ei) in e.iter().enumerate() {
            if ei != 0 {
                j = j.mul(&self.wide_gens[i].pow(-ei));
            }
        }
        let x = principal_generator(&j)?.ok_or_else(|| Error::Verification("class group dlog inconsistent".into()))?;
        let _ = f;
        let mut p = self.kappa(&x)?;
        for (i, &ei) in e.iter().enumerate() {
            p[i] += ei;
        }
        Ok(p)
    }

    /// Coordinates on the invariant factors of a presentation vector.
    pub fn reduce_presentation(&self, p: &[i64]) -> Vec<u64> {
        self.kept
            .iter()
            .map(|&(j, n)| {
                let s = p.iter().enumerate().fold(BigInt::zero(), |acc, (i, &x)| acc + &self.v[i][j] * BigInt::from(x));
                s.mod_floor(&BigInt::from(n)).to_u64().unwrap()
            })
            .collect()
    }

    /// Class of an ideal coprime to the modulus, on the invariant factors.
    pub fn dlog(&self, a: &Ideal) -> Result<Vec<u64>> {
        if !self.is_coprime(a)? {
            return invalid("ideal is not coprime to the modulus");
        }
        Ok(self.reduce_presentation(&self.presentation(a)?))
    }

    /// Whether a fractional ideal is coprime to the modulus.
    pub fn is_coprime(&self, a: &Ideal) -> Result<bool> {
        if self.modulus.is_unit() {
            return Ok(true);
        }
        for p in self.modulus.prime_divisors()? {
            if a.valuation(&p) != 0 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn extra_primes(&self) -> Result<Ideal> {
        let mut out = Ideal::unit(&self.field);
        if self.avoid.is_unit() {
            return Ok(out);
        }
        for p in self.avoid.prime_divisors()? {
            if !p.contains_ideal(&self.modulus) {
                out = out.mul(&p);
            }
        }
        Ok(out)
    }

    /// An integral `y` with `y = r mod b`, `y = 1` modulo the extra avoided primes, and
    /// the given sign vector.
    pub fn element_with(&self, r: &Elt, signs: SignVector) -> Result<Elt> {
        let f = &self.field;
        let extra = self.extra_primes()?;
        let mut y = if extra.is_unit() {
            self.modulus.reduce(r)
        } else {
            let (x, _) = self.modulus.split_one(&extra)?;
            &f.mul(r, &(&f.one() - &x)) + &x
        };
        if y.is_zero() {
            y = self.modulus.basis()[0].clone();
        }
        let lat = self.modulus.mul(&extra);
        if f.sign_vector(&y)? == signs {
            return Ok(y);
        }
        shifted_lattice_search(f, &lat, &y, signs)
    }

    /// An ideal coprime to the modulus and to `avoid` with the given presentation vector.
    pub fn ideal_for_presentation(&self, p: &[i64]) -> Result<Ideal> {
        let f = &self.field;
        let nw = self.nw();
        let nr = self.nr();
        let mut a = Ideal::unit(f);
        for i in 0..nw {
            if p[i] != 0 {
                a = a.mul(&self.wide_gens[i].pow(p[i]));
            }
        }
        let mut rv = vec![0i64; f.degree()];
        rv[0] = 1;
        let mut rv = self.residues.reduce(&rv);
        for j in 0..nr {
            let e = p[nw + j].rem_euclid(self.residues.orders[j] as i64 * 1_000_000);
            let g = self.residues.vector(self.residues.gens[j]);
            let mut pw = g.clone();
            let mut k = e;
            let mut acc = rv.clone();
            while k > 0 {
                if k & 1 == 1 {
                    acc = self.residues.mul(&acc, &pw);
                }
                pw = self.residues.mul(&pw, &pw);
                k >>= 1;
            }
            rv = acc;
        }
        let mut s = 0u32;
        for sg in 0..f.degree() {
            if p[nw + nr + sg].rem_euclid(2) == 1 {
                s |= 1 << sg;
            }
        }
        let r = Elt(rv.into_iter().map(qint).collect());
        let y = self.element_with(&r, SignVector(s))?;
        Ok(a.mul(&Ideal::principal(f, &y)?))
    }

    /// Presentation vectors of the invariant-factor generators.
    pub fn generator_presentations(&self) -> Vec<Vec<i64>> {
        self.kept
            .iter()
            .map(|&(j, _)| (0..self.n_pres).map(|i| self.vinv[j][i].to_i64().unwrap()).collect())
            .collect()
    }

    /// Ideals representing the invariant-factor generators.
    pub fn generator_ideals(&self) -> Result<Vec<Ideal>> {
        self.generator_presentations().iter().map(|p| self.ideal_for_presentation(p)).collect()
    }

    /// One integral ideal per class (smallest norm), coprime to the modulus and to
    /// `coprime_to`, ordered by the mixed-radix class index.
    pub fn class_representatives(&self, coprime_to: Option<&Ideal>) -> Result<Vec<Ideal>> {
        let n = self.order() as usize;
        let mut reps: Vec<Option<Ideal>> = vec![None; n];
        let mut x = 16u64;
        loop {
            for a in crate::ideal_arith::ideals_up_to(&self.field, x)? {
                if !self.is_coprime(&a)? {
                    continue;
                }
                if let Some(m) = coprime_to {
                    if !a.is_coprime(m) {
                        continue;
                    }
                }
                let i = self.class_index(&self.dlog(&a)?);
                if reps[i].is_none() {
                    reps[i] = Some(a);
                }
            }
            if reps.iter().all(|r| r.is_some()) {
                return Ok(reps.into_iter().map(|r| r.unwrap()).collect());
            }
            x *= 4;
            if x > 1 << 22 {
                return Err(Error::Verification("ray class representatives not found".into()));
            }
        }
    }

    pub fn class_index(&self, c: &[u64]) -> usize {
        c.iter().zip(&self.structure).rev().fold(0usize, |acc, (&x, &n)| acc * n as usize + x as usize)
    }

    pub fn class_from_index(&self, mut i: usize) -> Vec<u64> {
        self.structure
            .iter()
            .map(|&n| {
                let x = (i % n as usize) as u64;
                i /= n as usize;
                x
            })
            .collect()
    }

    /// All characters, the trivial one first.
    pub fn characters(self: &Arc<Self>) -> Vec<RayClassCharacter> {
        (0..self.order() as usize)
            .map(|i| {
                let c = self.class_from_index(i);
                let images = c.iter().zip(&self.structure).map(|(&a, &n)| arith::rat(a as i64, n as i64)).collect();
                RayClassCharacter::new(self.clone(), images)
            })
            .collect()
    }

    pub fn trivial_character(self: &Arc<Self>) -> RayClassCharacter {
        RayClassCharacter::new(self.clone(), vec![BigRational::zero(); self.structure.len()])
    }

    /// Every element of `(O/b)^x` as an integral representative.
    pub fn residue_units_list(&self) -> Vec<Elt> {
        (0..self.residues.size)
            .filter(|&i| self.residues.dlog[i].is_some())
            .map(|i| self.residues.elt(i))
            .collect()
    }
}

/// Element of `y + lat` with the prescribed signs, found by growing box search.
pub fn shifted_lattice_search(f: &Arc<Field>, lat: &Ideal, y: &Elt, signs: SignVector) -> Result<Elt> {
    let d = f.degree();
    let ye = f.embed_f64(y);
    let scale = lat.norm().to_f64().unwrap().powf(1.0 / d as f64) * f.discriminant().to_f64().unwrap().sqrt();
    let mut r = scale.max(1.0) * 2.0 + ye.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    for _ in 0..40 {
        let bounds = vec![2.0 * r; d];
        let mut best: Option<(f64, Elt)> = None;
        for b in lat.points_in_box(&bounds) {
            let x = y + &b;
            if x.is_zero() {
                continue;
            }
            if f.sign_vector(&x)? == signs {
                let h: f64 = f.embed_f64(&x).iter().map(|v| v.abs()).fold(0.0, f64::max);
                if best.as_ref().map_or(true, |(bh, _)| h < *bh) {
                    best = Some((h, x));
                }
            }
        }
        if let Some((_, x)) = best {
            return Ok(x);
        }
        r *= 2.0;
    }
    Err(Error::Verification("no lattice point with the requested signs".into()))
}

/// A character of a narrow ray class group, by its images (rationals mod 1) on the
/// invariant-factor generators.
#[derive(Clone)]
pub struct RayClassCharacter {
    group: Arc<RayClassGroup>,
    images: Vec<BigRational>,
    conductor: OnceLock<Ideal>,
}

impl fmt::Debug for RayClassCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let im: Vec<String> = self.images.iter().map(|x| x.to_string()).collect();
        write!(f, "chi[{} ; {}]", self.group.modulus, im.join(", "))
    }
}

impl PartialEq for RayClassCharacter {
    fn eq(&self, o: &Self) -> bool {
        self.group.modulus == o.group.modulus && self.images == o.images
    }
}

impl RayClassCharacter {
    pub fn new(group: Arc<RayClassGroup>, images: Vec<BigRational>) -> Self {
        let images = images.iter().map(frac).collect();
        RayClassCharacter { group, images, conductor: OnceLock::new() }
    }

    /// Character from images, checked against the generator orders.
    pub fn from_images(group: Arc<RayClassGroup>, images: Vec<BigRational>) -> Result<Self> {
        if images.len() != group.structure.len() {
            return invalid(format!("expected {} images, got {}", group.structure.len(), images.len()));
        }
        for (x, &n) in images.iter().zip(&group.structure) {
            if !(x * qint(n as i64)).is_integer() {
                return invalid(format!("image {x} incompatible with generator order {n}"));
            }
        }
        Ok(RayClassCharacter::new(group, images))
    }

    pub fn group(&self) -> &Arc<RayClassGroup> {
        &self.group
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.group.field
    }

    pub fn modulus(&self) -> &Ideal {
        &self.group.modulus
    }

    pub fn images(&self) -> &[BigRational] {
        &self.images
    }

    pub fn is_trivial(&self) -> bool {
        self.images.iter().all(|x| x.is_zero())
    }

    /// Order of the character.
    pub fn order(&self) -> u64 {
        arith::lcm_all(self.images.iter().map(|x| x.denom())).to_u64().unwrap()
    }

    /// Exponent `t` with value `exp(2 pi i t)` at a class given on the invariant factors.
    pub fn eval_class(&self, c: &[u64]) -> BigRational {
        frac(&c.iter().zip(&self.images).fold(BigRational::zero(), |acc, (&x, im)| acc + im * qint(x as i64)))
    }

    pub fn eval_presentation(&self, p: &[i64]) -> BigRational {
        self.eval_class(&self.group.reduce_presentation(p))
    }

    /// `psi(a)` as an exponent mod 1; `None` encodes the value 0.
    pub fn eval_ideal(&self, a: &Ideal) -> Result<Option<BigRational>> {
        if !self.group.is_coprime(a)? {
            return Ok(None);
        }
        Ok(Some(self.eval_class(&self.group.dlog(a)?)))
    }

    /// `psi_f(a) = psi(aO) sgn(a)^r`, `None` when `aO` is not coprime to the modulus.
    pub fn eval_f(&self, a: &Elt) -> Result<Option<BigRational>> {
        let g = &self.group;
        let xi = if a.is_integral() {
            a.clone()
        } else {
            match g.kappa(a) {
                Ok(p) => {
                    let mut q = vec![0i64; g.n_pres];
                    let (nw, nr) = (g.nw(), g.nr());
                    q[nw..nw + nr].copy_from_slice(&p[nw..nw + nr]);
                    return Ok(Some(self.eval_presentation(&q)));
                }
                Err(_) => return Ok(None),
            }
        };
        match g.unit_residue(&xi) {
            None => Ok(None),
            Some(i) => Ok(Some(self.eval_residue_index(i))),
        }
    }

    fn eval_residue_index(&self, i: usize) -> BigRational {
        let g = &self.group;
        let mut q = vec![0i64; g.n_pres];
        let nw = g.nw();
        for (k, &e) in g.residues.dlog[i].as_ref().unwrap().iter().enumerate() {
            q[nw + k] = e as i64;
        }
        self.eval_presentation(&q)
    }

    /// The signature `r`.
    pub fn signature(&self) -> SignVector {
        let g = &self.group;
        let d = g.field.degree();
        let mut s = 0u32;
        for sg in 0..d {
            let mut p = vec![0i64; g.n_pres];
            p[g.nw() + g.nr() + sg] = 1;
            if !self.eval_presentation(&p).is_zero() {
                s |= 1 << sg;
            }
        }
        SignVector(s)
    }

    pub fn inverse(&self) -> RayClassCharacter {
        RayClassCharacter::new(self.group.clone(), self.images.iter().map(|x| -x).collect())
    }

    /// Product of two characters on the same group.
    pub fn mul(&self, o: &RayClassCharacter) -> Result<RayClassCharacter> {
        if !Arc::ptr_eq(&self.group, &o.group) && self.group.modulus != o.group.modulus {
            return invalid("characters live on different groups");
        }
        Ok(RayClassCharacter::new(
            self.group.clone(),
            self.images.iter().zip(&o.images).map(|(a, b)| a + b).collect(),
        ))
    }

    /// The character `self o pi` on a group whose modulus is contained in ours.
    pub fn pullback(&self, target: &Arc<RayClassGroup>) -> Result<RayClassCharacter> {
        if !self.group.modulus.contains_ideal(&target.modulus) {
            return invalid("target modulus must be divisible by the character modulus");
        }
        let mut images = Vec::new();
        for a in target.generator_ideals()? {
            images.push(
                self.eval_ideal(&a)?
                    .ok_or_else(|| Error::Verification("generator ideal not coprime".into()))?,
            );
        }
        Ok(RayClassCharacter::new(target.clone(), images))
    }

    /// Whether `psi` is trivial on the kernel of `Cl(b) -> Cl(c)`.
    fn factors_through(&self, c: &Ideal) -> bool {
        let g = &self.group;
        (0..g.residues.size).all(|i| {
            if g.residues.dlog[i].is_none() {
                return true;
            }
            let r = g.residues.elt(i);
            if !c.contains(&(&r - &g.field.one())) {
                return true;
            }
            self.eval_residue_index(i).is_zero()
        })
    }

    pub fn conductor(&self) -> Ideal {
        self.conductor
            .get_or_init(|| {
                let mut c = self.group.modulus.clone();
                loop {
                    let mut shrunk = false;
                    for p in c.prime_divisors().expect("factorization of the modulus") {
                        let c2 = c.mul(&p.inv());
                        if self.factors_through(&c2) {
                            c = c2;
                            shrunk = true;
                            break;
                        }
                    }
                    if !shrunk {
                        return c;
                    }
                }
            })
            .clone()
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor() == self.group.modulus
    }

    /// The primitive character of `Cl(cond psi)` inducing `psi`.
    pub fn primitivize(&self) -> Result<RayClassCharacter> {
        let c = self.conductor();
        if c == self.group.modulus {
            return Ok(self.clone());
        }
        let f = &self.group.field;
        let avoid = self.group.modulus.mul(&self.group.avoid);
        let g = ray_class_group_avoiding(f, &c, &avoid)?;
        let mut images = Vec::new();
        for a in g.generator_ideals()? {
            images.push(
                self.eval_ideal(&a)?
                    .ok_or_else(|| Error::Verification("generator ideal not coprime".into()))?,
            );
        }
        Ok(RayClassCharacter::new(g, images))
    }

    /// Exact Gauss sum `tau(psi)`; requires `psi` primitive.
    pub fn gauss_sum(&self) -> Result<Cyclo> {
        let g = &self.group;
        let f = &g.field;
        let b = &g.modulus;
        if b.is_unit() {
            return Ok(Cyclo::one());
        }
        if !self.is_primitive() {
            return invalid("Gauss sums are taken on primitive characters");
        }
        let dd = different(f);
        let j = b.mul(&dd);
        let jinv = j.inv();
        // y0 in bd with y0 (bd)^{-1} = n coprime to b, so x y0 is integral for x in (bd)^{-1}
        let y0 = element_with_coprime_cofactor(&j, b)?;
        let n = Ideal::principal(f, &y0)?.mul(&jinv);
        let psi_n = self
            .eval_ideal(&n)?
            .ok_or_else(|| Error::Verification("cofactor not coprime".into()))?;
        let r = self.signature();
        let sgn_y0 = f.sgn_power(&y0, r)?;
        let reps = coset_representatives(&jinv, &crate::ideal_arith::inverse_different(f))?;
        let mut terms: Vec<BigRational> = Vec::with_capacity(reps.len());
        for x in &reps {
            let xy = f.mul(x, &y0);
            let Some(i) = g.unit_residue(&xy) else { continue };
            let t = self.eval_residue_index(i) + f.trace(x);
            terms.push(frac(&t));
        }
        let m = arith::lcm_all(terms.iter().map(|t| t.denom()))
            .lcm(psi_n.denom())
            .to_u64()
            .unwrap()
            .max(1);
        let mut s = CycloSum::new(m.lcm(&2));
        for t in &terms {
            s.add_root(t, &BigRational::one());
        }
        let mut pre = frac(&-psi_n);
        if sgn_y0 < 0 {
            pre = frac(&(pre + arith::rat(1, 2)));
        }
        Ok(s.finish().mul(&Cyclo::root_of_unity(&pre)))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "modulus": self.group.modulus.to_json(),
            "images": self.images.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            "order": self.order(),
            "conductor": self.conductor().to_json(),
            "signature": self.signature().signs(self.field().degree()).iter().map(|&s| if s < 0 { 1 } else { 0 }).collect::<Vec<u8>>(),
        })
    }
}

/// Some `a` in `a_ideal` with `a O a_ideal^{-1}` coprime to `m`.
pub fn element_with_coprime_cofactor(a_ideal: &Ideal, m: &Ideal) -> Result<Elt> {
    let f = a_ideal.field().clone();
    let primes = m.prime_divisors()?;
    let base = a_ideal.norm().to_f64().unwrap().powf(1.0 / f.degree() as f64)
        * f.discriminant().to_f64().unwrap().sqrt();
    let mut r = base.max(1.0);
    let ainv = a_ideal.inv();
    for _ in 0..30 {
        let mut pts = a_ideal.points_in_box(&vec![r; f.degree()]);
        pts.sort_by(|x, y| {
            let hx: f64 = f.embed_f64(x).iter().map(|v| v.abs()).sum();
            let hy: f64 = f.embed_f64(y).iter().map(|v| v.abs()).sum();
            hx.partial_cmp(&hy).unwrap().then_with(|| x.cmp(y))
        });
        for x in pts {
            if x.is_zero() {
                continue;
            }
            let n = Ideal::principal(&f, &x)?.mul(&ainv);
            if primes.iter().all(|p| !p.contains_ideal(&n)) {
                return Ok(x);
            }
        }
        r *= 2.0;
    }
    Err(Error::Verification("no element with coprime cofactor found".into()))
}

/// Parses a character: `{"modulus": <ideal>, "images": [...]}` or
/// `{"modulus": <ideal>, "index": i}` or `"id"` (trivial mod O).
pub fn parse_character(field: &Arc<Field>, s: &str) -> Result<RayClassCharacter> {
    let t = s.trim();
    if t == "id" || t == "trivial" {
        return Ok(narrow_class_group(field)?.trivial_character());
    }
    let v: serde_json::Value = serde_json::from_str(t)
        .map_err(|e| Error::Parse { pos: e.column().saturating_sub(1), msg: e.to_string() })?;
    let m = v.get("modulus").ok_or_else(|| Error::Invalid("character needs \"modulus\"".into()))?;
    let ms = match m {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    let b = Ideal::parse(field, &ms)?;
    let g = ray_class_group(field, &b)?;
    if let Some(i) = v.get("index").and_then(|x| x.as_u64()) {
        let chars = g.characters();
        return chars
            .get(i as usize)
            .cloned()
            .ok_or_else(|| Error::Invalid(format!("character index {i} out of range ({})", chars.len())));
    }
    let imgs = v
        .get("images")
        .and_then(|x| x.as_array())
        .ok_or_else(|| Error::Invalid("character needs \"images\" or \"index\"".into()))?;
    let images = imgs
        .iter()
        .map(|x| match x {
            serde_json::Value::String(s) => crate::field_core::parse_rational(s),
            serde_json::Value::Number(n) => Ok(qint(n.as_i64().unwrap_or(0))),
            _ => invalid("image must be a rational string"),
        })
        .collect::<Result<Vec<_>>>()?;
    RayClassCharacter::from_images(g, images)
}

/// Dirichlet character over `Q` as a map on residues mod `N`: exponents of `chi(a)`.
pub fn dirichlet_table(chi: &RayClassCharacter) -> Result<HashMap<i64, BigRational>> {
    let f = chi.field();
    if f.degree() != 1 {
        return invalid("Dirichlet tables need F = Q");
    }
    let n = chi.modulus().min_rational().to_integer().to_i64().unwrap();
    let mut out = HashMap::new();
    for a in 0..n.max(1) {
        if let Some(v) = chi.eval_f(&f.from_int(a))? {
            out.insert(a, v);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    #[test]
    fn rational_ray_class_groups() {
        let q = Field::rationals();
        let g = ray_class_group(&q, &Ideal::from_int(&q, 5).unwrap()).unwrap();
        assert_eq!(g.structure, vec![4]);
        let g4 = ray_class_group(&q, &Ideal::from_int(&q, 4).unwrap()).unwrap();
        assert_eq!(g4.order(), 2);
        let chars = g4.characters();
        assert_eq!(chars[1].signature(), SignVector(1));
        assert_eq!(narrow_class_group(&q).unwrap().order(), 1);
    }

    #[test]
    fn quadratic_character_mod_5() {
        let q = Field::rationals();
        let g = ray_class_group(&q, &Ideal::from_int(&q, 5).unwrap()).unwrap();
        let chars = g.characters();
        assert_eq!(chars.len(), 4);
        let quad = chars.iter().find(|c| c.order() == 2).unwrap();
        assert_eq!(quad.signature(), SignVector(0));
        assert_eq!(quad.eval_ideal(&Ideal::from_int(&q, 2).unwrap()).unwrap(), Some(rat(1, 2)));
        assert_eq!(quad.eval_ideal(&Ideal::from_int(&q, 10).unwrap()).unwrap(), None);
        let tau = quad.gauss_sum().unwrap();
        assert_eq!(tau.mul(&tau), Cyclo::int(5));
        assert!(tau.to_cball(64).re.to_f64() > 0.0);
    }

    #[test]
    fn conductors() {
        let q = Field::rationals();
        let g = ray_class_group(&q, &Ideal::from_int(&q, 25).unwrap()).unwrap();
        let quad = g.characters().into_iter().find(|c| c.order() == 2).unwrap();
        assert_eq!(quad.conductor(), Ideal::from_int(&q, 5).unwrap());
        let p = quad.primitivize().unwrap();
        assert_eq!(p.modulus(), &Ideal::from_int(&q, 5).unwrap());
        assert_eq!(p.primitivize().unwrap(), p);
        assert_eq!(g.trivial_character().conductor(), Ideal::unit(&q));
    }

    #[test]
    fn quadratic_field_groups() {
        let f = Field::quadratic(10).unwrap();
        let n = narrow_class_group(&f).unwrap();
        assert_eq!(n.order(), 2);
        let three = Ideal::from_int(&f, 3).unwrap();
        let g = ray_class_group(&f, &three).unwrap();
        // h * #((O/3)^x x {+-1}^2) / #image of the units
        let e = f.units()[0].clone();
        let mut units = std::collections::HashSet::new();
        let mut u = f.one();
        for _ in 0..200 {
            for s in [u.clone(), -&u] {
                units.insert((three.reduce(&s), f.sign_vector(&s).unwrap()));
            }
            u = f.mul(&u, &e);
        }
        let expect = 2 * (g.residue_units() as u64 * 4) / units.len() as u64;
        assert_eq!(g.order(), expect);
    }

    #[test]
    fn gauss_sum_modulus_over_q10() {
        let f = Field::quadratic(10).unwrap();
        for m in ["[3, w - 1]", "[2, w]", "[5, w]"] {
            let b = Ideal::parse(&f, m).unwrap();
            let g = ray_class_group(&f, &b).unwrap();
            for chi in g.characters() {
                if !chi.is_primitive() {
                    continue;
                }
                let t = chi.gauss_sum().unwrap();
                assert_eq!(t.mul(&t.conj()).as_rational(), Some(b.norm()), "{chi:?}");
            }
        }
    }

    #[test]
    fn psi_f_is_multiplicative_and_descends() {
        let f = Field::quadratic(5).unwrap();
        let b = Ideal::from_int(&f, 4).unwrap();
        let g = ray_class_group(&f, &b).unwrap();
        let us = g.residue_units_list();
        for chi in g.characters() {
            for a in us.iter().take(6) {
                for c in us.iter().take(6) {
                    let ac = f.mul(a, c);
                    let lhs = chi.eval_f(&ac).unwrap().unwrap();
                    let rhs = frac(&(chi.eval_f(a).unwrap().unwrap() + chi.eval_f(c).unwrap().unwrap()));
                    assert_eq!(lhs, rhs);
                    let shifted = &ac + &b.basis()[1];
                    assert_eq!(chi.eval_f(&shifted).unwrap().unwrap(), lhs);
                }
            }
        }
    }
}
