//! Exact elements of cyclotomic fields `Q(zeta_m)`, reduced modulo `Phi_m`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rug::float::Constant;
use rug::Float;

use crate::arith::qint;
use crate::precision::{Ball, CBall};

fn cyclotomic_cache() -> &'static Mutex<HashMap<u64, Vec<BigInt>>> {
    static C: OnceLock<Mutex<HashMap<u64, Vec<BigInt>>>> = OnceLock::new();
    C.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Coefficients of the cyclotomic polynomial `Phi_m`, low degree first.
pub fn cyclotomic_poly(m: u64) -> Vec<BigInt> {
    if let Some(p) = cyclotomic_cache().lock().unwrap().get(&m) {
        return p.clone();
    }
    // x^m - 1 divided by Phi_d for every proper divisor d
    let mut num = vec![BigInt::zero(); m as usize + 1];
    num[0] = -BigInt::one();
    num[m as usize] = BigInt::one();
    for d in 1..m {
        if m % d == 0 {
            let den = cyclotomic_poly(d);
            num = poly_div_exact(&num, &den);
        }
    }
    cyclotomic_cache().lock().unwrap().insert(m, num.clone());
    num
}

fn poly_div_exact(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let mut q = vec![BigInt::zero(); a.len() - db];
    for i in (0..q.len()).rev() {
        let c = r[i + db].clone();
        q[i] = c.clone();
        for (j, bc) in b.iter().enumerate() {
            r[i + j] -= &c * bc;
        }
    }
    q
}

pub fn euler_phi(m: u64) -> u64 {
    crate::arith::factor_u64(m).iter().fold(m, |acc, &(p, _)| acc / p * (p - 1))
}

/// An element `sum c_j zeta_m^j`, `0 <= j < phi(m)`.
#[derive(Clone, Debug)]
pub struct Cyclo {
    m: u64,
    c: Vec<BigRational>,
}

impl Cyclo {
    pub fn zero() -> Cyclo {
        Cyclo { m: 1, c: vec![BigRational::zero()] }
    }

    pub fn one() -> Cyclo {
        Cyclo::rational(BigRational::one())
    }

    pub fn rational(q: BigRational) -> Cyclo {
        Cyclo { m: 1, c: vec![q] }
    }

    pub fn int(n: i64) -> Cyclo {
        Cyclo::rational(qint(n))
    }

    /// Reduces `sum v_j zeta_m^j` (any length, exponents taken mod `m`).
    pub fn from_powers(m: u64, v: &[BigRational]) -> Cyclo {
        let m = m.max(1);
        let mut e = vec![BigRational::zero(); m as usize];
        for (j, x) in v.iter().enumerate() {
            if !x.is_zero() {
                e[j % m as usize] += x;
            }
        }
        let phi = cyclotomic_poly(m);
        let deg = phi.len() - 1;
        for i in (deg..m as usize).rev() {
            if e[i].is_zero() {
                continue;
            }
            let c = e[i].clone();
            for (j, pc) in phi.iter().enumerate() {
                if !pc.is_zero() {
                    e[i - deg + j] -= &c * BigRational::from_integer(pc.clone());
                }
            }
        }
        e.truncate(deg);
        Cyclo { m, c: e }
    }

    /// `exp(2 pi i q)`.
    pub fn root_of_unity(q: &BigRational) -> Cyclo {
        let m = q.denom().to_u64().expect("small order");
        let j = q.numer().mod_floor(q.denom()).to_usize().unwrap();
        let mut v = vec![BigRational::zero(); m as usize];
        v[j] = BigRational::one();
        Cyclo::from_powers(m, &v)
    }

    pub fn order(&self) -> u64 {
        self.m
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.c
    }

    /// Same number in `Q(zeta_n)` for a multiple `n` of `m`.
    pub fn lift(&self, n: u64) -> Cyclo {
        if n == self.m {
            return self.clone();
        }
        assert_eq!(n % self.m, 0);
        let s = (n / self.m) as usize;
        let mut v = vec![BigRational::zero(); n as usize];
        for (j, x) in self.c.iter().enumerate() {
            v[j * s] = x.clone();
        }
        Cyclo::from_powers(n, &v)
    }

    fn common(&self, o: &Cyclo) -> (Cyclo, Cyclo) {
        let n = self.m.lcm(&o.m);
        (self.lift(n), o.lift(n))
    }

    pub fn add(&self, o: &Cyclo) -> Cyclo {
        let (a, b) = self.common(o);
        Cyclo { m: a.m, c: a.c.iter().zip(&b.c).map(|(x, y)| x + y).collect() }
    }

    pub fn sub(&self, o: &Cyclo) -> Cyclo {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Cyclo {
        Cyclo { m: self.m, c: self.c.iter().map(|x| -x).collect() }
    }

    pub fn scale(&self, q: &BigRational) -> Cyclo {
        Cyclo { m: self.m, c: self.c.iter().map(|x| x * q).collect() }
    }

    pub fn mul(&self, o: &Cyclo) -> Cyclo {
        if self.m == 1 {
            return o.scale(&self.c[0]);
        }
        if o.m == 1 {
            return self.scale(&o.c[0]);
        }
        let (a, b) = self.common(o);
        let mut v = vec![BigRational::zero(); a.m as usize];
        for (i, x) in a.c.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.c.iter().enumerate() {
                if !y.is_zero() {
                    v[(i + j) % a.m as usize] += x * y;
                }
            }
        }
        Cyclo::from_powers(a.m, &v)
    }

    pub fn pow(&self, e: u32) -> Cyclo {
        (0..e).fold(Cyclo::one(), |acc, _| acc.mul(self))
    }

    /// Complex conjugate.
    pub fn conj(&self) -> Cyclo {
        if self.m <= 2 {
            return self.clone();
        }
        let m = self.m as usize;
        let mut v = vec![BigRational::zero(); m];
        for (j, x) in self.c.iter().enumerate() {
            v[(m - j) % m] += x;
        }
        Cyclo::from_powers(self.m, &v)
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        self.c[1..].iter().all(|x| x.is_zero()).then(|| self.c[0].clone())
    }

    /// Inverse of a nonzero element via `x^{-1} = prod_{sigma != 1} sigma(x) / N(x)`.
    pub fn inv(&self) -> Option<Cyclo> {
        if self.is_zero() {
            return None;
        }
        if let Some(q) = self.as_rational() {
            return Some(Cyclo::rational(q.recip()));
        }
        let m = self.m;
        let mut prod = Cyclo::one();
        for a in 2..m {
            if a.gcd(&m) == 1 {
                prod = prod.mul(&self.galois(a));
            }
        }
        let n = self.mul(&prod).as_rational()?;
        Some(prod.scale(&n.recip()))
    }

    /// Image under `zeta_m -> zeta_m^a`.
    pub fn galois(&self, a: u64) -> Cyclo {
        let m = self.m as usize;
        let mut v = vec![BigRational::zero(); m];
        for (j, x) in self.c.iter().enumerate() {
            v[(j * a as usize) % m] += x;
        }
        Cyclo::from_powers(self.m, &v)
    }

    pub fn div(&self, o: &Cyclo) -> Option<Cyclo> {
        Some(self.mul(&o.inv()?))
    }

    pub fn to_cball(&self, prec: u32) -> CBall {
        let wp = prec + 32;
        let tau = Float::with_val(wp, Constant::Pi) * 2u32;
        let mut re = Float::with_val(wp, 0);
        let mut im = Float::with_val(wp, 0);
        for (j, x) in self.c.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            let xf = crate::field_core::rat_to_float(x, wp);
            let ang = Float::with_val(wp, &tau * j as u32) / self.m as u32;
            let (s, c) = ang.sin_cos(Float::new(wp));
            re += Float::with_val(wp, &xf * &c);
            im += Float::with_val(wp, &xf * &s);
        }
        let mag: f64 = self.c.iter().map(|x| x.abs().to_f64().unwrap_or(f64::MAX)).sum();
        let rad = (mag + 1.0) * 2f64.powi(-(prec as i32) - 8);
        CBall { re: Ball::new(re, rad), im: Ball::new(im, rad) }
    }
}

impl PartialEq for Cyclo {
    fn eq(&self, o: &Self) -> bool {
        let (a, b) = self.common(o);
        a.c == b.c
    }
}

impl fmt::Display for Cyclo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(q) = self.as_rational() {
            return write!(f, "{q}");
        }
        let mut parts = Vec::new();
        for (j, x) in self.c.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            parts.push(match j {
                0 => format!("{x}"),
                1 => format!("({x})*z{}", self.m),
                _ => format!("({x})*z{}^{j}", self.m),
            });
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// Accumulates `sum c * zeta_n^j` over exponents and reduces once.
pub struct CycloSum {
    n: u64,
    v: Vec<BigRational>,
}

impl CycloSum {
    pub fn new(n: u64) -> Self {
        CycloSum { n, v: vec![BigRational::zero(); n as usize] }
    }

    /// Adds `c * exp(2 pi i q)`; the order of `q` must divide `n`.
    pub fn add_root(&mut self, q: &BigRational, c: &BigRational) {
        let j = (crate::arith::frac(q) * qint(self.n)).to_integer().to_usize().expect("order divides n");
        self.v[j] += c;
    }

    pub fn finish(self) -> Cyclo {
        Cyclo::from_powers(self.n, &self.v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    #[test]
    fn cyclotomic_polynomials() {
        let p = |v: &[i64]| v.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>();
        assert_eq!(cyclotomic_poly(1), p(&[-1, 1]));
        assert_eq!(cyclotomic_poly(4), p(&[1, 0, 1]));
        assert_eq!(cyclotomic_poly(6), p(&[1, -1, 1]));
        assert_eq!(cyclotomic_poly(12), p(&[1, 0, -1, 0, 1]));
        assert_eq!(euler_phi(40), 16);
    }

    #[test]
    fn arithmetic() {
        let i = Cyclo::root_of_unity(&rat(1, 4));
        assert_eq!(i.mul(&i), Cyclo::int(-1));
        let z5 = Cyclo::root_of_unity(&rat(1, 5));
        let s = (0..5).fold(Cyclo::zero(), |acc, j| acc.add(&z5.pow(j)));
        assert!(s.is_zero());
        assert_eq!(z5.mul(&z5.conj()), Cyclo::one());
        assert_eq!(z5.lift(20).mul(&i), z5.mul(&i));
        let x = Cyclo::int(2).add(&z5);
        assert_eq!(x.mul(&x.inv().unwrap()), Cyclo::one());
    }

    #[test]
    fn quadratic_gauss_sum_mod_5() {
        let mut s = CycloSum::new(5);
        for a in 1..5i64 {
            let leg = if a == 1 || a == 4 { 1 } else { -1 };
            s.add_root(&rat(a, 5), &qint(leg));
        }
        let g = s.finish();
        assert_eq!(g.mul(&g), Cyclo::int(5));
        let v = g.to_cball(128);
        assert!((v.re.mid.to_f64() - 5f64.sqrt()).abs() < 1e-12);
    }
}
