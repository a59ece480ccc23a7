//! Bernoulli numbers and polynomials, and the upper incomplete gamma function.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rug::float::Constant;
use rug::Float;

use crate::arith::qint;
use crate::field_core::rat_to_float;

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * i)
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    (0..k).fold(BigInt::one(), |acc, i| acc * (n - i) / (i + 1))
}

/// Bernoulli number `B_n` with `B_1 = -1/2`.
pub fn bernoulli(n: u64) -> BigRational {
    static CACHE: OnceLock<Mutex<HashMap<u64, BigRational>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(b) = cache.lock().unwrap().get(&n) {
        return b.clone();
    }
    // sum_{j=0}^{n} C(n+1, j) B_j = 0
    let mut b: Vec<BigRational> = vec![BigRational::one()];
    for m in 1..=n {
        let s = (0..m).fold(BigRational::zero(), |acc, j| {
            acc + BigRational::from_integer(binomial(m + 1, j)) * &b[j as usize]
        });
        b.push(-s / qint(m as i64 + 1));
    }
    let mut c = cache.lock().unwrap();
    for (i, v) in b.iter().enumerate() {
        c.entry(i as u64).or_insert_with(|| v.clone());
    }
    b[n as usize].clone()
}

/// Bernoulli polynomial `B_n(x)`.
pub fn bernoulli_poly(n: u64, x: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    let mut xp = BigRational::one();
    for k in (0..=n).rev() {
        // term C(n,k) B_k x^{n-k}
        acc += BigRational::from_integer(binomial(n, k)) * bernoulli(k) * &xp;
        xp *= x;
    }
    acc
}

/// `Gamma(a)` for rational `a` not a non-positive integer.
pub fn gamma(a: &BigRational, prec: u32) -> Float {
    rat_to_float(a, prec + 16).gamma()
}

/// Upper incomplete gamma `Gamma(a, x)` for rational `a` and `x > 0`, to about `prec` bits.
pub fn gamma_inc(a: &BigRational, x: &Float, prec: u32) -> Float {
    let xf = x.to_f64();
    assert!(xf > 0.0, "gamma_inc needs x > 0");
    let af = a.to_f64().unwrap();
    if a.is_integer() && a.is_positive() {
        return gamma_inc_pos_int(a.to_integer().to_u64().unwrap(), x, prec);
    }
    if xf > 30.0_f64.max(af + 2.0) {
        return gamma_inc_cf(a, x, prec);
    }
    if a.is_integer() {
        let m = (-a.to_integer()).to_u64().unwrap();
        let guard = 3 * xf.ceil() as u32 + (m as f64 * (xf + 2.0).log2()).ceil() as u32 + 48;
        let wp = prec + guard;
        let xw = Float::with_val(wp, x);
        let mut g = e1_series(&xw, wp);
        let emx = Float::with_val(wp, -&xw).exp();
        let lnx = xw.clone().ln();
        // Gamma(a, x) = (Gamma(a+1, x) - x^a e^{-x}) / a, stepping down from a = 0
        for j in 1..=m {
            let aj = -(j as i64);
            let xa = Float::with_val(wp, &lnx * aj).exp();
            let t = Float::with_val(wp, &xa * &emx);
            g = Float::with_val(wp, &g - &t) / aj;
        }
        return Float::with_val(prec, g);
    }
    gamma_inc_series(a, x, prec)
}

fn gamma_inc_pos_int(n: u64, x: &Float, prec: u32) -> Float {
    let wp = prec + 16;
    let xw = Float::with_val(wp, x);
    let mut term = Float::with_val(wp, 1);
    let mut sum = Float::with_val(wp, 1);
    for k in 1..n {
        term = Float::with_val(wp, &term * &xw) / k as u32;
        sum += &term;
    }
    let f = Float::with_val(wp, rug::Integer::from(rug::Integer::factorial((n - 1) as u32)));
    let e = Float::with_val(wp, -xw).exp();
    Float::with_val(prec, sum * f * e)
}

fn e1_series(x: &Float, wp: u32) -> Float {
    let eps = Float::with_val(wp, Float::i_exp(1, -(wp as i32)));
    let mut s = Float::with_val(wp, 0);
    let mut term = Float::with_val(wp, 1);
    let mut k = 1u32;
    loop {
        term = Float::with_val(wp, &term * x) / k;
        term = -term;
        let t = Float::with_val(wp, &term / k);
        s += &t;
        if t.clone().abs() < eps && k as f64 > x.to_f64() {
            break;
        }
        k += 1;
    }
    // E1 = -gamma - ln x - sum (-x)^k / (k k!)
    let g = Float::with_val(wp, Constant::Euler);
    let lnx = x.clone().ln();
    -g - lnx - s
}

fn gamma_inc_series(a: &BigRational, x: &Float, prec: u32) -> Float {
    let xf = x.to_f64();
    let af = a.to_f64().unwrap();
    let guard = (2.9 * xf).ceil() as u32 + (af.abs() * (xf + 2.0).log2()).ceil() as u32 + 48;
    let wp = prec + guard;
    let aw = rat_to_float(a, wp);
    let xw = Float::with_val(wp, x);
    let eps = Float::with_val(wp, Float::i_exp(1, -(wp as i32)));
    // gamma(a, x) = x^a e^{-x} sum_n x^n / (a (a+1) ... (a+n))
    let mut term = Float::with_val(wp, 1) / &aw;
    let mut sum = term.clone();
    let mut n = 1u32;
    loop {
        let d = Float::with_val(wp, &aw + n);
        term = Float::with_val(wp, &term * &xw) / d;
        sum += &term;
        if (n as f64) > xf - af && term.clone().abs() < Float::with_val(wp, &eps * sum.clone().abs()) {
            break;
        }
        n += 1;
    }
    let pre = Float::with_val(wp, Float::with_val(wp, &aw * xw.clone().ln()) - &xw).exp();
    let g = aw.gamma();
    Float::with_val(prec, g - pre * sum)
}

fn gamma_inc_cf(a: &BigRational, x: &Float, prec: u32) -> Float {
    let wp = prec + 40;
    let aw = rat_to_float(a, wp);
    let xw = Float::with_val(wp, x);
    let tiny = Float::with_val(wp, Float::i_exp(1, -(4 * wp as i32)));
    let eps = Float::with_val(wp, Float::i_exp(1, -(wp as i32) + 4));
    let mut b = Float::with_val(wp, &xw + 1u32) - &aw;
    let mut c = Float::with_val(wp, 1) / &tiny;
    let mut d = Float::with_val(wp, 1) / &b;
    let mut h = d.clone();
    let mut i = 1u32;
    loop {
        // a_i = -i (i - a)
        let an = -(Float::with_val(wp, i) * Float::with_val(wp, Float::with_val(wp, i) - &aw));
        b += 2u32;
        d = Float::with_val(wp, &an * &d) + &b;
        if d.is_zero() {
            d = tiny.clone();
        }
        c = Float::with_val(wp, &an / &c) + &b;
        if c.is_zero() {
            c = tiny.clone();
        }
        d = Float::with_val(wp, 1) / d;
        let del = Float::with_val(wp, &d * &c);
        h *= &del;
        if Float::with_val(wp, del - 1u32).abs() < eps {
            break;
        }
        i += 1;
        assert!(i < 1_000_000, "incomplete gamma continued fraction did not converge");
    }
    let pre = Float::with_val(wp, Float::with_val(wp, &aw * xw.clone().ln()) - &xw).exp();
    Float::with_val(prec, pre * h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    #[test]
    fn bernoulli_numbers() {
        assert_eq!(bernoulli(1), rat(-1, 2));
        assert_eq!(bernoulli(2), rat(1, 6));
        assert_eq!(bernoulli(3), rat(0, 1));
        assert_eq!(bernoulli(12), rat(-691, 2730));
        assert_eq!(bernoulli_poly(2, &rat(1, 3)), rat(1, 9) - rat(1, 3) + rat(1, 6));
    }

    fn close(a: &Float, b: f64, tol: f64) -> bool {
        (a.to_f64() - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn incomplete_gamma_reference_values() {
        let x = |v: f64| Float::with_val(128, v);
        // Gamma(3, 2) = 2 e^{-2} (1 + 2 + 2) = 10 e^{-2}
        assert!(close(&gamma_inc(&rat(3, 1), &x(2.0), 128), 10.0 * (-2f64).exp(), 1e-15));
        // Gamma(0, 1) = E1(1)
        assert!(close(&gamma_inc(&rat(0, 1), &x(1.0), 128), 0.219_383_934_395_520_27, 1e-15));
        // Gamma(1/2, x) = sqrt(pi) erfc(sqrt x); erfc(1) = 0.157299207050285130658...
        assert!(close(&gamma_inc(&rat(1, 2), &x(1.0), 128), std::f64::consts::PI.sqrt() * 0.157_299_207_050_285_13, 1e-15));
        // Gamma(-1, 2) = E2(2)/2 = 0.0187789..., E2(2) = 0.037534261820...
        assert!(close(&gamma_inc(&rat(-1, 1), &x(2.0), 128), 0.037_534_261_820_490_74 / 2.0, 1e-14));
    }

    #[test]
    fn series_and_continued_fraction_agree() {
        for a in [rat(-3, 2), rat(-2, 1), rat(1, 2), rat(5, 2), rat(0, 1)] {
            let xv = Float::with_val(200, 31.5);
            let cf = gamma_inc_cf(&a, &xv, 160);
            let direct = if a.is_integer() {
                let m = (-a.to_integer()).to_u64().unwrap();
                let wp = 400;
                let mut g = e1_series(&Float::with_val(wp, &xv), wp);
                for j in 1..=m {
                    let aj = -(j as i64);
                    let t = Float::with_val(wp, Float::with_val(wp, &xv).ln() * aj).exp()
                        * Float::with_val(wp, -Float::with_val(wp, &xv)).exp();
                    g = Float::with_val(wp, &g - &t) / aj;
                }
                g
            } else {
                gamma_inc_series(&a, &xv, 160)
            };
            let rel = Float::with_val(160, &cf - &direct).abs() / cf.clone().abs();
            assert!(rel.to_f64() < 1e-40, "a = {a}: {}", rel.to_f64());
        }
    }
}
