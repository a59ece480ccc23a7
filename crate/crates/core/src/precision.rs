//! Midpoint-radius real and complex balls on top of MPFR.

use std::fmt;

use num_rational::BigRational;
use rug::Float;
use serde_json::{json, Value};

/// Real ball `[mid - rad, mid + rad]`.
#[derive(Clone, Debug)]
pub struct Ball {
    pub mid: Float,
    pub rad: f64,
}

fn up(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * (1.0 + 4.0 * f64::EPSILON) + f64::MIN_POSITIVE
    }
}

fn ulp(x: &Float) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let m = x.to_f64().abs();
    up(m * 2f64.powi(1 - x.prec() as i32))
}

impl Ball {
    pub fn new(mid: Float, rad: f64) -> Self {
        Ball { mid, rad: up(rad.abs()) }
    }

    pub fn exact(mid: Float) -> Self {
        Ball { mid, rad: 0.0 }
    }

    pub fn zero(prec: u32) -> Self {
        Ball::exact(Float::with_val(prec, 0))
    }

    pub fn from_f64(x: f64, prec: u32) -> Self {
        Ball::exact(Float::with_val(prec, x))
    }

    pub fn from_rational(q: &BigRational, prec: u32) -> Self {
        let m = crate::field_core::rat_to_float(q, prec);
        let r = ulp(&m);
        Ball::new(m, r)
    }

    pub fn prec(&self) -> u32 {
        self.mid.prec()
    }

    pub fn add(&self, o: &Ball) -> Ball {
        let m = Float::with_val(self.prec(), &self.mid + &o.mid);
        let r = self.rad + o.rad + ulp(&m);
        Ball::new(m, r)
    }

    pub fn sub(&self, o: &Ball) -> Ball {
        let m = Float::with_val(self.prec(), &self.mid - &o.mid);
        let r = self.rad + o.rad + ulp(&m);
        Ball::new(m, r)
    }

    pub fn neg(&self) -> Ball {
        Ball { mid: -self.mid.clone(), rad: self.rad }
    }

    pub fn mul(&self, o: &Ball) -> Ball {
        let m = Float::with_val(self.prec(), &self.mid * &o.mid);
        let a = self.mid.to_f64().abs();
        let b = o.mid.to_f64().abs();
        let r = a * o.rad + b * self.rad + self.rad * o.rad + ulp(&m);
        Ball::new(m, r)
    }

    pub fn mul_f(&self, x: &Float) -> Ball {
        self.mul(&Ball::exact(x.clone()))
    }

    pub fn div(&self, o: &Ball) -> Ball {
        let m = Float::with_val(self.prec(), &self.mid / &o.mid);
        let b = o.mid.to_f64().abs();
        let lo = b - o.rad;
        let r = if lo <= 0.0 {
            f64::INFINITY
        } else {
            (self.rad + m.to_f64().abs() * o.rad) / lo + ulp(&m)
        };
        Ball::new(m, r)
    }

    pub fn scale_rational(&self, q: &BigRational) -> Ball {
        self.mul(&Ball::from_rational(q, self.prec()))
    }

    /// Adds `e` to the radius.
    pub fn widen(&self, e: f64) -> Ball {
        Ball::new(self.mid.clone(), self.rad + e)
    }

    pub fn contains_rational(&self, q: &BigRational) -> bool {
        let qf = crate::field_core::rat_to_float(q, self.prec() + 64);
        let d = Float::with_val(self.prec() + 64, &self.mid - &qf).abs();
        d.to_f64() <= self.rad
    }

    pub fn to_f64(&self) -> f64 {
        self.mid.to_f64()
    }

    pub fn mid_string(&self) -> String {
        let digits = (self.prec() as f64 * std::f64::consts::LOG10_2).ceil() as usize;
        self.mid.to_string_radix(10, Some(digits.max(2)))
    }

    pub fn to_json(&self) -> Value {
        json!({"mid": self.mid_string(), "radius": format!("{:e}", self.rad)})
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} +/- {:e}", self.mid_string(), self.rad)
    }
}

/// Complex ball with independent real and imaginary radii.
#[derive(Clone, Debug)]
pub struct CBall {
    pub re: Ball,
    pub im: Ball,
}

impl CBall {
    pub fn new(re: Ball, im: Ball) -> Self {
        CBall { re, im }
    }

    pub fn real(re: Ball) -> Self {
        let p = re.prec();
        CBall { re, im: Ball::zero(p) }
    }

    pub fn zero(prec: u32) -> Self {
        CBall::real(Ball::zero(prec))
    }

    pub fn from_rational(q: &BigRational, prec: u32) -> Self {
        CBall::real(Ball::from_rational(q, prec))
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn add(&self, o: &CBall) -> CBall {
        CBall { re: self.re.add(&o.re), im: self.im.add(&o.im) }
    }

    pub fn sub(&self, o: &CBall) -> CBall {
        CBall { re: self.re.sub(&o.re), im: self.im.sub(&o.im) }
    }

    pub fn neg(&self) -> CBall {
        CBall { re: self.re.neg(), im: self.im.neg() }
    }

    pub fn conj(&self) -> CBall {
        CBall { re: self.re.clone(), im: self.im.neg() }
    }

    pub fn mul(&self, o: &CBall) -> CBall {
        CBall {
            re: self.re.mul(&o.re).sub(&self.im.mul(&o.im)),
            im: self.re.mul(&o.im).add(&self.im.mul(&o.re)),
        }
    }

    pub fn mul_real(&self, x: &Ball) -> CBall {
        CBall { re: self.re.mul(x), im: self.im.mul(x) }
    }

    pub fn scale_rational(&self, q: &BigRational) -> CBall {
        CBall { re: self.re.scale_rational(q), im: self.im.scale_rational(q) }
    }

    pub fn norm_sqr(&self) -> Ball {
        self.re.mul(&self.re).add(&self.im.mul(&self.im))
    }

    pub fn div(&self, o: &CBall) -> CBall {
        let n = o.norm_sqr();
        let num = self.mul(&o.conj());
        CBall { re: num.re.div(&n), im: num.im.div(&n) }
    }

    /// Multiplication by `i^e`.
    pub fn mul_i_pow(&self, e: i64) -> CBall {
        match e.rem_euclid(4) {
            0 => self.clone(),
            1 => CBall { re: self.im.neg(), im: self.re.clone() },
            2 => self.neg(),
            _ => CBall { re: self.im.clone(), im: self.re.neg() },
        }
    }

    /// Radius of a disc containing the ball.
    pub fn radius(&self) -> f64 {
        up(self.re.rad.hypot(self.im.rad))
    }

    pub fn widen(&self, e: f64) -> CBall {
        CBall { re: self.re.widen(e), im: self.im.widen(e) }
    }

    pub fn contains_rational(&self, q: &BigRational) -> bool {
        self.re.contains_rational(q) && self.im.rad >= self.im.mid.to_f64().abs()
    }

    /// `|self - o|` as an upper bound including both radii.
    pub fn distance_bound(&self, o: &CBall) -> f64 {
        let d = self.sub(o);
        up(d.re.mid.to_f64().hypot(d.im.mid.to_f64()) + d.radius())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "mid": {"re": self.re.mid_string(), "im": self.im.mid_string()},
            "radius": format!("{:e}", self.radius()),
        })
    }
}

impl fmt::Display for CBall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) + ({})i +/- {:e}", self.re.mid_string(), self.im.mid_string(), self.radius())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    #[test]
    fn rational_enclosure() {
        let a = Ball::from_rational(&rat(1, 3), 128);
        let b = a.mul(&Ball::from_f64(3.0, 128));
        assert!(b.contains_rational(&rat(1, 1)));
        assert!(b.rad < 1e-35);
        let c = Ball::from_f64(1.0, 128).div(&Ball::from_rational(&rat(7, 1), 128));
        assert!(c.contains_rational(&rat(1, 7)));
    }

    #[test]
    fn complex_ops() {
        let i = CBall::new(Ball::zero(64), Ball::from_f64(1.0, 64));
        let m = i.mul(&i);
        assert!(m.contains_rational(&rat(-1, 1)));
        assert!(i.mul_i_pow(1).contains_rational(&rat(-1, 1)));
        let q = CBall::from_rational(&rat(1, 2), 64).div(&i);
        assert!((q.im.to_f64() + 0.5).abs() < 1e-15);
    }
}
