//! Independent oracle over `Q`: lattice sums `G_k(z, a1, a2, N)`, their Fourier expansions,
//! the normalized `E_k(eta, psi)` and constant terms after slashing by `SL_2(Z)`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde_json::{json, Value as Json};

use crate::error::{invalid, Error, Result};
use crate::ray_class::RayClassCharacter;

/// A double-precision complex number with an error radius.
#[derive(Clone, Copy, Debug)]
pub struct Approx {
    pub value: C64,
    pub radius: f64,
}

impl Approx {
    pub fn new(value: C64, radius: f64) -> Self {
        Approx { value, radius }
    }

    pub fn distance(&self, z: C64) -> f64 {
        (self.value - z).norm() + self.radius
    }

    pub fn to_json(&self) -> Json {
        json!({
            "mid": {"re": format!("{:e}", self.value.re), "im": format!("{:e}", self.value.im)},
            "radius": format!("{:e}", self.radius),
        })
    }
}

/// Inputs of `G_k(z, a1, a2, N)`.
#[derive(Clone, Copy, Debug)]
pub struct LatticeSumSpec {
    pub k: u32,
    pub n: i64,
    pub a1: i64,
    pub a2: i64,
    pub z: C64,
    /// Box bound `B`.
    pub trunc: i64,
}

impl LatticeSumSpec {
    pub fn new(k: u32, n: i64, a1: i64, a2: i64, z: C64, trunc: i64) -> Result<Self> {
        if n < 1 {
            return invalid("N must be positive");
        }
        if z.im <= 0.0 {
            return invalid("z must lie in the upper half plane");
        }
        if trunc < 1 {
            return invalid("truncation must be >= 1");
        }
        Ok(LatticeSumSpec { k, n, a1, a2, z, trunc })
    }

    fn validate(&self) -> Result<()> {
        LatticeSumSpec::new(self.k, self.n, self.a1, self.a2, self.z, self.trunc).map(|_| ())
    }
}

fn e(x: f64) -> C64 {
    C64::from_polar(1.0, 2.0 * PI * x)
}

fn cis_z(w: C64) -> C64 {
    // e(w) for complex w
    (C64::new(0.0, 2.0 * PI) * w).exp()
}

const ROUND: f64 = 64.0 * f64::EPSILON;

/// Direct truncated sum over `|a|, |b| <= B` (k >= 3).
pub fn g_k_direct(s: &LatticeSumSpec) -> Result<Approx> {
    s.validate()?;
    if s.k < 3 {
        return Err(Error::Invalid("direct lattice sums need k >= 3; use the Fourier expansion".into()));
    }
    let (n, b) = (s.n, s.trunc);
    let k = s.k as i32;
    let first = |r: i64, lo: i64| lo + (r - lo).rem_euclid(n);
    let rows: Vec<(C64, f64)> = (first(s.a1, -b)..=b)
        .step_by(n as usize)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|a| {
            let mut acc = C64::zero();
            let mut mag = 0.0;
            let mut bb = first(s.a2, -b);
            while bb <= b {
                if a != 0 || bb != 0 {
                    let t = (s.z * a as f64 + bb as f64).powi(-k);
                    acc += t;
                    mag += t.norm();
                }
                bb += n;
            }
            (acc, mag)
        })
        .collect();
    let (mut v, mut mag) = (C64::zero(), 0.0);
    for (x, m) in rows {
        v += x;
        mag += m;
    }
    // |az + b| >= c max(|a|, |b|) and about 8r/N^2 + 8 points on the shell of radius r
    let c = s.z.im.min(1.0) / (1.0 + s.z.norm());
    let kf = s.k as f64;
    let bf = b as f64;
    let tail = 8.0 * (1.0 / (n * n) as f64 * bf.powf(2.0 - kf) / (kf - 2.0) + bf.powf(1.0 - kf) / (kf - 1.0))
        * c.powf(-kf);
    Ok(Approx::new(v, tail + ROUND * mag))
}

/// `sum_{j >= 0, x + jN > 0} (x + jN)^{-k}` by Euler-Maclaurin.
fn partial_zeta(x: i64, n: i64, k: u32) -> f64 {
    let k = k as i32;
    let start = if x == 0 { 1 } else { 0 };
    let nf = n as f64;
    let mut acc = 0.0;
    let terms = 64;
    for j in start..start + terms {
        acc += ((x + j * n) as f64).powi(-k);
    }
    // tail sum_{j >= J} f(j), f(j) = (x + jN)^{-k}
    let y = (x + (start + terms) * n) as f64;
    let kf = k as f64;
    acc += y.powf(1.0 - kf) / ((kf - 1.0) * nf) + 0.5 * y.powi(-k) + kf * nf * y.powi(-k - 1) / 12.0
        - kf * (kf + 1.0) * (kf + 2.0) * nf.powi(3) * y.powi(-k - 3) / 720.0;
    acc
}

/// `sum_{b = a2 mod N, b != 0} b^{-k}`.
pub fn residue_zeta(a2: i64, n: i64, k: u32) -> f64 {
    let r = a2.rem_euclid(n);
    let neg = if r == 0 { 0 } else { n - r };
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    partial_zeta(r, n, k) + sign * partial_zeta(neg, n, k)
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Closed Fourier expansion (k >= 2), modes `m |a| <= B`; adds `-pi / (N^2 Im z)` at k = 2.
pub fn g_k_fourier(s: &LatticeSumSpec) -> Result<Approx> {
    s.validate()?;
    if s.k < 2 {
        return invalid("Fourier expansion needs k >= 2");
    }
    let (n, b, k) = (s.n, s.trunc, s.k);
    let nf = n as f64;
    let mut v = C64::zero();
    let mut mag = 0.0;
    if s.a1.rem_euclid(n) == 0 {
        let d = residue_zeta(s.a2, n, k);
        v += d;
        mag += d.abs();
    }
    let pre = C64::new(0.0, -2.0 * PI).powi(k as i32) / (nf.powi(k as i32) * factorial(k - 1));
    let mut four = C64::zero();
    let a1 = s.a1.rem_euclid(n);
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    // a > 0, a = a1 mod N
    let mut a = if a1 == 0 { n } else { a1 };
    while a <= b {
        for m in 1..=b / a {
            let mf = m as f64;
            let t = mf.powi(k as i32 - 1) * e(mf * s.a2 as f64 / nf) * cis_z(s.z * (mf * a as f64 / nf));
            four += t;
            mag += t.norm() * pre.norm();
        }
        a += n;
    }
    // a < 0, a = a1 mod N; write a = -c
    let mut c = (-a1).rem_euclid(n);
    if c == 0 {
        c = n;
    }
    while c <= b {
        for m in 1..=b / c {
            let mf = m as f64;
            let t = mf.powi(k as i32 - 1) * e(-mf * s.a2 as f64 / nf) * cis_z(s.z * (mf * c as f64 / nf));
            four += sign * t;
            mag += t.norm() * pre.norm();
        }
        c += n;
    }
    v += pre * four;
    if k == 2 {
        v -= PI / (nf * nf * s.z.im);
    }
    // dropped modes n' = m|a| > B, at most 2 d(n') <= 2 n' of them per n'
    let q = (-2.0 * PI * s.z.im / nf).exp();
    let mut tail = 0.0;
    let mut j = (b + 1) as f64;
    loop {
        let t = 2.0 * j.powi(k as i32) * q.powf(j);
        tail += t;
        if t < 1e-30 * (1.0 + tail) || j > 1e7 {
            break;
        }
        j += 1.0;
    }
    Ok(Approx::new(v, pre.norm() * tail + ROUND * mag))
}

/// Character values `chi(a)` on residues mod its conductor, as complex numbers.
struct DirichletChar {
    modulus: i64,
    values: Vec<Option<C64>>,
    parity: i32,
}

impl DirichletChar {
    fn new(chi: &RayClassCharacter) -> Result<Self> {
        let f = chi.field();
        if !f.is_rational() {
            return invalid("the Q oracle needs characters over Q");
        }
        let m = chi.modulus().min_rational().to_integer().to_i64().unwrap();
        let mut values = Vec::with_capacity(m as usize);
        for a in 0..m {
            if m == 1 {
                values.push(Some(C64::new(1.0, 0.0)));
                continue;
            }
            let v = chi.eval_f(&f.from_int(a))?;
            values.push(v.map(|x: BigRational| e(x.to_f64().unwrap())));
        }
        let parity = if chi.signature().0 == 0 { 1 } else { -1 };
        Ok(DirichletChar { modulus: m, values, parity })
    }

    fn at(&self, a: i64) -> C64 {
        self.values[a.rem_euclid(self.modulus) as usize].unwrap_or_default()
    }
}

/// `E_k(eta, psi)` for Dirichlet characters `eta` mod `u`, `psi` mod `v` (primitive).
pub struct QEisenstein {
    eta: DirichletChar,
    psi: DirichletChar,
    pub k: u32,
    pub u: i64,
    pub v: i64,
    norm: C64,
}

impl QEisenstein {
    pub fn new(eta: &RayClassCharacter, psi: &RayClassCharacter, k: u32) -> Result<Self> {
        if k < 2 {
            return invalid("the Q oracle needs k >= 2");
        }
        if !eta.is_primitive() || !psi.is_primitive() {
            return invalid("characters must be primitive");
        }
        let de = DirichletChar::new(eta)?;
        let dp = DirichletChar::new(psi)?;
        if de.parity * dp.parity != if k % 2 == 0 { 1 } else { -1 } {
            return invalid("parity: (eta psi)(-1) must equal (-1)^k");
        }
        if k == 2 && eta.is_trivial() && psi.is_trivial() && de.modulus == 1 && dp.modulus == 1 {
            return invalid("E_2(id, id) is not a modular form");
        }
        let (u, v) = (de.modulus, dp.modulus);
        let tau = psi.gauss_sum()?.to_cball(64);
        let tau = C64::new(tau.re.mid.to_f64(), tau.im.mid.to_f64());
        // the normalization puts eta(-1) in front of the q-expansion; divide it out
        let norm = (v as f64).powi(k as i32 - 1) * tau * factorial(k - 1)
            / (2.0 * C64::new(0.0, 2.0 * PI).powi(k as i32))
            * de.parity as f64;
        Ok(QEisenstein { eta: de, psi: dp, k, u, v, norm })
    }

    pub fn level(&self) -> i64 {
        self.u * self.v
    }

    /// `E_k | gamma` at `z` through the transformation law of `G_k`.
    pub fn eval_slashed(&self, gamma: [i64; 4], z: C64, trunc: i64) -> Result<Approx> {
        let [a, b, c, d] = gamma;
        if a * d - b * c != 1 {
            return invalid("gamma must lie in SL_2(Z)");
        }
        let n = self.level();
        let mut v = C64::zero();
        let mut r = 0.0;
        for a1 in 1..=self.u {
            let ea = self.eta.at(a1);
            if ea == C64::zero() {
                continue;
            }
            for a2 in 1..=n {
                let pa = self.psi.at(a2).conj();
                if pa == C64::zero() {
                    continue;
                }
                let x1 = a1 * self.v;
                let s = LatticeSumSpec::new(self.k, n, x1 * a + a2 * c, x1 * b + a2 * d, z, trunc)?;
                let g = g_k_fourier(&s)?;
                v += ea * pa * g.value;
                r += g.radius;
            }
        }
        Ok(Approx::new(self.norm * v, self.norm.norm() * r + ROUND * v.norm()))
    }

    pub fn eval(&self, z: C64, trunc: i64) -> Result<Approx> {
        self.eval_slashed([1, 0, 0, 1], z, trunc)
    }

    /// Constant term of `E_k | gamma` as the mean over `M >= 4B + 1` points on `Im z = t`.
    pub fn slash_and_extract(&self, gamma: [i64; 4], trunc: i64, t: f64) -> Result<Approx> {
        let n = self.level();
        horocycle_mean(|z| self.eval_slashed(gamma, z, trunc), n as f64, trunc, t, 0.0)
    }

    /// Coefficient of `e(m z)` of `E_k` at infinity.
    pub fn q_coefficient(&self, m: i64, trunc: i64, t: f64) -> Result<Approx> {
        let n = self.level();
        let b = trunc.max(m * n + 1).max(auto_trunc(n, t, self.k));
        horocycle_mean(|z| self.eval(z, b), n as f64, b, t, m as f64)
    }
}

/// Smallest `B` with `B^k exp(-2 pi B t / N)` below `1e-24`.
pub fn auto_trunc(n: i64, t: f64, k: u32) -> i64 {
    let mut b = 1i64;
    while (b as f64).powi(k as i32) * (-2.0 * PI * b as f64 * t / n as f64).exp() > 1e-24 {
        b += 1;
    }
    b
}

/// Mean of `f(z) e(-m z)` over `M = 4B + 1` equally spaced points of `[0, period) + i t`.
/// Exact on Fourier polynomials in `e(j z / period)` with `|j| <= B`.
pub fn horocycle_mean<F>(f: F, period: f64, modes: i64, t: f64, m: f64) -> Result<Approx>
where
    F: Fn(C64) -> Result<Approx> + Sync,
{
    let count = 4 * modes + 1;
    let vals: Vec<Result<Approx>> = (0..count)
        .into_par_iter()
        .map(|j| {
            let z = C64::new(period * j as f64 / count as f64, t);
            f(z).map(|a| Approx::new(a.value * cis_z(-z * m), a.radius * (2.0 * PI * m * t).exp()))
        })
        .collect();
    let mut v = C64::zero();
    let mut r: f64 = 0.0;
    for a in vals {
        let a = a?;
        v += a.value;
        r = r.max(a.radius);
    }
    let mean = v / count as f64;
    Ok(Approx::new(mean, r + ROUND * mean.norm()))
}

/// One `SL_2(Z)` matrix `[[a, b], [c, d]]` per cusp `a/c` of `Gamma_0(N)` (`c | N`,
/// `a` mod `gcd(c, N/c)`), plus the identity.
pub fn cusp_covering_set(n: i64) -> Vec<[i64; 4]> {
    use num_integer::Integer;
    let mut out = vec![[1, 0, 0, 1]];
    for c in (1..=n).filter(|c| n % c == 0) {
        let g = c.gcd(&(n / c));
        let mut seen = std::collections::BTreeSet::new();
        for a in 1..=c * g {
            if a.gcd(&c) == 1 && seen.insert(a % g) {
                let eg = a.extended_gcd(&c);
                // a x + c y = 1, so [[a, -y], [c, x]] has determinant 1
                out.push([a, -eg.y, c, eg.x]);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_core::Field;
    use crate::ideal_arith::Ideal;
    use crate::ray_class::{narrow_class_group, ray_class_group};

    fn id() -> RayClassCharacter {
        narrow_class_group(&Field::rationals()).unwrap().trivial_character()
    }

    fn quad5() -> RayClassCharacter {
        let q = Field::rationals();
        let g = ray_class_group(&q, &Ideal::from_int(&q, 5).unwrap()).unwrap();
        g.characters().into_iter().find(|c| c.order() == 2).unwrap()
    }

    #[test]
    fn g6_vanishes_at_i() {
        let s = LatticeSumSpec::new(6, 1, 0, 0, C64::new(0.0, 1.0), 300).unwrap();
        let d = g_k_direct(&s).unwrap();
        assert!(d.value.norm() < d.radius + 1e-9, "{:?}", d);
        let f = g_k_fourier(&s).unwrap();
        assert!(f.value.norm() < 1e-12);
    }

    #[test]
    fn direct_matches_fourier() {
        for (k, n, a1, a2) in [(4, 1, 0, 0), (3, 5, 2, 1), (4, 7, 3, 5), (5, 4, 1, 2), (6, 12, 5, 7)] {
            let z = C64::new(0.3, 1.1);
            let s = LatticeSumSpec::new(k, n, a1, a2, z, 400).unwrap();
            let d = g_k_direct(&s).unwrap();
            let f = g_k_fourier(&LatticeSumSpec { trunc: 60, ..s }).unwrap();
            assert!((d.value - f.value).norm() <= d.radius + f.radius, "{k} {n}: {:?} {:?}", d, f);
        }
    }

    #[test]
    fn transformation_law() {
        let (a, b, c, d) = (1i64, 1i64, 1i64, 2i64);
        let z = C64::new(-0.2, 0.9);
        let gz = (z * a as f64 + b as f64) / (z * c as f64 + d as f64);
        let s = LatticeSumSpec::new(4, 6, 1, 5, gz, auto_trunc(6, gz.im, 4)).unwrap();
        let lhs = g_k_fourier(&s).unwrap().value * (z * c as f64 + d as f64).powi(-4);
        let s2 = LatticeSumSpec::new(4, 6, a + 5 * c, b + 5 * d, z, auto_trunc(6, z.im, 4)).unwrap();
        let rhs = g_k_fourier(&s2).unwrap().value;
        assert!((lhs - rhs).norm() < 1e-9, "{lhs} {rhs}");
    }

    #[test]
    fn level_one_constants() {
        let e4 = QEisenstein::new(&id(), &id(), 4).unwrap();
        let c = e4.slash_and_extract([1, 0, 0, 1], 12, 10.0).unwrap();
        assert!(c.distance(C64::new(1.0 / 240.0, 0.0)) < 1e-8);
        let a1 = e4.q_coefficient(1, 12, 1.0).unwrap();
        assert!(a1.distance(C64::new(1.0, 0.0)) < 1e-8, "{:?}", a1);
    }

    #[test]
    fn e2_with_character() {
        let e = QEisenstein::new(&id(), &quad5(), 2).unwrap();
        let a1 = e.q_coefficient(1, 12, 0.5).unwrap();
        assert!(a1.distance(C64::new(1.0, 0.0)) < 1e-8, "{:?}", a1);
        let a2 = e.q_coefficient(2, 12, 0.5).unwrap();
        // 1 + psi(2) 2 = 1 - 2
        assert!(a2.distance(C64::new(-1.0, 0.0)) < 1e-8, "{:?}", a2);
    }

    #[test]
    fn classical_e2_coefficient() {
        // 2^{-1} L(id, -1) (1 - 24 q - ...) has q^1 coefficient 1
        let s = LatticeSumSpec::new(2, 1, 0, 0, C64::new(0.0, 1.0), 40).unwrap();
        let norm = 1.0 / (2.0 * C64::new(0.0, 2.0 * PI).powi(2));
        let a1 = horocycle_mean(
            |z| g_k_fourier(&LatticeSumSpec { z, ..s }).map(|g| Approx::new(g.value * norm, g.radius)),
            1.0,
            40,
            1.0,
            1.0,
        )
        .unwrap();
        let a0 = norm.re * 2.0 * PI * PI / 6.0;
        assert!((a1.value.re / a0 + 24.0).abs() < 1e-8, "{:?}", a1);
    }

    #[test]
    fn horocycle_projection_is_exact() {
        let coeffs = [C64::new(0.25, -1.0), C64::new(3.0, 0.5), C64::new(-2.0, 0.0)];
        let f = |z: C64| Ok(Approx::new(coeffs[0] + coeffs[1] * cis_z(z) + coeffs[2] * cis_z(z * 3.0), 0.0));
        let m = horocycle_mean(f, 1.0, 3, 0.7, 0.0).unwrap();
        assert!((m.value - coeffs[0]).norm() < 1e-14);
    }
}
