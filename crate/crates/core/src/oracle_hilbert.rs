//! Direct truncated evaluation of the defining lattice series of `E_k(eta, psi)_lambda` at
//! `s = 0` (k >= 3), with reduction modulo the unit subgroup `U`, and numeric constant terms.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde_json::{json, Value as Json};

use crate::class_group::class_group;
use crate::cusp_geometry::Mat2;
use crate::eisenstein::EisensteinSpec;
use crate::error::{invalid, Result};
use crate::field_core::{unit_subgroup, Elt, Field, UnitSubgroup};
use crate::ideal_arith::{different, Ideal};
use crate::oracle_q::Approx;
use crate::ray_class::RayClassCharacter;

/// `ell(x) = log|x^1| - log|x^2|`, the coordinate moved by units in a real quadratic field.
fn ell(e: &[f64]) -> f64 {
    e[0].abs().ln() - e[1].abs().ln()
}

/// Fundamental-domain data for `U` acting on pairs `(a, b)`.
#[derive(Clone, Debug)]
pub struct UnitStrip {
    /// Width `2 |log|u^1||` of the strip in `ell`; 0 when `U` is finite.
    pub width: f64,
    pub offset: f64,
    pub minus_one: bool,
}

impl UnitStrip {
    pub fn new(f: &Field, u: &UnitSubgroup) -> Self {
        let width = u
            .generators
            .iter()
            .filter(|g| !(g.as_rational().is_some()))
            .map(|g| ell(&f.embed_f64(g)).abs())
            .fold(0.0, f64::max);
        UnitStrip { width, offset: 0.0, minus_one: u.contains_minus_one }
    }

    pub fn with_offset(mut self, o: f64) -> Self {
        self.offset = o;
        self
    }

    /// Whether the embedding vector `e` of the first nonzero entry is in reduced position.
    pub fn is_reduced(&self, e: &[f64]) -> bool {
        if self.minus_one && e[0] < 0.0 {
            return false;
        }
        if self.width == 0.0 || e.len() < 2 {
            return true;
        }
        let l = ell(e) - self.offset;
        let tol = 1e-9 * (1.0 + self.width);
        l >= -tol && l < self.width - tol
    }
}

/// Canonical `U`-orbit representative of `(a, b) != (0, 0)`.
pub fn u_reduce(f: &Field, u: &UnitSubgroup, a: &Elt, b: &Elt) -> Result<(Elt, Elt)> {
    if a.is_zero() && b.is_zero() {
        return invalid("(a, b) must be nonzero");
    }
    let strip = UnitStrip::new(f, u);
    let first = if a.is_zero() { b } else { a };
    let mut g: Option<Elt> = None;
    if strip.width > 0.0 && f.degree() == 2 {
        let gen = u.generators.iter().find(|g| g.as_rational().is_none()).unwrap();
        let lg = ell(&f.embed_f64(gen));
        let j = -((ell(&f.embed_f64(first)) - strip.offset) / lg).floor() as i64;
        let j = if lg < 0.0 { -j - 1 } else { j };
        g = Some(f.pow(gen, j)?);
    }
    let (mut a2, mut b2) = match &g {
        Some(g) => (f.mul(a, g), f.mul(b, g)),
        None => (a.clone(), b.clone()),
    };
    // boundary rounding: step once more if needed
    if let Some(gen) = u.generators.iter().find(|g| g.as_rational().is_none()) {
        for _ in 0..2 {
            let fst = if a2.is_zero() { &b2 } else { &a2 };
            let l = ell(&f.embed_f64(fst)) - strip.offset;
            let s = if l < 0.0 {
                1
            } else if l >= strip.width {
                -1
            } else {
                break;
            };
            let lg = ell(&f.embed_f64(gen));
            let m = if (s > 0) == (lg > 0.0) { gen.clone() } else { f.inv(gen)? };
            a2 = f.mul(&a2, &m);
            b2 = f.mul(&b2, &m);
        }
    }
    let fst = if a2.is_zero() { &b2 } else { &a2 };
    if strip.minus_one && f.embed_f64(fst)[0] < 0.0 {
        a2 = -a2;
        b2 = -b2;
    }
    Ok((a2, b2))
}

/// One `a' = a alpha + b gamma` together with a particular preimage `(a0, b0)`.
struct Row {
    a_emb: Vec<f64>,
    reduced: bool,
    a0: Elt,
    b0: Elt,
    /// Embedding of `b'_0 = a0 beta + b0 delta`; the row's `b'` run over `b'_0 - S`.
    b_shift: Vec<f64>,
}

struct ClassBlock {
    pre: C64,
    rows: Vec<Row>,
    /// Basis of `S = gamma^{-1} r cap alpha^{-1} J^{-1} r` and its embeddings.
    s_basis: Vec<Elt>,
    s_emb: Vec<Vec<f64>>,
    s_inv: Vec<Vec<f64>>,
    wa: ResidueWeight,
    wb: ResidueWeight,
}

/// Truncated series of `E_k(eta, psi)_lambda | A` for one `(spec, lambda, A, B)`, summed in
/// the substituted variables `(a', b') = (a alpha + b gamma, a beta + b delta)` over
/// `U`-reduced pairs with `|a'^sigma|, |b'^sigma| <= B`.
pub struct SeriesEvaluator {
    pub k: i64,
    pub d: usize,
    pub lambda: usize,
    pub truncation: f64,
    pub unit_index: u64,
    blocks: Vec<ClassBlock>,
    field: std::sync::Arc<Field>,
    slash: Mat2,
    strip: UnitStrip,
    constant_weights: bool,
    translation: Vec<Vec<f64>>,
    /// `N(t_lambda)^{-k/2}`, turning `a_lambda(0)` into the normalized constant.
    norm_factor: f64,
}

fn root(q: &num_rational::BigRational) -> C64 {
    C64::from_polar(1.0, 2.0 * PI * q.to_f64().unwrap())
}

fn cyclo_f64(c: &crate::cyclo::Cyclo) -> C64 {
    let b = c.to_cball(64);
    C64::new(b.re.mid.to_f64(), b.im.mid.to_f64())
}

/// `sgn(x)^q chi(x I)` by ideal discrete logs, with `chi(0) = 1` iff `chi` is trivial mod `O`
/// with trivial signature.
#[cfg(test)]
fn weight_slow(f: &Field, chi: &RayClassCharacter, x: &Elt, i_inv: &Ideal, conj: bool) -> Result<C64> {
    if x.is_zero() {
        return Ok(zero_weight(chi));
    }
    let ideal = Ideal::principal(chi.field(), x)?.mul(i_inv);
    let Some(v) = chi.eval_ideal(&ideal)? else { return Ok(C64::zero()) };
    let s = f.sgn_power(x, chi.signature())? as f64;
    let v = if conj { -v } else { v };
    Ok(root(&v) * s)
}

fn zero_weight(chi: &RayClassCharacter) -> C64 {
    if chi.modulus().is_unit() && chi.signature().0 == 0 {
        C64::new(1.0, 0.0)
    } else {
        C64::zero()
    }
}

/// `x -> sgn(x)^q chi(x J)` for `x` in `J^{-1}` through residues: with `y0` in `J` and
/// `n = y0 J^{-1}` coprime to the modulus, `chi(x J) = sgn(x y0)^q chi_f(x y0) / chi(n)`.
struct ResidueWeight {
    chi: RayClassCharacter,
    y0: Elt,
    sgn_y0: f64,
    chi_n: num_rational::BigRational,
    conj: bool,
}

impl ResidueWeight {
    fn new(chi: &RayClassCharacter, j: &Ideal, conj: bool) -> Result<Self> {
        let f = chi.field();
        let y0 = if chi.modulus().is_unit() {
            crate::ray_class::element_with_coprime_cofactor(j, &Ideal::unit(f))?
        } else {
            crate::ray_class::element_with_coprime_cofactor(j, chi.modulus())?
        };
        let n = Ideal::principal(f, &y0)?.mul(&j.inv());
        let chi_n = chi
            .eval_ideal(&n)?
            .ok_or_else(|| crate::error::Error::Verification("cofactor not coprime".into()))?;
        let sgn_y0 = f.sgn_power(&y0, chi.signature())? as f64;
        Ok(ResidueWeight { chi: chi.clone(), y0, sgn_y0, chi_n, conj })
    }

    fn at(&self, f: &Field, x: &Elt) -> Result<C64> {
        if x.is_zero() {
            return Ok(zero_weight(&self.chi));
        }
        // sgn(x)^q chi(xJ) = sgn(y0)^q chi_f(x y0) / chi(n)
        let Some(v) = self.chi.eval_f(&f.mul(x, &self.y0))? else { return Ok(C64::zero()) };
        let e = v - &self.chi_n;
        let e = if self.conj { -e } else { e };
        Ok(root(&e) * self.sgn_y0)
    }
}

impl SeriesEvaluator {
    pub fn new(spec: &EisensteinSpec, lambda: usize, slash: Option<&Mat2>, truncation: f64) -> Result<Self> {
        Self::with_strip_offset(spec, lambda, slash, truncation, 0.0)
    }

    pub fn with_strip_offset(
        spec: &EisensteinSpec,
        lambda: usize,
        slash: Option<&Mat2>,
        truncation: f64,
        offset: f64,
    ) -> Result<Self> {
        let f = spec.field.clone();
        let d = f.degree();
        let k = spec.k;
        if k < 3 {
            return invalid("direct summation needs k >= 3");
        }
        if d > 2 {
            return Err(crate::error::Error::Unsupported("the series oracle handles degree <= 2".into()));
        }
        if lambda >= spec.t.len() {
            return invalid("lambda out of range");
        }
        let m = slash.cloned().unwrap_or_else(|| Mat2::identity(&f));
        if m.det(&f) != f.one() {
            return invalid("slash matrix must have determinant 1");
        }
        let t = &spec.t[lambda];
        let b_ideal = spec.psi.modulus();
        let dd = different(&f);
        let u = unit_subgroup(&f, &spec.level, k)?;
        let strip = UnitStrip::new(&f, &u).with_offset(offset);
        let disc = f.discriminant().to_f64().unwrap();
        let gamma_k: f64 = (1..k).map(|i| i as f64).product();
        let c = disc.sqrt() * gamma_k.powi(d as i32)
            / (u.index as f64 * disc * C64::new(0.0, -2.0 * PI).powi((k * d as i64) as i32));
        let tau = cyclo_f64(&spec.psi.gauss_sum()?);
        let nt = t.norm().to_f64().unwrap();
        let nb = b_ideal.norm().to_f64().unwrap();
        let base = c * tau * nt.powf(-(k as f64) / 2.0) / nb;
        let j = b_ideal.mul(&dd).mul(t);
        let bounds = vec![truncation; d];
        let constant_weights = [&spec.eta, &spec.psi].iter().all(|c| c.is_trivial() && c.modulus().is_unit());
        let mut blocks = Vec::new();
        for r in class_group(&f)?.representatives(Some(&spec.level))? {
            let r_inv = r.inv();
            let jr = j.inv().mul(&r);
            // a' lattice and the fibre lattice S
            let (la, s_lat) = match (m.a.is_zero(), m.c.is_zero()) {
                (false, false) => (
                    r.scale(&m.a)?.add(&jr.scale(&m.c)?),
                    r.scale(&f.inv(&m.c)?)?.intersect(&jr.scale(&f.inv(&m.a)?)?),
                ),
                (false, true) => (r.scale(&m.a)?, jr.scale(&f.inv(&m.a)?)?),
                (true, false) => (jr.scale(&m.c)?, r.scale(&f.inv(&m.c)?)?),
                (true, true) => return invalid("singular slash matrix"),
            };
            let rb = r.basis();
            let jb = jr.basis();
            // particular preimages of the basis of la
            let mut cols: Vec<Vec<num_bigint::BigInt>> = Vec::new();
            for x in rb.iter().map(|w| f.mul(w, &m.a)).chain(jb.iter().map(|w| f.mul(w, &m.c))) {
                cols.push(la.coordinates(&x).ok_or_else(|| crate::error::Error::Verification("a' lattice".into()))?);
            }
            let amat: crate::arith::IMat = (0..d).map(|i| cols.iter().map(|c| c[i].clone()).collect()).collect();
            let mut pre_a = Vec::new();
            let mut pre_b = Vec::new();
            for i in 0..d {
                let mut tgt = vec![num_bigint::BigInt::zero(); d];
                tgt[i] = 1.into();
                let sol = crate::arith::solve_integer(&amat, &tgt)
                    .ok_or_else(|| crate::error::Error::Verification("no preimage in the pair lattice".into()))?;
                let a0 = rb.iter().zip(&sol[..d]).fold(f.zero(), |acc, (w, c)| &acc + &w.scale(&c.clone().into()));
                let b0 = jb.iter().zip(&sol[d..]).fold(f.zero(), |acc, (w, c)| &acc + &w.scale(&c.clone().into()));
                pre_a.push(a0);
                pre_b.push(b0);
            }
            let rows: Vec<Row> = la
                .points_in_box(&bounds)
                .par_iter()
                .map(|ap| {
                    let cs = la.coordinates(ap).unwrap();
                    let mut a0 = f.zero();
                    let mut b0 = f.zero();
                    for (i, c) in cs.iter().enumerate() {
                        let q: num_rational::BigRational = c.clone().into();
                        a0 = &a0 + &pre_a[i].scale(&q);
                        b0 = &b0 + &pre_b[i].scale(&q);
                    }
                    let bs = &f.mul(&a0, &m.b) + &f.mul(&b0, &m.d);
                    let a_emb = f.embed_f64(ap);
                    let reduced = !ap.is_zero() && strip.is_reduced(&a_emb);
                    Row { a_emb, reduced, a0, b0, b_shift: f.embed_f64(&bs) }
                })
                .filter(|row| row.reduced || row.a_emb.iter().all(|x| *x == 0.0))
                .collect();
            let s_basis = s_lat.basis();
            let s_emb: Vec<Vec<f64>> = s_basis.iter().map(|x| f.embed_f64(x)).collect();
            // s_inv[j][sigma]: coefficient j of a vector with embeddings e is sum_sigma s_inv[j][sigma] e[sigma]
            let mt: Vec<Vec<f64>> = (0..d).map(|sg| (0..d).map(|jj| s_emb[jj][sg]).collect()).collect();
            let s_inv = crate::ideal_arith::invert_f64(&mt);
            let wa = ResidueWeight::new(&spec.eta, &r_inv, false)?;
            let wb = ResidueWeight::new(&spec.psi, &j.mul(&r_inv), true)?;
            let nr = r.norm().to_f64().unwrap();
            blocks.push(ClassBlock { pre: base * nr.powi(k as i32), rows, s_basis, s_emb, s_inv, wa, wb });
        }
        let trans = dd.mul(t).inv().basis().iter().map(|x| f.embed_f64(x)).collect();
        Ok(SeriesEvaluator {
            k,
            d,
            lambda,
            truncation,
            unit_index: u.index,
            blocks,
            field: f,
            slash: m,
            strip,
            constant_weights,
            translation: trans,
            norm_factor: nt.powf(-(k as f64) / 2.0),
        })
    }

    fn row_sum(&self, blk: &ClassBlock, row: &Row, z: &[C64]) -> Result<(C64, f64, usize)> {
        let d = self.d;
        let f = &self.field;
        let b = self.truncation;
        let k = self.k as i32;
        let center: Vec<f64> = (0..d).map(|jj| (0..d).map(|sg| blk.s_inv[jj][sg] * row.b_shift[sg]).sum()).collect();
        let reach: Vec<i64> = (0..d)
            .map(|jj| ((0..d).map(|sg| blk.s_inv[jj][sg].abs() * b).sum::<f64>() + 1.0).ceil() as i64)
            .collect();
        let lo: Vec<i64> = (0..d).map(|jj| center[jj].round() as i64 - reach[jj]).collect();
        let mut n = lo.clone();
        let a_is_zero = !row.reduced;
        let mut acc = C64::zero();
        let mut mag = 0.0;
        let mut count = 0usize;
        let mut bp = vec![0.0; d];
        loop {
            for sg in 0..d {
                bp[sg] = row.b_shift[sg] - (0..d).map(|jj| n[jj] as f64 * blk.s_emb[jj][sg]).sum::<f64>();
            }
            let inside = bp.iter().all(|x| x.abs() <= b);
            let nonzero_pair = !a_is_zero || bp.iter().any(|x| x.abs() > 1e-12);
            if inside && nonzero_pair && (!a_is_zero || self.strip.is_reduced(&bp)) {
                let w = if self.constant_weights {
                    C64::new(1.0, 0.0)
                } else {
                    let s = blk
                        .s_basis
                        .iter()
                        .zip(&n)
                        .fold(f.zero(), |acc, (x, &c)| if c == 0 { acc } else { &acc + &x.scale_int(c) });
                    let a = &row.a0 + &f.mul(&self.slash.c, &s);
                    let bb = &row.b0 - &f.mul(&self.slash.a, &s);
                    blk.wa.at(f, &a)? * blk.wb.at(f, &-&bb)?
                };
                if w != C64::zero() {
                    let mut p = C64::new(1.0, 0.0);
                    for sg in 0..d {
                        p *= z[sg] * row.a_emb[sg] + bp[sg];
                    }
                    let t = w * p.powi(-k);
                    acc += t;
                    mag += t.norm();
                    count += 1;
                }
            }
            let mut i = 0;
            loop {
                if i == d {
                    return Ok((acc, mag, count));
                }
                n[i] += 1;
                if n[i] <= lo[i] + 2 * reach[i] {
                    break;
                }
                n[i] = lo[i];
                i += 1;
            }
        }
    }

    /// The truncated series at `z`; returns the value and the number of summed terms.
    pub fn evaluate(&self, z: &[C64]) -> Result<(Approx, usize)> {
        if z.len() != self.d || z.iter().any(|w| w.im <= 0.0) {
            return invalid("z must be a point of H^d");
        }
        let mut total = C64::zero();
        let mut mag = 0.0;
        let mut terms = 0;
        for blk in &self.blocks {
            let parts: Vec<Result<(C64, f64, usize)>> =
                blk.rows.par_iter().map(|row| self.row_sum(blk, row, z)).collect();
            let mut s = C64::zero();
            for p in parts {
                let (v, m, c) = p?;
                s += v;
                mag += m * blk.pre.norm();
                terms += c;
            }
            total += blk.pre * s;
        }
        let rad = 64.0 * f64::EPSILON * mag + self.tail_estimate() * total.norm();
        Ok((Approx::new(total, rad), terms))
    }

    /// Heuristic relative tail `B^{d(1-k)+1}`.
    pub fn tail_estimate(&self) -> f64 {
        self.truncation.powf(self.d as f64 * (1.0 - self.k as f64) + 1.0)
    }

    /// Normalized constant `a_lambda(0) N(t_lambda)^{-k/2}`: mean over an `M^d` mesh of the
    /// translation lattice `(t d)^{-1}` at each height; the spread across heights is added to the radius.
    pub fn extract_constant(&self, heights: &[f64], mesh: usize) -> Result<ConstantEstimate> {
        if heights.is_empty() || mesh == 0 {
            return invalid("need at least one height and mesh >= 1");
        }
        let d = self.d;
        let nf = self.norm_factor;
        let mut per_height = Vec::new();
        let mut terms = 0;
        for &h in heights {
            let mut acc = C64::zero();
            let mut rad: f64 = 0.0;
            let count = mesh.pow(d as u32);
            for idx in 0..count {
                let mut x = vec![0.0; d];
                let mut rem = idx;
                for j in 0..d {
                    let c = (rem % mesh) as f64 / mesh as f64;
                    rem /= mesh;
                    for s in 0..d {
                        x[s] += c * self.translation[j][s];
                    }
                }
                let z: Vec<C64> = x.iter().map(|&xr| C64::new(xr, h)).collect();
                let (v, n) = self.evaluate(&z)?;
                acc += v.value;
                rad = rad.max(v.radius);
                terms = n;
            }
            per_height.push(Approx::new(acc / count as f64 * nf, rad * nf));
        }
        let mean = per_height.iter().map(|a| a.value).sum::<C64>() / per_height.len() as f64;
        let spread = per_height.iter().map(|a| (a.value - mean).norm()).fold(0.0, f64::max);
        let rad = per_height.iter().map(|a| a.radius).fold(0.0, f64::max);
        Ok(ConstantEstimate { value: Approx::new(mean, rad + spread), spread, per_height, terms })
    }
}

/// A numerically extracted constant term.
#[derive(Clone, Debug)]
pub struct ConstantEstimate {
    pub value: Approx,
    pub spread: f64,
    pub per_height: Vec<Approx>,
    pub terms: usize,
}

impl ConstantEstimate {
    pub fn to_json(&self) -> Json {
        json!({
            "value": self.value.to_json(),
            "height_spread": format!("{:e}", self.spread),
            "per_height": self.per_height.iter().map(|a| a.to_json()).collect::<Vec<_>>(),
            "terms": self.terms,
            "error_bound_heuristic": true,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;
    use crate::eisenstein::{constant_at_infinity, constant_term_table};

    #[test]
    fn reduction_is_orbit_invariant() {
        let f = Field::quadratic(5).unwrap();
        let u = unit_subgroup(&f, &Ideal::unit(&f), 4).unwrap();
        let a = f.parse_elt("3 + 2*w").unwrap();
        let b = f.parse_elt("1 - w").unwrap();
        let r = u_reduce(&f, &u, &a, &b).unwrap();
        let eps = f.units()[0].clone();
        for j in -3..=3 {
            let e = f.pow(&eps, j).unwrap();
            let s = u_reduce(&f, &u, &f.mul(&a, &e), &f.mul(&b, &e)).unwrap();
            assert_eq!(s, r);
            let s = u_reduce(&f, &u, &-f.mul(&a, &e), &-f.mul(&b, &e)).unwrap();
            assert_eq!(s, r);
        }
        let strip = UnitStrip::new(&f, &u);
        assert!(strip.is_reduced(&f.embed_f64(&r.0)));
    }

    #[test]
    fn residue_weights_match_ideal_logs() {
        let f = Field::quadratic(10).unwrap();
        let p = Ideal::parse(&f, "[3, w + 1]").unwrap();
        let g = crate::ray_class::ray_class_group(&f, &p).unwrap();
        let r = Ideal::parse(&f, "[2, w]").unwrap();
        for chi in g.characters() {
            let j = r.inv().mul(&p);
            let rw = ResidueWeight::new(&chi, &j, true).unwrap();
            for x in j.inv().points_in_box(&[6.0, 6.0]) {
                let a = rw.at(&f, &x).unwrap();
                let b = weight_slow(&f, &chi, &x, &j, true).unwrap();
                assert!((a - b).norm() < 1e-12, "{:?} {:?}", a, b);
            }
        }
    }

    #[test]
    fn rational_series_matches() {
        let q = Field::rationals();
        let s = EisensteinSpec::trivial(&q, 4).unwrap();
        let ev = SeriesEvaluator::new(&s, 0, None, 200.0).unwrap();
        let c = ev.extract_constant(&[8.0, 10.0], 3).unwrap();
        assert!(c.value.distance(C64::new(1.0 / 240.0, 0.0)) < 1e-6, "{:?}", c);
    }

    #[test]
    fn sqrt5_constant_at_infinity() {
        let f = Field::quadratic(5).unwrap();
        let s = EisensteinSpec::trivial(&f, 4).unwrap().with_precision(96);
        let want = constant_at_infinity(&s, 0).unwrap().value.as_rational().unwrap();
        assert_eq!(want, rat(1, 240));
        let ev = SeriesEvaluator::new(&s, 0, None, 25.0).unwrap();
        let c = ev.extract_constant(&[10.0], 1).unwrap();
        assert!(c.value.distance(C64::new(1.0 / 240.0, 0.0)) < 1e-4, "{:?}", c);
    }

    #[test]
    fn sqrt10_cusp_values() {
        let f = Field::quadratic(10).unwrap();
        let s = EisensteinSpec::trivial(&f, 4).unwrap().with_precision(96);
        for r in constant_term_table(&s).unwrap() {
            let ev = SeriesEvaluator::new(&s, r.lambda, Some(&r.matrix), 25.0).unwrap();
            let c = ev.extract_constant(&[10.0], 1).unwrap();
            let v = r.value.to_cball(64);
            let w = C64::new(v.re.mid.to_f64(), v.im.mid.to_f64());
            assert!((c.value.value - w).norm() < 1e-3 * (1.0 + w.norm()), "lambda {} {:?}: oracle {:?} formula {w}", r.lambda, r.cusp_label, c.value);
        }
    }

    fn table_matches(s: &EisensteinSpec, b: f64, tol: f64) {
        for r in constant_term_table(s).unwrap() {
            let ev = SeriesEvaluator::new(s, r.lambda, Some(&r.matrix), b).unwrap();
            let c = ev.extract_constant(&[10.0], 1).unwrap();
            let v = r.value.to_cball(64);
            let w = C64::new(v.re.mid.to_f64(), v.im.mid.to_f64());
            assert!(
                (c.value.value - w).norm() < tol * (1.0 + w.norm()),
                "lambda {} {:?}: oracle {:?} formula {w}",
                r.lambda,
                r.cusp_label,
                c.value
            );
        }
    }

    #[test]
    fn strip_offset_does_not_matter() {
        let f = Field::quadratic(5).unwrap();
        let s = EisensteinSpec::trivial(&f, 4).unwrap();
        let z = [C64::new(0.3, 1.1), C64::new(-0.2, 0.7)];
        let a = SeriesEvaluator::new(&s, 0, None, 30.0).unwrap().evaluate(&z).unwrap().0;
        for off in [0.37, -1.2] {
            let b = SeriesEvaluator::with_strip_offset(&s, 0, None, 30.0, off).unwrap().evaluate(&z).unwrap().0;
            assert!((a.value - b.value).norm() < 1e-5 * a.value.norm(), "{a:?} {b:?}");
        }
    }

    #[test]
    fn slash_by_level_element_is_character_twist() {
        let q = Field::rationals();
        let id = crate::ray_class::narrow_class_group(&q).unwrap().trivial_character();
        let g5 = crate::ray_class::ray_class_group(&q, &Ideal::from_int(&q, 5).unwrap()).unwrap();
        let quad = g5.characters().into_iter().find(|c| c.order() == 2).unwrap();
        let s = EisensteinSpec::new(id, quad.clone(), 4).unwrap();
        let gamma = crate::cusp_geometry::sl2z(&q, [2, 1, 5, 3]).unwrap();
        let z = [C64::new(0.1, 0.9)];
        let plain = SeriesEvaluator::new(&s, 0, None, 200.0).unwrap().evaluate(&z).unwrap().0;
        let slashed = SeriesEvaluator::new(&s, 0, Some(&gamma), 200.0).unwrap().evaluate(&z).unwrap().0;
        let chi = quad.eval_f(&q.from_int(3)).unwrap().unwrap();
        let want = plain.value * root(&chi);
        assert!((slashed.value - want).norm() < 1e-3 * want.norm(), "{slashed:?} vs {want}");
    }

    #[test]
    fn rational_cusps_with_character() {
        let q = Field::rationals();
        let id = crate::ray_class::narrow_class_group(&q).unwrap().trivial_character();
        let g5 = crate::ray_class::ray_class_group(&q, &Ideal::from_int(&q, 5).unwrap()).unwrap();
        let quad = g5.characters().into_iter().find(|c| c.order() == 2).unwrap();
        table_matches(&EisensteinSpec::new(id.clone(), quad.clone(), 4).unwrap().with_precision(96), 150.0, 1e-3);
        table_matches(&EisensteinSpec::new(quad, id, 4).unwrap().with_precision(96), 150.0, 1e-3);
    }

    #[test]
    fn sqrt5_nontrivial_conductor() {
        let f = Field::quadratic(5).unwrap();
        let p = crate::ideal_arith::primes_above(&f, 29).unwrap().remove(0);
        let g = crate::ray_class::ray_class_group(&f, &p).unwrap();
        let psi = g
            .characters()
            .into_iter()
            .find(|c| c.is_primitive() && c.signature().is_totally_positive() && c.order() > 1)
            .expect("even character mod a prime over 29");
        let id = crate::ray_class::narrow_class_group(&f).unwrap().trivial_character();
        table_matches(&EisensteinSpec::new(id, psi, 4).unwrap().with_precision(96), 20.0, 1e-3);
    }

    #[test]
    fn truncation_is_monotone() {
        let f = Field::quadratic(5).unwrap();
        let s = EisensteinSpec::trivial(&f, 4).unwrap();
        let z = [C64::new(0.0, 1.0), C64::new(0.0, 1.0)];
        let a = SeriesEvaluator::new(&s, 0, None, 10.0).unwrap();
        let b = SeriesEvaluator::new(&s, 0, None, 20.0).unwrap();
        let (va, _) = a.evaluate(&z).unwrap();
        let (vb, _) = b.evaluate(&z).unwrap();
        assert!((va.value - vb.value).norm() <= va.radius, "{va:?} {vb:?}");
    }
}
