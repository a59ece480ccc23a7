//! The `hmf` command-line front end.
//!
//! Every command produces one JSON document. Keys are sorted, rationals are
//! strings and numeric values carry either `"exact"` or `{"mid", "radius"}`.

use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C64;
use serde_json::{json, Value as Json};

use crate::class_group::{class_group, is_principal, narrow_generator};
use crate::cusp_geometry::{enumerate_cusps, Mat2};
use crate::eisenstein::{coefficient, constant_term_table, constant_under_slash, EisensteinSpec};
use crate::error::{Error, Result};
use crate::field_core::{Field, FieldSpec};
use crate::hecke_l::{l_special_value, l_value_smoothed, SpecialValueOptions};
use crate::ideal_arith::{different, ideals_up_to, Ideal};
use crate::oracle_hilbert::SeriesEvaluator;
use crate::oracle_q::QEisenstein;
use crate::ray_class::{narrow_class_group, parse_character, ray_class_group, RayClassCharacter};
use crate::verify;

/// Environment variable overriding the default working precision.
pub const PREC_ENV: &str = "HMF_PREC";

#[derive(Parser, Debug)]
#[command(name = "hmf", version, about = "Constant terms of Hilbert Eisenstein series")]
pub struct Cli {
    /// Working precision in bits (default 128, or $HMF_PREC).
    #[arg(long, global = true)]
    pub prec: Option<u32>,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Write the JSON document to this path instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub json: Option<std::path::PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct FieldArg {
    /// `Q`, a squarefree `D > 1`, or a JSON field description.
    #[arg(long, default_value = "Q")]
    pub field: String,
}

#[derive(Args, Debug, Clone)]
pub struct PairArgs {
    #[command(flatten)]
    pub field: FieldArg,
    #[arg(long)]
    pub k: i64,
    /// Character literal: `id` or `{"modulus": .., "index": i}` / `{"modulus": .., "images": [..]}`.
    #[arg(long, default_value = "id")]
    pub eta: String,
    #[arg(long, default_value = "id")]
    pub psi: String,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Invariants of a field.
    Field(FieldArg),
    /// Norm, factorization and classes of ideals.
    Ideals {
        #[command(flatten)]
        field: FieldArg,
        /// Ideal literal such as `[2, w]`; repeatable.
        #[arg(long)]
        ideal: Vec<String>,
        /// List all integral ideals up to this norm.
        #[arg(long)]
        up_to: Option<u64>,
    },
    /// Narrow ray class group modulo an ideal and its characters.
    RayClass {
        #[command(flatten)]
        field: FieldArg,
        #[arg(long, default_value = "1")]
        modulus: String,
        /// Also compute Gauss sums of the primitive characters.
        #[arg(long)]
        gauss: bool,
    },
    /// Cusp representatives for every narrow class.
    Cusps {
        #[command(flatten)]
        field: FieldArg,
        /// Level ideal.
        #[arg(long, default_value = "1")]
        level: String,
        /// Modulus of the second character.
        #[arg(long, default_value = "1")]
        modulus: String,
    },
    /// `L(chi, s)` at an integer point.
    Lvalue {
        #[command(flatten)]
        field: FieldArg,
        #[arg(long, default_value = "id")]
        chi: String,
        #[arg(long, allow_hyphen_values = true)]
        s: i64,
    },
    /// Fourier coefficients `c(n)` for integral ideals of norm up to a bound.
    Coefficients {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 20)]
        up_to: u64,
    },
    /// Normalized constant terms at every cusp class, or under one slash matrix.
    ConstantTerms {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 0)]
        lambda: usize,
        /// Slash matrix `a,b,c,d`; the full cusp table when absent.
        #[arg(long)]
        slash: Option<String>,
    },
    /// Lattice-sum oracle over Q.
    OracleQ {
        #[arg(long = "N")]
        n: i64,
        #[arg(long)]
        k: u32,
        /// Modulus of eta; psi has modulus N / u.
        #[arg(long, default_value_t = 1)]
        u: i64,
        /// Index among the primitive characters of modulus u.
        #[arg(long, default_value_t = 0)]
        eta: usize,
        /// Index among the primitive characters of modulus N / u.
        #[arg(long, default_value_t = 0)]
        psi: usize,
        #[arg(long, default_value = "1,0,0,1", allow_hyphen_values = true)]
        gamma: String,
        #[arg(long, default_value_t = 12)]
        trunc: i64,
        #[arg(long, default_value_t = 10.0)]
        height: f64,
    },
    /// Truncated-series oracle over a real quadratic field.
    OracleF {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 0)]
        lambda: usize,
        #[arg(long, allow_hyphen_values = true)]
        slash: Option<String>,
        /// Index of a cusp class of `lambda` in the constant-term table; overrides `--slash`.
        #[arg(long)]
        cusp: Option<usize>,
        #[arg(long = "box", default_value_t = 25.0)]
        bound: f64,
        #[arg(long, default_value_t = 10.0)]
        height: f64,
        #[arg(long, default_value_t = 1)]
        mesh: usize,
    },
    /// Run a named verification suite, or `all`.
    Verify { suite: String },
}

fn exact(s: impl ToString) -> Json {
    json!({"exact": s.to_string()})
}

fn load_field(a: &FieldArg) -> Result<Arc<Field>> {
    Field::from_spec(&FieldSpec::parse(&a.field)?)
}

fn precision(cli: &Cli) -> Result<u32> {
    if let Some(p) = cli.prec {
        return check_prec(p);
    }
    match std::env::var(PREC_ENV) {
        Ok(v) => check_prec(v.trim().parse().map_err(|_| Error::Invalid(format!("{PREC_ENV} must be an integer")))?),
        Err(_) => Ok(128),
    }
}

fn check_prec(p: u32) -> Result<u32> {
    if !(32..=4096).contains(&p) {
        return Err(Error::Invalid(format!("precision {p} outside 32..=4096")));
    }
    Ok(p)
}

fn spec_of(p: &PairArgs, prec: u32) -> Result<EisensteinSpec> {
    let f = load_field(&p.field)?;
    let eta = parse_character(&f, &p.eta)?;
    let psi = parse_character(&f, &p.psi)?;
    Ok(EisensteinSpec::new(eta, psi, p.k)?.with_precision(prec))
}

fn field_json(f: &Arc<Field>) -> Result<Json> {
    let basis: Vec<Vec<String>> =
        f.integral_basis().iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect();
    let h = class_group(f)?.order();
    let hp = narrow_class_group(f)?.order();
    Ok(json!({
        "name": f.name(),
        "degree": f.degree(),
        "polynomial": f.defining_polynomial().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "integral_basis": basis,
        "discriminant": exact(f.discriminant()),
        "different": different(f).to_json(),
        "units": f.units().iter().map(|u| f.format_elt(u)).collect::<Vec<_>>(),
        "class_number": exact(h),
        "narrow_class_number": exact(hp),
    }))
}

fn ideal_json(f: &Arc<Field>, a: &Ideal) -> Result<Json> {
    let fac = if a.is_unit() { vec![] } else { a.factor()? };
    let (principal, gen) = is_principal(a)?;
    let narrow = if principal { narrow_generator(a)? } else { None };
    Ok(json!({
        "ideal": a.to_json(),
        "norm": exact(a.norm()),
        "factorization": fac.iter().map(|(p, e)| json!({"prime": p.to_json(), "exponent": e})).collect::<Vec<_>>(),
        "principal": principal,
        "generator": gen.map(|g| f.format_elt(&g)),
        "narrowly_principal": narrow.is_some(),
        "class": class_group(f)?.dlog(a)?,
    }))
}

fn character_json(chi: &RayClassCharacter, idx: usize, gauss: bool, prec: u32) -> Result<Json> {
    let mut v = chi.to_json();
    v["index"] = json!(idx);
    v["primitive"] = json!(chi.is_primitive());
    if gauss && chi.is_primitive() {
        let t = chi.gauss_sum()?;
        v["gauss_sum"] = json!({"exact": t.to_string(), "numeric": t.to_cball(prec).to_json()});
        v["gauss_sum_abs2"] = exact(t.mul(&t.conj()).as_rational().map(|q| q.to_string()).unwrap_or_default());
    }
    Ok(v)
}

fn primitive_chars_q(q: &Arc<Field>, m: i64) -> Result<Vec<RayClassCharacter>> {
    if m == 1 {
        return Ok(vec![narrow_class_group(q)?.trivial_character()]);
    }
    Ok(ray_class_group(q, &Ideal::from_int(q, m)?)?.characters().into_iter().filter(|c| c.is_primitive()).collect())
}

fn parse_gamma(s: &str) -> Result<[i64; 4]> {
    let v: Vec<i64> = s
        .split(',')
        .map(|x| x.trim().parse::<i64>().map_err(|_| Error::Invalid(format!("gamma entry '{x}' is not an integer"))))
        .collect::<Result<_>>()?;
    v.try_into().map_err(|_| Error::Invalid("gamma needs four integers a,b,c,d".into()))
}

fn c64_json(z: C64) -> Json {
    json!({"re": format!("{:e}", z.re), "im": format!("{:e}", z.im)})
}

/// Runs a parsed command; the document is returned even for failed verification suites.
pub fn run(cli: &Cli) -> Result<(i32, Json)> {
    let prec = precision(cli)?;
    let doc = match &cli.command {
        Command::Field(a) => field_json(&load_field(a)?)?,
        Command::Ideals { field, ideal, up_to } => {
            let f = load_field(field)?;
            let mut list: Vec<Ideal> = ideal.iter().map(|s| Ideal::parse(&f, s)).collect::<Result<_>>()?;
            if let Some(x) = up_to {
                list.extend(ideals_up_to(&f, *x)?);
            }
            if list.is_empty() {
                return Err(Error::Invalid("give --ideal or --up-to".into()));
            }
            json!({
                "field": f.name(),
                "ideals": list.iter().map(|a| ideal_json(&f, a)).collect::<Result<Vec<_>>>()?,
            })
        }
        Command::RayClass { field, modulus, gauss } => {
            let f = load_field(field)?;
            let m = Ideal::parse(&f, modulus)?;
            let g = ray_class_group(&f, &m)?;
            json!({
                "field": f.name(),
                "modulus": m.to_json(),
                "structure": g.structure,
                "order": exact(g.order()),
                "characters": g.characters().iter().enumerate().map(|(i, c)| character_json(c, i, *gauss, prec)).collect::<Result<Vec<_>>>()?,
            })
        }
        Command::Cusps { field, level, modulus } => {
            let f = load_field(field)?;
            let n = Ideal::parse(&f, level)?;
            let b = Ideal::parse(&f, modulus)?;
            if !n.contains_ideal(&b) && !b.is_unit() {
                return Err(Error::Invalid("the modulus must divide the level".into()));
            }
            let ts = crate::cusp_geometry::normalized_representatives(&b, &n)?;
            let mut out = Vec::new();
            for (lambda, t) in ts.iter().enumerate() {
                let reps = enumerate_cusps(t, lambda, &b, &n)?;
                out.push(json!({
                    "lambda": lambda,
                    "t": t.to_json(),
                    "cusps": reps.iter().map(|r| {
                        let mut v = r.to_json(&f);
                        v["verified"] = json!(r.verify(t, &b).unwrap_or(false));
                        v
                    }).collect::<Vec<_>>(),
                }));
            }
            json!({"field": f.name(), "level": n.to_json(), "modulus": b.to_json(), "classes": out})
        }
        Command::Lvalue { field, chi, s } => {
            let f = load_field(field)?;
            let chi = parse_character(&f, chi)?;
            let opts = SpecialValueOptions { prec, gate_prec: prec + 64, ..Default::default() };
            let v = if *s <= 0 { l_special_value(&chi, 1 - s, &opts)? } else { l_value_smoothed(&chi, *s, prec)? };
            json!({"field": f.name(), "character": chi.to_json(), "l_value": v.to_json()})
        }
        Command::Coefficients { pair, up_to } => {
            let spec = spec_of(pair, prec)?;
            let f = spec.field.clone();
            let rows = ideals_up_to(&f, *up_to)?
                .iter()
                .map(|n| Ok(json!({"n": n.to_json(), "coefficient": exact(coefficient(&spec, n)?)})))
                .collect::<Result<Vec<_>>>()?;
            json!({"spec": spec.to_json(), "coefficients": rows})
        }
        Command::ConstantTerms { pair, lambda, slash } => {
            let spec = spec_of(pair, prec)?;
            let f = spec.field.clone();
            let rows = match slash {
                Some(m) => vec![constant_under_slash(&spec, *lambda, &Mat2::parse(&f, m)?)?.to_json(&f)],
                None => constant_term_table(&spec)?.iter().map(|r| r.to_json(&f)).collect(),
            };
            json!({"spec": spec.to_json(), "constant_terms": rows})
        }
        Command::OracleQ { n, k, u, eta, psi, gamma, trunc, height } => {
            if *n < 1 || *u < 1 || n % u != 0 {
                return Err(Error::Invalid("need u | N with N >= 1".into()));
            }
            let q = Field::rationals();
            let pick = |m: i64, i: usize| -> Result<RayClassCharacter> {
                primitive_chars_q(&q, m)?
                    .get(i)
                    .cloned()
                    .ok_or_else(|| Error::Invalid(format!("no primitive character #{i} of modulus {m}")))
            };
            let e = pick(*u, *eta)?;
            let p = pick(n / u, *psi)?;
            let g = parse_gamma(gamma)?;
            let oracle = QEisenstein::new(&e, &p, *k)?;
            let o = oracle.slash_and_extract(g, *trunc, *height)?;
            let spec = EisensteinSpec::new(e, p, *k as i64)?.with_precision(prec);
            let formula = constant_under_slash(&spec, 0, &crate::cusp_geometry::sl2z(&q, g)?)?;
            let fv = formula.value.to_cball(64);
            let fz = C64::new(fv.re.mid.to_f64(), fv.im.mid.to_f64());
            json!({
                "spec": spec.to_json(),
                "gamma": g,
                "oracle": o.to_json(),
                "formula": formula.to_json(&q),
                "difference": format!("{:e}", o.distance(fz)),
            })
        }
        Command::OracleF { pair, lambda, slash, cusp, bound, height, mesh } => {
            let spec = spec_of(pair, prec)?;
            let f = spec.field.clone();
            let formula = match (cusp, slash) {
                (Some(i), _) => constant_term_table(&spec)?
                    .into_iter()
                    .filter(|r| r.lambda == *lambda)
                    .nth(*i)
                    .ok_or_else(|| Error::Invalid(format!("no cusp class #{i} for lambda {lambda}")))?,
                (None, Some(s)) => constant_under_slash(&spec, *lambda, &Mat2::parse(&f, s)?)?,
                (None, None) => constant_under_slash(&spec, *lambda, &Mat2::identity(&f))?,
            };
            let m = formula.matrix.clone();
            let ev = SeriesEvaluator::new(&spec, *lambda, Some(&m), *bound)?;
            let c = ev.extract_constant(&[*height], *mesh)?;
            let fv = formula.value.to_cball(64);
            let fz = C64::new(fv.re.mid.to_f64(), fv.im.mid.to_f64());
            json!({
                "spec": spec.to_json(),
                "lambda": lambda,
                "slash": m.to_json(&f),
                "box": bound,
                "oracle": c.to_json(),
                "formula": formula.to_json(&f),
                "difference": c64_json(c.value.value - fz),
                "tail_estimate": format!("{:e}", ev.tail_estimate()),
            })
        }
        Command::Verify { suite } => {
            let names: Vec<&str> = if suite == "all" { verify::SUITES.to_vec() } else { vec![suite.as_str()] };
            let reports = names.iter().map(|s| verify::run_suite(s, cli.seed)).collect::<Result<Vec<_>>>()?;
            let ok = reports.iter().all(|r| r.passed());
            let doc = json!({
                "passed": ok,
                "suites": reports.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
            });
            return Ok((if ok { 0 } else { 2 }, doc));
        }
    };
    Ok((0, doc))
}

fn emit(cli: Option<&Cli>, doc: &Json) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(doc).expect("json") + "\n";
    match cli.and_then(|c| c.json.as_ref()) {
        Some(p) => std::fs::write(p, text),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes())
        }
    }
}

/// Parses arguments, runs, writes the document and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok((code, doc)) => {
            if let Err(e) = emit(Some(&cli), &doc) {
                eprintln!("hmf: cannot write output: {e}");
                return 2;
            }
            code
        }
        Err(e) => {
            let code = e.exit_code();
            let mut err = json!({"error": e.to_string(), "exit_code": code});
            if let Error::Parse { pos, .. } = &e {
                err["position"] = json!(pos);
            }
            eprintln!("hmf: {e}");
            let _ = emit(Some(&cli), &err);
            code
        }
    }
}
