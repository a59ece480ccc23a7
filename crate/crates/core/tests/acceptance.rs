//! Acceptance run: one PASS/FAIL line per criterion, each with its tolerance built
//! into the suite and its runtime budget checked here.

use std::time::{Duration, Instant};

use hilbert_eisenstein::verify::{self, Check};

const SEED: u64 = 20240601;

struct Criterion {
    id: u32,
    title: &'static str,
    budget: Duration,
    run: fn() -> hilbert_eisenstein::Result<Vec<Check>>,
}

fn criteria() -> Vec<Criterion> {
    vec![
        Criterion { id: 1, title: "F = Q exact constants 1/240 and -1/504", budget: Duration::from_secs(1), run: verify::exact_q },
        Criterion { id: 2, title: "Q(sqrt10) ledger", budget: Duration::from_secs(5), run: verify::q10_ledger },
        Criterion {
            id: 3,
            title: "formula vs lattice-sum oracle over Q, |delta| < 1e-6",
            budget: Duration::from_secs(60),
            run: verify::formula_oracle_q,
        },
        Criterion {
            id: 4,
            title: "formula vs series oracle over Q(sqrt5), B = 40, height 10, 1e-3",
            budget: Duration::from_secs(120),
            run: || verify::oracle_f_checks(5, 40.0, 10.0),
        },
        Criterion {
            id: 5,
            title: "zeta_Q(sqrt5)(-1) = 1/30 by reconstruction at 128 and 192 bits",
            budget: Duration::from_secs(30),
            run: verify::lvalue_reconstruction,
        },
        Criterion {
            id: 6,
            title: "|tau(psi)|^2 = N(cond) within 1e-20",
            budget: Duration::from_secs(60),
            run: verify::gauss_sums,
        },
        Criterion {
            id: 7,
            title: "cusp classes and il invariance (500 samples per field)",
            budget: Duration::from_secs(60),
            run: || verify::cusps(SEED, 500),
        },
        Criterion {
            id: 8,
            title: "exact equivariance under 200 random level elements",
            budget: Duration::from_secs(30),
            run: || verify::equivariance(SEED, 200),
        },
        Criterion {
            id: 9,
            title: "property suites, 1000 instances each",
            budget: Duration::from_secs(120),
            run: || verify::properties(SEED, 1000),
        },
    ]
}

fn main() {
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for c in criteria() {
        if !only.is_empty() && !only.contains(&c.id) {
            continue;
        }
        let start = Instant::now();
        let res = (c.run)();
        let took = start.elapsed();
        let (ok, detail) = match &res {
            Ok(checks) => {
                let bad: Vec<&Check> = checks.iter().filter(|k| !k.pass).collect();
                let detail = match bad.first() {
                    Some(b) => format!("{}: {}", b.name, b.detail),
                    None => format!("{} checks", checks.len()),
                };
                (!checks.is_empty() && bad.is_empty(), detail)
            }
            Err(e) => (false, format!("error: {e}")),
        };
        let in_time = took <= c.budget;
        let pass = ok && in_time;
        if !pass {
            failed += 1;
        }
        let timing = if in_time { String::new() } else { format!(" over budget {:?}", c.budget) };
        println!(
            "{} criterion {}: {} ({detail}; {:.2}s{timing})",
            if pass { "PASS" } else { "FAIL" },
            c.id,
            c.title,
            took.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
