use hilbert_eisenstein::verify::{run_suite, SUITES};

fn main() -> hilbert_eisenstein::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    for name in SUITES.iter().filter(|s| !matches!(**s, "gauss-sums" | "properties")) {
        let r = run_suite(name, seed)?;
        println!("{:<22} {}", name, if r.passed() { "ok" } else { "FAILED" });
        for c in r.failures() {
            println!("    {}: {}", c.name, c.detail);
        }
    }
    Ok(())
}
