use hilbert_eisenstein::class_group::is_principal;
use hilbert_eisenstein::{Field, Ideal};

fn main() -> hilbert_eisenstein::Result<()> {
    let f = Field::quadratic(10)?;
    for lit in ["(2 + sqrt(10))", "[6]", "[2, w]", "[15, 5*w]"] {
        let a = Ideal::parse(&f, lit)?;
        let parts: Vec<String> = a
            .factor()?
            .iter()
            .map(|(p, e)| format!("({})^{e}", p.basis().iter().map(|x| f.format_elt(x)).collect::<Vec<_>>().join(", ")))
            .collect();
        let (principal, gen) = is_principal(&a)?;
        let gen = gen.map(|g| f.format_elt(&g)).unwrap_or_else(|| "-".into());
        println!("{lit:<16} N = {:<4} = {}  principal: {principal} ({gen})", a.norm(), parts.join(" "));
    }
    Ok(())
}
