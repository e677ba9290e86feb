//! Compare published item estimates from three estimation methods.
//!
//! cargo run --example compare_estimates

use std::path::Path;

use irtfa::commands::compare_estimates;

fn main() -> irtfa::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let mirt = dir.join("msatb_mirt.csv");
    for other in ["msatb_jags.csv", "msatb_pymc.csv"] {
        let cmp = compare_estimates(&dir.join(other), &mirt)?;
        let mse: Vec<String> = cmp.mse.iter().map(|(p, v)| format!("{p} {v:.4}")).collect();
        println!("{} vs {}: {}", cmp.sources.0, cmp.sources.1, mse.join(", "));
    }
    let cmp = compare_estimates(&dir.join("msatb_jags.csv"), &dir.join("msatb_pymc.csv"))?;
    println!("\nfirst rows of the tidy table:");
    for line in cmp.tidy_csv.lines().take(5) {
        println!("{line}");
    }
    Ok(())
}
