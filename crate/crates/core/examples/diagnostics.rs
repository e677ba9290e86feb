//! Split R-hat and effective sample size for a short and a long run, read
//! back from a saved trace file.
//!
//! cargo run --release --example diagnostics

use irtfa::io::{load_traces, write_atomic, write_traces_csv};
use irtfa::simulate::simulate;
use irtfa::{fit, DiagnosticsReport, FaItem, Link, SamplerConfig};

fn main() -> irtfa::Result<()> {
    let truth = vec![
        FaItem::new(0.7, -0.4, 0.2, 0.95)?,
        FaItem::new(0.5, 0.3, 0.1, 0.9)?,
        FaItem::new(0.8, 0.6, 0.25, 0.97)?,
    ];
    let sim = simulate(&truth, 500, Link::Logistic, 21)?;
    let dir = std::env::temp_dir().join("irtfa-diagnostics-example");
    std::fs::create_dir_all(&dir).map_err(|e| irtfa::Error::Data(e.to_string()))?;

    for (burnin, samples) in [(50, 100), (1000, 2000)] {
        let config = SamplerConfig {
            burnin,
            samples,
            chains: 4,
            seed: 22,
            ..SamplerConfig::default()
        };
        let result = fit(&sim.responses, &config)?;
        let path = dir.join(format!("traces_{samples}.csv"));
        let traces = result.draws.parameter_traces(&result.item_ids);
        write_atomic(&path, |w| write_traces_csv(w, &traces, config.thin))?;

        let report = DiagnosticsReport::from_traces(&load_traces(&path)?);
        println!("4 chains x ({burnin} + {samples}):");
        for s in &report.parameters {
            println!(
                "  {:<10} median {:>7.3}  95% [{:>6.3}, {:>6.3}]  rhat {:>6.3}  ess {:>7.0}",
                s.name,
                s.median,
                s.q025,
                s.q975,
                s.rhat.unwrap_or(f64::NAN),
                s.ess.unwrap_or(f64::NAN)
            );
        }
        println!("  flagged: {:?}", report.flagged);
    }
    Ok(())
}
