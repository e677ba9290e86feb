//! Dichotomize a frequency-scale survey and fit a 4PNO model through the
//! same path as `irtfa fit`.
//!
//! cargo run --release --example load_survey_csv

use irtfa::commands::{run_fit, FitCommand, ScoreKind};
use irtfa::io::Dichotomize;
use irtfa::simulate::simulate;
use irtfa::{FaItem, Link, ModelSpec, Variant};

const LEVELS: [&str; 4] = ["Never", "Sometimes", "Often", "Always"];

fn main() -> irtfa::Result<()> {
    let items = vec![
        FaItem::new(0.7, -0.3, 0.1, 0.95)?,
        FaItem::new(0.6, 0.2, 0.05, 0.9)?,
        FaItem::new(0.8, 0.5, 0.1, 0.97)?,
        FaItem::new(0.5, -0.8, 0.15, 0.92)?,
    ];
    let sim = simulate(&items, 600, Link::NormalOgive, 5)?;

    // expand each binary answer into a category: 0 is always "Never"
    let mut csv = String::from("respondent,sleep,appetite,focus,energy\n");
    for p in 0..sim.responses.n_persons() {
        csv.push_str(&format!("r{p}"));
        for i in 0..items.len() {
            let level = if sim.responses.get(p, i) == 0 { 0 } else { 1 + (p + i) % 3 };
            csv.push(',');
            csv.push_str(LEVELS[level]);
        }
        csv.push('\n');
    }
    let dir = std::env::temp_dir().join("irtfa-survey-example");
    std::fs::create_dir_all(&dir).map_err(|e| irtfa::Error::Data(e.to_string()))?;
    let input = dir.join("survey.csv");
    std::fs::write(&input, csv).map_err(|e| irtfa::Error::Data(e.to_string()))?;

    let mut cmd = FitCommand::new(&input, dir.join("fit"));
    cmd.dichotomize = Some(Dichotomize::ZeroCategories(vec!["Never".into()]));
    cmd.config.model = ModelSpec::new(Link::NormalOgive, Variant::FourP);
    cmd.config.burnin = 1000;
    cmd.config.samples = 1000;
    cmd.scores = vec![ScoreKind::Ngni];
    cmd.pattern_average = true;
    let outcome = run_fit(&cmd)?;

    for (id, est) in outcome.result.item_ids.iter().zip(&outcome.result.items) {
        println!("{id:<9} alpha {:.3} tau {:+.3} c {:.3} d {:.3}", est.fa.alpha(), est.fa.tau(), est.fa.c(), est.fa.d());
    }
    println!("artifacts in {}", outcome.artifacts.items.parent().unwrap().display());
    Ok(())
}
