//! The operations behind each CLI subcommand, callable without the binary.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::diagnostics::{mse_compare, DiagnosticsReport};
use crate::equivalence::{verify, CheckKind, EquivalenceReport, FuzzPlan};
use crate::error::{Error, Result};
use crate::io::{self, ArtifactOptions, Dichotomize, ItemTable, RunArtifacts};
use crate::model::{FaItem, IrtItem, Link, ModelSpec, Rescale};
use crate::sampler::{fit, FitResult, SamplerConfig, Scan};
use crate::scores::{ngni_scores, pattern_average, restricted_scores, Restricted, ScoreTable};
use crate::simulate::{simulate, SimulatedDataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScoreKind {
    Ngni,
    Ng,
    Ni,
}

impl std::str::FromStr for ScoreKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "ngni" => Ok(ScoreKind::Ngni),
            "ng" => Ok(ScoreKind::Ng),
            "ni" => Ok(ScoreKind::Ni),
            other => Err(Error::Config(format!("unknown score '{other}', expected ngni, ng or ni"))),
        }
    }
}

impl ScoreKind {
    pub fn name(self) -> &'static str {
        match self {
            ScoreKind::Ngni => "ngni",
            ScoreKind::Ng => "ng",
            ScoreKind::Ni => "ni",
        }
    }
}

/// Parse a comma-separated list with `T::from_str`.
pub fn parse_list<T: std::str::FromStr<Err = Error>>(list: &str) -> Result<Vec<T>> {
    list.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect()
}

#[derive(Debug, Clone)]
pub struct FitCommand {
    pub data: PathBuf,
    pub config: SamplerConfig,
    pub out: PathBuf,
    pub dichotomize: Option<Dichotomize>,
    pub scores: Vec<ScoreKind>,
    pub pattern_average: bool,
    pub binary_traces: bool,
}

impl FitCommand {
    pub fn new(data: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        FitCommand {
            data: data.into(),
            config: SamplerConfig::default(),
            out: out.into(),
            dichotomize: None,
            scores: vec![ScoreKind::Ngni],
            pattern_average: false,
            binary_traces: false,
        }
    }
}

#[derive(Debug)]
pub struct FitOutcome {
    pub result: FitResult,
    pub scores: ScoreTable,
    pub artifacts: RunArtifacts,
}

/// Load, fit, score and write artifacts. NG and NI totals each need a
/// separate restricted fit with the same settings.
pub fn run_fit(cmd: &FitCommand) -> Result<FitOutcome> {
    let start = Instant::now();
    let data = io::load_responses(&cmd.data, cmd.dichotomize.as_ref())?;
    let result = fit(&data, &cmd.config)?;
    let mut scores = ngni_scores(&result, &data)?;
    for kind in &cmd.scores {
        let which = match kind {
            ScoreKind::Ngni => continue,
            ScoreKind::Ng => Restricted::Ng,
            ScoreKind::Ni => Restricted::Ni,
        };
        let totals = restricted_scores(&data, &cmd.config, which)?;
        scores = scores.with_restricted(which, &totals)?;
    }
    let averaged = if cmd.pattern_average {
        Some(pattern_average(&scores, &data)?)
    } else {
        None
    };
    let options = ArtifactOptions {
        binary_traces: cmd.binary_traces,
        input: Some(cmd.data.display().to_string()),
        scores: cmd.scores.iter().map(|s| s.name().to_string()).collect(),
        wall_time_secs: start.elapsed().as_secs_f64(),
    };
    let artifacts = io::write_artifacts(&result, &scores, averaged.as_ref(), &cmd.out, &options)?;
    Ok(FitOutcome {
        result,
        scores,
        artifacts,
    })
}

#[derive(Debug, Clone)]
pub struct SimulateCommand {
    pub items: PathBuf,
    pub n: usize,
    pub link: Link,
    pub seed: u64,
    pub out: PathBuf,
}

#[derive(Serialize)]
struct TruthItem<'a> {
    id: &'a str,
    alpha: f64,
    tau: f64,
    c: f64,
    d: f64,
    a: Option<f64>,
    b: Option<f64>,
}

#[derive(Serialize)]
struct Truth<'a> {
    link: Link,
    seed: u64,
    n_persons: usize,
    items: Vec<TruthItem<'a>>,
    theta: &'a [f64],
    z: Vec<&'a [u8]>,
    ystar: Vec<&'a [f64]>,
}

fn fa_items_from(table: ItemTable) -> Result<(Vec<String>, Vec<FaItem>)> {
    match table {
        ItemTable::Fa(v) => Ok(v.into_iter().unzip()),
        ItemTable::Irt(v) => v
            .into_iter()
            .map(|(id, it)| Ok((id, it.to_fa()?)))
            .collect::<Result<Vec<_>>>()
            .map(|v| v.into_iter().unzip()),
    }
}

/// Simulate from an item table (FA or IRT columns) and write
/// `responses.csv` plus `truth.json` with the parameters and latents.
pub fn run_simulate(cmd: &SimulateCommand) -> Result<SimulatedDataset> {
    let (ids, items) = fa_items_from(io::read_items(&cmd.items)?)?;
    let mut sim = simulate(&items, cmd.n, cmd.link, cmd.seed)?;
    sim.responses = crate::data::ResponseMatrix::from_values(
        cmd.n,
        sim.responses.values().to_vec(),
        ids.clone(),
        sim.responses.person_ids().to_vec(),
    )?;
    std::fs::create_dir_all(&cmd.out).map_err(|e| Error::io(&cmd.out, e))?;
    io::write_string(&cmd.out.join("responses.csv"), &io::responses_csv(&sim.responses))?;
    let m = items.len();
    let truth = Truth {
        link: cmd.link,
        seed: cmd.seed,
        n_persons: cmd.n,
        items: ids
            .iter()
            .zip(&items)
            .map(|(id, it)| {
                let irt = it.to_irt().ok();
                TruthItem {
                    id,
                    alpha: it.alpha(),
                    tau: it.tau(),
                    c: it.c(),
                    d: it.d(),
                    a: irt.map(|x| x.a()),
                    b: irt.map(|x| x.b()),
                }
            })
            .collect(),
        theta: &sim.true_theta,
        z: sim.true_z.chunks(m).collect(),
        ystar: sim.true_ystar.chunks(m).collect(),
    };
    io::write_string(&cmd.out.join("truth.json"), &(serde_json::to_string(&truth)? + "\n"))?;
    Ok(sim)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    FaToIrt,
    IrtToFa,
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fa2irt" => Ok(Direction::FaToIrt),
            "irt2fa" => Ok(Direction::IrtToFa),
            other => Err(Error::Config(format!("unknown direction '{other}', expected fa2irt or irt2fa"))),
        }
    }
}

/// Convert an item table. A rescale applies to the IRT side: after the
/// conversion for `fa2irt`, before it for `irt2fa`.
pub fn run_transform(input: &Path, direction: Direction, rescale: Option<Rescale>) -> Result<String> {
    match (io::read_items(input)?, direction) {
        (ItemTable::Fa(items), Direction::FaToIrt) => {
            let out = items
                .into_iter()
                .map(|(id, it)| {
                    let irt = it.to_irt()?;
                    Ok((id, rescale.map_or(irt, |r| irt.rescale(r))))
                })
                .collect::<Result<Vec<(String, IrtItem)>>>()?;
            Ok(io::irt_items_csv(&out))
        }
        (ItemTable::Irt(items), Direction::IrtToFa) => {
            let out = items
                .into_iter()
                .map(|(id, it)| Ok((id, rescale.map_or(it, |r| it.rescale(r)).to_fa()?)))
                .collect::<Result<Vec<(String, FaItem)>>>()?;
            Ok(io::fa_items_csv(&out))
        }
        (ItemTable::Irt(_), Direction::FaToIrt) => Err(Error::Config(format!(
            "{}: fa2irt needs alpha,tau columns",
            input.display()
        ))),
        (ItemTable::Fa(_), Direction::IrtToFa) => Err(Error::Config(format!(
            "{}: irt2fa needs a,b columns",
            input.display()
        ))),
    }
}

pub fn run_verify(checks: &[CheckKind], fuzz: usize, seed: u64) -> Result<Vec<EquivalenceReport>> {
    verify(checks, FuzzPlan::scaled(fuzz), seed)
}

/// Diagnostics for a saved trace file, written as JSON to `out` and as CSV
/// next to it.
pub fn run_diagnose(traces: &Path, out: &Path) -> Result<DiagnosticsReport> {
    let traces = io::load_traces(traces)?;
    let report = DiagnosticsReport::from_traces(&traces);
    io::write_string(out, &io::diagnostics_json(&report)?)?;
    io::write_string(&out.with_extension("csv"), &report.to_csv())?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub sources: (String, String),
    pub items: Vec<String>,
    /// `(parameter, mse)` for every parameter present in both tables.
    pub mse: Vec<(String, f64)>,
    pub tidy_csv: String,
}

const COMPARED: [&str; 6] = ["a", "b", "c", "d", "alpha", "tau"];

/// Match two estimate tables by item id and compare shared parameters.
pub fn compare_estimates(path_a: &Path, path_b: &Path) -> Result<Comparison> {
    let a = io::read_estimates(path_a)?;
    let b = io::read_estimates(path_b)?;
    let label = |p: &Path| p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned());
    let (mut la, mut lb) = (label(path_a), label(path_b));
    if la == lb {
        la = path_a.display().to_string();
        lb = path_b.display().to_string();
    }
    let pairs: Vec<(usize, usize)> = a
        .ids
        .iter()
        .enumerate()
        .filter_map(|(i, id)| b.ids.iter().position(|x| x == id).map(|j| (i, j)))
        .collect();
    if pairs.is_empty() {
        return Err(Error::Data("the two tables share no item ids".into()));
    }
    let params: Vec<&str> = COMPARED.iter().copied().filter(|p| a.has(p) && b.has(p)).collect();
    if params.is_empty() {
        return Err(Error::Data("the two tables share no parameter columns".into()));
    }
    let mut tidy = String::from("item,param,source,value\n");
    let mut mse = Vec::new();
    for param in &params {
        let ca = a.column(param).expect("checked");
        let cb = b.column(param).expect("checked");
        let xa: Vec<f64> = pairs.iter().map(|&(i, _)| ca[i]).collect();
        let xb: Vec<f64> = pairs.iter().map(|&(_, j)| cb[j]).collect();
        for (k, &(i, _)) in pairs.iter().enumerate() {
            tidy.push_str(&format!("{},{param},{la},{}\n", a.ids[i], io::fmt_sig(xa[k])));
            tidy.push_str(&format!("{},{param},{lb},{}\n", a.ids[i], io::fmt_sig(xb[k])));
        }
        mse.push((param.to_string(), mse_compare(&xa, &xb)?));
    }
    Ok(Comparison {
        sources: (la, lb),
        items: pairs.iter().map(|&(i, _)| a.ids[i].clone()).collect(),
        mse,
        tidy_csv: tidy,
    })
}

pub fn run_compare(path_a: &Path, path_b: &Path, out: &Path) -> Result<Comparison> {
    let cmp = compare_estimates(path_a, path_b)?;
    io::write_string(out, &cmp.tidy_csv)?;
    Ok(cmp)
}

/// Sampler settings from CLI-style pieces.
pub fn sampler_config(
    model: ModelSpec,
    chains: usize,
    burnin: usize,
    samples: usize,
    thin: usize,
    seed: u64,
    scan: Scan,
) -> Result<SamplerConfig> {
    let config = SamplerConfig {
        chains,
        burnin,
        samples,
        thin,
        seed,
        model,
        scan,
        ..SamplerConfig::default()
    };
    config.validate()?;
    Ok(config)
}
