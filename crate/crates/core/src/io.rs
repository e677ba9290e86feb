//! Reading response and item tables, and writing run artifacts.
//!
//! CSV files have a header row, UTF-8 text and `.` decimals. Persons are rows
//! and items are columns. Result CSVs carry six significant digits; traces
//! carry full round-trip precision.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::data::ResponseMatrix;
use crate::diagnostics::{DiagnosticsReport, ParameterTrace};
use crate::error::{Error, Result};
use crate::model::{FaItem, IrtItem};
use crate::sampler::{FitResult, ItemParam, SamplerConfig};
use crate::scores::ScoreTable;

/// How raw cells become 0/1.
#[derive(Debug, Clone, PartialEq)]
pub enum Dichotomize {
    /// Numeric cells: `value >= t` is 1, anything below is 0.
    Threshold(f64),
    /// Listed categories are 0, every other non-missing value is 1.
    ZeroCategories(Vec<String>),
}

const MISSING: [&str; 4] = ["", "NA", "N/A", "."];
const PERSON_ID_HEADERS: [&str; 4] = ["id", "person", "person_id", "respondent"];

fn parse_cell(raw: &str, rule: Option<&Dichotomize>) -> std::result::Result<u8, String> {
    let cell = raw.trim();
    if MISSING.iter().any(|m| cell.eq_ignore_ascii_case(m)) {
        return Err(format!("missing value '{raw}'"));
    }
    match rule {
        None => match cell.parse::<f64>() {
            Ok(0.0) => Ok(0),
            Ok(1.0) => Ok(1),
            _ => Err(format!("'{cell}' is not 0 or 1; pass a dichotomization rule for raw scores")),
        },
        Some(Dichotomize::Threshold(t)) => match cell.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok((v >= *t) as u8),
            _ => Err(format!("'{cell}' is not a number")),
        },
        Some(Dichotomize::ZeroCategories(zero)) => Ok((!zero.iter().any(|z| z.trim() == cell)) as u8),
    }
}

/// Read a response table. A first column headed `id`, `person`,
/// `person_id` or `respondent` supplies person ids; otherwise persons are
/// numbered from 1.
pub fn read_responses<R: Read>(reader: R, rule: Option<&Dichotomize>) -> Result<ResponseMatrix> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Data(format!("cannot read header: {e}")))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let has_ids = header
        .first()
        .is_some_and(|h| PERSON_ID_HEADERS.iter().any(|p| h.eq_ignore_ascii_case(p)));
    let item_ids: Vec<String> = header[has_ids as usize..].to_vec();
    if item_ids.is_empty() {
        return Err(Error::Data("header names no item columns".into()));
    }
    let width = header.len();
    let mut values = Vec::new();
    let mut person_ids = Vec::new();
    for (k, record) in rdr.records().enumerate() {
        let row = k + 1;
        let record = record.map_err(|e| Error::Parse {
            row,
            column: "-".into(),
            message: e.to_string(),
        })?;
        if record.len() != width {
            return Err(Error::Parse {
                row,
                column: "-".into(),
                message: format!("expected {width} cells, found {}", record.len()),
            });
        }
        let mut cells = record.iter();
        if has_ids {
            person_ids.push(cells.next().unwrap_or_default().trim().to_string());
        } else {
            person_ids.push(row.to_string());
        }
        for (cell, item) in cells.zip(&item_ids) {
            values.push(parse_cell(cell, rule).map_err(|message| Error::Parse {
                row,
                column: item.clone(),
                message,
            })?);
        }
    }
    if person_ids.is_empty() {
        return Err(Error::Data("no response rows".into()));
    }
    ResponseMatrix::from_values(person_ids.len(), values, item_ids, person_ids)
}

pub fn load_responses(path: &Path, rule: Option<&Dichotomize>) -> Result<ResponseMatrix> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_responses(file, rule).map_err(|e| match e {
        Error::Data(msg) => Error::Data(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Response table with a leading `id` column.
pub fn responses_csv(data: &ResponseMatrix) -> String {
    let mut out = String::from("id");
    for id in data.item_ids() {
        out.push(',');
        out.push_str(id);
    }
    out.push('\n');
    for p in 0..data.n_persons() {
        out.push_str(&data.person_ids()[p]);
        for &v in data.row(p) {
            out.push(',');
            out.push(if v == 1 { '1' } else { '0' });
        }
        out.push('\n');
    }
    out
}

/// `x` with six significant digits, plain notation when the exponent is
/// in [-4, 6), trailing zeros dropped.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let fixed = format!("{:.*}", (5 - exp) as usize, x);
        if fixed.contains('.') {
            fixed.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            fixed
        }
    } else {
        let mantissa = if mantissa.contains('.') {
            mantissa.trim_end_matches('0').trim_end_matches('.')
        } else {
            mantissa
        };
        format!("{mantissa}e{exp}")
    }
}

/// A numeric table keyed by a leading id column.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateTable {
    pub ids: Vec<String>,
    pub columns: Vec<String>,
    /// `values[row][column]`
    pub values: Vec<Vec<f64>>,
}

impl EstimateTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.values.iter().map(|r| r[j]).collect())
    }

    pub fn has(&self, name: &str) -> bool {
        self.columns.iter().any(|c| c == name)
    }
}

pub fn read_estimates(path: &Path) -> Result<EstimateTable> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::csv(path, e))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header.len() < 2 {
        return Err(Error::Data(format!("{}: need an id column and at least one value column", path.display())));
    }
    let columns = header[1..].to_vec();
    let mut ids = Vec::new();
    let mut values = Vec::new();
    for (k, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::csv(path, e))?;
        ids.push(record.get(0).unwrap_or_default().trim().to_string());
        let row = columns
            .iter()
            .enumerate()
            .map(|(j, col)| {
                let cell = record.get(j + 1).unwrap_or_default().trim();
                cell.parse::<f64>().map_err(|_| Error::Parse {
                    row: k + 1,
                    column: col.clone(),
                    message: format!("'{cell}' is not a number"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        values.push(row);
    }
    Ok(EstimateTable { ids, columns, values })
}

/// Item parameters as read from a CSV, in whichever form it holds.
#[derive(Debug, Clone, PartialEq)]
pub enum ItemTable {
    Fa(Vec<(String, FaItem)>),
    Irt(Vec<(String, IrtItem)>),
}

/// Items from a CSV with `alpha,tau` (factor-analytic) or `a,b` (IRT)
/// columns; `c` and `d` default to 0 and 1 when absent.
pub fn read_items(path: &Path) -> Result<ItemTable> {
    let table = read_estimates(path)?;
    let n = table.ids.len();
    let c = table.column("c").unwrap_or_else(|| vec![0.0; n]);
    let d = table.column("d").unwrap_or_else(|| vec![1.0; n]);
    let located = |row: usize, e: Error| Error::Parse {
        row: row + 1,
        column: table.ids[row].clone(),
        message: e.to_string(),
    };
    if let (Some(alpha), Some(tau)) = (table.column("alpha"), table.column("tau")) {
        let items = (0..n)
            .map(|k| Ok((table.ids[k].clone(), FaItem::new(alpha[k], tau[k], c[k], d[k]).map_err(|e| located(k, e))?)))
            .collect::<Result<Vec<_>>>()?;
        return Ok(ItemTable::Fa(items));
    }
    if let (Some(a), Some(b)) = (table.column("a"), table.column("b")) {
        let items = (0..n)
            .map(|k| Ok((table.ids[k].clone(), IrtItem::new(a[k], b[k], c[k], d[k]).map_err(|e| located(k, e))?)))
            .collect::<Result<Vec<_>>>()?;
        return Ok(ItemTable::Irt(items));
    }
    Err(Error::Data(format!(
        "{}: item table needs alpha,tau or a,b columns",
        path.display()
    )))
}

pub fn fa_items_csv(items: &[(String, FaItem)]) -> String {
    let mut out = String::from("id,alpha,tau,c,d\n");
    for (id, it) in items {
        out.push_str(&format!(
            "{id},{},{},{},{}\n",
            fmt_sig(it.alpha()),
            fmt_sig(it.tau()),
            fmt_sig(it.c()),
            fmt_sig(it.d())
        ));
    }
    out
}

pub fn irt_items_csv(items: &[(String, IrtItem)]) -> String {
    let mut out = String::from("id,a,b,c,d\n");
    for (id, it) in items {
        out.push_str(&format!(
            "{id},{},{},{},{}\n",
            fmt_sig(it.a()),
            fmt_sig(it.b()),
            fmt_sig(it.c()),
            fmt_sig(it.d())
        ));
    }
    out
}

/// Write through a sibling temporary file and rename it into place.
pub fn write_atomic(path: &Path, write: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let result = (|| {
        let mut w = BufWriter::new(File::create(&tmp)?);
        write(&mut w)?;
        w.into_inner().map_err(|e| e.into_error())?.sync_all()?;
        fs::rename(&tmp, path)
    })();
    result.map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

pub fn write_string(path: &Path, text: &str) -> Result<()> {
    write_atomic(path, |w| w.write_all(text.as_bytes()))
}

/// Per item: FA estimates, their IRT conversion and per-parameter R-hat.
pub fn items_csv(fit: &FitResult) -> String {
    let mut out = String::from("id,alpha,tau,c,d,a,b,rhat_alpha,rhat_tau,rhat_c,rhat_d\n");
    for (id, est) in fit.item_ids.iter().zip(&fit.items) {
        let rhat = |p: ItemParam| {
            fit.diagnostics
                .get(&format!("{}[{id}]", p.name()))
                .and_then(|s| s.rhat)
                .map(fmt_sig)
                .unwrap_or_default()
        };
        out.push_str(&format!(
            "{id},{},{},{},{},{},{},{},{},{},{}\n",
            fmt_sig(est.fa.alpha()),
            fmt_sig(est.fa.tau()),
            fmt_sig(est.fa.c()),
            fmt_sig(est.fa.d()),
            fmt_sig(est.irt.a()),
            fmt_sig(est.irt.b()),
            rhat(ItemParam::Alpha),
            rhat(ItemParam::Tau),
            rhat(ItemParam::C),
            rhat(ItemParam::D),
        ));
    }
    out
}

/// Per person: totals and scores. Optional columns are left empty when not
/// computed.
pub fn persons_csv(scores: &ScoreTable, averaged: Option<&ScoreTable>) -> String {
    let mut out = String::from("id,observed_total,theta_hat,ngni_total,ng_total,ni_total,pattern_averaged_ngni\n");
    let opt = |v: Option<f64>| v.map(fmt_sig).unwrap_or_default();
    for (k, p) in scores.persons.iter().enumerate() {
        let avg = averaged.map(|a| a.persons[k].ngni_total);
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            p.person_id,
            p.observed_total,
            fmt_sig(p.theta),
            fmt_sig(p.ngni_total),
            opt(p.ng_total),
            opt(p.ni_total),
            opt(avg)
        ));
    }
    out
}

/// Per person and item: posterior mean of the latent response.
pub fn ngni_items_csv(scores: &ScoreTable) -> String {
    let mut out = String::from("id");
    for id in &scores.item_ids {
        out.push(',');
        out.push_str(id);
    }
    out.push('\n');
    for p in &scores.persons {
        out.push_str(&p.person_id);
        for &z in &p.ngni_items {
            out.push(',');
            out.push_str(&fmt_sig(z));
        }
        out.push('\n');
    }
    out
}

const TRACE_MAGIC: &[u8; 8] = b"IRTFATR1";

/// Long-format traces: `chain,iteration,parameter,value`, where `iteration`
/// counts sweeps after burn-in.
pub fn write_traces_csv(w: &mut dyn Write, traces: &[ParameterTrace], thin: usize) -> std::io::Result<()> {
    writeln!(w, "chain,iteration,parameter,value")?;
    let chains = traces.first().map_or(0, |t| t.chains.len());
    for chain in 0..chains {
        for t in traces {
            for (k, v) in t.chains[chain].iter().enumerate() {
                writeln!(w, "{chain},{},{},{v:?}", (k + 1) * thin, t.name)?;
            }
        }
    }
    Ok(())
}

/// Compact little-endian traces: magic, then `u32` counts of chains,
/// parameters and draws per chain, then each name as `u32` length plus
/// UTF-8 bytes, then `f64` values ordered by parameter, chain, draw.
pub fn write_traces_binary(w: &mut dyn Write, traces: &[ParameterTrace]) -> std::io::Result<()> {
    let chains = traces.first().map_or(0, |t| t.chains.len());
    let draws = traces.first().and_then(|t| t.chains.first()).map_or(0, Vec::len);
    w.write_all(TRACE_MAGIC)?;
    for v in [chains, traces.len(), draws] {
        w.write_all(&(v as u32).to_le_bytes())?;
    }
    for t in traces {
        w.write_all(&(t.name.len() as u32).to_le_bytes())?;
        w.write_all(t.name.as_bytes())?;
    }
    for t in traces {
        for chain in &t.chains {
            for v in chain {
                w.write_all(&v.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

fn read_traces_binary(bytes: &[u8], path: &Path) -> Result<Vec<ParameterTrace>> {
    let bad = || Error::Data(format!("{}: truncated binary trace file", path.display()));
    let mut pos = TRACE_MAGIC.len();
    let u32_at = |pos: &mut usize| -> Result<usize> {
        let b = bytes.get(*pos..*pos + 4).ok_or_else(bad)?;
        *pos += 4;
        Ok(u32::from_le_bytes(b.try_into().expect("4 bytes")) as usize)
    };
    let chains = u32_at(&mut pos)?;
    let params = u32_at(&mut pos)?;
    let draws = u32_at(&mut pos)?;
    let mut names = Vec::with_capacity(params);
    for _ in 0..params {
        let len = u32_at(&mut pos)?;
        let raw = bytes.get(pos..pos + len).ok_or_else(bad)?;
        names.push(String::from_utf8(raw.to_vec()).map_err(|_| bad())?);
        pos += len;
    }
    let body = bytes.get(pos..).ok_or_else(bad)?;
    if body.len() != params * chains * draws * 8 {
        return Err(bad());
    }
    let mut values = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")));
    Ok(names
        .into_iter()
        .map(|name| ParameterTrace {
            name,
            chains: (0..chains).map(|_| values.by_ref().take(draws).collect()).collect(),
        })
        .collect())
}

fn read_traces_csv(bytes: &[u8], path: &Path) -> Result<Vec<ParameterTrace>> {
    let mut rdr = csv::Reader::from_reader(bytes);
    let mut order: Vec<String> = Vec::new();
    let mut by_name: HashMap<String, Vec<Vec<f64>>> = HashMap::new();
    for (k, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::csv(path, e))?;
        let field = |j: usize, col: &str| {
            record.get(j).map(str::trim).ok_or_else(|| Error::Parse {
                row: k + 1,
                column: col.into(),
                message: "missing cell".into(),
            })
        };
        let chain: usize = field(0, "chain")?.parse().map_err(|_| Error::Parse {
            row: k + 1,
            column: "chain".into(),
            message: "not a chain index".into(),
        })?;
        let name = field(2, "parameter")?.to_string();
        let value: f64 = field(3, "value")?.parse().map_err(|_| Error::Parse {
            row: k + 1,
            column: "value".into(),
            message: "not a number".into(),
        })?;
        let chains = by_name.entry(name.clone()).or_insert_with(|| {
            order.push(name);
            Vec::new()
        });
        if chains.len() <= chain {
            chains.resize(chain + 1, Vec::new());
        }
        chains[chain].push(value);
    }
    Ok(order
        .into_iter()
        .map(|name| {
            let chains = by_name.remove(&name).unwrap_or_default();
            ParameterTrace { name, chains }
        })
        .collect())
}

/// Traces from either the CSV or the binary format.
pub fn load_traces(path: &Path) -> Result<Vec<ParameterTrace>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(TRACE_MAGIC) {
        read_traces_binary(&bytes, path)
    } else {
        read_traces_csv(&bytes, path)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub input: Option<String>,
    pub n_persons: usize,
    pub n_items: usize,
    pub config: SamplerConfig,
    pub scores: Vec<String>,
    pub pattern_average: bool,
    pub rhat_flagged: Vec<String>,
    pub files: Vec<String>,
    pub wall_time_secs: f64,
}

#[derive(Debug, Clone, Default)]
pub struct ArtifactOptions {
    pub binary_traces: bool,
    pub input: Option<String>,
    pub scores: Vec<String>,
    pub wall_time_secs: f64,
}

/// Paths of everything a fit run writes.
#[derive(Debug, Clone, PartialEq)]
pub struct RunArtifacts {
    pub items: PathBuf,
    pub persons: PathBuf,
    pub ngni_items: PathBuf,
    pub traces: PathBuf,
    pub diagnostics: PathBuf,
    pub manifest: PathBuf,
}

/// Write the result files into `outdir` (created if needed). Every file
/// except the manifest depends only on the fit and scores.
pub fn write_artifacts(
    fit: &FitResult,
    scores: &ScoreTable,
    averaged: Option<&ScoreTable>,
    outdir: &Path,
    options: &ArtifactOptions,
) -> Result<RunArtifacts> {
    fs::create_dir_all(outdir).map_err(|e| Error::io(outdir, e))?;
    let art = RunArtifacts {
        items: outdir.join("items.csv"),
        persons: outdir.join("persons.csv"),
        ngni_items: outdir.join("ngni_items.csv"),
        traces: outdir.join(if options.binary_traces { "traces.bin" } else { "traces.csv" }),
        diagnostics: outdir.join("diagnostics.json"),
        manifest: outdir.join("manifest.json"),
    };
    write_string(&art.items, &items_csv(fit))?;
    write_string(&art.persons, &persons_csv(scores, averaged))?;
    write_string(&art.ngni_items, &ngni_items_csv(scores))?;
    let traces = fit.draws.parameter_traces(&fit.item_ids);
    if options.binary_traces {
        write_atomic(&art.traces, |w| write_traces_binary(w, &traces))?;
    } else {
        write_atomic(&art.traces, |w| write_traces_csv(w, &traces, fit.config.thin))?;
    }
    write_string(&art.diagnostics, &diagnostics_json(&fit.diagnostics)?)?;
    let files = [&art.items, &art.persons, &art.ngni_items, &art.traces, &art.diagnostics]
        .iter()
        .filter_map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()))
        .collect();
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        input: options.input.clone(),
        n_persons: fit.theta.len(),
        n_items: fit.item_ids.len(),
        config: fit.config.clone(),
        scores: options.scores.clone(),
        pattern_average: averaged.is_some(),
        rhat_flagged: fit.diagnostics.flagged.clone(),
        files,
        wall_time_secs: options.wall_time_secs,
    };
    write_string(&art.manifest, &(serde_json::to_string_pretty(&manifest)? + "\n"))?;
    Ok(art)
}

pub fn diagnostics_json(report: &DiagnosticsReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)? + "\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig_formatting() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(-0.0872), "-0.0872");
        assert_eq!(fmt_sig(2.913712345), "2.91371");
        assert_eq!(fmt_sig(9.9999996), "10");
        assert_eq!(fmt_sig(123456.7), "123457");
        assert_eq!(fmt_sig(1234567.0), "1.23457e6");
        assert_eq!(fmt_sig(0.000012345678), "1.23457e-5");
        assert_eq!(fmt_sig(0.0000012345678), "1.23457e-6");
        assert_eq!(fmt_sig(f64::NAN), "NaN");
        for x in [0.3, -17.25, 1e-12, 6.02e23, 0.999999951] {
            let back: f64 = fmt_sig(x).parse().unwrap();
            assert!((back - x).abs() <= 5e-6 * x.abs(), "{x} -> {}", fmt_sig(x));
        }
    }

    #[test]
    fn binary_responses_load_unchanged() {
        let csv = "id,I1,I2\np1,1,0\np2,0,1\n";
        let data = read_responses(csv.as_bytes(), None).unwrap();
        assert_eq!(data.values(), &[1, 0, 0, 1]);
        assert_eq!(data.person_ids(), &["p1", "p2"]);
        assert_eq!(data.item_ids(), &["I1", "I2"]);
        assert_eq!(responses_csv(&data), csv);
    }

    #[test]
    fn persons_are_numbered_without_id_column() {
        let data = read_responses("Q1,Q2\n1,1\n0,0\n".as_bytes(), None).unwrap();
        assert_eq!(data.person_ids(), &["1", "2"]);
        assert_eq!(data.n_items(), 2);
    }

    #[test]
    fn likert_threshold() {
        let csv = "Q1,Q2,Q3\n1,2,5\n3,1,4\n";
        let data = read_responses(csv.as_bytes(), Some(&Dichotomize::Threshold(2.0))).unwrap();
        assert_eq!(data.values(), &[0, 1, 1, 1, 0, 1]);
    }

    #[test]
    fn zero_categories() {
        let csv = "Q1,Q2\nNever,Often\nSometimes,Never\n";
        let rule = Dichotomize::ZeroCategories(vec!["Never".into()]);
        let data = read_responses(csv.as_bytes(), Some(&rule)).unwrap();
        assert_eq!(data.values(), &[0, 1, 1, 0]);
    }

    #[test]
    fn bad_cells_name_their_location() {
        let err = read_responses("Q1,Q2\n1,0\n0,NA\n".as_bytes(), None).unwrap_err();
        match err {
            Error::Parse { row, column, message } => {
                assert_eq!((row, column.as_str()), (2, "Q2"));
                assert!(message.contains("missing"));
            }
            other => panic!("{other:?}"),
        }
        let err = read_responses("Q1,Q2\n1,0\n0\n".as_bytes(), None).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 2, .. }), "{err:?}");
        let err = read_responses("Q1,Q2\n1,2\n".as_bytes(), None).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 1, .. }));
        assert!(read_responses("Q1,Q2\n".as_bytes(), None).is_err());
    }

    #[test]
    fn traces_round_trip_in_both_formats() {
        let traces = vec![
            ParameterTrace {
                name: "alpha[I1]".into(),
                chains: vec![vec![0.1, 0.2, 0.30000000000000004], vec![0.4, 0.5, 0.6]],
            },
            ParameterTrace {
                name: "tau[I1]".into(),
                chains: vec![vec![-1.0, 1e-300, 2.5], vec![0.0, 3.0, -4.0]],
            },
        ];
        let dir = tempfile::tempdir().unwrap();
        let csv_path = dir.path().join("t.csv");
        write_atomic(&csv_path, |w| write_traces_csv(w, &traces, 1)).unwrap();
        assert_eq!(load_traces(&csv_path).unwrap(), traces);
        let bin_path = dir.path().join("t.bin");
        write_atomic(&bin_path, |w| write_traces_binary(w, &traces)).unwrap();
        assert_eq!(load_traces(&bin_path).unwrap(), traces);
        assert!(!dir.path().join("t.bin.tmp").exists());
    }

    #[test]
    fn item_tables_in_either_form() {
        let dir = tempfile::tempdir().unwrap();
        let fa = dir.path().join("fa.csv");
        fs::write(&fa, "id,alpha,tau,c,d\nI1,0.5,0.1,0.2,0.9\n").unwrap();
        assert!(matches!(read_items(&fa).unwrap(), ItemTable::Fa(v) if v.len() == 1));
        let irt = dir.path().join("irt.csv");
        fs::write(&irt, "id,a,b\nI1,1.2,-0.3\n").unwrap();
        match read_items(&irt).unwrap() {
            ItemTable::Irt(v) => assert_eq!((v[0].1.c(), v[0].1.d()), (0.0, 1.0)),
            other => panic!("{other:?}"),
        }
        let bad = dir.path().join("bad.csv");
        fs::write(&bad, "id,alpha,tau\nI1,1.5,0\n").unwrap();
        assert!(matches!(read_items(&bad), Err(Error::Parse { row: 1, .. })));
    }
}
