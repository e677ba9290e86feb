//! Person scores adjusted for guessing and inattention.
//!
//! The NGNI item score is the posterior mean of the latent response `Z_pi`,
//! so a correct answer that was probably a guess counts for less than one and
//! a miss that was probably a slip counts for more than zero. NG and NI totals
//! come from refitting with only one of the two asymptotes free.

use std::collections::HashMap;

use serde::Serialize;

use crate::data::ResponseMatrix;
use crate::error::{Error, Result};
use crate::sampler::{fit, FitResult, SamplerConfig};
use crate::model::Variant;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PersonScore {
    pub person_id: String,
    pub observed_total: usize,
    pub theta: f64,
    pub ngni_items: Vec<f64>,
    pub ngni_total: f64,
    pub ng_total: Option<f64>,
    pub ni_total: Option<f64>,
    /// Persons with the same response pattern share an id; ids count up
    /// from 0 in order of first appearance.
    pub pattern_id: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreTable {
    pub item_ids: Vec<String>,
    pub persons: Vec<PersonScore>,
}

fn pattern_ids(data: &ResponseMatrix) -> Vec<usize> {
    let mut seen: HashMap<&[u8], usize> = HashMap::new();
    (0..data.n_persons())
        .map(|p| {
            let next = seen.len();
            *seen.entry(data.row(p)).or_insert(next)
        })
        .collect()
}

fn check_rows(data: &ResponseMatrix, n: usize, m: usize) -> Result<()> {
    if data.n_persons() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: data.n_persons(),
        });
    }
    if data.n_items() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            actual: data.n_items(),
        });
    }
    Ok(())
}

/// NGNI item scores and totals from a fit on `data`.
pub fn ngni_scores(result: &FitResult, data: &ResponseMatrix) -> Result<ScoreTable> {
    let m = result.n_items();
    check_rows(data, result.theta.len(), m)?;
    let ids = pattern_ids(data);
    let totals = data.totals();
    let persons = (0..data.n_persons())
        .map(|p| {
            let items = result.z_row(p).to_vec();
            PersonScore {
                person_id: data.person_ids()[p].clone(),
                observed_total: totals[p],
                theta: result.theta[p],
                ngni_total: items.iter().sum(),
                ngni_items: items,
                ng_total: None,
                ni_total: None,
                pattern_id: ids[p],
            }
        })
        .collect();
    Ok(ScoreTable {
        item_ids: result.item_ids.clone(),
        persons,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Restricted {
    /// Guessing only: inattention pinned at `d = 1`.
    Ng,
    /// Inattention only: guessing pinned at `c = 0`.
    Ni,
}

impl Restricted {
    pub fn variant(self) -> Variant {
        match self {
            Restricted::Ng => Variant::ThreeP,
            Restricted::Ni => Variant::NiOnly,
        }
    }
}

/// Refit under the restricted variant (same link, seed and run lengths) and
/// return each person's latent total.
pub fn restricted_scores(data: &ResponseMatrix, config: &SamplerConfig, which: Restricted) -> Result<Vec<f64>> {
    let config = SamplerConfig {
        model: config.model.with_variant(which.variant()),
        ..config.clone()
    };
    let result = fit(data, &config)?;
    Ok((0..data.n_persons()).map(|p| result.z_row(p).iter().sum()).collect())
}

impl ScoreTable {
    pub fn with_restricted(mut self, which: Restricted, totals: &[f64]) -> Result<Self> {
        if totals.len() != self.persons.len() {
            return Err(Error::LengthMismatch {
                expected: self.persons.len(),
                actual: totals.len(),
            });
        }
        for (person, &t) in self.persons.iter_mut().zip(totals) {
            match which {
                Restricted::Ng => person.ng_total = Some(t),
                Restricted::Ni => person.ni_total = Some(t),
            }
        }
        Ok(self)
    }

    pub fn ngni_totals(&self) -> Vec<f64> {
        self.persons.iter().map(|p| p.ngni_total).collect()
    }
}

/// Replace each person's NGNI total by the mean over everyone who gave the
/// same response pattern. Item scores and other fields are left alone.
pub fn pattern_average(table: &ScoreTable, data: &ResponseMatrix) -> Result<ScoreTable> {
    let m = table.item_ids.len();
    check_rows(data, table.persons.len(), m)?;
    let ids = pattern_ids(data);
    let groups = ids.iter().copied().max().map_or(0, |k| k + 1);
    let mut sums = vec![0.0; groups];
    let mut counts = vec![0usize; groups];
    for (person, &g) in table.persons.iter().zip(&ids) {
        sums[g] += person.ngni_total;
        counts[g] += 1;
    }
    let mut out = table.clone();
    for (person, &g) in out.persons.iter_mut().zip(&ids) {
        if counts[g] > 1 {
            person.ngni_total = sums[g] / counts[g] as f64;
        }
        person.pattern_id = g;
    }
    Ok(out)
}
