use serde::Serialize;

use crate::error::{Error, Result};

/// Binary responses, persons in rows and items in columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResponseMatrix {
    n: usize,
    m: usize,
    values: Vec<u8>,
    item_ids: Vec<String>,
    person_ids: Vec<String>,
}

impl ResponseMatrix {
    /// Rejects ragged rows, non-binary cells, and id lists of the wrong length.
    pub fn new(rows: Vec<Vec<u8>>, item_ids: Vec<String>, person_ids: Vec<String>) -> Result<Self> {
        let n = rows.len();
        let m = item_ids.len();
        if n == 0 || m == 0 {
            return Err(Error::Data("response matrix must have at least one row and column".into()));
        }
        if person_ids.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: person_ids.len(),
            });
        }
        let mut values = Vec::with_capacity(n * m);
        for (p, row) in rows.into_iter().enumerate() {
            if row.len() != m {
                return Err(Error::Data(format!(
                    "row {} has {} cells, expected {m}",
                    p + 1,
                    row.len()
                )));
            }
            if let Some(i) = row.iter().position(|&v| v > 1) {
                return Err(Error::Data(format!(
                    "cell ({}, {}) is {}, expected 0 or 1",
                    p + 1,
                    item_ids[i],
                    row[i]
                )));
            }
            values.extend(row);
        }
        Ok(ResponseMatrix {
            n,
            m,
            values,
            item_ids,
            person_ids,
        })
    }

    /// Build from row-major cells.
    pub fn from_values(
        n: usize,
        values: Vec<u8>,
        item_ids: Vec<String>,
        person_ids: Vec<String>,
    ) -> Result<Self> {
        let m = item_ids.len();
        if n == 0 || m == 0 {
            return Err(Error::Data("response matrix must have at least one row and column".into()));
        }
        if values.len() != n * m {
            return Err(Error::LengthMismatch {
                expected: n * m,
                actual: values.len(),
            });
        }
        if person_ids.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: person_ids.len(),
            });
        }
        if let Some(k) = values.iter().position(|&v| v > 1) {
            return Err(Error::Data(format!(
                "cell ({}, {}) is {}, expected 0 or 1",
                k / m + 1,
                item_ids[k % m],
                values[k]
            )));
        }
        Ok(ResponseMatrix {
            n,
            m,
            values,
            item_ids,
            person_ids,
        })
    }

    pub fn default_item_ids(m: usize) -> Vec<String> {
        (1..=m).map(|i| format!("I{i}")).collect()
    }

    pub fn default_person_ids(n: usize) -> Vec<String> {
        (1..=n).map(|p| p.to_string()).collect()
    }

    /// Default ids: items `I1..Im`, persons `1..n`.
    pub fn from_rows(rows: Vec<Vec<u8>>) -> Result<Self> {
        let m = rows.first().map_or(0, Vec::len);
        let n = rows.len();
        ResponseMatrix::new(rows, Self::default_item_ids(m), Self::default_person_ids(n))
    }

    pub fn n_persons(&self) -> usize {
        self.n
    }

    pub fn n_items(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, person: usize, item: usize) -> u8 {
        self.values[person * self.m + item]
    }

    pub fn row(&self, person: usize) -> &[u8] {
        &self.values[person * self.m..(person + 1) * self.m]
    }

    /// Row-major cells.
    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn item_ids(&self) -> &[String] {
        &self.item_ids
    }

    pub fn person_ids(&self) -> &[String] {
        &self.person_ids
    }

    pub fn totals(&self) -> Vec<usize> {
        (0..self.n)
            .map(|p| self.row(p).iter().map(|&v| v as usize).sum())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builds_and_indexes() {
        let data = ResponseMatrix::from_rows(vec![vec![1, 0, 1], vec![0, 0, 1]]).unwrap();
        assert_eq!((data.n_persons(), data.n_items()), (2, 3));
        assert_eq!(data.get(1, 2), 1);
        assert_eq!(data.row(0), &[1, 0, 1]);
        assert_eq!(data.totals(), vec![2, 1]);
        assert_eq!(data.item_ids()[2], "I3");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ResponseMatrix::from_rows(vec![vec![1, 0], vec![1]]).is_err());
        assert!(ResponseMatrix::from_rows(vec![vec![1, 2]]).is_err());
        assert!(ResponseMatrix::from_rows(vec![]).is_err());
    }
}
