//! Photon-number-resolving detector model.
//!
//! A detector is described by `P[m][n]`, the probability of reading `m`
//! photons when `n` photons arrive. Detectors on different modes are taken to
//! be independent and identical, so the joint readout probability factorises.

use std::path::Path;

use crate::error::{Error, Result};
use crate::fock::OccupationVector;

/// Allowed deviation of a column sum from one. The published SNSPD table
/// is rounded to four digits; its last column sums to 1.0009.
pub const COLUMN_SUM_TOLERANCE: f64 = 2e-3;

/// Built-in SNSPD characterization, rows = readout, columns = true count.
const RESTA_2023: [[f64; 5]; 5] = [
    [1.0, 0.1050, 0.0110, 0.0012, 0.001],
    [0.0, 0.8950, 0.2452, 0.0513, 0.0097],
    [0.0, 0.0, 0.7438, 0.3770, 0.1304],
    [0.0, 0.0, 0.0, 0.5706, 0.4585],
    [0.0, 0.0, 0.0, 0.0, 0.4013],
];

#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutMatrix {
    max_photons: usize,
    /// `entries[m][n] = P(readout m | n photons)`
    entries: Vec<Vec<f64>>,
}

impl ReadoutMatrix {
    /// Validates shape, range and column sums.
    pub fn new(entries: Vec<Vec<f64>>) -> Result<Self> {
        let size = entries.len();
        if size == 0 {
            return Err(Error::Validation("readout matrix is empty".into()));
        }
        if let Some(row) = entries.iter().position(|r| r.len() != size) {
            return Err(Error::Validation(format!(
                "readout matrix is not square: row {row} has {} entries, expected {size}",
                entries[row].len()
            )));
        }
        for (m, row) in entries.iter().enumerate() {
            for (n, &p) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Validation(format!(
                        "entry P[{m}][{n}] = {p} is outside [0, 1]"
                    )));
                }
            }
        }
        for n in 0..size {
            let sum: f64 = entries.iter().map(|row| row[n]).sum();
            if (sum - 1.0).abs() > COLUMN_SUM_TOLERANCE {
                return Err(Error::Validation(format!(
                    "column {n} sums to {sum}, more than {COLUMN_SUM_TOLERANCE} away from 1"
                )));
            }
        }
        Ok(Self {
            max_photons: size - 1,
            entries,
        })
    }

    pub fn resta_2023() -> Self {
        Self::new(RESTA_2023.iter().map(|r| r.to_vec()).collect())
            .expect("built-in matrix is valid")
    }

    /// Perfect detector resolving up to `max_photons`.
    pub fn identity(max_photons: usize) -> Self {
        let n = max_photons + 1;
        let entries = (0..n)
            .map(|m| (0..n).map(|k| if m == k { 1.0 } else { 0.0 }).collect())
            .collect();
        Self {
            max_photons,
            entries,
        }
    }

    /// Resolves `resta-2023`, `identity-N`, or otherwise a CSV path.
    pub fn load(source: &str) -> Result<Self> {
        if source == "resta-2023" {
            return Ok(Self::resta_2023());
        }
        if let Some(n) = source.strip_prefix("identity-") {
            let n: usize = n
                .parse()
                .map_err(|_| Error::Config(format!("bad identity detector tag {source:?}")))?;
            return Ok(Self::identity(n));
        }
        Self::from_csv(Path::new(source))
    }

    /// CSV with a header row of true photon numbers `0..=N` and one row per
    /// readout value `m`.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let malformed = |reason: String| Error::MalformedFile {
            path: path.to_path_buf(),
            reason,
        };
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| malformed(e.to_string()))?;
        let header = reader
            .headers()
            .map_err(|e| malformed(e.to_string()))?
            .clone();
        for (expected, field) in header.iter().enumerate() {
            match field.parse::<usize>() {
                Ok(n) if n == expected => {}
                _ => {
                    return Err(malformed(format!(
                        "header field {expected} is {field:?}, expected {expected}"
                    )))
                }
            }
        }
        let mut entries = Vec::new();
        for (m, record) in reader.records().enumerate() {
            let record = record.map_err(|e| malformed(e.to_string()))?;
            let row = record
                .iter()
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| malformed(format!("row {m}: {f:?} is not a number")))
                })
                .collect::<Result<Vec<f64>>>()?;
            entries.push(row);
        }
        Self::new(entries).map_err(|e| match e {
            Error::Validation(reason) => malformed(reason),
            other => other,
        })
    }

    /// Rescales every column to sum exactly to one.
    pub fn normalized(&self) -> Self {
        let size = self.entries.len();
        let sums: Vec<f64> = (0..size)
            .map(|n| self.entries.iter().map(|r| r[n]).sum())
            .collect();
        let entries = self
            .entries
            .iter()
            .map(|row| row.iter().zip(&sums).map(|(p, s)| p / s).collect())
            .collect();
        Self {
            max_photons: self.max_photons,
            entries,
        }
    }

    pub fn max_photons(&self) -> usize {
        self.max_photons
    }

    /// `P(readout m | n photons)`.
    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.entries[m][n]
    }

    pub fn entries(&self) -> &[Vec<f64>] {
        &self.entries
    }

    pub fn column_sum(&self, n: usize) -> f64 {
        self.entries.iter().map(|r| r[n]).sum()
    }

    /// Joint readout probability `P(x | n) = prod_i P[x_i][n_i]`.
    pub fn readout_prob(&self, x: &OccupationVector, n: &OccupationVector) -> Result<f64> {
        if x.modes() != n.modes() {
            return Err(Error::contract(format!(
                "readout pattern has {} modes, occupation has {}",
                x.modes(),
                n.modes()
            )));
        }
        let mut prob = 1.0;
        for (&xi, &ni) in x.counts().iter().zip(n.counts()) {
            if xi > self.max_photons || ni > self.max_photons {
                return Err(Error::contract(format!(
                    "photon count {} exceeds detector range {}",
                    xi.max(ni),
                    self.max_photons
                )));
            }
            prob *= self.entries[xi][ni];
            if prob == 0.0 {
                return Ok(0.0);
            }
        }
        Ok(prob)
    }
}
