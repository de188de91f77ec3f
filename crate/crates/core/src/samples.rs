//! Sorted sample containers and the plain-text sample file format.
//!
//! A sample file holds one decimal value per line. Lines starting with `#`
//! are comments; the writer emits a single `# seed=<n> model=<json>` header
//! when the set carries provenance.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::distributions::DensityModel;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Where a sample set came from.
#[derive(Clone, Debug, PartialEq)]
pub struct Provenance {
    pub seed: u64,
    pub model: DensityModel,
}

/// Non-empty, non-decreasing array of sample values.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet<T> {
    values: Vec<T>,
    provenance: Option<Provenance>,
}

impl<T: Real> SampleSet<T> {
    /// Sorts `values` and wraps them. NaN values are rejected.
    pub fn from_unsorted(mut values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySamples);
        }
        if let Some(pos) = values.iter().position(|v| v.is_nan()) {
            return Err(Error::Domain(format!("sample {pos} is NaN")));
        }
        values.sort_by(|a, b| a.partial_cmp(b).expect("NaN filtered above"));
        Ok(Self {
            values,
            provenance: None,
        })
    }

    /// Wraps values that are already non-decreasing.
    pub fn from_sorted(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySamples);
        }
        if let Some(i) = values.windows(2).position(|w| !(w[0] <= w[1])) {
            return Err(Error::Domain(format!(
                "samples not sorted at index {}: {} > {}",
                i + 1,
                values[i],
                values[i + 1]
            )));
        }
        Ok(Self {
            values,
            provenance: None,
        })
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = Some(provenance);
        self
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> T {
        self.values[0]
    }

    pub fn max(&self) -> T {
        self.values[self.values.len() - 1]
    }

    pub fn range(&self) -> T {
        self.max() - self.min()
    }

    /// Sample median; the midpoint of the two middle order statistics when `n` is even.
    pub fn median(&self) -> T {
        let n = self.values.len();
        if n % 2 == 1 {
            self.values[n / 2]
        } else {
            T::midpoint(self.values[n / 2 - 1], self.values[n / 2])
        }
    }

    /// The set `{-x}`, again sorted.
    pub fn reflected(&self) -> Self {
        Self {
            values: self.values.iter().rev().map(|&v| -v).collect(),
            provenance: None,
        }
    }

    /// The set `{x + c}`.
    pub fn translated(&self, c: T) -> Self {
        Self {
            values: self.values.iter().map(|&v| v + c).collect(),
            provenance: None,
        }
    }
}

impl SampleSet<f64> {
    /// Serializes to the text format: optional provenance header, then one value per line.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 20 + 64);
        if let Some(p) = &self.provenance {
            let model = serde_json::to_string(&p.model).expect("models serialize");
            let _ = writeln!(out, "# seed={} model={}", p.seed, model);
        }
        for v in &self.values {
            let _ = writeln!(out, "{v}");
        }
        out
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_text().as_bytes())?;
        Ok(())
    }

    /// Reads the text format. Values may appear in any order; the result is sorted.
    /// A well-formed provenance header is attached, other comments are ignored.
    pub fn read_text<R: BufRead>(reader: R) -> Result<Self> {
        let (values, provenance) = read_values(reader)?;
        let set = Self::from_unsorted(values)?;
        Ok(match provenance {
            Some(p) => set.with_provenance(p),
            None => set,
        })
    }
}

/// Reads sample values in file order (no sorting). Used where draw order matters.
pub fn read_values<R: BufRead>(reader: R) -> Result<(Vec<f64>, Option<Provenance>)> {
    let mut values = Vec::new();
    let mut provenance = None;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if provenance.is_none() {
                provenance = parse_header(comment.trim());
            }
            continue;
        }
        let value: f64 = trimmed.replace('\u{2212}', "-").parse().map_err(|e| Error::Parse {
            line: idx + 1,
            message: format!("{trimmed:?}: {e}"),
        })?;
        if value.is_nan() {
            return Err(Error::Parse {
                line: idx + 1,
                message: "NaN sample".into(),
            });
        }
        values.push(value);
    }
    Ok((values, provenance))
}

fn parse_header(comment: &str) -> Option<Provenance> {
    let rest = comment.strip_prefix("seed=")?;
    let (seed, rest) = rest.split_once(char::is_whitespace)?;
    let model = rest.trim().strip_prefix("model=")?;
    Some(Provenance {
        seed: seed.parse().ok()?,
        model: serde_json::from_str(model).ok()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_is_rejected() {
        assert!(matches!(
            SampleSet::<f64>::from_unsorted(vec![]),
            Err(Error::EmptySamples)
        ));
        assert!(SampleSet::<f64>::from_sorted(vec![]).is_err());
    }

    #[test]
    fn unsorted_input_is_rejected_by_from_sorted() {
        assert!(SampleSet::from_sorted(vec![1.0, 0.0]).is_err());
        assert!(SampleSet::from_sorted(vec![0.0, 0.0, 1.0]).is_ok());
    }

    #[test]
    fn nan_is_rejected() {
        assert!(SampleSet::from_unsorted(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn median_and_reflection() {
        let s = SampleSet::from_unsorted(vec![3.0, -1.0, 0.5, 2.0]).unwrap();
        assert_eq!(s.values(), &[-1.0, 0.5, 2.0, 3.0]);
        assert_eq!(s.median(), 1.25);
        let r = s.reflected();
        assert_eq!(r.values(), &[-3.0, -2.0, -0.5, 1.0]);
        assert_eq!(r.median(), -1.25);
    }

    #[test]
    fn text_round_trip_with_header() {
        let model = DensityModel::gaussian(0.0, 1.0).unwrap();
        let s = SampleSet::from_unsorted(vec![0.1, -2.5, 1e-17])
            .unwrap()
            .with_provenance(Provenance { seed: 42, model });
        let text = s.to_text();
        assert!(text.starts_with("# seed=42 model={"));
        let back = SampleSet::read_text(text.as_bytes()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn parse_error_names_line() {
        let err = SampleSet::read_text("1.0\n\nabc\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }
}
