//! JSONL dataset files: a header line followed by one search per line.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{
    validate_record, ArmSpace, DomainError, SearchRecord, Vocab, ZeroWeightWarning,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("dataset is missing its header line")]
    MissingHeader,
    #[error("unsupported schema_version {0} (expected {SCHEMA_VERSION})")]
    SchemaVersion(u32),
    #[error(transparent)]
    Invalid(#[from] DomainError),
    #[error("search {search_id}: day_index {day} outside the declared {days} days")]
    DayOutOfRange {
        search_id: String,
        day: u32,
        days: u32,
    },
    #[error("search {search_id}: day_index {day} follows day {previous}; records must be grouped by day in ascending order")]
    UnorderedDays {
        search_id: String,
        day: u32,
        previous: u32,
    },
    #[error("day {0} has no searches; days must be contiguous from 0")]
    MissingDay(u32),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub schema_version: u32,
    pub vocab: Vocab,
    pub days: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub header: DatasetHeader,
    pub records: Vec<SearchRecord>,
}

impl Dataset {
    pub fn new(vocab: Vocab, days: u32, records: Vec<SearchRecord>) -> Self {
        Dataset {
            header: DatasetHeader {
                schema_version: SCHEMA_VERSION,
                vocab,
                days,
            },
            records,
        }
    }

    pub fn vocab(&self) -> &Vocab {
        &self.header.vocab
    }

    pub fn read_path(path: impl AsRef<Path>) -> Result<Self, DatasetError> {
        Self::read(File::open(path)?)
    }

    /// Parses header and records. Record-level invariants are checked by
    /// [`Dataset::validate`], not here.
    pub fn read(reader: impl Read) -> Result<Self, DatasetError> {
        let mut lines = BufReader::new(reader).lines().enumerate();
        let header: DatasetHeader = loop {
            match lines.next() {
                None => return Err(DatasetError::MissingHeader),
                Some((n, line)) => {
                    let line = line?;
                    if line.trim().is_empty() {
                        continue;
                    }
                    break serde_json::from_str(&line).map_err(|source| DatasetError::Parse {
                        line: n + 1,
                        source,
                    })?;
                }
            }
        };
        if header.schema_version != SCHEMA_VERSION {
            return Err(DatasetError::SchemaVersion(header.schema_version));
        }
        let mut records = Vec::new();
        for (n, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: SearchRecord =
                serde_json::from_str(&line).map_err(|source| DatasetError::Parse {
                    line: n + 1,
                    source,
                })?;
            records.push(record);
        }
        Ok(Dataset { header, records })
    }

    pub fn write_path(&self, path: impl AsRef<Path>) -> Result<(), DatasetError> {
        let mut out = BufWriter::new(File::create(path)?);
        self.write(&mut out)?;
        out.flush()?;
        Ok(())
    }

    pub fn write(&self, mut out: impl Write) -> Result<(), DatasetError> {
        let to_io = |e: serde_json::Error| DatasetError::Io(e.into());
        serde_json::to_writer(&mut out, &self.header).map_err(to_io)?;
        out.write_all(b"\n")?;
        for record in &self.records {
            serde_json::to_writer(&mut out, record).map_err(to_io)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Validates every record (fail-fast) and the day layout; returns the
    /// collected zero-combined-weight warnings.
    pub fn validate(&self, arm_space: &ArmSpace) -> Result<Vec<ZeroWeightWarning>, DatasetError> {
        let mut warnings = Vec::new();
        for record in &self.records {
            warnings.extend(validate_record(record, arm_space, &self.header.vocab)?);
            if record.day_index >= self.header.days {
                return Err(DatasetError::DayOutOfRange {
                    search_id: record.search_id.clone(),
                    day: record.day_index,
                    days: self.header.days,
                });
            }
        }
        self.day_slices()?;
        Ok(warnings)
    }

    /// Splits the records into per-day slices. Days must appear in ascending
    /// order and every day in `0..=last` must be present.
    pub fn day_slices(&self) -> Result<Vec<&[SearchRecord]>, DatasetError> {
        let mut slices = Vec::new();
        let mut start = 0;
        let mut expected = 0u32;
        while start < self.records.len() {
            let day = self.records[start].day_index;
            if day < expected {
                let r = &self.records[start];
                return Err(DatasetError::UnorderedDays {
                    search_id: r.search_id.clone(),
                    day,
                    previous: expected - 1,
                });
            }
            if day > expected {
                return Err(DatasetError::MissingDay(expected));
            }
            let end = start
                + self.records[start..]
                    .iter()
                    .take_while(|r| r.day_index == day)
                    .count();
            slices.push(&self.records[start..end]);
            start = end;
            expected += 1;
        }
        Ok(slices)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Context, Item, JugglerPrediction};

    fn rec(id: &str, day: u32) -> SearchRecord {
        SearchRecord {
            search_id: id.into(),
            day_index: day,
            context: Context {
                brand: "A".into(),
                device: "mobile".into(),
                geo: "city".into(),
            },
            juggler: JugglerPrediction {
                w_utility: 1.0,
                w_comp: 0.5,
            },
            items: vec![Item {
                item_id: "i0".into(),
                utility_score: 0.25,
                compensation_score: -1.5,
                relevance_label: 1,
                attributes: [("daily_price".to_string(), 120.0)].into(),
            }],
        }
    }

    fn vocab() -> Vocab {
        Vocab {
            brand: vec!["A".into()],
            device: vec!["mobile".into()],
            geo: vec!["city".into()],
        }
    }

    #[test]
    fn write_then_read_is_identity() {
        let ds = Dataset::new(vocab(), 2, vec![rec("a", 0), rec("b", 1)]);
        let mut buf = Vec::new();
        ds.write(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(r#"{"schema_version":1,"vocab":{"brand":["A"]"#));
        assert_eq!(text.lines().count(), 3);
        let back = Dataset::read(&buf[..]).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn rejects_wrong_schema_and_missing_header() {
        let err = Dataset::read(&b"{\"schema_version\":2,\"vocab\":{\"brand\":[],\"device\":[],\"geo\":[]},\"days\":1}\n"[..]);
        assert!(matches!(err, Err(DatasetError::SchemaVersion(2))));
        assert!(matches!(
            Dataset::read(&b""[..]),
            Err(DatasetError::MissingHeader)
        ));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "{\"schema_version\":1,\"vocab\":{\"brand\":[],\"device\":[],\"geo\":[]},\"days\":1}\n{\"search_id\":3}\n";
        match Dataset::read(text.as_bytes()) {
            Err(DatasetError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn day_layout_checks() {
        let ds = Dataset::new(vocab(), 3, vec![rec("a", 0), rec("b", 2)]);
        assert!(matches!(
            ds.validate(&ArmSpace::default()),
            Err(DatasetError::MissingDay(1))
        ));
        let ds = Dataset::new(vocab(), 3, vec![rec("a", 1), rec("b", 0)]);
        assert!(matches!(ds.day_slices(), Err(DatasetError::MissingDay(0))));
        let ds = Dataset::new(vocab(), 3, vec![rec("a", 0), rec("b", 1), rec("c", 0)]);
        assert!(matches!(
            ds.day_slices(),
            Err(DatasetError::UnorderedDays { .. })
        ));
        let ds = Dataset::new(vocab(), 1, vec![rec("a", 0), rec("b", 1)]);
        assert!(matches!(
            ds.validate(&ArmSpace::default()),
            Err(DatasetError::DayOutOfRange { .. })
        ));
        let ds = Dataset::new(vocab(), 2, vec![rec("a", 0), rec("b", 0), rec("c", 1)]);
        let slices = ds.day_slices().unwrap();
        assert_eq!(
            slices.iter().map(|s| s.len()).collect::<Vec<_>>(),
            vec![2, 1]
        );
    }
}
