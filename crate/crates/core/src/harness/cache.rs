//! Append-only CSV store of per-field results.

use super::density::FieldRecord;
use crate::error::{Result, TmodError};
use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

pub const CACHE_SCHEMA: &str = "# tmod cache schema 1";
const HEADER: [&str; 7] = ["m", "p", "kind", "method_version", "label", "method", "note"];

type Key = (i64, u64, String, String);

pub struct Cache {
    path: PathBuf,
    entries: HashMap<Key, FieldRecord>,
}

impl Cache {
    /// Loads `path`, creating it with the schema line and header when absent.
    pub fn open(path: &Path) -> Result<Cache> {
        let mut entries = HashMap::new();
        if !path.exists() {
            let mut f = File::create(path)?;
            writeln!(f, "{CACHE_SCHEMA}")?;
            writeln!(f, "{}", HEADER.join(","))?;
            return Ok(Cache { path: path.to_path_buf(), entries });
        }
        let text = std::fs::read_to_string(path)?;
        if text.lines().next() != Some(CACHE_SCHEMA) {
            return Err(TmodError::Invalid(format!("{} is not a schema-1 cache", path.display())));
        }
        let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        for rec in rd.records() {
            let rec = rec?;
            let field = |i: usize| rec.get(i).unwrap_or("").to_string();
            let parse_err = || TmodError::Invalid(format!("bad cache record {rec:?}"));
            let m: i64 = field(0).parse().map_err(|_| parse_err())?;
            let p: u64 = field(1).parse().map_err(|_| parse_err())?;
            let label = Some(field(4)).filter(|s| !s.is_empty());
            let r = FieldRecord { m, label, method: field(5), note: field(6) };
            entries.insert((m, p, field(2), field(3)), r);
        }
        Ok(Cache { path: path.to_path_buf(), entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, m: i64, p: u64, kind: &str, method: &str) -> Option<&FieldRecord> {
        self.entries.get(&(m, p, kind.to_string(), method.to_string()))
    }

    /// Appends records not yet stored, in the order given.
    pub fn append(&mut self, p: u64, kind: &str, method: &str, records: &[FieldRecord]) -> Result<usize> {
        let file = OpenOptions::new().append(true).open(&self.path)?;
        let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(file);
        let mut added = 0;
        for r in records {
            let key = (r.m, p, kind.to_string(), method.to_string());
            if self.entries.contains_key(&key) {
                continue;
            }
            let (m, ps) = (r.m.to_string(), p.to_string());
            wr.write_record([m.as_str(), &ps, kind, method, r.label.as_deref().unwrap_or(""), &r.method, &r.note])?;
            self.entries.insert(key, r.clone());
            added += 1;
        }
        wr.flush()?;
        Ok(added)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let dir = std::env::temp_dir().join(format!("tmod-cache-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.csv");
        let _ = std::fs::remove_file(&path);
        let recs = vec![
            FieldRecord { m: -17, label: Some("Z/8".into()), method: "rayclass".into(), note: String::new() },
            FieldRecord { m: -97, label: None, method: String::new(), note: "no stabilization, up to 3".into() },
        ];
        let mut c = Cache::open(&path).unwrap();
        assert_eq!(c.append(2, "structure", "auto-v1", &recs).unwrap(), 2);
        assert_eq!(c.append(2, "structure", "auto-v1", &recs).unwrap(), 0);
        let c = Cache::open(&path).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.get(-97, 2, "structure", "auto-v1"), Some(&recs[1]));
        assert_eq!(c.get(-17, 2, "structure", "auto-v1"), Some(&recs[0]));
        assert!(c.get(-17, 2, "structure", "rayclass-v1").is_none());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
