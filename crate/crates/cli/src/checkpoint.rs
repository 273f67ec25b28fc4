//! Chunked, resumable evaluation of per-replica values.
//!
//! Values are stored as `f64` bit patterns keyed by task name, together with
//! the hash of the config that produced them. A resumed run recomputes only
//! the missing replicas; since every replica has its own random stream the
//! result is identical to an uninterrupted run.

use std::collections::BTreeMap;
use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::HarnessError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
struct State {
    config_hash: String,
    tasks: BTreeMap<String, Vec<Vec<u64>>>,
}

#[derive(Debug)]
pub struct Checkpoint {
    path: Option<PathBuf>,
    state: State,
    chunk: usize,
    chunk_budget: Option<usize>,
}

impl Checkpoint {
    /// Keeps nothing on disk.
    pub fn in_memory(config_hash: &str, chunk: usize) -> Self {
        Checkpoint {
            path: None,
            state: State {
                config_hash: config_hash.to_string(),
                tasks: BTreeMap::new(),
            },
            chunk: chunk.max(1),
            chunk_budget: None,
        }
    }

    /// Loads `path` if it exists. A file written for a different config is an error.
    pub fn open(
        path: impl AsRef<Path>,
        config_hash: &str,
        chunk: usize,
    ) -> Result<Self, HarnessError> {
        let path = path.as_ref().to_path_buf();
        let mut cp = Checkpoint::in_memory(config_hash, chunk);
        if path.exists() {
            let state: State = serde_json::from_str(&fs::read_to_string(&path)?)?;
            if state.config_hash != config_hash {
                return Err(HarnessError::Checkpoint(format!(
                    "{} was written for config {}, not {config_hash}",
                    path.display(),
                    state.config_hash
                )));
            }
            cp.state = state;
        }
        cp.path = Some(path);
        Ok(cp)
    }

    /// Stops with [`HarnessError::Interrupted`] after computing `chunks` more chunks.
    pub fn with_chunk_budget(mut self, chunks: usize) -> Self {
        self.chunk_budget = Some(chunks);
        self
    }

    pub fn completed(&self, task: &str) -> usize {
        self.state.tasks.get(task).map_or(0, Vec::len)
    }

    fn save(&self) -> Result<(), HarnessError> {
        if let Some(path) = &self.path {
            let tmp = path.with_extension("tmp");
            fs::write(&tmp, serde_json::to_vec(&self.state)?)?;
            fs::rename(&tmp, path)?;
        }
        Ok(())
    }

    /// Rows for replicas `0..n` of `task`, computing missing ones chunk by chunk
    /// with `f` and saving after each chunk.
    pub fn rows<F>(&mut self, task: &str, n: usize, f: F) -> Result<Vec<Vec<f64>>, HarnessError>
    where
        F: Fn(Range<u64>) -> Result<Vec<Vec<f64>>, HarnessError>,
    {
        loop {
            let done = self.completed(task);
            if done >= n {
                break;
            }
            if self.chunk_budget == Some(0) {
                return Err(HarnessError::Interrupted {
                    task: task.to_string(),
                    completed: done,
                });
            }
            let end = (done + self.chunk).min(n);
            let fresh = f(done as u64..end as u64)?;
            let stored = self.state.tasks.entry(task.to_string()).or_default();
            stored.extend(
                fresh
                    .iter()
                    .map(|row| row.iter().map(|x| x.to_bits()).collect::<Vec<_>>()),
            );
            if let Some(budget) = &mut self.chunk_budget {
                *budget -= 1;
            }
            self.save()?;
        }
        Ok(self.state.tasks[task][..n]
            .iter()
            .map(|row| row.iter().map(|&b| f64::from_bits(b)).collect())
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_rows(range: Range<u64>) -> Result<Vec<Vec<f64>>, HarnessError> {
        Ok(range
            .map(|i| vec![(i * i) as f64, 0.1 * i as f64])
            .collect())
    }

    #[test]
    fn in_memory_rows() {
        let mut cp = Checkpoint::in_memory("h", 3);
        let rows = cp.rows("t", 7, square_rows).unwrap();
        assert_eq!(rows.len(), 7);
        assert_eq!(rows[6], vec![36.0, 0.1 * 6.0]);
    }

    #[test]
    fn resume_after_interruption() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cp.json");
        let mut cp = Checkpoint::open(&path, "h", 2)
            .unwrap()
            .with_chunk_budget(2);
        let err = cp.rows("t", 9, square_rows).unwrap_err();
        assert!(matches!(
            err,
            HarnessError::Interrupted { completed: 4, .. }
        ));
        let mut cp = Checkpoint::open(&path, "h", 2).unwrap();
        assert_eq!(cp.completed("t"), 4);
        let resumed = cp.rows("t", 9, square_rows).unwrap();
        let fresh = Checkpoint::in_memory("h", 100)
            .rows("t", 9, square_rows)
            .unwrap();
        assert_eq!(resumed, fresh);
        assert!(Checkpoint::open(&path, "other", 2).is_err());
    }
}
