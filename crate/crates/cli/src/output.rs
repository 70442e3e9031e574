//! Report directory: JSON reports, CSV fields, an iteration log and a
//! timestamp sidecar.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;

pub struct Output {
    dir: PathBuf,
    log: BufWriter<File>,
    started: f64,
}

fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let log = File::create(dir.join("log.jsonl")).context("creating log.jsonl")?;
        Ok(Self { dir: dir.to_path_buf(), log: BufWriter::new(log), started: unix_now() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn json(&self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(self.path(name), text).with_context(|| format!("writing {name}"))
    }

    pub fn csv(&self, name: &str, write: impl FnOnce(&mut BufWriter<File>) -> pnex::Result<()>) -> Result<()> {
        let mut f = BufWriter::new(File::create(self.path(name)).with_context(|| format!("creating {name}"))?);
        write(&mut f).with_context(|| format!("writing {name}"))?;
        f.flush()?;
        Ok(())
    }

    /// One JSON object per line.
    pub fn log(&mut self, entry: &impl Serialize) -> Result<()> {
        serde_json::to_writer(&mut self.log, entry)?;
        self.log.write_all(b"\n")?;
        Ok(())
    }

    /// Flush the log and write the timing sidecar, the only
    /// non-deterministic file of a run.
    pub fn finish(mut self, command: &str, exit_code: u8) -> Result<()> {
        self.log.flush()?;
        self.json(
            "run.timestamp.json",
            &serde_json::json!({
                "command": command,
                "version": env!("CARGO_PKG_VERSION"),
                "started_unix": self.started,
                "finished_unix": unix_now(),
                "exit_code": exit_code,
            }),
        )
    }
}
