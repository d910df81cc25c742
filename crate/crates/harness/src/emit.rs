//! Output files and the JSON manifest that describes them.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, Format};
use crate::error::{HarnessError, Result};
use crate::table::Table;

pub const MANIFEST_NAME: &str = "manifest.json";
/// Canonical copy of the table; `report` re-emits from it.
pub const ROWS_NAME: &str = "rows.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub harness: String,
    pub core: String,
    pub scheme: String,
}

impl Versions {
    pub fn current(cfg: &ExperimentConfig) -> Versions {
        Versions {
            harness: env!("CARGO_PKG_VERSION").to_string(),
            core: phasefield_core::VERSION.to_string(),
            scheme: format!(
                "lie-split {:?} ssp-rk3 transport + stabilized linear implicit cahn-hilliard",
                cfg.stepping.scheme
            )
            .to_lowercase(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub table: String,
    pub format: Format,
    pub config: ExperimentConfig,
    pub versions: Versions,
    pub files: Vec<FileEntry>,
    pub wall_clock_s: f64,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Manifest> {
        let path = dir.join(MANIFEST_NAME);
        let text = std::fs::read_to_string(&path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| HarnessError::Parse(format!("{}: {e}", path.display())))
    }

    pub fn file(&self, name: &str) -> Option<&FileEntry> {
        self.files.iter().find(|f| f.name == name)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write(dir: &Path, name: &str, bytes: &[u8], files: &mut Vec<FileEntry>) -> Result<()> {
    std::fs::write(dir.join(name), bytes).map_err(|e| HarnessError::Io(format!("{}: {e}", dir.join(name).display())))?;
    files.push(FileEntry { name: name.to_string(), sha256: sha256_hex(bytes), bytes: bytes.len() as u64 });
    Ok(())
}

pub fn table_bytes(table: &Table, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    }
}

pub fn table_file_name(stem: &str, format: Format) -> String {
    match format {
        Format::Csv => format!("{stem}.csv"),
        Format::Json => format!("{stem}.json"),
    }
}

/// Everything one command writes: a table, an optional JSON summary and the
/// manifest.
pub struct Emission<'a> {
    pub command: &'a str,
    pub table_stem: &'a str,
    pub table: &'a Table,
    pub summary: Option<serde_json::Value>,
    pub wall_clock_s: f64,
}

pub fn emit(cfg: &ExperimentConfig, out: &Emission<'_>, dir: &Path) -> Result<Manifest> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::Io(format!("{}: {e}", dir.display())))?;
    let mut files = Vec::new();
    let name = table_file_name(out.table_stem, cfg.format);
    write(dir, &name, &table_bytes(out.table, cfg.format)?, &mut files)?;
    let rows = serde_json::to_vec(out.table).map_err(|e| HarnessError::Io(e.to_string()))?;
    write(dir, ROWS_NAME, &rows, &mut files)?;
    if let Some(summary) = &out.summary {
        let mut bytes = serde_json::to_vec_pretty(summary).map_err(|e| HarnessError::Io(e.to_string()))?;
        bytes.push(b'\n');
        write(dir, "summary.json", &bytes, &mut files)?;
    }
    let manifest = Manifest {
        command: out.command.to_string(),
        table: out.table_stem.to_string(),
        format: cfg.format,
        config: cfg.clone(),
        versions: Versions::current(cfg),
        files,
        wall_clock_s: out.wall_clock_s,
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest).map_err(|e| HarnessError::Io(e.to_string()))?;
    bytes.push(b'\n');
    std::fs::write(dir.join(MANIFEST_NAME), bytes)?;
    Ok(manifest)
}

/// Re-emits the stored table of the manifest in `dir` as `format` into
/// `out`, after checking the stored rows against their checksum.
pub fn report(dir: &Path, format: Format, out: &Path) -> Result<std::path::PathBuf> {
    let manifest = Manifest::load(dir)?;
    let entry = manifest
        .file(ROWS_NAME)
        .ok_or_else(|| HarnessError::Check(format!("manifest lists no {ROWS_NAME}")))?;
    let rows = std::fs::read(dir.join(ROWS_NAME))?;
    if sha256_hex(&rows) != entry.sha256 {
        return Err(HarnessError::Check(format!("{ROWS_NAME} does not match its manifest checksum")));
    }
    let table: Table = serde_json::from_slice(&rows).map_err(|e| HarnessError::Parse(e.to_string()))?;
    std::fs::create_dir_all(out)?;
    let path = out.join(table_file_name(&manifest.table, format));
    std::fs::write(&path, table_bytes(&table, format)?)?;
    Ok(path)
}
