//! Output framing: every artifact starts with (CSV) or embeds (JSON) a
//! provenance record of tool version, configuration hash and seed.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_sha256: String,
    pub seed: u64,
}

impl Provenance {
    /// `config` should hold every input that affects the numbers: options
    /// and the contents of referenced files, but not the thread count.
    pub fn new(command: &str, config: &serde_json::Value, seed: u64) -> Self {
        let canonical = serde_json::to_vec(config).expect("config serializes");
        Provenance {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config_sha256: sha256_hex(&canonical),
            seed,
        }
    }

    pub fn header_line(&self) -> String {
        format!("# {}\n", serde_json::to_string(self).expect("provenance serializes"))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// A CSV artifact after its provenance line has been split off.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvArtifact {
    pub provenance: Provenance,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub fn frame_csv(p: &Provenance, body: &[u8]) -> Vec<u8> {
    let mut out = p.header_line().into_bytes();
    out.extend_from_slice(body);
    out
}

pub fn frame_json<T: Serialize>(p: &Provenance, result: &T) -> Vec<u8> {
    let v = serde_json::json!({ "provenance": p, "result": result });
    let mut out = serde_json::to_vec_pretty(&v).expect("result serializes");
    out.push(b'\n');
    out
}

pub fn parse_csv_artifact(text: &str) -> CliResult<CsvArtifact> {
    let (first, body) = text.split_once('\n').ok_or_else(|| CliError::config("artifact has no body"))?;
    let json = first.strip_prefix("# ").ok_or_else(|| CliError::config("missing provenance line"))?;
    let provenance: Provenance = serde_json::from_str(json).map_err(|e| CliError::config(format!("provenance: {e}")))?;
    let mut rdr = csv::ReaderBuilder::new().from_reader(body.as_bytes());
    let header = rdr.headers().map_err(|e| CliError::config(e.to_string()))?.iter().map(str::to_string).collect();
    let rows = rdr
        .records()
        .map(|r| r.map(|r| r.iter().map(str::to_string).collect()).map_err(|e| CliError::config(e.to_string())))
        .collect::<CliResult<_>>()?;
    Ok(CsvArtifact { provenance, header, rows })
}

pub fn parse_json_artifact(text: &str) -> CliResult<(Provenance, serde_json::Value)> {
    #[derive(Deserialize)]
    struct Framed {
        provenance: Provenance,
        result: serde_json::Value,
    }
    let f: Framed = serde_json::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
    Ok((f.provenance, f.result))
}
