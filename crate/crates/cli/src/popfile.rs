//! Popularity input: either `--uniform N` or a JSON file of the form
//! `{"probabilities": ["1/10", 0.2, ...]}` / `{"uniform": n}`. Number
//! literals keep their decimal text, so the exact backend reads them as
//! fractions over powers of ten rather than rounded binary values.

use std::fs;
use std::path::{Path, PathBuf};

use ccp_core::popularity::Popularity;
use ccp_core::Scalar;
use serde::Deserialize;
use serde_json::Value;

use crate::CliError;

#[derive(clap::Args, Debug)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Popularity JSON file: {"probabilities": [...]} or {"uniform": n}
    #[arg(long, value_name = "FILE")]
    pub popularity: Option<PathBuf>,
    /// Uniform popularity over N items
    #[arg(long, value_name = "N")]
    pub uniform: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PopularityFile {
    #[serde(default)]
    uniform: Option<u64>,
    #[serde(default)]
    probabilities: Option<Vec<Value>>,
}

pub fn load_popularity<S: Scalar>(
    source: &Source,
    renormalize: bool,
) -> Result<Popularity<S>, CliError> {
    if let Some(n) = source.uniform {
        return Ok(Popularity::uniform(to_usize(n)?)?);
    }
    let path = source
        .popularity
        .as_ref()
        .expect("clap enforces one source");
    load_from_file(path, renormalize)
}

fn load_from_file<S: Scalar>(path: &Path, renormalize: bool) -> Result<Popularity<S>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let file: PopularityFile = serde_json::from_str(&text).map_err(|e| CliError::Json {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    match (file.uniform, file.probabilities) {
        (Some(n), None) => Ok(Popularity::uniform(to_usize(n)?)?),
        (None, Some(entries)) => {
            let values = entries
                .iter()
                .map(parse_entry::<S>)
                .collect::<Result<Vec<S>, CliError>>()?;
            let pop = if renormalize {
                Popularity::from_values_renormalized(values)?
            } else {
                Popularity::from_values(values)?
            };
            Ok(pop)
        }
        _ => Err(CliError::Usage(
            "popularity file must contain exactly one of \"uniform\" or \"probabilities\""
                .to_owned(),
        )),
    }
}

fn parse_entry<S: Scalar>(value: &Value) -> Result<S, CliError> {
    let text = match value {
        Value::String(s) => s.clone(),
        // arbitrary-precision numbers keep the literal digits from the file
        Value::Number(n) => n.to_string(),
        other => {
            return Err(CliError::Usage(format!(
                "probabilities must be numbers or strings, found {other}"
            )))
        }
    };
    Ok(S::parse(&text)?)
}

pub fn to_usize(v: u64) -> Result<usize, CliError> {
    usize::try_from(v).map_err(|_| CliError::Usage(format!("value {v} is out of range")))
}
