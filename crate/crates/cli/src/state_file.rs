//! JSON documents read and written by the command line.
//!
//! A state file is `{"name"?: str, "dims": [int], "amps": [[re, im], …]}`
//! with amplitudes row-major, last party fastest. Floats are written in the
//! shortest form that parses back to the same `f64`.

use std::fs;
use std::path::{Path, PathBuf};

use multischmidt::{BasisSet, Complex64, SchmidtDecomposition, State};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub dims: Vec<usize>,
    pub amps: Vec<[f64; 2]>,
}

impl StateFile {
    pub fn from_state(state: &State, name: Option<String>) -> Self {
        Self { name, dims: state.dims().to_vec(), amps: encode(state.amps()) }
    }

    pub fn to_state(&self) -> Result<State, CliError> {
        if self.amps.iter().flatten().any(|v| !v.is_finite()) {
            return Err(CliError::Input("amplitudes must be finite".into()));
        }
        Ok(State::new(self.dims.clone(), decode(&self.amps))?)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        read_json(path)
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        write_json(path, self)
    }
}

/// One orthonormal basis per party: `{"bases": [[[re, im], …], …]}` where
/// `bases[j][i]` is the `i`-th vector of party `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisFile {
    pub bases: Vec<Vec<Vec<[f64; 2]>>>,
}

impl BasisFile {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        read_json(path)
    }

    pub fn to_bases(&self) -> Result<Vec<BasisSet>, CliError> {
        self.bases
            .iter()
            .map(|vectors| Ok(BasisSet::new(vectors.iter().map(|v| decode(v)).collect())?))
            .collect()
    }
}

/// Ground truth written next to a generated state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthFile {
    pub dims: Vec<usize>,
    pub lambdas: Vec<f64>,
    /// `vectors[j][i]` is the vector of party `j` in term `i`.
    pub vectors: Vec<Vec<Vec<[f64; 2]>>>,
    pub seed: u64,
}

impl TruthFile {
    pub fn from_decomposition(d: &SchmidtDecomposition, seed: u64) -> Self {
        Self {
            dims: d.dims().to_vec(),
            lambdas: d.coefficients().to_vec(),
            vectors: encode_vectors(d),
            seed,
        }
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        read_json(path)
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        write_json(path, self)
    }

    /// `dir/stem.json` → `dir/stem.truth.json`.
    pub fn sidecar_path(state_path: &Path) -> PathBuf {
        let stem = state_path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        state_path.with_file_name(format!("{stem}.truth.json"))
    }
}

pub fn encode(amps: &[Complex64]) -> Vec<[f64; 2]> {
    amps.iter().map(|z| [z.re, z.im]).collect()
}

pub fn decode(pairs: &[[f64; 2]]) -> Vec<Complex64> {
    pairs.iter().map(|&[re, im]| Complex64::new(re, im)).collect()
}

pub fn encode_vectors(d: &SchmidtDecomposition) -> Vec<Vec<Vec<[f64; 2]>>> {
    (0..d.n_parties()).map(|j| d.party_vectors(j).iter().map(|v| encode(v)).collect()).collect()
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })?;
    serde_json::from_str(&text).map_err(|source| CliError::Parse { path: path.to_owned(), source })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    fs::write(path, text).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rejects() {
        let ok: StateFile = serde_json::from_str(r#"{"dims":[2],"amps":[[1,0],[0,-0.5]]}"#).unwrap();
        assert_eq!(ok.to_state().unwrap().amps()[1], Complex64::new(0.0, -0.5));
        let short: StateFile = serde_json::from_str(r#"{"dims":[2,2],"amps":[[1,0]]}"#).unwrap();
        assert!(short.to_state().is_err());
        assert!(serde_json::from_str::<StateFile>(r#"{"dims":[2],"amps":[[1,0],[0]]}"#).is_err());
        assert!(serde_json::from_str::<StateFile>(r#"{"dims":[2],"amps":[[1,0],[0,0]],"extra":1}"#).is_err());
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(TruthFile::sidecar_path(Path::new("/tmp/a/ghz.json")), Path::new("/tmp/a/ghz.truth.json"));
    }
}
