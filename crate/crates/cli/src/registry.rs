//! Name resolution for platforms, matrices and dense sizes.

use std::fs;
use std::path::Path;

use ice_core::complexity::{
    builtin_matrix_catalog, find_matrix, parse_matrix_csv, DenseInput, Input, NamedMatrix,
};
use ice_core::platform::{builtin_catalog, find_platform, parse_catalog_toml, PlatformProfile};
use ice_core::IceError;

use crate::CliError;

/// Built-in catalogs plus anything loaded from user files.
#[derive(Debug, Clone)]
pub struct Registry {
    pub platforms: Vec<PlatformProfile>,
    pub matrices: Vec<NamedMatrix>,
}

/// A resolved input with the label it is reported under.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedInput {
    pub name: String,
    pub input: Input,
}

impl Registry {
    pub fn builtin() -> Self {
        Registry {
            platforms: builtin_catalog(),
            matrices: builtin_matrix_catalog(),
        }
    }

    pub fn load(
        platforms_file: Option<&Path>,
        matrices_file: Option<&Path>,
    ) -> Result<Self, CliError> {
        let mut reg = Self::builtin();
        if let Some(path) = platforms_file {
            let text = read(path)?;
            let extra = parse_catalog_toml(&text).map_err(|e| CliError::file(path, e))?;
            reg.platforms.extend(extra);
        }
        if let Some(path) = matrices_file {
            let text = read(path)?;
            let extra = parse_matrix_csv(&text).map_err(|e| CliError::file(path, e))?;
            reg.matrices.extend(extra);
        }
        Ok(reg)
    }

    pub fn platform(&self, name: &str) -> Result<&PlatformProfile, CliError> {
        Ok(find_platform(&self.platforms, name)?)
    }

    /// A matrix name, or a dense size written `N` (square) or `NxMxP`.
    pub fn input(&self, name: &str) -> Result<NamedInput, CliError> {
        if let Some(dense) = parse_dense(name)? {
            return Ok(NamedInput {
                name: dense.to_string(),
                input: Input::Dense(dense),
            });
        }
        let m = find_matrix(&self.matrices, name)?;
        Ok(NamedInput {
            name: m.name.clone(),
            input: Input::Sparse(m.input),
        })
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn parse_dense(s: &str) -> Result<Option<DenseInput>, CliError> {
    let parts: Vec<&str> = s.split(['x', 'X']).collect();
    if !parts
        .iter()
        .all(|p| !p.is_empty() && p.chars().all(|c| c.is_ascii_digit()))
    {
        return Ok(None);
    }
    let dims: Vec<u64> = parts
        .iter()
        .map(|p| p.parse::<u64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Usage(format!("bad dense size `{s}`: {e}")))?;
    let dense = match dims.as_slice() {
        [n] => DenseInput::square(*n),
        [n, m, p] => DenseInput::new(*n, *m, *p),
        _ => {
            return Err(CliError::Usage(format!(
                "dense size `{s}` must be N or NxMxP"
            )))
        }
    };
    dense.map(Some).map_err(CliError::from)
}

impl From<IceError> for CliError {
    fn from(e: IceError) -> Self {
        CliError::Model(e)
    }
}
