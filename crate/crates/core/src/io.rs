//! Artifacts on disk.
//!
//! A field is a JSON header (`n`, `m`, `l`, `s`, format, data file name) next
//! to a data file holding the samples in storage order, either as CSV with
//! shortest round-trip decimal floats or as raw little-endian `f64`. Both
//! round-trip bit-exactly. Every file is written to a temporary sibling and
//! renamed into place.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::coupled::{CoupledSolution, SolveDiagnostics};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::params::{ProblemParams, SystemParams};
use crate::scalar::ScalarGroundState;
use crate::thresholds::Regime;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldFormat {
    #[default]
    Csv,
    Bin,
}

impl FieldFormat {
    fn extension(self) -> &'static str {
        match self {
            FieldFormat::Csv => "csv",
            FieldFormat::Bin => "bin",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldHeader {
    pub n: usize,
    pub m: usize,
    pub l: f64,
    pub s: f64,
    pub format: FieldFormat,
    /// Data file, relative to the header's directory.
    pub data: String,
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

/// Writes `stem.json` and `stem.csv` / `stem.bin` into `dir`; returns the header path.
pub fn write_field(dir: &Path, stem: &str, field: &Field, s: f64, format: FieldFormat) -> Result<PathBuf> {
    let grid = field.grid();
    let data_name = format!("{stem}.{}", format.extension());
    let bytes = match format {
        FieldFormat::Csv => {
            let mut out = String::with_capacity(field.len() * 24);
            let names = ["x", "y", "z"];
            out.push_str(&names[..grid.n].join(","));
            out.push_str(",value\n");
            for (idx, v) in field.values().iter().enumerate() {
                let x = grid.coords(idx);
                for c in &x[..grid.n] {
                    out.push_str(&format!("{c},"));
                }
                out.push_str(&format!("{v}\n"));
            }
            out.into_bytes()
        }
        FieldFormat::Bin => field.values().iter().flat_map(|v| v.to_le_bytes()).collect(),
    };
    write_atomic(&dir.join(&data_name), &bytes)?;
    let header = FieldHeader { n: grid.n, m: grid.m, l: grid.l, s, format, data: data_name };
    let path = dir.join(format!("{stem}.json"));
    write_json(&path, &header)?;
    Ok(path)
}

/// Reads a field written by [`write_field`].
pub fn read_field(header_path: &Path) -> Result<(Field, FieldHeader)> {
    let header: FieldHeader = read_json(header_path)?;
    let grid = Grid::new(header.n, header.m, header.l)?;
    let data_path = header_path.parent().unwrap_or(Path::new(".")).join(&header.data);
    let values = match header.format {
        FieldFormat::Csv => {
            let text = fs::read_to_string(&data_path)?;
            let mut vals = Vec::with_capacity(grid.len());
            for (lineno, line) in text.lines().enumerate().skip(1) {
                let last = line.rsplit(',').next().unwrap_or("");
                let v: f64 = last
                    .trim()
                    .parse()
                    .map_err(|_| Error::Format(format!("{}:{}: bad value {last:?}", data_path.display(), lineno + 1)))?;
                vals.push(v);
            }
            vals
        }
        FieldFormat::Bin => {
            let bytes = fs::read(&data_path)?;
            if bytes.len() % 8 != 0 {
                return Err(Error::Format(format!("{}: truncated binary data", data_path.display())));
            }
            bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect()
        }
    };
    if values.len() != grid.len() {
        return Err(Error::Format(format!(
            "{}: {} samples, expected {}",
            data_path.display(),
            values.len(),
            grid.len()
        )));
    }
    Ok((Field::new(grid, values)?, header))
}

/// On-disk form of [`ScalarGroundState`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalarArtifact {
    pub params: ProblemParams,
    pub grid: Grid,
    pub c0: f64,
    pub c1: f64,
    pub copt: f64,
    pub kinetic: f64,
    pub residual_pde: f64,
    pub residual_pohozaev: f64,
    pub iterations: usize,
    pub tail_ratio: f64,
    pub peak_offset: f64,
    pub field: String,
}

pub const SCALAR_FILE: &str = "scalar_ground_state.json";
pub const COUPLED_FILE: &str = "coupled_solution.json";
pub const THRESHOLDS_FILE: &str = "thresholds.json";

pub fn save_scalar(dir: &Path, gs: &ScalarGroundState, format: FieldFormat) -> Result<PathBuf> {
    let header = write_field(dir, "w0", &gs.w0, gs.params.s, format)?;
    let art = ScalarArtifact {
        params: gs.params,
        grid: *gs.grid(),
        c0: gs.c0,
        c1: gs.c1,
        copt: gs.copt,
        kinetic: gs.kinetic,
        residual_pde: gs.residual_pde,
        residual_pohozaev: gs.residual_pohozaev,
        iterations: gs.iterations,
        tail_ratio: gs.tail_ratio,
        peak_offset: gs.peak_offset,
        field: file_name(&header),
    };
    let path = dir.join(SCALAR_FILE);
    write_json(&path, &art)?;
    Ok(path)
}

pub fn load_scalar(path: &Path) -> Result<ScalarGroundState> {
    let art: ScalarArtifact = read_json(path)?;
    art.params.validate()?;
    let (w0, _) = read_field(&sibling(path, &art.field))?;
    w0.grid().check_same(&art.grid).map_err(|_| Error::Format("field grid differs from artifact grid".into()))?;
    Ok(ScalarGroundState {
        params: art.params,
        w0,
        c0: art.c0,
        c1: art.c1,
        copt: art.copt,
        kinetic: art.kinetic,
        residual_pde: art.residual_pde,
        residual_pohozaev: art.residual_pohozaev,
        iterations: art.iterations,
        tail_ratio: art.tail_ratio,
        peak_offset: art.peak_offset,
    })
}

/// On-disk form of [`CoupledSolution`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoupledArtifact {
    pub sys: SystemParams,
    pub lambda1: f64,
    pub lambda2: f64,
    pub energy: f64,
    pub g_defect: f64,
    pub el_residual: f64,
    pub regime: Regime,
    pub diagnostics: SolveDiagnostics,
    pub u: String,
    pub v: String,
}

pub fn save_coupled(dir: &Path, sol: &CoupledSolution, format: FieldFormat) -> Result<PathBuf> {
    let s = sol.sys.problem.s;
    let hu = write_field(dir, "u", &sol.u, s, format)?;
    let hv = write_field(dir, "v", &sol.v, s, format)?;
    let art = CoupledArtifact {
        sys: sol.sys,
        lambda1: sol.lambda1,
        lambda2: sol.lambda2,
        energy: sol.energy,
        g_defect: sol.g_defect,
        el_residual: sol.el_residual,
        regime: sol.regime,
        diagnostics: sol.diagnostics.clone(),
        u: file_name(&hu),
        v: file_name(&hv),
    };
    let path = dir.join(COUPLED_FILE);
    write_json(&path, &art)?;
    Ok(path)
}

pub fn load_coupled(path: &Path) -> Result<CoupledSolution> {
    let art: CoupledArtifact = read_json(path)?;
    art.sys.validate()?;
    let (u, _) = read_field(&sibling(path, &art.u))?;
    let (v, _) = read_field(&sibling(path, &art.v))?;
    u.grid().check_same(v.grid())?;
    Ok(CoupledSolution {
        sys: art.sys,
        u,
        v,
        lambda1: art.lambda1,
        lambda2: art.lambda2,
        energy: art.energy,
        g_defect: art.g_defect,
        el_residual: art.el_residual,
        regime: art.regime,
        diagnostics: art.diagnostics,
    })
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

fn sibling(path: &Path, name: &str) -> PathBuf {
    path.parent().unwrap_or(Path::new(".")).join(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field() -> Field {
        let g = Grid::new(2, 16, 7.3).unwrap();
        Field::from_fn(g, |x| (0.3 + x[0]).sin() * (-x[1] * x[1]).exp() / 3.0).unwrap()
    }

    #[test]
    fn csv_and_binary_round_trip_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let f = field();
        for fmt in [FieldFormat::Csv, FieldFormat::Bin] {
            let stem = format!("f_{}", fmt.extension());
            let h = write_field(dir.path(), &stem, &f, 0.45, fmt).unwrap();
            let (g, header) = read_field(&h).unwrap();
            assert_eq!(header.s, 0.45);
            assert_eq!(g.grid(), f.grid());
            for (a, b) in g.values().iter().zip(f.values()) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn truncated_data_is_a_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let h = write_field(dir.path(), "f", &field(), 0.5, FieldFormat::Bin).unwrap();
        let data = dir.path().join("f.bin");
        let bytes = fs::read(&data).unwrap();
        fs::write(&data, &bytes[..bytes.len() - 8]).unwrap();
        assert!(matches!(read_field(&h), Err(Error::Format(_))));
    }

    #[test]
    fn missing_header_is_io() {
        let err = read_field(Path::new("/nonexistent/x.json")).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }
}
