use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{emit_report, Envelope, RunConfig};
use crate::error::{Error, Result};
use crate::matrix::{eig_sym, read_matrix_file, write_matrix_file};
use crate::utility::Projector;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcaSummary {
    pub d: usize,
    pub k: usize,
    /// All eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    pub reconstruction_residual: f64,
    pub orthogonality_residual: f64,
    /// `‖P² − P‖_F` of the projector as re-read from `projector.mat`.
    pub projector_idempotence_residual: f64,
    pub projector_trace: f64,
}

fn join(values: impl Iterator<Item = f64>) -> String {
    values.map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

/// Writes into `out_dir`:
/// - `eigenvalues.txt`: the top `k` eigenvalues, descending, on one line;
/// - `components.txt`: `d` lines of `k` entries, the columns of `V_k`;
/// - `projector.mat`: `V_k V_kᵀ` in the matrix text format;
/// - `pca.json`: a [`PcaSummary`].
pub fn run_pca(config: &RunConfig, input: &Path, k: usize, out_dir: &Path) -> Result<PcaSummary> {
    let a = read_matrix_file(input)?;
    let d = a.dim();
    if k == 0 || k > d {
        return Err(Error::param("k", format!("must be in 1..={d}, got {k}")));
    }
    let e = eig_sym(&a)?;
    let projector = Projector::from_decomposition(&e, k)?;

    std::fs::create_dir_all(out_dir)?;
    let mut eigen_line = join(e.eigenvalues()[..k].iter().copied());
    eigen_line.push('\n');
    std::fs::write(out_dir.join("eigenvalues.txt"), eigen_line)?;

    let v = e.eigenvectors();
    let mut components = String::new();
    for i in 0..d {
        writeln!(components, "{}", join((0..k).map(|j| v.get(i, j)))).expect("string write");
    }
    std::fs::write(out_dir.join("components.txt"), components)?;

    let projector_path = out_dir.join("projector.mat");
    write_matrix_file(&projector_path, projector.matrix())?;
    let reloaded = Projector::from_matrix(read_matrix_file(&projector_path)?)?;

    let summary = PcaSummary {
        d,
        k,
        eigenvalues: e.eigenvalues().to_vec(),
        reconstruction_residual: e.reconstruction_residual(&a),
        orthogonality_residual: e.orthogonality_residual(),
        projector_idempotence_residual: reloaded.idempotence_residual(),
        projector_trace: reloaded.trace(),
    };
    emit_report(
        &Envelope::new(config, &summary),
        Some(&out_dir.join("pca.json")),
    )?;
    Ok(summary)
}
