use std::path::{Path, PathBuf};

use super::{load_instance, save_instance};
use crate::error::{Error, Result};
use crate::formulations::{CandidateSet, SubaddMode};
use crate::gcn::{build_graph, make_labels, parse_targets, serialize_targets, LabeledExample};
use crate::instance::{gen_instance, GenConfig, Instance};
use crate::strategies::solve_with_candidates;

/// Largest sizes labeled by exact solves.
pub const MAX_LABEL_N: usize = 6;
pub const MAX_LABEL_M: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct LabelDataset {
    pub dir: PathBuf,
    pub instance_files: Vec<PathBuf>,
    pub label_files: Vec<PathBuf>,
}

fn file_names(dir: &Path, i: usize) -> (PathBuf, PathBuf) {
    (
        dir.join(format!("instance_{i:05}.txt")),
        dir.join(format!("labels_{i:05}.txt")),
    )
}

/// Generates `count` instances with seeds `seed..seed + count`, solves each
/// exactly over every bundle and writes the instance and its labels to `dir`.
pub fn run_label_pipeline(
    count: usize,
    n: usize,
    m: usize,
    seed: u64,
    dir: &Path,
) -> Result<LabelDataset> {
    if n == 0 || m == 0 || n > MAX_LABEL_N || m > MAX_LABEL_M {
        return Err(Error::arg(format!(
            "exact labeling needs 1 <= n <= {MAX_LABEL_N} and 1 <= m <= {MAX_LABEL_M}, got n={n}, m={m}"
        )));
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let cands = CandidateSet::full(n);
    let mut out = LabelDataset {
        dir: dir.to_path_buf(),
        instance_files: Vec::with_capacity(count),
        label_files: Vec::with_capacity(count),
    };
    for i in 0..count {
        let inst = gen_instance(&GenConfig::with_seed(seed + i as u64), n, m)?;
        let sol = solve_with_candidates(&inst, &cands, SubaddMode::Full)?;
        if !sol.meta.proven_optimal {
            return Err(Error::Solver(format!(
                "instance {i} was not solved to optimality"
            )));
        }
        let example = make_labels(&inst, &sol)?;
        let (inst_path, label_path) = file_names(dir, i);
        save_instance(&inst, &inst_path)?;
        std::fs::write(&label_path, serialize_targets(&example.target))
            .map_err(|e| Error::io(&label_path, e))?;
        out.instance_files.push(inst_path);
        out.label_files.push(label_path);
    }
    Ok(out)
}

/// Reads back every `instance_*.txt` / `labels_*.txt` pair in `dir`.
pub fn load_labeled_dir(dir: &Path) -> Result<Vec<(Instance, LabeledExample)>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut ids = Vec::new();
    for entry in entries {
        let name = entry.map_err(|e| Error::io(dir, e))?.file_name();
        let name = name.to_string_lossy();
        if let Some(id) = name
            .strip_prefix("instance_")
            .and_then(|r| r.strip_suffix(".txt"))
            .and_then(|r| r.parse::<usize>().ok())
        {
            ids.push(id);
        }
    }
    ids.sort_unstable();
    ids.into_iter()
        .map(|i| {
            let (inst_path, label_path) = file_names(dir, i);
            let inst = load_instance(&inst_path)?;
            let text =
                std::fs::read_to_string(&label_path).map_err(|e| Error::io(&label_path, e))?;
            let example = LabeledExample::new(build_graph(&inst), parse_targets(&text)?)?;
            Ok((inst, example))
        })
        .collect()
}
