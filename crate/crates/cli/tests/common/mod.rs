#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mvcon::csvio;
use mvcon_core::{make_synthetic_multiview, SyntheticConfig};

/// Write a synthetic shared-latent dataset and its manifest into `dir`.
pub fn synthetic_manifest(dir: &Path, n_per_class: usize, seed: u64) -> PathBuf {
    let ds = make_synthetic_multiview(&SyntheticConfig::new(n_per_class, 3, 3, vec![6, 5, 4], 0.4, seed)).unwrap();
    let mut views = Vec::new();
    for (v, x) in ds.views.iter().enumerate() {
        let name = format!("view{v}.csv");
        fs::write(dir.join(&name), csvio::matrix_bytes(&x.transpose())).unwrap();
        views.push(serde_json::json!({ "name": format!("v{v}"), "path": name, "kernel": { "type": "rbf" } }));
    }
    let labels: String = ds.labels.iter().map(|l| format!("{}\n", l * 10 + 1)).collect();
    fs::write(dir.join("labels.txt"), labels).unwrap();
    let manifest = serde_json::json!({
        "format_version": 1,
        "name": "synthetic",
        "views": views,
        "labels": "labels.txt",
    });
    let path = dir.join("manifest.json");
    fs::write(&path, serde_json::to_vec_pretty(&manifest).unwrap()).unwrap();
    path
}

pub fn mvcon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mvcon")).args(args).output().unwrap()
}

pub fn mvcon_ok(args: &[&str]) {
    let out = mvcon(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Every file below `dir`, as (relative path, bytes), sorted by path.
pub fn tree(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            for (rel, bytes) in tree(&path) {
                out.push((Path::new(path.file_name().unwrap()).join(rel), bytes));
            }
        } else {
            out.push((PathBuf::from(path.file_name().unwrap()), fs::read(&path).unwrap()));
        }
    }
    out.sort();
    out
}

/// Data rows of a CSV file with a header.
pub fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut reader = csv::Reader::from_path(path).unwrap();
    reader
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}
