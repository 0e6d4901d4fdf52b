//! Preference matrix exports.
//!
//! Binary layout: magic `PNPPREFS`, `u32` version, `u64` users, `u64`
//! features, `f64` alpha, beta, gamma, delta, 32-byte dataset hash, then the
//! scores row-major as little-endian `f64`.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use pnp_core::graph::Graph;
use pnp_core::walks::PreferenceMatrix;

use crate::error::{CliError, Result};
use crate::tsv::Table;

const MAGIC: &[u8; 8] = b"PNPPREFS";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 16 + 32 + 32;

#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceHeader {
    pub users: usize,
    pub features: usize,
    pub weights: [f64; 3],
    pub delta: f64,
    pub dataset_hash: [u8; 32],
}

pub fn write_binary(w: &PreferenceMatrix, path: &Path) -> Result<()> {
    let io = |e| CliError::io(path, e);
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    let p = w.provenance();
    let mut head = Vec::with_capacity(HEADER_LEN);
    head.extend_from_slice(MAGIC);
    head.extend_from_slice(&VERSION.to_le_bytes());
    head.extend_from_slice(&(w.num_users() as u64).to_le_bytes());
    head.extend_from_slice(&(w.num_features() as u64).to_le_bytes());
    for x in [p.weights.alpha(), p.weights.beta(), p.weights.gamma(), p.delta] {
        head.extend_from_slice(&x.to_le_bytes());
    }
    head.extend_from_slice(&p.dataset_hash);
    out.write_all(&head).map_err(io)?;
    for &x in w.scores().as_slice() {
        out.write_all(&x.to_le_bytes()).map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn read_binary(path: &Path) -> Result<(PreferenceHeader, Vec<f64>)> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| CliError::io(path, e))?;
    let bad = |m: &str| CliError::format(path, m);
    if bytes.len() < HEADER_LEN || &bytes[..8] != MAGIC {
        return Err(bad("not a preference export"));
    }
    if u32::from_le_bytes(bytes[8..12].try_into().unwrap()) != VERSION {
        return Err(bad("unsupported preference export version"));
    }
    let word = |i: usize| u64::from_le_bytes(bytes[12 + 8 * i..20 + 8 * i].try_into().unwrap());
    let (users, features) = (word(0) as usize, word(1) as usize);
    let [alpha, beta, gamma, delta] = [2, 3, 4, 5].map(|i| f64::from_bits(word(i)));
    let dataset_hash: [u8; 32] = bytes[60..92].try_into().unwrap();
    let body = &bytes[HEADER_LEN..];
    if Some(body.len()) != users.checked_mul(features).and_then(|n| n.checked_mul(8)) {
        return Err(bad("score block length does not match the header"));
    }
    let data = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Ok((PreferenceHeader { users, features, weights: [alpha, beta, gamma], delta, dataset_hash }, data))
}

/// `user_id, feature_id, score` for entries with `|score| > threshold`.
pub fn write_tsv(w: &PreferenceMatrix, graph: &Graph, threshold: f64, path: &Path) -> Result<usize> {
    let mut t = Table::create(path, &["user_id", "feature_id", "score"])?;
    let mut rows = 0;
    for u in 0..w.num_users() {
        for (k, &s) in w.row(u).iter().enumerate() {
            if s != 0.0 && s.abs() > threshold {
                t.row(&[&graph.users().id_of(u), &graph.features().id_of(k), &s])?;
                rows += 1;
            }
        }
    }
    t.finish()?;
    Ok(rows)
}
