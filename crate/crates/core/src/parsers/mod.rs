//! Network file formats and summary statistics.

mod bif;
mod native;

use std::fs::File;
use std::io::Read;
use std::path::Path;

use flate2::read::GzDecoder;

pub use bif::{parse_bif, parse_bif_document, write_bif, BifDocument, ROW_RENORMALIZE_WINDOW};
pub use native::{parse_native, serialize_native, serialize_native_with_comments};
pub(crate) use native::{parse_num, strip_comment, words, write_values};

use crate::error::Result;
use crate::model::BayesianNetwork;

/// Node, edge and parameter counts of a network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkStats {
    pub node_count: usize,
    pub edge_count: usize,
    /// Total CPT entries.
    pub parameter_count: usize,
    /// `2 * edges / nodes`.
    pub avg_degree: f64,
}

pub fn network_stats(net: &BayesianNetwork) -> NetworkStats {
    let node_count = net.len();
    let edge_count = net.edges().len();
    NetworkStats {
        node_count,
        edge_count,
        parameter_count: net.parameter_count(),
        avg_degree: 2.0 * edge_count as f64 / node_count as f64,
    }
}

/// Reads a file as text, gunzipping when the name ends in `.gz`.
pub fn read_text(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    let mut text = String::new();
    let file = File::open(path)?;
    if path.extension().is_some_and(|e| e == "gz") {
        GzDecoder::new(file).read_to_string(&mut text)?;
    } else {
        let mut file = file;
        file.read_to_string(&mut text)?;
    }
    Ok(text)
}

/// Loads a network, choosing the format by extension: `.bif` (optionally
/// `.bif.gz`) is BIF, anything else is the native format.
pub fn read_network(path: impl AsRef<Path>) -> Result<BayesianNetwork> {
    Ok(read_document(path)?.network)
}

/// Loads a network together with its name and BIF properties.
pub fn read_document(path: impl AsRef<Path>) -> Result<BifDocument> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .map(|n| n.split('.').next().unwrap_or(n).to_string())
        .unwrap_or_default();
    let stem = path.to_string_lossy();
    let stem = stem.strip_suffix(".gz").unwrap_or(&stem);
    if stem.ends_with(".bif") {
        parse_bif_document(&text)
    } else {
        Ok(BifDocument { name, network: parse_native(&text)?, properties: Vec::new() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Factor;
    use crate::model::Variable;

    #[test]
    fn isolated_node_stats() {
        let net = BayesianNetwork::new(
            vec![Variable::with_cardinality(0, "X", 3)],
            vec![vec![]],
            vec![Factor::new(vec![0], vec![3], vec![0.2, 0.3, 0.5]).unwrap()],
        )
        .unwrap();
        let s = network_stats(&net);
        assert_eq!((s.node_count, s.edge_count, s.parameter_count), (1, 0, 3));
        assert_eq!(s.avg_degree, 0.0);
    }

    #[test]
    fn survey_stats() {
        let s = network_stats(&crate::model::fixtures::survey());
        assert_eq!((s.node_count, s.edge_count), (6, 6));
        assert!((s.avg_degree - 2.0).abs() < 1e-9);
    }
}
