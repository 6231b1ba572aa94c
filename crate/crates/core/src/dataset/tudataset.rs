//! Reader and writer for the TUDataset text layout.
//!
//! A dataset named `DS` in directory `root` consists of:
//!   DS_A.txt               edge list "i, j" with 1-indexed global node ids
//!   DS_graph_indicator.txt line per node: owning graph id (1-indexed)
//!   DS_graph_labels.txt    line per graph: integer class label
//!   DS_node_labels.txt     optional, line per node: integer label (one-hot
//!                          encoded over the labels present in the dataset)
//!   DS_node_attributes.txt optional, line per node: comma-separated reals
//!
//! Node labels one-hot encode first, raw attributes concatenate after. With
//! neither file, features are a single all-ones column.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::mat::Mat;
use std::fmt::Write as _;
use std::path::Path;

fn read_lines(path: &Path) -> Result<Vec<String>> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let text = std::fs::read_to_string(path)?;
    Ok(text
        .lines()
        .map(|l| l.trim().to_string())
        .filter(|l| !l.is_empty())
        .collect())
}

fn format_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Format {
        file: path.display().to_string(),
        line,
        message: message.into(),
    }
}

fn parse_int(path: &Path, line_no: usize, s: &str) -> Result<i64> {
    s.trim()
        .parse::<i64>()
        .map_err(|_| format_err(path, line_no, format!("expected an integer, got {s:?}")))
}

pub fn parse_tudataset(root: &Path, name: &str) -> Result<Vec<Graph>> {
    let file = |suffix: &str| root.join(format!("{name}_{suffix}.txt"));

    let indicator_path = file("graph_indicator");
    let indicator = read_lines(&indicator_path)?;
    let num_nodes = indicator.len();
    let mut graph_of_node = Vec::with_capacity(num_nodes);
    let mut num_graphs = 0usize;
    for (idx, line) in indicator.iter().enumerate() {
        let gid = parse_int(&indicator_path, idx + 1, line)?;
        if gid < 1 {
            return Err(format_err(&indicator_path, idx + 1, "graph ids are 1-indexed"));
        }
        let gid = gid as usize - 1;
        num_graphs = num_graphs.max(gid + 1);
        graph_of_node.push(gid);
    }
    if num_nodes == 0 {
        return Err(format_err(&indicator_path, 1, "dataset has no nodes"));
    }

    let labels_path = file("graph_labels");
    let label_lines = read_lines(&labels_path)?;
    if label_lines.len() != num_graphs {
        return Err(format_err(
            &labels_path,
            label_lines.len().max(1),
            format!(
                "expected {num_graphs} graph labels (from the indicator file), found {}",
                label_lines.len()
            ),
        ));
    }
    let mut class_labels = Vec::with_capacity(num_graphs);
    for (idx, line) in label_lines.iter().enumerate() {
        class_labels.push(parse_int(&labels_path, idx + 1, line)?);
    }

    // Local node index within its graph, in global-id order.
    let mut graph_sizes = vec![0usize; num_graphs];
    let mut local_index = Vec::with_capacity(num_nodes);
    for &gid in &graph_of_node {
        local_index.push(graph_sizes[gid]);
        graph_sizes[gid] += 1;
    }
    if graph_sizes.iter().any(|&s| s == 0) {
        return Err(format_err(&indicator_path, 1, "a graph id has no nodes"));
    }

    let edges_path = file("A");
    let mut adjacencies: Vec<Mat> = graph_sizes.iter().map(|&s| Mat::zeros(s, s)).collect();
    for (idx, line) in read_lines(&edges_path)?.iter().enumerate() {
        let line_no = idx + 1;
        let mut parts = line.split(',');
        let (a, b) = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => return Err(format_err(&edges_path, line_no, "expected \"i, j\"")),
        };
        let a = parse_int(&edges_path, line_no, a)?;
        let b = parse_int(&edges_path, line_no, b)?;
        let check = |v: i64| -> Result<usize> {
            if v < 1 || v as usize > num_nodes {
                Err(format_err(
                    &edges_path,
                    line_no,
                    format!("node id {v} outside 1..={num_nodes}"),
                ))
            } else {
                Ok(v as usize - 1)
            }
        };
        let (a, b) = (check(a)?, check(b)?);
        if graph_of_node[a] != graph_of_node[b] {
            return Err(format_err(
                &edges_path,
                line_no,
                format!("edge joins graph {} and graph {}", graph_of_node[a] + 1, graph_of_node[b] + 1),
            ));
        }
        if a == b {
            continue; // ingestion keeps diagonals zero
        }
        let adj = &mut adjacencies[graph_of_node[a]];
        adj.set(local_index[a], local_index[b], 1.0);
        adj.set(local_index[b], local_index[a], 1.0);
    }

    // Optional feature sources.
    let node_labels_path = file("node_labels");
    let one_hot: Option<Vec<Vec<f64>>> = if node_labels_path.exists() {
        let lines = read_lines(&node_labels_path)?;
        if lines.len() != num_nodes {
            return Err(format_err(
                &node_labels_path,
                lines.len().max(1),
                format!("expected {num_nodes} node labels, found {}", lines.len()),
            ));
        }
        let mut raw = Vec::with_capacity(num_nodes);
        for (idx, line) in lines.iter().enumerate() {
            raw.push(parse_int(&node_labels_path, idx + 1, line)?);
        }
        let mut alphabet: Vec<i64> = raw.clone();
        alphabet.sort_unstable();
        alphabet.dedup();
        let dim = alphabet.len();
        Some(
            raw.into_iter()
                .map(|l| {
                    let slot = alphabet.binary_search(&l).expect("label was collected");
                    let mut row = vec![0.0; dim];
                    row[slot] = 1.0;
                    row
                })
                .collect(),
        )
    } else {
        None
    };

    let attrs_path = file("node_attributes");
    let attributes: Option<Vec<Vec<f64>>> = if attrs_path.exists() {
        let lines = read_lines(&attrs_path)?;
        if lines.len() != num_nodes {
            return Err(format_err(
                &attrs_path,
                lines.len().max(1),
                format!("expected {num_nodes} attribute rows, found {}", lines.len()),
            ));
        }
        let mut rows = Vec::with_capacity(num_nodes);
        let mut width = None;
        for (idx, line) in lines.iter().enumerate() {
            let row: Vec<f64> = line
                .split(',')
                .map(|v| {
                    v.trim().parse::<f64>().map_err(|_| {
                        format_err(&attrs_path, idx + 1, format!("bad attribute value {v:?}"))
                    })
                })
                .collect::<Result<_>>()?;
            match width {
                None => width = Some(row.len()),
                Some(w) if w != row.len() => {
                    return Err(format_err(
                        &attrs_path,
                        idx + 1,
                        format!("attribute width {} differs from {w}", row.len()),
                    ))
                }
                _ => {}
            }
            rows.push(row);
        }
        Some(rows)
    } else {
        None
    };

    let mut graphs = Vec::with_capacity(num_graphs);
    for gid in 0..num_graphs {
        let n = graph_sizes[gid];
        let node_row = |global: usize| -> Vec<f64> {
            let mut row = Vec::new();
            if let Some(oh) = &one_hot {
                row.extend_from_slice(&oh[global]);
            }
            if let Some(at) = &attributes {
                row.extend_from_slice(&at[global]);
            }
            if row.is_empty() {
                row.push(1.0);
            }
            row
        };
        let dim = node_row(graph_of_node.iter().position(|&g| g == gid).expect("nonempty")).len();
        let mut features = Mat::zeros(n, dim);
        for global in 0..num_nodes {
            if graph_of_node[global] != gid {
                continue;
            }
            let row = node_row(global);
            for (c, v) in row.into_iter().enumerate() {
                features.set(local_index[global], c, v);
            }
        }
        graphs.push(Graph::new(
            std::mem::replace(&mut adjacencies[gid], Mat::zeros(1, 1)),
            features,
            class_labels[gid],
        )?);
    }
    Ok(graphs)
}

/// Serialize graphs into the same layout `parse_tudataset` reads. Features
/// are written as node attributes with round-trip-exact float formatting, so
/// parse(write(gs)) reproduces adjacency and features bit-for-bit.
pub fn write_tudataset(root: &Path, name: &str, graphs: &[Graph]) -> Result<()> {
    std::fs::create_dir_all(root)?;
    let mut edges = String::new();
    let mut indicator = String::new();
    let mut labels = String::new();
    let mut attrs = String::new();
    let mut base = 1usize; // global ids are 1-indexed
    for (gid, g) in graphs.iter().enumerate() {
        let n = g.node_count();
        for i in 0..n {
            let _ = writeln!(indicator, "{}", gid + 1);
            for j in 0..n {
                if g.adjacency.at(i, j) != 0.0 {
                    let _ = writeln!(edges, "{}, {}", base + i, base + j);
                }
            }
            let row: Vec<String> = (0..g.feature_dim())
                .map(|c| format!("{:?}", g.features.at(i, c)))
                .collect();
            let _ = writeln!(attrs, "{}", row.join(", "));
        }
        let _ = writeln!(labels, "{}", g.class_label);
        base += n;
    }
    let file = |suffix: &str| root.join(format!("{name}_{suffix}.txt"));
    std::fs::write(file("A"), edges)?;
    std::fs::write(file("graph_indicator"), indicator)?;
    std::fs::write(file("graph_labels"), labels)?;
    std::fs::write(file("node_attributes"), attrs)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_synthetic, FeatureSpec, GeneratorSpec, NodeRange, Topology};

    fn write_file(dir: &Path, name: &str, content: &str) {
        std::fs::write(dir.join(name), content).unwrap();
    }

    #[test]
    fn parses_a_toy_triangle_without_node_information() {
        let dir = tempfile::tempdir().unwrap();
        write_file(dir.path(), "TOY_A.txt", "1, 2\n2, 1\n2, 3\n3, 2\n1, 3\n3, 1\n");
        write_file(dir.path(), "TOY_graph_indicator.txt", "1\n1\n1\n");
        write_file(dir.path(), "TOY_graph_labels.txt", "1\n");
        let gs = parse_tudataset(dir.path(), "TOY").unwrap();
        assert_eq!(gs.len(), 1);
        assert_eq!(gs[0].node_count(), 3);
        assert_eq!(gs[0].edge_count(), 3);
        assert_eq!(gs[0].features.shape(), (3, 1));
        assert!(gs[0].features.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn missing_mandatory_file_names_it() {
        let dir = tempfile::tempdir().unwrap();
        write_file(dir.path(), "TOY_graph_indicator.txt", "1\n");
        write_file(dir.path(), "TOY_graph_labels.txt", "1\n");
        let err = parse_tudataset(dir.path(), "TOY").unwrap_err();
        match err {
            Error::MissingFile(p) => assert!(p.to_string_lossy().contains("TOY_A.txt")),
            other => panic!("expected MissingFile, got {other:?}"),
        }
    }

    #[test]
    fn edge_to_unknown_node_reports_the_line() {
        let dir = tempfile::tempdir().unwrap();
        write_file(dir.path(), "TOY_A.txt", "1, 2\n5, 1\n");
        write_file(dir.path(), "TOY_graph_indicator.txt", "1\n1\n1\n1\n");
        write_file(dir.path(), "TOY_graph_labels.txt", "1\n");
        let err = parse_tudataset(dir.path(), "TOY").unwrap_err();
        match err {
            Error::Format { line, .. } => assert_eq!(line, 2),
            other => panic!("expected Format, got {other:?}"),
        }
    }

    #[test]
    fn node_labels_one_hot_and_attributes_concat() {
        let dir = tempfile::tempdir().unwrap();
        write_file(dir.path(), "TOY_A.txt", "1, 2\n2, 1\n3, 4\n4, 3\n");
        write_file(dir.path(), "TOY_graph_indicator.txt", "1\n1\n2\n2\n");
        write_file(dir.path(), "TOY_graph_labels.txt", "0\n1\n");
        write_file(dir.path(), "TOY_node_labels.txt", "7\n3\n3\n7\n");
        write_file(dir.path(), "TOY_node_attributes.txt", "0.5\n1.5\n2.5\n3.5\n");
        let gs = parse_tudataset(dir.path(), "TOY").unwrap();
        // Alphabet {3,7}: label 7 -> [0,1], label 3 -> [1,0]; attribute appended.
        assert_eq!(gs[0].features.row(0), &[0.0, 1.0, 0.5]);
        assert_eq!(gs[0].features.row(1), &[1.0, 0.0, 1.5]);
        assert_eq!(gs[1].features.row(1), &[0.0, 1.0, 3.5]);
        assert_eq!(gs[1].class_label, 1);
    }

    #[test]
    fn roundtrip_reproduces_graphs_bit_exactly() {
        let spec = GeneratorSpec {
            topology: Topology::ErdosRenyi {
                n: NodeRange::new(3, 9),
                p: 0.4,
            },
            features: FeatureSpec::StdNormal { dim: 3 },
        };
        let graphs = generate_synthetic(&spec, 6, 99).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_tudataset(dir.path(), "RT", &graphs).unwrap();
        let back = parse_tudataset(dir.path(), "RT").unwrap();
        assert_eq!(back.len(), graphs.len());
        for (a, b) in graphs.iter().zip(&back) {
            assert_eq!(a.adjacency.data(), b.adjacency.data());
            assert_eq!(a.features.data(), b.features.data());
            assert_eq!(a.class_label, b.class_label);
        }
    }

    #[test]
    fn self_loops_are_dropped_on_ingestion() {
        let dir = tempfile::tempdir().unwrap();
        write_file(dir.path(), "TOY_A.txt", "1, 1\n1, 2\n2, 1\n");
        write_file(dir.path(), "TOY_graph_indicator.txt", "1\n1\n");
        write_file(dir.path(), "TOY_graph_labels.txt", "1\n");
        let gs = parse_tudataset(dir.path(), "TOY").unwrap();
        assert_eq!(gs[0].adjacency.at(0, 0), 0.0);
        assert_eq!(gs[0].edge_count(), 1);
    }
}
