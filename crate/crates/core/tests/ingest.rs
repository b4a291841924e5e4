mod common;

use std::path::{Path, PathBuf};

use damped_chain::io::{
    ingest, matrix_to_json, parse, DanglingPolicy, IngestError, IngestOptions, InputFormat,
};
use damped_chain::StochasticMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
}

fn assert_close(a: &StochasticMatrix, b: &StochasticMatrix) {
    assert_eq!(a.dim(), b.dim());
    assert!(max_abs_diff(a.as_slice(), b.as_slice()) < 1e-15);
}

#[test]
fn five_node_graph_gives_hyperlink_matrix() {
    let g = ingest(&data("five_node.edges"), &IngestOptions::default()).unwrap();
    assert_eq!(g.format, InputFormat::EdgeList);
    assert_eq!(g.node_count, 5);
    assert!(g.damping.is_none());
    assert_close(&g.matrix, &five_state());
    assert_eq!(g.damping_or_uniform().weights(), &[0.2; 5]);
}

#[test]
fn two_disjoint_networks() {
    let g = ingest(&data("two_networks.edges"), &IngestOptions::default()).unwrap();
    assert_close(&g.matrix, &eight_state());
}

#[test]
fn matrix_files() {
    let g = ingest(&data("four_state.json"), &IngestOptions::default()).unwrap();
    assert_eq!(g.format, InputFormat::MatrixJson);
    assert_close(&g.matrix, &four_state());
    let g = ingest(&data("five_state.csv"), &IngestOptions::default()).unwrap();
    assert_eq!(g.format, InputFormat::MatrixCsv);
    assert_close(&g.matrix, &five_state());
}

#[test]
fn emit_ingest_emit_is_a_fixed_point() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    let p = five_state();
    let d = random_damping(&mut ChaCha8Rng::seed_from_u64(1), 5);
    let first = matrix_to_json(&p, Some(&d));
    std::fs::write(&path, &first).unwrap();
    let g = ingest(&path, &IngestOptions::default()).unwrap();
    assert_eq!(g.matrix, p);
    assert_eq!(g.damping.as_ref(), Some(&d));
    assert_eq!(matrix_to_json(&g.matrix, g.damping.as_ref()), first);
}

#[test]
fn explicit_format_overrides_extension() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("graph.txt");
    std::fs::write(&path, "0.5,0.5\n0.5,0.5\n").unwrap();
    let options = IngestOptions {
        format: Some(InputFormat::MatrixCsv),
        ..IngestOptions::default()
    };
    assert_eq!(ingest(&path, &options).unwrap().node_count, 2);
    assert!(ingest(&path, &IngestOptions::default()).is_err());
}

#[test]
fn ingest_errors() {
    let opts = IngestOptions::default();
    assert!(matches!(
        ingest(Path::new("/definitely/missing.edges"), &opts),
        Err(IngestError::Io { .. })
    ));
    assert!(matches!(
        parse("1 2\n2 3\n", InputFormat::EdgeList, &opts),
        Err(IngestError::Dangling { nodes }) if nodes == vec![3]
    ));
    let self_loop = IngestOptions {
        dangling: DanglingPolicy::SelfLoop,
        ..opts
    };
    let g = parse("1 2\n2 3\n", InputFormat::EdgeList, &self_loop).unwrap();
    assert_eq!(g.matrix.row(2), &[0.0, 0.0, 1.0]);
    assert!(matches!(
        parse("[[0.5, 0.6], [1, 0]]", InputFormat::MatrixJson, &opts),
        Err(IngestError::Chain(_))
    ));
    assert!(matches!(
        parse(
            "{\"matrix\": [[1]], \"damping\": [0.5, 0.5]}",
            InputFormat::MatrixJson,
            &opts
        ),
        Err(IngestError::Chain(_))
    ));
    assert!(matches!(
        parse("nope", InputFormat::MatrixJson, &opts),
        Err(IngestError::Json(_))
    ));
}
