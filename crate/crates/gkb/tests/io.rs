use std::fs;

use gkb::error::Error;
use gkb::{load_system, mm, save_system};
use gkb_core::problems::gen_random_saddle;
use gkb_core::{SaddleSystem, SparseMatrix};
use proptest::prelude::*;

fn sample_system() -> SaddleSystem {
    gen_random_saddle(10, 4, 1e3, 7).unwrap().system
}

#[test]
fn system_round_trip_is_identical() {
    let dir = tempfile::tempdir().unwrap();
    let sys = sample_system();
    save_system(dir.path(), &sys).unwrap();
    let back = load_system(dir.path()).unwrap();
    assert_eq!(back, sys);
}

#[test]
fn missing_rhs_file_is_named() {
    let dir = tempfile::tempdir().unwrap();
    save_system(dir.path(), &sample_system()).unwrap();
    fs::remove_file(dir.path().join("r.mtx")).unwrap();
    let err = load_system(dir.path()).unwrap_err();
    assert!(matches!(err, Error::MissingFile { .. }));
    assert!(err.to_string().contains("r.mtx"), "{err}");
}

#[test]
fn asymmetric_mass_matrix_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let sys = sample_system();
    let m = sys.m();
    // perturb one off-diagonal entry by 1e-3 relative
    let mut trip = Vec::new();
    for i in 0..m.n_rows() {
        for (j, v) in m.row(i) {
            let v = if (i, j) == (0, 1) { v * (1.0 + 1e-3) } else { v };
            trip.push((i, j, v));
        }
    }
    let bad = SparseMatrix::from_triplets(m.n_rows(), m.n_cols(), &trip).unwrap();
    save_system(dir.path(), &sys).unwrap();
    mm::write_matrix(dir.path().join("M.mtx"), &bad).unwrap();
    let err = load_system(dir.path()).unwrap_err();
    match &err {
        Error::System { source, .. } => {
            assert!(matches!(source, gkb_core::Error::NotSymmetric { .. }), "{source}")
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn dimension_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    save_system(dir.path(), &sample_system()).unwrap();
    mm::write_vector(dir.path().join("g.mtx"), &[1.0, 2.0]).unwrap();
    let err = load_system(dir.path()).unwrap_err();
    assert!(err.to_string().contains("g length"), "{err}");
}

#[test]
fn symmetric_file_matches_general_file() {
    let dir = tempfile::tempdir().unwrap();
    let sym = dir.path().join("sym.mtx");
    fs::write(
        &sym,
        "%%MatrixMarket matrix coordinate real symmetric\n3 3 4\n1 1 4\n2 1 -1\n3 2 -1\n3 3 4\n",
    )
    .unwrap();
    let a = mm::read_matrix(&sym).unwrap();
    let expected = SparseMatrix::from_triplets(
        3,
        3,
        &[(0, 0, 4.0), (0, 1, -1.0), (1, 0, -1.0), (1, 2, -1.0), (2, 1, -1.0), (2, 2, 4.0)],
    )
    .unwrap();
    assert_eq!(a, expected);
}

#[test]
fn parse_error_names_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.mtx");
    fs::write(&path, "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 1.0\n").unwrap();
    let msg = mm::read_matrix(&path).unwrap_err().to_string();
    assert!(msg.contains("bad.mtx:3"), "{msg}");
}

proptest! {
    #[test]
    fn matrix_round_trip(
        entries in proptest::collection::vec((0usize..6, 0usize..4, -1e6f64..1e6), 0..20)
    ) {
        let a = SparseMatrix::from_triplets(6, 4, &entries).unwrap();
        let text = mm::format_matrix(&a);
        let b = mm::parse_matrix(std::path::Path::new("p.mtx"), &text).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn vector_round_trip(v in proptest::collection::vec(proptest::num::f64::NORMAL, 0..20)) {
        let text = mm::format_vector(&v);
        let back = mm::parse_vector(std::path::Path::new("v.mtx"), &text).unwrap();
        prop_assert_eq!(v, back);
    }
}
