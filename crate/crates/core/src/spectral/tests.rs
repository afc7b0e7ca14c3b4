use super::*;
use crate::geometry::{GeometrySpec, OffsetGeometry};
use crate::operators::{assemble_normal_t, assemble_product, Grid1D};

fn small_product(n_u: usize, n_s: usize, eps: f64) -> OperatorMatrix {
    let g = OffsetGeometry::from_spec(&GeometrySpec::spheroid(1.0, 1.5)).unwrap();
    let gu = Grid1D::new(n_u, 0.0, g.length()).unwrap();
    let gs = Grid1D::normal(n_s, eps).unwrap();
    assemble_product(&g, Mode::from_twice(1), eps, &gu, &gs).unwrap()
}

fn assert_close(a: &[f64], b: &[f64], tol: f64) {
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() <= tol, "{a:?}\n{b:?}");
    }
}

#[test]
fn graded_lanczos_agrees_with_dense() {
    let h = small_product(12, 10, 0.2);
    let dense = eig_symmetric(&h, EigRequest::smallest(8).with_path(SolverPath::Dense)).unwrap();
    let lan = eig_symmetric(&h, EigRequest::smallest(8).with_path(SolverPath::GradedShiftInvert)).unwrap();
    let tol = 1e-9 * dense.norm;
    assert_close(&dense.eigenvalues, &lan.eigenvalues, tol);
    assert!(lan.max_residual() <= RESIDUAL_TOL * lan.norm);
}

#[test]
fn squared_lanczos_agrees_with_dense() {
    let h = small_product(10, 8, 0.1);
    let dense = eig_symmetric(&h, EigRequest::smallest(6).with_path(SolverPath::Dense)).unwrap();
    let sq = eig_symmetric(&h, EigRequest::smallest(6).with_path(SolverPath::SquaredShiftInvert)).unwrap();
    assert_close(&dense.eigenvalues, &sq.eigenvalues, 1e-8 * dense.norm);
}

#[test]
fn tridiagonal_agrees_with_dense() {
    let t = assemble_normal_t(0.5, &Grid1D::normal(60, 0.5).unwrap()).unwrap();
    let a = eig_symmetric(&t, EigRequest::all()).unwrap();
    let b = eig_symmetric(&t, EigRequest::all().with_path(SolverPath::Dense)).unwrap();
    assert_eq!(a.path, SolverPath::Tridiagonal);
    assert_close(&a.eigenvalues, &b.eigenvalues, 1e-11 * a.norm);
}

#[test]
fn non_hermitian_input_is_rejected() {
    let i = Complex64::new(0.0, 1.0);
    let m = CsrMatrix::from_triplets(2, 2, vec![(0, 1, i), (1, 0, i)]);
    assert!(matches!(eig_hermitian(&m, None, EigRequest::all()), Err(Error::NotHermitian { .. })));
}

#[test]
fn normal_operator_index_is_one() {
    let t = assemble_normal_t(0.25, &Grid1D::normal(128, 0.25).unwrap()).unwrap();
    let sp = eig_symmetric(&t, EigRequest::smallest(5)).unwrap();
    let idx = graded_index(&t, &sp, None).unwrap();
    assert_eq!(idx.index, Some(1));
    assert_eq!((idx.kernel_dim_plus, idx.kernel_dim_minus), (1, 0));
    assert!(idx.gap_ratio > 1e6);
}

#[test]
fn index_needs_vectors_and_a_gap() {
    let t = assemble_normal_t(0.25, &Grid1D::normal(32, 0.25).unwrap()).unwrap();
    let sp = eig_symmetric(&t, EigRequest::all()).unwrap();
    assert!(graded_index(&t, &sp, None).is_err());
    // A matrix whose small eigenvalues are evenly spread has no kernel gap.
    let d: Vec<f64> = (1..=8).map(|k| k as f64).collect();
    let mut trip = Vec::new();
    for (k, v) in d.iter().enumerate() {
        trip.push((2 * k, 2 * k + 1, Complex64::new(*v, 0.0)));
        trip.push((2 * k + 1, 2 * k, Complex64::new(*v, 0.0)));
    }
    let m = CsrMatrix::from_triplets(16, 16, trip);
    let g = GradingMatrix::new((0..16).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect()).unwrap();
    let sp = eig_hermitian(&m, Some(&g), EigRequest::all().with_vectors(true)).unwrap();
    let idx = graded_index_with(&m, &g, &sp, Some(8.0)).unwrap();
    assert_eq!(idx.index, None);
}

#[test]
fn product_kernel_is_empty_on_the_sphere_like_case() {
    let h = small_product(16, 12, 0.1);
    let sp = eig_symmetric(&h, EigRequest::smallest(6)).unwrap();
    let idx = graded_index(&h, &sp, Some(1.0)).unwrap();
    assert_eq!(idx.index, Some(0));
}

#[test]
fn match_respects_sectors() {
    let t = assemble_normal_t(0.5, &Grid1D::normal(40, 0.5).unwrap()).unwrap();
    let a = eig_symmetric(&t, EigRequest::smallest(4)).unwrap();
    let mut b = a.clone();
    let m = match_spectra(&a, &b, 4);
    assert_eq!(m.pairs.len(), 4);
    assert_eq!(m.max_difference(), 0.0);
    let long = match_spectra(&a, &b, 10);
    assert!(long.truncated);
    b.label.mode = Some(Mode::from_twice(3));
    assert!(match_spectra(&a, &b, 4).sector_mismatch);
}
