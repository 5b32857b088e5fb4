use num_complex::Complex64;
use proptest::prelude::*;
use sketchlab::counters::count_flops;
use sketchlab::linalg::*;
use sketchlab::multipliers::*;
use sketchlab::rng;

fn dm(rows: &[&[f64]]) -> DenseMatrix {
    DenseMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

fn max_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    a.sub(b).unwrap().max_abs()
}

/// One operator of every real kind at order n (n a power of two ≥ 4).
fn real_zoo(n: usize, seed: u64) -> Vec<SketchOperator> {
    let mut r = rng::from_seed(seed);
    let d = if n >= 8 { 3 } else { 2 };
    vec![
        SketchOperator::random_permutation(n, &mut r),
        SketchOperator::random_integer_diagonal(n, &mut r),
        SketchOperator::abridged_hadamard(n, d).unwrap(),
        SketchOperator::random_sparse_circulant(n, 3.min(n), -1.0, &mut r).unwrap(),
        SketchOperator::random_inverse_bidiagonal(n, Orientation::Lower, &mut r),
        SketchOperator::random_inverse_bidiagonal(n, Orientation::Upper, &mut r),
        SketchOperator::random_householder_chain(n, 3, &mut r),
        SketchOperator::gaussian(n, n, &mut r),
        SketchOperator::select_rows(rng::random_subset(n, n / 2, &mut r), n).unwrap(),
        SketchOperator::select_cols(n, rng::random_subset(n, n / 2, &mut r)).unwrap(),
        SketchOperator::bidiagonal_pair(n, &mut r),
        SketchOperator::asph(n, d, &mut r).unwrap(),
        take_columns(SketchOperator::asph(n, d, &mut r).unwrap(), n / 2, SliceMode::Random, &mut r).unwrap(),
        SketchOperator::asph(n, d, &mut r).unwrap().random_rows(n / 2, &mut r).unwrap(),
        SketchOperator::random_sparse_circulant(n, n, 1.0, &mut r).unwrap().leading_rows(n / 4).unwrap(),
    ]
}

#[test]
fn hadamard_displays() {
    let h1 = materialize(&SketchOperator::abridged_hadamard(4, 1).unwrap()).unwrap();
    let i2 = [
        [1.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 1.0],
        [1.0, 0.0, -1.0, 0.0],
        [0.0, 1.0, 0.0, -1.0],
    ];
    assert_eq!(h1, DenseMatrix::from_rows(&i2.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap());
    let h4 = materialize(&SketchOperator::abridged_hadamard(4, 2).unwrap()).unwrap();
    let expected = dm(&[
        &[1.0, 1.0, 1.0, 1.0],
        &[1.0, -1.0, 1.0, -1.0],
        &[1.0, 1.0, -1.0, -1.0],
        &[1.0, -1.0, -1.0, 1.0],
    ]);
    assert_eq!(h4, expected);
}

#[test]
fn fourier_display_and_full_depth_dft() {
    let f4 = materialize_complex(&SketchOperator::abridged_fourier(4, 2).unwrap()).unwrap();
    let i = Complex64::new(0.0, 1.0);
    let one = Complex64::new(1.0, 0.0);
    let rows = [[one, one, one, one], [one, i, -one, -i], [one, -one, one, -one], [one, -i, -one, i]];
    for (a, row) in rows.iter().enumerate() {
        for (b, v) in row.iter().enumerate() {
            assert!((f4.get(a, b) - v).norm() < 1e-15);
        }
    }
    let f8 = materialize_complex(&SketchOperator::abridged_fourier(8, 3).unwrap()).unwrap();
    for a in 0..8 {
        for b in 0..8 {
            let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (a * b) as f64 / 8.0);
            assert!((f8.get(a, b) - w).norm() < 1e-14);
        }
    }
}

#[test]
fn fourier_apply_both_sides() {
    let mut r = rng::from_seed(11);
    for (n, d) in [(8, 2), (16, 3), (64, 4)] {
        let op = SketchOperator::aspf(n, d, &mut r).unwrap();
        let f = materialize_complex(&op).unwrap();
        let x = ComplexMatrix::from_real(&rng::gaussian_matrix(n, 3, &mut r));
        let left = apply_complex(&op, &x, Side::Left).unwrap();
        assert!(left.distance(&f.matmul(&x).unwrap()) < 1e-12 * x.frobenius_norm() * n as f64);
        let y = ComplexMatrix::from_real(&rng::gaussian_matrix(3, n, &mut r));
        let right = apply_complex(&op, &y, Side::Right).unwrap();
        assert!(right.distance(&y.matmul(&f).unwrap()) < 1e-12 * y.frobenius_norm() * n as f64);
        // unitary up to 2^d
        let g = f.conj_transpose().matmul(&f).unwrap();
        let c = (1usize << d) as f64;
        let eye = ComplexMatrix::from_real(&DenseMatrix::identity(n).scaled(c));
        assert!(g.distance(&eye) <= 1e-10 * n as f64 * c);
        assert!(apply(&op, &rng::gaussian_matrix(n, 1, &mut r), Side::Left).is_err());
    }
}

#[test]
fn apply_matches_materialized_product() {
    for n in [4, 8, 16, 64] {
        for (k, op) in real_zoo(n, 100 + n as u64).iter().enumerate() {
            let mut r = rng::from_seed(k as u64);
            let f = materialize(op).unwrap();
            let x = rng::gaussian_matrix(op.cols(), 3, &mut r);
            let left = apply(op, &x, Side::Left).unwrap();
            let tol = 1e-12 * x.frobenius_norm() * f.frobenius_norm().max(1.0);
            assert!(max_diff(&left, &f.matmul(&x).unwrap()) <= tol, "{} left", op.label());
            let y = rng::gaussian_matrix(2, op.rows(), &mut r);
            let right = apply(op, &y, Side::Right).unwrap();
            let tol = 1e-12 * y.frobenius_norm() * f.frobenius_norm().max(1.0);
            assert!(max_diff(&right, &y.matmul(&f).unwrap()) <= tol, "{} right", op.label());
            let rows: Vec<usize> = (0..op.rows()).step_by(3).collect();
            let sel = apply_rows(op, &rows, &x).unwrap();
            assert!(max_diff(&sel, &left.select_rows(&rows)) <= tol, "{} rows", op.label());
        }
    }
}

#[test]
fn hadamard_apply_against_materialization() {
    let mut r = rng::from_seed(12);
    let op = SketchOperator::abridged_hadamard(8, 3).unwrap();
    let x = rng::gaussian_matrix(8, 3, &mut r);
    let y = apply(&op, &x, Side::Left).unwrap();
    assert!(max_diff(&y, &materialize(&op).unwrap().matmul(&x).unwrap()) <= 1e-13);
}

#[test]
fn unit_vector_support_sizes() {
    let n = 64;
    let mut r = rng::from_seed(13);
    let cases: Vec<(SketchOperator, usize)> = vec![
        (SketchOperator::random_permutation(n, &mut r), 1),
        (SketchOperator::random_signs(n, &mut r), 1),
        (SketchOperator::select_rows(rng::random_subset(n, 10, &mut r), n).unwrap(), 1),
        (SketchOperator::abridged_hadamard(n, 3).unwrap(), 8),
        (SketchOperator::random_sparse_circulant(n, 5, 1.0, &mut r).unwrap(), 5),
    ];
    for (op, bound) in cases {
        for j in 0..op.cols() {
            let mut e = DenseMatrix::zeros(op.cols(), 1);
            e.set(j, 0, 1.0);
            let y = apply(&op, &e, Side::Left).unwrap();
            let nnz = y.data().iter().filter(|v| **v != 0.0).count();
            assert!(nnz <= bound, "{}: {nnz} > {bound}", op.label());
        }
    }
    let af = SketchOperator::abridged_fourier(n, 3).unwrap();
    for j in 0..n {
        let mut e = DenseMatrix::zeros(n, 1);
        e.set(j, 0, 1.0);
        let y = apply_complex(&af, &ComplexMatrix::from_real(&e), Side::Left).unwrap();
        assert!(y.data().iter().filter(|v| v.norm() > 0.0).count() <= 8);
    }
}

#[test]
fn orthogonal_kinds() {
    let mut r = rng::from_seed(14);
    for n in [4, 16, 64] {
        let d = 2;
        let cases: Vec<(SketchOperator, f64)> = vec![
            (SketchOperator::random_permutation(n, &mut r), 1.0),
            (SketchOperator::random_signs(n, &mut r), 1.0),
            (SketchOperator::abridged_hadamard(n, d).unwrap(), 4.0),
            (SketchOperator::asph(n, d, &mut r).unwrap(), 4.0),
            (SketchOperator::select_rows((0..n).rev().collect(), n).unwrap(), 1.0),
            (SketchOperator::random_householder_chain(n, 5, &mut r), 1.0),
        ];
        for (op, c) in cases {
            let f = materialize(&op).unwrap();
            let g = f.t_matmul(&f).unwrap();
            let defect = g.sub(&DenseMatrix::identity(n).scaled(c)).unwrap().frobenius_norm();
            assert!(defect <= 1e-10 * n as f64, "{}", op.label());
            let scaled = f.scaled(1.0 / c.sqrt());
            let gg = scaled.matmul(&scaled.transpose()).unwrap();
            assert!(max_diff(&gg, &DenseMatrix::identity(n)) <= 1e-12 * n as f64);
        }
    }
}

#[test]
fn permutation_and_identity_examples() {
    let rev = SketchOperator::permutation((0..4).rev().collect()).unwrap();
    let y = apply(&rev, &DenseMatrix::identity(4), Side::Left).unwrap();
    let anti = DenseMatrix::from_fn(4, 4, |i, j| if i + j == 3 { 1.0 } else { 0.0 });
    assert_eq!(y, anti);
    let mut r = rng::from_seed(15);
    let x = rng::gaussian_matrix(5, 2, &mut r);
    let id = SketchOperator::inverse_bidiagonal(vec![0.0; 4], Orientation::Lower);
    assert_eq!(apply(&id, &x, Side::Left).unwrap(), x);
    assert!(SketchOperator::permutation(vec![0, 0, 1]).is_err());
    assert!(SketchOperator::abridged_hadamard(12, 3).is_err());
    assert!(SketchOperator::sign_diagonal(vec![1.0, 0.0]).is_err());
}

#[test]
fn materialize_examples() {
    let mut r = rng::from_seed(16);
    let p = materialize(&SketchOperator::random_permutation(6, &mut r)).unwrap();
    assert_eq!(p.col_norms_sq(), vec![1.0; 6]);
    assert_eq!(p.row_norms_sq(), vec![1.0; 6]);
    let d = materialize(&SketchOperator::sign_diagonal(vec![2.0, -1.0, 3.0]).unwrap()).unwrap();
    assert_eq!(d, DenseMatrix::from_diag(&[2.0, -1.0, 3.0]));
    let s = SketchOperator::sum(
        vec![SketchOperator::random_permutation(7, &mut r), SketchOperator::random_permutation(7, &mut r)],
        vec![1.0, 1.0],
    )
    .unwrap();
    let ones = DenseMatrix::from_fn(7, 1, |_, _| 1.0);
    assert_eq!(apply(&s, &ones, Side::Left).unwrap().data(), &[2.0; 7]);
    let big = SketchOperator::identity(5000);
    assert!(matches!(materialize(&big), Err(sketchlab::Error::CapExceeded { .. })));
}

#[test]
fn take_columns_examples() {
    let mut r = rng::from_seed(17);
    let sliced = take_columns(SketchOperator::identity(6), 3, SliceMode::Leftmost, &mut r).unwrap();
    assert_eq!(sliced, SketchOperator::select_cols(6, vec![0, 1, 2]).unwrap());
    let h = take_columns(SketchOperator::abridged_hadamard(4, 2).unwrap(), 2, SliceMode::Leftmost, &mut r).unwrap();
    let expected = dm(&[&[1.0, 1.0], &[1.0, -1.0], &[1.0, 1.0], &[1.0, -1.0]]);
    assert_eq!(materialize(&h).unwrap(), expected);
    assert!(take_columns(SketchOperator::identity(3), 4, SliceMode::Leftmost, &mut r).is_err());
    let q = take_columns(SketchOperator::random_householder_chain(16, 4, &mut r), 5, SliceMode::Random, &mut r).unwrap();
    assert!(orthonormality_defect(&materialize(&q).unwrap()) < 1e-12);
}

#[test]
fn slicing_never_worsens_conditioning() {
    let mut r = rng::from_seed(18);
    for t in 0..50 {
        let n = 16;
        let op = match t % 3 {
            0 => SketchOperator::bidiagonal_pair(n, &mut r),
            1 => SketchOperator::random_sparse_circulant(n, 4, 1.0, &mut r).unwrap(),
            _ => SketchOperator::gaussian(n, n, &mut r),
        };
        let full = materialize(&op).unwrap();
        let kf = condition_number(&full, 1e-14).unwrap();
        let s = take_columns(op, 6, SliceMode::Random, &mut r).unwrap();
        let ks = condition_number(&materialize(&s).unwrap(), 1e-14).unwrap();
        assert!(ks <= kf * (1.0 + 1e-8));
    }
}

#[test]
fn inverse_bidiagonal_conditioning() {
    // The order-2 case already has κ = (3 + √5)/2 > √(2n) = 2, so the valid
    // bound checked here is ‖B‖_F · ‖B⁻¹‖ ≤ √(n(n+1)/2) · 2.
    let two = SketchOperator::inverse_bidiagonal(vec![1.0], Orientation::Lower);
    let k2 = condition_number(&materialize(&two).unwrap(), 1e-14).unwrap();
    assert!((k2 - (3.0 + 5f64.sqrt()) / 2.0).abs() < 1e-12);
    assert!(k2 > 2.0);
    let mut r = rng::from_seed(19);
    for n in [2usize, 4, 16, 64, 256] {
        for o in [Orientation::Lower, Orientation::Upper] {
            let op = SketchOperator::random_inverse_bidiagonal(n, o, &mut r);
            let k = condition_number(&materialize(&op).unwrap(), 1e-15).unwrap();
            let bound = 2.0 * ((n * (n + 1)) as f64 / 2.0).sqrt();
            assert!(k <= bound * (1.0 + 1e-8), "n={n}: {k} > {bound}");
        }
    }
}

#[test]
fn flop_budgets() {
    let mut r = rng::from_seed(20);
    let n = 256;
    let cols = 5;
    let x = rng::gaussian_matrix(n, cols, &mut r);
    for d in 1..=5 {
        let op = SketchOperator::abridged_hadamard(n, d).unwrap();
        let (_, f) = count_flops(|| apply(&op, &x, Side::Left).unwrap());
        assert!(f as usize <= d * n * cols);
    }
    let op = SketchOperator::random_inverse_bidiagonal(n, Orientation::Upper, &mut r);
    let (_, f) = count_flops(|| apply(&op, &x, Side::Left).unwrap());
    assert!(f as usize <= 2 * n * cols);
    for s in [1, 4, 17] {
        let op = SketchOperator::random_sparse_circulant(n, s, -1.0, &mut r).unwrap();
        let (_, f) = count_flops(|| apply(&op, &x, Side::Left).unwrap());
        assert!(f as usize <= (2 * s - 1) * n * cols);
    }
}

#[test]
fn generation_is_deterministic() {
    for n in [8, 64] {
        let a = real_zoo(n, 77);
        let b = real_zoo(n, 77);
        assert_eq!(a, b);
        let mut r = rng::from_seed(1);
        let x = rng::gaussian_matrix(n, 2, &mut r);
        for (p, q) in a.iter().zip(&b) {
            if p.cols() == n {
                let ya = apply(p, &x, Side::Left).unwrap();
                let yb = apply(q, &x, Side::Left).unwrap();
                assert!(ya.data().iter().zip(yb.data()).all(|(u, v)| u.to_bits() == v.to_bits()));
            }
        }
    }
}

#[test]
fn descriptor_round_trip() {
    let spec = OperatorSpec::new(sketchlab::multipliers::Family::Asph, 64, 9).depth(3).keep_cols(8);
    let text = spec.to_json();
    let back = OperatorSpec::from_json(&text).unwrap();
    assert_eq!(spec, back);
    assert_eq!(spec.build().unwrap(), back.build().unwrap());
    assert_eq!(back.build().unwrap().shape(), (64, 8));
    let op = SketchOperator::random_householder_chain(8, 2, &mut rng::from_seed(3));
    let json = serde_json::to_string(&op).unwrap();
    let op2: SketchOperator = serde_json::from_str(&json).unwrap();
    assert_eq!(op, op2);
}

#[test]
fn bidiagonal_product_conventions() {
    let mut r = rng::from_seed(21);
    assert_eq!(bidiagonal_product_raw(5, 0, &mut r), DenseMatrix::identity(5));
    let f = BidiagonalFactor { sub: vec![1.0, 1.0], corner: 1.0, perm: vec![0, 1, 2] };
    let p = BidiagonalProduct { n: 3, factors: vec![f] };
    let expected = dm(&[&[1.0, 0.0, 1.0], &[1.0, 1.0, 0.0], &[0.0, 1.0, 1.0]]);
    assert_eq!(p.dense(), expected);
    let mut a = rng::from_seed(22);
    let mut b = rng::from_seed(22);
    let dense = gen_bidiagonal_product(32, 6, &mut a);
    let prod = BidiagonalProduct::random(32, 6, &mut b);
    assert!((dense.get(3, 7) - prod.standardized_entry(3, 7)).abs() < 1e-14);
    let col = dense.col(7);
    let mean = col.iter().sum::<f64>() / 32.0;
    let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 32.0;
    assert!(mean.abs() < 1e-12 && (var - 1.0).abs() < 1e-12);
}

#[test]
fn ks_self_consistency() {
    let mut passes = 0;
    for seed in 0..100 {
        let mut r = rng::from_seed(seed);
        let s = rng::normal_vec(10_000, &mut r);
        if ks_normality(&s).unwrap().1 {
            passes += 1;
        }
    }
    assert!(passes >= 94, "{passes}");
    assert!(ks_normality(&[2.0; 50]).is_err());
    assert!(ks_normality(&[1.0; 10]).is_err());
    let mut r = rng::from_seed(5);
    let u: Vec<f64> = (0..10_000).map(|_| rng::uniform(&mut r)).collect();
    assert!(!ks_normality(&u).unwrap().1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn composite_apply_consistent(seed in 0u64..100_000, d in 0usize..4, l in 1usize..16) {
        let mut r = rng::from_seed(seed);
        let n = 16;
        let op = take_columns(SketchOperator::asph(n, d, &mut r).unwrap(), l, SliceMode::Random, &mut r).unwrap();
        let f = materialize(&op).unwrap();
        let m = rng::gaussian_matrix(5, n, &mut r);
        let y = apply(&op, &m, Side::Right).unwrap();
        prop_assert!(max_diff(&y, &m.matmul(&f).unwrap()) <= 1e-12 * m.frobenius_norm() * 4.0);
        prop_assert!(orthonormality_defect(&f.scaled(1.0 / ((1usize << d) as f64).sqrt())) <= 1e-12);
    }
}
