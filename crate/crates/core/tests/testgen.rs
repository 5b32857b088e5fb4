use sketchlab::linalg::*;
use sketchlab::rng;
use sketchlab::testgen::*;
use sketchlab::Error;

fn rank_abs(a: &DenseMatrix, tol: f64) -> usize {
    numerical_rank(a, Tolerance::Absolute(tol)).unwrap()
}

#[test]
fn svd_profile_spectrum() {
    let mut r = rng::from_seed(1);
    let m = gen_svd_profile(64, 8, &mut r).unwrap();
    let s = singular_values(&m).unwrap();
    assert!((s[0] - 1.0).abs() < 1e-10);
    for (j, v) in s.iter().enumerate() {
        let want = if j < 8 { 1.0 / (j + 1) as f64 } else { 1e-10 };
        assert!((v - want).abs() < 1e-12, "σ_{j} = {v}");
    }
    assert!((s[0] / s[63] / 1e10 - 1.0).abs() < 0.01);
    assert_eq!(rank_abs(&m, 1e-6), 8);
    assert!(gen_svd_profile(8, 8, &mut r).is_err());
}

#[test]
fn factor_gaussian_rank() {
    let mut r = rng::from_seed(2);
    let exact = gen_factor_gaussian(40, 30, 5, 0.0, &mut r).unwrap();
    assert_eq!(numerical_rank(&exact, Tolerance::Relative(1e-10)).unwrap(), 5);
    let noisy = gen_factor_gaussian(256, 256, 8, 1e-10, &mut r).unwrap();
    assert_eq!(numerical_rank(&noisy, Tolerance::Relative(1e-6)).unwrap(), 8);
    let mut gaps = 0;
    for seed in 0..100 {
        let mut r = rng::from_seed(seed);
        let a = gen_factor_gaussian(64, 64, 8, 1e-10, &mut r).unwrap();
        let s = singular_values(&a).unwrap();
        if s[8] / s[7] <= 1e-6 {
            gaps += 1;
        }
    }
    assert!(gaps >= 99);
}

/// Direct quadrature of every entry, without the circulant shortcut.
fn laplacian_oracle(n: usize) -> DenseMatrix {
    use std::f64::consts::PI;
    let rule = gauss_quad::GaussLegendre::new(64).unwrap();
    let h = 2.0 * PI / n as f64;
    let m = DenseMatrix::from_fn(n, n, |i, j| {
        let phi = i as f64 * h;
        rule.integrate(j as f64 * h, (j + 1) as f64 * h, |t| {
            let (dx, dy) = (2.0 * phi.cos() - t.cos(), 2.0 * phi.sin() - t.sin());
            (dx * dx + dy * dy).sqrt().ln()
        })
    });
    let s = spectral_norm(&m).unwrap();
    m.scaled(1.0 / s)
}

#[test]
fn laplacian_structure() {
    let m = gen_laplacian(16).unwrap();
    assert!(m.data().iter().all(|v| v.is_finite()));
    assert!((spectral_norm(&m).unwrap() - 1.0).abs() < 1e-12);
    let oracle = laplacian_oracle(16);
    assert!(m.sub(&oracle).unwrap().max_abs() < 1e-12);
    for i in 0..15 {
        for j in 0..15 {
            assert!((oracle.get(i, j) - oracle.get(i + 1, j + 1)).abs() < 1e-10);
        }
    }
    let big = gen_laplacian(400).unwrap();
    let rank = numerical_rank(&big, Tolerance::Relative(1e-5)).unwrap();
    println!("laplacian n=400 rank at 1e-5: {rank}");
    assert!(rank <= 40);
}

#[test]
fn fd_inverse_properties() {
    let grid = 6;
    let a = fd_operator(grid);
    assert_eq!(a, a.transpose());
    let inv = pseudo_inverse(&a, 1e-14).unwrap();
    let prod = a.matmul(&inv).unwrap();
    assert!(prod.sub(&DenseMatrix::identity(36)).unwrap().max_abs() < 1e-10);
    assert!(singular_values(&inv).unwrap().iter().all(|s| *s > 0.0));
    let blk = gen_fd_inverse(88, 160).unwrap();
    assert_eq!(blk.shape(), (88, 160));
    assert!(numerical_rank(&blk, Tolerance::Relative(1e-5)).unwrap() <= 8);
}

#[test]
fn lsr_families() {
    let mut r = rng::from_seed(3);
    let p = gen_lsr_family(LsrFamily::Coherent, 64, 8, &mut r).unwrap();
    assert!((coherence(p.a()).unwrap() - 1.0).abs() < 1e-10);
    let p = gen_lsr_family(LsrFamily::Semicoherent, 64, 8, &mut r).unwrap();
    assert!((coherence(p.a()).unwrap() - 1.0).abs() < 1e-10);
    let p = gen_lsr_family(LsrFamily::Gaussian, 4096, 100, &mut r).unwrap();
    let c = coherence(p.a()).unwrap();
    let base = 100.0 / 4096.0;
    assert!(c >= base && c <= 3.0 * base, "{c}");
    let p = gen_lsr_family(LsrFamily::Illcond, 200, 20, &mut r).unwrap();
    let s = singular_values(p.a()).unwrap();
    assert!((s[0] / 1e4 - 1.0).abs() < 1e-10 && (s[12] / 1e-8 - 1.0).abs() < 1e-3);
    // a backward-stable SVD resolves the 1e-10 tail only to O(ε·σ₁)
    assert!(s[14..].iter().all(|v| *v <= 1e-10 + 1e-13 * s[0]), "{:?}", &s[14..]);
    assert!("bogus".parse::<LsrFamily>().is_err());
}

#[test]
fn coherence_bounds() {
    let q = random_orthogonal(16, &mut rng::from_seed(4));
    let h = DenseMatrix::from_fn(16, 4, |i, j| {
        // Hadamard columns: equal row norms
        if (i & j).count_ones() % 2 == 0 { 0.25 } else { -0.25 }
    });
    assert!((coherence(&h).unwrap() - 4.0 / 16.0).abs() < 1e-12);
    let _ = q;
    for seed in 0..100 {
        let mut r = rng::from_seed(seed);
        let a = rng::gaussian_matrix(30, 5, &mut r);
        let c = coherence(&a).unwrap();
        assert!(c >= 5.0 / 30.0 - 1e-12 && c <= 1.0 + 1e-12);
    }
}

#[test]
fn delta_matrices() {
    let d = gen_delta(8, 8, 2, 5).unwrap();
    assert_eq!(numerical_rank(&d, Tolerance::Relative(1e-12)).unwrap(), 1);
    let s = gen_shifted_delta(8, 8, 2, 5).unwrap();
    assert_eq!(numerical_rank(&s, Tolerance::Relative(1e-12)).unwrap(), 2);
    assert!(s.data().iter().all(|v| *v != 0.0));
    assert!(gen_delta(8, 8, 8, 0).is_err());
}

#[test]
fn kernels_and_cauchy() {
    for k in [Kernel::Gravity, Kernel::Shaw, Kernel::Hilbert] {
        let m = gen_kernel(k, 64, 48);
        assert!(m.data().iter().all(|v| v.is_finite()));
        assert!(numerical_rank(&m, Tolerance::Relative(1e-8)).unwrap() < 40);
    }
    let c = gen_cauchy(32);
    assert!(c.data().iter().all(|v| v.is_finite()));
    assert!((c.get(0, 0) + 64.0).abs() < 1e-12);
}

#[test]
fn generators_are_deterministic() {
    let a = gen_svd_profile(32, 4, &mut rng::from_seed(9)).unwrap();
    let b = gen_svd_profile(32, 4, &mut rng::from_seed(9)).unwrap();
    assert_eq!(a, b);
    let spec = InputSpec::FactorGaussian { m: 20, n: 10, r: 3, noise: 1e-10, seed: 5 };
    let back = InputSpec::from_json(&spec.to_json()).unwrap();
    assert_eq!(spec, back);
    assert_eq!(spec.generate().unwrap(), back.generate().unwrap());
}

#[test]
fn matrix_market_array() {
    let text = "%%MatrixMarket matrix array real general\n% comment\n2 2\n1.5\n-2\n3\n4e-3\n";
    let m = parse_matrix_market(text).unwrap();
    assert_eq!(m, DenseMatrix::from_rows(&[vec![1.5, 3.0], vec![-2.0, 4e-3]]).unwrap());
}

#[test]
fn matrix_market_coordinate_symmetric() {
    let text = "%%MatrixMarket matrix coordinate real symmetric\n3 3 3\n1 1 2.0\n3 1 -1.0\n2 2 5\n";
    let m = parse_matrix_market(text).unwrap();
    assert_eq!(m.get(0, 2), -1.0);
    assert_eq!(m.get(2, 0), -1.0);
    assert_eq!(m.get(1, 1), 5.0);
    assert_eq!(m, m.transpose());
}

#[test]
fn matrix_market_errors_carry_line_numbers() {
    let bad = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n3 1 2.0\n";
    match parse_matrix_market(bad) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
        other => panic!("{other:?}"),
    }
    let complex = "%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n";
    assert!(matches!(parse_matrix_market(complex), Err(Error::Unsupported(_))));
    let short = "%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n";
    assert!(matches!(parse_matrix_market(short), Err(Error::Parse { line: 5, .. })));
}

#[test]
fn matrix_market_round_trip() {
    let mut r = rng::from_seed(6);
    let m = rng::gaussian_matrix(7, 5, &mut r).scaled(1e-7);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.mtx");
    write_matrix_market(&path, &m).unwrap();
    let back = read_matrix_market(&path).unwrap();
    assert!(m.data().iter().zip(back.data()).all(|(a, b)| a.to_bits() == b.to_bits()));
}
