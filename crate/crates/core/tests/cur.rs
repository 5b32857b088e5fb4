use proptest::prelude::*;
use rayon::prelude::*;
use sketchlab::cur::*;
use sketchlab::linalg::*;
use sketchlab::rng::{self, Rng};
use sketchlab::source::Counting;
use sketchlab::testgen::{gen_delta, gen_shifted_delta, gen_factor_gaussian, gen_kernel, random_orthogonal, Kernel};
use sketchlab::Error;

fn rel_spec(m: &DenseMatrix, c: &CurDecomposition) -> f64 {
    cur_evaluate(m, c, Norm::Spectral).unwrap() / spectral_norm(m).unwrap()
}

fn orthonormal(m: usize, r: usize, g: &mut Rng) -> DenseMatrix {
    thin_qr(&rng::gaussian_matrix(m, r, g)).unwrap().0
}

fn max_dominance(a: &DenseMatrix, rows: &[usize]) -> f64 {
    let inv = pseudo_inverse(&a.select_rows(rows), 1e-14).unwrap();
    a.matmul(&inv).unwrap().max_abs()
}

fn sorted(v: &[usize]) -> Vec<usize> {
    let mut v = v.to_vec();
    v.sort_unstable();
    v
}

#[test]
fn maxvol_picks_the_support_of_identity_columns() {
    let a = DenseMatrix::eye(10, 3);
    let set = maxvol_rows(&a, 1.0, 12).unwrap();
    assert_eq!(sorted(set.indices()), vec![0, 1, 2]);
}

#[test]
fn maxvol_single_column_takes_largest_magnitude() {
    let a = DenseMatrix::from_rows(&[vec![1.0], vec![2.0], vec![-3.0]]).unwrap();
    let brute = (0..3).max_by(|&x, &y| a.get(x, 0).abs().total_cmp(&a.get(y, 0).abs())).unwrap();
    assert_eq!(brute, 2);
    assert_eq!(maxvol_rows(&a, 1.0, 4).unwrap().indices(), &[2]);
}

fn det_abs(a: &DenseMatrix) -> f64 {
    singular_values(a).unwrap().iter().product()
}

#[test]
fn maxvol_block_beats_random_blocks() {
    let mut g = rng::from_seed(41);
    let a = orthonormal(64, 4, &mut g);
    let set = maxvol_rows(&a, 1.1, 16).unwrap();
    assert!(max_dominance(&a, set.indices()) <= 1.1 + 1e-12);
    let vol = det_abs(&a.select_rows(set.indices()));
    let beaten = (0..1000)
        .filter(|_| det_abs(&a.select_rows(&rng::random_subset(64, 4, &mut g))) <= vol)
        .count();
    assert!(beaten >= 990, "beat only {beaten} of 1000 random blocks");
}

#[test]
fn maxvol_inverse_norm_bound_on_orthonormal_input() {
    let mut g = rng::from_seed(42);
    for (m, r) in [(64, 4), (200, 6), (30, 8)] {
        let a = orthonormal(m, r, &mut g);
        let set = maxvol_rows(&a, DEFAULT_H, 4 * r).unwrap();
        let inv_norm = 1.0 / singular_values(&a.select_rows(set.indices())).unwrap()[r - 1];
        assert!(inv_norm <= t_qsh(m, r, DEFAULT_H) * (1.0 + 1e-6), "{m}x{r}: {inv_norm}");
    }
}

#[test]
fn maxvol_rejects_rank_deficient_input() {
    let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]]).unwrap();
    assert!(matches!(maxvol_rows(&a, 1.1, 8), Err(Error::SelectionFailure(_))));
}

#[test]
fn t_qsh_matches_hand_arithmetic() {
    assert_eq!(t_qsh(5, 2, 1.0), 7.0f64.sqrt());
    assert!((t_qsh(10, 3, 1.1) - (7.0 * 3.0 * 1.21 + 1.0f64).sqrt()).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn maxvol_output_is_h_dominant(seed in any::<u64>(), m in 4usize..40, r in 1usize..5, h in 1.0f64..2.0) {
        prop_assume!(r <= m);
        let mut g = rng::from_seed(seed);
        let a = rng::gaussian_matrix(m, r, &mut g);
        if let Ok(set) = maxvol_rows(&a, h, 100) {
            prop_assert_eq!(set.len(), r);
            prop_assert!(max_dominance(&a, set.indices()) <= h * (1.0 + 1e-10));
        }
    }

    #[test]
    fn maxvol_rect_returns_distinct_rows(seed in any::<u64>(), m in 6usize..40, r in 1usize..4, extra in 0usize..3) {
        let mut g = rng::from_seed(seed);
        let a = rng::gaussian_matrix(m, r, &mut g);
        let k = r + extra;
        let set = maxvol_rect(&a, k, 1.1, 40).unwrap();
        prop_assert_eq!(sorted(set.indices()).windows(2).filter(|w| w[0] == w[1]).count(), 0);
        prop_assert_eq!(set.len(), k);
    }

    #[test]
    fn chebyshev_never_exceeds_frobenius(seed in any::<u64>(), m in 3usize..20, n in 3usize..20) {
        let mut g = rng::from_seed(seed);
        let a = rng::gaussian_matrix(m, n, &mut g);
        let rows = IndexSet::new(rng::random_subset(m, 2, &mut g), m).unwrap();
        let cols = IndexSet::new(rng::random_subset(n, 2, &mut g), n).unwrap();
        if let Ok(c) = primitive_cur(&a, &rows, &cols, 2) {
            let ch = cur_evaluate(&a, &c, Norm::Chebyshev).unwrap();
            let fr = cur_evaluate(&a, &c, Norm::Frobenius).unwrap();
            prop_assert!(ch <= fr * (1.0 + 1e-12));
        }
    }
}

#[test]
fn primitive_cur_is_exact_on_factor_gaussian() {
    let ok = (0..100u64)
        .into_par_iter()
        .filter(|&s| {
            let mut g = rng::from_seed(1000 + s);
            let m = gen_factor_gaussian(96, 80, 5, 0.0, &mut g).unwrap();
            let rows = IndexSet::new(rng::random_subset(96, 5, &mut g), 96).unwrap();
            let cols = IndexSet::new(rng::random_subset(80, 5, &mut g), 80).unwrap();
            primitive_cur(&m, &rows, &cols, 5).map(|c| rel_spec(&m, &c) <= 1e-8).unwrap_or(false)
        })
        .count();
    assert!(ok >= 95, "{ok}/100");
}

#[test]
fn primitive_cur_on_diagonal_leading_block() {
    let m = DenseMatrix::from_diag(&[5.0, 4.0, 3.0, 2.0, 1.0, 0.5]);
    let set = IndexSet::range(3, 6);
    let c = primitive_cur(&m, &set, &set, 3).unwrap();
    let rec = c.reconstruct(&m).unwrap();
    assert!(rec.block(0, 0, 3, 3).sub(&m.block(0, 0, 3, 3)).unwrap().max_abs() < 1e-14);
    assert_eq!(rec.block(3, 3, 3, 3).max_abs(), 0.0);
}

#[test]
fn delta_matrix_missed_by_the_generator() {
    let m = gen_delta(8, 8, 6, 7).unwrap();
    let (rows, cols) = (IndexSet::range(3, 8), IndexSet::range(3, 8));
    // the generator sees only zeros
    assert!(matches!(primitive_cur(&m, &rows, &cols, 1), Err(Error::GeneratorRankFailure { rank: 0, target: 1 })));
    let shifted = gen_shifted_delta(8, 8, 6, 7).unwrap();
    let c = primitive_cur(&shifted, &rows, &cols, 1).unwrap();
    assert!(cur_evaluate(&shifted, &c, Norm::Chebyshev).unwrap() >= 0.5);
}

#[test]
fn generator_rank_failure_is_typed() {
    let mut g = rng::from_seed(3);
    let m = gen_factor_gaussian(20, 20, 2, 0.0, &mut g).unwrap();
    let r = primitive_cur(&m, &IndexSet::range(4, 20), &IndexSet::range(4, 20), 3);
    assert!(matches!(r, Err(Error::GeneratorRankFailure { rank: 2, target: 3 })));
}

#[test]
fn primitive_cur_reads_only_the_generator() {
    let mut g = rng::from_seed(4);
    let m = gen_factor_gaussian(60, 50, 3, 0.0, &mut g).unwrap();
    let src = Counting::new(&m);
    primitive_cur(&src, &IndexSet::range(4, 60), &IndexSet::range(5, 50), 3).unwrap();
    assert_eq!(src.reads(), 20);
}

#[test]
fn cynical_with_full_block_is_primitive() {
    let mut g = rng::from_seed(5);
    let m = gen_factor_gaussian(40, 30, 3, 0.0, &mut g).unwrap();
    let mut a = rng::from_seed(6);
    let mut b = a.clone();
    let c = cynical_cur(&m, 4, 5, 4, 5, 3, &mut a).unwrap();
    let rows = rng::random_subset(40, 4, &mut b);
    let cols = rng::random_subset(30, 5, &mut b);
    assert_eq!(sorted(c.row_set.indices()), sorted(&rows));
    assert_eq!(sorted(c.col_set.indices()), sorted(&cols));
    let p = primitive_cur(&m, &IndexSet::new(rows, 40).unwrap(), &IndexSet::new(cols, 30).unwrap(), 3).unwrap();
    let diff = c.reconstruct(&m).unwrap().sub(&p.reconstruct(&m).unwrap()).unwrap().max_abs();
    assert!(diff < 1e-9 * m.max_abs());
}

#[test]
fn cynical_exact_on_rank_r_input() {
    let mut g = rng::from_seed(7);
    let m = gen_factor_gaussian(128, 100, 6, 0.0, &mut g).unwrap();
    let c = cynical_cur(&m, 24, 24, 6, 6, 6, &mut g).unwrap();
    assert!(rel_spec(&m, &c) <= 1e-9);
}

#[test]
fn cynical_on_perturbed_factor_gaussian() {
    let errs: Vec<f64> = (0..100u64)
        .into_par_iter()
        .map(|s| {
            let mut g = rng::from_seed(2000 + s);
            let m = gen_factor_gaussian(256, 256, 8, 1e-6, &mut g).unwrap();
            cynical_cur(&m, 32, 32, 8, 8, 8, &mut g).map(|c| rel_spec(&m, &c)).unwrap_or(f64::INFINITY)
        })
        .collect();
    let mean = errs.iter().sum::<f64>() / errs.len() as f64;
    assert!(mean <= 1e-4, "mean {mean:e}");
}

#[test]
fn cynical_checks_size_constraints() {
    let m = DenseMatrix::identity(10);
    let mut g = rng::from_seed(0);
    assert!(matches!(cynical_cur(&m, 3, 3, 4, 3, 2, &mut g), Err(Error::InvalidArgument(_))));
    assert!(matches!(cynical_cur(&m, 11, 3, 4, 3, 2, &mut g), Err(Error::InvalidArgument(_))));
}

fn random_rows(m: usize, k: usize, g: &mut Rng) -> IndexSet {
    IndexSet::new(rng::random_subset(m, k, g), m).unwrap()
}

#[test]
fn cross_approx_exact_after_one_loop() {
    let mut g = rng::from_seed(8);
    let m = gen_factor_gaussian(120, 90, 5, 0.0, &mut g).unwrap();
    let init = random_rows(120, 5, &mut g);
    let (c, trace) = cross_approx(&m, 5, 5, 5, &init, 1, DEFAULT_H, None, &mut g).unwrap();
    assert!(rel_spec(&m, &c) <= 1e-9);
    assert_eq!(trace.loops_run, 1);
    assert_eq!(trace.steps.len(), 2);
    assert_eq!(trace.steps[0].direction, Direction::Vertical);
    assert_eq!(trace.steps[1].direction, Direction::Horizontal);
    assert!(!trace.stopped_early);
}

#[test]
fn cross_approx_on_gravity_kernel() {
    let m = gen_kernel(Kernel::Gravity, 256, 256);
    let norm_m = spectral_norm(&m).unwrap();
    let worst = (0..20u64)
        .into_par_iter()
        .map(|s| {
            let mut g = rng::from_seed(3000 + s);
            let init = random_rows(256, 12, &mut g);
            let (c, trace) = cross_approx(&m, 12, 12, 12, &init, 5, DEFAULT_H, None, &mut g).unwrap();
            assert!(trace.loops_run <= 5);
            cur_evaluate(&m, &c, Norm::Spectral).unwrap() / norm_m
        })
        .reduce(|| 0.0, f64::max);
    assert!(worst <= 1e-4, "worst {worst:e}");
}

#[test]
fn more_loops_do_not_hurt() {
    let better = (0..100u64)
        .into_par_iter()
        .filter(|&s| {
            let mut g = rng::from_seed(4000 + s);
            let m = gen_factor_gaussian(128, 128, 6, 1e-4, &mut g).unwrap();
            let init = random_rows(128, 6, &mut g);
            let one = cross_approx(&m, 6, 6, 6, &init, 1, DEFAULT_H, None, &mut g.clone());
            let five = cross_approx(&m, 6, 6, 6, &init, 5, DEFAULT_H, None, &mut g);
            match (one, five) {
                (Ok((a, _)), Ok((b, _))) => rel_spec(&m, &b) <= rel_spec(&m, &a) * (1.0 + 1e-6),
                _ => false,
            }
        })
        .count();
    assert!(better >= 90, "{better}/100");
}

#[test]
fn cross_approx_stops_early_on_exact_input() {
    let mut g = rng::from_seed(9);
    let m = gen_factor_gaussian(80, 70, 4, 0.0, &mut g).unwrap();
    let init = random_rows(80, 6, &mut g);
    let (c, trace) = cross_approx(&m, 4, 6, 6, &init, 5, DEFAULT_H, Some(1e-8), &mut g).unwrap();
    assert!(trace.stopped_early);
    assert_eq!(trace.loops_run, 1);
    assert!(trace.steps.last().unwrap().error_estimate.unwrap() < 1e-8);
    assert!(rel_spec(&m, &c) <= 1e-9);
}

#[test]
fn cross_approx_access_stays_within_strips() {
    let mut g = rng::from_seed(10);
    let m = gen_factor_gaussian(300, 200, 4, 1e-3, &mut g).unwrap();
    let src = Counting::new(&m);
    let (k, l, loops) = (6, 5, 3);
    let init = random_rows(300, k, &mut g);
    cross_approx(&src, 4, k, l, &init, loops, DEFAULT_H, None, &mut g).unwrap();
    let budget = (loops * (k * 200 + 300 * l) + k * l) as u64;
    assert!(src.reads() <= budget, "{} > {budget}", src.reads());
    assert!(src.reads() < (300 * 200 / 4) as u64);
}

#[test]
fn cross_approx_failure_carries_trace() {
    let m = gen_delta(10, 10, 9, 9).unwrap();
    let mut g = rng::from_seed(0);
    let err = cross_approx(&m, 1, 1, 1, &IndexSet::range(1, 10), 2, DEFAULT_H, None, &mut g).unwrap_err();
    match err {
        Error::SelectionFailure(msg) => assert!(msg.contains("after 0 cross-approximation steps"), "{msg}"),
        other => panic!("unexpected {other}"),
    }
}

#[test]
fn cur_evaluate_exact_is_zero() {
    let mut g = rng::from_seed(11);
    let m = gen_factor_gaussian(50, 40, 3, 0.0, &mut g).unwrap();
    let c = primitive_cur(&m, &random_rows(50, 3, &mut g), &random_rows(40, 3, &mut g), 3).unwrap();
    for which in [Norm::Spectral, Norm::Frobenius, Norm::Chebyshev] {
        assert!(cur_evaluate(&m, &c, which).unwrap() <= 1e-12 * spectral_norm(&m).unwrap() * 10.0);
    }
}

#[test]
fn cur_evaluate_noise_band() {
    let (m_rows, n, r, k) = (128usize, 96usize, 4usize, 8usize);
    let h = DEFAULT_H;
    let mut g = rng::from_seed(12);
    let lowrank = gen_factor_gaussian(m_rows, n, r, 0.0, &mut g).unwrap();
    let noise = rng::gaussian_matrix(m_rows, n, &mut g).scaled(1e-6);
    let eps = spectral_norm(&noise).unwrap();
    let m = lowrank.add(&noise).unwrap();
    let c = cynical_cur(&m, 32, 32, k, k, r, &mut g).unwrap();
    let err = cur_evaluate(&m, &c, Norm::Spectral).unwrap();
    let hi = 10.0 * eps * t_qsh(m_rows, k, h) * t_qsh(n, k, h);
    assert!(err >= eps / 10.0 && err <= hi, "{err:e} outside [{:e}, {hi:e}]", eps / 10.0);
}

#[test]
fn cur_json_round_trip() {
    let mut g = rng::from_seed(13);
    let m = gen_factor_gaussian(30, 20, 2, 0.0, &mut g).unwrap();
    let c = primitive_cur(&m, &random_rows(30, 3, &mut g), &random_rows(20, 2, &mut g), 2).unwrap();
    let back = CurDecomposition::from_json(&c.to_json()).unwrap();
    assert_eq!(back, c);
    assert_eq!(back.nucleus.shape(), (2, 3));
}

fn svd_of(a: &DenseMatrix, r: usize) -> Svd {
    svd(a).unwrap().truncated(r)
}

#[test]
fn lra_to_top_svd_keeps_an_svd() {
    let mut g = rng::from_seed(14);
    let s0 = orthonormal(50, 4, &mut g);
    let t0 = orthonormal(40, 4, &mut g);
    let sigma = [9.0, 4.0, 2.0, 0.5];
    let out = lra_to_top_svd(&s0.scale_cols(&sigma), &DenseMatrix::identity(4), &t0.transpose(), 4).unwrap();
    for (a, b) in out.sigma.iter().zip(sigma) {
        assert!((a - b).abs() <= 1e-12 * 9.0);
    }
    assert!(orthonormality_defect(&out.s) < 1e-12 && orthonormality_defect(&out.t) < 1e-12);
}

#[test]
fn lra_to_top_svd_matches_dense_svd() {
    let mut g = rng::from_seed(15);
    let a = rng::gaussian_matrix(64, 4, &mut g);
    let w = rng::gaussian_matrix(4, 4, &mut g);
    let b = rng::gaussian_matrix(4, 64, &mut g);
    let out = lra_to_top_svd(&a, &w, &b, 4).unwrap();
    let dense = singular_values(&a.matmul(&w).unwrap().matmul(&b).unwrap()).unwrap();
    for i in 0..4 {
        assert!((out.sigma[i] - dense[i]).abs() <= 1e-10 * dense[i]);
    }
}

#[test]
fn lra_to_top_svd_weyl_under_perturbation() {
    let mut g = rng::from_seed(16);
    let (m, n, l, k, r) = (60, 50, 6, 7, 4);
    let a = rng::gaussian_matrix(m, l, &mut g);
    let w = rng::gaussian_matrix(l, k, &mut g);
    let b = rng::gaussian_matrix(k, n, &mut g);
    let prod = a.matmul(&w).unwrap().matmul(&b).unwrap();
    let e = rng::gaussian_matrix(m, n, &mut g).scaled(1e-3);
    let dense = singular_values(&prod.add(&e).unwrap()).unwrap();
    let out = lra_to_top_svd(&a, &w, &b, r).unwrap();
    let e_norm = spectral_norm(&e).unwrap();
    for i in 0..r {
        assert!((out.sigma[i] - dense[i]).abs() <= e_norm * (1.0 + 1e-9));
    }
}

#[test]
fn lra_to_top_svd_reports_rank_deficient_core() {
    let mut g = rng::from_seed(17);
    let a = rng::gaussian_matrix(30, 3, &mut g);
    let w = DenseMatrix::from_diag(&[1.0, 1.0, 0.0]);
    let b = rng::gaussian_matrix(3, 20, &mut g);
    assert!(matches!(lra_to_top_svd(&a, &w, &b, 3), Err(Error::CoreRankFailure { rank: 2, target: 3 })));
}

#[test]
fn top_svd_to_cur_identity_and_nucleus_bound() {
    for s in 0..100u64 {
        let mut g = rng::from_seed(5000 + s);
        let r = 2 + (s % 4) as usize;
        let (m, n) = (70, 55);
        let a = gen_factor_gaussian(m, n, r, 0.0, &mut g).unwrap();
        let top = svd_of(&a, r);
        let k = r + (s % 3) as usize;
        let c = top_svd_to_cur(&a, &top, k, k, DEFAULT_H, Selector::Deterministic, &mut g).unwrap();
        let rec = c.reconstruct(&a).unwrap();
        let sigma1 = top.sigma[0];
        assert!(rec.sub(&top.reconstruct()).unwrap().max_abs() <= 1e-10 * sigma1, "seed {s}");
        let bound = t_qsh(m, k, DEFAULT_H) * t_qsh(n, k, DEFAULT_H) / top.sigma[r - 1];
        assert!(spectral_norm(&c.nucleus).unwrap() <= bound * (1.0 + 1e-6), "seed {s}");
    }
}

#[test]
fn top_svd_to_cur_square_generator() {
    let mut g = rng::from_seed(18);
    let a = gen_factor_gaussian(48, 32, 3, 0.0, &mut g).unwrap();
    let top = svd_of(&a, 3);
    let c = top_svd_to_cur(&a, &top, 3, 3, DEFAULT_H, Selector::Deterministic, &mut g).unwrap();
    let gen = a.submatrix(c.row_set.indices(), c.col_set.indices());
    let inv = pseudo_inverse(&gen, 1e-14).unwrap();
    assert!(inv.sub(&c.nucleus).unwrap().max_abs() <= 1e-9 * inv.max_abs());
    // the transposed-factor form T_𝓙Σ⁻¹S_𝓘ᵀ is not the inverse once S_𝓘 is not orthogonal
    let tj = top.t.select_rows(c.col_set.indices());
    let si = top.s.select_rows(c.row_set.indices());
    let inv_sigma: Vec<f64> = top.sigma.iter().map(|v| 1.0 / v).collect();
    let literal = tj.scale_cols(&inv_sigma).matmul(&si.transpose()).unwrap();
    let lit = CurDecomposition::new(c.row_set.clone(), c.col_set.clone(), literal, 3).unwrap();
    assert!(lit.reconstruct(&a).unwrap().sub(&a).unwrap().max_abs() > 1e-3 * top.sigma[0]);
    assert!(c.reconstruct(&a).unwrap().sub(&a).unwrap().max_abs() <= 1e-10 * top.sigma[0]);
}

#[test]
fn sampled_selector_nucleus_bound() {
    let (m, n, r, delta) = (400usize, 300usize, 3usize, 0.1f64);
    let l = (4.0 * r as f64 * (2.0 * r as f64 / delta).ln()).ceil() as usize + 1;
    let fac = 1.0 + (4.0 * r as f64 * (2.0 * r as f64 / delta).ln() / l as f64).sqrt();
    let held = (0..100u64)
        .into_par_iter()
        .filter(|&s| {
            let mut g = rng::from_seed(6000 + s);
            let a = gen_factor_gaussian(m, n, r, 0.0, &mut g).unwrap();
            let top = svd_of(&a, r);
            let Ok(c) = top_svd_to_cur(&a, &top, l, l, DEFAULT_H, Selector::Sampled, &mut g) else {
                return false;
            };
            let (dr, dc) = c.scaling.clone().unwrap();
            let inv_dc: Vec<f64> = dc.iter().map(|v| 1.0 / v).collect();
            let inv_dr: Vec<f64> = dr.iter().map(|v| 1.0 / v).collect();
            let inner = c.nucleus.scale_rows(&inv_dc).scale_cols(&inv_dr);
            spectral_norm(&inner).unwrap() <= fac * fac / top.sigma[r - 1]
        })
        .count();
    assert!(held >= 90, "{held}/100");
}

#[test]
fn conversion_round_trip_reproduces_lra() {
    let mut g = rng::from_seed(19);
    for r in [1usize, 3, 6] {
        let u = rng::gaussian_matrix(90, r, &mut g);
        let v = rng::gaussian_matrix(r, 70, &mut g);
        let prod = u.matmul(&v).unwrap();
        let top = lra_to_top_svd(&u, &DenseMatrix::identity(r), &v, r).unwrap();
        let c = top_svd_to_cur(&prod, &top, r + 1, r + 2, DEFAULT_H, Selector::Deterministic, &mut g).unwrap();
        let err = c.reconstruct(&prod).unwrap().sub(&prod).unwrap().max_abs();
        assert!(err <= 1e-9 * top.sigma[0], "r = {r}: {err:e}");
    }
}

#[test]
fn random_orthogonal_rows_give_well_conditioned_generators() {
    let mut g = rng::from_seed(20);
    let q = random_orthogonal(32, &mut g).leading_cols(4);
    let set = maxvol_rect(&q, 6, DEFAULT_H, 16).unwrap();
    let smin = *singular_values(&q.select_rows(set.indices())).unwrap().last().unwrap();
    assert!(1.0 / smin <= t_qsh(32, 4, DEFAULT_H));
}
