mod common;

use factorkde::copula_kde::fit_pair;
use factorkde::kernel::{bandwidth_cdf, bandwidth_copula, KernelSpec};
use factorkde::marginal::fit_marginal;
use factorkde::metrics::{aggregate, replication_errors, ReplicationErrors};
use factorkde::{compute_proxy, rmsd, scree_eigenvalues, CopulaFamily, UniformMatrix};
use ndarray::Array2;
use proptest::prelude::*;

const Q: KernelSpec = KernelSpec::Quartic;

fn family() -> impl Strategy<Value = CopulaFamily> {
    prop_oneof![
        Just(CopulaFamily::Independence),
        (1.0..6.0f64).prop_map(|t| CopulaFamily::gumbel(t).unwrap()),
        (0.05..8.0f64).prop_map(|t| CopulaFamily::clayton(t).unwrap()),
    ]
}

fn open_unit() -> impl Strategy<Value = f64> {
    1e-4..(1.0 - 1e-4)
}

fn uniform_matrix(n: usize, d: usize) -> impl Strategy<Value = UniformMatrix> {
    prop::collection::vec(open_unit(), n * d).prop_map(move |v| UniformMatrix::from_vec(n, d, v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_is_even_and_integrates_symmetrically(s in -2.0..2.0f64) {
        prop_assert_eq!(Q.eval(s), Q.eval(-s));
        prop_assert!(Q.eval(s) >= 0.0);
        prop_assert!((Q.integrated(s) + Q.integrated(-s) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bandwidths_scale_exactly_with_powers_of_two(
        data in prop::collection::vec(-5.0..5.0f64, 8..60),
        other in prop::collection::vec(-5.0..5.0f64, 60),
        k in -4i32..5,
    ) {
        let lambda = 2f64.powi(k);
        let scaled: Vec<f64> = data.iter().map(|x| x * lambda).collect();
        prop_assert_eq!(bandwidth_cdf(&scaled).unwrap(), lambda * bandwidth_cdf(&data).unwrap());
        let other = &other[..data.len()];
        let other_scaled: Vec<f64> = other.iter().map(|x| x * lambda).collect();
        let b = bandwidth_copula(&data, other).unwrap();
        let bs = bandwidth_copula(&scaled, &other_scaled).unwrap();
        prop_assert_eq!(bs.b1, lambda * b.b1);
    }

    #[test]
    fn bandwidths_scale_with_any_factor(
        data in prop::collection::vec(-5.0..5.0f64, 8..60),
        lambda in 0.01..100.0f64,
    ) {
        let scaled: Vec<f64> = data.iter().map(|x| x * lambda).collect();
        let a = bandwidth_cdf(&scaled).unwrap();
        let b = lambda * bandwidth_cdf(&data).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * b);
    }

    #[test]
    fn kernel_cdf_is_monotone(
        data in prop::collection::vec(-3.0..3.0f64, 5..80),
        a in -4.0..4.0f64,
        b in -4.0..4.0f64,
    ) {
        let fit = fit_marginal(&data, Q).unwrap();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (fl, fh) = (fit.eval_cdf(lo), fit.eval_cdf(hi));
        prop_assert!(fl <= fh && (0.0..=1.0).contains(&fl) && (0.0..=1.0).contains(&fh));
    }

    #[test]
    fn h_inverse_round_trips(fam in family(), w in open_unit(), v in open_unit()) {
        let u = fam.h_inverse(w, v).unwrap();
        prop_assert!((fam.h_function(u, v).unwrap() - w).abs() < 1e-9);
    }

    #[test]
    fn densities_are_nonnegative(fam in family(), u in open_unit(), v in open_unit()) {
        let c = fam.density(u, v).unwrap();
        prop_assert!(c >= 0.0 && c.is_finite());
    }

    #[test]
    fn proxy_is_invariant_to_column_permutation(u in uniform_matrix(30, 4), seed in 0u64..1000) {
        let mut perm = vec![0, 1, 2, 3];
        perm.rotate_left((seed % 4) as usize);
        perm.swap(0, (seed / 4 % 4) as usize);
        prop_assert_eq!(compute_proxy(&u).unwrap(), compute_proxy(&u.select_columns(&perm).unwrap()).unwrap());
    }

    #[test]
    fn swapped_pair_fit_is_exchangeable(u in uniform_matrix(40, 2), x in 0.0..1.0f64, y in 0.0..1.0f64) {
        let (a, b) = (u.column_vec(0), u.column_vec(1));
        let f = fit_pair(&a, &b).unwrap();
        let g = fit_pair(&b, &a).unwrap();
        prop_assert_eq!(f.eval_density(x, y).to_bits(), g.eval_density(y, x).to_bits());
        let c = f.eval_density(x, y);
        prop_assert!((0.0..=f.cap()).contains(&c));
    }

    #[test]
    fn replication_error_decomposition(
        pairs in prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), 1..50),
    ) {
        let (est, truth): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let r = replication_errors(&est, &truth).unwrap();
        let e: Vec<f64> = est.iter().zip(&truth).map(|(a, b)| a - b).collect();
        let m = e.len() as f64;
        let pop_var = e.iter().map(|x| (x - r.mean_err).powi(2)).sum::<f64>() / m;
        prop_assert!((r.rmse.powi(2) - (r.mean_err.powi(2) + pop_var)).abs() <= 1e-10 * r.rmse.powi(2).max(1.0));
        prop_assert!(r.mae <= r.rmse * (1.0 + 1e-12));
        prop_assert_eq!(rmsd(&est, &truth).unwrap().to_bits(), r.rmse.to_bits());

        let dup = |v: &[f64]| v.iter().flat_map(|&x| [x, x]).collect::<Vec<f64>>();
        let d = replication_errors(&dup(&est), &dup(&truth)).unwrap();
        prop_assert!((d.rmse - r.rmse).abs() <= 1e-12 * r.rmse.max(1.0));
        prop_assert!((d.mae - r.mae).abs() <= 1e-12 * r.mae.max(1.0));
        prop_assert!((d.mean_err - r.mean_err).abs() <= 1e-12 * r.mae.max(1.0));
    }

    #[test]
    fn aggregate_ignores_replication_order(
        reps in prop::collection::vec((0.0..5.0f64, 0.0..5.0f64, -5.0..5.0f64), 2..30),
        rot in 0usize..30,
    ) {
        let reps: Vec<ReplicationErrors> = reps
            .into_iter()
            .map(|(rmse, mae, mean_err)| ReplicationErrors { rmse, mae, mean_err })
            .collect();
        let mut shuffled = reps.clone();
        shuffled.rotate_left(rot % reps.len());
        shuffled.reverse();
        prop_assert_eq!(aggregate(&reps).unwrap(), aggregate(&shuffled).unwrap());
    }

    #[test]
    fn scree_is_rank_based(u in uniform_matrix(25, 4)) {
        let warped = UniformMatrix::new(u.view().mapv(|x| 0.5 * (x + x * x))).unwrap();
        match scree_eigenvalues(&u) {
            Ok(e) => {
                prop_assert!((e.iter().sum::<f64>() - 4.0).abs() < 1e-8);
                prop_assert!(e.windows(2).all(|w| w[0] >= w[1]));
                prop_assert_eq!(e, scree_eigenvalues(&warped).unwrap());
            }
            // shrinking can reach constant columns
            Err(_) => prop_assert!(scree_eigenvalues(&warped).is_err()),
        }
    }
}

#[test]
fn scree_of_independent_columns_is_flat() {
    let u = common::independent_uniforms(5000, 6, 3);
    let e = scree_eigenvalues(&u).unwrap();
    assert!(e.iter().all(|x| (x - 1.0).abs() < 0.2), "{e:?}");
}

#[test]
fn scree_of_comonotone_columns() {
    let col = common::independent_uniforms(200, 1, 4).column_vec(0);
    let u = UniformMatrix::new(Array2::from_shape_fn((200, 5), |(i, j)| col[i].powf(1.0 / (1.0 + j as f64)))).unwrap();
    let e = scree_eigenvalues(&u).unwrap();
    assert!((e[0] - 5.0).abs() < 1e-10);
    assert!(e[1..].iter().all(|x| x.abs() < 1e-10));
}
