mod common;

use common::*;
use proptest::prelude::*;
use tensvd::{DenseTensor, Matrix};

#[test]
fn mode_two_product_matches_triple_loop() {
    let mut r = rng(1);
    let t = random_tensor(&mut r, &[3, 4, 2]);
    let u = random_matrix(&mut r, 5, 4);
    let y = t.mode_n_product(&u, 1).unwrap();
    assert_eq!(y.dims(), &[3, 5, 2]);
    for i in 0..3 {
        for h in 0..5 {
            for k in 0..2 {
                let expect: f64 = (0..4)
                    .map(|j| u.get(h, j) * t.data()[offset(&[3, 4, 2], &[i, j, k])])
                    .sum();
                let got = y.data()[offset(&[3, 5, 2], &[i, h, k])];
                assert!((got - expect).abs() < 1e-13);
            }
        }
    }
}

#[test]
fn unfolding_matches_fiber_enumeration() {
    // Column of element (i_1..i_N) in the mode-n unfolding, straight from the
    // Kolda–Bader definition.
    let mut r = rng(2);
    let dims = [3, 2, 4, 2];
    let t = random_tensor(&mut r, &dims);
    for mode in 0..dims.len() {
        let m = t.unfold(mode).unwrap();
        for idx in indices(&dims) {
            let mut col = 0;
            let mut stride = 1;
            for k in 0..dims.len() {
                if k == mode {
                    continue;
                }
                col += idx[k] * stride;
                stride *= dims[k];
            }
            assert_eq!(m.get(idx[mode], col), t.data()[offset(&dims, &idx)]);
        }
    }
}

#[test]
fn fold_round_trip_3x4x5() {
    let mut r = rng(3);
    let t = random_tensor(&mut r, &[3, 4, 5]);
    let back = DenseTensor::fold(&t.unfold(1).unwrap(), 1, t.dims()).unwrap();
    assert_eq!(back, t);
}

#[test]
fn multilinear_rank_examples() {
    let mut r = rng(4);
    let a: Vec<f64> = (0..4).map(|_| r.gen_range(-1.0..1.0)).collect();
    let b: Vec<f64> = (0..5).map(|_| r.gen_range(-1.0..1.0)).collect();
    let c: Vec<f64> = (0..6).map(|_| r.gen_range(-1.0..1.0)).collect();
    let rank_one = DenseTensor::from_fn(vec![4, 5, 6], |i| a[i[0]] * b[i[1]] * c[i[2]]).unwrap();
    assert_eq!(rank_one.multilinear_rank(), vec![1, 1, 1]);

    let full = random_tensor(&mut r, &[3, 4, 5]);
    assert_eq!(full.multilinear_rank(), vec![3, 4, 5]);
    // cross-check with the oracle's singular values of each unfolding
    for mode in 0..3 {
        let sv = jacobi_singular_values(&to_rows(&full.unfold(mode).unwrap()));
        assert!(sv.iter().all(|&s| s > 1e-6));
    }
}

use rand::Rng;

fn shape_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..5, 1..=5)
}

fn tensor_strategy() -> impl Strategy<Value = DenseTensor> {
    shape_strategy().prop_flat_map(|dims| {
        let n: usize = dims.iter().product();
        prop::collection::vec(-10.0f64..10.0, n)
            .prop_map(move |data| DenseTensor::new(dims.clone(), data).unwrap())
    })
}

fn close(a: &DenseTensor, b: &DenseTensor, tol: f64) -> bool {
    a.dims() == b.dims() && max_rel_diff(a.data(), b.data()) <= tol
}

proptest! {
    #[test]
    fn fold_unfold_round_trip(t in tensor_strategy()) {
        for mode in 0..t.order() {
            let back = DenseTensor::fold(&t.unfold(mode).unwrap(), mode, t.dims()).unwrap();
            prop_assert_eq!(&back, &t);
        }
    }

    #[test]
    fn product_chain(t in tensor_strategy(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let mode = seed as usize % t.order();
        let dim = t.dims()[mode];
        let a = random_matrix(&mut r, 3, dim);
        let b = random_matrix(&mut r, 2, 3);
        let lhs = t.mode_n_product(&a, mode).unwrap().mode_n_product(&b, mode).unwrap();
        let rhs = t.mode_n_product(&b.matmul(&a).unwrap(), mode).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn distinct_modes_commute(t in tensor_strategy().prop_filter("order ≥ 2", |t| t.order() >= 2), seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_matrix(&mut r, 2, t.dims()[0]);
        let b = random_matrix(&mut r, 3, t.dims()[1]);
        let lhs = t.mode_n_product(&a, 0).unwrap().mode_n_product(&b, 1).unwrap();
        let rhs = t.mode_n_product(&b, 1).unwrap().mode_n_product(&a, 0).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn norm_is_self_inner_product(t in tensor_strategy()) {
        let n2 = t.frobenius_norm().powi(2);
        let ip = t.inner_product(&t).unwrap();
        prop_assert!(rel_close(n2, ip, 1e-12) || (n2 == 0.0 && ip == 0.0));
    }

    #[test]
    fn mode_product_equals_fold_of_matrix_product(t in tensor_strategy(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let mode = seed as usize % t.order();
        let u = random_matrix(&mut r, 4, t.dims()[mode]);
        let mut dims = t.dims().to_vec();
        dims[mode] = 4;
        let via_unfold = DenseTensor::fold(&u.matmul(&t.unfold(mode).unwrap()).unwrap(), mode, &dims).unwrap();
        prop_assert!(close(&t.mode_n_product(&u, mode).unwrap(), &via_unfold, 1e-12));
    }
}

#[test]
fn matrix_helpers() {
    let m = Matrix::from_rows(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]]).unwrap();
    assert_eq!(
        to_rows(&m.transpose()),
        vec![vec![1.0, 4.0], vec![2.0, 5.0], vec![3.0, 6.0]]
    );
    assert!(m.matmul(&m).is_err());
    assert_eq!(m.leading_columns(2).cols(), 2);
}
