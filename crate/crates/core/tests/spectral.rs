mod common;

use common::*;
use tensvd::svd::{direct_left_singular_vectors, gram_matrix, leading_left_singular_vectors};
use tensvd::Matrix;

#[test]
fn gram_matches_double_loop() {
    let mut r = rng(10);
    let m = random_matrix(&mut r, 4, 50);
    let g = gram_matrix(&m);
    let rows = to_rows(&m);
    for i in 0..4 {
        for j in 0..4 {
            let expect: f64 = (0..50).map(|k| rows[i][k] * rows[j][k]).sum();
            assert!((g.get(i, j) - expect).abs() < 1e-12);
        }
    }
}

#[test]
fn singular_values_match_jacobi_oracle() {
    let mut r = rng(11);
    for _ in 0..20 {
        let m = random_matrix(&mut r, 5, 40);
        let res = leading_left_singular_vectors(&m, 5).unwrap();
        let oracle = jacobi_singular_values(&to_rows(&m));
        for (s, o) in res.singular_values().iter().zip(&oracle) {
            assert!(rel_close(*s, *o, 1e-8), "{s} vs {o}");
        }
        // full rank: U Uᵀ m ≈ m
        let u = &res.vectors;
        let proj = u.matmul(&u.transpose().matmul(&m).unwrap()).unwrap();
        assert!(max_rel_diff(m.data(), proj.data()) < 1e-10);
        assert!(u.orthonormality_defect() < 1e-8);
        // trace identity
        let energy: f64 = m.data().iter().map(|v| v * v).sum();
        assert!(rel_close(res.values.iter().sum(), energy, 1e-10));
    }
}

#[test]
fn direct_and_gram_routes_agree() {
    let mut r = rng(12);
    for _ in 0..10 {
        let m = random_matrix(&mut r, 6, 30);
        let a = leading_left_singular_vectors(&m, 3).unwrap();
        let b = direct_left_singular_vectors(&m, 3).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!(rel_close(*x, *y, 1e-7));
        }
        assert!(max_principal_angle(&to_rows(&a.vectors), &to_rows(&b.vectors)) < 1e-6);
    }
}

#[test]
fn repeated_singular_values_span_the_oracle_subspace() {
    // m = Q · diag(2, 2, 1) · Wᵀ with random orthonormal Q (3×3) and W (3×12)
    let mut r = rng(13);
    let q = orthonormal(&mut r, 3, 3);
    let w = orthonormal(&mut r, 12, 3);
    let s = Matrix::from_rows(&[&[2.0, 0.0, 0.0], &[0.0, 2.0, 0.0], &[0.0, 0.0, 1.0]]).unwrap();
    let m = q.matmul(&s).unwrap().matmul(&w.transpose()).unwrap();
    let res = leading_left_singular_vectors(&m, 2).unwrap();
    assert!(rel_close(res.values[0], 4.0, 1e-10) && rel_close(res.values[1], 4.0, 1e-10));
    let (u_oracle, sigma) = jacobi_svd(&to_rows(&m));
    assert!(rel_close(sigma[0], 2.0, 1e-10) && rel_close(sigma[1], 2.0, 1e-10));
    let oracle2: Vec<Vec<f64>> = u_oracle.iter().map(|row| row[..2].to_vec()).collect();
    assert!(max_principal_angle(&to_rows(&res.vectors), &oracle2) < 1e-6);
}

fn orthonormal(r: &mut impl rand::Rng, rows: usize, cols: usize) -> Matrix {
    let mut m = random_matrix(r, rows, cols);
    for c in 0..cols {
        for p in 0..c {
            let prev = m.column(p).to_vec();
            let dot: f64 = prev.iter().zip(m.column(c)).map(|(a, b)| a * b).sum();
            for (x, y) in m.column_mut(c).iter_mut().zip(&prev) {
                *x -= dot * y;
            }
        }
        let n = m.column(c).iter().map(|v| v * v).sum::<f64>().sqrt();
        m.column_mut(c).iter_mut().for_each(|v| *v /= n);
    }
    m
}
