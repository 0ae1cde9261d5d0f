mod common;

use common::Gen;
use lowrank_lift::linalg::{
    block_diag_sum, commutation_matrix, eig_sym, kron_identity_left, pseudoinverse, psd_project, truncated_svd, vec,
    vec_t, BlockView, SymMatrix,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn column_stack(x: &DMatrix<f64>) -> Vec<f64> {
    let mut out = Vec::new();
    for j in 0..x.ncols() {
        for i in 0..x.nrows() {
            out.push(x[(i, j)]);
        }
    }
    out
}

#[test]
fn vec_t_on_small_inputs() {
    assert_eq!(vec_t(&DMatrix::from_element(1, 1, 5.0)), vec![5.0]);
    let x = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
    assert_eq!(vec_t(&x), vec![1.0, 2.0, 3.0, 4.0]);
    assert_eq!(vec(&x), vec![1.0, 3.0, 2.0, 4.0]);
}

#[test]
fn kron_identity_small() {
    let s = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
    assert_eq!(kron_identity_left(1, &s).as_matrix(), &s);
    let k = kron_identity_left(2, &s);
    let k = k.as_matrix();
    assert_eq!(k.view((0, 0), (2, 2)), s.view((0, 0), (2, 2)));
    assert_eq!(k.view((2, 2), (2, 2)), s.view((0, 0), (2, 2)));
    assert!(k.view((0, 2), (2, 2)).iter().all(|&v| v == 0.0));
    assert!(k.view((2, 0), (2, 2)).iter().all(|&v| v == 0.0));
}

#[test]
fn commutation_is_orthogonal() {
    for n in 1..=4 {
        let k = commutation_matrix(n);
        let k = k.as_matrix();
        assert!((k * k.transpose() - DMatrix::identity(n * n, n * n)).amax() == 0.0);
        assert!(k.iter().all(|&v| v == 0.0 || v == 1.0));
    }
}

#[test]
fn pseudoinverse_examples() {
    let i3 = DMatrix::<f64>::identity(3, 3);
    assert!((pseudoinverse(&i3) - &i3).amax() < 1e-14);
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 0.0]));
    let p = pseudoinverse(&d);
    assert!((p[(0, 0)] - 0.5).abs() < 1e-14 && p[(1, 1)] == 0.0);
}

#[test]
fn eig_and_projection_examples() {
    let e = eig_sym(&SymMatrix::diagonal(&[3.0, 1.0])).unwrap();
    assert!((e.values[0] - 1.0).abs() < 1e-14 && (e.values[1] - 3.0).abs() < 1e-14);
    let z = eig_sym(&SymMatrix::zeros(3)).unwrap();
    assert!(z.values.iter().all(|&v| v == 0.0));
    let p = psd_project(&SymMatrix::diagonal(&[1.0, -2.0])).unwrap();
    assert!(p.max_abs_diff(&SymMatrix::diagonal(&[1.0, 0.0])) < 1e-14);
}

#[test]
fn block_diag_sum_examples() {
    let w = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
    let one = block_diag_sum(&BlockView::square(&w, 2).unwrap()).unwrap();
    assert_eq!(one, w);
    let grid = block_diag_sum(&BlockView::square(&w, 1).unwrap()).unwrap();
    assert_eq!(grid[(0, 0)], 5.0);
}

proptest! {
    #[test]
    fn vec_t_matches_transpose_then_stack(seed in any::<u64>(), n in 1usize..5, m in 1usize..5) {
        let x = Gen::new(seed).gaussian(n, m);
        prop_assert_eq!(vec_t(&x), column_stack(&x.transpose()));
        prop_assert_eq!(vec(&x), vec_t(&x.transpose()));
        // vec and vec_t differ by a fixed permutation
        let perm: Vec<usize> = (0..n * m).map(|k| (k % n) * m + k / n).collect();
        let vt = vec_t(&x);
        let permuted: Vec<f64> = perm.iter().map(|&p| vt[p]).collect();
        prop_assert_eq!(vec(&x), permuted);
    }

    #[test]
    fn commutation_transposes(seed in any::<u64>(), n in 1usize..6) {
        let y = Gen::new(seed).gaussian(n, n);
        let k = commutation_matrix(n);
        let lhs = k.as_matrix() * nalgebra::DVector::from_vec(vec(&y));
        let rhs = vec(&y.transpose());
        prop_assert!(lhs.iter().zip(&rhs).all(|(a, b)| a == b));
    }

    #[test]
    fn kron_identity_acts_columnwise(seed in any::<u64>(), n in 1usize..5, m in 1usize..5, p in 1usize..5) {
        let mut g = Gen::new(seed);
        let s = g.gaussian(n, p);
        let x = g.gaussian(p, m);
        let lhs = kron_identity_left(m, &s).as_matrix() * nalgebra::DVector::from_vec(vec(&x));
        let rhs = column_stack(&(&s * &x));
        for (a, b) in lhs.iter().zip(&rhs) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn pseudoinverse_residuals(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        // rank two, 4 x 3
        let m = g.gaussian(4, 2) * g.gaussian(2, 3);
        let p = pseudoinverse(&m);
        let tol = 1e-8 * (1.0 + m.norm());
        prop_assert!((&m * &p * &m - &m).amax() < tol);
        prop_assert!((&p * &m * &p - &p).amax() < tol * (1.0 + p.norm()));
        let mp = &m * &p;
        let pm = &p * &m;
        prop_assert!((&mp - mp.transpose()).amax() < tol);
        prop_assert!((&pm - pm.transpose()).amax() < tol);
    }

    #[test]
    fn eigendecomposition_reassembles(seed in any::<u64>(), n in 1usize..7) {
        let a = Gen::new(seed).symmetric(n);
        let e = eig_sym(&SymMatrix::from_dense_symmetrized(&a)).unwrap();
        let tol = 1e-10 * (1.0 + a.norm());
        prop_assert!((e.reconstruct() - &a).amax() < tol);
        prop_assert!((e.vectors.transpose() * &e.vectors - DMatrix::identity(n, n)).amax() < 1e-10);
        prop_assert!(e.values.as_slice().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn projection_is_nearest_psd(seed in any::<u64>(), n in 1usize..6) {
        let mut g = Gen::new(seed);
        let a = g.symmetric(n);
        let sa = SymMatrix::from_dense_symmetrized(&a);
        let p = psd_project(&sa).unwrap();
        let pd = p.to_dense();
        prop_assert!(psd_project(&p).unwrap().max_abs_diff(&p) < 1e-10);
        let best = (&a - &pd).norm();
        // no PSD perturbation of the result is closer
        for _ in 0..20 {
            let dir = g.symmetric(n) * 1e-3;
            let cand = psd_project(&SymMatrix::from_dense_symmetrized(&(&pd + dir))).unwrap().to_dense();
            prop_assert!((&a - cand).norm() >= best - 1e-12);
        }
    }

    #[test]
    fn truncation_error_is_discarded_spectrum(seed in any::<u64>()) {
        let a = Gen::new(seed).gaussian(5, 4);
        let t = truncated_svd(&a, 2).unwrap();
        let err = (&a - t.reconstruct()).norm_squared();
        // squared singular values are the eigenvalues of A^T A
        let ev = eig_sym(&SymMatrix::from_dense_symmetrized(&(a.transpose() * &a))).unwrap();
        let discarded: f64 = ev.values.iter().take(2).sum();
        prop_assert!((err - discarded).abs() < 1e-9 * (1.0 + discarded));
        prop_assert!((t.u.transpose() * &t.u - DMatrix::identity(2, 2)).amax() < 1e-10);
        prop_assert!((t.v.transpose() * &t.v - DMatrix::identity(2, 2)).amax() < 1e-10);
        prop_assert!(t.s[0] >= t.s[1] && t.s[1] >= 0.0);
        for col in t.u.column_iter() {
            let top = col.iter().cloned().fold(0.0f64, |acc, v| if v.abs() > acc.abs() { v } else { acc });
            prop_assert!(top >= 0.0);
        }
        let full = truncated_svd(&a, 4).unwrap();
        prop_assert!((full.reconstruct() - &a).amax() < 1e-10);
    }

    #[test]
    fn block_diag_sum_matches_slicing(seed in any::<u64>()) {
        let w = Gen::new(seed).gaussian(6, 6);
        let s = block_diag_sum(&BlockView::square(&w, 2).unwrap()).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                let direct = w[(a, b)] + w[(2 + a, 2 + b)] + w[(4 + a, 4 + b)];
                prop_assert!((s[(a, b)] - direct).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn coupling_block_implies_schur_bound(seed in any::<u64>(), n in 1usize..4, m in 1usize..4) {
        // random PSD [[T, X^T], [X, Y]] gives Y >= X T^+ X^T
        let mut g = Gen::new(seed);
        let f = g.gaussian(n + m, n + m + 1);
        let big = &f * f.transpose();
        let t = big.view((0, 0), (m, m)).into_owned();
        let x = big.view((m, 0), (n, m)).into_owned();
        let y = big.view((m, m), (n, n)).into_owned();
        let schur = y - &x * pseudoinverse(&t) * x.transpose();
        let e = eig_sym(&SymMatrix::from_dense_symmetrized(&schur)).unwrap();
        prop_assert!(e.values[0] > -1e-8 * (1.0 + big.norm()));
    }
}
