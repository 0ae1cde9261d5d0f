//! Dense linear algebra with the vectorization and block conventions used
//! by the lifted relaxations.

mod decomp;
mod dense;
mod ops;
mod sym;

pub use decomp::{
    eig_sym, eig_sym_dense, min_eigenvalue, pseudoinverse, pseudoinverse_dense, psd_project,
    psd_project_dense, truncated_svd, SymEigen, TruncatedSvd, PINV_RELATIVE_CUTOFF,
};
pub use dense::DenseMatrix;
pub use ops::{
    block_diag_sum, commutation_index, commutation_matrix, kron_identity_left, unvec, unvec_t,
    vec, vec_t, BlockView,
};
pub use sym::SymMatrix;
