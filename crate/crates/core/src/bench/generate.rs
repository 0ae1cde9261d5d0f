use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::problem::ObservedMatrix;
use crate::rng::{seeded, BoxMuller};

/// `A = U V + eps Z` with standard normal `U` (n x r), `V` (r x m) and `Z`,
/// observed on `round(p n m)` positions chosen by a seeded shuffle.
///
/// One ChaCha8 stream per seed feeds, in order, `U`, `V`, `Z` (row-major,
/// Box-Muller) and then the shuffle.
pub fn generate_instance(n: usize, m: usize, r: usize, eps: f64, p: f64, seed: u64) -> Result<ObservedMatrix> {
    if r == 0 || r > n.min(m) {
        return Err(Error::InvalidArgument(format!(
            "planted rank {r} must lie in [1, {}]",
            n.min(m)
        )));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidArgument(format!("observation fraction {p} not in (0, 1]")));
    }
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!("noise level {eps} must be nonnegative")));
    }
    let mut rng = seeded(seed);
    let mut normal = BoxMuller::new();
    let u = normal.matrix(&mut rng, n, r);
    let v = normal.matrix(&mut rng, r, m);
    let z = normal.matrix(&mut rng, n, m);
    let a = u * v + z * eps;

    let mut cells: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..m).map(move |j| (i, j))).collect();
    cells.shuffle(&mut rng);
    let count = ((p * (n * m) as f64).round() as usize).min(n * m);
    cells.truncate(count);
    ObservedMatrix::new(DenseMatrix::from(a), cells)
}
