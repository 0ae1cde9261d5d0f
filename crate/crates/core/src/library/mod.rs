//! Problem-specific encoders and relaxations: matrix completion,
//! reduced-rank regression and basis pursuit.

mod bp;
mod mc;
mod rrr;

pub use bp::{bp_pairs, bp_reduced_pairs, build_bp_full, build_bp_reduced, RltMode};
pub use mc::{
    build_mc_grouped, build_mc_reduced, coarsen_masks, encode_matrix_completion, group_masks, MaskGroup,
};
pub use rrr::{build_rrr_compact, build_rrr_lifted, encode_rrr, RRRInstance};
