//! Operator application, the exact discrete adjoint, dyadic pieces and kernels.

mod apply;
mod dyadic;
mod kernel;

pub use apply::{adjoint_general, apply_general, apply_psido, discrete_adjoint_apply, general_path_cap};
pub use dyadic::{default_levels, dyadic_decompose, eta, zeta, DyadicDecomposition};
pub use kernel::{kernel_piece, kernel_sum, offsupport_apply, Kernel, KernelPieces, SUPPORT_THRESHOLD};
