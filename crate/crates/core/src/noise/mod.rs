//! Space-time white noise, mollification, the truncated heat kernel and the
//! renormalisation constants built from them.

pub mod kernel;
pub mod mollifier;
pub mod quad;
pub mod renorm;
pub mod white;

pub use kernel::TruncatedHeatKernel;
pub use mollifier::{mollify, LatticeMollifier, MollifiedSequence, MollifiedStream, Mollifier, MollifierProfile};
pub use renorm::{bar_c_2d, check_c_2d, renorm_constants, CheckC, QuadConfig, RenormConstants};
pub use white::{coords_to_field, sample_white_noise, stream_rng, CoordField, NoiseStream, WhiteNoise};
