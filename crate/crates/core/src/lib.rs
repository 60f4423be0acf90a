pub mod error;
pub mod hardy;
pub mod jet;
pub mod koebe;
pub mod lab;
pub mod param;
pub mod quad;
pub mod render;
pub mod roots;
pub mod schwarzian;
pub mod shearing;

pub use error::{HqcError, Result};
pub use jet::{dilatation_and_jacobian, HarmonicJet, HarmonicMap, Identity};
pub use param::{param_convert, DilatationParam, Direction, DiskPoint};
