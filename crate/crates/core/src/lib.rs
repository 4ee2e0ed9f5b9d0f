pub mod cli;
pub mod curves;
pub mod determining;
pub mod error;
pub mod linmap;
pub mod linalg;
pub mod lp;
pub mod random;
pub mod scalar;
pub mod space;
pub mod systems;
