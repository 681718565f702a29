//! IO, file formats and the command line around `gaze-core`.

pub mod canonical;
pub mod interchange;
pub mod metadata;
pub mod pipeline;
pub mod reports;
pub mod synthetic;
pub mod vectors;
pub mod wordsets;
