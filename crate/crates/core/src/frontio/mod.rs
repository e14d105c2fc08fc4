//! Configuration, wavefront export and the jobs behind the `emfront` CLI.

pub mod config;
pub mod jobs;
pub mod mesh;

pub use config::{JobConfig, Output};
pub use jobs::{exit_code, JobOutcome, Status};
pub use mesh::{MeshFile, Side};
