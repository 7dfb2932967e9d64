//! Free groups as reduced words, their isometric representations on the
//! model spaces, and orbit pseudo-metrics.

pub mod isometry;
pub mod representation;
pub mod word;

pub use isometry::Isometry;
pub use representation::{orbit_distance, RepKind, Representation, RepresentationSpec};
pub use word::{ball_size, enumerate_ball, Alphabet, Letter, ShortlexBall, Word};
