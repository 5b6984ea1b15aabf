//! Dataset directories and homophily-controlled synthetic graphs.
//!
//! A dataset directory holds `manifest.json`, one CSV feature file, one
//! undirected edge list per view, and an optional labels file. See
//! [`DatasetManifest`] for the manifest schema.

mod load;
mod manifest;
mod synth;

pub use load::{load_dataset, min_max_scale, write_dataset, Dataset};
pub use manifest::{DatasetManifest, MANIFEST_FILE};
pub use synth::{generate_synthetic, max_feasible_edges, SynthSpec};
