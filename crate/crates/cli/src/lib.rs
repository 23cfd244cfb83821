//! Scenario-driven front end for the open-system simulator: config parsing,
//! run orchestration, CSV/JSON/SVG output, and automated run comparison.

pub mod compare;
pub mod config;
pub mod csvio;
pub mod error;
pub mod presets;
pub mod scenario;
pub mod svg;

use std::path::PathBuf;

/// Environment variable that, when set, re-roots all output directories.
pub const OUTPUT_ROOT_ENV: &str = "QME_OUTPUT_ROOT";

/// Resolve the output directory for a config, honoring the root override.
pub fn resolve_output_dir(configured: &str) -> PathBuf {
    match std::env::var_os(OUTPUT_ROOT_ENV) {
        Some(root) if !root.is_empty() => PathBuf::from(root).join(configured),
        _ => PathBuf::from(configured),
    }
}
