//! Scenario runner for the phasespace toolkit.
//!
//! A scenario is one TOML document naming a grid, a state, a potential and an
//! experiment. Running it writes a `manifest.json` plus the requested field and
//! table files into its output directory. Everything except `runtime.json` is
//! byte-identical for a fixed config and toolkit version.

pub mod config;
pub mod runner;

use std::path::Path;

pub use config::ScenarioConfig;
pub use runner::{run_scenario, run_scenario_with_workers, RunError, RunOutcome, MANIFEST_FILE, RUNTIME_FILE};

/// Overrides the directory that scenario output directories are created in.
pub const OUTPUT_ROOT_VAR: &str = "PHASESPACE_OUTPUT_ROOT";
/// Overrides the number of worker threads.
pub const WORKERS_VAR: &str = "PHASESPACE_WORKERS";

const BUILTINS: &[(&str, &str)] = &[
    ("ho-roundtrip", include_str!("../scenarios/ho-roundtrip.toml")),
    ("free-spread", include_str!("../scenarios/free-spread.toml")),
    ("quartic-crossval", include_str!("../scenarios/quartic-crossval.toml")),
    ("cat-negativity", include_str!("../scenarios/cat-negativity.toml")),
    ("two-slit", include_str!("../scenarios/two-slit.toml")),
    ("tomo-roundtrip", include_str!("../scenarios/tomo-roundtrip.toml")),
    ("ehrenfest-quartic", include_str!("../scenarios/ehrenfest-quartic.toml")),
    ("ho-moments", include_str!("../scenarios/ho-moments.toml")),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioEntry {
    pub name: &'static str,
    pub description: String,
}

/// Built-in scenarios in a fixed order.
pub fn list_scenarios() -> Vec<ScenarioEntry> {
    BUILTINS
        .iter()
        .map(|(name, _)| ScenarioEntry {
            name,
            description: builtin(name).expect("built-in scenarios parse").description,
        })
        .collect()
}

/// Parsed built-in scenario by name.
pub fn builtin(name: &str) -> Option<ScenarioConfig> {
    BUILTINS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| ScenarioConfig::from_toml(text).expect("built-in scenarios parse"))
}

/// Load `source` as a file path, falling back to a built-in name.
pub fn load(source: &str) -> Result<ScenarioConfig, RunError> {
    let path = Path::new(source);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(RunError::Output)?;
        return ScenarioConfig::from_toml(&text).map_err(|e| RunError::Config(format!("{source}: {e}")));
    }
    builtin(source).ok_or_else(|| RunError::Config(format!("{source}: no such file or built-in scenario")))
}
