//! Bundled scenario presets, one per reproduced figure. Each is an ordinary
//! config file embedded at compile time; `presets list` prints them and
//! `presets run <name>` executes one.

use crate::config::ScenarioConfig;
use crate::error::CliError;

pub const PRESETS: [(&str, &str); 6] = [
    ("fig2", include_str!("../presets/fig2.toml")),
    ("fig3", include_str!("../presets/fig3.toml")),
    ("fig4", include_str!("../presets/fig4.toml")),
    ("fig6", include_str!("../presets/fig6.toml")),
    ("fig7", include_str!("../presets/fig7.toml")),
    ("fig8", include_str!("../presets/fig8.toml")),
];

pub fn names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

pub fn get(name: &str) -> Result<ScenarioConfig, CliError> {
    let (_, text) = PRESETS.iter().find(|(n, _)| *n == name).ok_or_else(|| {
        CliError::Config(format!(
            "unknown preset `{name}`; available: {}",
            names().join(", ")
        ))
    })?;
    ScenarioConfig::from_toml(text)
}

/// One-line description scraped from the preset's leading comment.
pub fn describe(name: &str) -> String {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| {
            text.lines()
                .take_while(|l| l.starts_with('#'))
                .map(|l| l.trim_start_matches('#').trim())
                .collect::<Vec<_>>()
                .join(" ")
        })
        .unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_parse_and_validate() {
        for name in names() {
            let config = get(name).unwrap_or_else(|e| panic!("preset {name}: {e}"));
            config.validate().unwrap();
            assert!(!describe(name).is_empty());
        }
    }
}
