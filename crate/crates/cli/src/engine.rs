use std::fs;

use anyhow::{Context, Result};
use scaffolding_core::scaffold::{EngineConfig, ScaffoldKind};

use crate::args::EngineArgs;
use crate::manifest::ManifestBuilder;

/// Defaults, then the config file, then flags. Explicit flags are recorded
/// as manifest overrides.
pub fn engine_config(args: &EngineArgs, manifest: &mut ManifestBuilder) -> Result<EngineConfig> {
    let mut cfg = match &args.engine_config {
        Some(path) => {
            let src = fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            EngineConfig::from_toml(&src).with_context(|| format!("{}", path.display()))?
        }
        None => EngineConfig::default(),
    };
    manifest.input("engine_config", args.engine_config.as_deref());
    if let Some(v) = args.min_inter_scaffold {
        cfg.min_inter_scaffold_seconds = v;
        manifest.override_flag("min-inter-scaffold", v);
    }
    if let Some(v) = args.long_read_seconds {
        cfg.long_threshold_seconds = v;
        manifest.override_flag("long-read-seconds", v);
    }
    if let Some(v) = args.hint1_window_events {
        cfg.hint1_window_events = v;
        manifest.override_flag("hint1-window-events", v);
    }
    if let Some(v) = args.hint1_window_seconds {
        cfg.hint1_window_seconds = v;
        manifest.override_flag("hint1-window-seconds", v);
    }
    if let Some(v) = args.enc3_every {
        cfg.enc3_every = v;
        manifest.override_flag("enc3-every", v);
    }
    if let Some(v) = args.hint3_min_unmarked {
        cfg.hint3_min_unmarked = v;
        manifest.override_flag("hint3-min-unmarked", v);
    }
    for name in &args.disable {
        let kind: ScaffoldKind = name
            .parse()
            .map_err(|e| anyhow::anyhow!("--disable: {e}"))?;
        cfg.enabled.insert(kind, false);
    }
    if !args.disable.is_empty() {
        manifest.override_flag("disable", &args.disable);
    }
    cfg.validate()?;
    manifest.config("engine", &cfg);
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_defaults() {
        let args = EngineArgs {
            min_inter_scaffold: Some(90.0),
            disable: vec!["hint4".into()],
            ..EngineArgs::default()
        };
        let mut m = ManifestBuilder::new("test");
        let cfg = engine_config(&args, &mut m).unwrap();
        assert_eq!(cfg.min_inter_scaffold_seconds, 90.0);
        assert!(!cfg.is_enabled(ScaffoldKind::Hint4));
        assert_eq!(cfg.enc3_every, EngineConfig::default().enc3_every);
    }

    #[test]
    fn bad_values_are_rejected() {
        let args = EngineArgs {
            enc3_every: Some(0),
            ..EngineArgs::default()
        };
        assert!(engine_config(&args, &mut ManifestBuilder::new("test")).is_err());
        let args = EngineArgs {
            disable: vec!["hint9".into()],
            ..EngineArgs::default()
        };
        assert!(engine_config(&args, &mut ManifestBuilder::new("test")).is_err());
    }
}
