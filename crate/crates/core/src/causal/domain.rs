use std::sync::OnceLock;

use super::{parse_expert, ExpertMap};

const DEFAULT_EXPERT: &str = include_str!("../../data/default_expert.toml");

/// The bundled thermoregulation expert map (12 concepts, 15 links, 7 pages).
pub fn default_expert() -> ExpertMap {
    static CELL: OnceLock<ExpertMap> = OnceLock::new();
    CELL.get_or_init(|| parse_expert(DEFAULT_EXPERT).expect("bundled expert map is valid"))
        .clone()
}

/// Raw text of the bundled expert map document.
pub fn default_expert_source() -> &'static str {
    DEFAULT_EXPERT
}
