use std::sync::OnceLock;

use super::{load_level, Level};

/// Ids of the bundled levels, in play order.
pub const BUILTIN_IDS: [&str; 4] = ["base-01", "loop-01", "loop-02", "loop-10"];

const SOURCES: [&str; 4] = [
    include_str!("../../levels/base-01.json"),
    include_str!("../../levels/loop-01.json"),
    include_str!("../../levels/loop-02.json"),
    include_str!("../../levels/loop-10.json"),
];

/// The bundled levels, parsed and validated once per process.
pub fn builtin_catalog() -> &'static [Level] {
    static CATALOG: OnceLock<Vec<Level>> = OnceLock::new();
    CATALOG.get_or_init(|| {
        SOURCES
            .iter()
            .zip(BUILTIN_IDS)
            .map(|(text, id)| match load_level(text) {
                Ok(level) => level,
                Err(e) => panic!("bundled level {id} is invalid: {e:?}"),
            })
            .collect()
    })
}

pub fn builtin_level(id: &str) -> Option<&'static Level> {
    builtin_catalog().iter().find(|l| l.id == id)
}
