//! Data files bundled with the crate.
//!
//! `db()` is a decomposition database of 1,200 frequent characters derived
//! from the cjk-decomp table, with `corpus()` as matching sample text.
//! `collision_db()` is a small database whose composites collide once IDCs
//! are stripped or leaves are spelled as strokes.

use crate::db::{DbError, DecompositionDb};

pub const IDS: &str = include_str!("../data/fixture/ids.txt");
pub const STROKES: &str = include_str!("../data/fixture/strokes.txt");
pub const CORPUS: &str = include_str!("../data/fixture/corpus.txt");
pub const COLLISION_IDS: &str = include_str!("../data/collisions/ids.txt");
pub const COLLISION_STROKES: &str = include_str!("../data/collisions/strokes.txt");

pub fn db() -> Result<DecompositionDb, DbError> {
    DecompositionDb::load_str(IDS, STROKES)
}

pub fn collision_db() -> Result<DecompositionDb, DbError> {
    DecompositionDb::load_str(COLLISION_IDS, COLLISION_STROKES)
}

pub fn corpus() -> impl Iterator<Item = &'static str> {
    CORPUS.lines()
}
