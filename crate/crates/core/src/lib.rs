//! Sub-character preprocessing for Chinese and Japanese text.
//!
//! Words are rewritten as sequences of ideographs or strokes through a
//! decomposition database, segmented with BPE, sampled to a target
//! token-sharing rate between the two sides, and scored with corpus BLEU.
//!
//! ```
//! use textprep::{fixture, DecompConfig, Decomposer};
//!
//! let db = fixture::db().unwrap();
//! let d = Decomposer::new(&db, DecompConfig::ideograph(true));
//! let code = d.decompose_word("好").unwrap();
//! assert_eq!(code, "⿰女子");
//! assert_eq!(d.compose_word(&code).unwrap(), "好");
//! ```

pub mod bpe;
pub mod corpus;
pub mod db;
pub mod decompose;
pub mod eval;
pub mod fixture;
pub mod ids;
pub mod sampler;
pub mod sharing;

pub use bpe::{apply_bpe, learn_bpe, undo_bpe, undo_corpus, BpeError, BpeModel, MergeRule};
pub use corpus::{AtLine, CorpusLine};
pub use db::{validate_db, DbError, DecompositionDb, MarkerPolicy, ValidationReport};
pub use decompose::{
    compose_line, decompose_line, decompose_word, ComposeError, DecompConfig, DecomposeError,
    Decomposer, Granularity,
};
pub use eval::{bleu_corpus, paired_bootstrap, BleuReport, EvalError, SignificanceReport};
pub use ids::{IdsError, IdsTree};
pub use sampler::{sample_with_sharing_rate, RemovalMode, SampleError, SampleOutcome, SamplerConfig, Side};
pub use sharing::{corpus_sharing_rate, corpus_stats, sentence_sharing_rate, CorpusStats, VocabSet};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/database.md")]
    mod database {}
    #[doc = include_str!("../../../book/src/decomposition.md")]
    mod decomposition {}
    #[doc = include_str!("../../../book/src/bpe.md")]
    mod bpe {}
    #[doc = include_str!("../../../book/src/sharing.md")]
    mod sharing {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/pipelines.md")]
    mod pipelines {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
