//! Word vectors: storage, the word2vec text format and the skip-gram trainer.

pub mod sgns;
mod store;
mod text;
mod trainer;

pub use store::{category_key, is_category_key, word_cosine, EmbeddingStore, CATEGORY_PREFIX};
pub use text::{load_word2vec_text, read_word2vec_text, save_word2vec_text, write_word2vec_text};
pub use trainer::{init_store, train_skipgram, NegativeSampler, TrainConfig, TrainReport, TrainVocab};

pub(crate) use trainer::{category_init_rng, random_row, train_from, CategoryResolver};
