//! Data layer: loaders for the two corpus formats, tokenization, vocabulary,
//! pre-trained embeddings, the normalized on-disk corpus, and supervision
//! state.

pub mod corpus;
pub mod embeddings;
pub mod instance;
pub mod semeval;
pub mod tokenize;
pub mod twitter;
pub mod vocab;

pub use corpus::{file_hash, load_corpus, save_corpus, split_heldout, ClassCounts};
pub use embeddings::{load_embeddings, random_embeddings};
pub use instance::{
    apply_mask, Instance, RawInstance, Sentiment, SupervisionSets, SupervisionState, NUM_CLASSES,
};
pub use semeval::load_semeval_xml;
pub use tokenize::{tokenize, tokenize_words};
pub use twitter::load_twitter_3line;
pub use vocab::{Vocabulary, MASK_ID, MASK_TOKEN, UNK_ID, UNK_TOKEN};
