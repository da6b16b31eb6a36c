//! Collection parsing, tokenization, the inverted file and co-occurrence
//! counts.

pub mod counts;
pub mod index;
pub mod smart;
pub mod tokenize;

pub use counts::{pair_counts, triple_counts, Axis, Contingency2, Contingency3, PresenceBits};
pub use index::{build_inverted_file, CorpusIndex, InvertedFile, Posting, TermId, Vocabulary};
pub use smart::{parse_and_tokenize, parse_smart_collection, DocId, Document};
pub use tokenize::{StoplistSource, Tokenizer, TokenizerConfig};
