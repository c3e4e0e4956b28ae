//! Decoding of Voynich-style symbol transcriptions against a keyed syllabary.

pub mod corpus;
pub mod decoder;
pub mod encoder;
pub mod merge;
pub mod rules;
pub mod sidecodes;
pub mod symbol_table;
pub mod transcription;

pub use decoder::{
    best_reading, decode_line, enumerate_readings, explain, merge_boundaries, segment,
    DecodeOptions, Reading, ReadingLattice, RuleTrace, Score,
};
pub use symbol_table::{Codebook, Lexicon, SymbolTable};
pub use transcription::{parse_line, serialize, Token, TokenLine};
