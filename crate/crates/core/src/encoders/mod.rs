//! Per-modality encoders: text, social and cultural context.

mod cultural;
mod social;
mod text;
mod tokenize;

pub use cultural::{encode_cultural, CulturalProvider, StubProvider, SynthProvider};
pub use social::SocialEncoder;
pub use text::{CharContext, EncodedText, EncoderOutput, TextDims, TextEncoder, TextVars};
pub use tokenize::{tokenize, TokenizedText, Vocab, BOUNDARY_ID, OOV, PAD, WORD_BOUNDARY};
