//! Information-neutrality wrapper for preference-based recommenders.
//!
//! An upstream recommender's list is clustered, the dominant cluster is
//! selected, each of its topics is checked for Yin/Yang sentiment balance and
//! complementary messages are appended. A simulated user closes the loop so
//! the effect can be measured over many rounds.

pub mod agents;
pub mod clustering;
pub mod corpus;
pub mod dcia;
pub mod harness;
pub mod metrics;
pub mod seed;
pub mod vector;
pub mod yinyang;

pub use agents::{Mode, Recommender, RoundConfig, UserState};
pub use corpus::{HashEmbedder, Message, MessageBase};
