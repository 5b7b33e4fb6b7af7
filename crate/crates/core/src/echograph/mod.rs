//! Retweet graph and echo-chamber measurement.
//!
//! Users are linked when one retweets the other. Each dataset user gets a
//! topic vector from the n-grams a trained model finds relevant in their
//! text, and the curve of mean cosine similarity against hop distance is
//! tested for a monotone decrease.

mod ece;
mod graph;

pub use ece::{
    cosine, ece_assess, ece_curve, topic_vector, topic_vector_from_relevant, ConsecutiveTest, DistancePoint,
    EceAssessment, EceCurve, EceOptions, MIN_PAIRS, PAIR_CAP, RHO_THRESHOLD, SIGNIFICANCE, WELCH_UP_TO,
};
pub use graph::{bfs_distances, build_graph, NodeRole, SocialGraph, EXTERNAL_THRESHOLD, MAX_DISTANCE};
