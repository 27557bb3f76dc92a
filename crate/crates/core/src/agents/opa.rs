use std::collections::HashSet;

use super::{Recommendation, Recommender, Result, UserState};
use crate::corpus::{Message, MessageBase};
use crate::vector;

/// Top-k by cosine between the user's preference and message embeddings,
/// skipping `exclude` and anything the user already accepted. Ties by id.
pub fn opa_similarity_recommend(
    user: &UserState,
    base: &MessageBase,
    k: usize,
    exclude: &HashSet<String>,
) -> Recommendation {
    let accepted: HashSet<&str> = user.accepted_ids().collect();
    let mut scored: Vec<(f64, &Message)> = base
        .messages()
        .iter()
        .filter(|m| !exclude.contains(&m.id) && !accepted.contains(m.id.as_str()))
        .map(|m| {
            let c = vector::cosine(&user.preference, &m.embedding).unwrap_or(-1.0);
            (c, m)
        })
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.id.cmp(&b.1.id)));
    let exhausted = scored.len() < k;
    Recommendation {
        messages: scored.into_iter().take(k).map(|(_, m)| m.clone()).collect(),
        exhausted,
    }
}

/// Stateless built-in OPA.
#[derive(Debug, Clone, Copy, Default)]
pub struct SimilarityRecommender;

impl Recommender for SimilarityRecommender {
    fn recommend(
        &mut self,
        user: &UserState,
        base: &MessageBase,
        k: usize,
        exclude: &HashSet<String>,
    ) -> Result<Recommendation> {
        Ok(opa_similarity_recommend(user, base, k, exclude))
    }
}
