use super::setup::{Setup, UserText};
use crate::corpus::text::SEP;
use crate::corpus::{EncodedUser, Label, ProcessedDataset, SplitPart, PAD_ID};

/// Model input for one news item under a given setup.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedInstance {
    pub id: String,
    pub news: Option<Vec<usize>>,
    pub users: Vec<Vec<usize>>,
    pub label: Label,
}

fn or_pad(doc: Vec<usize>) -> Vec<usize> {
    if doc.is_empty() {
        vec![PAD_ID]
    } else {
        doc
    }
}

/// The document that represents `user` for the given text choice. Missing
/// descriptions become a single `<PAD>` token.
pub fn user_document(user: &EncodedUser, text: UserText, sep_id: usize) -> Vec<usize> {
    match text {
        UserText::Timeline => or_pad(user.timeline.clone()),
        UserText::Description => or_pad(user.description.clone().unwrap_or_default()),
        UserText::Both => {
            let mut doc = user.timeline.clone();
            if let Some(d) = &user.description {
                doc.push(sep_id);
                doc.extend(d);
            }
            or_pad(doc)
        }
    }
}

pub fn build_instances(ds: &ProcessedDataset, setup: Setup, part: SplitPart) -> Vec<EncodedInstance> {
    let sep_id = ds.vocab.id(SEP).unwrap_or(PAD_ID);
    ds.split_news(part)
        .into_iter()
        .map(|n| EncodedInstance {
            id: n.id.clone(),
            news: setup.uses_news().then(|| or_pad(n.text.clone())),
            users: match setup.user_text() {
                Some(text) => n
                    .spreaders
                    .iter()
                    .filter_map(|id| ds.users.get(id))
                    .map(|u| user_document(u, text, sep_id))
                    .collect(),
                None => Vec::new(),
            },
            label: n.label,
        })
        .collect()
}
