use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeSet;

use super::DomainError;

/// Body actions a request may ask for, in their stable index order.
pub const DEFAULT_ACTIONS: [&str; 5] = [
    "love-sign",
    "bowing-down",
    "thanksgiving",
    "hand-waving",
    "hugging",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ActionVocabulary {
    actions: Vec<String>,
}

impl ActionVocabulary {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self, DomainError> {
        let actions: Vec<String> = labels.into_iter().map(Into::into).collect();
        check_labels(&actions)?;
        Ok(Self { actions })
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn label(&self, index: usize) -> Option<&str> {
        self.actions.get(index).map(String::as_str)
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.actions.iter().position(|a| a == label)
    }

    pub fn labels(&self) -> &[String] {
        &self.actions
    }

    /// Hex SHA-256 digest over the ordered labels.
    pub fn digest(&self) -> String {
        digest_lines(self.actions.iter().map(String::as_str))
    }
}

impl Default for ActionVocabulary {
    fn default() -> Self {
        Self::new(DEFAULT_ACTIONS).expect("default actions are distinct")
    }
}

/// Binary attribute labels plus the groups whose members exclude each other
/// (a person is not both male and female, nor wears a red and a black top).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct AttributeVocabulary {
    attributes: Vec<String>,
    exclusive_groups: Vec<Vec<usize>>,
}

impl AttributeVocabulary {
    pub fn new<S: Into<String>>(
        labels: impl IntoIterator<Item = S>,
        exclusive_groups: Vec<Vec<usize>>,
    ) -> Result<Self, DomainError> {
        let attributes: Vec<String> = labels.into_iter().map(Into::into).collect();
        check_labels(&attributes)?;
        let mut seen = BTreeSet::new();
        for group in &exclusive_groups {
            if group.len() < 2 {
                return Err(DomainError::BadVocabulary(
                    "exclusive group needs at least two members".into(),
                ));
            }
            for &member in group {
                if member >= attributes.len() {
                    return Err(DomainError::BadVocabulary(format!(
                        "exclusive group member {member} out of range"
                    )));
                }
                if !seen.insert(member) {
                    return Err(DomainError::BadVocabulary(format!(
                        "attribute {member} belongs to more than one exclusive group"
                    )));
                }
            }
        }
        Ok(Self {
            attributes,
            exclusive_groups,
        })
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    pub fn label(&self, index: usize) -> Option<&str> {
        self.attributes.get(index).map(String::as_str)
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a == label)
    }

    pub fn labels(&self) -> &[String] {
        &self.attributes
    }

    pub fn exclusive_groups(&self) -> &[Vec<usize>] {
        &self.exclusive_groups
    }

    /// Index of the exclusive group containing `attribute`, if any.
    pub fn group_of(&self, attribute: usize) -> Option<usize> {
        self.exclusive_groups
            .iter()
            .position(|g| g.contains(&attribute))
    }

    pub fn digest(&self) -> String {
        let groups: Vec<String> = self
            .exclusive_groups
            .iter()
            .map(|g| {
                let parts: Vec<String> = g.iter().map(usize::to_string).collect();
                format!("#{}", parts.join(","))
            })
            .collect();
        digest_lines(
            self.attributes
                .iter()
                .map(String::as_str)
                .chain(groups.iter().map(String::as_str)),
        )
    }
}

impl Default for AttributeVocabulary {
    fn default() -> Self {
        Self::new(
            [
                "male",
                "female",
                "upper-black",
                "upper-white",
                "upper-red",
                "upper-blue",
                "tshirt",
                "jacket",
                "dress",
                "backpack",
                "hat",
                "glasses",
            ],
            vec![vec![0, 1], vec![2, 3, 4, 5], vec![6, 7, 8]],
        )
        .expect("default attributes are well formed")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct Vocabulary {
    pub actions: ActionVocabulary,
    pub attributes: AttributeVocabulary,
}

impl Vocabulary {
    pub fn action_count(&self) -> usize {
        self.actions.len()
    }

    pub fn attribute_count(&self) -> usize {
        self.attributes.len()
    }
}

fn check_labels(labels: &[String]) -> Result<(), DomainError> {
    if labels.is_empty() {
        return Err(DomainError::BadVocabulary("no labels".into()));
    }
    let mut seen = BTreeSet::new();
    for label in labels {
        if label.is_empty() || !seen.insert(label.as_str()) {
            return Err(DomainError::BadVocabulary(label.clone()));
        }
    }
    Ok(())
}

fn digest_lines<'a>(lines: impl Iterator<Item = &'a str>) -> String {
    let mut hasher = Sha256::new();
    for line in lines {
        hasher.update(line.as_bytes());
        hasher.update(b"\n");
    }
    hex::encode(hasher.finalize())
}
