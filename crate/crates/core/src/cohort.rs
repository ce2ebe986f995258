//! Subjects, labels and cohorts shared by the pipelines, the generators and file I/O.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corr::CorrelationMatrix;
use crate::error::{Error, Result};

/// Binary group label. `B` is the positive (disease) class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    A,
    B,
}

impl Label {
    pub fn is_positive(self) -> bool {
        self == Label::B
    }

    /// `-1` for A, `+1` for B.
    pub fn sign(self) -> f64 {
        match self {
            Label::A => -1.0,
            Label::B => 1.0,
        }
    }

    pub fn other(self) -> Label {
        match self {
            Label::A => Label::B,
            Label::B => Label::A,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::A => "A",
            Label::B => "B",
        })
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(Label::A),
            "B" | "b" => Ok(Label::B),
            other => Err(Error::InvalidInput(format!("label must be A or B, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Subject {
    pub id: String,
    pub matrix: CorrelationMatrix,
    pub label: Option<Label>,
    pub age: Option<f64>,
}

/// Subjects with unique ids and a common matrix dimension.
#[derive(Debug, Clone)]
pub struct CohortDataset {
    subjects: Vec<Subject>,
}

impl CohortDataset {
    pub fn new(subjects: Vec<Subject>) -> Result<Self> {
        let mut seen = HashSet::new();
        let n = subjects.first().map(|s| s.matrix.dim());
        for s in &subjects {
            if !seen.insert(s.id.as_str()) {
                return Err(Error::DuplicateId(s.id.clone()));
            }
            if Some(s.matrix.dim()) != n {
                return Err(Error::for_subject(
                    &s.id,
                    Error::dims(n.unwrap_or(0), s.matrix.dim()),
                ));
            }
        }
        Ok(CohortDataset { subjects })
    }

    pub fn subjects(&self) -> &[Subject] {
        &self.subjects
    }

    pub fn len(&self) -> usize {
        self.subjects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subjects.is_empty()
    }

    /// Matrix dimension, 0 for an empty cohort.
    pub fn dim(&self) -> usize {
        self.subjects.first().map_or(0, |s| s.matrix.dim())
    }

    pub fn matrices(&self) -> Vec<&CorrelationMatrix> {
        self.subjects.iter().map(|s| &s.matrix).collect()
    }

    pub fn ids(&self) -> Vec<&str> {
        self.subjects.iter().map(|s| s.id.as_str()).collect()
    }

    /// All labels; fails if any subject is unlabeled.
    pub fn labels(&self) -> Result<Vec<Label>> {
        self.subjects
            .iter()
            .map(|s| {
                s.label
                    .ok_or_else(|| Error::TooFewSamples(format!("subject `{}` has no label", s.id)))
            })
            .collect()
    }

    /// All ages; fails if any subject has none.
    pub fn ages(&self) -> Result<Vec<f64>> {
        self.subjects
            .iter()
            .map(|s| {
                s.age
                    .ok_or_else(|| Error::TooFewSamples(format!("subject `{}` has no age", s.id)))
            })
            .collect()
    }

    /// Same subjects with labels replaced (used for permutation nulls).
    pub fn with_labels(&self, labels: &[Label]) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(Error::dims(self.len(), labels.len()));
        }
        let mut out = self.clone();
        for (s, &l) in out.subjects.iter_mut().zip(labels) {
            s.label = Some(l);
        }
        Ok(out)
    }

    pub fn with_ages(&self, ages: &[f64]) -> Result<Self> {
        if ages.len() != self.len() {
            return Err(Error::dims(self.len(), ages.len()));
        }
        let mut out = self.clone();
        for (s, &a) in out.subjects.iter_mut().zip(ages) {
            s.age = Some(a);
        }
        Ok(out)
    }
}
