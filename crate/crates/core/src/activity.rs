//! Activities and traces.
//!
//! Artificial activities (start/end sentinels, loop and skip τ) are separate
//! enum variants, so they can never collide with an observed label.

use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// An activity label.
///
/// The derived order puts `Start` first and `End` last, with observed labels
/// sorted lexicographically in between, followed by loop and skip activities.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Activity {
    /// Artificial start ▶.
    Start,
    Observed(Arc<str>),
    /// Loop-back τ inserted between `from` (loop end) and `to` (loop start).
    Loop { from: Arc<str>, to: Arc<str> },
    /// Skip τ inserted after `anchor` when none of `skipped` follows it.
    Skip {
        anchor: Arc<str>,
        skipped: Arc<[Arc<str>]>,
    },
    /// Artificial end ■.
    End,
}

impl Activity {
    pub fn observed(name: impl AsRef<str>) -> Self {
        Activity::Observed(Arc::from(name.as_ref()))
    }

    pub fn is_endpoint(&self) -> bool {
        matches!(self, Activity::Start | Activity::End)
    }

    /// Loop and skip activities; they become silent transitions.
    pub fn is_artificial(&self) -> bool {
        matches!(self, Activity::Loop { .. } | Activity::Skip { .. })
    }

    pub fn is_observed(&self) -> bool {
        matches!(self, Activity::Observed(_))
    }

    /// The visible label, `None` for sentinels and τ activities.
    pub fn label(&self) -> Option<&str> {
        match self {
            Activity::Observed(name) => Some(name),
            _ => None,
        }
    }
}

impl fmt::Display for Activity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Activity::Start => f.write_str("▶"),
            Activity::End => f.write_str("■"),
            Activity::Observed(name) => f.write_str(name),
            Activity::Loop { from, to } => write!(f, "τ({from}→{to})"),
            Activity::Skip { anchor, skipped } => {
                write!(f, "τ({anchor}↷{{")?;
                for (i, s) in skipped.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    f.write_str(s)?;
                }
                f.write_str("})")
            }
        }
    }
}

impl From<&str> for Activity {
    fn from(name: &str) -> Self {
        Activity::observed(name)
    }
}

// Observed activities serialize as plain strings, everything else as a
// tagged object.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ActivityRepr {
    Observed(String),
    Artificial(ArtificialRepr),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "artificial", rename_all = "lowercase")]
enum ArtificialRepr {
    Start,
    End,
    Loop { from: String, to: String },
    Skip { anchor: String, skipped: Vec<String> },
}

impl Serialize for Activity {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let repr = match self {
            Activity::Observed(name) => ActivityRepr::Observed(name.to_string()),
            Activity::Start => ActivityRepr::Artificial(ArtificialRepr::Start),
            Activity::End => ActivityRepr::Artificial(ArtificialRepr::End),
            Activity::Loop { from, to } => ActivityRepr::Artificial(ArtificialRepr::Loop {
                from: from.to_string(),
                to: to.to_string(),
            }),
            Activity::Skip { anchor, skipped } => ActivityRepr::Artificial(ArtificialRepr::Skip {
                anchor: anchor.to_string(),
                skipped: skipped.iter().map(|s| s.to_string()).collect(),
            }),
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Activity {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Ok(match ActivityRepr::deserialize(deserializer)? {
            ActivityRepr::Observed(name) => Activity::observed(name),
            ActivityRepr::Artificial(ArtificialRepr::Start) => Activity::Start,
            ActivityRepr::Artificial(ArtificialRepr::End) => Activity::End,
            ActivityRepr::Artificial(ArtificialRepr::Loop { from, to }) => Activity::Loop {
                from: from.into(),
                to: to.into(),
            },
            ActivityRepr::Artificial(ArtificialRepr::Skip { anchor, mut skipped }) => {
                skipped.sort();
                skipped.dedup();
                Activity::Skip {
                    anchor: anchor.into(),
                    skipped: skipped.into_iter().map(Arc::from).collect(),
                }
            }
        })
    }
}

/// A finite sequence of activities.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Trace(Vec<Activity>);

impl Trace {
    pub fn new(activities: Vec<Activity>) -> Self {
        Trace(activities)
    }

    /// Trace of observed activities.
    pub fn from_names<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Trace(names.into_iter().map(Activity::observed).collect())
    }

    pub fn activities(&self) -> &[Activity] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Activity> {
        self.0
    }

    /// `⟨▶⟩·σ·⟨■⟩`
    pub fn augmented(&self) -> Trace {
        let mut acts = Vec::with_capacity(self.0.len() + 2);
        acts.push(Activity::Start);
        acts.extend(self.0.iter().cloned());
        acts.push(Activity::End);
        Trace(acts)
    }

    /// Drops ▶/■ and all τ activities.
    pub fn observed_only(&self) -> Trace {
        Trace(self.0.iter().filter(|a| a.is_observed()).cloned().collect())
    }
}

impl Deref for Trace {
    type Target = [Activity];

    fn deref(&self) -> &[Activity] {
        &self.0
    }
}

impl FromIterator<Activity> for Trace {
    fn from_iter<T: IntoIterator<Item = Activity>>(iter: T) -> Self {
        Trace(iter.into_iter().collect())
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("⟨")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str("⟩")
    }
}
