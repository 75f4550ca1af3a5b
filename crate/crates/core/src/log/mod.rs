//! Event logs: multisets of traces stored as variants with counts.

mod csv;
mod xes;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::activity::{Activity, Trace};
use crate::error::{Error, Result};

pub use self::csv::{parse_csv, CsvMapping};
pub use self::xes::parse_xes;

/// A multiset of traces. Variant keys are distinct by construction and every
/// count is positive.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventLog {
    variants: BTreeMap<Trace, u64>,
    augmented: bool,
}

/// Table-style summary of a log. Counts exclude the artificial endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogStats {
    pub events: u64,
    pub activities: usize,
    pub traces: u64,
    pub variants: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VariantFilter {
    /// Keep the `k` most frequent variants.
    TopK(usize),
    /// Keep the shortest prefix of variants (by descending count) covering at
    /// least this fraction of all cases.
    Coverage(f64),
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Aggregates traces into variants.
    pub fn from_traces<I: IntoIterator<Item = Trace>>(traces: I) -> Self {
        let mut log = Self::new();
        for t in traces {
            log.add(t, 1);
        }
        log
    }

    pub fn from_variants<I: IntoIterator<Item = (Trace, u64)>>(variants: I) -> Self {
        let mut log = Self::new();
        for (t, c) in variants {
            log.add(t, c);
        }
        log
    }

    /// Convenience for tests and examples: `[(["a","b"], 3), ...]`.
    pub fn from_name_variants<'a, I, T>(variants: I) -> Self
    where
        I: IntoIterator<Item = (T, u64)>,
        T: IntoIterator<Item = &'a str>,
    {
        Self::from_variants(
            variants
                .into_iter()
                .map(|(t, c)| (Trace::from_names(t), c)),
        )
    }

    /// Adds `count` copies of `trace`. A count of zero is ignored.
    pub fn add(&mut self, trace: Trace, count: u64) {
        if count > 0 {
            *self.variants.entry(trace).or_insert(0) += count;
        }
    }

    pub(crate) fn set_augmented(&mut self, augmented: bool) {
        self.augmented = augmented;
    }

    pub fn is_augmented(&self) -> bool {
        self.augmented
    }

    pub fn is_empty(&self) -> bool {
        self.variants.is_empty()
    }

    /// Variants in lexicographic trace order.
    pub fn variants(&self) -> impl ExactSizeIterator<Item = (&Trace, u64)> + '_ {
        self.variants.iter().map(|(t, c)| (t, *c))
    }

    pub fn count(&self, trace: &Trace) -> u64 {
        self.variants.get(trace).copied().unwrap_or(0)
    }

    pub fn num_variants(&self) -> usize {
        self.variants.len()
    }

    /// Total number of cases.
    pub fn num_traces(&self) -> u64 {
        self.variants.values().sum()
    }

    /// `act(L)`
    pub fn activities(&self) -> BTreeSet<Activity> {
        self.variants
            .keys()
            .flat_map(|t| t.iter().cloned())
            .collect()
    }

    pub fn stats(&self) -> LogStats {
        let mut events = 0;
        let mut acts = BTreeSet::new();
        for (t, c) in &self.variants {
            for a in t.iter().filter(|a| !a.is_endpoint()) {
                events += c;
                acts.insert(a);
            }
        }
        LogStats {
            events,
            activities: acts.len(),
            traces: self.num_traces(),
            variants: self.num_variants(),
        }
    }

    /// Wraps every trace as `⟨▶⟩·σ·⟨■⟩`.
    pub fn augment_endpoints(&self) -> Result<EventLog> {
        if self.augmented {
            return Err(Error::AlreadyAugmented);
        }
        Ok(EventLog {
            variants: self
                .variants
                .iter()
                .map(|(t, c)| (t.augmented(), *c))
                .collect(),
            augmented: true,
        })
    }

    /// Augments unless the log already is.
    pub fn ensure_augmented(&self) -> EventLog {
        if self.augmented {
            self.clone()
        } else {
            self.augment_endpoints().expect("not augmented")
        }
    }

    /// `actMult(L)`
    pub fn activity_multiset(&self) -> ActivityMultiset {
        let mut counts = BTreeMap::new();
        for (t, c) in &self.variants {
            for a in t.iter() {
                *counts.entry(a.clone()).or_insert(0) += c;
            }
        }
        ActivityMultiset(counts)
    }

    /// `L↾keep`: deletes every activity outside `keep`, merging colliding
    /// projections.
    pub fn project(&self, keep: &BTreeSet<Activity>) -> EventLog {
        let mut out = EventLog {
            variants: BTreeMap::new(),
            augmented: self.augmented,
        };
        for (t, c) in &self.variants {
            let projected: Trace = t.iter().filter(|a| keep.contains(a)).cloned().collect();
            out.add(projected, *c);
        }
        out
    }

    /// Applies `f` to every variant and re-aggregates.
    pub fn map_traces<F: FnMut(&Trace) -> Trace>(&self, mut f: F) -> EventLog {
        let mut out = EventLog {
            variants: BTreeMap::new(),
            augmented: self.augmented,
        };
        for (t, c) in &self.variants {
            out.add(f(t), *c);
        }
        out
    }

    /// Variants sorted by descending count, ties by lexicographic trace order.
    pub fn variants_by_frequency(&self) -> Vec<(&Trace, u64)> {
        let mut v: Vec<_> = self.variants().collect();
        v.sort_by(|(ta, ca), (tb, cb)| cb.cmp(ca).then_with(|| ta.cmp(tb)));
        v
    }

    pub fn filter_variants(&self, filter: VariantFilter) -> Result<EventLog> {
        let ranked = self.variants_by_frequency();
        let keep = match filter {
            VariantFilter::TopK(k) => k.min(ranked.len()),
            VariantFilter::Coverage(fraction) => {
                if !(fraction > 0.0 && fraction <= 1.0) {
                    return Err(Error::InvalidConfig(format!(
                        "coverage fraction must be in (0, 1], got {fraction}"
                    )));
                }
                let total = self.num_traces() as f64;
                let mut cumulative = 0u64;
                let mut n = 0;
                for (_, c) in &ranked {
                    if cumulative as f64 >= fraction * total {
                        break;
                    }
                    cumulative += c;
                    n += 1;
                }
                n
            }
        };
        Ok(EventLog {
            variants: ranked
                .into_iter()
                .take(keep)
                .map(|(t, c)| (t.clone(), c))
                .collect(),
            augmented: self.augmented,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_repr())?)
    }

    pub fn from_json(json: &str) -> Result<EventLog> {
        let repr: LogRepr = serde_json::from_str(json)?;
        repr.into_log()
    }

    fn to_repr(&self) -> LogRepr {
        LogRepr {
            variants: self
                .variants
                .iter()
                .map(|(t, c)| VariantRepr {
                    trace: if self.augmented {
                        t.iter().filter(|a| !a.is_endpoint()).cloned().collect()
                    } else {
                        t.activities().to_vec()
                    },
                    count: *c,
                })
                .collect(),
            augmented: self.augmented,
        }
    }

    /// Reads XES (`.xes`, `.xes.gz`), CSV (`.csv`, needs `mapping`) or the
    /// canonical JSON form (`.json`).
    pub fn read_file(path: impl AsRef<Path>, mapping: Option<&CsvMapping>) -> Result<EventLog> {
        let path = path.as_ref();
        let bytes = std::fs::read(path)?;
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().to_lowercase())
            .unwrap_or_default();
        Self::parse_bytes(&bytes, &name, mapping)
    }

    /// Format detection from the file name, falling back to content sniffing.
    pub fn parse_bytes(bytes: &[u8], name: &str, mapping: Option<&CsvMapping>) -> Result<EventLog> {
        let name = name.to_lowercase();
        if name.ends_with(".csv") {
            let default;
            let mapping = match mapping {
                Some(m) => m,
                None => {
                    default = CsvMapping::default();
                    &default
                }
            };
            return parse_csv(bytes, mapping);
        }
        if name.ends_with(".json") {
            return Self::from_json(std::str::from_utf8(bytes).map_err(|e| {
                Error::InvalidConfig(format!("log JSON is not UTF-8: {e}"))
            })?);
        }
        if name.ends_with(".xes") || name.ends_with(".xes.gz") || name.ends_with(".gz") {
            return parse_xes(bytes);
        }
        let first = bytes
            .iter()
            .copied()
            .find(|b| !b.is_ascii_whitespace())
            .unwrap_or(b'<');
        match first {
            0x1f | b'<' => parse_xes(bytes),
            b'{' => Self::from_json(&String::from_utf8_lossy(bytes)),
            _ => parse_csv(bytes, mapping.unwrap_or(&CsvMapping::default())),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct LogRepr {
    variants: Vec<VariantRepr>,
    #[serde(default)]
    augmented: bool,
}

#[derive(Serialize, Deserialize)]
struct VariantRepr {
    trace: Vec<Activity>,
    count: u64,
}

impl LogRepr {
    fn into_log(self) -> Result<EventLog> {
        let mut log = EventLog::new();
        for v in self.variants {
            if v.trace.iter().any(Activity::is_endpoint) {
                return Err(Error::InvalidConfig(
                    "JSON traces must not contain start/end sentinels; use `augmented`".into(),
                ));
            }
            let trace = Trace::new(v.trace);
            log.add(if self.augmented { trace.augmented() } else { trace }, v.count);
        }
        log.augmented = self.augmented;
        Ok(log)
    }
}

/// Occurrence counts per activity; zero counts are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ActivityMultiset(BTreeMap<Activity, u64>);

impl ActivityMultiset {
    pub fn get(&self, a: &Activity) -> u64 {
        self.0.get(a).copied().unwrap_or(0)
    }

    /// `count(L, A) = Σ_{a∈A} actMult(L)(a)`
    pub fn count<'a, I: IntoIterator<Item = &'a Activity>>(&self, set: I) -> u64 {
        set.into_iter().map(|a| self.get(a)).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Activity, u64)> + '_ {
        self.0.iter().map(|(a, c)| (a, *c))
    }

    pub fn activities(&self) -> BTreeSet<Activity> {
        self.0.keys().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<(Activity, u64)> for ActivityMultiset {
    fn from_iter<T: IntoIterator<Item = (Activity, u64)>>(iter: T) -> Self {
        let mut m = BTreeMap::new();
        for (a, c) in iter {
            if c > 0 {
                *m.entry(a).or_insert(0) += c;
            }
        }
        ActivityMultiset(m)
    }
}
