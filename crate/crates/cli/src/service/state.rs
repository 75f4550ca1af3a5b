use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use alphappp::discovery::{
    assemble_report, run_candidates, run_net, run_repair, CandidateStage, RepairStage,
};
use alphappp::{AcceptingPetriNet, DiscoveryConfig, EventLog, StageReport, ThresholdMode};
use sha2::{Digest, Sha256};

use crate::pipeline::Discovered;

/// 128-bit hex digest, used for log and net ids.
pub fn digest(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    hex::encode(&h.finalize()[..16])
}

/// Repair output depends on these fields only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct RepairKey {
    problem_threshold: u64,
    d: u64,
    relative: bool,
}

impl RepairKey {
    fn of(cfg: &DiscoveryConfig) -> Self {
        RepairKey {
            problem_threshold: cfg.problem_threshold.to_bits(),
            d: cfg.d.value.to_bits(),
            relative: cfg.d.mode == ThresholdMode::Relative,
        }
    }
}

/// Candidate stages additionally depend on these.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct CandidateKey {
    repair: RepairKey,
    n: u64,
    b: u64,
    t: u64,
    cap: Option<usize>,
    fraction: u64,
}

impl CandidateKey {
    fn of(cfg: &DiscoveryConfig) -> Self {
        CandidateKey {
            repair: RepairKey::of(cfg),
            n: cfg.n,
            b: cfg.b.to_bits(),
            t: cfg.t.to_bits(),
            cap: cfg.candidate_size_cap,
            fraction: cfg.min_weight_fraction.to_bits(),
        }
    }
}

/// One uploaded log with its stage caches.
pub struct Session {
    pub log_id: String,
    pub log: Arc<EventLog>,
    repairs: HashMap<RepairKey, Arc<RepairStage>>,
    candidates: HashMap<CandidateKey, Arc<CandidateStage>>,
    pub last_report: Option<StageReport>,
    pub current_net: Option<String>,
}

impl Session {
    fn new(log_id: String, log: EventLog) -> Self {
        Session {
            log_id,
            log: Arc::new(log),
            repairs: HashMap::new(),
            candidates: HashMap::new(),
            last_report: None,
            current_net: None,
        }
    }

    /// Alpha+++ on the session log, reusing cached repair and candidate
    /// stages whose inputs are unchanged.
    pub fn discover_cached(&mut self, cfg: &DiscoveryConfig) -> alphappp::Result<Discovered> {
        cfg.validate()?;
        let rk = RepairKey::of(cfg);
        let (repair, repair_cached) = match self.repairs.get(&rk) {
            Some(r) => (r.clone(), true),
            None => {
                let r = Arc::new(run_repair(&self.log, cfg.problem_threshold, cfg.d)?);
                self.repairs.insert(rk, r.clone());
                (r, false)
            }
        };
        let ck = CandidateKey::of(cfg);
        let (cands, cands_cached) = match self.candidates.get(&ck) {
            Some(c) => (c.clone(), true),
            None => {
                let c = Arc::new(run_candidates(&repair, cfg)?);
                self.candidates.insert(ck, c.clone());
                (c, false)
            }
        };
        let net = run_net(&repair, &cands, cfg.r);
        let report = assemble_report(&repair, &cands, &net, repair_cached, cands_cached);
        Ok(Discovered {
            net: net.net,
            report,
            replay_log: Arc::new(repair.repaired.clone()),
        })
    }
}

pub struct NetEntry {
    pub log_id: String,
    pub net: AcceptingPetriNet,
    pub replay_log: Arc<EventLog>,
}

struct Inner {
    data_dir: PathBuf,
    max_upload: usize,
    sessions: Mutex<HashMap<String, Arc<tokio::sync::Mutex<Session>>>>,
    nets: RwLock<HashMap<String, Arc<NetEntry>>>,
}

#[derive(Clone)]
pub struct AppState(Arc<Inner>);

impl AppState {
    pub fn new(data_dir: impl Into<PathBuf>, max_upload: usize) -> Self {
        AppState(Arc::new(Inner {
            data_dir: data_dir.into(),
            max_upload,
            sessions: Mutex::new(HashMap::new()),
            nets: RwLock::new(HashMap::new()),
        }))
    }

    pub fn max_upload(&self) -> usize {
        self.0.max_upload
    }

    fn log_path(&self, id: &str) -> PathBuf {
        self.0.data_dir.join("logs").join(format!("{id}.json"))
    }

    /// Stores the canonical form under its content id and opens a session.
    pub fn insert_log(&self, id: &str, log: EventLog) -> std::io::Result<()> {
        let path = self.log_path(id);
        if !path.exists() {
            std::fs::create_dir_all(path.parent().unwrap_or(Path::new(".")))?;
            let json = log.to_json().map_err(std::io::Error::other)?;
            let tmp = path.with_extension("json.tmp");
            std::fs::write(&tmp, json)?;
            std::fs::rename(&tmp, &path)?;
        }
        let mut sessions = self.0.sessions.lock().expect("session map poisoned");
        sessions
            .entry(id.to_string())
            .or_insert_with(|| Arc::new(tokio::sync::Mutex::new(Session::new(id.to_string(), log))));
        Ok(())
    }

    /// In-memory session, or one restored from the data directory.
    pub fn session(&self, id: &str) -> Option<Arc<tokio::sync::Mutex<Session>>> {
        if let Some(s) = self.0.sessions.lock().expect("session map poisoned").get(id) {
            return Some(s.clone());
        }
        if id.is_empty() || !id.bytes().all(|b| b.is_ascii_hexdigit()) {
            return None;
        }
        let json = std::fs::read_to_string(self.log_path(id)).ok()?;
        let log = EventLog::from_json(&json).ok()?;
        let mut sessions = self.0.sessions.lock().expect("session map poisoned");
        Some(
            sessions
                .entry(id.to_string())
                .or_insert_with(|| Arc::new(tokio::sync::Mutex::new(Session::new(id.to_string(), log))))
                .clone(),
        )
    }

    pub fn insert_net(&self, id: &str, entry: NetEntry) -> Arc<NetEntry> {
        let entry = Arc::new(entry);
        self.0
            .nets
            .write()
            .expect("net map poisoned")
            .insert(id.to_string(), entry.clone());
        entry
    }

    pub fn net(&self, id: &str) -> Option<Arc<NetEntry>> {
        self.0.nets.read().expect("net map poisoned").get(id).cloned()
    }
}
