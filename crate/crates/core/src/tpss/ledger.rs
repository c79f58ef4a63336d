//! Cybersecurity event ledger: an append-only SHA-256 hash chain.
//!
//! ```text
//! entry_hash[0] = H(payload[0] || 0^32)
//! entry_hash[k] = H(payload[k] || entry_hash[k-1])
//! ```
//!
//! Entries store the canonical binary payload of their event, so any bit
//! flip in a stored event changes the recomputed hash. Truncating the tail
//! is not detectable without an externally anchored head hash.

use std::collections::{BTreeMap, HashMap};
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::TpssError;
use crate::domain::{Second, UeId};

pub const HASH_LEN: usize = 32;
pub const GENESIS_HASH: [u8; HASH_LEN] = [0; HASH_LEN];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EventKind {
    AttackReport,
    ContactWithInfected,
    VulnerabilityDisclosed,
    VulnerabilityFixed,
    AccessLogged,
}

impl EventKind {
    fn code(self) -> u8 {
        match self {
            EventKind::AttackReport => 1,
            EventKind::ContactWithInfected => 2,
            EventKind::VulnerabilityDisclosed => 3,
            EventKind::VulnerabilityFixed => 4,
            EventKind::AccessLogged => 5,
        }
    }

    fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            1 => EventKind::AttackReport,
            2 => EventKind::ContactWithInfected,
            3 => EventKind::VulnerabilityDisclosed,
            4 => EventKind::VulnerabilityFixed,
            5 => EventKind::AccessLogged,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEvent {
    pub t: Second,
    pub kind: EventKind,
    pub subject: UeId,
    #[serde(default)]
    pub detail: BTreeMap<String, String>,
}

impl LedgerEvent {
    pub fn new(t: Second, kind: EventKind, subject: UeId) -> Self {
        Self {
            t,
            kind,
            subject,
            detail: BTreeMap::new(),
        }
    }

    pub fn with_detail(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.detail.insert(key.into(), value.into());
        self
    }

    /// Canonical field-ordered big-endian encoding used for hashing.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(40);
        out.extend_from_slice(&self.t.to_be_bytes());
        out.push(self.kind.code());
        out.extend_from_slice(&self.subject.asn.to_be_bytes());
        out.extend_from_slice(&self.subject.community_id.to_be_bytes());
        out.extend_from_slice(&self.subject.cert_id.to_be_bytes());
        out.extend_from_slice(&(self.detail.len() as u32).to_be_bytes());
        for (k, v) in &self.detail {
            out.extend_from_slice(&(k.len() as u32).to_be_bytes());
            out.extend_from_slice(k.as_bytes());
            out.extend_from_slice(&(v.len() as u32).to_be_bytes());
            out.extend_from_slice(v.as_bytes());
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Option<Self> {
        let mut r = Reader(bytes);
        let t = u64::from_be_bytes(r.take()?);
        let kind = EventKind::from_code(r.take::<1>()?[0])?;
        let asn = u32::from_be_bytes(r.take()?);
        let community_id = u32::from_be_bytes(r.take()?);
        let cert_id = u64::from_be_bytes(r.take()?);
        let n = u32::from_be_bytes(r.take()?);
        let mut detail = BTreeMap::new();
        for _ in 0..n {
            let k = r.string()?;
            let v = r.string()?;
            detail.insert(k, v);
        }
        if !r.0.is_empty() {
            return None;
        }
        Some(Self {
            t,
            kind,
            subject: UeId::new(asn, community_id, cert_id),
            detail,
        })
    }
}

struct Reader<'a>(&'a [u8]);

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> Option<[u8; N]> {
        if self.0.len() < N {
            return None;
        }
        let (head, rest) = self.0.split_at(N);
        self.0 = rest;
        head.try_into().ok()
    }

    fn string(&mut self) -> Option<String> {
        let len = u32::from_be_bytes(self.take()?) as usize;
        if self.0.len() < len {
            return None;
        }
        let (head, rest) = self.0.split_at(len);
        self.0 = rest;
        String::from_utf8(head.to_vec()).ok()
    }
}

pub fn chain_hash(payload: &[u8], prev: &[u8; HASH_LEN]) -> [u8; HASH_LEN] {
    let mut h = Sha256::new();
    h.update(payload);
    h.update(prev);
    h.finalize().into()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LedgerEntry {
    pub payload: Vec<u8>,
    pub prev_hash: [u8; HASH_LEN],
    pub entry_hash: [u8; HASH_LEN],
}

impl LedgerEntry {
    pub fn event(&self) -> Option<LedgerEvent> {
        LedgerEvent::decode(&self.payload)
    }
}

/// Result of a CEL lookup for one guest.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CelAssessment {
    pub contacted_infected: bool,
    pub attacked_victim: bool,
}

#[derive(Debug, Clone, Default)]
pub struct Ledger {
    entries: Vec<LedgerEntry>,
    last_t: Option<Second>,
    // Per-subject (t, kind) in append order; derived, never hashed.
    by_subject: HashMap<UeId, Vec<(Second, EventKind)>>,
}

impl Ledger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Rebuilds a ledger from stored entries without validating them; use
    /// [`Ledger::verify_chain`] afterwards.
    pub fn from_entries(entries: Vec<LedgerEntry>) -> Self {
        let mut ledger = Self {
            entries,
            last_t: None,
            by_subject: HashMap::new(),
        };
        for k in 0..ledger.entries.len() {
            if let Some(ev) = ledger.entries[k].event() {
                ledger.last_t = Some(ledger.last_t.map_or(ev.t, |t| t.max(ev.t)));
                ledger
                    .by_subject
                    .entry(ev.subject)
                    .or_default()
                    .push((ev.t, ev.kind));
            }
        }
        ledger
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<LedgerEntry> {
        self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn head(&self) -> [u8; HASH_LEN] {
        self.entries.last().map_or(GENESIS_HASH, |e| e.entry_hash)
    }

    pub fn append(&mut self, event: LedgerEvent) -> Result<&LedgerEntry, TpssError> {
        if let Some(last) = self.last_t {
            if event.t < last {
                return Err(TpssError::TimeRegression {
                    last,
                    got: event.t,
                });
            }
        }
        let prev_hash = self.head();
        let payload = event.encode();
        let entry_hash = chain_hash(&payload, &prev_hash);
        self.last_t = Some(event.t);
        self.by_subject
            .entry(event.subject)
            .or_default()
            .push((event.t, event.kind));
        self.entries.push(LedgerEntry {
            payload,
            prev_hash,
            entry_hash,
        });
        Ok(self.entries.last().expect("just pushed"))
    }

    /// Recomputes the whole chain from genesis.
    pub fn verify_chain(&self) -> bool {
        let mut prev = GENESIS_HASH;
        let mut last_t = 0;
        for e in &self.entries {
            if e.prev_hash != prev || chain_hash(&e.payload, &prev) != e.entry_hash {
                return false;
            }
            match LedgerEvent::decode(&e.payload) {
                Some(ev) if ev.t >= last_t => last_t = ev.t,
                _ => return false,
            }
            prev = e.entry_hash;
        }
        true
    }

    /// Flags events about `guest` whose timestamp lies in
    /// `[now - window, now]`.
    pub fn cel_assess(&self, guest: UeId, now: Second, window: Second) -> CelAssessment {
        let mut out = CelAssessment::default();
        let Some(events) = self.by_subject.get(&guest) else {
            return out;
        };
        let from = now.saturating_sub(window);
        for &(t, kind) in events.iter().rev() {
            if t > now {
                continue;
            }
            if t < from {
                break;
            }
            match kind {
                EventKind::AttackReport => out.attacked_victim = true,
                EventKind::ContactWithInfected => out.contacted_infected = true,
                _ => {}
            }
            if out.attacked_victim && out.contacted_infected {
                break;
            }
        }
        out
    }

    pub fn events_for(&self, subject: &UeId) -> &[(Second, EventKind)] {
        self.by_subject.get(subject).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Writes one JSON object per entry with hex-coded hashes.
    pub fn export_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (index, e) in self.entries.iter().enumerate() {
            let line = JsonlEntry {
                index,
                event: e.event().ok_or_else(|| {
                    io::Error::new(io::ErrorKind::InvalidData, "undecodable ledger payload")
                })?,
                prev_hash: hex::encode(e.prev_hash),
                entry_hash: hex::encode(e.entry_hash),
            };
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Reads a JSON Lines export. The chain is not checked here.
    pub fn import_jsonl<R: BufRead>(input: R) -> Result<Self, TpssError> {
        let mut entries = Vec::new();
        for (n, line) in input.lines().enumerate() {
            let line = line.map_err(|e| TpssError::Import(format!("line {}: {e}", n + 1)))?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: JsonlEntry = serde_json::from_str(&line)
                .map_err(|e| TpssError::Import(format!("line {}: {e}", n + 1)))?;
            let hash = |s: &str| -> Result<[u8; HASH_LEN], TpssError> {
                hex::decode(s)
                    .ok()
                    .and_then(|v| v.try_into().ok())
                    .ok_or_else(|| TpssError::Import(format!("line {}: bad hash", n + 1)))
            };
            entries.push(LedgerEntry {
                payload: rec.event.encode(),
                prev_hash: hash(&rec.prev_hash)?,
                entry_hash: hash(&rec.entry_hash)?,
            });
        }
        Ok(Self::from_entries(entries))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonlEntry {
    index: usize,
    event: LedgerEvent,
    prev_hash: String,
    entry_hash: String,
}
