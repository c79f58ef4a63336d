//! Shared data model: hierarchical UE identities, communities, the
//! inter-community topology, packets and access requests.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Simulation time in whole seconds.
pub type Second = u64;

/// Community identifier, unique within its autonomous system.
pub type CommunityId = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("malformed identity {text:?}: {reason}")]
    MalformedIdentity { text: String, reason: &'static str },
    #[error("unknown community {0}")]
    UnknownCommunity(CommunityId),
    #[error("community {dst} is unreachable from community {src}")]
    Unreachable { src: CommunityId, dst: CommunityId },
    #[error("invalid topology: {0}")]
    InvalidTopology(String),
    #[error("access request from {guest} to its own community {community}")]
    NotCrossDomain { guest: UeId, community: CommunityId },
}

/// Hierarchical UE identity: autonomous system number, community ID and
/// certificate ID.
///
/// The canonical text form is `<asn>:<community>:<cert>` in plain decimal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UeId {
    pub asn: u32,
    pub community_id: CommunityId,
    pub cert_id: u64,
}

impl UeId {
    pub const fn new(asn: u32, community_id: CommunityId, cert_id: u64) -> Self {
        Self {
            asn,
            community_id,
            cert_id,
        }
    }
}

impl fmt::Display for UeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.asn, self.community_id, self.cert_id)
    }
}

fn parse_component<T: FromStr>(text: &str, part: &str) -> Result<T, DomainError> {
    let malformed = |reason| DomainError::MalformedIdentity {
        text: text.to_string(),
        reason,
    };
    if part.is_empty() {
        return Err(malformed("empty component"));
    }
    if !part.bytes().all(|b| b.is_ascii_digit()) {
        return Err(malformed("non-decimal component"));
    }
    // Leading zeros would give a second spelling of the same triple.
    if part.len() > 1 && part.starts_with('0') {
        return Err(malformed("leading zero"));
    }
    part.parse().map_err(|_| malformed("component overflow"))
}

/// Parses the canonical `<asn>:<community>:<cert>` form.
pub fn parse_ue_id(text: &str) -> Result<UeId, DomainError> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(DomainError::MalformedIdentity {
            text: text.to_string(),
            reason: "expected three colon-separated components",
        });
    }
    Ok(UeId {
        asn: parse_component(text, parts[0])?,
        community_id: parse_component(text, parts[1])?,
        cert_id: parse_component(text, parts[2])?,
    })
}

pub fn format_ue_id(id: &UeId) -> String {
    id.to_string()
}

impl FromStr for UeId {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_ue_id(s)
    }
}

impl Serialize for UeId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for UeId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse_ue_id(&text).map_err(serde::de::Error::custom)
    }
}

/// A subnetwork managed by one local controller.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Community {
    pub id: CommunityId,
    pub name: String,
    pub population: usize,
}

/// Communities plus undirected inter-community links.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    communities: Vec<Community>,
    links: BTreeSet<(CommunityId, CommunityId)>,
    adjacency: BTreeMap<CommunityId, Vec<CommunityId>>,
}

impl Topology {
    /// Builds a topology. Links are unordered pairs; duplicates collapse.
    pub fn new(
        communities: Vec<Community>,
        links: impl IntoIterator<Item = (CommunityId, CommunityId)>,
    ) -> Result<Self, DomainError> {
        let mut ids = BTreeSet::new();
        let mut names = BTreeSet::new();
        for c in &communities {
            if c.population == 0 {
                return Err(DomainError::InvalidTopology(format!(
                    "community {} has zero population",
                    c.name
                )));
            }
            if c.name.is_empty() {
                return Err(DomainError::InvalidTopology(format!(
                    "community {} has an empty name",
                    c.id
                )));
            }
            if !ids.insert(c.id) {
                return Err(DomainError::InvalidTopology(format!(
                    "duplicate community id {}",
                    c.id
                )));
            }
            if !names.insert(c.name.clone()) {
                return Err(DomainError::InvalidTopology(format!(
                    "duplicate community name {}",
                    c.name
                )));
            }
        }

        let mut link_set = BTreeSet::new();
        for (a, b) in links {
            if a == b {
                return Err(DomainError::InvalidTopology(format!(
                    "self-loop on community {a}"
                )));
            }
            for id in [a, b] {
                if !ids.contains(&id) {
                    return Err(DomainError::UnknownCommunity(id));
                }
            }
            link_set.insert((a.min(b), a.max(b)));
        }

        let mut communities = communities;
        communities.sort_by(|x, y| x.name.cmp(&y.name));
        let name_of: BTreeMap<CommunityId, &str> =
            communities.iter().map(|c| (c.id, c.name.as_str())).collect();

        let mut adjacency: BTreeMap<CommunityId, Vec<CommunityId>> =
            communities.iter().map(|c| (c.id, Vec::new())).collect();
        for &(a, b) in &link_set {
            adjacency.get_mut(&a).expect("validated").push(b);
            adjacency.get_mut(&b).expect("validated").push(a);
        }
        for neighbours in adjacency.values_mut() {
            neighbours.sort_by_key(|id| name_of[id]);
        }

        Ok(Self {
            communities,
            links: link_set,
            adjacency,
        })
    }

    /// Communities in name order.
    pub fn communities(&self) -> &[Community] {
        &self.communities
    }

    pub fn links(&self) -> impl Iterator<Item = (CommunityId, CommunityId)> + '_ {
        self.links.iter().copied()
    }

    pub fn community(&self, id: CommunityId) -> Option<&Community> {
        self.communities.iter().find(|c| c.id == id)
    }

    pub fn by_name(&self, name: &str) -> Option<&Community> {
        self.communities.iter().find(|c| c.name == name)
    }

    pub fn is_linked(&self, a: CommunityId, b: CommunityId) -> bool {
        self.links.contains(&(a.min(b), a.max(b)))
    }

    /// Linked communities, sorted by name.
    pub fn neighbours(&self, id: CommunityId) -> &[CommunityId] {
        self.adjacency.get(&id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn is_connected(&self) -> bool {
        let Some(first) = self.communities.first() else {
            return true;
        };
        let mut seen = BTreeSet::from([first.id]);
        let mut queue = VecDeque::from([first.id]);
        while let Some(id) = queue.pop_front() {
            for &n in self.neighbours(id) {
                if seen.insert(n) {
                    queue.push_back(n);
                }
            }
        }
        seen.len() == self.communities.len()
    }

    fn name(&self, id: CommunityId) -> &str {
        self.community(id).map(|c| c.name.as_str()).unwrap_or("")
    }
}

/// Minimum-hop path between two communities.
///
/// Among equally short paths the one whose sequence of community names is
/// lexicographically smallest wins. Breadth-first search that expands
/// neighbours in name order discovers exactly that path first.
pub fn shortest_path(
    topology: &Topology,
    src: CommunityId,
    dst: CommunityId,
) -> Result<Vec<CommunityId>, DomainError> {
    for id in [src, dst] {
        if topology.community(id).is_none() {
            return Err(DomainError::UnknownCommunity(id));
        }
    }
    if src == dst {
        return Ok(vec![src]);
    }

    let mut parent: BTreeMap<CommunityId, CommunityId> = BTreeMap::new();
    let mut queue = VecDeque::from([src]);
    let mut seen = BTreeSet::from([src]);
    while let Some(id) = queue.pop_front() {
        if id == dst {
            break;
        }
        for &n in topology.neighbours(id) {
            if seen.insert(n) {
                parent.insert(n, id);
                queue.push_back(n);
            }
        }
    }

    if !seen.contains(&dst) {
        return Err(DomainError::Unreachable { src, dst });
    }
    let mut path = vec![dst];
    let mut cur = dst;
    while let Some(&p) = parent.get(&cur) {
        path.push(p);
        cur = p;
    }
    path.reverse();
    debug_assert_eq!(path[0], src, "path must start at {}", topology.name(src));
    Ok(path)
}

/// Ground-truth label of a packet. Used for metrics only; access engines
/// never see it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PacketKind {
    Normal,
    Attack,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Packet {
    pub src: UeId,
    pub dst: UeId,
    pub t: Second,
    pub kind: PacketKind,
}

/// One source's request to enter another community during one second,
/// covering every packet it sends there in that second.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AccessRequest {
    pub guest: UeId,
    pub home_community: CommunityId,
    pub dst_community: CommunityId,
    pub t: Second,
    pub packet_count: u32,
}

impl AccessRequest {
    pub fn cross_domain(
        guest: UeId,
        dst_community: CommunityId,
        t: Second,
        packet_count: u32,
    ) -> Result<Self, DomainError> {
        if guest.community_id == dst_community {
            return Err(DomainError::NotCrossDomain {
                guest,
                community: dst_community,
            });
        }
        Ok(Self {
            guest,
            home_community: guest.community_id,
            dst_community,
            t,
            packet_count,
        })
    }
}
