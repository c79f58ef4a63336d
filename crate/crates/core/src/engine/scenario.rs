//! Experiment configuration, loaded from JSON.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{Community, CommunityId, Second, Topology, UeId};
use crate::identity::{SignerKind, DEFAULT_LIFETIME};
use crate::tpss::{AbdParams, IndexWeights};
use crate::trust::{Architecture, Multipliers, Priors};

pub const DEFAULT_ASN: u32 = 64512;
pub const HARD_CAP_S: Second = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid scenario: {field}: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommunitySpec {
    pub name: String,
    pub population: usize,
    /// Suppresses the attack reports this community would publish.
    #[serde(default)]
    pub dishonest: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormalPhase {
    pub duration_s: Second,
    pub cross_prob: f64,
    /// Packets per second sent by each active UE.
    pub rate_pps: u32,
}

impl Default for NormalPhase {
    fn default() -> Self {
        Self {
            duration_s: 100,
            cross_prob: 0.1,
            rate_pps: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpidemicSpec {
    /// Initially infected UEs per community.
    pub i0: usize,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for EpidemicSpec {
    fn default() -> Self {
        Self {
            i0: 100,
            beta: 0.2,
            gamma: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VictimSpec {
    pub community: String,
    #[serde(default = "one")]
    pub cert_id: u64,
}

fn one() -> u64 {
    1
}

/// A stage lasts from `start_s` until the next stage starts; the last one
/// lasts until the epidemic dies out.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageSpec {
    pub start_s: Second,
    pub attackers: Vec<String>,
    pub victim: VictimSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackSpec {
    #[serde(default = "default_intensity")]
    pub intensity_pps: u32,
    pub stages: Vec<StageSpec>,
}

fn default_intensity() -> u32 {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub architecture: Architecture,
    pub trust_threshold: f64,
    pub validity_period_s: Second,
    pub priors: Priors,
    pub multipliers: Multipliers,
    pub index_weights: IndexWeights,
    pub cel_window_s: Second,
    pub abd: AbdParams,
    pub signer: SignerKind,
    pub cert_lifetime_s: Second,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            architecture: Architecture::Zta6g,
            trust_threshold: 0.75,
            validity_period_s: 1,
            priors: Priors::default(),
            multipliers: Multipliers::default(),
            index_weights: IndexWeights::default(),
            cel_window_s: 30,
            abd: AbdParams::default(),
            signer: SignerKind::KeyedHash,
            cert_lifetime_s: DEFAULT_LIFETIME,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarloSpec {
    pub runs: usize,
    pub base_seed: u64,
}

impl Default for MonteCarloSpec {
    fn default() -> Self {
        Self {
            runs: 100,
            base_seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default = "default_asn")]
    pub asn: u32,
    /// Community IDs are assigned 1, 2, ... in listed order.
    pub communities: Vec<CommunitySpec>,
    pub links: Vec<[String; 2]>,
    #[serde(default)]
    pub normal: NormalPhase,
    #[serde(default)]
    pub epidemic: EpidemicSpec,
    pub attack: AttackSpec,
    #[serde(default)]
    pub engine: EngineConfig,
    #[serde(default)]
    pub monte_carlo: MonteCarloSpec,
    /// Validity periods used by the sweep command.
    #[serde(default)]
    pub sweep_periods_s: Vec<Second>,
    #[serde(default = "default_cap")]
    pub max_duration_s: Second,
}

fn default_name() -> String {
    "custom".into()
}
fn default_asn() -> u32 {
    DEFAULT_ASN
}
fn default_cap() -> Second {
    HARD_CAP_S
}

/// A stage with names resolved to IDs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stage {
    pub start: Second,
    pub attackers: Vec<CommunityId>,
    pub victim: UeId,
}

impl Scenario {
    /// Four communities of 1000 UEs linked A-B, A-C, B-D, C-D; bots in B and
    /// C hit a victim in A for 10 s, then bots in A, B and C hit a victim
    /// in D.
    pub fn paper_fig5() -> Self {
        let community = |name: &str| CommunitySpec {
            name: name.into(),
            population: 1000,
            dishonest: false,
        };
        let link = |a: &str, b: &str| [a.to_string(), b.to_string()];
        let victim = |c: &str| VictimSpec {
            community: c.into(),
            cert_id: 1,
        };
        Self {
            name: "paper_fig5".into(),
            asn: DEFAULT_ASN,
            communities: ["A", "B", "C", "D"].map(community).to_vec(),
            links: vec![link("A", "B"), link("A", "C"), link("B", "D"), link("C", "D")],
            normal: NormalPhase::default(),
            epidemic: EpidemicSpec::default(),
            attack: AttackSpec {
                intensity_pps: 10,
                stages: vec![
                    StageSpec {
                        start_s: 100,
                        attackers: vec!["B".into(), "C".into()],
                        victim: victim("A"),
                    },
                    StageSpec {
                        start_s: 110,
                        attackers: vec!["A".into(), "B".into(), "C".into()],
                        victim: victim("D"),
                    },
                ],
            },
            engine: EngineConfig::default(),
            monte_carlo: MonteCarloSpec::default(),
            sweep_periods_s: Vec::new(),
            max_duration_s: HARD_CAP_S,
        }
    }

    /// [`Scenario::paper_fig5`] with the validity-period sweep 1, 3, 5, 7.
    pub fn paper_fig6() -> Self {
        Self {
            name: "paper_fig6".into(),
            sweep_periods_s: vec![1, 3, 5, 7],
            ..Self::paper_fig5()
        }
    }

    /// Parses and validates.
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let scenario: Scenario = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn community_id(&self, name: &str) -> Option<CommunityId> {
        self.communities
            .iter()
            .position(|c| c.name == name)
            .map(|k| k as CommunityId + 1)
    }

    fn resolve(&self, field: &str, name: &str) -> Result<CommunityId, ScenarioError> {
        self.community_id(name)
            .ok_or_else(|| invalid(field, format!("unknown community {name:?}")))
    }

    pub fn topology(&self) -> Result<Topology, ScenarioError> {
        let communities = self
            .communities
            .iter()
            .enumerate()
            .map(|(k, c)| Community {
                id: k as CommunityId + 1,
                name: c.name.clone(),
                population: c.population,
            })
            .collect();
        let mut links = Vec::with_capacity(self.links.len());
        for (k, [a, b]) in self.links.iter().enumerate() {
            let field = format!("links[{k}]");
            links.push((self.resolve(&field, a)?, self.resolve(&field, b)?));
        }
        Topology::new(communities, links).map_err(|e| invalid("links", e.to_string()))
    }

    pub fn stages(&self) -> Result<Vec<Stage>, ScenarioError> {
        let mut out = Vec::with_capacity(self.attack.stages.len());
        for (k, s) in self.attack.stages.iter().enumerate() {
            let field = format!("attack.stages[{k}]");
            let victim_community = self.resolve(&format!("{field}.victim.community"), &s.victim.community)?;
            let population = self.communities[victim_community as usize - 1].population as u64;
            if s.victim.cert_id == 0 || s.victim.cert_id > population {
                return Err(invalid(
                    format!("{field}.victim.cert_id"),
                    format!("must lie in 1..={population}"),
                ));
            }
            let mut attackers = Vec::with_capacity(s.attackers.len());
            for name in &s.attackers {
                let id = self.resolve(&format!("{field}.attackers"), name)?;
                if id == victim_community {
                    return Err(invalid(
                        format!("{field}.attackers"),
                        format!("{name:?} is the victim's own community"),
                    ));
                }
                if attackers.contains(&id) {
                    return Err(invalid(format!("{field}.attackers"), format!("{name:?} listed twice")));
                }
                attackers.push(id);
            }
            out.push(Stage {
                start: s.start_s,
                attackers,
                victim: UeId::new(self.asn, victim_community, s.victim.cert_id),
            });
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.communities.len() < 2 {
            return Err(invalid("communities", "need at least two communities"));
        }
        let mut names = BTreeSet::new();
        for (k, c) in self.communities.iter().enumerate() {
            if c.name.trim().is_empty() {
                return Err(invalid(format!("communities[{k}].name"), "empty name"));
            }
            if !names.insert(c.name.as_str()) {
                return Err(invalid(format!("communities[{k}].name"), format!("duplicate {:?}", c.name)));
            }
            if c.population == 0 {
                return Err(invalid(format!("communities[{k}].population"), "must be at least 1"));
            }
            if self.epidemic.i0 > c.population {
                return Err(invalid("epidemic.i0", format!("exceeds population of {:?}", c.name)));
            }
        }
        let topology = self.topology()?;
        if !topology.is_connected() {
            return Err(invalid("links", "topology is not connected"));
        }
        let probability = |field: &str, x: f64| {
            if (0.0..=1.0).contains(&x) {
                Ok(())
            } else {
                Err(invalid(field, format!("{x} outside [0, 1]")))
            }
        };
        probability("normal.cross_prob", self.normal.cross_prob)?;
        probability("epidemic.beta", self.epidemic.beta)?;
        probability("epidemic.gamma", self.epidemic.gamma)?;
        probability("engine.trust_threshold", self.engine.trust_threshold)?;

        let stages = self.stages()?;
        if stages.is_empty() {
            return Err(invalid("attack.stages", "at least one stage is required"));
        }
        if stages[0].start < self.normal.duration_s {
            return Err(invalid(
                "attack.stages[0].start_s",
                "attacks cannot start before the normal phase ends",
            ));
        }
        for (k, w) in stages.windows(2).enumerate() {
            if w[1].start <= w[0].start {
                return Err(invalid(
                    format!("attack.stages[{}].start_s", k + 1),
                    "stages must start in strictly increasing order",
                ));
            }
        }
        if self.attack.intensity_pps == 0 {
            return Err(invalid("attack.intensity_pps", "must be positive"));
        }
        if self.engine.validity_period_s == 0 {
            return Err(invalid("engine.validity_period_s", "must be at least 1"));
        }
        if let Some(k) = self.sweep_periods_s.iter().position(|&p| p == 0) {
            return Err(invalid(format!("sweep_periods_s[{k}]"), "must be at least 1"));
        }
        if !self.engine.priors.is_valid() {
            return Err(invalid("engine.priors", "pseudo-counts must be positive"));
        }
        if !self.engine.multipliers.is_valid() {
            return Err(invalid("engine.multipliers", "factors must lie in (0, 1]"));
        }
        if !self.engine.index_weights.is_valid() {
            return Err(invalid("engine.index_weights", "weights must be non-negative with a positive sum"));
        }
        let abd = &self.engine.abd;
        if !(abd.z_max > 0.0 && abd.sigma_floor > 0.0) {
            return Err(invalid("engine.abd", "z_max and sigma_floor must be positive"));
        }
        probability("engine.abd.no_history_score", abd.no_history_score)?;
        if self.engine.cert_lifetime_s == 0 {
            return Err(invalid("engine.cert_lifetime_s", "must be positive"));
        }
        if self.monte_carlo.runs == 0 {
            return Err(invalid("monte_carlo.runs", "must be at least 1"));
        }
        if self.max_duration_s == 0 || self.max_duration_s > HARD_CAP_S {
            return Err(invalid("max_duration_s", format!("must lie in 1..={HARD_CAP_S}")));
        }
        Ok(())
    }
}
