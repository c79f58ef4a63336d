//! One seeded simulation run.

use std::collections::{BTreeMap, HashSet};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::metrics::{rate, FirstExposure, RunMetrics, RunSummary, SecondRow};
use super::scenario::{Scenario, ScenarioError, Stage};
use crate::domain::{AccessRequest, CommunityId, Second, UeId};
use crate::epidemic::{EpidemicState, Transition};
use crate::identity::{Certificate, CertificateOrigin, CertificateRequest, IdentityRegistry, UeType};
use crate::tpss::{abd_score, community_indices, AccessHistory, CommunityTrustIndex, EventKind, Ledger, LedgerEvent, Severity, Vdb};
use crate::trust::{
    destination_evaluation, evaluate_permit_all, evaluate_tbpf, evaluate_tris, home_self_evaluation,
    Architecture, Blacklists, DecisionCache, TrustTable, ZtaInputs,
};

/// Independent random streams of a run, split from one seed in a fixed
/// order so that changing the engine never shifts traffic or epidemics.
pub struct Streams {
    pub traffic: ChaCha8Rng,
    pub epidemic: ChaCha8Rng,
    pub engine: ChaCha8Rng,
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        let mut master = ChaCha8Rng::seed_from_u64(seed);
        let mut child = || {
            let mut key = [0u8; 32];
            master.fill_bytes(&mut key);
            ChaCha8Rng::from_seed(key)
        };
        Self {
            traffic: child(),
            epidemic: child(),
            engine: child(),
        }
    }
}

struct Slot {
    id: CommunityId,
    dishonest: bool,
    neighbours: Vec<CommunityId>,
    ids: Vec<UeId>,
    certificates: Vec<Certificate>,
    requests: Vec<CertificateRequest>,
    histories: Vec<AccessHistory>,
    registry: IdentityRegistry,
}

enum Feedback {
    Good { holder: CommunityId, source: UeId },
    Bad { victim: CommunityId, source: UeId, packets: u64 },
    Blacklist { community: CommunityId, source: UeId },
}

/// Runs `scenario` with `seed`.
pub fn run(scenario: &Scenario, seed: u64) -> Result<RunMetrics, ScenarioError> {
    scenario.validate()?;
    let topology = scenario.topology()?;
    let stages = scenario.stages()?;
    let cfg = &scenario.engine;
    let mut streams = Streams::new(seed);
    let launch = scenario.normal.duration_s;

    let community_names: Vec<String> = topology.communities().iter().map(|c| c.name.clone()).collect();
    let mut slot_of = vec![usize::MAX; scenario.communities.len() + 1];
    let mut slots = Vec::with_capacity(topology.communities().len());
    for (k, c) in topology.communities().iter().enumerate() {
        slot_of[c.id as usize] = k;
        let signer = cfg.signer.generate(&mut streams.engine);
        let mut registry = IdentityRegistry::with_lifetime(scenario.asn, c.id, signer, cfg.cert_lifetime_s);
        let mut certificates = Vec::with_capacity(c.population);
        let mut requests = Vec::with_capacity(c.population);
        for i in 0..c.population {
            let mut key = vec![0u8; 32];
            streams.engine.fill_bytes(&mut key);
            let request = CertificateRequest {
                subject_public_key: key,
                ue_type: UeType::Handset,
                os_version: "sim-os 1.0".into(),
                proof_of_identity: format!("enrolment-{}-{i}", c.id).into_bytes(),
                origin: CertificateOrigin::HomeGenerated,
            };
            let certificate = registry
                .register_certificate(&request, 0)
                .expect("enrolment request is well formed");
            debug_assert_eq!(certificate.cert_id, i as u64 + 1);
            certificates.push(certificate);
            requests.push(request);
        }
        let ids = certificates.iter().map(Certificate::ue_id).collect();
        slots.push(Slot {
            id: c.id,
            dishonest: scenario.communities[c.id as usize - 1].dishonest,
            neighbours: topology.neighbours(c.id).to_vec(),
            ids,
            histories: vec![AccessHistory::new(launch); c.population],
            certificates,
            requests,
            registry,
        });
    }
    let index_of = |ue: UeId| -> (usize, usize) { (slot_of[ue.community_id as usize], ue.cert_id as usize - 1) };

    let populations: Vec<(CommunityId, usize)> = slots.iter().map(|s| (s.id, s.ids.len())).collect();
    let mut epidemic = EpidemicState::new(&populations, scenario.epidemic.beta, scenario.epidemic.gamma)
        .expect("rates validated");
    let mut ledger = Ledger::new();
    let mut vdb = Vdb::new();
    let mut table = TrustTable::new(cfg.priors);
    let mut blacklists = Blacklists::new();
    let mut cache = DecisionCache::new(cfg.validity_period_s);
    let mut pending: Vec<Feedback> = Vec::new();
    let mut renew_at = cfg.cert_lifetime_s;

    let final_stage = stages.last().expect("validated").clone();
    let measured = final_stage.victim.community_id;
    let metrics_start = final_stage.start;
    let mut exposed: HashSet<UeId> = HashSet::new();
    let mut first_exposures = Vec::new();
    let (mut cum_total, mut cum_blocked) = (0u64, 0u64);
    let mut rows = Vec::new();
    let mut extinction_time = None;

    let sir_row = |epidemic: &EpidemicState| epidemic.communities().iter().map(|c| c.counts()).collect::<Vec<_>>();
    let mut t: Second = 0;
    loop {
        let mut infected: Vec<Transition> = Vec::new();
        let mut recovered: Vec<Transition> = Vec::new();
        let mut seeded = false;
        if t == launch {
            infected = epidemic
                .seed_infection(scenario.epidemic.i0, &mut streams.epidemic)
                .expect("i0 validated against populations");
            seeded = true;
        } else if t > launch {
            let report = epidemic.step_sir(&mut streams.epidemic);
            infected = report.infected;
            recovered = report.recovered;
        }
        let seen = t + 1;
        for tr in &infected {
            let ue = slots[tr.slot].ids[tr.index];
            vdb.disclose(ue, Severity::High, seen);
            let mut events = vec![LedgerEvent::new(seen, EventKind::VulnerabilityDisclosed, ue)];
            if !seeded {
                events.push(LedgerEvent::new(seen, EventKind::ContactWithInfected, ue));
            }
            for ev in events {
                ledger.append(ev).expect("stamps never decrease");
            }
        }
        for tr in &recovered {
            let ue = slots[tr.slot].ids[tr.index];
            vdb.fix(ue, seen);
            ledger
                .append(LedgerEvent::new(seen, EventKind::VulnerabilityFixed, ue))
                .expect("stamps never decrease");
        }
        let ended = t > launch && epidemic.is_extinct();
        if ended || t >= scenario.max_duration_s {
            if ended {
                extinction_time = Some(t);
            }
            rows.push(SecondRow {
                t,
                attack_total: 0,
                attack_blocked: 0,
                attack_delivered: 0,
                filtering_rate: 1.0,
                accum_filtering_rate: rate(cum_blocked, cum_total),
                missed_cum: cum_total - cum_blocked,
                sir: sir_row(&epidemic),
            });
            break;
        }

        for fb in pending.drain(..) {
            match fb {
                Feedback::Good { holder, source } => table.record_good(holder, source, 1),
                Feedback::Bad { victim, source, packets } => {
                    table.record_bad(victim, source, packets);
                    if !slots[slot_of[victim as usize]].dishonest {
                        for s in &slots {
                            if s.id != victim {
                                table.record_bad(s.id, source, packets);
                            }
                        }
                    }
                }
                Feedback::Blacklist { community, source } => {
                    blacklists.insert(community, source);
                }
            }
        }

        if t >= renew_at {
            for slot in &mut slots {
                for (cert, request) in slot.certificates.iter_mut().zip(&slot.requests) {
                    *cert = slot
                        .registry
                        .update_certificate(cert.cert_id, request, t)
                        .expect("residents are never revoked");
                }
            }
            renew_at = t + cfg.cert_lifetime_s;
        }

        // (normal packets, attack packets) per source and destination.
        let mut requests: BTreeMap<(UeId, CommunityId), (u32, u32)> = BTreeMap::new();
        for slot in &slots {
            if slot.neighbours.is_empty() {
                continue;
            }
            for &src in &slot.ids {
                if streams.traffic.gen::<f64>() < scenario.normal.cross_prob {
                    let dst = slot.neighbours[streams.traffic.gen_range(0..slot.neighbours.len())];
                    let dst_population = slots[slot_of[dst as usize]].ids.len();
                    let _dst_ue = streams.traffic.gen_range(0..dst_population);
                    if scenario.normal.rate_pps > 0 {
                        requests.entry((src, dst)).or_default().0 += scenario.normal.rate_pps;
                    }
                }
            }
        }
        if let Some(stage) = active_stage(&stages, t) {
            let victim = stage.victim.community_id;
            for &attacker in &stage.attackers {
                let slot = slot_of[attacker as usize];
                for index in epidemic.community(slot).infected() {
                    let src = slots[slot].ids[index];
                    requests.entry((src, victim)).or_default().1 += scenario.attack.intensity_pps;
                }
            }
        }

        let indices: Vec<CommunityTrustIndex> = if cfg.architecture == Architecture::Zta6g {
            slots
                .iter()
                .map(|s| {
                    community_indices(
                        &ledger,
                        &vdb,
                        &s.ids,
                        &s.histories,
                        t,
                        cfg.cel_window_s,
                        &cfg.index_weights,
                        &cfg.abd,
                    )
                })
                .collect()
        } else {
            Vec::new()
        };

        let (mut total, mut blocked) = (0u64, 0u64);
        let mut sent: Vec<(UeId, u32)> = Vec::with_capacity(requests.len());
        for (&(src, dst), &(normal, attack)) in &requests {
            let req = AccessRequest::cross_domain(src, dst, t, normal + attack)
                .expect("traffic only crosses community borders");
            let decision = match cfg.architecture {
                Architecture::Zta6g => {
                    let (slot, index) = index_of(src);
                    let home = &slots[slot];
                    let cel = ledger.cel_assess(src, t, cfg.cel_window_s);
                    let mut inputs = ZtaInputs::clean(table.get(dst, src));
                    inputs.home_view = cel;
                    match home_self_evaluation(&inputs) {
                        Some(d) => d,
                        None => cache.cached_decide(&req, t, |_| {
                            inputs.certificate = home.registry.verify_certificate(&home.certificates[index], t);
                            inputs.home_index = indices[slot].combined;
                            inputs.risk = vdb.assess(src, t);
                            inputs.cel = cel;
                            inputs.abd = abd_score(&home.histories[index], t, &cfg.abd);
                            destination_evaluation(&inputs, cfg.trust_threshold, &cfg.multipliers)
                        }),
                    }
                }
                Architecture::Tbpf => evaluate_tbpf(&req, &table, cfg.trust_threshold),
                Architecture::Tris => evaluate_tris(&req, &blacklists),
                Architecture::PermitAll => evaluate_permit_all(&req),
            };
            let permitted = decision.is_permit();

            if attack > 0 && dst == measured {
                if exposed.insert(src) {
                    first_exposures.push(FirstExposure {
                        source: src,
                        t,
                        verdict: decision.verdict,
                    });
                }
                if t >= metrics_start {
                    total += attack as u64;
                    if !permitted {
                        blocked += attack as u64;
                    }
                }
            }
            if permitted {
                feedback(&mut pending, &mut ledger, &slots[slot_of[dst as usize]], src, attack, seen);
            }
            match sent.last_mut() {
                Some((last, n)) if *last == src => *n += normal + attack,
                _ => sent.push((src, normal + attack)),
            }
        }
        for (src, packets) in sent {
            let (slot, index) = index_of(src);
            slots[slot].histories[index].record(t, packets);
        }

        cum_total += total;
        cum_blocked += blocked;
        rows.push(SecondRow {
            t,
            attack_total: total,
            attack_blocked: blocked,
            attack_delivered: total - blocked,
            filtering_rate: rate(blocked, total),
            accum_filtering_rate: rate(cum_blocked, cum_total),
            missed_cum: cum_total - cum_blocked,
            sir: sir_row(&epidemic),
        });
        t += 1;
    }

    Ok(RunMetrics {
        community_names,
        summary: RunSummary {
            seed,
            architecture: cfg.architecture,
            validity_period_s: cfg.validity_period_s,
            metrics_start,
            end: t,
            attack_total: cum_total,
            attack_blocked: cum_blocked,
            accumulated_filtering_rate: rate(cum_blocked, cum_total),
            missed_total: cum_total - cum_blocked,
            extinction_time,
            final_recovered: epidemic.communities().iter().map(|c| c.counts().r).sum(),
            evaluations: cache.evaluations(),
        },
        rows,
        first_exposures,
    })
}

fn active_stage(stages: &[Stage], t: Second) -> Option<&Stage> {
    stages.iter().rev().find(|s| s.start <= t)
}

/// What the destination learns from a permitted request; it takes effect
/// one second later.
fn feedback(
    pending: &mut Vec<Feedback>,
    ledger: &mut Ledger,
    victim: &Slot,
    source: UeId,
    attack: u32,
    seen: Second,
) {
    if attack == 0 {
        pending.push(Feedback::Good {
            holder: victim.id,
            source,
        });
        return;
    }
    if !victim.dishonest {
        let event = LedgerEvent::new(seen, EventKind::AttackReport, source)
            .with_detail("victim_community", victim.id.to_string());
        ledger.append(event).expect("stamps never decrease");
    }
    pending.push(Feedback::Bad {
        victim: victim.id,
        source,
        packets: attack as u64,
    });
    pending.push(Feedback::Blacklist {
        community: victim.id,
        source,
    });
}
