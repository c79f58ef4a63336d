//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zt6g_core::domain::{AccessRequest, UeId};
use zt6g_core::engine::{run_monte_carlo, MonteCarloResult, RunMetrics, Scenario};
use zt6g_core::epidemic::EpidemicState;
use zt6g_core::identity::{
    CertStatus, Certificate, CertificateOrigin, CertificateRequest, IdentityRegistry, SignerKind, UeType,
    Verification,
};
use zt6g_core::tpss::{CelAssessment, EventKind, Ledger, LedgerEvent, RiskLevel};
use zt6g_core::trust::{destination_evaluation, Architecture, BetaTrust, DecisionCache, Multipliers, Verdict, ZtaInputs};

const RUNS: usize = 100;
const BASE_SEED: u64 = 1;

struct Outcome {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn scenario(file: &str) -> Scenario {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(file);
    Scenario::from_json(&fs::read_to_string(path).expect("bundled scenario")).expect("valid scenario")
}

fn batch(base: &Scenario, arch: Architecture, period: u64) -> MonteCarloResult {
    let mut s = base.clone();
    s.engine.architecture = arch;
    s.engine.validity_period_s = period;
    run_monte_carlo(&s, RUNS, BASE_SEED).expect("scenario runs")
}

fn acc(mc: &MonteCarloResult) -> f64 {
    mc.averaged.summary.accumulated_filtering_rate.mean
}

fn criterion_1(results: &BTreeMap<Architecture, MonteCarloResult>, secs: f64) -> Outcome {
    let z = &results[&Architecture::Zta6g].averaged.summary.accumulated_filtering_rate;
    let t = &results[&Architecture::Tbpf].averaged.summary.accumulated_filtering_rate;
    let r = &results[&Architecture::Tris].averaged.summary.accumulated_filtering_rate;
    let se = (z.std_error().powi(2) + t.std_error().powi(2)).sqrt();
    let margin = z.mean - t.mean;
    Outcome {
        id: 1,
        name: "architecture ordering ZTA-6G > TBPF > TRIS",
        pass: z.mean > t.mean && t.mean > r.mean && margin > 2.0 * se && secs < 300.0,
        detail: format!(
            "zta6g {:.4}±{:.4}, tbpf {:.4}±{:.4}, tris {:.4}±{:.4}; margin {:.4} vs 2SE {:.4}; {RUNS} runs each in {secs:.1}s",
            z.mean, z.std_dev, t.mean, t.std_dev, r.mean, r.std_dev, margin, 2.0 * se
        ),
    }
}

fn mean_ramp(runs: &[RunMetrics]) -> (f64, f64) {
    let r: Vec<(f64, f64)> = runs.iter().filter_map(RunMetrics::ramp).collect();
    let n = r.len() as f64;
    (r.iter().map(|x| x.0).sum::<f64>() / n, r.iter().map(|x| x.1).sum::<f64>() / n)
}

fn criterion_2(results: &BTreeMap<Architecture, MonteCarloResult>) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for arch in [Architecture::Zta6g, Architecture::Tbpf, Architecture::Tris] {
        let (first, last) = mean_ramp(&results[&arch].runs);
        pass &= last > first;
        parts.push(format!("{arch} {first:.4}->{last:.4}"));
    }
    Outcome {
        id: 2,
        name: "filtering improves from first to last third of the attack window",
        pass,
        detail: parts.join(", "),
    }
}

fn criterion_3(tris: &MonteCarloResult) -> Outcome {
    let mut exposures = 0;
    let mut violations = 0;
    for run in &tris.runs {
        let mut seen = HashSet::new();
        for e in &run.first_exposures {
            assert!(seen.insert(e.source), "duplicate first exposure");
            exposures += 1;
            if e.verdict != Verdict::Permit {
                violations += 1;
            }
        }
    }
    Outcome {
        id: 3,
        name: "TRIS permits every bot's first attack on D",
        pass: violations == 0 && exposures > 0,
        detail: format!("{exposures} first exposures over {RUNS} runs, {violations} violations"),
    }
}

fn criterion_4(sweep: &BTreeMap<u64, f64>) -> Outcome {
    let values: Vec<(u64, f64)> = sweep.iter().map(|(&p, &a)| (p, a)).collect();
    let monotone = values.windows(2).all(|w| w[1].1 <= w[0].1 + 0.02);
    let target = [3u64, 5].iter().all(|p| sweep[p] > 0.90 - 0.05);
    let above_90 = [3u64, 5].iter().all(|p| sweep[p] > 0.90);
    Outcome {
        id: 4,
        name: "validity-period sweep non-increasing; p=3,5 above 90% (±5 pp)",
        pass: monotone && target,
        detail: format!(
            "{}; non-increasing within 2 pp: {monotone}; p=3,5 strictly above 90%: {above_90}",
            values
                .iter()
                .map(|(p, a)| format!("p={p} {:.4}", a))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    }
}

/// Independent per-UE Bernoulli SIR. Returns (extinction time, final R).
fn sir_oracle(n: usize, i0: usize, beta: f64, gamma: f64, rng: &mut StdRng) -> (f64, f64) {
    let mut state = vec![b'S'; n];
    for k in rand::seq::index::sample(rng, n, i0) {
        state[k] = b'I';
    }
    let mut t = 0u64;
    loop {
        let infected = state.iter().filter(|&&s| s == b'I').count();
        if infected == 0 {
            return (t as f64, state.iter().filter(|&&s| s == b'R').count() as f64);
        }
        let escape = (1.0 - beta / n as f64).powf(infected as f64);
        let before = state.clone();
        for (k, s) in state.iter_mut().enumerate() {
            let u: f64 = rng.gen();
            match before[k] {
                b'S' if u >= escape => *s = b'I',
                b'I' if u < gamma => *s = b'R',
                _ => {}
            }
        }
        t += 1;
    }
}

fn criterion_5() -> Outcome {
    let runs = 1000;
    let (n, i0, beta, gamma) = (1000, 100, 0.2, 0.2);
    let (mut et, mut er) = (0.0, 0.0);
    for seed in 0..runs as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut st = EpidemicState::new(&[(1, n)], beta, gamma).unwrap();
        st.seed_infection(i0, &mut rng).unwrap();
        let mut t = 0;
        while !st.is_extinct() {
            st.step_sir(&mut rng);
            t += 1;
        }
        et += t as f64;
        er += st.community(0).counts().r as f64;
    }
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let (mut ot, mut or) = (0.0, 0.0);
    for _ in 0..runs {
        let (t, r) = sir_oracle(n, i0, beta, gamma, &mut rng);
        ot += t;
        or += r;
    }
    let k = runs as f64;
    let (et, er, ot, or) = (et / k, er / k, ot / k, or / k);
    let rt = (et - ot).abs() / ot;
    let rr = (er - or).abs() / or;
    Outcome {
        id: 5,
        name: "SIR engine matches brute-force oracle (2% relative)",
        pass: rt < 0.02 && rr < 0.02,
        detail: format!(
            "extinction {et:.2} vs {ot:.2} ({:.2}%), final R {er:.1} vs {or:.1} ({:.2}%), {runs} runs each",
            rt * 100.0,
            rr * 100.0
        ),
    }
}

fn criterion_6() -> Outcome {
    let trials = 10_000;
    let expected = 900.0 * (1.0 - (1.0f64 - 0.2 / 1000.0).powi(100));
    let mut total = 0usize;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut st = EpidemicState::new(&[(1, 1000)], 0.2, 0.2).unwrap();
    st.seed_infection(100, &mut rng).unwrap();
    for _ in 0..trials {
        let mut trial = st.clone();
        total += trial.step_sir(&mut rng).infected.len();
    }
    let mean = total as f64 / trials as f64;
    let rel = (mean - expected).abs() / expected;
    Outcome {
        id: 6,
        name: "one-step new infections match 900(1-(1-0.0002)^100)",
        pass: rel < 0.02,
        detail: format!("mean {mean:.3} vs {expected:.3} ({:.2}%), {trials} trials", rel * 100.0),
    }
}

fn criterion_7() -> Outcome {
    let mut ledger = Ledger::new();
    let kinds = [
        EventKind::AttackReport,
        EventKind::ContactWithInfected,
        EventKind::VulnerabilityDisclosed,
        EventKind::VulnerabilityFixed,
        EventKind::AccessLogged,
    ];
    for k in 0..100u64 {
        let ev = LedgerEvent::new(100 + k / 4, kinds[k as usize % 5], UeId::new(64512, 1 + (k % 4) as u32, k + 1))
            .with_detail("victim_community", "4");
        ledger.append(ev).unwrap();
    }
    let base = ledger.into_entries();
    let intact = Ledger::from_entries(base.clone()).verify_chain();
    let (mut mutations, mut detected) = (0u64, 0u64);
    for k in 0..base.len() {
        let width = base[k].payload.len() + 64;
        for bit in 0..width * 8 {
            let mut entries = base.clone();
            let e = &mut entries[k];
            let (byte, mask) = (bit / 8, 1u8 << (bit % 8));
            let p = e.payload.len();
            match byte {
                b if b < p => e.payload[b] ^= mask,
                b if b < p + 32 => e.prev_hash[b - p] ^= mask,
                b => e.entry_hash[b - p - 32] ^= mask,
            }
            mutations += 1;
            if !Ledger::from_entries(entries).verify_chain() {
                detected += 1;
            }
        }
    }
    Outcome {
        id: 7,
        name: "every single-bit mutation of a 100-entry ledger is detected",
        pass: intact && detected == mutations,
        detail: format!("{detected}/{mutations} mutations detected; untouched chain verifies: {intact}"),
    }
}

fn criterion_8() -> Outcome {
    const LIFETIME: u64 = 3600;
    let mut rng = StdRng::seed_from_u64(8);
    let mut violations = Vec::new();
    let mut checks = 0u64;
    let mut check = |ok: bool, what: String| {
        checks += 1;
        if !ok && violations.len() < 5 {
            violations.push(what);
        }
    };
    for k in 0..1000 {
        let kind = if k % 2 == 0 { SignerKind::KeyedHash } else { SignerKind::Ed25519 };
        let mut reg = IdentityRegistry::with_lifetime(64512, 1 + k % 4, kind.generate(&mut rng), LIFETIME);
        let len = rng.gen_range(1..64);
        let req = CertificateRequest {
            subject_public_key: (0..len).map(|_| rng.gen()).collect(),
            ue_type: [UeType::IoT, UeType::Handset, UeType::Server, UeType::NetworkEntity][rng.gen_range(0..4)],
            os_version: format!("os {}.{}", rng.gen_range(0..20), rng.gen_range(0..10)),
            proof_of_identity: (0..8).map(|_| rng.gen()).collect(),
            origin: CertificateOrigin::SelfGenerated,
        };
        let now = rng.gen_range(0..1_000_000);
        let cert = reg.register_certificate(&req, now).unwrap();
        check(reg.verify_certificate(&cert, now) == Verification::Valid, format!("#{k} not valid"));
        check(
            reg.verify_certificate(&cert, now + LIFETIME + 1 + rng.gen_range(0..1000)) == Verification::Expired,
            format!("#{k} not expired"),
        );
        for (field, m) in mutations(&cert) {
            check(
                reg.verify_certificate(&m, now) == Verification::SignatureMismatch,
                format!("#{k} {field} mutation accepted"),
            );
        }
        reg.revoke_certificate(cert.cert_id).unwrap();
        check(reg.verify_certificate(&cert, now) == Verification::Revoked, format!("#{k} not revoked"));
    }
    Outcome {
        id: 8,
        name: "certificate lifecycle over 1000 random requests",
        pass: violations.is_empty(),
        detail: format!("{checks} checks, violations: {violations:?}"),
    }
}

fn mutations(c: &Certificate) -> Vec<(&'static str, Certificate)> {
    let edit = |f: &dyn Fn(&mut Certificate)| {
        let mut m = c.clone();
        f(&mut m);
        m
    };
    vec![
        ("cert_id", edit(&|m| m.cert_id += 1)),
        ("community_id", edit(&|m| m.community_id ^= 8)),
        ("asn", edit(&|m| m.asn += 1)),
        ("subject_public_key", edit(&|m| m.subject_public_key[0] ^= 1)),
        (
            "ue_type",
            edit(&|m| m.ue_type = if m.ue_type == UeType::Server { UeType::IoT } else { UeType::Server }),
        ),
        ("os_version", edit(&|m| m.os_version.insert(0, 'x'))),
        ("issued_at", edit(&|m| m.issued_at ^= 1)),
        ("valid_until", edit(&|m| m.valid_until += 1)),
        ("status", edit(&|m| m.status = CertStatus::Revoked)),
        ("issuer_signature", edit(&|m| m.issuer_signature[0] ^= 1)),
    ]
}

fn files(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(path.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn criterion_9() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/paper_fig5.json");
    let bundle = |name: &str| {
        let out = tmp.path().join(name);
        let mut args = vec!["zt6g".into(), "compare".into(), "--scenario".into()];
        args.push(scenario.clone().into_os_string());
        for a in ["--arch", "zta6g,tbpf,tris", "--runs", "8", "--seed", "42", "--per-run", "--out"] {
            args.push(a.into());
        }
        args.push(out.clone().into_os_string());
        zt6g_cli::main_with_args(args).expect("compare succeeds");
        files(&out)
    };
    let a = bundle("first");
    let b = bundle("second");
    Outcome {
        id: 9,
        name: "repeated compare invocations are byte-identical",
        pass: a == b && a.len() >= 7,
        detail: format!("{} files compared, identical: {}", a.len(), a == b),
    }
}

fn criterion_10() -> Outcome {
    let guest = UeId::new(64512, 2, 17);
    let req = |t| AccessRequest::cross_domain(guest, 4, t, 10).unwrap();
    let m = Multipliers::default();

    // p = 5: continuous requests; every 5 consecutive seconds hold one evaluation.
    let mut cache = DecisionCache::new(5);
    let mut evaluated_at = Vec::new();
    for t in 100..200 {
        let before = cache.evaluations();
        cache.cached_decide(&req(t), t, |_| destination_evaluation(&ZtaInputs::clean(BetaTrust::new(0, 0)), 0.75, &m));
        if cache.evaluations() > before {
            evaluated_at.push(t);
        }
    }
    let windows_ok = (100..196).all(|s| evaluated_at.iter().filter(|&&t| t >= s && t < s + 5).count() == 1);

    // p = 1: cached and uncached decisions agree on a changing input stream.
    let mut rng = StdRng::seed_from_u64(10);
    let mut cache = DecisionCache::new(1);
    let mut same = true;
    for t in 0..10_000u64 {
        let inputs = ZtaInputs {
            certificate: if rng.gen_bool(0.02) { Verification::Revoked } else { Verification::Valid },
            home_view: CelAssessment::default(),
            trust: BetaTrust::new(rng.gen_range(0..20), rng.gen_range(0..3)),
            home_index: rng.gen_range(0.85..=1.0),
            risk: [RiskLevel::LowRisk, RiskLevel::MediumRisk, RiskLevel::HighRisk][rng.gen_range(0..3)],
            cel: CelAssessment {
                contacted_infected: rng.gen_bool(0.1),
                attacked_victim: false,
            },
            abd: rng.gen_range(0.0..0.3),
        };
        let direct = destination_evaluation(&inputs, 0.75, &m);
        let cached = cache.cached_decide(&req(t), t, |_| destination_evaluation(&inputs, 0.75, &m));
        same &= direct == cached;
    }
    let transparent = same && cache.evaluations() == 10_000;
    Outcome {
        id: 10,
        name: "decision cache contract at p=5 and p=1",
        pass: windows_ok && transparent,
        detail: format!(
            "p=5: {} evaluations over 100 s, one per 5-s window: {windows_ok}; p=1 transparent: {transparent}",
            evaluated_at.len()
        ),
    }
}

fn main() -> ExitCode {
    let fig5 = scenario("paper_fig5.json");
    let fig6 = scenario("paper_fig6.json");
    let mut outcomes = Vec::new();

    let started = Instant::now();
    let mut results = BTreeMap::new();
    for arch in [Architecture::Zta6g, Architecture::Tbpf, Architecture::Tris] {
        results.insert(arch, batch(&fig5, arch, 1));
    }
    let secs = started.elapsed().as_secs_f64();
    outcomes.push(criterion_1(&results, secs));
    outcomes.push(criterion_2(&results));
    outcomes.push(criterion_3(&results[&Architecture::Tris]));

    let mut sweep = BTreeMap::new();
    for &p in &fig6.sweep_periods_s {
        let a = if p == 1 && fig6.engine == fig5.engine {
            acc(&results[&Architecture::Zta6g])
        } else {
            acc(&batch(&fig6, Architecture::Zta6g, p))
        };
        sweep.insert(p, a);
    }
    outcomes.push(criterion_4(&sweep));
    outcomes.push(criterion_5());
    outcomes.push(criterion_6());
    outcomes.push(criterion_7());
    outcomes.push(criterion_8());
    outcomes.push(criterion_9());
    outcomes.push(criterion_10());

    let mut failed = 0;
    for o in &outcomes {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!("[{tag}] criterion {:>2}: {} | {}", o.id, o.name, o.detail);
    }
    println!(
        "acceptance: {}/{} criteria passed in {:.1}s",
        outcomes.len() - failed,
        outcomes.len(),
        started.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
