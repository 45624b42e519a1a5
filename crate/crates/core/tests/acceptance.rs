//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use decoysim::adversary::{
    analytic_posterior, attack_impersonate, estimate_mutual_information, generate_samples,
    posterior_from_features, sum_channel_information, FeatureExtractor, FeatureVector,
    RampFeatures,
};
use decoysim::decoy::run_decoy_transmission;
use decoysim::millionaires::{
    audit, compare_digitwise, compare_elevator, compare_race_bitstring, compare_race_with_dt,
    compare_vessels, leakage_bits, Comparator, Finding, Ordering,
};
use decoysim::report::cmd_analyze;
use decoysim::sim::{
    run_scenario, AdversaryKind, Interval, PartySecrets, Protocol, RampModel, Scenario,
};
use decoysim::Error;
use num_rational::Ratio;

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn decoy(domain: Interval, a: u64, b: u64, model: RampModel) -> Scenario {
    Scenario::new(Protocol::DecoyForce, domain, a, Some(b)).with_ramp(model)
}

fn features(s: &Scenario, n: usize) -> Vec<(u64, FeatureVector)> {
    let fx = RampFeatures::for_scenario(s);
    generate_samples(s, n)
        .expect("sample generation")
        .iter()
        .map(|x| (x.secret, fx.extract(&x.transcript)))
        .collect()
}

fn decoy_correctness() -> Verdict {
    let d = Interval::new(1, 100);
    let runs: Vec<(u64, u64, u64)> = d
        .iter()
        .flat_map(|a| {
            d.iter()
                .flat_map(move |b| (0..3).map(move |seed| (a, b, seed)))
        })
        .collect();
    let ok = runs
        .par_iter()
        .filter(|&&(a, b, seed)| {
            let s = decoy(d, a, b, RampModel::RandomRamp).with_seed(seed);
            run_decoy_transmission(&s).is_ok_and(|o| o.recovered == Ok(a))
        })
        .count();
    verdict(
        ok == runs.len(),
        format!("{ok}/{} runs recovered the sender's secret", runs.len()),
    )
}

fn split_invisibility() -> Verdict {
    let d = Interval::new(1, 10);
    let stable = |a, b| {
        let o = run_decoy_transmission(&decoy(d, a, b, RampModel::Synchronous)).unwrap();
        let first = o.sender_stabilize_tick.unwrap();
        o.transcript
            .measurements()
            .filter(|&(t, _)| t >= first)
            .collect::<Vec<_>>()
    };
    let (x, y) = (stable(3, 5), stable(4, 4));
    verdict(
        !x.is_empty() && x == y,
        format!(
            "(3,5) and (4,4) stable phases: {} measurements, identical = {}",
            x.len(),
            x == y
        ),
    )
}

fn passive_security() -> Verdict {
    let d = Interval::new(1, 8);
    let s = decoy(d, 3, 5, RampModel::Synchronous).with_seed(20_000);
    let samples = features(&s, 10_000);
    let analytic = sum_channel_information(d, d);
    let mi = estimate_mutual_information(&samples).unwrap();
    let mut worst = 0.0f64;
    let mut all_within = true;
    for total in 2..=16u64 {
        let q = analytic_posterior(total, d, d)
            .values()
            .copied()
            .fold(0.0, f64::max);
        let r = posterior_from_features(&samples, &vec![total as i64, 0], d, 100).unwrap();
        let sigma = (q * (1.0 - q) / r.matching_samples as f64).sqrt();
        let z = if sigma == 0.0 {
            if r.max_prob == q {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (r.max_prob - q).abs() / sigma
        };
        worst = worst.max(z);
        all_within &= z <= 3.0;
    }
    let mi_ok = (mi - analytic).abs() <= 0.05;
    verdict(
        mi_ok && all_within,
        format!(
            "mi {mi:.4} vs analytic {analytic:.4} bits (|diff| {:.4} <= 0.05); worst max_prob deviation {worst:.2} sigma over totals 2..=16",
            (mi - analytic).abs()
        ),
    )
}

fn negative_control() -> Verdict {
    let d = Interval::new(1, 8);
    let analytic = sum_channel_information(d, d);
    let s = decoy(d, 3, 5, RampModel::DeterministicRamp).with_seed(30_000);
    let mi = estimate_mutual_information(&features(&s, 10_000)).unwrap();
    verdict(
        mi >= analytic + 1.0,
        format!(
            "deterministic-ramp mi {mi:.4} bits >= {:.4}",
            analytic + 1.0
        ),
    )
}

fn millionaires_correctness() -> Verdict {
    let start = Instant::now();
    let mut bad = 0usize;
    let mut total = 0usize;
    let mut check = |ok: bool| {
        total += 1;
        bad += usize::from(!ok);
    };
    for a in 1..=50 {
        for b in 1..=50 {
            let e = compare_elevator(a, b, 50).unwrap();
            check(e.ordering == Ordering::expected(a, b, e.tie_convention));
            check(compare_vessels(a, b, 5).unwrap().ordering == Ordering::of(a, b));
        }
    }
    for a in 1..=30 {
        for b in 1..=30 {
            check(
                compare_race_with_dt(a, b, 60, Ratio::from_integer(1))
                    .unwrap()
                    .ordering
                    == Ordering::of(a, b),
            );
            check(compare_race_bitstring(a, b, 60).unwrap().ordering == Ordering::of(a, b));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        bad == 0 && secs < 10.0,
        format!(
            "{}/{total} comparisons agree with the integer oracle in {secs:.2} s",
            total - bad
        ),
    )
}

fn digitwise_reduction() -> Verdict {
    let mut lines = Vec::new();
    let mut pass = true;
    for c in Comparator::ALL {
        let bad: usize = (0..=999u64)
            .into_par_iter()
            .map(|a| {
                (0..=999u64)
                    .filter(|&b| {
                        compare_digitwise(a, b, 10, c).map(|o| o.ordering) != Ok(Ordering::of(a, b))
                    })
                    .count()
            })
            .sum();
        pass &= bad == 0;
        lines.push(format!("{c:?} {bad} mismatches"));
    }
    verdict(pass, format!("[0,999]^2 base 10: {}", lines.join(", ")))
}

fn vessels_leakage() -> Verdict {
    let d = Interval::new(1, 50);
    let mut exact = 0;
    for a in d.iter() {
        for b in d.iter() {
            let o = compare_vessels(a, b, 5).unwrap();
            let f = audit(&o, d, Ratio::from_integer(1));
            exact += usize::from(
                f == vec![Finding::DifferenceLeaked {
                    b_minus_a: b as f64 - a as f64,
                }],
            );
        }
    }
    let s = Scenario::new(Protocol::Vessels, d, 5, Some(3));
    let leak = leakage_bits(&s).unwrap();
    let text = cmd_analyze(&s, 0).unwrap().to_text();
    let flagged = leak.exceeds_one_bit && text.contains("LEAKAGE EXCEEDS ONE BIT");
    verdict(
        exact == 2500 && flagged,
        format!(
            "slope == b-a in {exact}/2500 runs; observables {:.3} bits vs ordering {:.3} bits, flagged = {flagged}",
            leak.leaked_bits, leak.ordering_bits
        ),
    )
}

fn mitm_defense() -> Verdict {
    let d = Interval::new(1, 10);
    let scenario = |a, seed, model, defense| {
        let mut s = Scenario::new(Protocol::DecoyForce, d, a, None)
            .with_adversary(AdversaryKind::Impersonator)
            .with_ramp(model)
            .with_seed(seed);
        s.defense_enabled = defense;
        s.max_ticks = 60;
        s
    };
    let mut naive = (0, 0);
    let mut defended = (0, 0);
    for a in d.iter() {
        for seed in 0..20 {
            for model in [RampModel::Synchronous, RampModel::RandomRamp] {
                naive.1 += 1;
                if attack_impersonate(&scenario(a, seed, model, false))
                    .is_ok_and(|o| o.adversary_estimate == Some(a))
                {
                    naive.0 += 1;
                }
                defended.1 += 1;
                if matches!(
                    attack_impersonate(&scenario(a, seed, model, true)),
                    Err(Error::ProtocolTimeout { .. })
                ) {
                    defended.0 += 1;
                }
            }
        }
    }
    // Posterior over the secret from defended, timed-out transcripts.
    let base = {
        let mut s = scenario(3, 40_000, RampModel::RandomRamp, true);
        s.party_secrets = PartySecrets {
            alice: 3,
            bob: None,
        };
        s
    };
    let samples = features(&base, 10_000);
    let observed = match attack_impersonate(&base) {
        Err(Error::ProtocolTimeout { transcript, .. }) => {
            RampFeatures::for_scenario(&base).extract(&transcript)
        }
        _ => vec![i64::MIN],
    };
    let (uniform, worst) = match posterior_from_features(&samples, &observed, d, 100) {
        Ok(r) => {
            let q = 1.0 / d.size() as f64;
            let sigma = (q * (1.0 - q) / r.matching_samples as f64).sqrt();
            let worst = r
                .posterior
                .values()
                .map(|p| (p - q).abs() / sigma)
                .fold(0.0, f64::max);
            (worst <= 3.0, worst)
        }
        Err(_) => (false, f64::INFINITY),
    };
    verdict(
        naive.0 == naive.1 && defended.0 == defended.1 && uniform,
        format!(
            "naive sender leaked in {}/{}; defended timed out in {}/{}; posterior within {worst:.2} sigma of uniform",
            naive.0, naive.1, defended.0, defended.1
        ),
    )
}

fn determinism() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let protocols = [
        Protocol::DecoyForce,
        Protocol::DecoyWave,
        Protocol::Elevator,
        Protocol::Race,
        Protocol::RaceBitstring,
        Protocol::Vessels,
    ];
    let models = [
        RampModel::Synchronous,
        RampModel::RandomRamp,
        RampModel::DeterministicRamp,
    ];
    let mut same = 0;
    for _ in 0..100 {
        let protocol = protocols[rng.random_range(0..protocols.len())];
        let n2 = rng.random_range(2..=100);
        let d = Interval::new(1, n2);
        let mut s = Scenario::new(
            protocol,
            d,
            rng.random_range(1..=n2),
            Some(rng.random_range(1..=n2)),
        )
        .with_seed(rng.random())
        .with_ramp(models[rng.random_range(0..models.len())]);
        if protocol.is_decoy() && rng.random_bool(0.5) {
            s.noise_sigma = 0.05;
            s.epsilon_stab = 0.2;
            s.hold_ticks = 20;
        }
        let digest = |s: &Scenario| match run_scenario(s) {
            Ok(o) => Some(o.digest()),
            Err(Error::ProtocolTimeout { transcript, .. }) => {
                Some(decoysim::sim::replay_digest(&transcript))
            }
            Err(_) => None,
        };
        let (x, y) = (digest(&s), digest(&s));
        same += usize::from(x.is_some() && x == y);
    }
    verdict(
        same == 100,
        format!("{same}/100 scenarios replayed to identical digests"),
    )
}

fn noise_robustness() -> Verdict {
    let d = Interval::new(1, 100);
    let ok = (0..1000u64)
        .into_par_iter()
        .filter(|&i| {
            let mut rng = ChaCha8Rng::seed_from_u64(50_000 + i);
            let mut s = decoy(
                d,
                rng.random_range(1..=100),
                rng.random_range(1..=100),
                RampModel::RandomRamp,
            )
            .with_seed(i);
            s.noise_sigma = 0.05;
            s.epsilon_stab = 0.2;
            s.hold_ticks = 50;
            s.max_ticks = 2000;
            run_decoy_transmission(&s).is_ok_and(|o| o.success())
        })
        .count();
    verdict(
        ok >= 990,
        format!("{ok}/1000 noisy runs recovered the secret (need >= 990)"),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("decoy correctness", decoy_correctness),
        ("split invisibility", split_invisibility),
        ("passive-adversary security", passive_security),
        ("negative control", negative_control),
        ("millionaires correctness", millionaires_correctness),
        ("digit-wise reduction", digitwise_reduction),
        ("vessels leakage finding", vessels_leakage),
        ("man-in-the-middle defense", mitm_defense),
        ("determinism", determinism),
        ("noise robustness", noise_robustness),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = run();
        failed += usize::from(!v.pass);
        println!(
            "criterion {:>2} {:<28} {}  {} ({:.2} s)",
            i + 1,
            name,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
