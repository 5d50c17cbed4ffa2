//! Acceptance gate. Each test covers one release criterion end to end and
//! prints a single PASS line with its measured runtime; run with
//! `cargo test --test acceptance -- --nocapture` to see them.

mod common;

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use butterflow::gfq::{uniform_packet, FieldSpec, Packet};
use butterflow::netgraph::{
    gns_sum_bound, min_cut, EdgeLabel, EndpointId, Network, TemplateCaps, Variant, ALL_VARIANTS,
};
use butterflow::rational::Rational;
use butterflow::regions::{achievable_region, capacity_region, equivalent, RatePair};
use butterflow::schemes::{execute, plan, trace_csv, verify_reliability};
use butterflow::secaudit::{
    audit, audit_states, classify_family, search_families, EncoderFamily, FAMILY_COUNT,
};

use common::random_caps;

const SECURE_VARIANTS: [Variant; 3] = [
    Variant::CoLocatedSources,
    Variant::CoLocatedSinks,
    Variant::Butterfly2,
];

fn finish(number: u32, name: &str, detail: String, started: Instant, budget: Duration) {
    let elapsed = started.elapsed();
    println!("criterion {number} ({name}): PASS ({detail}) in {elapsed:.2?}");
    assert!(
        elapsed < budget,
        "criterion {number} took {elapsed:.2?}, budget {budget:?}"
    );
}

#[test]
fn criterion_1_region_equivalence() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC1);
    let mut checked = 0u64;
    for variant in ALL_VARIANTS {
        for _ in 0..1000 {
            let caps = random_caps(&mut rng, variant, 5, 8);
            for secure in [false, true] {
                let outer = capacity_region(&caps, secure);
                let inner = achievable_region(&caps, secure);
                assert!(
                    equivalent(&outer, &inner).unwrap(),
                    "{variant} secure={secure} caps {caps:?}"
                );
                checked += 1;
            }
        }
    }
    finish(
        1,
        "region equivalence",
        format!("{checked} region pairs, exact vertex containment"),
        started,
        Duration::from_secs(30),
    );
}

#[test]
fn criterion_2_vertex_achievability() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC2);
    let mut decoded_blocks = 0u64;
    for variant in ALL_VARIANTS {
        for _ in 0..100 {
            let caps = random_caps(&mut rng, variant, 5, 4);
            let region = capacity_region(&caps, false);
            for vertex in region.vertices().unwrap() {
                for q in [2u32, 3] {
                    let field = FieldSpec::new(q).unwrap();
                    let p = plan(&caps, vertex.point, false, field).unwrap_or_else(|e| {
                        panic!("{variant} vertex {} rejected: {e}", vertex.point)
                    });
                    for _ in 0..10 {
                        let w1: Vec<Packet> =
                            (0..p.k1).map(|_| uniform_packet(field, 1, &mut rng)).collect();
                        let w2: Vec<Packet> =
                            (0..p.k2).map(|_| uniform_packet(field, 1, &mut rng)).collect();
                        let trace = execute(&p, &w1, &w2, &mut rng).unwrap();
                        assert!(
                            verify_reliability(&trace),
                            "{variant} vertex {} over GF({q})",
                            vertex.point
                        );
                        decoded_blocks += 1;
                    }
                }
            }
        }
    }
    finish(
        2,
        "vertex achievability",
        format!("{decoded_blocks} blocks decoded without error"),
        started,
        Duration::from_secs(60),
    );
}

#[test]
fn criterion_3_outer_bound_consistency() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC3);
    let mut checked = 0u64;
    for variant in ALL_VARIANTS {
        for _ in 0..1000 {
            let caps = random_caps(&mut rng, variant, 5, 8);
            let net = Network::from_template(&caps);
            let cut = |from, to| {
                min_cut(&net, &net.sources_for(from), &net.sinks_for(to))
                    .unwrap()
                    .value()
            };
            let c = |i: u8| caps.single(i);
            let (expect_r1, expect_r2) = match variant {
                Variant::Butterfly1 => (
                    c(1).min(c(3)).min(c(7)),
                    c(2).min(c(3)).min(c(6)),
                ),
                Variant::CoLocatedSources => {
                    let c12 = caps.get(EdgeLabel::Merged(1, 2));
                    (
                        c(5) + c12.min(c(3)).min(c(7)),
                        c(4) + c12.min(c(3)).min(c(6)),
                    )
                }
                Variant::CoLocatedSinks => {
                    let c67 = caps.get(EdgeLabel::Merged(6, 7));
                    (
                        c(4) + c(1).min(c(3)).min(c67),
                        c(5) + c(2).min(c(3)).min(c67),
                    )
                }
                Variant::Butterfly2 => (
                    c(4) + c(1).min(c(3)).min(c(7)),
                    c(5) + c(2).min(c(3)).min(c(6)),
                ),
            };
            assert_eq!(
                cut(EndpointId::One, EndpointId::One),
                expect_r1,
                "{variant} session 1 cut, caps {caps:?}"
            );
            assert_eq!(
                cut(EndpointId::Two, EndpointId::Two),
                expect_r2,
                "{variant} session 2 cut, caps {caps:?}"
            );
            if variant == Variant::Butterfly1 {
                let expect = (c(3) + c(4)).min(c(3) + c(5));
                assert_eq!(gns_sum_bound(&net).unwrap(), expect, "caps {caps:?}");
            }
            checked += 1;
        }
    }
    finish(
        3,
        "outer-bound consistency",
        format!("{checked} capacity vectors, max-flow vs closed forms"),
        started,
        Duration::from_secs(30),
    );
}

#[test]
fn criterion_4_secure_scheme_secrecy() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC4);
    let mut audits = 0u64;
    let mut audit_vertices = |caps: &TemplateCaps, fields: &[u32]| {
        let region = capacity_region(caps, true);
        for vertex in region.vertices().unwrap() {
            for &q in fields {
                let field = FieldSpec::new(q).unwrap();
                let p = plan(caps, vertex.point, true, field).unwrap_or_else(|e| {
                    panic!("secure vertex {} rejected: {e}", vertex.point)
                });
                let verdict = audit(&p).unwrap();
                assert!(
                    verdict.pass,
                    "{} vertex {} over GF({q}): leak on {:?}",
                    caps.variant(),
                    vertex.point,
                    verdict.first_failure
                );
                audits += 1;
            }
        }
    };
    for variant in SECURE_VARIANTS {
        audit_vertices(&TemplateCaps::unit(variant), &[2, 3]);
        let mut sampled = 0;
        let mut attempts = 0;
        while sampled < 20 {
            attempts += 1;
            assert!(attempts < 500, "cannot sample auditable capacity vectors");
            let caps = random_caps(&mut rng, variant, 2, 2);
            let region = capacity_region(&caps, true);
            let too_big = region.vertices().unwrap().iter().any(|v| {
                match plan(&caps, v.point, true, FieldSpec::new(2).unwrap()) {
                    Ok(p) => audit_states(&p) > 1 << 18,
                    Err(_) => true,
                }
            });
            if too_big {
                continue;
            }
            audit_vertices(&caps, &[2]);
            sampled += 1;
        }
    }
    finish(
        4,
        "secure scheme secrecy",
        format!("{audits} vertex plans passed every per-edge independence test"),
        started,
        Duration::from_secs(120),
    );
}

#[test]
fn criterion_5_encoder_search_witness() {
    let started = Instant::now();
    let report = search_families();
    assert_eq!(report.summary.scanned, FAMILY_COUNT as u64);
    assert_eq!(
        report.summary.secure_positive, 0,
        "a secure positive-rate family should not exist: {:?}",
        report.first_secure_positive
    );
    assert!(report.summary.decodable_both >= 1);
    // Exactly the sign-flip variants of the relay-sum coding decode both
    // sessions: 4 source complements, summed or complement-summed relay, and
    // complemented relay fan-out make 2^7.
    assert_eq!(report.summary.decodable_both, 128);
    let xor = classify_family(EncoderFamily::xor_family());
    assert!(xor.decodes_w1 && xor.decodes_w2 && !xor.leak_free);
    // Rescanning the singleton block shows the relay-sum family is counted.
    let index = EncoderFamily::xor_family().to_index();
    let block = butterflow::secaudit::search_range(index..index + 1);
    assert_eq!(block.decodable_both, 1);
    assert_eq!(block.secure_positive, 0);
    finish(
        5,
        "encoder search witness",
        format!(
            "{} families: {} decode both, {} secure at positive rate",
            report.summary.scanned, report.summary.decodable_both, report.summary.secure_positive
        ),
        started,
        Duration::from_secs(300),
    );
}

#[test]
fn criterion_6_leakage_contrast() {
    let started = Instant::now();
    let mut failures_observed = 0u64;
    for variant in ALL_VARIANTS {
        let caps = TemplateCaps::unit(variant);
        let region = capacity_region(&caps, false);
        let mut rates: Vec<RatePair> = region
            .vertices()
            .unwrap()
            .into_iter()
            .map(|v| v.point)
            .filter(|p| p.sum() > Rational::from_integer(0))
            .collect();
        let half = RatePair::new(
            Rational::new(1, 2),
            Rational::new(1, 2),
        )
        .unwrap();
        if region.contains(half) {
            rates.push(half);
        }
        assert!(!rates.is_empty());
        for rate in rates {
            let p = plan(&caps, rate, false, FieldSpec::new(2).unwrap()).unwrap();
            let verdict = audit(&p).unwrap();
            assert!(
                !verdict.pass,
                "{variant} at {rate}: a plaintext plan audited clean"
            );
            assert!(verdict.first_failure.is_some());
            assert!(verdict
                .edges
                .iter()
                .any(|e| !e.factorizes && e.mutual_information_bits > 0.0));
            failures_observed += 1;
        }
    }
    finish(
        6,
        "leakage contrast",
        format!("{failures_observed} positive-rate plaintext plans flagged"),
        started,
        Duration::from_secs(10),
    );
}

#[test]
fn criterion_7_unit_butterfly_golden_trace() {
    let started = Instant::now();
    let caps = TemplateCaps::unit(Variant::Butterfly1);
    let field = FieldSpec::new(2).unwrap();
    let rate = RatePair::new(Rational::from_integer(1), Rational::from_integer(1)).unwrap();
    let p = plan(&caps, rate, false, field).unwrap();

    let run = |seed: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w1: Vec<Packet> = (0..p.k1).map(|_| uniform_packet(field, 1, &mut rng)).collect();
        let w2: Vec<Packet> = (0..p.k2).map(|_| uniform_packet(field, 1, &mut rng)).collect();
        execute(&p, &w1, &w2, &mut rng).unwrap()
    };

    let golden = run(1);
    assert_eq!(
        trace_csv(&golden),
        "edge,slot,symbol\n\
         1,0,1\n\
         2,0,0\n\
         3,0,1\n\
         4,0,1\n\
         5,0,0\n\
         6,0,1\n\
         7,0,1\n"
    );
    assert_eq!(trace_csv(&run(1)), trace_csv(&golden), "same seed, same bytes");

    for seed in 0..50 {
        let trace = run(seed);
        let w1 = trace.inputs.w1[0].symbols()[0];
        let w2 = trace.inputs.w2[0].symbols()[0];
        let e3 = &trace
            .edges
            .iter()
            .find(|(l, _)| *l == EdgeLabel::Single(3))
            .unwrap()
            .1;
        assert_eq!(e3[0].symbols()[0], w1 ^ w2, "seed {seed}");
        assert!(verify_reliability(&trace));
    }
    finish(
        7,
        "unit butterfly golden trace",
        "relay link carries the message sum, bytes frozen".to_string(),
        started,
        Duration::from_secs(1),
    );
}
