use evomatch::acceptance::chi_square_uniform_p;
use evomatch::evolution::{EvolutionMode, EvolvingInstance, QueryTriple};
use evomatch::model::{random_profile, AgentId, Permutation, PreferenceProfile, Side};
use evomatch::rng::{stream, Stream};

#[test]
fn rank_one_occupant_of_random_lists_is_uniform() {
    let n = 64;
    let mut counts = vec![0u64; n];
    for seed in 0..10_000u64 {
        let p = random_profile(n, &mut stream(seed, Stream::Profile)).unwrap();
        counts[p.a_lists()[(seed % n as u64) as usize].at(0)] += 1;
    }
    let expected = 10_000.0 / n as f64;
    let sigma = (10_000.0 * (1.0 / n as f64) * (1.0 - 1.0 / n as f64)).sqrt();
    for &c in &counts {
        assert!((c as f64 - expected).abs() <= 4.0 * sigma, "count {c} far from {expected}");
    }
    let p = chi_square_uniform_p(&counts);
    assert!(p > 0.01, "p = {p}");
}

#[test]
fn events_are_uniform_over_owner_and_rank() {
    let n = 16;
    let p = random_profile(n, &mut stream(3, Stream::Profile)).unwrap();
    let mut inst = EvolvingInstance::new(p, 2, EvolutionMode::TwoSided, stream(3, Stream::Nature));
    for k in 0..100_000usize {
        inst.query(QueryTriple::new(AgentId::a(k % n), 0, 1)).unwrap();
    }
    let log = inst.event_log().unwrap();
    assert_eq!(log.len(), 200_000);
    // cells: 2n owners times n - 1 ranks
    let mut counts = vec![0u64; 2 * n * (n - 1)];
    for e in log {
        let z = match e.owner.side {
            Side::A => e.owner.index,
            Side::B => n + e.owner.index,
        };
        counts[z * (n - 1) + e.rank] += 1;
    }
    let p = chi_square_uniform_p(&counts);
    assert!(p > 0.01, "p = {p}");
}

#[test]
fn a_long_walk_mixes_the_top_of_a_list() {
    let n = 64;
    let id = Permutation::identity(n);
    let profile = PreferenceProfile::new(vec![id.clone(); n], vec![id; n]).unwrap();
    let mut inst = EvolvingInstance::new(profile, 1, EvolutionMode::OneSidedB, stream(9, Stream::Nature)).without_event_log();
    // one-sided evolution spreads events over n lists; follow B0 only
    let mut counts = vec![0u64; n];
    let mut events_on_b0 = 0u64;
    while events_on_b0 < 1_000_000 {
        let e = inst.apply_evolution_event().unwrap();
        if e.owner == AgentId::b(0) {
            events_on_b0 += 1;
            if events_on_b0.is_multiple_of(512) {
                counts[inst.snapshot().list(AgentId::b(0)).at(0)] += 1;
            }
        }
    }
    // successive readings are correlated, so only a loose check
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / n as f64;
    let seen = counts.iter().filter(|&&c| c > 0).count();
    assert!(seen >= n * 3 / 4, "only {seen} distinct leaders");
    let max = *counts.iter().max().unwrap() as f64;
    assert!(max < 4.0 * expected, "max {max} vs expected {expected}");
}

#[test]
fn two_agent_events_pick_each_list_equally() {
    let p = random_profile(2, &mut stream(1, Stream::Profile)).unwrap();
    let mut inst = EvolvingInstance::new(p, 1, EvolutionMode::TwoSided, stream(1, Stream::Nature));
    for _ in 0..20_000 {
        inst.query(QueryTriple::new(AgentId::a(0), 0, 1)).unwrap();
    }
    let mut counts = [0u64; 4];
    for e in inst.event_log().unwrap() {
        assert_eq!(e.rank, 0);
        counts[e.owner.index + if e.owner.side == Side::B { 2 } else { 0 }] += 1;
    }
    assert!(chi_square_uniform_p(&counts) > 0.01, "{counts:?}");
}
