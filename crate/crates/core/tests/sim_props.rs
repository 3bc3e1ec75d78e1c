use std::collections::BTreeSet;

use proptest::prelude::*;
use scaffolding_core::analytics::Group;
use scaffolding_core::annotate::{
    annotate_session, ActionKind, Activity, LongReadRule, TimeShares,
};
use scaffolding_core::causal::{default_expert, map_score, ExpertMap};
use scaffolding_core::scaffold::{
    bundled_trees, verify_delivery, verify_spacing, EngineConfig, FirstOption, ScaffoldEngine,
    SessionRun, TreeSet,
};
use scaffolding_core::sim::{
    bundled_profiles, cohort_plan, parse_profiles, simulate_cohort, simulate_session, valid_scopes,
    EngineHandle, SessionLog, SimError, StudentProfile, DEFAULT_BUDGET_SECONDS,
};

struct Rig {
    expert: ExpertMap,
    engine: ScaffoldEngine,
    trees: TreeSet,
}

impl Rig {
    fn new() -> Self {
        let expert = default_expert();
        Self {
            engine: ScaffoldEngine::new(EngineConfig::default(), expert.clone()).unwrap(),
            expert,
            trees: bundled_trees(),
        }
    }

    fn handle(&self) -> Option<EngineHandle<'_>> {
        Some(EngineHandle {
            engine: &self.engine,
            trees: &self.trees,
        })
    }

    fn run(&self, profile: &StudentProfile, budget: f64) -> SessionLog {
        simulate_session(profile, "s1", &self.expert, budget, self.handle()).unwrap()
    }
}

fn with_seed(p: &StudentProfile, seed: u64) -> StudentProfile {
    StudentProfile { seed, ..p.clone() }
}

#[test]
fn read_only_profile_only_reads() {
    let rig = Rig::new();
    let (high, _) = bundled_profiles();
    let p = StudentProfile {
        activity_mix: TimeShares {
            read: 1.0,
            ..TimeShares::default()
        },
        ..high
    };
    let log = rig.run(&p, 1200.0);
    assert!(!log.events.is_empty());
    assert!(log
        .events
        .iter()
        .all(|e| matches!(e.kind, ActionKind::Read { .. })));
    assert!(log.deliveries.is_empty());
}

#[test]
fn perfect_reader_completes_the_map() {
    let rig = Rig::new();
    let (high, _) = bundled_profiles();
    let p = StudentProfile {
        read_effectiveness: 1.0,
        ..high
    };
    for seed in 0..3 {
        let p = with_seed(&p, seed);
        let plain = simulate_session(&p, "s1", &rig.expert, 20_000.0, None).unwrap();
        assert_eq!(map_score(&plain.final_map, &rig.expert), 15);
        assert_eq!(rig.run(&p, 20_000.0).final_map.link_count(), 15);
    }
}

#[test]
fn sessions_are_reproducible() {
    let rig = Rig::new();
    let (high, low) = bundled_profiles();
    for p in [&high, &low] {
        let (a, b) = (rig.run(p, 1800.0), rig.run(p, 1800.0));
        assert_eq!(a.events, b.events);
        assert_eq!(a.affect, b.affect);
        assert_eq!(a.deliveries, b.deliveries);
        assert_eq!((a.pre, a.post), (b.pre, b.post));
    }
}

#[test]
fn cohorts_are_reproducible_and_seed_sensitive() {
    let rig = Rig::new();
    let (high, low) = bundled_profiles();
    let run = |seed| {
        simulate_cohort(1, 1, seed, (&high, &low), &rig.expert, 1800.0, rig.handle()).unwrap()
    };
    let (a, b) = (run(11), run(11));
    assert_eq!(a.len(), 2);
    assert_eq!(a[0].0, Group::High);
    assert_eq!(a[1].0, Group::Low);
    for ((_, x), (_, y)) in a.iter().zip(&b) {
        assert_eq!(x.events, y.events);
    }
    let counts =
        |c: &[(Group, SessionLog)]| c.iter().map(|(_, l)| l.events.len()).collect::<Vec<_>>();
    assert_ne!(counts(&a), counts(&run(12)));
    let plan = cohort_plan(40, 40, 3);
    assert_eq!(plan.len(), 80);
    assert_eq!(plan.iter().filter(|m| m.group == Group::High).count(), 40);
    assert_eq!(
        plan.iter().map(|m| m.seed).collect::<BTreeSet<_>>().len(),
        80
    );
}

#[test]
fn bad_budget_is_rejected() {
    let rig = Rig::new();
    let (high, _) = bundled_profiles();
    assert!(matches!(
        simulate_session(&high, "s1", &rig.expert, 0.0, None),
        Err(SimError::BadBudget(_))
    ));
}

#[test]
fn profiles_round_trip_through_toml() {
    let (high, low) = bundled_profiles();
    #[derive(serde::Serialize)]
    struct Doc<'a> {
        profile: [&'a StudentProfile; 2],
    }
    let text = toml::to_string(&Doc {
        profile: [&high, &low],
    })
    .unwrap();
    assert_eq!(parse_profiles(&text).unwrap(), vec![high, low]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn simulated_sessions_are_internally_consistent(seed in any::<u64>(), low in any::<bool>(), budget in 300.0f64..3000.0) {
        let rig = Rig::new();
        let (h, l) = bundled_profiles();
        let p = with_seed(if low { &l } else { &h }, seed);
        let log = rig.run(&p, budget);
        prop_assert!(log.session_end <= budget + 1e-9);
        prop_assert!(log.events.windows(2).all(|w| w[0].end() <= w[1].timestamp + 1e-9));
        prop_assert_eq!(log.affect.len(), (log.session_end / 20.0).ceil() as usize);
        prop_assert!(log.pre < log.test_max && log.post <= log.test_max);

        // Replay closure: the log annotates cleanly and offline replay
        // reproduces the in-loop deliveries.
        let annotated = annotate_session(&log.events, &rig.expert, LongReadRule::default()).unwrap();
        prop_assert_eq!(&annotated, &log.annotated);
        let run = SessionRun::replay(&rig.engine, &rig.trees, &log.events, &mut FirstOption).unwrap();
        prop_assert_eq!(&run.deliveries, &log.deliveries);
        for d in &log.deliveries {
            verify_delivery(d, &annotated, &rig.expert, rig.engine.config()).map_err(TestCaseError::fail)?;
        }
        verify_spacing(&log.deliveries, 60.0).map_err(TestCaseError::fail)?;

        let scopes = valid_scopes(&rig.expert);
        for e in &log.events {
            if let ActionKind::TakeQuiz { scope } = &e.kind {
                prop_assert!(scopes.contains(scope));
            }
            if let ActionKind::QuizExpl { .. } = &e.kind {
                prop_assert!(log.events.iter().any(|q| q.kind.activity() == Activity::TakeQuiz && q.timestamp < e.timestamp));
            }
        }
    }
}

#[test]
fn default_budget_session_has_every_activity() {
    let rig = Rig::new();
    let (high, _) = bundled_profiles();
    let log = rig.run(&high, DEFAULT_BUDGET_SECONDS);
    let seen: BTreeSet<Activity> = log.events.iter().map(|e| e.kind.activity()).collect();
    assert_eq!(seen.len(), 5);
}
