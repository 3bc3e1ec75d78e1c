mod common;

use common::Log;
use proptest::prelude::*;
use scaffolding_core::annotate::{added_link, ActionKind, MapEdit};
use scaffolding_core::causal::{
    classify_link, default_expert, CausalLink, ConceptId, LinkClass, Marking, Sign,
};
use scaffolding_core::scaffold::{
    bundled_trees, verify_delivery, verify_spacing, EngineConfig, FirstOption, ScaffoldEngine,
    ScaffoldKind, SessionRun,
};

#[derive(Debug, Clone)]
enum Intent {
    Read { page: usize, duration: f64 },
    Note { duration: f64 },
    Link { a: usize, b: usize, increase: bool },
    Mark { which: usize, correct: bool },
    Quiz,
    Wait(f64),
}

fn intent() -> impl Strategy<Value = Intent> {
    prop_oneof![
        3 => (0usize..7, 5.0f64..150.0).prop_map(|(page, duration)| Intent::Read { page, duration }),
        1 => (1.0f64..30.0).prop_map(|duration| Intent::Note { duration }),
        4 => (0usize..12, 0usize..12, any::<bool>()).prop_map(|(a, b, increase)| Intent::Link { a, b, increase }),
        1 => (0usize..20, any::<bool>()).prop_map(|(which, correct)| Intent::Mark { which, correct }),
        2 => Just(Intent::Quiz),
        1 => (1.0f64..90.0).prop_map(Intent::Wait),
    ]
}

/// Turns intents into a valid log: links toggle between add, sign flip and
/// delete depending on what the map holds.
fn materialize(intents: &[Intent]) -> Log {
    let expert = default_expert();
    let concepts: Vec<ConceptId> = expert.map().concepts().map(|c| c.id.clone()).collect();
    let pages: Vec<String> = expert.pages().map(|(p, _)| p.to_string()).collect();
    let mut held: Vec<(usize, usize, Sign, Marking)> = Vec::new();
    let mut log = Log::with_concepts();
    for i in intents {
        match *i {
            Intent::Read { page, duration } => {
                log.read(&pages[page % pages.len()], duration);
            }
            Intent::Note { duration } => {
                log.note(duration);
            }
            Intent::Link { a, b, increase } => {
                if a == b {
                    continue;
                }
                let sign = if increase {
                    Sign::Increase
                } else {
                    Sign::Decrease
                };
                let (s, t) = (concepts[a].as_str(), concepts[b].as_str());
                match held.iter().position(|h| h.0 == a && h.1 == b) {
                    None => {
                        log.add(s, t, sign);
                        held.push((a, b, sign, Marking::Unmarked));
                    }
                    Some(k) => {
                        let (_, _, old_sign, marking) = held.remove(k);
                        let mut old = CausalLink::new(s, t, old_sign);
                        old.marking = marking;
                        if old_sign == sign {
                            log.push(ActionKind::edit(MapEdit::DeleteLink { link: old }), 3.0);
                        } else {
                            let new = CausalLink::new(s, t, sign);
                            log.push(ActionKind::edit(MapEdit::ModifyLink { old, new }), 3.0);
                            held.push((a, b, sign, Marking::Unmarked));
                        }
                    }
                }
            }
            Intent::Mark { which, correct } => {
                if held.is_empty() {
                    continue;
                }
                let k = which % held.len();
                let (a, b, sign, _) = held[k];
                let marking = if correct {
                    Marking::MarkedCorrect
                } else {
                    Marking::MarkedCouldBeWrong
                };
                if held[k].3 == marking {
                    continue;
                }
                let mut old = CausalLink::new(concepts[a].as_str(), concepts[b].as_str(), sign);
                old.marking = held[k].3;
                let mut new = old.clone();
                new.marking = marking;
                log.push(ActionKind::edit(MapEdit::ModifyLink { old, new }), 2.0);
                held[k].3 = marking;
            }
            Intent::Quiz => {
                log.quiz();
            }
            Intent::Wait(s) => {
                log.wait(s);
            }
        }
    }
    log
}

fn replay(log: &Log, config: &EngineConfig) -> SessionRun {
    let engine = ScaffoldEngine::new(config.clone(), default_expert()).unwrap();
    SessionRun::replay(&engine, &bundled_trees(), &log.events, &mut FirstOption).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn deliveries_pass_offline_verification(intents in prop::collection::vec(intent(), 0..80)) {
        let log = materialize(&intents);
        let config = EngineConfig::default();
        let run = replay(&log, &config);
        for d in &run.deliveries {
            prop_assert!(verify_delivery(d, &run.annotated, &default_expert(), &config).is_ok(),
                "{:?}", verify_delivery(d, &run.annotated, &default_expert(), &config));
        }
        prop_assert!(verify_spacing(&run.deliveries, config.min_inter_scaffold_seconds).is_ok());
        prop_assert_eq!(run.deliveries.len(), run.steps.iter().filter(|s| s.delivered()).count());
    }

    #[test]
    fn replay_is_deterministic(intents in prop::collection::vec(intent(), 0..60)) {
        let log = materialize(&intents);
        let config = EngineConfig::default();
        prop_assert_eq!(replay(&log, &config).deliveries, replay(&log, &config).deliveries);
    }

    #[test]
    fn disabling_a_kind_only_removes_that_kind(
        intents in prop::collection::vec(intent(), 0..80),
        k in 0usize..9,
    ) {
        let kind = ScaffoldKind::ALL[k];
        let log = materialize(&intents);
        let base = replay(&log, &EngineConfig::default());
        let mut cfg = EngineConfig::default();
        cfg.enabled.insert(kind, false);
        let off = replay(&log, &cfg);
        prop_assert!(off.deliveries.iter().all(|d| d.kind != kind));
        let detections = |r: &SessionRun| r.steps.iter().map(|s| s.detection.clone()).collect::<Vec<_>>();
        prop_assert_eq!(detections(&base), detections(&off));
    }

    #[test]
    fn hint4_only_for_shortcuts(intents in prop::collection::vec(intent(), 0..80)) {
        let log = materialize(&intents);
        let run = replay(&log, &EngineConfig::default());
        let expert = default_expert();
        for s in run.steps.iter().filter(|s| s.detection.kind == ScaffoldKind::Hint4) {
            let e = &run.annotated[s.detection.trigger.previous_index].event;
            let link = added_link(&e.kind).unwrap();
            prop_assert_eq!(
                classify_link(link, &expert),
                LinkClass::IncorrectShortcut
            );
        }
    }
}
