//! Hand-built micro-systems for the step semantics, plus a brute-force
//! oracle for the set of maximal assignments.

use std::collections::BTreeSet;

use membrane_tm::engine::{recognize, run, RecogniserError, StepError};
use membrane_tm::multiset::Multiset;
use membrane_tm::system::{validate_system, Action, Diagnostic, MembraneTree};
use membrane_tm::{Configuration, Engine, Label, PObject, PSystem, RunPolicy};
use proptest::prelude::*;

fn o(name: &str) -> PObject {
    PObject::opaque(name)
}

fn l(name: &str) -> Label {
    Label::opaque(name)
}

fn skin_with(children: &[&str]) -> PSystem {
    PSystem::new(MembraneTree::with_children(
        Label::Skin,
        children.iter().map(|c| MembraneTree::leaf(l(c))).collect(),
    ))
}

fn contents(engine: &Engine<'_>, cfg: &Configuration, label: &Label) -> Vec<String> {
    let id = engine.label_id(label).unwrap();
    let mut out = Vec::new();
    for (obj, &c) in cfg.membrane(id).expect("membrane alive").contents.iter() {
        for _ in 0..c {
            out.push(engine.system().alphabet.get(*obj).to_string());
        }
    }
    out.sort();
    out
}

fn environment(engine: &Engine<'_>, cfg: &Configuration) -> Vec<String> {
    let mut out = Vec::new();
    for (obj, &c) in cfg.environment().iter() {
        for _ in 0..c {
            out.push(engine.system().alphabet.get(*obj).to_string());
        }
    }
    out.sort();
    out
}

fn only_step(engine: &Engine<'_>, cfg: &Configuration) -> Configuration {
    let options = engine.applicable_assignments(cfg, 16);
    assert_eq!(options.list.len(), 1, "expected a forced step: {:?}", options.list);
    engine.step(cfg, &options.list[0]).unwrap().config
}

#[test]
fn dissolution_releases_product_and_removes_membrane() {
    let mut sys = skin_with(&["h"]);
    sys.add_initial(l("h"), o("a"), 1);
    sys.dissolve(l("h"), o("a"), o("b"));
    let engine = Engine::new(&sys).unwrap();
    let next = only_step(&engine, &engine.initial_configuration());
    assert_eq!(next.membrane_count(), 1);
    assert!(!next.is_alive(engine.label_id(&l("h")).unwrap()));
    assert_eq!(contents(&engine, &next, &Label::Skin), ["b"]);
}

#[test]
fn dissolution_sends_idle_objects_to_the_outer_region() {
    let mut sys = skin_with(&["h"]);
    sys.add_initial(l("h"), o("a"), 1);
    sys.add_initial(l("h"), o("c"), 2);
    sys.dissolve(l("h"), o("a"), o("b"));
    let engine = Engine::new(&sys).unwrap();
    let next = only_step(&engine, &engine.initial_configuration());
    assert_eq!(contents(&engine, &next, &Label::Skin), ["b", "c", "c"]);
}

#[test]
fn dissolution_releases_post_rewrite_contents() {
    let mut sys = skin_with(&["h"]);
    sys.add_initial(l("h"), o("a"), 1);
    sys.add_initial(l("h"), o("e"), 1);
    sys.dissolve(l("h"), o("a"), o("b"));
    sys.evolve(l("h"), o("e"), [o("f"), o("g")]);
    let engine = Engine::new(&sys).unwrap();
    let next = only_step(&engine, &engine.initial_configuration());
    assert_eq!(contents(&engine, &next, &Label::Skin), ["b", "f", "g"]);
}

#[test]
fn cascading_dissolution_resolves_inner_first() {
    // skin[ h1[ a h2[ b c ] ] ]: both membranes dissolve in one step and
    // everything lands in the skin.
    let structure = MembraneTree::with_children(
        Label::Skin,
        vec![MembraneTree::with_children(l("h1"), vec![MembraneTree::leaf(l("h2"))])],
    );
    let mut sys = PSystem::new(structure);
    sys.add_initial(l("h1"), o("a"), 1);
    sys.add_initial(l("h2"), o("b"), 1);
    sys.add_initial(l("h2"), o("c"), 1);
    sys.dissolve(l("h1"), o("a"), o("x"));
    sys.dissolve(l("h2"), o("b"), o("y"));
    let engine = Engine::new(&sys).unwrap();
    let start = engine.initial_configuration();
    assert_eq!(start.depth(), 2);
    let next = only_step(&engine, &start);
    assert_eq!(next.membrane_count(), 1);
    assert_eq!(next.depth(), 0);
    assert_eq!(contents(&engine, &next, &Label::Skin), ["c", "x", "y"]);
}

#[test]
fn inner_dissolution_alone_stops_at_its_parent() {
    let structure = MembraneTree::with_children(
        Label::Skin,
        vec![MembraneTree::with_children(l("h1"), vec![MembraneTree::leaf(l("h2"))])],
    );
    let mut sys = PSystem::new(structure);
    sys.add_initial(l("h2"), o("b"), 1);
    sys.dissolve(l("h2"), o("b"), o("y"));
    let engine = Engine::new(&sys).unwrap();
    let next = only_step(&engine, &engine.initial_configuration());
    assert_eq!(contents(&engine, &next, &l("h1")), ["y"]);
    assert!(contents(&engine, &next, &Label::Skin).is_empty());
}

#[test]
fn evolution_into_the_empty_multiset() {
    let mut sys = skin_with(&[]);
    sys.add_initial(Label::Skin, o("a"), 1);
    sys.evolve(Label::Skin, o("a"), []);
    let engine = Engine::new(&sys).unwrap();
    let next = only_step(&engine, &engine.initial_configuration());
    assert_eq!(next.object_count(), 0);
    assert!(engine.applicable_assignments(&next, 4).list.is_empty());
}

#[test]
fn maximality_rewrites_every_copy() {
    let mut sys = skin_with(&[]);
    sys.add_initial(Label::Skin, o("a"), 3);
    sys.evolve(Label::Skin, o("a"), [o("b")]);
    let engine = Engine::new(&sys).unwrap();
    let start = engine.initial_configuration();
    let options = engine.applicable_assignments(&start, 16);
    assert_eq!(options.list.len(), 1);
    assert_eq!(options.list[0].rules_applied(), 3);
    let next = engine.step(&start, &options.list[0]).unwrap().config;
    assert_eq!(contents(&engine, &next, &Label::Skin), ["b", "b", "b"]);
}

#[test]
fn one_object_two_evolution_rules_forks() {
    let mut sys = skin_with(&[]);
    sys.add_initial(Label::Skin, o("x"), 1);
    sys.evolve(Label::Skin, o("x"), [o("y")]);
    sys.evolve(Label::Skin, o("x"), [o("z")]);
    let engine = Engine::new(&sys).unwrap();
    let options = engine.applicable_assignments(&engine.initial_configuration(), 16);
    assert_eq!(options.list.len(), 2);
    assert!(!options.truncated);
}

#[test]
fn send_out_and_dissolution_on_one_membrane_conflict() {
    let mut sys = skin_with(&["h"]);
    sys.add_initial(l("h"), o("a"), 1);
    sys.send_out(l("h"), o("a"), o("b"));
    sys.dissolve(l("h"), o("a"), o("c"));
    let engine = Engine::new(&sys).unwrap();
    let start = engine.initial_configuration();
    let options = engine.applicable_assignments(&start, 16);
    assert_eq!(options.list.len(), 2);
    let mut skins = BTreeSet::new();
    for a in &options.list {
        assert_eq!(a.rules_applied(), 1);
        let next = engine.step(&start, a).unwrap().config;
        skins.insert(contents(&engine, &next, &Label::Skin));
    }
    assert_eq!(skins, BTreeSet::from([vec!["b".to_owned()], vec!["c".to_owned()]]));
}

#[test]
fn one_send_out_per_membrane_per_step() {
    let mut sys = skin_with(&["h"]);
    sys.add_initial(l("h"), o("a"), 2);
    sys.send_out(l("h"), o("a"), o("b"));
    let engine = Engine::new(&sys).unwrap();
    let next = only_step(&engine, &engine.initial_configuration());
    assert_eq!(contents(&engine, &next, &l("h")), ["a"]);
    assert_eq!(contents(&engine, &next, &Label::Skin), ["b"]);
    let last = only_step(&engine, &next);
    assert!(contents(&engine, &last, &l("h")).is_empty());
    assert_eq!(contents(&engine, &last, &Label::Skin), ["b", "b"]);
}

#[test]
fn send_in_is_charged_to_the_target() {
    let mut sys = skin_with(&["h", "g"]);
    sys.add_initial(Label::Skin, o("a"), 2);
    sys.add_initial(Label::Skin, o("c"), 1);
    sys.send_in(l("h"), o("a"), o("b"));
    sys.send_in(l("g"), o("c"), o("d"));
    let engine = Engine::new(&sys).unwrap();
    let next = only_step(&engine, &engine.initial_configuration());
    // h accepts one a; g is a different membrane and takes c in parallel.
    assert_eq!(contents(&engine, &next, &l("h")), ["b"]);
    assert_eq!(contents(&engine, &next, &l("g")), ["d"]);
    assert_eq!(contents(&engine, &next, &Label::Skin), ["a"]);
}

#[test]
fn blocking_rule_and_evolution_give_distinct_assignments() {
    let mut sys = skin_with(&["h"]);
    sys.add_initial(l("h"), o("a"), 1);
    sys.evolve(l("h"), o("a"), [o("e")]);
    sys.dissolve(l("h"), o("a"), o("d"));
    let engine = Engine::new(&sys).unwrap();
    let options = engine.applicable_assignments(&engine.initial_configuration(), 16);
    assert_eq!(options.list.len(), 2);
}

#[test]
fn products_are_not_rewritten_in_the_step_that_made_them() {
    let mut sys = skin_with(&["h"]);
    sys.add_initial(Label::Skin, o("a"), 1);
    sys.send_in(l("h"), o("a"), o("b"));
    sys.evolve(l("h"), o("b"), [o("c")]);
    let engine = Engine::new(&sys).unwrap();
    let next = only_step(&engine, &engine.initial_configuration());
    assert_eq!(contents(&engine, &next, &l("h")), ["b"]);
    let last = only_step(&engine, &next);
    assert_eq!(contents(&engine, &last, &l("h")), ["c"]);
}

#[test]
fn environment_objects_never_reenter() {
    let mut sys = skin_with(&[]);
    sys.add_initial(Label::Skin, o("a"), 1);
    sys.send_out(Label::Skin, o("a"), o("out"));
    // Would fire if `out` were still inside.
    sys.evolve(Label::Skin, o("out"), [o("back")]);
    let engine = Engine::new(&sys).unwrap();
    let start = engine.initial_configuration();
    let step = engine.step(&start, &engine.applicable_assignments(&start, 4).list[0]).unwrap();
    assert_eq!(environment(&engine, &step.config), ["out"]);
    assert_eq!(step.emitted.len(), 1);
    assert!(engine.applicable_assignments(&step.config, 4).list.is_empty());
    let result = engine.run_with(10, RunPolicy::Deterministic, false, |_| {}).unwrap();
    assert!(result.halted);
    assert_eq!(result.steps, 1);
    assert_eq!(environment(&engine, &result.final_config), ["out"]);
}

#[test]
fn empty_rule_set_halts_at_once() {
    let mut sys = skin_with(&["h"]);
    sys.add_initial(l("h"), o("a"), 1);
    let r = run(&sys, &Multiset::new(), 5, RunPolicy::Deterministic).unwrap();
    assert!(r.halted);
    assert_eq!(r.steps, 0);
}

#[test]
fn livelock_hits_the_limit() {
    let mut sys = skin_with(&[]);
    sys.add_initial(Label::Skin, o("x"), 1);
    sys.evolve(Label::Skin, o("x"), [o("x")]);
    let r = run(&sys, &Multiset::new(), 25, RunPolicy::Deterministic).unwrap();
    assert!(!r.halted);
    assert_eq!(r.steps, 25);
}

/// Emits `yes` at step 3, then runs two more steps.
fn early_verdict_system() -> PSystem {
    let mut sys = skin_with(&[]);
    sys.add_initial(Label::Skin, o("c0"), 1);
    sys.evolve(Label::Skin, o("c0"), [o("c1")]);
    sys.evolve(Label::Skin, o("c1"), [o("c2")]);
    sys.evolve(Label::Skin, o("c2"), [o("c3")]);
    sys.evolve(Label::Skin, o("c3"), [o("c4")]);
    sys.evolve(Label::Skin, o("c4"), []);
    sys.add_initial(Label::Skin, o("v0"), 1);
    sys.evolve(Label::Skin, o("v0"), [o("v1")]);
    sys.evolve(Label::Skin, o("v1"), [o("v2")]);
    sys.send_out(Label::Skin, o("v2"), PObject::Verdict(membrane_tm::object::Verdict::Accept));
    sys
}

#[test]
fn early_verdict_breaks_the_recogniser_contract() {
    let sys = early_verdict_system();
    assert_eq!(
        recognize(&sys, &Multiset::new(), 20),
        Err(RecogniserError::EarlyVerdict { step: 3, last: 5 })
    );
}

#[test]
fn input_lands_in_the_input_membrane() {
    let mut sys = skin_with(&["h"]);
    sys.input_membrane = l("h");
    sys.send_out(l("h"), o("a"), PObject::Verdict(membrane_tm::object::Verdict::Reject));
    sys.send_out(Label::Skin, PObject::Verdict(membrane_tm::object::Verdict::Reject), o("gone"));
    let r = run(&sys, &Multiset::singleton(o("a")), 10, RunPolicy::Deterministic).unwrap();
    assert_eq!(r.steps, 2);
    assert_eq!(r.emissions.len(), 1);
}

#[test]
fn stale_assignment_is_rejected() {
    let mut sys = skin_with(&[]);
    sys.add_initial(Label::Skin, o("a"), 1);
    sys.evolve(Label::Skin, o("a"), [o("b")]);
    let engine = Engine::new(&sys).unwrap();
    let start = engine.initial_configuration();
    let a = engine.applicable_assignments(&start, 4).list.remove(0);
    let next = engine.step(&start, &a).unwrap().config;
    assert!(matches!(engine.step(&next, &a), Err(StepError::Insufficient { .. })));
}

#[test]
fn validation_reports_duplicates_and_skin_dissolution() {
    let mut dup = PSystem::new(MembraneTree::with_children(
        Label::Skin,
        vec![MembraneTree::leaf(Label::Cell(0, 0)), MembraneTree::leaf(Label::Cell(0, 0))],
    ));
    assert!(validate_system(&dup)
        .iter()
        .any(|d| matches!(d, Diagnostic::DuplicateLabel(Label::Cell(0, 0)))));
    dup.structure = MembraneTree::leaf(Label::Skin);
    dup.labels = vec![Label::Skin];
    dup.dissolve(Label::Skin, o("a"), o("b"));
    let diags = validate_system(&dup);
    assert!(diags.iter().any(|d| matches!(d, Diagnostic::SkinDissolution { .. })));
    assert!(diags.iter().any(|d| d.to_string().contains("skin dissolution")));
    assert!(Engine::new(&dup).is_err());
}

// Brute-force oracle: assign every object instance to "idle" or to one rule,
// keep the assignments that respect blocking and are maximal, and compare the
// distinct results with the engine's enumeration.

/// Canonical form of an assignment: sorted (rule, region label, count).
type Canon = Vec<(usize, Label, u64)>;

fn oracle(engine: &Engine<'_>, cfg: &Configuration) -> BTreeSet<Canon> {
    let sys = engine.system();
    // Object instances with the rules each could take.
    let mut instances: Vec<(Label, Vec<usize>)> = Vec::new();
    for (id, membrane) in cfg.membranes() {
        let region = engine.label(id).clone();
        let children: Vec<Label> = cfg.children(id).map(|c| engine.label(c).clone()).collect();
        for (&obj, &count) in membrane.contents.iter() {
            let options: Vec<usize> = sys
                .rules
                .iter()
                .enumerate()
                .filter(|(_, r)| r.lhs == obj)
                .filter(|(_, r)| match r.action {
                    Action::SendIn(_) => children.contains(&r.label),
                    _ => r.label == region,
                })
                .map(|(i, _)| i)
                .collect();
            for _ in 0..count {
                instances.push((region.clone(), options.clone()));
            }
        }
    }
    let blocked_membrane = |rule: usize| -> Option<Label> {
        let r = &sys.rules[rule];
        matches!(r.action, Action::SendIn(_) | Action::SendOut(_) | Action::Dissolve(_)).then(|| r.label.clone())
    };
    let mut found = BTreeSet::new();
    let mut choice: Vec<Option<usize>> = vec![None; instances.len()];
    fn rec(
        at: usize,
        instances: &[(Label, Vec<usize>)],
        choice: &mut Vec<Option<usize>>,
        blocked: &dyn Fn(usize) -> Option<Label>,
        found: &mut BTreeSet<Canon>,
    ) {
        if at == instances.len() {
            let used: Vec<Label> = choice.iter().flatten().filter_map(|&r| blocked(r)).collect();
            if used.iter().collect::<BTreeSet<_>>().len() != used.len() {
                return;
            }
            // Maximal: no idle instance has a rule it could still take.
            for (inst, c) in instances.iter().zip(choice.iter()) {
                if c.is_none() && inst.1.iter().any(|&r| blocked(r).is_none_or(|m| !used.contains(&m))) {
                    return;
                }
            }
            let mut counts: std::collections::BTreeMap<(usize, Label), u64> = Default::default();
            for (inst, c) in instances.iter().zip(choice.iter()) {
                if let Some(r) = c {
                    *counts.entry((*r, inst.0.clone())).or_default() += 1;
                }
            }
            found.insert(counts.into_iter().map(|((r, l), n)| (r, l, n)).collect());
            return;
        }
        choice[at] = None;
        rec(at + 1, instances, choice, blocked, found);
        for &r in &instances[at].1 {
            choice[at] = Some(r);
            rec(at + 1, instances, choice, blocked, found);
        }
        choice[at] = None;
    }
    rec(0, &instances, &mut choice, &blocked_membrane, &mut found);
    // Nothing applicable means halted, which is the empty set.
    found.remove(&Canon::new());
    found
}

fn engine_canon(engine: &Engine<'_>, cfg: &Configuration) -> BTreeSet<Canon> {
    let options = engine.applicable_assignments(cfg, 1 << 16);
    assert!(!options.truncated);
    options
        .list
        .iter()
        .map(|a| {
            let mut c: Canon = a
                .applications
                .iter()
                .map(|app| (app.rule, engine.label(app.region).clone(), app.count))
                .collect();
            c.sort();
            c
        })
        .collect()
}

#[test]
fn oracle_agrees_on_the_micro_systems() {
    let mut sys = skin_with(&["h", "g"]);
    sys.add_initial(Label::Skin, o("a"), 2);
    sys.add_initial(l("h"), o("a"), 1);
    sys.add_initial(l("h"), o("b"), 2);
    sys.send_in(l("h"), o("a"), o("b"));
    sys.send_in(l("g"), o("a"), o("b"));
    sys.evolve(Label::Skin, o("a"), [o("c")]);
    sys.dissolve(l("h"), o("b"), o("c"));
    sys.send_out(l("h"), o("a"), o("a"));
    let engine = Engine::new(&sys).unwrap();
    let cfg = engine.initial_configuration();
    let expected = oracle(&engine, &cfg);
    assert!(expected.len() > 3);
    assert_eq!(engine_canon(&engine, &cfg), expected);
}

#[derive(Debug, Clone)]
enum RuleGen {
    Evolve(usize, usize, Vec<usize>),
    SendIn(usize, usize, usize),
    SendOut(usize, usize, usize),
    Dissolve(usize, usize, usize),
}

const NAMES: [&str; 3] = ["a", "b", "c"];
const REGIONS: [&str; 3] = ["skin", "h", "g"];

fn region(i: usize) -> Label {
    if i == 0 {
        Label::Skin
    } else {
        l(REGIONS[i])
    }
}

fn rule_gen() -> impl Strategy<Value = RuleGen> {
    prop_oneof![
        (0..3usize, 0..3usize, prop::collection::vec(0..3usize, 0..3)).prop_map(|(m, a, w)| RuleGen::Evolve(m, a, w)),
        (1..3usize, 0..3usize, 0..3usize).prop_map(|(m, a, b)| RuleGen::SendIn(m, a, b)),
        (0..3usize, 0..3usize, 0..3usize).prop_map(|(m, a, b)| RuleGen::SendOut(m, a, b)),
        (1..3usize, 0..3usize, 0..3usize).prop_map(|(m, a, b)| RuleGen::Dissolve(m, a, b)),
    ]
}

fn micro_system(initial: &[(usize, usize, u64)], rules: &[RuleGen]) -> PSystem {
    let mut sys = skin_with(&["h", "g"]);
    for &(m, a, n) in initial {
        if n > 0 {
            sys.add_initial(region(m), o(NAMES[a]), n);
        }
    }
    for name in NAMES {
        sys.intern(o(name));
    }
    for r in rules {
        match r {
            RuleGen::Evolve(m, a, w) => sys.evolve(region(*m), o(NAMES[*a]), w.iter().map(|&x| o(NAMES[x]))),
            RuleGen::SendIn(m, a, b) => sys.send_in(region(*m), o(NAMES[*a]), o(NAMES[*b])),
            RuleGen::SendOut(m, a, b) => sys.send_out(region(*m), o(NAMES[*a]), o(NAMES[*b])),
            RuleGen::Dissolve(m, a, b) => sys.dissolve(region(*m), o(NAMES[*a]), o(NAMES[*b])),
        }
    }
    sys
}

fn systems() -> impl Strategy<Value = PSystem> {
    (
        prop::collection::vec((0..3usize, 0..3usize, 1..3u64), 0..5),
        prop::collection::vec(rule_gen(), 0..6),
    )
        .prop_map(|(init, rules)| micro_system(&init, &rules))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn assignments_match_the_brute_force_oracle(sys in systems()) {
        let engine = Engine::new(&sys).unwrap();
        let cfg = engine.initial_configuration();
        prop_assert_eq!(engine_canon(&engine, &cfg), oracle(&engine, &cfg));
    }

    #[test]
    fn random_runs_keep_the_step_invariants(sys in systems(), seed in any::<u64>()) {
        let engine = Engine::new(&sys).unwrap();
        let mut last_env = Multiset::new();
        let mut last_count = engine.initial_configuration().membrane_count();
        let mut last_depth = engine.initial_configuration().depth();
        engine.run_with(12, RunPolicy::SeededRandom(seed), false, |ev| {
            assert!(engine.is_maximal(ev.before, ev.assignment).unwrap());
            // At most one blocking rule per membrane.
            let mut blocked = BTreeSet::new();
            for app in &ev.assignment.applications {
                if !matches!(engine.system().rules[app.rule].action, Action::Evolve(_)) {
                    assert_eq!(app.count, 1);
                    assert!(blocked.insert(app.membrane));
                }
            }
            // Steps are pure.
            let again = engine.step(ev.before, ev.assignment).unwrap();
            assert_eq!(&again.config, ev.after);
            assert!(last_env.is_subset(ev.after.environment()));
            last_env = ev.after.environment().clone();
            assert!(ev.after.membrane_count() <= last_count);
            assert!(ev.after.depth() <= last_depth);
            last_count = ev.after.membrane_count();
            last_depth = ev.after.depth();
            let labels: Vec<_> = ev.after.membranes().map(|(id, _)| id).collect();
            assert_eq!(labels.iter().collect::<BTreeSet<_>>().len(), labels.len());
            let single_evolution = ev.assignment.applications.iter().all(|app| {
                matches!(&engine.system().rules[app.rule].action, Action::Evolve(w) if w.len() == 1)
            });
            if single_evolution {
                assert_eq!(ev.after.object_count(), ev.before.object_count());
            }
        }).unwrap();
    }
}

mod support;

#[test]
fn shared_micro_systems_hold() {
    for (name, check) in support::micro_cases() {
        if let Err(e) = check() {
            panic!("{name}: {e}");
        }
    }
}
