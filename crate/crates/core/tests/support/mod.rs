//! Micro-systems shared by the engine suite and the acceptance run. Each case
//! builds a tiny system, runs it and reports what went wrong, if anything.

use membrane_tm::system::MembraneTree;
use membrane_tm::{Configuration, Engine, Label, PObject, PSystem, RunPolicy};

pub type Check = fn() -> Result<(), String>;

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

fn nested() -> PSystem {
    PSystem::new(MembraneTree::with_children(
        Label::Skin,
        vec![MembraneTree::with_children(l("h1"), vec![MembraneTree::leaf(l("h2"))])],
    ))
}

fn names(engine: &Engine<'_>, cfg: &Configuration, label: &Label) -> Vec<String> {
    let Some(m) = engine.label_id(label).and_then(|id| cfg.membrane(id)) else {
        return vec!["<dissolved>".into()];
    };
    let mut out = Vec::new();
    for (obj, &c) in m.contents.iter() {
        out.extend((0..c).map(|_| engine.system().alphabet.get(*obj).to_string()));
    }
    out.sort();
    out
}

fn expect(got: Vec<String>, want: &[&str]) -> Result<(), String> {
    if got == want {
        Ok(())
    } else {
        Err(format!("expected {want:?}, got {got:?}"))
    }
}

fn count(got: usize, want: usize, what: &str) -> Result<(), String> {
    if got == want {
        Ok(())
    } else {
        Err(format!("expected {want} {what}, got {got}"))
    }
}

fn forced(engine: &Engine<'_>, cfg: &Configuration) -> Result<Configuration, String> {
    let options = engine.applicable_assignments(cfg, 16);
    count(options.list.len(), 1, "assignments")?;
    engine.step(cfg, &options.list[0]).map(|o| o.config).map_err(|e| e.to_string())
}

fn run_system(sys: &PSystem, steps: usize) -> Result<Configuration, String> {
    let engine = Engine::new(sys).map_err(|e| e.to_string())?;
    let mut cfg = engine.initial_configuration();
    for _ in 0..steps {
        cfg = forced(&engine, &cfg)?;
    }
    Ok(cfg)
}

fn maximal_rewrite() -> Result<(), String> {
    let mut sys = skin_with(&[]);
    sys.add_initial(Label::Skin, o("a"), 3);
    sys.evolve(Label::Skin, o("a"), [o("b")]);
    let cfg = run_system(&sys, 1)?;
    expect(names(&Engine::new(&sys).unwrap(), &cfg, &Label::Skin), &["b", "b", "b"])
}

fn maximal_split_over_rules() -> Result<(), String> {
    // Three copies over two rules: the four splits, none leaving an idle copy.
    let mut sys = skin_with(&[]);
    sys.add_initial(Label::Skin, o("x"), 3);
    sys.evolve(Label::Skin, o("x"), [o("y")]);
    sys.evolve(Label::Skin, o("x"), [o("z")]);
    let engine = Engine::new(&sys).unwrap();
    let cfg = engine.initial_configuration();
    let options = engine.applicable_assignments(&cfg, 64);
    count(options.list.len(), 4, "assignments")?;
    for a in &options.list {
        count(a.rules_applied() as usize, 3, "rule instances")?;
        if !engine.is_maximal(&cfg, a).map_err(|e| e.to_string())? {
            return Err("non-maximal assignment enumerated".into());
        }
    }
    Ok(())
}

fn blocking_send_out_conflict() -> Result<(), String> {
    let mut sys = skin_with(&["h"]);
    sys.add_initial(l("h"), o("a"), 1);
    sys.send_out(l("h"), o("a"), o("b"));
    sys.dissolve(l("h"), o("a"), o("c"));
    let engine = Engine::new(&sys).unwrap();
    let options = engine.applicable_assignments(&engine.initial_configuration(), 16);
    count(options.list.len(), 2, "assignments")?;
    for a in &options.list {
        count(a.rules_applied() as usize, 1, "blocking rules applied")?;
    }
    Ok(())
}

fn blocking_one_send_out_per_step() -> Result<(), String> {
    let mut sys = skin_with(&["h"]);
    sys.add_initial(l("h"), o("a"), 2);
    sys.send_out(l("h"), o("a"), o("b"));
    let cfg = run_system(&sys, 1)?;
    let engine = Engine::new(&sys).unwrap();
    expect(names(&engine, &cfg, &l("h")), &["a"])?;
    expect(names(&engine, &cfg, &Label::Skin), &["b"])
}

fn blocking_send_in_charged_to_target() -> Result<(), String> {
    let mut sys = skin_with(&["h", "g"]);
    sys.add_initial(Label::Skin, o("a"), 2);
    sys.add_initial(Label::Skin, o("c"), 1);
    sys.send_in(l("h"), o("a"), o("b"));
    sys.send_in(l("g"), o("c"), o("d"));
    let cfg = run_system(&sys, 1)?;
    let engine = Engine::new(&sys).unwrap();
    expect(names(&engine, &cfg, &l("h")), &["b"])?;
    expect(names(&engine, &cfg, &l("g")), &["d"])?;
    expect(names(&engine, &cfg, &Label::Skin), &["a"])
}

fn dissolution_releases_product() -> Result<(), String> {
    let mut sys = skin_with(&["h"]);
    sys.add_initial(l("h"), o("a"), 1);
    sys.dissolve(l("h"), o("a"), o("b"));
    let cfg = run_system(&sys, 1)?;
    count(cfg.membrane_count(), 1, "membranes")?;
    expect(names(&Engine::new(&sys).unwrap(), &cfg, &Label::Skin), &["b"])
}

fn dissolution_releases_idle_objects() -> Result<(), String> {
    let mut sys = skin_with(&["h"]);
    sys.add_initial(l("h"), o("a"), 1);
    sys.add_initial(l("h"), o("c"), 2);
    sys.dissolve(l("h"), o("a"), o("b"));
    let cfg = run_system(&sys, 1)?;
    expect(names(&Engine::new(&sys).unwrap(), &cfg, &Label::Skin), &["b", "c", "c"])
}

fn dissolution_releases_rewritten_objects() -> Result<(), String> {
    let mut sys = skin_with(&["h"]);
    sys.add_initial(l("h"), o("a"), 1);
    sys.add_initial(l("h"), o("e"), 1);
    sys.dissolve(l("h"), o("a"), o("b"));
    sys.evolve(l("h"), o("e"), [o("f")]);
    let cfg = run_system(&sys, 1)?;
    expect(names(&Engine::new(&sys).unwrap(), &cfg, &Label::Skin), &["b", "f"])
}

fn cascading_dissolution() -> Result<(), String> {
    let mut sys = nested();
    sys.add_initial(l("h1"), o("a"), 1);
    sys.add_initial(l("h2"), o("b"), 1);
    sys.add_initial(l("h2"), o("c"), 1);
    sys.dissolve(l("h1"), o("a"), o("x"));
    sys.dissolve(l("h2"), o("b"), o("y"));
    let cfg = run_system(&sys, 1)?;
    count(cfg.membrane_count(), 1, "membranes")?;
    expect(names(&Engine::new(&sys).unwrap(), &cfg, &Label::Skin), &["c", "x", "y"])
}

fn cascading_dissolution_over_two_steps() -> Result<(), String> {
    let mut sys = nested();
    sys.add_initial(l("h2"), o("b"), 1);
    sys.dissolve(l("h2"), o("b"), o("y"));
    sys.dissolve(l("h1"), o("y"), o("z"));
    let engine = Engine::new(&sys).unwrap();
    let first = forced(&engine, &engine.initial_configuration())?;
    expect(names(&engine, &first, &l("h1")), &["y"])?;
    let second = forced(&engine, &first)?;
    expect(names(&engine, &second, &Label::Skin), &["z"])
}

fn environment_no_reentry() -> Result<(), String> {
    let mut sys = skin_with(&[]);
    sys.add_initial(Label::Skin, o("a"), 1);
    sys.send_out(Label::Skin, o("a"), o("out"));
    sys.evolve(Label::Skin, o("out"), [o("back")]);
    let engine = Engine::new(&sys).unwrap();
    let r = engine
        .run_with(10, RunPolicy::Deterministic, false, |_| {})
        .map_err(|e| e.to_string())?;
    count(r.steps, 1, "steps")?;
    if !r.halted {
        return Err("run did not halt".into());
    }
    count(r.final_config.environment().len() as usize, 1, "environment objects")?;
    expect(names(&engine, &r.final_config, &Label::Skin), &[])
}

fn environment_keeps_growing() -> Result<(), String> {
    let mut sys = skin_with(&[]);
    sys.add_initial(Label::Skin, o("t"), 1);
    sys.evolve(Label::Skin, o("t"), [o("t"), o("e")]);
    sys.send_out(Label::Skin, o("e"), o("e"));
    let engine = Engine::new(&sys).unwrap();
    let r = engine
        .run_with(6, RunPolicy::Deterministic, false, |_| {})
        .map_err(|e| e.to_string())?;
    // One e leaves per step from step 2 on.
    count(r.final_config.environment().len() as usize, 5, "environment objects")
}

fn snapshot_selection() -> Result<(), String> {
    let mut sys = skin_with(&["h"]);
    sys.add_initial(Label::Skin, o("a"), 1);
    sys.send_in(l("h"), o("a"), o("b"));
    sys.evolve(l("h"), o("b"), [o("c")]);
    let cfg = run_system(&sys, 1)?;
    expect(names(&Engine::new(&sys).unwrap(), &cfg, &l("h")), &["b"])
}

pub fn micro_cases() -> Vec<(&'static str, Check)> {
    vec![
        ("maximal rewrite of every copy", maximal_rewrite),
        ("maximal splits over two rules", maximal_split_over_rules),
        ("blocking send-out vs dissolution", blocking_send_out_conflict),
        ("blocking one send-out per step", blocking_one_send_out_per_step),
        ("blocking send-in charged to target", blocking_send_in_charged_to_target),
        ("dissolution releases product", dissolution_releases_product),
        ("dissolution releases idle objects", dissolution_releases_idle_objects),
        ("dissolution releases rewritten objects", dissolution_releases_rewritten_objects),
        ("cascading dissolution in one step", cascading_dissolution),
        ("cascading dissolution over two steps", cascading_dissolution_over_two_steps),
        ("environment no re-entry", environment_no_reentry),
        ("environment only grows", environment_keeps_growing),
        ("rules see the start-of-step snapshot", snapshot_selection),
    ]
}
