use super::*;
use crate::corpus::bundled_corpus;

fn problem(id: &str) -> ProblemSpec {
    bundled_corpus().unwrap().get(id).unwrap().clone()
}

#[test]
fn lemmings1_sections_in_order() {
    let d = build_systematic_prompt(&problem("Lemmings1"), None);
    assert_eq!(d.preamble, PREAMBLE);
    let headings: Vec<&str> = d.sections.iter().map(|s| s.heading.as_str()).collect();
    assert_eq!(headings, [SPECIFICATION, EXAMPLE_BEHAVIOR, MODULE_DECLARATION]);
    let text = render(&d);
    assert!(text.starts_with("Act as a professional SystemVerilog programmer."));
    assert!(text.contains("### Module Declaration"));
    assert!(text.contains("    input areset,    // Freshly brainwashed Lemmings walk left.\n"));
    assert!(text.contains("    output logic walk_right\n);\n...\nendmodule\n```"));
    assert!(text.contains("| bump_right | 0 | 0 | 1 | 0 | 0 |"));
}

#[test]
fn no_waveform_no_example_section() {
    let d = build_systematic_prompt(&problem("Fsm1s"), None);
    assert!(d.section(EXAMPLE_BEHAVIOR).is_none());
    assert_eq!(d.sections.len(), 2);
}

#[test]
fn predecessor_table_is_injected() {
    let c = bundled_corpus().unwrap();
    let p = c.get("Fsm3onehot").unwrap();
    let prev = c.predecessor(p).unwrap();
    let d = build_systematic_prompt(p, Some(prev));
    let spec = &d.section(SPECIFICATION).unwrap().body;
    assert!(spec.contains("previous problem (Fsm3comb)"));
    assert!(spec.ends_with("| D     | C                 | B                 | 1      |"));

    let p = c.get("Lemmings2").unwrap();
    let d = build_systematic_prompt(p, c.predecessor(p));
    let spec = &d.section(SPECIFICATION).unwrap().body;
    assert!(spec.contains("| LEFT | `bump_left` | RIGHT | 1 | 0 |"), "{spec}");
    assert!(spec.contains("| LEFT | otherwise | LEFT | 1 | 0 |"));
}

#[test]
fn registers_appear_in_generated_table() {
    let t = transition_table_markdown(&problem("Lemmings4"));
    assert!(t.starts_with("| State | Condition | Next state | Register updates |"));
    assert!(t.contains("| SPLAT | any | SPLAT | - | 0 | 0 | 0 | 0 |"), "{t}");
}

#[test]
fn patch_renders_last_and_only_once() {
    let d = build_systematic_prompt(&problem("Fsm2s"), None);
    let patch = TopPatch::builtin(SYNC_RESET).unwrap();
    let patched = apply_top_patch(&d, &patch).unwrap();
    let text = render(&patched);
    assert_eq!(text, format!("{}\n{}", render(&d), patch.render()));
    assert!(text.contains("### To-do\n\n1. Explain synchronous reset and give a basic example.\n"));
    let last = text.lines().rfind(|l| !l.trim().is_empty()).unwrap();
    assert_eq!(last, "3. Implement the above design specifications in SystemVerilog.");
    assert_eq!(apply_top_patch(&patched, &patch), Err(PromptError::PatchAlreadyApplied));
}

#[test]
fn one_hot_patch_quotes_by_inspection() {
    let p = TopPatch::builtin(ONE_HOT).unwrap();
    assert_eq!(p.todo_items[0], "Explain \"derive equations by inspection\".");
    assert!(TopPatch::builtin("nope").is_err());
}

#[test]
fn patch_validation() {
    assert!(TopPatch::new("x", vec![]).is_err());
    assert!(TopPatch::new("x", vec!["  ".into()]).is_err());
    assert!(TopPatch::new("x", vec!["do it".into()]).is_ok());
}

#[test]
fn patch_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    let p = TopPatch::new("mine", vec!["a".into(), "b".into()]).unwrap();
    std::fs::write(&path, serde_json::to_string(&p).unwrap()).unwrap();
    assert_eq!(TopPatch::load(&path).unwrap(), p);
    assert_eq!(TopPatch::resolve(path.to_str().unwrap()).unwrap(), p);
    std::fs::write(&path, "{").unwrap();
    assert!(matches!(TopPatch::load(&path), Err(PromptError::Io { .. })));
}

#[test]
fn multishot_plan_shape() {
    let p = problem("Lemmings1");
    let plan = build_multishot_plan(&p);
    assert_eq!(plan.stages.len(), 3);
    let flags: Vec<bool> = plan.stages.iter().map(|s| s.expects_code).collect();
    assert_eq!(flags, [false, false, true]);
    assert!(plan.stages[1].instruction.contains("state transition table"));
    let msgs = plan.messages(&build_systematic_prompt(&p, None));
    assert!(msgs[0].starts_with(PREAMBLE));
    assert!(msgs[0].ends_with("1. Read the example behavior first carefully. Elaborate the reasoning behind these behaviors.\n"));
    assert_eq!(msgs[2], "### To-do\n\n3. implement the entire SystemVerilog module for the state machine.\n");
}

#[test]
fn rendering_is_deterministic_and_free_of_code_hints() {
    for p in bundled_corpus().unwrap().problems() {
        let d = build_systematic_prompt(p, None);
        assert_eq!(render(&d), render(&d.clone()));
        let spec_len = d.section(SPECIFICATION).unwrap().body.len();
        let text = render(&d);
        let start = text.find("### Example Behavior").or_else(|| text.find("### Module Declaration")).unwrap();
        assert!(start > spec_len);
        let tail = &text[start..];
        for word in tail.split(|c: char| !c.is_alphanumeric() && c != '_') {
            assert!(word != "always" && word != "case", "{}: {tail}", p.id);
        }
    }
}
