use std::f64::consts::PI;

use multiplet::linkage_dsl::{parse, preset, serialize, PRESETS};
use multiplet::model::{Coupling, LinkageGraph};
use multiplet::Error;
use proptest::prelude::*;

const QUARTUPLET_TEXT: &str = "\
# four fields, five states
gamma 1
state e excited
state g vacuum
state g1
state g2
state g3
couple e g1 rabi 0.5 phase 1.5707963267948966
couple e g2 rabi 0.5
couple g1 g3 rabi 0.5
couple g3 g2 rabi 0.5   # closes the loop
init e
";

#[test]
fn quartuplet_text_equals_preset() {
    let parsed = parse(QUARTUPLET_TEXT).unwrap();
    assert_eq!(parsed, preset("quartuplet", &[0.5; 4], 0.0).unwrap());
}

#[test]
fn serialized_preset_text() {
    let text = serialize(&preset("quartuplet", &[0.5; 4], 0.0).unwrap());
    let expected = "\
gamma 1.0
state e excited
state g vacuum
state g1
state g2
state g3
couple e g1 rabi 0.5 phase 1.5707963267948966
couple e g2 rabi 0.5
couple g1 g3 rabi 0.5
couple g3 g2 rabi 0.5
init e
";
    assert_eq!(text, expected);
}

#[test]
fn presets_round_trip() {
    for name in ["quartuplet", "quintuplet"] {
        let n = if name == "quartuplet" { 4 } else { 5 };
        for rabi in [0.5, 1.0] {
            let g = preset(name, &vec![rabi; n], 0.0).unwrap();
            assert_eq!(parse(&serialize(&g)).unwrap(), g);
        }
    }
}

#[test]
fn third_of_pi_is_written_in_full() {
    let g = LinkageGraph::new(
        vec!["e".into(), "g".into(), "g1".into()],
        "e",
        "g",
        1.0,
        vec![Coupling::new("e", "g1", 1.0).with_phase(PI / 3.0)],
        "e",
    )
    .unwrap();
    let text = serialize(&g);
    assert!(text.contains("phase 1.0471975511965976"), "{text}");
}

#[test]
fn preset_shapes() {
    let d = preset("doublet", &[0.5], 0.0).unwrap();
    assert_eq!((d.states().len(), d.couplings().len()), (3, 1));
    let q = preset("quintuplet", &[1.0; 5], 0.0).unwrap();
    assert_eq!((q.states().len(), q.couplings().len()), (6, 5));
    let s = preset("sextuplet", &[1.0; 7], 0.0).unwrap();
    assert_eq!((s.states().len(), s.couplings().len()), (7, 7));
    assert_eq!(s.driven_states().len(), 6);
    assert_eq!(PRESETS.len(), 5);
}

#[test]
fn preset_errors() {
    assert_eq!(
        preset("septuplet", &[1.0], 0.0),
        Err(Error::UnknownPreset("septuplet".into()))
    );
    assert_eq!(
        preset("triplet", &[1.0; 4], 0.0),
        Err(Error::ArityMismatch {
            preset: "triplet".into(),
            expected: 3,
            got: 4
        })
    );
}

fn semantic_line(src: &str) -> usize {
    match parse(src) {
        Err(Error::Semantic { line, .. }) => line,
        other => panic!("expected a semantic error, got {other:?}"),
    }
}

fn syntax_at(src: &str) -> (usize, usize) {
    match parse(src) {
        Err(Error::Syntax { line, column, .. }) => (line, column),
        other => panic!("expected a syntax error, got {other:?}"),
    }
}

const HEAD: &str = "state e excited\nstate g vacuum\nstate g1\nstate g2\n";

#[test]
fn empty_document_has_no_excited_state() {
    match parse("") {
        Err(Error::Semantic { message, .. }) => assert!(message.contains("excited"), "{message}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn negative_rabi_is_semantic() {
    assert_eq!(semantic_line(&format!("{HEAD}couple e g1 rabi -0.5\n")), 5);
}

#[test]
fn semantic_errors_carry_lines() {
    assert_eq!(semantic_line(&format!("{HEAD}state g1\n")), 5);
    assert_eq!(semantic_line(&format!("{HEAD}state x excited\n")), 5);
    assert_eq!(semantic_line(&format!("{HEAD}couple e g rabi 1\n")), 5);
    assert_eq!(semantic_line(&format!("{HEAD}couple g1 g1 rabi 1\n")), 5);
    assert_eq!(
        semantic_line(&format!("{HEAD}couple e g1 rabi 1\ncouple g1 e rabi 2\n")),
        6
    );
    assert_eq!(
        semantic_line(&format!(
            "{HEAD}couple e g1 rabi 1 phase 1\ncouple e g2 rabi 1 phase 2\n"
        )),
        6
    );
    assert_eq!(semantic_line(&format!("{HEAD}couple e g7 rabi 1\n")), 5);
    assert_eq!(semantic_line(&format!("{HEAD}init g\n")), 5);
    assert_eq!(semantic_line("state e excited\nstate g1\n"), 2);
    assert_eq!(semantic_line(&format!("{HEAD}gamma 0\n")), 5);
}

#[test]
fn syntax_errors_carry_line_and_column() {
    assert_eq!(syntax_at(&format!("{HEAD}couple e g1 rab 1\n")), (5, 13));
    assert_eq!(syntax_at(&format!("{HEAD}couple e g1 rabi x\n")), (5, 18));
    assert_eq!(syntax_at("frobnicate\n"), (1, 1));
    assert_eq!(syntax_at("state 1e\n"), (1, 7));
    assert_eq!(syntax_at("  state e sleepy\n"), (1, 11));
    assert_eq!(syntax_at("gamma\n"), (1, 1));
}

#[test]
fn defaults_for_gamma_and_init() {
    let g = parse("state e excited\nstate g vacuum\n").unwrap();
    assert_eq!(g.gamma(), 1.0);
    assert_eq!(g.initial(), "e");
}

fn graph_strategy() -> impl Strategy<Value = LinkageGraph> {
    (2usize..9)
        .prop_flat_map(|n| {
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
            let m = pairs.len();
            (
                Just(n),
                prop::collection::vec("[a-zA-Z][a-zA-Z0-9_]{0,5}", n),
                0..n,
                1..n,
                prop::collection::vec(prop::option::weighted(0.5, (0.0..10.0f64, any::<bool>())), m),
                prop::option::of((0..m, -10.0..10.0f64)),
                0..n,
                prop::sample::select(vec![1.0, 0.5, 2.0, 1e-3, 7.25]),
            )
                .prop_map(move |t| (t, pairs.clone()))
        })
        .prop_filter_map(
            "distinct labels",
            |((n, labels, ex, vac_off, edges, phase, init, gamma), pairs)| {
                let states: Vec<String> = labels;
                let mut sorted = states.clone();
                sorted.sort();
                sorted.dedup();
                if sorted.len() != n {
                    return None;
                }
                let vac = (ex + vac_off) % n;
                let mut couplings = Vec::new();
                for (k, e) in edges.iter().enumerate() {
                    let (i, j) = pairs[k];
                    let Some((rabi, flip)) = *e else { continue };
                    if i == vac || j == vac {
                        continue;
                    }
                    let (a, b) = if flip { (j, i) } else { (i, j) };
                    let mut c = Coupling::new(&states[a], &states[b], rabi);
                    if let Some((p, value)) = phase {
                        if p == k {
                            c = c.with_phase(value);
                        }
                    }
                    couplings.push(c);
                }
                let init = if init == vac { ex } else { init };
                LinkageGraph::new(
                    states.clone(),
                    &states[ex],
                    &states[vac],
                    gamma,
                    couplings,
                    &states[init],
                )
                .ok()
            },
        )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn parse_inverts_serialize(g in graph_strategy()) {
        let text = serialize(&g);
        prop_assert_eq!(parse(&text).unwrap(), g);
    }
}
