//! The `.linkage` text format and the named multiplet presets.
//!
//! ```text
//! # quartuplet, all fields 0.5
//! gamma 1
//! state e excited
//! state g vacuum
//! state g1
//! state g2
//! state g3
//! couple e g1 rabi 0.5 phase 1.5707963267948966
//! couple e g2 rabi 0.5
//! couple g1 g3 rabi 0.5
//! couple g3 g2 rabi 0.5
//! init e
//! ```
//!
//! One statement per line, `#` starts a comment. `gamma` defaults to 1 and
//! `init` to the excited state.

use std::collections::HashMap;
use std::fmt::Write;

use crate::error::{Error, Result};
use crate::model::{Coupling, LinkageGraph, QUARTUPLET_PHASE_OFFSET, QUINTUPLET_PHASE_OFFSET};

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_float(x: f64) -> String {
    format!("{x:?}")
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let body = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in body.char_indices() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push(Token {
                    text: &body[s..i],
                    column: s + 1,
                });
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(Token {
            text: &body[s..],
            column: s + 1,
        });
    }
    out
}

fn is_label(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic()) && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

struct Pending {
    line: usize,
    coupling: Coupling,
}

struct Parser {
    line: usize,
    gamma: Option<f64>,
    states: Vec<String>,
    state_line: HashMap<String, usize>,
    excited: Option<String>,
    vacuum: Option<String>,
    couplings: Vec<Pending>,
    init: Option<(String, usize)>,
}

impl Parser {
    fn syntax<T>(&self, tok: &Token, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            line: self.line,
            column: tok.column,
            message: message.into(),
        })
    }

    fn semantic<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Semantic {
            line: self.line,
            message: message.into(),
        })
    }

    fn label<'a>(&self, tok: &Token<'a>) -> Result<&'a str> {
        if is_label(tok.text) {
            Ok(tok.text)
        } else {
            self.syntax(tok, format!("`{}` is not a valid label", tok.text))
        }
    }

    fn float(&self, tok: &Token) -> Result<f64> {
        let numeric = tok
            .text
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '+' | '-'));
        match tok.text.parse::<f64>() {
            Ok(v) if numeric && v.is_finite() => Ok(v),
            _ => self.syntax(tok, format!("`{}` is not a number", tok.text)),
        }
    }

    fn expect_len(&self, toks: &[Token], range: std::ops::RangeInclusive<usize>, usage: &str) -> Result<()> {
        if range.contains(&toks.len()) {
            return Ok(());
        }
        let at = toks.get(*range.end()).unwrap_or(&toks[toks.len() - 1]);
        self.syntax(at, format!("expected `{usage}`"))
    }

    fn statement(&mut self, toks: &[Token]) -> Result<()> {
        match toks[0].text {
            "gamma" => {
                self.expect_len(toks, 2..=2, "gamma <float>")?;
                let v = self.float(&toks[1])?;
                if self.gamma.is_some() {
                    return self.semantic("gamma given twice");
                }
                if v <= 0.0 {
                    return self.semantic(format!("gamma must be positive, got {v}"));
                }
                self.gamma = Some(v);
            }
            "state" => {
                self.expect_len(toks, 2..=3, "state <label> [excited|vacuum]")?;
                let name = self.label(&toks[1])?.to_string();
                if let Some(first) = self.state_line.get(&name) {
                    return self.semantic(format!("duplicate state `{name}` (first declared on line {first})"));
                }
                if let Some(role) = toks.get(2) {
                    let slot = match role.text {
                        "excited" => &mut self.excited,
                        "vacuum" => &mut self.vacuum,
                        _ => return self.syntax(role, format!("unknown state role `{}`", role.text)),
                    };
                    if let Some(prev) = slot {
                        let msg = format!("second {} state `{name}` (already `{prev}`)", role.text);
                        return self.semantic(msg);
                    }
                    *slot = Some(name.clone());
                }
                self.state_line.insert(name.clone(), self.line);
                self.states.push(name);
            }
            "couple" => {
                const USAGE: &str = "couple <a> <b> rabi <float> [phase <float>]";
                if toks.len() != 5 && toks.len() != 7 {
                    self.expect_len(toks, 5..=5, USAGE)?;
                }
                let from = self.label(&toks[1])?;
                let to = self.label(&toks[2])?;
                if toks[3].text != "rabi" {
                    return self.syntax(&toks[3], format!("expected `rabi`, found `{}`", toks[3].text));
                }
                let rabi = self.float(&toks[4])?;
                let mut phase = 0.0;
                if toks.len() == 7 {
                    if toks[5].text != "phase" {
                        return self.syntax(&toks[5], format!("expected `phase`, found `{}`", toks[5].text));
                    }
                    phase = self.float(&toks[6])?;
                }
                if rabi < 0.0 {
                    return self.semantic(format!("negative rabi magnitude {rabi}"));
                }
                self.couplings.push(Pending {
                    line: self.line,
                    coupling: Coupling::new(from, to, rabi).with_phase(phase),
                });
            }
            "init" => {
                self.expect_len(toks, 2..=2, "init <label>")?;
                let name = self.label(&toks[1])?.to_string();
                if self.init.is_some() {
                    return self.semantic("init given twice");
                }
                self.init = Some((name, self.line));
            }
            other => {
                return self.syntax(&toks[0], format!("unknown statement `{other}`"));
            }
        }
        Ok(())
    }

    fn finish(mut self) -> Result<LinkageGraph> {
        let Some(excited) = self.excited.clone() else {
            return self.semantic("no excited state declared");
        };
        let Some(vacuum) = self.vacuum.clone() else {
            return self.semantic("no vacuum state declared");
        };
        let mut phased: Option<usize> = None;
        let mut pairs: HashMap<(String, String), usize> = HashMap::new();
        for p in &self.couplings {
            let c = &p.coupling;
            let fail = |message: String| Err(Error::Semantic { line: p.line, message });
            for label in [&c.from, &c.to] {
                if !self.state_line.contains_key(label) {
                    return fail(format!("undeclared state `{label}`"));
                }
                if *label == vacuum {
                    return fail(format!("vacuum state `{vacuum}` cannot be field coupled"));
                }
            }
            if c.from == c.to {
                return fail(format!("state `{}` coupled to itself", c.from));
            }
            let key = if c.from < c.to {
                (c.from.clone(), c.to.clone())
            } else {
                (c.to.clone(), c.from.clone())
            };
            if let Some(first) = pairs.insert(key, p.line) {
                return fail(format!("`{}` and `{}` already coupled on line {first}", c.from, c.to));
            }
            if c.phase != 0.0 {
                if let Some(first) = phased {
                    return fail(format!("second phase-bearing coupling (first on line {first})"));
                }
                phased = Some(p.line);
            }
        }
        let initial = match self.init.take() {
            Some((name, line)) => {
                self.line = line;
                if !self.state_line.contains_key(&name) {
                    return self.semantic(format!("undeclared state `{name}`"));
                }
                if name == vacuum {
                    return self.semantic("initial state cannot be the vacuum state");
                }
                name
            }
            None => excited.clone(),
        };
        let couplings = self.couplings.into_iter().map(|p| p.coupling).collect();
        LinkageGraph::new(
            self.states,
            &excited,
            &vacuum,
            self.gamma.unwrap_or(1.0),
            couplings,
            &initial,
        )
        .map_err(|e| Error::Semantic {
            line: self.line,
            message: e.to_string(),
        })
    }
}

pub fn parse(source: &str) -> Result<LinkageGraph> {
    let mut p = Parser {
        line: 0,
        gamma: None,
        states: Vec::new(),
        state_line: HashMap::new(),
        excited: None,
        vacuum: None,
        couplings: Vec::new(),
        init: None,
    };
    let mut last = 1;
    for (i, line) in source.lines().enumerate() {
        p.line = i + 1;
        last = p.line;
        let toks = tokenize(line);
        if !toks.is_empty() {
            p.statement(&toks)?;
        }
    }
    // document-level problems are reported against the last line
    p.line = last;
    p.finish()
}

pub fn serialize(graph: &LinkageGraph) -> String {
    let mut out = String::new();
    writeln!(out, "gamma {}", fmt_float(graph.gamma())).unwrap();
    for s in graph.states() {
        if s == graph.excited() {
            writeln!(out, "state {s} excited").unwrap();
        } else if s == graph.vacuum() {
            writeln!(out, "state {s} vacuum").unwrap();
        } else {
            writeln!(out, "state {s}").unwrap();
        }
    }
    for c in graph.couplings() {
        write!(out, "couple {} {} rabi {}", c.from, c.to, fmt_float(c.rabi)).unwrap();
        if c.phase != 0.0 {
            write!(out, " phase {}", fmt_float(c.phase)).unwrap();
        }
        out.push('\n');
    }
    writeln!(out, "init {}", graph.initial()).unwrap();
    out
}

pub const PRESETS: [&str; 5] = ["doublet", "triplet", "quartuplet", "quintuplet", "sextuplet"];

/// Build a named multiplet linkage. Rabi values are in the fixed order
/// o1, o2, m1, m2, m3, ... (the triplet takes o1, m1, m2). The o1 coupling
/// carries the phase; for the loop presets it is offset so that the closed
/// forms read `sin(phase)` (quartuplet) and `cos(phase)` (quintuplet).
pub fn preset(name: &str, rabi: &[f64], phase: f64) -> Result<LinkageGraph> {
    let (grounds, edges, offset): (usize, &[(&str, &str)], f64) = match name {
        "doublet" => (1, &[("e", "g1")], 0.0),
        "triplet" => (3, &[("e", "g1"), ("g1", "g3"), ("g3", "g2")], 0.0),
        "quartuplet" => (
            3,
            &[("e", "g1"), ("e", "g2"), ("g1", "g3"), ("g3", "g2")],
            QUARTUPLET_PHASE_OFFSET,
        ),
        "quintuplet" => (
            4,
            &[("e", "g1"), ("e", "g2"), ("g1", "g3"), ("g3", "g2"), ("g2", "g4")],
            QUINTUPLET_PHASE_OFFSET,
        ),
        "sextuplet" => (
            5,
            &[
                ("e", "g1"),
                ("e", "g2"),
                ("g1", "g3"),
                ("g3", "g2"),
                ("g2", "g4"),
                ("g4", "g5"),
                ("g5", "g3"),
            ],
            QUINTUPLET_PHASE_OFFSET,
        ),
        _ => return Err(Error::UnknownPreset(name.to_string())),
    };
    if rabi.len() != edges.len() {
        return Err(Error::ArityMismatch {
            preset: name.to_string(),
            expected: edges.len(),
            got: rabi.len(),
        });
    }
    let mut states = vec!["e".to_string(), "g".to_string()];
    states.extend((1..=grounds).map(|i| format!("g{i}")));
    let couplings = edges
        .iter()
        .zip(rabi)
        .enumerate()
        .map(|(i, (&(a, b), &r))| {
            let c = Coupling::new(a, b, r);
            if i == 0 {
                c.with_phase(phase + offset)
            } else {
                c
            }
        })
        .collect();
    LinkageGraph::new(states, "e", "g", 1.0, couplings, "e")
}
