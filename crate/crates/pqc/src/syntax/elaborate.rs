//! Replaces free gate constants by circuit-literal wrappers.
//!
//! A gate `G : W1 x .. x Wn -> U` becomes a curried lambda
//! `\q1 .. \qn . apply(circ(S, G-circuit, U), (q1, (.., qn)))`, so gate
//! names apply like ordinary functions and the modality of the final arrow
//! is the gate's own modality. Gates with no inputs take a single `Unit`
//! argument. `True`/`False` stay as `Bool` constants.

use std::collections::HashSet;

use thiserror::Error;

use crate::circuit::Circuit;
use crate::signature::GateSet;
use crate::wire::{FreshSupply, SimpleType};

use super::{Program, Span, Term, TermKind};

#[derive(Debug, Error, PartialEq)]
#[error("{span}: unknown constant `{name}`")]
pub struct ElabError {
    pub span: Span,
    pub name: String,
}

pub fn elaborate_gates(
    program: &Program,
    gateset: &GateSet,
    supply: &mut FreshSupply,
) -> Result<Program, ElabError> {
    let mut out = Program::default();
    for def in &program.defs {
        let body = elaborate_term(&def.body, gateset, supply)?;
        out.defs.push(super::Definition {
            name: def.name.clone(),
            declared: def.declared.clone(),
            body,
            span: def.span,
        });
    }
    Ok(out)
}

pub fn elaborate_term(
    term: &Term,
    gateset: &GateSet,
    supply: &mut FreshSupply,
) -> Result<Term, ElabError> {
    let mut bound = HashSet::new();
    walk(term, gateset, supply, &mut bound)
}

fn walk(
    term: &Term,
    gs: &GateSet,
    supply: &mut FreshSupply,
    bound: &mut HashSet<String>,
) -> Result<Term, ElabError> {
    let span = term.span;
    let kind = match &term.kind {
        TermKind::Const(name) if name == "True" || name == "False" => term.kind.clone(),
        TermKind::Const(name) => match gs.lookup(name) {
            Some(def) => return Ok(gate_wrapper(def, span, supply)),
            None => {
                return Err(ElabError {
                    span,
                    name: name.clone(),
                })
            }
        },
        TermKind::Var(_) | TermKind::LabelRef(_) | TermKind::Unit | TermKind::CircLit(_, _, _) => {
            term.kind.clone()
        }
        TermKind::Lambda(x, body) => {
            let shadowed = bound.insert(x.clone());
            let body = walk(body, gs, supply, bound)?;
            if shadowed {
                bound.remove(x);
            }
            TermKind::Lambda(x.clone(), Box::new(body))
        }
        TermKind::App(f, a) => TermKind::App(
            Box::new(walk(f, gs, supply, bound)?),
            Box::new(walk(a, gs, supply, bound)?),
        ),
        TermKind::Pair(a, b) => TermKind::Pair(
            Box::new(walk(a, gs, supply, bound)?),
            Box::new(walk(b, gs, supply, bound)?),
        ),
        TermKind::LetPair(x, y, rhs, body) => {
            let rhs = walk(rhs, gs, supply, bound)?;
            let added_x = bound.insert(x.clone());
            let added_y = bound.insert(y.clone());
            let body = walk(body, gs, supply, bound)?;
            if added_x {
                bound.remove(x);
            }
            if added_y {
                bound.remove(y);
            }
            TermKind::LetPair(x.clone(), y.clone(), Box::new(rhs), Box::new(body))
        }
        TermKind::Lift(a) => TermKind::Lift(Box::new(walk(a, gs, supply, bound)?)),
        TermKind::Force(a) => TermKind::Force(Box::new(walk(a, gs, supply, bound)?)),
        TermKind::Apply(c, a) => TermKind::Apply(
            Box::new(walk(c, gs, supply, bound)?),
            Box::new(walk(a, gs, supply, bound)?),
        ),
        TermKind::BoxTerm(ty, a) => {
            TermKind::BoxTerm(ty.clone(), Box::new(walk(a, gs, supply, bound)?))
        }
        TermKind::Reverse(a) => TermKind::Reverse(Box::new(walk(a, gs, supply, bound)?)),
        TermKind::Controlled(spec, a) => {
            TermKind::Controlled(spec.clone(), Box::new(walk(a, gs, supply, bound)?))
        }
        TermKind::WithComputed(g, h) => TermKind::WithComputed(
            Box::new(walk(g, gs, supply, bound)?),
            Box::new(walk(h, gs, supply, bound)?),
        ),
    };
    Ok(Term::new(kind, span))
}

fn gate_wrapper(
    def: &std::sync::Arc<crate::signature::GateDef>,
    span: Span,
    supply: &mut FreshSupply,
) -> Term {
    let in_ty = SimpleType::from_wire_list(&def.inputs);
    let out_ty = SimpleType::from_wire_list(&def.outputs);
    let circuit = Circuit::from_gate(def, false, supply);
    let lit = Term::new(
        TermKind::CircLit(in_ty, circuit, out_ty),
        span,
    );

    let params: Vec<String> = if def.inputs.is_empty() {
        vec!["u0".to_string()]
    } else {
        (0..def.inputs.len()).map(|i| format!("q{i}")).collect()
    };
    // Right-nested argument tuple mirroring the tensor shape.
    let mut arg = Term::new(TermKind::Var(params.last().unwrap().clone()), span);
    for name in params.iter().rev().skip(1) {
        arg = Term::new(
            TermKind::Pair(
                Box::new(Term::new(TermKind::Var(name.clone()), span)),
                Box::new(arg),
            ),
            span,
        );
    }
    let mut term = Term::new(TermKind::Apply(Box::new(lit), Box::new(arg)), span);
    for name in params.iter().rev() {
        term = Term::new(TermKind::Lambda(name.clone(), Box::new(term)), span);
    }
    term
}
