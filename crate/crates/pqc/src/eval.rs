//! Big-step call-by-value evaluation of configurations.
//!
//! A configuration is a circuit under construction together with the term
//! being evaluated; the circuit's output interface is the live label
//! context. Evaluation of a closed program starts from the empty circuit
//! state. Every rule threads the state left to right; `box` runs its body in
//! a fresh state and returns a circuit literal; `apply` splices a circuit
//! literal onto the live wires.

use std::fmt;

use thiserror::Error;

use crate::circuit::{graft, Circuit, CircuitError, Item, Permutation};
use crate::signature::GateSet;
use crate::syntax::{Span, Term, TermKind};
use crate::transform::{control, dagger, flatten_conjugations, with_computed};
use crate::wire::{FreshSupply, Label, SimpleType, WireType};

pub const DEFAULT_STEP_LIMIT: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuntimeErrorKind {
    NotAFunction,
    NotAPair,
    NotACircuit,
    NotSimpleTerm,
    LabelSplitFailure,
    UnboundLabel,
    ReverseIrreversible,
    ControlUncontrollable,
    WcError,
    UnboundVariable,
    StepLimitExceeded,
    MissingMain,
}

impl fmt::Display for RuntimeErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            RuntimeErrorKind::NotAFunction => "NotAFunction",
            RuntimeErrorKind::NotAPair => "NotAPair",
            RuntimeErrorKind::NotACircuit => "NotACircuit",
            RuntimeErrorKind::NotSimpleTerm => "NotSimpleTerm",
            RuntimeErrorKind::LabelSplitFailure => "LabelSplitFailure",
            RuntimeErrorKind::UnboundLabel => "UnboundLabel",
            RuntimeErrorKind::ReverseIrreversible => "ReverseIrreversible",
            RuntimeErrorKind::ControlUncontrollable => "ControlUncontrollable",
            RuntimeErrorKind::WcError => "WcError",
            RuntimeErrorKind::UnboundVariable => "UnboundVariable",
            RuntimeErrorKind::StepLimitExceeded => "StepLimitExceeded",
            RuntimeErrorKind::MissingMain => "MissingMain",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error, PartialEq)]
#[error("{span}: {kind}: {message}")]
pub struct RuntimeError {
    pub kind: RuntimeErrorKind,
    pub span: Span,
    pub message: String,
}

impl RuntimeError {
    fn new(kind: RuntimeErrorKind, span: Span, message: impl Into<String>) -> RuntimeError {
        RuntimeError {
            kind,
            span,
            message: message.into(),
        }
    }
}

/// The evaluator state: circuit under construction plus the term. The live
/// label context is the circuit's output interface.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    pub circuit: Circuit,
    pub term: Term,
}

impl Configuration {
    pub fn labels(&self) -> &[(Label, WireType)] {
        &self.circuit.outputs
    }
}

/// Observer invoked after every evaluation step with the configurations
/// before and after; used for mechanical type-preservation checking.
pub trait StepMonitor {
    fn on_step(&mut self, before: &Configuration, after: &Configuration);
}

/// Generates a fresh simple term of the given shape together with its label
/// context, labels in left-to-right order.
pub fn gen(ty: &SimpleType, supply: &mut FreshSupply, span: Span) -> (Term, Vec<(Label, WireType)>) {
    let mut context = Vec::new();
    let term = gen_inner(ty, supply, span, &mut context);
    (term, context)
}

fn gen_inner(
    ty: &SimpleType,
    supply: &mut FreshSupply,
    span: Span,
    context: &mut Vec<(Label, WireType)>,
) -> Term {
    match ty {
        SimpleType::Unit => Term::new(TermKind::Unit, span),
        SimpleType::Wire(w) => {
            let label = supply.fresh();
            context.push((label, w.clone()));
            Term::new(TermKind::LabelRef(label), span)
        }
        SimpleType::Tensor(a, b) => {
            let left = gen_inner(a, supply, span, context);
            let right = gen_inner(b, supply, span, context);
            Term::new(TermKind::Pair(Box::new(left), Box::new(right)), span)
        }
    }
}

/// The unique simple type of `a` under the label context: `a` must use
/// exactly the context's labels, each once.
pub fn ungen(a: &Term, context: &[(Label, WireType)]) -> Result<SimpleType, RuntimeError> {
    let mut used = vec![false; context.len()];
    let ty = ungen_inner(a, context, &mut used)?;
    if let Some(i) = used.iter().position(|u| !u) {
        return Err(RuntimeError::new(
            RuntimeErrorKind::LabelSplitFailure,
            a.span,
            format!("label {} is left over by the result", context[i].0),
        ));
    }
    Ok(ty)
}

fn ungen_inner(
    a: &Term,
    context: &[(Label, WireType)],
    used: &mut [bool],
) -> Result<SimpleType, RuntimeError> {
    match &a.kind {
        TermKind::Unit => Ok(SimpleType::Unit),
        TermKind::LabelRef(l) => {
            match context.iter().position(|(x, _)| x == l) {
                Some(i) if !used[i] => {
                    used[i] = true;
                    Ok(SimpleType::Wire(context[i].1.clone()))
                }
                Some(_) => Err(RuntimeError::new(
                    RuntimeErrorKind::UnboundLabel,
                    a.span,
                    format!("label {l} used twice"),
                )),
                None => Err(RuntimeError::new(
                    RuntimeErrorKind::UnboundLabel,
                    a.span,
                    format!("label {l} is not bound in the context"),
                )),
            }
        }
        TermKind::Pair(x, y) => Ok(SimpleType::tensor(
            ungen_inner(x, context, used)?,
            ungen_inner(y, context, used)?,
        )),
        _ => Err(RuntimeError::new(
            RuntimeErrorKind::NotSimpleTerm,
            a.span,
            "expected a tuple of labels",
        )),
    }
}

/// The labels of a simple term, in tuple order.
pub fn simple_labels(a: &Term) -> Result<Vec<Label>, RuntimeError> {
    let mut out = Vec::new();
    collect_labels(a, &mut out)?;
    Ok(out)
}

fn collect_labels(a: &Term, out: &mut Vec<Label>) -> Result<(), RuntimeError> {
    match &a.kind {
        TermKind::Unit => Ok(()),
        TermKind::LabelRef(l) => {
            out.push(*l);
            Ok(())
        }
        TermKind::Pair(x, y) => {
            collect_labels(x, out)?;
            collect_labels(y, out)
        }
        _ => Err(RuntimeError::new(
            RuntimeErrorKind::NotSimpleTerm,
            a.span,
            "expected a tuple of labels",
        )),
    }
}

/// The wire-crossing circuit interpreting a simple term over its context:
/// inputs in context order, outputs in the term's tuple order.
pub fn interp_simple(a: &Term, context: &[(Label, WireType)]) -> Result<Circuit, RuntimeError> {
    let labels = simple_labels(a)?;
    let mut outputs = Vec::with_capacity(labels.len());
    for l in &labels {
        match context.iter().find(|(x, _)| x == l) {
            Some(entry) => outputs.push(entry.clone()),
            None => {
                return Err(RuntimeError::new(
                    RuntimeErrorKind::UnboundLabel,
                    a.span,
                    format!("label {l} is not bound in the context"),
                ))
            }
        }
    }
    if outputs.len() != context.len() {
        return Err(RuntimeError::new(
            RuntimeErrorKind::LabelSplitFailure,
            a.span,
            "simple term does not cover the context",
        ));
    }
    let mut items = Vec::new();
    if outputs != context {
        items.push(Item::Perm(Permutation {
            inputs: context.iter().map(|(l, _)| *l).collect(),
            outputs: labels,
        }));
    }
    Ok(Circuit {
        inputs: context.to_vec(),
        items,
        outputs,
    })
}

/// Splices a circuit literal `d` onto the live wires named by the simple
/// term `a`, leaving spectator wires alone. Returns the extended circuit and
/// the simple term naming `d`'s outputs, shaped like `out_shape`.
pub fn append(
    state: &Circuit,
    a: &Term,
    d: &Circuit,
    out_shape: &SimpleType,
    supply: &mut FreshSupply,
) -> Result<(Circuit, Term), RuntimeError> {
    let sigma = &state.outputs;
    let a_labels = simple_labels(a)?;
    let mut front: Vec<(Label, WireType)> = Vec::with_capacity(a_labels.len());
    for l in &a_labels {
        match sigma.iter().find(|(x, _)| x == l) {
            Some(entry) => front.push(entry.clone()),
            None => {
                return Err(RuntimeError::new(
                    RuntimeErrorKind::LabelSplitFailure,
                    a.span,
                    format!("label {l} is not live"),
                ))
            }
        }
    }
    {
        let mut seen = std::collections::HashSet::new();
        for l in &a_labels {
            if !seen.insert(*l) {
                return Err(RuntimeError::new(
                    RuntimeErrorKind::LabelSplitFailure,
                    a.span,
                    format!("label {l} used twice in the argument"),
                ));
            }
        }
    }
    let front_types: Vec<WireType> = front.iter().map(|(_, w)| w.clone()).collect();
    if front_types != d.in_types() {
        return Err(RuntimeError::new(
            RuntimeErrorKind::LabelSplitFailure,
            a.span,
            "argument wires do not match the circuit interface",
        ));
    }
    let spectators: Vec<(Label, WireType)> = sigma
        .iter()
        .filter(|(l, _)| !a_labels.contains(l))
        .cloned()
        .collect();

    let mut items = state.items.clone();
    // Bring the consumed wires to the front, in argument order.
    let mut reordered: Vec<(Label, WireType)> = front.clone();
    reordered.extend(spectators.iter().cloned());
    if reordered != *sigma {
        items.push(Item::Perm(Permutation {
            inputs: sigma.iter().map(|(l, _)| *l).collect(),
            outputs: reordered.iter().map(|(l, _)| *l).collect(),
        }));
    }
    let outs = graft(&mut items, d, &a_labels, supply);
    let mut outputs: Vec<(Label, WireType)> = outs
        .iter()
        .zip(d.outputs.iter())
        .map(|(l, (_, w))| (*l, w.clone()))
        .collect();
    outputs.extend(spectators);
    let circuit = Circuit {
        inputs: state.inputs.clone(),
        items,
        outputs,
    };
    let value = shape_term(out_shape, &outs, &mut 0, a.span);
    Ok((circuit, value))
}

fn shape_term(ty: &SimpleType, labels: &[Label], next: &mut usize, span: Span) -> Term {
    match ty {
        SimpleType::Unit => Term::new(TermKind::Unit, span),
        SimpleType::Wire(_) => {
            let l = labels[*next];
            *next += 1;
            Term::new(TermKind::LabelRef(l), span)
        }
        SimpleType::Tensor(a, b) => {
            let left = shape_term(a, labels, next, span);
            let right = shape_term(b, labels, next, span);
            Term::new(TermKind::Pair(Box::new(left), Box::new(right)), span)
        }
    }
}

/// Capture-avoiding substitution of a value for a variable. Substituted
/// values are closed up to labels, so shadowing is the only concern.
pub fn substitute(term: &Term, var: &str, value: &Term) -> Term {
    let kind = match &term.kind {
        TermKind::Var(name) if name == var => return value.clone(),
        TermKind::Var(_)
        | TermKind::Const(_)
        | TermKind::LabelRef(_)
        | TermKind::Unit
        | TermKind::CircLit(_, _, _) => term.kind.clone(),
        TermKind::Lambda(x, _) if x == var => term.kind.clone(),
        TermKind::Lambda(x, body) => {
            TermKind::Lambda(x.clone(), Box::new(substitute(body, var, value)))
        }
        TermKind::App(f, a) => TermKind::App(
            Box::new(substitute(f, var, value)),
            Box::new(substitute(a, var, value)),
        ),
        TermKind::Pair(a, b) => TermKind::Pair(
            Box::new(substitute(a, var, value)),
            Box::new(substitute(b, var, value)),
        ),
        TermKind::LetPair(x, y, rhs, body) => {
            let rhs = Box::new(substitute(rhs, var, value));
            let body = if x == var || y == var {
                body.clone()
            } else {
                Box::new(substitute(body, var, value))
            };
            TermKind::LetPair(x.clone(), y.clone(), rhs, body)
        }
        TermKind::Lift(a) => TermKind::Lift(Box::new(substitute(a, var, value))),
        TermKind::Force(a) => TermKind::Force(Box::new(substitute(a, var, value))),
        TermKind::Apply(c, a) => TermKind::Apply(
            Box::new(substitute(c, var, value)),
            Box::new(substitute(a, var, value)),
        ),
        TermKind::BoxTerm(ty, a) => {
            TermKind::BoxTerm(ty.clone(), Box::new(substitute(a, var, value)))
        }
        TermKind::Reverse(a) => TermKind::Reverse(Box::new(substitute(a, var, value))),
        TermKind::Controlled(spec, a) => {
            TermKind::Controlled(spec.clone(), Box::new(substitute(a, var, value)))
        }
        TermKind::WithComputed(g, h) => TermKind::WithComputed(
            Box::new(substitute(g, var, value)),
            Box::new(substitute(h, var, value)),
        ),
    };
    Term::new(kind, term.span)
}

pub struct Evaluator<'g, 'r> {
    pub gateset: &'g GateSet,
    pub supply: &'r mut FreshSupply,
    pub step_limit: u64,
    pub steps: u64,
    pub monitor: Option<&'r mut dyn StepMonitor>,
}

impl<'g, 'r> Evaluator<'g, 'r> {
    pub fn new(gateset: &'g GateSet, supply: &'r mut FreshSupply) -> Evaluator<'g, 'r> {
        Evaluator {
            gateset,
            supply,
            step_limit: DEFAULT_STEP_LIMIT,
            steps: 0,
            monitor: None,
        }
    }

    pub fn with_monitor(mut self, monitor: &'r mut dyn StepMonitor) -> Evaluator<'g, 'r> {
        self.monitor = Some(monitor);
        self
    }

    /// Evaluates one configuration to a value configuration.
    pub fn eval(&mut self, state: Circuit, term: Term) -> Result<(Circuit, Term), RuntimeError> {
        self.steps += 1;
        if self.steps > self.step_limit {
            return Err(RuntimeError::new(
                RuntimeErrorKind::StepLimitExceeded,
                term.span,
                format!("evaluation exceeded {} steps", self.step_limit),
            ));
        }
        let before = if self.monitor.is_some() {
            Some(Configuration {
                circuit: state.clone(),
                term: term.clone(),
            })
        } else {
            None
        };
        let (circuit, value) = self.eval_inner(state, term)?;
        if let Some(monitor) = self.monitor.as_deref_mut() {
            let after = Configuration {
                circuit: circuit.clone(),
                term: value.clone(),
            };
            monitor.on_step(before.as_ref().unwrap(), &after);
        }
        Ok((circuit, value))
    }

    fn eval_inner(&mut self, state: Circuit, term: Term) -> Result<(Circuit, Term), RuntimeError> {
        let span = term.span;
        match term.kind {
            TermKind::Const(_)
            | TermKind::LabelRef(_)
            | TermKind::Unit
            | TermKind::Lambda(_, _)
            | TermKind::Lift(_)
            | TermKind::CircLit(_, _, _) => Ok((state, term)),
            TermKind::Var(name) => Err(RuntimeError::new(
                RuntimeErrorKind::UnboundVariable,
                span,
                format!("unbound variable `{name}`"),
            )),
            TermKind::App(f, a) => {
                let (state, fval) = self.eval(state, *f)?;
                let (x, body) = match fval.kind {
                    TermKind::Lambda(x, body) => (x, body),
                    _ => {
                        return Err(RuntimeError::new(
                            RuntimeErrorKind::NotAFunction,
                            span,
                            "application of a non-function",
                        ))
                    }
                };
                let (state, arg) = self.eval(state, *a)?;
                self.eval(state, substitute(&body, &x, &arg))
            }
            TermKind::Pair(a, b) => {
                let (state, va) = self.eval(state, *a)?;
                let (state, vb) = self.eval(state, *b)?;
                Ok((
                    state,
                    Term::new(TermKind::Pair(Box::new(va), Box::new(vb)), span),
                ))
            }
            TermKind::LetPair(x, y, rhs, body) => {
                let (state, pair) = self.eval(state, *rhs)?;
                let (va, vb) = match pair.kind {
                    TermKind::Pair(a, b) => (a, b),
                    _ => {
                        return Err(RuntimeError::new(
                            RuntimeErrorKind::NotAPair,
                            span,
                            "let expects a pair",
                        ))
                    }
                };
                let body = substitute(&substitute(&body, &x, &va), &y, &vb);
                self.eval(state, body)
            }
            TermKind::Force(m) => {
                let (state, v) = self.eval(state, *m)?;
                match v.kind {
                    TermKind::Lift(inner) => self.eval(state, *inner),
                    _ => Err(RuntimeError::new(
                        RuntimeErrorKind::NotAFunction,
                        span,
                        "force expects a suspended computation",
                    )),
                }
            }
            TermKind::Apply(m, n) => {
                let (state, circ) = self.eval(state, *m)?;
                let (d, out_ty) = match circ.kind {
                    TermKind::CircLit(_, d, u) => (d, u),
                    _ => {
                        return Err(RuntimeError::new(
                            RuntimeErrorKind::NotACircuit,
                            span,
                            "apply expects a circuit",
                        ))
                    }
                };
                let (state, arg) = self.eval(state, *n)?;
                let (circuit, value) = append(&state, &arg, &d, &out_ty, self.supply)?;
                Ok((circuit, value))
            }
            TermKind::BoxTerm(shape, m) => {
                let (state, v) = self.eval(state, *m)?;
                let inner = match v.kind {
                    TermKind::Lift(inner) => inner,
                    _ => {
                        return Err(RuntimeError::new(
                            RuntimeErrorKind::NotAFunction,
                            span,
                            "box expects a lifted function",
                        ))
                    }
                };
                let (a, context) = gen(&shape, self.supply, span);
                let id = interp_simple(&a, &context)?;
                let start = dagger(&id, self.gateset).expect("wire crossings are reversible");
                let body = Term::new(TermKind::App(inner, Box::new(a)), span);
                let (d, b) = self.eval(start, body)?;
                let out_shape = ungen(&b, &d.outputs)?;
                let finish = interp_simple(&b, &d.outputs)?;
                let composed = d.compose(&finish, self.supply).map_err(|e| {
                    RuntimeError::new(RuntimeErrorKind::LabelSplitFailure, span, e.to_string())
                })?;
                Ok((
                    state,
                    Term::new(
                        TermKind::CircLit(shape, composed, out_shape),
                        span,
                    ),
                ))
            }
            TermKind::Reverse(m) => {
                let (state, v) = self.eval(state, *m)?;
                let (s, d, u) = match v.kind {
                    TermKind::CircLit(s, d, u) => (s, d, u),
                    _ => {
                        return Err(RuntimeError::new(
                            RuntimeErrorKind::NotACircuit,
                            span,
                            "reverse expects a circuit",
                        ))
                    }
                };
                let rev = dagger(&d, self.gateset).map_err(|e| {
                    RuntimeError::new(RuntimeErrorKind::ReverseIrreversible, span, e.to_string())
                })?;
                Ok((state, Term::new(TermKind::CircLit(u, rev, s), span)))
            }
            TermKind::Controlled(spec, m) => {
                let (state, v) = self.eval(state, *m)?;
                let (s, d, _u) = match v.kind {
                    TermKind::CircLit(s, d, u) => (s, d, u),
                    _ => {
                        return Err(RuntimeError::new(
                            RuntimeErrorKind::NotACircuit,
                            span,
                            "controlled expects a circuit",
                        ))
                    }
                };
                let controlled =
                    control(&d, &spec, self.gateset, self.supply).map_err(|e| {
                        RuntimeError::new(
                            RuntimeErrorKind::ControlUncontrollable,
                            span,
                            e.to_string(),
                        )
                    })?;
                let mut ty = s;
                for _ in 0..spec.len() {
                    ty = SimpleType::tensor(SimpleType::qubit(), ty);
                }
                Ok((
                    state,
                    Term::new(TermKind::CircLit(ty.clone(), controlled, ty), span),
                ))
            }
            TermKind::WithComputed(m, n) => {
                // The body circuit evaluates in the incoming state first.
                let (state, vn) = self.eval(state, *n)?;
                let (_s2, d2, _u2) = match vn.kind {
                    TermKind::CircLit(s, d, u) => (s, d, u),
                    _ => {
                        return Err(RuntimeError::new(
                            RuntimeErrorKind::NotACircuit,
                            span,
                            "withComputed expects circuits",
                        ))
                    }
                };
                let (state, vm) = self.eval(state, *m)?;
                let (s1, d1, _u1) = match vm.kind {
                    TermKind::CircLit(s, d, u) => (s, d, u),
                    _ => {
                        return Err(RuntimeError::new(
                            RuntimeErrorKind::NotACircuit,
                            span,
                            "withComputed expects circuits",
                        ))
                    }
                };
                // The setup lands in the reversible fragment: flatten any
                // conjugation nodes it carries.
                let setup = flatten_conjugations(&d1, self.gateset, self.supply)
                    .map_err(|e| map_wc_error(e, span))?;
                let node = with_computed(&setup, &d2, self.supply)
                    .map_err(|e| map_wc_error(e, span))?;
                Ok((
                    state,
                    Term::new(TermKind::CircLit(s1.clone(), node, s1), span),
                ))
            }
        }
    }
}

fn map_wc_error(e: CircuitError, span: Span) -> RuntimeError {
    RuntimeError::new(RuntimeErrorKind::WcError, span, e.to_string())
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub value: Term,
    pub circuit_state: Circuit,
}

/// Evaluates the definitions of an elaborated program in order, substituting
/// each definition's value into the rest, and returns the target
/// definition's value together with the final circuit state.
pub fn run_main<'r>(
    program: &crate::syntax::Program,
    gateset: &GateSet,
    main: &str,
    supply: &'r mut FreshSupply,
    step_limit: u64,
    monitor: Option<&'r mut dyn StepMonitor>,
) -> Result<RunOutcome, RuntimeError> {
    let mut state = Circuit::identity(&SimpleType::Unit, supply);
    let mut env: Vec<(String, Term)> = Vec::new();
    let mut evaluator = Evaluator {
        gateset,
        supply,
        step_limit,
        steps: 0,
        monitor,
    };
    for def in &program.defs {
        let mut term = def.body.clone();
        for (name, value) in &env {
            term = substitute(&term, name, value);
        }
        let (next_state, value) = evaluator.eval(state, term)?;
        state = next_state;
        if def.name == main {
            return Ok(RunOutcome {
                value,
                circuit_state: state,
            });
        }
        env.push((def.name.clone(), value));
    }
    Err(RuntimeError::new(
        RuntimeErrorKind::MissingMain,
        Span::default(),
        format!("program has no definition named `{main}`"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::default_gateset;
    use crate::syntax::{elaborate_gates, parse_program, parse_term};

    fn eval_src(src: &str) -> Result<(Circuit, Term), RuntimeError> {
        let gs = default_gateset();
        let mut supply = FreshSupply::new();
        let term = parse_term(src).unwrap();
        let term =
            crate::syntax::elaborate::elaborate_term(&term, &gs, &mut supply).unwrap();
        let state = Circuit::identity(&SimpleType::Unit, &mut supply);
        let mut evaluator = Evaluator::new(&gs, &mut supply);
        evaluator.eval(state, term)
    }

    #[test]
    fn gen_examples() {
        let mut supply = FreshSupply::new();
        let (t, ctx) = gen(&SimpleType::Unit, &mut supply, Span::default());
        assert!(matches!(t.kind, TermKind::Unit));
        assert!(ctx.is_empty());

        let q2 = SimpleType::tensor(SimpleType::qubit(), SimpleType::qubit());
        let (t, ctx) = gen(&q2, &mut supply, Span::default());
        assert_eq!(ctx.len(), 2);
        assert!(matches!(t.kind, TermKind::Pair(_, _)));

        let q3 = SimpleType::tensor(
            SimpleType::qubit(),
            SimpleType::tensor(SimpleType::qubit(), SimpleType::qubit()),
        );
        let (_, ctx) = gen(&q3, &mut supply, Span::default());
        assert_eq!(ctx.len(), 3);
    }

    #[test]
    fn ungen_examples() {
        let mut supply = FreshSupply::new();
        let q2 = SimpleType::tensor(SimpleType::qubit(), SimpleType::qubit());
        let (t, ctx) = gen(&q2, &mut supply, Span::default());
        assert_eq!(ungen(&t, &ctx).unwrap(), q2);

        // Leftover labels are a runtime error.
        let (t, _) = gen(&SimpleType::qubit(), &mut supply, Span::default());
        let mut ctx2 = Vec::new();
        if let TermKind::LabelRef(l) = t.kind {
            ctx2.push((l, WireType::qubit()));
        }
        ctx2.push((Label::new(999), WireType::bit()));
        let err = ungen(&t, &ctx2).unwrap_err();
        assert_eq!(err.kind, RuntimeErrorKind::LabelSplitFailure);
    }

    #[test]
    fn interp_of_swapped_pair_is_a_crossing() {
        let mut supply = FreshSupply::new();
        let q2 = SimpleType::tensor(SimpleType::qubit(), SimpleType::qubit());
        let (t, ctx) = gen(&q2, &mut supply, Span::default());
        // Swap the tuple components.
        let (a, b) = match &t.kind {
            TermKind::Pair(a, b) => (a.clone(), b.clone()),
            _ => unreachable!(),
        };
        let swapped = Term::new(TermKind::Pair(b, a), t.span);
        let c = interp_simple(&swapped, &ctx).unwrap();
        assert_eq!(c.items.len(), 1);
        assert!(matches!(c.items[0], Item::Perm(_)));
        // Identity order interprets to the identity circuit.
        let id = interp_simple(&t, &ctx).unwrap();
        assert!(id.items.is_empty());
    }

    #[test]
    fn boxed_identity_function() {
        let (_, v) = eval_src("box Qubit (lift (\\q . q))").unwrap();
        match v.kind {
            TermKind::CircLit(_, c, _) => {
                assert!(c.is_identity());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn boxed_swapped_arguments_gives_cnot_after_crossing() {
        // Boxing \x . let (a1, a2) = x in apply(cnot, (a2, a1)) yields one
        // crossing followed by one CNOT gate, no swap gates.
        let (_, v) = eval_src(
            "box (Qubit * Qubit) (lift (\\x . let (a1, a2) = x in \
             apply(box (Qubit * Qubit) (lift (\\p . let (u, v) = p in CNOT u v)), (a2, a1))))",
        )
        .unwrap();
        let c = match v.kind {
            TermKind::CircLit(_, c, _) => c,
            other => panic!("{other:?}"),
        };
        c.validate().unwrap();
        let kinds: Vec<&str> = c
            .items
            .iter()
            .map(|i| match i {
                Item::Gate(g) => g.def.name.as_str(),
                Item::Perm(_) => "perm",
                Item::Conj { .. } => "conj",
            })
            .collect();
        assert_eq!(kinds, ["perm", "CNOT"]);
    }

    #[test]
    fn reverse_of_measurement_errors() {
        let err = eval_src("reverse (box Qubit (lift (\\q . Meas q)))").unwrap_err();
        assert_eq!(err.kind, RuntimeErrorKind::ReverseIrreversible);
    }

    #[test]
    fn apply_with_wrong_shape_fails_label_split() {
        let err = eval_src(
            "box (Qubit * Qubit) (lift (\\x . let (a, b) = x in \
             (apply(box Qubit (lift (\\q . H q)), (a, b)), ())))",
        )
        .unwrap_err();
        assert_eq!(err.kind, RuntimeErrorKind::LabelSplitFailure);
    }

    #[test]
    fn force_of_non_lift_is_an_error() {
        let err = eval_src("force ()").unwrap_err();
        assert_eq!(err.kind, RuntimeErrorKind::NotAFunction);
    }

    #[test]
    fn let_of_non_pair_is_an_error() {
        let err = eval_src("let (x, y) = () in x").unwrap_err();
        assert_eq!(err.kind, RuntimeErrorKind::NotAPair);
    }

    #[test]
    fn box_of_non_simple_result_is_an_error() {
        let err = eval_src("box Qubit (lift (\\q . (\\z . (q, z))))").unwrap_err();
        assert_eq!(err.kind, RuntimeErrorKind::NotSimpleTerm);
    }

    #[test]
    fn step_limit_reports() {
        let gs = default_gateset();
        let mut supply = FreshSupply::new();
        let term = parse_term("box Qubit (lift (\\q . H (H (H q))))").unwrap();
        let term =
            crate::syntax::elaborate::elaborate_term(&term, &gs, &mut supply).unwrap();
        let state = Circuit::identity(&SimpleType::Unit, &mut supply);
        let mut evaluator = Evaluator::new(&gs, &mut supply);
        evaluator.step_limit = 3;
        let err = evaluator.eval(state, term).unwrap_err();
        assert_eq!(err.kind, RuntimeErrorKind::StepLimitExceeded);
    }

    #[test]
    fn run_main_threads_definitions() {
        let gs = default_gateset();
        let mut supply = FreshSupply::new();
        let src = "\
h_box : Circ(Qubit, Qubit)
h_box = box Qubit (lift (\\q . H q))

main = reverse h_box
";
        let program = parse_program(src).unwrap();
        let program = elaborate_gates(&program, &gs, &mut supply).unwrap();
        let out = run_main(&program, &gs, "main", &mut supply, 10_000, None).unwrap();
        match out.value.kind {
            TermKind::CircLit(_, c, _) => {
                assert_eq!(c.items.len(), 1);
            }
            other => panic!("{other:?}"),
        }
        let missing = run_main(&program, &gs, "absent", &mut supply, 10_000, None).unwrap_err();
        assert_eq!(missing.kind, RuntimeErrorKind::MissingMain);
    }

    #[test]
    fn evaluation_is_deterministic() {
        let run = || {
            let gs = default_gateset();
            let mut supply = FreshSupply::new();
            let src = "main = box (Qubit * Qubit) (lift (\\p . let (a, b) = p in CNOT (H a) b))\n";
            let program = parse_program(src).unwrap();
            let program = elaborate_gates(&program, &gs, &mut supply).unwrap();
            run_main(&program, &gs, "main", &mut supply, 10_000, None).unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a.value, b.value);
        assert_eq!(a.circuit_state, b.circuit_state);
    }
}
