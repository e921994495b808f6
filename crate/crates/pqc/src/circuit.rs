//! The circuit intermediate representation.
//!
//! A circuit is an ordered item list between two labeled interfaces. Items
//! are gate applications, wire permutations, or conjugation nodes
//! `Conj { setup, body }` denoting `setup ; body ; setup†`. Gates inside a
//! conjugation's `setup` are protected: the control operation never attaches
//! control wires to them, only to gates of `body`.
//!
//! Circuits are immutable values; every operation returns a new circuit.
//! Labels are evaluator bookkeeping, so circuits are compared either exactly
//! (`PartialEq`) or up to a label bijection (`structurally_equal`).

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::modality::Modality;
use crate::signature::{GateDef, GateSet};
use crate::wire::{FreshSupply, Label, SimpleType, WireType};

/// A control gadget: fires the gate when its wire is |1> (black) or |0>
/// (white).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ControlGadget {
    Black,
    White,
}

impl fmt::Display for ControlGadget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ControlGadget::Black => f.write_str("+"),
            ControlGadget::White => f.write_str("-"),
        }
    }
}

/// An ordered sequence of control gadgets. Concatenation makes these a
/// monoid with the empty spec as unit; the underlying wires are all qubits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ControlSpec {
    pub gadgets: Vec<ControlGadget>,
}

impl ControlSpec {
    pub fn new(gadgets: Vec<ControlGadget>) -> ControlSpec {
        ControlSpec { gadgets }
    }

    /// A single black dot, the default control.
    pub fn black() -> ControlSpec {
        ControlSpec::new(vec![ControlGadget::Black])
    }

    pub fn empty() -> ControlSpec {
        ControlSpec::default()
    }

    pub fn len(&self) -> usize {
        self.gadgets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gadgets.is_empty()
    }

    /// `K1 ++ K2`, the monoid operation.
    pub fn concat(&self, other: &ControlSpec) -> ControlSpec {
        let mut gadgets = self.gadgets.clone();
        gadgets.extend(other.gadgets.iter().copied());
        ControlSpec::new(gadgets)
    }

    /// The simple type of the control wires: a right-nested qubit tensor.
    pub fn underlying_type(&self) -> SimpleType {
        SimpleType::wires(&WireType::qubit(), self.len())
    }
}

impl fmt::Display for ControlSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.gadgets {
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

/// One gate application: which gate, whether it is daggered, the control
/// gadgets attached to live wires, and the consumed/produced labels.
#[derive(Debug, Clone, PartialEq)]
pub struct GateInstance {
    pub def: Arc<GateDef>,
    pub daggered: bool,
    pub controls: Vec<(ControlGadget, Label)>,
    pub ins: Vec<Label>,
    pub outs: Vec<Label>,
}

impl GateInstance {
    pub fn is_controlled(&self) -> bool {
        !self.controls.is_empty()
    }
}

/// A reordering of the full live wire list. `inputs` is the incoming order,
/// `outputs` the outgoing order; both hold the same label set. Identity
/// permutations are elided at construction time.
#[derive(Debug, Clone, PartialEq)]
pub struct Permutation {
    pub inputs: Vec<Label>,
    pub outputs: Vec<Label>,
}

impl Permutation {
    pub fn is_identity(&self) -> bool {
        self.inputs == self.outputs
    }

    /// `d[j]` = incoming position whose wire ends up at outgoing position
    /// `j`.
    pub fn position_map(&self) -> Option<Vec<usize>> {
        self.outputs
            .iter()
            .map(|l| self.inputs.iter().position(|x| x == l))
            .collect()
    }

    pub fn inverted(&self) -> Permutation {
        Permutation {
            inputs: self.outputs.clone(),
            outputs: self.inputs.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Item {
    Gate(GateInstance),
    Perm(Permutation),
    /// `setup ; body ; setup†` as one node. The node spans the live wires
    /// named by `setup`'s input interface and leaves them unchanged; labels
    /// inside `setup` and `body` are scoped to the node.
    Conj {
        setup: Box<Circuit>,
        body: Box<Circuit>,
    },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CircuitError {
    #[error("interface mismatch: expected wires ({expected}), found ({found})")]
    InterfaceMismatch { expected: String, found: String },
    #[error("circuit is not reversible (modality 0)")]
    NotReversible,
    #[error("circuit is not controllable (modality {0})")]
    NotControllable(Modality),
    #[error("control requires equal input and output interfaces")]
    NotSquare,
    #[error("with-computed setup circuit is not reversible (modality 0)")]
    WcNotReversible,
    #[error("with-computed body circuit is not controllable (modality {0})")]
    WcNotControllable(Modality),
    #[error("cannot control a crossing of non-qubit wires ({0})")]
    NonQubitPermControl(WireType),
    #[error("malformed circuit: {0}")]
    Invalid(String),
}

fn wire_list_string(wires: &[WireType]) -> String {
    wires
        .iter()
        .map(|w| w.name().to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

pub(crate) fn interface_mismatch(expected: &[WireType], found: &[WireType]) -> CircuitError {
    CircuitError::InterfaceMismatch {
        expected: wire_list_string(expected),
        found: wire_list_string(found),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub inputs: Vec<(Label, WireType)>,
    pub items: Vec<Item>,
    pub outputs: Vec<(Label, WireType)>,
}

impl Circuit {
    /// The identity circuit on a simple type: equal interfaces, no items.
    pub fn identity(ty: &SimpleType, supply: &mut FreshSupply) -> Circuit {
        let interface: Vec<(Label, WireType)> = ty
            .flatten()
            .into_iter()
            .map(|w| (supply.fresh(), w))
            .collect();
        Circuit {
            inputs: interface.clone(),
            items: Vec::new(),
            outputs: interface,
        }
    }

    /// A circuit consisting of a single (uncontrolled) gate application.
    pub fn from_gate(def: &Arc<GateDef>, daggered: bool, supply: &mut FreshSupply) -> Circuit {
        let inputs: Vec<(Label, WireType)> = def
            .inputs
            .iter()
            .map(|w| (supply.fresh(), w.clone()))
            .collect();
        let outputs: Vec<(Label, WireType)> = def
            .outputs
            .iter()
            .map(|w| (supply.fresh(), w.clone()))
            .collect();
        let gate = GateInstance {
            def: def.clone(),
            daggered,
            controls: Vec::new(),
            ins: inputs.iter().map(|(l, _)| *l).collect(),
            outs: outputs.iter().map(|(l, _)| *l).collect(),
        };
        Circuit {
            inputs,
            items: vec![Item::Gate(gate)],
            outputs,
        }
    }

    pub fn in_labels(&self) -> Vec<Label> {
        self.inputs.iter().map(|(l, _)| *l).collect()
    }

    pub fn out_labels(&self) -> Vec<Label> {
        self.outputs.iter().map(|(l, _)| *l).collect()
    }

    pub fn in_types(&self) -> Vec<WireType> {
        self.inputs.iter().map(|(_, w)| w.clone()).collect()
    }

    pub fn out_types(&self) -> Vec<WireType> {
        self.outputs.iter().map(|(_, w)| w.clone()).collect()
    }

    /// True when this circuit denotes an identity: no items at all.
    pub fn is_identity(&self) -> bool {
        self.items.is_empty() && self.inputs == self.outputs
    }

    /// The circuit's modality: the meet over all items, where gates
    /// contribute their declared modality, permutations are free, and a
    /// conjugation node is controllable exactly when its setup is reversible
    /// and its body controllable.
    pub fn modality(&self) -> Modality {
        self.items
            .iter()
            .map(item_modality)
            .fold(Modality::Controllable, Modality::meet)
    }

    /// Sequential composition `self ; other`. Interfaces are matched
    /// positionally by wire type; `other`'s labels are renamed so the
    /// circuits connect.
    pub fn compose(&self, other: &Circuit, supply: &mut FreshSupply) -> Result<Circuit, CircuitError> {
        let out_types = self.out_types();
        let in_types = other.in_types();
        if out_types != in_types {
            return Err(interface_mismatch(&out_types, &in_types));
        }
        let mut items = self.items.clone();
        let outs = graft(&mut items, other, &self.out_labels(), supply);
        let outputs = outs
            .into_iter()
            .zip(other.outputs.iter())
            .map(|(l, (_, w))| (l, w.clone()))
            .collect();
        Ok(Circuit {
            inputs: self.inputs.clone(),
            items,
            outputs,
        })
    }

    /// Parallel composition: interfaces and items concatenated, `other`
    /// renamed onto fresh labels.
    pub fn tensor(&self, other: &Circuit, supply: &mut FreshSupply) -> Circuit {
        let attach: Vec<Label> = other.inputs.iter().map(|_| supply.fresh()).collect();
        let mut inputs = self.inputs.clone();
        inputs.extend(
            attach
                .iter()
                .zip(other.inputs.iter())
                .map(|(l, (_, w))| (*l, w.clone())),
        );
        let mut items = self.items.clone();
        let outs = graft(&mut items, other, &attach, supply);
        let mut outputs = self.outputs.clone();
        outputs.extend(
            outs.into_iter()
                .zip(other.outputs.iter())
                .map(|(l, (_, w))| (l, w.clone())),
        );
        Circuit {
            inputs,
            items,
            outputs,
        }
    }

    /// Walks every gate instance, including those inside conjugation nodes.
    /// The flag passed to `f` is true for gates protected by a conjugation
    /// setup (which the control operation leaves untouched).
    pub fn visit_gates<F: FnMut(&GateInstance, bool)>(&self, f: &mut F) {
        self.visit_gates_inner(f, false)
    }

    fn visit_gates_inner<F: FnMut(&GateInstance, bool)>(&self, f: &mut F, protected: bool) {
        for item in &self.items {
            match item {
                Item::Gate(g) => f(g, protected),
                Item::Perm(_) => {}
                Item::Conj { setup, body } => {
                    setup.visit_gates_inner(f, true);
                    body.visit_gates_inner(f, protected);
                }
            }
        }
    }

    pub fn count_gates(&self, pred: impl Fn(&GateInstance, bool) -> bool) -> usize {
        let mut count = 0;
        self.visit_gates(&mut |g, protected| {
            if pred(g, protected) {
                count += 1;
            }
        });
        count
    }

    /// Checks wire-flow validity: every item consumes live labels and binds
    /// fresh ones, and the final live list equals the output interface.
    pub fn validate(&self) -> Result<(), CircuitError> {
        let mut live = self.inputs.clone();
        let mut seen: HashMap<Label, ()> =
            self.inputs.iter().map(|(l, _)| (*l, ())).collect();
        if seen.len() != self.inputs.len() {
            return Err(CircuitError::Invalid("duplicate input label".into()));
        }
        for item in &self.items {
            step_live(&mut live, &mut seen, item)?;
        }
        if live != self.outputs {
            return Err(CircuitError::Invalid(format!(
                "final live wires {:?} do not match declared outputs {:?}",
                live.iter().map(|(l, _)| l.to_string()).collect::<Vec<_>>(),
                self.outputs
                    .iter()
                    .map(|(l, _)| l.to_string())
                    .collect::<Vec<_>>(),
            )));
        }
        Ok(())
    }

    /// Structural equality up to a label bijection that respects interface
    /// order. Conjugation nodes compare their scoped circuits recursively.
    pub fn structurally_equal(&self, other: &Circuit) -> bool {
        let mut matcher = Matcher::default();
        self.structurally_equal_inner(other, &mut matcher)
    }

    fn structurally_equal_inner(&self, other: &Circuit, m: &mut Matcher) -> bool {
        if self.inputs.len() != other.inputs.len()
            || self.outputs.len() != other.outputs.len()
            || self.items.len() != other.items.len()
        {
            return false;
        }
        for ((la, wa), (lb, wb)) in self.inputs.iter().zip(other.inputs.iter()) {
            if wa != wb || !m.bind(*la, *lb) {
                return false;
            }
        }
        for (a, b) in self.items.iter().zip(other.items.iter()) {
            let ok = match (a, b) {
                (Item::Gate(x), Item::Gate(y)) => {
                    *x.def == *y.def
                        && x.daggered == y.daggered
                        && x.controls.len() == y.controls.len()
                        && x.controls.iter().zip(y.controls.iter()).all(
                            |((ga, la), (gb, lb))| ga == gb && m.expects(*la, *lb),
                        )
                        && x.ins.len() == y.ins.len()
                        && x.ins
                            .iter()
                            .zip(y.ins.iter())
                            .all(|(la, lb)| m.expects(*la, *lb))
                        && x.outs.len() == y.outs.len()
                        && x.outs
                            .iter()
                            .zip(y.outs.iter())
                            .all(|(la, lb)| m.bind(*la, *lb))
                }
                (Item::Perm(x), Item::Perm(y)) => {
                    x.inputs.len() == y.inputs.len()
                        && x.inputs
                            .iter()
                            .zip(y.inputs.iter())
                            .all(|(la, lb)| m.expects(*la, *lb))
                        && x.outputs.len() == y.outputs.len()
                        && x.outputs
                            .iter()
                            .zip(y.outputs.iter())
                            .all(|(la, lb)| m.expects(*la, *lb))
                }
                (
                    Item::Conj { setup: sa, body: ba },
                    Item::Conj { setup: sb, body: bb },
                ) => {
                    // The setup interfaces name outer live wires: seed the
                    // scoped matcher from the outer bijection.
                    let mut scoped = Matcher::default();
                    let mut seeded = true;
                    for ((la, _), (lb, _)) in sa.inputs.iter().zip(sb.inputs.iter()) {
                        if !m.expects(*la, *lb) || !scoped.bind(*la, *lb) {
                            seeded = false;
                            break;
                        }
                    }
                    seeded
                        && sa.inputs.len() == sb.inputs.len()
                        && sa.structurally_equal_inner(sb, &mut scoped)
                        && ba.structurally_equal(bb)
                }
                _ => false,
            };
            if !ok {
                return false;
            }
        }
        for ((la, wa), (lb, wb)) in self.outputs.iter().zip(other.outputs.iter()) {
            if wa != wb || !m.expects(*la, *lb) {
                return false;
            }
        }
        true
    }

    /// Applies a label substitution to every occurrence, including inside
    /// conjugation nodes. Labels outside the map are unchanged.
    pub(crate) fn substituted(&self, theta: &HashMap<Label, Label>) -> Circuit {
        let map = |l: &Label| *theta.get(l).unwrap_or(l);
        Circuit {
            inputs: self
                .inputs
                .iter()
                .map(|(l, w)| (map(l), w.clone()))
                .collect(),
            items: self
                .items
                .iter()
                .map(|item| match item {
                    Item::Gate(g) => Item::Gate(GateInstance {
                        def: g.def.clone(),
                        daggered: g.daggered,
                        controls: g.controls.iter().map(|(k, l)| (*k, map(l))).collect(),
                        ins: g.ins.iter().map(map).collect(),
                        outs: g.outs.iter().map(map).collect(),
                    }),
                    Item::Perm(p) => Item::Perm(Permutation {
                        inputs: p.inputs.iter().map(map).collect(),
                        outputs: p.outputs.iter().map(map).collect(),
                    }),
                    Item::Conj { setup, body } => Item::Conj {
                        setup: Box::new(setup.substituted(theta)),
                        body: Box::new(body.substituted(theta)),
                    },
                })
                .collect(),
            outputs: self
                .outputs
                .iter()
                .map(|(l, w)| (map(l), w.clone()))
                .collect(),
        }
    }
}

pub(crate) fn item_modality(item: &Item) -> Modality {
    match item {
        Item::Gate(g) => g.def.modality,
        Item::Perm(_) => Modality::Controllable,
        Item::Conj { setup, body } => {
            if setup.modality() >= Modality::Reversible
                && body.modality() == Modality::Controllable
            {
                Modality::Controllable
            } else {
                // Unreachable for circuits built through this module: the
                // constructors reject ill-formed conjugations.
                Modality::General
            }
        }
    }
}

/// Advances a live wire list over one item, verifying wire flow. Gate
/// outputs replace consumed inputs positionally; surplus outputs are
/// appended and surplus inputs removed.
pub(crate) fn step_live(
    live: &mut Vec<(Label, WireType)>,
    seen: &mut HashMap<Label, ()>,
    item: &Item,
) -> Result<(), CircuitError> {
    let position = |live: &Vec<(Label, WireType)>, l: &Label| {
        live.iter().position(|(x, _)| x == l)
    };
    match item {
        Item::Gate(g) => {
            if g.ins.len() != g.def.inputs.len() || g.outs.len() != g.def.outputs.len() {
                return Err(CircuitError::Invalid(format!(
                    "gate {} arity mismatch",
                    g.def.name
                )));
            }
            if g.is_controlled() && g.def.modality != Modality::Controllable {
                return Err(CircuitError::Invalid(format!(
                    "gate {} carries controls but is not controllable",
                    g.def.name
                )));
            }
            if g.daggered && g.def.modality < Modality::Reversible {
                return Err(CircuitError::Invalid(format!(
                    "gate {} is daggered but not reversible",
                    g.def.name
                )));
            }
            let mut positions = Vec::with_capacity(g.ins.len());
            for (l, want) in g.ins.iter().zip(g.def.inputs.iter()) {
                let p = position(live, l).ok_or_else(|| {
                    CircuitError::Invalid(format!("gate {} consumes dead label {l}", g.def.name))
                })?;
                if positions.contains(&p) {
                    return Err(CircuitError::Invalid(format!(
                        "gate {} consumes label {l} twice",
                        g.def.name
                    )));
                }
                if &live[p].1 != want {
                    return Err(CircuitError::Invalid(format!(
                        "gate {} applied to {} wire, expected {}",
                        g.def.name, live[p].1, want
                    )));
                }
                positions.push(p);
            }
            for (_, l) in &g.controls {
                let p = position(live, l).ok_or_else(|| {
                    CircuitError::Invalid(format!("control on dead label {l}"))
                })?;
                if positions.contains(&p) {
                    return Err(CircuitError::Invalid(format!(
                        "label {l} is both control and target of {}",
                        g.def.name
                    )));
                }
                if !live[p].1.is_qubit() {
                    return Err(CircuitError::Invalid(format!(
                        "control on non-qubit wire {}",
                        live[p].1
                    )));
                }
            }
            for l in &g.outs {
                if seen.insert(*l, ()).is_some() {
                    return Err(CircuitError::Invalid(format!("label {l} bound twice")));
                }
            }
            let shared = g.ins.len().min(g.outs.len());
            for i in 0..shared {
                live[positions[i]] = (g.outs[i], g.def.outputs[i].clone());
            }
            if g.ins.len() > g.outs.len() {
                let mut extra: Vec<usize> = positions[shared..].to_vec();
                extra.sort_unstable_by(|a, b| b.cmp(a));
                for p in extra {
                    live.remove(p);
                }
            } else {
                for i in shared..g.outs.len() {
                    live.push((g.outs[i], g.def.outputs[i].clone()));
                }
            }
            Ok(())
        }
        Item::Perm(p) => {
            let incoming: Vec<Label> = live.iter().map(|(l, _)| *l).collect();
            if p.inputs != incoming {
                return Err(CircuitError::Invalid(
                    "permutation inputs do not match the live wire order".into(),
                ));
            }
            let mut reordered = Vec::with_capacity(live.len());
            for l in &p.outputs {
                let pos = position(live, l).ok_or_else(|| {
                    CircuitError::Invalid(format!("permutation output {l} is not live"))
                })?;
                reordered.push(live[pos].clone());
            }
            if reordered.len() != live.len() {
                return Err(CircuitError::Invalid(
                    "permutation is not a bijection on the live wires".into(),
                ));
            }
            *live = reordered;
            Ok(())
        }
        Item::Conj { setup, body } => {
            for (l, w) in &setup.inputs {
                match position(live, l) {
                    Some(p) if &live[p].1 == w => {}
                    Some(p) => {
                        return Err(CircuitError::Invalid(format!(
                            "conjugation wire {l} has type {}, expected {w}",
                            live[p].1
                        )))
                    }
                    None => {
                        return Err(CircuitError::Invalid(format!(
                            "conjugation spans dead label {l}"
                        )))
                    }
                }
            }
            if setup.out_types() != body.in_types() || body.in_types() != body.out_types() {
                return Err(CircuitError::Invalid(
                    "conjugation setup/body interfaces do not line up".into(),
                ));
            }
            setup.validate()?;
            body.validate()?;
            Ok(())
        }
    }
}

/// Appends a renamed copy of `sub`'s items to `items`, identifying `sub`'s
/// input labels with `attach` and renaming everything else fresh. Returns
/// the labels standing for `sub`'s outputs.
pub(crate) fn graft(
    items: &mut Vec<Item>,
    sub: &Circuit,
    attach: &[Label],
    supply: &mut FreshSupply,
) -> Vec<Label> {
    debug_assert_eq!(attach.len(), sub.inputs.len());
    let mut map: HashMap<Label, Label> = sub
        .inputs
        .iter()
        .zip(attach.iter())
        .map(|((l, _), a)| (*l, *a))
        .collect();
    let renamed = rename_circuit(sub, &mut map, supply);
    items.extend(renamed.items);
    renamed.outputs.into_iter().map(|(l, _)| l).collect()
}

fn rename_label(map: &mut HashMap<Label, Label>, supply: &mut FreshSupply, l: Label) -> Label {
    *map.entry(l).or_insert_with(|| supply.fresh())
}

fn rename_circuit(
    c: &Circuit,
    map: &mut HashMap<Label, Label>,
    supply: &mut FreshSupply,
) -> Circuit {
    let inputs = c
        .inputs
        .iter()
        .map(|(l, w)| (rename_label(map, supply, *l), w.clone()))
        .collect();
    let items = c
        .items
        .iter()
        .map(|item| match item {
            Item::Gate(g) => Item::Gate(GateInstance {
                def: g.def.clone(),
                daggered: g.daggered,
                controls: g
                    .controls
                    .iter()
                    .map(|(k, l)| (*k, rename_label(map, supply, *l)))
                    .collect(),
                ins: g
                    .ins
                    .iter()
                    .map(|l| rename_label(map, supply, *l))
                    .collect(),
                outs: g
                    .outs
                    .iter()
                    .map(|l| rename_label(map, supply, *l))
                    .collect(),
            }),
            Item::Perm(p) => Item::Perm(Permutation {
                inputs: p
                    .inputs
                    .iter()
                    .map(|l| rename_label(map, supply, *l))
                    .collect(),
                outputs: p
                    .outputs
                    .iter()
                    .map(|l| rename_label(map, supply, *l))
                    .collect(),
            }),
            Item::Conj { setup, body } => {
                // Setup interfaces name outer wires; its internals stay
                // scoped to the node, so rename through a scoped copy.
                let mut scoped = map.clone();
                let setup = rename_circuit(setup, &mut scoped, supply);
                let mut body_scope = HashMap::new();
                let body = rename_circuit(body, &mut body_scope, supply);
                Item::Conj {
                    setup: Box::new(setup),
                    body: Box::new(body),
                }
            }
        })
        .collect();
    let outputs = c
        .outputs
        .iter()
        .map(|(l, w)| (rename_label(map, supply, *l), w.clone()))
        .collect();
    Circuit {
        inputs,
        items,
        outputs,
    }
}

#[derive(Default)]
struct Matcher {
    fwd: HashMap<Label, Label>,
    rev: HashMap<Label, Label>,
}

impl Matcher {
    fn bind(&mut self, a: Label, b: Label) -> bool {
        match (self.fwd.get(&a), self.rev.get(&b)) {
            (None, None) => {
                self.fwd.insert(a, b);
                self.rev.insert(b, a);
                true
            }
            (Some(x), Some(y)) => *x == b && *y == a,
            _ => false,
        }
    }

    fn expects(&self, a: Label, b: Label) -> bool {
        self.fwd.get(&a) == Some(&b)
    }
}

/// Convenience builder for assembling circuits gate by gate on a fixed set
/// of live wires. Used by tests, the gate-library elaborator and the random
/// circuit generator.
pub struct CircuitBuilder<'a> {
    gateset: &'a GateSet,
    supply: &'a mut FreshSupply,
    inputs: Vec<(Label, WireType)>,
    live: Vec<(Label, WireType)>,
    items: Vec<Item>,
}

impl<'a> CircuitBuilder<'a> {
    pub fn new(gateset: &'a GateSet, ty: &SimpleType, supply: &'a mut FreshSupply) -> Self {
        let inputs: Vec<(Label, WireType)> = ty
            .flatten()
            .into_iter()
            .map(|w| (supply.fresh(), w))
            .collect();
        CircuitBuilder {
            gateset,
            supply,
            live: inputs.clone(),
            inputs,
            items: Vec::new(),
        }
    }

    pub fn width(&self) -> usize {
        self.live.len()
    }

    pub fn wire_type(&self, position: usize) -> &WireType {
        &self.live[position].1
    }

    /// Applies a named gate to the live wires at the given positions.
    pub fn gate(&mut self, name: &str, positions: &[usize]) -> &mut Self {
        self.gate_full(name, positions, false, &[])
    }

    pub fn gate_dag(&mut self, name: &str, positions: &[usize]) -> &mut Self {
        self.gate_full(name, positions, true, &[])
    }

    pub fn gate_full(
        &mut self,
        name: &str,
        positions: &[usize],
        daggered: bool,
        controls: &[(ControlGadget, usize)],
    ) -> &mut Self {
        let def = self
            .gateset
            .lookup(name)
            .unwrap_or_else(|| panic!("unknown gate {name}"))
            .clone();
        assert_eq!(positions.len(), def.inputs.len(), "gate {name} arity");
        let ins: Vec<Label> = positions.iter().map(|&p| self.live[p].0).collect();
        let outs: Vec<Label> = def.outputs.iter().map(|_| self.supply.fresh()).collect();
        let controls: Vec<(ControlGadget, Label)> = controls
            .iter()
            .map(|(k, p)| (*k, self.live[*p].0))
            .collect();
        let shared = ins.len().min(outs.len());
        for i in 0..shared {
            let p = positions[i];
            self.live[p] = (outs[i], def.outputs[i].clone());
        }
        if ins.len() > outs.len() {
            let mut extra: Vec<usize> = positions[shared..].to_vec();
            extra.sort_unstable_by(|a, b| b.cmp(a));
            for p in extra {
                self.live.remove(p);
            }
        } else {
            for i in shared..outs.len() {
                self.live.push((outs[i], def.outputs[i].clone()));
            }
        }
        self.items.push(Item::Gate(GateInstance {
            def,
            daggered,
            controls,
            ins,
            outs,
        }));
        self
    }

    /// Reorders the live wires: after this call the wire currently at
    /// position `order[j]` sits at position `j`. Identity orders are elided.
    pub fn reorder(&mut self, order: &[usize]) -> &mut Self {
        assert_eq!(order.len(), self.live.len());
        let inputs: Vec<Label> = self.live.iter().map(|(l, _)| *l).collect();
        let reordered: Vec<(Label, WireType)> =
            order.iter().map(|&p| self.live[p].clone()).collect();
        let outputs: Vec<Label> = reordered.iter().map(|(l, _)| *l).collect();
        if inputs != outputs {
            self.items.push(Item::Perm(Permutation { inputs, outputs }));
            self.live = reordered;
        }
        self
    }

    /// Wraps `setup ; body ; setup†` as a conjugation node over the wires at
    /// `positions` (in setup-input order).
    pub fn conjugation(
        &mut self,
        positions: &[usize],
        setup: Circuit,
        body: Circuit,
    ) -> Result<&mut Self, CircuitError> {
        if setup.modality() < Modality::Reversible {
            return Err(CircuitError::WcNotReversible);
        }
        if body.modality() < Modality::Controllable {
            return Err(CircuitError::WcNotControllable(body.modality()));
        }
        if setup.out_types() != body.in_types() || body.in_types() != body.out_types() {
            return Err(interface_mismatch(&setup.out_types(), &body.in_types()));
        }
        let attach: Vec<(Label, WireType)> =
            positions.iter().map(|&p| self.live[p].clone()).collect();
        let expected: Vec<WireType> = attach.iter().map(|(_, w)| w.clone()).collect();
        if expected != setup.in_types() {
            return Err(interface_mismatch(&setup.in_types(), &expected));
        }
        // Rename the setup so its input interface names the attached wires.
        let mut map: HashMap<Label, Label> = setup
            .inputs
            .iter()
            .zip(attach.iter())
            .map(|((l, _), (a, _))| (*l, *a))
            .collect();
        let setup = rename_circuit(&setup, &mut map, self.supply);
        self.items.push(Item::Conj {
            setup: Box::new(setup),
            body: Box::new(body),
        });
        Ok(self)
    }

    pub fn finish(&mut self) -> Circuit {
        Circuit {
            inputs: self.inputs.clone(),
            items: std::mem::take(&mut self.items),
            outputs: self.live.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::default_gateset;

    fn qubits(n: usize) -> SimpleType {
        SimpleType::wires(&WireType::qubit(), n)
    }

    #[test]
    fn identity_has_no_items() {
        let mut supply = FreshSupply::new();
        let unit = Circuit::identity(&SimpleType::Unit, &mut supply);
        assert_eq!(unit.inputs.len(), 0);
        assert!(unit.items.is_empty());
        let one = Circuit::identity(&SimpleType::qubit(), &mut supply);
        assert_eq!(one.inputs.len(), 1);
        assert!(one.is_identity());
        one.validate().unwrap();
    }

    #[test]
    fn compose_checks_interfaces() {
        let gs = default_gateset();
        let mut supply = FreshSupply::new();
        let h = Circuit::from_gate(gs.lookup("H").unwrap(), false, &mut supply);
        let meas = Circuit::from_gate(gs.lookup("Meas").unwrap(), false, &mut supply);
        let hm = h.compose(&meas, &mut supply).unwrap();
        hm.validate().unwrap();
        assert_eq!(hm.modality(), Modality::General);
        let err = meas.compose(&h, &mut supply).unwrap_err();
        assert!(matches!(err, CircuitError::InterfaceMismatch { .. }));
    }

    #[test]
    fn compose_with_identity_is_structural_identity() {
        let gs = default_gateset();
        let mut supply = FreshSupply::new();
        let h = Circuit::from_gate(gs.lookup("H").unwrap(), false, &mut supply);
        let id = Circuit::identity(&SimpleType::qubit(), &mut supply);
        let left = id.compose(&h, &mut supply).unwrap();
        assert!(left.structurally_equal(&h));
        let right = h.compose(&id, &mut supply).unwrap();
        assert!(right.structurally_equal(&h));
    }

    #[test]
    fn tensor_with_unit_identity_is_noop() {
        let gs = default_gateset();
        let mut supply = FreshSupply::new();
        let x = Circuit::from_gate(gs.lookup("X").unwrap(), false, &mut supply);
        let unit = Circuit::identity(&SimpleType::Unit, &mut supply);
        let t = x.tensor(&unit, &mut supply);
        assert!(t.structurally_equal(&x));
    }

    #[test]
    fn modality_is_meet() {
        let gs = default_gateset();
        let mut supply = FreshSupply::new();
        let meas = Circuit::from_gate(gs.lookup("Meas").unwrap(), false, &mut supply);
        let h = Circuit::from_gate(gs.lookup("H").unwrap(), false, &mut supply);
        let both = meas.tensor(&h, &mut supply);
        assert_eq!(both.modality(), Modality::General);
        let init = Circuit::from_gate(gs.lookup("Init0").unwrap(), false, &mut supply);
        assert_eq!(
            init.tensor(&h, &mut supply).modality(),
            Modality::Reversible
        );
    }

    #[test]
    fn builder_tracks_wire_flow() {
        let gs = default_gateset();
        let mut supply = FreshSupply::new();
        let mut b = CircuitBuilder::new(&gs, &qubits(2), &mut supply);
        b.gate("H", &[0]).gate("CNOT", &[0, 1]).reorder(&[1, 0]);
        let c = b.finish();
        c.validate().unwrap();
        assert_eq!(c.items.len(), 3);
        assert_eq!(c.modality(), Modality::Controllable);
    }

    #[test]
    fn structural_equality_ignores_label_identity() {
        let gs = default_gateset();
        let mut supply = FreshSupply::new();
        let a = {
            let mut b = CircuitBuilder::new(&gs, &qubits(2), &mut supply);
            b.gate("CNOT", &[0, 1]).finish()
        };
        let b = {
            let mut b = CircuitBuilder::new(&gs, &qubits(2), &mut supply);
            b.gate("CNOT", &[0, 1]).finish()
        };
        assert_ne!(a, b);
        assert!(a.structurally_equal(&b));
        let c = {
            let mut b = CircuitBuilder::new(&gs, &qubits(2), &mut supply);
            b.gate("CNOT", &[1, 0]).finish()
        };
        assert!(!a.structurally_equal(&c));
    }

    #[test]
    fn validate_rejects_dead_labels() {
        let gs = default_gateset();
        let mut supply = FreshSupply::new();
        let mut c = Circuit::from_gate(gs.lookup("H").unwrap(), false, &mut supply);
        // Point the gate at a label that is not live.
        if let Item::Gate(g) = &mut c.items[0] {
            g.ins[0] = Label::new(999);
        }
        assert!(c.validate().is_err());
    }

    #[test]
    fn term_then_init_changes_width() {
        let gs = default_gateset();
        let mut supply = FreshSupply::new();
        let mut b = CircuitBuilder::new(&gs, &qubits(1), &mut supply);
        b.gate("Term0", &[0]);
        assert_eq!(b.width(), 0);
        b.gate("Init1", &[]);
        assert_eq!(b.width(), 1);
        let c = b.finish();
        c.validate().unwrap();
        assert_eq!(c.modality(), Modality::Reversible);
    }
}
