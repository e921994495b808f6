//! Circuit transformations: adjoints, controlled versions, compute/uncompute
//! conjugation, and flattening of conjugation nodes.

use std::collections::HashMap;

use crate::circuit::{
    graft, interface_mismatch, Circuit, CircuitError, ControlSpec, GateInstance, Item, Permutation,
};
use crate::modality::Modality;
use crate::signature::{AdjointKind, GateSet};
use crate::wire::{FreshSupply, Label, WireType};

/// The adjoint circuit: interfaces swapped, items reversed, each gate
/// replaced by its declared adjoint. Conjugation nodes dagger their body
/// only, since `(setup ; body ; setup†)† = setup ; body† ; setup†`.
pub fn dagger(c: &Circuit, gateset: &GateSet) -> Result<Circuit, CircuitError> {
    if c.modality() < Modality::Reversible {
        return Err(CircuitError::NotReversible);
    }
    let items = c
        .items
        .iter()
        .rev()
        .map(|item| dagger_item(item, gateset))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Circuit {
        inputs: c.outputs.clone(),
        items,
        outputs: c.inputs.clone(),
    })
}

fn dagger_item(item: &Item, gateset: &GateSet) -> Result<Item, CircuitError> {
    match item {
        Item::Gate(g) => {
            let (def, daggered) = match &g.def.adjoint {
                AdjointKind::SelfAdjoint => (g.def.clone(), g.daggered),
                AdjointKind::DaggerFlag => (g.def.clone(), !g.daggered),
                AdjointKind::Partner(name) => {
                    let partner = gateset.lookup(name).ok_or_else(|| {
                        CircuitError::Invalid(format!(
                            "adjoint partner {name} of {} is not in the signature",
                            g.def.name
                        ))
                    })?;
                    (partner.clone(), g.daggered)
                }
                AdjointKind::None => return Err(CircuitError::NotReversible),
            };
            Ok(Item::Gate(GateInstance {
                def,
                daggered,
                controls: g.controls.clone(),
                ins: g.outs.clone(),
                outs: g.ins.clone(),
            }))
        }
        Item::Perm(p) => Ok(Item::Perm(p.inverted())),
        Item::Conj { setup, body } => Ok(Item::Conj {
            setup: setup.clone(),
            body: Box::new(dagger(body, gateset)?),
        }),
    }
}

/// The controlled circuit: prepends one fresh qubit wire per control gadget
/// and attaches the gadgets to every gate outside conjugation setups. Wire
/// crossings are replaced by controlled swap gates (one per adjacent
/// transposition, bubble-sort order) because an uncontrolled crossing would
/// permute the wires regardless of the control state. Conjugation nodes keep
/// their setup untouched and control only the body.
pub fn control(
    c: &Circuit,
    spec: &ControlSpec,
    gateset: &GateSet,
    supply: &mut FreshSupply,
) -> Result<Circuit, CircuitError> {
    let modality = c.modality();
    if modality < Modality::Controllable {
        return Err(CircuitError::NotControllable(modality));
    }
    if c.in_types() != c.out_types() {
        return Err(CircuitError::NotSquare);
    }
    if spec.is_empty() {
        return Ok(c.clone());
    }

    let control_wires: Vec<(Label, WireType)> = spec
        .gadgets
        .iter()
        .map(|_| (supply.fresh(), WireType::qubit()))
        .collect();
    let attached: Vec<(crate::circuit::ControlGadget, Label)> = spec
        .gadgets
        .iter()
        .zip(control_wires.iter())
        .map(|(g, (l, _))| (*g, *l))
        .collect();

    // theta maps original labels to their replacements after crossings have
    // been rebuilt from controlled swaps.
    let mut theta: HashMap<Label, Label> = HashMap::new();
    let mut live: Vec<(Label, WireType)> = c.inputs.clone();
    let mut items: Vec<Item> = Vec::new();
    let map = |theta: &HashMap<Label, Label>, l: &Label| *theta.get(l).unwrap_or(l);

    for item in &c.items {
        match item {
            Item::Gate(g) => {
                let ins: Vec<Label> = g.ins.iter().map(|l| map(&theta, l)).collect();
                let mut controls = attached.clone();
                controls.extend(g.controls.iter().map(|(k, l)| (*k, map(&theta, l))));
                // Update positional tracking: equal arity, controllable
                // gates are square.
                for (l, out) in ins.iter().zip(g.outs.iter()) {
                    if let Some(p) = live.iter().position(|(x, _)| x == l) {
                        live[p].0 = *out;
                    }
                }
                items.push(Item::Gate(GateInstance {
                    def: g.def.clone(),
                    daggered: g.daggered,
                    controls,
                    ins,
                    outs: g.outs.clone(),
                }));
            }
            Item::Perm(p) => {
                let inputs: Vec<Label> = p.inputs.iter().map(|l| map(&theta, l)).collect();
                let outputs: Vec<Label> = p.outputs.iter().map(|l| map(&theta, l)).collect();
                emit_controlled_crossing(
                    &inputs, &outputs, &attached, &mut live, &mut items, &mut theta, gateset,
                    supply,
                )?;
                // Downstream references use the original label names.
                for (orig, now) in p.outputs.iter().zip(live.iter()) {
                    if *orig != now.0 {
                        theta.insert(*orig, now.0);
                    }
                }
            }
            Item::Conj { setup, body } => {
                let setup = setup.substituted(&theta);
                let mut inputs = control_wires.clone();
                inputs.extend(setup.inputs.iter().cloned());
                let mut outputs = control_wires.clone();
                outputs.extend(setup.outputs.iter().cloned());
                let widened = Circuit {
                    inputs,
                    items: setup.items.clone(),
                    outputs,
                };
                let controlled_body = control(body, spec, gateset, supply)?;
                items.push(Item::Conj {
                    setup: Box::new(widened),
                    body: Box::new(controlled_body),
                });
            }
        }
    }

    let mut inputs = control_wires.clone();
    inputs.extend(c.inputs.iter().cloned());
    let mut outputs = control_wires;
    outputs.extend(
        c.outputs
            .iter()
            .map(|(l, w)| (map(&theta, l), w.clone())),
    );
    Ok(Circuit {
        inputs,
        items,
        outputs,
    })
}

/// Replaces one wire crossing with controlled swaps. `live` tracks the
/// current (label, type) list positionally; the crossing's effect on the
/// wire *states* is reproduced by swap gates while positions stay fixed.
#[allow(clippy::too_many_arguments)]
fn emit_controlled_crossing(
    inputs: &[Label],
    outputs: &[Label],
    attached: &[(crate::circuit::ControlGadget, Label)],
    live: &mut Vec<(Label, WireType)>,
    items: &mut Vec<Item>,
    _theta: &mut HashMap<Label, Label>,
    gateset: &GateSet,
    supply: &mut FreshSupply,
) -> Result<(), CircuitError> {
    let n = inputs.len();
    // target[j] = final position of the wire entering at position j.
    let mut target = vec![0usize; n];
    for (j, l) in inputs.iter().enumerate() {
        let t = outputs
            .iter()
            .position(|x| x == l)
            .ok_or_else(|| CircuitError::Invalid(format!("crossing output misses label {l}")))?;
        target[j] = t;
    }
    // value[p] = index of the original wire whose state sits at position p.
    let mut value: Vec<usize> = (0..n).collect();
    let swap = gateset.swap().clone();
    loop {
        let mut swapped = false;
        for p in 0..n.saturating_sub(1) {
            if target[value[p]] > target[value[p + 1]] {
                for q in [p, p + 1] {
                    if !live[q].1.is_qubit() {
                        return Err(CircuitError::NonQubitPermControl(live[q].1.clone()));
                    }
                }
                let a = live[p].0;
                let b = live[p + 1].0;
                let (na, nb) = (supply.fresh(), supply.fresh());
                items.push(Item::Gate(GateInstance {
                    def: swap.clone(),
                    daggered: false,
                    controls: attached.to_vec(),
                    ins: vec![a, b],
                    outs: vec![na, nb],
                }));
                live[p].0 = na;
                live[p + 1].0 = nb;
                value.swap(p, p + 1);
                swapped = true;
            }
        }
        if !swapped {
            break;
        }
    }
    debug_assert!((0..n).all(|p| target[value[p]] == p));
    Ok(())
}

/// Number of controlled swaps `control` emits for a crossing with position
/// map `d` (`d[j]` = source position of outgoing position `j`): the
/// inversion count of `d`.
pub fn crossing_swap_count(d: &[usize]) -> usize {
    let mut count = 0;
    for i in 0..d.len() {
        for j in i + 1..d.len() {
            if d[i] > d[j] {
                count += 1;
            }
        }
    }
    count
}

/// `setup ; body ; setup†` as a single conjugation node, normalized so that
/// an identity setup disappears and nested conjugations fuse their setups:
/// `g1 |> (g2 |> h)` and `(g1 ; g2) |> h` build the same node.
pub fn with_computed(
    setup: &Circuit,
    body: &Circuit,
    supply: &mut FreshSupply,
) -> Result<Circuit, CircuitError> {
    if setup.modality() < Modality::Reversible {
        return Err(CircuitError::WcNotReversible);
    }
    if body.modality() < Modality::Controllable {
        return Err(CircuitError::WcNotControllable(body.modality()));
    }
    if setup.out_types() != body.in_types() {
        return Err(interface_mismatch(&setup.out_types(), &body.in_types()));
    }
    if body.in_types() != body.out_types() {
        return Err(interface_mismatch(&body.in_types(), &body.out_types()));
    }
    if setup.is_identity() {
        return Ok(body.clone());
    }
    if let [Item::Conj {
        setup: inner_setup,
        body: inner_body,
    }] = body.items.as_slice()
    {
        if body.in_labels() == inner_setup.in_labels() && body.in_labels() == body.out_labels() {
            let fused = setup.compose(inner_setup, supply)?;
            return Ok(Circuit {
                inputs: setup.inputs.clone(),
                items: vec![Item::Conj {
                    setup: Box::new(fused),
                    body: inner_body.clone(),
                }],
                outputs: setup.inputs.clone(),
            });
        }
    }
    Ok(Circuit {
        inputs: setup.inputs.clone(),
        items: vec![Item::Conj {
            setup: Box::new(setup.clone()),
            body: Box::new(body.clone()),
        }],
        outputs: setup.inputs.clone(),
    })
}

/// Flattens every conjugation node into the plain sequence
/// `setup ; body ; setup†`. The result contains no conjugation nodes, so it
/// is reversible but should no longer be treated as controllable: controlling
/// it would control the former setup gates too.
pub fn flatten_conjugations(
    c: &Circuit,
    gateset: &GateSet,
    supply: &mut FreshSupply,
) -> Result<Circuit, CircuitError> {
    if c.modality() < Modality::Reversible {
        return Err(CircuitError::NotReversible);
    }
    let mut theta: HashMap<Label, Label> = HashMap::new();
    let mut items: Vec<Item> = Vec::new();
    let map = |theta: &HashMap<Label, Label>, l: &Label| *theta.get(l).unwrap_or(l);
    for item in &c.items {
        match item {
            Item::Gate(g) => items.push(Item::Gate(GateInstance {
                def: g.def.clone(),
                daggered: g.daggered,
                controls: g.controls.iter().map(|(k, l)| (*k, map(&theta, l))).collect(),
                ins: g.ins.iter().map(|l| map(&theta, l)).collect(),
                outs: g.outs.clone(),
            })),
            Item::Perm(p) => items.push(Item::Perm(Permutation {
                inputs: p.inputs.iter().map(|l| map(&theta, l)).collect(),
                outputs: p.outputs.iter().map(|l| map(&theta, l)).collect(),
            })),
            Item::Conj { setup, body } => {
                let attach: Vec<Label> =
                    setup.inputs.iter().map(|(l, _)| map(&theta, l)).collect();
                let mids = graft(&mut items, setup, &attach, supply);
                let flat_body = flatten_conjugations(body, gateset, supply)?;
                let mids = graft(&mut items, &flat_body, &mids, supply);
                let setup_dag = dagger(setup, gateset)?;
                let finals = graft(&mut items, &setup_dag, &mids, supply);
                for ((orig, _), new) in setup.inputs.iter().zip(finals.iter()) {
                    theta.insert(*orig, *new);
                }
            }
        }
    }
    Ok(Circuit {
        inputs: c.inputs.clone(),
        items,
        outputs: c
            .outputs
            .iter()
            .map(|(l, w)| (map(&theta, l), w.clone()))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{CircuitBuilder, ControlGadget};
    use crate::signature::default_gateset;
    use crate::wire::SimpleType;

    fn qubits(n: usize) -> SimpleType {
        SimpleType::wires(&WireType::qubit(), n)
    }

    #[test]
    fn dagger_is_involutive() {
        let gs = default_gateset();
        let mut supply = FreshSupply::new();
        let mut b = CircuitBuilder::new(&gs, &qubits(2), &mut supply);
        b.gate("H", &[0]).gate("T", &[1]).gate("CNOT", &[0, 1]).reorder(&[1, 0]);
        let c = b.finish();
        let dd = dagger(&dagger(&c, &gs).unwrap(), &gs).unwrap();
        assert_eq!(dd, c);
    }

    #[test]
    fn dagger_swaps_adjoint_partners() {
        let gs = default_gateset();
        let mut supply = FreshSupply::new();
        let init = Circuit::from_gate(gs.lookup("Init0").unwrap(), false, &mut supply);
        let term = dagger(&init, &gs).unwrap();
        term.validate().unwrap();
        match &term.items[0] {
            Item::Gate(g) => assert_eq!(g.def.name, "Term0"),
            other => panic!("expected gate, got {other:?}"),
        }
        assert!(term.inputs.len() == 1 && term.outputs.is_empty());
    }

    #[test]
    fn dagger_rejects_irreversible() {
        let gs = default_gateset();
        let mut supply = FreshSupply::new();
        let meas = Circuit::from_gate(gs.lookup("Meas").unwrap(), false, &mut supply);
        assert_eq!(dagger(&meas, &gs).unwrap_err(), CircuitError::NotReversible);
    }

    #[test]
    fn dagger_distributes_into_conjugation_bodies() {
        let gs = default_gateset();
        let mut supply = FreshSupply::new();
        let init = Circuit::from_gate(gs.lookup("Init0").unwrap(), false, &mut supply);
        let t = Circuit::from_gate(gs.lookup("T").unwrap(), false, &mut supply);
        let wc = with_computed(&init, &t, &mut supply).unwrap();
        let d = dagger(&wc, &gs).unwrap();
        match &d.items[0] {
            Item::Conj { setup, body } => {
                assert!(setup.structurally_equal(&init));
                match &body.items[0] {
                    Item::Gate(g) => assert!(g.daggered, "body T gate gains the dagger"),
                    other => panic!("unexpected body item {other:?}"),
                }
            }
            other => panic!("expected conjugation node, got {other:?}"),
        }
    }

    #[test]
    fn control_of_identity_has_no_gates() {
        let gs = default_gateset();
        let mut supply = FreshSupply::new();
        let id = Circuit::identity(&qubits(2), &mut supply);
        let c = control(&id, &ControlSpec::black(), &gs, &mut supply).unwrap();
        c.validate().unwrap();
        assert_eq!(c.inputs.len(), 3);
        assert!(c.items.is_empty());
    }

    #[test]
    fn control_with_empty_spec_is_unchanged() {
        let gs = default_gateset();
        let mut supply = FreshSupply::new();
        let x = Circuit::from_gate(gs.lookup("X").unwrap(), false, &mut supply);
        let c = control(&x, &ControlSpec::empty(), &gs, &mut supply).unwrap();
        assert_eq!(c, x);
    }

    #[test]
    fn control_replaces_crossing_by_controlled_swap() {
        let gs = default_gateset();
        let mut supply = FreshSupply::new();
        let mut b = CircuitBuilder::new(&gs, &qubits(2), &mut supply);
        b.reorder(&[1, 0]);
        let swap_as_perm = b.finish();
        let c = control(&swap_as_perm, &ControlSpec::black(), &gs, &mut supply).unwrap();
        c.validate().unwrap();
        assert_eq!(c.items.len(), 1);
        match &c.items[0] {
            Item::Gate(g) => {
                assert_eq!(g.def.name, "SWAP");
                assert_eq!(g.controls.len(), 1);
                assert_eq!(g.controls[0].0, ControlGadget::Black);
            }
            other => panic!("expected controlled swap, got {other:?}"),
        }
    }

    #[test]
    fn control_rejects_uncontrollable_and_nonsquare() {
        let gs = default_gateset();
        let mut supply = FreshSupply::new();
        let init = Circuit::from_gate(gs.lookup("Init0").unwrap(), false, &mut supply);
        assert!(matches!(
            control(&init, &ControlSpec::black(), &gs, &mut supply),
            Err(CircuitError::NotControllable(Modality::Reversible))
        ));
        let mut b = CircuitBuilder::new(&gs, &qubits(1), &mut supply);
        b.gate("Meas", &[0]);
        let meas = b.finish();
        assert!(matches!(
            control(&meas, &ControlSpec::black(), &gs, &mut supply),
            Err(CircuitError::NotControllable(Modality::General))
        ));
    }

    #[test]
    fn control_skips_conjugation_setups() {
        let gs = default_gateset();
        let mut supply = FreshSupply::new();
        let init = Circuit::from_gate(gs.lookup("Init0").unwrap(), false, &mut supply);
        let t = Circuit::from_gate(gs.lookup("T").unwrap(), false, &mut supply);
        let wc = with_computed(&init, &t, &mut supply).unwrap();
        let ctrl = control(&wc, &ControlSpec::black(), &gs, &mut supply).unwrap();
        ctrl.validate().unwrap();
        let mut protected_with_controls = 0;
        let mut body_controls = 0;
        ctrl.visit_gates(&mut |g, protected| {
            if protected && g.is_controlled() {
                protected_with_controls += 1;
            }
            if !protected && g.is_controlled() {
                body_controls += 1;
            }
        });
        assert_eq!(protected_with_controls, 0);
        assert_eq!(body_controls, 1);
    }

    #[test]
    fn with_computed_identity_law() {
        let gs = default_gateset();
        let mut supply = FreshSupply::new();
        let id = Circuit::identity(&qubits(1), &mut supply);
        let t = Circuit::from_gate(gs.lookup("T").unwrap(), false, &mut supply);
        let wc = with_computed(&id, &t, &mut supply).unwrap();
        assert_eq!(wc, t);
    }

    #[test]
    fn with_computed_fuses_nested_setups() {
        let gs = default_gateset();
        let mut supply = FreshSupply::new();
        let h = Circuit::from_gate(gs.lookup("H").unwrap(), false, &mut supply);
        let s = Circuit::from_gate(gs.lookup("S").unwrap(), false, &mut supply);
        let x = Circuit::from_gate(gs.lookup("X").unwrap(), false, &mut supply);
        let nested = with_computed(&h, &with_computed(&s, &x, &mut supply).unwrap(), &mut supply)
            .unwrap();
        let fused = with_computed(&h.compose(&s, &mut supply).unwrap(), &x, &mut supply).unwrap();
        assert!(nested.structurally_equal(&fused));
    }

    #[test]
    fn with_computed_does_not_erase_identity_bodies() {
        // g |> id is kept as a node: flattening it yields g ; g†, which is
        // not required to be the identity.
        let gs = default_gateset();
        let mut supply = FreshSupply::new();
        let init = Circuit::from_gate(gs.lookup("Init0").unwrap(), false, &mut supply);
        let id_q = Circuit::identity(&qubits(1), &mut supply);
        let wc = with_computed(&init, &id_q, &mut supply).unwrap();
        assert_eq!(wc.items.len(), 1);
        assert!(matches!(&wc.items[0], Item::Conj { .. }));
    }

    #[test]
    fn flatten_unwraps_conjugations() {
        let gs = default_gateset();
        let mut supply = FreshSupply::new();
        let init = Circuit::from_gate(gs.lookup("Init0").unwrap(), false, &mut supply);
        let t = Circuit::from_gate(gs.lookup("T").unwrap(), false, &mut supply);
        let wc = with_computed(&init, &t, &mut supply).unwrap();
        let flat = flatten_conjugations(&wc, &gs, &mut supply).unwrap();
        flat.validate().unwrap();
        let names: Vec<String> = {
            let mut v = Vec::new();
            flat.visit_gates(&mut |g, _| v.push(g.def.name.clone()));
            v
        };
        assert_eq!(names, ["Init0", "T", "Term0"]);
        assert_eq!(flat.modality(), Modality::Reversible);
    }

    #[test]
    fn flatten_is_noop_without_conjugations() {
        let gs = default_gateset();
        let mut supply = FreshSupply::new();
        let mut b = CircuitBuilder::new(&gs, &qubits(2), &mut supply);
        b.gate("H", &[1]).gate("CNOT", &[1, 0]);
        let c = b.finish();
        let flat = flatten_conjugations(&c, &gs, &mut supply).unwrap();
        assert_eq!(flat, c);
    }

    #[test]
    fn crossing_swap_count_is_inversions() {
        assert_eq!(crossing_swap_count(&[0, 1, 2]), 0);
        assert_eq!(crossing_swap_count(&[1, 0]), 1);
        assert_eq!(crossing_swap_count(&[2, 1, 0]), 3);
    }
}
