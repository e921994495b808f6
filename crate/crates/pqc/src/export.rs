//! Circuit JSON interchange. Conjugation nodes serialize structurally so
//! protected regions survive round-trips.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, ControlGadget, GateInstance, Item, Permutation};
use crate::signature::GateSet;
use crate::wire::{Label, WireType};

#[derive(Debug, Error, PartialEq)]
pub enum ImportError {
    #[error("could not parse circuit JSON: {0}")]
    Parse(String),
    #[error("circuit references unknown gate {0}")]
    UnknownGate(String),
    #[error("malformed circuit: {0}")]
    Invalid(String),
}

#[derive(Debug, Serialize, Deserialize)]
struct PortJson {
    label: u64,
    wire: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct ControlJson {
    polarity: String,
    label: u64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind")]
enum ItemJson {
    #[serde(rename = "gate")]
    Gate {
        name: String,
        dagger: bool,
        controls: Vec<ControlJson>,
        #[serde(rename = "in")]
        ins: Vec<u64>,
        #[serde(rename = "out")]
        outs: Vec<u64>,
    },
    #[serde(rename = "perm")]
    Perm { map: Vec<[u64; 2]> },
    #[serde(rename = "conj")]
    Conj {
        g: Box<CircuitJson>,
        body: Box<CircuitJson>,
    },
}

#[derive(Debug, Serialize, Deserialize)]
struct CircuitJson {
    inputs: Vec<PortJson>,
    items: Vec<ItemJson>,
    outputs: Vec<PortJson>,
    modality: u8,
}

fn ports(interface: &[(Label, WireType)]) -> Vec<PortJson> {
    interface
        .iter()
        .map(|(l, w)| PortJson {
            label: l.id(),
            wire: w.name().to_string(),
        })
        .collect()
}

fn circuit_json(c: &Circuit) -> CircuitJson {
    CircuitJson {
        inputs: ports(&c.inputs),
        items: c
            .items
            .iter()
            .map(|item| match item {
                Item::Gate(g) => ItemJson::Gate {
                    name: g.def.name.clone(),
                    dagger: g.daggered,
                    controls: g
                        .controls
                        .iter()
                        .map(|(k, l)| ControlJson {
                            polarity: match k {
                                ControlGadget::Black => "black".to_string(),
                                ControlGadget::White => "white".to_string(),
                            },
                            label: l.id(),
                        })
                        .collect(),
                    ins: g.ins.iter().map(|l| l.id()).collect(),
                    outs: g.outs.iter().map(|l| l.id()).collect(),
                },
                Item::Perm(p) => ItemJson::Perm {
                    map: p
                        .inputs
                        .iter()
                        .zip(p.outputs.iter())
                        .map(|(a, b)| [a.id(), b.id()])
                        .collect(),
                },
                Item::Conj { setup, body } => ItemJson::Conj {
                    g: Box::new(circuit_json(setup)),
                    body: Box::new(circuit_json(body)),
                },
            })
            .collect(),
        outputs: ports(&c.outputs),
        modality: c.modality().as_u8(),
    }
}

pub fn export_circuit(c: &Circuit) -> String {
    serde_json::to_string_pretty(&circuit_json(c)).expect("circuit serializes")
}

fn parse_ports(ports: &[PortJson]) -> Vec<(Label, WireType)> {
    ports
        .iter()
        .map(|p| (Label::new(p.label), WireType::new(p.wire.clone())))
        .collect()
}

fn circuit_from_json(json: &CircuitJson, gateset: &GateSet) -> Result<Circuit, ImportError> {
    let mut items = Vec::with_capacity(json.items.len());
    for item in &json.items {
        items.push(match item {
            ItemJson::Gate {
                name,
                dagger,
                controls,
                ins,
                outs,
            } => {
                let def = gateset
                    .lookup(name)
                    .ok_or_else(|| ImportError::UnknownGate(name.clone()))?
                    .clone();
                let controls = controls
                    .iter()
                    .map(|c| {
                        let gadget = match c.polarity.as_str() {
                            "black" => Ok(ControlGadget::Black),
                            "white" => Ok(ControlGadget::White),
                            other => Err(ImportError::Invalid(format!(
                                "unknown control polarity {other:?}"
                            ))),
                        }?;
                        Ok((gadget, Label::new(c.label)))
                    })
                    .collect::<Result<Vec<_>, ImportError>>()?;
                Item::Gate(GateInstance {
                    def,
                    daggered: *dagger,
                    controls,
                    ins: ins.iter().map(|l| Label::new(*l)).collect(),
                    outs: outs.iter().map(|l| Label::new(*l)).collect(),
                })
            }
            ItemJson::Perm { map } => Item::Perm(Permutation {
                inputs: map.iter().map(|[a, _]| Label::new(*a)).collect(),
                outputs: map.iter().map(|[_, b]| Label::new(*b)).collect(),
            }),
            ItemJson::Conj { g, body } => Item::Conj {
                setup: Box::new(circuit_from_json(g, gateset)?),
                body: Box::new(circuit_from_json(body, gateset)?),
            },
        });
    }
    let circuit = Circuit {
        inputs: parse_ports(&json.inputs),
        items,
        outputs: parse_ports(&json.outputs),
    };
    circuit
        .validate()
        .map_err(|e| ImportError::Invalid(e.to_string()))?;
    Ok(circuit)
}

/// Parses a circuit exported by `export_circuit`, resolving gate names
/// against the signature and re-validating wire flow. The stored modality
/// field is advisory; the importer recomputes it.
pub fn import_circuit(text: &str, gateset: &GateSet) -> Result<Circuit, ImportError> {
    let json: CircuitJson =
        serde_json::from_str(text).map_err(|e| ImportError::Parse(e.to_string()))?;
    circuit_from_json(&json, gateset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{CircuitBuilder, ControlSpec};
    use crate::signature::default_gateset;
    use crate::transform::{control, with_computed};
    use crate::wire::{FreshSupply, SimpleType};

    #[test]
    fn round_trip_preserves_structure() {
        let gs = default_gateset();
        let mut supply = FreshSupply::new();
        let q2 = SimpleType::wires(&WireType::qubit(), 2);
        let mut b = CircuitBuilder::new(&gs, &q2, &mut supply);
        b.gate("H", &[0]).gate_dag("T", &[1]).reorder(&[1, 0]).gate("CNOT", &[0, 1]);
        let c = b.finish();
        let back = import_circuit(&export_circuit(&c), &gs).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn conjugation_nodes_survive() {
        let gs = default_gateset();
        let mut supply = FreshSupply::new();
        let init = Circuit::from_gate(gs.lookup("Init0").unwrap(), false, &mut supply);
        let t = Circuit::from_gate(gs.lookup("T").unwrap(), false, &mut supply);
        let wc = with_computed(&init, &t, &mut supply).unwrap();
        let ctrl = control(&wc, &ControlSpec::black(), &gs, &mut supply).unwrap();
        let text = export_circuit(&ctrl);
        assert!(text.contains("\"conj\""));
        let back = import_circuit(&text, &gs).unwrap();
        assert_eq!(back, ctrl);
        assert!(back.structurally_equal(&ctrl));
    }

    #[test]
    fn unknown_gate_is_rejected() {
        let gs = default_gateset();
        let text = r#"{"inputs":[{"label":0,"wire":"Qubit"}],"items":[{"kind":"gate","name":"Nope","dagger":false,"controls":[],"in":[0],"out":[1]}],"outputs":[{"label":1,"wire":"Qubit"}],"modality":2}"#;
        assert_eq!(
            import_circuit(text, &gs).unwrap_err(),
            ImportError::UnknownGate("Nope".into())
        );
    }

    #[test]
    fn invalid_wire_flow_is_rejected() {
        let gs = default_gateset();
        let text = r#"{"inputs":[{"label":0,"wire":"Qubit"}],"items":[{"kind":"gate","name":"H","dagger":false,"controls":[],"in":[7],"out":[1]}],"outputs":[{"label":1,"wire":"Qubit"}],"modality":2}"#;
        assert!(matches!(
            import_circuit(text, &gs),
            Err(ImportError::Invalid(_))
        ));
    }
}
