//! Gate signatures: the wire types and gates the whole toolchain is
//! parameterized by.
//!
//! A signature declares, for each gate, its arity, its modality
//! (controllable / reversible / neither) and how its adjoint is formed.
//! Signatures can be loaded from a JSON file; entries extend or override the
//! built-in default set.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::modality::Modality;
use crate::wire::WireType;

/// How the adjoint of a gate is realized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AdjointKind {
    /// The gate is its own adjoint (X, H, CNOT, SWAP, ...).
    SelfAdjoint,
    /// The adjoint is a different named gate (Init0 <-> Term0).
    Partner(String),
    /// The adjoint is the same gate with the dagger flag set (T, S).
    DaggerFlag,
    /// The gate has no adjoint (measurement, discard).
    None,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateDef {
    pub name: String,
    pub inputs: Vec<WireType>,
    pub outputs: Vec<WireType>,
    pub modality: Modality,
    pub adjoint: AdjointKind,
}

impl GateDef {
    pub fn arity_in(&self) -> usize {
        self.inputs.len()
    }

    pub fn arity_out(&self) -> usize {
        self.outputs.len()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SignatureError {
    #[error("could not parse signature file: {0}")]
    Parse(String),
    #[error("gate {gate}: adjoint partner {partner} is not declared")]
    DanglingPartner { gate: String, partner: String },
    #[error("gate {gate}: adjoint partner {partner} must have swapped input/output types")]
    PartnerShape { gate: String, partner: String },
    #[error("gate {gate}: modality {modality} requires an adjoint")]
    MissingAdjoint { gate: String, modality: Modality },
    #[error("gate {gate}: controllable gates must have equal input and output types")]
    NotSquare { gate: String },
    #[error("gate {gate} uses undeclared wire type {wire}")]
    UnknownWire { gate: String, wire: String },
    #[error("signature must declare a controllable SWAP gate on Qubit * Qubit")]
    MissingSwap,
    #[error("signature must declare the Qubit wire type")]
    MissingQubit,
}

/// An immutable, validated gate signature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateSet {
    wire_types: BTreeSet<WireType>,
    gates: BTreeMap<String, Arc<GateDef>>,
}

impl GateSet {
    fn from_parts(
        wire_types: BTreeSet<WireType>,
        gates: BTreeMap<String, Arc<GateDef>>,
    ) -> Result<GateSet, SignatureError> {
        let set = GateSet { wire_types, gates };
        set.validate()?;
        Ok(set)
    }

    fn validate(&self) -> Result<(), SignatureError> {
        if !self.wire_types.contains(&WireType::qubit()) {
            return Err(SignatureError::MissingQubit);
        }
        for def in self.gates.values() {
            for wire in def.inputs.iter().chain(def.outputs.iter()) {
                if !self.wire_types.contains(wire) {
                    return Err(SignatureError::UnknownWire {
                        gate: def.name.clone(),
                        wire: wire.name().to_string(),
                    });
                }
            }
            if def.modality == Modality::Controllable && def.inputs != def.outputs {
                return Err(SignatureError::NotSquare {
                    gate: def.name.clone(),
                });
            }
            if def.modality >= Modality::Reversible && def.adjoint == AdjointKind::None {
                return Err(SignatureError::MissingAdjoint {
                    gate: def.name.clone(),
                    modality: def.modality,
                });
            }
            if let AdjointKind::Partner(partner) = &def.adjoint {
                let other = self.gates.get(partner).ok_or_else(|| {
                    SignatureError::DanglingPartner {
                        gate: def.name.clone(),
                        partner: partner.clone(),
                    }
                })?;
                if other.inputs != def.outputs || other.outputs != def.inputs {
                    return Err(SignatureError::PartnerShape {
                        gate: def.name.clone(),
                        partner: partner.clone(),
                    });
                }
            }
        }
        match self.gates.get("SWAP") {
            Some(swap)
                if swap.modality == Modality::Controllable
                    && swap.inputs == vec![WireType::qubit(), WireType::qubit()]
                    && swap.outputs == swap.inputs => {}
            _ => return Err(SignatureError::MissingSwap),
        }
        Ok(())
    }

    /// Exact-name lookup, falling back to a unique case-insensitive match so
    /// that program text may write `Swap` for the declared `SWAP`.
    pub fn lookup(&self, name: &str) -> Option<&Arc<GateDef>> {
        if let Some(def) = self.gates.get(name) {
            return Some(def);
        }
        let mut found = None;
        for (key, def) in &self.gates {
            if key.eq_ignore_ascii_case(name) {
                if found.is_some() {
                    return None;
                }
                found = Some(def);
            }
        }
        found
    }

    pub fn swap(&self) -> &Arc<GateDef> {
        self.gates.get("SWAP").expect("validated signature has SWAP")
    }

    pub fn has_wire_type(&self, wire: &WireType) -> bool {
        self.wire_types.contains(wire)
    }

    pub fn wire_types(&self) -> impl Iterator<Item = &WireType> {
        self.wire_types.iter()
    }

    pub fn gates(&self) -> impl Iterator<Item = &Arc<GateDef>> {
        self.gates.values()
    }

    /// Serializes the full signature; `load_signature(save(gs))` yields an
    /// equal set.
    pub fn save(&self) -> String {
        let file = SignatureFile {
            wire_types: self.wire_types.iter().map(|w| w.name().to_string()).collect(),
            gates: self
                .gates
                .values()
                .map(|def| GateEntry {
                    name: def.name.clone(),
                    inputs: def.inputs.iter().map(|w| w.name().to_string()).collect(),
                    outputs: def.outputs.iter().map(|w| w.name().to_string()).collect(),
                    modality: def.modality,
                    adjoint: match &def.adjoint {
                        AdjointKind::SelfAdjoint => AdjointEntry::Tag("self".into()),
                        AdjointKind::DaggerFlag => AdjointEntry::Tag("flag".into()),
                        AdjointKind::Partner(p) => AdjointEntry::Partner { partner: p.clone() },
                        AdjointKind::None => AdjointEntry::Null,
                    },
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("signature serializes")
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct SignatureFile {
    #[serde(default)]
    wire_types: Vec<String>,
    #[serde(default)]
    gates: Vec<GateEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct GateEntry {
    name: String,
    #[serde(rename = "in")]
    inputs: Vec<String>,
    #[serde(rename = "out")]
    outputs: Vec<String>,
    modality: Modality,
    #[serde(default)]
    adjoint: AdjointEntry,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(untagged)]
enum AdjointEntry {
    Tag(String),
    Partner {
        partner: String,
    },
    #[default]
    Null,
}

fn gate(
    name: &str,
    inputs: &[WireType],
    outputs: &[WireType],
    modality: Modality,
    adjoint: AdjointKind,
) -> (String, Arc<GateDef>) {
    (
        name.to_string(),
        Arc::new(GateDef {
            name: name.to_string(),
            inputs: inputs.to_vec(),
            outputs: outputs.to_vec(),
            modality,
            adjoint,
        }),
    )
}

/// The built-in signature: Qubit and Bit wires; the usual one- and two-qubit
/// controllable gates; initialization with terminating adjoints; measurement
/// and discard.
pub fn default_gateset() -> GateSet {
    use AdjointKind::*;
    use Modality::*;

    let q = WireType::qubit();
    let b = WireType::bit();
    let one = [q.clone()];
    let two = [q.clone(), q.clone()];

    let gates: BTreeMap<String, Arc<GateDef>> = [
        gate("X", &one, &one, Controllable, SelfAdjoint),
        gate("Y", &one, &one, Controllable, SelfAdjoint),
        gate("Z", &one, &one, Controllable, SelfAdjoint),
        gate("H", &one, &one, Controllable, SelfAdjoint),
        gate("S", &one, &one, Controllable, DaggerFlag),
        gate("T", &one, &one, Controllable, DaggerFlag),
        gate("CNOT", &two, &two, Controllable, SelfAdjoint),
        gate("CZ", &two, &two, Controllable, SelfAdjoint),
        gate("SWAP", &two, &two, Controllable, SelfAdjoint),
        gate("Init0", &[], &one, Reversible, Partner("Term0".into())),
        gate("Init1", &[], &one, Reversible, Partner("Term1".into())),
        gate("Term0", &one, &[], Reversible, Partner("Init0".into())),
        gate("Term1", &one, &[], Reversible, Partner("Init1".into())),
        gate("Meas", &one, &[b.clone()], General, None),
        gate("Discard", &one, &[], General, None),
        gate("BitDiscard", &[b.clone()], &[], General, None),
    ]
    .into_iter()
    .collect();

    let wire_types = [q, b].into_iter().collect();
    GateSet::from_parts(wire_types, gates).expect("default signature is valid")
}

/// Parses a signature file and merges it over the default set. Declared
/// gates may override default entries; wire types are added to the default
/// ones. The empty object yields exactly the default set.
pub fn load_signature(text: &str) -> Result<GateSet, SignatureError> {
    let file: SignatureFile =
        serde_json::from_str(text).map_err(|e| SignatureError::Parse(e.to_string()))?;
    let base = default_gateset();
    let mut wire_types = base.wire_types;
    let mut gates = base.gates;
    for name in file.wire_types {
        wire_types.insert(WireType::new(name));
    }
    for entry in file.gates {
        let adjoint = match entry.adjoint {
            AdjointEntry::Tag(tag) if tag == "self" => AdjointKind::SelfAdjoint,
            AdjointEntry::Tag(tag) if tag == "flag" => AdjointKind::DaggerFlag,
            AdjointEntry::Tag(tag) => {
                return Err(SignatureError::Parse(format!(
                    "unknown adjoint tag {tag:?} for gate {}",
                    entry.name
                )))
            }
            AdjointEntry::Partner { partner } => AdjointKind::Partner(partner),
            AdjointEntry::Null => AdjointKind::None,
        };
        let def = GateDef {
            name: entry.name.clone(),
            inputs: entry.inputs.into_iter().map(WireType::new).collect(),
            outputs: entry.outputs.into_iter().map(WireType::new).collect(),
            modality: entry.modality,
            adjoint,
        };
        gates.insert(entry.name, Arc::new(def));
    }
    GateSet::from_parts(wire_types, gates)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_modalities() {
        let gs = default_gateset();
        assert_eq!(gs.lookup("H").unwrap().modality, Modality::Controllable);
        assert_eq!(gs.lookup("Init0").unwrap().modality, Modality::Reversible);
        assert_eq!(gs.lookup("Meas").unwrap().modality, Modality::General);
    }

    #[test]
    fn empty_object_is_default() {
        assert_eq!(load_signature("{}").unwrap(), default_gateset());
    }

    #[test]
    fn extension_gate_is_added() {
        let gs = load_signature(
            r#"{"gates":[{"name":"RZ4","in":["Qubit"],"out":["Qubit"],"modality":2,"adjoint":"flag"}]}"#,
        )
        .unwrap();
        let rz4 = gs.lookup("RZ4").unwrap();
        assert_eq!(rz4.modality, Modality::Controllable);
        assert_eq!(rz4.adjoint, AdjointKind::DaggerFlag);
    }

    #[test]
    fn controllable_gate_must_be_square() {
        let err = load_signature(
            r#"{"gates":[{"name":"Bad","in":["Qubit"],"out":["Bit"],"modality":2,"adjoint":"self"}]}"#,
        )
        .unwrap_err();
        assert_eq!(err, SignatureError::NotSquare { gate: "Bad".into() });
    }

    #[test]
    fn dangling_partner_rejected() {
        let err = load_signature(
            r#"{"gates":[{"name":"A","in":[],"out":["Qubit"],"modality":1,"adjoint":{"partner":"Nope"}}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, SignatureError::DanglingPartner { .. }));
    }

    #[test]
    fn overriding_swap_badly_is_rejected() {
        let err = load_signature(
            r#"{"gates":[{"name":"SWAP","in":["Qubit"],"out":["Qubit"],"modality":2,"adjoint":"self"}]}"#,
        )
        .unwrap_err();
        assert_eq!(err, SignatureError::MissingSwap);
    }

    #[test]
    fn save_load_round_trip() {
        let gs = load_signature(
            r#"{"wire_types":["Qutrit"],"gates":[{"name":"Noise","in":["Qubit"],"out":["Qubit"],"modality":0,"adjoint":null}]}"#,
        )
        .unwrap();
        let reloaded = load_signature(&gs.save()).unwrap();
        assert_eq!(gs, reloaded);
    }

    #[test]
    fn partner_types_are_swapped() {
        let gs = default_gateset();
        for def in gs.gates() {
            if def.modality == Modality::Reversible {
                if let AdjointKind::Partner(p) = &def.adjoint {
                    let other = gs.lookup(p).unwrap();
                    assert_eq!(other.inputs, def.outputs);
                    assert_eq!(other.outputs, def.inputs);
                }
            }
        }
    }

    #[test]
    fn case_insensitive_lookup() {
        let gs = default_gateset();
        assert_eq!(gs.lookup("Swap").unwrap().name, "SWAP");
        assert_eq!(gs.lookup("cnot").unwrap().name, "CNOT");
        // Exact match wins over case folding.
        assert_eq!(gs.lookup("S").unwrap().name, "S");
    }
}
