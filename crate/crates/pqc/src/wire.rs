//! Wire types, labels and simple types: the data that circuit interfaces are
//! made of.

use std::fmt;

use serde::{Deserialize, Serialize};

/// The type of a single circuit wire, e.g. `Qubit` or `Bit`. Wire types are
/// declared by the active gate signature.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WireType(String);

impl WireType {
    pub fn new(name: impl Into<String>) -> WireType {
        WireType(name.into())
    }

    pub fn qubit() -> WireType {
        WireType::new("Qubit")
    }

    pub fn bit() -> WireType {
        WireType::new("Bit")
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    pub fn is_qubit(&self) -> bool {
        self.0 == "Qubit"
    }
}

impl fmt::Display for WireType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A label names a live wire endpoint in a circuit under construction.
/// Labels are bookkeeping, not semantics: circuits are compared up to a
/// label bijection that respects interface order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(u64);

impl Label {
    pub fn new(id: u64) -> Label {
        Label(id)
    }

    pub fn id(self) -> u64 {
        self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\u{2113}{}", self.0)
    }
}

/// Monotone counter handing out fresh labels. One supply is owned by a
/// single evaluation run; ids are never reused within a run.
#[derive(Debug, Default, Clone)]
pub struct FreshSupply {
    next: u64,
}

impl FreshSupply {
    pub fn new() -> FreshSupply {
        FreshSupply { next: 0 }
    }

    pub fn fresh(&mut self) -> Label {
        let label = Label(self.next);
        self.next += 1;
        label
    }

    pub fn fresh_many(&mut self, count: usize) -> Vec<Label> {
        (0..count).map(|_| self.fresh()).collect()
    }
}

/// A tensor tree of wire types; the only types circuits input and output.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SimpleType {
    Unit,
    Wire(WireType),
    Tensor(Box<SimpleType>, Box<SimpleType>),
}

impl SimpleType {
    pub fn qubit() -> SimpleType {
        SimpleType::Wire(WireType::qubit())
    }

    pub fn tensor(left: SimpleType, right: SimpleType) -> SimpleType {
        SimpleType::Tensor(Box::new(left), Box::new(right))
    }

    /// Right-nested tensor of `n` copies of one wire type. Zero wires is the
    /// unit type.
    pub fn wires(wire: &WireType, n: usize) -> SimpleType {
        let mut ty = match n {
            0 => return SimpleType::Unit,
            _ => SimpleType::Wire(wire.clone()),
        };
        for _ in 1..n {
            ty = SimpleType::tensor(SimpleType::Wire(wire.clone()), ty);
        }
        ty
    }

    /// Right-nested tensor over an ordered wire list.
    pub fn from_wire_list(wires: &[WireType]) -> SimpleType {
        match wires {
            [] => SimpleType::Unit,
            [w] => SimpleType::Wire(w.clone()),
            [w, rest @ ..] => {
                SimpleType::tensor(SimpleType::Wire(w.clone()), SimpleType::from_wire_list(rest))
            }
        }
    }

    /// The ordered list of wire types this simple type denotes.
    pub fn flatten(&self) -> Vec<WireType> {
        let mut out = Vec::new();
        self.flatten_into(&mut out);
        out
    }

    fn flatten_into(&self, out: &mut Vec<WireType>) {
        match self {
            SimpleType::Unit => {}
            SimpleType::Wire(w) => out.push(w.clone()),
            SimpleType::Tensor(a, b) => {
                a.flatten_into(out);
                b.flatten_into(out);
            }
        }
    }

    pub fn wire_count(&self) -> usize {
        match self {
            SimpleType::Unit => 0,
            SimpleType::Wire(_) => 1,
            SimpleType::Tensor(a, b) => a.wire_count() + b.wire_count(),
        }
    }
}

impl fmt::Display for SimpleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimpleType::Unit => f.write_str("Unit"),
            SimpleType::Wire(w) => write!(f, "{w}"),
            SimpleType::Tensor(a, b) => {
                // * is right-associative; parenthesize left tensors only.
                match **a {
                    SimpleType::Tensor(_, _) => write!(f, "({a}) * {b}"),
                    _ => write!(f, "{a} * {b}"),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_labels_increase() {
        let mut supply = FreshSupply::new();
        let a = supply.fresh();
        let b = supply.fresh();
        assert!(a.id() < b.id());
    }

    #[test]
    fn flatten_is_in_order() {
        let ty = SimpleType::tensor(
            SimpleType::qubit(),
            SimpleType::tensor(SimpleType::Wire(WireType::bit()), SimpleType::qubit()),
        );
        let names: Vec<_> = ty.flatten().iter().map(|w| w.name().to_string()).collect();
        assert_eq!(names, ["Qubit", "Bit", "Qubit"]);
        assert_eq!(ty.wire_count(), 3);
    }

    #[test]
    fn unit_flattens_empty() {
        assert!(SimpleType::Unit.flatten().is_empty());
        assert_eq!(SimpleType::wires(&WireType::qubit(), 0), SimpleType::Unit);
    }

    #[test]
    fn wires_nests_right() {
        let ty = SimpleType::wires(&WireType::qubit(), 3);
        assert_eq!(
            ty,
            SimpleType::tensor(
                SimpleType::qubit(),
                SimpleType::tensor(SimpleType::qubit(), SimpleType::qubit())
            )
        );
    }

    #[test]
    fn label_renders_with_ell() {
        assert_eq!(Label::new(7).to_string(), "\u{2113}7");
    }
}
