//! The three-point modality lattice `2 > 1 > 0` used to classify circuits.
//!
//! Modality 2 marks circuits that are both controllable and reversible,
//! modality 1 circuits that are reversible but not controllable (e.g. qubit
//! initialization), and modality 0 circuits that are neither (e.g.
//! measurement). Modalities combine under `meet` (minimum), so composing
//! circuits can only lose capabilities, never gain them.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Modality {
    /// Neither reversible nor controllable.
    General = 0,
    /// Reversible (has an adjoint) but not controllable.
    Reversible = 1,
    /// Both controllable and reversible.
    Controllable = 2,
}

impl Modality {
    pub const fn meet(self, other: Modality) -> Modality {
        if (self as u8) <= (other as u8) {
            self
        } else {
            other
        }
    }

    pub const fn as_u8(self) -> u8 {
        self as u8
    }

    pub fn from_u8(value: u8) -> Option<Modality> {
        match value {
            0 => Some(Modality::General),
            1 => Some(Modality::Reversible),
            2 => Some(Modality::Controllable),
            _ => None,
        }
    }

    pub fn is_reversible(self) -> bool {
        self >= Modality::Reversible
    }

    pub fn is_controllable(self) -> bool {
        self == Modality::Controllable
    }
}

impl From<Modality> for u8 {
    fn from(m: Modality) -> u8 {
        m as u8
    }
}

impl TryFrom<u8> for Modality {
    type Error = String;

    fn try_from(value: u8) -> Result<Modality, String> {
        Modality::from_u8(value).ok_or_else(|| format!("modality must be 0, 1 or 2, got {value}"))
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", *self as u8)
    }
}

#[cfg(test)]
mod tests {
    use super::Modality::{self, *};

    const ALL: [Modality; 3] = [General, Reversible, Controllable];

    #[test]
    fn meet_is_min() {
        assert_eq!(Controllable.meet(Reversible), Reversible);
        assert_eq!(Reversible.meet(General), General);
        assert_eq!(General.meet(Controllable), General);
    }

    #[test]
    fn meet_laws() {
        for a in ALL {
            assert_eq!(a.meet(a), a, "idempotent");
            assert_eq!(a.meet(Controllable), a, "2 is the unit");
            for b in ALL {
                assert_eq!(a.meet(b), b.meet(a), "commutative");
                for c in ALL {
                    assert_eq!(a.meet(b).meet(c), a.meet(b.meet(c)), "associative");
                }
            }
        }
    }

    #[test]
    fn ordering_matches_lattice() {
        assert!(General < Reversible);
        assert!(Reversible < Controllable);
    }
}
