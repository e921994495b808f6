//! Constraint solver for modality inference over the lattice `2 > 1 > 0`.
//!
//! Every modality position in a type gets a variable. Checking emits
//! definitions (`var = meet-expression`), equalities from unification, caps
//! from circuit literals (a literal of modality `m` may inhabit any
//! `Circ` annotation up to `m`), and lower bounds from the reverse, control
//! and with-computed rules. Solving starts every variable at 2 and
//! propagates meets downward to a fixpoint, then verifies the bounds; the
//! result is the pointwise-greatest satisfying assignment.

use std::collections::BTreeSet;

use crate::modality::Modality;
use crate::syntax::Span;

use super::ErrorCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModVarId(pub u32);

/// A meet of modality variables and an optional constant floor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModExpr {
    pub floor: Modality,
    pub vars: BTreeSet<ModVarId>,
}

impl ModExpr {
    pub fn top() -> ModExpr {
        ModExpr {
            floor: Modality::Controllable,
            vars: BTreeSet::new(),
        }
    }

    pub fn constant(m: Modality) -> ModExpr {
        ModExpr {
            floor: m,
            vars: BTreeSet::new(),
        }
    }

    pub fn var(v: ModVarId) -> ModExpr {
        ModExpr {
            floor: Modality::Controllable,
            vars: [v].into_iter().collect(),
        }
    }

    pub fn meet(&self, other: &ModExpr) -> ModExpr {
        ModExpr {
            floor: self.floor.meet(other.floor),
            vars: self.vars.union(&other.vars).copied().collect(),
        }
    }

    pub fn eval(&self, assignment: &[Modality]) -> Modality {
        self.vars
            .iter()
            .map(|v| assignment[v.0 as usize])
            .fold(self.floor, Modality::meet)
    }
}

#[derive(Debug, Clone)]
pub enum Constraint {
    /// `var = expr`: the variable is defined as this meet (lambda, lift and
    /// box store the body's modality in the type).
    Def(ModVarId, ModExpr, Span),
    /// Two positions unified by type equality.
    Eq(ModVarId, ModVarId),
    /// Upper bound from a circuit literal: the annotation may ask for any
    /// modality up to the circuit's own.
    AtMost(ModVarId, Modality),
    /// Side condition that must hold after solving; carries its error
    /// report.
    AtLeast(ModVarId, Modality, Span, ErrorCode, String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub span: Span,
    pub code: ErrorCode,
    pub message: String,
}

#[derive(Debug, Default)]
pub struct Solver {
    count: u32,
    pub constraints: Vec<Constraint>,
}

impl Solver {
    pub fn new() -> Solver {
        Solver::default()
    }

    pub fn fresh(&mut self) -> ModVarId {
        let id = ModVarId(self.count);
        self.count += 1;
        id
    }

    /// A variable pinned to an exact annotation.
    pub fn pinned(&mut self, m: Modality, span: Span) -> ModVarId {
        let v = self.fresh();
        self.constraints.push(Constraint::AtMost(v, m));
        self.constraints.push(Constraint::AtLeast(
            v,
            m,
            span,
            ErrorCode::Mod,
            format!("annotation requires modality exactly {m}"),
        ));
        v
    }

    pub fn var_count(&self) -> usize {
        self.count as usize
    }

    /// Greatest-solution search: start at the top of the lattice, propagate
    /// meets and equalities to a fixpoint, lower slack variables where a
    /// definition's meet is pinned below its components, then verify the
    /// lower bounds and definitions.
    pub fn solve(&self) -> Result<Vec<Modality>, Violation> {
        let n = self.var_count();
        let mut a = vec![Modality::Controllable; n];
        let mut definition: Vec<Option<&ModExpr>> = vec![None; n];
        let mut bound = vec![Modality::General; n];
        for c in &self.constraints {
            match c {
                Constraint::Def(v, e, _) => definition[v.0 as usize] = Some(e),
                Constraint::AtLeast(v, m, _, _, _) => {
                    let i = v.0 as usize;
                    bound[i] = bound[i].max(*m);
                }
                _ => {}
            }
        }

        let propagate = |a: &mut Vec<Modality>| loop {
            let mut changed = false;
            for c in &self.constraints {
                match c {
                    Constraint::Def(v, e, _) => {
                        let val = e.eval(a).meet(a[v.0 as usize]);
                        if a[v.0 as usize] != val {
                            a[v.0 as usize] = val;
                            changed = true;
                        }
                    }
                    Constraint::Eq(x, y) => {
                        let val = a[x.0 as usize].meet(a[y.0 as usize]);
                        if a[x.0 as usize] != val || a[y.0 as usize] != val {
                            a[x.0 as usize] = val;
                            a[y.0 as usize] = val;
                            changed = true;
                        }
                    }
                    Constraint::AtMost(v, m) => {
                        let val = a[v.0 as usize].meet(*m);
                        if a[v.0 as usize] != val {
                            a[v.0 as usize] = val;
                            changed = true;
                        }
                    }
                    Constraint::AtLeast(_, _, _, _, _) => {}
                }
            }
            if !changed {
                break;
            }
        };

        // Whether variable `v` could consistently take the value `want`:
        // its lower bounds permit it and, if it is defined, its meet can
        // reach `want` through some component.
        fn feasible(
            v: ModVarId,
            want: Modality,
            definition: &[Option<&ModExpr>],
            bound: &[Modality],
            visiting: &mut Vec<bool>,
        ) -> bool {
            let i = v.0 as usize;
            if bound[i] > want {
                return false;
            }
            if visiting[i] {
                // A cycle imposes no obstruction of its own; the final
                // verification pass still guards the guess.
                return true;
            }
            match definition[i] {
                None => true,
                Some(e) => {
                    if e.floor == want {
                        return true;
                    }
                    if e.floor < want {
                        return false;
                    }
                    visiting[i] = true;
                    let ok = e
                        .vars
                        .iter()
                        .any(|u| feasible(*u, want, definition, bound, visiting));
                    visiting[i] = false;
                    ok
                }
            }
        }

        propagate(&mut a);
        // A definition pinned below its meet can still be satisfied by
        // lowering feasible components; demands cascade through further
        // definitions on the next rounds.
        loop {
            let mut lowered = false;
            for c in &self.constraints {
                if let Constraint::Def(v, e, _) = c {
                    let want = a[v.0 as usize];
                    if e.eval(&a) > want {
                        for u in &e.vars {
                            let i = u.0 as usize;
                            let mut visiting = vec![false; n];
                            if a[i] > want
                                && feasible(*u, want, &definition, &bound, &mut visiting)
                            {
                                a[i] = want;
                                lowered = true;
                            }
                        }
                    }
                }
            }
            if !lowered {
                break;
            }
            propagate(&mut a);
        }

        for c in &self.constraints {
            match c {
                Constraint::AtLeast(v, m, span, code, message) => {
                    if a[v.0 as usize] < *m {
                        return Err(Violation {
                            span: *span,
                            code: *code,
                            message: format!(
                                "{message}, but the inferred modality is {}",
                                a[v.0 as usize]
                            ),
                        });
                    }
                }
                Constraint::Def(v, e, span) => {
                    if e.eval(&a) != a[v.0 as usize] {
                        return Err(Violation {
                            span: *span,
                            code: ErrorCode::Mod,
                            message: format!(
                                "modality {} conflicts with the inferred meet {}",
                                a[v.0 as usize],
                                e.eval(&a)
                            ),
                        });
                    }
                }
                _ => {}
            }
        }
        Ok(a)
    }
}
