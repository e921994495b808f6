//! The linear type checker with modality inference.
//!
//! Checking a term produces its type, a meet-expression for the judgment
//! modality, and a constraint set over modality variables (see `solver`).
//! Linear variables and labels must be used exactly once; parameter-typed
//! bindings (unit, booleans, suspended terms, circuits, and tensors of
//! these) are exempt. Suspended terms (`lift`) may not capture linear
//! bindings.

pub mod solver;

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::circuit::Circuit;
use crate::eval::Configuration;
use crate::modality::Modality;
use crate::signature::GateSet;
use crate::syntax::{Program, Span, Term, TermKind, TypeExpr, TypeKind};
use crate::wire::{Label, SimpleType, WireType};

use solver::{Constraint, ModExpr, ModVarId, Solver, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCode {
    Lin,
    Type,
    Rev,
    Ctrl,
    Wc,
    Mod,
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let code = match self {
            ErrorCode::Lin => "E-LIN",
            ErrorCode::Type => "E-TYPE",
            ErrorCode::Rev => "E-REV",
            ErrorCode::Ctrl => "E-CTRL",
            ErrorCode::Wc => "E-WC",
            ErrorCode::Mod => "E-MOD",
        };
        f.write_str(code)
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
#[error("{span}: error[{code}]: {message}")]
pub struct TypeError {
    pub code: ErrorCode,
    pub span: Span,
    pub message: String,
}

impl TypeError {
    fn new(code: ErrorCode, span: Span, message: impl Into<String>) -> TypeError {
        TypeError {
            code,
            span,
            message: message.into(),
        }
    }

    /// `FILE:LINE:COL: error[CODE]: message`
    pub fn render(&self, file: &str) -> String {
        format!(
            "{file}:{}:{}: error[{}]: {}",
            self.span.line, self.span.col, self.code, self.message
        )
    }
}

impl From<Violation> for TypeError {
    fn from(v: Violation) -> TypeError {
        TypeError::new(v.code, v.span, v.message)
    }
}

/// Internal checked types: every modality position is a solver variable and
/// unknown types are metavariables resolved by unification.
#[derive(Debug, Clone, PartialEq)]
enum CType {
    Unit,
    Bool,
    Wire(WireType),
    Bang(ModVarId, Box<CType>),
    Lolli(Box<CType>, ModVarId, Box<CType>),
    Circ(ModVarId, SimpleType, SimpleType),
    Tensor(Box<CType>, Box<CType>),
    Meta(u32),
}

#[derive(Debug)]
struct Binding {
    name: String,
    ty: CType,
    used: usize,
    span: Span,
}

#[derive(Debug)]
struct LabelBinding {
    label: Label,
    wire: WireType,
    used: usize,
}

/// A solved top-level definition visible to later definitions. Non-parameter
/// definitions may be referenced at most once.
#[derive(Debug, Clone)]
pub struct GlobalDef {
    pub name: String,
    pub ty: TypeExpr,
    pub param: bool,
    pub used: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypedJudgment {
    pub name: String,
    pub ty: TypeExpr,
    pub modality: Modality,
}

impl fmt::Display for TypedJudgment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} : {} [modality {}]",
            self.name,
            crate::syntax::print_type(&self.ty),
            self.modality
        )
    }
}

struct Checker<'g> {
    gateset: &'g GateSet,
    solver: Solver,
    metas: Vec<Option<CType>>,
    vars: Vec<Binding>,
    labels: Vec<LabelBinding>,
    /// Types that must turn out duplicable: captures inside `lift`.
    param_obligations: Vec<(CType, Span, String)>,
    /// Binder exit checks deferred until metas are resolved.
    linear_checks: Vec<(String, CType, usize, Span)>,
}

impl<'g> Checker<'g> {
    fn new(gateset: &'g GateSet) -> Checker<'g> {
        Checker {
            gateset,
            solver: Solver::new(),
            metas: Vec::new(),
            vars: Vec::new(),
            labels: Vec::new(),
            param_obligations: Vec::new(),
            linear_checks: Vec::new(),
        }
    }

    fn fresh_meta(&mut self) -> CType {
        self.metas.push(None);
        CType::Meta((self.metas.len() - 1) as u32)
    }

    fn shallow(&self, ty: &CType) -> CType {
        let mut t = ty.clone();
        while let CType::Meta(i) = t {
            match &self.metas[i as usize] {
                Some(next) => t = next.clone(),
                None => break,
            }
        }
        t
    }

    fn occurs(&self, meta: u32, ty: &CType) -> bool {
        match self.shallow(ty) {
            CType::Meta(i) => i == meta,
            CType::Bang(_, t) => self.occurs(meta, &t),
            CType::Lolli(a, _, b) | CType::Tensor(a, b) => {
                self.occurs(meta, &a) || self.occurs(meta, &b)
            }
            _ => false,
        }
    }

    fn unify(&mut self, a: &CType, b: &CType, span: Span) -> Result<(), TypeError> {
        let a = self.shallow(a);
        let b = self.shallow(b);
        match (&a, &b) {
            (CType::Meta(i), CType::Meta(j)) if i == j => Ok(()),
            (CType::Meta(i), _) => {
                if self.occurs(*i, &b) {
                    return Err(TypeError::new(
                        ErrorCode::Type,
                        span,
                        "cannot construct an infinite type",
                    ));
                }
                self.metas[*i as usize] = Some(b);
                Ok(())
            }
            (_, CType::Meta(j)) => {
                if self.occurs(*j, &a) {
                    return Err(TypeError::new(
                        ErrorCode::Type,
                        span,
                        "cannot construct an infinite type",
                    ));
                }
                self.metas[*j as usize] = Some(a);
                Ok(())
            }
            (CType::Unit, CType::Unit) | (CType::Bool, CType::Bool) => Ok(()),
            (CType::Wire(x), CType::Wire(y)) if x == y => Ok(()),
            (CType::Bang(ma, ta), CType::Bang(mb, tb)) => {
                self.solver.constraints.push(Constraint::Eq(*ma, *mb));
                self.unify(ta, tb, span)
            }
            (CType::Lolli(a1, ma, b1), CType::Lolli(a2, mb, b2)) => {
                self.solver.constraints.push(Constraint::Eq(*ma, *mb));
                self.unify(a1, a2, span)?;
                self.unify(b1, b2, span)
            }
            (CType::Circ(ma, s1, u1), CType::Circ(mb, s2, u2)) => {
                if s1 != s2 || u1 != u2 {
                    return Err(TypeError::new(
                        ErrorCode::Type,
                        span,
                        format!(
                            "circuit interface mismatch: expected Circ(-)({s2}, {u2}), found Circ(-)({s1}, {u1})"
                        ),
                    ));
                }
                self.solver.constraints.push(Constraint::Eq(*ma, *mb));
                Ok(())
            }
            (CType::Tensor(a1, b1), CType::Tensor(a2, b2)) => {
                self.unify(a1, a2, span)?;
                self.unify(b1, b2, span)
            }
            _ => Err(TypeError::new(
                ErrorCode::Type,
                span,
                format!(
                    "type mismatch: expected {}, found {}",
                    self.describe(&b),
                    self.describe(&a)
                ),
            )),
        }
    }

    fn describe(&self, ty: &CType) -> String {
        match self.shallow(ty) {
            CType::Unit => "Unit".into(),
            CType::Bool => "Bool".into(),
            CType::Wire(w) => w.name().to_string(),
            CType::Bang(_, t) => format!("!{}", self.describe(&t)),
            CType::Lolli(a, _, b) => format!("({} -o {})", self.describe(&a), self.describe(&b)),
            CType::Circ(_, s, u) => format!("Circ({s}, {u})"),
            CType::Tensor(a, b) => format!("({} * {})", self.describe(&a), self.describe(&b)),
            CType::Meta(_) => "_".into(),
        }
    }

    /// Converts a surface type: concrete modalities are pinned, holes become
    /// free variables, wire names are validated against the signature.
    fn import_type(&mut self, ty: &TypeExpr) -> Result<CType, TypeError> {
        let modvar = |me: &mut Self, m: &Option<Modality>, span: Span| match m {
            Some(m) => me.solver.pinned(*m, span),
            None => me.solver.fresh(),
        };
        match &ty.kind {
            TypeKind::Unit => Ok(CType::Unit),
            TypeKind::Bool => Ok(CType::Bool),
            TypeKind::Wire(name) => {
                let wire = WireType::new(name.clone());
                if !self.gateset.has_wire_type(&wire) {
                    return Err(TypeError::new(
                        ErrorCode::Type,
                        ty.span,
                        format!("unknown wire type `{name}`"),
                    ));
                }
                Ok(CType::Wire(wire))
            }
            TypeKind::Bang(m, inner) => {
                let v = modvar(self, m, ty.span);
                Ok(CType::Bang(v, Box::new(self.import_type(inner)?)))
            }
            TypeKind::Lolli(a, m, b) => {
                let v = modvar(self, m, ty.span);
                Ok(CType::Lolli(
                    Box::new(self.import_type(a)?),
                    v,
                    Box::new(self.import_type(b)?),
                ))
            }
            TypeKind::Circ(m, s, u) => {
                let v = modvar(self, m, ty.span);
                self.check_simple(s, ty.span)?;
                self.check_simple(u, ty.span)?;
                Ok(CType::Circ(v, s.clone(), u.clone()))
            }
            TypeKind::Tensor(a, b) => Ok(CType::Tensor(
                Box::new(self.import_type(a)?),
                Box::new(self.import_type(b)?),
            )),
        }
    }

    fn check_simple(&self, ty: &SimpleType, span: Span) -> Result<(), TypeError> {
        for wire in ty.flatten() {
            if !self.gateset.has_wire_type(&wire) {
                return Err(TypeError::new(
                    ErrorCode::Type,
                    span,
                    format!("unknown wire type `{}`", wire.name()),
                ));
            }
        }
        Ok(())
    }

    fn ctype_of_simple(&self, ty: &SimpleType) -> CType {
        match ty {
            SimpleType::Unit => CType::Unit,
            SimpleType::Wire(w) => CType::Wire(w.clone()),
            SimpleType::Tensor(a, b) => CType::Tensor(
                Box::new(self.ctype_of_simple(a)),
                Box::new(self.ctype_of_simple(b)),
            ),
        }
    }

    fn simple_of_ctype(&self, ty: &CType) -> Option<SimpleType> {
        match self.shallow(ty) {
            CType::Unit => Some(SimpleType::Unit),
            CType::Wire(w) => Some(SimpleType::Wire(w)),
            CType::Tensor(a, b) => Some(SimpleType::tensor(
                self.simple_of_ctype(&a)?,
                self.simple_of_ctype(&b)?,
            )),
            _ => None,
        }
    }

    /// Whether values of the type are duplicable. `None` while the type is
    /// still an unresolved metavariable.
    fn is_param(&self, ty: &CType) -> Option<bool> {
        match self.shallow(ty) {
            CType::Unit | CType::Bool | CType::Bang(_, _) | CType::Circ(_, _, _) => Some(true),
            CType::Wire(_) | CType::Lolli(_, _, _) => Some(false),
            CType::Tensor(a, b) => match (self.is_param(&a), self.is_param(&b)) {
                (Some(false), _) | (_, Some(false)) => Some(false),
                (Some(true), Some(true)) => Some(true),
                _ => None,
            },
            CType::Meta(_) => None,
        }
    }

    fn zonk(&self, ty: &CType) -> Option<CType> {
        match self.shallow(ty) {
            CType::Meta(_) => None,
            CType::Unit => Some(CType::Unit),
            CType::Bool => Some(CType::Bool),
            CType::Wire(w) => Some(CType::Wire(w)),
            CType::Bang(m, t) => Some(CType::Bang(m, Box::new(self.zonk(&t)?))),
            CType::Lolli(a, m, b) => Some(CType::Lolli(
                Box::new(self.zonk(&a)?),
                m,
                Box::new(self.zonk(&b)?),
            )),
            CType::Circ(m, s, u) => Some(CType::Circ(m, s, u)),
            CType::Tensor(a, b) => Some(CType::Tensor(
                Box::new(self.zonk(&a)?),
                Box::new(self.zonk(&b)?),
            )),
        }
    }

    fn export_type(&self, ty: &CType, assignment: &[Modality]) -> TypeExpr {
        let span = Span::default();
        let kind = match self.shallow(ty) {
            CType::Unit => TypeKind::Unit,
            CType::Bool => TypeKind::Bool,
            CType::Wire(w) => TypeKind::Wire(w.name().to_string()),
            CType::Bang(m, t) => TypeKind::Bang(
                Some(assignment[m.0 as usize]),
                Box::new(self.export_type(&t, assignment)),
            ),
            CType::Lolli(a, m, b) => TypeKind::Lolli(
                Box::new(self.export_type(&a, assignment)),
                Some(assignment[m.0 as usize]),
                Box::new(self.export_type(&b, assignment)),
            ),
            CType::Circ(m, s, u) => TypeKind::Circ(Some(assignment[m.0 as usize]), s, u),
            CType::Tensor(a, b) => TypeKind::Tensor(
                Box::new(self.export_type(&a, assignment)),
                Box::new(self.export_type(&b, assignment)),
            ),
            CType::Meta(_) => TypeKind::Unit,
        };
        TypeExpr::new(kind, span)
    }

    fn check_term(
        &mut self,
        term: &Term,
        globals: &mut [GlobalDef],
    ) -> Result<(CType, ModExpr), TypeError> {
        let span = term.span;
        match &term.kind {
            TermKind::Var(name) => {
                // Innermost binding wins; fall back to earlier definitions.
                if let Some(b) = self.vars.iter_mut().rev().find(|b| &b.name == name) {
                    b.used += 1;
                    return Ok((b.ty.clone(), ModExpr::top()));
                }
                if let Some(g) = globals.iter_mut().find(|g| &g.name == name) {
                    g.used += 1;
                    if !g.param && g.used > 1 {
                        return Err(TypeError::new(
                            ErrorCode::Lin,
                            span,
                            format!("definition `{name}` has a linear type and is used more than once"),
                        ));
                    }
                    let ty = g.ty.clone();
                    let imported = self.import_type(&ty)?;
                    return Ok((imported, ModExpr::top()));
                }
                Err(TypeError::new(
                    ErrorCode::Type,
                    span,
                    format!("unbound variable `{name}`"),
                ))
            }
            TermKind::Const(name) if name == "True" || name == "False" => {
                Ok((CType::Bool, ModExpr::top()))
            }
            TermKind::Const(name) => Err(TypeError::new(
                ErrorCode::Type,
                span,
                format!("unknown constant `{name}`"),
            )),
            TermKind::LabelRef(l) => {
                let b = self
                    .labels
                    .iter_mut()
                    .find(|b| b.label == *l)
                    .ok_or_else(|| {
                        TypeError::new(ErrorCode::Type, span, format!("unbound label {l}"))
                    })?;
                b.used += 1;
                if b.used > 1 {
                    return Err(TypeError::new(
                        ErrorCode::Lin,
                        span,
                        format!("label {l} used more than once"),
                    ));
                }
                Ok((CType::Wire(b.wire.clone()), ModExpr::top()))
            }
            TermKind::Unit => Ok((CType::Unit, ModExpr::top())),
            TermKind::Lambda(x, body) => {
                let ty = self.fresh_meta();
                self.vars.push(Binding {
                    name: x.clone(),
                    ty: ty.clone(),
                    used: 0,
                    span,
                });
                let (body_ty, body_mod) = self.check_term(body, globals)?;
                let b = self.vars.pop().expect("binder present");
                self.linear_checks.push((b.name, b.ty, b.used, span));
                let arrow = self.solver.fresh();
                self.solver
                    .constraints
                    .push(Constraint::Def(arrow, body_mod, span));
                Ok((
                    CType::Lolli(Box::new(ty), arrow, Box::new(body_ty)),
                    ModExpr::top(),
                ))
            }
            TermKind::App(f, a) => {
                // Immediate application of a lambda: learn the binder's type
                // from the argument. This keeps desugared single-binding
                // forms inferable without annotations.
                if let TermKind::Lambda(x, body) = &f.kind {
                    let (arg_ty, arg_mod) = self.check_term(a, globals)?;
                    self.vars.push(Binding {
                        name: x.clone(),
                        ty: arg_ty,
                        used: 0,
                        span: f.span,
                    });
                    let (body_ty, body_mod) = self.check_term(body, globals)?;
                    let b = self.vars.pop().expect("binder present");
                    self.linear_checks.push((b.name, b.ty, b.used, f.span));
                    return Ok((body_ty, arg_mod.meet(&body_mod)));
                }
                let (f_ty, f_mod) = self.check_term(f, globals)?;
                let (a_ty, a_mod) = self.check_term(a, globals)?;
                let dom = self.fresh_meta();
                let cod = self.fresh_meta();
                let arrow = self.solver.fresh();
                self.unify(
                    &f_ty,
                    &CType::Lolli(Box::new(dom.clone()), arrow, Box::new(cod.clone())),
                    span,
                )?;
                self.unify(&a_ty, &dom, a.span)?;
                Ok((cod, f_mod.meet(&a_mod).meet(&ModExpr::var(arrow))))
            }
            TermKind::Pair(a, b) => {
                let (ta, ma) = self.check_term(a, globals)?;
                let (tb, mb) = self.check_term(b, globals)?;
                Ok((CType::Tensor(Box::new(ta), Box::new(tb)), ma.meet(&mb)))
            }
            TermKind::LetPair(x, y, rhs, body) => {
                let (rhs_ty, rhs_mod) = self.check_term(rhs, globals)?;
                let ta = self.fresh_meta();
                let tb = self.fresh_meta();
                self.unify(
                    &rhs_ty,
                    &CType::Tensor(Box::new(ta.clone()), Box::new(tb.clone())),
                    rhs.span,
                )?;
                self.vars.push(Binding {
                    name: x.clone(),
                    ty: ta,
                    used: 0,
                    span,
                });
                self.vars.push(Binding {
                    name: y.clone(),
                    ty: tb,
                    used: 0,
                    span,
                });
                let (body_ty, body_mod) = self.check_term(body, globals)?;
                let by = self.vars.pop().expect("binder present");
                let bx = self.vars.pop().expect("binder present");
                self.linear_checks.push((bx.name, bx.ty, bx.used, span));
                self.linear_checks.push((by.name, by.ty, by.used, span));
                Ok((body_ty, rhs_mod.meet(&body_mod)))
            }
            TermKind::Lift(inner) => {
                // The suspended term may only capture duplicable bindings.
                let var_snapshot: Vec<usize> = self.vars.iter().map(|b| b.used).collect();
                let label_snapshot: Vec<usize> = self.labels.iter().map(|b| b.used).collect();
                let (inner_ty, inner_mod) = self.check_term(inner, globals)?;
                for (i, before) in var_snapshot.iter().enumerate() {
                    if self.vars[i].used > *before {
                        self.param_obligations.push((
                            self.vars[i].ty.clone(),
                            inner.span,
                            format!(
                                "`{}` is captured by a lifted term and must be duplicable",
                                self.vars[i].name
                            ),
                        ));
                    }
                }
                for (i, before) in label_snapshot.iter().enumerate() {
                    if self.labels[i].used > *before {
                        return Err(TypeError::new(
                            ErrorCode::Lin,
                            inner.span,
                            format!(
                                "label {} cannot be captured by a lifted term",
                                self.labels[i].label
                            ),
                        ));
                    }
                }
                let v = self.solver.fresh();
                self.solver
                    .constraints
                    .push(Constraint::Def(v, inner_mod, span));
                Ok((CType::Bang(v, Box::new(inner_ty)), ModExpr::top()))
            }
            TermKind::Force(inner) => {
                let (t, m) = self.check_term(inner, globals)?;
                let payload = self.fresh_meta();
                let v = self.solver.fresh();
                self.unify(&t, &CType::Bang(v, Box::new(payload.clone())), span)?;
                Ok((payload, m.meet(&ModExpr::var(v))))
            }
            TermKind::CircLit(s, c, u) => {
                self.check_simple(s, span)?;
                self.check_simple(u, span)?;
                if c.in_types() != s.flatten() || c.out_types() != u.flatten() {
                    return Err(TypeError::new(
                        ErrorCode::Type,
                        span,
                        "circuit literal does not match its declared interfaces",
                    ));
                }
                let v = self.solver.fresh();
                self.solver
                    .constraints
                    .push(Constraint::AtMost(v, c.modality()));
                Ok((CType::Circ(v, s.clone(), u.clone()), ModExpr::top()))
            }
            TermKind::Apply(circ, arg) => {
                let (circ_ty, circ_mod) = self.check_term(circ, globals)?;
                let (s, u, gamma) = self.expect_circ(&circ_ty, circ.span, "apply")?;
                let (arg_ty, arg_mod) = self.check_term(arg, globals)?;
                let expected = self.ctype_of_simple(&s);
                self.unify(&arg_ty, &expected, arg.span)?;
                Ok((
                    self.ctype_of_simple(&u),
                    circ_mod.meet(&arg_mod).meet(&ModExpr::var(gamma)),
                ))
            }
            TermKind::BoxTerm(shape, inner) => {
                self.check_simple(shape, span)?;
                let (t, m) = self.check_term(inner, globals)?;
                let dom = self.ctype_of_simple(shape);
                let cod = self.fresh_meta();
                let beta = self.solver.fresh();
                let gamma = self.solver.fresh();
                self.unify(
                    &t,
                    &CType::Bang(
                        beta,
                        Box::new(CType::Lolli(Box::new(dom), gamma, Box::new(cod.clone()))),
                    ),
                    span,
                )?;
                let out_shape = self.simple_of_ctype(&cod).ok_or_else(|| {
                    TypeError::new(
                        ErrorCode::Type,
                        span,
                        "cannot determine the output wire type of box; add a signature",
                    )
                })?;
                let v = self.solver.fresh();
                self.solver.constraints.push(Constraint::Def(
                    v,
                    ModExpr::var(beta).meet(&ModExpr::var(gamma)),
                    span,
                ));
                Ok((CType::Circ(v, shape.clone(), out_shape), m))
            }
            TermKind::Reverse(inner) => {
                let (t, m) = self.check_term(inner, globals)?;
                let (s, u, gamma) = self.expect_circ(&t, span, "reverse")?;
                self.solver.constraints.push(Constraint::AtLeast(
                    gamma,
                    Modality::Reversible,
                    span,
                    ErrorCode::Rev,
                    "reverse requires a reversible circuit".into(),
                ));
                Ok((CType::Circ(gamma, u, s), m))
            }
            TermKind::Controlled(spec, inner) => {
                let (t, m) = self.check_term(inner, globals)?;
                let (s, u, gamma) = self.expect_circ(&t, span, "controlled")?;
                if s != u {
                    return Err(TypeError::new(
                        ErrorCode::Ctrl,
                        span,
                        format!(
                            "controlled requires equal input and output types, found Circ(-)({s}, {u})"
                        ),
                    ));
                }
                self.solver.constraints.push(Constraint::AtLeast(
                    gamma,
                    Modality::Controllable,
                    span,
                    ErrorCode::Ctrl,
                    "controlled requires a controllable circuit".into(),
                ));
                let mut ty = s;
                for _ in 0..spec.len() {
                    ty = SimpleType::tensor(SimpleType::qubit(), ty);
                }
                let v = self.solver.pinned(Modality::Controllable, span);
                Ok((CType::Circ(v, ty.clone(), ty), m))
            }
            TermKind::WithComputed(setup, body) => {
                let (t_setup, m_setup) = self.check_term(setup, globals)?;
                let (dom, mid, gamma) = self.expect_circ(&t_setup, setup.span, "withComputed")?;
                self.solver.constraints.push(Constraint::AtLeast(
                    gamma,
                    Modality::Reversible,
                    setup.span,
                    ErrorCode::Wc,
                    "withComputed requires a reversible setup circuit".into(),
                ));
                let (t_body, m_body) = self.check_term(body, globals)?;
                let (s1, s2, delta) = self.expect_circ(&t_body, body.span, "withComputed")?;
                if s1 != s2 {
                    return Err(TypeError::new(
                        ErrorCode::Wc,
                        body.span,
                        format!(
                            "withComputed requires a square body circuit, found Circ(-)({s1}, {s2})"
                        ),
                    ));
                }
                if s1 != mid {
                    return Err(TypeError::new(
                        ErrorCode::Wc,
                        body.span,
                        format!(
                            "withComputed body interface {s1} does not match the setup output {mid}"
                        ),
                    ));
                }
                self.solver.constraints.push(Constraint::AtLeast(
                    delta,
                    Modality::Controllable,
                    body.span,
                    ErrorCode::Wc,
                    "withComputed requires a controllable body circuit".into(),
                ));
                let v = self.solver.pinned(Modality::Controllable, span);
                Ok((CType::Circ(v, dom.clone(), dom), m_setup.meet(&m_body)))
            }
        }
    }

    fn expect_circ(
        &mut self,
        ty: &CType,
        span: Span,
        what: &str,
    ) -> Result<(SimpleType, SimpleType, ModVarId), TypeError> {
        match self.shallow(ty) {
            CType::Circ(v, s, u) => Ok((s, u, v)),
            CType::Meta(_) => Err(TypeError::new(
                ErrorCode::Type,
                span,
                format!("cannot determine the circuit type consumed by {what}; add a signature"),
            )),
            other => Err(TypeError::new(
                ErrorCode::Type,
                span,
                format!("{what} expects a circuit, found {}", self.describe(&other)),
            )),
        }
    }

    /// Post-solving checks: linear binders used exactly once and lift
    /// captures duplicable.
    fn finish(&self) -> Result<(), TypeError> {
        for (ty, span, message) in &self.param_obligations {
            match self.is_param(ty) {
                Some(true) => {}
                Some(false) => {
                    return Err(TypeError::new(ErrorCode::Lin, *span, message.clone()))
                }
                None => {
                    return Err(TypeError::new(
                        ErrorCode::Type,
                        *span,
                        format!("{message}, but its type cannot be inferred"),
                    ))
                }
            }
        }
        for (name, ty, used, span) in &self.linear_checks {
            match self.is_param(ty) {
                Some(true) => {}
                Some(false) => {
                    if *used != 1 {
                        return Err(TypeError::new(
                            ErrorCode::Lin,
                            *span,
                            format!(
                                "linear variable `{name}` is used {used} times (must be exactly once)"
                            ),
                        ));
                    }
                }
                None => {
                    if *used != 1 {
                        return Err(TypeError::new(
                            ErrorCode::Type,
                            *span,
                            format!("cannot infer whether `{name}` is duplicable; add a signature"),
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Checks one definition against the earlier ones and returns its solved
/// judgment.
fn check_definition(
    gateset: &GateSet,
    globals: &mut Vec<GlobalDef>,
    def: &crate::syntax::Definition,
) -> Result<TypedJudgment, TypeError> {
    let mut checker = Checker::new(gateset);
    let (ty, modality) = checker.check_term(&def.body, globals)?;
    if let Some(declared) = &def.declared {
        let imported = checker.import_type(declared)?;
        checker.unify(&ty, &imported, def.span)?;
    }
    checker.finish()?;
    let assignment = checker.solver.solve()?;
    let zonked = checker.zonk(&ty).ok_or_else(|| {
        TypeError::new(
            ErrorCode::Type,
            def.span,
            format!("cannot infer the full type of `{}`; add a signature", def.name),
        )
    })?;
    let surface = checker.export_type(&zonked, &assignment);
    Ok(TypedJudgment {
        name: def.name.clone(),
        ty: surface,
        modality: modality.eval(&assignment),
    })
}

/// Checks every definition in order. Later definitions may reference earlier
/// ones; non-duplicable definitions at most once.
pub fn check_program(program: &Program, gateset: &GateSet) -> Result<Vec<TypedJudgment>, Vec<TypeError>> {
    let mut globals: Vec<GlobalDef> = Vec::new();
    let mut judgments = Vec::new();
    let mut errors = Vec::new();
    for def in &program.defs {
        match check_definition(gateset, &mut globals, def) {
            Ok(judgment) => {
                let mut param_checker = Checker::new(gateset);
                let param = param_checker
                    .import_type(&judgment.ty)
                    .ok()
                    .and_then(|ct| param_checker.is_param(&ct))
                    .unwrap_or(false);
                globals.push(GlobalDef {
                    name: def.name.clone(),
                    ty: judgment.ty.clone(),
                    param,
                    used: 0,
                });
                judgments.push(judgment);
            }
            Err(e) => {
                errors.push(e);
                // Recover with the declared type so later definitions still
                // check; otherwise later references report unbound.
                if let Some(declared) = &def.declared {
                    globals.push(GlobalDef {
                        name: def.name.clone(),
                        ty: declared.clone(),
                        param: true,
                        used: 0,
                    });
                }
            }
        }
    }
    if errors.is_empty() {
        Ok(judgments)
    } else {
        Err(errors)
    }
}

/// The inferred judgment of a configuration: the term's type under the
/// label context split by its free labels, the configuration modality
/// (circuit meet judgment), and the spectator context.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigJudgment {
    pub ty: TypeExpr,
    pub modality: Modality,
    pub rest: Vec<(Label, WireType)>,
}

fn free_labels(term: &Term, out: &mut HashSet<Label>) {
    match &term.kind {
        TermKind::LabelRef(l) => {
            out.insert(*l);
        }
        TermKind::Const(_) | TermKind::Var(_) | TermKind::Unit | TermKind::CircLit(_, _, _) => {}
        TermKind::Lambda(_, a)
        | TermKind::Lift(a)
        | TermKind::Force(a)
        | TermKind::BoxTerm(_, a)
        | TermKind::Reverse(a)
        | TermKind::Controlled(_, a) => free_labels(a, out),
        TermKind::App(a, b)
        | TermKind::Pair(a, b)
        | TermKind::Apply(a, b)
        | TermKind::WithComputed(a, b) => {
            free_labels(a, out);
            free_labels(b, out);
        }
        TermKind::LetPair(_, _, a, b) => {
            free_labels(a, out);
            free_labels(b, out);
        }
    }
}

fn infer_configuration_inner(
    gateset: &GateSet,
    cfg: &Configuration,
    expected: Option<&TypeExpr>,
) -> Result<ConfigJudgment, TypeError> {
    cfg.circuit
        .validate()
        .map_err(|e| TypeError::new(ErrorCode::Type, cfg.term.span, e.to_string()))?;
    let beta = cfg.circuit.modality();
    let mut free = HashSet::new();
    free_labels(&cfg.term, &mut free);
    let mut rest = Vec::new();
    let mut scope = Vec::new();
    for (l, w) in cfg.labels() {
        if free.contains(l) {
            scope.push(LabelBinding {
                label: *l,
                wire: w.clone(),
                used: 0,
            });
        } else {
            rest.push((*l, w.clone()));
        }
    }
    if free.len() != scope.len() {
        return Err(TypeError::new(
            ErrorCode::Type,
            cfg.term.span,
            "term references a label that is not live",
        ));
    }
    let mut checker = Checker::new(gateset);
    checker.labels = scope;
    let mut globals = Vec::new();
    let (ty, modality) = checker.check_term(&cfg.term, &mut globals)?;
    if let Some(expected) = expected {
        let imported = checker.import_type(expected)?;
        checker.unify(&ty, &imported, cfg.term.span)?;
    }
    for b in &checker.labels {
        if b.used != 1 {
            return Err(TypeError::new(
                ErrorCode::Lin,
                cfg.term.span,
                format!("label {} used {} times", b.label, b.used),
            ));
        }
    }
    checker.finish()?;
    let assignment = checker.solver.solve()?;
    let zonked = checker.zonk(&ty).ok_or_else(|| {
        TypeError::new(ErrorCode::Type, cfg.term.span, "ambiguous configuration type")
    })?;
    let surface = checker.export_type(&zonked, &assignment);
    Ok(ConfigJudgment {
        ty: surface,
        modality: beta.meet(modality.eval(&assignment)),
        rest,
    })
}

pub fn infer_configuration(
    gateset: &GateSet,
    cfg: &Configuration,
) -> Result<ConfigJudgment, TypeError> {
    infer_configuration_inner(gateset, cfg, None)
}

/// Checks a configuration against an expected source interface, result type
/// and spectator context, returning the configuration modality.
pub fn check_configuration(
    gateset: &GateSet,
    source: &SimpleType,
    cfg: &Configuration,
    expected: &TypeExpr,
    expected_rest: &[(Label, WireType)],
) -> Result<Modality, TypeError> {
    if cfg.circuit.in_types() != source.flatten() {
        return Err(TypeError::new(
            ErrorCode::Type,
            cfg.term.span,
            "circuit source interface does not match",
        ));
    }
    let j = infer_configuration_inner(gateset, cfg, Some(expected))?;
    if j.rest != expected_rest {
        return Err(TypeError::new(
            ErrorCode::Type,
            cfg.term.span,
            "spectator label context changed across a step",
        ));
    }
    Ok(j.modality)
}

/// Step observer that mechanically checks type preservation: every step must
/// keep the configuration's type, modality and spectator context.
pub struct PreservationMonitor<'g> {
    gateset: &'g GateSet,
    pub steps: u64,
    pub failures: Vec<String>,
}

impl<'g> PreservationMonitor<'g> {
    pub fn new(gateset: &'g GateSet) -> PreservationMonitor<'g> {
        PreservationMonitor {
            gateset,
            steps: 0,
            failures: Vec::new(),
        }
    }
}

/// `after` may strengthen circuit-literal modalities (a value inhabits any
/// annotation up to its own modality); everything else must match exactly.
fn compatible(before: &TypeExpr, after: &TypeExpr) -> bool {
    match (&before.kind, &after.kind) {
        (TypeKind::Unit, TypeKind::Unit) | (TypeKind::Bool, TypeKind::Bool) => true,
        (TypeKind::Wire(a), TypeKind::Wire(b)) => a == b,
        (TypeKind::Bang(ma, a), TypeKind::Bang(mb, b)) => ma == mb && compatible(a, b),
        (TypeKind::Lolli(a1, ma, b1), TypeKind::Lolli(a2, mb, b2)) => {
            ma == mb && compatible(a1, a2) && compatible(b1, b2)
        }
        (TypeKind::Circ(ma, s1, u1), TypeKind::Circ(mb, s2, u2)) => {
            s1 == s2 && u1 == u2 && mb >= ma
        }
        (TypeKind::Tensor(a1, b1), TypeKind::Tensor(a2, b2)) => {
            compatible(a1, a2) && compatible(b1, b2)
        }
        _ => false,
    }
}

impl<'g> crate::eval::StepMonitor for PreservationMonitor<'g> {
    fn on_step(&mut self, before: &Configuration, after: &Configuration) {
        self.steps += 1;
        let jb = match infer_configuration(self.gateset, before) {
            Ok(j) => j,
            Err(e) => {
                self.failures
                    .push(format!("step {}: before ill-typed: {e}", self.steps));
                return;
            }
        };
        let ja = match infer_configuration(self.gateset, after) {
            Ok(j) => j,
            Err(e) => {
                self.failures
                    .push(format!("step {}: after ill-typed: {e}", self.steps));
                return;
            }
        };
        if ja.modality != jb.modality {
            self.failures.push(format!(
                "step {}: modality changed {} -> {}",
                self.steps, jb.modality, ja.modality
            ));
        }
        if ja.rest != jb.rest {
            self.failures
                .push(format!("step {}: spectator context changed", self.steps));
        }
        if !compatible(&jb.ty, &ja.ty) {
            self.failures.push(format!(
                "step {}: type changed {} -> {}",
                self.steps,
                crate::syntax::print_type(&jb.ty),
                crate::syntax::print_type(&ja.ty)
            ));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::default_gateset;
    use crate::syntax::{elaborate_gates, parse_program};
    use crate::wire::FreshSupply;

    fn check_src(src: &str) -> Result<Vec<TypedJudgment>, Vec<TypeError>> {
        let gs = default_gateset();
        let mut supply = FreshSupply::new();
        let program = parse_program(src).unwrap();
        let program = elaborate_gates(&program, &gs, &mut supply)
            .map_err(|e| vec![TypeError::new(ErrorCode::Type, e.span, e.to_string())])?;
        check_program(&program, &gs)
    }

    #[test]
    fn identity_lambda_is_controllable() {
        let j = check_src("f : Qubit -o Qubit\nf x = x\n").unwrap();
        assert_eq!(
            crate::syntax::print_type(&j[0].ty),
            "Qubit -o2 Qubit"
        );
        assert_eq!(j[0].modality, Modality::Controllable);
    }

    #[test]
    fn section2_swap_programs_check() {
        let src = "\
f : !(Qubit * Qubit -o Qubit * Qubit)
f input = let (x, y) = input in (y, x)

g : !(Qubit * Qubit -o Qubit * Qubit)
g input = let (x, y) = input in Swap x y
";
        let j = check_src(src).unwrap();
        assert_eq!(j.len(), 2);
        assert_eq!(j[0].modality, Modality::Controllable);
        assert_eq!(
            crate::syntax::print_type(&j[1].ty),
            "!2(Qubit * Qubit -o2 Qubit * Qubit)"
        );
    }

    #[test]
    fn linear_variable_must_be_used_once() {
        let errs = check_src("f : Qubit -o Qubit * Qubit\nf x = (x, x)\n").unwrap_err();
        assert_eq!(errs[0].code, ErrorCode::Lin);
        let errs = check_src("f : Qubit -o Unit\nf x = ()\n").unwrap_err();
        assert_eq!(errs[0].code, ErrorCode::Lin);
    }

    #[test]
    fn parameter_bindings_are_duplicable() {
        let j = check_src("f : Bool -o Bool * Bool\nf b = (b, b)\n").unwrap();
        assert_eq!(j.len(), 1);
    }

    #[test]
    fn lift_cannot_capture_linear_variables() {
        let errs =
            check_src("f : Qubit -o !(Unit -o Qubit)\nf q = lift (\\u . q)\n").unwrap_err();
        assert_eq!(errs[0].code, ErrorCode::Lin);
    }

    #[test]
    fn reverse_of_measurement_circuit_is_rejected() {
        let errs = check_src(
            "bad = reverse (box Qubit (lift (\\q . Meas q)))\n",
        )
        .unwrap_err();
        assert_eq!(errs[0].code, ErrorCode::Rev);
        assert!(errs[0].span.line >= 1);
    }

    #[test]
    fn control_of_init_circuit_is_rejected() {
        let errs = check_src(
            "bad = controlled (box Unit (lift (\\u . Init0 u)))\n",
        )
        .unwrap_err();
        // Init0 makes the boxed circuit non-square as well; squareness is
        // reported first.
        assert_eq!(errs[0].code, ErrorCode::Ctrl);
    }

    #[test]
    fn control_of_reversible_square_circuit_is_rejected_on_modality() {
        let errs = check_src(
            "bad = controlled (box Qubit (lift (\\q . apply(reverse (box Unit (lift (\\u . Init0 u))), q) )))\n",
        )
        .unwrap_err();
        assert!(matches!(errs[0].code, ErrorCode::Ctrl | ErrorCode::Type));
    }

    #[test]
    fn values_have_modality_two() {
        // The lambda under the lift is a value, so the lift stores modality
        // 2 even though forcing and applying it would measure.
        let j = check_src("v = lift (\\q . Meas q)\n").unwrap();
        assert_eq!(j[0].modality, Modality::Controllable);
        assert_eq!(
            crate::syntax::print_type(&j[0].ty),
            "!2(Qubit -o0 Bit)"
        );
    }

    #[test]
    fn app_modality_is_meet() {
        // Measuring makes the arrow modality 0, and forcing it drops the
        // judgment modality of an application to 0.
        let j = check_src(
            "m : !(Qubit -o Bit)\nm q = Meas q\n\nuse : Qubit -o Bit\nuse q = force m q\n",
        )
        .unwrap();
        assert_eq!(j[1].modality, Modality::Controllable);
        assert_eq!(
            crate::syntax::print_type(&j[1].ty),
            "Qubit -o0 Bit"
        );
    }

    #[test]
    fn duplicate_use_of_linear_definition_is_rejected() {
        let errs = check_src(
            "c : Qubit -o Qubit\nc x = H x\n\nd = (c, c)\n",
        )
        .unwrap_err();
        assert_eq!(errs[0].code, ErrorCode::Lin);
    }

    #[test]
    fn unknown_wire_type_is_reported() {
        let errs = check_src("f : Qutrit -o Qutrit\nf x = x\n").unwrap_err();
        assert_eq!(errs[0].code, ErrorCode::Type);
        assert!(errs[0].message.contains("Qutrit"));
    }

    #[test]
    fn weakening_of_parameter_bindings() {
        // An unused Bool binding changes nothing.
        let j1 = check_src("f : Qubit -o Qubit\nf x = H x\n").unwrap();
        let j2 = check_src("f : Bool -o Qubit -o Qubit\nf b x = H x\n").unwrap();
        assert_eq!(j1[0].modality, j2[0].modality);
    }

    #[test]
    fn box_modality_is_exact_but_gate_literals_have_slack() {
        // box yields exactly the meet of its lift and arrow modalities, so
        // a lower annotation on the box result is refused ...
        let errs =
            check_src("c : Circ1(Qubit, Qubit)\nc = box Qubit (lift (\\q . H q))\n").unwrap_err();
        assert_eq!(errs[0].code, ErrorCode::Mod);
        // ... while a gate literal inside the body inhabits the lower
        // annotation, so the arrow itself may be declared reversible-only.
        let j = check_src("use : Qubit -o1 Qubit\nuse q = H q\n").unwrap();
        assert_eq!(
            crate::syntax::print_type(&j[0].ty),
            "Qubit -o1 Qubit"
        );
    }

    #[test]
    fn arrow_annotation_must_match_exactly() {
        let errs = check_src("f : Qubit -o1 Qubit\nf x = x\n").unwrap_err();
        assert_eq!(errs[0].code, ErrorCode::Mod);
    }
}
