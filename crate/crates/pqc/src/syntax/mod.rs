//! Concrete syntax for `.pqc` programs: lexer, parser, pretty-printer and
//! gate-library elaboration.
//!
//! A program is a sequence of top-level definitions. A definition is an
//! optional signature line `name : TYPE` followed by a binding
//! `name arg1 .. argN = term`; a new definition starts whenever a token sits
//! in column 1. Lambda is written `\x . M`, tensor `*`, the linear arrow
//! `-o`, and modality subscripts are plain digits (`!2`, `-o1`, `Circ2`);
//! omitted modalities are inference holes. `--` starts a line comment.

pub mod elaborate;
mod lexer;
mod parser;
mod pretty;

pub use elaborate::{elaborate_gates, elaborate_term, ElabError};
pub use lexer::{tokenize, LexError, Tok, Token};
pub use parser::{parse_program, parse_term, ParseError};
pub use pretty::{print_term, print_type};

use std::fmt;

use crate::circuit::{Circuit, ControlSpec};
use crate::modality::Modality;
use crate::wire::{Label, SimpleType};

/// A source region, 1-based line and column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl Span {
    pub fn point(line: u32, col: u32) -> Span {
        Span {
            line,
            col,
            end_line: line,
            end_col: col,
        }
    }

    pub fn merge(self, other: Span) -> Span {
        Span {
            line: self.line,
            col: self.col,
            end_line: other.end_line,
            end_col: other.end_col,
        }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TypeKind {
    Unit,
    Bool,
    Wire(String),
    Bang(Option<Modality>, Box<TypeExpr>),
    Lolli(Box<TypeExpr>, Option<Modality>, Box<TypeExpr>),
    Circ(Option<Modality>, SimpleType, SimpleType),
    Tensor(Box<TypeExpr>, Box<TypeExpr>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypeExpr {
    pub kind: TypeKind,
    pub span: Span,
}

impl TypeExpr {
    pub fn new(kind: TypeKind, span: Span) -> TypeExpr {
        TypeExpr { kind, span }
    }

    /// Structural equality ignoring spans.
    pub fn same_type(&self, other: &TypeExpr) -> bool {
        match (&self.kind, &other.kind) {
            (TypeKind::Unit, TypeKind::Unit) | (TypeKind::Bool, TypeKind::Bool) => true,
            (TypeKind::Wire(a), TypeKind::Wire(b)) => a == b,
            (TypeKind::Bang(ma, a), TypeKind::Bang(mb, b)) => ma == mb && a.same_type(b),
            (TypeKind::Lolli(a1, ma, a2), TypeKind::Lolli(b1, mb, b2)) => {
                ma == mb && a1.same_type(b1) && a2.same_type(b2)
            }
            (TypeKind::Circ(ma, s1, u1), TypeKind::Circ(mb, s2, u2)) => {
                ma == mb && s1 == s2 && u1 == u2
            }
            (TypeKind::Tensor(a1, a2), TypeKind::Tensor(b1, b2)) => {
                a1.same_type(b1) && a2.same_type(b2)
            }
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TermKind {
    /// A constant: `True`, `False`, or a gate name before elaboration.
    Const(String),
    Var(String),
    /// A live wire reference; arises only during evaluation.
    LabelRef(Label),
    Unit,
    Lambda(String, Box<Term>),
    App(Box<Term>, Box<Term>),
    Pair(Box<Term>, Box<Term>),
    /// `let (x, y) = rhs in body`
    LetPair(String, String, Box<Term>, Box<Term>),
    Lift(Box<Term>),
    Force(Box<Term>),
    /// A circuit literal; arises from gate elaboration or evaluation, never
    /// from parsed source.
    CircLit(SimpleType, Circuit, SimpleType),
    Apply(Box<Term>, Box<Term>),
    BoxTerm(SimpleType, Box<Term>),
    Reverse(Box<Term>),
    Controlled(ControlSpec, Box<Term>),
    WithComputed(Box<Term>, Box<Term>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub kind: TermKind,
    pub span: Span,
}

impl Term {
    pub fn new(kind: TermKind, span: Span) -> Term {
        Term { kind, span }
    }

    /// Syntactic values: constants, variables, labels, unit, lambdas, pairs
    /// of values, suspended lifts, and circuit literals.
    pub fn is_value(&self) -> bool {
        match &self.kind {
            TermKind::Const(_)
            | TermKind::Var(_)
            | TermKind::LabelRef(_)
            | TermKind::Unit
            | TermKind::Lambda(_, _)
            | TermKind::Lift(_)
            | TermKind::CircLit(_, _, _) => true,
            TermKind::Pair(a, b) => a.is_value() && b.is_value(),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Definition {
    pub name: String,
    pub declared: Option<TypeExpr>,
    pub body: Term,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Program {
    pub defs: Vec<Definition>,
}

impl Program {
    pub fn find(&self, name: &str) -> Option<&Definition> {
        self.defs.iter().find(|d| d.name == name)
    }
}
