//! Recursive-descent parser. Application is left-associative, tensor and the
//! linear arrow are right-associative, and prefix forms (`lift`, `force`,
//! `box`, `reverse`, `controlled`, `withComputed`) take atomic arguments. A
//! token in column 1 always starts a new top-level definition.

use thiserror::Error;

use crate::circuit::ControlSpec;
use crate::wire::{SimpleType, WireType};

use super::lexer::{tokenize, Tok, Token};
use super::{Definition, Program, Span, Term, TermKind, TypeExpr, TypeKind};

#[derive(Debug, Error, PartialEq)]
#[error("{span}: {message}")]
pub struct ParseError {
    pub span: Span,
    pub message: String,
}

impl From<super::lexer::LexError> for ParseError {
    fn from(e: super::lexer::LexError) -> ParseError {
        ParseError {
            span: e.span,
            message: format!("unexpected character `{}`", e.found),
        }
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    /// When set, column-1 tokens end the current definition body. Off for
    /// standalone term parsing.
    column_rule: bool,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    /// Like `peek`, but column-1 tokens end the current definition body.
    fn peek_in_def(&self) -> Option<&Token> {
        match self.tokens.get(self.pos) {
            Some(t) if self.column_rule && t.span.col == 1 => None,
            other => other,
        }
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> Span {
        self.peek()
            .map(|t| t.span)
            .or_else(|| self.tokens.last().map(|t| t.span))
            .unwrap_or_default()
    }

    fn fail<T>(&self, expected: &str) -> Result<T, ParseError> {
        let (span, found) = match self.peek() {
            Some(t) => (t.span, t.tok.describe()),
            None => (self.here(), "end of input".to_string()),
        };
        Err(ParseError {
            span,
            message: format!("expected {expected}, found {found}"),
        })
    }

    fn expect(&mut self, tok: &Tok, expected: &str) -> Result<Span, ParseError> {
        match self.peek_in_def() {
            Some(t) if &t.tok == tok => Ok(self.bump().unwrap().span),
            _ => self.fail(expected),
        }
    }

    fn ident_in_def(&mut self, expected: &str) -> Result<(String, Span), ParseError> {
        match self.peek_in_def() {
            Some(Token {
                tok: Tok::Ident(_), ..
            }) => {
                let t = self.bump().unwrap();
                match t.tok {
                    Tok::Ident(name) => Ok((name, t.span)),
                    _ => unreachable!(),
                }
            }
            _ => self.fail(expected),
        }
    }

    fn binder(&mut self) -> Result<(String, Span), ParseError> {
        let (name, span) = self.ident_in_def("a variable name")?;
        if name.starts_with(|c: char| c.is_ascii_uppercase()) {
            return Err(ParseError {
                span,
                message: format!("binder `{name}` must start with a lowercase letter"),
            });
        }
        Ok((name, span))
    }
}

// ----- types -----

fn parse_type(p: &mut Parser) -> Result<TypeExpr, ParseError> {
    let left = parse_tensor_type(p)?;
    if let Some(Token {
        tok: Tok::Lolli(m), ..
    }) = p.peek_in_def()
    {
        let m = *m;
        p.bump();
        let right = parse_type(p)?;
        let span = left.span.merge(right.span);
        return Ok(TypeExpr::new(
            TypeKind::Lolli(Box::new(left), m, Box::new(right)),
            span,
        ));
    }
    Ok(left)
}

fn parse_tensor_type(p: &mut Parser) -> Result<TypeExpr, ParseError> {
    let left = parse_atom_type(p)?;
    if let Some(Token { tok: Tok::Star, .. }) = p.peek_in_def() {
        p.bump();
        let right = parse_tensor_type(p)?;
        let span = left.span.merge(right.span);
        return Ok(TypeExpr::new(
            TypeKind::Tensor(Box::new(left), Box::new(right)),
            span,
        ));
    }
    Ok(left)
}

fn parse_atom_type(p: &mut Parser) -> Result<TypeExpr, ParseError> {
    match p.peek_in_def().map(|t| t.tok.clone()) {
        Some(Tok::LParen) => {
            let start = p.bump().unwrap().span;
            let inner = parse_type(p)?;
            let end = p.expect(&Tok::RParen, "`)`")?;
            Ok(TypeExpr::new(inner.kind, start.merge(end)))
        }
        Some(Tok::Bang(m)) => {
            let start = p.bump().unwrap().span;
            let inner = parse_atom_type(p)?;
            let span = start.merge(inner.span);
            Ok(TypeExpr::new(TypeKind::Bang(m, Box::new(inner)), span))
        }
        Some(Tok::KwCirc(m)) => {
            let start = p.bump().unwrap().span;
            p.expect(&Tok::LParen, "`(` after `Circ`")?;
            let s = parse_type(p)?;
            let s_simple = to_simple(&s)?;
            p.expect(&Tok::Comma, "`,` between circuit interface types")?;
            let u = parse_type(p)?;
            let u_simple = to_simple(&u)?;
            let end = p.expect(&Tok::RParen, "`)`")?;
            Ok(TypeExpr::new(
                TypeKind::Circ(m, s_simple, u_simple),
                start.merge(end),
            ))
        }
        Some(Tok::Ident(name)) => {
            let span = p.bump().unwrap().span;
            let kind = match name.as_str() {
                "Unit" => TypeKind::Unit,
                "Bool" => TypeKind::Bool,
                _ => TypeKind::Wire(name),
            };
            Ok(TypeExpr::new(kind, span))
        }
        _ => p.fail("a type"),
    }
}

/// Circuit interface types must be simple: unit, wires and tensors.
fn to_simple(ty: &TypeExpr) -> Result<SimpleType, ParseError> {
    match &ty.kind {
        TypeKind::Unit => Ok(SimpleType::Unit),
        TypeKind::Wire(name) => Ok(SimpleType::Wire(WireType::new(name.clone()))),
        TypeKind::Tensor(a, b) => Ok(SimpleType::tensor(to_simple(a)?, to_simple(b)?)),
        _ => Err(ParseError {
            span: ty.span,
            message: "circuit interfaces must be simple types (wires and tensors)".into(),
        }),
    }
}

// ----- terms -----

pub(super) fn parse_term_inner(p: &mut Parser) -> Result<Term, ParseError> {
    match p.peek_in_def().map(|t| t.tok.clone()) {
        Some(Tok::Lambda) | Some(Tok::KwFun) => {
            let start = p.bump().unwrap().span;
            let mut binders = vec![p.binder()?];
            while let Some(Token {
                tok: Tok::Ident(_), ..
            }) = p.peek_in_def()
            {
                binders.push(p.binder()?);
            }
            match p.peek_in_def().map(|t| t.tok.clone()) {
                Some(Tok::Dot) | Some(Tok::Arrow) => {
                    p.bump();
                }
                _ => return p.fail("`.` or `->` after lambda binders"),
            }
            let body = parse_term_inner(p)?;
            let span = start.merge(body.span);
            let mut term = body;
            for (name, _) in binders.into_iter().rev() {
                term = Term::new(TermKind::Lambda(name, Box::new(term)), span);
            }
            Ok(term)
        }
        Some(Tok::KwLet) => {
            let start = p.bump().unwrap().span;
            p.expect(&Tok::LParen, "`(` after `let`")?;
            let (x, _) = p.binder()?;
            p.expect(&Tok::Comma, "`,` between let binders")?;
            let (y, _) = p.binder()?;
            p.expect(&Tok::RParen, "`)`")?;
            p.expect(&Tok::Equals, "`=`")?;
            let rhs = parse_term_inner(p)?;
            p.expect(&Tok::KwIn, "`in`")?;
            let body = parse_term_inner(p)?;
            let span = start.merge(body.span);
            Ok(Term::new(
                TermKind::LetPair(x, y, Box::new(rhs), Box::new(body)),
                span,
            ))
        }
        _ => parse_app_chain(p),
    }
}

/// A prefix form (`lift a`, `box S a`, ...) or an atom, followed by any
/// number of application arguments.
fn parse_app_chain(p: &mut Parser) -> Result<Term, ParseError> {
    let mut term = parse_head(p)?;
    while let Some(tok) = p.peek_in_def().map(|t| t.tok.clone()) {
        match tok {
            Tok::Ident(_) | Tok::LParen | Tok::KwApply => {
                let arg = parse_atom(p)?;
                let span = term.span.merge(arg.span);
                term = Term::new(TermKind::App(Box::new(term), Box::new(arg)), span);
            }
            _ => break,
        }
    }
    Ok(term)
}

fn parse_head(p: &mut Parser) -> Result<Term, ParseError> {
    match p.peek_in_def().map(|t| t.tok.clone()) {
        Some(Tok::KwLift) => {
            let start = p.bump().unwrap().span;
            let arg = parse_atom(p)?;
            let span = start.merge(arg.span);
            Ok(Term::new(TermKind::Lift(Box::new(arg)), span))
        }
        Some(Tok::KwForce) => {
            let start = p.bump().unwrap().span;
            let arg = parse_atom(p)?;
            let span = start.merge(arg.span);
            Ok(Term::new(TermKind::Force(Box::new(arg)), span))
        }
        Some(Tok::KwReverse) => {
            let start = p.bump().unwrap().span;
            let arg = parse_atom(p)?;
            let span = start.merge(arg.span);
            Ok(Term::new(TermKind::Reverse(Box::new(arg)), span))
        }
        Some(Tok::KwControlled) => {
            let start = p.bump().unwrap().span;
            let spec = match p.peek_in_def().map(|t| t.tok.clone()) {
                Some(Tok::CtrlSpec(gadgets)) => {
                    p.bump();
                    ControlSpec::new(gadgets)
                }
                _ => ControlSpec::black(),
            };
            let arg = parse_atom(p)?;
            let span = start.merge(arg.span);
            Ok(Term::new(TermKind::Controlled(spec, Box::new(arg)), span))
        }
        Some(Tok::KwWithComputed) => {
            let start = p.bump().unwrap().span;
            let setup = parse_atom(p)?;
            let body = parse_atom(p)?;
            let span = start.merge(body.span);
            Ok(Term::new(
                TermKind::WithComputed(Box::new(setup), Box::new(body)),
                span,
            ))
        }
        Some(Tok::KwBox) => {
            let start = p.bump().unwrap().span;
            let ty = parse_atom_type(p)?;
            let simple = to_simple(&ty)?;
            let arg = parse_atom(p)?;
            let span = start.merge(arg.span);
            Ok(Term::new(TermKind::BoxTerm(simple, Box::new(arg)), span))
        }
        _ => parse_atom(p),
    }
}

fn parse_atom(p: &mut Parser) -> Result<Term, ParseError> {
    match p.peek_in_def().map(|t| t.tok.clone()) {
        Some(Tok::Ident(name)) => {
            let span = p.bump().unwrap().span;
            let kind = if name.starts_with(|c: char| c.is_ascii_uppercase()) {
                TermKind::Const(name)
            } else {
                TermKind::Var(name)
            };
            Ok(Term::new(kind, span))
        }
        Some(Tok::KwApply) => {
            let start = p.bump().unwrap().span;
            p.expect(&Tok::LParen, "`(` after `apply`")?;
            let circuit = parse_term_inner(p)?;
            p.expect(&Tok::Comma, "`,` between apply arguments")?;
            let arg = parse_term_inner(p)?;
            let end = p.expect(&Tok::RParen, "`)`")?;
            Ok(Term::new(
                TermKind::Apply(Box::new(circuit), Box::new(arg)),
                start.merge(end),
            ))
        }
        Some(Tok::LParen) => {
            let start = p.bump().unwrap().span;
            if let Some(Token { tok: Tok::RParen, .. }) = p.peek_in_def() {
                let end = p.bump().unwrap().span;
                return Ok(Term::new(TermKind::Unit, start.merge(end)));
            }
            let first = parse_term_inner(p)?;
            match p.peek_in_def().map(|t| t.tok.clone()) {
                Some(Tok::Comma) => {
                    p.bump();
                    let second = parse_term_inner(p)?;
                    let end = p.expect(&Tok::RParen, "`)`")?;
                    Ok(Term::new(
                        TermKind::Pair(Box::new(first), Box::new(second)),
                        start.merge(end),
                    ))
                }
                Some(Tok::RParen) => {
                    let end = p.bump().unwrap().span;
                    Ok(Term::new(first.kind, start.merge(end)))
                }
                _ => p.fail("`,` or `)`"),
            }
        }
        _ => p.fail("a term"),
    }
}

// ----- programs -----

pub fn parse_term(source: &str) -> Result<Term, ParseError> {
    let tokens = tokenize(source)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        column_rule: false,
    };
    let term = parse_term_inner(&mut p)?;
    if p.peek().is_some() {
        return p.fail("end of input");
    }
    Ok(term)
}

pub fn parse_program(source: &str) -> Result<Program, ParseError> {
    let tokens = tokenize(source)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        column_rule: true,
    };
    let mut signatures: Vec<(String, TypeExpr, Span)> = Vec::new();
    let mut program = Program::default();

    while let Some(first) = p.peek().cloned() {
        if first.span.col != 1 {
            return Err(ParseError {
                span: first.span,
                message: "top-level definitions must start in column 1".into(),
            });
        }
        let (name, name_span) = match first.tok {
            Tok::Ident(ref n) => {
                p.bump();
                (n.clone(), first.span)
            }
            _ => return p.fail("a definition name"),
        };
        if name.starts_with(|c: char| c.is_ascii_uppercase()) {
            return Err(ParseError {
                span: name_span,
                message: format!("definition name `{name}` must start with a lowercase letter"),
            });
        }
        match p.peek_in_def().map(|t| t.tok.clone()) {
            Some(Tok::Colon) => {
                p.bump();
                let ty = parse_type(&mut p)?;
                if signatures.iter().any(|(n, _, _)| n == &name) {
                    return Err(ParseError {
                        span: name_span,
                        message: format!("duplicate signature for `{name}`"),
                    });
                }
                signatures.push((name, ty, name_span));
            }
            Some(Tok::Ident(_)) | Some(Tok::Equals) => {
                let mut params = Vec::new();
                while let Some(Token {
                    tok: Tok::Ident(_), ..
                }) = p.peek_in_def()
                {
                    params.push(p.binder()?);
                }
                p.expect(&Tok::Equals, "`=`")?;
                let body = parse_term_inner(&mut p)?;
                let span = name_span.merge(body.span);
                if program.find(&name).is_some() {
                    return Err(ParseError {
                        span: name_span,
                        message: format!("duplicate definition of `{name}`"),
                    });
                }
                let declared = signatures
                    .iter()
                    .position(|(n, _, _)| n == &name)
                    .map(|i| signatures.remove(i).1);
                // `name x y = body` sugar: lambdas, lifted when the declared
                // type is banged.
                let mut term = body;
                if !params.is_empty() {
                    let tspan = term.span;
                    for (param, _) in params.into_iter().rev() {
                        term = Term::new(TermKind::Lambda(param, Box::new(term)), tspan);
                    }
                    if matches!(
                        declared.as_ref().map(|t| &t.kind),
                        Some(TypeKind::Bang(_, _))
                    ) {
                        term = Term::new(TermKind::Lift(Box::new(term)), tspan);
                    }
                }
                program.defs.push(Definition {
                    name,
                    declared,
                    body: term,
                    span,
                });
            }
            _ => return p.fail("`:` or `=` in a definition"),
        }
    }

    if let Some((name, _, span)) = signatures.into_iter().next() {
        return Err(ParseError {
            span,
            message: format!("signature for `{name}` has no matching definition"),
        });
    }
    Ok(program)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::ControlGadget;

    #[test]
    fn section_swap_programs_parse() {
        let src = "\
f : !(Qubit * Qubit -o Qubit * Qubit)
f input = let (x, y) = input in (y, x)

g : !(Qubit * Qubit -o Qubit * Qubit)
g input = let (x, y) = input in Swap x y
";
        let prog = parse_program(src).unwrap();
        assert_eq!(prog.defs.len(), 2);
        // f desugars to lift (\input . let ...) because its type is banged.
        let f = prog.find("f").unwrap();
        match &f.body.kind {
            TermKind::Lift(inner) => match &inner.kind {
                TermKind::Lambda(x, body) => {
                    assert_eq!(x, "input");
                    assert!(matches!(body.kind, TermKind::LetPair(_, _, _, _)));
                }
                other => panic!("expected lambda, got {other:?}"),
            },
            other => panic!("expected lift, got {other:?}"),
        }
        // g's body is Swap applied to x then y.
        let g = prog.find("g").unwrap();
        if let TermKind::Lift(inner) = &g.body.kind {
            if let TermKind::Lambda(_, body) = &inner.kind {
                if let TermKind::LetPair(_, _, _, body) = &body.kind {
                    match &body.kind {
                        TermKind::App(f1, y) => {
                            assert!(matches!(y.kind, TermKind::Var(_)));
                            match &f1.kind {
                                TermKind::App(swap, x) => {
                                    assert!(matches!(&swap.kind, TermKind::Const(n) if n == "Swap"));
                                    assert!(matches!(x.kind, TermKind::Var(_)));
                                }
                                other => panic!("expected inner app, got {other:?}"),
                            }
                        }
                        other => panic!("expected app, got {other:?}"),
                    }
                    return;
                }
            }
        }
        panic!("unexpected g shape: {:?}", g.body);
    }

    #[test]
    fn controlled_defaults_to_one_black_dot() {
        let src = "ctrl_ccz = controlled my_ccz\n";
        let prog = parse_program(src).unwrap();
        match &prog.defs[0].body.kind {
            TermKind::Controlled(spec, arg) => {
                assert_eq!(spec, &ControlSpec::black());
                assert!(matches!(&arg.kind, TermKind::Var(n) if n == "my_ccz"));
            }
            other => panic!("expected controlled, got {other:?}"),
        }
    }

    #[test]
    fn white_dot_spec() {
        let term = parse_term("controlled[-] m").unwrap();
        match term.kind {
            TermKind::Controlled(spec, _) => {
                assert_eq!(spec.gadgets, vec![ControlGadget::White]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn application_is_left_associative() {
        let term = parse_term("f x y").unwrap();
        match term.kind {
            TermKind::App(fx, _) => assert!(matches!(fx.kind, TermKind::App(_, _))),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn tensor_type_is_right_associative() {
        let src = "x : Qubit * Qubit * Qubit\nx = y\n";
        let prog = parse_program(src).unwrap();
        match &prog.defs[0].declared.as_ref().unwrap().kind {
            TypeKind::Tensor(_, rest) => {
                assert!(matches!(rest.kind, TypeKind::Tensor(_, _)));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn box_takes_a_type_argument() {
        let term = parse_term("box (Qubit * Qubit) f").unwrap();
        match term.kind {
            TermKind::BoxTerm(ty, _) => assert_eq!(ty.wire_count(), 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn circ_interfaces_must_be_simple() {
        let err = parse_program("c : Circ(Qubit -o Qubit, Qubit)\nc = x\n").unwrap_err();
        assert!(err.message.contains("simple"));
    }

    #[test]
    fn column_one_ends_a_body() {
        let src = "a = f\nb = g\n";
        let prog = parse_program(src).unwrap();
        assert_eq!(prog.defs.len(), 2);
        assert!(matches!(&prog.defs[0].body.kind, TermKind::Var(n) if n == "f"));
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse_program("a = (x\n").unwrap_err();
        assert!(err.span.line >= 1 && err.span.col >= 1);
        let err = parse_program("a = let x = y in z\n").unwrap_err();
        assert_eq!(err.span.line, 1);
    }

    #[test]
    fn unmatched_signature_is_rejected() {
        let err = parse_program("a : Qubit\n").unwrap_err();
        assert!(err.message.contains("no matching definition"));
    }
}
