//! Precedence-aware printing; `parse(print(t))` reproduces the tree for
//! every parseable term and type.

use super::{Term, TermKind, TypeExpr, TypeKind};
use crate::modality::Modality;

fn mod_suffix(m: &Option<Modality>) -> String {
    match m {
        Some(m) => m.to_string(),
        None => String::new(),
    }
}

pub fn print_type(ty: &TypeExpr) -> String {
    print_type_prec(ty, 0)
}

// Precedence levels: 0 = arrow, 1 = tensor, 2 = atom.
fn print_type_prec(ty: &TypeExpr, prec: u8) -> String {
    let (text, level) = match &ty.kind {
        TypeKind::Unit => ("Unit".to_string(), 2),
        TypeKind::Bool => ("Bool".to_string(), 2),
        TypeKind::Wire(name) => (name.clone(), 2),
        TypeKind::Bang(m, inner) => (
            format!("!{}{}", mod_suffix(m), print_type_prec(inner, 2)),
            2,
        ),
        TypeKind::Circ(m, s, u) => (format!("Circ{}({s}, {u})", mod_suffix(m)), 2),
        TypeKind::Tensor(a, b) => (
            format!(
                "{} * {}",
                print_type_prec(a, 2),
                print_type_prec(b, 1)
            ),
            1,
        ),
        TypeKind::Lolli(a, m, b) => (
            format!(
                "{} -o{} {}",
                print_type_prec(a, 1),
                mod_suffix(m),
                print_type_prec(b, 0)
            ),
            0,
        ),
    };
    if level < prec {
        format!("({text})")
    } else {
        text
    }
}

pub fn print_term(term: &Term) -> String {
    print_term_prec(term, 0)
}

// Precedence levels: 0 = binder/prefix forms, 1 = application, 2 = atom.
fn print_term_prec(term: &Term, prec: u8) -> String {
    let (text, level) = match &term.kind {
        TermKind::Const(name) => (name.clone(), 2),
        TermKind::Var(name) => (name.clone(), 2),
        TermKind::LabelRef(l) => (l.to_string(), 2),
        TermKind::Unit => ("()".to_string(), 2),
        TermKind::Pair(a, b) => (
            format!("({}, {})", print_term_prec(a, 0), print_term_prec(b, 0)),
            2,
        ),
        TermKind::Apply(c, a) => (
            format!(
                "apply({}, {})",
                print_term_prec(c, 0),
                print_term_prec(a, 0)
            ),
            2,
        ),
        TermKind::Lambda(x, body) => (format!("\\{x} . {}", print_term_prec(body, 0)), 0),
        TermKind::LetPair(x, y, rhs, body) => (
            format!(
                "let ({x}, {y}) = {} in {}",
                print_term_prec(rhs, 0),
                print_term_prec(body, 0)
            ),
            0,
        ),
        TermKind::App(f, a) => (
            format!("{} {}", print_term_prec(f, 1), print_term_prec(a, 2)),
            1,
        ),
        TermKind::Lift(a) => (format!("lift {}", print_term_prec(a, 2)), 0),
        TermKind::Force(a) => (format!("force {}", print_term_prec(a, 2)), 0),
        TermKind::Reverse(a) => (format!("reverse {}", print_term_prec(a, 2)), 0),
        TermKind::Controlled(spec, a) => {
            let tag = if spec == &crate::circuit::ControlSpec::black() {
                String::new()
            } else {
                format!("[{spec}]")
            };
            (format!("controlled{tag} {}", print_term_prec(a, 2)), 0)
        }
        TermKind::WithComputed(g, h) => (
            format!(
                "withComputed {} {}",
                print_term_prec(g, 2),
                print_term_prec(h, 2)
            ),
            0,
        ),
        TermKind::BoxTerm(ty, a) => {
            let ty_text = match ty {
                crate::wire::SimpleType::Wire(w) => w.name().to_string(),
                crate::wire::SimpleType::Unit => "Unit".to_string(),
                other => format!("({other})"),
            };
            (format!("box {ty_text} {}", print_term_prec(a, 2)), 0)
        }
        TermKind::CircLit(s, c, u) => (
            format!("circ({s}, <{} items>, {u})", c.items.len()),
            2,
        ),
    };
    if level < prec {
        format!("({text})")
    } else {
        text
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse_program, parse_term};
    use super::*;

    fn round_trip_term(src: &str) {
        let t = parse_term(src).unwrap();
        let printed = print_term(&t);
        let back = parse_term(&printed)
            .unwrap_or_else(|e| panic!("reparse of `{printed}` failed: {e}"));
        assert!(strip_spans_eq(&t, &back), "`{src}` -> `{printed}`");
    }

    fn strip_spans_eq(a: &Term, b: &Term) -> bool {
        use TermKind::*;
        match (&a.kind, &b.kind) {
            (Const(x), Const(y)) | (Var(x), Var(y)) => x == y,
            (Unit, Unit) => true,
            (Lambda(x, a1), Lambda(y, b1)) => x == y && strip_spans_eq(a1, b1),
            (App(f1, a1), App(f2, a2)) | (Pair(f1, a1), Pair(f2, a2)) => {
                strip_spans_eq(f1, f2) && strip_spans_eq(a1, a2)
            }
            (LetPair(x1, y1, r1, b1), LetPair(x2, y2, r2, b2)) => {
                x1 == x2 && y1 == y2 && strip_spans_eq(r1, r2) && strip_spans_eq(b1, b2)
            }
            (Lift(a1), Lift(b1)) | (Force(a1), Force(b1)) | (Reverse(a1), Reverse(b1)) => {
                strip_spans_eq(a1, b1)
            }
            (Controlled(s1, a1), Controlled(s2, b1)) => s1 == s2 && strip_spans_eq(a1, b1),
            (WithComputed(g1, h1), WithComputed(g2, h2)) => {
                strip_spans_eq(g1, g2) && strip_spans_eq(h1, h2)
            }
            (Apply(c1, a1), Apply(c2, a2)) => strip_spans_eq(c1, c2) && strip_spans_eq(a1, a2),
            (BoxTerm(t1, a1), BoxTerm(t2, b1)) => t1 == t2 && strip_spans_eq(a1, b1),
            _ => false,
        }
    }

    #[test]
    fn round_trips() {
        round_trip_term("\\x . x");
        round_trip_term("let (x, y) = input in (y, x)");
        round_trip_term("let (x, y) = input in Swap x y");
        round_trip_term("controlled (box (Qubit * Qubit) f)");
        round_trip_term("controlled[-] m");
        round_trip_term("controlled[+-+] m");
        round_trip_term("withComputed (box (Qubit * Qubit * Qubit) g) h");
        round_trip_term("apply(reverse (box Qubit (lift T)), d)");
        round_trip_term("lift (\\x . force f (force f x))");
        round_trip_term("f x y (g z)");
        round_trip_term("box Unit (lift (\\u . u))");
    }

    #[test]
    fn bang_hole_prints_bare() {
        let src = "f : !(Qubit -o Qubit)\nf x = x\n";
        let prog = parse_program(src).unwrap();
        let ty = prog.defs[0].declared.as_ref().unwrap();
        assert_eq!(print_type(ty), "!(Qubit -o Qubit)");
    }

    #[test]
    fn concrete_modalities_print_as_digits() {
        let src = "f : !2(Qubit -o1 Qubit) * Circ2(Qubit, Qubit)\nf = x\n";
        let prog = parse_program(src).unwrap();
        let ty = prog.defs[0].declared.as_ref().unwrap();
        assert_eq!(
            print_type(ty),
            "!2(Qubit -o1 Qubit) * Circ2(Qubit, Qubit)"
        );
    }

    #[test]
    fn type_round_trip_via_program() {
        for src_ty in [
            "Qubit * (Qubit * Qubit -o Bool)",
            "Circ(Qubit * Qubit, Unit)",
            "!(Qubit -o Qubit) -o Qubit * Qubit * Qubit",
        ] {
            let src = format!("f : {src_ty}\nf = x\n");
            let prog = parse_program(&src).unwrap();
            let ty = prog.defs[0].declared.as_ref().unwrap();
            let printed = print_type(ty);
            let src2 = format!("f : {printed}\nf = x\n");
            let prog2 = parse_program(&src2).unwrap();
            assert!(ty.same_type(prog2.defs[0].declared.as_ref().unwrap()));
        }
    }
}
