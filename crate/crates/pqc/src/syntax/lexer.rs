//! Tokenizer for `.pqc` source.

use thiserror::Error;

use crate::circuit::ControlGadget;
use crate::modality::Modality;

use super::Span;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    KwLet,
    KwIn,
    KwLift,
    KwForce,
    KwBox,
    KwApply,
    KwReverse,
    KwControlled,
    KwWithComputed,
    KwFun,
    KwCirc(Option<Modality>),
    /// The `[+-+]` gadget list attached to `controlled`.
    CtrlSpec(Vec<ControlGadget>),
    Lambda,
    Dot,
    Arrow,
    Lolli(Option<Modality>),
    Bang(Option<Modality>),
    Star,
    Comma,
    LParen,
    RParen,
    Equals,
    Colon,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::KwLet => "`let`".into(),
            Tok::KwIn => "`in`".into(),
            Tok::KwLift => "`lift`".into(),
            Tok::KwForce => "`force`".into(),
            Tok::KwBox => "`box`".into(),
            Tok::KwApply => "`apply`".into(),
            Tok::KwReverse => "`reverse`".into(),
            Tok::KwControlled => "`controlled`".into(),
            Tok::KwWithComputed => "`withComputed`".into(),
            Tok::KwFun => "`fun`".into(),
            Tok::KwCirc(_) => "`Circ`".into(),
            Tok::CtrlSpec(_) => "control spec".into(),
            Tok::Lambda => "`\\`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Lolli(_) => "`-o`".into(),
            Tok::Bang(_) => "`!`".into(),
            Tok::Star => "`*`".into(),
            Tok::Comma => "`,`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Equals => "`=`".into(),
            Tok::Colon => "`:`".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

#[derive(Debug, Error, PartialEq)]
#[error("{span}: unexpected character `{found}`")]
pub struct LexError {
    pub span: Span,
    pub found: char,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    fn new(source: &'a str) -> Self {
        Lexer {
            chars: source.chars().peekable(),
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    let mut lx = Lexer::new(source);
    let mut out = Vec::new();
    while let Some(c) = lx.peek() {
        let line = lx.line;
        let col = lx.col;
        let span = Span::point(line, col);
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                lx.bump();
            }
            '(' => {
                lx.bump();
                out.push(Token { tok: Tok::LParen, span });
            }
            ')' => {
                lx.bump();
                out.push(Token { tok: Tok::RParen, span });
            }
            '*' => {
                lx.bump();
                out.push(Token { tok: Tok::Star, span });
            }
            ',' => {
                lx.bump();
                out.push(Token { tok: Tok::Comma, span });
            }
            '=' => {
                lx.bump();
                out.push(Token { tok: Tok::Equals, span });
            }
            ':' => {
                lx.bump();
                out.push(Token { tok: Tok::Colon, span });
            }
            '\\' => {
                lx.bump();
                out.push(Token { tok: Tok::Lambda, span });
            }
            '.' => {
                lx.bump();
                out.push(Token { tok: Tok::Dot, span });
            }
            '!' => {
                lx.bump();
                let m = lex_modality_digit(&mut lx);
                out.push(Token { tok: Tok::Bang(m), span });
            }
            '-' => {
                lx.bump();
                match lx.peek() {
                    Some('o') => {
                        lx.bump();
                        let m = lex_modality_digit(&mut lx);
                        out.push(Token { tok: Tok::Lolli(m), span });
                    }
                    Some('>') => {
                        lx.bump();
                        out.push(Token { tok: Tok::Arrow, span });
                    }
                    Some('-') => {
                        // Line comment.
                        while let Some(c) = lx.peek() {
                            if c == '\n' {
                                break;
                            }
                            lx.bump();
                        }
                    }
                    _ => return Err(LexError { span, found: '-' }),
                }
            }
            c if is_ident_start(c) => {
                let mut name = String::new();
                while let Some(c) = lx.peek() {
                    if is_ident_continue(c) {
                        name.push(c);
                        lx.bump();
                    } else {
                        break;
                    }
                }
                let end = Span {
                    line,
                    col,
                    end_line: lx.line,
                    end_col: lx.col,
                };
                let tok = match name.as_str() {
                    "let" => Tok::KwLet,
                    "in" => Tok::KwIn,
                    "lift" => Tok::KwLift,
                    "force" => Tok::KwForce,
                    "box" => Tok::KwBox,
                    "apply" => Tok::KwApply,
                    "reverse" => Tok::KwReverse,
                    "controlled" => Tok::KwControlled,
                    "withComputed" => Tok::KwWithComputed,
                    "fun" => Tok::KwFun,
                    "Circ" => Tok::KwCirc(None),
                    "Circ0" => Tok::KwCirc(Some(Modality::General)),
                    "Circ1" => Tok::KwCirc(Some(Modality::Reversible)),
                    "Circ2" => Tok::KwCirc(Some(Modality::Controllable)),
                    _ => Tok::Ident(name),
                };
                // `controlled[...]` lexes the gadget list as one token so
                // white dots never collide with `--` comments.
                if tok == Tok::KwControlled && lx.peek() == Some('[') {
                    out.push(Token { tok, span: end });
                    lx.bump();
                    let mut gadgets = Vec::new();
                    loop {
                        match lx.bump() {
                            Some('+') => gadgets.push(ControlGadget::Black),
                            Some('-') => gadgets.push(ControlGadget::White),
                            Some(']') => break,
                            other => {
                                return Err(LexError {
                                    span: Span::point(lx.line, lx.col),
                                    found: other.unwrap_or(']'),
                                })
                            }
                        }
                    }
                    out.push(Token {
                        tok: Tok::CtrlSpec(gadgets),
                        span: end,
                    });
                    continue;
                }
                out.push(Token { tok, span: end });
            }
            other => return Err(LexError { span, found: other }),
        }
    }
    Ok(out)
}

/// A modality digit directly attached to `!`/`-o` (not followed by more
/// identifier characters).
fn lex_modality_digit(lx: &mut Lexer<'_>) -> Option<Modality> {
    let digit = match lx.peek() {
        Some('0') => Modality::General,
        Some('1') => Modality::Reversible,
        Some('2') => Modality::Controllable,
        _ => return None,
    };
    lx.bump();
    Some(digit)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        tokenize(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn lambda_form() {
        assert_eq!(
            toks("\\x . x"),
            vec![
                Tok::Lambda,
                Tok::Ident("x".into()),
                Tok::Dot,
                Tok::Ident("x".into())
            ]
        );
    }

    #[test]
    fn circ_type_with_modality() {
        assert_eq!(
            toks("Circ2(Qubit*Qubit, Qubit*Qubit)"),
            vec![
                Tok::KwCirc(Some(Modality::Controllable)),
                Tok::LParen,
                Tok::Ident("Qubit".into()),
                Tok::Star,
                Tok::Ident("Qubit".into()),
                Tok::Comma,
                Tok::Ident("Qubit".into()),
                Tok::Star,
                Tok::Ident("Qubit".into()),
                Tok::RParen,
            ]
        );
    }

    #[test]
    fn with_computed_keyword() {
        assert_eq!(
            toks("withComputed g f"),
            vec![
                Tok::KwWithComputed,
                Tok::Ident("g".into()),
                Tok::Ident("f".into())
            ]
        );
    }

    #[test]
    fn arrows_bangs_and_comments() {
        assert_eq!(
            toks("! !2 -o -o1 -> -- ignored\n="),
            vec![
                Tok::Bang(None),
                Tok::Bang(Some(Modality::Controllable)),
                Tok::Lolli(None),
                Tok::Lolli(Some(Modality::Reversible)),
                Tok::Arrow,
                Tok::Equals,
            ]
        );
    }

    #[test]
    fn control_specs_do_not_clash_with_comments() {
        use ControlGadget::*;
        assert_eq!(
            toks("controlled[--] m"),
            vec![
                Tok::KwControlled,
                Tok::CtrlSpec(vec![White, White]),
                Tok::Ident("m".into())
            ]
        );
        assert_eq!(
            toks("controlled[+-+] m"),
            vec![
                Tok::KwControlled,
                Tok::CtrlSpec(vec![Black, White, Black]),
                Tok::Ident("m".into())
            ]
        );
    }

    #[test]
    fn positions_are_tracked() {
        let tokens = tokenize("a\n  b").unwrap();
        assert_eq!((tokens[0].span.line, tokens[0].span.col), (1, 1));
        assert_eq!((tokens[1].span.line, tokens[1].span.col), (2, 3));
    }

    #[test]
    fn stray_character_errors_with_position() {
        let err = tokenize("x @").unwrap_err();
        assert_eq!(err.found, '@');
        assert_eq!((err.span.line, err.span.col), (1, 3));
    }
}
