//! Formula syntax: the AST, an ASCII grammar with a recursive-descent parser
//! and a minimal-parentheses printer, the ball substitution, and a bounded
//! corpus generator.
//!
//! ```text
//! iff   := imp ( "<->" imp )*
//! imp   := or ( "->" imp )?
//! or    := xor ( "|" xor )*
//! xor   := and ( "^" and )*
//! and   := unary ( "&" unary )*
//! unary := ("~" | "@" | "[]" | "<>" | "[=]" | "[-]") unary | atom
//! atom  := "T" | "F" | ident | "(" iff ")"
//! ```
//!
//! Implication, equivalence and exclusive disjunction are sugar: they are
//! expanded when built, so the tree only ever holds the primitive nodes.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Var(String),
    Top,
    Bot,
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Ball(Box<Formula>),
    Box(Box<Formula>),
    Diamond(Box<Formula>),
    /// Necessity over accessible worlds with the same lattice.
    BoxSame(Box<Formula>),
    /// Necessity over accessible worlds with a different lattice.
    BoxDiff(Box<Formula>),
}

impl Formula {
    pub fn var(name: impl Into<String>) -> Self {
        Self::Var(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Self) -> Self {
        Self::Not(Box::new(f))
    }

    pub fn and(f: Self, g: Self) -> Self {
        Self::And(Box::new(f), Box::new(g))
    }

    pub fn or(f: Self, g: Self) -> Self {
        Self::Or(Box::new(f), Box::new(g))
    }

    pub fn ball(f: Self) -> Self {
        Self::Ball(Box::new(f))
    }

    pub fn boxed(f: Self) -> Self {
        Self::Box(Box::new(f))
    }

    pub fn diamond(f: Self) -> Self {
        Self::Diamond(Box::new(f))
    }

    pub fn box_same(f: Self) -> Self {
        Self::BoxSame(Box::new(f))
    }

    pub fn box_diff(f: Self) -> Self {
        Self::BoxDiff(Box::new(f))
    }

    /// `f → g`, stored as `¬f ∨ g`.
    pub fn imp(f: Self, g: Self) -> Self {
        Self::or(Self::not(f), g)
    }

    /// `f ↔ g`, stored as `(f → g) ∧ (g → f)`.
    pub fn iff(f: Self, g: Self) -> Self {
        Self::and(Self::imp(f.clone(), g.clone()), Self::imp(g, f))
    }

    /// `f ⊻ g`, stored as `(f ∧ ¬g) ∨ (¬f ∧ g)`.
    pub fn xor(f: Self, g: Self) -> Self {
        Self::or(
            Self::and(f.clone(), Self::not(g.clone())),
            Self::and(Self::not(f), g),
        )
    }

    /// Immediate subformulas.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Self::Var(_) | Self::Top | Self::Bot => vec![],
            Self::Not(f)
            | Self::Ball(f)
            | Self::Box(f)
            | Self::Diamond(f)
            | Self::BoxSame(f)
            | Self::BoxDiff(f) => vec![f],
            Self::And(f, g) | Self::Or(f, g) => vec![f, g],
        }
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        if let Self::Var(name) = self {
            out.insert(name.clone());
        }
        for c in self.children() {
            c.collect_vars(out);
        }
    }

    /// Number of connective nodes (everything but variables and constants).
    pub fn connective_count(&self) -> usize {
        match self {
            Self::Var(_) | Self::Top | Self::Bot => 0,
            _ => {
                1 + self
                    .children()
                    .into_iter()
                    .map(Self::connective_count)
                    .sum::<usize>()
            }
        }
    }

    pub fn var_occurrences(&self) -> usize {
        match self {
            Self::Var(_) => 1,
            _ => self.children().into_iter().map(Self::var_occurrences).sum(),
        }
    }

    /// True when the formula uses □, ◇, ■ or ⊟.
    pub fn is_modal(&self) -> bool {
        self.first_modal_subformula().is_some()
    }

    pub fn first_modal_subformula(&self) -> Option<&Formula> {
        match self {
            Self::Box(_) | Self::Diamond(_) | Self::BoxSame(_) | Self::BoxDiff(_) => Some(self),
            _ => self
                .children()
                .into_iter()
                .find_map(Self::first_modal_subformula),
        }
    }

    pub fn contains_ball(&self) -> bool {
        matches!(self, Self::Ball(_)) || self.children().into_iter().any(Self::contains_ball)
    }

    /// Replaces every variable leaf `x` with `∘x`.
    pub fn ball_substitution(&self) -> Formula {
        match self {
            Self::Var(_) => Self::ball(self.clone()),
            Self::Top => Self::Top,
            Self::Bot => Self::Bot,
            Self::Not(f) => Self::not(f.ball_substitution()),
            Self::And(f, g) => Self::and(f.ball_substitution(), g.ball_substitution()),
            Self::Or(f, g) => Self::or(f.ball_substitution(), g.ball_substitution()),
            Self::Ball(f) => Self::ball(f.ball_substitution()),
            Self::Box(f) => Self::boxed(f.ball_substitution()),
            Self::Diamond(f) => Self::diamond(f.ball_substitution()),
            Self::BoxSame(f) => Self::box_same(f.ball_substitution()),
            Self::BoxDiff(f) => Self::box_diff(f.ball_substitution()),
        }
    }

    /// Renders with the Unicode connectives. Display only; the parser reads
    /// the ASCII form.
    pub fn to_unicode(&self) -> String {
        let mut out = String::new();
        write_formula(&mut out, self, Prec::Or, &UNICODE).expect("writing to a String");
        out
    }
}

pub fn ball_substitution(f: &Formula) -> Formula {
    f.ball_substitution()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prec {
    Or,
    And,
    Unary,
}

struct Symbols {
    not: &'static str,
    ball: &'static str,
    boxed: &'static str,
    diamond: &'static str,
    box_same: &'static str,
    box_diff: &'static str,
    and: &'static str,
    or: &'static str,
    top: &'static str,
    bot: &'static str,
}

const ASCII: Symbols = Symbols {
    not: "~",
    ball: "@",
    boxed: "[]",
    diamond: "<>",
    box_same: "[=]",
    box_diff: "[-]",
    and: " & ",
    or: " | ",
    top: "T",
    bot: "F",
};

const UNICODE: Symbols = Symbols {
    not: "¬",
    ball: "∘",
    boxed: "□",
    diamond: "◇",
    box_same: "■",
    box_diff: "⊟",
    and: " ∧ ",
    or: " ∨ ",
    top: "⊤",
    bot: "⊥",
};

fn write_formula(out: &mut impl fmt::Write, f: &Formula, ctx: Prec, sym: &Symbols) -> fmt::Result {
    let (prec, ops) = match f {
        Formula::And(a, b) => (Prec::And, Some((sym.and, a, b))),
        Formula::Or(a, b) => (Prec::Or, Some((sym.or, a, b))),
        _ => (Prec::Unary, None),
    };
    if let Some((op, a, b)) = ops {
        // Binary operators are left-associative: a right operand at the same
        // level needs parentheses.
        let paren = prec < ctx;
        if paren {
            out.write_char('(')?;
        }
        write_formula(out, a, prec, sym)?;
        out.write_str(op)?;
        let right_ctx = if prec == Prec::Or {
            Prec::And
        } else {
            Prec::Unary
        };
        write_formula(out, b, right_ctx, sym)?;
        if paren {
            out.write_char(')')?;
        }
        return Ok(());
    }
    let prefix = match f {
        Formula::Var(name) => return out.write_str(name),
        Formula::Top => return out.write_str(sym.top),
        Formula::Bot => return out.write_str(sym.bot),
        Formula::Not(_) => sym.not,
        Formula::Ball(_) => sym.ball,
        Formula::Box(_) => sym.boxed,
        Formula::Diamond(_) => sym.diamond,
        Formula::BoxSame(_) => sym.box_same,
        Formula::BoxDiff(_) => sym.box_diff,
        Formula::And(..) | Formula::Or(..) => unreachable!(),
    };
    out.write_str(prefix)?;
    write_formula(out, f.children()[0], Prec::Unary, sym)
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(f, self, Prec::Or, &ASCII)
    }
}

/// ASCII rendering with minimal parentheses.
pub fn print(f: &Formula) -> String {
    f.to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at offset {offset}: expected {}, found {found}", expected.join(" or "))]
pub struct ParseError {
    /// Byte offset into the input.
    pub offset: usize,
    pub expected: Vec<&'static str>,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Ident(String),
    Top,
    Bot,
    Not,
    Ball,
    Box,
    Diamond,
    BoxSame,
    BoxDiff,
    And,
    Or,
    Xor,
    Imp,
    Iff,
    LParen,
    RParen,
    End,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Ident(name) => format!("identifier `{name}`"),
            Token::End => "end of input".to_string(),
            other => {
                let s = match other {
                    Token::Top => "T",
                    Token::Bot => "F",
                    Token::Not => "~",
                    Token::Ball => "@",
                    Token::Box => "[]",
                    Token::Diamond => "<>",
                    Token::BoxSame => "[=]",
                    Token::BoxDiff => "[-]",
                    Token::And => "&",
                    Token::Or => "|",
                    Token::Xor => "^",
                    Token::Imp => "->",
                    Token::Iff => "<->",
                    Token::LParen => "(",
                    Token::RParen => ")",
                    Token::Ident(_) | Token::End => unreachable!(),
                };
                format!("`{s}`")
            }
        }
    }
}

const EXPECT_FORMULA: &[&str] = &["identifier", "T", "F", "(", "unary operator"];

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Self { src, pos: 0 }
    }

    /// Returns the token and its starting offset.
    fn next_token(&mut self) -> Result<(Token, usize), ParseError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let rest = &self.src[start..];
        const FIXED: &[(&str, Token)] = &[
            ("<->", Token::Iff),
            ("[=]", Token::BoxSame),
            ("[-]", Token::BoxDiff),
            ("[]", Token::Box),
            ("<>", Token::Diamond),
            ("->", Token::Imp),
            ("~", Token::Not),
            ("@", Token::Ball),
            ("&", Token::And),
            ("|", Token::Or),
            ("^", Token::Xor),
            ("(", Token::LParen),
            (")", Token::RParen),
            ("↔", Token::Iff),
            ("→", Token::Imp),
            ("¬", Token::Not),
            ("∘", Token::Ball),
            ("⊚", Token::Ball),
            ("□", Token::Box),
            ("◇", Token::Diamond),
            ("■", Token::BoxSame),
            ("⊟", Token::BoxDiff),
            ("∧", Token::And),
            ("∨", Token::Or),
            ("⊻", Token::Xor),
            ("⊤", Token::Top),
            ("⊥", Token::Bot),
        ];
        if rest.is_empty() {
            return Ok((Token::End, start));
        }
        for (text, tok) in FIXED {
            if rest.starts_with(text) {
                self.pos += text.len();
                return Ok((tok.clone(), start));
            }
        }
        let first = rest.chars().next().expect("non-empty");
        if first.is_ascii_lowercase() {
            let len = rest
                .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
                .unwrap_or(rest.len());
            self.pos += len;
            return Ok((Token::Ident(rest[..len].to_string()), start));
        }
        if first == 'T' || first == 'F' {
            let next = rest[1..].chars().next();
            if !next.is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
                self.pos += 1;
                let tok = if first == 'T' { Token::Top } else { Token::Bot };
                return Ok((tok, start));
            }
        }
        Err(ParseError {
            offset: start,
            expected: vec!["a token"],
            found: format!("character `{first}`"),
        })
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    current: Token,
    offset: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self, ParseError> {
        let mut lexer = Lexer::new(src);
        let (current, offset) = lexer.next_token()?;
        Ok(Self {
            lexer,
            current,
            offset,
        })
    }

    fn bump(&mut self) -> Result<Token, ParseError> {
        let (next, offset) = self.lexer.next_token()?;
        self.offset = offset;
        Ok(std::mem::replace(&mut self.current, next))
    }

    fn error(&self, expected: &[&'static str]) -> ParseError {
        ParseError {
            offset: self.offset,
            expected: expected.to_vec(),
            found: self.current.describe(),
        }
    }

    fn iff(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.imp()?;
        while self.current == Token::Iff {
            self.bump()?;
            let rhs = self.imp()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn imp(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if self.current == Token::Imp {
            self.bump()?;
            let rhs = self.imp()?;
            return Ok(Formula::imp(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.xor()?;
        while self.current == Token::Or {
            self.bump()?;
            lhs = Formula::or(lhs, self.xor()?);
        }
        Ok(lhs)
    }

    fn xor(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and()?;
        while self.current == Token::Xor {
            self.bump()?;
            lhs = Formula::xor(lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while self.current == Token::And {
            self.bump()?;
            lhs = Formula::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        let wrap: fn(Formula) -> Formula = match self.current {
            Token::Not => Formula::not,
            Token::Ball => Formula::ball,
            Token::Box => Formula::boxed,
            Token::Diamond => Formula::diamond,
            Token::BoxSame => Formula::box_same,
            Token::BoxDiff => Formula::box_diff,
            _ => return self.atom(),
        };
        self.bump()?;
        Ok(wrap(self.unary()?))
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        match &self.current {
            Token::Ident(_) => match self.bump()? {
                Token::Ident(name) => Ok(Formula::Var(name)),
                _ => unreachable!(),
            },
            Token::Top => {
                self.bump()?;
                Ok(Formula::Top)
            }
            Token::Bot => {
                self.bump()?;
                Ok(Formula::Bot)
            }
            Token::LParen => {
                self.bump()?;
                let inner = self.iff()?;
                if self.current != Token::RParen {
                    return Err(self.error(&[")", "binary operator"]));
                }
                self.bump()?;
                Ok(inner)
            }
            _ => Err(self.error(EXPECT_FORMULA)),
        }
    }
}

/// Parses one formula; trailing input is an error.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let mut parser = Parser::new(text)?;
    let f = parser.iff()?;
    if parser.current != Token::End {
        return Err(parser.error(&["binary operator", "end of input"]));
    }
    Ok(f)
}

impl FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

/// Every formula over `vars` built from ¬, ∧, ∘ and □ with at most
/// `max_connectives` connective nodes, ordered by size and then by printed
/// form.
pub fn generate_corpus(vars: &[&str], max_connectives: usize) -> Vec<Formula> {
    let mut levels: Vec<Vec<Formula>> = Vec::with_capacity(max_connectives + 1);
    let mut base: Vec<Formula> = vars.iter().map(|v| Formula::var(*v)).collect();
    base.sort_by_cached_key(print);
    base.dedup();
    levels.push(base);
    for size in 1..=max_connectives {
        let mut level = Vec::new();
        for f in &levels[size - 1] {
            level.push(Formula::not(f.clone()));
            level.push(Formula::ball(f.clone()));
            level.push(Formula::boxed(f.clone()));
        }
        for left in 0..size {
            let right = size - 1 - left;
            for f in &levels[left] {
                for g in &levels[right] {
                    level.push(Formula::and(f.clone(), g.clone()));
                }
            }
        }
        level.sort_by_cached_key(print);
        levels.push(level);
    }
    levels.into_iter().flatten().collect()
}
