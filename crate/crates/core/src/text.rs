//! Textual rule and fact syntax: parsing and canonical serialization.
//!
//! Statements are Prolog-style, one per line in canonical form:
//!
//! ```text
//! parent(ann,bob).
//! grandparent(X0,X1) :- parent(X0,X2),parent(X2,X1).
//! ```
//!
//! Predicates and constants match `[a-z][A-Za-z0-9_]*`, variables
//! `[A-Z][A-Za-z0-9_]*`, and `%` starts a line comment. Serialization is
//! deterministic (sorted statements, variables renamed by first occurrence),
//! and parsing a serialized value yields the value back.

use std::collections::HashMap;

use thiserror::Error;

use crate::syntax::{Atom, Fact, FactSet, Program, Rule, Signature, Term, VarId};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum TokenKind {
    LowerIdent,
    UpperIdent,
    LParen,
    RParen,
    Comma,
    Dot,
    Implies,
}

#[derive(Clone, Debug)]
struct Token {
    kind: TokenKind,
    text: String,
    line: usize,
    column: usize,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.chars().peekable(),
            line: 1,
            column: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn tokenize(mut self) -> Result<Vec<Token>, ParseError> {
        let mut tokens = Vec::new();
        while let Some(&c) = self.chars.peek() {
            let (line, column) = (self.line, self.column);
            match c {
                ' ' | '\t' | '\r' | '\n' => {
                    self.bump();
                }
                '%' => {
                    while let Some(&c) = self.chars.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                '(' | ')' | ',' | '.' => {
                    self.bump();
                    let kind = match c {
                        '(' => TokenKind::LParen,
                        ')' => TokenKind::RParen,
                        ',' => TokenKind::Comma,
                        _ => TokenKind::Dot,
                    };
                    tokens.push(Token {
                        kind,
                        text: c.to_string(),
                        line,
                        column,
                    });
                }
                ':' => {
                    self.bump();
                    match self.chars.peek() {
                        Some('-') => {
                            self.bump();
                            tokens.push(Token {
                                kind: TokenKind::Implies,
                                text: ":-".to_owned(),
                                line,
                                column,
                            });
                        }
                        _ => return Err(ParseError::new(line, column, "expected `:-`")),
                    }
                }
                c if c.is_ascii_alphabetic() => {
                    let mut text = String::new();
                    while let Some(&c) = self.chars.peek() {
                        if c.is_ascii_alphanumeric() || c == '_' {
                            text.push(c);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    let kind = if text.chars().next().expect("nonempty").is_ascii_lowercase() {
                        TokenKind::LowerIdent
                    } else {
                        TokenKind::UpperIdent
                    };
                    tokens.push(Token {
                        kind,
                        text,
                        line,
                        column,
                    });
                }
                c => {
                    return Err(ParseError::new(
                        line,
                        column,
                        format!("unexpected character `{c}`"),
                    ))
                }
            }
        }
        Ok(tokens)
    }
}

/// One parsed statement: an atom with optional body.
struct Statement {
    head: Atom,
    body: Option<Vec<Atom>>,
    line: usize,
    column: usize,
}

struct Parser<'s> {
    tokens: Vec<Token>,
    pos: usize,
    sig: &'s mut Signature,
    vars: HashMap<String, VarId>,
}

impl<'s> Parser<'s> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err_here(&self, message: impl Into<String>) -> ParseError {
        match self.peek() {
            Some(t) => ParseError::new(t.line, t.column, message),
            None => {
                let (l, c) = self
                    .tokens
                    .last()
                    .map(|t| (t.line, t.column + t.text.len()))
                    .unwrap_or((1, 1));
                ParseError::new(l, c, message)
            }
        }
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> Result<Token, ParseError> {
        match self.peek() {
            Some(t) if t.kind == kind => Ok(self.next().expect("peeked")),
            _ => Err(self.err_here(format!("expected {what}"))),
        }
    }

    fn parse_atom(&mut self) -> Result<Atom, ParseError> {
        let name = self.expect(TokenKind::LowerIdent, "a predicate name")?;
        self.expect(TokenKind::LParen, "`(`")?;
        let mut args = Vec::new();
        loop {
            let tok = self
                .next()
                .ok_or_else(|| self.err_here("unexpected end of input in argument list"))?;
            let term = match tok.kind {
                TokenKind::LowerIdent => Term::Const(self.sig.add_constant(&tok.text)),
                TokenKind::UpperIdent => {
                    let next = VarId(self.vars.len() as u32);
                    Term::Var(*self.vars.entry(tok.text.clone()).or_insert(next))
                }
                _ => {
                    return Err(ParseError::new(
                        tok.line,
                        tok.column,
                        "expected a constant or variable",
                    ))
                }
            };
            args.push(term);
            let tok = self
                .next()
                .ok_or_else(|| self.err_here("unexpected end of input in argument list"))?;
            match tok.kind {
                TokenKind::Comma => continue,
                TokenKind::RParen => break,
                _ => return Err(ParseError::new(tok.line, tok.column, "expected `,` or `)`")),
            }
        }
        let pred = self
            .sig
            .add_predicate(&name.text, args.len())
            .map_err(|e| ParseError::new(name.line, name.column, e.to_string()))?;
        Ok(Atom::new(pred, args))
    }

    fn parse_statement(&mut self) -> Result<Statement, ParseError> {
        // Variable names are scoped to one statement.
        self.vars.clear();
        let (line, column) = {
            let t = self.peek().expect("caller checked");
            (t.line, t.column)
        };
        let head = self.parse_atom()?;
        let body = match self.peek() {
            Some(t) if t.kind == TokenKind::Implies => {
                self.next();
                let mut atoms = vec![self.parse_atom()?];
                while matches!(self.peek(), Some(t) if t.kind == TokenKind::Comma) {
                    self.next();
                    atoms.push(self.parse_atom()?);
                }
                Some(atoms)
            }
            _ => None,
        };
        self.expect(TokenKind::Dot, "`.`")?;
        Ok(Statement {
            head,
            body,
            line,
            column,
        })
    }

    fn parse_all(mut self) -> Result<Vec<Statement>, ParseError> {
        let mut out = Vec::new();
        while self.peek().is_some() {
            out.push(self.parse_statement()?);
        }
        Ok(out)
    }
}

fn statements(sig: &mut Signature, text: &str) -> Result<Vec<Statement>, ParseError> {
    let tokens = Lexer::new(text).tokenize()?;
    Parser {
        tokens,
        pos: 0,
        sig,
        vars: HashMap::new(),
    }
    .parse_all()
}

/// Parses a fact file into `sig`. Rules and non-ground atoms are rejected.
pub fn parse_facts_into(sig: &mut Signature, text: &str) -> Result<FactSet, ParseError> {
    let mut facts = FactSet::new();
    for st in statements(sig, text)? {
        if st.body.is_some() {
            return Err(ParseError::new(
                st.line,
                st.column,
                "rule statement in a fact file",
            ));
        }
        match st.head.as_fact() {
            Some(f) => {
                facts.insert(f);
            }
            None => {
                return Err(ParseError::new(
                    st.line,
                    st.column,
                    "variable in a fact",
                ))
            }
        }
    }
    Ok(facts)
}

/// Parses a rule file into `sig`. Fact-only statements and range-restriction
/// violations are rejected.
pub fn parse_rules_into(sig: &mut Signature, text: &str) -> Result<Program, ParseError> {
    let mut program = Program::new();
    for st in statements(sig, text)? {
        let body = st.body.ok_or_else(|| {
            ParseError::new(st.line, st.column, "fact statement in a rule file")
        })?;
        let rule = Rule::new(st.head, body)
            .map_err(|e| ParseError::new(st.line, st.column, e.to_string()))?;
        program.insert(rule);
    }
    Ok(program)
}

/// Parses a fact file into a fresh signature.
pub fn parse_facts(text: &str) -> Result<(Signature, FactSet), ParseError> {
    let mut sig = Signature::new();
    let facts = parse_facts_into(&mut sig, text)?;
    Ok((sig, facts))
}

/// Parses a rule file into a fresh signature.
pub fn parse_rules(text: &str) -> Result<(Signature, Program), ParseError> {
    let mut sig = Signature::new();
    let program = parse_rules_into(&mut sig, text)?;
    Ok((sig, program))
}

/// Renders one fact in canonical form, without the trailing dot.
pub fn render_fact(sig: &Signature, fact: &Fact) -> String {
    let args: Vec<&str> = fact.args.iter().map(|&c| sig.constant_name(c)).collect();
    format!("{}({})", sig.predicate_name(fact.pred), args.join(","))
}

fn render_atom(sig: &Signature, atom: &Atom, var_names: &HashMap<VarId, String>) -> String {
    let args: Vec<String> = atom
        .args
        .iter()
        .map(|t| match t {
            Term::Const(c) => sig.constant_name(*c).to_owned(),
            Term::Var(v) => var_names[v].clone(),
        })
        .collect();
    format!("{}({})", sig.predicate_name(atom.pred), args.join(","))
}

/// Renders one rule in canonical form (variables `X0,X1,...` by first
/// occurrence), without the trailing dot.
pub fn render_rule(sig: &Signature, rule: &Rule) -> String {
    let canon = rule.canonicalize();
    let var_names: HashMap<VarId, String> = canon
        .variables()
        .into_iter()
        .map(|v| (v, format!("X{}", v.0)))
        .collect();
    let body: Vec<String> = canon
        .body()
        .iter()
        .map(|a| render_atom(sig, a, &var_names))
        .collect();
    format!(
        "{} :- {}",
        render_atom(sig, canon.head(), &var_names),
        body.join(",")
    )
}

/// Serializes a fact set: one statement per line, lexicographically sorted.
pub fn serialize_facts(sig: &Signature, facts: &FactSet) -> String {
    let mut lines: Vec<String> = facts.iter().map(|f| render_fact(sig, f)).collect();
    lines.sort();
    let mut out = String::new();
    for l in lines {
        out.push_str(&l);
        out.push_str(".\n");
    }
    out
}

/// Serializes a program: one rule per line, lexicographically sorted.
pub fn serialize_rules(sig: &Signature, program: &Program) -> String {
    let mut lines: Vec<String> = program.iter().map(|r| render_rule(sig, r)).collect();
    lines.sort();
    let mut out = String::new();
    for l in lines {
        out.push_str(&l);
        out.push_str(".\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_facts() {
        let (sig, facts) = parse_facts("parent(ann,bob).\nparent(bob,dan).").unwrap();
        assert_eq!(facts.len(), 2);
        let p = sig.lookup_predicate("parent").unwrap();
        let ann = sig.lookup_constant("ann").unwrap();
        let bob = sig.lookup_constant("bob").unwrap();
        assert!(facts.contains(&Fact::new(p, vec![ann, bob])));
    }

    #[test]
    fn empty_input_is_empty_set() {
        let (_, facts) = parse_facts("").unwrap();
        assert!(facts.is_empty());
        let (_, rules) = parse_rules("").unwrap();
        assert!(rules.is_empty());
    }

    #[test]
    fn variable_in_fact_rejected() {
        let err = parse_facts("p0(X).").unwrap_err();
        assert!(err.message.contains("variable in a fact"), "{err}");
        assert_eq!((err.line, err.column), (1, 1));
    }

    #[test]
    fn parses_rules() {
        let (_, prog) = parse_rules("p8(X0,X1) :- p6(X0,X2), p4(X1,X0).").unwrap();
        assert_eq!(prog.len(), 1);
    }

    #[test]
    fn body_only_variable_accepted() {
        assert!(parse_rules("p(X) :- q(X,Y).").is_ok());
    }

    #[test]
    fn unbound_head_variable_rejected() {
        let err = parse_rules("p(X,Y) :- q(X,X).").unwrap_err();
        assert!(err.message.contains("range restriction"), "{err}");
    }

    #[test]
    fn fact_in_rule_file_rejected() {
        let err = parse_rules("p(a,b).").unwrap_err();
        assert!(err.message.contains("fact statement"), "{err}");
    }

    #[test]
    fn comments_and_whitespace_tolerated() {
        let text = "% a comment\n  p( a , b ).  % trailing\n\nq(c).\n";
        let (_, facts) = parse_facts(text).unwrap();
        assert_eq!(facts.len(), 2);
    }

    #[test]
    fn arity_conflict_reported_with_position() {
        let err = parse_facts("p(a).\np(a,b).").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.message.contains("arity"), "{err}");
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse_facts("p(a)\nq(b).").unwrap_err();
        assert_eq!((err.line, err.column), (2, 1));
    }

    #[test]
    fn serializes_canonically() {
        let (sig, facts) = parse_facts("parent(ann,bob).").unwrap();
        assert_eq!(serialize_facts(&sig, &facts), "parent(ann,bob).\n");
        let (sig, empty) = parse_facts("").unwrap();
        assert_eq!(serialize_facts(&sig, &empty), "");
    }

    #[test]
    fn round_trips_rules() {
        let text = "p8(X0,X1) :- p6(X0,X2),p4(X1,X0).\n";
        let (mut sig, prog) = parse_rules(text).unwrap();
        let rendered = serialize_rules(&sig, &prog);
        assert_eq!(rendered, text);
        let back = parse_rules_into(&mut sig, &rendered).unwrap();
        assert_eq!(back, prog);
    }
}
