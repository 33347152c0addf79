//! Concrete text syntax: parser and printer.
//!
//! ```text
//! term    := alt
//! alt     := par ('+' alt)?
//! par     := bin ('||' bin)*
//! bin     := seq (('|_' | '>>') seq)*
//! seq     := atom ('.' seq)?
//! atom    := 'dd' | 'dd' '(' ('abs'|'rel') ext ')'
//!          | ('ps'|'es'|'er') '(' c ',' d ';' ['abs'|'rel'] S ';' point ')'
//!          | 'pr' '(' c ',' d ';' ('abs'|'rel') S '..' ext ';' point ')'
//!          | 'L' '{' chans '}' '@' S ':' sigma '(' term ')'
//!          | 'mp' '[' pattern ']' '(' term ')'
//!          | 'amp' '[' pattern ']' '(' term ',' term ')'
//!          | 'rec' VAR '{' (VAR '=' term ';')+ '}'
//!          | '(' term ')' | VAR
//! ```
//!
//! `+` binds weakest and `.` strongest; `+` and `.` associate to the right,
//! the other binary operators to the left.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::comm::{CommState, SendRecord};
use crate::error::{Error, Result};
use crate::meadow::{ExtScalar, Point, Scalar};
use crate::terms::{name, Action, ActionKind, ActionPattern, Name, PatternAtom, PatternKind, RecSpec, Term, Timing};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(String),
    Sym(&'static str),
}

const SYMBOLS: [&str; 17] = ["||", "|_", ">>", "..", "+", ".", "(", ")", "{", "}", "[", "]", ",", ";", ":", "@", "="];

fn lex(src: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    'outer: while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '#' && bytes.get(i + 1) == Some(&b'#') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || matches!(bytes[i], b'_' | b'#' | b'\'')) {
                i += 1;
            }
            out.push((start, Tok::Ident(src[start..i].to_string())));
            continue;
        }
        if c.is_ascii_digit() || (c == '-' && bytes.get(i + 1).is_some_and(|b| b.is_ascii_digit())) {
            let start = i;
            i += 1;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i + 1 < bytes.len() && bytes[i] == b'/' && bytes[i + 1].is_ascii_digit() {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            out.push((start, Tok::Num(src[start..i].to_string())));
            continue;
        }
        if c == '|' && bytes.get(i + 1).is_some_and(|b| *b != b'|' && *b != b'_') || (c == '|' && i + 1 == bytes.len())
        {
            out.push((i, Tok::Sym("|")));
            i += 1;
            continue;
        }
        for s in SYMBOLS {
            if src[i..].starts_with(s) {
                out.push((i, Tok::Sym(s)));
                i += s.len();
                continue 'outer;
            }
        }
        return Err(Error::Syntax { pos: i, msg: format!("unexpected character `{c}`") });
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.0)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { pos: self.offset(), msg: msg.into() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.1)
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(x)) if *x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`"))
        }
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(x)) if x == k)
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        if self.is_kw(k) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(x)) => {
                let x = x.clone();
                self.pos += 1;
                Ok(x)
            }
            _ => self.err("expected identifier"),
        }
    }

    fn scalar(&mut self) -> Result<Scalar> {
        match self.peek() {
            Some(Tok::Num(n)) => {
                let at = self.offset();
                let v = n.parse::<Scalar>().map_err(|_| Error::Syntax { pos: at, msg: format!("bad number `{n}`") })?;
                self.pos += 1;
                Ok(v)
            }
            _ => self.err("expected number"),
        }
    }

    fn ext(&mut self) -> Result<ExtScalar> {
        if self.eat_kw("inf") {
            Ok(ExtScalar::Infinity)
        } else {
            Ok(ExtScalar::Finite(self.scalar()?))
        }
    }

    fn point(&mut self) -> Result<Point> {
        self.expect("(")?;
        let u = self.scalar()?;
        self.expect(",")?;
        let v = self.scalar()?;
        self.expect(",")?;
        let w = self.scalar()?;
        self.expect(")")?;
        Ok(Point::new(u, v, w))
    }

    fn term(&mut self) -> Result<Term> {
        let left = self.par()?;
        if self.eat_sym("+") {
            Ok(Term::alt(left, self.term()?))
        } else {
            Ok(left)
        }
    }

    fn par(&mut self) -> Result<Term> {
        let mut left = self.bin()?;
        while self.eat_sym("||") {
            left = Term::par(left, self.bin()?);
        }
        Ok(left)
    }

    fn bin(&mut self) -> Result<Term> {
        let mut left = self.seq()?;
        loop {
            if self.eat_sym("|_") {
                left = Term::left_merge(left, self.seq()?);
            } else if self.eat_sym(">>") {
                left = Term::timeout(left, self.seq()?);
            } else {
                return Ok(left);
            }
        }
    }

    fn seq(&mut self) -> Result<Term> {
        let head = self.atom()?;
        if self.eat_sym(".") {
            Ok(Term::seq(head, self.seq()?))
        } else {
            Ok(head)
        }
    }

    fn followed_by(&self, s: &str) -> bool {
        matches!(self.peek_at(1), Some(Tok::Sym(x)) if *x == s)
    }

    fn atom(&mut self) -> Result<Term> {
        if self.eat_sym("(") {
            let t = self.term()?;
            self.expect(")")?;
            return Ok(t);
        }
        let Some(Tok::Ident(id)) = self.peek().cloned() else {
            return self.err("expected a process term");
        };
        match id.as_str() {
            "dd" => {
                self.pos += 1;
                if !self.eat_sym("(") {
                    return Ok(Term::Delta);
                }
                let relative = self.timing_style()?;
                let t = self.ext()?;
                self.expect(")")?;
                Ok(if relative { Term::RDead(t) } else { Term::ADead(t) })
            }
            "ps" | "pr" | "es" | "er" if self.followed_by("(") => {
                self.pos += 1;
                self.action(&id).map(Term::Act)
            }
            "L" if self.followed_by("{") => {
                self.pos += 1;
                self.state()
            }
            "mp" if self.followed_by("[") => {
                self.pos += 1;
                let h = self.pattern()?;
                self.expect("(")?;
                let body = self.term()?;
                self.expect(")")?;
                Ok(Term::max_prog(h, body))
            }
            "amp" if self.followed_by("[") => {
                self.pos += 1;
                let h = self.pattern()?;
                self.expect("(")?;
                let x = self.term()?;
                self.expect(",")?;
                let y = self.term()?;
                self.expect(")")?;
                Ok(Term::AuxMaxProg(Arc::new(h), Arc::new(x), Arc::new(y)))
            }
            "rec" if matches!(self.peek_at(1), Some(Tok::Ident(_))) => {
                self.pos += 1;
                let (root, spec) = self.rec_body()?;
                Ok(Term::Rec(root, spec))
            }
            _ => {
                self.pos += 1;
                Ok(Term::Var(name(&id)))
            }
        }
    }

    fn timing_style(&mut self) -> Result<bool> {
        if self.eat_kw("abs") {
            Ok(false)
        } else if self.eat_kw("rel") {
            Ok(true)
        } else {
            self.err("expected `abs` or `rel`")
        }
    }

    fn action(&mut self, kw: &str) -> Result<Action> {
        self.expect("(")?;
        let c = self.ident()?;
        self.expect(",")?;
        let d = self.ident()?;
        self.expect(";")?;
        let start = self.offset();
        let a = match kw {
            "pr" => {
                let relative = self.timing_style()?;
                let lo = self.scalar()?;
                self.expect("..")?;
                let hi = self.ext()?;
                self.expect(";")?;
                let p = self.point()?;
                let built =
                    if relative { Action::pr_rel(&c, &d, lo, hi, p) } else { Action::pr_abs(&c, &d, lo, hi, p) };
                built.map_err(|e| Error::Syntax { pos: start, msg: e.to_string() })?
            }
            "ps" => {
                let relative = self.timing_style()?;
                let t = self.scalar()?;
                self.expect(";")?;
                let p = self.point()?;
                if relative {
                    Action::ps_rel(&c, &d, t, p)
                } else {
                    Action::ps_abs(&c, &d, t, p)
                }
            }
            _ => {
                self.eat_kw("abs");
                let t = self.scalar()?;
                self.expect(";")?;
                let p = self.point()?;
                if kw == "es" {
                    Action::es(&c, &d, t, p)
                } else {
                    Action::er(&c, &d, t, p)
                }
            }
        };
        self.expect(")")?;
        Ok(a)
    }

    fn names_until(&mut self, close: &str) -> Result<Vec<String>> {
        let mut out = Vec::new();
        if self.eat_sym(close) {
            return Ok(out);
        }
        loop {
            out.push(self.ident()?);
            if self.eat_sym(close) {
                return Ok(out);
            }
            self.expect(",")?;
        }
    }

    fn state(&mut self) -> Result<Term> {
        self.expect("{")?;
        let chans = self.names_until("}")?;
        self.expect("@")?;
        let t = self.scalar()?;
        self.expect(":")?;
        let sigma = self.sigma()?;
        self.expect("(")?;
        let body = self.term()?;
        self.expect(")")?;
        Ok(Term::state(chans.iter().map(String::as_str), t, sigma, body))
    }

    fn sigma(&mut self) -> Result<CommState> {
        self.expect("{")?;
        let mut recs = Vec::new();
        if !self.eat_sym("}") {
            loop {
                self.expect("(")?;
                let c = self.ident()?;
                self.expect(",")?;
                let d = self.ident()?;
                self.expect(",")?;
                let t = self.scalar()?;
                self.expect(",")?;
                let p = self.point()?;
                self.expect(")")?;
                recs.push(SendRecord { channel: name(&c), datum: name(&d), time: t, point: p });
                if self.eat_sym("}") {
                    break;
                }
                self.expect(",")?;
            }
        }
        Ok(CommState::from_records(recs))
    }

    fn pattern(&mut self) -> Result<ActionPattern> {
        self.expect("[")?;
        let mut atoms = Vec::new();
        if !self.eat_sym("]") {
            loop {
                let kind = match self.ident()?.as_str() {
                    "recv" => PatternKind::Recv,
                    "send" => PatternKind::Send,
                    "any" => PatternKind::Any,
                    other => return self.err(format!("unknown pattern kind `{other}`")),
                };
                self.expect("(")?;
                let channels = self.names_until(")")?.iter().map(|s| name(s)).collect();
                let data = if self.eat_sym(":") {
                    if self.eat_sym("{") {
                        Some(self.names_until("}")?.iter().map(|s| name(s)).collect())
                    } else {
                        Some(BTreeSet::from([name(&self.ident()?)]))
                    }
                } else {
                    None
                };
                atoms.push(PatternAtom { kind, channels, data });
                if self.eat_sym("]") {
                    break;
                }
                self.expect("|")?;
            }
        }
        Ok(ActionPattern { atoms })
    }

    fn rec_body(&mut self) -> Result<(Name, Arc<RecSpec>)> {
        let root = name(&self.ident()?);
        self.expect("{")?;
        let mut eqs = BTreeMap::new();
        let start = self.offset();
        while !self.eat_sym("}") {
            let at = self.offset();
            let v = self.ident()?;
            self.expect("=")?;
            let rhs = self.term()?;
            self.expect(";")?;
            if eqs.insert(name(&v), rhs).is_some() {
                return Err(Error::Syntax { pos: at, msg: format!("duplicate equation for `{v}`") });
            }
        }
        if !eqs.contains_key(&root) {
            return Err(Error::Syntax { pos: start, msg: format!("no equation for `{root}`") });
        }
        let spec = RecSpec::new(eqs).map_err(|e| Error::Syntax { pos: start, msg: e.to_string() })?;
        Ok((root, spec))
    }
}

fn parser(src: &str) -> Result<Parser> {
    Ok(Parser { toks: lex(src)?, pos: 0, end: src.len() })
}

/// Parse a process term.
pub fn parse_term(src: &str) -> Result<Term> {
    let mut p = parser(src)?;
    let t = p.term()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(t)
}

/// Parse a communication state `{(c,d,t,(x,y,z)), ...}`.
pub fn parse_sigma(src: &str) -> Result<CommState> {
    let mut p = parser(src)?;
    let s = p.sigma()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(s)
}

/// Parse an action pattern `[recv(c1,c2) | send(c):{d}]`.
pub fn parse_pattern(src: &str) -> Result<ActionPattern> {
    let mut p = parser(src)?;
    let h = p.pattern()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(h)
}

/// Parse a finite scalar such as `3`, `-1/2`.
pub fn parse_scalar(src: &str) -> Result<Scalar> {
    let mut p = parser(src)?;
    let v = p.scalar()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(v)
}

/// Parse a point `(x,y,z)`.
pub fn parse_point(src: &str) -> Result<Point> {
    let mut p = parser(src)?;
    let v = p.point()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(v)
}

/// Parse a scalar or `inf`.
pub fn parse_ext(src: &str) -> Result<ExtScalar> {
    let mut p = parser(src)?;
    let v = p.ext()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(v)
}

const ALT: u8 = 0;
const PAR: u8 = 1;
const BIN: u8 = 2;
const SEQ: u8 = 3;
const ATOM: u8 = 4;

fn level(t: &Term) -> u8 {
    match t {
        Term::Alt(..) => ALT,
        Term::Par(..) => PAR,
        Term::LeftMerge(..) | Term::Timeout(..) => BIN,
        Term::Seq(..) => SEQ,
        _ => ATOM,
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, t: &Term, min: u8) -> fmt::Result {
    let paren = level(t) < min;
    if paren {
        write!(f, "(")?;
    }
    match t {
        Term::Delta => write!(f, "dd")?,
        Term::ADead(x) => write!(f, "dd(abs {x})")?,
        Term::RDead(x) => write!(f, "dd(rel {x})")?,
        Term::Act(a) => write!(f, "{a}")?,
        Term::Alt(a, b) => {
            write_term(f, a, PAR)?;
            write!(f, " + ")?;
            write_term(f, b, ALT)?;
        }
        Term::Par(a, b) => {
            write_term(f, a, PAR)?;
            write!(f, " || ")?;
            write_term(f, b, BIN)?;
        }
        Term::LeftMerge(a, b) | Term::Timeout(a, b) => {
            write_term(f, a, BIN)?;
            write!(f, "{}", if matches!(t, Term::LeftMerge(..)) { " |_ " } else { " >> " })?;
            write_term(f, b, SEQ)?;
        }
        Term::Seq(a, b) => {
            write_term(f, a, ATOM)?;
            write!(f, " . ")?;
            write_term(f, b, SEQ)?;
        }
        Term::State { channels, time, sigma, body } => {
            write!(f, "L{{")?;
            for (i, c) in channels.iter().enumerate() {
                write!(f, "{}{c}", if i > 0 { "," } else { "" })?;
            }
            write!(f, "}}@{time}:{sigma}(")?;
            write_term(f, body, ALT)?;
            write!(f, ")")?;
        }
        Term::MaxProg(h, body) => {
            write!(f, "mp{h}(")?;
            write_term(f, body, ALT)?;
            write!(f, ")")?;
        }
        Term::AuxMaxProg(h, x, y) => {
            write!(f, "amp{h}(")?;
            write_term(f, x, ALT)?;
            write!(f, ", ")?;
            write_term(f, y, ALT)?;
            write!(f, ")")?;
        }
        Term::Rec(v, spec) => write!(f, "rec {v} {spec}")?,
        Term::Var(v) => write!(f, "{v}")?,
    }
    if paren {
        write!(f, ")")?;
    }
    Ok(())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self, ALT)
    }
}

impl fmt::Display for RecSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{ ")?;
        for (v, rhs) in &self.equations {
            write!(f, "{v} = {rhs}; ")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for RecSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (kw, style) = match self.kind {
            ActionKind::APSend => ("ps", "abs "),
            ActionKind::RPSend => ("ps", "rel "),
            ActionKind::APRecv => ("pr", "abs "),
            ActionKind::RPRecv => ("pr", "rel "),
            ActionKind::AESend => ("es", ""),
            ActionKind::AERecv => ("er", ""),
        };
        write!(f, "{kw}({},{}; {style}", self.channel, self.datum)?;
        match &self.timing {
            Timing::At(t) => write!(f, "{t}")?,
            Timing::Window(lo, hi) => write!(f, "{lo}..{hi}")?,
        }
        write!(f, "; {})", self.point)
    }
}

impl fmt::Display for ActionPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, atom) in self.atoms.iter().enumerate() {
            if i > 0 {
                write!(f, " | ")?;
            }
            let kind = match atom.kind {
                PatternKind::Send => "send",
                PatternKind::Recv => "recv",
                PatternKind::Any => "any",
            };
            write!(f, "{kind}(")?;
            for (j, c) in atom.channels.iter().enumerate() {
                write!(f, "{}{c}", if j > 0 { "," } else { "" })?;
            }
            write!(f, ")")?;
            if let Some(data) = &atom.data {
                write!(f, ":{{")?;
                for (j, d) in data.iter().enumerate() {
                    write!(f, "{}{d}", if j > 0 { "," } else { "" })?;
                }
                write!(f, "}}")?;
            }
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_actual_send() {
        let t = parse_term("es(c,d; 3; (0,0,0))").unwrap();
        assert_eq!(t, Term::Act(Action::es("c", "d", Scalar::int(3), Point::origin())));
    }

    #[test]
    fn rejects_empty_window() {
        let e = parse_term("pr(c,d; abs 5..2; (0,0,0))").unwrap_err();
        assert!(matches!(e, Error::Syntax { .. }));
    }

    #[test]
    fn parses_infinite_dead() {
        assert_eq!(parse_term("dd(abs inf)").unwrap(), Term::ADead(ExtScalar::Infinity));
        assert_eq!(parse_term("dd").unwrap(), Term::Delta);
        assert_eq!(parse_term("dd(rel 1/2)").unwrap(), Term::RDead(Scalar::frac(1, 2).into()));
    }

    #[test]
    fn precedence() {
        let t = parse_term("X + Y . Z || W >> V").unwrap();
        let expected = Term::alt(
            Term::var("X"),
            Term::par(Term::seq(Term::var("Y"), Term::var("Z")), Term::timeout(Term::var("W"), Term::var("V"))),
        );
        assert_eq!(t, expected);
        let t = parse_term("A . B . C").unwrap();
        assert_eq!(t, Term::seq(Term::var("A"), Term::seq(Term::var("B"), Term::var("C"))));
        let t = parse_term("A |_ B |_ C").unwrap();
        assert_eq!(t, Term::left_merge(Term::left_merge(Term::var("A"), Term::var("B")), Term::var("C")));
    }

    #[test]
    fn state_and_patterns() {
        let src = "mp[recv(c3,c4) | send(c):{d,e}](L{c,k}@1/2:{(c,d#0,1,(0,0,0))}(ps(c,d; rel 2; (1,0,0))))";
        let t = parse_term(src).unwrap();
        assert_eq!(parse_term(&t.to_string()).unwrap(), t);
        let Term::MaxProg(h, _) = &t else { panic!() };
        assert_eq!(h.atoms.len(), 2);
    }

    #[test]
    fn recursion() {
        let t = parse_term("rec X { X = es(c,d; 1; (0,0,0)) . Y; Y = dd(abs 2); }").unwrap();
        let Term::Rec(v, spec) = &t else { panic!() };
        assert_eq!(&**v, "X");
        assert_eq!(spec.equations.len(), 2);
        assert_eq!(parse_term(&t.to_string()).unwrap(), t);
        assert!(parse_term("rec X { X = Z; }").is_err());
    }

    #[test]
    fn printing_round_trips_with_parentheses() {
        for src in [
            "(A + B) . C",
            "A . (B . C)",
            "(A . B) . C",
            "A || (B || C)",
            "(A + B) || C",
            "A >> (B |_ C)",
            "(A || B) |_ C",
            "amp[recv(c)](A, B + C)",
            "pr(c,d; rel 0..inf; (1,-2,3/4))",
        ] {
            let t = parse_term(src).unwrap();
            assert_eq!(parse_term(&t.to_string()).unwrap(), t, "{src}");
        }
    }

    #[test]
    fn syntax_error_position() {
        match parse_term("es(c,d; 3; (0,0,0)) + ") {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 22),
            other => panic!("{other:?}"),
        }
    }
}
