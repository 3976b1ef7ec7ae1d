//! Group words as expression trees, with S-expression syntax.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::GroupError;

/// A group element built from generators `g1, g2, ...`.
///
/// `Gen(i)` with `i > 0` is generator `i`; `Gen(-i)` is its inverse.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CommutatorExpr {
    Gen(i32),
    Product(Vec<CommutatorExpr>),
    Inverse(Box<CommutatorExpr>),
    /// `[a, b] = a b a^-1 b^-1`.
    Commutator(Box<CommutatorExpr>, Box<CommutatorExpr>),
}

impl CommutatorExpr {
    pub fn gen(i: usize) -> Self {
        CommutatorExpr::Gen(i as i32 + 1)
    }

    pub fn comm(a: CommutatorExpr, b: CommutatorExpr) -> Self {
        CommutatorExpr::Commutator(Box::new(a), Box::new(b))
    }

    pub fn inv(a: CommutatorExpr) -> Self {
        CommutatorExpr::Inverse(Box::new(a))
    }

    /// Commutator nesting depth; generators have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            CommutatorExpr::Gen(_) => 0,
            CommutatorExpr::Product(v) => v.iter().map(Self::depth).max().unwrap_or(0),
            CommutatorExpr::Inverse(a) => a.depth(),
            CommutatorExpr::Commutator(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Largest generator index used (1-based), 0 when none.
    pub fn max_generator(&self) -> usize {
        match self {
            CommutatorExpr::Gen(i) => i.unsigned_abs() as usize,
            CommutatorExpr::Product(v) => v.iter().map(Self::max_generator).max().unwrap_or(0),
            CommutatorExpr::Inverse(a) => a.max_generator(),
            CommutatorExpr::Commutator(a, b) => a.max_generator().max(b.max_generator()),
        }
    }

    /// Expanded word of signed generator letters, without reduction.
    pub fn letters(&self) -> Vec<i32> {
        let mut out = Vec::new();
        self.push_letters(false, &mut out);
        out
    }

    fn push_letters(&self, inverted: bool, out: &mut Vec<i32>) {
        match self {
            CommutatorExpr::Gen(i) => out.push(if inverted { -i } else { *i }),
            CommutatorExpr::Product(v) => {
                if inverted {
                    v.iter().rev().for_each(|e| e.push_letters(true, out));
                } else {
                    v.iter().for_each(|e| e.push_letters(false, out));
                }
            }
            CommutatorExpr::Inverse(a) => a.push_letters(!inverted, out),
            CommutatorExpr::Commutator(a, b) => {
                // [a, b]^-1 = b a b^-1 a^-1
                let seq: [(&CommutatorExpr, bool); 4] = if inverted {
                    [(b, false), (a, false), (b, true), (a, true)]
                } else {
                    [(a, false), (b, false), (a, true), (b, true)]
                };
                for (e, inv) in seq {
                    e.push_letters(inv, out);
                }
            }
        }
    }

    /// The freely reduced word.
    pub fn reduced_word(&self) -> Vec<i32> {
        free_reduce(&self.letters())
    }

    /// The freely reduced word as a flat product expression.
    pub fn free_reduce(&self) -> CommutatorExpr {
        CommutatorExpr::Product(self.reduced_word().into_iter().map(CommutatorExpr::Gen).collect())
    }

    pub fn to_sexpr(&self) -> String {
        self.to_string()
    }

    /// Parses `g1`, `(inv e)`, `(mul e ...)` and `(comm a b)`.
    pub fn parse(s: &str) -> Result<Self, GroupError> {
        let tokens = tokenize(s);
        let mut pos = 0;
        let e = parse_expr(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(GroupError::Parse(format!("trailing input after position {pos}")));
        }
        Ok(e)
    }
}

/// Cancels adjacent `x x^-1` pairs.
pub fn free_reduce(word: &[i32]) -> Vec<i32> {
    let mut out: Vec<i32> = Vec::with_capacity(word.len());
    for &l in word {
        if out.last() == Some(&-l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

impl fmt::Display for CommutatorExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CommutatorExpr::Gen(i) if *i > 0 => write!(f, "g{i}"),
            CommutatorExpr::Gen(i) => write!(f, "(inv g{})", -i),
            CommutatorExpr::Product(v) => {
                write!(f, "(mul")?;
                for e in v {
                    write!(f, " {e}")?;
                }
                write!(f, ")")
            }
            CommutatorExpr::Inverse(a) => write!(f, "(inv {a})"),
            CommutatorExpr::Commutator(a, b) => write!(f, "(comm {a} {b})"),
        }
    }
}

fn tokenize(s: &str) -> Vec<String> {
    s.replace('(', " ( ").replace(')', " ) ").split_whitespace().map(String::from).collect()
}

fn parse_expr(t: &[String], pos: &mut usize) -> Result<CommutatorExpr, GroupError> {
    let tok = t.get(*pos).ok_or_else(|| GroupError::Parse("unexpected end of input".into()))?;
    *pos += 1;
    if tok != "(" {
        let idx = tok
            .strip_prefix('g')
            .and_then(|n| n.parse::<i32>().ok())
            .filter(|&i| i >= 1)
            .ok_or_else(|| GroupError::Parse(format!("bad generator `{tok}`")))?;
        return Ok(CommutatorExpr::Gen(idx));
    }
    let head = t.get(*pos).ok_or_else(|| GroupError::Parse("missing operator".into()))?.clone();
    *pos += 1;
    let mut args = Vec::new();
    while t.get(*pos).map(String::as_str) != Some(")") {
        if *pos >= t.len() {
            return Err(GroupError::Parse("unbalanced parentheses".into()));
        }
        args.push(parse_expr(t, pos)?);
    }
    *pos += 1;
    match (head.as_str(), args.len()) {
        ("inv", 1) => Ok(CommutatorExpr::inv(args.pop().unwrap())),
        ("comm", 2) => {
            let b = args.pop().unwrap();
            Ok(CommutatorExpr::comm(args.pop().unwrap(), b))
        }
        ("mul", _) => Ok(CommutatorExpr::Product(args)),
        (h, n) => Err(GroupError::Parse(format!("operator `{h}` with {n} arguments"))),
    }
}

impl Serialize for CommutatorExpr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for CommutatorExpr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        CommutatorExpr::parse(&s).map_err(serde::de::Error::custom)
    }
}
