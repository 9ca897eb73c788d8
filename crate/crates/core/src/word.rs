//! *-monomials in `L` non-commuting unitary letters and their free-group reduction.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A letter `X_index` or `X_index^*`; `index` is 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub index: usize,
    pub star: bool,
}

impl Letter {
    pub fn plain(index: usize) -> Self {
        Letter { index, star: false }
    }

    pub fn star(index: usize) -> Self {
        Letter { index, star: true }
    }

    pub fn inverse(self) -> Self {
        Letter { index: self.index, star: !self.star }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.index + 1, if self.star { "*" } else { "" })
    }
}

/// Serialized as its display form, e.g. `"2*"`.
impl serde::Serialize for Letter {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl serde::Serialize for StarWord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for Letter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (digits, star) = match s.strip_suffix('*') {
            Some(d) => (d, true),
            None => (s, false),
        };
        let n: usize = digits
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad letter {:?}", s)))?;
        if n == 0 {
            return Err(Error::Parse("letters are numbered from 1".into()));
        }
        Ok(Letter { index: n - 1, star })
    }
}

/// A word `X_{δ(1)}^{ε(1)} ... X_{δ(p)}^{ε(p)}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct StarWord {
    letters: Vec<Letter>,
}

impl StarWord {
    pub fn new(letters: Vec<Letter>) -> Self {
        StarWord { letters }
    }

    pub fn empty() -> Self {
        StarWord { letters: Vec::new() }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// One more than the largest letter index used.
    pub fn alphabet_size(&self) -> usize {
        self.letters.iter().map(|l| l.index + 1).max().unwrap_or(0)
    }

    /// Cancels adjacent `x x*` and `x* x` pairs until none remain.
    pub fn free_reduce(&self) -> StarWord {
        let mut stack: Vec<Letter> = Vec::with_capacity(self.letters.len());
        for &l in &self.letters {
            if stack.last() == Some(&l.inverse()) {
                stack.pop();
            } else {
                stack.push(l);
            }
        }
        StarWord { letters: stack }
    }

    /// True iff the word evaluates to 1 on every family of unitaries.
    pub fn is_trivial(&self) -> bool {
        self.free_reduce().is_empty()
    }

    /// The same letters in reverse order, exponents kept.
    pub fn mirror(&self) -> StarWord {
        StarWord { letters: self.letters.iter().rev().copied().collect() }
    }

    /// Group inverse: reversed order, exponents flipped.
    pub fn inverse(&self) -> StarWord {
        StarWord { letters: self.letters.iter().rev().map(|l| l.inverse()).collect() }
    }

    pub fn concat(&self, other: &StarWord) -> StarWord {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        StarWord { letters }
    }

    /// All words of exactly `len` letters over `alphabet` letters, in a fixed order.
    pub fn all_of_length(alphabet: usize, len: usize) -> Vec<StarWord> {
        let choices: Vec<Letter> = (0..alphabet)
            .flat_map(|i| [Letter::plain(i), Letter::star(i)])
            .collect();
        let mut out = vec![StarWord::empty()];
        for _ in 0..len {
            out = out
                .into_iter()
                .flat_map(|w| {
                    choices.iter().map(move |&c| {
                        let mut letters = w.letters.clone();
                        letters.push(c);
                        StarWord { letters }
                    })
                })
                .collect();
        }
        out
    }
}

impl fmt::Display for StarWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.letters.iter().map(|l| l.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl FromStr for StarWord {
    type Err = Error;

    /// Parses `"1,2,1*,2*"`; the empty string is the empty word.
    fn from_str(s: &str) -> Result<Self> {
        if s.trim().is_empty() {
            return Ok(StarWord::empty());
        }
        let letters = s.split(',').map(str::parse).collect::<Result<Vec<Letter>>>()?;
        Ok(StarWord { letters })
    }
}
