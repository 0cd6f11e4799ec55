//! Algebra of reflexive processes.
//!
//! A [`Polynomial`] is a finite set of [`Word`]s with Boolean coefficients:
//! a word is either present (coefficient 1) or absent. Words are ordered
//! sequences of [`Atom`]s read left to right as "process, then its image held
//! by the next element, then that image's image ...", so `Txy` is `y`'s image of
//! `x`'s image of `T`.
//!
//! Addition is set union and multiplication concatenates every pair of words,
//! left operand first. Multiplication is associative and distributes over
//! addition on both sides, but it is not commutative.
//!
//! ```
//! use reflexgrid::algebra::Polynomial;
//!
//! let omega: Polynomial = "T(1+x)(1+y)".parse().unwrap();
//! assert_eq!(omega.to_string(), "T + Tx + Ty + Txy");
//! ```

mod parse;

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;

use thiserror::Error;

pub use parse::parse_expression;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("exponent at byte {pos} is not a natural number")]
    BadExponent { pos: usize },
    #[error("atom letter {0:?} is not alphabetic")]
    InvalidLetter(char),
    #[error("awareness operator needs at least one observer")]
    NoObservers,
    #[error("the unit word has no root process")]
    UnitWord,
}

/// One symbol: a single letter with an optional numeric suffix (`T`, `x`, `a12`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    letter: char,
    index: Option<u32>,
}

impl Atom {
    pub fn new(letter: char) -> Result<Self, AlgebraError> {
        Self::build(letter, None)
    }

    pub fn indexed(letter: char, index: u32) -> Result<Self, AlgebraError> {
        Self::build(letter, Some(index))
    }

    fn build(letter: char, index: Option<u32>) -> Result<Self, AlgebraError> {
        if !letter.is_ascii_alphabetic() {
            return Err(AlgebraError::InvalidLetter(letter));
        }
        Ok(Self { letter, index })
    }

    pub fn letter(&self) -> char {
        self.letter
    }

    pub fn index(&self) -> Option<u32> {
        self.index
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            Some(i) => write!(f, "{}{}", self.letter, i),
            None => write!(f, "{}", self.letter),
        }
    }
}

impl FromStr for Atom {
    type Err = AlgebraError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let word: Word = s.parse()?;
        match word.atoms() {
            // `1x` would normalize to `x`; an atom must be written as one
            [atom]
                if s.trim().starts_with(|c: char| c.is_alphabetic())
                    && !s.trim().contains(char::is_whitespace) =>
            {
                Ok(*atom)
            }
            _ => Err(AlgebraError::Syntax {
                pos: 0,
                msg: format!("{s:?} is not a single atom"),
            }),
        }
    }
}

/// A symbol of a raw (not yet normalized) word: either an atom or a `1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symbol {
    Unit,
    Atom(Atom),
}

impl From<Atom> for Symbol {
    fn from(a: Atom) -> Self {
        Symbol::Atom(a)
    }
}

/// A canonical word. Unit placeholders are never stored; the empty sequence is
/// the unit word `1`.
///
/// Words order by length first, then lexicographically by atom.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<Atom>);

impl Word {
    pub fn unit() -> Self {
        Word(Vec::new())
    }

    pub fn from_atoms(atoms: impl IntoIterator<Item = Atom>) -> Self {
        Word(atoms.into_iter().collect())
    }

    /// Drops every unit placeholder; a word made only of units collapses to `1`.
    pub fn from_symbols(symbols: impl IntoIterator<Item = Symbol>) -> Self {
        Word(
            symbols
                .into_iter()
                .filter_map(|s| match s {
                    Symbol::Unit => None,
                    Symbol::Atom(a) => Some(a),
                })
                .collect(),
        )
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.0
    }

    pub fn is_unit(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut atoms = Vec::with_capacity(self.0.len() + other.0.len());
        atoms.extend_from_slice(&self.0);
        atoms.extend_from_slice(&other.0);
        Word(atoms)
    }

    /// Number of reflection levels above the root process (`T` is 0, `Tyxy` is 3).
    pub fn reflection_depth(&self) -> Result<usize, AlgebraError> {
        self.0.len().checked_sub(1).ok_or(AlgebraError::UnitWord)
    }

    /// The first atom, i.e. the physical process the word is an image of.
    pub fn root(&self) -> Option<Atom> {
        self.0.first().copied()
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for atom in &self.0 {
            write!(f, "{atom}")?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = AlgebraError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let p = parse_expression(s)?;
        let mut words = p.words.into_iter();
        match (words.next(), words.next()) {
            (Some(w), None) => Ok(w),
            _ => Err(AlgebraError::Syntax {
                pos: 0,
                msg: format!("{s:?} does not denote a single word"),
            }),
        }
    }
}

impl From<Atom> for Word {
    fn from(a: Atom) -> Self {
        Word(vec![a])
    }
}

/// A Boolean-coefficient polynomial over words, always kept in canonical form.
///
/// Equality is structural on the canonical word set, so `==` decides whether two
/// expressions denote the same reflexive system.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Polynomial {
    words: BTreeSet<Word>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from(Word::unit())
    }

    /// Canonicalizes a raw sum of raw words: units are cancelled inside each
    /// word and repeated words merge (`a + a = a`).
    pub fn normalize<W, I>(raw: W) -> Self
    where
        W: IntoIterator<Item = I>,
        I: IntoIterator<Item = Symbol>,
    {
        raw.into_iter().map(Word::from_symbols).collect()
    }

    /// Sum of single-atom words, e.g. `x + y + z`.
    pub fn sum_of_atoms(atoms: impl IntoIterator<Item = Atom>) -> Self {
        atoms.into_iter().map(Word::from).collect()
    }

    pub fn words(&self) -> impl ExactSizeIterator<Item = &Word> + DoubleEndedIterator {
        self.words.iter()
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_zero(&self) -> bool {
        self.words.is_empty()
    }

    /// Same as [`Polynomial::is_zero`].
    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    pub fn contains_word(&self, word: &Word) -> bool {
        self.words.contains(word)
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        Polynomial {
            words: self.words.union(&other.words).cloned().collect(),
        }
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut words = BTreeSet::new();
        for a in &self.words {
            for b in &other.words {
                words.insert(a.concat(b));
            }
        }
        Polynomial { words }
    }

    /// `n`-fold product; `p^0 = 1` for every `p`, including zero.
    pub fn pow(&self, n: u32) -> Polynomial {
        let mut acc = Polynomial::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = Polynomial::mul(&acc, &base);
            }
            n >>= 1;
            if n > 0 {
                base = Polynomial::mul(&base, &base);
            }
        }
        acc
    }

    /// The operator of awareness: `self * (1 + Σ observers)`. Each observer gains
    /// an image of every word already in the system.
    pub fn apply_awareness(&self, observers: &[Atom]) -> Result<Polynomial, AlgebraError> {
        if observers.is_empty() {
            return Err(AlgebraError::NoObservers);
        }
        let factor = Polynomial::add(
            &Polynomial::one(),
            &Polynomial::sum_of_atoms(observers.iter().copied()),
        );
        Ok(Polynomial::mul(self, &factor))
    }

    pub fn to_canonical_string(&self) -> String {
        self.to_string()
    }
}

impl FromIterator<Word> for Polynomial {
    fn from_iter<I: IntoIterator<Item = Word>>(iter: I) -> Self {
        Polynomial {
            words: iter.into_iter().collect(),
        }
    }
}

impl Extend<Word> for Polynomial {
    fn extend<I: IntoIterator<Item = Word>>(&mut self, iter: I) {
        self.words.extend(iter);
    }
}

impl From<Word> for Polynomial {
    fn from(w: Word) -> Self {
        Polynomial {
            words: BTreeSet::from([w]),
        }
    }
}

impl From<Atom> for Polynomial {
    fn from(a: Atom) -> Self {
        Word::from(a).into()
    }
}

impl<'a> Add<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &'a Polynomial) -> Polynomial {
        Polynomial::add(self, rhs)
    }
}

impl Add for Polynomial {
    type Output = Polynomial;
    fn add(mut self, rhs: Polynomial) -> Polynomial {
        self.words.extend(rhs.words);
        self
    }
}

impl<'a> Mul<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &'a Polynomial) -> Polynomial {
        Polynomial::mul(self, rhs)
    }
}

impl Mul for Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: Polynomial) -> Polynomial {
        Polynomial::mul(&self, &rhs)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.words.is_empty() {
            return f.write_str("0");
        }
        for (i, w) in self.words.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{w}")?;
        }
        Ok(())
    }
}

impl FromStr for Polynomial {
    type Err = AlgebraError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_expression(s)
    }
}
