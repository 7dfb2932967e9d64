//! Freely reduced words over a finite alphabet.
//!
//! A letter is a non-zero `i32`: `k > 0` is the `k`-th generator and `-k` its
//! inverse. Letters are ordered `x1 < x1⁻¹ < x2 < x2⁻¹ < ...`; this order
//! induces the shortlex order used for every enumeration and tie-break.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Letter = i32;

/// Position of a letter in the shortlex letter order.
#[inline]
pub fn letter_rank(l: Letter) -> u32 {
    let k = l.unsigned_abs();
    2 * (k - 1) + u32::from(l < 0)
}

#[inline]
pub fn letter_from_rank(r: u32) -> Letter {
    let k = (r / 2 + 1) as i32;
    if r % 2 == 0 {
        k
    } else {
        -k
    }
}

/// Appends `letters` to `buf`, cancelling against its tail.
pub(crate) fn push_reduced(buf: &mut Vec<Letter>, letters: impl IntoIterator<Item = Letter>) {
    for x in letters {
        if buf.last() == Some(&-x) {
            buf.pop();
        } else {
            buf.push(x);
        }
    }
}

/// A freely reduced word; the empty word is the identity.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn identity() -> Self {
        Self::default()
    }

    /// Builds the reduced form of an arbitrary letter sequence. Zero letters
    /// are rejected.
    pub fn new<I: IntoIterator<Item = Letter>>(letters: I) -> Result<Self> {
        let mut buf = Vec::new();
        for x in letters {
            if x == 0 {
                return Err(Error::WordParse {
                    input: String::new(),
                    reason: "letter 0 is not a generator".into(),
                });
            }
            push_reduced(&mut buf, [x]);
        }
        Ok(Self { letters: buf })
    }

    /// Wraps letters the caller guarantees are already reduced and non-zero.
    pub(crate) fn from_reduced(letters: Vec<Letter>) -> Self {
        debug_assert!(letters.windows(2).all(|w| w[0] != -w[1]));
        debug_assert!(!letters.contains(&0));
        Self { letters }
    }

    pub fn generator(k: u32) -> Self {
        Self::from_reduced(vec![k as Letter])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    /// `|g|`, the word-metric distance to the identity.
    pub fn word_length(&self) -> usize {
        self.letters.len()
    }

    /// Largest generator index used, 0 for the identity.
    pub fn max_generator(&self) -> u32 {
        self.letters.iter().map(|l| l.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn inverse(&self) -> Self {
        Self::from_reduced(self.letters.iter().rev().map(|x| -x).collect())
    }

    pub fn multiply(&self, other: &Word) -> Word {
        let mut buf = Vec::with_capacity(self.len() + other.len());
        buf.extend_from_slice(&self.letters);
        push_reduced(&mut buf, other.letters.iter().copied());
        Self::from_reduced(buf)
    }

    /// `g⁻¹ · self · g`.
    pub fn conjugate_by(&self, g: &Word) -> Word {
        g.inverse().multiply(self).multiply(g)
    }

    pub fn pow(&self, m: i64) -> Word {
        let base = if m < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::identity();
        for _ in 0..m.unsigned_abs() {
            out = out.multiply(&base);
        }
        out
    }

    pub fn last(&self) -> Option<Letter> {
        self.letters.last().copied()
    }

    /// Splits `self = p · c · p⁻¹` with `c` cyclically reduced.
    pub fn cyclic_decomposition(&self) -> (Word, Word) {
        let w = &self.letters;
        let mut i = 0;
        while w.len() >= 2 * (i + 1) && w[i] == -w[w.len() - 1 - i] {
            i += 1;
        }
        let prefix = Word::from_reduced(w[..i].to_vec());
        let core = Word::from_reduced(w[i..w.len() - i].to_vec());
        (prefix, core)
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        self.letters.len() < 2 || self.letters[0] != -self.letters[self.letters.len() - 1]
    }

    /// Left rotation of a cyclically reduced word: `w[k..] w[..k]`.
    pub fn rotate_left(&self, k: usize) -> Word {
        let n = self.letters.len();
        if n == 0 {
            return self.clone();
        }
        let k = k % n;
        let mut v = Vec::with_capacity(n);
        v.extend_from_slice(&self.letters[k..]);
        v.extend_from_slice(&self.letters[..k]);
        Word::from_reduced(v)
    }

    /// The primitive root `z` with `self = z^m`, `m ≥ 1`, for a non-trivial
    /// word. Roots of conjugates `p c p⁻¹` are `p r p⁻¹` with `r` the root of
    /// the cyclically reduced core `c`.
    pub fn primitive_root(&self) -> (Word, usize) {
        if self.is_identity() {
            return (Word::identity(), 0);
        }
        let (p, c) = self.cyclic_decomposition();
        let n = c.len();
        let period = (1..=n)
            .filter(|d| n % d == 0)
            .find(|&d| (d..n).all(|i| c.letters[i] == c.letters[i - d]))
            .unwrap_or(n);
        let root = Word::from_reduced(c.letters[..period].to_vec());
        (root.conjugate_by(&p.inverse()), n / period)
    }

    pub fn commutes_with(&self, other: &Word) -> bool {
        self.multiply(other) == other.multiply(self)
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        shortlex_cmp(&self.letters, &other.letters)
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn shortlex_cmp(a: &[Letter], b: &[Letter]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| {
        a.iter()
            .map(|&l| letter_rank(l))
            .cmp(b.iter().map(|&l| letter_rank(l)))
    })
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&Alphabet::standard(26).format(self))
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Alphabet::standard(26)
            .parse(&s)
            .map_err(serde::de::Error::custom)
    }
}

/// Generator names for parsing and printing words. Lowercase names are
/// generators, the matching uppercase letter is the inverse, juxtaposition is
/// multiplication. `""` and `"1"` both denote the identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<char>,
}

impl Alphabet {
    /// The first `rank` letters `a, b, c, ...`.
    pub fn standard(rank: u32) -> Self {
        let rank = rank.min(26);
        Self {
            names: (0..rank).map(|i| (b'a' + i as u8) as char).collect(),
        }
    }

    /// Custom generator names, e.g. `"xy"`.
    pub fn named(names: &str) -> Result<Self> {
        let names: Vec<char> = names.chars().collect();
        if names.is_empty() {
            return Err(Error::Config("alphabet needs at least one generator".into()));
        }
        for (i, c) in names.iter().enumerate() {
            if !c.is_ascii_lowercase() {
                return Err(Error::Config(format!(
                    "generator name {c:?} is not a lowercase ASCII letter"
                )));
            }
            if names[..i].contains(c) {
                return Err(Error::Config(format!("generator name {c:?} repeated")));
            }
        }
        Ok(Self { names })
    }

    /// Accepts either a rank (`"2"`) or a list of generator names (`"xy"`).
    pub fn from_spec(spec: &str) -> Result<Self> {
        match spec.trim().parse::<u32>() {
            Ok(0) => Err(Error::Config("alphabet rank must be at least 1".into())),
            Ok(n) if n > 26 => Err(Error::Config(format!(
                "alphabet rank {n} exceeds the 26 available letters"
            ))),
            Ok(n) => Ok(Self::standard(n)),
            Err(_) => Self::named(spec.trim()),
        }
    }

    pub fn rank(&self) -> u32 {
        self.names.len() as u32
    }

    pub fn names(&self) -> String {
        self.names.iter().collect()
    }

    pub fn parse(&self, input: &str) -> Result<Word> {
        let s = input.trim();
        if s.is_empty() || s == "1" {
            return Ok(Word::identity());
        }
        let mut buf = Vec::with_capacity(s.len());
        for c in s.chars() {
            if c.is_whitespace() || c == '*' || c == '.' {
                continue;
            }
            let lower = c.to_ascii_lowercase();
            let idx = self
                .names
                .iter()
                .position(|&n| n == lower)
                .ok_or_else(|| Error::WordParse {
                    input: input.to_string(),
                    reason: format!("{c:?} is not in alphabet {:?}", self.names()),
                })?;
            let k = idx as Letter + 1;
            push_reduced(&mut buf, [if c.is_ascii_uppercase() { -k } else { k }]);
        }
        Ok(Word::from_reduced(buf))
    }

    /// Parses a comma-separated list of words.
    pub fn parse_list(&self, input: &str) -> Result<Vec<Word>> {
        input.split(',').map(|w| self.parse(w)).collect()
    }

    pub fn format(&self, w: &Word) -> String {
        w.letters()
            .iter()
            .map(|&l| {
                let i = (l.unsigned_abs() - 1) as usize;
                let c = self.names.get(i).copied().unwrap_or('?');
                if l < 0 {
                    c.to_ascii_uppercase()
                } else {
                    c
                }
            })
            .collect()
    }

    pub fn check(&self, w: &Word) -> Result<()> {
        if w.max_generator() > self.rank() {
            return Err(Error::AlphabetMismatch {
                left: w.max_generator(),
                right: self.rank(),
            });
        }
        Ok(())
    }
}

/// Number of reduced words of length `≤ radius` in the free group of rank
/// `n`: `1 + Σ_{k=1..R} 2n(2n−1)^{k−1}`.
pub fn ball_size(rank: u32, radius: u32) -> u128 {
    let n = u128::from(rank);
    let mut total = 1u128;
    let mut layer = 2 * n;
    for _ in 0..radius {
        total = total.saturating_add(layer);
        layer = layer.saturating_mul((2 * n).saturating_sub(1));
    }
    total
}

/// Streams every reduced word of length `≤ radius` exactly once, in shortlex
/// order. Memory is `O(radius)`: each length is walked by an odometer over
/// letter ranks that skips cancelling neighbours.
#[derive(Clone, Debug)]
pub struct ShortlexBall {
    rank: u32,
    radius: u32,
    ranks: Vec<u32>,
    started: bool,
    done: bool,
}

pub fn enumerate_ball(rank: u32, radius: u32) -> ShortlexBall {
    ShortlexBall::new(rank, radius)
}

impl ShortlexBall {
    pub fn new(rank: u32, radius: u32) -> Self {
        Self {
            rank,
            radius,
            ranks: Vec::new(),
            started: false,
            done: false,
        }
    }

    /// Restricts to words of exactly `len` letters starting with `first`.
    /// Used to partition one shortlex layer between workers.
    pub fn layer_with_prefix(rank: u32, len: u32, first: Letter) -> impl Iterator<Item = Word> {
        let mut it = ShortlexBall::new(rank, len);
        let mut init = vec![letter_rank(first)];
        // smallest completion of the prefix
        for _ in 1..len {
            let prev = *init.last().unwrap();
            init.push(smallest_after(prev));
        }
        it.ranks = init;
        it.started = len > 0;
        let mut emitted_first = false;
        std::iter::from_fn(move || {
            if len == 0 {
                if emitted_first {
                    return None;
                }
                emitted_first = true;
                return Some(Word::identity());
            }
            if !emitted_first {
                emitted_first = true;
                return Some(it.current());
            }
            if !it.advance_within_length() || letter_from_rank(it.ranks[0]) != first {
                return None;
            }
            Some(it.current())
        })
    }

    fn current(&self) -> Word {
        Word::from_reduced(self.ranks.iter().map(|&r| letter_from_rank(r)).collect())
    }

    fn alphabet_len(&self) -> u32 {
        2 * self.rank
    }

    /// Next word of the same length in lex order, `false` if exhausted.
    fn advance_within_length(&mut self) -> bool {
        let n = self.ranks.len();
        let top = self.alphabet_len();
        let mut i = n;
        while i > 0 {
            i -= 1;
            let mut r = self.ranks[i] + 1;
            if i > 0 && r == inverse_rank(self.ranks[i - 1]) {
                r += 1;
            }
            if r < top {
                self.ranks[i] = r;
                for j in i + 1..n {
                    self.ranks[j] = smallest_after(self.ranks[j - 1]);
                }
                return true;
            }
        }
        false
    }
}

#[inline]
fn inverse_rank(r: u32) -> u32 {
    r ^ 1
}

#[inline]
fn smallest_after(prev: u32) -> u32 {
    if inverse_rank(prev) == 0 {
        1
    } else {
        0
    }
}

impl Iterator for ShortlexBall {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(Word::identity());
        }
        if self.rank == 0 {
            self.done = true;
            return None;
        }
        if !self.ranks.is_empty() && self.advance_within_length() {
            return Some(self.current());
        }
        let next_len = self.ranks.len() as u32 + 1;
        if next_len > self.radius {
            self.done = true;
            return None;
        }
        self.ranks.clear();
        self.ranks.push(0);
        for _ in 1..next_len {
            let prev = *self.ranks.last().unwrap();
            self.ranks.push(smallest_after(prev));
        }
        Some(self.current())
    }
}
