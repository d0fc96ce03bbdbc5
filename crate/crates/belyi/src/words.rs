//! Turn words in the parabolic generators `L` and `R` and their traces.
//!
//! A non-backtracking path in the dual graph of an ideal triangulation turns
//! left or right at every vertex it crosses. Substituting
//!
//! ```text
//! L = [1 1]      R = [1 0]
//!     [0 1]          [1 1]
//! ```
//!
//! for the letters gives a 2x2 nonnegative integer matrix of determinant one;
//! the geodesic length of a closed curve carrying the word `w` is
//! `2·acosh(tr(w)/2)`.
//!
//! Traces are kept exact. The matrix type uses 64-bit entries with an
//! explicit saturation flag; every operation that compares against a
//! threshold only ever needs to distinguish "exact value below the cap" from
//! "at least the cap", which saturation preserves.

use std::fmt;
use std::str::FromStr;

/// One turn of a non-backtracking path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    L,
    R,
}

impl Letter {
    /// The letter recorded when the same turn is traversed backwards.
    pub fn flip(self) -> Letter {
        match self {
            Letter::L => Letter::R,
            Letter::R => Letter::L,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::L => 'L',
            Letter::R => 'R',
        }
    }
}

/// A finite (possibly empty) word over `{L, R}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Word {
        Word(Vec::new())
    }

    pub fn new(letters: Vec<Letter>) -> Word {
        Word(letters)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, l: Letter) {
        self.0.push(l);
    }

    pub fn pop(&mut self) -> Option<Letter> {
        self.0.pop()
    }

    /// `w` repeated `k` times.
    pub fn power(&self, k: usize) -> Word {
        assert!(k >= 1, "power_word requires k >= 1");
        let mut out = Vec::with_capacity(self.len() * k);
        for _ in 0..k {
            out.extend_from_slice(&self.0);
        }
        Word(out)
    }

    /// Rotation moving the first `i` letters to the end.
    pub fn rotated(&self, i: usize) -> Word {
        let n = self.len();
        assert!(n > 0);
        let i = i % n;
        let mut out = Vec::with_capacity(n);
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&self.0[..i]);
        Word(out)
    }

    /// Lexicographically least rotation. Two nonempty words have equal
    /// canonical form iff they are rotations of each other.
    pub fn canonical_rotation(&self) -> Word {
        assert!(!self.is_empty(), "canonical form of the empty word");
        (0..self.len()).map(|i| self.rotated(i)).min().unwrap()
    }

    /// The word carried by the same cycle traversed backwards: reverse the
    /// letters and flip each one.
    pub fn inverse_cycle(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.flip()).collect())
    }

    /// Least rotation over both traversal directions; one representative per
    /// free homotopy class of unoriented curve.
    pub fn canonical_unoriented(&self) -> Word {
        let fwd = self.canonical_rotation();
        let bwd = self.inverse_cycle().canonical_rotation();
        fwd.min(bwd)
    }

    pub fn is_pure(&self) -> bool {
        self.0.windows(2).all(|w| w[0] == w[1])
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

/// Error for malformed word strings or out-of-domain traces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WordError {
    BadLetter(char),
    TraceBelowTwo(u64),
}

impl fmt::Display for WordError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WordError::BadLetter(c) => write!(f, "invalid letter {c:?}, expected L or R"),
            WordError::TraceBelowTwo(t) => {
                write!(f, "trace {t} is below 2, not the trace of a turn word")
            }
        }
    }
}

impl std::error::Error for WordError {}

impl FromStr for Word {
    type Err = WordError;

    fn from_str(s: &str) -> Result<Word, WordError> {
        s.chars()
            .map(|c| match c {
                'L' => Ok(Letter::L),
                'R' => Ok(Letter::R),
                other => Err(WordError::BadLetter(other)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Word)
    }
}

/// 2x2 nonnegative integer matrix with saturating 64-bit entries.
///
/// While `saturated` is false all entries (and the determinant 1 invariant)
/// are exact. Entries never wrap: arithmetic saturates at `u64::MAX` and the
/// flag records that the exact value has been lost.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Mat {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
    pub saturated: bool,
}

impl Mat {
    pub const IDENTITY: Mat = Mat {
        a: 1,
        b: 0,
        c: 0,
        d: 1,
        saturated: false,
    };

    pub fn from_letter(l: Letter) -> Mat {
        match l {
            Letter::L => Mat {
                a: 1,
                b: 1,
                c: 0,
                d: 1,
                saturated: false,
            },
            Letter::R => Mat {
                a: 1,
                b: 0,
                c: 1,
                d: 1,
                saturated: false,
            },
        }
    }

    /// Right-multiplication by a letter: appends one turn to the word.
    pub fn times_letter(self, l: Letter) -> Mat {
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        let (a2, b2, c2, d2) = match l {
            // [a b] [1 1]   [a a+b]      [a b] [1 0]   [a+b b]
            // [c d] [0 1] = [c c+d]      [c d] [1 1] = [c+d d]
            Letter::L => (a, a.saturating_add(b), c, c.saturating_add(d)),
            Letter::R => (a.saturating_add(b), b, c.saturating_add(d), d),
        };
        let saturated = self.saturated || [a2, b2, c2, d2].contains(&u64::MAX);
        Mat {
            a: a2,
            b: b2,
            c: c2,
            d: d2,
            saturated,
        }
    }

    pub fn mul(self, rhs: Mat) -> Mat {
        fn dot(x: u64, y: u64, z: u64, w: u64) -> u64 {
            x.saturating_mul(y).saturating_add(z.saturating_mul(w))
        }
        let a = dot(self.a, rhs.a, self.b, rhs.c);
        let b = dot(self.a, rhs.b, self.b, rhs.d);
        let c = dot(self.c, rhs.a, self.d, rhs.c);
        let d = dot(self.c, rhs.b, self.d, rhs.d);
        let saturated = self.saturated || rhs.saturated || [a, b, c, d].contains(&u64::MAX);
        Mat {
            a,
            b,
            c,
            d,
            saturated,
        }
    }

    pub fn transpose(self) -> Mat {
        Mat {
            a: self.a,
            b: self.c,
            c: self.b,
            d: self.d,
            saturated: self.saturated,
        }
    }

    pub fn trace(self) -> u64 {
        self.a.saturating_add(self.d)
    }
}

/// An exact trace below some cap, or the certificate that it is at least
/// the cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Trace {
    Exact(u64),
    AtLeast(u64),
}

impl Trace {
    pub fn is_at_least(self, threshold: u64) -> bool {
        match self {
            Trace::Exact(t) => t >= threshold,
            Trace::AtLeast(cap) => cap >= threshold,
        }
    }

    pub fn exact(self) -> Option<u64> {
        match self {
            Trace::Exact(t) => Some(t),
            Trace::AtLeast(_) => None,
        }
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Trace::Exact(t) => write!(f, "{t}"),
            Trace::AtLeast(c) => write!(f, ">={c}"),
        }
    }
}

/// The ordered matrix product of `w`. With a cap, entries are clamped at the
/// cap and flagged; clamped results are only good for threshold comparisons.
pub fn word_matrix(w: &Word, cap: Option<u64>) -> Mat {
    let mut m = Mat::IDENTITY;
    for &l in w.letters() {
        m = m.times_letter(l);
    }
    if let Some(cap) = cap {
        if [m.a, m.b, m.c, m.d].iter().any(|&e| e >= cap) {
            return Mat {
                a: m.a.min(cap),
                b: m.b.min(cap),
                c: m.c.min(cap),
                d: m.d.min(cap),
                saturated: true,
            };
        }
    }
    m
}

/// Exact trace of `w` (saturating only far beyond desk scale).
pub fn trace_of(w: &Word) -> u64 {
    word_matrix(w, None).trace()
}

/// Trace of `w`, reported exactly when below `cap`.
pub fn trace_capped(w: &Word, cap: u64) -> Trace {
    let t = trace_of(w);
    if t < cap {
        Trace::Exact(t)
    } else {
        Trace::AtLeast(cap)
    }
}

/// Hyperbolic length `2·acosh(t/2)` of a closed geodesic of trace `t`.
pub fn geodesic_length(t: u64) -> Result<f64, WordError> {
    if t < 2 {
        return Err(WordError::TraceBelowTwo(t));
    }
    Ok(2.0 * (t as f64 / 2.0).acosh())
}

/// Trace of the `k`-th power of an element of trace `t`, via the recurrence
/// `t_{k+1} = t·t_k − t_{k−1}`; exact below `cap`, else `AtLeast(cap)`.
///
/// For `t ≥ 2` the sequence is nondecreasing, so once it reaches the cap it
/// stays there and clamping is sound.
pub fn power_trace(t: u64, k: u64, cap: u64) -> Trace {
    assert!(t >= 2, "power_trace needs a hyperbolic or parabolic trace");
    assert!(k >= 1);
    let clamp = |x: u128| -> u128 { x.min(cap as u128) };
    let mut prev: u128 = 2; // trace of the 0th power
    let mut cur: u128 = t as u128;
    for _ in 1..k {
        let next = clamp((t as u128) * cur - prev);
        prev = cur;
        cur = next;
    }
    if cur >= cap as u128 {
        Trace::AtLeast(cap)
    } else {
        Trace::Exact(cur as u64)
    }
}

/// Visits every word with `lo ≤ tr ≤ hi` exactly once (`lo ≥ 3`).
///
/// Depth-first over prefixes. Appending a letter never decreases the trace,
/// so a mixed prefix with trace above `hi` is pruned. A leading pure run of
/// more than `hi − 2` identical letters is pruned too: any mixed completion
/// of `L^a...` has trace at least `a + 2`.
pub fn for_each_word_trace_between(lo: u64, hi: u64, mut visit: impl FnMut(&Word, u64)) {
    assert!(lo >= 3, "pure powers make the set below trace 3 infinite");
    if hi < lo {
        return;
    }
    let mut prefix = Word::empty();
    for first in [Letter::L, Letter::R] {
        descend(first, Mat::from_letter(first), 1, &mut prefix, lo, hi, &mut visit);
    }

    fn descend(
        letter: Letter,
        m: Mat,
        pure_run: usize, // letters so far if the prefix is still pure, else 0
        prefix: &mut Word,
        lo: u64,
        hi: u64,
        visit: &mut impl FnMut(&Word, u64),
    ) {
        prefix.push(letter);
        let t = m.trace();
        let mixed = pure_run == 0;
        if mixed && t > hi {
            prefix.0.pop();
            return;
        }
        if mixed && t >= lo {
            visit(prefix, t);
        }
        // A mixed word with trace == hi only has extensions of larger trace.
        let extend_ok = !(mixed && t >= hi) && !(pure_run as u64 > hi.saturating_sub(2));
        if extend_ok {
            for next in [Letter::L, Letter::R] {
                let run = if next == letter && !mixed { pure_run + 1 } else { 0 };
                descend(next, m.times_letter(next), run, prefix, lo, hi, visit);
            }
        }
        prefix.0.pop();
    }
}

/// All words `w` with `lo ≤ tr(w) ≤ hi`, sorted.
pub fn enumerate_words_trace_between(lo: u64, hi: u64) -> Vec<Word> {
    let mut out = Vec::new();
    for_each_word_trace_between(lo, hi, |w, _| out.push(w.clone()));
    out.sort();
    out
}

/// `counts[t]` = number of words of trace exactly `t`, for `t ≤ hi`.
pub fn trace_counts(hi: u64) -> Vec<u64> {
    let mut counts = vec![0u64; hi as usize + 1];
    for_each_word_trace_between(3, hi, |_, t| counts[t as usize] += 1);
    counts
}
