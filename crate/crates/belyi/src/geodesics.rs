//! Trace distance, short closed geodesics and exact systoles.
//!
//! Every closed geodesic is homotopic to a unique non-backtracking cycle in
//! the dual graph, and its length is `2·acosh(tr/2)` of the cycle's turn
//! word. Appending a letter never decreases the trace, so both the
//! point-to-point search and the cycle enumeration are complete under
//! trace-bounded pruning: nothing below the cap is missed.

use std::collections::HashSet;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::surface::{Slot, Surface, SurfaceError};
use crate::words::{geodesic_length, Letter, Mat, Trace, Word};

/// All walks that enter the vertex of `entry` along `entry` and leave the
/// surface through a dangling slot, with word trace below `cap` (pure walks
/// of trace 2 included). Returns `(exit slot, word matrix)` per walk.
///
/// Pure runs are cut at `cap - 2` letters: extending a run `L^a` by the
/// other letter costs at least trace `a + 2`, and longer all-pure walks are
/// either trace-2 cusp loops or combine into words of trace at least the
/// cap, so nothing below the cap is lost. The cut also keeps the walk out
/// of closed interior cusp fans, where a pure walk would circle forever.
pub fn dangling_reach(s: &Surface, entry: Slot, cap: u64) -> Vec<(Slot, Mat)> {
    let max_run = cap.saturating_sub(2);
    let mut out = Vec::new();
    let mut stack: Vec<(Slot, Mat, u64, Option<Letter>)> =
        vec![(entry, Mat::IDENTITY, 0, None)];
    while let Some((incoming, m, run, last)) = stack.pop() {
        for letter in [Letter::L, Letter::R] {
            let new_run = match last {
                None => 1,
                Some(l) if run > 0 && l == letter => run + 1,
                Some(_) => 0,
            };
            if new_run > max_run {
                continue;
            }
            let m2 = m.times_letter(letter);
            if m2.trace() >= cap {
                continue;
            }
            let exit = incoming.turn(letter);
            match s.pairing(exit) {
                None => out.push((exit, m2)),
                Some(next) => stack.push((next, m2, new_run, Some(letter))),
            }
        }
    }
    out
}

/// Minimal trace over connecting paths of trace `> 2`, reported exactly when
/// below `tau0`. Gluing a pair at trace distance below the threshold would
/// close up a geodesic shorter than `2·acosh(tau0/2)`.
///
/// Degenerate thresholds `tau0 <= 2` simply report `AtLeast(tau0)` for every
/// pair (no path has trace below 3), making every pair available.
pub fn trace_distance(s: &Surface, h1: Slot, h2: Slot, tau0: u64) -> Trace {
    assert!(h1 != h2, "trace distance needs two distinct half-edges");
    assert!(s.is_dangling(h1) && s.is_dangling(h2));
    let mut best: Option<u64> = None;
    for (end, m) in dangling_reach(s, h1, tau0) {
        let t = m.trace();
        if end == h2 && t > 2 && best.map_or(true, |b| t < b) {
            best = Some(t);
        }
    }
    match best {
        Some(t) => Trace::Exact(t),
        None => Trace::AtLeast(tau0),
    }
}

/// Minimal `k` such that a pure turn word `L^k` or `R^k` connects `h1` to
/// `h2`, if any. Such a connection means the two sides share a boundary
/// cusp with `k` incident triangle corners.
pub fn pure_turn_runs(s: &Surface, h1: Slot, h2: Slot) -> Option<usize> {
    assert!(h1 != h2, "pure runs of a slot with itself are a cusp, not a pair");
    let mut best: Option<usize> = None;
    for letter in [Letter::L, Letter::R] {
        if let Ok((end, k)) = s.pure_walk(h1, letter) {
            if end == h2 && best.map_or(true, |b| k < b) {
                best = Some(k);
            }
        }
    }
    best
}

/// Dangling partners of `h` reachable by a path of trace in `(2, cap)`,
/// with the minimal such trace per partner.
pub fn conflict_partners(s: &Surface, h: Slot, cap: u64) -> Vec<(Slot, u64)> {
    let mut best: std::collections::BTreeMap<Slot, u64> = Default::default();
    for (end, m) in dangling_reach(s, h, cap) {
        let t = m.trace();
        if end != h && t > 2 {
            best.entry(end).and_modify(|b| *b = (*b).min(t)).or_insert(t);
        }
    }
    best.into_iter().collect()
}

/// A closed geodesic as a dart cycle with its word, trace and length.
#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicCert {
    /// Incoming-slot cycle, rotated to its least representative.
    pub darts: Vec<Slot>,
    /// Cyclic turn word, canonical up to rotation and inversion.
    pub word: Word,
    pub trace: u64,
    pub length: f64,
}

impl Serialize for GeodesicCert {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("GeodesicCert", 3)?;
        st.serialize_field("word", &self.word.to_string())?;
        st.serialize_field("trace", &self.trace)?;
        st.serialize_field("length", &self.length)?;
        st.end()
    }
}

/// Index of the lexicographically least rotation, by Booth's algorithm.
fn least_rotation_index<T: Ord>(xs: &[T]) -> usize {
    let n = xs.len();
    debug_assert!(n > 0);
    let at = |i: usize| &xs[i % n];
    let mut f: Vec<isize> = vec![-1; 2 * n];
    let mut k: usize = 0;
    for j in 1..2 * n {
        let sj = at(j);
        let mut i = f[j - k - 1];
        while i != -1 && sj != at(k + i as usize + 1) {
            if sj < at(k + i as usize + 1) {
                k = j - i as usize - 1;
            }
            i = f[i as usize];
        }
        if i == -1 && sj != at(k) {
            if sj < at(k) {
                k = j;
            }
            f[j - k] = -1;
        } else {
            f[j - k] = i + 1;
        }
    }
    k
}

fn min_rotation<T: Ord + Clone>(xs: &[T]) -> Vec<T> {
    let k = least_rotation_index(xs);
    let mut out = Vec::with_capacity(xs.len());
    out.extend_from_slice(&xs[k..]);
    out.extend_from_slice(&xs[..k]);
    out
}

/// Dedup key of a dart cycle: least rotation over both traversal directions.
fn cycle_key(s: &Surface, darts: &[Slot]) -> Vec<Slot> {
    let m = darts.len();
    // Incoming slots of the reversed traversal are the exit slots of the
    // forward one, in reverse order.
    let mut rev: Vec<Slot> = (0..m)
        .map(|i| s.pairing(darts[(i + 1) % m]).expect("closed"))
        .collect();
    rev.reverse();
    min_rotation(darts).min(min_rotation(&rev))
}

/// Callbacks threaded through the cycle search, so callers can carry their
/// own per-edge state (for example a running deck-group element) without a
/// second pass over each cycle.
pub trait CycleVisitor {
    /// The search traverses the edge leaving through `exit` into `next`.
    fn edge(&mut self, exit: Slot, next: Slot);
    /// The search backtracks over the last traversed edge.
    fn retreat(&mut self);
    /// A closed non-backtracking cycle with trace in `(2, cap]`. The same
    /// class can be reported more than once (both directions, and repeated
    /// visits of the least dart); dedup is the caller's business.
    fn closed(&mut self, darts: &[Slot], letters: &[Letter], trace: u64);
}

/// Depth-first search over all non-backtracking closed cycles of trace in
/// `(2, cap]`. Complete: appending a letter never decreases the trace, so
/// pruning prefixes above the cap misses nothing; a leading pure run longer
/// than `cap - 2` is pruned because a mixed cycle containing `L^a` has
/// trace at least `a + 2`, while all-pure cycles have trace 2. Each cycle
/// is explored from its least dart only.
///
/// On a partial surface, cycles run through glued edges only, i.e. the
/// closed curves of the current state.
pub fn visit_short_cycles<V: CycleVisitor>(
    s: &Surface,
    cap: u64,
    visitor: &mut V,
) -> Result<(), SurfaceError> {
    if cap < 3 {
        return Ok(());
    }
    for start in (0..s.n_slots() as u32).map(Slot) {
        let mut darts: Vec<Slot> = vec![start];
        let mut letters: Vec<Letter> = Vec::new();
        extend_cycles(s, start, Mat::IDENTITY, 0, cap, &mut darts, &mut letters, visitor);
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn extend_cycles<V: CycleVisitor>(
    s: &Surface,
    incoming: Slot,
    m: Mat,
    pure_run: usize, // letters so far while the word is still pure, else 0
    cap: u64,
    darts: &mut Vec<Slot>,
    letters: &mut Vec<Letter>,
    visitor: &mut V,
) {
    let start = darts[0];
    for letter in [Letter::L, Letter::R] {
        let run = match letters.last() {
            None => 1,
            Some(&last) if pure_run > 0 && last == letter => pure_run + 1,
            Some(_) => 0,
        };
        if run as u64 > cap - 2 {
            continue;
        }
        let m2 = m.times_letter(letter);
        if m2.trace() > cap {
            continue;
        }
        let exit = incoming.turn(letter);
        let Some(next) = s.pairing(exit) else {
            continue; // boundary side: closed curves stay on glued edges
        };
        if next < start {
            continue; // enumerate each cycle from its least dart only
        }
        visitor.edge(exit, next);
        letters.push(letter);
        if next == start {
            let t = m2.trace();
            if t > 2 {
                visitor.closed(darts, letters, t);
            }
        }
        darts.push(next);
        extend_cycles(s, next, m2, run, cap, darts, letters, visitor);
        darts.pop();
        letters.pop();
        visitor.retreat();
    }
}

/// All non-backtracking closed cycles with trace in `(2, cap]`, one
/// certificate per class up to rotation and inversion, sorted by trace.
pub fn enumerate_short_geodesics(
    s: &Surface,
    cap: u64,
) -> Result<Vec<GeodesicCert>, SurfaceError> {
    struct Collector<'a> {
        s: &'a Surface,
        seen: HashSet<Vec<Slot>>,
        certs: Vec<GeodesicCert>,
    }
    impl CycleVisitor for Collector<'_> {
        fn edge(&mut self, _exit: Slot, _next: Slot) {}
        fn retreat(&mut self) {}
        fn closed(&mut self, darts: &[Slot], letters: &[Letter], trace: u64) {
            let key = cycle_key(self.s, darts);
            if self.seen.insert(key) {
                self.certs.push(GeodesicCert {
                    darts: min_rotation(darts),
                    word: Word::new(letters.to_vec()).canonical_unoriented(),
                    trace,
                    length: geodesic_length(trace).expect("trace > 2"),
                });
            }
        }
    }
    let mut collector = Collector {
        s,
        seen: HashSet::new(),
        certs: Vec::new(),
    };
    visit_short_cycles(s, cap, &mut collector)?;
    let mut certs = collector.certs;
    certs.sort_by(|a, b| (a.trace, &a.word, &a.darts).cmp(&(b.trace, &b.word, &b.darts)));
    Ok(certs)
}

/// Exact systole of a closed surface, by escalating the enumeration cap
/// until a geodesic appears. Disconnected surfaces get the minimum over
/// their components.
///
/// Termination: every closed gluing of `2n >= 2` ideal triangles is a
/// finite-area hyperbolic surface (area `2*pi*n`), so a closed geodesic
/// always exists — even the thrice-punctured sphere carries the trace-6
/// figure-eight — and it is found once the cap reaches its trace.
pub fn systole(s: &Surface) -> Result<GeodesicCert, SurfaceError> {
    if !s.is_closed() {
        return Err(SurfaceError::NotClosed);
    }
    let mut cap = 8u64;
    loop {
        let certs = enumerate_short_geodesics(s, cap)?;
        if let Some(best) = certs.into_iter().min_by(|a, b| {
            (a.trace, &a.word, &a.darts).cmp(&(b.trace, &b.word, &b.darts))
        }) {
            return Ok(best);
        }
        assert!(cap < (1 << 22), "no geodesic found far beyond desk scale");
        cap *= 2;
    }
}

/// Connected components as triangle sets.
pub fn components(s: &Surface) -> Vec<Vec<usize>> {
    let n = s.n_triangles();
    let mut comp = vec![usize::MAX; n];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for root in 0..n {
        if comp[root] != usize::MAX {
            continue;
        }
        let ci = comps.len();
        let mut members = vec![root];
        comp[root] = ci;
        let mut stack = vec![root];
        while let Some(t) = stack.pop() {
            for i in 0..3 {
                if let Some(p) = s.pairing(Slot((3 * t + i) as u32)) {
                    let u = p.triangle();
                    if comp[u] == usize::MAX {
                        comp[u] = ci;
                        members.push(u);
                        stack.push(u);
                    }
                }
            }
        }
        members.sort_unstable();
        comps.push(members);
    }
    comps
}
