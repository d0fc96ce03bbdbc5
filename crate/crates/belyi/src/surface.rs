//! Triangulated surfaces: partial gluings of oriented ideal triangles.
//!
//! Triangle `t` owns the slots `3t, 3t+1, 3t+2` in counter-clockwise order;
//! a slot is one triangle side. A surface is a partial fixed-point-free
//! involution on slots: glued pairs are interior edges, unmatched slots are
//! boundary sides. The dual ribbon graph has one trivalent vertex per
//! triangle, one edge per glued pair and one dangling half-edge per boundary
//! side; a left turn at a vertex advances one step in the slot order.

use std::collections::VecDeque;
use std::fmt;

use crate::words::Letter;

/// One side of one triangle; triangle `id/3`, position `id%3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slot(pub u32);

impl Slot {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn triangle(self) -> usize {
        self.index() / 3
    }

    pub fn position(self) -> u8 {
        (self.0 % 3) as u8
    }

    /// Next slot of the same triangle in counter-clockwise order.
    pub fn next_in_triangle(self) -> Slot {
        Slot(self.0 - self.0 % 3 + (self.0 % 3 + 1) % 3)
    }

    pub fn prev_in_triangle(self) -> Slot {
        Slot(self.0 - self.0 % 3 + (self.0 % 3 + 2) % 3)
    }

    /// The slot a non-backtracking path exits through after entering the
    /// vertex via `self` and turning `letter`.
    pub fn turn(self, letter: Letter) -> Slot {
        match letter {
            Letter::L => self.next_in_triangle(),
            Letter::R => self.prev_in_triangle(),
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SurfaceError {
    OutOfRange { slot: u32, n_slots: usize },
    FixedPoint { slot: u32 },
    NotInvolution { slot: u32, image: u32, back: u32 },
    PairingConflict { slot: u32 },
    AlreadyGlued { slot: u32 },
    NotDangling { slot: u32 },
    NotClosed,
    NotConnected,
    NoCusp,
    ParityViolation { triangles: usize, lht: usize },
}

impl fmt::Display for SurfaceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurfaceError::OutOfRange { slot, n_slots } => {
                write!(f, "slot {slot} out of range (surface has {n_slots} slots)")
            }
            SurfaceError::FixedPoint { slot } => {
                write!(f, "slot {slot} glued to itself")
            }
            SurfaceError::NotInvolution { slot, image, back } => {
                write!(f, "pairing is not an involution: {slot} -> {image} -> {back}")
            }
            SurfaceError::PairingConflict { slot } => {
                write!(f, "slot {slot} appears in more than one pair")
            }
            SurfaceError::AlreadyGlued { slot } => write!(f, "slot {slot} is already glued"),
            SurfaceError::NotDangling { slot } => write!(f, "slot {slot} is not a boundary side"),
            SurfaceError::NotClosed => write!(f, "surface has boundary sides"),
            SurfaceError::NotConnected => write!(f, "surface is not connected"),
            SurfaceError::NoCusp => write!(f, "surface has no cusp"),
            SurfaceError::ParityViolation { triangles, lht } => write!(
                f,
                "internal consistency: {triangles} triangles with {lht} left-turn cycles \
                 gives a non-integer genus"
            ),
        }
    }
}

impl std::error::Error for SurfaceError {}

/// A surface built from `2n` oriented ideal triangles with a partial
/// fixed-point-free gluing of their sides.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Surface {
    pairing: Vec<Option<Slot>>,
}

impl Surface {
    /// `2 * n_pairs` triangles, nothing glued.
    pub fn unglued(n_pairs: usize) -> Surface {
        assert!(n_pairs >= 1);
        Surface {
            pairing: vec![None; 6 * n_pairs],
        }
    }

    /// The `2n`-triangle annulus whose dual graph is a single cycle carrying
    /// the word `(LR)^n`, with one dangling slot per triangle.
    pub fn annulus(n_pairs: usize) -> Surface {
        let mut s = Surface::unglued(n_pairs);
        let triangles = 2 * n_pairs;
        for t in 0..triangles {
            let exit = if t % 2 == 0 { 3 * t + 1 } else { 3 * t + 2 };
            let entry = 3 * ((t + 1) % triangles);
            s.glue(Slot(exit as u32), Slot(entry as u32)).unwrap();
        }
        s
    }

    /// Builds and validates a surface from explicit slot pairs.
    pub fn from_pairs(n_pairs: usize, pairs: &[(u32, u32)]) -> Result<Surface, SurfaceError> {
        let mut s = Surface::unglued(n_pairs);
        let n_slots = s.n_slots();
        for &(a, b) in pairs {
            for x in [a, b] {
                if x as usize >= n_slots {
                    return Err(SurfaceError::OutOfRange { slot: x, n_slots });
                }
            }
            if a == b {
                return Err(SurfaceError::FixedPoint { slot: a });
            }
            for x in [a, b] {
                if s.pairing[x as usize].is_some() {
                    return Err(SurfaceError::PairingConflict { slot: x });
                }
            }
            s.pairing[a as usize] = Some(Slot(b));
            s.pairing[b as usize] = Some(Slot(a));
        }
        Ok(s)
    }

    /// Builds from a full or partial involution list: `list[k] = Some(i_k)`
    /// glues slot `k` to slot `i_k`.
    pub fn from_involution_list(
        n_pairs: usize,
        list: &[Option<u32>],
    ) -> Result<Surface, SurfaceError> {
        let n_slots = 6 * n_pairs;
        if list.len() != n_slots {
            return Err(SurfaceError::OutOfRange {
                slot: list.len() as u32,
                n_slots,
            });
        }
        for (k, &img) in list.iter().enumerate() {
            let Some(img) = img else { continue };
            if img as usize >= n_slots {
                return Err(SurfaceError::OutOfRange { slot: img, n_slots });
            }
            if img as usize == k {
                return Err(SurfaceError::FixedPoint { slot: k as u32 });
            }
            match list[img as usize] {
                Some(back) if back as usize == k => {}
                other => {
                    return Err(SurfaceError::NotInvolution {
                        slot: k as u32,
                        image: img,
                        back: other.unwrap_or(img),
                    })
                }
            }
        }
        let mut s = Surface::unglued(n_pairs);
        for (k, &img) in list.iter().enumerate() {
            if let Some(img) = img {
                s.pairing[k] = Some(Slot(img));
            }
        }
        Ok(s)
    }

    pub fn n_slots(&self) -> usize {
        self.pairing.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.pairing.len() / 3
    }

    /// Number of triangle pairs `n` (the surface has `2n` triangles).
    pub fn n_pairs(&self) -> usize {
        self.n_triangles() / 2
    }

    pub fn pairing(&self, s: Slot) -> Option<Slot> {
        self.pairing[s.index()]
    }

    pub fn is_dangling(&self, s: Slot) -> bool {
        self.pairing[s.index()].is_none()
    }

    pub fn dangling_slots(&self) -> Vec<Slot> {
        (0..self.n_slots() as u32)
            .map(Slot)
            .filter(|&s| self.is_dangling(s))
            .collect()
    }

    pub fn is_closed(&self) -> bool {
        self.pairing.iter().all(|p| p.is_some())
    }

    pub fn glue(&mut self, a: Slot, b: Slot) -> Result<(), SurfaceError> {
        for x in [a, b] {
            if x.index() >= self.n_slots() {
                return Err(SurfaceError::OutOfRange {
                    slot: x.0,
                    n_slots: self.n_slots(),
                });
            }
        }
        if a == b {
            return Err(SurfaceError::FixedPoint { slot: a.0 });
        }
        for x in [a, b] {
            if !self.is_dangling(x) {
                return Err(SurfaceError::AlreadyGlued { slot: x.0 });
            }
        }
        self.pairing[a.index()] = Some(b);
        self.pairing[b.index()] = Some(a);
        Ok(())
    }

    /// Checks the fixed-point-free partial involution axioms.
    pub fn validate(&self) -> Result<(), SurfaceError> {
        for k in 0..self.n_slots() {
            if let Some(img) = self.pairing[k] {
                if img.index() >= self.n_slots() {
                    return Err(SurfaceError::OutOfRange {
                        slot: img.0,
                        n_slots: self.n_slots(),
                    });
                }
                if img.index() == k {
                    return Err(SurfaceError::FixedPoint { slot: k as u32 });
                }
                match self.pairing[img.index()] {
                    Some(back) if back.index() == k => {}
                    other => {
                        return Err(SurfaceError::NotInvolution {
                            slot: k as u32,
                            image: img.0,
                            back: other.map_or(img.0, |s| s.0),
                        })
                    }
                }
            }
        }
        Ok(())
    }

    pub fn is_connected(&self) -> bool {
        let n = self.n_triangles();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(t) = queue.pop_front() {
            for i in 0..3u32 {
                if let Some(p) = self.pairing[3 * t + i as usize] {
                    let u = p.triangle();
                    if !seen[u] {
                        seen[u] = true;
                        count += 1;
                        queue.push_back(u);
                    }
                }
            }
        }
        count == n
    }

    /// Follows `letter`-turns from the boundary side `h` until the walk
    /// exits through a boundary side; returns that side and the number of
    /// turns (triangle corners crossed).
    pub fn pure_walk(&self, h: Slot, letter: Letter) -> Result<(Slot, usize), SurfaceError> {
        if !self.is_dangling(h) {
            return Err(SurfaceError::NotDangling { slot: h.0 });
        }
        let mut s = h;
        let mut k = 0usize;
        loop {
            let exit = s.turn(letter);
            k += 1;
            match self.pairing(exit) {
                None => return Ok((exit, k)),
                Some(next) => s = next,
            }
        }
    }

    /// The next boundary side after `h` in left-turn direction, with the
    /// size of the cusp fan between them.
    pub fn boundary_next(&self, h: Slot) -> Result<(Slot, usize), SurfaceError> {
        self.pure_walk(h, Letter::L)
    }

    /// Boundary components as cyclic side sequences, each entry paired with
    /// the fan size to the next side. Components are rotated to start at
    /// their least slot and sorted by it.
    pub fn boundary_components(&self) -> Vec<Vec<(Slot, usize)>> {
        let dangling = self.dangling_slots();
        let mut visited = std::collections::BTreeSet::new();
        let mut comps = Vec::new();
        for &start in &dangling {
            if visited.contains(&start) {
                continue;
            }
            let mut comp = Vec::new();
            let mut cur = start;
            loop {
                let (next, fan) = self.boundary_next(cur).expect("dangling side");
                comp.push((cur, fan));
                visited.insert(cur);
                cur = next;
                if cur == start {
                    break;
                }
            }
            comps.push(comp);
        }
        // `dangling` is ascending, so each component already starts at its
        // least slot and the components are sorted by it.
        comps
    }

    /// Partition of the slots into maximal left-turn cycles. Requires a
    /// closed surface; the number of cycles is the number of cusps.
    pub fn lht_cycles(&self) -> Result<Vec<Vec<Slot>>, SurfaceError> {
        if !self.is_closed() {
            return Err(SurfaceError::NotClosed);
        }
        let n_slots = self.n_slots();
        let mut seen = vec![false; n_slots];
        let mut cycles = Vec::new();
        for start in 0..n_slots as u32 {
            if seen[start as usize] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut s = Slot(start);
            loop {
                seen[s.index()] = true;
                cycle.push(s);
                s = self.pairing(s.next_in_triangle()).expect("closed");
                if s == Slot(start) {
                    break;
                }
            }
            cycles.push(cycle);
        }
        Ok(cycles)
    }

    /// Genus and cusp count of a closed connected surface, from
    /// `g = (n + 2 - lht)/2` with `n` the number of triangle pairs.
    pub fn genus_and_cusps(&self) -> Result<(usize, usize), SurfaceError> {
        if !self.is_connected() {
            return Err(SurfaceError::NotConnected);
        }
        let lht = self.lht_cycles()?.len();
        let n = self.n_pairs();
        if (n + 2).checked_sub(lht).map_or(true, |d| d % 2 != 0) {
            return Err(SurfaceError::ParityViolation {
                triangles: self.n_triangles(),
                lht,
            });
        }
        let g = (n + 2 - lht) / 2;
        let cusps = lht;
        // Euler identity C - n = 2 - 2g, as an internal cross-check.
        debug_assert_eq!(cusps as i64 - n as i64, 2 - 2 * g as i64);
        Ok((g, cusps))
    }

    /// The permutation pair of a closed surface: `sigma` rotates each
    /// triangle (2n 3-cycles), `tau` is the gluing involution (3n 2-cycles).
    pub fn permutation_pair(&self) -> Result<(Vec<u32>, Vec<u32>), SurfaceError> {
        if !self.is_closed() {
            return Err(SurfaceError::NotClosed);
        }
        let sigma = (0..self.n_slots() as u32)
            .map(|i| Slot(i).next_in_triangle().0)
            .collect();
        let tau = (0..self.n_slots() as u32)
            .map(|i| self.pairing(Slot(i)).expect("closed").0)
            .collect();
        Ok((sigma, tau))
    }

    /// Free generators of the fundamental group from a spanning tree of the
    /// dual graph; requires a connected surface with at least one cusp.
    pub fn free_generators(&self) -> Result<FreeGenerators, SurfaceError> {
        if !self.is_connected() {
            return Err(SurfaceError::NotConnected);
        }
        if self.is_closed() {
            let (_, cusps) = self.genus_and_cusps()?;
            if cusps == 0 {
                return Err(SurfaceError::NoCusp);
            }
        }
        let n = self.n_triangles();
        let mut in_tree = vec![false; self.n_slots()];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(t) = queue.pop_front() {
            for i in 0..3 {
                let s = Slot((3 * t + i) as u32);
                if let Some(p) = self.pairing(s) {
                    let u = p.triangle();
                    if !seen[u] {
                        seen[u] = true;
                        in_tree[s.index()] = true;
                        in_tree[p.index()] = true;
                        queue.push_back(u);
                    }
                }
            }
        }
        let mut chord = vec![None; self.n_slots()];
        let mut rank = 0;
        for k in 0..self.n_slots() {
            let s = Slot(k as u32);
            if let Some(p) = self.pairing(s) {
                if !in_tree[k] && s < p {
                    chord[s.index()] = Some((rank, true));
                    chord[p.index()] = Some((rank, false));
                    rank += 1;
                }
            }
        }
        Ok(FreeGenerators { rank, chord })
    }
}

/// Spanning-tree presentation of the fundamental group: tree edges collapse
/// to the identity, each chord is a free generator.
#[derive(Clone, Debug)]
pub struct FreeGenerators {
    pub rank: usize,
    chord: Vec<Option<(usize, bool)>>,
}

impl FreeGenerators {
    /// Generator crossed when exiting through `exit_slot`, with `true` for
    /// the chord's forward direction. `None` for tree edges.
    pub fn generator_of_exit(&self, exit_slot: Slot) -> Option<(usize, bool)> {
        self.chord[exit_slot.index()]
    }

    /// The generator word of a closed dart cycle (given as incoming slots).
    pub fn cycle_word(&self, surface: &Surface, darts: &[Slot]) -> Vec<(usize, bool)> {
        let mut word = Vec::new();
        let m = darts.len();
        for i in 0..m {
            let entered = darts[(i + 1) % m];
            let exit = surface.pairing(entered).expect("closed cycle edge");
            if let Some(gen) = self.generator_of_exit(exit) {
                word.push(gen);
            }
        }
        word
    }
}

/// Number of orbits of the group generated by two permutations.
pub fn orbit_count(sigma: &[u32], tau: &[u32]) -> usize {
    let n = sigma.len();
    assert_eq!(tau.len(), n);
    let mut seen = vec![false; n];
    let mut orbits = 0;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        orbits += 1;
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(x) = stack.pop() {
            for y in [sigma[x] as usize, tau[x] as usize] {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    orbits
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_triangle_torus() -> Surface {
        Surface::from_pairs(1, &[(0, 3), (1, 4), (2, 5)]).unwrap()
    }

    #[test]
    fn from_pairs_validates() {
        let s = two_triangle_torus();
        assert!(s.is_closed());
        assert!(s.is_connected());
        assert!(s.validate().is_ok());

        assert_eq!(
            Surface::from_pairs(1, &[(0, 0)]),
            Err(SurfaceError::FixedPoint { slot: 0 })
        );
        assert_eq!(
            Surface::from_pairs(1, &[(0, 6)]),
            Err(SurfaceError::OutOfRange { slot: 6, n_slots: 6 })
        );
        assert_eq!(
            Surface::from_pairs(1, &[(0, 3), (3, 1)]),
            Err(SurfaceError::PairingConflict { slot: 3 })
        );

        let empty = Surface::from_pairs(1, &[]).unwrap();
        assert_eq!(empty.dangling_slots().len(), 6);
        assert!(empty.validate().is_ok());
    }

    #[test]
    fn torus_topology() {
        let s = two_triangle_torus();
        let cycles = s.lht_cycles().unwrap();
        let total: usize = cycles.iter().map(|c| c.len()).sum();
        assert_eq!(total, 6);
        assert_eq!(cycles.len(), 1);
        assert_eq!(s.genus_and_cusps().unwrap(), (1, 1));
    }

    #[test]
    fn annulus_structure() {
        for n in 1..6 {
            let s = Surface::annulus(n);
            assert!(s.is_connected());
            assert_eq!(s.dangling_slots().len(), 2 * n);
            // Each boundary cusp fan of the annulus has three corners.
            for comp in s.boundary_components() {
                for &(_, fan) in &comp {
                    assert_eq!(fan, 3);
                }
            }
            if n >= 2 {
                // two boundary components of n sides each
                let comps = s.boundary_components();
                assert_eq!(comps.len(), 2);
                assert!(comps.iter().all(|c| c.len() == n));
            }
        }
    }

    #[test]
    fn annulus_core_word_alternates() {
        // Walk the core cycle of the annulus and read off the turn word.
        use crate::words::{trace_of, Word};
        for n in [1usize, 2, 5] {
            let s = Surface::annulus(n);
            let mut letters = Vec::new();
            let mut incoming = Slot(0);
            loop {
                let exit = [Letter::L, Letter::R]
                    .into_iter()
                    .find(|&l| s.pairing(incoming.turn(l)).is_some())
                    .map(|l| {
                        letters.push(l);
                        incoming.turn(l)
                    })
                    .unwrap();
                incoming = s.pairing(exit).unwrap();
                if incoming == Slot(0) {
                    break;
                }
            }
            assert_eq!(letters.len(), 2 * n);
            let word = Word::new(letters);
            assert_eq!(word.canonical_rotation(), "LR".parse::<Word>().unwrap().power(n));
            assert!(trace_of(&word) >= 3);
        }
    }

    #[test]
    fn permutations_of_torus() {
        let s = two_triangle_torus();
        let (sigma, tau) = s.permutation_pair().unwrap();
        assert_eq!(sigma, vec![1, 2, 0, 4, 5, 3]);
        assert_eq!(tau, vec![3, 4, 5, 0, 1, 2]);
        // order 3 and order 2
        for i in 0..6usize {
            let s3 = sigma[sigma[sigma[i] as usize] as usize];
            assert_eq!(s3 as usize, i);
            let t2 = tau[tau[i] as usize];
            assert_eq!(t2 as usize, i);
        }
        assert_eq!(orbit_count(&sigma, &tau), 1);
    }

    #[test]
    fn disconnected_pairing_reports() {
        // two separate closed tori (n = 2 pairs, 4 triangles)
        let s = Surface::from_pairs(
            2,
            &[(0, 3), (1, 4), (2, 5), (6, 9), (7, 10), (8, 11)],
        )
        .unwrap();
        assert!(s.is_closed());
        assert!(!s.is_connected());
        assert_eq!(s.genus_and_cusps(), Err(SurfaceError::NotConnected));
        let (sigma, tau) = s.permutation_pair().unwrap();
        assert_eq!(orbit_count(&sigma, &tau), 2);
    }

    #[test]
    fn free_generators_of_cusped_torus() {
        let s = two_triangle_torus();
        let fg = s.free_generators().unwrap();
        // 2 vertices, 3 edges: one tree edge, two chords
        assert_eq!(fg.rank, 2);
        let chords: Vec<_> = (0..6)
            .filter_map(|i| fg.generator_of_exit(Slot(i)).map(|g| (i, g)))
            .collect();
        assert_eq!(chords.len(), 4); // two ends per chord
    }

    #[test]
    fn cycle_words_collapse_tree_edges() {
        let s = two_triangle_torus();
        let fg = s.free_generators().unwrap();
        // tree edge {0,3}; chords {1,4} (generator 0) and {2,5} (generator 1)
        assert_eq!(fg.generator_of_exit(Slot(0)), None);
        assert_eq!(fg.generator_of_exit(Slot(1)), Some((0, true)));
        assert_eq!(fg.generator_of_exit(Slot(4)), Some((0, false)));
        // the trace-3 geodesic [0, 4] crosses chord 0 once, forwards;
        // its reverse [3, 1] crosses it backwards; tree edges vanish
        assert_eq!(fg.cycle_word(&s, &[Slot(0), Slot(4)]), vec![(0, true)]);
        assert_eq!(fg.cycle_word(&s, &[Slot(3), Slot(1)]), vec![(0, false)]);
    }

    #[test]
    fn boundary_walks_of_annulus() {
        let s = Surface::annulus(1);
        // one-sided boundary components: the left walk returns to the start
        let (end, fan) = s.boundary_next(Slot(2)).unwrap();
        assert_eq!(end, Slot(2));
        assert_eq!(fan, 3);
        assert_eq!(s.pure_walk(Slot(2), Letter::R).unwrap(), (Slot(2), 3));
    }
}
