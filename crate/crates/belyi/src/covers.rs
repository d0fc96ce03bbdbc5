//! Random regular covers of a cusped base surface.
//!
//! The fundamental group of a cusped base is free on the chords of a
//! spanning tree, so a uniform homomorphism into a finite group is just an
//! independent uniform image per generator. A base geodesic of length `l`
//! lifts to closed geodesics of length `k·l` in the cover associated to
//! `ker(phi)`, where `k` is the order of its image; the cover systole is
//! therefore computable exactly from base geodesics, with an explicitly
//! built cover surface as an independent oracle.

use std::collections::HashMap;
use std::fmt;

use rand_core::RngCore;

use crate::geodesics::{visit_short_cycles, CycleVisitor};
use crate::groups::{FiniteGroup, GroupError, Sym};
use crate::surface::{FreeGenerators, Slot, Surface, SurfaceError};
use crate::words::{geodesic_length, power_trace, Letter, Trace, Word};

#[derive(Clone, Debug)]
pub enum CoverError {
    Group(GroupError),
    Surface(SurfaceError),
    TooLarge { triangles: usize, limit: usize },
    BadWord(String),
}

impl fmt::Display for CoverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoverError::Group(e) => write!(f, "{e}"),
            CoverError::Surface(e) => write!(f, "{e}"),
            CoverError::TooLarge { triangles, limit } => {
                write!(f, "cover would have {triangles} triangles (limit {limit})")
            }
            CoverError::BadWord(msg) => write!(f, "bad generator word: {msg}"),
        }
    }
}

impl std::error::Error for CoverError {}

impl From<GroupError> for CoverError {
    fn from(e: GroupError) -> CoverError {
        CoverError::Group(e)
    }
}

impl From<SurfaceError> for CoverError {
    fn from(e: SurfaceError) -> CoverError {
        CoverError::Surface(e)
    }
}

/// A homomorphism from the free fundamental group, as one image per chord
/// generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Homomorphism<G: FiniteGroup> {
    pub images: Vec<G::Elem>,
}

impl<G: FiniteGroup> Homomorphism<G> {
    pub fn rank(&self) -> usize {
        self.images.len()
    }

    /// Image of a generator word (`(generator, forward?)` per letter).
    pub fn eval(&self, group: &G, word: &[(usize, bool)]) -> G::Elem {
        let mut acc = group.identity();
        for &(gen, forward) in word {
            let img = if forward {
                self.images[gen].clone()
            } else {
                group.inverse(&self.images[gen])
            };
            acc = group.mul(&acc, &img);
        }
        acc
    }
}

/// Uniform homomorphism: independent uniform image per free generator.
pub fn sample_hom<G: FiniteGroup>(
    group: &G,
    rank: usize,
    rng: &mut dyn RngCore,
) -> Homomorphism<G> {
    Homomorphism {
        images: (0..rank).map(|_| group.sample(rng)).collect(),
    }
}

/// Parses `"aB"`-style generator words: lowercase = generator, uppercase =
/// its inverse, `a` is generator 0.
pub fn parse_generator_word(s: &str, rank: usize) -> Result<Vec<(usize, bool)>, CoverError> {
    let mut word = Vec::new();
    for c in s.chars() {
        let (idx, forward) = if c.is_ascii_lowercase() {
            ((c as u8 - b'a') as usize, true)
        } else if c.is_ascii_uppercase() {
            ((c as u8 - b'A') as usize, false)
        } else {
            return Err(CoverError::BadWord(format!("bad character {c:?}")));
        };
        if idx >= rank {
            return Err(CoverError::BadWord(format!(
                "generator {c:?} out of range for rank {rank}"
            )));
        }
        word.push((idx, forward));
    }
    if word.is_empty() {
        return Err(CoverError::BadWord("empty word".into()));
    }
    Ok(word)
}

/// Builds the regular cover as a triangulated surface: one copy of the base
/// per group element; copy `g` of side `a` glues to copy `g·x` of side `b`,
/// where `x` is the image of the chord crossed (identity on tree edges).
/// Left translation by the group permutes the copies freely with quotient
/// the base, and the cover is connected iff the homomorphism is surjective.
pub fn build_cover<G: FiniteGroup>(
    base: &Surface,
    generators: &FreeGenerators,
    group: &G,
    hom: &Homomorphism<G>,
    max_triangles: usize,
) -> Result<Surface, CoverError> {
    if !base.is_closed() {
        return Err(CoverError::Surface(SurfaceError::NotClosed));
    }
    let elems = group
        .elements()
        .ok_or_else(|| GroupError::TooLarge(group.name()))?;
    let tb = base.n_triangles();
    let triangles = elems.len() * tb;
    if triangles > max_triangles {
        return Err(CoverError::TooLarge {
            triangles,
            limit: max_triangles,
        });
    }
    let index: HashMap<&G::Elem, usize> = elems.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let mut cover = Surface::unglued(triangles / 2);
    let cover_slot = |g: usize, s: Slot| -> Slot {
        Slot((g * tb * 3) as u32 + s.0)
    };
    for a in (0..base.n_slots() as u32).map(Slot) {
        let b = base.pairing(a).expect("closed base");
        if b < a {
            continue;
        }
        let x = match generators.generator_of_exit(a) {
            None => group.identity(),
            Some((gen, true)) => hom.images[gen].clone(),
            Some((gen, false)) => group.inverse(&hom.images[gen]),
        };
        for (gi, g) in elems.iter().enumerate() {
            let gx = index[&group.mul(g, &x)];
            cover
                .glue(cover_slot(gi, a), cover_slot(gx, b))
                .expect("cover gluing is a bijection");
        }
    }
    debug_assert!(cover.is_closed());
    Ok(cover)
}

/// A cover geodesic certificate: the base geodesic, the order `k` of its
/// image, and the resulting cover length `k · l` (trace of the `k`-th
/// power word).
#[derive(Clone, Debug)]
pub struct CoverGeodesic {
    pub base_word: Word,
    pub base_trace: u64,
    pub image_order: u64,
    pub length: f64,
    pub cover_trace: Trace,
}

/// Exact cover systole, or a certificate that it exceeds the length cap.
#[derive(Clone, Debug)]
pub enum CoverSystole {
    Geodesic(CoverGeodesic),
    ExceedsCap { cap: f64 },
}

impl CoverSystole {
    pub fn geodesic(&self) -> Option<&CoverGeodesic> {
        match self {
            CoverSystole::Geodesic(g) => Some(g),
            CoverSystole::ExceedsCap { .. } => None,
        }
    }
}

/// Tracks the image of the running path in the deck group, one prefix
/// product per traversed edge, and keeps the best `k·l` candidate.
struct OrderVisitor<'a, G: FiniteGroup> {
    group: &'a G,
    generators: &'a FreeGenerators,
    hom: &'a Homomorphism<G>,
    stack: Vec<G::Elem>,
    best: Option<CoverGeodesic>,
}

impl<G: FiniteGroup> CycleVisitor for OrderVisitor<'_, G> {
    fn edge(&mut self, exit: Slot, _next: Slot) {
        let top = self.stack.last().expect("identity at the bottom");
        let next = match self.generators.generator_of_exit(exit) {
            None => top.clone(),
            Some((gen, true)) => self.group.mul(top, &self.hom.images[gen]),
            Some((gen, false)) => self
                .group
                .mul(top, &self.group.inverse(&self.hom.images[gen])),
        };
        self.stack.push(next);
    }

    fn retreat(&mut self) {
        self.stack.pop();
    }

    fn closed(&mut self, _darts: &[Slot], letters: &[Letter], trace: u64) {
        let k = self.group.order_of(self.stack.last().expect("nonempty"));
        let length = k as f64 * geodesic_length(trace).expect("trace > 2");
        let better = match &self.best {
            None => true,
            Some(b) => (length, trace) < (b.length, b.base_trace),
        };
        if better {
            self.best = Some(CoverGeodesic {
                cover_trace: power_trace(trace, k, u64::MAX / 4),
                base_word: Word::new(letters.to_vec()).canonical_unoriented(),
                base_trace: trace,
                image_order: k,
                length,
            });
        }
    }
}

/// Smallest `k·l` over base geodesics, `k` the image order. Complete below
/// the cap: a cover geodesic of length at most `cap` projects to a base
/// geodesic of length at most `cap`, so enumerating base geodesics up to
/// trace `2·cosh(cap/2)` (shrunk to the best candidate found so far) sees
/// every contender.
pub fn cover_systole<G: FiniteGroup>(
    base: &Surface,
    generators: &FreeGenerators,
    group: &G,
    hom: &Homomorphism<G>,
    length_cap: f64,
) -> Result<CoverSystole, CoverError> {
    assert!(length_cap > 0.0);
    let trace_for_length = |len: f64| -> u64 { (2.0 * (len / 2.0).cosh()).floor() as u64 + 1 };
    let mut visitor = OrderVisitor {
        group,
        generators,
        hom,
        stack: vec![group.identity()],
        best: None,
    };
    let mut cap: u64 = 8;
    loop {
        let bound = visitor
            .best
            .as_ref()
            .map_or(length_cap, |b| b.length.min(length_cap));
        let t_cap = cap.min(trace_for_length(bound).max(3));
        visit_short_cycles(base, t_cap, &mut visitor)?;
        debug_assert_eq!(visitor.stack.len(), 1);
        let bound = visitor
            .best
            .as_ref()
            .map_or(length_cap, |b| b.length.min(length_cap));
        if t_cap >= trace_for_length(bound).max(3) {
            break;
        }
        cap = cap.saturating_mul(2);
    }
    match visitor.best {
        Some(g) if g.length <= length_cap => Ok(CoverSystole::Geodesic(g)),
        _ => Ok(CoverSystole::ExceedsCap { cap: length_cap }),
    }
}

/// Uniform homomorphism from a closed genus-`g` surface group by rejection:
/// sample `2g` uniform elements, accept when the product of commutators is
/// the identity. Returns the accepted tuple and the number of tries.
pub fn rejection_sample_closed<G: FiniteGroup>(
    genus: usize,
    group: &G,
    rng: &mut dyn RngCore,
    max_tries: u64,
) -> Option<(Vec<G::Elem>, u64)> {
    assert!(genus >= 2);
    for tries in 1..=max_tries {
        let tuple: Vec<G::Elem> = (0..2 * genus).map(|_| group.sample(rng)).collect();
        let mut relator = group.identity();
        for pair in tuple.chunks(2) {
            relator = group.mul(&relator, &group.commutator(&pair[0], &pair[1]));
        }
        if relator == group.identity() {
            return Some((tuple, tries));
        }
    }
    None
}

/// Fraction of uniform homomorphisms that kill `word`.
pub fn kernel_probability<G: FiniteGroup>(
    group: &G,
    rank: usize,
    word: &[(usize, bool)],
    samples: u64,
    rng: &mut dyn RngCore,
) -> f64 {
    let mut hits = 0u64;
    for _ in 0..samples {
        let hom = sample_hom(group, rank, rng);
        if hom.eval(group, word) == group.identity() {
            hits += 1;
        }
    }
    hits as f64 / samples as f64
}

/// One row of a fixed-point statistics table.
#[derive(Clone, Debug)]
pub struct FixRow {
    pub degree: usize,
    pub samples: u64,
    pub mean: f64,
    pub stderr: f64,
}

/// Mean number of fixed points of `phi(word)` over uniform homomorphisms
/// into `Sym(degree)`, per degree.
pub fn fixed_point_stats(
    degrees: &[usize],
    rank: usize,
    word: &[(usize, bool)],
    samples: u64,
    rng: &mut dyn RngCore,
) -> Result<Vec<FixRow>, CoverError> {
    let mut rows = Vec::new();
    for &degree in degrees {
        let sym = Sym::new(degree)?;
        let mut sum = 0.0f64;
        let mut sumsq = 0.0f64;
        for _ in 0..samples {
            let hom = sample_hom(&sym, rank, rng);
            let fix = sym.fixed_points(&hom.eval(&sym, word)) as f64;
            sum += fix;
            sumsq += fix * fix;
        }
        let mean = sum / samples as f64;
        let var = (sumsq / samples as f64 - mean * mean).max(0.0);
        rows.push(FixRow {
            degree,
            samples,
            mean,
            stderr: (var / samples as f64).sqrt(),
        });
    }
    Ok(rows)
}

/// The 2-triangle one-cusped torus, the standard small cover base.
pub fn test_base_torus() -> Surface {
    Surface::from_pairs(1, &[(0, 3), (1, 4), (2, 5)]).expect("valid pairing")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesics::systole;
    use crate::groups::Sl2;
    use crate::seeding::stream_rng;

    #[test]
    fn trivial_cover_is_the_base() {
        let base = test_base_torus();
        let fg = base.free_generators().unwrap();
        assert_eq!(fg.rank, 2);
        let triv = Sym::trivial();
        let hom = Homomorphism::<Sym> {
            images: vec![triv.identity(); 2],
        };
        let cover = build_cover(&base, &fg, &triv, &hom, 100).unwrap();
        assert_eq!(cover.n_triangles(), 2);
        let base_sys = systole(&base).unwrap();
        let cover_sys = systole(&cover).unwrap();
        assert_eq!(base_sys.trace, cover_sys.trace);
        // cover_systole agrees
        let cs = cover_systole(&base, &fg, &triv, &hom, 20.0).unwrap();
        assert_eq!(cs.geodesic().unwrap().base_trace, 3);
        assert_eq!(cs.geodesic().unwrap().image_order, 1);
    }

    #[test]
    fn sl2_cover_structure() {
        let base = test_base_torus();
        let fg = base.free_generators().unwrap();
        let g = Sl2::new(3).unwrap();
        let mut rng = stream_rng(2, &[]);
        let hom = sample_hom(&g, fg.rank, &mut rng);
        let cover = build_cover(&base, &fg, &g, &hom, 1000).unwrap();
        assert_eq!(cover.n_triangles(), 48);
        assert!(cover.is_closed());
        // Euler consistency across all components together:
        // C' - |G|·n_base = 2·(#components) - 2·sum(g_i); check via the
        // per-component genus formula instead.
        let comps = crate::geodesics::components(&cover);
        let surjective =
            crate::groups::generated_subgroup_size(&g, &hom.images, 10_000) == Some(24);
        assert_eq!(comps.len() == 1, surjective);
        // Per-component Euler identity C_i - n_i = 2 - 2g_i, and for a
        // connected cover C' - |G|*n_base = 2 - 2g'.
        let cycles = cover.lht_cycles().unwrap();
        let mut comp_of = vec![0usize; cover.n_triangles()];
        for (ci, comp) in comps.iter().enumerate() {
            for &t in comp {
                comp_of[t] = ci;
            }
        }
        for (ci, comp) in comps.iter().enumerate() {
            let c = cycles.iter().filter(|cy| comp_of[cy[0].triangle()] == ci).count();
            let n = comp.len() / 2;
            assert_eq!((n + 2 - c) % 2, 0, "component genus must be integral");
            let gi = (n + 2 - c) / 2;
            assert_eq!(c as i64 - n as i64, 2 - 2 * gi as i64);
        }
        if comps.len() == 1 {
            let (gc, cc) = cover.genus_and_cusps().unwrap();
            assert_eq!(cc as i64 - 24, 2 - 2 * gc as i64);
        }
        // free action of G by left translation: relabelling copies by any
        // group element maps gluings to gluings
        let elems = g.elements().unwrap();
        let index: HashMap<&crate::groups::Sl2Elem, usize> =
            elems.iter().enumerate().map(|(i, e)| (e, i)).collect();
        let k = hom.images[0]; // arbitrary nontrivial translation
        let tb = base.n_triangles();
        for slot in 0..cover.n_slots() as u32 {
            let copy = slot as usize / (3 * tb);
            let within = slot as usize % (3 * tb);
            let image_copy = index[&g.mul(&k, &elems[copy])];
            let mapped = (image_copy * 3 * tb + within) as u32;
            let partner = cover.pairing(Slot(slot)).unwrap();
            let pcopy = partner.index() / (3 * tb);
            let pwithin = partner.index() % (3 * tb);
            let mapped_partner = (index[&g.mul(&k, &elems[pcopy])] * 3 * tb + pwithin) as u32;
            assert_eq!(cover.pairing(Slot(mapped)).unwrap(), Slot(mapped_partner));
        }
    }

    #[test]
    fn cover_systole_matches_oracle_small() {
        let base = test_base_torus();
        let fg = base.free_generators().unwrap();
        let g = Sl2::new(3).unwrap();
        for seed in 0..5 {
            let mut rng = stream_rng(seed, &[7]);
            let hom = sample_hom(&g, fg.rank, &mut rng);
            let fast = cover_systole(&base, &fg, &g, &hom, 13.0).unwrap();
            let cover = build_cover(&base, &fg, &g, &hom, 1000).unwrap();
            let oracle_cert = systole(&cover).unwrap();
            let fast_cert = fast.geodesic().expect("within cap");
            assert_eq!(
                fast_cert.cover_trace,
                Trace::Exact(oracle_cert.trace),
                "seed {seed}"
            );
            assert!((fast_cert.length - oracle_cert.length).abs() < 1e-9);
            // covers never shrink geodesics
            assert!(fast_cert.length >= systole(&base).unwrap().length - 1e-12);
        }
    }

    #[test]
    fn rejection_sampler_verifies_relator() {
        let g = Sl2::new(3).unwrap();
        let mut rng = stream_rng(4, &[]);
        let (tuple, _) = rejection_sample_closed(2, &g, &mut rng, 100_000).unwrap();
        let mut relator = g.identity();
        for pair in tuple.chunks(2) {
            relator = g.mul(&relator, &g.commutator(&pair[0], &pair[1]));
        }
        assert_eq!(relator, g.identity());
        // trivial group always accepts on the first try
        let triv = Sym::trivial();
        let (_, tries) = rejection_sample_closed(2, &triv, &mut rng, 5).unwrap();
        assert_eq!(tries, 1);
    }

    #[test]
    fn kernel_probability_single_generator() {
        let g = Sl2::new(3).unwrap();
        let mut rng = stream_rng(6, &[]);
        let word = parse_generator_word("a", 2).unwrap();
        let samples = 60_000u64;
        let est = kernel_probability(&g, 2, &word, samples, &mut rng);
        let p = 1.0 / 24.0;
        let sigma = (p * (1.0 - p) / samples as f64).sqrt();
        assert!((est - p).abs() < 3.0 * sigma, "est {est} vs {p}");
        // trivial group: probability one
        let triv = Sym::trivial();
        assert_eq!(kernel_probability(&triv, 2, &word, 100, &mut rng), 1.0);
    }

    #[test]
    fn kernel_probability_commutator_sl2_5() {
        // exact count over |G|^2 pairs: [A,B] = e iff A and B commute
        let g = Sl2::new(5).unwrap();
        let elems = g.elements().unwrap();
        let mut commuting = 0u64;
        for a in &elems {
            for b in &elems {
                if g.mul(a, b) == g.mul(b, a) {
                    commuting += 1;
                }
            }
        }
        let exact = commuting as f64 / (elems.len() as f64 * elems.len() as f64);
        let word = parse_generator_word("abAB", 2).unwrap();
        let samples = 40_000u64;
        let mut rng = stream_rng(8, &[]);
        let est = kernel_probability(&g, 2, &word, samples, &mut rng);
        let sigma = (exact * (1.0 - exact) / samples as f64).sqrt();
        assert!((est - exact).abs() < 3.0 * sigma, "est {est} vs exact {exact}");
    }

    #[test]
    fn fixed_points_of_squared_generator_small_exact() {
        // E[fix(sigma^2)] over all of Sym(n) is exactly 2 for n >= 2
        for n in 2..=7usize {
            let sym = Sym::new(n).unwrap();
            let elems = sym.elements().unwrap();
            let total: u64 = elems
                .iter()
                .map(|p| sym.fixed_points(&sym.mul(p, p)) as u64)
                .sum();
            assert_eq!(total as f64 / elems.len() as f64, 2.0, "n = {n}");
        }
        // and the Monte Carlo path agrees within 3 sigma
        let word = parse_generator_word("aa", 1).unwrap();
        let mut rng = stream_rng(9, &[]);
        let rows = fixed_point_stats(&[6], 1, &word, 40_000, &mut rng).unwrap();
        assert!((rows[0].mean - 2.0).abs() < 3.0 * rows[0].stderr + 1e-9);
    }

    #[test]
    fn parse_words() {
        assert_eq!(parse_generator_word("ab", 2).unwrap(), vec![(0, true), (1, true)]);
        assert_eq!(
            parse_generator_word("aaB", 2).unwrap(),
            vec![(0, true), (0, true), (1, false)]
        );
        assert!(parse_generator_word("c", 2).is_err());
        assert!(parse_generator_word("", 2).is_err());
        assert!(parse_generator_word("a-b", 2).is_err());
    }
}
