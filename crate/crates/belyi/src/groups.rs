//! Finite groups used as deck groups of random regular covers.
//!
//! Two backends: `SL(2, F_p)` for primes `p`, and symmetric groups. Both
//! sample uniformly with exact rejection/shuffling, and small groups can
//! enumerate themselves for exhaustive cross-checks.

use std::fmt;

use rand_core::RngCore;

use crate::seeding::uniform_index;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupError {
    NotPrime(u32),
    TooLarge(String),
}

impl fmt::Display for GroupError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupError::NotPrime(p) => write!(f, "{p} is not prime"),
            GroupError::TooLarge(msg) => write!(f, "group too large: {msg}"),
        }
    }
}

impl std::error::Error for GroupError {}

/// Group operations over an element type; `mul` composes left-to-right in
/// the usual function-application order `(ab)(x) = a(b(x))`.
pub trait FiniteGroup {
    type Elem: Clone + Eq + Ord + std::hash::Hash + fmt::Debug;

    fn name(&self) -> String;
    fn identity(&self) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inverse(&self, a: &Self::Elem) -> Self::Elem;
    /// Exact uniform sample.
    fn sample(&self, rng: &mut dyn RngCore) -> Self::Elem;
    /// Group order, when it fits in a `u64`.
    fn card(&self) -> Option<u64>;
    /// Full element list for small groups.
    fn elements(&self) -> Option<Vec<Self::Elem>>;

    /// Order of an element by iterating powers.
    fn order_of(&self, a: &Self::Elem) -> u64 {
        let e = self.identity();
        let mut x = a.clone();
        let mut k = 1u64;
        while x != e {
            x = self.mul(&x, a);
            k += 1;
            assert!(k < 100_000_000, "element order beyond desk scale");
        }
        k
    }

    fn commutator(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        let ab = self.mul(a, b);
        let ia = self.inverse(a);
        let ib = self.inverse(b);
        self.mul(&self.mul(&ab, &ia), &ib)
    }
}

fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= p as u64 {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// `SL(2, F_p)`: 2x2 matrices over the prime field with determinant 1.
#[derive(Clone, Copy, Debug)]
pub struct Sl2 {
    p: u32,
}

/// Row-major entries, each reduced mod p.
pub type Sl2Elem = [u32; 4];

impl Sl2 {
    pub fn new(p: u32) -> Result<Sl2, GroupError> {
        if !is_prime(p) {
            return Err(GroupError::NotPrime(p));
        }
        if p > 1000 {
            return Err(GroupError::TooLarge(format!("p = {p}")));
        }
        Ok(Sl2 { p })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    fn det(&self, m: &Sl2Elem) -> u32 {
        let p = self.p as u64;
        let ad = (m[0] as u64 * m[3] as u64) % p;
        let bc = (m[1] as u64 * m[2] as u64) % p;
        ((ad + p - bc) % p) as u32
    }
}

impl FiniteGroup for Sl2 {
    type Elem = Sl2Elem;

    fn name(&self) -> String {
        format!("SL(2,{})", self.p)
    }

    fn identity(&self) -> Sl2Elem {
        [1, 0, 0, 1]
    }

    fn mul(&self, a: &Sl2Elem, b: &Sl2Elem) -> Sl2Elem {
        let p = self.p as u64;
        let at = |x: &Sl2Elem, i: usize| x[i] as u64;
        [
            ((at(a, 0) * at(b, 0) + at(a, 1) * at(b, 2)) % p) as u32,
            ((at(a, 0) * at(b, 1) + at(a, 1) * at(b, 3)) % p) as u32,
            ((at(a, 2) * at(b, 0) + at(a, 3) * at(b, 2)) % p) as u32,
            ((at(a, 2) * at(b, 1) + at(a, 3) * at(b, 3)) % p) as u32,
        ]
    }

    fn inverse(&self, a: &Sl2Elem) -> Sl2Elem {
        let p = self.p;
        [a[3], (p - a[1]) % p, (p - a[2]) % p, a[0]]
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Sl2Elem {
        // Uniform over F_p^4 conditioned on det = 1 stays uniform on SL2.
        loop {
            let m = [
                uniform_index(rng, self.p as u64) as u32,
                uniform_index(rng, self.p as u64) as u32,
                uniform_index(rng, self.p as u64) as u32,
                uniform_index(rng, self.p as u64) as u32,
            ];
            if self.det(&m) == 1 {
                return m;
            }
        }
    }

    fn card(&self) -> Option<u64> {
        let p = self.p as u64;
        Some(p * (p - 1) * (p + 1))
    }

    fn elements(&self) -> Option<Vec<Sl2Elem>> {
        if self.p > 37 {
            return None;
        }
        let p = self.p;
        let mut out = Vec::with_capacity(self.card().unwrap() as usize);
        for a in 0..p {
            for b in 0..p {
                for c in 0..p {
                    for d in 0..p {
                        let m = [a, b, c, d];
                        if self.det(&m) == 1 {
                            out.push(m);
                        }
                    }
                }
            }
        }
        Some(out)
    }
}

/// The symmetric group on `0..degree`.
#[derive(Clone, Copy, Debug)]
pub struct Sym {
    degree: usize,
}

/// `perm[i]` is the image of `i`.
pub type Perm = Vec<u16>;

impl Sym {
    pub fn new(degree: usize) -> Result<Sym, GroupError> {
        if degree < 1 || degree > u16::MAX as usize {
            return Err(GroupError::TooLarge(format!("degree {degree}")));
        }
        Ok(Sym { degree })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// The trivial group, handy as a cover target.
    pub fn trivial() -> Sym {
        Sym { degree: 1 }
    }

    pub fn fixed_points(&self, a: &Perm) -> usize {
        a.iter().enumerate().filter(|&(i, &x)| i == x as usize).count()
    }
}

impl FiniteGroup for Sym {
    type Elem = Perm;

    fn name(&self) -> String {
        format!("Sym({})", self.degree)
    }

    fn identity(&self) -> Perm {
        (0..self.degree as u16).collect()
    }

    fn mul(&self, a: &Perm, b: &Perm) -> Perm {
        b.iter().map(|&x| a[x as usize]).collect()
    }

    fn inverse(&self, a: &Perm) -> Perm {
        let mut out = vec![0u16; self.degree];
        for (i, &x) in a.iter().enumerate() {
            out[x as usize] = i as u16;
        }
        out
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Perm {
        let mut perm = self.identity();
        for i in (1..self.degree).rev() {
            let j = uniform_index(rng, (i + 1) as u64) as usize;
            perm.swap(i, j);
        }
        perm
    }

    fn card(&self) -> Option<u64> {
        let mut acc: u64 = 1;
        for k in 2..=self.degree as u64 {
            acc = acc.checked_mul(k)?;
        }
        Some(acc)
    }

    fn elements(&self) -> Option<Vec<Perm>> {
        if self.degree > 8 {
            return None;
        }
        let mut out = Vec::new();
        let mut current = self.identity();
        heaps(&mut current, self.degree, &mut out);
        fn heaps(xs: &mut Perm, k: usize, out: &mut Vec<Perm>) {
            if k <= 1 {
                out.push(xs.clone());
                return;
            }
            for i in 0..k {
                heaps(xs, k - 1, out);
                if k % 2 == 0 {
                    xs.swap(i, k - 1);
                } else {
                    xs.swap(0, k - 1);
                }
            }
        }
        Some(out)
    }
}

/// Number of conjugacy classes, by explicit orbit computation on the full
/// element list (small groups only).
pub fn conjugacy_class_count<G: FiniteGroup>(group: &G) -> Option<usize> {
    let elems = group.elements()?;
    let mut seen: std::collections::HashSet<G::Elem> = Default::default();
    let mut classes = 0;
    for x in &elems {
        if seen.contains(x) {
            continue;
        }
        classes += 1;
        for g in &elems {
            let conj = group.mul(&group.mul(g, x), &group.inverse(g));
            seen.insert(conj);
        }
    }
    Some(classes)
}

/// Size of the subgroup generated by `images`, via closure under
/// multiplication; `None` once it exceeds `limit`.
pub fn generated_subgroup_size<G: FiniteGroup>(
    group: &G,
    images: &[G::Elem],
    limit: usize,
) -> Option<usize> {
    let mut set: std::collections::HashSet<G::Elem> = Default::default();
    set.insert(group.identity());
    let mut frontier: Vec<G::Elem> = vec![group.identity()];
    while let Some(x) = frontier.pop() {
        for gen in images {
            for y in [group.mul(&x, gen), group.mul(&x, &group.inverse(gen))] {
                if set.insert(y.clone()) {
                    if set.len() > limit {
                        return None;
                    }
                    frontier.push(y);
                }
            }
        }
    }
    Some(set.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::stream_rng;

    #[test]
    fn sl2_orders_by_enumeration() {
        for (p, expected) in [(2u32, 6u64), (3, 24), (5, 120), (7, 336)] {
            let g = Sl2::new(p).unwrap();
            let elems = g.elements().unwrap();
            assert_eq!(elems.len() as u64, expected);
            assert_eq!(g.card(), Some(expected));
        }
        assert!(Sl2::new(4).is_err());
        assert!(Sl2::new(1).is_err());
    }

    #[test]
    fn group_axioms_spot_checks() {
        let g = Sl2::new(5).unwrap();
        let s = Sym::new(9).unwrap();
        let mut rng = stream_rng(11, &[]);
        for _ in 0..200 {
            let (a, b, c) = (g.sample(&mut rng), g.sample(&mut rng), g.sample(&mut rng));
            assert_eq!(g.mul(&g.mul(&a, &b), &c), g.mul(&a, &g.mul(&b, &c)));
            assert_eq!(g.mul(&a, &g.inverse(&a)), g.identity());
            assert_eq!(g.mul(&g.identity(), &a), a);

            let (x, y, z) = (s.sample(&mut rng), s.sample(&mut rng), s.sample(&mut rng));
            assert_eq!(s.mul(&s.mul(&x, &y), &z), s.mul(&x, &s.mul(&y, &z)));
            assert_eq!(s.mul(&x, &s.inverse(&x)), s.identity());
        }
    }

    #[test]
    fn orders_divide_group_order() {
        let g = Sl2::new(7).unwrap();
        let mut rng = stream_rng(3, &[]);
        for _ in 0..100 {
            let a = g.sample(&mut rng);
            assert_eq!(336 % g.order_of(&a), 0);
        }
    }

    #[test]
    fn sl2_sampling_is_uniform() {
        let g = Sl2::new(3).unwrap();
        let elems = g.elements().unwrap();
        let mut counts: std::collections::HashMap<Sl2Elem, u64> = Default::default();
        let mut rng = stream_rng(5, &[]);
        let trials = 48_000u64;
        for _ in 0..trials {
            *counts.entry(g.sample(&mut rng)).or_insert(0) += 1;
        }
        assert_eq!(counts.len(), 24);
        let p = 1.0 / 24.0;
        let expected = trials as f64 * p;
        let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
        for e in &elems {
            let c = counts[e] as f64;
            assert!(
                (c - expected).abs() < 3.0 * sigma,
                "element {e:?}: {c} vs {expected:.1}±{:.1}",
                3.0 * sigma
            );
        }
    }

    #[test]
    fn sym_count_and_classes() {
        let s4 = Sym::new(4).unwrap();
        assert_eq!(s4.elements().unwrap().len(), 24);
        // partitions of 4
        assert_eq!(conjugacy_class_count(&s4), Some(5));
        let sl23 = Sl2::new(3).unwrap();
        assert_eq!(conjugacy_class_count(&sl23), Some(7));
    }

    #[test]
    fn subgroup_closure() {
        let g = Sl2::new(3).unwrap();
        let all = generated_subgroup_size(&g, &[[1, 1, 0, 1], [1, 0, 1, 1]], 10_000);
        assert_eq!(all, Some(24));
        let center = generated_subgroup_size(&g, &[[2, 0, 0, 2]], 10_000);
        assert_eq!(center, Some(2));
    }
}
