//! The constrained random gluing process.
//!
//! Starting from a `2n`-triangle annulus whose only cycle carries `(LR)^n`,
//! the process repeatedly glues a uniformly random *available* pair of
//! boundary sides: a pair is available when every connecting path of trace
//! above 2 has trace at least `tau0`, so no closed curve shorter than
//! `2·acosh(tau0/2)` can appear. The plain variant glues until saturation
//! or a dead end. The fixed-genus variant additionally refuses gluings that
//! would close a cusp into the interior or leave a one-sided boundary
//! component, and switches to a deterministic cusp-minimizing completion as
//! soon as the state is safe; for odd `n` a saturated run yields genus
//! `(n+1)/2` with exactly one cusp.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand_chacha::ChaCha12Rng;

use crate::database::{encode, SurfaceRecord};
use crate::geodesics::{conflict_partners, dangling_reach, systole, GeodesicCert};
use crate::seeding::{stream_rng, uniform_index};
use crate::surface::{Slot, Surface, SurfaceError};
use crate::words::{power_trace, Trace};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Plain,
    FixedGenus,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Plain => write!(f, "plain"),
            Variant::FixedGenus => write!(f, "fixed-genus"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProcessConfig {
    /// Number of triangle pairs; the surface has `2n` triangles.
    pub n: usize,
    /// Trace threshold: saturated outputs have no geodesic of trace below it.
    pub tau0: u64,
    pub variant: Variant,
    /// Refuse to close pure `L^k` paths until the final gluing.
    pub forbid_pure_l_closures: bool,
    pub seed: u64,
    /// Extra tags mixed into the seed stream (retry schedulers use
    /// `[genus, tau0, attempt]`).
    pub seed_tags: Vec<u64>,
}

impl ProcessConfig {
    pub fn plain(n: usize, tau0: u64, seed: u64) -> ProcessConfig {
        ProcessConfig {
            n,
            tau0,
            variant: Variant::Plain,
            forbid_pure_l_closures: false,
            seed,
            seed_tags: Vec::new(),
        }
    }

    pub fn fixed_genus(n: usize, tau0: u64, seed: u64) -> ProcessConfig {
        ProcessConfig {
            variant: Variant::FixedGenus,
            forbid_pure_l_closures: true,
            ..ProcessConfig::plain(n, tau0, seed)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProcessError {
    /// The initial annulus already carries a geodesic below the threshold.
    SeedTooShort { n: usize, core_trace: Trace, tau0: u64 },
    /// A user-supplied initial surface carries a geodesic below the
    /// threshold.
    SeedShortGeodesic { trace: u64, tau0: u64 },
    BadConfig(String),
    NotSafe,
    WrongVariant,
    Surface(SurfaceError),
}

impl fmt::Display for ProcessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProcessError::SeedTooShort { n, core_trace, tau0 } => write!(
                f,
                "initial annulus with n={n} has core trace {core_trace} < tau0={tau0}"
            ),
            ProcessError::SeedShortGeodesic { trace, tau0 } => write!(
                f,
                "initial surface carries a geodesic of trace {trace} < tau0={tau0}"
            ),
            ProcessError::BadConfig(msg) => write!(f, "bad config: {msg}"),
            ProcessError::NotSafe => write!(f, "state is not safe"),
            ProcessError::WrongVariant => write!(f, "operation requires the fixed-genus variant"),
            ProcessError::Surface(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for ProcessError {}

impl From<SurfaceError> for ProcessError {
    fn from(e: SurfaceError) -> ProcessError {
        ProcessError::Surface(e)
    }
}

/// The evolving state: partial surface, unglued sides, and the cached set
/// of conflicting pairs (trace distance below `tau0`).
#[derive(Clone, Debug)]
pub struct ProcessState {
    surface: Surface,
    tau0: u64,
    variant: Variant,
    forbid_pure_l: bool,
    t: usize,
    dangling: BTreeSet<Slot>,
    conflicts: BTreeMap<Slot, BTreeSet<Slot>>,
    rng: ChaCha12Rng,
}

impl ProcessState {
    /// Starts from the `(LR)^n` annulus after checking that its core curve
    /// is no shorter than the threshold.
    pub fn init_annulus(config: &ProcessConfig) -> Result<ProcessState, ProcessError> {
        if config.n < 1 {
            return Err(ProcessError::BadConfig("n must be at least 1".into()));
        }
        if config.tau0 < 3 {
            return Err(ProcessError::BadConfig("tau0 must be at least 3".into()));
        }
        // tr((LR)^n) from tr(LR) = 3 by the power recurrence, compared
        // exactly against tau0.
        let core_trace = power_trace(3, config.n as u64, config.tau0.saturating_add(1));
        if !core_trace.is_at_least(config.tau0) {
            return Err(ProcessError::SeedTooShort {
                n: config.n,
                core_trace,
                tau0: config.tau0,
            });
        }
        let surface = Surface::annulus(config.n);
        let dangling: BTreeSet<Slot> = surface.dangling_slots().into_iter().collect();
        let mut state = ProcessState {
            surface,
            tau0: config.tau0,
            variant: config.variant,
            forbid_pure_l: config.forbid_pure_l_closures,
            t: 0,
            dangling,
            conflicts: BTreeMap::new(),
            rng: stream_rng(config.seed, &config.seed_tags),
        };
        state.conflicts = state.conflicts_from_scratch();
        Ok(state)
    }

    /// Starts from a user-supplied two-valent configuration: `2n` triangles,
    /// each with exactly one boundary side, and no closed geodesic of trace
    /// below the threshold.
    pub fn init_custom(surface: Surface, config: &ProcessConfig) -> Result<ProcessState, ProcessError> {
        if config.tau0 < 3 {
            return Err(ProcessError::BadConfig("tau0 must be at least 3".into()));
        }
        surface.validate()?;
        if surface.n_pairs() != config.n {
            return Err(ProcessError::BadConfig(format!(
                "surface has {} triangle pairs, config says {}",
                surface.n_pairs(),
                config.n
            )));
        }
        let dangling: BTreeSet<Slot> = surface.dangling_slots().into_iter().collect();
        let mut per_triangle = vec![0usize; surface.n_triangles()];
        for h in &dangling {
            per_triangle[h.triangle()] += 1;
        }
        if per_triangle.iter().any(|&c| c != 1) {
            return Err(ProcessError::BadConfig(
                "initial configuration must leave exactly one side per triangle unglued".into(),
            ));
        }
        if let Some(short) = crate::geodesics::enumerate_short_geodesics(
            &surface,
            config.tau0.saturating_sub(1),
        )?
        .first()
        {
            return Err(ProcessError::SeedShortGeodesic {
                trace: short.trace,
                tau0: config.tau0,
            });
        }
        let mut state = ProcessState {
            surface,
            tau0: config.tau0,
            variant: config.variant,
            forbid_pure_l: config.forbid_pure_l_closures,
            t: 0,
            dangling,
            conflicts: BTreeMap::new(),
            rng: stream_rng(config.seed, &config.seed_tags),
        };
        state.conflicts = state.conflicts_from_scratch();
        Ok(state)
    }

    pub fn surface(&self) -> &Surface {
        &self.surface
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn tau0(&self) -> u64 {
        self.tau0
    }

    pub fn dangling_count(&self) -> usize {
        self.dangling.len()
    }

    /// Full recomputation of the conflict sets; the incremental update is
    /// checked against this in tests.
    pub fn conflicts_from_scratch(&self) -> BTreeMap<Slot, BTreeSet<Slot>> {
        let mut map: BTreeMap<Slot, BTreeSet<Slot>> = BTreeMap::new();
        for &h in &self.dangling {
            for (partner, _) in conflict_partners(&self.surface, h, self.tau0) {
                map.entry(h).or_default().insert(partner);
                map.entry(partner).or_default().insert(h);
            }
        }
        map
    }

    pub fn conflicts(&self) -> &BTreeMap<Slot, BTreeSet<Slot>> {
        &self.conflicts
    }

    fn is_conflict(&self, a: Slot, b: Slot) -> bool {
        self.conflicts.get(&a).is_some_and(|set| set.contains(&b))
    }

    /// Left-walk successor of every boundary side.
    fn boundary_successors(&self) -> BTreeMap<Slot, Slot> {
        self.surface
            .boundary_components()
            .into_iter()
            .flat_map(|comp| {
                let m = comp.len();
                (0..m).map(move |i| (comp[i].0, comp[(i + 1) % m].0))
            })
            .collect()
    }

    fn excluded_by_variant(&self, lnext: &BTreeMap<Slot, Slot>, a: Slot, b: Slot) -> bool {
        let adjacent = lnext[&a] == b || lnext[&b] == a;
        match self.variant {
            Variant::FixedGenus => {
                let one_between = lnext[&lnext[&a]] == b || lnext[&lnext[&b]] == a;
                if adjacent || one_between {
                    return true;
                }
            }
            Variant::Plain => {}
        }
        // Closing a pure L^k path is the same as gluing two sides adjacent
        // along the boundary; allowed again at the very last gluing.
        self.forbid_pure_l && self.dangling.len() > 2 && adjacent
    }

    fn needs_boundary_info(&self) -> bool {
        self.variant == Variant::FixedGenus || self.forbid_pure_l
    }

    /// All currently available pairs, in ascending order.
    pub fn available_pairs(&self) -> Vec<(Slot, Slot)> {
        let lnext = self.needs_boundary_info().then(|| self.boundary_successors());
        let slots: Vec<Slot> = self.dangling.iter().copied().collect();
        let mut out = Vec::new();
        for (i, &a) in slots.iter().enumerate() {
            for &b in &slots[i + 1..] {
                if self.is_conflict(a, b) {
                    continue;
                }
                if let Some(lnext) = &lnext {
                    if self.excluded_by_variant(lnext, a, b) {
                        continue;
                    }
                }
                out.push((a, b));
            }
        }
        out
    }

    /// Safety: every remaining pair is available, and every boundary cusp
    /// has at least `sqrt(tau0 - 2)` incident triangle corners. A safe
    /// state saturates no matter which gluings follow.
    pub fn is_safe(&self) -> bool {
        if self.conflicts.values().any(|set| !set.is_empty()) {
            return false;
        }
        let need = self.tau0.saturating_sub(2);
        self.surface
            .boundary_components()
            .iter()
            .all(|comp| comp.iter().all(|&(_, fan)| (fan as u64 * fan as u64) >= need))
    }

    /// Glues a specific currently-available pair; exhaustive exploration
    /// over all availability choices uses this instead of [`step`].
    ///
    /// [`step`]: ProcessState::step
    pub fn glue_available_pair(&mut self, a: Slot, b: Slot) -> Result<(), ProcessError> {
        let pair = if a < b { (a, b) } else { (b, a) };
        if !self.available_pairs().contains(&pair) {
            return Err(ProcessError::BadConfig(format!(
                "pair ({a}, {b}) is not available"
            )));
        }
        self.glue_and_update(pair.0, pair.1);
        self.t += 1;
        Ok(())
    }

    /// Glues one uniformly random available pair. Returns the pair, or
    /// `None` when no pair is available (the stop condition, not an error).
    pub fn step(&mut self) -> Option<(Slot, Slot)> {
        let pairs = self.available_pairs();
        if pairs.is_empty() {
            return None;
        }
        let k = uniform_index(&mut self.rng, pairs.len() as u64) as usize;
        let (a, b) = pairs[k];
        self.glue_and_update(a, b);
        self.t += 1;
        Some((a, b))
    }

    /// Glues a pair and updates the conflict cache incrementally: paths
    /// created by the new edge split into a walk into one end and a walk
    /// out of the other, so composing the two reach sets finds every new
    /// conflict. Old conflicts persist (gluing never removes paths).
    fn glue_and_update(&mut self, a: Slot, b: Slot) {
        self.surface.glue(a, b).expect("available pair is dangling");
        self.dangling.remove(&a);
        self.dangling.remove(&b);
        for x in [a, b] {
            if let Some(set) = self.conflicts.remove(&x) {
                for y in set {
                    if let Some(back) = self.conflicts.get_mut(&y) {
                        back.remove(&x);
                    }
                }
            }
        }
        let reach_a = dangling_reach(&self.surface, a, self.tau0);
        let reach_b = dangling_reach(&self.surface, b, self.tau0);
        for &(x, mx) in &reach_a {
            for &(y, my) in &reach_b {
                if x == y {
                    continue;
                }
                let t = mx.transpose().mul(my).trace();
                if t > 2 && t < self.tau0 {
                    self.conflicts.entry(x).or_default().insert(y);
                    self.conflicts.entry(y).or_default().insert(x);
                }
            }
        }
    }

    /// Deterministic completion of a safe fixed-genus state: merge boundary
    /// components in ascending order of least slot, then close the final
    /// `2s`-gon by the side-`i`-to-side-`i+s` pattern (one adjacent gluing
    /// first when `s` is odd). At most two cusps are created, and for odd
    /// `n` exactly one.
    pub fn complete_min_cusps(&mut self) -> Result<(), ProcessError> {
        if self.variant != Variant::FixedGenus {
            return Err(ProcessError::WrongVariant);
        }
        if !self.is_safe() {
            return Err(ProcessError::NotSafe);
        }
        loop {
            let comps = self.surface.boundary_components();
            if comps.len() <= 1 {
                break;
            }
            let a = comps[0][0].0;
            let b = comps[1][0].0;
            self.glue_plain(a, b);
        }
        let comps = self.surface.boundary_components();
        let Some(comp) = comps.into_iter().next() else {
            return Ok(());
        };
        let mut sides: Vec<Slot> = comp.into_iter().map(|(s, _)| s).collect();
        debug_assert_eq!(sides.len() % 2, 0);
        if (sides.len() / 2) % 2 == 1 {
            self.glue_plain(sides[0], sides[1]);
            let comps = self.surface.boundary_components();
            let Some(comp) = comps.into_iter().next() else {
                return Ok(());
            };
            sides = comp.into_iter().map(|(s, _)| s).collect();
        }
        let half = sides.len() / 2;
        for i in 0..half {
            self.glue_plain(sides[i], sides[i + half]);
        }
        debug_assert!(self.surface.is_closed());
        Ok(())
    }

    fn glue_plain(&mut self, a: Slot, b: Slot) {
        self.surface.glue(a, b).expect("completion glues boundary sides");
        self.dangling.remove(&a);
        self.dangling.remove(&b);
    }
}

/// What a run produced.
#[derive(Clone, Debug)]
pub struct ProcessOutcome {
    pub n: usize,
    pub tau0: u64,
    pub variant: Variant,
    pub seed: u64,
    pub seed_tags: Vec<u64>,
    /// Random steps performed before the process stopped.
    pub t_max: usize,
    pub saturated: bool,
    /// Step index at which safety first held, if it ever did.
    pub safe_at: Option<usize>,
    pub genus: Option<usize>,
    pub cusps: Option<usize>,
    /// Shortest geodesic of the saturated surface; `None` when unsaturated
    /// or when the surface carries no essential curve.
    pub systole: Option<GeodesicCert>,
    /// Independent check that the systole meets `2·acosh(tau0/2)`.
    pub verified: Option<bool>,
    /// Attempts consumed; 1 for a direct run, more under a retry schedule.
    pub attempts_used: u64,
    /// Final surface (partial when unsaturated, kept for diagnostics).
    pub surface: Surface,
}

impl ProcessOutcome {
    pub fn systole_length(&self) -> Option<f64> {
        self.systole.as_ref().map(|c| c.length)
    }

    pub fn csv_header() -> &'static str {
        "genus,n,tau0,systole,saturated,attempts_used,seed"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.genus.map_or(String::new(), |g| g.to_string()),
            self.n,
            self.tau0,
            self.systole_length().map_or(String::new(), |l| l.to_string()),
            self.saturated,
            self.attempts_used,
            self.seed,
        )
    }
}

/// Runs the process to saturation or a dead end, then verifies the output.
pub fn run(config: &ProcessConfig) -> Result<ProcessOutcome, ProcessError> {
    let mut state = ProcessState::init_annulus(config)?;
    let mut safe_at = None;
    let saturated = loop {
        if safe_at.is_none() && state.is_safe() {
            safe_at = Some(state.t);
        }
        if state.dangling.is_empty() {
            break true;
        }
        match config.variant {
            Variant::FixedGenus if safe_at.is_some() => {
                state.complete_min_cusps()?;
                break true;
            }
            _ => {}
        }
        if state.step().is_none() {
            break false;
        }
    };
    if !saturated {
        // A safe state cannot run out of available pairs before saturating.
        assert!(
            safe_at.is_none(),
            "safe state stalled at t={} (safety held since {:?})",
            state.t,
            safe_at
        );
    }
    let mut outcome = ProcessOutcome {
        n: config.n,
        tau0: config.tau0,
        variant: config.variant,
        seed: config.seed,
        seed_tags: config.seed_tags.clone(),
        t_max: state.t,
        saturated,
        safe_at,
        genus: None,
        cusps: None,
        systole: None,
        verified: None,
        attempts_used: 1,
        surface: state.surface.clone(),
    };
    if saturated {
        let (g, c) = outcome.surface.genus_and_cusps()?;
        outcome.genus = Some(g);
        outcome.cusps = Some(c);
        let cert = systole(&outcome.surface)?;
        outcome.verified = Some(cert.trace >= config.tau0);
        outcome.systole = Some(cert);
    }
    Ok(outcome)
}

/// Result of the descending-threshold retry schedule.
#[derive(Clone, Debug)]
pub struct SearchResult {
    pub genus: usize,
    /// First verified success, with the threshold and attempt that found it.
    pub success: Option<(ProcessOutcome, SurfaceRecord)>,
    pub attempts_used: u64,
}

/// Searches for a one-cusped genus-`g` surface: `n = 2g - 1` triangles
/// pairs, threshold starting at `tau_start` (default `max(3, g)`), up to
/// `max_attempts` seeded attempts per threshold, decrementing the threshold
/// after a fully failed round. Every success is re-verified independently
/// before it is accepted.
pub fn search_with_retries(
    genus: usize,
    master_seed: u64,
    tau_start: Option<u64>,
    max_attempts: u64,
    threads: usize,
) -> Result<SearchResult, ProcessError> {
    if genus < 2 {
        return Err(ProcessError::BadConfig("genus must be at least 2".into()));
    }
    let n = 2 * genus - 1;
    let tau_start = tau_start.unwrap_or_else(|| (genus as u64).max(3));
    let mut attempts_used = 0u64;
    for tau0 in (3..=tau_start).rev() {
        let attempt_outcome = |k: u64| -> Option<(ProcessOutcome, SurfaceRecord)> {
            let config = ProcessConfig {
                seed: master_seed,
                seed_tags: vec![genus as u64, tau0, k],
                ..ProcessConfig::fixed_genus(n, tau0, master_seed)
            };
            let outcome = run(&config).ok()?;
            let ok = outcome.saturated
                && outcome.genus == Some(genus)
                && outcome.cusps == Some(1)
                && outcome.verified == Some(true);
            if !ok {
                return None;
            }
            let record = encode(&outcome.surface, tau0).ok()?;
            Some((outcome, record))
        };
        let found = if threads <= 1 {
            let mut found = None;
            for k in 0..max_attempts {
                attempts_used += 1;
                if let Some(hit) = attempt_outcome(k) {
                    found = Some(hit);
                    break;
                }
            }
            found
        } else {
            // Attempts are independent streams; run them in chunks and keep
            // the lowest attempt index that succeeded.
            let attempt_outcome = &attempt_outcome;
            let mut found: Option<(ProcessOutcome, SurfaceRecord)> = None;
            let mut k0 = 0;
            while k0 < max_attempts && found.is_none() {
                let hi = (k0 + threads as u64).min(max_attempts);
                let hits: Vec<Option<(ProcessOutcome, SurfaceRecord)>> =
                    std::thread::scope(|scope| {
                        (k0..hi)
                            .map(|k| scope.spawn(move || attempt_outcome(k)))
                            .collect::<Vec<_>>()
                            .into_iter()
                            .map(|h| h.join().expect("attempt thread"))
                            .collect()
                    });
                for hit in hits {
                    attempts_used += 1;
                    if hit.is_some() {
                        found = hit;
                        break;
                    }
                }
                k0 = hi;
            }
            found
        };
        if let Some((mut outcome, record)) = found {
            outcome.attempts_used = attempts_used;
            return Ok(SearchResult {
                genus,
                success: Some((outcome, record)),
                attempts_used,
            });
        }
    }
    Ok(SearchResult {
        genus,
        success: None,
        attempts_used,
    })
}

/// One verified point of a genus sweep.
#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub genus: usize,
    pub n: usize,
    pub tau0: u64,
    pub systole_trace: Option<u64>,
    pub systole: f64,
    pub attempts_used: u64,
    pub seed: u64,
    pub record: SurfaceRecord,
}

impl SweepPoint {
    /// Best known cusped upper bound at one cusp: `2·acosh(6g - 3)`.
    pub fn upper_bound(&self) -> f64 {
        2.0 * ((6 * self.genus - 3) as f64).acosh()
    }
}

/// Runs the retry search for every genus in `[lo, hi]`.
pub fn sweep(
    lo: usize,
    hi: usize,
    master_seed: u64,
    max_attempts: u64,
    threads: usize,
) -> Result<Vec<SweepPoint>, ProcessError> {
    let mut points = Vec::new();
    for genus in lo..=hi {
        let result = search_with_retries(genus, master_seed, None, max_attempts, threads)?;
        let Some((outcome, record)) = result.success else {
            return Err(ProcessError::BadConfig(format!(
                "sweep failed to produce genus {genus}"
            )));
        };
        let systole_trace = outcome.systole.as_ref().map(|c| c.trace);
        let systole_len = match &outcome.systole {
            Some(c) => c.length,
            None => f64::INFINITY,
        };
        points.push(SweepPoint {
            genus,
            n: outcome.n,
            tau0: record.tau0,
            systole_trace,
            systole: systole_len,
            attempts_used: result.attempts_used,
            seed: master_seed,
            record,
        });
    }
    Ok(points)
}

/// Figure-style CSV: one verified point per genus against the upper bound.
pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from("genus,tau0,systole,upper_bound\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{},{}\n",
            p.genus,
            p.tau0,
            p.systole,
            p.upper_bound()
        ));
    }
    out
}

/// Length threshold `2·acosh(tau0/2)` guaranteed by a threshold `tau0`.
pub fn sigma0(tau0: u64) -> f64 {
    2.0 * (tau0 as f64 / 2.0).acosh()
}
