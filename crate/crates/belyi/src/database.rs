//! Canonical surface records and their independent verification.
//!
//! A record stores a one-cusped genus-`g` surface built from `4g - 2`
//! triangles as `(tau0, [i_0, ..., i_{12g-7}])`: triangle sides are labelled
//! counter-clockwise with three consecutive numbers per triangle, and side
//! `k` is glued to side `i_k`. The on-disk format is a single canonical
//! JSON document, integers only, keys sorted.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::geodesics::{enumerate_short_geodesics, systole};
use crate::surface::{Slot, Surface, SurfaceError};

pub const FORMAT_TAG: &str = "systole-db-v1";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfaceRecord {
    pub genus: u32,
    pub tau0: u64,
    pub gluing: Vec<u32>,
}

#[derive(Clone, Debug)]
pub enum DbError {
    Schema(String),
    Surface(SurfaceError),
    Io(String),
}

impl fmt::Display for DbError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DbError::Schema(msg) => write!(f, "schema error: {msg}"),
            DbError::Surface(e) => write!(f, "surface error: {e}"),
            DbError::Io(msg) => write!(f, "io error: {msg}"),
        }
    }
}

impl std::error::Error for DbError {}

impl From<SurfaceError> for DbError {
    fn from(e: SurfaceError) -> DbError {
        DbError::Surface(e)
    }
}

/// Canonical triangle relabelling of a closed connected surface: breadth
/// first over the dual graph from the triangle containing slot 0, children
/// in cyclic slot order, each triangle rotated so its discovery slot gets
/// position 0. Returns `map[old_slot] = new_slot`.
pub fn canonical_relabel(s: &Surface) -> Result<Vec<u32>, SurfaceError> {
    if !s.is_closed() {
        return Err(SurfaceError::NotClosed);
    }
    if !s.is_connected() {
        return Err(SurfaceError::NotConnected);
    }
    let t_count = s.n_triangles();
    let mut new_index = vec![usize::MAX; t_count];
    let mut rot = vec![0u8; t_count]; // old position given new position 0
    let mut order: Vec<usize> = Vec::with_capacity(t_count);
    new_index[0] = 0;
    order.push(0);
    let mut head = 0;
    while head < order.len() {
        let t = order[head];
        head += 1;
        for i in 0..3 {
            let p = (rot[t] as usize + i) % 3;
            let q = s.pairing(Slot((3 * t + p) as u32)).expect("closed");
            let u = q.triangle();
            if new_index[u] == usize::MAX {
                new_index[u] = order.len();
                rot[u] = q.position();
                order.push(u);
            }
        }
    }
    let map = (0..s.n_slots() as u32)
        .map(|old| {
            let t = (old / 3) as usize;
            let p = old % 3;
            let shifted = (p + 3 - rot[t] as u32) % 3;
            (3 * new_index[t] as u32) + shifted
        })
        .collect();
    Ok(map)
}

/// Encodes a closed connected one-cusped surface as a canonical record.
pub fn encode(s: &Surface, tau0: u64) -> Result<SurfaceRecord, DbError> {
    let (genus, cusps) = s.genus_and_cusps()?;
    if cusps != 1 {
        return Err(DbError::Schema(format!(
            "records require exactly one cusp, surface has {cusps}"
        )));
    }
    debug_assert_eq!(s.n_triangles(), 4 * genus - 2);
    let map = canonical_relabel(s)?;
    let mut gluing = vec![0u32; s.n_slots()];
    for old in 0..s.n_slots() {
        let partner = s.pairing(Slot(old as u32)).expect("closed");
        gluing[map[old] as usize] = map[partner.index()];
    }
    Ok(SurfaceRecord {
        genus: genus as u32,
        tau0,
        gluing,
    })
}

impl SurfaceRecord {
    /// Rebuilds the surface; fails on length mismatches, fixed points or
    /// non-involutive lists.
    pub fn decode(&self) -> Result<Surface, DbError> {
        let expected = 12 * self.genus as usize - 6;
        if self.gluing.len() != expected {
            return Err(DbError::Schema(format!(
                "genus {} record needs {} entries, got {}",
                self.genus,
                expected,
                self.gluing.len()
            )));
        }
        let n_pairs = 2 * self.genus as usize - 1;
        let list: Vec<Option<u32>> = self.gluing.iter().map(|&i| Some(i)).collect();
        Surface::from_involution_list(n_pairs, &list).map_err(DbError::from)
    }
}

/// Per-check verification report for one record.
#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub genus: u32,
    pub tau0: u64,
    pub checks: Vec<(&'static str, bool)>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|&(_, ok)| ok)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "genus {} (tau0 {}):", self.genus, self.tau0)?;
        for (name, ok) in &self.checks {
            write!(f, " {}={}", name, if *ok { "ok" } else { "FAIL" })?;
        }
        Ok(())
    }
}

/// Independent verification: uses only the decoded surface, never the
/// generator's internal state.
pub fn verify(record: &SurfaceRecord) -> VerifyReport {
    let mut checks: Vec<(&'static str, bool)> = Vec::new();
    let surface = match record.decode() {
        Ok(s) => {
            checks.push(("involution", true));
            s
        }
        Err(_) => {
            checks.push(("involution", false));
            return VerifyReport {
                genus: record.genus,
                tau0: record.tau0,
                checks,
            };
        }
    };
    let connected = surface.is_connected();
    checks.push(("connected", connected));
    checks.push((
        "triangles",
        surface.n_triangles() == 4 * record.genus as usize - 2,
    ));
    if connected {
        match surface.genus_and_cusps() {
            Ok((g, c)) => {
                checks.push(("one_cusp", c == 1));
                checks.push(("genus", g == record.genus as usize));
            }
            Err(_) => checks.push(("one_cusp", false)),
        }
        // systole >= 2 acosh(tau0 / 2) iff no geodesic of trace < tau0
        let short = enumerate_short_geodesics(&surface, record.tau0.saturating_sub(1));
        checks.push(("systole_threshold", short.map_or(false, |v| v.is_empty())));
        // cusped upper bound at one cusp: trace is at most 2(6g - 3)
        let sane = match systole(&surface) {
            Ok(cert) => cert.trace <= (12 * record.genus as u64) - 6,
            Err(_) => false,
        };
        checks.push(("upper_bound_sanity", sane));
    }
    VerifyReport {
        genus: record.genus,
        tau0: record.tau0,
        checks,
    }
}

#[derive(Serialize)]
struct DbJsonOut<'a> {
    format: &'a str,
    surfaces: BTreeMap<String, RecordJsonOut<'a>>,
}

#[derive(Serialize)]
struct RecordJsonOut<'a> {
    tau0: u64,
    gluing: &'a [u32],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DbJsonIn {
    format: String,
    surfaces: BTreeMap<String, RecordJsonIn>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordJsonIn {
    tau0: u64,
    gluing: Vec<u32>,
}

/// Genus-keyed store of verified records.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Database {
    pub surfaces: BTreeMap<u32, SurfaceRecord>,
}

impl Database {
    pub fn new() -> Database {
        Database::default()
    }

    /// Inserts, keeping the record with the larger `tau0` on genus
    /// collisions (ties: lexicographically least gluing list).
    pub fn insert(&mut self, record: SurfaceRecord) {
        if let Some(existing) = self.surfaces.get(&record.genus) {
            let keep_existing = existing.tau0 > record.tau0
                || (existing.tau0 == record.tau0 && existing.gluing <= record.gluing);
            if keep_existing {
                return;
            }
        }
        self.surfaces.insert(record.genus, record);
    }

    /// Canonical bytes: fixed field order, string genus keys sorted
    /// lexicographically, no whitespace, integers only.
    pub fn to_canonical_json(&self) -> Vec<u8> {
        let out = DbJsonOut {
            format: FORMAT_TAG,
            surfaces: self
                .surfaces
                .iter()
                .map(|(g, r)| {
                    (
                        g.to_string(),
                        RecordJsonOut {
                            tau0: r.tau0,
                            gluing: &r.gluing,
                        },
                    )
                })
                .collect(),
        };
        serde_json::to_vec(&out).expect("database serializes")
    }

    pub fn from_json(bytes: &[u8]) -> Result<Database, DbError> {
        let parsed: DbJsonIn =
            serde_json::from_slice(bytes).map_err(|e| DbError::Schema(e.to_string()))?;
        if parsed.format != FORMAT_TAG {
            return Err(DbError::Schema(format!(
                "unknown format tag {:?}, expected {FORMAT_TAG:?}",
                parsed.format
            )));
        }
        let mut db = Database::new();
        for (key, rec) in parsed.surfaces {
            let genus: u32 = key
                .parse()
                .map_err(|_| DbError::Schema(format!("genus key {key:?} is not an integer")))?;
            if genus < 1 {
                return Err(DbError::Schema("genus keys start at 1".into()));
            }
            db.surfaces.insert(
                genus,
                SurfaceRecord {
                    genus,
                    tau0: rec.tau0,
                    gluing: rec.gluing,
                },
            );
        }
        Ok(db)
    }

    pub fn load(path: &Path) -> Result<Database, DbError> {
        let bytes = std::fs::read(path).map_err(|e| DbError::Io(format!("{path:?}: {e}")))?;
        Database::from_json(&bytes)
    }

    /// Whole-file atomic write: temp file in the same directory, then rename.
    pub fn save_atomic(&self, path: &Path) -> Result<(), DbError> {
        let bytes = self.to_canonical_json();
        let tmp = path.with_extension("json.tmp");
        {
            let mut f = std::fs::File::create(&tmp)
                .map_err(|e| DbError::Io(format!("{tmp:?}: {e}")))?;
            f.write_all(&bytes)
                .map_err(|e| DbError::Io(format!("{tmp:?}: {e}")))?;
            f.sync_all().map_err(|e| DbError::Io(format!("{tmp:?}: {e}")))?;
        }
        std::fs::rename(&tmp, path).map_err(|e| DbError::Io(format!("{path:?}: {e}")))?;
        Ok(())
    }

    /// Plot dataset: genus, tau0, recomputed systole, cusped upper bound.
    pub fn to_plot_csv(&self) -> Result<String, DbError> {
        let mut out = String::from("genus,tau0,systole,upper_bound\n");
        for record in self.surfaces.values() {
            let surface = record.decode()?;
            let sys = systole(&surface)?.length;
            let upper = 2.0 * (6.0 * record.genus as f64 - 3.0).acosh();
            out.push_str(&format!("{},{},{},{}\n", record.genus, record.tau0, sys, upper));
        }
        Ok(out)
    }
}
