//! Pairwise-GED index: every pair of database graphs within `tau_index`,
//! computed by a pool of workers under a live-node budget, plus a compact
//! binary file format.
//!
//! A worker whose search is preempted by the budget stores the search's
//! lower bound instead of the distance and flags the entry inexact. Inexact
//! entries are still safe for candidate regeneration, which only needs
//! neighborhoods that are supersets of the true ones.

use std::io::{Read, Write};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;

use thiserror::Error;

use crate::ged::{nass_ged_with, GedOptions, SearchMonitor};
use crate::graph::GraphDatabase;

const MAGIC: &[u8; 8] = b"NASSIX01";

/// Largest `tau_index` the file format can hold (7-bit distances).
pub const MAX_TAU_INDEX: u32 = 127;

/// Budget value that never preempts.
pub const UNLIMITED_BUDGET: usize = usize::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IndexEntry {
    pub neighbor: u32,
    pub distance: u8,
    /// False when `distance` is only a lower bound.
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GedIndex {
    tau_index: u32,
    entries: Vec<Vec<IndexEntry>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BuildConfig {
    pub tau_index: u32,
    pub n_workers: usize,
    /// Maximum aggregate number of queued search-tree nodes across workers.
    pub node_budget: usize,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            tau_index: 6,
            n_workers: 1,
            node_budget: UNLIMITED_BUDGET,
        }
    }
}

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("invalid build config: {0}")]
    Config(String),
    #[error("graph id {0} outside the index (size {1})")]
    UnknownGraph(usize, usize),
    #[error("distance {t} exceeds the index threshold {tau_index}")]
    OutOfRange { t: u32, tau_index: u32 },
    #[error("not an index file (bad magic)")]
    BadMagic,
    #[error("index file truncated")]
    Truncated,
    #[error("index checksum mismatch (stored {stored:#010x}, computed {computed:#010x})")]
    Checksum { stored: u32, computed: u32 },
    #[error("corrupt index: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl BuildConfig {
    fn validate(&self) -> Result<(), IndexError> {
        if !(1..=MAX_TAU_INDEX).contains(&self.tau_index) {
            return Err(IndexError::Config(format!(
                "tau_index must be in 1..={MAX_TAU_INDEX}, got {}",
                self.tau_index
            )));
        }
        if self.n_workers == 0 {
            return Err(IndexError::Config("n_workers must be at least 1".into()));
        }
        if self.node_budget == 0 {
            return Err(IndexError::Config("node_budget must be positive".into()));
        }
        Ok(())
    }
}

impl GedIndex {
    pub fn tau_index(&self) -> u32 {
        self.tau_index
    }

    /// Number of indexed graphs.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries of graph `g`, sorted by distance then neighbor id.
    pub fn entries(&self, g: usize) -> &[IndexEntry] {
        &self.entries[g]
    }

    /// Total stored entries, self entries included.
    pub fn num_entries(&self) -> usize {
        self.entries.iter().map(Vec::len).sum()
    }

    pub fn num_inexact(&self) -> usize {
        self.entries.iter().flatten().filter(|e| !e.exact).count()
    }

    /// Builds an index from explicit symmetric distances; self entries are
    /// added automatically. `pairs` holds `(i, j, distance, exact)` with
    /// `i != j`; distances above `tau_index` are dropped.
    pub fn from_pairs(
        n: usize,
        tau_index: u32,
        pairs: &[(usize, usize, u32, bool)],
    ) -> Result<Self, IndexError> {
        BuildConfig {
            tau_index,
            ..Default::default()
        }
        .validate()?;
        let mut entries: Vec<Vec<IndexEntry>> = (0..n)
            .map(|i| {
                vec![IndexEntry {
                    neighbor: i as u32,
                    distance: 0,
                    exact: true,
                }]
            })
            .collect();
        for &(i, j, d, exact) in pairs {
            if i >= n || j >= n {
                return Err(IndexError::UnknownGraph(i.max(j), n));
            }
            if d <= tau_index && i != j {
                entries[i].push(IndexEntry {
                    neighbor: j as u32,
                    distance: d as u8,
                    exact,
                });
                entries[j].push(IndexEntry {
                    neighbor: i as u32,
                    distance: d as u8,
                    exact,
                });
            }
        }
        Ok(Self::sorted(tau_index, entries))
    }

    fn sorted(tau_index: u32, mut entries: Vec<Vec<IndexEntry>>) -> Self {
        for row in &mut entries {
            row.sort_unstable_by_key(|e| (e.distance, e.neighbor, !e.exact));
        }
        GedIndex { tau_index, entries }
    }

    /// Graphs whose stored distance to `g` is at most `t`, ascending by id.
    pub fn neighbors(&self, g: usize, t: u32, exact_only: bool) -> Result<Vec<usize>, IndexError> {
        if t > self.tau_index {
            return Err(IndexError::OutOfRange {
                t,
                tau_index: self.tau_index,
            });
        }
        let row = self
            .entries
            .get(g)
            .ok_or(IndexError::UnknownGraph(g, self.entries.len()))?;
        let mut ids: Vec<usize> = row
            .iter()
            .take_while(|e| u32::from(e.distance) <= t)
            .filter(|e| e.exact || !exact_only)
            .map(|e| e.neighbor as usize)
            .collect();
        ids.sort_unstable();
        Ok(ids)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(13 + 4 * self.len() + 5 * self.num_entries() + 4);
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&(self.entries.len() as u32).to_le_bytes());
        buf.push(self.tau_index as u8);
        for row in &self.entries {
            buf.extend_from_slice(&(row.len() as u32).to_le_bytes());
            for e in row {
                buf.extend_from_slice(&e.neighbor.to_le_bytes());
                buf.push(e.distance | if e.exact { 0 } else { 0x80 });
            }
        }
        let crc = crc32fast::hash(&buf);
        buf.extend_from_slice(&crc.to_le_bytes());
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, IndexError> {
        if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
            return Err(IndexError::BadMagic);
        }
        if bytes.len() < MAGIC.len() + 5 + 4 {
            return Err(IndexError::Truncated);
        }
        let (body, tail) = bytes.split_at(bytes.len() - 4);
        let stored = u32::from_le_bytes(tail.try_into().expect("4 bytes"));
        let computed = crc32fast::hash(body);

        let mut r = Reader {
            buf: body,
            pos: MAGIC.len(),
        };
        let n = r.u32()? as usize;
        let tau_index = u32::from(r.u8()?);
        let mut entries = Vec::with_capacity(n.min(body.len() / 4));
        for _ in 0..n {
            let k = r.u32()? as usize;
            let mut row = Vec::with_capacity(k.min(body.len() / 5));
            for _ in 0..k {
                let neighbor = r.u32()?;
                let packed = r.u8()?;
                row.push(IndexEntry {
                    neighbor,
                    distance: packed & 0x7f,
                    exact: packed & 0x80 == 0,
                });
            }
            entries.push(row);
        }
        // A short body reads as truncation; only a structurally complete
        // file is judged by its checksum.
        if stored != computed {
            return Err(IndexError::Checksum { stored, computed });
        }
        if r.pos != body.len() {
            return Err(IndexError::Corrupt(format!(
                "{} trailing bytes",
                body.len() - r.pos
            )));
        }
        for row in &entries {
            for e in row {
                if e.neighbor as usize >= n || u32::from(e.distance) > tau_index {
                    return Err(IndexError::Corrupt(format!("entry {e:?} out of range")));
                }
            }
        }
        Ok(GedIndex { tau_index, entries })
    }

    pub fn save(&self, w: &mut impl Write) -> Result<(), IndexError> {
        w.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn load(r: &mut impl Read) -> Result<Self, IndexError> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], IndexError> {
        let s = self
            .buf
            .get(self.pos..self.pos + n)
            .ok_or(IndexError::Truncated)?;
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, IndexError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, IndexError> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }
}

/// Shared budget bookkeeping: each worker publishes its queue length into
/// its slot, and whoever pushes the total over the budget raises the abort
/// flag of the worker holding the largest queue.
struct Governor {
    budget: usize,
    queue_len: Vec<AtomicUsize>,
    abort: Vec<AtomicBool>,
    preemptions: AtomicUsize,
}

impl Governor {
    fn new(budget: usize, n_workers: usize) -> Self {
        Governor {
            budget,
            queue_len: (0..n_workers).map(|_| AtomicUsize::new(0)).collect(),
            abort: (0..n_workers).map(|_| AtomicBool::new(false)).collect(),
            preemptions: AtomicUsize::new(0),
        }
    }

    fn publish(&self, worker: usize, len: usize) {
        self.queue_len[worker].store(len, Ordering::Release);
        if self.budget == UNLIMITED_BUDGET {
            return;
        }
        let lens: Vec<usize> = self
            .queue_len
            .iter()
            .map(|q| q.load(Ordering::Acquire))
            .collect();
        if lens.iter().sum::<usize>() > self.budget {
            // Ties go to the lowest worker index.
            let victim = (0..lens.len())
                .max_by_key(|&w| (lens[w], std::cmp::Reverse(w)))
                .expect("workers");
            if !self.abort[victim].swap(true, Ordering::AcqRel) {
                self.preemptions.fetch_add(1, Ordering::Relaxed);
            }
        }
    }
}

struct WorkerMonitor<'a> {
    governor: &'a Governor,
    worker: usize,
}

impl SearchMonitor for WorkerMonitor<'_> {
    fn publish_queue_len(&self, len: usize) {
        self.governor.publish(self.worker, len);
    }

    fn abort_requested(&self) -> bool {
        self.governor.abort[self.worker].load(Ordering::Acquire)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BuildStats {
    pub pairs: u64,
    /// Pair searches cut short by the budget.
    pub preempted: u64,
    pub mappings_pushed: u64,
}

pub fn build_index(db: &GraphDatabase, cfg: &BuildConfig) -> Result<GedIndex, IndexError> {
    build_index_with_stats(db, cfg).map(|(idx, _)| idx)
}

/// Builds the index with `cfg.n_workers` threads. Rows are handed out in
/// ascending order; the worker owning row `i` computes every pair `(i, j)`
/// with `j > i` and appends each result to both rows.
pub fn build_index_with_stats(
    db: &GraphDatabase,
    cfg: &BuildConfig,
) -> Result<(GedIndex, BuildStats), IndexError> {
    cfg.validate()?;
    let n = db.len();
    let tau = cfg.tau_index;
    let rows: Vec<Mutex<Vec<IndexEntry>>> = (0..n)
        .map(|i| {
            Mutex::new(vec![IndexEntry {
                neighbor: i as u32,
                distance: 0,
                exact: true,
            }])
        })
        .collect();
    let next_id = AtomicUsize::new(0);
    let governor = Governor::new(cfg.node_budget, cfg.n_workers);
    let totals = Mutex::new(BuildStats::default());

    std::thread::scope(|s| {
        for worker in 0..cfg.n_workers.min(n.max(1)) {
            let (rows, next_id, governor, totals) = (&rows, &next_id, &governor, &totals);
            s.spawn(move || {
                let monitor = WorkerMonitor { governor, worker };
                let opts = GedOptions {
                    monitor: Some(&monitor),
                    ..Default::default()
                };
                let mut local = BuildStats::default();
                loop {
                    let i = next_id.fetch_add(1, Ordering::AcqRel);
                    if i >= n {
                        break;
                    }
                    for j in i + 1..n {
                        let out = nass_ged_with(&db.graphs[i], &db.graphs[j], tau, &opts);
                        governor.abort[worker].store(false, Ordering::Release);
                        local.pairs += 1;
                        local.mappings_pushed += out.stats.nodes_pushed;
                        local.preempted += u64::from(!out.exact);
                        if out.distance <= tau {
                            let d = out.distance as u8;
                            let e = |k: usize| IndexEntry {
                                neighbor: k as u32,
                                distance: d,
                                exact: out.exact,
                            };
                            rows[i].lock().expect("row lock").push(e(j));
                            rows[j].lock().expect("row lock").push(e(i));
                        }
                    }
                }
                let mut t = totals.lock().expect("stats lock");
                t.pairs += local.pairs;
                t.preempted += local.preempted;
                t.mappings_pushed += local.mappings_pushed;
            });
        }
    });

    let entries = rows
        .into_iter()
        .map(|m| m.into_inner().expect("row lock"))
        .collect();
    let stats = totals.into_inner().expect("stats lock");
    Ok((GedIndex::sorted(tau, entries), stats))
}
