//! Closure-complete fragments of a measurement theory.
//!
//! A [`Fragment`] carries, for every outcome-set size `0..=bound`, a finite
//! set of measurements closed under all post-processings between sets within
//! the bound, and the pushforward table of those post-processings.
//!
//! Measurements are addressed by dense ids sorted by `(arity, payload)`. The
//! table stores, for each measurement `α` over `m`, one row holding `f_*α` for
//! every `f : m → n` with `n ≤ bound`, grouped by `n` and ordered by function
//! index within each group.
//!
//! Full fragments of enumerable families whose table would exceed the entry
//! cap are kept unmaterialized: their carriers are exact but pushforwards are
//! evaluated on demand through the family.

use std::collections::{HashMap, VecDeque};
use std::ops::Range;

use crate::error::{Error, Result};
use crate::family::{FamilyRef, Payload};
use crate::finset::{function_count, function_index, FinFun, Tables};

/// A measurement given by its outcome-set size and canonical payload.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Measurement {
    pub arity: usize,
    pub payload: Payload,
}

impl Measurement {
    pub fn new(arity: usize, payload: Payload) -> Self {
        Measurement { arity, payload }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// Every measurement of the family within the bound.
    Full,
    /// The post-processing closure of explicit generators.
    Generated,
}

#[derive(Clone, Copy, Debug)]
pub struct FragmentOptions {
    /// Largest number of table entries materialized for a full fragment.
    pub table_cap: u128,
    /// Largest number of measurements a closure may produce.
    pub carrier_cap: usize,
}

impl Default for FragmentOptions {
    fn default() -> Self {
        FragmentOptions {
            table_cap: 1 << 23,
            carrier_cap: 1 << 16,
        }
    }
}

/// Largest bound accepted; `12^12` functions already dwarf any table cap.
pub const MAX_BOUND: usize = 12;

pub const DEFAULT_BOUND: usize = 4;

#[derive(Clone, Debug)]
pub struct Fragment {
    family: FamilyRef,
    bound: usize,
    payloads: Vec<Payload>,
    ranges: Vec<Range<usize>>,
    lookup: Vec<HashMap<Payload, usize>>,
    generators: Vec<usize>,
    provenance: Provenance,
    /// `offsets[m][n]`: start of the block of maps `m → n` within a row.
    offsets: Vec<Vec<usize>>,
    rows: Option<Vec<Vec<u32>>>,
}

fn block_offsets(bound: usize) -> Vec<Vec<usize>> {
    (0..=bound)
        .map(|m| {
            let mut acc = 0usize;
            (0..=bound + 1)
                .map(|n| {
                    let start = acc;
                    if n <= bound {
                        acc += function_count(m, n).unwrap_or(0) as usize;
                    }
                    start
                })
                .collect()
        })
        .collect()
}

impl Fragment {
    /// The smallest closure-complete fragment containing `generators` and `τ`.
    pub fn close(family: FamilyRef, generators: &[Measurement], bound: usize) -> Result<Self> {
        Self::close_with(family, generators, bound, FragmentOptions::default())
    }

    pub fn close_with(
        family: FamilyRef,
        generators: &[Measurement],
        bound: usize,
        options: FragmentOptions,
    ) -> Result<Self> {
        check_bound(&family, bound)?;
        for g in generators {
            if g.arity > bound {
                return Err(Error::ExceedsBound { size: g.arity, bound });
            }
            family.check(g.arity, &g.payload)?;
        }
        let mut seeds = vec![Measurement::new(1, family.unit())];
        seeds.extend(generators.iter().cloned());
        let mut frag = Self::build(family, seeds, bound, Provenance::Generated, options, true)?;
        frag.generators = generators
            .iter()
            .map(|g| frag.find(g.arity, &g.payload).expect("generators are carried"))
            .collect();
        Ok(frag)
    }

    /// Every measurement of an enumerable family within the bound.
    pub fn full(family: FamilyRef, bound: usize) -> Result<Self> {
        Self::full_with(family, bound, FragmentOptions::default())
    }

    pub fn full_with(family: FamilyRef, bound: usize, options: FragmentOptions) -> Result<Self> {
        check_bound(&family, bound)?;
        let mut seeds = Vec::new();
        let mut entries: u128 = 0;
        for m in 0..=bound {
            let all = family
                .enumerate(m)
                .ok_or_else(|| Error::NotEnumerable(family.name()))?;
            if seeds.len() + all.len() > options.carrier_cap {
                return Err(Error::TooLarge {
                    what: "carrier",
                    needed: (seeds.len() + all.len()) as u128,
                    cap: options.carrier_cap as u128,
                });
            }
            let per_row: u128 = (0..=bound)
                .map(|n| function_count(m, n).unwrap_or(u128::MAX))
                .fold(0u128, u128::saturating_add);
            entries = entries.saturating_add(per_row.saturating_mul(all.len() as u128));
            seeds.extend(all.into_iter().map(|p| Measurement::new(m, p)));
        }
        let materialize = entries <= options.table_cap;
        Self::build(family, seeds, bound, Provenance::Full, options, materialize)
    }

    fn build(
        family: FamilyRef,
        seeds: Vec<Measurement>,
        bound: usize,
        provenance: Provenance,
        options: FragmentOptions,
        materialize: bool,
    ) -> Result<Self> {
        let offsets = block_offsets(bound);
        let mut found: Vec<Measurement> = Vec::new();
        let mut index: HashMap<Measurement, usize> = HashMap::new();
        let mut queue = VecDeque::new();
        for s in seeds {
            if !index.contains_key(&s) {
                index.insert(s.clone(), found.len());
                queue.push_back(found.len());
                found.push(s);
            }
        }

        let mut rows: Vec<Vec<u32>> = Vec::new();
        if materialize {
            let mut entries: u128 = 0;
            while let Some(id) = queue.pop_front() {
                let m = found[id].arity;
                let row_len = offsets[m][bound + 1];
                entries += row_len as u128;
                if entries > options.table_cap {
                    return Err(Error::TooLarge {
                        what: "pushforward table",
                        needed: entries,
                        cap: options.table_cap,
                    });
                }
                let mut row = Vec::with_capacity(row_len);
                for n in 0..=bound {
                    for table in Tables::new(m, n) {
                        let image = family.pushforward(&table, n, &found[id].payload)?;
                        let key = Measurement::new(n, image);
                        let target = match index.get(&key) {
                            Some(&t) => t,
                            None => {
                                let t = found.len();
                                if t >= options.carrier_cap {
                                    return Err(Error::TooLarge {
                                        what: "carrier",
                                        needed: t as u128 + 1,
                                        cap: options.carrier_cap as u128,
                                    });
                                }
                                index.insert(key.clone(), t);
                                found.push(key);
                                queue.push_back(t);
                                t
                            }
                        };
                        row.push(target as u32);
                    }
                }
                if rows.len() <= id {
                    rows.resize(id + 1, Vec::new());
                }
                rows[id] = row;
            }
        }

        // Renumber canonically by (arity, payload).
        let mut order: Vec<usize> = (0..found.len()).collect();
        order.sort_by(|&a, &b| found[a].cmp(&found[b]));
        let mut new_id = vec![0u32; found.len()];
        for (new, &old) in order.iter().enumerate() {
            new_id[old] = new as u32;
        }
        let mut ranges = vec![0..0; bound + 1];
        let mut lookup = vec![HashMap::new(); bound + 1];
        let mut payloads = Vec::with_capacity(found.len());
        for (new, &old) in order.iter().enumerate() {
            let m = found[old].arity;
            if ranges[m].is_empty() {
                ranges[m] = new..new + 1;
            } else {
                ranges[m].end = new + 1;
            }
            lookup[m].insert(found[old].payload.clone(), new);
            payloads.push(found[old].payload.clone());
        }
        fix_empty_ranges(&mut ranges);
        let rows = materialize.then(|| {
            order
                .iter()
                .map(|&old| rows[old].iter().map(|&t| new_id[t as usize]).collect())
                .collect()
        });

        Ok(Fragment {
            family,
            bound,
            payloads,
            ranges,
            lookup,
            generators: Vec::new(),
            provenance,
            offsets,
            rows,
        })
    }

    pub fn family(&self) -> &FamilyRef {
        &self.family
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.payloads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.payloads.is_empty()
    }

    pub fn is_materialized(&self) -> bool {
        self.rows.is_some()
    }

    /// Ids of the measurements over a set of size `n`.
    pub fn carrier(&self, n: usize) -> Range<usize> {
        self.ranges.get(n).cloned().unwrap_or(0..0)
    }

    pub fn ids(&self) -> Range<usize> {
        0..self.payloads.len()
    }

    pub fn payload(&self, id: usize) -> &Payload {
        &self.payloads[id]
    }

    pub fn measurement(&self, id: usize) -> Measurement {
        Measurement::new(self.arity(id), self.payloads[id].clone())
    }

    pub fn arity(&self, id: usize) -> usize {
        self.ranges
            .iter()
            .position(|r| r.contains(&id))
            .expect("id within the fragment")
    }

    pub fn find(&self, arity: usize, payload: &Payload) -> Option<usize> {
        self.lookup.get(arity)?.get(payload).copied()
    }

    pub fn id_of(&self, m: &Measurement) -> Result<usize> {
        self.find(m.arity, &m.payload).ok_or_else(|| {
            Error::NotCarried(format!(
                "{} over {} outcomes",
                self.family.describe(&m.payload),
                m.arity
            ))
        })
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn tau(&self) -> usize {
        self.carrier(1).start
    }

    pub fn describe(&self, id: usize) -> String {
        self.family.describe(&self.payloads[id])
    }

    /// Number of entries in a row for a measurement over `m`.
    pub fn row_len(&self, m: usize) -> usize {
        self.offsets[m][self.bound + 1]
    }

    /// Position of `f : m → n` (by function index) within a row.
    pub fn slot(&self, m: usize, n: usize, f_index: usize) -> usize {
        self.offsets[m][n] + f_index
    }

    /// Inverse of [`Fragment::slot`]: `(n, table)` of the map at a row position.
    pub fn slot_map(&self, m: usize, slot: usize) -> (usize, Vec<usize>) {
        let n = (0..=self.bound)
            .rev()
            .find(|&n| self.offsets[m][n] <= slot && slot < self.offsets[m][n + 1])
            .expect("slot within the row");
        (n, crate::finset::function_table(slot - self.offsets[m][n], m, n))
    }

    /// `f_*α` for the map with the given table into a set of size `cod`.
    /// Arguments are trusted; use [`Fragment::pushforward`] for checked access.
    pub fn push(&self, table: &[usize], cod: usize, id: usize) -> usize {
        match &self.rows {
            Some(rows) => {
                let m = table.len();
                rows[id][self.offsets[m][cod] + function_index(table, cod)] as usize
            }
            None => {
                let image = self
                    .family
                    .pushforward(table, cod, &self.payloads[id])
                    .expect("carried payloads push forward");
                self.find(cod, &image)
                    .expect("full fragments contain every image")
            }
        }
    }

    /// The table entry at a row position; only for materialized fragments.
    pub fn entry(&self, id: usize, slot: usize) -> Option<usize> {
        self.rows.as_ref().map(|r| r[id][slot] as usize)
    }

    pub fn row(&self, id: usize) -> Option<&[u32]> {
        self.rows.as_ref().map(|r| r[id].as_slice())
    }

    pub fn pushforward(&self, f: &FinFun, id: usize) -> Result<usize> {
        if id >= self.len() {
            return Err(Error::NotCarried(format!("measurement id {id}")));
        }
        let m = self.arity(id);
        if f.dom().size() != m {
            return Err(Error::Mismatch(format!(
                "{f} cannot post-process a measurement with {m} outcomes"
            )));
        }
        let n = f.cod().size();
        if n > self.bound {
            return Err(Error::ExceedsBound { size: n, bound: self.bound });
        }
        Ok(self.push(f.table(), n, id))
    }

    /// Replaces one table entry, for fault-injection tests of the validator.
    pub fn override_entry(&mut self, id: usize, slot: usize, value: usize) -> Result<()> {
        let m = self.arity(id);
        let (n, _) = self.slot_map(m, slot);
        if !self.carrier(n).contains(&value) {
            return Err(Error::Mismatch(format!(
                "measurement {value} is not carried over {n} outcomes"
            )));
        }
        let rows = self.rows.as_mut().ok_or(Error::NotMaterialized)?;
        rows[id][slot] = value as u32;
        Ok(())
    }

    /// `δ_X(x) = x_*τ`.
    pub fn delta(&self, size: usize, x: usize) -> Result<usize> {
        if x >= size {
            return Err(Error::ElementOutOfRange { element: x, size });
        }
        if size > self.bound {
            return Err(Error::ExceedsBound { size, bound: self.bound });
        }
        Ok(self.push(&[x], size, self.tau()))
    }

    /// `ι_*α` for `ι(y) = (x, y)` into `X × Y`, row-major.
    pub fn strength(&self, x_size: usize, x: usize, id: usize) -> Result<usize> {
        if x >= x_size {
            return Err(Error::ElementOutOfRange { element: x, size: x_size });
        }
        let y = self.arity(id);
        let size = x_size * y;
        if size > self.bound {
            return Err(Error::ExceedsBound { size, bound: self.bound });
        }
        let iota: Vec<usize> = (0..y).map(|v| x * y + v).collect();
        Ok(self.push(&iota, size, id))
    }

    /// `(π_X,*α, π_Y,*α)` for `α` over `X × Y`.
    pub fn marginalize(&self, id: usize, x_size: usize, y_size: usize) -> Result<(usize, usize)> {
        if id >= self.len() {
            return Err(Error::NotCarried(format!("measurement id {id}")));
        }
        if self.arity(id) != x_size * y_size {
            return Err(Error::Mismatch(format!(
                "measurement has {} outcomes, not {x_size}×{y_size}",
                self.arity(id)
            )));
        }
        let (_, projections) = crate::finset::product_many(&[x_size, y_size]);
        Ok((
            self.push(projections[0].table(), x_size, id),
            self.push(projections[1].table(), y_size, id),
        ))
    }

    /// Every measurement, as a generator list that closes back to this fragment.
    pub fn carried(&self) -> Vec<Measurement> {
        self.ids().map(|id| self.measurement(id)).collect()
    }

    /// Same carriers and same table.
    pub fn same_contents(&self, other: &Fragment) -> bool {
        self.bound == other.bound
            && self.payloads == other.payloads
            && self.ranges == other.ranges
            && self.rows == other.rows
    }
}

fn check_bound(family: &FamilyRef, bound: usize) -> Result<()> {
    if bound == 0 {
        return Err(Error::InvalidBound(
            "the bound must be at least 1 so that the trivial measurement is carried".into(),
        ));
    }
    if bound > MAX_BOUND {
        return Err(Error::InvalidBound(format!(
            "bound {bound} is above the supported maximum {MAX_BOUND}"
        )));
    }
    if let Some(max) = family.max_arity() {
        if bound > max {
            return Err(Error::InvalidBound(format!(
                "family {} is only defined up to {max} outcomes",
                family.name()
            )));
        }
    }
    Ok(())
}

/// Empty carriers get an empty range positioned where they would sit.
fn fix_empty_ranges(ranges: &mut [Range<usize>]) {
    let mut next = 0;
    for r in ranges.iter_mut() {
        if r.start >= r.end {
            *r = next..next;
        } else {
            next = r.end;
        }
    }
}
