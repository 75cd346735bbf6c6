//! Global plane-sweep tracker.
//!
//! Scans the `(nu, mu)` plane left to right while maintaining the vertical
//! order `chi` of all `2n + 1` lines (the `±1` coordinate lines and the
//! moving segment line) and a priority queue of pending intersections of
//! currently adjacent pairs. Crossings involving the segment line are the
//! path's breakpoints; all other crossings just swap the two lines. Stale
//! queue entries are invalidated lazily through per-slot sequence numbers.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::instance::{geom_tol, ProblemInstance, SignVector};
use crate::path::{Builder, Candidate, Direction, Objective, RelaxationPath, SegmentSums};

/// Identifier of the segment line in `chi`.
const LINE0: i64 = 0;

#[derive(Debug, Clone, Copy)]
struct Entry {
    nu: f64,
    slot: usize,
    seq: u64,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    // Reversed so the max-heap pops the smallest nu first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .nu
            .total_cmp(&self.nu)
            .then(other.slot.cmp(&self.slot))
            .then(other.seq.cmp(&self.seq))
    }
}

/// A processed crossing, reported by [`GlobalTracker::step`].
#[derive(Debug, Clone, Copy)]
pub struct SweepEvent {
    pub nu: f64,
    /// Adjacency index: slot `i` is the pair at heights `i - 1`, `i` of `chi`.
    pub slot: usize,
    /// Line identifiers that crossed (signed one-based; 0 is the segment line).
    pub lines: (i64, i64),
    /// Whether the crossing was a path breakpoint transition.
    pub transition: bool,
}

/// Sweep state plus operation counters.
pub struct GlobalTracker<'a> {
    inst: &'a ProblemInstance,
    builder: Builder<'a>,
    chi: Vec<i64>,
    /// Position of each line in `chi`, indexed by `id + n`.
    pos: Vec<usize>,
    queue: BinaryHeap<Entry>,
    seq: Vec<u64>,
    nu_scan: f64,
    done: bool,
    ops: u64,
}

impl<'a> GlobalTracker<'a> {
    pub fn new(inst: &'a ProblemInstance) -> Self {
        let n = inst.n();
        let builder = Builder::new(inst, Objective::Entropy);
        let mut chi: Vec<i64> = (-(n as i64)..=n as i64).collect();
        // Order by the mu value at nu = 0 (sign(j)/u_j, 0 for the segment
        // line). Lines concurrent at nu = 0 (e.g. all same-sign lines of a
        // uniform prior) are tie-broken by slope so they start in the order
        // they keep for nu > 0 and never need zero-width swap events.
        chi.sort_by(|&i, &j| {
            let vi = value_at_origin(inst, i);
            let vj = value_at_origin(inst, j);
            vi.total_cmp(&vj)
                .then(slope_at_origin(inst, i).total_cmp(&slope_at_origin(inst, j)))
                .then(i.cmp(&j))
        });
        let mut pos = vec![0usize; 2 * n + 1];
        for (p, &id) in chi.iter().enumerate() {
            pos[(id + n as i64) as usize] = p;
        }
        let mut tracker = Self {
            inst,
            builder,
            chi,
            pos,
            queue: BinaryHeap::new(),
            seq: vec![0; 2 * n + 1],
            nu_scan: 0.0,
            done: false,
            ops: 0,
        };
        for slot in 1..=2 * n {
            tracker.recompute_slot(slot, false);
        }
        tracker
    }

    /// Coefficients `(a, b, e)` of line `id` as `a·mu - b·nu = e`.
    fn triple(&self, id: i64) -> (f64, f64, f64) {
        if id == LINE0 {
            let s = self.builder.sums;
            (s.prior_mass, s.observed_mass, -s.signed_mass)
        } else {
            let coord = id.unsigned_abs() as usize - 1;
            let (a, b) = Objective::Entropy.line_coeffs(self.inst, coord);
            (a, b, id.signum() as f64)
        }
    }

    /// Crossing point of the pair (lower, upper), but only when the pair
    /// still has to swap: the lower line must rise strictly faster, which is
    /// exactly `den < 0`. Pairs already in their final order (including
    /// lines that merely touch at the scan position) return `None`, so a
    /// bundle of concurrent lines cannot generate swap cycles.
    fn intersect(&self, lower: i64, upper: i64) -> Option<f64> {
        let (a1, b1, e1) = self.triple(lower);
        let (a2, b2, e2) = self.triple(upper);
        let den = b2 * a1 - b1 * a2;
        // The parallel floor scales with the raw coefficient magnitudes, not
        // the (possibly cancelling) products: segment sums carry rounding
        // residue, and a residue-sized `den` must count as parallel.
        if den >= 0.0 || den.abs() <= 1e-12 * (a1.abs() + b1.abs()) * (a2.abs() + b2.abs()) {
            return None;
        }
        let nu = (e1 * a2 - e2 * a1) / den;
        nu.is_finite().then_some(nu)
    }

    /// Invalidates slot `slot` and queues its pair's next crossing if it lies
    /// ahead of the scan line. `strict` excludes the scan position itself
    /// (used for the pair that just crossed).
    fn recompute_slot(&mut self, slot: usize, strict: bool) {
        self.seq[slot] += 1;
        self.ops += 1;
        let tol = geom_tol(self.nu_scan);
        if let Some(nu) = self.intersect(self.chi[slot - 1], self.chi[slot]) {
            let ahead = if strict { nu > self.nu_scan + tol } else { nu >= self.nu_scan - tol };
            if ahead && nu >= -tol {
                self.queue.push(Entry {
                    nu: nu.max(self.nu_scan).max(0.0),
                    slot,
                    seq: self.seq[slot],
                });
                self.ops += 1;
            }
        }
    }

    fn swap_slot(&mut self, slot: usize) {
        let n = self.inst.n() as i64;
        self.chi.swap(slot - 1, slot);
        self.pos[(self.chi[slot - 1] + n) as usize] = slot - 1;
        self.pos[(self.chi[slot] + n) as usize] = slot;
    }

    /// Applies the partition change for coordinate line `id` crossing the
    /// segment line at `nu`.
    fn cross_line0(&mut self, id: i64, nu: f64) -> Result<()> {
        let coord = id.unsigned_abs() as usize - 1;
        let line_sign = id.signum() as i8;
        let sk = self.builder.s[coord];
        let direction = match (sk, line_sign) {
            (0, 1) => Direction::ToPlus,
            (0, -1) => Direction::ToMinus,
            (1, 1) => Direction::ToZeroFromPlus,
            (-1, -1) => Direction::ToZeroFromMinus,
            _ => return Err(Error::IllegalTransition { index: coord, from: sk }),
        };
        self.builder.record(Candidate { nu, coord, direction })
    }

    /// Absorbs neighbor lines that have become coincident with the segment
    /// line (several lines meeting the path in one point leave the later
    /// ones parallel after the first transition bends the path).
    fn coincidence_sweep(&mut self) -> Result<()> {
        let n = self.inst.n();
        loop {
            if self.builder.s.interior_empty() {
                return Ok(());
            }
            let p0 = self.pos[n]; // LINE0 + n
            let (a0, b0, e0) = self.triple(LINE0);
            let mu_scan = self.builder.sums.mu_at(self.nu_scan);
            let mut fired = false;
            for np in [p0.wrapping_sub(1), p0 + 1] {
                if np >= self.chi.len() || np == p0 {
                    continue;
                }
                let id = self.chi[np];
                if id == LINE0 {
                    continue;
                }
                let coord = id.unsigned_abs() as usize - 1;
                if self.builder.s[coord] != 0 {
                    continue;
                }
                let (a, b, e) = self.triple(id);
                let parallel = (b * a0 - b0 * a).abs()
                    <= 1e-11 * (a.abs() + b.abs()) * (a0.abs() + b0.abs());
                let on_line = (a * mu_scan - b * self.nu_scan - e).abs()
                    <= 1e-9 * ((a * mu_scan).abs() + (b * self.nu_scan).abs() + e0.abs() + 1.0);
                if parallel && on_line {
                    self.cross_line0(id, self.nu_scan)?;
                    let slot = p0.max(np);
                    self.swap_slot(slot);
                    if slot > 1 {
                        self.recompute_slot(slot - 1, false);
                    }
                    self.recompute_slot(slot, true);
                    if slot < self.chi.len() - 1 {
                        self.recompute_slot(slot + 1, false);
                    }
                    fired = true;
                    break;
                }
            }
            if !fired {
                return Ok(());
            }
        }
    }

    /// Processes the next valid crossing. Returns `None` when the sweep is
    /// finished (queue drained or interior emptied).
    pub fn step(&mut self) -> Result<Option<SweepEvent>> {
        if self.done {
            return Ok(None);
        }
        loop {
            let Some(entry) = self.queue.pop() else {
                self.done = true;
                return Ok(None);
            };
            self.ops += 1;
            if entry.seq != self.seq[entry.slot] {
                continue; // lazily deleted
            }
            self.nu_scan = entry.nu;
            let (left, right) = (self.chi[entry.slot - 1], self.chi[entry.slot]);
            let transition = left == LINE0 || right == LINE0;
            if transition {
                let other = if left == LINE0 { right } else { left };
                self.cross_line0(other, entry.nu)?;
            }
            self.swap_slot(entry.slot);
            if entry.slot > 1 {
                self.recompute_slot(entry.slot - 1, false);
            }
            self.recompute_slot(entry.slot, true);
            if entry.slot < self.chi.len() - 1 {
                self.recompute_slot(entry.slot + 1, false);
            }
            self.coincidence_sweep()?;
            if self.builder.s.interior_empty() {
                self.done = true;
            }
            return Ok(Some(SweepEvent { nu: entry.nu, slot: entry.slot, lines: (left, right), transition }));
        }
    }

    /// Runs the sweep to completion.
    pub fn run(&mut self) -> Result<()> {
        while self.step()?.is_some() {}
        Ok(())
    }

    pub fn into_path(self) -> Result<RelaxationPath> {
        self.builder.finish()
    }

    pub fn nu_scan(&self) -> f64 {
        self.nu_scan
    }

    /// Current segment sums.
    pub fn sums(&self) -> SegmentSums {
        self.builder.sums
    }

    pub fn signs(&self) -> &SignVector {
        &self.builder.s
    }

    /// Vertical order of line identifiers at the scan position.
    pub fn chi(&self) -> &[i64] {
        &self.chi
    }

    /// Total queue pushes, pops and slot recomputations so far.
    pub fn op_count(&self) -> u64 {
        self.ops
    }

    /// Live queue contents as `(nu, slot)`, sorted.
    pub fn queue_entries(&self) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = self
            .queue
            .iter()
            .filter(|e| e.seq == self.seq[e.slot])
            .map(|e| (e.nu, e.slot))
            .collect();
        out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        out
    }

    /// Brute-force consistency check of the sweep state: `chi` must be a
    /// permutation ordered by height, and every live queue entry must match
    /// the recomputed crossing of its slot's current pair. Returns human-
    /// readable discrepancies; empty means consistent.
    pub fn queue_audit(&self) -> Vec<String> {
        let n = self.inst.n() as i64;
        let mut problems = Vec::new();
        let mut seen = vec![false; self.chi.len()];
        for &id in &self.chi {
            let idx = (id + n) as usize;
            if seen[idx] {
                problems.push(format!("line {} appears twice in chi", id));
            }
            seen[idx] = true;
        }
        // Once the interior is empty the segment line is degenerate and no
        // longer has a height; skip the checks that involve it.
        let line0_dead = self.builder.s.interior_empty();
        let tol = geom_tol(self.nu_scan).max(1e-10);
        let probe = self.nu_scan + tol.max(1e-9 * self.nu_scan.abs().max(1.0));
        for w in self.chi.windows(2) {
            if line0_dead && (w[0] == LINE0 || w[1] == LINE0) {
                continue;
            }
            let (a1, b1, e1) = self.triple(w[0]);
            let (a2, b2, e2) = self.triple(w[1]);
            let v1 = (e1 + b1 * probe) / a1;
            let v2 = (e2 + b2 * probe) / a2;
            if v1 > v2 + 1e-7 * v2.abs().max(1.0) {
                problems.push(format!("lines {} and {} are out of order in chi", w[0], w[1]));
            }
        }
        let mut live = vec![None::<f64>; self.chi.len()];
        for e in self.queue.iter().filter(|e| e.seq == self.seq[e.slot]) {
            if live[e.slot].is_some() {
                problems.push(format!("slot {} has two live queue entries", e.slot));
            }
            live[e.slot] = Some(e.nu);
        }
        for slot in 1..self.chi.len() {
            if line0_dead && (self.chi[slot - 1] == LINE0 || self.chi[slot] == LINE0) {
                continue;
            }
            let expected = self
                .intersect(self.chi[slot - 1], self.chi[slot])
                .filter(|&nu| nu >= self.nu_scan - tol);
            match (expected, live[slot]) {
                (Some(want), Some(got)) if (want - got).abs() > 1e-10 * want.abs().max(1.0) => {
                    problems.push(format!("slot {}: queued {} but lines cross at {}", slot, got, want));
                }
                (Some(want), None) if want > self.nu_scan + tol => {
                    problems.push(format!("slot {}: future crossing at {} missing", slot, want));
                }
                _ => {}
            }
        }
        problems
    }
}

/// Sweeps the whole plane and returns the breakpoint path; identical to the
/// local tracker's output.
pub fn track_global(inst: &ProblemInstance) -> Result<RelaxationPath> {
    let mut tracker = GlobalTracker::new(inst);
    tracker.run()?;
    tracker.into_path()
}

fn value_at_origin(inst: &ProblemInstance, id: i64) -> f64 {
    if id == LINE0 {
        0.0
    } else {
        id.signum() as f64 / inst.u()[id.unsigned_abs() as usize - 1]
    }
}

fn slope_at_origin(inst: &ProblemInstance, id: i64) -> f64 {
    if id == LINE0 {
        // Initial segment line: mu·Σm_ju_j = nu·Σm_jq_j, both sums are 1.
        1.0
    } else {
        let j = id.unsigned_abs() as usize - 1;
        inst.q()[j] / inst.u()[j]
    }
}
