//! Piecewise-linear path representation and the breakpoint trackers.
//!
//! The optimal `mu(nu)` is piecewise linear: between transitions of the
//! partition it follows the segment line `mu·U - nu·Q + M = 0`, and a
//! breakpoint occurs whenever some coordinate line `a_j·mu - b_j·nu = ±1`
//! intersects the current segment. For the entropy objective
//! `(a_j, b_j) = (u_j, q_j)`; for the squared objective `(1, q_j - u_j)`.
//! One tracker kernel serves both.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{geom_tol, ProblemInstance, SignVector};

/// Which loss the path was tracked for. Selects the per-coordinate line
/// coefficients and the meaning of the segment sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Entropy,
    Squared,
}

impl Objective {
    /// Coefficients `(a_j, b_j)` of the coordinate lines `a_j·mu - b_j·nu = ±1`.
    pub fn line_coeffs(self, inst: &ProblemInstance, j: usize) -> (f64, f64) {
        match self {
            Objective::Entropy => (inst.u()[j], inst.q()[j]),
            Objective::Squared => (1.0, inst.q()[j] - inst.u()[j]),
        }
    }
}

/// Sums defining the current segment line `mu·U - nu·Q + M = 0`.
///
/// `signed_mass` (M) is the multiplicity mass of `I_+` minus that of `I_-`;
/// `prior_mass` (U) and `observed_mass` (Q) are the interior sums
/// `Σ_{I_0} m_j a_j` and `Σ_{I_0} m_j b_j` for the objective's coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentSums {
    pub signed_mass: f64,
    pub prior_mass: f64,
    pub observed_mass: f64,
}

impl SegmentSums {
    /// Sums of the all-interior starting partition.
    pub fn initial(inst: &ProblemInstance, objective: Objective) -> Self {
        match objective {
            // m·u = m·q = 1 by instance validation.
            Objective::Entropy => Self { signed_mass: 0.0, prior_mass: 1.0, observed_mass: 1.0 },
            // Σ m_j (q_j - u_j) = 0 exactly in real arithmetic.
            Objective::Squared => Self {
                signed_mass: 0.0,
                prior_mass: inst.m().iter().sum(),
                observed_mass: 0.0,
            },
        }
    }

    /// Recomputes the sums directly from a partition.
    pub fn direct(inst: &ProblemInstance, objective: Objective, s: &SignVector) -> Self {
        let mut out = Self { signed_mass: 0.0, prior_mass: 0.0, observed_mass: 0.0 };
        for j in 0..inst.n() {
            let mj = inst.m()[j];
            match s[j] {
                0 => {
                    let (a, b) = objective.line_coeffs(inst, j);
                    out.prior_mass += mj * a;
                    out.observed_mass += mj * b;
                }
                sign => out.signed_mass += sign as f64 * mj,
            }
        }
        out
    }

    /// Evaluates the segment line: `mu = (nu·Q - M)/U`.
    pub fn mu_at(&self, nu: f64) -> f64 {
        (nu * self.observed_mass - self.signed_mass) / self.prior_mass
    }
}

/// How a coordinate's partition state changes at a breakpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    ToPlus,
    ToMinus,
    ToZeroFromPlus,
    ToZeroFromMinus,
}

impl Direction {
    /// Sign of the coordinate line being crossed (`+1` for `a·mu - b·nu = 1`).
    pub fn line_sign(self) -> i8 {
        match self {
            Direction::ToPlus | Direction::ToZeroFromPlus => 1,
            Direction::ToMinus | Direction::ToZeroFromMinus => -1,
        }
    }

    /// Partition state the coordinate must be in before the transition.
    pub fn source(self) -> i8 {
        match self {
            Direction::ToPlus | Direction::ToMinus => 0,
            Direction::ToZeroFromPlus => 1,
            Direction::ToZeroFromMinus => -1,
        }
    }

    /// Partition state after the transition.
    pub fn target(self) -> i8 {
        match self {
            Direction::ToPlus => 1,
            Direction::ToMinus => -1,
            Direction::ToZeroFromPlus | Direction::ToZeroFromMinus => 0,
        }
    }
}

/// One coordinate's state change, part of a breakpoint record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transition {
    pub coord: usize,
    pub direction: Direction,
}

/// A point where the path's slope changes. Several coordinates may
/// transition simultaneously at the same `nu`.
#[derive(Debug, Clone, PartialEq)]
pub struct Breakpoint {
    pub nu: f64,
    pub mu: f64,
    pub transitions: Vec<Transition>,
}

/// The complete path: breakpoints in increasing `nu`, the segment sums
/// before/after each of them, and the terminal data.
#[derive(Debug, Clone)]
pub struct RelaxationPath {
    objective: Objective,
    breakpoints: Vec<Breakpoint>,
    /// `segments[i]` are the sums on the i-th segment; length `kappa + 1`.
    segments: Vec<SegmentSums>,
    final_signs: SignVector,
    nu_inf: f64,
    mu_inf: f64,
}

impl RelaxationPath {
    /// Rebuilds the full path (segment sums, terminal data) by replaying a
    /// breakpoint list. All trackers and the file reader funnel through this
    /// so that a path and its serialized round trip carry identical doubles.
    pub fn from_breakpoints(
        inst: &ProblemInstance,
        objective: Objective,
        mut breakpoints: Vec<Breakpoint>,
    ) -> Result<Self> {
        let n = inst.n();
        for bp in &mut breakpoints {
            bp.transitions.sort_by_key(|t| t.coord);
        }
        let mut s = SignVector::zeros(n);
        let mut sums = SegmentSums::initial(inst, objective);
        let mut segments = vec![sums];
        let mut applied = 0usize;
        let mut prev_nu = 0.0f64;
        for bp in &breakpoints {
            if bp.transitions.is_empty() {
                return Err(Error::InvalidPath("breakpoint without transitions"));
            }
            if !(bp.nu > prev_nu) || !bp.nu.is_finite() {
                return Err(Error::InvalidPath("breakpoints must strictly increase in nu"));
            }
            for t in &bp.transitions {
                if t.coord >= n {
                    return Err(Error::InvalidPath("transition coordinate out of range"));
                }
                let (a, b) = objective.line_coeffs(inst, t.coord);
                let e = t.direction.line_sign() as f64;
                let resid = a * bp.mu - b * bp.nu - e;
                let scale = (a * bp.mu).abs().max((b * bp.nu).abs()).max(1.0);
                if resid.abs() > 1e-6 * scale {
                    return Err(Error::InvalidPath("transition point is off its line"));
                }
                if objective == Objective::Entropy
                    && t.direction == Direction::ToMinus
                    && inst.q()[t.coord] == 0.0
                {
                    return Err(Error::InvalidPath(
                        "zero-observed coordinate cannot go below its bound",
                    ));
                }
                apply_in_place(&mut sums, &mut s, inst, objective, t.coord, t.direction)?;
                applied += 1;
                if applied % (10 * n) == 0 {
                    sums = SegmentSums::direct(inst, objective, &s);
                }
            }
            segments.push(sums);
            prev_nu = bp.nu;
        }
        let (nu_inf, mu_inf) = if s.interior_empty() {
            // Zero the interior sums exactly so terminal queries can detect
            // the frozen regime.
            let last = segments.last_mut().expect("at least the initial segment");
            *last = SegmentSums::direct(inst, objective, &s);
            last.prior_mass = 0.0;
            last.observed_mass = 0.0;
            let bp = breakpoints.last().expect("nonempty if interior emptied");
            (bp.nu, bp.mu)
        } else {
            (f64::INFINITY, f64::INFINITY)
        };
        Ok(Self { objective, breakpoints, segments, final_signs: s, nu_inf, mu_inf })
    }

    pub fn objective(&self) -> Objective {
        self.objective
    }

    pub fn breakpoints(&self) -> &[Breakpoint] {
        &self.breakpoints
    }

    pub fn segments(&self) -> &[SegmentSums] {
        &self.segments
    }

    pub fn final_signs(&self) -> &SignVector {
        &self.final_signs
    }

    /// Number of breakpoints (path complexity).
    pub fn kappa(&self) -> usize {
        self.breakpoints.len()
    }

    pub fn nu_inf(&self) -> f64 {
        self.nu_inf
    }

    pub fn mu_inf(&self) -> f64 {
        self.mu_inf
    }

    /// Index of the segment containing `nu` (breakpoints belong to the
    /// segment to their right).
    pub fn segment_index(&self, nu: f64) -> usize {
        self.breakpoints.partition_point(|bp| bp.nu <= nu)
    }

    /// Partition at the start of segment `idx`.
    pub fn signs_at_segment(&self, idx: usize) -> SignVector {
        let mut s = SignVector::zeros(self.final_signs.len());
        for bp in &self.breakpoints[..idx] {
            for t in &bp.transitions {
                s.0[t.coord] = t.direction.target();
            }
        }
        s
    }

    /// Evaluates the path at `nu`: the dual value `mu`, the partition, and
    /// the enclosing segment's sums. Beyond `nu_inf` the partition is frozen
    /// and `mu` continues along the last proper segment line.
    pub fn eval(&self, nu: f64) -> (f64, SignVector, SegmentSums) {
        let idx = self.segment_index(nu);
        let s = self.signs_at_segment(idx);
        let sums = self.segments[idx];
        let mu = if sums.prior_mass > 0.0 {
            sums.mu_at(nu)
        } else {
            let line = self.segments[..idx]
                .iter()
                .rev()
                .find(|seg| seg.prior_mass > 0.0)
                .copied()
                .unwrap_or(sums);
            line.mu_at(nu)
        };
        (mu, s, sums)
    }
}

/// Applies one transition, updating the sums incrementally and the sign
/// vector in place. Errors if the coordinate is not in the required source
/// state.
fn apply_in_place(
    sums: &mut SegmentSums,
    s: &mut SignVector,
    inst: &ProblemInstance,
    objective: Objective,
    coord: usize,
    direction: Direction,
) -> Result<()> {
    if s[coord] != direction.source() {
        return Err(Error::IllegalTransition { index: coord, from: s[coord] });
    }
    let (a, b) = objective.line_coeffs(inst, coord);
    let mj = inst.m()[coord];
    match direction.target() {
        0 => {
            sums.signed_mass -= direction.source() as f64 * mj;
            sums.prior_mass += mj * a;
            sums.observed_mass += mj * b;
        }
        t => {
            sums.signed_mass += t as f64 * mj;
            sums.prior_mass -= mj * a;
            sums.observed_mass -= mj * b;
        }
    }
    s.0[coord] = direction.target();
    Ok(())
}

/// Functional form of [`apply_in_place`] returning the updated copies.
pub fn apply_transition(
    sums: &SegmentSums,
    s: &SignVector,
    inst: &ProblemInstance,
    coord: usize,
    direction: Direction,
) -> Result<(SegmentSums, SignVector)> {
    let mut sums = *sums;
    let mut s = s.clone();
    apply_in_place(&mut sums, &mut s, inst, Objective::Entropy, coord, direction)?;
    Ok((sums, s))
}

/// A pending transition candidate found by a scan.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Candidate {
    pub(crate) nu: f64,
    pub(crate) coord: usize,
    pub(crate) direction: Direction,
}

/// Intersection of one coordinate line (`line_sign` = ±1) with the current
/// segment line, if crossing it at or after `nu_cur` is a legal partition
/// move. Lines coincident with the segment line fire immediately at
/// `nu_cur`. `guarded` suppresses re-firing a coordinate that already
/// transitioned at the current breakpoint.
#[allow(clippy::too_many_arguments)]
fn candidate_for_line(
    sums: &SegmentSums,
    s: &SignVector,
    inst: &ProblemInstance,
    objective: Objective,
    nu_cur: f64,
    coord: usize,
    line_sign: i8,
    guarded: bool,
) -> Option<(f64, Direction)> {
    let (a, b) = objective.line_coeffs(inst, coord);
    let sk = s[coord];
    let den = sums.observed_mass * a - sums.prior_mass * b;
    let num = sums.signed_mass * a + line_sign as f64 * sums.prior_mass;
    // The sums carry cancellation noise, so zero tests must be scaled by the
    // magnitudes feeding them, not by the (possibly vanishing) products.
    let sums_abs = sums.observed_mass.abs() + sums.prior_mass.abs();
    let tol = geom_tol(nu_cur);
    if den.abs() <= 1e-12 * (a.abs() + b.abs()) * sums_abs {
        // Parallel to the segment line; a candidate only when coincident,
        // which caps an interior coordinate right where the path stands.
        let num_scale = (sums.signed_mass * a).abs() + sums.prior_mass.abs();
        if sk == 0 && num.abs() <= 1e-11 * num_scale && !guarded {
            let direction = if line_sign > 0 { Direction::ToPlus } else { Direction::ToMinus };
            return Some((nu_cur, direction));
        }
        return None;
    }
    let d: i8 = if den > 0.0 { 1 } else { -1 };
    // A ±1 line separates states {0, ±1}; the move must match the side the
    // path approaches from.
    let legal = (sk == 0 && d == line_sign) || (sk == line_sign && d == -line_sign);
    if !legal {
        return None;
    }
    let nu_j = num / den;
    if !nu_j.is_finite() || nu_j < nu_cur - tol {
        return None;
    }
    let nu_j = nu_j.max(nu_cur);
    if guarded && nu_j <= nu_cur + tol {
        return None;
    }
    let direction = match (sk, d) {
        (0, 1) => Direction::ToPlus,
        (0, -1) => Direction::ToMinus,
        (1, -1) => Direction::ToZeroFromPlus,
        _ => Direction::ToZeroFromMinus,
    };
    Some((nu_j, direction))
}

/// Earliest legal intersection of any coordinate line with the current
/// segment (entropy objective). Returns `(nu, j, direction)` with `j` the
/// signed one-based line identifier. Ties resolve to the smallest
/// coordinate, negative line first.
pub fn next_intersection(
    sums: &SegmentSums,
    s: &SignVector,
    inst: &ProblemInstance,
    nu_current: f64,
) -> Result<Option<(f64, i64, Direction)>> {
    if sums.prior_mass <= 0.0 {
        return Err(Error::EmptyInterior);
    }
    let mut best: Option<(f64, i64, Direction)> = None;
    for coord in 0..inst.n() {
        for line_sign in [-1i8, 1] {
            if let Some((nu_j, direction)) = candidate_for_line(
                sums,
                s,
                inst,
                Objective::Entropy,
                nu_current,
                coord,
                line_sign,
                false,
            ) {
                let improves = match best {
                    None => true,
                    Some((nu_b, _, _)) => nu_j < nu_b - geom_tol(nu_b),
                };
                if improves {
                    let j = (coord as i64 + 1) * line_sign as i64;
                    best = Some((nu_j, j, direction));
                }
            }
        }
    }
    Ok(best)
}

/// Shared breakpoint accumulator: merges simultaneous transitions, guards
/// against a coordinate firing twice at one `nu`, refreshes sums from
/// scratch periodically, and enforces the iteration cap.
pub(crate) struct Builder<'a> {
    inst: &'a ProblemInstance,
    objective: Objective,
    pub(crate) sums: SegmentSums,
    pub(crate) s: SignVector,
    breakpoints: Vec<Breakpoint>,
    guard: Vec<bool>,
    transitions: usize,
    cap: usize,
}

impl<'a> Builder<'a> {
    pub(crate) fn new(inst: &'a ProblemInstance, objective: Objective) -> Self {
        let n = inst.n();
        Self {
            inst,
            objective,
            sums: SegmentSums::initial(inst, objective),
            s: SignVector::zeros(n),
            breakpoints: Vec::new(),
            guard: vec![false; n],
            transitions: 0,
            cap: 4 * n * n + 16,
        }
    }

    pub(crate) fn nu_cur(&self) -> f64 {
        self.breakpoints.last().map_or(0.0, |bp| bp.nu)
    }

    pub(crate) fn record(&mut self, c: Candidate) -> Result<()> {
        self.transitions += 1;
        if self.transitions > self.cap {
            return Err(Error::IterationCapExceeded(self.cap));
        }
        let merge = self
            .breakpoints
            .last()
            .map_or(false, |bp| c.nu <= bp.nu + geom_tol(bp.nu));
        if merge {
            let bp = self.breakpoints.last_mut().expect("merge implies a breakpoint");
            bp.transitions.push(Transition { coord: c.coord, direction: c.direction });
        } else {
            let mu = self.sums.mu_at(c.nu);
            self.guard.fill(false);
            self.breakpoints.push(Breakpoint {
                nu: c.nu,
                mu,
                transitions: vec![Transition { coord: c.coord, direction: c.direction }],
            });
        }
        self.guard[c.coord] = true;
        apply_in_place(&mut self.sums, &mut self.s, self.inst, self.objective, c.coord, c.direction)?;
        if self.transitions % (10 * self.inst.n()) == 0 {
            self.sums = SegmentSums::direct(self.inst, self.objective, &self.s);
        }
        Ok(())
    }

    pub(crate) fn finish(self) -> Result<RelaxationPath> {
        RelaxationPath::from_breakpoints(self.inst, self.objective, self.breakpoints)
    }
}

/// Local tracking over all `2n` coordinate lines per step, for either
/// objective.
pub(crate) fn track_generic(inst: &ProblemInstance, objective: Objective) -> Result<RelaxationPath> {
    let n = inst.n();
    let mut b = Builder::new(inst, objective);
    while !b.s.interior_empty() {
        let nu_cur = b.nu_cur();
        let mut best: Option<Candidate> = None;
        for coord in 0..n {
            for line_sign in [-1i8, 1] {
                if let Some((nu_j, direction)) = candidate_for_line(
                    &b.sums,
                    &b.s,
                    inst,
                    objective,
                    nu_cur,
                    coord,
                    line_sign,
                    b.guard[coord],
                ) {
                    let improves = match best {
                        None => true,
                        Some(c) => nu_j < c.nu - geom_tol(c.nu),
                    };
                    if improves {
                        best = Some(Candidate { nu: nu_j, coord, direction });
                    }
                }
            }
        }
        match best {
            Some(c) => b.record(c)?,
            None => break,
        }
    }
    b.finish()
}

/// Algorithm-style local tracker for the entropy objective: starts from the
/// all-interior partition at the origin and follows breakpoints until no
/// line remains ahead.
pub fn track_local(inst: &ProblemInstance) -> Result<RelaxationPath> {
    track_generic(inst, Objective::Entropy)
}

/// Fast tracker for sparse observations. Coordinates with `q_j = 0` have
/// horizontal lines `u_j·mu = 1` that the nondecreasing path crosses at most
/// once each, in decreasing `u_j` order; each step scans only the lines of
/// the nonzero coordinates plus the single next horizontal line.
pub fn track_sparse(inst: &ProblemInstance) -> Result<RelaxationPath> {
    let n = inst.n();
    let mut zero: Vec<usize> = (0..n).filter(|&j| inst.q()[j] == 0.0).collect();
    zero.sort_by(|&i, &j| inst.u()[j].partial_cmp(&inst.u()[i]).unwrap().then(i.cmp(&j)));
    let nonzero: Vec<usize> = (0..n).filter(|&j| inst.q()[j] != 0.0).collect();
    let mut b = Builder::new(inst, Objective::Entropy);
    let mut zptr = 0usize;
    while !b.s.interior_empty() {
        let nu_cur = b.nu_cur();
        let mut best: Option<Candidate> = None;
        let consider = |b: &Builder, best: &mut Option<Candidate>, coord: usize, line_sign: i8| {
            if let Some((nu_j, direction)) = candidate_for_line(
                &b.sums,
                &b.s,
                inst,
                Objective::Entropy,
                nu_cur,
                coord,
                line_sign,
                b.guard[coord],
            ) {
                let improves = match best {
                    None => true,
                    Some(c) => {
                        nu_j < c.nu - geom_tol(c.nu)
                            || (nu_j <= c.nu + geom_tol(c.nu)
                                && (coord, line_sign) < (c.coord, c.direction.line_sign()))
                    }
                };
                if improves {
                    *best = Some(Candidate { nu: nu_j, coord, direction });
                }
            }
        };
        for &coord in &nonzero {
            consider(&b, &mut best, coord, -1);
            consider(&b, &mut best, coord, 1);
        }
        while zptr < zero.len() && b.s[zero[zptr]] != 0 {
            zptr += 1;
        }
        if let Some(&coord) = zero.get(zptr) {
            consider(&b, &mut best, coord, 1);
        }
        match best {
            Some(c) => b.record(c)?,
            None => break,
        }
    }
    b.finish()
}

/// Fast tracker for uniform priors: with `u_j = u0` the next coordinate to
/// leave the interior downward is the one with the largest remaining `q`,
/// and upward the one with the smallest, so only two candidates are compared
/// per step. The resulting partition sets grow monotonically and the path
/// has at most `n + 1` breakpoints.
pub fn track_uniform(inst: &ProblemInstance) -> Result<RelaxationPath> {
    let n = inst.n();
    let u0 = 1.0 / inst.m().iter().sum::<f64>();
    if let Some(index) = (0..n).find(|&j| (inst.u()[j] - u0).abs() > 1e-9 * u0) {
        return Err(Error::NonUniformPrior { index });
    }
    let mut pi: Vec<usize> = (0..n).collect();
    pi.sort_by(|&i, &j| inst.q()[j].partial_cmp(&inst.q()[i]).unwrap().then(i.cmp(&j)));
    let mut b = Builder::new(inst, Objective::Entropy);
    let (mut lo, mut hi) = (0usize, n); // next minus entrant pi[lo], next plus entrant pi[hi-1]
    while lo < hi && !b.s.interior_empty() {
        let nu_cur = b.nu_cur();
        let minus = candidate_for_line(
            &b.sums,
            &b.s,
            inst,
            Objective::Entropy,
            nu_cur,
            pi[lo],
            -1,
            b.guard[pi[lo]],
        );
        let plus = candidate_for_line(
            &b.sums,
            &b.s,
            inst,
            Objective::Entropy,
            nu_cur,
            pi[hi - 1],
            1,
            b.guard[pi[hi - 1]],
        );
        let take_minus = match (&minus, &plus) {
            (Some((nm, _)), Some((np, _))) => nm <= np,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (None, None) => break,
        };
        if take_minus {
            let (nu_j, direction) = minus.expect("selected branch present");
            b.record(Candidate { nu: nu_j, coord: pi[lo], direction })?;
            lo += 1;
        } else {
            let (nu_j, direction) = plus.expect("selected branch present");
            b.record(Candidate { nu: nu_j, coord: pi[hi - 1], direction })?;
            hi -= 1;
        }
    }
    b.finish()
}

/// Where the first breakpoint must lie: the initial segment is `mu = nu`,
/// so the first line reached is the one of the largest `|u_j - q_j|`.
pub fn first_breakpoint_check(inst: &ProblemInstance) -> Result<f64> {
    let gap = inst
        .u()
        .iter()
        .zip(inst.q())
        .map(|(&uj, &qj)| (uj - qj).abs())
        .fold(0.0f64, f64::max);
    if gap < 1e-15 {
        return Err(Error::DegenerateInstance);
    }
    Ok(1.0 / gap)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> ProblemInstance {
        ProblemInstance::new(
            vec![0.5, 1.0 / 8.0, 1.0 / 12.0],
            vec![0.25, 1.0 / 3.0, 1.0 / 36.0],
            vec![1.0, 2.0, 3.0],
        )
        .unwrap()
    }

    fn uniform3() -> ProblemInstance {
        ProblemInstance::plain(vec![1.0 / 3.0; 3], vec![0.5, 0.3, 0.2]).unwrap()
    }

    fn assert_breakpoints(path: &RelaxationPath, expect: &[(f64, f64)]) {
        assert_eq!(path.kappa(), expect.len(), "kappa mismatch: {:?}", path.breakpoints());
        for (bp, &(nu, mu)) in path.breakpoints().iter().zip(expect) {
            assert!((bp.nu - nu).abs() < 1e-9, "nu {} vs {}", bp.nu, nu);
            assert!((bp.mu - mu).abs() < 1e-9, "mu {} vs {}", bp.mu, mu);
        }
    }

    #[test]
    fn toy_golden_path() {
        let path = track_local(&toy()).unwrap();
        assert_breakpoints(
            &path,
            &[(4.0, 4.0), (36.0 / 7.0, 40.0 / 7.0), (12.0, 8.0), (84.0, 40.0)],
        );
        assert!((path.nu_inf() - 84.0).abs() < 1e-9);
        assert!((path.mu_inf() - 40.0).abs() < 1e-9);
        let slopes: Vec<f64> = path.segments()[..4]
            .iter()
            .map(|seg| seg.observed_mass / seg.prior_mass)
            .collect();
        for (got, want) in slopes.iter().zip([1.0, 1.5, 1.0 / 3.0, 4.0 / 9.0]) {
            assert!((got - want).abs() < 1e-12, "slope {} vs {}", got, want);
        }
        // Partition sequence along the segments.
        let expected: [&[i8]; 5] =
            [&[0, 0, 0], &[1, 0, 0], &[1, -1, 0], &[0, -1, 0], &[-1, -1, 1]];
        for (i, want) in expected.iter().enumerate() {
            assert_eq!(&path.signs_at_segment(i).0[..], *want, "segment {}", i);
        }
        // The last breakpoint merges two simultaneous transitions.
        assert_eq!(path.breakpoints()[3].transitions.len(), 2);
    }

    #[test]
    fn identical_distributions_have_no_breakpoints() {
        let inst = ProblemInstance::plain(vec![0.2, 0.5, 0.3], vec![0.2, 0.5, 0.3]).unwrap();
        let path = track_local(&inst).unwrap();
        assert_eq!(path.kappa(), 0);
        assert!(path.nu_inf().is_infinite());
        let (mu, s, _) = path.eval(5.0);
        assert!((mu - 5.0).abs() < 1e-12);
        assert_eq!(s.0, vec![0, 0, 0]);
    }

    #[test]
    fn parallel_terminal_line_keeps_interior() {
        let path = track_local(&uniform3()).unwrap();
        assert_breakpoints(&path, &[(6.0, 6.0), (10.0, 9.0)]);
        assert!(path.nu_inf().is_infinite());
        // Terminal slope 0.9 with coordinate 2 interior forever.
        let (mu, s, _) = path.eval(100.0);
        assert!((mu - 90.0).abs() < 1e-9);
        assert_eq!(s.0, vec![-1, 0, 1]);
    }

    #[test]
    fn sparse_tracker_example() {
        let inst =
            ProblemInstance::plain(vec![0.4, 0.25, 0.2, 0.15], vec![0.7, 0.3, 0.0, 0.0]).unwrap();
        let path = track_sparse(&inst).unwrap();
        assert_breakpoints(
            &path,
            &[(10.0 / 3.0, 10.0 / 3.0), (20.0 / 3.0, 5.0), (80.0 / 9.0, 20.0 / 3.0)],
        );
        assert_eq!(path.breakpoints()[2].transitions.len(), 2);
        assert!((path.nu_inf() - 80.0 / 9.0).abs() < 1e-9);
        // Horizontal crossings appear in decreasing-u order.
        assert_eq!(path.breakpoints()[1].transitions[0].coord, 2);
        // Agreement with the local tracker.
        let local = track_local(&inst).unwrap();
        for (a, b) in path.breakpoints().iter().zip(local.breakpoints()) {
            assert!((a.nu - b.nu).abs() < 1e-9 && (a.mu - b.mu).abs() < 1e-9);
            assert_eq!(a.transitions, b.transitions);
        }
    }

    #[test]
    fn sparse_matches_local_on_dense_instance() {
        let inst = toy();
        let a = track_sparse(&inst).unwrap();
        let b = track_local(&inst).unwrap();
        assert_eq!(a.kappa(), b.kappa());
        for (x, y) in a.breakpoints().iter().zip(b.breakpoints()) {
            assert!((x.nu - y.nu).abs() < 1e-12 && (x.mu - y.mu).abs() < 1e-12);
            assert_eq!(x.transitions, y.transitions);
        }
    }

    #[test]
    fn uniform_tracker_examples() {
        let path = track_uniform(&uniform3()).unwrap();
        assert_breakpoints(&path, &[(6.0, 6.0), (10.0, 9.0)]);
        assert!(path.kappa() <= 4);

        let inst = ProblemInstance::plain(vec![0.5, 0.5], vec![0.7, 0.3]).unwrap();
        let path = track_uniform(&inst).unwrap();
        assert_breakpoints(&path, &[(5.0, 5.0)]);
        assert_eq!(path.breakpoints()[0].transitions.len(), 2);
        assert!((path.nu_inf() - 5.0).abs() < 1e-9);

        let flat = ProblemInstance::plain(vec![0.25; 4], vec![0.25; 4]).unwrap();
        assert_eq!(track_uniform(&flat).unwrap().kappa(), 0);
    }

    #[test]
    fn uniform_tracker_rejects_other_priors() {
        assert!(matches!(track_uniform(&toy()), Err(Error::NonUniformPrior { .. })));
    }

    #[test]
    fn uniform_matches_local() {
        let a = track_uniform(&uniform3()).unwrap();
        let b = track_local(&uniform3()).unwrap();
        assert_eq!(a.kappa(), b.kappa());
        for (x, y) in a.breakpoints().iter().zip(b.breakpoints()) {
            assert!((x.nu - y.nu).abs() < 1e-12 && (x.mu - y.mu).abs() < 1e-12);
            assert_eq!(x.transitions, y.transitions);
        }
    }

    #[test]
    fn next_intersection_from_origin() {
        let inst = toy();
        let sums = SegmentSums::initial(&inst, Objective::Entropy);
        let s = SignVector::zeros(3);
        let (nu, j, direction) = next_intersection(&sums, &s, &inst, 0.0).unwrap().unwrap();
        assert!((nu - 4.0).abs() < 1e-12);
        assert_eq!(j, 1);
        assert_eq!(direction, Direction::ToPlus);
    }

    #[test]
    fn next_intersection_tie_breaks_at_the_node() {
        // Sums after the third breakpoint of the toy path.
        let inst = toy();
        let sums =
            SegmentSums { signed_mass: -2.0, prior_mass: 0.75, observed_mass: 1.0 / 3.0 };
        let s = SignVector(vec![0, -1, 0]);
        let (nu, j, direction) = next_intersection(&sums, &s, &inst, 12.0).unwrap().unwrap();
        assert!((nu - 84.0).abs() < 1e-9);
        assert_eq!(j, -1);
        assert_eq!(direction, Direction::ToMinus);
    }

    #[test]
    fn next_intersection_none_and_empty() {
        let inst = ProblemInstance::plain(vec![0.4, 0.6], vec![0.4, 0.6]).unwrap();
        let sums = SegmentSums::initial(&inst, Objective::Entropy);
        let s = SignVector::zeros(2);
        assert!(next_intersection(&sums, &s, &inst, 0.0).unwrap().is_none());
        let drained = SegmentSums { signed_mass: 0.0, prior_mass: 0.0, observed_mass: 0.0 };
        assert!(matches!(
            next_intersection(&drained, &s, &inst, 1.0),
            Err(Error::EmptyInterior)
        ));
    }

    #[test]
    fn apply_transition_first_toy_step() {
        let inst = toy();
        let sums = SegmentSums::initial(&inst, Objective::Entropy);
        let s = SignVector::zeros(3);
        let (next, s2) = apply_transition(&sums, &s, &inst, 0, Direction::ToPlus).unwrap();
        assert_eq!(next.signed_mass, 1.0);
        assert_eq!(next.prior_mass, 0.5);
        assert_eq!(next.observed_mass, 0.75);
        assert_eq!(s2.0, vec![1, 0, 0]);
        // Reversal restores the originals.
        let (back, s3) = apply_transition(&next, &s2, &inst, 0, Direction::ToZeroFromPlus).unwrap();
        assert!((back.signed_mass - sums.signed_mass).abs() < 1e-15);
        assert!((back.prior_mass - sums.prior_mass).abs() < 1e-15);
        assert!((back.observed_mass - sums.observed_mass).abs() < 1e-15);
        assert_eq!(s3.0, vec![0, 0, 0]);
    }

    #[test]
    fn apply_transition_rejects_illegal_moves() {
        let inst = toy();
        let sums = SegmentSums::initial(&inst, Objective::Entropy);
        let s = SignVector::zeros(3);
        assert!(matches!(
            apply_transition(&sums, &s, &inst, 0, Direction::ToZeroFromPlus),
            Err(Error::IllegalTransition { index: 0, from: 0 })
        ));
    }

    #[test]
    fn incremental_sums_match_direct_sums() {
        let path = track_local(&toy()).unwrap();
        for (i, seg) in path.segments().iter().enumerate() {
            let direct = SegmentSums::direct(&toy(), Objective::Entropy, &path.signs_at_segment(i));
            assert!((seg.signed_mass - direct.signed_mass).abs() < 1e-12);
            assert!((seg.prior_mass - direct.prior_mass).abs() < 1e-12);
            assert!((seg.observed_mass - direct.observed_mass).abs() < 1e-12);
        }
    }

    #[test]
    fn eval_on_the_toy_path() {
        let path = track_local(&toy()).unwrap();
        let (mu, s, _) = path.eval(8.0);
        assert!((mu - 20.0 / 3.0).abs() < 1e-12);
        assert_eq!(s.0, vec![1, -1, 0]);
        let (mu0, _, _) = path.eval(0.0);
        assert_eq!(mu0, 0.0);
        // Continuity: both adjacent segment lines meet at each breakpoint.
        for (i, bp) in path.breakpoints().iter().enumerate() {
            let before = path.segments()[i].mu_at(bp.nu);
            assert!((before - bp.mu).abs() < 1e-10, "left side at bp {}", i);
            let after = path.segments()[i + 1];
            if after.prior_mass > 0.0 {
                assert!((after.mu_at(bp.nu) - bp.mu).abs() < 1e-10, "right side at bp {}", i);
            }
        }
        // Frozen regime extends the last proper segment line.
        let (mu_far, s_far, _) = path.eval(100.0);
        assert!((mu_far - (4.0 / 9.0 * 100.0 + 8.0 / 3.0)).abs() < 1e-9);
        assert_eq!(s_far.0, vec![-1, -1, 1]);
    }

    #[test]
    fn replay_reproduces_the_path_exactly() {
        let inst = toy();
        let path = track_local(&inst).unwrap();
        let replay = RelaxationPath::from_breakpoints(
            &inst,
            Objective::Entropy,
            path.breakpoints().to_vec(),
        )
        .unwrap();
        assert_eq!(path.segments(), replay.segments());
        assert_eq!(path.nu_inf(), replay.nu_inf());
        assert_eq!(path.final_signs(), replay.final_signs());
    }

    #[test]
    fn replay_rejects_corrupt_breakpoints() {
        let inst = toy();
        let mut bps = track_local(&inst).unwrap().breakpoints().to_vec();
        bps[0].mu += 0.5;
        assert!(matches!(
            RelaxationPath::from_breakpoints(&inst, Objective::Entropy, bps),
            Err(Error::InvalidPath(_))
        ));
        let mut bps = track_local(&inst).unwrap().breakpoints().to_vec();
        bps.swap(0, 1);
        assert!(RelaxationPath::from_breakpoints(&inst, Objective::Entropy, bps).is_err());
    }

    #[test]
    fn first_breakpoint_law() {
        assert!((first_breakpoint_check(&toy()).unwrap() - 4.0).abs() < 1e-12);
        let n2 = ProblemInstance::plain(vec![0.5, 0.5], vec![0.7, 0.3]).unwrap();
        assert!((first_breakpoint_check(&n2).unwrap() - 5.0).abs() < 1e-12);
        assert!((first_breakpoint_check(&uniform3()).unwrap() - 6.0).abs() < 1e-12);
        let eq = ProblemInstance::plain(vec![0.5, 0.5], vec![0.5, 0.5]).unwrap();
        assert!(matches!(first_breakpoint_check(&eq), Err(Error::DegenerateInstance)));
    }

    #[test]
    fn kappa_respects_structural_bounds() {
        let inst = toy();
        assert!(track_local(&inst).unwrap().kappa() <= inst.n() * inst.n());
        let path = track_uniform(&uniform3()).unwrap();
        assert!(path.kappa() <= uniform3().n() + 1);
    }
}
