//! Reachable value sets: everything an adversary controlling `s` of the
//! `n` observations can make a scalar estimator say.
//!
//! Two routes produce a [`ReachableSet`]:
//!
//! * closed forms for the median and for the mean on the nonnegative
//!   half-line, which represent unbounded ends honestly; and
//! * a brute-force oracle that enumerates every choice of `s` contaminated
//!   positions together with outlier values on a uniform grid over the
//!   box `[-B, B]` (clipped to `[0, B]` on nonnegative domains), then
//!   merges the attained values into interval hulls.
//!
//! Oracle results are always box-truncated: a hull that fills the box is
//! evidence relative to `B`, never proof that the true set is unbounded.
//! When the requested grid would blow the evaluation budget the oracle
//! coarsens the grid (never below two points per outlier) and reports the
//! effective resolution in its provenance.
//!
//! Every scalar estimator in the catalog is permutation invariant, so the
//! oracle enumerates non-decreasing outlier *multisets* rather than ordered
//! tuples — identical hulls at a fraction of the evaluations.
//!
//! The fourth breakdown notion lives here as [`detect_def4`]: an estimator
//! has broken down when the reachable set no longer depends on the clean
//! data, so the detector compares oracle hulls across a panel of samples.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::breakdown::validate_panel;
use crate::error::{Error, Result};
use crate::estimators::Estimator;
use crate::sample::{Domain, Sample};
use crate::verdict::Verdict;

/// A closed interval of attainable values, possibly unbounded on either
/// end. Unbounded ends carry an infinite endpoint (serialized as `null`)
/// plus an explicit flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_unbounded: bool,
    pub hi_unbounded: bool,
}

impl Interval {
    pub fn bounded(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "bounded interval endpoints must be finite, got [{lo}, {hi}]"
            )));
        }
        if lo > hi {
            return Err(Error::InvalidParameter(format!(
                "interval endpoints are out of order: [{lo}, {hi}]"
            )));
        }
        Ok(Interval {
            lo,
            hi,
            lo_unbounded: false,
            hi_unbounded: false,
        })
    }

    pub fn point(value: f64) -> Result<Self> {
        Interval::bounded(value, value)
    }

    pub fn at_least(lo: f64) -> Result<Self> {
        if !lo.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "the finite endpoint of a half-unbounded interval must be \
                 finite, got {lo}"
            )));
        }
        Ok(Interval {
            lo,
            hi: f64::INFINITY,
            lo_unbounded: false,
            hi_unbounded: true,
        })
    }

    pub fn all_values() -> Self {
        Interval {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
            lo_unbounded: true,
            hi_unbounded: true,
        }
    }

    pub fn is_bounded(&self) -> bool {
        !self.lo_unbounded && !self.hi_unbounded
    }

    /// Width; infinite when either end is unbounded.
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, value: f64, tol: f64) -> bool {
        let above_lo = self.lo_unbounded || value >= self.lo - tol;
        let below_hi = self.hi_unbounded || value <= self.hi + tol;
        above_lo && below_hi
    }

    /// Whether `other` sits inside `self`, allowing endpoints to poke out
    /// by `tol`.
    pub fn contains_interval(&self, other: &Interval, tol: f64) -> bool {
        let lo_ok = self.lo_unbounded || (!other.lo_unbounded && other.lo >= self.lo - tol);
        let hi_ok = self.hi_unbounded || (!other.hi_unbounded && other.hi <= self.hi + tol);
        lo_ok && hi_ok
    }
}

/// How a reachable set was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    /// Closed-form construction; endpoints are exact.
    Analytic,
    /// Grid enumeration; endpoints are exact only where extremes are
    /// attained on the grid, and the whole set is truncated to the box.
    Oracle {
        box_half_width: f64,
        grid_requested: usize,
        /// Points per outlier dimension actually used after budget
        /// coarsening.
        grid_effective: usize,
        evaluations: u64,
    },
}

/// A reachable value set: disjoint, ascending intervals plus provenance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReachableSet {
    pub intervals: Vec<Interval>,
    pub provenance: Provenance,
}

impl ReachableSet {
    pub fn singleton(value: f64, provenance: Provenance) -> Result<Self> {
        Ok(ReachableSet {
            intervals: vec![Interval::point(value)?],
            provenance,
        })
    }

    /// The smallest interval containing every member interval.
    pub fn hull(&self) -> Option<Interval> {
        let first = self.intervals.first()?;
        let last = self.intervals.last()?;
        Some(Interval {
            lo: first.lo,
            hi: last.hi,
            lo_unbounded: first.lo_unbounded,
            hi_unbounded: last.hi_unbounded,
        })
    }

    pub fn contains(&self, value: f64, tol: f64) -> bool {
        self.intervals.iter().any(|iv| iv.contains(value, tol))
    }

    pub fn is_bounded(&self) -> bool {
        self.intervals.iter().all(Interval::is_bounded)
    }
}

/// Enumeration parameters for the oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleParams {
    /// Box half-width `B`: outliers range over `[-B, B]` (or `[0, B]` on
    /// nonnegative domains).
    pub box_half_width: f64,
    /// Requested grid points per outlier dimension.
    pub grid: usize,
    /// Maximum number of estimator evaluations per call.
    pub budget: u64,
    /// Multiplier on the hull merge gap of two effective grid steps.
    pub merge_slack: f64,
}

impl Default for OracleParams {
    fn default() -> Self {
        OracleParams {
            box_half_width: 1e3,
            grid: 201,
            budget: 10_000_000,
            merge_slack: 1.0,
        }
    }
}

impl OracleParams {
    fn validate(&self) -> Result<()> {
        if !self.box_half_width.is_finite() || self.box_half_width <= 0.0 {
            return Err(Error::InvalidOracleParams(format!(
                "box half-width must be positive and finite, got {}",
                self.box_half_width
            )));
        }
        if self.grid < 2 {
            return Err(Error::InvalidOracleParams(format!(
                "the grid needs at least 2 points per outlier, got {}",
                self.grid
            )));
        }
        if self.budget == 0 {
            return Err(Error::InvalidOracleParams(
                "the evaluation budget must be positive".into(),
            ));
        }
        if !self.merge_slack.is_finite() || self.merge_slack < 0.0 {
            return Err(Error::InvalidOracleParams(format!(
                "merge slack must be nonnegative and finite, got {}",
                self.merge_slack
            )));
        }
        Ok(())
    }

    /// Grid endpoints for a scalar domain.
    fn grid_range(&self, domain: Domain) -> (f64, f64) {
        match domain {
            Domain::Nonnegative => (0.0, self.box_half_width),
            _ => (-self.box_half_width, self.box_half_width),
        }
    }

    /// Effective grid step at `g` points on `domain`.
    pub fn step(&self, domain: Domain, g: usize) -> f64 {
        let (lo, hi) = self.grid_range(domain);
        (hi - lo) / (g - 1) as f64
    }
}

/// Binomial coefficient, saturating at `u128::MAX`. Saturated values are
/// only ever compared against budgets that fit in `u64`, so the loss of
/// exactness above the saturation point is irrelevant.
fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Number of non-decreasing `s`-tuples over `g` grid points (multisets).
fn multiset_count(g: usize, s: usize) -> u128 {
    binomial(g as u128 + s as u128 - 1, s as u128)
}

fn required_evaluations(n: usize, s: usize, g: usize) -> u128 {
    binomial(n as u128, s as u128).saturating_mul(multiset_count(g, s))
}

/// Largest grid size `<= requested` whose enumeration fits the budget.
fn effective_grid(n: usize, s: usize, requested: usize, budget: u64) -> Result<usize> {
    if s == 0 {
        return Ok(requested);
    }
    if required_evaluations(n, s, 2) > u128::from(budget) {
        return Err(Error::BudgetExceeded {
            required: required_evaluations(n, s, 2),
            budget,
        });
    }
    let (mut lo, mut hi) = (2usize, requested);
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        if required_evaluations(n, s, mid) <= u128::from(budget) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    Ok(lo)
}

/// All `s`-element position subsets of `0..n`, lexicographic.
fn masks(n: usize, s: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..s).collect();
    if s == 0 || s > n {
        return out;
    }
    loop {
        out.push(current.clone());
        // Advance the rightmost index that still has room.
        let mut i = s;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if current[i] < n - s + i {
                current[i] += 1;
                for j in i + 1..s {
                    current[j] = current[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn merge_sorted_into(a: &[f64], b: &[f64], out: &mut Vec<f64>) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
}

/// Min/max of the attained values inside one occupancy cell.
type CellMap = HashMap<i64, (f64, f64)>;

fn record(cells: &mut CellMap, quantum: f64, value: f64) {
    let key = (value / quantum).round();
    if !key.is_finite() {
        return;
    }
    cells
        .entry(key as i64)
        .and_modify(|(lo, hi)| {
            *lo = lo.min(value);
            *hi = hi.max(value);
        })
        .or_insert((value, value));
}

fn merge_cells(mut a: CellMap, b: CellMap) -> CellMap {
    for (key, (lo, hi)) in b {
        a.entry(key)
            .and_modify(|(alo, ahi)| {
                *alo = alo.min(lo);
                *ahi = ahi.max(hi);
            })
            .or_insert((lo, hi));
    }
    a
}

/// Enumerate `T(X')` over every contamination of `s` positions with grid
/// outliers and return the interval hull(s) of the attained values.
pub fn reachable_oracle(
    est: &Estimator,
    x: &Sample,
    s: usize,
    params: &OracleParams,
) -> Result<ReachableSet> {
    params.validate()?;
    if est.output_dimension() != 1 {
        return Err(Error::InvalidOracleParams(format!(
            "the oracle enumerates scalar-valued estimators; `{}` is \
             vector-valued",
            est.name()
        )));
    }
    let values = x.values_or_err()?;
    let n = values.len();
    if s > n {
        return Err(Error::TooManyOutliers { s, n });
    }

    if s == 0 {
        let clean = est
            .evaluate(x)?
            .as_scalar()
            .expect("scalar output was checked above");
        return ReachableSet::singleton(
            clean,
            Provenance::Oracle {
                box_half_width: params.box_half_width,
                grid_requested: params.grid,
                grid_effective: params.grid,
                evaluations: 1,
            },
        );
    }

    let g = effective_grid(n, s, params.grid, params.budget)?;
    let (grid_lo, grid_hi) = params.grid_range(x.domain());
    let grid: Vec<f64> = (0..g)
        .map(|i| grid_lo + (grid_hi - grid_lo) * i as f64 / (g - 1) as f64)
        .collect();
    let step = params.step(x.domain(), g);
    let quantum = step / 8.0;

    let cells: CellMap = masks(n, s)
        .into_par_iter()
        .map(|mask| {
            // Kept values: drop the masked positions, keep the rest sorted.
            let mut kept: Vec<f64> = Vec::with_capacity(n - s);
            let mut mask_iter = mask.iter().peekable();
            for (i, &v) in values.iter().enumerate() {
                if mask_iter.peek() == Some(&&i) {
                    mask_iter.next();
                } else {
                    kept.push(v);
                }
            }
            kept.sort_unstable_by(f64::total_cmp);

            let mut local = CellMap::new();
            let mut outliers = vec![grid[0]; s];
            let mut indices = vec![0usize; s];
            let mut merged = Vec::with_capacity(n);
            'enumerate: loop {
                merge_sorted_into(&kept, &outliers, &mut merged);
                if let Ok(value) = est.eval_sorted(&merged) {
                    if value.is_finite() {
                        record(&mut local, quantum, value);
                    }
                }
                // Next non-decreasing index tuple.
                let mut pos = s;
                loop {
                    if pos == 0 {
                        break 'enumerate;
                    }
                    pos -= 1;
                    if indices[pos] + 1 < g {
                        let next = indices[pos] + 1;
                        for q in pos..s {
                            indices[q] = next;
                            outliers[q] = grid[next];
                        }
                        break;
                    }
                }
            }
            local
        })
        .reduce(CellMap::new, merge_cells);

    if cells.is_empty() {
        return Err(Error::DegenerateSample {
            what: "reachable-set oracle",
            detail: format!(
                "`{}` failed on every contaminated sample (n = {n}, s = {s})",
                est.name()
            ),
        });
    }

    // Group occupied cells into intervals wherever the gap between
    // neighboring cells stays below the merge gap; interval endpoints are
    // the exact extreme values attained inside the run.
    let merge_gap = 2.0 * step * params.merge_slack;
    let mut keys: Vec<i64> = cells.keys().copied().collect();
    keys.sort_unstable();
    let mut intervals = Vec::new();
    let mut run_lo = cells[&keys[0]].0;
    let mut run_hi = cells[&keys[0]].1;
    for pair in keys.windows(2) {
        let gap = (pair[1] - pair[0]) as f64 * quantum;
        let (cell_lo, cell_hi) = cells[&pair[1]];
        if gap <= merge_gap {
            run_lo = run_lo.min(cell_lo);
            run_hi = run_hi.max(cell_hi);
        } else {
            intervals.push(Interval::bounded(run_lo, run_hi)?);
            run_lo = cell_lo;
            run_hi = cell_hi;
        }
    }
    intervals.push(Interval::bounded(run_lo, run_hi)?);

    Ok(ReachableSet {
        intervals,
        provenance: Provenance::Oracle {
            box_half_width: params.box_half_width,
            grid_requested: params.grid,
            grid_effective: g,
            evaluations: required_evaluations(n, s, g) as u64,
        },
    })
}

/// Closed form for the median of an odd-length sample: with `n = 2k - 1`
/// and `s < k` outliers the reachable values are exactly
/// `[x_(k-s), x_(k+s)]`; at `s = k` the adversary holds a majority and
/// every value in the sample space's projection is reachable.
pub fn median_reachable_analytic(x: &Sample, s: usize) -> Result<ReachableSet> {
    let values = x.values_or_err()?;
    let n = values.len();
    if n.is_multiple_of(2) {
        return Err(Error::EvenSampleLength(n));
    }
    let k = n.div_ceil(2);
    if s > k {
        return Err(Error::OutlierCountAboveHalf { s, k });
    }
    if s == k {
        let interval = match x.domain() {
            // A majority of outliers still cannot push the median below the
            // domain's floor.
            Domain::Nonnegative => Interval::at_least(0.0)?,
            _ => Interval::all_values(),
        };
        return Ok(ReachableSet {
            intervals: vec![interval],
            provenance: Provenance::Analytic,
        });
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let lo = sorted[k - s - 1];
    let hi = sorted[k + s - 1];
    Ok(ReachableSet {
        intervals: vec![Interval::bounded(lo, hi)?],
        provenance: Provenance::Analytic,
    })
}

/// Closed form for the mean on the nonnegative half-line with `j`
/// outliers: the adversary can inflate the mean without bound but can
/// deflate it only to the mean of the `n - j` smallest clean values, so
/// the reachable set is `[(sum of the n - j smallest) / n, +inf)`.
pub fn mean_reachable_nonneg(x: &Sample, j: usize) -> Result<ReachableSet> {
    if x.domain() != Domain::Nonnegative {
        return Err(Error::RequiresNonnegativeDomain);
    }
    let values = x.values_or_err()?;
    let n = values.len();
    if j == 0 {
        let clean = values.iter().sum::<f64>() / n as f64;
        return ReachableSet::singleton(clean, Provenance::Analytic);
    }
    if j >= n {
        return Err(Error::InvalidParameter(format!(
            "the nonnegative-mean formula covers 0 <= j <= n - 1, got \
             j = {j} with n = {n}"
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let lower = sorted[..n - j].iter().sum::<f64>() / n as f64;
    Ok(ReachableSet {
        intervals: vec![Interval::at_least(lower)?],
        provenance: Provenance::Analytic,
    })
}

/// One step of the nesting chain that failed to include its predecessor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NestingViolation {
    /// The hull at this outlier count was not contained in the hull at
    /// `s + 1`.
    pub s: usize,
    pub detail: String,
}

/// Outcome of checking the chain `{T(X)} = hull(0) ⊆ hull(1) ⊆ …`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NestingReport {
    pub estimator: String,
    pub s_max: usize,
    /// Oracle sets indexed by outlier count `0..=s_max`.
    pub sets: Vec<ReachableSet>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_violation: Option<NestingViolation>,
    pub pass: bool,
}

fn effective_step(params: &OracleParams, domain: Domain, set: &ReachableSet) -> f64 {
    match set.provenance {
        Provenance::Analytic => 0.0,
        Provenance::Oracle { grid_effective, .. } => params.step(domain, grid_effective.max(2)),
    }
}

/// Compute oracle sets for `s = 0..=s_max` on a common box and check that
/// each hull contains the previous one, within one grid step of the
/// coarser of the two grids involved.
pub fn nesting_check(
    est: &Estimator,
    x: &Sample,
    s_max: usize,
    params: &OracleParams,
) -> Result<NestingReport> {
    let n = x.len();
    if s_max > n {
        return Err(Error::TooManyOutliers { s: s_max, n });
    }
    let sets: Vec<ReachableSet> = (0..=s_max)
        .map(|s| reachable_oracle(est, x, s, params))
        .collect::<Result<_>>()?;
    let mut first_violation = None;
    for s in 0..s_max {
        let inner = sets[s].hull().expect("oracle sets are nonempty");
        let outer = sets[s + 1].hull().expect("oracle sets are nonempty");
        let tol = effective_step(params, x.domain(), &sets[s])
            .max(effective_step(params, x.domain(), &sets[s + 1]));
        if !outer.contains_interval(&inner, tol) {
            first_violation = Some(NestingViolation {
                s,
                detail: format!(
                    "hull at s = {s} is [{:.6}, {:.6}] but the hull at \
                     s = {} is [{:.6}, {:.6}] (tolerance {tol:.3e})",
                    inner.lo,
                    inner.hi,
                    s + 1,
                    outer.lo,
                    outer.hi
                ),
            });
            break;
        }
    }
    Ok(NestingReport {
        estimator: est.name(),
        s_max,
        sets,
        pass: first_violation.is_none(),
        first_violation,
    })
}

/// Definition 4: breakdown as loss of information — the reachable set no
/// longer depends on the clean data. The detector computes oracle hulls
/// per panel member on a common box and declares breakdown when every
/// hull agrees within twice the hull-extent grid resolution. The verdict
/// is box-relative: agreement inside `[-B, B]` is evidence, not proof
/// about the unbounded sample space.
pub fn detect_def4(
    est: &Estimator,
    panel: &[Sample],
    s: usize,
    params: &OracleParams,
) -> Result<Verdict> {
    validate_panel(panel)?;
    let domain = panel[0].domain();
    for member in &panel[1..] {
        if member.domain() != domain {
            return Err(Error::DomainMismatch {
                left: domain.name().into(),
                right: member.domain().name().into(),
            });
        }
    }
    let sets: Vec<ReachableSet> = panel
        .iter()
        .map(|member| reachable_oracle(est, member, s, params))
        .collect::<Result<_>>()?;
    let hulls: Vec<(f64, f64)> = sets
        .iter()
        .map(|set| {
            let hull = set.hull().expect("oracle sets are nonempty");
            (hull.lo, hull.hi)
        })
        .collect();

    let coarsest = sets
        .iter()
        .map(|set| match set.provenance {
            Provenance::Oracle { grid_effective, .. } => grid_effective.max(2),
            Provenance::Analytic => params.grid,
        })
        .min()
        .expect("panel is nonempty");
    // Resolution scaled to the attained hull extent rather than the box:
    // hulls much narrower than the box (a data-dependent median interval,
    // say) must not be conflated merely because the box dwarfs their
    // differences. A zero-width extent demands exact agreement.
    let extent = hulls
        .iter()
        .map(|(lo, hi)| hi - lo)
        .fold(0.0_f64, f64::max);
    let tol = 2.0 * extent / (coarsest - 1) as f64;
    let mut disagreement = 0.0_f64;
    for i in 0..hulls.len() {
        for j in i + 1..hulls.len() {
            let d = (hulls[i].0 - hulls[j].0)
                .abs()
                .max((hulls[i].1 - hulls[j].1).abs());
            disagreement = disagreement.max(d);
        }
    }
    let b = params.box_half_width;
    if disagreement <= tol {
        Ok(Verdict::broken_x_independent_set(hulls).with_reason(format!(
            "all {} reachable hulls coincide within {tol:.3e}; the evidence \
             is relative to the box half-width B = {b:.3e}",
            panel.len()
        )))
    } else {
        Ok(Verdict::not_broken(format!(
            "reachable hulls differ by up to {disagreement:.3e}, beyond the \
             grid resolution {tol:.3e} (box half-width B = {b:.3e}), so the \
             reachable set still depends on the data"
        ))
        .with_hulls(hulls))
    }
}

/// Shape of the sample family a membership query ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub n: usize,
    pub domain: Domain,
}

/// What observing `T = t` under `s` outliers implies about the clean data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InformativenessReport {
    pub estimator: String,
    pub n: usize,
    pub domain: Domain,
    pub s: usize,
    pub observed: f64,
    /// The membership condition `t ∈ reachable set` rewritten as a
    /// constraint on the order statistics of the clean sample.
    pub constraint: String,
    /// False when the condition holds for every sample in the family, so
    /// the observation rules nothing out.
    pub informative: bool,
}

/// Evaluate the membership condition `t ∈ T_s(X)` as a constraint on `X`
/// for estimators with an analytic reachable formula.
pub fn informativeness_query(
    est: &Estimator,
    family: FamilySpec,
    s: usize,
    observed: f64,
) -> Result<InformativenessReport> {
    if !observed.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "the observed estimate must be finite, got {observed}"
        )));
    }
    if family.n == 0 {
        return Err(Error::EmptySample);
    }
    let n = family.n;
    let report = |constraint: String, informative: bool| InformativenessReport {
        estimator: est.name(),
        n,
        domain: family.domain,
        s,
        observed,
        constraint,
        informative,
    };

    if s == 0 {
        return Ok(report(
            format!("with no outliers the estimate is untouched: T(X) = {observed} exactly"),
            true,
        ));
    }
    match est {
        Estimator::Median => {
            if n.is_multiple_of(2) {
                return Err(Error::EvenSampleLength(n));
            }
            let k = n.div_ceil(2);
            if s > k {
                return Err(Error::OutlierCountAboveHalf { s, k });
            }
            if s == k {
                Ok(report(
                    format!(
                        "no constraint: with s = k = {k} outliers every value \
                         is reachable, so the observation carries no \
                         information about X"
                    ),
                    false,
                ))
            } else {
                Ok(report(
                    format!("x_({}) <= {observed} <= x_({})", k - s, k + s),
                    true,
                ))
            }
        }
        Estimator::Mean => match family.domain {
            Domain::Nonnegative => {
                if s >= n {
                    return Err(Error::InvalidParameter(format!(
                        "the nonnegative-mean formula covers 0 <= j <= n - 1, \
                         got j = {s} with n = {n}"
                    )));
                }
                let kept = n - s;
                let bound = n as f64 * observed;
                let lhs = if kept == 1 {
                    "x_(1)".to_string()
                } else {
                    format!("x_(1) + ... + x_({kept})")
                };
                Ok(report(format!("{lhs} <= {bound}"), true))
            }
            Domain::Real => Ok(report(
                format!(
                    "no constraint: on the unrestricted domain the mean \
                     reaches every value once s >= 1 (here s = {s})"
                ),
                false,
            )),
            Domain::Regression => Err(Error::NoAnalyticFormula(est.name())),
        },
        _ => Err(Error::NoAnalyticFormula(est.name())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn scalar(values: &[f64]) -> Sample {
        Sample::scalar(values.to_vec()).unwrap()
    }

    fn nonneg(values: &[f64]) -> Sample {
        Sample::nonnegative(values.to_vec()).unwrap()
    }

    fn the_interval(set: &ReachableSet) -> Interval {
        assert_eq!(set.intervals.len(), 1, "expected a single interval");
        set.intervals[0]
    }

    #[test]
    fn median_analytic_examples() {
        let x = scalar(&[1.0, 2.0, 3.0, 4.0, 5.0]);

        let one = the_interval(&median_reachable_analytic(&x, 1).unwrap());
        assert_eq!((one.lo, one.hi), (2.0, 4.0));
        assert!(one.is_bounded());

        let zero = the_interval(&median_reachable_analytic(&x, 0).unwrap());
        assert_eq!((zero.lo, zero.hi), (3.0, 3.0));

        let majority = the_interval(&median_reachable_analytic(&x, 3).unwrap());
        assert!(majority.lo_unbounded && majority.hi_unbounded);

        assert!(matches!(
            median_reachable_analytic(&scalar(&[1.0, 2.0, 3.0, 4.0]), 1),
            Err(Error::EvenSampleLength(4))
        ));
        assert!(matches!(
            median_reachable_analytic(&x, 4),
            Err(Error::OutlierCountAboveHalf { s: 4, k: 3 })
        ));
    }

    #[test]
    fn nonneg_mean_examples() {
        let lower = the_interval(&mean_reachable_nonneg(&nonneg(&[0.5, 2.0, 3.0]), 2).unwrap());
        assert_relative_eq!(lower.lo, 0.5 / 3.0, max_relative = 1e-12);
        assert!(lower.hi_unbounded && !lower.lo_unbounded);

        let fourth = the_interval(&mean_reachable_nonneg(&nonneg(&[1.0, 2.0, 3.0, 4.0]), 2).unwrap());
        assert_relative_eq!(fourth.lo, 0.75, max_relative = 1e-12);

        let none = the_interval(&mean_reachable_nonneg(&nonneg(&[0.5, 2.0, 3.0]), 0).unwrap());
        assert_relative_eq!(none.lo, 5.5 / 3.0, max_relative = 1e-12);
        assert_eq!(none.lo, none.hi);

        assert!(matches!(
            mean_reachable_nonneg(&scalar(&[1.0, 2.0]), 1),
            Err(Error::RequiresNonnegativeDomain)
        ));
    }

    #[test]
    fn oracle_zero_outliers_is_the_exact_singleton() {
        let set =
            reachable_oracle(&Estimator::Mean, &scalar(&[1.0, 2.0, 3.0]), 0, &OracleParams::default())
                .unwrap();
        let iv = the_interval(&set);
        assert_eq!((iv.lo, iv.hi), (2.0, 2.0));
        assert!(matches!(
            set.provenance,
            Provenance::Oracle { evaluations: 1, .. }
        ));
    }

    #[test]
    fn oracle_median_hull_matches_the_analytic_interval_exactly() {
        let x = scalar(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let set = reachable_oracle(&Estimator::Median, &x, 1, &OracleParams::default()).unwrap();
        let iv = the_interval(&set);
        // The extremes are attained at the grid endpoints, so the hull is
        // exact despite the coarse grid.
        assert_relative_eq!(iv.lo, 2.0, max_relative = 1e-12);
        assert_relative_eq!(iv.hi, 4.0, max_relative = 1e-12);
    }

    #[test]
    fn oracle_mean_extremes_sit_at_the_grid_endpoints() {
        let x = scalar(&[1.0, 2.0, 3.0]);
        let params = OracleParams {
            box_half_width: 100.0,
            ..OracleParams::default()
        };
        let set = reachable_oracle(&Estimator::Mean, &x, 1, &params).unwrap();
        let iv = the_interval(&set);
        // Minimum: drop the largest value, park the outlier at -100.
        assert_relative_eq!(iv.lo, (1.0 + 2.0 - 100.0) / 3.0, max_relative = 1e-12);
        // Maximum: drop the smallest value, park the outlier at +100.
        assert_relative_eq!(iv.hi, (2.0 + 3.0 + 100.0) / 3.0, max_relative = 1e-12);
        match set.provenance {
            Provenance::Oracle {
                grid_effective,
                evaluations,
                ..
            } => {
                assert_eq!(grid_effective, 201);
                assert_eq!(evaluations, 3 * 201);
            }
            Provenance::Analytic => panic!("oracle provenance expected"),
        }
    }

    #[test]
    fn oracle_respects_the_nonnegative_domain() {
        let x = nonneg(&[1.0, 2.0, 3.0]);
        let params = OracleParams {
            box_half_width: 100.0,
            ..OracleParams::default()
        };
        let iv = the_interval(&reachable_oracle(&Estimator::Mean, &x, 1, &params).unwrap());
        // The grid floor is 0, so the lower extreme keeps the two smallest
        // values and zeroes out the largest.
        assert_relative_eq!(iv.lo, (1.0 + 2.0) / 3.0, max_relative = 1e-12);
        assert_relative_eq!(iv.hi, (2.0 + 3.0 + 100.0) / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn oracle_coarsens_to_fit_the_budget() {
        let x = scalar(&[0.3, -1.2, 0.8, 1.9, -0.4, 2.6, 0.1]);
        let params = OracleParams::default();
        let set = reachable_oracle(&Estimator::Median, &x, 3, &params).unwrap();
        match set.provenance {
            Provenance::Oracle {
                grid_effective,
                evaluations,
                ..
            } => {
                assert!(grid_effective < params.grid);
                assert!(grid_effective >= 2);
                assert!(u128::from(evaluations) <= u128::from(params.budget));
                assert!(
                    required_evaluations(7, 3, grid_effective + 1) > u128::from(params.budget),
                    "the effective grid should be maximal within the budget"
                );
            }
            Provenance::Analytic => panic!("oracle provenance expected"),
        }
    }

    #[test]
    fn oracle_rejects_hopeless_budgets_and_bad_inputs() {
        let x = scalar(&[0.3, -1.2, 0.8, 1.9, -0.4, 2.6, 0.1]);
        let tiny = OracleParams {
            budget: 100,
            ..OracleParams::default()
        };
        assert!(matches!(
            reachable_oracle(&Estimator::Median, &x, 3, &tiny),
            Err(Error::BudgetExceeded { .. })
        ));
        assert!(matches!(
            reachable_oracle(&Estimator::Median, &scalar(&[1.0, 2.0]), 3, &OracleParams::default()),
            Err(Error::TooManyOutliers { s: 3, n: 2 })
        ));
        assert!(matches!(
            reachable_oracle(&Estimator::Ols, &x, 1, &OracleParams::default()),
            Err(Error::InvalidOracleParams(_))
        ));
        let bad = OracleParams {
            grid: 1,
            ..OracleParams::default()
        };
        assert!(matches!(
            reachable_oracle(&Estimator::Median, &x, 1, &bad),
            Err(Error::InvalidOracleParams(_))
        ));
    }

    #[test]
    fn nesting_chain_for_the_median() {
        let x = scalar(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let params = OracleParams {
            box_half_width: 100.0,
            grid: 101,
            budget: 1_000_000,
            merge_slack: 1.0,
        };
        let report = nesting_check(&Estimator::Median, &x, 2, &params).unwrap();
        assert!(report.pass, "violation: {:?}", report.first_violation);
        let hulls: Vec<(f64, f64)> = report
            .sets
            .iter()
            .map(|set| {
                let h = set.hull().unwrap();
                (h.lo, h.hi)
            })
            .collect();
        assert_eq!(hulls[0], (3.0, 3.0));
        assert_eq!(hulls[1], (2.0, 4.0));
        assert_eq!(hulls[2], (1.0, 5.0));
    }

    #[test]
    fn def4_separates_the_median_from_a_majority_takeover() {
        let params = OracleParams {
            box_half_width: 100.0,
            grid: 51,
            budget: 1_000_000,
            merge_slack: 1.0,
        };
        let panel = vec![
            scalar(&[1.0, 2.0, 3.0, 4.0, 5.0]),
            scalar(&[1.1, 2.1, 2.9, 4.2, 4.7]),
            scalar(&[0.4, 1.8, 3.3, 3.9, 5.6]),
        ];
        // s = k = 3: every hull fills the box, so the sets coincide.
        let broken = detect_def4(&Estimator::Median, &panel, 3, &params).unwrap();
        assert_eq!(
            broken.outcome,
            crate::verdict::Outcome::BrokenXIndependentSet
        );
        // s = 1: hulls are the data-dependent intervals [x_(2), x_(4)].
        let held = detect_def4(&Estimator::Median, &panel, 1, &params).unwrap();
        assert_eq!(held.outcome, crate::verdict::Outcome::NotBroken);
        let hulls = held.evidence.hulls.unwrap();
        assert_relative_eq!(hulls[0].0, 2.0, max_relative = 1e-12);
        assert_relative_eq!(hulls[0].1, 4.0, max_relative = 1e-12);

        // The mean's hull fills the box for every member already at s = 1.
        let mean_broken = detect_def4(&Estimator::Mean, &panel, 1, &params).unwrap();
        assert_eq!(
            mean_broken.outcome,
            crate::verdict::Outcome::BrokenXIndependentSet
        );
    }

    #[test]
    fn oracle_hull_of_the_median_is_location_equivariant() {
        let x = scalar(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let shifted = scalar(&[2.0 * 1.0 + 1.0, 2.0 * 2.0 + 1.0, 2.0 * 3.0 + 1.0, 2.0 * 4.0 + 1.0, 2.0 * 5.0 + 1.0]);
        let params = OracleParams::default();
        let base = the_interval(&reachable_oracle(&Estimator::Median, &x, 1, &params).unwrap());
        let moved =
            the_interval(&reachable_oracle(&Estimator::Median, &shifted, 1, &params).unwrap());
        // Median hull endpoints are order statistics, hence exactly
        // equivariant even on a coarse grid.
        assert_relative_eq!(moved.lo, 2.0 * base.lo + 1.0, max_relative = 1e-12);
        assert_relative_eq!(moved.hi, 2.0 * base.hi + 1.0, max_relative = 1e-12);
    }

    #[test]
    fn informativeness_examples() {
        let median = informativeness_query(
            &Estimator::Median,
            FamilySpec {
                n: 5,
                domain: Domain::Real,
            },
            1,
            3.5,
        )
        .unwrap();
        assert!(median.informative);
        assert_eq!(median.constraint, "x_(2) <= 3.5 <= x_(4)");

        let majority = informativeness_query(
            &Estimator::Median,
            FamilySpec {
                n: 5,
                domain: Domain::Real,
            },
            3,
            3.5,
        )
        .unwrap();
        assert!(!majority.informative);

        let nonneg_mean = informativeness_query(
            &Estimator::Mean,
            FamilySpec {
                n: 3,
                domain: Domain::Nonnegative,
            },
            2,
            1.0,
        )
        .unwrap();
        assert!(nonneg_mean.informative);
        assert_eq!(nonneg_mean.constraint, "x_(1) <= 3");

        let free_mean = informativeness_query(
            &Estimator::Mean,
            FamilySpec {
                n: 3,
                domain: Domain::Real,
            },
            1,
            1.0,
        )
        .unwrap();
        assert!(!free_mean.informative);

        let zero = informativeness_query(
            &Estimator::StdDev,
            FamilySpec {
                n: 4,
                domain: Domain::Real,
            },
            0,
            2.0,
        )
        .unwrap();
        assert!(zero.informative);
        assert!(zero.constraint.contains("exactly"));

        assert!(matches!(
            informativeness_query(
                &Estimator::StdDev,
                FamilySpec {
                    n: 4,
                    domain: Domain::Real,
                },
                1,
                2.0,
            ),
            Err(Error::NoAnalyticFormula(_))
        ));
    }

    #[test]
    fn unbounded_ends_serialize_as_null_with_flags() {
        let set = mean_reachable_nonneg(&nonneg(&[0.5, 2.0, 3.0]), 2).unwrap();
        let json = serde_json::to_value(&set).unwrap();
        let iv = &json["intervals"][0];
        assert!(iv["hi"].is_null());
        assert_eq!(iv["hi_unbounded"], true);
        assert_eq!(iv["lo_unbounded"], false);
        assert!((iv["lo"].as_f64().unwrap() - 1.0 / 6.0).abs() < 1e-12);
    }
}
