//! Grid validators for the identities and inequalities the threshold and the
//! marking budget are designed to satisfy.
//!
//! Each check sweeps a fixed grid and reports the worst margin it saw instead
//! of failing fast, so one run surfaces every violation. The sweeps are a
//! numerical re-verification, not a certificate.

use serde::{Deserialize, Serialize};

use super::raw::*;
use super::{phi, ratio, xi_c};
use crate::error::{Error, Result};

pub const DEFAULT_GRID_STEP: f64 = 1e-4;
pub const IDENTITY_TOLERANCE: f64 = 1e-9;
pub const INEQUALITY_TOLERANCE: f64 = 1e-9;
pub const QUADRATURE_TOLERANCE: f64 = 1e-6;
pub const QUADRATURE_PANELS: usize = 100_000;
pub const SLOPE_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropertyKind {
    Identity,
    Inequality,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub property_id: String,
    pub kind: PropertyKind,
    pub grid_step: f64,
    /// Smallest value of the checked expression itself, for inequalities of
    /// the form `expr >= bound`.
    pub min_value: Option<f64>,
    /// For inequalities, the minimum of `expr - bound`; for identities, the
    /// negated largest absolute deviation.
    pub min_margin: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub argmin_point: Vec<f64>,
}

struct Sweep {
    id: &'static str,
    kind: PropertyKind,
    grid_step: f64,
    tolerance: f64,
    min_margin: f64,
    min_value: Option<f64>,
    argmin: Vec<f64>,
}

impl Sweep {
    fn inequality(id: &'static str, grid_step: f64) -> Self {
        Self::new(id, PropertyKind::Inequality, grid_step, INEQUALITY_TOLERANCE)
    }

    fn identity(id: &'static str, grid_step: f64, tolerance: f64) -> Self {
        Self::new(id, PropertyKind::Identity, grid_step, tolerance)
    }

    fn new(id: &'static str, kind: PropertyKind, grid_step: f64, tolerance: f64) -> Self {
        Sweep {
            id,
            kind,
            grid_step,
            tolerance,
            min_margin: f64::INFINITY,
            min_value: None,
            argmin: Vec::new(),
        }
    }

    /// Records `value >= bound` at `point`.
    fn at_least(&mut self, value: f64, bound: f64, point: &[f64]) {
        if self.min_value.is_none_or(|v| value < v) {
            self.min_value = Some(value);
        }
        self.margin(value - bound, point);
    }

    /// Records `lhs == rhs` at `point`.
    fn equal(&mut self, lhs: f64, rhs: f64, point: &[f64]) {
        self.margin(-(lhs - rhs).abs(), point);
    }

    fn margin(&mut self, margin: f64, point: &[f64]) {
        // A NaN margin is the worst case and sticks.
        if self.min_margin.is_nan() {
            return;
        }
        if margin.is_nan() || margin < self.min_margin {
            self.min_margin = margin;
            self.argmin = point.to_vec();
        }
    }

    fn finish(self) -> ValidationReport {
        let pass = self.min_margin >= -self.tolerance;
        ValidationReport {
            property_id: self.id.to_string(),
            kind: self.kind,
            grid_step: self.grid_step,
            min_value: self.min_value,
            min_margin: self.min_margin,
            tolerance: self.tolerance,
            pass,
            argmin_point: self.argmin,
        }
    }
}

/// Closed grid over `[lo, hi]` with both endpoints included exactly.
pub(crate) fn grid(lo: f64, hi: f64, step: f64) -> impl Iterator<Item = f64> + Clone {
    let count = ((hi - lo) / step).ceil().max(0.0) as usize;
    (0..=count).map(move |k| {
        if k == count {
            hi
        } else {
            lo + k as f64 * step
        }
    })
}

/// Runs every grid validator and returns one report per property.
pub fn verify_boundary_conditions(grid_step: f64) -> Result<Vec<ValidationReport>> {
    if !(grid_step > 0.0 && grid_step <= 1e-3) {
        return Err(Error::Parameter(format!(
            "grid step {grid_step} must lie in (0, 1e-3]"
        )));
    }
    let h = grid_step;
    let r = ratio();
    let xc = xi_c();
    let ph = phi();
    let third = 1.0 / 3.0;
    let mut out = Vec::new();

    // Threshold shape.
    let mut s = Sweep::inequality("threshold_nondecreasing", h);
    let mut prev = threshold(0.0);
    for x in grid(0.0, 1.0, h).skip(1) {
        let cur = threshold(x);
        s.at_least(cur - prev, 0.0, &[x]);
        prev = cur;
    }
    out.push(s.finish());

    let mut s = Sweep::identity("threshold_endpoints", h, IDENTITY_TOLERANCE);
    s.equal(threshold(0.0), 0.5, &[0.0]);
    s.equal(threshold(1.0), 1.0, &[1.0]);
    out.push(s.finish());

    // Inverse of the threshold and its integral.
    let mut s = Sweep::identity("threshold_inverse_identity", h, IDENTITY_TOLERANCE);
    for c in grid(0.5, 1.0, h).skip(1) {
        let x = threshold_inverse(c);
        s.equal(threshold_integral(x), r * c, &[c]);
        s.equal(threshold(x), c, &[c]);
    }
    out.push(s.finish());

    let mut s = Sweep::identity("integral_over_threshold", h, IDENTITY_TOLERANCE);
    for x in grid(0.0, 1.0, h) {
        s.equal(threshold_integral(x) / threshold(x), x.min(r), &[x]);
    }
    out.push(s.finish());

    // Right Riemann sums of the threshold overshoot its integral by at most
    // (threshold(1) - threshold(0)) / n = 1/(2n).
    let mut s = Sweep::inequality("riemann_sum_bracket", 1.0 / 1000.0);
    for n in [2usize, 10, 100, 1000] {
        let nf = n as f64;
        let mut sum = 0.0;
        for l in 1..=n {
            sum += threshold(l as f64 / nf) / nf;
            let gap = sum - threshold_integral(l as f64 / nf);
            s.margin(gap.min(1.0 / (2.0 * nf) - gap), &[nf, l as f64]);
        }
    }
    out.push(s.finish());

    // Capped and excess gain: closed forms against the split-integral route.
    let mut p_split = Sweep::identity("capped_gain_closed_form", h, IDENTITY_TOLERANCE);
    let mut q_split = Sweep::identity("excess_gain_closed_form", h, IDENTITY_TOLERANCE);
    let mut sum = Sweep::identity("capped_plus_excess", h, IDENTITY_TOLERANCE);
    for c in grid(0.5, 1.0, h).skip(1) {
        let x = threshold_inverse(c);
        p_split.equal(capped_gain(c), threshold_integral(x) + c * (1.0 - x), &[c]);
        q_split.equal(excess_gain(c), c * x - threshold_integral(x), &[c]);
        sum.equal(capped_gain(c) + excess_gain(c), c, &[c]);
    }
    out.push(p_split.finish());
    out.push(q_split.finish());
    out.push(sum.finish());

    let mut s = Sweep::inequality("integral_plus_rectangle", h);
    let xs: Vec<(f64, f64)> = grid(0.0, 1.0, h).map(|x| (x, threshold_integral(x))).collect();
    for c in grid(0.5, 1.0, h).skip(1) {
        let p = capped_gain(c);
        for &(x, big_f) in &xs {
            s.margin(big_f + c * (1.0 - x) - p, &[x, c]);
        }
    }
    out.push(s.finish());

    out.push(quadrature_report());

    let mut s = Sweep::identity("marking_budget_slope_fd", h, SLOPE_TOLERANCE);
    let fd_h = 1e-6;
    for x in grid(ph + fd_h, 0.5 - fd_h, h) {
        if (x - third).abs() <= 2.0 * fd_h {
            continue;
        }
        let fd = (marking_budget(x + fd_h) - marking_budget(x - fd_h)) / (2.0 * fd_h);
        s.equal(fd, marking_budget_slope(x), &[x]);
    }
    out.push(s.finish());

    // Marking budget conditions.
    let mut s = Sweep::inequality("budget_area_nonincreasing", h);
    let mut prev = ph * marking_budget(ph);
    for x in grid(ph, 0.5, h).skip(1) {
        let cur = x * marking_budget(x);
        s.margin(prev - cur, &[x]);
        prev = cur;
    }
    out.push(s.finish());

    let mut s = Sweep::identity("budget_area_flat", h, IDENTITY_TOLERANCE);
    for x in grid(ph, third, h) {
        s.equal(x * marking_budget(x), xc, &[x]);
    }
    out.push(s.finish());

    let mut s = Sweep::inequality("pile_plus_area", h);
    for x in grid(ph, 0.5, h) {
        s.at_least(capped_gain(pile(x)) + x * marking_budget(x), r, &[x]);
    }
    out.push(s.finish());

    let g3 = capped_gain(1.0 - ph) + 2.0 * ph * marking_budget(2.0 * ph);
    let mut s = Sweep::inequality("small_stack_level", h);
    s.at_least(g3, r, &[]);
    out.push(s.finish());
    let mut s = Sweep::inequality("small_stack_level_waypoint", h);
    s.at_least(g3, 0.593, &[]);
    out.push(s.finish());

    let mut s = Sweep::inequality("two_thirds_with_budget", h);
    for x in grid(ph, third, h) {
        s.at_least(2.0 / 3.0 - (2.0 / 3.0 - ph) * marking_budget(x), r, &[x]);
    }
    out.push(s.finish());

    // Two-dimensional condition on the S★ branch, plus the waypoints of its
    // monotonicity argument.
    let g5_tilde = |x: f64| capped_gain(1.0 - ph) + excess_gain(1.0 - x) + (x + ph - 1.0) * marking_budget(x);
    let mut s = Sweep::inequality("stack_with_large_marked", h);
    let ys: Vec<f64> = grid(ph, 2.0 * ph, h).collect();
    for x in grid(third, 0.5, h) {
        let base = g5_tilde(x);
        for &y in &ys {
            s.at_least(base + tight_adjustment(x, y).max(0.0), r, &[x, y]);
        }
    }
    out.push(s.finish());

    let mut s = Sweep::inequality("stack_with_large_marked_slope_left", h);
    for x in grid(third, 2.0 * ph, h).skip(1) {
        let slope = -1.0 - r * (1.0 - x).ln() + (x + ph - 1.0) * marking_budget_slope(x)
            + marking_budget(x);
        s.at_least(-0.2479 - slope, 0.0, &[x]);
    }
    out.push(s.finish());

    let mut s = Sweep::inequality("stack_with_large_marked_waypoint_left", h);
    s.at_least(g5_tilde(2.0 * ph), 0.5997, &[2.0 * ph]);
    out.push(s.finish());

    let g5_edge = |x: f64| {
        capped_gain(1.0 - ph) + excess_gain(1.0 - x) - (ph + 0.5) * marking_budget(x)
            + (x + 2.0 * ph - 0.5) * marking_budget(2.0 * ph)
    };
    let mut s = Sweep::inequality("stack_with_large_marked_slope_right", h);
    for x in grid(2.0 * ph, 0.5, h) {
        let slope = -1.0 - r * (1.0 - x).ln() - (ph + 0.5) * marking_budget_slope(x)
            + marking_budget(2.0 * ph);
        s.at_least(-0.0673 - slope, 0.0, &[x]);
    }
    out.push(s.finish());

    let mut s = Sweep::inequality("stack_with_large_marked_waypoint_right", h);
    s.at_least(g5_edge(0.5), 0.5934, &[0.5, 2.0 * ph]);
    out.push(s.finish());

    // Two-dimensional condition on the tight-item branch.
    let mut s = Sweep::inequality("tight_pile_with_large_marked", h);
    for x in grid(third, 0.5, h) {
        let q = excess_gain(1.0 - x);
        let bx = marking_budget(x);
        for y in grid(ph, x, h) {
            let p = pile(y);
            let v = capped_gain(p) + q + (x - p) * bx + tight_adjustment(x, y);
            s.at_least(v, r, &[x, y]);
        }
    }
    out.push(s.finish());

    let mut s = Sweep::inequality("tight_pile_diagonal_slope", h);
    for x in grid(third, 0.5, h) {
        let slope = -1.0 - r * (1.0 - x).ln() + 36.0 * xc * x - 3.0 * xc;
        s.at_least(-0.0322 - slope, 0.0, &[x]);
    }
    out.push(s.finish());

    let mut s = Sweep::inequality("doubled_pile_with_large_marked", h);
    for x in grid(third, 0.5, h) {
        let v = capped_gain(2.0 * x) + excess_gain(1.0 - x) - x * marking_budget(x);
        s.at_least(v, r, &[x]);
    }
    out.push(s.finish());

    let mut s = Sweep::inequality("adjustment_nonincreasing_in_second", h);
    let medium: Vec<f64> = grid(ph, 0.5, h).collect();
    for &x in &medium {
        let mut prev = tight_adjustment(x, medium[0]);
        for &y in &medium[1..] {
            let cur = tight_adjustment(x, y);
            s.margin(prev - cur, &[x, y]);
            prev = cur;
        }
    }
    out.push(s.finish());

    // The full-domain claim fails for y below 1/4: there
    // d/dy T = (1/2 - x) xi_c / y^2 - xi(x) can be positive. From 1/4 up it holds
    // for every x.
    let mut s = Sweep::inequality("adjustment_nonincreasing_in_second_above_quarter", h);
    let upper: Vec<f64> = grid(0.25, 0.5, h).collect();
    for &x in &medium {
        let mut prev = tight_adjustment(x, upper[0]);
        for &y in &upper[1..] {
            let cur = tight_adjustment(x, y);
            s.margin(prev - cur, &[x, y]);
            prev = cur;
        }
    }
    out.push(s.finish());

    let mut s = Sweep::identity("capped_gain_at_two_thirds", h, 1e-12);
    s.equal(capped_gain(2.0 / 3.0), r - xc, &[2.0 / 3.0]);
    out.push(s.finish());

    let mut s = Sweep::inequality("capped_gain_linear_floor", h);
    for y in grid(2.0 / 3.0, 1.0, h) {
        s.at_least(capped_gain(y), r + 3.0 * xc * y - 3.0 * xc, &[y]);
    }
    out.push(s.finish());

    Ok(out)
}

/// Midpoint-rule integration of the defining integrals of the capped and
/// excess gains, compared with their closed forms.
fn quadrature_report() -> ValidationReport {
    let panels = QUADRATURE_PANELS;
    let width = 1.0 / panels as f64;
    let mids: Vec<f64> = (0..panels)
        .map(|k| threshold((k as f64 + 0.5) * width))
        .collect();
    let mut s = Sweep::identity("gain_quadrature", 0.01, QUADRATURE_TOLERANCE);
    for c in grid(0.5, 1.0, 0.01).skip(1) {
        let (mut p, mut q) = (0.0, 0.0);
        for &t in &mids {
            p += t.min(c);
            q += (c - t).max(0.0);
        }
        s.equal(p * width, capped_gain(c), &[c, 0.0]);
        s.equal(q * width, excess_gain(c), &[c, 1.0]);
    }
    s.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_includes_endpoints() {
        let g: Vec<f64> = grid(0.0, 1.0, 0.3).collect();
        assert_eq!(g.first(), Some(&0.0));
        assert_eq!(g.last(), Some(&1.0));
        assert_eq!(g.len(), 5);
    }

    #[test]
    fn rejects_coarse_grid() {
        assert!(verify_boundary_conditions(0.01).is_err());
        assert!(verify_boundary_conditions(0.0).is_err());
    }

    #[test]
    fn only_full_domain_monotonicity_fails_on_coarse_grid() {
        let reports = verify_boundary_conditions(1e-3).unwrap();
        for r in &reports {
            let expected = r.property_id != "adjustment_nonincreasing_in_second";
            assert_eq!(r.pass, expected, "{}: {:?}", r.property_id, r);
        }
    }

    #[test]
    fn adjustment_rises_near_lower_boundary() {
        let ph = phi();
        assert!(tight_adjustment(0.45, 0.23) > tight_adjustment(0.45, ph));
        assert!(tight_adjustment(0.45, 0.30) >= tight_adjustment(0.45, 0.35));
    }

    #[test]
    fn sweep_reports_failures() {
        let mut s = Sweep::inequality("demo", 0.1);
        s.at_least(1.0, 0.5, &[0.0]);
        s.at_least(0.2, 0.5, &[1.0]);
        let r = s.finish();
        assert!(!r.pass);
        assert_eq!(r.argmin_point, vec![1.0]);
        assert!((r.min_margin + 0.3).abs() < 1e-15);
        assert_eq!(r.min_value, Some(0.2));
    }
}
