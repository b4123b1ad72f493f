use std::fmt::Write as _;

/// Absolute slack below which a constraint counts as violated.
pub const SLACK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Resource {
    Bandwidth,
    Frequency,
}

impl Resource {
    fn tag(self) -> &'static str {
        match self {
            Resource::Bandwidth => "b",
            Resource::Frequency => "f",
        }
    }
}

/// Type `(m, n)` gets negative utility from its own item.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IrViolation {
    pub m: usize,
    pub n: usize,
    /// `V_{m,n}^{m,n}`.
    pub slack: f64,
}

/// Type `(m, n)` strictly prefers the item designed for `(p, q)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcViolation {
    pub m: usize,
    pub n: usize,
    pub p: usize,
    pub q: usize,
    /// `V_{m,n}^{m,n} - V_{m,n}^{p,q}`.
    pub slack: f64,
}

/// How a resource grid fails to grow with the type index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonotoneRule {
    /// `x_{i,j} <= max{x_{i,n}, x_{m,j}}` for `m > i`, `n > j`.
    CornerBelowMax,
    /// `max{x_{i,n}, x_{m,j}} <= x_{m,n}` for `m > i`, `n > j`.
    MaxBelowCorner,
    /// `x` decreases between neighbouring types along one axis.
    Axis,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotoneViolation {
    pub resource: Resource,
    pub rule: MonotoneRule,
    pub lower: (usize, usize),
    pub upper: (usize, usize),
    /// Negative amount by which the inequality fails.
    pub slack: f64,
}

/// Constraint violations found in a contract menu.
///
/// Indices are zero-based here; the CSV listing reports them one-based.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeasibilityReport {
    pub ir_violations: Vec<IrViolation>,
    pub ic_violations: Vec<IcViolation>,
    pub monotonicity_violations: Vec<MonotoneViolation>,
    /// Number of inequalities that were evaluated.
    pub constraints_checked: usize,
}

impl FeasibilityReport {
    pub fn feasible(&self) -> bool {
        self.ir_violations.is_empty() && self.ic_violations.is_empty() && self.monotonicity_violations.is_empty()
    }

    pub fn merge(mut self, other: FeasibilityReport) -> Self {
        self.ir_violations.extend(other.ir_violations);
        self.ic_violations.extend(other.ic_violations);
        self.monotonicity_violations.extend(other.monotonicity_violations);
        self.constraints_checked += other.constraints_checked;
        self
    }

    pub fn violation_count(&self) -> usize {
        self.ir_violations.len() + self.ic_violations.len() + self.monotonicity_violations.len()
    }

    /// Violation listing with columns `kind,indices,slack`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,indices,slack\n");
        for v in &self.ir_violations {
            let _ = writeln!(out, "ir,{};{},{}", v.m + 1, v.n + 1, v.slack);
        }
        for v in &self.ic_violations {
            let _ = writeln!(out, "ic,{};{};{};{},{}", v.m + 1, v.n + 1, v.p + 1, v.q + 1, v.slack);
        }
        for v in &self.monotonicity_violations {
            let kind = match v.rule {
                MonotoneRule::CornerBelowMax => "monotone_lower",
                MonotoneRule::MaxBelowCorner => "monotone_upper",
                MonotoneRule::Axis => "monotone_axis",
            };
            let _ = writeln!(
                out,
                "{kind}_{},{};{};{};{},{}",
                v.resource.tag(),
                v.lower.0 + 1,
                v.lower.1 + 1,
                v.upper.0 + 1,
                v.upper.1 + 1,
                v.slack
            );
        }
        out
    }
}
