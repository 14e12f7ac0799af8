//! Explicit two-atom data breaking the bilinear `X^{s,b}` estimate for `u u_xxx`.
//!
//! Atoms are unit-width modulation indicators on single frequencies. Their
//! convolution is a unit-height tent of width two on the output frequency,
//! centered at the modulation `-H2(n1, n2)`; centers are stored as exact
//! integers, so only the local profile is integrated numerically.
//!
//! * high branch: `u` on `n = 1`, `v` on `n = N - 1`, output on `N`; the ratio
//!   `||u v_xxx||_{X^{s,b-1}} / (||u||_{X^{s,b}} ||v||_{X^{s,b}})` grows like `N^{4b-1}`.
//! * low branch, in dual form: `u` on `-(N - 1)`, `v` on `N`, output on `1`; the
//!   ratio `||u v_xxx||_{X^{-s,-b}} / (||u||_{X^{-s,1-b}} ||v||_{X^{s,b}})` grows like `N^{3-4b}`.
//!
//! The space-time transform constant is dropped: it is the same for every `N`.

use alloc::vec::Vec;
use num_bigint::BigInt;
use num_traits::Float;

use crate::resonance::{bigint_to_f64, h2};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    High,
    Low,
}

impl Branch {
    /// Exponent of `N` predicted for the ratio.
    pub fn expected_slope(self, b: f64) -> f64 {
        match self {
            Branch::High => 3.0 + 4.0 * (b - 1.0),
            Branch::Low => 3.0 - 4.0 * b,
        }
    }

    /// The branch whose ratio blows up for this `b`.
    pub fn failing(b: f64) -> Self {
        if b > 0.25 {
            Branch::High
        } else {
            Branch::Low
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Branch::High => "high",
            Branch::Low => "low",
        }
    }
}

/// Local modulation profile of an atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// `1` on `[-1/2, 1/2]`.
    Indicator,
    /// `max(0, 1 - |y|)`, the self-convolution of the indicator.
    Tent,
}

impl Shape {
    fn support(self) -> f64 {
        match self {
            Shape::Indicator => 0.5,
            Shape::Tent => 1.0,
        }
    }

    fn eval(self, y: f64) -> f64 {
        match self {
            Shape::Indicator => {
                if y.abs() <= 0.5 {
                    1.0
                } else {
                    0.0
                }
            }
            Shape::Tent => (1.0 - y.abs()).max(0.0),
        }
    }
}

/// `amplitude * shape(tau - n^5 - center)` on the single frequency `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulatedAtom {
    pub n: i64,
    pub center: BigInt,
    pub shape: Shape,
    pub amplitude: f64,
}

impl ModulatedAtom {
    pub fn indicator(n: i64) -> Self {
        Self {
            n,
            center: BigInt::from(0),
            shape: Shape::Indicator,
            amplitude: 1.0,
        }
    }

    /// `int |f|^2 d tau`.
    pub fn l2_mass(&self, quadrature: usize) -> f64 {
        self.amplitude * self.amplitude * profile_integral(self.shape, 0.0, 0.0, quadrature)
    }
}

fn japanese(x: f64) -> f64 {
    (1.0 + x * x).sqrt()
}

/// `int shape(y)^2 <c + y>^{2b} dy` by composite Simpson on each linear piece.
fn profile_integral(shape: Shape, center: f64, b: f64, quadrature: usize) -> f64 {
    let m = quadrature.max(2).next_multiple_of(2);
    let a = shape.support();
    let f = |y: f64| {
        let v = shape.eval(y);
        v * v * japanese(center + y).powf(2.0 * b)
    };
    let mut total = 0.0;
    for (lo, hi) in [(-a, 0.0), (0.0, a)] {
        let h = (hi - lo) / m as f64;
        let mut acc = f(lo) + f(hi);
        for i in 1..m {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(lo + i as f64 * h);
        }
        total += acc * h / 3.0;
    }
    total
}

/// `||f||_{X^{s,b}} = (<n>^{2s} int <tau - n^5>^{2b} |f|^2 d tau)^{1/2}`.
pub fn xsb_norm(atom: &ModulatedAtom, s: f64, b: f64, quadrature: usize) -> f64 {
    let c = bigint_to_f64(&atom.center);
    let weight = japanese(atom.n as f64).powf(s);
    weight * atom.amplitude.abs() * profile_integral(atom.shape, c, b, quadrature).sqrt()
}

/// Parameters of one evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CounterexampleSpec {
    pub n: i64,
    pub b: f64,
    pub s: f64,
    pub branch: Branch,
    /// Simpson subintervals per linear piece of a profile.
    pub quadrature: usize,
}

impl CounterexampleSpec {
    pub fn new(n: i64, b: f64, s: f64, branch: Branch) -> Result<Self> {
        if n < 8 {
            return Err(Error::FrequencyTooSmall(n));
        }
        if !(b.is_finite() && s.is_finite()) {
            return Err(Error::InvalidConfig("b and s must be finite"));
        }
        Ok(Self {
            n,
            b,
            s,
            branch,
            quadrature: 256,
        })
    }
}

/// The atoms `(u, v)` of the branch.
pub fn build_pair(spec: &CounterexampleSpec) -> (ModulatedAtom, ModulatedAtom) {
    let n = spec.n;
    match spec.branch {
        Branch::High => (ModulatedAtom::indicator(1), ModulatedAtom::indicator(n - 1)),
        Branch::Low => (ModulatedAtom::indicator(-(n - 1)), ModulatedAtom::indicator(n)),
    }
}

/// Space-time transform of `u v_xxx` for two indicator atoms: a tent on
/// `n1 + n2` centered at `-H2(n1, n2)`, scaled by `|n2|^3`.
pub fn bilinear_output(u: &ModulatedAtom, v: &ModulatedAtom) -> Result<ModulatedAtom> {
    if u.shape != Shape::Indicator || v.shape != Shape::Indicator {
        return Err(Error::InvalidConfig("bilinear output is defined for indicator atoms"));
    }
    let d = v.n as f64;
    Ok(ModulatedAtom {
        n: u.n + v.n,
        center: &u.center + &v.center - h2(u.n, v.n),
        shape: Shape::Tent,
        amplitude: u.amplitude * v.amplitude * (d * d * d).abs(),
    })
}

/// One rung of a ratio scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioRow {
    pub n: i64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub log2ratio: f64,
}

/// Both sides of the failed estimate for one `N`.
pub fn evaluate(spec: &CounterexampleSpec) -> Result<RatioRow> {
    let (u, v) = build_pair(spec);
    let out = bilinear_output(&u, &v)?;
    let (s, b, q) = (spec.s, spec.b, spec.quadrature);
    let (lhs, rhs) = match spec.branch {
        Branch::High => (xsb_norm(&out, s, b - 1.0, q), xsb_norm(&u, s, b, q) * xsb_norm(&v, s, b, q)),
        Branch::Low => (xsb_norm(&out, -s, -b, q), xsb_norm(&u, -s, 1.0 - b, q) * xsb_norm(&v, s, b, q)),
    };
    let ratio = lhs / rhs;
    Ok(RatioRow {
        n: spec.n,
        lhs,
        rhs,
        ratio,
        log2ratio: ratio.log2(),
    })
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Fitted growth of the ratio along an `N` ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioScan {
    pub b: f64,
    pub s: f64,
    pub branch: Branch,
    pub rows: Vec<RatioRow>,
    pub slope: f64,
    pub intercept: f64,
    pub tolerance: f64,
}

impl RatioScan {
    pub fn expected_slope(&self) -> f64 {
        self.branch.expected_slope(self.b)
    }

    pub fn passed(&self) -> bool {
        (self.slope - self.expected_slope()).abs() <= self.tolerance
    }
}

/// Slope tolerance of a scan.
pub const SLOPE_TOLERANCE: f64 = 0.2;

/// `log2` ratio against `log2 N` over the ladder, fitted by least squares.
pub fn ratio_scan(b: f64, s: f64, branch: Branch, ladder: &[i64]) -> Result<RatioScan> {
    if ladder.len() < 4 {
        return Err(Error::LadderTooShort(ladder.len()));
    }
    let rows = ladder
        .iter()
        .map(|&n| evaluate(&CounterexampleSpec::new(n, b, s, branch)?))
        .collect::<Result<Vec<_>>>()?;
    let x: Vec<f64> = rows.iter().map(|r| (r.n as f64).log2()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.log2ratio).collect();
    let (slope, intercept) = fit_line(&x, &y);
    Ok(RatioScan {
        b,
        s,
        branch,
        rows,
        slope,
        intercept,
        tolerance: SLOPE_TOLERANCE,
    })
}

/// `N = 2^lo, ..., 2^hi`.
pub fn dyadic_ladder(lo: u32, hi: u32) -> Vec<i64> {
    (lo..=hi).map(|e| 1i64 << e).collect()
}

/// The `b` where the fitted slopes of one branch cross zero, from a linear
/// fit of slope against `b`.
pub fn threshold(scans: &[RatioScan]) -> Result<f64> {
    if scans.len() < 2 {
        return Err(Error::InvalidConfig("a threshold fit needs scans at two values of b"));
    }
    let x: Vec<f64> = scans.iter().map(|s| s.b).collect();
    let y: Vec<f64> = scans.iter().map(|s| s.slope).collect();
    let (m, c) = fit_line(&x, &y);
    Ok(-c / m)
}

/// The estimate needs `b <= high` and `b >= low`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdReport {
    pub high: f64,
    pub low: f64,
}

impl ThresholdReport {
    /// No `b` satisfies both branch conditions.
    pub fn empty_intersection(&self) -> bool {
        self.high < self.low
    }
}

/// Thresholds from high-branch and low-branch scans.
pub fn threshold_report(high: &[RatioScan], low: &[RatioScan]) -> Result<ThresholdReport> {
    let stray = high
        .iter()
        .find(|s| s.branch != Branch::High)
        .or_else(|| low.iter().find(|s| s.branch != Branch::Low));
    if let Some(s) = stray {
        return Err(Error::BranchMismatch {
            branch: s.branch.name(),
            b: s.b,
        });
    }
    Ok(ThresholdReport {
        high: threshold(high)?,
        low: threshold(low)?,
    })
}
