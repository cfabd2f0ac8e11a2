//! Globally adaptive Gauss–Kronrod (10/21) quadrature over unions of finite
//! and semi-infinite intervals, plus a cycle-by-cycle Fourier-sine integrator
//! with Wynn ε extrapolation for slowly decaying oscillatory tails.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::PI;

use libm::sin;

use crate::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Integration domain: consecutive points `p₀ < p₁ < … < pₙ`, where `p₀` may
/// be `-∞` and `pₙ` may be `+∞`. Interior points are breakpoints the
/// integrator never straddles (kinks, peaks, known scales).
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    points: Vec<f64>,
}

impl Domain {
    pub fn finite(lo: f64, hi: f64) -> Self {
        Self {
            points: alloc::vec![lo, hi],
        }
    }

    /// `[lo, ∞)`
    pub fn semi_infinite(lo: f64) -> Self {
        Self {
            points: alloc::vec![lo, f64::INFINITY],
        }
    }

    pub fn real_line() -> Self {
        Self {
            points: alloc::vec![f64::NEG_INFINITY, 0.0, f64::INFINITY],
        }
    }

    /// Arbitrary sorted point list.
    pub fn from_points(points: Vec<f64>) -> Self {
        Self { points }
    }

    /// Insert interior breakpoints; points outside the domain are ignored.
    pub fn with_breaks(mut self, breaks: &[f64]) -> Self {
        let lo = self.points[0];
        let hi = *self.points.last().unwrap_or(&lo);
        for &b in breaks {
            if b > lo && b < hi && b.is_finite() && !self.points.contains(&b) {
                self.points.push(b);
            }
        }
        self.points.sort_by(f64::total_cmp);
        self
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    fn validate(&self) -> Result<()> {
        if self.points.len() < 2 {
            return Err(Error::Invalid("domain needs at least two points"));
        }
        for w in self.points.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::Invalid("domain points must be strictly increasing"));
            }
        }
        if self.points[1..self.points.len() - 1].iter().any(|p| !p.is_finite()) {
            return Err(Error::Invalid("interior domain points must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSpec {
    pub domain: Domain,
    pub relative_tolerance: f64,
    /// Absolute floor on the error target; zero means purely relative.
    pub absolute_tolerance: f64,
    pub max_subdivisions: usize,
}

impl QuadratureSpec {
    pub fn new(domain: Domain) -> Self {
        Self {
            domain,
            relative_tolerance: 1e-10,
            absolute_tolerance: 0.0,
            max_subdivisions: 2000,
        }
    }

    pub fn finite(lo: f64, hi: f64) -> Self {
        Self::new(Domain::finite(lo, hi))
    }

    pub fn semi_infinite(lo: f64) -> Self {
        Self::new(Domain::semi_infinite(lo))
    }

    pub fn real_line() -> Self {
        Self::new(Domain::real_line())
    }

    pub fn with_breaks(mut self, breaks: &[f64]) -> Self {
        self.domain = self.domain.with_breaks(breaks);
        self
    }

    pub fn relative_tolerance(mut self, tol: f64) -> Self {
        self.relative_tolerance = tol;
        self
    }

    pub fn absolute_tolerance(mut self, tol: f64) -> Self {
        self.absolute_tolerance = tol;
        self
    }

    pub fn max_subdivisions(mut self, n: usize) -> Self {
        self.max_subdivisions = n;
        self
    }

    fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        if !(self.relative_tolerance > 0.0) {
            return Err(Error::domain(
                "relative_tolerance",
                self.relative_tolerance,
                "must be positive",
            ));
        }
        if !(self.absolute_tolerance >= 0.0) {
            return Err(Error::domain(
                "absolute_tolerance",
                self.absolute_tolerance,
                "must be nonnegative",
            ));
        }
        if self.max_subdivisions < 1 {
            return Err(Error::Invalid("max_subdivisions must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error: f64,
    pub intervals: usize,
}

/// Adaptive integral of `f` over `spec.domain`. On failure to converge the
/// error carries the best estimate.
pub fn quad_adaptive<F: Fn(f64) -> f64>(f: F, spec: &QuadratureSpec) -> Result<f64> {
    quad_adaptive_detailed(f, spec).map(|r| r.value)
}

#[derive(Debug, Clone, Copy)]
enum Segment {
    Finite,
    /// `[x, ∞)` mapped from `t ∈ (0, 1]` by `x + (1 − t)/t`.
    Upper(f64),
    /// `(-∞, x]` mapped from `t ∈ (0, 1]` by `x − (1 − t)/t`.
    Lower(f64),
}

impl Segment {
    #[inline]
    fn eval<F: Fn(f64) -> f64>(self, f: &F, t: f64) -> f64 {
        match self {
            Segment::Finite => f(t),
            Segment::Upper(x) => {
                let s = (1.0 - t) / t;
                f(x + s) / (t * t)
            }
            Segment::Lower(x) => {
                let s = (1.0 - t) / t;
                f(x - s) / (t * t)
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    segment: Segment,
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.lo.total_cmp(&self.lo))
    }
}

/// One G10/K21 panel: (Kronrod estimate, error estimate).
fn kronrod21<F: Fn(f64) -> f64>(f: &F, segment: Segment, lo: f64, hi: f64) -> (f64, f64) {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = segment.eval(f, center);
    let mut res_k = WGK[10] * fc;
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = segment.eval(f, center - dx);
        let f2 = segment.eval(f, center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let scale = half.abs();
    let result = res_k * half;
    res_abs *= scale;
    res_asc *= scale;
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf_min1();
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (result, err)
}

trait PowMin1 {
    fn powf_min1(self) -> f64;
}

impl PowMin1 for f64 {
    /// `min(1, x^1.5)`
    #[inline]
    fn powf_min1(self) -> f64 {
        let p = self * libm::sqrt(self);
        if p < 1.0 {
            p
        } else {
            1.0
        }
    }
}

/// Like [`quad_adaptive`], returning the error estimate and interval count.
pub fn quad_adaptive_detailed<F: Fn(f64) -> f64>(f: F, spec: &QuadratureSpec) -> Result<QuadratureResult> {
    spec.validate()?;
    let mut heap = BinaryHeap::new();
    let mut settled: Vec<Piece> = Vec::new();

    let points = spec.domain.points();
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        let pieces: [(Segment, f64, f64); 2] = match (a.is_finite(), b.is_finite()) {
            (true, true) => [(Segment::Finite, a, b), (Segment::Finite, 0.0, 0.0)],
            (true, false) => [(Segment::Upper(a), 0.0, 1.0), (Segment::Finite, 0.0, 0.0)],
            (false, true) => [(Segment::Lower(b), 0.0, 1.0), (Segment::Finite, 0.0, 0.0)],
            (false, false) => [(Segment::Lower(0.0), 0.0, 1.0), (Segment::Upper(0.0), 0.0, 1.0)],
        };
        for &(segment, lo, hi) in pieces.iter().filter(|p| p.2 > p.1) {
            let (value, error) = kronrod21(&f, segment, lo, hi);
            heap.push(Piece {
                segment,
                lo,
                hi,
                value,
                error,
            });
        }
    }

    let totals = |heap: &BinaryHeap<Piece>, settled: &[Piece]| {
        let mut value = 0.0;
        let mut error = 0.0;
        for p in heap.iter().chain(settled.iter()) {
            value += p.value;
            error += p.error;
        }
        (value, error)
    };

    loop {
        let (value, error) = totals(&heap, &settled);
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::Accuracy {
                estimate: value,
                abs_error: error,
            });
        }
        let target = spec.absolute_tolerance.max(spec.relative_tolerance * value.abs());
        let count = heap.len() + settled.len();
        if error <= target {
            return Ok(QuadratureResult {
                value,
                abs_error: error,
                intervals: count,
            });
        }
        if count >= spec.max_subdivisions {
            return Err(Error::Accuracy {
                estimate: value,
                abs_error: error,
            });
        }
        let Some(worst) = heap.pop() else {
            // everything left is at roundoff resolution
            return Err(Error::Accuracy {
                estimate: value,
                abs_error: error,
            });
        };
        let mid = 0.5 * (worst.lo + worst.hi);
        if !(mid > worst.lo && mid < worst.hi) || (worst.hi - worst.lo) < 1e-15 * worst.hi.abs() {
            settled.push(worst);
            continue;
        }
        for (lo, hi) in [(worst.lo, mid), (mid, worst.hi)] {
            let (value, error) = kronrod21(&f, worst.segment, lo, hi);
            heap.push(Piece {
                segment: worst.segment,
                lo,
                hi,
                value,
                error,
            });
        }
    }
}

/// `∫₀^∞ g(x) sin(ωx) dx` for `g` decaying (possibly slowly) at infinity.
///
/// Each half period `[kπ/ω, (k+1)π/ω]` is integrated adaptively; the
/// partial sums are extrapolated with Wynn's ε algorithm. `per_cycle`
/// carries the tolerances used on each half period (its domain is ignored).
pub fn quad_fourier_sine<G: Fn(f64) -> f64>(
    g: G,
    omega: f64,
    per_cycle: &QuadratureSpec,
    max_cycles: usize,
) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::domain("omega", omega, "must be positive"));
    }
    let period = PI / omega;
    let mut partial = Vec::with_capacity(max_cycles);
    let mut running = 0.0;
    let mut previous_estimate = f64::NAN;
    let mut agreements = 0;
    for k in 0..max_cycles {
        let lo = k as f64 * period;
        let spec = QuadratureSpec {
            domain: Domain::finite(lo, lo + period),
            ..per_cycle.clone()
        };
        let piece = quad_adaptive(|x| g(x) * sin(omega * x), &spec)?;
        running += piece;
        partial.push(running);
        if partial.len() < 4 {
            continue;
        }
        let estimate = wynn_epsilon(&partial);
        let tol = per_cycle.relative_tolerance * estimate.abs() + per_cycle.absolute_tolerance;
        if (estimate - previous_estimate).abs() <= tol {
            agreements += 1;
            if agreements >= 2 {
                return Ok(estimate);
            }
        } else {
            agreements = 0;
        }
        previous_estimate = estimate;
    }
    Err(Error::Accuracy {
        estimate: previous_estimate,
        abs_error: f64::NAN,
    })
}

/// Wynn ε-algorithm limit estimate of a sequence of partial sums.
pub fn wynn_epsilon(sums: &[f64]) -> f64 {
    let n = sums.len();
    if n < 3 {
        return *sums.last().unwrap_or(&0.0);
    }
    // prev = ε_{k-1} column, cur = ε_k column; columns shrink by one each step.
    let mut prev: Vec<f64> = alloc::vec![0.0; n + 1];
    let mut cur: Vec<f64> = sums.to_vec();
    let mut best = sums[n - 1];
    let mut k = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let diff = cur[i + 1] - cur[i];
            if diff == 0.0 {
                return if k % 2 == 0 { cur[i + 1] } else { best };
            }
            next.push(prev[i + 1] + 1.0 / diff);
        }
        prev = cur;
        cur = next;
        k += 1;
        if k % 2 == 0 {
            best = *cur.last().unwrap_or(&best);
        }
    }
    best
}
