//! Exponentially scaled modified Bessel functions `e^z K₀(z)`, `e^z K₁(z)`
//! and `e^{-x} I₁(x)`.
//!
//! The model's arguments reach `2μ² ~ 10¹⁸`, where the unscaled functions
//! underflow, so the scaled forms are the primitives. Three regimes:
//! ascending series for `z ≤ 2`, Steed's continued fraction (Temme's CF2)
//! for `2 < z < 20`, and the asymptotic expansion beyond.

use core::f64::consts::PI;

use libm::{exp, log, sqrt};

use crate::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_MAX: f64 = 2.0;
const ASYMPTOTIC_MIN: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BesselOrder {
    Zero,
    One,
}

impl BesselOrder {
    pub fn nu(self) -> u32 {
        match self {
            BesselOrder::Zero => 0,
            BesselOrder::One => 1,
        }
    }
}

/// `e^z K_ν(z)` together with its argument and order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledBesselValue {
    pub order: BesselOrder,
    pub z: f64,
    pub value: f64,
}

/// Checked evaluation of `e^z K_ν(z)` for `ν ∈ {0, 1}`.
pub fn bessel_k_scaled(order: BesselOrder, z: f64) -> Result<ScaledBesselValue> {
    if !(z > 0.0) || z.is_infinite() {
        return Err(Error::domain("z", z, "z > 0 and finite"));
    }
    let value = match order {
        BesselOrder::Zero => k0e(z),
        BesselOrder::One => k1e(z),
    };
    Ok(ScaledBesselValue { order, z, value })
}

/// `e^z K₀(z)`. Returns NaN for `z ≤ 0`.
pub fn k0e(z: f64) -> f64 {
    scaled_pair(z).0
}

/// `e^z K₁(z)`. Returns NaN for `z ≤ 0`.
pub fn k1e(z: f64) -> f64 {
    scaled_pair(z).1
}

/// `e^z K₀(z)` and `e^z K₁(z)` in one pass.
pub fn k01e(z: f64) -> (f64, f64) {
    scaled_pair(z)
}

/// `e^z [K₁(z) − K₀(z)]` without the cancellation that plain subtraction
/// suffers at large `z`, where the difference is `O(1/z)` of either term.
pub fn k1e_minus_k0e(z: f64) -> f64 {
    if z >= ASYMPTOTIC_MIN {
        asymptotic_difference(z)
    } else {
        let (k0, k1) = scaled_pair(z);
        k1 - k0
    }
}

fn scaled_pair(z: f64) -> (f64, f64) {
    if !(z > 0.0) {
        return (f64::NAN, f64::NAN);
    }
    if z <= SERIES_MAX {
        let (k0, k1) = ascending_series(z);
        let scale = exp(z);
        (k0 * scale, k1 * scale)
    } else if z < ASYMPTOTIC_MIN {
        steed_cf2(z)
    } else {
        (asymptotic(0, z), asymptotic(1, z))
    }
}

/// Unscaled K₀, K₁ from the logarithmic ascending series.
fn ascending_series(z: f64) -> (f64, f64) {
    let y = 0.25 * z * z;
    let ln_half = log(0.5 * z);

    // term_k = y^k / (k!)^2 and term1_k = y^k / (k! (k+1)!)
    let mut term = 1.0;
    let mut term1 = 1.0;
    let mut harmonic = 0.0;
    let mut i0 = 1.0;
    let mut i1_sum = 1.0;
    let mut k0_sum = 0.0;
    // ψ(k+1) + ψ(k+2) = H_k + H_{k+1} − 2γ
    let mut k1_sum = 1.0 - 2.0 * EULER_GAMMA;
    for k in 1..60 {
        let kf = k as f64;
        term *= y / (kf * kf);
        term1 *= y / (kf * (kf + 1.0));
        harmonic += 1.0 / kf;
        i0 += term;
        i1_sum += term1;
        k0_sum += term * harmonic;
        let next = k1_sum + term1 * (2.0 * harmonic + 1.0 / (kf + 1.0) - 2.0 * EULER_GAMMA);
        let done = term < 1e-18 * i0 && (next - k1_sum).abs() < 1e-18 * k1_sum.abs();
        k1_sum = next;
        if done {
            break;
        }
    }
    let i1 = 0.5 * z * i1_sum;
    let k0 = -(ln_half + EULER_GAMMA) * i0 + k0_sum;
    let k1 = 1.0 / z + ln_half * i1 - 0.25 * z * k1_sum;
    (k0, k1)
}

/// Steed's algorithm for Temme's second continued fraction, order zero,
/// giving scaled K₀ and K₁. Valid for z ≳ 2.
fn steed_cf2(x: f64) -> (f64, f64) {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..10_000 {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    h *= a1;
    let k0 = sqrt(PI / (2.0 * x)) / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

fn asymptotic(nu: u32, z: f64) -> f64 {
    let mu = 4.0 * (nu * nu) as f64;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..80 {
        let odd = (2 * k - 1) as f64;
        let next = term * (mu - odd * odd) / (8.0 * k as f64 * z);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sqrt(PI / (2.0 * z)) * sum
}

fn asymptotic_difference(z: f64) -> f64 {
    let mut t0 = 1.0;
    let mut t1 = 1.0;
    let mut sum = 0.0;
    for k in 1..80 {
        let odd = (2 * k - 1) as f64;
        let scale = 8.0 * k as f64 * z;
        let n0 = t0 * (-odd * odd) / scale;
        let n1 = t1 * (4.0 - odd * odd) / scale;
        let diff = n1 - n0;
        if k > 1 && diff.abs() >= (t1 - t0).abs() {
            break;
        }
        t0 = n0;
        t1 = n1;
        sum += diff;
        if diff.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sqrt(PI / (2.0 * z)) * sum
}

/// `e^{-|x|} I₁(x)`.
pub fn i1e(x: f64) -> f64 {
    let ax = x.abs();
    let value = if ax <= ASYMPTOTIC_MIN {
        let y = 0.25 * ax * ax;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..200 {
            let kf = k as f64;
            term *= y / (kf * (kf + 1.0));
            sum += term;
            if term < 1e-18 * sum {
                break;
            }
        }
        0.5 * ax * sum * exp(-ax)
    } else {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..80 {
            let odd = (2 * k - 1) as f64;
            let next = -term * (4.0 - odd * odd) / (8.0 * k as f64 * ax);
            if next.abs() >= term.abs() {
                break;
            }
            term = next;
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum / sqrt(2.0 * PI * ax)
    };
    if x < 0.0 {
        -value
    } else {
        value
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn rejects_nonpositive_argument() {
        assert!(bessel_k_scaled(BesselOrder::Zero, 0.0).is_err());
        assert!(bessel_k_scaled(BesselOrder::One, -1.0).is_err());
        assert!(bessel_k_scaled(BesselOrder::One, f64::NAN).is_err());
    }

    #[test]
    fn regimes_join_continuously() {
        for &edge in &[SERIES_MAX, ASYMPTOTIC_MIN] {
            let below = k01e(edge * (1.0 - 1e-14));
            let above = k01e(edge * (1.0 + 1e-14));
            assert!(rel(below.0, above.0) < 1e-12, "K0 jump at {edge}");
            assert!(rel(below.1, above.1) < 1e-12, "K1 jump at {edge}");
        }
    }

    #[test]
    fn huge_arguments_do_not_overflow() {
        let z = 2e18;
        let k1 = k1e(z);
        let leading = sqrt(PI / (2.0 * z));
        assert!(k1.is_finite() && k1 > 0.0);
        assert!(rel(k1, leading) < 1e-15);
    }

    #[test]
    fn difference_matches_plain_subtraction_where_safe() {
        for &z in &[20.0, 35.0, 60.0] {
            let (k0, k1) = k01e(z);
            assert!(rel(k1e_minus_k0e(z), k1 - k0) < 1e-12, "z = {z}");
        }
        // leading behaviour e^z(K1 - K0) ~ sqrt(pi/2z) / (2z)
        let z = 1e12;
        let lead = sqrt(PI / (2.0 * z)) / (2.0 * z);
        assert!(rel(k1e_minus_k0e(z), lead) < 1e-11);
    }

    #[test]
    fn i1e_small_and_large() {
        // I1(x) ~ x/2 near zero
        assert!(rel(i1e(1e-6), 0.5e-6 * exp(-1e-6)) < 1e-9);
        assert_eq!(i1e(0.0), 0.0);
        assert!(rel(i1e(-3.0), -i1e(3.0)) < 1e-15);
        let below = i1e(ASYMPTOTIC_MIN * (1.0 - 1e-14));
        let above = i1e(ASYMPTOTIC_MIN * (1.0 + 1e-14));
        assert!(rel(below, above) < 1e-12);
    }
}
