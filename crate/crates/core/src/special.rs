//! Standard normal density, distribution and quantile functions, plus the
//! logit/expit pair.
//!
//! The distribution function is evaluated with the odd power series
//! `Φ(x) = 1/2 + φ(x) Σ x^(2n+1) / (2n+1)!!` in the body and with the Mills
//! ratio continued fraction in the tails, which keeps relative accuracy for
//! tail probabilities down to the underflow limit. The quantile starts from
//! Acklam's rational approximation and takes one Halley step against `Φ`.

use crate::error::{domain, Result};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Switch point between the power series and the tail continued fraction.
const SERIES_LIMIT: f64 = 3.0;

/// Standard normal density `φ(x)`.
pub fn normal_pdf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(domain("x", x, "must be finite"));
    }
    Ok(pdf(x))
}

/// Standard normal distribution function `Φ(x)`.
pub fn normal_cdf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(domain("x", x, "must be finite"));
    }
    Ok(cdf(x))
}

/// Standard normal quantile `Φ⁻¹(p)` for `0 < p < 1`.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain("p", p, "must lie strictly between 0 and 1"));
    }
    Ok(quantile(p))
}

/// `log(p / (1 - p))` for `0 < p < 1`.
pub fn logit(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain("p", p, "must lie strictly between 0 and 1"));
    }
    Ok((p / (1.0 - p)).ln())
}

/// Inverse of [`logit`]; maps the real line onto `[0, 1]`.
pub fn expit(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
pub(crate) fn pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

pub(crate) fn cdf(x: f64) -> f64 {
    if x.abs() <= SERIES_LIMIT {
        0.5 + pdf(x) * odd_series(x)
    } else if x < 0.0 {
        upper_tail(-x)
    } else {
        1.0 - upper_tail(x)
    }
}

/// Quantile without the domain check; `p` must lie in `(0, 1)`.
pub(crate) fn quantile(p: f64) -> f64 {
    // 1 - p is exact for p >= 0.5, so reflecting keeps full precision.
    let (q, upper) = if p > 0.5 { (1.0 - p, true) } else { (p, false) };
    let mut x = acklam_lower(q);
    if q > 1e-300 {
        let e = cdf(x) - q;
        let u = e * SQRT_2PI * (0.5 * x * x).exp();
        x -= u / (1.0 + 0.5 * x * u);
    }
    if upper {
        -x
    } else {
        x
    }
}

/// `Σ x^(2n+1) / (2n+1)!!`; every term shares the sign of x.
fn odd_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut denom = 1.0;
    for _ in 0..200 {
        denom += 2.0;
        term *= x2 / denom;
        sum += term;
        if term.abs() <= sum.abs() * 1e-17 {
            break;
        }
    }
    sum
}

/// `1 - Φ(t)` for `t > 0` via `φ(t) / (t + 1/(t + 2/(t + 3/(t + ...))))`,
/// evaluated with the modified Lentz algorithm.
fn upper_tail(t: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = t;
    let mut c = f;
    let mut d = 0.0;
    for j in 1..1000 {
        let a = j as f64;
        d = t + a * d;
        if d == 0.0 {
            d = TINY;
        }
        c = t + a / c;
        if c == 0.0 {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    pdf(t) / f
}

/// Acklam's rational approximation for `q <= 0.5` (relative error ~1e-9).
fn acklam_lower(q: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;

    if q < P_LOW {
        let s = (-2.0 * q.ln()).sqrt();
        (((((C[0] * s + C[1]) * s + C[2]) * s + C[3]) * s + C[4]) * s + C[5])
            / ((((D[0] * s + D[1]) * s + D[2]) * s + D[3]) * s + 1.0)
    } else {
        let s = q - 0.5;
        let r = s * s;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * s
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(actual: f64, expected: f64, tol: f64) {
        assert!(
            (actual - expected).abs() <= tol,
            "{actual} vs {expected} (tol {tol})"
        );
    }

    fn rel_close(actual: f64, expected: f64, tol: f64) {
        assert!(
            ((actual - expected) / expected).abs() <= tol,
            "{actual} vs {expected} (rel tol {tol})"
        );
    }

    // Bisection on the implementation's own Φ: an oracle for Φ⁻¹ that shares
    // nothing with the rational approximation or the Halley step. Upper
    // quantiles bisect on the lower tail, where Φ keeps relative precision.
    fn bisect_quantile(p: f64) -> f64 {
        if p > 0.5 {
            return -bisect_quantile(1.0 - p);
        }
        let (mut lo, mut hi) = (-40.0_f64, 0.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn pdf_reference_values() {
        assert_eq!(normal_pdf(0.0).unwrap(), 0.398_942_280_401_432_7);
        close(normal_pdf(1.0).unwrap(), 0.241_970_724_519_143_35, 1e-16);
        assert_eq!(normal_pdf(-1.0).unwrap(), normal_pdf(1.0).unwrap());
    }

    #[test]
    fn cdf_reference_values() {
        // 40-digit references.
        assert_eq!(normal_cdf(0.0).unwrap(), 0.5);
        close(cdf(-1.0), 0.158_655_253_931_457_05, 1e-16);
        close(cdf(-0.3), 0.382_088_577_811_047_37, 1e-16);
        close(cdf(0.7), 0.758_036_347_776_926_97, 1e-16);
        close(cdf(3.0), 0.998_650_101_968_369_9, 1e-15);
        close(cdf(4.5), 0.999_996_602_326_875_3, 1e-15);
        close(cdf(1.959_963_984_540_054), 0.975, 1e-15);
    }

    #[test]
    fn cdf_tail_is_relatively_accurate() {
        // Inside the series region the sum cancels against 1/2.
        rel_close(cdf(-2.5), 6.209_665_325_776_135e-3, 1e-13);
        rel_close(cdf(-3.0), 1.349_898_031_630_094_5e-3, 1e-13);
        rel_close(cdf(-3.5), 2.326_290_790_355_250_4e-4, 1e-14);
        rel_close(cdf(-5.0), 2.866_515_718_791_939e-7, 1e-14);
        rel_close(cdf(-8.0), 6.220_960_574_271_784e-16, 1e-13);
        rel_close(cdf(-20.0), 2.753_624_118_606_233_7e-89, 1e-12);
        rel_close(cdf(-37.0), 5.725_571_222_524_577e-300, 1e-11);
    }

    #[test]
    fn quantile_reference_values() {
        assert_eq!(normal_quantile(0.5).unwrap(), 0.0);
        close(quantile(0.975), 1.959_963_984_540_054, 1e-14);
        close(quantile(0.8), 0.841_621_233_572_914_2, 1e-14);
        close(quantile(0.3), -0.524_400_512_708_040_8, 1e-14);
        close(quantile(0.025), -1.959_963_984_540_054, 1e-14);
        close(quantile(1e-3), -3.090_232_306_167_813_5, 1e-13);
        close(quantile(1e-6), -4.753_424_308_822_899, 1e-12);
        close(quantile(1e-12), -7.034_483_825_301_132, 1e-10);
        close(quantile(0.999_999), 4.753_424_308_822_899, 1e-9);
    }

    #[test]
    fn quantile_matches_bisection_oracle() {
        for &p in &[
            1e-12,
            1e-9,
            1e-4,
            0.01,
            0.2,
            0.5,
            0.7,
            0.975,
            0.999,
            1.0 - 1e-12,
        ] {
            close(quantile(p), bisect_quantile(p), 1e-9);
        }
    }

    #[test]
    fn rejects_out_of_domain() {
        assert!(normal_pdf(f64::NAN).is_err());
        assert!(normal_cdf(f64::INFINITY).is_err());
        for p in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(normal_quantile(p).is_err());
            assert!(logit(p).is_err());
        }
    }

    #[test]
    fn logit_expit_values() {
        assert_eq!(logit(0.5).unwrap(), 0.0);
        assert_eq!(expit(0.0), 0.5);
        close(logit(0.65).unwrap(), 0.619_039_208_406_223_5, 1e-15);
        assert!(expit(-800.0) >= 0.0 && expit(800.0) <= 1.0);
    }

    #[test]
    fn cdf_and_quantile_increase_on_grid() {
        // Beyond x = 6 the distribution function is within a few ulps of 1.
        let xs: Vec<f64> = (-800..=600).map(|i| i as f64 * 0.01).collect();
        for w in xs.windows(2) {
            assert!(cdf(w[1]) > cdf(w[0]), "cdf not increasing at {}", w[0]);
        }
        let ps: Vec<f64> = (1..2000).map(|i| i as f64 / 2000.0).collect();
        for w in ps.windows(2) {
            assert!(quantile(w[1]) > quantile(w[0]));
        }
    }

    proptest! {
        #[test]
        fn round_trip(p in 1e-10f64..(1.0 - 1e-10)) {
            let x = quantile(p);
            prop_assert!((cdf(x) - p).abs() <= 1e-9);
        }

        #[test]
        fn cdf_reflection(x in -10.0f64..10.0) {
            prop_assert!((cdf(-x) - (1.0 - cdf(x))).abs() <= 1e-15);
        }

        // Dyadic p keeps 1 - p exact.
        #[test]
        fn quantile_antisymmetry(k in 1u64..(1 << 20)) {
            let p = k as f64 / (1u64 << 20) as f64;
            prop_assert!((quantile(p) + quantile(1.0 - p)).abs() <= 1e-12);
        }

        #[test]
        fn expit_inverts_logit(p in 1e-8f64..(1.0 - 1e-8)) {
            prop_assert!((expit(logit(p).unwrap()) - p).abs() <= 1e-14);
        }
    }
}
