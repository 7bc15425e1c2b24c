//! Soft-limiter power amplifier model.
//!
//! Each antenna drives its own amplifier. The amplifier clips the complex
//! baseband envelope at the saturation amplitude and is otherwise linear.
//! For a circularly-symmetric Gaussian input the clipped output decomposes
//! into a scaled copy of the input plus uncorrelated distortion
//! (`out = linear_gain * in + d`), and the three quantities that matter to
//! the link-level math all have closed forms in the clipping ratio:
//!
//! * [`bussgang_gain`] - the linear gain of the decomposition
//! * [`avg_output_power`] - mean radiated power after clipping
//! * [`distortion_power`] - power of the uncorrelated residual
//!
//! [`soft_limiter`] is the sample-level operation itself; the test suite uses
//! it to check the closed forms against brute-force averaging.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// Consumption model of an amplifier. Classes differ only in how much supply
/// power they draw for a given radiated power; the clipping behaviour is
/// identical across classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PaClass {
    /// Constant draw `p_sat / eta_a` whether or not the antenna radiates.
    ClassA,
    /// Draw proportional to `sqrt(p_out * p_sat)`; zero when idle.
    ClassB,
    /// Draws exactly the radiated waveform power; zero when idle.
    Perfect,
}

impl PaClass {
    pub const ALL: [PaClass; 3] = [PaClass::ClassA, PaClass::ClassB, PaClass::Perfect];

    pub fn as_str(&self) -> &'static str {
        match self {
            PaClass::ClassA => "ClassA",
            PaClass::ClassB => "ClassB",
            PaClass::Perfect => "Perfect",
        }
    }
}

impl std::fmt::Display for PaClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PaClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ClassA" => Ok(PaClass::ClassA),
            "ClassB" => Ok(PaClass::ClassB),
            "Perfect" => Ok(PaClass::Perfect),
            other => Err(Error::InvalidArgument(format!(
                "unknown PA class {other:?}; expected ClassA, ClassB or Perfect"
            ))),
        }
    }
}

/// Operating point of one amplifier: saturation power, input back-off, and
/// the quantities derived from them.
///
/// The clipping ratio is defined through the back-off,
/// `clip_ratio^2 = 10^(ibo_db / 10) = p_sat / p_in`, so the configured
/// average input power is `p_in = p_sat / clip_ratio^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    /// Saturation power of this amplifier in watts.
    pub p_sat_w: f64,
    /// Input back-off in dB, non-negative.
    pub ibo_db: f64,
    /// Dimensionless clipping ratio (saturation amplitude over input rms).
    pub clip_ratio: f64,
    /// Average input power the amplifier is driven at, in watts.
    pub p_in_w: f64,
}

impl OperatingPoint {
    pub fn new(p_sat_w: f64, ibo_db: f64) -> Result<Self> {
        if !(p_sat_w.is_finite() && p_sat_w > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "p_sat_w must be positive and finite, got {p_sat_w}"
            )));
        }
        if !(ibo_db.is_finite() && ibo_db >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "ibo_db must be non-negative and finite, got {ibo_db}"
            )));
        }
        let clip_ratio = 10f64.powf(ibo_db / 20.0);
        Ok(OperatingPoint {
            p_sat_w,
            ibo_db,
            clip_ratio,
            p_in_w: p_sat_w / (clip_ratio * clip_ratio),
        })
    }

    /// Linear gain of the clipped amplifier at this operating point.
    pub fn linear_gain(&self) -> f64 {
        bussgang_gain(self.clip_ratio).expect("clip_ratio is positive by construction")
    }

    /// Mean radiated power at this operating point, watts.
    pub fn output_power_w(&self) -> f64 {
        avg_output_power(self.p_in_w, self.clip_ratio).expect("valid by construction")
    }

    /// Distortion power at this operating point, watts.
    pub fn distortion_power_w(&self) -> f64 {
        distortion_power(self.p_in_w, self.clip_ratio).expect("valid by construction")
    }
}

/// Supply-power constants shared by every amplifier in a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PaPowerParams {
    /// Drain efficiency of the class A stage at saturation.
    pub eta_class_a: f64,
    /// Coefficient of the class B law `coeff * sqrt(p_out * p_sat)`.
    pub class_b_coefficient: f64,
}

impl Default for PaPowerParams {
    fn default() -> Self {
        PaPowerParams {
            eta_class_a: 0.5,
            class_b_coefficient: 4.0 / std::f64::consts::PI,
        }
    }
}

/// Clip a complex sample to the saturation amplitude, preserving phase.
pub fn soft_limiter(x: Complex64, sat_amplitude: f64) -> Complex64 {
    debug_assert!(sat_amplitude > 0.0);
    let r = x.norm();
    if r <= sat_amplitude {
        x
    } else {
        x * (sat_amplitude / r)
    }
}

/// Linear gain of the soft limiter for a unit-variance circularly-symmetric
/// Gaussian input clipped at amplitude `clip_ratio`:
///
/// `gain = 1 - exp(-clip_ratio^2) + (sqrt(pi)/2) * clip_ratio * erfc(clip_ratio)`
///
/// Strictly increasing in the clipping ratio, tends to 0 as the ratio goes to
/// zero and to 1 for large back-off.
pub fn bussgang_gain(clip_ratio: f64) -> Result<f64> {
    if !(clip_ratio.is_finite() && clip_ratio > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "clip_ratio must be positive and finite, got {clip_ratio}"
        )));
    }
    let g2 = clip_ratio * clip_ratio;
    Ok(1.0 - (-g2).exp() + (std::f64::consts::PI.sqrt() / 2.0) * clip_ratio * erfc(clip_ratio))
}

/// Mean output power of the soft limiter: `p_in * (1 - exp(-clip_ratio^2))`.
pub fn avg_output_power(p_in_w: f64, clip_ratio: f64) -> Result<f64> {
    if !(p_in_w.is_finite() && p_in_w >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "p_in_w must be non-negative and finite, got {p_in_w}"
        )));
    }
    if !(clip_ratio.is_finite() && clip_ratio > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "clip_ratio must be positive and finite, got {clip_ratio}"
        )));
    }
    Ok(p_in_w * (1.0 - (-clip_ratio * clip_ratio).exp()))
}

/// Power of the distortion term of the decomposition:
/// `p_out - gain^2 * p_in`, clamped at zero against rounding.
pub fn distortion_power(p_in_w: f64, clip_ratio: f64) -> Result<f64> {
    let p_out = avg_output_power(p_in_w, clip_ratio)?;
    let gain = bussgang_gain(clip_ratio)?;
    Ok((p_out - gain * gain * p_in_w).max(0.0))
}

/// Supply power drawn by one amplifier of the given class when radiating at
/// the operating point. Idle behaviour (class A draws its constant floor,
/// the other classes draw nothing) is handled by the scheduler, not here.
pub fn pa_consumption(model: PaClass, op: &OperatingPoint, params: &PaPowerParams) -> f64 {
    match model {
        PaClass::ClassA => op.p_sat_w / params.eta_class_a,
        PaClass::ClassB => {
            params.class_b_coefficient * (op.output_power_w() * op.p_sat_w).sqrt()
        }
        PaClass::Perfect => op.output_power_w(),
    }
}

/// Complementary error function.
///
/// Rational Chebyshev fit; absolute relative error below 1.2e-7 over the
/// whole real line, which is orders of magnitude tighter than any tolerance
/// in this crate.
fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let ans = t
        * (-z * z - 1.26551223
            + t * (1.00002368
                + t * (0.37409196
                    + t * (0.09678418
                        + t * (-0.18628806
                            + t * (0.27886807
                                + t * (-1.13520398
                                    + t * (1.48851587
                                        + t * (-0.82215223 + t * 0.17087277)))))))))
            .exp();
    if x >= 0.0 {
        ans
    } else {
        2.0 - ans
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    const SIX_DB_RATIO: f64 = 1.9952623149688795; // 10^(6/20)

    #[test]
    fn erfc_matches_reference_table() {
        // Abramowitz & Stegun values.
        let table = [
            (0.0, 1.0),
            (0.5, 0.4795001221869535),
            (1.0, 0.15729920705028513),
            (2.0, 0.004677734981063127),
            (3.0, 2.209049699858544e-5),
        ];
        for (x, want) in table {
            let got = erfc(x);
            assert!(
                (got - want).abs() <= 2e-7 * want.max(1e-30) + 1e-12,
                "erfc({x}) = {got}, want {want}"
            );
        }
        assert!((erfc(-1.0) - (2.0 - 0.15729920705028513)).abs() < 1e-7);
    }

    #[test]
    fn soft_limiter_passes_small_and_clips_large() {
        let small = Complex64::new(0.3, -0.4); // amplitude 0.5
        assert_eq!(soft_limiter(small, 1.0), small);

        let large = Complex64::new(3.0, 4.0); // amplitude 5
        let clipped = soft_limiter(large, 1.0);
        assert!((clipped.norm() - 1.0).abs() < 1e-12);
        // Phase is preserved.
        assert!((clipped.arg() - large.arg()).abs() < 1e-12);
    }

    #[test]
    fn gain_limits_and_monotonicity() {
        // Very deep clipping: gain collapses toward sqrt(pi)/2 * ratio.
        let tiny = bussgang_gain(1e-6).unwrap();
        assert!((tiny - std::f64::consts::PI.sqrt() / 2.0 * 1e-6).abs() < 1e-8);

        // Huge back-off: effectively linear.
        assert!((bussgang_gain(1e6).unwrap() - 1.0).abs() < 1e-9);

        let mut prev = 0.0;
        for i in 1..=60 {
            let g = bussgang_gain(i as f64 * 0.1).unwrap();
            assert!(g > prev && g < 1.0);
            prev = g;
        }
    }

    #[test]
    fn six_db_operating_point_values() {
        // Frozen from the closed forms and confirmed by the Monte-Carlo
        // oracle below; the acceptance suite re-checks at 1e7 samples.
        let gain = bussgang_gain(SIX_DB_RATIO).unwrap();
        assert!((gain - 0.990).abs() <= 1e-3, "gain = {gain}");

        let p_out = avg_output_power(1.0, SIX_DB_RATIO).unwrap();
        assert!((p_out - 0.9813).abs() <= 1e-3, "p_out = {p_out}");

        let d = distortion_power(1.0, SIX_DB_RATIO).unwrap();
        assert!((d - 0.0012).abs() <= 5e-4, "distortion = {d}");
    }

    #[test]
    fn operating_point_derives_input_power() {
        let op = OperatingPoint::new(39.810717055349734, 6.0).unwrap();
        assert!((op.clip_ratio - SIX_DB_RATIO).abs() < 1e-12);
        assert!((op.p_in_w - 10.0).abs() < 1e-9);
        assert!(OperatingPoint::new(0.0, 6.0).is_err());
        assert!(OperatingPoint::new(1.0, -1.0).is_err());
    }

    #[test]
    fn consumption_laws() {
        let params = PaPowerParams::default();
        let op = OperatingPoint::new(10.0, 6.0).unwrap();
        assert!((pa_consumption(PaClass::ClassA, &op, &params) - 20.0).abs() < 1e-12);

        // Class B at p_out = 2.5, p_sat = 10: (4/pi) * sqrt(25) = 6.366...
        // Pick the back-off that lands p_out at exactly a quarter of p_sat:
        // p_out/p_sat = (1 - exp(-g2))/g2 = 0.25 has g2 ~ 3.9207.
        let mut lo = 1.0;
        let mut hi = 10.0;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if (1.0 - (-mid as f64).exp()) / mid > 0.25 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let ibo = 10.0 * lo.log10();
        let op_quarter = OperatingPoint::new(10.0, ibo).unwrap();
        assert!((op_quarter.output_power_w() - 2.5).abs() < 1e-9);
        let b = pa_consumption(PaClass::ClassB, &op_quarter, &params);
        assert!((b - 4.0 / std::f64::consts::PI * 5.0).abs() < 1e-9, "b = {b}");

        let p = pa_consumption(PaClass::Perfect, &op_quarter, &params);
        assert!((p - 2.5).abs() < 1e-9);
    }

    #[test]
    fn consumption_ordering_over_random_operating_points() {
        let params = PaPowerParams::default();
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let p_sat = rng.gen_range(0.01..100.0);
            let ibo = rng.gen_range(0.0..30.0);
            let op = OperatingPoint::new(p_sat, ibo).unwrap();
            let a = pa_consumption(PaClass::ClassA, &op, &params);
            let b = pa_consumption(PaClass::ClassB, &op, &params);
            let p = pa_consumption(PaClass::Perfect, &op, &params);
            assert!(op.output_power_w() <= p_sat + 1e-12);
            assert!(a >= b && b >= p, "ordering violated: {a} {b} {p}");
        }
    }

    /// Brute-force check of the closed forms against the sample-level
    /// limiter. The full-size oracle run lives in the acceptance suite.
    #[test]
    fn closed_forms_match_monte_carlo_smoke() {
        let n = 400_000usize;
        for &ratio in &[0.5, 1.0, SIX_DB_RATIO, 3.0] {
            let mut rng = ChaCha20Rng::seed_from_u64(42);
            let mut cross = 0.0;
            let mut out_pow = 0.0;
            let mut resid = 0.0;
            let gain = bussgang_gain(ratio).unwrap();
            for _ in 0..n {
                // Box-Muller pair: unit-variance complex Gaussian.
                let u1: f64 = 1.0 - rng.gen::<f64>();
                let u2: f64 = rng.gen();
                let mag = (-u1.ln()).sqrt();
                let x = Complex64::new(
                    mag * (2.0 * std::f64::consts::PI * u2).cos(),
                    mag * (2.0 * std::f64::consts::PI * u2).sin(),
                );
                let y = soft_limiter(x, ratio);
                cross += (x.conj() * y).re;
                out_pow += y.norm_sqr();
                resid += (y - x * gain).norm_sqr();
            }
            let alpha_mc = cross / n as f64;
            let p_out_mc = out_pow / n as f64;
            let d_mc = resid / n as f64;
            assert!((alpha_mc - gain).abs() < 5e-3, "ratio {ratio}: gain");
            assert!(
                (p_out_mc - avg_output_power(1.0, ratio).unwrap()).abs() < 8e-3,
                "ratio {ratio}: p_out"
            );
            assert!(
                (d_mc - distortion_power(1.0, ratio).unwrap()).abs() < 5e-3,
                "ratio {ratio}: distortion"
            );
        }
    }

    #[test]
    fn pa_class_round_trips_through_strings() {
        for c in PaClass::ALL {
            assert_eq!(c.as_str().parse::<PaClass>().unwrap(), c);
        }
        assert!("classA".parse::<PaClass>().is_err());
    }
}
