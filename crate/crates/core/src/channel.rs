//! Propagation model: distance-based path loss, log-normal shadowing and
//! i.i.d. Rayleigh small-scale fading.
//!
//! Every (AP, user) pair draws from its own counter-mode RNG stream keyed by
//! the AP id and the user's canonical rank, so a realization is invariant to
//! the order users are listed in and adding an AP never perturbs the fading
//! of existing pairs.

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::Error;
use crate::scenario::{Scenario, UeLocationPattern};
use crate::Result;

/// Distances below this are clamped before the log-distance law, metres.
const MIN_DISTANCE_M: f64 = 1.0;

/// Log-distance path loss, dB: `30.5 + 36.7 * log10(d_3d)`.
pub fn path_loss_db(d_3d_m: f64) -> f64 {
    30.5 + 36.7 * d_3d_m.max(MIN_DISTANCE_M).log10()
}

/// Large-scale power gain from path loss plus a shadowing term in dB.
pub fn large_scale_gain(d_3d_m: f64, shadowing_db: f64) -> f64 {
    10f64.powf(-(path_loss_db(d_3d_m) + shadowing_db) / 10.0)
}

/// One fading realization over every (AP, user) pair.
///
/// Outer index is the AP's row in the scenario's `aps` list, inner index the
/// user's row in the pattern; `vectors[a][k]` has one entry per antenna of
/// AP `a` and already includes the large-scale factor `sqrt(large_scale)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub large_scale: Vec<Vec<f64>>,
    pub vectors: Vec<Vec<Vec<Complex64>>>,
}

impl ChannelRealization {
    pub fn n_aps(&self) -> usize {
        self.vectors.len()
    }

    pub fn n_ues(&self) -> usize {
        self.vectors.first().map_or(0, |v| v.len())
    }
}

/// Standard normal via Box-Muller on two uniforms.
fn standard_normal<R: RngCore>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Unit-variance circularly-symmetric complex Gaussian sample.
fn complex_normal<R: RngCore>(rng: &mut R) -> Complex64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    let mag = (-u1.ln()).sqrt();
    let phase = 2.0 * std::f64::consts::PI * u2;
    Complex64::new(mag * phase.cos(), mag * phase.sin())
}

/// Draw the full channel for one drop.
///
/// Per pair, the stream consumes the shadowing draw first and then one
/// complex sample per antenna, so antenna counts of other APs never shift
/// anything.
pub fn draw_channel(
    scenario: &Scenario,
    pattern: &UeLocationPattern,
    seed: u64,
) -> Result<ChannelRealization> {
    scenario.validate()?;
    if pattern.is_empty() {
        return Err(Error::InvalidPattern("pattern has no user positions".into()));
    }
    let rank = pattern.canonical_rank();
    let sigma = scenario.radio.shadowing_sigma_db;
    let ue_z = scenario.radio.ue_height_m;

    let mut large_scale = Vec::with_capacity(scenario.n_aps());
    let mut vectors = Vec::with_capacity(scenario.n_aps());
    for ap in &scenario.aps {
        let mut betas = Vec::with_capacity(pattern.len());
        let mut rows = Vec::with_capacity(pattern.len());
        for (k, pos) in pattern.positions.iter().enumerate() {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(((ap.id as u64) << 32) | rank[k] as u64);

            let shadowing = if sigma > 0.0 {
                sigma * standard_normal(&mut rng)
            } else {
                // Keep the stream layout identical whether or not shadowing
                // is enabled.
                let _ = standard_normal(&mut rng);
                0.0
            };
            let dx = pos[0] - ap.position[0];
            let dy = pos[1] - ap.position[1];
            let dz = ue_z - ap.position[2];
            let d_3d = (dx * dx + dy * dy + dz * dz).sqrt();
            let beta = large_scale_gain(d_3d, shadowing);
            let amp = beta.sqrt();
            let h: Vec<Complex64> = (0..ap.n_antennas)
                .map(|_| complex_normal(&mut rng) * amp)
                .collect();
            betas.push(beta);
            rows.push(h);
        }
        large_scale.push(betas);
        vectors.push(rows);
    }
    Ok(ChannelRealization { large_scale, vectors })
}

/// Serialize a realization to the line-oriented dump form: one line per
/// (AP row, user row) holding the large-scale gain and the interleaved
/// re/im antenna coefficients. Floats print in shortest round-trip form, so
/// a parse reproduces the realization bit for bit.
pub fn dump_channels(ch: &ChannelRealization) -> String {
    let mut out = String::from("# channel v1\n");
    for (a, rows) in ch.vectors.iter().enumerate() {
        for (k, h) in rows.iter().enumerate() {
            out.push_str(&format!("{a} {k} {}", ch.large_scale[a][k]));
            for c in h {
                out.push_str(&format!(" {} {}", c.re, c.im));
            }
            out.push('\n');
        }
    }
    out
}

pub fn parse_channels(text: &str) -> Result<ChannelRealization> {
    let mut entries: Vec<(usize, usize, f64, Vec<Complex64>)> = Vec::new();
    let mut n_aps = 0usize;
    let mut n_ues = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let lineno = idx + 1;
        let mut parts = line.split_ascii_whitespace();
        let mut next_num = |what: &str| -> Result<f64> {
            parts
                .next()
                .ok_or_else(|| Error::format("channel dump", lineno, format!("missing {what}")))?
                .parse::<f64>()
                .map_err(|_| Error::format("channel dump", lineno, format!("bad {what}")))
        };
        let a = next_num("AP index")? as usize;
        let k = next_num("user index")? as usize;
        let beta = next_num("large-scale gain")?;
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::format(
                "channel dump",
                lineno,
                format!("large-scale gain must be non-negative, got {beta}"),
            ));
        }
        let rest: Vec<f64> = parts
            .map(|t| {
                t.parse::<f64>().map_err(|_| {
                    Error::format("channel dump", lineno, format!("bad coefficient {t:?}"))
                })
            })
            .collect::<Result<_>>()?;
        if rest.is_empty() || rest.len() % 2 != 0 {
            return Err(Error::format(
                "channel dump",
                lineno,
                format!("expected an even, positive number of re/im values, got {}", rest.len()),
            ));
        }
        let h = rest.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
        n_aps = n_aps.max(a + 1);
        n_ues = n_ues.max(k + 1);
        entries.push((a, k, beta, h));
    }
    if entries.is_empty() {
        return Err(Error::format("channel dump", 0, "no channel lines found".into()));
    }
    let mut large_scale = vec![vec![f64::NAN; n_ues]; n_aps];
    let mut vectors: Vec<Vec<Vec<Complex64>>> = vec![vec![Vec::new(); n_ues]; n_aps];
    for (a, k, beta, h) in entries {
        if !vectors[a][k].is_empty() {
            return Err(Error::format(
                "channel dump",
                0,
                format!("duplicate entry for AP {a}, user {k}"),
            ));
        }
        large_scale[a][k] = beta;
        vectors[a][k] = h;
    }
    for a in 0..n_aps {
        let m = vectors[a][0].len();
        for k in 0..n_ues {
            if vectors[a][k].is_empty() {
                return Err(Error::format(
                    "channel dump",
                    0,
                    format!("missing entry for AP {a}, user {k}"),
                ));
            }
            if vectors[a][k].len() != m {
                return Err(Error::format(
                    "channel dump",
                    0,
                    format!("AP {a} has inconsistent antenna counts"),
                ));
            }
        }
    }
    Ok(ChannelRealization { large_scale, vectors })
}
