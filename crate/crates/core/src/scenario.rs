//! Deployment description: service area, radio constants, link settings,
//! energy model and the access-point layout.
//!
//! A [`Scenario`] deserializes from TOML; every section and field falls back
//! to the built-in default deployment, so a partial file only overrides what
//! it mentions. [`UeLocationPattern`] holds one set of user positions and is
//! independent of any scenario; a parse round-trips through a plain
//! `x,y`-per-line text form.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::pa::{OperatingPoint, PaClass, PaPowerParams};
use crate::Result;

/// Thermal noise density at 290 K, dBm per Hz.
const THERMAL_NOISE_DBM_HZ: f64 = -174.0;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

/// Receiver noise power over the full signal bandwidth, watts.
pub fn noise_power_w(noise_figure_db: f64, bandwidth_hz: f64) -> f64 {
    dbm_to_watts(THERMAL_NOISE_DBM_HZ + noise_figure_db + 10.0 * bandwidth_hz.log10())
}

/// One access point: geometry, array size and amplifier configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApConfig {
    pub id: u32,
    /// Antenna reference position, metres: x, y, height.
    pub position: [f64; 3],
    pub n_antennas: usize,
    /// Total saturation (maximum radiated) power across the array, dBm.
    pub p_max_dbm: f64,
    /// Input back-off each amplifier is driven at, dB.
    pub ibo_db: f64,
    /// Amplifier consumption class installed at this AP.
    pub pa_class: PaClass,
}

impl ApConfig {
    /// Total saturation power across the array, watts.
    pub fn p_sat_w(&self) -> f64 {
        dbm_to_watts(self.p_max_dbm)
    }

    /// Array-level operating point. Antennas are driven with equal average
    /// power, and clipping gain, output power and distortion power are all
    /// linear in input power at a fixed back-off, so per-antenna quantities
    /// sum to exactly these array-level totals.
    pub fn operating_point(&self) -> Result<OperatingPoint> {
        OperatingPoint::new(self.p_sat_w(), self.ibo_db)
    }

    /// Total average input power the array is driven at, watts.
    pub fn input_power_w(&self) -> Result<f64> {
        Ok(self.operating_point()?.p_in_w)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AreaConfig {
    pub width_m: f64,
    pub height_m: f64,
}

impl Default for AreaConfig {
    fn default() -> Self {
        AreaConfig {
            width_m: 500.0,
            height_m: 500.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RadioConfig {
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub noise_figure_db: f64,
    /// Log-normal shadowing standard deviation, dB. Zero disables shadowing.
    pub shadowing_sigma_db: f64,
    pub ue_height_m: f64,
}

impl Default for RadioConfig {
    fn default() -> Self {
        RadioConfig {
            carrier_hz: 3.5e9,
            bandwidth_hz: 100e6,
            noise_figure_db: 9.0,
            shadowing_sigma_db: 7.0,
            ue_height_m: 1.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinkConfig {
    /// Spectral efficiency ceiling, bit/s/Hz.
    pub se_max: f64,
    /// Multiplicative implementation loss on the log capacity, in (0, 1].
    pub impl_loss_factor: f64,
    pub slot_duration_s: f64,
    /// Maximum users an AP serves in one slot.
    pub k_max: usize,
}

impl Default for LinkConfig {
    fn default() -> Self {
        LinkConfig {
            se_max: 7.8,
            impl_loss_factor: 0.75,
            slot_duration_s: 1e-3,
            k_max: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnergyConfig {
    /// Static circuit draw per AP, watts, independent of activity.
    pub circuit_power_w: f64,
    pub eta_class_a: f64,
    pub class_b_coefficient: f64,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        let pa = PaPowerParams::default();
        EnergyConfig {
            circuit_power_w: 1.0,
            eta_class_a: pa.eta_class_a,
            class_b_coefficient: pa.class_b_coefficient,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Scenario {
    pub area: AreaConfig,
    pub radio: RadioConfig,
    pub link: LinkConfig,
    pub energy: EnergyConfig,
    pub aps: Vec<ApConfig>,
}

impl Default for Scenario {
    fn default() -> Self {
        // One rooftop macro site in the centre plus a ring of five micros.
        let mut aps = vec![ApConfig {
            id: 0,
            position: [250.0, 250.0, 25.0],
            n_antennas: 128,
            p_max_dbm: 46.0,
            ibo_db: 6.0,
            pa_class: PaClass::ClassA,
        }];
        let ring_radius = 150.0;
        for k in 0..5u32 {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / 5.0;
            aps.push(ApConfig {
                id: k + 1,
                position: [
                    250.0 + ring_radius * angle.cos(),
                    250.0 + ring_radius * angle.sin(),
                    10.0,
                ],
                n_antennas: 32,
                p_max_dbm: 30.0,
                ibo_db: 6.0,
                pa_class: PaClass::ClassA,
            });
        }
        Scenario {
            area: AreaConfig::default(),
            radio: RadioConfig::default(),
            link: LinkConfig::default(),
            energy: EnergyConfig::default(),
            aps,
        }
    }
}

impl Scenario {
    pub fn n_aps(&self) -> usize {
        self.aps.len()
    }

    pub fn ap_by_id(&self, id: u32) -> Option<&ApConfig> {
        self.aps.iter().find(|a| a.id == id)
    }

    pub fn noise_power_w(&self) -> f64 {
        noise_power_w(self.radio.noise_figure_db, self.radio.bandwidth_hz)
    }

    pub fn pa_params(&self) -> PaPowerParams {
        PaPowerParams {
            eta_class_a: self.energy.eta_class_a,
            class_b_coefficient: self.energy.class_b_coefficient,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: String| Err(Error::InvalidScenario(format!("{field}: {msg}")));
        if !(self.area.width_m.is_finite() && self.area.width_m > 0.0) {
            return bad("area.width_m", format!("must be positive, got {}", self.area.width_m));
        }
        if !(self.area.height_m.is_finite() && self.area.height_m > 0.0) {
            return bad("area.height_m", format!("must be positive, got {}", self.area.height_m));
        }
        if !(self.radio.carrier_hz.is_finite() && self.radio.carrier_hz > 0.0) {
            return bad("radio.carrier_hz", format!("must be positive, got {}", self.radio.carrier_hz));
        }
        if !(self.radio.bandwidth_hz.is_finite() && self.radio.bandwidth_hz > 0.0) {
            return bad("radio.bandwidth_hz", format!("must be positive, got {}", self.radio.bandwidth_hz));
        }
        if !self.radio.noise_figure_db.is_finite() {
            return bad("radio.noise_figure_db", "must be finite".into());
        }
        if !(self.radio.shadowing_sigma_db.is_finite() && self.radio.shadowing_sigma_db >= 0.0) {
            return bad(
                "radio.shadowing_sigma_db",
                format!("must be non-negative, got {}", self.radio.shadowing_sigma_db),
            );
        }
        if !(self.radio.ue_height_m.is_finite() && self.radio.ue_height_m >= 0.0) {
            return bad("radio.ue_height_m", format!("must be non-negative, got {}", self.radio.ue_height_m));
        }
        if !(self.link.se_max.is_finite() && self.link.se_max > 0.0) {
            return bad("link.se_max", format!("must be positive, got {}", self.link.se_max));
        }
        if !(self.link.impl_loss_factor.is_finite()
            && self.link.impl_loss_factor > 0.0
            && self.link.impl_loss_factor <= 1.0)
        {
            return bad(
                "link.impl_loss_factor",
                format!("must be in (0, 1], got {}", self.link.impl_loss_factor),
            );
        }
        if !(self.link.slot_duration_s.is_finite() && self.link.slot_duration_s > 0.0) {
            return bad("link.slot_duration_s", format!("must be positive, got {}", self.link.slot_duration_s));
        }
        if self.link.k_max == 0 {
            return bad("link.k_max", "must be at least 1".into());
        }
        if !(self.energy.circuit_power_w.is_finite() && self.energy.circuit_power_w >= 0.0) {
            return bad(
                "energy.circuit_power_w",
                format!("must be non-negative, got {}", self.energy.circuit_power_w),
            );
        }
        if !(self.energy.eta_class_a.is_finite()
            && self.energy.eta_class_a > 0.0
            && self.energy.eta_class_a <= 1.0)
        {
            return bad("energy.eta_class_a", format!("must be in (0, 1], got {}", self.energy.eta_class_a));
        }
        if !(self.energy.class_b_coefficient.is_finite() && self.energy.class_b_coefficient > 0.0) {
            return bad(
                "energy.class_b_coefficient",
                format!("must be positive, got {}", self.energy.class_b_coefficient),
            );
        }
        if self.aps.is_empty() {
            return bad("aps", "at least one access point is required".into());
        }
        let mut seen = std::collections::BTreeSet::new();
        for (i, ap) in self.aps.iter().enumerate() {
            let field = format!("aps[{i}]");
            if !seen.insert(ap.id) {
                return bad(&field, format!("duplicate AP id {}", ap.id));
            }
            if ap.position.iter().any(|c| !c.is_finite()) {
                return bad(&field, format!("position has a non-finite coordinate: {:?}", ap.position));
            }
            if ap.position[2] < 0.0 {
                return bad(&field, format!("height must be non-negative, got {}", ap.position[2]));
            }
            if ap.n_antennas == 0 {
                return bad(&field, "n_antennas must be at least 1".into());
            }
            if !ap.p_max_dbm.is_finite() {
                return bad(&field, "p_max_dbm must be finite".into());
            }
            if !(ap.ibo_db.is_finite() && ap.ibo_db >= 0.0) {
                return bad(&field, format!("ibo_db must be non-negative, got {}", ap.ibo_db));
            }
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text)
            .map_err(|e| Error::InvalidScenario(format!("TOML parse error: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scenario serializes")
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    Scenario::from_toml(&text)
}

/// One set of user positions, metres. Positions are free-standing: they are
/// not checked against any scenario's service area.
#[derive(Debug, Clone, PartialEq)]
pub struct UeLocationPattern {
    pub positions: Vec<[f64; 2]>,
}

impl UeLocationPattern {
    pub fn new(positions: Vec<[f64; 2]>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidPattern("pattern has no user positions".into()));
        }
        for (i, p) in positions.iter().enumerate() {
            if !(p[0].is_finite() && p[1].is_finite()) {
                return Err(Error::InvalidPattern(format!(
                    "position {i} has a non-finite coordinate: {p:?}"
                )));
            }
        }
        Ok(UeLocationPattern { positions })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Parse the `x,y`-per-line text form. Blank lines and lines starting
    /// with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut positions = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let lineno = idx + 1;
            let (xs, ys) = line.split_once(',').ok_or_else(|| {
                Error::format("pattern", lineno, format!("expected \"x,y\", got {line:?}"))
            })?;
            let x: f64 = xs.trim().parse().map_err(|_| {
                Error::format("pattern", lineno, format!("bad x coordinate {:?}", xs.trim()))
            })?;
            let y: f64 = ys.trim().parse().map_err(|_| {
                Error::format("pattern", lineno, format!("bad y coordinate {:?}", ys.trim()))
            })?;
            if !(x.is_finite() && y.is_finite()) {
                return Err(Error::format(
                    "pattern",
                    lineno,
                    "coordinates must be finite".into(),
                ));
            }
            positions.push([x, y]);
        }
        UeLocationPattern::new(positions)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for p in &self.positions {
            out.push_str(&format!("{},{}\n", p[0], p[1]));
        }
        out
    }

    /// Draw `n` positions uniformly over the scenario's service area.
    pub fn generate<R: Rng>(n: usize, area: &AreaConfig, rng: &mut R) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidPattern("cannot generate an empty pattern".into()));
        }
        let positions = (0..n)
            .map(|_| [rng.gen::<f64>() * area.width_m, rng.gen::<f64>() * area.height_m])
            .collect();
        UeLocationPattern::new(positions)
    }

    /// Indices of the positions in canonical order: ascending by x, then y,
    /// then original index. Everything seeded per user keys off this rank so
    /// results do not depend on the order positions were listed in.
    pub fn canonical_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.positions.len()).collect();
        idx.sort_by(|&a, &b| {
            let pa = self.positions[a];
            let pb = self.positions[b];
            pa[0].total_cmp(&pb[0])
                .then(pa[1].total_cmp(&pb[1]))
                .then(a.cmp(&b))
        });
        idx
    }

    /// Canonical rank of each position: inverse permutation of
    /// [`Self::canonical_order`].
    pub fn canonical_rank(&self) -> Vec<usize> {
        let order = self.canonical_order();
        let mut rank = vec![0usize; order.len()];
        for (r, &i) in order.iter().enumerate() {
            rank[i] = r;
        }
        rank
    }
}
