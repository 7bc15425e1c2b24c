//! Drop execution: slot scheduling, per-slot transmission, bit and energy
//! accounting, and the efficiency summary.
//!
//! One drop = one scheduling round. Each AP splits the users it serves into
//! balanced chunks of at most `min(n_antennas, k_max)`, serves chunk `t` in
//! slot `t`, and idles once its chunks are exhausted; the drop lasts as many
//! slots as the busiest AP needs. Bits accumulate in every slot a user is
//! served; energy accumulates for every AP in every slot, with idle APs
//! drawing their class-A floor and circuit power but nothing else.

use crate::channel::{draw_channel, ChannelRealization};
use crate::error::Error;
use crate::pa::PaClass;
use crate::precoding::{form_clusters, precode_slot, sinr, spectral_efficiency, ApPrecoder, ClusterAssignment, SlotApTx};
use crate::scenario::{Scenario, UeLocationPattern};
use crate::Result;

/// Slot plan for one drop. `slots[t][a]` holds the user rows AP row `a`
/// serves in slot `t`, in canonical position order; an empty list is an idle
/// AP. Every (AP, user) serving pair appears in exactly one slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub slots: Vec<Vec<Vec<usize>>>,
}

impl Schedule {
    pub fn n_slots(&self) -> usize {
        self.slots.len()
    }
}

/// Round-robin chunking of each AP's served users.
///
/// Users are ordered by canonical position rank, not list position, so the
/// resulting slot structure (and every downstream total) is invariant to
/// relabeling the pattern. Chunk sizes are balanced: an AP serving 23 users
/// with a 16-user budget gets chunks of 12 and 11, not 16 and 7.
pub fn schedule(
    assignment: &ClusterAssignment,
    scenario: &Scenario,
    pattern: &UeLocationPattern,
) -> Result<Schedule> {
    if assignment.serving.len() != scenario.n_aps() {
        return Err(Error::InvalidArgument(format!(
            "assignment covers {} APs, scenario has {}",
            assignment.serving.len(),
            scenario.n_aps()
        )));
    }
    let rank = pattern.canonical_rank();
    let mut per_ap_chunks: Vec<Vec<Vec<usize>>> = Vec::with_capacity(scenario.n_aps());
    for (a, ap) in scenario.aps.iter().enumerate() {
        let mut served = assignment.served_by(a);
        served.sort_by_key(|&k| rank[k]);
        let budget = ap.n_antennas.min(scenario.link.k_max);
        let chunks = if served.is_empty() {
            Vec::new()
        } else {
            let n_chunks = served.len().div_ceil(budget);
            let base = served.len() / n_chunks;
            let extra = served.len() % n_chunks;
            let mut chunks = Vec::with_capacity(n_chunks);
            let mut start = 0;
            for c in 0..n_chunks {
                let size = base + usize::from(c < extra);
                chunks.push(served[start..start + size].to_vec());
                start += size;
            }
            chunks
        };
        per_ap_chunks.push(chunks);
    }
    let n_slots = per_ap_chunks.iter().map(Vec::len).max().unwrap_or(0).max(1);
    let slots = (0..n_slots)
        .map(|t| {
            per_ap_chunks
                .iter()
                .map(|chunks| chunks.get(t).cloned().unwrap_or_default())
                .collect()
        })
        .collect();
    Ok(Schedule { slots })
}

/// Outcome of one drop.
#[derive(Debug, Clone, PartialEq)]
pub struct DropResult {
    pub per_ue_bits: Vec<f64>,
    pub per_ap_energy_j: Vec<f64>,
    pub total_bits: f64,
    pub total_energy_j: f64,
    /// Bits per joule over the whole drop.
    pub ee: f64,
    /// Serving-cluster size the drop ran with.
    pub cluster_size: usize,
    pub pa_model: PaClass,
    pub seed: u64,
    pub n_slots: usize,
    pub duration_s: f64,
}

impl DropResult {
    pub fn throughput_bps(&self, ue: usize) -> f64 {
        self.per_ue_bits[ue] / self.duration_s
    }

    /// One-line record for CSV emitters. Field order:
    /// `seed,no_ap,pa_model,n_slots,duration_s,total_bits,total_energy_j,ee`.
    pub fn csv_record(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.seed,
            self.cluster_size,
            self.pa_model,
            self.n_slots,
            self.duration_s,
            self.total_bits,
            self.total_energy_j,
            self.ee
        )
    }
}

/// Clipping decomposition of one AP at its configured operating point.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ApRadio {
    pub alpha: f64,
    pub sigma_d_w: f64,
    pub p_out_w: f64,
    pub p_in_w: f64,
}

/// Run one drop end to end. Deterministic in `seed`; the same inputs
/// reproduce the result bit for bit.
pub fn run_drop(
    scenario: &Scenario,
    pattern: &UeLocationPattern,
    cluster_size: usize,
    pa_model: PaClass,
    seed: u64,
) -> Result<DropResult> {
    let channel = draw_channel(scenario, pattern, seed)?;
    let assignment = form_clusters(scenario, &channel, cluster_size)?;
    let sched = schedule(&assignment, scenario, pattern)?;
    let radios = scenario
        .aps
        .iter()
        .map(|ap| {
            let op = ap.operating_point()?;
            Ok(ApRadio {
                alpha: op.linear_gain(),
                sigma_d_w: op.distortion_power_w(),
                p_out_w: op.output_power_w(),
                p_in_w: op.p_in_w,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    run_drop_with_radio(scenario, pattern, &channel, &sched, &radios, pa_model, cluster_size, seed)
}

/// Drop execution with the clipping decomposition supplied by the caller.
/// `run_drop` passes the configured operating points; tests pass idealized
/// radios (unit gain, zero distortion) to compare against a linear
/// reference.
#[allow(clippy::too_many_arguments)]
pub(crate) fn run_drop_with_radio(
    scenario: &Scenario,
    pattern: &UeLocationPattern,
    channel: &ChannelRealization,
    sched: &Schedule,
    radios: &[ApRadio],
    pa_model: PaClass,
    cluster_size: usize,
    seed: u64,
) -> Result<DropResult> {
    let n_ues = pattern.len();
    let n_aps = scenario.n_aps();
    let noise_w = scenario.noise_power_w();
    let pa_params = scenario.pa_params();
    let slot_s = scenario.link.slot_duration_s;
    let bw = scenario.radio.bandwidth_hz;

    let mut per_ue_bits = vec![0.0f64; n_ues];
    let mut per_ap_energy_j = vec![0.0f64; n_aps];

    for slot in &sched.slots {
        let mut precoders: Vec<Option<ApPrecoder>> = Vec::with_capacity(n_aps);
        for (a, served) in slot.iter().enumerate() {
            if served.is_empty() {
                precoders.push(None);
                continue;
            }
            let rows: Vec<&[num_complex::Complex64]> =
                served.iter().map(|&k| channel.vectors[a][k].as_slice()).collect();
            precoders.push(Some(precode_slot(
                scenario.aps[a].id,
                scenario.aps[a].n_antennas,
                &rows,
                served,
                radios[a].p_in_w,
            )?));
        }
        let txs: Vec<SlotApTx<'_>> = precoders
            .iter()
            .enumerate()
            .filter_map(|(a, p)| {
                p.as_ref().map(|precoder| SlotApTx {
                    ap_row: a,
                    alpha: radios[a].alpha,
                    sigma_d_w: radios[a].sigma_d_w,
                    precoder,
                })
            })
            .collect();

        let mut served_ues: Vec<usize> = slot.iter().flatten().copied().collect();
        served_ues.sort_unstable();
        served_ues.dedup();
        for &k in &served_ues {
            let s = sinr(k, channel, &txs, noise_w);
            let se = spectral_efficiency(s, scenario.link.impl_loss_factor, scenario.link.se_max);
            per_ue_bits[k] += se * bw * slot_s;
        }

        for a in 0..n_aps {
            let active = !slot[a].is_empty();
            let pa_w = match pa_model {
                // Constant draw is the defining class-A property: the floor
                // is paid whether or not the AP radiates this slot.
                PaClass::ClassA => scenario.aps[a].p_sat_w() / pa_params.eta_class_a,
                PaClass::ClassB if active => {
                    pa_params.class_b_coefficient
                        * (radios[a].p_out_w * scenario.aps[a].p_sat_w()).sqrt()
                }
                PaClass::Perfect if active => radios[a].p_out_w,
                _ => 0.0,
            };
            per_ap_energy_j[a] += (pa_w + scenario.energy.circuit_power_w) * slot_s;
        }
    }

    // Totals sum in canonical order so relabeling the pattern cannot change
    // even the last bit of the result.
    let total_bits: f64 = pattern.canonical_order().iter().map(|&k| per_ue_bits[k]).sum();
    let total_energy_j: f64 = per_ap_energy_j.iter().sum();
    let ee = energy_efficiency(total_bits, total_energy_j)?;
    Ok(DropResult {
        per_ue_bits,
        per_ap_energy_j,
        total_bits,
        total_energy_j,
        ee,
        cluster_size,
        pa_model,
        seed,
        n_slots: sched.n_slots(),
        duration_s: sched.n_slots() as f64 * slot_s,
    })
}

/// Bits per joule.
pub fn energy_efficiency(total_bits: f64, total_energy_j: f64) -> Result<f64> {
    if !(total_energy_j.is_finite() && total_energy_j > 0.0) {
        return Err(Error::NonPositiveEnergy(total_energy_j));
    }
    if !(total_bits.is_finite() && total_bits >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "total_bits must be non-negative, got {total_bits}"
        )));
    }
    Ok(total_bits / total_energy_j)
}

/// Empirical CDF of per-user throughput for one drop: ascending
/// `(throughput, k/n)` points, one per user.
pub fn throughput_cdf(result: &DropResult) -> Result<Vec<(f64, f64)>> {
    let n = result.per_ue_bits.len();
    if n == 0 {
        return Err(Error::InvalidArgument("drop has no users".into()));
    }
    let mut tput: Vec<f64> = (0..n).map(|k| result.throughput_bps(k)).collect();
    tput.sort_by(f64::total_cmp);
    Ok(tput
        .into_iter()
        .enumerate()
        .map(|(i, t)| (t, (i + 1) as f64 / n as f64))
        .collect())
}
