//! Serving-cluster formation and per-AP zero-forcing transmission.
//!
//! Each user is served by the `cluster_size` access points with the largest
//! product of large-scale gain and saturation power. Within one slot an AP
//! zero-forces across the users it serves in that slot, splits its input
//! power equally among them, and normalizes every precoding column to unit
//! norm so `h^H w` for the own user is real and positive; contributions from
//! different APs therefore combine coherently at the user.

use num_complex::Complex64;

use crate::channel::ChannelRealization;
use crate::error::Error;
use crate::scenario::Scenario;
use crate::Result;

/// Relative pivot floor for the Gram-matrix factorization.
const RANK_TOL: f64 = 1e-12;

/// Which APs serve which users for one drop. `serving[a][k]` follows the
/// scenario's AP row order and the pattern's user row order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    pub serving: Vec<Vec<bool>>,
    pub cluster_size: usize,
}

impl ClusterAssignment {
    /// User rows served by AP row `a`, ascending.
    pub fn served_by(&self, a: usize) -> Vec<usize> {
        (0..self.serving[a].len()).filter(|&k| self.serving[a][k]).collect()
    }

    /// AP rows serving user row `k`, ascending.
    pub fn serving_aps(&self, k: usize) -> Vec<usize> {
        (0..self.serving.len()).filter(|&a| self.serving[a][k]).collect()
    }
}

/// Rank APs per user by `large_scale * p_sat` (ties to the lower AP id) and
/// keep the best `cluster_size`. The ranking is independent of
/// `cluster_size`, so clusters grow by inclusion: the set for size N is a
/// subset of the set for N + 1.
pub fn form_clusters(
    scenario: &Scenario,
    channel: &ChannelRealization,
    cluster_size: usize,
) -> Result<ClusterAssignment> {
    let n_aps = scenario.n_aps();
    if cluster_size == 0 || cluster_size > n_aps {
        return Err(Error::InvalidArgument(format!(
            "cluster_size must be in 1..={n_aps}, got {cluster_size}"
        )));
    }
    if channel.n_aps() != n_aps {
        return Err(Error::InvalidArgument(format!(
            "channel has {} AP rows, scenario has {n_aps}",
            channel.n_aps()
        )));
    }
    let n_ues = channel.n_ues();
    let p_sat: Vec<f64> = scenario.aps.iter().map(|ap| ap.p_sat_w()).collect();
    let mut serving = vec![vec![false; n_ues]; n_aps];
    for k in 0..n_ues {
        let mut ranked: Vec<usize> = (0..n_aps).collect();
        ranked.sort_by(|&a, &b| {
            let sa = channel.large_scale[a][k] * p_sat[a];
            let sb = channel.large_scale[b][k] * p_sat[b];
            sb.total_cmp(&sa).then(scenario.aps[a].id.cmp(&scenario.aps[b].id))
        });
        for &a in &ranked[..cluster_size] {
            serving[a][k] = true;
        }
    }
    Ok(ClusterAssignment { serving, cluster_size })
}

/// Lower-triangular factor of a Hermitian positive-definite matrix, in
/// place. Fails when a pivot falls below `RANK_TOL` times the largest
/// initial diagonal entry.
fn cholesky(a: &mut [Vec<Complex64>]) -> Result<()> {
    let n = a.len();
    let max_diag = (0..n).map(|i| a[i][i].re).fold(0.0f64, f64::max).max(f64::MIN_POSITIVE);
    for j in 0..n {
        let mut d = a[j][j].re;
        for p in 0..j {
            d -= a[j][p].norm_sqr();
        }
        if d <= RANK_TOL * max_diag {
            return Err(Error::SingularChannel { pivot: d, row: j });
        }
        let l_jj = d.sqrt();
        a[j][j] = Complex64::new(l_jj, 0.0);
        for i in j + 1..n {
            let mut s = a[i][j];
            for p in 0..j {
                s -= a[i][p] * a[j][p].conj();
            }
            a[i][j] = s / l_jj;
        }
    }
    // Zero the strictly upper part so the factor is self-describing.
    for i in 0..n {
        for j in i + 1..n {
            a[i][j] = Complex64::ZERO;
        }
    }
    Ok(())
}

/// Solve `L L^H x = b` in place given the lower factor.
fn cholesky_solve(l: &[Vec<Complex64>], b: &mut [Complex64]) {
    let n = l.len();
    for i in 0..n {
        let mut s = b[i];
        for j in 0..i {
            s -= l[i][j] * b[j];
        }
        b[i] = s / l[i][i].re;
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in i + 1..n {
            s -= l[j][i].conj() * b[j];
        }
        b[i] = s / l[i][i].re;
    }
}

/// Zero-forcing directions for one AP and one slot.
///
/// `rows[k]` is the channel of served user `k` at this AP. Returns one
/// unit-norm column per user with `rows[i] dot conj(w_j) = 0` for `i != j`
/// and real positive for `i == j`.
pub fn zf_precoder(rows: &[&[Complex64]]) -> Result<Vec<Vec<Complex64>>> {
    let k = rows.len();
    if k == 0 {
        return Err(Error::InvalidArgument("zf_precoder needs at least one user".into()));
    }
    let m = rows[0].len();
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::InvalidArgument("channel rows differ in antenna count".into()));
    }
    // Gram matrix g[i][j] = <h_i, h_j>.
    let mut gram: Vec<Vec<Complex64>> = vec![vec![Complex64::ZERO; k]; k];
    for i in 0..k {
        for j in 0..k {
            let mut s = Complex64::ZERO;
            for t in 0..m {
                s += rows[i][t].conj() * rows[j][t];
            }
            gram[i][j] = s;
        }
    }
    cholesky(&mut gram)?;
    let mut cols = Vec::with_capacity(k);
    for j in 0..k {
        let mut coef = vec![Complex64::ZERO; k];
        coef[j] = Complex64::new(1.0, 0.0);
        cholesky_solve(&gram, &mut coef);
        // w_raw_j = sum_i h_i * coef[i]; then normalize.
        let mut w = vec![Complex64::ZERO; m];
        for i in 0..k {
            for t in 0..m {
                w[t] += rows[i][t] * coef[i];
            }
        }
        let norm = w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::SingularChannel { pivot: norm, row: j });
        }
        for t in 0..m {
            w[t] /= norm;
        }
        cols.push(w);
    }
    Ok(cols)
}

/// Transmission plan of one AP in one slot: which users it serves, the
/// unit-norm direction per user, and the equal input-power share per user.
#[derive(Debug, Clone, PartialEq)]
pub struct ApPrecoder {
    pub ues: Vec<usize>,
    pub weights: Vec<Vec<Complex64>>,
    pub power_per_ue_w: f64,
}

/// Build the transmission plan for one AP serving `ues` with total input
/// power `input_power_w` split equally.
pub fn precode_slot(
    ap_id: u32,
    n_antennas: usize,
    channel_rows: &[&[Complex64]],
    ues: &[usize],
    input_power_w: f64,
) -> Result<ApPrecoder> {
    if ues.is_empty() || channel_rows.len() != ues.len() {
        return Err(Error::InvalidArgument(format!(
            "precode_slot: {} users but {} channel rows",
            ues.len(),
            channel_rows.len()
        )));
    }
    if ues.len() > n_antennas {
        return Err(Error::Oversubscribed {
            ap: ap_id,
            served: ues.len(),
            antennas: n_antennas,
        });
    }
    if !(input_power_w.is_finite() && input_power_w > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "input_power_w must be positive, got {input_power_w}"
        )));
    }
    let weights = zf_precoder(channel_rows)?;
    Ok(ApPrecoder {
        ues: ues.to_vec(),
        weights,
        power_per_ue_w: input_power_w / ues.len() as f64,
    })
}

/// One AP transmitting in the current slot, with its clipping decomposition.
#[derive(Debug, Clone, Copy)]
pub struct SlotApTx<'a> {
    pub ap_row: usize,
    /// Linear gain of the clipped amplifier.
    pub alpha: f64,
    /// Array-total distortion power, watts.
    pub sigma_d_w: f64,
    pub precoder: &'a ApPrecoder,
}

/// Post-combining signal quality of one user given every AP transmitting in
/// the slot.
///
/// Useful signal sums coherently across the APs serving the user; streams
/// meant for other users interfere through the realized channel; clipping
/// distortion from every active AP arrives scaled by the large-scale gain
/// (distortion is white across antennas, so only the channel's average power
/// matters); thermal noise closes the denominator.
pub fn sinr(
    ue: usize,
    channel: &ChannelRealization,
    txs: &[SlotApTx<'_>],
    noise_w: f64,
) -> f64 {
    let mut signal_amp = Complex64::ZERO;
    let mut interference = 0.0;
    let mut distortion = 0.0;
    for tx in txs {
        let h = &channel.vectors[tx.ap_row][ue];
        let p = tx.precoder.power_per_ue_w;
        for (slot_idx, &served_ue) in tx.precoder.ues.iter().enumerate() {
            let w = &tx.precoder.weights[slot_idx];
            let mut dot = Complex64::ZERO;
            for t in 0..h.len() {
                dot += h[t].conj() * w[t];
            }
            if served_ue == ue {
                signal_amp += tx.alpha * p.sqrt() * dot;
            } else {
                interference += tx.alpha * tx.alpha * p * dot.norm_sqr();
            }
        }
        distortion += tx.sigma_d_w * channel.large_scale[tx.ap_row][ue];
    }
    signal_amp.norm_sqr() / (interference + distortion + noise_w)
}

/// Achievable spectral efficiency, bit/s/Hz: scaled log capacity, capped.
pub fn spectral_efficiency(sinr: f64, impl_loss_factor: f64, se_max: f64) -> f64 {
    (impl_loss_factor * (1.0 + sinr).log2()).min(se_max)
}
