//! RIS phase design and RIS-side gain evaluation.
//!
//! The design aligns the reflected equivalent channel of one RF chain with
//! the steering vector toward a chosen RIS→UE path at the carrier. With the
//! BS beam assumed perfectly compensated, the equivalent column is
//!
//! ```text
//! ĝ[r] = Σ_l α_l c_l a_RIS(arrival_l, f_c)[r],
//! c_l  = a_BS(θ_l)^H a_BS(θ_t) = Ξ_N(θ_t - θ_l)/N · exp(jπ(N-1)(θ_t - θ_l)/2),
//! ```
//!
//! and the exact (generally non-unit-modulus) solution is
//! `Ψ₀[r] = a_RIS(target, f_c)[r] / ĝ[r]`. Only its per-element phase is kept.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::channel::{check_len, ris_ue_channel, ChannelSet};
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::manifold::{dirichlet_sinc, hermitian_dot, upa_steering_at, PhysicalDirection2D};

/// Unit-amplitude diagonal reflection `Ψ = diag(exp(jφ_r))`.
#[derive(Debug, Clone, PartialEq)]
pub struct RisResponse {
    phases: Vec<f64>,
}

impl RisResponse {
    /// Phases are wrapped into `[0, 2π)`.
    pub fn from_phases(phases: impl IntoIterator<Item = f64>) -> Self {
        Self {
            phases: phases.into_iter().map(|p| p.rem_euclid(TAU)).collect(),
        }
    }

    /// All-pass (identity) surface.
    pub fn identity(f: usize) -> Self {
        Self {
            phases: vec![0.0; f],
        }
    }

    /// Keeps the phase of each coefficient and drops its magnitude.
    pub fn project(values: &DVector<Complex64>) -> Self {
        Self::from_phases(values.iter().map(|v| v.arg()))
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn coefficients(&self) -> DVector<Complex64> {
        DVector::from_iterator(
            self.len(),
            self.phases.iter().map(|&p| Complex64::from_polar(1.0, p)),
        )
    }

    /// `Ψ v`.
    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        v.component_mul(&self.coefficients())
    }
}

/// `Ĝ_m = G_m A^TP_m`; column `n` belongs to RF chain `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalentChannel {
    columns: DMatrix<Complex64>,
}

impl EquivalentChannel {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.columns
    }

    pub fn column(&self, rf_index: usize) -> Result<DVector<Complex64>> {
        if rf_index >= self.columns.ncols() {
            return Err(Error::IndexOutOfRange {
                what: "RF chain",
                index: rf_index,
                len: self.columns.ncols(),
            });
        }
        Ok(self.columns.column(rf_index).into_owned())
    }

    pub fn n_rf(&self) -> usize {
        self.columns.ncols()
    }
}

pub fn equivalent_channel(
    g_m: &DMatrix<Complex64>,
    tp: &DMatrix<Complex64>,
) -> Result<EquivalentChannel> {
    check_len("equivalent channel (N_TX)", g_m.ncols(), tp.nrows())?;
    Ok(EquivalentChannel {
        columns: g_m * tp,
    })
}

/// A designed surface plus how far the exact solution was from unit modulus.
#[derive(Debug, Clone, PartialEq)]
pub struct RisDesign {
    pub response: RisResponse,
    /// Exact per-element solution before projection.
    pub unprojected: DVector<Complex64>,
    /// `max_r ||Ψ₀_r| - mean| / mean`.
    pub projection_residual: f64,
    /// BS-RIS path whose departure the serving RF chain is aimed at.
    pub bs_path: usize,
}

/// Designs the surface serving RIS→UE path `target_path`.
///
/// The serving RF chain is taken to aim at BS→RIS path
/// `target_path mod L_1`, matching the round-robin chain assignment used by
/// the harness.
pub fn ris_exact_solution(
    channels: &ChannelSet,
    target_path: usize,
    cfg: &SystemConfig,
) -> Result<RisDesign> {
    let ue_paths = channels.ris_ue_paths();
    let target = ue_paths.get(target_path).ok_or(Error::IndexOutOfRange {
        what: "RIS-UE path",
        index: target_path,
        len: ue_paths.len(),
    })?;
    let bs_paths = channels.bs_ris_paths();
    let bs_path = target_path % bs_paths.len();
    let theta_t = bs_paths[bs_path].departure.value();

    let f_c = cfg.f_center_hz();
    let f = cfg.f_ris();
    let n = cfg.n_tx();

    let mut g_hat = DVector::zeros(f);
    for p in bs_paths {
        let delta = theta_t - p.departure.value();
        let coupling = Complex64::from_polar(
            dirichlet_sinc(n, delta) / n as f64,
            PI * (n as f64 - 1.0) * delta / 2.0,
        );
        let a = upa_steering_at(&p.arrival, f_c, f_c, f)?;
        g_hat += a.into_entries() * (p.gain * coupling);
    }

    let want = upa_steering_at(&target.departure, f_c, f_c, f)?.into_entries();
    let scale = g_hat.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let side = cfg.ris_side();
    let mut unprojected = DVector::zeros(f);
    for r in 0..f {
        let gr = g_hat[r];
        if !(gr.norm() > 1e-12 * scale) {
            return Err(Error::DegenerateDesign {
                x: r / side,
                y: r % side,
            });
        }
        unprojected[r] = want[r] / gr;
    }

    let mags: Vec<f64> = unprojected.iter().map(|v| v.norm()).collect();
    let mean = mags.iter().sum::<f64>() / f as f64;
    let projection_residual = mags
        .iter()
        .map(|m| (m - mean).abs() / mean)
        .fold(0.0, f64::max);

    Ok(RisDesign {
        response: RisResponse::project(&unprojected),
        unprojected,
        projection_residual,
        bs_path,
    })
}

fn reflected_column(
    ris: &RisResponse,
    eq: &EquivalentChannel,
    rf_index: usize,
) -> Result<DVector<Complex64>> {
    let col = eq.column(rf_index)?;
    check_len("RIS response", col.len(), ris.len())?;
    Ok(ris.apply(&col))
}

/// `|a_RIS^H(target, f_m) Ψ g / ‖Ψ g‖|`: the shape of the reflected beam,
/// independent of how much power reaches the surface.
pub fn ris_side_gain(
    ris: &RisResponse,
    eq: &EquivalentChannel,
    target: PhysicalDirection2D,
    f_m: f64,
    rf_index: usize,
    cfg: &SystemConfig,
) -> Result<f64> {
    let v = reflected_column(ris, eq, rf_index)?;
    let norm = v.norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroNorm);
    }
    let a = upa_steering_at(&target, f_m, cfg.f_center_hz(), ris.len())?;
    Ok(hermitian_dot(a.entries(), &v).norm() / norm)
}

/// `|a_RIS^H(target, f_m) Ψ g| / Σ|α|`: RIS-side gain including the BS-side
/// array loss carried by `g`. Equals the normalised gain times the BS gain for
/// a single path.
pub fn cascaded_ris_gain(
    ris: &RisResponse,
    eq: &EquivalentChannel,
    target: PhysicalDirection2D,
    f_m: f64,
    rf_index: usize,
    channels: &ChannelSet,
    cfg: &SystemConfig,
) -> Result<f64> {
    let v = reflected_column(ris, eq, rf_index)?;
    let a = upa_steering_at(&target, f_m, cfg.f_center_hz(), ris.len())?;
    Ok(hermitian_dot(a.entries(), &v).norm() / channels.bs_ris_gain_sum())
}

/// Least-squares design objective `‖a - Ψ g / ‖Ψ g‖‖²`.
pub fn p1_objective(
    ris: &RisResponse,
    g_column: &DVector<Complex64>,
    target: &DVector<Complex64>,
) -> Result<f64> {
    check_len("P1 objective", target.len(), g_column.len())?;
    check_len("P1 objective (RIS)", target.len(), ris.len())?;
    let v = ris.apply(g_column);
    let norm = v.norm();
    if norm == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((target - v / Complex64::new(norm, 0.0)).norm_squared())
}

/// Correlation `|v_1^H a_RIS|` between the dominant right singular vector of
/// `H` at the carrier and the departure steering vector of the strongest
/// RIS→UE path. Diagnostic only.
pub fn svd_alignment(channels: &ChannelSet, cfg: &SystemConfig) -> Result<f64> {
    let f_c = cfg.f_center_hz();
    let h = ris_ue_channel(channels, f_c, cfg)?;
    let svd = h.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Scenario("SVD did not return right singular vectors".into()))?;
    let (best, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::MIN), |acc, (i, &s)| if s > acc.1 { (i, s) } else { acc });
    // rows of V^H are v_i^H
    let v1_h = v_t.row(best);
    let dominant = channels
        .ris_ue_paths()
        .iter()
        .max_by(|a, b| a.gain.norm().total_cmp(&b.gain.norm()))
        .expect("channel sets are never empty");
    let a = upa_steering_at(&dominant.departure, f_c, f_c, cfg.f_ris())?;
    Ok(v1_h
        .iter()
        .zip(a.entries().iter())
        .map(|(v, x)| v * x)
        .sum::<Complex64>()
        .norm())
}
