//! System parameters and the OFDM subcarrier grid.

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Scalar parameters of one BS → RIS → UE link.
///
/// Construction validates every cross-field constraint, so downstream code
/// treats a `SystemConfig` as trusted.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    n_tx: usize,
    n_rx: usize,
    n_rf: usize,
    n_streams: usize,
    k_t: usize,
    f_ris: usize,
    m_subcarriers: usize,
    bandwidth_hz: f64,
    f_center_hz: f64,
    p_total: f64,
    light_speed: f64,
}

/// Unvalidated field set used to build a [`SystemConfig`].
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    pub n_tx: usize,
    pub n_rx: usize,
    pub n_rf: usize,
    pub n_streams: usize,
    pub k_t: usize,
    pub f_ris: usize,
    pub m_subcarriers: usize,
    pub bandwidth_hz: f64,
    pub f_center_hz: f64,
    pub p_total: f64,
    pub light_speed: f64,
}

impl Default for SystemParams {
    /// The reference scenario: 256-element BS, 64-antenna UE, 8x8 RIS,
    /// 30 GHz of bandwidth around 300 GHz, 16 TDRs per RF chain.
    fn default() -> Self {
        Self {
            n_tx: 256,
            n_rx: 64,
            n_rf: 1,
            n_streams: 1,
            k_t: 16,
            f_ris: 64,
            m_subcarriers: 128,
            bandwidth_hz: 30e9,
            f_center_hz: 300e9,
            p_total: 1.0,
            light_speed: SPEED_OF_LIGHT,
        }
    }
}

fn require(cond: bool, invariant: &'static str, detail: String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidConfig { invariant, detail })
    }
}

impl SystemParams {
    pub fn build(self) -> Result<SystemConfig> {
        SystemConfig::new(self)
    }
}

impl SystemConfig {
    pub fn new(p: SystemParams) -> Result<Self> {
        for (name, v) in [
            ("n_tx", p.n_tx),
            ("n_rx", p.n_rx),
            ("n_rf", p.n_rf),
            ("n_streams", p.n_streams),
            ("k_t", p.k_t),
            ("f_ris", p.f_ris),
            ("m_subcarriers", p.m_subcarriers),
        ] {
            require(v > 0, "positive-count", format!("{name} must be positive"))?;
        }
        for (name, v) in [
            ("bandwidth_hz", p.bandwidth_hz),
            ("f_center_hz", p.f_center_hz),
            ("p_total", p.p_total),
            ("light_speed", p.light_speed),
        ] {
            require(
                v.is_finite() && v > 0.0,
                "positive-real",
                format!("{name} must be a positive finite number, got {v}"),
            )?;
        }
        require(
            p.n_tx.is_multiple_of(p.k_t),
            "k_t-divides-n_tx",
            format!("k_t = {} does not divide n_tx = {}", p.k_t, p.n_tx),
        )?;
        require(
            perfect_square_root(p.f_ris).is_some(),
            "f_ris-perfect-square",
            format!("f_ris = {} is not a perfect square", p.f_ris),
        )?;
        require(
            p.bandwidth_hz < 2.0 * p.f_center_hz,
            "positive-subcarriers",
            format!(
                "bandwidth {} Hz must be below twice the carrier {} Hz",
                p.bandwidth_hz, p.f_center_hz
            ),
        )?;
        require(
            p.n_streams <= p.n_rf && p.n_rf <= p.n_tx,
            "streams-le-rf-le-tx",
            format!(
                "need n_streams ({}) <= n_rf ({}) <= n_tx ({})",
                p.n_streams, p.n_rf, p.n_tx
            ),
        )?;
        Ok(Self {
            n_tx: p.n_tx,
            n_rx: p.n_rx,
            n_rf: p.n_rf,
            n_streams: p.n_streams,
            k_t: p.k_t,
            f_ris: p.f_ris,
            m_subcarriers: p.m_subcarriers,
            bandwidth_hz: p.bandwidth_hz,
            f_center_hz: p.f_center_hz,
            p_total: p.p_total,
            light_speed: p.light_speed,
        })
    }

    /// Back to the editable field set, e.g. to derive a variant scenario.
    pub fn params(&self) -> SystemParams {
        SystemParams {
            n_tx: self.n_tx,
            n_rx: self.n_rx,
            n_rf: self.n_rf,
            n_streams: self.n_streams,
            k_t: self.k_t,
            f_ris: self.f_ris,
            m_subcarriers: self.m_subcarriers,
            bandwidth_hz: self.bandwidth_hz,
            f_center_hz: self.f_center_hz,
            p_total: self.p_total,
            light_speed: self.light_speed,
        }
    }

    pub fn n_tx(&self) -> usize {
        self.n_tx
    }
    pub fn n_rx(&self) -> usize {
        self.n_rx
    }
    pub fn n_rf(&self) -> usize {
        self.n_rf
    }
    pub fn n_streams(&self) -> usize {
        self.n_streams
    }
    pub fn k_t(&self) -> usize {
        self.k_t
    }
    pub fn f_ris(&self) -> usize {
        self.f_ris
    }
    pub fn m_subcarriers(&self) -> usize {
        self.m_subcarriers
    }
    pub fn bandwidth_hz(&self) -> f64 {
        self.bandwidth_hz
    }
    pub fn f_center_hz(&self) -> f64 {
        self.f_center_hz
    }
    pub fn p_total(&self) -> f64 {
        self.p_total
    }
    pub fn light_speed(&self) -> f64 {
        self.light_speed
    }

    /// PSRs driven by each TDR.
    pub fn p_sub(&self) -> usize {
        self.n_tx / self.k_t
    }

    /// Side length of the square RIS.
    pub fn ris_side(&self) -> usize {
        // validated at construction
        perfect_square_root(self.f_ris).unwrap_or(0)
    }

    pub fn lambda_c(&self) -> f64 {
        self.light_speed / self.f_center_hz
    }

    /// Half-wavelength element spacing at the carrier.
    pub fn d_spacing(&self) -> f64 {
        self.light_speed / (2.0 * self.f_center_hz)
    }

    pub fn frequency_grid(&self) -> Result<FrequencyGrid> {
        build_frequency_grid(self)
    }
}

pub(crate) fn perfect_square_root(n: usize) -> Option<usize> {
    if n == 0 {
        return None;
    }
    let r = (n as f64).sqrt().round() as usize;
    (r * r == n).then_some(r)
}

/// Subcarrier frequencies `f_1 < … < f_M`, symmetric about the carrier.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    frequencies_hz: Vec<f64>,
}

impl FrequencyGrid {
    pub fn frequencies_hz(&self) -> &[f64] {
        &self.frequencies_hz
    }

    pub fn len(&self) -> usize {
        self.frequencies_hz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies_hz.is_empty()
    }

    /// Frequency of subcarrier `m`, 1-based.
    pub fn frequency(&self, m: usize) -> Option<f64> {
        m.checked_sub(1)
            .and_then(|i| self.frequencies_hz.get(i).copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.frequencies_hz
            .iter()
            .enumerate()
            .map(|(i, &f)| (i + 1, f))
    }
}

/// `f_m = f_c + B(2m - 1 - M) / (2M)` for `m = 1..=M`.
pub fn build_frequency_grid(cfg: &SystemConfig) -> Result<FrequencyGrid> {
    grid_from_parts(cfg.f_center_hz, cfg.bandwidth_hz, cfg.m_subcarriers)
}

pub(crate) fn grid_from_parts(f_c: f64, bandwidth: f64, m_total: usize) -> Result<FrequencyGrid> {
    if m_total == 0 {
        return Err(Error::InvalidGrid("at least one subcarrier is required".into()));
    }
    let big_m = m_total as f64;
    let frequencies_hz: Vec<f64> = (1..=m_total)
        .map(|m| f_c + bandwidth * (2.0 * m as f64 - 1.0 - big_m) / (2.0 * big_m))
        .collect();
    if let Some(&f) = frequencies_hz.iter().find(|f| **f <= 0.0) {
        return Err(Error::InvalidGrid(format!(
            "subcarrier frequency {f} Hz is not positive"
        )));
    }
    Ok(FrequencyGrid { frequencies_hz })
}
