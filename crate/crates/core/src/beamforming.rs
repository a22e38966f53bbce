//! Phase-shifter (PSR) and time-delay (TDR) analog beamforming at the BS.
//!
//! Each RF chain drives `K_T` TDRs, and each TDR feeds a subarray of
//! `P = N_TX / K_T` PSRs. The joint TDR-PSR ("TP") column for chain `n` at
//! frequency `f` has entries
//!
//! ```text
//! w[k, p] = exp(j (φ[k, p] + 2π f t_k)) / √N_TX
//! ```
//!
//! with PSR phases `φ` and delays `t_k`. The delay term is written with a
//! positive sign to match the manifold convention in [`crate::manifold`].

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::manifold::{dirichlet_sinc, hermitian_dot, PhysicalDirection1D, SteeringVector};

/// Analog front-end variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Architecture {
    /// PSRs only.
    Conventional,
    /// Per-subcarrier delays that compensate the first PSR of each subarray.
    TpPaperLiteral,
    /// Frequency-independent true time delays; the matching constant phase
    /// moves into the PSR layer.
    TpFixedDelay,
    /// One TDR per antenna.
    OneToOne,
}

impl Architecture {
    pub const ALL: [Architecture; 4] = [
        Architecture::Conventional,
        Architecture::TpPaperLiteral,
        Architecture::TpFixedDelay,
        Architecture::OneToOne,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Architecture::Conventional => "conventional",
            Architecture::TpPaperLiteral => "tp-paper-literal",
            Architecture::TpFixedDelay => "tp-fixed-delay",
            Architecture::OneToOne => "one-to-one",
        }
    }

    pub fn td_mode(self) -> Option<TdMode> {
        match self {
            Architecture::Conventional => None,
            Architecture::TpPaperLiteral => Some(TdMode::PaperLiteral),
            Architecture::TpFixedDelay => Some(TdMode::FixedDelay),
            Architecture::OneToOne => Some(TdMode::OneToOne),
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Architecture::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                Error::Scenario(format!(
                    "unknown architecture {s:?}; expected one of conventional, \
                     tp-paper-literal, tp-fixed-delay, one-to-one"
                ))
            })
    }
}

/// How TDR delays are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TdMode {
    PaperLiteral,
    FixedDelay,
    OneToOne,
}

/// Frequency-independent PSR phases of one RF chain, grouped into `k_t`
/// consecutive subarrays of `p` elements.
#[derive(Debug, Clone, PartialEq)]
pub struct PsrBeamformer {
    phases: Vec<f64>,
    k_t: usize,
    p: usize,
}

impl PsrBeamformer {
    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn k_t(&self) -> usize {
        self.k_t
    }

    /// Elements per subarray.
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n_tx(&self) -> usize {
        self.phases.len()
    }

    /// Phases of subarray `k` (0-based).
    pub fn subarray(&self, k: usize) -> &[f64] {
        &self.phases[k * self.p..(k + 1) * self.p]
    }

    /// The PSR column alone, entries `exp(jφ) / √N_TX`.
    pub fn column(&self) -> DVector<Complex64> {
        let scale = 1.0 / (self.n_tx() as f64).sqrt();
        DVector::from_iterator(
            self.n_tx(),
            self.phases.iter().map(|&ph| Complex64::from_polar(scale, ph)),
        )
    }
}

/// Element `(k, p)` gets phase `π((k-1)P + p - 1) dir`, the conjugate match
/// of the full array at the carrier.
pub fn conventional_psr(dir: PhysicalDirection1D, cfg: &SystemConfig) -> PsrBeamformer {
    grouped_psr(dir.value(), cfg.n_tx(), cfg.k_t())
}

fn grouped_psr(dir: f64, n_tx: usize, k_t: usize) -> PsrBeamformer {
    PsrBeamformer {
        phases: (0..n_tx).map(|i| PI * i as f64 * dir).collect(),
        k_t,
        p: n_tx / k_t,
    }
}

/// PSR layer for fixed delays: the subarray offset `π(k-1)P dir` is carried
/// by the delay line, leaving `π(p-1) dir` inside each subarray.
fn fixed_delay_psr(dir: f64, n_tx: usize, k_t: usize) -> PsrBeamformer {
    let p = n_tx / k_t;
    PsrBeamformer {
        phases: (0..n_tx).map(|i| PI * (i % p) as f64 * dir).collect(),
        k_t,
        p,
    }
}

/// Signed TDR delays (seconds) for one RF chain at one subcarrier.
#[derive(Debug, Clone, PartialEq)]
pub struct TdVector {
    delays: Vec<f64>,
    mode: TdMode,
}

impl TdVector {
    pub fn delays(&self) -> &[f64] {
        &self.delays
    }

    pub fn mode(&self) -> TdMode {
        self.mode
    }
}

/// Delays for one RF chain steering toward `dir`.
///
/// * `PaperLiteral`: `t_k = (f_m/f_c - 1)(k-1)P dir / (2 f_m)`, one per TDR.
/// * `OneToOne`: `t_i = i (f_m/f_c - 1) dir / (2 f_m)`, one per antenna.
/// * `FixedDelay`: `t_k = (k-1)P dir / (2 f_c)`, independent of `f_m`.
pub fn compute_time_delays(
    dir: PhysicalDirection1D,
    f_m: f64,
    cfg: &SystemConfig,
    mode: TdMode,
) -> TdVector {
    delays_for(dir.value(), f_m, cfg.f_center_hz(), cfg.n_tx(), cfg.k_t(), mode)
}

fn delays_for(dir: f64, f_m: f64, f_c: f64, n_tx: usize, k_t: usize, mode: TdMode) -> TdVector {
    let p = (n_tx / k_t) as f64;
    let delays = match mode {
        TdMode::PaperLiteral => {
            let c = (f_m / f_c - 1.0) * dir / (2.0 * f_m);
            (0..k_t).map(|k| c * k as f64 * p).collect()
        }
        TdMode::OneToOne => {
            let c = (f_m / f_c - 1.0) * dir / (2.0 * f_m);
            (0..n_tx).map(|i| c * i as f64).collect()
        }
        TdMode::FixedDelay => (0..k_t)
            .map(|k| k as f64 * p * dir / (2.0 * f_c))
            .collect(),
    };
    TdVector { delays, mode }
}

#[derive(Debug, Clone, PartialEq)]
struct RfChain {
    target: PhysicalDirection1D,
    psr: PsrBeamformer,
}

/// The TDR-PSR network of all RF chains.
#[derive(Debug, Clone, PartialEq)]
pub struct TpBeamformer {
    architecture: Architecture,
    chains: Vec<RfChain>,
    f_c: f64,
    n_tx: usize,
    k_t: usize,
}

impl TpBeamformer {
    /// One chain per entry of `targets`; the count must equal `n_rf`.
    pub fn new(
        targets: &[PhysicalDirection1D],
        architecture: Architecture,
        cfg: &SystemConfig,
    ) -> Result<Self> {
        if targets.len() != cfg.n_rf() {
            return Err(Error::DimensionMismatch {
                context: "TP beamformer targets",
                expected: cfg.n_rf(),
                found: targets.len(),
            });
        }
        let (n_tx, k_t) = match architecture {
            Architecture::OneToOne => (cfg.n_tx(), cfg.n_tx()),
            _ => (cfg.n_tx(), cfg.k_t()),
        };
        let chains = targets
            .iter()
            .map(|&target| {
                let psr = match architecture {
                    Architecture::TpFixedDelay => fixed_delay_psr(target.value(), n_tx, k_t),
                    _ => grouped_psr(target.value(), n_tx, k_t),
                };
                RfChain { target, psr }
            })
            .collect();
        Ok(Self {
            architecture,
            chains,
            f_c: cfg.f_center_hz(),
            n_tx,
            k_t,
        })
    }

    pub fn architecture(&self) -> Architecture {
        self.architecture
    }

    pub fn n_rf(&self) -> usize {
        self.chains.len()
    }

    pub fn n_tx(&self) -> usize {
        self.n_tx
    }

    /// TDRs per chain actually in use (`N_TX` for one-to-one).
    pub fn k_t(&self) -> usize {
        self.k_t
    }

    pub fn target(&self, chain: usize) -> PhysicalDirection1D {
        self.chains[chain].target
    }

    pub fn psr(&self, chain: usize) -> &PsrBeamformer {
        &self.chains[chain].psr
    }

    /// Delays of `chain` at `f_m`, `None` without a TD network.
    pub fn delays(&self, chain: usize, f_m: f64) -> Option<TdVector> {
        let mode = self.architecture.td_mode()?;
        let c = &self.chains[chain];
        Some(delays_for(c.target.value(), f_m, self.f_c, self.n_tx, self.k_t, mode))
    }

    /// `a_TP` of one chain at `f_m`.
    pub fn column(&self, chain: usize, f_m: f64) -> DVector<Complex64> {
        let psr = &self.chains[chain].psr;
        let scale = 1.0 / (self.n_tx as f64).sqrt();
        match self.delays(chain, f_m) {
            None => psr.column(),
            Some(td) => {
                let p = psr.p();
                DVector::from_iterator(
                    self.n_tx,
                    psr.phases().iter().enumerate().map(|(i, &ph)| {
                        let t = td.delays()[i / p];
                        Complex64::from_polar(scale, ph + 2.0 * PI * f_m * t)
                    }),
                )
            }
        }
    }

    /// `A^TP_m = A Λ_m`, shape `N_TX × N_RF`.
    pub fn response(&self, f_m: f64) -> DMatrix<Complex64> {
        let cols: Vec<_> = (0..self.n_rf()).map(|n| self.column(n, f_m)).collect();
        DMatrix::from_columns(&cols)
    }
}

/// Free-function form of [`TpBeamformer::response`].
pub fn tp_response(bf: &TpBeamformer, f_m: f64) -> DMatrix<Complex64> {
    bf.response(f_m)
}

/// `|steer^H w|`.
pub fn array_factor(steer: &SteeringVector, bf_column: &DVector<Complex64>) -> Result<f64> {
    if steer.len() != bf_column.len() {
        return Err(Error::DimensionMismatch {
            context: "array factor",
            expected: steer.len(),
            found: bf_column.len(),
        });
    }
    Ok(hermitian_dot(steer.entries(), bf_column).norm())
}

/// Where a PSR-only beam aimed at `dir` peaks at `f_m`.
pub fn beam_split_direction(dir: PhysicalDirection1D, f_m: f64, f_c: f64) -> f64 {
    f_c / f_m * dir.value()
}

/// `|Ξ_P((f_m/f_c - 1) dir)| / P`.
pub fn tp_gain_closed_form(dir: f64, f_m: f64, f_c: f64, p: usize) -> f64 {
    dirichlet_sinc(p, (f_m / f_c - 1.0) * dir).abs() / p as f64
}

/// `1 - |Ξ_P((f_m/f_c - 1) dir)| / P`.
pub fn gain_loss_closed_form(dir: PhysicalDirection1D, f_m: f64, cfg: &SystemConfig) -> f64 {
    1.0 - tp_gain_closed_form(dir.value(), f_m, cfg.f_center_hz(), cfg.p_sub())
}

/// PSR-only gain toward channel direction `channel_dir` when the beam was
/// matched to `beam_dir` at the carrier: `|Ξ_N(beam - (f/f_c) channel)| / N`.
pub fn conventional_gain_closed_form(
    beam_dir: f64,
    channel_dir: f64,
    f_m: f64,
    f_c: f64,
    n: usize,
) -> f64 {
    dirichlet_sinc(n, beam_dir - f_m / f_c * channel_dir).abs() / n as f64
}

/// Uniform direction grid over `[-1, 1]`, endpoints included.
pub fn direction_grid(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        n => (0..n)
            .map(|j| -1.0 + 2.0 * j as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Brute-force `|a(u, f_m)^H w|` for every `u` in `directions`.
///
/// Runs in parallel over directions; output order follows the input.
pub fn gain_pattern(
    column: &DVector<Complex64>,
    directions: &[f64],
    f_m: f64,
    f_c: f64,
) -> Vec<f64> {
    let n = column.len();
    let scale = 1.0 / (n as f64).sqrt();
    let w = column.as_slice();
    directions
        .par_iter()
        .map(|&u| {
            // Σ w_i z^i with z = conj(exp(jπ(f/f_c)u)), by Horner
            let z = Complex64::from_polar(1.0, -PI * f_m / f_c * u);
            let acc = w
                .iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, wi| acc * z + wi);
            (acc * scale).norm()
        })
        .collect()
}

/// Index and value of the largest entry.
pub fn argmax(values: &[f64]) -> Option<(usize, f64)> {
    values
        .iter()
        .copied()
        .enumerate()
        .fold(None, |best, (i, v)| match best {
            Some((_, b)) if b >= v => best,
            _ => Some((i, v)),
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SystemParams;
    use crate::manifold::ula_steering;
    use approx::assert_relative_eq;

    fn reference(k_t: usize) -> SystemConfig {
        SystemParams {
            k_t,
            ..Default::default()
        }
        .build()
        .unwrap()
    }

    fn d(u: f64) -> PhysicalDirection1D {
        PhysicalDirection1D::new(u).unwrap()
    }

    fn tp(cfg: &SystemConfig, u: f64, arch: Architecture) -> TpBeamformer {
        TpBeamformer::new(&[d(u)], arch, cfg).unwrap()
    }

    /// Direct double sum over (k, p), independent of the column builder.
    fn brute_tp_gain(u: f64, f_m: f64, f_c: f64, n_tx: usize, k_t: usize) -> f64 {
        let p = n_tx / k_t;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..k_t {
            let t = (f_m / f_c - 1.0) * (k * p) as f64 * u / (2.0 * f_m);
            for q in 0..p {
                let idx = (k * p + q) as f64;
                let phase = PI * (idx * (f_m / f_c - 1.0) * u - 2.0 * f_m * t);
                acc += Complex64::from_polar(1.0 / n_tx as f64, phase);
            }
        }
        acc.norm()
    }

    #[test]
    fn conventional_psr_phases() {
        let cfg = reference(16);
        assert!(conventional_psr(d(0.0), &cfg).phases().iter().all(|&p| p == 0.0));
        let psr = conventional_psr(d(0.5), &cfg);
        // k = 2, p = 1 is flat index 16: phase 8π
        let ph = psr.subarray(1)[0];
        assert_relative_eq!(ph, 8.0 * PI, epsilon = 1e-12);
        assert!(ph.rem_euclid(2.0 * PI) < 1e-12 || (2.0 * PI - ph.rem_euclid(2.0 * PI)) < 1e-12);
        assert_eq!(psr.k_t(), 16);
        assert_eq!(psr.p(), 16);
    }

    #[test]
    fn conventional_psr_matched_at_carrier() {
        let cfg = reference(16);
        let col = conventional_psr(d(0.5), &cfg).column();
        let a = ula_steering(d(0.5), 300e9, &cfg, 256);
        assert_relative_eq!(array_factor(&a, &col).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn delays_vanish_at_carrier() {
        let cfg = reference(16);
        let td = compute_time_delays(d(0.5), 300e9, &cfg, TdMode::PaperLiteral);
        assert!(td.delays().iter().all(|&t| t == 0.0));
    }

    #[test]
    fn edge_subcarrier_delay() {
        let cfg = reference(16);
        let td = compute_time_delays(d(0.5), 313.5e9, &cfg, TdMode::PaperLiteral);
        assert_eq!(td.delays().len(), 16);
        assert_relative_eq!(td.delays()[1], 5.741626794258364e-13, max_relative = 1e-12);
    }

    #[test]
    fn first_delay_zero_in_every_mode() {
        let cfg = reference(16);
        for mode in [TdMode::PaperLiteral, TdMode::FixedDelay, TdMode::OneToOne] {
            for f in [286.5e9, 300e9, 313.5e9] {
                assert_eq!(compute_time_delays(d(-0.7), f, &cfg, mode).delays()[0], 0.0);
            }
        }
        assert_eq!(
            compute_time_delays(d(0.3), 290e9, &cfg, TdMode::OneToOne).delays().len(),
            256
        );
    }

    #[test]
    fn fixed_delays_ignore_frequency() {
        let cfg = reference(32);
        let a = compute_time_delays(d(0.4), 287e9, &cfg, TdMode::FixedDelay);
        let b = compute_time_delays(d(0.4), 312e9, &cfg, TdMode::FixedDelay);
        assert_eq!(a, b);
        assert_relative_eq!(a.delays()[3], 3.0 * 8.0 * 0.4 / (2.0 * 300e9));
    }

    #[test]
    fn broadside_tp_is_constant() {
        let cfg = reference(16);
        let col = tp(&cfg, 0.0, Architecture::TpPaperLiteral).column(0, 313.5e9);
        for e in col.iter() {
            assert!((e - Complex64::new(1.0 / 16.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn tp_at_carrier_is_conventional() {
        let cfg = reference(16);
        let a = tp(&cfg, 0.5, Architecture::TpPaperLiteral).column(0, 300e9);
        let b = conventional_psr(d(0.5), &cfg).column();
        assert_eq!(a, b);
    }

    #[test]
    fn tp_entries_unit_modulus() {
        let cfg = SystemParams {
            n_rf: 3,
            ..Default::default()
        }
        .build()
        .unwrap();
        for arch in Architecture::ALL {
            let bf = TpBeamformer::new(&[d(0.5), d(-0.3), d(0.9)], arch, &cfg).unwrap();
            let r = tp_response(&bf, 289e9);
            assert_eq!(r.shape(), (256, 3));
            for e in r.iter() {
                assert_relative_eq!(e.norm(), 1.0 / 16.0, epsilon = 1e-15);
            }
        }
        assert!(TpBeamformer::new(&[d(0.5)], Architecture::Conventional, &cfg).is_err());
    }

    #[test]
    fn tp_column_matches_closed_form() {
        let cfg = reference(16);
        for &f in &[286.5e9, 295e9, 300e9, 313.5e9] {
            let col = tp(&cfg, 0.5, Architecture::TpPaperLiteral).column(0, f);
            let a = ula_steering(d(0.5), f, &cfg, 256);
            let brute = array_factor(&a, &col).unwrap();
            assert_relative_eq!(brute, tp_gain_closed_form(0.5, f, 300e9, 16), epsilon = 1e-10);
            assert_relative_eq!(brute, brute_tp_gain(0.5, f, 300e9, 256, 16), epsilon = 1e-10);
        }
    }

    #[test]
    fn array_factor_examples() {
        let cfg = reference(16);
        let a = ula_steering(d(0.5), 313.5e9, &cfg, 256);
        let g = array_factor(&a, &conventional_psr(d(0.5), &cfg).column()).unwrap();
        assert_relative_eq!(g, 0.04069516766975826, epsilon = 1e-10);
        assert_relative_eq!(g, dirichlet_sinc(256, 0.0225).abs() / 256.0, epsilon = 1e-12);

        // DFT-grid neighbours are orthogonal
        let b = ula_steering(d(2.0 / 256.0), 300e9, &cfg, 256);
        let w = conventional_psr(d(0.0), &cfg).column();
        assert!(array_factor(&b, &w).unwrap() < 1e-12);

        assert!(array_factor(&b, &DVector::zeros(3)).is_err());
    }

    #[test]
    fn beam_split_examples() {
        assert_eq!(beam_split_direction(d(0.5), 300e9, 300e9), 0.5);
        assert_relative_eq!(
            beam_split_direction(d(0.5), 313.5e9, 300e9),
            0.4784688995215311,
            epsilon = 1e-15
        );
        assert_eq!(beam_split_direction(d(0.0), 286.5e9, 300e9), 0.0);
    }

    #[test]
    fn beam_split_argmax_on_grid() {
        let cfg = reference(16);
        let grid = direction_grid(4096);
        let step = 2.0 / 4095.0;
        let col = conventional_psr(d(0.5), &cfg).column();
        let pattern = gain_pattern(&col, &grid, 313.5e9, 300e9);
        let (i, peak) = argmax(&pattern).unwrap();
        assert!((grid[i] - 0.4784688995215311).abs() <= step);
        assert!(peak > 0.99);
    }

    #[test]
    fn gain_loss_examples() {
        let cfg = reference(16);
        assert_eq!(gain_loss_closed_form(d(0.5), 300e9, &cfg), 0.0);
        assert_relative_eq!(
            gain_loss_closed_form(d(0.5), 313.5e9, &cfg),
            1.0 - 0.9477471080738908,
            epsilon = 1e-12
        );
        let one_per_antenna = reference(256);
        for f in [286.5e9, 301e9, 313.5e9] {
            assert_eq!(gain_loss_closed_form(d(0.9), f, &one_per_antenna), 0.0);
        }
    }

    #[test]
    fn pattern_matches_array_factor() {
        let cfg = reference(32);
        let col = tp(&cfg, -0.3, Architecture::TpFixedDelay).column(0, 291e9);
        let dirs = [-0.9, -0.3, 0.0, 0.41];
        let pat = gain_pattern(&col, &dirs, 291e9, 300e9);
        for (u, g) in dirs.iter().zip(pat) {
            let a = ula_steering(d(*u), 291e9, &cfg, 256);
            assert_relative_eq!(g, array_factor(&a, &col).unwrap(), epsilon = 1e-11);
        }
    }

    #[test]
    fn conventional_closed_form_matches_pattern() {
        let cfg = reference(16);
        let col = conventional_psr(d(0.5), &cfg).column();
        let dirs = direction_grid(33);
        let pat = gain_pattern(&col, &dirs, 286.5e9, 300e9);
        for (u, g) in dirs.iter().zip(pat) {
            let cf = conventional_gain_closed_form(0.5, *u, 286.5e9, 300e9, 256);
            assert_relative_eq!(g, cf, epsilon = 1e-10);
        }
    }

    #[test]
    fn tp_gain_monotone_over_main_lobe() {
        let cfg = reference(16);
        let bf = tp(&cfg, 0.5, Architecture::TpPaperLiteral);
        let a = |f: f64| array_factor(&ula_steering(d(0.5), f, &cfg, 256), &bf.column(0, f)).unwrap();
        let mut prev = a(300e9);
        for j in 1..=60 {
            let f = 300e9 + j as f64 * 0.25e9;
            let g = a(f);
            assert!(g <= prev + 1e-12, "f={f}: {g} > {prev}");
            prev = g;
        }
    }

    #[test]
    fn architecture_names_round_trip() {
        for a in Architecture::ALL {
            assert_eq!(a.name().parse::<Architecture>().unwrap(), a);
        }
        assert!("tp".parse::<Architecture>().is_err());
    }

    #[test]
    fn direction_grid_shape() {
        let g = direction_grid(4096);
        assert_eq!(g.len(), 4096);
        assert_eq!(g[0], -1.0);
        assert_eq!(g[4095], 1.0);
        assert_eq!(direction_grid(1), vec![0.0]);
    }
}
