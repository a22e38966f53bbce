//! Ray-based frequency-domain channels and end-to-end signal assembly.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::f64::consts::TAU;

use crate::beamforming::TpBeamformer;
use crate::config::{FrequencyGrid, SystemConfig};
use crate::error::{Error, Result};
use crate::manifold::{
    ula_steering_at, upa_steering_at, PhysicalDirection1D, PhysicalDirection2D,
};
use crate::ris::RisResponse;

/// One propagation ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathComponent<Dep, Arr> {
    pub gain: Complex64,
    pub departure: Dep,
    pub arrival: Arr,
}

/// BS (ULA) → RIS (UPA) ray.
pub type BsRisPath = PathComponent<PhysicalDirection1D, PhysicalDirection2D>;
/// RIS (UPA) → UE (ULA) ray.
pub type RisUePath = PathComponent<PhysicalDirection2D, PhysicalDirection1D>;

impl<Dep, Arr> PathComponent<Dep, Arr> {
    pub fn new(gain: Complex64, departure: Dep, arrival: Arr) -> Result<Self> {
        if !(gain.norm() > 0.0 && gain.norm().is_finite()) {
            return Err(Error::InvalidPath(format!(
                "path gain {gain} must be finite and non-zero"
            )));
        }
        Ok(Self {
            gain,
            departure,
            arrival,
        })
    }
}

/// Unit-magnitude gain with a uniformly drawn phase.
pub fn random_unit_gain<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::from_polar(1.0, rng.random_range(0.0..TAU))
}

/// Both hops of the link.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    bs_ris_paths: Vec<BsRisPath>,
    ris_ue_paths: Vec<RisUePath>,
}

impl ChannelSet {
    pub fn new(
        bs_ris_paths: Vec<BsRisPath>,
        ris_ue_paths: Vec<RisUePath>,
        cfg: &SystemConfig,
    ) -> Result<Self> {
        if bs_ris_paths.is_empty() || ris_ue_paths.is_empty() {
            return Err(Error::InvalidPath(
                "each hop needs at least one path".into(),
            ));
        }
        let cap = cfg.n_rx().min(cfg.f_ris());
        if ris_ue_paths.len() > cap {
            return Err(Error::InvalidPath(format!(
                "{} RIS-UE paths exceed min(n_rx, f_ris) = {cap}",
                ris_ue_paths.len()
            )));
        }
        Ok(Self {
            bs_ris_paths,
            ris_ue_paths,
        })
    }

    pub fn bs_ris_paths(&self) -> &[BsRisPath] {
        &self.bs_ris_paths
    }

    pub fn ris_ue_paths(&self) -> &[RisUePath] {
        &self.ris_ue_paths
    }

    /// Sum of `|α|` over the BS-RIS hop.
    pub fn bs_ris_gain_sum(&self) -> f64 {
        self.bs_ris_paths.iter().map(|p| p.gain.norm()).sum()
    }
}

/// `G_m = Σ α a_RIS(arrival) a_BS^H(departure)`, shape `F × N_TX`.
pub fn bs_ris_channel(
    paths: &ChannelSet,
    f_m: f64,
    cfg: &SystemConfig,
) -> Result<DMatrix<Complex64>> {
    let f_c = cfg.f_center_hz();
    let mut g = DMatrix::zeros(cfg.f_ris(), cfg.n_tx());
    for p in paths.bs_ris_paths() {
        let ris = upa_steering_at(&p.arrival, f_m, f_c, cfg.f_ris())?;
        let bs = ula_steering_at(p.departure.value(), f_m, f_c, cfg.n_tx());
        check_len("bs_ris_channel (RIS side)", cfg.f_ris(), ris.len())?;
        check_len("bs_ris_channel (BS side)", cfg.n_tx(), bs.len())?;
        g += (ris.entries() * p.gain) * bs.entries().adjoint();
    }
    Ok(g)
}

/// `H_m = Σ α a_UE(arrival) a_RIS^H(departure)`, shape `N_RX × F`.
pub fn ris_ue_channel(
    paths: &ChannelSet,
    f_m: f64,
    cfg: &SystemConfig,
) -> Result<DMatrix<Complex64>> {
    let f_c = cfg.f_center_hz();
    let mut h = DMatrix::zeros(cfg.n_rx(), cfg.f_ris());
    for p in paths.ris_ue_paths() {
        let ue = ula_steering_at(p.arrival.value(), f_m, f_c, cfg.n_rx());
        let ris = upa_steering_at(&p.departure, f_m, f_c, cfg.f_ris())?;
        check_len("ris_ue_channel (UE side)", cfg.n_rx(), ue.len())?;
        check_len("ris_ue_channel (RIS side)", cfg.f_ris(), ris.len())?;
        h += (ue.entries() * p.gain) * ris.entries().adjoint();
    }
    Ok(h)
}

pub(crate) fn check_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}

/// AWGN description. `variance` is `E|z|²` per complex entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub variance: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self {
            variance: 0.0,
            seed: 0,
        }
    }
}

/// Seeded noise source; one per run.
#[derive(Debug, Clone)]
pub struct NoiseGenerator {
    variance: f64,
    rng: ChaCha8Rng,
}

impl NoiseGenerator {
    pub fn new(model: NoiseModel) -> Result<Self> {
        if !(model.variance >= 0.0 && model.variance.is_finite()) {
            return Err(Error::InvalidConfig {
                invariant: "noise-variance",
                detail: format!("noise variance {} must be >= 0", model.variance),
            });
        }
        Ok(Self {
            variance: model.variance,
            rng: ChaCha8Rng::seed_from_u64(model.seed),
        })
    }

    pub fn sample(&mut self, n: usize) -> DVector<Complex64> {
        if self.variance == 0.0 {
            return DVector::zeros(n);
        }
        let normal = Normal::new(0.0, (0.5 * self.variance).sqrt())
            .expect("standard deviation is finite and non-negative");
        DVector::from_iterator(
            n,
            (0..n).map(|_| Complex64::new(normal.sample(&mut self.rng), normal.sample(&mut self.rng))),
        )
    }
}

/// Per-subcarrier digital precoders `D_m` (`N_RF × N_S`), checked against
/// `Σ_m ‖A Λ_m D_m‖_F² ≤ P_total` at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DigitalPrecoders {
    per_subcarrier: Vec<DMatrix<Complex64>>,
    power: f64,
}

impl DigitalPrecoders {
    pub fn new(
        per_subcarrier: Vec<DMatrix<Complex64>>,
        bf: &TpBeamformer,
        grid: &FrequencyGrid,
        cfg: &SystemConfig,
    ) -> Result<Self> {
        check_len("digital precoders (subcarriers)", grid.len(), per_subcarrier.len())?;
        for d in &per_subcarrier {
            check_len("digital precoder rows", cfg.n_rf(), d.nrows())?;
            check_len("digital precoder columns", cfg.n_streams(), d.ncols())?;
        }
        let power = transmit_power(&per_subcarrier, bf, grid)?;
        if power > cfg.p_total() * (1.0 + 1e-12) {
            return Err(Error::PowerConstraint {
                used: power,
                budget: cfg.p_total(),
            });
        }
        Ok(Self {
            per_subcarrier,
            power,
        })
    }

    /// Scaled selection of the first `N_S` RF chains on every subcarrier,
    /// spending the budget exactly: `‖A^TP_m E‖_F² = N_S` for unit-norm TP
    /// columns, so the scale is `√(P_total / (M N_S))`.
    pub fn default_selection(
        bf: &TpBeamformer,
        grid: &FrequencyGrid,
        cfg: &SystemConfig,
    ) -> Result<Self> {
        let scale = (cfg.p_total() / (grid.len() * cfg.n_streams()) as f64).sqrt();
        let d = DMatrix::from_fn(cfg.n_rf(), cfg.n_streams(), |r, c| {
            if r == c {
                Complex64::new(scale, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Self::new(vec![d; grid.len()], bf, grid, cfg)
    }

    /// `D_m`, 1-based.
    pub fn get(&self, m: usize) -> Option<&DMatrix<Complex64>> {
        m.checked_sub(1).and_then(|i| self.per_subcarrier.get(i))
    }

    /// Total transmit power across subcarriers.
    pub fn power(&self) -> f64 {
        self.power
    }
}

/// `Σ_m ‖A^TP_m D_m‖_F²`.
pub fn transmit_power(
    per_subcarrier: &[DMatrix<Complex64>],
    bf: &TpBeamformer,
    grid: &FrequencyGrid,
) -> Result<f64> {
    check_len("transmit power (subcarriers)", grid.len(), per_subcarrier.len())?;
    Ok(grid
        .iter()
        .zip(per_subcarrier)
        .map(|((_, f), d)| (bf.response(f) * d).norm_squared())
        .sum())
}

/// Everything fixed across subcarriers for one downlink.
#[derive(Debug, Clone, Copy)]
pub struct Downlink<'a> {
    pub cfg: &'a SystemConfig,
    pub grid: &'a FrequencyGrid,
    pub channels: &'a ChannelSet,
    pub ris: &'a RisResponse,
    pub bf: &'a TpBeamformer,
    pub digital: &'a DigitalPrecoders,
}

impl Downlink<'_> {
    /// `y_m = H_m Ψ G_m A Λ_m D_m s_m + z_m` for subcarrier `m` (1-based).
    pub fn received_signal(
        &self,
        m: usize,
        s: &DVector<Complex64>,
        noise: &mut NoiseGenerator,
    ) -> Result<DVector<Complex64>> {
        let cfg = self.cfg;
        let f_m = self.grid.frequency(m).ok_or(Error::IndexOutOfRange {
            what: "subcarrier",
            index: m,
            len: self.grid.len(),
        })?;
        check_len("transmitted symbol", cfg.n_streams(), s.len())?;
        check_len("RIS response", cfg.f_ris(), self.ris.len())?;
        check_len("TP beamformer chains", cfg.n_rf(), self.bf.n_rf())?;
        check_len("TP beamformer antennas", cfg.n_tx(), self.bf.n_tx())?;
        let d = self.digital.get(m).ok_or(Error::IndexOutOfRange {
            what: "digital precoder",
            index: m,
            len: self.grid.len(),
        })?;

        let g = bs_ris_channel(self.channels, f_m, cfg)?;
        let h = ris_ue_channel(self.channels, f_m, cfg)?;
        // right to left keeps every intermediate a vector
        let x = self.bf.response(f_m) * (d * s);
        let at_ris = self.ris.apply(&(g * x));
        Ok(h * at_ris + noise.sample(cfg.n_rx()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beamforming::Architecture;
    use crate::config::SystemParams;
    use approx::assert_relative_eq;

    fn small_cfg(n_rf: usize, n_streams: usize) -> SystemConfig {
        SystemParams {
            n_tx: 16,
            n_rx: 4,
            n_rf,
            n_streams,
            k_t: 4,
            f_ris: 9,
            m_subcarriers: 5,
            ..Default::default()
        }
        .build()
        .unwrap()
    }

    fn dir1(u: f64) -> PhysicalDirection1D {
        PhysicalDirection1D::new(u).unwrap()
    }

    fn dir2(a: f64, e: f64) -> PhysicalDirection2D {
        PhysicalDirection2D::new(a, e).unwrap()
    }

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    fn los(cfg: &SystemConfig) -> ChannelSet {
        ChannelSet::new(
            vec![BsRisPath::new(one(), dir1(0.5), dir2(0.4, 0.5)).unwrap()],
            vec![RisUePath::new(one(), dir2(0.5, 0.75f64.sqrt()), dir1(0.1)).unwrap()],
            cfg,
        )
        .unwrap()
    }

    fn rank(m: &DMatrix<Complex64>) -> usize {
        let sv = m.clone().svd(false, false).singular_values;
        let top = sv.max();
        sv.iter().filter(|s| **s > top * 1e-9).count()
    }

    #[test]
    fn single_path_bs_ris_is_unit_rank_one() {
        let cfg = small_cfg(1, 1);
        let g = bs_ris_channel(&los(&cfg), 305e9, &cfg).unwrap();
        assert_eq!(g.shape(), (9, 16));
        assert_eq!(rank(&g), 1);
        assert_relative_eq!(g.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn corner_entry_at_carrier() {
        let cfg = small_cfg(1, 1);
        let g = bs_ris_channel(&los(&cfg), 300e9, &cfg).unwrap();
        assert!((g[(0, 0)] - Complex64::new(1.0 / (9.0f64 * 16.0).sqrt(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn duplicate_paths_add_linearly() {
        let cfg = small_cfg(1, 1);
        let single = los(&cfg);
        let p = single.bs_ris_paths()[0];
        let doubled =
            ChannelSet::new(vec![p, p], single.ris_ue_paths().to_vec(), &cfg).unwrap();
        let g1 = bs_ris_channel(&single, 290e9, &cfg).unwrap();
        let g2 = bs_ris_channel(&doubled, 290e9, &cfg).unwrap();
        assert!((g2 - g1 * Complex64::new(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn ris_ue_single_path_unit_norm() {
        let cfg = small_cfg(1, 1);
        let h = ris_ue_channel(&los(&cfg), 311e9, &cfg).unwrap();
        assert_eq!(h.shape(), (4, 9));
        assert_relative_eq!(h.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ris_ue_rank_tracks_path_count() {
        let cfg = small_cfg(1, 1);
        let bs = los(&cfg).bs_ris_paths().to_vec();
        let angles = [(0.1, 0.2, -0.6), (-0.5, 0.7, 0.3), (0.9, -0.4, 0.8)];
        for l2 in 1..=3 {
            let ue: Vec<_> = angles[..l2]
                .iter()
                .map(|&(a, e, u)| {
                    RisUePath::new(Complex64::from_polar(1.0, a), dir2(a, e), dir1(u)).unwrap()
                })
                .collect();
            let set = ChannelSet::new(bs.clone(), ue, &cfg).unwrap();
            let h = ris_ue_channel(&set, 300e9, &cfg).unwrap();
            assert_eq!(rank(&(h.adjoint() * &h)), l2);
        }
    }

    #[test]
    fn broadside_ris_ue_entries_equal() {
        let cfg = small_cfg(1, 1);
        // azimuth 0 and elevation ±90° zero both RIS slopes
        let a = Complex64::new(0.3, -0.4);
        let b = Complex64::new(1.1, 0.2);
        let set = ChannelSet::new(
            los(&cfg).bs_ris_paths().to_vec(),
            vec![
                RisUePath::new(a, dir2(0.0, 1.0), dir1(0.0)).unwrap(),
                RisUePath::new(b, dir2(0.0, -1.0), dir1(0.0)).unwrap(),
            ],
            &cfg,
        )
        .unwrap();
        let h = ris_ue_channel(&set, 300e9, &cfg).unwrap();
        let want = (a + b) / (4.0f64 * 9.0).sqrt();
        for e in h.iter() {
            assert!((e - want).norm() < 1e-15);
        }
    }

    #[test]
    fn path_count_limits() {
        let cfg = small_cfg(1, 1);
        let base = los(&cfg);
        assert!(ChannelSet::new(vec![], base.ris_ue_paths().to_vec(), &cfg).is_err());
        let many = vec![base.ris_ue_paths()[0]; 5];
        assert!(ChannelSet::new(base.bs_ris_paths().to_vec(), many, &cfg).is_err());
        assert!(BsRisPath::new(Complex64::new(0.0, 0.0), dir1(0.1), dir2(0.1, 0.1)).is_err());
    }

    #[test]
    fn default_precoder_spends_budget_exactly() {
        let cfg = SystemParams {
            n_tx: 16,
            n_rx: 4,
            n_rf: 3,
            n_streams: 2,
            k_t: 4,
            f_ris: 9,
            m_subcarriers: 7,
            p_total: 2.5,
            ..Default::default()
        }
        .build()
        .unwrap();
        let grid = cfg.frequency_grid().unwrap();
        let bf = TpBeamformer::new(
            &[dir1(0.5), dir1(-0.2), dir1(0.8)],
            Architecture::TpPaperLiteral,
            &cfg,
        )
        .unwrap();
        let d = DigitalPrecoders::default_selection(&bf, &grid, &cfg).unwrap();
        assert_relative_eq!(d.power(), 2.5, max_relative = 1e-12);

        let over = vec![d.get(1).unwrap() * Complex64::new(1.01, 0.0); 7];
        assert!(matches!(
            DigitalPrecoders::new(over, &bf, &grid, &cfg),
            Err(Error::PowerConstraint { .. })
        ));
    }

    #[test]
    fn noise_is_seeded_and_scaled() {
        let model = NoiseModel {
            variance: 2.0,
            seed: 42,
        };
        let a = NoiseGenerator::new(model).unwrap().sample(20_000);
        let b = NoiseGenerator::new(model).unwrap().sample(20_000);
        assert_eq!(a, b);
        let mean_power = a.norm_squared() / a.len() as f64;
        assert!((mean_power - 2.0).abs() < 0.1, "{mean_power}");
        assert!(NoiseGenerator::new(NoiseModel { variance: -1.0, seed: 0 }).is_err());
        let z = NoiseGenerator::new(NoiseModel::noiseless()).unwrap().sample(3);
        assert_eq!(z, DVector::zeros(3));
    }
}
