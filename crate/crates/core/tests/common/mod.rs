//! Naive reference implementation of the downlink: every matrix built
//! element by element from the array geometry, then multiplied in full.

#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;

pub type Mat = Vec<Vec<Complex64>>;

pub fn zeros(r: usize, c: usize) -> Mat {
    vec![vec![Complex64::new(0.0, 0.0); c]; r]
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    let mut out = zeros(n, m);
    for i in 0..n {
        for j in 0..m {
            for l in 0..k {
                out[i][j] += a[i][l] * b[l][j];
            }
        }
    }
    out
}

pub fn ula(u: f64, f: f64, f_c: f64, n: usize) -> Vec<Complex64> {
    let s = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|i| Complex64::from_polar(s, PI * f / f_c * i as f64 * u))
        .collect()
}

/// Row-major over `(x, y)`, `x` the outer index.
pub fn upa(row_slope: f64, col_slope: f64, f: f64, f_c: f64, side: usize) -> Vec<Complex64> {
    let s = 1.0 / side as f64;
    let mut v = Vec::with_capacity(side * side);
    for x in 0..side {
        for y in 0..side {
            let ph = PI * f / f_c * (x as f64 * row_slope + y as f64 * col_slope);
            v.push(Complex64::from_polar(s, ph));
        }
    }
    v
}

pub fn outer(gain: Complex64, a: &[Complex64], b: &[Complex64]) -> Mat {
    a.iter()
        .map(|x| b.iter().map(|y| gain * x * y.conj()).collect())
        .collect()
}

pub fn add_into(acc: &mut Mat, m: &Mat) {
    for (r, s) in acc.iter_mut().zip(m) {
        for (x, y) in r.iter_mut().zip(s) {
            *x += y;
        }
    }
}

pub struct BsRis {
    pub gain: Complex64,
    pub departure: f64,
    pub az_sin: f64,
    pub el_sin: f64,
}

pub struct RisUe {
    pub gain: Complex64,
    pub az_sin: f64,
    pub el_sin: f64,
    pub arrival: f64,
}

pub struct Link {
    pub n_tx: usize,
    pub n_rx: usize,
    pub k_t: usize,
    pub side: usize,
    pub f_c: f64,
    pub targets: Vec<f64>,
    pub bs_ris: Vec<BsRis>,
    pub ris_ue: Vec<RisUe>,
    pub ris_phases: Vec<f64>,
}

impl Link {
    pub fn g(&self, f: f64) -> Mat {
        let f_ris = self.side * self.side;
        let mut g = zeros(f_ris, self.n_tx);
        for p in &self.bs_ris {
            let el_cos = (1.0 - p.el_sin * p.el_sin).sqrt();
            let r = upa(p.az_sin * p.el_sin, el_cos, f, self.f_c, self.side);
            let b = ula(p.departure, f, self.f_c, self.n_tx);
            add_into(&mut g, &outer(p.gain, &r, &b));
        }
        g
    }

    pub fn h(&self, f: f64) -> Mat {
        let f_ris = self.side * self.side;
        let mut h = zeros(self.n_rx, f_ris);
        for p in &self.ris_ue {
            let el_cos = (1.0 - p.el_sin * p.el_sin).sqrt();
            let u = ula(p.arrival, f, self.f_c, self.n_rx);
            let r = upa(p.az_sin * p.el_sin, el_cos, f, self.f_c, self.side);
            add_into(&mut h, &outer(p.gain, &u, &r));
        }
        h
    }

    pub fn psi(&self) -> Mat {
        let n = self.ris_phases.len();
        let mut m = zeros(n, n);
        for (i, &ph) in self.ris_phases.iter().enumerate() {
            m[i][i] = Complex64::from_polar(1.0, ph);
        }
        m
    }

    /// Block-diagonal PSR matrix, `N_TX × N_RF K_T`.
    pub fn a(&self) -> Mat {
        let n_rf = self.targets.len();
        let p = self.n_tx / self.k_t;
        let s = 1.0 / (self.n_tx as f64).sqrt();
        let mut a = zeros(self.n_tx, n_rf * self.k_t);
        for (n, &u) in self.targets.iter().enumerate() {
            for i in 0..self.n_tx {
                a[i][n * self.k_t + i / p] = Complex64::from_polar(s, PI * i as f64 * u);
            }
        }
        a
    }

    /// TD matrix, `N_RF K_T × N_RF`, delays `(f/f_c - 1)(k-1)P u / (2f)`.
    pub fn lambda(&self, f: f64) -> Mat {
        let n_rf = self.targets.len();
        let p = (self.n_tx / self.k_t) as f64;
        let mut l = zeros(n_rf * self.k_t, n_rf);
        for (n, &u) in self.targets.iter().enumerate() {
            for k in 0..self.k_t {
                let t = (f / self.f_c - 1.0) * k as f64 * p * u / (2.0 * f);
                l[n * self.k_t + k][n] = Complex64::from_polar(1.0, 2.0 * PI * f * t);
            }
        }
        l
    }

    pub fn received(&self, f: f64, d: &Mat, s: &[Complex64]) -> Vec<Complex64> {
        let s_col: Mat = s.iter().map(|&x| vec![x]).collect();
        let chain = [self.h(f), self.psi(), self.g(f), self.a(), self.lambda(f), d.clone(), s_col];
        let mut acc = chain[0].clone();
        for m in &chain[1..] {
            acc = matmul(&acc, m);
        }
        acc.into_iter().map(|r| r[0]).collect()
    }
}
