//! Seeded random trigonometric forms for property tests and verification suites.

use crate::forms::*;
use crate::gauge::LieAlgebra;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Sampler {
    pub rng: ChaCha8Rng,
    /// Largest |k_j| of sampled modes.
    pub kmax: i32,
    /// Number of random terms per sampled form.
    pub terms: usize,
    /// Only these real axes carry nonzero modes (all when empty).
    pub axes: Vec<usize>,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed), kmax: 1, terms: 3, axes: vec![] }
    }

    pub fn kmax(mut self, k: i32) -> Self {
        self.kmax = k;
        self
    }

    pub fn terms(mut self, t: usize) -> Self {
        self.terms = t;
        self
    }

    pub fn axes(mut self, axes: &[usize]) -> Self {
        self.axes = axes.to_vec();
        self
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }

    pub fn complex(&mut self) -> C64 {
        c(self.uniform(-1.0, 1.0), self.uniform(-1.0, 1.0))
    }

    pub fn vec(&mut self, len: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..len).map(|_| self.uniform(lo, hi)).collect()
    }

    pub fn mode(&mut self, frame: Frame) -> Mode {
        let mut k = [0; 2 * MAX_N];
        for j in 0..frame.dim() {
            if self.axes.is_empty() || self.axes.contains(&j) {
                k[j] = self.rng.gen_range(-self.kmax..=self.kmax);
            }
        }
        k
    }

    pub fn matrix(&mut self, m: usize) -> DMatrix<C64> {
        DMatrix::from_fn(m, m, |_, _| c(self.rng.gen_range(-1.0..1.0), self.rng.gen_range(-1.0..1.0)))
    }

    fn pick<T: Copy>(&mut self, v: &[T]) -> Option<T> {
        if v.is_empty() {
            None
        } else {
            Some(v[self.rng.gen_range(0..v.len())])
        }
    }

    fn from_blades(&mut self, frame: Frame, blades: &[Blade]) -> TrigForm {
        let mut r = TrigForm::trig_zero(frame, 1);
        for _ in 0..self.terms {
            if let Some(b) = self.pick(blades) {
                let k = self.mode(frame);
                let z = self.complex();
                r.add_term(b, &TrigMat::scalar_mode(k, z));
            }
        }
        r
    }

    /// Complex scalar form of degree k.
    pub fn scalar(&mut self, frame: Frame, k: usize) -> TrigForm {
        self.from_blades(frame, &frame.blades(k))
    }

    /// Complex scalar form of type (p,q).
    pub fn scalar_pq(&mut self, frame: Frame, p: usize, q: usize) -> TrigForm {
        self.from_blades(frame, &frame.blades_pq(p, q))
    }

    /// Real scalar form of degree k.
    pub fn real(&mut self, frame: Frame, k: usize) -> TrigForm {
        self.scalar(frame, k).re()
    }

    /// Real form of type (p,q)+(q,p).
    pub fn real_pq(&mut self, frame: Frame, p: usize, q: usize) -> TrigForm {
        self.scalar_pq(frame, p, q).re()
    }

    /// Constant real (1,1)-form, positive definite as a Hermitian form when `positive`.
    pub fn constant_hermitian(&mut self, frame: Frame, positive: bool) -> TrigForm {
        let n = frame.n;
        let a = self.matrix(n);
        let mut h = &a * a.adjoint() * cr(0.5);
        if positive {
            h += DMatrix::identity(n, n) * cr(0.5);
        } else {
            h = (&a + a.adjoint()) * cr(0.5);
        }
        hermitian_to_form(frame, &h)
    }

    /// 𝔤-valued form of degree k: Σ_i e_i φ_i with real φ_i (𝔨-valued) or complex φ_i.
    pub fn lie(&mut self, alg: &LieAlgebra, frame: Frame, k: usize, compact: bool) -> TrigForm {
        let m = alg.dim_matrix();
        let mut r = TrigForm::trig_zero(frame, m);
        for e in alg.basis.clone() {
            let phi = if compact { self.real(frame, k) } else { self.scalar(frame, k) };
            r = r.add(&matrix_times(&phi, &e));
        }
        r
    }

    /// 𝔤-valued form of type (p,q) with complex coefficients.
    pub fn lie_pq(&mut self, alg: &LieAlgebra, frame: Frame, p: usize, q: usize) -> TrigForm {
        let m = alg.dim_matrix();
        let mut r = TrigForm::trig_zero(frame, m);
        for e in alg.basis.clone() {
            let phi = self.scalar_pq(frame, p, q);
            r = r.add(&matrix_times(&phi, &e));
        }
        r
    }
}

/// Scalar form times a constant matrix.
pub fn matrix_times(phi: &TrigForm, e: &DMatrix<C64>) -> TrigForm {
    let mut r = TrigForm::trig_zero(phi.frame, e.nrows());
    for (b, c0) in &phi.terms {
        let mut t = TrigMat { m: e.nrows(), modes: Default::default() };
        for (k, a) in &c0.modes {
            t.modes.insert(*k, e * a[(0, 0)]);
        }
        r.add_term(*b, &t);
    }
    r.approx = phi.approx;
    r
}

/// ω = (i/2) Σ h_{jk} dz^j∧dz̄^k for a Hermitian matrix h.
pub fn hermitian_to_form(frame: Frame, h: &DMatrix<C64>) -> TrigForm {
    let n = frame.n;
    let mut r = TrigForm::trig_zero(frame, 1);
    for j in 0..n {
        for k in 0..n {
            let z = h[(j, k)] * c(0.0, 0.5);
            let b = (1 << j) | (1 << (n + k));
            let s = merge_sign(1 << j, 1 << (n + k)) as f64;
            r.add_term(b, &TrigMat::scalar_mode([0; 2 * MAX_N], z * s));
        }
    }
    r
}
