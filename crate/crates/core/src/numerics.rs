//! Complex linear algebra and seeded sampling shared by the other modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

pub type CVec = DVector<Complex64>;
pub type CMat = DMatrix<Complex64>;

/// Random stream for one Monte Carlo trial.
pub type TrialStream = ChaCha8Rng;

/// Identifies the random stream of one trial within an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub trial_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, trial_index: u64) -> Self {
        Self {
            master_seed,
            trial_index,
        }
    }
}

/// Stream for `(master_seed, trial_index)`.
///
/// The master seed keys a ChaCha8 generator and the trial index selects one of
/// its 2^64 independent streams, so every trial can be regenerated on its own
/// in any order or on any thread.
pub fn derive_trial_stream(spec: SeedSpec) -> TrialStream {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.master_seed);
    rng.set_stream(spec.trial_index);
    rng
}

/// Draws from CN(0, variance): real and imaginary parts are independent
/// N(0, variance / 2).
pub fn sample_complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Result<Complex64> {
    if !(variance.is_finite() && variance > 0.0) {
        return Err(Error::InvalidInput(format!(
            "complex Gaussian variance must be positive, got {variance}"
        )));
    }
    let scale = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Ok(Complex64::new(scale * re, scale * im))
}

/// Solves `A x = b` for Hermitian positive definite `A` by Cholesky
/// factorization (no explicit inverse is formed).
pub fn hermitian_solve(a: &CMat, b: &CVec) -> Result<CVec> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(Error::InvalidInput(format!(
            "dimension mismatch: A is {}x{}, b has length {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    if a.iter().chain(b.iter()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidInput("non-finite entry in linear system".into()));
    }
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let asym = (a - a.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if asym > 1e-12 * scale {
        return Err(Error::InvalidInput("matrix is not Hermitian".into()));
    }
    let l = cholesky_lower(a)?;
    // forward substitution L y = b, then back substitution L^H x = y
    let mut y = b.clone();
    for i in 0..n {
        let mut acc = y[i];
        for j in 0..i {
            acc -= l[(i, j)] * y[j];
        }
        y[i] = acc / l[(i, i)].re;
    }
    let mut x = y;
    for i in (0..n).rev() {
        let mut acc = x[i];
        for j in i + 1..n {
            acc -= l[(j, i)].conj() * x[j];
        }
        x[i] = acc / l[(i, i)].re;
    }
    Ok(x)
}

/// Lower-triangular `L` with `A = L L^H`. Pivots must be real and strictly
/// positive relative to the matrix scale.
fn cholesky_lower(a: &CMat) -> Result<CMat> {
    let n = a.nrows();
    let scale = (0..n).map(|i| a[(i, i)].re.abs()).fold(0.0, f64::max);
    let mut l = CMat::zeros(n, n);
    for j in 0..n {
        let mut pivot = a[(j, j)].re;
        for k in 0..j {
            pivot -= l[(j, k)].norm_sqr();
        }
        if pivot.is_nan() || pivot <= f64::EPSILON * scale {
            return Err(Error::SingularMatrix);
        }
        let diag = pivot.sqrt();
        l[(j, j)] = Complex64::new(diag, 0.0);
        for i in j + 1..n {
            let mut acc = a[(i, j)];
            for k in 0..j {
                acc -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = acc / diag;
        }
    }
    Ok(l)
}

/// Euclidean norm of a complex vector.
pub fn cnorm(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
