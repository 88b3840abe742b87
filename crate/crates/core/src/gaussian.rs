//! Multimode Gaussian states in the covariance-matrix picture.
//!
//! Quadratures are ordered `(x₁, p₁, x₂, p₂, …)` with `x = (a + a†)/2`, so the
//! vacuum variance of every quadrature is exactly [`VACUUM_VARIANCE`] = 1/4.
//! All operations are pure: they take `&self` and return a new state.

use nalgebra::{Complex, DMatrix, DVector, Matrix2, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Quadrature variance of the vacuum (shot noise) under the `x = (a + a†)/2`
/// convention.
pub const VACUUM_VARIANCE: f64 = 0.25;

/// Entrywise tolerance on covariance symmetry.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Slack allowed on the uncertainty bound (symplectic eigenvalues ≥ 1/4).
pub const UNCERTAINTY_TOL: f64 = 1e-9;

/// 2×2 rotation acting on a `(x, p)` pair; rotates `(1, 0)` onto `(cos θ, sin θ)`.
pub fn rotation_block(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// The standard symplectic form Ω for `n_modes` modes.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

/// A linear symplectic map on the quadratures of a subset of modes.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticTransform {
    matrix: DMatrix<f64>,
    acts_on: Vec<usize>,
}

impl SymplecticTransform {
    /// Wraps a raw matrix. The matrix must be `2k × 2k` for `k = acts_on.len()`
    /// distinct modes and must satisfy `S Ω Sᵀ = Ω` to within `tol`.
    pub fn new(matrix: DMatrix<f64>, acts_on: Vec<usize>, tol: f64) -> Result<Self> {
        let k = acts_on.len();
        if k == 0 {
            return Err(Error::invalid("transform must act on at least one mode"));
        }
        if matrix.nrows() != 2 * k || matrix.ncols() != 2 * k {
            return Err(Error::invalid(format!(
                "transform on {k} modes needs a {0}x{0} matrix, got {1}x{2}",
                2 * k,
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        check_distinct(&acts_on)?;
        let t = SymplecticTransform { matrix, acts_on };
        let err = t.symplectic_defect();
        if err > tol {
            return Err(Error::invalid(format!(
                "matrix is not symplectic (max |SΩSᵀ − Ω| = {err:e})"
            )));
        }
        Ok(t)
    }

    /// Phase rotation of a single mode by `theta` radians.
    pub fn rotation(mode: usize, theta: f64) -> Self {
        let r = rotation_block(theta);
        SymplecticTransform {
            matrix: DMatrix::from_iterator(2, 2, r.iter().copied()),
            acts_on: vec![mode],
        }
    }

    /// Real orthogonal two-mode mixer with transmissivity `t`:
    /// `x_i' = √t x_i + √(1−t) x_j`, `x_j' = −√(1−t) x_i + √t x_j`, same for `p`.
    pub fn beam_splitter(mode_i: usize, mode_j: usize, t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::invalid(format!("transmissivity {t} outside [0, 1]")));
        }
        if mode_i == mode_j {
            return Err(Error::invalid("beam splitter needs two distinct modes"));
        }
        let a = t.sqrt();
        let b = (1.0 - t).sqrt();
        let mut m = DMatrix::zeros(4, 4);
        for q in 0..2 {
            m[(q, q)] = a;
            m[(q, 2 + q)] = b;
            m[(2 + q, q)] = -b;
            m[(2 + q, 2 + q)] = a;
        }
        Ok(SymplecticTransform {
            matrix: m,
            acts_on: vec![mode_i, mode_j],
        })
    }

    /// Single-mode squeezer: the quadrature at `angle` is scaled by `e^(−r)`,
    /// its conjugate by `e^(r)`.
    pub fn squeezer(mode: usize, r: f64, angle: f64) -> Self {
        let rot = rotation_block(angle);
        let s = rot * Matrix2::new((-r).exp(), 0.0, 0.0, r.exp()) * rot.transpose();
        SymplecticTransform {
            matrix: DMatrix::from_iterator(2, 2, s.iter().copied()),
            acts_on: vec![mode],
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn acts_on(&self) -> &[usize] {
        &self.acts_on
    }

    /// Largest entrywise deviation of `S Ω Sᵀ` from `Ω`.
    pub fn symplectic_defect(&self) -> f64 {
        let omega = symplectic_form(self.acts_on.len());
        let lhs = &self.matrix * &omega * self.matrix.transpose();
        (lhs - omega).amax()
    }

    /// Embeds the transform into the full `2n × 2n` quadrature space.
    pub fn embed(&self, n_modes: usize) -> Result<DMatrix<f64>> {
        if let Some(&m) = self.acts_on.iter().find(|&&m| m >= n_modes) {
            return Err(Error::invalid(format!(
                "mode {m} out of range for a {n_modes}-mode state"
            )));
        }
        let mut full = DMatrix::identity(2 * n_modes, 2 * n_modes);
        for (a, &ma) in self.acts_on.iter().enumerate() {
            for (b, &mb) in self.acts_on.iter().enumerate() {
                for qa in 0..2 {
                    for qb in 0..2 {
                        full[(2 * ma + qa, 2 * mb + qb)] = self.matrix[(2 * a + qa, 2 * b + qb)];
                    }
                }
            }
        }
        Ok(full)
    }
}

fn check_distinct(modes: &[usize]) -> Result<()> {
    for (i, a) in modes.iter().enumerate() {
        if modes[i + 1..].contains(a) {
            return Err(Error::invalid(format!("mode {a} listed twice")));
        }
    }
    Ok(())
}

/// One term `coefficient · x̂_θ(mode)` of a joint quadrature, where
/// `x̂_θ = x̂ cos θ + p̂ sin θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureTerm {
    pub mode: usize,
    pub lo_phase: f64,
    pub coefficient: f64,
}

impl QuadratureTerm {
    pub fn new(mode: usize, lo_phase: f64, coefficient: f64) -> Self {
        QuadratureTerm {
            mode,
            lo_phase,
            coefficient,
        }
    }
}

/// Mean vector and covariance matrix of an `n`-mode Gaussian state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateRepr", into = "StateRepr")]
pub struct GaussianState {
    n_modes: usize,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianState {
    /// Builds a state from raw moments, checking symmetry and the
    /// uncertainty bound.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        if cov.nrows() == 0 || cov.nrows() % 2 != 0 || !cov.is_square() {
            return Err(Error::invalid(format!(
                "covariance must be a non-empty 2n x 2n matrix, got {}x{}",
                cov.nrows(),
                cov.ncols()
            )));
        }
        let n_modes = cov.nrows() / 2;
        if mean.len() != 2 * n_modes {
            return Err(Error::invalid(format!(
                "mean has length {}, expected {}",
                mean.len(),
                2 * n_modes
            )));
        }
        if mean.iter().chain(cov.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite moment"));
        }
        let asym = (&cov - cov.transpose()).amax();
        if asym > SYMMETRY_TOL {
            return Err(Error::UnphysicalState(format!(
                "covariance is not symmetric (max asymmetry {asym:e})"
            )));
        }
        let state = GaussianState { n_modes, mean, cov };
        let nu_min = state
            .try_symplectic_eigenvalues()?
            .first()
            .copied()
            .unwrap_or(f64::NAN);
        if nu_min < VACUUM_VARIANCE - UNCERTAINTY_TOL {
            return Err(Error::UnphysicalState(format!(
                "smallest symplectic eigenvalue {nu_min} is below {VACUUM_VARIANCE}"
            )));
        }
        Ok(state)
    }

    /// `n` modes of vacuum.
    pub fn vacuum(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::invalid("a state needs at least one mode"));
        }
        Ok(GaussianState {
            n_modes,
            mean: DVector::zeros(2 * n_modes),
            cov: DMatrix::identity(2 * n_modes, 2 * n_modes) * VACUUM_VARIANCE,
        })
    }

    /// Pure single-mode squeezed vacuum. The quadrature at `angle` has variance
    /// `e^(−2r)/4`, the orthogonal one `e^(2r)/4`.
    pub fn squeezed_mode(r: f64, angle: f64) -> Result<Self> {
        if !r.is_finite() || r < 0.0 {
            return Err(Error::invalid(format!(
                "squeezing parameter must be finite and non-negative, got {r}"
            )));
        }
        if !angle.is_finite() {
            return Err(Error::invalid("squeezing angle must be finite"));
        }
        GaussianState::vacuum(1)?.apply(&SymplecticTransform::squeezer(0, r, angle))
    }

    /// Single-mode (generally mixed) state whose shot-normalized quadrature
    /// noise is `r_minus` at `angle` and `r_plus` orthogonal to it.
    pub fn from_noise_levels(r_minus: f64, r_plus: f64, angle: f64) -> Result<Self> {
        if !(r_minus.is_finite() && r_plus.is_finite() && angle.is_finite()) {
            return Err(Error::invalid("noise levels and angle must be finite"));
        }
        if r_minus <= 0.0 || r_plus <= 0.0 {
            return Err(Error::invalid(format!(
                "noise levels must be positive, got ({r_minus}, {r_plus})"
            )));
        }
        if r_minus * r_plus < 1.0 - UNCERTAINTY_TOL {
            return Err(Error::UnphysicalState(format!(
                "noise levels {r_minus} x {r_plus} = {} violate the uncertainty bound",
                r_minus * r_plus
            )));
        }
        let rot = rotation_block(angle);
        let diag = Matrix2::new(
            r_minus * VACUUM_VARIANCE,
            0.0,
            0.0,
            r_plus * VACUUM_VARIANCE,
        );
        let block = rot * diag * rot.transpose();
        let mut cov = DMatrix::zeros(2, 2);
        cov.copy_from(&block);
        Ok(GaussianState {
            n_modes: 1,
            mean: DVector::zeros(2),
            cov: symmetrize(cov),
        })
    }

    /// Vacuum noise with a coherent displacement `(x, p)`.
    pub fn coherent(x: f64, p: f64) -> Self {
        GaussianState {
            n_modes: 1,
            mean: DVector::from_vec(vec![x, p]),
            cov: DMatrix::identity(2, 2) * VACUUM_VARIANCE,
        }
    }

    /// Tensor product of independent states, modes in argument order.
    pub fn product(parts: &[GaussianState]) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::invalid("product of zero states"));
        }
        let n: usize = parts.iter().map(|s| s.n_modes).sum();
        let mut mean = DVector::zeros(2 * n);
        let mut cov = DMatrix::zeros(2 * n, 2 * n);
        let mut off = 0;
        for s in parts {
            let d = 2 * s.n_modes;
            mean.rows_mut(off, d).copy_from(&s.mean);
            cov.view_mut((off, off), (d, d)).copy_from(&s.cov);
            off += d;
        }
        Ok(GaussianState {
            n_modes: n,
            mean,
            cov,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// The 2×2 covariance block of one mode.
    pub fn mode_block(&self, mode: usize) -> Result<Matrix2<f64>> {
        self.check_mode(mode)?;
        let b = self.cov.fixed_view::<2, 2>(2 * mode, 2 * mode);
        Ok(b.into_owned())
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.n_modes {
            return Err(Error::invalid(format!(
                "mode {mode} out of range for a {}-mode state",
                self.n_modes
            )));
        }
        Ok(())
    }

    /// Applies `S`: `mean → S·mean`, `cov → S·cov·Sᵀ`.
    pub fn apply(&self, transform: &SymplecticTransform) -> Result<Self> {
        let s = transform.embed(self.n_modes)?;
        Ok(GaussianState {
            n_modes: self.n_modes,
            mean: &s * &self.mean,
            cov: symmetrize(&s * &self.cov * s.transpose()),
        })
    }

    pub fn rotate(&self, mode: usize, theta: f64) -> Result<Self> {
        self.check_mode(mode)?;
        self.apply(&SymplecticTransform::rotation(mode, theta))
    }

    pub fn beam_splitter(&self, mode_i: usize, mode_j: usize, t: f64) -> Result<Self> {
        self.check_mode(mode_i)?;
        self.check_mode(mode_j)?;
        self.apply(&SymplecticTransform::beam_splitter(mode_i, mode_j, t)?)
    }

    /// Pure-loss channel of efficiency `eta` on one mode: mixes in `(1 − η)`
    /// of vacuum.
    pub fn loss_channel(&self, mode: usize, eta: f64) -> Result<Self> {
        self.check_mode(mode)?;
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::invalid(format!("efficiency {eta} outside [0, 1]")));
        }
        let g = eta.sqrt();
        let mut mean = self.mean.clone();
        let mut cov = self.cov.clone();
        for q in [2 * mode, 2 * mode + 1] {
            mean[q] *= g;
            cov.row_mut(q).scale_mut(g);
            cov.column_mut(q).scale_mut(g);
            cov[(q, q)] += (1.0 - eta) * VACUUM_VARIANCE;
        }
        Ok(GaussianState {
            n_modes: self.n_modes,
            mean,
            cov,
        })
    }

    /// Symmetric phase jitter on one mode: the equal mixture of rotations by
    /// `+theta` and `−theta`. Moments of the mixture are returned.
    ///
    /// At the principal axes of the mode, the resulting quadrature noise is
    /// `R± cos²θ + R∓ sin²θ`.
    pub fn dephase(&self, mode: usize, theta: f64) -> Result<Self> {
        self.check_mode(mode)?;
        if !theta.is_finite() {
            return Err(Error::invalid("phase jitter must be finite"));
        }
        if theta == 0.0 {
            return Ok(self.clone());
        }
        let c = theta.cos();
        let i = 2 * mode;
        let m = nalgebra::Vector2::new(self.mean[i], self.mean[i + 1]);
        let second = self.cov.fixed_view::<2, 2>(i, i).into_owned() + m * m.transpose();
        let plus = rotation_block(theta);
        let minus = rotation_block(-theta);
        let avg = (plus * second * plus.transpose() + minus * second * minus.transpose()) * 0.5;
        let new_mean = m * c;
        let block = avg - new_mean * new_mean.transpose();

        let mut cov = self.cov.clone();
        for q in [i, i + 1] {
            cov.row_mut(q).scale_mut(c);
            cov.column_mut(q).scale_mut(c);
        }
        cov.fixed_view_mut::<2, 2>(i, i).copy_from(&block);
        let mut mean = self.mean.clone();
        mean[i] = new_mean[0];
        mean[i + 1] = new_mean[1];
        Ok(GaussianState {
            n_modes: self.n_modes,
            mean,
            cov: symmetrize(cov),
        })
    }

    /// Appends `k` vacuum modes after the existing ones.
    pub fn with_vacuum_modes(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Ok(self.clone());
        }
        GaussianState::product(&[self.clone(), GaussianState::vacuum(k)?])
    }

    /// Reduced state on `modes`, in the order given (partial trace over the
    /// rest).
    pub fn reduce(&self, modes: &[usize]) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::invalid("cannot reduce to zero modes"));
        }
        check_distinct(modes)?;
        for &m in modes {
            self.check_mode(m)?;
        }
        let idx: Vec<usize> = modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
        let mean = DVector::from_iterator(idx.len(), idx.iter().map(|&i| self.mean[i]));
        let cov = DMatrix::from_fn(idx.len(), idx.len(), |r, c| self.cov[(idx[r], idx[c])]);
        Ok(GaussianState {
            n_modes: modes.len(),
            mean,
            cov,
        })
    }

    /// Variance of `x̂_θ = x̂ cos θ + p̂ sin θ` on one mode, in raw units.
    pub fn quadrature_variance(&self, mode: usize, theta: f64) -> Result<f64> {
        self.joint_quadrature_variance(&[QuadratureTerm::new(mode, theta, 1.0)])
    }

    /// Variance of `Σ cᵢ x̂_{θᵢ}(modeᵢ)`, i.e. `uᵀ·cov·u`.
    pub fn joint_quadrature_variance(&self, terms: &[QuadratureTerm]) -> Result<f64> {
        if terms.is_empty() {
            return Err(Error::invalid("joint quadrature needs at least one term"));
        }
        let mut u = DVector::zeros(2 * self.n_modes);
        for t in terms {
            self.check_mode(t.mode)?;
            let (s, c) = t.lo_phase.sin_cos();
            u[2 * t.mode] += t.coefficient * c;
            u[2 * t.mode + 1] += t.coefficient * s;
        }
        Ok((u.transpose() * &self.cov * &u)[(0, 0)])
    }

    /// Symplectic eigenvalues in ascending order (one per mode).
    pub fn symplectic_eigenvalues(&self) -> Vec<f64> {
        self.try_symplectic_eigenvalues()
            .unwrap_or_else(|_| vec![f64::NAN; self.n_modes])
    }

    fn try_symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        // ν are the moduli of the eigenvalues of the antisymmetric V^½ Ω V^½,
        // read off the Hermitian i·V^½ Ω V^½ to avoid squaring its condition.
        let eig = SymmetricEigen::new(self.cov.clone());
        if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
            return Err(Error::UnphysicalState(
                "covariance is not positive definite".into(),
            ));
        }
        let sqrt_diag = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
        let root = &eig.eigenvectors * sqrt_diag * eig.eigenvectors.transpose();
        let a = &root * symplectic_form(self.n_modes) * &root;
        let herm = DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| {
            Complex::new(0.0, 0.5 * (a[(i, j)] - a[(j, i)]))
        });
        let mut sq: Vec<f64> = SymmetricEigen::new(herm)
            .eigenvalues
            .iter()
            .map(|v| v.abs())
            .collect();
        sq.sort_by(f64::total_cmp);
        Ok(sq.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect())
    }

    /// Largest entrywise difference between two states' moments.
    pub fn max_abs_diff(&self, other: &GaussianState) -> f64 {
        if self.n_modes != other.n_modes {
            return f64::INFINITY;
        }
        (&self.mean - &other.mean)
            .amax()
            .max((&self.cov - &other.cov).amax())
    }
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

#[derive(Serialize, Deserialize)]
struct StateRepr {
    n_modes: usize,
    mean: Vec<f64>,
    cov: Vec<Vec<f64>>,
}

impl From<GaussianState> for StateRepr {
    fn from(s: GaussianState) -> Self {
        let dim = 2 * s.n_modes;
        StateRepr {
            n_modes: s.n_modes,
            mean: s.mean.iter().copied().collect(),
            cov: (0..dim)
                .map(|r| (0..dim).map(|c| s.cov[(r, c)]).collect())
                .collect(),
        }
    }
}

impl TryFrom<StateRepr> for GaussianState {
    type Error = Error;

    fn try_from(r: StateRepr) -> Result<Self> {
        let dim = r.cov.len();
        if r.cov.iter().any(|row| row.len() != dim) {
            return Err(Error::invalid("covariance rows have unequal length"));
        }
        let cov = DMatrix::from_fn(dim, dim, |i, j| r.cov[i][j]);
        let state = GaussianState::new(DVector::from_vec(r.mean), cov)?;
        if state.n_modes != r.n_modes {
            return Err(Error::invalid(format!(
                "n_modes = {} but covariance describes {} modes",
                r.n_modes, state.n_modes
            )));
        }
        Ok(state)
    }
}
