//! Deformation functions and finite-dimensional operator algebra.
//!
//! Basis convention: the qubit has |g⟩ = 0 and |e⟩ = 1, so σ_z|e⟩ = +|e⟩.
//! Composite states |s, n⟩ live at index `2n + s`.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense square complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let v = DVector::from_iterator(diag.len(), diag.iter().map(|&x| C64::new(x, 0.0)));
        Self(DMatrix::from_diagonal(&v))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(dim, dim, f))
    }

    pub fn from_matrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                left: m.nrows(),
                right: m.ncols(),
            });
        }
        Ok(Self(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(&self.0 * s)
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise deviation. Panics if the dimensions differ.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "max_abs_diff: dimension mismatch");
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// max |H − H†|.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Top-left `k × k` block.
    pub fn leading_block(&self, k: usize) -> Self {
        let k = k.min(self.dim());
        Self(self.0.view((0, 0), (k, k)).into_owned())
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.0[(i, j)].norm() <= tol))
    }

    pub fn diagonal(&self) -> Vec<C64> {
        self.0.diagonal().iter().copied().collect()
    }

    pub fn product(&self, other: &Self) -> Result<Self> {
        check_dims(self, other)?;
        Ok(Self(&self.0 * &other.0))
    }

    /// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
    pub fn eigh(&self) -> Result<(Vec<f64>, DMatrix<C64>)> {
        let eig = SymmetricEigen::try_new(self.0.clone(), f64::EPSILON, 100_000)
            .ok_or_else(|| Error::Eigen(format!("no convergence for dim {}", self.dim())))?;
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(self.dim(), self.dim(), |r, c| eig.eigenvectors[(r, order[c])]);
        Ok((values, vectors))
    }

    /// Eigenvalues of a Hermitian matrix, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut v: Vec<f64> = self.0.symmetric_eigenvalues().iter().copied().collect();
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Eigen(format!("non-finite eigenvalue for dim {}", self.dim())));
        }
        v.sort_by(f64::total_cmp);
        Ok(v)
    }

    pub fn apply(&self, v: &DVector<C64>) -> Result<DVector<C64>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: v.len(),
            });
        }
        Ok(&self.0 * v)
    }
}

fn check_dims(x: &ComplexMatrix, y: &ComplexMatrix) -> Result<()> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            left: x.dim(),
            right: y.dim(),
        });
    }
    Ok(())
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

/// Deformation function f(n) of a nonlinear oscillator, Â = â f(n̂).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Deformation {
    #[default]
    Identity,
    LinearKerr { chi: f64 },
    QOscillator { lambda: f64 },
    LambDicke { eta: f64 },
    PoschlTeller { c: f64, s: f64 },
    Transmon { alpha: f64 },
}

impl fmt::Display for Deformation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Deformation::Identity => write!(f, "identity"),
            Deformation::LinearKerr { chi } => write!(f, "linear_kerr(chi={chi})"),
            Deformation::QOscillator { lambda } => write!(f, "q_oscillator(lambda={lambda})"),
            Deformation::LambDicke { eta } => write!(f, "lamb_dicke(eta={eta})"),
            Deformation::PoschlTeller { c, s } => write!(f, "poschl_teller(c={c}, s={s})"),
            Deformation::Transmon { alpha } => write!(f, "transmon(alpha={alpha})"),
        }
    }
}

impl Deformation {
    /// Kerr parameter χ when the deformation is of the form f² = 1 + χn.
    pub fn kerr_chi(&self) -> Option<f64> {
        match *self {
            Deformation::Identity => Some(0.0),
            Deformation::LinearKerr { chi } => Some(chi),
            _ => None,
        }
    }

    /// f²(n). Errors if the value is negative or not finite.
    pub fn f_squared(&self, n: usize) -> Result<f64> {
        let nf = n as f64;
        let value = match *self {
            Deformation::Identity => 1.0,
            Deformation::LinearKerr { chi } => 1.0 + chi * nf,
            Deformation::QOscillator { lambda } => {
                if n == 0 || lambda == 0.0 {
                    1.0
                } else {
                    (lambda * nf).sinh() / (nf * lambda.sinh())
                }
            }
            Deformation::LambDicke { eta } => {
                let f = lamb_dicke_f(eta, n);
                f * f
            }
            Deformation::PoschlTeller { c, s } => c * (2.0 * s + 1.0 - nf),
            Deformation::Transmon { alpha } => 1.0 + alpha * (nf - 1.0) / 2.0,
        };
        if !value.is_finite() || value < 0.0 {
            return Err(Error::NonPhysicalDeformation {
                deformation: self.to_string(),
                n,
                f_squared: value,
            });
        }
        Ok(value)
    }

    /// f(n). For the Lamb-Dicke form the signed series value is returned.
    pub fn eval(&self, n: usize) -> Result<f64> {
        match *self {
            Deformation::LambDicke { eta } => {
                let f = lamb_dicke_f(eta, n);
                if !f.is_finite() {
                    return Err(Error::NonPhysicalDeformation {
                        deformation: self.to_string(),
                        n,
                        f_squared: f * f,
                    });
                }
                Ok(f)
            }
            _ => self.f_squared(n).map(f64::sqrt),
        }
    }

    /// Checks that f is physical on 0..=n_max.
    pub fn validate_up_to(&self, n_max: usize) -> Result<()> {
        for n in 0..=n_max {
            self.f_squared(n)?;
        }
        Ok(())
    }
}

/// e^{−η²/2} Σ_{l=0}^{n} (−η²)^l n! / ((n−l)! l! (l+1)!)
fn lamb_dicke_f(eta: f64, n: usize) -> f64 {
    let x = -eta * eta;
    let mut term = 1.0;
    let mut sum = 1.0;
    for l in 0..n {
        let lf = l as f64;
        term *= x * (n - l) as f64 / ((lf + 1.0) * (lf + 2.0));
        sum += term;
    }
    (-eta * eta / 2.0).exp() * sum
}

pub fn deformation_eval(spec: &Deformation, n: usize) -> Result<f64> {
    spec.eval(n)
}

/// Qubit ⊗ truncated Fock space with states |0⟩…|N−1⟩.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HilbertLayout {
    fock_cutoff: usize,
}

impl HilbertLayout {
    pub const QUBIT_DIM: usize = 2;

    pub fn new(fock_cutoff: usize) -> Result<Self> {
        if fock_cutoff < 2 {
            return Err(Error::InvalidLayout(format!(
                "Fock cutoff must be at least 2, got {fock_cutoff}"
            )));
        }
        Ok(Self { fock_cutoff })
    }

    pub fn fock_cutoff(&self) -> usize {
        self.fock_cutoff
    }

    pub fn dim(&self) -> usize {
        Self::QUBIT_DIM * self.fock_cutoff
    }

    pub fn index(&self, excited: bool, n: usize) -> usize {
        2 * n + usize::from(excited)
    }

    /// Places a qubit operator and a Fock operator on the composite space.
    pub fn embed(&self, qubit: &ComplexMatrix, fock: &ComplexMatrix) -> Result<ComplexMatrix> {
        if qubit.dim() != Self::QUBIT_DIM {
            return Err(Error::DimensionMismatch {
                left: Self::QUBIT_DIM,
                right: qubit.dim(),
            });
        }
        if fock.dim() != self.fock_cutoff {
            return Err(Error::DimensionMismatch {
                left: self.fock_cutoff,
                right: fock.dim(),
            });
        }
        Ok(tensor_product(fock, qubit))
    }
}

/// Qubit matrices in (g, e) index order.
pub mod qubit {
    use super::{ComplexMatrix, C64};

    pub fn sigma_z() -> ComplexMatrix {
        ComplexMatrix::from_real_diagonal(&[-1.0, 1.0])
    }

    /// |e⟩⟨g|
    pub fn sigma_plus() -> ComplexMatrix {
        ComplexMatrix::from_fn(2, |i, j| {
            if i == 1 && j == 0 {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// |g⟩⟨e|
    pub fn sigma_minus() -> ComplexMatrix {
        sigma_plus().adjoint()
    }

    pub fn sigma_x() -> ComplexMatrix {
        &sigma_plus() + &sigma_minus()
    }
}

#[derive(Clone, Debug)]
pub struct Ladder {
    pub a: ComplexMatrix,
    pub a_dag: ComplexMatrix,
    pub n_op: ComplexMatrix,
}

pub fn ladder_matrices(layout: &HilbertLayout) -> Ladder {
    let n = layout.fock_cutoff();
    let a = ComplexMatrix::from_fn(n, |i, j| {
        if j == i + 1 {
            C64::new((j as f64).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let a_dag = a.adjoint();
    let n_op = ComplexMatrix::from_real_diagonal(&(0..n).map(|k| k as f64).collect::<Vec<_>>());
    Ladder { a, a_dag, n_op }
}

/// (Â, Â†) with Â = â f(n̂).
pub fn deformed_ladder(
    spec: &Deformation,
    layout: &HilbertLayout,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let n = layout.fock_cutoff();
    spec.validate_up_to(n)?;
    let f = (0..n).map(|k| spec.eval(k)).collect::<Result<Vec<_>>>()?;
    let a = ComplexMatrix::from_fn(n, |i, j| {
        if j == i + 1 {
            C64::new((j as f64).sqrt() * f[j], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let a_dag = a.adjoint();
    Ok((a, a_dag))
}

/// Kronecker product; the first factor carries the slow index.
pub fn tensor_product(x: &ComplexMatrix, y: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(x.0.kronecker(&y.0))
}

pub fn commutator(x: &ComplexMatrix, y: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_dims(x, y)?;
    Ok(ComplexMatrix(&x.0 * &y.0 - &y.0 * &x.0))
}

/// Π = (−σ_z) ⊗ e^{iπ n̂}, diagonal with entries ±1.
pub fn parity_operator(layout: &HilbertLayout) -> ComplexMatrix {
    let diag: Vec<f64> = (0..layout.dim())
        .map(|idx| {
            let n = idx / 2;
            let sz = if idx % 2 == 1 { 1.0 } else { -1.0 };
            let fock = if n % 2 == 0 { 1.0 } else { -1.0 };
            -sz * fock
        })
        .collect();
    ComplexMatrix::from_real_diagonal(&diag)
}

/// Total excitation number n̂ + σ₊σ₋ on the composite space.
pub fn excitation_number(layout: &HilbertLayout) -> ComplexMatrix {
    let diag: Vec<f64> = (0..layout.dim())
        .map(|idx| (idx / 2 + idx % 2) as f64)
        .collect();
    ComplexMatrix::from_real_diagonal(&diag)
}
