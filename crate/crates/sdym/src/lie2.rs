//! 2x2 matrices of jets, Gauss (triangular) factorization, and the rank-one
//! algebra calculus used throughout the transformation machinery.
//!
//! Conventions: generators X+ = [[0,1],[0,0]], X- = [[0,0],[1,0]],
//! h = [[1,0],[0,-1]], so [X+, X-] = h and [h, X+-] = +-2 X+-.  A group
//! element in Gauss form is G = exp(alpha X+) exp(tau h) exp(beta X-), an
//! algebra element is f = f_plus X+ + f_zero h + f_minus X-.

use num_complex::Complex64;

use crate::error::{Result, SdymError};
use crate::jet::{BasePoint, Jet, Variable, SINGULAR_THRESHOLD};

/// Maximum tolerated deviation of det G from 1 in `decompose_gauss`.
pub const UNIMODULAR_TOLERANCE: f64 = 1e-10;

/// 2x2 matrix with jet entries, row-major.
#[derive(Debug, Clone)]
pub struct Matrix2 {
    pub e: [[Jet; 2]; 2],
}

impl Matrix2 {
    pub fn new(e11: Jet, e12: Jet, e21: Jet, e22: Jet) -> Matrix2 {
        Matrix2 { e: [[e11, e12], [e21, e22]] }
    }

    pub fn identity(base: BasePoint, degree: usize) -> Matrix2 {
        Matrix2::new(
            Jet::one(base, degree),
            Jet::zero(base, degree),
            Jet::zero(base, degree),
            Jet::one(base, degree),
        )
    }

    pub fn base(&self) -> BasePoint {
        self.e[0][0].base()
    }

    pub fn degree(&self) -> usize {
        self.e[0][0].degree()
    }

    pub fn add(&self, rhs: &Matrix2) -> Matrix2 {
        Matrix2 {
            e: [
                [&self.e[0][0] + &rhs.e[0][0], &self.e[0][1] + &rhs.e[0][1]],
                [&self.e[1][0] + &rhs.e[1][0], &self.e[1][1] + &rhs.e[1][1]],
            ],
        }
    }

    pub fn sub(&self, rhs: &Matrix2) -> Matrix2 {
        Matrix2 {
            e: [
                [&self.e[0][0] - &rhs.e[0][0], &self.e[0][1] - &rhs.e[0][1]],
                [&self.e[1][0] - &rhs.e[1][0], &self.e[1][1] - &rhs.e[1][1]],
            ],
        }
    }

    pub fn mul(&self, rhs: &Matrix2) -> Matrix2 {
        let ent = |i: usize, j: usize| {
            &(&self.e[i][0] * &rhs.e[0][j]) + &(&self.e[i][1] * &rhs.e[1][j])
        };
        Matrix2 { e: [[ent(0, 0), ent(0, 1)], [ent(1, 0), ent(1, 1)]] }
    }

    pub fn scale(&self, s: impl Into<Complex64> + Copy) -> Matrix2 {
        Matrix2 {
            e: [
                [self.e[0][0].scale(s), self.e[0][1].scale(s)],
                [self.e[1][0].scale(s), self.e[1][1].scale(s)],
            ],
        }
    }

    pub fn jet_scale(&self, s: &Jet) -> Matrix2 {
        Matrix2 {
            e: [
                [&self.e[0][0] * s, &self.e[0][1] * s],
                [&self.e[1][0] * s, &self.e[1][1] * s],
            ],
        }
    }

    pub fn det(&self) -> Jet {
        &(&self.e[0][0] * &self.e[1][1]) - &(&self.e[0][1] * &self.e[1][0])
    }

    pub fn trace(&self) -> Jet {
        &self.e[0][0] + &self.e[1][1]
    }

    /// Adjugate, which inverts any matrix of determinant one without division.
    pub fn unimodular_inverse(&self) -> Matrix2 {
        Matrix2 {
            e: [
                [self.e[1][1].clone(), -&self.e[0][1]],
                [-&self.e[1][0], self.e[0][0].clone()],
            ],
        }
    }

    /// General inverse via the adjugate divided by the determinant.
    pub fn inverse(&self) -> Result<Matrix2> {
        let inv_det = self.det().inverse()?;
        Ok(Matrix2 {
            e: [
                [&self.e[1][1] * &inv_det, &(-&self.e[0][1]) * &inv_det],
                [&(-&self.e[1][0]) * &inv_det, &self.e[0][0] * &inv_det],
            ],
        })
    }

    pub fn derivative(&self, v: Variable) -> Matrix2 {
        Matrix2 {
            e: [
                [self.e[0][0].derivative(v), self.e[0][1].derivative(v)],
                [self.e[1][0].derivative(v), self.e[1][1].derivative(v)],
            ],
        }
    }

    pub fn truncated(&self, degree: usize) -> Matrix2 {
        Matrix2 {
            e: [
                [self.e[0][0].truncated(degree), self.e[0][1].truncated(degree)],
                [self.e[1][0].truncated(degree), self.e[1][1].truncated(degree)],
            ],
        }
    }

    /// Conjugate transpose built on the jet-level conjugation; real slice only.
    pub fn hermitian_conjugate(&self) -> Result<Matrix2> {
        Ok(Matrix2 {
            e: [
                [self.e[0][0].conj_swap()?, self.e[1][0].conj_swap()?],
                [self.e[0][1].conj_swap()?, self.e[1][1].conj_swap()?],
            ],
        })
    }

    /// Largest coefficient magnitude over all entries.
    pub fn max_abs_coeff(&self) -> f64 {
        self.e
            .iter()
            .flatten()
            .map(|j| j.max_abs_coeff())
            .fold(0.0, f64::max)
    }

    pub fn value(&self) -> [[Complex64; 2]; 2] {
        [
            [self.e[0][0].value(), self.e[0][1].value()],
            [self.e[1][0].value(), self.e[1][1].value()],
        ]
    }
}

/// f = f_plus X+ + f_zero h + f_minus X-.
#[derive(Debug, Clone)]
pub struct AlgebraElement {
    pub plus: Jet,
    pub zero: Jet,
    pub minus: Jet,
}

impl AlgebraElement {
    pub fn new(plus: Jet, zero: Jet, minus: Jet) -> AlgebraElement {
        AlgebraElement { plus, zero, minus }
    }

    pub fn zero_element(base: BasePoint, degree: usize) -> AlgebraElement {
        AlgebraElement {
            plus: Jet::zero(base, degree),
            zero: Jet::zero(base, degree),
            minus: Jet::zero(base, degree),
        }
    }

    pub fn to_matrix(&self) -> Matrix2 {
        Matrix2 {
            e: [
                [self.zero.clone(), self.plus.clone()],
                [self.minus.clone(), -&self.zero],
            ],
        }
    }

    /// Reads a traceless matrix back into components; the trace is checked.
    pub fn from_matrix(m: &Matrix2) -> AlgebraElement {
        let tr = m.trace();
        debug_assert!(
            tr.max_abs_coeff() <= 1e-9 * (1.0 + m.max_abs_coeff()),
            "matrix is not traceless: {}",
            tr.max_abs_coeff()
        );
        let zero = (&m.e[0][0] - &m.e[1][1]).scale(0.5);
        AlgebraElement { plus: m.e[0][1].clone(), zero, minus: m.e[1][0].clone() }
    }

    pub fn add(&self, rhs: &AlgebraElement) -> AlgebraElement {
        AlgebraElement {
            plus: &self.plus + &rhs.plus,
            zero: &self.zero + &rhs.zero,
            minus: &self.minus + &rhs.minus,
        }
    }

    pub fn sub(&self, rhs: &AlgebraElement) -> AlgebraElement {
        AlgebraElement {
            plus: &self.plus - &rhs.plus,
            zero: &self.zero - &rhs.zero,
            minus: &self.minus - &rhs.minus,
        }
    }

    pub fn scale(&self, s: impl Into<Complex64> + Copy) -> AlgebraElement {
        AlgebraElement {
            plus: self.plus.scale(s),
            zero: self.zero.scale(s),
            minus: self.minus.scale(s),
        }
    }

    pub fn jet_scale(&self, s: &Jet) -> AlgebraElement {
        AlgebraElement { plus: &self.plus * s, zero: &self.zero * s, minus: &self.minus * s }
    }

    pub fn derivative(&self, v: Variable) -> AlgebraElement {
        AlgebraElement {
            plus: self.plus.derivative(v),
            zero: self.zero.derivative(v),
            minus: self.minus.derivative(v),
        }
    }

    pub fn truncated(&self, degree: usize) -> AlgebraElement {
        AlgebraElement {
            plus: self.plus.truncated(degree),
            zero: self.zero.truncated(degree),
            minus: self.minus.truncated(degree),
        }
    }

    /// Structure-constant commutator:
    /// [a,b]_+ = 2(a0 b+ - a+ b0), [a,b]_0 = a+ b- - a- b+,
    /// [a,b]_- = 2(a- b0 - a0 b-).
    pub fn commutator(&self, rhs: &AlgebraElement) -> AlgebraElement {
        let plus = (&(&self.zero * &rhs.plus) - &(&self.plus * &rhs.zero)).scale(2.0);
        let zero = &(&self.plus * &rhs.minus) - &(&self.minus * &rhs.plus);
        let minus = (&(&self.minus * &rhs.zero) - &(&self.zero * &rhs.minus)).scale(2.0);
        AlgebraElement { plus, zero, minus }
    }

    /// Image under hermitian conjugation: components conjugate-swap and the
    /// raising/lowering parts exchange roles.  Real slice only.
    pub fn hermitian_conjugate(&self) -> Result<AlgebraElement> {
        Ok(AlgebraElement {
            plus: self.minus.conj_swap()?,
            zero: self.zero.conj_swap()?,
            minus: self.plus.conj_swap()?,
        })
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.plus
            .max_abs_coeff()
            .max(self.zero.max_abs_coeff())
            .max(self.minus.max_abs_coeff())
    }

    pub fn value(&self) -> (Complex64, Complex64, Complex64) {
        (self.plus.value(), self.zero.value(), self.minus.value())
    }
}

/// Trace of the matrix product of two algebra elements:
/// Tr(a b) = 2 a0 b0 + a+ b- + a- b+.
pub fn trace_product(a: &AlgebraElement, b: &AlgebraElement) -> Jet {
    &(&(&a.zero * &b.zero).scale(2.0) + &(&a.plus * &b.minus)) + &(&a.minus * &b.plus)
}

/// Gauss coordinates of a group element: G = e^{alpha X+} e^{tau h} e^{beta X-}.
#[derive(Debug, Clone)]
pub struct GaussParams {
    pub alpha: Jet,
    pub tau: Jet,
    pub beta: Jet,
}

impl GaussParams {
    /// Closed-form product of the three exponential factors:
    /// G = [[e^tau + alpha beta e^-tau, alpha e^-tau], [beta e^-tau, e^-tau]].
    pub fn compose(&self) -> Matrix2 {
        let ep = self.tau.exp();
        let em = (-&self.tau).exp();
        let ab = &self.alpha * &self.beta;
        Matrix2 {
            e: [
                [&ep + &(&ab * &em), &self.alpha * &em],
                [&self.beta * &em, em],
            ],
        }
    }

    pub fn truncated(&self, degree: usize) -> GaussParams {
        GaussParams {
            alpha: self.alpha.truncated(degree),
            tau: self.tau.truncated(degree),
            beta: self.beta.truncated(degree),
        }
    }
}

/// Recovers Gauss coordinates from a unimodular group element:
/// tau = -ln G22, beta = G21 / G22, alpha = G12 / G22.
pub fn decompose_gauss(g: &Matrix2) -> Result<GaussParams> {
    let det = g.det();
    let dev = det.add_scalar(Complex64::new(-1.0, 0.0)).max_abs_coeff();
    if dev > UNIMODULAR_TOLERANCE * (1.0 + g.max_abs_coeff()) {
        return Err(SdymError::NotUnimodular { deviation: dev });
    }
    let g22 = &g.e[1][1];
    if g22.value().norm() <= SINGULAR_THRESHOLD {
        return Err(SdymError::SingularDecomposition { value: g22.value().norm() });
    }
    let tau = -&g22.ln().map_err(|_| SdymError::SingularDecomposition { value: g22.value().norm() })?;
    let inv22 = g22.inverse()?;
    Ok(GaussParams { alpha: &g.e[0][1] * &inv22, tau, beta: &g.e[1][0] * &inv22 })
}

/// Left logarithmic derivative (d_v G) G^-1 in Gauss coordinates:
/// (alpha' - 2 tau' alpha - alpha^2 beta' e^-2tau) X+
///   + (tau' + beta' alpha e^-2tau) h + beta' e^-2tau X-.
pub fn left_log_derivative(p: &GaussParams, v: Variable) -> AlgebraElement {
    let d = p.alpha.degree() - 1;
    let ap = p.alpha.derivative(v);
    let tp = p.tau.derivative(v);
    let bp = p.beta.derivative(v);
    let alpha = p.alpha.truncated(d);
    let e2t = p.tau.truncated(d).scale(-2.0).exp();
    let bpe = &bp * &e2t;
    let plus = &(&ap - &(&tp * &alpha).scale(2.0)) - &(&alpha.powi(2) * &bpe);
    let zero = &tp + &(&alpha * &bpe);
    AlgebraElement { plus, zero, minus: bpe }
}

/// Right logarithmic derivative G^-1 (d_v G) in Gauss coordinates:
/// (beta' - 2 tau' beta - beta^2 alpha' e^-2tau) X-
///   + (tau' + alpha' beta e^-2tau) h + alpha' e^-2tau X+.
pub fn right_log_derivative(p: &GaussParams, v: Variable) -> AlgebraElement {
    let d = p.alpha.degree() - 1;
    let ap = p.alpha.derivative(v);
    let tp = p.tau.derivative(v);
    let bp = p.beta.derivative(v);
    let beta = p.beta.truncated(d);
    let e2t = p.tau.truncated(d).scale(-2.0).exp();
    let ape = &ap * &e2t;
    let minus = &(&bp - &(&tp * &beta).scale(2.0)) - &(&beta.powi(2) * &ape);
    let zero = &tp + &(&beta * &ape);
    AlgebraElement { plus: ape, zero, minus }
}

/// Constant generator matrices, mostly for oracle-style checks.
pub fn generator_x_plus(base: BasePoint, degree: usize) -> Matrix2 {
    Matrix2::new(
        Jet::zero(base, degree),
        Jet::one(base, degree),
        Jet::zero(base, degree),
        Jet::zero(base, degree),
    )
}

pub fn generator_x_minus(base: BasePoint, degree: usize) -> Matrix2 {
    Matrix2::new(
        Jet::zero(base, degree),
        Jet::zero(base, degree),
        Jet::one(base, degree),
        Jet::zero(base, degree),
    )
}

pub fn generator_h(base: BasePoint, degree: usize) -> Matrix2 {
    Matrix2::new(
        Jet::one(base, degree),
        Jet::zero(base, degree),
        Jet::zero(base, degree),
        Jet::constant(Complex64::new(-1.0, 0.0), base, degree),
    )
}
