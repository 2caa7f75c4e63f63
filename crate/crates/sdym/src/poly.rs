//! Sparse bivariate polynomials with complex coefficients.
//!
//! These describe seed data: every seed ingredient is a polynomial in either
//! the barred pair (ybar, zbar) or the unbarred pair (y, z), and is expanded
//! into jets exactly.

use num_complex::Complex64;

use crate::jet::{BasePoint, Jet, Variable};

/// Terms (m, n, c): c * u^m * v^n over an ordered variable pair (u, v).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BivariatePoly {
    pub terms: Vec<(u32, u32, Complex64)>,
}

impl BivariatePoly {
    pub fn new(terms: Vec<(u32, u32, Complex64)>) -> BivariatePoly {
        BivariatePoly { terms }
    }

    pub fn zero() -> BivariatePoly {
        BivariatePoly { terms: Vec::new() }
    }

    pub fn constant(c: Complex64) -> BivariatePoly {
        if c == Complex64::default() {
            Self::zero()
        } else {
            BivariatePoly { terms: vec![(0, 0, c)] }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|&(_, _, c)| c == Complex64::default())
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.iter().map(|&(m, n, _)| m + n).max().unwrap_or(0)
    }

    /// The polynomial with every coefficient conjugated; pairs a barred-pair
    /// polynomial with its unbarred-pair partner under hermitian conjugation.
    pub fn conj_coeffs(&self) -> BivariatePoly {
        BivariatePoly {
            terms: self.terms.iter().map(|&(m, n, c)| (m, n, c.conj())).collect(),
        }
    }

    /// Exact jet of the polynomial read in the variables (u, v).
    pub fn jet(&self, u: Variable, v: Variable, base: BasePoint, degree: usize) -> Jet {
        let mut acc = Jet::zero(base, degree);
        if self.terms.is_empty() {
            return acc;
        }
        let max_m = self.terms.iter().map(|t| t.0).max().unwrap() as usize;
        let max_n = self.terms.iter().map(|t| t.1).max().unwrap() as usize;
        let u_jet = Jet::variable(u, base, degree);
        let v_jet = Jet::variable(v, base, degree);
        let mut u_pow = Vec::with_capacity(max_m + 1);
        u_pow.push(Jet::one(base, degree));
        for k in 0..max_m {
            u_pow.push(&u_pow[k] * &u_jet);
        }
        let mut v_pow = Vec::with_capacity(max_n + 1);
        v_pow.push(Jet::one(base, degree));
        for k in 0..max_n {
            v_pow.push(&v_pow[k] * &v_jet);
        }
        for &(m, n, c) in &self.terms {
            acc = &acc + &(&u_pow[m as usize] * &v_pow[n as usize]).scale(c);
        }
        acc
    }
}
