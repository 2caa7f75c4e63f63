//! Exact seed solutions.
//!
//! A full-gauge seed is a product Psi_bar(ybar, zbar) of elementary
//! unimodular polynomial factors together with an algebra-valued polynomial
//! chi(ybar, zbar).  The paired holomorphic factor Psi(y, z) is the hermitian
//! image of Psi_bar (factors reversed, upper and lower swapped, coefficients
//! conjugated), which makes G = Psi_bar Psi hermitian on the real slice.  The
//! potentials are then
//!
//!   f    = z (d_ybar Psi_bar) Psi_bar^-1 - y (d_zbar Psi_bar) Psi_bar^-1 + chi,
//!   fbar = zbar Psi^-1 (d_y Psi) - ybar Psi^-1 (d_z Psi) + chi_bar,
//!
//! which satisfy the first-order compatibility relations exactly because the
//! logarithmic derivatives of G from the left depend on (ybar, zbar) only and
//! from the right on (y, z) only.
//!
//! A charge-only seed carries just the pair (theta_bar, phi_bar) plus the
//! additive constant-of-integration polynomial, which determine f_minus and
//! exp(-tau); that is all the charge-density machinery needs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SdymError};
use crate::jet::{BasePoint, Jet, RealSlicePoint, Variable};
use crate::lie2::{decompose_gauss, AlgebraElement, GaussParams, Matrix2};
use crate::poly::BivariatePoly;

/// Elementary unimodular gauge factor.
#[derive(Debug, Clone)]
pub enum Factor {
    /// [[1, p], [0, 1]]
    Upper(BivariatePoly),
    /// [[1, 0], [p, 1]]
    Lower(BivariatePoly),
    /// [[d, 0], [0, 1/d]] with constant d != 0
    Diag(Complex64),
}

impl Factor {
    fn matrix(&self, u: Variable, v: Variable, base: BasePoint, degree: usize) -> Matrix2 {
        let one = Jet::one(base, degree);
        let zero = Jet::zero(base, degree);
        match self {
            Factor::Upper(p) => {
                Matrix2::new(one.clone(), p.jet(u, v, base, degree), zero, one)
            }
            Factor::Lower(p) => {
                Matrix2::new(one.clone(), zero, p.jet(u, v, base, degree), one)
            }
            Factor::Diag(d) => Matrix2::new(
                Jet::constant(*d, base, degree),
                zero.clone(),
                zero,
                Jet::constant(1.0 / *d, base, degree),
            ),
        }
    }

    /// Hermitian image of a single factor: upper and lower swap, coefficients
    /// conjugate, a diagonal scale conjugates.
    pub fn hermitian_image(&self) -> Factor {
        match self {
            Factor::Upper(p) => Factor::Lower(p.conj_coeffs()),
            Factor::Lower(p) => Factor::Upper(p.conj_coeffs()),
            Factor::Diag(d) => Factor::Diag(d.conj()),
        }
    }
}

/// Product of factors, left to right, read in the variable pair (u, v).
fn factor_product(factors: &[Factor], u: Variable, v: Variable, base: BasePoint, degree: usize) -> Matrix2 {
    let mut acc = Matrix2::identity(base, degree);
    for f in factors {
        acc = acc.mul(&f.matrix(u, v, base, degree));
    }
    acc
}

/// Hermitian image of a whole factor list: reversed order, each factor imaged.
pub fn hermitian_factor_list(factors: &[Factor]) -> Vec<Factor> {
    factors.iter().rev().map(Factor::hermitian_image).collect()
}

/// Algebra-valued polynomial in one variable pair.
#[derive(Debug, Clone, Default)]
pub struct PolyAlgebra {
    pub plus: BivariatePoly,
    pub zero: BivariatePoly,
    pub minus: BivariatePoly,
}

impl PolyAlgebra {
    pub fn element(&self, u: Variable, v: Variable, base: BasePoint, degree: usize) -> AlgebraElement {
        AlgebraElement {
            plus: self.plus.jet(u, v, base, degree),
            zero: self.zero.jet(u, v, base, degree),
            minus: self.minus.jet(u, v, base, degree),
        }
    }

    /// Hermitian image: raising and lowering components swap, coefficients
    /// conjugate, and the variable pair is reinterpreted as the partner pair.
    pub fn hermitian_image(&self) -> PolyAlgebra {
        PolyAlgebra {
            plus: self.minus.conj_coeffs(),
            zero: self.zero.conj_coeffs(),
            minus: self.plus.conj_coeffs(),
        }
    }
}

/// Jets of a full solution at one base point.
#[derive(Debug, Clone)]
pub struct SolutionJets {
    pub g: Matrix2,
    pub gauss: GaussParams,
    pub f: AlgebraElement,
    pub f_bar: AlgebraElement,
}

/// The pair of scalars every charge computation needs.
#[derive(Debug, Clone)]
pub struct ChargeJets {
    pub f_minus: Jet,
    pub exp_neg_tau: Jet,
}

#[derive(Debug, Clone)]
enum SolutionData {
    FullGauge {
        psi_bar: Vec<Factor>,
        psi: Vec<Factor>,
        chi: PolyAlgebra,
        chi_bar: PolyAlgebra,
    },
    ChargeOnly {
        theta_bar: BivariatePoly,
        phi_bar: BivariatePoly,
        psi_bar: BivariatePoly,
    },
}

/// An exact seed solution, evaluable as jets at any base point.
#[derive(Debug, Clone)]
pub struct Solution {
    data: SolutionData,
}

impl Solution {
    /// Physically restricted full-gauge seed: the holomorphic half and
    /// chi_bar are the hermitian images of the given data.
    pub fn full_gauge(psi_bar: Vec<Factor>, chi: PolyAlgebra) -> Solution {
        let psi = hermitian_factor_list(&psi_bar);
        let chi_bar = chi.hermitian_image();
        Solution { data: SolutionData::FullGauge { psi_bar, psi, chi, chi_bar } }
    }

    /// Enlarged-system seed with independently chosen halves.  With
    /// psi != hermitian image of psi_bar (or chi_bar != image of chi) the
    /// compatibility relations still hold but the solution is not physically
    /// restricted.
    pub fn enlarged(
        psi_bar: Vec<Factor>,
        psi: Vec<Factor>,
        chi: PolyAlgebra,
        chi_bar: PolyAlgebra,
    ) -> Solution {
        Solution { data: SolutionData::FullGauge { psi_bar, psi, chi, chi_bar } }
    }

    pub fn charge_only(
        theta_bar: BivariatePoly,
        phi_bar: BivariatePoly,
        psi_bar: BivariatePoly,
    ) -> Solution {
        Solution { data: SolutionData::ChargeOnly { theta_bar, phi_bar, psi_bar } }
    }

    /// The radial one-lump data: theta_bar = ybar, phi_bar = zbar,
    /// psi_bar = a with Re a > 0.
    pub fn one_instanton(a: Complex64) -> Result<Solution> {
        if a.re <= 0.0 {
            return Err(SdymError::NonPositiveScale { re: a.re });
        }
        let one = Complex64::new(1.0, 0.0);
        Ok(Solution::charge_only(
            BivariatePoly::new(vec![(1, 0, one)]),
            BivariatePoly::new(vec![(0, 1, one)]),
            BivariatePoly::constant(a),
        ))
    }

    pub fn is_full_gauge(&self) -> bool {
        matches!(self.data, SolutionData::FullGauge { .. })
    }

    /// Jets of G, its Gauss coordinates, f and fbar at any base point.
    pub fn eval(&self, base: BasePoint, degree: usize) -> Result<SolutionJets> {
        let SolutionData::FullGauge { psi_bar, psi, chi, chi_bar } = &self.data else {
            return Err(SdymError::FullGaugeRequired);
        };
        let wd = degree + 1;
        let pb = factor_product(psi_bar, Variable::YBar, Variable::ZBar, base, wd);
        let ph = factor_product(psi, Variable::Y, Variable::Z, base, wd);
        let g = pb.mul(&ph).truncated(degree);
        let gauss = decompose_gauss(&g)?;

        let y = Jet::variable(Variable::Y, base, degree);
        let z = Jet::variable(Variable::Z, base, degree);
        let ybar = Jet::variable(Variable::YBar, base, degree);
        let zbar = Jet::variable(Variable::ZBar, base, degree);

        let pb_inv = pb.unimodular_inverse().truncated(degree);
        let m_ybar = AlgebraElement::from_matrix(&pb.derivative(Variable::YBar).mul(&pb_inv));
        let m_zbar = AlgebraElement::from_matrix(&pb.derivative(Variable::ZBar).mul(&pb_inv));
        let f = m_ybar
            .jet_scale(&z)
            .sub(&m_zbar.jet_scale(&y))
            .add(&chi.element(Variable::YBar, Variable::ZBar, base, degree));

        let ph_inv = ph.unimodular_inverse().truncated(degree);
        let n_y = AlgebraElement::from_matrix(&ph_inv.mul(&ph.derivative(Variable::Y)));
        let n_z = AlgebraElement::from_matrix(&ph_inv.mul(&ph.derivative(Variable::Z)));
        let f_bar = n_y
            .jet_scale(&zbar)
            .sub(&n_z.jet_scale(&ybar))
            .add(&chi_bar.element(Variable::Y, Variable::Z, base, degree));

        Ok(SolutionJets { g, gauss, f, f_bar })
    }

    /// Jets of (f_minus, exp(-tau)); available for every seed kind.
    pub fn charge_data(&self, base: BasePoint, degree: usize) -> Result<ChargeJets> {
        match &self.data {
            SolutionData::FullGauge { .. } => {
                let sj = self.eval(base, degree)?;
                Ok(ChargeJets { f_minus: sj.f.minus, exp_neg_tau: sj.g.e[1][1].clone() })
            }
            SolutionData::ChargeOnly { theta_bar, phi_bar, psi_bar } => {
                let wd = degree + 1;
                let th = theta_bar.jet(Variable::YBar, Variable::ZBar, base, wd);
                let ph = phi_bar.jet(Variable::YBar, Variable::ZBar, base, wd);
                let y = Jet::variable(Variable::Y, base, degree);
                let z = Jet::variable(Variable::Z, base, degree);
                let d_th = &(&z * &th.derivative(Variable::YBar)) - &(&y * &th.derivative(Variable::ZBar));
                let d_ph = &(&z * &ph.derivative(Variable::YBar)) - &(&y * &ph.derivative(Variable::ZBar));
                let f_minus = &(&(&ph.truncated(degree) * &d_th) - &(&th.truncated(degree) * &d_ph))
                    + &psi_bar.jet(Variable::YBar, Variable::ZBar, base, degree);
                let theta = theta_bar.conj_coeffs().jet(Variable::Y, Variable::Z, base, degree);
                let phi = phi_bar.conj_coeffs().jet(Variable::Y, Variable::Z, base, degree);
                let exp_neg_tau =
                    &(&theta * &th.truncated(degree)) + &(&phi * &ph.truncated(degree));
                Ok(ChargeJets { f_minus, exp_neg_tau })
            }
        }
    }

    /// Jet of f_minus * conj(f_minus) - exp(-2 tau), the quantity whose
    /// iterated-box logarithm is the transformed charge density.  Real slice.
    pub fn backlund_density_argument(&self, p: RealSlicePoint, degree: usize) -> Result<Jet> {
        let cd = self.charge_data(BasePoint::RealSlice(p), degree)?;
        let fm_conj = cd.f_minus.conj_swap()?;
        Ok(&(&cd.f_minus * &fm_conj) - &(&cd.exp_neg_tau * &cd.exp_neg_tau))
    }

    /// The transformed fbar_plus = conj(f_minus) - exp(-2 tau) / f_minus,
    /// computable from charge data alone.  Real slice.
    pub fn f_bar_plus_transformed(&self, p: RealSlicePoint, degree: usize) -> Result<Jet> {
        let cd = self.charge_data(BasePoint::RealSlice(p), degree)?;
        let fm_conj = cd.f_minus.conj_swap()?;
        let e2t = &cd.exp_neg_tau * &cd.exp_neg_tau;
        Ok(&fm_conj - &e2t.div(&cd.f_minus)?)
    }

    /// Prepends a barred-side gauge factor and appends its partner on the
    /// unbarred side.  With `hermitian_pairing` the partner is the hermitian
    /// image (physical restriction preserved); otherwise the given partner is
    /// used as-is.
    pub fn gauge_transformed(&self, factor_bar: Factor, partner: Option<Factor>) -> Result<Solution> {
        let SolutionData::FullGauge { psi_bar, psi, chi, chi_bar } = &self.data else {
            return Err(SdymError::FullGaugeRequired);
        };
        let partner = partner.unwrap_or_else(|| factor_bar.hermitian_image());
        let mut new_bar = vec![factor_bar];
        new_bar.extend(psi_bar.iter().cloned());
        let mut new_psi = psi.clone();
        new_psi.push(partner);
        Ok(Solution {
            data: SolutionData::FullGauge {
                psi_bar: new_bar,
                psi: new_psi,
                chi: chi.clone(),
                chi_bar: chi_bar.clone(),
            },
        })
    }
}

// ---------------------------------------------------------------------------
// JSON seed descriptions
// ---------------------------------------------------------------------------

/// One polynomial term [m, n, re, im].
pub type TermSpec = (u32, u32, f64, f64);

fn poly_from_terms(terms: &[TermSpec]) -> BivariatePoly {
    BivariatePoly::new(
        terms.iter().map(|&(m, n, re, im)| (m, n, Complex64::new(re, im))).collect(),
    )
}

fn poly_to_terms(p: &BivariatePoly) -> Vec<TermSpec> {
    p.terms.iter().map(|&(m, n, c)| (m, n, c.re, c.im)).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum FactorSpec {
    Upper { poly: Vec<TermSpec> },
    Lower { poly: Vec<TermSpec> },
    Diag { d: (f64, f64) },
}

impl FactorSpec {
    fn to_factor(&self) -> Result<Factor> {
        Ok(match self {
            FactorSpec::Upper { poly } => Factor::Upper(poly_from_terms(poly)),
            FactorSpec::Lower { poly } => Factor::Lower(poly_from_terms(poly)),
            FactorSpec::Diag { d } => {
                let dv = Complex64::new(d.0, d.1);
                if dv.norm() <= 1e-12 {
                    return Err(SdymError::SeedInvalid("diag factor with d = 0".into()));
                }
                Factor::Diag(dv)
            }
        })
    }

    pub fn from_factor(f: &Factor) -> FactorSpec {
        match f {
            Factor::Upper(p) => FactorSpec::Upper { poly: poly_to_terms(p) },
            Factor::Lower(p) => FactorSpec::Lower { poly: poly_to_terms(p) },
            Factor::Diag(d) => FactorSpec::Diag { d: (d.re, d.im) },
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChiSpec {
    #[serde(default)]
    pub plus: Vec<TermSpec>,
    #[serde(default)]
    pub zero: Vec<TermSpec>,
    #[serde(default)]
    pub minus: Vec<TermSpec>,
}

impl ChiSpec {
    fn to_poly_algebra(&self) -> PolyAlgebra {
        PolyAlgebra {
            plus: poly_from_terms(&self.plus),
            zero: poly_from_terms(&self.zero),
            minus: poly_from_terms(&self.minus),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedKind {
    FullGauge,
    ChargeOnly,
}

/// On-disk seed description.
///
/// `psi_factors` and `chi_bar` are optional overrides for the unbarred half;
/// when absent the hermitian images of `factors` and `chi` are used, which is
/// the physically restricted case.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedSpec {
    pub kind: SeedKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<FactorSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi: Option<ChiSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi_factors: Option<Vec<FactorSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi_bar: Option<ChiSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_bar: Option<Vec<TermSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_bar: Option<Vec<TermSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi_bar: Option<Vec<TermSpec>>,
}

impl SeedSpec {
    pub fn from_json(text: &str) -> Result<SeedSpec> {
        serde_json::from_str(text).map_err(|e| SdymError::SeedInvalid(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("seed specs always serialize")
    }

    pub fn build(&self) -> Result<Solution> {
        match self.kind {
            SeedKind::FullGauge => {
                if self.theta_bar.is_some() || self.phi_bar.is_some() || self.psi_bar.is_some() {
                    return Err(SdymError::SeedInvalid(
                        "full_gauge seeds do not take theta_bar/phi_bar/psi_bar".into(),
                    ));
                }
                let factors = self
                    .factors
                    .as_deref()
                    .unwrap_or(&[])
                    .iter()
                    .map(FactorSpec::to_factor)
                    .collect::<Result<Vec<_>>>()?;
                let chi = self.chi.clone().unwrap_or_default().to_poly_algebra();
                match (&self.psi_factors, &self.chi_bar) {
                    (None, None) => Ok(Solution::full_gauge(factors, chi)),
                    (pf, cb) => {
                        let psi = match pf {
                            Some(list) => list
                                .iter()
                                .map(FactorSpec::to_factor)
                                .collect::<Result<Vec<_>>>()?,
                            None => hermitian_factor_list(&factors),
                        };
                        let chi_bar = match cb {
                            Some(spec) => spec.to_poly_algebra(),
                            None => chi.hermitian_image(),
                        };
                        Ok(Solution::enlarged(factors, psi, chi, chi_bar))
                    }
                }
            }
            SeedKind::ChargeOnly => {
                if self.factors.is_some()
                    || self.chi.is_some()
                    || self.psi_factors.is_some()
                    || self.chi_bar.is_some()
                {
                    return Err(SdymError::SeedInvalid(
                        "charge_only seeds take only theta_bar/phi_bar/psi_bar".into(),
                    ));
                }
                let need = |o: &Option<Vec<TermSpec>>, name: &str| -> Result<BivariatePoly> {
                    o.as_deref()
                        .map(poly_from_terms)
                        .ok_or_else(|| SdymError::SeedInvalid(format!("missing {name}")))
                };
                Ok(Solution::charge_only(
                    need(&self.theta_bar, "theta_bar")?,
                    need(&self.phi_bar, "phi_bar")?,
                    self.psi_bar.as_deref().map(poly_from_terms).unwrap_or_default(),
                ))
            }
        }
    }

    /// The radial one-lump seed description.
    pub fn one_instanton(a: Complex64) -> Result<SeedSpec> {
        if a.re <= 0.0 {
            return Err(SdymError::NonPositiveScale { re: a.re });
        }
        Ok(SeedSpec {
            kind: SeedKind::ChargeOnly,
            factors: None,
            chi: None,
            psi_factors: None,
            chi_bar: None,
            theta_bar: Some(vec![(1, 0, 1.0, 0.0)]),
            phi_bar: Some(vec![(0, 1, 1.0, 0.0)]),
            psi_bar: Some(vec![(0, 0, a.re, a.im)]),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie2::left_log_derivative;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn upper(terms: Vec<(u32, u32, Complex64)>) -> Factor {
        Factor::Upper(BivariatePoly::new(terms))
    }

    fn lower(terms: Vec<(u32, u32, Complex64)>) -> Factor {
        Factor::Lower(BivariatePoly::new(terms))
    }

    fn sample_seed() -> Solution {
        Solution::full_gauge(
            vec![
                upper(vec![(1, 0, c(0.4, 0.1)), (0, 2, c(-0.2, 0.3))]),
                lower(vec![(0, 1, c(0.3, -0.2)), (1, 1, c(0.1, 0.1))]),
                Factor::Diag(c(1.2, 0.4)),
            ],
            PolyAlgebra {
                plus: BivariatePoly::new(vec![(1, 0, c(0.2, -0.1))]),
                zero: BivariatePoly::new(vec![(0, 1, c(-0.3, 0.2))]),
                minus: BivariatePoly::new(vec![(0, 0, c(2.0, 0.0)), (1, 1, c(0.15, 0.0))]),
            },
        )
    }

    #[test]
    fn single_upper_factor_group_element_in_closed_form() {
        // Psi_bar = [[1, p], [0, 1]] with p = ybar zbar gives
        // G = [[1 + p conj(p), p], [conj(p), 1]] read at (y z) on the slice
        let sol = Solution::full_gauge(vec![upper(vec![(1, 1, c(1.0, 0.0))])], PolyAlgebra::default());
        let p = RealSlicePoint::new(c(0.7, -0.2), c(0.4, 0.6));
        let sj = sol.eval(BasePoint::RealSlice(p), 3).unwrap();
        let pbar = (p.y * p.z).conj();
        let g = sj.g.value();
        assert!((g[0][0] - (1.0 + pbar * pbar.conj())).norm() < 1e-14);
        assert!((g[0][1] - pbar).norm() < 1e-14);
        assert!((g[1][0] - pbar.conj()).norm() < 1e-14);
        assert!((g[1][1] - 1.0).norm() < 1e-14);
        // hermitian on the slice
        let diff = sj.g.sub(&sj.g.hermitian_conjugate().unwrap()).max_abs_coeff();
        assert!(diff < 1e-13);
    }

    #[test]
    fn group_element_is_hermitian_and_unimodular_on_slice() {
        let sol = sample_seed();
        for (py, pz) in [(c(0.3, 0.4), c(-0.2, 0.1)), (c(-0.6, 0.2), c(0.5, 0.5)), (c(0.0, 0.0), c(1.1, -0.3))] {
            let sj = sol.eval(BasePoint::slice(py, pz), 3).unwrap();
            let herm = sj.g.sub(&sj.g.hermitian_conjugate().unwrap()).max_abs_coeff();
            assert!(herm < 1e-12, "hermiticity residual {herm}");
            let det = sj.g.det().add_scalar(c(-1.0, 0.0)).max_abs_coeff();
            assert!(det < 1e-12, "unimodularity residual {det}");
            let prs = sj.f_bar.sub(&sj.f.hermitian_conjugate().unwrap()).max_abs_coeff();
            assert!(prs < 1e-12, "f_bar pairing residual {prs}");
        }
    }

    #[test]
    fn compatibility_relations_hold_at_jet_level() {
        let sol = sample_seed();
        let base = BasePoint::slice(c(0.45, -0.3), c(0.25, 0.6));
        let sj = sol.eval(base, 4).unwrap();
        let ginv = sj.g.inverse().unwrap().truncated(3);

        // left: f_z = G_ybar G^-1, f_y = -G_zbar G^-1
        let lhs = sj.f.derivative(Variable::Z).to_matrix();
        let rhs = sj.g.derivative(Variable::YBar).mul(&ginv);
        assert!(lhs.sub(&rhs).max_abs_coeff() < 1e-12);
        let lhs = sj.f.derivative(Variable::Y).to_matrix();
        let rhs = sj.g.derivative(Variable::ZBar).mul(&ginv).scale(-1.0);
        assert!(lhs.sub(&rhs).max_abs_coeff() < 1e-12);

        // right: fbar_zbar = G^-1 G_y, fbar_ybar = -G^-1 G_z
        let lhs = sj.f_bar.derivative(Variable::ZBar).to_matrix();
        let rhs = ginv.mul(&sj.g.derivative(Variable::Y));
        assert!(lhs.sub(&rhs).max_abs_coeff() < 1e-12);
        let lhs = sj.f_bar.derivative(Variable::YBar).to_matrix();
        let rhs = ginv.mul(&sj.g.derivative(Variable::Z)).scale(-1.0);
        assert!(lhs.sub(&rhs).max_abs_coeff() < 1e-12);

        // the same relations through the Gauss-coordinate closed form
        let lhs = sj.f.derivative(Variable::Z);
        let rhs = left_log_derivative(&sj.gauss, Variable::YBar);
        assert!(lhs.sub(&rhs).max_abs_coeff() < 1e-11);
    }

    #[test]
    fn second_order_field_equations_hold() {
        let sol = sample_seed();
        let base = BasePoint::slice(c(-0.35, 0.15), c(0.3, -0.45));
        let sj = sol.eval(base, 4).unwrap();
        // f_{y ybar} + f_{z zbar} = [f_z, f_y]
        let f = &sj.f;
        let lhs = f
            .derivative(Variable::Y)
            .derivative(Variable::YBar)
            .add(&f.derivative(Variable::Z).derivative(Variable::ZBar));
        let rhs = f
            .derivative(Variable::Z)
            .truncated(2)
            .commutator(&f.derivative(Variable::Y).truncated(2));
        assert!(lhs.sub(&rhs).max_abs_coeff() < 1e-12);
        // fbar_{y ybar} + fbar_{z zbar} = [fbar_ybar, fbar_zbar]
        let fb = &sj.f_bar;
        let lhs = fb
            .derivative(Variable::Y)
            .derivative(Variable::YBar)
            .add(&fb.derivative(Variable::Z).derivative(Variable::ZBar));
        let rhs = fb
            .derivative(Variable::YBar)
            .truncated(2)
            .commutator(&fb.derivative(Variable::ZBar).truncated(2));
        assert!(lhs.sub(&rhs).max_abs_coeff() < 1e-12);
    }

    #[test]
    fn f_minus_matches_row_formula() {
        // for Psi_bar = lower(zbar) * upper(ybar) the second row is
        // (theta_bar, phi_bar) = (zbar, 1 + ybar zbar); f_minus must equal
        // phi_bar (z d_ybar - y d_zbar) theta_bar
        //   - theta_bar (z d_ybar - y d_zbar) phi_bar + chi_minus
        let chi_minus = c(1.5, 0.0);
        let sol = Solution::full_gauge(
            vec![lower(vec![(0, 1, c(1.0, 0.0))]), upper(vec![(1, 0, c(1.0, 0.0))])],
            PolyAlgebra {
                minus: BivariatePoly::constant(chi_minus),
                ..Default::default()
            },
        );
        let p = RealSlicePoint::new(c(0.8, 0.3), c(-0.4, 0.5));
        let sj = sol.eval(BasePoint::RealSlice(p), 3).unwrap();
        let (y, z) = (p.y, p.z);
        let (ybar, zbar) = (y.conj(), z.conj());
        let theta = zbar;
        let phi = 1.0 + ybar * zbar;
        // derivatives of the row entries
        let th_ybar = c(0.0, 0.0);
        let th_zbar = c(1.0, 0.0);
        let ph_ybar = zbar;
        let ph_zbar = ybar;
        let direct = phi * (z * th_ybar - y * th_zbar) - theta * (z * ph_ybar - y * ph_zbar)
            + chi_minus;
        assert!((sj.f.minus.value() - direct).norm() < 1e-13);
        // and the second row of Psi_bar is what the formula assumed
        let wd = 4;
        let pb = super::factor_product(
            &[lower(vec![(0, 1, c(1.0, 0.0))]), upper(vec![(1, 0, c(1.0, 0.0))])],
            Variable::YBar,
            Variable::ZBar,
            BasePoint::RealSlice(p),
            wd,
        );
        assert!((pb.e[1][0].value() - theta).norm() < 1e-14);
        assert!((pb.e[1][1].value() - phi).norm() < 1e-14);
    }

    #[test]
    fn vacuum_decomposes_to_zero_parameters() {
        let sol = Solution::full_gauge(vec![], PolyAlgebra::default());
        let sj = sol.eval(BasePoint::slice(c(0.2, 0.1), c(0.3, -0.2)), 3).unwrap();
        assert!(sj.gauss.alpha.max_abs_coeff() < 1e-15);
        assert!(sj.gauss.tau.max_abs_coeff() < 1e-15);
        assert!(sj.gauss.beta.max_abs_coeff() < 1e-15);
    }

    #[test]
    fn one_instanton_charge_data_closed_forms() {
        let a = c(1.0, 0.0);
        let sol = Solution::one_instanton(a).unwrap();
        let p = RealSlicePoint::new(c(0.6, -0.3), c(0.2, 0.7));
        let base = BasePoint::RealSlice(p);
        let cd = sol.charge_data(base, 4).unwrap();
        // f_minus = y ybar + z zbar + a
        let y = Jet::variable(Variable::Y, base, 4);
        let ybar = Jet::variable(Variable::YBar, base, 4);
        let z = Jet::variable(Variable::Z, base, 4);
        let zbar = Jet::variable(Variable::ZBar, base, 4);
        let r2 = &(&y * &ybar) + &(&z * &zbar);
        let want = r2.add_scalar(a);
        assert!((&cd.f_minus - &want).max_abs_coeff() < 1e-14);
        // exp(-tau) = y ybar + z zbar
        assert!((&cd.exp_neg_tau - &r2).max_abs_coeff() < 1e-14);

        assert!(matches!(
            Solution::one_instanton(c(-1.0, 0.5)),
            Err(SdymError::NonPositiveScale { .. })
        ));
    }

    #[test]
    fn one_instanton_transformed_fbar_plus_fixture() {
        // at r = 1, a = 1: ((a + abar) r^2 + a abar) / (r^2 + a) = 3/2
        let sol = Solution::one_instanton(c(1.0, 0.0)).unwrap();
        let p = RealSlicePoint::new(c(1.0, 0.0), c(0.0, 0.0));
        let v = sol.f_bar_plus_transformed(p, 2).unwrap().value();
        assert_relative_eq!(v.re, 1.5, epsilon = 1e-14);
        assert_relative_eq!(v.im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn enlarged_pairing_breaks_physical_restriction_but_not_compatibility() {
        let psi_bar = vec![upper(vec![(1, 0, c(0.5, 0.2))])];
        // mismatched partner: coefficient off by 1e-3
        let psi = vec![lower(vec![(1, 0, c(0.5 + 1e-3, -0.2))])];
        let sol = Solution::enlarged(psi_bar, psi, PolyAlgebra::default(), PolyAlgebra::default());
        let base = BasePoint::slice(c(0.4, 0.3), c(0.2, -0.6));
        let sj = sol.eval(base, 3).unwrap();
        let herm = sj.g.sub(&sj.g.hermitian_conjugate().unwrap()).max_abs_coeff();
        assert!(herm > 1e-4, "pairing corruption must be visible, got {herm}");
        let ginv = sj.g.inverse().unwrap().truncated(2);
        let lhs = sj.f.derivative(Variable::Z).to_matrix();
        let rhs = sj.g.derivative(Variable::YBar).mul(&ginv);
        assert!(lhs.sub(&rhs).max_abs_coeff() < 1e-12);
    }

    #[test]
    fn seed_spec_round_trip_and_validation() {
        let spec = SeedSpec::one_instanton(c(1.0, 0.5)).unwrap();
        let text = spec.to_json();
        let back = SeedSpec::from_json(&text).unwrap();
        back.build().unwrap();

        let bad = r#"{"kind": "charge_only", "factors": []}"#;
        assert!(SeedSpec::from_json(bad).unwrap().build().is_err());
        let bad = r#"{"kind": "full_gauge", "factors": [{"shape": "diag", "d": [0.0, 0.0]}]}"#;
        assert!(SeedSpec::from_json(bad).unwrap().build().is_err());
        let bad = r#"{"kind": "full_gauge", "unknown_field": 1}"#;
        assert!(SeedSpec::from_json(bad).is_err());

        let full = SeedSpec {
            kind: SeedKind::FullGauge,
            factors: Some(vec![
                FactorSpec::Upper { poly: vec![(1, 0, 0.4, 0.1)] },
                FactorSpec::Diag { d: (1.1, -0.2) },
            ]),
            chi: Some(ChiSpec { minus: vec![(0, 0, 2.0, 0.0)], ..Default::default() }),
            psi_factors: None,
            chi_bar: None,
            theta_bar: None,
            phi_bar: None,
            psi_bar: None,
        };
        let sol = SeedSpec::from_json(&full.to_json()).unwrap().build().unwrap();
        assert!(sol.is_full_gauge());
        sol.eval(BasePoint::origin(), 3).unwrap();
    }

    #[test]
    fn gauge_transform_preserves_physical_restriction_when_hermitian() {
        let sol = sample_seed();
        let gauged = sol
            .gauge_transformed(upper(vec![(0, 1, c(0.25, -0.15))]), None)
            .unwrap();
        let base = BasePoint::slice(c(0.3, -0.2), c(0.4, 0.25));
        let sj = gauged.eval(base, 3).unwrap();
        assert!(sj.g.sub(&sj.g.hermitian_conjugate().unwrap()).max_abs_coeff() < 1e-12);

        // non-hermitian partner: compatibility survives, restriction fails
        let skew = sol
            .gauge_transformed(
                upper(vec![(0, 1, c(0.25, -0.15))]),
                Some(lower(vec![(0, 1, c(0.5, 0.4))])),
            )
            .unwrap();
        let sj = skew.eval(base, 3).unwrap();
        assert!(sj.g.sub(&sj.g.hermitian_conjugate().unwrap()).max_abs_coeff() > 1e-3);
        let ginv = sj.g.inverse().unwrap().truncated(2);
        let lhs = sj.f_bar.derivative(Variable::ZBar).to_matrix();
        let rhs = ginv.mul(&sj.g.derivative(Variable::Y));
        assert!(lhs.sub(&rhs).max_abs_coeff() < 1e-12);
    }
}
