//! Discrete transformations of the enlarged system and their composition.
//!
//! The left transform multiplies the group element by an upper-triangular
//! factor S = e^{rho h} e^{A X+} chosen so that S G solves the system again.
//! Working through the triangular algebra, the transformed group element is
//!
//!   G^t = e^{(alpha + A) f_-^2 X+} e^{(tau + ln f_-) h} e^{beta X-},
//!
//! where A f_-^2 is a potential of a one-form on the leaves of constant
//! (ybar, zbar) that is closed by the field equations, and the right-side
//! potential updates in closed form.  The right transform is the mirrored
//! statement (lower-triangular factor from the right, potentials on leaves
//! of constant (y, z)).  Applied in either order to a physically restricted
//! solution the two produce the same hermitian group element; the second
//! transform's integration constant is fixed on each leaf by matching, at the
//! start of its path, the mirror conjugate of the first argument at the
//! mirrored start.  Potentials are evaluated as full four-variable jets: a
//! quadrature along the leaf carries the jet in the frozen pair, and a ray
//! integral of the form's jets at the endpoint supplies the varying-pair
//! part.

use num_complex::Complex64;

use crate::error::{Result, SdymError};
use crate::jet::{BasePoint, Jet, RealSlicePoint, Variable};
use crate::lie2::{AlgebraElement, GaussParams, Matrix2};
use crate::quadrature::{gauss_legendre, lerp, Path};
use crate::seeds::{Solution, SolutionJets};

/// Relative tolerance for accepting an input as physically restricted.
pub const RESTRICTION_TOLERANCE: f64 = 1e-8;

/// Relative disagreement between nested quadrature rules beyond which a path
/// integral is rejected.
pub const PATH_CONVERGENCE_TOLERANCE: f64 = 1e-7;

/// Order increment of the finer rule in the nested pair.
const NESTED_EXTRA_ORDER: usize = 9;

/// Family of two-dimensional leaves on which the potentials live.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Leaf {
    /// (y, z) vary, (ybar, zbar) are frozen.
    Unbarred,
    /// (ybar, zbar) vary, (y, z) are frozen.
    Barred,
}

impl Leaf {
    pub fn varying(self) -> [Variable; 2] {
        match self {
            Leaf::Unbarred => [Variable::Y, Variable::Z],
            Leaf::Barred => [Variable::YBar, Variable::ZBar],
        }
    }

    pub fn frozen(self) -> [Variable; 2] {
        self.opposite().varying()
    }

    pub fn opposite(self) -> Leaf {
        match self {
            Leaf::Unbarred => Leaf::Barred,
            Leaf::Barred => Leaf::Unbarred,
        }
    }
}

// ---------------------------------------------------------------------------
// One-forms
// ---------------------------------------------------------------------------

/// d(A f_-^2) on the unbarred leaf, from the left potential:
/// P = -2 f0_y f_- + f-_zbar, Q = -2 f0_z f_- - f-_ybar.
/// Input jets of degree k give form coefficients of degree k - 1.
pub fn raising_increment_form(f: &AlgebraElement) -> (Jet, Jet) {
    let d = f.minus.degree() - 1;
    let fm = f.minus.truncated(d);
    let p = &(&f.zero.derivative(Variable::Y) * &fm).scale(-2.0)
        + &f.minus.derivative(Variable::ZBar);
    let q = &(&f.zero.derivative(Variable::Z) * &fm).scale(-2.0)
        - &f.minus.derivative(Variable::YBar);
    (p, q)
}

/// d((alpha + A) f_-^2) on the unbarred leaf, the equivalent form phrased in
/// the Gauss coordinates: P = alpha_y f_-^2 + 2 tau_zbar f_- + f-_zbar.
pub fn raising_total_form(gauss: &GaussParams, f_minus: &Jet) -> (Jet, Jet) {
    let d = f_minus.degree() - 1;
    let fm = f_minus.truncated(d);
    let fm2 = &fm * &fm;
    let p = &(&(&gauss.alpha.derivative(Variable::Y) * &fm2)
        + &(&gauss.tau.derivative(Variable::ZBar) * &fm).scale(2.0))
        + &f_minus.derivative(Variable::ZBar);
    let q = &(&(&gauss.alpha.derivative(Variable::Z) * &fm2)
        - &(&gauss.tau.derivative(Variable::YBar) * &fm).scale(2.0))
        - &f_minus.derivative(Variable::YBar);
    (p, q)
}

/// d(B fbar_+^2) on the barred leaf, from the right potential:
/// P = -2 fbar0_ybar fbar_+ + fbar+_z, Q = -2 fbar0_zbar fbar_+ - fbar+_y.
pub fn lowering_increment_form(f_bar: &AlgebraElement) -> (Jet, Jet) {
    let d = f_bar.plus.degree() - 1;
    let fp = f_bar.plus.truncated(d);
    let p = &(&f_bar.zero.derivative(Variable::YBar) * &fp).scale(-2.0)
        + &f_bar.plus.derivative(Variable::Z);
    let q = &(&f_bar.zero.derivative(Variable::ZBar) * &fp).scale(-2.0)
        - &f_bar.plus.derivative(Variable::Y);
    (p, q)
}

/// d((beta + B) fbar_+^2) on the barred leaf in Gauss coordinates.
pub fn lowering_total_form(gauss: &GaussParams, f_bar_plus: &Jet) -> (Jet, Jet) {
    let d = f_bar_plus.degree() - 1;
    let fp = f_bar_plus.truncated(d);
    let fp2 = &fp * &fp;
    let p = &(&(&gauss.beta.derivative(Variable::YBar) * &fp2)
        + &(&gauss.tau.derivative(Variable::Z) * &fp).scale(2.0))
        + &f_bar_plus.derivative(Variable::Z);
    let q = &(&(&gauss.beta.derivative(Variable::ZBar) * &fp2)
        - &(&gauss.tau.derivative(Variable::Y) * &fp).scale(2.0))
        - &f_bar_plus.derivative(Variable::Y);
    (p, q)
}

/// Exterior-derivative coefficient of P du + Q dv on the leaf; zero exactly
/// when the form is closed there.
pub fn closure_residual(p: &Jet, q: &Jet, leaf: Leaf) -> Jet {
    let [u, v] = leaf.varying();
    &p.derivative(v) - &q.derivative(u)
}

// ---------------------------------------------------------------------------
// Closed-form potential updates
// ---------------------------------------------------------------------------

fn singular(what: &'static str) -> impl Fn(SdymError) -> SdymError {
    move |e| match e {
        SdymError::DivisionBySingularValue { value } | SdymError::LogOfZero { value } => {
            SdymError::SingularTransform { what, value }
        }
        other => other,
    }
}

/// Right potential after the left transform:
/// fbar^t = fbar - G^{-1} X+ G / f_-, all components in closed form.
pub fn left_updated_f_bar(sj: &SolutionJets) -> Result<AlgebraElement> {
    let g21 = &sj.g.e[1][0];
    let g22 = &sj.g.e[1][1];
    let fm = &sj.f.minus;
    let err = singular("f_minus");
    Ok(AlgebraElement {
        plus: &sj.f_bar.plus - &(g22 * g22).div(fm).map_err(&err)?,
        zero: &sj.f_bar.zero - &(g21 * g22).div(fm).map_err(&err)?,
        minus: &sj.f_bar.minus + &(g21 * g21).div(fm).map_err(&err)?,
    })
}

/// Left potential after the right transform:
/// f^t = f - G X- G^{-1} / fbar_+, the mirrored closed form.
pub fn right_updated_f(sj: &SolutionJets) -> Result<AlgebraElement> {
    let g12 = &sj.g.e[0][1];
    let g22 = &sj.g.e[1][1];
    let fp = &sj.f_bar.plus;
    let err = singular("f_bar_plus");
    Ok(AlgebraElement {
        minus: &sj.f.minus - &(g22 * g22).div(fp).map_err(&err)?,
        zero: &sj.f.zero - &(g12 * g22).div(fp).map_err(&err)?,
        plus: &sj.f.plus + &(g12 * g12).div(fp).map_err(&err)?,
    })
}

// ---------------------------------------------------------------------------
// Potential jets by quadrature
// ---------------------------------------------------------------------------

/// Evaluates leaf potentials as full four-variable jets at the end of a path.
#[derive(Debug, Clone, Copy)]
pub struct LeafIntegrator {
    pub leaf: Leaf,
    pub degree: usize,
    pub quad_order: usize,
}

impl LeafIntegrator {
    /// Straight path to `target` whose varying pair starts at the anchor and
    /// whose frozen pair is pinned to the target's.
    pub fn leaf_path(&self, target: BasePoint, anchor: RealSlicePoint) -> Path {
        let anchor_of = |v: Variable| match v {
            Variable::Y => anchor.y,
            Variable::YBar => anchor.y.conj(),
            Variable::Z => anchor.z,
            Variable::ZBar => anchor.z.conj(),
        };
        let coord = |v: Variable| {
            if self.leaf.varying().contains(&v) {
                anchor_of(v)
            } else {
                target.coordinate(v)
            }
        };
        let start = BasePoint::Independent {
            y: coord(Variable::Y),
            ybar: coord(Variable::YBar),
            z: coord(Variable::Z),
            zbar: coord(Variable::ZBar),
        };
        Path::straight(start, target)
    }

    /// Full jet at path.end() of the potential of the one-form returned by
    /// `form`, normalized to vanish on the start fiber of every leaf.  The
    /// quadrature runs on a nested pair of rules; disagreement beyond
    /// `PATH_CONVERGENCE_TOLERANCE` (relative) reports a singular path.
    pub fn potential_jet<F>(&self, path: &Path, form: F) -> Result<Jet>
    where
        F: Fn(BasePoint, usize) -> Result<(Jet, Jet)>,
    {
        let target = path.end();
        for v in self.leaf.frozen() {
            for (a, b) in path.segments() {
                let ok = (a.coordinate(v) - target.coordinate(v)).norm() < 1e-10
                    && (b.coordinate(v) - target.coordinate(v)).norm() < 1e-10;
                assert!(ok, "path leaves the integration leaf");
            }
        }

        let coarse = self.transported_coeffs(path, &form, self.quad_order)?;
        let fine = self.transported_coeffs(path, &form, self.quad_order + NESTED_EXTRA_ORDER)?;
        let mut residual: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for (a, b) in coarse.iter().zip(&fine) {
            residual = residual.max((a - b).norm());
            scale = scale.max(b.norm());
        }
        if residual > PATH_CONVERGENCE_TOLERANCE * (1.0 + scale) {
            return Err(SdymError::PathSingular { residual });
        }

        let [u, v] = self.leaf.varying();
        let (p_end, q_end) = form(target, self.degree)?;
        let local = &p_end.ray_integral(u, [u, v]) + &q_end.ray_integral(v, [u, v]);
        Ok(&Jet::from_coeffs(target, self.degree, fine) + &local)
    }

    /// Coefficients (in the frozen pair only) of the integral along the path.
    fn transported_coeffs<F>(&self, path: &Path, form: &F, order: usize) -> Result<Vec<Complex64>>
    where
        F: Fn(BasePoint, usize) -> Result<(Jet, Jet)>,
    {
        let [u, v] = self.leaf.varying();
        let probe = Jet::zero(path.end(), self.degree);
        let indices = probe.multi_indices();
        let kept: Vec<usize> = indices
            .iter()
            .enumerate()
            .filter(|(_, k)| k[u.index()] == 0 && k[v.index()] == 0)
            .map(|(i, _)| i)
            .collect();
        let mut coeffs = vec![Complex64::default(); indices.len()];
        let rule = gauss_legendre(order);
        let nseg = path.segments().count();
        for (i, (a, b)) in path.segments().enumerate() {
            let du = b.coordinate(u) - a.coordinate(u);
            let dv = b.coordinate(v) - a.coordinate(v);
            if du.norm_sqr() == 0.0 && dv.norm_sqr() == 0.0 {
                continue;
            }
            for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
                let global_t = (i as f64 + t) / nseg as f64;
                let node = lerp(a, b, t);
                let (p, q) = form(node, self.degree).map_err(|e| match e {
                    SdymError::DivisionBySingularValue { value }
                    | SdymError::LogOfZero { value }
                    | SdymError::SingularDecomposition { value } => {
                        SdymError::SingularOnPath { t: global_t, dist: value }
                    }
                    other => other,
                })?;
                for &idx in &kept {
                    coeffs[idx] += (p.coeffs()[idx] * du + q.coeffs()[idx] * dv) * w;
                }
            }
        }
        Ok(coeffs)
    }
}

/// Keeps only the monomials constant along `varying` and re-anchors the jet
/// at `target`; source and target must agree in the kept coordinates.
fn constant_along(jet: &Jet, varying: Leaf, target: BasePoint) -> Jet {
    let [u, v] = varying.varying();
    for w in varying.frozen() {
        debug_assert!(
            (jet.base().coordinate(w) - target.coordinate(w)).norm() < 1e-10,
            "transplant changes a kept coordinate"
        );
    }
    let indices = jet.multi_indices();
    let mut coeffs = jet.coeffs().to_vec();
    for (i, kappa) in indices.iter().enumerate() {
        if kappa[u.index()] != 0 || kappa[v.index()] != 0 {
            coeffs[i] = Complex64::default();
        }
    }
    Jet::from_coeffs(target, jet.degree(), coeffs)
}

// ---------------------------------------------------------------------------
// Transforms
// ---------------------------------------------------------------------------

/// Jet degree, quadrature order and the common start of the integration
/// paths.  The anchor is a real-slice point; each leaf's path starts at the
/// anchor's coordinates in the varying pair.
#[derive(Debug, Clone, Copy)]
pub struct TransformSettings {
    pub degree: usize,
    pub quad_order: usize,
    pub anchor: RealSlicePoint,
}

impl Default for TransformSettings {
    fn default() -> Self {
        TransformSettings { degree: 4, quad_order: 32, anchor: RealSlicePoint::origin() }
    }
}

impl TransformSettings {
    fn integrator(&self, leaf: Leaf) -> LeafIntegrator {
        LeafIntegrator { leaf, degree: self.degree, quad_order: self.quad_order }
    }
}

/// Which transform is applied first in a composition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    LeftThenRight,
    RightThenLeft,
}

/// The left discrete transform.
pub struct LeftTransform<'a> {
    pub solution: &'a Solution,
    pub settings: TransformSettings,
}

/// The right discrete transform, the mirror image of the left one.
pub struct RightTransform<'a> {
    pub solution: &'a Solution,
    pub settings: TransformSettings,
}

/// Composition of the two transforms with the leaf constants tied together
/// so that a physically restricted input stays physically restricted.
pub struct BacklundTransform<'a> {
    pub solution: &'a Solution,
    pub settings: TransformSettings,
    pub order: Order,
}

impl<'a> LeftTransform<'a> {
    pub fn new(solution: &'a Solution, settings: TransformSettings) -> Self {
        LeftTransform { solution, settings }
    }

    /// Exponent arguments of the transformed group element as full jets.
    pub fn arguments(&self, base: BasePoint) -> Result<GaussParams> {
        let d = self.settings.degree;
        let sj = self.solution.eval(base, d)?;
        let fm = &sj.f.minus;
        let alpha_part = &sj.gauss.alpha * &(fm * fm);
        let integrator = self.settings.integrator(Leaf::Unbarred);
        let path = integrator.leaf_path(base, self.settings.anchor);
        let sol = self.solution;
        let increment = integrator.potential_jet(&path, |b, k| {
            let sjn = sol.eval(b, k + 1)?;
            Ok(raising_increment_form(&sjn.f))
        })?;
        Ok(GaussParams {
            alpha: &alpha_part + &increment,
            tau: &sj.gauss.tau + &fm.ln().map_err(singular("f_minus"))?,
            beta: sj.gauss.beta.clone(),
        })
    }

    pub fn group_element(&self, base: BasePoint) -> Result<Matrix2> {
        Ok(self.arguments(base)?.compose())
    }

    /// Closed-form right potential of the transformed solution.
    pub fn updated_f_bar(&self, base: BasePoint, degree: usize) -> Result<AlgebraElement> {
        left_updated_f_bar(&self.solution.eval(base, degree)?)
    }
}

impl<'a> RightTransform<'a> {
    pub fn new(solution: &'a Solution, settings: TransformSettings) -> Self {
        RightTransform { solution, settings }
    }

    pub fn arguments(&self, base: BasePoint) -> Result<GaussParams> {
        let d = self.settings.degree;
        let sj = self.solution.eval(base, d)?;
        let fp = &sj.f_bar.plus;
        let beta_part = &sj.gauss.beta * &(fp * fp);
        let integrator = self.settings.integrator(Leaf::Barred);
        let path = integrator.leaf_path(base, self.settings.anchor);
        let sol = self.solution;
        let increment = integrator.potential_jet(&path, |b, k| {
            let sjn = sol.eval(b, k + 1)?;
            Ok(lowering_increment_form(&sjn.f_bar))
        })?;
        Ok(GaussParams {
            alpha: sj.gauss.alpha.clone(),
            tau: &sj.gauss.tau + &fp.ln().map_err(singular("f_bar_plus"))?,
            beta: &beta_part + &increment,
        })
    }

    pub fn group_element(&self, base: BasePoint) -> Result<Matrix2> {
        Ok(self.arguments(base)?.compose())
    }

    /// Closed-form left potential of the transformed solution.
    pub fn updated_f(&self, base: BasePoint, degree: usize) -> Result<AlgebraElement> {
        right_updated_f(&self.solution.eval(base, degree)?)
    }
}

impl<'a> BacklundTransform<'a> {
    pub fn new(solution: &'a Solution, settings: TransformSettings, order: Order) -> Self {
        BacklundTransform { solution, settings, order }
    }

    /// Residual of the physical restriction (group element hermitian, right
    /// potential the conjugate of the left one), relative to the jet scale.
    pub fn restriction_residual(&self, p: RealSlicePoint) -> Result<f64> {
        let sj = self.solution.eval(BasePoint::RealSlice(p), self.settings.degree)?;
        let g_dev = sj.g.sub(&sj.g.hermitian_conjugate()?).max_abs_coeff()
            / (1.0 + sj.g.max_abs_coeff());
        let f_dev = sj.f_bar.sub(&sj.f.hermitian_conjugate()?).max_abs_coeff()
            / (1.0 + sj.f.max_abs_coeff().max(sj.f_bar.max_abs_coeff()));
        Ok(g_dev.max(f_dev))
    }

    /// Exponent arguments of the composed group element as full jets at a
    /// real-slice point.
    pub fn arguments(&self, p: RealSlicePoint) -> Result<GaussParams> {
        let residual = self.restriction_residual(p)?;
        if residual > RESTRICTION_TOLERANCE {
            return Err(SdymError::NotPhysicallyRestricted { residual });
        }

        let d = self.settings.degree;
        let base = BasePoint::RealSlice(p);
        let anchor = self.settings.anchor;
        let sol = self.solution;
        let sj = sol.eval(base, d)?;

        // the middle argument is shared by both orders:
        // tau + ln(f_- fbar_+ - e^{-2 tau})
        let e2t = &sj.g.e[1][1] * &sj.g.e[1][1];
        let middle_arg = &(&sj.f.minus * &sj.f_bar.plus) - &e2t;
        let tau = &sj.gauss.tau
            + &middle_arg.ln().map_err(singular("composed middle argument"))?;

        // four-point path starts: the second leg starts where the first
        // leg's leaf meets the anchor fiber, and its mirror image is the
        // first leg's start
        let start_b = BasePoint::Independent {
            y: p.y,
            ybar: anchor.y.conj(),
            z: p.z,
            zbar: anchor.z.conj(),
        };
        let start_a = BasePoint::Independent {
            y: anchor.y,
            ybar: p.y.conj(),
            z: anchor.z,
            zbar: p.z.conj(),
        };

        let unbarred = self.settings.integrator(Leaf::Unbarred);
        let barred = self.settings.integrator(Leaf::Barred);
        let path_a = unbarred.leaf_path(base, anchor);
        let path_b = barred.leaf_path(base, anchor);

        match self.order {
            Order::LeftThenRight => {
                let fm = &sj.f.minus;
                let alpha_closed = &sj.gauss.alpha * &(fm * fm);
                let alpha_inc = unbarred.potential_jet(&path_a, |b, k| {
                    let sjn = sol.eval(b, k + 1)?;
                    Ok(raising_increment_form(&sjn.f))
                })?;
                let alpha = &alpha_closed + &alpha_inc;

                let fp_t = &sj.f_bar.plus - &e2t.div(fm).map_err(singular("f_minus"))?;
                let beta_closed = &sj.gauss.beta * &(&fp_t * &fp_t);
                let beta_inc = barred.potential_jet(&path_b, |b, k| {
                    let sjn = sol.eval(b, k + 1)?;
                    Ok(lowering_increment_form(&left_updated_f_bar(&sjn)?))
                })?;
                // leaf constant: at the start of the barred path the lowering
                // argument must mirror the raising argument at the mirrored
                // start, where the raising potential vanishes
                let sj_a = sol.eval(start_a, d)?;
                let fm_a = &sj_a.f.minus;
                let first_at_mirror = &sj_a.gauss.alpha * &(fm_a * fm_a);
                let sj_b = sol.eval(start_b, d)?;
                let e2t_b = &sj_b.g.e[1][1] * &sj_b.g.e[1][1];
                let fp_t_b =
                    &sj_b.f_bar.plus - &e2t_b.div(&sj_b.f.minus).map_err(singular("f_minus"))?;
                let closed_at_start = &sj_b.gauss.beta * &(&fp_t_b * &fp_t_b);
                let constant = constant_along(
                    &(&first_at_mirror.mirror_conjugate() - &closed_at_start),
                    Leaf::Barred,
                    base,
                );
                let beta = &(&beta_closed + &beta_inc) + &constant;
                Ok(GaussParams { alpha, tau, beta })
            }
            Order::RightThenLeft => {
                let fp = &sj.f_bar.plus;
                let beta_closed = &sj.gauss.beta * &(fp * fp);
                let beta_inc = barred.potential_jet(&path_b, |b, k| {
                    let sjn = sol.eval(b, k + 1)?;
                    Ok(lowering_increment_form(&sjn.f_bar))
                })?;
                let beta = &beta_closed + &beta_inc;

                let fm_t = &sj.f.minus - &e2t.div(fp).map_err(singular("f_bar_plus"))?;
                let alpha_closed = &sj.gauss.alpha * &(&fm_t * &fm_t);
                let alpha_inc = unbarred.potential_jet(&path_a, |b, k| {
                    let sjn = sol.eval(b, k + 1)?;
                    Ok(raising_increment_form(&right_updated_f(&sjn)?))
                })?;
                let sj_b = sol.eval(start_b, d)?;
                let fp_b = &sj_b.f_bar.plus;
                let first_at_mirror = &sj_b.gauss.beta * &(fp_b * fp_b);
                let sj_a = sol.eval(start_a, d)?;
                let e2t_a = &sj_a.g.e[1][1] * &sj_a.g.e[1][1];
                let fm_t_a = &sj_a.f.minus
                    - &e2t_a.div(&sj_a.f_bar.plus).map_err(singular("f_bar_plus"))?;
                let closed_at_start = &sj_a.gauss.alpha * &(&fm_t_a * &fm_t_a);
                let constant = constant_along(
                    &(&first_at_mirror.mirror_conjugate() - &closed_at_start),
                    Leaf::Unbarred,
                    base,
                );
                let alpha = &(&alpha_closed + &alpha_inc) + &constant;
                Ok(GaussParams { alpha, tau, beta })
            }
        }
    }

    pub fn group_element(&self, p: RealSlicePoint) -> Result<Matrix2> {
        Ok(self.arguments(p)?.compose())
    }

    /// Relative deviation of the composed group element from hermiticity.
    pub fn hermiticity_residual(&self, p: RealSlicePoint) -> Result<f64> {
        let g = self.group_element(p)?;
        Ok(g.sub(&g.hermitian_conjugate()?).max_abs_coeff() / (1.0 + g.max_abs_coeff()))
    }

    /// Relative disagreement between the two composition orders.
    pub fn commutativity_residual(&self, p: RealSlicePoint) -> Result<f64> {
        let flipped = BacklundTransform {
            solution: self.solution,
            settings: self.settings,
            order: match self.order {
                Order::LeftThenRight => Order::RightThenLeft,
                Order::RightThenLeft => Order::LeftThenRight,
            },
        };
        let a = self.arguments(p)?;
        let b = flipped.arguments(p)?;
        let scale = 1.0
            + a.alpha
                .max_abs_coeff()
                .max(a.beta.max_abs_coeff())
                .max(a.tau.max_abs_coeff());
        let dev = (&a.alpha - &b.alpha)
            .max_abs_coeff()
            .max((&a.tau - &b.tau).max_abs_coeff())
            .max((&a.beta - &b.beta).max_abs_coeff());
        Ok(dev / scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::BivariatePoly;
    use crate::seeds::{Factor, PolyAlgebra};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn upper(terms: Vec<(u32, u32, Complex64)>) -> Factor {
        Factor::Upper(BivariatePoly::new(terms))
    }

    fn lower(terms: Vec<(u32, u32, Complex64)>) -> Factor {
        Factor::Lower(BivariatePoly::new(terms))
    }

    fn rich_seed() -> Solution {
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

    fn rel(dev: f64, scale: f64) -> f64 {
        dev / (1.0 + scale)
    }

    #[test]
    fn transformation_one_forms_are_closed_on_their_leaves() {
        let sol = rich_seed();
        for (py, pz) in [(c(0.3, 0.4), c(-0.2, 0.1)), (c(-0.5, 0.1), c(0.4, 0.3))] {
            let sj = sol.eval(BasePoint::slice(py, pz), 4).unwrap();
            let (p, q) = raising_increment_form(&sj.f);
            let r = closure_residual(&p, &q, Leaf::Unbarred).max_abs_coeff();
            assert!(rel(r, p.max_abs_coeff()) < 1e-13, "raising increment closure {r}");
            let (p, q) = raising_total_form(&sj.gauss, &sj.f.minus);
            let r = closure_residual(&p, &q, Leaf::Unbarred).max_abs_coeff();
            assert!(rel(r, p.max_abs_coeff()) < 1e-12, "raising total closure {r}");
            let (p, q) = lowering_increment_form(&sj.f_bar);
            let r = closure_residual(&p, &q, Leaf::Barred).max_abs_coeff();
            assert!(rel(r, p.max_abs_coeff()) < 1e-13, "lowering increment closure {r}");
            let (p, q) = lowering_total_form(&sj.gauss, &sj.f_bar.plus);
            let r = closure_residual(&p, &q, Leaf::Barred).max_abs_coeff();
            assert!(rel(r, p.max_abs_coeff()) < 1e-12, "lowering total closure {r}");

            // the forms built from the transformed potentials are closed too;
            // that is the heart of the transformation
            let (p, q) = lowering_increment_form(&left_updated_f_bar(&sj).unwrap());
            let r = closure_residual(&p, &q, Leaf::Barred).max_abs_coeff();
            assert!(rel(r, p.max_abs_coeff()) < 1e-12, "updated lowering closure {r}");
            let (p, q) = raising_increment_form(&right_updated_f(&sj).unwrap());
            let r = closure_residual(&p, &q, Leaf::Unbarred).max_abs_coeff();
            assert!(rel(r, p.max_abs_coeff()) < 1e-12, "updated raising closure {r}");
        }
    }

    #[test]
    fn total_form_is_increment_plus_exact_differential() {
        let sol = rich_seed();
        let sj = sol.eval(BasePoint::slice(c(0.25, -0.3), c(0.4, 0.2)), 4).unwrap();
        let closed = &sj.gauss.alpha * &(&sj.f.minus * &sj.f.minus);
        let (pi, qi) = raising_increment_form(&sj.f);
        let (pt, qt) = raising_total_form(&sj.gauss, &sj.f.minus);
        let dp = (&(&pt - &pi) - &closed.derivative(Variable::Y)).max_abs_coeff();
        let dq = (&(&qt - &qi) - &closed.derivative(Variable::Z)).max_abs_coeff();
        assert!(rel(dp, pt.max_abs_coeff()) < 1e-13, "dy part {dp}");
        assert!(rel(dq, qt.max_abs_coeff()) < 1e-13, "dz part {dq}");

        let closed = &sj.gauss.beta * &(&sj.f_bar.plus * &sj.f_bar.plus);
        let (pi, qi) = lowering_increment_form(&sj.f_bar);
        let (pt, qt) = lowering_total_form(&sj.gauss, &sj.f_bar.plus);
        let dp = (&(&pt - &pi) - &closed.derivative(Variable::YBar)).max_abs_coeff();
        let dq = (&(&qt - &qi) - &closed.derivative(Variable::ZBar)).max_abs_coeff();
        assert!(rel(dp, pt.max_abs_coeff()) < 1e-13, "dybar part {dp}");
        assert!(rel(dq, qt.max_abs_coeff()) < 1e-13, "dzbar part {dq}");
    }

    #[test]
    fn potential_jet_matches_linear_closed_form_for_translation_invariant_seed() {
        // with an empty gauge factor the one-form coefficients depend on
        // (ybar, zbar) only, so the potential is linear in the path
        let chi = PolyAlgebra {
            minus: BivariatePoly::new(vec![(0, 0, c(2.0, 0.0)), (1, 1, c(0.3, -0.2)), (0, 2, c(-0.4, 0.1))]),
            zero: BivariatePoly::new(vec![(1, 0, c(0.5, 0.2))]),
            plus: BivariatePoly::new(vec![(2, 0, c(-0.3, 0.0))]),
        };
        let sol = Solution::full_gauge(vec![], chi.clone());
        let anchor = RealSlicePoint::new(c(0.3, -0.1), c(-0.2, 0.4));
        let p0 = BasePoint::slice(c(0.7, 0.2), c(0.1, -0.5));
        let integrator = LeafIntegrator { leaf: Leaf::Unbarred, degree: 4, quad_order: 16 };
        let path = integrator.leaf_path(p0, anchor);
        let got = integrator
            .potential_jet(&path, |b, k| {
                let sjn = sol.eval(b, k + 1)?;
                Ok(raising_increment_form(&sjn.f))
            })
            .unwrap();

        // closed form: dzbar(chi_minus) (y - y_b) - dybar(chi_minus) (z - z_b)
        let dzb = BivariatePoly::new(vec![(1, 0, c(0.3, -0.2)), (0, 1, c(-0.8, 0.2))]);
        let dyb = BivariatePoly::new(vec![(0, 1, c(0.3, -0.2))]);
        let y = Jet::variable(Variable::Y, p0, 4).add_scalar(-anchor.y);
        let z = Jet::variable(Variable::Z, p0, 4).add_scalar(-anchor.z);
        let want = &(&dzb.jet(Variable::YBar, Variable::ZBar, p0, 4) * &y)
            - &(&dyb.jet(Variable::YBar, Variable::ZBar, p0, 4) * &z);
        assert!((&got - &want).max_abs_coeff() < 1e-13);
    }

    #[test]
    fn triangular_seed_composes_in_closed_form() {
        // Psi_bar = [[1, pbar], [0, 1]], chi_minus = a: the raising argument
        // of the composition is a^2 pbar and the lowering argument is its
        // mirror conjugate, in both orders
        let pbar_terms = vec![(1, 1, c(0.7, -0.4)), (0, 2, c(-0.3, 0.2))];
        let a = c(2.0, 0.0);
        let sol = Solution::full_gauge(
            vec![Factor::Upper(BivariatePoly::new(pbar_terms.clone()))],
            PolyAlgebra { minus: BivariatePoly::constant(a), ..Default::default() },
        );
        let p = RealSlicePoint::new(c(0.4, 0.3), c(-0.3, 0.5));
        let base = BasePoint::RealSlice(p);
        let settings = TransformSettings::default();
        let pbar = BivariatePoly::new(pbar_terms);
        let want_alpha = pbar.jet(Variable::YBar, Variable::ZBar, base, 4).scale(a * a);
        let want_beta = pbar
            .conj_coeffs()
            .jet(Variable::Y, Variable::Z, base, 4)
            .scale(a.conj() * a.conj());
        let want_tau = (a * a.conj() - 1.0).ln();

        for order in [Order::LeftThenRight, Order::RightThenLeft] {
            let bt = BacklundTransform::new(&sol, settings, order);
            let args = bt.arguments(p).unwrap();
            assert!((&args.alpha - &want_alpha).max_abs_coeff() < 1e-11, "{order:?} alpha");
            assert!((&args.beta - &want_beta).max_abs_coeff() < 1e-11, "{order:?} beta");
            assert!(args.tau.add_scalar(-want_tau).max_abs_coeff() < 1e-11, "{order:?} tau");
            assert!(bt.hermiticity_residual(p).unwrap() < 1e-12);
        }
    }

    #[test]
    fn left_transform_solves_the_system_again() {
        let sol = rich_seed();
        let settings = TransformSettings::default();
        let lt = LeftTransform::new(&sol, settings);
        let base = BasePoint::slice(c(0.35, -0.2), c(0.25, 0.4));
        let gt = lt.group_element(base).unwrap();
        let fb_t = lt.updated_f_bar(base, 4).unwrap();
        let ginv = gt.inverse().unwrap().truncated(3);

        // first-order relations with the closed-form right potential
        let r1 = ginv
            .mul(&gt.derivative(Variable::Y))
            .sub(&fb_t.derivative(Variable::ZBar).to_matrix())
            .max_abs_coeff();
        assert!(rel(r1, gt.max_abs_coeff()) < 1e-10, "dy relation {r1}");
        let r2 = ginv
            .mul(&gt.derivative(Variable::Z))
            .add(&fb_t.derivative(Variable::YBar).to_matrix())
            .max_abs_coeff();
        assert!(rel(r2, gt.max_abs_coeff()) < 1e-10, "dz relation {r2}");

        // the other side's compatibility: the left logarithmic derivative
        // pair has a potential because its curl vanishes
        let ginv2 = gt.inverse().unwrap().truncated(2);
        let m_ybar = gt.derivative(Variable::YBar).truncated(2).mul(&ginv2);
        let m_zbar = gt.derivative(Variable::ZBar).truncated(2).mul(&ginv2);
        let yang = m_ybar
            .derivative(Variable::Y)
            .add(&m_zbar.derivative(Variable::Z))
            .max_abs_coeff();
        assert!(rel(yang, gt.max_abs_coeff()) < 1e-10, "curl residual {yang}");

        // transformed right potential satisfies its field equation
        let lhs = fb_t
            .derivative(Variable::Y)
            .derivative(Variable::YBar)
            .add(&fb_t.derivative(Variable::Z).derivative(Variable::ZBar));
        let rhs = fb_t
            .derivative(Variable::YBar)
            .truncated(2)
            .commutator(&fb_t.derivative(Variable::ZBar).truncated(2));
        let fr = lhs.sub(&rhs).max_abs_coeff();
        assert!(rel(fr, fb_t.max_abs_coeff()) < 1e-12, "field equation {fr}");
    }

    #[test]
    fn right_transform_solves_the_system_again() {
        let sol = rich_seed();
        let rt = RightTransform::new(&sol, TransformSettings::default());
        let base = BasePoint::slice(c(-0.3, 0.15), c(0.3, -0.35));
        let gt = rt.group_element(base).unwrap();
        let f_t = rt.updated_f(base, 4).unwrap();
        let ginv = gt.inverse().unwrap().truncated(3);

        let r1 = gt
            .derivative(Variable::YBar)
            .mul(&ginv)
            .sub(&f_t.derivative(Variable::Z).to_matrix())
            .max_abs_coeff();
        assert!(rel(r1, gt.max_abs_coeff()) < 1e-10, "dybar relation {r1}");
        let r2 = gt
            .derivative(Variable::ZBar)
            .mul(&ginv)
            .add(&f_t.derivative(Variable::Y).to_matrix())
            .max_abs_coeff();
        assert!(rel(r2, gt.max_abs_coeff()) < 1e-10, "dzbar relation {r2}");

        let ginv2 = gt.inverse().unwrap().truncated(2);
        let n_y = ginv2.mul(&gt.derivative(Variable::Y).truncated(2));
        let n_z = ginv2.mul(&gt.derivative(Variable::Z).truncated(2));
        let yang = n_y
            .derivative(Variable::YBar)
            .add(&n_z.derivative(Variable::ZBar))
            .max_abs_coeff();
        assert!(rel(yang, gt.max_abs_coeff()) < 1e-10, "curl residual {yang}");
    }

    #[test]
    fn composition_is_hermitian_and_order_independent() {
        let sol = rich_seed();
        let settings = TransformSettings::default();
        for (py, pz) in [(c(0.3, 0.2), c(-0.25, 0.35)), (c(-0.4, 0.1), c(0.2, 0.3))] {
            let p = RealSlicePoint::new(py, pz);
            let bt = BacklundTransform::new(&sol, settings, Order::LeftThenRight);
            let h = bt.hermiticity_residual(p).unwrap();
            assert!(h < 1e-9, "hermiticity residual {h}");
            let cm = bt.commutativity_residual(p).unwrap();
            assert!(cm < 1e-9, "commutativity residual {cm}");
        }
    }

    #[test]
    fn potential_is_path_independent_within_the_leaf() {
        let sol = rich_seed();
        let p0 = BasePoint::slice(c(0.45, 0.2), c(-0.3, 0.25));
        let anchor = RealSlicePoint::origin();
        for leaf in [Leaf::Unbarred, Leaf::Barred] {
            let integrator = LeafIntegrator { leaf, degree: 4, quad_order: 32 };
            let straight = integrator.leaf_path(p0, anchor);
            let [u, v] = leaf.varying();
            let mut corner = straight.start();
            // an in-leaf detour: displace the varying pair only
            if let BasePoint::Independent { y, ybar, z, zbar } = &mut corner {
                let bump = c(0.4, -0.3);
                match u {
                    Variable::Y => *y += bump,
                    _ => *ybar += bump,
                }
                match v {
                    Variable::Z => *z += 0.5 * bump,
                    _ => *zbar += 0.5 * bump,
                }
            }
            let dogleg = Path::through(vec![straight.start(), corner, p0]);
            let form = |b: BasePoint, k: usize| -> Result<(Jet, Jet)> {
                let sjn = sol.eval(b, k + 1)?;
                Ok(match leaf {
                    Leaf::Unbarred => raising_increment_form(&sjn.f),
                    Leaf::Barred => lowering_increment_form(&left_updated_f_bar(&sjn)?),
                })
            };
            let a = integrator.potential_jet(&straight, form).unwrap();
            let b = integrator.potential_jet(&dogleg, form).unwrap();
            let dev = (&a - &b).max_abs_coeff();
            assert!(rel(dev, a.max_abs_coeff()) < 1e-10, "{leaf:?} two-path deviation {dev}");
        }
    }

    #[test]
    fn composition_rejects_unrestricted_input() {
        let psi_bar = vec![upper(vec![(1, 0, c(0.5, 0.2))])];
        let psi = vec![lower(vec![(1, 0, c(0.5 + 1e-3, -0.2))])];
        let sol = Solution::enlarged(
            psi_bar,
            psi,
            PolyAlgebra { minus: BivariatePoly::constant(c(2.0, 0.0)), ..Default::default() },
            PolyAlgebra { plus: BivariatePoly::constant(c(2.0, 0.0)), ..Default::default() },
        );
        let bt = BacklundTransform::new(&sol, TransformSettings::default(), Order::LeftThenRight);
        let p = RealSlicePoint::new(c(0.4, 0.3), c(0.2, -0.6));
        assert!(matches!(
            bt.arguments(p),
            Err(SdymError::NotPhysicallyRestricted { .. })
        ));
    }

    #[test]
    fn vanishing_denominator_at_target_is_a_singular_transform() {
        // chi = 0: the seed has f_minus identically zero
        let sol = Solution::full_gauge(vec![], PolyAlgebra::default());
        let bt = BacklundTransform::new(&sol, TransformSettings::default(), Order::LeftThenRight);
        let p = RealSlicePoint::new(c(0.3, 0.1), c(0.2, 0.4));
        assert!(matches!(
            bt.arguments(p),
            Err(SdymError::SingularTransform { .. })
        ));
    }

    #[test]
    fn pole_on_integration_path_is_detected() {
        // f_minus = 1 - z zbar^2 + ... vanishes between the anchor fiber and
        // the target on the barred path, so the updated-potential form has a
        // pole on the integration path
        let sol = Solution::full_gauge(
            vec![lower(vec![(0, 1, c(1.0, 0.0))]), upper(vec![(1, 0, c(1.0, 0.0))])],
            PolyAlgebra { minus: BivariatePoly::constant(c(1.0, 0.0)), ..Default::default() },
        );
        let p = RealSlicePoint::new(c(0.0, 0.0), c(2.0, 0.0));
        for order in [Order::LeftThenRight, Order::RightThenLeft] {
            let bt = BacklundTransform::new(&sol, TransformSettings::default(), order);
            match bt.arguments(p) {
                Err(SdymError::PathSingular { .. }) | Err(SdymError::SingularOnPath { .. }) => {}
                other => panic!("expected a path singularity, got {other:?}"),
            }
        }
    }
}
