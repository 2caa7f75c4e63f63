//! Charge densities of seed and transformed solutions, radial profiles and
//! total charge quadrature.
//!
//! The pointwise density is the trace combination q = tr(f_yy f_zz - f_yz f_zy)
//! of second derivatives of the unbarred potential.  Solutions produced by the
//! discrete transformations shift the density by a squared Laplacian of a
//! scalar logarithm, so transformed densities are computed from jets of scalar
//! seed data alone.  The conjugated closed forms of the transformed second
//! derivatives are implemented as well and serve as an independent route to
//! the same density.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{Result, SdymError};
use crate::jet::{BasePoint, Jet, RealSlicePoint, Variable};
use crate::lie2::{trace_product, AlgebraElement};
use crate::quadrature::gauss_legendre;
use crate::seeds::Solution;

/// Relative spread allowed between density probes at equal radius.
pub const RADIAL_SYMMETRY_TOLERANCE: f64 = 1e-10;

/// q = tr(f_yy f_zz - f_yz f_zy) as a jet of degree two less than f.
pub fn charge_density(f: &AlgebraElement) -> Jet {
    let fy = f.derivative(Variable::Y);
    let fz = f.derivative(Variable::Z);
    let fyy = fy.derivative(Variable::Y);
    let fyz = fy.derivative(Variable::Z);
    let fzy = fz.derivative(Variable::Y);
    let fzz = fz.derivative(Variable::Z);
    &trace_product(&fyy, &fzz) - &trace_product(&fyz, &fzy)
}

fn raising(j: Jet) -> AlgebraElement {
    let zero = Jet::zero(j.base(), j.degree());
    AlgebraElement::new(j, zero.clone(), zero)
}

/// Second y/z derivatives of the unbarred potential after the raising
/// transformation, conjugated back to the seed frame by the dressing factor.
///
/// Returned in the order [F_yy, F_yz, F_zy, F_zz], each of degree two less
/// than the input.  The trace combination of the four is the raised density;
/// the conjugation drops out of the trace.  The sign of the mixed-derivative
/// raising term in F_zy is fixed by requiring F_yz = F_zy whenever the input
/// satisfies the field equation.
pub fn left_transformed_second_derivatives(f: &AlgebraElement) -> Result<[AlgebraElement; 4]> {
    let d = f.plus.degree();
    assert!(d >= 2, "second derivatives need jets of degree at least 2");
    let dd = d - 2;

    let inv = match f.minus.inverse() {
        Ok(j) => j,
        Err(SdymError::DivisionBySingularValue { value }) => {
            return Err(SdymError::SingularTransform { what: "f_minus", value });
        }
        Err(e) => return Err(e),
    };

    let fy = f.derivative(Variable::Y);
    let fz = f.derivative(Variable::Z);
    let fy_t = fy.truncated(dd);
    let fz_t = fz.truncated(dd);

    let inv_t = inv.truncated(dd);
    let inv_yb = inv.derivative(Variable::YBar);
    let inv_zb = inv.derivative(Variable::ZBar);
    let inv_yb_t = inv_yb.truncated(dd);
    let inv_zb_t = inv_zb.truncated(dd);

    let xp = raising(Jet::one(f.plus.base(), dd));
    let com_y = xp.commutator(&fy_t);
    let com_z = xp.commutator(&fz_t);

    let f_yy = fy
        .derivative(Variable::Y)
        .add(&com_y.commutator(&fy_t).jet_scale(&inv_t))
        .sub(&com_y.jet_scale(&inv_zb_t).scale(2.0))
        .sub(&xp.commutator(&fy.derivative(Variable::ZBar)).jet_scale(&inv_t))
        .add(&raising(inv_zb.derivative(Variable::ZBar)));

    let f_yz = fy
        .derivative(Variable::Z)
        .add(&com_z.commutator(&fy_t).jet_scale(&inv_t))
        .add(&com_y.jet_scale(&inv_yb_t))
        .sub(&com_z.jet_scale(&inv_zb_t))
        .sub(&xp.commutator(&fz.derivative(Variable::ZBar)).jet_scale(&inv_t))
        .sub(&raising(inv_yb.derivative(Variable::ZBar)));

    let f_zy = fz
        .derivative(Variable::Y)
        .add(&com_y.commutator(&fz_t).jet_scale(&inv_t))
        .sub(&com_z.jet_scale(&inv_zb_t))
        .add(&com_y.jet_scale(&inv_yb_t))
        .add(&xp.commutator(&fy.derivative(Variable::YBar)).jet_scale(&inv_t))
        .sub(&raising(inv_yb.derivative(Variable::ZBar)));

    let f_zz = fz
        .derivative(Variable::Z)
        .add(&com_z.commutator(&fz_t).jet_scale(&inv_t))
        .add(&com_z.jet_scale(&inv_yb_t).scale(2.0))
        .add(&xp.commutator(&fz.derivative(Variable::YBar)).jet_scale(&inv_t))
        .add(&raising(inv_yb.derivative(Variable::YBar)));

    Ok([f_yy, f_yz, f_zy, f_zz])
}

/// Raised density as a jet, assembled from the conjugated second derivatives.
pub fn left_density_trace(f: &AlgebraElement) -> Result<Jet> {
    let [fyy, fyz, fzy, fzz] = left_transformed_second_derivatives(f)?;
    Ok(&trace_product(&fyy, &fzz) - &trace_product(&fyz, &fzy))
}

/// The squared Laplacian (d_y d_ybar + d_z d_zbar)^2 of ln u at the base
/// point; u must carry a jet of degree at least four.
pub fn box_box_ln(u: &Jet) -> Result<Complex64> {
    let l = u.ln()?;
    let yy = l.extract_derivative([2, 2, 0, 0])?;
    let yz = l.extract_derivative([1, 1, 1, 1])?;
    let zz = l.extract_derivative([0, 0, 2, 2])?;
    Ok(yy + 2.0 * yz + zz)
}

/// Density of the seed itself.  Factor-product seeds split into a barred and
/// an unbarred triangular half, so their unbarred potential depends on y and z
/// only through the completion and the density vanishes identically; the
/// reduced seeds store scalar data of exactly such a product and are assigned
/// zero directly.
pub fn initial_density(sol: &Solution, p: RealSlicePoint) -> Result<Complex64> {
    if sol.is_full_gauge() {
        let sj = sol.eval(BasePoint::RealSlice(p), 2)?;
        Ok(charge_density(&sj.f).value())
    } else {
        Ok(Complex64::default())
    }
}

/// Density after the raising transformation: the initial density plus the
/// squared Laplacian of ln f_minus.
pub fn left_density(sol: &Solution, p: RealSlicePoint) -> Result<Complex64> {
    let q0 = initial_density(sol, p)?;
    let cd = sol.charge_data(BasePoint::RealSlice(p), 4)?;
    Ok(q0 + box_box_ln(&cd.f_minus)?)
}

/// Density after the composed transformation: the initial density plus the
/// squared Laplacian of ln(f_minus conj(f_minus) - exp(-2 tau)).
pub fn backlund_density(sol: &Solution, p: RealSlicePoint) -> Result<Complex64> {
    let q0 = initial_density(sol, p)?;
    let arg = sol.backlund_density_argument(p, 4)?;
    Ok(q0 + box_box_ln(&arg)?)
}

/// The raised density evaluated along two independent routes.
#[derive(Debug, Clone, Copy)]
pub struct LeftDensityCheck {
    /// Trace combination of the conjugated transformed second derivatives.
    pub from_second_derivatives: Complex64,
    /// Initial density plus the squared Laplacian of ln f_minus.
    pub from_log_identity: Complex64,
}

impl LeftDensityCheck {
    pub fn difference(&self) -> f64 {
        (self.from_second_derivatives - self.from_log_identity).norm()
    }
}

/// Evaluates the raised density both ways at one point; full gauge seeds only.
pub fn left_density_check(sol: &Solution, p: RealSlicePoint) -> Result<LeftDensityCheck> {
    let sj = sol.eval(BasePoint::RealSlice(p), 4)?;
    let from_second_derivatives = left_density_trace(&sj.f)?.value();
    let q0 = charge_density(&sj.f).value();
    let from_log_identity = q0 + box_box_ln(&sj.f.minus)?;
    Ok(LeftDensityCheck { from_second_derivatives, from_log_identity })
}

/// Which solution of the transformation chain a density refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityKind {
    Initial,
    Left,
    Backlund,
}

/// One pointwise density evaluation.
#[derive(Debug, Clone, Copy)]
pub struct DensitySample {
    pub point: RealSlicePoint,
    pub kind: DensityKind,
    pub q: Complex64,
}

pub fn density_sample(sol: &Solution, p: RealSlicePoint, kind: DensityKind) -> Result<DensitySample> {
    let q = match kind {
        DensityKind::Initial => initial_density(sol, p)?,
        DensityKind::Left => left_density(sol, p)?,
        DensityKind::Backlund => backlund_density(sol, p)?,
    };
    Ok(DensitySample { point: p, kind, q })
}

fn probe_directions() -> [(Complex64, Complex64); 4] {
    let s = 0.5f64.sqrt();
    [
        (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
        (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)),
        (Complex64::new(s, 0.0), Complex64::new(0.0, s)),
        (Complex64::from_polar(0.6, 0.5), Complex64::from_polar(0.8, -0.3)),
    ]
}

/// Compares densities over several directions of equal radius and rejects
/// seeds whose profile is not a function of the radius alone.
pub fn check_radial_symmetry(sol: &Solution) -> Result<()> {
    for &r in &[0.7, 1.9] {
        let mut probes = Vec::new();
        for (u, v) in probe_directions() {
            let p = RealSlicePoint::new(u * r, v * r);
            probes.push((initial_density(sol, p)?, backlund_density(sol, p)?));
        }
        let (qi0, qb0) = probes[0];
        let mut spread = 0.0f64;
        for &(qi, qb) in &probes[1..] {
            spread = spread.max((qi - qi0).norm()).max((qb - qb0).norm());
        }
        if spread > RADIAL_SYMMETRY_TOLERANCE * (1.0 + qi0.norm().max(qb0.norm())) {
            return Err(SdymError::NotRadiallySymmetric { r, spread });
        }
    }
    Ok(())
}

/// Initial and composed densities sampled on a radial grid.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    pub radii: Vec<f64>,
    pub initial: Vec<f64>,
    pub backlund: Vec<f64>,
    /// Largest imaginary part encountered; the densities are real on the
    /// physical slice, so this is a numerical health indicator.
    pub max_imag: f64,
}

impl RadialProfile {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,q_initial,q_backlund\n");
        for i in 0..self.radii.len() {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e}\n",
                self.radii[i], self.initial[i], self.backlund[i]
            ));
        }
        out
    }
}

/// Samples both densities at the given radii, after probing that the seed is
/// radially symmetric.
pub fn radial_profile(sol: &Solution, radii: &[f64]) -> Result<RadialProfile> {
    if radii.is_empty() {
        return Err(SdymError::Config("radius list must not be empty".into()));
    }
    let mut prev = 0.0;
    for &r in radii {
        if !r.is_finite() || r <= prev {
            return Err(SdymError::Config(
                "radii must be finite, positive and strictly increasing".into(),
            ));
        }
        prev = r;
    }
    check_radial_symmetry(sol)?;
    let rows = radii
        .par_iter()
        .map(|&r| -> Result<(f64, f64, f64)> {
            let p = RealSlicePoint::new(Complex64::new(r, 0.0), Complex64::default());
            let qi = initial_density(sol, p)?;
            let qb = backlund_density(sol, p)?;
            Ok((qi.re, qb.re, qi.im.abs().max(qb.im.abs())))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut profile = RadialProfile {
        radii: radii.to_vec(),
        initial: Vec::with_capacity(rows.len()),
        backlund: Vec::with_capacity(rows.len()),
        max_imag: 0.0,
    };
    for (qi, qb, im) in rows {
        profile.initial.push(qi);
        profile.backlund.push(qb);
        profile.max_imag = profile.max_imag.max(im);
    }
    Ok(profile)
}

/// Controls for the dyadic-window radial quadrature.
#[derive(Debug, Clone, Copy)]
pub struct RadialSettings {
    pub quad_order: usize,
    pub max_windows: usize,
    /// Stop once a window contributes less than this, relative to the total.
    pub rel_tol: f64,
}

impl Default for RadialSettings {
    fn default() -> Self {
        RadialSettings { quad_order: 32, max_windows: 48, rel_tol: 1e-12 }
    }
}

/// A total charge value together with an a-posteriori error estimate.
#[derive(Debug, Clone, Copy)]
pub struct TotalCharge {
    pub value: f64,
    pub error_estimate: f64,
}

/// Integrates the composed density over all of four-space assuming radial
/// symmetry: 2 pi^2 times the integral of q(r) r^3 over doubling windows,
/// stopping when a window stops contributing and estimating the remaining
/// tail geometrically.
pub fn total_charge_radial(sol: &Solution) -> Result<TotalCharge> {
    total_charge_radial_with(sol, RadialSettings::default())
}

pub fn total_charge_radial_with(sol: &Solution, settings: RadialSettings) -> Result<TotalCharge> {
    check_radial_symmetry(sol)?;
    let rule = gauss_legendre(settings.quad_order);
    let window = |a: f64, b: f64| -> Result<f64> {
        let mut s = 0.0;
        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
            let r = a + (b - a) * t;
            let p = RealSlicePoint::new(Complex64::new(r, 0.0), Complex64::default());
            s += w * backlund_density(sol, p)?.re * r * r * r;
        }
        Ok((b - a) * s)
    };

    let mut acc = window(0.0, 1.0)?;
    let mut lo = 1.0;
    let mut prev = f64::NAN;
    let mut last = f64::NAN;
    let mut converged = false;
    for _ in 0..settings.max_windows {
        let w = window(lo, 2.0 * lo)?;
        acc += w;
        prev = last;
        last = w;
        lo *= 2.0;
        if w.abs() <= settings.rel_tol * (1.0 + acc.abs()) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(SdymError::TailNotConverged { last });
    }
    let rho = if prev.is_finite() && prev != 0.0 { (last / prev).abs() } else { 0.0 };
    let tail = if rho > 0.0 && rho < 1.0 { last.abs() * rho / (1.0 - rho) } else { last.abs() };
    let norm = 2.0 * PI * PI;
    Ok(TotalCharge { value: norm * acc, error_estimate: norm * (last.abs() + tail) })
}

/// Integrates the composed density over the box [-l, l]^4 in the four real
/// coordinates with a tensor Gauss rule, quad_order nodes per axis split into
/// two panels meeting at the origin so that nodes concentrate where localized
/// densities live; no symmetry assumption.  The error estimate covers the
/// truncated exterior, assuming the density falls off at least as fast as
/// r^-8 beyond the box, as it does for rational seeds.
pub fn total_charge_grid(sol: &Solution, half_width: f64, quad_order: usize) -> Result<TotalCharge> {
    if !(half_width > 0.0) {
        return Err(SdymError::Config("grid half width must be positive".into()));
    }
    let rule = gauss_legendre((quad_order / 2).max(2));
    let l = half_width;
    let mut xs = Vec::with_capacity(2 * rule.nodes.len());
    let mut ws = Vec::with_capacity(2 * rule.nodes.len());
    for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
        xs.push(l * (t - 1.0));
        ws.push(l * w);
    }
    for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
        xs.push(l * t);
        ws.push(l * w);
    }
    let n = xs.len();
    let slices = (0..n)
        .into_par_iter()
        .map(|i0| -> Result<f64> {
            let mut s = 0.0;
            for i1 in 0..n {
                for i2 in 0..n {
                    for i3 in 0..n {
                        let p = RealSlicePoint::new(
                            Complex64::new(xs[i0], xs[i1]),
                            Complex64::new(xs[i2], xs[i3]),
                        );
                        s += ws[i1] * ws[i2] * ws[i3] * backlund_density(sol, p)?.re;
                    }
                }
            }
            Ok(ws[i0] * s)
        })
        .collect::<Result<Vec<f64>>>()?;
    let value: f64 = slices.iter().sum();

    let mut q_edge = 0.0f64;
    for (u, v) in probe_directions() {
        let p = RealSlicePoint::new(u * l, v * l);
        q_edge = q_edge.max(backlund_density(sol, p)?.norm());
    }
    let error_estimate = 2.0 * PI * PI * q_edge * l.powi(4) / 4.0;
    Ok(TotalCharge { value, error_estimate })
}
