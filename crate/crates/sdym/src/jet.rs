//! Truncated multivariate Taylor arithmetic (jets) in the four complex
//! coordinates y, ybar, z, zbar.
//!
//! The four coordinates are treated as independent complex variables; the
//! "real slice" ybar = conj(y), zbar = conj(z) is a distinguished family of
//! base points on which conjugation symmetries act.  A jet stores the scaled
//! coefficients c_kappa = (d^kappa f) / kappa! for all multi-indices with
//! |kappa| <= degree, densely over the simplex in graded-lexicographic order.

use std::collections::HashMap;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;

use crate::error::{Result, SdymError};

/// Values smaller than this in modulus are treated as zero when they appear
/// in a denominator or under a logarithm.
pub const SINGULAR_THRESHOLD: f64 = 1e-12;

/// Hard cap on truncation degree; coefficient counts grow like degree^4 / 24.
pub const MAX_DEGREE: usize = 16;

/// Tolerance for deciding whether a base point lies on the real slice.
const SLICE_TOLERANCE: f64 = 1e-14;

/// The four independent coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variable {
    Y,
    YBar,
    Z,
    ZBar,
}

impl Variable {
    pub const ALL: [Variable; 4] = [Variable::Y, Variable::YBar, Variable::Z, Variable::ZBar];

    pub fn index(self) -> usize {
        match self {
            Variable::Y => 0,
            Variable::YBar => 1,
            Variable::Z => 2,
            Variable::ZBar => 3,
        }
    }

    /// Partner under the conjugation that swaps barred and unbarred variables.
    pub fn conj_partner(self) -> Variable {
        match self {
            Variable::Y => Variable::YBar,
            Variable::YBar => Variable::Y,
            Variable::Z => Variable::ZBar,
            Variable::ZBar => Variable::Z,
        }
    }
}

/// A point of the real slice, determined by the values of y and z alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealSlicePoint {
    pub y: Complex64,
    pub z: Complex64,
}

impl RealSlicePoint {
    pub fn new(y: Complex64, z: Complex64) -> Self {
        RealSlicePoint { y, z }
    }

    pub fn origin() -> Self {
        RealSlicePoint { y: Complex64::new(0.0, 0.0), z: Complex64::new(0.0, 0.0) }
    }

    /// Euclidean radius of the corresponding point of R^4.
    pub fn radius(&self) -> f64 {
        (self.y.norm_sqr() + self.z.norm_sqr()).sqrt()
    }
}

/// Expansion point of a jet: either on the real slice or a general 4-tuple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BasePoint {
    RealSlice(RealSlicePoint),
    Independent { y: Complex64, ybar: Complex64, z: Complex64, zbar: Complex64 },
}

impl BasePoint {
    pub fn slice(y: Complex64, z: Complex64) -> Self {
        BasePoint::RealSlice(RealSlicePoint { y, z })
    }

    pub fn origin() -> Self {
        BasePoint::RealSlice(RealSlicePoint::origin())
    }

    pub fn coordinate(&self, v: Variable) -> Complex64 {
        match *self {
            BasePoint::RealSlice(p) => match v {
                Variable::Y => p.y,
                Variable::YBar => p.y.conj(),
                Variable::Z => p.z,
                Variable::ZBar => p.z.conj(),
            },
            BasePoint::Independent { y, ybar, z, zbar } => match v {
                Variable::Y => y,
                Variable::YBar => ybar,
                Variable::Z => z,
                Variable::ZBar => zbar,
            },
        }
    }

    /// True when ybar and zbar are the conjugates of y and z.
    pub fn on_real_slice(&self) -> bool {
        match *self {
            BasePoint::RealSlice(_) => true,
            BasePoint::Independent { y, ybar, z, zbar } => {
                (ybar - y.conj()).norm() <= SLICE_TOLERANCE
                    && (zbar - z.conj()).norm() <= SLICE_TOLERANCE
            }
        }
    }

    pub fn as_slice_point(&self) -> Result<RealSlicePoint> {
        match *self {
            BasePoint::RealSlice(p) => Ok(p),
            BasePoint::Independent { y, z, .. } if self.on_real_slice() => {
                Ok(RealSlicePoint { y, z })
            }
            _ => Err(SdymError::BaseOffRealSlice),
        }
    }
}

impl From<RealSlicePoint> for BasePoint {
    fn from(p: RealSlicePoint) -> Self {
        BasePoint::RealSlice(p)
    }
}

/// Shared per-degree enumeration of the multi-index simplex.
struct IndexTable {
    degree: usize,
    /// Multi-indices in graded-lexicographic order.  For d' < d the table of
    /// degree d' is a prefix of this one.
    indices: Vec<[u8; 4]>,
    /// Flat rank lookup over the (degree+1)^4 cube; u32::MAX marks indices
    /// outside the simplex.
    rank: Vec<u32>,
    /// count_through[t] = number of multi-indices with total degree <= t.
    count_through: Vec<usize>,
}

impl IndexTable {
    fn build(degree: usize) -> IndexTable {
        let side = degree + 1;
        let mut indices = Vec::new();
        let mut count_through = Vec::with_capacity(side);
        for total in 0..=degree {
            for a in 0..=total {
                for b in 0..=(total - a) {
                    for c in 0..=(total - a - b) {
                        let d = total - a - b - c;
                        indices.push([a as u8, b as u8, c as u8, d as u8]);
                    }
                }
            }
            count_through.push(indices.len());
        }
        let mut rank = vec![u32::MAX; side * side * side * side];
        for (i, kappa) in indices.iter().enumerate() {
            rank[Self::flat(kappa, side)] = i as u32;
        }
        IndexTable { degree, indices, rank, count_through }
    }

    fn flat(kappa: &[u8; 4], side: usize) -> usize {
        (((kappa[0] as usize * side + kappa[1] as usize) * side + kappa[2] as usize) * side)
            + kappa[3] as usize
    }

    fn rank_of(&self, kappa: &[u8; 4]) -> usize {
        self.rank[Self::flat(kappa, self.degree + 1)] as usize
    }

    fn len(&self) -> usize {
        self.indices.len()
    }
}

fn table(degree: usize) -> Arc<IndexTable> {
    static TABLES: OnceLock<RwLock<HashMap<usize, Arc<IndexTable>>>> = OnceLock::new();
    let lock = TABLES.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(t) = lock.read().unwrap().get(&degree) {
        return Arc::clone(t);
    }
    let built = Arc::new(IndexTable::build(degree));
    let mut map = lock.write().unwrap();
    Arc::clone(map.entry(degree).or_insert(built))
}

fn factorial(n: u8) -> f64 {
    (1..=n as u64).product::<u64>() as f64
}

/// Truncated Taylor expansion of a complex-valued function of (y, ybar, z, zbar).
#[derive(Debug, Clone)]
pub struct Jet {
    base: BasePoint,
    degree: usize,
    coeffs: Vec<Complex64>,
}

impl Jet {
    fn check_degree(degree: usize) {
        assert!(degree <= MAX_DEGREE, "jet degree {degree} exceeds maximum {MAX_DEGREE}");
    }

    /// Jet of a constant function.
    pub fn constant(value: Complex64, base: BasePoint, degree: usize) -> Jet {
        Self::check_degree(degree);
        let mut coeffs = vec![Complex64::default(); table(degree).len()];
        coeffs[0] = value;
        Jet { base, degree, coeffs }
    }

    pub fn zero(base: BasePoint, degree: usize) -> Jet {
        Self::constant(Complex64::default(), base, degree)
    }

    pub fn one(base: BasePoint, degree: usize) -> Jet {
        Self::constant(Complex64::new(1.0, 0.0), base, degree)
    }

    /// Jet of the coordinate function v.
    pub fn variable(v: Variable, base: BasePoint, degree: usize) -> Jet {
        Self::check_degree(degree);
        let t = table(degree);
        let mut coeffs = vec![Complex64::default(); t.len()];
        coeffs[0] = base.coordinate(v);
        if degree >= 1 {
            let mut kappa = [0u8; 4];
            kappa[v.index()] = 1;
            coeffs[t.rank_of(&kappa)] = Complex64::new(1.0, 0.0);
        }
        Jet { base, degree, coeffs }
    }

    /// Builds a jet directly from scaled coefficients in graded-lex order.
    pub fn from_coeffs(base: BasePoint, degree: usize, coeffs: Vec<Complex64>) -> Jet {
        Self::check_degree(degree);
        assert_eq!(coeffs.len(), table(degree).len(), "coefficient count mismatch");
        Jet { base, degree, coeffs }
    }

    pub fn base(&self) -> BasePoint {
        self.base
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Value of the function at the base point.
    pub fn value(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Scaled coefficients c_kappa = d^kappa f / kappa! in graded-lex order.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Multi-indices addressing `coeffs`, in the same order.
    pub fn multi_indices(&self) -> Vec<[u8; 4]> {
        table(self.degree).indices.clone()
    }

    /// The unscaled partial derivative d^kappa f at the base point.
    pub fn extract_derivative(&self, kappa: [u8; 4]) -> Result<Complex64> {
        let total = kappa.iter().map(|&k| k as usize).sum::<usize>();
        if total > self.degree {
            return Err(SdymError::OrderTooHigh { requested: total, degree: self.degree });
        }
        let t = table(self.degree);
        let scale: f64 = kappa.iter().map(|&k| factorial(k)).product();
        Ok(self.coeffs[t.rank_of(&kappa)] * scale)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn assert_compatible(&self, other: &Jet) {
        assert_eq!(self.degree, other.degree, "jet degree mismatch");
        assert_eq!(self.base, other.base, "jet base point mismatch");
    }

    pub fn scale(&self, s: impl Into<Complex64>) -> Jet {
        let s = s.into();
        let coeffs = self.coeffs.iter().map(|c| c * s).collect();
        Jet { base: self.base, degree: self.degree, coeffs }
    }

    pub fn add_scalar(&self, s: Complex64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += s;
        out
    }

    /// Drops all coefficients above `new_degree`.
    pub fn truncated(&self, new_degree: usize) -> Jet {
        assert!(new_degree <= self.degree, "cannot truncate upward");
        let n = table(new_degree).len();
        Jet { base: self.base, degree: new_degree, coeffs: self.coeffs[..n].to_vec() }
    }

    /// Partial derivative with respect to v; the result is one degree shorter.
    pub fn derivative(&self, v: Variable) -> Jet {
        assert!(self.degree >= 1, "cannot differentiate a degree-0 jet");
        let lo = table(self.degree - 1);
        let hi = table(self.degree);
        let mut coeffs = vec![Complex64::default(); lo.len()];
        for (i, kappa) in lo.indices.iter().enumerate() {
            let mut src = *kappa;
            src[v.index()] += 1;
            coeffs[i] = self.coeffs[hi.rank_of(&src)] * (kappa[v.index()] + 1) as f64;
        }
        Jet { base: self.base, degree: self.degree - 1, coeffs }
    }

    /// The jet minus its value, divided by nothing: the nilpotent part.
    fn fractional(&self) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] = Complex64::default();
        out
    }

    /// Multiplicative inverse; the value must be nonsingular.
    pub fn inverse(&self) -> Result<Jet> {
        let v0 = self.value();
        if v0.norm() <= SINGULAR_THRESHOLD {
            return Err(SdymError::DivisionBySingularValue { value: v0.norm() });
        }
        // 1 / (v0 (1 + w)) = (1/v0) * sum_k (-w)^k, nilpotency cuts the sum.
        let w = self.fractional().scale(1.0 / v0);
        let one = Jet::one(self.base, self.degree);
        let mut acc = one.clone();
        for _ in 0..self.degree {
            acc = &one - &(&w * &acc);
        }
        Ok(acc.scale(1.0 / v0))
    }

    pub fn div(&self, other: &Jet) -> Result<Jet> {
        self.assert_compatible(other);
        Ok(self * &other.inverse()?)
    }

    /// exp of the jet.
    pub fn exp(&self) -> Jet {
        let v0 = self.value();
        let tilde = self.fractional();
        let one = Jet::one(self.base, self.degree);
        let mut acc = one.clone();
        for k in (1..=self.degree).rev() {
            acc = &one + &(&tilde * &acc).scale(1.0 / k as f64);
        }
        acc.scale(v0.exp())
    }

    /// Principal branch logarithm; the value must be nonsingular.
    pub fn ln(&self) -> Result<Jet> {
        let v0 = self.value();
        if v0.norm() <= SINGULAR_THRESHOLD {
            return Err(SdymError::LogOfZero { value: v0.norm() });
        }
        let w = self.fractional().scale(1.0 / v0);
        if self.degree == 0 {
            return Ok(Jet::constant(v0.ln(), self.base, self.degree));
        }
        // ln(1 + w) = w * sum_{j>=0} (-w)^j / (j+1)
        let mut acc = Jet::constant(
            Complex64::new(1.0 / self.degree as f64, 0.0),
            self.base,
            self.degree,
        );
        for j in (0..self.degree - 1).rev() {
            let lead = Jet::constant(Complex64::new(1.0 / (j + 1) as f64, 0.0), self.base, self.degree);
            acc = &lead - &(&w * &acc);
        }
        Ok((&w * &acc).add_scalar(v0.ln()))
    }

    /// Integer power by repeated multiplication.
    pub fn powi(&self, n: usize) -> Jet {
        let mut acc = Jet::one(self.base, self.degree);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Line integral along rays in the `pair` directions: every monomial
    /// gains one power of `v` and is scaled by 1/(k+1), where k is its total
    /// power in `pair`.  Summing this over the two components of a one-form
    /// that is closed where only `pair` varies yields the local potential,
    /// normalized to vanish at zero `pair` displacement.  Coefficients at the
    /// top degree have no slot to shift into and are dropped.
    pub fn ray_integral(&self, v: Variable, pair: [Variable; 2]) -> Jet {
        debug_assert!(pair.contains(&v), "shift variable must belong to the pair");
        let t = table(self.degree);
        let mut coeffs = vec![Complex64::default(); t.len()];
        for (i, kappa) in t.indices.iter().enumerate() {
            let c = self.coeffs[i];
            if c == Complex64::default() {
                continue;
            }
            let total: usize = kappa.iter().map(|&k| k as usize).sum();
            if total >= self.degree {
                continue;
            }
            let k = kappa[pair[0].index()] + kappa[pair[1].index()];
            let mut shifted = *kappa;
            shifted[v.index()] += 1;
            coeffs[t.rank_of(&shifted)] += c / (k as f64 + 1.0);
        }
        Jet { base: self.base, degree: self.degree, coeffs }
    }

    /// Image under the antiholomorphic involution that conjugates values and
    /// swaps barred with unbarred variables.  Defined only on the real slice,
    /// where the swapped base point coincides with the original one.
    pub fn conj_swap(&self) -> Result<Jet> {
        if !self.base.on_real_slice() {
            return Err(SdymError::BaseOffRealSlice);
        }
        Ok(self.mirror_conjugate())
    }

    /// The same involution at an arbitrary base: the jet of
    /// p -> conj(self(sigma p)), where sigma sends each coordinate to the
    /// conjugate of its partner.  The result is anchored at sigma(base).
    pub fn mirror_conjugate(&self) -> Jet {
        let mirrored = match self.base {
            BasePoint::RealSlice(p) => BasePoint::RealSlice(p),
            BasePoint::Independent { y, ybar, z, zbar } => BasePoint::Independent {
                y: ybar.conj(),
                ybar: y.conj(),
                z: zbar.conj(),
                zbar: z.conj(),
            },
        };
        let t = table(self.degree);
        let mut coeffs = vec![Complex64::default(); t.len()];
        for (i, kappa) in t.indices.iter().enumerate() {
            let swapped = [kappa[1], kappa[0], kappa[3], kappa[2]];
            coeffs[t.rank_of(&swapped)] = self.coeffs[i].conj();
        }
        Jet { base: mirrored, degree: self.degree, coeffs }
    }

    /// Evaluates the truncated polynomial at an offset from the base point.
    /// Exact for jets of polynomials of total degree <= self.degree.
    pub fn eval_offset(&self, dy: Complex64, dybar: Complex64, dz: Complex64, dzbar: Complex64) -> Complex64 {
        let t = table(self.degree);
        let mut sum = Complex64::default();
        for (i, kappa) in t.indices.iter().enumerate() {
            let mut term = self.coeffs[i];
            for _ in 0..kappa[0] {
                term *= dy;
            }
            for _ in 0..kappa[1] {
                term *= dybar;
            }
            for _ in 0..kappa[2] {
                term *= dz;
            }
            for _ in 0..kappa[3] {
                term *= dzbar;
            }
            sum += term;
        }
        sum
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.assert_compatible(rhs);
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect();
        Jet { base: self.base, degree: self.degree, coeffs }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.assert_compatible(rhs);
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect();
        Jet { base: self.base, degree: self.degree, coeffs }
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.assert_compatible(rhs);
        let t = table(self.degree);
        let mut coeffs = vec![Complex64::default(); t.len()];
        for (i, ki) in t.indices.iter().enumerate() {
            let a = self.coeffs[i];
            if a == Complex64::default() {
                continue;
            }
            let ti = ki.iter().map(|&k| k as usize).sum::<usize>();
            let jmax = t.count_through[self.degree - ti];
            for j in 0..jmax {
                let kj = &t.indices[j];
                let sum = [ki[0] + kj[0], ki[1] + kj[1], ki[2] + kj[2], ki[3] + kj[3]];
                coeffs[t.rank_of(&sum)] += a * rhs.coeffs[j];
            }
        }
        Jet { base: self.base, degree: self.degree, coeffs }
    }
}
