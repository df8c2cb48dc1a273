//! Globally adaptive 21-point Gauss-Kronrod quadrature on a finite interval.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Tolerances for adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of subintervals kept by the adaptive scheme.
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_subdivisions: 4000,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) || self.max_subdivisions == 0 {
            return Err(Error::Config(format!("invalid quadrature tolerances {self:?}")));
        }
        Ok(())
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_err: f64,
    pub subdivisions: usize,
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_725,
    0.054_755_896_574_351_995,
    0.075_039_674_810_919_96,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_84,
    0.134_709_217_311_473_34,
    0.142_775_938_577_060_09,
    0.147_739_104_901_338_49,
    0.149_445_554_002_916_9,
];

// Gauss weights for the nodes XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

/// One GK21 panel on `[a, b]`: `(estimate, error estimate)`.
pub fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = WGK[10] * fc;
    let mut resg = 0.0;
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * resk;
    let mut resasc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let hh = h.abs();
    let result = resk * h;
    resabs *= hh;
    resasc *= hh;
    let mut err = ((resk - resg) * h).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (result, err)
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Integrate `f` over `[points[0], points[last]]`, starting from the panels
/// delimited by `points` (strictly increasing, at least two entries).
///
/// Bisects the worst panel until the total error estimate falls below
/// `tolerance(current_value)`.
pub fn integrate_adaptive<F, T>(mut f: F, points: &[f64], tolerance: T, max_subdivisions: usize) -> Result<Integral>
where
    F: FnMut(f64) -> f64,
    T: Fn(f64) -> f64,
{
    if points.len() < 2 || points.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config("integration breakpoints must be strictly increasing".into()));
    }
    let mut heap = BinaryHeap::with_capacity(max_subdivisions.max(points.len()) + 1);
    let (mut total, mut total_err) = (0.0, 0.0);
    for w in points.windows(2) {
        let (v, e) = gk21(&mut f, w[0], w[1]);
        total += v;
        total_err += e;
        heap.push(Panel { a: w[0], b: w[1], value: v, err: e });
    }
    loop {
        if !total.is_finite() || !total_err.is_finite() {
            return Err(Error::Quadrature {
                estimate: total,
                residual: total_err,
                subdivisions: heap.len(),
            });
        }
        if total_err <= tolerance(total) {
            return Ok(Integral {
                value: total,
                abs_err: total_err,
                subdivisions: heap.len(),
            });
        }
        if heap.len() >= max_subdivisions {
            break;
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // cannot split further in floating point
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk21(&mut f, worst.a, mid);
        let (v2, e2) = gk21(&mut f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        heap.push(Panel { a: worst.a, b: mid, value: v1, err: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, err: e2 });
    }
    // Re-sum from scratch to shed accumulated update roundoff before giving up.
    let value: f64 = heap.iter().map(|p| p.value).sum();
    let err: f64 = heap.iter().map(|p| p.err).sum();
    if err <= tolerance(value) {
        return Ok(Integral {
            value,
            abs_err: err,
            subdivisions: heap.len(),
        });
    }
    Err(Error::Quadrature {
        estimate: value,
        residual: err,
        subdivisions: heap.len(),
    })
}

/// Integrate `f` over `[a, b]` with `spec`'s mixed absolute/relative tolerance.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Integral> {
    integrate_adaptive(
        f,
        &[a, b],
        |v| spec.abs_tol.max(spec.rel_tol * v.abs()),
        spec.max_subdivisions,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kronrod_weights_integrate_constants() {
        let s: f64 = 2.0 * WGK[..10].iter().sum::<f64>() + WGK[10];
        assert_relative_eq!(s, 2.0, epsilon = 1e-15);
        let g: f64 = 2.0 * WG.iter().sum::<f64>();
        assert_relative_eq!(g, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn single_panel_is_exact_for_low_degree_polynomials() {
        // Kronrod rule is exact to degree 31, Gauss part to degree 19.
        let (v, _) = gk21(&mut |x: f64| x.powi(30) + 3.0 * x.powi(7), -1.0, 1.0);
        assert_relative_eq!(v, 2.0 / 31.0, max_relative = 1e-13);
    }

    #[test]
    fn smooth_and_peaked_integrands() {
        let spec = QuadratureSpec::default();
        let r = integrate(|x: f64| x.sin(), 0.0, std::f64::consts::PI, &spec).unwrap();
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-12);
        // narrow peak: integral of 1/(x^2 + e^2) over [-1,1] = 2 atan(1/e)/e
        let e: f64 = 1e-4;
        let r = integrate(|x: f64| 1.0 / (x * x + e * e), -1.0, 1.0, &spec).unwrap();
        assert_relative_eq!(r.value, 2.0 * (1.0 / e).atan() / e, max_relative = 1e-8);
        // integrable endpoint singularity
        let r = integrate(|x: f64| x.sqrt().recip(), 0.0, 1.0, &spec).unwrap();
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-7);
    }

    #[test]
    fn breakpoints_are_honoured() {
        let r = integrate_adaptive(|x: f64| x.abs(), &[-1.0, 0.0, 2.0], |_| 1e-13, 10).unwrap();
        assert_relative_eq!(r.value, 2.5, max_relative = 1e-14);
        assert_eq!(r.subdivisions, 2);
    }

    #[test]
    fn reports_non_convergence() {
        let spec = QuadratureSpec {
            max_subdivisions: 3,
            ..QuadratureSpec::default()
        };
        let err = integrate(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, &spec).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
        assert!(integrate_adaptive(|x| x, &[1.0, 0.0], |_| 1.0, 10).is_err());
    }
}
