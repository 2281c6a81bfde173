//! Adaptive Simpson quadrature for complex-valued integrands and fixed
//! composite rules.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Adaptive composite Simpson rule with an absolute tolerance applied
/// separately to the real and imaginary parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveSimpson {
    pub abs_tol: f64,
    /// Number of equal panels the interval is split into before adapting.
    pub initial_panels: usize,
    pub max_depth: u32,
}

impl Default for AdaptiveSimpson {
    fn default() -> Self {
        Self { abs_tol: 1e-9, initial_panels: 16, max_depth: 40 }
    }
}

/// Value of an integral plus the number of integrand evaluations spent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: Complex64,
    pub evaluations: usize,
}

struct Panel {
    a: f64,
    b: f64,
    fa: Complex64,
    fm: Complex64,
    fb: Complex64,
    whole: Complex64,
}

fn simpson(a: f64, b: f64, fa: Complex64, fm: Complex64, fb: Complex64) -> Complex64 {
    (fa + 4.0 * fm + fb) * ((b - a) / 6.0)
}

fn worst(d: Complex64) -> f64 {
    d.re.abs().max(d.im.abs())
}

impl AdaptiveSimpson {
    pub fn with_tolerance(abs_tol: f64) -> Self {
        Self { abs_tol, ..Self::default() }
    }

    pub fn integrate<F>(&self, f: F, a: f64, b: f64) -> Result<Quadrature>
    where
        F: Fn(f64) -> Complex64,
    {
        if !(a.is_finite() && b.is_finite()) || b < a {
            return Err(Error::Contract(format!("invalid integration interval [{a}, {b}]")));
        }
        if a == b {
            return Ok(Quadrature { value: Complex64::new(0.0, 0.0), evaluations: 0 });
        }
        let panels = self.initial_panels.max(1);
        let h = (b - a) / panels as f64;
        let tol = self.abs_tol / panels as f64;
        let mut evaluations = 1;
        let mut total = Complex64::new(0.0, 0.0);
        let mut fa = f(a);
        for p in 0..panels {
            let pa = a + p as f64 * h;
            let pb = if p + 1 == panels { b } else { a + (p + 1) as f64 * h };
            let fm = f(0.5 * (pa + pb));
            let fb = f(pb);
            evaluations += 2;
            let panel = Panel { a: pa, b: pb, fa, fm, fb, whole: simpson(pa, pb, fa, fm, fb) };
            total += self.refine(&f, panel, tol, 0, &mut evaluations)?;
            fa = fb;
        }
        Ok(Quadrature { value: total, evaluations })
    }

    fn refine<F>(&self, f: &F, p: Panel, tol: f64, depth: u32, evals: &mut usize) -> Result<Complex64>
    where
        F: Fn(f64) -> Complex64,
    {
        let m = 0.5 * (p.a + p.b);
        let flm = f(0.5 * (p.a + m));
        let frm = f(0.5 * (m + p.b));
        *evals += 2;
        let left = simpson(p.a, m, p.fa, flm, p.fm);
        let right = simpson(m, p.b, p.fm, frm, p.fb);
        let delta = left + right - p.whole;
        if worst(delta) <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        if depth >= self.max_depth || m <= p.a || m >= p.b {
            return Err(Error::Numeric(format!(
                "adaptive Simpson did not converge on [{}, {}] after {depth} refinements \
                 (error estimate {:.3e}, tolerance {:.3e}, {} evaluations)",
                p.a,
                p.b,
                worst(delta) / 15.0,
                tol,
                evals
            )));
        }
        let l = Panel { a: p.a, b: m, fa: p.fa, fm: flm, fb: p.fm, whole: left };
        let r = Panel { a: m, b: p.b, fa: p.fm, fm: frm, fb: p.fb, whole: right };
        Ok(self.refine(f, l, 0.5 * tol, depth + 1, evals)? + self.refine(f, r, 0.5 * tol, depth + 1, evals)?)
    }
}

/// Nodes and weights of the composite Simpson rule with `nodes` points on
/// `[a, b]`. `nodes` must be odd and at least 3.
pub fn simpson_rule(nodes: usize, a: f64, b: f64) -> Result<Vec<(f64, f64)>> {
    if nodes < 3 || nodes % 2 == 0 {
        return Err(Error::Config(format!("Simpson rule needs an odd node count >= 3, got {nodes}")));
    }
    if !(a.is_finite() && b.is_finite() && b > a) {
        return Err(Error::Config(format!("invalid Simpson interval [{a}, {b}]")));
    }
    let h = (b - a) / (nodes - 1) as f64;
    Ok((0..nodes)
        .map(|j| {
            let w = if j == 0 || j == nodes - 1 {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let x = if j == nodes - 1 { b } else { a + j as f64 * h };
            (x, w * h / 3.0)
        })
        .collect())
}

/// Trapezoid rule weights for arbitrary ascending abscissae.
pub fn trapezoid_weights(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut w = vec![0.0; n];
    for i in 1..n {
        let h = 0.5 * (xs[i] - xs[i - 1]);
        w[i - 1] += h;
        w[i] += h;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let q = AdaptiveSimpson::default()
            .integrate(|x| Complex64::new(x * x * x, -x * x), 0.0, 2.0)
            .unwrap();
        assert!((q.value - Complex64::new(4.0, -8.0 / 3.0)).norm() < 1e-13);
    }

    #[test]
    fn oscillatory_integrand() {
        // ∫₀^{2π·4} e^{ix} dx = 0: the initial panels keep Simpson from being
        // fooled by samples that all land on the same phase.
        let q = AdaptiveSimpson::with_tolerance(1e-10)
            .integrate(Complex64::cis, 0.0, 8.0 * std::f64::consts::PI)
            .unwrap();
        assert!(q.value.norm() < 1e-9);
    }

    #[test]
    fn kinked_integrand_converges() {
        let q = AdaptiveSimpson::default()
            .integrate(|x| Complex64::new((x - 0.3).abs(), 0.0), 0.0, 1.0)
            .unwrap();
        assert!((q.value.re - 0.29).abs() < 1e-9);
    }

    #[test]
    fn non_convergence_reported() {
        let tight = AdaptiveSimpson { abs_tol: 1e-30, initial_panels: 1, max_depth: 3 };
        let r = tight.integrate(|x| Complex64::new(x.sqrt(), 0.0), 0.0, 1.0);
        assert!(matches!(r, Err(Error::Numeric(_))));
    }

    #[test]
    fn empty_and_reversed_intervals() {
        let s = AdaptiveSimpson::default();
        assert_eq!(s.integrate(|_| Complex64::new(1.0, 0.0), 1.0, 1.0).unwrap().value, Complex64::new(0.0, 0.0));
        assert!(s.integrate(|_| Complex64::new(1.0, 0.0), 1.0, 0.0).is_err());
    }

    #[test]
    fn simpson_rule_weights() {
        let r = simpson_rule(5, 0.0, 1.0).unwrap();
        let sum: f64 = r.iter().map(|p| p.1).sum();
        assert!((sum - 1.0).abs() < 1e-15);
        let cubic: f64 = r.iter().map(|&(x, w)| w * x * x * x).sum();
        assert!((cubic - 0.25).abs() < 1e-15);
        assert!(simpson_rule(4, 0.0, 1.0).is_err());
    }

    #[test]
    fn trapezoid_on_uneven_grid() {
        let xs = [0.0, 0.5, 2.0];
        let w = trapezoid_weights(&xs);
        assert_eq!(w, vec![0.25, 1.0, 0.75]);
    }
}
