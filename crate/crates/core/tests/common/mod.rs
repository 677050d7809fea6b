//! Independent numerical oracles shared by the integration and acceptance tests.
//!
//! Nothing in here calls into the closed forms of `nung_core::gravity`; the
//! oracles integrate the homogeneous-ball definitions directly.

#![allow(dead_code)]

use nalgebra::{Complex, Matrix2, Matrix4};
use rand::Rng;

pub type C64 = Complex<f64>;

/// Gauss-Legendre nodes and weights on [-1, 1], Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Composite Gauss-Legendre over the sorted breakpoints, `panels` equal
/// sub-panels between consecutive breakpoints.
pub fn integrate<F: Fn(f64) -> f64>(f: F, breaks: &[f64], panels: usize, rule: &[(f64, f64)]) -> f64 {
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let h = (hi - lo) / panels as f64;
        for p in 0..panels {
            let a = lo + p as f64 * h;
            let mid = a + 0.5 * h;
            total += rule
                .iter()
                .map(|&(x, wt)| wt * f(mid + 0.5 * h * x))
                .sum::<f64>()
                * 0.5
                * h;
        }
    }
    total
}

fn sorted_breaks(lo: f64, hi: f64, interior: &[f64]) -> Vec<f64> {
    let mut b = vec![lo, hi];
    b.extend(interior.iter().copied().filter(|&x| x > lo && x < hi));
    b.sort_by(|a, b| a.partial_cmp(b).unwrap());
    b
}

/// Potential of a homogeneous ball (mass `m`, radius `r`) at distance `d`
/// from its centre, written out directly from Gauss's law.
fn ball_potential(g: f64, m: f64, r: f64, d: f64) -> f64 {
    if d >= r {
        -g * m / d
    } else {
        -g * m * (3.0 * r * r - d * d) / (2.0 * r * r * r)
    }
}

/// Mutual gravitational energy of two identical homogeneous balls with
/// centres `s` apart: the first ball is sliced into thin shells, and the
/// other ball's potential is averaged over each shell.
pub fn mutual_energy_oracle(g: f64, m: f64, r: f64, s: f64) -> f64 {
    let rule = gauss_legendre(24);
    let shell_average = |a: f64| -> f64 {
        if s == 0.0 {
            return ball_potential(g, m, r, a);
        }
        // <phi> = 1/(2 a s) * int_{|s-a|}^{s+a} phi(d) d dd
        let lo = (s - a).abs();
        let hi = s + a;
        let inner = integrate(
            |d| ball_potential(g, m, r, d) * d,
            &sorted_breaks(lo, hi, &[r]),
            2,
            &rule,
        );
        inner / (2.0 * a * s)
    };
    let density = 3.0 * m / (r * r * r);
    integrate(
        |a| density * a * a * shell_average(a),
        &sorted_breaks(0.0, r, &[s, s - r, r - s]),
        4,
        &rule,
    )
}

/// Magnitude of the inward field of a homogeneous ball at distance `dist`
/// from its centre, summed shell by shell. Each shell's field is the
/// polar-angle integral of the point-mass law, substituted to the log of the
/// source-to-probe distance to tame the near-singular shells.
pub fn ball_field_oracle(g: f64, m: f64, r: f64, dist: f64) -> f64 {
    let rule = gauss_legendre(20);
    let density = 3.0 * m / (r * r * r);
    let shell = |a: f64| -> f64 {
        let lo = (dist - a).abs().ln();
        let hi = (dist + a).ln();
        let panels = ((hi - lo) / 0.5).ceil().max(1.0) as usize;
        integrate(
            |w| {
                let d = w.exp();
                (dist * dist - a * a + d * d) / (4.0 * dist * dist * a * d)
            },
            &[lo, hi],
            panels,
            &rule,
        )
    };
    // geometric grading towards the kink at a = dist
    let mut breaks = vec![0.0, r];
    if dist < r {
        for k in 0..40 {
            let f = 0.5f64.powi(k);
            breaks.push(dist - dist * f);
            breaks.push(dist + (r - dist) * f);
        }
    }
    breaks.retain(|&x| x >= 0.0 && x <= r);
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup();
    g * integrate(|a| density * a * a * shell(a), &breaks, 1, &rule)
}

/// Partial trace over the second factor by explicit index summation over
/// the 2x2x2x2 tensor view of the matrix.
#[allow(clippy::needless_range_loop)]
pub fn partial_trace_oracle(m: &Matrix4<C64>) -> Matrix2<C64> {
    let mut tensor = [[[[C64::new(0.0, 0.0); 2]; 2]; 2]; 2];
    for p in 0..2 {
        for h in 0..2 {
            for q in 0..2 {
                for k in 0..2 {
                    tensor[p][h][q][k] = m[(2 * p + h, 2 * q + k)];
                }
            }
        }
    }
    let mut out = Matrix2::zeros();
    for p in 0..2 {
        for q in 0..2 {
            for h in 0..2 {
                out[(p, q)] += tensor[p][h][q][h];
            }
        }
    }
    out
}

/// Random density matrix: A A† / Tr(A A†) with Gaussian-ish complex entries.
pub fn random_density4<R: Rng>(rng: &mut R) -> Matrix4<C64> {
    let a = Matrix4::from_fn(|_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let m = a * a.adjoint();
    let tr = m.trace();
    m / tr
}

/// Eigenvalues of a Hermitian 2x2 matrix from its characteristic polynomial.
pub fn eigen2_oracle(m: &Matrix2<C64>) -> (f64, f64) {
    let tr = (m[(0, 0)] + m[(1, 1)]).re;
    let det = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re;
    let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
    ((tr - disc) / 2.0, (tr + disc) / 2.0)
}

/// Midpoint-free time average by composite Gauss-Legendre.
pub fn time_average<F: Fn(f64) -> f64>(f: F, t_end: f64) -> f64 {
    let rule = gauss_legendre(20);
    integrate(f, &[0.0, t_end], 16, &rule) / t_end
}
