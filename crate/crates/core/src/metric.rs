//! The spectral distance d(x,y) = sup{h(x) - h(y) : ‖[D,h]‖ <= 1} as a
//! certified lower bound, and the propagation speed of e^{itD}.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SgeoError};
use crate::operator::{MatrixOperator, C64};
use crate::report::CheckReport;
use crate::triple::{Coefficients, Grid, ModeBox, TruncatedTriple};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceResult {
    /// witness(x) - witness(y) for the feasible witness.
    pub lower_bound: f64,
    /// 1 - ‖[D, witness]‖.
    pub constraint_slack: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Which warm start the ascent began from.
    pub warm_start: String,
    /// Fourier coefficients of the real witness h, as [re, im] pairs in
    /// mode-box order.
    pub witness: Vec<[f64; 2]>,
    pub witness_radius: usize,
}

/// Band of the witness functions: Λ in one dimension, Λ/2 above.
pub fn witness_band(t: &TruncatedTriple) -> usize {
    let l = t.band().lambda_full;
    if t.p() == 1 {
        l
    } else {
        (l / 2).max(1)
    }
}

/// Ascent stops once the best value gains less than 1e-4 (relative) over
/// this many steps.
const STALL: usize = 10;

struct Problem<'a> {
    t: &'a TruncatedTriple,
    modes: ModeBox,
    period: f64,
    /// w_k = e_k(x) - e_k(y)
    w: Vec<C64>,
    /// index of -k for each k
    neg: Vec<usize>,
}

impl Problem<'_> {
    fn objective(&self, c: &[C64]) -> f64 {
        c.iter().zip(&self.w).map(|(a, b)| (a * b).re).sum()
    }

    fn bracket(&self, c: &[C64]) -> Result<MatrixOperator> {
        let h = self.t.toeplitz(&Coefficients { modes: self.modes, values: c.to_vec() })?;
        Ok(self.t.dirac().commutator(&h))
    }

    /// q_k = u*[D,E_k]v for the top singular pair of [D,h].
    fn norm_gradient(&self, u: &[C64], v: &[C64]) -> Vec<C64> {
        let t = self.t;
        let du = t.dirac().apply(u);
        let dv = t.dirac().apply(v);
        let full = ModeBox::new(t.p(), t.band().lambda_full);
        let s = t.spinor_dim();
        (0..self.modes.len())
            .map(|ki| {
                let k = self.modes.label(ki);
                let mut acc = C64::new(0.0, 0.0);
                for mi in 0..full.len() {
                    let m = full.label(mi);
                    let src: Vec<i64> = m.iter().zip(&k).map(|(a, b)| a - b).collect();
                    if let Some(si) = full.index(&src) {
                        for sp in 0..s {
                            let (r, c) = (mi * s + sp, si * s + sp);
                            acc += du[r].conj() * v[c] - u[r].conj() * dv[c];
                        }
                    }
                }
                acc
            })
            .collect()
    }

    fn symmetrize(&self, g: &mut [C64]) {
        let copy = g.to_vec();
        for (i, gi) in g.iter_mut().enumerate() {
            *gi = 0.5 * (copy[i] + copy[self.neg[i]].conj());
        }
    }
}

fn norm(c: &[C64]) -> f64 {
    c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Warm starts: the distance cone at y smoothed with Fejér weights (which
/// keep the Lipschitz constant), and a sine profile along x - y.
fn warm_starts(p: &Problem, x: &[f64], y: &[f64]) -> Result<Vec<(String, Vec<C64>)>> {
    let period = p.period;
    let radius = p.modes.radius;
    let fine = Grid { p: p.modes.p, points: 8 * radius + 9, period };
    // d(., y) and -d(., x): swapping the endpoints negates the problem
    let cone = |at: &[f64], sign: f64| {
        let vals: Vec<C64> = (0..fine.len()).map(|i| C64::new(sign * fine.periodic_distance(&fine.point(i), at), 0.0)).collect();
        let mut c = fine.analyze(&vals, radius).values;
        for (i, c) in c.iter_mut().enumerate() {
            let w: f64 = p.modes.label(i).iter().map(|&k| 1.0 - k.abs() as f64 / (radius + 1) as f64).product();
            *c *= w;
        }
        c
    };
    let cones = [cone(y, 1.0), cone(x, -1.0)];
    let omega = 2.0 * PI / period;
    let disp: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let d = (a - b).rem_euclid(period);
            if d > period / 2.0 {
                d - period
            } else {
                d
            }
        })
        .collect();
    let len = disp.iter().map(|d| d * d).sum::<f64>().sqrt();
    let mid: Vec<f64> = y.iter().zip(&disp).map(|(b, d)| b + d / 2.0).collect();
    let sine: Vec<C64> = (0..fine.len())
        .map(|i| {
            let z = fine.point(i);
            let v: f64 = (0..z.len()).map(|mu| disp[mu] / len * (omega * (z[mu] - mid[mu])).sin() / omega).sum();
            C64::new(v, 0.0)
        })
        .collect();
    let sine = fine.analyze(&sine, 1).with_radius(radius).values;
    let [cy, cx] = cones;
    Ok(vec![("fejer_cone".into(), cy), ("fejer_cone_x".into(), cx), ("sine".into(), sine)])
}

/// Lower bound on d(x,y) by ascent on L(h)/‖[D,h]‖ over real band-limited
/// h, with radial projection onto ‖[D,h]‖ <= 1 after each step.
pub fn connes_distance(x: &[f64], y: &[f64], t: &TruncatedTriple, budget: usize) -> Result<DistanceResult> {
    let grid = t.grid().ok_or_else(|| SgeoError::Unsupported("distance needs a periodic geometry".into()))?;
    let radius = witness_band(t);
    let modes = ModeBox::new(t.p(), radius);
    if x.len() != t.p() || y.len() != t.p() {
        return Err(SgeoError::DimensionMismatch { expected: t.p(), got: x.len().min(y.len()) });
    }
    let period = grid.period;
    let omega = 2.0 * PI / period;
    let e = |k: &[i64], z: &[f64]| C64::from_polar(1.0, omega * k.iter().zip(z).map(|(&k, &z)| k as f64 * z).sum::<f64>());
    let w: Vec<C64> = (0..modes.len()).map(|i| {
        let k = modes.label(i);
        e(&k, x) - e(&k, y)
    }).collect();
    let neg = (0..modes.len()).map(|i| modes.index(&modes.label(i).iter().map(|k| -k).collect::<Vec<_>>()).unwrap()).collect();
    let prob = Problem { t, modes, period, w, neg };
    let zero = vec![[0.0, 0.0]; modes.len()];
    if norm(&prob.w) < 1e-14 {
        return Ok(DistanceResult { lower_bound: 0.0, constraint_slack: 1.0, iterations: 0, converged: true, warm_start: "zero".into(), witness: zero, witness_radius: radius });
    }
    // feasible start with the best ratio
    let mut best: Option<(f64, String, Vec<C64>)> = None;
    for (name, c) in warm_starts(&prob, x, y)? {
        let n = prob.bracket(&c)?.op_norm();
        if n <= 0.0 {
            continue;
        }
        let c: Vec<C64> = c.iter().map(|v| v / n).collect();
        let val = prob.objective(&c);
        if best.as_ref().is_none_or(|b| val > b.0) {
            best = Some((val, name, c));
        }
    }
    let (mut best_val, start, mut best_c) = best.ok_or_else(|| SgeoError::InvariantViolation("no feasible warm start".into()))?;
    let mut cur = best_c.clone();
    let mut history = vec![best_val];
    let mut converged = false;
    let mut iterations = 0;
    let (mut n, mut u, mut v) = prob.bracket(&cur)?.top_singular_triplet();
    for it in 1..=budget {
        iterations = it;
        let l = prob.objective(&cur);
        let mut q = prob.norm_gradient(&u, &v);
        q.iter_mut().for_each(|z| *z = z.conj());
        prob.symmetrize(&mut q);
        // ascent direction of L/N at N = n
        let mut g: Vec<C64> = prob.w.iter().zip(&q).map(|(w, q)| w.conj() * n - q * l).collect();
        prob.symmetrize(&mut g);
        let gn = norm(&g);
        if gn < 1e-15 {
            converged = true;
            break;
        }
        let step = 0.02 / (it as f64).sqrt() * norm(&cur) / gn;
        let next: Vec<C64> = cur.iter().zip(&g).map(|(c, g)| c + g * step).collect();
        let (nn, nu, nv) = prob.bracket(&next)?.top_singular_triplet_from(Some(&v));
        let shrink = nn.max(1.0);
        cur = next.iter().map(|c| c / shrink).collect();
        (n, u, v) = (nn / shrink, nu, nv);
        let val = prob.objective(&cur);
        if val > best_val {
            best_val = val;
            best_c = cur.clone();
        }
        history.push(best_val);
        if it >= STALL {
            let old = history[history.len() - STALL - 1];
            if (best_val - old) <= 1e-4 * best_val.abs() {
                converged = true;
                break;
            }
        }
    }
    // certify the witness: exact norm and a final radial projection
    let n = prob.bracket(&best_c)?.op_norm();
    let scale = if n > 1.0 { 1.0 / n } else { 1.0 };
    let witness: Vec<C64> = best_c.iter().map(|c| c * scale).collect();
    Ok(DistanceResult {
        lower_bound: prob.objective(&witness),
        constraint_slack: 1.0 - n * scale,
        iterations,
        converged,
        warm_start: start,
        witness: witness.iter().map(|c| [c.re, c.im]).collect(),
        witness_radius: radius,
    })
}

/// Smearing margin μ(Λ) = 4π/√Λ, in units where the period is 2π.
pub fn smearing_margin(t: &TruncatedTriple) -> f64 {
    let period = t.grid().map(|g| g.period).unwrap_or(2.0 * PI);
    4.0 * PI / (t.band().lambda_full as f64).sqrt() * period / (2.0 * PI)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Propagation {
    pub time: f64,
    /// Mass fraction of the kernel of e^{itD} outside d(x,y) <= |t| + μ.
    pub leakage: f64,
    /// Smallest radius holding 99% of the mass.
    pub radius99: f64,
}

/// |K_t(x, y)|^2 summed over spinor components, for the spinor basis
/// vector at (y, s0), sampled on `on`.
fn kernel_mass(t: &TruncatedTriple, cols: &[Vec<(usize, C64)>], values: &[f64], time: f64, y: &[f64], s0: usize, on: &Grid) -> Vec<f64> {
    let modes = ModeBox::new(t.p(), t.band().lambda_full);
    let s = t.spinor_dim();
    let omega = 2.0 * PI / on.period;
    let norm = (modes.len() as f64).sqrt();
    let mut v = vec![C64::new(0.0, 0.0); t.hilbert_dim()];
    for mi in 0..modes.len() {
        let phase: f64 = modes.label(mi).iter().zip(y).map(|(&k, &z)| k as f64 * z).sum::<f64>() * omega;
        v[mi * s + s0] = C64::from_polar(1.0 / norm, -phase);
    }
    let mut out = vec![C64::new(0.0, 0.0); v.len()];
    for (k, col) in cols.iter().enumerate() {
        let proj: C64 = col.iter().map(|&(r, a)| a.conj() * v[r]).sum();
        let rot = proj * C64::from_polar(1.0, time * values[k]);
        for &(r, a) in col {
            out[r] += a * rot;
        }
    }
    let mut mass = vec![0.0; on.len()];
    for sp in 0..s {
        let values = (0..modes.len()).map(|mi| out[mi * s + sp]).collect();
        let field = on.synthesize(&Coefficients { modes, values });
        mass.iter_mut().zip(&field).for_each(|(m, f)| *m += f.norm_sqr());
    }
    mass
}

/// Kernel mass of e^{itD} on the position grid, from grid point `src`
/// (spinor component 0). At t = 0 this is a delta at `src`.
pub fn position_kernel(t: &TruncatedTriple, time: f64, src: usize) -> Result<Vec<f64>> {
    let grid = t.grid().ok_or_else(|| SgeoError::Unsupported("propagation needs a periodic geometry".into()))?;
    if src >= grid.len() {
        return Err(SgeoError::InvalidArgument(format!("source {src} outside grid of {}", grid.len())));
    }
    let eig = t.dirac_eigen();
    let mass = kernel_mass(t, &eig.sparse_columns(), &eig.values, time, &grid.point(src), 0, &grid);
    let total: f64 = mass.iter().sum();
    Ok(mass.iter().map(|m| m / total).collect())
}

/// Kernel of e^{itD} from a few grid sources (every spinor component).
/// Mass is measured on a 4x oversampled grid so it tracks the continuous
/// density rather than the aliasing of the position grid.
pub fn propagation(t: &TruncatedTriple, time: f64) -> Result<Propagation> {
    let grid = t.grid().ok_or_else(|| SgeoError::Unsupported("propagation needs a periodic geometry".into()))?;
    let eig = t.dirac_eigen();
    let cols = eig.sparse_columns();
    let margin = smearing_margin(t);
    let fine = Grid { points: 4 * grid.points, ..grid };
    let (mut leaked, mut total) = (0.0, 0.0);
    let mut radius99: f64 = 0.0;
    for src in (0..4).map(|i| i * grid.len() / 4) {
        let y = grid.point(src);
        for s0 in 0..t.spinor_dim() {
            let mass = kernel_mass(t, &cols, &eig.values, time, &y, s0, &fine);
            let mut by_dist: Vec<(f64, f64)> = (0..fine.len()).map(|i| (fine.periodic_distance(&fine.point(i), &y), mass[i])).collect();
            let sum: f64 = mass.iter().sum();
            total += sum;
            leaked += by_dist.iter().filter(|(d, _)| *d > time.abs() + margin).map(|(_, m)| m).sum::<f64>();
            by_dist.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let mut acc = 0.0;
            for (d, m) in by_dist {
                acc += m;
                if acc >= 0.99 * sum {
                    radius99 = radius99.max(d);
                    break;
                }
            }
        }
    }
    Ok(Propagation { time, leakage: leaked / total, radius99 })
}

/// Leakage <= 1% at every time, and the 99% radius nondecreasing in |t|.
pub fn finite_propagation_check(t: &TruncatedTriple, times: &[f64]) -> CheckReport {
    let mut r = CheckReport::new("finite_propagation");
    let mut times = times.to_vec();
    times.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap());
    let runs = match times.iter().map(|&s| propagation(t, s)).collect::<Result<Vec<_>>>() {
        Ok(v) => v,
        Err(e @ SgeoError::Unsupported(_)) => {
            r.inconclusive(e.to_string());
            return r;
        }
        Err(e) => {
            r.fail(e.to_string());
            return r;
        }
    };
    r.metric("margin", smearing_margin(t));
    r.series("times", times.clone());
    r.series("leakage", runs.iter().map(|p| p.leakage).collect());
    r.series("radius99", runs.iter().map(|p| p.radius99).collect());
    r.bound("max_leakage", runs.iter().map(|p| p.leakage).fold(0.0, f64::max), 0.01);
    let drops = runs.windows(2).map(|w| (w[0].radius99 - w[1].radius99).max(0.0)).fold(0.0, f64::max);
    r.bound("radius_decrease", drops, 1e-12);
    r
}
