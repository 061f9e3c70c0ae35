//! Mode boxes, Fourier coefficient arrays and position grids.

use rustfft::FftPlanner;

use crate::operator::{C64, ZERO};

/// The lattice box {k in Z^p : |k|_inf <= radius}, enumerated
/// lexicographically with the first axis slowest.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModeBox {
    pub p: usize,
    pub radius: usize,
}

impl ModeBox {
    pub fn new(p: usize, radius: usize) -> Self {
        ModeBox { p, radius }
    }

    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    pub fn len(&self) -> usize {
        self.side().pow(self.p as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, k: &[i64]) -> Option<usize> {
        let r = self.radius as i64;
        let mut idx = 0usize;
        for &c in k {
            if c < -r || c > r {
                return None;
            }
            idx = idx * self.side() + (c + r) as usize;
        }
        Some(idx)
    }

    pub fn label(&self, mut idx: usize) -> Vec<i64> {
        let mut out = vec![0i64; self.p];
        for axis in (0..self.p).rev() {
            out[axis] = (idx % self.side()) as i64 - self.radius as i64;
            idx /= self.side();
        }
        out
    }

    pub fn labels(&self) -> Vec<Vec<i64>> {
        (0..self.len()).map(|i| self.label(i)).collect()
    }
}

/// Fourier coefficients f_k on a mode box; the function is
/// f(x) = sum_k f_k exp(i ω k·x) with ω = 2π / period.
#[derive(Clone, Debug)]
pub struct Coefficients {
    pub modes: ModeBox,
    pub values: Vec<C64>,
}

impl Coefficients {
    pub fn zeros(modes: ModeBox) -> Self {
        Coefficients { modes, values: vec![ZERO; modes.len()] }
    }

    pub fn get(&self, k: &[i64]) -> C64 {
        self.modes.index(k).map_or(ZERO, |i| self.values[i])
    }

    /// Restricts (or zero-extends) to another radius.
    pub fn with_radius(&self, radius: usize) -> Coefficients {
        let target = ModeBox::new(self.modes.p, radius);
        let values = (0..target.len()).map(|i| self.get(&target.label(i))).collect();
        Coefficients { modes: target, values }
    }

    /// Largest |k|_inf carrying a coefficient above `tol`.
    pub fn bandwidth(&self, tol: f64) -> usize {
        (0..self.modes.len())
            .filter(|&i| self.values[i].norm() > tol)
            .map(|i| self.modes.label(i).iter().map(|c| c.unsigned_abs() as usize).max().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64], period: f64) -> C64 {
        let omega = 2.0 * std::f64::consts::PI / period;
        (0..self.modes.len())
            .filter(|&i| self.values[i] != ZERO)
            .map(|i| {
                let k = self.modes.label(i);
                let phase: f64 = k.iter().zip(x).map(|(&k, &x)| k as f64 * x).sum::<f64>() * omega;
                self.values[i] * C64::from_polar(1.0, phase)
            })
            .sum()
    }
}

/// A uniform periodic grid with `points` samples per axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub p: usize,
    pub points: usize,
    pub period: f64,
}

impl Grid {
    pub fn len(&self) -> usize {
        self.points.pow(self.p as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.points == 0
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.points as f64
    }

    /// Multi-index of flat position `idx` (first axis slowest).
    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0usize; self.p];
        for axis in (0..self.p).rev() {
            out[axis] = idx % self.points;
            idx /= self.points;
        }
        out
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi.iter().fold(0, |acc, &m| acc * self.points + m % self.points)
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        self.multi_index(idx).iter().map(|&m| m as f64 * self.spacing()).collect()
    }

    /// Nearest grid index to a point.
    pub fn nearest(&self, x: &[f64]) -> usize {
        let multi: Vec<usize> = x
            .iter()
            .map(|&c| {
                let t = (c / self.spacing()).round() as i64;
                t.rem_euclid(self.points as i64) as usize
            })
            .collect();
        self.flat_index(&multi)
    }

    /// Periodic (flat) distance between two points.
    pub fn periodic_distance(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter()
            .zip(y)
            .map(|(&a, &b)| {
                let d = (a - b).rem_euclid(self.period);
                d.min(self.period - d).powi(2)
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Evaluates coefficients on the grid (requires points >= 2·radius+1).
    pub fn synthesize(&self, coeffs: &Coefficients) -> Vec<C64> {
        assert!(self.points > 2 * coeffs.modes.radius, "grid too coarse for the coefficient band");
        let mut buf = vec![ZERO; self.len()];
        for i in 0..coeffs.modes.len() {
            let k = coeffs.modes.label(i);
            let multi: Vec<usize> = k.iter().map(|&c| c.rem_euclid(self.points as i64) as usize).collect();
            buf[self.flat_index(&multi)] += coeffs.values[i];
        }
        self.transform(&mut buf, true);
        buf
    }

    /// Coefficients |k|_inf <= radius of the trigonometric interpolant of
    /// grid samples.
    pub fn analyze(&self, values: &[C64], radius: usize) -> Coefficients {
        assert_eq!(values.len(), self.len());
        assert!(self.points > 2 * radius, "grid too coarse for the requested band");
        let mut buf = values.to_vec();
        self.transform(&mut buf, false);
        let scale = 1.0 / self.len() as f64;
        let modes = ModeBox::new(self.p, radius);
        let vals = (0..modes.len())
            .map(|i| {
                let k = modes.label(i);
                let multi: Vec<usize> = k.iter().map(|&c| c.rem_euclid(self.points as i64) as usize).collect();
                buf[self.flat_index(&multi)] * scale
            })
            .collect();
        Coefficients { modes, values: vals }
    }

    /// In-place multidimensional DFT; `inverse` uses exp(+i...) without
    /// normalisation.
    fn transform(&self, buf: &mut [C64], inverse: bool) {
        let n = self.points;
        let mut planner = FftPlanner::<f64>::new();
        let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
        let mut line = vec![ZERO; n];
        for axis in 0..self.p {
            let stride = n.pow((self.p - 1 - axis) as u32);
            let outer = self.len() / n;
            for o in 0..outer {
                let lo = o % stride;
                let hi = o / stride;
                let base = hi * stride * n + lo;
                for (j, slot) in line.iter_mut().enumerate() {
                    *slot = buf[base + j * stride];
                }
                fft.process(&mut line);
                for (j, &v) in line.iter().enumerate() {
                    buf[base + j * stride] = v;
                }
            }
        }
    }
}
