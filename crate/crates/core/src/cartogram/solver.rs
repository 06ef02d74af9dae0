use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use rustdct::{DctPlanner, TransformType2And3};

use super::density::DensityField;
use super::transform::CartogramTransform;
use crate::{Error, Result};

/// Solver settings. Positions are in grid cells throughout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverParams {
    /// Stop once no node moves further than this in one step.
    pub epsilon: f64,
    /// Step in log-time.
    pub step: f64,
    /// Earliest time at which integration may start. The start is pushed
    /// later, by factors of four, until the smoothed density is safely
    /// positive; motion before it is neglected.
    pub t0: f64,
    pub max_steps: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            epsilon: 1e-3,
            step: 0.3,
            t0: 1e-3,
            max_steps: 2000,
        }
    }
}

impl SolverParams {
    pub fn with_epsilon(epsilon: f64) -> Self {
        SolverParams {
            epsilon,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.step > 0.0 && self.t0 > 0.0) || self.max_steps == 0 {
            return Err(Error::Invalid(format!("invalid cartogram solver settings {self:?}")));
        }
        Ok(())
    }
}

/// Integration diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveStats {
    pub steps: usize,
    /// Time at which integration started.
    pub start_time: f64,
    pub final_time: f64,
    /// Last per-step maximum node displacement, cells.
    pub residual: f64,
    /// Largest relative difference between the reconstructed mass at any
    /// evaluated time and the initial mass.
    pub max_mass_drift: f64,
}

/// Transforms along x and y for one sampling resolution.
struct Transforms {
    x: Arc<dyn TransformType2And3<f64>>,
    y: Arc<dyn TransformType2And3<f64>>,
}

/// Velocity sampled at the centres of a grid `refine` times finer than the
/// density cells, row-major.
struct Velocity {
    refine: usize,
    nx: usize,
    ny: usize,
    /// (vx, vy) pairs
    v: Vec<[f64; 2]>,
}

/// Cosine-series representation of the density on the padded grid,
/// `rho(x, y) = sum a[k][l] cos(pi k x / nx) cos(pi l y / ny)` with x, y in
/// cells. Coefficients are stored k-major (`k * ny + l`).
struct Spectrum {
    nx: usize,
    ny: usize,
    coef: Vec<f64>,
    /// Transforms indexed by log2 of the sampling refinement.
    tr: Vec<Transforms>,
}

/// Finest velocity sampling, as a multiple of the cell resolution.
const MAX_REFINE: usize = 2;
/// Sampling is refined while the diffusion length, in samples, is below this.
const REFINE_WIDTH: f64 = 4.0;
/// Integration starts once the smoothed density at the cell centres stays
/// above this fraction of the smallest input density...
const START_DENSITY: f64 = 0.5;
/// ...and above this fraction between them.
const START_DENSITY_FINE: f64 = 0.05;

impl Spectrum {
    fn new(field: &DensityField) -> Self {
        let (nx, ny) = (field.nx, field.ny);
        let mut planner = DctPlanner::new();
        let tr: Vec<Transforms> = (0..=MAX_REFINE.trailing_zeros())
            .map(|p| Transforms {
                x: planner.plan_dct2(nx << p),
                y: planner.plan_dct2(ny << p),
            })
            .collect();
        let mut rows = field.rho.clone();
        rows.par_chunks_mut(nx).for_each(|r| tr[0].x.process_dct2(r));
        let mut cols = transpose(&rows, nx, ny);
        cols.par_chunks_mut(ny).for_each(|c| tr[0].y.process_dct2(c));
        // Dividing by the cell-average factor of each mode makes the
        // integral of the series over every cell equal that cell's value,
        // rather than its value at the cell centre.
        let norm = 1.0 / (nx * ny) as f64;
        let sx = cell_average_factors(nx);
        let sy = cell_average_factors(ny);
        for k in 0..nx {
            let wk = if k == 0 { 1.0 } else { 2.0 };
            for l in 0..ny {
                let wl = if l == 0 { 1.0 } else { 2.0 };
                cols[k * ny + l] *= wk * wl * norm / (sx[k] * sy[l]);
            }
        }
        Spectrum { nx, ny, coef: cols, tr }
    }

    fn is_flat(&self) -> bool {
        let a00 = self.coef[0].abs();
        self.coef[1..].iter().all(|c| c.abs() <= 1e-12 * a00)
    }

    /// Density and its gradient at time `t`, sampled `refine` times finer
    /// than the cells, returned as the velocity `-grad(rho) / rho`, the
    /// reconstructed mass (in cell units) and the smallest sampled density.
    fn velocity(&self, t: f64, refine: usize) -> (Velocity, f64, f64) {
        let (nx, ny) = (self.nx, self.ny);
        let tr = &self.tr[refine.trailing_zeros() as usize];
        let (fx, fy) = (nx * refine, ny * refine);
        let ax: Vec<f64> = (0..nx).map(|k| PI * k as f64 / nx as f64).collect();
        let ay: Vec<f64> = (0..ny).map(|l| PI * l as f64 / ny as f64).collect();
        let ex: Vec<f64> = ax.iter().map(|a| (-a * a * t).exp()).collect();
        let ey: Vec<f64> = ay.iter().map(|a| (-a * a * t).exp()).collect();

        // y pass: cosine part (for rho and d/dx) and sine part (for d/dy);
        // modes beyond the cell resolution are zero
        let mut cy = vec![0.0; nx * fy];
        let mut sy = vec![0.0; nx * fy];
        cy.par_chunks_mut(fy)
            .zip(sy.par_chunks_mut(fy))
            .enumerate()
            .for_each(|(k, (c, s))| {
                let src = &self.coef[k * ny..(k + 1) * ny];
                for l in 0..ny {
                    let g = src[l] * ex[k] * ey[l];
                    c[l] = g;
                    if l > 0 {
                        s[l - 1] = -ay[l] * g;
                    }
                }
                cos_series(&*tr.y, c);
                tr.y.process_dst3(s);
            });
        let cy = transpose(&cy, fy, nx);
        let sy = transpose(&sy, fy, nx);

        // x pass, one row of samples at a time
        let mut vel = vec![[0.0; 2]; fx * fy];
        let floor = 1e-9 * self.coef[0].abs();
        let (mass, min_rho) = vel
            .par_chunks_mut(fx)
            .enumerate()
            .map(|(j, out)| {
                let c = &cy[j * nx..(j + 1) * nx];
                let mut rho = vec![0.0; fx];
                rho[..nx].copy_from_slice(c);
                cos_series(&*tr.x, &mut rho);
                let mut dx = vec![0.0; fx];
                for k in 1..nx {
                    dx[k - 1] = -ax[k] * c[k];
                }
                tr.x.process_dst3(&mut dx);
                let mut dy = vec![0.0; fx];
                dy[..nx].copy_from_slice(&sy[j * nx..(j + 1) * nx]);
                cos_series(&*tr.x, &mut dy);
                let mut row_mass = 0.0;
                let mut row_min = f64::INFINITY;
                for i in 0..fx {
                    row_mass += rho[i];
                    row_min = row_min.min(rho[i]);
                    let r = rho[i].max(floor);
                    out[i] = [-dx[i] / r, -dy[i] / r];
                }
                (row_mass, row_min)
            })
            .reduce(|| (0.0, f64::INFINITY), |a, b| (a.0 + b.0, a.1.min(b.1)));
        let mass = mass / (refine * refine) as f64;
        (Velocity { refine, nx: fx, ny: fy, v: vel }, mass, min_rho)
    }
}

/// Mean of `cos(pi k x / n)` over a unit cell divided by its value at the
/// cell centre.
fn cell_average_factors(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let h = PI * k as f64 / (2.0 * n as f64);
            if k == 0 { 1.0 } else { h.sin() / h }
        })
        .collect()
}

/// In place `out[i] = sum_k c[k] cos(pi k (i + 1/2) / n)`.
fn cos_series(tr: &dyn TransformType2And3<f64>, buf: &mut [f64]) {
    buf[0] *= 2.0;
    tr.process_dct3(buf);
}

/// `src` is `rows` x `cols` row-major; returns its transpose.
fn transpose(src: &[f64], cols: usize, rows: usize) -> Vec<f64> {
    let mut out = vec![0.0; src.len()];
    const B: usize = 32;
    for r0 in (0..rows).step_by(B) {
        for c0 in (0..cols).step_by(B) {
            for r in r0..(r0 + B).min(rows) {
                for c in c0..(c0 + B).min(cols) {
                    out[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
    out
}

impl Velocity {
    /// Bilinear interpolation between sample points, at a position in
    /// cells. Ghost samples beyond the domain edge mirror the interior with
    /// the normal component negated, so the flow never leaves the domain.
    fn at(&self, u: f64, v: f64) -> (f64, f64) {
        let r = self.refine as f64;
        let fu = u * r - 0.5;
        let fv = v * r - 0.5;
        // positions never fall below -1/2, so truncation after the shift
        // is a floor
        let i0 = (fu + 1.0) as i64 - 1;
        let j0 = (fv + 1.0) as i64 - 1;
        let (wx, wy) = (fu - i0 as f64, fv - j0 as f64);
        if i0 >= 0 && j0 >= 0 && (i0 as usize) + 1 < self.nx && (j0 as usize) + 1 < self.ny {
            let k = j0 as usize * self.nx + i0 as usize;
            let (a, b) = (self.v[k], self.v[k + 1]);
            let (c, d) = (self.v[k + self.nx], self.v[k + self.nx + 1]);
            let lo = [a[0] + wx * (b[0] - a[0]), a[1] + wx * (b[1] - a[1])];
            let hi = [c[0] + wx * (d[0] - c[0]), c[1] + wx * (d[1] - c[1])];
            return (lo[0] + wy * (hi[0] - lo[0]), lo[1] + wy * (hi[1] - lo[1]));
        }
        let mut acc = (0.0, 0.0);
        for (di, fx) in [(0, 1.0 - wx), (1, wx)] {
            for (dj, fy) in [(0, 1.0 - wy), (1, wy)] {
                let w = fx * fy;
                if w == 0.0 {
                    continue;
                }
                let (i, sx) = reflect(i0 + di, self.nx);
                let (j, sy) = reflect(j0 + dj, self.ny);
                let k = j * self.nx + i;
                acc.0 += w * sx * self.v[k][0];
                acc.1 += w * sy * self.v[k][1];
            }
        }
        acc
    }
}

fn reflect(i: i64, n: usize) -> (usize, f64) {
    if i < 0 {
        (0, -1.0)
    } else if i as usize >= n {
        (n - 1, -1.0)
    } else {
        (i as usize, 1.0)
    }
}

/// Sampling refinement at time `t`: early on the flow varies on scales
/// below a cell (its width grows like `sqrt(t)`).
fn refinement(t: f64) -> usize {
    let mut r = 1;
    while r < MAX_REFINE && (r as f64) * t.sqrt() < REFINE_WIDTH {
        r *= 2;
    }
    r
}

/// Node positions of the `(nx + 1) x (ny + 1)` lattice of cell corners,
/// row-major, in cells.
fn lattice(nx: usize, ny: usize) -> Vec<(f64, f64)> {
    (0..=ny)
        .flat_map(|j| (0..=nx).map(move |i| (i as f64, j as f64)))
        .collect()
}

/// Diffuses the density to uniformity and carries the lattice of cell
/// corners along the flow `v = -grad(rho) / rho`.
///
/// Integration uses fourth-order Runge-Kutta with fixed steps in `ln t`. It
/// stops once `t` exceeds the slowest mode's decay time and no node moved
/// more than `epsilon` cells in the last step.
pub fn solve_cartogram(field: &DensityField, params: &SolverParams) -> Result<CartogramTransform> {
    params.validate()?;
    if field.rho.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Invalid("density must be strictly positive".into()));
    }
    let (nx, ny) = (field.nx, field.ny);
    let spectrum = Spectrum::new(field);
    let mut nodes = lattice(nx, ny);
    let mut stats = SolveStats::default();
    if spectrum.is_flat() {
        log::debug!("flat density, identity transform");
        return Ok(CartogramTransform::new(field, nodes, stats));
    }

    let initial_mass: f64 = field.rho.iter().sum();
    let n = nx.max(ny) as f64;
    let t_settle = n * n / (PI * PI);
    let h = params.step;
    let min_input = field.rho.iter().cloned().fold(f64::INFINITY, f64::min);

    let eval = |tau: f64, stats: &mut SolveStats| -> (Velocity, f64) {
        let t = tau.exp();
        let (v, mass, min_rho) = spectrum.velocity(t, refinement(t));
        let drift = ((mass - initial_mass) / initial_mass).abs();
        stats.max_mass_drift = stats.max_mass_drift.max(drift);
        (v, min_rho)
    };
    // sharp peaks ring below zero until diffusion has smoothed them
    let mut tau = params.t0.ln();
    let mut v_start = loop {
        let (v, min_fine) = eval(tau, &mut stats);
        let min_cells = if refinement(tau.exp()) == 1 {
            min_fine
        } else {
            spectrum.velocity(tau.exp(), 1).2
        };
        let positive = min_cells >= START_DENSITY * min_input && min_fine >= START_DENSITY_FINE * min_input;
        if positive || tau.exp() >= t_settle {
            break v;
        }
        tau += 4f64.ln();
    };
    stats.start_time = tau.exp();
    log::debug!("cartogram integration starts at t={:.3e}", stats.start_time);
    let mut stage = vec![(0.0, 0.0); nodes.len()];
    loop {
        if stats.steps >= params.max_steps {
            return Err(Error::NoConvergence {
                steps: stats.steps,
                residual: stats.residual,
            });
        }
        let t_a = tau.exp();
        let t_m = (tau + h / 2.0).exp();
        let t_b = (tau + h).exp();
        let (v_mid, _) = eval(tau + h / 2.0, &mut stats);
        let (v_end, _) = eval(tau + h, &mut stats);

        let f = |v: &Velocity, t: f64, p: (f64, f64)| {
            let (a, b) = v.at(p.0, p.1);
            (t * a, t * b)
        };
        // k1, k2, k3 accumulate into `stage` as the running weighted sum
        let mut max_move = 0.0f64;
        nodes
            .par_iter_mut()
            .zip(stage.par_iter_mut())
            .map(|(p, acc)| {
                let k1 = f(&v_start, t_a, *p);
                let k2 = f(&v_mid, t_m, (p.0 + h / 2.0 * k1.0, p.1 + h / 2.0 * k1.1));
                let k3 = f(&v_mid, t_m, (p.0 + h / 2.0 * k2.0, p.1 + h / 2.0 * k2.1));
                let k4 = f(&v_end, t_b, (p.0 + h * k3.0, p.1 + h * k3.1));
                *acc = (
                    h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
                    h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
                );
                p.0 = (p.0 + acc.0).clamp(0.0, nx as f64);
                p.1 = (p.1 + acc.1).clamp(0.0, ny as f64);
                acc.0.hypot(acc.1)
            })
            .collect::<Vec<f64>>()
            .into_iter()
            .for_each(|d| max_move = max_move.max(d));

        stats.steps += 1;
        stats.residual = max_move;
        tau += h;
        stats.final_time = tau.exp();
        v_start = v_end;
        log::trace!("step {} t={:.4e} max move {:.3e}", stats.steps, stats.final_time, max_move);
        if stats.final_time >= t_settle && max_move < params.epsilon {
            break;
        }
    }
    log::debug!(
        "cartogram converged after {} steps at t={:.3e}, mass drift {:.2e}",
        stats.steps,
        stats.final_time,
        stats.max_mass_drift
    );
    Ok(CartogramTransform::new(field, nodes, stats))
}
