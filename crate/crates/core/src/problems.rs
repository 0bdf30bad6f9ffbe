//! Seeded problem generators and the on-disk system layout.
//!
//! A system directory holds `X.txt`, `y.txt`, `reference.txt`, an optional
//! `residual.txt` and `meta.txt` (lines `regime <name>` and `seed <u64>`).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::io::{read_matrix, read_vector, write_matrix, write_vector};
use crate::linalg::{
    least_norm_ref, least_squares_ref, spectral_summary, sub, DenseMatrix, LinearSystem, Regime,
};
use crate::sampling::Prng;

/// Attempts made (seed, seed+1, ...) before a rank-deficient draw is reported.
pub const MAX_ATTEMPTS: u64 = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenSpec {
    pub m: usize,
    pub n: usize,
    pub regime: Regime,
    pub seed: u64,
    /// Scale of the inconsistent residual.
    pub noise_scale: f64,
}

impl GenSpec {
    pub fn new(m: usize, n: usize, regime: Regime, seed: u64) -> Self {
        Self {
            m,
            n,
            regime,
            seed,
            noise_scale: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::Config("m and n must be positive".into()));
        }
        if !self.regime.admits(self.m, self.n) {
            return Err(Error::Config(format!(
                "{}x{} is not admissible for regime {}",
                self.m, self.n, self.regime
            )));
        }
        if !(self.noise_scale.is_finite() && self.noise_scale >= 0.0) {
            return Err(Error::Config(
                "noise scale must be finite and nonnegative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TomoSpec {
    pub grid_n: usize,
    pub oversample: usize,
    pub seed: u64,
}

impl TomoSpec {
    pub fn validate(&self) -> Result<()> {
        if self.grid_n == 0 {
            return Err(Error::Config("grid size must be positive".into()));
        }
        if self.oversample < 2 {
            return Err(Error::Config(format!(
                "oversample must be at least 2 (got {})",
                self.oversample
            )));
        }
        Ok(())
    }
}

fn retry<T>(seed: u64, mut f: impl FnMut(u64) -> Result<Option<T>>) -> Result<T> {
    let mut last = None;
    for k in 0..MAX_ATTEMPTS {
        match f(seed.wrapping_add(k)) {
            Ok(Some(v)) => return Ok(v),
            Ok(None) => {}
            Err(e @ (Error::Singular { .. } | Error::NoConvergence { .. })) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap_or_else(|| {
        Error::InvalidSystem(format!(
            "rank-deficient draw for seeds {seed}..{}",
            seed.wrapping_add(MAX_ATTEMPTS - 1)
        ))
    }))
}

fn gaussian_vec(rng: &mut Prng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.gaussian()).collect()
}

/// Standard-Gaussian system. Draw order from `Prng::new(seed)`: `X` row-major,
/// then `beta`, then (inconsistent regime only) the residual seed vector `v`.
pub fn gen_gaussian(spec: &GenSpec) -> Result<LinearSystem> {
    spec.validate()?;
    let (m, n) = (spec.m, spec.n);
    retry(spec.seed, |seed| {
        let mut rng = Prng::new(seed);
        let x = DenseMatrix::new(m, n, gaussian_vec(&mut rng, m * n))?;
        if spectral_summary(&x)?.rank < m.min(n) {
            return Ok(None);
        }
        let beta = gaussian_vec(&mut rng, n);
        let fit = x.matvec(&beta)?;
        let sys = match spec.regime {
            Regime::OverConsistent => {
                LinearSystem::new(x, fit, Regime::OverConsistent, Some(beta), None)?
            }
            Regime::Underdetermined => {
                let reference = least_norm_ref(&x, &fit)?;
                LinearSystem::new(x, fit, Regime::Underdetermined, Some(reference), None)?
            }
            Regime::OverInconsistent => {
                let v = gaussian_vec(&mut rng, m);
                let proj = x.matvec(&least_squares_ref(&x, &v)?)?;
                let r: Vec<f64> = sub(&v, &proj)
                    .iter()
                    .map(|e| spec.noise_scale * e)
                    .collect();
                let y: Vec<f64> = fit.iter().zip(&r).map(|(a, b)| a + b).collect();
                let reference = least_squares_ref(&x, &y)?;
                LinearSystem::new(x, y, Regime::OverInconsistent, Some(reference), Some(r))?
            }
        };
        Ok(Some(sys.with_seed(seed)))
    })
}

// Uniform point on the boundary of [0, n]^2 and the side it lies on
// (0 bottom, 1 right, 2 top, 3 left).
fn boundary_point(rng: &mut Prng, n: f64) -> ((f64, f64), u8) {
    let s = rng.uniform() * 4.0 * n;
    let side = ((s / n) as u8).min(3);
    let u = s - f64::from(side) * n;
    let p = match side {
        0 => (u, 0.0),
        1 => (n, u),
        2 => (n - u, n),
        _ => (0.0, n - u),
    };
    (p, side)
}

/// Intersection lengths of segment `p`-`q` with the unit cells of an
/// `n x n` grid, as `(cell index, length)` pairs with cell `cy * n + cx`.
pub fn trace_ray(p: (f64, f64), q: (f64, f64), n: usize) -> Vec<(usize, f64)> {
    let (dx, dy) = (q.0 - p.0, q.1 - p.1);
    let len = dx.hypot(dy);
    let mut ts = vec![0.0, 1.0];
    for (d, p0) in [(dx, p.0), (dy, p.1)] {
        if d.abs() > 1e-15 {
            for k in 0..=n {
                let t = (k as f64 - p0) / d;
                if t > 0.0 && t < 1.0 {
                    ts.push(t);
                }
            }
        }
    }
    ts.sort_by(f64::total_cmp);
    let mut out: Vec<(usize, f64)> = Vec::new();
    let last = n as f64 - 1.0;
    for w in ts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a <= 1e-14 {
            continue;
        }
        let tm = 0.5 * (a + b);
        let cx = (p.0 + tm * dx).floor().clamp(0.0, last) as usize;
        let cy = (p.1 + tm * dy).floor().clamp(0.0, last) as usize;
        let cell = cy * n + cx;
        match out.iter_mut().find(|(c, _)| *c == cell) {
            Some(e) => e.1 += (b - a) * len,
            None => out.push((cell, (b - a) * len)),
        }
    }
    out
}

/// Smooth nonnegative phantom: three Gaussian bumps on the `n x n` grid,
/// repeated over `layers` copies of the grid.
fn phantom(rng: &mut Prng, n: usize, layers: usize) -> Vec<f64> {
    let nf = n as f64;
    let bumps: Vec<(f64, f64, f64, f64)> = (0..3)
        .map(|_| {
            let cx = rng.uniform() * nf;
            let cy = rng.uniform() * nf;
            let w = nf / 8.0 + rng.uniform() * nf / 8.0;
            let a = 0.5 + rng.uniform();
            (cx, cy, w, a)
        })
        .collect();
    let cells = n * n;
    (0..layers * cells)
        .map(|k| {
            let cell = k % cells;
            let px = (cell % n) as f64 + 0.5;
            let py = (cell / n) as f64 + 0.5;
            bumps
                .iter()
                .map(|&(cx, cy, w, a)| {
                    let r2 = (px - cx).powi(2) + (py - cy).powi(2);
                    a * (-r2 / (2.0 * w * w)).exp()
                })
                .sum()
        })
        .collect()
}

/// Tomography-style underdetermined system of size `N^2 x dN^2`.
///
/// `d N^2` random lines are cast across an `N x N` pixel grid, with
/// endpoints uniform on the grid boundary and on different sides. Entry
/// `(p, l)` is the length of line `l` inside pixel `p`. The unknowns are a
/// phantom sampled over `d` copies of the grid and `y = X beta`.
pub fn gen_tomography(spec: &TomoSpec) -> Result<LinearSystem> {
    spec.validate()?;
    let n = spec.grid_n;
    let cells = n * n;
    let lines = spec.oversample * cells;
    retry(spec.seed, |seed| {
        let mut rng = Prng::new(seed);
        let mut data = vec![0.0; cells * lines];
        for l in 0..lines {
            let (p, side) = boundary_point(&mut rng, n as f64);
            let q = loop {
                let (q, s) = boundary_point(&mut rng, n as f64);
                if s != side {
                    break q;
                }
            };
            for (cell, len) in trace_ray(p, q, n) {
                data[cell * lines + l] = len;
            }
        }
        let x = DenseMatrix::new(cells, lines, data)?;
        if x.row_norms_sq().contains(&0.0) {
            return Ok(None);
        }
        let beta = phantom(&mut rng, n, spec.oversample);
        let y = x.matvec(&beta)?;
        let reference = least_norm_ref(&x, &y)?;
        Ok(Some(
            LinearSystem::new(x, y, Regime::Underdetermined, Some(reference), None)?
                .with_seed(seed),
        ))
    })
}

pub fn save_system(sys: &LinearSystem, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_matrix(&dir.join("X.txt"), sys.x())?;
    write_vector(&dir.join("y.txt"), sys.y())?;
    if let Some(r) = sys.reference() {
        write_vector(&dir.join("reference.txt"), r)?;
    }
    if let Some(r) = sys.residual_ref() {
        write_vector(&dir.join("residual.txt"), r)?;
    }
    let mut meta = format!("regime {}\n", sys.regime());
    if let Some(seed) = sys.seed() {
        let _ = writeln!(meta, "seed {seed}");
    }
    let path = dir.join("meta.txt");
    fs::write(&path, meta).map_err(|e| Error::io(&path, e))
}

pub fn load_system(dir: &Path) -> Result<LinearSystem> {
    let meta_path = dir.join("meta.txt");
    let meta = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let mut regime = None;
    let mut seed = None;
    for (k, line) in meta.lines().enumerate() {
        let parse_err = |msg: String| Error::Parse {
            path: meta_path.clone(),
            line: k + 1,
            msg,
        };
        match line.split_whitespace().collect::<Vec<_>>()[..] {
            [] => {}
            ["regime", r] => {
                regime = Some(r.parse::<Regime>().map_err(|e| parse_err(e.to_string()))?)
            }
            ["seed", s] => {
                seed = Some(
                    s.parse::<u64>()
                        .map_err(|_| parse_err(format!("bad seed '{s}'")))?,
                )
            }
            _ => return Err(parse_err(format!("unrecognised line '{line}'"))),
        }
    }
    let regime = regime.ok_or_else(|| Error::Parse {
        path: meta_path.clone(),
        line: meta.lines().count() + 1,
        msg: "missing 'regime' line".into(),
    })?;
    let x = read_matrix(&dir.join("X.txt"))?;
    let y = read_vector(&dir.join("y.txt"))?;
    let optional = |name: &str| -> Result<Option<Vec<f64>>> {
        let p = dir.join(name);
        if p.exists() {
            read_vector(&p).map(Some)
        } else {
            Ok(None)
        }
    };
    let reference = optional("reference.txt")?;
    let residual = optional("residual.txt")?;
    let sys = LinearSystem::new(x, y, regime, reference, residual)?;
    Ok(match seed {
        Some(s) => sys.with_seed(s),
        None => sys,
    })
}
