use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Rolling resistance coefficient over the terrain.
#[derive(Debug, Clone, PartialEq)]
pub enum RollingResistance {
    Uniform(f64),
    /// One value per grid node, same layout as the heights.
    PerCell(Vec<f64>),
}

/// Height field on a regular grid with bilinear interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct TerrainProfile {
    pub origin: [f64; 2],
    pub grid_spacing: f64,
    pub nx: usize,
    pub ny: usize,
    /// Row-major heights, `heights[j * nx + i]` at `origin + (i, j) * spacing`.
    pub heights: Vec<f64>,
    pub rolling_resistance: RollingResistance,
    pub gravity: f64,
}

impl TerrainProfile {
    pub fn new(
        origin: [f64; 2],
        grid_spacing: f64,
        nx: usize,
        ny: usize,
        heights: Vec<f64>,
        rolling_resistance: RollingResistance,
        gravity: f64,
    ) -> Result<Self> {
        if !(grid_spacing > 0.0) {
            return Err(Error::domain("grid spacing", grid_spacing, "> 0"));
        }
        if !(gravity > 0.0) {
            return Err(Error::domain("gravity", gravity, "> 0"));
        }
        if nx < 2 || ny < 2 || heights.len() != nx * ny {
            return Err(Error::config(
                "terrain.heights",
                format!("need a grid of at least 2x2 with {nx}x{ny} values, got {}", heights.len()),
            ));
        }
        match &rolling_resistance {
            RollingResistance::Uniform(c) if !(*c >= 0.0) => {
                return Err(Error::domain("rolling resistance coefficient", *c, ">= 0"));
            }
            RollingResistance::PerCell(cells) => {
                if cells.len() != heights.len() {
                    return Err(Error::config("terrain.rolling_resistance", "grid size differs from heights"));
                }
                if let Some(c) = cells.iter().find(|c| !(**c >= 0.0)) {
                    return Err(Error::domain("rolling resistance coefficient", *c, ">= 0"));
                }
            }
            _ => {}
        }
        Ok(Self {
            origin,
            grid_spacing,
            nx,
            ny,
            heights,
            rolling_resistance,
            gravity,
        })
    }

    /// Samples `surface` on a grid covering `[x_min, x_max] x [y_min, y_max]`.
    pub fn sample(
        bounds: [f64; 4],
        grid_spacing: f64,
        surface: impl Fn(f64, f64) -> f64,
        rolling_resistance: impl FnOnce(usize) -> RollingResistance,
        gravity: f64,
    ) -> Result<Self> {
        if !(grid_spacing > 0.0) {
            return Err(Error::domain("grid spacing", grid_spacing, "> 0"));
        }
        let [x0, x1, y0, y1] = bounds;
        let nx = ((x1 - x0) / grid_spacing).ceil().max(1.0) as usize + 1;
        let ny = ((y1 - y0) / grid_spacing).ceil().max(1.0) as usize + 1;
        let mut heights = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            let y = y0 + j as f64 * grid_spacing;
            for i in 0..nx {
                heights.push(surface(x0 + i as f64 * grid_spacing, y));
            }
        }
        let rr = rolling_resistance(nx * ny);
        Self::new([x0, y0], grid_spacing, nx, ny, heights, rr, gravity)
    }

    pub fn extent(&self) -> [f64; 4] {
        [
            self.origin[0],
            self.origin[0] + (self.nx - 1) as f64 * self.grid_spacing,
            self.origin[1],
            self.origin[1] + (self.ny - 1) as f64 * self.grid_spacing,
        ]
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let [x0, x1, y0, y1] = self.extent();
        x >= x0 && x <= x1 && y >= y0 && y <= y1
    }

    fn cell(&self, x: f64, y: f64) -> Result<(usize, usize, f64, f64)> {
        if !self.contains(x, y) {
            return Err(Error::OffTerrain { x, y });
        }
        let u = (x - self.origin[0]) / self.grid_spacing;
        let v = (y - self.origin[1]) / self.grid_spacing;
        let i = (u.floor() as usize).min(self.nx - 2);
        let j = (v.floor() as usize).min(self.ny - 2);
        Ok((i, j, u - i as f64, v - j as f64))
    }

    fn h(&self, i: usize, j: usize) -> f64 {
        self.heights[j * self.nx + i]
    }

    pub fn height(&self, x: f64, y: f64) -> Result<f64> {
        let (i, j, fx, fy) = self.cell(x, y)?;
        let (h00, h10, h01, h11) = (self.h(i, j), self.h(i + 1, j), self.h(i, j + 1), self.h(i + 1, j + 1));
        Ok((1.0 - fx) * (1.0 - fy) * h00 + fx * (1.0 - fy) * h10 + (1.0 - fx) * fy * h01 + fx * fy * h11)
    }

    /// Gradient of the bilinear interpolant `(dh/dx, dh/dy)`.
    pub fn gradient(&self, x: f64, y: f64) -> Result<[f64; 2]> {
        let (i, j, fx, fy) = self.cell(x, y)?;
        let (h00, h10, h01, h11) = (self.h(i, j), self.h(i + 1, j), self.h(i, j + 1), self.h(i + 1, j + 1));
        let s = self.grid_spacing;
        Ok([
            ((1.0 - fy) * (h10 - h00) + fy * (h11 - h01)) / s,
            ((1.0 - fx) * (h01 - h00) + fx * (h11 - h10)) / s,
        ])
    }

    /// Rolling resistance at the nearest grid node.
    pub fn rolling_resistance_at(&self, x: f64, y: f64) -> Result<f64> {
        match &self.rolling_resistance {
            RollingResistance::Uniform(c) => {
                if self.contains(x, y) {
                    Ok(*c)
                } else {
                    Err(Error::OffTerrain { x, y })
                }
            }
            RollingResistance::PerCell(cells) => {
                let (i, j, fx, fy) = self.cell(x, y)?;
                let i = i + usize::from(fx >= 0.5);
                let j = j + usize::from(fy >= 0.5);
                Ok(cells[j * self.nx + i])
            }
        }
    }
}

/// Sum of seeded plane waves whose steepest gradient is exactly `tan(max_slope)`.
pub(crate) fn rolling_surface(
    seed: u64,
    max_slope: f64,
    wavelengths: [f64; 2],
    components: usize,
) -> impl Fn(f64, f64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let waves: Vec<(f64, f64, f64, f64)> = (0..components.max(1))
        .map(|_| {
            let lambda = if wavelengths[1] > wavelengths[0] {
                rng.gen_range(wavelengths[0]..wavelengths[1])
            } else {
                wavelengths[0]
            };
            let k = std::f64::consts::TAU / lambda;
            let dir = rng.gen_range(0.0..std::f64::consts::TAU);
            let phase = rng.gen_range(0.0..std::f64::consts::TAU);
            let weight = rng.gen_range(0.5..1.0);
            (k, dir, phase, weight)
        })
        .collect();
    // |grad h| <= sum A_k k_k; scale amplitudes so the bound equals tan(max_slope)
    let bound: f64 = waves.iter().map(|(k, _, _, w)| w * k).sum();
    let scale = max_slope.tan() / bound;
    move |x, y| {
        waves
            .iter()
            .map(|&(k, dir, phase, w)| w * scale * (k * (x * dir.cos() + y * dir.sin()) + phase).sin())
            .sum()
    }
}

pub(crate) fn patchy_resistance(seed: u64, min: f64, max: f64, n: usize) -> RollingResistance {
    // separate stream from the height field
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_c0ef_f1c1_e475);
    if max > min {
        RollingResistance::PerCell((0..n).map(|_| rng.gen_range(min..max)).collect())
    } else {
        RollingResistance::Uniform(min)
    }
}
