use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    Periodic,
    /// Velocity `wall` imposed at `y = 0`, zero velocity at `y = L`; the
    /// stress is mirrored into the ghost cells.
    DirichletVelocity {
        wall: f64,
    },
}

/// Uniform 1D grid on `[0, L)` with cell-centred states.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D<const N: usize> {
    pub n: usize,
    pub h: f64,
    pub length: f64,
    pub boundary: Boundary,
    pub cells: Vec<[f64; N]>,
}

impl<const N: usize> Grid1D<N> {
    pub fn from_fn(n: usize, length: f64, boundary: Boundary, f: impl Fn(f64) -> [f64; N]) -> Result<Self> {
        if n < 4 {
            return Err(Error::validation("n", format!("need at least 4 cells, got {n}")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::validation("length", "must be positive and finite"));
        }
        let h = length / n as f64;
        Ok(Self { n, h, length, boundary, cells: (0..n).map(|i| f(Self::center_of(i, h))).collect() })
    }

    fn center_of(i: usize, h: f64) -> f64 {
        (i as f64 + 0.5) * h
    }

    pub fn center(&self, i: usize) -> f64 {
        Self::center_of(i, self.h)
    }
}

/// Uniform periodic 2D material grid on `[0, La) × [0, Lb)`, row-major with
/// `a` varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D<const N: usize> {
    pub nx: usize,
    pub ny: usize,
    pub ha: f64,
    pub hb: f64,
    pub cells: Vec<[f64; N]>,
}

impl<const N: usize> Grid2D<N> {
    pub fn from_fn(nx: usize, ny: usize, la: f64, lb: f64, f: impl Fn(f64, f64) -> [f64; N]) -> Result<Self> {
        if nx < 4 || ny < 4 {
            return Err(Error::validation("nx/ny", format!("need at least 4 cells per axis, got {nx} x {ny}")));
        }
        if !(la > 0.0 && lb > 0.0 && la.is_finite() && lb.is_finite()) {
            return Err(Error::validation("length", "must be positive and finite"));
        }
        let (ha, hb) = (la / nx as f64, lb / ny as f64);
        let mut cells = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                cells.push(f((i as f64 + 0.5) * ha, (j as f64 + 0.5) * hb));
            }
        }
        Ok(Self { nx, ny, ha, hb, cells })
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx, idx / self.nx)
    }

    pub fn center(&self, idx: usize) -> (f64, f64) {
        let (i, j) = self.coords(idx);
        ((i as f64 + 0.5) * self.ha, (j as f64 + 0.5) * self.hb)
    }

    /// Periodic neighbours `(a−, a+, b−, b+)` of a cell.
    pub fn neighbours(&self, idx: usize) -> [usize; 4] {
        let (i, j) = self.coords(idx);
        let (nx, ny) = (self.nx, self.ny);
        [
            self.index((i + nx - 1) % nx, j),
            self.index((i + 1) % nx, j),
            self.index(i, (j + ny - 1) % ny),
            self.index(i, (j + 1) % ny),
        ]
    }

    pub fn cell_area(&self) -> f64 {
        self.ha * self.hb
    }
}
