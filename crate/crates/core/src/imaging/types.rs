use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// `(rows, cols)`.
pub type Shape = (usize, usize);

macro_rules! complex_grid {
    ($(#[$meta:meta])* $name:ident, $what:literal) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name {
            data: Array2<Complex64>,
        }

        impl $name {
            /// Wraps `data`, rejecting empty or non-finite arrays.
            pub fn new(data: Array2<Complex64>) -> Result<Self> {
                let (h, w) = data.dim();
                if h == 0 || w == 0 {
                    return Err(Error::invalid_input(format!("{} must be non-empty, got {h}x{w}", $what)));
                }
                if let Some(((i, j), v)) = data.indexed_iter().find(|(_, v)| !v.is_finite()) {
                    return Err(Error::invalid_input(format!("{} has non-finite value {v} at ({i}, {j})", $what)));
                }
                Ok(Self { data })
            }

            /// Wraps `data` without validation. Callers guarantee finiteness.
            pub(crate) fn from_raw(data: Array2<Complex64>) -> Self {
                Self { data }
            }

            pub fn from_real(data: &Array2<f64>) -> Result<Self> {
                Self::new(data.mapv(|v| Complex64::new(v, 0.0)))
            }

            pub fn zeros(shape: Shape) -> Self {
                Self { data: Array2::zeros(shape) }
            }

            pub fn shape(&self) -> Shape {
                self.data.dim()
            }

            pub fn len(&self) -> usize {
                self.data.len()
            }

            pub fn is_empty(&self) -> bool {
                self.data.is_empty()
            }

            pub fn data(&self) -> &Array2<Complex64> {
                &self.data
            }

            pub fn data_mut(&mut self) -> &mut Array2<Complex64> {
                &mut self.data
            }

            pub fn into_data(self) -> Array2<Complex64> {
                self.data
            }

            pub fn is_finite(&self) -> bool {
                self.data.iter().all(|v| v.is_finite())
            }

            /// Euclidean norm over all entries.
            pub fn norm(&self) -> f64 {
                self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
            }

            pub fn magnitude(&self) -> Array2<f64> {
                self.data.mapv(|v| v.norm())
            }
        }
    };
}

complex_grid!(
    /// A complex-valued image.
    ComplexImage,
    "image"
);

complex_grid!(
    /// Centered k-space samples; DC at `(H / 2, W / 2)`.
    KSpace,
    "k-space"
);

impl ComplexImage {
    pub fn real_part(&self) -> Array2<f64> {
        self.data.mapv(|v| v.re)
    }

    /// True when every imaginary part is exactly zero and every real part is
    /// non-negative.
    pub fn is_real_nonnegative(&self) -> bool {
        self.data.iter().all(|v| v.im == 0.0 && v.re >= 0.0)
    }
}

/// Per-coil k-space with a shared shape.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiCoilKSpace {
    coils: Vec<KSpace>,
}

impl MultiCoilKSpace {
    pub fn new(coils: Vec<KSpace>) -> Result<Self> {
        let first = coils
            .first()
            .ok_or_else(|| Error::invalid_input("multi-coil k-space needs at least one coil"))?
            .shape();
        if let Some((c, k)) = coils.iter().enumerate().find(|(_, k)| k.shape() != first) {
            return Err(Error::invalid_input(format!(
                "coil {c} has shape {:?}, expected {first:?}",
                k.shape()
            )));
        }
        Ok(Self { coils })
    }

    pub fn coils(&self) -> &[KSpace] {
        &self.coils
    }

    pub fn into_coils(self) -> Vec<KSpace> {
        self.coils
    }

    pub fn n_coils(&self) -> usize {
        self.coils.len()
    }

    pub fn shape(&self) -> Shape {
        self.coils[0].shape()
    }
}
