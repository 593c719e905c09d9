use super::{KernelKind, SvrError, SvrHyperParams};

/// A point the SVR can work with: anything with an inner product and a
/// squared Euclidean distance.
pub trait KernelPoint {
    fn dim(&self) -> usize;

    fn dot(&self, other: &Self) -> f64;

    fn squared_distance(&self, other: &Self) -> f64;

    fn is_finite(&self) -> bool;

    /// Whether the two points live in the same space.
    fn same_shape(&self, other: &Self) -> bool {
        self.dim() == other.dim()
    }
}

impl KernelPoint for Vec<f64> {
    fn dim(&self) -> usize {
        self.len()
    }

    fn dot(&self, other: &Self) -> f64 {
        self.iter().zip(other).map(|(a, b)| a * b).sum()
    }

    fn squared_distance(&self, other: &Self) -> f64 {
        self.iter().zip(other).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    fn is_finite(&self) -> bool {
        self.iter().all(|x| x.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn from_params(params: &SvrHyperParams) -> Self {
        match params.kernel {
            KernelKind::Linear => Self::Linear,
            KernelKind::Rbf => Self::Rbf { gamma: params.gamma },
        }
    }

    /// Evaluates without a shape check.
    pub fn eval<P: KernelPoint>(&self, x: &P, z: &P) -> f64 {
        match *self {
            Self::Linear => x.dot(z),
            Self::Rbf { gamma } => (-gamma * x.squared_distance(z)).exp(),
        }
    }
}

/// `<x, z>` for the linear kernel, `exp(-gamma * |x - z|^2)` for RBF.
pub fn kernel_eval<P: KernelPoint>(params: &SvrHyperParams, x: &P, z: &P) -> Result<f64, SvrError> {
    if !x.same_shape(z) {
        return Err(SvrError::DimensionMismatch {
            expected: x.dim(),
            found: z.dim(),
        });
    }
    Ok(Kernel::from_params(params).eval(x, z))
}
