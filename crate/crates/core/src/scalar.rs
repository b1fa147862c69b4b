use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar the library is generic over: `f32` or `f64`.
pub trait Scalar: RealField + Copy + FromPrimitive + ToPrimitive + Default + Send + Sync + 'static {
    /// Converts an `f64` literal; every value used this way is representable.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Tolerance floor that scales with the type's precision: `max(tol, eps * factor)`.
    #[inline]
    fn tol(tol: f64, factor: f64) -> Self {
        let eps = Self::default_epsilon().to_f64_lossy();
        Self::lit(tol.max(eps * factor))
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
