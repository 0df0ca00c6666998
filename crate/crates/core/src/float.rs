//! `f64` math for `no_std` builds, backed by `libm`.

#[allow(dead_code)]
pub(crate) trait Real: Copy {
    fn acos(self) -> Self;
    fn ceil(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn exp2(self) -> Self;
    fn floor(self) -> Self;
    fn hypot(self, other: Self) -> Self;
    fn ln(self) -> Self;
    fn log2(self) -> Self;
    fn powf(self, e: Self) -> Self;
    fn powi(self, e: i32) -> Self;
    fn round(self) -> Self;
    fn sin(self) -> Self;
    fn sin_cos(self) -> (Self, Self);
    fn sqrt(self) -> Self;
}

impl Real for f64 {
    fn acos(self) -> f64 {
        libm::acos(self)
    }
    fn ceil(self) -> f64 {
        libm::ceil(self)
    }
    fn cos(self) -> f64 {
        libm::cos(self)
    }
    fn exp(self) -> f64 {
        libm::exp(self)
    }
    fn exp2(self) -> f64 {
        libm::exp2(self)
    }
    fn floor(self) -> f64 {
        libm::floor(self)
    }
    fn hypot(self, other: f64) -> f64 {
        libm::hypot(self, other)
    }
    fn ln(self) -> f64 {
        libm::log(self)
    }
    fn log2(self) -> f64 {
        libm::log2(self)
    }
    fn powf(self, e: f64) -> f64 {
        libm::pow(self, e)
    }
    fn powi(self, e: i32) -> f64 {
        libm::pow(self, e as f64)
    }
    fn round(self) -> f64 {
        libm::round(self)
    }
    fn sin(self) -> f64 {
        libm::sin(self)
    }
    fn sin_cos(self) -> (f64, f64) {
        libm::sincos(self)
    }
    fn sqrt(self) -> f64 {
        libm::sqrt(self)
    }
}
