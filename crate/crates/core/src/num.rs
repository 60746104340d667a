use std::fmt::{Debug, Display};

/// Floating point scalar used for rule scores and statistics: `f32` or `f64`.
pub trait Real:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    fn from_minutes(m: i64) -> Self {
        Self::from_i64(m).expect("minute count representable as float")
    }

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable as float")
    }

    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable as float")
    }
}

impl Real for f32 {}
impl Real for f64 {}
