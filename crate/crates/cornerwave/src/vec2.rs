//! Small helpers for planar vectors stored as `[f64; 2]`.

pub type V2 = [f64; 2];

#[inline]
pub fn add(a: V2, b: V2) -> V2 {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn sub(a: V2, b: V2) -> V2 {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn scale(a: V2, s: f64) -> V2 {
    [a[0] * s, a[1] * s]
}

#[inline]
pub fn dot(a: V2, b: V2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// z-component of the cross product, positive when `b` is counterclockwise
/// from `a`.
#[inline]
pub fn cross(a: V2, b: V2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn norm(a: V2) -> f64 {
    a[0].hypot(a[1])
}

#[inline]
pub fn unit(a: V2) -> V2 {
    let n = norm(a);
    [a[0] / n, a[1] / n]
}

/// Rotation by +90 degrees (counterclockwise).
#[inline]
pub fn rot90(a: V2) -> V2 {
    [-a[1], a[0]]
}

/// Unit vector at polar angle `t`.
#[inline]
pub fn dir(t: f64) -> V2 {
    [t.cos(), t.sin()]
}

/// Polar angle in (-pi, pi].
#[inline]
pub fn angle(a: V2) -> f64 {
    a[1].atan2(a[0])
}
