//! Ready-made scalar fields for the estimators.
//!
//! Fields on positions take `(&Complex, &Point)`; fields on phase space
//! take `(&Complex, &PhasePoint)`. Absorbed paths never reach a field (the
//! estimators substitute zero for the cemetery).

use crate::complex::{Complex, Point};
use crate::geodesic::PhasePoint;

/// Indicator of the metric ball around `center`.
///
/// The distance comes from [`Complex::distance`], which is exact on
/// embedded complexes, on one-complexes, and whenever the two points share
/// a maximal simplex (enough for balls inside the star of the center, e.g.
/// any ball around a spine point of a fan). Points with no computable
/// distance are treated as outside.
pub fn ball_indicator(
    center: Point,
    radius: f64,
) -> impl Fn(&Complex, &Point) -> f64 + Sync {
    move |c, p| match c.distance(&center, p) {
        Some(d) if d <= radius => 1.0,
        _ => 0.0,
    }
}

/// The constant field.
pub fn constant(value: f64) -> impl Fn(&Complex, &Point) -> f64 + Sync {
    move |_, _| value
}

/// Projection of the direction onto a fixed chart vector, as a field on
/// phase space.
pub fn dir_component(e: Vec<f64>) -> impl Fn(&Complex, &PhasePoint) -> f64 + Sync {
    move |_, z| crate::linalg::dot(&z.dir, &e)
}

/// Squared projection of the direction onto a fixed chart vector.
pub fn dir_component_sq(e: Vec<f64>) -> impl Fn(&Complex, &PhasePoint) -> f64 + Sync {
    move |_, z| {
        let d = crate::linalg::dot(&z.dir, &e);
        d * d
    }
}
