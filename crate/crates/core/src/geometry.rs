//! Random placement of access points and user terminals in the circular
//! service region, and 3-D transmitter-receiver distances.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::Error;
use crate::math::{cos, sin, sqrt};
use crate::rng::Stream;
use crate::Result;

/// 2-D point in meters, relative to the disk center.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    #[inline]
    pub fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        sqrt(self.x * self.x + self.y * self.y)
    }

    #[inline]
    pub fn distance_to(&self, other: &Point2) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        sqrt(dx * dx + dy * dy)
    }
}

/// One placement of service antennas and user terminals.
#[derive(Clone, Debug)]
pub struct Placement {
    pub ap_positions: Vec<Point2>,
    pub user_positions: Vec<Point2>,
    pub ap_height_m: f64,
    pub user_height_m: f64,
    pub radius_m: f64,
}

impl Placement {
    pub fn new(
        ap_positions: Vec<Point2>,
        user_positions: Vec<Point2>,
        ap_height_m: f64,
        user_height_m: f64,
        radius_m: f64,
    ) -> Result<Self> {
        if ap_positions.is_empty() || user_positions.is_empty() {
            return Err(Error::config(
                "placement needs at least one AP and one user",
            ));
        }
        if ap_height_m.is_nan() || user_height_m.is_nan() || ap_height_m <= user_height_m {
            return Err(Error::config(
                "service antennas must sit above the user terminals",
            ));
        }
        let limit = radius_m * (1.0 + 1e-12);
        for p in ap_positions.iter().chain(user_positions.iter()) {
            if p.norm() > limit {
                return Err(Error::config("point outside the service disk"));
            }
        }
        Ok(Placement {
            ap_positions,
            user_positions,
            ap_height_m,
            user_height_m,
            radius_m,
        })
    }

    #[inline]
    pub fn num_aps(&self) -> usize {
        self.ap_positions.len()
    }

    #[inline]
    pub fn num_users(&self) -> usize {
        self.user_positions.len()
    }

    /// All service antennas at one point (the cellular tower case).
    pub fn is_colocated(&self) -> bool {
        let first = self.ap_positions[0];
        self.ap_positions.iter().all(|p| *p == first)
    }

    /// 3-D slant distance between AP `m` and user `k`.
    #[inline]
    pub fn link_distance_m(&self, m: usize, k: usize) -> f64 {
        link_distance(
            self.ap_positions[m],
            self.ap_height_m,
            self.user_positions[k],
            self.user_height_m,
        )
    }
}

/// Draw `count` points i.i.d. uniform over the disk of radius `radius_m`.
///
/// Radius is taken as `R*sqrt(u)` so density is proportional to area; a
/// plain `R*u` draw would cluster points at the center.
pub fn place_uniform_disk(count: usize, radius_m: f64, stream: &mut Stream) -> Result<Vec<Point2>> {
    if count == 0 {
        return Err(Error::config("placement count must be at least 1"));
    }
    if radius_m < 0.0 {
        return Err(Error::config("disk radius must be nonnegative"));
    }
    let mut points = Vec::with_capacity(count);
    for _ in 0..count {
        let r = radius_m * sqrt(stream.uniform());
        let theta = 2.0 * PI * stream.uniform();
        points.push(Point2::new(r * cos(theta), r * sin(theta)));
    }
    Ok(points)
}

/// All `m` service antennas at the disk center.
pub fn place_colocated(m: usize, _radius_m: f64) -> Result<Vec<Point2>> {
    if m == 0 {
        return Err(Error::config("placement count must be at least 1"));
    }
    Ok(vec![Point2::ORIGIN; m])
}

/// 3-D distance between an elevated antenna and a user terminal.
#[inline]
pub fn link_distance(ap: Point2, ap_height_m: f64, user: Point2, user_height_m: f64) -> f64 {
    let horizontal = ap.distance_to(&user);
    let vertical = ap_height_m - user_height_m;
    sqrt(horizontal * horizontal + vertical * vertical)
}
