//! Small fixed-size linear algebra for LDraw placements.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Comparison tolerance for coordinates, in LDU.
pub const COORD_TOLERANCE: f64 = 0.5;

/// A point or offset in LDraw units. `-y` is up.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn min(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    pub fn max(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }

    /// True when every component differs by at most `tol`.
    pub fn approx_eq(self, o: Vec3, tol: f64) -> bool {
        (self.x - o.x).abs() <= tol && (self.y - o.y).abs() <= tol && (self.z - o.z).abs() <= tol
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

/// Row-major 3×3 matrix, laid out as LDraw's `a b c d e f g h i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat3(pub [f64; 9]);

impl Default for Mat3 {
    fn default() -> Self {
        Mat3::IDENTITY
    }
}

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3([1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);

    pub fn transform(&self, v: Vec3) -> Vec3 {
        let m = &self.0;
        Vec3::new(
            m[0] * v.x + m[1] * v.y + m[2] * v.z,
            m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z,
        )
    }

    pub fn transpose(&self) -> Mat3 {
        let m = &self.0;
        Mat3([m[0], m[3], m[6], m[1], m[4], m[7], m[2], m[5], m[8]])
    }

    pub fn approx_eq(&self, o: &Mat3, tol: f64) -> bool {
        self.0.iter().zip(o.0.iter()).all(|(a, b)| (a - b).abs() <= tol)
    }

    /// Which of the four quarter-turn yaw rotations this matrix is, if any.
    pub fn as_yaw(&self) -> Option<Yaw> {
        Yaw::ALL.into_iter().find(|y| y.matrix().approx_eq(self, 1e-6))
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, o: Mat3) -> Mat3 {
        let a = &self.0;
        let b = &o.0;
        let mut out = [0.0; 9];
        for r in 0..3 {
            for c in 0..3 {
                out[r * 3 + c] = (0..3).map(|k| a[r * 3 + k] * b[k * 3 + c]).sum();
            }
        }
        Mat3(out)
    }
}

/// Quarter-turn rotation about the vertical axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Yaw {
    #[default]
    R0,
    R90,
    R180,
    R270,
}

impl Yaw {
    pub const ALL: [Yaw; 4] = [Yaw::R0, Yaw::R90, Yaw::R180, Yaw::R270];

    pub fn from_degrees(deg: i64) -> Option<Yaw> {
        match deg.rem_euclid(360) {
            0 => Some(Yaw::R0),
            90 => Some(Yaw::R90),
            180 => Some(Yaw::R180),
            270 => Some(Yaw::R270),
            _ => None,
        }
    }

    pub fn degrees(self) -> i64 {
        match self {
            Yaw::R0 => 0,
            Yaw::R90 => 90,
            Yaw::R180 => 180,
            Yaw::R270 => 270,
        }
    }

    pub fn inverse(self) -> Yaw {
        Yaw::from_degrees(-self.degrees()).unwrap()
    }

    pub fn then(self, other: Yaw) -> Yaw {
        Yaw::from_degrees(self.degrees() + other.degrees()).unwrap()
    }

    /// True for 90° and 270°, which swap the x and z extents of a footprint.
    pub fn swaps_axes(self) -> bool {
        matches!(self, Yaw::R90 | Yaw::R270)
    }

    /// Exact integer rotation matrix about +y, in LDraw's convention.
    pub fn matrix(self) -> Mat3 {
        let (c, s) = match self {
            Yaw::R0 => (1.0, 0.0),
            Yaw::R90 => (0.0, 1.0),
            Yaw::R180 => (-1.0, 0.0),
            Yaw::R270 => (0.0, -1.0),
        };
        Mat3([c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c])
    }
}
