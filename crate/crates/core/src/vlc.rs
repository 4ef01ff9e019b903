//! Line-of-sight Lambertian channel between a downward-facing aerial LED and
//! upward-facing ground photodetectors.
//!
//! The DC gain of a user at distance `d` from the LED is
//!
//! ```text
//! h = A / d² · R0(φ) · Ts · g(ψ) · cos(ψ)     for 0 ≤ ψ ≤ Φ
//! h = 0                                       otherwise
//! ```
//!
//! with `R0(φ) = (ν + 1) / (2π) · cosᵛ(φ)` and `g(ψ) = q² / sin²(Φ)`. Both the
//! irradiance angle `φ` and the incidence angle `ψ` satisfy `cos = h / d`
//! because the LED points straight down and the receivers point straight up.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical constants of the LED/photodetector chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VlcParams {
    /// LED semiangle at half power, degrees.
    pub semiangle_half_power: f64,
    /// Receiver field of view, degrees.
    pub fov: f64,
    /// Photodetector area, m².
    pub detection_area: f64,
    pub optical_filter_gain: f64,
    /// Concentrator refractive index.
    pub refractive_index: f64,
}

impl Default for VlcParams {
    fn default() -> Self {
        Self {
            semiangle_half_power: 60.0,
            fov: 60.0,
            detection_area: 1e-4,
            optical_filter_gain: 1.0,
            refractive_index: 1.5,
        }
    }
}

impl VlcParams {
    pub fn validate(&self) -> Result<()> {
        let p = self;
        if !(p.semiangle_half_power > 0.0 && p.semiangle_half_power < 90.0) {
            return Err(Error::InvalidConfig(format!(
                "semiangle_half_power must lie in (0, 90) degrees, got {}",
                p.semiangle_half_power
            )));
        }
        if !(p.fov > 0.0 && p.fov <= 90.0) {
            return Err(Error::InvalidConfig(format!(
                "fov must lie in (0, 90] degrees, got {}",
                p.fov
            )));
        }
        if !(p.detection_area > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "detection_area must be positive, got {}",
                p.detection_area
            )));
        }
        if !(p.optical_filter_gain > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "optical_filter_gain must be positive, got {}",
                p.optical_filter_gain
            )));
        }
        if !(p.refractive_index >= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "refractive_index must be at least 1, got {}",
                p.refractive_index
            )));
        }
        Ok(())
    }

    pub fn fov_radians(&self) -> f64 {
        self.fov.to_radians()
    }
}

/// A point in the local Cartesian frame, meters. Ground users sit at `z = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position3D {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position3D {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub const fn ground(x: f64, y: f64) -> Self {
        Self { x, y, z: 0.0 }
    }

    pub fn horizontal_distance(&self, other: &Position3D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Lambertian emission order `ν` of the LED.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LambertianOrder(f64);

impl LambertianOrder {
    pub fn new(nu: f64) -> Result<Self> {
        if nu > 0.0 && nu.is_finite() {
            Ok(Self(nu))
        } else {
            Err(Error::Domain(format!(
                "Lambertian order must be positive, got {nu}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `ν = −ln 2 / ln(cos φ½)` for a half-power semiangle given in degrees.
pub fn lambertian_order(semiangle_half_power: f64) -> Result<LambertianOrder> {
    if !(semiangle_half_power > 0.0 && semiangle_half_power < 90.0) {
        return Err(Error::Domain(format!(
            "semiangle must lie in (0, 90) degrees, got {semiangle_half_power}"
        )));
    }
    // cos(60°) evaluates to 0.5000000000000001; snap so the common case is exact.
    let cos = semiangle_half_power.to_radians().cos();
    let nu = if (cos - 0.5).abs() < 4.0 * f64::EPSILON {
        1.0
    } else {
        -std::f64::consts::LN_2 / cos.ln()
    };
    LambertianOrder::new(nu)
}

/// Radiant intensity `(ν + 1)/(2π) · cosᵛ(φ)`; zero at or beyond grazing.
pub fn radiant_intensity(order: LambertianOrder, irradiance_angle: f64) -> f64 {
    if !(irradiance_angle.abs() < PI / 2.0) {
        return 0.0;
    }
    let nu = order.value();
    (nu + 1.0) / (2.0 * PI) * irradiance_angle.cos().powf(nu)
}

/// Optical concentrator gain `q² / sin²(Φ)` inside the field of view, else 0.
pub fn concentrator_gain(params: &VlcParams, incidence_angle: f64) -> f64 {
    let fov = params.fov_radians();
    if (0.0..=fov).contains(&incidence_angle) {
        let s = fov.sin();
        params.refractive_index * params.refractive_index / (s * s)
    } else {
        0.0
    }
}

/// DC channel gain from the LED at `uav` to a ground receiver at `user`.
pub fn channel_gain(
    params: &VlcParams,
    order: LambertianOrder,
    uav: Position3D,
    user: Position3D,
) -> Result<f64> {
    let h = uav.z - user.z;
    if !(h > 0.0) {
        return Err(Error::Domain(format!(
            "UAV must hover above the receiver plane, altitude difference {h}"
        )));
    }
    let d2 = (uav.x - user.x).powi(2) + (uav.y - user.y).powi(2) + h * h;
    let cos = h / d2.sqrt();
    let angle = cos.min(1.0).acos();
    let g = concentrator_gain(params, angle);
    if g == 0.0 {
        return Ok(0.0);
    }
    Ok(params.detection_area / d2
        * radiant_intensity(order, angle)
        * params.optical_filter_gain
        * g
        * cos)
}

/// Precomputed form of [`channel_gain`] for a fixed parameter set, used on the
/// optimizer's hot path.
#[derive(Debug, Clone, Copy)]
pub struct ChannelModel {
    nu: f64,
    cos_fov: f64,
    /// `A · Ts · g · (ν + 1) / (2π)`
    scale: f64,
}

impl ChannelModel {
    pub fn new(params: &VlcParams) -> Result<Self> {
        params.validate()?;
        let nu = lambertian_order(params.semiangle_half_power)?.value();
        let fov = params.fov_radians();
        let g = concentrator_gain(params, 0.0);
        Ok(Self {
            nu,
            cos_fov: fov.cos(),
            scale: params.detection_area * params.optical_filter_gain * g * (nu + 1.0) / (2.0 * PI),
        })
    }

    /// Gain for a UAV at horizontal `(x, y)` and altitude `altitude` to a
    /// ground user at `user`. `altitude` must be positive.
    #[inline]
    pub fn gain(&self, x: f64, y: f64, altitude: f64, user: &Position3D) -> f64 {
        let d2 = (x - user.x).powi(2) + (y - user.y).powi(2) + altitude * altitude;
        let cos = altitude / d2.sqrt();
        if cos < self.cos_fov {
            return 0.0;
        }
        // cos^(ν+1) / d²
        let lobe = if self.nu == 1.0 {
            cos * cos
        } else {
            cos.powf(self.nu + 1.0)
        };
        self.scale * lobe / d2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel_eq(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(f64::MIN_POSITIVE)
    }

    fn params(q: f64, fov: f64) -> VlcParams {
        VlcParams {
            refractive_index: q,
            fov,
            ..VlcParams::default()
        }
    }

    #[test]
    fn order_for_common_semiangles() {
        assert_eq!(lambertian_order(60.0).unwrap().value(), 1.0);
        assert!(rel_eq(lambertian_order(45.0).unwrap().value(), 2.0, 1e-10));
        assert!(rel_eq(
            lambertian_order(30.0).unwrap().value(),
            4.81884167930642,
            1e-10
        ));
    }

    #[test]
    fn order_rejects_out_of_range() {
        for bad in [0.0, -5.0, 90.0, 120.0, f64::NAN] {
            assert!(
                matches!(lambertian_order(bad), Err(Error::Domain(_))),
                "{bad}"
            );
        }
    }

    #[test]
    fn radiant_intensity_values() {
        let one = LambertianOrder::new(1.0).unwrap();
        let two = LambertianOrder::new(2.0).unwrap();
        assert!(rel_eq(radiant_intensity(one, 0.0), 1.0 / PI, 1e-12));
        assert!(rel_eq(
            radiant_intensity(one, PI / 3.0),
            1.0 / (2.0 * PI),
            1e-12
        ));
        assert!(rel_eq(
            radiant_intensity(two, PI / 4.0),
            0.238732414637843,
            1e-10
        ));
        assert_eq!(radiant_intensity(one, PI / 2.0), 0.0);
        assert_eq!(radiant_intensity(one, 2.0), 0.0);
    }

    #[test]
    fn concentrator_values() {
        let p = params(1.5, 60.0);
        assert!(rel_eq(
            concentrator_gain(&p, 30f64.to_radians()),
            3.0,
            1e-12
        ));
        assert_eq!(concentrator_gain(&p, 75f64.to_radians()), 0.0);
        assert!(rel_eq(
            concentrator_gain(&params(1.0, 90.0), 0.0),
            1.0,
            1e-12
        ));
    }

    #[test]
    fn gain_directly_overhead() {
        let p = params(1.5, 60.0);
        let nu = lambertian_order(60.0).unwrap();
        let user = Position3D::ground(0.0, 0.0);
        let at3 = channel_gain(&p, nu, Position3D::new(0.0, 0.0, 3.0), user).unwrap();
        let at6 = channel_gain(&p, nu, Position3D::new(0.0, 0.0, 6.0), user).unwrap();
        assert!(rel_eq(at3, 1.061032953945969e-05, 1e-10));
        assert!(rel_eq(at6, 2.6525823848649226e-06, 1e-10));
    }

    #[test]
    fn gain_outside_fov_is_zero() {
        let p = params(1.5, 60.0);
        let nu = lambertian_order(60.0).unwrap();
        // tan(60°)·3 ≈ 5.196 m is the coverage radius
        let g = channel_gain(
            &p,
            nu,
            Position3D::new(0.0, 0.0, 3.0),
            Position3D::ground(5.3, 0.0),
        );
        assert_eq!(g.unwrap(), 0.0);
    }

    #[test]
    fn gain_rejects_grounded_uav() {
        let p = VlcParams::default();
        let nu = lambertian_order(60.0).unwrap();
        let r = channel_gain(
            &p,
            nu,
            Position3D::new(0.0, 0.0, 0.0),
            Position3D::ground(1.0, 0.0),
        );
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn params_validation() {
        assert!(VlcParams::default().validate().is_ok());
        assert!(params(0.9, 60.0).validate().is_err());
        assert!(params(1.5, 0.0).validate().is_err());
        assert!(params(1.5, 91.0).validate().is_err());
        let p = VlcParams {
            detection_area: 0.0,
            ..VlcParams::default()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn hemisphere_integral_is_one() {
        // ∫₀^{2π} ∫₀^{π/2} R0(θ) sinθ dθ dφ, composite Simpson in θ.
        for nu in [0.5, 1.0, 2.0, 4.81884167930642, 10.0] {
            let order = LambertianOrder::new(nu).unwrap();
            let n = 2000;
            let h = (PI / 2.0) / n as f64;
            let f = |t: f64| radiant_intensity(order, t) * t.sin();
            let mut s = f(0.0) + f(PI / 2.0 - 1e-15);
            for k in 1..n {
                let w = if k % 2 == 1 { 4.0 } else { 2.0 };
                s += w * f(k as f64 * h);
            }
            let total = 2.0 * PI * s * h / 3.0;
            assert!((total - 1.0).abs() < 1e-3, "nu={nu}: {total}");
        }
    }

    #[test]
    fn gain_continuous_to_fov_edge() {
        let p = VlcParams::default();
        let model = ChannelModel::new(&p).unwrap();
        let edge = 3.0 * p.fov_radians().tan();
        let inside = model.gain(0.0, 0.0, 3.0, &Position3D::ground(edge - 1e-9, 0.0));
        let nu = lambertian_order(60.0).unwrap();
        let expected = p.detection_area / (9.0 + edge * edge)
            * radiant_intensity(nu, p.fov_radians())
            * concentrator_gain(&p, 0.0)
            * p.fov_radians().cos();
        assert!(rel_eq(inside, expected, 1e-6));
        assert_eq!(
            model.gain(0.0, 0.0, 3.0, &Position3D::ground(edge + 1e-6, 0.0)),
            0.0
        );
    }

    proptest! {
        #[test]
        fn model_matches_reference(
            ux in -10.0f64..10.0, uy in -10.0f64..10.0,
            x in -10.0f64..10.0, y in -10.0f64..10.0,
            h in 0.5f64..8.0, semi in 10.0f64..80.0, fov in 20.0f64..90.0,
        ) {
            let p = VlcParams { semiangle_half_power: semi, fov, ..VlcParams::default() };
            let nu = lambertian_order(semi).unwrap();
            let user = Position3D::ground(x, y);
            let reference = channel_gain(&p, nu, Position3D::new(ux, uy, h), user).unwrap();
            let fast = ChannelModel::new(&p).unwrap().gain(ux, uy, h, &user);
            prop_assert!(reference >= 0.0);
            // the two paths may disagree only on the FoV boundary itself
            if reference > 0.0 && fast > 0.0 {
                prop_assert!(rel_eq(fast, reference, 1e-9));
            }
        }

        #[test]
        fn gain_decreases_with_horizontal_distance(
            r1 in 0.0f64..5.0, dr in 1e-3f64..5.0, theta in 0.0f64..std::f64::consts::TAU,
        ) {
            let p = VlcParams::default();
            let nu = lambertian_order(60.0).unwrap();
            let uav = Position3D::new(0.0, 0.0, 3.0);
            let r2 = r1 + dr;
            let near = channel_gain(&p, nu, uav, Position3D::ground(r1 * theta.cos(), r1 * theta.sin())).unwrap();
            let far = channel_gain(&p, nu, uav, Position3D::ground(r2 * theta.cos(), r2 * theta.sin())).unwrap();
            prop_assert!(far >= 0.0);
            if far > 0.0 {
                prop_assert!(near > far);
            }
        }
    }
}
