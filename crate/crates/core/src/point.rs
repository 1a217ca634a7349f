//! Points of `[-1, 1]` carried together with accurate distances to both endpoints.
//!
//! Near `s = ±1` the quantity `1 - s^2` cannot be recovered from `s` alone in double
//! precision, so every evaluation point stores `1 - s` and `1 + s` explicitly.

use std::f64::consts::{FRAC_PI_2, PI};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pt {
    pub s: f64,
    /// `1 - s`
    pub om: f64,
    /// `1 + s`
    pub op: f64,
}

impl Pt {
    pub fn from_s(s: f64) -> Pt {
        Pt { s, om: 1.0 - s, op: 1.0 + s }
    }

    /// The point `1 - om`, exact in `om`.
    pub fn from_om(om: f64) -> Pt {
        Pt { s: 1.0 - om, om, op: 2.0 - om }
    }

    /// The point `-1 + op`, exact in `op`.
    pub fn from_op(op: f64) -> Pt {
        Pt { s: op - 1.0, om: 2.0 - op, op }
    }

    /// `s = tanh(theta)`.
    pub fn from_tanh(theta: f64) -> Pt {
        let e = (2.0 * theta).exp();
        let em = (-2.0 * theta).exp();
        let om = 2.0 / (1.0 + e);
        let op = 2.0 / (1.0 + em);
        Pt { s: theta.tanh(), om, op }
    }

    /// `s = sign(h) / sqrt(1 + h^2)`, the cone parameter of apex height `h != 0`.
    pub fn from_apex(h: f64) -> Pt {
        let q = (1.0 + h * h).sqrt();
        let near = h * h / (q * (q + 1.0));
        if h > 0.0 {
            Pt { s: 1.0 / q, om: near, op: 1.0 + 1.0 / q }
        } else {
            Pt { s: -1.0 / q, om: 1.0 + 1.0 / q, op: near }
        }
    }

    /// Node angle `phi` in `[0, pi]` with `s = sin((pi/2) cos(phi))`.
    pub fn from_node_angle(phi: f64) -> Pt {
        let arc = FRAC_PI_2 * phi.cos();
        let to_top = PI * (0.5 * phi).sin().powi(2);
        let to_bottom = PI * (0.5 * phi).cos().powi(2);
        Pt { s: arc.sin(), om: 2.0 * (0.5 * to_top).sin().powi(2), op: 2.0 * (0.5 * to_bottom).sin().powi(2) }
    }

    /// `1 - s^2`
    pub fn w(&self) -> f64 {
        self.om * self.op
    }

    /// `atanh(s)`
    pub fn atanh(&self) -> f64 {
        0.5 * (self.op.ln() - self.om.ln())
    }

    /// `arcsin(s)` computed from the nearer endpoint.
    pub fn arcsin(&self) -> f64 {
        if self.s >= 0.0 {
            FRAC_PI_2 - 2.0 * (0.5 * self.om).sqrt().min(1.0).asin()
        } else {
            -FRAC_PI_2 + 2.0 * (0.5 * self.op).sqrt().min(1.0).asin()
        }
    }

    /// Inverse of [`Pt::from_node_angle`].
    pub fn node_angle(&self) -> f64 {
        if self.s >= 0.0 {
            // 1 - x where x = arcsin(s) / (pi/2)
            let gap = 2.0 * (0.5 * self.om).sqrt().min(1.0).asin() / FRAC_PI_2;
            2.0 * (0.5 * gap).sqrt().min(1.0).asin()
        } else {
            let gap = 2.0 * (0.5 * self.op).sqrt().min(1.0).asin() / FRAC_PI_2;
            PI - 2.0 * (0.5 * gap).sqrt().min(1.0).asin()
        }
    }

    /// Reflection `s -> -s`.
    pub fn neg(&self) -> Pt {
        Pt { s: -self.s, om: self.op, op: self.om }
    }

    /// Apex height of the cone whose lateral normal has height `s` (`s != 0`).
    pub fn apex_height(&self) -> f64 {
        self.w().sqrt() / self.s
    }

    pub fn abs(&self) -> Pt {
        if self.s < 0.0 {
            self.neg()
        } else {
            *self
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tanh_point_keeps_endpoint_gap() {
        let p = Pt::from_tanh(20.0);
        assert!((p.om - 2.0 * (-40.0f64).exp()).abs() < 1e-30);
        assert!((p.atanh() - 20.0).abs() < 1e-12);
    }

    #[test]
    fn apex_round_trip() {
        for h in [-3.0, -0.5, 0.25, 1.0, 1e6] {
            let p = Pt::from_apex(h);
            assert!((p.apex_height() - h).abs() <= 1e-12 * h.abs().max(1.0));
            assert!((p.om + p.op - 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn node_angle_round_trip() {
        for k in 0..50 {
            let phi = (k as f64 + 0.5) * PI / 50.0;
            let p = Pt::from_node_angle(phi);
            assert!((p.node_angle() - phi).abs() < 1e-12);
            assert!((p.om - (1.0 - p.s)).abs() < 1e-15);
        }
        let p = Pt::from_node_angle(1e-3);
        assert!(p.om > 0.0 && p.om < 1e-11);
    }
}
