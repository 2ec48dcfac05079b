//! Admissible ranges of the shell and cone parameters of one obstacle.

use crate::error::{Error, Result};
use crate::obstacle::Obstacle;

/// `δ̲ = ‖Ec‖^(-1/2)`, the smallest admissible shell dilation.
pub fn delta_lower(o: &Obstacle) -> Result<f64> {
    let n = o.ec_norm();
    if !(n > 1.0) {
        return Err(Error::AssumptionViolated {
            assumption: "Assumption 2",
            detail: format!("||E c|| = {n} <= 1"),
        });
    }
    Ok(n.powf(-0.5))
}

pub(crate) fn mu_bar_radicand(dl: f64, delta: f64) -> f64 {
    let dl2 = dl * dl;
    1.0 - 4.0 * dl2 * (1.0 - dl2 / (delta * delta))
}

/// `cos θ̄(δ, μ)` without range checks.
pub(crate) fn cos_theta_bar_raw(dl: f64, delta: f64, mu: f64) -> f64 {
    let dl2 = dl * dl;
    dl2 / (delta * delta) + (1.0 - 1.0 / (mu * mu)) / (4.0 * dl2)
}

fn check_delta(o: &Obstacle, delta: f64) -> Result<f64> {
    let dl = delta_lower(o)?;
    if !(delta > dl && delta < 1.0) {
        return Err(Error::BadDelta { delta, lower: dl });
    }
    Ok(dl)
}

/// Largest admissible `μ` for a given `δ ∈ (δ̲, 1)`.
pub fn mu_bar(o: &Obstacle, delta: f64) -> Result<f64> {
    let dl = check_delta(o, delta)?;
    Ok(mu_bar_radicand(dl, delta).powf(-0.5))
}

/// Largest admissible aperture `θ` for `δ ∈ (δ̲, 1)` and `μ ∈ (1, μ̄(δ))`.
pub fn theta_bar(o: &Obstacle, delta: f64, mu: f64) -> Result<f64> {
    let mb = mu_bar(o, delta)?;
    if !(mu > 1.0 && mu < mb) {
        return Err(Error::BadParams(format!("mu = {mu} outside (1, {mb})")));
    }
    let arg = cos_theta_bar_raw(delta_lower(o)?, delta, mu);
    if !(arg > 0.0 && arg < 1.0) {
        return Err(Error::BadParams(format!(
            "arccos argument {arg} for theta_bar outside (0, 1)"
        )));
    }
    Ok(arg.acos())
}

/// Cosine of the half-aperture of the cone with vertex at the origin that
/// passes through `𝓔(c, δE) ∩ 𝓔(c̄, μĒ)`. Closed ranges `δ ∈ [δ̲, 1]`,
/// `μ ∈ [1, μ̄(δ)]`.
pub fn cos_vartheta(o: &Obstacle, delta: f64, mu: f64) -> Result<f64> {
    const SLACK: f64 = 1e-12;
    let dl = delta_lower(o)?;
    if !(delta >= dl - SLACK && delta <= 1.0 + SLACK) {
        return Err(Error::BadDelta { delta, lower: dl });
    }
    let rad = mu_bar_radicand(dl, delta);
    let mu_ok = mu >= 1.0 - SLACK && (rad <= 0.0 || mu * mu * rad <= 1.0 + SLACK);
    if !mu_ok {
        return Err(Error::BadParams(format!(
            "mu = {mu} outside [1, mu_bar({delta})]"
        )));
    }
    let dl2 = dl * dl;
    let cos_tb = cos_theta_bar_raw(dl, delta, mu);
    let den2 = 0.5 * (1.0 + 1.0 / (mu * mu)) - dl2 * dl2 / (delta * delta);
    let arg = (1.0 - cos_tb * dl2) / den2.sqrt();
    if !(den2 > 0.0 && arg > 0.0 && arg <= 1.0 + SLACK) {
        return Err(Error::BadParams(format!(
            "arccos argument {arg} for vartheta outside (0, 1]"
        )));
    }
    Ok(arg.min(1.0))
}

/// `ϑ(δ, μ)`, see [`cos_vartheta`].
pub fn vartheta(o: &Obstacle, delta: f64, mu: f64) -> Result<f64> {
    Ok(cos_vartheta(o, delta, mu)?.acos())
}

/// `ϑ̄ = ϑ(1, 1)`, with `cos ϑ̄ = √(1 − ‖Ec‖⁻²)`.
pub fn vartheta_bar(o: &Obstacle) -> f64 {
    (1.0 / o.ec_norm()).asin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ball(cx: f64) -> Obstacle {
        Obstacle::ball(&[cx, 0.0]).unwrap()
    }

    #[test]
    fn delta_lower_examples() {
        assert_abs_diff_eq!(delta_lower(&ball(4.0)).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(delta_lower(&ball(2.0)).unwrap(), 0.5f64.sqrt(), epsilon = 1e-15);
        let near = delta_lower(&ball(1.0 + 1e-9)).unwrap();
        assert!(near < 1.0 && near > 1.0 - 1e-9);
    }

    #[test]
    fn mu_bar_examples() {
        let o = ball(4.0);
        assert_abs_diff_eq!(mu_bar(&o, 0.8).unwrap(), 1.6, epsilon = 1e-12);
        assert_abs_diff_eq!(mu_bar(&o, 0.75).unwrap(), 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(mu_bar(&o, 0.5 + 1e-9).unwrap(), 1.0, epsilon = 1e-6);
        let o2 = ball(2.0);
        let radicand: f64 = 1.0 - 2.0 * (1.0 - 0.5 / 0.81);
        assert_abs_diff_eq!(mu_bar(&o2, 0.9).unwrap(), radicand.powf(-0.5), epsilon = 1e-12);
        assert_abs_diff_eq!(mu_bar(&o2, 0.9).unwrap(), 2.0647, epsilon = 1e-4);
        assert!(matches!(mu_bar(&o, 0.5), Err(Error::BadDelta { .. })));
        assert!(matches!(mu_bar(&o, 1.0), Err(Error::BadDelta { .. })));
    }

    #[test]
    fn theta_bar_examples() {
        let o = ball(4.0);
        let expected = (0.25f64 / 0.64 + (1.0 - 1.0 / 1.44)).acos();
        assert_abs_diff_eq!(theta_bar(&o, 0.8, 1.2).unwrap(), expected, epsilon = 1e-14);
        assert_abs_diff_eq!(theta_bar(&o, 0.8, 1.2).unwrap(), 0.80073, epsilon = 1e-5);
        let near_one = theta_bar(&o, 0.8, 1.0 + 1e-12).unwrap();
        assert_abs_diff_eq!(near_one, (0.25f64 / 0.64).acos(), epsilon = 1e-9);
        assert!(theta_bar(&o, 0.8, 1.0).is_err());
        assert!(theta_bar(&o, 0.8, 1.6).is_err());
    }

    #[test]
    fn vartheta_examples() {
        let o = ball(4.0);
        assert_abs_diff_eq!(cos_vartheta(&o, 1.0, 1.0).unwrap(), 15f64.sqrt() / 4.0, epsilon = 1e-14);
        assert_abs_diff_eq!(vartheta(&o, 1.0, 1.0).unwrap(), vartheta_bar(&o), epsilon = 1e-12);
        assert_abs_diff_eq!(cos_vartheta(&o, 0.8, 1.2).unwrap(), 0.954006, epsilon = 1e-6);
        assert_abs_diff_eq!(vartheta(&o, 0.8, 1.2).unwrap(), 0.304468, epsilon = 1e-6);
        assert!(cos_vartheta(&o, 0.4, 1.0).is_err());
        assert!(cos_vartheta(&o, 0.8, 1.7).is_err());
    }

    /// The corner of the two circles `‖x − c‖ = 1/δ` and `‖x − c/2‖ = ‖c‖/(2μ)`
    /// lies on the cone of aperture `ϑ(δ, μ)` around `c`.
    #[test]
    fn vartheta_matches_circle_corner() {
        let o = ball(4.0);
        for &(delta, mu) in &[(0.8f64, 1.2f64), (0.9, 1.1), (0.6, 1.05), (1.0, 1.0), (0.95, 1.3)] {
            let (r1, r2) = (1.0 / delta, 2.0 / mu);
            // circles centered at (4,0) and (2,0)
            let x: f64 = (r2 * r2 - r1 * r1 + 16.0 - 4.0) / 4.0;
            let y = (r1 * r1 - (x - 4.0) * (x - 4.0)).sqrt();
            let corner_cos = x / (x * x + y * y).sqrt();
            assert_abs_diff_eq!(cos_vartheta(&o, delta, mu).unwrap(), corner_cos, epsilon = 1e-12);
        }
    }
}
