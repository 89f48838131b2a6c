use crate::error::{CbfError, Result};

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CbfError::InvalidArgument(format!("{name} must be positive, got {v}")))
    }
}

/// Largest y0 + int delta for which y' <= a y^n + delta stays bounded on
/// [0, T]: [(n - 1) a T]^{-1/(n-1)}.
pub fn ode_threshold(a: f64, n_exp: u32, t: f64) -> Result<f64> {
    positive("a", a)?;
    positive("T", t)?;
    if n_exp <= 1 {
        return Err(CbfError::InvalidArgument(format!(
            "exponent must exceed 1, got {n_exp}"
        )));
    }
    let m = (n_exp - 1) as f64;
    Ok((m * a * t).powf(-1.0 / m))
}

/// Blow-up time of X' = c X^3 from X(0) = y0: 1 / (2 c y0^2).
pub fn ode_blowup_time(c: f64, y0: f64) -> Result<f64> {
    positive("c", c)?;
    positive("y0", y0)?;
    Ok(1.0 / (2.0 * c * y0 * y0))
}

/// Guaranteed existence time (4 c |u0|_{H^1}^4)^{-1}, half the blow-up time
/// of the comparison equation for X = |u|_{H^1}^2.
pub fn local_existence_horizon(h1_of_u0: f64, c: f64) -> Result<f64> {
    positive("H^1 norm", h1_of_u0)?;
    positive("c", c)?;
    Ok(1.0 / (4.0 * c * h1_of_u0.powi(4)))
}
