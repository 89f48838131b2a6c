use crate::error::{CbfError, Result};
use crate::fields::{reduce, to_physical, SpectralField};
use crate::integrator::{cumulative_trapezoid, trapezoid, DiagnosticsSeries, Trajectory};

/// (int |u|^{2r} (|u|^{s-r} - 1)^2 dx)^{1/2} by quadrature on the twice
/// finer grid.
pub fn exponent_gap_norm(u: &SpectralField, r: f64, s: f64) -> f64 {
    let big = u.grid().doubled();
    let p = to_physical(&u.padded(big));
    let h3 = big.cell_volume();
    let sum = reduce::sum(big.len(), |i| {
        let m2 = p.samples[0][i].powi(2) + p.samples[1][i].powi(2) + p.samples[2][i].powi(2);
        if m2 == 0.0 {
            return 0.0;
        }
        let m = m2.sqrt();
        let d = m.powf(s - r) - 1.0;
        m.powf(2.0 * r) * d * d
    });
    (h3 * sum).sqrt()
}

/// c0 int (int |u|^{2r} (|u|^{s-r} - 1)^2 dx)^{1/2} dt over the trajectory
/// snapshots, trapezoidal in time.
pub fn exponent_robustness_lhs(traj: &Trajectory, r: f64, s: f64, c0: f64) -> Result<f64> {
    if !(r >= 1.0) || !(s >= r) {
        return Err(CbfError::InvalidArgument(format!(
            "need s >= r >= 1, got r = {r}, s = {s}"
        )));
    }
    if traj.snapshots.len() < 2 {
        return Err(CbfError::Coverage(
            "exponent robustness needs at least two snapshots".into(),
        ));
    }
    let times: Vec<f64> = traj.snapshots.iter().map(|s| s.t).collect();
    let vals: Vec<f64> = traj
        .snapshots
        .iter()
        .map(|snap| exponent_gap_norm(&snap.field, r, s))
        .collect();
    Ok(c0 * trapezoid(&times, &vals))
}

/// |w0|^2 exp(c int_0^t (|u|^2 + |A u|^2)) at each recorded time, the lattice
/// H^2 norm squared standing in for |u|_{H^2}^2.
pub fn gronwall_envelope(diag_u: &DiagnosticsSeries, w0_l2: f64, c: f64) -> Vec<f64> {
    let times = diag_u.times();
    let h2: Vec<f64> = diag_u.column(|r| r.l2 * r.l2 + r.stokes_l2 * r.stokes_l2);
    cumulative_trapezoid(&times, &h2)
        .into_iter()
        .map(|integral| w0_l2 * w0_l2 * (c * integral).exp())
        .collect()
}
