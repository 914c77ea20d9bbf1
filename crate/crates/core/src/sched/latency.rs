//! Closed-form end-to-end latency of a chain under each scheduling mode.

use crate::error::DomainError;

fn check(name: &'static str, values: &[f64], expected: usize) -> Result<(), DomainError> {
    if values.len() != expected {
        return Err(DomainError::Length {
            name,
            got: values.len(),
            expected,
        });
    }
    if let Some(&value) = values.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
        return Err(DomainError::Negative { name, value });
    }
    Ok(())
}

/// `L_sched + Σ_{i<n} (TWL_i + L_proc_i) + L_proc_n`; `twl` has n-1 entries.
pub fn latency_central(l_sched: f64, twl: &[f64], l_proc: &[f64]) -> Result<f64, DomainError> {
    let n = l_proc.len();
    if n == 0 {
        return Err(DomainError::Length {
            name: "l_proc",
            got: 0,
            expected: 1,
        });
    }
    check("l_sched", &[l_sched], 1)?;
    check("twl", twl, n - 1)?;
    check("l_proc", l_proc, n)?;
    let body: f64 = twl.iter().zip(l_proc).map(|(t, p)| t + p).sum();
    Ok(l_sched + body + l_proc[n - 1])
}

/// `Σ_{i<n} (TWL_i + L_proc_i + L_sidecar_i) + TWL_n + L_proc_n`;
/// `l_sidecar` has n-1 entries, the final hop takes no decision.
pub fn latency_decentral(twl: &[f64], l_proc: &[f64], l_sidecar: &[f64]) -> Result<f64, DomainError> {
    let n = l_proc.len();
    if n == 0 {
        return Err(DomainError::Length {
            name: "l_proc",
            got: 0,
            expected: 1,
        });
    }
    check("twl", twl, n)?;
    check("l_proc", l_proc, n)?;
    check("l_sidecar", l_sidecar, n - 1)?;
    let body: f64 = (0..n - 1).map(|i| twl[i] + l_proc[i] + l_sidecar[i]).sum();
    Ok(body + twl[n - 1] + l_proc[n - 1])
}
