use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodPoint {
    pub delta_over_omega: f64,
    pub period_cycles: f64,
}

/// Power law `T = a·(Δ/Ω)^b` fitted by least squares on log–log axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodFit {
    pub k: usize,
    pub exponent: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    pub points: Vec<PeriodPoint>,
}

impl PeriodFit {
    pub fn predict(&self, delta_over_omega: f64) -> f64 {
        self.prefactor * delta_over_omega.powf(self.exponent)
    }

    /// Effective multi-photon Rabi frequency `1/T` at each point, in units of
    /// the single-atom Rabi frequency.
    pub fn effective_rabi(&self) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .map(|p| (p.delta_over_omega, 1.0 / p.period_cycles))
            .collect()
    }
}

pub fn fit_power_law(k: usize, points: &[PeriodPoint]) -> Result<PeriodFit> {
    if points.len() < 2 {
        return Err(Error::input(format!("a power-law fit needs at least 2 points, got {}", points.len())));
    }
    if let Some(p) = points
        .iter()
        .find(|p| !(p.delta_over_omega > 0.0 && p.period_cycles > 0.0))
    {
        return Err(Error::input(format!(
            "log-log fit needs positive values, got delta={} period={}",
            p.delta_over_omega, p.period_cycles
        )));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.delta_over_omega.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.period_cycles.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::input("all points share the same detuning"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) };
    Ok(PeriodFit {
        k,
        exponent: slope,
        prefactor: intercept.exp(),
        r_squared,
        points: points.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pts(f: impl Fn(f64) -> f64) -> Vec<PeriodPoint> {
        [3.0, 4.0, 5.0, 6.0]
            .iter()
            .map(|&d| PeriodPoint {
                delta_over_omega: d,
                period_cycles: f(d),
            })
            .collect()
    }

    #[test]
    fn recovers_exact_power_law() {
        let fit = fit_power_law(3, &pts(|d| 0.7 * d * d)).unwrap();
        assert_relative_eq!(fit.exponent, 2.0, epsilon = 1e-12);
        assert_relative_eq!(fit.prefactor, 0.7, epsilon = 1e-12);
        assert_relative_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
        assert_relative_eq!(fit.predict(10.0), 70.0, epsilon = 1e-9);
        assert_relative_eq!(fit.effective_rabi()[0].1, 1.0 / 6.3, epsilon = 1e-12);
    }

    #[test]
    fn noisy_data_lowers_r_squared() {
        let fit = fit_power_law(2, &pts(|d| d * if d == 4.0 { 1.5 } else { 1.0 })).unwrap();
        assert!(fit.r_squared < 0.99 && fit.r_squared > 0.0);
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(fit_power_law(2, &pts(|d| d)[..1]).is_err());
        assert!(fit_power_law(2, &pts(|_| -1.0)).is_err());
        let same = vec![
            PeriodPoint { delta_over_omega: 2.0, period_cycles: 1.0 },
            PeriodPoint { delta_over_omega: 2.0, period_cycles: 3.0 },
        ];
        assert!(fit_power_law(2, &same).is_err());
    }
}
