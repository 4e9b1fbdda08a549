use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Least-squares slope of ln u with a drift diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovFit {
    pub slope: f64,
    /// First-half slope minus second-half slope.
    pub drift: f64,
    pub samples: usize,
}

fn line_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let n = x.len() as f64;
    if x.len() < 2 {
        return Err(Error::DegenerateFit(format!("need two points, got {}", x.len())));
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if !(sxx > 1e-300) {
        return Err(Error::DegenerateFit("abscissae coincide".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Ok((my - slope * mx, slope))
}

fn check_positive(times: &[f64], values: &[f64]) -> Result<()> {
    if times.len() != values.len() {
        return Err(invalid("series", "times and values differ in length"));
    }
    match times.iter().zip(values).find(|(_, &v)| !(v > 0.0)) {
        Some((&t, &value)) => Err(Error::NonPositiveSeries { t, value }),
        None => Ok(()),
    }
}

/// Slope of ln u over samples with `t ∈ [window.0, window.1]`.
pub fn lyapunov_exponent(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<LyapunovFit> {
    if times.len() != values.len() {
        return Err(invalid("series", "times and values differ in length"));
    }
    let (t, v): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(values)
        .filter(|(&t, _)| t >= window.0 && t <= window.1)
        .map(|(&t, &v)| (t, v))
        .unzip();
    if t.len() < 4 {
        return Err(invalid("window", format!("needs at least 4 samples, found {}", t.len())));
    }
    check_positive(&t, &v)?;
    let ln: Vec<f64> = v.iter().map(|x| x.ln()).collect();
    let (_, slope) = line_fit(&t, &ln)?;
    let h = t.len() / 2;
    let (_, s1) = line_fit(&t[..=h], &ln[..=h])?;
    let (_, s2) = line_fit(&t[h..], &ln[h..])?;
    Ok(LyapunovFit {
        slope,
        drift: s1 - s2,
        samples: t.len(),
    })
}

/// Growth law fitted by [`asymptotic_fit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    /// y = a
    Const,
    /// y = a e^{b t}
    Exp,
    /// y = k √t
    SqrtT,
    /// y = k t / ln t
    TOverLnT,
    /// y = k t
    LinearT,
    /// y = a t^p
    Power,
}

impl std::str::FromStr for FitModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "const" => Self::Const,
            "exp" => Self::Exp,
            "sqrt_t" => Self::SqrtT,
            "t_over_ln_t" => Self::TOverLnT,
            "linear_t" => Self::LinearT,
            "power" => Self::Power,
            other => return Err(invalid("model", format!("unknown model `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    /// `[a]`, `[a, b]`, `[k]` or `[a, p]` by model.
    pub params: Vec<f64>,
    /// RMS relative residual.
    pub residual: f64,
    /// `(max − min)/max` of `y / f(t)` for the one-parameter models.
    pub spread: Option<f64>,
}

impl FitResult {
    pub fn exponent(&self) -> Option<f64> {
        (self.model == FitModel::Power).then(|| self.params[1])
    }
}

/// Least-squares fit of `model` to (t, y). One-parameter models are fitted
/// linearly in the transformed ratio `y/f(t)`; `exp` and `power` in log space.
pub fn asymptotic_fit(times: &[f64], values: &[f64], model: FitModel) -> Result<FitResult> {
    if times.len() != values.len() {
        return Err(invalid("series", "times and values differ in length"));
    }
    if times.len() < 10 {
        return Err(Error::DegenerateFit(format!("need at least 10 samples, got {}", times.len())));
    }
    let (t_min, t_max) = times
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &t| (lo.min(t), hi.max(t)));
    if !(t_min > 0.0) || t_max < 10.0 * t_min {
        return Err(Error::DegenerateFit("samples must span at least one decade of t > 0".into()));
    }
    let rms = |pred: &dyn Fn(f64) -> f64| {
        let s: f64 = times
            .iter()
            .zip(values)
            .map(|(&t, &y)| ((y - pred(t)) / y.abs().max(1e-300)).powi(2))
            .sum();
        (s / times.len() as f64).sqrt()
    };
    let one_param = |f: fn(f64) -> f64| -> Result<FitResult> {
        if model == FitModel::TOverLnT && t_min <= 1.0 {
            return Err(Error::DegenerateFit("t/ln t needs t > 1".into()));
        }
        let ratio: Vec<f64> = times.iter().zip(values).map(|(&t, &y)| y / f(t)).collect();
        let k = ratio.iter().sum::<f64>() / ratio.len() as f64;
        let (lo, hi) = ratio
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        Ok(FitResult {
            model,
            params: vec![k],
            residual: rms(&|t| k * f(t)),
            spread: Some((hi - lo) / hi.abs()),
        })
    };
    match model {
        FitModel::Const => one_param(|_| 1.0),
        FitModel::SqrtT => one_param(f64::sqrt),
        FitModel::TOverLnT => one_param(|t| t / t.ln()),
        FitModel::LinearT => one_param(|t| t),
        FitModel::Exp => {
            check_positive(times, values)?;
            let ln: Vec<f64> = values.iter().map(|y| y.ln()).collect();
            let (c, b) = line_fit(times, &ln)?;
            let a = c.exp();
            Ok(FitResult {
                model,
                params: vec![a, b],
                residual: rms(&|t| a * (b * t).exp()),
                spread: None,
            })
        }
        FitModel::Power => {
            check_positive(times, values)?;
            let lt: Vec<f64> = times.iter().map(|t| t.ln()).collect();
            let ly: Vec<f64> = values.iter().map(|y| y.ln()).collect();
            let (c, p) = line_fit(&lt, &ly)?;
            let a = c.exp();
            Ok(FitResult {
                model,
                params: vec![a, p],
                residual: rms(&|t| a * t.powf(p)),
                spread: None,
            })
        }
    }
}
