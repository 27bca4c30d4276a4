//! Local linear models of the airframe and the retrospective target filter.
//!
//! At each controller step the airframe is linearized about the current
//! state, the transmission zeros of the fin-command to performance channel
//! are computed, and the real right-half-plane zeros are embedded in a
//! strictly proper FIR filter `G_f(q) = σ Π(q - ζ_i) / q^{n_z+1}`.

use nalgebra::{Complex, DMatrix, DVector, RowDVector};
use serde::{Deserialize, Serialize};

use crate::airframe::{evaluate, MissileParams, MissileState};
use crate::error::{Result, SimError};

/// Strictly proper FIR filter stored as `(lag, coefficient)` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirFilter {
    coefficients: Vec<(usize, f64)>,
}

impl FirFilter {
    pub fn new(coefficients: Vec<(usize, f64)>) -> Result<Self> {
        for &(lag, c) in &coefficients {
            if lag == 0 {
                return Err(SimError::config("FIR filter lags must be at least 1"));
            }
            if !c.is_finite() {
                return Err(SimError::NonFinite(format!("FIR coefficient at lag {lag}")));
            }
        }
        Ok(Self { coefficients })
    }

    pub fn taps(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.coefficients.iter().copied()
    }

    pub fn max_lag(&self) -> usize {
        self.coefficients.iter().map(|(l, _)| *l).max().unwrap_or(0)
    }

    /// Number of zeros embedded in the filter.
    pub fn order(&self) -> usize {
        self.max_lag().saturating_sub(1)
    }
}

/// Continuous-time single-input single-output model `ẋ = Ax + Bu`, `y = Cx + Du`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: RowDVector<f64>,
    pub d: f64,
}

impl LinearModel {
    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    fn check(&self) -> Result<()> {
        let n = self.order();
        if self.a.ncols() != n || self.b.len() != n || self.c.len() != n {
            return Err(SimError::config("inconsistent linear model dimensions"));
        }
        let all = self.a.iter().chain(self.b.iter()).chain(self.c.iter());
        if all.chain(std::iter::once(&self.d)).any(|v| !v.is_finite()) {
            return Err(SimError::NonFinite("linear model entries".into()));
        }
        Ok(())
    }
}

/// Default perturbation `max(1e-6, 1e-6 |x|)`.
pub fn default_step(x: f64) -> f64 {
    (1e-6 * x.abs()).max(1e-6)
}

/// Central-difference `(A, B)` of `f(x, u)` at `(x0, u0)` with the default steps.
pub fn jacobian<F>(f: F, x0: &[f64], u0: f64) -> Result<(DMatrix<f64>, DVector<f64>)>
where
    F: FnMut(&[f64], f64, &mut [f64]) -> Result<()>,
{
    let steps: Vec<f64> = x0.iter().map(|x| default_step(*x)).collect();
    jacobian_with_steps(f, x0, u0, &steps, default_step(u0))
}

/// Central-difference `(A, B)` with explicit per-component steps.
pub fn jacobian_with_steps<F>(
    mut f: F,
    x0: &[f64],
    u0: f64,
    steps: &[f64],
    u_step: f64,
) -> Result<(DMatrix<f64>, DVector<f64>)>
where
    F: FnMut(&[f64], f64, &mut [f64]) -> Result<()>,
{
    let n = x0.len();
    let mut a = DMatrix::zeros(n, n);
    let mut b = DVector::zeros(n);
    let mut x = x0.to_vec();
    let mut plus = vec![0.0; n];
    let mut minus = vec![0.0; n];
    for j in 0..n {
        let h = steps[j];
        x[j] = x0[j] + h;
        f(&x, u0, &mut plus)?;
        x[j] = x0[j] - h;
        f(&x, u0, &mut minus)?;
        x[j] = x0[j];
        for i in 0..n {
            a[(i, j)] = (plus[i] - minus[i]) / (2.0 * h);
        }
    }
    f(x0, u0 + u_step, &mut plus)?;
    f(x0, u0 - u_step, &mut minus)?;
    for i in 0..n {
        b[i] = (plus[i] - minus[i]) / (2.0 * u_step);
    }
    if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
        return Err(SimError::NonFinite("finite-difference Jacobian".into()));
    }
    Ok((a, b))
}

/// Central-difference gradient `(C, D)` of a scalar output `g(x, u)`.
pub fn output_gradient<G>(mut g: G, x0: &[f64], u0: f64) -> Result<(RowDVector<f64>, f64)>
where
    G: FnMut(&[f64], f64) -> Result<f64>,
{
    let n = x0.len();
    let mut c = RowDVector::zeros(n);
    let mut x = x0.to_vec();
    for j in 0..n {
        let h = default_step(x0[j]);
        x[j] = x0[j] + h;
        let p = g(&x, u0)?;
        x[j] = x0[j] - h;
        let m = g(&x, u0)?;
        x[j] = x0[j];
        c[j] = (p - m) / (2.0 * h);
    }
    let hu = default_step(u0);
    let d = (g(x0, u0 + hu)? - g(x0, u0 - hu)?) / (2.0 * hu);
    if c.iter().any(|v| !v.is_finite()) || !d.is_finite() {
        return Err(SimError::NonFinite("finite-difference output row".into()));
    }
    Ok((c, d))
}

/// Airframe states retained in the linear model, as indices into [`MissileState::to_array`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateSet {
    /// Mach, flight path, pitch, pitch rate, fin, fin rate.
    #[default]
    Full,
    /// Flight path, pitch, pitch rate, fin, fin rate; Mach frozen.
    ShortPeriod,
}

impl StateSet {
    pub fn indices(self) -> &'static [usize] {
        match self {
            StateSet::Full => &[0, 1, 2, 3, 6, 7],
            StateSet::ShortPeriod => &[1, 2, 3, 6, 7],
        }
    }
}

/// Linearizes the fin-command to `-a_z` channel of the airframe at `state`.
///
/// The thrust and the current fin command are frozen at their operating values.
pub fn airframe_model(
    state: &MissileState,
    thrust: f64,
    fin_cmd: f64,
    params: &MissileParams,
    states: StateSet,
) -> Result<LinearModel> {
    let idx = states.indices();
    let full = state.to_array();
    let x0: Vec<f64> = idx.iter().map(|&i| full[i]).collect();
    let expand = |x: &[f64]| {
        let mut s = full;
        for (k, &i) in idx.iter().enumerate() {
            s[i] = x[k];
        }
        MissileState::from_slice(&s)
    };
    let (a, b) = jacobian(
        |x, u, out| {
            let d = evaluate(&expand(x), thrust, u, params)?.derivative.to_array();
            for (k, &i) in idx.iter().enumerate() {
                out[k] = d[i];
            }
            Ok(())
        },
        &x0,
        fin_cmd,
    )?;
    let (c, d) = output_gradient(
        |x, u| Ok(-evaluate(&expand(x), thrust, u, params)?.imu.a_z),
        &x0,
        fin_cmd,
    )?;
    let model = LinearModel { a, b, c, d };
    model.check()?;
    Ok(model)
}

/// Characteristic-polynomial coefficients of `A` (highest power first) and
/// the numerator coefficients of `C (sI - A)^{-1} B + D` on the same basis.
fn transfer_polynomials(model: &LinearModel) -> (Vec<f64>, Vec<f64>) {
    let n = model.order();
    let id = DMatrix::<f64>::identity(n, n);
    // Resolvent recurrence: adj(sI - A) = Σ_{k=1..n} M_k s^{n-k}.
    let mut den = vec![0.0; n + 1];
    den[0] = 1.0;
    let mut num = vec![0.0; n + 1];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for k in 1..=n {
        m = &model.a * &m + &id * den[k - 1];
        num[k] = (&model.c * &m * &model.b)[(0, 0)];
        den[k] = -(&model.a * &m).trace() / k as f64;
    }
    for (nu, de) in num.iter_mut().zip(&den) {
        *nu += model.d * de;
    }
    (den, num)
}

/// Roots of a polynomial given highest power first, via companion-matrix eigenvalues.
pub fn polynomial_roots(coeffs: &[f64]) -> Vec<Complex<f64>> {
    let scale = coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    if scale == 0.0 {
        return Vec::new();
    }
    let mut c: &[f64] = coeffs;
    while let Some((first, rest)) = c.split_first() {
        if first.abs() > 1e-10 * scale {
            break;
        }
        c = rest;
    }
    let mut roots = Vec::new();
    while c.len() > 1 && c[c.len() - 1].abs() <= 1e-10 * scale {
        roots.push(Complex::new(0.0, 0.0));
        c = &c[..c.len() - 1];
    }
    let deg = c.len().saturating_sub(1);
    if deg == 0 {
        return roots;
    }
    let mut comp = DMatrix::<f64>::zeros(deg, deg);
    for j in 0..deg {
        comp[(0, j)] = -c[j + 1] / c[0];
    }
    for i in 1..deg {
        comp[(i, i - 1)] = 1.0;
    }
    roots.extend(comp.complex_eigenvalues().iter().copied());
    roots
}

/// Finite transmission zeros of a SISO model.
pub fn transmission_zeros(model: &LinearModel) -> Result<Vec<Complex<f64>>> {
    model.check()?;
    let (_, num) = transfer_polynomials(model);
    if num.iter().all(|c| *c == 0.0) {
        return Err(SimError::DegenerateChannel(
            "transfer function numerator is identically zero".into(),
        ));
    }
    Ok(polynomial_roots(&num))
}

/// Zero-order-hold discretization `(A_d, B_d)` with sample time `t_s`.
pub fn discretize(model: &LinearModel, t_s: f64) -> (DMatrix<f64>, DVector<f64>) {
    let n = model.order();
    let mut aug = DMatrix::<f64>::zeros(n + 1, n + 1);
    aug.view_mut((0, 0), (n, n)).copy_from(&(&model.a * t_s));
    aug.view_mut((0, n), (n, 1)).copy_from(&(&model.b * t_s));
    let e = aug.exp();
    let ad = e.view((0, 0), (n, n)).into_owned();
    let bd = e.view((0, n), (n, 1)).column(0).into_owned();
    (ad, bd)
}

/// Discrete Markov parameters `h_1 … h_count` of the ZOH model.
pub fn markov_parameters(model: &LinearModel, t_s: f64, count: usize) -> Vec<f64> {
    let (ad, bd) = discretize(model, t_s);
    let mut x = bd;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        out.push((&model.c * &x)[(0, 0)]);
        x = &ad * x;
    }
    out
}

/// Options for selecting which zeros enter the target filter.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterOptions {
    /// Also embed complex right-half-plane pairs.
    pub include_complex: bool,
}

pub const MARKOV_SCAN: usize = 10;
pub const MARKOV_THRESHOLD: f64 = 1e-12;

/// Right-half-plane zeros selected for the filter.
pub fn nmp_zeros(zeros: &[Complex<f64>], opts: FilterOptions) -> Vec<Complex<f64>> {
    zeros
        .iter()
        .filter(|z| z.re > 0.0)
        .filter(|z| opts.include_complex || z.im.abs() <= 1e-9 * z.norm().max(1.0))
        .map(|z| {
            if opts.include_complex {
                *z
            } else {
                Complex::new(z.re, 0.0)
            }
        })
        .collect()
}

/// Builds `G_f = σ Π(q - e^{s_i t_s}) / q^{n_z+1}` from the selected zeros.
pub fn build_gf(zeros: &[Complex<f64>], model: &LinearModel, t_s: f64, opts: FilterOptions) -> Result<FirFilter> {
    if !(t_s > 0.0) {
        return Err(SimError::config("t_s must be positive"));
    }
    let sigma = markov_parameters(model, t_s, MARKOV_SCAN)
        .into_iter()
        .find(|h| h.abs() > MARKOV_THRESHOLD)
        .ok_or_else(|| SimError::DegenerateChannel("no Markov parameter above threshold".into()))?;
    let selected = nmp_zeros(zeros, opts);
    Ok(gf_from_discrete(
        sigma,
        &selected.iter().map(|s| (s * t_s).exp()).collect::<Vec<_>>(),
    ))
}

/// Expands `σ Π(q - ζ_i) / q^{n_z+1}` into FIR taps at lags `1 … n_z+1`.
pub fn gf_from_discrete(sigma: f64, zetas: &[Complex<f64>]) -> FirFilter {
    let mut poly = vec![Complex::new(1.0, 0.0)];
    for z in zetas {
        let mut next = vec![Complex::new(0.0, 0.0); poly.len() + 1];
        for (i, p) in poly.iter().enumerate() {
            next[i] += p;
            next[i + 1] -= p * z;
        }
        poly = next;
    }
    FirFilter {
        coefficients: poly.iter().enumerate().map(|(i, c)| (i + 1, sigma * c.re)).collect(),
    }
}
