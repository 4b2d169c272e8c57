//! Fields, the spin Hamiltonian, the six equations of motion and a
//! fixed-step RK4 driver.
//!
//! | law                 | state   | right-hand side                                   |
//! |---------------------|---------|---------------------------------------------------|
//! | `bloch`             | `m`     | `γ m × B`                                         |
//! | `llg`               | `m`     | `γ/(1+k²) (m×B − k m×(m×B))`                      |
//! | `von_neumann`       | `ρ`     | `[H, ρ] / iħ`                                     |
//! | `nonlinear_vn`      | `ρ`     | `½ llg(m)·σ` with `m` read from `ρ`               |
//! | `schrodinger_pauli` | `ψ`     | `Hψ / iħ`                                         |
//! | `sp_collapse`       | `ψ`     | solve `[iħσ0 − ħk(σ0 − ψψ†)] ψ̇ = Hψ`               |
//!
//! `H = −½ħγ B·σ`. The implicit Gilbert form `ṁ = γ m×B − k m×ṁ` is resolved
//! by crossing with `m` and using `|m| = 1`.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::pauli::{pauli_components, sigma_0, vec_to_pauli, Mat2, Vec3};
use crate::states::{
    bloch_from_angles, bloch_from_spinor, bloch_to_matrix, matrix_to_bloch, spinor_from_angles,
    BlochAngles, Spinor,
};
use crate::tolerances;
use crate::{Error, NonFiniteSnapshot, Result};

/// Electron charge magnitude, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Electron mass, kg.
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
/// Reduced Planck constant, J·s.
pub const HBAR_SI: f64 = 1.054_571_817e-34;

/// Magnetic flux density as a function of time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    Constant {
        b: Vec3,
    },
    /// `A (cos ωt e1 + sin ωt e2) + static_z ẑ`, where `(e1, e2, normal)` is
    /// right-handed. For `normal = ẑ`, `e1 = x̂` and `e2 = ŷ`.
    Rotating {
        amplitude: f64,
        omega: f64,
        #[serde(default = "default_normal")]
        normal: Vec3,
        #[serde(default)]
        static_z: f64,
    },
    /// Piecewise-linear samples on a strictly increasing grid. No extrapolation.
    Tabulated {
        times: Vec<f64>,
        samples: Vec<Vec3>,
    },
}

fn default_normal() -> Vec3 {
    Vec3::Z
}

impl FieldSpec {
    pub fn constant(b: Vec3) -> Self {
        FieldSpec::Constant { b }
    }

    pub fn tabulated(times: Vec<f64>, samples: Vec<Vec3>) -> Result<Self> {
        let f = FieldSpec::Tabulated { times, samples };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            FieldSpec::Constant { b } => {
                if !b.is_finite() {
                    return Err(Error::InvalidParameter(
                        "constant field is not finite".into(),
                    ));
                }
            }
            FieldSpec::Rotating {
                amplitude,
                omega,
                normal,
                static_z,
            } => {
                if !(amplitude.is_finite() && omega.is_finite() && static_z.is_finite()) {
                    return Err(Error::InvalidParameter(
                        "rotating field parameters must be finite".into(),
                    ));
                }
                if normal.normalized().is_none() {
                    return Err(Error::InvalidParameter(
                        "rotating field normal must be non-zero".into(),
                    ));
                }
            }
            FieldSpec::Tabulated { times, samples } => {
                if times.len() < 2 || times.len() != samples.len() {
                    return Err(Error::InvalidParameter(format!(
                        "tabulated field needs >= 2 samples and matching lengths (got {} times, {} samples)",
                        times.len(),
                        samples.len()
                    )));
                }
                if times.iter().any(|t| !t.is_finite()) || samples.iter().any(|s| !s.is_finite()) {
                    return Err(Error::InvalidParameter(
                        "tabulated field contains non-finite values".into(),
                    ));
                }
                if times.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidParameter(
                        "tabulated time grid must be strictly increasing".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, FieldSpec::Constant { .. })
    }

    pub fn eval(&self, t: f64) -> Result<Vec3> {
        match self {
            FieldSpec::Constant { b } => Ok(*b),
            FieldSpec::Rotating {
                amplitude,
                omega,
                normal,
                static_z,
            } => {
                let (e1, e2) = plane_basis(*normal);
                let (s, c) = (omega * t).sin_cos();
                Ok((amplitude * c) * e1 + (amplitude * s) * e2 + Vec3::new(0.0, 0.0, *static_z))
            }
            FieldSpec::Tabulated { times, samples } => {
                let (start, end) = (times[0], times[times.len() - 1]);
                // RK stages land on the grid ends up to accumulated rounding.
                let slack = 1e-12 * start.abs().max(end.abs()).max(1.0);
                if !(t >= start - slack && t <= end + slack) {
                    return Err(Error::FieldOutOfRange { t, start, end });
                }
                let t = t.clamp(start, end);
                let i = times.partition_point(|&x| x <= t).clamp(1, times.len() - 1);
                let (t0, t1) = (times[i - 1], times[i]);
                let w = (t - t0) / (t1 - t0);
                Ok(samples[i - 1].scale(1.0 - w) + samples[i].scale(w))
            }
        }
    }
}

fn plane_basis(normal: Vec3) -> (Vec3, Vec3) {
    let n = normal.normalized().unwrap_or(Vec3::Z);
    let e1 = Vec3::Y
        .cross(n)
        .normalized()
        .or_else(|| Vec3::Z.cross(n).normalized())
        .unwrap_or(Vec3::X);
    (e1, n.cross(e1))
}

/// Gyromagnetic ratio (signed), reduced Planck constant and induction factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalParams {
    #[serde(default = "one")]
    pub gamma: f64,
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default)]
    pub k_i: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            hbar: 1.0,
            k_i: 0.0,
        }
    }
}

impl PhysicalParams {
    pub fn new(gamma: f64, hbar: f64, k_i: f64) -> Result<Self> {
        let p = Self { gamma, hbar, k_i };
        p.validate()?;
        Ok(p)
    }

    /// Scale-free units: `ħ = 1`.
    pub fn scaled(gamma: f64, k_i: f64) -> Result<Self> {
        Self::new(gamma, 1.0, k_i)
    }

    /// SI electron with the classical ratio `γ = −e/(2 m_e)`.
    pub fn electron_classical() -> Self {
        Self {
            gamma: -ELEMENTARY_CHARGE / (2.0 * ELECTRON_MASS),
            hbar: HBAR_SI,
            k_i: 0.0,
        }
    }

    pub fn with_k_i(self, k_i: f64) -> Result<Self> {
        Self::new(self.gamma, self.hbar, k_i)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.gamma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "gamma = {} is not finite",
                self.gamma
            )));
        }
        if !(self.hbar.is_finite() && self.hbar > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "hbar = {} must be positive",
                self.hbar
            )));
        }
        if !(self.k_i.is_finite() && self.k_i >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "k_i = {} must be finite and >= 0",
                self.k_i
            )));
        }
        Ok(())
    }
}

/// Equation of motion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Law {
    Bloch,
    Llg,
    VonNeumann,
    NonlinearVn,
    SchrodingerPauli,
    SpCollapse,
}

impl Law {
    pub const ALL: [Law; 6] = [
        Law::Bloch,
        Law::Llg,
        Law::VonNeumann,
        Law::NonlinearVn,
        Law::SchrodingerPauli,
        Law::SpCollapse,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Law::Bloch => "bloch",
            Law::Llg => "llg",
            Law::VonNeumann => "von_neumann",
            Law::NonlinearVn => "nonlinear_vn",
            Law::SchrodingerPauli => "schrodinger_pauli",
            Law::SpCollapse => "sp_collapse",
        }
    }

    pub fn representation(self) -> Representation {
        match self {
            Law::Bloch | Law::Llg => Representation::Vector,
            Law::VonNeumann | Law::NonlinearVn => Representation::Density,
            Law::SchrodingerPauli | Law::SpCollapse => Representation::Spinor,
        }
    }
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Law {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Law::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown law '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    Vector,
    Density,
    Spinor,
}

/// A state in the representation its law evolves.
///
/// Density payloads are raw matrices: intermediate RK stages and unprojected
/// samples are not exactly unit-trace or pure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum State {
    Vector(Vec3),
    Density(Mat2),
    Spinor(Spinor),
}

impl State {
    /// Initial state for `law` built from Bloch angles through `ρ = ½(m·σ + σ0)`
    /// and `|ψ⟩ = (cos θ/2, sin θ/2 e^{iφ})`.
    pub fn from_angles(law: Law, a: BlochAngles) -> State {
        match law.representation() {
            Representation::Vector => State::Vector(bloch_from_angles(a)),
            Representation::Density => State::Density(bloch_to_matrix(bloch_from_angles(a))),
            Representation::Spinor => State::Spinor(spinor_from_angles(a)),
        }
    }

    pub fn representation(&self) -> Representation {
        match self {
            State::Vector(_) => Representation::Vector,
            State::Density(_) => Representation::Density,
            State::Spinor(_) => Representation::Spinor,
        }
    }

    /// Bloch vector without normalization: `m`, `vec(2ρ − σ0)` or `ψ†σψ`.
    pub fn bloch_vector(&self) -> Vec3 {
        match self {
            State::Vector(m) => *m,
            State::Density(rho) => matrix_to_bloch(rho),
            State::Spinor(psi) => bloch_from_spinor(psi),
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            State::Vector(m) => m.is_finite(),
            State::Density(rho) => rho.is_finite(),
            State::Spinor(psi) => psi.is_finite(),
        }
    }

    /// Projection back onto the constraint manifold: `|m| = 1`, `⟨ψ|ψ⟩ = 1`,
    /// or Hermitian with unit trace.
    pub fn projected(&self) -> State {
        match self {
            State::Vector(m) => State::Vector(m.normalized().unwrap_or(*m)),
            State::Spinor(psi) => {
                let n = psi.norm_sqr().sqrt();
                State::Spinor(if n > 0.0 {
                    psi.scale((1.0 / n).into())
                } else {
                    *psi
                })
            }
            State::Density(rho) => {
                let herm = (*rho + rho.dagger()).scale_re(0.5);
                let tr = herm.trace().re;
                State::Density(if tr != 0.0 {
                    herm.scale_re(1.0 / tr)
                } else {
                    herm
                })
            }
        }
    }
}

/// Conservation diagnostics of one sample.
///
/// `norm_dev` is `|m| − 1`, `tr ρ − 1` or `⟨ψ|ψ⟩ − 1`; `purity_dev` is
/// `tr(ρ²) − 1` of the implied density matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Diagnostics {
    pub norm_dev: f64,
    pub purity_dev: f64,
}

impl Diagnostics {
    pub fn of(state: &State) -> Self {
        match state {
            State::Vector(m) => {
                let n2 = m.dot(*m);
                Self {
                    norm_dev: n2.sqrt() - 1.0,
                    purity_dev: 0.5 * (n2 - 1.0),
                }
            }
            State::Density(rho) => Self {
                norm_dev: rho.trace().re - 1.0,
                purity_dev: (*rho * *rho).trace().re - 1.0,
            },
            State::Spinor(psi) => {
                let n2 = psi.norm_sqr();
                Self {
                    norm_dev: n2 - 1.0,
                    purity_dev: n2 * n2 - 1.0,
                }
            }
        }
    }
}

/// `H = −½ ħ γ B·σ`
pub fn hamiltonian(b: Vec3, p: &PhysicalParams) -> Mat2 {
    vec_to_pauli(b).scale_re(-0.5 * p.hbar * p.gamma)
}

/// `γ B` recovered from `H = −½ħγ B·σ`.
fn precession_vector(h: &Mat2, p: &PhysicalParams) -> Vec3 {
    pauli_components(h).scale(-2.0 / p.hbar)
}

/// `(m×w − k m×(m×w)) / (1 + k²)` with `w = γB`.
fn llg_velocity(m: Vec3, w: Vec3, k: f64) -> Vec3 {
    let mxw = m.cross(w);
    mxw.axpy(-k, m.cross(mxw)).scale(1.0 / (1.0 + k * k))
}

/// `γ m × B`
pub fn bloch_rhs(m: Vec3, b: Vec3, p: &PhysicalParams) -> Vec3 {
    m.cross(b).scale(p.gamma)
}

/// Explicit Landau–Lifshitz–Gilbert velocity
/// `γ/(1+k²) · (m×B − k m×(m×B))`. Reduces to [`bloch_rhs`] at `k = 0`.
pub fn llg_rhs(m: Vec3, b: Vec3, p: &PhysicalParams) -> Vec3 {
    llg_velocity(m, b.scale(p.gamma), p.k_i)
}

/// `[H, ρ] / iħ`
pub fn von_neumann_rhs(rho: &Mat2, h: &Mat2, p: &PhysicalParams) -> Mat2 {
    let comm = *h * *rho - *rho * *h;
    comm.scale(Complex64::new(0.0, -1.0 / p.hbar))
}

fn nonlinear_vn_velocity(rho: &Mat2, h: &Mat2, p: &PhysicalParams) -> Mat2 {
    let m = matrix_to_bloch(rho);
    let dm = llg_velocity(m, precession_vector(h, p), p.k_i);
    vec_to_pauli(dm).scale_re(0.5)
}

/// `dρ/dt` of `iħ ρ̇ − ħk[ρ̇, ρ] = [H, ρ]` for pure `ρ`, evaluated through
/// the Bloch map as `½ llg(m)·σ`.
pub fn nonlinear_vn_rhs(rho: &Mat2, h: &Mat2, p: &PhysicalParams) -> Result<Mat2> {
    let purity = (*rho * *rho).trace().re;
    if !((purity - 1.0).abs() <= tolerances::NONLINEAR_VN_PURITY) {
        return Err(Error::Purity { purity });
    }
    Ok(nonlinear_vn_velocity(rho, h, p))
}

/// `Hψ / iħ`
pub fn sp_rhs(psi: &Spinor, h: &Mat2, p: &PhysicalParams) -> Spinor {
    Spinor::from_array(h.apply(psi.as_array())).scale(Complex64::new(0.0, -1.0 / p.hbar))
}

/// `ψ̇` from `[iħσ0 − ħk(σ0 − ψψ†)] ψ̇ = Hψ`.
///
/// The system matrix has eigenvalues `iħ` and `ħ(i − k)` for unit `ψ`; it is
/// invertible for every real `k`.
pub fn sp_collapse_rhs(psi: &Spinor, h: &Mat2, p: &PhysicalParams) -> Spinor {
    let i_hbar = Complex64::new(0.0, p.hbar);
    let system = sigma_0().scale(i_hbar) - (sigma_0() - psi.outer()).scale_re(p.hbar * p.k_i);
    match system.solve(h.apply(psi.as_array())) {
        Some(x) => Spinor::from_array(x),
        None => Spinor::new(f64::NAN.into(), f64::NAN.into()),
    }
}

fn rk4<S>(
    y: &S,
    t: f64,
    h: f64,
    axpy: impl Fn(&S, f64, &S) -> S,
    f: impl Fn(f64, &S) -> Result<S>,
) -> Result<S> {
    let k1 = f(t, y)?;
    let k2 = f(t + 0.5 * h, &axpy(y, 0.5 * h, &k1))?;
    let k3 = f(t + 0.5 * h, &axpy(y, 0.5 * h, &k2))?;
    let k4 = f(t + h, &axpy(y, h, &k3))?;
    let mut out = axpy(y, h / 6.0, &k1);
    out = axpy(&out, h / 3.0, &k2);
    out = axpy(&out, h / 3.0, &k3);
    Ok(axpy(&out, h / 6.0, &k4))
}

/// One classical RK4 step of `law` from `(t, state)` to `t + dt`. No
/// renormalization.
pub fn rk4_step(
    law: Law,
    state: &State,
    t: f64,
    dt: f64,
    field: &FieldSpec,
    p: &PhysicalParams,
) -> Result<State> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "dt = {dt} must be positive"
        )));
    }
    if state.representation() != law.representation() {
        return Err(Error::StateMismatch { law });
    }
    let vec_axpy = |a: &Vec3, s: f64, b: &Vec3| a.axpy(s, *b);
    let mat_axpy = |a: &Mat2, s: f64, b: &Mat2| a.axpy(s, b);
    let spin_axpy = |a: &Spinor, s: f64, b: &Spinor| a.axpy(s, b);
    let ham = |t: f64| field.eval(t).map(|b| hamiltonian(b, p));

    Ok(match (law, state) {
        (Law::Bloch, State::Vector(m)) => State::Vector(rk4(m, t, dt, vec_axpy, |t, m| {
            Ok(bloch_rhs(*m, field.eval(t)?, p))
        })?),
        (Law::Llg, State::Vector(m)) => State::Vector(rk4(m, t, dt, vec_axpy, |t, m| {
            Ok(llg_rhs(*m, field.eval(t)?, p))
        })?),
        (Law::VonNeumann, State::Density(rho)) => {
            State::Density(rk4(rho, t, dt, mat_axpy, |t, r| {
                Ok(von_neumann_rhs(r, &ham(t)?, p))
            })?)
        }
        (Law::NonlinearVn, State::Density(rho)) => {
            State::Density(rk4(rho, t, dt, mat_axpy, |t, r| {
                Ok(nonlinear_vn_velocity(r, &ham(t)?, p))
            })?)
        }
        (Law::SchrodingerPauli, State::Spinor(psi)) => {
            State::Spinor(rk4(psi, t, dt, spin_axpy, |t, s| {
                Ok(sp_rhs(s, &ham(t)?, p))
            })?)
        }
        (Law::SpCollapse, State::Spinor(psi)) => {
            State::Spinor(rk4(psi, t, dt, spin_axpy, |t, s| {
                Ok(sp_collapse_rhs(s, &ham(t)?, p))
            })?)
        }
        _ => return Err(Error::StateMismatch { law }),
    })
}

/// One time point of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub state: State,
    pub diagnostics: Diagnostics,
}

/// Step count for covering `[0, t_end]` with steps of at most `dt`; the last
/// step is shortened so the grid ends exactly at `t_end`.
pub fn step_count(t_end: f64, dt: f64) -> usize {
    ((t_end / dt) - 1e-9).ceil().max(1.0) as usize
}

/// Lazily integrates one law, yielding the initial sample and one sample per
/// step. Memory use is constant.
#[derive(Debug, Clone)]
pub struct Propagator<'a> {
    law: Law,
    field: &'a FieldSpec,
    params: PhysicalParams,
    t_end: f64,
    dt: f64,
    n_steps: usize,
    renorm: bool,
    step: usize,
    state: State,
    last: Diagnostics,
    started: bool,
    halted: bool,
}

impl<'a> Propagator<'a> {
    pub fn new(
        law: Law,
        initial: State,
        field: &'a FieldSpec,
        params: PhysicalParams,
        t_end: f64,
        dt: f64,
        renorm: bool,
    ) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dt = {dt} must be positive"
            )));
        }
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "t_end = {t_end} must be positive"
            )));
        }
        if initial.representation() != law.representation() {
            return Err(Error::StateMismatch { law });
        }
        if !initial.is_finite() {
            return Err(Error::InvalidParameter(
                "initial state is not finite".into(),
            ));
        }
        params.validate()?;
        field.validate()?;
        Ok(Self {
            law,
            field,
            params,
            t_end,
            dt,
            n_steps: step_count(t_end, dt),
            renorm,
            step: 0,
            state: initial,
            last: Diagnostics::of(&initial),
            started: false,
            halted: false,
        })
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    fn time_of(&self, i: usize) -> f64 {
        if i >= self.n_steps {
            self.t_end
        } else {
            i as f64 * self.dt
        }
    }
}

impl Iterator for Propagator<'_> {
    type Item = Result<Sample>;

    fn next(&mut self) -> Option<Self::Item> {
        if !self.started {
            self.started = true;
            return Some(Ok(Sample {
                t: 0.0,
                state: self.state,
                diagnostics: self.last,
            }));
        }
        if self.halted || self.step >= self.n_steps {
            return None;
        }
        let t0 = self.time_of(self.step);
        let t1 = self.time_of(self.step + 1);
        let next = match rk4_step(self.law, &self.state, t0, t1 - t0, self.field, &self.params) {
            Ok(s) => s,
            Err(e) => {
                self.halted = true;
                return Some(Err(e));
            }
        };
        let diagnostics = Diagnostics::of(&next);
        if !next.is_finite() {
            self.halted = true;
            return Some(Err(Error::NonFinite(Box::new(NonFiniteSnapshot {
                law: self.law,
                step: self.step + 1,
                time: t1,
                last_finite: self.last,
            }))));
        }
        self.state = if self.renorm { next.projected() } else { next };
        self.last = diagnostics;
        self.step += 1;
        Some(Ok(Sample {
            t: t1,
            state: self.state,
            diagnostics,
        }))
    }
}

/// Time series of one law with per-sample diagnostics (recorded before any
/// projection).
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub law: Law,
    pub field: FieldSpec,
    pub params: PhysicalParams,
    pub dt: f64,
    pub renorm: bool,
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub diagnostics: Vec<Diagnostics>,
}

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &State {
        self.states
            .last()
            .expect("trajectory has at least the initial sample")
    }

    pub fn bloch_vectors(&self) -> Vec<Vec3> {
        self.states.iter().map(State::bloch_vector).collect()
    }

    pub fn max_abs_norm_dev(&self) -> f64 {
        self.diagnostics
            .iter()
            .map(|d| d.norm_dev.abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_purity_dev(&self) -> f64 {
        self.diagnostics
            .iter()
            .map(|d| d.purity_dev.abs())
            .fold(0.0, f64::max)
    }
}

/// Integrates `law` on `[0, t_end]` with RK4. With `renorm`, each new state
/// is projected back onto its constraint manifold after its diagnostics are
/// recorded.
pub fn integrate(
    law: Law,
    initial: State,
    field: &FieldSpec,
    params: PhysicalParams,
    t_end: f64,
    dt: f64,
    renorm: bool,
) -> Result<TrajectoryRecord> {
    let prop = Propagator::new(law, initial, field, params, t_end, dt, renorm)?;
    let n = prop.n_steps() + 1;
    let mut rec = TrajectoryRecord {
        law,
        field: field.clone(),
        params,
        dt,
        renorm,
        times: Vec::with_capacity(n),
        states: Vec::with_capacity(n),
        diagnostics: Vec::with_capacity(n),
    };
    for sample in prop {
        let s = sample?;
        rec.times.push(s.t);
        rec.states.push(s.state);
        rec.diagnostics.push(s.diagnostics);
    }
    Ok(rec)
}

/// Closed-form solution of `dm/dt = γ m × B` for constant `B`: rotation of
/// `m0` about `B̂` by `−γ|B|t`.
pub fn exact_precession(m0: Vec3, b: Vec3, p: &PhysicalParams, t: f64) -> Vec3 {
    let Some(n) = b.normalized() else {
        return m0;
    };
    let angle = -p.gamma * b.norm() * t;
    let (s, c) = angle.sin_cos();
    m0.scale(c) + n.cross(m0).scale(s) + n.scale(n.dot(m0) * (1.0 - c))
}

/// Larmor period `2π / |γB|`.
pub fn larmor_period(b: Vec3, p: &PhysicalParams) -> f64 {
    TAU / (p.gamma * b.norm()).abs()
}
