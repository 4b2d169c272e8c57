//! Numerical certificates: algebraic identities, singularity of `σ0 − ρ`,
//! cross-law equivalence runs, the collapse trend, ensemble statistics and
//! the classical torque quadratures behind `γ = q/2m`.
//!
//! Every check produces a [`CheckReport`]; [`run_suite`] runs the full set
//! at the acceptance parameters.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI, TAU};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cqd::{
    ensemble_collapse, predict, rng_for, CoQuantumPair, CoQuantumSampler, UniformSphere,
};
use crate::dynamics::{
    exact_precession, hamiltonian, integrate, sp_rhs, FieldSpec, Law, PhysicalParams, Propagator,
    State, TrajectoryRecord, ELECTRON_MASS, ELEMENTARY_CHARGE,
};
use crate::pauli::{pauli_identity_residual, sigma_0, Vec3};
use crate::states::{density_from_bloch, BlochAngles, Spinor};
use crate::tolerances as tol;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

/// Outcome of one check. A report without tolerance is informational and
/// always passes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub status: Status,
    pub residual: f64,
    pub tolerance: Option<f64>,
    pub params: Value,
}

impl CheckReport {
    pub fn asserted(
        check: impl Into<String>,
        residual: f64,
        tolerance: f64,
        params: Value,
    ) -> Self {
        let status = if residual <= tolerance {
            Status::Pass
        } else {
            Status::Fail
        };
        Self {
            check: check.into(),
            status,
            residual,
            tolerance: Some(tolerance),
            params,
        }
    }

    pub fn report_only(check: impl Into<String>, residual: f64, params: Value) -> Self {
        Self {
            check: check.into(),
            status: Status::Pass,
            residual,
            tolerance: None,
            params,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn is_asserted(&self) -> bool {
        self.tolerance.is_some()
    }
}

/// `max(a, b)` that keeps NaN.
fn max_nan(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

fn relative(got: Vec3, want: Vec3) -> f64 {
    got.distance(want) / want.norm()
}

// ---------------------------------------------------------------------------
// Algebra and structure

/// Largest residual of `(a·σ)(b·σ) = (a·b)σ0 + i(a×b)·σ` over `n` random
/// pairs drawn from `[−1, 1]³`.
pub fn check_pauli_identity(n: usize, seed: u64) -> CheckReport {
    let mut rng = rng_for(seed);
    let mut draw = || {
        Vec3::new(
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
        )
    };
    let residual = (0..n).fold(0.0, |acc, _| {
        let (a, b) = (draw(), draw());
        max_nan(acc, pauli_identity_residual(a, b))
    });
    CheckReport::asserted(
        "pauli.identity",
        residual,
        tol::PAULI_IDENTITY,
        json!({ "n": n, "seed": seed }),
    )
}

/// Largest `|det(σ0 − ρ)|` over `n` isotropic pure states.
pub fn check_singularity(n: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = rng_for(seed);
    let mut residual: f64 = 0.0;
    for _ in 0..n {
        let m = crate::states::bloch_from_angles(UniformSphere.sample(&mut rng));
        let rho = density_from_bloch(m)?;
        residual = max_nan(residual, (sigma_0() - *rho.matrix()).det().norm());
    }
    Ok(CheckReport::asserted(
        "states.singularity",
        residual,
        tol::DENSITY_STRUCTURE,
        json!({ "n": n, "seed": seed }),
    ))
}

/// Largest `|det(σ0 − ρ0)|` over `n` unit-trace pre-averaging operators
/// built from random electron directions and co-quantum pairs.
pub fn check_pre_avg_singularity(n: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = rng_for(seed);
    let mut residual: f64 = 0.0;
    let mut found = 0;
    while found < n {
        let mu_e = UniformSphere.sample(&mut rng);
        let (n1, n2) = (
            UniformSphere.sample(&mut rng),
            UniformSphere.sample(&mut rng),
        );
        let (Ok(r1), Ok(r2)) = (
            predict(&CoQuantumPair { mu_e, mu_n: n1 }),
            predict(&CoQuantumPair { mu_e, mu_n: n2 }),
        ) else {
            continue;
        };
        let rho0 = crate::cqd::pre_avg_density(&r1, &r2)?;
        if (rho0.trace().re - 1.0).abs() > 0.5 {
            continue;
        }
        residual = max_nan(residual, (sigma_0() - rho0).det().norm());
        found += 1;
    }
    Ok(CheckReport::asserted(
        "cqd.pre_avg_singularity",
        residual,
        tol::DENSITY_STRUCTURE,
        json!({ "n": n, "seed": seed }),
    ))
}

// ---------------------------------------------------------------------------
// Cross-law equivalence

/// Shared run definition for equivalence comparisons.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceConfig {
    pub field: FieldSpec,
    pub params: PhysicalParams,
    pub initial: BlochAngles,
    pub t_end: f64,
    pub dt: f64,
}

impl EquivalenceConfig {
    /// `γB0 = 1` along `ẑ`, `θ0 = π/3`, 100 Larmor periods at `dt = 1e-3`.
    pub fn acceptance(k_i: f64) -> Result<Self> {
        Ok(Self {
            field: FieldSpec::constant(Vec3::Z),
            params: PhysicalParams::scaled(1.0, k_i)?,
            initial: BlochAngles::new(FRAC_PI_3, 0.0)?,
            t_end: 100.0 * TAU,
            dt: 1e-3,
        })
    }

    fn params_json(&self) -> Value {
        json!({
            "field": self.field,
            "gamma": self.params.gamma,
            "hbar": self.params.hbar,
            "k_i": self.params.k_i,
            "theta0": self.initial.theta(),
            "phi0": self.initial.phi(),
            "t_end": self.t_end,
            "dt": self.dt,
        })
    }
}

/// Max-over-time Bloch distance for one pair of laws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairDeviation {
    pub a: Law,
    pub b: Law,
    pub max_deviation: f64,
}

/// Integrates every law in lockstep from the same Bloch angles and records
/// the largest Bloch-vector distance of every pair. Memory use does not
/// grow with the run length.
pub fn pairwise_deviations(laws: &[Law], cfg: &EquivalenceConfig) -> Result<Vec<PairDeviation>> {
    let mut props = laws
        .iter()
        .map(|&law| {
            Propagator::new(
                law,
                State::from_angles(law, cfg.initial),
                &cfg.field,
                cfg.params,
                cfg.t_end,
                cfg.dt,
                false,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let n = laws.len();
    let mut worst = vec![0.0; n * n];
    let mut m = vec![Vec3::ZERO; n];
    'outer: loop {
        for (slot, prop) in m.iter_mut().zip(props.iter_mut()) {
            match prop.next() {
                Some(sample) => *slot = sample?.state.bloch_vector(),
                None => break 'outer,
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                worst[i * n + j] = max_nan(worst[i * n + j], m[i].distance(m[j]));
            }
        }
    }
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            out.push(PairDeviation {
                a: laws[i],
                b: laws[j],
                max_deviation: worst[i * n + j],
            });
        }
    }
    Ok(out)
}

/// Tolerance under which two laws must agree, or `None` when they are only
/// reported. The linear laws form one class; LLG and the nonlinear von
/// Neumann law form a second class that merges with the first at `k_i = 0`.
/// The collapse spinor law is never asserted.
pub fn pair_tolerance(a: Law, b: Law, k_i: f64) -> Option<f64> {
    if a == Law::SpCollapse || b == Law::SpCollapse {
        return None;
    }
    let class = |l: Law| matches!(l, Law::Llg | Law::NonlinearVn) && k_i > 0.0;
    (class(a) == class(b)).then_some(tol::TRAJECTORY_EQUIVALENCE)
}

/// Pairwise reports for an arbitrary law set, asserted per [`pair_tolerance`].
pub fn compare_laws(laws: &[Law], cfg: &EquivalenceConfig) -> Result<Vec<CheckReport>> {
    let k = cfg.params.k_i;
    let damped = |l: Law| matches!(l, Law::Llg | Law::NonlinearVn | Law::SpCollapse);
    let params = cfg.params_json();
    Ok(pairwise_deviations(laws, cfg)?
        .into_iter()
        .map(|d| {
            let suffix = if k > 0.0 && (damped(d.a) || damped(d.b)) {
                format!(".k_{k}")
            } else {
                String::new()
            };
            let name = format!("equivalence.{}_vs_{}{suffix}", d.a, d.b);
            match pair_tolerance(d.a, d.b, k) {
                Some(t) => CheckReport::asserted(name, d.max_deviation, t, params.clone()),
                None => CheckReport::report_only(name, d.max_deviation, params.clone()),
            }
        })
        .collect())
}

/// LLG against the nonlinear von Neumann law (asserted) and against the
/// collapse spinor law (reported).
pub fn check_llg_equivalence(cfg: &EquivalenceConfig) -> Result<Vec<CheckReport>> {
    let mut reports = compare_laws(&[Law::Llg, Law::NonlinearVn, Law::SpCollapse], cfg)?;
    reports.retain(|r| {
        !r.check
            .starts_with("equivalence.nonlinear_vn_vs_sp_collapse")
    });
    Ok(reports)
}

/// The linear triple, plus the LLG group when `k_i > 0`.
pub fn check_equivalence(cfg: &EquivalenceConfig) -> Result<Vec<CheckReport>> {
    let mut reports = compare_laws(&[Law::Bloch, Law::VonNeumann, Law::SchrodingerPauli], cfg)?;
    if cfg.params.k_i > 0.0 {
        reports.extend(check_llg_equivalence(cfg)?);
    }
    Ok(reports)
}

// ---------------------------------------------------------------------------
// Trajectory checks

/// Largest `‖(σ0 − ψψ†)(iħψ̇ − Hψ)‖` along a Schrödinger–Pauli trajectory.
pub fn check_sp_residual(traj: &TrajectoryRecord) -> Result<CheckReport> {
    if traj.law != Law::SchrodingerPauli {
        return Err(Error::WrongLaw {
            expected: Law::SchrodingerPauli,
            found: traj.law,
        });
    }
    let p = &traj.params;
    let mut residual: f64 = 0.0;
    for (t, state) in traj.times.iter().zip(&traj.states) {
        let State::Spinor(psi) = state else {
            return Err(Error::StateMismatch { law: traj.law });
        };
        let h = hamiltonian(traj.field.eval(*t)?, p);
        let lhs = sp_rhs(psi, &h, p).scale(num_complex::Complex64::new(0.0, p.hbar));
        let err = lhs.axpy(-1.0, &Spinor::from_array(h.apply(psi.as_array())));
        let proj = Spinor::from_array((sigma_0() - psi.outer()).apply(err.as_array()));
        residual = max_nan(residual, proj.norm_sqr().sqrt());
    }
    Ok(CheckReport::asserted(
        "dynamics.sp_residual",
        residual,
        tol::SP_RESIDUAL,
        json!({ "field": traj.field, "samples": traj.len(), "dt": traj.dt }),
    ))
}

/// Least-squares slope of `ln tan(θ/2)` against the swept azimuth `|Δφ|`.
pub fn collapse_slope(traj: &TrajectoryRecord) -> f64 {
    let mut prev_phi: Option<f64> = None;
    let mut swept = 0.0;
    let (mut n, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for m in traj.bloch_vectors() {
        let phi = m.y.atan2(m.x);
        if let Some(p) = prev_phi {
            swept += (phi - p + PI).rem_euclid(TAU) - PI;
        }
        prev_phi = Some(phi);
        let theta = (m.x.hypot(m.y)).atan2(m.z);
        let x = swept.abs();
        let y = (0.5 * theta).tan().ln();
        n += 1.0;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Regression slope of the collapse trend against `−k_i · sign(γ B_z)`,
/// relative. The trajectory must come from a field along `ẑ`.
pub fn check_collapse_trend(traj: &TrajectoryRecord, k_i: f64) -> Result<CheckReport> {
    if !(k_i.is_finite() && k_i > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "k_i = {k_i} must be positive"
        )));
    }
    let bz = traj.field.eval(0.0)?.z;
    let expected = -k_i * (traj.params.gamma * bz).signum();
    let slope = collapse_slope(traj);
    Ok(CheckReport::asserted(
        "cqd.collapse_trend",
        (slope - expected).abs() / k_i,
        tol::COLLAPSE_SLOPE_RELATIVE,
        json!({ "k_i": k_i, "slope": slope, "expected": expected, "law": traj.law, "samples": traj.len() }),
    ))
}

/// LLG run from the equator in `ẑ` for `periods` Larmor periods.
pub fn collapse_trend_run(k_i: f64, periods: f64, dt: f64) -> Result<TrajectoryRecord> {
    let p = PhysicalParams::scaled(1.0, k_i)?;
    let initial = State::from_angles(Law::Llg, BlochAngles::new(FRAC_PI_2, 0.0)?);
    integrate(
        Law::Llg,
        initial,
        &FieldSpec::constant(Vec3::Z),
        p,
        periods * TAU,
        dt,
        false,
    )
}

/// One-period error ratio of the Bloch law at `dt = 2π/steps` and half that.
pub fn rk4_error_ratio(steps: usize) -> Result<f64> {
    let p = PhysicalParams::default();
    let field = FieldSpec::constant(Vec3::Z);
    let m0 = crate::states::bloch_from_angles(BlochAngles::new(FRAC_PI_3, 0.0)?);
    let exact = exact_precession(m0, Vec3::Z, &p, TAU);
    let err = |n: usize| -> Result<f64> {
        let rec = integrate(
            Law::Bloch,
            State::Vector(m0),
            &field,
            p,
            TAU,
            TAU / n as f64,
            false,
        )?;
        Ok(rec.final_state().bloch_vector().distance(exact))
    };
    Ok(err(steps)? / err(2 * steps)?)
}

pub fn check_integrator_order(steps: usize) -> Result<CheckReport> {
    let ratio = rk4_error_ratio(steps)?;
    Ok(CheckReport::asserted(
        "dynamics.rk4_order",
        (ratio - tol::RK4_ORDER_RATIO).abs(),
        tol::RK4_ORDER_SLACK,
        json!({ "steps_per_period": steps, "ratio": ratio }),
    ))
}

/// Largest `|⟨ψ|ψ⟩ − 1|` of an unrenormalized collapse-law run.
pub fn check_sp_collapse_norm_drift(k_i: f64, steps: usize, dt: f64) -> Result<CheckReport> {
    let p = PhysicalParams::scaled(1.0, k_i)?;
    let field = FieldSpec::constant(Vec3::Z);
    let init = State::from_angles(Law::SpCollapse, BlochAngles::new(FRAC_PI_3, 0.0)?);
    let mut drift: f64 = 0.0;
    for s in Propagator::new(
        Law::SpCollapse,
        init,
        &field,
        p,
        steps as f64 * dt,
        dt,
        false,
    )? {
        drift = max_nan(drift, s?.diagnostics.norm_dev.abs());
    }
    Ok(CheckReport::asserted(
        "dynamics.sp_collapse_norm_drift",
        drift,
        tol::SP_COLLAPSE_NORM_DRIFT,
        json!({ "k_i": k_i, "steps": steps, "dt": dt }),
    ))
}

/// At `k_i = 0` the collapse law must reproduce the Schrödinger–Pauli
/// spinors, phase included.
pub fn check_sp_collapse_reduction(cfg: &EquivalenceConfig) -> Result<CheckReport> {
    let cfg = EquivalenceConfig {
        params: cfg.params.with_k_i(0.0)?,
        ..cfg.clone()
    };
    let run = |law| {
        Propagator::new(
            law,
            State::from_angles(law, cfg.initial),
            &cfg.field,
            cfg.params,
            cfg.t_end,
            cfg.dt,
            false,
        )
    };
    let mut worst: f64 = 0.0;
    for (a, b) in run(Law::SpCollapse)?.zip(run(Law::SchrodingerPauli)?) {
        let (State::Spinor(x), State::Spinor(y)) = (a?.state, b?.state) else {
            unreachable!("spinor laws yield spinor states")
        };
        worst = max_nan(worst, x.max_abs_diff(&y));
    }
    Ok(CheckReport::asserted(
        "dynamics.sp_collapse_reduction",
        worst,
        tol::SP_COLLAPSE_REDUCTION,
        cfg.params_json(),
    ))
}

// ---------------------------------------------------------------------------
// Classical moments

/// Current loop, or equivalently one charge on a circular orbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LoopModel {
    pub radius: f64,
    pub current: f64,
    pub charge: f64,
    pub mass: f64,
    pub omega: f64,
}

impl LoopModel {
    pub fn new(radius: f64, current: f64, charge: f64, mass: f64, omega: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "radius = {radius} must be positive"
            )));
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "mass = {mass} must be positive"
            )));
        }
        if ![current, charge, omega].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter(
                "loop parameters must be finite".into(),
            ));
        }
        Ok(Self {
            radius,
            current,
            charge,
            mass,
            omega,
        })
    }

    /// A charge `q` circulating at `ω` carries the current `qω/2π`.
    pub fn orbiting_charge(radius: f64, charge: f64, mass: f64, omega: f64) -> Result<Self> {
        Self::new(radius, charge * omega / TAU, charge, mass, omega)
    }

    /// `I π R²` along `ẑ`.
    pub fn moment(&self) -> Vec3 {
        Vec3::Z.scale(self.current * PI * self.radius * self.radius)
    }
}

fn check_quadrature_count(n: usize) -> Result<()> {
    if n < 8 {
        return Err(Error::InvalidParameter(format!(
            "need at least 8 quadrature points, got {n}"
        )));
    }
    Ok(())
}

/// Midpoint-rule sum of `r × (I dr × B)` around a loop in the `xy` plane.
pub fn loop_torque_numeric(lp: &LoopModel, b: Vec3, n_segments: usize) -> Result<Vec3> {
    check_quadrature_count(n_segments)?;
    let h = TAU / n_segments as f64;
    let r0 = lp.radius;
    let mut tau = Vec3::ZERO;
    for j in 0..n_segments {
        let (s, c) = ((j as f64 + 0.5) * h).sin_cos();
        let r = Vec3::new(r0 * c, r0 * s, 0.0);
        let dr = Vec3::new(-r0 * s, r0 * c, 0.0).scale(h);
        tau += r.cross(dr.cross(b).scale(lp.current));
    }
    Ok(tau)
}

/// Time average over one orbit of `r × (q v × B)` for a point charge on a
/// circle, with `n_steps` midpoint samples.
pub fn particle_torque_avg(lp: &LoopModel, b: Vec3, n_steps: usize) -> Result<Vec3> {
    check_quadrature_count(n_steps)?;
    if lp.omega == 0.0 {
        return Err(Error::InvalidParameter("omega must be non-zero".into()));
    }
    let period = TAU / lp.omega.abs();
    let h = period / n_steps as f64;
    let (r0, w) = (lp.radius, lp.omega);
    let mut tau = Vec3::ZERO;
    for j in 0..n_steps {
        let (s, c) = (w * (j as f64 + 0.5) * h).sin_cos();
        let r = Vec3::new(r0 * c, r0 * s, 0.0);
        let v = Vec3::new(-r0 * w * s, r0 * w * c, 0.0);
        tau += r.cross(v.cross(b).scale(lp.charge));
    }
    Ok(tau.scale(1.0 / n_steps as f64))
}

/// `q / 2m`
pub fn gyromagnetic_classical(q: f64, mass: f64) -> Result<f64> {
    if !(mass.is_finite() && mass > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "mass = {mass} must be positive"
        )));
    }
    Ok(q / (2.0 * mass))
}

/// Moment over angular momentum in both pictures, `IπR²/(mR²ω)` and
/// `½qvR/(mvR)`, against `q/2m` for random radii and angular velocities.
pub fn gyromagnetic_models_residual(n: usize, seed: u64) -> Result<f64> {
    let mut rng = rng_for(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let (r, w) = (rng.random_range(0.1..10.0), rng.random_range(0.1..10.0));
        let (q, m) = (rng.random_range(-5.0..5.0), rng.random_range(0.1..10.0));
        let lp = LoopModel::orbiting_charge(r, q, m, w)?;
        let target = gyromagnetic_classical(q, m)?;
        let from_loop = lp.current * PI * r * r / (m * r * r * w);
        let v = w * r;
        let from_particle = 0.5 * q * v * r / (m * v * r);
        let scale = target.abs().max(f64::MIN_POSITIVE);
        worst = max_nan(
            worst,
            ((from_loop - target)
                .abs()
                .max((from_particle - target).abs()))
                / scale,
        );
    }
    Ok(worst)
}

pub fn check_loop_torque(n_segments: usize) -> Result<CheckReport> {
    let lp = LoopModel::new(1.0, 1.0, 1.0, 1.0, 1.0)?;
    let got = loop_torque_numeric(&lp, Vec3::X, n_segments)?;
    Ok(CheckReport::asserted(
        "torque.loop",
        relative(got, Vec3::new(0.0, PI, 0.0)),
        tol::LOOP_TORQUE_RELATIVE,
        json!({ "R": 1.0, "I": 1.0, "B": Vec3::X, "n_segments": n_segments, "torque": got }),
    ))
}

pub fn check_particle_torque(n_steps: usize) -> Result<CheckReport> {
    let lp = LoopModel::new(1.0, 1.0 / TAU, 1.0, 1.0, 1.0)?;
    let got = particle_torque_avg(&lp, Vec3::X, n_steps)?;
    Ok(CheckReport::asserted(
        "torque.particle",
        relative(got, Vec3::new(0.0, 0.5, 0.0)),
        tol::PARTICLE_TORQUE_RELATIVE,
        json!({ "q": 1.0, "R": 1.0, "omega": 1.0, "B": Vec3::X, "n_steps": n_steps, "torque": got }),
    ))
}

/// Loop and point-charge torques for the same `(q, ω, R)` must agree.
pub fn check_torque_models_agree(n: usize) -> Result<CheckReport> {
    let lp = LoopModel::orbiting_charge(1.3, 0.7, 1.0, 2.1)?;
    let b = Vec3::new(0.4, -1.1, 0.6);
    let a = loop_torque_numeric(&lp, b, n)?;
    let p = particle_torque_avg(&lp, b, n)?;
    let g = gyromagnetic_models_residual(1000, 17)?;
    Ok(CheckReport::asserted(
        "torque.models_agree",
        max_nan(relative(a, p), g),
        tol::PARTICLE_TORQUE_RELATIVE,
        json!({ "loop": lp, "B": b, "n": n, "gamma_ratio_residual": g }),
    ))
}

/// `q/2m` for the electron against `8.7941e10`.
pub fn check_gyromagnetic_electron() -> Result<CheckReport> {
    let g = gyromagnetic_classical(ELEMENTARY_CHARGE, ELECTRON_MASS)?;
    Ok(CheckReport::asserted(
        "gyromagnetic.electron",
        (g - 8.7941e10).abs() / 8.7941e10,
        tol::GYROMAGNETIC_RELATIVE,
        json!({ "q": ELEMENTARY_CHARGE, "m": ELECTRON_MASS, "gamma": g }),
    ))
}

/// Largest distance between the summed trajectories of `moments` and the
/// trajectory of their sum under the Bloch law.
pub fn extended_body_deviation(
    moments: &[Vec3],
    field: &FieldSpec,
    p: PhysicalParams,
    t_end: f64,
    dt: f64,
) -> Result<f64> {
    let total = moments.iter().fold(Vec3::ZERO, |acc, &m| acc + m);
    let mut parts = moments
        .iter()
        .map(|&m| Propagator::new(Law::Bloch, State::Vector(m), field, p, t_end, dt, false))
        .collect::<Result<Vec<_>>>()?;
    let whole = Propagator::new(Law::Bloch, State::Vector(total), field, p, t_end, dt, false)?;
    let mut worst: f64 = 0.0;
    for w in whole {
        let mut sum = Vec3::ZERO;
        for part in parts.iter_mut() {
            let s = part.next().expect("equal grids")?;
            sum += s.state.bloch_vector();
        }
        worst = max_nan(worst, sum.distance(w?.state.bloch_vector()));
    }
    Ok(worst)
}

/// `n` isotropic unit moments, integrated separately and as one body.
pub fn extended_body_consistency(
    n: usize,
    b: Vec3,
    p: PhysicalParams,
    t_end: f64,
    dt: f64,
    seed: u64,
) -> Result<CheckReport> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one element".into()));
    }
    let mut rng = rng_for(seed);
    let moments: Vec<Vec3> = (0..n)
        .map(|_| crate::states::bloch_from_angles(UniformSphere.sample(&mut rng)))
        .collect();
    let dev = extended_body_deviation(&moments, &FieldSpec::constant(b), p, t_end, dt)?;
    Ok(CheckReport::asserted(
        "dynamics.extended_body",
        dev,
        tol::EXTENDED_BODY,
        json!({ "n": n, "B": b, "gamma": p.gamma, "t_end": t_end, "dt": dt, "seed": seed }),
    ))
}

/// `|fraction_up − cos²(θe/2)|` against three binomial standard errors.
pub fn check_born(name: &str, theta_e: f64, n: usize, seed: u64) -> Result<CheckReport> {
    let s = ensemble_collapse(theta_e, n, 0.0, seed)?;
    Ok(CheckReport::asserted(
        name,
        (s.fraction_up - s.expected).abs(),
        tol::BORN_Z_SCORE * s.std_error,
        json!({ "theta_e": theta_e, "n": n, "seed": seed, "fraction_up": s.fraction_up,
                "expected": s.expected, "z_score": s.z_score }),
    ))
}

// ---------------------------------------------------------------------------
// Suite

type CheckFn = Box<dyn Fn() -> Result<Vec<CheckReport>> + Send + Sync>;

/// Seed for the randomized suite checks.
pub const SUITE_SEED: u64 = 7;

fn one(f: impl Fn() -> Result<CheckReport> + Send + Sync + 'static) -> CheckFn {
    Box::new(move || f().map(|r| vec![r]))
}

/// Checks as `(name pattern, producer)`. Group producers yield several
/// reports under a common prefix.
fn registry(seed: u64) -> Vec<(&'static str, CheckFn)> {
    let sp_runs = || -> Result<Vec<CheckReport>> {
        let p = PhysicalParams::default();
        let init = State::from_angles(Law::SchrodingerPauli, BlochAngles::new(FRAC_PI_3, 0.0)?);
        let constant = integrate(
            Law::SchrodingerPauli,
            init,
            &FieldSpec::constant(Vec3::Z),
            p,
            10.0 * TAU,
            1e-3,
            false,
        )?;
        let rotating = FieldSpec::Rotating {
            amplitude: 0.7,
            omega: 1.3,
            normal: Vec3::new(0.2, 0.1, 1.0),
            static_z: 1.0,
        };
        let driven = integrate(
            Law::SchrodingerPauli,
            init,
            &rotating,
            p,
            10.0 * TAU,
            1e-3,
            false,
        )?;
        let mut a = check_sp_residual(&constant)?;
        let mut b = check_sp_residual(&driven)?;
        a.check.push_str(".constant");
        b.check.push_str(".rotating");
        Ok(vec![a, b])
    };
    vec![
        (
            "pauli.identity",
            one(move || Ok(check_pauli_identity(1000, seed))),
        ),
        (
            "states.singularity",
            one(move || check_singularity(1000, seed)),
        ),
        (
            "cqd.pre_avg_singularity",
            one(move || check_pre_avg_singularity(100, seed)),
        ),
        (
            "equivalence.*",
            Box::new(move || check_equivalence(&EquivalenceConfig::acceptance(0.1)?)),
        ),
        (
            "equivalence.*.k_0.01",
            Box::new(move || check_llg_equivalence(&EquivalenceConfig::acceptance(0.01)?)),
        ),
        (
            "equivalence.*.k_1",
            Box::new(move || check_llg_equivalence(&EquivalenceConfig::acceptance(1.0)?)),
        ),
        (
            "cqd.collapse_trend",
            one(move || check_collapse_trend(&collapse_trend_run(0.05, 10.0, 1e-3)?, 0.05)),
        ),
        (
            "cqd.born.pi_3",
            one(move || check_born("cqd.born.pi_3", FRAC_PI_3, 100_000, seed)),
        ),
        (
            "cqd.born.pi_2",
            one(move || check_born("cqd.born.pi_2", FRAC_PI_2, 100_000, seed)),
        ),
        (
            "cqd.born.2pi_3",
            one(move || check_born("cqd.born.2pi_3", 2.0 * FRAC_PI_3, 100_000, seed)),
        ),
        ("torque.loop", one(move || check_loop_torque(10_000))),
        (
            "torque.particle",
            one(move || check_particle_torque(10_000)),
        ),
        (
            "torque.models_agree",
            one(move || check_torque_models_agree(10_000)),
        ),
        ("gyromagnetic.electron", one(check_gyromagnetic_electron)),
        (
            "dynamics.rk4_order",
            one(move || check_integrator_order(RK4_ORDER_STEPS)),
        ),
        ("dynamics.sp_residual.*", Box::new(sp_runs)),
        (
            "dynamics.sp_collapse_norm_drift",
            one(move || check_sp_collapse_norm_drift(0.1, 100_000, 1e-3)),
        ),
        (
            "dynamics.sp_collapse_reduction",
            one(move || check_sp_collapse_reduction(&EquivalenceConfig::acceptance(0.0)?)),
        ),
        (
            "dynamics.extended_body",
            one(move || {
                extended_body_consistency(16, Vec3::Z, PhysicalParams::default(), TAU, 1e-3, seed)
            }),
        ),
    ]
}

/// Steps per period of the coarse run in the integrator order check.
pub const RK4_ORDER_STEPS: usize = 100;

/// Names of the checks (or check groups) in the suite.
pub fn suite_names() -> Vec<&'static str> {
    registry(SUITE_SEED).into_iter().map(|(n, _)| n).collect()
}

/// Runs every check whose name matches the glob `filter` (all when `None`)
/// in parallel. Reports are sorted by name. A pattern matching nothing is a
/// parameter error.
pub fn run_suite(filter: Option<&str>) -> Result<Vec<CheckReport>> {
    run_suite_seeded(filter, SUITE_SEED)
}

/// [`run_suite`] with a caller-chosen seed for the randomized checks.
pub fn run_suite_seeded(filter: Option<&str>, seed: u64) -> Result<Vec<CheckReport>> {
    let pattern = filter
        .map(glob::Pattern::new)
        .transpose()
        .map_err(|e| Error::InvalidParameter(format!("bad filter: {e}")))?;
    // Group entries are kept when the filter could match any report they
    // produce, then the reports themselves are filtered.
    let prefix_of = |name: &str| name.split('*').next().unwrap_or("").to_string();
    let selected: Vec<_> = registry(seed)
        .into_iter()
        .filter(|(name, _)| match &pattern {
            None => true,
            Some(p) => {
                let pre = prefix_of(name);
                let fixed = prefix_of(p.as_str());
                p.matches(name)
                    || (name.contains('*') && (pre.starts_with(&fixed) || fixed.starts_with(&pre)))
            }
        })
        .collect();
    let mut reports: Vec<CheckReport> = selected
        .par_iter()
        .map(|(_, f)| f())
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .filter(|r| pattern.as_ref().is_none_or(|p| p.matches(&r.check)))
        .collect();
    if reports.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "no checks match filter '{}'",
            filter.unwrap_or("")
        )));
    }
    reports.sort_by(|a, b| a.check.cmp(&b.check));
    Ok(reports)
}
