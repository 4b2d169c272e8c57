//! Tolerances shared by the library checks, the verification suite and the
//! acceptance tests. Keeping them in one place stops the suite and the tests
//! from drifting apart.

/// Hermiticity / tracelessness accepted when reading a matrix as `v·σ`.
pub const REPRESENTATION: f64 = 1e-10;

/// Pauli-algebra identities evaluated in double precision.
pub const PAULI_IDENTITY: f64 = 1e-13;

/// Hermiticity and unit trace of a density matrix.
pub const DENSITY_STRUCTURE: f64 = 1e-12;

/// Eigenvalue slack for a density matrix outside `[0, 1]`.
pub const DENSITY_SPECTRUM: f64 = 1e-10;

/// Unit norm of spinors and Bloch vectors handed to constructors.
pub const UNIT_NORM: f64 = 1e-10;

/// Purity accepted by `spinor_from_density`.
pub const PURE_STATE: f64 = 1e-8;

/// Purity accepted by the nonlinear von Neumann right-hand side.
pub const NONLINEAR_VN_PURITY: f64 = 1e-6;

/// `det(σ0 − ρ)` for pure states and unit-trace pre-averaging operators.
pub const SINGULARITY: f64 = 1e-12;

/// Max Bloch-vector deviation between equivalent laws (RK4, dt = 1e-3).
pub const TRAJECTORY_EQUIVALENCE: f64 = 1e-6;

/// Residual `(σ0 − ρ)(iħψ̇ − Hψ)` along a Schrödinger–Pauli trajectory.
pub const SP_RESIDUAL: f64 = 1e-10;

/// Relative error of the fitted collapse slope against `−k_i`.
pub const COLLAPSE_SLOPE_RELATIVE: f64 = 1e-4;

/// Current-loop torque quadrature, relative.
pub const LOOP_TORQUE_RELATIVE: f64 = 1e-8;

/// Point-particle cycle-averaged torque, relative.
pub const PARTICLE_TORQUE_RELATIVE: f64 = 1e-6;

/// Electron gyromagnetic ratio against 8.7941e10 rad/(s·T), relative.
pub const GYROMAGNETIC_RELATIVE: f64 = 1e-4;

/// Step-halving error ratio of RK4 must be `16 ± 1`.
pub const RK4_ORDER_RATIO: f64 = 16.0;
pub const RK4_ORDER_SLACK: f64 = 1.0;

/// Norm drift of the collapse Schrödinger–Pauli law over 1e5 steps.
pub const SP_COLLAPSE_NORM_DRIFT: f64 = 1e-8;

/// Collapse law at `k_i = 0` against the plain Schrödinger–Pauli law.
pub const SP_COLLAPSE_REDUCTION: f64 = 1e-9;

/// Summed-moment trajectory against the sum of trajectories.
pub const EXTENDED_BODY: f64 = 1e-8;

/// Binomial z-score bound for the co-quantum branching fraction.
pub const BORN_Z_SCORE: f64 = 3.0;
