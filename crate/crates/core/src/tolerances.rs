//! Numerical tolerances and default grid sizes, collected in one place.

/// Relative tolerance of the adaptive quadrature.
pub const QUAD_REL_TOL: f64 = 1e-10;

/// Absolute floor of the adaptive quadrature.
pub const QUAD_ABS_TOL: f64 = 1e-14;

/// Maximum number of panels the adaptive quadrature may create.
pub const QUAD_PANEL_CAP: usize = 1 << 20;

/// Iteration cap of the polytope nearest-point solver.
pub const WOLFE_MAX_ITER: usize = 10_000;

/// Residual tolerance of the polytope nearest-point solver.
pub const WOLFE_TOL: f64 = 1e-12;

/// Profile grids exclude `|s| < CONE_S_MIN`.
pub const CONE_S_MIN: f64 = 1e-3;

/// Number of smallest-`|s|` nodes per side evaluated through truncated cones.
pub const CONE_FRUSTUM_NODES: usize = 5;

/// Points per stencil of the local Lagrange interpolation used for sampled data.
pub const INTERP_STENCIL: usize = 6;

/// Width (in the tanh variable) of panels used by cumulative sweeps; panels beyond
/// `SWEEP_PANEL_GROWTH` widen in proportion to their position.
pub const SWEEP_PANEL: f64 = 0.25;
pub const SWEEP_PANEL_GROWTH: f64 = 16.0;

/// Largest tanh-variable magnitude reached by sweeps that must exhaust their integrands.
pub const SWEEP_THETA_MAX: f64 = 300.0;

/// Bound on `2 a θ` in such sweeps, keeping `(1 - s^2)^-a` far from overflow.
pub const SWEEP_EXPONENT_MAX: f64 = 600.0;

/// Polar-angle grid for widths of bodies of revolution.
pub const WIDTH_GRID: usize = 1 << 12;

/// Default grid for suprema in the `D^a` norm.
pub const NORM_GRID: usize = 4096;

/// Tolerance when matching a density exponent against `(n - j - 1) / 2`.
pub const EXPONENT_MATCH_TOL: f64 = 1e-12;

/// Samples per deterministic Monte Carlo block.
pub const MC_BLOCK: usize = 4096;

/// Equilibrated condition number above which a radius grid is rejected.
pub const MC_MAX_COND: f64 = 1e10;

/// Fraction of the diameter used as the first Steiner radius.
pub const MC_RHO0_FRACTION: f64 = 0.05;

/// Number of uniform bands in the default band partition.
pub const MC_UNIFORM_BANDS: usize = 64;

/// Geometric refinement depth of the default band partition near the poles.
pub const MC_POLE_LEVELS: u32 = 12;

/// Safety factor applied to the empirical cap constant.
pub const FIREY_SAFETY: f64 = 4.0;

/// Deepest truncation level `r_k = 1 - 2^-k` used by the principal value.
pub const PV_MAX_LEVEL: u32 = 12;
