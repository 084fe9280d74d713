"""Quantitative studies confronting the simulated half-wave flow with its
effective dynamics: error-scaling sweeps, the Y-vs-U flow comparison,
conservation audits, oscillatory-primitive growth laws, the qualitative
Sobolev-growth study, and the kernel oracle audit.

Every experiment is a pure function of its plan; identical plans produce
identical reports.  Independent sweep rows may run concurrently (capped by
the SZEGO_RG_THREADS environment variable); assembly order is fixed, so
results do not depend on scheduling.
"""

from __future__ import annotations

import enum
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import resonance as rs
from .dynamics import (
    Flow,
    FlowSpec,
    Trajectory,
    first_order_ansatz,
    integrate,
    second_order_ansatz,
)
from .spectral import (
    Domain,
    FrequencyGrid,
    SpectralField,
    ConservedReport,
    conserved_series,
    make_grid,
    mass,
    momentum,
    negative_mode_mass,
    sobolev_norm,
)

TWO_PI = 2.0 * np.pi
ERROR_FLOOR = 1e-15


def worker_count() -> int:
    """Worker cap for concurrent sweep rows.

    SZEGO_RG_THREADS caps the pool (defaulting to the hardware count), but
    desk-scale sweep rows are dominated by small-array numpy calls that hold
    the GIL, and measured throughput degrades when threaded; the runner
    therefore stays serial unless parallelism is requested explicitly.
    """
    env = os.environ.get("SZEGO_RG_THREADS", "")
    if env.strip():
        return min(max(1, int(env)), os.cpu_count() or 1)
    return 1


class Experiment(enum.Enum):
    SCALING1_TORUS = "scaling_first_order_torus"
    SCALING1_BOX = "scaling_first_order_box"
    SCALING2_TORUS = "scaling_second_order_torus"
    Y_VS_U = "y_vs_u"
    CONSERVATION = "conservation"
    FOSC_GROWTH = "fosc_growth"
    SOBOLEV_GROWTH = "sobolev_growth"
    KERNEL_AUDIT = "kernel_audit"


class DataKind(enum.Enum):
    HARDY_POLYNOMIAL = "hardy_polynomial"
    RATIONAL_NONGENERIC = "rational_nongeneric"
    SEEDED_RANDOM_HARDY = "seeded_random_hardy"


class HorizonMode(enum.Enum):
    LOG_CORRECTED = "log_corrected"
    FIXED_SLOW_TIME = "fixed_slow_time"


@dataclass(frozen=True)
class InitialDataSpec:
    """Hardy initial data: a mode polynomial, the two-pole rational profile
    1/(x+i) - 2/(x+2i) sampled onto the box grid, or seeded random decay.

    normalization > 0 rescales to that L2 norm (None keeps raw amplitudes);
    scale multiplies afterwards.  For the resonant flow a scale factor is an
    exact symmetry that compresses effective time by its square.
    """

    kind: DataKind = DataKind.HARDY_POLYNOMIAL
    modes: tuple[int, ...] = (1, 2, 3)
    amplitudes: tuple[complex, ...] = (2.0, 1.0, 0.5)
    seed: int = 20240
    decay: float = 1.5
    normalization: float | None = 1.0
    scale: float = 1.0

    def build(self, grid: FrequencyGrid) -> SpectralField:
        if self.kind is DataKind.HARDY_POLYNOMIAL:
            c = np.zeros(grid.size, dtype=np.complex128)
            for k, a in zip(self.modes, self.amplitudes, strict=True):
                if k < 0:
                    raise ValueError("Hardy polynomial data requires modes k >= 0")
                c[grid.index(k)] = a
        elif self.kind is DataKind.RATIONAL_NONGENERIC:
            # coefficients (1/L) * F(W0)(xi_k) of the periodized profile;
            # F(1/(x+ia))(xi) = -2*pi*i*exp(-a*xi) for xi >= 0.
            xi = np.clip(grid.freqs, 0.0, None)
            c = np.where(
                grid.modes >= 0,
                -2j * np.pi * (np.exp(-xi) - 2.0 * np.exp(-2.0 * xi)) / grid.length,
                0.0,
            )
        else:
            rng = np.random.default_rng(self.seed)
            z = rng.standard_normal(grid.size) + 1j * rng.standard_normal(grid.size)
            c = np.where(
                grid.modes >= 0, z * (1.0 + np.abs(grid.modes)) ** (-self.decay), 0.0
            )
        f = SpectralField(grid, c)
        if self.normalization is not None:
            q = np.sqrt(mass(f))
            if q == 0:
                raise ValueError("cannot normalize identically-zero initial data")
            f = (self.normalization / q) * f
        if self.scale != 1.0:
            f = self.scale * f
        return f


@dataclass(frozen=True)
class ExperimentPlan:
    """Resolved description of one experiment run.

    alpha and delta enter the horizon T(eps) = eps^-2 (log(1/eps^delta))^(1-2*alpha)
    in LOG_CORRECTED mode; FIXED_SLOW_TIME uses slow_time_cap/eps^2 instead.
    """

    experiment: Experiment
    eps_list: tuple[float, ...] = (0.2, 0.1, 0.05, 0.025)
    s: float = 1.0
    alpha: float = 0.0
    delta: float = 0.1
    n_max: int = 32
    initial_data: InitialDataSpec = field(default_factory=InitialDataSpec)
    horizon_mode: HorizonMode = HorizonMode.LOG_CORRECTED
    slow_time_cap: float = 2.0
    domain: Domain = Domain.TORUS
    length: float = TWO_PI
    dt: float = 0.05
    snapshots_per_run: int = 150
    flow: Flow = Flow.FULL_NLW
    t_end: float = 1000.0
    growth_t_min: float = 10.0
    growth_t_max: float = 400.0
    growth_points: int = 25
    slope_threshold: float | None = None
    residual_max: float | None = None
    hypothesis_factor: float = 3.0
    audit_fields: int = 20
    audit_seed: int = 20240
    negative_control: bool = False

    def __post_init__(self):
        if len(self.eps_list) != len(set(self.eps_list)):
            raise ValueError("eps_list entries must be distinct")
        if any(not 0.0 < e <= 0.5 for e in self.eps_list):
            raise ValueError("each eps must lie in (0, 0.5]")
        if list(self.eps_list) != sorted(self.eps_list, reverse=True):
            raise ValueError("eps_list must be strictly decreasing")
        if not 0.0 <= self.alpha <= 0.5:
            raise ValueError("alpha must lie in [0, 1/2]")
        if self.delta <= 0:
            raise ValueError("delta must be positive")

    def grid(self) -> FrequencyGrid:
        return make_grid(self.n_max, self.domain, self.length)

    def horizon(self, eps: float) -> float:
        if self.horizon_mode is HorizonMode.FIXED_SLOW_TIME:
            return self.slow_time_cap / eps**2
        log_factor = np.log(1.0 / eps**self.delta)
        if log_factor <= 0:
            raise ValueError("horizon log factor must be positive (eps too close to 1)")
        return float(log_factor ** (1.0 - 2.0 * self.alpha) / eps**2)


def default_plan(experiment: Experiment) -> ExperimentPlan:
    """Tuned defaults per experiment (all overridable via the config layer)."""
    base = ExperimentPlan(experiment=experiment)
    if experiment is Experiment.SCALING1_TORUS:
        return base
    if experiment is Experiment.SCALING2_TORUS:
        return replace(base, eps_list=(0.2, 0.14, 0.1, 0.07))
    if experiment is Experiment.Y_VS_U:
        # alpha = 1/2 removes the log factor from the horizon; the Y-U gap is
        # purely secular, so any log factor would contaminate the fitted slope
        return replace(base, eps_list=(0.2, 0.1, 0.05), alpha=0.5)
    if experiment is Experiment.SCALING1_BOX:
        return replace(
            base,
            eps_list=(0.2, 0.1, 0.05),
            alpha=0.5,
            domain=Domain.BIGBOX,
            length=64.0 * np.pi,
            n_max=384,
            initial_data=InitialDataSpec(kind=DataKind.RATIONAL_NONGENERIC, normalization=None),
        )
    if experiment is Experiment.CONSERVATION:
        # amplitude chosen inside the spectrally-resolved regime for the
        # pinned (n_max=32, dt=0.05, t=1e3) gate; at roughly twice this norm
        # the truncation cascade reaches marginally-resolved modes and the
        # fixed-step quadrature error dominates the drift
        return replace(
            base,
            eps_list=(0.1,),
            initial_data=InitialDataSpec(normalization=0.4),
            t_end=1000.0,
        )
    if experiment is Experiment.FOSC_GROWTH:
        return replace(
            base,
            domain=Domain.BIGBOX,
            length=512.0 * np.pi,
            n_max=1024,
            initial_data=InitialDataSpec(kind=DataKind.RATIONAL_NONGENERIC, normalization=None),
        )
    if experiment is Experiment.SOBOLEV_GROWTH:
        return replace(
            base,
            domain=Domain.BIGBOX,
            length=256.0 * np.pi,
            n_max=32768,
            dt=0.1,
            t_end=40.0,
            growth_t_min=10.0,
            growth_t_max=40.0,
            initial_data=InitialDataSpec(
                kind=DataKind.RATIONAL_NONGENERIC, normalization=None, scale=2.0
            ),
        )
    if experiment is Experiment.KERNEL_AUDIT:
        return replace(base, n_max=8)
    return base


# ---------------------------------------------------------------------------
# report types


@dataclass(frozen=True)
class ScalingRow:
    eps: float
    horizon: float
    sup_error: float
    sup_w_norm: float
    flagged: bool
    failed: bool = False


@dataclass(frozen=True)
class ScalingReport:
    experiment: Experiment
    rows: tuple[ScalingRow, ...]
    fitted_slope: float
    fit_residual: float
    passed: bool
    caveats: tuple[str, ...] = ()
    companion: "ScalingReport | None" = None  # first-order contrast rows


@dataclass(frozen=True)
class GrowthReport:
    experiment: Experiment
    times: np.ndarray
    norms: np.ndarray
    in_window: np.ndarray
    exponent: float
    window: tuple[float, float]
    qualitative: bool
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class AuditRow:
    check: str
    max_error: float
    threshold: float
    passed: bool


@dataclass(frozen=True)
class AuditReport:
    rows: tuple[AuditRow, ...]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)


def fit_loglog(xs, ys) -> tuple[float, float, bool]:
    """Least-squares slope of log(y) against log(x).

    Returns (slope, rms residual, floored) where floored reports that some
    zero values were replaced by the 1e-15 floor.  Requires >= 3 usable rows.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size < 3:
        raise ValueError("log-log fit needs at least 3 rows")
    if np.any(xs <= 0):
        raise ValueError("log-log fit needs positive abscissae")
    floored = bool(np.any(ys < ERROR_FLOOR))
    ys = np.maximum(ys, ERROR_FLOOR)
    lx, ly = np.log(xs), np.log(ys)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = float(np.sqrt(np.mean((ly - (slope * lx + intercept)) ** 2)))
    return float(slope), resid, floored


def _map_rows(fn, items):
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# scaling experiments


def _flow_spec(plan: ExperimentPlan, flow: Flow, grid, eps: float, t_end: float) -> FlowSpec:
    return FlowSpec(
        flow=flow,
        grid=grid,
        eps=eps,
        dt=plan.dt,
        t_end=t_end,
        s=plan.s,
        snapshot_stride=t_end / plan.snapshots_per_run,
        slow_time_cap=max(plan.slow_time_cap, t_end * eps**2 + 1.0),
    )


def _hypothesis_flag(plan: ExperimentPlan, eps: float, w_traj: Trajectory, w0_norm: float) -> tuple[float, bool]:
    """Monitor sup_t ||W(t)||_{H^s} against the bounded-solution hypothesis."""
    sup_w = max(sobolev_norm(f, plan.s) for f in w_traj.states)
    bound = plan.hypothesis_factor * w0_norm * np.log(1.0 / eps**plan.delta) ** plan.alpha
    return sup_w, sup_w > bound


def _sup_error(v_traj: Trajectory, ansatz, s: float) -> float:
    return max(sobolev_norm(v_traj.state_at(t) - ansatz(t), s) for t in v_traj.times)


def _finish_scaling(plan, rows, caveats=(), companion=None, slope_min=0.0, residual_max=None):
    usable = [(r.eps, r.sup_error) for r in rows if not r.failed]
    if len(usable) >= 3:
        slope, resid, _ = fit_loglog([u[0] for u in usable], [u[1] for u in usable])
    else:
        slope, resid = float("nan"), float("nan")
    passed = bool(
        len(usable) == len(rows)
        and np.isfinite(slope)
        and slope >= slope_min
        and (residual_max is None or resid <= residual_max)
    )
    return ScalingReport(
        experiment=plan.experiment,
        rows=tuple(rows),
        fitted_slope=slope,
        fit_residual=resid,
        passed=passed,
        caveats=tuple(caveats),
        companion=companion,
    )


def run_scaling_first_order_torus(plan: ExperimentPlan) -> ScalingReport:
    """Sweep eps: integrate the full flow and the resonant flow from eps*W0,
    record sup_t ||v(t) - exp(-i|D|t) eps W(t)||_{H^s}, fit the log-log slope.
    """
    grid = plan.grid()
    w0 = plan.initial_data.build(grid)
    w0_norm = sobolev_norm(w0, plan.s)

    def row(eps: float) -> ScalingRow:
        t_end = plan.horizon(eps)
        sp = lambda flow: _flow_spec(plan, flow, grid, eps, t_end)
        v_traj = integrate(sp(Flow.FULL_NLW), eps * w0)
        w_traj = integrate(sp(Flow.FIRST_ORDER_RG), w0)
        if v_traj.blown_up or w_traj.blown_up:
            return ScalingRow(eps, t_end, float("nan"), float("nan"), True, failed=True)
        sup = _sup_error(v_traj, first_order_ansatz(w_traj), plan.s)
        sup_w, flagged = _hypothesis_flag(plan, eps, w_traj, w0_norm)
        return ScalingRow(eps, t_end, sup, sup_w, flagged)

    rows = _map_rows(row, plan.eps_list)
    slope_min = 2.7 if plan.slope_threshold is None else plan.slope_threshold
    residual_max = 0.15 if plan.residual_max is None else plan.residual_max
    return _finish_scaling(plan, rows, slope_min=slope_min, residual_max=residual_max)


def run_scaling_first_order_box(plan: ExperimentPlan) -> ScalingReport:
    """Box variant of the first-order sweep; carries the line-approximation
    caveat plus the size of the resonant terms the two-term kernel drops."""
    if plan.domain is not Domain.BIGBOX:
        raise ValueError("box scaling requires a big-box plan")
    if plan.length < 64.0 * np.pi:
        raise ValueError("box scaling expects length >= 64*pi")
    grid = plan.grid()
    w0 = plan.initial_data.build(grid)
    w0_norm = sobolev_norm(w0, plan.s)

    def row(eps: float) -> ScalingRow:
        t_end = plan.horizon(eps)
        sp = lambda flow: _flow_spec(plan, flow, grid, eps, t_end)
        v_traj = integrate(sp(Flow.FULL_NLW), eps * w0)
        w_traj = integrate(sp(Flow.FIRST_ORDER_RG), w0)
        if v_traj.blown_up or w_traj.blown_up:
            return ScalingRow(eps, t_end, float("nan"), float("nan"), True, failed=True)
        sup = _sup_error(v_traj, first_order_ansatz(w_traj), plan.s)
        sup_w, flagged = _hypothesis_flag(plan, eps, w_traj, w0_norm)
        return ScalingRow(eps, t_end, sup, sup_w, flagged)

    rows = _map_rows(row, plan.eps_list)
    # the dropped measure-zero terms are evaluated on a small companion grid:
    # their relative size is the discrete-leftover diagnostic
    probe = make_grid(8, Domain.BIGBOX, plan.length)
    split = rs.measure_zero_split(plan.initial_data.build(probe))
    caveats = (
        f"big-box approximation of the line: L={plan.length:.6g}, "
        f"small-divisor amplification at the first negative mode = L/(2*pi) = {plan.length / TWO_PI:.6g}",
        f"resonant terms dropped by the two-term kernel (n_max=8 probe, L2 size): "
        f"diagonal={split['diagonal']:.3e}, zero_coupled={split['zero_coupled']:.3e}",
    )
    slope_min = 1.7 if plan.slope_threshold is None else plan.slope_threshold
    return _finish_scaling(plan, rows, caveats=caveats, slope_min=slope_min)


def run_scaling_second_order(plan: ExperimentPlan) -> tuple[ScalingReport, ScalingReport]:
    """Second-order sweep on the torus.

    The full flow starts from v0 = cal_W0 + F_osc(cal_W0, 0) so that the
    zero-t-mean primitive in the ansatz matches the initial state; with the
    bare data the order-eps^3 value of F_osc at t = 0 would mask the eps^5
    law.  Returns (second_order_report, first_order_contrast_report), both
    measured on the same full-flow trajectories.
    """
    if plan.domain is not Domain.TORUS:
        raise ValueError("second-order scaling is defined on the torus")
    grid = plan.grid()
    w0 = plan.initial_data.build(grid)
    w0_norm = sobolev_norm(w0, plan.s)

    def row(eps: float):
        t_end = plan.horizon(eps)
        sp = lambda flow: _flow_spec(plan, flow, grid, eps, t_end)
        cal_w0 = eps * w0
        v0 = cal_w0 + rs.F_osc_torus(cal_w0, 0.0)
        v_traj = integrate(sp(Flow.FULL_NLW), v0)
        w2_traj = integrate(sp(Flow.SECOND_ORDER_AVERAGED), w0)
        w1_traj = integrate(sp(Flow.FIRST_ORDER_RG), w0)
        if v_traj.blown_up or w2_traj.blown_up or w1_traj.blown_up:
            bad = ScalingRow(eps, t_end, float("nan"), float("nan"), True, failed=True)
            return bad, bad
        sup2 = _sup_error(v_traj, second_order_ansatz(w2_traj), plan.s)
        sup1 = _sup_error(v_traj, first_order_ansatz(w1_traj), plan.s)
        sup_w, flagged = _hypothesis_flag(plan, eps, w2_traj, w0_norm)
        return (
            ScalingRow(eps, t_end, sup2, sup_w, flagged),
            ScalingRow(eps, t_end, sup1, sup_w, flagged),
        )

    pairs = _map_rows(row, plan.eps_list)
    rows2 = [p[0] for p in pairs]
    rows1 = [p[1] for p in pairs]
    first = _finish_scaling(plan, rows1, slope_min=0.0)
    slope_min = 4.3 if plan.slope_threshold is None else plan.slope_threshold
    second = _finish_scaling(plan, rows2, slope_min=slope_min, companion=first)
    if second.passed and np.isfinite(first.fitted_slope):
        # gate: the second-order slope must beat the first-order one by >= 1.5
        second = replace(
            second, passed=bool(second.fitted_slope - first.fitted_slope >= 1.5)
        )
    return second, first


def run_y_vs_u(plan: ExperimentPlan) -> ScalingReport:
    """Compare the averaged flow (with its quintic correction) against the
    bare resonant flow from the same data; the gap scales like eps^2."""
    if plan.domain is not Domain.TORUS:
        raise ValueError("the Y-vs-U comparison is defined on the torus")
    grid = plan.grid()
    w0 = plan.initial_data.build(grid)
    w0_norm = sobolev_norm(w0, plan.s)

    def row(eps: float) -> ScalingRow:
        t_end = plan.horizon(eps)
        sp = lambda flow: _flow_spec(plan, flow, grid, eps, t_end)
        y_traj = integrate(sp(Flow.SECOND_ORDER_AVERAGED), w0)
        u_traj = integrate(sp(Flow.FIRST_ORDER_RG), w0)
        if y_traj.blown_up or u_traj.blown_up:
            return ScalingRow(eps, t_end, float("nan"), float("nan"), True, failed=True)
        sup = max(
            sobolev_norm(a - b, plan.s) for a, b in zip(y_traj.states, u_traj.states)
        )
        sup_w, flagged = _hypothesis_flag(plan, eps, u_traj, w0_norm)
        return ScalingRow(eps, t_end, sup, sup_w, flagged)

    rows = _map_rows(row, plan.eps_list)
    slope_min = 1.7 if plan.slope_threshold is None else plan.slope_threshold
    return _finish_scaling(plan, rows, slope_min=slope_min)


# ---------------------------------------------------------------------------
# conservation audit


def run_conservation(plan: ExperimentPlan) -> ConservedReport:
    """Time series of the invariants along one integrated flow.

    For Hardy effective flows the reported h_half series is sqrt(Q + M),
    which equals the (1+|k|)-weighted half-derivative norm on Hardy fields
    and is exactly conserved; the standard Sobolev H^{1/2} norm is only
    norm-equivalent to it and wanders within the equivalence.
    """
    grid = plan.grid()
    eps = plan.eps_list[0]
    w0 = plan.initial_data.build(grid)
    v0 = eps * w0 if plan.flow is Flow.FULL_NLW else w0
    spec = FlowSpec(
        flow=plan.flow,
        grid=grid,
        eps=eps,
        dt=plan.dt,
        t_end=plan.t_end,
        s=plan.s,
        snapshot_stride=plan.t_end / plan.snapshots_per_run,
        slow_time_cap=max(plan.slow_time_cap, plan.t_end * eps**2 + 1.0),
    )
    traj = integrate(spec, v0)
    report = conserved_series(traj.times, traj.states)
    if plan.flow is not Flow.FULL_NLW:
        h_half = np.sqrt(report.mass + report.momentum)
        report = ConservedReport(
            report.times, report.energy, report.mass, report.momentum, h_half
        )
    return report


def max_negative_mode_mass(plan: ExperimentPlan) -> float:
    """Largest Hardy defect along the plan's flow (for Hardy-invariance gates)."""
    grid = plan.grid()
    eps = plan.eps_list[0]
    w0 = plan.initial_data.build(grid)
    spec = FlowSpec(
        flow=plan.flow,
        grid=grid,
        eps=eps,
        dt=plan.dt,
        t_end=plan.t_end,
        s=plan.s,
        snapshot_stride=plan.t_end / plan.snapshots_per_run,
        slow_time_cap=max(plan.slow_time_cap, plan.t_end * eps**2 + 1.0),
    )
    traj = integrate(spec, w0)
    return max(negative_mode_mass(f) for f in traj.states)


# ---------------------------------------------------------------------------
# growth studies


def run_fosc_growth(plan: ExperimentPlan) -> GrowthReport:
    """||F_osc(W, t)||_{H^s} on a logarithmic t grid for a frozen field W.

    On the box the norm follows the t^(1/2) law while the mode spacing still
    resolves the sinc concentration (t below about length/2); on the torus it
    stays bounded with no trend.
    """
    grid = plan.grid()
    w0 = plan.initial_data.build(grid)
    ts = np.logspace(
        np.log10(plan.growth_t_min), np.log10(plan.growth_t_max), plan.growth_points
    )
    if plan.domain is Domain.BIGBOX:
        rs.require_hardy(w0)
        norms = np.array([sobolev_norm(rs.F_osc_line(w0, t), plan.s) for t in ts])
        saturation = plan.length / 2.0
        in_window = ts <= saturation
        warnings = ()
        if not np.all(in_window):
            warnings = (
                f"t beyond length/2 = {saturation:.6g} no longer resolves the "
                f"sinc concentration; those rows are excluded from the fit",
            )
    else:
        norms = np.array([sobolev_norm(rs.F_osc_torus(w0, t), plan.s) for t in ts])
        in_window = np.ones_like(ts, dtype=bool)
        warnings = ()
    slope, _, _ = fit_loglog(ts[in_window], norms[in_window])
    return GrowthReport(
        experiment=plan.experiment,
        times=ts,
        norms=norms,
        in_window=in_window,
        exponent=slope,
        window=(float(ts[in_window][0]), float(ts[in_window][-1])),
        qualitative=False,
        warnings=warnings,
    )


def run_sobolev_growth(plan: ExperimentPlan) -> GrowthReport:
    """QUALITATIVE: H^s norm growth of the eps=1 resonant flow with the
    two-pole rational data on a large box.

    The line prediction is t^(2s-1) for large t.  The spectral truncation
    bounds the faithful time window: the fit runs on [growth_t_min,
    growth_t_max] and rows where the boundary band carries more than 1% of
    the mass are flagged (warning, not failure).  Amplitude normalization
    rescales effective time by its square (exact symmetry of the flow) and
    leaves the exponent unchanged.
    """
    if plan.domain is not Domain.BIGBOX:
        raise ValueError("the Sobolev growth study runs on the big box")
    grid = plan.grid()
    w0 = plan.initial_data.build(grid)
    spec = FlowSpec(
        flow=Flow.FIRST_ORDER_RG,
        grid=grid,
        eps=1.0,
        dt=plan.dt,
        t_end=plan.t_end,
        s=plan.s,
        snapshot_stride=plan.t_end / max(plan.growth_points * 2, 40),
        slow_time_cap=max(plan.slow_time_cap, plan.t_end + 1.0),
    )
    traj = integrate(spec, w0)
    ts = traj.times
    norms = np.array([sobolev_norm(f, plan.s) for f in traj.states])
    band = np.abs(grid.modes) >= grid.n_max - max(grid.n_max // 64, 8)
    boundary = np.array(
        [float(np.sum(np.abs(f.coeff[band]) ** 2) / max(mass(f), 1e-300)) for f in traj.states]
    )
    warnings = []
    if np.any(boundary > 0.01):
        t_bad = float(ts[np.argmax(boundary > 0.01)])
        warnings.append(
            f"boundary-mode mass exceeds 1% from t = {t_bad:.6g}; truncation no longer faithful"
        )
    in_window = (ts >= plan.growth_t_min) & (ts <= plan.growth_t_max) & (boundary <= 0.01)
    if np.count_nonzero(in_window) < 3:
        raise ValueError("faithful window too short for a growth fit")
    slope, _, _ = fit_loglog(ts[in_window], norms[in_window])
    return GrowthReport(
        experiment=plan.experiment,
        times=ts,
        norms=norms,
        in_window=in_window,
        exponent=slope,
        window=(float(ts[in_window][0]), float(ts[in_window][-1])),
        qualitative=True,
        warnings=tuple(warnings),
    )


# ---------------------------------------------------------------------------
# kernel oracle audit


def run_kernel_audit(plan: ExperimentPlan) -> AuditReport:
    """Closed-form-vs-brute-force equivalences and the resonance-set lemmas,
    bundled into one reproducible pass/fail table.

    negative_control corrupts one closed form on purpose; the audit must
    then report a failing row (exit path check for the CLI).
    """
    n = plan.n_max
    rng = np.random.default_rng(plan.audit_seed)
    gt = make_grid(n, Domain.TORUS)
    gb = make_grid(n, Domain.BIGBOX, 16.0 * np.pi)
    rows: list[AuditRow] = []

    def random_field(grid, hardy=False):
        z = rng.standard_normal(grid.size) + 1j * rng.standard_normal(grid.size)
        c = z * (1.0 + np.abs(grid.modes)) ** (-1.0)
        if hardy:
            c = np.where(grid.modes < 0, 0.0, c)
        return SpectralField(grid, c)

    def max_diff(a: SpectralField, b: SpectralField) -> float:
        return float(np.max(np.abs(a.coeff - b.coeff)))

    corrupt = 1e-6 if plan.negative_control else 0.0

    err = 0.0
    for _ in range(plan.audit_fields):
        u = random_field(gt)
        closed = rs.f_res_closed_torus(u)
        if corrupt:
            closed = SpectralField(gt, closed.coeff + corrupt)
        err = max(err, max_diff(closed, rs.f_res_bruteforce(u)))
    rows.append(AuditRow("f_res_closed_torus_vs_bruteforce", err, 1e-10, err <= 1e-10))

    err = 0.0
    for _ in range(plan.audit_fields):
        u = random_field(gb)
        err = max(
            err,
            max_diff(rs.f_res_closed_line(u), rs.f_res_bruteforce(u, sign_uniform_only=True)),
        )
    rows.append(AuditRow("f_res_closed_line_vs_bruteforce", err, 1e-10, err <= 1e-10))

    err = 0.0
    for _ in range(plan.audit_fields):
        w = random_field(gt, hardy=True)
        err = max(err, max_diff(rs.r2_closed_hardy(w), rs.r2_bruteforce(w)))
    rows.append(AuditRow("r2_closed_hardy_vs_bruteforce", err, 1e-10, err <= 1e-10))

    # resonance lemmas against phase() == 0, exhaustively
    bad = 0
    for k in gt.modes:
        for l in gt.modes:
            for m in gt.modes:
                j = k - l + m
                if abs(j) > n:
                    continue
                vanishes = abs(k) - abs(l) + abs(m) - abs(j) == 0
                if rs.is_resonant_torus(k, l, m, j) != vanishes:
                    bad += 1
                if rs.is_resonant_line(gb, k, l, m, j) != vanishes:
                    bad += 1
    rows.append(AuditRow("resonance_lemmas_exhaustive", float(bad), 0.5, bad == 0))

    # split consistency f_full = f_res + f_osc
    err = 0.0
    for t in (0.0, 0.1, 1.0, 10.0):
        u = random_field(gt)
        split = SpectralField(gt, rs.f_res_bruteforce(u).coeff + rs.f_osc(u, t).coeff)
        err = max(err, max_diff(rs.f_full(u, t), split))
    rows.append(AuditRow("f_full_equals_f_res_plus_f_osc", err, 1e-10, err <= 1e-10))

    # box primitive closed form vs the generic phase-weighted sum
    err = 0.0
    for t in (0.7, 2.3):
        w = random_field(gb, hardy=True)
        err = max(
            err,
            max_diff(rs.F_osc_line(w, t), rs.osc_primitive_bruteforce(w, t, from_zero=True)),
        )
    rows.append(AuditRow("F_osc_line_vs_quadruple_sum", err, 1e-10, err <= 1e-10))

    # r2 via discrete time averaging of f'(W,t).F_osc(W,t)
    w = random_field(make_grid(6, Domain.TORUS), hardy=True)
    err = max_diff(rs.r2_bruteforce(w), rs.r2_time_average(w))
    rows.append(AuditRow("r2_time_average_oracle", err, 1e-8, err <= 1e-8))

    return AuditReport(tuple(rows))


def run_scaling(plan: ExperimentPlan) -> ScalingReport:
    """Dispatch a scaling-type experiment by plan.experiment."""
    if plan.experiment is Experiment.SCALING1_TORUS:
        return run_scaling_first_order_torus(plan)
    if plan.experiment is Experiment.SCALING1_BOX:
        return run_scaling_first_order_box(plan)
    if plan.experiment is Experiment.SCALING2_TORUS:
        return run_scaling_second_order(plan)[0]
    if plan.experiment is Experiment.Y_VS_U:
        return run_y_vs_u(plan)
    raise ValueError(f"{plan.experiment} is not a scaling experiment")
