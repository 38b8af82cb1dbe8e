"""Deterministic Monte Carlo experiments on the perturbed cat map.

Reproduces the thesis-style runs: N independent orbits of length T, the
contraction rate accumulated over non-overlapping windows of length tau,
the dimensionless window average p = (sum_window sigma)/(tau sigma_bar_T),
pooled histograms, the fluctuation-ratio curve

    y(p) = log[Freq(p) / Freq(-p)] / (tau sigma_bar p),

the slope/A estimate around the FT prediction y = 1, and the finite-tau fit
models f1(eps) = a1 eps^2 + b1/(tau eps), f2 = a2 eps + b2 eps^2 + c2/(tau eps).

Reproducibility: every run r is a pure function of (config, r); the RNG is
the counter-based Philox generator keyed by seed XOR r, so results are
bit-identical for a fixed seed regardless of worker count or scheduling.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .torus import CatSystem, HarmonicForce


@dataclass(frozen=True)
class SimConfig:
    system: CatSystem
    T: int
    tau: int
    N: int
    bin_width: float = 0.05
    seed: int = 2024
    workers: int = 1
    sigma_mode: str = "per_run"   # "per_run" (thesis protocol) or "pooled"

    def __post_init__(self):
        if self.tau < 1:
            raise ValueError("tau must be >= 1")
        if self.T % self.tau != 0:
            raise ValueError("T must be a multiple of tau")
        if self.bin_width <= 0:
            raise ValueError("bin width must be positive")
        if self.N < 1 or self.workers < 1:
            raise ValueError("N and workers must be >= 1")
        if self.sigma_mode not in ("per_run", "pooled"):
            raise ValueError("sigma_mode must be 'per_run' or 'pooled'")
        if self.system.epsilon == 0.0:
            raise ValueError(
                "zero mean contraction: eps_tau undefined for eps = 0")


@dataclass
class RunStats:
    """One run: the empirical mean of sigma and the histogram of p-values."""

    run_index: int
    sigma_bar: float
    counts: Dict[int, int]          # bin index i covers [i w, (i+1) w)
    max_abs_p: float
    n_windows: int

    def mean_p(self) -> float:
        # algebraic identity: the window sums add up to T sigma_bar
        w = sum(self.counts.values())
        return 1.0 if w else float("nan")


def _simulate_run(config: SimConfig, run_index: int
                  ) -> Tuple[int, float, np.ndarray]:
    """One orbit: (run_index, sigma_bar_T, window sums of sigma)."""
    rng = np.random.Generator(np.random.Philox(key=config.seed ^ run_index))
    x1, x2 = rng.uniform(0.0, 2.0 * math.pi, 2)
    eps = config.system.epsilon
    harmonics = [(h.nu[0], h.nu[1], h.amp, h.amp * (2 * h.nu[0] - h.nu[1]))
                 for h in config.system.force.harmonics]
    two_pi = 2.0 * math.pi
    tau = config.tau
    sin = math.sin
    cos = math.cos
    log1p = math.log1p
    window_sums: List[float] = []
    wsum = 0.0
    j_in_window = 0
    total = 0.0
    for _ in range(config.T):
        force = 0.0
        jac = 0.0
        for n1, n2, amp, jamp in harmonics:
            arg = n1 * x1 + n2 * x2
            force += amp * sin(arg)
            jac += jamp * cos(arg)
        s = -log1p(eps * jac)
        wsum += s
        total += s
        j_in_window += 1
        if j_in_window == tau:
            window_sums.append(wsum)
            wsum = 0.0
            j_in_window = 0
        y1 = (x1 + x2 + eps * force) % two_pi
        y2 = (x1 + 2.0 * x2) % two_pi
        x1, x2 = y1, y2
    sigma_bar = total / config.T
    if sigma_bar <= 0.0:
        raise RuntimeError(f"non-positive sigma_bar in run {run_index}")
    return run_index, sigma_bar, np.array(window_sums)


def _simulate_chunk(args):
    config, indices = args
    return [_simulate_run(config, r) for r in indices]


def _bin_windows(run_index: int, sigma_bar: float, window_sums: np.ndarray,
                 norm_sigma: float, config: SimConfig) -> RunStats:
    counts: Dict[int, int] = {}
    w = config.bin_width
    p = window_sums / (config.tau * norm_sigma)
    for b in np.floor(p / w).astype(int):
        counts[int(b)] = counts.get(int(b), 0) + 1
    return RunStats(run_index, sigma_bar, counts,
                    float(np.max(np.abs(p))), len(window_sums))


def simulate(config: SimConfig) -> List[RunStats]:
    """N independent runs, merged in run order (worker-count invariant)."""
    indices = list(range(config.N))
    if config.workers == 1 or config.N == 1:
        raw = [_simulate_run(config, r) for r in indices]
    else:
        chunks = [indices[i::config.workers] for i in range(config.workers)]
        chunks = [c for c in chunks if c]
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = pool.map(_simulate_chunk, [(config, c) for c in chunks])
            raw = []
            for r in results:
                raw.extend(r)
        raw.sort(key=lambda t: t[0])
    if config.sigma_mode == "pooled":
        pooled = float(np.mean([sb for _, sb, _ in raw]))
        return [_bin_windows(i, sb, ws, pooled, config) for i, sb, ws in raw]
    return [_bin_windows(i, sb, ws, sb, config) for i, sb, ws in raw]


@dataclass
class RatioCurve:
    """Symmetric-bin log-ratio curve with standard errors."""

    p: np.ndarray
    y: np.ndarray
    err: np.ndarray
    sigma_bar: float
    tau: int
    n_runs: int

    def rows(self):
        return list(zip(self.p.tolist(), self.y.tolist(), self.err.tolist()))


def ratio_curve(stats: Sequence[RunStats], tau: int,
                errors: str = "runs") -> RatioCurve:
    """Log-ratio per symmetric bin pair, with run-to-run or binomial errors.

    errors="runs": the log-ratio is averaged over the runs where the pair is
    populated and the error is the standard deviation of that mean (the
    thesis' convention).  errors="binomial": pooled counts with 1/sqrt(F)
    error propagation through the log.  The returned p column holds bin
    indices; finalize_curve() converts to p-centers and divides by
    tau sigma_bar p.
    """
    if not stats:
        raise ValueError("no runs")
    sigma_bar = float(np.mean([s.sigma_bar for s in stats]))
    pooled: Dict[int, int] = {}
    for s in stats:
        for b, c in s.counts.items():
            pooled[b] = pooled.get(b, 0) + c
    # symmetric pairs: bin b >= 0 pairs with -b-1; centers +-(b+0.5) w
    bins = sorted(b for b in pooled if b >= 0 and (-b - 1) in pooled)
    if not bins:
        raise ValueError("no symmetric bin pair is populated on both sides")
    ps, ys, errs = [], [], []
    for b in bins:
        if errors == "runs":
            vals = []
            for s in stats:
                fp = s.counts.get(b, 0)
                fm = s.counts.get(-b - 1, 0)
                if fp > 0 and fm > 0:
                    vals.append(math.log(fp / fm))
            if len(vals) < 2:
                continue
            m = float(np.mean(vals))
            e = float(np.std(vals, ddof=1) / math.sqrt(len(vals)))
            ps.append(b)
            ys.append(m)
            errs.append(e)
        elif errors == "binomial":
            fp = pooled[b]
            fm = pooled[-b - 1]
            ps.append(b)
            ys.append(math.log(fp / fm))
            errs.append(math.sqrt(1.0 / fp + 1.0 / fm))
        else:
            raise ValueError("errors must be 'runs' or 'binomial'")
    if not ps:
        raise ValueError("no bin pair populated in at least two runs")
    return RatioCurve(np.array(ps, dtype=float), np.array(ys), np.array(errs),
                      sigma_bar, tau, len(stats))


def finalize_curve(curve: RatioCurve, bin_width: float) -> RatioCurve:
    """Convert bin indices to p-centers and log-ratios to y = log/(tau s p)."""
    p = (curve.p + 0.5) * bin_width
    denom = curve.tau * curve.sigma_bar * p
    return RatioCurve(p, curve.y / denom, curve.err / denom,
                      curve.sigma_bar, curve.tau, curve.n_runs)


def build_curve(stats: Sequence[RunStats], config: SimConfig,
                errors: str = "runs") -> RatioCurve:
    return finalize_curve(ratio_curve(stats, config.tau, errors=errors),
                          config.bin_width)


def measure_asymmetry(force: HarmonicForce, eps: float, T: int, tau: int,
                      N: int, seed: int, bin_width: float = 0.05,
                      workers: int = 1, p_max: float = 2.0) -> SlopeResult:
    """One experimental A(eps) point: simulate, build the curve, fit the slope.

    Pooled binomial errors weight the slope fit; they stay honest in the
    low-count tail bins where per-run dispersion over few runs undershoots.
    """
    config = SimConfig(system=CatSystem(epsilon=eps, force=force), T=T,
                       tau=tau, N=N, bin_width=bin_width, seed=seed,
                       workers=workers)
    stats = simulate(config)
    curve = build_curve(stats, config, errors="binomial")
    return slope_and_A(curve, p_max=p_max)


@dataclass(frozen=True)
class SlopeResult:
    slope: float
    A: float
    stderr: float
    n_bins: int


def slope_and_A(curve: RatioCurve, p_max: float = 2.0) -> SlopeResult:
    """Weighted slope through the origin of z(p) = p y(p); A = slope - 1.

    The FT predicts z = p exactly; the leading deviation z = (1+A) p defines
    A.  Weights are 1/err(z)^2 when errors are available and uniform
    otherwise (exact synthetic inputs).
    """
    mask = (np.abs(curve.p) <= p_max) & (curve.p != 0)
    if int(mask.sum()) < 3:
        raise ValueError(f"need >= 3 populated symmetric bins with |p| <= {p_max}")
    p = curve.p[mask]
    z = p * curve.y[mask]
    ez = np.abs(p) * curve.err[mask]
    if np.all(ez > 0):
        w = 1.0 / ez ** 2
    else:
        w = np.ones_like(p)
    denom = float(np.sum(w * p * p))
    slope = float(np.sum(w * p * z)) / denom
    stderr = math.sqrt(1.0 / denom) if np.all(ez > 0) else 0.0
    return SlopeResult(slope, slope - 1.0, stderr, int(mask.sum()))


@dataclass(frozen=True)
class FitResult:
    model: str
    params: Tuple[float, ...]
    stderrs: Tuple[float, ...]
    rss: float


def _weighted_lsq(X: np.ndarray, y: np.ndarray, sig: np.ndarray,
                  model: str) -> FitResult:
    w = 1.0 / sig ** 2
    A = X.T @ (w[:, None] * X)
    b = X.T @ (w * y)
    try:
        cov = np.linalg.inv(A)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"singular normal equations for {model}") from exc
    params = cov @ b
    resid = y - X @ params
    rss = float(np.sum(w * resid ** 2))
    stderrs = tuple(math.sqrt(max(cov[i, i], 0.0)) for i in range(len(params)))
    return FitResult(model, tuple(map(float, params)), stderrs, rss)


def fit_models(points: Sequence[Tuple[float, float, float]], tau: int
               ) -> Tuple[FitResult, FitResult]:
    """Fit f1 and f2 to (eps, A, stderr) data by weighted least squares."""
    if len(points) < 3:
        raise ValueError("need at least 3 distinct eps values")
    eps = np.array([p[0] for p in points])
    if len(set(eps.tolist())) < 3:
        raise ValueError("need at least 3 distinct eps values")
    a = np.array([p[1] for p in points])
    sig = np.array([max(p[2], 1e-300) for p in points])
    X1 = np.column_stack([eps ** 2, 1.0 / (tau * eps)])
    X2 = np.column_stack([eps, eps ** 2, 1.0 / (tau * eps)])
    f1 = _weighted_lsq(X1, a, sig, "f1")
    f2 = _weighted_lsq(X2, a, sig, "f2")
    return f1, f2


