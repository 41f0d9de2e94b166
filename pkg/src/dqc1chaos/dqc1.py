"""One-clean-qubit (DQC1) estimation of ``Tr F^n``.

The circuit acts on one control qubit prepared with polarization ``epsilon``
and ``K`` maximally mixed register qubits. A controlled ``G = F^n (+) I``
followed by an x (or y) measurement of the control gives a +-1 outcome with

    P(+1) = (1 + epsilon * Re <m|G|m>) / 2     (Im for the y setting)

when the register happens to be in basis state ``|m>``. Averaged over the
mixed register this is ``epsilon * Tr G / 2^K``. The simulator never builds
the ``2^(K+1)``-dimensional density matrix: each shot draws ``m`` uniformly
and then one Bernoulli outcome, which is an exact unravelling of the mixed
register.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from .ensembles import RngStream, sample_cue, sample_poisson
from .linalg import (
    DimensionError,
    EigenSolverError,
    UnitaryMatrix,
    eigenphases,
    mat_vec,
)
from .spectral import FormFactorSeries

ANALYTIC = "analytic"


def qubits_for(dim: int) -> int:
    """Smallest ``K`` with ``2^K >= dim``."""
    if dim < 1:
        raise ValueError("dimension must be positive")
    return (dim - 1).bit_length()


@dataclass(frozen=True)
class Dqc1Config:
    """Circuit settings.

    ``shots`` is the total budget, split between the x and y settings
    (x gets the odd shot). ``shots=None`` or ``"analytic"`` returns the exact
    expectation. ``workers`` partitions the shot loop; results depend on the
    partition count, never on scheduling.
    """

    system_dim: int
    power: int = 1
    shots: int | str | None = ANALYTIC
    epsilon: float = 1.0
    num_qubits: int | None = None
    workers: int = 1
    sampler: str = "unravel"
    diagonal_method: str = "auto"

    def __post_init__(self):
        if self.system_dim < 1:
            raise ValueError("system_dim must be positive")
        if self.power < 1:
            raise ValueError("power must be at least 1")
        if not 0.0 < self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in (0, 1]")
        k = qubits_for(self.system_dim) if self.num_qubits is None else int(self.num_qubits)
        if 2**k < self.system_dim:
            raise DimensionError(f"2^{k} < N = {self.system_dim}")
        object.__setattr__(self, "num_qubits", k)
        if self.shots is None:
            object.__setattr__(self, "shots", ANALYTIC)
        elif self.shots != ANALYTIC:
            if isinstance(self.shots, bool) or int(self.shots) != self.shots or self.shots < 1:
                raise ValueError(f"shots must be a positive integer or 'analytic', got {self.shots!r}")
            object.__setattr__(self, "shots", int(self.shots))
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        if self.sampler not in ("unravel", "binomial"):
            raise ValueError("sampler must be 'unravel' or 'binomial'")
        if self.diagonal_method not in ("auto", "matvec", "eigen"):
            raise ValueError("diagonal_method must be 'auto', 'matvec' or 'eigen'")

    @property
    def analytic(self) -> bool:
        return self.shots == ANALYTIC

    @property
    def register_dim(self) -> int:
        return 2**self.num_qubits


@dataclass(frozen=True)
class TraceEstimate:
    """Control-qubit signals ``<sigma_x>``, ``<sigma_y>`` with standard errors."""

    re: float
    im: float
    std_error_re: float = 0.0
    std_error_im: float = 0.0
    shots_used: int = 0

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)


@dataclass(frozen=True)
class CorrectedTrace:
    """Estimate of ``Tr F^n / N`` after removing padding and polarization."""

    re: float
    im: float
    std_error_re: float = 0.0
    std_error_im: float = 0.0

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)


def _check(f: UnitaryMatrix, config: Dqc1Config) -> None:
    if f.dim != config.system_dim:
        raise DimensionError(f"operator dim {f.dim} != config.system_dim {config.system_dim}")


def _schur_weights(f: UnitaryMatrix):
    cached = f._cache.get("schur")
    if cached is not None:
        return cached
    if f.is_diagonal():
        out = np.diag(f.data).copy(), None
    else:
        try:
            t, z = scipy.linalg.schur(f.data, output="complex")
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise EigenSolverError(str(exc)) from exc
        # Schur form of a normal matrix is diagonal, Z unitary
        out = np.diag(t).copy(), np.abs(z) ** 2
    f._cache["schur"] = out
    return out


def power_diagonal(f: UnitaryMatrix, n: int, indices=None, method: str = "auto") -> np.ndarray:
    """Diagonal elements ``<m|F^n|m>`` for the requested basis indices.

    ``"matvec"`` applies ``F`` ``n`` times to the basis vectors;
    ``"eigen"`` uses ``F = Z diag(lambda) Z^dagger`` so that
    ``<m|F^n|m> = sum_j |Z_mj|^2 lambda_j^n``. ``"auto"`` picks the
    eigen route for ``n > 8``.
    """
    idx = np.arange(f.dim) if indices is None else np.asarray(indices, dtype=np.intp)
    if method == "auto":
        method = "eigen" if n > 8 or f.is_diagonal() else "matvec"
    if method == "matvec":
        block = np.zeros((f.dim, idx.size), dtype=np.complex128)
        block[idx, np.arange(idx.size)] = 1.0
        for _ in range(n):
            block = mat_vec(f, block)
        return block[idx, np.arange(idx.size)]
    if method == "eigen":
        lam, w = _schur_weights(f)
        lam_n = lam**n
        if w is None:
            return lam_n[idx]
        return w[idx] @ lam_n
    raise ValueError(f"unknown method {method!r}")


def power_trace(f: UnitaryMatrix, n: int) -> complex:
    """``Tr F^n`` from the eigenphases."""
    return complex(np.exp(-1j * n * eigenphases(f).phases).sum())


def _partition(total: int, parts: int) -> list[int]:
    base, extra = divmod(total, parts)
    return [base + (i < extra) for i in range(parts)]


def _outcome_sum(count: int, gen: np.random.Generator, eps: float, diag, mean_d, part) -> int:
    """Sum of ``count`` +-1 control outcomes for one measurement setting."""
    if count == 0:
        return 0
    if diag is None:
        # m uniform then Bernoulli(p_m) is marginally Bernoulli(mean of p_m)
        plus = int(gen.binomial(count, (1 + eps * part(mean_d)) / 2))
    else:
        m = gen.integers(0, diag.size, size=count)
        p = (1 + eps * part(diag[m])) / 2
        plus = int(np.count_nonzero(gen.random(count) < p))
    return 2 * plus - count


def _std_error(total: int, count: int) -> float:
    if count < 2:
        # too few outcomes: report the widest spread a +-1 variable can have
        return 1.0
    mean = total / count
    var = max(count - total * mean, 0.0) / (count - 1)
    return math.sqrt(var / count)


def dqc1_estimate(f: UnitaryMatrix, config: Dqc1Config, rng: RngStream | None = None) -> TraceEstimate:
    """Simulated control-qubit signals for ``G = F^n (+) I_{2^K - N}``.

    Analytic mode returns ``epsilon * Tr G / 2^K`` exactly. Stochastic mode
    samples ``config.shots`` shots split over the x and y settings and
    reports the mean outcomes with sample standard errors.
    """
    _check(f, config)
    size = config.register_dim
    eps = config.epsilon
    pad = size - f.dim
    if config.analytic:
        tr = power_trace(f, config.power) + pad
        return TraceEstimate(eps * tr.real / size, eps * tr.imag / size)
    if rng is None:
        raise ValueError("stochastic mode needs an RngStream")

    n_x = config.shots - config.shots // 2
    n_y = config.shots // 2
    if config.sampler == "binomial":
        mean_d = (power_trace(f, config.power) + pad) / size
        diag = None
    else:
        mean_d = None
        diag = np.ones(size, dtype=np.complex128)
        diag[: f.dim] = power_diagonal(f, config.power, method=config.diagonal_method)
    parts_x = _partition(n_x, config.workers)
    parts_y = _partition(n_y, config.workers)

    def run(w):
        gen = rng.child(w).generator()
        sx = _outcome_sum(parts_x[w], gen, eps, diag, mean_d, np.real)
        sy = _outcome_sum(parts_y[w], gen, eps, diag, mean_d, np.imag)
        return sx, sy

    if config.workers == 1:
        results = [run(0)]
    else:
        with ThreadPoolExecutor(config.workers) as pool:
            results = list(pool.map(run, range(config.workers)))
    sum_x = sum(r[0] for r in results)
    sum_y = sum(r[1] for r in results)
    re = sum_x / n_x
    im = sum_y / n_y if n_y else 0.0
    return TraceEstimate(re, im, _std_error(sum_x, n_x), _std_error(sum_y, n_y), config.shots)


def padding_correction(est: TraceEstimate, dim: int, num_qubits: int, epsilon: float = 1.0) -> CorrectedTrace:
    """Turn raw control signals into an estimate of ``Tr F^n / N``.

    The identity padding adds ``2^K - N`` to the real part of the trace only.
    """
    size = 2**num_qubits
    if size < dim:
        raise DimensionError(f"2^{num_qubits} < N = {dim}")
    scale = size / (epsilon * dim)
    re = (est.re * size - epsilon * (size - dim)) / (epsilon * dim)
    im = est.im * scale
    return CorrectedTrace(re, im, est.std_error_re * scale, est.std_error_im * scale)


def form_factor_from_dqc1(
    f: UnitaryMatrix,
    n: int,
    config: Dqc1Config,
    rng: RngStream | None = None,
    bias_correction: bool | None = None,
) -> float:
    """Estimate of the normalized form factor ``T_n / N^2``.

    ``|z|^2`` of a noisy estimate ``z`` is biased upward by its variance;
    by default stochastic runs subtract the squared standard errors.
    """
    if config.power != n:
        config = replace(config, power=n)
    corrected = estimate_corrected(f, config, rng)
    value = corrected.re**2 + corrected.im**2
    if bias_correction is None:
        bias_correction = not config.analytic
    if bias_correction:
        value -= corrected.std_error_re**2 + corrected.std_error_im**2
    return float(value)


def estimate_corrected(f: UnitaryMatrix, config: Dqc1Config, rng: RngStream | None = None) -> CorrectedTrace:
    est = dqc1_estimate(f, config, rng)
    return padding_correction(est, f.dim, config.num_qubits, config.epsilon)


def dqc1_form_factor_series(
    f: UnitaryMatrix,
    n_max: int,
    config: Dqc1Config,
    rng: RngStream | None = None,
    bias_correction: bool | None = None,
) -> np.ndarray:
    """``T_n / N^2`` estimates for ``n = 1..n_max``; power ``n`` uses ``rng.child(n)``."""
    out = np.empty(n_max)
    for n in range(1, n_max + 1):
        sub = None if rng is None else rng.child(n)
        out[n - 1] = form_factor_from_dqc1(f, n, replace(config, power=n), sub, bias_correction)
    return out


def series_from_estimates(normalized: np.ndarray, dim: int) -> FormFactorSeries:
    """Rescale ``T_n / N^2`` estimates into a :class:`FormFactorSeries`.

    Noisy bias-corrected values can fall outside ``[0, 1]``; they are clipped.
    """
    return FormFactorSeries(np.clip(normalized, 0.0, 1.0) * dim**2, dim)


def wilson_interval(errors: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if trials == 0:
        return 0.0, 1.0
    p = errors / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass(frozen=True)
class ScalingRow:
    dim: int
    schedule: str
    shots: int | str
    trials: int
    errors: int

    @property
    def error_rate(self) -> float:
        return self.errors / self.trials

    @property
    def ci(self) -> tuple[float, float]:
        return wilson_interval(self.errors, self.trials)


def reads_regular(normalized: np.ndarray, dim: int, delta_n: int, threshold_c: float) -> bool:
    """Binary regular/chaotic read-out from noisy ``T_n / N^2`` estimates.

    Under a finite shot budget the chaotic signal ``n / N^2`` is below the
    noise floor, so only ``t0`` carries information. The chaotic mean of
    ``t0`` is about ``delta_n / (2N)``, far below 1, which makes the test one
    sided: regular iff ``t0 >= 1 - c / sqrt(delta_n)``. The unclipped,
    bias-corrected estimates are used so that noise widens both classes
    symmetrically.
    """
    t0 = dim * float(np.mean(normalized[:delta_n]))
    return t0 >= 1 - threshold_c / math.sqrt(delta_n)


def resource_scaling_study(
    sizes: Sequence[int],
    schedules: Mapping[str, Callable[[int], int | str]],
    trials: int,
    rng: RngStream,
    delta_n: int = 16,
    threshold_c: float = 3.0,
    sampler: str = "binomial",
) -> list[ScalingRow]:
    """Misclassification rate of shot-limited DQC1 tests versus N.

    For every size and trial one Poisson and one CUE matrix are drawn from
    ``rng.child(N).child(trial)`` and shared by all schedules. Each schedule
    maps ``N`` to a per-power shot budget (or ``"analytic"``). A trial
    counts one error for each of the two matrices whose regular/chaotic
    read-out (:func:`reads_regular`) is wrong, so ``errors`` is out of
    ``2 * trials`` decisions.
    """
    rows: list[ScalingRow] = []
    for dim in sizes:
        k = qubits_for(dim)
        counts = {name: 0 for name in schedules}
        for trial in range(trials):
            base = rng.child(dim).child(trial)
            cases = (
                (sample_poisson(dim, base.child(0)), True),
                (sample_cue(dim, base.child(1)), False),
            )
            for c, (f, is_regular) in enumerate(cases):
                for s, (name, schedule) in enumerate(schedules.items()):
                    cfg = Dqc1Config(dim, 1, schedule(dim), num_qubits=k, sampler=sampler)
                    est = dqc1_form_factor_series(f, delta_n, cfg, base.child(2 + c).child(s))
                    if reads_regular(est, dim, delta_n, threshold_c) != is_regular:
                        counts[name] += 1
        for name, schedule in schedules.items():
            rows.append(ScalingRow(dim, name, schedule(dim), 2 * trials, counts[name]))
    return rows
