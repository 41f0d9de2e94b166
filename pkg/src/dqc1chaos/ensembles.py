"""Seeded samplers for the circular ensembles and the Poisson ensemble.

=====  ============================  =======================
beta   ensemble                      sampler
=====  ============================  =======================
0      Poisson (independent levels)  :func:`sample_poisson`
1      circular orthogonal (COE)     :func:`sample_coe`
2      circular unitary (CUE)        :func:`sample_cue`
4      circular symplectic (CSE)     :func:`sample_cse`
=====  ============================  =======================

Randomness comes from :class:`RngStream`, a (master seed, stream index) pair
mapped onto a counter-based Philox generator, so sample ``k`` is the same
matrix no matter which worker draws it or in what order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import UnitaryMatrix, direct_sum

BETAS = (0, 1, 2, 4)


@dataclass(frozen=True)
class RngStream:
    """Addressable random stream.

    Identical ``(master_seed, stream_index, path)`` always yields an identical
    sequence. :meth:`child` derives independent sub-streams, e.g. one per
    block of a direct sum or one per shot partition.
    """

    master_seed: int
    stream_index: int = 0
    path: tuple[int, ...] = ()

    def __post_init__(self):
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        if self.stream_index < 0:
            raise ValueError("stream_index must be non-negative")

    def child(self, index: int) -> "RngStream":
        return RngStream(self.master_seed, self.stream_index, self.path + (int(index),))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(
            entropy=self.master_seed, spawn_key=(self.stream_index,) + self.path
        )
        return np.random.Generator(np.random.Philox(seq))


@dataclass(frozen=True)
class EnsembleSpec:
    """Symmetry class and size. For beta=4, ``dim`` counts Kramers doublets."""

    beta: int
    dim: int

    def __post_init__(self):
        if self.beta not in BETAS:
            raise ValueError(f"beta must be one of {BETAS}, got {self.beta}")
        if self.dim < 2:
            raise ValueError("dim must be at least 2")

    @property
    def matrix_dim(self) -> int:
        return 2 * self.dim if self.beta == 4 else self.dim


def _gen(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


def _check_n(n: int) -> None:
    if n < 1:
        raise ValueError("dimension must be at least 1")


def sample_poisson(n: int, rng) -> UnitaryMatrix:
    """Diagonal unitary with i.i.d. uniform eigenphases (beta=0)."""
    _check_n(n)
    theta = _gen(rng).uniform(0.0, 2 * np.pi, size=n)
    return UnitaryMatrix(np.diag(np.exp(-1j * theta)))


def _haar(n: int, gen: np.random.Generator) -> np.ndarray:
    z = (gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    # Mezzadri phase fix: without it Q is not Haar distributed
    return q * (d / np.abs(d))


def sample_cue(n: int, rng) -> UnitaryMatrix:
    """Haar-random unitary from QR of a complex Ginibre matrix (beta=2)."""
    _check_n(n)
    return UnitaryMatrix(_haar(n, _gen(rng)))


def sample_coe(n: int, rng) -> UnitaryMatrix:
    """Symmetric unitary ``W^T W`` with ``W`` Haar (beta=1)."""
    _check_n(n)
    w = _haar(n, _gen(rng))
    u = w.T @ w
    # exact transpose symmetry; the product is only symmetric to rounding
    return UnitaryMatrix(0.5 * (u + u.T))


def symplectic_form(n: int) -> np.ndarray:
    """``J = [[0, I_n], [-I_n, 0]]``."""
    z = np.zeros((n, n))
    i = np.eye(n)
    return np.block([[z, i], [-i, z]])


def sample_cse(n: int, rng) -> UnitaryMatrix:
    """Self-dual unitary ``W^R W`` of size 2n with ``W^R = J W^T J^T`` (beta=4).

    Every eigenphase is doubly degenerate (Kramers pairs).
    """
    _check_n(n)
    w = _haar(2 * n, _gen(rng))
    j = symplectic_form(n)
    return UnitaryMatrix(j @ w.T @ j.T @ w)


_SAMPLERS = {0: sample_poisson, 1: sample_coe, 2: sample_cue, 4: sample_cse}


def sample(spec: EnsembleSpec, rng) -> UnitaryMatrix:
    return _SAMPLERS[spec.beta](spec.dim, rng)


def sample_direct_sum(beta: int, block_dim: int, k: int, rng: RngStream) -> UnitaryMatrix:
    """Direct sum of ``k`` independent blocks, block ``b`` drawn from ``rng.child(b)``.

    Models a chaotic map with a symmetry splitting the space into ``k`` equal
    invariant subspaces.
    """
    spec = EnsembleSpec(beta, block_dim)
    return direct_sum(*(sample(spec, rng.child(b)) for b in range(k)))
