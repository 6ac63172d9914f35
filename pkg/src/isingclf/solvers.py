"""Low-energy spin search: simulated annealing, random sampling, field-only
and exhaustive solvers, plus ensemble averaging of the best configurations.

All solvers are pure functions of (problem, hyperparameters, seed). Restart
r of the annealer consumes its own stream seeded with ``seed ^ splitmix64(r)``,
so the result is independent of chunking and execution order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError
from .ising import IsingProblem, SpinConfiguration, energy, energy_batch, energy_real
from .seeds import child_seed

EXHAUSTIVE_SPIN_LIMIT = 26

# Restart chunk sizes are capped so the pre-drawn acceptance uniforms for a
# chunk stay within ~64 MB.
_CHUNK_BUDGET_FLOATS = 8_000_000


@dataclass(frozen=True)
class AnnealSchedule:
    """Linear inverse-temperature schedule for the Metropolis annealer.

    beta steps linearly from ``beta_initial`` to ``beta_final`` over
    ``sweeps`` sweeps (both endpoints included). ``beta_final`` is the
    tunable knob; useful values span 0.03 .. 3.
    """

    sweeps: int = 1000
    beta_initial: float = 0.01
    beta_final: float = 3.0

    def __post_init__(self):
        if self.sweeps < 1:
            raise ValueError("sweeps must be >= 1")
        if self.beta_initial <= 0:
            raise ValueError("beta_initial must be positive")
        if self.beta_final < self.beta_initial:
            raise ValueError("beta_final must be >= beta_initial")

    def betas(self) -> np.ndarray:
        return np.linspace(self.beta_initial, self.beta_final, self.sweeps)


@dataclass
class SolveResult:
    """Candidate configurations sorted by non-decreasing energy."""

    configurations: list[SpinConfiguration]
    restarts: int = 0
    seed: int = 0

    @property
    def best(self) -> SpinConfiguration:
        return self.configurations[0]

    def energies(self) -> np.ndarray:
        return np.array([c.energy for c in self.configurations])

    def spins_matrix(self, top_n: int | None = None) -> np.ndarray:
        rows = self.configurations if top_n is None else self.configurations[:top_n]
        return np.stack([c.spins for c in rows])


def _as_result(problem, spins, energies, restarts, seed) -> SolveResult:
    order = np.argsort(energies, kind="stable")
    configs = [
        SpinConfiguration(spins=spins[i].astype(np.int8), energy=float(energies[i]))
        for i in order
    ]
    return SolveResult(configurations=configs, restarts=restarts, seed=seed)


def simulated_anneal(
    problem: IsingProblem,
    schedule: AnnealSchedule | None = None,
    restarts: int = 1000,
    seed: int = 0,
) -> SolveResult:
    """Metropolis simulated annealing, restarted ``restarts`` times.

    Each restart starts from uniform random spins and performs
    ``schedule.sweeps`` sweeps, visiting spins in index order. A flip with
    energy change dE is accepted iff dE <= 0 or u < exp(-beta * dE); one
    uniform u is consumed per flip attempt regardless of dE, which keeps the
    per-restart stream layout fixed. Restarts are vectorized in chunks with
    identical results for any chunking.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    schedule = schedule or AnnealSchedule()
    n = problem.n_spins
    h = problem.fields
    off = problem.couplings_offdiag()
    betas = schedule.betas()
    sweeps = schedule.sweeps

    all_spins = np.empty((restarts, n), dtype=np.float64)
    chunk = max(1, min(restarts, _CHUNK_BUDGET_FLOATS // max(1, sweeps * n)))
    for start in range(0, restarts, chunk):
        stop = min(start + chunk, restarts)
        gens = [
            np.random.Generator(np.random.PCG64(child_seed(seed, r)))
            for r in range(start, stop)
        ]
        # Per-restart stream: N init uniforms, then sweeps*N acceptance
        # uniforms in sweep-major, spin-minor order.
        init_u = np.stack([g.random(n) for g in gens])
        accept_u = np.stack([g.random((sweeps, n)) for g in gens])
        spins = np.where(init_u < 0.5, -1.0, 1.0)
        local = spins @ off + h
        for s in range(sweeps):
            beta = betas[s]
            u_row = accept_u[:, s, :]
            for i in range(n):
                de = -2.0 * spins[:, i] * local[:, i]
                acc = (de <= 0.0) | (u_row[:, i] < np.exp(-beta * np.maximum(de, 0.0)))
                if acc.any():
                    flipped = -spins[acc, i]
                    spins[acc, i] = flipped
                    local[acc] += flipped[:, None] * (2.0 * off[i])
        all_spins[start:stop] = spins
    energies = energy_batch(problem, all_spins)
    return _as_result(problem, all_spins, energies, restarts, seed)


def random_search(problem: IsingProblem, samples: int = 1000, seed: int = 0) -> SolveResult:
    """Uniform random configurations sorted by energy.

    Each spin is drawn from [0, 1): below 0.5 becomes -1, otherwise +1.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    spins = np.where(rng.random((samples, problem.n_spins)) < 0.5, -1.0, 1.0)
    energies = energy_batch(problem, spins)
    return _as_result(problem, spins, energies, samples, seed)


def field_solve(problem: IsingProblem) -> SpinConfiguration:
    """Align every spin against its local field, ignoring all couplings.

    spin_i = -1 where h_i > 0, else +1 (zero fields break toward +1). On a
    coupling-free problem this is the exact ground state.
    """
    spins = np.where(problem.fields > 0.0, -1, 1).astype(np.int8)
    return SpinConfiguration(spins=spins, energy=energy(problem, spins))


def exhaustive_solve(
    problem: IsingProblem,
    top_k: int | None = None,
    spin_limit: int = EXHAUSTIVE_SPIN_LIMIT,
) -> SolveResult:
    """Enumerate all 2^N configurations; exact but exponential.

    Returns every configuration sorted by energy, or only the ``top_k``
    lowest. Refuses problems larger than ``spin_limit`` spins.
    """
    n = problem.n_spins
    if n > spin_limit:
        raise CapacityError(f"{n} spins exceeds exhaustive enumeration limit {spin_limit}")
    total = 1 << n
    bits = np.arange(n, dtype=np.uint64)

    def spins_for(indices: np.ndarray) -> np.ndarray:
        # bit j of the configuration index drives spin j: 0 -> -1, 1 -> +1
        return (((indices[:, None] >> bits[None, :]) & 1) * 2.0 - 1.0).astype(np.float64)

    chunk = 1 << 18
    energies = np.empty(total)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.uint64)
        energies[start : start + idx.size] = energy_batch(problem, spins_for(idx))

    if top_k is None or top_k >= total:
        order = np.argsort(energies, kind="stable")
    else:
        cand = np.argpartition(energies, top_k - 1)[:top_k]
        # stable among equals: order candidates by (energy, index)
        cand = cand[np.lexsort((cand, energies[cand]))]
        order = cand
    spins = spins_for(order.astype(np.uint64))
    return _as_result(problem, spins, energies[order], len(order), 0)


def ensemble_average(
    problem: IsingProblem, result: SolveResult, top_n: int = 20
) -> np.ndarray:
    """Average the lowest-energy configurations into real-valued weights.

    Greedy: start from the single best configuration; walk the next
    candidates in energy order and keep each one in the running elementwise
    average only if the problem's real-valued objective strictly decreases.
    The final objective is therefore never above the best single
    configuration's energy.
    """
    if not result.configurations:
        raise ValueError("cannot ensemble-average an empty result")
    candidates = result.configurations[: max(1, top_n)]
    included_sum = candidates[0].spins.astype(np.float64)
    count = 1
    best_value = energy_real(problem, included_sum)
    for config in candidates[1:]:
        trial = (included_sum + config.spins) / (count + 1)
        value = energy_real(problem, trial)
        if value < best_value:
            included_sum = included_sum + config.spins
            count += 1
            best_value = value
    return included_sum / count
