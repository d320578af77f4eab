"""Time-domain simulation of coupled oscillator phases.

Phase dynamics follow the Kuramoto form

    dtheta_i/dt = sum_{(i,j)} K_ij * sin(theta_i - theta_j)
                  + K_p * sin(N * theta_i),

where the pump term quantizes phases to N states and is dropped entirely
in the infinite-N (continuous-phase) mode used for forward propagation.
The flow descends the energy

    E = sum_{(i,j)} K_ij * cos(theta_i - theta_j)            (infinite N)
    E = (N/2) * sum K_ij cos(..) + K_p * sum_i cos(N th_i)   (finite N)

which serves as the settling diagnostic; for finite N with a pump the
relative scaling of the two terms is not a gradient flow, so the energy
contract is monotonicity in the pump-free case only.

This module is the ground-truth oracle for the closed-form solver in
:mod:`oscnet.mimo`: a settled network decodes to the same values the
analytic forward pass produces.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import NotSettledError
from .phase import encode_coupling, encode_value

__all__ = [
    "NetworkGraph",
    "Trajectory",
    "phase_derivative",
    "lyapunov_energy",
    "integrate",
    "build_mimo_graph",
    "randomize_free_phases",
    "settle_mimo",
    "save_trajectory_csv",
]

DEFAULT_DT = 0.01
DEFAULT_MAX_STEPS = 200_000
DEFAULT_SETTLE_TOL = 1e-6


@dataclass(frozen=True)
class NetworkGraph:
    """Undirected coupling graph with optional pinned oscillators.

    ``pump_order=None`` means the infinite-N pump: phases are continuous
    and the pump term vanishes from both the dynamics and the energy.
    """

    n_oscillators: int
    edges: tuple
    pinned: frozenset = field(default_factory=frozenset)
    pump_strength: float = 0.0
    pump_order: int | None = None

    def __post_init__(self):
        edges = tuple((int(i), int(j), float(k)) for i, j, k in self.edges)
        pinned = frozenset(int(i) for i in self.pinned)
        n = int(self.n_oscillators)
        if n < 1:
            raise ValueError("need at least one oscillator")
        seen = set()
        for i, j, k in edges:
            if i == j:
                raise ValueError(f"self-edge on oscillator {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i},{j}) out of range for n={n}")
            if not np.isfinite(k):
                raise ValueError(f"non-finite coupling on edge ({i},{j})")
            pair = (min(i, j), max(i, j))
            if pair in seen:
                raise ValueError(f"duplicate edge {pair}")
            seen.add(pair)
        if any(not 0 <= i < n for i in pinned):
            raise ValueError("pinned index out of range")
        if self.pump_order is not None and int(self.pump_order) < 1:
            raise ValueError("pump_order must be a positive integer or None")
        object.__setattr__(self, "n_oscillators", n)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "pinned", pinned)
        object.__setattr__(self, "pump_strength", float(self.pump_strength))

    def edge_arrays(self):
        """(src, dst, strength) as ndarrays, plus the free-oscillator mask."""
        if self.edges:
            ei = np.fromiter((e[0] for e in self.edges), dtype=np.intp)
            ej = np.fromiter((e[1] for e in self.edges), dtype=np.intp)
            ek = np.fromiter((e[2] for e in self.edges), dtype=np.float64)
        else:
            ei = ej = np.empty(0, dtype=np.intp)
            ek = np.empty(0, dtype=np.float64)
        free = np.ones(self.n_oscillators, dtype=bool)
        if self.pinned:
            free[list(self.pinned)] = False
        return ei, ej, ek, free


@dataclass(frozen=True)
class Trajectory:
    """Recorded states of one integration run."""

    times: np.ndarray
    states: np.ndarray  # (n_records, n_oscillators)
    energies: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.float64)
        states = np.asarray(self.states, dtype=np.float64)
        energies = np.asarray(self.energies, dtype=np.float64)
        if not (len(times) == len(states) == len(energies)):
            raise ValueError("times, states and energies must align")
        if len(times) > 1 and not np.all(np.diff(times) > 0):
            raise ValueError("times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "energies", energies)

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def __len__(self) -> int:
        return len(self.times)


def _derivative(theta, ei, ej, ek, free, pump_strength, pump_order):
    d = np.zeros_like(theta)
    if ei.size:
        s = ek * np.sin(theta[ei] - theta[ej])
        np.add.at(d, ei, s)
        np.add.at(d, ej, -s)
    if pump_order is not None and pump_strength != 0.0:
        d += pump_strength * np.sin(pump_order * theta)
    d[~free] = 0.0
    return d


def phase_derivative(graph: NetworkGraph, state) -> np.ndarray:
    """Right-hand side of the phase dynamics; exactly zero on pinned oscillators."""
    theta = np.asarray(state, dtype=np.float64)
    if theta.shape != (graph.n_oscillators,):
        raise ValueError("state length does not match the graph")
    ei, ej, ek, free = graph.edge_arrays()
    return _derivative(theta, ei, ej, ek, free, graph.pump_strength, graph.pump_order)


def lyapunov_energy(graph: NetworkGraph, state) -> float:
    """Energy of a phase configuration.

    Infinite-N pump: plain sum of K_ij*cos(theta_i - theta_j) over edges.
    Finite N: (N/2) times that sum plus the pump contribution.  Only the
    pump-free monotonicity is guaranteed along trajectories.
    """
    theta = np.asarray(state, dtype=np.float64)
    if theta.shape != (graph.n_oscillators,):
        raise ValueError("state length does not match the graph")
    ei, ej, ek, _ = graph.edge_arrays()
    coupling = float(np.sum(ek * np.cos(theta[ei] - theta[ej]))) if ei.size else 0.0
    if graph.pump_order is None:
        return coupling
    n = graph.pump_order
    pump = graph.pump_strength * float(np.sum(np.cos(n * theta)))
    return 0.5 * n * coupling + pump


def integrate(
    graph: NetworkGraph,
    state0,
    dt: float = DEFAULT_DT,
    max_steps: int = DEFAULT_MAX_STEPS,
    settle_tol: float = DEFAULT_SETTLE_TOL,
) -> Trajectory:
    """Fixed-step RK4 integration until the free oscillators stop moving.

    Stops as soon as max_i |dtheta_i/dt| < settle_tol; a state that is
    already settled is returned after zero steps.  Pinned phases are
    bit-identical across the whole trajectory.  Raises NotSettledError
    (with the partial trajectory attached) if max_steps is exhausted.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if settle_tol <= 0:
        raise ValueError("settle_tol must be positive")
    theta = np.array(state0, dtype=np.float64).copy()
    if theta.shape != (graph.n_oscillators,):
        raise ValueError("state length does not match the graph")
    ei, ej, ek, free = graph.edge_arrays()
    pinned_idx = np.flatnonzero(~free)
    pinned_vals = theta[pinned_idx].copy()
    kp, n_pump = graph.pump_strength, graph.pump_order

    def f(x):
        return _derivative(x, ei, ej, ek, free, kp, n_pump)

    times = [0.0]
    states = [theta.copy()]
    energies = [lyapunov_energy(graph, theta)]
    settled = False
    for step in range(max_steps):
        k1 = f(theta)
        if np.max(np.abs(k1), initial=0.0) < settle_tol:
            settled = True
            break
        k2 = f(theta + 0.5 * dt * k1)
        k3 = f(theta + 0.5 * dt * k2)
        k4 = f(theta + dt * k3)
        theta = theta + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        theta[pinned_idx] = pinned_vals
        times.append((step + 1) * dt)
        states.append(theta.copy())
        energies.append(lyapunov_energy(graph, theta))
    else:
        residual = float(np.max(np.abs(f(theta)), initial=0.0))
        settled = residual < settle_tol
        if not settled:
            partial = Trajectory(np.array(times), np.array(states), np.array(energies))
            raise NotSettledError(
                f"residual {residual:.3e} >= settle_tol {settle_tol:.3e} "
                f"after {max_steps} steps",
                trajectory=partial,
            )
    return Trajectory(np.array(times), np.array(states), np.array(energies))


def build_mimo_graph(weights, inputs) -> tuple[NetworkGraph, np.ndarray]:
    """Oscillator network realizing a forward pass: pinned inputs, free outputs.

    Oscillators 0..N-1 carry the encoded inputs and are pinned; N..N+M-1
    are the free outputs.  Edge (i, N+j) gets the coupling that encodes
    weight w_ij applied to input x_i.  Returns the graph and a phase
    template whose input entries are set and output entries are zero.
    """
    w = np.asarray(weights, dtype=np.float64)
    x = np.asarray(inputs, dtype=np.float64)
    if w.ndim != 2:
        raise ValueError("weights must be an N x M matrix")
    n, m = w.shape
    if x.shape != (n,):
        raise ValueError("inputs length must match the weight rows")
    theta_in = encode_value(x)
    edges = []
    for j in range(m):
        _, couplings = encode_coupling(w[:, j], x)
        for i in range(n):
            if couplings[i] != 0.0:
                edges.append((i, n + j, couplings[i]))
    graph = NetworkGraph(
        n_oscillators=n + m,
        edges=tuple(edges),
        pinned=frozenset(range(n)),
    )
    template = np.zeros(n + m)
    template[:n] = theta_in
    return graph, template


def randomize_free_phases(graph: NetworkGraph, template, seed: int) -> np.ndarray:
    """Template with the free entries replaced by uniform draws in [-pi, pi)."""
    rng = np.random.default_rng(seed)
    theta = np.array(template, dtype=np.float64).copy()
    free = [i for i in range(graph.n_oscillators) if i not in graph.pinned]
    theta[free] = rng.uniform(-np.pi, np.pi, size=len(free))
    return theta


def settle_mimo(
    weights,
    inputs,
    dt: float = DEFAULT_DT,
    max_steps: int = DEFAULT_MAX_STEPS,
    settle_tol: float = DEFAULT_SETTLE_TOL,
    seed: int = 0,
) -> tuple[np.ndarray, Trajectory]:
    """Settle the oscillator realization of a forward pass and decode it.

    Returns (decoded output values, trajectory).  The decoded values match
    the analytic forward pass regardless of which of the two stationary
    phases each output lands on.
    """
    graph, template = build_mimo_graph(weights, inputs)
    theta0 = randomize_free_phases(graph, template, seed)
    traj = integrate(graph, theta0, dt=dt, max_steps=max_steps, settle_tol=settle_tol)
    n = np.asarray(inputs).shape[0]
    outputs = np.tan(traj.final_state[n:])
    return outputs, traj


def save_trajectory_csv(trajectory: Trajectory, path, stride: int = 1) -> None:
    """Write ``t,theta_0..theta_{n-1},energy`` rows, one per recorded step.

    With stride > 1 every stride-th row is written; the final row is
    always included so the settled state is on disk.
    """
    if stride < 1:
        raise ValueError("stride must be >= 1")
    n = trajectory.states.shape[1]
    idx = list(range(0, len(trajectory), stride))
    if idx[-1] != len(trajectory) - 1:
        idx.append(len(trajectory) - 1)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t"] + [f"theta_{i}" for i in range(n)] + ["energy"])
        for i in idx:
            writer.writerow(
                [repr(float(trajectory.times[i]))]
                + [repr(float(v)) for v in trajectory.states[i]]
                + [repr(float(trajectory.energies[i]))]
            )
