r"""Half-wave dynamics: decomposition, exact linear flow, and time stepping.

The second-order equation (box + m^2) u = N(u) is evolved as the first-order
pair u^+, u^- with u = u^+ + u^- and u_t = i<D>(u^+ - u^-):

    d/dt u^± = ±i <D> u^± ∓ i N(u) / (2<D>)

Two independent discretizations live here.  evolve marches the pair with a
Lawson scheme (exact rotation of the stiff phase, classical RK4 on the rotated
remainder).  picard_iterate solves the equivalent integral equation by fixed
point, with the time integral done by composite trapezoid on the rotated
integrand.  Their agreement is one of the package's main self-checks.

Division by 2<D> is always well-posed here because every mass is strictly
positive; the massless case would need a low-frequency cutoff and is not
supported anywhere in this package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .grid import (
    FrequencyLattice,
    SpectralField,
    free_propagate,
    sobolev_norm,
)
from .system import MassSystem, evaluate_nonlinearity


class InstabilityError(RuntimeError):
    """Raised when an evolution leaves the stable regime (growth or NaN)."""

    def __init__(self, message, time=None, norm=None):
        super().__init__(message)
        self.time = time
        self.norm = norm


@dataclass(frozen=True, eq=False)
class CauchyData:
    """Initial position/velocity fields, one pair per component."""

    positions: tuple
    velocities: tuple

    def __post_init__(self):
        if len(self.positions) == 0 or len(self.positions) != len(self.velocities):
            raise ValueError("need matching nonempty position/velocity tuples")
        lat = self.positions[0].lattice
        for f in (*self.positions, *self.velocities):
            if f.lattice != lat:
                raise ValueError("all data fields must share one lattice")

    @property
    def lattice(self) -> FrequencyLattice:
        return self.positions[0].lattice

    @property
    def size(self) -> int:
        return len(self.positions)


@dataclass(frozen=True, eq=False)
class HalfWavePair:
    """The (u^+, u^-) spectral pair of one component, with its mass."""

    plus: SpectralField
    minus: SpectralField
    mass: float

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError("mass must be positive")
        if self.plus.lattice != self.minus.lattice:
            raise ValueError("halves must share one lattice")

    @property
    def lattice(self) -> FrequencyLattice:
        return self.plus.lattice

    def field(self) -> SpectralField:
        """The physical component u = u^+ + u^-."""
        return self.plus + self.minus


def decompose(u: SpectralField, u_t: SpectralField, mass: float) -> HalfWavePair:
    """Split (u, u_t) into half-waves: u^± = (u ∓ i u_t/<D>) / 2."""
    if u.lattice != u_t.lattice:
        raise ValueError("position and velocity must share one lattice")
    lat = u.lattice
    inv = 1.0 / (2.0 * lat.bracket(mass))
    inv[lat.nyquist_mask] = 0.0
    half = u.coeffs * 0.5
    half = np.where(lat.nyquist_mask, 0.0, half)
    shift = 1j * u_t.coeffs * inv
    plus = SpectralField(lat, half - shift)
    minus = SpectralField(lat, half + shift)
    return HalfWavePair(plus, minus, float(mass))


def reconstruct(pair: HalfWavePair):
    """Inverse of decompose: returns (u, u_t) with u_t = i<D>(u^+ - u^-)."""
    lat = pair.lattice
    br = lat.bracket(pair.mass)
    br[lat.nyquist_mask] = 0.0
    u = pair.plus + pair.minus
    u_t = SpectralField(lat, 1j * br * (pair.plus.coeffs - pair.minus.coeffs))
    return u, u_t


def initial_pair(data: CauchyData, masses: Sequence[float]):
    """Half-wave pairs of all components: u^±(0) = (f ∓ i g/<D>) / 2."""
    if len(masses) != data.size:
        raise ValueError("one mass per component required")
    return tuple(
        decompose(f, g, m)
        for f, g, m in zip(data.positions, data.velocities, masses)
    )


def linear_exact(data: CauchyData, masses: Sequence[float], t: float) -> CauchyData:
    """Closed-form solution of the free equations (box + m^2) u = 0.

    u(t) = cos(t<D>) f + sin(t<D>)/<D> g, with the matching velocity.  Like
    every multiplier in this package the output carries no Nyquist content.
    """
    if len(masses) != data.size:
        raise ValueError("one mass per component required")
    lat = data.lattice
    live = ~lat.nyquist_mask
    pos, vel = [], []
    for f, g, m in zip(data.positions, data.velocities, masses):
        br = lat.bracket(m)
        c, s = np.cos(t * br) * live, np.sin(t * br) * live
        pos.append(SpectralField(lat, c * f.coeffs + s / br * g.coeffs))
        vel.append(SpectralField(lat, -br * s * f.coeffs + c * g.coeffs))
    return CauchyData(tuple(pos), tuple(vel))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Uniformly sampled evolution: states[j][i] is component i at times[j]."""

    times: np.ndarray
    states: tuple
    step_size: float

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        object.__setattr__(self, "times", times)
        if times.ndim != 1 or times.size < 2:
            raise ValueError("need at least two sample times")
        dt = np.diff(times)
        if np.any(dt <= 0) or np.max(np.abs(dt - dt[0])) > 1e-9 * abs(dt[0]):
            raise ValueError("times must be strictly increasing and uniform")
        if len(self.states) != times.size:
            raise ValueError("one state tuple per sample time required")
        k = len(self.states[0])
        if any(len(s) != k for s in self.states):
            raise ValueError("component count varies along the trajectory")

    @property
    def n_components(self) -> int:
        return len(self.states[0])

    @property
    def masses(self) -> tuple:
        return tuple(p.mass for p in self.states[0])

    @property
    def lattice(self) -> FrequencyLattice:
        return self.states[0][0].lattice

    def component(self, i: int) -> tuple:
        """All snapshots of one component, time-ordered."""
        return tuple(state[i] for state in self.states)

    def norm_series(self, s: float) -> np.ndarray:
        """H^s norms of the physical fields, shape (n_times, n_components)."""
        out = np.empty((self.times.size, self.n_components))
        for j, state in enumerate(self.states):
            for i, pair in enumerate(state):
                out[j, i] = sobolev_norm(pair.field(), s, pair.mass)
        return out


def free_trajectory(pairs: Sequence[HalfWavePair], times) -> Trajectory:
    """Trajectory of exact free half-wave flow from the given pairs at t=0."""
    times = np.asarray(times, dtype=float)
    states = []
    for t in times:
        states.append(
            tuple(
                HalfWavePair(
                    free_propagate(p.plus, t, p.mass, +1),
                    free_propagate(p.minus, t, p.mass, -1),
                    p.mass,
                )
                for p in pairs
            )
        )
    return Trajectory(times, tuple(states), float(times[1] - times[0]))


# ---------------------------------------------------------------------------
# Lawson time stepping


class _Stepper:
    """Precomputed rotations for Lawson-RK4 at a fixed dt."""

    def __init__(self, lattice: FrequencyLattice, system: MassSystem, dt: float):
        self.lattice = lattice
        self.system = system
        self.dt = dt
        live = ~lattice.nyquist_mask
        self.half_phase = []
        self.full_phase = []
        self.inv2br = []
        for m in system.masses:
            br = lattice.bracket(m)
            self.half_phase.append(np.exp(0.5j * dt * br) * live)
            self.full_phase.append(np.exp(1j * dt * br) * live)
            self.inv2br.append(live / (2.0 * br))

    def slope(self, y):
        """Unrotated nonlinear slope: ∓ i N_i(u) / (2<D>)."""
        fields = tuple(
            SpectralField(self.lattice, p + q) for p, q in y
        )
        nonlin = evaluate_nonlinearity(self.system, fields)
        return [
            (-1j * n.coeffs * w, 1j * n.coeffs * w)
            for n, w in zip(nonlin, self.inv2br)
        ]

    def rotate(self, y, phases, direction):
        out = []
        for (p, q), ph in zip(y, phases):
            if direction > 0:
                out.append((p * ph, q * np.conj(ph)))
            else:
                out.append((p * np.conj(ph), q * ph))
        return out

    def step(self, y):
        h = self.dt
        g1 = self.slope(y)
        mid = [(p + 0.5 * h * a, q + 0.5 * h * b) for (p, q), (a, b) in zip(y, g1)]
        g2 = self.rotate(self.slope(self.rotate(mid, self.half_phase, +1)),
                         self.half_phase, -1)
        mid = [(p + 0.5 * h * a, q + 0.5 * h * b) for (p, q), (a, b) in zip(y, g2)]
        g3 = self.rotate(self.slope(self.rotate(mid, self.half_phase, +1)),
                         self.half_phase, -1)
        end = [(p + h * a, q + h * b) for (p, q), (a, b) in zip(y, g3)]
        g4 = self.rotate(self.slope(self.rotate(end, self.full_phase, +1)),
                         self.full_phase, -1)
        combined = [
            (
                p + (h / 6.0) * (a1 + 2 * a2 + 2 * a3 + a4),
                q + (h / 6.0) * (b1 + 2 * b2 + 2 * b3 + b4),
            )
            for (p, q), (a1, b1), (a2, b2), (a3, b3), (a4, b4) in zip(
                y, g1, g2, g3, g4
            )
        ]
        return self.rotate(combined, self.full_phase, +1)


def _pairs_to_raw(state):
    return [(p.plus.coeffs, p.minus.coeffs) for p in state]


def _raw_to_pairs(lattice, y, masses):
    return tuple(
        HalfWavePair(SpectralField(lattice, p), SpectralField(lattice, q), m)
        for (p, q), m in zip(y, masses)
    )


def step_exponential(state, system: MassSystem, dt: float):
    """One Lawson-RK4 step of the half-wave system.

    The linear phase is applied exactly; the rotated nonlinearity is advanced
    with classical RK4, giving local error O(dt^5) on smooth data.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    lattice = state[0].lattice
    stepper = _Stepper(lattice, system, dt)
    y = stepper.step(_pairs_to_raw(state))
    for p, q in y:
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(q))):
            raise InstabilityError("non-finite values after step", norm=math.inf)
    return _raw_to_pairs(lattice, y, system.masses)


def evolve(
    data: CauchyData,
    system: MassSystem,
    T: float,
    dt: float,
    sample_every: int = 1,
    s: float = 0.5,
    growth_abort: float = 1e6,
) -> Trajectory:
    """March the half-wave pair to time ~T, sampling every given stride.

    The number of steps is rounded up to a whole number of strides so the
    sampled times stay uniform.  Aborts with InstabilityError when the summed
    H^s norm exceeds growth_abort times its initial value or turns non-finite.
    """
    if T <= 0 or dt <= 0 or sample_every < 1:
        raise ValueError("T, dt and sample_every must be positive")
    steps = max(1, int(round(T / dt)))
    steps = sample_every * math.ceil(steps / sample_every)
    lattice = data.lattice
    stepper = _Stepper(lattice, system, dt)
    masses = system.masses

    y = _pairs_to_raw(initial_pair(data, masses))

    def total_norm(raw):
        sq = 0.0
        for (p, q), m in zip(raw, masses):
            f = SpectralField(lattice, p + q)
            sq += sobolev_norm(f, s, m) ** 2
        return math.sqrt(sq)

    base = total_norm(y)
    limit = growth_abort * base if base > 0 else math.inf

    times = [0.0]
    states = [_raw_to_pairs(lattice, y, masses)]
    for j in range(1, steps + 1):
        y = stepper.step(y)
        t = j * dt
        finite = all(
            np.all(np.isfinite(p)) and np.all(np.isfinite(q)) for p, q in y
        )
        if not finite:
            raise InstabilityError(
                f"non-finite state at t={t:.6g}", time=t, norm=math.inf
            )
        norm = total_norm(y)
        if norm > limit:
            raise InstabilityError(
                f"norm {norm:.3e} exceeded {growth_abort:.1e} x initial at "
                f"t={t:.6g}",
                time=t,
                norm=norm,
            )
        if j % sample_every == 0:
            times.append(t)
            states.append(_raw_to_pairs(lattice, y, masses))
    return Trajectory(np.array(times), tuple(states), dt * sample_every)


# ---------------------------------------------------------------------------
# Picard / fixed-point route


@dataclass(frozen=True, eq=False)
class PicardReport:
    """Fixed-point iteration record: iterates and contraction diagnostics."""

    iterates: tuple
    successive_distances: tuple
    contraction_factor: float
    diverged: bool

    @property
    def final(self) -> Trajectory:
        return self.iterates[-1]


def _trajectory_distance(a: Trajectory, b: Trajectory, s: float) -> float:
    """sup over time of the summed-component H^s distance of the pairs."""
    worst = 0.0
    for sa, sb in zip(a.states, b.states):
        sq = 0.0
        for pa, pb in zip(sa, sb):
            dp = pa.plus - pb.plus
            dm = pa.minus - pb.minus
            sq += sobolev_norm(dp, s, pa.mass) ** 2
            sq += sobolev_norm(dm, s, pa.mass) ** 2
        worst = max(worst, math.sqrt(sq))
    return worst


def picard_iterate(
    data: CauchyData,
    system: MassSystem,
    T: float,
    dt: float,
    iters: int,
    s: float = 0.5,
) -> PicardReport:
    """Solve the integral form u^± = free part ∓ i ∫ rotated N/(2<D>) by iteration.

    The time integral uses composite trapezoid on the unrotated integrand
    e^{∓i s <D>} N(u(s))/(2<D>), then rotates the running sum forward.  The
    report carries every iterate, the sup-in-time H^s distances between
    consecutive iterates, and their worst ratio; three consecutive distance
    increases set the diverged flag and stop the iteration.
    """
    if iters < 2:
        raise ValueError("need at least two iterations to report a contraction")
    if T <= 0 or dt <= 0:
        raise ValueError("T and dt must be positive")
    lattice = data.lattice
    masses = system.masses
    n_steps = max(1, int(round(T / dt)))
    times = np.arange(n_steps + 1) * dt
    live = ~lattice.nyquist_mask

    brackets = [lattice.bracket(m) for m in masses]
    inv2br = [live / (2.0 * br) for br in brackets]
    # phases[i][j] = e^{+ i t_j <D>_mi}
    phases = [
        [np.exp(1j * t * br) * live for t in times] for br in brackets
    ]

    pairs0 = initial_pair(data, masses)
    base = [(p.plus.coeffs, p.minus.coeffs) for p in pairs0]

    def free_states():
        return [
            [
                (base[i][0] * phases[i][j], base[i][1] * np.conj(phases[i][j]))
                for i in range(len(masses))
            ]
            for j in range(times.size)
        ]

    def to_trajectory(raw_states):
        return Trajectory(
            times,
            tuple(_raw_to_pairs(lattice, st, masses) for st in raw_states),
            float(dt),
        )

    current = free_states()
    iterates = [to_trajectory(current)]
    distances = []
    diverged = False
    k = len(masses)

    for _ in range(iters):
        # scaled nonlinearity N(u(s))/(2<D>) along the current trajectory
        scaled = []
        for j in range(times.size):
            fields = tuple(SpectralField(lattice, p + q) for p, q in current[j])
            nonlin = evaluate_nonlinearity(system, fields)
            scaled.append([nonlin[i].coeffs * inv2br[i] for i in range(k)])
        # cumulative trapezoid of the unrotated integrands e^{∓is<D>} N/(2<D>)
        acc_p = [np.zeros_like(base[i][0]) for i in range(k)]
        acc_m = [np.zeros_like(base[i][0]) for i in range(k)]
        nxt = []
        prev_p = prev_m = None
        for j in range(times.size):
            cur_p = [np.conj(phases[i][j]) * scaled[j][i] for i in range(k)]
            cur_m = [phases[i][j] * scaled[j][i] for i in range(k)]
            if j > 0:
                for i in range(k):
                    acc_p[i] = acc_p[i] + 0.5 * dt * (prev_p[i] + cur_p[i])
                    acc_m[i] = acc_m[i] + 0.5 * dt * (prev_m[i] + cur_m[i])
            prev_p, prev_m = cur_p, cur_m
            state = []
            for i in range(k):
                ph = phases[i][j]
                plus = ph * (base[i][0] - 1j * acc_p[i])
                minus = np.conj(ph) * (base[i][1] + 1j * acc_m[i])
                state.append((plus, minus))
            nxt.append(state)
        candidate = to_trajectory(nxt)
        distances.append(_trajectory_distance(candidate, iterates[-1], s))
        iterates.append(candidate)
        current = nxt
        streak = 0
        for a, b in zip(distances, distances[1:]):
            streak = streak + 1 if b > a else 0
        if streak >= 3:
            diverged = True
            break

    ratios = [
        distances[i + 1] / distances[i]
        for i in range(len(distances) - 1)
        if distances[i] > 0
    ]
    factor = max(ratios) if ratios else 0.0
    return PicardReport(tuple(iterates), tuple(distances), factor, diverged)


# ---------------------------------------------------------------------------
# scattering and conserved quantities


@dataclass(frozen=True, eq=False)
class ScatteringResult:
    """Unrotated final state and the Cauchy increments along the trajectory."""

    times: np.ndarray
    final: tuple
    increments: np.ndarray

    def tail_ratio(self, split_time: float) -> float:
        """Increment mass after split_time divided by the mass before it."""
        mids = 0.5 * (self.times[1:] + self.times[:-1])
        late = self.increments[mids >= split_time].sum()
        early = self.increments[mids < split_time].sum()
        if early == 0:
            return math.inf if late > 0 else 0.0
        return float(late / early)


def scattering_state(traj: Trajectory, s: float = 0.5) -> ScatteringResult:
    """Pull back the flow: w^±(t) = e^{∓it<D>} u^±(t).

    For a free wave w is constant; for a scattering solution it is Cauchy in
    t.  Returns w^±(T_final) per component and the summed-component H^s
    increments ||w(t_{j+1}) - w(t_j)|| as a vector over sample gaps.
    """
    times = traj.times
    k = traj.n_components
    unrotated = []
    for j, t in enumerate(times):
        state = []
        for pair in traj.states[j]:
            wp = free_propagate(pair.plus, t, pair.mass, -1)
            wm = free_propagate(pair.minus, t, pair.mass, +1)
            state.append(HalfWavePair(wp, wm, pair.mass))
        unrotated.append(tuple(state))
    inc = np.zeros(times.size - 1)
    for j in range(times.size - 1):
        sq = 0.0
        for i in range(k):
            a, b = unrotated[j][i], unrotated[j + 1][i]
            sq += sobolev_norm(b.plus - a.plus, s, a.mass) ** 2
            sq += sobolev_norm(b.minus - a.minus, s, a.mass) ** 2
        inc[j] = math.sqrt(sq)
    return ScatteringResult(times, unrotated[-1], inc)


def conserved_energy(state, system: MassSystem) -> float:
    """Energy of a half-wave state under a gradient-type quadratic coupling.

    E = sum_i ( ||u_t||^2 + ||grad u||^2 + m^2 ||u||^2 ) / 2
        - (1/3) sum_i Re <N_i(u), u_i>.

    The cubic term uses the dealiased products, which is the quantity the
    truncated flow actually conserves.  Meaningful when the polynomials derive
    from a potential (e.g. the scalar N(u) = c u^2).
    """
    lattice = state[0].lattice
    vol = lattice.cell_volume
    fields = []
    quad = 0.0
    for pair in state:
        u, u_t = reconstruct(pair)
        fields.append(u)
        quad += 0.5 * vol * (
            np.sum(np.abs(u_t.coeffs) ** 2)
            + np.sum(lattice.k2 * np.abs(u.coeffs) ** 2)
            + pair.mass**2 * np.sum(np.abs(u.coeffs) ** 2)
        )
    nonlin = evaluate_nonlinearity(system, tuple(fields))
    cubic = sum(
        vol * np.real(np.sum(n.coeffs * np.conj(u.coeffs)))
        for n, u in zip(nonlin, fields)
    )
    return float(quad - cubic / 3.0)


def measure_amplitude_threshold(
    make_data: Callable[[float], CauchyData],
    system: MassSystem,
    T: float,
    dt: float,
    lo: float,
    hi: float,
    rounds: int = 8,
    s: float = 0.5,
    growth_cap: float = 4.0,
):
    """Bisect the empirical stability threshold between amplitudes lo and hi.

    An amplitude counts as stable when evolve completes with sup-in-time H^s
    norm at most growth_cap times the initial one.  Returns the bracket
    midpoint and the probe table [(amplitude, stable, observed_ratio)].
    lo must probe stable and hi unstable, otherwise ValueError.
    """

    def probe(amp):
        data = make_data(amp)
        try:
            traj = evolve(data, system, T, dt, s=s)
        except InstabilityError as err:
            return False, math.inf if err.norm is None else err.norm
        series = np.sqrt((traj.norm_series(s) ** 2).sum(axis=1))
        ratio = float(series.max() / series[0]) if series[0] > 0 else 0.0
        return ratio <= growth_cap, ratio

    table = []
    ok_lo, r_lo = probe(lo)
    ok_hi, r_hi = probe(hi)
    table.append((lo, ok_lo, r_lo))
    table.append((hi, ok_hi, r_hi))
    if not ok_lo or ok_hi:
        raise ValueError("bisection bracket must run stable at lo, unstable at hi")
    for _ in range(rounds):
        mid = math.sqrt(lo * hi)
        ok, ratio = probe(mid)
        table.append((mid, ok, ratio))
        if ok:
            lo = mid
        else:
            hi = mid
    return math.sqrt(lo * hi), table
