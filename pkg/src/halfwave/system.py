r"""Coupled-system definitions and dealiased quadratic nonlinearities.

A system couples K components, each with its own positive mass, through
homogeneous quadratic polynomials with complex coefficients.  Factors may be
conjugated.  Products are evaluated pseudospectrally with the 2/3 rule applied
both before and after multiplication, so quadratic interactions never alias
back into the retained band.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .grid import FrequencyLattice, SpectralField, dealias_weights, inverse_transform


@dataclass(frozen=True)
class Monomial:
    """One quadratic term: coefficient * z_j * z_k, factors optionally conjugated."""

    coefficient: complex
    factors: tuple

    def __post_init__(self):
        if len(self.factors) != 2:
            raise ValueError("monomials are quadratic: exactly two factors")
        for idx, conj in self.factors:
            if idx < 0 or not isinstance(idx, int):
                raise ValueError(f"bad component index {idx}")
            if not isinstance(conj, bool):
                raise ValueError("conjugation flag must be boolean")


@dataclass(frozen=True)
class MassSystem:
    """K masses plus one list of quadratic monomials per component."""

    masses: tuple
    polynomials: tuple

    def __post_init__(self):
        if len(self.masses) == 0:
            raise ValueError("need at least one component")
        if any(not m > 0 for m in self.masses):
            raise ValueError("masses must be strictly positive")
        if len(self.polynomials) != len(self.masses):
            raise ValueError("one polynomial per component required")
        k = len(self.masses)
        for poly in self.polynomials:
            for mono in poly:
                for idx, _ in mono.factors:
                    if idx >= k:
                        raise ValueError(f"factor index {idx} out of range for K={k}")

    @property
    def size(self) -> int:
        return len(self.masses)


def scalar_system(mass: float = 1.0, coefficient: complex = 1.0) -> MassSystem:
    """Single component with N(u) = coefficient * u**2."""
    mono = Monomial(complex(coefficient), ((0, False), (0, False)))
    return MassSystem((float(mass),), ((mono,),))


def free_system(masses: Sequence[float]) -> MassSystem:
    """No coupling at all: every polynomial empty."""
    return MassSystem(tuple(float(m) for m in masses), ((),) * len(masses))


def check_nonresonance(masses: Sequence[float]):
    """Strict mass condition 2*min > max; returns (holds, margin)."""
    if len(masses) == 0:
        raise ValueError("empty mass list")
    margin = 2.0 * min(masses) - max(masses)
    return margin > 0, float(margin)


def evaluate_nonlinearity(system: MassSystem, fields: Sequence[SpectralField]):
    """Apply every component polynomial to the fields, fully dealiased.

    Inputs are truncated to the 2/3 band, multiplied pointwise on the physical
    grid (with conjugation flags honored), and the spectral products are
    truncated again.
    """
    if len(fields) != system.size:
        raise ValueError("one field per component required")
    lattice = fields[0].lattice
    if any(f.lattice != lattice for f in fields):
        raise ValueError("fields must share one lattice")
    keep = dealias_weights(lattice)

    needed = {
        (idx, conj)
        for poly in system.polynomials
        for mono in poly
        for (idx, conj) in mono.factors
    }
    physical = {}
    for idx, conj in needed:
        vals = inverse_transform(fields[idx].with_coeffs(fields[idx].coeffs * keep))
        physical[(idx, conj)] = np.conj(vals) if conj else vals

    out = []
    for poly in system.polynomials:
        total = np.zeros(lattice.spec.shape, dtype=complex)
        for mono in poly:
            a, b = mono.factors
            total += mono.coefficient * (physical[a] * physical[b])
        coeffs = np.fft.fftn(total, norm="ortho") * keep
        out.append(SpectralField(lattice, coeffs))
    return tuple(out)


# ---------------------------------------------------------------------------
# resonance analysis


def resonance_function(triple: Sequence[float], xi, eta):
    """<xi>_m + <eta>_n - <xi+eta>_o for a mass triple (m, n, o).

    xi and eta are arrays whose last axis is the space dimension; broadcasting
    applies.  Symmetric in its first two slots.
    """
    m, n, o = triple
    if not (m > 0 and n > 0 and o > 0):
        raise ValueError("masses must be positive")
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    a = np.sqrt(m * m + np.sum(xi * xi, axis=-1))
    b = np.sqrt(n * n + np.sum(eta * eta, axis=-1))
    c = np.sqrt(o * o + np.sum((xi + eta) ** 2, axis=-1))
    return a + b - c


def smallest_bracket(triple: Sequence[float], xi, eta):
    """min(<xi>_m, <eta>_n, <xi+eta>_o), the weight in the lower-bound probe."""
    m, n, o = triple
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    a = np.sqrt(m * m + np.sum(xi * xi, axis=-1))
    b = np.sqrt(n * n + np.sum(eta * eta, axis=-1))
    c = np.sqrt(o * o + np.sum((xi + eta) ** 2, axis=-1))
    return np.minimum(np.minimum(a, b), c)


@dataclass(frozen=True)
class ResonanceProbe:
    """Bundle of resonance-function evaluations at chosen frequency pairs."""

    triple: tuple
    samples: tuple
    values: np.ndarray

    @property
    def weighted_minimum(self) -> float:
        """min over samples of value * smallest bracket."""
        xi = np.array([s[0] for s in self.samples], dtype=float)
        eta = np.array([s[1] for s in self.samples], dtype=float)
        w = smallest_bracket(self.triple, xi, eta)
        return float(np.min(self.values * w))


def probe_resonance(triple: Sequence[float], samples) -> ResonanceProbe:
    samples = tuple(
        (tuple(float(x) for x in xi), tuple(float(y) for y in eta))
        for xi, eta in samples
    )
    xi = np.array([s[0] for s in samples], dtype=float)
    eta = np.array([s[1] for s in samples], dtype=float)
    values = resonance_function(triple, xi, eta)
    return ResonanceProbe(tuple(float(m) for m in triple), samples, values)


# ---------------------------------------------------------------------------
# definition files


def system_to_text(system: MassSystem) -> str:
    """Serialize a system definition; floats use shortest round-trip repr."""
    lines = [f"components = {system.size}"]
    lines.append("masses = " + " ".join(repr(float(m)) for m in system.masses))
    for i, poly in enumerate(system.polynomials):
        for mono in poly:
            (j, cj), (k, ck) = mono.factors
            c = complex(mono.coefficient)
            lines.append(
                f"monomial = {i} {c.real!r} {c.imag!r} "
                f"{j} {int(cj)} {k} {int(ck)}"
            )
    return "\n".join(lines) + "\n"


def system_from_text(text: str) -> MassSystem:
    """Parse the definition format written by system_to_text."""
    masses = None
    count = None
    monos = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, rest = line.partition("=")
        key = key.strip()
        parts = rest.split()
        if key == "components":
            count = int(parts[0])
        elif key == "masses":
            masses = tuple(float(p) for p in parts)
        elif key == "monomial":
            i = int(parts[0])
            coeff = complex(float(parts[1]), float(parts[2]))
            factors = (
                (int(parts[3]), bool(int(parts[4]))),
                (int(parts[5]), bool(int(parts[6]))),
            )
            monos.setdefault(i, []).append(Monomial(coeff, factors))
        else:
            raise ValueError(f"unknown key in system definition: {key!r}")
    if masses is None or count is None:
        raise ValueError("system definition needs components and masses lines")
    if len(masses) != count:
        raise ValueError("component count does not match mass list")
    polys = tuple(tuple(monos.get(i, ())) for i in range(count))
    return MassSystem(masses, polys)
