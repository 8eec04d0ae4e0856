"""Truncated Fock bases, the four-level system Hamiltonian and ladder operators.

The system is a four-level emitter {g, m1, m2, e} coupled to two bosonic
modes (pump and signal).  The total excitation charge

    c = 2*n_p + n_s + w(level),    w(g)=0, w(m1)=w(m2)=1, w(e)=2

commutes with the coherent Hamiltonian, so two basis flavors are supported:
a box truncation (n_p <= N_p, n_s <= N_s, all levels), used by the driven
master equation, and a charge-restricted basis (all states with a fixed
charge c, automatically finite), used by the scattering engine.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

LEVELS = ("g", "m1", "m2", "e")
LEVEL_INDEX = {name: i for i, name in enumerate(LEVELS)}
LEVEL_WEIGHT = {"g": 0, "m1": 1, "m2": 1, "e": 2}


@dataclass(frozen=True)
class SystemParams:
    """Physical rates and couplings, all in the same rate unit (gamma_s).

    omega_s_drive is the classical control Rabi frequency on m1<->m2;
    omega_p_drive is the pump drive amplitude entering the master equation;
    k0 is the pump-drive detuning from the pump resonance.
    """

    g_p: float
    g_s: float
    omega_s_drive: float
    omega_p_drive: float
    gamma_p: float
    gamma_s: float
    gamma_star: float = 0.0
    k0: float = 0.0

    def __post_init__(self):
        if self.gamma_p <= 0 or self.gamma_s <= 0:
            raise ValueError("cavity decay rates gamma_p, gamma_s must be > 0")
        if self.gamma_star < 0:
            raise ValueError("gamma_star must be >= 0")
        for name in ("g_p", "g_s", "omega_s_drive", "omega_p_drive"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


@dataclass(frozen=True, order=True)
class BasisState:
    """Product state |n_p, n_s, level> with a conserved charge."""

    n_p: int
    n_s: int
    level_idx: int

    @property
    def level(self) -> str:
        return LEVELS[self.level_idx]

    @property
    def charge(self) -> int:
        return 2 * self.n_p + self.n_s + LEVEL_WEIGHT[self.level]

    def __repr__(self):
        return f"|{self.n_p},{self.n_s},{self.level}>"


def state(n_p: int, n_s: int, level: str) -> BasisState:
    return BasisState(n_p, n_s, LEVEL_INDEX[level])


@dataclass(frozen=True)
class FockBasis:
    """Deterministically ordered list of basis states.

    mode is "box" (with cutoffs n_p_max, n_s_max) or "charge" (fixed c).
    Ordering is lexicographic on (n_p, n_s, level index), so identical specs
    always produce identical layouts.
    """

    states: tuple[BasisState, ...]
    mode: str
    n_p_max: int = -1
    n_s_max: int = -1
    charge: int = -1
    index: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "index", {s: i for i, s in enumerate(self.states)})

    @property
    def dim(self) -> int:
        return len(self.states)

    @property
    def basis_id(self) -> str:
        if self.mode == "box":
            return f"box(n_p<={self.n_p_max},n_s<={self.n_s_max})"
        return f"charge(c={self.charge})"

    def charges(self) -> np.ndarray:
        return np.array([s.charge for s in self.states], dtype=int)


@dataclass(frozen=True)
class LabeledOperator:
    """Complex dense matrix bound to a specific basis.

    For charge-restricted bases an annihilator maps between different bases,
    so the operator carries both domain and codomain identifiers.  Square
    operators have codomain_id == basis_id.
    """

    matrix: np.ndarray
    basis_id: str
    codomain_id: str = ""
    hermitian: bool = False

    def __post_init__(self):
        if not self.codomain_id:
            object.__setattr__(self, "codomain_id", self.basis_id)
        if self.hermitian:
            m = self.matrix
            scale = max(np.abs(m).max(), 1.0)
            if np.abs(m - m.conj().T).max() > 1e-14 * scale:
                raise ValueError("operator flagged hermitian is not")


def _sorted(states: Iterable[BasisState]) -> tuple[BasisState, ...]:
    return tuple(sorted(states))


def box_basis(n_p_max: int, n_s_max: int) -> FockBasis:
    """All states with n_p <= n_p_max, n_s <= n_s_max, any level."""
    if n_p_max < 0 or n_s_max < 0:
        raise ValueError("box cutoffs must be >= 0")
    states = (
        BasisState(n_p, n_s, r)
        for n_p in range(n_p_max + 1)
        for n_s in range(n_s_max + 1)
        for r in range(4)
    )
    return FockBasis(_sorted(states), "box", n_p_max=n_p_max, n_s_max=n_s_max)


def charge_basis(c: int) -> FockBasis:
    """All states with total charge c (a finite set)."""
    if c < 0:
        raise ValueError("charge must be >= 0")
    states = []
    for r in range(4):
        rest = c - LEVEL_WEIGHT[LEVELS[r]]
        if rest < 0:
            continue
        for n_p in range(rest // 2 + 1):
            states.append(BasisState(n_p, rest - 2 * n_p, r))
    return FockBasis(_sorted(states), "charge", charge=c)


def enumerate_basis(mode: str, **kwargs) -> FockBasis:
    """Dispatching constructor: mode is "box" or "charge"."""
    if mode == "box":
        return box_basis(kwargs["n_p_max"], kwargs["n_s_max"])
    if mode == "charge":
        return charge_basis(kwargs["charge"])
    raise ValueError(f"unknown basis mode {mode!r}")


def _coupling_targets(s: BasisState):
    """Nonzero matrix elements <target| H_term |s> of the coherent couplings.

    Yields (target_state, coefficient_kind, bosonic_factor) where kind is one
    of "g_p", "omega_s", "g_s"; only the 'raising' half is produced, the
    Hermitian conjugate is added by the caller.
    """
    if s.level == "e":
        # g_p a_p^dag |g><e|
        yield BasisState(s.n_p + 1, s.n_s, LEVEL_INDEX["g"]), "g_p", np.sqrt(s.n_p + 1)
        # g_s a_s^dag |m2><e|
        yield BasisState(s.n_p, s.n_s + 1, LEVEL_INDEX["m2"]), "g_s", np.sqrt(s.n_s + 1)
    elif s.level == "m1":
        # omega_s |m2><m1|
        yield BasisState(s.n_p, s.n_s, LEVEL_INDEX["m2"]), "omega_s", 1.0
        # g_s a_s^dag |g><m1|
        yield BasisState(s.n_p, s.n_s + 1, LEVEL_INDEX["g"]), "g_s", np.sqrt(s.n_s + 1)


def build_hamiltonian(params: SystemParams, basis: FockBasis) -> LabeledOperator:
    """Coherent system Hamiltonian on the given basis (Hermitian).

    Realizes g_p a_p^+|g><e| + Omega_s|m2><m1| + g_s a_s^+(|m2><e|+|g><m1|)
    + H.c., plus the detuning generator -k0*C/2 when k0 != 0 (valid because
    the charge operator commutes with every coupling term).
    """
    if basis.dim == 0:
        raise ValueError("empty basis")
    coeff = {"g_p": params.g_p, "omega_s": params.omega_s_drive, "g_s": params.g_s}
    h = np.zeros((basis.dim, basis.dim), dtype=complex)
    for j, s in enumerate(basis.states):
        for target, kind, factor in _coupling_targets(s):
            i = basis.index.get(target)
            if i is None:
                continue  # outside the box truncation
            h[i, j] += coeff[kind] * factor
            h[j, i] += np.conj(coeff[kind]) * factor
    if params.k0 != 0.0:
        h -= np.diag(0.5 * params.k0 * basis.charges()).astype(complex)
    return LabeledOperator(h, basis.basis_id, hermitian=True)


def charge_operator(basis: FockBasis) -> LabeledOperator:
    return LabeledOperator(
        np.diag(basis.charges().astype(complex)), basis.basis_id, hermitian=True
    )


def annihilator(basis: FockBasis, mode: str) -> LabeledOperator:
    """Bosonic annihilator a_p or a_s on the basis.

    On a box basis the result is square (exact within the truncation).  On a
    charge basis the operator maps charge c to c-1 (signal) or c-2 (pump) and
    the codomain basis is constructed implicitly.
    """
    dq = {"a_p": ("n_p", 2), "a_s": ("n_s", 1)}
    attr, dc = dq[mode]
    if basis.mode == "box":
        target = basis
    else:
        target = charge_basis(basis.charge - dc)
    m = np.zeros((target.dim, basis.dim), dtype=complex)
    for j, s in enumerate(basis.states):
        n = getattr(s, attr)
        if n == 0:
            continue
        if attr == "n_p":
            t = BasisState(s.n_p - 1, s.n_s, s.level_idx)
        else:
            t = BasisState(s.n_p, s.n_s - 1, s.level_idx)
        i = target.index.get(t)
        if i is not None:
            m[i, j] = np.sqrt(n)
    return LabeledOperator(m, basis.basis_id, codomain_id=target.basis_id)


def transition(basis: FockBasis, upper: str, lower: str) -> LabeledOperator:
    """|lower><upper| acting trivially on the photon numbers (0/1 entries)."""
    u, l = LEVEL_INDEX[upper], LEVEL_INDEX[lower]
    m = np.zeros((basis.dim, basis.dim), dtype=complex)
    for j, s in enumerate(basis.states):
        if s.level_idx != u:
            continue
        i = basis.index.get(BasisState(s.n_p, s.n_s, l))
        if i is not None:
            m[i, j] = 1.0
    return LabeledOperator(m, basis.basis_id)


def level_projector(basis: FockBasis, level: str) -> LabeledOperator:
    r = LEVEL_INDEX[level]
    d = np.array([1.0 if s.level_idx == r else 0.0 for s in basis.states])
    return LabeledOperator(np.diag(d).astype(complex), basis.basis_id, hermitian=True)


def build_mode_operators(basis: FockBasis) -> dict[str, LabeledOperator]:
    """Annihilators, level projectors and the cascade transitions."""
    ops = {
        "a_p": annihilator(basis, "a_p"),
        "a_s": annihilator(basis, "a_s"),
    }
    for r in LEVELS:
        ops[f"P_{r}"] = level_projector(basis, r)
    ops["sigma_ge"] = transition(basis, "e", "g")  # |g><e|
    ops["sigma_m1m2"] = transition(basis, "m2", "m1")  # |m1><m2|
    return ops
