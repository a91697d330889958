"""Exceptional (isolated, Judd-type) eigenvalues and level crossings.

An exceptional point with index N >= 1 has energy E = N - g^2 + eps
("plus" branch, first solution family) or E = N - g^2 - eps ("minus" branch,
second family).  At that energy the closing condition C(N+2) = 0 holds
automatically for both components of the family; existence additionally
requires the component series to terminate, h_{N_c + 1} = 0, where the
truncation indices pair up as (N, N - 1) across the two components.  The
partner family's series is divergent there, so these eigenvalues leave no
sign-change zero in the Wronskian.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .model import (RabiParams, heun_params_set1_minus, heun_params_set1_plus,
                    heun_params_set2)
from . import heun
from .analytic import FIRST, MINUS, PLUS, SECOND
from . import oracle as oracle_mod


@dataclass(frozen=True)
class ExceptionalPoint:
    N: int
    branch: str                   # "plus" | "minus"
    energy: float
    constraint_residual: float
    family: str                   # "first" (plus) | "second" (minus)
    params: RabiParams


@dataclass(frozen=True)
class CrossingPoint:
    N1: int
    N2: int
    epsilon_star: float
    g_star: float
    delta_relation: float         # delta^2 + 4 g_star^2 on the crossing locus
    energy: float
    boundary: bool = False        # g_star pinned at 0 (degenerate locus edge)


def candidate_energy(N: int, branch: str, p: RabiParams) -> float:
    """Closed-form candidate E = N - g^2 +- eps (existence not implied)."""
    if N < 0:
        raise ValueError(f"N must be >= 0, got {N}")
    p = p.reduced()
    sign = {PLUS: 1.0, MINUS: -1.0}[branch]
    return N - p.g ** 2 + sign * p.epsilon


def _component_sets(N: int, branch: str, E: float, p: RabiParams):
    """(HeunParams, truncation index) for both components of the branch family."""
    if branch == PLUS:
        return [(heun_params_set1_plus(E, p), N),
                (heun_params_set1_minus(E, p), N - 1)]
    if branch == MINUS:
        return [(heun_params_set2(heun_params_set1_plus(E, p)), N - 1),
                (heun_params_set2(heun_params_set1_minus(E, p)), N)]
    raise ValueError(f"unknown branch {branch!r}")


def constraint_residual(N: int, branch: str, p: RabiParams,
                        tol: float = heun.TRUNC_TOL) -> float:
    """Larger of the two normalized truncation residuals |h_{N_c+1}| / max|h_k|.

    Zero (within tol) iff an exceptional eigenvalue exists at these
    parameters.  Components whose series is divergent at the candidate energy
    yield an infinite residual.
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    p = p.reduced()
    E = candidate_energy(N, branch, p)
    worst = 0.0
    for hp, n_c in _component_sets(N, branch, E, p):
        series = heun.build_series(hp, n_max=max(n_c + 4, 2), tol=tol)
        if series.status == heun.DIVERGENT:
            return math.inf
        hs = [series.coefficient(k) for k in range(n_c + 1)]
        scale = max(abs(v) for v in hs)
        if abs(n_c + 1 + hp.beta) <= heun.POLE_EPS:
            # pole at the residual index: the builder either resolved the 0/0
            # into an exact polynomial or reported divergence above
            r = abs(series.coefficient(n_c + 1)) / scale
        else:
            # raw recurrence value, immune to the builder's zero-filling
            A, B, C = heun.recurrence_abc(hp)
            prev2 = hs[n_c - 1] if n_c >= 1 else 0.0
            r = abs(B(n_c + 1) * hs[n_c] + C(n_c + 1) * prev2) / abs(A(n_c + 1)) / scale
        worst = max(worst, r)
    return worst


def closed_form_relation(N: int, branch: str, p: RabiParams) -> float:
    """Residual of the explicit N = 1, 2 parameter relations (reduced units)."""
    p = p.reduced()
    g2 = p.g ** 2
    d2 = p.delta ** 2
    eps = p.epsilon
    sign = {PLUS: 1.0, MINUS: -1.0}[branch]
    if N == 1:
        return d2 + 4.0 * g2 - 1.0 - sign * 2.0 * eps
    if N == 2:
        return (64.0 * g2 + d2 * d2 + 4.0 * d2 + 4.0
                - (16.0 * g2 + 3.0 * d2 - sign * 8.0 * eps - 6.0) ** 2)
    raise ValueError(f"no closed-form relation for N = {N}; use constraint_residual")


def _senior_obstruction(N: int, branch: str, p: RabiParams) -> float:
    """Signed truncation indicator of the component with index N, smooth along
    parameter sweeps (finite across recurrence poles)."""
    E = candidate_energy(N, branch, p)
    if branch == PLUS:
        hp = heun_params_set1_plus(E, p)
    else:
        hp = heun_params_set2(heun_params_set1_minus(E, p))
    return heun.truncation_obstruction(hp, N)


def _bisect_root(f, lo, hi, flo, tol=1e-13, max_iter=200):
    for _ in range(max_iter):
        if hi - lo <= tol * max(1.0, abs(lo), abs(hi)):
            break
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def scan_exceptional(p_template: RabiParams,
                     g_range: Optional[Tuple[float, float]] = None,
                     epsilon_range: Optional[Tuple[float, float]] = None,
                     N_max: int = 4, tol: float = heun.TRUNC_TOL,
                     grid: int = 400, oracle_check: bool = True,
                     oracle_tol: float = 1e-6) -> List[ExceptionalPoint]:
    """All exceptional points along a one-parameter sweep.

    Brackets sign changes of the signed truncation indicator on the sweep
    grid, refines by bisection, then accepts a point only if the full
    two-component residual passes and (optionally) the oracle has a matching
    eigenvalue.
    """
    if (g_range is None) == (epsilon_range is None):
        raise ValueError("provide exactly one of g_range, epsilon_range")
    if grid < 200:
        raise ValueError(f"sweep grid must be >= 200 points, got {grid}")
    if N_max > 10:
        raise ValueError(f"N_max is capped at 10, got {N_max}")
    p_template = p_template.reduced()

    if g_range is not None:
        lo, hi = g_range
        make = lambda v: RabiParams(g=v, delta=p_template.delta,
                                    epsilon=p_template.epsilon)
    else:
        lo, hi = epsilon_range
        make = lambda v: RabiParams(g=p_template.g, delta=p_template.delta,
                                    epsilon=v)
    axis = [float(v) for v in np.linspace(lo, hi, grid)]

    found: List[ExceptionalPoint] = []
    for N in range(1, N_max + 1):
        for branch in (PLUS, MINUS):
            f = lambda v: _senior_obstruction(N, branch, make(v))
            vals = [f(v) for v in axis]
            for i in range(grid - 1):
                a, b = vals[i], vals[i + 1]
                if a == 0.0:
                    root = axis[i]
                elif b != 0.0 and (a > 0) != (b > 0):
                    root = _bisect_root(f, axis[i], axis[i + 1], a)
                else:
                    continue
                pr = make(root)
                res = constraint_residual(N, branch, pr, tol=tol)
                if not (res <= tol):
                    continue
                E = candidate_energy(N, branch, pr)
                if oracle_check:
                    orc = oracle_mod.eigen_in_window(pr, E - 0.5, E + 0.5)
                    if (orc.eigenvalues.size == 0
                            or np.min(np.abs(orc.eigenvalues - E)) > oracle_tol):
                        continue
                found.append(ExceptionalPoint(
                    N=N, branch=branch, energy=E, constraint_residual=res,
                    family=FIRST if branch == PLUS else SECOND, params=pr))
    axis_of = (lambda pt: pt.params.g) if g_range is not None else (lambda pt: pt.params.epsilon)
    found.sort(key=lambda pt: (axis_of(pt), pt.N, pt.branch))
    return found


def pair_separation(pt_plus: ExceptionalPoint, pt_minus: ExceptionalPoint) -> float:
    """E_plus - E_minus for a matched pair with equal N; equals 2 eps exactly."""
    if pt_plus.branch != PLUS or pt_minus.branch != MINUS:
        raise ValueError("expected a (plus, minus) pair of exceptional points")
    if pt_plus.N != pt_minus.N:
        raise ValueError(f"mismatched N: {pt_plus.N} vs {pt_minus.N}")
    if pt_plus.params != pt_minus.params:
        raise ValueError("exceptional points belong to different parameters")
    return pt_plus.energy - pt_minus.energy


def find_crossings(delta: float, N1: int, N2: int, tol: float = heun.TRUNC_TOL,
                   g_lo: float = 1e-3, g_hi: float = 2.0,
                   grid: int = 400) -> Optional[CrossingPoint]:
    """Two-fold degeneracy where the (N1, plus) and (N2, minus) exceptional
    points coincide; possible only at eps = (N2 - N1)/2.

    Root-finds the plus-branch constraint in g at that eps and accepts the
    lowest root where the minus-branch residual also vanishes.  Returns None
    when no such g exists in range; a degenerate locus pinned at g = 0 is
    reported with boundary=True.
    """
    if not (N2 > N1 >= 1):
        raise ValueError(f"need N2 > N1 >= 1, got ({N1}, {N2})")
    eps_star = 0.5 * (N2 - N1)
    make = lambda g: RabiParams(g=g, delta=delta, epsilon=eps_star)
    f = lambda g: _senior_obstruction(N1, PLUS, make(g))
    axis = [float(g) for g in np.linspace(g_lo, g_hi, grid)]
    vals = [f(g) for g in axis]
    for i in range(grid - 1):
        a, b = vals[i], vals[i + 1]
        if a == 0.0:
            root = axis[i]
        elif b != 0.0 and (a > 0) != (b > 0):
            root = _bisect_root(f, axis[i], axis[i + 1], a)
        else:
            continue
        pr = make(root)
        if not (constraint_residual(N1, PLUS, pr, tol=tol) <= tol):
            continue
        if not (constraint_residual(N2, MINUS, pr, tol=tol) <= tol):
            continue
        return CrossingPoint(N1=N1, N2=N2, epsilon_star=eps_star,
                             g_star=float(root),
                             delta_relation=float(delta ** 2 + 4.0 * root ** 2),
                             energy=float(N1 - root ** 2 + eps_star))
    if N1 == 1:
        # closed-form locus g^2 = (1 + 2 eps* - delta^2)/4 degenerates at g = 0
        g2 = (1.0 + 2.0 * eps_star - delta ** 2) / 4.0
        if g2 <= g_lo ** 2:
            return CrossingPoint(N1=N1, N2=N2, epsilon_star=eps_star, g_star=0.0,
                                 delta_relation=delta ** 2,
                                 energy=N1 + eps_star, boundary=True)
    return None


def factorization_identity_check(g: float, delta: float) -> float:
    """|LHS - RHS| of the crossing-locus factorization with eps eliminated via
    the N = 1 plus-branch relation eps = (delta^2 + 4 g^2 - 1)/2."""
    eps = 0.5 * (delta ** 2 + 4.0 * g ** 2 - 1.0)
    d2 = delta ** 2
    g2 = g ** 2
    lhs = (64.0 * g2 + d2 * d2 + 4.0 * d2 + 4.0
           - (16.0 * g2 + 3.0 * d2 + 8.0 * eps - 6.0) ** 2)
    rhs = -16.0 * (d2 + 4.0 * g2 - 2.0) * (3.0 * d2 + 16.0 * g2 - 3.0)
    return abs(lhs - rhs)
