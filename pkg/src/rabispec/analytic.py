"""Analytic solution pairs and the Wronskian condition for the regular spectrum.

Two families solve the coupled first-order system for (psi_+, psi_-):

    family "first":   psi_{+,-}^1(z) = scale * exp(-g z) * HC(..., (g - z)/(2g))
    family "second":  psi_{+,-}^2(z) = scale * exp(+g z) * HC(..., (g + z)/(2g))

At an energy eigenvalue the families are linearly dependent, so the Wronskians

    W_+(E, z) = psi_+^2 d(psi_+^1)/dz - psi_+^1 d(psi_+^2)/dz
    W_-(E, z) = psi_-^2 d(psi_-^1)/dz - psi_-^1 d(psi_-^2)/dz

vanish; the regular spectrum is found as sign-change zeros of W_+ in E at
z = 0, with exclusion windows around the candidate energies N - g^2 +- eps
where the series recurrence has poles (exceptional-point territory).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
import numpy as np

from .model import (RabiParams, heun_params_set1_minus, heun_params_set1_plus,
                    heun_params_set2)
from . import heun
from .heun import (CONVERGED, TRUNCATED, DivergentSeriesError, HeunSeries,
                   build_series, eval_series)

FIRST = "first"
SECOND = "second"
PLUS = "plus"
MINUS = "minus"

W_EXCL_DEFAULT = 1e-3
BISECT_MAX_ITER = 200


class ScalePoleError(ValueError):
    """Scale denominator E + g^2 +- epsilon vanishes at this energy."""


def component_params(family: str, which: str, E: float, p: RabiParams):
    """Heun parameters of one component of one solution family."""
    base = heun_params_set1_plus(E, p) if which == PLUS else heun_params_set1_minus(E, p)
    if family == FIRST:
        return base
    if family == SECOND:
        return heun_params_set2(base)
    raise ValueError(f"unknown family {family!r}")


@dataclass(frozen=True)
class SolutionPair:
    family: str
    plus_series: HeunSeries
    minus_series: HeunSeries
    scale_plus: float
    scale_minus: float
    energy: float
    params: RabiParams


@dataclass(frozen=True)
class WronskianSample:
    energy: float
    w_plus: float
    w_minus: float
    reliable: bool


def build_pair(family: str, E: float, p: RabiParams,
               n_max: int = heun.N_MAX_DEFAULT, tol: float = heun.TRUNC_TOL) -> SolutionPair:
    """Build both components of one solution family at energy E."""
    if p.g == 0.0:
        raise ValueError("g = 0 is not supported by the analytic path; "
                         "the coordinate (g -+ z)/(2g) degenerates")
    g2 = p.g * p.g
    if family == FIRST:
        denom = E + g2 + p.epsilon
    elif family == SECOND:
        denom = E + g2 - p.epsilon
    else:
        raise ValueError(f"unknown family {family!r}")
    if abs(denom) < 1e-12 * max(1.0, abs(E)):
        raise ScalePoleError(
            f"scale denominator vanishes at E = {E} for family {family!r}")
    plus = build_series(component_params(family, PLUS, E, p), n_max=n_max, tol=tol)
    minus = build_series(component_params(family, MINUS, E, p), n_max=n_max, tol=tol)
    if family == FIRST:
        scale_plus, scale_minus = 1.0, p.delta / denom
    else:
        scale_plus, scale_minus = p.delta / denom, 1.0
    return SolutionPair(family, plus, minus, scale_plus, scale_minus, E, p)


def _eval_component_full(pair: SolutionPair, which: str, z: float):
    g = pair.params.g
    if pair.family == FIRST:
        x = (g - z) / (2.0 * g)
        dxdz = -1.0 / (2.0 * g)
        s = -g
    else:
        x = (g + z) / (2.0 * g)
        dxdz = 1.0 / (2.0 * g)
        s = g
    if which == PLUS:
        series, scale = pair.plus_series, pair.scale_plus
    elif which == MINUS:
        series, scale = pair.minus_series, pair.scale_minus
    else:
        raise ValueError(f"unknown component {which!r}")
    ev = eval_series(series, x)
    pref = scale * math.exp(s * z)
    value = pref * ev.value
    deriv = pref * (s * ev.value + ev.derivative * dxdz)
    return value, deriv, ev.status


def eval_component(pair: SolutionPair, which: str, z: float):
    """(value, d/dz) of one component at z, including prefactor and chain rule."""
    value, deriv, _ = _eval_component_full(pair, which, z)
    return value, deriv


def wronskian(E: float, p: RabiParams, z: float = 0.0,
              n_max: int = heun.N_MAX_DEFAULT, tol: float = heun.TRUNC_TOL) -> WronskianSample:
    """Both Wronskians at one energy; unreliable when any series misbehaves.

    At z = 0 the identity W_+(E; eps) = W_-(E; -eps) holds and serves as a
    cross-check.
    """
    try:
        first = build_pair(FIRST, E, p, n_max=n_max, tol=tol)
        second = build_pair(SECOND, E, p, n_max=n_max, tol=tol)
    except ScalePoleError:
        return WronskianSample(E, math.nan, math.nan, False)
    build_statuses = [first.plus_series.status, first.minus_series.status,
                      second.plus_series.status, second.minus_series.status]
    reliable = all(s in (CONVERGED, TRUNCATED) for s in build_statuses)
    try:
        vp1, dp1, s1 = _eval_component_full(first, PLUS, z)
        vp2, dp2, s2 = _eval_component_full(second, PLUS, z)
        vm1, dm1, s3 = _eval_component_full(first, MINUS, z)
        vm2, dm2, s4 = _eval_component_full(second, MINUS, z)
    except DivergentSeriesError:
        return WronskianSample(E, math.nan, math.nan, False)
    reliable &= all(s in (CONVERGED, TRUNCATED) for s in (s1, s2, s3, s4))
    w_plus = vp2 * dp1 - vp1 * dp2
    w_minus = vm2 * dm1 - vm1 * dm2
    return WronskianSample(E, w_plus, w_minus, reliable)


def exceptional_candidates(p: RabiParams, e_min: float, e_max: float):
    """(N, branch, E) for every candidate energy E = N - g^2 +- eps in range.

    These are the energies where the series recurrence has poles; N = 0 rows
    are included because they carry poles too, even though a valid exceptional
    point needs N >= 1.
    """
    g2 = p.g * p.g
    out = []
    n_lo = max(0, math.floor(e_min + g2 - abs(p.epsilon)) - 1)
    n_hi = math.ceil(e_max + g2 + abs(p.epsilon)) + 1
    for N in range(n_lo, n_hi + 1):
        for branch, sign in ((PLUS, 1.0), (MINUS, -1.0)):
            E = N - g2 + sign * p.epsilon
            if e_min <= E <= e_max:
                out.append((N, branch, E))
    out.sort(key=lambda t: t[2])
    return out


def _series_param_rows(E, g, delta, eps):
    """Per-series (alpha, beta, gamma, delta, eta, coord) rows for the four
    components, with E an array.  coord is "x1" or "x2"."""
    g2 = g * g
    d2 = delta * delta
    al = 4.0 * g2
    b1 = -(E + eps + g2 + 1.0)
    c1 = -(E - eps + g2)
    d1 = -2.0 * (1.0 - 2.0 * eps) * g2
    e1 = (-1.5 * g2 * g2 + (1.0 - 2.0 * E - 4.0 * eps) * g2 / 2.0
          + (E * E + E - eps * eps + eps - 2.0 * d2 + 1.0) / 2.0)
    b2 = -(E + eps + g2)
    c2 = -(E - eps + g2 + 1.0)
    d2s = 2.0 * (1.0 + 2.0 * eps) * g2
    e2 = (-1.5 * g2 * g2 - (3.0 + 2.0 * E + 4.0 * eps) * g2 / 2.0
          + (E * E + E - eps * eps - eps - 2.0 * d2 + 1.0) / 2.0)
    return [
        (al, b1, c1, d1, e1, "x1"),                  # psi_+^1
        (al, c1, b1, -d1, e1 + d1, "x2"),            # psi_+^2
        (al, b2, c2, d2s, e2, "x1"),                 # psi_-^1
        (al, c2, b2, -d2s, e2 + d2s, "x2"),          # psi_-^2
    ]


def wronskian_grid(E: np.ndarray, p: RabiParams, z: float = 0.0,
                   n_max: int = heun.N_MAX_DEFAULT):
    """Vectorized W_+ and W_- over an array of energies.

    Same arithmetic as the scalar path, advanced for all energies at once.
    Returns (w_plus, w_minus, reliable); an element is unreliable when a
    recurrence pole was hit, the tail rule failed to fire within n_max terms,
    or a scale denominator is (nearly) singular.
    """
    if p.g == 0.0:
        raise ValueError("g = 0 is not supported by the analytic path")
    E = np.asarray(E, dtype=float)
    g = p.g
    eps = p.epsilon
    g2 = g * g
    x_of = {"x1": (g - z) / (2.0 * g), "x2": (g + z) / (2.0 * g)}
    dx_of = {"x1": -1.0 / (2.0 * g), "x2": 1.0 / (2.0 * g)}
    if any(abs(x) >= 1.0 for x in x_of.values()):
        raise ValueError(f"z = {z} leaves the common convergence disk")

    reliable = np.ones(E.shape, dtype=bool)
    vals, ders = [], []
    for (al, be, ga, de, et, coord) in _series_param_rows(E, g, p.delta, eps):
        x = x_of[coord]
        b_lin = be + ga - al - 1.0
        b_const = et - be / 2.0 + (ga - al) * (be - 1.0) / 2.0
        c_const = de + al * (be + ga) / 2.0
        h_prev = np.zeros_like(E)
        h_cur = np.ones_like(E)
        S = np.ones_like(E)
        Dx = np.zeros_like(E)
        small = np.zeros(E.shape, dtype=np.int32)
        done = np.zeros(E.shape, dtype=bool)
        xp = 1.0                       # x**(n-1)
        for n in range(1, n_max + 1):
            An = (n + be) * n
            Bn = n * n + b_lin * n + b_const
            Cn = c_const + al * (n - 1.0)
            pole = np.abs(n + be) <= heun.POLE_EPS
            if pole.any():
                reliable &= ~pole
            with np.errstate(all="ignore"):
                h_new = np.where(pole, 0.0, (Bn * h_cur + Cn * h_prev) / An)
            active = ~done
            hx = h_new * xp
            Dx += np.where(active, n * hx, 0.0)
            term = hx * x
            S += np.where(active, term, 0.0)
            with np.errstate(all="ignore"):
                tiny = np.abs(term) <= heun.TAIL_TOL * np.abs(S)
            small = np.where(tiny & active, small + 1, small)
            small = np.where(~tiny & active, 0, small)
            done |= small >= heun.TAIL_RUN
            if done.all():
                break
            h_prev, h_cur = h_cur, h_new
            xp *= x
        reliable &= done & np.isfinite(S) & np.isfinite(Dx)
        vals.append(S)
        ders.append(Dx)

    den_p = E + g2 - eps              # scale of psi_+^2
    den_m = E + g2 + eps              # scale of psi_-^1
    reliable &= (np.abs(den_p) > 1e-12) & (np.abs(den_m) > 1e-12)
    with np.errstate(all="ignore"):
        sc_p = p.delta / den_p
        sc_m = p.delta / den_m
    ezm = math.exp(-g * z)
    ezp = math.exp(g * z)
    dx1, dx2 = dx_of["x1"], dx_of["x2"]
    vp1 = ezm * vals[0]
    dp1 = ezm * (-g * vals[0] + dx1 * ders[0])
    vp2 = sc_p * ezp * vals[1]
    dp2 = sc_p * ezp * (g * vals[1] + dx2 * ders[1])
    vm1 = sc_m * ezm * vals[2]
    dm1 = sc_m * ezm * (-g * vals[2] + dx1 * ders[2])
    vm2 = ezp * vals[3]
    dm2 = ezp * (g * vals[3] + dx2 * ders[3])
    w_plus = vp2 * dp1 - vp1 * dp2
    w_minus = vm2 * dm1 - vm1 * dm2
    return w_plus, w_minus, reliable


def find_regular_spectrum(p: RabiParams, e_min: float, e_max: float,
                          grid_n: int = 600, tol: float = 1e-9,
                          w_excl: float = W_EXCL_DEFAULT,
                          n_max: int = heun.N_MAX_DEFAULT):
    """Regular spectrum: sign-change zeros of W_+(E, 0), bisection-refined.

    Grid samples inside the exclusion windows around candidate energies
    N - g^2 +- eps are skipped, brackets never span a skipped or unreliable
    sample, and refined roots landing inside a window are dropped.
    """
    from .spectrum import SpectrumPoint

    if not (e_min < e_max):
        raise ValueError(f"need e_min < e_max, got [{e_min}, {e_max}]")
    if grid_n < 100:
        raise ValueError(f"grid_n must be >= 100, got {grid_n}")
    excl = [E for (_, _, E) in exceptional_candidates(p, e_min - 1.0, e_max + 1.0)]

    def outside_windows(e):
        return all(abs(e - c) > w_excl for c in excl)

    # base grid plus samples hugging each exclusion-window edge: levels repelled
    # by a nearby pole often sit just outside the window, between grid points
    samples = list(np.linspace(e_min, e_max, grid_n))
    for c in excl:
        for edge in (c - 1.02 * w_excl, c + 1.02 * w_excl,
                     c - 2.5 * w_excl, c + 2.5 * w_excl):
            if e_min <= edge <= e_max:
                samples.append(edge)
    grid = np.array(sorted(samples))
    wp, _, rel = wronskian_grid(grid, p, n_max=n_max)
    ok = rel & np.array([outside_windows(e) for e in grid])

    def candidate_between(a, b):
        return any(a < c < b for c in excl)

    roots = []           # (energy, residual) of exact grid zeros
    lo_list, hi_list, flo_list = [], [], []
    for i in range(len(grid) - 1):
        if not (ok[i] and ok[i + 1]) or candidate_between(grid[i], grid[i + 1]):
            continue
        if wp[i] == 0.0:
            roots.append((grid[i], 0.0))
            continue
        if wp[i + 1] != 0.0 and np.sign(wp[i]) != np.sign(wp[i + 1]):
            lo_list.append(grid[i])
            hi_list.append(grid[i + 1])
            flo_list.append(wp[i])
    if ok[-1] and wp[-1] == 0.0:
        roots.append((grid[-1], 0.0))

    if lo_list:
        lo = np.array(lo_list)
        hi = np.array(hi_list)
        flo = np.array(flo_list)
        alive = np.ones(lo.shape, dtype=bool)
        for _ in range(BISECT_MAX_ITER):
            if not alive.any() or (hi[alive] - lo[alive]).max() <= tol:
                break
            mid = 0.5 * (lo + hi)
            fm, _, rel_m = wronskian_grid(mid, p, n_max=n_max)
            alive &= rel_m
            take_lo = alive & (np.sign(fm) == np.sign(flo))
            lo = np.where(take_lo, mid, lo)
            flo = np.where(take_lo, fm, flo)
            hi = np.where(alive & ~take_lo, mid, hi)
        mid = 0.5 * (lo + hi)
        res, _, rel_m = wronskian_grid(mid, p, n_max=n_max)
        for j in range(len(mid)):
            if alive[j] and rel_m[j]:
                roots.append((float(mid[j]), float(abs(res[j]))))

    points = [SpectrumPoint(energy=e, kind="regular", residual=r,
                            provenance="wronskian")
              for (e, r) in sorted(roots) if outside_windows(e)]
    return points
