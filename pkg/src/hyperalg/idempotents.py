"""Primitive torus idempotents and restricted weight sets.

The idempotent attached to a weight and a level is the product of Cartan
binomial coefficients that evaluates to the indicator function of the
weight's coset modulo p^level; the weights with all coroot pairings in
{0, ..., p^m - 1} form a transversal of those cosets.
"""

from __future__ import annotations

from itertools import product
from typing import Dict, List, Tuple

import numpy as np

from .rootdata import RootSystem, Weight
from .straighten import Engine, HPart, InsufficientLevelError, PBWElement, lucas_binom


def enumerate_Xm(rs: RootSystem, p: int, m: int) -> List[Weight]:
    """Weights with every simple-coroot pairing in {0, ..., p^m - 1}."""
    if m < 0:
        raise ValueError("level must be nonnegative")
    return [tuple(w) for w in product(range(p**m), repeat=rs.rank)]


def mu_hpart(engine: Engine, lam: Weight, n: int, level: int) -> HPart:
    """Torus table of the idempotent: built from its defining binomial product."""
    if n > level:
        raise InsufficientLevelError(
            f"idempotent at level {n} needs torus level at least {n}"
        )
    out = engine.hpart_one(level)
    size = engine.p**level
    deg = engine.p**n - 1
    lut = np.array(
        [lucas_binom(x, deg, engine.p) for x in range(size)], dtype=np.int16
    )
    for i in range(engine.rs.rank):
        shape = [1] * engine.rs.rank
        shape[i] = size
        idx = (np.arange(size) - lam[i] - 1) % size
        axis = np.broadcast_to(
            lut[idx].reshape(shape), (size,) * engine.rs.rank
        ).copy()
        out = out.mul(HPart(axis, engine.p, level))
    return out


def mu_lambda(engine: Engine, lam: Weight, n: int, level: int) -> PBWElement:
    """Idempotent as an element: indicator of the coset of lam modulo p^n."""
    return engine.hpart_element(mu_hpart(engine, lam, n, level), level)


def mu_binomial_coeffs(
    engine: Engine, lam: Weight, n: int, level: int
) -> Dict[Tuple[int, ...], int]:
    """Binomial-basis expansion of the idempotent (independent test route)."""
    return engine.hpart_to_binomial_basis(mu_hpart(engine, lam, n, level))
