"""Production F_p engine: PBW elements and normal-form multiplication.

An element is stored in triangular normal form: a linear combination of
terms f^(a) * H * e^(b), where the lowering and raising blocks are
divided-power monomials in convex order and H is a torus part.  Torus
parts are kept as value tables on weight space modulo p^N (the level N
must satisfy p^N > every Cartan binomial degree that can arise, which the
engine checks).  Multiplication rewrites words of divided-power factors
and torus parts with the rank-2 commutation patterns, the same-root
merge rule, the raising/lowering collision rule, and torus-part shifts.
"""

from __future__ import annotations

import numpy as np

from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .chevalley import StructureConstants
from .rootdata import Root, RootSystem, Weight

_STEP_LIMIT = 50_000_000


class InsufficientLevelError(ValueError):
    """The torus level is too small for a binomial degree that arose."""


def lucas_binom(m: int, n: int, p: int) -> int:
    """Binomial coefficient modulo p by digitwise products."""
    if n < 0 or m < 0:
        raise ValueError("lucas_binom expects nonnegative arguments")
    result = 1
    while n:
        md, m = m % p, m // p
        nd, n = n % p, n // p
        if nd > md:
            return 0
        num = 1
        den = 1
        for t in range(nd):
            num = num * (md - t) % p
            den = den * (t + 1) % p
        result = result * num * pow(den, p - 2, p) % p
    return result


class HPart:
    """Torus part as an F_p value table on weights modulo p^level."""

    __slots__ = ("arr", "p", "level")

    def __init__(self, arr: np.ndarray, p: int, level: int):
        self.arr = arr
        self.p = p
        self.level = level

    @classmethod
    def ones(cls, p: int, level: int, rank: int) -> "HPart":
        size = p**level
        return cls(np.ones((size,) * rank, dtype=np.int16), p, level)

    @classmethod
    def zeros(cls, p: int, level: int, rank: int) -> "HPart":
        size = p**level
        return cls(np.zeros((size,) * rank, dtype=np.int16), p, level)

    def copy(self) -> "HPart":
        return HPart(self.arr.copy(), self.p, self.level)

    def is_zero(self) -> bool:
        return not self.arr.any()

    def equals(self, other: "HPart") -> bool:
        return (
            self.p == other.p
            and self.level == other.level
            and np.array_equal(self.arr, other.arr)
        )

    def add(self, other: "HPart") -> "HPart":
        self._compat(other)
        return HPart((self.arr + other.arr) % self.p, self.p, self.level)

    def mul(self, other: "HPart") -> "HPart":
        self._compat(other)
        return HPart((self.arr * other.arr) % self.p, self.p, self.level)

    def scale(self, scalar: int) -> "HPart":
        return HPart((self.arr * (scalar % self.p)) % self.p, self.p, self.level)

    def shift(self, w: Weight) -> "HPart":
        """Table for lam -> value at lam + w."""
        size = self.arr.shape[0]
        arr = self.arr
        for axis, wi in enumerate(w):
            if wi % size:
                arr = np.roll(arr, -(wi % size), axis=axis)
        return HPart(arr, self.p, self.level)

    def is_periodic(self, r: int) -> bool:
        """True when the table depends only on the weight modulo p^r."""
        if r >= self.level:
            return True
        period = self.p**r
        for axis in range(self.arr.ndim):
            if not np.array_equal(self.arr, np.roll(self.arr, period, axis=axis)):
                return False
        return True

    def value(self, lam: Sequence[int]) -> int:
        size = self.arr.shape[0] if self.arr.ndim else 1
        idx = tuple(int(x) % size for x in lam)
        return int(self.arr[idx])

    def _compat(self, other: "HPart") -> None:
        if self.p != other.p or self.level != other.level:
            raise ValueError("torus-part prime/level mismatch")


# Word items used during straightening: ("g", root, exponent) for a
# divided power, ("H", HPart) for a torus part.
Item = Tuple


class PBWElement:
    """F_p-linear combination of triangular divided-power monomials."""

    __slots__ = ("engine", "level", "terms")

    def __init__(self, engine: "Engine", level: int, terms: Optional[Dict] = None):
        self.engine = engine
        self.level = level
        self.terms: Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], HPart] = terms or {}

    # -- ring operations ------------------------------------------------

    def add(self, other: "PBWElement") -> "PBWElement":
        self._compat(other)
        terms = dict(self.terms)
        for key, h in other.terms.items():
            if key in terms:
                merged = terms[key].add(h)
                if merged.is_zero():
                    del terms[key]
                else:
                    terms[key] = merged
            else:
                terms[key] = h
        return PBWElement(self.engine, self.level, terms)

    def sub(self, other: "PBWElement") -> "PBWElement":
        return self.add(other.scale(-1))

    def scale(self, scalar: int) -> "PBWElement":
        scalar %= self.engine.p
        if scalar == 0:
            return PBWElement(self.engine, self.level, {})
        return PBWElement(
            self.engine, self.level, {k: h.scale(scalar) for k, h in self.terms.items()}
        )

    def mul(self, other: "PBWElement") -> "PBWElement":
        return self.engine.multiply(self, other)

    def is_zero(self) -> bool:
        return not self.terms

    def equals(self, other: "PBWElement") -> bool:
        return self.sub(other).is_zero()

    # -- structure ------------------------------------------------------

    def weight_of_term(self, key) -> Weight:
        a, b = key
        eng = self.engine
        out = [0] * eng.rs.rank
        for k, n in enumerate(b):
            if n:
                for i, w in enumerate(eng.convex_weights[k]):
                    out[i] += n * w
        for k, n in enumerate(a):
            if n:
                for i, w in enumerate(eng.convex_weights[k]):
                    out[i] -= n * w
        return tuple(out)

    def in_truncation(self, r: int) -> bool:
        bound = self.engine.p**r
        for (a, b), h in self.terms.items():
            if any(x >= bound for x in a) or any(x >= bound for x in b):
                return False
            if not h.is_periodic(r):
                return False
        return True

    def support_e(self) -> List[Tuple[int, ...]]:
        return sorted({b for (_, b) in self.terms})

    def support_f(self) -> List[Tuple[int, ...]]:
        return sorted({a for (a, _) in self.terms})

    def _compat(self, other: "PBWElement") -> None:
        if (
            self.engine.rs is not other.engine.rs
            or self.engine.p != other.engine.p
            or self.level != other.level
        ):
            raise ValueError("element engine/level mismatch")


class Engine:
    """Multiplication engine bound to one root system and prime."""

    def __init__(self, rs: RootSystem, p: int, sc: Optional[StructureConstants] = None):
        self.rs = rs
        self.p = p
        self.sc = sc if sc is not None else StructureConstants(rs)
        self.nu = rs.num_positive
        self.convex_weights = [rs.weight_coords(b) for b in rs.convex_roots]
        self._root_weight = {g: rs.weight_coords(g) for g in rs.roots}
        self._reorder_cache: Dict = {}
        self._base_cache: Dict = {}
        self._signed_cache: Dict = {}
        self._mid_cache: Dict = {}
        self._binom_lut: Dict = {}

    # -- constructors ---------------------------------------------------

    def zero(self, level: int) -> PBWElement:
        return PBWElement(self, level, {})

    def hpart_one(self, level: int) -> HPart:
        return HPart.ones(self.p, level, self.rs.rank)

    def one(self, level: int) -> PBWElement:
        zero_nu = (0,) * self.nu
        return PBWElement(self, level, {(zero_nu, zero_nu): self.hpart_one(level)})

    def monomial(
        self,
        a: Sequence[int],
        b: Sequence[int],
        h: Optional[HPart],
        level: int,
    ) -> PBWElement:
        if h is None:
            h = self.hpart_one(level)
        if h.is_zero():
            return self.zero(level)
        return PBWElement(self, level, {(tuple(a), tuple(b)): h})

    def divided_power(self, gamma: Root, n: int, level: int) -> PBWElement:
        if n < 0:
            return self.zero(level)
        a = [0] * self.nu
        b = [0] * self.nu
        if n > 0:
            if self.rs._is_positive(gamma):
                b[self.rs.convex_index(gamma)] = n
            else:
                a[self.rs.convex_index(tuple(-x for x in gamma))] = n
        return self.monomial(a, b, None, level)

    def hpart_element(self, h: HPart, level: int) -> PBWElement:
        zero_nu = (0,) * self.nu
        if h.is_zero():
            return self.zero(level)
        return PBWElement(self, level, {(zero_nu, zero_nu): h})

    # -- torus-part builders --------------------------------------------

    def _lut(self, n: int, level: int) -> np.ndarray:
        key = (n, level)
        cached = self._binom_lut.get(key)
        if cached is None:
            size = self.p**level
            cached = np.array(
                [lucas_binom(x, n, self.p) for x in range(size)], dtype=np.int16
            )
            self._binom_lut[key] = cached
        return cached

    def binom_h_simple(self, i: int, n: int, level: int) -> HPart:
        """Table of the binomial coefficient of the i-th Cartan generator."""
        if n >= self.p**level:
            raise InsufficientLevelError(
                f"binomial degree {n} needs level above {level}"
            )
        size = self.p**level
        lut = self._lut(n, level)
        shape = [1] * self.rs.rank
        shape[i] = size
        arr = np.broadcast_to(lut.reshape(shape), (size,) * self.rs.rank).copy()
        return HPart(arr, self.p, level)

    def binom_h_root(self, gamma: Root, c: int, n: int, level: int) -> HPart:
        """Table of binom(h_gamma + c, n) via the coroot expansion of gamma."""
        if n >= self.p**level:
            raise InsufficientLevelError(
                f"binomial degree {n} needs level above {level}"
            )
        size = self.p**level
        coeffs = self.sc.coroot_coeffs(gamma)
        grids = np.indices((size,) * self.rs.rank)
        idx = np.full((size,) * self.rs.rank, c % size, dtype=np.int64)
        for i, d in enumerate(coeffs):
            if d:
                idx = idx + d * grids[i]
        idx %= size
        arr = self._lut(n, level)[idx].astype(np.int16)
        return HPart(arr, self.p, level)

    def hpart_from_binomial_basis(
        self, coeffs: Dict[Tuple[int, ...], int], level: int
    ) -> HPart:
        out = HPart.zeros(self.p, level, self.rs.rank)
        for degs, c in coeffs.items():
            if c % self.p == 0:
                continue
            h = self.hpart_one(level).scale(c)
            for i, n in enumerate(degs):
                if n:
                    h = h.mul(self.binom_h_simple(i, n, level))
            out = out.add(h)
        return out

    def hpart_to_binomial_basis(self, h: HPart) -> Dict[Tuple[int, ...], int]:
        """Coefficients over products of per-generator Cartan binomials."""
        size = self.p**h.level
        inv = self._binomial_matrix_inverse(h.level)
        arr = h.arr.astype(np.int64)
        for axis in range(self.rs.rank):
            arr = np.tensordot(inv, arr, axes=([1], [axis]))
            arr = np.moveaxis(arr, 0, axis) % self.p
        out = {}
        for degs in np.ndindex(*(size,) * self.rs.rank):
            v = int(arr[degs])
            if v:
                out[degs] = v
        return out

    def _binomial_matrix_inverse(self, level: int) -> np.ndarray:
        key = ("binv", level)
        cached = self._binom_lut.get(key)
        if cached is None:
            size = self.p**level
            mat = np.array(
                [[lucas_binom(m, n, self.p) for n in range(size)] for m in range(size)],
                dtype=np.int64,
            )
            # Unipotent lower-triangular matrix: invert by forward substitution.
            inv = np.eye(size, dtype=np.int64)
            for i in range(size):
                for j in range(i):
                    f = mat[i, j]
                    if f:
                        mat[i] = (mat[i] - f * mat[j]) % self.p
                        inv[i] = (inv[i] - f * inv[j]) % self.p
            cached = inv
            self._binom_lut[key] = cached
        return cached

    # -- rank-2 reorder patterns ----------------------------------------

    _PATTERNS = {
        # Keyed by subsystem root count, then by the base coordinates of
        # the left and right factor.  Each output entry is (base coords,
        # symbolic weight factor); the factor symbols are resolved per
        # base from the bracket constants.
        6: {
            ((1, 0), (0, 1)): [((0, 1), "1"), ((1, 1), "c1"), ((1, 0), "1")],
            ((0, 1), (1, 0)): [((1, 0), "1"), ((1, 1), "-c1"), ((0, 1), "1")],
        },
        8: {
            ((1, 0), (0, 1)): [
                ((0, 1), "1"),
                ((1, 1), "c1"),
                ((2, 1), "c1*c2"),
                ((1, 0), "1"),
            ],
            ((0, 1), (1, 0)): [
                ((1, 0), "1"),
                ((2, 1), "c1*c2"),
                ((1, 1), "-c1"),
                ((0, 1), "1"),
            ],
            ((1, 0), (1, 1)): [((1, 1), "1"), ((2, 1), "2*c2"), ((1, 0), "1")],
            ((1, 1), (1, 0)): [((1, 0), "1"), ((2, 1), "-2*c2"), ((1, 1), "1")],
        },
        12: {
            ((1, 0), (0, 1)): [
                ((0, 1), "1"),
                ((1, 1), "c1"),
                ((3, 2), "c2*c4"),
                ((2, 1), "c1*c2"),
                ((3, 1), "c1*c2*c3"),
                ((1, 0), "1"),
            ],
            ((0, 1), (1, 0)): [
                ((1, 0), "1"),
                ((3, 1), "-c1*c2*c3"),
                ((2, 1), "c1*c2"),
                ((3, 2), "c2*c4"),
                ((1, 1), "-c1"),
                ((0, 1), "1"),
            ],
            ((1, 0), (1, 1)): [
                ((1, 1), "1"),
                ((3, 2), "3*c2*c4"),
                ((2, 1), "2*c2"),
                ((3, 1), "3*c2*c3"),
                ((1, 0), "1"),
            ],
            ((1, 1), (1, 0)): [
                ((1, 0), "1"),
                ((3, 1), "3*c2*c3"),
                ((2, 1), "-2*c2"),
                ((3, 2), "3*c2*c4"),
                ((1, 1), "1"),
            ],
            ((1, 0), (2, 1)): [((2, 1), "1"), ((3, 1), "3*c3"), ((1, 0), "1")],
            ((2, 1), (1, 0)): [((1, 0), "1"), ((3, 1), "-3*c3"), ((2, 1), "1")],
            ((2, 1), (1, 1)): [((1, 1), "1"), ((3, 2), "3*c4"), ((2, 1), "1")],
            ((1, 1), (2, 1)): [((2, 1), "1"), ((3, 2), "-3*c4"), ((1, 1), "1")],
            ((3, 1), (0, 1)): [((0, 1), "1"), ((3, 2), "-c1*c3*c4"), ((3, 1), "1")],
            ((0, 1), (3, 1)): [((3, 1), "1"), ((3, 2), "c1*c3*c4"), ((0, 1), "1")],
        },
    }

    def _find_base(self, gamma: Root, delta: Root):
        """Base (s, t) of the rank-2 subsystem with gamma, delta nonnegative."""
        key = (gamma, delta)
        cached = self._base_cache.get(key)
        if cached is not None:
            return cached
        rs = self.rs
        sub = rs.subsystem_roots(gamma, delta)
        count = len(sub)
        half = count // 2
        same_sign = rs._is_positive(gamma) == rs._is_positive(delta)

        def coords(rho, s, t):
            det = s[0] * t[1] - s[1] * t[0]
            x = rho[0] * t[1] - rho[1] * t[0]
            y = s[0] * rho[1] - s[1] * rho[0]
            if x % det or y % det:
                return None
            return (x // det, y // det)

        best = None
        for s in sorted(sub):
            for t in sorted(sub):
                if s == t or s == tuple(-v for v in t):
                    continue
                if rs.ip(s, s) > rs.ip(t, t):
                    continue
                if same_sign and not (
                    rs._is_positive(s) == rs._is_positive(gamma)
                    and rs._is_positive(t) == rs._is_positive(gamma)
                ):
                    continue
                all_coords = {}
                ok = True
                nonneg = 0
                for rho in sub:
                    cc = coords(rho, s, t)
                    if cc is None:
                        ok = False
                        break
                    all_coords[rho] = cc
                    if cc[0] >= 0 and cc[1] >= 0:
                        nonneg += 1
                if not ok or nonneg != half:
                    continue
                cg = all_coords[gamma]
                cd = all_coords[delta]
                if min(cg) < 0 or min(cd) < 0:
                    continue
                cand = (s, t, cg, cd, count)
                if best is None or (s, t) < (best[0], best[1]):
                    best = cand
        if best is None:
            raise RuntimeError(f"no rank-2 base found for {gamma}, {delta}")
        self._base_cache[key] = best
        return best

    def _base_constants(self, s: Root, t: Root, count: int) -> Dict[str, int]:
        sc = self.sc
        add = lambda x, y: tuple(u + v for u, v in zip(x, y))
        consts = {"1": 1}
        a_pb = add(s, t)
        consts["c1"] = sc.bracket_const(s, t)
        if count >= 8:
            b_2ab = add(s, a_pb)
            consts["c2"] = sc.bracket_const(s, a_pb) // 2
        if count == 12:
            consts["c3"] = sc.bracket_const(s, b_2ab) // 3
            consts["c4"] = sc.bracket_const(b_2ab, a_pb) // 3
        return consts

    def _resolve_factor(self, expr: str, consts: Dict[str, int]) -> int:
        val = 1
        neg = False
        for tok in expr.split("*"):
            tok = tok.strip()
            if tok.startswith("-"):
                neg = not neg
                tok = tok[1:]
            if tok.isdigit():
                val *= int(tok)
            else:
                val *= consts[tok]
        return -val if neg else val

    def reorder_pair(
        self, gamma: Root, a: int, delta: Root, b: int
    ) -> List[Tuple[int, Tuple[Tuple[Root, int], ...]]]:
        """Rewrite e_gamma^(a) e_delta^(b) as ordered rank-2 monomials.

        Requires gamma + delta to be a root and delta distinct from both
        gamma and its negative.  Returns (scalar mod p, fragment) pairs,
        fragments being tuples of (root, exponent).
        """
        key = (gamma, a, delta, b)
        cached = self._reorder_cache.get(key)
        if cached is not None:
            return cached
        s, t, cg, cd, count = self._find_base(gamma, delta)
        pattern = self._PATTERNS[count][(cg, cd)]
        consts = self._base_constants(s, t, count)
        factors = [self._resolve_factor(expr, consts) for _, expr in pattern]
        roots = [
            tuple(x * s[i] + y * t[i] for i in range(self.rs.rank))
            for (x, y), _ in pattern
        ]
        base_coords = [bc for bc, _ in pattern]
        target = (
            a * cg[0] + b * cd[0],
            a * cg[1] + b * cd[1],
        )
        out: List[Tuple[int, Tuple[Tuple[Root, int], ...]]] = []
        mids = base_coords[1:-1]
        first = base_coords[0]
        last = base_coords[-1]
        det = first[0] * last[1] - first[1] * last[0]

        def rec(pos: int, rem: Tuple[int, int], chosen: List[int]):
            if pos == len(mids):
                # Solve t_first * first + t_last * last = rem.
                x_num = rem[0] * last[1] - rem[1] * last[0]
                y_num = first[0] * rem[1] - first[1] * rem[0]
                if x_num % det or y_num % det:
                    return
                t_first, t_last = x_num // det, y_num // det
                if t_first < 0 or t_last < 0:
                    return
                exps = [t_first] + chosen + [t_last]
                coeff = 1
                for e, f in zip(exps, factors):
                    if e:
                        coeff = coeff * pow(f % self.p, e, self.p) % self.p
                if coeff == 0:
                    return
                frag = tuple(
                    (roots[i], exps[i]) for i in range(len(exps)) if exps[i]
                )
                out.append((coeff, frag))
                return
            bc = mids[pos]
            bound = min(
                rem[i] // bc[i] for i in range(2) if bc[i] > 0
            )
            for e in range(bound + 1):
                rec(pos + 1, (rem[0] - e * bc[0], rem[1] - e * bc[1]), chosen + [e])

        rec(0, target, [])
        self._reorder_cache[key] = out
        return out

    # -- signed (pure raising or pure lowering) word straightening -------

    def straighten_signed(
        self, word: Tuple[Tuple[int, int], ...], sign: int
    ) -> Dict[Tuple[int, ...], int]:
        """Normal form of a product of divided powers of one sign.

        word is a tuple of (convex index, exponent); sign +1 means raising
        block, -1 lowering.  Returns exponent-vector -> scalar mod p.
        """
        key = (word, sign)
        cached = self._signed_cache.get(key)
        if cached is not None:
            return cached
        rs = self.rs
        out: Dict[Tuple[int, ...], int] = {}
        stack: List[Tuple[int, Tuple[Tuple[int, int], ...]]] = [(1, word)]
        steps = 0
        while stack:
            steps += 1
            if steps > _STEP_LIMIT:
                raise RuntimeError("straightening step limit exceeded")
            coeff, w = stack.pop()
            i = 0
            clean = True
            while i < len(w) - 1:
                (i1, e1), (i2, e2) = w[i], w[i + 1]
                if i1 == i2:
                    c = lucas_binom(e1 + e2, e2, self.p)
                    clean = False
                    if c:
                        neww = w[:i] + ((i1, e1 + e2),) + w[i + 2 :]
                        stack.append((coeff * c % self.p, neww))
                    break
                if i1 > i2:
                    clean = False
                    g1 = rs.convex_roots[i1]
                    g2 = rs.convex_roots[i2]
                    if sign < 0:
                        g1 = tuple(-x for x in g1)
                        g2 = tuple(-x for x in g2)
                    total = tuple(u + v for u, v in zip(g1, g2))
                    if total not in rs._root_set:
                        neww = w[:i] + ((i2, e2), (i1, e1)) + w[i + 2 :]
                        stack.append((coeff, neww))
                    else:
                        for c, frag in self.reorder_pair(g1, e1, g2, e2):
                            items = tuple(
                                (
                                    rs.convex_index(
                                        rho if sign > 0 else tuple(-x for x in rho)
                                    ),
                                    e,
                                )
                                for rho, e in frag
                            )
                            stack.append((coeff * c % self.p, w[:i] + items + w[i + 2 :]))
                    break
                i += 1
            if clean:
                vec = [0] * self.nu
                for idx, e in w:
                    vec[idx] += e
                keyv = tuple(vec)
                newc = (out.get(keyv, 0) + coeff) % self.p
                if newc:
                    out[keyv] = newc
                else:
                    out.pop(keyv, None)
        self._signed_cache[key] = out
        return out

    def mul_signed(
        self, x: Tuple[int, ...], y: Tuple[int, ...], sign: int
    ) -> Dict[Tuple[int, ...], int]:
        """Product of two normal-ordered one-sign monomials."""
        word = tuple((k, n) for k, n in enumerate(x) if n) + tuple(
            (k, n) for k, n in enumerate(y) if n
        )
        return self.straighten_signed(word, sign)

    # -- the mixed-word straightener ------------------------------------

    def _item_class(self, item: Item) -> Tuple[int, int]:
        if item[0] == "H":
            return (1, 0)
        root = item[1]
        if self.rs._is_positive(root):
            return (2, self.rs.convex_index(root))
        return (0, self.rs.convex_index(tuple(-x for x in root)))

    def straighten_items(
        self,
        items: Sequence[Item],
        level: int,
        out_terms: Dict,
        coeff: int = 1,
    ) -> None:
        """Straighten a word of divided powers and torus parts into out_terms."""
        rs = self.rs
        p = self.p
        stack: List[Tuple[int, List[Item]]] = [(coeff % p, list(items))]
        steps = 0
        while stack:
            steps += 1
            if steps > _STEP_LIMIT:
                raise RuntimeError("straightening step limit exceeded")
            coeff, w = stack.pop()
            if coeff == 0:
                continue
            i = 0
            clean = True
            while i < len(w) - 1:
                u, v = w[i], w[i + 1]
                cu, cv = self._item_class(u), self._item_class(v)
                if u[0] == "H" and v[0] == "H":
                    merged = u[1].mul(v[1])
                    clean = False
                    if not merged.is_zero():
                        stack.append((coeff, w[:i] + [("H", merged)] + w[i + 2 :]))
                    break
                if u[0] == "H" and v[0] == "g" and cv[0] == 0:
                    # Torus part passes a lowering factor to its right.
                    root, m = v[1], v[2]
                    wshift = tuple(m * x for x in self._root_weight[root])
                    clean = False
                    stack.append(
                        (coeff, w[:i] + [v, ("H", u[1].shift(wshift))] + w[i + 2 :])
                    )
                    break
                if u[0] == "g" and cu[0] == 2 and v[0] == "H":
                    # Raising factor passes a torus part to its right.
                    root, m = u[1], u[2]
                    wshift = tuple(-m * x for x in self._root_weight[root])
                    clean = False
                    stack.append(
                        (coeff, w[:i] + [("H", v[1].shift(wshift)), u] + w[i + 2 :])
                    )
                    break
                if u[0] == "g" and v[0] == "g":
                    g1, e1 = u[1], u[2]
                    g2, e2 = v[1], v[2]
                    if g1 == g2:
                        c = lucas_binom(e1 + e2, e2, p)
                        clean = False
                        if c:
                            stack.append(
                                (
                                    coeff * c % p,
                                    w[:i] + [("g", g1, e1 + e2)] + w[i + 2 :],
                                )
                            )
                        break
                    if cu > cv:
                        clean = False
                        neg_g1 = tuple(-x for x in g1)
                        if g2 == neg_g1:
                            # Raising-lowering collision on one root.
                            frag_base = w[:i]
                            tail = w[i + 2 :]
                            for k in range(min(e1, e2) + 1):
                                h = (
                                    None
                                    if k == 0
                                    else self.binom_h_root(
                                        g1, -e1 - e2 + 2 * k, k, level
                                    )
                                )
                                mid: List[Item] = []
                                if e2 - k:
                                    mid.append(("g", g2, e2 - k))
                                if k:
                                    mid.append(("H", h))
                                if e1 - k:
                                    mid.append(("g", g1, e1 - k))
                                stack.append((coeff, frag_base + mid + tail))
                            break
                        total = tuple(x + y for x, y in zip(g1, g2))
                        if total not in rs._root_set:
                            stack.append((coeff, w[:i] + [v, u] + w[i + 2 :]))
                        else:
                            for c, frag in self.reorder_pair(g1, e1, g2, e2):
                                mid = [("g", rho, e) for rho, e in frag]
                                stack.append(
                                    (coeff * c % p, w[:i] + mid + w[i + 2 :])
                                )
                        break
                i += 1
            if clean:
                a = [0] * self.nu
                b = [0] * self.nu
                h: Optional[HPart] = None
                for item in w:
                    if item[0] == "H":
                        h = item[1] if h is None else h.mul(item[1])
                    else:
                        root, e = item[1], item[2]
                        if rs._is_positive(root):
                            b[rs.convex_index(root)] += e
                        else:
                            a[rs.convex_index(tuple(-x for x in root))] += e
                if h is None:
                    h = self.hpart_one(level)
                h = h.scale(coeff)
                if h.is_zero():
                    continue
                key = (tuple(a), tuple(b))
                if key in out_terms:
                    merged = out_terms[key].add(h)
                    if merged.is_zero():
                        del out_terms[key]
                    else:
                        out_terms[key] = merged
                else:
                    out_terms[key] = h

    # -- the cross product of raising and lowering blocks ----------------

    def _middle(
        self, b1: Tuple[int, ...], a2: Tuple[int, ...], level: int
    ) -> List[Tuple[Tuple[int, ...], Tuple[int, ...], HPart]]:
        """Normal form of e^(b1) * f^(a2) as (a, b, torus part) triples."""
        key = (b1, a2, level)
        cached = self._mid_cache.get(key)
        if cached is not None:
            return cached
        items: List[Item] = [
            ("g", self.rs.convex_roots[k], n) for k, n in enumerate(b1) if n
        ]
        items += [
            ("g", tuple(-x for x in self.rs.convex_roots[k]), n)
            for k, n in enumerate(a2)
            if n
        ]
        terms: Dict = {}
        self.straighten_items(items, level, terms)
        result = [(a, b, h) for (a, b), h in terms.items()]
        self._mid_cache[key] = result
        return result

    def multiply(self, x: PBWElement, y: PBWElement) -> PBWElement:
        x._compat(y)
        level = x.level
        out: Dict = {}
        p = self.p
        for (a1, b1), h1 in x.terms.items():
            for (a2, b2), h2 in y.terms.items():
                for c, d, hm in self._middle(b1, a2, level):
                    wc = [0] * self.rs.rank
                    for k, n in enumerate(c):
                        if n:
                            for i, wv in enumerate(self.convex_weights[k]):
                                wc[i] -= n * wv
                    wd = [0] * self.rs.rank
                    for k, n in enumerate(d):
                        if n:
                            for i, wv in enumerate(self.convex_weights[k]):
                                wd[i] -= n * wv
                    h_total = h1.shift(tuple(wc)).mul(hm).mul(h2.shift(tuple(wd)))
                    if h_total.is_zero():
                        continue
                    fprod = self.mul_signed(a1, c, -1)
                    eprod = self.mul_signed(d, b2, +1)
                    for g, sf in fprod.items():
                        for e, se in eprod.items():
                            scalar = sf * se % p
                            if scalar == 0:
                                continue
                            h_term = h_total.scale(scalar)
                            key = (g, e)
                            if key in out:
                                merged = out[key].add(h_term)
                                if merged.is_zero():
                                    del out[key]
                                else:
                                    out[key] = merged
                            else:
                                out[key] = h_term
        return PBWElement(self, level, out)
