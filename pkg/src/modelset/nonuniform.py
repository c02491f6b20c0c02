"""Finite truncation of the compact-by-abelian non-uniform example.

For a finite set S of odd primes, ``V = ⊕ F_p`` and ``Γ0 = ∏ F_p ⋊ F_p^x``
with elements ``γ = (b, a)`` (per-prime residues, ``a_p != 0``). Γ0 acts on
``V ⊕ V`` by the twisted diagonal action

    (u, v) -> (b + a u, b + 1 - a + a v)        (per prime),

i.e. by γ on the first factor and by ``τ(γ) = (b + 1 - a, a)`` on the second.
The orbits are the sets ``S_I`` of pairs with ``v_p - u_p = 1`` exactly for
``p in I``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import BudgetExceeded, ConfigError

DEFAULT_PAIR_BUDGET = 10**6


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % k for k in range(2, math.isqrt(p) + 1))


@dataclass(frozen=True)
class FiniteScheme:
    primes: tuple

    def __post_init__(self):
        primes = tuple(int(p) for p in self.primes)
        if len(set(primes)) != len(primes):
            raise ConfigError(f"primes must be distinct: {list(primes)}")
        for p in primes:
            if not _is_prime(p):
                raise ConfigError(f"{p} is not a prime")
        object.__setattr__(self, "primes", tuple(sorted(primes)))

    def group(self):
        """All ``(b, a)`` in Γ0, as tuples of per-prime residues."""
        per_prime = [[(b, a) for b in range(p) for a in range(1, p)] for p in self.primes]
        for combo in itertools.product(*per_prime):
            yield tuple(c[0] for c in combo), tuple(c[1] for c in combo)

    def group_order(self) -> int:
        return math.prod(p * (p - 1) for p in self.primes)

    def vectors(self):
        return itertools.product(*[range(p) for p in self.primes])

    def mul(self, g, h):
        """``(b, a)(b', a') = (b + a b', a a')``."""
        (b, a), (b2, a2) = g, h
        return (
            tuple((x + y * z) % p for x, y, z, p in zip(b, a, b2, self.primes)),
            tuple((y * z) % p for y, z, p in zip(a, a2, self.primes)),
        )

    def tau(self, g):
        b, a = g
        return tuple((x + 1 - y) % p for x, y, p in zip(b, a, self.primes)), a

    def act(self, g, pair):
        (b, a), (u, v) = g, pair
        u2 = tuple((x + y * z) % p for x, y, z, p in zip(b, a, u, self.primes))
        v2 = tuple((x + 1 - y + y * z) % p for x, y, z, p in zip(b, a, v, self.primes))
        return u2, v2

    def label(self, pair) -> frozenset:
        """The set I of primes with ``v_p - u_p = 1``."""
        u, v = pair
        return frozenset(p for x, y, p in zip(u, v, self.primes) if (y - x) % p == 1)

    def predicted_size(self, I) -> int:
        return math.prod(p if p in I else p * (p - 1) for p in self.primes)


def _check_budget(scheme: FiniteScheme, budget: int):
    n = math.prod(p * p for p in scheme.primes)
    if n > budget:
        raise BudgetExceeded(f"|V ⊕ V| = {n} exceeds budget {budget}")


def orbit_classify(primes, budget: int = DEFAULT_PAIR_BUDGET) -> dict:
    """Orbits of Γ0 on ``V ⊕ V`` by direct expansion, compared with the sets S_I."""
    scheme = primes if isinstance(primes, FiniteScheme) else FiniteScheme(tuple(primes))
    _check_budget(scheme, budget)
    gens = list(scheme.group())
    pairs = [(u, v) for u in scheme.vectors() for v in scheme.vectors()]
    seen = set()
    orbits = []
    for start in pairs:
        if start in seen:
            continue
        orbit = {scheme.act(g, start) for g in gens}
        seen |= orbit
        labels = {scheme.label(x) for x in orbit}
        I = scheme.label(start)
        predicted = {x for x in pairs if scheme.label(x) == I}
        orbits.append(
            {
                "I": sorted(I),
                "size": len(orbit),
                "predicted_size": scheme.predicted_size(I),
                "matches_S_I": labels == {I} and orbit == predicted,
                "representative": start,
            }
        )
    orbits.sort(key=lambda o: (len(o["I"]), o["I"]))
    return {"primes": list(scheme.primes), "orbits": orbits, "partition": len(seen) == len(pairs)}


def stabilizer_order(primes, pair) -> int:
    """Brute-force ``|{γ : γ.(u, v) = (u, v)}|``."""
    scheme = primes if isinstance(primes, FiniteScheme) else FiniteScheme(tuple(primes))
    pair = (tuple(pair[0]), tuple(pair[1]))
    return sum(1 for g in scheme.group() if scheme.act(g, pair) == pair)


def predicted_stabilizer(primes, I) -> int:
    return math.prod(p - 1 for p in primes if p in I)


def covolume_sum(primes) -> dict:
    """``Σ_{I ⊆ S} ∏_{p in I} 1/(p-1)`` summed directly and as ``∏ (1 + 1/(p-1))``."""
    primes = FiniteScheme(tuple(primes)).primes
    direct = Fraction(0)
    for k in range(len(primes) + 1):
        for I in itertools.combinations(primes, k):
            direct += Fraction(1, math.prod(p - 1 for p in I))
    product = Fraction(1)
    for p in primes:
        product *= 1 + Fraction(1, p - 1)
    return {"direct": direct, "product": product, "equal": direct == product}


def noncocompact_witness(primes, budget: int = DEFAULT_PAIR_BUDGET) -> int:
    """Number of orbits on the truncation; ``2^|S|``, growing without bound in S."""
    return len(orbit_classify(primes, budget)["orbits"])


def tau_is_homomorphism(primes) -> bool:
    """``τ(γ γ') = τ(γ) τ(γ')`` over all pairs of Γ0."""
    scheme = FiniteScheme(tuple(primes))
    G = list(scheme.group())
    return all(scheme.tau(scheme.mul(g, h)) == scheme.mul(scheme.tau(g), scheme.tau(h)) for g in G for h in G)


def thinness_diagnostic(n_primes: int) -> list[dict]:
    """Partial sums of ``1/p`` and covolume products over the first odd primes."""
    primes, p = [], 3
    while len(primes) < n_primes:
        if _is_prime(p):
            primes.append(p)
        p += 2
    out, s = [], Fraction(0)
    for k, q in enumerate(primes, 1):
        s += Fraction(1, q)
        out.append({"primes": primes[:k], "sum_inv_p": float(s), "covolume_sum": str(covolume_sum(primes[:k])["product"])})
    return out


def nonuniform_report(primes, budget: int = DEFAULT_PAIR_BUDGET) -> dict:
    scheme = FiniteScheme(tuple(primes))
    cls = orbit_classify(scheme, budget)
    order = scheme.group_order()
    orbits = []
    for o in cls["orbits"]:
        stab = stabilizer_order(scheme, o["representative"])
        orbits.append(
            {
                "I": o["I"],
                "size": o["size"],
                "stabilizer": stab,
                "predicted_stabilizer": predicted_stabilizer(scheme.primes, o["I"]),
                "orbit_stabilizer": o["size"] * stab == order,
                "matches_S_I": o["matches_S_I"],
            }
        )
    cov = covolume_sum(scheme.primes)
    return {
        "primes": list(scheme.primes),
        "group_order": order,
        "orbits": orbits,
        "orbit_count": len(orbits),
        "partition": cls["partition"],
        "covolume_sum": str(cov["direct"]),
        "covolume_product": str(cov["product"]),
    }
