"""Return sets as arithmetic progressions plus a finite exceptional set."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

CERTIFICATES = ("rigorous", "heuristic", "brute-force-only")


@dataclass
class ReturnSetDecomposition:
    """``{n : n >= start, n = start mod modulus}`` for each progression, plus ``exceptional``.

    Build through :func:`canonical` so progressions are pairwise disjoint,
    none contains another, and no exceptional index is already covered.
    """

    progressions: list  # (start, modulus)
    exceptional: list
    certificate: str = "rigorous"
    prime: int | None = None
    parameters: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def __contains__(self, n: int) -> bool:
        if n in self.exceptional:
            return True
        return any(n >= s and (n - s) % m == 0 for s, m in self.progressions)

    def members_below(self, W: int) -> list:
        out = set(n for n in self.exceptional if n < W)
        for s, m in self.progressions:
            out.update(range(s, W, m))
        return sorted(out)

    def indicator(self, W: int) -> list:
        bits = [False] * W
        for n in self.members_below(W):
            bits[n] = True
        return bits

    def is_finite(self) -> bool:
        return not self.progressions

    def same_set(self, other: ReturnSetDecomposition) -> bool:
        a, b = canonical(self.progressions, self.exceptional), canonical(other.progressions, other.exceptional)
        return a.progressions == b.progressions and a.exceptional == b.exceptional

    def to_json(self) -> dict:
        return {
            "progressions": [{"start": s, "modulus": m} for s, m in self.progressions],
            "exceptional": list(self.exceptional),
            "certificate": self.certificate,
            "prime": self.prime,
            "parameters": dict(sorted(self.parameters.items())),
            "diagnostics": self.diagnostics,
        }

    @classmethod
    def from_json(cls, obj: dict) -> ReturnSetDecomposition:
        return cls(
            [(int(q["start"]), int(q["modulus"])) for q in obj["progressions"]],
            [int(n) for n in obj["exceptional"]],
            obj.get("certificate", "rigorous"),
            obj.get("prime"),
            dict(obj.get("parameters", {})),
            dict(obj.get("diagnostics", {})),
        )


def canonical(progressions, exceptional, **meta) -> ReturnSetDecomposition:
    """Canonical form of a union of progressions and finitely many extra indices.

    The union is eventually periodic with period ``M = lcm(moduli)``; the
    minimal period ``M'`` of that tail is found, each residue class mod ``M'``
    in the tail becomes one progression started as early as possible, and
    the remaining members are listed as exceptional.
    """
    progressions = sorted(set((int(s), int(m)) for s, m in progressions))
    exceptional = set(int(n) for n in exceptional)
    for s, m in progressions:
        if m < 1 or s < 0:
            raise ValueError(f"bad progression ({s}, {m})")
    if not progressions:
        return ReturnSetDecomposition([], sorted(exceptional), **meta)
    M = 1
    for _, m in progressions:
        M = math.lcm(M, m)
    S = max(max(s for s, _ in progressions), max(exceptional, default=-1) + 1)

    def member(n):
        return n in exceptional or any(n >= s and (n - s) % m == 0 for s, m in progressions)

    def tail(n):
        # membership for n >= S is periodic
        return any(n >= s and (n - s) % m == 0 for s, m in progressions)

    pattern = [tail(S + r) for r in range(M)]
    Mp = M
    for d in sorted(k for k in range(1, M + 1) if M % k == 0):
        if all(pattern[r] == pattern[r % d] for r in range(M)):
            Mp = d
            break
    out = []
    for r in range(Mp):
        if not pattern[r]:
            continue
        n = S + r
        while n - Mp >= 0 and member(n - Mp):
            n -= Mp
        out.append((n, Mp))
    out.sort()

    def in_out(n):
        return any(n >= s and (n - s) % m == 0 for s, m in out)

    extra = set(n for n in range(0, S) if member(n) and not in_out(n))
    extra |= set(n for n in exceptional if not in_out(n))
    return ReturnSetDecomposition(out, sorted(extra), **meta)
