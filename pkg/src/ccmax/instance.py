"""Cardinality-constrained Max-2-CSP instances: model, format, brute force.

Sign convention (global, used everywhere in this package): a variable
assignment takes values in {-1, +1} with +1 meaning *true* (for
coverage problems: *selected*), and the cardinality field k counts the
variables assigned +1.

Constraints are binary with payloads evaluated as

    XOR(P):            (1 + P * xi * xj) / 2
    OR(P1, P2, P3):    (3 + P1 * xi + P2 * xj + P3 * xi * xj) / 4

Both land in {0, 1} on +-1 inputs.  XOR with P = -1 is a cut edge.  An
OR clause over literals with signs (s_i, s_j) (s = -1 for a negated
literal) has payload (s_i, s_j, -s_i * s_j); under the +1 = true
convention the plain clause "xi or xj" -- the coverage constraint -- is
therefore (1, 1, -1), and (-1, -1, -1) is "not xi or not xj".  The four
admissible payloads are the same four tuples either way.

Instance file grammar (line oriented, '#' starts a comment, 1-based
variable indices):

    ccmax v1
    problem <cut|2lin|2sat|kvc>
    vars <n>
    card <k>
    c <i> <j> <w> <tag>     # tag in {x+, x-} or {oo, no, on, nn}
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import DomainError, FormatError, SizeGuardError

BRUTE_FORCE_MAX_VARS = 28

OR_PATTERNS = ((-1, -1, -1), (1, -1, 1), (-1, 1, 1), (1, 1, -1))

# coverage clause "xi or xj" under +1 = true
VERTEX_COVER_PATTERN = (1, 1, -1)


@dataclass(frozen=True)
class Xor:
    parity: int

    def __post_init__(self):
        if self.parity not in (-1, 1):
            raise DomainError(f"XOR parity must be -1 or +1, got {self.parity!r}")


@dataclass(frozen=True)
class Or:
    pattern: tuple[int, int, int]

    def __post_init__(self):
        if tuple(self.pattern) not in OR_PATTERNS:
            raise DomainError(f"OR pattern must be one of {OR_PATTERNS}, got {self.pattern!r}")


ConstraintKind = Xor | Or

CUT_KIND = Xor(-1)
VERTEX_COVER_KIND = Or(VERTEX_COVER_PATTERN)

_TAG_TO_KIND: dict[str, ConstraintKind] = {
    "x+": Xor(1),
    "x-": Xor(-1),
    "oo": Or((1, 1, -1)),
    "no": Or((-1, 1, 1)),
    "on": Or((1, -1, 1)),
    "nn": Or((-1, -1, -1)),
}
_KIND_TO_TAG = {kind: tag for tag, kind in _TAG_TO_KIND.items()}

_PROBLEM_KINDS = {
    "cut": {Xor(-1)},
    "2lin": {Xor(-1), Xor(1)},
    "kvc": {VERTEX_COVER_KIND},
    "2sat": {Or(p) for p in OR_PATTERNS},
}


def constraint_value(kind: ConstraintKind, xi: int, xj: int) -> float:
    """Value in {0, 1} of one constraint at a +-1 variable pair."""
    if xi not in (-1, 1) or xj not in (-1, 1):
        raise DomainError(f"variables must be -1 or +1, got ({xi!r}, {xj!r})")
    if isinstance(kind, Xor):
        return (1 + kind.parity * xi * xj) / 2
    p1, p2, p3 = kind.pattern
    return (3 + p1 * xi + p2 * xj + p3 * xi * xj) / 4


@dataclass(frozen=True)
class Constraint:
    i: int
    j: int
    weight: float
    kind: ConstraintKind


@dataclass(frozen=True)
class CCInstance:
    """n variables, exactly k of them +1, weighted binary constraints.

    Variable indices are 0-based internally; the file format is 1-based.
    """

    n: int
    k: int
    constraints: tuple[Constraint, ...]
    problem: str = "2lin"

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"need at least one variable, got n={self.n}")
        if not (0 <= self.k <= self.n):
            raise DomainError(f"cardinality k={self.k} outside 0..{self.n}")
        if self.problem not in _PROBLEM_KINDS:
            raise DomainError(f"unknown problem {self.problem!r}")
        total = 0.0
        for c in self.constraints:
            if not (0 <= c.i < self.n and 0 <= c.j < self.n):
                raise DomainError(f"constraint ({c.i}, {c.j}) references missing variable")
            if not (math.isfinite(c.weight) and c.weight >= 0.0):
                raise DomainError(f"weights must be nonnegative, got {c.weight!r}")
            if c.kind not in _PROBLEM_KINDS[self.problem]:
                raise DomainError(
                    f"constraint kind {c.kind!r} not allowed for problem {self.problem!r}")
            total += c.weight
        if self.constraints and total <= 0.0:
            raise DomainError("total constraint weight must be positive")

    @property
    def q(self) -> float:
        return self.k / self.n

    @property
    def balance(self) -> float:
        """Sum of +-1 values of any feasible assignment: 2k - n."""
        return float(2 * self.k - self.n)

    @property
    def total_weight(self) -> float:
        return float(sum(c.weight for c in self.constraints))

    @cached_property
    def _arrays(self) -> tuple[np.ndarray, ...]:
        """(i, j, w, c0, c1, c2, c3) with value = c0 + c1 xi + c2 xj + c3 xi xj."""
        m = len(self.constraints)
        i = np.zeros(m, dtype=np.int64)
        j = np.zeros(m, dtype=np.int64)
        w = np.zeros(m)
        c0 = np.zeros(m)
        c1 = np.zeros(m)
        c2 = np.zeros(m)
        c3 = np.zeros(m)
        for t, c in enumerate(self.constraints):
            i[t], j[t], w[t] = c.i, c.j, c.weight
            if isinstance(c.kind, Xor):
                c0[t], c3[t] = 0.5, 0.5 * c.kind.parity
            else:
                p1, p2, p3 = c.kind.pattern
                c0[t], c1[t], c2[t], c3[t] = 0.75, 0.25 * p1, 0.25 * p2, 0.25 * p3
        return i, j, w, c0, c1, c2, c3


def as_assignment(values: Sequence[int] | np.ndarray, n: int | None = None) -> np.ndarray:
    a = np.asarray(values, dtype=np.int64)
    if a.ndim != 1 or not np.all(np.isin(a, (-1, 1))):
        raise DomainError("assignment must be a flat vector of -1/+1 values")
    if n is not None and a.size != n:
        raise DomainError(f"assignment has {a.size} entries, instance has {n} variables")
    return a


def cardinality(values: Sequence[int] | np.ndarray) -> int:
    """Number of +1 (true) entries."""
    return int(np.sum(np.asarray(values) == 1))


def is_feasible(inst: CCInstance, values: Sequence[int] | np.ndarray) -> bool:
    return cardinality(as_assignment(values, inst.n)) == inst.k


def evaluate(inst: CCInstance, values: Sequence[int] | np.ndarray) -> float:
    """Weighted sum of constraint values; does not check cardinality."""
    a = as_assignment(values, inst.n)
    if not inst.constraints:
        return 0.0
    i, j, w, c0, c1, c2, c3 = inst._arrays
    xi = a[i].astype(float)
    xj = a[j].astype(float)
    return float(np.sum(w * (c0 + c1 * xi + c2 * xj + c3 * xi * xj)))


def evaluate_many(inst: CCInstance, rows: np.ndarray) -> np.ndarray:
    """Objective for a batch of assignments (rows of -1/+1), vectorized."""
    if not inst.constraints:
        return np.zeros(rows.shape[0])
    i, j, w, c0, c1, c2, c3 = inst._arrays
    xi = rows[:, i].astype(float)
    xj = rows[:, j].astype(float)
    return (w * c0).sum() + xi @ (w * c1) + xj @ (w * c2) + (xi * xj) @ (w * c3)


def brute_force_opt(inst: CCInstance, batch: int = 16384) -> tuple[np.ndarray, float]:
    """Exact optimum over all C(n, k) feasible assignments.

    Enumerates k-subsets in batches and evaluates them vectorized.
    Ties resolve to the lexicographically smallest value vector
    (-1 sorts before +1).  Guarded at n <= 28.
    """
    if inst.n > BRUTE_FORCE_MAX_VARS:
        raise SizeGuardError(
            f"brute force refused: n={inst.n} exceeds the guard of {BRUTE_FORCE_MAX_VARS}")
    best_val = -math.inf
    best_row: np.ndarray | None = None
    combos = itertools.combinations(range(inst.n), inst.k)
    while True:
        chunk = list(itertools.islice(combos, batch))
        if not chunk:
            break
        idx = np.array(chunk, dtype=np.int64).reshape(len(chunk), inst.k)
        rows = -np.ones((len(chunk), inst.n), dtype=np.int64)
        if inst.k:
            np.put_along_axis(rows, idx, 1, axis=1)
        vals = evaluate_many(inst, rows)
        top = float(np.max(vals))
        if top > best_val:
            best_val = top
            best_row = None
        if top == best_val:
            for r in np.nonzero(vals == best_val)[0]:
                row = rows[r]
                if best_row is None or tuple(row) < tuple(best_row):
                    best_row = row.copy()
    assert best_row is not None
    return best_row, best_val


def greedy_assignment(inst: CCInstance, passes: int = 40) -> np.ndarray:
    """Deterministic feasible assignment: linear seeding plus 1-swap ascent.

    Not optimal; used to seed the relaxation solver with a decent
    integral point when brute force is out of reach.
    """
    i, j, w, c0, c1, c2, c3 = (
        inst._arrays if inst.constraints else (None,) * 7)
    lin = np.zeros(inst.n)
    if inst.constraints:
        np.add.at(lin, i, w * c1)
        np.add.at(lin, j, w * c2)
    order = np.lexsort((np.arange(inst.n), -lin))
    a = -np.ones(inst.n, dtype=np.int64)
    a[order[: inst.k]] = 1

    if not inst.constraints:
        return a
    for _ in range(passes):
        improved = False
        val = evaluate(inst, a)
        ones = [v for v in range(inst.n) if a[v] == 1]
        zeros = [v for v in range(inst.n) if a[v] == -1]
        for u in ones:
            for v in zeros:
                a[u], a[v] = -1, 1
                cand = evaluate(inst, a)
                if cand > val + 1e-15:
                    val = cand
                    improved = True
                    ones = [t for t in ones if t != u] + [v]
                    zeros = [t for t in zeros if t != v] + [u]
                    break
                a[u], a[v] = 1, -1
            if improved:
                break
        if not improved:
            break
    return a


def parse_instance(text: str) -> CCInstance:
    """Parse the line-oriented instance format (see module docstring)."""
    lines = []
    for raw in text.splitlines():
        stripped = raw.split("#", 1)[0].strip()
        if stripped:
            lines.append(stripped)
    if not lines or lines[0].split() != ["ccmax", "v1"]:
        raise FormatError("missing 'ccmax v1' header")

    header: dict[str, str] = {}
    body_start = 1
    for ln in lines[1:]:
        parts = ln.split()
        if parts[0] == "c":
            break
        if parts[0] not in ("problem", "vars", "card") or len(parts) != 2:
            raise FormatError(f"unexpected header line: {ln!r}")
        header[parts[0]] = parts[1]
        body_start += 1
    for key in ("problem", "vars", "card"):
        if key not in header:
            raise FormatError(f"missing '{key}' line")
    try:
        n = int(header["vars"])
        k = int(header["card"])
    except ValueError as exc:
        raise FormatError(f"vars/card must be integers: {exc}") from exc
    problem = header["problem"]

    constraints = []
    for ln in lines[body_start:]:
        parts = ln.split()
        if parts[0] != "c" or len(parts) != 5:
            raise FormatError(f"bad constraint line: {ln!r}")
        try:
            i = int(parts[1])
            j = int(parts[2])
            w = float(parts[3])
        except ValueError as exc:
            raise FormatError(f"bad constraint line {ln!r}: {exc}") from exc
        if parts[4] not in _TAG_TO_KIND:
            raise FormatError(f"unknown constraint tag {parts[4]!r} in line {ln!r}")
        if not (1 <= i <= n and 1 <= j <= n):
            raise FormatError(f"constraint indices out of range in line {ln!r}")
        constraints.append(Constraint(i - 1, j - 1, w, _TAG_TO_KIND[parts[4]]))
    try:
        return CCInstance(n=n, k=k, constraints=tuple(constraints), problem=problem)
    except DomainError as exc:
        raise FormatError(str(exc)) from exc


def format_instance(inst: CCInstance) -> str:
    """Canonical text form; weights with full round-trip precision."""
    out = ["ccmax v1", f"problem {inst.problem}", f"vars {inst.n}", f"card {inst.k}"]
    for c in inst.constraints:
        out.append(f"c {c.i + 1} {c.j + 1} {c.weight:.17g} {_KIND_TO_TAG[c.kind]}")
    return "\n".join(out) + "\n"


def random_instance(
    n: int,
    k: int,
    m: int,
    problem: str = "cut",
    seed: int = 0,
    weighted: bool = True,
) -> CCInstance:
    """Seeded random instance (distinct endpoints, uniform kinds/weights)."""
    rng = np.random.default_rng(np.random.Philox(key=seed))
    constraints = []
    kinds = sorted(_PROBLEM_KINDS[problem], key=repr)
    for _ in range(m):
        i = int(rng.integers(0, n))
        j = int(rng.integers(0, n - 1))
        if j >= i:
            j += 1
        w = float(rng.uniform(0.1, 1.0)) if weighted else 1.0
        kind = kinds[int(rng.integers(0, len(kinds)))]
        constraints.append(Constraint(i, j, w, kind))
    return CCInstance(n=n, k=k, constraints=tuple(constraints), problem=problem)
