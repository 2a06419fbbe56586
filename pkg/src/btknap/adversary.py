"""The Solver/Adversary game for simple knapsack and the indispensability construction.

The Solver reveals ``beta*n`` items one at a time. The Adversary forbids two
kinds of values:

* rule 1: any difference of two subset sums of the items seen so far
  (the signed sums), which keeps all subset sums distinct;
* rule 2: any value completing a subset of the items seen to exactly ``N``.

For any ``gamma*n`` of the revealed items ``Q``, :func:`construct_R` then
builds ``(1-beta)*n`` further items ``R`` so that ``Q + R`` is the only subset
of the finished instance summing to ``N``. A correct algorithm therefore has
to keep the partial solution "accept exactly Q" alive, for every ``Q``.
"""

from __future__ import annotations

import itertools
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterator, Sequence

from .btmodel import ACCEPT, best_feasible, build_tree, extract_solutions, width_capped
from .knapsack import (
    DEFAULT_ENUM_CAP,
    DEFAULT_SIGNED_CAP,
    BudgetError,
    Selector,
    SignedSumSet,
    SimpleKnapsackInstance,
    optimum_bruteforce,
    signed_sums,
    subsets_summing_to,
)


class InfeasibleParamsError(ValueError):
    pass


class ForbiddenPickError(ValueError):
    pass


class ConstructionError(RuntimeError):
    """The construction ran out of admissible values; means the parameters lied."""


def _frac(x: Any) -> Fraction:
    if isinstance(x, float):
        raise TypeError("rational parameters must be exact, not float")
    return Fraction(x)


@dataclass(frozen=True)
class AdversaryParams:
    n: int
    beta: Fraction
    gamma: Fraction
    alpha: Fraction
    N: int
    U: int = 0

    def __post_init__(self) -> None:
        for name in ("beta", "gamma", "alpha"):
            object.__setattr__(self, name, _frac(getattr(self, name)))
        if not self.U:
            object.__setattr__(self, "U", 3**self.n)

    @classmethod
    def with_defaults(cls, n, beta, gamma, alpha=None, N=None, U=None) -> "AdversaryParams":
        """Fill alpha with the middle of its valid interval and N with 10*n*3^n."""
        beta, gamma = _frac(beta), _frac(gamma)
        if alpha is None:
            # placeholder on a broken (beta, gamma) so params_feasible names the real violation
            alpha = (1 / (1 - beta) + 1 / gamma) / 2 if 0 < gamma and beta < 1 else Fraction(1)
        if N is None:
            N = 10 * n * 3**n
        return cls(n, beta, gamma, alpha, N, U or 3**n)

    @property
    def picks(self) -> int:
        return int(self.beta * self.n)

    @property
    def q_size(self) -> int:
        return int(self.gamma * self.n)

    @property
    def m(self) -> int:
        return self.n - self.picks

    @property
    def upper(self) -> Fraction:
        """Items live in the open interval (0, alpha*N/n)."""
        return self.alpha * self.N / self.n

    @property
    def max_item(self) -> int:
        return math.ceil(self.upper) - 1

    def in_range(self, x: int) -> bool:
        return 0 < x < self.upper

    def to_document(self) -> dict[str, str]:
        return {
            "n": str(self.n),
            "beta": str(self.beta),
            "gamma": str(self.gamma),
            "alpha": str(self.alpha),
            "N": str(self.N),
            "U": str(self.U),
        }


@dataclass(frozen=True)
class Feasibility:
    ok: bool
    violated: str | None = None

    def __bool__(self) -> bool:
        return self.ok


def params_feasible(p: AdversaryParams) -> Feasibility:
    """Check the parameter inequalities, integrality, and worst-case containment.

    The containment margins use 5U/2 around the center ``a`` for every
    possible Q, which covers both the interval J and the pair scan.
    """
    n, beta, gamma, alpha, N, U = p.n, p.beta, p.gamma, p.alpha, p.N, p.U
    checks: list[tuple[str, Callable[[], bool]]] = [
        ("gamma > 0", lambda: gamma > 0),
        ("beta > gamma", lambda: beta > gamma),
        ("beta + gamma < 1", lambda: beta + gamma < 1),
        ("alpha*(1-beta) > 1", lambda: alpha * (1 - beta) > 1),
        ("alpha*gamma < 1", lambda: alpha * gamma < 1),
        ("beta*n integer", lambda: (beta * n).denominator == 1),
        ("gamma*n integer", lambda: (gamma * n).denominator == 1),
        ("(1-beta)*n >= 2", lambda: (1 - beta) * n >= 2),
        ("N >= 1", lambda: N >= 1),
        ("U >= 1", lambda: U >= 1),
        (
            "lower containment (N - gamma*alpha*N)/((1-beta)*n) - 5U/2 - 1 > 0",
            lambda: (N - gamma * alpha * N) / ((1 - beta) * n) - Fraction(5, 2) * U - 1 > 0,
        ),
        (
            "upper containment N/((1-beta)*n) + 5U/2 + 1 < alpha*N/n",
            lambda: N / ((1 - beta) * n) + Fraction(5, 2) * U + 1 < alpha * N / n,
        ),
        ("pair-scan counting margin 2*3^(n-2) < U + 1", lambda: 2 * 3 ** (n - 2) < U + 1),
        (
            "game range: integers in (0, alpha*N/n) exceed 3^(beta*n) + 2^(beta*n)",
            lambda: p.max_item > 3 ** p.picks + 2 ** p.picks,
        ),
        ("interval J room: 2U > 3^(n-3) + 2^(n-3)", lambda: 2 * U > 3 ** (n - 3) + 2 ** (n - 3)),
    ]
    for name, check in checks:
        if not check():
            return Feasibility(False, f"{name} violated")
    return Feasibility(True)


# game ---------------------------------------------------------------------


@dataclass(frozen=True)
class GameState:
    params: AdversaryParams
    P: tuple[int, ...]
    signed: SignedSumSet
    subset_sums: frozenset[int]

    @classmethod
    def initial(cls, params: AdversaryParams, max_generators: int = DEFAULT_SIGNED_CAP) -> "GameState":
        return cls(params, (), signed_sums((), max_generators), frozenset({0}))

    @property
    def round(self) -> int:
        return len(self.P)


def forbidden_reason(state: GameState, x: int) -> str | None:
    if abs(x) in state.signed:
        return "rule 1: difference of two subset sums"
    if state.params.N - x in state.subset_sums:
        return "rule 2: completes a subset to exactly N"
    return None


def forbidden_set(state: GameState) -> Callable[[int], bool]:
    signed, sums, N = state.signed, state.subset_sums, state.params.N
    return lambda x: abs(x) in signed or (N - x) in sums


def play_round(state: GameState, pick: int) -> GameState:
    p = state.params
    if state.round >= p.picks:
        raise ValueError(f"game already has {p.picks} picks")
    if not p.in_range(pick):
        raise ForbiddenPickError(f"{pick} outside (0, alpha*N/n) = (0, {p.upper})")
    reason = forbidden_reason(state, pick)
    if reason:
        raise ForbiddenPickError(f"{pick} is forbidden by {reason}")
    return GameState(
        p,
        state.P + (pick,),
        state.signed.extend(pick),
        state.subset_sums | {s + pick for s in state.subset_sums},
    )


Solver = Callable[[GameState], int]


def smallest_feasible(state: GameState) -> int:
    is_forbidden = forbidden_set(state)
    for x in range(1, state.params.max_item + 1):
        if not is_forbidden(x):
            return x
    raise ConstructionError("no admissible pick left in (0, alpha*N/n)")


class RandomFeasible:
    """Uniform pick from (0, alpha*N/n) redrawn until admissible."""

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.rng = random.Random(seed)

    def __call__(self, state: GameState) -> int:
        is_forbidden = forbidden_set(state)
        top = state.params.max_item
        while True:
            x = self.rng.randint(1, top)
            if not is_forbidden(x):
                return x


SOLVERS: dict[str, Callable[[int], Solver]] = {
    "smallest": lambda seed: smallest_feasible,
    "random": RandomFeasible,
}


def iter_game(
    solver: Solver, params: AdversaryParams, max_generators: int = DEFAULT_SIGNED_CAP
) -> Iterator[GameState]:
    """Yield the state after every round."""
    verdict = params_feasible(params)
    if not verdict:
        raise InfeasibleParamsError(verdict.violated)
    state = GameState.initial(params, max_generators)
    for _ in range(params.picks):
        state = play_round(state, solver(state))
        yield state


def play_game(
    solver: Solver, params: AdversaryParams, max_generators: int = DEFAULT_SIGNED_CAP
) -> GameState:
    state = None
    for state in iter_game(solver, params, max_generators):
        pass
    if state is None:
        state = GameState.initial(params, max_generators)
    return state


# construction -------------------------------------------------------------


@dataclass(frozen=True)
class ConstructionState:
    Q: Selector
    R: tuple[int, ...]
    a: Fraction
    J: tuple[int, int]
    w: int
    v: int
    b1: int
    b2: int
    scan_steps: int

    @property
    def deviation(self) -> Fraction:
        return self.w - self.a * (len(self.R) - 2)


def _nearest_admissible(
    target: Fraction, lo: int, hi: int, forbidden: Callable[[int], bool]
) -> int | None:
    # walk outward from target inside [lo, hi]; equal distance goes to the smaller value
    down = min(math.floor(target), hi)
    up = max(down + 1, lo)
    while down >= lo or up <= hi:
        if down < lo:
            x, up = up, up + 1
        elif up > hi or target - down <= up - target:
            x, down = down, down - 1
        else:
            x, up = up, up + 1
        if not forbidden(x):
            return x
    return None


def construct_R(state: GameState, Q: Sequence[int]) -> ConstructionState:
    """Build the completion R around the center a = (N - sum Q)/((1-beta)*n)."""
    p = state.params
    Q = tuple(sorted(set(Q)))
    if len(Q) != p.q_size:
        raise ValueError(f"|Q| = {len(Q)}, expected gamma*n = {p.q_size}")
    if state.round != p.picks:
        raise ValueError(f"game has {state.round} picks, construction needs {p.picks}")
    if any(not 0 <= i < state.round for i in Q):
        raise IndexError(f"Q {Q} has indices outside P")
    N, U, m = p.N, p.U, p.m
    sum_q = sum(state.P[i] for i in Q)
    a = Fraction(N - sum_q, m)
    lo, hi = math.ceil(a - U), math.floor(a + U)

    signed, sums = state.signed, state.subset_sums
    R: list[int] = []
    w = 0
    for t in range(m - 2):
        target = a - (w - t * a)
        x = _nearest_admissible(
            target, lo, hi, lambda x: abs(x) in signed or (N - x) in sums
        )
        if x is None:
            raise ConstructionError(f"phase 1, step {t}: every integer in J=[{lo}, {hi}] is forbidden")
        R.append(x)
        w += x
        signed = signed.extend(x)
        sums = sums | {s + x for s in sums}
    if abs(w - a * (m - 2)) > U:
        raise ConstructionError(f"phase 1 deviation {float(w - a * (m - 2))} exceeds U={U}")

    v = N - sum_q - w
    half_lo, half_hi = v // 2, -(-v // 2)
    for i in range(1, U + 2):
        b1, b2 = half_lo - i, half_hi + i
        if abs(b1) not in signed and abs(b2) not in signed:
            break
    else:
        raise ConstructionError(f"phase 2: all {U + 1} pairs around v/2 = {Fraction(v, 2)} are forbidden")
    if not (p.in_range(b1) and p.in_range(b2)):
        raise ConstructionError(f"phase 2: pair ({b1}, {b2}) leaves (0, {p.upper})")
    R += [b1, b2]
    return ConstructionState(Q, tuple(R), a, (lo, hi), w, v, b1, b2, i)


# certification ------------------------------------------------------------


@dataclass(frozen=True)
class Certificate:
    instance: SimpleKnapsackInstance
    designated: Selector
    verified: bool
    enumeration_size: int
    solutions: tuple[Selector, ...]

    def to_document(self) -> dict[str, Any]:
        return {
            "capacity": str(self.instance.capacity),
            "items": [str(x) for x in self.instance.items],
            "designated": list(self.designated),
            "solutions": [list(s) for s in self.solutions],
            "verified": self.verified,
            "enumeration_size": self.enumeration_size,
        }


def certify(
    instance: SimpleKnapsackInstance, designated: Sequence[int], cap: int = DEFAULT_ENUM_CAP
) -> Certificate:
    """Brute-force check that ``designated`` is the only subset summing to the capacity."""
    designated = tuple(sorted(set(designated)))
    sols = tuple(subsets_summing_to(instance, instance.capacity, cap))
    return Certificate(instance, designated, sols == (designated,), 2**instance.n, sols)


def completed_instance(state: GameState, cs: ConstructionState, **provenance) -> SimpleKnapsackInstance:
    prov = dict(provenance) if provenance else None
    return SimpleKnapsackInstance(state.P + cs.R, state.params.N, prov)


def designated_selector(state: GameState, cs: ConstructionState) -> Selector:
    return cs.Q + tuple(range(state.round, state.round + len(cs.R)))


def verify_unique_solution(
    cs: ConstructionState, state: GameState, cap: int = DEFAULT_ENUM_CAP
) -> Certificate:
    return certify(completed_instance(state, cs), designated_selector(state, cs), cap)


@dataclass(frozen=True)
class WitnessEntry:
    Q: Selector
    construction: ConstructionState | None
    certificate: Certificate | None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.certificate is not None and self.certificate.verified

    def to_document(self) -> dict[str, Any]:
        doc: dict[str, Any] = {"Q": list(self.Q), "verified": self.ok}
        if self.construction is not None:
            cs = self.construction
            doc.update(R=[str(x) for x in cs.R], b1=str(cs.b1), b2=str(cs.b2))
        if self.certificate is not None:
            doc["enumeration_size"] = self.certificate.enumeration_size
        if self.error:
            doc["error"] = self.error
        return doc


@dataclass(frozen=True)
class WitnessReport:
    params: AdversaryParams
    P: tuple[int, ...]
    entries: tuple[WitnessEntry, ...]
    bound: int
    provenance: dict[str, Any] = field(default_factory=dict)

    @property
    def successes(self) -> int:
        return sum(e.ok for e in self.entries)

    @property
    def complete(self) -> bool:
        return self.successes == self.bound == len(self.entries)

    @property
    def failing(self) -> list[Selector]:
        return [e.Q for e in self.entries if not e.ok]

    def to_document(self) -> dict[str, Any]:
        return {
            "params": self.params.to_document(),
            "provenance": self.provenance,
            "P": [str(x) for x in self.P],
            "entries": [e.to_document() for e in self.entries],
            "bound": self.bound,
            "successes": self.successes,
            "complete": self.complete,
        }


def _witness_one(args: tuple[GameState, Selector, int]) -> WitnessEntry:
    state, Q, cap = args
    try:
        cs = construct_R(state, Q)
    except ConstructionError as exc:
        return WitnessEntry(Q, None, None, str(exc))
    return WitnessEntry(Q, cs, verify_unique_solution(cs, state, cap))


def witness_all_Q(
    state: GameState,
    cap: int = DEFAULT_ENUM_CAP,
    workers: int = 1,
    provenance: dict[str, Any] | None = None,
) -> WitnessReport:
    """Construct and certify a completion for every gamma*n-subset of P."""
    p = state.params
    if p.n > cap:
        raise BudgetError(f"n = {p.n} exceeds the enumeration cap of {cap}")
    jobs = [(state, Q, cap) for Q in itertools.combinations(range(state.round), p.q_size)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            entries = tuple(pool.map(_witness_one, jobs))
    else:
        entries = tuple(map(_witness_one, jobs))
    return WitnessReport(p, state.P, entries, math.comb(p.picks, p.q_size), provenance or {})


# refutation of width-capped solvers ---------------------------------------


@dataclass(frozen=True)
class Refutation:
    b: int
    surviving_patterns: frozenset[Selector]
    Q: Selector
    construction: ConstructionState
    instance: SimpleKnapsackInstance
    capped_value: int
    optimum: int

    @property
    def refuted(self) -> bool:
        return self.capped_value < self.optimum == self.instance.capacity


def refute_capped_solver(
    state: GameState, b: int, cap: int = DEFAULT_ENUM_CAP
) -> Refutation:
    """Find a Q the capped solver dropped after the revealed items and complete around it."""
    p = state.params
    total = math.comb(p.picks, p.q_size)
    if b >= total:
        raise ValueError(f"cap b = {b} is not below C({p.picks}, {p.q_size}) = {total}")
    prefix = SimpleKnapsackInstance(state.P, p.N)
    tree = build_tree(width_capped(b, priority=state.P), prefix)
    depth_nodes = tree.levels[p.picks] if len(tree.levels) > p.picks else []
    patterns = frozenset(
        tuple(i for i, d in enumerate(v.decisions) if d is ACCEPT) for v in depth_nodes
    )
    missing = next(
        (Q for Q in itertools.combinations(range(p.picks), p.q_size) if Q not in patterns),
        None,
    )
    if missing is None:
        raise ValueError("every gamma*n-subset survived; the cap is not binding")
    cs = construct_R(state, missing)
    instance = completed_instance(state, cs)
    full = build_tree(width_capped(b, priority=instance.items), instance)
    value = best_feasible(extract_solutions(full, instance), p.N) or 0
    optimum, _ = optimum_bruteforce(instance, cap)
    return Refutation(b, patterns, missing, cs, instance, value, optimum)
