"""Markov chains over k-gram states that realize prescribed k-gram statistics.

States are k-grams; a transition ``ay -> yb`` shifts one new symbol in, so
the chain's stationary law fixes the k-order statistics while its transition
law fixes the (k+1)-order statistics.  Constructions provided:

* ``standard_solution`` -- P(ay, yb) = R(yb)/R(y); always feasible, irreducible
  on the support, with pre(y)*post(y) nonzero transitions per suffix.
* ``vertex_solution``   -- an extreme point of each per-suffix transportation
  polytope (northwest-corner or greedy rule); minimal support, typically
  reducible.
* ``convex_combine``    -- entrywise mixtures tracing the solution continuum.
* ``identity_chain`` / ``two_state_family`` -- the closed forms available at
  order 1 (frozen chain, and the full binary family).

Feasibility per suffix y reduces to a transportation problem via the
substitution Q(a, b) = P(ay, yb) * R(ay): row sums R(ay), column sums R(yb).
"""

from __future__ import annotations

import math
import warnings
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .rand import make_rng
from .stats import (
    Alphabet,
    Gram,
    KGramDistribution,
    Prob,
    join_gram,
    marginalize,
    require_consistent,
    split_gram,
)

ROW_SUM_TOL = 1e-9
STATIONARY_MATCH_TOL = 1e-9


@dataclass(frozen=True)
class ChainModel:
    """A k-gram Markov chain: retained states, sparse rows, stationary law.

    ``trans`` maps each retained state to its positive-probability successors
    only; rows sum to 1 within ``ROW_SUM_TOL``.  Transitions exist only
    between overlapping grams (``x[1:] == x'[:-1]``).
    """

    alphabet: Alphabet
    order: int
    states: tuple[Gram, ...]
    trans: Mapping[Gram, Mapping[Gram, float]]
    stationary: KGramDistribution
    meta: dict = field(default_factory=dict)

    def row(self, state: Gram) -> Mapping[Gram, float]:
        return self.trans[tuple(state)]

    def transition(self, state: Gram, target: Gram) -> float:
        return self.trans.get(tuple(state), {}).get(tuple(target), 0.0)

    def state_key(self, state: Gram) -> str:
        return join_gram(state, self.alphabet)

    def to_json(self) -> dict:
        key = lambda g: join_gram(g, self.alphabet)
        return {
            "alphabet": list(self.alphabet.symbols),
            "order": self.order,
            "states": [key(s) for s in self.states],
            "trans": {
                key(s): {key(t): p for t, p in row.items()}
                for s, row in self.trans.items()
            },
            "stationary": {
                key(g): float(p) for g, p in self.stationary.probs.items()
            },
            "meta": dict(self.meta),
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "ChainModel":
        alphabet = Alphabet(tuple(obj["alphabet"]))
        order = int(obj["order"])
        parse = lambda k: split_gram(k, alphabet, order)
        states = tuple(parse(s) for s in obj["states"])
        trans = {
            parse(s): {parse(t): float(p) for t, p in row.items()}
            for s, row in obj["trans"].items()
        }
        stationary = KGramDistribution.from_probs(
            alphabet,
            order,
            {parse(g): _exact(p) for g, p in obj["stationary"].items()},
            source="designed",
        )
        model = cls(alphabet, order, states, trans, stationary, dict(obj.get("meta", {})))
        verify_model(model)
        return model


def _exact(p) -> Prob:
    return Fraction(p) if isinstance(p, (int, Fraction)) else p


def _canonical_order(alphabet: Alphabet, grams: Iterable[Gram]) -> list[Gram]:
    return sorted(grams, key=lambda g: tuple(alphabet.index(s) for s in g))


def _suffix_weights(R: KGramDistribution) -> dict[Gram, Prob]:
    """R(y) for every (k-1)-gram y, i.e. the keep-suffix marginal."""
    if R.order == 1:
        return {(): R.total()}
    return dict(marginalize(R, R.order - 1, side="suffix").probs)


def _retained_states(
    R: KGramDistribution, prune_zero_states: bool
) -> tuple[list[Gram], dict[Gram, Prob]]:
    sw = _suffix_weights(R)
    states = []
    for x in R.alphabet.grams(R.order):
        if R.prob(x) > 0 or (not prune_zero_states and sw.get(x[1:], 0) > 0):
            states.append(x)
    return states, sw


# ---------------------------------------------------------------------------
# per-suffix transportation systems
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SuffixSystem:
    """The decoupled feasibility system attached to one (k-1)-gram suffix.

    Row weights are R(ay) over incoming symbols a, column weights R(yb) over
    outgoing symbols b; both sum to R(y).  ``pre``/``post`` count the nonzero
    rows/columns, bounding any vertex at pre + post - 1 nonzero cells.
    """

    suffix: Gram
    row_weights: dict[str, Prob]
    col_weights: dict[str, Prob]

    @property
    def pre(self) -> int:
        return sum(1 for w in self.row_weights.values() if w > 0)

    @property
    def post(self) -> int:
        return sum(1 for w in self.col_weights.values() if w > 0)

    @property
    def mass(self) -> Prob:
        return sum(self.row_weights.values(), Fraction(0))


def suffix_systems(R: KGramDistribution) -> list[SuffixSystem]:
    """One transportation system per suffix y with R(y) > 0.

    Requires R to satisfy the marginal identities (the row and column sums
    of each system must agree).
    """
    require_consistent(R)
    sw = _suffix_weights(R)
    out = []
    for y in _canonical_order(R.alphabet, (y for y, w in sw.items() if w > 0)):
        rows = {a: R.prob((a,) + y) for a in R.alphabet.symbols}
        cols = {b: R.prob(y + (b,)) for b in R.alphabet.symbols}
        out.append(SuffixSystem(y, rows, cols))
    return out


def _balanced(weights: Sequence[Prob], target: Fraction) -> list[Fraction]:
    """Exact-rational copy of ``weights`` rescaled to sum to ``target``."""
    exact = [Fraction(w) for w in weights]
    total = sum(exact, Fraction(0))
    if total == target or total == 0:
        return exact
    return [w * target / total for w in exact]


def _northwest(
    supplies: list[Fraction], demands: list[Fraction]
) -> tuple[dict[tuple[int, int], Fraction], list[tuple[int, int]]]:
    """Northwest-corner vertex; returns allocations and the visited path.

    On simultaneous row/column exhaustion the cursor advances diagonally, so
    zero-weight lines are entered at most once (their visited cell is the
    degenerate basic cell).
    """
    rem_s = list(supplies)
    rem_d = list(demands)
    alloc: dict[tuple[int, int], Fraction] = {}
    visited: list[tuple[int, int]] = []
    i = j = 0
    while i < len(rem_s) and j < len(rem_d):
        ship = min(rem_s[i], rem_d[j])
        visited.append((i, j))
        if ship > 0:
            alloc[(i, j)] = ship
        rem_s[i] -= ship
        rem_d[j] -= ship
        if rem_s[i] == 0 and rem_d[j] == 0:
            i += 1
            j += 1
        elif rem_s[i] == 0:
            i += 1
        else:
            j += 1
    return alloc, visited


def _greedy(
    supplies: list[Fraction], demands: list[Fraction]
) -> dict[tuple[int, int], Fraction]:
    """Maximum-allocation greedy vertex: repeatedly ship the largest feasible
    amount, breaking ties lexicographically by (row, column)."""
    rem_s = list(supplies)
    rem_d = list(demands)
    alloc: dict[tuple[int, int], Fraction] = {}
    live_rows = [i for i, w in enumerate(rem_s) if w > 0]
    live_cols = [j for j, w in enumerate(rem_d) if w > 0]
    while live_rows and live_cols:
        best = None
        for i in live_rows:
            for j in live_cols:
                cap = min(rem_s[i], rem_d[j])
                if best is None or cap > best[0]:
                    best = (cap, i, j)
        cap, i, j = best
        alloc[(i, j)] = alloc.get((i, j), Fraction(0)) + cap
        rem_s[i] -= cap
        rem_d[j] -= cap
        live_rows = [i for i in live_rows if rem_s[i] > 0]
        live_cols = [j for j in live_cols if rem_d[j] > 0]
    return alloc


# ---------------------------------------------------------------------------
# constructions
# ---------------------------------------------------------------------------


def _assemble(
    R: KGramDistribution,
    states: list[Gram],
    rows: dict[Gram, dict[Gram, Prob]],
    meta: dict,
) -> ChainModel:
    trans = {
        s: {t: float(p) for t, p in sorted(
            rows[s].items(), key=lambda it: tuple(R.alphabet.index(c) for c in it[0])
        ) if p > 0}
        for s in states
    }
    return ChainModel(
        alphabet=R.alphabet,
        order=R.order,
        states=tuple(_canonical_order(R.alphabet, states)),
        trans=trans,
        stationary=R,
        meta=meta,
    )


def _standard_row(
    R: KGramDistribution, y: Gram, weight_y: Prob
) -> dict[Gram, Prob]:
    return {
        y + (b,): Fraction(R.prob(y + (b,))) / Fraction(weight_y)
        for b in R.alphabet.symbols
        if R.prob(y + (b,)) > 0
    }


def standard_solution(
    R: KGramDistribution, prune_zero_states: bool = False
) -> ChainModel:
    """The always-feasible assignment P(ay, yb) = R(yb)/R(y).

    Irreducible on the positive-probability states, with the maximal
    pre(y)*post(y) support per suffix.  At order 1 every row equals R, i.e.
    the i.i.d. chain.  States x with R(x)=0 whose suffix still has R(y)>0
    are kept (with the same row) unless ``prune_zero_states`` is set; states
    whose suffix has no mass are dropped.
    """
    require_consistent(R)
    states, sw = _retained_states(R, prune_zero_states)
    rows = {x: _standard_row(R, x[1:], sw[x[1:]]) for x in states}
    return _assemble(R, states, rows, {"construction": "standard"})


def vertex_solution(
    R: KGramDistribution,
    rule: str = "northwest",
    solver_raw: bool = False,
    prune_zero_states: bool = False,
) -> ChainModel:
    """A basic feasible solution of every per-suffix transportation system.

    Each suffix's allocation Q is an extreme point with at most
    pre(y)+post(y)-1 nonzero cells; transition rows are Q(a, .)/R(ay).
    Stationarity and stochasticity hold; irreducibility usually does not.

    Retained zero-probability states receive the standard row by default
    (their rows cannot affect the stationary law).  ``solver_raw`` instead
    runs the northwest rule over the full symbol grid, zero-weight lines
    included, and gives such states unit mass on their degenerate basic
    cell -- the kind of row a generic LP solver picks.
    """
    if rule not in ("northwest", "lexicographic-greedy"):
        raise ValueError(f"unknown vertex rule {rule!r}")
    if solver_raw and rule != "northwest":
        raise ValueError("solver_raw is defined for the northwest rule only")
    require_consistent(R)
    states, sw = _retained_states(R, prune_zero_states)
    symbols = R.alphabet.symbols
    rows: dict[Gram, dict[Gram, Prob]] = {}

    for y in _canonical_order(R.alphabet, {x[1:] for x in states}):
        mass = Fraction(sw[y])
        row_w = [Fraction(R.prob((a,) + y)) for a in symbols]
        col_w = _balanced([R.prob(y + (b,)) for b in symbols], sum(row_w, Fraction(0)))

        if solver_raw:
            alloc, visited = _northwest(row_w, col_w)
            first_cell = {}
            for i, j in visited:
                first_cell.setdefault(i, j)
            retained = set(states)
            for ai, a in enumerate(symbols):
                state = (a,) + y
                if state not in retained:
                    continue
                if row_w[ai] > 0:
                    rows[state] = {
                        y + (symbols[j],): q / row_w[ai]
                        for (i, j), q in alloc.items()
                        if i == ai
                    }
                    continue
                # degenerate basic cell of an unconstrained row; fall back to
                # the standard row when the path skipped it or its cell points
                # at a pruned gram
                j = first_cell.get(ai)
                target = y + (symbols[j],) if j is not None else None
                if target is not None and target in retained:
                    rows[state] = {target: Fraction(1)}
                else:
                    rows[state] = _standard_row(R, y, mass)
            continue

        live_r = [i for i, w in enumerate(row_w) if w > 0]
        live_c = [j for j, w in enumerate(col_w) if w > 0]
        sub_s = [row_w[i] for i in live_r]
        sub_d = [col_w[j] for j in live_c]
        if rule == "northwest":
            alloc, _ = _northwest(sub_s, sub_d)
        else:
            alloc = _greedy(sub_s, sub_d)
        for si, i in enumerate(live_r):
            state = (symbols[i],) + y
            rows[state] = {
                y + (symbols[live_c[sj]],): q / row_w[i]
                for (ri, sj), q in alloc.items()
                if ri == si
            }
        for a in symbols:
            state = (a,) + y
            if state in states and state not in rows:
                rows[state] = _standard_row(R, y, mass)

    meta = {"construction": "vertex", "rule": rule, "solver_raw": solver_raw}
    return _assemble(R, states, rows, meta)


def identity_chain(R: KGramDistribution) -> ChainModel:
    """The frozen order-1 chain: every symbol repeats forever.

    Valid only at order 1 (higher-order grams cannot self-loop unless
    constant), yet stationary for any R.
    """
    if R.order != 1:
        raise ValueError("identity chain exists only at order 1")
    states, _ = _retained_states(R, prune_zero_states=False)
    rows = {s: {s: Fraction(1)} for s in states}
    return _assemble(R, states, rows, {"construction": "identity"})


def convex_combine(A: ChainModel, B: ChainModel, u: float) -> ChainModel:
    """Entrywise mixture u*A + (1-u)*B over the union of supports.

    Both models must share alphabet, order, state set, and stationary law;
    every mixture is then stationary for that same law, and is irreducible
    whenever an irreducible argument carries positive weight.
    """
    if not 0 <= u <= 1:
        raise ValueError(f"u={u} outside [0, 1]")
    if A.alphabet != B.alphabet or A.order != B.order:
        raise ValueError("models use different alphabets or orders")
    if set(A.states) != set(B.states):
        raise ValueError("models retain different state sets")
    drift = max(
        abs(float(A.stationary.prob(g)) - float(B.stationary.prob(g)))
        for g in set(A.stationary.probs) | set(B.stationary.probs)
    )
    if drift > STATIONARY_MATCH_TOL:
        raise ValueError(f"stationary laws differ by {drift:.3g}")
    if u == 0:
        stationary = B.stationary
    else:
        stationary = A.stationary
    uf = float(u)
    trans = {}
    for s in A.states:
        targets = set(A.trans[s]) | set(B.trans[s])
        row = {}
        for t in sorted(targets, key=lambda g: tuple(A.alphabet.index(c) for c in g)):
            p = uf * A.trans[s].get(t, 0.0) + (1.0 - uf) * B.trans[s].get(t, 0.0)
            if p > 0:
                row[t] = p
        trans[s] = row
    meta = {
        "construction": "convex",
        "u": uf,
        "components": [A.meta.get("construction"), B.meta.get("construction")],
    }
    return ChainModel(A.alphabet, A.order, A.states, trans, stationary, meta)


def two_state_feasible_interval(r: float) -> tuple[float, float]:
    """Range of self-loop probabilities p00 keeping the binary family valid."""
    lo = _two_state_lower(Fraction(str(r)))
    return float(lo), 1.0


def _two_state_lower(rf: Fraction) -> Fraction:
    return max(Fraction(0), (1 - 2 * rf) / (1 - rf))


def two_state_family(r: float, p00: float) -> ChainModel:
    """Binary order-1 chain with stationary [1-r, r], parameterized by p00.

    The stationarity constraint leaves one degree of freedom:
    p11 = ((1-r)/r) * p00 + (2r-1)/r.  Arithmetic is exact over the decimal
    values of the inputs.
    """
    if not 0 < r < 1:
        raise ValueError("r must lie strictly between 0 and 1")
    rf = Fraction(str(r))
    pf = Fraction(str(p00))
    lo = _two_state_lower(rf)
    if not lo <= pf <= 1:
        raise ValueError(
            f"p00={p00} infeasible for r={r}; feasible interval is [{float(lo):.12g}, 1]"
        )
    p11 = (1 - rf) / rf * pf + (2 * rf - 1) / rf
    alphabet = Alphabet(("0", "1"))
    R = KGramDistribution.from_probs(
        alphabet, 1, {("0",): 1 - rf, ("1",): rf}, source="designed"
    )
    rows: dict[Gram, dict[Gram, Prob]] = {
        ("0",): {("0",): pf, ("1",): 1 - pf},
        ("1",): {("0",): 1 - p11, ("1",): p11},
    }
    return _assemble(R, [("0",), ("1",)], rows, {"construction": "two-state", "p00": float(pf)})


# ---------------------------------------------------------------------------
# derived quantities
# ---------------------------------------------------------------------------


def entropy_rate(M: ChainModel) -> float:
    """Expected per-symbol uncertainty in bits:
    -sum_x R(x) sum_x' P(x, x') log2 P(x, x'), with 0 log 0 = 0."""
    total = 0.0
    for s in M.states:
        w = float(M.stationary.prob(s))
        if w <= 0:
            continue
        h = 0.0
        for p in M.trans[s].values():
            if p > 0:
                h -= p * math.log2(p)
        total += w * h
    return total


def implied_higher_stats(M: ChainModel) -> KGramDistribution:
    """The (k+1)-gram law the chain induces: R'(ayb) = R(ay) * P(ay, yb).

    Its suffix marginal recovers the stationary law (stationarity) and its
    prefix marginal recovers it too (row-stochasticity).
    """
    probs: dict[Gram, float] = {}
    for s in M.states:
        w = M.stationary.prob(s)
        if w <= 0:
            continue
        for t, p in M.trans[s].items():
            gram = s + (t[-1],)
            probs[gram] = probs.get(gram, 0.0) + float(w) * p
    return KGramDistribution(M.alphabet, M.order + 1, probs, source="designed")


def verify_model(M: ChainModel, tol: float = ROW_SUM_TOL) -> dict:
    """Check row-stochasticity, the overlap support pattern, and the
    stationarity residual; raises on structural violations."""
    row_residual = 0.0
    for s in M.states:
        row = M.trans[s]
        for t, p in row.items():
            if p < 0:
                raise ValueError(f"negative transition {s} -> {t}")
            if M.order > 1 and s[1:] != t[:-1]:
                raise ValueError(f"illegal transition {s} -> {t}: grams do not overlap")
            if t not in M.trans:
                raise ValueError(f"transition {s} -> {t} leaves the retained states")
        row_residual = max(row_residual, abs(sum(row.values()) - 1.0))
    if row_residual > tol:
        raise ValueError(f"row sums off by {row_residual:.3g}")

    inflow: dict[Gram, float] = {}
    for s in M.states:
        w = float(M.stationary.prob(s))
        if w == 0:
            continue
        for t, p in M.trans[s].items():
            inflow[t] = inflow.get(t, 0.0) + w * p
    stationary_residual = 0.0
    for t in set(inflow) | {s for s in M.states if M.stationary.prob(s) > 0}:
        stationary_residual = max(
            stationary_residual,
            abs(inflow.get(t, 0.0) - float(M.stationary.prob(t))),
        )
    return {
        "row_residual": row_residual,
        "stationary_residual": stationary_residual,
    }


# ---------------------------------------------------------------------------
# simulation
# ---------------------------------------------------------------------------


class WalkSampler:
    """Sequential sampler for random walks in a chain.

    Successors are ordered canonically and selected by inverse-CDF lookup of
    one uniform variate per step, so a given generator stream always yields
    the same walk on any platform.
    """

    def __init__(self, model: ChainModel):
        self.model = model
        self.states = list(model.states)
        self.index = {s: i for i, s in enumerate(self.states)}
        self.symbols = model.alphabet.symbols
        sym_index = {s: i for i, s in enumerate(self.symbols)}
        self.last_symbol = [sym_index[s[-1]] for s in self.states]
        self._succ: list[tuple[int, ...]] = []
        self._cum: list[tuple[float, ...]] = []
        for s in self.states:
            row = model.trans[s]
            if not row:
                raise ValueError(f"state {s} has no outgoing transitions")
            targets = sorted(row, key=lambda g: tuple(sym_index[c] for c in g))
            cum = []
            acc = 0.0
            for t in targets:
                acc += row[t]
                cum.append(acc)
            if abs(acc - 1.0) > ROW_SUM_TOL:
                raise ValueError(f"row of {s} sums to {acc}")
            cum[-1] = 1.0
            self._succ.append(tuple(self.index[t] for t in targets))
            self._cum.append(tuple(cum))
        weights = [max(float(model.stationary.prob(s)), 0.0) for s in self.states]
        total = sum(weights)
        if total <= 0:
            raise ValueError("stationary law carries no mass on retained states")
        acc = 0.0
        start_cum = []
        for w in weights:
            acc += w / total
            start_cum.append(acc)
        start_cum[-1] = 1.0
        self._start_cum = start_cum

    def draw_start(self, rng: np.random.Generator) -> int:
        return bisect_right(self._start_cum, rng.random())

    def walk(
        self, start: int, n: int, rng: np.random.Generator
    ) -> tuple[list[int], int]:
        """n steps from state id ``start``; returns emitted symbol ids and the
        final state id."""
        succ = self._succ
        cum = self._cum
        last = self.last_symbol
        out: list[int] = []
        append = out.append
        s = start
        for u in rng.random(n).tolist():
            row = cum[s]
            s = succ[s][bisect_right(row, u)]
            append(last[s])
        return out, s

    def to_labels(self, ids: Sequence[int]) -> list[str]:
        symbols = self.symbols
        return [symbols[i] for i in ids]


def simulate(
    M: ChainModel,
    n: int,
    seed: int = 0,
    start: Gram | str = "stationary-random",
) -> list[str]:
    """Random walk of length n; emits the new last symbol of each step.

    ``start`` is a retained state, or the default sentinel which draws the
    initial state from the stationary law.  Output is fully determined by
    (model, n, seed, start); the generator is PCG64 seeded via SeedSequence.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    sampler = WalkSampler(M)
    rng = make_rng(seed)
    if isinstance(start, str) and start == "stationary-random":
        sid = sampler.draw_start(rng)
    else:
        if isinstance(start, str):
            key = split_gram(start, M.alphabet, M.order)
        else:
            key = tuple(start)
        if key not in sampler.index:
            raise ValueError(f"start state {start!r} not retained in the model")
        sid = sampler.index[key]
    ids, _ = sampler.walk(sid, n, rng)
    return sampler.to_labels(ids)


# ---------------------------------------------------------------------------
# structure analysis
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChainClassification:
    irreducible: bool
    aperiodic: bool
    communicating_classes: tuple[tuple[Gram, ...], ...]
    periods: tuple[int | None, ...]


def classify_chain(M: ChainModel, warn_periodic: bool = True) -> ChainClassification:
    """Communicating classes, irreducibility, and per-class periods of the
    positive-transition digraph."""
    order = {s: i for i, s in enumerate(M.states)}
    adj = {s: [t for t in M.trans[s]] for s in M.states}
    sccs = _tarjan(M.states, adj)

    classes = []
    periods = []
    for comp in sccs:
        comp_set = set(comp)
        period = _class_period(comp, comp_set, adj)
        classes.append(tuple(sorted(comp, key=order.get)))
        periods.append(period)
    ranked = sorted(range(len(classes)), key=lambda i: order[classes[i][0]])
    classes = tuple(classes[i] for i in ranked)
    periods = tuple(periods[i] for i in ranked)

    irreducible = len(classes) == 1
    aperiodic = all(p is None or p == 1 for p in periods)
    if warn_periodic and not aperiodic:
        bad = [c for c, p in zip(classes, periods) if p not in (None, 1)]
        warnings.warn(
            f"chain is periodic: {len(bad)} class(es) with period > 1", stacklevel=2
        )
    return ChainClassification(irreducible, aperiodic, classes, periods)


def _tarjan(states: Sequence[Gram], adj: Mapping[Gram, list[Gram]]) -> list[list[Gram]]:
    index: dict[Gram, int] = {}
    low: dict[Gram, int] = {}
    on_stack: set[Gram] = set()
    stack: list[Gram] = []
    counter = 0
    out: list[list[Gram]] = []

    for root in states:
        if root in index:
            continue
        work = [(root, iter(adj[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for nxt in it:
                if nxt not in index:
                    index[nxt] = low[nxt] = counter
                    counter += 1
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, iter(adj[nxt])))
                    advanced = True
                    break
                if nxt in on_stack:
                    low[node] = min(low[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == node:
                        break
                out.append(comp)
    return out


def _class_period(
    comp: Sequence[Gram], comp_set: set[Gram], adj: Mapping[Gram, list[Gram]]
) -> int | None:
    """gcd of cycle lengths within one strongly connected component, or None
    for a transient singleton with no self-loop."""
    root = comp[0]
    internal = False
    level = {root: 0}
    queue = [root]
    g = 0
    while queue:
        nxt_queue = []
        for u in queue:
            for v in adj[u]:
                if v not in comp_set:
                    continue
                internal = True
                if v in level:
                    g = math.gcd(g, level[u] + 1 - level[v])
                else:
                    level[v] = level[u] + 1
                    nxt_queue.append(v)
        queue = nxt_queue
    if not internal:
        return None
    return abs(g) if g else 0
