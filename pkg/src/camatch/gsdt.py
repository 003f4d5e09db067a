"""Serial dictatorship with ties, run as staged network flow.

Applicants are served one quota unit at a time along a priority multisequence.
The flow network has source -> applicant -> tie -> course -> sink layers; a
stage raises the served applicant's source-arc capacity, then probes her ties
from the active one outward, augmenting along a source-sink path when one
exists. Augmenting paths reshuffle courses only within a tie, so nobody ever
trades down, and every stage output is Pareto optimal for the stage quotas.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .errors import NotParetoOptimalError
from .instance import Instance, PriorityOrdering, validate_ordering
from .matching import Matching, Pair

SRC = ("src",)
SNK = ("snk",)

Node = tuple


def _app(a: str) -> Node:
    return ("app", a)


def _tie(a: str, t: int) -> Node:
    return ("tie", a, t)


def _crs(c: str) -> Node:
    return ("crs", c)


def render_node(node: Node) -> str:
    if node == SRC:
        return "sigma"
    if node == SNK:
        return "tau"
    if node[0] == "app":
        return node[1]
    if node[0] == "tie":
        return f"{node[1]}:t{node[2] + 1}"
    return node[1]


class FlowNetwork:
    """Mutable flow state. Tie-to-course arcs have capacity 1 and course-to-
    sink arcs capacity q(c); source and tie arc capacities evolve with the
    stages."""

    def __init__(self, instance: Instance):
        self.instance = instance
        self.cap_src = {a: 0 for a in instance.applicants}
        self.flow_src = {a: 0 for a in instance.applicants}
        self.cap_tie = {
            (a, t): 0
            for a in instance.applicants
            for t in range(len(instance.prefs[a]))
        }
        self.flow_tie = dict.fromkeys(self.cap_tie, 0)
        self.flow_course_arc = {
            (a, t, c): 0
            for a in instance.applicants
            for t, tie in enumerate(instance.prefs[a])
            for c in sorted(tie)
        }
        self.flow_snk = {c: 0 for c in instance.courses}
        # Courses nobody lists can never lie on an augmenting path.
        self.listed_courses = sorted(
            {c for a in instance.applicants for tie in instance.prefs[a] for c in tie}
        )

    def matching(self) -> Matching:
        return Matching(
            (a, c) for (a, t, c), f in self.flow_course_arc.items() if f
        )

    def augment(self, path: Sequence[Node]) -> tuple[list[Pair], list[Pair]]:
        """Push one unit along a source-sink path; tie-course arcs on the
        path toggle, which adds and removes matched pairs."""
        a = path[1][1]
        t = path[2][2]
        self.flow_src[a] += 1
        self.flow_tie[(a, t)] += 1
        added: list[Pair] = []
        removed: list[Pair] = []
        for u, v in zip(path[2:], path[3:]):
            if u[0] == "tie" and v[0] == "crs":
                key = (u[1], u[2], v[1])
                assert self.flow_course_arc[key] == 0
                self.flow_course_arc[key] = 1
                added.append((u[1], v[1]))
            elif u[0] == "crs" and v[0] == "tie":
                key = (v[1], v[2], u[1])
                assert self.flow_course_arc[key] == 1
                self.flow_course_arc[key] = 0
                removed.append((v[1], u[1]))
        self.flow_snk[path[-2][1]] += 1
        return added, removed

    def check(self) -> None:
        """Exact conservation and capacity bounds at every node and arc.

        Meant for the quiescent state between stages, where additionally
        every applicant-to-tie arc must sit exactly at its capacity (probes
        saturate on success and roll the capacity back on failure).
        """
        inst = self.instance
        for a in inst.applicants:
            assert 0 <= self.flow_src[a] <= self.cap_src[a]
            out = sum(
                self.flow_tie[(a, t)] for t in range(len(inst.prefs[a]))
            )
            assert self.flow_src[a] == out
        for (a, t), f in self.flow_tie.items():
            assert f == self.cap_tie[(a, t)]
            out = sum(
                self.flow_course_arc[(a, t, c)] for c in inst.prefs[a][t]
            )
            assert f == out
        into_course: dict[str, int] = {c: 0 for c in inst.courses}
        for (a, t, c), f in self.flow_course_arc.items():
            assert f in (0, 1)
            into_course[c] += f
        for c in inst.courses:
            assert into_course[c] == self.flow_snk[c]
            assert 0 <= self.flow_snk[c] <= inst.capacity[c]


# ----------------------------------------------------------------------
# Path selection policies.
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class BreadthFirstCanonical:
    """Shortest augmenting path, ties broken toward the lexicographically
    least node sequence. Purely a reproducibility device; any augmenting
    path preserves correctness."""


@dataclass(frozen=True)
class GuidedToward:
    """Prefer direct paths onto the target matching's courses, in the
    target's derived pair-priority order; used to replay a specific
    Pareto optimal matching."""

    target: Matching


CANONICAL = BreadthFirstCanonical()

Policy = BreadthFirstCanonical | GuidedToward


@dataclass
class GsdtState:
    instance: Instance
    network: FlowNetwork
    curr: dict[str, int]
    stage: int = 0
    searches: int = 0
    arc_visits: list[int] = field(default_factory=list)


def find_augmenting_path(
    state: GsdtState,
    applicant: str,
    tie: int,
    policy: Policy = CANONICAL,
    guided_order: dict[str, list[str]] | None = None,
) -> list[Node] | None:
    """Search the residual network for a source-sink path through the
    applicant's probed tie.

    Any augmenting path must enter through the only unsaturated source and
    tie arcs, so the search starts at the tie node and explores forward
    tie-course arcs, backward matched arcs, and course-sink arcs only. Arc
    inspections are counted into the state's work counters.
    """
    net = state.network
    inst = state.instance
    visits = 0

    def finish(path: list[Node] | None) -> list[Node] | None:
        state.searches += 1
        state.arc_visits.append(visits)
        return path

    if isinstance(policy, GuidedToward) and guided_order is not None:
        held = net.matching().of_applicant(applicant)
        for c in guided_order.get(applicant, ()):
            visits += 1
            if (
                c in inst.prefs[applicant][tie]
                and c not in held
                and net.flow_snk[c] < inst.capacity[c]
            ):
                return finish([SRC, _app(applicant), _tie(applicant, tie), _crs(c), SNK])

    # Residual adjacency over tie nodes, course nodes and the sink.
    succ: dict[Node, list[Node]] = {}
    for (a, t), _ in net.cap_tie.items():
        outs = []
        for c in sorted(inst.prefs[a][t]):
            visits += 1
            if net.flow_course_arc[(a, t, c)] == 0:
                outs.append(_crs(c))
        succ[_tie(a, t)] = outs
    for c in net.listed_courses:
        outs = []
        visits += 1
        if net.flow_snk[c] < inst.capacity[c]:
            outs.append(SNK)
        succ[_crs(c)] = outs
    for (a, t, c), f in net.flow_course_arc.items():
        visits += 1
        if f == 1:
            succ[_crs(c)].append(_tie(a, t))

    start = _tie(applicant, tie)
    # Distance-to-sink by reverse breadth-first search.
    pred: dict[Node, list[Node]] = {SNK: []}
    for u, outs in succ.items():
        pred.setdefault(u, [])
        for v in outs:
            pred.setdefault(v, []).append(u)
    dist = {SNK: 0}
    frontier = [SNK]
    while frontier:
        nxt = []
        for v in frontier:
            for u in pred[v]:
                visits += 1
                if u not in dist:
                    dist[u] = dist[v] + 1
                    nxt.append(u)
        frontier = nxt
    if start not in dist:
        return finish(None)

    # Greedy walk: among successors one step closer to the sink, always take
    # the least node key, giving the lexicographically least shortest path.
    path = [SRC, _app(applicant), start]
    node = start
    while node != SNK:
        best = None
        for v in succ[node]:
            visits += 1
            if dist.get(v) == dist[node] - 1 and (best is None or v < best):
                best = v
        assert best is not None
        path.append(best)
        node = best
    return finish(path)


# ----------------------------------------------------------------------
# The mechanism.
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class ProbeRecord:
    tie: int
    path: tuple[Node, ...] | None


@dataclass(frozen=True)
class StageRecord:
    stage: int
    applicant: str
    probes: tuple[ProbeRecord, ...]
    added: Pair | None
    pairs_added: tuple[Pair, ...]
    pairs_removed: tuple[Pair, ...]
    capacities: tuple[int, ...]
    matching: Matching
    curr_after: tuple[tuple[str, int], ...]


@dataclass(frozen=True)
class GsdtResult:
    matching: Matching
    stages: tuple[StageRecord, ...]
    capacity_history: tuple[tuple[int, ...], ...]
    searches: int
    arc_visits: tuple[int, ...]


def run_gsdt(
    instance: Instance,
    ordering: Sequence[str],
    policy: Policy = CANONICAL,
) -> GsdtResult:
    """Run the mechanism for a priority multisequence.

    Per stage: raise the served applicant's capacity, probe her ties from the
    active one onward (the active tie only advances on failed probes), and on
    success augment the flow and read the new matching off the tie-course
    arcs. Returns the final matching plus a full per-stage trace and work
    counters.
    """
    validate_ordering(instance, ordering)
    state = GsdtState(
        instance=instance,
        network=FlowNetwork(instance),
        curr={a: 0 for a in instance.applicants},
    )
    guided_order = None
    if isinstance(policy, GuidedToward):
        order = _pair_priority_order(instance, policy.target)
        guided_order = {}
        for a, c in order:
            guided_order.setdefault(a, []).append(c)

    counts = {a: 0 for a in instance.applicants}
    capacities = [tuple(counts[a] for a in instance.applicants)]
    stages: list[StageRecord] = []

    for i, a in enumerate(ordering, start=1):
        state.stage = i
        net = state.network
        net.cap_src[a] += 1
        counts[a] += 1
        probes: list[ProbeRecord] = []
        path: list[Node] | None = None
        while path is None and state.curr[a] < len(instance.prefs[a]):
            t = state.curr[a]
            net.cap_tie[(a, t)] += 1
            path = find_augmenting_path(state, a, t, policy, guided_order)
            probes.append(ProbeRecord(t, tuple(path) if path else None))
            if path is None:
                net.cap_tie[(a, t)] -= 1
                state.curr[a] += 1
        if path is not None:
            added, removed = net.augment(path)
            stage_added: Pair | None = (a, path[3][1])
        else:
            added, removed = [], []
            stage_added = None
        net.check()
        stages.append(
            StageRecord(
                stage=i,
                applicant=a,
                probes=tuple(probes),
                added=stage_added,
                pairs_added=tuple(sorted(added)),
                pairs_removed=tuple(sorted(removed)),
                capacities=tuple(counts[x] for x in instance.applicants),
                matching=net.matching(),
                curr_after=tuple(sorted(state.curr.items())),
            )
        )
        capacities.append(stages[-1].capacities)

    return GsdtResult(
        matching=state.network.matching(),
        stages=tuple(stages),
        capacity_history=tuple(capacities),
        searches=state.searches,
        arc_visits=tuple(state.arc_visits),
    )


def render_trace(result: GsdtResult) -> list[str]:
    """Line-oriented stage trace.

    One line per probed tie; a stage whose active tie is already exhausted
    (no probe at all) renders a single line with ``tie=-``. Tie numbers are
    1-based in the rendering.
    """
    lines = []
    for rec in result.stages:
        if not rec.probes:
            lines.append(
                f"stage={rec.stage} applicant={rec.applicant} tie=- "
                f"path=FAIL added=none"
            )
            continue
        for probe in rec.probes:
            if probe.path is None:
                shown, delta = "FAIL", "none"
            else:
                shown = ",".join(render_node(n) for n in probe.path)
                delta = f"{rec.added[0]},{rec.added[1]}"
            lines.append(
                f"stage={rec.stage} applicant={rec.applicant} "
                f"tie={probe.tie + 1} path={shown} added={delta}"
            )
    return lines


# ----------------------------------------------------------------------
# Deriving a priority ordering that replays a given Pareto optimal matching.
# ----------------------------------------------------------------------

def _pair_priority_order(instance: Instance, matching: Matching) -> list[Pair]:
    """Order the matched pairs so that every pair comes after all pairs it
    weakly envies.

    Build the digraph on matched pairs with an arc from ac to a'c' whenever
    the course c' is one that a weakly prefers to c and does not hold, or a
    later seat of a herself (same applicant, weakly better course): without
    the same-applicant arcs, a seat served too early can absorb capacity an
    earlier-priority pair still needs. Contract strongly connected
    components; lay the components out sinks first; sort pairs inside a
    component for determinism.
    """
    pairs = matching.canonical_pairs()
    adj: dict[Pair, list[Pair]] = {p: [] for p in pairs}
    for a, c in pairs:
        own_tie = instance.tie_of(a, c)
        held = matching.of_applicant(a)
        for a2, c2 in pairs:
            if (a2, c2) == (a, c):
                continue
            if a2 != a and (c2 in held or c2 not in instance.acceptable(a)):
                continue
            if instance.tie_of(a, c2) <= own_tie:
                adj[(a, c)].append((a2, c2))

    # Iterative Tarjan; components complete only after everything they can
    # reach, so the emission order is exactly sinks-first.
    index: dict[Pair, int] = {}
    low: dict[Pair, int] = {}
    on_stack: set[Pair] = set()
    stack: list[Pair] = []
    components: list[list[Pair]] = []
    counter = 0

    for root in pairs:
        if root in index:
            continue
        work: list[tuple[Pair, int]] = [(root, 0)]
        while work:
            node, ei = work.pop()
            if ei == 0:
                index[node] = low[node] = counter
                counter += 1
                stack.append(node)
                on_stack.add(node)
            advanced = False
            for k in range(ei, len(adj[node])):
                nxt = adj[node][k]
                if nxt not in index:
                    work.append((node, k + 1))
                    work.append((nxt, 0))
                    advanced = True
                    break
                if nxt in on_stack:
                    low[node] = min(low[node], index[nxt])
            if advanced:
                continue
            if low[node] == index[node]:
                comp = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    comp.append(member)
                    if member == node:
                        break
                components.append(sorted(comp))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])

    return [p for comp in components for p in comp]


def derive_ordering(instance: Instance, pom: Matching) -> PriorityOrdering:
    """Build a priority ordering under which the guided mechanism reproduces
    the given Pareto optimal matching exactly.

    The matched pairs are served in pair-priority order; leftover quota
    copies are appended by applicant id and cannot change the outcome.
    """
    from .envy import is_pareto_optimal

    check = is_pareto_optimal(instance, pom)
    if not check:
        raise NotParetoOptimalError(
            "cannot derive an ordering for a dominated matching")
    order = _pair_priority_order(instance, pom)
    sigma = [a for a, _ in order]
    for a in sorted(instance.applicants):
        sigma.extend([a] * (instance.quota[a] - len(pom.of_applicant(a))))
    return tuple(sigma)
