"""Best-first search over HTN nodes with pluggable node evaluation.

The search makes no assumption about how node scores are produced: the node
evaluator is arbitrary user code returning a comparable value or None
("unevaluable", which prunes the node). The shipped evaluators are random path
completion (sample up to k completions beneath a node, score the node by the
best completed plan) and exhaustive subtree enumeration (the testing oracle).

Results are anytime: every improving goal plan is appended to a solution log,
and the search stops on open-list exhaustion or when the overall deadline
passes. Returned plans are candidates, not certified optima.
"""

from __future__ import annotations

import heapq
import itertools
import json
import random
import time
from dataclasses import dataclass, field
from typing import Callable, IO, Iterable, Optional, Protocol

from .htn import Action, HTNProblem, SearchNode, initial_node, is_goal, plan_key, successors

Plan = tuple[Action, ...]

DIRECTIONS = ("maximize", "minimize")


class SearchError(Exception):
    """The search could not run at all (e.g. the root evaluation crashed)."""


class EvaluationFailure(Exception):
    """A plan evaluation failed or timed out; the sample is discarded."""

    def __init__(self, message: str = "", timed_out: bool = False):
        super().__init__(message or ("evaluation timed out" if timed_out else "evaluation failed"))
        self.timed_out = timed_out


class SubtreeCapExceeded(Exception):
    """exhaustive_evaluate hit its node cap; the subtree is too large."""


@dataclass
class SearchConfig:
    direction: str = "maximize"
    overall_timeout_s: Optional[float] = None
    per_eval_timeout_s: Optional[float] = None
    completions_per_node: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}")
        if self.overall_timeout_s is not None and self.overall_timeout_s <= 0:
            raise ValueError("overall_timeout_s must be positive")
        if self.per_eval_timeout_s is not None and self.per_eval_timeout_s <= 0:
            raise ValueError("per_eval_timeout_s must be positive")
        if self.completions_per_node < 1:
            raise ValueError("completions_per_node must be >= 1")


@dataclass(frozen=True)
class SolutionEntry:
    t: float
    plan: Plan
    score: float


@dataclass
class SearchStats:
    nodes_expanded: int = 0
    evaluations_run: int = 0
    evaluations_timed_out: int = 0
    nodes_pruned: int = 0
    goal_benchmarks: int = 0
    hit_overall_timeout: bool = False


@dataclass
class SearchResult:
    best_plan: Optional[Plan]
    best_score: Optional[float]
    solution_log: list[SolutionEntry] = field(default_factory=list)
    stats: SearchStats = field(default_factory=SearchStats)

    @property
    def found(self) -> bool:
        return self.best_plan is not None


class NodeEvaluator(Protocol):
    def evaluate(self, node: SearchNode, problem: HTNProblem, rng: random.Random,
                 deadline: Optional[float]) -> Optional[float]: ...


def _better(a: float, b: float, direction: str) -> bool:
    return a > b if direction == "maximize" else a < b


def _best(scores: Iterable[float], direction: str) -> float:
    return max(scores) if direction == "maximize" else min(scores)


# ---------------------------------------------------------------------------
# Plan evaluation with caching and tracing


class TraceWriter:
    """Line-delimited JSON log: one record per executed candidate evaluation."""

    def __init__(self, sink: IO[str]):
        self._sink = sink

    def record(self, plan: Plan, score: Optional[float], duration_s: float, error: Optional[str] = None) -> None:
        doc = {
            "ts": time.time(),
            "plan": [str(a) for a in plan],
            "score": score,
            "duration_s": duration_s,
        }
        if error is not None:
            doc["error"] = error
        self._sink.write(json.dumps(doc) + "\n")
        self._sink.flush()


class CachingPlanEvaluator:
    """Evaluate each distinct action sequence once; failures are cached too.

    Benchmark execution is expensive (deployment, training, HTTP round trips)
    and deterministic for a fixed split, so identical plans share one result.
    """

    def __init__(self, fn: Callable[[Plan], float], trace: Optional[TraceWriter] = None):
        self._fn = fn
        self._trace = trace
        self._cache: dict[str, object] = {}
        self.executions = 0
        self.failures = 0
        self.timeouts = 0
        self.durations: dict[str, float] = {}

    def __call__(self, plan: Plan) -> float:
        key = plan_key(plan)
        hit = self._cache.get(key)
        if hit is not None:
            if isinstance(hit, EvaluationFailure):
                raise EvaluationFailure(timed_out=hit.timed_out)
            return hit  # type: ignore[return-value]
        t0 = time.monotonic()
        try:
            score = self._fn(plan)
        except EvaluationFailure as exc:
            self.executions += 1
            self.failures += 1
            if exc.timed_out:
                self.timeouts += 1
            self._cache[key] = exc
            if self._trace:
                self._trace.record(plan, None, time.monotonic() - t0, error=str(exc))
            raise
        duration = time.monotonic() - t0
        self.executions += 1
        self._cache[key] = score
        self.durations[key] = duration
        if self._trace:
            self._trace.record(plan, score, duration)
        return score


# ---------------------------------------------------------------------------
# Node evaluators


def random_completion_evaluate(node: SearchNode, problem: HTNProblem,
                               plan_evaluator: Callable[[Plan], float], k: int, rng: random.Random,
                               direction: str = "maximize", deadline: Optional[float] = None,
                               max_attempts: Optional[int] = None,
                               max_depth: int = 10_000) -> Optional[float]:
    """Score a node by the best plan among up to k random completions.

    Each completion extends the node's plan by picking a uniformly random
    applicable successor until a goal is reached; a dead end aborts the walk
    and another attempt is made, up to max_attempts (default 2k) walks total.
    Samples whose evaluation fails are discarded. With no usable sample the
    node is unevaluable (None).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if is_goal(node):
        try:
            return plan_evaluator(node.plan)
        except EvaluationFailure:
            return None
    budget = max_attempts if max_attempts is not None else 2 * k
    plans: list[Plan] = []
    attempts = 0
    while len(plans) < k and attempts < budget:
        attempts += 1
        cur = node
        for _ in range(max_depth):
            if is_goal(cur):
                break
            kids = successors(cur, problem)
            if not kids:
                break
            cur = kids[rng.randrange(len(kids))]
        if is_goal(cur):
            plans.append(cur.plan)
        if deadline is not None and time.monotonic() >= deadline:
            break
    scores: list[float] = []
    for p in plans:
        try:
            scores.append(plan_evaluator(p))
        except EvaluationFailure:
            pass
        if deadline is not None and time.monotonic() >= deadline:
            break
    if not scores:
        return None
    return _best(scores, direction)


def exhaustive_evaluate(node: SearchNode, problem: HTNProblem,
                        plan_evaluator: Callable[[Plan], float], direction: str = "maximize",
                        node_cap: int = 100_000) -> Optional[float]:
    """Best plan score over ALL completions beneath a node (testing oracle)."""
    scores: list[float] = []
    visited = 0
    stack = [node]
    while stack:
        cur = stack.pop()
        visited += 1
        if visited > node_cap:
            raise SubtreeCapExceeded(f"subtree exceeds {node_cap} nodes")
        if is_goal(cur):
            try:
                scores.append(plan_evaluator(cur.plan))
            except EvaluationFailure:
                pass
            continue
        stack.extend(reversed(successors(cur, problem)))
    if not scores:
        return None
    return _best(scores, direction)


def enumerate_goal_plans(problem: HTNProblem, cap: int = 100_000,
                         start: Optional[SearchNode] = None) -> list[Plan]:
    """Depth-first enumeration of every goal plan; the brute-force oracle."""
    plans: list[Plan] = []
    visited = 0
    stack = [start if start is not None else initial_node(problem)]
    while stack:
        cur = stack.pop()
        visited += 1
        if visited > cap:
            raise SubtreeCapExceeded(f"expansion exceeds {cap} nodes")
        if is_goal(cur):
            plans.append(cur.plan)
            continue
        stack.extend(reversed(successors(cur, problem)))
    return plans


class RandomCompletionEvaluator:
    def __init__(self, plan_evaluator: Callable[[Plan], float], k: int = 3,
                 direction: str = "maximize", max_attempts: Optional[int] = None):
        self.plan_evaluator = plan_evaluator
        self.k = k
        self.direction = direction
        self.max_attempts = max_attempts

    def evaluate(self, node, problem, rng, deadline=None):
        return random_completion_evaluate(
            node, problem, self.plan_evaluator, self.k, rng,
            direction=self.direction, deadline=deadline, max_attempts=self.max_attempts,
        )


class ExhaustiveEvaluator:
    def __init__(self, plan_evaluator: Callable[[Plan], float], direction: str = "maximize",
                 node_cap: int = 100_000):
        self.plan_evaluator = plan_evaluator
        self.direction = direction
        self.node_cap = node_cap

    def evaluate(self, node, problem, rng, deadline=None):
        return exhaustive_evaluate(node, problem, self.plan_evaluator,
                                   direction=self.direction, node_cap=self.node_cap)


# ---------------------------------------------------------------------------
# The search itself


def best_first_search(problem: HTNProblem, evaluator: NodeEvaluator,
                      plan_evaluator: Callable[[Plan], float], config: SearchConfig) -> SearchResult:
    """Best-first search with FIFO tie-breaking and anytime solution logging.

    Children are generated by forward decomposition; non-goal children are
    scored by the node evaluator and pushed (unevaluable ones are pruned), goal
    children are benchmarked by the plan evaluator and logged when improving.
    Terminates on open-list exhaustion or the overall deadline.
    """
    t0 = time.monotonic()
    deadline = t0 + config.overall_timeout_s if config.overall_timeout_s else None
    stats = SearchStats()
    log: list[SolutionEntry] = []
    result = SearchResult(None, None, log, stats)

    def out_of_time() -> bool:
        if deadline is not None and time.monotonic() >= deadline:
            stats.hit_overall_timeout = True
            return True
        return False

    def benchmark_goal(node: SearchNode) -> None:
        stats.goal_benchmarks += 1
        try:
            score = plan_evaluator(node.plan)
        except EvaluationFailure:
            return
        if result.best_score is None or _better(score, result.best_score, config.direction):
            result.best_plan = node.plan
            result.best_score = score
            log.append(SolutionEntry(time.time(), node.plan, score))

    eval_seq = itertools.count()

    def eval_rng() -> random.Random:
        return random.Random(f"{config.seed}:{next(eval_seq)}")

    def sort_key(score: float) -> float:
        return -score if config.direction == "maximize" else score

    root = initial_node(problem)
    if is_goal(root):
        benchmark_goal(root)
        return result

    try:
        root_score = evaluator.evaluate(root, problem, eval_rng(), deadline)
    except EvaluationFailure:
        root_score = None
    except Exception as exc:
        raise SearchError(f"node evaluator failed on the root node: {exc}") from exc
    stats.evaluations_run += 1
    tie = itertools.count()
    heap: list = []
    if root_score is None:
        stats.nodes_pruned += 1
    else:
        heapq.heappush(heap, (sort_key(root_score), next(tie), root))

    while heap:
        if out_of_time():
            break
        _, _, node = heapq.heappop(heap)
        children = successors(node, problem)
        stats.nodes_expanded += 1
        for child in children:
            if out_of_time():
                break
            if is_goal(child):
                benchmark_goal(child)
                continue
            score = evaluator.evaluate(child, problem, eval_rng(), deadline)
            stats.evaluations_run += 1
            if score is None:
                stats.nodes_pruned += 1
            else:
                heapq.heappush(heap, (sort_key(score), next(tie), child))

    stats.evaluations_timed_out = getattr(plan_evaluator, "timeouts", 0)
    return result


def run_search(problem: HTNProblem, objective: Callable[[Plan], float], config: SearchConfig,
               trace_sink: Optional[IO[str]] = None,
               evaluator_factory: Optional[Callable[[CachingPlanEvaluator], NodeEvaluator]] = None,
               ) -> tuple[SearchResult, CachingPlanEvaluator]:
    """Wire the usual stack: cached objective + random-completion evaluator."""
    cached = CachingPlanEvaluator(objective, TraceWriter(trace_sink) if trace_sink else None)
    if evaluator_factory is None:
        evaluator = RandomCompletionEvaluator(cached, k=config.completions_per_node,
                                              direction=config.direction)
    else:
        evaluator = evaluator_factory(cached)
    result = best_first_search(problem, evaluator, cached, config)
    return result, cached
