"""CRC initialization and purity-guided refinement."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .data import CondensedModel, Dataset, RefinementHistory, SoftAssignment, class_partition
from .kmeans import KMeansConfig, assign_nearest, kmeans_fit, sq_distances

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CondenseConfig:
    k_per_class: tuple[int, ...]
    step_scale: float = 1.0
    patience: int = 3
    max_iter: int = 100
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "k_per_class", tuple(int(k) for k in self.k_per_class))
        if not self.k_per_class or min(self.k_per_class) < 1:
            raise ValueError("every per-class k must be >= 1")
        if not (np.isfinite(self.step_scale) and self.step_scale > 0):
            raise ValueError(f"step_scale must be finite and positive, got {self.step_scale}")
        if self.patience < 0:
            raise ValueError("patience must be >= 0")
        if self.max_iter < 0:
            raise ValueError("max_iter must be >= 0")


@dataclass(frozen=True)
class PurityReport:
    per_center: np.ndarray
    population: np.ndarray
    overall: float


@dataclass
class StepDiagnostics:
    """What one refinement step decided, per center."""

    purity_before: np.ndarray | None = None
    purity_after: np.ndarray | None = None
    accepted: np.ndarray | None = None
    candidates: np.ndarray | None = None
    n_active: int = 0


def _counts_table(y: np.ndarray, assign: np.ndarray, m: int, n_classes: int) -> np.ndarray:
    """M x n_classes contingency table of nearest-center vs. true label."""
    table = np.zeros(m * n_classes, dtype=np.int64)
    np.add.at(table, assign * n_classes + y, 1)
    return table.reshape(m, n_classes)


def _n_classes(ds: Dataset, labels=None) -> int:
    n = ds.n_classes
    if labels is not None and len(labels):
        n = max(n, int(np.max(labels)) + 1)
    return max(n, 1)


def label_centers(ds: Dataset, centers: np.ndarray) -> np.ndarray:
    """Plurality label of each center's Voronoi cell.

    Ties go to the lowest class index. A center whose cell is empty takes the
    label of the instance closest to it.
    """
    centers = np.asarray(centers, dtype=np.float64)
    if centers.ndim != 2 or centers.shape[0] == 0:
        raise ValueError("need at least one center")
    m = centers.shape[0]
    if ds.n == 0:
        return np.zeros(m, dtype=np.int64)
    assign = assign_nearest(ds.instances, centers)
    table = _counts_table(ds.labels, assign, m, _n_classes(ds))
    labels = np.argmax(table, axis=1)
    empty = table.sum(axis=1) == 0
    if empty.any():
        nearest = np.argmin(sq_distances(centers[empty], ds.instances), axis=1)
        labels[empty] = ds.labels[nearest]
    return labels.astype(np.int64)


def popcount(ds: Dataset, centers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Ascending ids of populated centers and their instance counts."""
    if ds.n == 0:
        return np.zeros(0, np.int64), np.zeros(0, np.int64)
    assign = assign_nearest(ds.instances, centers)
    ids, counts = np.unique(assign, return_counts=True)
    return ids.astype(np.int64), counts.astype(np.int64)


def purities(ds: Dataset, model: CondensedModel) -> PurityReport:
    if model.m == 0:
        raise ValueError("model has no centers")
    m = model.m
    if ds.n == 0:
        return PurityReport(np.zeros(m), np.zeros(m, np.int64), 0.0)
    assign = assign_nearest(ds.instances, model.centers)
    table = _counts_table(ds.labels, assign, m, _n_classes(ds))
    pop = table.sum(axis=1)
    top = table.max(axis=1)
    per_center = np.where(pop > 0, top / np.maximum(pop, 1), 0.0)
    return PurityReport(per_center, pop, float(top.sum() / ds.n))


def overall_purity(ds: Dataset, model: CondensedModel) -> float:
    """Sum over cells of the plurality count, divided by N."""
    return purities(ds, model).overall


def initialize(ds: Dataset, cfg: CondenseConfig) -> CondensedModel:
    """Per-class k-means centers, then relabeled by plurality vote over all data."""
    ks = cfg.k_per_class
    if len(ks) != ds.n_classes:
        raise ValueError(f"got {len(ks)} per-class k values for {ds.n_classes} classes")
    parts = class_partition(ds)
    for c, (idx, k) in enumerate(zip(parts, ks)):
        if len(idx) < k:
            raise ValueError(f"class {c} has {len(idx)} instances, fewer than k={k}")
    blocks = []
    for c, (idx, k) in enumerate(zip(parts, ks)):
        # a distinct, reproducible stream per class
        seed = int(np.random.SeedSequence([cfg.seed, c]).generate_state(1, np.uint64)[0])
        blocks.append(kmeans_fit(ds.instances[idx], KMeansConfig(k=k, seed=seed)))
    centers = np.vstack(blocks)
    return CondensedModel(centers, label_centers(ds, centers), ks)


def soft_assign(points: np.ndarray, centers: np.ndarray) -> SoftAssignment:
    """Split each point between its two nearest centers.

    With squared distances ``q1 <= q2`` the weights are ``1 - q1/(q1+q2)`` and
    ``1 - q2/(q1+q2)``; a point sitting on both centers gets (0.5, 0.5).
    """
    centers = np.asarray(centers, dtype=np.float64)
    if centers.ndim != 2 or centers.shape[0] < 2:
        raise ValueError("soft assignment needs at least two centers")
    d = sq_distances(points, centers)
    n = d.shape[0]
    order = np.argsort(d, axis=1, kind="stable")[:, :2]
    first, second = order[:, 0], order[:, 1]
    rows = np.arange(n)
    q1, q2 = d[rows, first], d[rows, second]
    total = q1 + q2
    safe = np.where(total > 0, total, 1.0)
    w2 = np.where(total > 0, q1 / safe, 0.5)
    w1 = 1.0 - w2
    return SoftAssignment(first.astype(np.int64), second.astype(np.int64), w1, w2)


def correctness(center_labels: np.ndarray, soft: SoftAssignment, y: np.ndarray) -> SoftAssignment:
    center_labels = np.asarray(center_labels)
    y = np.asarray(y)
    soft.first_correct = center_labels[soft.first_id] == y
    soft.second_correct = center_labels[soft.second_id] == y
    return soft


def activity_mask(soft: SoftAssignment) -> SoftAssignment:
    if soft.first_correct is None or soft.second_correct is None:
        raise ValueError("correctness flags must be filled before the activity mask")
    soft.active = np.logical_xor(soft.first_correct, soft.second_correct)
    return soft


def advancement_vectors(ds: Dataset, centers: np.ndarray, soft: SoftAssignment) -> np.ndarray:
    """Mean signed, weighted displacement of each center toward its active instances.

    Every active instance contributes to both of its centers: ``+w (x - c)``
    where the center's label matches the instance, ``-w (x - c)`` where not.
    """
    centers = np.asarray(centers, dtype=np.float64)
    if soft.active is None:
        raise ValueError("activity mask must be filled before computing advancement")
    m, dim = centers.shape
    act = np.flatnonzero(soft.active)
    ids = np.concatenate([soft.first_id[act], soft.second_id[act]])
    w = np.concatenate([soft.first_weight[act], soft.second_weight[act]])
    sign = np.where(np.concatenate([soft.first_correct[act], soft.second_correct[act]]), 1.0, -1.0)
    x = np.concatenate([ds.instances[act], ds.instances[act]])
    contrib = (sign * w)[:, None] * (x - centers[ids])
    sums = np.zeros((m, dim))
    np.add.at(sums, ids, contrib)
    counts = np.bincount(ids, minlength=m)
    return np.where(counts[:, None] > 0, sums / np.maximum(counts, 1)[:, None], 0.0)


def _isolated_move_purity(ds, d, candidates, n_classes):
    """Purity of each center's cell when only that center moves to its candidate.

    ``d`` holds squared distances to the current centers; all other centers stay put.
    """
    n, m = d.shape
    order = np.argsort(d, axis=1, kind="stable")
    best, runner = order[:, 0], order[:, 1] if m > 1 else order[:, 0]
    rows = np.arange(n)
    dn = sq_distances(ds.instances, candidates)
    out = np.zeros(m)
    for i in range(m):
        other = np.where(best == i, runner, best)
        od = d[rows, other]
        # the moved center wins ties against higher-index competitors only
        mine = (dn[:, i] < od) | ((dn[:, i] == od) & (i < other)) if m > 1 else np.ones(n, bool)
        cnt = np.bincount(ds.labels[mine], minlength=n_classes)
        tot = cnt.sum()
        out[i] = cnt.max() / tot if tot else 0.0
    return out


def select_advance(ds: Dataset, model: CondensedModel, candidates: np.ndarray,
                   diagnostics: StepDiagnostics | None = None) -> CondensedModel:
    """Accept a center's candidate position only if its own cell purity strictly improves.

    Each center is judged with every other center at its pre-step position.
    Accepted moves are then applied together and the result is relabeled.
    """
    candidates = np.asarray(candidates, dtype=np.float64)
    if candidates.shape != model.centers.shape:
        raise ValueError("candidates must match the center matrix shape")
    before = purities(ds, model).per_center
    d = sq_distances(ds.instances, model.centers)
    after = _isolated_move_purity(ds, d, candidates, _n_classes(ds, model.center_labels))
    accept = after > before
    centers = np.where(accept[:, None], candidates, model.centers)
    if diagnostics is not None:
        diagnostics.purity_before = before
        diagnostics.purity_after = after
        diagnostics.accepted = accept
        diagnostics.candidates = candidates
    return model.with_centers(centers, label_centers(ds, centers))


def refine_step(ds: Dataset, model: CondensedModel, cfg: CondenseConfig,
                diagnostics: StepDiagnostics | None = None) -> CondensedModel:
    """One refinement iteration; ``model`` is left untouched."""
    soft = soft_assign(ds.instances, model.centers)
    soft = activity_mask(correctness(model.center_labels, soft, ds.labels))
    if diagnostics is not None:
        diagnostics.n_active = int(soft.active.sum())
    adv = advancement_vectors(ds, model.centers, soft)
    candidates = model.centers + cfg.step_scale * adv
    return select_advance(ds, model, candidates, diagnostics)


def drop_empty(ds: Dataset, model: CondensedModel) -> CondensedModel:
    """Remove centers that own no instance; nearest-center predictions are unchanged."""
    if ds.n == 0:
        return model
    pop = np.bincount(assign_nearest(ds.instances, model.centers), minlength=model.m)
    keep = pop > 0
    if keep.all():
        return model
    return model.with_centers(model.centers[keep], model.center_labels[keep])


def condense(ds: Dataset, cfg: CondenseConfig, on_step=None) -> tuple[CondensedModel, RefinementHistory]:
    """Initialize, then refine while tracking overall purity; return the purest snapshot.

    Stops after ``cfg.patience`` consecutive iterations without beating the best
    purity, at ``cfg.max_iter`` refinement steps, or once purity reaches 1.
    ``on_step(iteration, model, diagnostics)`` is called after every step.
    """
    model = initialize(ds, cfg)
    trace = [overall_purity(ds, model)]
    best_model, best = model, trace[0]
    stale = 0
    for it in range(1, cfg.max_iter + 1):
        if best >= 1.0 or model.m < 2:
            break
        diag = StepDiagnostics()
        model = refine_step(ds, model, cfg, diag)
        p = overall_purity(ds, model)
        trace.append(p)
        if on_step is not None:
            on_step(it, model, diag)
        log.debug("iteration %d: purity %.6f, %d active, %d moved",
                  it, p, diag.n_active, int(diag.accepted.sum()))
        if not diag.accepted.any():
            # nothing moved: every later step would repeat this one
            break
        if p > best:
            best_model, best, stale = model, p, 0
        else:
            stale += 1
            if stale >= cfg.patience:
                break
    history = RefinementHistory.from_trace(trace)
    return drop_empty(ds, best_model), history
