"""Prediction generators: perfect, seeded-error, worst-case, local."""

from __future__ import annotations

import random
from typing import Mapping, Sequence

from .core import Configuration


def perfect(config: Configuration) -> frozenset:
    """The error-free prediction: exactly the honest set."""
    return config.honest


def with_error(config: Configuration, eta_F: int, eta_H: int, seed: int) -> frozenset:
    """A prediction with exactly eta_F faulty inclusions and eta_H honest
    omissions, sampled reproducibly from seed."""
    faulty, honest = sorted(config.faulty), sorted(config.honest)
    if not (0 <= eta_F <= len(faulty)):
        raise ValueError(f"eta_F must lie in [0, {len(faulty)}], got {eta_F}")
    if not (0 <= eta_H <= len(honest)):
        raise ValueError(f"eta_H must lie in [0, {len(honest)}], got {eta_H}")
    rng = random.Random(seed)
    wrong = rng.sample(faulty, eta_F)
    missed = set(rng.sample(honest, eta_H))
    return frozenset(wrong) | (config.honest - missed)


def worst_case(config: Configuration, eta: int) -> frozenset:
    """Deterministic error-eta prediction biased the harmful way.

    Spends as much of the budget as possible on trusting faulty ids
    (eta_F = min(eta, f)), the remainder on dropping honest ones; lowest ids
    are picked in both cases.
    """
    faulty, honest = sorted(config.faulty), sorted(config.honest)
    if not (0 <= eta <= config.n):
        raise ValueError(f"eta must lie in [0, {config.n}], got {eta}")
    eta_F = min(eta, len(faulty))
    eta_H = eta - eta_F
    if eta_H > len(honest):
        raise ValueError(f"eta={eta} not realizable: at most {len(faulty)} faulty "
                         f"and {len(honest)} honest ids")
    return frozenset(faulty[:eta_F]) | (config.honest - set(honest[:eta_H]))


def local_from_global(preds: Sequence, assignment: Mapping) -> dict:
    """Give each node one of several global predictions.

    preds is a list of predictions, assignment maps node id -> index.
    """
    out = {}
    for node, idx in assignment.items():
        if not (0 <= idx < len(preds)):
            raise ValueError(f"assignment of node {node} points at missing index {idx}")
        out[int(node)] = frozenset(preds[idx])
    return out
