"""Maps a scenario's protocol name to a node-instance factory.

A factory takes the engine's NodeCtx and returns a protocol state machine.
Wrapper protocols derive their schedule from the prediction; bare protocols
take participants and budget t from scenario params, with defaults covering
the whole id space at the largest standard budget.
"""

from __future__ import annotations

import math

from .predba import AuthPredBA, PredBA
from .protocols import DolevStrongBA, DolevStrongBroadcast, PhaseKing
from .simnet import NodeCtx


def _require_mode(ctx: NodeCtx, mode: str, protocol: str):
    if ctx.mode != mode:
        raise ValueError(f"protocol {protocol!r} runs in {mode} mode, not {ctx.mode}")


def _participants(ctx: NodeCtx):
    p = ctx.params.get("participants")
    return tuple(sorted(p)) if p else tuple(range(1, ctx.n + 1))


def _pred(ctx: NodeCtx):
    return ctx.prediction if ctx.prediction is not None else frozenset()


def factory_for(scenario):
    name = scenario.protocol

    if name == "pred_ba":

        def make(ctx: NodeCtx):
            _require_mode(ctx, "nonauth", name)
            return PredBA(ctx.node_id, ctx.input, _pred(ctx), ctx.alpha, ctx.n)

    elif name == "auth_pred_ba":

        def make(ctx: NodeCtx):
            _require_mode(ctx, "auth", name)
            return AuthPredBA(ctx.node_id, ctx.input, _pred(ctx), ctx.alpha, ctx.n, ctx.signer)

    elif name == "phase_king":

        def make(ctx: NodeCtx):
            _require_mode(ctx, "nonauth", name)
            group = _participants(ctx)
            t = ctx.params.get("t", math.ceil(len(group) / 3) - 1)
            return PhaseKing(ctx.node_id, ctx.input, group, t)

    elif name == "dolev_strong_ba":

        def make(ctx: NodeCtx):
            _require_mode(ctx, "auth", name)
            group = _participants(ctx)
            t = ctx.params.get("t", math.ceil(len(group) / 2) - 1)
            return DolevStrongBA(ctx.node_id, ctx.input, group, t, ctx.signer)

    elif name == "dolev_strong_broadcast":

        def make(ctx: NodeCtx):
            _require_mode(ctx, "auth", name)
            group = _participants(ctx)
            t = ctx.params.get("t", math.ceil(len(group) / 2) - 1)
            sender = ctx.params.get("sender", group[0])
            return DolevStrongBroadcast(ctx.node_id, sender, ctx.input, group, t, ctx.signer)

    else:
        raise ValueError(f"unknown protocol {name!r}")

    return make
