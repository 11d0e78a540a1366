"""Synchronous round engine, signature ledger, scenarios and transcripts.

Execution model
---------------
Rounds are numbered from 1. In every round the engine

1. collects each honest node's outbox,
2. hands the complete set of honest round-r messages to the adversary, which
   then emits messages on behalf of faulty ids (rushing: it reacts to honest
   traffic of the same round),
3. delivers to every honest node the messages addressed to it, ordered by
   sender id,
4. lets the adversary observe the full round (it is omniscient).

A run terminates when every honest node has decided, or fails to terminate
once the round budget 4*(n+2) is exhausted.

Payloads are plain tuples of ints, strings, None and nested tuples. On the
wire (transcripts, scenario files) a payload is rendered canonically as
minified JSON with tuples as arrays; the documented byte form is a 4-byte
big-endian length prefix followed by that JSON in UTF-8. Two runs of the
same (scenario, seed) produce byte-identical transcripts.

Signatures are modeled by an append-only ledger. mint(signer, digest)
returns a deterministic token (sha256 of signer and digest, truncated); the
ledger records who minted what. verify succeeds only for recorded pairs, and
the engine refuses to hand adversaries a signer for an honest id, which is
what makes signatures unforgeable here. Tokens are deterministic functions
of (signer, digest) so that indistinguishable configurations stay
byte-identical across runs.
"""

from __future__ import annotations

import hashlib
import json
import operator
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Optional, Sequence, Union

from .core import Configuration, as_alpha, check_alpha, check_mode

SCHEMA_VERSION = 1

PROTOCOLS = ("pred_ba", "auth_pred_ba", "phase_king", "dolev_strong_ba",
             "dolev_strong_broadcast")


class ForgeryError(Exception):
    """Raised when something would require signing on behalf of an honest id."""


# ---------------------------------------------------------------------------
# Canonical payload encoding
# ---------------------------------------------------------------------------


def _jsonable(x):
    if isinstance(x, tuple):
        return [_jsonable(v) for v in x]
    if isinstance(x, (str, int, type(None))):
        return x
    raise TypeError(f"payload element {x!r} is not wire-encodable")


def _tupled(x):
    if isinstance(x, list):
        return tuple(_tupled(v) for v in x)
    return x


def payload_to_json(payload) -> str:
    """Canonical JSON form of a payload (tuples rendered as arrays)."""
    return json.dumps(_jsonable(payload), separators=(",", ":"), sort_keys=True)


def payload_from_json(text: str):
    return _tupled(json.loads(text))


def payload_to_bytes(payload) -> bytes:
    """Documented wire form: 4-byte big-endian length + canonical JSON."""
    body = payload_to_json(payload).encode("utf-8")
    return len(body).to_bytes(4, "big") + body


def payload_digest(payload) -> str:
    return hashlib.sha256(payload_to_json(payload).encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# Signature ledger
# ---------------------------------------------------------------------------


class SignatureLedger:
    """Append-only record of minted (signer, digest) pairs.

    Tokens are deterministic so identical causal histories yield identical
    bytes; unforgeability comes from the minting discipline, not from token
    secrecy.
    """

    def __init__(self):
        self._minted = {}  # (signer, digest) -> token
        self._minted_by_adversary = set()

    @staticmethod
    def _token(signer: int, digest: str) -> str:
        return hashlib.sha256(f"{signer}|{digest}".encode()).hexdigest()[:16]

    def mint(self, signer: int, digest: str, *, adversarial: bool = False) -> str:
        tok = self._token(signer, digest)
        self._minted[(signer, digest)] = tok
        if adversarial:
            self._minted_by_adversary.add((signer, digest))
        return tok

    def verify(self, token: str, signer: int, digest: str) -> bool:
        return self._minted.get((signer, digest)) == token

    def honest_integrity(self, honest: frozenset) -> bool:
        """True iff no honest id's signature was ever minted adversarially."""
        return not any(s in honest for s, _ in self._minted_by_adversary)


class Signer:
    """A node's signing capability, bound to the run's ledger."""

    def __init__(self, ledger: SignatureLedger, node_id: int, *, adversarial: bool = False):
        self._ledger = ledger
        self.node_id = node_id
        self._adversarial = adversarial

    def sign(self, digest: str) -> str:
        return self._ledger.mint(self.node_id, digest, adversarial=self._adversarial)

    def verify(self, token: str, signer: int, digest: str) -> bool:
        return self._ledger.verify(token, signer, digest)


class _RefusingSigner:
    """Stand-in signer for shadow instances in nonauth mode (never signs)."""

    def __init__(self, node_id: int):
        self.node_id = node_id

    def sign(self, digest: str) -> str:
        raise ForgeryError(f"instance of node {self.node_id} has no signing key")

    def verify(self, token: str, signer: int, digest: str) -> bool:
        return False


# ---------------------------------------------------------------------------
# Scenario description
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AdversarySpec:
    """Serializable adversary description (name + JSON-able params)."""

    name: str
    params: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "params", dict(self.params))


@dataclass(frozen=True)
class Scenario:
    """A complete, serializable description of one simulation run."""

    n: int
    mode: str
    alpha: Fraction
    config: Configuration
    prediction: Union[frozenset, Mapping, None]
    adversary: AdversarySpec
    seed: int
    protocol: str
    params: Mapping = field(default_factory=dict)

    def __post_init__(self):
        check_mode(self.mode)
        object.__setattr__(self, "alpha", check_alpha(self.mode, self.alpha))
        if self.n != self.config.n:
            raise ValueError("scenario n disagrees with configuration n")
        if self.protocol not in PROTOCOLS:
            raise ValueError(f"unknown protocol {self.protocol!r}")
        pred = self.prediction
        if pred is not None and not isinstance(pred, Mapping):
            object.__setattr__(self, "prediction", frozenset(pred))
        elif isinstance(pred, Mapping):
            object.__setattr__(
                self, "prediction", {int(k): frozenset(v) for k, v in pred.items()}
            )
        object.__setattr__(self, "params", dict(self.params))

    def prediction_for(self, node_id: int):
        """The prediction as seen by one node (handles the local case)."""
        if isinstance(self.prediction, Mapping):
            return self.prediction.get(node_id, frozenset())
        return self.prediction

    def to_json(self) -> dict:
        pred = self.prediction
        if isinstance(pred, Mapping):
            pred_j = {"local": {str(k): sorted(v) for k, v in pred.items()}}
        elif pred is None:
            pred_j = None
        else:
            pred_j = {"global": sorted(pred)}
        return {
            "schema_version": SCHEMA_VERSION,
            "n": self.n,
            "mode": self.mode,
            "alpha": str(self.alpha),
            "faulty": sorted(self.config.faulty),
            "inputs": {str(k): v for k, v in sorted(self.config.inputs.items())},
            "prediction": pred_j,
            "adversary": {"name": self.adversary.name, "params": self.adversary.params},
            "seed": self.seed,
            "protocol": self.protocol,
            "params": dict(self.params),
        }

    @staticmethod
    def from_json(doc: Mapping) -> "Scenario":
        if doc.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(
                f"unsupported scenario schema_version {doc.get('schema_version')!r}"
            )
        pred_j = doc.get("prediction")
        if pred_j is None:
            pred = None
        elif "global" in pred_j:
            pred = frozenset(pred_j["global"])
        elif "local" in pred_j:
            pred = {int(k): frozenset(v) for k, v in pred_j["local"].items()}
        else:
            raise ValueError("prediction must be null or carry 'global'/'local'")
        config = Configuration(
            n=int(doc["n"]),
            faulty=frozenset(doc["faulty"]),
            inputs={int(k): int(v) for k, v in doc["inputs"].items()},
        )
        adv = doc.get("adversary") or {"name": "silent", "params": {}}
        return Scenario(
            n=int(doc["n"]),
            mode=doc["mode"],
            alpha=Fraction(doc["alpha"]),
            config=config,
            prediction=pred,
            adversary=AdversarySpec(adv["name"], adv.get("params", {})),
            seed=int(doc["seed"]),
            protocol=doc["protocol"],
            params=doc.get("params", {}),
        )


# ---------------------------------------------------------------------------
# Run results
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Outcome:
    decisions: Mapping  # honest id -> 0/1
    decided_round: Optional[int]
    agreement: bool
    validity: bool
    termination: bool


@dataclass
class RoundLog:
    round: int
    sent: list  # (receiver, canonical payload json)
    received: list  # (sender, canonical payload json)


@dataclass
class Transcript:
    node: int
    rounds: list  # RoundLog

    def to_json(self) -> dict:
        return {
            "node": self.node,
            "rounds": [
                {
                    "round": r.round,
                    "sent": [{"to": to, "payload": p} for to, p in r.sent],
                    "received": [{"from": frm, "payload": p} for frm, p in r.received],
                }
                for r in self.rounds
            ],
        }


def round_budget(n: int) -> int:
    return 4 * (n + 2)


_BY_SENDER = operator.itemgetter(0)


# ---------------------------------------------------------------------------
# Contexts handed to protocol instances and adversaries
# ---------------------------------------------------------------------------


@dataclass
class NodeCtx:
    """Everything a protocol instance may know at start."""

    node_id: int
    n: int
    mode: str
    alpha: Fraction
    input: int
    prediction: object  # frozenset, or None for bare protocols
    signer: object
    params: Mapping


class AdversaryCtx:
    """The adversary's (omniscient) view plus its minting capabilities."""

    def __init__(self, engine: "_Engine"):
        self._engine = engine
        sc = engine.scenario
        self.scenario = sc
        self.n = sc.n
        self.mode = sc.mode
        self.faulty = sc.config.faulty
        self.honest = sc.config.honest
        self.honest_inputs = dict(sc.config.inputs)
        self.derive = engine.derived_seed
        self.rng = random.Random(engine.derived_seed("adversary"))

    def signer_for(self, node_id: int) -> Signer:
        if node_id not in self.faulty:
            raise ForgeryError(f"adversary asked for honest node {node_id}'s key")
        return Signer(self._engine.ledger, node_id, adversarial=True)

    def make_instance(self, node_id: int, input_bit: int, prediction):
        """Build a protocol instance the adversary runs internally.

        Instances for faulty ids sign with their own (adversary-held) keys.
        Instances for honest ids are only possible in nonauth mode; in auth
        mode they would need to forge, so this raises.
        """
        if node_id in self.faulty:
            signer = self.signer_for(node_id)
        elif self.mode == "auth":
            raise ForgeryError(
                f"auth mode: cannot run an instance of honest node {node_id} "
                f"without forging its signatures"
            )
        else:
            signer = _RefusingSigner(node_id)
        return self._engine.build_instance(node_id, input_bit, prediction, signer)


class AdversaryStrategy:
    """Base adversary: silent. Subclasses override emit/observe."""

    def begin(self, ctx: AdversaryCtx) -> None:
        self.ctx = ctx

    def emit(self, rnd: int, honest_messages: Sequence) -> list:
        """Messages (sender, receivers, payload) for faulty ids this round.

        honest_messages is the complete list of honest round-rnd traffic
        (sender, receivers, payload); a rushing strategy may depend on it.
        """
        return []

    def observe(self, rnd: int, all_messages: Sequence) -> None:
        """Called after delivery with every message of the round."""


# ---------------------------------------------------------------------------
# Engine
# ---------------------------------------------------------------------------


class _Engine:
    def __init__(self, scenario: Scenario, factory: Callable, adversary: AdversaryStrategy):
        self.scenario = scenario
        self.factory = factory
        self.adversary = adversary
        self.ledger = SignatureLedger()

    def derived_seed(self, *parts) -> int:
        blob = "|".join([str(self.scenario.seed), *map(str, parts)])
        return int.from_bytes(hashlib.sha256(blob.encode()).digest()[:8], "big")

    def build_instance(self, node_id: int, input_bit: int, prediction, signer):
        sc = self.scenario
        ctx = NodeCtx(
            node_id=node_id,
            n=sc.n,
            mode=sc.mode,
            alpha=sc.alpha,
            input=input_bit,
            prediction=prediction,
            signer=signer,
            params=sc.params,
        )
        return self.factory(ctx)

    def run(self, record_transcripts: bool):
        sc = self.scenario
        honest = sorted(sc.config.honest)
        nodes = {}
        for i in honest:
            signer = Signer(self.ledger, i)
            nodes[i] = self.build_instance(i, sc.config.inputs[i], sc.prediction_for(i), signer)

        self.adversary.begin(AdversaryCtx(self))

        logs = {i: [] for i in honest} if record_transcripts else None
        decided_round = {}
        budget = round_budget(sc.n)
        rnd = 0
        while rnd < budget and len(decided_round) < len(honest):
            rnd += 1
            honest_msgs = []
            for i in honest:
                for receivers, payload in nodes[i].outbox(rnd):
                    honest_msgs.append((i, tuple(receivers), payload))
            faulty_msgs = []
            for sender, receivers, payload in self.adversary.emit(rnd, tuple(honest_msgs)):
                if sender not in sc.config.faulty:
                    raise ForgeryError(
                        f"adversary tried to send as honest node {sender}"
                    )
                faulty_msgs.append((sender, tuple(receivers), payload))
            all_msgs = honest_msgs + faulty_msgs

            inboxes = {i: [] for i in honest}
            for sender, receivers, payload in all_msgs:
                for r in receivers:
                    if r in inboxes:
                        inboxes[r].append((sender, payload))
            for i in honest:
                inboxes[i].sort(key=_BY_SENDER)
                nodes[i].deliver(rnd, inboxes[i])
                if i not in decided_round and nodes[i].decision is not None:
                    decided_round[i] = rnd

            self.adversary.observe(rnd, tuple(all_msgs))

            if record_transcripts:
                for i in honest:
                    sent = []
                    for sender, receivers, payload in honest_msgs:
                        if sender == i:
                            pj = payload_to_json(payload)
                            sent.extend((r, pj) for r in sorted(receivers))
                    received = [(s, payload_to_json(p)) for s, p in inboxes[i]]
                    logs[i].append(RoundLog(round=rnd, sent=sent, received=received))

        if not self.ledger.honest_integrity(sc.config.honest):
            raise ForgeryError("ledger audit: honest signature minted by the adversary")

        decisions = {i: nodes[i].decision for i in honest if nodes[i].decision is not None}
        terminated = len(decisions) == len(honest)
        last = max(decided_round.values()) if decided_round else 0
        agreement = terminated and len(set(decisions.values())) <= 1
        inputs = set(sc.config.inputs.values())
        if not terminated:
            validity = False
        elif len(inputs) == 1:
            (b,) = inputs
            validity = all(v == b for v in decisions.values())
        else:
            validity = True
        outcome = Outcome(
            decisions=decisions,
            decided_round=last if terminated else None,
            agreement=agreement,
            validity=validity,
            termination=terminated,
        )
        transcripts = (
            [Transcript(node=i, rounds=logs[i]) for i in honest] if record_transcripts else []
        )
        return outcome, transcripts


def run_simulation(
    scenario: Scenario,
    protocol: Optional[Callable] = None,
    adversary: Optional[AdversaryStrategy] = None,
    *,
    record_transcripts: bool = True,
):
    """Run one scenario; returns (Outcome, [Transcript per honest id]).

    protocol defaults to the factory registered for scenario.protocol, and
    adversary to the strategy built from scenario.adversary.
    """
    if protocol is None:
        from .registry import factory_for

        protocol = factory_for(scenario)
    if adversary is None:
        from .adversary import build_strategy

        adversary = build_strategy(scenario.adversary, scenario)
    return _Engine(scenario, protocol, adversary).run(record_transcripts)
