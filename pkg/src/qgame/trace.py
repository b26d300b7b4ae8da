"""Proof-trace data model and its byte-stable JSON encoding.

A trace is an ordered list of rule instances. Each step names its rule, the
earlier steps it relies on, the game it talks about, and what it claims about
that game's value.

Value claims are affine: ``coef * V[unknown] + value``. Almost every claim is
concrete (``coef == 0``); the affine form exists so that the two
"same game, two expressions, solve" arguments can be written down as local
steps before the unknown value is solved for.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Optional, Union

from .core import (
    Q,
    ExactState,
    GameError,
    NumericState,
    numeric_from_json,
    numeric_to_json,
    state_from_json,
    state_to_json,
    to_rational,
)

RULES = (
    "R_EIG",
    "R_CONST",
    "R_SHIFT",
    "R_ZERO",
    "R_SUBST",
    "R_PHASE",
    "R_EQN",
    "R_EXPAND",
    "R_DOM",
)

CLAIM_KINDS = ("value", "lower", "upper")


class MalformedTrace(ValueError):
    """The trace cannot be parsed into steps at all (distinct from rejection)."""


@dataclass(frozen=True)
class Claim:
    kind: str = "value"
    value: Q = Q(0)
    coef: Q = Q(0)
    unknown: Optional[ExactState] = None

    @classmethod
    def exact(cls, value: Q) -> "Claim":
        return cls("value", value)

    @classmethod
    def affine(cls, coef: Q, const: Q, unknown: ExactState) -> "Claim":
        return cls("value", const, coef, unknown)

    @classmethod
    def bound(cls, kind: str, value: Q) -> "Claim":
        return cls(kind, value)

    @property
    def is_concrete(self) -> bool:
        return self.kind == "value" and self.coef == 0 and self.unknown is None

    def plus(self, k: Q) -> "Claim":
        return Claim(self.kind, self.value + k, self.coef, self.unknown)

    def negated(self) -> "Claim":
        return Claim(self.kind, -self.value, -self.coef, self.unknown)

    def __str__(self) -> str:
        if self.kind != "value":
            return f"{self.kind} {self.value}"
        if self.unknown is None:
            return str(self.value)
        return f"{self.coef}*V[{self.unknown}] + {self.value}"


@dataclass(frozen=True)
class DomSubject:
    """Subject of a dominance step: the enclosure and its rational rounding."""

    enclosure: NumericState
    rounded: ExactState


Subject = Union[ExactState, DomSubject]


@dataclass(frozen=True)
class AncillaPlan:
    """Per-block ancilla offsets; block ``a`` has ``block_sizes[a]`` offsets."""

    block_sizes: tuple[int, ...]
    offsets: tuple[tuple[Q, ...], ...]

    @property
    def total(self) -> int:
        return sum(self.block_sizes)


@dataclass(frozen=True, eq=False)
class RuleStep:
    id: int
    rule: str
    premises: tuple[int, ...]
    subject: Subject
    claim: Optional[Claim]
    params: dict = field(default_factory=dict)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RuleStep):
            return NotImplemented
        return step_to_json(self) == step_to_json(other)


@dataclass(frozen=True)
class ProofTrace:
    steps: tuple[RuleStep, ...]
    conclusion: int

    @property
    def final(self) -> RuleStep:
        return self.steps[self.conclusion]

    def __len__(self) -> int:
        return len(self.steps)

    def rules_used(self) -> set[str]:
        return {s.rule for s in self.steps}


# -- encoding -----------------------------------------------------------------

_RATIONAL_PARAMS = ("k", "a", "b", "c", "d", "assume")
_STATE_PARAMS = ("base", "outer")


def plan_to_json(plan: AncillaPlan) -> dict:
    return {
        "block_sizes": list(plan.block_sizes),
        "offsets": [[str(y) for y in block] for block in plan.offsets],
    }


def plan_from_json(obj: Any) -> AncillaPlan:
    if not isinstance(obj, dict) or "block_sizes" not in obj or "offsets" not in obj:
        raise MalformedTrace("ancilla plan needs block_sizes and offsets")
    sizes = obj["block_sizes"]
    offsets = obj["offsets"]
    if not isinstance(sizes, list) or not all(isinstance(s, int) and not isinstance(s, bool) for s in sizes):
        raise MalformedTrace("block_sizes must be a list of integers")
    if not isinstance(offsets, list) or not all(isinstance(b, list) for b in offsets):
        raise MalformedTrace("offsets must be a list of lists")
    return AncillaPlan(
        tuple(sizes), tuple(tuple(_rational(y) for y in block) for block in offsets)
    )


def _rational(value: Any) -> Q:
    try:
        return to_rational(value)
    except (GameError, TypeError) as exc:
        raise MalformedTrace(str(exc)) from exc


def _state(obj: Any) -> ExactState:
    try:
        return state_from_json(obj)
    except (GameError, TypeError) as exc:
        raise MalformedTrace(f"bad state: {exc}") from exc


def claim_to_json(claim: Optional[Claim]) -> Optional[dict]:
    if claim is None:
        return None
    out: dict = {"kind": claim.kind, "value": str(claim.value)}
    if claim.unknown is not None or claim.coef != 0:
        out["coef"] = str(claim.coef)
        out["unknown"] = state_to_json(claim.unknown) if claim.unknown is not None else None
    return out


def claim_from_json(obj: Any) -> Claim:
    if not isinstance(obj, dict) or "kind" not in obj or "value" not in obj:
        raise MalformedTrace("claim needs kind and value")
    if obj["kind"] not in CLAIM_KINDS:
        raise MalformedTrace(f"unknown claim kind {obj['kind']!r}")
    unknown = obj.get("unknown")
    return Claim(
        obj["kind"],
        _rational(obj["value"]),
        _rational(obj.get("coef", "0")),
        _state(unknown) if unknown is not None else None,
    )


def subject_to_json(subject: Subject) -> dict:
    if isinstance(subject, DomSubject):
        return {
            "enclosure": numeric_to_json(subject.enclosure),
            "rounded": state_to_json(subject.rounded),
        }
    return state_to_json(subject)


def subject_from_json(obj: Any) -> Subject:
    if isinstance(obj, dict) and "enclosure" in obj:
        try:
            enclosure = numeric_from_json(obj["enclosure"])
        except (GameError, TypeError) as exc:
            raise MalformedTrace(f"bad enclosure: {exc}") from exc
        return DomSubject(enclosure, _state(obj.get("rounded")))
    return _state(obj)


def params_to_json(params: dict) -> dict:
    out: dict = {}
    for key, value in params.items():
        if key in _RATIONAL_PARAMS:
            out[key] = str(value)
        elif key in _STATE_PARAMS:
            out[key] = state_to_json(value)
        elif key == "plan":
            out[key] = plan_to_json(value)
        elif key == "parts":
            out[key] = [
                {"weight": str(w), "state": state_to_json(g), "premise": p} for w, g, p in value
            ]
        elif key == "map":
            out[key] = [{"payoff": str(x), "premise": p} for x, p in value]
        else:
            raise ValueError(f"unknown parameter {key!r}")
    return out


def _premise_ref(value: Any, nullable: bool) -> Optional[int]:
    if value is None and nullable:
        return None
    if not isinstance(value, int) or isinstance(value, bool):
        raise MalformedTrace(f"premise reference must be an integer, got {value!r}")
    return value


def params_from_json(obj: Any) -> dict:
    if not isinstance(obj, dict):
        raise MalformedTrace("params must be an object")
    out: dict = {}
    for key, value in obj.items():
        if key in _RATIONAL_PARAMS:
            out[key] = _rational(value)
        elif key in _STATE_PARAMS:
            out[key] = _state(value)
        elif key == "plan":
            out[key] = plan_from_json(value)
        elif key == "parts":
            if not isinstance(value, list):
                raise MalformedTrace("parts must be a list")
            out[key] = tuple(
                (_rational(_field(p, "weight")), _state(_field(p, "state")),
                 _premise_ref(_field(p, "premise"), True))
                for p in value
            )
        elif key == "map":
            if not isinstance(value, list):
                raise MalformedTrace("map must be a list")
            out[key] = tuple(
                (_rational(_field(m, "payoff")), _premise_ref(_field(m, "premise"), False))
                for m in value
            )
        else:
            raise MalformedTrace(f"unknown parameter {key!r}")
    return out


def _field(obj: Any, key: str) -> Any:
    if not isinstance(obj, dict) or key not in obj:
        raise MalformedTrace(f"missing field {key!r}")
    return obj[key]


def step_to_json(step: RuleStep) -> dict:
    return {
        "id": step.id,
        "rule": step.rule,
        "premises": list(step.premises),
        "subject": subject_to_json(step.subject),
        "claim": claim_to_json(step.claim),
        "params": params_to_json(step.params),
    }


def step_from_json(obj: Any) -> RuleStep:
    for key in ("id", "rule", "premises", "subject", "claim", "params"):
        _field(obj, key)
    if obj["rule"] not in RULES:
        raise MalformedTrace(f"unknown rule {obj['rule']!r}")
    if not isinstance(obj["premises"], list):
        raise MalformedTrace("premises must be a list")
    return RuleStep(
        id=_premise_ref(obj["id"], False),
        rule=obj["rule"],
        premises=tuple(_premise_ref(p, False) for p in obj["premises"]),
        subject=subject_from_json(obj["subject"]),
        claim=claim_from_json(obj["claim"]),
        params=params_from_json(obj["params"]),
    )


def trace_to_json(trace: ProofTrace) -> dict:
    return {"steps": [step_to_json(s) for s in trace.steps], "conclusion": trace.conclusion}


def trace_from_json(obj: Any) -> ProofTrace:
    steps = _field(obj, "steps")
    if not isinstance(steps, list) or not steps:
        raise MalformedTrace("steps must be a non-empty list")
    conclusion = _premise_ref(_field(obj, "conclusion"), False)
    return ProofTrace(tuple(step_from_json(s) for s in steps), conclusion)


def dumps(trace: ProofTrace) -> str:
    return json.dumps(trace_to_json(trace), separators=(",", ":")) + "\n"


def loads(text: str) -> ProofTrace:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedTrace(f"invalid JSON: {exc}") from exc
    return trace_from_json(obj)
