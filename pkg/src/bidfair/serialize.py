"""Self-describing JSON documents for instances, transcripts and run reports.

Every rational is serialized as an exact "p/q" string; nothing is ever
rounded.  Documents carry a format tag and version and round-trip losslessly.
Serialization output is deterministic (sorted keys, fixed indentation), so
repeated runs with the same seeds produce byte-identical files.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Mapping

from .engine import GameConfig, Round, TieBreak, Transcript
from .model import AgentSpec, FractionalPartition, Instance
from .valuations import (
    AdditiveValuation,
    RowSubstitutesValuation,
    TableValuation,
    UnitDemandValuation,
    ValuationOracle,
    WeightedCoverageValuation,
    XOSValuation,
)

FORMAT_INSTANCE = "bidfair/instance"
FORMAT_TRANSCRIPT = "bidfair/transcript"
FORMAT_REPORT = "bidfair/report"
FORMAT_LPCERT = "bidfair/lpcert"
VERSION = 1


class ParseError(ValueError):
    pass


def rational_str(x: Fraction | int) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_rational(text: str) -> Fraction:
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad rational {text!r}") from exc


def dumps(document: Mapping[str, Any]) -> str:
    return json.dumps(document, sort_keys=True, indent=2) + "\n"


def loads(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("expected a JSON object")
    return doc


def _expect(doc: Mapping[str, Any], fmt: str) -> None:
    if doc.get("format") != fmt:
        raise ParseError(f"expected format {fmt!r}, found {doc.get('format')!r}")
    if doc.get("version") != VERSION:
        raise ParseError(f"unsupported version {doc.get('version')!r}")


def valuation_to_dict(v: ValuationOracle) -> dict:
    if isinstance(v, AdditiveValuation):
        return {
            "kind": "additive",
            "values": {e: rational_str(x) for e, x in v.item_values.items()},
        }
    if isinstance(v, UnitDemandValuation):
        return {
            "kind": "unit_demand",
            "values": {e: rational_str(x) for e, x in v.item_values.items()},
        }
    if isinstance(v, XOSValuation):
        return {
            "kind": "xos",
            "clauses": [
                {e: rational_str(x) for e, x in clause.items()} for clause in v.clauses
            ],
        }
    if isinstance(v, RowSubstitutesValuation):
        return {
            "kind": "row_substitutes",
            "rows": [list(row) for row in v.rows],
            "weights": [rational_str(w) for w in v.weights],
        }
    if isinstance(v, WeightedCoverageValuation):
        return {
            "kind": "coverage",
            "universe": {u: rational_str(w) for u, w in v.element_weights.items()},
            "covers": {e: sorted(us) for e, us in v.covers.items()},
        }
    if isinstance(v, TableValuation):
        return {
            "kind": "table",
            "items": list(v.items),
            "values": {",".join(sorted(k)): rational_str(x) for k, x in v.table.items()},
        }
    raise ParseError(f"cannot serialize valuation of type {type(v).__name__}")


def valuation_from_dict(doc: Mapping[str, Any]) -> ValuationOracle:
    kind = doc.get("kind")
    if kind == "additive":
        return AdditiveValuation({e: parse_rational(x) for e, x in doc["values"].items()})
    if kind == "unit_demand":
        return UnitDemandValuation({e: parse_rational(x) for e, x in doc["values"].items()})
    if kind == "xos":
        return XOSValuation(
            [{e: parse_rational(x) for e, x in clause.items()} for clause in doc["clauses"]]
        )
    if kind == "row_substitutes":
        return RowSubstitutesValuation(
            [list(row) for row in doc["rows"]],
            [parse_rational(w) for w in doc["weights"]],
        )
    if kind == "coverage":
        return WeightedCoverageValuation(
            {u: parse_rational(w) for u, w in doc["universe"].items()},
            {e: frozenset(us) for e, us in doc["covers"].items()},
        )
    if kind == "table":
        table = {
            frozenset(k.split(",")) if k else frozenset(): parse_rational(x)
            for k, x in doc["values"].items()
        }
        return TableValuation(doc["items"], table)
    raise ParseError(f"unknown valuation kind {kind!r}")


def instance_to_dict(instance: Instance) -> dict:
    return {
        "format": FORMAT_INSTANCE,
        "version": VERSION,
        "items": list(instance.items),
        "agents": [
            {
                "id": a.id,
                "entitlement": rational_str(a.entitlement),
                "valuation": valuation_to_dict(a.valuation),
            }
            for a in instance.agents
        ],
    }


def instance_from_dict(doc: Mapping[str, Any]) -> Instance:
    _expect(doc, FORMAT_INSTANCE)
    try:
        agents = tuple(
            AgentSpec(
                a["id"],
                parse_rational(a["entitlement"]),
                valuation_from_dict(a["valuation"]),
            )
            for a in doc["agents"]
        )
        return Instance(items=tuple(doc["items"]), agents=agents)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad instance document: {exc}") from exc


def config_to_dict(config: GameConfig) -> dict:
    tie: dict[str, Any] = {"policy": config.tie.policy}
    if config.tie.seed is not None:
        tie["seed"] = config.tie.seed
    if config.tie.target is not None:
        tie["target"] = config.tie.target
    if config.tie.prefs:
        tie["prefs"] = [list(p) for p in config.tie.prefs]
    doc: dict[str, Any] = {"mode": config.mode, "tie": tie}
    if config.rho is not None:
        doc["rho"] = rational_str(config.rho)
    if not config.strict_threshold:
        doc["strict_threshold"] = False
    return doc


def config_from_dict(doc: Mapping[str, Any]) -> GameConfig:
    tie_doc = doc.get("tie", {})
    tie = TieBreak(
        policy=tie_doc.get("policy", "lexicographic"),
        seed=tie_doc.get("seed"),
        target=tie_doc.get("target"),
        prefs=tuple(tuple(p) for p in tie_doc.get("prefs", ())),
    )
    return GameConfig(
        mode=doc.get("mode", "standard"),
        rho=parse_rational(doc["rho"]) if "rho" in doc else None,
        strict_threshold=doc.get("strict_threshold", True),
        tie=tie,
    )


def transcript_to_dict(transcript: Transcript) -> dict:
    return {
        "format": FORMAT_TRANSCRIPT,
        "version": VERSION,
        "config": config_to_dict(transcript.config),
        "agent_ids": list(transcript.agent_ids),
        "rounds": [
            {
                "number": r.number,
                "bids": {a: rational_str(b) for a, b in r.bids.items()},
                "winner": r.winner,
                "items": list(r.items),
                "payment": rational_str(r.payment),
            }
            for r in transcript.rounds
        ],
        "allocation": {a: sorted(bundle) for a, bundle in transcript.allocation.items()},
        "unallocated": list(transcript.unallocated),
        "violations": list(transcript.violations),
    }


def transcript_from_dict(doc: Mapping[str, Any]) -> Transcript:
    _expect(doc, FORMAT_TRANSCRIPT)
    try:
        rounds = tuple(
            Round(
                number=r["number"],
                bids={a: parse_rational(b) for a, b in r["bids"].items()},
                winner=r["winner"],
                items=tuple(r["items"]),
                payment=parse_rational(r["payment"]),
            )
            for r in doc["rounds"]
        )
        return Transcript(
            config=config_from_dict(doc["config"]),
            rounds=rounds,
            allocation={a: frozenset(b) for a, b in doc["allocation"].items()},
            agent_ids=tuple(doc["agent_ids"]),
            unallocated=tuple(doc["unallocated"]),
            violations=tuple(doc["violations"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad transcript document: {exc}") from exc


def partition_to_dict(partition: FractionalPartition) -> list:
    return [
        {"bundle": sorted(bundle), "weight": rational_str(w)}
        for bundle, w in partition.entries
    ]


def partition_from_dict(entries: list) -> FractionalPartition:
    return FractionalPartition(
        tuple((frozenset(e["bundle"]), parse_rational(e["weight"])) for e in entries)
    )


def report_to_dict(
    instance: Instance,
    transcript: Transcript,
    guarantees: list[dict] | None = None,
    extra: Mapping[str, Any] | None = None,
) -> dict:
    doc: dict[str, Any] = {
        "format": FORMAT_REPORT,
        "version": VERSION,
        "instance": instance_to_dict(instance),
        "transcript": transcript_to_dict(transcript),
    }
    if guarantees is not None:
        doc["guarantees"] = guarantees
    if extra:
        doc.update(extra)
    return doc


def report_from_dict(doc: Mapping[str, Any]) -> tuple[Instance, Transcript, list[dict]]:
    _expect(doc, FORMAT_REPORT)
    instance = instance_from_dict(doc["instance"])
    transcript = transcript_from_dict(doc["transcript"])
    return instance, transcript, doc.get("guarantees", [])
