"""File formats: graph and net JSON, query JSON, sample CSV, learned-object JSON.

All floating point numbers are rendered with 17 significant digits so that
emitted files are bit-stable golden artifacts.
"""

from __future__ import annotations

import csv
import io as _io
import json
from typing import Any, Mapping

import numpy as np

from .admg import Admg, GraphError
from .estimand import to_json_dict
from .identify import Estimand, HedgeWitness
from .learn import ConditionalTable, LearnedInterventional
from .scm import CausalBayesNet, CbnNode
from .tables import PmfTable, Samples


def _render(obj: Any, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join(
            f"{pad}  {json.dumps(str(k))}: {_render(v, indent + 1)}" for k, v in obj.items()
        )
        return "{\n" + items + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = ",\n".join(f"{pad}  {_render(v, indent + 1)}" for v in obj)
        return "[\n" + items + "\n" + pad + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format(float(obj), ".17g")
    return json.dumps(obj, ensure_ascii=False)


def dump_json(obj: Any) -> str:
    """Deterministic JSON with 17-significant-digit floats."""
    return _render(obj) + "\n"


# -- graphs --------------------------------------------------------------------


def admg_to_dict(g: Admg) -> dict:
    return {
        "vars": [{"name": n, "cardinality": c} for n, c in zip(g.names, g.cards)],
        "directed": [[g.names[a], g.names[b]] for a, b in sorted(g.directed)],
        "bidirected": [[g.names[a], g.names[b]] for a, b in sorted(g.bidirected)],
    }


def admg_from_dict(obj: Mapping) -> Admg:
    try:
        variables = [(v["name"], int(v.get("cardinality", 2))) for v in obj["vars"]]
        directed = [tuple(e) for e in obj.get("directed", [])]
        bidirected = [tuple(e) for e in obj.get("bidirected", [])]
    except (KeyError, TypeError) as exc:
        raise GraphError(f"malformed graph object: {exc}") from exc
    return Admg.build(variables, directed, bidirected)


# -- causal Bayes nets -----------------------------------------------------------


def net_to_dict(net: CausalBayesNet) -> dict:
    nodes = []
    for nd in net.nodes:
        shape = tuple(net.cardinality(p) for p in nd.parents) + (nd.cardinality,)
        nodes.append({
            "name": nd.name,
            "cardinality": nd.cardinality,
            "hidden": nd.hidden,
            "parents": list(nd.parents),
            "cpt": nd.cpt.reshape(shape).tolist(),
        })
    return {"nodes": nodes}


def net_from_dict(obj: Mapping) -> CausalBayesNet:
    nodes = []
    for nd in obj["nodes"]:
        cpt = np.asarray(nd["cpt"], dtype=np.float64)
        card = int(nd["cardinality"])
        nodes.append(CbnNode(
            name=nd["name"],
            cardinality=card,
            parents=tuple(nd.get("parents", [])),
            cpt=cpt.reshape(-1, card),
            hidden=bool(nd.get("hidden", False)),
        ))
    return CausalBayesNet(nodes)


# -- queries --------------------------------------------------------------------


def query_from_dict(obj: Mapping) -> tuple[dict[str, int], frozenset[str]]:
    x = {e["var"]: int(e["value"]) for e in obj.get("intervene", [])}
    targets = frozenset(obj.get("targets", []))
    return x, targets


# -- samples --------------------------------------------------------------------


def samples_to_csv(samples: Samples) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(samples.names)
    writer.writerows(samples.values.tolist())
    return buf.getvalue()


def samples_from_csv(text: str) -> Samples:
    reader = csv.reader(_io.StringIO(text))
    header = next(reader)
    rows = [[int(v) for v in row] for row in reader if row]
    values = np.asarray(rows, dtype=np.int64).reshape(len(rows), len(header))
    return Samples(tuple(header), values)


# -- tables and learned objects ---------------------------------------------------


def table_to_dict(t: PmfTable) -> dict:
    return {
        "vars": list(t.names),
        "cardinalities": list(t.cards),
        "probs": t.probs.reshape(-1).tolist(),
        "context": dict(t.context) if t.context else {},
    }


def _factor_to_dict(f: ConditionalTable) -> dict:
    return {
        "target": f.target,
        "target_cardinality": f.target_card,
        "cond": list(f.cond),
        "cond_cardinalities": list(f.cond_cards),
        "probs": f.probs.tolist(),
        "counts": f.counts.tolist() if f.counts is not None else None,
        "kind": f.kind,
        "fixed_context": dict(f.fixed_context),
    }


def _factor_from_dict(obj: Mapping) -> ConditionalTable:
    counts = obj.get("counts")
    return ConditionalTable(
        target=obj["target"],
        target_card=int(obj["target_cardinality"]),
        cond=tuple(obj["cond"]),
        cond_cards=tuple(int(c) for c in obj["cond_cardinalities"]),
        probs=np.asarray(obj["probs"], dtype=np.float64),
        counts=np.asarray(counts, dtype=np.float64) if counts is not None else None,
        kind=obj.get("kind", "add1"),
        fixed_context={k: int(v) for k, v in obj.get("fixed_context", {}).items()},
    )


def li_to_dict(li: LearnedInterventional) -> dict:
    return {
        "graph": admg_to_dict(li.graph),
        "intervention": {k: int(v) for k, v in li.x.items()},
        "order": list(li.order),
        "factors": [_factor_to_dict(li.factors[n]) for n in li.order],
        "metadata": dict(li.metadata),
    }


def li_from_dict(obj: Mapping) -> LearnedInterventional:
    factors = {f["target"]: _factor_from_dict(f) for f in obj["factors"]}
    return LearnedInterventional(
        graph=admg_from_dict(obj["graph"]),
        x={k: int(v) for k, v in obj["intervention"].items()},
        order=tuple(obj["order"]),
        factors=factors,
        metadata=dict(obj.get("metadata", {})),
    )


# -- identification results --------------------------------------------------------


def estimand_to_dict(e: Estimand) -> dict:
    return {
        "identifiable": True,
        "targets": sorted(e.targets),
        "intervened": sorted(e.intervened),
        "arbitrary": sorted(e.arbitrary),
        "formula": e.render(),
        "latex": e.render("latex"),
        "trace": [{"step": t.step, "detail": t.description} for t in e.trace],
        "expression": to_json_dict(e.expr),
    }


def hedge_to_dict(w: HedgeWitness) -> dict:
    return {
        "identifiable": False,
        "root_set": sorted(w.root_set),
        "internal": sorted(w.internal),
        "witness_graph": admg_to_dict(w.graph),
        "trace": [{"step": t.step, "detail": t.description} for t in w.trace],
    }
