"""Text file formats: hyperedge lists, attribute tables, fitted parameters.

Hyperedge files are UTF-8 text, one hyperedge per line: comma-separated
node ids, optionally followed by a tab and an integer weight.  Lines
starting with ``#`` are comments.  Attribute files are CSV with a
``node,<cov1>,<cov2>,...`` header and one row per node.  Fitted
parameters are a single JSON document.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import ValidationError
from .hypergraph import AttributeGroup, AttributeMatrix, Hypergraph, build_hypergraph

PARAMS_FORMAT = "hypermix-params-v1"


def read_hyperedges(path: str | Path) -> list[tuple[list[str], int]]:
    """Parse a hyperedge file into (node-id list, weight) pairs."""
    out: list[tuple[list[str], int]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) > 2:
                raise ValidationError(f"{path}:{lineno}: too many tab-separated fields")
            ids = [tok.strip() for tok in parts[0].split(",")]
            if any(not tok for tok in ids):
                raise ValidationError(f"{path}:{lineno}: empty node id")
            if len(parts) == 2:
                try:
                    weight = int(parts[1])
                except ValueError:
                    raise ValidationError(
                        f"{path}:{lineno}: weight {parts[1]!r} is not an integer"
                    ) from None
            else:
                weight = 1
            out.append((ids, weight))
    return out


def load_hypergraph(path: str | Path, nodes: list[str] | None = None) -> Hypergraph:
    return build_hypergraph(read_hyperedges(path), nodes=nodes)


def write_hyperedges(path: str | Path, h: Hypergraph) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for e, weight in zip(h.edges, h.weights):
            ids = ",".join(str(h.node_labels[i]) for i in e)
            fh.write(f"{ids}\t{int(weight)}\n")


def read_attribute_table(path: str | Path) -> dict[str, dict[str, str]]:
    """Parse an attribute CSV into {node id: {covariate: value}}."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{path}: empty attribute file") from None
        if len(header) < 2 or header[0].strip() != "node":
            raise ValidationError(
                f"{path}: header must be 'node,<cov1>,...', got {header!r}")
        covs = [c.strip() for c in header[1:]]
        table: dict[str, dict[str, str]] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(header):
                raise ValidationError(f"{path}:{lineno}: expected {len(header)} fields")
            node = row[0].strip()
            if node in table:
                raise ValidationError(f"{path}:{lineno}: duplicate node {node!r}")
            values = [v.strip() for v in row[1:]]
            if any(not v for v in values):
                raise ValidationError(f"{path}:{lineno}: missing value")
            table[node] = dict(zip(covs, values))
    return table


def write_attribute_table(
    path: str | Path,
    x: AttributeMatrix,
    node_labels: Iterable,
) -> None:
    """Write an AttributeMatrix back to CSV (one column per covariate)."""
    labels = list(node_labels)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node"] + [g.name for g in x.groups])
        for i, lab in enumerate(labels):
            row = [str(lab)]
            for g in x.groups:
                block = x.matrix[i, g.start:g.stop]
                row.append(g.levels[int(np.argmax(block))])
            writer.writerow(row)


def attribute_matrix_to_dict(x: AttributeMatrix) -> dict:
    return {
        "groups": [
            {"name": g.name, "levels": list(g.levels), "start": g.start}
            for g in x.groups
        ],
        "matrix": x.matrix.tolist(),
    }


def save_params(
    path: str | Path,
    *,
    u: np.ndarray,
    w: np.ndarray,
    beta: np.ndarray | None,
    gamma: float,
    seed: int,
    final_loglik: float | None,
    max_edge_size: int,
    node_labels: Iterable,
) -> None:
    """Serialize fitted parameters as a single JSON document.

    ``final_loglik`` may be None for documents that carry planted ground
    truth rather than a fit.
    """
    doc = {
        "format": PARAMS_FORMAT,
        "num_nodes": int(u.shape[0]),
        "k": int(u.shape[1]),
        "z": int(beta.shape[1]) if beta is not None else 0,
        "gamma": float(gamma),
        "seed": int(seed),
        "final_loglik": None if final_loglik is None else float(final_loglik),
        "max_edge_size": int(max_edge_size),
        "nodes": [str(lab) for lab in node_labels],
        "u": np.asarray(u).tolist(),
        "w": np.asarray(w).tolist(),
        "beta": np.asarray(beta).tolist() if beta is not None else None,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True)
        fh.write("\n")


def load_params(path: str | Path) -> dict:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != PARAMS_FORMAT:
        raise ValidationError(f"{path}: not a {PARAMS_FORMAT} document")
    doc["u"] = np.asarray(doc["u"], dtype=np.float64)
    doc["w"] = np.asarray(doc["w"], dtype=np.float64)
    doc["beta"] = (np.asarray(doc["beta"], dtype=np.float64)
                   if doc["beta"] is not None else None)
    return doc


def write_trace_csv(path: str | Path, trace: list[dict]) -> None:
    """Convergence trace: one row per check with the three objectives."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "loglik_structure", "loglik_attributes",
                         "loglik_total"])
        for row in trace:
            la = row["loglik_structure"]
            lx = row["loglik_attributes"]
            writer.writerow([
                row["iteration"],
                "" if la is None else repr(la),
                "" if lx is None else repr(lx),
                repr(row["loglik_total"]),
            ])


def attribute_matrix_from_table(
    table: Mapping[str, Mapping[str, str]],
    h: Hypergraph,
) -> AttributeMatrix:
    """One-hot encode a parsed attribute table against a hypergraph's nodes."""
    from .hypergraph import one_hot_encode

    return one_hot_encode(table, [str(lab) for lab in h.node_labels])


def attribute_matrix_from_dict(doc: dict) -> AttributeMatrix:
    groups = tuple(
        AttributeGroup(name=g["name"], levels=tuple(g["levels"]), start=int(g["start"]))
        for g in doc["groups"]
    )
    return AttributeMatrix(matrix=np.asarray(doc["matrix"], dtype=np.float64),
                           groups=groups)
