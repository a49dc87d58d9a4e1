"""JSON family-spec documents, ensemble CSV files and report serialization."""

from __future__ import annotations

import hashlib
import json
from typing import IO

import numpy as np

from . import kernels as K

SCHEMA_VERSION = 1


def spec_to_dict(spec: K.FamilySpec) -> dict:
    if isinstance(spec, K.Lfsm):
        return {"family": "lfsm", "alpha": spec.alpha, "hurst": spec.hurst,
                "c_plus": spec.c_plus, "c_minus": spec.c_minus}
    if isinstance(spec, K.LinearMotion):
        return {"family": "linear_motion", "alpha": spec.alpha,
                "c_plus": spec.c_plus, "c_minus": spec.c_minus}
    if isinstance(spec, K.LogFractional):
        return {"family": "log_fractional", "alpha": spec.alpha, "scale": spec.scale}
    if isinstance(spec, K.MixedLfsm):
        return {"family": "mixed_lfsm", "alpha": spec.alpha, "hurst": spec.hurst,
                "atoms": [{"b": [b1, b2], "weight": w} for (b1, b2), w in spec.atoms]}
    if isinstance(spec, K.TruncatedFractional):
        return {"family": "truncated_fractional", "alpha": spec.alpha, "a": spec.a, "b": spec.b}
    if isinstance(spec, K.Chentsov):
        return {"family": "chentsov", "alpha": spec.alpha, "beta": spec.beta}
    if isinstance(spec, K.RotatingAverage):
        return {"family": "rotating_average", "alpha": spec.alpha, "beta": spec.beta,
                "harmonics": [{"k": k, "cos": a, "sin": b} for k, a, b in spec.series.terms],
                "constant": spec.series.constant}
    raise TypeError(f"unknown family spec {type(spec).__name__}")


def spec_from_dict(doc: dict) -> K.FamilySpec:
    try:
        fam = doc["family"]
        if fam == "lfsm":
            return K.Lfsm(doc["alpha"], doc["hurst"], doc.get("c_plus", 1.0), doc.get("c_minus", 0.0))
        if fam == "linear_motion":
            return K.LinearMotion(doc["alpha"], doc.get("c_plus", 1.0), doc.get("c_minus", 0.0))
        if fam == "log_fractional":
            return K.LogFractional(doc["alpha"], doc.get("scale", 1.0))
        if fam == "mixed_lfsm":
            atoms = tuple(((float(a["b"][0]), float(a["b"][1])), float(a["weight"]))
                          for a in doc["atoms"])
            return K.MixedLfsm(doc["alpha"], doc["hurst"], atoms)
        if fam == "truncated_fractional":
            return K.TruncatedFractional(doc["alpha"], doc["a"], doc["b"])
        if fam == "chentsov":
            return K.Chentsov(doc["alpha"], doc["beta"])
        if fam == "rotating_average":
            terms = tuple((int(h["k"]), float(h.get("cos", 0.0)), float(h.get("sin", 0.0)))
                          for h in doc["harmonics"])
            return K.RotatingAverage(doc["alpha"], doc["beta"],
                                     K.FourierSeries(terms, float(doc.get("constant", 0.0))))
    except KeyError as exc:
        raise K.InvalidSpecError(f"spec document missing field {exc}") from exc
    raise K.InvalidSpecError(f"unknown family {doc.get('family')!r}")


def load_spec(path: str) -> K.FamilySpec:
    with open(path) as fh:
        return spec_from_dict(json.load(fh))


def spec_digest(descriptor: dict) -> str:
    blob = json.dumps(descriptor, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def write_ensemble_csv(fh: IO[str], times: np.ndarray, values: np.ndarray) -> None:
    """CSV with header time,path_0,... and round-trip decimal formatting."""
    n_paths = values.shape[0]
    fh.write("time," + ",".join(f"path_{i}" for i in range(n_paths)) + "\n")
    for j, t in enumerate(times):
        row = [repr(float(t))] + [repr(float(values[i, j])) for i in range(n_paths)]
        fh.write(",".join(row) + "\n")


def read_ensemble_csv(fh: IO[str]) -> tuple[np.ndarray, np.ndarray]:
    header = fh.readline().strip().split(",")
    if not header or header[0] != "time":
        raise ValueError("not an ensemble CSV (missing 'time' header)")
    times = []
    cols: list[list[float]] = [[] for _ in header[1:]]
    for line in fh:
        parts = line.strip().split(",")
        if not parts or parts == [""]:
            continue
        times.append(float(parts[0]))
        for c, v in zip(cols, parts[1:]):
            c.append(float(v))
    return np.array(times), np.array(cols)


def ensemble_metadata(ensemble, spec_doc: dict | None, grid: dict, extra: dict | None = None) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "seed": int(ensemble.seed),
        "n_paths": int(ensemble.values.shape[0]),
        "digest": ensemble.spec_digest,
        "grid": grid,
    }
    if spec_doc is not None:
        doc["spec"] = spec_doc
    if extra:
        doc.update(extra)
    return doc
