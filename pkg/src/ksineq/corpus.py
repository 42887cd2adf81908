"""Bundled ray sets.

``kcbs-5``      five rays in 3 dimensions with a pentagon orthogonality graph
``yu-oh-13``    the 13-ray state-independent set in 3 dimensions
``cabello-18``  the 18-ray Kochen-Specker set in 4 dimensions
"""
from __future__ import annotations

import math

_S2 = 1 / math.sqrt(2)
_S3 = 1 / math.sqrt(3)


def _kcbs5() -> dict:
    c = math.cos(math.pi / 5)
    cos_t = math.sqrt(c / (1 + c))
    sin_t = math.sqrt(1 - cos_t**2)
    rays = []
    for i in range(1, 6):
        phi = 4 * math.pi * i / 5
        rays.append({
            "name": f"l{i}",
            "v": [sin_t * math.cos(phi), sin_t * math.sin(phi), cos_t],
        })
    return {"dim": 3, "rays": rays}


def _yu_oh13() -> dict:
    z = {1: [1, 0, 0], 2: [0, 1, 0], 3: [0, 0, 1]}
    y = {
        (1, "+"): [0, _S2, _S2], (1, "-"): [0, _S2, -_S2],
        (2, "+"): [_S2, 0, _S2], (2, "-"): [_S2, 0, -_S2],
        (3, "+"): [_S2, _S2, 0], (3, "-"): [_S2, -_S2, 0],
    }
    h = {
        0: [_S3, _S3, _S3], 1: [-_S3, _S3, _S3],
        2: [_S3, -_S3, _S3], 3: [_S3, _S3, -_S3],
    }
    # P1..P13 = h0 h1 h2 h3, z2 y2+ y2-, z3 y3+ y3-, z1 y1+ y1-
    order = [("h0", h[0]), ("h1", h[1]), ("h2", h[2]), ("h3", h[3])]
    for k in (2, 3, 1):
        order += [(f"z{k}", z[k]), (f"y{k}+", y[k, "+"]), (f"y{k}-", y[k, "-"])]
    return {"dim": 3, "rays": [{"name": name, "v": v} for name, v in order]}


_CABELLO = [
    [1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0],
    [1, 1, 1, 1], [1, -1, 1, -1], [1, -1, -1, 1],
    [1, -1, -1, -1], [1, -1, 1, 1], [1, 1, 1, -1],
    [1, 1, 0, 0], [0, 0, 1, 1], [0, 0, 1, -1],
    [0, 1, 0, 1], [0, 1, 0, -1], [1, 0, -1, 0],
    [1, 0, 0, -1], [1, 0, 0, 1], [0, 1, -1, 0],
]


def _cabello18() -> dict:
    rays = []
    for k, v in enumerate(_CABELLO, start=1):
        norm = math.sqrt(sum(x * x for x in v))
        rays.append({"name": f"P{k}", "v": [x / norm for x in v]})
    return {"dim": 4, "rays": rays}


CORPUS = {
    "kcbs-5": _kcbs5,
    "yu-oh-13": _yu_oh13,
    "cabello-18": _cabello18,
}

DESCRIPTIONS = {
    "kcbs-5": "5 rays, dim 3, pentagon orthogonality graph (KCBS)",
    "yu-oh-13": "13 rays, dim 3, state-independent non-KS set (Yu-Oh)",
    "cabello-18": "18 rays, dim 4, Kochen-Specker set (Cabello et al.)",
}


def corpus_document(name: str) -> dict:
    try:
        return CORPUS[name]()
    except KeyError:
        raise KeyError(f"unknown corpus entry {name!r}") from None
