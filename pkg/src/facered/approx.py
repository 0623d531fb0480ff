"""Generator sets of the polyhedral and block-factored PSD approximations.

Each family describes an inner approximation of the PSD cone as the conic
hull of ``W_k S W_k'`` over its generators ``W_k`` (vectors for the
polyhedral families, ``d x k`` selector matrices otherwise).  Only families
with vector generators can be searched by linear programming.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import BadParams, GeneratorLimitExceeded, UnsupportedApproximation
from .model import SQRT2, packed_index, packed_length

DEFAULT_CAP = 400


@dataclass(frozen=True)
class ApproxFamily:
    """``width`` is the generator width ``k``; ``signed`` adds ``e_i +/- e_j``."""

    name: str
    width: int = 1
    signed: bool = False

    @property
    def search_supported(self):
        return self.width == 1

    def __str__(self):
        return self.name


DIAG = ApproxFamily("d")
DIAG_DOM = ApproxFamily("dd", width=1, signed=True)
SCALED_DIAG_DOM = ApproxFamily("sdd", width=2)


def factor_width(k):
    if k < 1:
        raise BadParams("factor width must be at least 1")
    if k == 1:
        return DIAG
    if k == 2:
        return SCALED_DIAG_DOM
    return ApproxFamily(f"fw{k}", width=k)


def parse_family(text):
    """Map the command-line names ``d``, ``dd``, ``sdd`` and ``fwK`` to a family."""
    if isinstance(text, ApproxFamily):
        return text
    key = str(text).strip().lower()
    named = {"d": DIAG, "diag": DIAG, "dd": DIAG_DOM, "diagdom": DIAG_DOM,
             "sdd": SCALED_DIAG_DOM, "scaleddiagdom": SCALED_DIAG_DOM}
    if key in named:
        return named[key]
    match = re.fullmatch(r"fw(\d+)", key)
    if match:
        return factor_width(int(match.group(1)))
    raise ValueError(f"unknown approximation {text!r}; expected d, dd, sdd or fwK")


def require_search(family):
    if not family.search_supported:
        raise UnsupportedApproximation(
            f"approximation '{family}' has matrix generators; searching it needs a "
            "second-order-cone or semidefinite solver, which this package does not include "
            "(use 'd' or 'dd')")


@dataclass(frozen=True, eq=False)
class GeneratorSet:
    """``generators`` has shape ``(count, d)`` for width 1, else ``(count, d, k)``."""

    family: ApproxFamily
    d: int
    generators: np.ndarray

    @property
    def k(self):
        return self.family.width

    @property
    def search_supported(self):
        return self.family.search_supported

    def __len__(self):
        return self.generators.shape[0]

    def outer_products(self):
        """Sparse ``packed_length(d) x count`` matrix with columns ``svec(w w')``."""
        if not self.search_supported:
            raise UnsupportedApproximation(f"{self.family} generators are not vectors")
        rows, cols, vals = [], [], []
        for col, w in enumerate(self.generators):
            nz = np.flatnonzero(w)
            for a_pos, a in enumerate(nz):
                for b in nz[a_pos:]:
                    rows.append(packed_index(a, b))
                    cols.append(col)
                    vals.append(w[a] * w[b] * (1.0 if a == b else SQRT2))
        return sp.csr_matrix((vals, (rows, cols)), shape=(packed_length(self.d), len(self)))


def generators(family, d, cap=DEFAULT_CAP):
    if d < 1:
        raise BadParams("face dimension must be at least 1")
    if family.width == 1 and not family.signed:
        return GeneratorSet(family, d, np.eye(d))
    if d > cap:
        raise GeneratorLimitExceeded(f"d = {d} exceeds the generator cap {cap}")
    if family.width == 1:
        gens = [np.eye(d)[i] for i in range(d)]
        for i, j in itertools.combinations(range(d), 2):
            for sign in (1.0, -1.0):
                w = np.zeros(d)
                w[i], w[j] = 1.0, sign
                gens.append(w)
        return GeneratorSet(family, d, np.array(gens))
    k = family.width
    if k > d:
        raise BadParams(f"factor width {k} exceeds dimension {d}")
    eye = np.eye(d)
    mats = [eye[:, list(idx)] for idx in itertools.combinations(range(d), k)]
    return GeneratorSet(family, d, np.array(mats))
