"""Reading and writing problems, solutions, face-chain archives and logs.

Two problem formats are supported:

* SDPA sparse text (``.dat-s``).  SDPA's primal ``min c'x, sum x_i F_i - F_0 >= 0``
  and its dual ``max F_0 . Y, F_i . Y = c_i, Y >= 0`` map onto the internal
  record as ``A_i = F_i``, ``b = c`` and ``c_internal = -F_0``.  The internal
  equality form is then the SDPA dual (with negated objective) and the
  generator form with ``y = -x`` is the SDPA primal.  Negative block sizes
  are nonnegative (diagonal) blocks.  Only PSD and nonnegative blocks can be
  stored in this format.
* A JSON container holding ``m``, ``blocks``, ``b``, and ``c``/``A`` as
  triplets over packed (scaled upper-triangle) coordinates.

Numbers are written with 17 significant digits, which round-trips every
double exactly.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .approx import parse_family
from .certsearch import Certificate, replay_certificate
from .chain import ChainStep, FaceChain
from .errors import DuplicateEntry, InvalidArchive, ParseError, SchemaError, UnsupportedCone
from .faces import BlockFace, FaceState
from .model import SQRT2, ConeBlock, ConeKind, ConicProblem, NonNeg, PSD, Side, packed_index, smat, validate
from .settings import Tolerances

ARCHIVE_FORMAT = "facered-chain/1"
SOLUTION_KEYS = ("x", "y")


def fmt(value):
    """Float text with 17 significant digits (integers stay integral)."""
    v = float(value)
    if not math.isfinite(v):
        raise ValueError(f"cannot serialize non-finite value {v!r}")
    if v == 0.0:
        return "0"
    return format(v, ".17g")


# ---------------------------------------------------------------------------
# SDPA sparse format


def _sdpa_lines(text):
    """Non-comment, non-blank lines with their 1-based line numbers."""
    out = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "\"*":
            continue
        out.append((number, line))
    return out


def _tokens(line):
    for ch in ",{}()":
        line = line.replace(ch, " ")
    return line.split()


def _header_int(lines, idx, what):
    if idx >= len(lines):
        raise ParseError(f"missing {what}")
    number, line = lines[idx]
    toks = _tokens(line)
    try:
        return int(toks[0]), number
    except (IndexError, ValueError):
        raise ParseError(f"expected {what}, got {line!r}", number) from None


def read_sdpa(text):
    """Parse SDPA sparse text into a :class:`ConicProblem`."""
    lines = _sdpa_lines(text)
    m, _ = _header_int(lines, 0, "number of constraint matrices")
    nblocks, number = _header_int(lines, 1, "number of blocks")
    if m < 0 or nblocks < 1:
        raise ParseError("need m >= 0 and at least one block", number)
    if len(lines) < 4:
        raise ParseError("missing block sizes or objective line")
    number, line = lines[2]
    try:
        sizes = [int(float(t)) for t in _tokens(line)[:nblocks]]
    except ValueError:
        raise ParseError(f"bad block sizes {line!r}", number) from None
    if len(sizes) != nblocks or any(s == 0 for s in sizes):
        raise ParseError(f"expected {nblocks} nonzero block sizes", number)
    blocks = [PSD(s) if s > 0 else NonNeg(-s) for s in sizes]
    number, line = lines[3]
    try:
        obj = [float(t) for t in _tokens(line)]
    except ValueError:
        raise ParseError(f"bad objective line {line!r}", number) from None
    if len(obj) < m:
        raise ParseError(f"expected {m} objective values, got {len(obj)}", number)
    b = np.array(obj[:m])
    offsets = np.concatenate([[0], np.cumsum([blk.length for blk in blocks])]).astype(int)
    N = int(offsets[-1])
    c = np.zeros(N)
    rows, cols, vals = [], [], []
    seen = set()
    for number, line in lines[4:]:
        toks = _tokens(line)
        if len(toks) != 5:
            raise ParseError(f"expected 'matno blkno i j value', got {line!r}", number)
        try:
            mat, blk, i, j = (int(t) for t in toks[:4])
            value = float(toks[4])
        except ValueError:
            raise ParseError(f"bad entry {line!r}", number) from None
        if not 0 <= mat <= m:
            raise ParseError(f"matrix number {mat} out of range 0..{m}", number)
        if not 1 <= blk <= nblocks:
            raise ParseError(f"block number {blk} out of range 1..{nblocks}", number)
        block = blocks[blk - 1]
        if not (1 <= i <= block.size and 1 <= j <= block.size):
            raise ParseError(f"entry ({i},{j}) outside a block of size {block.size}", number)
        if i > j:
            raise ParseError(f"entry ({i},{j}) is below the diagonal; SDPA entries need i <= j", number)
        if block.kind is ConeKind.NONNEG and i != j:
            raise ParseError(f"off-diagonal entry ({i},{j}) in a diagonal block", number)
        key = (mat, blk, i, j)
        if key in seen:
            raise DuplicateEntry(f"entry ({i},{j}) of matrix {mat}, block {blk} given twice", number)
        seen.add(key)
        if block.kind is ConeKind.PSD:
            col = offsets[blk - 1] + packed_index(i - 1, j - 1)
            packed = value if i == j else SQRT2 * value
        else:
            col = offsets[blk - 1] + i - 1
            packed = value
        if mat == 0:
            c[col] = -packed
        elif packed != 0.0:
            rows.append(mat - 1)
            cols.append(col)
            vals.append(packed)
    return ConicProblem(m, blocks, b, c, rows, cols, vals, meta={"source": "sdpa"})


def _packed_entries(problem, vec_cols, vec_vals):
    """Yield ``(block, i, j, value)`` in SDPA (unscaled, 1-based) terms."""
    offsets = problem.offsets
    kblocks = np.searchsorted(offsets, vec_cols, side="right") - 1
    for col, k, v in zip(vec_cols, kblocks, vec_vals):
        blk = problem.blocks[k]
        local = int(col - offsets[k])
        if blk.kind is ConeKind.PSD:
            j = int((math.isqrt(8 * local + 1) - 1) // 2)
            i = local - j * (j + 1) // 2
            yield k + 1, i + 1, j + 1, (v if i == j else v / SQRT2)
        else:
            yield k + 1, local + 1, local + 1, v


def write_sdpa(problem):
    """SDPA sparse text for a problem with PSD and nonnegative blocks only."""
    problem.check()
    for k, blk in enumerate(problem.blocks):
        if blk.kind not in (ConeKind.PSD, ConeKind.NONNEG):
            raise UnsupportedCone(f"block {k} ({blk.kind.value}) cannot be written in SDPA format; "
                                  "use the JSON container")
    sizes = [blk.size if blk.kind is ConeKind.PSD else -blk.size for blk in problem.blocks]
    out = ['"facered export: internal A_i = F_i, b = c, c = -F0',
           str(problem.m), str(len(problem.blocks)), " ".join(str(s) for s in sizes),
           " ".join(fmt(v) for v in problem.b) if problem.m else "{}"]
    nz = np.flatnonzero(problem.c)
    for blk, i, j, v in _packed_entries(problem, nz, -problem.c[nz]):
        out.append(f"0 {blk} {i} {j} {fmt(v)}")
    A = problem.A.tocsr()
    A.sort_indices()
    for r in range(problem.m):
        lo, hi = A.indptr[r], A.indptr[r + 1]
        for blk, i, j, v in _packed_entries(problem, A.indices[lo:hi], A.data[lo:hi]):
            if v != 0.0:
                out.append(f"{r + 1} {blk} {i} {j} {fmt(v)}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# JSON problem container


def _require(cond, path, message):
    if not cond:
        raise SchemaError(path, message)


def _number(value, path):
    _require(isinstance(value, (int, float)) and not isinstance(value, bool), path, "expected a number")
    _require(math.isfinite(value), path, "number must be finite")
    return float(value)


def _integer(value, path):
    _require(isinstance(value, int) and not isinstance(value, bool), path, "expected an integer")
    return value


def _triplets(obj, path, width):
    _require(isinstance(obj, dict), path, "expected an object with 'triplets'")
    _require(set(obj) == {"triplets"}, path, "only the key 'triplets' is allowed")
    trip = obj["triplets"]
    _require(isinstance(trip, list), f"{path}.triplets", "expected a list")
    out = []
    for n, t in enumerate(trip):
        tp = f"{path}.triplets[{n}]"
        _require(isinstance(t, list) and len(t) == width, tp, f"expected a list of {width} entries")
        out.append([_integer(v, f"{tp}[{i}]") for i, v in enumerate(t[:-1])] + [_number(t[-1], f"{tp}[{width - 1}]")])
    return out


def problem_to_dict(problem):
    problem.check()
    A = problem.A.tocoo()
    order = np.lexsort((A.col, A.row))
    return {
        "m": problem.m,
        "blocks": [{"kind": blk.kind.value, "size": blk.size} for blk in problem.blocks],
        "b": [float(v) for v in problem.b],
        "c": {"triplets": [[int(i), float(problem.c[i])] for i in np.flatnonzero(problem.c)]},
        "A": {"triplets": [[int(A.row[n]), int(A.col[n]), float(A.data[n])] for n in order
                           if A.data[n] != 0.0]},
        "svec": "scaled-upper",
    }


def problem_from_dict(doc, path="$"):
    _require(isinstance(doc, dict), path, "expected an object")
    allowed = {"m", "blocks", "b", "c", "A", "svec", "meta"}
    for key in doc:
        _require(key in allowed, f"{path}.{key}", "unknown key")
    for key in ("m", "blocks", "b", "c", "A", "svec"):
        _require(key in doc, f"{path}.{key}", "missing")
    _require(doc["svec"] == "scaled-upper", f"{path}.svec",
             f"unsupported packing {doc['svec']!r}; expected 'scaled-upper'")
    m = _integer(doc["m"], f"{path}.m")
    _require(m >= 0, f"{path}.m", "must be nonnegative")
    _require(isinstance(doc["blocks"], list), f"{path}.blocks", "expected a list")
    blocks = []
    for k, blk in enumerate(doc["blocks"]):
        bp = f"{path}.blocks[{k}]"
        _require(isinstance(blk, dict) and set(blk) == {"kind", "size"}, bp,
                 "expected an object with 'kind' and 'size'")
        try:
            kind = ConeKind(blk["kind"])
        except ValueError:
            raise SchemaError(f"{bp}.kind", f"unknown cone kind {blk['kind']!r}") from None
        size = _integer(blk["size"], f"{bp}.size")
        _require(size >= 1, f"{bp}.size", "must be at least 1")
        blocks.append(ConeBlock(kind, size))
    N = int(sum(blk.length for blk in blocks))
    _require(isinstance(doc["b"], list), f"{path}.b", "expected a list")
    _require(len(doc["b"]) == m, f"{path}.b", f"expected {m} entries, got {len(doc['b'])}")
    b = np.array([_number(v, f"{path}.b[{i}]") for i, v in enumerate(doc["b"])])
    c = np.zeros(N)
    seen = set()
    for n, (col, val) in enumerate(_triplets(doc["c"], f"{path}.c", 2)):
        tp = f"{path}.c.triplets[{n}]"
        _require(0 <= col < N, tp, f"column {col} out of range 0..{N - 1}")
        _require(col not in seen, tp, f"duplicate column {col}")
        seen.add(col)
        c[col] = val
    rows, cols, vals = [], [], []
    seen = set()
    for n, (row, col, val) in enumerate(_triplets(doc["A"], f"{path}.A", 3)):
        tp = f"{path}.A.triplets[{n}]"
        _require(0 <= row < m, tp, f"row {row} out of range 0..{m - 1}")
        _require(0 <= col < N, tp, f"column {col} out of range 0..{N - 1}")
        _require((row, col) not in seen, tp, f"duplicate entry ({row},{col})")
        seen.add((row, col))
        rows.append(row)
        cols.append(col)
        vals.append(val)
    meta = doc.get("meta", {})
    _require(isinstance(meta, dict), f"{path}.meta", "expected an object")
    p = ConicProblem(m, blocks, b, c, rows, cols, vals, meta=dict(meta))
    problems = validate(p)
    _require(not problems, path, "; ".join(problems))
    return p


def dumps(obj, indent=0, step=1):
    """JSON text with every float written at 17 significant digits."""
    pad = " " * (indent + step)
    end = " " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent + step, step)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent + step, step) for v in obj) + "\n" + end + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _loads(text, what):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{what} is not valid JSON: {exc.msg}", exc.lineno) from None


def write_problem_json(problem):
    doc = problem_to_dict(problem)
    if problem.meta:
        doc["meta"] = {str(k): v for k, v in problem.meta.items() if isinstance(v, (str, int, float, bool))}
    return dumps(doc) + "\n"


def read_problem_json(text):
    return problem_from_dict(_loads(text, "problem file"))


def read_problem(path):
    """Read a problem file, choosing the format by extension (``.json`` or SDPA)."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if str(path).lower().endswith(".json"):
        return read_problem_json(text)
    return read_sdpa(text)


def write_problem(problem, path):
    text = write_problem_json(problem) if str(path).lower().endswith(".json") else write_sdpa(problem)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# ---------------------------------------------------------------------------
# solution files


def write_solution(x=None, y=None):
    """Solution container: ``x`` as packed-coordinate triplets, ``y`` as a list."""
    doc = {}
    if x is not None:
        x = np.asarray(x, dtype=float)
        doc["x"] = {"length": int(x.size),
                    "triplets": [[int(i), float(x[i])] for i in np.flatnonzero(x)]}
    if y is not None:
        doc["y"] = [float(v) for v in np.asarray(y, dtype=float)]
    return dumps(doc) + "\n"


def read_solution(text):
    """Returns ``(x, y)``; either may be ``None``."""
    doc = _loads(text, "solution file")
    _require(isinstance(doc, dict), "$", "expected an object")
    for key in doc:
        _require(key in SOLUTION_KEYS, f"$.{key}", "unknown key")
    x = y = None
    if "x" in doc:
        xd = doc["x"]
        _require(isinstance(xd, dict) and set(xd) == {"length", "triplets"}, "$.x",
                 "expected an object with 'length' and 'triplets'")
        n = _integer(xd["length"], "$.x.length")
        _require(n >= 0, "$.x.length", "must be nonnegative")
        x = np.zeros(n)
        for k, (i, v) in enumerate(_triplets({"triplets": xd["triplets"]}, "$.x", 2)):
            _require(0 <= i < n, f"$.x.triplets[{k}]", f"index {i} out of range")
            x[i] = v
    if "y" in doc:
        _require(isinstance(doc["y"], list), "$.y", "expected a list")
        y = np.array([_number(v, f"$.y[{i}]") for i, v in enumerate(doc["y"])])
    return x, y


# ---------------------------------------------------------------------------
# face-chain archives


def _matrix_doc(M):
    M = np.asarray(M, dtype=float)
    return {"shape": list(M.shape), "rows": [[float(v) for v in row] for row in M]}


def _matrix_from(doc, path):
    _require(isinstance(doc, dict) and set(doc) == {"shape", "rows"}, path,
             "expected an object with 'shape' and 'rows'")
    shape = doc["shape"]
    _require(isinstance(shape, list) and len(shape) == 2, f"{path}.shape", "expected [rows, cols]")
    r, c = (_integer(v, f"{path}.shape[{i}]") for i, v in enumerate(shape))
    rows = doc["rows"]
    _require(isinstance(rows, list) and len(rows) == r, f"{path}.rows", f"expected {r} rows")
    out = np.zeros((r, c))
    for i, row in enumerate(rows):
        _require(isinstance(row, list) and len(row) == c, f"{path}.rows[{i}]", f"expected {c} entries")
        out[i] = [_number(v, f"{path}.rows[{i}][{j}]") for j, v in enumerate(row)]
    return out


def _faces_doc(state):
    out = []
    for face in state:
        if face.kind is ConeKind.PSD:
            out.append({"kind": "psd", "n": face.n, "U": _matrix_doc(face.U)})
        elif face.kind is ConeKind.NONNEG:
            out.append({"kind": "nonneg", "n": face.n, "support": [int(i) for i in face.support]})
        else:
            out.append({"kind": face.kind.value, "n": face.n})
    return out


def _faces_from(doc, problem, path):
    _require(isinstance(doc, list) and len(doc) == len(problem.blocks), path,
             f"expected {len(problem.blocks)} block faces")
    faces = []
    for k, (fd, blk) in enumerate(zip(doc, problem.blocks)):
        fp = f"{path}[{k}]"
        _require(isinstance(fd, dict), fp, "expected an object")
        _require(fd.get("kind") == blk.kind.value and fd.get("n") == blk.size, fp,
                 f"face does not match block {blk.kind.value}({blk.size})")
        if blk.kind is ConeKind.PSD:
            U = _matrix_from(fd.get("U"), f"{fp}.U")
            _require(U.shape[0] == blk.size, f"{fp}.U", "wrong number of rows")
            faces.append(BlockFace.psd(U))
        elif blk.kind is ConeKind.NONNEG:
            sup = fd.get("support")
            _require(isinstance(sup, list), f"{fp}.support", "expected a list")
            idx = [_integer(v, f"{fp}.support[{i}]") for i, v in enumerate(sup)]
            _require(all(0 <= i < blk.size for i in idx), f"{fp}.support", "index out of range")
            faces.append(BlockFace.nonneg(blk.size, idx))
        else:
            faces.append(BlockFace.full(blk.kind, blk.size))
    return FaceState(tuple(faces))


def _certificate_doc(cert, problem):
    vec = cert.vector(problem)
    nz = np.flatnonzero(vec)
    return {
        "S": {"length": int(vec.size), "triplets": [[int(i), float(vec[i])] for i in nz]},
        "lam": [[float(v) for v in lam] for lam in cert.lam],
        "t": [[float(v) for v in t] for t in cert.t],
        "yhat": None if cert.yhat is None else [float(v) for v in cert.yhat],
    }


def _certificate_from(doc, problem, faces, side, path):
    _require(isinstance(doc, dict) and set(doc) == {"S", "lam", "t", "yhat"}, path,
             "expected an object with 'S', 'lam', 't' and 'yhat'")
    sd = doc["S"]
    _require(isinstance(sd, dict) and sd.get("length") == problem.N, f"{path}.S",
             f"expected length {problem.N}")
    vec = np.zeros(problem.N)
    for n, (i, v) in enumerate(_triplets({"triplets": sd.get("triplets")}, f"{path}.S", 2)):
        _require(0 <= i < problem.N, f"{path}.S.triplets[{n}]", "index out of range")
        vec[i] = v
    blocks, comps = [], []
    for k, face in enumerate(faces):
        part = vec[problem.block_slice(k)]
        if face.kind is ConeKind.PSD:
            blocks.append(smat(part))
        elif face.kind is ConeKind.NONNEG:
            blocks.append(part.copy())
        else:
            blocks.append(None)
        comps.append(None if blocks[-1] is None else face.compress(blocks[-1]))
    lam = tuple(np.array([_number(v, f"{path}.lam") for v in row]) for row in doc["lam"])
    t = tuple(np.array([_number(v, f"{path}.t") for v in row]) for row in doc["t"])
    yhat = None
    if doc["yhat"] is not None:
        _require(isinstance(doc["yhat"], list) and len(doc["yhat"]) == problem.m, f"{path}.yhat",
                 f"expected {problem.m} entries")
        yhat = np.array([_number(v, f"{path}.yhat") for v in doc["yhat"]])
    return Certificate(side, tuple(blocks), tuple(comps), lam, t, yhat)


def chain_to_dict(chain):
    return {
        "format": ARCHIVE_FORMAT,
        "side": chain.side.value,
        "approximation": str(chain.family),
        "tolerances": chain.tolerances.as_dict(),
        "condition2_applied": bool(chain.condition2_applied),
        "problem": problem_to_dict(chain.problem),
        "steps": [{"faces": _faces_doc(step.faces),
                   "certificate": _certificate_doc(step.certificate, chain.problem)}
                  for step in chain.steps],
        "final": _faces_doc(chain.final),
    }


def write_chain(chain):
    return dumps(chain_to_dict(chain)) + "\n"


def _same_face(a, b, tol=1e-8):
    if a.kind is not b.kind or a.dim != b.dim:
        return False
    if a.kind is ConeKind.PSD:
        if a.dim == 0:
            return True
        return np.abs(a.U @ a.U.T - b.U @ b.U.T).max() <= tol
    if a.kind is ConeKind.NONNEG:
        return np.array_equal(a.support, b.support)
    return True


def read_chain(text, replay=True):
    """Parse a chain archive; with ``replay`` every certificate and face update is re-checked."""
    doc = _loads(text, "chain archive")
    _require(isinstance(doc, dict), "$", "expected an object")
    _require(doc.get("format") == ARCHIVE_FORMAT, "$.format", f"expected {ARCHIVE_FORMAT!r}")
    for key in ("side", "approximation", "tolerances", "condition2_applied", "problem", "steps", "final"):
        _require(key in doc, f"$.{key}", "missing")
    try:
        side = Side.parse(doc["side"])
    except ValueError as exc:
        raise SchemaError("$.side", str(exc)) from None
    try:
        family = parse_family(doc["approximation"])
    except ValueError as exc:
        raise SchemaError("$.approximation", str(exc)) from None
    _require(isinstance(doc["tolerances"], dict), "$.tolerances", "expected an object")
    tol = Tolerances.from_dict(doc["tolerances"])
    problem = problem_from_dict(doc["problem"], "$.problem")
    _require(isinstance(doc["steps"], list), "$.steps", "expected a list")
    steps = []
    for i, sd in enumerate(doc["steps"]):
        sp_ = f"$.steps[{i}]"
        _require(isinstance(sd, dict) and set(sd) == {"faces", "certificate"}, sp_,
                 "expected an object with 'faces' and 'certificate'")
        faces = _faces_from(sd["faces"], problem, f"{sp_}.faces")
        cert = _certificate_from(sd["certificate"], problem, faces, side, f"{sp_}.certificate")
        steps.append(ChainStep(faces, cert))
    final = _faces_from(doc["final"], problem, "$.final")
    chain = FaceChain(problem, side, family, tuple(steps), final,
                      bool(doc["condition2_applied"]), tol)
    if replay:
        replay_chain(chain)
    return chain


def replay_chain(chain):
    """Raise :class:`InvalidArchive` unless every step revalidates against the problem."""
    from .reduce import face_update

    problem, tol = chain.problem, chain.tolerances
    expected = FaceState.initial(problem)
    for i, step in enumerate(chain.steps):
        if not all(_same_face(a, b) for a, b in zip(step.faces, expected)):
            raise InvalidArchive(f"step {i}: recorded faces do not follow from the previous step")
        issues = replay_certificate(problem, step.faces, step.certificate, tol)
        if issues:
            raise InvalidArchive(f"step {i}: " + "; ".join(issues))
        expected = face_update(step.faces, step.certificate, tol)
    if not all(_same_face(a, b) for a, b in zip(chain.final, expected)):
        raise InvalidArchive("final faces do not follow from the last certificate")
    return True


# ---------------------------------------------------------------------------
# reduction logs


def log_dict(report):
    def dims(d):
        return {"sizes": list(d.sizes), "r": d.r, "text": str(d)}

    return {
        "side": report.side.value,
        "approximation": report.approximation,
        "original": dims(report.original),
        "reduced": dims(report.reduced),
        "original_face_dims": list(report.original_face_dims),
        "reduced_face_dims": list(report.reduced_face_dims),
        "iterations": [rec.as_dict() for rec in report.iterations],
        "final_search": None if report.final_search is None else report.final_search.as_dict(),
        "stop_reason": report.stop_reason,
        "total_lp_time": report.total_lp_time,
        "total_time": report.total_time,
        "condition2_applied": report.condition2_applied,
        "tolerances": dict(report.tolerances),
        "notes": list(report.notes),
    }


def write_log(report):
    return dumps(log_dict(report)) + "\n"
