"""JSON schemas and a canonical writer.

Schemas (complex numbers are always [re, im] pairs):

  algebra      {"factors": [[n, w], ...]}
  module       {"factors": ..., "mults": [k, ...]}
  operator     {"factors": ..., "mults": [k, ...], "blocks": [[[re,im],...],...]}
               mults describe the domain; codomain multiplicities are read
               off the block row counts
  complex      {"algebra": ..., "degrees": [[k,...], ...], "diffs": [op blocks
               per degree], "metric": {"type": "exp", "generators": [...]},
               "p": int}
  holonomy     {"generators": [operator, ...], "relators": [[[j, +-1], ...], ...]}
               generator indices j are 0-based
  form matrix  {"dim2n": int, "size": int, "entries": [[cell, ...], ...]} with
               cell = [{"subset": [i, ...], "coeff": [re, im]}, ...], 1-based
               generator indices

The writer emits sorted keys and 17-significant-digit floats so identical
data gives byte-identical text.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .errors import ParseError, ValidationError
from .hilbert_complex import ExpMetricFamily, FiniteComplex, finite_complex
from .index_density import FormMatrix, form, form_matrix
from .vn_core import Algebra, CommutantOp, Module, make_algebra, module, op

# ------------------------------------------------------- canonical writer

def _fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValidationError("cannot serialize non-finite float")
    out = format(float(x), ".17g")
    # keep a uniform numeric shape: "1" not "1.0" is fine for json readers,
    # but distinguish float-typed values from ints explicitly
    if "e" not in out and "." not in out and "n" not in out:
        out += ".0"
    return out


def canonical_dumps(obj) -> str:
    """Deterministic JSON text: sorted keys, .17g floats, no whitespace."""
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(canonical_dumps(v) for v in obj) + "]"
    if isinstance(obj, dict):
        parts = []
        for key in sorted(obj):
            if not isinstance(key, str):
                raise ValidationError("object keys must be strings")
            parts.append(json.dumps(key) + ":" + canonical_dumps(obj[key]))
        return "{" + ",".join(parts) + "}"
    raise ValidationError("cannot serialize %r" % type(obj))


def loads(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError("invalid JSON: %s" % exc) from exc


def _field(d, key, kinds, what):
    if not isinstance(d, dict):
        raise ParseError("%s must be an object" % what)
    if key not in d:
        raise ParseError("%s is missing field '%s'" % (what, key))
    val = d[key]
    if kinds is not None and not isinstance(val, kinds):
        raise ParseError("field '%s' of %s has the wrong type" % (key, what))
    return val


# ------------------------------------------------------------- primitives

def pair_to_complex(v) -> complex:
    if not (isinstance(v, list) and len(v) == 2
            and all(isinstance(t, (int, float)) for t in v)):
        raise ParseError("complex values must be [re, im] pairs")
    return complex(float(v[0]), float(v[1]))


def complex_to_pair(c) -> list:
    c = complex(c)
    return [float(c.real), float(c.imag)]


def block_to_json(b: np.ndarray) -> list:
    return [[complex_to_pair(x) for x in row] for row in np.asarray(b)]


def block_from_json(rows) -> np.ndarray:
    if not isinstance(rows, list) or any(not isinstance(r, list) for r in rows):
        raise ParseError("blocks must be nested lists")
    if rows and len({len(r) for r in rows}) != 1:
        raise ParseError("block rows have uneven lengths")
    out = np.array([[pair_to_complex(x) for x in row] for row in rows],
                   dtype=complex)
    if out.size == 0:
        out = out.reshape(len(rows), 0)
    return out


# ----------------------------------------------------- algebra and module

def algebra_to_json(a: Algebra) -> dict:
    return {"factors": [[int(n), float(w)] for n, w in a.factors]}


def algebra_from_json(d) -> Algebra:
    factors = _field(d, "factors", list, "algebra")
    out = []
    for f in factors:
        if not (isinstance(f, list) and len(f) == 2):
            raise ParseError("factors must be [size, weight] pairs")
        out.append((int(f[0]), float(f[1])))
    return make_algebra(out)


def module_to_json(m: Module) -> dict:
    d = algebra_to_json(m.algebra)
    d["mults"] = [int(k) for k in m.mults]
    return d


def module_from_json(d) -> Module:
    alg = algebra_from_json(d)
    mults = _field(d, "mults", list, "module")
    return module(alg, [int(k) for k in mults])


def op_to_json(t: CommutantOp) -> dict:
    d = module_to_json(t.domain)
    d["blocks"] = [block_to_json(b) for b in t.blocks]
    return d


def op_from_json(d) -> CommutantOp:
    dom = module_from_json(d)
    raw = _field(d, "blocks", list, "operator")
    if len(raw) != dom.algebra.num_factors:
        raise ParseError("need one block per factor")
    blocks = []
    cod_mults = []
    for i, rows in enumerate(raw):
        b = block_from_json(rows)
        if b.shape[1] != dom.mults[i]:
            raise ParseError("block %d has %d columns, expected %d"
                             % (i, b.shape[1], dom.mults[i]))
        blocks.append(b)
        cod_mults.append(b.shape[0])
    cod = module(dom.algebra, cod_mults)
    return op(dom, cod, blocks)


# ---------------------------------------------------------------- complex

def complex_to_json(c: FiniteComplex, mf: ExpMetricFamily = None) -> dict:
    d = {
        "algebra": algebra_to_json(c.algebra),
        "degrees": [[int(k) for k in m.mults] for m in c.degrees],
        "diffs": [[block_to_json(b) for b in diff.blocks] for diff in c.diffs],
        "p": int(c.p),
    }
    if mf is not None:
        d["metric"] = {
            "type": "exp",
            "generators": [[block_to_json(b) for b in g.blocks]
                           for g in mf.generators],
        }
    return d


def complex_from_json(d):
    """Returns (FiniteComplex, ExpMetricFamily or None)."""
    alg = algebra_from_json(_field(d, "algebra", dict, "complex"))
    degree_mults = _field(d, "degrees", list, "complex")
    mods = [module(alg, [int(k) for k in mults]) for mults in degree_mults]
    raw_diffs = _field(d, "diffs", list, "complex")
    if len(raw_diffs) != max(len(mods) - 1, 0):
        raise ParseError("need one differential per adjacent degree pair")
    diffs = []
    for q, per_factor in enumerate(raw_diffs):
        if not isinstance(per_factor, list) or len(per_factor) != alg.num_factors:
            raise ParseError("differential %d needs one block per factor" % q)
        diffs.append(op(mods[q], mods[q + 1],
                        [block_from_json(b) for b in per_factor]))
    p = int(d.get("p", 0))
    c = finite_complex(mods, diffs, p)
    mf = None
    if "metric" in d:
        md = d["metric"]
        if _field(md, "type", str, "metric") != "exp":
            raise ParseError("only metric type 'exp' is supported")
        gens_raw = _field(md, "generators", list, "metric")
        if len(gens_raw) != len(mods):
            raise ParseError("need one metric generator per degree")
        gens = []
        for q, per_factor in enumerate(gens_raw):
            if not isinstance(per_factor, list) or len(per_factor) != alg.num_factors:
                raise ParseError("metric generator %d needs one block per factor" % q)
            gens.append(op(mods[q], mods[q],
                           [block_from_json(b) for b in per_factor]))
        mf = ExpMetricFamily(gens)
    return c, mf


# --------------------------------------------------------------- holonomy

def holonomy_to_json(generators, relators=()) -> dict:
    return {
        "generators": [op_to_json(g) for g in generators],
        "relators": [[[int(j), int(e)] for j, e in word] for word in relators],
    }


def holonomy_from_json(d):
    gens_raw = _field(d, "generators", list, "holonomy data")
    generators = [op_from_json(g) for g in gens_raw]
    relators = []
    for word in d.get("relators", []):
        if not isinstance(word, list):
            raise ParseError("relators must be lists of [index, exponent]")
        letters = []
        for item in word:
            if not (isinstance(item, list) and len(item) == 2):
                raise ParseError("relator letters must be [index, exponent]")
            letters.append((int(item[0]), int(item[1])))
        relators.append(letters)
    return generators, relators


# ------------------------------------------------------------ form matrix

def form_matrix_to_json(fm: FormMatrix) -> dict:
    entries = []
    for row in fm.entries:
        out_row = []
        for cell in row:
            out_row.append([
                {"subset": [int(i) for i in subset], "coeff": complex_to_pair(c)}
                for subset, c in cell.terms
            ])
        entries.append(out_row)
    return {"dim2n": int(fm.dim2n), "size": int(fm.size), "entries": entries}


def form_matrix_from_json(d) -> FormMatrix:
    dim2n = int(_field(d, "dim2n", int, "form matrix"))
    size = int(_field(d, "size", int, "form matrix"))
    raw = _field(d, "entries", list, "form matrix")
    if len(raw) != size or any(not isinstance(r, list) or len(r) != size for r in raw):
        raise ParseError("entries must form a size x size grid")
    rows = []
    for row in raw:
        cells = []
        for cell in row:
            if not isinstance(cell, list):
                raise ParseError("cells must be lists of terms")
            terms = {}
            for t in cell:
                subset = tuple(int(i) for i in _field(t, "subset", list, "term"))
                coeff = pair_to_complex(_field(t, "coeff", list, "term"))
                terms[subset] = terms.get(subset, 0.0) + coeff
            cells.append(form(dim2n, terms))
        rows.append(cells)
    return form_matrix(dim2n, rows)
