"""Reading and writing instances as ``.stp`` text or JSON.

The STP dialect is SteinLib's, with the terminal section replaced by
prized nodes::

    33D32945 STP File, STP Format Version 1.0

    SECTION Comment
    Name "example"
    END

    SECTION Parameters
    Lambda 1.5
    END

    SECTION Graph
    Nodes 3
    Edges 2
    E 1 2 1.0
    A 2 3 2.0 2.5
    END

    SECTION NodePrizes
    TP 2 0.5
    TP 3 3.0
    END

    EOF

Node numbers are 1-based in STP and 0-based everywhere else.  ``E u v c``
is a symmetric edge; ``A u v c_uv c_vu`` an edge with one cost per
orientation.  ``SECTION Terminals`` is accepted as an alias of
``SECTION NodePrizes``; a bare ``T v`` line (terminal without prize) is an
error.  Unknown sections are skipped with an :class:`InstanceFormatWarning`.

The JSON form is::

    {"name": ..., "node_count": n, "lambda": lam, "prizes": [...],
     "edges": [[i, j, c], [i, j, c_ij, c_ji], ...]}
"""

from __future__ import annotations

import json
import math
import warnings

from .instance import Instance, validate

STP_MAGIC = "33D32945 STP File, STP Format Version 1.0"


class InstanceFormatError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"{message} at line {line}"
        super().__init__(message)


class InstanceFormatWarning(UserWarning):
    pass


def parse_instance(text: str, fmt: str = "stp") -> Instance:
    if fmt == "stp":
        return _parse_stp(text)
    if fmt == "json":
        return _parse_json(text)
    raise ValueError(f"unknown format {fmt!r}")


def write_instance(inst: Instance, fmt: str = "stp") -> str:
    if fmt == "stp":
        return _write_stp(inst)
    if fmt == "json":
        return _write_json(inst)
    raise ValueError(f"unknown format {fmt!r}")


def read_instance(path, fmt=None) -> Instance:
    path = str(path)
    if fmt is None:
        fmt = "json" if path.endswith(".json") else "stp"
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read(), fmt)


def save_instance(inst: Instance, path, fmt=None) -> None:
    path = str(path)
    if fmt is None:
        fmt = "json" if path.endswith(".json") else "stp"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(write_instance(inst, fmt))


def _number(tok, lineno, what):
    try:
        x = float(tok)
    except ValueError:
        raise InstanceFormatError(f"bad {what} {tok!r}", lineno) from None
    if not math.isfinite(x):
        raise InstanceFormatError(f"non-finite {what}", lineno)
    if x < 0:
        raise InstanceFormatError(f"negative {what}", lineno)
    return x


def _node(tok, lineno, n):
    try:
        v = int(tok)
    except ValueError:
        raise InstanceFormatError(f"bad node index {tok!r}", lineno) from None
    if n is None:
        raise InstanceFormatError("node referenced before Nodes count", lineno)
    if not 1 <= v <= n:
        raise InstanceFormatError(f"node index {v} out of range", lineno)
    return v - 1


def _parse_stp(text: str) -> Instance:
    lines = text.splitlines()
    n = None
    declared_edges = None
    name = ""
    lam = 1.0
    edges = []
    prizes = {}
    section = None
    seen_eof = False
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        key = toks[0].upper()
        if lineno == 1 and line.startswith("33D32945"):
            continue
        if key == "EOF":
            seen_eof = True
            break
        if section is None:
            if key != "SECTION" or len(toks) < 2:
                raise InstanceFormatError(f"expected SECTION, got {toks[0]!r}", lineno)
            section = toks[1].lower()
            if section not in ("comment", "parameters", "graph", "nodeprizes", "terminals"):
                warnings.warn(f"ignoring unknown section {toks[1]!r} (line {lineno})",
                              InstanceFormatWarning, stacklevel=3)
                section = "skip"
            continue
        if key == "END":
            section = None
            continue
        if section == "skip":
            continue
        if section == "comment":
            if key == "NAME":
                name = line.split(None, 1)[1].strip().strip('"') if len(toks) > 1 else ""
            continue
        if section == "parameters":
            if key == "LAMBDA":
                if len(toks) != 2:
                    raise InstanceFormatError("Lambda takes one value", lineno)
                lam = _number(toks[1], lineno, "lambda")
            else:
                warnings.warn(f"ignoring parameter {toks[0]!r} (line {lineno})",
                              InstanceFormatWarning, stacklevel=3)
            continue
        if section == "graph":
            if key == "NODES":
                if len(toks) != 2 or not toks[1].isdigit():
                    raise InstanceFormatError("bad Nodes line", lineno)
                n = int(toks[1])
            elif key in ("EDGES", "ARCS"):
                if len(toks) != 2 or not toks[1].isdigit():
                    raise InstanceFormatError(f"bad {toks[0]} line", lineno)
                declared_edges = int(toks[1])
            elif key == "E":
                if len(toks) != 4:
                    raise InstanceFormatError("E line needs 3 fields", lineno)
                u, v = _node(toks[1], lineno, n), _node(toks[2], lineno, n)
                c = _number(toks[3], lineno, "cost")
                edges.append((u, v, c, c, lineno))
            elif key == "A":
                if len(toks) != 5:
                    raise InstanceFormatError("A line needs 4 fields", lineno)
                u, v = _node(toks[1], lineno, n), _node(toks[2], lineno, n)
                c = _number(toks[3], lineno, "cost")
                rc = _number(toks[4], lineno, "cost")
                edges.append((u, v, c, rc, lineno))
            else:
                raise InstanceFormatError(f"unexpected {toks[0]!r} in Graph section", lineno)
            continue
        # nodeprizes / terminals
        if key == "TP":
            if len(toks) != 3:
                raise InstanceFormatError("TP line needs 2 fields", lineno)
            v = _node(toks[1], lineno, n)
            if v in prizes:
                raise InstanceFormatError(f"prize for node {v + 1} given twice", lineno)
            prizes[v] = _number(toks[2], lineno, "prize")
        elif key == "T":
            raise InstanceFormatError("terminal without prize", lineno)
        elif key == "TERMINALS":
            continue
        else:
            raise InstanceFormatError(f"unexpected {toks[0]!r} in prize section", lineno)
    if section is not None and section != "skip" and not seen_eof:
        raise InstanceFormatError(f"unterminated section {section!r}", len(lines))
    if n is None:
        raise InstanceFormatError("missing Nodes count", None)
    if declared_edges is not None and declared_edges != len(edges):
        raise InstanceFormatError(
            f"declared {declared_edges} edges but found {len(edges)}", None)
    seen = {}
    for u, v, _, _, lineno in edges:
        if u == v:
            raise InstanceFormatError(f"self-loop on node {u + 1}", lineno)
        k = (min(u, v), max(u, v))
        if k in seen:
            raise InstanceFormatError(f"duplicate edge {k[0] + 1}-{k[1] + 1}", lineno)
        seen[k] = lineno
    b = [prizes.get(i, 0.0) for i in range(n)]
    inst = Instance.from_edges(n, [e[:4] for e in edges], b, lam, name)
    _raise_if_invalid(inst)
    return inst


def _fmt(x: float) -> str:
    # repr() round-trips every double exactly
    x = float(x)
    if x.is_integer() and abs(x) < 2**53:
        return str(int(x))
    return repr(x)


def _write_stp(inst: Instance) -> str:
    out = [STP_MAGIC, "", "SECTION Comment", f'Name "{inst.name}"', "END", "",
           "SECTION Parameters", f"Lambda {_fmt(inst.lam)}", "END", "",
           "SECTION Graph", f"Nodes {inst.node_count}", f"Edges {inst.edge_count}"]
    for t, h, c, rc in zip(inst.tails.tolist(), inst.heads.tolist(),
                           inst.costs.tolist(), inst.rcosts.tolist()):
        if c == rc:
            out.append(f"E {t + 1} {h + 1} {_fmt(c)}")
        else:
            out.append(f"A {t + 1} {h + 1} {_fmt(c)} {_fmt(rc)}")
    out += ["END", "", "SECTION NodePrizes"]
    for i, b in enumerate(inst.prizes.tolist()):
        if b != 0:
            out.append(f"TP {i + 1} {_fmt(b)}")
    out += ["END", "", "EOF", ""]
    return "\n".join(out)


def _write_json(inst: Instance) -> str:
    edges = []
    for t, h, c, rc in zip(inst.tails.tolist(), inst.heads.tolist(),
                           inst.costs.tolist(), inst.rcosts.tolist()):
        edges.append([t, h, c] if c == rc else [t, h, c, rc])
    doc = {"name": inst.name, "node_count": inst.node_count, "lambda": inst.lam,
           "prizes": inst.prizes.tolist(), "edges": edges}
    return json.dumps(doc, indent=1) + "\n"


def _parse_json(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"invalid json: {exc.msg}", exc.lineno) from None
    try:
        n = int(doc["node_count"])
        edges = [tuple(e) for e in doc["edges"]]
        prizes = doc["prizes"]
        lam = float(doc.get("lambda", 1.0))
        name = str(doc.get("name", ""))
    except (KeyError, TypeError, ValueError) as exc:
        raise InstanceFormatError(f"malformed instance document: {exc}") from None
    for e in edges:
        if len(e) not in (3, 4):
            raise InstanceFormatError(f"edge entry {list(e)} needs 3 or 4 fields")
    inst = Instance.from_edges(n, edges, prizes, lam, name)
    _raise_if_invalid(inst)
    return inst


def _raise_if_invalid(inst):
    problems = validate(inst)
    if problems:
        raise InstanceFormatError("; ".join(problems))
