"""Fixed-format MPS writer and a matching reader.

Layout of data lines (1-based character columns)::

    2-3   row type or bound type
    5-12  row / column / bound-set name
    15-22 row or column name
    25-   first value, then (when present) a second name at 40 and value at 50

Numbers are written with 12 significant digits. Such a number can be up to
18 characters wide, so a value may run past its nominal 12-character field;
the reader and common solvers split data lines on whitespace, which is safe
because no name contains a blank. Columns are named from the variable
layout (P_t_i, U_t_i, Z_t_i, W_t_l) when those names fit in 8 characters,
otherwise C0000001...; rows are always R0000001... and the objective row is
COST. The objective is the minimization form (negated profit).
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from ..formulation import EQ, GE, LE, MilpProblem
from .tables import ParseError

OBJ_ROW = "COST"
_MPS_SENSE = {LE: "L", GE: "G", EQ: "E"}


def _num(v: float) -> str:
    s = format(float(v), ".12g")
    return "0" if s == "-0" else s


def _names(problem: MilpProblem):
    names = None
    if problem.layout is not None:
        names = problem.layout.column_names()
        if max(len(n) for n in names) > 8:
            names = None
    if names is None:
        names = [f"C{j + 1:07d}" for j in range(problem.n_cols)]
    rows = [f"R{k + 1:07d}" for k in range(problem.n_rows)]
    return names, rows


def _data_line(first, entries):
    """Name in columns 5-12, then up to two (row name, value) pairs."""
    line = "    " + f"{first:<8}"
    for b, (rname, val) in enumerate(entries):
        line += ("  " if b == 0 else "   ") + f"{rname:<8}  {val:>12}"
    return line


def export_mps(problem: MilpProblem, name: str = "UCDR") -> str:
    cols, rows = _names(problem)
    out = [f"NAME          {name}", "ROWS", f" N  {OBJ_ROW}"]
    for r, s in zip(rows, problem.sense):
        out.append(f" {_MPS_SENSE[s]}  {r}")
    out.append("COLUMNS")
    A = sp.csc_matrix(problem.A)
    A.sort_indices()
    integ = np.asarray(problem.integrality, dtype=bool)
    in_int = False
    marker = 0
    for j, cname in enumerate(cols):
        if integ[j] != in_int:
            tag = "'INTORG'" if integ[j] else "'INTEND'"
            out.append(f"    MARK{marker:04d}  'MARKER'                 {tag}")
            marker += 1
            in_int = bool(integ[j])
        entries = []
        if problem.cost[j] != 0:
            entries.append((OBJ_ROW, _num(problem.cost[j])))
        lo, hi = A.indptr[j], A.indptr[j + 1]
        for k, v in zip(A.indices[lo:hi], A.data[lo:hi]):
            if v != 0:
                entries.append((rows[k], _num(v)))
        if not entries:
            # keep the column declared even when it appears nowhere
            entries.append((OBJ_ROW, "0"))
        for a in range(0, len(entries), 2):
            out.append(_data_line(cname, entries[a:a + 2]))
    if in_int:
        out.append(f"    MARK{marker:04d}  'MARKER'                 'INTEND'")
    out.append("RHS")
    rhs = [(rows[k], _num(v)) for k, v in enumerate(problem.rhs) if v != 0]
    if problem.constant != 0:
        rhs.insert(0, (OBJ_ROW, _num(-problem.constant)))
    for a in range(0, len(rhs), 2):
        out.append(_data_line("RHS", rhs[a:a + 2]))
    out.append("BOUNDS")
    for j, cname in enumerate(cols):
        lo, hi = float(problem.lo[j]), float(problem.hi[j])
        if integ[j] and lo >= 0 and hi <= 1:
            out.append(f" BV BND       {cname}")
            if lo == hi:
                out.append(f" FX BND       {cname:<8}  {_num(lo):>12}")
            continue
        if lo == hi:
            out.append(f" FX BND       {cname:<8}  {_num(lo):>12}")
            continue
        if lo == -np.inf and hi == np.inf:
            out.append(f" FR BND       {cname}")
            continue
        if lo == -np.inf:
            out.append(f" MI BND       {cname}")
        elif lo != 0:
            out.append(f" LO BND       {cname:<8}  {_num(lo):>12}")
        if hi != np.inf:
            out.append(f" UP BND       {cname:<8}  {_num(hi):>12}")
    out.append("ENDATA")
    return "\n".join(out) + "\n"


_SECTIONS = ("NAME", "ROWS", "COLUMNS", "RHS", "RANGES", "BOUNDS", "ENDATA")


def _value(tok, line, column):
    try:
        return float(tok)
    except ValueError:
        raise ParseError(line, column, f"not a number: {tok!r}") from None


def read_mps(text: str) -> MilpProblem:
    """Parse MPS text (as written by `export_mps`) back into a MilpProblem."""
    section = None
    obj = None
    row_index, row_names, senses = {}, [], []
    col_index, col_names, integ = {}, [], []
    ri, ci, vals = [], [], []
    cost = {}
    rhs = {}
    constant = 0.0
    bounds = []
    in_int = False
    ended = False
    for k, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip() or raw.startswith("*"):
            continue
        if not raw[0].isspace():
            head = raw.split()[0]
            if head not in _SECTIONS:
                raise ParseError(k, head, f"unknown section {head}")
            section = head
            if head == "ENDATA":
                ended = True
                break
            if head == "RANGES":
                raise ParseError(k, head, "RANGES are not supported")
            continue
        tok = raw.split()
        if section == "ROWS":
            if len(tok) != 2 or tok[0] not in ("N", "L", "G", "E"):
                raise ParseError(k, None, "malformed ROWS line")
            if tok[0] == "N":
                if obj is None:
                    obj = tok[1]
                continue
            if tok[1] in row_index:
                raise ParseError(k, tok[1], "duplicated row name")
            row_index[tok[1]] = len(row_names)
            row_names.append(tok[1])
            senses.append({"L": LE, "G": GE, "E": EQ}[tok[0]])
        elif section == "COLUMNS":
            if len(tok) >= 3 and tok[1] == "'MARKER'":
                in_int = tok[2] == "'INTORG'"
                continue
            if len(tok) not in (3, 5):
                raise ParseError(k, None, "malformed COLUMNS line")
            name = tok[0]
            if name not in col_index:
                col_index[name] = len(col_names)
                col_names.append(name)
                integ.append(in_int)
            j = col_index[name]
            for a in range(1, len(tok), 2):
                rname, v = tok[a], _value(tok[a + 1], k, tok[a])
                if rname == obj:
                    cost[j] = cost.get(j, 0.0) + v
                elif rname in row_index:
                    ri.append(row_index[rname])
                    ci.append(j)
                    vals.append(v)
                else:
                    raise ParseError(k, rname, "unknown row")
        elif section == "RHS":
            if len(tok) not in (3, 5):
                raise ParseError(k, None, "malformed RHS line")
            for a in range(1, len(tok), 2):
                rname, v = tok[a], _value(tok[a + 1], k, tok[a])
                if rname == obj:
                    constant = -v
                elif rname in row_index:
                    rhs[row_index[rname]] = v
                else:
                    raise ParseError(k, rname, "unknown row")
        elif section == "BOUNDS":
            kind = tok[0]
            if kind in ("BV", "FR", "MI", "PL"):
                if len(tok) != 3:
                    raise ParseError(k, None, f"malformed {kind} bound")
                bounds.append((k, kind, tok[2], None))
            elif kind in ("UP", "LO", "FX"):
                if len(tok) != 4:
                    raise ParseError(k, None, f"malformed {kind} bound")
                bounds.append((k, kind, tok[2], _value(tok[3], k, tok[2])))
            else:
                raise ParseError(k, kind, f"unsupported bound type {kind}")
        else:
            raise ParseError(k, None, "data line outside a section")
    if not ended:
        raise ParseError(len(text.splitlines()), None, "missing ENDATA")
    n, m = len(col_names), len(row_names)
    lo = np.zeros(n)
    hi = np.full(n, np.inf)
    integ = np.array(integ, dtype=bool)
    hi[integ] = 1.0          # integer columns default to binary unless bounded otherwise
    for k, kind, cname, v in bounds:
        if cname not in col_index:
            raise ParseError(k, cname, "bound on unknown column")
        j = col_index[cname]
        if kind == "BV":
            lo[j], hi[j] = 0.0, 1.0
            integ[j] = True
        elif kind == "FR":
            lo[j], hi[j] = -np.inf, np.inf
        elif kind == "MI":
            lo[j] = -np.inf
        elif kind == "PL":
            hi[j] = np.inf
        elif kind == "UP":
            hi[j] = v
        elif kind == "LO":
            lo[j] = v
        elif kind == "FX":
            lo[j] = hi[j] = v
    A = sp.coo_matrix((vals, (ri, ci)), shape=(m, n)).tocsr()
    c = np.zeros(n)
    for j, v in cost.items():
        c[j] = v
    b = np.zeros(m)
    for r, v in rhs.items():
        b[r] = v

    def frozen(a):
        a = np.array(a)
        a.flags.writeable = False
        return a

    return MilpProblem(
        cost=frozen(c), constant=constant, A=A, sense=frozen(np.array(senses, dtype="<U1")),
        rhs=frozen(b), lo=frozen(lo), hi=frozen(hi), integrality=frozen(integ),
        layout=None, tags=tuple("MPS" for _ in range(m)), names=tuple(row_names))
