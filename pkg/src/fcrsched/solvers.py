"""Solver backends and model exchange formats.

Three interchangeable ways to optimize a `MilpModel`:

* ``scipy``    - in-process branch-and-cut via `scipy.optimize.milp`.
* ``micro``    - self-contained exact branch-and-bound on top of the bundled
  two-phase simplex; refuses models above 24 binaries or 200 continuous
  variables. Useful as an independent cross-check and when scipy is absent.
* ``external:<command template>`` - writes the model to disk, runs any MILP
  solver as a subprocess and parses its solution file. The template may use
  the placeholders ``{model_file}``, ``{solution_file}``, ``{time_limit}``
  and ``{gap}``.

Model files can be written as free MPS (default), fixed MPS (8-character
generated names) or CPLEX-style LP text. Every export writes a sidecar
``<file>.names.json`` mapping file names back to registry names; the bundled
MPS/LP parsers restore registry names through it, so export/parse round-trips
reproduce the model exactly.
"""

from __future__ import annotations

import json
import math
import os
import re
import shlex
import subprocess
import tempfile
import time
from dataclasses import dataclass

import numpy as np

from .errors import (
    BackendError,
    InvalidParameter,
    ParseError,
    TooLarge,
    UnsupportedFormat,
)
from .milp import MilpModel
from .simplex import solve_lp

MICRO_MAX_BINARIES = 24
MICRO_MAX_CONTINUOUS = 200

EXPORT_FORMATS = ("mps", "mps-fixed", "lp")

_STATUS_WORDS = {"Optimal", "Infeasible", "TimeLimit", "BackendError"}


@dataclass(frozen=True)
class SolveResult:
    status: str
    x: np.ndarray | None
    objective: float | None
    gap: float
    wall_time: float
    backend: str
    message: str = ""

    def __post_init__(self):
        if self.status not in _STATUS_WORDS:
            raise InvalidParameter(f"unknown solve status {self.status!r}")

    @property
    def ok(self) -> bool:
        return self.status == "Optimal" and self.x is not None


# -- name handling -----------------------------------------------------------

def sanitize_name(name: str) -> str:
    """Registry name to file-safe name: `p_ch[t=37]` -> `p_ch_t37`."""
    return (name.replace("[", "_").replace("]", "")
            .replace("=", "").replace(",", "_"))


def _file_names(model: MilpModel, fixed: bool) -> tuple[list[str], list[str]]:
    if fixed:
        vnames = [f"C{c:07d}" for c in range(model.n_vars)]
        rnames = [f"R{r:07d}" for r in range(model.n_rows)]
        return vnames, rnames
    vnames = [sanitize_name(n) for n in model.var_names]
    rnames = [sanitize_name(name) for name, *_ in model.rows]
    for group in (vnames, rnames):
        if len(set(group)) != len(group):
            raise InvalidParameter("sanitized names collide; registry not bijective")
    return vnames, rnames


def _write_sidecar(path: str, model: MilpModel, vnames: list[str],
                   rnames: list[str], fmt: str) -> str:
    sidecar = path + ".names.json"
    payload = {
        "format": fmt,
        "model_name": model.name,
        # insertion order records the original column/row order, letting the
        # parsers rebuild a model whose registry order matches the exported one
        "variables": dict(zip(vnames, model.var_names)),
        "rows": dict(zip(rnames, [name for name, *_ in model.rows])),
    }
    with open(sidecar, "w", encoding="ascii") as fh:
        fh.write(json.dumps(payload, indent=2))
        fh.write("\n")
    return sidecar


def _num(v: float) -> str:
    return repr(float(v))


# -- writers ---------------------------------------------------------------

def _write_mps(model: MilpModel, path: str, fixed: bool) -> None:
    vnames, rnames = _file_names(model, fixed)
    sense_tag = {"<=": "L", ">=": "G", "==": "E"}
    by_col: dict[int, list[tuple[str, float]]] = {c: [] for c in range(model.n_vars)}
    for r, (name, coeffs, sense, rhs) in enumerate(model.rows):
        for col, v in coeffs:
            by_col[col].append((rnames[r], v))
    lines = [f"NAME          {model.name}", "OBJSENSE", "    MAX", "ROWS",
             " N  OBJ"]
    for r, (name, coeffs, sense, rhs) in enumerate(model.rows):
        lines.append(f" {sense_tag[sense]}  {rnames[r]}")
    lines.append("COLUMNS")
    in_int = False
    marker = 0
    for c in range(model.n_vars):
        if model.is_binary[c] != in_int:
            tag = "INTORG" if model.is_binary[c] else "INTEND"
            lines.append(f"    MARKER{marker:04d}  'MARKER'  '{tag}'")
            marker += 1
            in_int = model.is_binary[c]
        entries = list(by_col[c])
        if c in model.objective and model.objective[c] != 0.0:
            entries.insert(0, ("OBJ", model.objective[c]))
        if not entries:
            entries = [("OBJ", 0.0)]
        for rname, v in entries:
            lines.append(f"    {vnames[c]}  {rname}  {_num(v)}")
    if in_int:
        lines.append(f"    MARKER{marker:04d}  'MARKER'  'INTEND'")
    lines.append("RHS")
    if model.objective_const != 0.0:
        lines.append(f"    RHS1  OBJ  {_num(-model.objective_const)}")
    for r, (name, coeffs, sense, rhs) in enumerate(model.rows):
        if rhs != 0.0:
            lines.append(f"    RHS1  {rnames[r]}  {_num(rhs)}")
    lines.append("BOUNDS")
    for c in range(model.n_vars):
        lo, hi = model.lb[c], model.ub[c]
        if model.is_binary[c] and lo == 0.0 and hi == 1.0:
            lines.append(f" BV BND  {vnames[c]}")
        elif lo == hi:
            lines.append(f" FX BND  {vnames[c]}  {_num(lo)}")
        else:
            lines.append(f" LO BND  {vnames[c]}  {_num(lo)}")
            lines.append(f" UP BND  {vnames[c]}  {_num(hi)}")
    lines.append("ENDATA")
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")


def _lp_terms(coeffs: list[tuple[int, float]], vnames: list[str]) -> str:
    parts = []
    for col, v in coeffs:
        sign = "-" if v < 0 else "+"
        parts.append(f"{sign} {_num(abs(v))} {vnames[col]}")
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else text


def _write_lp(model: MilpModel, path: str) -> None:
    vnames, rnames = _file_names(model, fixed=False)
    lines = [f"\\ {model.name}", "Maximize"]
    obj = [(c, v) for c, v in sorted(model.objective.items()) if v != 0.0]
    body = _lp_terms(obj, vnames) if obj else f"0 {vnames[0]}"
    if model.objective_const != 0.0:
        body += f" + {_num(model.objective_const)}" \
            if model.objective_const > 0 else f" - {_num(-model.objective_const)}"
    lines.append(f" obj: {body}")
    lines.append("Subject To")
    sense_txt = {"<=": "<=", ">=": ">=", "==": "="}
    for r, (name, coeffs, sense, rhs) in enumerate(model.rows):
        lines.append(f" {rnames[r]}: {_lp_terms(coeffs, vnames)} "
                     f"{sense_txt[sense]} {_num(rhs)}")
    lines.append("Bounds")
    for c in range(model.n_vars):
        lo, hi = model.lb[c], model.ub[c]
        if lo == hi:
            lines.append(f" {vnames[c]} = {_num(lo)}")
        else:
            lines.append(f" {_num(lo)} <= {vnames[c]} <= {_num(hi)}")
    bins = [vnames[c] for c in range(model.n_vars) if model.is_binary[c]]
    if bins:
        lines.append("Binaries")
        for i in range(0, len(bins), 8):
            lines.append(" " + " ".join(bins[i:i + 8]))
    lines.append("End")
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")


def export_model(model: MilpModel, path: str, fmt: str = "mps") -> str:
    """Write the model plus its name sidecar; returns the sidecar path."""
    if fmt not in EXPORT_FORMATS:
        raise UnsupportedFormat(f"format {fmt!r}; choose one of {EXPORT_FORMATS}")
    if model.n_vars == 0:
        raise InvalidParameter("refusing to export an empty model")
    if fmt == "lp":
        _write_lp(model, path)
    else:
        _write_mps(model, path, fixed=(fmt == "mps-fixed"))
    vnames, rnames = _file_names(model, fixed=(fmt == "mps-fixed"))
    return _write_sidecar(path, model, vnames, rnames, fmt)


# -- parsers -----------------------------------------------------------------

def _load_sidecar(path: str) -> tuple[dict[str, str], dict[str, str]]:
    sidecar = path + ".names.json"
    if not os.path.exists(sidecar):
        return {}, {}
    with open(sidecar, encoding="ascii") as fh:
        payload = json.load(fh)
    return payload.get("variables", {}), payload.get("rows", {})


class _VarTable:
    """Accumulates columns/bounds/objective while a file is parsed."""

    def __init__(self):
        self.order: list[str] = []
        self.binary: dict[str, bool] = {}
        self.lo: dict[str, float] = {}
        self.hi: dict[str, float] = {}
        self.obj: dict[str, float] = {}

    def touch(self, name: str, binary: bool | None = None) -> None:
        if name not in self.binary:
            self.order.append(name)
            self.binary[name] = False
        if binary:
            self.binary[name] = True

    def finish(self, model_name: str, rows, obj_sign: float,
               obj_const: float, vmap: dict[str, str],
               rmap: dict[str, str]) -> MilpModel:
        model = MilpModel(model_name)
        for name in self.order:
            if self.binary[name]:
                lo = self.lo.get(name, 0.0)
                hi = self.hi.get(name, 1.0)
            else:
                lo = self.lo.get(name, 0.0)
                hi = self.hi.get(name, math.inf)
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise UnsupportedFormat(
                    f"variable {name!r} lacks finite bounds")
            model.add_variable(vmap.get(name, name), lo, hi,
                               binary=self.binary[name])
        for rname, coeffs, sense, rhs in rows:
            pairs = [(model.col(vmap.get(v, v)), c) for v, c in coeffs]
            model.add_constraint(rmap.get(rname, rname), pairs, sense, rhs)
        for v, c in self.obj.items():
            model.set_objective_coeff(model.col(vmap.get(v, v)), obj_sign * c)
        model.objective_const = obj_sign * obj_const
        return model


def parse_mps(path: str) -> MilpModel:
    """Read a (free or fixed) MPS file written by `export_model`."""
    if not os.path.exists(path):
        raise ParseError(f"model file {path!r} does not exist")
    vmap, rmap = _load_sidecar(path)
    table = _VarTable()
    for fname in vmap:
        table.touch(fname)  # sidecar order restores the original column order
    row_sense: dict[str, str] = {}
    row_order: list[str] = []
    row_coeffs: dict[str, list[tuple[str, float]]] = {}
    rhs: dict[str, float] = {}
    obj_row = None
    obj_const = 0.0
    maximize = False
    model_name = "parsed"
    section = None
    in_int = False
    with open(path, encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("*"):
                continue
            if not line[0].isspace():
                head = line.split()
                section = head[0].upper()
                if section in ("RANGES", "SOS"):
                    raise UnsupportedFormat(
                        f"{section} sections are not supported")
                if section not in ("NAME", "OBJSENSE", "ROWS", "COLUMNS",
                                   "RHS", "BOUNDS", "ENDATA"):
                    raise ParseError(
                        f"{path}:{lineno}: {section!r} is not an MPS section")
                if section == "NAME" and len(head) > 1:
                    model_name = head[1]
                if section == "OBJSENSE" and len(head) > 1:
                    maximize = head[1].upper().startswith("MAX")
                if section == "ENDATA":
                    break
                continue
            tokens = line.split()
            if section == "OBJSENSE":
                maximize = tokens[0].upper().startswith("MAX")
            elif section == "ROWS":
                tag, name = tokens[0].upper(), tokens[1]
                if tag == "N":
                    obj_row = name
                else:
                    row_sense[name] = {"L": "<=", "G": ">=", "E": "=="}[tag]
                    row_order.append(name)
                    row_coeffs[name] = []
            elif section == "COLUMNS":
                if len(tokens) >= 3 and tokens[1].strip("'") == "MARKER":
                    in_int = tokens[2].strip("'") == "INTORG"
                    continue
                col = tokens[0]
                table.touch(col, binary=in_int)
                for i in range(1, len(tokens) - 1, 2):
                    rname, val = tokens[i], float(tokens[i + 1])
                    if rname == obj_row:
                        table.obj[col] = table.obj.get(col, 0.0) + val
                    elif rname in row_coeffs:
                        row_coeffs[rname].append((col, val))
                    else:
                        raise ParseError(f"{path}:{lineno}: unknown row {rname!r}")
            elif section == "RHS":
                for i in range(1, len(tokens) - 1, 2):
                    rname, val = tokens[i], float(tokens[i + 1])
                    if rname == obj_row:
                        obj_const = -val
                    elif rname in row_coeffs:
                        rhs[rname] = val
                    else:
                        raise ParseError(f"{path}:{lineno}: unknown row {rname!r}")
            elif section == "BOUNDS":
                tag = tokens[0].upper()
                name = tokens[2]
                table.touch(name)
                if tag == "BV":
                    table.binary[name] = True
                    table.lo[name], table.hi[name] = 0.0, 1.0
                elif tag == "FX":
                    table.lo[name] = table.hi[name] = float(tokens[3])
                elif tag == "LO":
                    table.lo[name] = float(tokens[3])
                elif tag == "UP":
                    table.hi[name] = float(tokens[3])
                elif tag == "MI":
                    table.lo[name] = -math.inf
                else:
                    raise UnsupportedFormat(f"bound type {tag!r}")
            elif section in (None, "NAME"):
                raise ParseError(f"{path}:{lineno}: data before any section")
    rows = [(name, row_coeffs[name], row_sense[name], rhs.get(name, 0.0))
            for name in row_order]
    sign = 1.0 if maximize else -1.0
    return table.finish(model_name, rows, sign, obj_const, vmap, rmap)


_LP_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_.]*$")
_LP_TOKEN = re.compile(
    r"(?P<num>[0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_.]*)"
    r"|(?P<op><=|>=|=|\+|-|:)")


def _lp_tokenize(text: str) -> list[str]:
    tokens = []
    pos = 0
    for match in _LP_TOKEN.finditer(text):
        if text[pos:match.start()].strip():
            raise ParseError(f"cannot tokenize {text[pos:match.start()]!r}")
        tokens.append(match.group(0))
        pos = match.end()
    if text[pos:].strip():
        raise ParseError(f"cannot tokenize {text[pos:]!r}")
    return tokens


def _signed_value(tokens: list[str]) -> float:
    sign = 1.0
    for tok in tokens:
        if tok == "-":
            sign = -sign
        elif tok != "+":
            return sign * float(tok)
    raise ParseError(f"expected a number in {tokens!r}")


def _lp_expr(tokens: list[str], table: _VarTable):
    """Parse `[sign] [coeff] name ...` streams; returns (pairs, const)."""
    pairs: list[tuple[str, float]] = []
    const = 0.0
    sign = 1.0
    pending: float | None = None
    for tok in tokens:
        if tok == "+":
            if pending is not None:
                const += sign * pending
                pending = None
            sign = 1.0
        elif tok == "-":
            if pending is not None:
                const += sign * pending
                pending = None
            sign = -1.0
        elif _LP_NAME.match(tok):
            coeff = sign * (1.0 if pending is None else pending)
            table.touch(tok)
            pairs.append((tok, coeff))
            pending = None
            sign = 1.0
        else:
            pending = float(tok)
    if pending is not None:
        const += sign * pending
    return pairs, const


def parse_lp(path: str) -> MilpModel:
    """Read an LP-text file written by `export_model`."""
    if not os.path.exists(path):
        raise ParseError(f"model file {path!r} does not exist")
    vmap, rmap = _load_sidecar(path)
    with open(path, encoding="ascii") as fh:
        raw_lines = fh.readlines()
    model_name = "parsed"
    section = None
    maximize = True
    chunks: dict[str, list[str]] = {"obj": [], "rows": [], "bounds": [],
                                    "bins": []}
    keywords = {"maximize": ("obj", True), "minimize": ("obj", False),
                "subject": ("rows", None), "st": ("rows", None),
                "bounds": ("bounds", None), "binaries": ("bins", None),
                "binary": ("bins", None), "bin": ("bins", None),
                "general": (None, None), "generals": (None, None),
                "end": ("done", None)}
    for raw in raw_lines:
        if raw.startswith("\\"):
            if model_name == "parsed":
                model_name = raw[1:].strip() or "parsed"
            continue
        line = raw.split("\\")[0].rstrip()
        if not line.strip():
            continue
        first = line.strip().split()[0].lower().rstrip(":")
        if first in keywords:
            section, mx = keywords[first]
            if mx is not None:
                maximize = mx
            if section == "done":
                break
            if section is None:
                raise UnsupportedFormat("general integers are not supported")
            continue
        if section in chunks:
            chunks[section].append(line.strip())

    table = _VarTable()
    for fname in vmap:
        table.touch(fname)  # sidecar order restores the original column order
    obj_tokens = _lp_tokenize(" ".join(chunks["obj"]))
    if obj_tokens and obj_tokens[0] and _LP_NAME.match(obj_tokens[0]) \
            and len(obj_tokens) > 1 and obj_tokens[1] == ":":
        obj_tokens = obj_tokens[2:]
    obj_pairs, obj_const = _lp_expr(obj_tokens, table)

    rows = []
    for stmt in _split_lp_statements(chunks["rows"]):
        tokens = _lp_tokenize(stmt)
        rname = None
        if len(tokens) > 1 and tokens[1] == ":":
            rname, tokens = tokens[0], tokens[2:]
        sense_at = next((i for i, t in enumerate(tokens)
                         if t in ("<=", ">=", "=")), None)
        if sense_at is None:
            raise ParseError(f"constraint without sense: {stmt!r}")
        sense = {"<=": "<=", ">=": ">=", "=": "=="}[tokens[sense_at]]
        pairs, lconst = _lp_expr(tokens[:sense_at], table)
        rpairs, rconst = _lp_expr(tokens[sense_at + 1:], table)
        if rpairs:
            raise UnsupportedFormat("variables on constraint right-hand side")
        rows.append((rname or f"row{len(rows)}", pairs, sense, rconst - lconst))

    for stmt in chunks["bounds"]:
        tokens = _lp_tokenize(stmt)
        names = [t for t in tokens if _LP_NAME.match(t)]
        if len(names) != 1:
            raise ParseError(f"unsupported bound line: {stmt!r}")
        name = names[0]
        table.touch(name)
        at = tokens.index(name)
        if at + 1 < len(tokens) and tokens[at + 1] == "=":
            table.lo[name] = table.hi[name] = _signed_value(tokens[at + 2:])
        else:
            if at >= 2 and tokens[at - 1] == "<=":
                table.lo[name] = _signed_value(tokens[:at - 1])
            if at + 1 < len(tokens) and tokens[at + 1] in ("<=", ">="):
                value = _signed_value(tokens[at + 2:])
                if tokens[at + 1] == "<=":
                    table.hi[name] = value
                else:
                    table.lo[name] = value
    for stmt in chunks["bins"]:
        for name in stmt.split():
            table.touch(name, binary=True)
            table.lo.setdefault(name, 0.0)
            table.hi.setdefault(name, 1.0)

    for v, c in obj_pairs:
        table.obj[v] = table.obj.get(v, 0.0) + c
    sign = 1.0 if maximize else -1.0
    return table.finish(model_name, rows, sign, obj_const, vmap, rmap)


def _split_lp_statements(lines: list[str]) -> list[str]:
    """Join wrapped constraint lines; a statement ends where a sense+rhs does."""
    out: list[str] = []
    buf = ""
    for line in lines:
        buf = (buf + " " + line).strip()
        if re.search(r"(<=|>=|=)\s*[+-]?[\d.]", buf):
            out.append(buf)
            buf = ""
    if buf:
        raise ParseError(f"dangling constraint text: {buf!r}")
    return out


# -- solution files ----------------------------------------------------------

def parse_solution_file(path: str) -> tuple[str, float | None, dict[str, float]]:
    """Best-effort read of a solver solution file.

    Understands the HiGHS ``--solution_file`` layout, the CBC ``solution``
    layout and a plain ``name value`` format. Returns (status word, objective
    or None, {file variable name: value}).
    """
    if not os.path.exists(path):
        raise ParseError(f"solution file {path!r} does not exist")
    with open(path, encoding="utf-8", errors="replace") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    status = ""
    objective = None
    values: dict[str, float] = {}

    def grab(tokens: list[str], name_i: int, val_i: int) -> bool:
        try:
            values[tokens[name_i]] = float(tokens[val_i])
            return True
        except (ValueError, IndexError):
            return False

    in_cols = False
    n_cols = None
    first = lines[0].strip() if lines else ""
    cbc_head = re.match(
        r"^(\w[\w ]*?)\s*-?\s*objective value\s+([-+0-9.eE]+)", first, re.I)
    if cbc_head:
        status = cbc_head.group(1).strip()
        objective = float(cbc_head.group(2))
        for ln in lines[1:]:
            tokens = ln.split()
            if len(tokens) >= 3:
                grab(tokens, 1, 2)
        return status, objective, values

    for ln in lines:
        stripped = ln.strip()
        low = stripped.lower()
        if low.startswith("model status"):
            status = stripped.split(":")[-1].strip() if ":" in stripped \
                else stripped.split()[-1]
            continue
        if low.startswith("objective"):
            tail = stripped.replace(":", " ").split()
            try:
                objective = float(tail[-1])
            except ValueError:
                pass
            continue
        if low.startswith("# columns") or low == "columns":
            in_cols = True
            tokens = stripped.split()
            if tokens and tokens[-1].isdigit():
                n_cols = int(tokens[-1])
            continue
        if low.startswith("# rows") or low == "rows":
            in_cols = False
            continue
        if stripped.startswith("#"):
            continue
        tokens = stripped.replace("=", " ").split()
        if in_cols and len(tokens) == 2:
            grab(tokens, 0, 1)
        elif not in_cols and n_cols is None and len(tokens) == 2:
            grab(tokens, 0, 1)  # plain format
    if n_cols is not None and len(values) < n_cols:
        raise ParseError(f"expected {n_cols} column values, found {len(values)}")
    return status, objective, values


def _status_from_word(word: str, have_values: bool) -> str:
    low = word.lower()
    if "infeasible" in low:
        return "Infeasible"
    if "time" in low:
        return "TimeLimit"
    if "optimal" in low or (have_values and ("feasible" in low or not low)):
        return "Optimal"
    return "BackendError"


def solve_external(model: MilpModel, command_template: str,
                   time_limit_s: float = 600.0, mip_gap: float = 1e-6,
                   workdir: str | None = None,
                   fmt: str = "mps") -> SolveResult:
    """Export, run `command_template` as a subprocess, parse its solution."""
    if not command_template.strip():
        raise InvalidParameter("empty external command template")
    tmpdir = workdir or tempfile.mkdtemp(prefix="fcrsched_")
    os.makedirs(tmpdir, exist_ok=True)
    suffix = "lp" if fmt == "lp" else "mps"
    model_file = os.path.join(tmpdir, f"{model.name}.{suffix}")
    solution_file = os.path.join(tmpdir, f"{model.name}.sol")
    export_model(model, model_file, fmt)
    subst = {"{model_file}": model_file, "{solution_file}": solution_file,
             "{time_limit}": _num(time_limit_s), "{gap}": _num(mip_gap)}
    argv = []
    for token in shlex.split(command_template):
        for key, val in subst.items():
            token = token.replace(key, val)
        argv.append(token)
    t0 = time.perf_counter()
    try:
        proc = subprocess.run(argv, capture_output=True, text=True,
                              timeout=time_limit_s + 120.0)
    except FileNotFoundError as exc:
        raise BackendError(f"external solver not found: {exc}") from exc
    except subprocess.TimeoutExpired:
        return SolveResult("TimeLimit", None, None, math.inf,
                           time.perf_counter() - t0, "external",
                           "subprocess hit the hard timeout")
    wall = time.perf_counter() - t0
    if proc.returncode != 0:
        tail = (proc.stderr or proc.stdout or "").strip()[-400:]
        return SolveResult("BackendError", None, None, math.inf, wall,
                           "external",
                           f"exit code {proc.returncode}: {tail}")
    if not os.path.exists(solution_file):
        return SolveResult("BackendError", None, None, math.inf, wall,
                           "external", "solver wrote no solution file")
    word, file_obj, values = parse_solution_file(solution_file)
    status = _status_from_word(word, bool(values))
    if status in ("Infeasible", "BackendError"):
        return SolveResult(status, None, None, math.inf, wall, "external",
                           f"solver reported {word!r}")
    vnames, _ = _file_names(model, fixed=(fmt == "mps-fixed"))
    # solvers that print only nonzero columns leave the rest at zero
    x = np.zeros(model.n_vars)
    n_missing = 0
    for c, fname in enumerate(vnames):
        if fname in values:
            x[c] = values[fname]
        elif model.lb[c] == model.ub[c]:
            x[c] = model.lb[c]
        else:
            n_missing += 1
    objective = model.objective_value(x)
    if file_obj is not None and n_missing \
            and abs(objective - file_obj) > 1e-4 * (1.0 + abs(file_obj)):
        raise ParseError(
            f"solution file omits {n_missing} variables and its objective "
            f"{file_obj} disagrees with the recomputed {objective}")
    return SolveResult(status, x, objective, 0.0, wall,
                       "external", f"command: {argv[0]}")


# -- scipy backend ----------------------------------------------------------

def _model_matrices(model: MilpModel):
    import scipy.sparse as sp

    rows_i, cols_i, vals = [], [], []
    lo_row = np.empty(model.n_rows)
    hi_row = np.empty(model.n_rows)
    for r, (name, coeffs, sense, rhs) in enumerate(model.rows):
        for col, v in coeffs:
            rows_i.append(r)
            cols_i.append(col)
            vals.append(v)
        if sense == "<=":
            lo_row[r], hi_row[r] = -np.inf, rhs
        elif sense == ">=":
            lo_row[r], hi_row[r] = rhs, np.inf
        else:
            lo_row[r], hi_row[r] = rhs, rhs
    a = sp.csc_array((vals, (rows_i, cols_i)),
                     shape=(model.n_rows, model.n_vars))
    return a, lo_row, hi_row


def solve_scipy(model: MilpModel, time_limit_s: float = 600.0,
                mip_gap: float = 1e-6) -> SolveResult:
    """In-process solve through `scipy.optimize.milp` (maximization handled
    by negating the objective)."""
    from scipy.optimize import Bounds, LinearConstraint, milp

    a, lo_row, hi_row = _model_matrices(model)
    c = -model.objective_vector()
    integrality = np.array(model.is_binary, dtype=np.uint8)
    bounds = Bounds(np.array(model.lb), np.array(model.ub))
    t0 = time.perf_counter()
    res = milp(c, constraints=LinearConstraint(a, lo_row, hi_row),
               integrality=integrality, bounds=bounds,
               options={"time_limit": float(time_limit_s),
                        "mip_rel_gap": float(mip_gap),
                        "disp": False})
    wall = time.perf_counter() - t0
    gap = float(getattr(res, "mip_gap", 0.0) or 0.0)
    if res.status == 0:
        return SolveResult("Optimal", np.asarray(res.x, dtype=float),
                           model.objective_value(res.x), gap, wall, "scipy",
                           str(res.message))
    if res.status == 1:
        x = None if res.x is None else np.asarray(res.x, dtype=float)
        obj = None if x is None else model.objective_value(x)
        return SolveResult("TimeLimit", x, obj,
                           gap if x is not None else math.inf,
                           wall, "scipy", str(res.message))
    if res.status == 2:
        return SolveResult("Infeasible", None, None, math.inf, wall, "scipy",
                           str(res.message))
    return SolveResult("BackendError", None, None, math.inf, wall, "scipy",
                       f"status {res.status}: {res.message}")


# -- micro branch and bound ---------------------------------------------------

def solve_micro(model: MilpModel, time_limit_s: float = 600.0,
                mip_gap: float = 0.0) -> SolveResult:
    """Exact depth-first branch-and-bound over the model's binaries.

    The LP relaxation bound is solved by the bundled simplex; a node is
    pruned when its bound cannot beat the incumbent by more than 1e-9, so
    the returned optimum is exact to that tolerance. Models beyond
    24 binaries or 200 continuous variables are refused with `TooLarge`.
    """
    n_bin = model.n_binaries
    n_cont = model.n_vars - n_bin
    if n_bin > MICRO_MAX_BINARIES:
        raise TooLarge(f"{n_bin} binaries exceeds the micro cap "
                       f"of {MICRO_MAX_BINARIES}")
    if n_cont > MICRO_MAX_CONTINUOUS:
        raise TooLarge(f"{n_cont} continuous variables exceeds the micro cap "
                       f"of {MICRO_MAX_CONTINUOUS}")

    c_min = -model.objective_vector()
    a = np.zeros((model.n_rows, model.n_vars))
    senses = []
    b = np.zeros(model.n_rows)
    for r, (name, coeffs, sense, rhs) in enumerate(model.rows):
        for col, v in coeffs:
            a[r, col] = v
        senses.append(sense)
        b[r] = rhs
    bin_cols = np.array([c for c in range(model.n_vars) if model.is_binary[c]],
                        dtype=int)
    lo0 = np.array(model.lb)
    hi0 = np.array(model.ub)

    atol = 1e-9
    best_val = -math.inf
    best_x: np.ndarray | None = None
    nodes = 0
    deadline = time.perf_counter() + time_limit_s
    t0 = time.perf_counter()
    stack: list[tuple[np.ndarray, np.ndarray, float]] = [(lo0, hi0, math.inf)]
    timed_out = False
    open_bound = math.inf

    while stack:
        if time.perf_counter() > deadline:
            timed_out = True
            open_bound = max((pb for _, _, pb in stack), default=-math.inf)
            break
        lo, hi, parent_bound = stack.pop()
        if parent_bound <= best_val + atol:
            continue
        nodes += 1
        lp = solve_lp(c_min, a, senses, b, lo, hi)
        if lp.status == "infeasible":
            continue
        if lp.status != "optimal":
            return SolveResult("BackendError", None, None, math.inf,
                               time.perf_counter() - t0, "micro",
                               f"relaxation ended with {lp.status}")
        bound = -lp.objective
        if bound <= best_val + atol:
            continue
        frac = np.abs(lp.x[bin_cols] - np.round(lp.x[bin_cols])) \
            if bin_cols.size else np.zeros(0)
        if frac.size == 0 or frac.max() <= 1e-7:
            x = lp.x.copy()
            if bin_cols.size:
                x[bin_cols] = np.round(x[bin_cols])
            best_val, best_x = bound, x
            continue
        j = bin_cols[int(np.argmax(frac))]
        val = lp.x[j]
        near = int(round(val))
        far = 1 - near
        for side in (far, near):  # LIFO: preferred side on top
            lo_n, hi_n = lo.copy(), hi.copy()
            lo_n[j] = hi_n[j] = float(side)
            stack.append((lo_n, hi_n, bound))

    wall = time.perf_counter() - t0
    note = f"nodes={nodes}"
    if timed_out:
        if best_x is None:
            return SolveResult("TimeLimit", None, None, math.inf, wall,
                               "micro", note)
        gap = max(0.0, (open_bound - best_val) / max(1.0, abs(best_val)))
        return SolveResult("TimeLimit", best_x, best_val, gap, wall, "micro",
                           note)
    if best_x is None:
        return SolveResult("Infeasible", None, None, math.inf, wall, "micro",
                           note)
    return SolveResult("Optimal", best_x, best_val, 0.0, wall, "micro", note)


# -- registry ---------------------------------------------------------------

def get_backend(name: str):
    """Resolve a backend name to a callable (model, time_limit_s, mip_gap)."""
    if name == "scipy":
        return solve_scipy
    if name == "micro":
        return solve_micro
    if name.startswith("external:"):
        template = name[len("external:"):]
        if not template.strip():
            raise InvalidParameter("external backend needs a command template")

        def run(model: MilpModel, time_limit_s: float = 600.0,
                mip_gap: float = 1e-6) -> SolveResult:
            return solve_external(model, template, time_limit_s, mip_gap)

        return run
    raise InvalidParameter(
        f"unknown solver backend {name!r}; use scipy, micro or external:<cmd>")
