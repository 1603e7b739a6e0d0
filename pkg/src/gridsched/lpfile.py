"""LP-format export and import for MilpProblem.

The writer emits the common LP dialect (Minimize / Subject To / Bounds /
Generals / End).  Ranged rows are split into ``<label>_rlo`` and
``<label>_rhi`` one-sided rows since the constraint section has no range
syntax.  Every variable gets an explicit Bounds line and integer
variables are listed under Generals, so a file round-trips without
relying on defaults.  The reader parses exactly this dialect, which is
enough to re-ingest our own files and those written by mainstream
solvers with simple linear rows.
"""

from __future__ import annotations

import math
import re
from pathlib import Path

from .milp import INF, MilpProblem

_NAME_OK = re.compile(r"[A-Za-z_][A-Za-z0-9_\[\],.()@#]*$")


def _sanitize(name: str) -> str:
    if _NAME_OK.match(name):
        return name
    out = re.sub(r"[^A-Za-z0-9_\[\],.()@#]", "_", name)
    if not out or not re.match(r"[A-Za-z_]", out[0]):
        out = "x_" + out
    return out


def _num(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return format(v, ".17g")


def _terms(coeffs: list[tuple[int, float]], names: list[str]) -> str:
    parts = []
    for col, coef in coeffs:
        if coef == 0:
            continue
        sign = "-" if coef < 0 else "+"
        parts.append(f"{sign} {_num(abs(coef))} {names[col]}")
    if not parts:
        return "+ 0 " + (names[coeffs[0][0]] if coeffs else "__empty__")
    return " ".join(parts)


def write_lp(prob: MilpProblem, path: str | Path) -> None:
    Path(path).write_text(to_lp_string(prob))


def to_lp_string(prob: MilpProblem) -> str:
    names = [_sanitize(n) for n in prob.var_names]
    seen: set[str] = set()
    for i, n in enumerate(names):
        while n in seen:
            n = f"{n}_{i}"
        names[i] = n
        seen.add(n)

    out: list[str] = [f"\\ {prob.name}", "Minimize"]
    obj_terms = _terms(sorted(prob.objective.items()), names)
    if prob.objective_constant:
        sign = "-" if prob.objective_constant < 0 else "+"
        obj_terms += f" {sign} {_num(abs(prob.objective_constant))}"
    out.append(f" obj: {obj_terms}")

    out.append("Subject To")
    for row in prob.rows:
        label = _sanitize(row.label)
        body = _terms(row.coeffs, names)
        if row.lb == row.ub:
            out.append(f" {label}: {body} = {_num(row.lb)}")
        elif math.isinf(row.lb) and not math.isinf(row.ub):
            out.append(f" {label}: {body} <= {_num(row.ub)}")
        elif math.isinf(row.ub) and not math.isinf(row.lb):
            out.append(f" {label}: {body} >= {_num(row.lb)}")
        else:
            out.append(f" {label}_rlo: {body} >= {_num(row.lb)}")
            out.append(f" {label}_rhi: {body} <= {_num(row.ub)}")

    out.append("Bounds")
    for j in range(prob.num_vars):
        lo, hi = prob.lb[j], prob.ub[j]
        if lo == hi:
            out.append(f" {names[j]} = {_num(lo)}")
        elif math.isinf(lo) and math.isinf(hi):
            out.append(f" {names[j]} free")
        else:
            lo_s = "-inf" if math.isinf(lo) else _num(lo)
            hi_s = "+inf" if math.isinf(hi) else _num(hi)
            out.append(f" {lo_s} <= {names[j]} <= {hi_s}")

    integers = [names[j] for j in range(prob.num_vars) if prob.integer[j]]
    if integers:
        out.append("Generals")
        for n in integers:
            out.append(f" {n}")
    out.append("End")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Reader
# ---------------------------------------------------------------------------

class LpParseError(ValueError):
    pass


_SENSES = {"<=", ">=", "=", "<", ">"}
_SECTIONS = {
    "minimize": "objective", "minimise": "objective", "min": "objective",
    "maximize": "maximize", "max": "maximize",
    "subject": "rows", "st": "rows", "s.t.": "rows", "such": "rows",
    "bounds": "bounds", "bound": "bounds",
    "generals": "generals", "general": "generals", "integers": "generals",
    "binaries": "binaries", "binary": "binaries",
    "end": "end",
}


def _is_number(tok: str) -> bool:
    try:
        float(tok)
        return True
    except ValueError:
        return False


def read_lp(path: str | Path) -> MilpProblem:
    return from_lp_string(Path(path).read_text(), name=str(path))


def from_lp_string(text: str, name: str = "lp") -> MilpProblem:
    prob = MilpProblem(name=name)
    col_of: dict[str, int] = {}

    def col(tok: str) -> int:
        if tok not in col_of:
            col_of[tok] = prob.add_var(tok, lb=0.0, ub=INF)
        return col_of[tok]

    # strip comments, tokenize with section tracking
    section = None
    pending: list[str] = []  # tokens of the statement being accumulated

    def flush(statement: list[str], where: str) -> None:
        if not statement:
            return
        if where == "objective":
            _parse_objective(prob, statement, col)
        elif where == "rows":
            _parse_row(prob, statement, col)
        elif where == "bounds":
            _parse_bound(prob, statement, col)
        elif where in ("generals", "binaries"):
            for tok in statement:
                j = col(tok)
                prob.integer[j] = True
                if where == "binaries":
                    prob.lb[j] = max(prob.lb[j], 0.0)
                    prob.ub[j] = min(prob.ub[j], 1.0)

    for raw_line in text.splitlines():
        line = raw_line.split("\\", 1)[0].strip()
        if not line:
            continue
        first = line.split()[0].lower()
        sec = _SECTIONS.get(first)
        if sec == "maximize":
            raise LpParseError("maximization not supported")
        if sec is not None and not (first == "st" and section is not None):
            flush(pending, section)
            pending = []
            section = sec
            if sec == "end":
                break
            # drop the header word(s); 'subject to' / 'such that' are two words
            n_header_words = 2 if first in ("subject", "such") else 1
            parts = line.split(None, n_header_words)
            line = parts[n_header_words] if len(parts) > n_header_words else ""
            if not line:
                continue
        if section is None:
            raise LpParseError(f"content before a section header: {line!r}")
        tokens = line.split()
        if section in ("objective", "rows"):
            # a new labelled statement starts when a token ends with ':'
            for tok in tokens:
                if tok.endswith(":") and pending:
                    flush(pending, section)
                    pending = []
                pending.append(tok)
        elif section == "bounds":
            flush(tokens, section)
        else:
            pending.extend(tokens)
    flush(pending, section)
    return prob


def _split_label(tokens: list[str]) -> tuple[str, list[str]]:
    if tokens and tokens[0].endswith(":"):
        return tokens[0][:-1], tokens[1:]
    if len(tokens) >= 2 and tokens[1] == ":":
        return tokens[0], tokens[2:]
    return "", tokens


def _parse_terms(tokens: list[str], col) -> tuple[list[tuple[int, float]], float]:
    """Parse `+ 2 x - y + 5` into coefficient pairs and a constant."""
    coeffs: dict[int, float] = {}
    constant = 0.0
    sign = 1.0
    coef: float | None = None
    for tok in tokens:
        if tok == "+":
            if coef is not None:
                constant += sign * coef
            sign, coef = 1.0, None
        elif tok == "-":
            if coef is not None:
                constant += sign * coef
            sign, coef = -1.0, None
        elif _is_number(tok):
            if coef is not None:
                constant += sign * coef
                sign = 1.0
            coef = float(tok)
        else:
            j = col(tok)
            c = sign * (1.0 if coef is None else coef)
            coeffs[j] = coeffs.get(j, 0.0) + c
            sign, coef = 1.0, None
    if coef is not None:
        constant += sign * coef
    return sorted(coeffs.items()), constant


def _parse_objective(prob: MilpProblem, tokens: list[str], col) -> None:
    _label, body = _split_label(tokens)
    coeffs, constant = _parse_terms(body, col)
    for j, c in coeffs:
        prob.add_objective_term(j, c)
    prob.objective_constant += constant


def _parse_row(prob: MilpProblem, tokens: list[str], col) -> None:
    label, body = _split_label(tokens)
    sense_idx = next((i for i, t in enumerate(body) if t in _SENSES), None)
    if sense_idx is None:
        raise LpParseError(f"row {label!r}: missing sense")
    sense = body[sense_idx]
    lhs, rhs_tokens = body[:sense_idx], body[sense_idx + 1:]
    coeffs, constant = _parse_terms(lhs, col)
    _, rhs = _parse_terms(rhs_tokens, col)
    rhs -= constant
    if sense in ("<=", "<"):
        prob.add_row(coeffs, -INF, rhs, label or f"r{prob.num_rows}")
    elif sense in (">=", ">"):
        prob.add_row(coeffs, rhs, INF, label or f"r{prob.num_rows}")
    else:
        prob.add_row(coeffs, rhs, rhs, label or f"r{prob.num_rows}")


def _parse_bound(prob: MilpProblem, tokens: list[str], col) -> None:
    if not tokens:
        return

    def val(tok: str) -> float:
        t = tok.lower().lstrip("+")
        if t in ("-inf", "-infinity"):
            return -INF
        if t in ("inf", "infinity"):
            return INF
        return float(tok)

    if len(tokens) == 2 and tokens[1].lower() == "free":
        j = col(tokens[0])
        prob.lb[j], prob.ub[j] = -INF, INF
    elif len(tokens) == 3 and tokens[1] in ("<=", ">=", "="):
        j = col(tokens[0])
        if tokens[1] == "<=":
            prob.ub[j] = val(tokens[2])
        elif tokens[1] == ">=":
            prob.lb[j] = val(tokens[2])
        else:
            prob.lb[j] = prob.ub[j] = val(tokens[2])
    elif len(tokens) == 5 and tokens[1] == "<=" and tokens[3] == "<=":
        j = col(tokens[2])
        prob.lb[j] = val(tokens[0])
        prob.ub[j] = val(tokens[4])
    else:
        raise LpParseError(f"unrecognized bounds line: {' '.join(tokens)}")
