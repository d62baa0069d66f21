"""Command-line entry point: ``orbitzeta <command> <algebra-file> [options]``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import random
import re
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .arith import INF, is_prime
from .errors import (
    AlgebraSyntaxError,
    NotPerfect,
    OrbitZetaError,
    SchemaError,
)
from .liealg import LieAlgebra, validate_algebra

_INT_LIST = re.compile(r"\[\s*(-?\d+(?:,\s*-?\d+)*)\s*\]")

COMMANDS = (
    "validate",
    "lambda",
    "zeta-fit",
    "twisted",
    "equivariant",
    "kirillov-verify",
    "integral-check",
    "measure-check",
)


# ---------------------------------------------------------------------------
# algebra files


@dataclass(frozen=True)
class AlgebraFile:
    name: str
    p: int
    rank: int
    brackets: tuple  # ((i, j, (c...)), ...) sorted, i < j
    elements: tuple = ()  # ((name, vector), ...) in file order
    automorphisms: tuple = ()  # ((name, matrix), ...) in file order

    def to_algebra(self) -> LieAlgebra:
        alg = LieAlgebra.from_brackets(
            self.p,
            self.rank,
            {(i, j): c for i, j, c in self.brackets},
            name=self.name,
            elements=dict(self.elements),
            automorphisms=dict(self.automorphisms),
        )
        validate_algebra(alg)
        return alg

    def to_json(self) -> str:
        doc = {
            "name": self.name,
            "p": self.p,
            "rank": self.rank,
            "brackets": [{"i": i, "j": j, "c": list(c)} for i, j, c in self.brackets],
        }
        if self.elements:
            doc["elements"] = {k: list(v) for k, v in self.elements}
        if self.automorphisms:
            doc["automorphisms"] = {k: [list(r) for r in m] for k, m in self.automorphisms}
        text = json.dumps(doc, indent=2)
        # keep integer vectors on one line
        return _INT_LIST.sub(lambda m: "[" + ", ".join(x.strip() for x in m.group(1).split(",")) + "]", text) + "\n"


def _int(value, fieldname) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(fieldname, f"expected an integer, got {value!r}")
    return value


def _int_vector(value, length, fieldname) -> tuple:
    if not isinstance(value, list):
        raise SchemaError(fieldname, "expected a list of integers")
    if len(value) != length:
        raise SchemaError(fieldname, f"expected {length} entries, got {len(value)}")
    return tuple(_int(x, fieldname) for x in value)


def parse_algebra_file(source) -> AlgebraFile:
    """Parse JSON text, or a path to a JSON file, into a checked AlgebraFile."""
    if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
        text = Path(source).read_text()
    else:
        text = source
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise AlgebraSyntaxError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(doc, dict):
        raise SchemaError("<root>", "expected a JSON object")
    unknown = set(doc) - {"name", "p", "rank", "brackets", "elements", "automorphisms"}
    if unknown:
        raise SchemaError(sorted(unknown)[0], "unknown field")
    for key in ("name", "p", "rank", "brackets"):
        if key not in doc:
            raise SchemaError(key, "missing")
    name = doc["name"]
    if not isinstance(name, str):
        raise SchemaError("name", "expected a string")
    p = _int(doc["p"], "p")
    if p < 3 or not is_prime(p):
        raise SchemaError("p", f"expected an odd prime, got {p}")
    n = _int(doc["rank"], "rank")
    if n < 1:
        raise SchemaError("rank", "must be positive")
    if not isinstance(doc["brackets"], list):
        raise SchemaError("brackets", "expected a list")
    seen = {}
    for idx, entry in enumerate(doc["brackets"]):
        where = f"brackets[{idx}]"
        if not isinstance(entry, dict) or set(entry) != {"i", "j", "c"}:
            raise SchemaError(where, "expected an object with keys i, j, c")
        i, j = _int(entry["i"], where + ".i"), _int(entry["j"], where + ".j")
        if not (0 <= i < n and 0 <= j < n):
            raise SchemaError(where, f"index out of range [0, {n})")
        if i >= j:
            raise SchemaError(where, f"need i < j, got i={i}, j={j}")
        if (i, j) in seen:
            raise SchemaError(where, f"duplicate bracket ({i}, {j})")
        seen[(i, j)] = _int_vector(entry["c"], n, where + ".c")
    brackets = tuple((i, j, c) for (i, j), c in sorted(seen.items()))

    elements = []
    raw = doc.get("elements", {})
    if not isinstance(raw, dict):
        raise SchemaError("elements", "expected an object")
    for key, vec in raw.items():
        elements.append((key, _int_vector(vec, n, f"elements.{key}")))
    autos = []
    raw = doc.get("automorphisms", {})
    if not isinstance(raw, dict):
        raise SchemaError("automorphisms", "expected an object")
    for key, mat in raw.items():
        where = f"automorphisms.{key}"
        if not isinstance(mat, list) or len(mat) != n:
            raise SchemaError(where, f"expected {n} rows")
        autos.append((key, tuple(_int_vector(r, n, where) for r in mat)))
    return AlgebraFile(name, p, n, brackets, tuple(elements), tuple(autos))


def load_algebra(source) -> LieAlgebra:
    return parse_algebra_file(source).to_algebra()


# ---------------------------------------------------------------------------
# reports


def _canonical(obj):
    """JSON-ready form: rationals as "num/den", big integers as decimal strings."""
    if isinstance(obj, (bool, float, str)) or obj is None:
        return obj
    if obj is INF:
        return "inf"
    if isinstance(obj, Fraction):
        if obj.denominator == 1:
            return _canonical(obj.numerator)
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, int):
        return obj if -(2**63) <= obj < 2**63 else str(obj)
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    if hasattr(obj, "item"):  # numpy scalar
        return _canonical(obj.item())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_report(report: dict, fmt: str = "json") -> bytes:
    if fmt == "json":
        return (json.dumps(_canonical(report), sort_keys=True, indent=2) + "\n").encode()
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    table = report.get("table")
    if table:
        header = list(table[0])
        w.writerow(header)
        for row in table:
            w.writerow([_csv_cell(row[h]) for h in header])
    else:
        w.writerow(["key", "value"])
        for key in sorted(report):
            w.writerow([key, _csv_cell(report[key])])
    return buf.getvalue().encode()


def _csv_cell(v):
    c = _canonical(v)
    return c if isinstance(c, (str, int)) else json.dumps(c, sort_keys=True)


# ---------------------------------------------------------------------------
# level-count cache


class LevelCache:
    """Untwisted level counts on disk, one JSON file per (algebra digest, level)."""

    def __init__(self, root: Optional[Path]):
        self.root = Path(root) if root else None

    def _path(self, digest, k):
        return self.root / f"{digest}-level{k}.json"

    def load(self, digest, k_max) -> Optional[dict]:
        if self.root is None:
            return None
        out = {}
        for k in range(1, k_max + 1):
            f = self._path(digest, k)
            if not f.exists():
                return None
            out[k] = {int(r): int(c) for r, c in json.loads(f.read_text()).items()}
        return out

    def store(self, digest, counts: dict) -> None:
        if self.root is None:
            return
        self.root.mkdir(parents=True, exist_ok=True)
        for k, cnt in counts.items():
            f = self._path(digest, k)
            tmp = f.with_suffix(".tmp")
            tmp.write_text(json.dumps({str(r): c for r, c in sorted(cnt.items())}, sort_keys=True))
            tmp.replace(f)


def _level_counts(alg, k_max, opts) -> dict:
    from .zeta import count_levels

    cache = LevelCache(None if opts.no_cache else opts.cache)
    hit = cache.load(alg.digest(), k_max)
    if hit is not None:
        return hit
    counts = count_levels(alg, k_max, workers=opts.threads).total
    plain = {k: dict(c) for k, c in counts.items()}
    cache.store(alg.digest(), plain)
    return plain


# ---------------------------------------------------------------------------
# commands


def _element(alg, value) -> tuple:
    if value is None:
        raise SchemaError("--element", "required for this command")
    if value in alg.elements:
        return tuple(alg.elements[value])
    try:
        vec = tuple(int(x) for x in value.split(","))
    except ValueError:
        raise SchemaError("--element", f"unknown element {value!r}") from None
    if len(vec) != alg.n:
        raise SchemaError("--element", f"expected {alg.n} coordinates")
    return vec


def _orbit_hypotheses(alg) -> bool:
    """Whether orbit counts are guaranteed to be character counts (u >= 2 needed at p = 3)."""
    u = alg.report().u
    return u is INF or u >= (2 if alg.p == 3 else 1)


def cmd_validate(alg, opts) -> dict:
    rep = alg.report()
    return {"structure": rep.as_dict(), "status": "Perfect" if rep.perfect else "NotPerfect"}


def _lambda_table(alg, opts, imax):
    from .zeta import LambdaTable, lambda_from_counts

    rep = alg.report()
    if not rep.perfect:
        if opts.level is None:
            raise NotPerfect("lambda_i are infinite; pass --level K for lower bounds from levels <= K")
        counts = _level_counts(alg, opts.level, opts)
        values = []
        for i in range(imax + 1):
            num = (1 if i == 0 else 0) + sum(counts[k].get(2 * i, 0) for k in counts)
            values.append(num // alg.p ** (2 * i))
        return LambdaTable(alg.p, values, [f"LowerBoundAtLevel({opts.level})"] * len(values))
    from .liealg import require_perfect

    require_perfect(alg)
    counts = _level_counts(alg, 2 * imax + rep.m_l, opts)
    return LambdaTable(alg.p, lambda_from_counts(alg.p, counts, imax, rep.m_l), ["Exact"] * (imax + 1))


def cmd_lambda(alg, opts) -> dict:
    imax = 3 if opts.imax is None else opts.imax
    table = _lambda_table(alg, opts, imax)
    rows = [{"i": i, "lambda_i": v, "status": s, "degree": f"{alg.p}^{i}"} for i, v, s in table.rows()]
    return {"structure": alg.report().as_dict(), "imax": imax, "table": rows,
            "orbit_character_hypotheses": _orbit_hypotheses(alg)}


def _fit_report(fit, coeffs, held_out):
    from .zeta import RationalFit

    assert isinstance(fit, RationalFit)
    out = {"num": list(fit.numerator), "den": list(fit.denominator), "validation_equations": fit.validation,
           "fitted": list(coeffs)}
    if held_out is not None:
        predicted = fit.series(len(coeffs) + 1)[-1]
        out["held_out"] = {"actual": held_out, "predicted": predicted, "pass": predicted == held_out}
    return out


def cmd_zeta_fit(alg, opts) -> dict:
    from .zeta import default_max_den, fit_rational

    if opts.coeffs:
        seq = [Fraction(x) for x in opts.coeffs.split(",")]
        result = {}
    else:
        imax = 5 if opts.imax is None else opts.imax
        table = _lambda_table(alg, opts, imax)
        seq = [Fraction(v) for v in table.values]
        result = {"structure": alg.report().as_dict(), "lambda": table.values, "status": table.status,
                  "orbit_character_hypotheses": _orbit_hypotheses(alg)}
    held = seq[-1] if opts.hold_out and len(seq) > 1 else None
    fit_on = seq[:-1] if held is not None else seq
    max_den = opts.max_den if opts.max_den is not None else default_max_den(len(fit_on))
    fit = fit_rational(fit_on, max_den=max_den)
    result["fit"] = _fit_report(fit, fit_on, held)
    result["max_den"] = max_den
    return result


def cmd_twisted(alg, opts) -> dict:
    from .zeta import lambda_exact, twisted_mu_direct, twisted_mu_galois

    imax = 2 if opts.imax is None else opts.imax
    g = _element(alg, opts.element)
    galois = twisted_mu_galois(alg, g, imax, workers=opts.threads)
    out = {"element": list(g), "imax": imax, "mu_galois": [galois.coeff(i) for i in range(imax + 1)],
           "orbit_character_hypotheses": _orbit_hypotheses(alg)}
    if not opts.no_direct:
        direct = twisted_mu_direct(alg, g, imax, check=False)
        out["mu_direct"] = [direct.coeff(i) for i in range(imax + 1)]
        out["agree"] = out["mu_direct"] == out["mu_galois"]
    if not any(g):
        lam = lambda_exact(alg, imax).values
        out["mu_zero_equals_p_i_lambda_i"] = all(
            galois.coeff(i) == alg.p**i * lam[i] for i in range(imax + 1))
    return out


def cmd_equivariant(alg, opts) -> dict:
    from .zeta import equivariant_count, orbit_truncation

    k_max = 2 if opts.level is None else opts.level
    names = list(alg.automorphisms)
    mats = [alg.automorphisms[k] for k in names]
    classes = equivariant_count(alg, mats, k_max)
    rows = []
    total = None
    for key, poly in classes.items():
        rows.append({"fixed_by": [names[t - 1] for t in sorted(key)], "coeffs": list(poly.coeffs)})
        total = poly if total is None else total + poly
    whole = orbit_truncation(alg, k_max)
    return {"k_max": k_max, "automorphisms": names, "classes": rows, "unrestricted": list(whole.coeffs),
            "partition_sums_match": total == whole}


def cmd_kirillov_verify(alg, opts) -> dict:
    from .oracle import kirillov_verify

    k = 2 if opts.level is None else opts.level
    checks = kirillov_verify(alg, k, sample_pairs=opts.samples or 1000, seed=opts.seed)
    return {"level": k, "checks": checks, "pass": all(c["pass"] for c in checks)}


def cmd_integral_check(alg, opts) -> dict:
    from .integrate import integral_check

    e = 3 if opts.level is None else opts.level
    g = _element(alg, opts.element) if opts.element else None
    return integral_check(alg, e, g)


def cmd_measure_check(alg, opts) -> dict:
    from .coadjoint import normalize
    from .integrate import box_measure_formula, measure_of_character_box

    e = 3 if opts.level is None else opts.level
    rng = random.Random(opts.seed)
    p, n = alg.p, alg.n
    rows = []
    for _ in range(opts.samples or 20):
        k = rng.randrange(1, e)
        while True:
            a = [rng.randrange(p**k) for _ in range(n)]
            if any(x % p for x in a):
                break
        w = normalize(a, k, p)
        got = measure_of_character_box(alg, w, e)
        want = box_measure_formula(p, n, w.k)
        rows.append({"a": list(w.a), "k": w.k, "measure": got, "formula": want, "pass": got == want})
    return {"e": e, "checks": rows, "pass": all(r["pass"] for r in rows)}


HANDLERS = {
    "validate": cmd_validate,
    "lambda": cmd_lambda,
    "zeta-fit": cmd_zeta_fit,
    "twisted": cmd_twisted,
    "equivariant": cmd_equivariant,
    "kirillov-verify": cmd_kirillov_verify,
    "integral-check": cmd_integral_check,
    "measure-check": cmd_measure_check,
}


def run_command(command: str, alg: Optional[LieAlgebra], opts) -> dict:
    start = time.perf_counter()
    body = HANDLERS[command](alg, opts)
    report = {"command": command, "options": _echo(opts), "results": body}
    if alg is not None:
        report["algebra"] = {"name": alg.name, "digest": alg.digest(), "p": alg.p, "rank": alg.n}
    if command == "lambda":
        report["table"] = body["table"]
    if opts.timing:
        report["seconds"] = round(time.perf_counter() - start, 3)
    return report


def _echo(opts) -> dict:
    # run-environment options (threads, cache) do not change results and stay out of the report
    keep = ("imax", "level", "element", "coeffs", "max_den", "samples", "seed", "hold_out", "no_direct")
    return {k: getattr(opts, k) for k in keep if getattr(opts, k, None) not in (None, False)}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="orbitzeta", description="Character-degree counts for uniform pro-p groups.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("algebra", nargs="?", help="algebra JSON file (optional for zeta-fit --coeffs)")
    ap.add_argument("--imax", type=int, help="largest degree exponent i (default 3 for lambda, 5 for zeta-fit, 2 for twisted)")
    ap.add_argument("--level", type=int, help="level k / e (kirillov-verify, equivariant, integral-check, measure-check)")
    ap.add_argument("--element", help="named element from the algebra file or comma-separated coordinates")
    ap.add_argument("--threads", type=int, default=int(os.environ.get("ORBITZETA_THREADS", "1")),
                    help="worker processes for level counts (default $ORBITZETA_THREADS or 1)")
    ap.add_argument("--cache", type=Path,
                    default=Path(os.environ.get("ORBITZETA_CACHE", Path.home() / ".cache" / "orbitzeta")),
                    help="level-count cache directory (default $ORBITZETA_CACHE or ~/.cache/orbitzeta)")
    ap.add_argument("--no-cache", action="store_true", help="neither read nor write the cache")
    ap.add_argument("--format", choices=("json", "csv"), default="json")
    ap.add_argument("--output", type=Path, help="write the report here instead of stdout")
    ap.add_argument("--coeffs", help="zeta-fit: comma-separated series instead of computing lambda_i")
    ap.add_argument("--max-den", type=int, help="zeta-fit: largest denominator degree")
    ap.add_argument("--hold-out", action="store_true", help="zeta-fit: fit without the last coefficient and predict it")
    ap.add_argument("--no-direct", action="store_true", help="twisted: skip the orbit-by-orbit sum")
    ap.add_argument("--samples", type=int, help="sample count for verification commands")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--timing", action="store_true", help="include wall time (makes reports non-reproducible)")
    return ap


def main(argv=None) -> int:
    opts = build_parser().parse_args(argv)
    try:
        if opts.algebra is None:
            if not (opts.command == "zeta-fit" and opts.coeffs):
                raise SchemaError("algebra", "an algebra file is required")
            alg = None
        else:
            alg = load_algebra(Path(opts.algebra))
        data = write_report(run_command(opts.command, alg, opts), opts.format)
    except OrbitZetaError as exc:
        print(f"orbitzeta: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"orbitzeta: {exc}", file=sys.stderr)
        return 1
    if opts.output:
        opts.output.write_bytes(data)
    else:
        sys.stdout.write(data.decode())
    return 0


if __name__ == "__main__":
    sys.exit(main())
