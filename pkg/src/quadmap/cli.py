"""Command-line front end.

    quadmap classify  --inline "over Q vars 3 map [x1*x2, x1^2, 0]"
    quadmap decompose --input map.txt --output cert.json
    quadmap verify    --input map.txt --certificate cert.json
    quadmap fuzz      --field "GF(5)" --count 200 --seed 7
    quadmap report    --input map.txt

Maps are written as ``over <field> vars <n> map [<poly>, ...]``.  Both header
words are optional: the field may come from ``--field`` and the number of
variables defaults to the largest index used.  JSON goes to ``--output`` or,
failing that, to stdout.

Exit codes: 0 success, 1 verification failure, 2 parse error,
3 contract violation, 4 any other unmet precondition.
"""
from __future__ import annotations

import argparse
import collections
import json
import os
import random
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .errors import (ContractViolation, CtxMismatch, FieldTooSmall, ParseError, QuadmapError)
from .field import make_field
from .maps import PolyMap, TameCertificate, jacobian, verify_certificate
from .matpoly import rank_kx
from .poly import _position, parse_poly

COMMANDS = ("classify", "decompose", "verify", "fuzz", "report")
EXIT_OK, EXIT_VERIFY, EXIT_PARSE, EXIT_CONTRACT, EXIT_OTHER = 0, 1, 2, 3, 4

_HEADER = re.compile(
    r"\s*(?:over\s+(?P<field>QQ?|GF\s*\(\s*\d+\s*(?:,\s*\d+\s*)?\)|GF\d+)\s+)?"
    r"(?:vars\s+(?P<n>\d+)\s+)?(?:map\s*)?\[", re.I)


# ---- map text ----------------------------------------------------------------

def _split_components(text, start):
    """Offsets of the top-level comma-separated pieces between ``[`` and ``]``."""
    pieces, depth, begin = [], 0, start
    for pos in range(start, len(text)):
        ch = text[pos]
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            pieces.append((begin, pos))
            begin = pos + 1
        elif ch == "]" and depth == 0:
            pieces.append((begin, pos))
            return pieces, pos
    line, col = _position(text, len(text), 1, 1)
    raise ParseError("missing ']'", line, col)


def parse_map(text, field=None) -> PolyMap:
    """Parse ``over GF(2) vars 6 map [x2*x6, x1*x5 + x3*x6, ...]``.

    ``field`` (descriptor or context) is used when the text names none; if
    both are present they must agree.
    """
    m = _HEADER.match(text)
    if not m:
        raise ParseError("expected 'over <field> vars <n> map [...]'", 1, 1)
    named = m.group("field")
    if named is None and field is None:
        raise ParseError("no field given in the text or on the command line", 1, 1)
    ctx = make_field(named) if named else make_field(field)
    if named and field is not None and make_field(field) != ctx:
        raise CtxMismatch(f"map is over {ctx} but {make_field(field)} was requested")
    spans, end = _split_components(text, m.end())
    if text[end + 1:].strip():
        line, col = _position(text, end + 1 + len(text[end + 1:]) - len(text[end + 1:].lstrip()), 1, 1)
        raise ParseError("unexpected text after ']'", line, col)
    if m.group("n") is not None:
        n = int(m.group("n"))
        if n < 1:
            raise ParseError("a map needs at least one variable", 1, m.start("n") + 1)
    else:
        n = max([int(v) for v in re.findall(r"x(\d+)", text[m.end():end])] + [1])
    if len(spans) == 1 and not text[spans[0][0]:spans[0][1]].strip():
        raise ParseError("a map needs at least one component", *_position(text, spans[0][0], 1, 1))
    comps = []
    for a, b in spans:
        line, col = _position(text, a, 1, 1)
        comps.append(parse_poly(text[a:b], ctx, n, line, col))
    return PolyMap(ctx, n, comps)


def format_map(F: PolyMap) -> str:
    """Canonical text form; ``parse_map(format_map(F)) == F``."""
    return f"over {F.ctx} vars {F.n} map [{', '.join(str(p) for p in F.comps)}]"


# ---- jobs ----------------------------------------------------------------------

@dataclass(frozen=True)
class JobSpec:
    command: str
    field: str = None
    input: str = None
    inline: str = None
    certificate: str = None
    seed: int = 0
    count: int = 100
    nvars: int = 6
    ncomps: int = 6
    output: str = None
    mode: str = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        for name in ("count", "nvars", "ncomps"):
            if getattr(self, name) < 1:
                raise ValueError(f"--{name} must be positive")
        if self.mode not in (None, "exact", "square-free"):
            raise ValueError(f"unknown mode {self.mode!r}")

    def map_text(self):
        if self.inline is not None:
            return self.inline
        if self.input is None:
            raise ValueError("give a map with --input or --inline")
        with open(self.input, encoding="utf-8") as fh:
            return fh.read()


def _threads():
    try:
        return max(1, int(os.environ.get("QUADMAP_THREADS", "1")))
    except ValueError:
        return 1


# ---- reports --------------------------------------------------------------------

def rkr_json(rep):
    return {"r": rep.r, "form": rep.form, "form_name": rep.form_name,
            "nonzero_rows": rep.nonzero_row_count, "route": rep.route,
            "S": rep.S.to_lists(), "T": rep.T.to_lists()}


def classify_map(H: PolyMap) -> dict:
    """Rank, the rank-r normal form and, for rank 3, the case of ``H``.

    Both reports are re-verified on ``S H(T x)`` before ``verified`` is set.
    """
    from .classify import classify_rk3, classify_rkr, verify_case_predicate
    from .maps import conjugate
    r = rank_kx(jacobian(H))
    out = {"map": format_map(H), "field": str(H.ctx), "rank": r, "rkr": None,
           "case": None, "case_report": None, "verified": False}
    ok = True
    if r > 0:
        rep = classify_rkr(H)
        out["rkr"] = rkr_json(rep)
        ok = verify_case_predicate(conjugate(H, rep.S, rep.T), rep)[0]
    if r == 3:
        case = classify_rk3(H)
        out["case"] = case.case
        out["case_report"] = case.to_json()
        ok = ok and verify_case_predicate(conjugate(H, case.S, case.T), case)[0]
    out["verified"] = ok
    return out


def decompose_map(F: PolyMap) -> dict:
    """Certificate JSON for a Keller map, re-verified before it is returned."""
    from .keller import tame_decompose
    rep = tame_decompose(F)
    mode = "up_to_square_part" if F.ctx.characteristic == 2 else "exact"
    again = verify_certificate(rep.certificate, F, mode)
    out = rep.to_json()
    out["verified"] = bool(again.ok and rep.verified)
    out["map"] = format_map(F)
    return out


def _load_certificate(path, ctx):
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if "certificate" in data:
        data = data["certificate"]
    return TameCertificate.from_json(data, ctx)


def _verify_mode(job, ctx):
    if job.mode == "exact":
        return "exact"
    if job.mode == "square-free":
        return "up_to_square_part"
    return "up_to_square_part" if ctx.characteristic == 2 else "exact"


# ---- fuzzing ----------------------------------------------------------------------

def _fuzz_one(args):
    """Instance ``i`` of a fuzz run; depends only on the arguments."""
    field, seed, i, nvars, ncomps = args
    from .generators import random_keller_map, random_map_of_rank, random_rank3_map
    ctx = make_field(field)
    rng = random.Random(f"{seed}:{i}")
    rec = {"index": i}
    try:
        if rng.random() < 0.5:
            lo = min(3, nvars)
            F, family = random_keller_map(ctx, rng, (lo, nvars))
            rec.update(pipeline="decompose", family=family, map=format_map(F))
            out = decompose_map(F)
            rec.update(rank=out["rank"], case=out["case"],
                       factors=len(out["certificate"]["factors"]),
                       status="ok" if out["verified"] else "verify-failed")
        else:
            r = rng.randint(1, 3)
            if r == 3 and nvars >= 4 and ncomps >= 4:
                H = random_rank3_map(ctx, rng, (4, max(4, nvars)), (4, max(4, ncomps)))
            else:
                r = min(r, nvars, 2)
                H = random_map_of_rank(ctx, r, rng, (r, nvars), (r, ncomps))
            rec.update(pipeline="classify", map=format_map(H))
            out = classify_map(H)
            rec.update(rank=out["rank"], case=out["case"],
                       form=out["rkr"]["form"] if out["rkr"] else None,
                       status="ok" if out["verified"] else "verify-failed")
    except ContractViolation as exc:
        rec.update(status="contract-violation", error=str(exc))
    except FieldTooSmall as exc:
        rec.update(status="field-too-small", error=str(exc))
    return rec


def fuzz(field, seed, count, nvars, ncomps, threads=1):
    jobs = [(str(make_field(field)), seed, i, nvars, ncomps) for i in range(count)]
    if threads > 1 and count > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(_fuzz_one, jobs, chunksize=max(1, count // (4 * threads))))
    else:
        records = [_fuzz_one(j) for j in jobs]
    summary = collections.Counter()
    for rec in records:
        key = (rec.get("pipeline", "-"), rec.get("rank"), rec.get("case"), rec.get("form"),
               rec["status"])
        summary[key] += 1
    rows = [{"pipeline": k[0], "rank": k[1], "case": k[2], "form": k[3], "status": k[4],
             "count": v} for k, v in sorted(summary.items(), key=lambda kv: str(kv[0]))]
    return {"field": str(make_field(field)), "seed": seed, "count": count,
            "nvars": nvars, "ncomps": ncomps, "summary": rows, "records": records}


def format_summary(report) -> str:
    head = f"fuzz over {report['field']}  seed {report['seed']}  count {report['count']}"
    lines = [head, f"{'pipeline':<10} {'rank':>4} {'case':>4} {'form':>4}  {'status':<19} {'count':>5}"]
    for row in report["summary"]:
        cells = ["-" if row[k] is None else str(row[k]) for k in ("rank", "case", "form")]
        lines.append(f"{row['pipeline']:<10} {cells[0]:>4} {cells[1]:>4} {cells[2]:>4}  "
                     f"{row['status']:<19} {row['count']:>5}")
    return "\n".join(lines)


def _human_report(cls, dec, note=""):
    lines = [cls["map"], f"rank of JH: {cls['rank']}"]
    if cls["rkr"]:
        lines.append(f"rank-r form: {cls['rkr']['form']} ({cls['rkr']['form_name']}), "
                     f"{cls['rkr']['nonzero_rows']} nonzero rows")
    if cls["case"] is not None:
        c = cls["case_report"]["c"]
        lines.append(f"rank-3 case: {cls['case']}" + (f" with c = {c}" if c is not None else ""))
    if dec is None:
        lines.append(note)
    else:
        lines.append(f"x + H is Keller; certificate with {len(dec['certificate']['factors'])} factors, "
                     f"verified: {str(dec['verified']).lower()}")
        if dec["square_part"]:
            lines.append(f"square part: [{', '.join(dec['square_part'])}]")
    return "\n".join(lines)


# ---- entry point --------------------------------------------------------------------

def _emit(job, data, stdout):
    text = json.dumps(data, indent=2, sort_keys=True) + "\n"
    if job.output:
        with open(job.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        stdout.write(text)


def run(job: JobSpec, stdout=None, stderr=None) -> int:
    """Execute ``job``; returns the exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        if job.command == "fuzz":
            rep = fuzz(job.field or "GF(5)", job.seed, job.count, job.nvars, job.ncomps, _threads())
            stdout.write(format_summary(rep) + "\n")
            if job.output:
                _emit(job, rep, stdout)
            bad = [r for r in rep["records"] if r["status"] in ("contract-violation", "verify-failed")]
            if any(r["status"] == "contract-violation" for r in bad):
                return EXIT_CONTRACT
            return EXIT_VERIFY if bad else EXIT_OK
        F = parse_map(job.map_text(), job.field)
        if job.command == "verify":
            if not job.certificate:
                raise ValueError("verify needs --certificate")
            cert = _load_certificate(job.certificate, F.ctx)
            res = verify_certificate(cert, F, _verify_mode(job, F.ctx))
            out = {"map": format_map(F), "verified": res.ok,
                   "discrepancy": None if res.ok else res.discrepancy.to_strings()}
            _emit(job, out, stdout)
            return EXIT_OK if res.ok else EXIT_VERIFY
        if job.command == "classify":
            out = classify_map(F)
        elif job.command == "decompose":
            out = decompose_map(F)
        else:
            from .errors import RankTooHigh
            from .keller import is_keller
            H = F
            if F.m == F.n and not F.is_quadratic_homogeneous():
                H = F - PolyMap.identity(F.ctx, F.n)
            cls = classify_map(H)
            dec, note = None, "x + H is not a Keller map"
            if H.m == H.n and is_keller(PolyMap.identity(H.ctx, H.n) + H):
                try:
                    dec = decompose_map(PolyMap.identity(H.ctx, H.n) + H)
                except RankTooHigh:
                    note = "x + H is Keller but rk JH > 3; no certificate"
            elif H.m != H.n:
                note = "H is not square; no Keller test"
            stdout.write(_human_report(cls, dec, note) + "\n")
            if job.output:
                _emit(job, {"classification": cls, "decomposition": dec}, stdout)
            return EXIT_OK if cls["verified"] and (dec is None or dec["verified"]) else EXIT_VERIFY
        _emit(job, out, stdout)
        return EXIT_OK if out["verified"] else EXIT_VERIFY
    except (ParseError, CtxMismatch) as exc:
        stderr.write(f"parse error: {exc}\n")
        return EXIT_PARSE
    except ContractViolation as exc:
        stderr.write(f"contract violation: {exc}\n")
        return EXIT_CONTRACT
    except (QuadmapError, ValueError, OSError) as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_OTHER


def build_parser():
    p = argparse.ArgumentParser(prog="quadmap", description=__doc__.split("\n\n")[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--field", help='"Q", "GF(p)" or "GF(p,k)"')
    src = p.add_mutually_exclusive_group()
    src.add_argument("--input", help="file holding the map text")
    src.add_argument("--inline", help="map text on the command line")
    p.add_argument("--certificate", help="certificate JSON for verify")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--nvars", type=int, default=6)
    p.add_argument("--ncomps", type=int, default=6)
    p.add_argument("--output", help="write the JSON report here")
    p.add_argument("--mode", choices=("exact", "square-free"))
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        job = JobSpec(**vars(args))
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_OTHER
    return run(job)


if __name__ == "__main__":
    sys.exit(main())
