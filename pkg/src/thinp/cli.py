"""Command-line interface: ``thinp <command> ...``.

Reports go to standard output as pretty, key-sorted JSON; diagnostics go to
standard error.  Exit statuses: 0 success, 1 verification failure, 2 input
error, 3 cannot certify.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import berkovich as bk
from . import oracle
from . import structure as st
from .pcgroup import BoundExceeded, Group, InconsistentPresentation, PresentationError

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_INPUT = 2
EXIT_CANNOT_CERTIFY = 3

INPUT_ERRORS = (OSError, PresentationError, InconsistentPresentation, BoundExceeded,
                json.JSONDecodeError, oracle.CertificateError, oracle.CertificateMismatch)


class CliError(Exception):
    def __init__(self, message: str, status: int):
        super().__init__(message)
        self.status = status


def emit(data, out=None) -> None:
    text = json.dumps(data, indent=2, sort_keys=True) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def load_group(path) -> Group:
    return Group.from_file(path)


# ------------------------------------------------------------ reports

def analyze_report(G: Group, oracle_bound: int) -> dict:
    lower = st.lower_central_series(G)
    upper = st.upper_central_series(G)
    thin = {"coverty": st.is_thin(G, "coverty").to_json()}
    if G.order <= st.NORMAL_SUBGROUP_BOUND:
        thin["exact"] = st.is_thin(G, "exact").to_json()
    return {
        "group": G.name,
        "prime": G.p,
        "order": G.order,
        "class": lower.nilpotency_class,
        "lower_central_orders": lower.orders(),
        "upper_central_orders": upper.orders(),
        "center_order": st.center(G).order,
        "frattini_order": st.frattini(G).order,
        "min_generators": st.min_generators(G),
        "thin": thin,
        "maximal_class": st.is_maximal_class(G),
        "standing_assumptions": st.standing_assumptions(G).to_json(),
        "within_oracle_bound": G.order <= oracle_bound,
    }


def certificate_for(G: Group, oracle_bound: int, seed: int) -> bk.NonInnerCertificate:
    try:
        return bk.certify(G, oracle_bound=oracle_bound, seed=seed)
    except (bk.CannotCertify, oracle.OracleBoundExceeded) as exc:
        raise CliError(str(exc), EXIT_CANNOT_CERTIFY) from exc


def verify_report(G: Group, cert: dict) -> tuple[bool, dict]:
    checks = oracle.certificate_checks(G, cert)
    return all(checks.values()), checks


# ------------------------------------------------------------ commands

def cmd_analyze(args) -> int:
    emit(analyze_report(load_group(args.file), args.oracle_bound))
    return EXIT_OK


def cmd_thin_check(args) -> int:
    G = load_group(args.file)
    if args.method == "exact" and G.order > st.NORMAL_SUBGROUP_BOUND:
        raise CliError(f"exact method limited to order {st.NORMAL_SUBGROUP_BOUND}", EXIT_INPUT)
    emit({"group": G.name, "order": G.order, **st.is_thin(G, args.method).to_json()})
    return EXIT_OK


def cmd_find_noninner(args) -> int:
    G = load_group(args.file)
    cert = certificate_for(G, args.oracle_bound, args.seed)
    emit(cert.to_json(), args.output)
    print(f"{G.name}: {cert.method} certificate ({cert.mode})", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args) -> int:
    G = load_group(args.group_file)
    cert = json.loads(Path(args.cert_file).read_text())
    if not isinstance(cert, dict):
        raise CliError("certificate must be a JSON object", EXIT_INPUT)
    ok, checks = verify_report(G, cert)
    for name, value in sorted(checks.items()):
        print(f"{name:15s} {'ok' if value else 'FAILED'}", file=sys.stderr)
    emit({"group": G.name, "valid": ok, "checks": checks})
    return EXIT_OK if ok else EXIT_VERIFY_FAILED


def corpus_row(path: Path, oracle_bound: int, seed: int) -> dict:
    row = {"file": path.name}
    try:
        G = load_group(path)
        a = analyze_report(G, oracle_bound)
        row.update(group=G.name, order=G.order, **{"class": a["class"]},
                   thin=a["thin"]["coverty"]["is_thin"])
        cert = bk.certify(G, oracle_bound=oracle_bound, seed=seed)
        ok, _ = verify_report(G, cert.to_json())
        row.update(status="certified", method=cert.method, verified=ok)
    except (bk.CannotCertify, oracle.OracleBoundExceeded) as exc:
        row.update(status="cannot_certify", error=str(exc))
    except INPUT_ERRORS as exc:
        row.update(status="error", error=str(exc))
    return row


def cmd_corpus(args) -> int:
    directory = Path(args.dir)
    if not directory.is_dir():
        raise CliError(f"{directory} is not a directory", EXIT_INPUT)
    rows = [corpus_row(f, args.oracle_bound, args.seed) for f in sorted(directory.glob("*.pc"))]
    for r in rows:
        print(f"{r['file']:12s} {r['status']:15s} {r.get('method', '')}", file=sys.stderr)
    all_ok = all(r["verified"] for r in rows if r["status"] == "certified")
    emit({"rows": rows, "all_certified_verified": all_ok})
    return EXIT_OK if all_ok else EXIT_VERIFY_FAILED


# ------------------------------------------------------------ parser

def _add_globals(p: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    p.add_argument("--oracle-bound", type=int, default=default if suppress else oracle.ORACLE_BOUND,
                   help="largest group order for exhaustive search (default 729)")
    p.add_argument("--seed", type=int, default=default if suppress else 0,
                   help="seed for randomised spot checks (default 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thinp", description=__doc__.splitlines()[0])
    _add_globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        _add_globals(p, suppress=True)
        p.set_defaults(func=func)
        return p

    p = add("analyze", cmd_analyze, "structure report for a presentation")
    p.add_argument("file")
    p = add("find-noninner", cmd_find_noninner, "certify a non-inner automorphism of order p")
    p.add_argument("file")
    p.add_argument("-o", "--output", help="write the certificate here instead of stdout")
    p = add("verify", cmd_verify, "check a certificate against a presentation")
    p.add_argument("group_file")
    p.add_argument("cert_file")
    p = add("thin-check", cmd_thin_check, "decide thinness")
    p.add_argument("file")
    p.add_argument("--method", choices=("exact", "coverty"), default="exact")
    p = add("corpus", cmd_corpus, "analyze, certify and verify every *.pc file in a directory")
    p.add_argument("dir")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.status
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except bk.PipelineFailure as exc:
        print(f"internal failure: {exc}", file=sys.stderr)
        return EXIT_VERIFY_FAILED


if __name__ == "__main__":
    sys.exit(main())
