"""Command-line front end.

    sepmix classify STATE
    sepmix sweep --family werner --from 0 --to 1 --steps 100
    sepmix scenario SCENARIO.json
    sepmix typicality --p 0.5,0.5 --epsilon 0.1 --m-list 25,100,400

Exit codes: 0 success, 2 bad input, 3 internal invariant failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from typing import Any, Callable

import numpy as np

from . import ensemble as ens_mod
from .ensemble import (
    CHSHSettings,
    PreparationConfig,
    TagEquals,
    empirical_density,
    estimate_chsh,
    optimal_chsh_settings,
    place_select,
    run_preparation,
    tag_frequencies,
    typical_weight,
)
from .fano import FanoForm, fano_decompose, fano_reconstruct, in_octahedron, in_tetrahedron
from .operators import PSD_TOL, DensityError, DensityOperator, PureState, trace_distance, validate_density
from .separability import (
    InvariantError,
    NoSignChangeError,
    chsh_criterion,
    classify_mixture,
    ppt_classify,
    separability_boundary,
)
from .states import (
    BellKind,
    MixtureSpec,
    Provenance,
    bell_diagonal,
    maximally_mixed,
    mix,
    product_state,
    werner,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INTERNAL = 3


class InputError(ValueError):
    pass


# -- serialisation ---------------------------------------------------------------

def fmt_float(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise InvariantError(f"non-finite value {x!r} in output")
    return format(x, ".17g")


def dumps(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float written to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None or isinstance(obj, (bool, str)):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj)
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist(), indent, _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.number)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _write(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _csv(header: list[str], rows: list[list[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)  # RFC-4180: CRLF line endings, minimal quoting
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt_float(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


# -- state files -------------------------------------------------------------------

_BELL_NAMES = {k.label: k for k in BellKind}


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise InputError(f"cannot parse number list {text!r}") from exc


def parse_family(name: str):
    """``bell:phi+``, ``werner:0.3``, ``bell_diagonal:p1,p2,p3,p4``,
    ``product:01``, ``maximally_mixed``."""
    name = name.strip()
    kind, _, arg = name.partition(":")
    if kind == "maximally_mixed" and not arg:
        return maximally_mixed()
    if kind == "bell":
        if arg not in _BELL_NAMES:
            raise InputError(f"unknown Bell state {arg!r}; expected one of {sorted(_BELL_NAMES)}")
        weights = [0.0] * 4
        weights[_BELL_NAMES[arg].value] = 1.0
        return bell_diagonal(weights)
    if kind == "werner":
        (lam,) = _floats(arg) or [None]
        if lam is None:
            raise InputError("werner needs a parameter, e.g. werner:0.5")
        return werner(lam)
    if kind == "bell_diagonal":
        return bell_diagonal(_floats(arg))
    if kind == "product":
        if not arg or set(arg) - {"0", "1"}:
            raise InputError(f"product state needs a bit string, got {arg!r}")
        return product_state(*(int(b) for b in arg))
    raise InputError(f"unknown state family {name!r}")


def _complex_entries(entries) -> np.ndarray:
    try:
        arr = np.array(entries, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError("entries must be [re, im] pairs") from exc
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InputError("entries must be a list of [re, im] pairs")
    return arr[:, 0] + 1j * arr[:, 1]


def parse_state(obj):
    """Build a state from a family string or a JSON object (family, fano, matrix or ket)."""
    if isinstance(obj, str):
        return parse_family(obj)
    if not isinstance(obj, dict):
        raise InputError("state must be a family string or an object")
    if "family" in obj:
        return parse_family(obj["family"])
    if "fano" in obj:
        f = obj["fano"]
        try:
            form = FanoForm(f.get("a", [0, 0, 0]), f.get("b", [0, 0, 0]), f["C"])
        except (KeyError, ValueError) as exc:
            raise InputError(f"bad fano form: {exc}") from exc
        return validate_density(fano_reconstruct(form))
    if "matrix" in obj:
        m = obj["matrix"]
        dim = int(m["dim"])
        vals = _complex_entries(m["entries"])
        if vals.size != dim * dim:
            raise InputError(f"matrix needs {dim * dim} entries, got {vals.size}")
        dims = tuple(m["dims"]) if "dims" in m else None
        return validate_density(vals.reshape(dim, dim), dims=dims)
    if "ket" in obj:
        return PureState(_complex_entries(obj["ket"]))
    raise InputError("state object needs one of: family, fano, matrix, ket")


def load_state_arg(arg: str):
    if os.path.exists(arg):
        with open(arg) as fh:
            text = fh.read().strip()
        if text.startswith("{") or text.startswith('"'):
            try:
                return parse_state(json.loads(text))
            except json.JSONDecodeError as exc:
                raise InputError(f"invalid JSON in {arg}: {exc}") from exc
        return parse_family(text)
    return parse_family(arg)


def _density(state) -> DensityOperator:
    return state.density() if isinstance(state, PureState) else state


# -- classify ----------------------------------------------------------------

def classify_report(state, tol: float) -> dict:
    rho = _density(state)
    verdict = ppt_classify(rho, tol)
    report = {
        "verdict": verdict.status.value,
        "ppt_witness": verdict.witness,
        "dims": list(rho.dims) if rho.dims else None,
    }
    if rho.dim == 4:
        f = fano_decompose(rho)
        chsh = chsh_criterion(rho, tol)
        c = f.c_vector
        report.update({
            "fano": {"a": f.a.tolist(), "b": f.b.tolist(), "C": f.C.tolist()},
            "c_vector": c.tolist(),
            "bell_diagonal": f.is_bell_diagonal(1e-12),
            "octahedron_status": in_octahedron(c, tol).value,
            "tetrahedron_status": in_tetrahedron(c, tol).value,
            "M": chsh.M,
            "max_chsh": chsh.max_chsh,
            "chsh_violation": chsh.violates,
        })
    else:
        report.update({k: None for k in ("fano", "c_vector", "bell_diagonal", "octahedron_status",
                                         "tetrahedron_status", "M", "max_chsh", "chsh_violation")})
    return report


def cmd_classify(args) -> int:
    report = classify_report(load_state_arg(args.state), args.tol)
    _write(dumps(report) + "\n", args.out)
    return EXIT_OK


# -- sweep ----------------------------------------------------------------------

def _phi_mix(t: float) -> DensityOperator:
    return bell_diagonal([1.0 - t, t, 0.0, 0.0])


FAMILIES: dict[str, Callable[[float], DensityOperator]] = {
    "werner": werner,
    "phi_mix": _phi_mix,
}


def _boundary(family, lo, hi, criterion):
    try:
        return separability_boundary(family, min(lo, hi), max(lo, hi), tol=1e-9, criterion=criterion)
    except NoSignChangeError:
        return None


def cmd_sweep(args) -> int:
    if args.family not in FAMILIES:
        raise InputError(f"unknown family {args.family!r}; choose from {sorted(FAMILIES)}")
    lo, hi, steps = args.from_, args.to, args.steps
    if steps < 0:
        raise InputError("steps must be nonnegative")
    if not (0.0 <= lo <= 1.0 and 0.0 <= hi <= 1.0):
        raise InputError(f"range [{lo}, {hi}] is outside the family domain [0, 1]")
    family = FAMILIES[args.family]
    xs = [lo] if steps == 0 else [lo + (hi - lo) * i / steps for i in range(steps + 1)]
    rows = []
    for x in xs:
        rho = family(x)
        c = fano_decompose(rho).c_vector
        chsh = chsh_criterion(rho, args.tol)
        rows.append([x, ppt_classify(rho, args.tol).witness, float(np.abs(c).sum()), chsh.M, chsh.max_chsh])
    _write(_csv(["lambda", "ppt_witness", "l1_norm", "M", "max_chsh"], rows), args.out)

    summary = {
        "family": args.family,
        "separable_boundary": _boundary(family, lo, hi, "ppt"),
        "chsh_boundary": _boundary(family, lo, hi, "chsh"),
    }
    for key in ("separable_boundary", "chsh_boundary"):
        v = summary[key]
        print(f"{key}={'none' if v is None else fmt_float(v)}", file=sys.stderr)
    if args.summary:
        _write(dumps(summary) + "\n", args.summary)
    return EXIT_OK


# -- scenario ---------------------------------------------------------------------

def parse_scenario(obj: dict) -> tuple[MixtureSpec, dict | None]:
    if not isinstance(obj, dict) or "components" not in obj:
        raise InputError("scenario needs a 'components' list")
    try:
        weights = [float(c["weight"]) for c in obj["components"]]
        tags = [int(c["tag"]) for c in obj["components"]]
        states = [parse_state(c["state"]) for c in obj["components"]]
    except (KeyError, TypeError) as exc:
        raise InputError(f"bad component entry: {exc}") from exc
    prov = obj.get("provenance", "proper")
    try:
        provenance = Provenance(prov)
    except ValueError as exc:
        raise InputError(f"provenance must be 'proper' or 'reduced', got {prov!r}") from exc
    return MixtureSpec.of(weights, states, tags, provenance), obj.get("simulation")


def _settings_from(obj) -> CHSHSettings | None:
    if obj in (None, "optimal"):
        return None
    if isinstance(obj, dict):
        try:
            return CHSHSettings(**{k: obj[k] for k in ("a", "a_prime", "b", "b_prime")})
        except KeyError as exc:
            raise InputError(f"explicit settings need a, a_prime, b, b_prime: missing {exc}") from exc
    raise InputError("settings must be 'optimal' or an object of unit vectors")


def _settings_dict(s: CHSHSettings) -> dict:
    return {"a": s.a.tolist(), "a_prime": s.a_prime.tolist(), "b": s.b.tolist(), "b_prime": s.b_prime.tolist()}


def _chsh_dict(est, settings: CHSHSettings) -> dict:
    return {"value": est.value, "stderr": est.stderr, "correlators": list(est.correlators),
            "shots_per_setting": list(est.shots_per_setting), "settings": _settings_dict(settings)}


def _verdict_dict(v) -> dict:
    return {"status": v.status.value, "witness": v.witness, "method": v.method.value}


def scenario_report(spec: MixtureSpec, sim: dict | None, tol: float, seed: int | None = None) -> dict:
    cls = classify_mixture(spec, tol)
    rho = mix(spec)
    ens_chsh = chsh_criterion(rho, tol) if rho.dim == 4 else None
    report: dict = {
        "provenance": spec.provenance.value,
        "verdict": cls.verdict.value,
        "ensemble": _verdict_dict(cls.ensemble),
        "ensemble_chsh": None if ens_chsh is None else vars(ens_chsh),
        "components": [
            {"tag": c.tag, "weight": c.weight, **_verdict_dict(c.verdict),
             "chsh": None if c.chsh is None else vars(c.chsh)}
            for c in cls.per_component
        ],
        "simulation": None,
    }
    if sim is None:
        return report
    if rho.dim != 4:
        raise InputError("simulation is only supported for two-qubit scenarios")
    try:
        n_runs = int(sim.get("n_runs", 100_000))
        shots = int(sim.get("shots", n_runs))
        master = int(seed if seed is not None else sim.get("seed", 0))
        algo = sim.get("rng_algorithm", "philox4x64")
        config = PreparationConfig(spec, n_runs, master, algo)
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad simulation block: {exc}") from exc
    explicit = _settings_from(sim.get("settings", "optimal"))
    record = run_preparation(config)

    freqs = tag_frequencies(record)
    emp = empirical_density(record)
    whole_settings = explicit or optimal_chsh_settings(rho)
    if spec.provenance is Provenance.PROPER_PREPARATION:
        whole = estimate_chsh(record, whole_settings, shots, ens_mod.stream(master, 1))
    else:
        whole = estimate_chsh(rho, whole_settings, shots, ens_mod.stream(master, 1))

    per_tag = None
    if spec.provenance is Provenance.PROPER_PREPARATION:
        per_tag = {}
        for i, t in enumerate(spec.tags):
            ids, _ = place_select(record, TagEquals(t))
            if len(ids) == 0:
                per_tag[str(t)] = None
                continue
            sub = record.sub(ids)
            s = explicit or optimal_chsh_settings(empirical_density(sub))
            est = estimate_chsh(sub, s, shots, ens_mod.stream(master, 2, i))
            per_tag[str(t)] = {"runs": int(len(ids)), **_chsh_dict(est, s)}

    report["simulation"] = {
        "n_runs": n_runs,
        "shots": shots,
        "seed": master,
        "rng_algorithm": algo,
        "tag_frequencies": {str(t): f for t, f in freqs.items()},
        "empirical_trace_distance": trace_distance(emp, rho),
        "whole_ensemble_chsh": _chsh_dict(whole, whole_settings),
        "per_tag_chsh": per_tag,
    }
    return report


def cmd_scenario(args) -> int:
    try:
        with open(args.scenario) as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {args.scenario}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON in {args.scenario}: {exc}") from exc
    spec, sim = parse_scenario(obj)
    report = scenario_report(spec, sim, args.tol, args.seed)
    _write(dumps(report) + "\n", args.out)
    return EXIT_OK


# -- typicality ------------------------------------------------------------------

def cmd_typicality(args) -> int:
    p = _floats(args.p)
    ms = [int(x) for x in _floats(args.m_list)]
    rows = []
    for m in ms:
        if m > args.cap:
            raise InputError(f"m={m} exceeds the cap {args.cap}")
        rows.append([m, typical_weight(p, m, args.epsilon, cap=args.cap)])
    _write(_csv(["m", "weight"], rows), args.out)
    return EXIT_OK


# -- entry point -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=PSD_TOL, help="separability tolerance (default 1e-9)")
    common.add_argument("--seed", type=int, default=None, help="master seed override")
    common.add_argument("--out", default=None, help="output path (default stdout)")

    parser = argparse.ArgumentParser(prog="sepmix", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", parents=[common], help="classify a single state")
    p.add_argument("state", help="state file (JSON or family string) or inline family string")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("sweep", parents=[common], help="sweep a one-parameter family")
    p.add_argument("--family", default="werner", help=f"one of {sorted(FAMILIES)}")
    p.add_argument("--from", dest="from_", type=float, default=0.0)
    p.add_argument("--to", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--summary", default=None, help="also write the boundary summary as JSON here")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("scenario", parents=[common], help="classify and simulate a mixture scenario")
    p.add_argument("scenario", help="scenario JSON file")
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("typicality", parents=[common], help="typical-sequence weights")
    p.add_argument("--p", required=True, help="comma-separated probabilities")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--m-list", required=True, help="comma-separated run counts")
    p.add_argument("--cap", type=int, default=ens_mod.TYPICALITY_CAP)
    p.set_defaults(func=cmd_typicality)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DensityError as exc:
        print(f"error: invalid state: {exc} [{exc.invariant}]", file=sys.stderr)
        return EXIT_INPUT
    except (InvariantError, ArithmeticError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (InputError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
