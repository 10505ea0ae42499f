"""Command-line front end.

Exit status: 0 on success, 1 on usage errors, 2 on runtime or data errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

import numpy as np
import yaml

from lingen import harness, pipeline
from lingen.models import phase_randomize
from lingen.overlaps import KINDS

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


# config keys that map onto flags of each subcommand (dest names)
_STOCHASTIC = {"sweep", "phase-randomize", "synth"}


def _add_common_output(p):
    p.add_argument("--out", dest="out", help="output path (stdout if omitted)")
    p.add_argument("--format", dest="format", choices=("csv", "jsonl"))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lingen", description=__doc__)
    parser.add_argument("--config", help="YAML file with defaults; top-level keys and per-command sections")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("theory", help="emit theory curves over a load grid")
    p.add_argument("--beta", type=float)
    p.add_argument("--sigma", type=float)
    p.add_argument("--gammas")
    p.add_argument("--d", type=int, help="reference dimension for n = round(gamma d)")
    _add_common_output(p)

    p = sub.add_parser("sweep", help="Monte-Carlo sweep over the load")
    p.add_argument("--model", choices=("spiked", "powerlaw"))
    p.add_argument("--d", type=int)
    p.add_argument("--beta", type=float)
    p.add_argument("--sigma", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--basis", choices=("haar", "identity"))
    p.add_argument("--gammas")
    p.add_argument("--trials", type=int)
    p.add_argument("--latents", type=int)
    p.add_argument("--outputs", help=f"comma list from {','.join(KINDS)}")
    p.add_argument("--phase-randomize", dest="phase_randomize", action="store_const", const=True)
    p.add_argument("--aggregate", action="store_const", const=True, help="one row per gamma (trial mean, trial std err)")
    p.add_argument("--workers", type=int)
    p.add_argument("--seed", type=int)
    _add_common_output(p)

    p = sub.add_parser("qstar", help="rotated subspace overlap of two image containers (Fourier basis)")
    p.add_argument("corpus_a")
    p.add_argument("corpus_b")
    p.add_argument("--phase-randomize", dest="phase_randomize", action="store_const", const=True)
    p.add_argument("--center", action="store_const", const=True)
    p.add_argument("--drop-dc", dest="drop_dc", action="store_const", const=True)
    p.add_argument("--seed", type=int)
    _add_common_output(p)

    p = sub.add_parser("spectrum", help="eigenvalues of the Fourier correlation matrix of a container")
    p.add_argument("corpus")
    p.add_argument("--center", action="store_const", const=True)
    p.add_argument("--drop-dc", dest="drop_dc", action="store_const", const=True)
    p.add_argument("--variances", help="also write the per-frequency variance profile here")
    p.add_argument("--out", dest="out")

    p = sub.add_parser("phase-randomize", help="Fourier coefficients of a container with random phases (.npy, complex)")
    p.add_argument("corpus")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", dest="out")

    p = sub.add_parser("synth", help="write a synthetic image container")
    p.add_argument("--kind", choices=("fourier-powerlaw", "white"))
    p.add_argument("--n", type=int)
    p.add_argument("--h", type=int)
    p.add_argument("--w", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--spike-seed", dest="spike_seed", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", dest="out")

    p = sub.add_parser("container", help="inspect or convert MGDM1 containers")
    csub = p.add_subparsers(dest="action", parser_class=_Parser)
    csub.required = True
    c = csub.add_parser("inspect")
    c.add_argument("path")
    c = csub.add_parser("convert", help=".npy <-> .mgdm, direction chosen by the input extension")
    c.add_argument("src")
    c.add_argument("dst")
    c.add_argument("--h", type=int)
    c.add_argument("--w", type=int)
    return parser


_DEFAULTS = {
    "theory": dict(beta=0.0, sigma=0.0, d=1000, format="csv"),
    "sweep": dict(model="spiked", d=500, beta=0.0, sigma=0.0, alpha=1.0, basis="haar", trials=5, latents=64,
                  outputs=",".join(KINDS), phase_randomize=False, aggregate=False, workers=1, format="csv"),
    "qstar": dict(phase_randomize=False, center=False, drop_dc=None, format="csv"),
    "spectrum": dict(center=False, drop_dc=None),
    "synth": dict(kind="fourier-powerlaw", alpha=1.0, beta=0.0),
}  # fmt: skip


def _load_config(path: Optional[str], command: str) -> dict:
    if not path:
        return {}
    with open(path, encoding="utf-8") as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must be a mapping")
    flat = {k: v for k, v in data.items() if not isinstance(v, dict)}
    section = data.get(command) or {}
    if not isinstance(section, dict):
        raise UsageError(f"config section {command!r} must be a mapping")
    flat.update(section)
    return {k.replace("-", "_"): v for k, v in flat.items()}


def _resolve(args: argparse.Namespace, command: str) -> argparse.Namespace:
    """Flags override config-file values, which override built-in defaults."""
    merged = dict(_DEFAULTS.get(command, {}))
    config = _load_config(args.config, command)
    known = set(vars(args))
    unknown = set(config) - known
    if unknown:
        raise UsageError(f"unknown config key(s) for {command}: {sorted(unknown)}")
    merged.update(config)
    merged.update({k: v for k, v in vars(args).items() if v is not None})
    return argparse.Namespace(**{**vars(args), **merged})


def _require(ns, *names):
    missing = [n for n in names if getattr(ns, n, None) is None]
    if missing:
        raise UsageError(f"{ns.command}: missing required option(s): {', '.join('--' + m.replace('_', '-') for m in missing)}")


def _emit(text: str, out: Optional[str]):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _gammas(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [float(g) for g in text]
    try:
        return harness.parse_gamma_grid(str(text))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_theory(ns):
    _require(ns, "gammas")
    records = harness.emit_theory_curves(_gammas(ns.gammas), ns.beta, ns.sigma, d=ns.d)
    _emit(harness.format_table(records, harness.THEORY_HEADER, ns.format), ns.out)


def cmd_sweep(ns):
    _require(ns, "gammas", "seed")
    outputs = ns.outputs if isinstance(ns.outputs, (list, tuple)) else [o.strip() for o in str(ns.outputs).split(",") if o.strip()]
    try:
        config = harness.SweepConfig(
            gamma_grid=_gammas(ns.gammas), master_seed=ns.seed, model_kind=ns.model, d=ns.d, beta=ns.beta,
            sigma_reg=ns.sigma, alpha=ns.alpha, basis=ns.basis, n_trials=ns.trials, n_latents=ns.latents,
            outputs=outputs, phase_randomize=bool(ns.phase_randomize), workers=ns.workers, format=ns.format,
        )  # fmt: skip
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    rows = harness.run_sweep(config, aggregate=bool(ns.aggregate))
    _emit(harness.format_table([r.as_dict() for r in rows], harness.RESULT_HEADER, ns.format), ns.out)


def _shape(ds):
    return ds.provenance["h"], ds.provenance["w"]


def cmd_qstar(ns):
    if ns.phase_randomize:
        _require(ns, "seed")
    a, b = pipeline.read_container(ns.corpus_a), pipeline.read_container(ns.corpus_b)
    if _shape(a) != _shape(b):
        raise ValueError(f"image shapes differ: {_shape(a)} vs {_shape(b)}")
    h, w = _shape(a)
    est = pipeline.qstar_on_corpora(a, b, h, w, phase_randomize=bool(ns.phase_randomize), seed=ns.seed,
                                    center=bool(ns.center), drop_dc=ns.drop_dc)  # fmt: skip
    n = min(a.n, b.n)
    rec = {"Qstar": est.mean, "n_a": a.n, "n_b": b.n, "h": h, "w": w, "d": h * w,
           "gamma_w": n / w, "gamma_d": n / (h * w), "phase_randomized": int(bool(ns.phase_randomize))}  # fmt: skip
    _emit(harness.format_table([rec], list(rec), ns.format), ns.out)


def cmd_spectrum(ns):
    ds = pipeline.read_container(ns.corpus)
    h, w = _shape(ds)
    report = pipeline.fourier_spectrum_report(pipeline.to_fourier(ds, h, w), center=bool(ns.center), drop_dc=ns.drop_dc)
    if ns.out:
        report.write_csv(ns.out, width=w)
    else:
        sys.stdout.write("rank,eigenvalue,eigenvalue_over_w\n")
        for i, lam in enumerate(report.eigenvalues.tolist(), start=1):
            sys.stdout.write(f"{i},{lam!r},{lam / w!r}\n")
    if ns.variances:
        report.write_variances_csv(ns.variances)


def cmd_phase_randomize(ns):
    _require(ns, "seed", "out")
    ds = pipeline.read_container(ns.corpus)
    h, w = _shape(ds)
    coeffs = phase_randomize(pipeline.to_fourier(ds, h, w).coefficients, ns.seed)
    np.save(ns.out, coeffs)


def cmd_synth(ns):
    _require(ns, "seed", "n", "h", "w", "out")
    if ns.kind == "white":
        from lingen.rng import as_generator

        x = as_generator(ns.seed).standard_normal((ns.n, ns.h * ns.w))
    else:
        x = pipeline.fourier_powerlaw_images(ns.n, ns.h, ns.w, ns.alpha, ns.beta, seed=ns.seed, spike_seed=ns.spike_seed).samples
    pipeline.write_container(x, ns.h, ns.w, ns.out)


def cmd_container(ns):
    if ns.action == "inspect":
        ds = pipeline.read_container(ns.path)
        h, w = _shape(ds)
        x = ds.samples
        info = {"n": ds.n, "h": h, "w": w, "d": ds.d, "mean": float(x.mean()), "std": float(x.std()),
                "min": float(x.min()), "max": float(x.max())}  # fmt: skip
        sys.stdout.write(json.dumps(info) + "\n")
        return
    src = ns.src
    if src.endswith(".npy"):
        x = np.load(src)
        if x.ndim == 3:
            h, w = x.shape[1:]
            x = x.reshape(x.shape[0], -1)
        else:
            _require(ns, "h", "w")
            h, w = ns.h, ns.w
        if np.iscomplexobj(x):
            raise ValueError("containers hold real values; refusing complex input")
        pipeline.write_container(np.asarray(x, dtype=float), h, w, ns.dst)
    else:
        ds = pipeline.read_container(src)
        h, w = _shape(ds)
        np.save(ns.dst, ds.samples.reshape(ds.n, h, w))


_COMMANDS = {
    "theory": cmd_theory,
    "sweep": cmd_sweep,
    "qstar": cmd_qstar,
    "spectrum": cmd_spectrum,
    "phase-randomize": cmd_phase_randomize,
    "synth": cmd_synth,
    "container": cmd_container,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        ns = _resolve(args, args.command)
        _COMMANDS[args.command](ns)
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_USAGE
    except (ValueError, OSError, yaml.YAMLError) as exc:
        sys.stderr.write(f"lingen: error: {exc}\n")
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
