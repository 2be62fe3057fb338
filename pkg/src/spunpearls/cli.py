"""Command line: spunpearls <command> [options].

Exit codes: 0 success, 1 a check failed, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .errors import BudgetExceeded, ConfigError, PearlError
from .io import (RunManifest, build_necklace, emit_config, export_cloud, load_config, read_cloud,
                 semi_of, sha256_text, slice_cloud, spun_config, parse_plane)
from .necklace import validate_semi, validate_spun

OK, FAILED, USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE)


def _positive(kind):
    def conv(s):
        v = kind(s)
        if v <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {s}")
        return v
    return conv


def _nonneg_int(s):
    v = int(s)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {s}")
    return v


def build_parser():
    p = _Parser(prog="spunpearls", description="Pearl necklaces around spun knots and their reflection groups.")
    p.add_argument("--manifest", default="run_manifest.json", help="where to write the run manifest")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("validate", help="check a necklace config")
    s.add_argument("--config", required=True)
    s.add_argument("--tol-table", type=_positive(float), default=None)
    s.add_argument("--spun", action="store_true", help="also spin a semi necklace and check the result")

    s = sub.add_parser("spin", help="spin a semi necklace and write the full necklace")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)

    s = sub.add_parser("limitset", help="epsilon-cloud of the limit set")
    s.add_argument("--config", required=True)
    s.add_argument("--epsilon", type=_positive(float), required=True)
    s.add_argument("--depth", type=_nonneg_int, required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--checkpoint", default=None, help="resume from / write to this checkpoint")
    s.add_argument("--max-balls", type=_positive(int), default=2_000_000)
    s.add_argument("--format", choices=("csv", "ply"), default=None)

    s = sub.add_parser("counts", help="ball counts per depth next to the closed forms")
    s.add_argument("--config", required=True)
    s.add_argument("--depth", type=_nonneg_int, required=True)
    s.add_argument("--n", type=int, default=None, help="n for the closed forms (default: pearl count)")
    s.add_argument("--max-balls", type=_positive(int), default=2_000_000)

    s = sub.add_parser("presentation", help="write the group presentation")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)

    s = sub.add_parser("monodromy", help="order of the trefoil monodromy up to inner automorphisms")
    s.add_argument("--radius", type=_nonneg_int, default=8)
    s.add_argument("--max-power", type=_positive(int), default=12)

    s = sub.add_parser("twistor-check", help="equivariance of lifted even words")
    s.add_argument("--config", required=True)
    s.add_argument("--words", type=_positive(int), required=True, help="number of random even words")
    s.add_argument("--samples", type=_positive(int), required=True)
    s.add_argument("--max-length", type=_positive(int), default=6)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--tol", type=_positive(float), default=1e-7)

    s = sub.add_parser("slice", help="keep cloud points near a coordinate hyperplane")
    s.add_argument("--cloud", required=True)
    s.add_argument("--plane", default="w=0")
    s.add_argument("--thickness", type=_positive(float), required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--format", choices=("csv", "ply"), default=None)
    return p


def _validated(cfg):
    sn = build_necklace(cfg)
    rep = validate_spun(sn, cfg.tolerances["tau"])
    return sn, rep


def _fmt_of(path, fmt):
    return fmt or ("ply" if path.endswith(".ply") else "csv")


def cmd_validate(a, man):
    cfg, _ = load_config(a.config)
    code = OK
    if cfg.mode == "semi":
        tol = a.tol_table if a.tol_table is not None else cfg.tolerances["tau_table"]
        rep = validate_semi(semi_of(cfg), tol)
        print(f"{cfg.name}: {len(cfg)} pearls, semi")
        print(rep.summary())
        code = OK if rep.passed else FAILED
        if not a.spun:
            return code
    sn, rep = _validated(cfg)
    print(f"{cfg.name}: {len(sn)} pearls, spun")
    print(rep.summary())
    return code if rep.passed else FAILED


def cmd_spin(a, man):
    cfg, _ = load_config(a.config)
    sn, rep = _validated(cfg)
    print(rep.summary())
    with open(a.out, "w") as fh:
        fh.write(emit_config(spun_config(sn, f"spun from {cfg.name}")))
    man.outputs.append(a.out)
    return OK if rep.passed else FAILED


def _generators(cfg):
    from .orbit import generators_from_necklace

    sn, rep = _validated(cfg)
    if not rep.passed:
        print(rep.summary())
        return None
    return generators_from_necklace(sn)


def cmd_limitset(a, man):
    from .orbit import cloud, grow, load_checkpoint, new_frontier, save_checkpoint

    cfg, _ = load_config(a.config)
    gens = _generators(cfg)
    if gens is None:
        return FAILED
    f = None
    if a.checkpoint and os.path.exists(a.checkpoint):
        f = load_checkpoint(a.checkpoint, gens)
        if f.eps != a.epsilon or f.depth_limit != a.depth:
            print("checkpoint was written with other --epsilon/--depth", file=sys.stderr)
            return USAGE
        print(f"resuming from {a.checkpoint} ({len(f)} balls)")
    else:
        f = new_frontier(gens, a.epsilon, a.depth)
    try:
        grow(gens, a.epsilon, a.depth, a.max_balls, frontier=f)
    except BudgetExceeded as e:
        path = a.checkpoint or "limitset_checkpoint.json"
        save_checkpoint(e.frontier, path)
        man.outputs.append(path)
        print(f"{e}; checkpoint written to {path}", file=sys.stderr)
        return FAILED
    pts = cloud(f)
    print(f"{len(f)} balls, {len(pts)} cloud points, depth limit {a.depth}")
    if not len(pts):
        print("empty cloud (raise --depth or --epsilon)", file=sys.stderr)
        return FAILED
    export_cloud(pts, _fmt_of(a.out, a.format), a.out)
    man.outputs.append(a.out)
    return OK


def cmd_counts(a, man):
    from .orbit import count_report, format_count_report, grow

    cfg, _ = load_config(a.config)
    gens = _generators(cfg)
    if gens is None:
        return FAILED
    # geometric enumeration as deep as the budget allows; the word counts cover the rest
    f = None
    for d in range(a.depth, -1, -1):
        try:
            f = grow(gens, 1e-300, d, a.max_balls)
            break
        except BudgetExceeded:
            continue
    rep = count_report(f, a.n, a.depth)
    print(format_count_report(rep))
    return OK


def cmd_presentation(a, man):
    from .topology import presentation_of

    cfg, _ = load_config(a.config)
    sn, rep = _validated(cfg)
    if not rep.passed:
        print(rep.summary())
        return FAILED
    pres = presentation_of(sn)
    with open(a.out, "w") as fh:
        fh.write(pres.to_text())
    man.outputs.append(a.out)
    print(f"{len(pres.generators)} generators, {len(pres.relators)} relators")
    return OK


def cmd_monodromy(a, man):
    from .topology import conjugacy_search, format_word, homology_matrix, matrix_order, trefoil_monodromy

    phi = trefoil_monodromy()
    print(f"monodromy: {phi}")
    k, w = conjugacy_search(phi, a.max_power, a.radius)
    M = homology_matrix(phi)
    print(f"homology matrix: {M.tolist()}, order {matrix_order(M)}")
    if k is None:
        print(f"Out-order: not found up to power {a.max_power} within radius {a.radius}")
        return FAILED
    print(f"Out-order: {k}, conjugator: {format_word(w)}")
    return OK


def random_even_word(rng, n, max_length):
    L = 2 * int(rng.integers(1, max_length // 2 + 1))
    w = [int(rng.integers(n))]
    while len(w) < L:
        x = int(rng.integers(n))
        if x != w[-1]:
            w.append(x)
    return w


def cmd_twistor(a, man):
    from .twistor import equivariance_check

    if a.max_length < 2:
        print("--max-length must be at least 2", file=sys.stderr)
        return USAGE
    cfg, _ = load_config(a.config)
    gens = _generators(cfg)
    if gens is None:
        return FAILED
    rng = np.random.default_rng(a.seed)
    worst = 0.0
    for _ in range(a.words):
        w = random_even_word(rng, len(gens), a.max_length)
        worst = max(worst, equivariance_check(w, gens, a.samples, rng))
    print(f"{a.words} even words, {a.samples} samples each: max deviation {worst:.3e} (tol {a.tol:g})")
    return OK if worst <= a.tol else FAILED


def cmd_slice(a, man):
    try:
        plane = parse_plane(a.plane)
        pts = read_cloud(a.cloud)
    except (ValueError, OSError) as e:
        print(e, file=sys.stderr)
        return USAGE
    kept = slice_cloud(pts, plane, a.thickness)
    print(f"{len(kept)} of {len(pts)} points within {a.thickness:g} of {a.plane}")
    if not len(kept):
        return FAILED
    export_cloud(kept, _fmt_of(a.out, a.format), a.out)
    man.outputs.append(a.out)
    return OK


COMMANDS = {"validate": cmd_validate, "spin": cmd_spin, "limitset": cmd_limitset, "counts": cmd_counts,
            "presentation": cmd_presentation, "monodromy": cmd_monodromy,
            "twistor-check": cmd_twistor, "slice": cmd_slice}


def _input_hash(a):
    src = getattr(a, "config", None) or getattr(a, "cloud", None)
    if src is None:
        return None
    try:
        if getattr(a, "config", None):
            return sha256_text(load_config(src)[1])
        with open(src, "rb") as fh:
            return sha256_text(fh.read())
    except (ConfigError, OSError):
        return None


def main(argv=None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else OK
    params = {k: v for k, v in vars(a).items() if k not in ("manifest", "command")}
    man = RunManifest(a.command, params, _input_hash(a))
    try:
        code = COMMANDS[a.command](a, man)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        code = USAGE
    except PearlError as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        code = FAILED
    except OSError as e:
        print(f"{e}", file=sys.stderr)
        code = USAGE
    man.finish(code)
    try:
        man.write(a.manifest)
    except OSError as e:
        print(f"could not write manifest: {e}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
