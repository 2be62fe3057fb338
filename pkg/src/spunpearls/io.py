"""Necklace configs, point-cloud export and run manifests."""
from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import __version__
from .errors import ConfigError
from .inversive import PairType, sphere_from_center_radius
from .necklace import SemiNecklace, SpunNecklace, PearlLabel, spin_necklace

CONFIG_FORMAT = "spunpearls-necklace"
CONFIG_VERSION = 1
MANIFEST_FORMAT = "spunpearls-manifest"
PLY_COMMENT = "spunpearls cloud v1"
BUNDLED = ("trefoil85", "toy-ring", "domino")
_KINDS = {"orthogonal": PairType.ORTHOGONAL, "tangent": PairType.TANGENT}


@dataclass
class NecklaceConfig:
    name: str
    mode: str                     # "semi" or "spun"
    centers: np.ndarray           # (n, 4)
    radii: np.ndarray
    labels: list
    tolerances: dict = field(default_factory=lambda: {"tau": 1e-6, "tau_table": 1e-3})
    provenance: str = ""
    poles: object = True          # True, False or a pair of points
    rectify: bool = True
    junctions: bool = True
    adjacency: list = field(default_factory=list)   # spun mode: (i, j, kind)
    checksum: str | None = None

    def __len__(self):
        return len(self.radii)


def _fail(msg):
    raise ConfigError(msg)


def _reals(x, where, sizes):
    if not isinstance(x, list) or len(x) not in sizes:
        _fail(f"{where}: expected a list of {' or '.join(map(str, sizes))} numbers, got {x!r}")
    for v in x:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not np.isfinite(v):
            _fail(f"{where}: not a finite number: {v!r}")
    return [float(v) for v in x]


def parse_config(document) -> NecklaceConfig:
    """Parse and check a JSON necklace config (text or already-loaded dict)."""
    if isinstance(document, (str, bytes)):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as e:
            raise ConfigError(f"line {e.lineno}, column {e.colno}: {e.msg}") from None
    else:
        doc = document
    if not isinstance(doc, dict):
        _fail("top level: expected an object")
    if doc.get("format", CONFIG_FORMAT) != CONFIG_FORMAT:
        _fail(f"format: expected {CONFIG_FORMAT!r}")
    if doc.get("version", CONFIG_VERSION) != CONFIG_VERSION:
        _fail(f"version: unsupported {doc.get('version')!r}")
    mode = doc.get("mode", "semi")
    if mode not in ("semi", "spun"):
        _fail(f"mode: expected 'semi' or 'spun', got {mode!r}")
    pearls = doc.get("pearls")
    if not isinstance(pearls, list) or not pearls:
        _fail("pearls: expected a nonempty list")
    centers, radii, labels = [], [], []
    sizes = (3, 4) if mode == "semi" else (4,)
    for k, p in enumerate(pearls):
        where = f"pearls[{k}]"
        if not isinstance(p, dict):
            _fail(f"{where}: expected an object with center and radius")
        for key in ("center", "radius"):
            if key not in p:
                _fail(f"{where}: missing field {key!r}")
        c = _reals(p["center"], f"{where}.center", sizes)
        (r,) = _reals([p["radius"]], f"{where}.radius", (1,))
        if r <= 0:
            _fail(f"{where}.radius: must be positive, got {r!r}")
        if mode == "semi" and len(c) == 4 and c[3] != 0:
            _fail(f"{where}.center: a semi necklace lives in x4 = 0, got x4 = {c[3]!r}")
        centers.append(c + [0.0] * (4 - len(c)))
        radii.append(r)
        labels.append(str(p.get("label", f"S{k + 1}")))
    tol = {"tau": 1e-6, "tau_table": 1e-3}
    given = doc.get("tolerances", {})
    if not isinstance(given, dict):
        _fail("tolerances: expected an object")
    for key, v in given.items():
        if key not in tol:
            _fail(f"tolerances.{key}: unknown tolerance")
        (tol[key],) = _reals([v], f"tolerances.{key}", (1,))
        if tol[key] <= 0:
            _fail(f"tolerances.{key}: must be positive")
    poles = doc.get("poles", True)
    if isinstance(poles, list):
        if len(poles) != 2:
            _fail("poles: expected two points")
        poles = tuple(_reals(q, f"poles[{k}]", (3, 4)) for k, q in enumerate(poles))
    elif not isinstance(poles, bool):
        _fail("poles: expected true, false or two points")
    adjacency = []
    if mode == "spun":
        adj = doc.get("adjacency")
        if not isinstance(adj, list):
            _fail("adjacency: a spun config needs a list of [i, j, kind]")
        for k, e in enumerate(adj):
            if (not isinstance(e, list) or len(e) != 3 or e[2] not in _KINDS
                    or not all(isinstance(v, int) and 0 <= v < len(pearls) for v in e[:2]) or e[0] == e[1]):
                _fail(f"adjacency[{k}]: expected [i, j, 'orthogonal'|'tangent'] with distinct pearl indices")
            adjacency.append((min(e[:2]), max(e[:2]), e[2]))
    for key in ("rectify", "junctions"):
        if not isinstance(doc.get(key, True), bool):
            _fail(f"{key}: expected true or false")
    return NecklaceConfig(str(doc.get("name", "")), mode, np.array(centers), np.array(radii), labels,
                          tol, str(doc.get("provenance", "")), poles, doc.get("rectify", True),
                          doc.get("junctions", True), sorted(adjacency), doc.get("checksum"))


def _num(x):
    x = float(x)
    return int(x) if x == int(x) and abs(x) < 1e15 else x


def config_to_dict(cfg: NecklaceConfig) -> dict:
    doc = {"format": CONFIG_FORMAT, "version": CONFIG_VERSION, "name": cfg.name, "mode": cfg.mode,
           "provenance": cfg.provenance, "tolerances": dict(cfg.tolerances)}
    if cfg.checksum:
        doc["checksum"] = cfg.checksum
    if cfg.mode == "semi":
        doc["poles"] = cfg.poles if isinstance(cfg.poles, bool) else [[_num(v) for v in q] for q in cfg.poles]
        doc["rectify"] = cfg.rectify
        doc["junctions"] = cfg.junctions
    doc["pearls"] = [{"label": lab, "center": [_num(v) for v in c], "radius": _num(r)}
                     for lab, c, r in zip(cfg.labels, cfg.centers, cfg.radii)]
    if cfg.mode == "spun":
        doc["adjacency"] = [[i, j, k] for i, j, k in cfg.adjacency]
    return doc


def emit_config(cfg: NecklaceConfig) -> str:
    """Canonical text: one pearl (and one adjacency entry) per line."""
    doc = config_to_dict(cfg)
    pearls = doc.pop("pearls")
    adj = doc.pop("adjacency", None)
    head = json.dumps(doc, indent=2)[:-2]
    lines = [head + ",", '  "pearls": [']
    lines += ["    " + json.dumps(p) + ("," if k < len(pearls) - 1 else "") for k, p in enumerate(pearls)]
    if adj is None:
        lines.append("  ]")
    else:
        lines += ["  ],", '  "adjacency": [']
        lines += ["    " + json.dumps(e) + ("," if k < len(adj) - 1 else "") for k, e in enumerate(adj)]
        lines.append("  ]")
    lines.append("}")
    return "\n".join(lines) + "\n"


def normalize_config(text) -> str:
    return emit_config(parse_config(text))


def bundled_config_text(name: str) -> str:
    fname = {"trefoil85": "trefoil85.json", "toy-ring": "toy_ring.json", "domino": "domino.json"}[name]
    return resources.files("spunpearls").joinpath("data/" + fname).read_text()


def load_config(path_or_name) -> tuple[NecklaceConfig, str]:
    """Config and the text it came from.  Bundled names are accepted in place of paths."""
    p = str(path_or_name)
    base = os.path.basename(p)
    stem = base[:-5] if base.endswith(".json") else base
    if not os.path.exists(p) and stem.replace("_", "-") in BUNDLED:
        text = bundled_config_text(stem.replace("_", "-"))
    else:
        try:
            with open(p) as fh:
                text = fh.read()
        except OSError as e:
            raise ConfigError(f"{p}: {e.strerror}") from None
    return parse_config(text), text


def semi_of(cfg: NecklaceConfig) -> SemiNecklace:
    if cfg.mode != "semi":
        raise ConfigError("mode: expected a semi necklace")
    return SemiNecklace(cfg.centers, cfg.radii, cfg.name, tuple(cfg.labels))


def build_necklace(cfg: NecklaceConfig) -> SpunNecklace:
    """Spin a semi config, or assemble a spun one as given (not yet validated)."""
    if cfg.mode == "semi":
        return spin_necklace(semi_of(cfg), rectify=cfg.rectify, poles=cfg.poles,
                             junctions=cfg.junctions, tau_table=cfg.tolerances["tau_table"])
    spheres = [sphere_from_center_radius(c, r) for c, r in zip(cfg.centers, cfg.radii)]
    adj = {(i, j): _KINDS[k] for i, j, k in cfg.adjacency}
    return SpunNecklace(spheres, [_parse_label(s) for s in cfg.labels], adj, cfg.name)


def _parse_label(s):
    """Inverse of str(PearlLabel); other names become plain meridian labels."""
    if s.startswith("pole") and s[4:].isdigit():
        return PearlLabel("pole", int(s[4:]))
    if len(s) > 4 and s[0] in "SP" and s[1] == "[" and s[-1] == "]":
        k, i = s[2:-1].split(",")
        return PearlLabel("meridian" if s[0] == "S" else "junction", int(k), int(i))
    return PearlLabel("meridian")


def spun_config(sn: SpunNecklace, provenance="") -> NecklaceConfig:
    kinds = {v: k for k, v in _KINDS.items()}
    adj = sorted((i, j, kinds[t]) for (i, j), t in sn.adjacency.items())
    return NecklaceConfig(sn.name, "spun", sn.centers, sn.radii, [str(lab) for lab in sn.labels],
                          provenance=provenance, adjacency=adj)


# ---------------------------------------------------------------- clouds

def _fmt(v):
    return "%.12g" % v


def export_cloud(points, fmt, path, axes=(0, 1, 2)):
    """Write a cloud as CSV (x1..x4) or ASCII PLY (three axes as x, y, z; the fourth as w)."""
    P = np.asarray(points, float).reshape(-1, 4)
    if not len(P):
        raise ValueError("cannot export an empty cloud")
    if fmt == "csv":
        lines = ["x1,x2,x3,x4"] + [",".join(_fmt(v) for v in p) for p in P]
    elif fmt == "ply":
        rest = [k for k in range(4) if k not in axes][0]
        lines = ["ply", "format ascii 1.0", f"comment {PLY_COMMENT}",
                 f"comment axes x{axes[0] + 1} x{axes[1] + 1} x{axes[2] + 1} w=x{rest + 1}",
                 f"element vertex {len(P)}", "property double x", "property double y",
                 "property double z", "property double w", "end_header"]
        lines += [" ".join(_fmt(v) for v in (p[axes[0]], p[axes[1]], p[axes[2]], p[rest])) for p in P]
    else:
        raise ValueError(f"unknown format {fmt!r}")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def read_cloud(path) -> np.ndarray:
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "x1,x2,x3,x4":
            raise ValueError(f"{path}: expected the header x1,x2,x3,x4")
        rows = [ln for ln in fh.read().splitlines() if ln.strip()]
    if not rows:
        return np.zeros((0, 4))
    return np.array([[float(v) for v in ln.split(",")] for ln in rows])


def parse_plane(spec: str):
    """'w=0' or 'x3=1.5' -> (axis, offset); w names x4."""
    try:
        lhs, rhs = spec.replace(" ", "").split("=")
        axis = 3 if lhs == "w" else int(lhs.lstrip("x")) - 1
        if not 0 <= axis < 4:
            raise ValueError
        return axis, float(rhs)
    except ValueError:
        raise ValueError(f"plane must look like w=0 or x1=0.5, got {spec!r}") from None


def slice_cloud(points, plane="w=0", thickness=1e-2) -> np.ndarray:
    axis, off = parse_plane(plane) if isinstance(plane, str) else plane
    P = np.asarray(points, float).reshape(-1, 4)
    return P[np.abs(P[:, axis] - off) < thickness]


# ---------------------------------------------------------------- manifests

def sha256_text(text) -> str:
    data = text.encode() if isinstance(text, str) else text
    return "sha256:" + hashlib.sha256(data).hexdigest()


def sha256_file(path) -> str:
    with open(path, "rb") as fh:
        return sha256_text(fh.read())


@dataclass
class RunManifest:
    command: str
    parameters: dict
    input_hash: str | None = None
    version: str = __version__
    started: float = field(default_factory=time.time)
    seconds: float = 0.0
    outputs: list = field(default_factory=list)
    exit_code: int = 0

    def finish(self, code):
        self.exit_code = int(code)
        self.seconds = time.time() - self.started
        return self

    def key(self) -> str:
        """Hash of what determines the outputs (command, parameters, input, version)."""
        return sha256_text(json.dumps([self.command, self.parameters, self.input_hash, self.version],
                                      sort_keys=True, default=str))

    def to_dict(self):
        return {"format": MANIFEST_FORMAT, "version": 1, "command": self.command,
                "parameters": self.parameters, "input_hash": self.input_hash,
                "artifact_version": self.version, "key": self.key(),
                "timing": {"started": self.started, "seconds": self.seconds},
                "outputs": [{"path": p, "sha256": sha256_file(p)} for p in self.outputs if os.path.exists(p)],
                "exit_code": self.exit_code}

    def write(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, default=str)
            fh.write("\n")
