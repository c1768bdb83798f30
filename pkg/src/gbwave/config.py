"""Experiment configuration: flat `key = value` documents.

Grammar: one `key = value` pair per line, `#` starts a comment, lists are
comma separated.  Unknown keys and invariant violations are reported with
the offending key and constraint.  An empty document yields the defaults
c = 1, mu = 0.1, M0 = i, T = 1, d = 1, x0 = 0 (x0 = (-1/4, -1/4) in d = 2)
and the standard mesh ladder h = 0.1, 0.05, 0.01, 0.005, 0.002.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

import numpy as np

from .beam_discrete import DiscreteBeam
from .rays import BeamParams

KINDS = ("table1", "error_vs_h", "snapshot", "ray", "dispersion", "continuous_rates")

H_LADDER = (0.1, 0.05, 0.01, 0.005, 0.002)
K_LADDER = (64.0, 128.0, 256.0, 512.0, 1024.0)


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentSpec:
    kind: str | None = None
    h_list: tuple = H_LADDER
    xi0: tuple | None = None          # per-component; defaults to pi/16
    c: float = 1.0
    im_m0: float = 1.0
    branch: int = +1
    T: float = 1.0
    mu: float = 0.1
    d: int = 1
    x0: tuple | None = None
    seed: int = 0
    threads: int = 1
    bit_exact: bool = False
    diag_every: int = 1
    snapshot_times: tuple = (0.0, 0.5, 1.0)
    k_list: tuple = K_LADDER
    N_list: tuple = (1, 2, 4, 8, 16, 64)
    xi_samples: int = 257

    def resolved_xi0(self) -> tuple:
        if self.xi0 is None:
            return tuple([np.pi / 16.0] * self.d)
        if len(self.xi0) == 1 and self.d > 1:
            return tuple(list(self.xi0) * self.d)
        return self.xi0

    def resolved_x0(self) -> tuple:
        if self.x0 is None:
            return (0.0,) if self.d == 1 else (-0.25, -0.25)
        if len(self.x0) == 1 and self.d > 1:
            return tuple(list(self.x0) * self.d)
        return self.x0

    def beam_params(self) -> BeamParams:
        M0 = 1j * self.im_m0 if self.d == 1 else 1j * self.im_m0 * np.eye(self.d)
        return BeamParams(x0=np.array(self.resolved_x0()),
                          xi0=np.array(self.resolved_xi0()),
                          c=self.c, M0=M0, branch=self.branch)

    def beam(self, h: float) -> DiscreteBeam:
        return DiscreteBeam(params=self.beam_params(), h=h)

    def as_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = list(v)
            out[f.name] = v
        out["xi0"] = list(self.resolved_xi0())
        out["x0"] = list(self.resolved_x0())
        return out


def _parse_bool(key, raw):
    word = raw.strip().lower()
    if word in ("1", "true", "yes", "on"):
        return True
    if word in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"key {key!r}: expected a boolean, got {raw!r}")


def _floats(key, raw):
    try:
        return tuple(float(tok) for tok in raw.split(","))
    except ValueError:
        raise ConfigError(f"key {key!r}: expected comma-separated numbers, got {raw!r}")


def _float(key, raw):
    vals = _floats(key, raw)
    if len(vals) != 1:
        raise ConfigError(f"key {key!r}: expected a single number")
    return vals[0]


def _int(key, raw):
    v = _float(key, raw)
    if v != int(v):
        raise ConfigError(f"key {key!r}: expected an integer")
    return int(v)


def validate_spec(spec: ExperimentSpec) -> ExperimentSpec:
    if spec.kind is not None and spec.kind not in KINDS:
        raise ConfigError(f"kind must be one of {', '.join(KINDS)}")
    if not 0.0 < spec.mu < 1.0:
        raise ConfigError("key 'mu': CFL ratio must lie in (0,1)")
    if any(not 0.0 < h < 1.0 for h in spec.h_list):
        raise ConfigError("key 'h_list': every mesh size must lie in (0,1)")
    if any(b >= a for a, b in zip(spec.h_list, spec.h_list[1:])):
        raise ConfigError("key 'h_list': mesh sizes must be strictly decreasing")
    if spec.d not in (1, 2):
        raise ConfigError("key 'd': dimension must be 1 or 2")
    if spec.xi0 is not None:
        if len(spec.xi0) not in (1, spec.d):
            raise ConfigError("key 'xi0': need one value or one per axis")
        if np.linalg.norm(spec.xi0) == 0.0:
            raise ConfigError("key 'xi0': frequency must be nonzero")
    if spec.x0 is not None and len(spec.x0) not in (1, spec.d):
        raise ConfigError("key 'x0': need one value or one per axis")
    if not spec.im_m0 > 0:
        raise ConfigError("key 'im_m0': Im(M0) must be positive")
    if not spec.c > 0:
        raise ConfigError("key 'c': wave speed must be positive")
    if not spec.T > 0:
        raise ConfigError("key 'T': final time must be positive")
    if spec.branch not in (1, -1):
        raise ConfigError("key 'branch': use + or -")
    if spec.threads < 1:
        raise ConfigError("key 'threads': need at least one worker")
    if spec.diag_every < 1:
        raise ConfigError("key 'diag_every': cadence must be >= 1")
    if any(k < 1 for k in spec.k_list):
        raise ConfigError("key 'k_list': frequencies must be >= 1")
    return spec


def parse_config(text: str) -> ExperimentSpec:
    """Parse the flat key-value grammar into a validated ExperimentSpec."""
    spec = ExperimentSpec()
    updates: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in body.split("=", 1))
        if key == "kind":
            updates["kind"] = raw
        elif key in ("h", "h_list"):
            updates["h_list"] = _floats(key, raw)
        elif key == "xi0":
            updates["xi0"] = _floats(key, raw)
        elif key == "x0":
            updates["x0"] = _floats(key, raw)
        elif key == "c":
            updates["c"] = _float(key, raw)
        elif key == "im_m0":
            updates["im_m0"] = _float(key, raw)
        elif key == "branch":
            if raw in ("+", "+1", "1"):
                updates["branch"] = +1
            elif raw in ("-", "-1"):
                updates["branch"] = -1
            else:
                raise ConfigError("key 'branch': use + or -")
        elif key in ("T", "t_final"):
            updates["T"] = _float(key, raw)
        elif key == "mu":
            updates["mu"] = _float(key, raw)
        elif key == "d":
            updates["d"] = _int(key, raw)
        elif key == "seed":
            updates["seed"] = _int(key, raw)
        elif key == "threads":
            updates["threads"] = _int(key, raw)
        elif key == "bit_exact":
            updates["bit_exact"] = _parse_bool(key, raw)
        elif key == "diag_every":
            updates["diag_every"] = _int(key, raw)
        elif key == "snapshot_times":
            updates["snapshot_times"] = _floats(key, raw)
        elif key == "k_list":
            updates["k_list"] = _floats(key, raw)
        elif key == "N_list":
            updates["N_list"] = tuple(int(v) for v in _floats(key, raw))
        elif key == "xi_samples":
            updates["xi_samples"] = _int(key, raw)
        else:
            raise ConfigError(f"unknown key {key!r} on line {lineno}")
    spec = replace(spec, **updates)
    return validate_spec(spec)
