"""Run configuration: a flat ``key = value`` file with dotted keys.

Keys may be written flat (``potential.kind = square_well``), under INI-style
section headers (``[potential]`` then ``kind = square_well``), or as an inline
block (``potential = { kind = square_well, v0 = 2, R = 1 }``). Lines starting
with ``#`` or ``;`` are comments.
"""
from __future__ import annotations

import configparser
import os
from dataclasses import dataclass

from .errors import ContractError
from .free_energy import GasParameters
from .scattering import PotentialSpec

_ROOT = "__root__"

KNOWN_KEYS = {
    "N", "L", "kappa", "beta", "ell", "out", "seed",
    "potential.kind", "potential.v0", "potential.R", "potential.file",
    "exponents.delta_B", "exponents.delta_L", "exponents.delta_H",
    "tol.sum_tail", "tol.root_residual", "tol.quadrature",
}


class ConfigError(ContractError):
    """Invalid or incomplete run configuration."""


@dataclass(frozen=True)
class RunConfig:
    N: float
    L: float
    kappa: float | None
    beta: float | None
    potential: PotentialSpec
    ell: float
    delta_B: float = 1.0 / 12.0
    delta_L: float = 1.0 / 12.0
    delta_H: float = 5.0 / 12.0
    sum_tail: float = 1e-10
    root_residual: float = 1e-10
    quadrature: float = 1e-11
    out: str | None = None
    seed: int = 12345

    def params(self, kappa: float | None = None) -> GasParameters:
        """Gas parameters, optionally overriding the temperature by ``kappa``."""
        if kappa is not None:
            k, b = kappa, None
        else:
            k, b = self.kappa, self.beta
        return GasParameters(
            N=self.N, L=self.L, beta=b, kappa=k, potential=self.potential, ell=self.ell,
            delta_B=self.delta_B, delta_L=self.delta_L, delta_H=self.delta_H,
        )


def _read_pairs(text: str) -> dict[str, str]:
    parser = configparser.ConfigParser(
        interpolation=None, comment_prefixes=("#", ";"), inline_comment_prefixes=("#",), strict=True
    )
    parser.optionxform = str
    try:
        parser.read_string(f"[{_ROOT}]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from None
    flat: dict[str, str] = {}
    for section in parser.sections():
        for key, value in parser.items(section):
            name = key if section == _ROOT else f"{section}.{key}"
            value = value.strip()
            if value.startswith("{") and value.endswith("}"):
                for item in value[1:-1].split(","):
                    if not item.strip():
                        continue
                    sub, sep, sub_value = item.partition("=") if "=" in item else item.partition(":")
                    if not sep:
                        raise ConfigError(f"malformed entry {item.strip()!r} in block {name!r}")
                    flat[f"{name}.{sub.strip()}"] = sub_value.strip()
            else:
                flat[name] = value
    return flat


def _number(flat, key, default=None, kind=float):
    if key not in flat:
        if default is None:
            return None
        return default
    try:
        return kind(flat[key])
    except ValueError:
        raise ConfigError(f"key {key!r}: cannot read {flat[key]!r} as a number") from None


def _potential(flat, base_dir) -> PotentialSpec:
    if "potential.kind" not in flat:
        raise ConfigError("missing required key 'potential.kind' (square_well, zero or file)")
    kind = flat["potential.kind"]
    if kind == "square_well":
        for key in ("potential.v0", "potential.R"):
            if key not in flat:
                raise ConfigError(f"missing required key {key!r} for a square_well potential")
        return PotentialSpec.square_well(_number(flat, "potential.v0"), _number(flat, "potential.R"))
    if kind == "zero":
        return PotentialSpec.zero()
    if kind in ("file", "tabulated"):
        if "potential.file" not in flat:
            raise ConfigError("missing required key 'potential.file' for a tabulated potential")
        path = flat["potential.file"]
        if base_dir and not os.path.isabs(path):
            path = os.path.join(base_dir, path)
        if not os.path.exists(path):
            raise ConfigError(f"potential file {path!r} does not exist")
        return PotentialSpec.from_file(path)
    raise ConfigError(f"unknown potential.kind {kind!r}; use square_well, zero or file")


def parse_config(text: str, base_dir: str | None = None) -> RunConfig:
    """Validate a configuration given as text."""
    flat = _read_pairs(text)
    unknown = sorted(set(flat) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    if "N" not in flat:
        raise ConfigError("missing required key 'N'")
    N = _number(flat, "N")
    L = _number(flat, "L", 1.0)
    kappa = _number(flat, "kappa")
    beta = _number(flat, "beta")
    if (kappa is None) == (beta is None):
        raise ConfigError("give exactly one of 'kappa' and 'beta'")
    if not N >= 1:
        raise ConfigError(f"'N' must be at least 1, got {N}")
    if not L > 0:
        raise ConfigError(f"'L' must be positive, got {L}")
    for key, value in (("kappa", kappa), ("beta", beta)):
        if value is not None and not value > 0:
            raise ConfigError(f"{key!r} must be positive, got {value}")
    ell = _number(flat, "ell", L / 4.0)
    if not 0 < ell < L / 2:
        raise ConfigError(f"'ell' must lie in (0, L/2) = (0, {L / 2}), got {ell}")
    tols = {}
    for name, default in (("sum_tail", 1e-10), ("root_residual", 1e-10), ("quadrature", 1e-11)):
        tols[name] = _number(flat, f"tol.{name}", default)
        if not tols[name] > 0:
            raise ConfigError(f"'tol.{name}' must be positive, got {tols[name]}")
    exps = {}
    for name, default in (("delta_B", 1.0 / 12.0), ("delta_L", 1.0 / 12.0), ("delta_H", 5.0 / 12.0)):
        exps[name] = _number(flat, f"exponents.{name}", default)
    potential = _potential(flat, base_dir)
    if potential.support / N >= ell:
        raise ConfigError(f"scaled potential range {potential.support / N} does not fit inside ell={ell}")
    cfg = RunConfig(
        N=N, L=L, kappa=kappa, beta=beta, potential=potential, ell=ell,
        **exps, **tols, out=flat.get("out"), seed=_number(flat, "seed", 12345, int),
    )
    try:
        cfg.params().sets
    except ContractError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def load_config(path: str) -> RunConfig:
    """Read and validate a configuration file."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc.strerror}") from None
    return parse_config(text, base_dir=os.path.dirname(os.path.abspath(path)))
