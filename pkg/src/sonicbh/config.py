"""Run configuration: key=value text files with flag overrides.

Every output file embeds the fully resolved configuration, and a config
round-trips through its text form byte-identically (canonical key order,
floats at 17 significant digits).
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path

from .errors import ConfigError
from .flow import VelocityProfile

__all__ = ["RunConfig", "fmt_float"]


def fmt_float(x: float) -> str:
    return f"{x:.17g}"


@dataclass(frozen=True)
class RunConfig:
    # background flow
    a_minus: float = -1.2
    a_plus: float = -0.8
    tau: float = 1.0
    form: str = "smooth-step"
    ode_tol: float = 1e-10
    rho_min: float = 1e-3
    # separatrix search
    bracket_lo: float = 0.3
    bracket_hi: float = 3.0
    sep_tol: float = 1e-12
    x0_horizon_max: float = 10.0
    # packet
    alpha: float = 1.0
    eps: float = 0.25
    a: float = 8.0
    a_sweep: tuple[float, ...] = (4.0, 8.0, 16.0, 32.0, 64.0)
    # spectrum grid
    n_eta: int = 96
    # wave solver
    nrho: int = 2048
    dt: float = 0.0  # 0 = derive from the CFL bound
    tfinal: float = 0.75
    eta_list: tuple[float, ...] = (-2.0, -6.0, -18.0)
    order: int = 2
    grid_rho_min: float = 0.3
    grid_rho_max: float = 9.0
    # output
    out_dir: str = "out"

    def __post_init__(self) -> None:
        for name in ("ode_tol", "rho_min", "sep_tol", "tau"):
            if getattr(self, name) <= 0.0:
                raise ConfigError(f"{name} must be positive")
        if list(self.a_sweep) != sorted(set(self.a_sweep)):
            raise ConfigError("a_sweep must be strictly increasing")
        if self.form not in ("constant", "smooth-step"):
            raise ConfigError(f"unknown profile form {self.form!r}")
        if self.order not in (2, 4):
            raise ConfigError("order must be 2 or 4")

    # -- construction -------------------------------------------------------

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        known = {f.name: f for f in fields(cls)}
        values = {}
        for ln, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {ln}: expected key=value, got {raw!r}")
            key, _, val = line.partition("=")
            key, val = key.strip(), val.strip()
            if key not in known:
                raise ConfigError(f"line {ln}: unknown key {key!r}")
            values[key] = _parse(known[key].type, key, val)
        try:
            return cls(**values)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_text(text)

    def with_overrides(self, pairs) -> "RunConfig":
        known = {f.name: f for f in fields(self)}
        updates = {}
        for item in pairs:
            if "=" not in item:
                raise ConfigError(f"override {item!r} is not key=value")
            key, _, val = item.partition("=")
            key = key.strip()
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            updates[key] = _parse(known[key].type, key, val.strip())
        return replace(self, **updates)

    # -- serialisation -------------------------------------------------------

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                s = ",".join(fmt_float(x) for x in v)
            elif isinstance(v, float):
                s = fmt_float(v)
            else:
                s = str(v)
            lines.append(f"{f.name} = {s}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return out

    # -- derived objects ------------------------------------------------------

    def profile(self) -> VelocityProfile:
        return VelocityProfile(a_minus=self.a_minus, a_plus=self.a_plus,
                               tau=self.tau, form=self.form)


def _parse(ftype: str, key: str, val: str):
    try:
        if "tuple" in ftype:
            return tuple(float(x) for x in val.split(",") if x.strip())
        if ftype == "int":
            return int(val)
        if ftype == "float":
            return float(val)
        return val
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {val!r}") from exc
