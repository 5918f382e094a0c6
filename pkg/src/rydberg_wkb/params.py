"""Model parameter sets, quantum-number channels and the parameter-file loader.

Parameter files are INI-style text::

    [global]   Z, alpha_c, alpha_fs
    [l=0] .. [l=3]   a1, a2, a3, a4, r_c   (the l=3 row serves every l >= 3)
    [cutoffs]  l1, l2, ...   spin-orbit cutoff radius r_so per l
    [scaling]  l0, l2, ...   multiplier applied to a3 per l

All quantities are in scaled units (Bohr radii, Rydberg).
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Mapping

from .errors import ConfigurationError, ParameterError

DATA_ENV_VAR = "RYDBERG_WKB_DATA"
DEFAULT_PARAMS_NAME = "rb87.ini"

# r_so(l) / r_c(l) for the shipped Rb file
SHIPPED_CUTOFF_RATIOS = {1: 0.029483, 2: 0.051262}
_RATIO_RTOL = 1e-4

_ROW_KEYS = ("a1", "a2", "a3", "a4", "r_c")
_GLOBAL_KEYS = ("Z", "alpha_c", "alpha_fs")


@dataclass(frozen=True)
class CoreRow:
    """Fit coefficients of the effective charge for one orbital momentum."""

    a1: float
    a2: float
    a3: float
    a4: float
    r_c: float


@dataclass(frozen=True)
class ModelParams:
    """Immutable parameter set of the model potential.

    ``rows`` holds the file values for l = 0..3. ``a3_scale`` is applied once,
    at construction, to build the effective rows returned by :meth:`row`.
    """

    Z: int
    rows: tuple[CoreRow, ...]
    alpha_c: float
    alpha_fs: float = 1 / 137.036
    r_so: Mapping[int, float] = field(default_factory=dict)
    a3_scale: Mapping[int, float] = field(default_factory=dict)
    _effective: tuple[CoreRow, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.Z < 1:
            raise ParameterError(f"Z must be >= 1, got {self.Z}")
        if len(self.rows) < 1:
            raise ParameterError("at least the l=0 row is required")
        for l, row in enumerate(self.rows):
            if not row.r_c > 0:
                raise ParameterError(f"[l={l}] r_c must be positive, got {row.r_c}")
        if self.alpha_c < 0:
            raise ParameterError(f"alpha_c must be >= 0, got {self.alpha_c}")
        if not 0 <= self.alpha_fs < 1:
            raise ParameterError(f"alpha_fs must lie in [0, 1), got {self.alpha_fs}")
        lo, hi = 1 / self.Z, self.Z ** (-1 / 3)
        for l, r in self.r_so.items():
            if l < 1:
                raise ParameterError(f"[cutoffs] l{l}: spin-orbit cutoff needs l >= 1")
            if not r > 0:
                raise ParameterError(f"[cutoffs] l{l}: r_so must be positive, got {r}")
            # the window is empty for Z = 1 (pure Coulomb overrides)
            if self.Z > 1 and not lo < r < hi:
                raise ParameterError(
                    f"[cutoffs] l{l}: r_so = {r} outside the window ({lo:.6g}, {hi:.6g})"
                )
        object.__setattr__(self, "r_so", dict(self.r_so))
        object.__setattr__(self, "a3_scale", dict(self.a3_scale))
        effective = tuple(
            replace(row, a3=row.a3 * self.a3_scale.get(l, 1.0))
            for l, row in enumerate(self.rows)
        )
        object.__setattr__(self, "_effective", effective)

    def __hash__(self):
        return hash((self.Z, self.rows, self.alpha_c, self.alpha_fs,
                     tuple(sorted(self.r_so.items())), tuple(sorted(self.a3_scale.items()))))

    def row(self, l: int) -> CoreRow:
        """Effective (a3-scaled) coefficients for orbital momentum ``l``."""
        return self._effective[min(l, len(self._effective) - 1)]

    def r_c(self, l: int) -> float:
        return self.row(l).r_c

    def cutoff(self, l: int) -> float:
        try:
            return self.r_so[l]
        except KeyError:
            raise ConfigurationError(
                f"no spin-orbit cutoff r_so defined for l={l}; "
                "disable spin-orbit for this channel or add it to [cutoffs]"
            ) from None

    def with_(self, **changes) -> "ModelParams":
        """Copy with fields replaced (``a3_scale``/``r_so`` merge into existing)."""
        for key in ("a3_scale", "r_so"):
            if key in changes and changes[key] is not None:
                changes[key] = {**getattr(self, key), **changes[key]}
        return replace(self, **changes)

    @classmethod
    def pure_coulomb(cls, alpha_fs: float = 1 / 137.036, r_so=None) -> "ModelParams":
        """Hydrogen override: Z_eff == 1 and no core polarization.

        Spin-orbit (when enabled on a channel) then reduces to 2 alpha^2 g / r^3.
        """
        row = CoreRow(a1=1.0, a2=1.0, a3=0.0, a4=0.0, r_c=1.0)
        if r_so is None:
            r_so = {l: 1e-3 for l in range(1, 11)}
        return cls(Z=1, rows=(row,), alpha_c=0.0, alpha_fs=alpha_fs, r_so=r_so)


@dataclass(frozen=True)
class Channel:
    """Orbital and total angular momentum plus model toggles.

    ``include_so=None`` resolves to True for l = 1, 2 (the only cutoffs the
    model defines) and False otherwise. It is always False for l = 0.
    """

    l: int
    j: float
    include_so: bool | None = None
    langer: bool = True

    def __post_init__(self):
        if self.l < 0 or int(self.l) != self.l:
            raise ConfigurationError(f"l must be a non-negative integer, got {self.l}")
        if abs(abs(self.j - self.l) - 0.5) > 1e-12 or self.j <= 0:
            raise ConfigurationError(f"j={self.j} is not l +- 1/2 for l={self.l}")
        object.__setattr__(self, "j", float(self.j))
        so = self.include_so
        if so is None:
            so = self.l in (1, 2)
        object.__setattr__(self, "include_so", bool(so) and self.l > 0)

    @property
    def label(self) -> str:
        letters = "SPDFGHIK"
        letter = letters[self.l] if self.l < len(letters) else f"[l={self.l}]"
        twice_j = int(round(2 * self.j))
        return f"{letter}{twice_j}/2"


def channels_for(l: int, **kwargs) -> list[Channel]:
    """Both fine-structure channels of ``l`` (just j=1/2 for l=0), lower j first."""
    if l == 0:
        return [Channel(0, 0.5, **kwargs)]
    return [Channel(l, l - 0.5, **kwargs), Channel(l, l + 0.5, **kwargs)]


def default_data_dir() -> Path:
    env = os.environ.get(DATA_ENV_VAR)
    if env:
        return Path(env)
    return Path(str(resources.files("rydberg_wkb") / "data"))


def default_params_path() -> Path:
    return default_data_dir() / DEFAULT_PARAMS_NAME


def _float(section, key: str, where: str) -> float:
    if key not in section:
        raise ParameterError(f"missing key '{key}' in [{where}]")
    raw = section[key]
    try:
        return float(raw)
    except ValueError:
        raise ParameterError(f"key '{key}' in [{where}]: cannot parse {raw!r} as a number") from None


def _per_l_section(cfg, name: str) -> dict[int, float]:
    out = {}
    if not cfg.has_section(name):
        return out
    for key in cfg[name]:
        if not (key.startswith("l") and key[1:].isdigit()):
            raise ParameterError(f"key '{key}' in [{name}]: expected l<integer>")
        out[int(key[1:])] = _float(cfg[name], key, name)
    return out


def parse_params(text: str, source: str = "<string>") -> ModelParams:
    cfg = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cfg.optionxform = str
    try:
        cfg.read_string(text, source=source)
    except configparser.Error as exc:
        raise ParameterError(f"{source}: {exc}") from exc
    if not cfg.has_section("global"):
        raise ParameterError(f"{source}: missing section [global]")
    glob = cfg["global"]
    for key in glob:
        if key not in _GLOBAL_KEYS:
            raise ParameterError(f"unknown key '{key}' in [global]")
    z = _float(glob, "Z", "global")
    if z != int(z):
        raise ParameterError(f"key 'Z' in [global]: must be an integer, got {glob['Z']}")
    rows = []
    for l in range(4):
        name = f"l={l}"
        if not cfg.has_section(name):
            if l == 0:
                raise ParameterError(f"{source}: missing section [l=0]")
            break
        sec = cfg[name]
        for key in sec:
            if key not in _ROW_KEYS:
                raise ParameterError(f"unknown key '{key}' in [{name}]")
        rows.append(CoreRow(*(_float(sec, k, name) for k in _ROW_KEYS)))
    alpha_fs = _float(glob, "alpha_fs", "global") if "alpha_fs" in glob else 1 / 137.036
    return ModelParams(
        Z=int(z),
        rows=tuple(rows),
        alpha_c=_float(glob, "alpha_c", "global"),
        alpha_fs=alpha_fs,
        r_so=_per_l_section(cfg, "cutoffs"),
        a3_scale=_per_l_section(cfg, "scaling"),
    )


def check_shipped_ratios(params: ModelParams) -> None:
    """Cross-check r_c(1), r_c(2) against the tabulated cutoff products."""
    for l, ratio in SHIPPED_CUTOFF_RATIOS.items():
        r_so = params.cutoff(l)
        r_c = params.rows[l].r_c
        if abs(r_so / r_c - ratio) > _RATIO_RTOL * ratio:
            raise ParameterError(
                f"[l={l}] r_c = {r_c} inconsistent with [cutoffs] l{l} = {r_so}: "
                f"ratio {r_so / r_c:.6f}, expected {ratio}"
            )


def load_params(path: str | os.PathLike | None = None) -> ModelParams:
    """Load a parameter file; ``None`` loads the shipped Rb set and validates it."""
    shipped = path is None
    path = Path(path) if path is not None else default_params_path()
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParameterError(f"cannot read parameter file {path}: {exc}") from exc
    params = parse_params(text, source=str(path))
    if shipped:
        check_shipped_ratios(params)
    return params
