"""INI-style run configuration shared by every CLI subcommand."""

import configparser
import io
import math
import re
from dataclasses import dataclass, field, fields, replace

from .errors import InvalidArgumentError
from .kernel import RadarConfig
from .sampler import SceneSpec

__all__ = ["HarnessConfig", "RunConfig", "parse_number", "load_config", "loads_config"]

_PI_FORM = re.compile(r"^\s*([-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?)?\s*\*?\s*pi\s*$")


def parse_number(text):
    """Float from text; ``3pi``, ``3*pi`` and ``pi`` are accepted."""
    if isinstance(text, (int, float)):
        return float(text)
    s = str(text).strip().lower()
    m = _PI_FORM.match(s)
    if m:
        coef = float(m.group(1)) if m.group(1) else 1.0
        return coef * math.pi
    try:
        value = float(s)
    except ValueError:
        raise InvalidArgumentError(f"not a number: {text!r}") from None
    return value


@dataclass(frozen=True)
class HarnessConfig:
    """Ensemble size, seeding, parallelism, output and quadrature settings."""

    n_img: int = 400
    master_seed: int = 0
    threads: int = 1
    output_dir: str = "results"
    quad_tol: float = 1e-6

    def __post_init__(self):
        if int(self.n_img) != self.n_img or self.n_img < 1:
            raise InvalidArgumentError("n_img must be a positive integer")
        if int(self.threads) != self.threads or self.threads < 1:
            raise InvalidArgumentError("threads must be a positive integer")
        if int(self.master_seed) != self.master_seed or self.master_seed < 0:
            raise InvalidArgumentError("master_seed must be a non-negative integer")
        if not (0 < self.quad_tol < 1):
            raise InvalidArgumentError("quad_tol must lie in (0, 1)")
        object.__setattr__(self, "n_img", int(self.n_img))
        object.__setattr__(self, "threads", int(self.threads))
        object.__setattr__(self, "master_seed", int(self.master_seed))


_SECTIONS = {"radar": RadarConfig, "scene": SceneSpec, "run": HarnessConfig}
_INT_FIELDS = {"N", "n_hom", "n_img", "master_seed", "threads"}
_STR_FIELDS = {"output_dir", "true_model"}


def _convert(name, raw):
    if name in _STR_FIELDS:
        return raw.strip()
    value = parse_number(raw)
    if name in _INT_FIELDS:
        if value != int(value):
            raise InvalidArgumentError(f"{name} must be an integer, got {raw!r}")
        return int(value)
    return value


@dataclass(frozen=True)
class RunConfig:
    """Radar, scene and harness settings.

    The scene's ``kappa`` is the aperture parameter used by all
    statistics; the radar block only enters physical-unit outputs
    (kernel slices, scale constants).
    """

    radar: RadarConfig = field(default_factory=RadarConfig)
    scene: SceneSpec = field(default_factory=SceneSpec)
    run: HarnessConfig = field(default_factory=HarnessConfig)

    def override(self, section, **values):
        """Copy with some fields of one section replaced (revalidated)."""
        if section not in _SECTIONS:
            raise InvalidArgumentError(f"unknown section {section!r}")
        known = {f.name for f in fields(_SECTIONS[section])}
        unknown = set(values) - known
        if unknown:
            raise InvalidArgumentError(f"unknown key(s) in [{section}]: {sorted(unknown)}")
        return replace(self, **{section: replace(getattr(self, section), **values)})

    def dumps(self):
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        for name in _SECTIONS:
            block = getattr(self, name)
            parser[name] = {}
            for f in fields(block):
                value = getattr(block, f.name)
                if hasattr(value, "value"):
                    value = value.value
                parser[name][f.name] = repr(value) if isinstance(value, float) else str(value)
        buf = io.StringIO()
        parser.write(buf)
        return buf.getvalue()


def loads_config(text):
    """Parse INI text into a :class:`RunConfig`; unknown sections or keys are errors."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise InvalidArgumentError(f"malformed config: {exc}") from None
    cfg = RunConfig()
    for section in parser.sections():
        if section not in _SECTIONS:
            raise InvalidArgumentError(f"unknown config section [{section}]")
        values = {k: _convert(k, v) for k, v in parser[section].items()}
        cfg = cfg.override(section, **values)
    return cfg


def load_config(path):
    with open(path) as fh:
        return loads_config(fh.read())
