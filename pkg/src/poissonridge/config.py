"""Run configuration: flat dotted-key text files with validated defaults.

Format, one setting per line::

    # comment
    phantom.kind = inhomogeneous
    transform.angles = 180
    seed = 7

Unknown keys are rejected with the offending line number. The ``preset``
key applies a named bundle first, so later lines can still override
individual fields. POISSONRIDGE_OUTPUT_DIR in the environment overrides
output_dir regardless of the file.
"""

import os
from dataclasses import dataclass, field, replace

from .phantoms import Bar, Disk, PhantomSpec
from .radon import TransformConfig
from .shrinkage import ThresholdPolicy
from .wavelet import WaveletSpec

__all__ = ["ConfigError", "RunConfig", "load_config", "parse_config",
           "DEFAULTS_TABLE"]

_OUTPUT_DIR_ENV = "POISSONRIDGE_OUTPUT_DIR"


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """Everything an experiment needs besides the subcommand itself."""

    phantom: PhantomSpec = field(default_factory=PhantomSpec)
    transform: TransformConfig = field(default_factory=TransformConfig)
    wavelet: WaveletSpec = field(
        default_factory=lambda: WaveletSpec("haar", levels=1, mode="undecimated"))
    policy: ThresholdPolicy = field(default_factory=ThresholdPolicy)
    entry: str = "image"
    samples: int = 1000
    seed: int = 0
    output_dir: str = "out"


DEFAULTS_TABLE = """\
key                           default
phantom.kind                  homogeneous
phantom.size                  64
phantom.background_intensity  0.05
phantom.structure_gain        10.0
phantom.peak_factor           1.0
phantom.structures            disk:0.5,0.5,0.125;bar:0.7,0.15,0.0625,0.3333333333333333
transform.variant             rotation
transform.angles              180
transform.interp              linear
wavelet.filter                haar
wavelet.levels                1
wavelet.mode                  undecimated
policy.selector               sure
policy.grid_points            51
policy.grid_max               5.0
policy.per_band               true
policy.fixed_scale            3.0
entry                         image
samples                       1000
seed                          0
output_dir                    out
"""


def _pet_preset(cfg):
    """Sinogram-domain preset: counts are treated as direct measurements.

    size 128 gives a 185x128 sinogram, an offset sampling density in the
    range of real scanner geometries; the 8-bit peak makes noisy data
    land near 30 dB PSNR.
    """
    return replace(
        cfg,
        phantom=replace(cfg.phantom, kind="synthetic-sinogram", size=128,
                        background_intensity=255.0),
        wavelet=WaveletSpec("haar", levels=3, mode="undecimated"),
        policy=replace(cfg.policy, selector="sure"),
        entry="sinogram",
    )


_PRESETS = {"pet": _pet_preset}


def _parse_bool(text, key, lineno):
    low = text.lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"line {lineno}: {key} expects a boolean, got {text!r}")


def _parse_int(text, key, lineno):
    try:
        return int(text)
    except ValueError:
        raise ConfigError(
            f"line {lineno}: {key} expects an integer, got {text!r}") from None


def _parse_float(text, key, lineno):
    try:
        return float(text)
    except ValueError:
        raise ConfigError(
            f"line {lineno}: {key} expects a number, got {text!r}") from None


def _parse_structures(text, key, lineno):
    shapes = []
    for part in filter(None, (p.strip() for p in text.split(";"))):
        name, _, args = part.partition(":")
        try:
            vals = [float(v) for v in args.split(",")]
        except ValueError:
            vals = None
        if name == "disk" and vals is not None and len(vals) == 3:
            shapes.append(Disk(*vals))
        elif name == "bar" and vals is not None and len(vals) == 4:
            shapes.append(Bar(*vals))
        else:
            raise ConfigError(
                f"line {lineno}: {key} expects disk:cx,cy,r or "
                f"bar:x,y,w,h entries, got {part!r}")
    return tuple(shapes)


def _assign(cfg, key, value, lineno):
    def bad_choice(options):
        return ConfigError(
            f"line {lineno}: {key} must be one of {sorted(options)}, "
            f"got {value!r}")

    if key == "phantom.kind":
        if value not in ("homogeneous", "inhomogeneous", "synthetic-sinogram"):
            raise bad_choice({"homogeneous", "inhomogeneous",
                              "synthetic-sinogram"})
        return replace(cfg, phantom=replace(cfg.phantom, kind=value))
    if key == "phantom.size":
        size = _parse_int(value, key, lineno)
        if size < 1:
            raise ConfigError(f"line {lineno}: phantom.size must be >= 1")
        return replace(cfg, phantom=replace(cfg.phantom, size=size))
    if key == "phantom.background_intensity":
        lam = _parse_float(value, key, lineno)
        if lam < 0:
            raise ConfigError(
                f"line {lineno}: phantom.background_intensity must be >= 0")
        return replace(cfg, phantom=replace(cfg.phantom,
                                            background_intensity=lam))
    if key == "phantom.structure_gain":
        gain = _parse_float(value, key, lineno)
        if gain < 0:
            raise ConfigError(
                f"line {lineno}: phantom.structure_gain must be >= 0")
        return replace(cfg, phantom=replace(cfg.phantom, structure_gain=gain))
    if key == "phantom.peak_factor":
        pf = _parse_float(value, key, lineno)
        if pf <= 0:
            raise ConfigError(
                f"line {lineno}: phantom.peak_factor must be > 0")
        return replace(cfg, phantom=replace(cfg.phantom, peak_factor=pf))
    if key == "phantom.structures":
        shapes = _parse_structures(value, key, lineno)
        return replace(cfg, phantom=replace(cfg.phantom, structures=shapes))
    if key in ("transform.variant", "transform.interp", "transform.angles"):
        kwargs = {
            "variant": cfg.transform.variant,
            "angles": cfg.transform.angles,
            "interp": cfg.transform.interp,
        }
        name = key.split(".", 1)[1]
        kwargs[name] = (_parse_int(value, key, lineno)
                        if name == "angles" else value)
        try:
            return replace(cfg, transform=TransformConfig(**kwargs))
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {key}: {exc}") from None
    if key in ("wavelet.filter", "wavelet.levels", "wavelet.mode"):
        kwargs = {
            "filter": cfg.wavelet.filter,
            "levels": cfg.wavelet.levels,
            "mode": cfg.wavelet.mode,
        }
        name = key.split(".", 1)[1]
        kwargs[name] = (_parse_int(value, key, lineno)
                        if name == "levels" else value)
        try:
            return replace(cfg, wavelet=WaveletSpec(**kwargs))
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {key}: {exc}") from None
    if key in ("policy.selector", "policy.grid_points", "policy.grid_max",
               "policy.per_band", "policy.fixed_scale"):
        kwargs = {
            "selector": cfg.policy.selector,
            "grid_points": cfg.policy.grid_points,
            "grid_max": cfg.policy.grid_max,
            "per_band": cfg.policy.per_band,
            "fixed_scale": cfg.policy.fixed_scale,
        }
        name = key.split(".", 1)[1]
        if name == "grid_points":
            kwargs[name] = _parse_int(value, key, lineno)
        elif name in ("grid_max", "fixed_scale"):
            kwargs[name] = _parse_float(value, key, lineno)
        elif name == "per_band":
            kwargs[name] = _parse_bool(value, key, lineno)
        else:
            kwargs[name] = value
        try:
            return replace(cfg, policy=ThresholdPolicy(**kwargs))
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {key}: {exc}") from None
    if key == "entry":
        if value not in ("image", "sinogram"):
            raise bad_choice({"image", "sinogram"})
        return replace(cfg, entry=value)
    if key == "samples":
        n = _parse_int(value, key, lineno)
        if n < 1:
            raise ConfigError(f"line {lineno}: samples must be >= 1")
        return replace(cfg, samples=n)
    if key == "seed":
        n = _parse_int(value, key, lineno)
        if n < 0:
            raise ConfigError(f"line {lineno}: seed must be >= 0")
        return replace(cfg, seed=n)
    if key == "output_dir":
        return replace(cfg, output_dir=value)
    raise ConfigError(f"line {lineno}: unknown key {key!r}")


def parse_config(text):
    """Parse config text into a RunConfig; see module docstring."""
    cfg = RunConfig()
    entries = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        entries.append((lineno, key, value))

    for lineno, key, value in entries:
        if key == "preset":
            if value not in _PRESETS:
                raise ConfigError(
                    f"line {lineno}: unknown preset {value!r}, "
                    f"known: {sorted(_PRESETS)}")
            cfg = _PRESETS[value](cfg)
    for lineno, key, value in entries:
        if key == "preset":
            continue
        cfg = _assign(cfg, key, value, lineno)

    env_dir = os.environ.get(_OUTPUT_DIR_ENV)
    if env_dir:
        cfg = replace(cfg, output_dir=env_dir)
    return cfg


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)
