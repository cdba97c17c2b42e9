"""Paired orbital / in-situ scenes on a sampling grid.

A scene couples a low-resolution orbital image with the high-resolution image
that stands in for in-situ measurements. The rover moves on a grid whose
cells map onto orbital pixels (``grid_stride`` pixels apart); an in-situ
reading at a cell is the mean high-resolution spectrum under that orbital
pixel plus Gaussian sensor noise.
"""

import dataclasses
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any

import numpy as np
from scipy.ndimage import uniform_filter

from .errors import ConfigInvalid, DimensionMismatch, NonFinite, OutOfBounds, ParseError
from .raster import read_raster, write_raster
from .streams import make_rng

GridCell = tuple[int, int]

ORBITAL_FILE = "orbital.sser"
INSITU_FILE = "insitu.sser"
META_FILE = "scene.json"


@dataclass(frozen=True)
class SceneConfig:
    """Synthetic-scene and scene-geometry settings.

    ``noise_sigma`` is the in-situ sensor noise; ``image_noise`` is optional
    noise baked into the high-resolution image at generation time.
    ``patch`` is the side (in high-resolution pixels) of the blocks that
    share one Dirichlet abundance draw before blurring.
    """

    K: int = 5
    bands: int = 24
    highres_w: int = 128
    highres_h: int = 128
    downsample: int = 4
    noise_sigma: float = 0.01
    blur_radius: int = 4
    seed: int = 0
    image_noise: float = 0.0
    dirichlet_alpha: float = 0.3
    patch: int = 16
    grid_stride: int = 1
    step_cost: float = 10.0
    point_sampling: bool = False
    name: str = "synthetic"

    def validate(self) -> "SceneConfig":
        bad = []
        if self.K < 1:
            bad.append("K must be >= 1")
        if self.bands < 2:
            bad.append("bands must be >= 2")
        if self.downsample < 1:
            bad.append("downsample must be >= 1")
        if self.highres_w < 1 or self.highres_h < 1:
            bad.append("highres_w/highres_h must be >= 1")
        elif self.downsample >= 1 and (self.highres_w % self.downsample or self.highres_h % self.downsample):
            bad.append(
                f"downsample={self.downsample} must divide highres_w={self.highres_w} "
                f"and highres_h={self.highres_h}"
            )
        if self.noise_sigma < 0 or self.image_noise < 0:
            bad.append("noise_sigma and image_noise must be >= 0")
        if self.blur_radius < 0:
            bad.append("blur_radius must be >= 0")
        if self.dirichlet_alpha <= 0:
            bad.append("dirichlet_alpha must be > 0")
        if self.patch < 1:
            bad.append("patch must be >= 1")
        if self.grid_stride < 1:
            bad.append("grid_stride must be >= 1")
        if self.step_cost <= 0:
            bad.append("step_cost must be > 0")
        if bad:
            raise ConfigInvalid("invalid scene config: " + "; ".join(bad))
        return self

    @classmethod
    def from_mapping(cls, values: dict[str, Any]) -> "SceneConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        extra = set(values) - known
        if extra:
            raise ConfigInvalid(f"unknown scene keys: {sorted(extra)}")
        try:
            cfg = cls(**values)
        except TypeError as exc:
            raise ConfigInvalid(str(exc)) from None
        return cfg.validate()

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


@dataclass(frozen=True, eq=False)
class OrbitalImage:
    """Low-resolution image, ``data`` shaped ``(height, width, bands)``."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[0] * arr.shape[1] < 1 or arr.shape[2] < 1:
            raise DimensionMismatch(f"orbital image must be (height, width, bands), got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise NonFinite("orbital image contains NaN or Inf")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def bands(self) -> int:
        return self.data.shape[2]

    def pixels(self) -> np.ndarray:
        return self.data.reshape(-1, self.bands)

    def __eq__(self, other):
        return isinstance(other, OrbitalImage) and np.array_equal(self.data, other.data)


@dataclass(frozen=True)
class GridMap:
    """Eight-connected sampling grid over an orbital image."""

    rows: int
    cols: int
    stride: int = 1
    step_cost: float = 10.0

    @classmethod
    def for_image(cls, image: OrbitalImage, stride: int = 1, step_cost: float = 10.0) -> "GridMap":
        return cls((image.height - 1) // stride + 1, (image.width - 1) // stride + 1, stride, step_cost)

    def in_bounds(self, cell: GridCell) -> bool:
        r, c = cell
        return 0 <= r < self.rows and 0 <= c < self.cols

    def check(self, cell: GridCell) -> GridCell:
        if not self.in_bounds(cell):
            raise OutOfBounds(f"cell {tuple(cell)} outside {self.rows}x{self.cols} grid")
        return (int(cell[0]), int(cell[1]))

    def pixel_of(self, cell: GridCell) -> tuple[int, int]:
        r, c = self.check(cell)
        return r * self.stride, c * self.stride

    def index(self, cell: GridCell) -> int:
        return cell[0] * self.cols + cell[1]

    def cell_at(self, index: int) -> GridCell:
        return divmod(int(index), self.cols)

    @property
    def size(self) -> int:
        return self.rows * self.cols

    def cells(self) -> list[GridCell]:
        return [(r, c) for r in range(self.rows) for c in range(self.cols)]

    def distance(self, a: GridCell, b: GridCell) -> int:
        """Number of eight-connected moves between two cells."""
        return max(abs(a[0] - b[0]), abs(a[1] - b[1]))


@dataclass(frozen=True, eq=False)
class InSituOracle:
    """Ground truth for in-situ readings, built from the high-resolution image."""

    highres: np.ndarray
    downsample: int
    grid: GridMap
    noise_sigma: float = 0.0
    point_sampling: bool = False

    def __post_init__(self):
        arr = np.asarray(self.highres, dtype=np.float64)
        if arr.ndim != 3:
            raise DimensionMismatch(f"high-resolution image must be 3-D, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise NonFinite("high-resolution image contains NaN or Inf")
        if self.noise_sigma < 0:
            raise ConfigInvalid("noise_sigma must be >= 0")
        arr.flags.writeable = False
        object.__setattr__(self, "highres", arr)

    @cached_property
    def truth(self) -> np.ndarray:
        """Noiseless in-situ spectrum per grid cell, ``(rows, cols, bands)``."""
        s, g = self.downsample, self.grid
        h, w, d = self.highres.shape
        if self.point_sampling:
            blocks = self.highres[s // 2::s, s // 2::s]
        else:
            blocks = self.highres.reshape(h // s, s, w // s, s, d).mean(axis=(1, 3))
        out = blocks[:: g.stride, :: g.stride]
        out.flags.writeable = False
        return out

    @property
    def bands(self) -> int:
        return self.highres.shape[2]

    def spectrum(self, cell: GridCell) -> np.ndarray:
        r, c = self.grid.check(cell)
        return self.truth[r, c]

    def __eq__(self, other):
        return (
            isinstance(other, InSituOracle)
            and np.array_equal(self.highres, other.highres)
            and (self.downsample, self.grid, self.noise_sigma, self.point_sampling)
            == (other.downsample, other.grid, other.noise_sigma, other.point_sampling)
        )


def sample_in_situ(oracle: InSituOracle, location: GridCell, rng: np.random.Generator) -> np.ndarray:
    """Noisy in-situ reading at a grid cell, clipped at zero."""
    f = oracle.spectrum(location)
    if oracle.noise_sigma == 0:
        return f.copy()
    return np.maximum(f + rng.normal(0.0, oracle.noise_sigma, size=f.shape), 0.0)


@dataclass(frozen=True, eq=False)
class SceneryPair:
    orbital: OrbitalImage
    oracle: InSituOracle
    grid: GridMap
    metadata: dict = field(default_factory=dict)
    # generator ground truth (endmembers, abundances); not part of equality
    truth: dict | None = None

    def __post_init__(self):
        if self.orbital.bands != self.oracle.bands:
            raise DimensionMismatch(
                f"orbital image has {self.orbital.bands} bands, in-situ image has {self.oracle.bands}"
            )

    @property
    def bands(self) -> int:
        return self.orbital.bands

    @cached_property
    def remote(self) -> np.ndarray:
        """Orbital spectrum under each grid cell, ``(rows * cols, bands)`` in cell-index order."""
        s = self.grid.stride
        out = np.ascontiguousarray(self.orbital.data[::s, ::s].reshape(-1, self.bands))
        out.flags.writeable = False
        return out

    def remote_spectrum(self, cell: GridCell) -> np.ndarray:
        return self.remote[self.grid.index(self.grid.check(cell))]

    def __eq__(self, other):
        return (
            isinstance(other, SceneryPair)
            and self.orbital == other.orbital
            and self.oracle == other.oracle
            and self.grid == other.grid
            and self.metadata == other.metadata
        )


def _endmembers(K, bands, rng):
    t = np.linspace(0.0, 1.0, bands)
    out = np.empty((K, bands))
    for k in range(K):
        level = rng.uniform(0.3, 0.8)
        slope = rng.uniform(-0.25, 0.25)
        spec = level + slope * (t - 0.5)
        absorb = np.zeros(bands)
        for _ in range(int(rng.integers(1, 4))):
            depth = rng.uniform(0.15, 0.6)
            center = rng.uniform(0.05, 0.95)
            width = rng.uniform(0.03, 0.15)
            absorb += depth * np.exp(-0.5 * ((t - center) / width) ** 2)
        out[k] = np.clip(spec * (1.0 - np.minimum(absorb, 0.95)), 0.01, 1.0)
    return out


def _abundances(cfg: SceneConfig, rng):
    H, W, K = cfg.highres_h, cfg.highres_w, cfg.K
    ph, pw = -(-H // cfg.patch), -(-W // cfg.patch)
    coarse = rng.dirichlet(np.full(K, cfg.dirichlet_alpha), size=(ph, pw))
    field_ = np.repeat(np.repeat(coarse, cfg.patch, axis=0), cfg.patch, axis=1)[:H, :W]
    if cfg.blur_radius > 0:
        field_ = uniform_filter(field_, size=(2 * cfg.blur_radius + 1,) * 2 + (1,), mode="nearest")
    field_ = np.maximum(field_, 0.0)
    return field_ / field_.sum(axis=2, keepdims=True)


def block_mean(image: np.ndarray, factor: int) -> np.ndarray:
    h, w, d = image.shape
    return image.reshape(h // factor, factor, w // factor, factor, d).mean(axis=(1, 3))


def _assemble(orbital, highres, cfg: SceneConfig, metadata, truth=None) -> SceneryPair:
    image = OrbitalImage(orbital)
    if highres.shape[2] != image.bands:
        raise DimensionMismatch(f"orbital image has {image.bands} bands, in-situ image has {highres.shape[2]}")
    if highres.shape[:2] != (image.height * cfg.downsample, image.width * cfg.downsample):
        raise DimensionMismatch(
            f"in-situ image {highres.shape[1]}x{highres.shape[0]} is not the orbital image "
            f"{image.width}x{image.height} upsampled by downsample={cfg.downsample}"
        )
    grid = GridMap.for_image(image, cfg.grid_stride, cfg.step_cost)
    oracle = InSituOracle(highres, cfg.downsample, grid, cfg.noise_sigma, cfg.point_sampling)
    return SceneryPair(image, oracle, grid, metadata, truth)


def _metadata(cfg: SceneConfig, seed) -> dict:
    return {"name": cfg.name, "seed": int(seed), "downsample": int(cfg.downsample)}


def generate_synthetic_scene(cfg: SceneConfig, seed: int | None = None) -> SceneryPair:
    """Random paired scene, a pure function of ``(cfg, seed)``.

    Smooth endmember spectra are mixed with a patchy, blurred Dirichlet
    abundance field into a high-resolution image; the orbital image is its
    block mean. Both images are stored at float32 precision, so a scene
    survives a round trip through the SSER format unchanged.
    """
    cfg.validate()
    seed = cfg.seed if seed is None else seed
    rng = make_rng(seed)
    E = _endmembers(cfg.K, cfg.bands, rng)
    A = _abundances(cfg, rng)
    highres = A @ E
    if cfg.image_noise > 0:
        highres = highres + rng.normal(0.0, cfg.image_noise, size=highres.shape)
    highres = highres.astype(np.float32).astype(np.float64)
    orbital = block_mean(highres, cfg.downsample).astype(np.float32).astype(np.float64)
    truth = {"endmembers": E, "abundances": A}
    return _assemble(orbital, highres, cfg, _metadata(cfg, seed), truth)


def save_scene(scene: SceneryPair, out_dir, cfg: SceneConfig | None = None, fmt: str = "sser") -> dict[str, Path]:
    """Write both rasters and a metadata JSON; returns the written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ext = ".csv" if fmt == "csv" else ".sser"
    paths = {
        "orbital": write_raster(out_dir / ORBITAL_FILE.replace(".sser", ext), scene.orbital.data),
        "insitu": write_raster(out_dir / INSITU_FILE.replace(".sser", ext), scene.oracle.highres),
    }
    meta = dict(scene.metadata)
    if cfg is not None:
        meta["config"] = cfg.to_dict()
    if scene.truth is not None:
        meta["endmembers"] = np.asarray(scene.truth["endmembers"]).tolist()
    paths["metadata"] = out_dir / META_FILE
    paths["metadata"].write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return paths


def load_scene(path_orbital, path_insitu, cfg: SceneConfig | None = None) -> SceneryPair:
    """Load a pre-registered orbital / in-situ raster pair.

    Geometry (downsample, stride, step cost) and sensor noise come from
    ``cfg``. Raises :class:`ParseError` for unreadable or malformed files and
    :class:`DimensionMismatch` when the two rasters do not pair up.
    """
    cfg = (cfg or SceneConfig()).validate()
    for p in (path_orbital, path_insitu):
        if not Path(p).is_file():
            raise ParseError(f"{p}: no such scene file")
    orbital = read_raster(path_orbital)
    highres = read_raster(path_insitu)
    return _assemble(orbital, highres, cfg, _metadata(cfg, cfg.seed))


def load_scene_dir(directory, cfg: SceneConfig | None = None) -> SceneryPair:
    """Load a directory written by :func:`save_scene`, restoring its config."""
    directory = Path(directory)
    meta_path = directory / META_FILE
    if cfg is None and meta_path.is_file():
        meta = json.loads(meta_path.read_text())
        if "config" in meta:
            cfg = SceneConfig.from_mapping(meta["config"])
    ext = ".csv" if (directory / ORBITAL_FILE.replace(".sser", ".csv")).is_file() else ".sser"
    return load_scene(
        directory / ORBITAL_FILE.replace(".sser", ext),
        directory / INSITU_FILE.replace(".sser", ext),
        cfg,
    )
