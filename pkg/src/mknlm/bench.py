"""Benchmark harness: noise every clean image, run each filter, score it.

One noisy instance is drawn per (image, noise level) and every filter sees
that same instance. Results come back as a :class:`ResultsTable` that can be
written as CSV (one row per run, fixed columns) or as a Markdown grid laid
out like the usual denoising comparison table.

CSV columns, in order::

    image_id, image_size, noise_level, sigma, filter_id, status, rmse, ssim,
    best_rmse, best_ssim, h, h_factor, h_source, patch_side, search_radius,
    rho, center_weight, seed, rng, noisy_digest, params_digest
"""

import configparser
import csv
import io
import logging
import os
import pathlib
from dataclasses import dataclass, field, replace
from functools import partial

import numpy as np

from .errors import InvalidParameter
from .fixtures import SYNTHETIC, synthetic
from .image import as_image, residual, residual_display
from .io import load_image, save_image
from .metrics import MetricReport, rmse, ssim
from .mk import PRODUCT, mk_nlm_filter
from .nlm import DEFAULT_SEARCH_RADIUS, FULL_IMAGE, CenterWeight, FilterParams, nlm_filter
from .noise import RNG_ALGORITHM, NoiseSpec, add_gaussian_noise, derive_seed, image_digest

log = logging.getLogger(__name__)

DEFAULT_LEVELS = (0.05, 0.10, 0.15, 0.20)
DEFAULT_IMAGE_SIZE = 256
DEFAULT_SEED = 20240521

FILTERS = {
    "nlm": nlm_filter,
    "mknlm": mk_nlm_filter,
    "mknlm-product": partial(mk_nlm_filter, variant=PRODUCT),
}

# Candidate h/sigma ratios searched by calibrate_h.
CALIBRATION_GRIDS = {
    "nlm": (0.6, 0.8, 1.0, 1.1, 1.2, 1.3, 1.4, 1.5, 1.65, 1.8, 2.0, 2.5),
    "mknlm": (0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6, 0.7, 0.85, 1.0),
    "mknlm-product": (0.15, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.85, 1.0, 1.2, 1.5),
}

# h/sigma ratios used when h is neither given nor calibrated. Produced by
# `mknlm calibrate` on Lena 256x256 (seed DEFAULT_SEED, 3x3 patches, radius 10).
DEFAULT_H_FACTORS = {
    "nlm": {0.05: 1.3, 0.10: 1.4, 0.15: 1.4, 0.20: 1.5},
    "mknlm": {0.05: 0.4, 0.10: 0.4, 0.15: 0.4, 0.20: 0.45},
    "mknlm-product": {0.05: 0.6, 0.10: 0.6, 0.15: 0.6, 0.20: 0.6},
}

CSV_COLUMNS = (
    "image_id", "image_size", "noise_level", "sigma", "filter_id", "status",
    "rmse", "ssim", "best_rmse", "best_ssim", "h", "h_factor", "h_source",
    "patch_side", "search_radius", "rho", "center_weight", "seed", "rng",
    "noisy_digest", "params_digest",
)

FAILED_CELL = "—"


def run_filter(filter_id: str, img, params: FilterParams) -> np.ndarray:
    try:
        fn = FILTERS[filter_id]
    except KeyError:
        raise InvalidParameter(f"unknown filter {filter_id!r}; choose from {sorted(FILTERS)}") from None
    return fn(img, params)


def default_h_factor(filter_id: str, level: float) -> float:
    """Shipped h/sigma ratio, linearly interpolated between calibrated levels."""
    table = DEFAULT_H_FACTORS[filter_id]
    levels = sorted(table)
    return float(np.interp(level, levels, [table[lv] for lv in levels]))


@dataclass(frozen=True)
class FilterSetup:
    """One filter column of an experiment and how its ``h`` is chosen.

    ``h`` wins over ``h_factor`` (h = factor * sigma), which wins over
    ``calibrate`` (grid search against the clean image); with none of them
    the shipped :data:`DEFAULT_H_FACTORS` are used.
    """

    filter_id: str
    kind: str = "nlm"
    patch_side: int = 3
    search_radius: object = DEFAULT_SEARCH_RADIUS
    rho: float = 1.0
    center_weight: CenterWeight = CenterWeight.LITERAL
    h: float = None
    h_factor: float = None
    calibrate: bool = False
    grid: tuple = None

    def __post_init__(self):
        if self.kind not in FILTERS:
            raise InvalidParameter(f"unknown filter kind {self.kind!r}; choose from {sorted(FILTERS)}")
        object.__setattr__(self, "center_weight", CenterWeight(self.center_weight))

    def params(self, h: float) -> FilterParams:
        return FilterParams(
            h=h,
            patch_side=self.patch_side,
            search_radius=self.search_radius,
            rho=self.rho,
            center_weight=self.center_weight,
        )

    def calibration_grid(self) -> tuple:
        return tuple(self.grid) if self.grid else CALIBRATION_GRIDS[self.kind]


@dataclass
class ExperimentConfig:
    images: list
    filters: list
    noise_levels: tuple = DEFAULT_LEVELS
    seed: int = DEFAULT_SEED
    output_dir: str = "results"
    emit_residuals: bool = False
    image_size: int = DEFAULT_IMAGE_SIZE

    def __post_init__(self):
        if not self.images:
            raise InvalidParameter("experiment needs at least one image")
        if not self.filters:
            raise InvalidParameter("experiment needs at least one filter")
        if not self.noise_levels:
            raise InvalidParameter("experiment needs at least one noise level")
        for level in self.noise_levels:
            if not 0.0 < level <= 1.0:
                raise InvalidParameter(f"noise level {level} outside (0, 1]")
        ids = [f.filter_id for f in self.filters]
        if len(set(ids)) != len(ids):
            raise InvalidParameter(f"duplicate filter ids in {ids}")


@dataclass
class ResultsTable:
    rows: list
    image_ids: list
    noise_levels: list
    filter_ids: list
    extras: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.best_rmse, self.best_ssim = mark_best(self.rows)

    def row(self, image_id, level, filter_id) -> MetricReport:
        for r in self.rows:
            if (r.image_id, r.noise_level, r.filter_id) == (image_id, level, filter_id):
                return r
        raise KeyError((image_id, level, filter_id))

    def to_csv(self) -> str:
        return emit_csv(self)

    def to_markdown(self) -> str:
        return emit_markdown(self)


def mark_best(rows) -> tuple:
    """Indices of the best-RMSE and best-SSIM row per (image, level).

    Failed rows never win; on exact ties the earlier filter wins.
    """
    best_rmse, best_ssim = set(), set()
    cells = {}
    for i, r in enumerate(rows):
        if r.ok:
            cells.setdefault((r.image_id, r.noise_level), []).append(i)
    for members in cells.values():
        best_rmse.add(min(members, key=lambda i: (rows[i].rmse, i)))
        best_ssim.add(min(members, key=lambda i: (-rows[i].ssim, i)))
    return best_rmse, best_ssim


def center_crop(img: np.ndarray, size: int) -> np.ndarray:
    if not size:
        return img
    h, w = img.shape
    top, left = max(0, (h - size) // 2), max(0, (w - size) // 2)
    return img[top : top + size, left : left + size]


def load_clean(source: str, image_size: int) -> np.ndarray:
    """Load ``source`` (a file path or ``synthetic:<name>``) and crop it."""
    if str(source).startswith("synthetic:"):
        name = str(source).split(":", 1)[1]
        return synthetic(name, image_size or 64)
    return center_crop(load_image(source), image_size)


def calibration_scores(clean, noisy, level, filter_id, grid, base: FilterParams = None) -> list:
    """RMSE of ``filter_id`` for every ``h = c * sigma`` with ``c`` in ``grid``."""
    sigma = level * 255.0
    base = base or FilterParams(h=1.0)
    return [rmse(run_filter(filter_id, noisy, replace(base, h=c * sigma)), clean) for c in grid]


def calibrate_h(image, level, filter_id, grid, seed=DEFAULT_SEED, base: FilterParams = None, noisy=None) -> float:
    """Pick the ``h / sigma`` ratio from ``grid`` with the lowest RMSE.

    The clean ``image`` is noised with ``NoiseSpec(level, seed)`` unless a
    ``noisy`` instance is passed in. Ties go to the smaller ratio.
    """
    grid = [float(c) for c in grid]
    if not grid:
        raise InvalidParameter("calibration grid is empty")
    image = as_image(image)
    if noisy is None:
        noisy = add_gaussian_noise(image, NoiseSpec(level, seed))
    if len(grid) == 1:
        return grid[0]
    return best_factor(grid, calibration_scores(image, noisy, level, filter_id, grid, base))


def best_factor(grid, scores) -> float:
    """Grid value with the lowest score, preferring the smaller value on ties."""
    return min(zip(scores, grid))[1]


def _fmt(x, spec=".6f"):
    return "" if x is None or not np.isfinite(x) else format(x, spec)


def _level_label(level):
    return f"{100 * level:g}%"


def _digest(setup: FilterSetup, params: FilterParams, factor, source, seed, level, size):
    return (
        f"filter={setup.filter_id};kind={setup.kind};{params.describe()};"
        f"h_factor={_fmt(factor, '.6g')};h_source={source};noise_level={level:.6f};"
        f"sigma={level * 255:.6g};seed={seed};rng={RNG_ALGORITHM};image_size={size}"
    )


def _resolve_h(setup, clean, noisy, level, seed):
    sigma = level * 255.0
    if setup.h is not None:
        return setup.h, setup.h / sigma, "fixed"
    if setup.h_factor is not None:
        return setup.h_factor * sigma, setup.h_factor, "factor"
    if setup.calibrate:
        c = calibrate_h(clean, level, setup.kind, setup.calibration_grid(),
                        seed=seed, base=setup.params(1.0), noisy=noisy)
        return c * sigma, c, "calibrated"
    c = default_h_factor(setup.kind, level)
    return c * sigma, c, "default"


def _failed(image_id, level, setup, exc, digest=""):
    return MetricReport(
        image_id=image_id, noise_level=level, filter_id=setup.filter_id,
        rmse=float("nan"), ssim=float("nan"),
        params_digest=digest or f"filter={setup.filter_id};kind={setup.kind}",
        status=f"failed: {type(exc).__name__}: {exc}".replace("\n", " "),
    )


def run_experiment(cfg: ExperimentConfig, persist: bool = True) -> ResultsTable:
    """Run every (image, level, filter) cell and collect the scores.

    A failing image or filter becomes a ``failed`` row; the rest of the run
    carries on. With ``persist`` the table is written to ``cfg.output_dir``
    as ``results.csv`` and ``results.md``.
    """
    out_dir = pathlib.Path(cfg.output_dir)
    if persist or cfg.emit_residuals:
        out_dir.mkdir(parents=True, exist_ok=True)
    rows, extras = [], {}
    levels = [float(lv) for lv in cfg.noise_levels]

    for image_id, source in cfg.images:
        try:
            clean = load_clean(source, cfg.image_size)
        except Exception as exc:  # noqa: BLE001 - recorded as failed cells
            log.error("cannot load %s (%s): %s", image_id, source, exc)
            rows.extend(_failed(image_id, lv, s, exc) for lv in levels for s in cfg.filters)
            continue
        size = f"{clean.shape[0]}x{clean.shape[1]}"
        for level in levels:
            seed = derive_seed(cfg.seed, image_id, level)
            noisy = add_gaussian_noise(clean, NoiseSpec(level, seed))
            noisy_digest = image_digest(noisy)
            noisy_rmse = rmse(noisy, clean)
            for setup in cfg.filters:
                digest = ""
                try:
                    h, factor, source_h = _resolve_h(setup, clean, noisy, level, seed)
                    params = setup.params(h)
                    digest = _digest(setup, params, factor, source_h, seed, level, size)
                    if image_digest(noisy) != noisy_digest:
                        raise RuntimeError("noisy instance changed between filters")
                    filtered = run_filter(setup.kind, noisy, params)
                    report = MetricReport(
                        image_id=image_id, noise_level=level, filter_id=setup.filter_id,
                        rmse=rmse(filtered, clean), ssim=ssim(filtered, clean),
                        params_digest=digest,
                    )
                except Exception as exc:  # noqa: BLE001 - recorded as a failed cell
                    log.error("%s %s %s failed: %s", image_id, level, setup.filter_id, exc)
                    rows.append(_failed(image_id, level, setup, exc, digest))
                    continue
                rows.append(report)
                extras[(image_id, level, setup.filter_id)] = {
                    "h": h, "h_factor": factor, "h_source": source_h, "params": params,
                    "seed": seed, "noisy_digest": noisy_digest, "noisy_rmse": noisy_rmse,
                    "image_size": size,
                }
                log.info("%s %s %s rmse=%.4f ssim=%.4f", image_id, _level_label(level),
                         setup.filter_id, report.rmse, report.ssim)
                if cfg.emit_residuals:
                    stem = f"{image_id}_{round(level * 100):02d}_{setup.filter_id}"
                    save_image(filtered, out_dir / f"{stem}_filtered.pgm")
                    save_image(residual_display(residual(filtered, clean)), out_dir / f"{stem}_residual.pgm")
            if cfg.emit_residuals:
                save_image(noisy, out_dir / f"{image_id}_{round(level * 100):02d}_noisy.pgm")

    table = ResultsTable(
        rows=rows,
        image_ids=[i for i, _ in cfg.images],
        noise_levels=levels,
        filter_ids=[f.filter_id for f in cfg.filters],
        extras=extras,
        meta={"seed": cfg.seed, "image_size": cfg.image_size, "rng": RNG_ALGORITHM},
    )
    if persist:
        write_table(table, out_dir / "results.csv", "csv")
        write_table(table, out_dir / "results.md", "md")
    return table


def emit_csv(table: ResultsTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for i, r in enumerate(table.rows):
        x = table.extras.get((r.image_id, r.noise_level, r.filter_id), {})
        params = x.get("params")
        writer.writerow([
            r.image_id, x.get("image_size", ""), f"{r.noise_level:.6f}",
            f"{r.noise_level * 255:.6g}", r.filter_id, r.status,
            _fmt(r.rmse), _fmt(r.ssim),
            int(i in table.best_rmse), int(i in table.best_ssim),
            _fmt(x.get("h"), ".6g"), _fmt(x.get("h_factor"), ".6g"), x.get("h_source", ""),
            params.patch_side if params else "", params.search_radius if params else "",
            _fmt(params.rho, ".6g") if params else "",
            params.center_weight.value if params else "",
            x.get("seed", ""), RNG_ALGORITHM, x.get("noisy_digest", ""), r.params_digest,
        ])
    return buf.getvalue()


def emit_markdown(table: ResultsTable) -> str:
    """Images as row groups, noise levels as column groups, best values bold."""
    index = {(r.image_id, r.noise_level, r.filter_id): i for i, r in enumerate(table.rows)}
    head = ["Image", "Filter"]
    for lv in table.noise_levels:
        head += [f"{_level_label(lv)} RMSE", f"{_level_label(lv)} SSIM"]
    lines = [
        "| " + " | ".join(head) + " |",
        "|" + "|".join(["---"] * 2 + ["---:"] * (2 * len(table.noise_levels))) + "|",
    ]
    for image_id in table.image_ids:
        for k, filter_id in enumerate(table.filter_ids):
            cells = [image_id if k == 0 else "", filter_id]
            for lv in table.noise_levels:
                i = index.get((image_id, lv, filter_id))
                r = table.rows[i] if i is not None else None
                if r is None or not r.ok:
                    cells += [FAILED_CELL, FAILED_CELL]
                    continue
                e = f"{r.rmse:.3f}"
                s = f"{r.ssim:.3f}"
                cells.append(f"**{e}**" if i in table.best_rmse else e)
                cells.append(f"**{s}**" if i in table.best_ssim else s)
            lines.append("| " + " | ".join(cells) + " |")
    notes = (
        f"\nNoise sigma = level x 255; RNG {RNG_ALGORITHM}, base seed {table.meta.get('seed')}; "
        f"images cropped to {table.meta.get('image_size')}. Best RMSE (lowest) and SSIM "
        f"(highest) per image and level in bold; {FAILED_CELL} marks a failed run.\n"
    )
    return "\n".join(lines) + "\n" + notes


def write_table(table: ResultsTable, path, fmt: str = "csv") -> pathlib.Path:
    if fmt not in ("csv", "md"):
        raise InvalidParameter(f"unknown table format {fmt!r}")
    text = emit_csv(table) if fmt == "csv" else emit_markdown(table)
    path = pathlib.Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


# ---------------------------------------------------------------- config files

def _bool(text: str) -> bool:
    return configparser.ConfigParser.BOOLEAN_STATES[text.strip().lower()]


def _floats(text: str) -> tuple:
    return tuple(float(t) for t in text.replace(",", " ").split())


def _radius(text):
    text = str(text).strip().lower()
    return FULL_IMAGE if text in (FULL_IMAGE, "full_image") else int(text)


def parse_filter_section(filter_id: str, section) -> FilterSetup:
    kind = section.get("kind", filter_id)
    h_text = section.get("h", "auto").strip().lower()
    h, calibrate = None, False
    if h_text == "calibrate":
        calibrate = True
    elif h_text != "auto":
        h = float(h_text)
    return FilterSetup(
        filter_id=filter_id,
        kind=kind,
        patch_side=int(section.get("patch_side", 3)),
        search_radius=_radius(section.get("search_radius", DEFAULT_SEARCH_RADIUS)),
        rho=float(section.get("rho", 1.0)),
        center_weight=section.get("center_weight", CenterWeight.LITERAL.value),
        h=h,
        h_factor=float(section["h_factor"]) if "h_factor" in section else None,
        calibrate=calibrate,
        grid=_floats(section["grid"]) if "grid" in section else None,
    )


def load_config(path) -> ExperimentConfig:
    """Read an experiment from an INI-style file.

    Relative image paths resolve against the config file's directory; image
    entries of the form ``synthetic:<name>`` use the built-in fixtures.
    """
    path = pathlib.Path(path)
    parser = configparser.ConfigParser()
    with open(path, encoding="utf-8") as fh:
        parser.read_file(fh)
    exp = parser["experiment"] if parser.has_section("experiment") else {}
    base = path.parent

    images = []
    if parser.has_section("images"):
        for image_id, source in parser["images"].items():
            if not source.startswith("synthetic:"):
                source = str((base / source).resolve()) if not os.path.isabs(source) else source
            images.append((image_id, source))

    filters = [
        parse_filter_section(name.split(None, 1)[1].strip(), parser[name])
        for name in parser.sections()
        if name.startswith("filter ")
    ]
    output_dir = exp.get("output_dir", "results")
    return ExperimentConfig(
        images=images,
        filters=filters,
        noise_levels=_floats(exp["noise_levels"]) if "noise_levels" in exp else DEFAULT_LEVELS,
        seed=int(exp.get("seed", DEFAULT_SEED)),
        output_dir=output_dir if os.path.isabs(output_dir) else str(base / output_dir),
        emit_residuals=_bool(exp.get("emit_residuals", "no")),
        image_size=int(exp.get("image_size", DEFAULT_IMAGE_SIZE)),
    )


def synthetic_images() -> list:
    return [(name, f"synthetic:{name}") for name in SYNTHETIC]
