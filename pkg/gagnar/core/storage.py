"""
File formats for panels, draws and results.

- Responses and covariates: headerless numeric CSV, one row per node
  (an optional header row on responses is skipped)
- Draws: JSON Lines, a header object followed by one object per recorded
  sweep with keys ``iteration, K, z, theta, sigma2, loglik``
- Tables: CSV with a header row, numbers written with 6 significant digits
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Sequence, TextIO, Union

import numpy as np

from .errors import DataIOError, ValidationError
from .graph import AdjacencyMatrix
from .model import PanelData
from .sampler import ChainDraws

logger = logging.getLogger(__name__)

DRAWS_FORMAT = "gagnar-draws"
DRAWS_VERSION = 1
NUMBER_FORMAT = "%.6g"

PathLike = Union[str, Path]


def significant(value: float) -> float:
    """Round to the digits written by NUMBER_FORMAT."""
    return float(NUMBER_FORMAT % value)


def _read_matrix(path: PathLike, what: str, skip_header: bool = False) -> np.ndarray:
    path = Path(path)
    try:
        values = np.loadtxt(
            path, delimiter=",", skiprows=1 if skip_header else 0, ndmin=2
        )
    except OSError as exc:
        raise DataIOError(f"Cannot read {what} file {path}: {exc}") from exc
    except ValueError as exc:
        raise DataIOError(f"Malformed {what} file {path}: {exc}") from exc
    return values


def load_responses(path: PathLike, header: bool = False) -> np.ndarray:
    """N x T matrix of responses."""
    return _read_matrix(path, "responses", skip_header=header)


def load_covariates(path: PathLike) -> np.ndarray:
    """N x p matrix of static covariates."""
    return _read_matrix(path, "covariates")


def load_panel(
    responses: PathLike,
    covariates: Optional[PathLike] = None,
    header: bool = False,
) -> PanelData:
    Y = load_responses(responses, header=header)
    V = load_covariates(covariates) if covariates else np.zeros((Y.shape[0], 0))
    return PanelData(Y=Y, V=V)


def _ensure_parent(path: Path) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataIOError(f"Cannot create directory {path.parent}: {exc}") from exc


def write_matrix_csv(path: PathLike, matrix: np.ndarray, header: Optional[Sequence[str]] = None) -> None:
    """Write a numeric matrix; a header row is added when given."""
    path = Path(path)
    _ensure_parent(path)
    matrix = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    try:
        np.savetxt(
            path,
            matrix,
            delimiter=",",
            fmt=NUMBER_FORMAT,
            header=",".join(header) if header else "",
            comments="",
        )
    except OSError as exc:
        raise DataIOError(f"Cannot write {path}: {exc}") from exc


def write_table(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    """Write mixed rows; floats use 6 significant digits."""
    path = Path(path)
    _ensure_parent(path)

    def _cell(value: Any) -> str:
        if isinstance(value, (float, np.floating)):
            return NUMBER_FORMAT % value
        return str(value)

    try:
        with open(path, "w") as handle:
            handle.write(",".join(header) + "\n")
            for row in rows:
                handle.write(",".join(_cell(v) for v in row) + "\n")
    except OSError as exc:
        raise DataIOError(f"Cannot write {path}: {exc}") from exc


def write_edge_list(path: PathLike, adj: AdjacencyMatrix, one_based: bool = False) -> None:
    offset = 1 if one_based else 0
    write_table(path, ["src", "dst"], (adj.edges() + offset).tolist())


def write_labels(path: PathLike, z: np.ndarray) -> None:
    """Node and group numbers, both 1-based."""
    z = np.asarray(z, dtype=np.int64)
    write_table(path, ["node", "group"], ((i + 1, int(g) + 1) for i, g in enumerate(z)))


def read_labels(path: PathLike) -> np.ndarray:
    """Inverse of ``write_labels``: zero-based labels in node order."""
    table = _read_matrix(path, "labels", skip_header=True)
    if table.shape[1] != 2:
        raise DataIOError(f"{path}: expected columns node,group")
    order = np.argsort(table[:, 0])
    return table[order, 1].astype(np.int64) - 1


class DrawWriter:
    """
    Streams recorded draws to a JSON Lines file.

    Usage:
        with DrawWriter(path, h=0.4, seed=7, n_nodes=100) as writer:
            writer.write(iteration, z, theta, sigma2, loglik)
    """

    def __init__(self, path: PathLike, h: float, seed: Optional[int], n_nodes: int):
        self.path = Path(path)
        self.header = {
            "format": DRAWS_FORMAT,
            "version": DRAWS_VERSION,
            "h": float(h),
            "seed": seed,
            "n_nodes": int(n_nodes),
        }
        self._handle: Optional[TextIO] = None
        self.count = 0

    def __enter__(self) -> "DrawWriter":
        _ensure_parent(self.path)
        try:
            self._handle = open(self.path, "w")
        except OSError as exc:
            raise DataIOError(f"Cannot write draws to {self.path}: {exc}") from exc
        self._emit(self.header)
        return self

    def __exit__(self, *exc_info) -> None:
        if self._handle is not None:
            self._handle.close()
            self._handle = None

    def _emit(self, obj: Dict[str, Any]) -> None:
        assert self._handle is not None
        self._handle.write(json.dumps(obj, separators=(",", ":")) + "\n")

    def write(
        self,
        iteration: int,
        z: np.ndarray,
        theta: np.ndarray,
        sigma2: np.ndarray,
        loglik: np.ndarray,
    ) -> None:
        record = {
            "iteration": int(iteration),
            "K": int(len(sigma2)),
            "z": np.asarray(z, dtype=np.int64).tolist(),
            "theta": np.asarray(theta, dtype=np.float64).tolist(),
            "sigma2": np.asarray(sigma2, dtype=np.float64).tolist(),
            "loglik": np.asarray(loglik, dtype=np.float64).tolist(),
        }
        self._emit(record)
        self.count += 1


def write_draws(path: PathLike, draws: ChainDraws) -> None:
    with DrawWriter(path, draws.h, draws.seed, draws.n_nodes) as writer:
        for m in range(draws.n_draws):
            writer.write(
                draws.iterations[m], draws.z[m], draws.theta[m], draws.sigma2[m], draws.loglik[m]
            )
    logger.info(f"Wrote {draws.n_draws} draws to {path}")


def read_draws(path: PathLike) -> ChainDraws:
    """Load a draws file written by ``write_draws``."""
    path = Path(path)
    try:
        with open(path) as handle:
            lines = [ln for ln in handle if ln.strip()]
    except OSError as exc:
        raise DataIOError(f"Cannot read draws file {path}: {exc}") from exc
    if not lines:
        raise DataIOError(f"Draws file {path} is empty")

    try:
        header = json.loads(lines[0])
        records = [json.loads(ln) for ln in lines[1:]]
    except json.JSONDecodeError as exc:
        raise DataIOError(f"Malformed JSON in {path}: {exc}") from exc
    if header.get("format") != DRAWS_FORMAT:
        raise DataIOError(f"{path} is not a draws file")
    if header.get("version") != DRAWS_VERSION:
        raise DataIOError(f"Unsupported draws version {header.get('version')} in {path}")
    if not records:
        raise DataIOError(f"{path} holds no draws")

    n_nodes = int(header["n_nodes"])
    try:
        z = np.array([r["z"] for r in records], dtype=np.int64)
        loglik = np.array([r["loglik"] for r in records], dtype=np.float64)
        theta = [np.array(r["theta"], dtype=np.float64).reshape(r["K"], -1) for r in records]
        sigma2 = [np.array(r["sigma2"], dtype=np.float64) for r in records]
        iterations = np.array([r["iteration"] for r in records], dtype=np.int64)
        K = np.array([r["K"] for r in records], dtype=np.int64)
    except (KeyError, ValueError) as exc:
        raise DataIOError(f"Malformed draw record in {path}: {exc}") from exc
    if z.shape != (len(records), n_nodes) or loglik.shape != z.shape:
        raise DataIOError(f"Draw records in {path} do not match n_nodes={n_nodes}")
    for m, (k, s2) in enumerate(zip(K, sigma2)):
        if s2.shape != (k,) or z[m].max() >= k:
            raise DataIOError(f"Record {m + 1} in {path} is inconsistent with K={k}")

    return ChainDraws(
        iterations=iterations,
        z=z,
        K=K,
        theta=theta,
        sigma2=sigma2,
        loglik=loglik,
        h=float(header.get("h", 0.0)),
        seed=header.get("seed"),
    )


def write_summary(path: PathLike, summary: Dict[str, Any]) -> None:
    path = Path(path)
    _ensure_parent(path)
    try:
        with open(path, "w") as handle:
            json.dump(summary, handle, indent=2)
            handle.write("\n")
    except OSError as exc:
        raise DataIOError(f"Cannot write {path}: {exc}") from exc
    except TypeError as exc:
        raise ValidationError(f"Summary is not serializable: {exc}") from exc


def read_summary(path: PathLike) -> Dict[str, Any]:
    try:
        with open(path) as handle:
            return json.load(handle)
    except OSError as exc:
        raise DataIOError(f"Cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataIOError(f"Malformed JSON in {path}: {exc}") from exc


def group_param_header(n_covariates: int) -> list:
    return ["group", "sigma2", "beta0", "beta1", "beta2"] + [
        f"gamma{k + 1}" for k in range(n_covariates)
    ]


def write_group_params(path: PathLike, theta: np.ndarray, sigma2: np.ndarray) -> None:
    """One row per group (1-based), columns group, sigma2, beta0..2, gamma1..p."""
    theta = np.atleast_2d(np.asarray(theta, dtype=np.float64))
    sigma2 = np.asarray(sigma2, dtype=np.float64)
    header = group_param_header(theta.shape[1] - 3)
    rows = (
        [k + 1, float(sigma2[k])] + [float(v) for v in theta[k]]
        for k in range(theta.shape[0])
    )
    write_table(path, header, rows)


def read_group_params(path: PathLike):
    """Inverse of ``write_group_params``: (theta, sigma2) ordered by group."""
    table = _read_matrix(path, "group parameters", skip_header=True)
    if table.shape[1] < 5:
        raise DataIOError(f"{path}: expected columns {','.join(group_param_header(0))}[,gamma...]")
    table = table[np.argsort(table[:, 0])]
    return table[:, 2:].copy(), table[:, 1].copy()
