"""Domain types and manifest ingestion.

An object enters the engine as a manifest: an id, six view-image
references, a point-cloud reference, and free-form metadata. Point
clouds load from ascii PLY or a flat JSON array of [x, y, z] triples
and are downsampled to a configurable budget.
"""

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .confidence import compute_raw_confidence
from .errors import EmptyPointCloud, MissingViewpoint, ParseError

DEFAULT_POINT_BUDGET = 10_000


class Viewpoint(enum.Enum):
    """The six standardized camera directions."""

    FRONT = "front"
    BACK = "back"
    LEFT = "left"
    RIGHT = "right"
    TOP = "top"
    BOTTOM = "bottom"

    @classmethod
    def from_string(cls, name: str) -> "Viewpoint":
        try:
            return cls(name)
        except ValueError:
            raise ParseError(f"unknown viewpoint {name!r}") from None


# Canonical ordering for serialization and tie-breaks.
VIEW_ORDER: tuple[Viewpoint, ...] = (
    Viewpoint.FRONT,
    Viewpoint.BACK,
    Viewpoint.LEFT,
    Viewpoint.RIGHT,
    Viewpoint.TOP,
    Viewpoint.BOTTOM,
)

SIDE_VIEWS: tuple[Viewpoint, ...] = (
    Viewpoint.LEFT,
    Viewpoint.RIGHT,
    Viewpoint.TOP,
    Viewpoint.BOTTOM,
)


class PointCloud:
    """Immutable set of (x, y, z) points in model units."""

    def __init__(self, points):
        arr = np.asarray(points, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != 3:
            raise ParseError(f"points must have shape (N, 3), got {arr.shape}")
        if arr.shape[0] == 0:
            raise EmptyPointCloud("point cloud has no points")
        if not np.all(np.isfinite(arr)):
            raise ParseError("point cloud contains non-finite coordinates")
        arr.setflags(write=False)
        self.points = arr

    @property
    def count(self) -> int:
        return int(self.points.shape[0])

    def __eq__(self, other) -> bool:
        if not isinstance(other, PointCloud):
            return NotImplemented
        return np.array_equal(self.points, other.points)

    def __repr__(self) -> str:
        return f"PointCloud(count={self.count})"

    def digest_payload(self, decimals: int = 6) -> bytes:
        """Stable byte serialization of rounded coordinates.

        Rounding keeps the digest identical across platforms that
        format floats differently at the last ulp.
        """
        rounded = np.round(self.points, decimals)
        # normalize -0.0 so the text form is unique
        rounded = rounded + 0.0
        lines = [f"{x:.6f},{y:.6f},{z:.6f}" for x, y, z in rounded]
        return "\n".join(lines).encode("utf-8")


@dataclass(frozen=True)
class EmbeddingVector:
    """Fixed-length real vector from an embedding provider."""

    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) == 0:
            raise ParseError("embedding must have at least one component")
        for v in self.values:
            if not math.isfinite(v):
                raise ParseError("embedding contains a non-finite component")

    @property
    def dim(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)

    @classmethod
    def from_array(cls, arr) -> "EmbeddingVector":
        return cls(tuple(float(v) for v in np.asarray(arr, dtype=np.float64)))


@dataclass(frozen=True)
class CandidateDescription:
    """One generated description of one view.

    token_logprobs are natural-log probabilities, one per generated
    token. When present, raw_confidence must equal their mean absolute
    value; when a provider could not supply logprobs the tuple is empty
    and raw_confidence carries the documented fallback value.
    """

    view: Viewpoint
    text: str
    token_logprobs: tuple[float, ...]
    raw_confidence: float
    index: int

    def __post_init__(self):
        if not self.text:
            raise ParseError("candidate text must be non-empty")
        if self.index < 0:
            raise ParseError(f"candidate index must be >= 0, got {self.index}")
        if not math.isfinite(self.raw_confidence) or self.raw_confidence < 0:
            raise ParseError(f"raw_confidence must be finite and >= 0, got {self.raw_confidence!r}")
        if self.token_logprobs:
            expected = compute_raw_confidence(list(self.token_logprobs))
            if abs(expected - self.raw_confidence) > 1e-9:
                raise ParseError(
                    f"raw_confidence {self.raw_confidence} disagrees with "
                    f"token logprobs (expected {expected})"
                )


@dataclass
class ObjectManifest:
    """A validated object ready for annotation."""

    object_id: str
    view_images: dict[Viewpoint, str]
    point_cloud: PointCloud
    point_cloud_ref: str
    metadata: dict = field(default_factory=dict)


def _parse_ply(data: bytes) -> np.ndarray:
    """Parse an ascii PLY file into an (N, 3) array of x, y, z."""
    text = data.decode("utf-8", errors="replace")
    lines = text.splitlines()
    offset = 0
    if not lines or lines[0].strip() != "ply":
        raise ParseError("not a PLY file (missing 'ply' magic)", offset=0)

    vertex_count = None
    props: list[str] = []
    in_vertex_element = False
    body_start = None
    for i, line in enumerate(lines):
        stripped = line.strip()
        if i == 0:
            offset += len(line.encode("utf-8")) + 1
            continue
        if stripped.startswith("format"):
            if "ascii" not in stripped:
                raise ParseError(f"unsupported PLY format: {stripped!r}", offset=offset)
        elif stripped.startswith("element"):
            parts = stripped.split()
            in_vertex_element = len(parts) == 3 and parts[1] == "vertex"
            if in_vertex_element:
                try:
                    vertex_count = int(parts[2])
                except ValueError:
                    raise ParseError(f"bad vertex count: {stripped!r}", offset=offset) from None
        elif stripped.startswith("property") and in_vertex_element:
            props.append(stripped.split()[-1])
        elif stripped == "end_header":
            body_start = i + 1
            offset += len(line.encode("utf-8")) + 1
            break
        offset += len(line.encode("utf-8")) + 1
    if body_start is None or vertex_count is None:
        raise ParseError("PLY header missing end_header or vertex element", offset=offset)

    try:
        xi, yi, zi = props.index("x"), props.index("y"), props.index("z")
    except ValueError:
        raise ParseError("PLY vertex element lacks x/y/z properties", offset=offset) from None

    rows = []
    for i in range(vertex_count):
        if body_start + i >= len(lines):
            raise ParseError(
                f"PLY body truncated: expected {vertex_count} vertices, got {i}", offset=offset
            )
        line = lines[body_start + i]
        fields = line.split()
        try:
            rows.append((float(fields[xi]), float(fields[yi]), float(fields[zi])))
        except (IndexError, ValueError):
            raise ParseError(f"bad PLY vertex row: {line!r}", offset=offset) from None
        offset += len(line.encode("utf-8")) + 1
    return np.asarray(rows, dtype=np.float64)


def load_point_cloud(path: str | Path) -> PointCloud:
    """Load a cloud from ascii PLY or a flat JSON [[x, y, z], ...] array."""
    path = Path(path)
    data = path.read_bytes()
    if path.suffix.lower() == ".ply" or data[:4] == b"ply\n" or data[:5] == b"ply\r\n":
        return PointCloud(_parse_ply(data))
    try:
        parsed = json.loads(data.decode("utf-8"))
    except json.JSONDecodeError as e:
        raise ParseError(f"point cloud is neither PLY nor JSON: {e.msg}", offset=e.pos) from None
    if not isinstance(parsed, list):
        raise ParseError("JSON point cloud must be an array of [x, y, z] triples")
    if len(parsed) == 0:
        raise EmptyPointCloud("point cloud has no points")
    return PointCloud(parsed)


def downsample(cloud: PointCloud, budget: int, seed: int) -> PointCloud:
    """Uniformly subsample to at most `budget` points, order-preserving."""
    if budget <= 0:
        raise ParseError(f"point budget must be positive, got {budget}")
    if cloud.count <= budget:
        return cloud
    rng = np.random.default_rng(seed)
    idx = rng.choice(cloud.count, size=budget, replace=False)
    idx.sort()
    return PointCloud(cloud.points[idx])


def ingest_manifest(
    path_or_bytes: str | Path | bytes,
    point_budget: int = DEFAULT_POINT_BUDGET,
    seed: int = 0,
) -> ObjectManifest:
    """Parse, validate, and load one object manifest.

    Accepts a file path or raw JSON bytes. Relative point-cloud paths
    resolve against the manifest file's directory (or the working
    directory for byte input).
    """
    if isinstance(path_or_bytes, bytes):
        raw = path_or_bytes
        base_dir = Path.cwd()
    else:
        path = Path(path_or_bytes)
        raw = path.read_bytes()
        base_dir = path.parent

    try:
        doc = json.loads(raw.decode("utf-8"))
    except json.JSONDecodeError as e:
        raise ParseError(f"manifest is not valid JSON: {e.msg}", offset=e.pos) from None
    if not isinstance(doc, dict):
        raise ParseError("manifest root must be a JSON object")

    allowed = {"object_id", "views", "point_cloud", "metadata"}
    unknown = set(doc) - allowed
    if unknown:
        raise ParseError(f"manifest has unknown keys: {sorted(unknown)}")

    object_id = doc.get("object_id")
    if not isinstance(object_id, str) or not object_id:
        raise ParseError("object_id must be a non-empty string")

    views_doc = doc.get("views")
    if not isinstance(views_doc, dict):
        raise ParseError("views must be an object mapping viewpoint to image reference")
    missing = [vp.value for vp in VIEW_ORDER if vp.value not in views_doc]
    if missing:
        raise MissingViewpoint(missing)
    unknown_views = set(views_doc) - {vp.value for vp in VIEW_ORDER}
    if unknown_views:
        raise ParseError(f"views has unknown keys: {sorted(unknown_views)}")
    view_images = {}
    for vp in VIEW_ORDER:
        ref = views_doc[vp.value]
        if not isinstance(ref, str) or not ref:
            raise ParseError(f"view {vp.value!r} reference must be a non-empty string")
        view_images[vp] = ref

    cloud_ref = doc.get("point_cloud")
    if not isinstance(cloud_ref, str) or not cloud_ref:
        raise ParseError("point_cloud must be a non-empty path string")
    cloud_path = Path(cloud_ref)
    if not cloud_path.is_absolute():
        cloud_path = base_dir / cloud_path
    cloud = downsample(load_point_cloud(cloud_path), point_budget, seed)

    metadata = doc.get("metadata", {})
    if not isinstance(metadata, dict):
        raise ParseError("metadata must be an object")

    return ObjectManifest(
        object_id=object_id,
        view_images=view_images,
        point_cloud=cloud,
        point_cloud_ref=cloud_ref,
        metadata=metadata,
    )


def manifest_to_json(manifest: ObjectManifest) -> str:
    """Serialize a manifest back to its on-disk JSON form."""
    doc = {
        "object_id": manifest.object_id,
        "views": {vp.value: manifest.view_images[vp] for vp in VIEW_ORDER},
        "point_cloud": manifest.point_cloud_ref,
        "metadata": manifest.metadata,
    }
    return json.dumps(doc, indent=2, sort_keys=False)
