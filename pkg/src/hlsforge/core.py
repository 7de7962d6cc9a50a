"""Design and dataset model plus the on-disk workspace layout.

A dataset directory holds one subdirectory per design. Lowering a design's
directive template produces concrete variants under
``<work_dir>/<dataset>__post_frontend/<design_id>/``; tool flows and
aggregation operate on that tree.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import EmptyDataset, MissingDirectory
from .optdsl import DirectiveAssignment, canonical_text

OPT_TEMPLATE_FILENAME = "opt_template.tcl"
OPT_RENDERED_FILENAME = "opt.tcl"
DESIGN_DATA_FILENAME = "data_design.json"
POST_FRONTEND_SUFFIX = "__post_frontend"
VENDORS = ("xilinx", "intel")

_NAME_RE = re.compile(r"^[A-Za-z0-9_]+$")


@dataclass(frozen=True)
class AbstractDesign:
    """A design as shipped: sources plus, optionally, a directive template."""

    name: str
    dataset_name: str
    source_dir: Path
    files: tuple[str, ...]

    @property
    def frontend_ready(self) -> bool:
        return OPT_TEMPLATE_FILENAME in self.files


@dataclass(frozen=True)
class ConcreteDesign:
    """One lowered design-space point, rooted at its own directory.

    ``assignment`` is None for designs reloaded from disk; the authoritative
    record is the directory's data_design.json (and opt.tcl for xilinx).
    """

    id: str
    base_name: str
    dir: Path
    vendor: str
    assignment: DirectiveAssignment | None = None


@dataclass
class DesignDataset:
    """Named, ordered collection of designs with unique names."""

    name: str
    designs: list = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        for design in self.designs:
            ident = design_identity(design)
            if ident in seen:
                raise ValueError(f"duplicate design {ident!r} in dataset {self.name!r}")
            seen.add(ident)


# Collections are plain dicts keyed by dataset name (insertion order kept).
DatasetCollection = dict[str, DesignDataset]


@dataclass(frozen=True)
class WorkspaceLayout:
    """Root of all generated state for one run."""

    work_dir: Path

    def post_frontend_dir(self, dataset_name: str) -> Path:
        if dataset_name.endswith(POST_FRONTEND_SUFFIX):
            return self.work_dir / dataset_name
        return self.work_dir / f"{dataset_name}{POST_FRONTEND_SUFFIX}"

    def ensure(self) -> "WorkspaceLayout":
        self.work_dir.mkdir(parents=True, exist_ok=True)
        return self


def design_identity(design) -> str:
    """The stable per-dataset key: concrete id if lowered, else the name."""
    return design.id if isinstance(design, ConcreteDesign) else design.name


def design_dir(design) -> Path:
    return design.dir if isinstance(design, ConcreteDesign) else design.source_dir


def list_design_files(root: Path) -> tuple[str, ...]:
    """Relative paths of regular files under root, sorted; hidden and *.log skipped."""
    out = []
    for path in sorted(root.rglob("*")):
        if not path.is_file():
            continue
        rel = path.relative_to(root)
        if any(part.startswith(".") for part in rel.parts):
            continue
        if rel.suffix == ".log":
            continue
        out.append(rel.as_posix())
    return tuple(out)


def load_dataset(dataset_dir: Path, name: str | None = None) -> DesignDataset:
    """Each immediate subdirectory becomes one AbstractDesign (sorted by name)."""
    dataset_dir = Path(dataset_dir)
    if not dataset_dir.is_dir():
        raise MissingDirectory(f"dataset directory {dataset_dir} does not exist")
    name = name if name is not None else dataset_dir.name
    designs = []
    for sub in sorted(p for p in dataset_dir.iterdir() if p.is_dir()):
        if sub.name.startswith("."):
            continue
        if not _NAME_RE.match(sub.name):
            raise ValueError(f"design directory name {sub.name!r} must be [A-Za-z0-9_]+")
        designs.append(AbstractDesign(sub.name, name, sub, list_design_files(sub)))
    if not designs:
        raise EmptyDataset(f"dataset directory {dataset_dir} holds no design subdirectories")
    return DesignDataset(name, designs)


def concrete_design_id(base_name: str, assignment: DirectiveAssignment) -> str:
    """<base_name>__<hash8>: first 8 hex chars of SHA-256 over the canonical rendering."""
    digest = hashlib.sha256(canonical_text(assignment).encode("utf-8")).hexdigest()
    return f"{base_name}__{digest[:8]}"


def validate_design_files(design, required: tuple[str, ...] | list[str]) -> list[str]:
    """Return the required relative paths absent from the design directory."""
    root = design_dir(design)
    return [rel for rel in required if not (root / rel).exists()]


def load_post_frontend(work_dir: Path) -> DatasetCollection:
    """Rebuild a collection from <work_dir>/*__post_frontend trees.

    Directories with a data_design.json come back as ConcreteDesign (without
    the in-memory assignment); anything else is a pass-through AbstractDesign.
    """
    work_dir = Path(work_dir)
    if not work_dir.is_dir():
        raise MissingDirectory(f"work directory {work_dir} does not exist")
    collection: DatasetCollection = {}
    for pf_dir in sorted(work_dir.glob(f"*{POST_FRONTEND_SUFFIX}")):
        if not pf_dir.is_dir():
            continue
        designs = []
        for sub in sorted(p for p in pf_dir.iterdir() if p.is_dir()):
            data_path = sub / DESIGN_DATA_FILENAME
            if data_path.exists():
                meta = json.loads(data_path.read_text())
                designs.append(ConcreteDesign(
                    id=meta["id"], base_name=meta["base_name"], dir=sub,
                    vendor=meta["vendor"], assignment=None))
            else:
                designs.append(AbstractDesign(sub.name, pf_dir.name, sub, list_design_files(sub)))
        if designs:
            collection[pf_dir.name] = DesignDataset(pf_dir.name, designs)
    return collection
