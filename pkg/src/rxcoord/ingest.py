"""Parsers and writers for structures, trajectories, properties and plots.

All parsers are pure functions on input text; parsed containers are
immutable after construction. Fixed-column PDB conventions: serial in
columns 7-11, name 13-16, resName 18-20, chain 22, resSeq 23-26,
x/y/z 31-54 (three %8.3f fields). Text trajectory formats supported:
multi-model PDB, XYZ, and CSV with columns ``frame,atom_index,x,y,z``.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DuplicateFrame,
    EmptySelection,
    EmptyStructure,
    InconsistentFrame,
    MalformedRecord,
    NonNumericValue,
    SelectionParseError,
)

BACKBONE_NAMES = ("N", "CA", "C", "O")


@dataclass(frozen=True)
class AtomRecord:
    serial: int
    name: str
    residue_name: str
    residue_seq: int
    chain: str
    element: str = ""


@dataclass(frozen=True)
class Structure:
    atoms: tuple[AtomRecord, ...]
    coords: np.ndarray  # (A, 3) in Angstrom

    def __post_init__(self):
        object.__setattr__(self, "coords", np.asarray(self.coords, dtype=float))
        if len(self.atoms) != len(self.coords):
            raise ValueError("atom table and coordinate array lengths differ")
        if not np.all(np.isfinite(self.coords)):
            raise ValueError("non-finite coordinates")


@dataclass(frozen=True)
class Trajectory:
    atoms: tuple[AtomRecord, ...]
    frames: np.ndarray  # (F, A, 3) in Angstrom
    frame_ids: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "frames", np.asarray(self.frames, dtype=float))
        if self.frames.ndim != 3 or self.frames.shape[1] != len(self.atoms):
            raise ValueError("frame array shape does not match atom table")
        if self.frames.shape[0] < 1:
            raise ValueError("trajectory needs at least one frame")
        if not np.all(np.isfinite(self.frames)):
            raise ValueError("non-finite coordinates")

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def n_atoms(self) -> int:
        return self.frames.shape[1]


@dataclass(frozen=True)
class Selection:
    indices: tuple[int, ...]
    expr: str

    def __post_init__(self):
        idx = tuple(self.indices)
        if not idx:
            raise EmptySelection(f"selection {self.expr!r} matched no atoms")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("selection indices must be strictly increasing")
        object.__setattr__(self, "indices", idx)

    def __len__(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class PropertySeries:
    name: str
    units: str
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1:
            raise ValueError("property values must be one-dimensional")
        if not np.all(np.isfinite(vals)):
            raise ValueError("non-finite property values")
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)


# --- PDB ----------------------------------------------------------------


def _parse_float(text: str, what: str, lineno: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise MalformedRecord(f"bad {what} field {text.strip()!r}", lineno) from None


def _parse_int(text: str, what: str, lineno: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise MalformedRecord(f"bad {what} field {text.strip()!r}", lineno) from None


def _parse_atom_line(line: str, lineno: int) -> tuple[AtomRecord, np.ndarray, str]:
    # Tolerate trailing short lines: pad to full record width.
    line = line.rstrip("\n").ljust(80)
    serial = _parse_int(line[6:11], "serial", lineno)
    name = line[12:16].strip()
    altloc = line[16].strip()
    resname = line[17:20].strip()
    chain = line[21].strip() or "A"
    resseq = _parse_int(line[22:26], "resSeq", lineno)
    x = _parse_float(line[30:38], "x", lineno)
    y = _parse_float(line[38:46], "y", lineno)
    z = _parse_float(line[46:54], "z", lineno)
    element = line[76:78].strip()
    if not name:
        raise MalformedRecord("empty atom name", lineno)
    rec = AtomRecord(serial=serial, name=name, residue_name=resname,
                     residue_seq=resseq, chain=chain, element=element)
    return rec, np.array([x, y, z]), altloc


def parse_pdb(text: str) -> Structure:
    """Parse ATOM/HETATM records of a (single-model) PDB file.

    Records other than ATOM/HETATM/MODEL/ENDMDL/TER/END are ignored.
    For alternate locations the first altLoc wins; others are dropped
    with a warning.
    """
    atoms: list[AtomRecord] = []
    coords: list[np.ndarray] = []
    seen_altloc: set[tuple[str, int, str]] = set()
    dropped = 0
    for lineno, line in enumerate(text.splitlines(), start=1):
        tag = line[:6].strip()
        if tag in ("ATOM", "HETATM"):
            rec, xyz, altloc = _parse_atom_line(line, lineno)
            if altloc:
                key = (rec.name, rec.residue_seq, rec.chain)
                if key in seen_altloc:
                    dropped += 1
                    continue
                seen_altloc.add(key)
            atoms.append(rec)
            coords.append(xyz)
        elif tag == "ENDMDL":
            break  # single-structure parse: first model only
    if dropped:
        warnings.warn(f"dropped {dropped} alternate-location atom(s); first altLoc kept")
    if not atoms:
        raise EmptyStructure("no ATOM/HETATM records found")
    return Structure(atoms=tuple(atoms), coords=np.array(coords))


def write_pdb(s: Structure) -> str:
    lines = []
    for rec, (x, y, z) in zip(s.atoms, s.coords):
        name = rec.name if len(rec.name) >= 4 else f" {rec.name}"
        lines.append(
            f"ATOM  {rec.serial:5d} {name:<4s} {rec.residue_name:<3s} "
            f"{rec.chain:1s}{rec.residue_seq:4d}    "
            f"{x:8.3f}{y:8.3f}{z:8.3f}  1.00  0.00          {rec.element:>2s}"
        )
    lines.append("END")
    return "\n".join(lines) + "\n"


# --- Trajectories -------------------------------------------------------


def _parse_multimodel_pdb(text: str) -> Trajectory:
    frames: list[np.ndarray] = []
    frame_ids: list[int] = []
    atoms: list[AtomRecord] = []
    cur: list[np.ndarray] = []
    cur_atoms: list[AtomRecord] = []
    in_model = False
    model_id = 0
    saw_model_record = False

    def close_frame(lineno: int):
        nonlocal cur, cur_atoms
        if not cur:
            return
        if not atoms:
            atoms.extend(cur_atoms)
        elif len(cur) != len(atoms):
            raise InconsistentFrame(
                f"expected {len(atoms)} atoms, found {len(cur)}", len(frames))
        frames.append(np.array(cur))
        frame_ids.append(model_id if saw_model_record else len(frames) - 1)
        cur = []
        cur_atoms = []

    for lineno, line in enumerate(text.splitlines(), start=1):
        tag = line[:6].strip()
        if tag == "MODEL":
            saw_model_record = True
            in_model = True
            try:
                model_id = int(line[6:].split()[0])
            except (ValueError, IndexError):
                model_id = len(frames)
        elif tag == "ENDMDL":
            close_frame(lineno)
            in_model = False
        elif tag in ("ATOM", "HETATM"):
            rec, xyz, _ = _parse_atom_line(line, lineno)
            cur.append(xyz)
            cur_atoms.append(rec)
    close_frame(0)
    if not frames:
        raise EmptyStructure("no coordinate frames found")
    return Trajectory(atoms=tuple(atoms), frames=np.array(frames),
                      frame_ids=tuple(frame_ids))


def _parse_xyz(text: str) -> Trajectory:
    lines = text.splitlines()
    frames: list[np.ndarray] = []
    names: list[str] = []
    i = 0
    while i < len(lines):
        if not lines[i].strip():
            i += 1
            continue
        try:
            natoms = int(lines[i].strip())
        except ValueError:
            raise MalformedRecord(f"expected atom count, got {lines[i].strip()!r}", i + 1)
        if i + 1 + natoms >= len(lines) + 1:
            raise InconsistentFrame("truncated XYZ block", len(frames))
        block = lines[i + 2:i + 2 + natoms]
        if len(block) < natoms:
            raise InconsistentFrame("truncated XYZ block", len(frames))
        coords = []
        frame_names = []
        for j, row in enumerate(block):
            parts = row.split()
            if len(parts) < 4:
                raise MalformedRecord(f"bad XYZ row {row!r}", i + 3 + j)
            frame_names.append(parts[0])
            try:
                coords.append([float(parts[1]), float(parts[2]), float(parts[3])])
            except ValueError:
                raise MalformedRecord(f"bad XYZ coordinates in {row!r}", i + 3 + j) from None
        if not names:
            names = frame_names
        elif len(frame_names) != len(names):
            raise InconsistentFrame(
                f"expected {len(names)} atoms, found {len(frame_names)}", len(frames))
        frames.append(np.array(coords))
        i += 2 + natoms
    if not frames:
        raise EmptyStructure("no coordinate frames found")
    atoms = tuple(
        AtomRecord(serial=k + 1, name=nm, residue_name="UNK",
                   residue_seq=k + 1, chain="A", element=nm[:1])
        for k, nm in enumerate(names)
    )
    return Trajectory(atoms=atoms, frames=np.array(frames),
                      frame_ids=tuple(range(len(frames))))


def _parse_traj_csv(text: str, atoms: tuple[AtomRecord, ...] | None) -> Trajectory:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines or lines[0].strip().lower() != "frame,atom_index,x,y,z":
        raise MalformedRecord("expected header 'frame,atom_index,x,y,z'", 1)
    per_frame: dict[int, list[tuple[int, float, float, float]]] = {}
    for lineno, row in enumerate(lines[1:], start=2):
        parts = row.split(",")
        if len(parts) != 5:
            raise MalformedRecord(f"expected 5 columns, got {len(parts)}", lineno)
        try:
            f = int(parts[0])
            a = int(parts[1])
            xyz = (float(parts[2]), float(parts[3]), float(parts[4]))
        except ValueError:
            raise NonNumericValue(f"bad numeric field in {row!r}", lineno) from None
        per_frame.setdefault(f, []).append((a, *xyz))
    frame_ids = sorted(per_frame)
    n_atoms = len(per_frame[frame_ids[0]])
    frames = np.empty((len(frame_ids), n_atoms, 3))
    for k, fid in enumerate(frame_ids):
        rows = per_frame[fid]
        if len(rows) != n_atoms:
            raise InconsistentFrame(
                f"expected {n_atoms} atoms, found {len(rows)}", k)
        rows.sort(key=lambda r: r[0])
        frames[k] = [(x, y, z) for _, x, y, z in rows]
    if atoms is None:
        atoms = tuple(
            AtomRecord(serial=k + 1, name="X", residue_name="UNK",
                       residue_seq=k + 1, chain="A")
            for k in range(n_atoms)
        )
    elif len(atoms) != n_atoms:
        raise InconsistentFrame(
            f"atom table has {len(atoms)} atoms, frames have {n_atoms}", 0)
    return Trajectory(atoms=atoms, frames=frames, frame_ids=tuple(frame_ids))


def parse_trajectory(text: str, format: str,
                     atoms: tuple[AtomRecord, ...] | None = None) -> Trajectory:
    """Parse a trajectory in ``multi-model-pdb``, ``xyz`` or ``csv`` format.

    The CSV format carries no atom identity; pass ``atoms`` (e.g. from a
    reference PDB) to attach a real atom table, otherwise placeholder
    records are synthesized.
    """
    if format == "multi-model-pdb":
        if atoms is not None:
            raise ValueError("atom table override only applies to csv input")
        return _parse_multimodel_pdb(text)
    if format == "xyz":
        if atoms is not None:
            raise ValueError("atom table override only applies to csv input")
        return _parse_xyz(text)
    if format == "csv":
        return _parse_traj_csv(text, atoms)
    raise ValueError(f"unknown trajectory format {format!r}")


def write_trajectory_pdb(traj: Trajectory) -> str:
    out = []
    for k in range(traj.n_frames):
        out.append(f"MODEL     {traj.frame_ids[k]:4d}")
        out.append(write_pdb(Structure(atoms=traj.atoms, coords=traj.frames[k]))
                   .rstrip("\n").removesuffix("END").rstrip("\n"))
        out.append("ENDMDL")
    out.append("END")
    return "\n".join(out) + "\n"


def write_trajectory_csv(traj: Trajectory) -> str:
    rows = ["frame,atom_index,x,y,z"]
    for k in range(traj.n_frames):
        fid = traj.frame_ids[k]
        for a in range(traj.n_atoms):
            x, y, z = traj.frames[k, a]
            rows.append(f"{fid},{a},{_fmt(x)},{_fmt(y)},{_fmt(z)}")
    return "\n".join(rows) + "\n"


def write_xyz(traj: Trajectory) -> str:
    rows = []
    for k in range(traj.n_frames):
        rows.append(str(traj.n_atoms))
        rows.append(f"frame {traj.frame_ids[k]}")
        for rec, (x, y, z) in zip(traj.atoms, traj.frames[k]):
            rows.append(f"{rec.name} {_fmt(x)} {_fmt(y)} {_fmt(z)}")
    return "\n".join(rows) + "\n"


# --- Property series ----------------------------------------------------


def parse_property_csv(text: str) -> PropertySeries:
    """Parse a ``frame,value`` CSV with optional ``# name:`` / ``# units:`` lines."""
    name = "property"
    units = ""
    rows = []
    header_seen = False
    seen_frames: set[int] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            meta = line.lstrip("#").strip()
            if meta.lower().startswith("name:"):
                name = meta[5:].strip()
            elif meta.lower().startswith("units:"):
                units = meta[6:].strip()
            continue
        if not header_seen:
            if line.lower().replace(" ", "") != "frame,value":
                raise MalformedRecord("expected header 'frame,value'", lineno)
            header_seen = True
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise MalformedRecord(f"expected 2 columns, got {len(parts)}", lineno)
        try:
            frame = int(parts[0])
            value = float(parts[1])
        except ValueError:
            raise NonNumericValue(f"bad numeric field in {line!r}", lineno) from None
        if frame in seen_frames:
            raise DuplicateFrame(f"frame {frame} appears more than once")
        seen_frames.add(frame)
        rows.append((frame, value))
    if not header_seen or not rows:
        raise MalformedRecord("no property rows found", 1)
    rows.sort(key=lambda r: r[0])
    return PropertySeries(name=name, units=units,
                          values=np.array([v for _, v in rows]))


def write_property_csv(series: PropertySeries) -> str:
    rows = [f"# name: {series.name}", f"# units: {series.units}", "frame,value"]
    rows += [f"{k},{_fmt(v)}" for k, v in enumerate(series.values)]
    return "\n".join(rows) + "\n"


# --- Atom selection ------------------------------------------------------


def select_atoms(atoms: tuple[AtomRecord, ...], expr: str) -> Selection:
    """Evaluate a selection expression against an atom table.

    Mini-grammar: ``name <ID>[,<ID>...]``, ``resid <a> to <b>``,
    ``backbone`` (N, CA, C, O), ``all``; clauses combinable with ``and``.
    """
    predicates = []
    for clause in [c.strip() for c in expr.split(" and ")]:
        tokens = clause.split()
        if not tokens:
            raise SelectionParseError(f"empty clause in {expr!r}")
        kw = tokens[0]
        if kw == "all" and len(tokens) == 1:
            predicates.append(lambda a: True)
        elif kw == "backbone" and len(tokens) == 1:
            predicates.append(lambda a: a.name in BACKBONE_NAMES)
        elif kw == "name" and len(tokens) >= 2:
            names = {n.strip() for n in " ".join(tokens[1:]).split(",") if n.strip()}
            if not names:
                raise SelectionParseError(f"no atom names in clause {clause!r}")
            predicates.append(lambda a, names=names: a.name in names)
        elif kw == "resid" and len(tokens) == 4 and tokens[2] == "to":
            try:
                lo, hi = int(tokens[1]), int(tokens[3])
            except ValueError:
                raise SelectionParseError(f"bad residue bounds in {clause!r}") from None
            predicates.append(lambda a, lo=lo, hi=hi: lo <= a.residue_seq <= hi)
        else:
            raise SelectionParseError(f"cannot parse clause {clause!r}")
    indices = tuple(i for i, a in enumerate(atoms) if all(p(a) for p in predicates))
    if not indices:
        raise EmptySelection(f"selection {expr!r} matched no atoms")
    return Selection(indices=indices, expr=expr)


def check_atom_order(atoms_a: tuple[AtomRecord, ...],
                     atoms_b: tuple[AtomRecord, ...]) -> None:
    """Raise if two atom tables disagree on the (name, residue_seq) sequence.

    Automatic reordering is deliberately not attempted: a mismatch
    usually means the inputs came from different preparations.
    """
    from .errors import AtomOrderMismatch

    if len(atoms_a) != len(atoms_b):
        raise AtomOrderMismatch(
            f"atom counts differ: {len(atoms_a)} vs {len(atoms_b)}")
    for i, (a, b) in enumerate(zip(atoms_a, atoms_b)):
        if (a.name, a.residue_seq) != (b.name, b.residue_seq):
            raise AtomOrderMismatch(
                f"atom {i}: ({a.name}, {a.residue_seq}) vs ({b.name}, {b.residue_seq})")


# --- Generic writers ------------------------------------------------------


def _fmt(x: float) -> str:
    """Locale-independent float formatting with a '.' decimal separator."""
    return format(float(x), ".12g")


def write_csv(header: list[str], rows: list[list]) -> str:
    def cell(v) -> str:
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, float):
            return _fmt(v)
        return str(v)

    lines = [",".join(header)]
    lines += [",".join(cell(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def write_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# Eight-stop ramp sampled from the viridis colormap, interpolated
# linearly over [min, max] of the color values.
COLOR_RAMP = (
    (68, 1, 84),
    (70, 50, 127),
    (54, 92, 141),
    (39, 127, 142),
    (31, 161, 135),
    (74, 194, 109),
    (159, 218, 58),
    (253, 231, 37),
)


def color_for(value: float, vmin: float, vmax: float) -> str:
    if vmax <= vmin:
        t = 0.0
    else:
        t = (value - vmin) / (vmax - vmin)
    t = min(max(t, 0.0), 1.0) * (len(COLOR_RAMP) - 1)
    i = min(int(t), len(COLOR_RAMP) - 2)
    f = t - i
    lo, hi = COLOR_RAMP[i], COLOR_RAMP[i + 1]
    r, g, b = (round(a + f * (b_ - a)) for a, b_ in zip(lo, hi))
    return f"#{r:02x}{g:02x}{b:02x}"


def write_svg_scatter(points: np.ndarray, color_values: np.ndarray,
                      axis_labels: tuple[str, str],
                      title: str = "") -> str:
    """Render an (N, 2) point cloud as an SVG scatter plot.

    One ``<circle>`` per point; fill follows the 8-stop viridis-like
    ramp over the [min, max] range of ``color_values``.
    """
    points = np.asarray(points, dtype=float)
    color_values = np.asarray(color_values, dtype=float)
    if points.ndim != 2 or points.shape[1] != 2:
        raise ValueError("points must be an (N, 2) array")
    if len(points) != len(color_values):
        raise ValueError("points and color_values lengths differ")
    if not (np.all(np.isfinite(points)) and np.all(np.isfinite(color_values))):
        raise ValueError("non-finite plot inputs")

    width, height, margin = 640, 480, 60
    xmin, ymin = points.min(axis=0)
    xmax, ymax = points.max(axis=0)
    xspan = (xmax - xmin) or 1.0
    yspan = (ymax - ymin) or 1.0
    vmin, vmax = float(color_values.min()), float(color_values.max())

    def sx(x):
        return margin + (x - xmin) / xspan * (width - 2 * margin)

    def sy(y):
        return height - margin - (y - ymin) / yspan * (height - 2 * margin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<text x="{width // 2}" y="{height - 15}" text-anchor="middle" '
        f'font-size="14">{axis_labels[0]}</text>',
        f'<text x="18" y="{height // 2}" text-anchor="middle" font-size="14" '
        f'transform="rotate(-90 18 {height // 2})">{axis_labels[1]}</text>',
    ]
    if title:
        parts.append(f'<text x="{width // 2}" y="24" text-anchor="middle" '
                     f'font-size="15">{title}</text>')
    for (x, y), c in zip(points, color_values):
        parts.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" '
                     f'fill="{color_for(float(c), vmin, vmax)}" fill-opacity="0.8"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
