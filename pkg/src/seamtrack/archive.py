"""Sequence archive file format.

Line-delimited JSON with a manifest first:

    {"record": "manifest", "format_version": 1, "n": 20, "pair_count": 10,
     "frame_count": 100, "units": "um", "provenance": {...},
     "graph": {"labels": [...], "edges": [[u, v], ...],
               "body_segments": [[a, b, c, d], ...]}}
    {"record": "frame", "frame": 0, "detections": [[x, y, z], ...],
     "annotation": [[x, y, z], ...], "annotation_validity": [true, ...]}
    ...

``annotation`` fields are optional per frame.  Frames must appear in index
order and match the manifest's frame_count; floats survive the round trip
exactly (shortest-repr JSON encoding).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

from seamtrack.core import DetectionSet, EmbryoGraph, TrackState, build_canonical_embryo_graph

FORMAT_VERSION = 1


@dataclass
class SequenceArchive:
    pair_count: int
    detections: List[DetectionSet]
    annotations: Optional[List[TrackState]] = None
    graph: Optional[EmbryoGraph] = None
    units: str = "um"
    provenance: Dict = field(default_factory=dict)

    def __post_init__(self):
        if self.annotations is not None and len(self.annotations) != len(self.detections):
            raise ValueError("annotations must align with detections")

    @property
    def n(self) -> int:
        return 2 * self.pair_count

    @property
    def frame_count(self) -> int:
        return len(self.detections)

    def resolved_graph(self) -> EmbryoGraph:
        return self.graph or build_canonical_embryo_graph(self.pair_count)


def save_archive(archive: SequenceArchive, path) -> None:
    manifest = {
        "record": "manifest",
        "format_version": FORMAT_VERSION,
        "n": archive.n,
        "pair_count": archive.pair_count,
        "frame_count": archive.frame_count,
        "units": archive.units,
        "provenance": archive.provenance,
        "has_annotations": archive.annotations is not None,
    }
    if archive.graph is not None:
        manifest["graph"] = {
            "labels": list(archive.graph.vertex_labels),
            "edges": [list(e) for e in archive.graph.edges],
            "body_segments": [list(s) for s in archive.graph.body_segments],
        }
    with open(path, "w") as fh:
        fh.write(json.dumps(manifest) + "\n")
        for i, det in enumerate(archive.detections):
            rec = {"record": "frame", "frame": det.frame_index,
                   "detections": det.points.tolist()}
            if archive.annotations is not None:
                ann = archive.annotations[i]
                rec["annotation"] = ann.positions.tolist()
                rec["annotation_validity"] = ann.validity.tolist()
            fh.write(json.dumps(rec) + "\n")


def load_archive(path) -> SequenceArchive:
    path = Path(path)
    with open(path) as fh:
        first = fh.readline()
        if not first:
            raise ValueError(f"{path}: empty archive")
        manifest = json.loads(first)
        if manifest.get("record") != "manifest":
            raise ValueError(f"{path}: first record must be the manifest")
        if manifest.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported format version "
                             f"{manifest.get('format_version')!r}")
        detections: List[DetectionSet] = []
        annotations: List[TrackState] = []
        has_ann = manifest.get("has_annotations", False)
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            if rec.get("record") != "frame":
                raise ValueError(f"{path}: unexpected record {rec.get('record')!r}")
            detections.append(DetectionSet(rec["frame"], rec["detections"]))
            if has_ann:
                if "annotation" not in rec:
                    raise ValueError(f"{path}: frame {rec['frame']} missing annotation")
                annotations.append(TrackState(rec["frame"], rec["annotation"],
                                              rec.get("annotation_validity")))
    if len(detections) != manifest["frame_count"]:
        raise ValueError(f"{path}: manifest declares {manifest['frame_count']} frames, "
                         f"found {len(detections)}")
    graph = None
    if "graph" in manifest:
        gspec = manifest["graph"]
        graph = EmbryoGraph(tuple(gspec["labels"]),
                            tuple(tuple(e) for e in gspec["edges"]),
                            tuple(tuple(s) for s in gspec.get("body_segments", [])))
    return SequenceArchive(
        pair_count=manifest["pair_count"],
        detections=detections,
        annotations=annotations if has_ann else None,
        graph=graph,
        units=manifest.get("units", "um"),
        provenance=manifest.get("provenance", {}),
    )


def save_history(states, events, path) -> None:
    """Tracker output: one manifest-ish header, then per-frame states."""
    with open(path, "w") as fh:
        fh.write(json.dumps({"record": "history", "format_version": FORMAT_VERSION,
                             "frame_count": len(states)}) + "\n")
        for st in states:
            fh.write(json.dumps({"record": "state", "frame": st.frame_index,
                                 "positions": st.positions.tolist(),
                                 "validity": st.validity.tolist()}) + "\n")
        for ev in events:
            fh.write(json.dumps({"record": "event", "frame": ev.frame_index,
                                 "kind": ev.kind, "detail": ev.detail}) + "\n")


def load_history(path):
    states: List[TrackState] = []
    events: List[dict] = []
    with open(path) as fh:
        header = json.loads(fh.readline())
        if header.get("record") != "history":
            raise ValueError(f"{path}: not a history file")
        for line in fh:
            rec = json.loads(line)
            if rec["record"] == "state":
                states.append(TrackState(rec["frame"], rec["positions"], rec["validity"]))
            elif rec["record"] == "event":
                events.append(rec)
    if len(states) != header["frame_count"]:
        raise ValueError(f"{path}: truncated history")
    return states, events
