"""Single-session track review service.

A thin JSON-over-HTTP state machine over the search engine, for a human (or
a UI) to step through frames, inspect the proposed update against the
detections, and accept or correct it before the tracker continues.

Endpoints:
    GET  /state    current frame payload: previous state, detections, graph
                   edges, the engine's proposal, and the ranked depth-1
                   alternatives with costs
    POST /accept   commit the proposal, advance one frame
    POST /correct  body {"positions": [[x, y, z] * n]}; commits the given
                   positions as this frame's state, then advances
    POST /seek     body {"frame": f}; drop decisions from frame f on and
                   re-enter there
    GET  /history  all committed states and events so far

Mutations are serialized by a lock (single writer); reads share it.  The
service exists to drive the review UI, not for multi-user deployment.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import List, Optional

import numpy as np

from seamtrack.archive import SequenceArchive
from seamtrack.core import TrackState
from seamtrack.evaluation import PASS_THRESHOLD_UM
from seamtrack.search import (SearchConfig, TrackEvent, first_frame_hypotheses,
                              step)


class ReviewSession:
    """Tracker state machine: one decision per detection frame."""

    def __init__(self, archive: SequenceArchive, cfg: SearchConfig,
                 threshold: float = PASS_THRESHOLD_UM):
        if archive.annotations is None:
            raise ValueError("review needs an archive with at least the first "
                             "frame annotated to seed the tracker")
        self.archive = archive
        self.cfg = cfg
        self.threshold = threshold
        self.graph = cfg.model.graph
        self.states: List[TrackState] = [archive.annotations[0]]
        self.events: List[TrackEvent] = []
        self.lock = threading.Lock()

    @property
    def next_frame(self) -> int:
        return len(self.states)

    @property
    def done(self) -> bool:
        return self.next_frame >= self.archive.frame_count

    def _window(self):
        t = self.next_frame
        return self.archive.detections[t:t + self.cfg.N]

    def _positions_list(self, state: TrackState):
        return state.positions.tolist()

    def state_payload(self) -> dict:
        base = {
            "frame": self.next_frame,
            "frame_count": self.archive.frame_count,
            "done": self.done,
            "threshold": self.threshold,
            "graph": {
                "labels": list(self.graph.vertex_labels),
                "edges": [list(e) for e in self.graph.edges],
            },
            "prev": {"frame": self.states[-1].frame_index,
                     "positions": self._positions_list(self.states[-1])},
        }
        if self.done:
            return base
        proposal_state, diag = step(self.states[-1], self._window(), self.cfg)
        hyps = first_frame_hypotheses(self.states[-1],
                                      self.archive.detections[self.next_frame],
                                      self.cfg)
        base["detections"] = self.archive.detections[self.next_frame].points.tolist()
        base["proposal"] = {
            "positions": self._positions_list(proposal_state),
            "assignment": [int(x) for x in diag.chosen_assignment],
            "path_cost": diag.chosen_path_cost,
            "interpolated": [int(i) for i in
                             np.flatnonzero(diag.chosen_assignment == 0)],
        }
        base["alternatives"] = [{
            "positions": h.completed_state.positions.tolist(),
            "assignment": [int(x) for x in h.assignment],
            "model_cost": h.model_cost,
            "unary_cost": h.unary_cost,
        } for h in hyps]
        return base

    def accept(self) -> dict:
        if self.done:
            raise IndexError("sequence already finished")
        state, diag = step(self.states[-1], self._window(), self.cfg)
        self.states.append(state)
        if diag.fallback:
            self.events.append(TrackEvent(state.frame_index, "fallback",
                                          diag.fallback))
        self.events.append(TrackEvent(state.frame_index, "accept"))
        return self.state_payload()

    def correct(self, positions) -> dict:
        if self.done:
            raise IndexError("sequence already finished")
        pos = np.asarray(positions, dtype=np.float64)
        n = self.graph.n
        if pos.shape != (n, 3) or not np.all(np.isfinite(pos)):
            raise ValueError(f"correction must be {n} finite 3-vectors")
        frame = self.archive.detections[self.next_frame].frame_index
        self.states.append(TrackState(frame, pos))
        self.events.append(TrackEvent(frame, "correct"))
        return self.state_payload()

    def seek(self, frame: int) -> dict:
        if not 1 <= frame <= len(self.states):
            raise IndexError(f"cannot seek to frame {frame}")
        self.states = self.states[:frame]
        self.events = [e for e in self.events if e.frame_index < frame]
        return self.state_payload()

    def history_payload(self) -> dict:
        return {
            "states": [{"frame": s.frame_index,
                        "positions": self._positions_list(s)}
                       for s in self.states],
            "events": [{"frame": e.frame_index, "kind": e.kind,
                        "detail": e.detail} for e in self.events],
        }


def _make_handler(session: ReviewSession):
    class Handler(BaseHTTPRequestHandler):
        def _send(self, code: int, payload: dict):
            body = json.dumps(payload).encode()
            self.send_response(code)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(body)

        def log_message(self, fmt, *args):
            pass

        def _body(self) -> dict:
            length = int(self.headers.get("Content-Length") or 0)
            if not length:
                return {}
            return json.loads(self.rfile.read(length) or b"{}")

        def do_OPTIONS(self):
            self.send_response(204)
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
            self.send_header("Access-Control-Allow-Headers", "Content-Type")
            self.end_headers()

        def do_GET(self):
            with session.lock:
                if self.path == "/state":
                    self._send(200, session.state_payload())
                elif self.path == "/history":
                    self._send(200, session.history_payload())
                else:
                    self._send(404, {"error": f"unknown path {self.path}"})

        def do_POST(self):
            try:
                body = self._body()
            except (ValueError, json.JSONDecodeError) as exc:
                self._send(400, {"error": f"bad json: {exc}"})
                return
            with session.lock:
                try:
                    if self.path == "/accept":
                        self._send(200, session.accept())
                    elif self.path == "/correct":
                        if "positions" not in body:
                            raise ValueError("body must carry 'positions'")
                        self._send(200, session.correct(body["positions"]))
                    elif self.path == "/seek":
                        if "frame" not in body:
                            raise ValueError("body must carry 'frame'")
                        self._send(200, session.seek(int(body["frame"])))
                    else:
                        self._send(404, {"error": f"unknown path {self.path}"})
                except IndexError as exc:
                    self._send(404, {"error": str(exc)})
                except (ValueError, TypeError) as exc:
                    self._send(400, {"error": str(exc)})

    return Handler


def serve_review(archive: SequenceArchive, cfg: SearchConfig,
                 host: str = "127.0.0.1", port: int = 0,
                 threshold: float = PASS_THRESHOLD_UM):
    """Build the HTTP server (not yet serving); caller runs serve_forever()."""
    session = ReviewSession(archive, cfg, threshold)
    server = ThreadingHTTPServer((host, port), _make_handler(session))
    server.session = session
    return server
