"""Policy files.

Layout: one JSON header line, then one ``t s a weight`` line per stored entry,
sorted by (t, s, a). Weights are written with ``repr`` so a save/load cycle is
bit-exact. A row whose weights are all zero is kept as a single zero entry.
The header carries the state/action grids, the horizon and a SHA-256 of the
body, so truncated or edited files are detected.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .mdp import HvacMdp, StochasticPolicy

POLICY_FORMAT = "hvac-gbpi-policy"
POLICY_VERSION = 1


class Corrupt(ValueError):
    pass


class VersionMismatch(ValueError):
    pass


def policy_header(env: HvacMdp) -> dict:
    """Grid description that a policy file must agree with to be used on ``env``."""
    sp, ac = env.states, env.actions
    return {
        "n_stages": env.n_stages,
        "grids": {"t_out": sp.t_out.to_dict(), "rh_out": sp.rh_out.to_dict(), "t_in": sp.t_in.to_dict(),
                  "rh_in": sp.rh_in.to_dict(), "occ_levels": sp.occ_levels},
        "actions": {"fau_flows": list(ac.fau_flows), "fau_temps": list(ac.fau_temps),
                    "fcu_flows": list(ac.fcu_flows), "fcu_temps": list(ac.fcu_temps)},
    }


def _body(policy: StochasticPolicy) -> str:
    lines = []
    for t in range(policy.n_stages):
        for s, row in zip(policy.states(t), policy.weights(t)):
            nz = np.flatnonzero(row)
            if len(nz) == 0:
                lines.append(f"{t} {int(s)} 0 0.0")
            for a in nz:
                lines.append(f"{t} {int(s)} {int(a)} {float(row[a])!r}")
    return "\n".join(lines) + ("\n" if lines else "")


def save_policy(policy: StochasticPolicy, path, header: dict | None = None):
    body = _body(policy)
    head = {"format": POLICY_FORMAT, "version": POLICY_VERSION, "n_stages": policy.n_stages,
            "n_actions": policy.n_actions, "layout": header or {},
            "body_sha256": hashlib.sha256(body.encode()).hexdigest()}
    Path(path).write_text(json.dumps(head, sort_keys=True) + "\n" + body)


def load_policy(path, expect: dict | None = None) -> StochasticPolicy:
    """Read a policy file; ``expect`` (see ``policy_header``) must match the stored layout."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise Corrupt(f"cannot read policy file {path}: {exc}") from None
    first, _, body = text.partition("\n")
    try:
        head = json.loads(first)
    except json.JSONDecodeError:
        raise Corrupt(f"{path}: unreadable header") from None
    if not isinstance(head, dict) or head.get("format") != POLICY_FORMAT:
        raise Corrupt(f"{path}: not a policy file")
    if head.get("version") != POLICY_VERSION:
        raise VersionMismatch(f"{path}: policy format version {head.get('version')}, expected {POLICY_VERSION}")
    if hashlib.sha256(body.encode()).hexdigest() != head.get("body_sha256"):
        raise Corrupt(f"{path}: body checksum mismatch (truncated or edited)")
    if expect is not None and head.get("layout") != json.loads(json.dumps(expect)):
        raise VersionMismatch(f"{path}: policy grids differ from the configured environment")
    T, A = int(head["n_stages"]), int(head["n_actions"])
    policy = StochasticPolicy(T, A)
    if not body:
        return policy
    try:
        raw = np.array([ln.split() for ln in body.splitlines()], dtype=object)
        t = raw[:, 0].astype(np.int64)
        s = raw[:, 1].astype(np.int64)
        a = raw[:, 2].astype(np.int64)
        w = np.array([float(x) for x in raw[:, 3]])
    except (ValueError, IndexError):
        raise Corrupt(f"{path}: malformed entry line") from None
    if np.any((t < 0) | (t >= T) | (a < 0) | (a >= A)):
        raise Corrupt(f"{path}: entry outside the declared table")
    for stage in range(T):
        sel = t == stage
        if not sel.any():
            continue
        states, inv = np.unique(s[sel], return_inverse=True)
        rows = np.zeros((len(states), A))
        rows[inv, a[sel]] = w[sel]
        policy.set_rows(stage, states, rows)
    return policy
