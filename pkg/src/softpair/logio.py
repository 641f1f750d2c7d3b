"""Event-log and summary files.

Event logs are tab-separated text with a fixed column order, a provenance
header (package version, backend, and the full run configuration as
``# config.`` lines, never timestamps), and a final ``# complete`` marker.
A crashed or truncated run is therefore detectable: the marker is missing.
Reruns of the same configuration produce byte-identical files.

Fixed columns (then k repeats of ``photon_energy photon_helicity
photon_costheta`` per row)::

    index k channel axisA_x axisA_y axisA_z axisB_x axisB_y axisB_z
    sA sB dirA_x dirA_y dirA_z dirB_x dirB_y dirB_z E_A
    jz_fermions jz_photons pt_x pt_y

Floats are written with ``repr`` so reading a log back reproduces every
value bit for bit; reconstructed axes match the embedded configuration's
settings by exact equality.  Photon azimuths are not logged (only
cos(theta)), so batches read from logs carry ``photon_dir_complete=False``.
"""

from __future__ import annotations

import numpy as np

from .errors import EventLogError
from .events import CHANNEL_FROM_TOKEN, Channel, EventBatch
from .quantum import Direction

_HEADER_NAMES = (
    "index", "k", "channel",
    "axisA_x", "axisA_y", "axisA_z", "axisB_x", "axisB_y", "axisB_z",
    "sA(hbar/2)", "sB(hbar/2)",
    "dirA_x", "dirA_y", "dirA_z", "dirB_x", "dirB_y", "dirB_z",
    "E_A(E)", "jz_fermions(hbar/2)", "jz_photons(hbar)", "pt_x(E)", "pt_y(E)",
)
N_FIXED = len(_HEADER_NAMES)

_COMPLETE_PREFIX = "# complete events="


def _f(x: float) -> str:
    return repr(float(x))


def write_event_log(path, batch: EventBatch, config, backend: str, version: str) -> None:
    """Stream the batch to ``path`` with provenance header and end marker."""
    from .config import config_to_items  # local import to avoid a cycle

    axis_a_str = [f"{_f(d.x)}\t{_f(d.y)}\t{_f(d.z)}" for d in batch.settings_a]
    axis_b_str = [f"{_f(d.x)}\t{_f(d.y)}\t{_f(d.z)}" for d in batch.settings_b]
    e_a_str = _f(batch.e_a)
    tokens = tuple(ch.token for ch in Channel)

    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# softpair event log\n")
        fh.write(f"# version = {version}\n")
        fh.write(f"# backend = {backend}\n")
        for key, value in config_to_items(config):
            fh.write(f"# config.{key} = {value}\n")
        fh.write("# units: energies/momenta in e_total units, spin outcomes in hbar/2, "
                 "photon helicities in hbar; directions are unit vectors\n")
        fh.write("# each row ends with k repeats of: photon_energy(E) photon_helicity(hbar) "
                 "photon_costheta\n")
        fh.write("\t".join(_HEADER_NAMES) + "\n")

        index = batch.index
        k_col = batch.k
        channel = batch.channel
        ia = batch.ia
        ib = batch.ib
        s_a = batch.s_a
        s_b = batch.s_b
        dir_a = batch.dir_a
        dir_b = batch.dir_b
        jz_f = batch.jz_fermions
        jz_ph = batch.jz_photons
        pt = batch.pt
        offs = batch.photon_offsets
        ph_e = batch.photon_energy
        ph_hel = batch.photon_helicity
        ph_cos = batch.photon_dir[:, 2]
        for i in range(len(batch)):
            parts = [
                str(int(index[i])), str(int(k_col[i])), tokens[channel[i]],
                axis_a_str[ia[i]], axis_b_str[ib[i]],
                str(int(s_a[i])), str(int(s_b[i])),
                _f(dir_a[i, 0]), _f(dir_a[i, 1]), _f(dir_a[i, 2]),
                _f(dir_b[i, 0]), _f(dir_b[i, 1]), _f(dir_b[i, 2]),
                e_a_str,
                str(int(jz_f[i])), str(int(jz_ph[i])),
                _f(pt[i, 0]), _f(pt[i, 1]),
            ]
            for j in range(int(offs[i]), int(offs[i + 1])):
                parts.append(_f(ph_e[j]))
                parts.append(str(int(ph_hel[j])))
                parts.append(_f(ph_cos[j]))
            fh.write("\t".join(parts) + "\n")
        fh.write(f"{_COMPLETE_PREFIX}{len(batch)}\n")


def read_event_log(path, require_complete: bool = True):
    """Read a log back: returns (EventBatch, RunConfig, meta dict).

    ``meta`` holds version, backend, and the completeness flag.  Raises
    EventLogError for malformed rows or (unless ``require_complete`` is
    False) a missing completion marker.
    """
    from .config import parse_config  # local import to avoid a cycle

    config_lines = []
    meta = {"version": None, "backend": None, "complete": False, "n_declared": None}
    rows = []
    header_seen = False
    try:
        fh = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise EventLogError(f"cannot open event log {path}: {exc}") from None
    with fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if line.startswith(_COMPLETE_PREFIX):
                meta["complete"] = True
                meta["n_declared"] = int(line[len(_COMPLETE_PREFIX):])
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("config."):
                    config_lines.append(body[len("config."):])
                elif body.startswith("version ="):
                    meta["version"] = body.partition("=")[2].strip()
                elif body.startswith("backend ="):
                    meta["backend"] = body.partition("=")[2].strip()
                continue
            if not line.strip():
                continue
            if not header_seen:
                if line.split("\t")[0] != _HEADER_NAMES[0]:
                    raise EventLogError(f"{path}:{lineno}: expected the column header row")
                header_seen = True
                continue
            rows.append((lineno, line))

    if not config_lines:
        raise EventLogError(f"{path}: no embedded configuration found")
    config = parse_config("\n".join(config_lines))
    if require_complete and not meta["complete"]:
        raise EventLogError(
            f"{path}: missing completion marker; the producing run did not finish"
        )
    if meta["complete"] and meta["n_declared"] != len(rows):
        raise EventLogError(
            f"{path}: completion marker declares {meta['n_declared']} events "
            f"but {len(rows)} rows are present"
        )

    lut_a = {d: i for i, d in enumerate(config.generator.settings_a)}
    lut_b = {d: i for i, d in enumerate(config.generator.settings_b)}
    n = len(rows)
    index = np.zeros(n, dtype=np.int64)
    k_col = np.zeros(n, dtype=np.int16)
    channel = np.zeros(n, dtype=np.int8)
    ia = np.zeros(n, dtype=np.int32)
    ib = np.zeros(n, dtype=np.int32)
    s_a = np.zeros(n, dtype=np.int8)
    s_b = np.zeros(n, dtype=np.int8)
    dir_a = np.zeros((n, 3), dtype=np.float64)
    dir_b = np.zeros((n, 3), dtype=np.float64)
    jz_f = np.zeros(n, dtype=np.int8)
    jz_ph = np.zeros(n, dtype=np.int16)
    pt = np.zeros((n, 2), dtype=np.float64)
    offsets = np.zeros(n + 1, dtype=np.int64)
    ph_e = []
    ph_hel = []
    ph_cos = []
    for row_i, (lineno, line) in enumerate(rows):
        parts = line.split("\t")
        if len(parts) < N_FIXED:
            raise EventLogError(f"{path}:{lineno}: expected >= {N_FIXED} columns")
        try:
            index[row_i] = int(parts[0])
            k = int(parts[1])
            k_col[row_i] = k
            channel[row_i] = int(CHANNEL_FROM_TOKEN[parts[2]])
            ax = Direction(float(parts[3]), float(parts[4]), float(parts[5]))
            bx = Direction(float(parts[6]), float(parts[7]), float(parts[8]))
            ia[row_i] = lut_a[ax]
            ib[row_i] = lut_b[bx]
            s_a[row_i] = int(parts[9])
            s_b[row_i] = int(parts[10])
            dir_a[row_i] = [float(parts[11]), float(parts[12]), float(parts[13])]
            dir_b[row_i] = [float(parts[14]), float(parts[15]), float(parts[16])]
            jz_f[row_i] = int(parts[18])
            jz_ph[row_i] = int(parts[19])
            pt[row_i] = [float(parts[20]), float(parts[21])]
        except (ValueError, KeyError) as exc:
            raise EventLogError(f"{path}:{lineno}: bad row: {exc}") from None
        if len(parts) != N_FIXED + 3 * k:
            raise EventLogError(
                f"{path}:{lineno}: row declares k={k} but has {len(parts)} columns"
            )
        offsets[row_i + 1] = offsets[row_i] + k
        for j in range(k):
            base = N_FIXED + 3 * j
            try:
                ph_e.append(float(parts[base]))
                ph_hel.append(int(parts[base + 1]))
                ph_cos.append(float(parts[base + 2]))
            except ValueError as exc:
                raise EventLogError(f"{path}:{lineno}: bad photon column: {exc}") from None

    m = len(ph_e)
    ph_dir = np.full((m, 3), np.nan, dtype=np.float64)
    if m:
        ph_dir[:, 2] = ph_cos
    batch = EventBatch(
        config.generator.settings_a, config.generator.settings_b,
        config.generator.emission.e_a,
        index, k_col, channel, ia, ib, s_a, s_b, dir_a, dir_b, jz_f, jz_ph, pt,
        offsets,
        np.asarray(ph_e, dtype=np.float64),
        np.asarray(ph_hel if ph_hel else [], dtype=np.int8),
        ph_dir,
        photon_dir_complete=False,
    )
    meta["n"] = n
    return batch, config, meta


def summary_text(config, backend: str, version: str, n_total: int, accepted: EventBatch,
                 correlations, chsh: tuple[float, float] | None, violations) -> str:
    """Deterministic summary: provenance header plus dotted key-value lines.

    ``correlations`` is a list of ((ia, ib), CorrelationEstimate).  The text
    depends only on the arguments, so a rerun or a re-analysis of the same
    log reproduces it byte for byte.
    """
    from .config import config_to_items

    lines = ["# softpair summary", f"# version = {version}", f"# backend = {backend}"]
    lines += [f"# config.{k} = {v}" for k, v in config_to_items(config)]
    n_acc = len(accepted)
    lines.append(f"events.total = {n_total}")
    lines.append(f"events.accepted = {n_acc}")
    lines.append(f"events.accepted_fraction = {_f(n_acc / n_total) if n_total else _f(0.0)}")
    counts = np.bincount(accepted.channel, minlength=3) if n_acc else np.zeros(3, dtype=int)
    for ch in Channel:
        c = int(counts[ch.value])
        frac = c / n_acc if n_acc else 0.0
        key = ch.token.replace("-", "_")
        lines.append(f"channel.{key}.count = {c}")
        lines.append(f"channel.{key}.fraction = {_f(frac)}")
    radiative = int(counts[1] + counts[2])
    lines.append(f"channel.radiative.fraction = {_f(radiative / n_acc if n_acc else 0.0)}")
    lines.append(f"photons.total = {accepted.n_photons}")
    lines.append(f"photons.mean_per_event = {_f(accepted.n_photons / n_acc if n_acc else 0.0)}")
    for slot, ((ia, ib), est) in enumerate(correlations):
        prefix = f"correlation.{slot}"
        lines.append(f"{prefix}.settings = {ia}:{ib}")
        lines.append(f"{prefix}.axis_a = {_f(est.axis_a.x)},{_f(est.axis_a.y)},{_f(est.axis_a.z)}")
        lines.append(f"{prefix}.axis_b = {_f(est.axis_b.x)},{_f(est.axis_b.y)},{_f(est.axis_b.z)}")
        lines.append(f"{prefix}.value = {_f(est.value)}")
        lines.append(f"{prefix}.stderr = {_f(est.stderr)}")
        lines.append(f"{prefix}.n = {est.n_events}")
    if chsh is not None:
        lines.append(f"chsh.value = {_f(chsh[0])}")
        lines.append(f"chsh.stderr = {_f(chsh[1])}")
    if violations is not None:
        lines.append(f"violations.axis = {_f(violations.axis.x)},{_f(violations.axis.y)},"
                     f"{_f(violations.axis.z)}")
        lines.append(f"violations.selected = {violations.n_selected}")
        lines.append(f"violations.flagged = {violations.n_violation}")
        lines.append(f"violations.fraction = {_f(violations.violation_fraction)}")
        lines.append(
            f"violations.photon_compensated = "
            f"{'true' if violations.photon_compensated else 'false'}"
        )
    return "\n".join(lines) + "\n"


def write_summary(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
