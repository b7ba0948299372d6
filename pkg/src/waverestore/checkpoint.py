"""Checkpoint container and its on-disk format.

Layout (documented here and in the README):

    line 1: ``waverestore-checkpoint v1`` (ASCII)
    line 2: decimal byte length of the JSON header
    header: UTF-8 JSON, sorted keys, indent 2 (human-readable)
    blob:   raw little-endian float32 parameter data, concatenated in
            manifest order

The header carries the network kind and constructor args, a parameter
manifest (name, shape, element offset into the blob), the beta table of the
training schedule (exact float round-trip through JSON), the training
config, and the iteration count.  Saving the result of a load is
byte-identical to the original file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from .nets import HighBandRefiner, NoiseEstimator
from .schedule import NoiseSchedule, from_betas

MAGIC = b"waverestore-checkpoint v1"
KIND_ESTIMATOR = "noise_estimator"
KIND_REFINER = "high_band_refiner"
_KINDS = {KIND_ESTIMATOR: NoiseEstimator, KIND_REFINER: HighBandRefiner}


@dataclass
class Checkpoint:
    kind: str
    arch: dict
    params: dict[str, np.ndarray] = field(default_factory=dict)
    schedule: NoiseSchedule | None = None
    train_config: dict | None = None
    iteration: int = 0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown checkpoint kind {self.kind!r}; expected one of {sorted(_KINDS)}")
        self.params = {k: np.ascontiguousarray(v, dtype=np.float32) for k, v in self.params.items()}

    @classmethod
    def from_net(cls, net, schedule=None, train_config=None, iteration=0) -> "Checkpoint":
        if isinstance(net, NoiseEstimator):
            kind = KIND_ESTIMATOR
        elif isinstance(net, HighBandRefiner):
            kind = KIND_REFINER
        else:
            raise ValueError(f"cannot checkpoint a {type(net).__name__}")
        params = {k: v.detach().cpu().numpy() for k, v in net.state_dict().items()}
        return cls(
            kind=kind,
            arch=net.arch(),
            params=params,
            schedule=schedule,
            train_config=train_config,
            iteration=iteration,
        )

    def build_net(self):
        """Reconstruct the network with bit-exact parameters."""
        net = _KINDS[self.kind](**self.arch)
        expected = set(net.state_dict().keys())
        got = set(self.params.keys())
        if expected != got:
            missing = sorted(expected - got)
            extra = sorted(got - expected)
            raise ValueError(f"parameter mismatch: missing={missing} unexpected={extra}")
        net.load_state_dict({k: torch.from_numpy(v.copy()) for k, v in self.params.items()})
        net.eval()
        return net

    def n_parameters(self) -> int:
        return int(sum(v.size for v in self.params.values()))


def save_checkpoint(ckpt: Checkpoint, path) -> Path:
    path = Path(path)
    manifest = []
    offset = 0
    blobs = []
    for name, arr in ckpt.params.items():
        manifest.append({"name": name, "shape": list(arr.shape), "offset": offset})
        offset += arr.size
        blobs.append(arr.astype("<f4").tobytes())
    header = {
        "kind": ckpt.kind,
        "arch": ckpt.arch,
        "manifest": manifest,
        "total_elements": offset,
        "schedule": None
        if ckpt.schedule is None
        else {"T": ckpt.schedule.T, "beta": [float(b) for b in ckpt.schedule.beta[1:]]},
        "train_config": ckpt.train_config,
        "iteration": ckpt.iteration,
    }
    payload = json.dumps(header, sort_keys=True, indent=2).encode("utf-8")
    with path.open("wb") as fh:
        fh.write(MAGIC + b"\n")
        fh.write(str(len(payload)).encode("ascii") + b"\n")
        fh.write(payload)
        for b in blobs:
            fh.write(b)
    return path


def load_checkpoint(path) -> Checkpoint:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"checkpoint not found: {path}")
    with path.open("rb") as fh:
        magic = fh.readline().rstrip(b"\n")
        if magic != MAGIC:
            raise ValueError(
                f"{path} is not a waverestore checkpoint (or wrong version): "
                f"expected {MAGIC.decode()!r}, found {magic[:40]!r}"
            )
        try:
            header_len = int(fh.readline().strip())
        except ValueError:
            raise ValueError(f"{path}: malformed header length line")
        header = json.loads(fh.read(header_len).decode("utf-8"))
        blob = fh.read()
    total = header["total_elements"]
    data = np.frombuffer(blob, dtype="<f4")
    if data.size != total:
        raise ValueError(
            f"{path}: blob holds {data.size} float32 values, header promises {total}"
        )
    params = {}
    for entry in header["manifest"]:
        n = int(np.prod(entry["shape"])) if entry["shape"] else 1
        chunk = data[entry["offset"] : entry["offset"] + n]
        params[entry["name"]] = chunk.reshape(entry["shape"]).copy()
    sched = None
    if header["schedule"] is not None:
        sched = from_betas(np.asarray(header["schedule"]["beta"], dtype=np.float64))
    return Checkpoint(
        kind=header["kind"],
        arch=header["arch"],
        params=params,
        schedule=sched,
        train_config=header["train_config"],
        iteration=header["iteration"],
    )
