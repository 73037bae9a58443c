"""
Aligning speech envelopes
=========================

Turns two 16-bit mono WAV recordings into normalized RMS envelopes and
registers them. Pass the two file paths on the command line; without them a
pair of synthetic tone bursts stands in.
"""

import struct
import sys
import tempfile
from pathlib import Path

import numpy as np

from clrwarp import ALL_METHODS, RegistrationConfig, register
from clrwarp.optimizer import asymmetry_probe
from clrwarp.signals import load_envelope


def burst_wav(path, onset, rate=8000):
    # A 300 Hz tone with a raised-cosine envelope starting at `onset` seconds.
    t = np.arange(rate) / rate
    env = np.clip(np.sin(np.pi * (t - onset) / 0.5), 0, None) * ((t > onset) & (t < onset + 0.5))
    pcm = (12000 * env * np.sin(2 * np.pi * 300 * t)).astype("<i2").tobytes()
    fmt = b"fmt " + struct.pack("<IHHIIHH", 16, 1, 1, rate, 2 * rate, 2, 16)
    data = b"data" + struct.pack("<I", len(pcm)) + pcm
    path.write_bytes(b"RIFF" + struct.pack("<I", 4 + len(fmt) + len(data)) + b"WAVE" + fmt + data)
    return path


if len(sys.argv) == 3:
    paths = [Path(p) for p in sys.argv[1:]]
else:
    tmp = Path(tempfile.mkdtemp())
    paths = [burst_wav(tmp / "f.wav", 0.2), burst_wav(tmp / "g.wav", 0.35)]

f = load_envelope(paths[0])
g = load_envelope(paths[1])
config = RegistrationConfig(basis_dim=15, lam=8e-5, step_size=0.05, max_iters=4000)

for m in ALL_METHODS:
    cfg = config.with_(method=m)
    r = register(f, g, cfg)
    fwd, bwd = asymmetry_probe(f, g, cfg, result=r)
    print(f"{m.label:>11}: objective {r.final_objective:.4f}  swap gap {abs(fwd - bwd) / fwd:.3f}")
