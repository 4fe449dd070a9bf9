"""Serve the builtin oracle over the child-process wire protocol.

Run as `python -m objattack.serve --seed 5 --classes 10 --width 16 --height 16`;
the parent speaks newline-delimited JSON on stdin/stdout:

  {"type": "meta"}
    -> {"type": "meta", "num_classes": K, "width": W, "height": H, "channels": 3}
  {"type": "classify", "id": N, "pixels": "<base64 little-endian float32>"}
    -> {"type": "probs", "id": N, "values": [K floats]}

Pixels are row-major, channels-last, length W*H*3. The process exits cleanly
on stdin EOF. Malformed requests get an {"type": "error"} reply and the
process keeps serving, leaving the hang-up decision to the parent.
"""

from __future__ import annotations

import argparse
import base64
import json
import sys

import numpy as np

from .oracle import make_builtin_oracle
from .tensor import ImageTensor


def _reply(payload: dict) -> None:
    sys.stdout.write(json.dumps(payload, sort_keys=True) + "\n")
    sys.stdout.flush()


def serve(seed: int, num_classes: int, width: int, height: int) -> None:
    shape = (height, width, 3)
    oracle = make_builtin_oracle(seed, shape, num_classes)
    expected_len = height * width * 3

    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        try:
            request = json.loads(line)
        except json.JSONDecodeError:
            _reply({"type": "error", "message": "request is not valid JSON"})
            continue

        kind = request.get("type")
        if kind == "meta":
            _reply(
                {
                    "type": "meta",
                    "num_classes": num_classes,
                    "width": width,
                    "height": height,
                    "channels": 3,
                }
            )
        elif kind == "classify":
            try:
                raw = base64.b64decode(request["pixels"], validate=True)
                pixels = np.frombuffer(raw, dtype="<f4")
                if pixels.size != expected_len:
                    raise ValueError(
                        f"expected {expected_len} pixels, got {pixels.size}"
                    )
                image = ImageTensor(pixels.astype(np.float64).reshape(shape))
                values = oracle.classify(image).values.tolist()
                _reply({"type": "probs", "id": request["id"], "values": values})
            except Exception as exc:
                _reply({"type": "error", "message": str(exc)})
        else:
            _reply({"type": "error", "message": f"unknown request type {kind!r}"})


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="python -m objattack.serve",
        description="serve the builtin linear-softmax oracle over stdin/stdout",
    )
    parser.add_argument("--seed", type=int, required=True)
    parser.add_argument("--classes", type=int, required=True)
    parser.add_argument("--width", type=int, required=True)
    parser.add_argument("--height", type=int, required=True)
    args = parser.parse_args(argv)
    serve(args.seed, args.classes, args.width, args.height)
    return 0


if __name__ == "__main__":
    sys.exit(main())
