import base64
import json
import subprocess
import sys

import numpy as np
import pytest

from objattack.oracle import make_builtin_oracle
from objattack.tensor import ImageTensor


@pytest.fixture()
def server():
    proc = subprocess.Popen(
        [
            sys.executable, "-m", "objattack.serve",
            "--seed", "5", "--classes", "4", "--width", "6", "--height", "6",
        ],
        stdin=subprocess.PIPE,
        stdout=subprocess.PIPE,
        text=True,
        bufsize=1,
    )
    yield proc
    proc.stdin.close()
    try:
        proc.wait(timeout=5)
    except subprocess.TimeoutExpired:
        proc.kill()


def ask(proc, payload):
    proc.stdin.write(json.dumps(payload) + "\n")
    proc.stdin.flush()
    return json.loads(proc.stdout.readline())


def test_handshake_and_classify(server):
    meta = ask(server, {"type": "meta"})
    assert meta == {
        "type": "meta",
        "num_classes": 4,
        "width": 6,
        "height": 6,
        "channels": 3,
    }

    rng = np.random.default_rng(0)
    pixels = rng.uniform(0.0, 1.0, size=(6, 6, 3)).astype("<f4")
    encoded = base64.b64encode(pixels.tobytes()).decode("ascii")
    reply = ask(server, {"type": "classify", "id": 17, "pixels": encoded})

    assert reply["type"] == "probs"
    assert reply["id"] == 17
    expected = make_builtin_oracle(5, (6, 6, 3), 4).classify(
        ImageTensor(pixels.astype(np.float64))
    )
    assert reply["values"] == list(expected.values)


def test_malformed_request_gets_error_reply_then_serving_continues(server):
    ask(server, {"type": "meta"})

    server.stdin.write("this is not json\n")
    server.stdin.flush()
    error_reply = json.loads(server.stdout.readline())
    assert error_reply["type"] == "error"
    assert error_reply["message"]

    bad_length = ask(
        server,
        {"type": "classify", "id": 1, "pixels": base64.b64encode(b"1234").decode()},
    )
    assert bad_length["type"] == "error"

    # a well-formed request after the bad ones still succeeds
    pixels = np.zeros((6, 6, 3), dtype="<f4")
    good = ask(
        server,
        {
            "type": "classify",
            "id": 2,
            "pixels": base64.b64encode(pixels.tobytes()).decode(),
        },
    )
    assert good["type"] == "probs"
    assert good["id"] == 2


def test_eof_exits_cleanly(server):
    ask(server, {"type": "meta"})
    server.stdin.close()
    assert server.wait(timeout=5) == 0
