import json
from pathlib import Path

from igklo.images import eta_model, gl_data, image_gl, image_quasisplit, instance, shift_composed_model

GOLDEN = Path(__file__).parent / "golden" / "ex_a_modes.json"


def ex_a(N=8):
    return image_quasisplit(instance("A", 1, [2], [0]), N=N)


def test_ex_a_golden_modes():
    m = ex_a()
    want = json.loads(GOLDEN.read_text())
    assert m.mode_json("H", 1, 0, 3) == want["H"]
    assert m.mode_json("B", 1, 1, 3) == want["B"]


def test_below_window_marker():
    m = ex_a()
    assert m.mode_json("B", 1, 0, 0) == {"0": "outside validity window"}
    assert m.mode_json("B", 1, 9, 9) == {"9": "outside validity window"}


def test_shift_composed_windows():
    base = image_quasisplit(instance("A", 1, [2], [-2]), N=6)
    sm = shift_composed_model(base, [-1])
    assert sm.mu == (0,)
    assert sm.window("H", 1)[0] == 0


def test_gl_and_eta_models_build():
    gm = image_gl(gl_data(2, [2, 0], [0, 2]), N=4)
    em = eta_model(gm)
    assert set(gm.tables) >= {("D", 1), ("D", 2), ("Dt", 1), ("E", 1)}
    assert set(em.tables) == {("H", 1), ("B", 1)}
